//! Exact trigonometric-polynomial algebra on the flat 2-torus and the
//! Misiolek criterion for Kolmogorov stream functions.
//!
//! Everything is exact rational arithmetic over the real product basis
//! {cos jx, sin jx} x {cos ky, sin ky}: products expand by product-to-sum
//! identities, the torus integral reads off the constant coefficient, and the
//! criterion value comes out as an exact rational multiple of pi^2. Test
//! functions for the criterion are notoriously sensitive to coefficient
//! changes, hence no floating point anywhere on this path.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TorusError {
    #[error("zeta parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("wavenumbers must be positive, got ({0}, {1})")]
    BadWavenumbers(i64, i64),
}

/// cos- or sin-type factor in one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

/// One basis element cos/sin(j x) * cos/sin(k y). `Sin` with index 0 is the
/// zero function and never appears in a canonical polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrigKey {
    pub px: Parity,
    pub j: u32,
    pub py: Parity,
    pub k: u32,
}

/// Exact trigonometric polynomial on the torus; zero coefficients absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly2 {
    terms: BTreeMap<TrigKey, BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// An exact rational multiple of pi^2.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPiSquared {
    pub q: BigRational,
}

impl RationalPiSquared {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.q) * std::f64::consts::PI * std::f64::consts::PI
    }

    pub fn is_negative(&self) -> bool {
        self.q.is_negative()
    }
}

impl fmt::Display for RationalPiSquared {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.denom().is_one() {
            write!(f, "{} pi^2", self.q.numer())
        } else {
            write!(f, "{}/{} pi^2", self.q.numer(), self.q.denom())
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    let n = q.numer();
    let d = q.denom();
    // exact conversion is unnecessary; these stay small in practice
    let nf = n.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = d.to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl TrigPoly2 {
    pub fn zero() -> Self {
        TrigPoly2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TrigKey, &BigRational)> {
        self.terms.iter()
    }

    pub fn term(coeff: BigRational, px: Parity, j: u32, py: Parity, k: u32) -> Self {
        let mut p = TrigPoly2::zero();
        p.add_term(coeff, px, j, py, k);
        p
    }

    pub fn term_int(coeff: i64, px: Parity, j: u32, py: Parity, k: u32) -> Self {
        Self::term(rat(coeff), px, j, py, k)
    }

    fn add_term(&mut self, coeff: BigRational, px: Parity, j: u32, py: Parity, k: u32) {
        if coeff.is_zero() {
            return;
        }
        if (px == Parity::Sin && j == 0) || (py == Parity::Sin && k == 0) {
            return; // identically zero basis element
        }
        let key = TrigKey { px, j, py, k };
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &TrigPoly2) -> TrigPoly2 {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(v.clone(), k.px, k.j, k.py, k.k);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> TrigPoly2 {
        if c.is_zero() {
            return TrigPoly2::zero();
        }
        TrigPoly2 {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v * c))
                .collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> TrigPoly2 {
        self.scale(&rat(c))
    }

    /// Exact term-by-term partial derivative.
    pub fn derivative(&self, axis: Axis) -> TrigPoly2 {
        let mut out = TrigPoly2::zero();
        for (key, v) in &self.terms {
            match axis {
                Axis::X => {
                    if key.j == 0 {
                        continue;
                    }
                    let f = BigRational::from_integer(BigInt::from(key.j));
                    match key.px {
                        Parity::Cos => {
                            out.add_term(-v * &f, Parity::Sin, key.j, key.py, key.k)
                        }
                        Parity::Sin => out.add_term(v * &f, Parity::Cos, key.j, key.py, key.k),
                    }
                }
                Axis::Y => {
                    if key.k == 0 {
                        continue;
                    }
                    let f = BigRational::from_integer(BigInt::from(key.k));
                    match key.py {
                        Parity::Cos => {
                            out.add_term(-v * &f, key.px, key.j, Parity::Sin, key.k)
                        }
                        Parity::Sin => out.add_term(v * &f, key.px, key.j, Parity::Cos, key.k),
                    }
                }
            }
        }
        out
    }

    /// Exact product via product-to-sum expansion along each axis.
    pub fn product(&self, other: &TrigPoly2) -> TrigPoly2 {
        let mut out = TrigPoly2::zero();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let coeff = va * vb;
                for (px, j, sx) in combine_1d(ka.px, ka.j, kb.px, kb.j) {
                    for (py, k, sy) in combine_1d(ka.py, ka.k, kb.py, kb.k) {
                        let c = &coeff * &half * &half * rat(sx * sy);
                        out.add_term(c, px, j, py, k);
                    }
                }
            }
        }
        out
    }

    /// Poisson bracket on the flat torus: {f, g} = f_x g_y - f_y g_x.
    pub fn poisson_bracket(&self, other: &TrigPoly2) -> TrigPoly2 {
        let fx_gy = self.derivative(Axis::X).product(&other.derivative(Axis::Y));
        let fy_gx = self.derivative(Axis::Y).product(&other.derivative(Axis::X));
        fx_gy.add(&fy_gx.scale_int(-1))
    }

    /// Exact integral over [0, 2pi]^2, returned as a multiple of pi^2
    /// (the constant basis element integrates to 4 pi^2, everything else to 0).
    pub fn integral_t2(&self) -> RationalPiSquared {
        let key = TrigKey {
            px: Parity::Cos,
            j: 0,
            py: Parity::Cos,
            k: 0,
        };
        let c00 = self.terms.get(&key).cloned().unwrap_or_else(BigRational::zero);
        RationalPiSquared { q: c00 * rat(4) }
    }

    /// Floating-point evaluation, for cross-checks only.
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (key, v) in &self.terms {
            let fx = match key.px {
                Parity::Cos => (key.j as f64 * x).cos(),
                Parity::Sin => (key.j as f64 * x).sin(),
            };
            let fy = match key.py {
                Parity::Cos => (key.k as f64 * y).cos(),
                Parity::Sin => (key.k as f64 * y).sin(),
            };
            acc += rational_to_f64(v) * fx * fy;
        }
        acc
    }
}

/// Expand (trig_a(j) * trig_b(k)) into sum/difference-frequency terms with
/// sign multipliers; returns entries (parity, |freq|, sign) each carrying an
/// implicit 1/2 handled by the caller... the caller multiplies by 1/2 per
/// axis, so exactly two entries come back per combination.
fn combine_1d(pa: Parity, a: u32, pb: Parity, b: u32) -> Vec<(Parity, u32, i64)> {
    let diff = a as i64 - b as i64;
    let sum = a as i64 + b as i64;
    let cos_at = |f: i64| (Parity::Cos, f.unsigned_abs() as u32, 1i64);
    let sin_at = |f: i64, mult: i64| {
        // sin(-f) = -sin(f), sin(0) = 0 handled by add_term's canonical rule
        if f < 0 {
            (Parity::Sin, (-f) as u32, -mult)
        } else {
            (Parity::Sin, f as u32, mult)
        }
    };
    match (pa, pb) {
        // cos a cos b = 1/2 [cos(a-b) + cos(a+b)]
        (Parity::Cos, Parity::Cos) => vec![cos_at(diff), cos_at(sum)],
        // sin a sin b = 1/2 [cos(a-b) - cos(a+b)]
        (Parity::Sin, Parity::Sin) => {
            let (p, f, _) = cos_at(sum);
            vec![cos_at(diff), (p, f, -1)]
        }
        // sin a cos b = 1/2 [sin(a+b) + sin(a-b)]
        (Parity::Sin, Parity::Cos) => vec![sin_at(sum, 1), sin_at(diff, 1)],
        // cos a sin b = 1/2 [sin(a+b) - sin(a-b)]
        (Parity::Cos, Parity::Sin) => vec![sin_at(sum, 1), sin_at(diff, -1)],
    }
}

/// Kolmogorov stream function f = -cos(mx) cos(ny).
pub fn kolmogorov_stream(m: u32, n: u32) -> TrigPoly2 {
    TrigPoly2::term_int(-1, Parity::Cos, m, Parity::Cos, n)
}

/// The Misiolek criterion value
/// iota(zeta) = int |grad phi|^2 - (m^2+n^2) phi^2 over the torus,
/// phi = {f, zeta}, f = -cos(mx) cos(ny); exact multiple of pi^2.
/// A negative value certifies an eventual conjugate point along the flow.
pub fn misiolek_index(m: u32, n: u32, zeta: &TrigPoly2) -> Result<RationalPiSquared, TorusError> {
    if m < 1 || n < 1 {
        return Err(TorusError::BadWavenumbers(m as i64, n as i64));
    }
    let f = kolmogorov_stream(m, n);
    let phi = f.poisson_bracket(zeta);
    let gx = phi.derivative(Axis::X);
    let gy = phi.derivative(Axis::Y);
    let eigen = rat((m * m + n * n) as i64);
    let integrand = gx
        .product(&gx)
        .add(&gy.product(&gy))
        .add(&phi.product(&phi).scale(&(-eigen)));
    Ok(integrand.integral_t2())
}

/// zeta_m1 = cos x (4 + cos 2y); makes iota = (29 - 12 m^2) pi^2 / 4 for
/// m >= 2 (at m = 1 frequency collisions change the value).
pub fn zeta_m1() -> TrigPoly2 {
    TrigPoly2::term_int(4, Parity::Cos, 1, Parity::Cos, 0)
        .add(&TrigPoly2::term_int(1, Parity::Cos, 1, Parity::Cos, 2))
}

/// The (2,2) test function; iota = -854 pi^2 exactly.
pub fn zeta_22() -> TrigPoly2 {
    symmetric_pair(240, 1, 0)
        .add(&symmetric_pair(-28, 3, 0))
        .add(&symmetric_pair(-9, 5, 0))
        .add(&symmetric_pair(-5, 4, 5))
        .add(&symmetric_pair(-10, 3, 4))
}

/// x<->y symmetric pair c (cos jx cos ky + cos kx cos jy).
fn symmetric_pair(c: i64, j: u32, k: u32) -> TrigPoly2 {
    TrigPoly2::term_int(c, Parity::Cos, j, Parity::Cos, k)
        .add(&TrigPoly2::term_int(c, Parity::Cos, k, Parity::Cos, j))
}

/// The (3,2) test function; iota = -764865/8 pi^2 exactly.
pub fn zeta_32() -> TrigPoly2 {
    let rows: [(i64, i64, i64, u32); 6] = [
        // (const, cos6x, cos12x) coefficients against cos(k y)
        (0, 1320, 235, 1),
        (1000, 1060, 190, 3),
        (550, 650, 125, 5),
        (195, 270, 63, 7),
        (50, 73, 22, 9),
        (10, 10, 3, 11),
    ];
    let mut z = TrigPoly2::zero();
    for (c0, c6, c12, k) in rows {
        z = z
            .add(&TrigPoly2::term_int(c0, Parity::Cos, 0, Parity::Cos, k))
            .add(&TrigPoly2::term_int(c6, Parity::Cos, 6, Parity::Cos, k))
            .add(&TrigPoly2::term_int(c12, Parity::Cos, 12, Parity::Cos, k));
    }
    z
}

/// Variant of the cos(9y) row of `zeta_32` with the modulating factors in y
/// instead of x. Kept for comparison; its criterion value is large positive.
pub fn zeta_32_y_variant() -> TrigPoly2 {
    let base = zeta_32();
    // remove the x-form row: (50 + 73 cos6x + 22 cos12x) cos 9y
    let remove = TrigPoly2::term_int(-50, Parity::Cos, 0, Parity::Cos, 9)
        .add(&TrigPoly2::term_int(-73, Parity::Cos, 6, Parity::Cos, 9))
        .add(&TrigPoly2::term_int(-22, Parity::Cos, 12, Parity::Cos, 9));
    // add the y-form row: (50 + 73 cos6y + 22 cos12y) cos 9y expanded
    let y_form = TrigPoly2::term_int(50, Parity::Cos, 0, Parity::Cos, 9).add(
        &TrigPoly2::term_int(73, Parity::Cos, 0, Parity::Cos, 6)
            .add(&TrigPoly2::term_int(22, Parity::Cos, 0, Parity::Cos, 12))
            .product(&TrigPoly2::term_int(1, Parity::Cos, 0, Parity::Cos, 9)),
    );
    base.add(&remove).add(&y_form)
}

/// The (3,3) test function; iota = -51939 pi^2 exactly.
pub fn zeta_33() -> TrigPoly2 {
    TrigPoly2::term_int(2000, Parity::Cos, 1, Parity::Cos, 0)
        .add(&TrigPoly2::term_int(-36, Parity::Cos, 5, Parity::Cos, 6))
        .add(&TrigPoly2::term_int(-84, Parity::Cos, 5, Parity::Cos, 0))
        .add(&TrigPoly2::term_int(-40, Parity::Cos, 7, Parity::Cos, 0))
        .add(&TrigPoly2::term_int(-22, Parity::Cos, 7, Parity::Cos, 6))
}

/// The published-region test function zeta = cos(mx + y) cos(ny), expanded
/// into the product basis.
pub fn dmsy_zeta(m: u32, n: u32) -> TrigPoly2 {
    // cos(mx + y) = cos mx cos y - sin mx sin y
    let lhs = TrigPoly2::term_int(1, Parity::Cos, m, Parity::Cos, 1)
        .add(&TrigPoly2::term_int(-1, Parity::Sin, m, Parity::Sin, 1));
    lhs.product(&TrigPoly2::term_int(1, Parity::Cos, 0, Parity::Cos, n))
}

/// Membership in the region n >= 2, m > (3n^2+6)/(sqrt(3) n), decided in
/// exact integer arithmetic: m^2 n^2 > 3 (n^2 + 2)^2.
pub fn dmsy_region(m: u32, n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let (m, n) = (m as i64, n as i64);
    m * m * n * n > 3 * (n * n + 2) * (n * n + 2)
}

/// Region membership together with the exact criterion value for the
/// region's test function.
pub fn dmsy_check(m: u32, n: u32) -> Result<(bool, RationalPiSquared), TorusError> {
    let idx = misiolek_index(m, n, &dmsy_zeta(m, n))?;
    Ok((dmsy_region(m, n), idx))
}

/// Parse the text format for zeta files: one term per line,
/// `coeff * trig(j x) * trig(k y)` with trig in {cos, sin} and exact rational
/// coefficients like `-764865/8`. Blank lines and `#` comments are skipped.
pub fn parse_zeta(text: &str) -> Result<TrigPoly2, TorusError> {
    let mut poly = TrigPoly2::zero();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('*').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(TorusError::Parse {
                line: line_no,
                message: format!(
                    "expected `coeff * trig(j x) * trig(k y)`, got {} fields",
                    parts.len()
                ),
            });
        }
        let coeff = parse_rational(parts[0]).map_err(|message| TorusError::Parse {
            line: line_no,
            message,
        })?;
        let (px, j) = parse_factor(parts[1], 'x').map_err(|message| TorusError::Parse {
            line: line_no,
            message,
        })?;
        let (py, k) = parse_factor(parts[2], 'y').map_err(|message| TorusError::Parse {
            line: line_no,
            message,
        })?;
        poly.add_term(coeff, px, j, py, k);
    }
    Ok(poly)
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let mk = |t: &str| -> Result<BigInt, String> {
        t.parse::<BigInt>()
            .map_err(|_| format!("cannot parse integer `{t}`"))
    };
    if let Some((n, d)) = s.split_once('/') {
        let denom = mk(d.trim())?;
        if denom.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(mk(n.trim())?, denom))
    } else {
        Ok(BigRational::from_integer(mk(s)?))
    }
}

fn parse_factor(s: &str, var: char) -> Result<(Parity, u32), String> {
    let (parity, rest) = if let Some(r) = s.strip_prefix("cos") {
        (Parity::Cos, r)
    } else if let Some(r) = s.strip_prefix("sin") {
        (Parity::Sin, r)
    } else {
        return Err(format!("expected cos(..) or sin(..), got `{s}`"));
    };
    let inner = rest
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("expected parentheses in `{s}`"))?;
    let inner = inner.trim();
    let body = inner
        .strip_suffix(var)
        .ok_or_else(|| format!("factor `{s}` must end in `{var}`"))?
        .trim();
    let freq: u32 = if body.is_empty() {
        1
    } else {
        body.parse()
            .map_err(|_| format!("cannot parse frequency `{body}` in `{s}`"))?
    };
    Ok((parity, freq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat_pair(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn derivative_rules() {
        // d/dx cos(2x)cos(y) = -2 sin(2x) cos(y)
        let p = TrigPoly2::term_int(1, Parity::Cos, 2, Parity::Cos, 1);
        let d = p.derivative(Axis::X);
        assert_eq!(
            d,
            TrigPoly2::term_int(-2, Parity::Sin, 2, Parity::Cos, 1)
        );
        // d/dy zeta_m1 = cos x * (-2 sin 2y)
        let d = zeta_m1().derivative(Axis::Y);
        assert_eq!(
            d,
            TrigPoly2::term_int(-2, Parity::Cos, 1, Parity::Sin, 2)
        );
        // d/dx constant = 0
        assert!(TrigPoly2::term_int(7, Parity::Cos, 0, Parity::Cos, 0)
            .derivative(Axis::X)
            .is_zero());
    }

    #[test]
    fn product_to_sum() {
        // cos x * cos x = 1/2 + 1/2 cos 2x
        let c = TrigPoly2::term_int(1, Parity::Cos, 1, Parity::Cos, 0);
        let sq = c.product(&c);
        let want = TrigPoly2::term(rat_pair(1, 2), Parity::Cos, 0, Parity::Cos, 0)
            .add(&TrigPoly2::term(rat_pair(1, 2), Parity::Cos, 2, Parity::Cos, 0));
        assert_eq!(sq, want);
        // p * 0 = 0
        assert!(c.product(&TrigPoly2::zero()).is_zero());
    }

    #[test]
    fn product_matches_pointwise_sampling() {
        // the DMSY zeta expansion agrees with direct evaluation on a grid
        let z = dmsy_zeta(4, 2);
        for i in 0..32 {
            for jj in 0..32 {
                let x = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                let y = 2.0 * std::f64::consts::PI * jj as f64 / 32.0;
                let direct = (4.0 * x + y).cos() * (2.0 * y).cos();
                assert!(
                    (z.eval_f64(x, y) - direct).abs() <= 1e-12,
                    "mismatch at ({i},{jj})"
                );
            }
        }
    }

    #[test]
    fn bracket_antisymmetry_and_leibniz() {
        let f = kolmogorov_stream(3, 2);
        let g = zeta_m1();
        let h = dmsy_zeta(2, 2);
        assert!(f.poisson_bracket(&f).is_zero());
        let fg = f.poisson_bracket(&g);
        let gf = g.poisson_bracket(&f);
        assert_eq!(fg, gf.scale_int(-1));
        // {f, g h} = g {f, h} + h {f, g}
        let lhs = f.poisson_bracket(&g.product(&h));
        let rhs = g.product(&f.poisson_bracket(&h)).add(&h.product(&fg));
        assert_eq!(lhs, rhs);
        // {constant, g} = 0
        let c = TrigPoly2::term_int(5, Parity::Cos, 0, Parity::Cos, 0);
        assert!(c.poisson_bracket(&g).is_zero());
    }

    #[test]
    fn bracket_matches_termwise_expansion() {
        // {-cos mx cos y, cos x (4 + cos 2y)} =
        //   -2m sin mx cos y sin 2y cos x + cos mx sin x sin y (4 + cos 2y).
        // (The relative sign between the terms matters only for m = 1: the
        // cross term integrates to zero for m >= 2, so the published index
        // values cannot tell the two apart. This is the f_x g_y - f_y g_x
        // expansion.)
        let m = 3u32;
        let f = kolmogorov_stream(m, 1);
        let phi = f.poisson_bracket(&zeta_m1());
        for i in 0..16 {
            for j in 0..16 {
                let x = 2.0 * std::f64::consts::PI * i as f64 / 16.0 + 0.01;
                let y = 2.0 * std::f64::consts::PI * j as f64 / 16.0 + 0.02;
                let mf = m as f64;
                let want = -2.0 * mf * (mf * x).sin() * y.cos() * (2.0 * y).sin() * x.cos()
                    + (mf * x).cos() * x.sin() * y.sin() * (4.0 + (2.0 * y).cos());
                assert!((phi.eval_f64(x, y) - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn torus_integrals() {
        // cos^2(3x) cos^2(2y) integrates to pi^2
        let p = TrigPoly2::term_int(1, Parity::Cos, 3, Parity::Cos, 2);
        assert_eq!(p.product(&p).integral_t2().q, rat(1));
        // odd things integrate to zero
        let c = TrigPoly2::term_int(1, Parity::Cos, 1, Parity::Cos, 0);
        assert!(c.integral_t2().q.is_zero());
        // sin^2(2x) integrates to 2 pi^2
        let s = TrigPoly2::term_int(1, Parity::Sin, 2, Parity::Cos, 0);
        assert_eq!(s.product(&s).integral_t2().q, rat(2));
    }

    #[test]
    fn parseval_diagonal() {
        // integral of p^2 = sum over terms of coeff^2 * basis norm
        let p = zeta_22();
        let norm = p.product(&p).integral_t2().q;
        let mut acc = BigRational::zero();
        for (key, v) in p.terms() {
            let mut cell = rat(4);
            if key.j > 0 {
                cell /= rat(2);
            }
            if key.k > 0 {
                cell /= rat(2);
            }
            acc += v * v * cell;
        }
        assert_eq!(norm, acc);
    }

    #[test]
    fn appendix_exact_values() {
        for m in 2..=6u32 {
            let idx = misiolek_index(m, 1, &zeta_m1()).unwrap();
            assert_eq!(idx.q, rat_pair(29 - 12 * (m as i64) * (m as i64), 4));
        }
        assert_eq!(misiolek_index(2, 2, &zeta_22()).unwrap().q, rat(-854));
        assert_eq!(
            misiolek_index(3, 2, &zeta_32()).unwrap().q,
            rat_pair(-764865, 8)
        );
        assert_eq!(misiolek_index(3, 3, &zeta_33()).unwrap().q, rat(-51939));
    }

    #[test]
    fn resonant_m1_case_is_positive() {
        // frequency collisions at m = 1 break the (29-12m^2)/4 pattern; the
        // exact value is 43/8 > 0, consistent with (1,1) staying open.
        let idx = misiolek_index(1, 1, &zeta_m1()).unwrap();
        assert_eq!(idx.q, rat_pair(43, 8));
        assert!(!idx.is_negative());
    }

    #[test]
    fn zeta_32_y_variant_fails_to_certify() {
        let idx = misiolek_index(3, 2, &zeta_32_y_variant()).unwrap();
        assert!(!idx.is_negative());
    }

    #[test]
    fn float_cross_check() {
        // exact iota vs 256x256 trapezoid quadrature of the same integrand
        for (m, n, zeta) in [
            (2u32, 1u32, zeta_m1()),
            (2, 2, zeta_22()),
            (3, 3, zeta_33()),
        ] {
            let exact = misiolek_index(m, n, &zeta).unwrap();
            let f = kolmogorov_stream(m, n);
            let phi = f.poisson_bracket(&zeta);
            let gx = phi.derivative(Axis::X);
            let gy = phi.derivative(Axis::Y);
            let nn = 256usize;
            let h = 2.0 * std::f64::consts::PI / nn as f64;
            let mut acc = 0.0;
            for i in 0..nn {
                for j in 0..nn {
                    let x = h * i as f64;
                    let y = h * j as f64;
                    let p = phi.eval_f64(x, y);
                    acc += gx.eval_f64(x, y).powi(2) + gy.eval_f64(x, y).powi(2)
                        - ((m * m + n * n) as f64) * p * p;
                }
            }
            acc *= h * h;
            let want = exact.to_f64();
            assert!(
                (acc - want).abs() <= 1e-6 * (1.0 + want.abs()),
                "({m},{n}): {acc} vs {want}"
            );
        }
    }

    #[test]
    fn dmsy_region_membership() {
        assert!(dmsy_region(7, 2));
        assert!(!dmsy_region(2, 2));
        assert!(!dmsy_region(5, 2)); // 5.196 bound just above 5
        assert!(dmsy_region(6, 2));
        assert!(!dmsy_region(12, 1)); // n = 1 excluded entirely
    }

    #[test]
    fn dmsy_members_certify_up_to_twelve() {
        for n in 2..=12u32 {
            for m in n..=12u32 {
                if dmsy_region(m, n) {
                    let (member, idx) = dmsy_check(m, n).unwrap();
                    assert!(member);
                    assert!(idx.is_negative(), "({m},{n}): {idx}");
                }
            }
        }
    }

    #[test]
    fn zeta_text_format() {
        let text = "# the m1 test function\n4 * cos(x) * cos(0y)\n1 * cos(1x) * cos(2y)\n";
        let z = parse_zeta(text).unwrap();
        assert_eq!(z, zeta_m1());
        let bad = parse_zeta("4 cos(x) cos(y)");
        assert!(matches!(bad, Err(TorusError::Parse { line: 1, .. })));
        let rational = parse_zeta("-764865/8 * sin(3x) * sin(11y)").unwrap();
        assert!(!rational.is_zero());
        assert!(parse_zeta("1/0 * cos(x) * cos(y)").is_err());
    }
}
