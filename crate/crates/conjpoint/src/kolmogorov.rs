//! Closed-form cell geometry for the torus stream functions
//! f(x, y) = -cos(mx) cos(ny) on the flat 2-torus.
//!
//! In coordinates X = sin(mx), Y = sin(ny) the cell trajectories are Jacobi
//! elliptic, the radial coordinate is r^2 = X^2 + Y^2 - X^2 Y^2, and the cell
//! data comes out in complete elliptic integrals:
//!
//!   u(r)   = pi m n / (2 K(r))
//!   phi(r) = 2 r K(r) / (pi m n sqrt(1 - r^2))
//!   G(r)   = 4 (m^2+n^2) r (1-r^2) K(r) K'(r) / (m^2 n^2 pi^2)
//!   E(r)   = (m^2+n^2) J(r) / (m^2 n^2 (1-r^2)^2 K(r))
//!
//! with K' = dK/dr and J(r) the integral of [sn dn - cn zn]^2 over a quarter
//! period. The simplified upper bound mbar(r) = (G/phi) Q' + Q^2 - 1 for the
//! (1,1) cell controls M(r) from above (Cauchy-Schwarz gives E G >= phi^2)
//! and is negative on all of (0,1), which is why single-cell variations can
//! never certify a conjugate point for these flows.

use crate::elliptic::{self, EllipticError};
use crate::expr::Jet4;
use crate::index::{self, IndexError, IndexQuadratic, TestFunctionXi, Verdict};
use crate::profiles::{ProfileError, RadialFn, RadialProfile};
use crate::quadrature::{integrate, QuadratureError, QuadratureSpec};

/// Radii this close to 1 are rejected: K(r) diverges logarithmically there.
pub const R_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KolmogorovError {
    #[error("wavenumbers must satisfy m >= 1 and n >= 1, got ({0}, {1})")]
    BadWavenumbers(u32, u32),
    #[error("r = {0} outside the cell radius range (0, {R_MAX})")]
    RadiusOutOfRange(f64),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// One rotational cell of the (m, n) Kolmogorov flow.
#[derive(Debug, Clone, Copy)]
pub struct KolmogorovCell {
    pub m: u32,
    pub n: u32,
}

fn check_radius(r: f64) -> Result<f64, KolmogorovError> {
    if !(r > 0.0 && r <= R_MAX) {
        return Err(KolmogorovError::RadiusOutOfRange(r));
    }
    Ok(r)
}

impl KolmogorovCell {
    pub fn new(m: u32, n: u32) -> Result<Self, KolmogorovError> {
        if m < 1 || n < 1 {
            return Err(KolmogorovError::BadWavenumbers(m, n));
        }
        Ok(KolmogorovCell { m, n })
    }

    fn mn(&self) -> f64 {
        self.m as f64 * self.n as f64
    }

    fn sum_sq(&self) -> f64 {
        (self.m as f64).powi(2) + (self.n as f64).powi(2)
    }

    /// Angular velocity u(r) = pi m n / (2 K(r)).
    pub fn u(&self, r: f64) -> Result<f64, KolmogorovError> {
        let r = check_radius(r)?;
        Ok(std::f64::consts::PI * self.mn() / (2.0 * elliptic::complete_k(r)?))
    }

    pub fn u_jet(&self, r: f64) -> Result<Jet4, KolmogorovError> {
        let r = check_radius(r)?;
        let (kj, _) = elliptic::k_e_jets(r)?;
        let num = Jet4::constant(std::f64::consts::PI * self.mn() / 2.0);
        Ok(num.try_div(kj).expect("K > 0"))
    }

    /// Area-form density phi(r) = 2 r K(r) / (pi m n sqrt(1-r^2)).
    pub fn phi(&self, r: f64) -> Result<f64, KolmogorovError> {
        Ok(self.phi_jet(r)?.value())
    }

    pub fn phi_jet(&self, r: f64) -> Result<Jet4, KolmogorovError> {
        let r = check_radius(r)?;
        let (kj, _) = elliptic::k_e_jets(r)?;
        let x = Jet4::variable(r);
        let sq = (Jet4::constant(1.0) - x * x).sqrt().expect("1-r^2 > 0");
        let num = x * kj * (2.0 / (std::f64::consts::PI * self.mn()));
        Ok(num.try_div(sq).expect("sqrt positive"))
    }

    /// Averaged G(r) via the K K' form of the closed formula.
    pub fn g(&self, r: f64) -> Result<f64, KolmogorovError> {
        Ok(self.g_jet(r)?.value())
    }

    pub fn g_jet(&self, r: f64) -> Result<Jet4, KolmogorovError> {
        let r = check_radius(r)?;
        let (kj, _) = elliptic::k_e_jets(r)?;
        let x = Jet4::variable(r);
        let om = Jet4::constant(1.0) - x * x;
        let c = 4.0 * self.sum_sq() / (self.mn().powi(2) * std::f64::consts::PI.powi(2));
        Ok(x * om * kj * kj.derivative() * c)
    }

    /// Same G through the bracketed form K [E - (1-r^2) K]; the agreement of
    /// the two routes is itself a correctness check on dK/dr.
    pub fn g_bracket_form(&self, r: f64) -> Result<f64, KolmogorovError> {
        let r = check_radius(r)?;
        let (big_k, big_e) = elliptic::complete_k_e(r)?;
        let c = 4.0 * self.sum_sq() / (self.mn().powi(2) * std::f64::consts::PI.powi(2));
        Ok(c * big_k * (big_e - (1.0 - r * r) * big_k))
    }

    /// J(r) = int_0^K(r) [sn dn - cn zn]^2 dtau.
    pub fn j_integral(&self, r: f64) -> Result<f64, KolmogorovError> {
        let r = check_radius(r)?;
        let big_k = elliptic::complete_k(r)?;
        let spec = QuadratureSpec::default();
        let q = integrate(
            |tau| {
                let (sn, cn, dn) = elliptic::sn_cn_dn(tau, r).expect("valid modulus");
                let zn = elliptic::jacobi_zeta(tau, r).expect("valid modulus");
                let b = sn * dn - cn * zn;
                b * b
            },
            0.0,
            big_k,
            &spec,
        )?;
        Ok(q.value)
    }

    /// Averaged E(r); value only (no closed form for derivatives of J).
    pub fn e(&self, r: f64) -> Result<f64, KolmogorovError> {
        let r = check_radius(r)?;
        let big_k = elliptic::complete_k(r)?;
        let j = self.j_integral(r)?;
        Ok(self.sum_sq() * j / (self.mn().powi(2) * (1.0 - r * r).powi(2) * big_k))
    }

    /// Vorticity omega(r) = (m^2+n^2) sqrt(1-r^2).
    pub fn omega(&self, r: f64) -> Result<f64, KolmogorovError> {
        let r = check_radius(r)?;
        Ok(self.sum_sq() * (1.0 - r * r).sqrt())
    }

    /// The cell as a general radial profile on (0, 1).
    ///
    /// E carries no derivatives (its jet is poisoned above order 0); the
    /// index integrals only need E values. Radii in the sliver
    /// (R_MAX, 1] are clamped to R_MAX, where K(r) has not yet blown up and
    /// every test function has already decayed to nothing.
    pub fn profile(&self) -> Result<RadialProfile, KolmogorovError> {
        let cell = *self;
        let phi = RadialFn::builtin(format!("kolmogorov-phi({},{})", self.m, self.n), move |r| {
            if r == 0.0 {
                // phi ~ r/(mn) near 0; series jet keeps constructors happy
                let x = Jet4::variable(0.0);
                return Ok(x * (1.0 / cell.mn()));
            }
            cell.phi_jet(r.min(R_MAX)).map_err(kerr_to_perr)
        });
        let u = RadialFn::builtin(format!("kolmogorov-u({},{})", self.m, self.n), move |r| {
            if r == 0.0 {
                return Ok(Jet4::constant(cell.mn()));
            }
            cell.u_jet(r.min(R_MAX)).map_err(kerr_to_perr)
        });
        let g = RadialFn::builtin(format!("kolmogorov-G({},{})", self.m, self.n), move |r| {
            if r == 0.0 {
                // G ~ (m^2+n^2)/(2 m^2 n^2) r^2 near 0
                let x = Jet4::variable(0.0);
                let c = cell.sum_sq() / (2.0 * cell.mn().powi(2));
                return Ok(x * x * c);
            }
            cell.g_jet(r.min(R_MAX)).map_err(kerr_to_perr)
        });
        let e = RadialFn::builtin(format!("kolmogorov-E({},{})", self.m, self.n), move |r| {
            if r == 0.0 {
                return Ok(Jet4::constant(cell.sum_sq() / cell.mn().powi(2)));
            }
            let v = cell.e(r.min(R_MAX)).map_err(kerr_to_perr)?;
            // value only: poison the derivative slots so accidental use
            // surfaces as a NaN sample in quadrature
            Ok(Jet4::from_derivatives([
                v,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
            ]))
        });
        RadialProfile::general(phi, u, e, g, 1.0).map_err(KolmogorovError::Profile)
    }

    /// Flow of the cell vector field through (s, 0) in the square
    /// coordinates: X = s cn(mnt, s)/dn(mnt, s), Y = s sn(mnt, s).
    pub fn flow_xy(&self, t: f64, s: f64) -> Result<(f64, f64), KolmogorovError> {
        let s = check_radius(s)?;
        let tau = self.mn() * t;
        let (sn, cn, dn) = elliptic::sn_cn_dn(tau, s)?;
        Ok((s * cn / dn, s * sn))
    }
}

fn kerr_to_perr(e: KolmogorovError) -> ProfileError {
    ProfileError::Invariant(format!("kolmogorov cell evaluation: {e}"))
}

/// v11(r) = sqrt(1-r^2) (1 + (1-r^2) K'(r)^2 / K(r)^2), the v-function of
/// the (1,1) cell.
pub fn v11(r: f64) -> Result<f64, KolmogorovError> {
    Ok(v11_jet(r)?.value())
}

fn v11_jet(r: f64) -> Result<Jet4, KolmogorovError> {
    let r = check_radius(r)?;
    let (kj, _) = elliptic::k_e_jets(r)?;
    let x = Jet4::variable(r);
    let om = Jet4::constant(1.0) - x * x;
    let sq = om.sqrt().expect("1-r^2 > 0");
    let ratio = kj.derivative().try_div(kj).expect("K > 0");
    Ok(sq * (Jet4::constant(1.0) + om * ratio * ratio))
}

/// Q11(r) = v11'/u11' in closed form:
/// (2/(pi r sqrt(1-r^2))) [ r^2 K^2/K' - 2 r (1-r^2) K
///                          + (2-3r^2)(1-r^2) K' + 2 r (1-r^2)^2 K'^2/K ].
pub fn q11(r: f64) -> Result<f64, KolmogorovError> {
    Ok(q11_jet(r)?.value())
}

fn q11_jet(r: f64) -> Result<Jet4, KolmogorovError> {
    let r = check_radius(r)?;
    let (kj, _) = elliptic::k_e_jets(r)?;
    let kp = kj.derivative();
    let x = Jet4::variable(r);
    let om = Jet4::constant(1.0) - x * x;
    let sq = om.sqrt().expect("1-r^2 > 0");
    let bracket = (x * x * kj * kj).try_div(kp).expect("K' > 0 on (0,1)")
        - x * om * kj * 2.0
        + (Jet4::constant(2.0) - x * x * 3.0) * om * kp
        + (x * om * om * kp * kp).try_div(kj).expect("K > 0") * 2.0;
    let denom = x * sq * (std::f64::consts::PI / 2.0);
    Ok(bracket.try_div(denom).expect("r sqrt(1-r^2) > 0"))
}

/// Simplified upper bound mbar(r) = (G/phi) Q' + Q^2 - 1 for the (1,1) cell;
/// G/phi = (4/pi) (1-r^2)^{3/2} K'(r).
pub fn mbar(r: f64) -> Result<f64, KolmogorovError> {
    let r = check_radius(r)?;
    let q = q11_jet(r)?;
    let (kj, _) = elliptic::k_e_jets(r)?;
    let g_over_phi = 4.0 / std::f64::consts::PI * (1.0 - r * r).powf(1.5) * kj.d(1);
    Ok(g_over_phi * q.d(1) + q.value() * q.value() - 1.0)
}

/// Report of the single-cell positivity run.
#[derive(Debug, Clone)]
pub struct CellPositivityReport {
    pub m: u32,
    pub n: u32,
    pub quadratic: IndexQuadratic,
    /// True when the minimized index stayed nonnegative, i.e. the variation
    /// could not reduce energy.
    pub positive: bool,
}

/// Run the drift minimization on the cell profile for one test function and
/// report whether the index stayed positive (it always should: M <= mbar < 0).
pub fn cell_index_positivity(
    m: u32,
    n: u32,
    xi: &TestFunctionXi,
) -> Result<CellPositivityReport, KolmogorovError> {
    let cell = KolmogorovCell::new(m, n)?;
    let profile = cell.profile()?;
    // E(r) comes out of a nested quadrature, so the integrand carries noise
    // around 1e-11; the default 1e-10 target would fragment forever.
    let spec = QuadratureSpec::noisy_integrand();
    let quadratic = index::minimize_over_alpha_spec(&profile, xi, &spec)?;
    let positive = quadratic.verdict == Verdict::Inconclusive && quadratic.i_min >= -quadratic.margin;
    Ok(CellPositivityReport {
        m,
        n,
        quadratic,
        positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn small_radius_limits() {
        let cell = KolmogorovCell::new(1, 1).unwrap();
        assert_close(cell.u(1e-9).unwrap(), 1.0, 1e-8);
        assert_close(cell.phi(1e-6).unwrap() / 1e-6, 1.0, 1e-6);
        let c32 = KolmogorovCell::new(3, 2).unwrap();
        assert_close(c32.u(1e-9).unwrap(), 6.0, 1e-8);
    }

    #[test]
    fn g_two_forms_agree() {
        for (m, n) in [(1u32, 1u32), (3, 2)] {
            let cell = KolmogorovCell::new(m, n).unwrap();
            for r in [0.1, 0.3, 0.5, 0.8, 0.95] {
                let a = cell.g(r).unwrap();
                let b = cell.g_bracket_form(r).unwrap();
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn e_limit_is_one_for_unit_cell() {
        let cell = KolmogorovCell::new(1, 1).unwrap();
        assert_close(cell.e(1e-4).unwrap(), 1.0, 1e-6);
        assert_close(cell.e(0.5).unwrap(), 1.3849347343950633, 1e-8);
    }

    #[test]
    fn cauchy_schwarz_on_grid() {
        let cell = KolmogorovCell::new(1, 1).unwrap();
        for i in 1..20 {
            let r = i as f64 * 0.05;
            let e = cell.e(r).unwrap();
            let g = cell.g(r).unwrap();
            let phi = cell.phi(r).unwrap();
            assert!(e * g >= phi * phi, "r={r}: EG={} phi^2={}", e * g, phi * phi);
        }
    }

    #[test]
    fn scaling_laws_between_cells() {
        // The (m,n) dependence factors out: u ~ mn, phi ~ 1/(mn),
        // G and E ~ (m^2+n^2)/(m^2 n^2).
        let base = KolmogorovCell::new(1, 1).unwrap();
        for (m, n) in [(3u32, 2u32), (2, 2), (5, 1)] {
            let cell = KolmogorovCell::new(m, n).unwrap();
            let mn = (m * n) as f64;
            let s2 = (m * m + n * n) as f64;
            for r in [0.2, 0.6, 0.9] {
                assert_close(cell.u(r).unwrap(), mn * base.u(r).unwrap(), 1e-12);
                assert_close(cell.phi(r).unwrap(), base.phi(r).unwrap() / mn, 1e-12);
                assert_close(
                    cell.g(r).unwrap() * mn * mn / s2,
                    base.g(r).unwrap() / 2.0,
                    1e-12,
                );
                assert_close(
                    cell.e(r).unwrap() * mn * mn / s2,
                    base.e(r).unwrap() / 2.0,
                    1e-10,
                );
            }
        }
    }

    #[test]
    fn profile_roundtrip_and_omega() {
        let cell = KolmogorovCell::new(1, 1).unwrap();
        let p = cell.profile().unwrap();
        // omega from the profile jets equals (m^2+n^2) sqrt(1-r^2)
        for r in [0.1, 0.4, 0.7, 0.9] {
            assert_close(p.omega(r).unwrap(), cell.omega(r).unwrap(), 1e-9);
        }
    }

    #[test]
    fn flow_initial_point_period_and_invariant() {
        let (m, n, s) = (3u32, 2u32, 0.4f64);
        let cell = KolmogorovCell::new(m, n).unwrap();
        let (x0, y0) = cell.flow_xy(0.0, s).unwrap();
        assert_close(x0, s, 1e-15);
        assert!(y0.abs() < 1e-15);

        let period = 4.0 * elliptic::complete_k(s).unwrap() / cell.mn();
        let (xp, yp) = cell.flow_xy(period, s).unwrap();
        assert!((xp - s).abs() <= 1e-10 && yp.abs() <= 1e-10, "({xp}, {yp})");

        // conserved quantity X^2 + Y^2 - X^2 Y^2 = s^2 along the orbit
        for i in 0..20 {
            let t = period * i as f64 / 20.0;
            let (x, y) = cell.flow_xy(t, s).unwrap();
            assert!((x * x + y * y - x * x * y * y - s * s).abs() <= 1e-10);
        }
    }

    #[test]
    fn flow_ode_residual() {
        let (m, n, s, t0) = (3u32, 2u32, 0.4f64, 0.37f64);
        let cell = KolmogorovCell::new(m, n).unwrap();
        let h = 1e-6;
        let mn = cell.mn();
        let (x, y) = cell.flow_xy(t0, s).unwrap();
        let (xp1, yp1) = cell.flow_xy(t0 + h, s).unwrap();
        let (xm1, ym1) = cell.flow_xy(t0 - h, s).unwrap();
        let dx = (xp1 - xm1) / (2.0 * h);
        let dy = (yp1 - ym1) / (2.0 * h);
        assert!((dx + mn * y * (1.0 - x * x)).abs() <= 1e-7);
        assert!((dy - mn * x * (1.0 - y * y)).abs() <= 1e-7);
    }

    #[test]
    fn complementary_symmetry() {
        // X(r, pi/2 - theta) = Y(r, theta) through tau = 2 K theta / pi.
        let r = 0.55;
        let cell = KolmogorovCell::new(1, 1).unwrap();
        let big_k = elliptic::complete_k(r).unwrap();
        for i in 0..9 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 8.0;
            let tau = 2.0 * big_k * theta / std::f64::consts::PI;
            let tau_c = big_k - tau;
            // t values realizing those polar angles for mn = 1
            let (x_c, _) = cell.flow_xy(tau_c, r).unwrap();
            let (_, y) = cell.flow_xy(tau, r).unwrap();
            assert_close(x_c, y, 1e-11);
        }
    }

    #[test]
    fn q11_closed_form_matches_jet_route() {
        // Q = v'/u' computed from jets of v11 and u11 must agree with the
        // closed form; they are independent code paths.
        let cell = KolmogorovCell::new(1, 1).unwrap();
        for r in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9] {
            let v = v11_jet(r).unwrap();
            let u = cell.u_jet(r).unwrap();
            let q_jets = v.derivative().try_div(u.derivative()).unwrap().value();
            assert_close(q11(r).unwrap(), q_jets, 1e-9);
        }
        // v11 itself equals G'u/(2 phi) assembled from the cell formulas
        let p = cell.profile().unwrap();
        for r in [0.2, 0.5, 0.8] {
            assert_close(p.v_jet(r).unwrap().value(), v11(r).unwrap(), 1e-10);
        }
    }

    #[test]
    fn mbar_small_r_expansion_and_negativity() {
        for r in [0.02, 0.05, 0.1] {
            let m = mbar(r).unwrap();
            let pred = -r * r / 2.0 - 35.0 * r.powi(4) / 64.0;
            let resid = (m - pred).abs();
            assert!(
                resid <= 1.0 * r.powi(6),
                "r={r}: resid {resid} not O(r^6)"
            );
        }
        assert!(mbar(0.5).unwrap() < 0.0);
        let mut i = 1;
        while i <= 99 {
            let r = i as f64 * 0.01;
            assert!(mbar(r).unwrap() < 0.0, "mbar({r}) >= 0");
            i += 1;
        }
    }

    #[test]
    fn cell_positivity_for_simple_xi() {
        let xi = TestFunctionXi::with_support(
            Expression::parse("r*(1 - r)").unwrap(),
            0.0,
            1.0,
            1.0,
        )
        .unwrap();
        for (m, n) in [(1u32, 1u32), (3, 2)] {
            let rep = cell_index_positivity(m, n, &xi).unwrap();
            assert!(rep.positive, "({m},{n}): {:?}", rep.quadratic);
            assert!(rep.quadratic.discriminant < 0.0);
            assert_eq!(rep.quadratic.verdict, Verdict::Inconclusive);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KolmogorovCell::new(0, 1).is_err());
        let cell = KolmogorovCell::new(1, 1).unwrap();
        assert!(cell.u(0.9999999).is_err());
        assert!(cell.phi(-0.1).is_err());
        assert!(mbar(1.0).is_err());
    }
}
