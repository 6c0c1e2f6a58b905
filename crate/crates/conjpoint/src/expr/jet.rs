//! Truncated Taylor jets of order 4.
//!
//! A [`Jet4`] carries the value of a function together with its first four
//! derivatives at a point, propagated exactly through arithmetic and the
//! elementary functions (no finite differencing). Internally the five slots
//! are normalized Taylor coefficients `t[k] = f^(k)/k!`, which turns
//! multiplication into a Cauchy product.

// Convolution-style loops over fixed-size coefficient arrays read clearer
// with explicit indices.
#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const JET_LEN: usize = 5;

/// Value plus derivatives d0..d4 at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    t: [f64; JET_LEN],
}

/// Domain failures of jet-level elementary functions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("division by zero jet")]
    DivisionByZero,
    #[error("removable division failed: numerator does not vanish with denominator")]
    NotRemovable,
    #[error("{func} applied outside its domain (argument {value})")]
    Domain { func: &'static str, value: f64 },
    #[error("abs is not differentiable at zero")]
    AbsAtZero,
}

const FACTORIAL: [f64; JET_LEN] = [1.0, 1.0, 2.0, 6.0, 24.0];

impl Jet4 {
    pub fn constant(c: f64) -> Self {
        Jet4 {
            t: [c, 0.0, 0.0, 0.0, 0.0],
        }
    }

    /// The identity function r at the point `x`: value x, first derivative 1.
    pub fn variable(x: f64) -> Self {
        Jet4 {
            t: [x, 1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Build from raw derivatives d0..d4.
    pub fn from_derivatives(d: [f64; JET_LEN]) -> Self {
        let mut t = [0.0; JET_LEN];
        for k in 0..JET_LEN {
            t[k] = d[k] / FACTORIAL[k];
        }
        Jet4 { t }
    }

    /// Build directly from Taylor coefficients `f^(k)/k!`.
    pub fn from_taylor(t: [f64; JET_LEN]) -> Self {
        Jet4 { t }
    }

    pub fn taylor(&self) -> [f64; JET_LEN] {
        self.t
    }

    pub fn value(&self) -> f64 {
        self.t[0]
    }

    /// k-th derivative, k <= 4.
    pub fn d(&self, k: usize) -> f64 {
        self.t[k] * FACTORIAL[k]
    }

    pub fn is_finite(&self) -> bool {
        self.t.iter().all(|c| c.is_finite())
    }

    /// Jet of the derivative function f'. The top coefficient is lost, so the
    /// result is trustworthy through order 3 only.
    pub fn derivative(&self) -> Jet4 {
        let mut t = [0.0; JET_LEN];
        for k in 0..JET_LEN - 1 {
            t[k] = (k as f64 + 1.0) * self.t[k + 1];
        }
        Jet4 { t }
    }

    pub fn try_div(self, rhs: Jet4) -> Result<Jet4, JetError> {
        if rhs.t[0] == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(div_raw(&self.t, &rhs.t))
    }

    /// Division with cancellation of a common zero at the expansion point.
    ///
    /// When the denominator value vanishes, both jets are shifted down while
    /// the numerator vanishes along with it (l'Hopital applied coefficientwise).
    /// Each shift costs one trustworthy order.
    pub fn div_removable(self, rhs: Jet4) -> Result<Jet4, JetError> {
        let mut num = self.t;
        let mut den = rhs.t;
        let num_scale = num.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let den_scale = den.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut shifts = 0;
        while den[0].abs() <= 1e-9 * den_scale && shifts < JET_LEN - 1 {
            if num[0].abs() > 1e-9 * num_scale {
                return Err(JetError::NotRemovable);
            }
            for k in 0..JET_LEN - 1 {
                num[k] = num[k + 1];
                den[k] = den[k + 1];
            }
            num[JET_LEN - 1] = 0.0;
            den[JET_LEN - 1] = 0.0;
            shifts += 1;
        }
        if den[0] == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // Shifting coefficient arrays multiplies both series by r^{-shifts} up
        // to binomial renormalization; since both are plain Taylor arrays the
        // shifted quotient is the quotient of the shifted series, valid to
        // order 4 - shifts. Zero out the unreliable tail.
        let mut q = div_raw(&num, &den);
        for k in (JET_LEN - shifts)..JET_LEN {
            q.t[k] = 0.0;
        }
        Ok(q)
    }

    pub fn sin(self) -> Jet4 {
        self.sin_cos().0
    }

    pub fn cos(self) -> Jet4 {
        self.sin_cos().1
    }

    pub fn sin_cos(self) -> (Jet4, Jet4) {
        let f = self.t;
        let mut s = [0.0; JET_LEN];
        let mut c = [0.0; JET_LEN];
        let (s0, c0) = f[0].sin_cos();
        s[0] = s0;
        c[0] = c0;
        // s' = c f', c' = -s f'
        for k in 0..JET_LEN - 1 {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for i in 0..=k {
                let fp = (i as f64 + 1.0) * f[i + 1];
                ds += c[k - i] * fp;
                dc += s[k - i] * fp;
            }
            s[k + 1] = ds / (k as f64 + 1.0);
            c[k + 1] = -dc / (k as f64 + 1.0);
        }
        (Jet4 { t: s }, Jet4 { t: c })
    }

    pub fn sinh_cosh(self) -> (Jet4, Jet4) {
        let f = self.t;
        let mut s = [0.0; JET_LEN];
        let mut c = [0.0; JET_LEN];
        s[0] = f[0].sinh();
        c[0] = f[0].cosh();
        for k in 0..JET_LEN - 1 {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for i in 0..=k {
                let fp = (i as f64 + 1.0) * f[i + 1];
                ds += c[k - i] * fp;
                dc += s[k - i] * fp;
            }
            s[k + 1] = ds / (k as f64 + 1.0);
            c[k + 1] = dc / (k as f64 + 1.0);
        }
        (Jet4 { t: s }, Jet4 { t: c })
    }

    pub fn sinh(self) -> Jet4 {
        self.sinh_cosh().0
    }

    pub fn cosh(self) -> Jet4 {
        self.sinh_cosh().1
    }

    pub fn tan(self) -> Result<Jet4, JetError> {
        let (s, c) = self.sin_cos();
        if c.t[0] == 0.0 {
            return Err(JetError::Domain {
                func: "tan",
                value: self.t[0],
            });
        }
        s.try_div(c)
    }

    pub fn tanh(self) -> Result<Jet4, JetError> {
        let (s, c) = self.sinh_cosh();
        s.try_div(c)
    }

    pub fn exp(self) -> Jet4 {
        let f = self.t;
        let mut g = [0.0; JET_LEN];
        g[0] = f[0].exp();
        // g' = g f'
        for k in 0..JET_LEN - 1 {
            let mut d = 0.0;
            for i in 0..=k {
                d += g[k - i] * (i as f64 + 1.0) * f[i + 1];
            }
            g[k + 1] = d / (k as f64 + 1.0);
        }
        Jet4 { t: g }
    }

    pub fn ln(self) -> Result<Jet4, JetError> {
        if self.t[0] <= 0.0 {
            return Err(JetError::Domain {
                func: "ln",
                value: self.t[0],
            });
        }
        let f = self.t;
        let mut g = [0.0; JET_LEN];
        g[0] = f[0].ln();
        // g' = f'/f computed as a series quotient, integrated termwise
        let fp = self.derivative();
        let q = div_raw(&fp.t, &f);
        for k in 0..JET_LEN - 1 {
            g[k + 1] = q.t[k] / (k as f64 + 1.0);
        }
        Ok(Jet4 { t: g })
    }

    pub fn sqrt(self) -> Result<Jet4, JetError> {
        if self.t[0] < 0.0 {
            return Err(JetError::Domain {
                func: "sqrt",
                value: self.t[0],
            });
        }
        if self.t[0] == 0.0 {
            if self.t.iter().all(|c| *c == 0.0) {
                return Ok(Jet4::constant(0.0));
            }
            return Err(JetError::Domain {
                func: "sqrt",
                value: 0.0,
            });
        }
        let f = self.t;
        let mut g = [0.0; JET_LEN];
        g[0] = f[0].sqrt();
        for k in 1..JET_LEN {
            let mut s = f[k];
            for i in 1..k {
                s -= g[i] * g[k - i];
            }
            g[k] = s / (2.0 * g[0]);
        }
        Ok(Jet4 { t: g })
    }

    pub fn abs(self) -> Result<Jet4, JetError> {
        if self.t[0] > 0.0 {
            Ok(self)
        } else if self.t[0] < 0.0 {
            Ok(-self)
        } else if self.t.iter().all(|c| *c == 0.0) {
            Ok(self)
        } else {
            Err(JetError::AbsAtZero)
        }
    }

    /// Integer power by repeated multiplication.
    pub fn powi(self, n: i64) -> Result<Jet4, JetError> {
        if n == 0 {
            return Ok(Jet4::constant(1.0));
        }
        let mut base = self;
        let mut neg = false;
        let mut e = n;
        if e < 0 {
            neg = true;
            e = -e;
        }
        let mut acc = Jet4::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if neg {
            Jet4::constant(1.0).try_div(acc)
        } else {
            Ok(acc)
        }
    }

    /// General power: integer exponents multiply out, the rest routes
    /// through exp/ln and requires a positive base.
    pub fn pow(self, exponent: Jet4) -> Result<Jet4, JetError> {
        let is_const = exponent.t[1..].iter().all(|c| *c == 0.0);
        if is_const {
            let e = exponent.t[0];
            if e == e.trunc() && e.abs() <= 64.0 {
                return self.powi(e as i64);
            }
        }
        if self.t[0] <= 0.0 {
            return Err(JetError::Domain {
                func: "^",
                value: self.t[0],
            });
        }
        Ok((exponent * self.ln()?).exp())
    }
}

fn div_raw(num: &[f64; JET_LEN], den: &[f64; JET_LEN]) -> Jet4 {
    let mut q = [0.0; JET_LEN];
    for k in 0..JET_LEN {
        let mut s = num[k];
        for i in 0..k {
            s -= q[i] * den[k - i];
        }
        q[k] = s / den[0];
    }
    Jet4 { t: q }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        let mut t = self.t;
        for k in 0..JET_LEN {
            t[k] += rhs.t[k];
        }
        Jet4 { t }
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        let mut t = self.t;
        for k in 0..JET_LEN {
            t[k] -= rhs.t[k];
        }
        Jet4 { t }
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        let mut t = self.t;
        for c in &mut t {
            *c = -*c;
        }
        Jet4 { t }
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let mut t = [0.0; JET_LEN];
        for k in 0..JET_LEN {
            let mut s = 0.0;
            for i in 0..=k {
                s += self.t[i] * rhs.t[k - i];
            }
            t[k] = s;
        }
        Jet4 { t }
    }
}

impl Mul<f64> for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: f64) -> Jet4 {
        let mut t = self.t;
        for c in &mut t {
            *c *= rhs;
        }
        Jet4 { t }
    }
}

impl fmt::Display for Jet4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}, {}]",
            self.d(0),
            self.d(1),
            self.d(2),
            self.d(3),
            self.d(4)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            "{a} vs {b}"
        );
    }

    #[test]
    fn product_leibniz() {
        // (fg)'' = f''g + 2f'g' + fg'' for f = sin, g = exp at x=0.7
        let x = Jet4::variable(0.7);
        let p = x.sin() * x.exp();
        let f = 0.7f64;
        assert_close(p.d(0), f.sin() * f.exp(), 1e-14);
        assert_close(p.d(1), f.cos() * f.exp() + f.sin() * f.exp(), 1e-14);
        assert_close(p.d(2), 2.0 * f.cos() * f.exp(), 1e-13);
    }

    #[test]
    fn quotient_matches_known_series() {
        // tan = sin/cos at 0: derivatives 0,1,0,2,0
        let x = Jet4::variable(0.0);
        let t = x.tan().unwrap();
        for (k, want) in [0.0, 1.0, 0.0, 2.0, 0.0].iter().enumerate() {
            assert_close(t.d(k), *want, 1e-14);
        }
    }

    #[test]
    fn removable_division() {
        // sin(r)/r at r=0 -> 1 - r^2/6: value 1, d1 0, d2 -1/3
        let x = Jet4::variable(0.0);
        let q = x.sin().div_removable(x).unwrap();
        assert_close(q.d(0), 1.0, 1e-14);
        assert_close(q.d(1), 0.0, 1e-14);
        assert_close(q.d(2), -1.0 / 3.0, 1e-13);
        assert!(x.cos().div_removable(x).is_err());
    }

    #[test]
    fn sqrt_and_pow() {
        let x = Jet4::variable(2.0);
        let s = x.sqrt().unwrap();
        assert_close(s.d(0), 2.0f64.sqrt(), 1e-15);
        assert_close(s.d(1), 0.5 / 2.0f64.sqrt(), 1e-15);
        let p = x.pow(Jet4::constant(3.0)).unwrap();
        assert_close(p.d(0), 8.0, 1e-14);
        assert_close(p.d(1), 12.0, 1e-14);
        assert_close(p.d(2), 12.0, 1e-14);
        assert_close(p.d(3), 6.0, 1e-13);
        assert_close(p.d(4), 0.0, 1e-13);
        let q = x.pow(Jet4::constant(0.5)).unwrap();
        assert_close(q.d(0), s.d(0), 1e-13);
        assert_close(q.d(1), s.d(1), 1e-13);
    }

    #[test]
    fn domain_errors() {
        let x = Jet4::variable(-1.0);
        assert!(x.ln().is_err());
        assert!(x.sqrt().is_err());
        assert!(x.pow(Jet4::constant(0.5)).is_err());
        assert!(Jet4::variable(0.0).abs().is_err());
        assert!(Jet4::constant(5.0)
            .try_div(Jet4::constant(0.0))
            .is_err());
    }
}
