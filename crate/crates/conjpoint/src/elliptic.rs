//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything is driven by the arithmetic--geometric mean: K and E come from
//! the AGM chain itself, sn/cn/dn from the descending Landen transformation
//! seeded by that chain, and the Jacobi zeta function from the classical sum
//! `zn(u) = sum_i c_i sin(phi_i)` over the same backward amplitude recursion.
//!
//! The modulus is written `k` throughout; the papers this serves use `r` for
//! the same quantity, but `r` is also their radial coordinate.

use crate::expr::Jet4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error("modulus k = {0} outside [0, 1)")]
    ModulusOutOfRange(f64),
    #[error("non-finite argument {0}")]
    NonFiniteArgument(f64),
}

/// Validated modulus in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(0.0..1.0).contains(&k) {
            return Err(EllipticError::ModulusOutOfRange(k));
        }
        Ok(EllipticModulus(k))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

const AGM_MAX_ITER: usize = 40;

/// Complete elliptic integrals K(k) and E(k) by the AGM,
/// with the modulus convention K(k) = int_0^{pi/2} (1 - k^2 sin^2)^/{-1/2}.
pub fn complete_k_e(k: f64) -> Result<(f64, f64), EllipticError> {
    let k = EllipticModulus::new(k)?.get();
    if k == 0.0 {
        return Ok((std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow2 = 1.0f64;
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        let cn = 0.5 * (a - b);
        pow2 *= 2.0;
        sum += 0.5 * pow2 * cn * cn;
        a = an;
        b = bn;
        c = cn;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    let big_k = std::f64::consts::FRAC_PI_2 / a;
    let big_e = big_k * (1.0 - sum);
    Ok((big_k, big_e))
}

pub fn complete_k(k: f64) -> Result<f64, EllipticError> {
    complete_k_e(k).map(|(big_k, _)| big_k)
}

pub fn complete_e(k: f64) -> Result<f64, EllipticError> {
    complete_k_e(k).map(|(_, big_e)| big_e)
}

/// Order-4 jets of K and E with respect to the modulus.
///
/// The derivatives follow from the first-order system
/// `dK/dk = (E - (1-k^2)K) / (k(1-k^2))`, `dE/dk = (E - K)/k`,
/// iterated coefficientwise. Near k = 0 those right-hand sides are 0/0, so a
/// truncated Maclaurin series takes over (accurate to ~1e-28 at the cutoff).
pub fn k_e_jets(k: f64) -> Result<(Jet4, Jet4), EllipticError> {
    let k = EllipticModulus::new(k)?.get();
    if k < 1e-3 {
        return Ok(k_e_jets_series(k));
    }
    let (big_k, big_e) = complete_k_e(k)?;
    let mut tk = [big_k, 0.0, 0.0, 0.0, 0.0];
    let mut te = [big_e, 0.0, 0.0, 0.0, 0.0];
    let x = Jet4::variable(k);
    let one = Jet4::constant(1.0);
    for n in 0..4 {
        let kj = Jet4::from_taylor(tk);
        let ej = Jet4::from_taylor(te);
        let om = one - x * x;
        let rk = (ej - om * kj)
            .div_removable(x * om)
            .expect("k(1-k^2) nonzero for k in (0,1)");
        let re = (ej - kj)
            .div_removable(x)
            .expect("k nonzero on the AGM branch");
        tk[n + 1] = rk.taylor()[n] / (n as f64 + 1.0);
        te[n + 1] = re.taylor()[n] / (n as f64 + 1.0);
    }
    Ok((Jet4::from_taylor(tk), Jet4::from_taylor(te)))
}

fn k_e_jets_series(k: f64) -> (Jet4, Jet4) {
    // K = (pi/2) sum [(2n-1)!!/(2n)!!]^2 k^{2n},  E with the /(1-2n) factor.
    const KC: [f64; 5] = [
        1.0,
        0.25,
        9.0 / 64.0,
        25.0 / 256.0,
        1225.0 / 16384.0,
    ];
    let x = Jet4::variable(k);
    let x2 = x * x;
    let mut k_acc = Jet4::constant(0.0);
    let mut e_acc = Jet4::constant(0.0);
    let mut p = Jet4::constant(1.0);
    for (n, c) in KC.iter().enumerate() {
        k_acc = k_acc + p * *c;
        let ec = if n == 0 {
            *c
        } else {
            -*c / (2.0 * n as f64 - 1.0)
        };
        e_acc = e_acc + p * ec;
        p = p * x2;
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    (k_acc * half_pi, e_acc * half_pi)
}

/// dK/dk expressed through K and E.
pub fn k_prime(k: f64) -> Result<f64, EllipticError> {
    let (big_k, big_e) = complete_k_e(k)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    Ok((big_e - (1.0 - k * k) * big_k) / (k * (1.0 - k * k)))
}

struct AgmChain {
    /// a_i values, index 0 is the seed a_0 = 1.
    a: Vec<f64>,
    /// c_i values, same indexing.
    c: Vec<f64>,
}

fn agm_chain(k: f64) -> AgmChain {
    let mut a = vec![1.0f64];
    let mut c = vec![k];
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..AGM_MAX_ITER {
        let last = *a.last().unwrap();
        if c.last().unwrap().abs() <= f64::EPSILON * last {
            break;
        }
        let an = 0.5 * (last + b);
        let bn = (last * b).sqrt();
        let cn = 0.5 * (last - b);
        a.push(an);
        c.push(cn);
        b = bn;
    }
    AgmChain { a, c }
}

/// Backward amplitude recursion shared by sn/cn/dn and the zeta function.
fn amplitudes(tau: f64, chain: &AgmChain) -> Vec<f64> {
    let n = chain.a.len() - 1;
    let mut phis = vec![0.0; n + 1];
    phis[n] = (1u64 << n) as f64 * chain.a[n] * tau;
    for i in (1..=n).rev() {
        let s = (chain.c[i] / chain.a[i] * phis[i].sin()).clamp(-1.0, 1.0);
        phis[i - 1] = 0.5 * (phis[i] + s.asin());
    }
    phis
}

/// Jacobi elliptic sn, cn, dn at real argument `tau`.
pub fn sn_cn_dn(tau: f64, k: f64) -> Result<(f64, f64, f64), EllipticError> {
    let k = EllipticModulus::new(k)?.get();
    if !tau.is_finite() {
        return Err(EllipticError::NonFiniteArgument(tau));
    }
    if k < 1e-14 {
        return Ok((tau.sin(), tau.cos(), 1.0));
    }
    let chain = agm_chain(k);
    let phis = amplitudes(tau, &chain);
    let sn = phis[0].sin();
    let cn = phis[0].cos();
    // dn >= sqrt(1-k^2) > 0 on the real line, so the identity root is safe
    // (the cn/cos(phi1-phi0) form is 0/0 at odd multiples of K).
    let dn = (1.0 - k * k * sn * sn).max(0.0).sqrt();
    Ok((sn, cn, dn))
}

/// Jacobi zeta zn(tau, k), vanishing at tau = 0 and tau = K(k).
pub fn jacobi_zeta(tau: f64, k: f64) -> Result<f64, EllipticError> {
    let k = EllipticModulus::new(k)?.get();
    if !tau.is_finite() {
        return Err(EllipticError::NonFiniteArgument(tau));
    }
    if k < 1e-14 {
        return Ok(0.0);
    }
    let chain = agm_chain(k);
    let phis = amplitudes(tau, &chain);
    let mut z = 0.0;
    for (c, phi) in chain.c.iter().zip(&phis).skip(1) {
        z += c * phi.sin();
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn complete_integrals_at_zero() {
        let (k0, e0) = complete_k_e(0.0).unwrap();
        assert_eq!(k0, FRAC_PI_2);
        assert_eq!(e0, FRAC_PI_2);
    }

    #[test]
    fn k_against_defining_integral() {
        // Oracle: adaptive quadrature of the defining integral.
        use crate::quadrature::{integrate, QuadratureSpec};
        for k in [0.2, 0.5, 0.8, 0.95] {
            let direct = integrate(
                |phi: f64| 1.0 / (1.0 - k * k * phi.sin().powi(2)).sqrt(),
                0.0,
                FRAC_PI_2,
                &QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            assert_close(complete_k(k).unwrap(), direct, 1e-13);
            let direct_e = integrate(
                |phi: f64| (1.0 - k * k * phi.sin().powi(2)).sqrt(),
                0.0,
                FRAC_PI_2,
                &QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            assert_close(complete_e(k).unwrap(), direct_e, 1e-13);
        }
        assert_close(complete_k(0.5).unwrap(), 1.685_750_354_812_596, 1e-13);
    }

    #[test]
    fn k_derivative_identity_vs_finite_differences() {
        let k = 0.3;
        let h = 1e-6;
        let num = (complete_k(k + h).unwrap() - complete_k(k - h).unwrap()) / (2.0 * h);
        assert_close(k_prime(k).unwrap(), num, 1e-9);
        let (kj, ej) = k_e_jets(k).unwrap();
        assert_close(kj.d(1), num, 1e-9);
        let num_e = (complete_e(k + h).unwrap() - complete_e(k - h).unwrap()) / (2.0 * h);
        assert_close(ej.d(1), num_e, 1e-9);
    }

    #[test]
    fn jets_high_orders_vs_finite_differences() {
        let k = 0.55;
        let h = 1e-3;
        let f = |x: f64| complete_k(x).unwrap();
        let d2 = (f(k + h) - 2.0 * f(k) + f(k - h)) / (h * h);
        let d3 = (f(k + 2.0 * h) - 2.0 * f(k + h) + 2.0 * f(k - h) - f(k - 2.0 * h))
            / (2.0 * h * h * h);
        let (kj, _) = k_e_jets(k).unwrap();
        assert_close(kj.d(2), d2, 1e-5);
        assert_close(kj.d(3), d3, 1e-4);
    }

    #[test]
    fn jets_series_agm_branches_agree() {
        // Evaluate both branches at the same modulus, above the cutoff where
        // the AGM recursion is well conditioned.
        for k in [2e-3, 5e-3, 2e-2] {
            let series = k_e_jets_series(k);
            let (kj, ej) = k_e_jets(k).unwrap();
            assert_close(series.0.value(), kj.value(), 1e-14);
            assert_close(series.1.value(), ej.value(), 1e-14);
            assert_close(series.0.d(1), kj.d(1), 1e-11);
            assert_close(series.1.d(1), ej.d(1), 1e-11);
            assert_close(series.0.d(2), kj.d(2), 1e-8);
        }
    }

    #[test]
    fn degenerate_modulus_reduces_to_trig() {
        let (sn, cn, dn) = sn_cn_dn(0.7, 0.0).unwrap();
        assert_close(sn, 0.7f64.sin(), 1e-15);
        assert_close(cn, 0.7f64.cos(), 1e-15);
        assert_close(dn, 1.0, 1e-15);
        assert_close(jacobi_zeta(0.4, 0.0).unwrap(), 0.0, 1e-15);
    }

    #[test]
    fn quarter_period_values() {
        let k = 0.6;
        let big_k = complete_k(k).unwrap();
        let (sn, cn, dn) = sn_cn_dn(big_k, k).unwrap();
        assert_close(sn, 1.0, 1e-12);
        assert!(cn.abs() < 1e-12);
        assert_close(dn, (1.0f64 - k * k).sqrt(), 1e-12);
    }

    #[test]
    fn quarter_period_shift_identity() {
        // sn(tau + K) = cn(tau)/dn(tau)
        let (tau, k) = (0.4, 0.8);
        let big_k = complete_k(k).unwrap();
        let (sn_shift, _, _) = sn_cn_dn(tau + big_k, k).unwrap();
        let (_, cn, dn) = sn_cn_dn(tau, k).unwrap();
        assert_close(sn_shift, cn / dn, 1e-11);
    }

    #[test]
    fn pythagorean_identities_on_grid() {
        for k in [0.1, 0.35, 0.6, 0.85, 0.97] {
            let big_k = complete_k(k).unwrap();
            for i in 0..25 {
                let tau = -big_k + 4.0 * big_k * (i as f64) / 24.0;
                let (sn, cn, dn) = sn_cn_dn(tau, k).unwrap();
                assert!((sn * sn + cn * cn - 1.0).abs() <= 1e-12);
                assert!((k * k * sn * sn + dn * dn - 1.0).abs() <= 1e-12);
                assert!((dn * dn - k * k * cn * cn - (1.0 - k * k)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn derivative_system_vs_finite_differences() {
        let (k, h) = (0.7, 1e-6);
        for tau in [0.2, 0.9, 1.7] {
            let (sn, cn, dn) = sn_cn_dn(tau, k).unwrap();
            let plus = sn_cn_dn(tau + h, k).unwrap();
            let minus = sn_cn_dn(tau - h, k).unwrap();
            assert_close((plus.0 - minus.0) / (2.0 * h), cn * dn, 1e-8);
            assert_close((plus.1 - minus.1) / (2.0 * h), -sn * dn, 1e-8);
            assert_close((plus.2 - minus.2) / (2.0 * h), -k * k * sn * cn, 1e-8);
        }
    }

    #[test]
    fn full_period() {
        let k = 0.45;
        let big_k = complete_k(k).unwrap();
        for tau in [0.0, 0.3, 1.1] {
            let a = sn_cn_dn(tau, k).unwrap();
            let b = sn_cn_dn(tau + 4.0 * big_k, k).unwrap();
            assert!((a.0 - b.0).abs() <= 1e-10, "{} vs {}", a.0, b.0);
        }
    }

    #[test]
    fn zeta_endpoints_and_ode() {
        let k = 0.5;
        let big_k = complete_k(k).unwrap();
        assert_close(jacobi_zeta(0.0, k).unwrap(), 0.0, 1e-15);
        assert!(jacobi_zeta(big_k, k).unwrap().abs() < 1e-13);
        // d/dtau zn = dn^2 - E/K
        let (k6, tau, h) = (0.6, 0.3, 1e-6);
        let (big_k6, big_e6) = complete_k_e(k6).unwrap();
        let num = (jacobi_zeta(tau + h, k6).unwrap() - jacobi_zeta(tau - h, k6).unwrap())
            / (2.0 * h);
        let dn = sn_cn_dn(tau, k6).unwrap().2;
        assert_close(num, dn * dn - big_e6 / big_k6, 1e-8);
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(complete_k(1.0).is_err());
        assert!(complete_k(-0.1).is_err());
        assert!(sn_cn_dn(0.3, 1.5).is_err());
        assert!(EllipticModulus::new(0.999).is_ok());
    }
}
