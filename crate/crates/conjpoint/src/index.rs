//! The index form of a rotating test variation, its three equivalent
//! integral expressions, and the quadratic-in-drift minimization that yields
//! a conjugate-point verdict.
//!
//! For a profile (phi, u, E, G) on [0, R], a test function xi with
//! xi(0) = xi(R) = 0, and a drift alpha, the three forms are
//!
//!   I1 = int (G/phi) (d/dr[(alpha-u) xi])^2 + (E/phi)(alpha-u)^2 xi^2
//!        - omega' (alpha-u) xi^2 dr
//!   I2 = int (alpha-u)^2 (G xi'^2 + E xi^2)/phi - 2 v' (alpha-u) xi^2 dr
//!   I3 = int (alpha-u)^2 [ (G/phi)(xi' - Q phi xi / G)^2 - (phi/G) M xi^2 ] dr
//!
//! which differ by total derivatives vanishing at the endpoints ("Three-form
//! equivalence" below is a test, not an assumption). I is exactly quadratic
//! in alpha with positive leading coefficient, so three evaluations pin it
//! down and the sign of B^2 - AC decides whether some drift makes it
//! negative.

use std::cell::RefCell;

use crate::profiles::{ProfileError, RadialFn, RadialProfile};
use crate::quadrature::{integrate, Quadrature, QuadratureError, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("inadmissible test function: {0}")]
    InadmissibleXi(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("quadrature did not converge (error estimate {error_estimate})")]
    NonConvergence { error_estimate: f64 },
    #[error("u' vanishes inside the support of xi (near r = {r}); the Q-form needs u' != 0")]
    CriticalVelocityInSupport { r: f64 },
}

/// Perturbation profile xi on [0, R], possibly supported on a subinterval,
/// extended by zero outside it.
#[derive(Debug, Clone)]
pub struct TestFunctionXi {
    f: RadialFn,
    support: (f64, f64),
}

impl TestFunctionXi {
    /// Admissible test function on the whole cell: xi(0) = xi(R) = 0.
    pub fn new(f: impl Into<RadialFn>, radius: f64) -> Result<Self, IndexError> {
        Self::with_support(f, 0.0, radius, radius)
    }

    /// Test function supported on [a, b] within [0, R]; must vanish at the
    /// support edges so the zero extension stays continuous.
    pub fn with_support(
        f: impl Into<RadialFn>,
        a: f64,
        b: f64,
        radius: f64,
    ) -> Result<Self, IndexError> {
        let f = f.into();
        if !(0.0 <= a && a < b && b <= radius + 1e-12) {
            return Err(IndexError::InadmissibleXi(format!(
                "support [{a}, {b}] not inside [0, {radius}]"
            )));
        }
        let scale = sampled_scale(&f, a, b)?;
        if scale == 0.0 {
            return Err(IndexError::InadmissibleXi(
                "xi is identically zero on its support".into(),
            ));
        }
        for end in [a, b] {
            let v = f.value(end).map_err(IndexError::Profile)?;
            if v.abs() > 1e-9 * scale {
                return Err(IndexError::InadmissibleXi(format!(
                    "xi({end}) = {v} does not vanish at the support edge"
                )));
            }
        }
        Ok(TestFunctionXi { f, support: (a, b) })
    }

    /// Skip the edge-vanishing check. Used for the capped near-singular
    /// window families, whose admissibility is argued analytically (the
    /// (alpha-u)^2 weight vanishes to high order where xi does not).
    pub fn with_support_unchecked(f: impl Into<RadialFn>, a: f64, b: f64) -> Self {
        TestFunctionXi {
            f: f.into(),
            support: (a, b),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn f(&self) -> &RadialFn {
        &self.f
    }

    /// (xi, xi') inside the support, (0, 0) outside.
    pub fn eval(&self, r: f64) -> Result<(f64, f64), ProfileError> {
        if r < self.support.0 || r > self.support.1 {
            return Ok((0.0, 0.0));
        }
        let j = self.f.jet(r)?;
        Ok((j.value(), j.d(1)))
    }
}

fn sampled_scale(f: &RadialFn, a: f64, b: f64) -> Result<f64, IndexError> {
    let mut scale = 0.0f64;
    for i in 0..33 {
        let r = a + (b - a) * (i as f64 + 0.5) / 33.0;
        scale = scale.max(f.value(r).map_err(IndexError::Profile)?.abs());
    }
    Ok(scale)
}

/// Value and error estimate of one index integral.
#[derive(Debug, Clone, Copy)]
pub struct IndexValue {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConjugatePointCertified,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::ConjugatePointCertified => write!(f, "conjugate point: YES"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// I(alpha) = A alpha^2 + 2 B alpha + C together with its minimizer and the
/// certification verdict.
#[derive(Debug, Clone, Copy)]
pub struct IndexQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha_star: f64,
    pub i_min: f64,
    pub discriminant: f64,
    /// Numerical margin below which the discriminant sign is not trusted.
    pub margin: f64,
    pub verdict: Verdict,
}

/// Offset used at cell endpoints where phi vanishes, so the removable 0/0 of
/// the integrand is never sampled. Since xi also vanishes there, the
/// integrand goes to zero linearly and the clipped mass is O(offset^2),
/// far below every tolerance in play.
const ENDPOINT_OFFSET: f64 = 1e-8;

fn integration_window(p: &RadialProfile, xi: &TestFunctionXi) -> Result<(f64, f64), IndexError> {
    let (a, b) = xi.support();
    let mut lo = a;
    let mut hi = b.min(p.radius());
    if p.phi().value(lo).map_err(IndexError::Profile)?.abs() < 1e-12 {
        lo += ENDPOINT_OFFSET;
    }
    if p.phi().value(hi).map_err(IndexError::Profile)?.abs() < 1e-12 {
        hi -= ENDPOINT_OFFSET;
    }
    Ok((lo, hi))
}

fn run_quadrature<F: Fn(f64) -> Result<f64, ProfileError>>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, IndexError> {
    let captured: RefCell<Option<ProfileError>> = RefCell::new(None);
    let wrapped = |r: f64| match f(r) {
        Ok(v) => v,
        Err(e) => {
            captured.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = integrate(wrapped, lo, hi, spec);
    if let Some(e) = captured.into_inner() {
        return Err(IndexError::Profile(e));
    }
    let q = result?;
    if !q.converged {
        return Err(IndexError::NonConvergence {
            error_estimate: q.error_estimate,
        });
    }
    Ok(q)
}

/// First form of the index integrand (the defining one).
pub fn index_i1(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
) -> Result<IndexValue, IndexError> {
    index_i1_spec(p, xi, alpha, &QuadratureSpec::default())
}

/// Same as [`index_i1`] with explicit quadrature tolerances.
pub fn index_i1_spec(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<IndexValue, IndexError> {
    let (lo, hi) = integration_window(p, xi)?;
    let q = run_quadrature(
        |r| {
            let (x, xp) = xi.eval(r)?;
            if x == 0.0 && xp == 0.0 {
                return Ok(0.0);
            }
            let phi = p.phi().value(r)?;
            let g = p.g_avg().value(r)?;
            let e = p.e_avg().value(r)?;
            let u = p.u().jet(r)?;
            let om_p = p.omega_jet(r)?.d(1);
            let au = alpha - u.value();
            let d = -u.d(1) * x + au * xp;
            Ok(g / phi * d * d + e / phi * au * au * x * x - om_p * au * x * x)
        },
        lo,
        hi,
        spec,
    )?;
    Ok(IndexValue {
        value: q.value,
        error_estimate: q.error_estimate,
    })
}

/// Second form, with the vorticity term integrated by parts into v'.
pub fn index_i2(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
) -> Result<IndexValue, IndexError> {
    index_i2_spec(p, xi, alpha, &QuadratureSpec::default())
}

/// Same as [`index_i2`] with explicit quadrature tolerances.
pub fn index_i2_spec(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<IndexValue, IndexError> {
    let (lo, hi) = integration_window(p, xi)?;
    index_i2_on(p, xi, alpha, lo, hi, spec)
}

fn index_i2_on(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<IndexValue, IndexError> {
    let q = run_quadrature(
        |r| {
            let (x, xp) = xi.eval(r)?;
            if x == 0.0 && xp == 0.0 {
                return Ok(0.0);
            }
            let phi = p.phi().value(r)?;
            let g = p.g_avg().value(r)?;
            let e = p.e_avg().value(r)?;
            let u = p.u().value(r)?;
            let vp = p.v_jet(r)?.d(1);
            let au = alpha - u;
            Ok(au * au * (g * xp * xp + e * x * x) / phi - 2.0 * vp * au * x * x)
        },
        lo,
        hi,
        spec,
    )?;
    Ok(IndexValue {
        value: q.value,
        error_estimate: q.error_estimate,
    })
}

/// Second form for a piecewise-smooth xi: the integration is split at the
/// given interior kink radii so panels line up with them. Used by the capped
/// near-singular window families, whose derivative jumps at the cap radius.
pub fn index_i2_piecewise(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> Result<IndexValue, IndexError> {
    let (lo, hi) = integration_window(p, xi)?;
    let mut cuts = vec![lo];
    let mut sorted: Vec<f64> = kinks.iter().copied().filter(|k| *k > lo && *k < hi).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.extend(sorted);
    cuts.push(hi);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let piece = index_i2_on(p, xi, alpha, w[0], w[1], spec)?;
        value += piece.value;
        error += piece.error_estimate;
    }
    Ok(IndexValue {
        value,
        error_estimate: error,
    })
}

/// Third form, organized around Q and M; requires u' != 0 inside the support.
pub fn index_i3(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
) -> Result<IndexValue, IndexError> {
    index_i3_spec(p, xi, alpha, &QuadratureSpec::default())
}

/// Same as [`index_i3`] with explicit quadrature tolerances.
pub fn index_i3_spec(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<IndexValue, IndexError> {
    check_monotone_u(p, xi)?;
    let (lo, hi) = integration_window(p, xi)?;
    let q = run_quadrature(
        |r| {
            let (x, xp) = xi.eval(r)?;
            if x == 0.0 && xp == 0.0 {
                return Ok(0.0);
            }
            let phi = p.phi().value(r)?;
            let g = p.g_avg().value(r)?;
            let u = p.u().value(r)?;
            let q_jet = p.q_jet(r)?;
            let m = p.m_value(r)?;
            let au = alpha - u;
            let combo = xp - q_jet.value() * phi * x / g;
            Ok(au * au * (g / phi * combo * combo - phi / g * m * x * x))
        },
        lo,
        hi,
        spec,
    )?;
    Ok(IndexValue {
        value: q.value,
        error_estimate: q.error_estimate,
    })
}

/// u' must not vanish (or change sign) strictly inside the support. The
/// closed endpoints are allowed to be critical: the sphere example has
/// u'(0) = 0 at the edge of supp xi = [0, pi/4], where the integrand limit
/// is still finite.
fn check_monotone_u(p: &RadialProfile, xi: &TestFunctionXi) -> Result<(), IndexError> {
    let (a, b) = xi.support();
    let n = 128;
    let mut prev_sign = 0.0f64;
    for i in 0..n {
        let r = a + (b - a) * (i as f64 + 0.5) / n as f64;
        let u = p.u().jet(r).map_err(IndexError::Profile)?;
        let up = u.d(1);
        if up.abs() < 1e-12 * (1.0 + u.value().abs()) {
            return Err(IndexError::CriticalVelocityInSupport { r });
        }
        let sign = up.signum();
        if prev_sign != 0.0 && sign != prev_sign {
            return Err(IndexError::CriticalVelocityInSupport { r });
        }
        prev_sign = sign;
    }
    Ok(())
}

/// Extract A, B, C from three evaluations of the first index form at
/// alpha in {0, 1, -1}, minimize, and certify on the discriminant sign.
pub fn minimize_over_alpha(
    p: &RadialProfile,
    xi: &TestFunctionXi,
) -> Result<IndexQuadratic, IndexError> {
    minimize_over_alpha_spec(p, xi, &QuadratureSpec::default())
}

/// Same as [`minimize_over_alpha`] with explicit quadrature tolerances.
pub fn minimize_over_alpha_spec(
    p: &RadialProfile,
    xi: &TestFunctionXi,
    spec: &QuadratureSpec,
) -> Result<IndexQuadratic, IndexError> {
    let i0 = index_i1_spec(p, xi, 0.0, spec)?;
    let i_plus = index_i1_spec(p, xi, 1.0, spec)?;
    let i_minus = index_i1_spec(p, xi, -1.0, spec)?;

    let a = 0.5 * (i_plus.value + i_minus.value) - i0.value;
    let b = 0.25 * (i_plus.value - i_minus.value);
    let c = i0.value;

    let ea = 0.5 * (i_plus.error_estimate + i_minus.error_estimate) + i0.error_estimate;
    let eb = 0.25 * (i_plus.error_estimate + i_minus.error_estimate);
    let ec = i0.error_estimate;

    let discriminant = b * b - a * c;
    let err_disc = 2.0 * b.abs() * eb + a.abs() * ec + c.abs() * ea;
    let scale = (a.abs() + b.abs() + c.abs()).max(1e-300);
    let margin = 10.0 * err_disc + 1e3 * f64::EPSILON * scale * scale;

    let (alpha_star, i_min) = if a > 0.0 {
        (-b / a, (a * c - b * b) / a)
    } else {
        (0.0, c)
    };
    let verdict = if discriminant > margin {
        Verdict::ConjugatePointCertified
    } else {
        Verdict::Inconclusive
    };
    Ok(IndexQuadratic {
        a,
        b,
        c,
        alpha_star,
        i_min,
        discriminant,
        margin,
        verdict,
    })
}

/// Outcome of the constant-vorticity shortcut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantVorticity {
    /// omega' vanishes identically: the index is positive definite for every
    /// variation in this family, so no conjugate point can be certified by it.
    NoConjugatePointInThisFamily,
    /// omega is genuinely non-constant; the rule says nothing.
    NotApplicable,
}

/// If the vorticity is constant across the cell, the drift term of the index
/// drops out and what remains is positive definite.
pub fn constant_vorticity_rule(p: &RadialProfile) -> Result<ConstantVorticity, IndexError> {
    let n = 256;
    let mut max_rel = 0.0f64;
    for i in 0..n {
        let r = p.radius() * (i as f64 + 0.5) / n as f64;
        let om = p.omega_jet(r)?;
        max_rel = max_rel.max(om.d(1).abs() / (1.0 + om.value().abs()));
    }
    if max_rel <= 1e-10 {
        Ok(ConstantVorticity::NoConjugatePointInThisFamily)
    } else {
        Ok(ConstantVorticity::NotApplicable)
    }
}
