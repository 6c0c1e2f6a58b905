//! Closed-form conjugate-point criteria: isochronal flows, interior velocity
//! extrema, and velocity extrema at the origin.
//!
//! Each criterion reports the two sides of its decisive inequality and a
//! verdict. Strict inequalities certify only with a relative margin of 1e-6,
//! since the thresholds 9/16 and 9/4 are sharp constants of optimal weighted
//! Hardy inequalities and values on the line prove nothing.

use crate::expr::Jet4;
use crate::index::{TestFunctionXi, Verdict};
use crate::profiles::{ProfileError, RadialFn, RadialProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CriteriaError {
    #[error("flow is not isochronal: |u - 1| reaches {deviation} at r = {r}")]
    NotIsochronal { r: f64, deviation: f64 },
    #[error("u'({r0}) = {uprime} does not vanish; not a critical point")]
    NotACriticalPoint { r0: f64, uprime: f64 },
    #[error("u''({r0}) = {usecond} is too close to zero; degenerate critical point")]
    DegenerateCritical { r0: f64, usecond: f64 },
    #[error("u(0) = 0; the origin criterion needs nonzero velocity there")]
    ZeroVelocityAtOrigin,
    #[error("u''(0) = {0} is too close to zero; degenerate second derivative")]
    DegenerateSecondDerivative(f64),
    #[error("r0 = {r0} is not strictly inside (0, {radius})")]
    NotInterior { r0: f64, radius: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    Isochronal,
    InteriorExtremum,
    OriginExtremum,
}

impl std::fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionKind::Isochronal => write!(f, "isochronal"),
            CriterionKind::InteriorExtremum => write!(f, "interior-extremum"),
            CriterionKind::OriginExtremum => write!(f, "origin-extremum"),
        }
    }
}

/// Witnessing data for the verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    None,
    /// Refined critical radius, with u and u'' there.
    CriticalRadius { r0: f64, u: f64, usecond: f64 },
    /// Origin jets entering the criterion.
    OriginJets {
        u0: f64,
        usecond: f64,
        e0: f64,
        g2: f64,
        g4: f64,
        phi1: f64,
        phi3: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub name: CriterionKind,
    /// Left side of the decisive inequality.
    pub lhs: f64,
    /// Right side of the decisive inequality. The inequality reads
    /// `lhs > rhs` for Isochronal and InteriorExtremum, `lhs < rhs` for
    /// OriginExtremum.
    pub rhs: f64,
    pub witness: Witness,
    pub verdict: Verdict,
    /// Rotational shortcut value: max |kappa| for Isochronal,
    /// kappa u/u'' for the extremum criteria.
    pub rotational_ratio: Option<f64>,
}

const STRICT_MARGIN: f64 = 1e-6;

fn strictly_greater(lhs: f64, rhs: f64) -> bool {
    lhs - rhs > STRICT_MARGIN * (lhs.abs() + rhs.abs()).max(1e-12)
}

/// Killing-field criterion: for u = 1 a conjugate point exists iff
/// d/dr (G'/phi) is not identically zero; in the rotationally symmetric case,
/// iff the Gaussian curvature is not identically zero.
pub fn isochronal(p: &RadialProfile) -> Result<CriterionReport, CriteriaError> {
    let n = 256;
    let radius = p.radius();
    for i in 0..=n {
        let r = radius * (i as f64) / n as f64;
        let u = p.u().value(r)?;
        if (u - 1.0).abs() > 1e-12 {
            return Err(CriteriaError::NotIsochronal {
                r,
                deviation: (u - 1.0).abs(),
            });
        }
    }
    let mut max_dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let r = radius * (i as f64 + 0.5) / n as f64;
        let g = p.g_avg().jet(r)?;
        let phi = p.phi().jet(r)?;
        let ratio = g
            .derivative()
            .div_removable(phi)
            .map_err(|source| ProfileError::Jet { r, source })?;
        max_dev = max_dev.max(ratio.d(1).abs());
        scale = scale.max(ratio.value().abs());
    }
    let rhs = 1e-8 * (1.0 + scale);
    let verdict = if max_dev > rhs {
        Verdict::ConjugatePointCertified
    } else {
        Verdict::Inconclusive
    };
    let rotational_ratio = if p.is_rotational() {
        let mut max_kappa = 0.0f64;
        for i in 0..n {
            let r = radius * (i as f64 + 0.5) / n as f64;
            max_kappa = max_kappa.max(p.kappa(r)?.abs());
        }
        Some(max_kappa)
    } else {
        None
    };
    Ok(CriterionReport {
        name: CriterionKind::Isochronal,
        lhs: max_dev,
        rhs,
        witness: Witness::None,
        verdict,
        rotational_ratio,
    })
}

/// Refine a critical radius of u by bisection on u' within +-0.05 of the
/// caller's guess.
fn refine_critical_radius(p: &RadialProfile, r0: f64) -> Result<f64, CriteriaError> {
    let radius = p.radius();
    let window = 0.05f64;
    let lo = (r0 - window).max(1e-6 * radius);
    let hi = (r0 + window).min(radius * (1.0 - 1e-9));
    let up = |r: f64| -> Result<f64, CriteriaError> { Ok(p.u().jet(r)?.d(1)) };
    let (mut a, mut b) = (lo, hi);
    let mut fa = up(a)?;
    let fb = up(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        let u0 = p.u().jet(r0)?;
        if u0.d(1).abs() <= 1e-10 * (1.0 + u0.value().abs()) {
            return Ok(r0);
        }
        return Err(CriteriaError::NotACriticalPoint {
            r0,
            uprime: u0.d(1),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = up(mid)?;
        if fm == 0.0 || (b - a) < 1e-15 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Local criterion at an interior critical radius r0 of the velocity:
/// certified iff
///   -u(r0) phi(r0) / (G(r0) u''(r0)) * d/dr(G'/(2 phi))|_{r0} > 9/16.
/// With G = phi^2 this reduces to kappa(r0) u(r0)/u''(r0) > 9/16.
pub fn interior_extremum(p: &RadialProfile, r0: f64) -> Result<CriterionReport, CriteriaError> {
    if !(r0 > 0.0 && r0 < p.radius()) {
        return Err(CriteriaError::NotInterior {
            r0,
            radius: p.radius(),
        });
    }
    let r0 = refine_critical_radius(p, r0)?;
    let u = p.u().jet(r0)?;
    if u.d(1).abs() > 1e-10 * (1.0 + u.value().abs()) {
        return Err(CriteriaError::NotACriticalPoint {
            r0,
            uprime: u.d(1),
        });
    }
    if u.d(2).abs() < 1e-10 * (1.0 + u.value().abs()) {
        return Err(CriteriaError::DegenerateCritical {
            r0,
            usecond: u.d(2),
        });
    }
    let g = p.g_avg().jet(r0)?;
    let phi = p.phi().jet(r0)?;
    let half_ratio = g
        .derivative()
        .div_removable(phi * 2.0)
        .map_err(|source| ProfileError::Jet { r: r0, source })?;
    let w = half_ratio.d(1); // d/dr (G'/(2 phi)) at r0
    let lhs = -u.value() * phi.value() / (g.value() * u.d(2)) * w;
    let rhs = 9.0 / 16.0;
    let verdict = if strictly_greater(lhs, rhs) {
        Verdict::ConjugatePointCertified
    } else {
        Verdict::Inconclusive
    };
    let rotational_ratio = if p.is_rotational() {
        Some(p.kappa(r0)? * u.value() / u.d(2))
    } else {
        None
    };
    Ok(CriterionReport {
        name: CriterionKind::InteriorExtremum,
        lhs,
        rhs,
        witness: Witness::CriticalRadius {
            r0,
            u: u.value(),
            usecond: u.d(2),
        },
        verdict,
        rotational_ratio,
    })
}

/// Local criterion at the origin: certified iff
///   3 E(0) + 12 G''(0) < (2 u(0)/u''(0)) (phi'''(0) G''(0)/phi'(0) - G''''(0)).
/// With E = 1, G = phi^2 this reduces to kappa(0) u(0)/u''(0) > 9/4.
pub fn origin_extremum(p: &RadialProfile) -> Result<CriterionReport, CriteriaError> {
    let u = p.u().jet(0.0)?;
    if u.value().abs() < 1e-12 {
        return Err(CriteriaError::ZeroVelocityAtOrigin);
    }
    if u.d(1).abs() > 1e-10 * (1.0 + u.value().abs()) {
        return Err(CriteriaError::NotACriticalPoint {
            r0: 0.0,
            uprime: u.d(1),
        });
    }
    if u.d(2).abs() < 1e-10 * (1.0 + u.value().abs()) {
        return Err(CriteriaError::DegenerateSecondDerivative(u.d(2)));
    }
    let phi = p.phi().jet(0.0)?;
    let g = p.g_avg().jet(0.0)?;
    let e0 = p.e_avg().value(0.0)?;
    let lhs = 3.0 * e0 + 12.0 * g.d(2);
    let rhs = 2.0 * u.value() / u.d(2) * (phi.d(3) * g.d(2) / phi.d(1) - g.d(4));
    let verdict = if strictly_greater(rhs, lhs) {
        Verdict::ConjugatePointCertified
    } else {
        Verdict::Inconclusive
    };
    let rotational_ratio = if p.is_rotational() {
        Some(p.kappa(0.0)? * u.value() / u.d(2))
    } else {
        None
    };
    Ok(CriterionReport {
        name: CriterionKind::OriginExtremum,
        lhs,
        rhs,
        witness: Witness::OriginJets {
            u0: u.value(),
            usecond: u.d(2),
            e0,
            g2: g.d(2),
            g4: g.d(4),
            phi1: phi.d(1),
            phi3: phi.d(3),
        },
        verdict,
        rotational_ratio,
    })
}

/// v''(0) = (u(0) phi'(0) G''''(0) - u(0) phi'''(0) G''(0) + 3 u''(0) phi'(0) G''(0))
///          / (6 phi'(0)^2).
pub fn v_second_derivative_origin(p: &RadialProfile) -> Result<f64, CriteriaError> {
    let u = p.u().jet(0.0)?;
    let phi = p.phi().jet(0.0)?;
    let g = p.g_avg().jet(0.0)?;
    let num = u.value() * phi.d(1) * g.d(4) - u.value() * phi.d(3) * g.d(2)
        + 3.0 * u.d(2) * phi.d(1) * g.d(2);
    Ok(num / (6.0 * phi.d(1) * phi.d(1)))
}

/// Near-optimal interior window family:
/// xi(r) = (1-s^2)^2 |s|^(-3/2+delta) with s = (r-r0)/eps, supported on
/// [r0-eps, r0+eps], and |s|^p frozen to its value at |s| = cap.
pub fn interior_test_family(r0: f64, eps: f64, delta: f64, cap: f64) -> TestFunctionXi {
    let p = -1.5 + delta;
    let f = RadialFn::builtin(
        format!("interior-window(r0={r0}, eps={eps}, delta={delta})"),
        move |r| Ok(capped_window_jet(r, r0, eps, p, cap, true)),
    );
    TestFunctionXi::with_support_unchecked(f, r0 - eps, r0 + eps)
}

/// Near-optimal origin window family:
/// xi(r) = s^(-2+delta)(1-s) with s = r/eps, supported on [0, eps], capped
/// below s = cap.
pub fn origin_test_family(eps: f64, delta: f64, cap: f64) -> TestFunctionXi {
    let p = -2.0 + delta;
    let f = RadialFn::builtin(
        format!("origin-window(eps={eps}, delta={delta})"),
        move |r| Ok(capped_window_jet(r, 0.0, eps, p, cap, false)),
    );
    TestFunctionXi::with_support_unchecked(f, 0.0, eps)
}

/// Jet of the capped window profile at radius r. Only value and first
/// derivative are meaningful; the index quadratures use nothing beyond xi'.
fn capped_window_jet(r: f64, center: f64, eps: f64, p: f64, cap: f64, interior: bool) -> Jet4 {
    let s = (r - center) / eps;
    let (val, dv_ds) = if interior {
        let a = s.abs();
        if a >= 1.0 {
            (0.0, 0.0)
        } else if a < cap {
            let c = cap.powf(p);
            ((1.0 - s * s).powi(2) * c, -4.0 * s * (1.0 - s * s) * c)
        } else {
            let sgn = s.signum();
            let v = (1.0 - s * s).powi(2) * a.powf(p);
            let d = sgn * a.powf(p - 1.0) * (1.0 - s * s) * (p * (1.0 - s * s) - 4.0 * s * s);
            (v, d)
        }
    } else if !(0.0..1.0).contains(&s) {
        (0.0, 0.0)
    } else if s < cap {
        let c = cap.powf(p);
        (c * (1.0 - s), -c)
    } else {
        let v = s.powf(p) * (1.0 - s);
        let d = s.powf(p - 1.0) * (p - (p + 1.0) * s);
        (v, d)
    };
    Jet4::from_derivatives([val, dv_ds / eps, 0.0, 0.0, 0.0])
}
