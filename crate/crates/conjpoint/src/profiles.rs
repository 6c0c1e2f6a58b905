//! Radial data of a rotational cell and the scalar functions derived from it.
//!
//! A profile stores the cell radius R together with the area-form density
//! phi, the angular velocity u, and the averaged metric coefficients E and G.
//! Rotationally symmetric profiles have E = 1 and G = phi^2. The derived
//! quantities omega, v, Q, M are computed on demand from jets, so removable
//! 0/0 limits at the origin come out of l'Hopital shifts instead of finite
//! differences.

use std::fmt;
use std::sync::Arc;

use crate::expr::{EvalError, Expression, Jet4, JetError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile invariant violated: {0}")]
    Invariant(String),
    #[error("evaluation failed at r = {r}: {source}")]
    Eval {
        r: f64,
        #[source]
        source: EvalError,
    },
    #[error("jet arithmetic failed at r = {r}: {source}")]
    Jet {
        r: f64,
        #[source]
        source: JetError,
    },
    #[error("Q and M are undefined where u'(r) vanishes (|u'({r})| = {uprime})")]
    CriticalVelocity { r: f64, uprime: f64 },
    #[error("curvature is only defined for rotationally symmetric profiles")]
    NotRotational,
    #[error("r = {0} outside the cell [0, {1}]")]
    OutOfRange(f64, f64),
}

type BuiltinFn = dyn Fn(f64) -> Result<Jet4, ProfileError> + Send + Sync;

/// One radial function with jet access: either a parsed expression or a
/// built-in closure (used by the Kolmogorov cell and the surface builder).
#[derive(Clone)]
pub enum RadialFn {
    Expr(Expression),
    Builtin { name: String, f: Arc<BuiltinFn> },
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialFn::Expr(e) => write!(f, "Expr({e})"),
            RadialFn::Builtin { name, .. } => write!(f, "Builtin({name})"),
        }
    }
}

impl From<Expression> for RadialFn {
    fn from(e: Expression) -> Self {
        RadialFn::Expr(e)
    }
}

impl RadialFn {
    pub fn builtin(
        name: impl Into<String>,
        f: impl Fn(f64) -> Result<Jet4, ProfileError> + Send + Sync + 'static,
    ) -> Self {
        RadialFn::Builtin {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        RadialFn::builtin(format!("{c}"), move |_| Ok(Jet4::constant(c)))
    }

    pub fn jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        match self {
            RadialFn::Expr(e) => e.eval_jet(r, 4).map_err(|source| ProfileError::Eval { r, source }),
            RadialFn::Builtin { f, .. } => f(r),
        }
    }

    pub fn value(&self, r: f64) -> Result<f64, ProfileError> {
        Ok(self.jet(r)?.value())
    }
}

/// Kind of radial chart: a disc cell has an elliptic center with phi(0) = 0
/// and G(0) = 0; an annular slice (flat-torus band) has no center and skips
/// the origin conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Disc,
    Annulus,
}

#[derive(Clone)]
pub struct RadialProfile {
    radius: f64,
    phi: RadialFn,
    u: RadialFn,
    e_avg: RadialFn,
    g_avg: RadialFn,
    rotational: bool,
    kind: CellKind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("radius", &self.radius)
            .field("phi", &self.phi)
            .field("u", &self.u)
            .field("E", &self.e_avg)
            .field("G", &self.g_avg)
            .field("rotational", &self.rotational)
            .field("kind", &self.kind)
            .finish()
    }
}

const VALIDATION_GRID: usize = 64;

impl RadialProfile {
    /// Rotationally symmetric cell: metric ds^2 = dr^2 + phi^2 dtheta^2,
    /// so E = 1 and G = phi^2.
    pub fn rotational(
        phi: impl Into<RadialFn>,
        u: impl Into<RadialFn>,
        radius: f64,
    ) -> Result<Self, ProfileError> {
        let phi = phi.into();
        let u = u.into();
        let g = {
            let phi = phi.clone();
            RadialFn::builtin("phi^2", move |r| {
                let p = phi.jet(r)?;
                Ok(p * p)
            })
        };
        let profile = RadialProfile {
            radius,
            phi,
            u,
            e_avg: RadialFn::constant(1.0),
            g_avg: g,
            rotational: true,
            kind: CellKind::Disc,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Rotationally symmetric band without an elliptic center (for example
    /// the flat torus with phi = 1). Origin conditions are skipped.
    pub fn rotational_annulus(
        phi: impl Into<RadialFn>,
        u: impl Into<RadialFn>,
        radius: f64,
    ) -> Result<Self, ProfileError> {
        let phi = phi.into();
        let u = u.into();
        let g = {
            let phi = phi.clone();
            RadialFn::builtin("phi^2", move |r| {
                let p = phi.jet(r)?;
                Ok(p * p)
            })
        };
        let profile = RadialProfile {
            radius,
            phi,
            u,
            e_avg: RadialFn::constant(1.0),
            g_avg: g,
            rotational: true,
            kind: CellKind::Annulus,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// General cell with independently supplied averaged metric coefficients.
    pub fn general(
        phi: impl Into<RadialFn>,
        u: impl Into<RadialFn>,
        e_avg: impl Into<RadialFn>,
        g_avg: impl Into<RadialFn>,
        radius: f64,
    ) -> Result<Self, ProfileError> {
        let profile = RadialProfile {
            radius,
            phi: phi.into(),
            u: u.into(),
            e_avg: e_avg.into(),
            g_avg: g_avg.into(),
            rotational: false,
            kind: CellKind::Disc,
        };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<(), ProfileError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(ProfileError::Invariant(format!(
                "cell radius must be positive, got {}",
                self.radius
            )));
        }
        if self.kind == CellKind::Disc {
            let phi0 = self.phi.jet(0.0)?;
            if phi0.value().abs() > 1e-9 {
                return Err(ProfileError::Invariant(format!(
                    "phi(0) = {} but a disc cell needs phi(0) = 0",
                    phi0.value()
                )));
            }
            if phi0.d(1) <= 0.0 {
                return Err(ProfileError::Invariant(format!(
                    "phi'(0) = {} but a disc cell needs phi'(0) > 0",
                    phi0.d(1)
                )));
            }
            let g0 = self.g_avg.jet(0.0)?;
            if g0.value().abs() > 1e-9 {
                return Err(ProfileError::Invariant(format!(
                    "G(0) = {} but a disc cell needs G(0) = 0",
                    g0.value()
                )));
            }
        }
        for i in 0..VALIDATION_GRID {
            let r = self.radius * (i as f64 + 0.5) / VALIDATION_GRID as f64;
            let phi = self.phi.value(r)?;
            if phi.is_nan() || phi <= 0.0 {
                return Err(ProfileError::Invariant(format!(
                    "phi({r}) = {phi} must be positive inside the cell"
                )));
            }
            let g = self.g_avg.value(r)?;
            if g.is_nan() || g <= 0.0 {
                return Err(ProfileError::Invariant(format!(
                    "G({r}) = {g} must be positive inside the cell"
                )));
            }
            let e = self.e_avg.value(r)?;
            if e.is_nan() || e <= 0.0 {
                return Err(ProfileError::Invariant(format!(
                    "E({r}) = {e} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_rotational(&self) -> bool {
        self.rotational
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn phi(&self) -> &RadialFn {
        &self.phi
    }

    pub fn u(&self) -> &RadialFn {
        &self.u
    }

    pub fn e_avg(&self) -> &RadialFn {
        &self.e_avg
    }

    pub fn g_avg(&self) -> &RadialFn {
        &self.g_avg
    }

    fn check_range(&self, r: f64) -> Result<(), ProfileError> {
        if !(0.0..=self.radius + 1e-12).contains(&r) {
            return Err(ProfileError::OutOfRange(r, self.radius));
        }
        Ok(())
    }

    /// Vorticity omega(r) = (G u)' / phi, with the removable limit at r = 0
    /// taken by one application of l'Hopital.
    pub fn omega(&self, r: f64) -> Result<f64, ProfileError> {
        Ok(self.omega_jet(r)?.value())
    }

    /// Jet of omega; trustworthy through order 3 away from removable points.
    pub fn omega_jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        self.check_range(r)?;
        let g = self.g_avg.jet(r)?;
        let u = self.u.jet(r)?;
        let phi = self.phi.jet(r)?;
        let gu_prime = (g * u).derivative();
        gu_prime
            .div_removable(phi)
            .map_err(|source| ProfileError::Jet { r, source })
    }

    /// v(r) = G'(r) u(r) / (2 phi(r)); jet valid through order 3.
    pub fn v_jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        self.check_range(r)?;
        let g = self.g_avg.jet(r)?;
        let u = self.u.jet(r)?;
        let phi = self.phi.jet(r)?;
        (g.derivative() * u)
            .div_removable(phi * 2.0)
            .map_err(|source| ProfileError::Jet { r, source })
    }

    /// Q(r) = v'(r)/u'(r); errors with CriticalVelocity where u' ~ 0 and the
    /// quotient is not removable. Jet valid through order 2.
    pub fn q_jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        self.check_range(r)?;
        let u = self.u.jet(r)?;
        let uprime = u.d(1);
        let v = self.v_jet(r)?;
        match v.derivative().div_removable(u.derivative()) {
            Ok(j) => Ok(j),
            Err(_) => Err(ProfileError::CriticalVelocity {
                r,
                uprime: uprime.abs(),
            }),
        }
    }

    /// The triple (v, Q, M) at one radius. Q and M require u'(r) != 0.
    pub fn v_q_m(&self, r: f64) -> Result<(f64, f64, f64), ProfileError> {
        self.check_range(r)?;
        let u = self.u.jet(r)?;
        if u.d(1).abs() < 1e-12 * (1.0 + u.value().abs()) {
            return Err(ProfileError::CriticalVelocity {
                r,
                uprime: u.d(1).abs(),
            });
        }
        let v = self.v_jet(r)?;
        let q = self.q_jet(r)?;
        Ok((v.value(), q.value(), self.m_from_q(r, q)?))
    }

    /// M(r) = (G/phi) Q' + Q^2 - E G / phi^2.
    pub fn m_value(&self, r: f64) -> Result<f64, ProfileError> {
        let q = self.q_jet(r)?;
        self.m_from_q(r, q)
    }

    fn m_from_q(&self, r: f64, q: Jet4) -> Result<f64, ProfileError> {
        let g = self.g_avg.jet(r)?;
        let phi = self.phi.jet(r)?;
        let e = self.e_avg.jet(r)?;
        let g_over_phi = g
            .div_removable(phi)
            .map_err(|source| ProfileError::Jet { r, source })?;
        let eg_phi2 = (e * g)
            .div_removable(phi * phi)
            .map_err(|source| ProfileError::Jet { r, source })?;
        Ok(g_over_phi.value() * q.d(1) + q.value() * q.value() - eg_phi2.value())
    }

    /// Gaussian curvature kappa = -phi''/phi (rotationally symmetric only),
    /// with the r = 0 limit -phi'''(0)/phi'(0).
    pub fn kappa(&self, r: f64) -> Result<f64, ProfileError> {
        if !self.rotational {
            return Err(ProfileError::NotRotational);
        }
        self.check_range(r)?;
        let phi = self.phi.jet(r)?;
        let val = phi
            .derivative()
            .derivative()
            .div_removable(phi)
            .map_err(|source| ProfileError::Jet { r, source })?;
        Ok(-val.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureSpec};
    use std::f64::consts::PI;

    fn expr(s: &str) -> Expression {
        Expression::parse(s).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    fn sphere_rigid() -> RadialProfile {
        RadialProfile::rotational(expr("sin(r)"), expr("1"), PI).unwrap()
    }

    fn flat_disc() -> RadialProfile {
        RadialProfile::rotational(expr("r"), expr("1"), 1.0).unwrap()
    }

    fn hyperbolic() -> RadialProfile {
        RadialProfile::rotational(expr("sinh(r)"), expr("cosh(r)"), 2.0f64.ln()).unwrap()
    }

    #[test]
    fn constructors_accept_the_classic_cells() {
        sphere_rigid();
        flat_disc();
        hyperbolic();
    }

    #[test]
    fn rejects_invariant_violations() {
        // phi(0) != 0
        assert!(RadialProfile::rotational(expr("1 + r"), expr("1"), 1.0).is_err());
        // phi < 0 inside
        assert!(RadialProfile::rotational(expr("-r"), expr("1"), 1.0).is_err());
        // G(0) != 0 in the general constructor
        assert!(RadialProfile::general(
            expr("r"),
            expr("1"),
            expr("1"),
            expr("1 + r^2"),
            1.0
        )
        .is_err());
        // annulus accepts phi = 1
        assert!(RadialProfile::rotational_annulus(expr("1"), expr("1"), 1.0).is_ok());
    }

    #[test]
    fn vorticity_classic_values() {
        let sphere = sphere_rigid();
        // omega = 2 cos r on the rigidly rotating sphere
        assert_close(sphere.omega(PI / 2.0).unwrap(), 0.0, 1e-12);
        assert_close(sphere.omega(0.3).unwrap(), 2.0 * 0.3f64.cos(), 1e-12);
        assert_close(sphere.omega(0.0).unwrap(), 2.0, 1e-9);

        let disc = flat_disc();
        for r in [0.0, 0.2, 0.9] {
            assert_close(disc.omega(r).unwrap(), 2.0, 1e-9);
        }

        let hyp = hyperbolic();
        for r in [0.1, 0.4, 0.6] {
            assert_close(hyp.omega(r).unwrap(), 3.0 * r.cosh().powi(2) - 1.0, 1e-11);
        }
    }

    #[test]
    fn hyperbolic_v_is_cosh_squared() {
        let hyp = hyperbolic();
        for r in [0.05, 0.3, 0.65] {
            assert_close(hyp.v_jet(r).unwrap().value(), r.cosh().powi(2), 1e-11);
        }
    }

    #[test]
    fn sphere_example_q_at_equator() {
        let p = RadialProfile::rotational(
            expr("sin(r)"),
            expr("7/4 + 4*cos(r) + cos(r)^2"),
            PI,
        )
        .unwrap();
        let (_, q, _) = p.v_q_m(PI / 2.0).unwrap();
        assert_close(q, 7.0 / 16.0, 1e-12);
        // closed form Q = (7 + 32 cos r + 12 cos^2 r)/(16 + 8 cos r)
        for r in [0.3f64, 1.0, 2.2] {
            let c = r.cos();
            let want = (7.0 + 32.0 * c + 12.0 * c * c) / (16.0 + 8.0 * c);
            assert_close(p.q_jet(r).unwrap().value(), want, 1e-11);
        }
    }

    #[test]
    fn isochronal_profiles_have_undefined_q() {
        let disc = flat_disc();
        for r in [0.2, 0.5, 0.8] {
            assert!(matches!(
                disc.v_q_m(r),
                Err(ProfileError::CriticalVelocity { .. })
            ));
        }
    }

    #[test]
    fn general_reproduces_rotational() {
        let rot = RadialProfile::rotational(expr("sin(r)"), expr("2 + cos(r)"), PI).unwrap();
        let gen = RadialProfile::general(
            expr("sin(r)"),
            expr("2 + cos(r)"),
            expr("1"),
            expr("sin(r)^2"),
            PI,
        )
        .unwrap();
        for i in 0..50 {
            let r = PI * (i as f64 + 0.5) / 50.0;
            assert_close(
                gen.g_avg().value(r).unwrap(),
                rot.g_avg().value(r).unwrap(),
                1e-14,
            );
            assert_close(gen.omega(r).unwrap(), rot.omega(r).unwrap(), 1e-12);
        }
    }

    #[test]
    fn gshortcut_consistency_on_random_profiles() {
        // u(r) G(r) = int_0^r phi omega ds for several smooth profiles.
        let spec = QuadratureSpec::default();
        for (phi_s, u_s) in [
            ("sin(r)", "2 + cos(r)"),
            ("r + r^3/6", "1 + r^2"),
            ("sinh(r)", "cosh(r)"),
        ] {
            let p = RadialProfile::rotational(expr(phi_s), expr(u_s), 1.3).unwrap();
            for r_hi in [0.4, 0.9, 1.2] {
                let lhs = p.u().value(r_hi).unwrap() * p.g_avg().value(r_hi).unwrap();
                let rhs = integrate(
                    |s| p.phi().value(s).unwrap() * p.omega(s).unwrap(),
                    1e-12,
                    r_hi,
                    &spec,
                )
                .unwrap()
                .value;
                assert_close(lhs, rhs, 1e-8);
            }
        }
    }

    #[test]
    fn rotational_m_reduction() {
        // M = phi Q' + Q^2 - 1 when E = 1, G = phi^2; both evaluation paths
        // must agree.
        let p = RadialProfile::rotational(
            expr("sin(r)"),
            expr("7/4 + 4*cos(r) + cos(r)^2"),
            PI,
        )
        .unwrap();
        for r in [0.2, 0.7, 1.3] {
            let q = p.q_jet(r).unwrap();
            let phi = p.phi().value(r).unwrap();
            let reduced = phi * q.d(1) + q.value() * q.value() - 1.0;
            assert_close(p.m_value(r).unwrap(), reduced, 1e-12);
        }
    }

    #[test]
    fn curvature_of_the_model_surfaces() {
        let sphere = sphere_rigid();
        let disc = flat_disc();
        let hyp = hyperbolic();
        for i in 0..20 {
            let t = (i as f64 + 0.5) / 20.0;
            assert_close(sphere.kappa(t * PI).unwrap(), 1.0, 1e-12);
            assert_close(disc.kappa(t).unwrap(), 0.0, 1e-12);
            assert_close(hyp.kappa(t * 2.0f64.ln()).unwrap(), -1.0, 1e-12);
        }
        assert_close(sphere.kappa(0.0).unwrap(), 1.0, 1e-9);
    }
}
