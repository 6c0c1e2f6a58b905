//! Construction of disc-type surface metrics admitting a prescribed steady
//! flow.
//!
//! Given radial data (F or u, phi, G) and an angular perturbation
//! zeta(r, theta), the metric components
//!
//!   g11 = phi^2 (F'^2 + zeta_r^2) / (F' (F' G + phi zeta_theta))
//!   g12 = phi zeta_r / F'
//!   g22 = G + phi zeta_theta / F'
//!
//! make U = (F'/phi) d/dtheta a steady Euler flow with area form
//! phi dr ^ dtheta. The determinant identity g11 g22 - g12^2 = phi^2 holds by
//! construction and the curl of U depends on r alone; `verify_steady` checks
//! both numerically, which exercises the whole jet pipeline end to end.

use crate::expr::{Expression, Jet4};
use crate::profiles::{ProfileError, RadialFn, RadialProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("flow data: {0}")]
    FlowData(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// cos(n theta) or sin(n theta) factor of one perturbation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularKind {
    Cos,
    Sin,
}

/// One term c(r) * cos/sin(n theta) of the perturbation series.
#[derive(Debug, Clone)]
pub struct ZetaTerm {
    pub kind: AngularKind,
    pub mode: u32,
    pub coeff: Expression,
}

/// Finite trigonometric series in theta with expression coefficients in r.
/// Finite series keep the theta-averages exact and the origin smoothness
/// conditions checkable by jets.
#[derive(Debug, Clone, Default)]
pub struct ZetaSeries {
    pub terms: Vec<ZetaTerm>,
}

impl ZetaSeries {
    pub fn zero() -> Self {
        ZetaSeries::default()
    }

    pub fn push(&mut self, kind: AngularKind, mode: u32, coeff: Expression) {
        self.terms.push(ZetaTerm { kind, mode, coeff });
    }

    fn angular(kind: AngularKind, mode: u32, theta: f64) -> f64 {
        match kind {
            AngularKind::Cos => (mode as f64 * theta).cos(),
            AngularKind::Sin => (mode as f64 * theta).sin(),
        }
    }

    fn angular_theta_derivative(kind: AngularKind, mode: u32, theta: f64) -> f64 {
        let n = mode as f64;
        match kind {
            AngularKind::Cos => -n * (n * theta).sin(),
            AngularKind::Sin => n * (n * theta).cos(),
        }
    }

    fn coeff_jet(t: &ZetaTerm, r: f64) -> Result<Jet4, ProfileError> {
        t.coeff
            .eval_jet(r, 4)
            .map_err(|source| ProfileError::Eval { r, source })
    }

    /// r-jet of zeta_r(., theta).
    fn zeta_r_jet(&self, r: f64, theta: f64) -> Result<Jet4, ProfileError> {
        let mut acc = Jet4::constant(0.0);
        for t in &self.terms {
            let c = Self::coeff_jet(t, r)?;
            acc = acc + c.derivative() * Self::angular(t.kind, t.mode, theta);
        }
        Ok(acc)
    }

    /// r-jet of zeta_theta(., theta).
    fn zeta_theta_jet(&self, r: f64, theta: f64) -> Result<Jet4, ProfileError> {
        let mut acc = Jet4::constant(0.0);
        for t in &self.terms {
            let c = Self::coeff_jet(t, r)?;
            acc = acc + c * Self::angular_theta_derivative(t.kind, t.mode, theta);
        }
        Ok(acc)
    }

    /// r-jet of the mixed derivative zeta_r_theta(., theta).
    fn zeta_r_theta_jet(&self, r: f64, theta: f64) -> Result<Jet4, ProfileError> {
        let mut acc = Jet4::constant(0.0);
        for t in &self.terms {
            let c = Self::coeff_jet(t, r)?;
            acc = acc + c.derivative() * Self::angular_theta_derivative(t.kind, t.mode, theta);
        }
        Ok(acc)
    }
}

/// The flow can be specified by its angular velocity u or by the stream
/// profile F (only F' enters the construction).
#[derive(Debug, Clone)]
pub enum FlowInput {
    VelocityU(Expression),
    StreamF(Expression),
    /// Both given; they must satisfy F' = phi u.
    Both { u: Expression, f: Expression },
}

/// Metric components over the cell (r, theta) in [0, R] x [0, 2 pi).
#[derive(Debug, Clone)]
pub struct MetricField {
    phi: Expression,
    g_avg: Expression,
    u: RadialFn,
    /// F' as a radial function (phi * u).
    f_prime: RadialFn,
    zeta: ZetaSeries,
    radius: f64,
    warnings: Vec<String>,
}

const GRID_R: usize = 48;
const GRID_THETA: usize = 64;
/// The g11 denominator 1 + (phi/(F' G)) zeta_theta must keep this margin.
const DENOM_MARGIN: f64 = 1e-6;

/// Build the metric of a disc admitting the prescribed steady flow.
pub fn build_metric(
    flow: FlowInput,
    phi: Expression,
    g_avg: Expression,
    zeta: ZetaSeries,
    radius: f64,
) -> Result<MetricField, SurfaceError> {
    let mut warnings = Vec::new();

    let u: RadialFn = match &flow {
        FlowInput::VelocityU(u) | FlowInput::Both { u, .. } => RadialFn::Expr(u.clone()),
        FlowInput::StreamF(f) => {
            let f = f.clone();
            let phi_c = phi.clone();
            RadialFn::builtin("F'/phi", move |r| {
                let fj = f
                    .eval_jet(r, 4)
                    .map_err(|source| ProfileError::Eval { r, source })?;
                let pj = phi_c
                    .eval_jet(r, 4)
                    .map_err(|source| ProfileError::Eval { r, source })?;
                fj.derivative()
                    .div_removable(pj)
                    .map_err(|source| ProfileError::Jet { r, source })
            })
        }
    };
    let f_prime: RadialFn = {
        let phi_c = phi.clone();
        let u_c = u.clone();
        RadialFn::builtin("phi*u", move |r| {
            let pj = phi_c
                .eval_jet(r, 4)
                .map_err(|source| ProfileError::Eval { r, source })?;
            Ok(pj * u_c.jet(r)?)
        })
    };
    if let FlowInput::Both { u: u_expr, f } = &flow {
        for i in 0..GRID_R {
            let r = radius * (i as f64 + 0.5) / GRID_R as f64;
            let fp = f
                .eval_jet(r, 4)
                .map_err(|source| ProfileError::Eval { r, source })?
                .d(1);
            let pu = phi
                .eval(r)
                .map_err(|source| ProfileError::Eval { r, source })?
                * u_expr
                    .eval(r)
                    .map_err(|source| ProfileError::Eval { r, source })?;
            if (fp - pu).abs() > 1e-9 * (1.0 + fp.abs()) {
                return Err(SurfaceError::FlowData(format!(
                    "F'({r}) = {fp} inconsistent with phi*u = {pu}"
                )));
            }
        }
    }

    // Smoothness at the origin: the mode-n coefficient must vanish to order
    // min(n, 4) at r = 0; beyond jet order 4 only a warning is possible.
    for t in &zeta.terms {
        let c = t
            .coeff
            .eval_jet(0.0, 4)
            .map_err(|source| ProfileError::Eval { r: 0.0, source })?;
        let check_to = (t.mode as usize).min(4);
        for k in 0..check_to {
            if c.d(k).abs() > 1e-9 {
                return Err(SurfaceError::DegenerateMetric(format!(
                    "zeta mode {} coefficient has nonzero order-{k} jet at r = 0 \
                     (must vanish to order {} for a smooth disc metric)",
                    t.mode, t.mode
                )));
            }
        }
        if t.mode > 4 {
            warnings.push(format!(
                "zeta mode {} vanishing checked only to jet order 4",
                t.mode
            ));
        }
    }

    let metric = MetricField {
        phi,
        g_avg,
        u,
        f_prime,
        zeta,
        radius,
        warnings,
    };

    for i in 0..GRID_R {
        let r = metric.radius * (i as f64 + 0.5) / GRID_R as f64;
        for j in 0..GRID_THETA {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / GRID_THETA as f64;
            let denom = metric.denom_ratio(r, theta)?;
            if denom < DENOM_MARGIN {
                return Err(SurfaceError::DegenerateMetric(format!(
                    "g11 denominator ratio {denom} below margin at (r, theta) = ({r}, {theta})"
                )));
            }
            let (g11, g12, g22) = metric.components(r, theta)?;
            let det = g11 * g22 - g12 * g12;
            if g11.is_nan() || det.is_nan() || g11 <= 0.0 || det <= 0.0 {
                return Err(SurfaceError::DegenerateMetric(format!(
                    "not positive definite at (r, theta) = ({r}, {theta}): g11 = {g11}, det = {det}"
                )));
            }
        }
    }
    Ok(metric)
}

impl MetricField {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn u(&self) -> &RadialFn {
        &self.u
    }

    /// 1 + (phi/(F' G)) zeta_theta, the g11 denominator ratio.
    fn denom_ratio(&self, r: f64, theta: f64) -> Result<f64, SurfaceError> {
        let phi = self.phi_jet(r)?;
        let g = self.g_jet(r)?;
        let fp = self.f_prime.jet(r)?;
        let zt = self.zeta.zeta_theta_jet(r, theta)?;
        let ratio = (phi * zt)
            .div_removable(fp * g)
            .map_err(|source| ProfileError::Jet { r, source })?;
        Ok(1.0 + ratio.value())
    }

    fn phi_jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        self.phi
            .eval_jet(r, 4)
            .map_err(|source| ProfileError::Eval { r, source })
    }

    fn g_jet(&self, r: f64) -> Result<Jet4, ProfileError> {
        self.g_avg
            .eval_jet(r, 4)
            .map_err(|source| ProfileError::Eval { r, source })
    }

    /// Metric component values at one point.
    pub fn components(&self, r: f64, theta: f64) -> Result<(f64, f64, f64), SurfaceError> {
        let j = self.component_jets(r, theta)?;
        Ok((j.0.value(), j.1.value(), j.2.value()))
    }

    /// r-jets of (g11, g12, g22) at fixed theta.
    pub fn component_jets(&self, r: f64, theta: f64) -> Result<(Jet4, Jet4, Jet4), SurfaceError> {
        let phi = self.phi_jet(r)?;
        let g = self.g_jet(r)?;
        let fp = self.f_prime.jet(r)?;
        let zr = self.zeta.zeta_r_jet(r, theta)?;
        let zt = self.zeta.zeta_theta_jet(r, theta)?;
        let wrap = |source| ProfileError::Jet { r, source };

        let g12 = (phi * zr).div_removable(fp).map_err(wrap)?;
        let g22 = g + (phi * zt).div_removable(fp).map_err(wrap)?;
        let num = phi * phi * (fp * fp + zr * zr);
        let den = fp * (fp * g + phi * zt);
        let g11 = num.div_removable(den).map_err(wrap)?;
        Ok((g11, g12, g22))
    }

    /// theta-derivative of g12 at one point (exact in theta).
    pub fn g12_theta_derivative(&self, r: f64, theta: f64) -> Result<f64, SurfaceError> {
        let phi = self.phi_jet(r)?;
        let fp = self.f_prime.jet(r)?;
        let zrt = self.zeta.zeta_r_theta_jet(r, theta)?;
        Ok((phi * zrt)
            .div_removable(fp)
            .map_err(|source| ProfileError::Jet { r, source })?
            .value())
    }

    /// Vorticity omega(r) = (1/phi) d/dr(F' G / phi) = (1/phi) d/dr(u G).
    pub fn omega(&self, r: f64) -> Result<f64, SurfaceError> {
        let phi = self.phi_jet(r)?;
        let g = self.g_jet(r)?;
        let u = self.u.jet(r)?;
        Ok((g * u)
            .derivative()
            .div_removable(phi)
            .map_err(|source| ProfileError::Jet { r, source })?
            .value())
    }

    /// Pointwise curl of U from the general vorticity formula
    /// (1/phi)[d/dr(u g22) - d/dtheta(u g12)]; steady flows make this a
    /// function of r alone.
    pub fn curl(&self, r: f64, theta: f64) -> Result<f64, SurfaceError> {
        let phi = self.phi_jet(r)?;
        let u = self.u.jet(r)?;
        let (_, _, g22) = self.component_jets(r, theta)?;
        let d_r = (u * g22).d(1);
        let d_theta = u.value() * self.g12_theta_derivative(r, theta)?;
        Ok((d_r - d_theta) / phi.value())
    }

    /// Check the defining identities on a 64x64 grid; reports the worst
    /// deviations and where they happen.
    pub fn verify_steady(&self) -> Result<SteadyReport, SurfaceError> {
        let mut det_dev = 0.0f64;
        let mut det_at = (0.0, 0.0);
        let mut curl_dev = 0.0f64;
        let mut curl_at = (0.0, 0.0);
        let mut omega_dev = 0.0f64;
        let n = 64usize;
        for i in 0..n {
            let r = self.radius * (i as f64 + 0.5) / n as f64;
            let phi_v = self
                .phi
                .eval(r)
                .map_err(|source| ProfileError::Eval { r, source })?;
            let omega_r = self.omega(r)?;
            let mut curl_avg = 0.0;
            let mut curls = vec![0.0f64; n];
            for (j, slot) in curls.iter_mut().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let (g11, g12, g22) = self.components(r, theta)?;
                let det = g11 * g22 - g12 * g12;
                let dev = (det - phi_v * phi_v).abs();
                if dev > det_dev {
                    det_dev = dev;
                    det_at = (r, theta);
                }
                let c = self.curl(r, theta)?;
                *slot = c;
                curl_avg += c / n as f64;
            }
            for (j, c) in curls.iter().enumerate() {
                let dev = (c - curl_avg).abs();
                if dev > curl_dev {
                    curl_dev = dev;
                    curl_at = (r, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
                }
            }
            omega_dev = omega_dev.max((curl_avg - omega_r).abs());
        }
        Ok(SteadyReport {
            max_det_deviation: det_dev,
            det_worst_point: det_at,
            max_curl_theta_deviation: curl_dev,
            curl_worst_point: curl_at,
            max_omega_deviation: omega_dev,
            det_ok: det_dev <= 1e-12,
            curl_radial_ok: curl_dev <= 1e-9,
            omega_ok: omega_dev <= 1e-9,
        })
    }

    /// Average out theta to recover the radial profile. E comes from a
    /// 256-point trapezoid average of g11 (exact for finite trigonometric
    /// series); G is the input G, since the perturbation is mean-free.
    pub fn profile(&self) -> Result<RadialProfile, SurfaceError> {
        let this = self.clone();
        let e_avg = RadialFn::builtin("avg(g11)", move |r| {
            let n = 256;
            let mut acc = Jet4::constant(0.0);
            for j in 0..n {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let (g11, _, _) = this
                    .component_jets(r, theta)
                    .map_err(|e| ProfileError::Invariant(format!("averaging g11: {e}")))?;
                acc = acc + g11 * (1.0 / n as f64);
            }
            Ok(acc)
        });
        RadialProfile::general(
            RadialFn::Expr(self.phi.clone()),
            self.u.clone(),
            e_avg,
            RadialFn::Expr(self.g_avg.clone()),
            self.radius,
        )
        .map_err(SurfaceError::Profile)
    }

    /// Gaussian curvature by the Brioschi formula with second-order central
    /// differences of the components. A plotting aid, not a certified value.
    pub fn curvature(&self, r: f64, theta: f64) -> Result<f64, SurfaceError> {
        let hr = (self.radius * 1e-4).min(0.45 * r.max(1e-6)).max(1e-7);
        let ht = 1e-4;
        let at = |rr: f64, tt: f64| self.components(rr, tt);
        let (e0, f0, g0) = at(r, theta)?;
        let (ep_r, fp_r, gp_r) = at(r + hr, theta)?;
        let (em_r, fm_r, gm_r) = at(r - hr, theta)?;
        let (ep_t, fp_t, gp_t) = at(r, theta + ht)?;
        let (em_t, fm_t, gm_t) = at(r, theta - ht)?;
        let (_, fpp, _) = at(r + hr, theta + ht)?;
        let (_, fpm, _) = at(r + hr, theta - ht)?;
        let (_, fmp, _) = at(r - hr, theta + ht)?;
        let (_, fmm, _) = at(r - hr, theta - ht)?;

        let e_u = (ep_r - em_r) / (2.0 * hr);
        let e_v = (ep_t - em_t) / (2.0 * ht);
        let e_vv = (ep_t - 2.0 * e0 + em_t) / (ht * ht);
        let f_u = (fp_r - fm_r) / (2.0 * hr);
        let f_v = (fp_t - fm_t) / (2.0 * ht);
        let f_uv = (fpp - fpm - fmp + fmm) / (4.0 * hr * ht);
        let g_u = (gp_r - gm_r) / (2.0 * hr);
        let g_uu = (gp_r - 2.0 * g0 + gm_r) / (hr * hr);
        let g_v = (gp_t - gm_t) / (2.0 * ht);

        let det3 = |m: [[f64; 3]; 3]| -> f64 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m1 = [
            [
                -0.5 * e_vv + f_uv - 0.5 * g_uu,
                0.5 * e_u,
                f_u - 0.5 * e_v,
            ],
            [f_v - 0.5 * g_u, e0, f0],
            [0.5 * g_v, f0, g0],
        ];
        let m2 = [
            [0.0, 0.5 * e_v, 0.5 * g_u],
            [0.5 * e_v, e0, f0],
            [0.5 * g_u, f0, g0],
        ];
        let den = (e0 * g0 - f0 * f0).powi(2);
        Ok((det3(m1) - det3(m2)) / den)
    }
}

/// Result of the steady-flow verification.
#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub max_det_deviation: f64,
    pub det_worst_point: (f64, f64),
    pub max_curl_theta_deviation: f64,
    pub curl_worst_point: (f64, f64),
    pub max_omega_deviation: f64,
    pub det_ok: bool,
    pub curl_radial_ok: bool,
    pub omega_ok: bool,
}

impl SteadyReport {
    pub fn all_ok(&self) -> bool {
        self.det_ok && self.curl_radial_ok && self.omega_ok
    }
}
