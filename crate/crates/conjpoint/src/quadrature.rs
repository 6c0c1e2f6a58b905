//! Deterministic adaptive 1D quadrature.
//!
//! The core rule is the 15-point Gauss--Kronrod pair with interval bisection
//! driven by the embedded error estimate. Subdivision is depth-first with a
//! fixed left-to-right summation order, so identical inputs produce
//! bit-identical results. Integrable endpoint power singularities are handled
//! by [`integrate_power_singular`], which integrates on a geometric ladder of
//! clipped intervals and removes the clipping error by Richardson
//! extrapolation.

/// Tolerances and limits for one integration call.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Hard cap on the number of accepted panels; exhausting it flags the
    /// result as not converged instead of descending the full depth tree
    /// (noisy integrands would otherwise split everywhere).
    pub max_panels: u32,
    /// Clip this much off each endpoint before integrating. Useful when the
    /// integrand has a removable 0/0 at the ends of the cell.
    pub endpoint_offset: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_depth: 60,
            max_panels: 4096,
            endpoint_offset: 0.0,
        }
    }
}

impl QuadratureSpec {
    /// Tolerances suited to integrands that are themselves produced by an
    /// inner quadrature (relative noise around 1e-11).
    pub fn noisy_integrand() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ..QuadratureSpec::default()
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 || self.abs_tol.is_nan() || self.abs_tol <= 0.0 {
            return Err(QuadratureError::BadSpec(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_depth < 1 || self.max_panels < 1 {
            return Err(QuadratureError::BadSpec(
                "max_depth and max_panels must be >= 1".into(),
            ));
        }
        if self.endpoint_offset.is_nan() || self.endpoint_offset < 0.0 {
            return Err(QuadratureError::BadSpec(
                "endpoint_offset must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Integration result. `converged == false` means the depth budget ran out
/// with the local error above tolerance; the value is still the best estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("invalid quadrature spec: {0}")]
    BadSpec(String),
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights. QUADPACK dqk15 values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

struct Gk15 {
    value: f64,
    error: f64,
    resabs: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Gk15, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sample = |x: f64| -> Result<f64, QuadratureError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFiniteSample { x })
        }
    };

    let fc = sample(center)?;
    let mut fv = [[0.0f64; 2]; 7];
    for (j, row) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        row[0] = sample(center - dx)?;
        row[1] = sample(center + dx)?;
    }

    let mut kron = fc * WGK[7];
    let mut resabs = kron.abs();
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let fsum = fv[j][0] + fv[j][1];
        kron += WGK[j] * fsum;
        resabs += WGK[j] * (fv[j][0].abs() + fv[j][1].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }

    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }

    let raw_err = ((kron - gauss) * half).abs();
    resabs *= half.abs();
    resasc *= half.abs();

    // QUADPACK error rescaling.
    let mut err = raw_err;
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }

    Ok(Gk15 {
        value: kron * half,
        error: err,
        resabs,
    })
}

struct Panel {
    value: f64,
    error: f64,
    resabs: f64,
    a: f64,
    b: f64,
    depth: u32,
}

impl Panel {
    fn from_gk(g: Gk15, a: f64, b: f64, depth: u32) -> Self {
        Panel {
            value: g.value,
            error: g.error,
            resabs: g.resabs,
            a,
            b,
            depth,
        }
    }
}

// Max-heap order on the error, with the interval position as a deterministic
// tie-break.
impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration of `f` over `[a, b]`: globally adaptive bisection,
/// always refining the panel with the largest error estimate, with a
/// deterministic worst-first order and a deterministic final summation.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(QuadratureError::BadInterval { a, b });
    }
    let (lo, hi) = (a + spec.endpoint_offset, b - spec.endpoint_offset);
    if lo >= hi {
        return Err(QuadratureError::BadInterval { a: lo, b: hi });
    }

    let mut heap = std::collections::BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let first = gk15(&f, lo, hi)?;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut frozen_error = 0.0f64;
    heap.push(Panel::from_gk(first, lo, hi, 0));

    let mut splits = 0u32;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= tol || splits >= spec.max_panels {
            break;
        }
        // All remaining error locked in frozen panels: no further progress.
        if total_error - frozen_error <= 0.01 * tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let floor = 100.0 * f64::EPSILON * worst.resabs;
        if worst.depth >= spec.max_depth
            || !(worst.a < mid && mid < worst.b)
            || worst.error <= floor
        {
            frozen_error += worst.error;
            frozen.push(worst);
            continue;
        }
        splits += 1;
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(Panel::from_gk(left, worst.a, mid, worst.depth + 1));
        heap.push(Panel::from_gk(right, mid, worst.b, worst.depth + 1));
    }

    // Deterministic left-to-right summation, independent of heap layout.
    let mut panels: Vec<Panel> = frozen;
    panels.extend(heap.into_vec());
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = 0.0;
    let mut error = 0.0;
    let mut resabs = 0.0;
    for p in &panels {
        value += p.value;
        error += p.error;
        resabs += p.resabs;
    }
    let goal = spec
        .abs_tol
        .max(spec.rel_tol * value.abs())
        .max(100.0 * f64::EPSILON * resabs);
    Ok(Quadrature {
        value,
        error_estimate: error,
        converged: error <= 10.0 * goal,
    })
}

/// Which endpoint carries the power singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    Left,
    Right,
}

/// Integrate `f` over `(a, b)` where `f ~ C (x-a)^(beta-1)` near `a`
/// (or `(b-x)^(beta-1)` near `b`), with `beta > 0` so the integral exists.
///
/// The tail clipped off at offset eps contributes `C1 eps^beta + C2 eps^(beta+1) + ...`;
/// integrating on a geometric ladder of offsets and eliminating those powers
/// recovers the full integral without ever sampling the singular point.
pub fn integrate_power_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    beta: f64,
    end: SingularEnd,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(QuadratureError::BadInterval { a, b });
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(QuadratureError::BadSpec(format!(
            "singularity exponent beta must be positive, got {beta}"
        )));
    }
    let levels = 11usize;
    let q = 0.5f64;
    let eps0 = 0.25 * (b - a);
    let inner = QuadratureSpec {
        rel_tol: (spec.rel_tol * 1e-2).max(1e-14),
        abs_tol: (spec.abs_tol * 1e-2).max(1e-16),
        max_depth: spec.max_depth,
        max_panels: spec.max_panels,
        endpoint_offset: 0.0,
    };

    let mut vals = Vec::with_capacity(levels);
    let mut inner_err = 0.0;
    let mut converged = true;
    for j in 0..levels {
        let eps = eps0 * q.powi(j as i32);
        let res = match end {
            SingularEnd::Left => integrate(&f, a + eps, b, &inner)?,
            SingularEnd::Right => integrate(&f, a, b - eps, &inner)?,
        };
        inner_err += res.error_estimate;
        converged &= res.converged;
        vals.push(res.value);
    }

    // Richardson elimination of eps^(beta), eps^(beta+1), ... on the ladder.
    let mut last_diff = f64::INFINITY;
    for k in 0..levels - 1 {
        let fac = q.powf(beta + k as f64);
        for j in 0..vals.len() - 1 {
            vals[j] = (vals[j + 1] - fac * vals[j]) / (1.0 - fac);
        }
        vals.pop();
        if vals.len() >= 2 {
            last_diff = (vals[vals.len() - 1] - vals[vals.len() - 2]).abs();
        }
    }
    let value = vals[0];
    if !value.is_finite() {
        return Err(QuadratureError::NonFiniteSample { x: a });
    }
    let error = inner_err + last_diff;
    let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
    Ok(Quadrature {
        value,
        error_estimate: error,
        converged: converged && error <= tol.max(1e3 * f64::EPSILON * value.abs()),
    })
}
