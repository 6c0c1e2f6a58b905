//! Command-line front end: config parsing, analysis dispatch, reports.
//!
//! Configs are plain INI-style text with `[profile]`, `[surface]`, and
//! `[zeta]` sections. Values are numbers or double-quoted expressions in the
//! variable r. Unknown keys are hard errors so a typo in a sensitive
//! coefficient cannot pass silently.
//!
//! Exit codes are a stable contract: 0 = certified / pass, 1 = inconclusive,
//! 2 = error.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::criteria::{self, CriterionReport, Witness};
use crate::expr::Expression;
use crate::index::{self, ConstantVorticity, IndexQuadratic, TestFunctionXi, Verdict};
use crate::kolmogorov::{self, KolmogorovCell};
use crate::profiles::RadialProfile;
use crate::surface::{self, AngularKind, FlowInput, MetricField, ZetaSeries};
use crate::torus::{self, RationalPiSquared, TrigPoly2};

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Message(String),
    #[error("expression `{source_text}`: {err}")]
    Expr {
        source_text: String,
        err: crate::expr::ParseError,
    },
}

impl CliError {
    fn msg(m: impl Into<String>) -> Self {
        CliError::Message(m.into())
    }
}

/// Sections of key = value pairs, with line numbers for diagnostics.
#[derive(Debug, Default)]
pub struct ConfigDocument {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = ConfigDocument::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(CliError::Config {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim().to_ascii_lowercase();
                if doc.sections.contains_key(&name) {
                    return Err(CliError::Config {
                        line: line_no,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                doc.sections.insert(name.clone(), BTreeMap::new());
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config {
                    line: line_no,
                    message: "expected `key = value` or a [section] header".into(),
                });
            };
            let Some(section) = &current else {
                return Err(CliError::Config {
                    line: line_no,
                    message: "key outside any [section]".into(),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            let entries = doc.sections.get_mut(section).unwrap();
            if entries.contains_key(&key) {
                return Err(CliError::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(key, (value, line_no));
        }
        Ok(doc)
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, (String, usize)>> {
        self.sections.get(name)
    }

    fn check_known_keys(&self, section: &str, known: &[&str]) -> Result<(), CliError> {
        if let Some(entries) = self.section(section) {
            for (key, (_, line)) in entries {
                if !known.contains(&key.as_str()) {
                    return Err(CliError::Config {
                        line: *line,
                        message: format!(
                            "unknown key `{key}` in [{section}] (known: {})",
                            known.join(", ")
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

fn strip_quotes(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn parse_expr(source: &str) -> Result<Expression, CliError> {
    Expression::parse(source).map_err(|err| CliError::Expr {
        source_text: source.to_string(),
        err,
    })
}

fn get_expr(
    entries: &BTreeMap<String, (String, usize)>,
    key: &str,
) -> Result<Option<Expression>, CliError> {
    match entries.get(key) {
        None => Ok(None),
        Some((v, _)) => Ok(Some(parse_expr(strip_quotes(v))?)),
    }
}

fn require_expr(
    entries: &BTreeMap<String, (String, usize)>,
    section: &str,
    key: &str,
) -> Result<Expression, CliError> {
    get_expr(entries, key)?
        .ok_or_else(|| CliError::msg(format!("[{section}] is missing required key `{key}`")))
}

/// A constant: a bare number or a quoted r-free expression like "ln(2)".
fn get_constant(
    entries: &BTreeMap<String, (String, usize)>,
    section: &str,
    key: &str,
) -> Result<f64, CliError> {
    let (v, line) = entries
        .get(key)
        .ok_or_else(|| CliError::msg(format!("[{section}] is missing required key `{key}`")))?;
    let e = parse_expr(strip_quotes(v))?;
    let at0 = e
        .eval(0.0)
        .map_err(|err| CliError::Config {
            line: *line,
            message: format!("cannot evaluate constant: {err}"),
        })?;
    let at1 = e.eval(1.0).map_err(|err| CliError::Config {
        line: *line,
        message: format!("cannot evaluate constant: {err}"),
    })?;
    if (at0 - at1).abs() > 1e-12 * (1.0 + at0.abs()) {
        return Err(CliError::Config {
            line: *line,
            message: format!("`{key}` must be a constant (it depends on r)"),
        });
    }
    Ok(at0)
}

/// Build the radial profile described by the [profile] section.
pub fn profile_from_config(doc: &ConfigDocument) -> Result<RadialProfile, CliError> {
    doc.check_known_keys("profile", &["kind", "r", "phi", "u", "e", "g"])?;
    let entries = doc
        .section("profile")
        .ok_or_else(|| CliError::msg("config has no [profile] section"))?;
    let kind = entries
        .get("kind")
        .map(|(v, _)| strip_quotes(v).to_ascii_lowercase())
        .unwrap_or_else(|| "rotational".into());
    let radius = get_constant(entries, "profile", "r")?;
    let phi = require_expr(entries, "profile", "phi")?;
    let u = require_expr(entries, "profile", "u")?;
    let profile = match kind.as_str() {
        "rotational" => RadialProfile::rotational(phi, u, radius),
        "rotational-annulus" => RadialProfile::rotational_annulus(phi, u, radius),
        "general" => {
            let e = require_expr(entries, "profile", "e")?;
            let g = require_expr(entries, "profile", "g")?;
            RadialProfile::general(phi, u, e, g, radius)
        }
        other => {
            return Err(CliError::msg(format!(
                "unknown profile kind `{other}` (rotational, rotational-annulus, general)"
            )))
        }
    };
    profile.map_err(|e| CliError::msg(format!("profile rejected: {e}")))
}

/// Build the surface metric described by [surface] and optional [zeta].
pub fn metric_from_config(doc: &ConfigDocument) -> Result<MetricField, CliError> {
    doc.check_known_keys("surface", &["r", "phi", "g", "u", "f"])?;
    let entries = doc
        .section("surface")
        .ok_or_else(|| CliError::msg("config has no [surface] section"))?;
    let radius = get_constant(entries, "surface", "r")?;
    let phi = require_expr(entries, "surface", "phi")?;
    let g = require_expr(entries, "surface", "g")?;
    let u = get_expr(entries, "u")?;
    let f = get_expr(entries, "f")?;
    let flow = match (u, f) {
        (Some(u), None) => FlowInput::VelocityU(u),
        (None, Some(f)) => FlowInput::StreamF(f),
        (Some(u), Some(f)) => FlowInput::Both { u, f },
        (None, None) => {
            return Err(CliError::msg("[surface] needs `u` or `f` (or both)"));
        }
    };
    let mut zeta = ZetaSeries::zero();
    if let Some(zentries) = doc.section("zeta") {
        for (key, (value, line)) in zentries {
            let (kind, mode_str) = if let Some(rest) = key.strip_prefix("cos") {
                (AngularKind::Cos, rest)
            } else if let Some(rest) = key.strip_prefix("sin") {
                (AngularKind::Sin, rest)
            } else {
                return Err(CliError::Config {
                    line: *line,
                    message: format!("zeta keys look like cos2 or sin3, got `{key}`"),
                });
            };
            let mode: u32 = mode_str.parse().map_err(|_| CliError::Config {
                line: *line,
                message: format!("cannot parse angular mode in `{key}`"),
            })?;
            zeta.push(kind, mode, parse_expr(strip_quotes(value))?);
        }
    }
    surface::build_metric(flow, phi, g, zeta, radius)
        .map_err(|e| CliError::msg(format!("surface rejected: {e}")))
}

/// Rendered report plus the exit code it implies.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::ConjugatePointCertified => EXIT_CERTIFIED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn push_porcelain(out: &mut String, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        writeln!(out, "{k} = {v}").unwrap();
    }
}

/// `index` command: evaluate or minimize the drift quadratic for a profile
/// and a test function.
pub fn cmd_index(
    doc: &ConfigDocument,
    xi_source: &str,
    support: Option<(f64, f64)>,
    alpha: Option<f64>,
    porcelain: bool,
) -> Result<Outcome, CliError> {
    let profile = profile_from_config(doc)?;
    let xi_expr = parse_expr(xi_source)?;
    let xi = match support {
        Some((a, b)) => TestFunctionXi::with_support(xi_expr, a, b, profile.radius()),
        None => TestFunctionXi::new(xi_expr, profile.radius()),
    }
    .map_err(|e| CliError::msg(format!("test function rejected: {e}")))?;

    let mut out = String::new();
    match alpha {
        Some(alpha) => {
            let v = index::index_i1(&profile, &xi, alpha)
                .map_err(|e| CliError::msg(format!("index evaluation failed: {e}")))?;
            if porcelain {
                push_porcelain(
                    &mut out,
                    &[
                        ("alpha", format!("{alpha}")),
                        ("index", format!("{}", v.value)),
                        ("error_estimate", format!("{}", v.error_estimate)),
                    ],
                );
            } else {
                writeln!(out, "I({alpha}) = {} (quadrature error {:.2e})", v.value, v.error_estimate)
                    .unwrap();
            }
            let code = if v.value < 0.0 {
                EXIT_CERTIFIED
            } else {
                EXIT_INCONCLUSIVE
            };
            Ok(Outcome {
                text: out,
                exit_code: code,
            })
        }
        None => {
            let q = index::minimize_over_alpha(&profile, &xi)
                .map_err(|e| CliError::msg(format!("index minimization failed: {e}")))?;
            render_quadratic(&mut out, &q, porcelain);
            Ok(Outcome {
                text: out,
                exit_code: verdict_exit(q.verdict),
            })
        }
    }
}

fn render_quadratic(out: &mut String, q: &IndexQuadratic, porcelain: bool) {
    if porcelain {
        push_porcelain(
            out,
            &[
                ("a", format!("{}", q.a)),
                ("b", format!("{}", q.b)),
                ("c", format!("{}", q.c)),
                ("alpha_star", format!("{}", q.alpha_star)),
                ("i_min", format!("{}", q.i_min)),
                ("discriminant", format!("{}", q.discriminant)),
                ("margin", format!("{}", q.margin)),
                ("verdict", format!("{}", q.verdict)),
            ],
        );
    } else {
        writeln!(out, "I(alpha) = A alpha^2 + 2B alpha + C with").unwrap();
        writeln!(out, "  A = {}", q.a).unwrap();
        writeln!(out, "  B = {}", q.b).unwrap();
        writeln!(out, "  C = {}", q.c).unwrap();
        writeln!(out, "minimizer alpha* = {}", q.alpha_star).unwrap();
        writeln!(out, "I(alpha*) = {}", q.i_min).unwrap();
        writeln!(
            out,
            "discriminant B^2 - AC = {} (margin {:.2e})",
            q.discriminant, q.margin
        )
        .unwrap();
        writeln!(out, "{}", q.verdict).unwrap();
    }
}

/// Which closed-form criterion `cmd_criteria` should run.
#[derive(Debug, Clone, Copy)]
pub enum CriterionChoice {
    Isochronal,
    Interior { r0: f64 },
    Origin,
}

pub fn cmd_criteria(
    doc: &ConfigDocument,
    which: CriterionChoice,
    porcelain: bool,
) -> Result<Outcome, CliError> {
    let profile = profile_from_config(doc)?;
    let report = match which {
        CriterionChoice::Isochronal => criteria::isochronal(&profile),
        CriterionChoice::Interior { r0 } => criteria::interior_extremum(&profile, r0),
        CriterionChoice::Origin => criteria::origin_extremum(&profile),
    }
    .map_err(|e| CliError::msg(format!("criterion failed: {e}")))?;
    let mut out = String::new();
    render_criterion(&mut out, &report, porcelain);
    Ok(Outcome {
        text: out,
        exit_code: verdict_exit(report.verdict),
    })
}

fn render_criterion(out: &mut String, rep: &CriterionReport, porcelain: bool) {
    if porcelain {
        let mut pairs = vec![
            ("criterion", rep.name.to_string()),
            ("lhs", format!("{}", rep.lhs)),
            ("rhs", format!("{}", rep.rhs)),
            ("verdict", rep.verdict.to_string()),
        ];
        if let Some(ratio) = rep.rotational_ratio {
            pairs.push(("rotational_ratio", format!("{ratio}")));
        }
        if let Witness::CriticalRadius { r0, u, usecond } = rep.witness {
            pairs.push(("r0", format!("{r0}")));
            pairs.push(("u_r0", format!("{u}")));
            pairs.push(("u_second_r0", format!("{usecond}")));
        }
        push_porcelain(out, &pairs);
        return;
    }
    writeln!(out, "criterion: {}", rep.name).unwrap();
    match rep.name {
        criteria::CriterionKind::Isochronal => {
            writeln!(
                out,
                "max |d/dr (G'/phi)| = {} vs threshold {}",
                rep.lhs, rep.rhs
            )
            .unwrap();
            if let Some(k) = rep.rotational_ratio {
                writeln!(out, "max |kappa| on the grid = {k}").unwrap();
            }
        }
        criteria::CriterionKind::InteriorExtremum => {
            if let Witness::CriticalRadius { r0, u, usecond } = rep.witness {
                writeln!(out, "critical radius r0 = {r0} (u = {u}, u'' = {usecond})").unwrap();
            }
            writeln!(out, "decisive: {} > {} ?", rep.lhs, rep.rhs).unwrap();
        }
        criteria::CriterionKind::OriginExtremum => {
            if let Witness::OriginJets {
                u0,
                usecond,
                e0,
                g2,
                g4,
                phi1,
                phi3,
            } = rep.witness
            {
                writeln!(
                    out,
                    "origin jets: u(0) = {u0}, u''(0) = {usecond}, E(0) = {e0}, \
                     G''(0) = {g2}, G''''(0) = {g4}, phi'(0) = {phi1}, phi'''(0) = {phi3}"
                )
                .unwrap();
            }
            writeln!(out, "decisive: {} < {} ?", rep.lhs, rep.rhs).unwrap();
        }
    }
    if let Some(ratio) = rep.rotational_ratio {
        if rep.name != criteria::CriterionKind::Isochronal {
            writeln!(out, "rotational form kappa u/u'' = {ratio}").unwrap();
        }
    }
    writeln!(out, "{}", rep.verdict).unwrap();
}

/// Subcommands of `kolmogorov`.
#[derive(Debug, Clone, Copy)]
pub enum KolmogorovAction {
    /// CSV of (r, mbar(r)) on r = 0.01..0.99.
    Mbar,
    /// CSV of (r, u, phi, G, E).
    Profile,
    /// Max residual of the flow ODE over a sample of (t, s).
    VerifyFlow,
}

pub fn cmd_kolmogorov(
    m: u32,
    n: u32,
    action: KolmogorovAction,
    porcelain: bool,
) -> Result<Outcome, CliError> {
    let cell = KolmogorovCell::new(m, n).map_err(|e| CliError::msg(e.to_string()))?;
    let mut out = String::new();
    match action {
        KolmogorovAction::Mbar => {
            writeln!(out, "# conjpoint {} kolmogorov mbar m={m} n={n}", crate::VERSION).unwrap();
            writeln!(out, "r,mbar").unwrap();
            let mut all_negative = true;
            for i in 1..=99 {
                let r = i as f64 * 0.01;
                let v = kolmogorov::mbar(r).map_err(|e| CliError::msg(e.to_string()))?;
                all_negative &= v < 0.0;
                writeln!(out, "{r},{v}").unwrap();
            }
            Ok(Outcome {
                text: out,
                exit_code: if all_negative {
                    EXIT_CERTIFIED
                } else {
                    EXIT_INCONCLUSIVE
                },
            })
        }
        KolmogorovAction::Profile => {
            writeln!(
                out,
                "# conjpoint {} kolmogorov profile m={m} n={n}",
                crate::VERSION
            )
            .unwrap();
            writeln!(out, "r,u,phi,G,E").unwrap();
            for i in 1..=99 {
                let r = i as f64 * 0.01;
                let u = cell.u(r).map_err(|e| CliError::msg(e.to_string()))?;
                let phi = cell.phi(r).map_err(|e| CliError::msg(e.to_string()))?;
                let g = cell.g(r).map_err(|e| CliError::msg(e.to_string()))?;
                let e = cell.e(r).map_err(|e| CliError::msg(e.to_string()))?;
                writeln!(out, "{r},{u},{phi},{g},{e}").unwrap();
            }
            Ok(Outcome {
                text: out,
                exit_code: EXIT_CERTIFIED,
            })
        }
        KolmogorovAction::VerifyFlow => {
            let mut max_resid = 0.0f64;
            let h = 1e-6;
            let mn = (m * n) as f64;
            for s in [0.2, 0.4, 0.6, 0.8] {
                let period = 4.0
                    * crate::elliptic::complete_k(s).map_err(|e| CliError::msg(e.to_string()))?
                    / mn;
                for i in 0..25 {
                    let t = period * i as f64 / 25.0;
                    let fl = |tt: f64| cell.flow_xy(tt, s).map_err(|e| CliError::msg(e.to_string()));
                    let (x, y) = fl(t)?;
                    let (xp, yp) = fl(t + h)?;
                    let (xm, ym) = fl(t - h)?;
                    let dx = (xp - xm) / (2.0 * h);
                    let dy = (yp - ym) / (2.0 * h);
                    max_resid = max_resid
                        .max((dx + mn * y * (1.0 - x * x)).abs())
                        .max((dy - mn * x * (1.0 - y * y)).abs());
                }
            }
            if porcelain {
                push_porcelain(&mut out, &[("max_ode_residual", format!("{max_resid}"))]);
            } else {
                writeln!(out, "max flow ODE residual = {max_resid:.3e}").unwrap();
            }
            Ok(Outcome {
                text: out,
                exit_code: if max_resid <= 1e-7 {
                    EXIT_CERTIFIED
                } else {
                    EXIT_INCONCLUSIVE
                },
            })
        }
    }
}

/// Built-in test functions for the torus criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusBuiltin {
    M1,
    Z22,
    Z32,
    Z33,
    Dmsy,
}

pub fn cmd_torus(
    m: u32,
    n: u32,
    zeta_text: Option<&str>,
    builtin: Option<TorusBuiltin>,
    porcelain: bool,
) -> Result<Outcome, CliError> {
    let (zeta, label): (TrigPoly2, &str) = match (zeta_text, builtin) {
        (Some(text), None) => (
            torus::parse_zeta(text).map_err(|e| CliError::msg(e.to_string()))?,
            "file",
        ),
        (None, Some(b)) => match b {
            TorusBuiltin::M1 => (torus::zeta_m1(), "m1"),
            TorusBuiltin::Z22 => (torus::zeta_22(), "22"),
            TorusBuiltin::Z32 => (torus::zeta_32(), "32"),
            TorusBuiltin::Z33 => (torus::zeta_33(), "33"),
            TorusBuiltin::Dmsy => (torus::dmsy_zeta(m, n), "dmsy"),
        },
        _ => {
            return Err(CliError::msg(
                "exactly one of --zeta FILE or --builtin NAME is required",
            ))
        }
    };
    let idx = torus::misiolek_index(m, n, &zeta).map_err(|e| CliError::msg(e.to_string()))?;
    let negative = idx.is_negative();
    let mut out = String::new();
    let region = if builtin == Some(TorusBuiltin::Dmsy) {
        Some(torus::dmsy_region(m, n))
    } else {
        None
    };
    if porcelain {
        let mut pairs = vec![
            ("m", m.to_string()),
            ("n", n.to_string()),
            ("zeta", label.to_string()),
            ("iota_over_pi2", format!("{}", idx.q)),
            (
                "verdict",
                if negative {
                    "conjugate point: YES".into()
                } else {
                    "inconclusive".into()
                },
            ),
        ];
        if let Some(member) = region {
            pairs.push(("region_member", member.to_string()));
        }
        push_porcelain(&mut out, &pairs);
    } else {
        render_torus_line(&mut out, &idx, negative);
        if let Some(member) = region {
            writeln!(
                out,
                "published-region membership (n >= 2, m > (3n^2+6)/(sqrt(3) n)): {member}"
            )
            .unwrap();
        }
    }
    Ok(Outcome {
        text: out,
        exit_code: if negative {
            EXIT_CERTIFIED
        } else {
            EXIT_INCONCLUSIVE
        },
    })
}

fn render_torus_line(out: &mut String, idx: &RationalPiSquared, negative: bool) {
    writeln!(
        out,
        "iota = {idx}; {}",
        if negative {
            "conjugate point: YES"
        } else {
            "inconclusive"
        }
    )
    .unwrap();
}

pub fn cmd_surface(
    doc: &ConfigDocument,
    csv_path: Option<&std::path::Path>,
    porcelain: bool,
) -> Result<Outcome, CliError> {
    let metric = metric_from_config(doc)?;
    let report = metric
        .verify_steady()
        .map_err(|e| CliError::msg(e.to_string()))?;
    let profile = metric.profile().map_err(|e| CliError::msg(e.to_string()))?;
    let origin = criteria::origin_extremum(&profile).ok();
    let constant_vorticity = index::constant_vorticity_rule(&profile).ok();

    let mut out = String::new();
    for w in metric.warnings() {
        writeln!(out, "warning: {w}").unwrap();
    }
    if porcelain {
        let mut pairs = vec![
            ("det_check", pass_fail(report.det_ok).into()),
            ("det_max_deviation", format!("{}", report.max_det_deviation)),
            ("curl_radial_check", pass_fail(report.curl_radial_ok).into()),
            (
                "curl_max_theta_deviation",
                format!("{}", report.max_curl_theta_deviation),
            ),
            ("omega_check", pass_fail(report.omega_ok).into()),
        ];
        if let Some(ref rep) = origin {
            pairs.push(("origin_lhs", format!("{}", rep.lhs)));
            pairs.push(("origin_rhs", format!("{}", rep.rhs)));
            pairs.push(("origin_verdict", rep.verdict.to_string()));
        }
        push_porcelain(&mut out, &pairs);
    } else {
        writeln!(
            out,
            "det check {} (max |g11 g22 - g12^2 - phi^2| = {:.3e})",
            pass_fail(report.det_ok),
            report.max_det_deviation
        )
        .unwrap();
        writeln!(
            out,
            "curl radial {} (max theta-deviation = {:.3e})",
            pass_fail(report.curl_radial_ok),
            report.max_curl_theta_deviation
        )
        .unwrap();
        writeln!(
            out,
            "omega check {} (max deviation = {:.3e})",
            pass_fail(report.omega_ok),
            report.max_omega_deviation
        )
        .unwrap();
        match &origin {
            Some(rep) => {
                writeln!(
                    out,
                    "origin criterion: {} < {} ? {}",
                    rep.lhs, rep.rhs, rep.verdict
                )
                .unwrap();
            }
            None => writeln!(out, "origin criterion: not applicable").unwrap(),
        }
        if let Some(ConstantVorticity::NoConjugatePointInThisFamily) = constant_vorticity {
            writeln!(out, "constant vorticity: no conjugate point in this family").unwrap();
        }
    }

    if let Some(path) = csv_path {
        let csv = surface_csv(&metric).map_err(|e| CliError::msg(e.to_string()))?;
        std::fs::write(path, csv)
            .map_err(|e| CliError::msg(format!("cannot write {}: {e}", path.display())))?;
        writeln!(out, "wrote component grid to {}", path.display()).unwrap();
    }

    let certified = origin
        .as_ref()
        .map(|r| r.verdict == Verdict::ConjugatePointCertified)
        .unwrap_or(false);
    let code = if !report.all_ok() {
        EXIT_ERROR
    } else if certified {
        EXIT_CERTIFIED
    } else {
        EXIT_INCONCLUSIVE
    };
    Ok(Outcome {
        text: out,
        exit_code: code,
    })
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn surface_csv(metric: &MetricField) -> Result<String, surface::SurfaceError> {
    let mut out = String::new();
    writeln!(out, "# conjpoint {} surface components", crate::VERSION).unwrap();
    writeln!(out, "r,theta,g11,g12,g22,curvature").unwrap();
    let (nr, nt) = (32, 32);
    for i in 1..=nr {
        let r = metric.radius() * i as f64 / (nr as f64 + 1.0);
        for j in 0..nt {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            let (g11, g12, g22) = metric.components(r, theta)?;
            let k = metric.curvature(r, theta)?;
            writeln!(out, "{r},{theta},{g11},{g12},{g22},{k}").unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_strictness() {
        let doc = ConfigDocument::parse(
            "# hyperbolic\n[profile]\nkind = rotational\nR = \"ln(2)\"\nphi = \"sinh(r)\"\nu = \"cosh(r)\"\n",
        )
        .unwrap();
        let p = profile_from_config(&doc).unwrap();
        assert!((p.radius() - 2.0f64.ln()).abs() < 1e-15);

        let bad = ConfigDocument::parse("[profile]\nfoo = 1\n").unwrap();
        assert!(matches!(
            profile_from_config(&bad),
            Err(CliError::Config { .. })
        ));

        assert!(ConfigDocument::parse("[profile\n").is_err());
        assert!(ConfigDocument::parse("key = 1\n").is_err());
        assert!(ConfigDocument::parse("[a]\nk = 1\nk = 2\n").is_err());
    }

    #[test]
    fn index_command_hyperbolic() {
        let doc = ConfigDocument::parse(
            "[profile]\nR = \"ln(2)\"\nphi = \"sinh(r)\"\nu = \"cosh(r)\"\n",
        )
        .unwrap();
        let out = cmd_index(&doc, "sinh(r)*sinh(ln(2) - r)", None, None, true).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        assert!(out.text.contains("verdict = conjugate point: YES"));
    }

    #[test]
    fn index_command_flat_disc_inconclusive() {
        let doc =
            ConfigDocument::parse("[profile]\nR = 1\nphi = \"r\"\nu = \"1\"\n").unwrap();
        let out = cmd_index(&doc, "r*(1 - r)", None, None, false).unwrap();
        assert_eq!(out.exit_code, EXIT_INCONCLUSIVE);
    }

    #[test]
    fn malformed_expression_is_an_error() {
        let doc =
            ConfigDocument::parse("[profile]\nR = 1\nphi = \"r\"\nu = \"1\"\n").unwrap();
        let err = cmd_index(&doc, "sin(", None, None, false).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("position 4"), "{msg}");
    }

    #[test]
    fn criteria_commands() {
        let sphere = ConfigDocument::parse(
            "[profile]\nR = \"pi\"\nphi = \"sin(r)\"\nu = \"1\"\n",
        )
        .unwrap();
        let out = cmd_criteria(&sphere, CriterionChoice::Isochronal, false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);

        let interior = ConfigDocument::parse(
            "[profile]\nR = \"pi\"\nphi = \"sin(r)\"\nu = \"9/8 - sqrt(2)*cos(r) + cos(r)^2\"\n",
        )
        .unwrap();
        #[allow(clippy::approx_constant)] // user-style truncated guess
        let guess = 0.7853981634;
        let out =
            cmd_criteria(&interior, CriterionChoice::Interior { r0: guess }, true).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        let lhs: f64 = out
            .text
            .lines()
            .find_map(|l| l.strip_prefix("lhs = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((lhs - 0.625).abs() < 1e-10, "{}", out.text);

        let origin = ConfigDocument::parse(
            "[profile]\nkind = general\nR = 1\nphi = \"r\"\nu = \"5 + r^2/2\"\nE = \"1\"\nG = \"r^2 - r^4/8\"\n",
        )
        .unwrap();
        let out = cmd_criteria(&origin, CriterionChoice::Origin, true).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        assert!(out.text.contains("lhs = 27"), "{}", out.text);
        assert!(out.text.contains("rhs = 30"), "{}", out.text);
    }

    #[test]
    fn torus_command_builtins() {
        let out = cmd_torus(2, 2, None, Some(TorusBuiltin::Z22), false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        assert!(out.text.contains("iota = -854 pi^2"), "{}", out.text);
        assert!(out.text.contains("conjugate point: YES"));

        let out = cmd_torus(5, 1, None, Some(TorusBuiltin::M1), false).unwrap();
        assert!(out.text.contains("iota = -271/4 pi^2"), "{}", out.text);
        assert_eq!(out.exit_code, EXIT_CERTIFIED);

        // the resonant (1,1) case stays positive (exact value 43/8)
        let out = cmd_torus(1, 1, None, Some(TorusBuiltin::M1), false).unwrap();
        assert_eq!(out.exit_code, EXIT_INCONCLUSIVE);
        assert!(out.text.contains("43/8 pi^2"), "{}", out.text);
        assert!(out.text.contains("inconclusive"));

        let out = cmd_torus(7, 2, None, Some(TorusBuiltin::Dmsy), false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        assert!(out.text.contains("membership"), "{}", out.text);
    }

    #[test]
    fn kolmogorov_commands() {
        let out = cmd_kolmogorov(1, 1, KolmogorovAction::Mbar, false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        let lines: Vec<&str> = out.text.lines().collect();
        assert!(lines[0].starts_with("# conjpoint"));
        assert_eq!(lines[1], "r,mbar");
        assert_eq!(lines.len(), 2 + 99);

        let out = cmd_kolmogorov(3, 2, KolmogorovAction::VerifyFlow, false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
    }

    #[test]
    fn surface_command() {
        let doc = ConfigDocument::parse(
            "[surface]\nR = 1\nphi = \"r\"\nG = \"r^2 - r^4/8\"\nu = \"5 + r^2/2\"\n\n[zeta]\ncos2 = \"r^6\"\n",
        )
        .unwrap();
        let out = cmd_surface(&doc, None, false).unwrap();
        assert_eq!(out.exit_code, EXIT_CERTIFIED);
        assert!(out.text.contains("det check PASS"), "{}", out.text);
        assert!(out.text.contains("curl radial PASS"));

        // oversized zeta: exit 2 via error
        let bad = ConfigDocument::parse(
            "[surface]\nR = 1\nphi = \"r\"\nG = \"r^2 - r^4/8\"\nu = \"5 + r^2/2\"\n\n[zeta]\ncos2 = \"1000000*r^6\"\n",
        )
        .unwrap();
        assert!(cmd_surface(&bad, None, false).is_err());
    }

    #[test]
    fn csv_deterministic() {
        let a = cmd_kolmogorov(1, 1, KolmogorovAction::Mbar, false).unwrap();
        let b = cmd_kolmogorov(1, 1, KolmogorovAction::Mbar, false).unwrap();
        assert_eq!(a.text, b.text);
    }
}
