use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use conjpoint::cli::{
    self, CliError, ConfigDocument, CriterionChoice, KolmogorovAction, Outcome, TorusBuiltin,
};

/// Conjugate-point criteria for steady 2D Euler flows in rotational cells.
///
/// Exit codes: 0 = certified / pass, 1 = inconclusive, 2 = error.
#[derive(Parser)]
#[command(name = "conjpoint", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the index form for a profile and test function, or minimize
    /// it over the drift.
    Index {
        /// Config file with a [profile] section.
        #[arg(long)]
        config: PathBuf,
        /// Test function xi(r) as an expression; must vanish at the support
        /// edges.
        #[arg(long)]
        xi: String,
        /// Restrict xi to the support [A, B] (zero outside).
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        support: Option<Vec<f64>>,
        /// Evaluate at this drift value instead of minimizing.
        #[arg(long, conflicts_with = "minimize")]
        alpha: Option<f64>,
        /// Minimize the quadratic over the drift (the default action).
        #[arg(long)]
        minimize: bool,
        /// Machine-readable key = value output.
        #[arg(long)]
        porcelain: bool,
    },
    /// Run one of the closed-form criteria on a profile.
    Criteria {
        #[arg(long)]
        config: PathBuf,
        /// Which criterion to evaluate.
        #[arg(long, value_enum)]
        which: WhichCriterion,
        /// Critical radius guess for the interior criterion.
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        porcelain: bool,
    },
    /// Kolmogorov-cell geometry on the flat torus.
    Kolmogorov {
        #[arg(long, short)]
        m: u32,
        #[arg(long, short)]
        n: u32,
        #[command(subcommand)]
        action: KolmogorovSub,
    },
    /// Exact Misiolek criterion for torus stream functions.
    Torus {
        #[arg(long, short)]
        m: u32,
        #[arg(long, short)]
        n: u32,
        /// Test function file (lines of `coeff * trig(j x) * trig(k y)`).
        #[arg(long, conflicts_with = "builtin")]
        zeta: Option<PathBuf>,
        /// Built-in test function.
        #[arg(long, value_enum)]
        builtin: Option<BuiltinZeta>,
        #[arg(long)]
        porcelain: bool,
    },
    /// Build a surface metric from a config and verify its steady flow.
    Surface {
        #[arg(long)]
        config: PathBuf,
        /// Also write a CSV grid of components and curvature here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        porcelain: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichCriterion {
    Isochronal,
    Interior,
    Origin,
}

#[derive(Subcommand, Clone, Copy)]
enum KolmogorovSub {
    /// CSV of the simplified upper bound mbar(r) on r = 0.01..0.99.
    Mbar,
    /// CSV of the cell profile (r, u, phi, G, E).
    Profile,
    /// Check the elliptic flow against its defining ODE.
    VerifyFlow {
        #[arg(long)]
        porcelain: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum BuiltinZeta {
    M1,
    #[value(name = "22")]
    Z22,
    #[value(name = "32")]
    Z32,
    #[value(name = "33")]
    Z33,
    Dmsy,
}

fn load_config(path: &PathBuf) -> Result<ConfigDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Message(format!("cannot read {}: {e}", path.display())))?;
    ConfigDocument::parse(&text)
}

fn run() -> Result<Outcome, CliError> {
    let args = Cli::parse();
    match args.command {
        Command::Index {
            config,
            xi,
            support,
            alpha,
            minimize: _,
            porcelain,
        } => {
            let doc = load_config(&config)?;
            let support = support.map(|v| (v[0], v[1]));
            cli::cmd_index(&doc, &xi, support, alpha, porcelain)
        }
        Command::Criteria {
            config,
            which,
            r0,
            porcelain,
        } => {
            let doc = load_config(&config)?;
            let choice = match which {
                WhichCriterion::Isochronal => CriterionChoice::Isochronal,
                WhichCriterion::Origin => CriterionChoice::Origin,
                WhichCriterion::Interior => {
                    let r0 = r0
                        .ok_or_else(|| CliError::Message("--which interior needs --r0".into()))?;
                    CriterionChoice::Interior { r0 }
                }
            };
            cli::cmd_criteria(&doc, choice, porcelain)
        }
        Command::Kolmogorov { m, n, action } => {
            let (act, porcelain) = match action {
                KolmogorovSub::Mbar => (KolmogorovAction::Mbar, false),
                KolmogorovSub::Profile => (KolmogorovAction::Profile, false),
                KolmogorovSub::VerifyFlow { porcelain } => {
                    (KolmogorovAction::VerifyFlow, porcelain)
                }
            };
            cli::cmd_kolmogorov(m, n, act, porcelain)
        }
        Command::Torus {
            m,
            n,
            zeta,
            builtin,
            porcelain,
        } => {
            let text = match &zeta {
                Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                    CliError::Message(format!("cannot read {}: {e}", path.display()))
                })?),
                None => None,
            };
            let builtin = builtin.map(|b| match b {
                BuiltinZeta::M1 => TorusBuiltin::M1,
                BuiltinZeta::Z22 => TorusBuiltin::Z22,
                BuiltinZeta::Z32 => TorusBuiltin::Z32,
                BuiltinZeta::Z33 => TorusBuiltin::Z33,
                BuiltinZeta::Dmsy => TorusBuiltin::Dmsy,
            });
            cli::cmd_torus(m, n, text.as_deref(), builtin, porcelain)
        }
        Command::Surface {
            config,
            csv,
            porcelain,
        } => {
            let doc = load_config(&config)?;
            cli::cmd_surface(&doc, csv.as_deref(), porcelain)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
