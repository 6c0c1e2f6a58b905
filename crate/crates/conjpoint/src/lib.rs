//! Conjugate-point criteria for steady 2D Euler flows in rotational cells.
//!
//! The library decides, from the radial data of a cell (area density phi,
//! angular velocity u, averaged metric coefficients E and G), whether an
//! index-form criterion certifies an eventual conjugate point along the
//! corresponding geodesic of area-preserving diffeomorphisms. It also
//! evaluates the Misiolek criterion exactly for Kolmogorov flows on the flat
//! torus, works out the Kolmogorov cell geometry in Jacobi elliptic
//! functions, and constructs curved-surface metrics admitting a prescribed
//! steady flow.

pub mod criteria;
pub mod elliptic;
pub mod expr;
pub mod index;
pub mod kolmogorov;
pub mod profiles;
pub mod quadrature;
pub mod surface;
pub mod torus;

pub mod cli;

pub use expr::{Expression, Jet4};
pub use index::{IndexQuadratic, TestFunctionXi, Verdict};
pub use profiles::{RadialFn, RadialProfile};

/// Version string stamped into CSV headers and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
