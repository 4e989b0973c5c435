//! Analysis toolkit for a delayed three-hormone model of the
//! hypothalamus–pituitary–adrenal axis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod delay;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod lyapunov;
pub mod model;
pub mod periodic;
pub mod poly;
pub mod stability;

pub use config::ModelConfig;
pub use equilibria::{classify_case, solve_equilibrium, CaseReport, Equilibrium};
pub use error::{Error, Result};
pub use model::{HistoryShape, HistorySpec, ModelParams, State};

/// Version of this library, echoed in generated reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fixed-points.md")]
    mod fixed_points {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/delay.md")]
    mod delay {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/lyapunov.md")]
    mod lyapunov {}
    #[doc = include_str!("../../../book/src/periodicity.md")]
    mod periodicity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
