//! Fully parametric survival models with copula-dependent censoring.
//!
//! The survival time `T` and censoring time `C` have parametric margins and are
//! joined by a one-parameter copula. Only `Y = min(T, C)` and `Δ = 1{T <= C}` are
//! observed; the crate evaluates the observable subdensities, maximizes the
//! censored-data likelihood (association parameter included), estimates sandwich
//! and bootstrap covariances, and simulates data for Monte-Carlo studies.
//!
//! The crate is `no_std` (with `alloc`). Parallel fan-out, file formats and the
//! command-line interface live in the `depcens` companion crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod copulas;
pub mod error;
pub mod estimation;
pub mod margins;
pub mod math;
pub mod model;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod simulation;

pub use copulas::{CopulaFamily, CopulaSpec, DependenceTransform, TransformKind};
pub use error::{Error, Result};
pub use estimation::{Dataset, FitOptions, FitResult, ParamLayout, ParamVector, Record};
pub use margins::{MarginFamily, MarginParams};
pub use model::{ModelSpec, SubdensityPoint};
pub use simulation::{CellSummary, Scenario, StudyCell};
