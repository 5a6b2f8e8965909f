//! Core numerics for one-fold-symmetric collapsing patch dynamics.
//!
//! The patch boundary is the graph of a nonnegative compactly supported
//! function. This crate evolves that graph in rescaled time under its
//! singular-integral velocity laws, tracks the characteristic flow, extracts
//! the long-time profile and limit support, and cross-checks everything
//! against an independent planar field oracle and the exact ellipse solution.

pub mod asymptotics;
pub mod cauchy;
pub mod error;
pub mod evolve;
pub mod fit;
pub mod graph;
pub mod norms;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod velocity;

pub use asymptotics::LimitProfile;
pub use error::{Error, Result};
pub use evolve::{FlowMap, Mode, TrajectoryRecord};
pub use graph::SampledGraph;
pub use norms::NormReport;
pub use oracle::EllipseState;
pub use scenario::Scenario;
pub use velocity::VelocityField;

/// Initializes the global thread pool from the AGGRE_THREADS variable.
///
/// Call once at process start; later calls are no-ops. Without the variable
/// rayon picks its default.
pub fn init_threads() {
    if let Ok(v) = std::env::var("AGGRE_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
}
