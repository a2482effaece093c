//! Numerical checks of almost-complex integrability against constant sectional
//! curvature on a single coordinate chart.
//!
//! All quantities are evaluated pointwise at sampled chart points; nothing here
//! says anything about global topology.

// tensor code indexes several arrays by the same loop variable
#![allow(clippy::needless_range_loop)]

pub mod complex;
pub mod error;
pub mod expr;
pub mod field;
pub mod fields;
pub mod geometry;
pub mod hyperdual;
pub mod jet;
pub mod obstruction;
pub mod poly;
pub mod scenario;
pub mod selftest;

pub use complex::{ACStructureField, StructureAtPoint, VectorFieldSpec, VectorValuedForm};
pub use error::{Error, Result};
pub use field::{ChartPoint, FieldArray, ScalarField};
pub use geometry::{CurvatureAtPoint, MetricField, ModelMetricSpec};
pub use hyperdual::HyperDual;
pub use jet::{jet, jet_fd, JetValue};
pub use obstruction::{Tolerances, Verdict, VerdictStatus};
pub use scenario::{catalog, emit_report, exit_code, run_scenario, RunReport, ScenarioConfig};
