//! Power, frequency and modulation assignment for wireless network design.
//!
//! * [`model`]: network instances, SIR arithmetic, the receiver-assignment
//!   evaluator and an independent plan verifier.
//! * [`ga`]: the genetic algorithm over discrete power vectors.
//! * [`oracle`]: exhaustive search for small instances.
//! * [`milp`]: LP export of the big-M formulation.
//! * [`instance_io`]: the WND1 text format and a synthetic generator.
//! * [`plan`]: coverage plan files.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ga;
pub mod instance_io;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod plan;

pub use ga::{evolve, Arrest, Evolution, GaConfig, GaError};
pub use instance_io::{generate, parse, serialize, GeneratorConfig, ParseError};
pub use model::{
    evaluate, verify, Assignment, CoverageReport, Dimensions, Instance, InstanceData, Objective,
    PowerVector, Service, Violation,
};
pub use oracle::{brute_force_optimum, Optimum, OracleError};
pub use plan::PlanFile;
