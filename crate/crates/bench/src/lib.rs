//! Experiment driver: runs a method × ε matrix on one problem and tabulates
//! iteration counts or final Hessian approximation errors.

pub mod plan;
pub mod run;
pub mod table;

pub use plan::{ExperimentPlan, Format, MethodKind, MethodSpec, PlanError, ProblemSpec, Settings};
pub use run::{build_instance, run_hessian_error_plan, run_plan, trace_csv, write_outputs, Experiment, Instance, MethodRun};
pub use table::{emit_table, Cell, ResultTable};
