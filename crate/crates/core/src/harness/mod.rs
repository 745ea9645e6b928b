//! Outer evaluation protocols, method specifications and reports.

mod eval;
mod method;
mod report;

pub use eval::{mean_and_se, outer_cv_eval, repeated_trials_eval, se_count, EvalResult, GenSpec};
pub use method::{parse_learners, parse_method_list, ConfiguredMethod, Method, MethodSpec};
pub use report::{
    emit_report, parse_report, write_report, DatasetDescriptor, Report, ReportFormat, WeightDump, REPORT_VERSION,
    TOOL_VERSION,
};
