pub mod interp;
pub mod trace;
pub mod value;

pub use interp::{
    capture_traces, coverage_of_suite, run_suite, run_suite_selected, run_test, CoverageMap,
    SuiteResult, TestOutcome, TestRun, TestStatus, DEFAULT_FUEL,
};
pub use trace::{DataEvent, ExecutionTrace};
pub use value::Value;
