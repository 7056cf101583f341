//! Sequential binomial discrimination of bright and dark molecular states.

mod stats;
mod timetrace;

pub use stats::{
    bayes_fidelity, binomial_likelihood, classify, detection_errors, discrimination_threshold, fidelity_report,
    min_repetitions, BayesFidelity, DetectionErrors, FidelityReport, QndModel, StateLabel,
};
pub use timetrace::{
    misclassification, simulate_timetrace, simulate_timetrace_serial, DetectionRecord, SuccessSource, TimeTraceConfig,
};
