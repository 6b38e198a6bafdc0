//! Experiment harness for the odd-sector NLS laboratory: threshold data
//! construction, the scattering/blow-up dichotomy pipeline, virial and
//! blow-up audits, lemma-level verification suites, configuration and
//! result emission.

pub mod config;
pub mod dichotomy;
pub mod emit;
pub mod experiments;
pub mod threshold;
pub mod virial_audit;

pub use config::{ExperimentConfig, ExperimentKind};
pub use dichotomy::{run_dichotomy, ClassificationResult, Verdict};
pub use threshold::{make_threshold_data, KSignTarget, ThresholdData, ThresholdDataSpec};
