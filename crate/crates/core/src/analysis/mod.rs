//! Discrete norms, least-squares fits, pattern classification and the two
//! experiment drivers built on the simulators.

pub mod classify;
pub mod decay;
pub mod norms;
pub mod regression;
pub mod scenario;

pub use classify::{classify_pattern, ClassifyOptions, PatternClass};
pub use decay::{decay_experiment, DecayConfig, DecayOutcome, DecayRecord};
pub use norms::{h1_error, norms, FieldErrors, FieldNorms, NormReport};
pub use regression::{linear_fit, loglog_fit, FitResult};
pub use scenario::{overexploitation_scenario, ScenarioKind, ScenarioOutcome, ScenarioSample, ScenarioSetup};
