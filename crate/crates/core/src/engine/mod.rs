//! Optimal multiple stopping by backward recursion over a generic gain law.

pub mod gain;
pub mod lognormal;
pub mod rule;
pub mod table;

pub use gain::{DiscreteGainModel, GainModel, SignRegime};
pub use lognormal::LognormalLocal;
pub use rule::{decide, run_rule, run_with_thresholds, Decision, StoppingResult, StoppingState};
pub use table::{compute_value_table, thresholds, Horizon, Thresholds, ValueTable};
