//! Independent reference computations, error metrics and experiment presets.

mod dense;
mod metrics;
mod presets;

pub use dense::{assemble_dense_a, dense_expm, dense_phi, dense_phi_family, ORACLE_MAX_DIM, ORACLE_MAX_N};
pub use metrics::{discrete_l2_error, observed_order, relative_max_error};
pub use presets::{load_preset, ExperimentPreset, SchemeChoice, PRESET_IDS};
