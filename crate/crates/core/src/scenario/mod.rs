//! Scenario files, parameter sweeps and their CSV tables.

mod config;
mod sweep;

pub use config::{
    parse_config, CompareAxis, ConfigError, ConfigErrorKind, ConfigErrors, ScenarioConfig, SweepKind, SweepSpec,
};
pub use sweep::{
    detuning_reference, format_number, run_sweep, SweepError, SweepRow, SweepTable, COMPARE_HEADER,
    DETUNING_HEADER, VELOCITY_HEADER,
};

use crate::cp::CpError;
use crate::spectroscopy::{observables, refine_transition, SpectralResult};

/// Single evaluation at the configured ω_mn, L and v, with one shift
/// refinement step when `atom.refine_shift` is set.
pub fn evaluate_point(cfg: &ScenarioConfig) -> Result<SpectralResult, CpError> {
    let setup = cfg.setup();
    let mut tr = cfg.transition();
    if cfg.refine_shift {
        tr = refine_transition(&setup, &tr, &cfg.quadrature)?;
    }
    observables(&setup, &tr, &cfg.quadrature)
}
