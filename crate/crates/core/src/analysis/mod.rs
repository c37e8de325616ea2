//! Parameter sweeps and the metrics derived from them.

mod inversion;
mod length;
mod slope;
mod sweep;

pub use inversion::{invert_pairing, pairing_ratio, InversionSettings, PairingEstimate};
pub use length::{optimize_length, LengthOptimum};
pub use slope::{fit_line, fit_slope_efficiency, LineFit, SlopeFit, SLOPE_WINDOW_FRACTION};
pub use sweep::{
    evaluate_points, sweep_pairing, sweep_pump_power, sweep_pump_wavelength, Parallelism,
    SweepRecord, SweepResult,
};

use crate::error::Result;
use crate::propagate::{
    integrate_forward, relax_bidirectional, AmplifierConfig, PropagationResult,
};

/// Runs the solver appropriate for the config: the bidirectional relaxation
/// when ASE is on, a single forward sweep otherwise.
pub fn simulate(config: &AmplifierConfig) -> Result<PropagationResult> {
    if config.ase.enabled {
        relax_bidirectional(config)
    } else {
        integrate_forward(config)
    }
}
