//! Steady-state simulation of in-band co-pumped rare-earth-doped fiber
//! amplifiers, with a pair-induced quenching model and a ratio-based
//! estimate of the ion pairing fraction.
//!
//! The pipeline runs bottom-up:
//!
//! * [`spectra`] turns a measured absorption spectrum and a fiber
//!   description into cross sections, ion density and overlap factors.
//! * [`gain`] holds the closed-form steady-state rate equations for isolated
//!   ions and ion pairs and the local gain they produce.
//! * [`propagate`] integrates the coupled power equations along the fiber.
//! * [`analysis`] sweeps parameters, fits slope efficiencies, optimizes the
//!   fiber length and inverts a measured two-pump power ratio for the
//!   pairing fraction.
//!
//! Nothing in the crate is holmium specific apart from the default band and
//! molar mass; another in-band pumped dopant only needs its own spectrum
//! and [`FiberSpec`].

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod error;
pub mod gain;
pub mod propagate;
pub mod spectra;

pub use analysis::{
    fit_slope_efficiency, invert_pairing, optimize_length, simulate, sweep_pairing,
    sweep_pump_power, sweep_pump_wavelength, InversionSettings, LengthOptimum, PairingEstimate,
    Parallelism, SlopeFit, SweepRecord, SweepResult,
};
pub use error::{Error, Result};
pub use gain::{
    local_gain, steady_state_populations, transition_rates, Channel, ChannelKind, ChannelSet,
    Direction, PairingModel, PopulationState, TransitionRates,
};
pub use propagate::{
    integrate_forward, relax_bidirectional, AmplifierConfig, AseSettings, Numerics,
    PropagationResult,
};
pub use spectra::{
    absorption_cross_section, ion_density, load_absorption_spectrum, mccumber_emission,
    overlap_factor, Band, FiberSpec, GainSpectra, SpectralTable, SpectrumUnit, ZeroLine,
};
