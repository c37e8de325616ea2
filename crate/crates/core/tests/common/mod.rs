#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use hdfa_core::{
    load_absorption_spectrum, AmplifierConfig, Band, FiberSpec, GainSpectra, PairingModel, ZeroLine,
};

pub const NM: f64 = 1e-9;
/// Calibrated NRL fiber parameters, mirrored from `fixtures/nrl_fiber.cfg`.
pub const NRL_LIFETIME: f64 = 2.1687e-3;
pub const NRL_BACKGROUND: f64 = 0.3328;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn nrl_fiber() -> FiberSpec {
    FiberSpec {
        upper_lifetime: NRL_LIFETIME,
        background_loss: NRL_BACKGROUND,
        zero_line: ZeroLine::Explicit(2015.0 * NM),
        ..FiberSpec::nrl()
    }
}

pub fn nrl_spectra_with(fiber: FiberSpec) -> GainSpectra {
    let file = File::open(fixture("nrl_absorption.csv")).expect("fixture present");
    let table = load_absorption_spectrum(file, Band::HOLMIUM).expect("fixture parses");
    GainSpectra::new(fiber, table).expect("valid spectra")
}

pub fn nrl_spectra() -> GainSpectra {
    nrl_spectra_with(nrl_fiber())
}

/// 2.5 m, 1 mW at 2051 nm, 1.3 W at 1860 nm, 4 % pairing.
pub fn nrl_config() -> AmplifierConfig {
    AmplifierConfig::new(nrl_spectra(), 2.5, (2051.0 * NM, 1e-3), (1860.0 * NM, 1.3))
        .with_pairing(PairingModel::new(0.04).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
