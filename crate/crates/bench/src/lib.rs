//! Shared setup for the criterion benchmarks under `benches/`.

use std::fs::File;
use std::path::PathBuf;

use hdfa_core::{
    load_absorption_spectrum, AmplifierConfig, Band, FiberSpec, GainSpectra, PairingModel, ZeroLine,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// NRL amplifier: 2.5 m, 1 mW at 2051 nm, 1.3 W at 1860 nm, 4 % pairing.
pub fn nrl_config() -> AmplifierConfig {
    let fiber = FiberSpec {
        upper_lifetime: 2.1687e-3,
        background_loss: 0.3328,
        zero_line: ZeroLine::Explicit(2015e-9),
        ..FiberSpec::nrl()
    };
    let table = load_absorption_spectrum(
        File::open(fixture("nrl_absorption.csv")).unwrap(),
        Band::HOLMIUM,
    )
    .unwrap();
    let spectra = GainSpectra::new(fiber, table).unwrap();
    AmplifierConfig::new(spectra, 2.5, (2051e-9, 1e-3), (1860e-9, 1.3))
        .with_pairing(PairingModel::new(0.04).unwrap())
}
