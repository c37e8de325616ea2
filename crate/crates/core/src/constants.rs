//! Physical constants (CODATA 2018 exact values where defined).

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// Molar mass of holmium, kg/mol.
pub const HOLMIUM_MOLAR_MASS: f64 = 0.164_930_328;

/// Photon energy in joules at a vacuum wavelength in metres.
#[inline]
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}

/// Optical frequency in Hz.
#[inline]
pub fn frequency(wavelength: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength
}

/// Converts a dB/m attenuation to a natural (1/m) coefficient.
#[inline]
pub fn db_to_natural(db_per_m: f64) -> f64 {
    db_per_m * std::f64::consts::LN_10 / 10.0
}

#[inline]
pub fn natural_to_db(per_m: f64) -> f64 {
    per_m * 10.0 / std::f64::consts::LN_10
}

/// Linear power transmission for a loss in dB.
#[inline]
pub fn db_loss_to_transmission(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}
