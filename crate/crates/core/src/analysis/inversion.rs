//! Non-destructive estimate of the pairing fraction from the ratio of
//! amplified signal powers under two in-band pump wavelengths.
//!
//! The pump whose absorption cross section is larger drives the ground
//! ions of excited pairs harder, so it loses more to quenching. The ratio
//! `R(k) = P_out(λ₁, k) / P_out(λ₂, k)` therefore climbs with `k`, and a
//! measured ratio pins `k` down as long as `R` stays strictly monotone.

use std::fmt;

use crate::error::{Error, Result};
use crate::gain::PairingModel;
use crate::propagate::AmplifierConfig;

use super::{evaluate_points, simulate, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionSettings {
    /// Upper end of the pairing bracket; the lower end is 0.
    pub k_max: f64,
    /// Spacing of the tabulated R(k) curve.
    pub grid_step: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance: f64,
}

impl Default for InversionSettings {
    fn default() -> Self {
        InversionSettings {
            k_max: 0.30,
            grid_step: 0.01,
            tolerance: 1e-4,
        }
    }
}

impl InversionSettings {
    pub fn grid(&self) -> Vec<f64> {
        let n = (self.k_max / self.grid_step).round() as usize;
        (0..=n).map(|i| i as f64 * self.grid_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingEstimate {
    pub k_hat: f64,
    pub measured_ratio: f64,
    /// (R(0), R(k_max))
    pub ratio_range: (f64, f64),
    /// Tabulated (k, R(k)).
    pub curve: Vec<(f64, f64)>,
    pub pump_wavelengths: (f64, f64),
    pub pump_power: f64,
    pub bisection_steps: usize,
}

impl fmt::Display for PairingEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pairing estimate: k_hat = {:.4} ({:.2} %)",
            self.k_hat,
            100.0 * self.k_hat
        )?;
        writeln!(
            f,
            "measured ratio P({:.1} nm)/P({:.1} nm) = {:.4} at {:.3} W pump",
            self.pump_wavelengths.0 * 1e9,
            self.pump_wavelengths.1 * 1e9,
            self.measured_ratio,
            self.pump_power
        )?;
        writeln!(
            f,
            "achievable ratio range [{:.4}, {:.4}] over k in [0, {:.2}]",
            self.ratio_range.0,
            self.ratio_range.1,
            self.curve.last().map_or(0.0, |c| c.0)
        )?;
        write!(f, "bisection steps: {}", self.bisection_steps)
    }
}

/// `P_out(λ₁)/P_out(λ₂)` for the config at pairing `k` and the given pump power.
pub fn pairing_ratio(
    config: &AmplifierConfig,
    pumps: (f64, f64),
    pump_power: f64,
    k: f64,
) -> Result<f64> {
    let base = config.clone().with_pairing(PairingModel::new(k)?);
    let first = simulate(&base.clone().with_pump(pumps.0, pump_power))?.signal_output();
    let second = simulate(&base.with_pump(pumps.1, pump_power))?.signal_output();
    Ok(first / second)
}

pub fn invert_pairing(
    config: &AmplifierConfig,
    pumps: (f64, f64),
    pump_power: f64,
    measured_ratio: f64,
    settings: InversionSettings,
    par: Parallelism,
) -> Result<PairingEstimate> {
    if !(measured_ratio.is_finite() && measured_ratio > 0.0) {
        return Err(Error::invalid(
            "invert.ratio",
            format!("{measured_ratio} must be positive"),
        ));
    }
    if !(settings.k_max > 0.0
        && settings.k_max <= 1.0
        && settings.grid_step > 0.0
        && settings.tolerance > 0.0)
    {
        return Err(Error::invalid(
            "invert",
            "bracket, grid step and tolerance must be positive",
        ));
    }
    if !(pump_power.is_finite() && pump_power > 0.0) {
        return Err(Error::invalid(
            "invert.pump_power",
            format!("{pump_power} W must be positive"),
        ));
    }

    let ks = settings.grid();
    let ratios = evaluate_points(&ks, par, |k| {
        pairing_ratio(config, pumps, pump_power, k).map_err(|e| e.at_point("pairing", k))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let curve: Vec<(f64, f64)> = ks.iter().copied().zip(ratios.iter().copied()).collect();

    if let Some(w) = curve.windows(2).find(|w| !(w[1].1 > w[0].1)) {
        return Err(Error::ModelDegeneracy { k: w[0].0 });
    }
    let (r_min, r_max) = (ratios[0], *ratios.last().unwrap());
    if measured_ratio < r_min || measured_ratio > r_max {
        return Err(Error::RatioOutOfRange {
            ratio: measured_ratio,
            min: r_min,
            max: r_max,
        });
    }

    // Bracket on the tabulated curve, then bisect on the full model.
    let upper = ratios.partition_point(|&r| r < measured_ratio).max(1);
    let (mut lo, mut hi) = (ks[upper - 1], ks[upper]);
    let (r_lo, r_hi) = (ratios[upper - 1], ratios[upper]);
    let mut steps = 0;
    let k_hat = if r_lo == measured_ratio {
        lo
    } else if r_hi == measured_ratio {
        hi
    } else {
        while hi - lo >= settings.tolerance {
            let mid = 0.5 * (lo + hi);
            let r = pairing_ratio(config, pumps, pump_power, mid)
                .map_err(|e| e.at_point("pairing", mid))?;
            steps += 1;
            if r < measured_ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    Ok(PairingEstimate {
        k_hat,
        measured_ratio,
        ratio_range: (r_min, r_max),
        curve,
        pump_wavelengths: pumps,
        pump_power,
        bisection_steps: steps,
    })
}
