//! Power evolution along the fiber.
//!
//! Every channel obeys `dP/dz = ±(g(z)·P + s·N₂(z))` where the sign follows
//! the propagation direction and `s` is non-zero only for ASE bins. Fields
//! are advanced with fixed-step classical RK4; populations are recomputed
//! from the local powers at every stage evaluation.
//!
//! Backward channels are handled by relaxation: each sweep integrates one
//! direction while the counter-propagating profiles stay frozen at their
//! last values.

use std::io::Write;

use sha2::{Digest, Sha256};

use crate::constants::{db_loss_to_transmission, frequency};
use crate::error::{Error, Result};
use crate::gain::{Channel, ChannelKind, ChannelSet, Direction, GainMedium, PairingModel};
use crate::spectra::{Band, GainSpectra};

/// ASE modelling options. Disabled by default.
#[derive(Debug, Clone, PartialEq)]
pub struct AseSettings {
    pub enabled: bool,
    pub band: Band,
    pub bin_count: usize,
}

impl Default for AseSettings {
    fn default() -> Self {
        AseSettings {
            enabled: false,
            band: Band {
                min: 1900e-9,
                max: 2150e-9,
            },
            bin_count: 250,
        }
    }
}

impl AseSettings {
    /// Bin centres and optical widths (Hz), bins equally spaced in wavelength.
    pub fn bins(&self) -> Vec<(f64, f64)> {
        if !self.enabled || self.bin_count == 0 {
            return Vec::new();
        }
        let width = (self.band.max - self.band.min) / self.bin_count as f64;
        (0..self.bin_count)
            .map(|i| {
                let lo = self.band.min + width * i as f64;
                let hi = lo + width;
                (0.5 * (lo + hi), frequency(lo) - frequency(hi))
            })
            .collect()
    }
}

/// Step control for the RK4 integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    /// Upper bound on the RK4 step, m.
    pub max_step: f64,
    /// Spacing of the recorded z profile, m.
    pub record_interval: f64,
    /// When set, every run is repeated at half the step and fails if any
    /// output moves by more than this relative amount.
    pub halving_tolerance: Option<f64>,
    pub max_relaxation_iterations: usize,
    pub relaxation_tolerance: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            max_step: 1e-3,
            record_interval: 10e-3,
            halving_tolerance: Some(1e-6),
            max_relaxation_iterations: 50,
            relaxation_tolerance: 1e-6,
        }
    }
}

/// A single-stage co-pumped amplifier.
#[derive(Debug, Clone)]
pub struct AmplifierConfig {
    pub spectra: GainSpectra,
    /// m
    pub length: f64,
    pub pairing: PairingModel,
    /// m
    pub signal_wavelength: f64,
    /// W, launched into the input port
    pub signal_power: f64,
    pub pump_wavelength: f64,
    pub pump_power: f64,
    pub ase: AseSettings,
    /// dB
    pub port_loss_in: f64,
    pub port_loss_out: f64,
    pub numerics: Numerics,
}

impl AmplifierConfig {
    pub fn new(spectra: GainSpectra, length: f64, signal: (f64, f64), pump: (f64, f64)) -> Self {
        AmplifierConfig {
            spectra,
            length,
            pairing: PairingModel::NONE,
            signal_wavelength: signal.0,
            signal_power: signal.1,
            pump_wavelength: pump.0,
            pump_power: pump.1,
            ase: AseSettings::default(),
            port_loss_in: 0.0,
            port_loss_out: 0.0,
            numerics: Numerics::default(),
        }
    }

    pub fn with_pairing(mut self, pairing: PairingModel) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_pump(mut self, wavelength: f64, power: f64) -> Self {
        self.pump_wavelength = wavelength;
        self.pump_power = power;
        self
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spectra.fiber.validate()?;
        if !(self.length.is_finite() && self.length >= 0.0) {
            return Err(Error::invalid(
                "amplifier.length",
                format!("{} m must be non-negative", self.length),
            ));
        }
        for (field, loss) in [
            ("port_loss.in", self.port_loss_in),
            ("port_loss.out", self.port_loss_out),
        ] {
            if !(loss.is_finite() && loss >= 0.0) {
                return Err(Error::invalid(
                    field,
                    format!("{loss} dB must be non-negative"),
                ));
            }
        }
        let n = &self.numerics;
        if !(n.max_step.is_finite() && n.max_step > 0.0) {
            return Err(Error::invalid("numerics.step", "must be positive"));
        }
        if !(n.record_interval.is_finite() && n.record_interval > 0.0) {
            return Err(Error::invalid(
                "numerics.record_interval",
                "must be positive",
            ));
        }
        if self.ase.enabled {
            let span = self.spectra.span();
            if self.ase.band.min < span.min || self.ase.band.max > span.max {
                return Err(Error::invalid(
                    "ase.band",
                    "must lie inside the tabulated spectrum",
                ));
            }
        }
        self.input_channels().validate(&self.spectra)
    }

    /// Channels at the fiber input, port loss applied. Signal first, then the
    /// pump, then forward ASE bins, then backward ASE bins.
    pub fn input_channels(&self) -> ChannelSet {
        let t_in = db_loss_to_transmission(self.port_loss_in);
        let mut channels = vec![
            Channel::signal(self.signal_wavelength, self.signal_power * t_in),
            Channel::pump(self.pump_wavelength, self.pump_power * t_in),
        ];
        let bins = self.ase.bins();
        for dir in [Direction::Forward, Direction::Backward] {
            channels.extend(bins.iter().map(|&(w, dv)| Channel::ase(w, dir, dv)));
        }
        ChannelSet::new(channels)
    }

    /// SHA-256 over a canonical rendering of every field.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{self:?}").as_bytes());
        hex::encode(h.finalize())
    }
}

/// Convergence metadata attached to every result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub steps: usize,
    pub step: f64,
    pub iterations: usize,
    /// Largest relative change of an output between the last two
    /// relaxation iterations (zero for single-sweep runs).
    pub residual: f64,
    /// Largest relative output change when the step was halved, if checked.
    pub halving_change: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    /// Powers leaving the amplifier: forward channels at z = L after the
    /// output port, backward channels at z = 0 after the input port.
    pub outputs: ChannelSet,
    pub inputs: ChannelSet,
    /// Recorded positions, m.
    pub z_grid: Vec<f64>,
    /// `profiles[channel][node]`, W, inside the fiber.
    pub profiles: Vec<Vec<f64>>,
    pub n2_single: Vec<f64>,
    pub n_eg_pair: Vec<f64>,
    pub convergence: Convergence,
}

impl PropagationResult {
    pub fn signal_output(&self) -> f64 {
        self.outputs.signal().map_or(0.0, |c| c.power)
    }

    pub fn pump_output(&self) -> f64 {
        self.outputs
            .pump_index()
            .map_or(0.0, |i| self.outputs.channels[i].power)
    }

    /// Total ASE leaving in the given direction, W.
    pub fn ase_output(&self, direction: Direction) -> f64 {
        self.outputs
            .iter()
            .filter(|c| c.kind == ChannelKind::Ase && c.direction == direction)
            .map(|c| c.power)
            .sum()
    }

    /// Writes the recorded profiles as `z_m,channel_id,power_W` rows.
    pub fn write_profile_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "z_m,channel_id,power_W")?;
        for (node, z) in self.z_grid.iter().enumerate() {
            for (id, profile) in self.profiles.iter().enumerate() {
                writeln!(out, "{z},{id},{}", profile[node])?;
            }
        }
        Ok(())
    }
}

/// Integrates all forward channels from z = 0 to L.
///
/// Backward ASE is not modelled here; use [`relax_bidirectional`] for that.
pub fn integrate_forward(config: &AmplifierConfig) -> Result<PropagationResult> {
    config.validate()?;
    let mut inputs = config.input_channels();
    inputs
        .channels
        .retain(|c| c.direction == Direction::Forward);
    run_checked(config, &inputs)
}

/// Solves the two-point problem with forward and backward ASE by
/// alternating sweeps until outputs settle.
pub fn relax_bidirectional(config: &AmplifierConfig) -> Result<PropagationResult> {
    config.validate()?;
    let inputs = config.input_channels();
    run_checked(config, &inputs)
}

fn run_checked(config: &AmplifierConfig, inputs: &ChannelSet) -> Result<PropagationResult> {
    let steps = step_count(config.length, config.numerics.max_step);
    let mut result = solve(config, inputs, steps)?;
    if let Some(tol) = config.numerics.halving_tolerance {
        if steps > 0 {
            let fine = solve(config, inputs, 2 * steps)?;
            let change = max_relative_change(&result.outputs, &fine.outputs);
            result.convergence.halving_change = Some(change);
            if change > tol {
                return Err(Error::Accuracy {
                    relative_change: change,
                    tolerance: tol,
                });
            }
        } else {
            result.convergence.halving_change = Some(0.0);
        }
    }
    Ok(result)
}

fn step_count(length: f64, max_step: f64) -> usize {
    if length == 0.0 {
        0
    } else {
        (length / max_step).ceil() as usize
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn max_relative_change(a: &ChannelSet, b: &ChannelSet) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| relative_change(x.power, y.power))
        .fold(0.0, f64::max)
}

/// Full-resolution solve with `steps` RK4 steps.
fn solve(config: &AmplifierConfig, inputs: &ChannelSet, steps: usize) -> Result<PropagationResult> {
    let medium = GainMedium::new(inputs, &config.spectra, config.pairing)?;
    let nodes = steps + 1;
    let h = if steps == 0 {
        0.0
    } else {
        config.length / steps as f64
    };

    let forward: Vec<usize> = (0..inputs.len())
        .filter(|&i| inputs.channels[i].direction == Direction::Forward)
        .collect();
    let backward: Vec<usize> = (0..inputs.len())
        .filter(|&i| inputs.channels[i].direction == Direction::Backward)
        .collect();

    let mut profiles = vec![vec![0.0; nodes]; inputs.len()];
    let mut sweep = Sweep {
        medium: &medium,
        steps,
        h,
        powers: vec![0.0; inputs.len()],
    };

    let mut iterations = 0;
    let mut residual = 0.0;
    if backward.is_empty() {
        sweep.run(&forward, false, inputs, &mut profiles)?;
        iterations = 1;
    } else {
        let mut previous: Option<Vec<f64>> = None;
        loop {
            iterations += 1;
            sweep.run(&forward, false, inputs, &mut profiles)?;
            sweep.run(&backward, true, inputs, &mut profiles)?;
            let ends: Vec<f64> = (0..inputs.len())
                .map(|i| match inputs.channels[i].direction {
                    Direction::Forward => profiles[i][steps],
                    Direction::Backward => profiles[i][0],
                })
                .collect();
            if let Some(prev) = &previous {
                residual = prev
                    .iter()
                    .zip(&ends)
                    .map(|(&a, &b)| relative_change(a, b))
                    .fold(0.0, f64::max);
                if residual < config.numerics.relaxation_tolerance {
                    break;
                }
            }
            if iterations >= config.numerics.max_relaxation_iterations {
                return Err(Error::NotConverged {
                    iterations,
                    residual,
                });
            }
            previous = Some(ends);
        }
    }

    let t_in = db_loss_to_transmission(config.port_loss_in);
    let t_out = db_loss_to_transmission(config.port_loss_out);
    let outputs = ChannelSet::new(
        inputs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let power = match c.direction {
                    Direction::Forward => profiles[i][steps] * t_out,
                    Direction::Backward => profiles[i][0] * t_in,
                };
                Channel { power, ..*c }
            })
            .collect(),
    );

    let stride = if steps == 0 {
        1
    } else {
        ((config.numerics.record_interval / h).round() as usize).max(1)
    };
    let mut recorded: Vec<usize> = (0..nodes).step_by(stride).collect();
    if *recorded.last().unwrap() != steps {
        recorded.push(steps);
    }
    let mut n2_single = Vec::with_capacity(recorded.len());
    let mut n_eg_pair = Vec::with_capacity(recorded.len());
    let mut node_powers = vec![0.0; inputs.len()];
    for &j in &recorded {
        for (p, prof) in node_powers.iter_mut().zip(&profiles) {
            *p = prof[j];
        }
        let (pop, _) = medium.levels(&node_powers);
        n2_single.push(pop.n2_single);
        n_eg_pair.push(pop.n_eg_pair);
    }
    let z_grid = recorded.iter().map(|&j| j as f64 * h).collect();
    let profiles = profiles
        .into_iter()
        .map(|p| recorded.iter().map(|&j| p[j]).collect())
        .collect();

    Ok(PropagationResult {
        outputs,
        inputs: inputs.clone(),
        z_grid,
        profiles,
        n2_single,
        n_eg_pair,
        convergence: Convergence {
            steps,
            step: h,
            iterations,
            residual,
            halving_change: None,
        },
    })
}

struct Sweep<'a> {
    medium: &'a GainMedium,
    steps: usize,
    h: f64,
    powers: Vec<f64>,
}

impl Sweep<'_> {
    /// Integrates the `active` channels over the whole fiber, reading every
    /// other channel from `profiles`. `reverse` runs from z = L to 0.
    fn run(
        &mut self,
        active: &[usize],
        reverse: bool,
        inputs: &ChannelSet,
        profiles: &mut [Vec<f64>],
    ) -> Result<()> {
        let n = self.steps;
        let start = if reverse { n } else { 0 };
        let mut y: Vec<f64> = active.iter().map(|&i| inputs.channels[i].power).collect();
        for (&i, &v) in active.iter().zip(&y) {
            profiles[i][start] = v;
        }
        let m = active.len();
        let (mut k1, mut k2, mut k3, mut k4) =
            (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut tmp = vec![0.0; m];
        let h = self.h;

        for s in 0..n {
            let (j0, j1) = if reverse {
                (n - s, n - s - 1)
            } else {
                (s, s + 1)
            };

            self.derivative(active, &y, profiles, j0, j1, Stage::Start, &mut k1);
            for q in 0..m {
                tmp[q] = y[q] + 0.5 * h * k1[q];
            }
            self.derivative(active, &tmp, profiles, j0, j1, Stage::Mid, &mut k2);
            for q in 0..m {
                tmp[q] = y[q] + 0.5 * h * k2[q];
            }
            self.derivative(active, &tmp, profiles, j0, j1, Stage::Mid, &mut k3);
            for q in 0..m {
                tmp[q] = y[q] + h * k3[q];
            }
            self.derivative(active, &tmp, profiles, j0, j1, Stage::End, &mut k4);
            for q in 0..m {
                y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
                if !y[q].is_finite() {
                    return Err(Error::Divergence {
                        z: j1 as f64 * h,
                        channel: active[q],
                    });
                }
                profiles[active[q]][j1] = y[q];
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn derivative(
        &mut self,
        active: &[usize],
        y: &[f64],
        profiles: &[Vec<f64>],
        j0: usize,
        j1: usize,
        stage: Stage,
        out: &mut [f64],
    ) {
        for (c, prof) in profiles.iter().enumerate() {
            self.powers[c] = match stage {
                Stage::Start => prof[j0],
                Stage::End => prof[j1],
                Stage::Mid => midpoint(prof[j0], prof[j1]),
            };
        }
        for (&i, &v) in active.iter().zip(y) {
            self.powers[i] = v;
        }
        let (_, levels) = self.medium.levels(&self.powers);
        for (q, &i) in active.iter().enumerate() {
            let c = &self.medium.coefficients[i];
            out[q] = self.medium.gain(i, levels) * y[q] + c.spontaneous * levels.excited;
        }
    }
}

#[derive(Clone, Copy)]
enum Stage {
    Start,
    Mid,
    End,
}

/// Frozen-profile value halfway between two nodes; geometric for the
/// locally exponential profiles, arithmetic when either end is zero.
#[inline]
fn midpoint(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        (a * b).sqrt()
    } else {
        0.5 * (a + b)
    }
}
