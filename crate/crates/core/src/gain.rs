//! Steady-state populations and local gain, with a pair-induced quenching
//! sub-model.
//!
//! A fraction `k` of the dopant ions sit in pairs. A pair with one excited
//! ion can still absorb, but the doubly excited state relaxes at once to
//! the singly excited one, so that quantum is lost. Pairs therefore move
//! between two states only, ground-ground and excited-ground:
//!
//! ```text
//!   gg --2·W_a--> eg        eg --(W_e + 1/τ)--> gg
//! ```
//!
//! and the ground ion of an `eg` pair is an absorber that never saturates.

use crate::constants::{db_to_natural, photon_energy};
use crate::error::{Error, Result};
use crate::spectra::{GainSpectra, SpectralPoint};

/// Fraction of all dopant ions that reside in pairs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PairingModel {
    fraction: f64,
}

impl PairingModel {
    pub const NONE: PairingModel = PairingModel { fraction: 0.0 };

    pub fn new(fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::invalid(
                "pairing",
                format!("fraction {fraction} must lie in [0, 1]"),
            ));
        }
        Ok(PairingModel { fraction })
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    /// Density of isolated ions, `(1-k)·N`.
    pub fn single_density(&self, total: f64) -> f64 {
        (1.0 - self.fraction) * total
    }

    /// Density of pairs (not paired ions), `k·N/2`.
    pub fn pair_density(&self, total: f64) -> f64 {
        0.5 * self.fraction * total
    }
}

/// Excited fractions for isolated ions and for pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PopulationState {
    /// Excited fraction of isolated ions.
    pub n2_single: f64,
    /// Fraction of pairs with exactly one excited ion.
    pub n_eg_pair: f64,
}

/// Ground and excited ion densities (m⁻³) seen by the optical fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDensities {
    pub ground: f64,
    pub excited: f64,
}

impl PopulationState {
    pub fn level_densities(&self, pairing: PairingModel, total: f64) -> LevelDensities {
        let singles = pairing.single_density(total);
        let pairs = pairing.pair_density(total);
        let excited = singles * self.n2_single + pairs * self.n_eg_pair;
        let ground = singles * (1.0 - self.n2_single)
            + pairs * (2.0 * (1.0 - self.n_eg_pair) + self.n_eg_pair);
        LevelDensities { ground, excited }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Pump,
    Signal,
    Ase,
}

/// One discrete optical field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// m
    pub wavelength: f64,
    pub direction: Direction,
    /// W
    pub power: f64,
    pub kind: ChannelKind,
    /// Optical bandwidth in Hz for ASE bins, zero otherwise.
    pub bin_width: f64,
}

impl Channel {
    pub fn pump(wavelength: f64, power: f64) -> Self {
        Channel {
            wavelength,
            direction: Direction::Forward,
            power,
            kind: ChannelKind::Pump,
            bin_width: 0.0,
        }
    }

    pub fn signal(wavelength: f64, power: f64) -> Self {
        Channel {
            kind: ChannelKind::Signal,
            ..Channel::pump(wavelength, power)
        }
    }

    pub fn ase(wavelength: f64, direction: Direction, bin_width: f64) -> Self {
        Channel {
            wavelength,
            direction,
            power: 0.0,
            kind: ChannelKind::Ase,
            bin_width,
        }
    }
}

/// The fields propagating in the fiber.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelSet {
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn new(channels: Vec<Channel>) -> Self {
        ChannelSet { channels }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Channel> {
        self.channels.iter()
    }

    pub fn signal(&self) -> Option<&Channel> {
        self.channels.iter().find(|c| c.kind == ChannelKind::Signal)
    }

    pub fn signal_index(&self) -> Option<usize> {
        self.channels
            .iter()
            .position(|c| c.kind == ChannelKind::Signal)
    }

    pub fn pump_index(&self) -> Option<usize> {
        self.channels
            .iter()
            .position(|c| c.kind == ChannelKind::Pump)
    }

    pub fn validate(&self, spectra: &GainSpectra) -> Result<()> {
        let span = spectra.span();
        let mut signals = 0;
        for ch in &self.channels {
            if !(ch.power.is_finite() && ch.power >= 0.0) {
                return Err(Error::invalid(
                    "channel.power",
                    format!("{} W must be non-negative", ch.power),
                ));
            }
            if !span.contains(ch.wavelength) {
                return Err(Error::SpectralRange {
                    wavelength_nm: ch.wavelength * 1e9,
                    min_nm: span.min * 1e9,
                    max_nm: span.max * 1e9,
                });
            }
            if !(ch.bin_width.is_finite() && ch.bin_width >= 0.0) {
                return Err(Error::invalid("channel.bin_width", "must be non-negative"));
            }
            if ch.kind == ChannelKind::Signal {
                signals += 1;
            }
        }
        if signals > 1 {
            return Err(Error::invalid(
                "channels",
                "at most one signal channel is supported",
            ));
        }
        Ok(())
    }
}

/// Stimulated absorption and emission rates per ion, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransitionRates {
    pub absorption: f64,
    pub emission: f64,
}

/// Absorption and emission rates per ion driven by every channel in `channels`.
pub fn transition_rates(channels: &ChannelSet, spectra: &GainSpectra) -> Result<TransitionRates> {
    let area = spectra.fiber.core_area();
    let mut rates = TransitionRates::default();
    for ch in channels.iter() {
        let p = spectra.point(ch.wavelength)?;
        let flux = ch.power / (photon_energy(ch.wavelength) * area);
        rates.absorption += p.overlap * p.sigma_a * flux;
        rates.emission += p.overlap * p.sigma_e * flux;
    }
    Ok(rates)
}

/// Closed-form steady state of the single-ion and pair rate equations.
pub fn steady_state_populations(rates: TransitionRates, tau: f64) -> PopulationState {
    let TransitionRates {
        absorption: wa,
        emission: we,
    } = rates;
    let decay = 1.0 / tau;
    // Division by infinity gives NaN; the full-inversion limit is 1.
    if wa.is_infinite() {
        return PopulationState {
            n2_single: 1.0,
            n_eg_pair: 1.0,
        };
    }
    PopulationState {
        n2_single: wa / (wa + we + decay),
        n_eg_pair: 2.0 * wa / (2.0 * wa + we + decay),
    }
}

/// Net gain coefficient (1/m) at `wavelength`, background loss included.
pub fn local_gain(
    pop: &PopulationState,
    pairing: PairingModel,
    spectra: &GainSpectra,
    wavelength: f64,
) -> Result<f64> {
    let p = spectra.point(wavelength)?;
    let levels = pop.level_densities(pairing, spectra.ion_density);
    Ok(gain_from_levels(&p, levels) - db_to_natural(spectra.fiber.background_loss))
}

fn gain_from_levels(p: &SpectralPoint, levels: LevelDensities) -> f64 {
    p.overlap * (p.sigma_e * levels.excited - p.sigma_a * levels.ground)
}

/// Precomputed per-channel coefficients for repeated evaluation inside the
/// propagation loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ChannelCoefficients {
    /// Γσ_a, m²
    pub absorb: f64,
    /// Γσ_e, m²
    pub emit: f64,
    /// 1/(hν·A_core), photons·s⁻¹·m⁻² per W
    pub flux_per_watt: f64,
    /// Spontaneous power emitted into this bin per excited ion per metre,
    /// divided by N₂: 2·hν·Δν·Γσ_e. Zero for non-ASE channels.
    pub spontaneous: f64,
}

/// A fiber with its pairing state, ready to evaluate populations and gain
/// for a fixed set of channel wavelengths.
#[derive(Debug, Clone)]
pub(crate) struct GainMedium {
    pub coefficients: Vec<ChannelCoefficients>,
    pub pairing: PairingModel,
    pub total_density: f64,
    pub decay_rate: f64,
    pub background: f64,
}

/// Number of guided polarization modes feeding each ASE bin.
pub const ASE_POLARIZATION_MODES: f64 = 2.0;

impl GainMedium {
    pub fn new(
        channels: &ChannelSet,
        spectra: &GainSpectra,
        pairing: PairingModel,
    ) -> Result<Self> {
        let area = spectra.fiber.core_area();
        let coefficients = channels
            .iter()
            .map(|ch| {
                let p = spectra.point(ch.wavelength)?;
                let hv = photon_energy(ch.wavelength);
                let spontaneous = if ch.kind == ChannelKind::Ase {
                    ASE_POLARIZATION_MODES * hv * ch.bin_width * p.overlap * p.sigma_e
                } else {
                    0.0
                };
                Ok(ChannelCoefficients {
                    absorb: p.overlap * p.sigma_a,
                    emit: p.overlap * p.sigma_e,
                    flux_per_watt: 1.0 / (hv * area),
                    spontaneous,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GainMedium {
            coefficients,
            pairing,
            total_density: spectra.ion_density,
            decay_rate: 1.0 / spectra.fiber.upper_lifetime,
            background: db_to_natural(spectra.fiber.background_loss),
        })
    }

    pub fn rates(&self, powers: &[f64]) -> TransitionRates {
        let mut rates = TransitionRates::default();
        for (c, &p) in self.coefficients.iter().zip(powers) {
            let flux = p * c.flux_per_watt;
            rates.absorption += c.absorb * flux;
            rates.emission += c.emit * flux;
        }
        rates
    }

    pub fn levels(&self, powers: &[f64]) -> (PopulationState, LevelDensities) {
        let pop = steady_state_populations(self.rates(powers), 1.0 / self.decay_rate);
        let levels = pop.level_densities(self.pairing, self.total_density);
        (pop, levels)
    }

    /// Net gain (1/m) of channel `i` for the given level densities.
    #[inline]
    pub fn gain(&self, i: usize, levels: LevelDensities) -> f64 {
        let c = &self.coefficients[i];
        c.emit * levels.excited - c.absorb * levels.ground - self.background
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{FiberSpec, SpectralTable, SpectrumUnit};
    use approx::assert_relative_eq;

    fn spectra(alpha_db: f64) -> GainSpectra {
        let table = SpectralTable::new(
            SpectrumUnit::DbPerMeter,
            vec![1700e-9, 1940e-9, 2200e-9],
            vec![alpha_db * 0.2, alpha_db, alpha_db * 0.1],
        )
        .unwrap();
        GainSpectra::new(FiberSpec::nrl(), table).unwrap()
    }

    #[test]
    fn pairing_bookkeeping() {
        let n = 5.6e25;
        for k in [0.0, 0.04, 0.3, 1.0] {
            let p = PairingModel::new(k).unwrap();
            assert_relative_eq!(
                p.single_density(n) + 2.0 * p.pair_density(n),
                n,
                max_relative = 1e-15
            );
        }
        assert!(PairingModel::new(-0.01).is_err());
        assert!(PairingModel::new(1.01).is_err());
        assert!(PairingModel::new(f64::NAN).is_err());
    }

    #[test]
    fn dark_rates_are_zero() {
        let s = spectra(51.0);
        let set = ChannelSet::new(vec![
            Channel::pump(1860e-9, 0.0),
            Channel::signal(2051e-9, 0.0),
        ]);
        assert_eq!(
            transition_rates(&set, &s).unwrap(),
            TransitionRates::default()
        );
    }

    #[test]
    fn rate_hand_value() {
        // Γ = 0.869, σ_a = 2.40e-25 m², P = 1.3 W at 1860 nm, a = 5 µm.
        let hv = photon_energy(1860e-9);
        let area = std::f64::consts::PI * 25e-12;
        let wa = 0.869 * 2.40e-25 * 1.3 / (hv * area);
        assert_relative_eq!(wa, 3.2324e4, max_relative = 1e-4);
    }

    #[test]
    fn rates_are_linear_in_power() {
        let s = spectra(51.0);
        let set = ChannelSet::new(vec![
            Channel::pump(1860e-9, 0.7),
            Channel::signal(2051e-9, 0.01),
        ]);
        let doubled = ChannelSet::new(
            set.iter()
                .map(|c| Channel {
                    power: 2.0 * c.power,
                    ..*c
                })
                .collect(),
        );
        let r1 = transition_rates(&set, &s).unwrap();
        let r2 = transition_rates(&doubled, &s).unwrap();
        assert_eq!(r2.absorption, 2.0 * r1.absorption);
        assert_eq!(r2.emission, 2.0 * r1.emission);
    }

    #[test]
    fn out_of_range_channel() {
        let s = spectra(51.0);
        let set = ChannelSet::new(vec![Channel::pump(1650e-9, 1.0)]);
        assert!(matches!(
            transition_rates(&set, &s),
            Err(Error::SpectralRange { .. })
        ));
    }

    #[test]
    fn population_limits() {
        let tau = 1e-3;
        let dark = steady_state_populations(TransitionRates::default(), tau);
        assert_eq!(dark, PopulationState::default());

        let full = steady_state_populations(
            TransitionRates {
                absorption: f64::INFINITY,
                emission: 0.0,
            },
            tau,
        );
        assert_eq!((full.n2_single, full.n_eg_pair), (1.0, 1.0));
        let nearly = steady_state_populations(
            TransitionRates {
                absorption: 1e15,
                emission: 0.0,
            },
            tau,
        );
        assert!(nearly.n2_single > 1.0 - 1e-9 && nearly.n_eg_pair > 1.0 - 1e-9);

        let eq = steady_state_populations(
            TransitionRates {
                absorption: 1.0 / tau,
                emission: 1.0 / tau,
            },
            tau,
        );
        assert_relative_eq!(eq.n2_single, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(eq.n_eg_pair, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn dark_fiber_gain_is_beer_lambert() {
        let mut s = spectra(51.0);
        s.fiber.background_loss = 0.0;
        for k in [0.0, 0.1, 0.5] {
            let g = local_gain(
                &PopulationState::default(),
                PairingModel::new(k).unwrap(),
                &s,
                1940e-9,
            )
            .unwrap();
            assert_relative_eq!(g, -db_to_natural(51.0), max_relative = 1e-12);
            let g = local_gain(
                &PopulationState::default(),
                PairingModel::new(k).unwrap(),
                &s,
                1987.3e-9,
            )
            .unwrap();
            let alpha = s.absorption_db.evaluate(1987.3e-9).unwrap();
            assert_relative_eq!(g, -db_to_natural(alpha), max_relative = 1e-12);
        }
    }

    #[test]
    fn unpaired_gain_is_two_level() {
        let mut s = spectra(51.0);
        s.fiber.background_loss = 0.0;
        let pop = PopulationState {
            n2_single: 0.63,
            n_eg_pair: 0.9,
        };
        let p = s.point(2051e-9).unwrap();
        let g = local_gain(&pop, PairingModel::NONE, &s, 2051e-9).unwrap();
        let textbook = p.overlap * (p.sigma_e * 0.63 - p.sigma_a * 0.37) * s.ion_density;
        assert_relative_eq!(g, textbook, max_relative = 1e-12);
    }

    #[test]
    fn fully_paired_fully_excited() {
        let n = 4.0e25;
        let pop = PopulationState {
            n2_single: 0.0,
            n_eg_pair: 1.0,
        };
        let l = pop.level_densities(PairingModel::new(1.0).unwrap(), n);
        assert_eq!(l.excited, n / 2.0);
        assert_eq!(l.ground, n / 2.0);
    }
}
