//! Fiber description, tabulated spectra and the spectroscopic quantities
//! derived from them (ion density, modal overlap, McCumber emission).
//!
//! Cross sections are always evaluated pointwise from the interpolated
//! absorption coefficient, `σ_a(λ) = α(λ) / (Γ(λ)·N)`, so the product
//! `Γ·σ_a·N` that drives the rate equations reproduces the measured
//! absorption exactly at any wavelength. A consequence is that the
//! choice of glass density or dopant mass convention cancels out of the
//! gain coefficient: N and σ_a scale inversely. Only the spontaneous
//! decay term, which goes as `N/τ`, feels the absolute density.

use std::io::{BufRead, BufReader, Read};

use crate::constants::{db_to_natural, photon_energy, AVOGADRO, BOLTZMANN, HOLMIUM_MOLAR_MASS};
use crate::error::{Error, Result};

/// Physical unit of the values held by a [`SpectralTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumUnit {
    DbPerMeter,
    SquareMeters,
    Dimensionless,
}

/// A closed wavelength interval in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    /// The 1700-2200 nm window covering the Ho ⁵I₈ ↔ ⁵I₇ manifold.
    pub const HOLMIUM: Band = Band {
        min: 1700e-9,
        max: 2200e-9,
    };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && max >= min) {
            return Err(Error::invalid(
                "band",
                format!("[{min}, {max}] is not a valid interval"),
            ));
        }
        Ok(Band { min, max })
    }

    pub fn contains(&self, wavelength: f64) -> bool {
        wavelength >= self.min && wavelength <= self.max
    }
}

/// Piecewise-linear function of wavelength. Evaluation outside the sampled
/// range is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    unit: SpectrumUnit,
    wavelengths: Vec<f64>,
    values: Vec<f64>,
}

impl SpectralTable {
    pub fn new(unit: SpectrumUnit, wavelengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if wavelengths.len() != values.len() {
            return Err(Error::invalid(
                "spectrum",
                "wavelength and value counts differ",
            ));
        }
        if wavelengths.len() < 2 {
            return Err(Error::invalid(
                "spectrum",
                "at least two samples are required",
            ));
        }
        for (i, (&w, &v)) in wavelengths.iter().zip(&values).enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::invalid(
                    "spectrum",
                    format!("sample {i}: wavelength {w} is not positive"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::invalid(
                    "spectrum",
                    format!("sample {i}: value is not finite"),
                ));
            }
            if unit != SpectrumUnit::Dimensionless && v < 0.0 {
                return Err(Error::invalid(
                    "spectrum",
                    format!("sample {i}: negative value {v}"),
                ));
            }
            if i > 0 && w <= wavelengths[i - 1] {
                return Err(Error::invalid(
                    "spectrum",
                    format!("sample {i}: wavelengths not strictly increasing"),
                ));
            }
        }
        Ok(SpectralTable {
            unit,
            wavelengths,
            values,
        })
    }

    pub fn unit(&self) -> SpectrumUnit {
        self.unit
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    pub fn span(&self) -> Band {
        Band {
            min: self.wavelengths[0],
            max: *self.wavelengths.last().unwrap(),
        }
    }

    /// Largest tabulated value and the wavelength where it occurs.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (self.wavelengths[0], self.values[0]);
        for (&w, &v) in self.wavelengths.iter().zip(&self.values) {
            if v > best.1 {
                best = (w, v);
            }
        }
        best
    }

    pub fn evaluate(&self, wavelength: f64) -> Result<f64> {
        let span = self.span();
        if !(wavelength >= span.min && wavelength <= span.max) {
            return Err(Error::SpectralRange {
                wavelength_nm: wavelength * 1e9,
                min_nm: span.min * 1e9,
                max_nm: span.max * 1e9,
            });
        }
        let upper = self.wavelengths.partition_point(|&w| w < wavelength);
        if self.wavelengths[upper] == wavelength {
            return Ok(self.values[upper]);
        }
        let (w0, w1) = (self.wavelengths[upper - 1], self.wavelengths[upper]);
        let (v0, v1) = (self.values[upper - 1], self.values[upper]);
        let t = (wavelength - w0) / (w1 - w0);
        Ok(v0 + t * (v1 - v0))
    }

    /// Same grid, values transformed sample by sample.
    fn map_values(
        &self,
        unit: SpectrumUnit,
        mut f: impl FnMut(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let values = self
            .wavelengths
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| f(w, v))
            .collect::<Result<Vec<_>>>()?;
        SpectralTable::new(unit, self.wavelengths.clone(), values)
    }
}

/// Reads an absorption spectrum in the `wavelength_nm,alpha_dB_per_m` CSV
/// format. Lines starting with `#` and blank lines are skipped. The table
/// must cover `required` completely.
pub fn load_absorption_spectrum<R: Read>(source: R, required: Band) -> Result<SpectralTable> {
    let reader = BufReader::new(source);
    let mut header_seen = false;
    let mut wavelengths: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols != ["wavelength_nm", "alpha_dB_per_m"] {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected header `wavelength_nm,alpha_dB_per_m`, found `{trimmed}`"
                    ),
                });
            }
            header_seen = true;
            continue;
        }
        let mut fields = trimmed.split(',').map(str::trim);
        let (Some(w), Some(a), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two comma-separated fields, found `{trimmed}`"),
            });
        };
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("{what} `{s}` is not a finite number"),
                })
        };
        let w_nm = parse(w, "wavelength")?;
        let alpha = parse(a, "absorption")?;
        if w_nm <= 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("wavelength {w_nm} nm is not positive"),
            });
        }
        if alpha < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("negative absorption {alpha} dB/m"),
            });
        }
        let w_m = w_nm * 1e-9;
        if let Some(&prev) = wavelengths.last() {
            if w_m <= prev {
                let what = if w_m == prev {
                    "duplicate"
                } else {
                    "non-increasing"
                };
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{what} wavelength {w_nm} nm"),
                });
            }
        }
        wavelengths.push(w_m);
        values.push(alpha);
    }

    if !header_seen {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "missing header `wavelength_nm,alpha_dB_per_m`".into(),
        });
    }
    if wavelengths.len() < 2 {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "spectrum needs at least two samples".into(),
        });
    }
    let (lo, hi) = (wavelengths[0], *wavelengths.last().unwrap());
    // Allow for the nm -> m conversion rounding at the band edges.
    let slack = 1e-15;
    if lo > required.min + slack || hi < required.max - slack {
        return Err(Error::Parse {
            line: last_line,
            message: format!(
                "spectrum spans [{:.1}, {:.1}] nm, narrower than required [{:.1}, {:.1}] nm",
                lo * 1e9,
                hi * 1e9,
                required.min * 1e9,
                required.max * 1e9
            ),
        });
    }
    SpectralTable::new(SpectrumUnit::DbPerMeter, wavelengths, values)
}

/// Zero-line wavelength for the McCumber relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroLine {
    Explicit(f64),
    /// Estimated from the absorption spectrum, see [`estimate_zero_line`].
    Auto,
}

/// Geometric, dopant and spectroscopic description of one doped fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpec {
    /// m
    pub core_radius: f64,
    /// m
    pub clad_radius: f64,
    pub numerical_aperture: f64,
    pub index_step: f64,
    /// Elemental dopant mass fraction (0.007 for 0.7 wt%).
    pub dopant_wt_fraction: f64,
    /// kg/m³
    pub glass_density: f64,
    /// Upper-level lifetime, s.
    pub upper_lifetime: f64,
    /// dB/m, wavelength independent.
    pub background_loss: f64,
    /// K
    pub temperature: f64,
    pub zero_line: ZeroLine,
    /// Dopant molar mass, kg/mol.
    pub dopant_molar_mass: f64,
}

impl FiberSpec {
    pub const DEFAULT_GLASS_DENSITY: f64 = 2200.0;
    pub const DEFAULT_UPPER_LIFETIME: f64 = 0.8e-3;
    pub const DEFAULT_BACKGROUND_LOSS: f64 = 0.02;
    pub const DEFAULT_ZERO_LINE: f64 = 2015e-9;

    /// NRL single-clad Ho fiber: 10/92 µm, NA 0.186, 0.7 wt% Ho, with the
    /// library defaults for every quantity the fiber datasheet does not give.
    pub fn nrl() -> Self {
        FiberSpec {
            core_radius: 5e-6,
            clad_radius: 46e-6,
            numerical_aperture: 0.186,
            index_step: 1.2e-2,
            dopant_wt_fraction: 0.007,
            glass_density: Self::DEFAULT_GLASS_DENSITY,
            upper_lifetime: Self::DEFAULT_UPPER_LIFETIME,
            background_loss: Self::DEFAULT_BACKGROUND_LOSS,
            temperature: 295.0,
            zero_line: ZeroLine::Explicit(Self::DEFAULT_ZERO_LINE),
            dopant_molar_mass: HOLMIUM_MOLAR_MASS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &'static str, msg: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(field, msg))
            }
        };
        check(
            self.core_radius.is_finite() && self.core_radius > 0.0,
            "fiber.core_radius",
            format!("{} m must be positive", self.core_radius),
        )?;
        check(
            self.clad_radius.is_finite() && self.clad_radius > self.core_radius,
            "fiber.clad_radius",
            format!("{} m must exceed the core radius", self.clad_radius),
        )?;
        check(
            self.numerical_aperture > 0.0 && self.numerical_aperture < 1.0,
            "fiber.numerical_aperture",
            format!("{} must lie in (0, 1)", self.numerical_aperture),
        )?;
        check(
            self.index_step.is_finite() && self.index_step >= 0.0,
            "fiber.index_step",
            format!("{} must be non-negative", self.index_step),
        )?;
        check(
            self.dopant_wt_fraction >= 0.0 && self.dopant_wt_fraction < 0.1,
            "fiber.dopant_wt_fraction",
            format!("{} must lie in [0, 0.1)", self.dopant_wt_fraction),
        )?;
        check(
            self.glass_density.is_finite() && self.glass_density > 0.0,
            "fiber.glass_density",
            format!("{} kg/m3 must be positive", self.glass_density),
        )?;
        check(
            self.upper_lifetime.is_finite() && self.upper_lifetime > 0.0,
            "fiber.upper_lifetime",
            format!("{} s must be positive", self.upper_lifetime),
        )?;
        check(
            self.background_loss.is_finite() && self.background_loss >= 0.0,
            "fiber.background_loss",
            format!("{} dB/m must be non-negative", self.background_loss),
        )?;
        check(
            self.temperature.is_finite() && self.temperature > 0.0,
            "fiber.temperature",
            format!("{} K must be positive", self.temperature),
        )?;
        check(
            self.dopant_molar_mass.is_finite() && self.dopant_molar_mass > 0.0,
            "fiber.dopant_molar_mass",
            format!("{} kg/mol must be positive", self.dopant_molar_mass),
        )?;
        if let ZeroLine::Explicit(w) = self.zero_line {
            check(
                w.is_finite() && w > 0.0,
                "fiber.zero_line_wavelength",
                format!("{w} m must be positive"),
            )?;
        }
        Ok(())
    }

    pub fn core_area(&self) -> f64 {
        std::f64::consts::PI * self.core_radius * self.core_radius
    }
}

/// Dopant number density in ions/m³.
pub fn ion_density(spec: &FiberSpec) -> f64 {
    spec.glass_density * spec.dopant_wt_fraction * AVOGADRO / spec.dopant_molar_mass
}

pub fn v_number(spec: &FiberSpec, wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * spec.core_radius * spec.numerical_aperture / wavelength
}

/// Fraction of the fundamental-mode power inside the doped core, from the
/// Gaussian approximation with Marcuse's spot-size fit.
pub fn overlap_factor(spec: &FiberSpec, wavelength: f64) -> Result<f64> {
    let v = v_number(spec, wavelength);
    if !(v > 0.8) {
        return Err(Error::ModeApproximation { v_number: v });
    }
    let w_over_a = 0.65 + 1.619 * v.powf(-1.5) + 2.879 * v.powi(-6);
    Ok(1.0 - (-2.0 / (w_over_a * w_over_a)).exp())
}

/// Converts an absorption spectrum (dB/m) into an absorption cross-section
/// table on the same grid.
pub fn absorption_cross_section(alpha: &SpectralTable, spec: &FiberSpec) -> Result<SpectralTable> {
    if alpha.unit() != SpectrumUnit::DbPerMeter {
        return Err(Error::invalid(
            "spectrum",
            "absorption table must be in dB/m",
        ));
    }
    let density = ion_density(spec);
    if !(density > 0.0) {
        return Err(Error::Undoped);
    }
    alpha.map_values(SpectrumUnit::SquareMeters, |w, a| {
        Ok(db_to_natural(a) / (overlap_factor(spec, w)? * density))
    })
}

/// Ratio σ_e/σ_a from the McCumber relation at one wavelength.
pub fn mccumber_factor(wavelength: f64, zero_line: f64, temperature: f64) -> f64 {
    ((photon_energy(zero_line) - photon_energy(wavelength)) / (BOLTZMANN * temperature)).exp()
}

/// Estimates the zero-line wavelength from an absorption spectrum.
///
/// Takes the photon-energy midpoint between the absorption peak and the
/// point where the long-wavelength edge falls to half the peak value.
/// Fails when the table never drops to half maximum on the long side.
pub fn estimate_zero_line(alpha: &SpectralTable) -> Result<f64> {
    let (peak_w, peak_v) = alpha.peak();
    if !(peak_v > 0.0) {
        return Err(Error::Configuration(
            "zero line `auto`: absorption spectrum is identically zero".into(),
        ));
    }
    let half = 0.5 * peak_v;
    let ws = alpha.wavelengths();
    let vs = alpha.values();
    let start = ws.iter().position(|&w| w == peak_w).unwrap();
    for i in start..ws.len() - 1 {
        if vs[i] >= half && vs[i + 1] < half {
            let t = (vs[i] - half) / (vs[i] - vs[i + 1]);
            let edge = ws[i] + t * (ws[i + 1] - ws[i]);
            let energy = 0.5 * (photon_energy(peak_w) + photon_energy(edge));
            return Ok(photon_energy(1.0) / energy);
        }
    }
    Err(Error::Configuration(
        "zero line `auto`: absorption never falls to half maximum on the long-wavelength side"
            .into(),
    ))
}

/// Zero-line wavelength implied by the spec and (for `Auto`) the spectrum.
pub fn resolve_zero_line(spec: &FiberSpec, alpha: &SpectralTable) -> Result<f64> {
    match spec.zero_line {
        ZeroLine::Explicit(w) => Ok(w),
        ZeroLine::Auto => estimate_zero_line(alpha),
    }
}

/// Emission cross sections from absorption cross sections via McCumber
/// reciprocity. `alpha` is only consulted when the zero line is `Auto`.
pub fn mccumber_emission(
    sigma_a: &SpectralTable,
    alpha: &SpectralTable,
    spec: &FiberSpec,
) -> Result<SpectralTable> {
    let zero_line = resolve_zero_line(spec, alpha)?;
    sigma_a.map_values(SpectrumUnit::SquareMeters, |w, s| {
        Ok(s * mccumber_factor(w, zero_line, spec.temperature))
    })
}

/// Everything the gain model needs about one doped fiber, resolved once.
#[derive(Debug, Clone)]
pub struct GainSpectra {
    pub fiber: FiberSpec,
    pub absorption_db: SpectralTable,
    pub ion_density: f64,
    pub zero_line: f64,
}

/// Per-wavelength spectroscopic coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub wavelength: f64,
    pub overlap: f64,
    pub sigma_a: f64,
    pub sigma_e: f64,
}

impl GainSpectra {
    pub fn new(fiber: FiberSpec, absorption_db: SpectralTable) -> Result<Self> {
        fiber.validate()?;
        if absorption_db.unit() != SpectrumUnit::DbPerMeter {
            return Err(Error::invalid(
                "spectrum",
                "absorption table must be in dB/m",
            ));
        }
        let density = ion_density(&fiber);
        if !(density > 0.0) {
            return Err(Error::Undoped);
        }
        let zero_line = resolve_zero_line(&fiber, &absorption_db)?;
        Ok(GainSpectra {
            fiber,
            absorption_db,
            ion_density: density,
            zero_line,
        })
    }

    pub fn span(&self) -> Band {
        self.absorption_db.span()
    }

    pub fn point(&self, wavelength: f64) -> Result<SpectralPoint> {
        let alpha = db_to_natural(self.absorption_db.evaluate(wavelength)?);
        let overlap = overlap_factor(&self.fiber, wavelength)?;
        let sigma_a = alpha / (overlap * self.ion_density);
        let sigma_e = sigma_a * mccumber_factor(wavelength, self.zero_line, self.fiber.temperature);
        Ok(SpectralPoint {
            wavelength,
            overlap,
            sigma_a,
            sigma_e,
        })
    }

    pub fn absorption_cross_section(&self) -> Result<SpectralTable> {
        absorption_cross_section(&self.absorption_db, &self.fiber)
    }

    pub fn emission_cross_section(&self) -> Result<SpectralTable> {
        let sigma_a = self.absorption_cross_section()?;
        mccumber_emission(&sigma_a, &self.absorption_db, &self.fiber)
    }
}
