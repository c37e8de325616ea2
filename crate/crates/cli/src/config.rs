//! Run configuration: flat `key = value` text with unit-suffixed values.
//!
//! ```text
//! # comment
//! fiber.file = nrl_fiber.cfg
//! spectrum.file = nrl_absorption.csv
//! amplifier.length = 2.5 m
//! pump.power = 1.3 W
//! ```
//!
//! Keys are checked against a fixed schema; unknown or repeated keys are
//! rejected. File references are resolved relative to the referencing file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hdfa_core::{
    load_absorption_spectrum, AmplifierConfig, AseSettings, Band, FiberSpec, GainSpectra, Numerics,
    PairingModel, SpectralTable, ZeroLine,
};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::units::{parse_quantity, Quantity};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Syntax {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{file}: unknown key `{key}` (strict schema)")]
    UnknownKey { file: PathBuf, key: String },
    #[error("{file}: missing required key `{key}`")]
    MissingKey { file: PathBuf, key: String },
    #[error("{file}: `{key}`: {message}")]
    Value {
        file: PathBuf,
        key: String,
        message: String,
    },
    #[error("{file}: {source}")]
    Model {
        file: PathBuf,
        #[source]
        source: hdfa_core::Error,
    },
}

type Result<T> = std::result::Result<T, ConfigError>;

const FIBER_KEYS: &[&str] = &[
    "fiber.core_radius",
    "fiber.clad_radius",
    "fiber.numerical_aperture",
    "fiber.index_step",
    "fiber.dopant_wt_fraction",
    "fiber.glass_density",
    "fiber.upper_lifetime",
    "fiber.background_loss",
    "fiber.temperature",
    "fiber.zero_line_wavelength",
    "fiber.dopant_molar_mass",
];

const RUN_KEYS: &[&str] = &[
    "fiber.file",
    "spectrum.file",
    "spectrum.band_min",
    "spectrum.band_max",
    "amplifier.length",
    "amplifier.pairing",
    "signal.wavelength",
    "signal.power",
    "pump.wavelength",
    "pump.power",
    "port.loss_in",
    "port.loss_out",
    "ase.enabled",
    "ase.band_min",
    "ase.band_max",
    "ase.bins",
    "numerics.step",
    "numerics.record_interval",
    "numerics.halving_tolerance",
    "sweep.pump_power.start",
    "sweep.pump_power.stop",
    "sweep.pump_power.step",
    "sweep.pump_wavelength.start",
    "sweep.pump_wavelength.stop",
    "sweep.pump_wavelength.step",
    "sweep.pump_wavelength.pairings",
    "sweep.pairing.start",
    "sweep.pairing.stop",
    "sweep.pairing.step",
    "sweep.pairing.second_pump",
    "invert.pump_1",
    "invert.pump_2",
    "invert.pump_power",
    "invert.ratio",
    "optimize.length_min",
    "optimize.length_max",
    "output.dir",
];

/// Parsed `key = value` pairs of one file, with line numbers.
struct KeyValues {
    file: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    fn parse(file: &Path, text: &str, schema: &[&str]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    file: file.to_path_buf(),
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim().to_string();
            if !schema.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey {
                    file: file.to_path_buf(),
                    key,
                });
            }
            if let Some((first, _)) = entries.get(&key) {
                return Err(ConfigError::Syntax {
                    file: file.to_path_buf(),
                    line,
                    message: format!("`{key}` already set on line {first}"),
                });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(KeyValues {
            file: file.to_path_buf(),
            entries,
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn required_raw(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| ConfigError::MissingKey {
            file: self.file.clone(),
            key: key.to_string(),
        })
    }

    fn value_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            file: self.file.clone(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn quantity(&self, key: &str, q: Quantity) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| parse_quantity(v, q).map_err(|e| self.value_error(key, e.to_string())))
            .transpose()
    }

    fn required(&self, key: &str, q: Quantity) -> Result<f64> {
        let v = self.required_raw(key)?;
        parse_quantity(v, q).map_err(|e| self.value_error(key, e.to_string()))
    }

    fn list(&self, key: &str, q: Quantity) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        parse_quantity(item, q).map_err(|e| self.value_error(key, e.to_string()))
                    })
                    .collect()
            })
            .transpose()
    }

    fn check(&self, key: &str, value: f64, ok: bool, expectation: &str) -> Result<f64> {
        if ok {
            Ok(value)
        } else {
            Err(self.value_error(key, format!("{value} out of range: {expectation}")))
        }
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.raw(key).map(|v| {
            let p = Path::new(v);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                self.file.parent().unwrap_or(Path::new(".")).join(p)
            }
        }))
    }
}

/// Inclusive arithmetic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        // Round away accumulated binary error so `0.1 W` steps land on 1.3 W.
        (0..=n)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                format!("{v:.11e}").parse().unwrap_or(v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthSweep {
    pub grid: Grid,
    pub pairings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingSweep {
    pub grid: Grid,
    pub second_pump: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub pumps: (f64, f64),
    pub pump_power: f64,
    pub ratio: f64,
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    pub fiber_path: PathBuf,
    pub spectrum_path: PathBuf,
    pub spectrum: SpectralTable,
    pub amplifier: AmplifierConfig,
    pub sweep_pump_power: Option<Grid>,
    pub sweep_pump_wavelength: Option<WavelengthSweep>,
    pub sweep_pairing: Option<PairingSweep>,
    pub invert: Option<Inversion>,
    pub optimize: Option<(f64, f64)>,
    pub output_dir: PathBuf,
    /// SHA-256 over the bytes of every input file.
    pub digest: String,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn text(path: &Path, bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec()).map_err(|_| ConfigError::Syntax {
        file: path.to_path_buf(),
        line: 0,
        message: "file is not UTF-8".into(),
    })
}

/// Reads a fiber description file.
pub fn parse_fiber(path: &Path) -> Result<FiberSpec> {
    let bytes = read(path)?;
    parse_fiber_text(path, &text(path, &bytes)?)
}

fn parse_fiber_text(path: &Path, source: &str) -> Result<FiberSpec> {
    let kv = KeyValues::parse(path, source, FIBER_KEYS)?;
    let mut spec = FiberSpec::nrl();
    let pos = |k: &str, v: f64| kv.check(k, v, v > 0.0, "must be positive");

    spec.core_radius = pos(
        "fiber.core_radius",
        kv.required("fiber.core_radius", Quantity::Length)?,
    )?;
    let clad = kv.required("fiber.clad_radius", Quantity::Length)?;
    spec.clad_radius = kv.check(
        "fiber.clad_radius",
        clad,
        clad > spec.core_radius,
        "must exceed fiber.core_radius",
    )?;
    let na = kv.required("fiber.numerical_aperture", Quantity::Ratio)?;
    spec.numerical_aperture = kv.check(
        "fiber.numerical_aperture",
        na,
        na > 0.0 && na < 1.0,
        "must lie in (0, 1)",
    )?;
    let wt = kv.required("fiber.dopant_wt_fraction", Quantity::Fraction)?;
    spec.dopant_wt_fraction = kv.check(
        "fiber.dopant_wt_fraction",
        wt,
        (0.0..0.1).contains(&wt),
        "must lie in [0, 10 %)",
    )?;
    if let Some(v) = kv.quantity("fiber.index_step", Quantity::Ratio)? {
        spec.index_step = kv.check("fiber.index_step", v, v >= 0.0, "must be non-negative")?;
    }
    if let Some(v) = kv.quantity("fiber.glass_density", Quantity::MassDensity)? {
        spec.glass_density = pos("fiber.glass_density", v)?;
    }
    if let Some(v) = kv.quantity("fiber.upper_lifetime", Quantity::Time)? {
        spec.upper_lifetime = pos("fiber.upper_lifetime", v)?;
    }
    if let Some(v) = kv.quantity("fiber.background_loss", Quantity::AttenuationPerLength)? {
        spec.background_loss =
            kv.check("fiber.background_loss", v, v >= 0.0, "must be non-negative")?;
    }
    if let Some(v) = kv.quantity("fiber.temperature", Quantity::Temperature)? {
        spec.temperature = pos("fiber.temperature", v)?;
    }
    if let Some(raw) = kv.raw("fiber.zero_line_wavelength") {
        spec.zero_line = if raw.eq_ignore_ascii_case("auto") {
            ZeroLine::Auto
        } else {
            let v = parse_quantity(raw, Quantity::Length)
                .map_err(|e| kv.value_error("fiber.zero_line_wavelength", e.to_string()))?;
            ZeroLine::Explicit(pos("fiber.zero_line_wavelength", v)?)
        };
    }
    if let Some(raw) = kv.raw("fiber.dopant_molar_mass") {
        let v = raw
            .strip_suffix("kg/mol")
            .and_then(|n| n.trim().parse::<f64>().ok())
            .or_else(|| {
                raw.strip_suffix("g/mol")
                    .and_then(|n| n.trim().parse::<f64>().ok())
                    .map(|g| g * 1e-3)
            })
            .ok_or_else(|| {
                kv.value_error(
                    "fiber.dopant_molar_mass",
                    "expected a value in g/mol or kg/mol",
                )
            })?;
        spec.dopant_molar_mass = pos("fiber.dopant_molar_mass", v)?;
    }
    spec.validate().map_err(|source| ConfigError::Model {
        file: path.to_path_buf(),
        source,
    })?;
    Ok(spec)
}

fn parse_flag(kv: &KeyValues, key: &str) -> Result<Option<bool>> {
    kv.raw(key)
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            _ => Err(kv.value_error(key, format!("`{v}` is not on/off"))),
        })
        .transpose()
}

fn parse_grid(kv: &KeyValues, prefix: &str, q: Quantity) -> Result<Option<Grid>> {
    let keys = [
        format!("{prefix}.start"),
        format!("{prefix}.stop"),
        format!("{prefix}.step"),
    ];
    if keys.iter().all(|k| kv.raw(k).is_none()) {
        return Ok(None);
    }
    let start = kv.required(&keys[0], q)?;
    let stop = kv.required(&keys[1], q)?;
    let step = kv.required(&keys[2], q)?;
    kv.check(&keys[2], step, step > 0.0, "must be positive")?;
    kv.check(&keys[1], stop, stop >= start, "must not be below the start")?;
    Ok(Some(Grid { start, stop, step }))
}

/// Reads and validates a run configuration, along with the fiber and
/// spectrum files it references.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let config_bytes = read(path)?;
    let kv = KeyValues::parse(path, &text(path, &config_bytes)?, RUN_KEYS)?;

    let fiber_path = kv
        .path("fiber.file")?
        .ok_or_else(|| ConfigError::MissingKey {
            file: path.to_path_buf(),
            key: "fiber.file".into(),
        })?;
    let fiber_bytes = read(&fiber_path)?;
    let fiber = parse_fiber_text(&fiber_path, &text(&fiber_path, &fiber_bytes)?)?;

    let spectrum_path = kv
        .path("spectrum.file")?
        .ok_or_else(|| ConfigError::MissingKey {
            file: path.to_path_buf(),
            key: "spectrum.file".into(),
        })?;
    let spectrum_bytes = read(&spectrum_path)?;
    let band = Band {
        min: kv
            .quantity("spectrum.band_min", Quantity::Length)?
            .unwrap_or(Band::HOLMIUM.min),
        max: kv
            .quantity("spectrum.band_max", Quantity::Length)?
            .unwrap_or(Band::HOLMIUM.max),
    };
    let spectrum = load_absorption_spectrum(spectrum_bytes.as_slice(), band).map_err(|source| {
        ConfigError::Model {
            file: spectrum_path.clone(),
            source,
        }
    })?;
    let model_err = |source| ConfigError::Model {
        file: path.to_path_buf(),
        source,
    };
    let spectra = GainSpectra::new(fiber, spectrum.clone()).map_err(model_err)?;
    let span = spectra.span();
    let in_span = |key: &str, w: f64| {
        kv.check(
            key,
            w,
            span.contains(w),
            &format!(
                "must lie inside the spectrum [{:.1}, {:.1}] nm",
                span.min * 1e9,
                span.max * 1e9
            ),
        )
    };

    let length = kv.required("amplifier.length", Quantity::Length)?;
    kv.check(
        "amplifier.length",
        length,
        length >= 0.0,
        "must be non-negative",
    )?;
    let k = kv
        .quantity("amplifier.pairing", Quantity::Fraction)?
        .unwrap_or(0.0);
    kv.check(
        "amplifier.pairing",
        k,
        (0.0..=1.0).contains(&k),
        "must lie in [0, 1]",
    )?;
    let signal_wavelength = in_span(
        "signal.wavelength",
        kv.required("signal.wavelength", Quantity::Length)?,
    )?;
    let signal_power = kv.required("signal.power", Quantity::Power)?;
    kv.check(
        "signal.power",
        signal_power,
        signal_power >= 0.0,
        "must be non-negative",
    )?;
    let pump_wavelength = in_span(
        "pump.wavelength",
        kv.required("pump.wavelength", Quantity::Length)?,
    )?;
    let pump_power = kv.required("pump.power", Quantity::Power)?;
    kv.check(
        "pump.power",
        pump_power,
        pump_power >= 0.0,
        "must be non-negative",
    )?;

    let mut amplifier = AmplifierConfig::new(
        spectra,
        length,
        (signal_wavelength, signal_power),
        (pump_wavelength, pump_power),
    )
    .with_pairing(PairingModel::new(k).map_err(model_err)?);

    for (key, slot) in [
        ("port.loss_in", &mut amplifier.port_loss_in),
        ("port.loss_out", &mut amplifier.port_loss_out),
    ] {
        if let Some(v) = kv.quantity(key, Quantity::Attenuation)? {
            *slot = kv.check(key, v, v >= 0.0, "must be non-negative")?;
        }
    }

    let mut ase = AseSettings::default();
    if let Some(on) = parse_flag(&kv, "ase.enabled")? {
        ase.enabled = on;
    }
    if let Some(v) = kv.quantity("ase.band_min", Quantity::Length)? {
        ase.band.min = in_span("ase.band_min", v)?;
    }
    if let Some(v) = kv.quantity("ase.band_max", Quantity::Length)? {
        ase.band.max = in_span("ase.band_max", v)?;
    }
    kv.check(
        "ase.band_max",
        ase.band.max,
        ase.band.max >= ase.band.min,
        "must not be below ase.band_min",
    )?;
    if let Some(raw) = kv.raw("ase.bins") {
        ase.bin_count = raw.parse().map_err(|_| {
            kv.value_error("ase.bins", format!("`{raw}` is not a non-negative integer"))
        })?;
    }
    amplifier.ase = ase;

    let mut numerics = Numerics::default();
    if let Some(v) = kv.quantity("numerics.step", Quantity::Length)? {
        numerics.max_step = kv.check("numerics.step", v, v > 0.0, "must be positive")?;
    }
    if let Some(v) = kv.quantity("numerics.record_interval", Quantity::Length)? {
        numerics.record_interval =
            kv.check("numerics.record_interval", v, v > 0.0, "must be positive")?;
    }
    if let Some(raw) = kv.raw("numerics.halving_tolerance") {
        numerics.halving_tolerance = if raw.eq_ignore_ascii_case("off") {
            None
        } else {
            let v = parse_quantity(raw, Quantity::Ratio)
                .map_err(|e| kv.value_error("numerics.halving_tolerance", e.to_string()))?;
            Some(kv.check("numerics.halving_tolerance", v, v > 0.0, "must be positive")?)
        };
    }
    amplifier.numerics = numerics;

    let sweep_pump_power = parse_grid(&kv, "sweep.pump_power", Quantity::Power)?;
    if let Some(g) = sweep_pump_power {
        kv.check(
            "sweep.pump_power.start",
            g.start,
            g.start >= 0.0,
            "must be non-negative",
        )?;
    }
    let sweep_pump_wavelength = match parse_grid(&kv, "sweep.pump_wavelength", Quantity::Length)? {
        Some(grid) => {
            in_span("sweep.pump_wavelength.start", grid.start)?;
            in_span("sweep.pump_wavelength.stop", grid.stop)?;
            let pairings = kv
                .list("sweep.pump_wavelength.pairings", Quantity::Fraction)?
                .unwrap_or_else(|| vec![k]);
            for &p in &pairings {
                kv.check(
                    "sweep.pump_wavelength.pairings",
                    p,
                    (0.0..=1.0).contains(&p),
                    "must lie in [0, 1]",
                )?;
            }
            Some(WavelengthSweep { grid, pairings })
        }
        None => None,
    };
    let sweep_pairing = match parse_grid(&kv, "sweep.pairing", Quantity::Fraction)? {
        Some(grid) => {
            kv.check(
                "sweep.pairing.start",
                grid.start,
                grid.start >= 0.0,
                "must lie in [0, 1]",
            )?;
            kv.check(
                "sweep.pairing.stop",
                grid.stop,
                grid.stop <= 1.0,
                "must lie in [0, 1]",
            )?;
            let second_pump = kv
                .quantity("sweep.pairing.second_pump", Quantity::Length)?
                .map(|w| in_span("sweep.pairing.second_pump", w))
                .transpose()?;
            Some(PairingSweep { grid, second_pump })
        }
        None => None,
    };
    let invert = if [
        "invert.pump_1",
        "invert.pump_2",
        "invert.ratio",
        "invert.pump_power",
    ]
    .iter()
    .any(|k| kv.raw(k).is_some())
    {
        let p1 = in_span(
            "invert.pump_1",
            kv.required("invert.pump_1", Quantity::Length)?,
        )?;
        let p2 = in_span(
            "invert.pump_2",
            kv.required("invert.pump_2", Quantity::Length)?,
        )?;
        let ratio = kv.required("invert.ratio", Quantity::Ratio)?;
        kv.check("invert.ratio", ratio, ratio > 0.0, "must be positive")?;
        let power = kv
            .quantity("invert.pump_power", Quantity::Power)?
            .unwrap_or(pump_power);
        kv.check("invert.pump_power", power, power > 0.0, "must be positive")?;
        Some(Inversion {
            pumps: (p1, p2),
            pump_power: power,
            ratio,
        })
    } else {
        None
    };
    let optimize = match (
        kv.quantity("optimize.length_min", Quantity::Length)?,
        kv.quantity("optimize.length_max", Quantity::Length)?,
    ) {
        (None, None) => None,
        (Some(lo), Some(hi)) => {
            kv.check("optimize.length_min", lo, lo > 0.0, "must be positive")?;
            kv.check(
                "optimize.length_max",
                hi,
                hi > lo,
                "must exceed optimize.length_min",
            )?;
            Some((lo, hi))
        }
        (None, Some(_)) => {
            return Err(ConfigError::MissingKey {
                file: path.to_path_buf(),
                key: "optimize.length_min".into(),
            })
        }
        (Some(_), None) => {
            return Err(ConfigError::MissingKey {
                file: path.to_path_buf(),
                key: "optimize.length_max".into(),
            })
        }
    };
    let output_dir = kv
        .path("output.dir")?
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut hasher = Sha256::new();
    for bytes in [&config_bytes, &fiber_bytes, &spectrum_bytes] {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }

    Ok(RunConfig {
        path: path.to_path_buf(),
        fiber_path,
        spectrum_path,
        spectrum,
        amplifier,
        sweep_pump_power,
        sweep_pump_wavelength,
        sweep_pairing,
        invert,
        optimize,
        output_dir,
        digest: hex::encode(hasher.finalize()),
    })
}

impl RunConfig {
    /// Applies command-line overrides and folds them into the digest.
    pub fn apply_overrides(
        &mut self,
        ase: Option<bool>,
        step_mm: Option<f64>,
    ) -> std::result::Result<(), String> {
        let mut tag = String::new();
        if let Some(on) = ase {
            self.amplifier.ase.enabled = on;
            tag.push_str(&format!("ase={on};"));
        }
        if let Some(mm) = step_mm {
            if !(mm.is_finite() && mm > 0.0) {
                return Err(format!("--steps {mm}: must be a positive number of mm"));
            }
            self.amplifier.numerics.max_step = mm * 1e-3;
            tag.push_str(&format!("step_mm={mm};"));
        }
        if !tag.is_empty() {
            let mut h = Sha256::new();
            h.update(self.digest.as_bytes());
            h.update(tag.as_bytes());
            self.digest = hex::encode(h.finalize());
        }
        Ok(())
    }
}
