use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gain::PairingModel;
use crate::propagate::AmplifierConfig;

use super::simulate;

/// How sweep points are distributed over threads. Results are always
/// assembled in request order, so the choice never changes the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Serial,
    Threads(usize),
    /// The global rayon pool.
    #[default]
    Auto,
}

/// Evaluates `f` at every point, in parallel according to `par`, returning
/// results in the order of `points`.
pub fn evaluate_points<T, F>(points: &[f64], par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    match par {
        Parallelism::Serial | Parallelism::Threads(1) => points.iter().map(|&x| f(x)).collect(),
        Parallelism::Auto => points.par_iter().map(|&x| f(x)).collect(),
        Parallelism::Threads(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| points.par_iter().map(|&x| f(x)).collect()),
            Err(_) => points.iter().map(|&x| f(x)).collect(),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub x: f64,
    /// W
    pub signal_out: f64,
    pub aux: Vec<f64>,
    /// Set when this point failed and the sweep carried on.
    pub error: Option<String>,
}

/// Ordered results of a one-dimensional parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: String,
    pub unit: String,
    pub aux_columns: Vec<String>,
    pub records: Vec<SweepRecord>,
    /// Digest of the configuration the sweep ran on.
    pub provenance: String,
}

impl SweepResult {
    pub fn xs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.x).collect()
    }

    pub fn signal_outputs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.signal_out).collect()
    }

    pub fn record_at(&self, x: f64) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.x == x)
    }

    /// Writes the sweep as CSV with a `#` metadata preamble.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# config_digest: {}", self.provenance)?;
        writeln!(out, "# x_value: {} [{}]", self.variable, self.unit)?;
        writeln!(
            out,
            "# signal_out_W: amplified signal at the output port [W]"
        )?;
        let mut header = String::from("x_value,signal_out_W");
        for col in &self.aux_columns {
            header.push(',');
            header.push_str(col);
        }
        writeln!(out, "{header}")?;
        for r in &self.records {
            write!(out, "{},{}", r.x, r.signal_out)?;
            for v in &r.aux {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        for r in self.records.iter().filter(|r| r.error.is_some()) {
            writeln!(
                out,
                "# failed at {}: {}",
                r.x,
                r.error.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

fn check_increasing(values: &[f64], field: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(field, "at least one point is required"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(field, "all points must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "points must be strictly increasing"));
    }
    Ok(())
}

/// Signal output versus launched pump power. Aux column: residual pump.
pub fn sweep_pump_power(
    config: &AmplifierConfig,
    powers: &[f64],
    par: Parallelism,
) -> Result<SweepResult> {
    check_increasing(powers, "sweep.pump_power")?;
    if powers[0] < 0.0 {
        return Err(Error::invalid(
            "sweep.pump_power",
            "powers must be non-negative",
        ));
    }
    let outcomes = evaluate_points(powers, par, |p| {
        let c = config.clone().with_pump(config.pump_wavelength, p);
        simulate(&c)
            .map(|r| (r.signal_output(), r.pump_output()))
            .map_err(|e| e.at_point("pump_power_W", p))
    });
    let records = powers
        .iter()
        .zip(outcomes)
        .map(|(&x, o)| {
            let (s, p) = o?;
            Ok(SweepRecord {
                x,
                signal_out: s,
                aux: vec![p],
                error: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        variable: "pump_power".into(),
        unit: "W".into(),
        aux_columns: vec!["pump_out_W".into()],
        records,
        provenance: config.digest(),
    })
}

/// One sweep over pump wavelength per pairing value, at the config's pump
/// power. A failing point is recorded and the sweep continues.
pub fn sweep_pump_wavelength(
    config: &AmplifierConfig,
    wavelengths: &[f64],
    pairings: &[PairingModel],
    par: Parallelism,
) -> Result<Vec<SweepResult>> {
    check_increasing(wavelengths, "sweep.pump_wavelength")?;
    let span = config.spectra.span();
    if let Some(&w) = wavelengths.iter().find(|&&w| !span.contains(w)) {
        return Err(Error::SpectralRange {
            wavelength_nm: w * 1e9,
            min_nm: span.min * 1e9,
            max_nm: span.max * 1e9,
        });
    }
    let mut family = Vec::with_capacity(pairings.len());
    for &pairing in pairings {
        let base = config.clone().with_pairing(pairing);
        let outcomes = evaluate_points(wavelengths, par, |w| {
            simulate(&base.clone().with_pump(w, config.pump_power)).map(|r| r.signal_output())
        });
        let records = wavelengths
            .iter()
            .zip(outcomes)
            .map(|(&x, o)| match o {
                Ok(s) => SweepRecord {
                    x,
                    signal_out: s,
                    aux: vec![pairing.fraction()],
                    error: None,
                },
                Err(e) => SweepRecord {
                    x,
                    signal_out: f64::NAN,
                    aux: vec![pairing.fraction()],
                    error: Some(e.to_string()),
                },
            })
            .collect();
        family.push(SweepResult {
            variable: "pump_wavelength".into(),
            unit: "m".into(),
            aux_columns: vec!["pairing".into()],
            records,
            provenance: base.digest(),
        });
    }
    Ok(family)
}

/// Signal output versus pairing fraction at the config's pump. When
/// `second_pump` is given, each record also carries the output with that
/// pump wavelength and the ratio first/second.
pub fn sweep_pairing(
    config: &AmplifierConfig,
    pairings: &[f64],
    second_pump: Option<f64>,
    par: Parallelism,
) -> Result<SweepResult> {
    check_increasing(pairings, "sweep.pairing")?;
    let models = pairings
        .iter()
        .map(|&k| PairingModel::new(k))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = evaluate_points(pairings, par, |k| -> Result<(f64, Vec<f64>)> {
        let pairing = PairingModel::new(k)?;
        let c = config.clone().with_pairing(pairing);
        let first = simulate(&c)
            .map_err(|e| e.at_point("pairing", k))?
            .signal_output();
        let aux = match second_pump {
            Some(w) => {
                let second = simulate(&c.with_pump(w, config.pump_power))
                    .map_err(|e| e.at_point("pairing", k))?
                    .signal_output();
                vec![second, first / second]
            }
            None => Vec::new(),
        };
        Ok((first, aux))
    });
    let records = models
        .iter()
        .zip(outcomes)
        .map(|(m, o)| {
            let (signal_out, aux) = o?;
            Ok(SweepRecord {
                x: m.fraction(),
                signal_out,
                aux,
                error: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let aux_columns = if second_pump.is_some() {
        vec!["signal_out_second_pump_W".into(), "ratio".into()]
    } else {
        Vec::new()
    };
    Ok(SweepResult {
        variable: "pairing".into(),
        unit: "fraction".into(),
        aux_columns,
        records,
        provenance: config.digest(),
    })
}
