//! Command dispatch and artifact emission.
//!
//! Every artifact starts with a `# config_digest:` line. CSV artifacts hold
//! no timings or other run-dependent data, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hdfa_core::{
    fit_slope_efficiency, invert_pairing, optimize_length, simulate, sweep_pairing,
    sweep_pump_power, sweep_pump_wavelength, InversionSettings, PairingModel, Parallelism,
    SweepRecord, SweepResult,
};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::RunConfig;
use crate::reference::{ReferenceTable, REFERENCE_TSV};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    SweepPumpPower,
    SweepPumpWavelength,
    SweepPairing,
    InvertPairing,
    OptimizeLength,
    ShowReferenceTable,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Simulate,
        Command::SweepPumpPower,
        Command::SweepPumpWavelength,
        Command::SweepPairing,
        Command::InvertPairing,
        Command::OptimizeLength,
        Command::ShowReferenceTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::SweepPumpPower => "sweep-pump-power",
            Command::SweepPumpWavelength => "sweep-pump-wavelength",
            Command::SweepPairing => "sweep-pairing",
            Command::InvertPairing => "invert-pairing",
            Command::OptimizeLength => "optimize-length",
            Command::ShowReferenceTable => "show-reference-table",
        }
    }

    pub fn needs_config(self) -> bool {
        self != Command::ShowReferenceTable
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0} needs --config")]
    NoConfig(&'static str),
    #[error("{command}: the config has no `{section}.*` keys")]
    MissingSection {
        command: &'static str,
        section: &'static str,
    },
    #[error(transparent)]
    Model(#[from] hdfa_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// One-screen result digest for the terminal.
    pub report: String,
    pub artifacts: Vec<PathBuf>,
}

struct Artifacts<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path) -> Result<Self, CommandError> {
        fs::create_dir_all(dir).map_err(|source| CommandError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Artifacts {
            dir,
            written: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CommandError> {
        let path = self.dir.join(name);
        let mut buf = Vec::new();
        fill(&mut buf)
            .and_then(|_| fs::write(&path, &buf))
            .map_err(|source| CommandError::Io {
                path: path.clone(),
                source,
            })?;
        self.written.push(path);
        Ok(())
    }

    fn sweep(&mut self, name: &str, sweep: &SweepResult) -> Result<(), CommandError> {
        self.write(name, |b| sweep.write_csv(b))
    }

    fn summary(&mut self, name: &str, digest: &str, body: &str) -> Result<(), CommandError> {
        self.write(name, |b| {
            writeln!(b, "# config_digest: {digest}")?;
            b.write_all(body.as_bytes())
        })
    }
}

fn mw(watts: f64) -> f64 {
    watts * 1e3
}

fn nm(meters: f64) -> f64 {
    meters * 1e9
}

/// Runs `command` on `cfg`, writing artifacts under `out_dir`.
pub fn run_command(
    command: Command,
    cfg: Option<&RunConfig>,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    if command == Command::ShowReferenceTable {
        return show_reference_table(out_dir);
    }
    let cfg = cfg.ok_or(CommandError::NoConfig(command.name()))?;
    match command {
        Command::Simulate => run_simulate(cfg, out_dir),
        Command::SweepPumpPower => run_sweep_pump_power(cfg, out_dir, par),
        Command::SweepPumpWavelength => run_sweep_pump_wavelength(cfg, out_dir, par),
        Command::SweepPairing => run_sweep_pairing(cfg, out_dir, par),
        Command::InvertPairing => run_invert_pairing(cfg, out_dir, par),
        Command::OptimizeLength => run_optimize_length(cfg, out_dir, par),
        Command::ShowReferenceTable => show_reference_table(out_dir),
    }
}

fn run_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CommandError> {
    let amp = &cfg.amplifier;
    let result = simulate(amp)?;
    let mut body = String::new();
    let s_in = amp.signal_power;
    let s_out = result.signal_output();
    let gain = if s_in > 0.0 && s_out > 0.0 {
        format!("{:.4}", 10.0 * (s_out / s_in).log10())
    } else {
        "n/a".to_string()
    };
    let _ = writeln!(body, "command = simulate");
    let _ = writeln!(body, "length_m = {}", amp.length);
    let _ = writeln!(body, "pairing = {}", amp.pairing.fraction());
    let _ = writeln!(
        body,
        "signal_wavelength_nm = {:.3}",
        nm(amp.signal_wavelength)
    );
    let _ = writeln!(body, "pump_wavelength_nm = {:.3}", nm(amp.pump_wavelength));
    let _ = writeln!(body, "signal_in_mW = {:.6}", mw(s_in));
    let _ = writeln!(body, "pump_in_mW = {:.6}", mw(amp.pump_power));
    let _ = writeln!(body, "signal_out_mW = {:.6}", mw(s_out));
    let _ = writeln!(body, "pump_out_mW = {:.6}", mw(result.pump_output()));
    let _ = writeln!(body, "signal_gain_dB = {gain}");
    if amp.ase.enabled {
        use hdfa_core::Direction;
        let _ = writeln!(
            body,
            "ase_forward_mW = {:.6}",
            mw(result.ase_output(Direction::Forward))
        );
        let _ = writeln!(
            body,
            "ase_backward_mW = {:.6}",
            mw(result.ase_output(Direction::Backward))
        );
    }
    let c = result.convergence;
    let _ = writeln!(body, "steps = {}", c.steps);
    let _ = writeln!(body, "step_m = {}", c.step);
    let _ = writeln!(body, "relaxation_iterations = {}", c.iterations);
    if let Some(h) = c.halving_change {
        let _ = writeln!(body, "step_halving_change = {h:.3e}");
    }

    let mut art = Artifacts::new(out_dir)?;
    art.summary("simulate_summary.txt", &cfg.digest, &body)?;
    art.write("simulate_profile.csv", |b| {
        writeln!(b, "# config_digest: {}", cfg.digest)?;
        for (id, ch) in result.inputs.iter().enumerate() {
            writeln!(
                b,
                "# channel {id}: {:?} {:?} {:.3} nm",
                ch.kind,
                ch.direction,
                nm(ch.wavelength)
            )?;
        }
        result.write_profile_csv(b)
    })?;
    let report = format!(
        "signal out {:.2} mW ({gain} dB gain), residual pump {:.2} mW\n",
        mw(s_out),
        mw(result.pump_output())
    );
    Ok(Outcome {
        report,
        artifacts: art.written,
    })
}

fn run_sweep_pump_power(
    cfg: &RunConfig,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    let grid = cfg.sweep_pump_power.ok_or(CommandError::MissingSection {
        command: "sweep-pump-power",
        section: "sweep.pump_power",
    })?;
    let mut sweep = sweep_pump_power(&cfg.amplifier, &grid.points(), par)?;
    sweep.provenance = cfg.digest.clone();
    let mut art = Artifacts::new(out_dir)?;
    art.sweep("sweep_pump_power.csv", &sweep)?;

    let mut report = String::new();
    for r in &sweep.records {
        let _ = writeln!(report, "  {:>8.3} W -> {:>9.2} mW", r.x, mw(r.signal_out));
    }
    let mut body = String::from("command = sweep-pump-power\n");
    let _ = writeln!(
        body,
        "pump_wavelength_nm = {:.3}",
        nm(cfg.amplifier.pump_wavelength)
    );
    match fit_slope_efficiency(&sweep) {
        Ok(fit) => {
            let _ = writeln!(body, "slope = {:.6}", fit.slope);
            let _ = writeln!(body, "intercept_W = {:.6}", fit.intercept);
            let _ = writeln!(body, "threshold_W = {:.6}", fit.threshold());
            let _ = writeln!(body, "fit_window_W = {} {}", fit.window.0, fit.window.1);
            let _ = writeln!(body, "fit_points = {}", fit.points);
            let _ = writeln!(body, "rms_W = {:.3e}", fit.rms);
            let _ = writeln!(
                report,
                "slope efficiency {:.2} % (fit over {}-{} W, {} points)",
                100.0 * fit.slope,
                fit.window.0,
                fit.window.1,
                fit.points
            );
        }
        Err(e) => {
            let _ = writeln!(body, "slope = n/a ({e})");
            let _ = writeln!(report, "no slope fit: {e}");
        }
    }
    art.summary("slope_fit.txt", &cfg.digest, &body)?;
    Ok(Outcome {
        report,
        artifacts: art.written,
    })
}

fn run_sweep_pump_wavelength(
    cfg: &RunConfig,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    let spec = cfg
        .sweep_pump_wavelength
        .as_ref()
        .ok_or(CommandError::MissingSection {
            command: "sweep-pump-wavelength",
            section: "sweep.pump_wavelength",
        })?;
    let pairings = spec
        .pairings
        .iter()
        .map(|&k| PairingModel::new(k))
        .collect::<Result<Vec<_>, _>>()?;
    let family = sweep_pump_wavelength(&cfg.amplifier, &spec.grid.points(), &pairings, par)?;
    let mut art = Artifacts::new(out_dir)?;
    let mut report = format!("pump power {:.3} W\n", cfg.amplifier.pump_power);
    for mut sweep in family {
        sweep.provenance = cfg.digest.clone();
        let k = sweep
            .records
            .first()
            .and_then(|r| r.aux.first().copied())
            .unwrap_or(0.0);
        art.sweep(&format!("sweep_pump_wavelength_k{k:.3}.csv"), &sweep)?;
        let best = sweep
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .max_by(|a, b| a.signal_out.total_cmp(&b.signal_out));
        let failed = sweep.records.iter().filter(|r| r.error.is_some()).count();
        if let Some(SweepRecord { x, signal_out, .. }) = best {
            let _ = write!(
                report,
                "  k = {:>5.1} %: best {:.1} nm -> {:.2} mW",
                100.0 * k,
                nm(*x),
                mw(*signal_out)
            );
        }
        if failed > 0 {
            let _ = write!(report, " ({failed} points failed)");
        }
        report.push('\n');
    }
    Ok(Outcome {
        report,
        artifacts: art.written,
    })
}

fn run_sweep_pairing(
    cfg: &RunConfig,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    let spec = cfg
        .sweep_pairing
        .as_ref()
        .ok_or(CommandError::MissingSection {
            command: "sweep-pairing",
            section: "sweep.pairing",
        })?;
    let mut sweep = sweep_pairing(&cfg.amplifier, &spec.grid.points(), spec.second_pump, par)?;
    sweep.provenance = cfg.digest.clone();
    let mut art = Artifacts::new(out_dir)?;
    art.sweep("sweep_pairing.csv", &sweep)?;
    let mut report = String::new();
    for r in &sweep.records {
        let _ = write!(
            report,
            "  k = {:>5.1} %: {:>8.2} mW",
            100.0 * r.x,
            mw(r.signal_out)
        );
        if let [second, ratio] = r.aux[..] {
            let _ = write!(report, " | {:>8.2} mW | ratio {ratio:.4}", mw(second));
        }
        report.push('\n');
    }
    Ok(Outcome {
        report,
        artifacts: art.written,
    })
}

fn run_invert_pairing(
    cfg: &RunConfig,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    let inv = cfg.invert.ok_or(CommandError::MissingSection {
        command: "invert-pairing",
        section: "invert",
    })?;
    let est = invert_pairing(
        &cfg.amplifier,
        inv.pumps,
        inv.pump_power,
        inv.ratio,
        InversionSettings::default(),
        par,
    )?;
    let mut art = Artifacts::new(out_dir)?;
    art.write("pairing_curve.csv", |b| {
        writeln!(b, "# config_digest: {}", cfg.digest)?;
        writeln!(
            b,
            "# ratio: P_out({:.1} nm) / P_out({:.1} nm) at {} W pump",
            nm(inv.pumps.0),
            nm(inv.pumps.1),
            inv.pump_power
        )?;
        writeln!(b, "k,ratio")?;
        for (k, r) in &est.curve {
            writeln!(b, "{k},{r}")?;
        }
        Ok(())
    })?;
    let mut body = String::from("command = invert-pairing\n");
    let _ = writeln!(body, "k_hat = {:.6}", est.k_hat);
    let _ = writeln!(body, "k_hat_percent = {:.3}", 100.0 * est.k_hat);
    let _ = writeln!(body, "measured_ratio = {}", est.measured_ratio);
    let _ = writeln!(body, "ratio_min = {:.6}", est.ratio_range.0);
    let _ = writeln!(body, "ratio_max = {:.6}", est.ratio_range.1);
    let _ = writeln!(body, "pump_1_nm = {:.3}", nm(inv.pumps.0));
    let _ = writeln!(body, "pump_2_nm = {:.3}", nm(inv.pumps.1));
    let _ = writeln!(body, "pump_power_W = {}", inv.pump_power);
    let _ = writeln!(body, "bisection_steps = {}", est.bisection_steps);
    art.summary("pairing_estimate.txt", &cfg.digest, &body)?;
    Ok(Outcome {
        report: format!("{est}\n"),
        artifacts: art.written,
    })
}

fn run_optimize_length(
    cfg: &RunConfig,
    out_dir: &Path,
    par: Parallelism,
) -> Result<Outcome, CommandError> {
    let bracket = cfg.optimize.ok_or(CommandError::MissingSection {
        command: "optimize-length",
        section: "optimize",
    })?;
    let opt = optimize_length(&cfg.amplifier, bracket, par)?;
    let prescan = SweepResult {
        variable: "length".into(),
        unit: "m".into(),
        aux_columns: Vec::new(),
        records: opt
            .prescan
            .iter()
            .map(|&(l, s)| SweepRecord {
                x: l,
                signal_out: s,
                aux: Vec::new(),
                error: None,
            })
            .collect(),
        provenance: cfg.digest.clone(),
    };
    let mut art = Artifacts::new(out_dir)?;
    art.sweep("length_prescan.csv", &prescan)?;
    let mut body = String::from("command = optimize-length\n");
    let _ = writeln!(body, "optimum_length_m = {:.4}", opt.length);
    let _ = writeln!(body, "signal_out_mW = {:.6}", mw(opt.signal_output));
    let _ = writeln!(body, "bracket_m = {} {}", bracket.0, bracket.1);
    let _ = writeln!(body, "evaluations = {}", opt.evaluations);
    art.summary("length_optimum.txt", &cfg.digest, &body)?;
    Ok(Outcome {
        report: format!(
            "optimum length {:.3} m -> {:.2} mW signal ({} evaluations)\n",
            opt.length,
            mw(opt.signal_output),
            opt.evaluations
        ),
        artifacts: art.written,
    })
}

fn show_reference_table(out_dir: &Path) -> Result<Outcome, CommandError> {
    let table = ReferenceTable::builtin();
    let digest = hex::encode(Sha256::digest(REFERENCE_TSV.as_bytes()));
    let mut art = Artifacts::new(out_dir)?;
    art.write("ion_pairing_reference.tsv", |b| {
        writeln!(b, "# config_digest: {digest}")?;
        b.write_all(REFERENCE_TSV.as_bytes())
    })?;
    Ok(Outcome {
        report: table.to_string(),
        artifacts: art.written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>(), Ok(c));
        }
        assert!("fly".parse::<Command>().is_err());
    }
}
