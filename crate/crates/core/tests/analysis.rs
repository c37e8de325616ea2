mod common;

use common::*;
use hdfa_core::analysis::{evaluate_points, pairing_ratio};
use hdfa_core::{
    fit_slope_efficiency, invert_pairing, optimize_length, simulate, sweep_pairing,
    sweep_pump_power, sweep_pump_wavelength, Error, InversionSettings, PairingModel, Parallelism,
    SweepRecord, SweepResult,
};

fn linear_sweep(xs: &[f64], f: impl Fn(f64) -> f64) -> SweepResult {
    SweepResult {
        variable: "pump_power".into(),
        unit: "W".into(),
        aux_columns: Vec::new(),
        records: xs
            .iter()
            .map(|&x| SweepRecord {
                x,
                signal_out: f(x),
                aux: Vec::new(),
                error: None,
            })
            .collect(),
        provenance: String::new(),
    }
}

#[test]
fn slope_fit_recovers_exact_line() {
    let sweep = linear_sweep(&[2.0, 2.5, 3.0, 3.5, 4.0], |x| 0.57 * x - 0.189);
    let fit = fit_slope_efficiency(&sweep).unwrap();
    assert!((fit.slope - 0.57).abs() < 1e-14);
    assert!((fit.intercept + 0.189).abs() < 1e-14);
    assert!(fit.rms < 1e-15);
    assert_eq!(fit.points, 5);
    assert!((fit.threshold() - 0.189 / 0.57).abs() < 1e-12);
}

#[test]
fn slope_fit_window_excludes_knee() {
    let xs: Vec<f64> = (0..=25).map(|i| i as f64 * 0.1).collect();
    let sweep = linear_sweep(&xs, |x| if x < 0.5 { 0.01 * x } else { 0.5 * x - 0.245 });
    let fit = fit_slope_efficiency(&sweep).unwrap();
    assert_eq!(fit.window.0, 1.0);
    assert_eq!(fit.window.1, 2.5);
    assert!((fit.slope - 0.5).abs() < 1e-12);
}

#[test]
fn slope_fit_needs_four_points() {
    let sweep = linear_sweep(&[0.0, 1.0, 2.0, 3.0], |x| x);
    let err = fit_slope_efficiency(&sweep).unwrap_err();
    assert!(matches!(err, Error::Fit { found: 2, .. }), "{err}");
}

#[test]
fn zero_power_sweep_is_dark_transmission() {
    let cfg = nrl_config();
    let sweep = sweep_pump_power(&cfg, &[0.0], Parallelism::Serial).unwrap();
    let dark = simulate(&cfg.clone().with_pump(cfg.pump_wavelength, 0.0)).unwrap();
    assert_eq!(sweep.records.len(), 1);
    assert_eq!(sweep.records[0].signal_out, dark.signal_output());
    assert!(dark.signal_output() < 1e-3 * 1e-5);
}

#[test]
fn pump_sweep_is_non_decreasing() {
    let cfg = nrl_config();
    let powers: Vec<f64> = (0..=100).map(|i| i as f64 * 0.025).collect();
    for pump_nm in [1860.0, 1940.0] {
        let c = cfg.clone().with_pump(pump_nm * NM, 1.0);
        let out = sweep_pump_power(&c, &powers, Parallelism::Auto)
            .unwrap()
            .signal_outputs();
        assert!(out.windows(2).all(|w| w[1] >= w[0]), "{pump_nm} nm");
    }
}

#[test]
fn sweeps_reject_bad_grids() {
    let cfg = nrl_config();
    assert!(sweep_pump_power(&cfg, &[1.0, 0.5], Parallelism::Serial).is_err());
    assert!(sweep_pump_power(&cfg, &[-0.1, 0.5], Parallelism::Serial).is_err());
    assert!(sweep_pump_power(&cfg, &[], Parallelism::Serial).is_err());
    assert!(sweep_pairing(&cfg, &[0.0, 1.2], None, Parallelism::Serial).is_err());
    let far = sweep_pump_wavelength(
        &cfg,
        &[1600.0 * NM],
        &[PairingModel::NONE],
        Parallelism::Serial,
    );
    assert!(matches!(far, Err(Error::SpectralRange { .. })));
}

#[test]
fn permuting_points_permutes_results() {
    let cfg = nrl_config();
    let points = [0.3, 2.1, 1.3, 0.0, 0.9];
    let eval = |p: f64| {
        simulate(&cfg.clone().with_pump(cfg.pump_wavelength, p))
            .unwrap()
            .signal_output()
    };
    let forward = evaluate_points(&points, Parallelism::Auto, eval);
    let mut reversed_points = points;
    reversed_points.reverse();
    let mut reversed = evaluate_points(&reversed_points, Parallelism::Threads(3), eval);
    reversed.reverse();
    assert_eq!(forward, reversed);
}

#[test]
fn pairing_sweep_properties() {
    let cfg = nrl_config();
    let ks: Vec<f64> = (0..=16).map(|i| i as f64 * 0.01).collect();
    let sweep = sweep_pairing(&cfg, &ks, Some(1940.0 * NM), Parallelism::Auto).unwrap();
    assert_eq!(sweep.aux_columns, ["signal_out_second_pump_W", "ratio"]);
    let first = sweep.signal_outputs();
    let second: Vec<f64> = sweep.records.iter().map(|r| r.aux[0]).collect();
    assert!(first.windows(2).all(|w| w[1] < w[0]));
    assert!(second.windows(2).all(|w| w[1] < w[0]));
    let plain = simulate(&cfg.clone().with_pairing(PairingModel::NONE)).unwrap();
    assert_eq!(sweep.records[0].signal_out, plain.signal_output());
    // Refined steps do not change the ordering.
    let mut fine = cfg.clone();
    fine.numerics.max_step = 0.25e-3;
    let fine_sweep = sweep_pairing(&fine, &ks, None, Parallelism::Auto).unwrap();
    assert!(fine_sweep.signal_outputs().windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pairing_derivative_is_negative_and_smooth() {
    let cfg = nrl_config();
    let out = |k: f64| {
        simulate(&cfg.clone().with_pairing(PairingModel::new(k).unwrap()))
            .unwrap()
            .signal_output()
    };
    for k in [0.02, 0.04, 0.10] {
        let d1 = (out(k + 1e-3) - out(k - 1e-3)) / 2e-3;
        let d2 = (out(k + 5e-4) - out(k - 5e-4)) / 1e-3;
        assert!(d1 < 0.0);
        assert!(rel(d1, d2) < 1e-3, "k {k}: {d1} vs {d2}");
    }
}

#[test]
fn wavelength_family_is_ordered() {
    let cfg = nrl_config();
    let wavelengths: Vec<f64> = (0..=14).map(|i| (1760.0 + 20.0 * i as f64) * NM).collect();
    let ks = [0.0, 0.01, 0.05, 0.30];
    let models: Vec<PairingModel> = ks.iter().map(|&k| PairingModel::new(k).unwrap()).collect();
    let family = sweep_pump_wavelength(&cfg, &wavelengths, &models, Parallelism::Auto).unwrap();
    assert_eq!(family.len(), 4);
    for (i, w) in wavelengths.iter().enumerate() {
        let column: Vec<f64> = family.iter().map(|s| s.records[i].signal_out).collect();
        assert!(column.windows(2).all(|p| p[1] <= p[0]), "{}", w / NM);
        assert!(column[0] - column[1] < column[0] - column[3]);
    }
    let single =
        sweep_pump_wavelength(&cfg, &[1860.0 * NM], &models[..1], Parallelism::Serial).unwrap();
    let direct = simulate(&cfg.clone().with_pairing(models[0])).unwrap();
    assert_eq!(single[0].records[0].signal_out, direct.signal_output());
}

#[test]
fn inversion_recovers_known_pairing() {
    let cfg = nrl_config();
    let pumps = (1860.0 * NM, 1940.0 * NM);
    let ratio = pairing_ratio(&cfg, pumps, 1.3, 0.083).unwrap();
    let est = invert_pairing(
        &cfg,
        pumps,
        1.3,
        ratio,
        InversionSettings::default(),
        Parallelism::Auto,
    )
    .unwrap();
    assert!((est.k_hat - 0.083).abs() < 1e-3, "{}", est.k_hat);
    assert_eq!(est.curve.len(), 31);
    assert!(est.bisection_steps > 0);
    assert!(est.ratio_range.0 <= ratio && ratio <= est.ratio_range.1);
}

#[test]
fn inversion_out_of_range_reports_interval() {
    let cfg = nrl_config();
    let err = invert_pairing(
        &cfg,
        (1860.0 * NM, 1940.0 * NM),
        1.3,
        100.0,
        InversionSettings::default(),
        Parallelism::Auto,
    )
    .unwrap_err();
    match err {
        Error::RatioOutOfRange { ratio, min, max } => {
            assert_eq!(ratio, 100.0);
            assert!(min < 1.0 && max > 1.17);
            let text = Error::RatioOutOfRange { ratio, min, max }.to_string();
            assert!(text.contains(&format!("{min:.6}")), "{text}");
        }
        other => panic!("unexpected {other}"),
    }
    let low = invert_pairing(
        &cfg,
        (1860.0 * NM, 1940.0 * NM),
        1.3,
        0.5,
        InversionSettings::default(),
        Parallelism::Auto,
    );
    assert!(matches!(low, Err(Error::RatioOutOfRange { .. })));
}

#[test]
fn inversion_refuses_degenerate_curve() {
    // Same wavelength twice: R(k) is identically one.
    let cfg = nrl_config();
    let err = invert_pairing(
        &cfg,
        (1860.0 * NM, 1860.0 * NM),
        1.3,
        1.0,
        InversionSettings::default(),
        Parallelism::Auto,
    )
    .unwrap_err();
    assert!(matches!(err, Error::ModelDegeneracy { .. }), "{err}");
}

#[test]
fn zero_pump_optimum_is_lower_edge() {
    let cfg = nrl_config().with_pump(1860.0 * NM, 0.0);
    let opt = optimize_length(&cfg, (0.5, 3.0), Parallelism::Auto).unwrap();
    assert_eq!(opt.length, 0.5);
}

#[test]
fn length_optimum_is_a_local_maximum_and_bracket_stable() {
    let cfg = nrl_config()
        .with_pump(1860.0 * NM, 2.5)
        .with_pairing(PairingModel::new(0.05).unwrap());
    let opt = optimize_length(&cfg, (1.0, 4.0), Parallelism::Auto).unwrap();
    for dl in [-0.1, 0.1] {
        let nearby = simulate(&cfg.clone().with_length(opt.length + dl))
            .unwrap()
            .signal_output();
        assert!(opt.signal_output >= nearby);
    }
    let wide = optimize_length(&cfg, (0.5, 6.0), Parallelism::Auto).unwrap();
    assert!(
        (wide.length - opt.length).abs() <= 1e-3,
        "{} vs {}",
        wide.length,
        opt.length
    );
}

#[test]
fn length_bracket_is_validated() {
    let cfg = nrl_config();
    assert!(optimize_length(&cfg, (2.0, 1.0), Parallelism::Serial).is_err());
    assert!(optimize_length(&cfg, (0.0, 1.0), Parallelism::Serial).is_err());
}
