use crate::error::{Error, Result};

use super::SweepResult;

/// Records with pump below this fraction of the largest swept pump are
/// left out of the slope fit, which keeps the soft threshold knee out.
pub const SLOPE_WINDOW_FRACTION: f64 = 0.4;

/// Ordinary least-squares straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual, same unit as y.
    pub rms: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        rms: (ss / nf).sqrt(),
    })
}

/// Optical-optical slope efficiency from a pump-power sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// W out per W pump.
    pub slope: f64,
    /// W
    pub intercept: f64,
    /// Pump range actually fitted, W.
    pub window: (f64, f64),
    /// W
    pub rms: f64,
    pub points: usize,
}

impl SlopeFit {
    /// Pump power where the fitted line crosses zero output.
    pub fn threshold(&self) -> f64 {
        -self.intercept / self.slope
    }
}

pub fn fit_slope_efficiency(sweep: &SweepResult) -> Result<SlopeFit> {
    let max_pump = sweep
        .records
        .iter()
        .map(|r| r.x)
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = SLOPE_WINDOW_FRACTION * max_pump;
    let (xs, ys): (Vec<f64>, Vec<f64>) = sweep
        .records
        .iter()
        .filter(|r| r.x >= lower && r.error.is_none())
        .map(|r| (r.x, r.signal_out))
        .unzip();
    let fit_error = || Error::Fit {
        found: xs.len(),
        window_min: lower,
        window_max: max_pump,
    };
    if xs.len() < 4 {
        return Err(fit_error());
    }
    let line = fit_line(&xs, &ys).ok_or_else(fit_error)?;
    Ok(SlopeFit {
        slope: line.slope,
        intercept: line.intercept,
        window: (xs[0], *xs.last().unwrap()),
        rms: line.rms,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::SweepRecord;

    fn sweep(points: &[(f64, f64)]) -> SweepResult {
        SweepResult {
            variable: "pump_power".into(),
            unit: "W".into(),
            aux_columns: vec![],
            records: points
                .iter()
                .map(|&(x, y)| SweepRecord {
                    x,
                    signal_out: y,
                    aux: vec![],
                    error: None,
                })
                .collect(),
            provenance: String::new(),
        }
    }

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<(f64, f64)> = [1.0, 1.375, 1.75, 2.125, 2.5]
            .iter()
            .map(|&x| (x, 0.57 * x - 0.189))
            .collect();
        let fit = fit_slope_efficiency(&sweep(&pts)).unwrap();
        assert!((fit.slope - 0.57).abs() < 1e-12);
        assert!((fit.intercept + 0.189).abs() < 1e-12);
        assert!(fit.rms < 1e-12);
        assert_eq!(fit.points, 5);
        assert_eq!(fit.window, (1.0, 2.5));
    }

    #[test]
    fn window_excludes_knee() {
        // Below 40% of 2.5 W the curve is flat; above it, linear.
        let mut pts = vec![(0.0, 0.0), (0.25, 0.0), (0.5, 0.01), (0.75, 0.05)];
        pts.extend([1.0, 1.5, 2.0, 2.5].iter().map(|&x| (x, 0.5 * x - 0.2)));
        let fit = fit_slope_efficiency(&sweep(&pts)).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.threshold() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let pts = [(0.0, 0.0), (0.5, 0.1), (1.0, 0.3), (1.5, 0.5), (2.5, 1.0)];
        // window [1.0, 2.5] holds three points
        assert!(matches!(
            fit_slope_efficiency(&sweep(&pts)),
            Err(Error::Fit { found: 3, .. })
        ));
    }
}
