use crate::error::{Error, Result};
use crate::propagate::AmplifierConfig;

use super::{evaluate_points, simulate, Parallelism};

const PRESCAN_POINTS: usize = 21;
/// Golden-section search stops once the bracket is narrower than this, m.
pub const LENGTH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LengthOptimum {
    /// m
    pub length: f64,
    /// W
    pub signal_output: f64,
    /// Coarse pre-scan (length, signal output) used to bracket the maximum.
    pub prescan: Vec<(f64, f64)>,
    pub evaluations: usize,
}

fn signal_at(config: &AmplifierConfig, length: f64) -> Result<f64> {
    simulate(&config.clone().with_length(length))
        .map(|r| r.signal_output())
        .map_err(|e| e.at_point("length_m", length))
}

/// Fiber length in `bracket` that maximises signal output.
///
/// A coarse scan first checks that the output has a single local maximum
/// over the bracket, then golden-section search refines it.
pub fn optimize_length(
    config: &AmplifierConfig,
    bracket: (f64, f64),
    par: Parallelism,
) -> Result<LengthOptimum> {
    let (a, b) = bracket;
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
        return Err(Error::invalid(
            "optimize.bracket",
            format!("[{a}, {b}] m must be positive and increasing"),
        ));
    }
    let lengths: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| a + (b - a) * i as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let outputs = evaluate_points(&lengths, par, |l| signal_at(config, l))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let prescan: Vec<(f64, f64)> = lengths
        .iter()
        .copied()
        .zip(outputs.iter().copied())
        .collect();

    let maxima = local_maxima(&outputs);
    if maxima.len() > 1 {
        return Err(Error::NotUnimodal {
            maxima: maxima.iter().map(|&i| lengths[i]).collect(),
        });
    }
    let best = maxima[0];
    let lo = lengths[best.saturating_sub(1)];
    let hi = lengths[(best + 1).min(PRESCAN_POINTS - 1)];

    let (mut length, mut signal, evaluations) =
        golden_section_max(|l| signal_at(config, l), lo, hi, LENGTH_TOLERANCE)?;
    // Monotone outputs put the optimum on a bracket edge.
    if outputs[best] >= signal {
        length = lengths[best];
        signal = outputs[best];
    }
    Ok(LengthOptimum {
        length,
        signal_output: signal,
        prescan,
        evaluations: evaluations + PRESCAN_POINTS,
    })
}

/// Indices of local maxima, endpoints included. A run of equal values
/// counts once.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] < values[i];
        let right_ok = j == n - 1 || values[j + 1] < values[j];
        if left_ok && right_ok {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

/// Golden-section maximisation on `[lo, hi]`. Returns (x, f(x), evaluations).
fn golden_section_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while hi - lo >= tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        evals += 1;
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    Ok((x, fx, evals + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx, _) =
            golden_section_max(|x| Ok(-(x - 2.34) * (x - 2.34) + 1.0), 1.0, 4.0, 1e-6).unwrap();
        assert!((x - 2.34).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_monotone_goes_to_edge() {
        let (x, _, _) = golden_section_max(|x| Ok(-x), 1.0, 2.0, 1e-3).unwrap();
        assert!(x - 1.0 < 1e-3);
    }

    #[test]
    fn maxima_detection() {
        assert_eq!(local_maxima(&[1.0, 2.0, 3.0, 2.0]), vec![2]);
        assert_eq!(local_maxima(&[3.0, 2.0, 1.0]), vec![0]);
        assert_eq!(local_maxima(&[1.0, 2.0, 3.0]), vec![2]);
        assert_eq!(local_maxima(&[1.0, 3.0, 1.0, 3.0, 1.0]), vec![1, 3]);
        assert_eq!(local_maxima(&[1.0, 3.0, 3.0, 1.0]), vec![1]);
        assert_eq!(local_maxima(&[2.0, 2.0, 2.0]), vec![0]);
    }
}
