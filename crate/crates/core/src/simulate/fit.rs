use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::AbsorptionRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// `P(t) = A t^γ`
    PowerLaw,
    /// `P(t) = c + A t^γ`
    PowerLawPlusConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub constant: f64,
}

/// Log-log least-squares fit of `remaining(t)` for `t` in `window`.
///
/// The fit uses about 400 log-spaced steps of the window, so every decade
/// of `t` carries the same weight.
pub fn fit_decay(record: &AbsorptionRecord, model: DecayModel, window: RangeInclusive<usize>) -> Result<DecayFit> {
    let (t0, t1) = (*window.start(), *window.end());
    if t0 < 1 || t1 > record.steps || t0 >= t1 {
        return Err(Error::domain(
            "window",
            format!("must satisfy 1 <= start < end <= T = {}, got {t0}..={t1}", record.steps),
        ));
    }
    let mut ts: Vec<usize> = (0..=400)
        .map(|i| {
            let x = (t0 as f64).ln() + ((t1 as f64).ln() - (t0 as f64).ln()) * i as f64 / 400.0;
            (x.exp().round() as usize).clamp(t0, t1)
        })
        .collect();
    ts.dedup();
    let t: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    let y: Vec<f64> = ts.iter().map(|&t| record.remaining[t - 1]).collect();
    fit_power_law(&t, &y, model)
}

/// Fits `y ≈ c + A t^γ` by ordinary least squares on `log(y − c)` vs
/// `log t`. With the constant model, `c` is chosen to maximize the
/// coefficient of determination of that fit.
pub fn fit_power_law(t: &[f64], y: &[f64], model: DecayModel) -> Result<DecayFit> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::domain("window", "need at least three (t, y) samples"));
    }
    if t.iter().any(|&t| t <= 0.0) {
        return Err(Error::domain("window", "times must be positive"));
    }
    let lt: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    match model {
        DecayModel::PowerLaw => {
            if let Some(bad) = y.iter().find(|&&y| y <= 0.0 || !y.is_finite()) {
                return Err(Error::domain("window", format!("remaining must be positive on the window, found {bad}")));
            }
            let (slope, icept, _) = ols(&lt, y.iter().map(|y| y.ln()));
            Ok(DecayFit { exponent: slope, coefficient: icept.exp(), constant: 0.0 })
        }
        DecayModel::PowerLawPlusConstant => {
            let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
            let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(ymin.is_finite() && ymax.is_finite()) || ymax <= ymin {
                return Err(Error::domain("window", "remaining must vary over the window to fit a constant"));
            }
            // c = ymin − e^u; scan u, then golden-section refine around the best.
            // Raw SSR shrinks as c → −∞ (the logs flatten), so minimize 1 − R².
            let badness = |u: f64| {
                let c = ymin - u.exp();
                let ly: Vec<f64> = y.iter().map(|y| (y - c).ln()).collect();
                let mean = ly.iter().sum::<f64>() / ly.len() as f64;
                let total: f64 = ly.iter().map(|v| (v - mean).powi(2)).sum();
                ols(&lt, ly.into_iter()).2 / total
            };
            let spread = ymax - ymin;
            let (u_lo, u_hi) = ((spread * 1e-9).ln(), (spread * 1e3 + ymin.abs()).ln());
            let n = 400;
            let grid: Vec<f64> = (0..=n).map(|i| u_lo + (u_hi - u_lo) * i as f64 / n as f64).collect();
            let best = (0..=n)
                .min_by(|&i, &j| badness(grid[i]).total_cmp(&badness(grid[j])))
                .expect("non-empty grid");
            let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let (mut f1, mut f2) = (badness(x1), badness(x2));
            for _ in 0..200 {
                if f1 < f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = badness(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = badness(x2);
                }
                if (b - a).abs() < 1e-12 {
                    break;
                }
            }
            let u = 0.5 * (a + b);
            let c = ymin - u.exp();
            let (slope, icept, _) = ols(&lt, y.iter().map(|y| (y - c).ln()));
            Ok(DecayFit { exponent: slope, coefficient: icept.exp(), constant: c })
        }
    }
}

/// `(slope, intercept, residual sum of squares)`
fn ols(x: &[f64], y: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let y: Vec<f64> = y.collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ssr = x.iter().zip(&y).map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    (slope, icept, ssr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, steps: usize) -> AbsorptionRecord {
        let remaining: Vec<f64> = (1..=steps).map(|t| f(t as f64)).collect();
        AbsorptionRecord { per_step_left: vec![], per_step_right: vec![0.0; steps], remaining, steps }
    }

    #[test]
    fn exact_inverse_t() {
        let rec = synthetic(|t| 1.0 / t, 1000);
        let fit = fit_decay(&rec, DecayModel::PowerLaw, 10..=1000).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-6);
        assert!((fit.coefficient - 1.0).abs() < 1e-6);
    }

    #[test]
    fn recovers_plateau() {
        let rec = synthetic(|t| 0.3 + 5.0 / (t * t), 10_000);
        let fit = fit_decay(&rec, DecayModel::PowerLawPlusConstant, 100..=10_000).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-4, "{fit:?}");
        assert!((fit.constant - 0.3).abs() < 1e-9, "{fit:?}");
    }

    #[test]
    fn rejects_non_positive() {
        let rec = synthetic(|t| 1.0 - t / 10.0, 20);
        assert!(matches!(fit_decay(&rec, DecayModel::PowerLaw, 5..=20), Err(Error::Domain { .. })));
        assert!(fit_decay(&rec, DecayModel::PowerLaw, 0..=5).is_err());
    }
}
