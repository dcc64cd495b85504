use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples accepted by [`decay_fit`].
pub const MIN_FIT_SAMPLES: usize = 10;
/// Fraction of the series treated as transient by default.
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `-slope` of `log(value)` against `t`.
    pub rate: f64,
    pub r_squared: f64,
    /// Number of points entering the regression.
    pub points: usize,
}

fn check(series: &[(f64, f64)]) -> Result<()> {
    if series.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: series.len(),
        });
    }
    for (index, &(_, value)) in series.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonpositiveValue { index, value });
        }
    }
    Ok(())
}

fn regress(points: &[(f64, f64)]) -> DecayFit {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in points {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let r_squared = if syy > 0.0 { sty * sty / (stt * syy) } else { 1.0 };
    DecayFit {
        rate: -slope,
        r_squared,
        points: points.len(),
    }
}

fn window(series: &[(f64, f64)], transient_fraction: f64) -> Result<&[(f64, f64)]> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::DomainViolation(format!(
            "transient fraction {transient_fraction} must lie in [0, 1)"
        )));
    }
    let skip = (series.len() as f64 * transient_fraction).floor() as usize;
    let rest = &series[skip..];
    if rest.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: rest.len(),
        });
    }
    Ok(rest)
}

/// Least-squares fit of `log v = a - rate·t` after dropping the first 20%.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<DecayFit> {
    decay_fit_with(series, DEFAULT_TRANSIENT_FRACTION)
}

pub fn decay_fit_with(series: &[(f64, f64)], transient_fraction: f64) -> Result<DecayFit> {
    check(series)?;
    let rest = window(series, transient_fraction)?;
    let logs: Vec<(f64, f64)> = rest.iter().map(|&(t, v)| (t, v.ln())).collect();
    Ok(regress(&logs))
}

/// Like [`decay_fit_with`], but regresses the logarithm of block averages of
/// `block` consecutive samples, which smooths out oscillations faster than
/// the decay.
pub fn decay_fit_windowed(
    series: &[(f64, f64)],
    transient_fraction: f64,
    block: usize,
) -> Result<DecayFit> {
    check(series)?;
    if block == 0 {
        return Err(Error::DomainViolation("block length must be positive".into()));
    }
    let rest = window(series, transient_fraction)?;
    let points: Vec<(f64, f64)> = rest
        .chunks_exact(block)
        .map(|c| {
            let n = c.len() as f64;
            let t = c.iter().map(|p| p.0).sum::<f64>() / n;
            let v = c.iter().map(|p| p.1).sum::<f64>() / n;
            (t, v.ln())
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2 * block,
            got: rest.len(),
        });
    }
    Ok(regress(&points))
}
