use std::collections::BTreeMap;

use num_traits::Float;
use serde::Serialize;

use super::scan::ScanRow;
use crate::error::{Error, Result};

/// Least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope; needs at least three points.
    pub slope_se: Option<T>,
    pub points: usize,
}

/// Fits `ln y` against `ln x` by ordinary least squares.
pub fn fit_loglog<T: Float>(points: &[(T, T)]) -> Result<LineFit<T>> {
    if points.iter().any(|&(x, y)| !(x > T::zero() && y > T::zero() && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidArgument("log-log fit needs positive finite coordinates".into()));
    }
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = T::from(logs.len()).expect("point count fits in a float");
    let mean_x = logs.iter().fold(T::zero(), |a, p| a + p.0) / k;
    let mean_y = logs.iter().fold(T::zero(), |a, p| a + p.1) / k;
    let sxx = logs.iter().fold(T::zero(), |a, p| a + (p.0 - mean_x) * (p.0 - mean_x));
    let sxy = logs.iter().fold(T::zero(), |a, p| a + (p.0 - mean_x) * (p.1 - mean_y));
    if logs.len() < 2 || sxx <= T::zero() {
        return Err(Error::InvalidArgument("log-log fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let slope_se = (logs.len() >= 3).then(|| {
        let rss = logs.iter().fold(T::zero(), |a, p| {
            let r = p.1 - intercept - slope * p.0;
            a + r * r
        });
        (rss / (k - T::from(2).expect("small constant")) / sxx).sqrt()
    });
    Ok(LineFit { slope, intercept, slope_se, points: logs.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingEstimate {
    /// `(n, d*)` for every `n` whose grid straddles frequency 1/2.
    pub crossings: Vec<(usize, f64)>,
    /// Values of `n` left out because their grid does not straddle 1/2.
    pub excluded: Vec<usize>,
    /// Fit of `ln d*` against `ln n`; `None` with fewer than two crossings.
    pub fit: Option<LineFit<f64>>,
}

/// The `d` at which robust frequency crosses 1/2, by linear interpolation
/// in `ln d` on the first grid interval that straddles 1/2. A grid point
/// sitting exactly at 1/2 is returned as is.
fn crossing_for(points: &[(usize, f64)]) -> Option<f64> {
    for (i, &(d, f)) in points.iter().enumerate() {
        if f == 0.5 {
            return Some(d as f64);
        }
        if let Some(&(d2, f2)) = points.get(i + 1) {
            if (f - 0.5) * (f2 - 0.5) < 0.0 {
                let t = (f - 0.5) / (f - f2);
                let (l1, l2) = ((d as f64).ln(), (d2 as f64).ln());
                return Some((l1 + t * (l2 - l1)).exp());
            }
        }
    }
    None
}

/// Per-`n` crossing points of the robust frequency and the log-log slope
/// of `d*` against `n`. Cells without a decided trial are ignored.
pub fn estimate_crossing(rows: &[ScanRow]) -> Result<CrossingEstimate> {
    let mut by_n: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        let entry = by_n.entry(row.n).or_default();
        if let Some(f) = row.robust_frequency() {
            entry.push((row.d, f));
        }
    }
    if by_n.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least two distinct n, got {}", by_n.len())));
    }
    let mut crossings = Vec::new();
    let mut excluded = Vec::new();
    for (n, mut points) in by_n {
        points.sort_by_key(|p| p.0);
        match crossing_for(&points) {
            Some(d) => crossings.push((n, d)),
            None => {
                log::warn!("n = {n}: robust frequency does not straddle 1/2 on the grid; excluded from the fit");
                excluded.push(n);
            }
        }
    }
    let fit = if crossings.len() >= 2 {
        let pts: Vec<(f64, f64)> = crossings.iter().map(|&(n, d)| (n as f64, d)).collect();
        Some(fit_loglog(&pts)?)
    } else {
        log::warn!("only {} crossing(s) found; no exponent fit", crossings.len());
        None
    };
    Ok(CrossingEstimate { crossings, excluded, fit })
}
