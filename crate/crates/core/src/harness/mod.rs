//! Experiments: robustness threshold scans, dependency searches, the
//! two-phase rank simulation and the crossing-point fit.

mod crossing;
mod scan;
mod search;
mod two_phase;

pub use crossing::{estimate_crossing, fit_loglog, CrossingEstimate, LineFit};
pub use scan::{
    read_scan_csv, run_scan, scan_csv, write_scan_csv, write_witnesses, DGrid, ScanConfig, ScanOutput, ScanRow,
    WitnessRecord,
};
pub use search::{collision_search, signing_threshold, zero_sum_search};
pub use two_phase::{two_phase_matrices, two_phase_simulation, TwoPhaseConfig, TwoPhaseTrace};

use crate::error::{Error, Result};

/// The threshold exponent `1 + 1/(2 - 2δ)`.
pub fn threshold_exponent(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(1.0 + 1.0 / (2.0 - 2.0 * delta))
}

/// The even robustness size `s = 2⌊(1-δ)n/2⌋`.
pub fn robustness_size(n: usize, delta: f64) -> Result<usize> {
    threshold_exponent(delta)?;
    Ok(2 * ((1.0 - delta) * n as f64 / 2.0).floor() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(threshold_exponent(0.5).unwrap(), 2.0);
        assert_eq!(threshold_exponent(0.75).unwrap(), 3.0);
        assert!((threshold_exponent(1e-9).unwrap() - 1.5).abs() < 1e-8);
        assert!(threshold_exponent(0.0).is_err());
        assert!(threshold_exponent(1.0).is_err());
        assert!(threshold_exponent(f64::NAN).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(robustness_size(12, 0.5).unwrap(), 6);
        assert_eq!(robustness_size(20, 0.5).unwrap(), 10);
        assert_eq!(robustness_size(10, 0.3).unwrap(), 6);
        assert_eq!(robustness_size(11, 0.5).unwrap(), 4);
    }
}
