use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{robustness_size, threshold_exponent};
use crate::error::{Error, Result};
use crate::linalg::{find_sparse_kernel_vector, FieldSpec, SparseSearch, SparseSearchConfig};
use crate::matrix::{generate, SeedSpec};
use crate::vector::FpVector;

/// Column counts to scan for each `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DGrid {
    /// The same column counts for every `n`.
    Columns(Vec<usize>),
    /// Explicit column counts per `n`.
    PerN(BTreeMap<usize, Vec<usize>>),
    /// `d = round(n^(e + offset))` around the threshold exponent `e`.
    ExponentOffsets(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub delta: f64,
    pub n_list: Vec<usize>,
    pub d_grid: DGrid,
    pub trials: usize,
    pub field: FieldSpec,
    pub base_seed: u64,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    pub search: SparseSearchConfig,
    /// Use this `s` for every `n` instead of `2⌊(1-δ)n/2⌋`.
    pub s_override: Option<usize>,
    /// Fill `mean_runtime_ms`. Off by default, since wall-clock times make
    /// otherwise identical runs differ.
    pub record_timing: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            n_list: vec![12, 16, 20, 24],
            d_grid: DGrid::ExponentOffsets(vec![-0.5, -0.25, 0.0, 0.25, 0.5]),
            trials: 200,
            field: FieldSpec::Rationals,
            base_seed: 0,
            threads: 0,
            search: SparseSearchConfig::default(),
            s_override: None,
            record_timing: false,
        }
    }
}

const MAX_N: usize = 1 << 16;
const MAX_D: usize = 1 << 24;
const MAX_TRIALS: usize = 1 << 24;

impl ScanConfig {
    /// The `(n, s, d)` cells in output order (n ascending, then d).
    pub fn cells(&self) -> Result<Vec<(usize, usize, usize)>> {
        let exponent = threshold_exponent(self.delta)?;
        if self.trials == 0 || self.trials >= MAX_TRIALS {
            return Err(Error::InvalidArgument(format!("trials must be in 1..{MAX_TRIALS}")));
        }
        let mut n_list = self.n_list.clone();
        n_list.sort_unstable();
        n_list.dedup();
        let mut cells = Vec::new();
        for n in n_list {
            if n == 0 || n >= MAX_N {
                return Err(Error::InvalidArgument(format!("n = {n} outside 1..{MAX_N}")));
            }
            let s = match self.s_override {
                Some(s) => s,
                None => robustness_size(n, self.delta)?,
            };
            if s == 0 {
                return Err(Error::InvalidArgument(format!("s = 0 at n = {n}, delta = {}", self.delta)));
            }
            let mut ds: Vec<usize> = match &self.d_grid {
                DGrid::Columns(ds) => ds.clone(),
                DGrid::PerN(map) => map
                    .get(&n)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("no column counts given for n = {n}")))?,
                DGrid::ExponentOffsets(offs) => {
                    offs.iter().map(|o| (n as f64).powf(exponent + o).round() as usize).collect()
                }
            };
            ds.sort_unstable();
            ds.dedup();
            for d in ds {
                if d < s {
                    return Err(Error::InvalidArgument(format!("d = {d} is below s = {s} at n = {n}")));
                }
                if d >= MAX_D {
                    return Err(Error::InvalidArgument(format!("d = {d} exceeds {MAX_D}")));
                }
                cells.push((n, s, d));
            }
        }
        Ok(cells)
    }
}

/// Disjoint per cell and independent of which other cells are scanned.
fn stream_index(n: usize, d: usize, trial: usize) -> u64 {
    ((n as u64) << 48) | ((d as u64) << 24) | trial as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub trials: usize,
    pub robust_count: usize,
    pub witness_count: usize,
    /// Trials neither certified robust nor given a witness within the
    /// search budget; `trials - robust_count - witness_count`.
    pub capped: usize,
    pub mean_runtime_ms: Option<f64>,
}

impl ScanRow {
    /// Fraction of decided trials that were robust; `None` if none decided.
    pub fn robust_frequency(&self) -> Option<f64> {
        let decided = self.robust_count + self.witness_count;
        (decided > 0).then(|| self.robust_count as f64 / decided as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessRecord {
    pub n: usize,
    pub d: usize,
    pub stream_index: u64,
    pub vector: FpVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub witnesses: Vec<WitnessRecord>,
}

enum Verdict {
    Robust,
    Witness(FpVector),
    Capped,
}

/// Samples `trials` matrices per cell and decides `s`-robustness of each.
///
/// A trial counts as robust only when exhaustive search (or full column
/// rank) proves it; as non-robust only with a kernel vector of support at
/// most `s` that has been verified exactly. Anything else is capped.
/// Results do not depend on the number of threads.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanOutput> {
    let cells = cfg.cells()?;
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<(Verdict, f64)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, t)| {
                let (n, s, d) = cells[c];
                let seed = SeedSpec::new(cfg.base_seed, stream_index(n, d, t));
                let start = Instant::now();
                let m = generate(n, d, seed);
                let verdict = match find_sparse_kernel_vector(&m, s, cfg.field, cfg.search, seed.derive(1))? {
                    SparseSearch::Found(v) => Verdict::Witness(v),
                    SparseSearch::NoneExist => Verdict::Robust,
                    SparseSearch::Unknown => Verdict::Capped,
                };
                Ok((verdict, start.elapsed().as_secs_f64() * 1e3))
            })
            .collect()
    });

    let mut rows: Vec<ScanRow> = cells
        .iter()
        .map(|&(n, s, d)| ScanRow {
            n,
            d,
            s,
            trials: cfg.trials,
            robust_count: 0,
            witness_count: 0,
            capped: 0,
            mean_runtime_ms: None,
        })
        .collect();
    let mut total_ms = vec![0.0; cells.len()];
    let mut witnesses = Vec::new();
    for (&(c, t), outcome) in tasks.iter().zip(outcomes) {
        let (verdict, ms) = outcome?;
        let row = &mut rows[c];
        total_ms[c] += ms;
        match verdict {
            Verdict::Robust => row.robust_count += 1,
            Verdict::Witness(v) => {
                row.witness_count += 1;
                witnesses.push(WitnessRecord { n: row.n, d: row.d, stream_index: stream_index(row.n, row.d, t), vector: v });
            }
            Verdict::Capped => row.capped += 1,
        }
    }
    for (row, ms) in rows.iter_mut().zip(total_ms) {
        if cfg.record_timing {
            row.mean_runtime_ms = Some(ms / row.trials as f64);
        }
        if row.capped > 0 {
            log::warn!(
                "n = {}, d = {}: {} of {} trials capped (undecided within the search budget)",
                row.n,
                row.d,
                row.capped,
                row.trials
            );
        }
    }
    Ok(ScanOutput { rows, witnesses })
}

pub const SCAN_CSV_HEADER: &str = "n,d,s,trials,robust_count,witness_count,mean_runtime_ms";

/// CSV text; the runtime column is empty when timing was not recorded.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let ms = r.mean_runtime_ms.map(|v| format!("{v:.3}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.n, r.d, r.s, r.trials, r.robust_count, r.witness_count, ms);
    }
    out
}

pub fn write_scan_csv(rows: &[ScanRow], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scan_csv(rows))?;
    Ok(())
}

/// Parses scan CSV text written by [`scan_csv`].
pub fn read_scan_csv(text: &str) -> Result<Vec<ScanRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == SCAN_CSV_HEADER => {}
        _ => {
            return Err(Error::Parse { line: 1, message: format!("expected header {SCAN_CSV_HEADER:?}") });
        }
    }
    lines
        .map(|(i, line)| {
            let perr = |message: String| Error::Parse { line: i + 1, message };
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 7 {
                return Err(perr(format!("expected 7 fields, found {}", f.len())));
            }
            let int = |k: usize| f[k].parse::<usize>().map_err(|_| perr(format!("bad integer {:?}", f[k])));
            let (trials, robust_count, witness_count) = (int(3)?, int(4)?, int(5)?);
            if robust_count + witness_count > trials {
                return Err(perr("robust_count + witness_count exceeds trials".into()));
            }
            let mean_runtime_ms = if f[6].is_empty() {
                None
            } else {
                Some(f[6].parse::<f64>().map_err(|_| perr(format!("bad runtime {:?}", f[6])))?)
            };
            Ok(ScanRow {
                n: int(0)?,
                d: int(1)?,
                s: int(2)?,
                trials,
                robust_count,
                witness_count,
                capped: trials - robust_count - witness_count,
                mean_runtime_ms,
            })
        })
        .collect()
}

/// Witness sidecar: for each witness a `# n= d= stream_index=` line, then
/// the vector in its text form.
pub fn write_witnesses(witnesses: &[WitnessRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for w in witnesses {
        let _ = writeln!(out, "# n={} d={} stream_index={}", w.n, w.d, w.stream_index);
        out.push_str(&w.vector.to_text());
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_kernel_vector;

    fn small(trials: usize, threads: usize) -> ScanConfig {
        ScanConfig {
            delta: 0.5,
            n_list: vec![8, 6],
            d_grid: DGrid::Columns(vec![6, 10, 14]),
            trials,
            threads,
            ..ScanConfig::default()
        }
    }

    #[test]
    fn cell_order_and_validation() {
        let cells = small(5, 1).cells().unwrap();
        assert_eq!(cells[0], (6, 2, 6));
        assert_eq!(cells[3], (8, 4, 6));
        let bad = ScanConfig { d_grid: DGrid::Columns(vec![3]), ..small(5, 1) };
        assert!(bad.cells().is_err());
        let offsets = ScanConfig { n_list: vec![12], ..ScanConfig::default() }.cells().unwrap();
        let ds: Vec<usize> = offsets.iter().map(|c| c.2).collect();
        assert_eq!(ds, vec![42, 77, 144, 268, 499]);
        assert!(ScanConfig { delta: 1.5, ..ScanConfig::default() }.cells().is_err());
    }

    #[test]
    fn rows_account_for_every_trial_and_witnesses_verify() {
        let out = run_scan(&small(30, 2)).unwrap();
        for r in &out.rows {
            assert_eq!(r.robust_count + r.witness_count + r.capped, r.trials);
            assert_eq!(r.capped, 0, "small cells are decided exhaustively");
        }
        for w in &out.witnesses {
            let m = generate(w.n, w.d, SeedSpec::new(0, w.stream_index));
            assert!(is_kernel_vector(&m, &w.vector));
            assert!(w.vector.support_size() <= robustness_size(w.n, 0.5).unwrap());
        }
    }

    #[test]
    fn two_by_two_cell_is_half_robust() {
        let cfg = ScanConfig {
            n_list: vec![2],
            s_override: Some(2),
            d_grid: DGrid::Columns(vec![2]),
            trials: 2000,
            ..ScanConfig::default()
        };
        let row = &run_scan(&cfg).unwrap().rows[0];
        assert_eq!(row.s, 2);
        let f = row.robust_count as f64 / row.trials as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25f64 / 2000.0).sqrt() + 1e-9, "{f}");
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let a = run_scan(&small(20, 1)).unwrap();
        let b = run_scan(&small(20, 3)).unwrap();
        assert_eq!(scan_csv(&a.rows), scan_csv(&b.rows));
        assert_eq!(a.witnesses, b.witnesses);
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = run_scan(&small(10, 1)).unwrap().rows;
        let text = scan_csv(&rows);
        assert!(text.starts_with("n,d,s,trials,robust_count,witness_count,mean_runtime_ms\n6,6,2,10,"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
        assert_eq!(read_scan_csv(&text).unwrap(), rows);
        rows[0].mean_runtime_ms = Some(1.25);
        assert_eq!(read_scan_csv(&scan_csv(&rows)).unwrap()[0].mean_runtime_ms, Some(1.25));
        assert!(read_scan_csv("n,d\n").is_err());
        assert!(matches!(read_scan_csv(&format!("{SCAN_CSV_HEADER}\n1,2,3\n")), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn config_from_json() {
        let cfg: ScanConfig =
            serde_json::from_str(r#"{"n_list": [12], "d_grid": {"columns": [20, 30]}, "field": "F_17", "trials": 7}"#)
                .unwrap();
        assert_eq!(cfg.field, FieldSpec::PrimeField(17));
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.delta, 0.5);
        assert_eq!(cfg.d_grid, DGrid::Columns(vec![20, 30]));
    }
}
