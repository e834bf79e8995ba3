//! Command-line frontend: every subcommand parses its inputs, calls one
//! library operation and serializes the result.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use robustlab_core::concentration::{
    bad_count_bound, bad_membership, halasz_bound, rho, rk_star, BadParams, HalaszParams, RkStarParams,
    DEFAULT_BAD_BUDGET,
};
use robustlab_core::harness::{
    collision_search, estimate_crossing, read_scan_csv, run_scan, scan_csv, two_phase_simulation, write_witnesses,
    DGrid, ScanConfig, TwoPhaseConfig,
};
use robustlab_core::moments::{alpha_exact, moment_report, MomentMode};
use robustlab_core::{
    generate, is_s_robust, kernel_basis, rank, read_matrix, read_vector, spark_with_budget, ColumnSelection, Error,
    FieldSpec, FpVector, SeedSpec, Spark,
};

#[derive(Parser)]
#[command(name = "robustlab", version, about = "Exact and Monte Carlo tools for s-robustness of random sign matrices")]
struct Cli {
    /// Base seed for randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for scans (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random sign matrix.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Stream index within the base seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Rank of a matrix.
    Rank(MatrixField),
    /// Whether every s columns are independent.
    Robust {
        #[command(flatten)]
        input: MatrixField,
        #[arg(long)]
        s: usize,
    },
    /// Minimal support of a kernel vector.
    Spark {
        #[command(flatten)]
        input: MatrixField,
        /// Do not search dependent sets larger than this.
        #[arg(long)]
        cap: Option<usize>,
        /// Maximum number of subset extensions to try.
        #[arg(long, default_value_t = u64::MAX)]
        budget: u64,
    },
    /// A kernel basis.
    Kernel(MatrixField),
    /// Atom probability of a vector.
    Rho(VectorInput),
    /// The additive-collision statistic R_k*.
    Rkstar {
        #[command(flatten)]
        input: VectorInput,
        #[arg(long)]
        k: usize,
    },
    /// The Halász-type bound next to the exact atom probability.
    Halasz {
        #[command(flatten)]
        input: VectorInput,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
    },
    /// Membership in the Bad set and the count bound.
    Bad {
        #[command(flatten)]
        input: VectorInput,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = DEFAULT_BAD_BUDGET)]
        budget: u64,
    },
    /// The correlation ratio α(n, m).
    Alpha {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Mean and variance of the zero-sum subset count.
    Moment {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "exact")]
        mode: MomentMode,
    },
    /// Robustness frequency scan; writes CSV.
    Scan(ScanArgs),
    /// Pigeonhole collision search for a sparse dependency.
    Collide {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Meet-in-the-middle search for s columns summing to zero.
    Zerosum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Two-phase rank boosting of a set of target columns.
    Twophase {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        beta: f64,
        /// Field modulus; 0 for the rationals.
        #[arg(long, default_value_t = robustlab_core::MERSENNE_61)]
        p: u64,
        /// Target columns (default: the first s).
        #[arg(long, value_delimiter = ',')]
        target: Option<Vec<usize>>,
    },
    /// Crossing points and log-log slope of a scan CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// SVG plot of robust frequency against d.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct MatrixField {
    #[arg(long = "in")]
    input: PathBuf,
    /// `q` for the rationals, or a prime (`17`, `fp:17`); `fp` is 2^61 - 1.
    #[arg(long, default_value = "q")]
    field: FieldSpec,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VectorInput {
    /// Vector file in the `p n` / entries text format.
    #[arg(long)]
    vector: Option<PathBuf>,
    /// Inline vector `"p n a1 .. an"`.
    #[arg(long)]
    inline: Option<String>,
}

#[derive(Args)]
struct ScanArgs {
    /// JSON file with scan settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Column counts as exponent offsets around the threshold exponent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "d")]
    exp_offsets: Option<Vec<f64>>,
    /// Explicit column counts, the same for every n.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    field: Option<FieldSpec>,
    /// Also fill the mean runtime column.
    #[arg(long)]
    timing: bool,
    /// Write verified witnesses to this file.
    #[arg(long)]
    witnesses: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = run(&cli).and_then(|text| emit(cli.out.as_deref(), &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\nFor usage, run: robustlab help");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_seed(cli: &Cli) -> CliResult<u64> {
    cli.seed.ok_or_else(|| Failure::Usage("this subcommand is randomized and needs --seed".into()))
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize");
    text.push('\n');
    text
}

fn vector_json(v: &FpVector) -> Value {
    json!({ "modulus": v.modulus(), "entries": v.entries() })
}

fn read_input_vector(input: &VectorInput) -> CliResult<FpVector> {
    match (&input.vector, &input.inline) {
        (Some(path), _) => at_path(path, read_vector(path)),
        (None, Some(text)) => Ok(FpVector::parse_inline(text)?),
        (None, None) => Err(Failure::Usage("give --vector or --inline".into())),
    }
}

/// Prefixes errors about an input file with its path.
fn at_path<T>(path: &Path, r: robustlab_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        Failure::Domain(m) => Failure::Domain(format!("{}: {m}", path.display())),
    })
}

fn load_matrix(path: &Path) -> CliResult<robustlab_core::SignMatrix> {
    at_path(path, read_matrix(path))
}

fn require_even(s: usize) -> CliResult<()> {
    if s == 0 || s % 2 == 1 {
        return Err(Failure::Usage(format!("s must be a positive even number, got {s}")));
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Gen { n, d, stream } => Ok(generate(*n, *d, SeedSpec::new(require_seed(cli)?, *stream)).to_text()),
        Command::Rank(MatrixField { input, field }) => Ok(format!("{}\n", rank(&load_matrix(input)?, *field).rank)),
        Command::Robust { input, s } => {
            let r = is_s_robust(&load_matrix(&input.input)?, *s, input.field)?;
            Ok(to_json(&json!({
                "field": input.field,
                "s": s,
                "robust": r.robust,
                "witness": r.witness.as_ref().map(vector_json),
            })))
        }
        Command::Spark { input, cap, budget } => {
            let r = spark_with_budget(&load_matrix(&input.input)?, input.field, *cap, *budget)?;
            let spark = match r.spark {
                Spark::Finite(k) => json!(k),
                Spark::Infinite => json!("infinite"),
                Spark::AboveCap(c) => json!(format!(">{c}")),
            };
            Ok(to_json(&json!({
                "field": input.field,
                "spark": spark,
                "witness": r.witness.as_ref().map(vector_json),
            })))
        }
        Command::Kernel(MatrixField { input, field }) => {
            let basis = kernel_basis(&load_matrix(input)?, *field)?;
            Ok(basis.iter().map(FpVector::to_text).collect::<Vec<_>>().join("\n"))
        }
        Command::Rho(input) => {
            let r = rho(&read_input_vector(input)?)?;
            Ok(to_json(&json!({ "rho": r, "decimal": r.to_f64() })))
        }
        Command::Rkstar { input, k } => {
            let v = read_input_vector(input)?;
            Ok(to_json(&json!({ "k": k, "rk_star": rk_star(&v, RkStarParams::new(*k))?.to_string() })))
        }
        Command::Halasz { input, k, l, c } => {
            let r = halasz_bound(&read_input_vector(input)?, HalaszParams { k: *k, l: *l, c: *c })?;
            Ok(to_json(&json!({
                "k": k,
                "l": l,
                "c": c,
                "rho": r.rho,
                "rho_decimal": r.rho.to_f64(),
                "rk_star": r.rk_star.to_string(),
                "collision_term": r.collision_term,
                "bound": r.bound,
                "holds": r.rho.to_f64() <= r.bound,
            })))
        }
        Command::Bad { input, k, m, t, s, budget } => {
            let v = read_input_vector(input)?;
            let params = BadParams { k: *k, m: *m, t: *t, s: *s };
            let member = bad_membership(&v, params, *budget)?;
            Ok(to_json(&json!({
                "member": member,
                "count_bound": bad_count_bound(v.len(), v.modulus(), params),
            })))
        }
        Command::Alpha { n, m } => {
            let a = alpha_exact(*n, *m)?;
            Ok(format!("{a} {}\n", a.to_f64().unwrap_or(f64::NAN)))
        }
        Command::Moment { n, d, s, mode } => Ok(to_json(&moment_json(&moment_report(*n, *d, *s, *mode)?))),
        Command::Scan(args) => scan(cli, args),
        Command::Collide { input, s, budget } => {
            require_even(*s)?;
            let w = collision_search(&load_matrix(input)?, *s, *budget, SeedSpec::new(require_seed(cli)?, 0))?;
            Ok(to_json(&json!({ "found": w.is_some(), "witness": w.as_ref().map(vector_json) })))
        }
        Command::Zerosum { input, s, budget } => {
            require_even(*s)?;
            let hit = robustlab_core::harness::zero_sum_search(
                &load_matrix(input)?,
                *s,
                *budget,
                SeedSpec::new(require_seed(cli)?, 0),
            )?;
            Ok(to_json(&json!({ "found": hit.is_some(), "columns": hit.map(ColumnSelection::into_vec) })))
        }
        Command::Twophase { n, d, s, beta, p, target } => {
            let cfg = TwoPhaseConfig {
                n: *n,
                d: *d,
                s: *s,
                beta: *beta,
                field: FieldSpec::from_modulus(*p)?,
                seed: SeedSpec::new(require_seed(cli)?, 0),
            };
            let target = match target {
                Some(cols) => ColumnSelection::new(cols.clone())?,
                None => ColumnSelection::new((0..*s).collect())?,
            };
            Ok(to_json(&two_phase_simulation(&cfg, &target)?))
        }
        Command::Fit { input } => Ok(to_json(&estimate_crossing(&read_scan(input)?)?)),
        Command::Plot { input } => Ok(plot::render(&read_scan(input)?)),
    }
}

fn moment_json(r: &robustlab_core::moments::MomentReport) -> Value {
    json!({
        "n": r.n,
        "d": r.d,
        "s": r.s,
        "mode": r.mode,
        "mean": r.mean,
        "variance": r.variance,
        "ln_mean": r.ln_mean,
        "var_over_mean_sq": r.var_over_mean_sq,
        "chebyshev_lower_bound": r.chebyshev_lower_bound,
    })
}

fn read_scan(path: &Path) -> CliResult<Vec<robustlab_core::harness::ScanRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    at_path(path, read_scan_csv(&text))
}

fn scan(cli: &Cli, args: &ScanArgs) -> CliResult<String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ScanConfig>(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => {
            let seed = require_seed(cli)?;
            ScanConfig { base_seed: seed, ..ScanConfig::default() }
        }
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(delta) = args.delta {
        cfg.delta = delta;
    }
    if let Some(n) = &args.n {
        cfg.n_list = n.clone();
    }
    if let Some(offsets) = &args.exp_offsets {
        cfg.d_grid = DGrid::ExponentOffsets(offsets.clone());
    }
    if let Some(d) = &args.d {
        cfg.d_grid = DGrid::Columns(d.clone());
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(field) = args.field {
        cfg.field = field;
    }
    cfg.record_timing |= args.timing;
    let out = run_scan(&cfg)?;
    if let Some(path) = &args.witnesses {
        write_witnesses(&out.witnesses, path)?;
    }
    Ok(scan_csv(&out.rows))
}
