//! `taildep` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | result produced                                      |
//! | 1    | unclassified failure                                 |
//! | 2    | usage error (unknown flag, missing argument)         |
//! | 3    | parse error (model spec, numeric field, CSV shape)   |
//! | 4    | parameter out of range                               |
//! | 5    | invalid input (n too small, k out of range, ...)     |
//! | 6    | sampler did not converge                             |
//! | 7    | alignment error (no common months)                   |
//! | 8    | I/O error                                            |
//! | 9    | price-file ingestion error                           |

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use taildep_core::pipeline::{self, Alignment, MaximaSeries, PriceColumns};
use taildep_core::simulation::{self, Estimator, SimulationConfig};
use taildep_core::{
    ci_tdc, kpath, rank_transform, sample_copula, select_k, stdf_new, tdc_huang, tdc_huang_auto,
    tdc_new, to_frechet, BevModel, BivariateSample, CiConfig, PlateauConfig, PlateauSelection,
    SamplerConfig, StdfPoint, TdcEstimate,
};

pub const THREADS_ENV: &str = "TAILDEP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "taildep", version, about = "Tail-dependence coefficient estimation for bivariate extremes")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Refuse randomized runs without an explicit --seed.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the TDC of a pair file (or two aligned maxima files).
    Estimate(EstimateArgs),
    /// Run a Monte Carlo bias/RMSE study.
    Simulate(SimulateArgs),
    /// Emit the Huang estimate for every k plus the plateau choice.
    Kpath(KpathArgs),
    /// Monthly maxima of negative log-returns from price files.
    Blockmax(BlockmaxArgs),
    /// Evaluate a model's STDF (and optionally the empirical one).
    Stdf(StdfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    New,
    Huang,
    Both,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV of pairs (`x1,x2` or `month,x1,x2`); `-` reads stdin.
    #[arg(required_unless_present = "maxima", conflicts_with = "maxima")]
    pub file: Option<String>,

    /// Two `month,value` maxima files to align instead of a pair file.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pub maxima: Option<Vec<PathBuf>>,

    #[arg(long, value_enum, default_value = "new")]
    pub method: MethodArg,

    /// Threshold for the Huang estimator: an integer or `auto` (plateau).
    #[arg(long, default_value = "auto")]
    pub k: String,

    /// Attach a confidence interval at this level (bootstrap for rank estimates).
    #[arg(long)]
    pub ci: Option<f64>,

    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model spec, e.g. `logistic:r=0.7`, `alog:r=0.7,t1=0.5,t2=0.5`, `hr:r=0.7`.
    #[arg(long = "model")]
    pub models: Vec<String>,

    #[arg(long, value_delimiter = ',', default_values_t = simulation::TABLE1_SIZES.to_vec())]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = simulation::TABLE1_REPLICATIONS)]
    pub reps: usize,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output prefix; writes `<prefix>.json` and `<prefix>.csv`.
    #[arg(long, default_value = "simulation")]
    pub out: PathBuf,

    /// Three models × n ∈ {50,100,500,1000}, 1000 replications, both estimators.
    #[arg(long, conflicts_with_all = ["models", "sizes", "reps"])]
    pub table1: bool,

    #[arg(long, value_delimiter = ',', default_values = ["new", "huang"])]
    pub estimators: Vec<EstimatorArg>,

    /// Record wall-clock timings (reports are then no longer byte-reproducible).
    #[arg(long)]
    pub timings: bool,

    /// Write one sample of unit-Fréchet pairs to this file instead of running a study.
    #[arg(long, requires = "n")]
    pub emit_sample: Option<PathBuf>,

    /// Sample size for --emit-sample.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    New,
    Huang,
}

#[derive(Debug, Args)]
pub struct KpathArgs {
    /// Pair file; `-` reads stdin.
    pub file: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlockmaxArgs {
    /// One or two price CSV files.
    #[arg(required = true, num_args = 1..=2)]
    pub files: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "price")]
    pub price_column: String,
}

#[derive(Debug, Args)]
pub struct StdfArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 1.0)]
    pub x1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x2: f64,
    /// Pair file for the empirical STDF at the same point.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub json: bool,
}

/// Machine-readable result of `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub estimates: Vec<TdcEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdfReport {
    pub model: String,
    pub x1: f64,
    pub x2: f64,
    pub stdf: f64,
    pub true_tdc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<f64>,
}

/// Maps an error chain to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use taildep_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parse { .. } | E::Csv(_) | E::Json(_) => 3,
                E::Parameter(_) => 4,
                E::Input(_) => 5,
                E::Sampler { .. } => 6,
                E::Alignment(_) => 7,
                E::Io(_) => 8,
                E::Ingest { .. } => 9,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 8;
        }
    }
    1
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(taildep_core::Error::Parameter("--threads must be at least 1".into()).into());
        }
        // ignore the error when a pool already exists (repeated calls in one process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, cli.strict, &mut out),
        Command::Simulate(a) => cmd_simulate(&a, cli.strict, &mut out),
        Command::Kpath(a) => cmd_kpath(&a, &mut out),
        Command::Blockmax(a) => cmd_blockmax(&a, &mut out),
        Command::Stdf(a) => cmd_stdf(&a, &mut out),
    }
}

fn resolve_seed(seed: Option<u64>, strict: bool, what: &str) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None if strict => Err(taildep_core::Error::Input(format!(
            "--strict requires --seed for {what}"
        ))
        .into()),
        None => {
            let s = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            eprintln!("note: no --seed given, using {s}");
            Ok(s)
        }
    }
}

fn open_input(path: &str) -> Result<Box<dyn Read>> {
    if path == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        let f = File::open(path)
            .map_err(taildep_core::Error::from)
            .with_context(|| format!("opening {path}"))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn create_output(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path)
        .map_err(taildep_core::Error::from)
        .with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Reads a pair CSV. A header is optional; with a header, columns `x1` and
/// `x2` are used when present, otherwise the file must have two columns.
pub fn read_pairs<R: Read>(reader: R) -> Result<BivariateSample> {
    use taildep_core::Error as E;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(E::from)?,
        None => return Err(E::Input("pair file is empty".into()).into()),
    };
    let numeric = first.iter().all(|f| f.parse::<f64>().is_ok());
    let (cols, mut pairs, offset) = if numeric {
        if first.len() != 2 {
            return Err(E::parse(first.iter().collect::<Vec<_>>().join(","), "expected two numeric columns").into());
        }
        (
            (0, 1),
            vec![[first[0].parse::<f64>()?, first[1].parse::<f64>()?]],
            1,
        )
    } else {
        let pos = |name: &str| first.iter().position(|h| h == name);
        let cols = match (pos("x1"), pos("x2")) {
            (Some(a), Some(b)) => (a, b),
            _ if first.len() == 2 => (0, 1),
            _ => {
                return Err(E::parse(
                    first.iter().collect::<Vec<_>>().join(","),
                    "header needs x1 and x2 columns (or exactly two columns)",
                )
                .into())
            }
        };
        (cols, Vec::new(), 2)
    };
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(E::from)?;
        let line = i + offset;
        let get = |j: usize| -> Result<f64> {
            let tok = rec.get(j).unwrap_or("");
            tok.parse::<f64>()
                .map_err(|_| E::parse(tok, format!("not a number (data line {line})")).into())
        };
        pairs.push([get(cols.0)?, get(cols.1)?]);
    }
    Ok(BivariateSample::new(pairs)?)
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn load_estimate_sample(a: &EstimateArgs) -> Result<BivariateSample> {
    if let Some(files) = &a.maxima {
        let read = |p: &PathBuf| -> Result<MaximaSeries> {
            let f = open_input(&p.to_string_lossy())?;
            Ok(MaximaSeries::read_csv(f)?)
        };
        let al = pipeline::align(&read(&files[0])?, &read(&files[1])?)?;
        eprintln!("{}", al.report());
        Ok(al.to_sample()?)
    } else {
        let file = a.file.as_deref().ok_or_else(|| anyhow!("no input given"))?;
        read_pairs(open_input(file)?)
    }
}

pub fn cmd_estimate<W: Write>(a: &EstimateArgs, strict: bool, out: &mut W) -> Result<()> {
    let sample = load_estimate_sample(a)?;
    let ps = rank_transform(&sample);
    let n = ps.len();
    let seed = match a.ci {
        Some(_) => Some(resolve_seed(a.seed, strict, "bootstrap intervals")?),
        None => a.seed,
    };

    let mut estimates = Vec::new();
    let mut plateau = None;
    if matches!(a.method, MethodArg::New | MethodArg::Both) {
        estimates.push(tdc_new(&ps));
    }
    if matches!(a.method, MethodArg::Huang | MethodArg::Both) {
        if a.k == "auto" {
            let (est, sel) = tdc_huang_auto(&ps, &PlateauConfig::default())?;
            estimates.push(est);
            plateau = Some(sel);
        } else {
            let k: usize = a
                .k
                .parse()
                .map_err(|_| taildep_core::Error::parse(&a.k, "k must be an integer or `auto`"))?;
            estimates.push(tdc_huang(&ps, k)?);
        }
    }
    if let Some(level) = a.ci {
        let cfg = CiConfig {
            level,
            resamples: a.bootstrap,
            seed: seed.unwrap_or(0),
        };
        estimates = estimates
            .iter()
            .map(|e| ci_tdc(e, &ps, &cfg))
            .collect::<taildep_core::Result<_>>()?;
    }

    let report = EstimateReport {
        n,
        estimates,
        plateau,
        seed,
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "n = {n}")?;
        for e in &report.estimates {
            write!(out, "method = {}", e.method.as_str())?;
            if let Some(k) = e.k {
                write!(out, "  k = {k}")?;
            }
            write!(out, "  lambda = {}  raw = {}", fmt4(e.value_clamped), fmt4(e.value_raw))?;
            if let Some(ci) = e.ci {
                write!(
                    out,
                    "  ci{:.0}% = [{}, {}]",
                    100.0 * ci.level,
                    fmt4(ci.lower),
                    fmt4(ci.upper)
                )?;
            }
            writeln!(out)?;
        }
        if let Some(sel) = &report.plateau {
            if !sel.plateau_found {
                writeln!(out, "note: no plateau found, k = floor(sqrt(n)) fallback")?;
            }
        }
    }
    Ok(())
}

fn parse_models(specs: &[String]) -> Result<Vec<BevModel>> {
    specs
        .iter()
        .map(|s| s.parse::<BevModel>().map_err(anyhow::Error::from))
        .collect()
}

pub fn cmd_simulate<W: Write>(a: &SimulateArgs, strict: bool, out: &mut W) -> Result<()> {
    let seed = resolve_seed(a.seed, strict, "simulate")?;

    if let Some(path) = &a.emit_sample {
        let models = parse_models(&a.models)?;
        let [model] = models.as_slice() else {
            bail!(taildep_core::Error::Input("--emit-sample needs exactly one --model".into()));
        };
        let n = a.n.unwrap_or(0);
        let pairs = sample_copula(model, n, &SamplerConfig::with_seed(seed))?;
        let sample = to_frechet(&pairs)?;
        let mut w = csv::Writer::from_writer(create_output(path)?);
        w.write_record(["x1", "x2"]).map_err(taildep_core::Error::from)?;
        for p in sample.pairs() {
            w.write_record([p[0].to_string(), p[1].to_string()])
                .map_err(taildep_core::Error::from)?;
        }
        w.flush().map_err(taildep_core::Error::from)?;
        writeln!(out, "wrote {n} pairs from {model} (seed {seed}) to {}", path.display())?;
        return Ok(());
    }

    let mut cfg = if a.table1 {
        SimulationConfig::table1(seed)
    } else {
        if a.models.is_empty() {
            bail!(taildep_core::Error::Input("simulate needs --model or --table1".into()));
        }
        SimulationConfig {
            models: parse_models(&a.models)?,
            sizes: a.sizes.clone(),
            replications: a.reps,
            ..SimulationConfig::table1(seed)
        }
    };
    let mut estimators: Vec<Estimator> = a
        .estimators
        .iter()
        .map(|e| match e {
            EstimatorArg::New => Estimator::New,
            EstimatorArg::Huang => Estimator::Huang,
        })
        .collect();
    estimators.dedup();
    cfg.estimators = estimators;
    cfg.record_timings = a.timings;

    let report = simulation::run_study(&cfg)?;

    let json_path = a.out.with_extension("json");
    let csv_path = a.out.with_extension("csv");
    let mut jw = create_output(&json_path)?;
    writeln!(jw, "{}", report.to_json()?)?;
    jw.flush()?;
    report.write_csv(create_output(&csv_path)?)?;

    writeln!(out, "{:<28} {:>5} {:>9} {:>9} {:>9}", "model", "n", "estimator", "abs_bias", "rmse")?;
    for cell in &report.cells {
        for s in &cell.stats {
            writeln!(
                out,
                "{:<28} {:>5} {:>9} {:>9} {:>9}",
                cell.model,
                cell.n,
                s.estimator.as_str(),
                fmt4(s.abs_bias),
                fmt4(s.rmse)
            )?;
        }
    }
    if let Ok(cmp) = simulation::compare_estimators(&report) {
        writeln!(out, "new estimator has lower rmse in {}/{} cells", cmp.new_wins, cmp.cells.len())?;
    }
    writeln!(out, "wrote {} and {}", json_path.display(), csv_path.display())?;
    Ok(())
}

pub fn cmd_kpath<W: Write>(a: &KpathArgs, out: &mut W) -> Result<()> {
    let sample = read_pairs(open_input(&a.file)?)?;
    let n = sample.len();
    if n < 3 {
        bail!(taildep_core::Error::Input(format!("kpath needs n >= 3, got {n}")));
    }
    let ps = rank_transform(&sample);
    let path = kpath(&ps);
    let sel = select_k(&path, n, &PlateauConfig::default())?;

    let mut text = String::from("k,lambda_h\n");
    for (k, v) in &path.entries {
        text.push_str(&format!("{k},{v}\n"));
    }
    text.push_str(&format!(
        "# plateau_k={},estimate={},plateau_found={}\n",
        sel.k, sel.estimate, sel.plateau_found
    ));
    match &a.out {
        Some(p) => {
            let mut w = create_output(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_blockmax<W: Write>(a: &BlockmaxArgs, out: &mut W) -> Result<()> {
    let columns = PriceColumns {
        date: a.date_column.clone(),
        price: a.price_column.clone(),
    };
    std::fs::create_dir_all(&a.out_dir)
        .map_err(taildep_core::Error::from)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut maxima = Vec::new();
    for path in &a.files {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into());
        let series = pipeline::read_price_csv(&id, open_input(&path.to_string_lossy())?, &columns)
            .with_context(|| format!("reading {}", path.display()))?;
        let m = pipeline::monthly_maxima(&pipeline::neg_log_returns(&series)?)?;
        let target = a.out_dir.join(format!("{id}_maxima.csv"));
        m.write_csv(create_output(&target)?)?;
        writeln!(out, "{}: {} months -> {}", id, m.len(), target.display())?;
        maxima.push(m);
    }
    if let [first, second] = maxima.as_slice() {
        let al: Alignment = pipeline::align(first, second)?;
        eprintln!("{}", al.report());
        for m in &al.dropped_first {
            eprintln!("  dropped from first: {m}");
        }
        for m in &al.dropped_second {
            eprintln!("  dropped from second: {m}");
        }
        let target = a.out_dir.join("aligned.csv");
        al.write_csv(create_output(&target)?)?;
        writeln!(out, "aligned {} pairs -> {}", al.len(), target.display())?;
    }
    Ok(())
}

pub fn cmd_stdf<W: Write>(a: &StdfArgs, out: &mut W) -> Result<()> {
    let model: BevModel = a.model.parse()?;
    let p = StdfPoint::new(a.x1, a.x2)?;
    let empirical = match &a.data {
        Some(f) => Some(stdf_new(&rank_transform(&read_pairs(open_input(f)?)?), p)?),
        None => None,
    };
    let report = StdfReport {
        model: model.to_string(),
        x1: a.x1,
        x2: a.x2,
        stdf: model.stdf(p),
        true_tdc: model.true_tdc(),
        empirical,
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "model = {}", report.model)?;
        writeln!(out, "l({}, {}) = {}", a.x1, a.x2, fmt4(report.stdf))?;
        writeln!(out, "lambda = {}", fmt4(report.true_tdc))?;
        if let Some(e) = report.empirical {
            writeln!(out, "empirical l({}, {}) = {}", a.x1, a.x2, fmt4(e))?;
        }
    }
    Ok(())
}
