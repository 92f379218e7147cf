//! Monte Carlo bias/RMSE study of the TDC estimators.
//!
//! Every replication `(model, n, r)` draws from its own ChaCha8 stream seeded
//! with `base_seed ^ stable_hash(model spec, n, r)`, so cells are independent
//! of each other, of their order in the config and of the worker count.
//! Per-replication estimates are reduced in replication order with
//! compensated sums.
//!
//! CSV report columns, in order:
//! `model,params,n,estimator,bias,abs_bias,rmse,mean,std,seconds`.
//! `seconds` is empty unless timings were requested.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{compensated_sum, rank_transform, tdc_huang_auto, tdc_new, PlateauConfig};
use crate::models::BevModel;
use crate::sampling::{sample_copula, SamplerConfig};

pub const TABLE1_SIZES: [usize; 4] = [50, 100, 500, 1000];
pub const TABLE1_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    New,
    Huang,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::New => "new",
            Estimator::Huang => "huang",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub models: Vec<BevModel>,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    pub estimators: Vec<Estimator>,
    pub plateau: PlateauConfig,
    pub sampler: SamplerConfig,
    /// Record wall-clock timings in the report. Off by default so that equal
    /// configs serialize to identical bytes.
    pub record_timings: bool,
}

impl SimulationConfig {
    /// The three-model, four-size grid with 1000 replications and both estimators.
    pub fn table1(base_seed: u64) -> Self {
        Self {
            models: table1_models(),
            sizes: TABLE1_SIZES.to_vec(),
            replications: TABLE1_REPLICATIONS,
            base_seed,
            estimators: vec![Estimator::New, Estimator::Huang],
            plateau: PlateauConfig::default(),
            sampler: SamplerConfig::default(),
            record_timings: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Parameter("replications must be at least 1".into()));
        }
        if self.models.is_empty() || self.sizes.is_empty() || self.estimators.is_empty() {
            return Err(Error::Parameter(
                "simulation needs at least one model, size and estimator".into(),
            ));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Parameter(format!("sample sizes must be at least 2, got {n}")));
        }
        self.sampler.validate()
    }
}

pub fn table1_models() -> Vec<BevModel> {
    vec![
        BevModel::logistic(0.7).expect("valid"),
        BevModel::asym_logistic(0.7, 0.5, 0.5).expect("valid"),
        BevModel::husler_reiss(0.7).expect("valid"),
    ]
}

/// Published reference values `(abs bias, rmse)` of the mean-of-maxima
/// estimator, indexed like [`table1_models`] × [`TABLE1_SIZES`].
pub const TABLE1_NEW_REFERENCE: [[(f64, f64); 4]; 3] = [
    [(0.0019, 0.0994), (0.0052, 0.0711), (0.0006, 0.0330), (0.0002, 0.0232)],
    [(0.0085, 0.1147), (0.0053, 0.0824), (0.0020, 0.0389), (0.0014, 0.0287)],
    [(0.0119, 0.1293), (0.0077, 0.0838), (0.0020, 0.0383), (0.0020, 0.0293)],
];

/// Same layout as [`TABLE1_NEW_REFERENCE`], for the Huang estimator.
pub const TABLE1_HUANG_REFERENCE: [[(f64, f64); 4]; 3] = [
    [(0.0395, 0.1962), (0.0389, 0.1412), (0.0216, 0.0883), (0.0099, 0.1379)],
    [(0.0527, 0.1836), (0.0635, 0.1363), (0.0335, 0.0847), (0.0038, 0.1193)],
    [(0.0729, 0.1893), (0.0706, 0.1387), (0.0378, 0.0851), (0.0060, 0.1084)],
];

/// FNV-1a over the model spec, `n` and `r`, finished with the splitmix64 mixer.
pub fn stable_hash(model_spec: &str, n: usize, replication: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = model_spec
        .as_bytes()
        .iter()
        .copied()
        .chain([0xff])
        .chain((n as u64).to_le_bytes())
        .chain((replication as u64).to_le_bytes());
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replication_seed(base_seed: u64, model: &BevModel, n: usize, replication: usize) -> u64 {
    base_seed ^ stable_hash(&model.to_string(), n, replication)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub estimator: Estimator,
    /// Signed mean error `mean(λ̂) - λ`.
    pub bias: f64,
    pub abs_bias: f64,
    pub rmse: f64,
    pub mean: f64,
    /// Sample standard deviation (denominator `R - 1`; 0 when `R = 1`).
    pub std: f64,
    pub replications: usize,
}

impl EstimatorStats {
    fn from_estimates(estimator: Estimator, estimates: &[f64], truth: f64) -> Self {
        let r = estimates.len() as f64;
        let mean = compensated_sum(estimates.iter().copied()) / r;
        let bias = mean - truth;
        let mse = compensated_sum(estimates.iter().map(|x| (x - truth).powi(2))) / r;
        let var = if estimates.len() > 1 {
            compensated_sum(estimates.iter().map(|x| (x - mean).powi(2))) / (r - 1.0)
        } else {
            0.0
        };
        Self {
            estimator,
            bias,
            abs_bias: bias.abs(),
            // mse ≥ bias² up to rounding; keep rmse ≥ |bias| exactly
            rmse: mse.sqrt().max(bias.abs()),
            mean,
            std: var.sqrt(),
            replications: estimates.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCell {
    pub model: String,
    pub family: String,
    pub params: String,
    pub n: usize,
    pub true_tdc: f64,
    pub stats: Vec<EstimatorStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl SimulationCell {
    pub fn stats_for(&self, estimator: Estimator) -> Option<&EstimatorStats> {
        self.stats.iter().find(|s| s.estimator == estimator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub models: Vec<String>,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    pub estimators: Vec<Estimator>,
    pub plateau: PlateauConfig,
    pub sampler_root_tolerance: f64,
    pub sampler_max_bisection_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: ConfigEcho,
    pub cells: Vec<SimulationCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

/// One replication's estimates, indexed like `cfg.estimators`.
fn replicate(cfg: &SimulationConfig, model: &BevModel, n: usize, r: usize) -> Result<Vec<f64>> {
    let sampler = SamplerConfig {
        seed: replication_seed(cfg.base_seed, model, n, r),
        ..cfg.sampler
    };
    let pairs = sample_copula(model, n, &sampler)?;
    let raw = crate::estimators::BivariateSample::new(pairs.iter().map(|p| [p.u, p.v]).collect())?;
    let ps = rank_transform(&raw);
    cfg.estimators
        .iter()
        .map(|e| match e {
            Estimator::New => Ok(tdc_new(&ps).value_raw),
            Estimator::Huang => Ok(tdc_huang_auto(&ps, &cfg.plateau)?.0.value_raw),
        })
        .collect()
}

fn run_cell(cfg: &SimulationConfig, model: &BevModel, n: usize) -> Result<SimulationCell> {
    let start = Instant::now();
    let per_rep: Vec<Vec<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| replicate(cfg, model, n, r))
        .collect::<Result<_>>()?;
    let truth = model.true_tdc();
    let stats = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let xs: Vec<f64> = per_rep.iter().map(|row| row[j]).collect();
            EstimatorStats::from_estimates(e, &xs, truth)
        })
        .collect();
    Ok(SimulationCell {
        model: model.to_string(),
        family: model.family().tag().to_string(),
        params: model.params_string(),
        n,
        true_tdc: truth,
        stats,
        seconds: cfg.record_timings.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Runs the full grid. Any replication failure aborts the study.
pub fn run_study(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut cells = Vec::with_capacity(cfg.models.len() * cfg.sizes.len());
    for model in &cfg.models {
        for &n in &cfg.sizes {
            cells.push(run_cell(cfg, model, n)?);
        }
    }
    Ok(SimulationReport {
        config: ConfigEcho {
            models: cfg.models.iter().map(|m| m.to_string()).collect(),
            sizes: cfg.sizes.clone(),
            replications: cfg.replications,
            base_seed: cfg.base_seed,
            estimators: cfg.estimators.clone(),
            plateau: cfg.plateau,
            sampler_root_tolerance: cfg.sampler.root_tolerance,
            sampler_max_bisection_steps: cfg.sampler.max_bisection_steps,
        },
        cells,
        wall_seconds: cfg.record_timings.then(|| start.elapsed().as_secs_f64()),
    })
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "model", "params", "n", "estimator", "bias", "abs_bias", "rmse", "mean", "std", "seconds",
        ])?;
        for cell in &self.cells {
            for s in &cell.stats {
                out.write_record([
                    cell.family.clone(),
                    cell.params.clone(),
                    cell.n.to_string(),
                    s.estimator.as_str().to_string(),
                    s.bias.to_string(),
                    s.abs_bias.to_string(),
                    s.rmse.to_string(),
                    s.mean.to_string(),
                    s.std.to_string(),
                    cell.seconds.map(|x| x.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub model: String,
    pub n: usize,
    pub rmse_new: f64,
    pub rmse_huang: f64,
    /// `rmse_huang / rmse_new`.
    pub ratio: f64,
    pub new_wins: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub cells: Vec<CellComparison>,
    pub new_wins: usize,
}

/// Per-cell RMSE ratio Huang/New and the number of cells where New is strictly better.
pub fn compare_estimators(report: &SimulationReport) -> Result<Comparison> {
    let mut cells = Vec::with_capacity(report.cells.len());
    for cell in &report.cells {
        let (Some(new), Some(huang)) = (
            cell.stats_for(Estimator::New),
            cell.stats_for(Estimator::Huang),
        ) else {
            return Err(Error::Input(format!(
                "cell {} n={} lacks one of the estimators",
                cell.model, cell.n
            )));
        };
        let ratio = if huang.rmse == new.rmse { 1.0 } else { huang.rmse / new.rmse };
        cells.push(CellComparison {
            model: cell.model.clone(),
            n: cell.n,
            rmse_new: new.rmse,
            rmse_huang: huang.rmse,
            ratio,
            new_wins: new.rmse < huang.rmse,
        });
    }
    let new_wins = cells.iter().filter(|c| c.new_wins).count();
    Ok(Comparison { cells, new_wins })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(models: Vec<BevModel>, sizes: Vec<usize>, reps: usize) -> SimulationConfig {
        SimulationConfig {
            models,
            sizes,
            replications: reps,
            ..SimulationConfig::table1(42)
        }
    }

    #[test]
    fn single_replication_stats() {
        let m = BevModel::logistic(0.7).unwrap();
        let cfg = small(vec![m], vec![50], 1);
        let rep = run_study(&cfg).unwrap();
        let s = rep.cells[0].stats_for(Estimator::New).unwrap();
        let est = replicate(&cfg, &m, 50, 0).unwrap()[0];
        let dev = (est - m.true_tdc()).abs();
        assert!((s.abs_bias - dev).abs() < 1e-15);
        assert!((s.rmse - dev).abs() < 1e-15);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn cells_independent_of_order_and_neighbours() {
        let [a, b, c] = table1_models().try_into().unwrap();
        let one = run_study(&small(vec![a, b], vec![50, 100], 20)).unwrap();
        let two = run_study(&small(vec![c, b], vec![100], 20)).unwrap();
        let find = |r: &SimulationReport, m: &BevModel, n| {
            r.cells.iter().find(|x| x.model == m.to_string() && x.n == n).unwrap().clone()
        };
        assert_eq!(find(&one, &b, 100), find(&two, &b, 100));
    }

    #[test]
    fn deterministic_bytes() {
        let cfg = small(table1_models(), vec![50], 15);
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with("model,params,n,estimator,bias,abs_bias,rmse,mean,std,seconds\n"));
        assert!(text.contains("alog,\"r=0.7,t1=0.5,t2=0.5\",50,new,"));
        for cell in &a.cells {
            for s in &cell.stats {
                assert!(s.rmse >= s.abs_bias);
                assert_eq!(s.replications, 15);
            }
        }
        let back: SimulationReport = serde_json::from_str(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn seeds_distinct() {
        let m = BevModel::logistic(0.7).unwrap();
        let mut seen = std::collections::HashSet::new();
        for n in [50, 100] {
            for r in 0..1000 {
                assert!(seen.insert(replication_seed(42, &m, n, r)));
            }
        }
    }

    #[test]
    fn comparison() {
        let m = BevModel::logistic(0.7).unwrap();
        let mut rep = run_study(&small(vec![m], vec![50], 5)).unwrap();
        let cmp = compare_estimators(&rep).unwrap();
        assert_eq!(cmp.cells.len(), 1);

        let new = rep.cells[0].stats_for(Estimator::New).unwrap().clone();
        rep.cells[0].stats = vec![new.clone(), EstimatorStats { estimator: Estimator::Huang, ..new }];
        let cmp = compare_estimators(&rep).unwrap();
        assert_eq!(cmp.cells[0].ratio, 1.0);
        assert_eq!(cmp.new_wins, 0);

        rep.cells[0].stats.truncate(1);
        assert!(compare_estimators(&rep).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = SimulationConfig::table1(1);
        cfg.replications = 0;
        assert!(run_study(&cfg).is_err());
        let mut cfg = SimulationConfig::table1(1);
        cfg.sizes = vec![1];
        assert!(run_study(&cfg).is_err());
    }
}
