//! Monte Carlo driver: sweep sampling rates, estimate how often every
//! cluster above a size threshold is recovered, and set that beside the
//! closed-form rates.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::bounds;
use crate::clustering::{evaluate_recovery, incomplete_agglomerative, RecoveryReport};
use crate::error::{Error, Result};
use crate::model::{ClusterTree, SimilarityMatrix};
use crate::rng::{self, stream};
use crate::sampling::sample_mask;
use crate::synth::{generate_tc_similarities, generate_tree, ShapeKind, TreeShape};

pub const CSV_HEADER: &str = "p,trials,recovered,rate,ci_low,ci_high,thm1_rate,thm_asym_rate";

/// Confidence level of the reported Wilson intervals.
pub const CI_LEVEL: f64 = 0.95;

const DEFAULT_JITTER: f64 = 0.5;
const DEFAULT_GRID_POINTS: usize = 20;
const DEFAULT_GRID_SPAN: (f64, f64) = (0.25, 1.5);

/// Sampling rates to sweep.
///
/// JSON: a plain array of probabilities, or `{"relative_to_thm1": [...]}`
/// for multipliers of the combined closed-form rate. Omitted means 20
/// evenly spaced multipliers from 0.25 to 1.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    Absolute(Vec<f64>),
    Relative { relative_to_thm1: Vec<f64> },
}

impl Default for PGrid {
    fn default() -> Self {
        let (lo, hi) = DEFAULT_GRID_SPAN;
        let step = (hi - lo) / (DEFAULT_GRID_POINTS - 1) as f64;
        PGrid::Relative {
            relative_to_thm1: (0..DEFAULT_GRID_POINTS).map(|k| lo + step * k as f64).collect(),
        }
    }
}

fn default_jitter() -> f64 {
    DEFAULT_JITTER
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_items: usize,
    pub tree_shape: ShapeKind,
    pub n_min: usize,
    #[serde(default)]
    pub p_grid: PGrid,
    pub trials: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Similarity jitter passed to the generator, in `[0, 1)`.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
    /// Reuse each trial's per-pair uniforms across the whole grid, so the
    /// observed pair sets are nested in `p`. When false every grid point
    /// draws a fresh mask.
    #[serde(default = "default_true")]
    pub common_random_numbers: bool,
}

impl ExperimentConfig {
    pub fn new(n_items: usize, tree_shape: ShapeKind, n_min: usize, trials: usize) -> Self {
        ExperimentConfig {
            n_items,
            tree_shape,
            n_min,
            p_grid: PGrid::default(),
            trials,
            alpha: 0.05,
            kappa: bounds::MIN_KAPPA,
            master_seed: 0,
            output_path: None,
            jitter: DEFAULT_JITTER,
            common_random_numbers: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_items < 2 {
            return bad(format!("n_items must be at least 2, got {}", self.n_items));
        }
        if self.tree_shape == ShapeKind::Balanced && !self.n_items.is_power_of_two() {
            return bad(format!("balanced trees need a power-of-two n_items, got {}", self.n_items));
        }
        if self.n_min == 0 || self.n_min > self.n_items {
            return bad(format!("n_min must lie in [1, {}], got {}", self.n_items, self.n_min));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.kappa >= bounds::MIN_KAPPA) {
            return bad(format!("kappa must be at least {}, got {}", bounds::MIN_KAPPA, self.kappa));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad(format!("jitter must lie in [0, 1), got {}", self.jitter));
        }
        self.resolved_grid().map(|_| ())
    }

    /// Combined closed-form rate for this configuration, when defined
    /// (`4 <= n_min < n_items`).
    pub fn theorem1_rate(&self) -> Option<f64> {
        bounds::theorem1_rate(self.n_items, self.n_min, self.alpha)
            .ok()
            .map(|r| r.probability())
    }

    /// Asymptotic rate with `delta = n_min / n_items`, `beta = 1`, clamped.
    pub fn asymptotic_rate(&self) -> Option<f64> {
        let delta = self.n_min as f64 / self.n_items as f64;
        bounds::theorem3_rate(self.n_items, delta, self.kappa)
            .ok()
            .map(|r| r.probability())
    }

    /// Concrete probabilities, ascending and deduplicated.
    pub fn resolved_grid(&self) -> Result<Vec<f64>> {
        let mut grid = match &self.p_grid {
            PGrid::Absolute(ps) => ps.clone(),
            PGrid::Relative { relative_to_thm1 } => {
                let base = self.theorem1_rate().ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "a relative p_grid needs 4 <= n_min < n_items, got n_min = {}, n_items = {}",
                        self.n_min, self.n_items
                    ))
                })?;
                relative_to_thm1
                    .iter()
                    .map(|m| {
                        if *m >= 0.0 {
                            Ok((m * base).min(1.0))
                        } else {
                            Err(Error::InvalidParameter(format!("negative grid multiplier {m}")))
                        }
                    })
                    .collect::<Result<_>>()?
            }
        };
        if grid.is_empty() {
            return Err(Error::InvalidParameter("p_grid is empty".into()));
        }
        if let Some(p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("p_grid value {p} outside [0, 1]")));
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }

    fn trial_seed(&self, trial_index: u64) -> u64 {
        self.master_seed ^ trial_index
    }

    fn mask_seed(&self, trial_seed: u64, p: f64) -> u64 {
        if self.common_random_numbers {
            trial_seed
        } else {
            rng::derive_seed(trial_seed, stream::MASK, p.to_bits())
        }
    }

    fn instance(&self, trial_index: u64) -> Result<(ClusterTree, SimilarityMatrix, u64)> {
        let seed = self.trial_seed(trial_index);
        let tree = generate_tree(&TreeShape::new(self.tree_shape, self.n_items, seed))?;
        let sim = generate_tc_similarities(&tree, seed, self.jitter)?;
        Ok((tree, sim, seed))
    }
}

/// One draw of the full pipeline: tree, similarities, mask at rate `p`,
/// clustering, recovery scoring. Deterministic in `(config, p, trial_index)`.
pub fn run_trial(config: &ExperimentConfig, p: f64, trial_index: u64) -> Result<RecoveryReport> {
    let (tree, sim, seed) = config.instance(trial_index)?;
    let mask = sample_mask(config.n_items, p, config.mask_seed(seed, p))?;
    let forest = incomplete_agglomerative(&sim, &mask)?;
    evaluate_recovery(&tree, &forest, config.n_min)
}

/// Full-recovery indicator at every grid point for one trial. Shares the
/// tree and similarities across the grid.
fn run_trial_grid(config: &ExperimentConfig, grid: &[f64], trial_index: u64) -> Result<Vec<bool>> {
    let (tree, sim, seed) = config.instance(trial_index)?;
    grid.iter()
        .map(|&p| {
            let mask = sample_mask(config.n_items, p, config.mask_seed(seed, p))?;
            let forest = incomplete_agglomerative(&sim, &mask)?;
            Ok(evaluate_recovery(&tree, &forest, config.n_min)?.fully_recovered)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub trials: usize,
    pub recovered: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub thm1_rate: Option<f64>,
    pub thm_asym_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `outcomes[k][t]`: whether trial `t` fully recovered at `rows[k].p`.
    pub outcomes: Vec<Vec<bool>>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.p,
                r.trials,
                r.recovered,
                r.rate,
                r.ci_low,
                r.ci_high,
                opt(r.thm1_rate),
                opt(r.thm_asym_rate)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Trials whose recovery indicator drops somewhere along the ascending grid.
    pub fn non_monotone_trials(&self) -> Vec<usize> {
        let trials = self.outcomes.first().map_or(0, Vec::len);
        (0..trials)
            .filter(|&t| self.outcomes.windows(2).any(|w| w[0][t] && !w[1][t]))
            .collect()
    }
}

/// Wilson score interval at [`CI_LEVEL`]. A single trial gives `[0, 1]`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials <= 1 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + CI_LEVEL / 2.0);
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// `P(X <= successes)` for `X ~ Binomial(trials, p0)`: the p-value of a
/// one-sided test of `rate >= p0` against `rate < p0`.
pub fn binomial_lower_tail(successes: usize, trials: usize, p0: f64) -> Result<f64> {
    let dist = Binomial::new(p0, trials as u64)
        .map_err(|e| Error::InvalidParameter(format!("binomial({trials}, {p0}): {e}")))?;
    Ok(dist.cdf(successes as u64))
}

/// Runs every `(p, trial)` pair and aggregates by grid point. Trials run in
/// parallel and are reduced by index, so results do not depend on
/// scheduling. Writes CSV to `output_path` when set.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.resolved_grid()?;
    let per_trial: Vec<Vec<bool>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial_grid(config, &grid, t))
        .collect::<Result<_>>()?;

    let thm1 = config.theorem1_rate();
    let asym = config.asymptotic_rate();
    let mut rows = Vec::with_capacity(grid.len());
    let mut outcomes = Vec::with_capacity(grid.len());
    for (k, &p) in grid.iter().enumerate() {
        let column: Vec<bool> = per_trial.iter().map(|row| row[k]).collect();
        let recovered = column.iter().filter(|&&r| r).count();
        let (ci_low, ci_high) = wilson_interval(recovered, config.trials);
        rows.push(SweepRow {
            p,
            trials: config.trials,
            recovered,
            rate: recovered as f64 / config.trials as f64,
            ci_low,
            ci_high,
            thm1_rate: thm1,
            thm_asym_rate: asym,
        });
        outcomes.push(column);
    }
    let result = SweepResult { rows, outcomes };
    if let Some(path) = &config.output_path {
        let mut w = BufWriter::new(File::create(path)?);
        result.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleCheck {
    pub name: &'static str,
    pub rate: f64,
    pub expected_samples: f64,
    pub reported_rate: f64,
    pub reported_samples: Option<f64>,
    pub min_n: u64,
    pub min_n_ok: bool,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperReport {
    pub checks: Vec<ExampleCheck>,
}

impl PaperReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Tolerance on the reproduced rates.
pub const RATE_TOLERANCE: f64 = 5e-4;
/// Relative tolerance on the reproduced expected sample count.
pub const SAMPLE_TOLERANCE: f64 = 1e-3;

/// Recomputes the two published worked examples: 1000 items with clusters of
/// at least 75 (`kappa = 3`, `alpha = 0.05`) and 1000 items with clusters of
/// at least 100 under the linear-size rate.
pub fn reproduce_paper_examples() -> Result<PaperReport> {
    const N: usize = 1000;
    const ALPHA: f64 = 0.05;
    const KAPPA: f64 = 3.0;

    // Clusters of >= 75 items. The stated (delta, beta) = (0.5, 0.66) give
    // delta N^beta ~ 47.8, not 75; the published rate and sample count follow
    // from n = 75, so the rate is evaluated at the cluster size directly and
    // (delta, beta) only feed the minimum-N condition.
    let n75 = 75.0;
    let rate2 = bounds::asymptotic_rate_for_cluster_size(N, n75, KAPPA)?.probability();
    let samples2 = bounds::expected_pairs(N, rate2);
    let min2 = bounds::theorem2_min_n(ALPHA, 0.5, 0.66, KAPPA)?;
    let combined = bounds::theorem1_rate(N, 75, ALPHA)?.probability();
    let pass2 = (rate2 - 0.5526).abs() <= RATE_TOLERANCE
        && ((samples2 - 276_020.0) / 276_020.0).abs() <= SAMPLE_TOLERANCE
        && min2 <= N as u64;

    let delta3 = 0.1;
    let rate3 = bounds::theorem3_rate(N, delta3, KAPPA)?.probability();
    let min3 = bounds::theorem3_min_n(ALPHA, delta3, KAPPA)?;
    let pass3 = (rate3 - 0.4145).abs() <= RATE_TOLERANCE && rate3 < 0.42 && min3 <= N as u64;

    Ok(PaperReport {
        checks: vec![
            ExampleCheck {
                name: "clusters>=75 of 1000 (kappa=3)",
                rate: rate2,
                expected_samples: samples2,
                reported_rate: 0.5526,
                reported_samples: Some(276_020.0),
                min_n: min2,
                min_n_ok: min2 <= N as u64,
                pass: pass2,
                note: format!(
                    "combined finite-N rate {combined:.4} <= {rate2:.4}; 0.5*1000^0.66 = {:.1}",
                    0.5 * (N as f64).powf(0.66)
                ),
            },
            ExampleCheck {
                name: "clusters>=100 of 1000 (linear size, kappa=3)",
                rate: rate3,
                expected_samples: bounds::expected_pairs(N, rate3),
                reported_rate: 0.42,
                reported_samples: None,
                min_n: min3,
                min_n_ok: min3 <= N as u64,
                pass: pass3,
                note: format!(
                    "fraction of pairs {rate3:.4} < 0.42; (2k/d) N ln N = {:.0}",
                    2.0 * KAPPA / delta3 * N as f64 * (N as f64).ln()
                ),
            },
        ],
    })
}
