use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sparseclust::bounds;
use sparseclust::clustering::{evaluate_recovery, incomplete_agglomerative, incomplete_agglomerative_naive, MergeForest};
use sparseclust::harness::{self, ExperimentConfig};
use sparseclust::model::{hierarchy_from_json, ClusterTree, ObservationMask, SimilarityMatrix};
use sparseclust::sampling::sample_mask;
use sparseclust::synth::{generate_tc_similarities, generate_tree, ShapeKind, TreeShape};
use sparseclust::Error;

const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "sparseclust", version, about = "Hierarchical clustering from sampled pairwise similarities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random hierarchy and a similarity matrix consistent with it.
    Generate {
        #[arg(long, value_parser = parse_shape)]
        shape: ShapeKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        jitter: f64,
        #[arg(long)]
        out_tree: PathBuf,
        /// `.csv` writes CSV, anything else the SPCL binary format.
        #[arg(long)]
        out_sim: PathBuf,
    },
    /// Draw a Bernoulli observation mask.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster observed similarities into a merge forest.
    Cluster {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the O(N^3) full-scan implementation.
        #[arg(long)]
        naive: bool,
    },
    /// Score a merge forest against the true hierarchy.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        forest: PathBuf,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a sampling-rate bound or connectivity inequality.
    Bounds {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, default_value_t = 1000)]
        n_items: usize,
        #[arg(long, default_value_t = 75)]
        cluster_size: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 3.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.66)]
        beta: f64,
        /// Edge probability for `gilbert`; `lemma1` uses q = 1 - p.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Monte Carlo sweep over sampling rates.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n_items: Option<usize>,
        #[arg(long, value_parser = parse_shape)]
        shape: Option<ShapeKind>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        master_seed: Option<u64>,
        /// Absolute sampling rates, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Fresh mask per grid point instead of common random numbers.
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the published worked examples.
    ReproducePaper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    #[value(name = "1")]
    Combined,
    #[value(name = "2")]
    Power,
    #[value(name = "3")]
    Linear,
    Prop2,
    Prop3,
    Gilbert,
    Lemma1,
}

fn parse_shape(s: &str) -> Result<ShapeKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_INVALID,
            })
        }
    }
}

fn read_text(path: &Path) -> sparseclust::Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn write_text(path: &Path, text: &str) -> sparseclust::Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_similarities(path: &Path) -> sparseclust::Result<SimilarityMatrix> {
    let r = BufReader::new(File::open(path)?);
    if is_csv(path) {
        SimilarityMatrix::read_csv(r)
    } else {
        SimilarityMatrix::read_binary(r)
    }
}

fn read_tree(path: &Path) -> sparseclust::Result<ClusterTree> {
    ClusterTree::from_hierarchy(&hierarchy_from_json(&read_text(path)?)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn run(command: Command) -> sparseclust::Result<()> {
    match command {
        Command::Generate {
            shape,
            n,
            seed,
            jitter,
            out_tree,
            out_sim,
        } => {
            let tree = generate_tree(&TreeShape::new(shape, n, seed))?;
            let sim = generate_tc_similarities(&tree, seed, jitter)?;
            write_text(&out_tree, &serde_json::to_string(&tree.to_hierarchy())?)?;
            let mut w = BufWriter::new(File::create(&out_sim)?);
            if is_csv(&out_sim) {
                sim.write_csv(&mut w)?;
            } else {
                sim.write_binary(&mut w)?;
            }
            w.flush()?;
        }
        Command::Sample { n, p, seed, out } => {
            let mask = sample_mask(n, p, seed)?;
            let mut w = BufWriter::new(File::create(&out)?);
            mask.write_csv(&mut w)?;
            w.flush()?;
            eprintln!("observed {} of {} pairs", mask.count(), n * n.saturating_sub(1) / 2);
        }
        Command::Cluster { sim, mask, out, naive } => {
            let sim = read_similarities(&sim)?;
            let mask = ObservationMask::read_csv(BufReader::new(File::open(&mask)?), Some(sim.n()))?;
            let forest = if naive {
                incomplete_agglomerative_naive(&sim, &mask)?
            } else {
                incomplete_agglomerative(&sim, &mask)?
            };
            write_text(&out, &forest.to_json()?)?;
            if forest.forced_halt() {
                eprintln!("halted with {} disconnected roots", forest.roots().len());
            }
        }
        Command::Evaluate {
            truth,
            forest,
            n_min,
            out,
        } => {
            let tree = read_tree(&truth)?;
            let forest = MergeForest::from_json(&read_text(&forest)?)?;
            let report = evaluate_recovery(&tree, &forest, n_min)?;
            let text = report.to_json()?;
            match out {
                Some(path) => write_text(&path, &text)?,
                None => println!("{text}"),
            }
            eprintln!(
                "recovered {}/{} clusters of size >= {}",
                report.recovered, report.total_clusters, n_min
            );
        }
        Command::Bounds {
            theorem,
            n_items,
            cluster_size,
            alpha,
            kappa,
            delta,
            beta,
            p,
        } => print_json(&bounds_json(theorem, n_items, cluster_size, alpha, kappa, delta, beta, p)?),
        Command::Sweep {
            config,
            n_items,
            shape,
            n_min,
            trials,
            master_seed,
            p,
            independent,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => serde_json::from_str::<ExperimentConfig>(&read_text(path)?)?,
                None => {
                    let n = n_items.ok_or_else(|| {
                        Error::InvalidParameter("sweep needs --config or --n-items".into())
                    })?;
                    let shape = shape.unwrap_or(ShapeKind::RandomUnbalanced);
                    ExperimentConfig::new(n, shape, n_min.unwrap_or(4), trials.unwrap_or(100))
                }
            };
            if let Some(v) = n_items {
                cfg.n_items = v;
            }
            if let Some(v) = shape {
                cfg.tree_shape = v;
            }
            if let Some(v) = n_min {
                cfg.n_min = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = master_seed {
                cfg.master_seed = v;
            }
            if let Some(v) = p {
                cfg.p_grid = harness::PGrid::Absolute(v);
            }
            if independent {
                cfg.common_random_numbers = false;
            }
            if out.is_some() {
                cfg.output_path = out;
            }
            let result = harness::sweep(&cfg)?;
            if cfg.output_path.is_none() {
                result.write_csv(io::stdout().lock())?;
            }
        }
        Command::ReproducePaper => {
            let report = harness::reproduce_paper_examples()?;
            for c in &report.checks {
                println!(
                    "[{}] {}: p = {:.5} (reported {}), expected pairs = {:.0}{}, min N = {} ({})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.rate,
                    c.reported_rate,
                    c.expected_samples,
                    c.reported_samples
                        .map(|s| format!(" (reported {s:.0})"))
                        .unwrap_or_default(),
                    c.min_n,
                    if c.min_n_ok { "satisfied" } else { "NOT satisfied" },
                );
                println!("       {}", c.note);
            }
            if !report.all_pass() {
                return Err(Error::InvalidParameter("worked example mismatch".into()));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bounds_json(
    theorem: Theorem,
    n_items: usize,
    cluster_size: usize,
    alpha: f64,
    kappa: f64,
    delta: f64,
    beta: f64,
    p: f64,
) -> sparseclust::Result<Value> {
    let finite = |rate: bounds::Rate| {
        json!({
            "rate": rate.probability(),
            "raw_rate": rate.raw,
            "expected_samples": bounds::expected_pairs(n_items, rate.probability()),
            "min_n_ok": true,
        })
    };
    Ok(match theorem {
        Theorem::Combined => finite(bounds::theorem1_rate(n_items, cluster_size, alpha)?),
        Theorem::Prop2 => finite(bounds::prop2_rate(n_items, cluster_size, alpha)?),
        Theorem::Prop3 => finite(bounds::prop3_rate(n_items, cluster_size, alpha)?),
        Theorem::Power | Theorem::Linear => {
            let beta = if matches!(theorem, Theorem::Linear) { 1.0 } else { beta };
            let s = bounds::theorem2_summary(n_items, alpha, delta, beta, kappa)?;
            if !s.min_n_ok {
                eprintln!("warning: N = {n_items} is below the minimum N = {} for this rate", s.min_n);
            }
            json!({
                "rate": s.rate,
                "raw_rate": s.raw_rate,
                "expected_samples": s.expected_samples,
                "expected_matrix_entries": s.expected_matrix_entries,
                "cluster_size": s.cluster_size,
                "min_n": s.min_n,
                "min_n_ok": s.min_n_ok,
            })
        }
        Theorem::Gilbert => {
            let raw = bounds::gilbert_lower_bound(cluster_size, p)?;
            json!({ "rate": raw.clamp(0.0, 1.0), "raw_rate": raw, "expected_samples": null, "min_n_ok": null })
        }
        Theorem::Lemma1 => {
            let l = bounds::lemma1_check(cluster_size, 1.0 - p)?;
            json!({ "lhs": l.lhs, "rhs": l.rhs, "holds": l.holds, "rate": null, "expected_samples": null, "min_n_ok": null })
        }
    })
}
