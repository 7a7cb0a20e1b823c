//! Acceptance criteria. Run with `--nocapture` to see one line per criterion.

mod common;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::ThreadPoolBuilder;
use sparseclust::bounds::{self, gilbert_lower_bound, lemma1_check};
use sparseclust::clustering::{evaluate_recovery, incomplete_agglomerative};
use sparseclust::harness::{binomial_lower_tail, reproduce_paper_examples, sweep, ExperimentConfig, PGrid};
use sparseclust::model::{ClusterTree, Hierarchy, ObservationMask};
use sparseclust::sampling::{build_graph, sample_mask};
use sparseclust::synth::{generate_tc_similarities, ShapeKind};

use common::{
    bfs_connected, connected_graph_counts, connected_probability_enumerated, connected_probability_recurrence,
    random_tree,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn worked_examples() -> Outcome {
    let report = reproduce_paper_examples().unwrap();
    let power = &report.checks[0];
    let linear = &report.checks[1];
    let pass = (power.rate - 0.5526).abs() <= 5e-4
        && ((power.expected_samples - 276_020.0) / 276_020.0).abs() <= 1e-3
        && (linear.rate - 0.4145).abs() <= 5e-4
        && linear.rate < 0.42
        && report.all_pass();
    Outcome {
        pass,
        detail: format!(
            "p = {:.5}, pairs = {:.0}; linear p = {:.5}",
            power.rate, power.expected_samples, linear.rate
        ),
    }
}

fn full_observation_recovery() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0xacce);
    let mut failures = 0;
    for case in 0..100u64 {
        let tree = random_tree(case, rng.gen_range(8..=128), rng.gen());
        let sim = generate_tc_similarities(&tree, rng.gen(), rng.gen_range(0.05..0.99)).unwrap();
        let forest = incomplete_agglomerative(&sim, &ObservationMask::full(tree.n_items())).unwrap();
        if forest.to_tree().map(|t| t.cluster_set(1)) != Some(tree.cluster_set(1)) {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{failures} of 100 instances differ from the true tree"),
    }
}

fn recovered_iff_connected(tree: &ClusterTree, mask: &ObservationMask, seed: u64, jitter: f64) -> usize {
    let sim = generate_tc_similarities(tree, seed, jitter).unwrap();
    let graph = build_graph(mask);
    let report = evaluate_recovery(tree, &incomplete_agglomerative(&sim, mask).unwrap(), 2).unwrap();
    report
        .per_cluster
        .iter()
        .filter(|(c, &hit)| hit != bfs_connected(&graph, c.items()))
        .count()
}

fn recovery_connectivity_equivalence() -> Outcome {
    let h = Hierarchy::branch(
        Hierarchy::branch(Hierarchy::leaf(0), Hierarchy::leaf(1)),
        Hierarchy::branch(Hierarchy::branch(Hierarchy::leaf(2), Hierarchy::leaf(3)), Hierarchy::leaf(4)),
    );
    let tree = ClusterTree::from_hierarchy(&h).unwrap();
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| ((i + 1)..5).map(move |j| (i, j))).collect();
    let mut mismatches = 0;
    for bits in 0u32..1024 {
        let mask = ObservationMask::from_pairs(5, 0.5, (0..10).filter(|k| bits >> k & 1 == 1).map(|k| pairs[k])).unwrap();
        mismatches += recovered_iff_connected(&tree, &mask, 5, 0.5);
    }
    let exhaustive = mismatches;

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x9e37);
    for case in 0..1000u64 {
        let tree = random_tree(case, rng.gen_range(3..=64), rng.gen());
        let mask = sample_mask(tree.n_items(), rng.gen_range(0.02..0.95), rng.gen()).unwrap();
        mismatches += recovered_iff_connected(&tree, &mask, rng.gen(), rng.gen_range(0.01..0.99));
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!(
            "{exhaustive} mismatches over 1024 masks, {} over 1000 random instances",
            mismatches - exhaustive
        ),
    }
}

fn gilbert_below_exact() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for n in 4..=8usize {
        let counts = (n <= 6).then(|| connected_graph_counts(n));
        for k in 1..=19 {
            let p = k as f64 * 0.05;
            let exact = match &counts {
                Some(c) => connected_probability_enumerated(c, p),
                None => connected_probability_recurrence(n, p),
            };
            worst = worst.max(gilbert_lower_bound(n, p).unwrap() - exact);
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max(bound - exact) = {worst:.3e}"),
    }
}

fn lemma1_grid() -> Outcome {
    let mut violations = 0;
    for n in 4..=200 {
        for k in 0..=100 {
            if !lemma1_check(n, k as f64 / 100.0).unwrap().holds {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} violations over n in 4..=200, q in 0..=1 step 0.01"),
    }
}

fn linear_rate_validation() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (n_items, n_min, seed) in [(256usize, 16usize, 11u64), (512, 32, 12)] {
        let delta = n_min as f64 / n_items as f64;
        let rate = bounds::theorem3_rate(n_items, delta, 3.0).unwrap();
        let p = rate.probability();
        let mut config = ExperimentConfig::new(n_items, ShapeKind::Balanced, n_min, 200);
        config.master_seed = seed;
        config.p_grid = PGrid::Absolute(vec![p]);
        let row = &sweep(&config).unwrap().rows[0];
        let p_value = binomial_lower_tail(row.recovered, row.trials, 0.95).unwrap();
        pass &= p_value >= 0.01;
        details.push(format!(
            "N={n_items}: raw rate {:.3} -> p = {p}, {}/{} recovered, p-value {p_value:.3}",
            rate.raw, row.recovered, row.trials
        ));
    }
    Outcome {
        pass,
        detail: details.join("; "),
    }
}

fn common_random_numbers_monotone() -> Outcome {
    let mut violations = 0;
    let mut runs = 0;
    for (n, shape, n_min) in [
        (64usize, ShapeKind::RandomUnbalanced, 4usize),
        (128, ShapeKind::Balanced, 8),
        (48, ShapeKind::Caterpillar, 2),
    ] {
        let mut config = ExperimentConfig::new(n, shape, n_min, 100);
        config.master_seed = n as u64;
        config.p_grid = PGrid::Absolute((1..=20).map(|k| k as f64 / 20.0).collect());
        let result = sweep(&config).unwrap();
        violations += result.non_monotone_trials().len();
        runs += config.trials;
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} non-monotone trials out of {runs}"),
    }
}

fn sweep_reproducible() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::new(96, ShapeKind::RandomUnbalanced, 6, 60);
    config.master_seed = 31337;
    let mut files = Vec::new();
    for (run, threads) in [(0, 1usize), (1, 4)] {
        config.output_path = Some(dir.path().join(format!("run{run}.csv")));
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sweep(&config)).unwrap();
        files.push(std::fs::read(config.output_path.as_ref().unwrap()).unwrap());
    }
    Outcome {
        pass: files[0] == files[1] && !files[0].is_empty(),
        detail: format!("{} bytes, 1 thread vs 4 threads", files[0].len()),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("worked examples", worked_examples),
        ("full observation recovers the tree", full_observation_recovery),
        ("recovered iff induced subgraph connected", recovery_connectivity_equivalence),
        ("connectivity lower bound below exact probability", gilbert_below_exact),
        ("middle-term inequality", lemma1_grid),
        ("recovery at the linear-size rate", linear_rate_validation),
        ("monotone recovery under common random numbers", common_random_numbers_monotone),
        ("sweep output reproducible", sweep_reproducible),
    ];
    let mut failed = Vec::new();
    println!();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name} ({})", k + 1, outcome.detail);
        if !outcome.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
