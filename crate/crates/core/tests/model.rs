mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use sparseclust::model::{
    check_tc, check_tc_direct, prune_to_size, ClusterTree, ItemId, LeafSet, SimilarityMatrix, TcCheck,
};
use sparseclust::synth::generate_tc_similarities;

use common::{brute_force_lca, random_tree};

fn perturb(sim: &SimilarityMatrix, rng: &mut impl Rng, flips: usize) -> SimilarityMatrix {
    let n = sim.n();
    let mut values: Vec<f64> = (0..n * n).map(|k| sim.get(k / n, k % n)).collect();
    for _ in 0..flips {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            let v = rng.gen_range(0.05..1.2);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    SimilarityMatrix::new(n, values).unwrap()
}

fn assert_witness(tree: &ClusterTree, sim: &SimilarityMatrix, i: usize, j: usize, k: usize) {
    // k outside the smallest cluster holding i and j, yet at least as similar.
    let c = tree.lca(ItemId(i), ItemId(j)).unwrap();
    assert!(!tree.leaves(c).contains(&ItemId(k)));
    assert!(sim.get(i, j) <= sim.get(i, k).max(sim.get(j, k)));
}

#[test]
fn fast_and_direct_tc_checks_agree() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let mut violated = 0;
    for case in 0..300u64 {
        let n = rng.gen_range(3..=32);
        let tree = random_tree(case, n, case);
        let sim = generate_tc_similarities(&tree, case, 0.7).unwrap();
        assert_eq!(check_tc(&tree, &sim).unwrap(), TcCheck::Holds);
        assert_eq!(check_tc_direct(&tree, &sim).unwrap(), TcCheck::Holds);

        let bad = perturb(&sim, &mut rng, 1 + case as usize % 4);
        let fast = check_tc(&tree, &bad).unwrap();
        let direct = check_tc_direct(&tree, &bad).unwrap();
        assert_eq!(fast.holds(), direct.holds(), "case {case}");
        for verdict in [fast, direct] {
            if let TcCheck::Violated { i, j, k } = verdict {
                assert_witness(&tree, &bad, i.0, j.0, k.0);
                violated += 1;
            }
        }
    }
    assert!(violated > 100);
}

#[test]
fn lca_matches_subset_scan() {
    for case in 0..30u64 {
        let tree = random_tree(case, 5 + case as usize * 2, case);
        let n = tree.n_items();
        for i in 0..n {
            for j in (i + 1)..n {
                let fast = tree.lca(ItemId(i), ItemId(j)).unwrap();
                assert_eq!(fast, brute_force_lca(&tree, i, j));
                assert_eq!(fast, tree.lca(ItemId(j), ItemId(i)).unwrap());
            }
        }
    }
}

#[test]
fn cluster_count_is_two_n_minus_one() {
    for case in 0..30u64 {
        let tree = random_tree(case, 2 + case as usize * 3, case);
        let n = tree.n_items();
        assert_eq!(tree.len(), 2 * n - 1);
        assert_eq!(tree.cluster_set(1).len(), 2 * n - 1);
        let singletons = tree.cluster_set(1).iter().filter(|c| c.len() == 1).count();
        assert_eq!(singletons, n);
    }
}

#[test]
fn relabel_moves_lcas() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let tree = random_tree(1, 20, 9);
    let mut perm: Vec<usize> = (0..20).collect();
    perm.shuffle(&mut rng);
    let moved = tree.relabel(&perm).unwrap();
    for i in 0..20 {
        for j in (i + 1)..20 {
            let a = tree.leaf_set(tree.lca(ItemId(i), ItemId(j)).unwrap());
            let b = moved.leaf_set(moved.lca(ItemId(perm[i]), ItemId(perm[j])).unwrap());
            let mapped = LeafSet::new(a.items().iter().map(|&x| perm[x]).collect());
            assert_eq!(mapped, b);
        }
    }
}

proptest! {
    #[test]
    fn pruned_leaf_clusters_partition_items(kind in 0u64..3, n in 2usize..80, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let tree = random_tree(kind, n, seed);
        let n = tree.n_items();
        let n_min = 1 + (frac * (n - 1) as f64) as usize;
        let pruned = prune_to_size(&tree, n_min).unwrap();
        let mut seen = BTreeSet::new();
        for leaf in pruned.leaf_clusters() {
            for &x in leaf.items() {
                prop_assert!(seen.insert(x));
            }
        }
        prop_assert_eq!(seen.len(), n);
        let truth = tree.cluster_set(1);
        for node in &pruned.nodes {
            prop_assert!(truth.contains(&node.leaf_set));
            if node.children.is_some() {
                prop_assert!(node.leaf_set.len() >= n_min);
            }
        }
    }

    #[test]
    fn hierarchy_round_trips(kind in 0u64..3, n in 2usize..60, seed in any::<u64>()) {
        let tree = random_tree(kind, n, seed);
        let back = ClusterTree::from_hierarchy(&tree.to_hierarchy()).unwrap();
        prop_assert_eq!(back.cluster_set(1), tree.cluster_set(1));
        let json = serde_json::to_string(&tree.to_hierarchy()).unwrap();
        let parsed = sparseclust::model::hierarchy_from_json(&json).unwrap();
        prop_assert_eq!(parsed, tree.to_hierarchy());
    }

    #[test]
    fn similarity_binary_and_csv_round_trip(n in 2usize..20, seed in any::<u64>()) {
        let tree = random_tree(1, n, seed);
        let sim = generate_tc_similarities(&tree, seed, 0.5).unwrap();
        let mut bin = Vec::new();
        sim.write_binary(&mut bin).unwrap();
        prop_assert_eq!(&SimilarityMatrix::read_binary(&bin[..]).unwrap(), &sim);
        let mut csv = Vec::new();
        sim.write_csv(&mut csv).unwrap();
        prop_assert_eq!(&SimilarityMatrix::read_csv(&csv[..]).unwrap(), &sim);
    }
}
