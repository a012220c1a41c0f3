use std::collections::{BTreeMap, HashMap, HashSet};

use bimap_lab::bdg::forward_bdg;
use bimap_lab::oracle::{enumerate_mobiles, enumerate_trees, exact_tree_law, tree_code, tree_weight};
use bimap_lab::sampler::{
    cycle_shift_increments, decode_increments, sample_mobile, sample_nu_bridge_naive, sample_rooted_mobile,
    unconditioned_edge_count, OffspringLaws, DEFAULT_MAX_ATTEMPTS,
};
use bimap_lab::stats::chi_square_gof;
use bimap_lab::{Mobile, RngState};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

const MIN_P: f64 = 1e-4;

fn key(m: &Mobile) -> String {
    m.to_text(0)
}

#[test]
fn mobiles_are_uniform_for_small_n() {
    let mut rng = RngState::new(101).rng();
    for n in 1..=4usize {
        let all = enumerate_mobiles(n).unwrap();
        let index: HashMap<String, usize> = all.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
        let mut counts = vec![0u64; all.len()];
        let samples = 400 * all.len();
        for _ in 0..samples {
            let m = sample_mobile(n, &mut rng).unwrap();
            counts[index[&key(&m)]] += 1;
        }
        let probs = vec![1.0 / all.len() as f64; all.len()];
        let chi = chi_square_gof(&counts, &probs, 5.0);
        assert!(chi.p_value > MIN_P, "n={n}: {chi:?}");
    }
}

#[test]
fn naive_bridge_gives_the_exact_tree_law() {
    let laws = OffspringLaws::default();
    let mut rng = RngState::new(102).rng();
    let law = exact_tree_law(3).unwrap();
    let index: BTreeMap<String, usize> = law.iter().enumerate().map(|(i, (t, _))| (tree_code(t), i)).collect();
    let mut counts = vec![0u64; law.len()];
    for _ in 0..20_000 {
        let jumps = sample_nu_bridge_naive(3, &laws, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
        let t = decode_increments(&cycle_shift_increments(&jumps).unwrap()).unwrap();
        counts[index[&tree_code(&t)]] += 1;
    }
    let probs: Vec<f64> = law.iter().map(|(_, p)| p.to_f64().unwrap()).collect();
    let chi = chi_square_gof(&counts, &probs, 5.0);
    assert!(chi.p_value > MIN_P, "{chi:?}");
}

#[test]
fn unconditioned_size_law_matches_tree_weights() {
    let laws = OffspringLaws::default();
    let mut rng = RngState::new(103).rng();
    let samples = 200_000u64;
    let mut counts = vec![0u64; 5];
    for _ in 0..samples {
        match unconditioned_edge_count(&laws, &mut rng, 1000) {
            Some(e) if e < 4 => counts[e] += 1,
            _ => counts[4] += 1,
        }
    }
    let mut probs: Vec<f64> = (0..4)
        .map(|n| {
            enumerate_trees(n)
                .iter()
                .map(tree_weight)
                .fold(BigRational::zero(), |a, b| a + b)
                .to_f64()
                .unwrap()
        })
        .collect();
    assert!((probs[0] - 2.0 / 3.0).abs() < 1e-15);
    probs.push(1.0 - probs.iter().sum::<f64>());
    let chi = chi_square_gof(&counts, &probs, 5.0);
    assert!(chi.p_value > MIN_P, "{chi:?} {counts:?} {probs:?}");
}

fn rooted_classes(n: usize) -> Vec<Vec<u8>> {
    let mut codes = HashSet::new();
    for m in enumerate_mobiles(n).unwrap() {
        for eps in 0..2 {
            codes.insert(forward_bdg(&m, eps).with_origin(None).canonical_code());
        }
    }
    codes.into_iter().collect()
}

#[test]
fn rooted_sampler_is_uniform_over_rooted_maps() {
    assert_eq!(rooted_classes(1).len(), 1);
    assert_eq!(rooted_classes(2).len(), 3);
    let mut rng = RngState::new(104).rng();
    for n in [2usize, 3] {
        let classes = rooted_classes(n);
        if n == 3 {
            assert_eq!(classes.len(), 12);
        }
        let index: HashMap<&[u8], usize> = classes.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
        let mut counts = vec![0u64; classes.len()];
        for _ in 0..2000 * classes.len() {
            let m = sample_rooted_mobile(n, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
            let eps = rng.random_range(0..2u8);
            let code = forward_bdg(&m, eps).with_origin(None).canonical_code();
            counts[index[code.as_slice()]] += 1;
        }
        let probs = vec![1.0 / classes.len() as f64; classes.len()];
        let chi = chi_square_gof(&counts, &probs, 5.0);
        assert!(chi.p_value > MIN_P, "n={n}: {chi:?} {counts:?}");
    }
}

#[test]
fn pointed_sampler_is_biased_by_vertex_count() {
    // Under the pointed law a rooted map with V vertices has weight V.
    let mut rng = RngState::new(105).rng();
    let mut weights: HashMap<Vec<u8>, usize> = HashMap::new();
    for m in enumerate_mobiles(2).unwrap() {
        for eps in 0..2 {
            let map = forward_bdg(&m, eps);
            *weights.entry(map.with_origin(None).canonical_code()).or_default() += 1;
            assert!(map.vertex_count() >= 2);
        }
    }
    let mut v: Vec<usize> = weights.values().copied().collect();
    v.sort();
    assert_eq!(v, vec![2, 3, 3]);
    let mut hits = 0usize;
    let reps = 20_000;
    for _ in 0..reps {
        let m = sample_mobile(2, &mut rng).unwrap();
        if forward_bdg(&m, 0).vertex_count() == 2 {
            hits += 1;
        }
    }
    let freq = hits as f64 / reps as f64;
    assert!((freq - 0.25).abs() < 0.015, "{freq}");
}
