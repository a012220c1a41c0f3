//! Ground truth: exhaustive enumeration, exact conditioned laws, and an
//! independent sampler of uniform quadrangulations.

use std::collections::HashSet;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::Rng;

use crate::bdg::{close_corners, forward_bdg};
use crate::error::{Error, Result};
use crate::map::CombinatorialMap;
use crate::model::{central_binomial_odd, Mobile, PlaneTree};
use crate::rng::LabRng;
use crate::sampler::cycle_shift_increments;

pub const ENUMERATION_LIMIT: usize = 6;

fn guard(n: usize) -> Result<()> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// All plane trees with `n` edges, in lexicographic order of child counts.
pub fn enumerate_trees(n: usize) -> Vec<PlaneTree> {
    fn rec(prefix: &mut Vec<u32>, open: usize, left: usize, out: &mut Vec<PlaneTree>) {
        if open == 0 {
            if left == 0 {
                out.push(PlaneTree::from_child_counts(prefix.clone()).unwrap());
            }
            return;
        }
        for k in 0..=left {
            prefix.push(k as u32);
            rec(prefix, open - 1 + k, left - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, n, &mut out);
    out
}

/// Every admissible increment sequence around a black vertex with `k` children.
fn black_increments(k: usize) -> Vec<Vec<i64>> {
    // k + 1 increments ≥ −1 summing to 0.
    fn rec(slots: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slots == 1 {
            cur.push(budget);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        let rest_min = -(slots as i64 - 1);
        for x in -1..=(budget - rest_min) {
            cur.push(x);
            rec(slots - 1, budget - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k + 1, 0, &mut Vec::new(), &mut out);
    out
}

/// All admissible labelings of `tree`.
pub fn enumerate_labelings(tree: &PlaneTree) -> Vec<Mobile> {
    let blacks: Vec<usize> = tree.blacks().collect();
    let choices: Vec<Vec<Vec<i64>>> = blacks
        .iter()
        .map(|&b| black_increments(tree.children(b).len()))
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; blacks.len()];
    loop {
        let mut labels = vec![0i64; tree.white_count()];
        // Blacks come in preorder, so parents are labeled first.
        for (bi, &b) in blacks.iter().enumerate() {
            let p = tree.parent(b).unwrap();
            let mut l = labels[tree.white_rank(p).unwrap()];
            for (c, d) in tree.children(b).iter().zip(&choices[bi][pick[bi]]) {
                l += d;
                labels[tree.white_rank(*c as usize).unwrap()] = l;
            }
        }
        out.push(Mobile::new(tree.clone(), labels).expect("admissible by construction"));
        let mut i = 0;
        loop {
            if i == blacks.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Every mobile with `n` edges, each exactly once.
pub fn enumerate_mobiles(n: usize) -> Result<Vec<Mobile>> {
    guard(n)?;
    Ok(enumerate_trees(n).iter().flat_map(enumerate_labelings).collect())
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow(base: &BigRational, e: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= base;
    }
    r
}

/// μ0(k) as an exact rational.
pub fn mu0_rational(k: u32) -> BigRational {
    ratio(2, 3) * pow(&ratio(1, 3), k)
}

/// μ1(k) as an exact rational.
pub fn mu1_rational(k: u32) -> BigRational {
    let c = BigInt::from(central_binomial_odd(k as u64));
    ratio(3, 8) * BigRational::from_integer(c) * pow(&ratio(3, 16), k)
}

/// Unconditioned probability of a two-type tree.
pub fn tree_weight(tree: &PlaneTree) -> BigRational {
    let mut w = BigRational::one();
    for (v, &k) in tree.child_counts().iter().enumerate() {
        w *= if tree.is_white(v) { mu0_rational(k) } else { mu1_rational(k) };
    }
    w
}

/// Exact law of the tree conditioned to have `n` edges.
pub fn exact_tree_law(n: usize) -> Result<Vec<(PlaneTree, BigRational)>> {
    guard(n)?;
    let trees = enumerate_trees(n);
    let weights: Vec<BigRational> = trees.iter().map(tree_weight).collect();
    let total = weights.iter().fold(BigRational::zero(), |a, b| a + b);
    Ok(trees.into_iter().zip(weights).map(|(t, w)| (t, w / &total)).collect())
}

pub fn tree_code(tree: &PlaneTree) -> String {
    tree.child_counts()
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

pub fn write_law_csv<W: Write>(law: &[(PlaneTree, BigRational)], mut w: W) -> Result<()> {
    writeln!(w, "treeCode,p_num,p_den")?;
    for (t, p) in law {
        writeln!(w, "{},{},{}", tree_code(t), p.numer(), p.denom())?;
    }
    Ok(())
}

/// `2 · #mobiles(n)`.
pub fn count_rooted_pointed_maps(n: usize) -> Result<BigUint> {
    guard(n)?;
    let mobiles: BigUint = enumerate_trees(n).iter().map(|t| t.count_labelings()).sum();
    Ok(mobiles * 2u32)
}

/// Distinct canonical codes of `forward_bdg` over all mobiles and both orientations.
pub fn canonical_code_census(n: usize) -> Result<usize> {
    let mut codes = HashSet::new();
    for m in enumerate_mobiles(n)? {
        for eps in 0..2 {
            codes.insert(forward_bdg(&m, eps).canonical_code());
        }
    }
    Ok(codes.len())
}

/// Uniform plane tree with `edges` edges.
pub fn sample_uniform_plane_tree(edges: usize, rng: &mut LabRng) -> PlaneTree {
    // Uniform composition of `edges` into `edges + 1` parts, then rotated.
    let slots = 2 * edges;
    let mut bar = vec![false; slots];
    for i in index::sample(rng, slots, edges) {
        bar[i] = true;
    }
    let mut jumps = Vec::with_capacity(edges + 1);
    let mut stars = 0i64;
    for &b in &bar {
        if b {
            jumps.push(stars - 1);
            stars = 0;
        } else {
            stars += 1;
        }
    }
    jumps.push(stars - 1);
    let rotated = cycle_shift_increments(&jumps).expect("composition gives a bridge");
    PlaneTree::from_child_counts(rotated.iter().map(|&x| (x + 1) as u32).collect())
        .expect("rotation is a valid encoding")
}

/// Uniform rooted pointed quadrangulation with `faces` faces.
///
/// The map is produced by joining the corners of a uniform labeled plane
/// tree (label increments uniform in {−1, 0, 1}) to their successors.
pub fn sample_quadrangulation(faces: usize, rng: &mut LabRng) -> CombinatorialMap {
    quadrangulation_with_labels(faces, rng).0
}

/// Same as [`sample_quadrangulation`], also returning the label of each tree corner.
pub fn quadrangulation_with_labels(faces: usize, rng: &mut LabRng) -> (CombinatorialMap, Vec<i64>) {
    let tree = sample_uniform_plane_tree(faces, rng);
    let mut labels = vec![0i64; tree.vertex_count()];
    for v in 1..tree.vertex_count() {
        labels[v] = labels[tree.parent(v).unwrap()] + rng.random_range(-1..=1);
    }
    let contour = tree.contour_sequence();
    let corners: Vec<u32> = contour[..2 * faces].iter().map(|v| v.0).collect();
    let corner_labels: Vec<i64> = corners.iter().map(|&v| labels[v as usize]).collect();
    let eps = rng.random_range(0..2u8);
    (close_corners(&corners, &corner_labels, tree.vertex_count(), eps), corner_labels)
}

/// Exact `E[max]` of a uniform Dyck path with `2 half` steps, divided by
/// `sqrt(2 half)`. Tends to `sqrt(π/2)`.
pub fn dyck_mean_max_scaled(half: usize) -> f64 {
    let len = 2 * half;
    // Probability that a fair ±1 walk of `len` steps stays in [0, h) and ends at 0.
    let confined = |h: usize| -> f64 {
        let mut p = vec![0.0f64; h];
        p[0] = 1.0;
        let mut next = vec![0.0f64; h];
        for _ in 0..len {
            next.iter_mut().for_each(|x| *x = 0.0);
            for y in 0..h {
                let q = p[y] * 0.5;
                if q == 0.0 {
                    continue;
                }
                if y + 1 < h {
                    next[y + 1] += q;
                }
                if y > 0 {
                    next[y - 1] += q;
                }
            }
            std::mem::swap(&mut p, &mut next);
        }
        p[0]
    };
    let all = confined(half + 1);
    let mut mean = 0.0;
    for h in 1..=half {
        let tail = 1.0 - confined(h) / all;
        mean += tail;
        if tail < 1e-16 {
            break;
        }
    }
    mean / (len as f64).sqrt()
}

/// Limit of [`dyck_mean_max_scaled`], extrapolated from two lengths under a
/// `c / sqrt(N)` correction.
pub fn dyck_max_limit() -> f64 {
    let (n1, n2) = (400.0f64, 1600.0f64);
    let (v1, v2) = (dyck_mean_max_scaled(400), dyck_mean_max_scaled(1600));
    (n2.sqrt() * v2 - n1.sqrt() * v1) / (n2.sqrt() - n1.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_mobiles(1).unwrap().len(), 1);
        assert_eq!(enumerate_mobiles(2).unwrap().len(), 4);
        assert_eq!(count_rooted_pointed_maps(1).unwrap(), BigUint::from(2u32));
        assert_eq!(count_rooted_pointed_maps(2).unwrap(), BigUint::from(8u32));
        assert!(matches!(enumerate_mobiles(7), Err(Error::TooLarge { .. })));
        // Catalan numbers.
        let trees: Vec<usize> = (1..=6).map(|n| enumerate_trees(n).len()).collect();
        assert_eq!(trees, vec![1, 2, 5, 14, 42, 132]);
    }

    #[test]
    fn increments_count() {
        for k in 0..6 {
            let c = central_binomial_odd(k as u64);
            assert_eq!(BigUint::from(black_increments(k).len()), c);
        }
        assert_eq!(black_increments(1), vec![vec![-1, 1], vec![0, 0], vec![1, -1]]);
    }

    #[test]
    fn exact_law_small() {
        let law = exact_tree_law(1).unwrap();
        assert_eq!(law.len(), 1);
        assert!(law[0].1.is_one());
        let law = exact_tree_law(2).unwrap();
        let p = |c: &[u32]| law.iter().find(|(t, _)| t.child_counts() == c).unwrap().1.clone();
        assert_eq!(p(&[1, 1, 0]) / p(&[2, 0, 0]), ratio(3, 1));
        // Root with a single black leaf: μ0(1) μ1(0) = (2/9)(3/8).
        assert_eq!(tree_weight(&PlaneTree::from_child_counts(vec![1, 0]).unwrap()), ratio(1, 12));
        assert_eq!(tree_weight(&PlaneTree::from_child_counts(vec![0]).unwrap()), ratio(2, 3));
    }

    #[test]
    fn law_csv() {
        let mut buf = Vec::new();
        write_law_csv(&exact_tree_law(1).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "treeCode,p_num,p_den\n1-0,1,1\n");
    }

    #[test]
    fn quadrangulations_are_quadrangulations() {
        let mut rng = RngState::new(17).rng();
        for faces in [1, 2, 5, 100] {
            for _ in 0..10 {
                let q = sample_quadrangulation(faces, &mut rng);
                let r = q.validate();
                assert!(r.is_valid(), "{r:?}");
                assert_eq!(r.faces, faces);
                assert!(q.face_degrees().iter().all(|&d| d == 4));
            }
        }
    }

    #[test]
    fn dyck_oracle_approaches_limit() {
        let target = (std::f64::consts::PI / 2.0).sqrt();
        let a = dyck_mean_max_scaled(200);
        let b = dyck_mean_max_scaled(800);
        assert!((b - target).abs() < (a - target).abs());
        // E[max] = sqrt(πN) − 3/2 + o(1).
        assert!((b - (target - 1.5 / 40.0)).abs() < 1e-3, "{b}");
        assert!((dyck_max_limit() - target).abs() < 1e-3);
    }
}
