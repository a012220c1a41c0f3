//! Exact sampling of conditioned two-type Galton–Watson trees and their labels.

pub mod bridge;
pub mod laws;

use rand::Rng;

use crate::encodings::{JumpLaw, LatticePath, PathKind};
use crate::error::{Error, Result};
use crate::model::{Mobile, PlaneTree};
use crate::rng::LabRng;

pub use bridge::{sample_nu_bridge, sample_nu_bridge_naive, sample_nu_bridge_weighted, DEFAULT_MAX_ATTEMPTS};
pub use laws::OffspringLaws;

/// Bridge path `1, 1 + x_1, ..., 0` with `n + 1` jumps.
pub fn nu_bridge_path(n: usize, rng: &mut LabRng) -> Result<LatticePath> {
    if n == 0 {
        return Err(Error::MalformedExcursion("n must be at least 1".into()));
    }
    let jumps = sample_nu_bridge(n, rng, DEFAULT_MAX_ATTEMPTS)?;
    Ok(LatticePath::from_increments(1, &jumps, PathKind::Bridge).with_law(JumpLaw::Nu))
}

/// Rotates jumps `≥ −1` summing to −1 so that the walk from 1 first hits 0 at the end.
pub fn cycle_shift_increments(jumps: &[i64]) -> Result<Vec<i64>> {
    if jumps.is_empty() {
        return Err(Error::NotABridge("empty".into()));
    }
    if let Some(x) = jumps.iter().find(|&&x| x < -1) {
        return Err(Error::NotABridge(format!("jump {x} below -1")));
    }
    let mut sum = 0i64;
    let mut best = i64::MAX;
    let mut cut = 0;
    for (i, &x) in jumps.iter().enumerate() {
        sum += x;
        if sum < best {
            best = sum;
            cut = i + 1;
        }
    }
    if sum != -1 {
        return Err(Error::NotABridge(format!("jumps sum to {sum}")));
    }
    let mut out = Vec::with_capacity(jumps.len());
    out.extend_from_slice(&jumps[cut..]);
    out.extend_from_slice(&jumps[..cut]);
    Ok(out)
}

/// Cycle shift on a bridge path.
pub fn cycle_shift_to_excursion(bridge: &LatticePath) -> Result<LatticePath> {
    if bridge.values.first() != Some(&1) {
        return Err(Error::NotABridge("bridge must start at 1".into()));
    }
    let rotated = cycle_shift_increments(&bridge.increments())?;
    let mut out = LatticePath::from_increments(1, &rotated, PathKind::Excursion);
    out.law = bridge.law;
    Ok(out)
}

fn check_excursion(jumps: &[i64]) -> Result<()> {
    if jumps.len() < 2 {
        return Err(Error::MalformedExcursion("need at least two jumps".into()));
    }
    let mut s = 1i64;
    for (i, &x) in jumps.iter().enumerate() {
        if x < -1 {
            return Err(Error::MalformedExcursion(format!("jump {x} below -1")));
        }
        s += x;
        let last = i + 1 == jumps.len();
        if (s == 0) != last || s < 0 {
            return Err(Error::MalformedExcursion(format!("path reaches {s} at step {}", i + 1)));
        }
    }
    Ok(())
}

/// Decodes a modified Łukasiewicz excursion (as increments) into its two-type tree.
pub fn decode_increments(jumps: &[i64]) -> Result<PlaneTree> {
    check_excursion(jumps)?;
    const NONE: u32 = u32::MAX;
    let whites_total = jumps.iter().filter(|&&x| x == -1).count();
    let blacks_total = jumps.len() - whites_total;
    // White arena: parent black, first and last black child.
    let mut w_parent = Vec::with_capacity(whites_total);
    let mut w_first = Vec::with_capacity(whites_total);
    let mut w_last = Vec::with_capacity(whites_total);
    // Black arena: parent white, first white child, child count, next sibling.
    let mut b_parent = Vec::with_capacity(blacks_total);
    let mut b_first = Vec::with_capacity(blacks_total);
    let mut b_count = Vec::with_capacity(blacks_total);
    let mut b_next = Vec::with_capacity(blacks_total);
    w_parent.push(NONE);
    w_first.push(NONE);
    w_last.push(NONE);
    let mut cur = 0usize;
    for &x in jumps {
        if x >= 0 {
            let b = b_parent.len() as u32;
            let first = w_parent.len() as u32;
            b_parent.push(cur as u32);
            b_first.push(first);
            b_count.push(x as u32);
            b_next.push(NONE);
            if w_first[cur] == NONE {
                w_first[cur] = b;
            } else {
                b_next[w_last[cur] as usize] = b;
            }
            w_last[cur] = b;
            for _ in 0..x {
                w_parent.push(b);
                w_first.push(NONE);
                w_last.push(NONE);
            }
            if x > 0 {
                cur = first as usize;
            }
        } else {
            let b = w_parent[cur];
            if b == NONE {
                break;
            }
            let b = b as usize;
            if (cur as u32) + 1 < b_first[b] + b_count[b] {
                cur += 1;
            } else {
                cur = b_parent[b] as usize;
            }
        }
    }
    #[derive(Clone, Copy)]
    enum Node {
        White(u32),
        Black(u32),
    }
    let mut counts = Vec::with_capacity(jumps.len());
    let mut stack = vec![Node::White(0)];
    let mut scratch = Vec::new();
    while let Some(node) = stack.pop() {
        match node {
            Node::White(w) => {
                scratch.clear();
                let mut b = w_first[w as usize];
                while b != NONE {
                    scratch.push(b);
                    b = b_next[b as usize];
                }
                counts.push(scratch.len() as u32);
                stack.extend(scratch.iter().rev().map(|&b| Node::Black(b)));
            }
            Node::Black(b) => {
                let k = b_count[b as usize];
                counts.push(k);
                let first = b_first[b as usize];
                stack.extend((first..first + k).rev().map(Node::White));
            }
        }
    }
    PlaneTree::from_child_counts(counts)
}

pub fn decode_two_type_tree(excursion: &LatticePath) -> Result<PlaneTree> {
    if excursion.values.first() != Some(&1) {
        return Err(Error::MalformedExcursion("excursion must start at 1".into()));
    }
    decode_increments(&excursion.increments())
}

/// Conditioned two-type tree with `n` edges.
pub fn sample_conditioned_tree(n: usize, rng: &mut LabRng) -> Result<PlaneTree> {
    if n == 0 {
        return Err(Error::MalformedExcursion("n must be at least 1".into()));
    }
    let bridge = sample_nu_bridge(n, rng, DEFAULT_MAX_ATTEMPTS)?;
    decode_increments(&cycle_shift_increments(&bridge)?)
}

/// Uniform admissible labeling with root label 0.
pub fn sample_labels(tree: &PlaneTree, rng: &mut LabRng) -> Mobile {
    let mut labels = vec![0i64; tree.white_count()];
    let mut bars: Vec<bool> = Vec::new();
    for b in tree.blacks() {
        let p = tree.parent(b).unwrap();
        let kids = tree.children(b);
        let k = kids.len();
        if k == 0 {
            continue;
        }
        // Floyd: uniform k-subset of the 2k+1 slots marks the bars.
        let slots = 2 * k + 1;
        bars.clear();
        bars.resize(slots, false);
        for j in (slots - k)..slots {
            let t = rng.random_range(0..=j);
            if bars[t] {
                bars[j] = true;
            } else {
                bars[t] = true;
            }
        }
        let mut label = labels[tree.white_rank(p).unwrap()];
        let mut stars = 0i64;
        let mut child = 0;
        for &bar in bars.iter() {
            if bar {
                label += stars - 1;
                labels[tree.white_rank(kids[child] as usize).unwrap()] = label;
                child += 1;
                stars = 0;
            } else {
                stars += 1;
            }
        }
    }
    Mobile::new_unchecked(tree.clone(), labels)
}

/// Uniform mobile with `n` edges.
pub fn sample_mobile(n: usize, rng: &mut LabRng) -> Result<Mobile> {
    let tree = sample_conditioned_tree(n, rng)?;
    Ok(sample_labels(&tree, rng))
}

/// Mobile whose map, once ∂ is forgotten, is uniform over rooted maps with
/// `n` edges: the pointed law is reweighted by `2 / Card V`.
pub fn sample_rooted_mobile(n: usize, rng: &mut LabRng, max_attempts: u64) -> Result<Mobile> {
    if n == 0 {
        return Err(Error::MalformedExcursion("n must be at least 1".into()));
    }
    // Card V = whites + 1 and whites = number of −1 jumps.
    let bridge = sample_nu_bridge_weighted(n, rng, max_attempts, &|b| 2.0 / (b as f64 + 1.0))?;
    let tree = decode_increments(&cycle_shift_increments(&bridge)?)?;
    Ok(sample_labels(&tree, rng))
}

/// Unconditioned two-type tree, generated in depth-first order. Fails with
/// `BudgetExceeded` once it has more than `max_vertices` vertices.
pub fn sample_unconditioned_tree(
    laws: &OffspringLaws,
    rng: &mut LabRng,
    max_vertices: usize,
) -> Result<PlaneTree> {
    let mut counts = Vec::new();
    let mut open: u64 = 1;
    // Depth parity of every vertex still to be generated, as a stack of
    // (parity of the pending children, how many).
    let mut pending: Vec<(bool, u32)> = vec![(false, 1)];
    while let Some(top) = pending.last_mut() {
        let black = top.0;
        top.1 -= 1;
        if top.1 == 0 {
            pending.pop();
        }
        let k = if black { laws.sample_mu1(rng) } else { laws.sample_mu0(rng) };
        counts.push(k);
        if counts.len() > max_vertices {
            return Err(Error::BudgetExceeded { attempts: counts.len() as u64 });
        }
        open = open + k as u64 - 1;
        if k > 0 {
            pending.push((!black, k));
        }
    }
    debug_assert_eq!(open, 0);
    PlaneTree::from_child_counts(counts)
}

/// Independent unconditioned labeled trees.
pub fn sample_unconditioned_forest(
    count: usize,
    laws: &OffspringLaws,
    rng: &mut LabRng,
    max_vertices: usize,
) -> Result<Vec<Mobile>> {
    (0..count)
        .map(|_| {
            let t = sample_unconditioned_tree(laws, rng, max_vertices)?;
            Ok(sample_labels(&t, rng))
        })
        .collect()
}

/// Size of an unconditioned tree measured in edges, or `None` if it reaches `cap` edges.
pub fn unconditioned_edge_count(laws: &OffspringLaws, rng: &mut LabRng, cap: usize) -> Option<usize> {
    let mut open: i64 = 1;
    let mut edges = 0usize;
    // The ν-walk from 1 hits 0 after (edges + 1) jumps.
    while open > 0 {
        open += laws.sample_nu(rng);
        edges += 1;
        if edges > cap {
            return None;
        }
    }
    Some(edges - 1)
}
