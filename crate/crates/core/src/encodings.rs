//! Path encodings of trees and mobiles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mobile, PlaneTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Walk,
    Bridge,
    Excursion,
    Contour,
    Label,
    Height,
}

/// Jump law a walk-like path was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpLaw {
    Nu,
    Lukasiewicz,
}

/// An integer-valued path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePath {
    pub values: Vec<i64>,
    pub kind: PathKind,
    pub law: Option<JumpLaw>,
}

impl LatticePath {
    pub fn new(values: Vec<i64>, kind: PathKind) -> Self {
        LatticePath { values, kind, law: None }
    }

    /// Path `start, start + x_1, ...`.
    pub fn from_increments(start: i64, increments: &[i64], kind: PathKind) -> Self {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut s = start;
        values.push(s);
        for &x in increments {
            s += x;
            values.push(s);
        }
        LatticePath::new(values, kind)
    }

    pub fn with_law(mut self, law: JumpLaw) -> Self {
        self.law = Some(law);
        self
    }

    pub fn increments(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> i64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> i64 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Contour function `C_i = |u_i|`.
pub fn contour_c(tree: &PlaneTree) -> LatticePath {
    let values = tree
        .contour_sequence()
        .iter()
        .map(|v| tree.depth(v.index()) as i64)
        .collect();
    LatticePath::new(values, PathKind::Contour)
}

/// White contour function `C⁰_i = |v_i| / 2`.
pub fn white_contour_c0(tree: &PlaneTree) -> LatticePath {
    let values = tree
        .white_contour_sequence()
        .iter()
        .map(|v| (tree.depth(v.index()) / 2) as i64)
        .collect();
    LatticePath::new(values, PathKind::Contour)
}

/// Label function `L⁰_i = ℓ(v_i)`.
pub fn label_l0(mobile: &Mobile) -> LatticePath {
    let values = mobile
        .tree()
        .white_contour_sequence()
        .iter()
        .map(|v| mobile.label_of(v.index()))
        .collect();
    LatticePath::new(values, PathKind::Label)
}

/// Increments of the modified Łukasiewicz path, one per white corner.
pub fn y_increments(tree: &PlaneTree) -> Vec<i64> {
    let u = tree.contour_sequence();
    let n = tree.edge_count();
    (0..=n)
        .map(|k| {
            let here = u[2 * k].index();
            match u.get(2 * k + 1) {
                Some(next) if tree.parent(next.index()) == Some(here) => {
                    tree.child_counts()[next.index()] as i64
                }
                _ => -1,
            }
        })
        .collect()
}

/// The modified Łukasiewicz path `Y`, of length `n + 2`.
pub fn y_path(tree: &PlaneTree) -> LatticePath {
    LatticePath::from_increments(1, &y_increments(tree), PathKind::Excursion).with_law(JumpLaw::Nu)
}

/// `R_k = Card{ j < k : Y_j < min_{j < l ≤ k} Y_l }` for every `k`.
pub fn reversed_ladder_counts(values: &[i64]) -> Vec<usize> {
    let mut stack: Vec<i64> = Vec::new();
    values
        .iter()
        .map(|&y| {
            while matches!(stack.last(), Some(&top) if top >= y) {
                stack.pop();
            }
            let r = stack.len();
            stack.push(y);
            r
        })
        .collect()
}

/// Whether `C⁰_k` equals the number of `j < k` with `Y_j < min_{j < l ≤ k} Y_l`, for all `k ≤ n`.
pub fn check_lien_cy(tree: &PlaneTree) -> bool {
    let c0 = white_contour_c0(tree);
    let y = y_path(tree);
    let r = reversed_ladder_counts(&y.values);
    c0.values
        .iter()
        .zip(&r)
        .all(|(&c, &r)| c == r as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Functionals {
    pub r: usize,
    pub k: usize,
    pub max: i64,
    pub min: i64,
}

/// Strict running-maximum times in `1..=m`.
fn strict_record_count(values: &[i64]) -> usize {
    let mut best = values[0];
    let mut count = 0;
    for &v in &values[1..] {
        if v > best {
            best = v;
            count += 1;
        }
    }
    count
}

/// `(R_m, K_m, M_m, I_m)`. `R_m` is computed twice, directly and through the
/// reversed path; a disagreement would be a bug and panics.
pub fn functionals_rkmi(path: &LatticePath, m: usize) -> Result<Functionals> {
    if m >= path.len() {
        return Err(Error::IndexOutOfRange { index: m, max: path.len().saturating_sub(1) });
    }
    let s = &path.values[..=m];
    let direct = *reversed_ladder_counts(s).last().unwrap();
    let reversed: Vec<i64> = (0..=m).map(|k| s[m] - s[m - k] + 1).collect();
    let via_reversal = strict_record_count(&reversed);
    assert_eq!(direct, via_reversal, "R_m disagreement");
    Ok(Functionals {
        r: direct,
        k: strict_record_count(s),
        max: *s.iter().max().unwrap(),
        min: *s.iter().min().unwrap(),
    })
}

/// Height function and black-inheriting label function over the
/// lexicographic order, each with a terminal 0.
pub fn height_and_tilde_label(mobile: &Mobile) -> (LatticePath, LatticePath) {
    let tree = mobile.tree();
    let len = tree.vertex_count();
    let mut h = Vec::with_capacity(len + 1);
    let mut l = Vec::with_capacity(len + 1);
    for v in 0..len {
        h.push(tree.depth(v) as i64);
        let w = if tree.is_white(v) { v } else { tree.parent(v).unwrap() };
        l.push(mobile.label_of(w));
    }
    h.push(0);
    l.push(0);
    (LatticePath::new(h, PathKind::Height), LatticePath::new(l, PathKind::Label))
}

/// Right side of the corner distance bound:
/// `L_s + L_t − 2 max(min L[s,t], min L[t,n] ∪ L[0,s]) + 2`.
pub fn discrete_d0(labels: &LatticePath, s: usize, t: usize) -> Result<i64> {
    let n = labels.len().saturating_sub(1);
    for i in [s, t] {
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    let l = &labels.values;
    let inner = *l[s..=t].iter().min().unwrap();
    let outer = l[t..=n].iter().chain(&l[..=s]).copied().min().unwrap();
    Ok(l[s] + l[t] - 2 * inner.max(outer) + 2)
}

/// Sparse table for repeated `discrete_d0` queries on one label path.
pub struct D0Table {
    levels: Vec<Vec<i64>>,
    n: usize,
}

impl D0Table {
    pub fn new(labels: &LatticePath) -> Self {
        let mut levels = vec![labels.values.clone()];
        let mut width = 1;
        while 2 * width <= labels.len() {
            let prev = levels.last().unwrap();
            let next: Vec<i64> = (0..=prev.len() - width - 1)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        D0Table { levels, n: labels.len() - 1 }
    }

    fn range_min(&self, a: usize, b: usize) -> i64 {
        let len = b - a + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        self.levels[k][a].min(self.levels[k][b + 1 - (1 << k)])
    }

    pub fn d0(&self, s: usize, t: usize) -> i64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let l = &self.levels[0];
        let inner = self.range_min(s, t);
        let outer = self.range_min(t, self.n).min(self.range_min(0, s));
        l[s] + l[t] - 2 * inner.max(outer) + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(c: &[u32]) -> PlaneTree {
        PlaneTree::from_child_counts(c.to_vec()).unwrap()
    }

    #[test]
    fn contour_functions() {
        assert_eq!(contour_c(&tree(&[1, 0])).values, vec![0, 1, 0]);
        assert_eq!(contour_c(&tree(&[1, 2, 0, 0])).values, vec![0, 1, 2, 1, 2, 1, 0]);
        assert_eq!(white_contour_c0(&tree(&[1, 2, 0, 0])).values, vec![0, 1, 1, 0]);
        assert_eq!(white_contour_c0(&tree(&[1, 0])).values, vec![0, 0]);
    }

    #[test]
    fn labels_and_heights() {
        let m = Mobile::new(tree(&[1, 2, 0, 0]), vec![0, 1, 0]).unwrap();
        assert_eq!(label_l0(&m).values, vec![0, 1, 0, 0]);
        let (_, l) = height_and_tilde_label(&m);
        assert_eq!(l.values, vec![0, 0, 1, 0, 0]);
        let single = Mobile::new(tree(&[1, 0]), vec![0]).unwrap();
        assert_eq!(label_l0(&single).values, vec![0, 0]);
        assert_eq!(height_and_tilde_label(&single).0.values, vec![0, 1, 0]);
    }

    #[test]
    fn y_paths() {
        assert_eq!(y_path(&tree(&[1, 2, 0, 0])).values, vec![1, 3, 2, 1, 0]);
        assert_eq!(y_path(&tree(&[1, 0])).values, vec![1, 1, 0]);
        // Root: black leaf, then a black vertex with two whites; the first of
        // those has a black leaf and then a black vertex with three whites.
        let t = tree(&[2, 0, 2, 2, 0, 3, 0, 0, 0, 0]);
        assert_eq!(&y_path(&t).values[..6], &[1, 1, 3, 3, 6, 5]);
    }

    #[test]
    fn lien_cy_hand_case() {
        let y = y_path(&tree(&[1, 2, 0, 0]));
        assert_eq!(reversed_ladder_counts(&y.values)[2], 1);
        assert_eq!(reversed_ladder_counts(&y.values)[0], 0);
        assert!(check_lien_cy(&tree(&[1, 2, 0, 0])));
    }

    #[test]
    fn rkmi() {
        let s = LatticePath::new(vec![1, 3, 2, 1, 0], PathKind::Walk);
        assert_eq!(functionals_rkmi(&s, 3).unwrap().r, 0);
        let up = LatticePath::new(vec![1, 2, 3], PathKind::Walk);
        let f = functionals_rkmi(&up, 2).unwrap();
        assert_eq!((f.k, f.max, f.min), (2, 3, 1));
        assert!(matches!(
            functionals_rkmi(&up, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn d0_values() {
        let l = LatticePath::new(vec![0, 1, 0, 0], PathKind::Label);
        assert_eq!(discrete_d0(&l, 1, 2).unwrap(), 3);
        assert_eq!(discrete_d0(&l, 2, 2).unwrap(), 2);
        assert!(discrete_d0(&l, 0, 4).is_err());
        let table = D0Table::new(&l);
        for s in 0..4 {
            for t in 0..4 {
                assert_eq!(table.d0(s, t), discrete_d0(&l, s, t).unwrap());
            }
        }
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        LatticePath::new(vec![1, 0], PathKind::Walk).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,value\n0,1\n1,0\n");
    }
}
