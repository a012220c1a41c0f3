//! Plane trees, two-type trees and labeled mobiles.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Position of a vertex in depth-first (lexicographic) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef(pub u32);

impl VertexRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A rooted ordered tree stored as depth-first child counts.
///
/// Vertices at even depth are white, vertices at odd depth are black.
#[derive(Clone, Debug)]
pub struct PlaneTree {
    child_counts: Vec<u32>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    child_offsets: Vec<u32>,
    children: Vec<u32>,
    white_rank: Vec<u32>,
    whites: Vec<u32>,
}

impl PartialEq for PlaneTree {
    fn eq(&self, other: &Self) -> bool {
        self.child_counts == other.child_counts
    }
}

impl Eq for PlaneTree {}

impl std::hash::Hash for PlaneTree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.child_counts.hash(state)
    }
}

impl PlaneTree {
    /// Validates a Łukasiewicz child-count sequence and builds the tree.
    pub fn from_child_counts(child_counts: Vec<u32>) -> Result<Self> {
        if child_counts.is_empty() {
            return Err(Error::MalformedTree("empty child-count sequence".into()));
        }
        let len = child_counts.len();
        let mut open: i64 = 1;
        for (i, &k) in child_counts.iter().enumerate() {
            open += k as i64 - 1;
            if open == 0 && i + 1 != len {
                return Err(Error::MalformedTree(format!(
                    "sequence exhausted at position {i} of {len}"
                )));
            }
        }
        if open != 0 {
            return Err(Error::MalformedTree(format!(
                "{open} children never materialize"
            )));
        }
        if len > u32::MAX as usize / 2 {
            return Err(Error::MalformedTree("tree too large".into()));
        }
        Ok(Self::build(child_counts))
    }

    fn build(child_counts: Vec<u32>) -> Self {
        let len = child_counts.len();
        let mut parent = vec![NONE; len];
        let mut depth = vec![0u32; len];
        let mut child_offsets = Vec::with_capacity(len + 1);
        let mut acc = 0u32;
        for &k in &child_counts {
            child_offsets.push(acc);
            acc += k;
        }
        child_offsets.push(acc);
        let mut children = vec![0u32; acc as usize];
        let mut fill = vec![0u32; len];
        // (vertex, children still to attach)
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for v in 0..len {
            if let Some(top) = stack.last_mut() {
                let p = top.0 as usize;
                top.1 -= 1;
                parent[v] = p as u32;
                depth[v] = depth[p] + 1;
                children[(child_offsets[p] + fill[p]) as usize] = v as u32;
                fill[p] += 1;
            }
            while matches!(stack.last(), Some(&(_, 0))) {
                stack.pop();
            }
            if child_counts[v] > 0 {
                stack.push((v as u32, child_counts[v]));
            }
        }
        let mut white_rank = vec![NONE; len];
        let mut whites = Vec::new();
        for v in 0..len {
            if depth[v].is_multiple_of(2) {
                white_rank[v] = whites.len() as u32;
                whites.push(v as u32);
            }
        }
        PlaneTree {
            child_counts,
            parent,
            depth,
            child_offsets,
            children,
            white_rank,
            whites,
        }
    }

    pub fn child_counts(&self) -> &[u32] {
        &self.child_counts
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.child_counts.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.child_counts.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[self.child_offsets[v] as usize..self.child_offsets[v + 1] as usize]
    }

    pub fn is_white(&self, v: usize) -> bool {
        self.depth[v].is_multiple_of(2)
    }

    /// White vertices in lexicographic order.
    pub fn whites(&self) -> &[u32] {
        &self.whites
    }

    pub fn white_count(&self) -> usize {
        self.whites.len()
    }

    pub fn black_count(&self) -> usize {
        self.vertex_count() - self.whites.len()
    }

    /// Rank of a white vertex among white vertices, `None` for black ones.
    pub fn white_rank(&self, v: usize) -> Option<usize> {
        match self.white_rank[v] {
            NONE => None,
            r => Some(r as usize),
        }
    }

    pub fn blacks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| !self.is_white(v))
    }

    /// The contour sequence `u_0, ..., u_{2n}`.
    pub fn contour_sequence(&self) -> Vec<VertexRef> {
        let n = self.edge_count();
        let mut out = Vec::with_capacity(2 * n + 1);
        let mut stack: Vec<(u32, u32)> = vec![(0, 0)];
        out.push(VertexRef(0));
        while let Some(top) = stack.last_mut() {
            let v = top.0 as usize;
            let next = top.1 as usize;
            if next < self.child_counts[v] as usize {
                top.1 += 1;
                let c = self.children(v)[next];
                out.push(VertexRef(c));
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    out.push(VertexRef(p));
                }
            }
        }
        out
    }

    /// The white contour sequence `v_i = u_{2i}`, of length `n + 1`.
    pub fn white_contour_sequence(&self) -> Vec<VertexRef> {
        self.contour_sequence().into_iter().step_by(2).collect()
    }

    /// Product over black vertices of `C(2k+1, k)`.
    pub fn count_labelings(&self) -> BigUint {
        let mut total = BigUint::one();
        for v in self.blacks() {
            total *= central_binomial_odd(self.child_counts[v] as u64);
        }
        total
    }
}

/// `C(2k+1, k)`.
pub fn central_binomial_odd(k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c *= 2 * k + 1 - i;
        c /= i + 1;
    }
    c
}

/// A two-type tree with integer labels on its white vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mobile {
    tree: PlaneTree,
    labels: Vec<i64>,
}

impl Mobile {
    /// Checks the root label and the cyclic increment rule around each black vertex.
    pub fn new(tree: PlaneTree, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != tree.white_count() {
            return Err(Error::MalformedTree(format!(
                "{} labels for {} white vertices",
                labels.len(),
                tree.white_count()
            )));
        }
        if labels[0] != 0 {
            return Err(Error::BadRootLabel(labels[0]));
        }
        for b in tree.blacks() {
            let p = tree.parent(b).expect("black vertex has a parent");
            let lp = labels[tree.white_rank[p] as usize];
            let mut cur = lp;
            for &c in tree.children(b) {
                let next = labels[tree.white_rank[c as usize] as usize];
                if next < cur - 1 {
                    return Err(Error::BadLabeling { vertex: b });
                }
                cur = next;
            }
            if lp < cur - 1 {
                return Err(Error::BadLabeling { vertex: b });
            }
        }
        Ok(Mobile { tree, labels })
    }

    pub(crate) fn new_unchecked(tree: PlaneTree, labels: Vec<i64>) -> Self {
        debug_assert!(Mobile::new(tree.clone(), labels.clone()).is_ok());
        Mobile { tree, labels }
    }

    pub fn tree(&self) -> &PlaneTree {
        &self.tree
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn edge_count(&self) -> usize {
        self.tree.edge_count()
    }

    /// Label of a white vertex given by its depth-first index.
    pub fn label_of(&self, v: usize) -> i64 {
        self.labels[self.tree.white_rank(v).expect("white vertex")]
    }

    /// Mobile text record.
    pub fn to_text(&self, eps: u8) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "MOBILE n={}", self.edge_count());
        s.push_str(&join(self.tree.child_counts()));
        s.push('\n');
        s.push_str(&join(&self.labels));
        s.push('\n');
        let _ = writeln!(s, "eps={eps}");
        s
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
        .collect()
}

/// Parses every mobile record in `text`; returns `(mobile, eps)` pairs.
pub fn parse_mobiles(text: &str) -> Result<Vec<(Mobile, u8)>> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let header = lines[i];
        let n: usize = header
            .strip_prefix("MOBILE n=")
            .ok_or_else(|| Error::Parse(format!("expected `MOBILE n=<edges>`, got `{header}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad header `{header}`")))?;
        let counts_line = lines
            .get(i + 1)
            .ok_or_else(|| Error::Parse("missing child counts".into()))?;
        let labels_line = lines.get(i + 2).ok_or_else(|| Error::Parse("missing labels".into()))?;
        let counts: Vec<u32> = parse_numbers(counts_line)?;
        if counts.len() != n + 1 {
            return Err(Error::Parse(format!(
                "header says n={n} but {} child counts follow",
                counts.len()
            )));
        }
        let labels: Vec<i64> = parse_numbers(labels_line)?;
        i += 3;
        let mut eps = 0u8;
        if let Some(rest) = lines.get(i).and_then(|l| l.strip_prefix("eps=")) {
            eps = match rest {
                "0" => 0,
                "1" => 1,
                _ => return Err(Error::Parse(format!("bad eps `{rest}`"))),
            };
            i += 1;
        }
        let tree = PlaneTree::from_child_counts(counts)?;
        out.push((Mobile::new(tree, labels)?, eps));
    }
    if out.is_empty() {
        return Err(Error::Parse("no mobile record".into()));
    }
    Ok(out)
}

/// Parses exactly one mobile record.
pub fn parse_mobile(text: &str) -> Result<(Mobile, u8)> {
    let mut all = parse_mobiles(text)?;
    if all.len() != 1 {
        return Err(Error::Parse(format!("expected one record, found {}", all.len())));
    }
    Ok(all.pop().unwrap())
}
