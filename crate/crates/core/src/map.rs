//! Half-edge combinatorial maps.
//!
//! Half-edges are `0..2n`; `α(h) = h ^ 1` pairs them into edges and `σ`
//! rotates counterclockwise around vertices. Faces are orbits of `φ = σ∘α`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialMap {
    n: usize,
    sigma: Vec<u32>,
    root: u32,
    origin: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapDefect {
    SigmaNotPermutation,
    RootOutOfRange,
    OriginNotVertex,
    Disconnected,
    NonPlanar,
    NotBipartite,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
    pub edges: usize,
    pub vertices: usize,
    pub faces: usize,
    pub defects: Vec<MapDefect>,
}

impl MapReport {
    pub fn is_valid(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Labels each element with the minimum of its orbit under `f`, plus the orbit count.
fn orbit_ids(len: usize, f: impl Fn(usize) -> usize) -> (Vec<u32>, usize) {
    const UNSEEN: u32 = u32::MAX;
    let mut id = vec![UNSEEN; len];
    let mut count = 0;
    for start in 0..len {
        if id[start] != UNSEEN {
            continue;
        }
        count += 1;
        let mut h = start;
        while id[h] == UNSEEN {
            id[h] = start as u32;
            h = f(h);
        }
    }
    (id, count)
}

impl CombinatorialMap {
    /// Builds a map; only array shapes are checked here, see [`validate`](Self::validate).
    pub fn new(sigma: Vec<u32>, root: u32, origin: Option<u32>) -> Result<Self> {
        if sigma.is_empty() || !sigma.len().is_multiple_of(2) {
            return Err(Error::InvalidMap(format!("{} half-edges", sigma.len())));
        }
        if root as usize >= sigma.len() {
            return Err(Error::InvalidMap(format!("root {root} out of range")));
        }
        if sigma.iter().any(|&s| s as usize >= sigma.len()) {
            return Err(Error::InvalidMap("sigma image out of range".into()));
        }
        Ok(CombinatorialMap { n: sigma.len() / 2, sigma, root, origin })
    }

    pub(crate) fn from_parts(sigma: Vec<u32>, root: u32, origin: Option<u32>) -> Self {
        CombinatorialMap { n: sigma.len() / 2, sigma, root, origin }
    }

    pub fn edge_count(&self) -> usize {
        self.n
    }

    pub fn half_edge_count(&self) -> usize {
        2 * self.n
    }

    pub fn sigma(&self) -> &[u32] {
        &self.sigma
    }

    pub fn sigma_at(&self, h: usize) -> usize {
        self.sigma[h] as usize
    }

    pub fn alpha(h: usize) -> usize {
        h ^ 1
    }

    pub fn phi(&self, h: usize) -> usize {
        self.sigma[h ^ 1] as usize
    }

    pub fn root(&self) -> usize {
        self.root as usize
    }

    pub fn origin(&self) -> Option<usize> {
        self.origin.map(|o| o as usize)
    }

    pub fn with_root(&self, root: usize) -> Self {
        CombinatorialMap { root: root as u32, ..self.clone() }
    }

    pub fn with_origin(&self, origin: Option<usize>) -> Self {
        CombinatorialMap { origin: origin.map(|o| o as u32), ..self.clone() }
    }

    /// Vertex id (minimum half-edge of the σ-orbit) of every half-edge.
    pub fn vertex_ids(&self) -> Vec<u32> {
        orbit_ids(self.sigma.len(), |h| self.sigma[h] as usize).0
    }

    /// Face id (minimum half-edge of the φ-orbit) of every half-edge.
    pub fn face_ids(&self) -> Vec<u32> {
        orbit_ids(self.sigma.len(), |h| self.phi(h)).0
    }

    /// Compact vertex index per half-edge, numbered by increasing vertex id.
    pub fn vertex_indices(&self) -> (Vec<u32>, usize) {
        let ids = self.vertex_ids();
        let mut index = vec![u32::MAX; ids.len()];
        let mut count = 0;
        for h in 0..ids.len() {
            if ids[h] as usize == h {
                index[h] = count;
                count += 1;
            }
        }
        (ids.iter().map(|&v| index[v as usize]).collect(), count as usize)
    }

    pub fn vertex_count(&self) -> usize {
        orbit_ids(self.sigma.len(), |h| self.sigma[h] as usize).1
    }

    pub fn face_degrees(&self) -> Vec<usize> {
        let ids = self.face_ids();
        let mut deg = vec![0usize; ids.len()];
        for &f in &ids {
            deg[f as usize] += 1;
        }
        deg.into_iter().filter(|&d| d > 0).collect()
    }

    fn sigma_is_permutation(&self) -> bool {
        let mut seen = vec![false; self.sigma.len()];
        for &s in &self.sigma {
            if std::mem::replace(&mut seen[s as usize], true) {
                return false;
            }
        }
        true
    }

    fn is_connected(&self) -> bool {
        let len = self.sigma.len();
        let mut seen = vec![false; len];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(h) = stack.pop() {
            for g in [self.sigma[h] as usize, h ^ 1] {
                if !seen[g] {
                    seen[g] = true;
                    reached += 1;
                    stack.push(g);
                }
            }
        }
        reached == len
    }

    /// Structural checks, collected rather than short-circuited.
    pub fn validate(&self) -> MapReport {
        let mut defects = Vec::new();
        if !self.sigma_is_permutation() {
            defects.push(MapDefect::SigmaNotPermutation);
            return MapReport { edges: self.n, vertices: 0, faces: 0, defects };
        }
        if self.root as usize >= self.sigma.len() {
            defects.push(MapDefect::RootOutOfRange);
        }
        let ids = self.vertex_ids();
        if let Some(o) = self.origin {
            if o as usize >= ids.len() || ids[o as usize] != o {
                defects.push(MapDefect::OriginNotVertex);
            }
        }
        if !self.is_connected() {
            defects.push(MapDefect::Disconnected);
        }
        let vertices = self.vertex_count();
        let degrees = self.face_degrees();
        let faces = degrees.len();
        if vertices + faces != self.n + 2 {
            defects.push(MapDefect::NonPlanar);
        }
        if degrees.iter().any(|d| d % 2 != 0) {
            defects.push(MapDefect::NotBipartite);
        }
        MapReport { edges: self.n, vertices, faces, defects }
    }

    /// `Ok` iff every structural check passes.
    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        match report.defects.first() {
            None => Ok(()),
            Some(MapDefect::NotBipartite) => Err(Error::NotBipartite),
            Some(MapDefect::Disconnected) => Err(Error::Disconnected),
            Some(d) => Err(Error::InvalidMap(format!("{d:?}"))),
        }
    }

    /// Byte string identifying the rooted (and pointed) map up to isomorphism.
    ///
    /// Half-edges are renumbered in BFS order from the root following σ then α.
    pub fn canonical_code(&self) -> Vec<u8> {
        let len = self.sigma.len();
        let mut label = vec![u32::MAX; len];
        let mut order = Vec::with_capacity(len);
        let mut queue = VecDeque::new();
        label[self.root as usize] = 0;
        order.push(self.root as usize);
        queue.push_back(self.root as usize);
        while let Some(h) = queue.pop_front() {
            for g in [self.sigma[h] as usize, h ^ 1] {
                if label[g] == u32::MAX {
                    label[g] = order.len() as u32;
                    order.push(g);
                    queue.push_back(g);
                }
            }
        }
        let mut code = Vec::with_capacity(8 * len + 8);
        code.extend_from_slice(&(self.n as u32).to_le_bytes());
        for &h in &order {
            code.extend_from_slice(&label[self.sigma[h] as usize].to_le_bytes());
            code.extend_from_slice(&label[h ^ 1].to_le_bytes());
        }
        let origin = match self.origin {
            None => u32::MAX,
            Some(o) => {
                let mut best = label[o as usize];
                let mut h = self.sigma[o as usize] as usize;
                while h != o as usize {
                    best = best.min(label[h]);
                    h = self.sigma[h] as usize;
                }
                best
            }
        };
        code.extend_from_slice(&origin.to_le_bytes());
        code
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let origin = self.origin.map_or("none".to_string(), |o| o.to_string());
        let _ = writeln!(s, "MAP n={} root={} origin={}", self.n, self.root, origin);
        let images: Vec<String> = self.sigma.iter().map(|x| x.to_string()).collect();
        s.push_str(&images.join(" "));
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty map file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("MAP") {
            return Err(Error::Parse(format!("expected MAP header, got `{header}`")));
        }
        let mut n = None;
        let mut root = None;
        let mut origin = None;
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{f}`")))?;
            let bad = || Error::Parse(format!("bad value in `{f}`"));
            match k {
                "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
                "root" => root = Some(v.parse::<u32>().map_err(|_| bad())?),
                "origin" if v == "none" => origin = None,
                "origin" => origin = Some(v.parse::<u32>().map_err(|_| bad())?),
                _ => return Err(Error::Parse(format!("unknown header field `{k}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
        let root = root.ok_or_else(|| Error::Parse("missing root".into()))?;
        let sigma: Vec<u32> = lines
            .next()
            .ok_or_else(|| Error::Parse("missing sigma line".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad sigma entry `{t}`"))))
            .collect::<Result<_>>()?;
        if sigma.len() != 2 * n {
            return Err(Error::Parse(format!("expected {} sigma entries, got {}", 2 * n, sigma.len())));
        }
        CombinatorialMap::new(sigma, root, origin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> CombinatorialMap {
        CombinatorialMap::new(vec![0, 1], 0, Some(1)).unwrap()
    }

    #[test]
    fn single_edge_is_valid() {
        let m = single_edge();
        let r = m.validate();
        assert!(r.is_valid(), "{r:?}");
        assert_eq!((r.vertices, r.faces), (2, 1));
        assert_eq!(m.canonical_code().len(), 4 + 2 * 8 + 4);
    }

    #[test]
    fn loop_is_not_bipartite() {
        let m = CombinatorialMap::new(vec![1, 0], 0, None).unwrap();
        let r = m.validate();
        assert_eq!(r.defects, vec![MapDefect::NotBipartite]);
        assert!(matches!(m.check(), Err(Error::NotBipartite)));
    }

    #[test]
    fn broken_sigma_is_reported() {
        let m = CombinatorialMap::new(vec![0, 0], 0, None).unwrap();
        assert_eq!(m.validate().defects, vec![MapDefect::SigmaNotPermutation]);
    }

    #[test]
    fn rotation_changes_code() {
        // Tree: center c with leaves a, b and a path c-d-e. Edges c-a, c-b,
        // c-d, d-e use half-edges (0,1), (2,3), (4,5), (6,7).
        let a = CombinatorialMap::new(vec![2, 1, 4, 3, 0, 6, 5, 7], 0, None).unwrap();
        let b = CombinatorialMap::new(vec![4, 1, 0, 3, 2, 6, 5, 7], 0, None).unwrap();
        assert!(a.validate().is_valid() && b.validate().is_valid());
        assert_ne!(a.canonical_code(), b.canonical_code());
        // Swapping the names of the first two edges turns `a` into `b` rooted at 2.
        assert_eq!(a.canonical_code(), b.with_root(2).canonical_code());
        assert_ne!(a.canonical_code(), a.with_origin(Some(0)).canonical_code());
    }

    #[test]
    fn text_round_trip() {
        let m = single_edge();
        assert_eq!(m.to_text(), "MAP n=1 root=0 origin=1\n0 1\n");
        assert_eq!(CombinatorialMap::parse(&m.to_text()).unwrap(), m);
        assert!(CombinatorialMap::parse("MAP n=2 root=0 origin=none\n0 1\n").is_err());
        assert!(CombinatorialMap::parse("MOBILE n=1\n").is_err());
    }
}
