//! The Bouttier–Di Francesco–Guitter correspondence between mobiles with an
//! orientation bit and rooted pointed bipartite maps.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::map::CombinatorialMap;
use crate::model::{Mobile, PlaneTree};

/// Target of a corner's arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Successor {
    Corner(usize),
    /// The extra vertex ∂.
    Apex,
}

/// Successor of corner `i` among the white corners `0..n`.
pub fn successor(mobile: &Mobile, i: usize) -> Result<Successor> {
    let n = mobile.edge_count();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, max: n.saturating_sub(1) });
    }
    let labels: Vec<i64> = white_corners(mobile.tree())
        .iter()
        .map(|&w| mobile.labels()[w as usize])
        .collect();
    let min = *labels.iter().min().unwrap();
    if labels[i] == min {
        return Ok(Successor::Apex);
    }
    let want = labels[i] - 1;
    Ok((1..n)
        .map(|d| (i + d) % n)
        .find(|&j| labels[j] == want)
        .map(Successor::Corner)
        .expect("labels are skip-free downward"))
}

/// White rank of the vertex at each white corner `0..n`.
pub(crate) fn white_corners(tree: &PlaneTree) -> Vec<u32> {
    let n = tree.edge_count();
    let u = tree.contour_sequence();
    (0..n)
        .map(|i| tree.white_rank(u[2 * i].index()).unwrap() as u32)
        .collect()
}

/// Joins every corner to its successor and builds the resulting map.
///
/// `corner_vertex[i]` is the vertex (in `0..vertex_count`) owning corner `i`
/// and `labels[i]` its label; consecutive labels (cyclically) may drop by at
/// most one. The arc from corner `i` is edge `i`, with half-edge `2i` at the
/// corner and `2i + 1` at the target. The returned map is rooted at
/// half-edge `eps` and pointed at the extra vertex.
pub fn close_corners(corner_vertex: &[u32], labels: &[i64], vertex_count: usize, eps: u8) -> CombinatorialMap {
    let c = corner_vertex.len();
    let min = *labels.iter().min().unwrap();
    let m0 = labels.iter().position(|&l| l == min).unwrap();
    let corner_at = |p: usize| (p + m0) % c;
    let span = (labels.iter().max().unwrap() - min) as usize + 1;

    // Successor positions, in 0..=c+1; c is corner m0 again, c+1 is the apex.
    const UNSET: u32 = u32::MAX;
    let apex = c + 1;
    let mut target = vec![0u32; c];
    let mut nearest = vec![UNSET; span];
    nearest[0] = c as u32;
    for p in (0..c).rev() {
        let l = (labels[corner_at(p)] - min) as usize;
        target[p] = if l == 0 { apex as u32 } else { nearest[l - 1] };
        debug_assert_ne!(target[p], UNSET);
        nearest[l] = p as u32;
    }

    // In-arcs per target position, sources ascending.
    let mut in_start = vec![0u32; c + 3];
    for &t in &target {
        in_start[t as usize + 1] += 1;
    }
    for p in 0..c + 2 {
        in_start[p + 1] += in_start[p];
    }
    let mut fill = in_start.clone();
    let mut in_src = vec![0u32; c];
    for (p, &t) in target.iter().enumerate() {
        in_src[fill[t as usize] as usize] = p as u32;
        fill[t as usize] += 1;
    }
    let incoming = |q: usize| &in_src[in_start[q] as usize..in_start[q + 1] as usize];

    // Rotation lists per vertex; the apex is vertex `vertex_count`.
    let mut degree = vec![0u32; vertex_count + 2];
    for p in 0..c {
        degree[corner_vertex[corner_at(p)] as usize + 1] += 1 + incoming(p).len() as u32;
    }
    degree[corner_vertex[m0] as usize + 1] += incoming(c).len() as u32;
    degree[vertex_count + 1] += incoming(apex).len() as u32;
    for v in 0..=vertex_count {
        degree[v + 1] += degree[v];
    }
    let start = degree;
    let mut cursor = start.clone();
    let mut rotation = vec![0u32; 2 * c];
    let mut push = |v: usize, h: u32, cursor: &mut Vec<u32>| {
        rotation[cursor[v] as usize] = h;
        cursor[v] += 1;
    };
    for p in (0..c).rev() {
        let i = corner_at(p);
        let v = corner_vertex[i] as usize;
        push(v, 2 * i as u32, &mut cursor);
        for &s in incoming(p) {
            push(v, 2 * corner_at(s as usize) as u32 + 1, &mut cursor);
        }
        if p == 0 {
            for &s in incoming(c) {
                push(v, 2 * corner_at(s as usize) as u32 + 1, &mut cursor);
            }
        }
    }
    for &s in incoming(apex) {
        push(vertex_count, 2 * corner_at(s as usize) as u32 + 1, &mut cursor);
    }

    let mut sigma = vec![0u32; 2 * c];
    for v in 0..=vertex_count {
        let ring = &rotation[start[v] as usize..start[v + 1] as usize];
        for (k, &h) in ring.iter().enumerate() {
            sigma[h as usize] = ring[(k + 1) % ring.len()];
        }
    }
    let apex_id = *rotation[start[vertex_count] as usize..start[vertex_count + 1] as usize]
        .iter()
        .min()
        .unwrap();
    CombinatorialMap::from_parts(sigma, eps as u32, Some(apex_id))
}

/// Map of a mobile with orientation bit `eps`; rooted at the arc drawn from
/// corner 0, leaving ∅ iff `eps = 0`, and pointed at ∂.
pub fn forward_bdg(mobile: &Mobile, eps: u8) -> CombinatorialMap {
    let tree = mobile.tree();
    let corners = white_corners(tree);
    let labels: Vec<i64> = corners.iter().map(|&w| mobile.labels()[w as usize]).collect();
    close_corners(&corners, &labels, tree.white_count(), eps & 1)
}

/// Map vertex (σ-orbit id) of each white corner of a map built by [`forward_bdg`].
pub fn corner_vertex_ids(map: &CombinatorialMap) -> Vec<u32> {
    let ids = map.vertex_ids();
    (0..map.edge_count()).map(|i| ids[2 * i]).collect()
}

/// Output of [`inverse_bdg_detailed`].
#[derive(Clone, Debug)]
pub struct InverseBdg {
    pub mobile: Mobile,
    pub eps: u8,
    /// Out-going half-edge of each white corner, in contour order.
    pub corner_half_edges: Vec<u32>,
}

/// Recovers `(mobile, eps)` from a rooted pointed bipartite map.
pub fn inverse_bdg(map: &CombinatorialMap) -> Result<(Mobile, u8)> {
    let inv = inverse_bdg_detailed(map)?;
    Ok((inv.mobile, inv.eps))
}

pub fn inverse_bdg_detailed(map: &CombinatorialMap) -> Result<InverseBdg> {
    let origin = map.origin().ok_or(Error::NotPointed)?;
    map.check()?;
    let len = map.half_edge_count();
    let n = map.edge_count();
    let (vertex_of, vertex_count) = map.vertex_indices();
    let apex = vertex_of[origin] as usize;

    // Distances from ∂.
    let mut first_half = vec![u32::MAX; vertex_count];
    for h in 0..len {
        let v = vertex_of[h] as usize;
        if first_half[v] == u32::MAX {
            first_half[v] = h as u32;
        }
    }
    let mut dist = vec![u32::MAX; vertex_count];
    dist[apex] = 0;
    let mut queue = VecDeque::from([apex]);
    while let Some(v) = queue.pop_front() {
        let h0 = first_half[v] as usize;
        let mut h = h0;
        loop {
            let w = vertex_of[h ^ 1] as usize;
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            h = map.sigma_at(h);
            if h == h0 {
                break;
            }
        }
    }

    let is_out = |h: usize| {
        let v = vertex_of[h] as usize;
        v != apex && dist[vertex_of[h ^ 1] as usize] + 1 == dist[v]
    };
    let root = map.root();
    let (h0, eps) = if dist[vertex_of[root] as usize] > dist[vertex_of[root ^ 1] as usize] {
        (root, 0u8)
    } else {
        (root ^ 1, 1u8)
    };
    let base = vertex_of[h0] as usize;

    let mut sigma_inv = vec![0u32; len];
    for h in 0..len {
        sigma_inv[map.sigma_at(h)] = h as u32;
    }
    let cw_next = |h: usize| {
        let mut g = sigma_inv[h] as usize;
        while !is_out(g) {
            g = sigma_inv[g] as usize;
        }
        g
    };
    let face_of = map.face_ids();

    // Depth-first rebuild. White vertices are entered through an out-arc
    // (the tree edge to the parent face), black ones through the out-arc of
    // their parent white corner.
    enum Frame {
        White { next: usize, stop: usize, first: bool },
        Black { arc: usize, next: usize },
    }
    let mut counts: Vec<u32> = Vec::with_capacity(n + 1);
    let mut labels: Vec<i64> = Vec::new();
    let mut corner_half_edges: Vec<u32> = Vec::with_capacity(n);
    let base_dist = dist[base] as i64;
    let count_white_children = |start: usize, stop: usize, include_start: bool| {
        let mut k = if include_start { 1 } else { 0 };
        let mut g = if include_start { cw_next(start) } else { start };
        while g != stop {
            k += 1;
            g = cw_next(g);
        }
        k
    };
    let root_children = count_white_children(h0, h0, true);
    counts.push(root_children as u32);
    labels.push(0);
    corner_half_edges.push(h0 as u32);
    let mut stack = vec![Frame::White { next: h0, stop: h0, first: true }];
    while let Some(frame) = stack.last_mut() {
        match frame {
            Frame::White { next, stop, first } => {
                if !*first && *next == *stop {
                    stack.pop();
                    continue;
                }
                *first = false;
                let arc = *next;
                *next = cw_next(arc);
                // Black child in the face on this arc.
                let face = face_of[arc];
                let mut k = 0u32;
                let mut g = map.phi(arc);
                while g != arc {
                    if is_out(g) && face_of[g] == face {
                        k += 1;
                    }
                    g = map.phi(g);
                }
                counts.push(k);
                stack.push(Frame::Black { arc, next: map.phi(arc) });
            }
            Frame::Black { arc, next } => {
                let mut g = *next;
                while g != *arc && !is_out(g) {
                    g = map.phi(g);
                }
                if g == *arc {
                    stack.pop();
                    // Back at the white parent: record the corner that follows.
                    if let Some(Frame::White { next, .. }) = stack.last() {
                        if corner_half_edges.len() < n {
                            corner_half_edges.push(*next as u32);
                        }
                    }
                    continue;
                }
                *next = map.phi(g);
                // White child entered through its out-arc `g`.
                let v = vertex_of[g] as usize;
                labels.push(dist[v] as i64 - base_dist);
                let start = cw_next(g);
                let kids = if start == g { 0 } else { count_white_children(start, g, true) };
                counts.push(kids as u32);
                corner_half_edges.push(start as u32);
                if kids > 0 {
                    stack.push(Frame::White { next: start, stop: g, first: true });
                }
            }
        }
    }
    if counts.len() != n + 1 || corner_half_edges.len() != n {
        return Err(Error::InvalidMap("map is not in the image of the correspondence".into()));
    }
    let tree = PlaneTree::from_child_counts(counts)?;
    let mobile = Mobile::new(tree, labels)?;
    Ok(InverseBdg { mobile, eps, corner_half_edges })
}
