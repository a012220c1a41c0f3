//! Graph distances on maps.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::CombinatorialMap;
use crate::rng::LabRng;

/// Flat adjacency built once from σ and α.
#[derive(Clone, Debug)]
pub struct MapGraph {
    vertex_of: Vec<u32>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct DistanceProfile {
    pub source: usize,
    pub distances: Vec<u32>,
    pub eccentricity: u32,
    /// `histogram[d]` vertices at distance `d`.
    pub histogram: Vec<usize>,
}

impl DistanceProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "vertex,distance")?;
        for (v, d) in self.distances.iter().enumerate() {
            writeln!(w, "{v},{d}")?;
        }
        Ok(())
    }
}

impl MapGraph {
    pub fn new(map: &CombinatorialMap) -> Self {
        let (vertex_of, count) = map.vertex_indices();
        let mut offsets = vec![0u32; count + 1];
        for &v in &vertex_of {
            offsets[v as usize + 1] += 1;
        }
        for v in 0..count {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; vertex_of.len()];
        for h in 0..vertex_of.len() {
            let v = vertex_of[h] as usize;
            neighbors[fill[v] as usize] = vertex_of[h ^ 1];
            fill[v] += 1;
        }
        MapGraph { vertex_of, offsets, neighbors }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Compact vertex index of the vertex carrying half-edge `h`.
    pub fn vertex_of_half_edge(&self, h: usize) -> usize {
        self.vertex_of[h] as usize
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    fn distances_from(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::with_capacity(self.vertex_count());
        queue.push_back(source as u32);
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for &w in self.neighbors(v as usize) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn bfs(&self, source: usize) -> Result<DistanceProfile> {
        if source >= self.vertex_count() {
            return Err(Error::IndexOutOfRange { index: source, max: self.vertex_count() - 1 });
        }
        let distances = self.distances_from(source);
        if distances.contains(&u32::MAX) {
            return Err(Error::Disconnected);
        }
        let eccentricity = *distances.iter().max().unwrap();
        let mut histogram = vec![0usize; eccentricity as usize + 1];
        for &d in &distances {
            histogram[d as usize] += 1;
        }
        Ok(DistanceProfile { source, distances, eccentricity, histogram })
    }

    /// Distances between the vertices of the sampled corners, one BFS per
    /// distinct source, sources in parallel.
    pub fn corner_distance_matrix(&self, corner_vertices: &[u32], sample: &[usize]) -> Result<Vec<Vec<u32>>> {
        for &i in sample {
            if i >= corner_vertices.len() {
                return Err(Error::IndexOutOfRange { index: i, max: corner_vertices.len() - 1 });
            }
        }
        let sources: Vec<usize> = sample
            .iter()
            .map(|&i| self.vertex_of_half_edge(corner_vertices[i] as usize))
            .collect();
        let mut distinct: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in &sources {
            let next = distinct.len();
            distinct.entry(s).or_insert(next);
        }
        let mut order: Vec<(usize, usize)> = distinct.iter().map(|(&v, &k)| (k, v)).collect();
        order.sort_unstable();
        let rows: Vec<Vec<u32>> = order.par_iter().map(|&(_, v)| self.distances_from(v)).collect();
        if rows.iter().any(|r| r.contains(&u32::MAX)) {
            return Err(Error::Disconnected);
        }
        Ok(sources
            .iter()
            .map(|s| {
                let row = &rows[distinct[s]];
                sources.iter().map(|&t| row[t]).collect()
            })
            .collect())
    }
}

pub fn write_matrix_csv<W: Write>(sample: &[usize], matrix: &[Vec<u32>], mut w: W) -> Result<()> {
    writeln!(w, "i,j,d")?;
    for (a, row) in matrix.iter().enumerate() {
        for (b, d) in row.iter().enumerate() {
            writeln!(w, "{},{},{d}", sample[a], sample[b])?;
        }
    }
    Ok(())
}

/// `d(∂, v_U) (2n)^{-1/4}` for a uniform corner `U` of a map built from a mobile.
pub fn one_point_sample(map: &CombinatorialMap, rng: &mut LabRng) -> Result<f64> {
    let origin = map.origin().ok_or(Error::NotPointed)?;
    let graph = MapGraph::new(map);
    let profile = graph.bfs(graph.vertex_of_half_edge(origin))?;
    let n = map.edge_count();
    let u = rng.random_range(0..n);
    let d = profile.distances[graph.vertex_of_half_edge(2 * u)];
    Ok(d as f64 * (2.0 * n as f64).powf(-0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::{corner_vertex_ids, forward_bdg};
    use crate::model::{Mobile, PlaneTree};
    use crate::rng::RngState;

    fn example() -> CombinatorialMap {
        let t = PlaneTree::from_child_counts(vec![1, 2, 0, 0]).unwrap();
        forward_bdg(&Mobile::new(t, vec![0, 1, 0]).unwrap(), 0)
    }

    #[test]
    fn single_edge_profile() {
        let map = CombinatorialMap::new(vec![0, 1], 0, Some(1)).unwrap();
        let g = MapGraph::new(&map);
        let p = g.bfs(g.vertex_of_half_edge(1)).unwrap();
        assert_eq!(p.distances[g.vertex_of_half_edge(1)], 0);
        assert_eq!(p.distances[g.vertex_of_half_edge(0)], 1);
        assert_eq!(p.histogram, vec![1, 1]);
        let mut rng = RngState::new(0).rng();
        let x = one_point_sample(&map, &mut rng).unwrap();
        assert!((x - 2f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn worked_example_distances() {
        let map = example();
        let g = MapGraph::new(&map);
        let apex = g.vertex_of_half_edge(map.origin().unwrap());
        let p = g.bfs(apex).unwrap();
        let corners = corner_vertex_ids(&map);
        // Corners 0, 1, 2 sit at ∅, w1, w2.
        let d: Vec<u32> = corners
            .iter()
            .map(|&h| p.distances[g.vertex_of_half_edge(h as usize)])
            .collect();
        assert_eq!(d, vec![1, 2, 1]);
        assert_eq!(p.distances[apex], 0);
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let map = example();
        let g = MapGraph::new(&map);
        let corners = corner_vertex_ids(&map);
        let m = g.corner_distance_matrix(&corners, &[0, 1, 2, 1]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert_eq!(m[1][3], 0);
        assert!(g.corner_distance_matrix(&corners, &[5]).is_err());
        let mut buf = Vec::new();
        write_matrix_csv(&[0, 1], &[vec![0, 1], vec![1, 0]], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("i,j,d\n0,0,0\n"));
    }

    #[test]
    fn disconnected_is_reported() {
        // Two separate single edges.
        let map = CombinatorialMap::new(vec![0, 1, 2, 3], 0, None).unwrap();
        let g = MapGraph::new(&map);
        assert!(matches!(g.bfs(0), Err(Error::Disconnected)));
    }
}
