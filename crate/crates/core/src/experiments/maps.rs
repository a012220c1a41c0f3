//! Checks on sampled trees and maps: scaling constants, one-point laws,
//! re-rooting and vertex counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{replicates, ExperimentReport, ReportBuilder};
use crate::bdg::{forward_bdg, inverse_bdg_detailed};
use crate::encodings::{contour_c, label_l0, white_contour_c0};
use crate::error::{Error, Result};
use crate::metrics::MapGraph;
use crate::oracle::{dyck_max_limit, sample_quadrangulation};
use crate::rng::LabRng;
use crate::sampler::laws::OffspringLaws;
use crate::sampler::{sample_conditioned_tree, sample_mobile};
use crate::stats::{ks_two_sample, mean};

/// 4√2/9.
pub const CONTOUR_CONSTANT: f64 = 0.628_539_361_054_709;

/// `E[max e] = √(π/2)` for the normalized excursion.
pub fn excursion_max_mean() -> f64 {
    (std::f64::consts::PI / 2.0).sqrt()
}

fn jitter(rng: &mut LabRng, on: bool) -> f64 {
    if on {
        rng.random::<f64>() - 0.5
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourLabelConfig {
    /// Ascending sizes; consecutive entries are compared by KS.
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Times `t` at which `n^{-1/4} L⁰_{⌊nt⌋}` is recorded.
    pub grid: Vec<f64>,
    pub mean_rel_tol: f64,
    pub ks_max: f64,
    /// Add a uniform (−1/2, 1/2) offset to integer labels before scaling.
    pub jitter: bool,
    pub oracle_tol: f64,
}

impl Default for ContourLabelConfig {
    fn default() -> Self {
        ContourLabelConfig {
            n_list: vec![50_000, 100_000],
            reps: 2000,
            seed: 1,
            grid: vec![0.25, 0.5, 0.75],
            mean_rel_tol: 0.03,
            ks_max: 0.05,
            jitter: true,
            oracle_tol: 1e-3,
        }
    }
}

struct ContourSample {
    max_c0: f64,
    /// `C_{2i} = 2 C⁰_i` and `max C − 2 max C⁰ ∈ {0, 1}`.
    max_c_ok: bool,
    labels: Vec<f64>,
    raw_labels: Vec<f64>,
}

pub fn contour_label_scaling(cfg: &ContourLabelConfig) -> Result<ExperimentReport> {
    if cfg.n_list.is_empty() || cfg.reps < 2 || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n_list must be ascending and reps ≥ 2".into()));
    }
    if cfg.grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidConfig("grid times must lie in [0, 1]".into()));
    }
    let laws = OffspringLaws::default();
    let last = *cfg.n_list.last().unwrap();
    let mut b = ReportBuilder::new("contour_label_scaling", last, cfg.seed, cfg, &laws);
    let target = CONTOUR_CONSTANT * excursion_max_mean();
    let oracle = dyck_max_limit();
    b.stat("target_mean_max", target);
    b.stat("oracle_excursion_max_mean", oracle);
    b.at_most("oracle_error", (oracle - excursion_max_mean()).abs(), cfg.oracle_tol);

    let mut runs: Vec<Vec<ContourSample>> = Vec::new();
    let mut bad_max = 0;
    for (tag, &n) in cfg.n_list.iter().enumerate() {
        let samples = replicates(cfg.seed, tag as u64, cfg.reps, |_, rng| {
            let mobile = sample_mobile(n, rng)?;
            let c0 = white_contour_c0(mobile.tree());
            let c = contour_c(mobile.tree());
            let l0 = label_l0(&mobile);
            let scale = (n as f64).powf(-0.25);
            let mut labels = Vec::with_capacity(cfg.grid.len());
            let mut raw_labels = Vec::with_capacity(cfg.grid.len());
            for &t in &cfg.grid {
                let idx = ((n as f64 * t).floor() as usize).min(n);
                let l = l0.values[idx] as f64;
                raw_labels.push(l * scale);
                labels.push((l + jitter(rng, cfg.jitter)) * scale);
            }
            Ok(ContourSample {
                max_c0: c0.max() as f64 / (n as f64).sqrt(),
                max_c_ok: c.values.iter().step_by(2).zip(&c0.values).all(|(&a, &b)| a == 2 * b)
                    && (0..=1).contains(&(c.max() - 2 * c0.max())),
                labels,
                raw_labels,
            })
        })?;
        bad_max += samples.iter().filter(|s| !s.max_c_ok).count();
        let maxima: Vec<f64> = samples.iter().map(|s| s.max_c0).collect();
        let m = mean(&maxima);
        b.stat(format!("mean_max_c0_n{n}"), m);
        b.rows(&format!("max_c0_n{n}"), &maxima);
        if n == last {
            b.at_most(format!("mean_max_relative_error_n{n}"), (m - target).abs() / target, cfg.mean_rel_tol);
        }
        runs.push(samples);
    }
    b.zero("contour_doubling_violations", bad_max);
    for w in 0..runs.len().saturating_sub(1) {
        let (n1, n2) = (cfg.n_list[w], cfg.n_list[w + 1]);
        let mut worst: f64 = 0.0;
        let mut worst_raw: f64 = 0.0;
        for (g, &t) in cfg.grid.iter().enumerate() {
            let a: Vec<f64> = runs[w].iter().map(|s| s.labels[g]).collect();
            let c: Vec<f64> = runs[w + 1].iter().map(|s| s.labels[g]).collect();
            let ks = ks_two_sample(&a, &c);
            let a: Vec<f64> = runs[w].iter().map(|s| s.raw_labels[g]).collect();
            let c: Vec<f64> = runs[w + 1].iter().map(|s| s.raw_labels[g]).collect();
            let raw = ks_two_sample(&a, &c);
            b.stat(format!("ks_label_t{t}_n{n1}_vs_n{n2}"), ks.statistic);
            b.stat(format!("ks_label_raw_t{t}_n{n1}_vs_n{n2}"), raw.statistic);
            worst = worst.max(ks.statistic);
            worst_raw = worst_raw.max(raw.statistic);
        }
        b.stat(format!("ks_label_raw_max_n{n1}_vs_n{n2}"), worst_raw);
        b.at_most(format!("ks_label_max_n{n1}_vs_n{n2}"), worst, cfg.ks_max);
    }
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnePointConfig {
    /// Edges of the bipartite maps.
    pub n_bip: usize,
    /// Faces of the quadrangulations (`2 · faces` edges).
    pub faces_quad: usize,
    pub reps: usize,
    pub seed: u64,
    pub ks_max: f64,
    pub jitter: bool,
}

impl Default for OnePointConfig {
    fn default() -> Self {
        OnePointConfig { n_bip: 50_000, faces_quad: 50_000, reps: 5000, seed: 1, ks_max: 0.05, jitter: true }
    }
}

/// `(d(∂, v_U), jittered copy)` for a uniform corner `U` (half-edge `2U`).
fn origin_to_uniform_corner(
    map: &crate::CombinatorialMap,
    corners: usize,
    rng: &mut LabRng,
    jittered: bool,
) -> Result<(f64, f64)> {
    let graph = MapGraph::new(map);
    let origin = map.origin().ok_or(Error::NotPointed)?;
    let profile = graph.bfs(graph.vertex_of_half_edge(origin))?;
    let u = rng.random_range(0..corners);
    let d = profile.distances[graph.vertex_of_half_edge(2 * u)] as f64;
    Ok((d, d + jitter(rng, jittered)))
}

pub fn one_point_law_cross_check(cfg: &OnePointConfig) -> Result<ExperimentReport> {
    if cfg.n_bip == 0 || cfg.faces_quad == 0 || cfg.reps < 2 {
        return Err(Error::InvalidConfig("sizes must be positive and reps ≥ 2".into()));
    }
    let laws = OffspringLaws::default();
    let n = cfg.n_bip;
    let nq = 2 * cfg.faces_quad;
    let s_bip = (2.0 * n as f64).powf(-0.25);
    let s_quad = (9.0 / (4.0 * nq as f64)).powf(0.25);
    let bip = replicates(cfg.seed, 0, cfg.reps, |_, rng| {
        let mobile = sample_mobile(n, rng)?;
        let eps = rng.random_range(0..2u8);
        let map = forward_bdg(&mobile, eps);
        origin_to_uniform_corner(&map, n, rng, cfg.jitter)
    })?;
    let quad = replicates(cfg.seed, 1, cfg.reps, |_, rng| {
        let map = sample_quadrangulation(cfg.faces_quad, rng);
        origin_to_uniform_corner(&map, nq, rng, cfg.jitter)
    })?;
    let scaled = |v: &[(f64, f64)], s: f64, pick: fn(&(f64, f64)) -> f64| -> Vec<f64> {
        v.iter().map(|x| pick(x) * s).collect()
    };
    let a_raw = scaled(&bip, s_bip, |x| x.0);
    let c_raw = scaled(&quad, s_quad, |x| x.0);
    let a = scaled(&bip, s_bip, |x| x.1);
    let c = scaled(&quad, s_quad, |x| x.1);
    let ks = ks_two_sample(&a, &c);
    let raw = ks_two_sample(&a_raw, &c_raw);
    let mut b = ReportBuilder::new("one_point_law", n, cfg.seed, cfg, &laws);
    b.stat("scale_bipartite", s_bip);
    b.stat("scale_quadrangulation", s_quad);
    b.stat("mean_bipartite", mean(&a_raw));
    b.stat("mean_quadrangulation", mean(&c_raw));
    b.stat("ks_raw", raw.statistic);
    b.stat("ks_p_value", ks.p_value);
    b.at_most("ks", ks.statistic, cfg.ks_max);
    b.rows("bipartite_scaled_distance", &a_raw);
    b.rows("quadrangulation_scaled_distance", &c_raw);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RerootingConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub ks_max: f64,
}

impl Default for RerootingConfig {
    fn default() -> Self {
        RerootingConfig { n: 20_000, reps: 10_000, seed: 1, ks_max: 0.03 }
    }
}

struct RerootSample {
    /// `d(v_i, v_j) − d'(v'_0, v'_k)`.
    gap: i64,
    d0i: u32,
    d0k_prime: u32,
}

fn reroot_once(n: usize, rng: &mut LabRng) -> Result<RerootSample> {
    let mobile = sample_mobile(n, rng)?;
    let eps = rng.random_range(0..2u8);
    let map = forward_bdg(&mobile, eps);
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    let flip = rng.random_range(0..2usize);
    let rerooted = map.with_root(2 * i + flip);
    let inv = inverse_bdg_detailed(&rerooted)?;
    let k = inv
        .corner_half_edges
        .iter()
        .position(|&h| h as usize / 2 == j)
        .ok_or_else(|| Error::InvalidMap("edge missing from the re-rooted contour".into()))?;
    let graph = MapGraph::new(&map);
    let vertex = |h: usize| graph.vertex_of_half_edge(h);
    let from_i = graph.bfs(vertex(2 * i))?;
    let from_0 = graph.bfs(vertex(0))?;
    let from_0p = graph.bfs(vertex(inv.corner_half_edges[0] as usize))?;
    let dij = from_i.distances[vertex(2 * j)];
    let d0k = from_0p.distances[vertex(inv.corner_half_edges[k] as usize)];
    Ok(RerootSample { gap: dij as i64 - d0k as i64, d0i: from_0.distances[vertex(2 * i)], d0k_prime: d0k })
}

pub fn rerooting_invariance_check(cfg: &RerootingConfig) -> Result<ExperimentReport> {
    if cfg.n == 0 || cfg.reps < 2 {
        return Err(Error::InvalidConfig("n must be positive and reps ≥ 2".into()));
    }
    let laws = OffspringLaws::default();
    let samples = replicates(cfg.seed, 0, cfg.reps, |_, rng| reroot_once(cfg.n, rng))?;
    let a: Vec<f64> = samples.iter().map(|s| s.d0i as f64).collect();
    let c: Vec<f64> = samples.iter().map(|s| s.d0k_prime as f64).collect();
    let gaps: Vec<f64> = samples.iter().map(|s| s.gap as f64).collect();
    let ks = ks_two_sample(&a, &c);
    let mut b = ReportBuilder::new("rerooting_invariance", cfg.n, cfg.seed, cfg, &laws);
    b.stat("max_abs_gap", gaps.iter().fold(0.0, |m, g| m.max(g.abs())));
    b.stat("mean_d_0_i", mean(&a));
    b.stat("mean_d_prime_0_k", mean(&c));
    b.stat("ks_p_value", ks.p_value);
    b.zero("gap_bound_violations", samples.iter().filter(|s| s.gap.abs() > 2).count());
    b.at_most("ks", ks.statistic, cfg.ks_max);
    b.rows("gap", &gaps);
    b.rows("d_0_i", &a);
    b.rows("d_prime_0_k", &c);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VertexCountConfig {
    /// Ascending sizes.
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Size at which the mean and the TV proxy are thresholded.
    pub check_n: usize,
    pub mean_tol: f64,
    pub tv_max: f64,
    /// Width of the deviation event `|Card V − 2n/3| > δ n`.
    pub delta: f64,
    /// Replicates (per size) whose map is built to cross-check `Card V`.
    pub map_checks: usize,
}

impl Default for VertexCountConfig {
    fn default() -> Self {
        VertexCountConfig {
            n_list: vec![1_000, 10_000, 100_000],
            reps: 1000,
            seed: 1,
            check_n: 10_000,
            mean_tol: 0.01,
            tv_max: 0.02,
            delta: 0.05,
            map_checks: 5,
        }
    }
}

/// `E|1 − (1/X)/E(1/X)|` for `X = Card V / (2n/3)`.
pub fn tv_proxy(vertex_counts: &[f64], n: usize) -> f64 {
    let inv: Vec<f64> = vertex_counts.iter().map(|&v| 2.0 * n as f64 / 3.0 / v).collect();
    let m = mean(&inv);
    mean(&inv.iter().map(|w| (1.0 - w / m).abs()).collect::<Vec<_>>())
}

pub fn vertex_count_check(cfg: &VertexCountConfig) -> Result<ExperimentReport> {
    if cfg.n_list.is_empty() || cfg.reps < 2 || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n_list must be ascending and reps ≥ 2".into()));
    }
    let laws = OffspringLaws::default();
    let last = *cfg.n_list.last().unwrap();
    let mut b = ReportBuilder::new("vertex_count", last, cfg.seed, cfg, &laws);
    let mut tvs = Vec::new();
    let mut mismatches = 0;
    for (tag, &n) in cfg.n_list.iter().enumerate() {
        let counts = replicates(cfg.seed, tag as u64, cfg.reps, |i, rng| {
            if i < cfg.map_checks {
                let mobile = sample_mobile(n, rng)?;
                let v = mobile.tree().white_count() + 1;
                let built = forward_bdg(&mobile, 0).vertex_count();
                Ok((v as f64, built != v))
            } else {
                Ok((sample_conditioned_tree(n, rng)?.white_count() as f64 + 1.0, false))
            }
        })?;
        mismatches += counts.iter().filter(|c| c.1).count();
        let v: Vec<f64> = counts.iter().map(|c| c.0).collect();
        let frac = mean(&v) / n as f64;
        let tail = v.iter().filter(|&&x| (x - 2.0 * n as f64 / 3.0).abs() > cfg.delta * n as f64).count() as f64
            / cfg.reps as f64;
        let tv = tv_proxy(&v, n);
        b.stat(format!("mean_fraction_n{n}"), frac);
        b.stat(format!("tail_frequency_n{n}"), tail);
        b.stat(format!("tv_proxy_n{n}"), tv);
        if n == cfg.check_n {
            b.at_most(format!("mean_fraction_error_n{n}"), (frac - 2.0 / 3.0).abs(), cfg.mean_tol);
            b.at_most(format!("tv_proxy_n{n}"), tv, cfg.tv_max);
        }
        b.rows(&format!("vertex_count_n{n}"), &v);
        tvs.push(tv);
    }
    b.zero("map_vertex_count_mismatches", mismatches);
    b.decreasing("tv_proxy_not_decreasing", &tvs);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((CONTOUR_CONSTANT - 4.0 * 2f64.sqrt() / 9.0).abs() < 1e-15);
        assert!((CONTOUR_CONSTANT * excursion_max_mean() - 0.78776).abs() < 1e-5);
    }

    #[test]
    fn single_edge_vertex_count() {
        // The only map with one edge has two vertices: X_1 = 2 / (2/3) = 3.
        let mut rng = crate::RngState::new(3).rng();
        let mobile = sample_mobile(1, &mut rng).unwrap();
        let map = forward_bdg(&mobile, 0);
        assert_eq!(map.vertex_count(), 2);
        assert_eq!(mobile.tree().white_count() + 1, 2);
        assert_eq!(tv_proxy(&[2.0, 2.0], 1), 0.0);
    }

    #[test]
    fn small_runs() {
        let r = rerooting_invariance_check(&RerootingConfig { n: 200, reps: 50, ..Default::default() }).unwrap();
        assert!(r.check("gap_bound_violations").unwrap().passed);
        let v = vertex_count_check(&VertexCountConfig {
            n_list: vec![50, 100],
            reps: 20,
            check_n: 100,
            ..Default::default()
        })
        .unwrap();
        assert!(v.check("map_vertex_count_mismatches").unwrap().passed);
        let c = contour_label_scaling(&ContourLabelConfig {
            n_list: vec![100, 200],
            reps: 20,
            ..Default::default()
        })
        .unwrap();
        assert!(c.check("contour_doubling_violations").unwrap().passed);
        let o = one_point_law_cross_check(&OnePointConfig { n_bip: 100, faces_quad: 50, reps: 20, ..Default::default() })
            .unwrap();
        assert_eq!(o.replicates.len(), 40);
    }
}
