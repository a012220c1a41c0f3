use rand::Rng;
use serde::Serialize;

/// Default truncation point of the offspring laws.
pub const DEFAULT_TRUNCATION: usize = 150;

/// The offspring laws μ0, μ1 and the jump law ν, truncated and renormalized.
#[derive(Clone, Debug)]
pub struct OffspringLaws {
    truncation: usize,
    mu0: Vec<f64>,
    mu1: Vec<f64>,
    /// `nu[k + 1]` is ν(k) for k ≥ −1.
    nu: Vec<f64>,
    mu0_cdf: Vec<f64>,
    mu1_cdf: Vec<f64>,
    nu_cdf: Vec<f64>,
    mu0_mass: f64,
    mu1_mass: f64,
}

/// Summary of the truncation, echoed into experiment reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationInfo {
    pub truncation: usize,
    pub mu0_mass: f64,
    pub mu1_mass: f64,
}

fn cdf(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    out
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Untruncated μ1(k) = (3/8) C(2k+1,k) (3/16)^k.
pub fn mu1_exact(k: usize) -> f64 {
    let mut p = 3.0 / 8.0;
    for j in 0..k {
        let j = j as f64;
        p *= 2.0 * (2.0 * j + 3.0) / (j + 2.0) * 3.0 / 16.0;
    }
    p
}

/// Untruncated μ0(k) = (2/3)(1/3)^k.
pub fn mu0_exact(k: usize) -> f64 {
    2.0 / 3.0 * (1.0f64 / 3.0).powi(k as i32)
}

impl OffspringLaws {
    pub fn new(truncation: usize) -> Self {
        let raw0: Vec<f64> = (0..=truncation).map(mu0_exact).collect();
        let raw1: Vec<f64> = (0..=truncation).map(mu1_exact).collect();
        let s0: f64 = raw0.iter().sum();
        let s1: f64 = raw1.iter().sum();
        let mu0: Vec<f64> = raw0.iter().map(|p| p / s0).collect();
        let mu1: Vec<f64> = raw1.iter().map(|p| p / s1).collect();
        let mut nu = Vec::with_capacity(truncation + 2);
        nu.push(2.0 / 3.0);
        nu.extend(mu1.iter().map(|p| p / 3.0));
        OffspringLaws {
            truncation,
            mu0_cdf: cdf(&mu0),
            mu1_cdf: cdf(&mu1),
            nu_cdf: cdf(&nu),
            mu0,
            mu1,
            nu,
            mu0_mass: s0,
            mu1_mass: s1,
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn info(&self) -> TruncationInfo {
        TruncationInfo {
            truncation: self.truncation,
            mu0_mass: self.mu0_mass,
            mu1_mass: self.mu1_mass,
        }
    }

    pub fn mu0(&self) -> &[f64] {
        &self.mu0
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    /// ν as a vector indexed by `k + 1`.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn nu_at(&self, k: i64) -> f64 {
        if k < -1 {
            return 0.0;
        }
        self.nu.get((k + 1) as usize).copied().unwrap_or(0.0)
    }

    /// ν([k, ∞)).
    pub fn nu_tail(&self, k: i64) -> f64 {
        let start = (k.max(-1) + 1) as usize;
        self.nu.iter().skip(start).rev().sum()
    }

    pub fn sample_mu0<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        draw(&self.mu0_cdf, rng.random::<f64>()) as u32
    }

    pub fn sample_mu1<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        draw(&self.mu1_cdf, rng.random::<f64>()) as u32
    }

    pub fn sample_nu<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.random::<f64>();
        if u < self.nu_cdf[0] {
            return -1;
        }
        draw(&self.nu_cdf, u) as i64 - 1
    }
}

impl Default for OffspringLaws {
    fn default() -> Self {
        OffspringLaws::new(DEFAULT_TRUNCATION)
    }
}

pub fn moments(p: &[f64], offset: i64) -> (f64, f64) {
    let mean: f64 = p.iter().enumerate().map(|(i, q)| (i as i64 + offset) as f64 * q).sum();
    let var: f64 = p
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let d = (i as i64 + offset) as f64 - mean;
            d * d * q
        })
        .sum();
    (mean, var)
}
