//! Bridges of the ν-walk: `n + 1` i.i.d. ν jumps conditioned to sum to −1.
//!
//! The fast sampler uses the following facts. A jump is −1 with probability
//! 2/3 and otherwise has law μ1. The law μ1 splits as `Cat + NB`, where `Cat`
//! counts the up-steps of a (1/4, 3/4) simple walk before it first hits −1
//! and `NB` is negative binomial with shape 1/2 and success probability 1/4.
//! Given the number `B` of −1 jumps, the remaining `m = n + 1 − B` jumps
//! sum to `U + V`, where `U` is the number of up-steps before the simple walk
//! hits −m and `V ~ NegBin(m/2, 1/4)`. Only `U + V = B − 1` is accepted, and
//! the individual jumps are then recovered from the walk and a
//! Dirichlet-multinomial split of `V`.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::rng::LabRng;
use crate::sampler::laws::OffspringLaws;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

/// Reference sampler: redraw all `n + 1` jumps until their sum is −1.
pub fn sample_nu_bridge_naive(
    n: usize,
    laws: &OffspringLaws,
    rng: &mut LabRng,
    max_attempts: u64,
) -> Result<Vec<i64>> {
    let mut jumps = vec![0i64; n + 1];
    for _ in 0..max_attempts {
        let mut sum = 0;
        for x in jumps.iter_mut() {
            *x = laws.sample_nu(rng);
            sum += *x;
        }
        if sum == -1 {
            return Ok(jumps);
        }
    }
    Err(Error::BudgetExceeded { attempts: max_attempts })
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("finite rate").sample(rng) as u64
}

/// `NegBin(shape, 1/4)` as a Poisson mixture over `Gamma(shape, 3)`.
fn negative_binomial<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> u64 {
    let lambda = Gamma::new(shape, 3.0).expect("positive shape").sample(rng);
    poisson(lambda, rng)
}

/// Runs the (1/4, 3/4) walk from 0 until it hits `-m`, two `u64` draws per
/// 64 steps. Returns the number of up-steps, or `None` once it exceeds `cap`.
fn ups_before_hitting(m: i64, cap: u64, rng: &mut LabRng) -> Option<u64> {
    let mut pos: i64 = 0;
    let mut ups: u64 = 0;
    loop {
        let bits = rng.next_u64() & rng.next_u64();
        if pos - 64 > -m {
            let u = bits.count_ones() as i64;
            pos += 2 * u - 64;
            ups += u as u64;
        } else {
            for j in 0..64 {
                if bits >> j & 1 == 1 {
                    pos += 1;
                    ups += 1;
                } else {
                    pos -= 1;
                    if pos == -m {
                        return (ups <= cap).then_some(ups);
                    }
                }
            }
        }
        if ups > cap {
            return None;
        }
    }
}

/// Replays [`ups_before_hitting`] and splits the up-steps at each new minimum.
fn replay_excursion_ups(m: usize, rng: &mut LabRng) -> Vec<u64> {
    let mut parts = Vec::with_capacity(m);
    let mut pos: i64 = 0;
    let mut since_min: u64 = 0;
    loop {
        let bits = rng.next_u64() & rng.next_u64();
        for j in 0..64 {
            if bits >> j & 1 == 1 {
                pos += 1;
                since_min += 1;
            } else {
                pos -= 1;
                if pos == -(parts.len() as i64) - 1 {
                    parts.push(since_min);
                    since_min = 0;
                    if parts.len() == m {
                        return parts;
                    }
                }
            }
        }
    }
}

/// Splits `total` into `m` parts with the law of i.i.d. `NegBin(1/2, 1/4)`
/// conditioned on their sum.
fn dirichlet_multinomial(total: u64, m: usize, rng: &mut LabRng) -> Vec<u64> {
    let gamma = Gamma::new(0.5, 1.0).expect("valid shape");
    let weights: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = weights.iter().sum();
    let mut parts = vec![0u64; m];
    if total == 0 {
        return parts;
    }
    // Sorted uniforms from normalized exponential spacings.
    let spacings: Vec<f64> = (0..=total).map(|_| Exp1.sample(rng)).collect();
    let spacing_sum: f64 = spacings.iter().sum();
    let mut u = 0.0;
    let mut bucket = 0;
    let mut edge = weights[0] / sum;
    for s in &spacings[..total as usize] {
        u += s / spacing_sum;
        while u > edge && bucket + 1 < m {
            bucket += 1;
            edge += weights[bucket] / sum;
        }
        parts[bucket] += 1;
    }
    parts
}

/// Exact sampler of the ν-bridge with `n + 1` jumps.
pub fn sample_nu_bridge(n: usize, rng: &mut LabRng, max_attempts: u64) -> Result<Vec<i64>> {
    bridge_with_weight(n, rng, max_attempts, None)
}

/// ν-bridge reweighted by `weight(b) ∈ [0, 1]`, `b` the number of −1 jumps.
pub fn sample_nu_bridge_weighted(
    n: usize,
    rng: &mut LabRng,
    max_attempts: u64,
    weight: &dyn Fn(u64) -> f64,
) -> Result<Vec<i64>> {
    bridge_with_weight(n, rng, max_attempts, Some(weight))
}

fn bridge_with_weight(
    n: usize,
    rng: &mut LabRng,
    max_attempts: u64,
    weight: Option<&dyn Fn(u64) -> f64>,
) -> Result<Vec<i64>> {
    if n == 0 {
        return Ok(vec![-1]);
    }
    let binomial = Binomial::new(n as u64 + 1, 2.0 / 3.0).expect("valid binomial");
    for _ in 0..max_attempts {
        let b = binomial.sample(rng);
        let m = n as u64 + 1 - b;
        if m == 0 || b == 0 {
            continue;
        }
        if let Some(w) = weight {
            if rng.random::<f64>() >= w(b) {
                continue;
            }
        }
        let v = negative_binomial(m as f64 / 2.0, rng);
        if v > b - 1 {
            continue;
        }
        let target = b - 1 - v;
        let mut walk_rng = rng.clone();
        if ups_before_hitting(m as i64, target, rng) != Some(target) {
            continue;
        }
        let cat = replay_excursion_ups(m as usize, &mut walk_rng);
        let nb = dirichlet_multinomial(v, m as usize, rng);
        let mut minus_one = vec![false; n + 1];
        minus_one[..b as usize].fill(true);
        minus_one.shuffle(rng);
        let mut values = cat.iter().zip(&nb).map(|(c, d)| (c + d) as i64);
        let jumps = minus_one
            .iter()
            .map(|&neg| if neg { -1 } else { values.next().unwrap() })
            .collect();
        return Ok(jumps);
    }
    Err(Error::BudgetExceeded { attempts: max_attempts })
}
