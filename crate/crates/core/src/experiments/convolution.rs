//! Convolution powers of ν and first-passage dynamic programs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::oracle::mu1_rational;
use crate::sampler::laws::OffspringLaws;

/// Standard deviations kept on each side of a convolution window.
pub const WINDOW_SIGMAS: f64 = 30.0;

/// A pmf on the integers `lo, lo + 1, ...`.
#[derive(Clone, Debug)]
pub struct Dist {
    pub lo: i64,
    pub p: Vec<f64>,
}

impl Dist {
    pub fn at(&self, x: i64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        self.p.get((x - self.lo) as usize).copied().unwrap_or(0.0)
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.p.len() as i64 - 1
    }

    pub fn mass(&self) -> f64 {
        self.p.iter().sum()
    }

    fn nu(laws: &OffspringLaws) -> Self {
        Dist { lo: -1, p: laws.nu().to_vec() }
    }
}

fn sigma(laws: &OffspringLaws) -> f64 {
    let (_, var) = crate::sampler::laws::moments(laws.nu(), -1);
    var.sqrt()
}

/// Support kept for the sum of `j` jumps.
fn window(laws: &OffspringLaws, j: usize) -> (i64, i64) {
    let half = (WINDOW_SIGMAS * sigma(laws) * (j as f64).sqrt()).ceil() as i64 + 2 * laws.truncation() as i64;
    (-(j as i64).min(half), half.min(j as i64 * laws.truncation() as i64))
}

fn convolve(a: &Dist, b: &Dist, lo: i64, hi: i64) -> Dist {
    let lo = lo.max(a.lo + b.lo);
    let hi = hi.min(a.hi() + b.hi());
    let mut p = vec![0.0; (hi - lo + 1).max(0) as usize];
    for (i, &x) in a.p.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let base = a.lo + i as i64 + b.lo;
        let start = (lo - base).max(0) as usize;
        let end = ((hi - base + 1).max(0) as usize).min(b.p.len());
        for (k, &y) in b.p.iter().enumerate().take(end).skip(start) {
            p[(base + k as i64 - lo) as usize] += x * y;
        }
    }
    Dist { lo, p }
}

/// Law of `S_m` for the ν-walk from 0, by binary powering on a window of
/// `WINDOW_SIGMAS` standard deviations.
pub fn nu_power(laws: &OffspringLaws, m: usize) -> Dist {
    if m == 0 {
        return Dist { lo: 0, p: vec![1.0] };
    }
    let bits = usize::BITS - m.leading_zeros();
    let mut acc = Dist::nu(laws);
    let mut count = 1usize;
    for b in (0..bits - 1).rev() {
        count *= 2;
        let (lo, hi) = window(laws, count);
        acc = convolve(&acc, &acc, lo, hi);
        if (m >> b) & 1 == 1 {
            count += 1;
            let (lo, hi) = window(laws, count);
            acc = convolve(&acc, &Dist::nu(laws), lo, hi);
        }
    }
    debug_assert_eq!(count, m);
    acc
}

/// Result of running the ν-walk from 1, killed on hitting 0.
#[derive(Clone, Debug)]
pub struct KilledWalk {
    /// `first_passage[t] = P_1(τ = t)`; index 0 is unused.
    pub first_passage: Vec<f64>,
    /// `survivors[x] = P_1(S_steps = x, τ > steps)`; index 0 is unused.
    pub survivors: Vec<f64>,
}

/// Runs `steps` steps of the killed walk. With `horizon = Some(T)` positions
/// from which 0 cannot be reached by time `T` are discarded, which leaves
/// `P_1(τ = t)` for `t ≤ T` exact.
pub fn killed_walk(laws: &OffspringLaws, steps: usize, horizon: Option<usize>) -> KilledWalk {
    let nu = laws.nu();
    let cap_hi = window(laws, steps).1.max(2) as usize;
    let mut p = vec![0.0f64; 2];
    p[1] = 1.0;
    let mut first_passage = vec![0.0; steps + 1];
    for t in 1..=steps {
        let cap = match horizon {
            Some(h) => h.saturating_sub(t).min(cap_hi),
            None => cap_hi,
        };
        first_passage[t] = p.get(1).copied().unwrap_or(0.0) * nu[0];
        let top = (p.len() - 1 + nu.len() - 2).min(cap);
        let mut next = vec![0.0f64; top + 1];
        for (x, &q) in p.iter().enumerate().skip(1) {
            if q == 0.0 {
                continue;
            }
            // Jump k = j - 1 lands on x + j - 1.
            let j_lo = if x == 1 { 1 } else { 0 };
            let j_hi = (top + 1).saturating_sub(x).min(nu.len() - 1);
            for j in j_lo..=j_hi {
                next[x + j - 1] += q * nu[j];
            }
        }
        p = next;
        if p.len() < 2 {
            p.resize(2, 0.0);
        }
    }
    KilledWalk { first_passage, survivors: p }
}

/// Exact ν(k) for `-1 ≤ k`, untruncated.
pub fn nu_rational(k: i64) -> BigRational {
    match k {
        i64::MIN..=-2 => BigRational::zero(),
        -1 => BigRational::new(BigInt::from(2), BigInt::from(3)),
        _ => mu1_rational(k as u32) / BigRational::from_integer(BigInt::from(3)),
    }
}

/// `P_j(τ = m)` for `1 ≤ j, m ≤ m_max`, indexed `[j][m]`, from the killed
/// walk and `j`-fold convolution of the first-passage law.
pub fn first_passage_table(m_max: usize) -> Vec<Vec<BigRational>> {
    let nu: Vec<BigRational> = (-1..m_max as i64).map(nu_rational).collect();
    let mut f = vec![BigRational::zero(); m_max + 1];
    let mut p = vec![BigRational::zero(); m_max + 1];
    p[1] = BigRational::one();
    for t in 1..=m_max {
        f[t] = &p[1] * &nu[0];
        let cap = m_max - t;
        let mut next = vec![BigRational::zero(); m_max + 1];
        for x in 1..=m_max {
            if p[x].is_zero() {
                continue;
            }
            for (j, w) in nu.iter().enumerate() {
                let y = x + j;
                if y < 2 || y - 1 > cap {
                    continue;
                }
                next[y - 1] += &p[x] * w;
            }
        }
        p = next;
    }
    let mut table = vec![vec![BigRational::zero(); m_max + 1]; m_max + 1];
    table[1] = f.clone();
    for j in 2..=m_max {
        for m in 1..=m_max {
            let mut s = BigRational::zero();
            for a in 1..m {
                if !table[j - 1][a].is_zero() && !f[m - a].is_zero() {
                    s += &table[j - 1][a] * &f[m - a];
                }
            }
            table[j][m] = s;
        }
    }
    table
}

/// `P_0(S_m = -j)` for `0 ≤ j, m ≤ m_max`, indexed `[j][m]`.
pub fn walk_return_table(m_max: usize) -> Vec<Vec<BigRational>> {
    let nu: Vec<BigRational> = (-1..m_max as i64).map(nu_rational).collect();
    let mut table = vec![vec![BigRational::zero(); m_max + 1]; m_max + 1];
    // dist[s + m_max] = P(S_t = s), kept for s ≤ m_max - t.
    let mut dist = vec![BigRational::zero(); 2 * m_max + 1];
    dist[m_max] = BigRational::one();
    table[0][0] = BigRational::one();
    for t in 1..=m_max {
        let mut next = vec![BigRational::zero(); 2 * m_max + 1];
        let top = (m_max - t) as i64;
        for (i, q) in dist.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let s = i as i64 - m_max as i64;
            for (j, w) in nu.iter().enumerate() {
                let y = s + j as i64 - 1;
                if y > top {
                    break;
                }
                next[(y + m_max as i64) as usize] += q * w;
            }
        }
        dist = next;
        for (j, row) in table.iter_mut().enumerate() {
            row[t] = dist[m_max - j].clone();
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_match_direct_convolution() {
        let laws = OffspringLaws::default();
        let direct = (1..=7).fold(Dist { lo: 0, p: vec![1.0] }, |acc, _| {
            convolve(&acc, &Dist::nu(&laws), i64::MIN / 4, i64::MAX / 4)
        });
        let fast = nu_power(&laws, 7);
        for x in -7..40 {
            assert!((direct.at(x) - fast.at(x)).abs() < 1e-15);
        }
        assert!((nu_power(&laws, 1000).mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn killed_walk_small_values() {
        let laws = OffspringLaws::default();
        let k = killed_walk(&laws, 3, None);
        assert!((k.first_passage[1] - 2.0 / 3.0).abs() < 1e-15);
        let total: f64 = k.first_passage.iter().sum::<f64>() + k.survivors.iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-12);
        let h = killed_walk(&laws, 3, Some(3));
        assert!((h.first_passage[3] - k.first_passage[3]).abs() < 1e-15);
        assert!((h.first_passage[3] - 1.0 / 24.0).abs() < 1e-6);
    }

    #[test]
    fn rational_hand_values() {
        let t = first_passage_table(4);
        let w = walk_return_table(4);
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(t[1][1], r(2, 3));
        assert_eq!(t[1][3], r(1, 24));
        assert_eq!(t[2][1], r(0, 1));
        assert_eq!(w[1][1], r(2, 3));
        assert_eq!(w[1][3], r(1, 8));
    }
}
