//! Checks on the ν-walk: first passage, ladder heights, local limits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::convolution::{first_passage_table, killed_walk, nu_power, walk_return_table};
use super::{replicates, ExperimentReport, ReportBuilder};
use crate::encodings::reversed_ladder_counts;
use crate::error::{Error, Result};
use crate::sampler::laws::OffspringLaws;
use crate::sampler::unconditioned_edge_count;
use crate::stats::{chi_square_gof, mean};

/// σ² of ν.
pub const NU_VARIANCE: f64 = 4.5;
/// 3σ²/4.
pub const LADDER_MEAN: f64 = 27.0 / 8.0;

/// 1/(σ√(2π)).
pub fn gaussian_constant() -> f64 {
    1.0 / (NU_VARIANCE.sqrt() * (2.0 * std::f64::consts::PI).sqrt())
}

fn check_range(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(Error::InvalidConfig(format!("{name} = {value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KempermanConfig {
    pub j_max: usize,
    pub m_max: usize,
}

impl Default for KempermanConfig {
    fn default() -> Self {
        KempermanConfig { j_max: 40, m_max: 40 }
    }
}

/// Exact-rational check of `P_j(τ = m) = (j/m) P_j(S_m = 0)`.
pub fn kemperman_check(cfg: &KempermanConfig) -> Result<ExperimentReport> {
    check_range("m_max", cfg.m_max as f64, 1.0, 60.0)?;
    check_range("j_max", cfg.j_max as f64, 1.0, cfg.m_max as f64)?;
    let laws = OffspringLaws::default();
    let tau = first_passage_table(cfg.m_max);
    let walk = walk_return_table(cfg.m_max);
    let mut b = ReportBuilder::new("kemperman", cfg.m_max, 0, cfg, &laws);
    let mut violations = 0;
    let mut compared = 0;
    for j in 1..=cfg.j_max {
        for m in j..=cfg.m_max {
            let rhs = BigRational::new(BigInt::from(j), BigInt::from(m)) * &walk[j][m];
            compared += 1;
            if tau[j][m] != rhs {
                violations += 1;
            }
        }
        // Below the diagonal both sides vanish.
        for m in 1..j {
            compared += 1;
            if !tau[j][m].is_zero() || !walk[j][m].is_zero() {
                violations += 1;
            }
        }
    }
    b.stat("pairs_compared", compared as f64);
    b.stat("p1_tau1", tau[1][1].to_f64().unwrap_or(f64::NAN));
    b.zero("identity_violations", violations);
    let hand = |j: usize, m: usize, num: i64, den: i64| tau[j][m] == BigRational::new(num.into(), den.into());
    let mut hand_bad = 0;
    if !hand(1, 1, 2, 3) {
        hand_bad += 1;
    }
    if cfg.m_max >= 3 && !hand(1, 3, 1, 24) {
        hand_bad += 1;
    }
    if cfg.j_max >= 2 && !hand(2, 1, 0, 1) {
        hand_bad += 1;
    }
    b.zero("hand_value_mismatches", hand_bad);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    pub epochs: usize,
    /// Steps after which an epoch is abandoned as censored.
    pub epoch_cap: usize,
    pub chunk: usize,
    pub seed: u64,
    pub mean_rel_tol: f64,
    pub chi_square_min_p: f64,
    pub max_censored_fraction: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            epochs: 1_000_000,
            epoch_cap: 100_000,
            chunk: 10_000,
            seed: 1,
            mean_rel_tol: 0.02,
            chi_square_min_p: 1e-3,
            max_censored_fraction: 0.01,
        }
    }
}

/// First strict ladder height of the ν-walk, `None` if censored.
fn ladder_height(laws: &OffspringLaws, rng: &mut crate::LabRng, cap: usize) -> Option<i64> {
    let mut s = 0i64;
    for _ in 0..cap {
        s += laws.sample_nu(rng);
        if s > 0 {
            return Some(s);
        }
    }
    None
}

/// Strict ascending ladder heights of the ν-walk against `(3/2) ν([k, ∞))`.
pub fn ladder_height_check(cfg: &LadderConfig) -> Result<ExperimentReport> {
    if cfg.epochs == 0 || cfg.chunk == 0 || cfg.epoch_cap == 0 {
        return Err(Error::InvalidConfig("epochs, chunk and epoch_cap must be positive".into()));
    }
    let laws = OffspringLaws::default();
    let k_max = laws.truncation();
    let chunks = cfg.epochs.div_ceil(cfg.chunk);
    let per_chunk = replicates(cfg.seed, 0, chunks, |c, rng| {
        let size = cfg.chunk.min(cfg.epochs - c * cfg.chunk);
        let mut counts = vec![0u64; k_max + 1];
        let mut censored = 0u64;
        for _ in 0..size {
            match ladder_height(&laws, rng, cfg.epoch_cap) {
                Some(h) => counts[h as usize] += 1,
                None => censored += 1,
            }
        }
        Ok((counts, censored))
    })?;
    let mut counts = vec![0u64; k_max + 1];
    let mut censored = 0u64;
    let mut chunk_means = Vec::with_capacity(chunks);
    for (c, z) in &per_chunk {
        let n: u64 = c.iter().sum();
        let s: f64 = c.iter().enumerate().map(|(k, &x)| k as f64 * x as f64).sum();
        chunk_means.push(s / n.max(1) as f64);
        for (a, x) in counts.iter_mut().zip(c) {
            *a += x;
        }
        censored += z;
    }
    let complete: u64 = counts.iter().sum();
    let emp_mean = counts.iter().enumerate().map(|(k, &x)| k as f64 * x as f64).sum::<f64>() / complete as f64;
    let probs: Vec<f64> = (1..=k_max as i64).map(|k| 1.5 * laws.nu_tail(k)).collect();
    let chi = chi_square_gof(&counts[1..], &probs, 5.0);
    let mut b = ReportBuilder::new("ladder_height", cfg.epochs, cfg.seed, cfg, &laws);
    b.stat("complete_epochs", complete as f64);
    b.stat("censored_epochs", censored as f64);
    b.stat("empirical_mean", emp_mean);
    b.stat("target_mean", LADDER_MEAN);
    b.stat("p_height_1_empirical", counts[1] as f64 / complete as f64);
    b.stat("p_height_1_theory", probs[0]);
    b.stat("chi_square", chi.statistic);
    b.stat("chi_square_dof", chi.dof as f64);
    b.stat("chi_square_p", chi.p_value);
    b.stat("theory_mass", probs.iter().sum());
    b.at_most("mean_relative_error", (emp_mean - LADDER_MEAN).abs() / LADDER_MEAN, cfg.mean_rel_tol);
    b.at_least("chi_square_p_value", chi.p_value, cfg.chi_square_min_p);
    b.at_most("censored_fraction", censored as f64 / cfg.epochs as f64, cfg.max_censored_fraction);
    b.rows("chunk_mean_height", &chunk_means);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalLimitConfig {
    /// Ascending; the threshold applies to the last entry.
    pub m_list: Vec<usize>,
    pub sup_error_max: f64,
}

impl Default for LocalLimitConfig {
    fn default() -> Self {
        LocalLimitConfig { m_list: vec![500, 1000, 2000], sup_error_max: 0.02 }
    }
}

/// `sup_{|j| ≤ 4σ√m} (1 ∨ j²/m) |√m P_j(S_m = 0) − g(j/√m)|`, `g` the centred
/// Gaussian density of variance σ².
pub fn local_limit_sup_error(laws: &OffspringLaws, m: usize) -> f64 {
    let d = nu_power(laws, m);
    let sm = (m as f64).sqrt();
    let reach = (4.0 * NU_VARIANCE.sqrt() * sm).floor() as i64;
    let c = gaussian_constant();
    (-reach..=reach)
        .map(|j| {
            let jf = j as f64;
            let weight = (jf * jf / m as f64).max(1.0);
            let g = c * (-jf * jf / (2.0 * NU_VARIANCE * m as f64)).exp();
            weight * (sm * d.at(-j) - g).abs()
        })
        .fold(0.0, f64::max)
}

pub fn local_limit_check(cfg: &LocalLimitConfig) -> Result<ExperimentReport> {
    if cfg.m_list.is_empty() || cfg.m_list.iter().any(|&m| m == 0 || m > 5000) {
        return Err(Error::InvalidConfig("m_list entries must lie in 1..=5000".into()));
    }
    let laws = OffspringLaws::default();
    let last = *cfg.m_list.last().unwrap();
    let mut b = ReportBuilder::new("local_limit", last, 0, cfg, &laws);
    let errors: Vec<f64> = cfg.m_list.iter().map(|&m| local_limit_sup_error(&laws, m)).collect();
    for (&m, &e) in cfg.m_list.iter().zip(&errors) {
        b.stat(format!("sup_error_m{m}"), e);
    }
    let d = nu_power(&laws, last);
    b.stat("dropped_mass", 1.0 - d.mass());
    b.stat("j0_term", ((last as f64).sqrt() * d.at(0) - gaussian_constant()).abs());
    b.at_most(format!("sup_error_m{last}"), *errors.last().unwrap(), cfg.sup_error_max);
    b.decreasing("sup_error_not_decreasing", &errors);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    /// Size at which `n^{3/2} P(N = n)` is evaluated exactly.
    pub n: usize,
    pub rel_tol: f64,
    /// Sizes for the Monte Carlo tail estimate, ascending.
    pub mc_n_list: Vec<usize>,
    pub mc_trees: usize,
    pub chunk: usize,
    pub seed: u64,
    /// Maximal |z|-score of a Monte Carlo estimate against its exact value.
    pub max_z: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n: 10_000,
            rel_tol: 0.05,
            mc_n_list: vec![10, 100, 1000],
            mc_trees: 2_000_000,
            chunk: 20_000,
            seed: 1,
            max_z: 5.0,
        }
    }
}

/// `P(N = n) = P_1(τ = n + 1) = P_0(S_{n+1} = -1) / (n + 1)`.
pub fn exact_size_probability(laws: &OffspringLaws, n: usize) -> f64 {
    nu_power(laws, n + 1).at(-1) / (n + 1) as f64
}

/// Edge counts `N` of unconditioned trees against `N^{3/2} P(N = n)` and
/// `n^{1/2} P(N ≥ n)` asymptotics.
pub fn population_asymptotics_check(cfg: &PopulationConfig) -> Result<ExperimentReport> {
    if cfg.mc_n_list.is_empty() || cfg.mc_trees == 0 || cfg.chunk == 0 || cfg.n == 0 {
        return Err(Error::InvalidConfig("sizes and counts must be positive".into()));
    }
    let laws = OffspringLaws::default();
    let c = gaussian_constant();
    let mut b = ReportBuilder::new("population_asymptotics", cfg.n, cfg.seed, cfg, &laws);
    let nf = cfg.n as f64;
    let point = nf.powf(1.5) * exact_size_probability(&laws, cfg.n);
    b.stat("point_scaled", point);
    b.stat("point_target", c);
    b.at_most("point_relative_error", (point - c).abs() / c, cfg.rel_tol);

    let cap = *cfg.mc_n_list.iter().max().unwrap();
    let killed = killed_walk(&laws, cap + 1, None);
    // P(N ≥ n) = 1 − Σ_{t ≤ n} P_1(τ = t).
    let tail = |n: usize| 1.0 - killed.first_passage[1..=n].iter().sum::<f64>();
    let chunks = cfg.mc_trees.div_ceil(cfg.chunk);
    let per_chunk = replicates(cfg.seed, 0, chunks, |i, rng| {
        let size = cfg.chunk.min(cfg.mc_trees - i * cfg.chunk);
        let mut hist = vec![0u64; cap + 1];
        for _ in 0..size {
            let n = unconditioned_edge_count(&laws, rng, cap).unwrap_or(cap);
            hist[n] += 1;
        }
        Ok(hist)
    })?;
    let mut hist = vec![0u64; cap + 1];
    for h in &per_chunk {
        for (a, x) in hist.iter_mut().zip(h) {
            *a += x;
        }
    }
    let total = cfg.mc_trees as f64;
    let p1 = hist[1] as f64 / total;
    b.stat("p_size_1_empirical", p1);
    b.stat("p_size_1_exact", 1.0 / 12.0);
    let z1 = (p1 - 1.0 / 12.0) / ((1.0 / 12.0) * (11.0 / 12.0) / total).sqrt();
    b.at_most("p_size_1_abs_z", z1.abs(), cfg.max_z);
    let mut asymptotic_errors = Vec::new();
    for &n in &cfg.mc_n_list {
        let exact = tail(n);
        let emp = hist[n..].iter().sum::<u64>() as f64 / total;
        let z = (emp - exact) / (exact * (1.0 - exact) / total).sqrt();
        let scaled = (n as f64).sqrt() * exact;
        b.stat(format!("tail_scaled_exact_n{n}"), scaled);
        b.stat(format!("tail_scaled_mc_n{n}"), (n as f64).sqrt() * emp);
        b.at_most(format!("tail_abs_z_n{n}"), z.abs(), cfg.max_z);
        asymptotic_errors.push((scaled - 2.0 * c).abs() / (2.0 * c));
    }
    b.stat("tail_target", 2.0 * c);
    b.decreasing("tail_error_not_decreasing", &asymptotic_errors);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiDensityConfig {
    pub n: usize,
    pub delta: f64,
    pub sup_error_max: f64,
    pub identity_tol: f64,
}

impl Default for PhiDensityConfig {
    fn default() -> Self {
        PhiDensityConfig { n: 2000, delta: 0.5, sup_error_max: 0.05, identity_tol: 1e-12 }
    }
}

/// `f_δ(x) = x exp(−x²/(2σ²)) / (δ σ √(2π))`.
pub fn f_delta(delta: f64, x: f64) -> f64 {
    gaussian_constant() / delta * x * (-x * x / (2.0 * NU_VARIANCE)).exp()
}

pub fn phi_density_check(cfg: &PhiDensityConfig) -> Result<ExperimentReport> {
    check_range("n", cfg.n as f64, 2.0, 4000.0)?;
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta = {} outside (0, 1)", cfg.delta)));
    }
    let laws = OffspringLaws::default();
    let n = cfg.n;
    let m = (cfg.delta * n as f64).floor() as usize + 1;
    let k = n + 1 - m;
    let d = nu_power(&laws, m);
    let phi: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64 * d.at(-(j as i64))).collect();
    let sm = (m as f64).sqrt();
    let sup = (0..=m)
        .map(|j| (n as f64 * phi[j] - f_delta(cfg.delta, j as f64 / sm)).abs())
        .fold(0.0, f64::max);
    let survivors = killed_walk(&laws, k, None).survivors;
    let lhs: f64 = survivors.iter().enumerate().skip(1).take(m).map(|(j, q)| q * phi[j]).sum();
    let rhs = killed_walk(&laws, n + 1, Some(n + 1)).first_passage[n + 1];
    let mut b = ReportBuilder::new("phi_density", n, 0, cfg, &laws);
    b.stat("m_n", m as f64);
    b.stat("k", k as f64);
    b.stat("sup_error", sup);
    b.stat("identity_lhs", lhs);
    b.stat("identity_rhs", rhs);
    b.stat("f_delta_at_0", f_delta(cfg.delta, 0.0));
    b.at_most("sup_error", sup, cfg.sup_error_max);
    b.at_most("identity_abs_error", (lhs - rhs).abs(), cfg.identity_tol);
    Ok(b.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModerateDeviationConfig {
    /// Ascending walk lengths.
    pub m_list: Vec<usize>,
    pub reps: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Frequency ceiling applied at `ceiling_m`.
    pub ceiling_m: usize,
    pub ceiling: f64,
}

impl Default for ModerateDeviationConfig {
    fn default() -> Self {
        ModerateDeviationConfig {
            m_list: vec![1_000, 10_000, 100_000],
            reps: 1000,
            epsilon: 0.1,
            seed: 1,
            ceiling_m: 10_000,
            ceiling: 0.01,
        }
    }
}

/// Frequency of `|S_l − I_l + 1 − (27/8) R_l| > m^{1/4+ε}` for some
/// `l ∈ {m/4, m/2, m}`, for the ν-walk from 1.
pub fn moderate_deviation_check(cfg: &ModerateDeviationConfig) -> Result<ExperimentReport> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.25) {
        return Err(Error::InvalidConfig(format!("epsilon = {} outside (0, 1/4)", cfg.epsilon)));
    }
    if cfg.m_list.is_empty() || cfg.reps == 0 || cfg.m_list.iter().any(|&m| m < 4) {
        return Err(Error::InvalidConfig("m_list entries must be ≥ 4 and reps positive".into()));
    }
    let laws = OffspringLaws::default();
    let last = *cfg.m_list.last().unwrap();
    let mut b = ReportBuilder::new("moderate_deviation", last, cfg.seed, cfg, &laws);
    let mut freqs = Vec::new();
    for (tag, &m) in cfg.m_list.iter().enumerate() {
        let bound = (m as f64).powf(0.25 + cfg.epsilon);
        let devs = replicates(cfg.seed, tag as u64, cfg.reps, |_, rng| {
            let mut s = Vec::with_capacity(m + 1);
            s.push(1i64);
            for i in 0..m {
                s.push(s[i] + laws.sample_nu(rng));
            }
            let r = reversed_ladder_counts(&s);
            let mut running_min = i64::MAX;
            let mins: Vec<i64> = s
                .iter()
                .map(|&x| {
                    running_min = running_min.min(x);
                    running_min
                })
                .collect();
            Ok([m / 4, m / 2, m]
                .iter()
                .map(|&l| ((s[l] - mins[l] + 1) as f64 - LADDER_MEAN * r[l] as f64).abs())
                .fold(0.0, f64::max))
        })?;
        let freq = devs.iter().filter(|&&d| d > bound).count() as f64 / cfg.reps as f64;
        b.stat(format!("frequency_m{m}"), freq);
        b.stat(format!("mean_max_deviation_m{m}"), mean(&devs));
        b.stat(format!("bound_m{m}"), bound);
        if m == cfg.ceiling_m {
            b.at_most(format!("frequency_m{m}"), freq, cfg.ceiling);
        }
        b.rows(&format!("max_deviation_m{m}"), &devs);
        freqs.push(freq);
    }
    b.decreasing("frequency_not_decreasing", &freqs);
    Ok(b.finish())
}
