//! Empirical and exact verification of the tail bounds.
//!
//! Sampling is split into chunks of `chunk_size` draws; chunk `c` reads
//! the random stream `(seed, c)`, so results are a function of the
//! [`SimConfig`] alone and never of the worker count. Counts are reduced
//! by integer addition and sample vectors are concatenated in chunk order.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::bernstein::{minimal_k, DEFAULT_P_MAX};
use crate::bounds::{
    bernstein_deviation, gaussian_chaos_deviation, hanson_wright_deviation, BoundInputs,
};
use crate::distributions::{DistributionSpec, Sampler};
use crate::error::{Error, Result};
use crate::linalg::{scaled_norm_stats, NormStats, SigmaDiag, SquareMatrix, OP_NORM_TOL};
use crate::rng::RandomStream;

/// Largest state space [`exact_tail_enumerate`] will walk.
pub const ENUMERATION_CAP: u128 = 1 << 24;
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 14;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

const ENUM_CHUNK: u128 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub chunk_size: usize,
    /// One-sided confidence level of the reported bounds.
    pub confidence: f64,
}

impl SimConfig {
    pub fn new(sample_count: usize, seed: u64) -> Self {
        Self {
            sample_count,
            seed,
            chunk_size: DEFAULT_CHUNK_SIZE,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be at least 1"));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk_size must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }

    fn chunks(&self) -> impl IndexedParallelIterator<Item = (u64, usize)> + '_ {
        let n_chunks = self.sample_count.div_ceil(self.chunk_size);
        (0..n_chunks).into_par_iter().map(move |c| {
            let start = c * self.chunk_size;
            (c as u64, self.chunk_size.min(self.sample_count - start))
        })
    }
}

/// Empirical frequency of `{ξᵀAξ − E ξᵀAξ > t}` with one-sided
/// Clopper–Pearson bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub exceed_count: u64,
    pub sample_count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn check_dims(a: &SquareMatrix, dists: &[DistributionSpec]) -> Result<()> {
    if dists.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: dists.len(),
        });
    }
    dists.iter().try_for_each(DistributionSpec::validate)
}

pub fn sigmas_of(dists: &[DistributionSpec]) -> SigmaDiag {
    SigmaDiag::new(dists.iter().map(DistributionSpec::sigma).collect())
        .expect("standard deviations are finite and nonnegative")
}

/// `E ξᵀAξ = Σ_i a_ii σ_i²`.
pub fn exact_mean(a: &SquareMatrix, sig: &SigmaDiag) -> Result<f64> {
    if sig.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: sig.len(),
        });
    }
    Ok(a.diag()
        .iter()
        .zip(sig.as_slice())
        .map(|(d, s)| d * s * s)
        .sum())
}

/// `Var ξᵀAξ = Σ_i a_ii² (E ξ_i⁴ − σ_i⁴) + Σ_{i≠j} (a_ij² + a_ij a_ji) σ_i² σ_j²`.
///
/// For diagonal-free `A` with `a_ij a_ji = 0` (e.g. strictly triangular)
/// this reduces to `‖D_σ A D_σ‖²_HS`; for general diagonal-free `A` the
/// cross term `a_ij a_ji` does not vanish.
pub fn exact_variance(a: &SquareMatrix, dists: &[DistributionSpec]) -> Result<f64> {
    check_dims(a, dists)?;
    let n = a.n();
    let s2: Vec<f64> = dists.iter().map(DistributionSpec::sigma2).collect();
    let mut var = 0.0;
    for i in 0..n {
        let aii = a.get(i, i);
        if aii != 0.0 {
            var += aii * aii * (dists[i].even_moment(2)? - s2[i] * s2[i]);
        }
        for j in 0..n {
            if i != j {
                let aij = a.get(i, j);
                var += (aij * aij + aij * a.get(j, i)) * s2[i] * s2[j];
            }
        }
    }
    Ok(var)
}

/// Draws `cfg.sample_count` centred values `ξᵀAξ − E ξᵀAξ`, in chunk order.
pub fn sample_centered(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    check_dims(a, dists)?;
    cfg.validate()?;
    let mean = exact_mean(a, &sigmas_of(dists))?;
    let samplers: Vec<Sampler> = dists.iter().map(Sampler::new).collect();
    let chunks: Vec<Vec<f64>> = cfg
        .chunks()
        .map(|(c, len)| {
            let mut stream = RandomStream::new(cfg.seed, c);
            let mut xi = vec![0.0; a.n()];
            (0..len)
                .map(|_| {
                    for (x, s) in xi.iter_mut().zip(&samplers) {
                        *x = s.draw(&mut stream);
                    }
                    a.quadratic_form(&xi) - mean
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Tail frequencies of `values` on `t_grid`.
pub fn tail_estimates(values: &[f64], t_grid: &[f64], confidence: f64) -> Vec<TailEstimate> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as u64;
    t_grid
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|v| *v <= t) as u64;
            let k = n - below;
            let (ci_low, ci_high) = clopper_pearson(k, n, confidence);
            TailEstimate {
                t,
                exceed_count: k,
                sample_count: n,
                p_hat: k as f64 / n as f64,
                ci_low,
                ci_high,
            }
        })
        .collect()
}

pub fn simulate_tail(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    cfg: &SimConfig,
    t_grid: &[f64],
) -> Result<Vec<TailEstimate>> {
    let values = sample_centered(a, dists, cfg)?;
    Ok(tail_estimates(&values, t_grid, cfg.confidence))
}

/// Inverts a monotone map `x ↦ f(x)` on `[0, 1]` by bisection.
fn bisect_unit(target: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sided exact binomial bounds for `k` successes in `n` trials:
/// `P(Bin(n, low) ≥ k) = 1 − confidence` and `P(Bin(n, high) ≤ k) = 1 − confidence`.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(k <= n && n > 0, "need 0 ≤ k ≤ n and n > 0");
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let low = if k == 0 {
        0.0
    } else if k == n {
        alpha.powf(1.0 / nf)
    } else {
        // Beta(k, n−k+1) quantile at α
        bisect_unit(alpha, |x| beta_reg(kf, nf - kf + 1.0, x))
    };
    let high = if k == n {
        1.0
    } else if k == 0 {
        -(alpha.ln() / nf).exp_m1()
    } else {
        // Beta(k+1, n−k) quantile at 1−α
        bisect_unit(confidence, |x| beta_reg(kf + 1.0, nf - kf, x))
    };
    (low, high)
}

/// `P(Bin(n, q) ≤ m)`
fn binomial_cdf(m: u64, n: u64, q: f64) -> f64 {
    if m >= n {
        1.0
    } else {
        beta_reg((n - m) as f64, m as f64 + 1.0, 1.0 - q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub x: f64,
    /// `1 − e^{−x}`
    pub level: f64,
    pub value: f64,
    /// Order statistic that exceeds the true quantile with probability at
    /// least the configured confidence; `+∞` if the sample is too small.
    pub upper_confidence: f64,
}

/// The `(1 − e^{−x})`-quantile of an ascending sample and its upper confidence bound.
pub fn quantile_from_sorted(sorted: &[f64], x: f64, confidence: f64) -> QuantileEstimate {
    let n = sorted.len() as u64;
    assert!(n > 0, "empty sample");
    let level = -(-x).exp_m1();
    let rank = ((level * n as f64).ceil() as u64).clamp(1, n);
    // smallest rank r with P(Bin(n, level) ≤ r − 1) ≥ confidence
    let (mut lo, mut hi) = (rank, n + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if binomial_cdf(mid - 1, n, level) >= confidence {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let upper_confidence = if lo > n {
        f64::INFINITY
    } else {
        sorted[(lo - 1) as usize]
    };
    QuantileEstimate {
        x,
        level,
        value: sorted[(rank - 1) as usize],
        upper_confidence,
    }
}

pub fn empirical_quantile(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    cfg: &SimConfig,
    x: f64,
) -> Result<QuantileEstimate> {
    if !(x > 0.0) {
        return Err(Error::invalid(format!("x must be positive, got {x}")));
    }
    let mut values = sample_centered(a, dists, cfg)?;
    values.sort_by(f64::total_cmp);
    Ok(quantile_from_sorted(&values, x, cfg.confidence))
}

/// Exact `P(ξᵀAξ − E ξᵀAξ > t)` by walking every support point of the
/// discrete coordinates.
pub fn exact_tail_enumerate(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    check_dims(a, dists)?;
    let supports = dists
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.discrete_support().ok_or_else(|| {
                Error::invalid(format!(
                    "coordinate {i} is {}, enumeration needs discrete laws",
                    d.kind_name()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let size = supports
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
        .unwrap_or(u128::MAX);
    if size > ENUMERATION_CAP {
        return Err(Error::StateSpaceTooLarge {
            size,
            cap: ENUMERATION_CAP,
        });
    }
    let mean = exact_mean(a, &sigmas_of(dists))?;
    let n_chunks = size.div_ceil(ENUM_CHUNK) as usize;

    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * ENUM_CHUNK;
            let end = (start + ENUM_CHUNK).min(size);
            let mut xi = vec![0.0; a.n()];
            let mut outcomes: Vec<(f64, f64)> = (start..end)
                .map(|mut idx| {
                    let mut weight = 1.0;
                    for (x, support) in xi.iter_mut().zip(&supports) {
                        let radix = support.len() as u128;
                        let (v, p) = support[(idx % radix) as usize];
                        idx /= radix;
                        *x = v;
                        weight *= p;
                    }
                    (a.quadratic_form(&xi) - mean, weight)
                })
                .collect();
            outcomes.sort_by(|l, r| l.0.total_cmp(&r.0));
            // suffix[i] = total weight of outcomes[i..]
            let mut suffix = vec![0.0; outcomes.len() + 1];
            for i in (0..outcomes.len()).rev() {
                suffix[i] = suffix[i + 1] + outcomes[i].1;
            }
            t_grid
                .iter()
                .map(|&t| suffix[outcomes.partition_point(|o| o.0 <= t)])
                .collect()
        })
        .collect();

    let mut total = vec![0.0; t_grid.len()];
    for part in &partials {
        for (acc, p) in total.iter_mut().zip(part) {
            *acc += p;
        }
    }
    Ok(total)
}

/// How the Bernstein scale `K` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Fixed(f64),
    /// Maximum over coordinates of the per-coordinate minimal `K`.
    Auto,
}

/// Global `K = max_i minimal_K(ξ_i)` and the per-coordinate values.
pub fn global_k(dists: &[DistributionSpec], p_max: u32) -> Result<(f64, Vec<f64>)> {
    let per = dists
        .iter()
        .map(|d| minimal_k(d, p_max).map(|m| m.k))
        .collect::<Result<Vec<_>>>()?;
    let k = per.iter().copied().fold(0.0, f64::max);
    Ok((k, per))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub level: f64,
    pub empirical_quantile: f64,
    pub quantile_upper_confidence: f64,
    pub bernstein_deviation: f64,
    pub hanson_wright_deviation: f64,
    /// Present only when every coordinate is Gaussian.
    pub gaussian_chaos_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    #[serde(rename = "K")]
    pub k: f64,
    /// Per-coordinate minimal `K` when chosen automatically.
    pub per_coordinate_k: Option<Vec<f64>>,
    pub hw_constant_c: f64,
    pub norms: NormStats,
    /// The matrix is zero, so every column is identically zero.
    pub degenerate: bool,
    pub rows: Vec<ComparisonRow>,
}

/// Empirical deviation quantiles next to the three analytic deviation bounds.
pub fn compare_bounds(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    cfg: &SimConfig,
    x_grid: &[f64],
    k: KChoice,
    hw_constant_c: f64,
) -> Result<ComparisonReport> {
    check_dims(a, dists)?;
    if x_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::invalid("x grid values must be positive"));
    }
    let (k, per_coordinate_k) = match k {
        KChoice::Fixed(k) => (k, None),
        KChoice::Auto => {
            let (k, per) = global_k(dists, DEFAULT_P_MAX)?;
            (k, Some(per))
        }
    };
    let norms = scaled_norm_stats(a, &sigmas_of(dists), OP_NORM_TOL)?;
    let inputs = BoundInputs::new(norms, k, hw_constant_c)?;
    let all_gaussian = dists.iter().all(DistributionSpec::is_gaussian);

    let mut values = sample_centered(a, dists, cfg)?;
    values.sort_by(f64::total_cmp);
    let rows = x_grid
        .iter()
        .map(|&x| {
            let q = quantile_from_sorted(&values, x, cfg.confidence);
            ComparisonRow {
                x,
                level: q.level,
                empirical_quantile: q.value,
                quantile_upper_confidence: q.upper_confidence,
                bernstein_deviation: bernstein_deviation(&inputs, x),
                hanson_wright_deviation: hanson_wright_deviation(&inputs, x),
                gaussian_chaos_deviation: all_gaussian.then(|| gaussian_chaos_deviation(&norms, x)),
            }
        })
        .collect();
    Ok(ComparisonReport {
        k,
        per_coordinate_k,
        hw_constant_c,
        norms,
        degenerate: a.is_zero(),
        rows,
    })
}
