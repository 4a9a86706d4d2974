//! Certification of the Bernstein moment condition
//!
//! ```text
//! E|X|^{2p} ≤ ½ · p! · σ² · K^{2(p−1)}      for p = 2, 3, …
//! ```
//!
//! and numerical checks of the three MGF inequalities it implies:
//!
//! ```text
//! E exp(sX)          ≤ exp(s²K²)                  for all s
//! E exp(sX² − sσ²)   ≤ exp(s²σ²K²)                for 0 ≤ 2sK² ≤ 1
//! E exp(sX²)         ≤ exp(3sσ²/2)                for 0 ≤ 2sK² ≤ 1
//! ```
//!
//! The condition is only checked from `p = 2`: at `p = 1` it would read
//! `σ² ≤ σ²/2`, which no nondegenerate law satisfies, and the MGF bounds
//! only consume the moments with `p ≥ 2`.
//!
//! A Gaussian with standard deviation `σ` needs `K ≥ √3·σ` (the `p = 2`
//! ratio is `3σ⁴ / (σ²K²)`), so "variance at most `K²`" is not sufficient
//! for Gaussians.

use serde::Serialize;

use crate::distributions::{DistributionSpec, MomentMethod, MomentTable};
use crate::error::{Error, Result};

/// First moment order the certifier checks.
pub const P_MIN: u32 = 2;
pub const DEFAULT_P_MAX: u32 = 30;
/// Relative slack on `r_p ≤ 1`, so that closed-form equality cases pass.
pub const RATIO_TOL: f64 = 1e-12;
/// Slack on MGF margins (log scale) counted as nonnegative.
pub const MARGIN_TOL: f64 = 1e-12;

/// Per-order ratios `r_p = E|X|^{2p} / (½ p! σ² K^{2(p−1)})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinCertificate {
    pub sigma2: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub p_min: u32,
    pub p_max: u32,
    /// `ratios[i]` belongs to `p = p_min + i`.
    pub ratios: Vec<f64>,
    pub satisfied: bool,
    pub argmax_p: u32,
    /// First order whose moment overflowed; ratios stop before it.
    pub indeterminate_from: Option<u32>,
}

impl BernsteinCertificate {
    pub fn ratio(&self, p: u32) -> Option<f64> {
        p.checked_sub(self.p_min)
            .and_then(|i| self.ratios.get(i as usize))
            .copied()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

fn ln_factorial(p: u32) -> f64 {
    (2..=p).map(|k| f64::from(k).ln()).sum()
}

fn check_p_max(p_max: u32) -> Result<()> {
    if p_max < P_MIN {
        return Err(Error::invalid(format!(
            "p_max must be at least {P_MIN}, got {p_max}"
        )));
    }
    Ok(())
}

/// Evaluates the ratios `r_p` for `p = 2..=p_max` at scale `k`.
pub fn check_bernstein(d: &DistributionSpec, k: f64, p_max: u32) -> Result<BernsteinCertificate> {
    check_p_max(p_max)?;
    let mut moments = Vec::with_capacity(p_max as usize);
    let mut overflow = None;
    for p in 1..=p_max {
        match d.even_moment(p) {
            Ok(m) => moments.push(m),
            Err(Error::MomentOverflow { p }) => {
                overflow = Some(p);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if moments.is_empty() {
        return Err(Error::MomentOverflow { p: 1 });
    }
    let table = MomentTable::from_moments(&moments, MomentMethod::ClosedForm)?;
    let mut cert = check_bernstein_table(&table, k, table.p_max().max(P_MIN))?;
    cert.p_max = p_max;
    if overflow.is_some() {
        cert.indeterminate_from = overflow;
        cert.satisfied = false;
    }
    Ok(cert)
}

/// Same as [`check_bernstein`] on a precomputed moment table.
pub fn check_bernstein_table(
    table: &MomentTable,
    k: f64,
    p_max: u32,
) -> Result<BernsteinCertificate> {
    check_p_max(p_max)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid(format!(
            "K must be positive and finite, got {k}"
        )));
    }
    let sigma2 = table.sigma2;
    let available = table.p_max().min(p_max);
    let ratios: Vec<f64> = (P_MIN..=available)
        .map(|p| {
            let m = table.get(p).expect("table is contiguous");
            if sigma2 == 0.0 {
                return 0.0;
            }
            let ln_denom = -std::f64::consts::LN_2
                + ln_factorial(p)
                + sigma2.ln()
                + 2.0 * f64::from(p - 1) * k.ln();
            (m.ln() - ln_denom).exp()
        })
        .collect();
    let argmax_p = argmax(&ratios).map_or(P_MIN, |i| P_MIN + i as u32);
    let indeterminate_from = (available < p_max).then_some(available.max(1) + 1);
    let satisfied = indeterminate_from.is_none() && ratios.iter().all(|r| *r <= 1.0 + RATIO_TOL);
    Ok(BernsteinCertificate {
        sigma2,
        k,
        p_min: P_MIN,
        p_max,
        ratios,
        satisfied,
        argmax_p,
        indeterminate_from,
    })
}

fn argmax(xs: &[f64]) -> Option<usize> {
    xs.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &x)| match best {
            Some((_, b)) if b >= x => best,
            _ => Some((i, x)),
        })
        .map(|(i, _)| i)
}

/// Smallest `K` for which the Bernstein condition holds on `p = 2..=p_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalK {
    #[serde(rename = "K")]
    pub k: f64,
    pub argmax_p: u32,
    /// Smallest admissible `K` per order, starting at `p = 2`.
    pub per_p: Vec<f64>,
    /// The maximum is attained at the last order evaluated, so `k` is only
    /// a lower bound for the full condition.
    pub lower_bound_only: bool,
}

/// `max_{2 ≤ p ≤ p_max} (2·E|X|^{2p} / (p!·σ²))^{1/(2(p−1))}`.
pub fn minimal_k(d: &DistributionSpec, p_max: u32) -> Result<MinimalK> {
    check_p_max(p_max)?;
    let sigma2 = d.sigma2();
    if sigma2 == 0.0 {
        return Err(Error::Degenerate("distribution has zero variance".into()));
    }
    let mut per_p = Vec::new();
    let mut truncated = false;
    for p in P_MIN..=p_max {
        let m = match d.even_moment(p) {
            Ok(m) => m,
            Err(Error::MomentOverflow { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let ln_k2 =
            (std::f64::consts::LN_2 + m.ln() - ln_factorial(p) - sigma2.ln()) / f64::from(p - 1);
        per_p.push((0.5 * ln_k2).exp());
    }
    let best = argmax(&per_p)
        .ok_or_else(|| Error::Degenerate("no moment order could be evaluated".into()))?;
    // maximum sits at the last evaluated order: larger orders may demand more
    let still_growing = per_p.len() >= 2 && best == per_p.len() - 1;
    Ok(MinimalK {
        k: per_p[best],
        argmax_p: P_MIN + best as u32,
        per_p,
        lower_bound_only: truncated || still_growing,
    })
}

/// Per-order ratios `E Z^p / (p · K′ · E Z^{p−1})` for `Z = X²`, `p = 1..=p_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBoundedCertificate {
    pub k_prime: f64,
    pub p_max: u32,
    /// `ratios[i]` belongs to `p = i + 1`.
    pub ratios: Vec<f64>,
    pub satisfied: bool,
    pub argmax_p: u32,
}

fn z_ratios(table: &MomentTable, p_max: u32) -> Result<Vec<f64>> {
    if p_max == 0 {
        return Err(Error::invalid("p_max must be at least 1"));
    }
    if table.p_max() < p_max {
        return Err(Error::invalid(format!(
            "moment table stops at p = {}, need {p_max}",
            table.p_max()
        )));
    }
    Ok((1..=p_max)
        .map(|p| {
            let prev = if p == 1 {
                1.0
            } else {
                table.get(p - 1).unwrap()
            };
            let cur = table.get(p).unwrap();
            if prev == 0.0 {
                0.0
            } else {
                cur / (f64::from(p) * prev)
            }
        })
        .collect())
}

/// Checks `E Z^p ≤ p · K′ · E Z^{p−1}` where `table` holds the moments of `Z = X²`
/// (its entry `p` is `E Z^p = E|X|^{2p}`).
pub fn check_moment_bounded(
    table: &MomentTable,
    k_prime: f64,
    p_max: u32,
) -> Result<MomentBoundedCertificate> {
    if !(k_prime.is_finite() && k_prime > 0.0) {
        return Err(Error::invalid(format!(
            "K' must be positive and finite, got {k_prime}"
        )));
    }
    let ratios: Vec<f64> = z_ratios(table, p_max)?
        .into_iter()
        .map(|r| r / k_prime)
        .collect();
    let satisfied = ratios.iter().all(|r| *r <= 1.0 + RATIO_TOL);
    let argmax_p = argmax(&ratios).map_or(1, |i| i as u32 + 1);
    Ok(MomentBoundedCertificate {
        k_prime,
        p_max,
        ratios,
        satisfied,
        argmax_p,
    })
}

/// Smallest `K′` passing [`check_moment_bounded`] on `p = 1..=p_max`.
pub fn minimal_moment_bounded_constant(table: &MomentTable, p_max: u32) -> Result<f64> {
    Ok(z_ratios(table, p_max)?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MgfInequality {
    /// `E exp(sX) ≤ exp(s²K²)`
    Subgaussian,
    /// `E exp(sX² − sσ²) ≤ exp(s²σ²K²)`
    CenteredSquare,
    /// `E exp(sX²) ≤ exp(3sσ²/2)`
    Square,
}

/// Margins `ln(right side) − ln(left side)` over a grid of `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfCheckReport {
    pub inequality: MgfInequality,
    #[serde(rename = "K")]
    pub k: f64,
    pub s_grid: Vec<f64>,
    pub margins: Vec<f64>,
    /// Every margin is at least `−MARGIN_TOL`.
    pub all_nonnegative: bool,
    pub min_margin: f64,
}

impl MgfCheckReport {
    fn new(inequality: MgfInequality, k: f64, s_grid: Vec<f64>, margins: Vec<f64>) -> Self {
        let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let all_nonnegative = margins.iter().all(|m| *m >= -MARGIN_TOL);
        Self {
            inequality,
            k,
            s_grid,
            margins,
            all_nonnegative,
            min_margin,
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "K must be positive and finite, got {k}"
        )))
    }
}

/// 201 evenly spaced points on `[−10/K, 10/K]`.
pub fn default_subgaussian_grid(k: f64) -> Vec<f64> {
    let half = 10.0 / k;
    (0..=200)
        .map(|i| -half + 2.0 * half * f64::from(i) / 200.0)
        .collect()
}

/// 101 evenly spaced points on `(0, 1/(2K²)]`.
pub fn default_square_grid(k: f64) -> Vec<f64> {
    let top = 0.5 / (k * k);
    (1..=101).map(|i| top * f64::from(i) / 101.0).collect()
}

pub fn verify_mgf_subgaussian(
    d: &DistributionSpec,
    k: f64,
    s_grid: &[f64],
) -> Result<MgfCheckReport> {
    check_k(k)?;
    let margins = s_grid
        .iter()
        .map(|&s| s * s * k * k - d.log_mgf(s))
        .collect();
    Ok(MgfCheckReport::new(
        MgfInequality::Subgaussian,
        k,
        s_grid.to_vec(),
        margins,
    ))
}

pub fn verify_mgf_square(
    d: &DistributionSpec,
    k: f64,
    s_grid: &[f64],
    centered: bool,
) -> Result<MgfCheckReport> {
    check_k(k)?;
    if let Some(&s) = s_grid
        .iter()
        .find(|&&s| !(s >= 0.0 && 2.0 * s * k * k <= 1.0 + 1e-12))
    {
        return Err(Error::invalid(format!(
            "s = {s} outside the admissible range 0 ≤ 2sK² ≤ 1 (K = {k})"
        )));
    }
    let sigma2 = d.sigma2();
    let margins = s_grid
        .iter()
        .map(|&s| {
            let lhs = d.log_mgf_square(s)?;
            let rhs = if centered {
                s * sigma2 + s * s * sigma2 * k * k
            } else {
                1.5 * s * sigma2
            };
            Ok(rhs - lhs)
        })
        .collect::<Result<Vec<_>>>()?;
    let which = if centered {
        MgfInequality::CenteredSquare
    } else {
        MgfInequality::Square
    };
    Ok(MgfCheckReport::new(which, k, s_grid.to_vec(), margins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss() -> DistributionSpec {
        DistributionSpec::gaussian(1.0).unwrap()
    }
    fn rade() -> DistributionSpec {
        DistributionSpec::rademacher(1.0).unwrap()
    }
    fn unif() -> DistributionSpec {
        DistributionSpec::uniform_symmetric(1.0).unwrap()
    }

    #[test]
    fn rademacher_certified_at_one() {
        let c = check_bernstein(&rade(), 1.0, 20).unwrap();
        assert!(c.satisfied);
        assert_eq!(c.ratios.len(), 19);
        // r_p = 2/p!
        let mut fact = 1.0;
        for p in 2..=20u32 {
            fact *= f64::from(p);
            assert_relative_eq!(c.ratio(p).unwrap(), 2.0 / fact, max_relative = 1e-12);
        }
    }

    #[test]
    fn gaussian_fails_below_sqrt3() {
        let c = check_bernstein(&gauss(), 1.6, 10).unwrap();
        assert!(!c.satisfied);
        assert_relative_eq!(c.ratio(2).unwrap(), 3.0 / 2.56, max_relative = 1e-12);
        assert_eq!(c.argmax_p, 2);
    }

    #[test]
    fn gaussian_certified_at_sqrt3() {
        let c = check_bernstein(&gauss(), 3f64.sqrt(), 30).unwrap();
        assert!(c.satisfied);
        assert_eq!(c.argmax_p, 2);
        assert_relative_eq!(c.ratio(2).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn overflow_marks_indeterminate() {
        let d = DistributionSpec::gaussian(50.0).unwrap();
        let c = check_bernstein(&d, 1e6, 200).unwrap();
        assert!(!c.satisfied);
        let from = c.indeterminate_from.unwrap();
        assert!(from > 2 && from <= 200);
        assert_eq!(c.ratios.len() as u32, from - P_MIN);
    }

    #[test]
    fn minimal_k_examples() {
        let g = minimal_k(&gauss(), DEFAULT_P_MAX).unwrap();
        assert_relative_eq!(g.k, 3f64.sqrt(), max_relative = 1e-12);
        assert_eq!(g.argmax_p, 2);
        assert!(!g.lower_bound_only);
        let r = minimal_k(&rade(), DEFAULT_P_MAX).unwrap();
        assert_relative_eq!(r.k, 1.0, max_relative = 1e-12);
        let u = minimal_k(&unif(), DEFAULT_P_MAX).unwrap();
        assert_relative_eq!(u.k, 0.6f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn minimal_k_is_tight() {
        for d in [gauss(), rade(), unif()] {
            let mk = minimal_k(&d, DEFAULT_P_MAX).unwrap();
            assert!(check_bernstein(&d, mk.k, DEFAULT_P_MAX).unwrap().satisfied);
            assert!(
                !check_bernstein(&d, mk.k * (1.0 - 1e-6), DEFAULT_P_MAX)
                    .unwrap()
                    .satisfied
            );
        }
    }

    #[test]
    fn minimal_k_flags_growth_at_p_max() {
        // rare large atoms: the per-order requirement grows over small p
        let d = DistributionSpec::finite_discrete(
            vec![-100.0, -1.0, 1.0, 100.0],
            vec![5e-7, 0.4999995, 0.4999995, 5e-7],
        )
        .unwrap();
        let mk = minimal_k(&d, 3).unwrap();
        assert!(mk.lower_bound_only);
        assert_eq!(mk.argmax_p, 3);
    }

    #[test]
    fn moment_bounded_examples() {
        let t = rade().moment_table(20).unwrap();
        let c = check_moment_bounded(&t, 1.0, 20).unwrap();
        assert!(c.satisfied);
        for (i, r) in c.ratios.iter().enumerate() {
            assert_relative_eq!(*r, 1.0 / (i as f64 + 1.0), max_relative = 1e-15);
        }

        let t = unif().moment_table(20).unwrap();
        let c = check_moment_bounded(&t, 1.0 / 3.0, 20).unwrap();
        assert!(c.satisfied);
        assert_eq!(c.argmax_p, 1);
        assert_relative_eq!(c.ratios[0], 1.0, max_relative = 1e-14);
        for p in 1..=20u32 {
            let pf = f64::from(p);
            let expect = (2.0 * pf - 1.0) / (pf * (2.0 * pf + 1.0)) * 3.0;
            assert_relative_eq!(c.ratios[p as usize - 1], expect, max_relative = 1e-13);
        }

        let kmin = minimal_moment_bounded_constant(&t, 20).unwrap();
        assert_relative_eq!(kmin, 1.0 / 3.0, max_relative = 1e-14);
        assert!(!check_moment_bounded(&t, 0.99 * kmin, 20).unwrap().satisfied);
        assert!(check_moment_bounded(&t, 20.0, 21).is_err());
    }

    #[test]
    fn subgaussian_margins() {
        let k = 3f64.sqrt();
        let grid: Vec<f64> = (-5..=5).map(f64::from).collect();
        let rep = verify_mgf_subgaussian(&gauss(), k, &grid).unwrap();
        for (s, m) in grid.iter().zip(&rep.margins) {
            assert_relative_eq!(*m, 3.0 * s * s - s * s / 2.0, max_relative = 1e-12);
        }
        assert!(rep.all_nonnegative);
        assert_eq!(rep.margins[5], 0.0);

        let grid = default_subgaussian_grid(1.0);
        assert_eq!(grid.len(), 201);
        let rep = verify_mgf_subgaussian(&rade(), 1.0, &grid).unwrap();
        assert!(rep.all_nonnegative);
    }

    #[test]
    fn square_margins() {
        let k = 3f64.sqrt();
        let s = [1.0 / 6.0];
        let c = verify_mgf_square(&gauss(), k, &s, true).unwrap();
        let lhs = -0.5 * (2.0f64 / 3.0).ln();
        assert_relative_eq!(lhs, 0.2027, epsilon = 1e-4);
        assert_relative_eq!(c.margins[0], 0.25 - lhs, max_relative = 1e-12);
        let u = verify_mgf_square(&gauss(), k, &s, false).unwrap();
        assert_relative_eq!(u.margins[0], 0.25 - lhs, max_relative = 1e-12);

        for centered in [true, false] {
            let z = verify_mgf_square(&gauss(), k, &[0.0], centered).unwrap();
            assert_eq!(z.margins[0], 0.0);
        }

        let r = verify_mgf_square(&rade(), 1.0, &[0.5], false).unwrap();
        assert_relative_eq!(r.margins[0], 0.25, max_relative = 1e-14);
    }

    #[test]
    fn square_grid_respects_range() {
        let k = 0.7;
        let grid = default_square_grid(k);
        assert_eq!(grid.len(), 101);
        assert!(grid[0] > 0.0);
        assert!(verify_mgf_square(&unif(), k, &grid, true).is_ok());
        assert!(verify_mgf_square(&unif(), k, &[1.1 / (2.0 * k * k)], true).is_err());
        assert!(verify_mgf_square(&unif(), k, &[-0.1], false).is_err());
    }
}
