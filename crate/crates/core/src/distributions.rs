//! Coordinate distributions: moments, moment generating functions, samplers.
//!
//! Every catalog distribution is centred. Moments are closed form except
//! where noted; the quadrature routes exist both as the primary method for
//! `E exp(sX²)` under the symmetric uniform law and as an independent
//! cross-check of the closed forms.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::rng::RandomStream;

/// Half-width, in standard deviations, of the Gaussian quadrature window.
pub const GAUSS_WINDOW_SIGMAS: f64 = 40.0;
/// `ln(1e18)`: integrands are truncated where they fall below `1e-18` of their peak.
const LN_TRUNCATION: f64 = 41.446_531_673_892_82;
const MEAN_TOL: f64 = 1e-12;

/// One coordinate law. Construct through the checked constructors or
/// deserialization; both enforce a zero mean and valid parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawSpec")]
pub enum DistributionSpec {
    Gaussian { sigma: f64 },
    UniformSymmetric { half_width: f64 },
    Rademacher { scale: f64 },
    FiniteDiscrete { values: Vec<f64>, probs: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpec {
    Gaussian { sigma: f64 },
    UniformSymmetric { half_width: f64 },
    Rademacher { scale: f64 },
    FiniteDiscrete { values: Vec<f64>, probs: Vec<f64> },
}

impl TryFrom<RawSpec> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = match raw {
            RawSpec::Gaussian { sigma } => DistributionSpec::Gaussian { sigma },
            RawSpec::UniformSymmetric { half_width } => {
                DistributionSpec::UniformSymmetric { half_width }
            }
            RawSpec::Rademacher { scale } => DistributionSpec::Rademacher { scale },
            RawSpec::FiniteDiscrete { values, probs } => {
                DistributionSpec::FiniteDiscrete { values, probs }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl DistributionSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let d = Self::Gaussian { sigma };
        d.validate().map(|_| d)
    }

    pub fn uniform_symmetric(half_width: f64) -> Result<Self> {
        let d = Self::UniformSymmetric { half_width };
        d.validate().map(|_| d)
    }

    pub fn rademacher(scale: f64) -> Result<Self> {
        let d = Self::Rademacher { scale };
        d.validate().map(|_| d)
    }

    pub fn finite_discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let d = Self::FiniteDiscrete { values, probs };
        d.validate().map(|_| d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { sigma } => positive("sigma", *sigma),
            Self::UniformSymmetric { half_width } => positive("half_width", *half_width),
            Self::Rademacher { scale } => positive("scale", *scale),
            Self::FiniteDiscrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid(format!(
                        "finite_discrete needs equal nonempty values/probs, got {} and {}",
                        values.len(),
                        probs.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("finite_discrete values must be finite"));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::invalid("finite_discrete probs must be nonnegative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > MEAN_TOL {
                    return Err(Error::invalid(format!(
                        "finite_discrete probs sum to {total}, not 1"
                    )));
                }
                let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
                let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                if mean.abs() > MEAN_TOL * scale {
                    return Err(Error::invalid(format!(
                        "finite_discrete mean is {mean}, must be zero"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::UniformSymmetric { .. } => "uniform_symmetric",
            Self::Rademacher { .. } => "rademacher",
            Self::FiniteDiscrete { .. } => "finite_discrete",
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::Gaussian { .. })
    }

    /// `σ² = E X²`
    pub fn sigma2(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } => sigma * sigma,
            Self::UniformSymmetric { half_width } => half_width * half_width / 3.0,
            Self::Rademacher { scale } => scale * scale,
            Self::FiniteDiscrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| p * v * v).sum()
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2().sqrt()
    }

    /// `E|X|^{2p}` for `p ≥ 1`.
    pub fn even_moment(&self, p: u32) -> Result<f64> {
        if p == 0 {
            return Err(Error::invalid("moment order p must be at least 1"));
        }
        let two_p = 2.0 * f64::from(p);
        let m = match self {
            Self::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                (1..=p).fold(1.0, |acc, k| acc * f64::from(2 * k - 1) * s2)
            }
            Self::UniformSymmetric { half_width } => half_width.powf(two_p) / (two_p + 1.0),
            Self::Rademacher { scale } => scale.powf(two_p),
            Self::FiniteDiscrete { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(v, pr)| pr * v.abs().powf(two_p))
                .sum(),
        };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::MomentOverflow { p })
        }
    }

    /// `E|X|^{2p}` by numerical integration of the density (continuous laws)
    /// or direct summation (discrete laws).
    pub fn quadrature_even_moment(&self, p: u32) -> Result<f64> {
        if p == 0 {
            return Err(Error::invalid("moment order p must be at least 1"));
        }
        let two_p = 2 * p as i32;
        let m = match self {
            Self::Gaussian { sigma } => {
                let sigma = *sigma;
                let density = move |x: f64| gaussian_density(x, sigma);
                2.0 * quadrature::integrate(
                    |x| x.powi(two_p) * density(x),
                    0.0,
                    GAUSS_WINDOW_SIGMAS * sigma,
                    Tolerance::default(),
                )?
                .value
            }
            Self::UniformSymmetric { half_width } => {
                let a = *half_width;
                quadrature::integrate(|x| x.powi(two_p), 0.0, a, Tolerance::default())?.value / a
            }
            Self::Rademacher { .. } | Self::FiniteDiscrete { .. } => self.even_moment(p)?,
        };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::MomentOverflow { p })
        }
    }

    pub fn moment_table(&self, p_max: u32) -> Result<MomentTable> {
        let method = match self {
            Self::FiniteDiscrete { .. } => MomentMethod::ExactDiscrete,
            _ => MomentMethod::ClosedForm,
        };
        MomentTable::build(self.sigma2(), p_max, method, |p| self.even_moment(p))
    }

    pub fn moment_table_quadrature(&self, p_max: u32) -> Result<MomentTable> {
        let method = match self {
            Self::FiniteDiscrete { .. } | Self::Rademacher { .. } => MomentMethod::ExactDiscrete,
            _ => MomentMethod::Quadrature,
        };
        MomentTable::build(self.sigma2(), p_max, method, |p| {
            self.quadrature_even_moment(p)
        })
    }

    /// `ln E exp(sX)`.
    pub fn log_mgf(&self, s: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => 0.5 * s * s * sigma * sigma,
            Self::UniformSymmetric { half_width } => log_sinhc(s * half_width),
            Self::Rademacher { scale } => log_cosh(s * scale),
            Self::FiniteDiscrete { values, probs } => {
                log_sum_exp(values.iter().zip(probs).map(|(v, p)| (*p, s * v)))
            }
        }
    }

    /// `E exp(sX)`; may be `+∞` for large `|s|`.
    pub fn mgf(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        self.log_mgf(s).exp()
    }

    /// `ln E exp(sX²)`; `+∞` where the expectation diverges.
    pub fn log_mgf_square(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Gaussian { sigma } => {
                let x = 2.0 * s * sigma * sigma;
                if x >= 1.0 {
                    f64::INFINITY
                } else {
                    -0.5 * (-x).ln_1p()
                }
            }
            Self::UniformSymmetric { half_width } => {
                log_uniform_mgf_square(s * half_width * half_width)?
            }
            Self::Rademacher { scale } => s * scale * scale,
            Self::FiniteDiscrete { values, probs } => {
                log_sum_exp(values.iter().zip(probs).map(|(v, p)| (*p, s * v * v)))
            }
        })
    }

    /// `E exp(sX²)`; `+∞` where it diverges (Gaussian: `s ≥ 1/(2σ²)`).
    pub fn mgf_square(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(self.log_mgf_square(s)?.exp())
    }

    /// `E exp(sX)` by quadrature over the window where the integrand exceeds
    /// `1e-18` of its peak; exact sums for discrete laws.
    pub fn quadrature_mgf(&self, s: f64) -> Result<f64> {
        match self {
            Self::Gaussian { sigma } => {
                let sigma = *sigma;
                // e^{sx}φ(x) ∝ φ(x − sσ²)
                let peak = s * sigma * sigma;
                let half = ((2.0 * LN_TRUNCATION).sqrt() * sigma).min(GAUSS_WINDOW_SIGMAS * sigma);
                let log_shift = 0.5 * s * s * sigma * sigma;
                let e = quadrature::integrate(
                    |x| (s * x - log_shift).exp() * gaussian_density(x, sigma),
                    peak - half,
                    peak + half,
                    Tolerance::default(),
                )?;
                Ok(e.value * log_shift.exp())
            }
            Self::UniformSymmetric { half_width } => {
                let a = *half_width;
                let e = quadrature::integrate(|x| (s * x).exp(), -a, a, Tolerance::default())?;
                Ok(e.value / (2.0 * a))
            }
            _ => Ok(self.mgf(s)),
        }
    }

    /// `E exp(sX²)` by quadrature; `+∞` when the Gaussian integral diverges.
    pub fn quadrature_mgf_square(&self, s: f64) -> Result<f64> {
        match self {
            Self::Gaussian { sigma } => {
                let sigma = *sigma;
                let decay = 0.5 / (sigma * sigma) - s;
                if decay <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                let half = (LN_TRUNCATION / decay)
                    .sqrt()
                    .min(GAUSS_WINDOW_SIGMAS * sigma);
                let e = quadrature::integrate(
                    |x| (s * x * x).exp() * gaussian_density(x, sigma),
                    0.0,
                    half,
                    Tolerance::default(),
                )?;
                Ok(2.0 * e.value)
            }
            _ => self.mgf_square(s),
        }
    }

    /// Support points with their probabilities, for discrete laws.
    pub fn discrete_support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Rademacher { scale } => Some(vec![(-scale, 0.5), (*scale, 0.5)]),
            Self::FiniteDiscrete { values, probs } => {
                Some(values.iter().copied().zip(probs.iter().copied()).collect())
            }
            _ => None,
        }
    }

    /// `count` iid draws from `stream`.
    pub fn sample(&self, stream: &mut RandomStream, count: usize) -> Vec<f64> {
        let sampler = Sampler::new(self);
        (0..count).map(|_| sampler.draw(stream)).collect()
    }
}

fn gaussian_density(x: f64, sigma: f64) -> f64 {
    let z = x / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// `ln cosh x`, accurate near zero.
fn log_cosh(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1.0 {
        // cosh x − 1 = 2 sinh²(x/2)
        (2.0 * (0.5 * ax).sinh().powi(2)).ln_1p()
    } else {
        ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
    }
}

/// `ln(sinh x / x)`, accurate near zero.
fn log_sinhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        0.0
    } else if ax < 1.0 {
        // sinh x / x − 1 = Σ_{k≥1} x^{2k}/(2k+1)!
        let x2 = ax * ax;
        let mut term = 1.0;
        let mut tail = 0.0;
        for k in 1..=12 {
            term *= x2 / f64::from((2 * k) * (2 * k + 1));
            tail += term;
        }
        tail.ln_1p()
    } else {
        ax + (-(-2.0 * ax).exp_m1()).ln() - std::f64::consts::LN_2 - ax.ln()
    }
}

/// `ln ∫_0^1 exp(c u²) du`, the log-MGF of `X²` for `X` uniform on `[−a, a]` with `c = s a²`.
fn log_uniform_mgf_square(c: f64) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-14,
        ..Tolerance::default()
    };
    if c > 0.0 {
        let e = quadrature::integrate(|u| (c * (u * u - 1.0)).exp(), 0.0, 1.0, tol)?;
        Ok(c + e.value.ln())
    } else {
        let e = quadrature::integrate(|u| (c * u * u).exp(), 0.0, 1.0, tol)?;
        Ok(e.value.ln())
    }
}

/// `ln Σ p_i exp(x_i)`, skipping zero-probability terms.
fn log_sum_exp(terms: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let peak = terms
        .clone()
        .filter(|(p, _)| *p > 0.0)
        .map(|(_, x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return peak;
    }
    let sum: f64 = terms
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, x)| p * (x - peak).exp())
        .sum();
    peak + sum.ln()
}

/// Precomputed draw routine for one coordinate.
#[derive(Debug, Clone)]
pub enum Sampler {
    Gaussian(f64),
    Uniform(f64),
    Rademacher(f64),
    Discrete {
        values: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

impl Sampler {
    pub fn new(d: &DistributionSpec) -> Self {
        match d {
            DistributionSpec::Gaussian { sigma } => Sampler::Gaussian(*sigma),
            DistributionSpec::UniformSymmetric { half_width } => Sampler::Uniform(*half_width),
            DistributionSpec::Rademacher { scale } => Sampler::Rademacher(*scale),
            DistributionSpec::FiniteDiscrete { values, probs } => {
                let mut acc = 0.0;
                let cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Sampler::Discrete {
                    values: values.clone(),
                    cumulative,
                }
            }
        }
    }

    #[inline]
    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        match self {
            Sampler::Gaussian(sigma) => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            Sampler::Uniform(a) => a * (2.0 * rng.random::<f64>() - 1.0),
            Sampler::Rademacher(s) => {
                if rng.random::<bool>() {
                    *s
                } else {
                    -s
                }
            }
            Sampler::Discrete { values, cumulative } => {
                let total = *cumulative.last().expect("validated nonempty");
                let u = rng.random::<f64>() * total;
                let idx = cumulative.partition_point(|c| *c <= u);
                values[idx.min(values.len() - 1)]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
    ExactDiscrete,
}

/// `E|X|^{2p}` for `p = 1..=p_max`, together with `σ² = E X²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub sigma2: f64,
    pub even_moments: BTreeMap<u32, f64>,
    pub method: MomentMethod,
}

impl MomentTable {
    fn build(
        sigma2: f64,
        p_max: u32,
        method: MomentMethod,
        moment: impl Fn(u32) -> Result<f64>,
    ) -> Result<Self> {
        if p_max == 0 {
            return Err(Error::invalid("p_max must be at least 1"));
        }
        let even_moments = (1..=p_max)
            .map(|p| moment(p).map(|m| (p, m)))
            .collect::<Result<_>>()?;
        Ok(Self {
            sigma2,
            even_moments,
            method,
        })
    }

    /// Builds a table from raw moments `E|X|^{2p}`, `p = 1, 2, …`.
    pub fn from_moments(moments: &[f64], method: MomentMethod) -> Result<Self> {
        let sigma2 = *moments
            .first()
            .ok_or_else(|| Error::invalid("moment table needs at least E X²"))?;
        if moments.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid("moments must be finite and nonnegative"));
        }
        Ok(Self {
            sigma2,
            even_moments: (1u32..).zip(moments.iter().copied()).collect(),
            method,
        })
    }

    pub fn p_max(&self) -> u32 {
        self.even_moments.keys().next_back().copied().unwrap_or(0)
    }

    pub fn get(&self, p: u32) -> Option<f64> {
        self.even_moments.get(&p).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn catalog() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::gaussian(1.0).unwrap(),
            DistributionSpec::gaussian(0.3).unwrap(),
            DistributionSpec::uniform_symmetric(1.0).unwrap(),
            DistributionSpec::uniform_symmetric(2.5).unwrap(),
            DistributionSpec::rademacher(1.0).unwrap(),
            DistributionSpec::finite_discrete(vec![-2.0, 0.0, 1.0], vec![0.2, 0.4, 0.4]).unwrap(),
        ]
    }

    #[test]
    fn even_moment_examples() {
        let g = DistributionSpec::gaussian(1.0).unwrap();
        assert_eq!(g.even_moment(2).unwrap(), 3.0);
        let u = DistributionSpec::uniform_symmetric(1.0).unwrap();
        assert_relative_eq!(u.even_moment(2).unwrap(), 0.2, max_relative = 1e-15);
        let r = DistributionSpec::rademacher(1.0).unwrap();
        for p in 1..40 {
            assert_eq!(r.even_moment(p).unwrap(), 1.0);
        }
        assert!(g.even_moment(0).is_err());
    }

    #[test]
    fn moment_overflow_is_reported() {
        let g = DistributionSpec::gaussian(10.0).unwrap();
        assert_eq!(g.even_moment(200), Err(Error::MomentOverflow { p: 200 }));
    }

    #[test]
    fn quadrature_matches_closed_form_moments() {
        for d in catalog() {
            for p in 1..=15 {
                let exact = d.even_moment(p).unwrap();
                let quad = d.quadrature_even_moment(p).unwrap();
                assert_relative_eq!(quad, exact, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn sigma2_is_first_moment_entry() {
        for d in catalog() {
            let t = d.moment_table(5).unwrap();
            assert_relative_eq!(t.get(1).unwrap(), t.sigma2, max_relative = 1e-15);
            assert_eq!(t.p_max(), 5);
        }
    }

    #[test]
    fn mgf_examples() {
        let g = DistributionSpec::gaussian(1.0).unwrap();
        assert_relative_eq!(g.mgf(1.0), 0.5f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(
            g.mgf_square(1.0 / 6.0).unwrap(),
            (2.0f64 / 3.0).powf(-0.5),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            g.mgf_square(1.0 / 6.0).unwrap(),
            1.224_744_871,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            g.quadrature_mgf_square(1.0 / 6.0).unwrap(),
            (2.0f64 / 3.0).powf(-0.5),
            max_relative = 1e-12
        );
        let r = DistributionSpec::rademacher(1.0).unwrap();
        assert_eq!(r.mgf(0.0), 1.0);
        assert_relative_eq!(r.mgf(0.7), 0.7f64.cosh(), max_relative = 1e-15);
    }

    #[test]
    fn mgf_at_zero_is_exactly_one() {
        for d in catalog() {
            assert_eq!(d.mgf(0.0), 1.0);
            assert_eq!(d.mgf_square(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn mgf_closed_forms_match_quadrature() {
        for d in catalog() {
            for s in [-3.0, -0.4, 0.05, 0.9, 2.0] {
                assert_relative_eq!(d.mgf(s), d.quadrature_mgf(s).unwrap(), max_relative = 1e-11);
            }
        }
        let g = DistributionSpec::gaussian(0.7).unwrap();
        for s in [-2.0, 0.1, 0.5, 0.9] {
            assert_relative_eq!(
                g.mgf_square(s).unwrap(),
                g.quadrature_mgf_square(s).unwrap(),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn uniform_square_mgf_against_series() {
        // E exp(sX²) = Σ_k s^k E X^{2k} / k!
        let u = DistributionSpec::uniform_symmetric(1.3).unwrap();
        for s in [-0.8f64, 0.2, 1.1] {
            let mut series = 1.0;
            let mut fact = 1.0;
            for k in 1..80u32 {
                fact *= f64::from(k);
                series += s.powi(k as i32) * u.even_moment(k).unwrap() / fact;
            }
            assert_relative_eq!(u.mgf_square(s).unwrap(), series, max_relative = 1e-12);
        }
    }

    #[test]
    fn gaussian_square_mgf_diverges() {
        let g = DistributionSpec::gaussian(1.0).unwrap();
        assert_eq!(g.mgf_square(0.5).unwrap(), f64::INFINITY);
        assert_eq!(g.quadrature_mgf_square(0.6).unwrap(), f64::INFINITY);
    }

    #[test]
    fn log_helpers_near_zero() {
        assert_relative_eq!(log_cosh(1e-5), 0.5e-10, max_relative = 1e-9);
        assert_relative_eq!(log_sinhc(1e-5), 1e-10 / 6.0, max_relative = 1e-9);
        for x in [0.3, 0.999, 1.0, 5.0, 50.0] {
            assert_relative_eq!(log_cosh(x), x.cosh().ln(), max_relative = 1e-14);
            assert_relative_eq!(log_sinhc(x), (x.sinh() / x).ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn construction_validates() {
        assert!(DistributionSpec::gaussian(0.0).is_err());
        assert!(DistributionSpec::uniform_symmetric(-1.0).is_err());
        assert!(DistributionSpec::rademacher(f64::NAN).is_err());
        assert!(DistributionSpec::finite_discrete(vec![1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(DistributionSpec::finite_discrete(vec![-1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DistributionSpec::finite_discrete(vec![-1.0, 1.0], vec![0.5]).is_err());
        assert!(DistributionSpec::finite_discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let d: DistributionSpec =
            serde_json::from_str(r#"{"kind": "gaussian", "sigma": 1.0}"#).unwrap();
        assert_eq!(d, DistributionSpec::Gaussian { sigma: 1.0 });
        let f: DistributionSpec = serde_json::from_str(
            r#"{"kind": "finite_discrete", "values": [-1, 0, 1], "probs": [0.25, 0.5, 0.25]}"#,
        )
        .unwrap();
        let back: DistributionSpec =
            serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        assert!(
            serde_json::from_str::<DistributionSpec>(r#"{"kind": "gaussian", "sigma": -1}"#)
                .is_err()
        );
        assert!(
            serde_json::from_str::<DistributionSpec>(r#"{"kind": "cauchy", "scale": 1}"#).is_err()
        );
    }

    #[test]
    fn sample_examples() {
        let mut stream = RandomStream::new(1, 0);
        let r = DistributionSpec::rademacher(1.0).unwrap();
        assert!(r.sample(&mut stream, 0).is_empty());
        assert!(r
            .sample(&mut stream, 1000)
            .iter()
            .all(|x| *x == 1.0 || *x == -1.0));

        let g = DistributionSpec::gaussian(2.0).unwrap();
        let xs = g.sample(&mut RandomStream::new(7, 0), 1_000_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 5.0 * 2.0 / 1e3, "mean {mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = DistributionSpec::gaussian(1.0).unwrap();
        let a = g.sample(&mut RandomStream::new(5, 2), 100);
        let b = g.sample(&mut RandomStream::new(5, 2), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_moments_within_five_standard_errors() {
        let n = 1_000_000;
        for (i, d) in catalog().into_iter().enumerate() {
            let xs = d.sample(&mut RandomStream::new(11, i as u64), n);
            for p in 1..=3u32 {
                let vals: Vec<f64> = xs.iter().map(|x| x.abs().powi(2 * p as i32)).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let exact = d.even_moment(p).unwrap();
                assert!(
                    (mean - exact).abs() <= 5.0 * se + 1e-15,
                    "{d:?} p={p}: {mean} vs {exact} (se {se})"
                );
            }
        }
    }

    #[test]
    fn moment_table_from_raw_moments() {
        let t = MomentTable::from_moments(&[1.0, 3.0, 15.0], MomentMethod::ClosedForm).unwrap();
        assert_eq!(t.sigma2, 1.0);
        assert_eq!(t.get(3), Some(15.0));
        assert!(MomentTable::from_moments(&[], MomentMethod::ClosedForm).is_err());
    }
}
