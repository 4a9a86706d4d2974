//! Analytic concentration bounds for `ξᵀAξ − E ξᵀAξ` and the Chernoff
//! optimization behind the Bernstein-condition bound.
//!
//! With `H = ‖A D_σ‖_HS` and `Op = ‖A‖_op`, the Bernstein-condition tail is
//!
//! ```text
//! P(ξᵀAξ − E ξᵀAξ > t) ≤ exp(−x(t)),   x(t) = min(t²/(192 K² H²), t/(256 K² Op))
//! ```
//!
//! obtained from the Chernoff exponent `−λt + 48 λ² K² H²` over
//! `0 < λ ≤ 1/(128 Op K²)`. The rate function `x(t)` is an increasing
//! bijection of the positive reals, and its inverse is
//! `max(8√3 K H √x, 256 K² Op x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::NormStats;

const VARIANCE_DENOM: f64 = 192.0;
const LINEAR_DENOM: f64 = 256.0;
/// `√192 = 8√3`
const SQRT_192: f64 = 13.856_406_460_551_018;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub norms: NormStats,
    /// Bernstein / subgaussian scale.
    #[serde(rename = "K")]
    pub k: f64,
    /// Absolute constant of the classical Hanson-Wright inequality. It has no
    /// known numerical value; callers choose it explicitly.
    pub hw_constant_c: f64,
}

impl BoundInputs {
    pub fn new(norms: NormStats, k: f64, hw_constant_c: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid(format!(
                "K must be positive and finite, got {k}"
            )));
        }
        if !(hw_constant_c.is_finite() && hw_constant_c > 0.0) {
            return Err(Error::invalid(format!(
                "Hanson-Wright constant must be positive, got {hw_constant_c}"
            )));
        }
        Ok(Self {
            norms,
            k,
            hw_constant_c,
        })
    }

    /// `H = ‖A D_σ‖_HS`
    fn h(&self) -> f64 {
        self.norms.hs_right_scaled
    }

    fn op(&self) -> f64 {
        self.norms.op
    }

    fn k2(&self) -> f64 {
        self.k * self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    GaussianChaosImplied,
    HansonWright,
    BernsteinImproved,
}

fn variance_branch(inputs: &BoundInputs, t: f64) -> f64 {
    t * t / (VARIANCE_DENOM * inputs.k2() * inputs.h().powi(2))
}

fn linear_branch(inputs: &BoundInputs, t: f64) -> f64 {
    t / (LINEAR_DENOM * inputs.k2() * inputs.op())
}

fn prob(exponent: f64) -> f64 {
    (-exponent).exp().clamp(0.0, 1.0)
}

/// `exp(−min(t²/(192K²H²), t/(256K²·Op)))`; equal to 1 for `t ≤ 0` and to 0
/// when both norms vanish.
pub fn bernstein_tail(inputs: &BoundInputs, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    prob(variance_branch(inputs, t).min(linear_branch(inputs, t)))
}

/// `256 K² Op x + 8√3 K H √x`
pub fn bernstein_deviation(inputs: &BoundInputs, x: f64) -> f64 {
    let x = x.max(0.0);
    LINEAR_DENOM * inputs.k2() * inputs.op() * x + SQRT_192 * inputs.k * inputs.h() * x.sqrt()
}

fn check_nondegenerate(inputs: &BoundInputs) -> Result<()> {
    if inputs.h() == 0.0 && inputs.op() == 0.0 {
        return Err(Error::Degenerate(
            "rate function needs a nonzero matrix norm".into(),
        ));
    }
    Ok(())
}

/// `x(t) = min(t²/(192K²H²), t/(256K²·Op))`.
pub fn rate_function(inputs: &BoundInputs, t: f64) -> Result<f64> {
    check_nondegenerate(inputs)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    Ok(variance_branch(inputs, t).min(linear_branch(inputs, t)))
}

/// Exact inverse of [`rate_function`]: `max(8√3 K H √x, 256 K² Op x)`.
pub fn inverse_rate(inputs: &BoundInputs, x: f64) -> Result<f64> {
    check_nondegenerate(inputs)?;
    if !(x > 0.0) {
        return Err(Error::invalid(format!("x must be positive, got {x}")));
    }
    let variance = SQRT_192 * inputs.k * inputs.h() * x.sqrt();
    let linear = LINEAR_DENOM * inputs.k2() * inputs.op() * x;
    Ok(variance.max(linear))
}

/// `exp(−c·min(t²/(K⁴‖A‖²_HS), t/(K²‖A‖_op)))`
pub fn hanson_wright_tail(inputs: &BoundInputs, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let k2 = inputs.k2();
    let quad = t * t / (k2 * k2 * inputs.norms.hs.powi(2));
    let lin = t / (k2 * inputs.norms.op);
    prob(inputs.hw_constant_c * quad.min(lin))
}

/// `c K² ‖A‖_op x + c K² ‖A‖_HS √x`
pub fn hanson_wright_deviation(inputs: &BoundInputs, x: f64) -> f64 {
    let x = x.max(0.0);
    let ck2 = inputs.hw_constant_c * inputs.k2();
    ck2 * inputs.norms.op * x + ck2 * inputs.norms.hs * x.sqrt()
}

/// `2‖D_σAD_σ‖_HS √x + 2‖D_σAD_σ‖_op x`, valid for Gaussian coordinates.
pub fn gaussian_chaos_deviation(norms: &NormStats, x: f64) -> f64 {
    let x = x.max(0.0);
    2.0 * norms.hs_double_scaled * x.sqrt() + 2.0 * norms.op_double_scaled * x
}

/// Tail probability implied by [`gaussian_chaos_deviation`]: `exp(−x)` with
/// `x` solving `2H₂√x + 2Op₂x = t`.
pub fn gaussian_chaos_tail(norms: &NormStats, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let a = 2.0 * norms.op_double_scaled;
    let b = 2.0 * norms.hs_double_scaled;
    let root = if a > 0.0 {
        // stable root of a·r² + b·r − t = 0
        2.0 * t / (b + (b * b + 4.0 * a * t).sqrt())
    } else if b > 0.0 {
        t / b
    } else {
        return 0.0;
    };
    prob(root * root)
}

pub fn tail_bound(inputs: &BoundInputs, which: BoundKind, t: f64) -> f64 {
    match which {
        BoundKind::BernsteinImproved => bernstein_tail(inputs, t),
        BoundKind::HansonWright => hanson_wright_tail(inputs, t),
        BoundKind::GaussianChaosImplied => gaussian_chaos_tail(&inputs.norms, t),
    }
}

pub fn deviation_bound(inputs: &BoundInputs, which: BoundKind, x: f64) -> f64 {
    match which {
        BoundKind::BernsteinImproved => bernstein_deviation(inputs, x),
        BoundKind::HansonWright => hanson_wright_deviation(inputs, x),
        BoundKind::GaussianChaosImplied => gaussian_chaos_deviation(&inputs.norms, x),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBoundCurve {
    pub which: BoundKind,
    pub t_grid: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCurve {
    pub which: BoundKind,
    pub x_grid: Vec<f64>,
    pub deviations: Vec<f64>,
}

fn check_increasing(grid: &[f64], name: &str) -> Result<()> {
    if grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "{name} must be strictly increasing positive values"
        )));
    }
    Ok(())
}

pub fn tail_curve(
    inputs: &BoundInputs,
    which: BoundKind,
    t_grid: &[f64],
) -> Result<TailBoundCurve> {
    check_increasing(t_grid, "t grid")?;
    Ok(TailBoundCurve {
        which,
        t_grid: t_grid.to_vec(),
        probs: t_grid
            .iter()
            .map(|&t| tail_bound(inputs, which, t))
            .collect(),
    })
}

pub fn deviation_curve(
    inputs: &BoundInputs,
    which: BoundKind,
    x_grid: &[f64],
) -> Result<DeviationCurve> {
    check_increasing(x_grid, "x grid")?;
    Ok(DeviationCurve {
        which,
        x_grid: x_grid.to_vec(),
        deviations: x_grid
            .iter()
            .map(|&x| deviation_bound(inputs, which, x))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChernoffRegime {
    /// `λ̄ = t/(96K²H²)` satisfies the constraint.
    Unconstrained,
    /// The constraint `128 Op K² λ ≤ 1` binds: `λ = 1/(128 Op K²)`.
    Binding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffSolution {
    pub lambda_star: f64,
    /// `−λt + 48λ²K²H²` at `lambda_star`.
    pub exponent: f64,
    pub regime: ChernoffRegime,
}

/// Largest admissible `λ`, `1/(128 Op K²)`.
pub fn lambda_cap(op: f64, k: f64) -> f64 {
    1.0 / (128.0 * op * k * k)
}

/// `128 Op K² λ ≤ 1`
pub fn lambda_admissible(op: f64, k: f64, lambda: f64) -> bool {
    lambda > 0.0 && 128.0 * op * k * k * lambda <= 1.0
}

/// `η = 32 K² λ²`
pub fn eta(k: f64, lambda: f64) -> f64 {
    32.0 * k * k * lambda * lambda
}

/// `−λt + 48 λ² K² H²`
pub fn chernoff_exponent(inputs: &BoundInputs, lambda: f64, t: f64) -> f64 {
    -lambda * t + 48.0 * lambda * lambda * inputs.k2() * inputs.h().powi(2)
}

/// Minimizes [`chernoff_exponent`] over admissible `λ`.
pub fn chernoff_machinery(inputs: &BoundInputs, t: f64) -> Result<ChernoffSolution> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    if !(inputs.h() > 0.0 && inputs.op() > 0.0) {
        return Err(Error::Degenerate(
            "Chernoff optimization needs ‖A D_σ‖_HS > 0 and ‖A‖_op > 0".into(),
        ));
    }
    let unconstrained = t / (96.0 * inputs.k2() * inputs.h().powi(2));
    let cap = lambda_cap(inputs.op(), inputs.k);
    let (lambda_star, regime) = if unconstrained <= cap {
        (unconstrained, ChernoffRegime::Unconstrained)
    } else {
        (cap, ChernoffRegime::Binding)
    };
    Ok(ChernoffSolution {
        lambda_star,
        exponent: chernoff_exponent(inputs, lambda_star, t),
        regime,
    })
}
