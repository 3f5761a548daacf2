//! Scalar model parameters: adjacency radius, tile side, rectangle width and
//! the bridge-fraction budget.
//!
//! Natural logarithms throughout. Parameter arithmetic is `f64`; the grid
//! order `K` is kept as an exact integer and the tile side is always `1/K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible dense threshold.
pub const MIN_DENSE_THRESHOLD: usize = 9;

/// Inputs of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of nodes.
    pub n: usize,
    /// Coefficient of the `log log n` term.
    pub alpha: f64,
    /// Concrete value of the divergent term for this run.
    pub omega: f64,
    /// Density lower bound.
    pub eps1: f64,
    /// Density upper bound.
    pub eps2: f64,
    /// Dense threshold: a tile is dense when it holds at least `l` nodes.
    #[serde(rename = "L")]
    pub l: usize,
    /// Requested rectangle width multiplier, in tiles.
    #[serde(rename = "M")]
    pub m: usize,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.eps1.is_finite() && self.eps2.is_finite()) {
            return Err(Error::InvalidParams("eps1 and eps2 must be finite".into()));
        }
        if !(self.eps1 > 0.0 && self.eps1 <= 1.0) {
            return Err(Error::InvalidParams(format!("eps1 must lie in (0, 1], got {}", self.eps1)));
        }
        if self.eps2 < self.eps1 {
            return Err(Error::InvalidParams(format!(
                "eps2 ({}) must be >= eps1 ({})",
                self.eps2, self.eps1
            )));
        }
        if self.l < MIN_DENSE_THRESHOLD {
            return Err(Error::InvalidParams(format!("L must be >= 9, got {}", self.l)));
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("M must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::InvalidParams(format!("omega must be finite and >= 0, got {}", self.omega)));
        }
        if self.alpha > 0.0 && (self.n as f64) <= std::f64::consts::E {
            return Err(Error::InvalidParams(format!(
                "n must exceed e when alpha > 0 (log log n undefined), got n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// `log n + alpha log log n + omega`, the common numerator of the radius
    /// and tile side.
    pub fn log_budget(&self) -> f64 {
        let ln_n = (self.n as f64).ln();
        let loglog = if self.alpha > 0.0 { self.alpha * ln_n.ln() } else { 0.0 };
        ln_n + loglog + self.omega
    }

    /// `theta = (log n + alpha log log n + omega) / eps1`.
    pub fn theta(&self) -> f64 {
        self.log_budget() / self.eps1
    }
}

/// `omega = log log n`, the CLI shorthand for a slowly divergent term.
pub fn omega_loglog(n: usize) -> Result<f64> {
    let v = (n as f64).ln().ln();
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("log log n is negative or undefined for n = {n}")))
    }
}

/// Adjacency radius `r_n = sqrt((log n + alpha log log n + omega) / (4 eps1 n))`.
pub fn radius(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    Ok((p.log_budget() / (4.0 * p.eps1 * p.n as f64)).sqrt())
}

/// Tiling of the unit square into `K x K` tiles of side `1/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TilingSpec {
    /// Grid order; tile side is exactly `1/k`.
    #[serde(rename = "K")]
    pub k: usize,
    pub t_n: f64,
    /// Slack `theta_n - 8 n t_n^2`, always positive.
    pub gamma_n: f64,
    pub theta_n: f64,
    pub r_n: f64,
    /// Set when `gamma_n >= 1`, i.e. outside the asymptotic regime where the
    /// slack lies in (0, 1). The geometric guarantees hold regardless.
    pub gamma_flagged: bool,
}

impl TilingSpec {
    /// Number of tiles.
    pub fn cells(&self) -> usize {
        self.k * self.k
    }
}

/// Smallest `K` with `8n/K^2 < theta`, together with the derived tile side,
/// slack and radius.
pub fn tile_side(p: &ModelParams) -> Result<TilingSpec> {
    let r_n = radius(p)?;
    let theta = p.theta();
    let n8 = 8.0 * p.n as f64;
    let admissible = |k: usize| n8 / ((k * k) as f64) < theta;

    let mut k = ((n8 / theta).sqrt().floor() as usize).max(1);
    while !admissible(k) {
        k += 1;
    }
    while k > 1 && admissible(k - 1) {
        k -= 1;
    }

    let gamma_n = theta - n8 / ((k * k) as f64);
    Ok(TilingSpec {
        k,
        t_n: 1.0 / k as f64,
        gamma_n,
        theta_n: theta,
        r_n,
        gamma_flagged: gamma_n >= 1.0,
    })
}

/// Bridge-fraction budget `16/(L-8)`, raw and clamped to 1.
pub fn bridge_budget(l: usize) -> Result<(f64, f64)> {
    if l <= 8 {
        return Err(Error::InvalidParams(format!("L must be >= 9, got {l}")));
    }
    let raw = 16.0 / (l - 8) as f64;
    Ok((raw, raw.min(1.0)))
}

/// Effective rectangle width: the smallest divisor of `k` that is `>= m`.
///
/// Always exists since `k` divides itself.
pub fn rect_width(m: usize, k: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidParams("M must be >= 1".into()));
    }
    if m > k {
        return Err(Error::InvalidParams(format!("M ({m}) exceeds grid order K ({k})")));
    }
    Ok((m..=k).find(|&d| k.is_multiple_of(d)).unwrap_or(k))
}

/// Everything `params` reports, flattened.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsReport {
    pub n: usize,
    pub alpha: f64,
    pub omega: f64,
    pub eps1: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M_eff")]
    pub m_eff: usize,
    pub r_n: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub t_n: f64,
    pub gamma_n: f64,
    pub theta_n: f64,
    pub budget_raw: f64,
    pub budget_effective: f64,
}

impl ParamsReport {
    pub fn compute(p: &ModelParams) -> Result<Self> {
        let spec = tile_side(p)?;
        // M larger than the grid is clamped to one rectangle per direction.
        let m_eff = rect_width(p.m.min(spec.k), spec.k)?;
        let (budget_raw, budget_effective) = bridge_budget(p.l)?;
        Ok(Self {
            n: p.n,
            alpha: p.alpha,
            omega: p.omega,
            eps1: p.eps1,
            l: p.l,
            m_eff,
            r_n: spec.r_n,
            k: spec.k,
            t_n: spec.t_n,
            gamma_n: spec.gamma_n,
            theta_n: spec.theta_n,
            budget_raw,
            budget_effective,
        })
    }
}
