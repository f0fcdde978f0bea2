//! Dependent latent processes and computable dependence diagnostics.
//!
//! The AR(1)-Gamma process `X_n = ρ X_{n-1} + ε_n` draws its innovations as
//! `ε_n | B_n ~ Gamma(B_n, λ)` with `B_n ~ Binomial(m, 1-ρ)` (and `ε_n = 0`
//! when `B_n = 0`), which makes `Gamma(m, λ)` the exact stationary marginal.
//! The functional dependence measure of the process decays geometrically:
//! `δ_p(k) <= 2 ρ^k ‖ε_1‖_p`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::sampling::{self, SimRng};

/// Parameters of the AR(1)-Gamma process.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ar1GammaConfig {
    /// Binomial size; also the Gamma shape of the stationary marginal.
    pub m: u32,
    /// Gamma rate of innovations and marginal.
    pub lambda: f64,
    /// AR coefficient; the binomial thinning needs `0 <= ρ < 1`.
    pub rho: f64,
}

impl Ar1GammaConfig {
    pub fn new(m: u32, lambda: f64, rho: f64) -> Result<Self> {
        if m < 1 {
            return Err(CoreError::InvalidConfig("ar1_gamma needs m >= 1".into()));
        }
        if !(lambda > 0.0) {
            return Err(CoreError::InvalidConfig(format!(
                "ar1_gamma needs lambda > 0, got {lambda}"
            )));
        }
        if rho < 0.0 {
            return Err(CoreError::InvalidConfig(format!(
                "ar1_gamma supports 0 <= rho < 1 only (thinning), got {rho}"
            )));
        }
        if rho >= 1.0 {
            return Err(CoreError::InvalidConfig(format!(
                "ar1_gamma needs |rho| < 1, got {rho}"
            )));
        }
        Ok(Self { m, lambda, rho })
    }
}

/// A stationary path of length `n`: `X_0 ~ Gamma(m, λ)` exactly (no burn-in),
/// then the recursion.
pub fn sample_ar1_gamma(n: usize, cfg: &Ar1GammaConfig, rng: &mut SimRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut x = sampling::gamma(rng, cfg.m as f64, cfg.lambda);
    out.push(x);
    for _ in 1..n {
        let b = sampling::binomial(rng, cfg.m, 1.0 - cfg.rho);
        let eps = if b == 0 {
            0.0
        } else {
            sampling::gamma(rng, b as f64, cfg.lambda)
        };
        x = cfg.rho * x + eps;
        out.push(x);
    }
    out
}

/// `‖ε_1‖_1 = E[ε] = m (1-ρ) / λ`.
pub fn eps_norm_l1(cfg: &Ar1GammaConfig) -> f64 {
    cfg.m as f64 * (1.0 - cfg.rho) / cfg.lambda
}

/// `‖ε_1‖_2 = (E[ε²])^{1/2}` from the compound Gamma–Binomial moments:
/// `E[ε²] = m(1-ρ)[(1+ρ) + m(1-ρ)] / λ²`.
pub fn eps_norm_l2(cfg: &Ar1GammaConfig) -> f64 {
    let m = cfg.m as f64;
    let q = 1.0 - cfg.rho;
    (m * q * ((1.0 + cfg.rho) + m * q)).sqrt() / cfg.lambda
}

/// Functional-dependence bound `δ_p(k) <= 2 ρ^k ‖ε_1‖_p` for `p ∈ {1, 2}`.
pub fn fdm_bound(k: u32, cfg: &Ar1GammaConfig, p: u32) -> Result<f64> {
    let norm = match p {
        1 => eps_norm_l1(cfg),
        2 => eps_norm_l2(cfg),
        _ => {
            return Err(CoreError::InvalidConfig(format!(
                "fdm_bound supports p in {{1, 2}}, got {p}"
            )))
        }
    };
    Ok(2.0 * cfg.rho.powi(k as i32) * norm)
}

/// Geometric sums of the dependence bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FdmSums {
    /// `Σ_k 2 ρ^k ‖ε‖_2 = 2‖ε‖_2 / (1-ρ)` (constant-carrying bound).
    pub sum_delta2: f64,
    /// `Σ_k (2 ρ^k ‖ε‖_1)^{1/2} = (2‖ε‖_1)^{1/2} / (1-√ρ)`.
    pub sum_delta1_sqrt: f64,
    /// Pure geometric series `Σ ρ^k = 1/(1-ρ)`.
    pub geometric_sum_rho: f64,
    /// Pure geometric series `Σ ρ^{k/2} = 1/(1-√ρ)`.
    pub geometric_sum_sqrt_rho: f64,
}

/// Closed-form sums of the implemented bounds, plus the pure geometric
/// series (the constants `2‖ε_1‖_p` factored out).
pub fn fdm_sums(cfg: &Ar1GammaConfig) -> FdmSums {
    FdmSums {
        sum_delta2: 2.0 * eps_norm_l2(cfg) / (1.0 - cfg.rho),
        sum_delta1_sqrt: (2.0 * eps_norm_l1(cfg)).sqrt() / (1.0 - cfg.rho.sqrt()),
        geometric_sum_rho: 1.0 / (1.0 - cfg.rho),
        geometric_sum_sqrt_rho: 1.0 / (1.0 - cfg.rho.sqrt()),
    }
}

/// Hölder constant of `x ↦ x^{1/2+it}`: `L(t) = 1 + 4 |t|^{1/2}`.
pub fn holder_constant(t: f64) -> f64 {
    1.0 + 4.0 * t.abs().sqrt()
}

/// Dependence diagnostics for one AR(1)-Gamma configuration.
#[derive(Debug, Clone, Copy)]
pub struct DependenceDiagnostics {
    cfg: Ar1GammaConfig,
}

impl DependenceDiagnostics {
    pub fn new(cfg: Ar1GammaConfig) -> Self {
        Self { cfg }
    }

    pub fn delta1_bound(&self, k: u32) -> f64 {
        fdm_bound(k, &self.cfg, 1).expect("p = 1 is supported")
    }

    pub fn delta2_bound(&self, k: u32) -> f64 {
        fdm_bound(k, &self.cfg, 2).expect("p = 2 is supported")
    }

    pub fn sums(&self) -> FdmSums {
        fdm_sums(&self.cfg)
    }

    pub fn holder_l(&self, t: f64) -> f64 {
        holder_constant(t)
    }
}
