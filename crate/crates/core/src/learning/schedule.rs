use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decaying weights `α_k = a/(k+1)^τ₁` (innovation) and `β_k = b/(k+1)^τ₂`
/// (consensus), where `k` counts earlier visits to the sampled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub a: f64,
    pub b: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub eps1: f64,
}

impl ScheduleParams {
    /// Requires `a, b > 0`, `τ₁ ∈ (1/2, 1]`, `ε₁ > 0` and `0 < τ₂ < τ₁ - 1/(2+ε₁)`.
    pub fn new(a: f64, b: f64, tau1: f64, tau2: f64, eps1: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::arg(format!("weights need a, b > 0 (got a = {a}, b = {b})")));
        }
        if !(tau1 > 0.5 && tau1 <= 1.0) {
            return Err(Error::arg(format!("tau1 must lie in (1/2, 1], got {tau1}")));
        }
        if !(eps1 > 0.0) {
            return Err(Error::arg(format!("eps1 must be positive, got {eps1}")));
        }
        let ceiling = tau1 - 1.0 / (2.0 + eps1);
        if !(tau2 > 0.0 && tau2 < ceiling) {
            return Err(Error::arg(format!("tau2 must lie in (0, {ceiling}), got {tau2}")));
        }
        Ok(ScheduleParams { a, b, tau1, tau2, eps1 })
    }

    /// Derives `τ₂ = τ₁ - 1/(2+ε₁) - ε₂`.
    pub fn from_margins(a: f64, b: f64, tau1: f64, eps1: f64, eps2: f64) -> Result<Self> {
        let tau2 = tau1 - 1.0 / (2.0 + eps1) - eps2;
        ScheduleParams::new(a, b, tau1, tau2, eps1)
    }

    /// The experiment defaults for `n` agents: `a = b = 1/n`, `τ₁ = 1`, `ε₁ = ε₂ = 1e-4`.
    pub fn reference(n: usize) -> Self {
        let w = 1.0 / n as f64;
        ScheduleParams::from_margins(w, w, 1.0, 1e-4, 1e-4).expect("reference schedule is valid")
    }

    pub fn alpha_weight(&self, k: u64) -> f64 {
        self.a / ((k + 1) as f64).powf(self.tau1)
    }

    pub fn beta_weight(&self, k: u64) -> f64 {
        self.b / ((k + 1) as f64).powf(self.tau2)
    }
}
