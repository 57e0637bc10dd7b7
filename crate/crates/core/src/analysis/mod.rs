//! Theory constants and numerical checks for the convergence analysis.
//!
//! Under `λI ⪯ ∇²f_T ⪯ ΛI` for every subsample `T`, the L-BFGS matrix
//! `H = B⁻¹` built from `M` Hessian-vector-product pairs in dimension `d`
//! satisfies `tr B ≤ (d+M)Λ`, `det B ≥ λ^{d+M} / ((d+M)Λ)^M` and
//! `γI ⪯ H ⪯ ΓI` with
//!
//! ```text
//! γ = 1 / ((d+M)Λ)        Γ = ((d+M)Λ)^{d+M−1} / λ^{d+M}
//! ```
//!
//! and the outer iterates contract in expectation at rate
//!
//! ```text
//! α = (1/(2mη) + ηΓ²Λ²) / (γλ − ηΓ²Λ²)
//! ```
//!
//! whenever `η < γλ / (2Γ²Λ²)` and `γλ > 1/(2mη) + 2ηΓ²Λ²`.
//!
//! The bound on `Γ` is astronomically loose for realistic `d`; it is reported
//! as computed.

mod checks;
mod sweeps;

pub use checks::{
    check_lemma1, check_lemma2, check_lemma3, check_lemma4, Lemma1Report, Lemma2Report,
    Lemma3Report, Lemma4Report, CHECK_MAX_DIM, LEMMA4_MAX_N, RELATIVE_SLACK,
};
pub use sweeps::{
    contraction_experiment, lemma12_sweep, lemma3_sweep, lemma4_sweep, measure_spectrum,
    random_memory, random_spd, contraction_setting, ContractionReport, SweepReport, ContractionSetting,
    Violation,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform eigenvalue bounds `λ ≤ eig(∇²f_T) ≤ Λ` over all subsamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBounds {
    pub lambda: f64,
    pub big_lambda: f64,
}

impl SpectrumBounds {
    pub fn new(lambda: f64, big_lambda: f64) -> Self {
        Self { lambda, big_lambda }
    }

    /// Refuses `λ ≤ 0`: without a positive lower bound the constants below
    /// do not exist.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::AssumptionViolation(format!(
                "strong convexity lower bound must be positive, got λ = {}",
                self.lambda
            )));
        }
        if !(self.big_lambda.is_finite() && self.big_lambda >= self.lambda) {
            return Err(Error::AssumptionViolation(format!(
                "need λ ≤ Λ, got λ = {}, Λ = {}",
                self.lambda, self.big_lambda
            )));
        }
        Ok(())
    }
}

/// `(γ, Γ)` for dimension `d` and memory `M`.
pub fn gamma_bounds(d: usize, memory: usize, bounds: SpectrumBounds) -> Result<(f64, f64)> {
    bounds.validate()?;
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let dm = (d + memory) as f64;
    let scale = dm * bounds.big_lambda;
    let gamma = 1.0 / scale;
    // ((d+M)Λ/λ)^{d+M−1} / λ, arranged to delay overflow.
    let big_gamma = (scale / bounds.lambda).powi((d + memory - 1) as i32) / bounds.lambda;
    Ok((gamma, big_gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub gamma: f64,
    pub big_gamma: f64,
    /// Present only when both step-size and inner-loop conditions hold.
    pub alpha: Option<f64>,
    pub eta_ok: bool,
    pub m_ok: bool,
}

/// Linear-rate constant for step size `eta` and `m` inner iterations.
pub fn convergence_rate(
    d: usize,
    memory: usize,
    bounds: SpectrumBounds,
    eta: f64,
    m: usize,
) -> Result<RateReport> {
    let (gamma, big_gamma) = gamma_bounds(d, memory, bounds)?;
    rate_from_constants(gamma, big_gamma, bounds, eta, m)
}

/// Evaluates the rate formula from given `γ`, `Γ`, bypassing their closed forms.
pub fn rate_from_constants(
    gamma: f64,
    big_gamma: f64,
    bounds: SpectrumBounds,
    eta: f64,
    m: usize,
) -> Result<RateReport> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {eta}")));
    }
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let SpectrumBounds { lambda, big_lambda } = bounds;
    let curv = big_gamma * big_gamma * big_lambda * big_lambda;
    let eta_curv = eta * curv;
    let inv_2m_eta = 1.0 / (2.0 * m as f64 * eta);
    let eta_ok = eta < gamma * lambda / (2.0 * curv);
    let m_ok = gamma * lambda > inv_2m_eta + 2.0 * eta_curv;
    let alpha = (eta_ok && m_ok).then(|| (inv_2m_eta + eta_curv) / (gamma * lambda - eta_curv));
    Ok(RateReport {
        gamma,
        big_gamma,
        alpha,
        eta_ok,
        m_ok,
    })
}
