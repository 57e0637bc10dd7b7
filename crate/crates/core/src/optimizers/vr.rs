use crate::counters::EvalCounters;
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// Variance-reduced gradient `∇f_S(x_t) − ∇f_S(w_k) + μ_k`, where `μ_k` is the
/// full gradient at the snapshot `w_k`. Charges `2|S|` gradient components.
pub fn vr_gradient(
    obj: &dyn Objective,
    batch: &[usize],
    x_t: &[f64],
    w_k: &[f64],
    mu_k: &[f64],
    counters: &mut EvalCounters,
) -> Result<Vec<f64>> {
    if mu_k.len() != obj.dim() {
        return Err(Error::invalid(format!(
            "mu has dimension {}, expected {}",
            mu_k.len(),
            obj.dim()
        )));
    }
    let mut v = obj.grad(batch, x_t, counters)?;
    let at_snapshot = obj.grad(batch, w_k, counters)?;
    for ((vi, si), mi) in v.iter_mut().zip(&at_snapshot).zip(mu_k) {
        *vi = *vi - si + mi;
    }
    Ok(v)
}
