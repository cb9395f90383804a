use rand::Rng;

use super::span::{check_order, SpanRepresentation};
use super::{Decision, DecodeOutcome, Engine, StepOutcome};
use crate::{Error, Result};

/// Renormalisation denominators below this abort the trajectory.
pub const COLLAPSE_THRESHOLD: f64 = 1e-14;

/// Samples one run of the sequential decoder in natural test order.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    span: &SpanRepresentation,
    sent: usize,
    rng: &mut R,
) -> Result<DecodeOutcome> {
    let order: Vec<usize> = (0..span.messages()).collect();
    simulate_trajectory_ordered(span, sent, &order, rng)
}

/// Samples one run, testing messages in `order`. Draws one uniform per test.
pub fn simulate_trajectory_ordered<R: Rng + ?Sized>(
    span: &SpanRepresentation,
    sent: usize,
    order: &[usize],
    rng: &mut R,
) -> Result<DecodeOutcome> {
    if sent >= span.messages() {
        return Err(Error::IndexOutOfRange {
            index: sent,
            len: span.messages(),
        });
    }
    check_order(order, span.messages())?;
    let mut chi = span.vector(sent);
    chi.unscale_mut(chi.norm());
    let mut steps = Vec::with_capacity(order.len());
    for &i in order {
        let p_yes = span.overlap(i, &chi).norm_sqr().min(1.0);
        if rng.random::<f64>() < p_yes {
            steps.push((i, StepOutcome::Yes));
            return Ok(DecodeOutcome::new(sent, Decision::Message(i), steps, Engine::Gram));
        }
        steps.push((i, StepOutcome::No));
        span.reject(i, &mut chi);
        let norm_sqr = chi.norm_squared();
        if norm_sqr < COLLAPSE_THRESHOLD {
            return Err(Error::NumericalCollapse { norm: norm_sqr });
        }
        chi.unscale_mut(norm_sqr.sqrt());
    }
    Ok(DecodeOutcome::new(sent, Decision::Fail, steps, Engine::Gram))
}
