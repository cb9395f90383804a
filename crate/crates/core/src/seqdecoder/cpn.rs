use rand::Rng;

use super::{Decision, DecodeOutcome, Engine, StepOutcome};
use crate::codec::Codebook;
use crate::ensembles::{StateFamily, Symbol};
use crate::{Error, Result, C64};

/// Conditional pulse nulling for pulse-position codebooks.
///
/// Hypothesis `h` nulls slot `h` by displacing it with the negated pulse and
/// direct-detects it. A click rules `h` out and moves on to `h + 1`. No
/// click means `h` is kept unless a later slot clicks, in which case the
/// first clicking slot is decoded. All hypotheses ruled out is a FAIL.
pub fn cpn_receiver<R: Rng + ?Sized>(codebook: &Codebook, sent: usize, rng: &mut R) -> Result<DecodeOutcome> {
    let m = codebook.messages();
    if *codebook.family() != StateFamily::Coherent {
        return Err(Error::UnsupportedFamily(codebook.family().tag().to_string()));
    }
    if codebook.blocklength() != m {
        return Err(Error::InvalidParams(format!(
            "pulse nulling needs one slot per message, got n={}, M={m}",
            codebook.blocklength()
        )));
    }
    if sent >= m {
        return Err(Error::IndexOutOfRange { index: sent, len: m });
    }
    let light = |slot: usize| amplitude(codebook.received_symbol(sent, slot));
    let mut click = |alpha: C64| rng.random::<f64>() < -(-alpha.norm_sqr()).exp_m1();
    let mut steps = Vec::with_capacity(m);
    for h in 0..m {
        let nulled = light(h) - amplitude(codebook.received_symbol(h, h));
        if click(nulled) {
            steps.push((h, StepOutcome::No));
            continue;
        }
        steps.push((h, StepOutcome::Yes));
        let decision = (h + 1..m).find(|&j| click(light(j))).unwrap_or(h);
        return Ok(DecodeOutcome::new(
            sent,
            Decision::Message(decision),
            steps,
            Engine::Cpn,
        ));
    }
    Ok(DecodeOutcome::new(sent, Decision::Fail, steps, Engine::Cpn))
}

fn amplitude(symbol: Symbol) -> C64 {
    match symbol {
        Symbol::Amplitude(a) => a,
        Symbol::Phase(_) => unreachable!("coherent codebooks hold amplitudes"),
    }
}
