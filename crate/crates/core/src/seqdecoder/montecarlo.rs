use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cpn::cpn_receiver;
use super::fock::{fock_receiver, FockOptions, FockReceiver};
use super::span::{Factorization, SpanRepresentation};
use super::trajectory::simulate_trajectory;
use super::{Decision, DecodeOutcome, Engine};
use crate::codec::{codeword_gram, Codebook};
use crate::rng::{stream, Purpose};
use crate::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A codebook prepared for repeated decoding by one engine.
#[derive(Debug, Clone)]
pub enum Decoder<'a> {
    Gram(SpanRepresentation),
    Fock(Box<FockReceiver>),
    Cpn(&'a Codebook),
}

impl<'a> Decoder<'a> {
    pub fn new(engine: Engine, codebook: &'a Codebook, fock: FockOptions) -> Result<Self> {
        Ok(match engine {
            Engine::Gram => Decoder::Gram(SpanRepresentation::from_gram(&codeword_gram(codebook)?)?),
            Engine::Fock => Decoder::Fock(Box::new(fock_receiver(codebook, fock)?)),
            Engine::Cpn => Decoder::Cpn(codebook),
        })
    }

    pub fn engine(&self) -> Engine {
        match self {
            Decoder::Gram(_) => Engine::Gram,
            Decoder::Fock(_) => Engine::Fock,
            Decoder::Cpn(_) => Engine::Cpn,
        }
    }

    pub fn messages(&self) -> usize {
        match self {
            Decoder::Gram(span) => span.messages(),
            Decoder::Fock(rx) => rx.messages(),
            Decoder::Cpn(c) => c.messages(),
        }
    }

    pub fn decode<R: Rng + ?Sized>(&self, sent: usize, rng: &mut R) -> Result<DecodeOutcome> {
        match self {
            Decoder::Gram(span) => simulate_trajectory(span, sent, rng),
            Decoder::Fock(rx) => rx.decode(sent, rng),
            Decoder::Cpn(c) => cpn_receiver(c, sent, rng),
        }
    }
}

/// Monte Carlo error count with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub engine: Engine,
    /// Span factorisation used by the Gram engine.
    pub factorization: Option<Factorization>,
    pub trials: u64,
    /// Wrong decisions, FAIL included.
    pub errors: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub wall_ms: u64,
}

impl ErrorEstimate {
    pub fn from_counts(engine: Engine, trials: u64, errors: u64, failures: u64, seed: u64) -> Self {
        ErrorEstimate {
            engine,
            factorization: (engine == Engine::Gram).then_some(Factorization::Eigen),
            trials,
            errors,
            failures,
            p_hat: if trials == 0 {
                0.0
            } else {
                errors as f64 / trials as f64
            },
            ci95: wilson_interval(errors, trials),
            seed,
            wall_ms: 0,
        }
    }

    /// Standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval at 95% for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Estimates the average error with `trials` uniformly drawn messages.
///
/// Trial `t` draws its message and measurement outcomes from stream
/// `(seed, Trial, t)`, so counts do not depend on the thread count.
pub fn monte_carlo_error(engine: Engine, codebook: &Codebook, trials: u64, seed: u64) -> Result<ErrorEstimate> {
    monte_carlo_error_with(engine, codebook, trials, seed, FockOptions::default())
}

pub fn monte_carlo_error_with(
    engine: Engine,
    codebook: &Codebook,
    trials: u64,
    seed: u64,
    fock: FockOptions,
) -> Result<ErrorEstimate> {
    let start = Instant::now();
    let decoder = Decoder::new(engine, codebook, fock)?;
    let m = decoder.messages() as u64;
    let (errors, failures) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, Purpose::Trial, t);
            let sent = rng.random_range(0..m) as usize;
            let outcome = decoder.decode(sent, &mut rng)?;
            Ok((outcome.is_error() as u64, (outcome.decision == Decision::Fail) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(ErrorEstimate {
        wall_ms: start.elapsed().as_millis() as u64,
        ..ErrorEstimate::from_counts(engine, trials, errors, failures, seed)
    })
}

/// Decision counts for a fixed sent message: entry `i` counts decisions for
/// message `i`, the final entry counts FAILs.
pub fn decision_histogram(decoder: &Decoder<'_>, sent: usize, trials: u64, seed: u64) -> Result<Vec<u64>> {
    let m = decoder.messages();
    if sent >= m {
        return Err(Error::IndexOutOfRange { index: sent, len: m });
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let outcome = decoder.decode(sent, &mut stream(seed, Purpose::Trial, t))?;
            let mut counts = vec![0u64; m + 1];
            counts[outcome.decision.slot(m)] += 1;
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}
