//! Sequential decoding: exact Gram-chain evaluation, sampled trajectories in
//! the codeword span, a truncated Fock-space receiver, and pulse nulling.

mod cpn;
mod fock;
mod montecarlo;
mod span;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codec::{codeword_gram, Codebook};
use crate::{Error, Result};

pub use cpn::cpn_receiver;
pub use fock::{
    auto_cutoff, fock_receiver, FockOptions, FockReceiver, AMPLITUDE_BUDGET, CUTOFF_TAIL, RUNTIME_LEAK_TOLERANCE,
};
pub use montecarlo::{
    decision_histogram, monte_carlo_error, monte_carlo_error_with, wilson_interval, Decoder, ErrorEstimate, Z_95,
};
pub use span::{
    average_error_exact, average_error_from_span, gram_chain_success, per_message_error, Factorization,
    SpanRepresentation, PSD_FLOOR,
};
pub use trajectory::{simulate_trajectory, simulate_trajectory_ordered, COLLAPSE_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Gram,
    Fock,
    Cpn,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Gram => "gram",
            Engine::Fock => "fock",
            Engine::Cpn => "cpn",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Engine::Gram),
            "fock" => Ok(Engine::Fock),
            "cpn" => Ok(Engine::Cpn),
            other => Err(Error::InvalidParams(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Message(usize),
    Fail,
}

impl Decision {
    /// Histogram slot: the message index, or `messages` for FAIL.
    pub fn slot(self, messages: usize) -> usize {
        match self {
            Decision::Message(i) => i,
            Decision::Fail => messages,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepOutcome {
    Yes,
    No,
}

/// One decoding run: the sent message, the decision, and every binary test
/// performed as `(hypothesis, answer)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub sent: usize,
    pub decision: Decision,
    pub steps: Vec<(usize, StepOutcome)>,
    pub engine: Engine,
}

impl DecodeOutcome {
    pub(crate) fn new(sent: usize, decision: Decision, steps: Vec<(usize, StepOutcome)>, engine: Engine) -> Self {
        DecodeOutcome {
            sent,
            decision,
            steps,
            engine,
        }
    }

    /// FAIL counts as an error.
    pub fn is_error(&self) -> bool {
        self.decision != Decision::Message(self.sent)
    }
}

/// Drops the half of the messages with the largest exact error, keeping the
/// survivors in their original order.
pub fn expurgate(codebook: &Codebook) -> Result<Codebook> {
    let span = SpanRepresentation::from_gram(&codeword_gram(codebook)?)?;
    let errors = per_message_error(&span)?;
    let mut ranked: Vec<usize> = (0..errors.len()).collect();
    ranked.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)));
    let mut keep = ranked[..errors.len().div_ceil(2)].to_vec();
    keep.sort_unstable();
    codebook.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{generate_codebook, Prior};
    use crate::ensembles::FamilyTag;

    #[test]
    fn engine_names_round_trip() {
        for e in [Engine::Gram, Engine::Fock, Engine::Cpn] {
            assert_eq!(e.as_str().parse::<Engine>().unwrap(), e);
        }
        assert!("dense".parse::<Engine>().is_err());
    }

    #[test]
    fn expurgation_halves_and_keeps_order() {
        let c = generate_codebook(Prior::GaussianIso, FamilyTag::Coherent, 2, 7, 0.5, 3).unwrap();
        let e = expurgate(&c).unwrap();
        assert_eq!(e.messages(), 4);
        let rows: Vec<usize> = (0..e.messages())
            .map(|r| (0..c.messages()).find(|&m| c.symbol(m, 0) == e.symbol(r, 0)).unwrap())
            .collect();
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }
}
