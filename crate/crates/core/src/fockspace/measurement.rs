use rand::Rng;

use super::state::TruncatedState;
use crate::{Error, Result, C64};

/// Below this not-vacuum probability the renormalised branch is undefined.
pub const DEGENERATE_BRANCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Vacuum,
    NotVacuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub branch: Branch,
    pub probability: f64,
    pub post_state: TruncatedState,
}

/// The non-demolition measurement `{|0⟩⟨0|^⊗n, I − |0⟩⟨0|^⊗n}` on one state.
///
/// Branches are built on request so that a near-vacuum input can still be
/// sampled without touching the undefined not-vacuum branch.
#[derive(Debug, Clone)]
pub struct VacuumOrNot<'a> {
    state: &'a TruncatedState,
    overlap: C64,
}

pub fn vacuum_or_not(state: &TruncatedState) -> Result<VacuumOrNot<'_>> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("state norm² {norm} is not 1")));
    }
    Ok(VacuumOrNot {
        state,
        overlap: state.vacuum_amplitude(),
    })
}

impl VacuumOrNot<'_> {
    /// `c = ⟨0^⊗n|ψ⟩`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn vacuum_probability(&self) -> f64 {
        self.overlap.norm_sqr().min(1.0)
    }

    pub fn vacuum_branch(&self) -> MeasurementOutcome {
        MeasurementOutcome {
            branch: Branch::Vacuum,
            probability: self.vacuum_probability(),
            post_state: TruncatedState::vacuum(self.state.modes(), self.state.cutoff())
                .expect("shape already validated"),
        }
    }

    /// `(|ψ⟩ − c|0…0⟩) / √(1 − |c|²)`.
    pub fn not_vacuum_branch(&self) -> Result<MeasurementOutcome> {
        let mut post = self.state.clone();
        let probability = remove_vacuum(&mut post)?;
        Ok(MeasurementOutcome {
            branch: Branch::NotVacuum,
            probability,
            post_state: post,
        })
    }

    pub fn outcomes(&self) -> Result<(MeasurementOutcome, MeasurementOutcome)> {
        Ok((self.vacuum_branch(), self.not_vacuum_branch()?))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MeasurementOutcome> {
        if rng.random::<f64>() < self.vacuum_probability() {
            Ok(self.vacuum_branch())
        } else {
            self.not_vacuum_branch()
        }
    }
}

/// Projects out the vacuum in place and renormalises; returns the
/// not-vacuum probability.
pub(crate) fn remove_vacuum(state: &mut TruncatedState) -> Result<f64> {
    let c = state.vacuum_amplitude();
    let probability = 1.0 - c.norm_sqr();
    if probability < DEGENERATE_BRANCH {
        return Err(Error::DegenerateBranch { probability });
    }
    state.amplitudes_mut()[0] = C64::new(0.0, 0.0);
    state.normalize()?;
    Ok(probability)
}
