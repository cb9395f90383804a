use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::Rng;

use super::span::check_order;
use super::{Decision, DecodeOutcome, Engine, StepOutcome};
use crate::codec::{codeword_state, Codebook};
use crate::ensembles::{StateFamily, Symbol};
use crate::fockspace::{
    gaussian_unitary, gaussian_unitary_on_sectors, low_sector_cutoff, remove_vacuum, FockCutoff, GaussianUnitary,
    GaussianUnitarySpec, PhotonStatistics, TruncatedState,
};
use crate::{Error, Result, C64};

/// Default cap on the number of amplitudes of the joint receiver state.
pub const AMPLITUDE_BUDGET: usize = 1_000_000;
/// Mass above `d/2` the automatic cutoff aims for.
pub const CUTOFF_TAIL: f64 = 1e-12;
/// Mass above `d/2` tolerated at run time before giving up.
pub const RUNTIME_LEAK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    /// Fixed cutoff; chosen from the codebook when `None`.
    pub cutoff: Option<FockCutoff>,
    pub amplitude_budget: usize,
}

impl Default for FockOptions {
    fn default() -> Self {
        FockOptions {
            cutoff: None,
            amplitude_budget: AMPLITUDE_BUDGET,
        }
    }
}

/// Sequential decoder run on explicit truncated Fock states.
///
/// Test `i` applies the inverse of codeword `i`'s preparation, measures
/// vacuum-or-not, and on "not vacuum" re-applies the preparation to the
/// post-measurement state.
#[derive(Debug, Clone)]
pub struct FockReceiver {
    cutoff: FockCutoff,
    codewords: Vec<TruncatedState>,
    undo: Vec<Vec<GaussianUnitary>>,
    redo: Vec<Vec<GaussianUnitary>>,
}

/// Builds the receiver for the coherent and entanglement-assisted reading
/// families.
pub fn fock_receiver(codebook: &Codebook, options: FockOptions) -> Result<FockReceiver> {
    let cutoff = match options.cutoff {
        Some(c) => c,
        None => auto_cutoff(codebook)?,
    };
    let modes = codebook.blocklength() * codebook.family().modes_per_symbol();
    let required = u32::try_from(modes)
        .ok()
        .and_then(|m| cutoff.levels().checked_pow(m))
        .unwrap_or(usize::MAX);
    if required > options.amplitude_budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: options.amplitude_budget,
        });
    }
    let undo = match *codebook.family() {
        StateFamily::Coherent => coherent_tests(codebook, cutoff)?,
        StateFamily::ReadingIII { ns } => reading_tests(codebook, ns, cutoff)?,
        StateFamily::ReadingII { .. } => return Err(Error::UnsupportedFamily(codebook.family().tag().to_string())),
    };
    let redo = undo
        .iter()
        .map(|ops| ops.iter().rev().map(GaussianUnitary::adjoint).collect())
        .collect();
    let codewords = (0..codebook.messages())
        .map(|m| codeword_state(codebook, m, cutoff))
        .collect::<Result<_>>()?;
    Ok(FockReceiver {
        cutoff,
        codewords,
        undo,
        redo,
    })
}

/// Smallest cutoff whose upper half holds less than [`CUTOFF_TAIL`] of the
/// photon distribution of every state the receiver can produce.
pub fn auto_cutoff(codebook: &Codebook) -> Result<FockCutoff> {
    let messages = codebook.messages();
    let pairs = || (0..messages).flat_map(move |a| (0..messages).map(move |b| (a, b)));
    let stats = match *codebook.family() {
        StateFamily::Coherent => {
            let mut worst = 0.0f64;
            for (a, b) in pairs() {
                for k in 0..codebook.blocklength() {
                    let (x, y) = (amplitude(codebook, a, k), amplitude(codebook, b, k));
                    worst = worst.max((x - y).norm_sqr()).max(x.norm_sqr());
                }
            }
            PhotonStatistics::Poisson { mean: worst }
        }
        StateFamily::ReadingIII { ns } => {
            // S†P(Δ)S|00⟩ is a two-mode squeezed vacuum with mean
            // 4N(N+1) sin²(Δ/2) photons per mode.
            let mut worst = ns;
            for (a, b) in pairs() {
                for k in 0..codebook.blocklength() {
                    let delta = phase(codebook, a, k) - phase(codebook, b, k);
                    worst = worst.max(4.0 * ns * (ns + 1.0) * (delta / 2.0).sin().powi(2));
                }
            }
            PhotonStatistics::Geometric { mean: worst }
        }
        StateFamily::ReadingII { .. } => return Err(Error::UnsupportedFamily(codebook.family().tag().to_string())),
    };
    Ok(low_sector_cutoff(stats, CUTOFF_TAIL))
}

fn amplitude(codebook: &Codebook, m: usize, k: usize) -> C64 {
    match codebook.received_symbol(m, k) {
        Symbol::Amplitude(a) => a,
        Symbol::Phase(_) => unreachable!("coherent codebooks hold amplitudes"),
    }
}

fn phase(codebook: &Codebook, m: usize, k: usize) -> f64 {
    match codebook.received_symbol(m, k) {
        Symbol::Phase(t) => t,
        Symbol::Amplitude(_) => unreachable!("reading codebooks hold phases"),
    }
}

/// `D(−α_{i,k})` on every mode `k`.
fn coherent_tests(codebook: &Codebook, cutoff: FockCutoff) -> Result<Vec<Vec<GaussianUnitary>>> {
    let mut cache: HashMap<[u64; 2], GaussianUnitary> = HashMap::new();
    let mut tests = Vec::with_capacity(codebook.messages());
    for i in 0..codebook.messages() {
        let mut ops = Vec::new();
        for k in 0..codebook.blocklength() {
            let alpha = amplitude(codebook, i, k);
            if alpha == C64::new(0.0, 0.0) {
                continue;
            }
            let key = [alpha.re.to_bits(), alpha.im.to_bits()];
            let op = match cache.entry(key) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(gaussian_unitary(
                    GaussianUnitarySpec::Displace { mode: 0, alpha: -alpha },
                    cutoff,
                )?),
            };
            ops.push(op.on_modes(&[k])?);
        }
        tests.push(ops);
    }
    Ok(tests)
}

/// `S†(r) P_a(−θ_{i,k})` on every signal/idler pair.
fn reading_tests(codebook: &Codebook, ns: f64, cutoff: FockCutoff) -> Result<Vec<Vec<GaussianUnitary>>> {
    let squeeze = GaussianUnitarySpec::Squeeze2 {
        modes: [0, 1],
        r: ns.sqrt().asinh(),
    };
    // Probe states never leave the n_a = n_b sector.
    let unsqueeze = gaussian_unitary_on_sectors(squeeze, cutoff, 0)?.adjoint();
    let mut cache: HashMap<u64, GaussianUnitary> = HashMap::new();
    let mut tests = Vec::with_capacity(codebook.messages());
    for i in 0..codebook.messages() {
        let mut ops = Vec::new();
        for k in 0..codebook.blocklength() {
            let theta = phase(codebook, i, k);
            if theta != 0.0 {
                let key = theta.to_bits();
                let op = match cache.entry(key) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(gaussian_unitary(
                        GaussianUnitarySpec::Phase { mode: 0, theta: -theta },
                        cutoff,
                    )?),
                };
                ops.push(op.on_modes(&[2 * k])?);
            }
            ops.push(unsqueeze.on_modes(&[2 * k, 2 * k + 1])?);
        }
        tests.push(ops);
    }
    Ok(tests)
}

impl FockReceiver {
    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    /// Prepared state of codeword `m`.
    pub fn codeword(&self, m: usize) -> &TruncatedState {
        &self.codewords[m]
    }

    pub fn decode<R: Rng + ?Sized>(&self, sent: usize, rng: &mut R) -> Result<DecodeOutcome> {
        let order: Vec<usize> = (0..self.messages()).collect();
        self.decode_ordered(sent, &order, rng)
    }

    /// One run testing messages in `order`. Draws one uniform per test.
    pub fn decode_ordered<R: Rng + ?Sized>(&self, sent: usize, order: &[usize], rng: &mut R) -> Result<DecodeOutcome> {
        if sent >= self.messages() {
            return Err(Error::IndexOutOfRange {
                index: sent,
                len: self.messages(),
            });
        }
        check_order(order, self.messages())?;
        let top = self.cutoff.low_sector_top();
        let mut state = self.codewords[sent].clone();
        let mut steps = Vec::with_capacity(order.len());
        for &i in order {
            for op in &self.undo[i] {
                op.apply(&mut state)?;
            }
            let leak = state.max_mode_mass_above(top);
            if leak > RUNTIME_LEAK_TOLERANCE {
                return Err(Error::cutoff(
                    self.cutoff.levels(),
                    format!("{leak:.3e} of the population sits above level {top}"),
                ));
            }
            let p_vacuum = state.vacuum_amplitude().norm_sqr().min(1.0);
            if rng.random::<f64>() < p_vacuum {
                steps.push((i, StepOutcome::Yes));
                return Ok(DecodeOutcome::new(sent, Decision::Message(i), steps, Engine::Fock));
            }
            steps.push((i, StepOutcome::No));
            remove_vacuum(&mut state).map_err(|e| match e {
                Error::DegenerateBranch { probability } => Error::NumericalCollapse { norm: probability },
                other => other,
            })?;
            for op in &self.redo[i] {
                op.apply(&mut state)?;
            }
        }
        Ok(DecodeOutcome::new(sent, Decision::Fail, steps, Engine::Fock))
    }
}
