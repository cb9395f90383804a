use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest tail mass a state may lose to truncation.
pub const LEAKAGE_TOLERANCE: f64 = 1e-9;

/// Per-mode Fock basis size: levels `0..d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidParams(format!(
                "Fock cutoff must be at least 2, got {levels}"
            )));
        }
        Ok(FockCutoff(levels))
    }

    pub fn levels(self) -> usize {
        self.0
    }

    /// Highest level of the low-occupation sector on which truncated
    /// operators are required to act unitarily.
    pub fn low_sector_top(self) -> usize {
        self.0 / 2
    }
}

impl TryFrom<usize> for FockCutoff {
    type Error = Error;

    fn try_from(levels: usize) -> Result<Self> {
        FockCutoff::new(levels)
    }
}

impl From<FockCutoff> for usize {
    fn from(c: FockCutoff) -> usize {
        c.0
    }
}

/// Photon-number distribution of a single mode, used to size cutoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonStatistics {
    /// Coherent state with the given mean photon number `|α|²`.
    Poisson { mean: f64 },
    /// Thermal state, or either half of a two-mode squeezed vacuum.
    Geometric { mean: f64 },
}

impl PhotonStatistics {
    /// Probability mass on levels `>= levels`.
    pub fn tail_from(self, levels: usize) -> f64 {
        match self {
            PhotonStatistics::Poisson { mean } => poisson_tail(mean, levels),
            PhotonStatistics::Geometric { mean } => geometric_tail(mean, levels),
        }
    }
}

/// The cutoff selection rule: the smallest `d >= 2` whose tail mass beyond
/// level `d - 1` is below `tolerance`.
pub fn leakage_cutoff(stats: PhotonStatistics, tolerance: f64) -> FockCutoff {
    let mut d = 2;
    while stats.tail_from(d) >= tolerance {
        d += 1;
    }
    FockCutoff(d)
}

/// Smallest cutoff whose low-occupation sector (levels `<= d/2`) already
/// holds all but `tolerance` of the mass.
pub fn low_sector_cutoff(stats: PhotonStatistics, tolerance: f64) -> FockCutoff {
    let inner = leakage_cutoff(stats, tolerance).levels();
    // levels >= inner carry < tolerance; need d/2 >= inner - 1.
    FockCutoff(2 * inner.saturating_sub(1)).max(FockCutoff(2))
}

fn poisson_tail(mean: f64, levels: usize) -> f64 {
    if mean <= 0.0 {
        return if levels == 0 { 1.0 } else { 0.0 };
    }
    let ln_mean = mean.ln();
    let mut ln_fact = 0.0;
    for k in 1..=levels {
        ln_fact += (k as f64).ln();
    }
    let mut tail = 0.0;
    let mut k = levels;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_fact).exp();
        tail += term;
        if k as f64 > mean && term < 1e-300_f64.max(tail * 1e-18) {
            break;
        }
        k += 1;
        ln_fact += (k as f64).ln();
    }
    tail
}

fn geometric_tail(mean: f64, levels: usize) -> f64 {
    if mean <= 0.0 {
        return if levels == 0 { 1.0 } else { 0.0 };
    }
    (mean / (mean + 1.0)).powi(levels as i32)
}
