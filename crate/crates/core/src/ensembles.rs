//! Capacity formulas and the coherent / Type-II / Type-III state families.
//!
//! All logarithms are base 2.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::fockspace::{coherent_state, thermal_weights, DensityMatrix, FockCutoff, TruncatedState};
use crate::{Error, Result, C64};

/// Entropy of a thermal state with mean photon number `x`:
/// `(x+1) log(x+1) − x log x`, with `g(0) = 0`.
pub fn g_capacity(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    h(p) + h(1.0 - p)
}

/// Capacity of binary phase-shift keying, `H₂((1 + e^{−2 N_S}) / 2)`.
pub fn bpsk_capacity(ns: f64) -> f64 {
    binary_entropy((1.0 + (-2.0 * ns).exp()) / 2.0)
}

/// Pure-loss channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    eta: f64,
    ns: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, ns: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "transmissivity must lie in [0,1], got {eta}"
            )));
        }
        if !(ns.is_finite() && ns >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "mean photon number must be >= 0, got {ns}"
            )));
        }
        Ok(ChannelParams { eta, ns })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn ns(&self) -> f64 {
        self.ns
    }
}

/// Classical capacity `g(η N_S)` of the pure-loss channel.
pub fn holevo_capacity(params: &ChannelParams) -> f64 {
    g_capacity(params.eta * params.ns)
}

/// Private capacity `g(η N_S) − g((1−η) N_S)`.
pub fn private_capacity(params: &ChannelParams) -> f64 {
    g_capacity(params.eta * params.ns) - g_capacity((1.0 - params.eta) * params.ns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    #[serde(rename = "coherent")]
    Coherent,
    #[serde(rename = "reading_II")]
    ReadingII,
    #[serde(rename = "reading_III")]
    ReadingIII,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Coherent => "coherent",
            FamilyTag::ReadingII => "reading_II",
            FamilyTag::ReadingIII => "reading_III",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(FamilyTag::Coherent),
            "reading_II" | "reading_ii" | "reading2" => Ok(FamilyTag::ReadingII),
            "reading_III" | "reading_iii" | "reading3" => Ok(FamilyTag::ReadingIII),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// A state family together with its per-symbol photon budget.
///
/// Coherent states carry their energy in the amplitude symbol; the reading
/// families need the probe's mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    Coherent,
    ReadingII { ns: f64 },
    ReadingIII { ns: f64 },
}

impl StateFamily {
    pub fn new(tag: FamilyTag, ns: f64) -> Result<Self> {
        if !(ns.is_finite() && ns >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "mean photon number must be >= 0, got {ns}"
            )));
        }
        Ok(match tag {
            FamilyTag::Coherent => StateFamily::Coherent,
            FamilyTag::ReadingII => StateFamily::ReadingII { ns },
            FamilyTag::ReadingIII => StateFamily::ReadingIII { ns },
        })
    }

    pub fn tag(&self) -> FamilyTag {
        match self {
            StateFamily::Coherent => FamilyTag::Coherent,
            StateFamily::ReadingII { .. } => FamilyTag::ReadingII,
            StateFamily::ReadingIII { .. } => FamilyTag::ReadingIII,
        }
    }

    /// Modes occupied by one symbol.
    pub fn modes_per_symbol(&self) -> usize {
        match self {
            StateFamily::ReadingIII { .. } => 2,
            _ => 1,
        }
    }

    fn reading_ns(&self) -> Result<f64> {
        match *self {
            StateFamily::ReadingII { ns } | StateFamily::ReadingIII { ns } => Ok(ns),
            StateFamily::Coherent => Err(Error::FamilyMismatch(
                "coherent family has no phase-encoded probe".into(),
            )),
        }
    }
}

/// One modulation symbol: a coherent amplitude or a reading phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    Amplitude(C64),
    Phase(f64),
}

/// Closed-form `⟨φ_a|φ_b⟩` for a single symbol pair.
pub fn analytic_overlap(family: &StateFamily, a: Symbol, b: Symbol) -> Result<C64> {
    match (family, a, b) {
        (StateFamily::Coherent, Symbol::Amplitude(a), Symbol::Amplitude(b)) => {
            Ok((-a.norm_sqr() / 2.0 - b.norm_sqr() / 2.0 + a.conj() * b).exp())
        }
        (StateFamily::ReadingII { ns } | StateFamily::ReadingIII { ns }, Symbol::Phase(ta), Symbol::Phase(tb)) => {
            // Σ_n (N e^{iΔ}/(N+1))^n / (N+1)
            Ok(C64::new(1.0, 0.0) / (C64::new(ns + 1.0, 0.0) - C64::from_polar(*ns, tb - ta)))
        }
        _ => Err(Error::FamilyMismatch(format!(
            "symbols {a:?}, {b:?} do not belong to the {} family",
            family.tag()
        ))),
    }
}

/// Phase-shifted reading probe: `Σ √(N^n/(N+1)^{n+1}) e^{inθ}` on `|n⟩`
/// (Type II) or on `|n⟩|n⟩` (Type III), renormalised within the cutoff.
pub fn reading_state(family: &StateFamily, theta: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    let ns = family.reading_ns()?;
    let weights = thermal_weights(ns, cutoff)?;
    let d = cutoff.levels();
    let amp = |n: usize| C64::from_polar(weights[n].sqrt(), n as f64 * theta);
    match family {
        StateFamily::ReadingII { .. } => TruncatedState::from_amplitudes(1, cutoff, (0..d).map(amp).collect()),
        _ => {
            let mut amplitudes = vec![C64::new(0.0, 0.0); d * d];
            for n in 0..d {
                amplitudes[n * d + n] = amp(n);
            }
            TruncatedState::from_amplitudes(2, cutoff, amplitudes)
        }
    }
}

/// State of one symbol within its family.
pub fn symbol_state(family: &StateFamily, symbol: Symbol, cutoff: FockCutoff) -> Result<TruncatedState> {
    match (family, symbol) {
        (StateFamily::Coherent, Symbol::Amplitude(alpha)) => coherent_state(alpha, cutoff),
        (StateFamily::ReadingII { .. } | StateFamily::ReadingIII { .. }, Symbol::Phase(theta)) => {
            reading_state(family, theta, cutoff)
        }
        _ => Err(Error::FamilyMismatch(format!(
            "symbol {symbol:?} does not belong to the {} family",
            family.tag()
        ))),
    }
}

/// Uniform mixture of the reading probe over `phases` equally spaced angles
/// `2πk/K`. For `K >= d` the result is exactly diagonal.
pub fn phase_average(family: &StateFamily, phases: usize, cutoff: FockCutoff) -> Result<DensityMatrix> {
    if phases == 0 {
        return Err(Error::InvalidParams("need at least one phase sample".into()));
    }
    family.reading_ns()?;
    let modes = family.modes_per_symbol();
    let dim = cutoff.levels().pow(modes as u32);
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..phases {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / phases as f64;
        let state = reading_state(family, theta, cutoff)?;
        let v = DVector::from_column_slice(state.amplitudes());
        acc += &v * v.adjoint();
    }
    acc /= C64::new(phases as f64, 0.0);
    DensityMatrix::new(modes, cutoff, acc)
}
