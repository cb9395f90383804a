//! Random codebooks, the pure-loss channel, and codeword Gram matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensembles::{analytic_overlap, symbol_state, FamilyTag, StateFamily, Symbol};
use crate::fockspace::{FockCutoff, TruncatedState};
use crate::rng::{self, Purpose, RNG_ID};
use crate::{Error, Result, C64};

/// Name of the Gaussian sampler used for `gaussian_iso` codebooks.
pub const GAUSSIAN_METHOD: &str = "ziggurat-standard-normal";

/// Symbol prior of a random codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    /// Circularly symmetric complex Gaussian with `E|α|² = N_S`.
    GaussianIso,
    /// `±√N_S` with equal probability.
    BpskAmp,
    /// Phase uniform on `[0, 2π)`.
    UniformPhase,
    /// Phase `0` or `π` with equal probability.
    BpskPhase,
    /// Deterministic pulse-position patterns, amplitude `√N_S` in slot `m`.
    Ppm,
}

impl Prior {
    pub fn as_str(self) -> &'static str {
        match self {
            Prior::GaussianIso => "gaussian_iso",
            Prior::BpskAmp => "bpsk_amp",
            Prior::UniformPhase => "uniform_phase",
            Prior::BpskPhase => "bpsk_phase",
            Prior::Ppm => "ppm",
        }
    }

    fn supports(self, family: FamilyTag) -> bool {
        match self {
            Prior::GaussianIso | Prior::BpskAmp | Prior::Ppm => family == FamilyTag::Coherent,
            Prior::UniformPhase | Prior::BpskPhase => family != FamilyTag::Coherent,
        }
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Prior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_iso" => Ok(Prior::GaussianIso),
            "bpsk_amp" => Ok(Prior::BpskAmp),
            "uniform_phase" => Ok(Prior::UniformPhase),
            "bpsk_phase" => Ok(Prior::BpskPhase),
            "ppm" => Ok(Prior::Ppm),
            other => Err(Error::InvalidParams(format!("unknown prior `{other}`"))),
        }
    }
}

/// `M` codewords of `n` symbols each, plus the metadata needed to
/// regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    family: StateFamily,
    prior: Prior,
    n: usize,
    messages: usize,
    ns: f64,
    seed: u64,
    rng_id: String,
    /// Transmissivity of the channel the codewords went through.
    eta: f64,
    /// Row-major `messages × n`, as transmitted.
    symbols: Vec<Symbol>,
}

impl Codebook {
    /// Assembles a codebook from explicit symbols (row-major, `M × n`).
    pub fn from_symbols(family: StateFamily, prior: Prior, n: usize, ns: f64, symbols: Vec<Symbol>) -> Result<Self> {
        if n == 0 || symbols.is_empty() || !symbols.len().is_multiple_of(n) {
            return Err(Error::InvalidParams(format!(
                "{} symbols do not form whole codewords of length {n}",
                symbols.len()
            )));
        }
        for &s in &symbols {
            validate_symbol(&family, s)?;
        }
        Ok(Codebook {
            family,
            prior,
            n,
            messages: symbols.len() / n,
            ns,
            seed: 0,
            rng_id: "explicit".into(),
            eta: 1.0,
            symbols,
        })
    }

    pub fn family(&self) -> &StateFamily {
        &self.family
    }

    pub fn prior(&self) -> Prior {
        self.prior
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn ns(&self) -> f64 {
        self.ns
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng_id(&self) -> &str {
        &self.rng_id
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `log₂(M) / n` bits per channel use.
    pub fn rate_bits(&self) -> f64 {
        (self.messages as f64).log2() / self.n as f64
    }

    /// Transmitted symbol `k` of codeword `m`.
    pub fn symbol(&self, m: usize, k: usize) -> Symbol {
        self.symbols[m * self.n + k]
    }

    /// Symbol as seen by the receiver: amplitudes scaled by `√η`.
    pub fn received_symbol(&self, m: usize, k: usize) -> Symbol {
        match self.symbol(m, k) {
            Symbol::Amplitude(a) => Symbol::Amplitude(a * self.eta.sqrt()),
            phase => phase,
        }
    }

    pub fn codeword(&self, m: usize) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.n).map(move |k| self.received_symbol(m, k))
    }

    /// Keeps only the listed messages, in the given order.
    pub fn select(&self, keep: &[usize]) -> Result<Codebook> {
        if keep.is_empty() {
            return Err(Error::InvalidParams("cannot keep zero codewords".into()));
        }
        let mut symbols = Vec::with_capacity(keep.len() * self.n);
        for &m in keep {
            if m >= self.messages {
                return Err(Error::IndexOutOfRange {
                    index: m,
                    len: self.messages,
                });
            }
            symbols.extend_from_slice(&self.symbols[m * self.n..(m + 1) * self.n]);
        }
        Ok(Codebook {
            messages: keep.len(),
            symbols,
            rng_id: self.rng_id.clone(),
            ..*self
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CodebookJson::from(self)).expect("codebook serialises")
    }

    pub fn from_json(text: &str) -> Result<Codebook> {
        let raw: CodebookJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("codebook JSON: {e}")))?;
        raw.try_into()
    }
}

fn validate_symbol(family: &StateFamily, s: Symbol) -> Result<()> {
    match (family, s) {
        (StateFamily::Coherent, Symbol::Amplitude(a)) if a.re.is_finite() && a.im.is_finite() => Ok(()),
        (StateFamily::ReadingII { .. } | StateFamily::ReadingIII { .. }, Symbol::Phase(t))
            if (0.0..std::f64::consts::TAU).contains(&t) =>
        {
            Ok(())
        }
        _ => Err(Error::InvalidParams(format!(
            "symbol {s:?} is not valid for the {} family",
            family.tag()
        ))),
    }
}

/// Draws a codebook i.i.d. from `prior` (or lays out PPM patterns).
///
/// `ns` is the mean photon number per symbol. PPM requires `n == messages`.
pub fn generate_codebook(
    prior: Prior,
    family: FamilyTag,
    n: usize,
    messages: usize,
    ns: f64,
    seed: u64,
) -> Result<Codebook> {
    if n == 0 || messages == 0 {
        return Err(Error::InvalidParams(format!(
            "need n >= 1 and M >= 1, got n={n}, M={messages}"
        )));
    }
    if !(ns.is_finite() && ns >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "mean photon number must be >= 0, got {ns}"
        )));
    }
    if !prior.supports(family) {
        return Err(Error::InvalidParams(format!(
            "prior {prior} cannot modulate the {family} family"
        )));
    }
    if prior == Prior::Ppm && n != messages {
        return Err(Error::InvalidParams(format!(
            "PPM needs n == M, got n={n}, M={messages}"
        )));
    }
    let family_state = StateFamily::new(family, ns)?;
    let mut rng = rng::stream(seed, Purpose::Codebook, 0);
    let amp = ns.sqrt();
    let symbols = (0..messages * n)
        .map(|i| match prior {
            Prior::GaussianIso => {
                let scale = (ns / 2.0).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Symbol::Amplitude(C64::new(scale * re, scale * im))
            }
            Prior::BpskAmp => Symbol::Amplitude(C64::new(if rng.random::<bool>() { amp } else { -amp }, 0.0)),
            Prior::UniformPhase => Symbol::Phase(rng.random_range(0.0..std::f64::consts::TAU)),
            Prior::BpskPhase => Symbol::Phase(if rng.random::<bool>() {
                0.0
            } else {
                std::f64::consts::PI
            }),
            Prior::Ppm => {
                let (m, k) = (i / n, i % n);
                Symbol::Amplitude(C64::new(if m == k { amp } else { 0.0 }, 0.0))
            }
        })
        .collect();
    Ok(Codebook {
        family: family_state,
        prior,
        n,
        messages,
        ns,
        seed,
        rng_id: RNG_ID.to_string(),
        eta: 1.0,
        symbols,
    })
}

/// Sends every codeword through the pure-loss channel of transmissivity
/// `eta`: `α → √η α`. Losses compose multiplicatively.
pub fn apply_loss(codebook: &Codebook, eta: f64) -> Result<Codebook> {
    if codebook.family != StateFamily::Coherent {
        return Err(Error::UnsupportedFamily(codebook.family.tag().to_string()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParams(format!(
            "transmissivity must lie in [0,1], got {eta}"
        )));
    }
    Ok(Codebook {
        eta: codebook.eta * eta,
        rng_id: codebook.rng_id.clone(),
        symbols: codebook.symbols.clone(),
        ..*codebook
    })
}

/// Hermitian, unit-diagonal matrix of codeword inner products
/// `G[i][j] = ⟨ψ_i|ψ_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<C64>);

/// Hermiticity and unit-diagonal tolerance for Gram matrices.
pub const GRAM_TOLERANCE: f64 = 1e-12;

impl GramMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = crate::fockspace::hermitian_defect(&matrix);
        if defect > GRAM_TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "Gram matrix not Hermitian (defect {defect:e})"
            )));
        }
        if let Some(i) = (0..matrix.nrows()).find(|&i| (matrix[(i, i)] - C64::new(1.0, 0.0)).norm() > GRAM_TOLERANCE) {
            return Err(Error::InvalidParams(format!(
                "Gram diagonal entry {i} is {}",
                matrix[(i, i)]
            )));
        }
        Ok(GramMatrix(matrix))
    }

    pub fn identity(messages: usize) -> Self {
        GramMatrix(DMatrix::identity(messages, messages))
    }

    /// Gram matrix of explicitly constructed, normalised states.
    pub fn from_states(states: &[TruncatedState]) -> Result<Self> {
        let m = states.len();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = states[i].inner(&states[j])?;
            }
        }
        let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
        GramMatrix::new(g)
    }

    pub fn messages(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }
}

/// Product of per-symbol closed-form overlaps.
pub fn codeword_gram(codebook: &Codebook) -> Result<GramMatrix> {
    let m = codebook.messages;
    let mut g = DMatrix::<C64>::identity(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let mut z = C64::new(1.0, 0.0);
            for k in 0..codebook.n {
                z *= analytic_overlap(
                    &codebook.family,
                    codebook.received_symbol(i, k),
                    codebook.received_symbol(j, k),
                )?;
            }
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    GramMatrix::new(g)
}

/// Explicit product state of codeword `m` (received symbols), one block of
/// `modes_per_symbol` modes per symbol.
pub fn codeword_state(codebook: &Codebook, m: usize, cutoff: FockCutoff) -> Result<TruncatedState> {
    if m >= codebook.messages {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: codebook.messages,
        });
    }
    let mut symbols = codebook.codeword(m);
    let first = symbol_state(&codebook.family, symbols.next().expect("n >= 1"), cutoff)?;
    symbols.try_fold(first, |acc, s| acc.tensor(&symbol_state(&codebook.family, s, cutoff)?))
}

#[derive(Serialize, Deserialize)]
struct CodebookJson {
    family: FamilyTag,
    prior: Prior,
    n: usize,
    #[serde(rename = "M")]
    messages: usize,
    ns: f64,
    seed: u64,
    rng_id: String,
    #[serde(default = "unit_eta")]
    eta: f64,
    symbols: SymbolsJson,
}

fn unit_eta() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SymbolsJson {
    Amplitudes(Vec<Vec<[f64; 2]>>),
    Phases(Vec<Vec<f64>>),
}

impl From<&Codebook> for CodebookJson {
    fn from(c: &Codebook) -> Self {
        let rows = 0..c.messages;
        let symbols = match c.family {
            StateFamily::Coherent => SymbolsJson::Amplitudes(
                rows.map(|m| {
                    (0..c.n)
                        .map(|k| match c.symbol(m, k) {
                            Symbol::Amplitude(a) => [a.re, a.im],
                            Symbol::Phase(_) => unreachable!("validated on construction"),
                        })
                        .collect()
                })
                .collect(),
            ),
            _ => SymbolsJson::Phases(
                rows.map(|m| {
                    (0..c.n)
                        .map(|k| match c.symbol(m, k) {
                            Symbol::Phase(t) => t,
                            Symbol::Amplitude(_) => unreachable!("validated on construction"),
                        })
                        .collect()
                })
                .collect(),
            ),
        };
        CodebookJson {
            family: c.family.tag(),
            prior: c.prior,
            n: c.n,
            messages: c.messages,
            ns: c.ns,
            seed: c.seed,
            rng_id: c.rng_id.clone(),
            eta: c.eta,
            symbols,
        }
    }
}

impl TryFrom<CodebookJson> for Codebook {
    type Error = Error;

    fn try_from(raw: CodebookJson) -> Result<Codebook> {
        let family = StateFamily::new(raw.family, raw.ns)?;
        let symbols: Vec<Symbol> = match raw.symbols {
            SymbolsJson::Amplitudes(rows) => rows
                .into_iter()
                .flatten()
                .map(|[re, im]| Symbol::Amplitude(C64::new(re, im)))
                .collect(),
            SymbolsJson::Phases(rows) => rows.into_iter().flatten().map(Symbol::Phase).collect(),
        };
        if symbols.len() != raw.n * raw.messages {
            return Err(Error::InvalidParams(format!(
                "expected {}×{} symbols, found {}",
                raw.messages,
                raw.n,
                symbols.len()
            )));
        }
        if !(0.0..=1.0).contains(&raw.eta) {
            return Err(Error::InvalidParams(format!(
                "transmissivity must lie in [0,1], got {}",
                raw.eta
            )));
        }
        let mut book = Codebook::from_symbols(family, raw.prior, raw.n, raw.ns, symbols)?;
        book.seed = raw.seed;
        book.rng_id = raw.rng_id;
        book.eta = raw.eta;
        Ok(book)
    }
}
