use nalgebra::DMatrix;

use super::cutoff::{FockCutoff, PhotonStatistics, LEAKAGE_TOLERANCE};
use crate::{Error, Result, C64};

/// Pure state on `modes` truncated modes.
///
/// Amplitudes are stored row-major over the product basis
/// `|n_0, n_1, …⟩`, mode 0 being the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    modes: usize,
    cutoff: FockCutoff,
    amplitudes: Vec<C64>,
}

impl TruncatedState {
    pub fn vacuum(modes: usize, cutoff: FockCutoff) -> Result<Self> {
        let dim = product_dimension(modes, cutoff)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(TruncatedState {
            modes,
            cutoff,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalisation.
    pub fn from_amplitudes(modes: usize, cutoff: FockCutoff, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = product_dimension(modes, cutoff)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(TruncatedState {
            modes,
            cutoff,
            amplitudes,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude of the all-modes vacuum, `⟨0…0|ψ⟩`.
    pub fn vacuum_amplitude(&self) -> C64 {
        self.amplitudes[0]
    }

    /// Amplitude of the basis state with the given occupations.
    pub fn amplitude(&self, occupations: &[usize]) -> C64 {
        assert_eq!(occupations.len(), self.modes);
        let d = self.cutoff.levels();
        let index = occupations.iter().fold(0, |acc, &n| {
            assert!(n < d, "occupation {n} beyond cutoff {d}");
            acc * d + n
        });
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidState("cannot normalise the zero vector".into()));
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TruncatedState) -> Result<C64> {
        self.check_same_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|self⟩ ⊗ |other⟩`; both factors must share the cutoff.
    pub fn tensor(&self, other: &TruncatedState) -> Result<TruncatedState> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff.levels(),
                found: other.cutoff.levels(),
            });
        }
        let modes = self.modes + other.modes;
        product_dimension(modes, self.cutoff)?;
        let mut amplitudes = Vec::with_capacity(self.dimension() * other.dimension());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(TruncatedState {
            modes,
            cutoff: self.cutoff,
            amplitudes,
        })
    }

    /// Largest single-mode population on levels above `level`.
    pub fn max_mode_mass_above(&self, level: usize) -> f64 {
        let d = self.cutoff.levels();
        if level + 1 >= d {
            return 0.0;
        }
        (0..self.modes)
            .map(|mode| {
                let inner = self.strides(mode);
                self.amplitudes
                    .chunks(d * inner)
                    .map(|chunk| chunk[(level + 1) * inner..].iter().map(|a| a.norm_sqr()).sum::<f64>())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_same_space(&self, other: &TruncatedState) -> Result<()> {
        if self.modes != other.modes || self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Ok(())
    }

    /// Applies a `d × d` matrix to one mode.
    pub(crate) fn apply_single_mode(&mut self, mode: usize, matrix: &DMatrix<C64>) {
        let d = self.cutoff.levels();
        debug_assert_eq!(matrix.nrows(), d);
        let inner = d.pow((self.modes - 1 - mode) as u32);
        let block = d * inner;
        let mut column = vec![C64::new(0.0, 0.0); d];
        for chunk in self.amplitudes.chunks_mut(block) {
            for offset in 0..inner {
                let mut any = false;
                for (n, slot) in column.iter_mut().enumerate() {
                    *slot = chunk[n * inner + offset];
                    any |= *slot != C64::new(0.0, 0.0);
                }
                if !any {
                    continue;
                }
                for row in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, value) in column.iter().enumerate() {
                        acc += matrix[(row, col)] * value;
                    }
                    chunk[row * inner + offset] = acc;
                }
            }
        }
    }

    /// Multiplies level `n` of one mode by `phases[n]`.
    pub(crate) fn apply_diagonal(&mut self, mode: usize, phases: &[C64]) {
        let d = self.cutoff.levels();
        let inner = self.strides(mode);
        for chunk in self.amplitudes.chunks_mut(d * inner) {
            for (level, run) in chunk.chunks_mut(inner).enumerate() {
                run.iter_mut().for_each(|a| *a *= phases[level]);
            }
        }
    }

    /// Index strides of two modes, for two-mode operators.
    pub(crate) fn strides(&self, mode: usize) -> usize {
        self.cutoff.levels().pow((self.modes - 1 - mode) as u32)
    }

    /// Flat indices with every mode in `modes` at level 0.
    pub(crate) fn bases_excluding(&self, modes: &[usize]) -> Vec<usize> {
        let d = self.cutoff.levels();
        let mut bases = vec![0];
        for m in (0..self.modes).filter(|m| !modes.contains(m)) {
            let stride = self.strides(m);
            bases = bases
                .iter()
                .flat_map(|&b| (0..d).map(move |l| b + l * stride))
                .collect();
        }
        bases
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }
}

fn product_dimension(modes: usize, cutoff: FockCutoff) -> Result<usize> {
    if modes == 0 {
        return Err(Error::InvalidParams("a state needs at least one mode".into()));
    }
    u32::try_from(modes)
        .ok()
        .and_then(|m| cutoff.levels().checked_pow(m))
        .ok_or_else(|| Error::InvalidParams(format!("{} levels over {modes} modes overflows", cutoff.levels())))
}

/// Truncated coherent state `|α⟩`, renormalised within the cutoff.
pub fn coherent_state(alpha: C64, cutoff: FockCutoff) -> Result<TruncatedState> {
    let d = cutoff.levels();
    let tail = PhotonStatistics::Poisson { mean: alpha.norm_sqr() }.tail_from(d);
    if tail > LEAKAGE_TOLERANCE {
        return Err(Error::cutoff(
            d,
            format!(
                "coherent state |α|={:.4} leaks {tail:.3e} beyond the cutoff",
                alpha.norm()
            ),
        ));
    }
    let mut state = TruncatedState {
        modes: 1,
        cutoff,
        amplitudes: coherent_amplitudes(alpha, d),
    };
    state.normalize()?;
    Ok(state)
}

/// Untruncated series `e^{-|α|²/2} α^n / √n!` for `n < d`.
pub(crate) fn coherent_amplitudes(alpha: C64, d: usize) -> Vec<C64> {
    let mut amplitudes = Vec::with_capacity(d);
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..d {
        amplitudes.push(term);
        term *= alpha / ((n + 1) as f64).sqrt();
    }
    amplitudes
}
