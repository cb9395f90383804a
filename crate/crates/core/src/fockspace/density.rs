use nalgebra::DMatrix;

use super::cutoff::{FockCutoff, PhotonStatistics, LEAKAGE_TOLERANCE};
use super::state::TruncatedState;
use crate::{Error, Result, C64};

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are treated as zero.
pub const EIGEN_CLIP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    modes: usize,
    cutoff: FockCutoff,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(modes: usize, cutoff: FockCutoff, entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_parts(modes, cutoff, entries)?;
        let trace = rho.trace();
        if (trace - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let min = hermitian_eigenvalues(&rho.entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -EIGEN_CLIP {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: min });
        }
        Ok(rho)
    }

    /// A `dim`-level system without Fock structure (single "mode").
    pub fn qudit(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        Self::new(1, FockCutoff::new(dim)?, entries)
    }

    /// Checks shape and Hermiticity only; for operators known to be states
    /// by construction.
    pub(crate) fn from_parts(modes: usize, cutoff: FockCutoff, entries: DMatrix<C64>) -> Result<Self> {
        let dim = cutoff.levels().pow(modes as u32);
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: entries.nrows(),
            });
        }
        let defect = hermitian_defect(&entries);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        Ok(DensityMatrix { modes, cutoff, entries })
    }

    pub fn from_pure(state: &TruncatedState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityMatrix {
            modes: state.modes(),
            cutoff: state.cutoff(),
            entries: &v * v.adjoint(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Eigenvalues with the small-negative clipping rule applied.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.entries)
            .into_iter()
            .map(|l| {
                if l >= 0.0 {
                    Ok(l)
                } else if l >= -EIGEN_CLIP {
                    Ok(0.0)
                } else {
                    Err(Error::NotPositiveSemidefinite { eigenvalue: l })
                }
            })
            .collect()
    }
}

/// Thermal state with mean photon number `ns`, renormalised within the cutoff.
pub fn thermal_state(ns: f64, cutoff: FockCutoff) -> Result<DensityMatrix> {
    let weights = thermal_weights(ns, cutoff)?;
    let diagonal = nalgebra::DVector::from_iterator(weights.len(), weights.iter().map(|&p| C64::new(p, 0.0)));
    Ok(DensityMatrix {
        modes: 1,
        cutoff,
        entries: DMatrix::from_diagonal(&diagonal),
    })
}

/// Renormalised `ns^n / (ns+1)^{n+1}` for `n < d`.
pub(crate) fn thermal_weights(ns: f64, cutoff: FockCutoff) -> Result<Vec<f64>> {
    if !(ns.is_finite() && ns >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "mean photon number must be >= 0, got {ns}"
        )));
    }
    let d = cutoff.levels();
    let tail = PhotonStatistics::Geometric { mean: ns }.tail_from(d);
    if tail > LEAKAGE_TOLERANCE {
        return Err(Error::cutoff(d, format!("thermal tail {tail:.3e} beyond the cutoff")));
    }
    let ratio = ns / (ns + 1.0);
    let mut weights: Vec<f64> = (0..d).map(|n| ratio.powi(n as i32) / (ns + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .spectrum()?
        .into_iter()
        .filter(|&l| l >= 1e-15)
        .map(|l| -l * l.log2())
        .sum())
}

/// `‖ρ − σ‖₁`, the sum of absolute eigenvalues of `ρ − σ` (range `[0, 2]`).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dimension() != sigma.dimension() {
        return Err(Error::DimensionMismatch {
            expected: rho.dimension(),
            found: sigma.dimension(),
        });
    }
    trace_norm(&(rho.entries() - sigma.entries()))
}

/// Trace norm of a Hermitian matrix.
pub(crate) fn trace_norm(m: &DMatrix<C64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(hermitian_eigenvalues(m).into_iter().map(f64::abs).sum())
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues().iter().copied().collect()
}

pub(crate) fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
