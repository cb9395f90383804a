//! Numerical checks of the operator inequalities behind the achievability
//! argument: trace-distance substitution, the gentle operator lemma, the
//! non-commutative union bound, typical-set properties, and the overall
//! error bound.

mod sampling;
mod typical;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::fockspace::{hermitian_defect, hermitian_eigenvalues, trace_distance, trace_norm, DensityMatrix};
use crate::{Error, Result, C64};

pub use sampling::{
    gentle_suite, random_density, random_effect, random_projector, random_unitary, sen_suite, trace_suite,
    typicality_suite, SuiteReport,
};
pub use typical::{typicality_report, TypicalityParams, TypicalityReport, TYPE_CLASS_LIMIT};

/// Negative slack tolerated before a bound counts as violated.
pub const SLACK_TOLERANCE: f64 = 1e-9;
/// Tolerance for `0 ≤ Λ ≤ I`, projector idempotence and Hermiticity.
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        BoundReport {
            lhs,
            rhs,
            slack,
            satisfied: slack >= -SLACK_TOLERANCE,
        }
    }
}

fn check_effect(op: &DMatrix<C64>, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    let defect = hermitian_defect(op);
    if defect > OPERATOR_TOLERANCE {
        return Err(Error::InvalidOperator(format!("not Hermitian (defect {defect:e})")));
    }
    for l in hermitian_eigenvalues(op) {
        if !(-OPERATOR_TOLERANCE..=1.0 + OPERATOR_TOLERANCE).contains(&l) {
            return Err(Error::InvalidOperator(format!("eigenvalue {l} outside [0, 1]")));
        }
    }
    Ok(())
}

fn check_projector(op: &DMatrix<C64>, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    let defect = hermitian_defect(op).max((op * op - op).iter().map(|z| z.norm()).fold(0.0, f64::max));
    if defect > OPERATOR_TOLERANCE {
        return Err(Error::NotAProjector { defect });
    }
    Ok(())
}

fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    // Tr(AB) without forming the product.
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum::<C64>().re
}

/// Principal square root of a positive semidefinite Hermitian operator.
fn psd_sqrt(op: &DMatrix<C64>) -> DMatrix<C64> {
    let sym = (op + op.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l.max(0.0).sqrt());
    }
    scaled * eig.eigenvectors.adjoint()
}

/// `Tr[Λρ] ≤ Tr[Λσ] + ‖ρ − σ‖₁`.
pub fn trace_lemma_gap(rho: &DensityMatrix, sigma: &DensityMatrix, effect: &DMatrix<C64>) -> Result<BoundReport> {
    check_effect(effect, rho.dimension())?;
    let distance = trace_distance(rho, sigma)?;
    Ok(BoundReport::new(
        trace_product(effect, rho.entries()),
        trace_product(effect, sigma.entries()) + distance,
    ))
}

/// `Σ_x p_x ‖√Λ ρ_x √Λ − ρ_x‖₁ ≤ 2√ε` with `ε = 1 − Tr{Λ ρ̄}`.
pub fn gentle_operator_gap(ensemble: &[(f64, DensityMatrix)], effect: &DMatrix<C64>) -> Result<BoundReport> {
    let dim = ensemble
        .first()
        .ok_or_else(|| Error::InvalidParams("empty ensemble".into()))?
        .1
        .dimension();
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, _)| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "ensemble weights must be a distribution, sum {total}"
        )));
    }
    if let Some((_, bad)) = ensemble.iter().find(|(_, r)| r.dimension() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dimension(),
        });
    }
    check_effect(effect, dim)?;
    let root = psd_sqrt(effect);
    let mut lhs = 0.0;
    let mut accepted = 0.0;
    for (p, rho) in ensemble {
        let disturbed = &root * rho.entries() * &root;
        lhs += p * trace_norm(&(disturbed - rho.entries()))?;
        accepted += p * trace_product(effect, rho.entries());
    }
    let epsilon = (1.0 - accepted).max(0.0);
    Ok(BoundReport::new(lhs, 2.0 * epsilon.sqrt()))
}

/// `Tr σ − Tr{Π_N⋯Π_1 σ Π_1⋯Π_N} ≤ 2√(Σ_i Tr{(I − Π_i)σ})`, with
/// `projectors[0]` playing `Π_1` (applied first).
pub fn sen_bound_gap(sigma: &DMatrix<C64>, projectors: &[DMatrix<C64>]) -> Result<BoundReport> {
    let dim = sigma.nrows();
    if !sigma.is_square() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sigma.ncols(),
        });
    }
    let defect = hermitian_defect(sigma);
    if defect > OPERATOR_TOLERANCE {
        return Err(Error::InvalidState(format!("σ not Hermitian (defect {defect:e})")));
    }
    let trace = sigma.trace().re;
    let min = hermitian_eigenvalues(sigma).into_iter().fold(f64::INFINITY, f64::min);
    if min < -OPERATOR_TOLERANCE || trace > 1.0 + OPERATOR_TOLERANCE {
        return Err(Error::InvalidState(format!(
            "σ must be positive with trace at most 1 (min eigenvalue {min:e}, trace {trace})"
        )));
    }
    let mut chain = DMatrix::<C64>::identity(dim, dim);
    let mut missed = 0.0;
    for pi in projectors {
        check_projector(pi, dim)?;
        chain = pi * chain;
        missed += (trace - trace_product(pi, sigma)).max(0.0);
    }
    let kept = (&chain * sigma * chain.adjoint()).trace().re;
    Ok(BoundReport::new(trace - kept, 2.0 * missed.sqrt()))
}

/// `ε + 2√ε + 2√(2√ε + 2^{log₂M − n(H−δ)})`, with the codebook term formed
/// in the exponent.
pub fn epsilon_prime(epsilon: f64, n: usize, entropy_bits: f64, delta: f64, log2_messages: f64) -> f64 {
    let root = epsilon.sqrt();
    let codebook_term = (log2_messages - n as f64 * (entropy_bits - delta)).exp2();
    epsilon + 2.0 * root + 2.0 * (2.0 * root + codebook_term).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn projector(v: &[C64]) -> DMatrix<C64> {
        let v = nalgebra::DVector::from_column_slice(v);
        let v = &v / C64::new(v.norm(), 0.0);
        &v * v.adjoint()
    }

    fn qubit(p0: f64) -> DensityMatrix {
        DensityMatrix::qudit(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(p0),
            c(1.0 - p0),
        ])))
        .unwrap()
    }

    #[test]
    fn trace_lemma_orthogonal_pure_states() {
        let rho = qubit(1.0);
        let sigma = qubit(0.0);
        let r = trace_lemma_gap(&rho, &sigma, rho.entries()).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.slack, 1.0, epsilon = 1e-12);
        let zero = trace_lemma_gap(&rho, &sigma, &DMatrix::zeros(2, 2)).unwrap();
        assert!(zero.satisfied && zero.lhs == 0.0);
    }

    #[test]
    fn trace_lemma_rejects_non_effects() {
        let rho = qubit(0.5);
        let big = DMatrix::from_diagonal_element(2, 2, c(1.5));
        assert!(matches!(
            trace_lemma_gap(&rho, &rho, &big),
            Err(Error::InvalidOperator(_))
        ));
    }

    #[test]
    fn gentle_identity_is_undisturbing() {
        let ensemble = vec![(0.5, qubit(0.2)), (0.5, qubit(0.9))];
        let r = gentle_operator_gap(&ensemble, &DMatrix::identity(2, 2)).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gentle_support_projector_is_undisturbing() {
        let rho = DensityMatrix::qudit(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.3),
            c(0.7),
            c(0.0),
        ])))
        .unwrap();
        let support = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]));
        let r = gentle_operator_gap(&[(1.0, rho)], &support).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sen_single_projector_onto_pure_state() {
        let v = [c(0.6), C64::new(0.0, 0.8)];
        let sigma = projector(&v);
        let r = sen_bound_gap(&sigma, std::slice::from_ref(&sigma)).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 0.0, epsilon = 1e-5);
    }

    #[test]
    fn sen_identities_lose_nothing() {
        let sigma = DMatrix::from_diagonal_element(3, 3, c(0.2));
        let r = sen_bound_gap(&sigma, &vec![DMatrix::identity(3, 3); 4]).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sen_respects_list_order() {
        // σ = |0⟩⟨0|, Π_1 = |+⟩⟨+|, Π_2 = |0⟩⟨0|: Π_2 Π_1 keeps 1/4.
        let sigma = projector(&[c(1.0), c(0.0)]);
        let plus = projector(&[c(1.0), c(1.0)]);
        let r = sen_bound_gap(&sigma, &[plus.clone(), sigma.clone()]).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.75, epsilon = 1e-12);
        let r = sen_bound_gap(&sigma, &[sigma.clone(), plus]).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sen_rejects_non_projectors() {
        let sigma = projector(&[c(1.0), c(0.0)]);
        let half = DMatrix::from_diagonal_element(2, 2, c(0.5));
        assert!(matches!(
            sen_bound_gap(&sigma, &[half]),
            Err(Error::NotAProjector { .. })
        ));
    }

    #[test]
    fn epsilon_prime_examples() {
        assert_abs_diff_eq!(epsilon_prime(0.0, 1000, 1.0, 0.1, 0.0), 0.0, epsilon = 1e-12);
        let e = epsilon_prime(0.01, 10_000, 1.0, 0.1, 0.0);
        assert_abs_diff_eq!(e, 0.01 + 0.2 + 2.0 * 0.2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(e, 1.104_427, epsilon = 1e-6);
    }

    #[test]
    fn epsilon_prime_codebook_term_at_rate_h_minus_two_delta() {
        let (h, delta) = (0.8, 0.05);
        let term = |n: usize| {
            let log2_m = n as f64 * (h - 2.0 * delta);
            let e = epsilon_prime(0.0, n, h, delta, log2_m);
            (e / 2.0).powi(2)
        };
        for n in [10, 100, 1000] {
            assert_abs_diff_eq!(term(n), (-(n as f64) * delta).exp2(), epsilon = 1e-12);
        }
    }
}
