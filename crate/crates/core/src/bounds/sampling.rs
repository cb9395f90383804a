use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::typical::{typicality_report, TypicalityParams};
use super::{gentle_operator_gap, sen_bound_gap, trace_lemma_gap, BoundReport};
use crate::fockspace::DensityMatrix;
use crate::rng::{stream, Purpose};
use crate::{Result, C64};

/// Tally of a randomised bound check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub samples: u64,
    pub violations: u64,
    /// Smallest slack seen; negative beyond tolerance means a violation.
    pub min_slack: f64,
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with phase-fixed `R`).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    q
}

/// Full-rank Hilbert–Schmidt random density matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = ginibre(dim, dim, rng);
    let rho = &g * g.adjoint();
    let trace = rho.trace();
    let rho = rho / trace;
    (&rho + rho.adjoint()) * C64::new(0.5, 0.0)
}

/// Projector onto a Haar-random subspace of rank uniform in `[1, dim]`.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let rank = rng.random_range(1..=dim);
    let basis = random_unitary(dim, rng).columns(0, rank).into_owned();
    &basis * basis.adjoint()
}

/// `U diag(λ) U†` with Haar `U` and `λ` uniform on `[0, 1]`.
pub fn random_effect<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let u = random_unitary(dim, rng);
    let mut scaled = u.clone();
    for j in 0..dim {
        scaled.column_mut(j).scale_mut(rng.random::<f64>());
    }
    let e = scaled * u.adjoint();
    (&e + e.adjoint()) * C64::new(0.5, 0.0)
}

fn run_suite(
    name: &str,
    samples: u64,
    seed: u64,
    check: impl Fn(&mut crate::rng::StreamRng) -> Result<BoundReport> + Sync,
) -> Result<SuiteReport> {
    let (violations, min_slack) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let report = check(&mut stream(seed, Purpose::Verify, i))?;
            Ok(((!report.satisfied) as u64, report.slack))
        })
        .try_reduce(|| (0, f64::INFINITY), |a, b| Ok((a.0 + b.0, a.1.min(b.1))))?;
    Ok(SuiteReport {
        suite: name.to_string(),
        samples,
        violations,
        min_slack,
    })
}

/// Random subnormalised `σ` and lists of `1..=max_projectors` random
/// projectors, dimensions `2..=max_dim`.
pub fn sen_suite(samples: u64, max_dim: usize, max_projectors: usize, seed: u64) -> Result<SuiteReport> {
    run_suite("sen", samples, seed, |rng| {
        let dim = rng.random_range(2..=max_dim.max(2));
        let sigma = random_density(dim, rng) * C64::new(rng.random_range(0.05..=1.0), 0.0);
        let count = rng.random_range(1..=max_projectors.max(1));
        let projectors: Vec<_> = (0..count).map(|_| random_projector(dim, rng)).collect();
        sen_bound_gap(&sigma, &projectors)
    })
}

/// Ensembles of `1..=max_states` random states with random weights and a
/// random effect, dimensions `2..=max_dim`.
pub fn gentle_suite(samples: u64, max_dim: usize, max_states: usize, seed: u64) -> Result<SuiteReport> {
    run_suite("gentle", samples, seed, |rng| {
        let dim = rng.random_range(2..=max_dim.max(2));
        let count = rng.random_range(1..=max_states.max(1));
        let mut weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let ensemble = weights
            .into_iter()
            .map(|w| Ok((w, DensityMatrix::qudit(random_density(dim, rng))?)))
            .collect::<Result<Vec<_>>>()?;
        gentle_operator_gap(&ensemble, &random_effect(dim, rng))
    })
}

/// Random state pairs and effects, dimensions `2..=max_dim`.
pub fn trace_suite(samples: u64, max_dim: usize, seed: u64) -> Result<SuiteReport> {
    run_suite("trace", samples, seed, |rng| {
        let dim = rng.random_range(2..=max_dim.max(2));
        let rho = DensityMatrix::qudit(random_density(dim, rng))?;
        let sigma = DensityMatrix::qudit(random_density(dim, rng))?;
        trace_lemma_gap(&rho, &sigma, &random_effect(dim, rng))
    })
}

/// Size and probability properties of the typical set for a grid of
/// Bernoulli sources and blocklengths; the mass property is asymptotic and
/// not counted.
pub fn typicality_suite(delta: f64) -> Result<SuiteReport> {
    let mut samples = 0;
    let mut violations = 0;
    for p in [0.05, 0.11, 0.3, 0.5] {
        for n in [4, 8, 12, 16, 20] {
            let report = typicality_report(&TypicalityParams::new(vec![p, 1.0 - p], n, delta, 0.5)?)?;
            samples += 1;
            violations += u64::from(!(report.size_ok && report.probability_ok));
        }
    }
    Ok(SuiteReport {
        suite: "typicality".into(),
        samples,
        violations,
        min_slack: 0.0,
    })
}
