use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::codec::GramMatrix;
use crate::{Error, Result, C64};

/// Gram eigenvalues in `[-PSD_FLOOR, PSD_FLOOR]` are raised to `PSD_FLOOR`
/// before factorising; anything more negative is rejected.
pub const PSD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factorization {
    Eigen,
    Cholesky,
}

impl Factorization {
    pub fn as_str(self) -> &'static str {
        match self {
            Factorization::Eigen => "eigen",
            Factorization::Cholesky => "cholesky",
        }
    }
}

/// Codewords written in an orthonormal basis of their span.
///
/// Stores `L` with `G = L L†`; codeword `i` is the vector `v_i` whose
/// components are the conjugated row `i` of `L`, so `⟨v_i|v_j⟩ = G[i][j]`.
/// Every projector `I − |v_i⟩⟨v_i|` maps the span into itself, which makes
/// the decoder's action on the span exact.
#[derive(Debug, Clone)]
pub struct SpanRepresentation {
    factor: DMatrix<C64>,
    vectors: DMatrix<C64>,
    factorization: Factorization,
}

impl SpanRepresentation {
    pub fn from_gram(gram: &GramMatrix) -> Result<Self> {
        Self::from_gram_with(gram, Factorization::Eigen)
    }

    pub fn from_gram_with(gram: &GramMatrix, factorization: Factorization) -> Result<Self> {
        let g = gram.matrix();
        let factor = match factorization {
            Factorization::Eigen => {
                let eig = g.clone().symmetric_eigen();
                let mut factor = eig.eigenvectors;
                for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
                    if lambda < -PSD_FLOOR {
                        return Err(Error::NotPositiveSemidefinite { eigenvalue: lambda });
                    }
                    let scale = lambda.max(PSD_FLOOR).sqrt();
                    factor.column_mut(j).scale_mut(scale);
                }
                factor
            }
            Factorization::Cholesky => g
                .clone()
                .cholesky()
                .ok_or(Error::NotPositiveSemidefinite { eigenvalue: f64::NAN })?
                .unpack(),
        };
        let vectors = factor.adjoint();
        Ok(SpanRepresentation {
            factor,
            vectors,
            factorization,
        })
    }

    pub fn messages(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factorization(&self) -> Factorization {
        self.factorization
    }

    /// `L` with `G = L L†`.
    pub fn factor(&self) -> &DMatrix<C64> {
        &self.factor
    }

    /// Codeword `i` in span coordinates.
    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }

    fn check_index(&self, m: usize) -> Result<()> {
        if m >= self.messages() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.messages(),
            });
        }
        Ok(())
    }

    /// `χ ← (I − |v_i⟩⟨v_i|) χ`.
    pub(crate) fn reject(&self, i: usize, chi: &mut DVector<C64>) -> C64 {
        let v = self.vectors.column(i);
        let overlap = v.dotc(chi);
        chi.axpy(-overlap, &v, C64::new(1.0, 0.0));
        overlap
    }

    pub(crate) fn overlap(&self, i: usize, chi: &DVector<C64>) -> C64 {
        self.vectors.column(i).dotc(chi)
    }

    /// `|⟨ψ_m| Π̂_{m−1} ⋯ Π̂_1 |ψ_m⟩|²`: probability that tests `0..m` all
    /// answer "no" and test `m` answers "yes" when `m` was sent.
    pub fn chain_success(&self, m: usize) -> Result<f64> {
        self.check_index(m)?;
        let mut chi = self.vector(m);
        for i in 0..m {
            self.reject(i, &mut chi);
        }
        Ok(self.overlap(m, &chi).norm_sqr())
    }

    /// Exact decision distribution for sent message `m` under test order
    /// `order`: entry `i` is `P(decide i)`, the final entry is `P(FAIL)`.
    pub fn outcome_distribution(&self, m: usize, order: &[usize]) -> Result<Vec<f64>> {
        self.check_index(m)?;
        check_order(order, self.messages())?;
        let mut chi = self.vector(m);
        let mut probs = vec![0.0; self.messages() + 1];
        for &i in order {
            // chi is unnormalised: its squared norm is P(all previous "no").
            probs[i] = self.overlap(i, &chi).norm_sqr();
            self.reject(i, &mut chi);
        }
        probs[self.messages()] = chi.norm_squared();
        Ok(probs)
    }
}

pub(crate) fn check_order(order: &[usize], messages: usize) -> Result<()> {
    let mut seen = vec![false; messages];
    for &i in order {
        if i >= messages || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParams(format!(
                "test order {order:?} is not a permutation of 0..{messages}"
            )));
        }
    }
    if order.len() != messages {
        return Err(Error::InvalidParams(format!(
            "test order {order:?} is not a permutation of 0..{messages}"
        )));
    }
    Ok(())
}

/// Success probability of the sequential decoder for message `m`.
pub fn gram_chain_success(gram: &GramMatrix, m: usize) -> Result<f64> {
    if m >= gram.messages() {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: gram.messages(),
        });
    }
    SpanRepresentation::from_gram(gram)?.chain_success(m)
}

/// `1 − (1/M) Σ_m success(m)` for uniformly distributed messages.
pub fn average_error_exact(gram: &GramMatrix) -> Result<f64> {
    let span = SpanRepresentation::from_gram(gram)?;
    average_error_from_span(&span)
}

pub fn average_error_from_span(span: &SpanRepresentation) -> Result<f64> {
    let total: f64 = (0..span.messages())
        .map(|m| span.chain_success(m))
        .sum::<Result<f64>>()?;
    Ok(1.0 - total / span.messages() as f64)
}

/// Exact error probability of every message, in index order.
pub fn per_message_error(span: &SpanRepresentation) -> Result<Vec<f64>> {
    (0..span.messages())
        .map(|m| span.chain_success(m).map(|s| 1.0 - s))
        .collect()
}
