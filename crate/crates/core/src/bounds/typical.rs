use serde::Serialize;

use crate::{Error, Result};

/// Largest number of type classes enumerated before giving up.
pub const TYPE_CLASS_LIMIT: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityParams {
    pub p: Vec<f64>,
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
}

impl TypicalityParams {
    pub fn new(p: Vec<f64>, n: usize, delta: f64, epsilon: f64) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.is_empty() || p.iter().any(|x| x.is_nan() || *x < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "not a probability distribution (sum {total})"
            )));
        }
        if delta.is_nan() || delta <= 0.0 || epsilon.is_nan() || epsilon <= 0.0 || epsilon >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "need δ > 0 and ε in (0,1), got δ={delta}, ε={epsilon}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParams("blocklength must be positive".into()));
        }
        Ok(TypicalityParams { p, n, delta, epsilon })
    }

    pub fn entropy_bits(&self) -> f64 {
        self.p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
    }
}

/// Outcome of exhaustively enumerating the δ-typical set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityReport {
    pub entropy_bits: f64,
    /// Probability of the typical set.
    pub mass: f64,
    /// `mass ≥ 1 − ε`.
    pub mass_ok: bool,
    pub size: u128,
    /// `log₂|T| ≤ n(H+δ)`.
    pub size_ok: bool,
    /// Smallest and largest `log₂ p(xⁿ)` among typical sequences.
    pub log2_probability_range: Option<(f64, f64)>,
    /// Every typical sequence has `2^{−n(H+δ)} ≤ p(xⁿ) ≤ 2^{−n(H−δ)}`.
    pub probability_ok: bool,
    pub type_classes: u128,
}

/// Enumerates the typical set by type class: the sample entropy depends
/// only on the symbol counts.
pub fn typicality_report(params: &TypicalityParams) -> Result<TypicalityReport> {
    let log_p: Vec<f64> = params.p.iter().filter(|&&x| x > 0.0).map(|x| x.log2()).collect();
    let k = log_p.len();
    let n = params.n;
    let classes = binomial(n + k - 1, k - 1).unwrap_or(u128::MAX);
    if classes > TYPE_CLASS_LIMIT {
        return Err(Error::EnumerationTooLarge {
            required: classes,
            limit: TYPE_CLASS_LIMIT,
        });
    }
    let h = params.entropy_bits();
    let nf = n as f64;
    let mut mass = 0.0;
    let mut size: u128 = 0;
    let mut range: Option<(f64, f64)> = None;
    let mut counts = vec![0usize; k];
    let mut overflow = false;
    for_each_composition(n, &mut counts, 0, &mut |c| {
        let log2_prob: f64 = c.iter().zip(&log_p).map(|(&ci, lp)| ci as f64 * lp).sum();
        if (-log2_prob / nf - h).abs() > params.delta {
            return;
        }
        let Some(members) = multinomial(n, c) else {
            overflow = true;
            return;
        };
        size = size.saturating_add(members);
        mass += members as f64 * log2_prob.exp2();
        range = Some(match range {
            None => (log2_prob, log2_prob),
            Some((lo, hi)) => (lo.min(log2_prob), hi.max(log2_prob)),
        });
    });
    if overflow {
        return Err(Error::EnumerationTooLarge {
            required: u128::MAX,
            limit: TYPE_CLASS_LIMIT,
        });
    }
    let upper = nf * (h + params.delta);
    let lower = nf * (h - params.delta);
    let tol = 1e-9;
    Ok(TypicalityReport {
        entropy_bits: h,
        mass,
        mass_ok: mass >= 1.0 - params.epsilon,
        size,
        size_ok: size == 0 || (size as f64).log2() <= upper + tol,
        log2_probability_range: range,
        probability_ok: range.is_none_or(|(lo, hi)| -lo <= upper + tol && -hi >= lower - tol),
        type_classes: classes,
    })
}

fn for_each_composition(remaining: usize, counts: &mut [usize], at: usize, visit: &mut impl FnMut(&[usize])) {
    if at + 1 == counts.len() {
        counts[at] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[at] = c;
        for_each_composition(remaining - c, counts, at + 1, visit);
    }
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn multinomial(n: usize, counts: &[usize]) -> Option<u128> {
    let mut left = n;
    let mut acc: u128 = 1;
    for &c in counts {
        acc = acc.checked_mul(binomial(left, c)?)?;
        left -= c;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_bits_are_all_typical() {
        let p = TypicalityParams::new(vec![0.5, 0.5], 12, 0.01, 0.1).unwrap();
        let r = typicality_report(&p).unwrap();
        assert_eq!(r.size, 1 << 12);
        assert_abs_diff_eq!(r.mass, 1.0, epsilon = 1e-12);
        assert!(r.size_ok && r.probability_ok && r.mass_ok);
    }

    #[test]
    fn deterministic_source_has_one_sequence() {
        let p = TypicalityParams::new(vec![1.0, 0.0], 7, 0.1, 0.1).unwrap();
        let r = typicality_report(&p).unwrap();
        assert_eq!(r.size, 1);
        assert_eq!(r.entropy_bits, 0.0);
        assert_abs_diff_eq!(r.mass, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn multinomials() {
        assert_eq!(binomial(20, 2), Some(190));
        assert_eq!(multinomial(4, &[2, 1, 1]), Some(12));
        assert_eq!(binomial(35, 15), Some(3_247_943_160));
    }

    #[test]
    fn oversized_enumeration_is_refused() {
        let p = TypicalityParams::new(vec![1.0 / 16.0; 16], 40, 0.1, 0.1).unwrap();
        assert!(matches!(typicality_report(&p), Err(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn bad_params_are_rejected() {
        assert!(TypicalityParams::new(vec![0.5, 0.6], 5, 0.1, 0.1).is_err());
        assert!(TypicalityParams::new(vec![0.5, 0.5], 5, 0.0, 0.1).is_err());
        assert!(TypicalityParams::new(vec![0.5, 0.5], 5, 0.1, 1.0).is_err());
    }
}
