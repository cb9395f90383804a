use std::sync::Arc;

use nalgebra::DMatrix;

use super::cutoff::FockCutoff;
use super::state::{coherent_amplitudes, TruncatedState};
use crate::{Error, Result, C64};

/// Largest tolerated deviation from unitarity, or from the analytic vacuum
/// column, on the low-occupation sector.
pub const UNITARY_DEFECT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianUnitarySpec {
    /// `D(α) = exp(α a† − α* a)` on one mode.
    Displace { mode: usize, alpha: C64 },
    /// `P(θ) = exp(i n̂ θ)` on one mode.
    Phase { mode: usize, theta: f64 },
    /// `S(r) = exp(r (a† b† − a b))` on two distinct modes, `r >= 0`.
    Squeeze2 { modes: [usize; 2], r: f64 },
}

impl GaussianUnitarySpec {
    pub fn target_modes(&self) -> Vec<usize> {
        match *self {
            GaussianUnitarySpec::Displace { mode, .. } | GaussianUnitarySpec::Phase { mode, .. } => vec![mode],
            GaussianUnitarySpec::Squeeze2 { modes, .. } => modes.to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GaussianUnitarySpec::Displace { alpha, .. } if !(alpha.re.is_finite() && alpha.im.is_finite()) => {
                Err(Error::InvalidParams("displacement amplitude must be finite".into()))
            }
            GaussianUnitarySpec::Phase { theta, .. } if !theta.is_finite() => {
                Err(Error::InvalidParams("phase must be finite".into()))
            }
            GaussianUnitarySpec::Squeeze2 { modes, r } => {
                if modes[0] == modes[1] {
                    return Err(Error::InvalidParams(
                        "two-mode squeezing needs two distinct modes".into(),
                    ));
                }
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "squeezing strength must be >= 0, got {r}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A cutoff-truncated Gaussian unitary ready to act on [`TruncatedState`]s.
///
/// Two-mode squeezing conserves `n_a − n_b`, so it is stored as one real
/// orthogonal block per difference sector rather than as a `d² × d²` matrix.
#[derive(Debug, Clone)]
pub struct GaussianUnitary {
    spec: GaussianUnitarySpec,
    cutoff: FockCutoff,
    daggered: bool,
    action: Arc<Action>,
}

#[derive(Debug, Clone)]
enum Action {
    Dense(DMatrix<C64>),
    Diagonal(Vec<C64>),
    /// Indexed by `|n_a − n_b|`; `None` marks a sector that was not built.
    Sectors(Vec<Option<DMatrix<f64>>>),
}

/// Builds the truncated operator for `spec`, failing with `CutoffTooSmall`
/// when its low-occupation sector is not faithful.
pub fn gaussian_unitary(spec: GaussianUnitarySpec, cutoff: FockCutoff) -> Result<GaussianUnitary> {
    build(spec, cutoff, usize::MAX)
}

/// Like [`gaussian_unitary`], but a squeezer only gets the difference sectors
/// `|n_a − n_b| <= max_difference`. Applying it to amplitudes outside those
/// sectors is an error.
pub fn gaussian_unitary_on_sectors(
    spec: GaussianUnitarySpec,
    cutoff: FockCutoff,
    max_difference: usize,
) -> Result<GaussianUnitary> {
    build(spec, cutoff, max_difference)
}

fn build(spec: GaussianUnitarySpec, cutoff: FockCutoff, max_difference: usize) -> Result<GaussianUnitary> {
    spec.validate()?;
    let d = cutoff.levels();
    let action = match spec {
        GaussianUnitarySpec::Displace { alpha, .. } => {
            let u = displacement_matrix(alpha, d);
            check_low_sector(&u, cutoff)?;
            check_vacuum_column(
                u.column(0).iter().copied(),
                &coherent_amplitudes(alpha, d),
                cutoff,
                "displacement",
            )?;
            Action::Dense(u)
        }
        GaussianUnitarySpec::Phase { theta, .. } => {
            Action::Diagonal((0..d).map(|n| C64::from_polar(1.0, n as f64 * theta)).collect())
        }
        GaussianUnitarySpec::Squeeze2 { r, .. } => {
            let sectors: Vec<_> = (0..d)
                .map(|delta| (delta <= max_difference).then(|| squeeze_sector(r, delta, d)))
                .collect();
            let diagonal = sectors[0].as_ref().expect("sector 0 is always built");
            check_low_sector(&diagonal.map(|x| C64::new(x, 0.0)), cutoff)?;
            let analytic = tmsv_amplitudes(r, d);
            check_vacuum_column(
                diagonal.column(0).iter().map(|&x| C64::new(x, 0.0)),
                &analytic,
                cutoff,
                "squeezer",
            )?;
            Action::Sectors(sectors)
        }
    };
    Ok(GaussianUnitary {
        spec,
        cutoff,
        daggered: false,
        action: Arc::new(action),
    })
}

impl GaussianUnitary {
    pub fn spec(&self) -> GaussianUnitarySpec {
        self.spec
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn is_adjoint(&self) -> bool {
        self.daggered
    }

    /// The inverse operator: `D(−α)`, `P(−θ)` or `S†(r)`.
    pub fn adjoint(&self) -> GaussianUnitary {
        let action = match &*self.action {
            Action::Dense(u) => Action::Dense(u.adjoint()),
            Action::Diagonal(p) => Action::Diagonal(p.iter().map(|z| z.conj()).collect()),
            Action::Sectors(s) => Action::Sectors(s.iter().map(|b| b.as_ref().map(|m| m.transpose())).collect()),
        };
        GaussianUnitary {
            spec: self.spec,
            cutoff: self.cutoff,
            daggered: !self.daggered,
            action: Arc::new(action),
        }
    }

    /// The same operator acting on other modes; shares the built matrices.
    pub fn on_modes(&self, modes: &[usize]) -> Result<GaussianUnitary> {
        let spec = match (self.spec, modes) {
            (GaussianUnitarySpec::Displace { alpha, .. }, &[mode]) => GaussianUnitarySpec::Displace { mode, alpha },
            (GaussianUnitarySpec::Phase { theta, .. }, &[mode]) => GaussianUnitarySpec::Phase { mode, theta },
            (GaussianUnitarySpec::Squeeze2 { r, .. }, &[a, b]) => GaussianUnitarySpec::Squeeze2 { modes: [a, b], r },
            _ => {
                return Err(Error::InvalidParams(format!(
                    "{modes:?} does not match the mode count of {:?}",
                    self.spec
                )))
            }
        };
        spec.validate()?;
        Ok(GaussianUnitary {
            spec,
            cutoff: self.cutoff,
            daggered: self.daggered,
            action: Arc::clone(&self.action),
        })
    }

    pub fn apply(&self, state: &mut TruncatedState) -> Result<()> {
        if state.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff.levels(),
                found: state.cutoff().levels(),
            });
        }
        for &mode in &self.spec.target_modes() {
            if mode >= state.modes() {
                return Err(Error::InvalidParams(format!(
                    "mode {mode} out of range for a {}-mode state",
                    state.modes()
                )));
            }
        }
        match (&*self.action, self.spec) {
            (Action::Dense(u), GaussianUnitarySpec::Displace { mode, .. }) => state.apply_single_mode(mode, u),
            (Action::Diagonal(p), GaussianUnitarySpec::Phase { mode, .. }) => state.apply_diagonal(mode, p),
            (Action::Sectors(s), GaussianUnitarySpec::Squeeze2 { modes, .. }) => apply_sectors(state, modes, s)?,
            _ => unreachable!("action always matches its spec"),
        }
        Ok(())
    }

    /// Dense matrix on the target modes (`d × d`, or `d² × d²` with the first
    /// listed mode most significant).
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let d = self.cutoff.levels();
        match &*self.action {
            Action::Dense(u) => Ok(u.clone()),
            Action::Diagonal(p) => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(p))),
            Action::Sectors(sectors) => {
                let mut out = DMatrix::zeros(d * d, d * d);
                for (delta, block) in sectors.iter().enumerate() {
                    let block = block
                        .as_ref()
                        .ok_or_else(|| Error::InvalidState(format!("squeezer sector {delta} was not built")))?;
                    for &sign in signs(delta) {
                        let index = |k: usize| sector_index(k, delta, sign, d);
                        for (i, j) in (0..d - delta).flat_map(|i| (0..d - delta).map(move |j| (i, j))) {
                            out[(index(i), index(j))] = C64::new(block[(i, j)], 0.0);
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

fn signs(delta: usize) -> &'static [i8] {
    if delta == 0 {
        &[1]
    } else {
        &[1, -1]
    }
}

/// Local index `n_a · d + n_b` of the `k`-th basis state of a sector.
fn sector_index(k: usize, delta: usize, sign: i8, d: usize) -> usize {
    if sign > 0 {
        (k + delta) * d + k
    } else {
        k * d + k + delta
    }
}

fn apply_sectors(state: &mut TruncatedState, modes: [usize; 2], sectors: &[Option<DMatrix<f64>>]) -> Result<()> {
    let d = state.cutoff().levels();
    let (sa, sb) = (state.strides(modes[0]), state.strides(modes[1]));
    let bases = state.bases_excluding(&modes);
    let amplitudes = state.amplitudes_mut();
    let zero = C64::new(0.0, 0.0);
    let mut gathered = vec![zero; d];
    let mut result = vec![zero; d];
    for base in bases {
        for (delta, block) in sectors.iter().enumerate() {
            for &sign in signs(delta) {
                let len = d - delta;
                let index = |k: usize| {
                    let (na, nb) = if sign > 0 { (k + delta, k) } else { (k, k + delta) };
                    base + na * sa + nb * sb
                };
                let mut any = false;
                for (k, slot) in gathered[..len].iter_mut().enumerate() {
                    *slot = amplitudes[index(k)];
                    any |= *slot != zero;
                }
                if !any {
                    continue;
                }
                let block = block.as_ref().ok_or_else(|| {
                    Error::InvalidState(format!("amplitude in squeezer sector {delta}, which was not built"))
                })?;
                for (i, out) in result[..len].iter_mut().enumerate() {
                    *out = gathered[..len].iter().enumerate().map(|(j, v)| v * block[(i, j)]).sum();
                }
                for (k, v) in result[..len].iter().enumerate() {
                    amplitudes[index(k)] = *v;
                }
            }
        }
    }
    Ok(())
}

/// `exp(α a† − α* a)` of the truncated generator (scaling and squaring).
fn displacement_matrix(alpha: C64, d: usize) -> DMatrix<C64> {
    let mut generator = DMatrix::<C64>::zeros(d, d);
    for n in 0..d - 1 {
        let s = ((n + 1) as f64).sqrt();
        generator[(n + 1, n)] = alpha * s;
        generator[(n, n + 1)] = -alpha.conj() * s;
    }
    generator.exp()
}

/// Real orthogonal block of `S(r)` on the sector `|n_a − n_b| = delta`, in
/// the basis ordered by `min(n_a, n_b)`.
fn squeeze_sector(r: f64, delta: usize, d: usize) -> DMatrix<f64> {
    let len = d - delta;
    let mut generator = DMatrix::<f64>::zeros(len, len);
    for k in 0..len.saturating_sub(1) {
        let c = r * (((k + delta + 1) * (k + 1)) as f64).sqrt();
        generator[(k + 1, k)] = c;
        generator[(k, k + 1)] = -c;
    }
    generator.exp()
}

/// Untruncated `S(r)|00⟩` amplitudes on `|kk⟩`: `tanh^k r / cosh r`.
fn tmsv_amplitudes(r: f64, d: usize) -> Vec<C64> {
    let t = r.tanh();
    let c = r.cosh();
    (0..d).map(|k| C64::new(t.powi(k as i32) / c, 0.0)).collect()
}

fn check_low_sector(u: &DMatrix<C64>, cutoff: FockCutoff) -> Result<()> {
    let cols = (cutoff.low_sector_top() + 1).min(u.ncols());
    let low = u.columns(0, cols);
    let gram = low.adjoint() * low;
    let defect = (0..cols)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm())
        .fold(0.0, f64::max);
    if defect > UNITARY_DEFECT_TOLERANCE {
        return Err(Error::cutoff(
            cutoff.levels(),
            format!("unitary defect {defect:.3e} on the low-occupation sector"),
        ));
    }
    Ok(())
}

fn check_vacuum_column(
    column: impl Iterator<Item = C64>,
    analytic: &[C64],
    cutoff: FockCutoff,
    what: &str,
) -> Result<()> {
    let deviation = column.zip(analytic).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if deviation > UNITARY_DEFECT_TOLERANCE {
        return Err(Error::cutoff(
            cutoff.levels(),
            format!("{what} deviates from its analytic vacuum image by {deviation:.3e}"),
        ));
    }
    Ok(())
}
