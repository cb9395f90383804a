use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use seqdec_core::fockspace::FockCutoff;
use seqdec_core::rng::{derive_seed, Purpose};
use seqdec_core::seqdecoder::{monte_carlo_error_with, wilson_interval, FockOptions};
use seqdec_core::{apply_loss, average_error_exact, codeword_gram, generate_codebook, Engine, FamilyTag, Prior};

use crate::CliError;

/// CSV header, in column order.
pub const COLUMNS: [&str; 15] = [
    "engine",
    "family",
    "prior",
    "n",
    "M",
    "rate_bits",
    "ns",
    "eta",
    "trials",
    "err_mean",
    "err_ci_lo",
    "err_ci_hi",
    "exact_err",
    "seed",
    "wall_ms",
];

/// A batch of simulation points: the Cartesian product of the axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: FamilyTag,
    pub prior: Prior,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    pub n: Vec<usize>,
    /// Message counts; mutually exclusive with `rate`.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<Vec<usize>>,
    /// Rates in bits per use, giving `M = round(2^{n·rate})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<Vec<f64>>,
    pub ns: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: Vec<f64>,
    /// Monte Carlo trials per codebook.
    pub trials: u64,
    /// Random codebooks drawn per point.
    #[serde(default = "default_codebooks")]
    pub codebooks: usize,
    #[serde(default)]
    pub seed: u64,
    /// Also report the exact Gram-chain error.
    #[serde(default)]
    pub exact: bool,
    /// Record wall-clock time; off by default so outputs are reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Fixed Fock cutoff for the `fock` engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_engine() -> Engine {
    Engine::Gram
}

fn default_eta() -> Vec<f64> {
    vec![1.0]
}

fn default_codebooks() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub engine: String,
    pub family: String,
    pub prior: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub messages: usize,
    pub rate_bits: f64,
    pub ns: f64,
    pub eta: f64,
    pub trials: u64,
    pub err_mean: f64,
    pub err_ci_lo: f64,
    pub err_ci_hi: f64,
    pub exact_err: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    n: usize,
    messages: usize,
    ns: f64,
    eta: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: SweepConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("sweep config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.n.is_empty() || self.ns.is_empty() || self.eta.is_empty() {
            return usage("axes n, ns and eta must be non-empty".into());
        }
        if self.n.contains(&0) {
            return usage("blocklengths must be positive".into());
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if self.codebooks == 0 {
            return usage("codebooks must be at least 1".into());
        }
        match (&self.messages, &self.rate, self.prior) {
            (None, None, Prior::Ppm) => {}
            (Some(_), _, Prior::Ppm) | (_, Some(_), Prior::Ppm) => {
                return usage("ppm fixes M = n; drop the M and rate axes".into())
            }
            (Some(m), None, _) if !m.is_empty() && !m.contains(&0) => {}
            (None, Some(r), _) if !r.is_empty() && r.iter().all(|&x| x >= 0.0 && x.is_finite()) => {}
            _ => return usage("give exactly one non-empty axis of positive M or non-negative rate".into()),
        }
        if self.family != FamilyTag::Coherent && self.eta.iter().any(|&e| e != 1.0) {
            return usage(format!(
                "loss is only modelled for the coherent family, not {}",
                self.family
            ));
        }
        if self.exact && self.engine == Engine::Cpn {
            return usage("the exact error describes the sequential decoder, not cpn".into());
        }
        Ok(())
    }

    /// Axis combinations in lexicographic order: n, then M (or rate), then
    /// ns, then eta.
    fn points(&self) -> Result<Vec<Point>, CliError> {
        let mut points = Vec::new();
        for &n in &self.n {
            let counts: Vec<usize> = match (&self.messages, &self.rate) {
                (Some(m), _) => m.clone(),
                (None, Some(rates)) => rates
                    .iter()
                    .map(|&r| messages_for_rate(n, r))
                    .collect::<Result<_, _>>()?,
                (None, None) => vec![n],
            };
            for &messages in &counts {
                for &ns in &self.ns {
                    for &eta in &self.eta {
                        points.push(Point { n, messages, ns, eta });
                    }
                }
            }
        }
        Ok(points)
    }

    fn reports_exact(&self) -> bool {
        self.engine != Engine::Cpn && (self.exact || self.engine == Engine::Gram)
    }
}

fn messages_for_rate(n: usize, rate: f64) -> Result<usize, CliError> {
    let m = (n as f64 * rate).exp2().round();
    if !(1.0..=1e9).contains(&m) {
        return Err(CliError::Usage(format!("rate {rate} at n={n} gives an unusable M={m}")));
    }
    Ok(m as usize)
}

/// Runs every point, in parallel, and returns rows in axis order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>, CliError> {
    config.validate()?;
    let points = config.points()?;
    points
        .par_iter()
        .enumerate()
        .map(|(index, point)| run_point(config, point, index as u64))
        .collect()
}

fn run_point(config: &SweepConfig, point: &Point, index: u64) -> Result<ResultRow, CliError> {
    let start = Instant::now();
    let point_seed = derive_seed(config.seed, Purpose::SweepPoint, index);
    let fock = FockOptions {
        cutoff: config.cutoff.map(FockCutoff::new).transpose()?,
        ..FockOptions::default()
    };
    let mut errors = 0;
    let mut exact_sum = 0.0;
    for c in 0..config.codebooks as u64 {
        let book = generate_codebook(
            config.prior,
            config.family,
            point.n,
            point.messages,
            point.ns,
            derive_seed(point_seed, Purpose::Codebook, c),
        )?;
        let book = if config.family == FamilyTag::Coherent {
            apply_loss(&book, point.eta)?
        } else {
            book
        };
        let estimate = monte_carlo_error_with(
            config.engine,
            &book,
            config.trials,
            derive_seed(point_seed, Purpose::Trial, c),
            fock,
        )?;
        errors += estimate.errors;
        if config.reports_exact() {
            exact_sum += average_error_exact(&codeword_gram(&book)?)?;
        }
    }
    let trials = config.trials * config.codebooks as u64;
    let (lo, hi) = wilson_interval(errors, trials);
    Ok(ResultRow {
        engine: config.engine.to_string(),
        family: config.family.to_string(),
        prior: config.prior.to_string(),
        n: point.n,
        messages: point.messages,
        rate_bits: (point.messages as f64).log2() / point.n as f64,
        ns: point.ns,
        eta: point.eta,
        trials,
        err_mean: errors as f64 / trials as f64,
        err_ci_lo: lo,
        err_ci_hi: hi,
        exact_err: config.reports_exact().then(|| exact_sum / config.codebooks as f64),
        seed: config.seed,
        wall_ms: if config.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Serialises rows as CSV (header always present, LF line endings).
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(COLUMNS).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes to `<path>.partial`, then renames into place.
pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = File::create(&partial)?;
    write_csv(rows, &mut file)?;
    file.sync_all()?;
    std::fs::rename(&partial, path)?;
    Ok(())
}
