//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use seqdec_cli::{run_sweep, SweepConfig};
use seqdec_core::bounds::{gentle_suite, sen_suite, typicality_report, TypicalityParams};
use seqdec_core::codec::{codeword_gram, generate_codebook, Codebook, Prior};
use seqdec_core::ensembles::{
    binary_entropy, bpsk_capacity, g_capacity, phase_average, private_capacity, ChannelParams, FamilyTag, StateFamily,
    Symbol,
};
use seqdec_core::fockspace::{entropy, thermal_state, trace_distance, FockCutoff};
use seqdec_core::rng::{stream, Purpose};
use seqdec_core::seqdecoder::{
    average_error_exact, cpn_receiver, decision_histogram, gram_chain_success, monte_carlo_error, simulate_trajectory,
    Decoder, Engine, FockOptions, SpanRepresentation,
};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, Option<u64>, Check); 9] = [
        ("capacity formulas", Some(1), capacity_formulas),
        ("engine equivalence", Some(10), engine_equivalence),
        ("physical receiver", Some(60), physical_receiver),
        ("closed-form oracle", None, closed_form_oracle),
        ("blocklength decay", Some(300), blocklength_decay),
        ("bound suites", Some(120), bound_suites),
        ("reading thermalization", None, reading_thermalization),
        ("cpn oracle", None, cpn_oracle),
        ("reproducibility", None, reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, budget) {
            (Ok(_), Some(secs)) if elapsed > Duration::from_secs(*secs) => {
                Err(format!("took {:.1} s, budget {secs} s", elapsed.as_secs_f64()))
            }
            (r, _) => r,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {}. {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn capacity_formulas() -> Result<String, String> {
    ensure(g_capacity(0.0) == 0.0, || format!("g(0) = {}", g_capacity(0.0)))?;
    ensure((g_capacity(1.0) - 2.0).abs() < 1e-12, || {
        format!("g(1) = {}", g_capacity(1.0))
    })?;
    let rho = thermal_state(1.0, FockCutoff::new(60).unwrap()).unwrap();
    let s = entropy(&rho).unwrap();
    ensure((s - 2.0).abs() < 1e-6, || format!("S(thermal(1)) = {s}"))?;
    for ns in [0.0, 0.1, 1.0, 7.5] {
        let p = private_capacity(&ChannelParams::new(0.5, ns).unwrap());
        ensure(p == 0.0, || format!("private(0.5, {ns}) = {p:e}"))?;
    }
    let b = bpsk_capacity(std::f64::consts::LN_2 / 2.0);
    let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
    ensure((b - h).abs() < 1e-9, || format!("bpsk(ln2/2) = {b}, H2(0.75) = {h}"))?;
    Ok(format!(
        "g(1) = {:.12}, S(thermal) = {s:.9}, bpsk(ln2/2) = {b:.9}",
        g_capacity(1.0)
    ))
}

/// Orthonormal-basis coordinates of the codewords by unpivoted Cholesky:
/// codeword `i` is the conjugated row `i` of `L`.
fn cholesky_vectors(g: &DMatrix<C64>) -> Vec<DVector<C64>> {
    let m = g.nrows();
    let mut l = DMatrix::<C64>::zeros(m, m);
    for j in 0..m {
        let d = g[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        let pivot = d.sqrt();
        l[(j, j)] = C64::new(pivot, 0.0);
        for i in j + 1..m {
            let s = g[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum::<C64>();
            l[(i, j)] = s / pivot;
        }
    }
    (0..m).map(|i| l.row(i).transpose().map(|z| z.conj())).collect()
}

fn projector(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

/// Dense nested-projector trace for the probability of deciding `m` when `m`
/// was sent.
fn dense_success(vectors: &[DVector<C64>], m: usize) -> f64 {
    let dim = vectors[0].len();
    let id = DMatrix::<C64>::identity(dim, dim);
    let chain = vectors[..m]
        .iter()
        .fold(id.clone(), |acc, v| (&id - projector(v)) * acc);
    let phi = projector(&vectors[m]);
    (&phi * &chain * &phi * chain.adjoint() * &phi).trace().re
}

/// Full decision law by dense branch enumeration with renormalisation.
fn dense_distribution(vectors: &[DVector<C64>], m: usize) -> Vec<f64> {
    let dim = vectors[0].len();
    let id = DMatrix::<C64>::identity(dim, dim);
    let mut rho = projector(&vectors[m]);
    let mut reach = 1.0;
    let mut out = vec![0.0; vectors.len() + 1];
    for (i, v) in vectors.iter().enumerate() {
        let p = (projector(v) * &rho).trace().re.clamp(0.0, 1.0);
        out[i] = reach * p;
        reach *= 1.0 - p;
        if reach < 1e-300 {
            return out;
        }
        let q = &id - projector(v);
        rho = &q * rho * &q;
        let tr = rho.trace().re;
        rho /= C64::new(tr, 0.0);
    }
    out[vectors.len()] = reach;
    out
}

fn engine_equivalence() -> Result<String, String> {
    let mut books = 0;
    let mut worst: f64 = 0.0;
    for family in [FamilyTag::Coherent, FamilyTag::ReadingIII] {
        let prior = if family == FamilyTag::Coherent {
            Prior::GaussianIso
        } else {
            Prior::UniformPhase
        };
        let mut accepted = 0;
        let mut seed = 1000;
        while accepted < 25 {
            seed += 1;
            let mut rng = stream(seed, Purpose::Sample, 0);
            let (n, m, ns) = (
                rng.random_range(1..=4),
                rng.random_range(2..=6),
                rng.random_range(0.5..2.0),
            );
            let book = generate_codebook(prior, family, n, m, ns, seed).map_err(|e| e.to_string())?;
            let gram = codeword_gram(&book).map_err(|e| e.to_string())?;
            // Unpivoted Cholesky needs a comfortably definite Gram matrix.
            let min_eig = gram.matrix().clone().symmetric_eigenvalues().min();
            if min_eig < 1e-4 {
                continue;
            }
            accepted += 1;
            books += 1;
            let vectors = cholesky_vectors(gram.matrix());
            let span = SpanRepresentation::from_gram(&gram).map_err(|e| e.to_string())?;
            let order: Vec<usize> = (0..m).collect();
            for sent in 0..m {
                let exact = gram_chain_success(&gram, sent).map_err(|e| e.to_string())?;
                let dense = dense_success(&vectors, sent);
                worst = worst.max((exact - dense).abs());
                let law = span.outcome_distribution(sent, &order).map_err(|e| e.to_string())?;
                for (a, b) in law.iter().zip(dense_distribution(&vectors, sent)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    ensure(worst < 1e-10, || {
        format!("max deviation {worst:e} over {books} codebooks")
    })?;
    Ok(format!("{books} codebooks, max deviation {worst:.2e}"))
}

/// Largest |count difference| / σ between two independent histograms.
fn two_sample_z(a: &[u64], b: &[u64], trials: u64) -> f64 {
    let t = trials as f64;
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (p, q) = (x as f64 / t, y as f64 / t);
            let var = t * (p * (1.0 - p) + q * (1.0 - q));
            if var == 0.0 {
                if x == y {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (x as f64 - y as f64).abs() / var.sqrt()
            }
        })
        .fold(0.0, f64::max)
}

fn trajectory_histogram(span: &SpanRepresentation, sent: usize, trials: u64, seed: u64) -> Vec<u64> {
    let m = span.messages();
    let mut counts = vec![0u64; m + 1];
    for t in 0..trials {
        let outcome = simulate_trajectory(span, sent, &mut stream(seed, Purpose::Trial, t)).unwrap();
        counts[outcome.decision.slot(m)] += 1;
    }
    counts
}

fn physical_receiver() -> Result<String, String> {
    let trials = 10_000;
    let cases = [
        ("coherent n=2 M=4 |α|=0.71", Prior::BpskAmp, FamilyTag::Coherent, 2, 0.5),
        (
            "reading_III n=1 M=4 ns=0.5",
            Prior::UniformPhase,
            FamilyTag::ReadingIII,
            1,
            0.5,
        ),
    ];
    let mut details = Vec::new();
    for (label, prior, family, n, ns) in cases {
        let book = generate_codebook(prior, family, n, 4, ns, 21).map_err(|e| e.to_string())?;
        let fock = Decoder::new(Engine::Fock, &book, FockOptions::default()).map_err(|e| e.to_string())?;
        let span = SpanRepresentation::from_gram(&codeword_gram(&book).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        for sent in 0..4 {
            let physical = decision_histogram(&fock, sent, trials, 100 + sent as u64).map_err(|e| e.to_string())?;
            // Independent streams: the two engines consume draws identically.
            let reference = trajectory_histogram(&span, sent, trials, 200 + sent as u64);
            worst = worst.max(two_sample_z(&physical, &reference, trials));
        }
        ensure(worst <= 3.0, || format!("{label}: max |z| = {worst:.2}"))?;
        details.push(format!("{label}: max |z| = {worst:.2}"));
    }
    Ok(details.join("; "))
}

fn closed_form_oracle() -> Result<String, String> {
    let ns: f64 = 0.25;
    let family = StateFamily::new(FamilyTag::Coherent, ns).unwrap();
    let a = ns.sqrt();
    let symbols = vec![
        Symbol::Amplitude(C64::new(a, 0.0)),
        Symbol::Amplitude(C64::new(-a, 0.0)),
    ];
    let book = Codebook::from_symbols(family, Prior::BpskAmp, 1, ns, symbols).map_err(|e| e.to_string())?;
    let formula = 0.5 * (1.0 - (1.0 - (-1.0f64).exp()).powi(2));
    let exact = average_error_exact(&codeword_gram(&book).unwrap()).map_err(|e| e.to_string())?;
    ensure((exact - formula).abs() < 1e-12, || {
        format!("gram {exact} vs formula {formula}")
    })?;
    let est = monte_carlo_error(Engine::Gram, &book, 100_000, 4).map_err(|e| e.to_string())?;
    let sigma = (formula * (1.0 - formula) / est.trials as f64).sqrt();
    let z = (est.p_hat - formula) / sigma;
    ensure(z.abs() <= 3.0, || {
        format!("Monte Carlo {} is {z:.2}σ from {formula}", est.p_hat)
    })?;
    Ok(format!(
        "formula {formula:.7}, gram {exact:.7}, Monte Carlo {:.5} (z = {z:.2})",
        est.p_hat
    ))
}

fn blocklength_decay() -> Result<String, String> {
    let ns = std::f64::consts::LN_2 / 2.0;
    let blocklengths = [4usize, 8, 12];
    let mut points = Vec::new();
    let mut means = Vec::new();
    for &n in &blocklengths {
        let m = 1usize << (n / 2);
        let errors: Vec<f64> = (0..20)
            .map(|c| {
                let book = generate_codebook(Prior::BpskAmp, FamilyTag::Coherent, n, m, ns, 7_000 + c).unwrap();
                average_error_exact(&codeword_gram(&book).unwrap()).unwrap()
            })
            .collect();
        means.push(errors.iter().sum::<f64>() / errors.len() as f64);
        points.extend(errors.into_iter().map(|e| (n as f64, e)));
    }
    ensure(means.windows(2).all(|w| w[1] < w[0]), || {
        format!("means not decreasing: {means:?}")
    })?;

    // One-sided test of a negative least-squares slope of error against n.
    let k = points.len() as f64;
    let (mx, my) = (
        points.iter().map(|p| p.0).sum::<f64>() / k,
        points.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let se = (rss / (k - 2.0) / sxx).sqrt();
    let t = slope / se;
    let p_value = StudentsT::new(0.0, 1.0, k - 2.0).unwrap().cdf(t);
    ensure(p_value < 0.05, || {
        format!("slope {slope:.4e}, t = {t:.2}, p = {p_value:.3}")
    })?;

    // The same property through the sweep front end.
    let config = SweepConfig::from_json(&format!(
        r#"{{"family": "coherent", "prior": "bpsk_amp", "n": [4, 8, 12], "rate": [0.5], "ns": [{ns}],
            "trials": 500, "codebooks": 100, "seed": 17}}"#
    ))
    .map_err(|e| e.to_string())?;
    let rows = run_sweep(&config).map_err(|e| e.to_string())?;
    let swept: Vec<f64> = rows.iter().map(|r| r.err_mean).collect();
    ensure(swept.windows(2).all(|w| w[1] < w[0]), || {
        format!("sweep err_mean not decreasing: {swept:?}")
    })?;
    Ok(format!(
        "C_BPSK = {:.4}, mean exact error {:.4} > {:.4} > {:.4}, slope t = {t:.2} (p = {p_value:.1e}), sweep {:.4} > {:.4} > {:.4}",
        bpsk_capacity(ns),
        means[0],
        means[1],
        means[2],
        swept[0],
        swept[1],
        swept[2]
    ))
}

fn bound_suites() -> Result<String, String> {
    let sen = sen_suite(10_000, 8, 5, 31).map_err(|e| e.to_string())?;
    let gentle = gentle_suite(10_000, 8, 5, 32).map_err(|e| e.to_string())?;
    for r in [&sen, &gentle] {
        ensure(r.violations == 0 && r.samples == 10_000, || {
            format!("{}: {} violations", r.suite, r.violations)
        })?;
    }

    // Brute force over all 2^20 binary sequences.
    let (p, n, delta) = (0.11f64, 20usize, 0.1f64);
    let h = binary_entropy(p);
    let report = typicality_report(&TypicalityParams::new(vec![1.0 - p, p], n, delta, 0.1).unwrap())
        .map_err(|e| e.to_string())?;
    let (mut mass, mut size) = (0.0, 0u128);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for word in 0u32..1 << n {
        let ones = word.count_ones() as i32;
        let log2p = ones as f64 * p.log2() + (n as i32 - ones) as f64 * (1.0 - p).log2();
        if (-log2p / n as f64 - h).abs() <= delta {
            mass += log2p.exp2();
            size += 1;
            lo = lo.min(log2p);
            hi = hi.max(log2p);
        }
    }
    let (rlo, rhi) = report.log2_probability_range.ok_or("empty typical set")?;
    ensure(report.size == size, || {
        format!("size {} vs brute force {size}", report.size)
    })?;
    ensure((report.mass - mass).abs() < 1e-12, || {
        format!("mass {} vs brute force {mass}", report.mass)
    })?;
    ensure((rlo - lo).abs() < 1e-9 && (rhi - hi).abs() < 1e-9, || {
        "probability range differs".into()
    })?;
    let size_ok = (size as f64).log2() <= n as f64 * (h + delta);
    let prob_ok = lo >= -(n as f64) * (h + delta) && hi <= -(n as f64) * (h - delta);
    let mass_ok = mass >= 1.0 - 0.1;
    ensure(
        (report.size_ok, report.probability_ok, report.mass_ok) == (size_ok, prob_ok, mass_ok),
        || "property flags differ from brute force".into(),
    )?;
    Ok(format!(
        "sen {}/{} min slack {:.2e}, gentle {}/{} min slack {:.2e}; typical set size {size}, mass {mass:.6} \
         (size ok {size_ok}, probability ok {prob_ok}, mass ≥ 1−ε {mass_ok})",
        sen.violations, sen.samples, sen.min_slack, gentle.violations, gentle.samples, gentle.min_slack
    ))
}

fn reading_thermalization() -> Result<String, String> {
    let cutoff = FockCutoff::new(32).unwrap();
    let family = StateFamily::new(FamilyTag::ReadingII, 1.0).unwrap();
    let rho = phase_average(&family, 64, cutoff).map_err(|e| e.to_string())?;
    let thermal = thermal_state(1.0, cutoff).map_err(|e| e.to_string())?;
    let d = trace_distance(&rho, &thermal).map_err(|e| e.to_string())?;
    ensure(d <= 1e-9, || format!("trace distance {d:e}"))?;
    Ok(format!("trace distance {d:.2e}"))
}

fn cpn_oracle() -> Result<String, String> {
    let ns: f64 = 0.5;
    let trials = 100_000u64;
    let book = generate_codebook(Prior::Ppm, FamilyTag::Coherent, 2, 2, ns, 0).map_err(|e| e.to_string())?;
    let mut errors = 0u64;
    for t in 0..trials {
        let outcome = cpn_receiver(&book, 1, &mut stream(9, Purpose::Trial, t)).map_err(|e| e.to_string())?;
        errors += u64::from(outcome.is_error());
    }
    let expected = (-2.0 * ns).exp();
    let p_hat = errors as f64 / trials as f64;
    let z = (p_hat - expected) / (expected * (1.0 - expected) / trials as f64).sqrt();
    ensure(z.abs() <= 3.0, || {
        format!("error {p_hat} vs e^(-2ns) = {expected} (z = {z:.2})")
    })?;
    Ok(format!("error {p_hat:.5} vs e^(-2ns) = {expected:.5} (z = {z:.2})"))
}

fn seqdec(args: &[&str], workers: &str) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_seqdec"))
        .args(args)
        .env("SEQDEC_WORKERS", workers)
        .env_remove("SEQDEC_OUTPUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(output.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&output.stderr))
    })?;
    Ok(output.stdout)
}

fn reproducibility() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{"family": "coherent", "prior": "gaussian_iso", "engine": "fock", "n": [1, 2], "M": [2, 3],
            "ns": [0.3, 0.6], "eta": [1.0, 0.8], "trials": 300, "codebooks": 2, "seed": 99, "exact": true}"#,
    )
    .map_err(|e| e.to_string())?;
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "simulate", "comm", "--prior", "bpsk", "--n", "3", "--M", "4", "--ns", "0.4", "--trials", "5000", "--seed",
            "1",
        ],
        vec![
            "simulate", "comm", "--prior", "gaussian", "--n", "2", "--M", "3", "--ns", "0.5", "--eta", "0.7",
            "--engine", "fock", "--exact", "--trials", "2000", "--seed", "2",
        ],
        vec![
            "simulate", "comm", "--prior", "ppm", "--n", "4", "--ns", "0.6", "--engine", "cpn", "--trials", "5000",
            "--seed", "3",
        ],
        vec![
            "simulate", "reading", "--prior", "uniform", "--n", "1", "--M", "3", "--ns", "0.4", "--engine", "fock",
            "--trials", "1000", "--seed", "4",
        ],
        vec![
            "simulate",
            "reading",
            "--family",
            "reading_II",
            "--prior",
            "bpsk",
            "--n",
            "4",
            "--M",
            "6",
            "--ns",
            "1",
            "--trials",
            "5000",
            "--seed",
            "5",
        ],
        vec!["sweep", "--config", config.to_str().unwrap()],
    ];
    for args in &commands {
        let first = seqdec(args, "1")?;
        let again = seqdec(args, "1")?;
        let pooled = seqdec(args, "3")?;
        ensure(first == again, || format!("{args:?}: reruns differ"))?;
        ensure(first == pooled, || format!("{args:?}: output depends on worker count"))?;
        ensure(first.ends_with(b"\n") && !first.contains(&b'\r'), || {
            "CSV line endings".into()
        })?;
    }
    Ok(format!(
        "{} commands byte-identical across reruns and worker counts",
        commands.len()
    ))
}
