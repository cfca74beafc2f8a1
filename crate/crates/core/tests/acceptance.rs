//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sisparse::bases::{fourier_basis, sinc_frame, spike_basis, spike_fourier_pair, unitary_mixed_basis};
use sisparse::cli::spec::fit_grid;
use sisparse::cli::{run_with, Report};
use sisparse::coherence::analog_coherence;
use sisparse::decompose::{
    decompose_frame, decompose_two_onb_constant, detect_constant_structure, two_onb_dictionary, DecomposeOptions,
};
use sisparse::linalg::{complex_gaussian, dft_matrix, random_unitary, unitary_deviation, CMat, C64};
use sisparse::mmv::{kruskal_rank, l0_oracle, l1_mmv_solve, MmvProblem};
use sisparse::sispace::{cross_spectrum, signal_norm, synthesize_samples, CoeffSpectra, FrequencyGrid, GeneratorBank};

type Outcome = Result<String, String>;

fn grid(k: usize) -> FrequencyGrid {
    FrequencyGrid::new(k).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(t: Duration, limit: f64) -> Result<(), String> {
    ensure(t.as_secs_f64() < limit, || format!("took {:.2} s, limit {limit} s", t.as_secs_f64()))
}

fn spike_fourier_coherence() -> Outcome {
    let mut notes = Vec::new();
    for n in [4usize, 9, 16] {
        let start = Instant::now();
        let g = grid(fit_grid(256, n));
        let pair = spike_fourier_pair(n, 1.0, &g).map_err(|e| e.to_string())?;
        let mu = analog_coherence(&pair.spike, &pair.fourier, &g).map_err(|e| e.to_string())?.mu;
        let want = 1.0 / (n as f64).sqrt();
        ensure((mu - want).abs() <= 1e-9, || format!("N = {n}: mu = {mu}, expected {want}"))?;
        within_time(start.elapsed(), 1.0)?;
        notes.push(format!("N={n} K={} mu={mu:.12}", g.size()));
    }
    Ok(notes.join(", "))
}

fn coherence_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    for case in 0..100 {
        let n = 2 + case % 7;
        let g = grid(fit_grid(64, n));
        let psi = if case % 2 == 0 { fourier_basis(n, 1.0, &g) } else { spike_basis(n, 1.0, &g) }.unwrap();
        let a = random_unitary(n, &mut rng);
        let z: Vec<i64> = (0..n).map(|_| rng.random_range(-4..=4)).collect();
        let phi = unitary_mixed_basis(&psi, &a, &z, &g).unwrap();
        let mu = analog_coherence(&phi, &psi, &g).map_err(|e| format!("case {case}: {e}"))?.mu;
        let lower = 1.0 / (n as f64).sqrt();
        ensure(mu >= lower - 1e-9 && mu <= 1.0 + 1e-9, || format!("case {case}: mu = {mu} outside [{lower}, 1]"))?;
        lo = lo.min(mu * (n as f64).sqrt());
        hi = hi.max(mu);
    }
    within_time(start.elapsed(), 10.0)?;
    Ok(format!("100 pairs, min mu*sqrt(N) = {lo:.4}, max mu = {hi:.4}"))
}

fn tightness() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for n in [4usize, 9, 16] {
        let path = dir.path().join(format!("t{n}.json"));
        let args = ["sisparse", "demo-tightness", "--n", &n.to_string(), "--out", path.to_str().unwrap()];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(args, &mut out, &mut err);
        ensure(code == 0, || format!("N = {n}: exit {code}: {}", String::from_utf8_lossy(&err)))?;
        let r = Report::from_json(&std::fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
        let c = r.tightness.ok_or("no tightness block")?.check;
        let root = (n as f64).sqrt();
        ensure(c.a_count == n.isqrt() && c.b_count == n.isqrt(), || format!("N = {n}: A = {}, B = {}", c.a_count, c.b_count))?;
        ensure((c.geometric_mean - root).abs() <= 1e-9 && (c.arithmetic_mean - root).abs() <= 1e-9, || {
            format!("N = {n}: sqrt(AB) = {}, (A+B)/2 = {}", c.geometric_mean, c.arithmetic_mean)
        })?;
        ensure((c.bound - root).abs() <= 1e-9 && c.tight && c.satisfied, || format!("N = {n}: bound {}", c.bound))?;
        notes.push(format!("N={n} A=B={}", c.a_count));
    }
    within_time(start.elapsed(), 2.0)?;
    Ok(notes.join(", "))
}

fn cross_unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0f64;
    let mut pairs = 0;
    for n in 1..=8usize {
        let g = grid(fit_grid(64, n));
        let spike = spike_basis(n, 1.0, &g).unwrap();
        let fourier = fourier_basis(n, 1.0, &g).unwrap();
        let z: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let mixed_f = unitary_mixed_basis(&fourier, &random_unitary(n, &mut rng), &z, &g).unwrap();
        let mixed_s = unitary_mixed_basis(&spike, &common::scrambled_dft(n, &mut rng), &z, &g).unwrap();
        let square_frame = sinc_frame(n, n, 1.0, &g).unwrap();
        let banks: [(&str, &GeneratorBank); 5] =
            [("spike", &spike), ("fourier", &fourier), ("mixed fourier", &mixed_f), ("mixed spike", &mixed_s), ("sinc m=N", &square_frame)];
        for (i, (na, a)) in banks.iter().enumerate() {
            for (nb, b) in banks.iter().skip(i + 1) {
                let m = cross_spectrum(a, b, &g).unwrap();
                let dev = m.values().iter().map(unitary_deviation).fold(0.0, f64::max);
                ensure(dev <= 1e-9, || format!("N = {n}, {na} vs {nb}: deviation {dev:e}"))?;
                worst = worst.max(dev);
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs, max deviation {worst:.2e}"))
}

fn parseval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    for case in 0..20 {
        let n = rng.random_range(1..=5usize);
        let period = rng.random_range(0.5..3.0);
        let u = random_unitary(n, &mut rng);
        let z: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let seqs: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..=10usize);
                complex_gaussian(1, len, &mut rng).iter().copied().collect()
            })
            .collect();
        let g = grid(16);
        let spectral = signal_norm(&CoeffSpectra::from_sequences(&seqs, &g).unwrap(), &g);
        let brute = common::box_signal_norm(&seqs, &u, &z, period);
        let rel = (brute - spectral).abs() / spectral;
        ensure(rel <= 1e-6, || format!("case {case}: time {brute}, spectral {spectral}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("20 signals, max relative gap {worst:.2e}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    let mut by_k = [0usize; 4];
    while done < 120 {
        let (n, a) = if done % 2 == 0 {
            let n = rng.random_range(2..=6);
            (n, random_unitary(n, &mut rng))
        } else {
            let n = [4usize, 9, 16][rng.random_range(0..3)];
            (n, common::scrambled_dft(n, &mut rng))
        };
        let mu = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let k_max = ((2f64.sqrt() - 0.5) / mu).ceil() as usize - 1;
        if k_max == 0 {
            continue;
        }
        let k = rng.random_range(1..=k_max.min(3));
        let mut d = CMat::identity(n, 2 * n);
        d.columns_mut(n, n).copy_from(&a);
        let support = common::random_support(2 * n, k, &mut rng);
        let p = rng.random_range(1..=4);
        let rows = complex_gaussian(k, p, &mut rng);
        let mut gamma = CMat::zeros(2 * n, p);
        for (i, &s) in support.iter().enumerate() {
            gamma.row_mut(s).copy_from(&rows.row(i));
        }
        let prob = MmvProblem::new(d.clone(), &d * gamma).unwrap();
        let l1 = l1_mmv_solve(&prob, 1e-9, 50_000).map_err(|e| format!("instance {done}: {e}"))?;
        let l0 = l0_oracle(&prob, n).map_err(|e| format!("instance {done}: {e}"))?;
        ensure(l1.support == l0.support && l0.support == support, || {
            format!("instance {done}: l1 {:?}, l0 {:?}, planted {support:?}", l1.support, l0.support)
        })?;
        by_k[k] += 1;
        done += 1;
    }
    within_time(start.elapsed(), 60.0)?;
    Ok(format!("120 instances agree (k=1: {}, k=2: {}, k=3: {})", by_k[1], by_k[2], by_k[3]))
}

fn constant_recovery() -> Outcome {
    let start = Instant::now();
    let n = 16;
    let g = grid(256);
    let pair = spike_fourier_pair(n, 1.0, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0f64;
    for run in 0..60 {
        let (phi, psi) = if run % 2 == 0 {
            (pair.spike.clone(), pair.fourier.clone())
        } else {
            let z: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
            (unitary_mixed_basis(&pair.fourier, &common::scrambled_dft(n, &mut rng), &z, &g).unwrap(), pair.fourier.clone())
        };
        let mu = analog_coherence(&phi, &psi, &g).unwrap().mu;
        ensure((mu - 0.25).abs() < 1e-9, || format!("run {run}: mu = {mu}"))?;
        let k = rng.random_range(1..=3);
        let support = common::random_support(2 * n, k, &mut rng);
        let dict = two_onb_dictionary(&phi, &psi, &phi, &g).unwrap();
        let truth = common::planted(&support, 2 * n, 8, &g, &mut rng);
        let c = synthesize_samples(&dict, &truth).unwrap();
        let sol = decompose_two_onb_constant(&phi, &psi, &c, &g, &DecomposeOptions::default())
            .map_err(|e| format!("run {run}: {e}"))?;
        let err = common::relative_error(&sol.embed(), &truth);
        ensure(sol.support == support && err <= 1e-6, || {
            format!("run {run}: support {:?} vs {support:?}, error {err:e}", sol.support)
        })?;
        worst = worst.max(err);
    }
    within_time(start.elapsed(), 120.0)?;
    Ok(format!("60 problems at N=16, K=256, max relative error {worst:.2e}"))
}

/// Closed forms on `ω̃ ∈ (0, 2π]`: `W_l = e^{jω̃ l/N}`, `Z_r = e^{-jω̃ r/m}`.
/// A detected factorization may differ by constant diagonal scalings of
/// `W` and `Z` and a common scalar function, so the ratios to the closed
/// form must be constant in `ω` after removing the common part.
fn frame_pipeline() -> Outcome {
    let (n, m) = (4usize, 8usize);
    let g = grid(256);
    let h = spike_basis(n, 1.0, &g).unwrap();
    let d = sinc_frame(n, m, 1.0, &g).unwrap();
    let dict = cross_spectrum(&h, &d, &g).unwrap();
    let fact = detect_constant_structure(&dict, 2);
    ensure(fact.detected && fact.arc_count() == 1, || format!("detected {} with {} arcs", fact.detected, fact.arc_count()))?;
    let tau = std::f64::consts::TAU;
    let mut worst = 0f64;
    let mut base: Option<(Vec<C64>, Vec<C64>, C64)> = None;
    for i in 0..g.size() {
        let w = if i == 0 { tau } else { g.omega(i) };
        let rw: Vec<C64> = (0..n).map(|l| fact.w[i][l] / Complex64::from_polar(1.0, w * l as f64 / n as f64)).collect();
        let rz: Vec<C64> = (0..m).map(|r| fact.z[i][r] / Complex64::from_polar(1.0, -w * r as f64 / m as f64)).collect();
        let common_part = rw[0];
        let wn: Vec<C64> = rw.iter().map(|v| v / common_part).collect();
        let zn: Vec<C64> = rz.iter().map(|v| v * common_part).collect();
        let product = rw[0] * rz[0];
        match &base {
            None => base = Some((wn, zn, product)),
            Some((w0, z0, p0)) => {
                let dev = wn
                    .iter()
                    .zip(w0)
                    .chain(zn.iter().zip(z0))
                    .map(|(a, b)| (a - b).norm())
                    .fold((product - p0).norm(), f64::max);
                worst = worst.max(dev);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("W, Z differ from the closed form by {worst:e} beyond the gauge"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for run in 0..24 {
        let support = vec![run % m];
        let truth = common::planted(&support, m, 8, &g, &mut rng);
        let c = synthesize_samples(&dict, &truth).unwrap();
        let sol = decompose_frame(&d, &h, &c, &g, &DecomposeOptions::default()).map_err(|e| format!("run {run}: {e}"))?;
        let err = common::relative_error(&sol.embed(), &truth);
        ensure(sol.support == support && err <= 1e-6 && sol.diagnostics.uniqueness, || {
            format!("run {run}: support {:?}, error {err:e}, mu(A) {}", sol.support, sol.diagnostics.mu)
        })?;
    }
    Ok(format!("phase gauge deviation {worst:.2e}, 24 one-sparse signals exact"))
}

fn kruskal_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for n in 1..=6usize {
        let g = grid(fit_grid(24, n));
        let pair = spike_fourier_pair(n, 1.0, &g).unwrap();
        let m = cross_spectrum(&pair.spike, &pair.fourier, &g).unwrap();
        let mut blocks = vec![
            dft_matrix(n).scale(1.0 / (n as f64).sqrt()),
            random_unitary(n, &mut rng),
            common::scrambled_dft(n, &mut rng),
            m.at(1).clone(),
            m.at(g.size() / 2 + 1).clone(),
        ];
        blocks.push(random_unitary(n, &mut rng));
        for a in blocks {
            let mu = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut d = CMat::identity(n, 2 * n);
            d.columns_mut(n, n).copy_from(&a);
            let s = kruskal_rank(&d).map_err(|e| e.to_string())?;
            ensure(s as f64 >= 2.0 / mu - 1.0 - 1e-9, || format!("N = {n}: sigma = {s}, mu = {mu}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} dictionaries with N <= 6"))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"kind": "unitary_mixed", "n": 8, "k": 64, "seed": 1234, "planted": {"rows": [3, 12], "length": 6}}"#,
    )
    .unwrap();
    let mut bytes = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("r{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_sisparse"))
            .env_remove("SISPARSE_GRID_K")
            .args(["decompose", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        bytes.push(std::fs::read(&out).unwrap());
    }
    ensure(bytes[0] == bytes[1], || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", bytes[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("spike-Fourier coherence is 1/sqrt(N)", spike_fourier_coherence),
        ("coherence bounds for unitary-mixed pairs", coherence_bounds),
        ("LPF train meets the uncertainty bound with equality", tightness),
        ("cross-correlation spectra of orthonormal pairs are unitary", cross_unitarity),
        ("Parseval: time-domain norm equals coefficient norm", parseval),
        ("l1 and l0 supports agree below the coherence bound", oracle_equivalence),
        ("constant-case recovery at N = 16", constant_recovery),
        ("sinc-frame pipeline and closed-form factorization", frame_pipeline),
        ("Kruskal rank at least 2/mu - 1", kruskal_consistency),
        ("CLI reports are byte-identical across runs", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}; {secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
