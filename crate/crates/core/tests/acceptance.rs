//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{free, matrix_eigenvalues, trig};
use sturmkit::darboux::{shift_eigenvalue, shift_norming};
use sturmkit::forward::{char_w, find_eigenvalues, series_phi, spectral_data};
use sturmkit::inverse::{
    alpha_to_nu, global_reconstruct, nonlinear_norm, nu_to_alpha, reconstruct_even, reconstruct_general,
    tail_level, wdot_magnitude, ReconstructionOptions, SpectralTarget,
};
use sturmkit::potential::{fourier_analyze, lp_norm, parity_split};
use sturmkit::validate::{check_admissible, marchenko_tail_identity};
use sturmkit::GridFunction;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn grid(n_grid: usize, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(n_grid, f).expect("valid grid")
}

fn zero_potential() -> Outcome {
    let start = Instant::now();
    let data = spectral_data(&grid(512, |_| 0.0), 20).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    for e in &data {
        worst = worst
            .max((e.lambda - free(e.n)).abs())
            .max(e.nu.abs())
            .max((e.alpha - 1.0 / (2.0 * free(e.n))).abs());
    }
    ensure(worst <= 1e-8, format!("max deviation {worst:e}"))?;
    ensure(elapsed <= Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("max deviation {worst:.2e}, {:.3}s", elapsed.as_secs_f64()))
}

fn matrix_oracle() -> Outcome {
    let f = |x: f64| (2.0 * PI * x).cos();
    let oracle = matrix_eigenvalues(f, 1.0, 4);
    let got = find_eigenvalues(&grid(1024, f), 4).map_err(|e| e.to_string())?;
    let worst = got.iter().zip(&oracle).map(|(g, o)| (g - o).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-5, format!("max gap {worst:e}"))?;
    Ok(format!("max gap to 4096-node matrix {worst:.2e}"))
}

fn series_cross_validation() -> Outcome {
    let potentials = [
        grid(1024, |_| 1.0),
        grid(1024, |x| (2.0 * PI * x).cos()),
        grid(1024, |x| 2.0 * x * x + (4.0 * PI * x).sin()),
    ];
    let mut cases = 0;
    let mut worst_ratio: f64 = 0.0;
    for v in &potentials {
        let norm = lp_norm(v, 1.0).map_err(|e| e.to_string())?;
        ensure(norm <= 2.0, format!("‖v‖₁ = {norm} exceeds 2"))?;
        for k in 1..=3 {
            let lambda = free(k);
            let s = series_phi(v, lambda, 12).map_err(|e| e.to_string())?;
            let w = char_w(v, lambda).map_err(|e| e.to_string())?;
            let allowed = s.tail_bound.max(1e-7);
            let gap = (s.value - w).abs();
            ensure(gap <= allowed, format!("λ = {lambda}: gap {gap:e} > {allowed:e}"))?;
            worst_ratio = worst_ratio.max(gap / allowed);
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, worst gap/allowance {worst_ratio:.2e}"))
}

fn asymptotics() -> Outcome {
    let v = grid(1024, |x| (2.0 * PI * x).cos());
    let coeffs = fourier_analyze(&v, 32).map_err(|e| e.to_string())?;
    let data = spectral_data(&v, 32).map_err(|e| e.to_string())?;
    let sup = data
        .iter()
        .map(|e| e.n as f64 * (e.mu + coeffs.cos()[e.n - 1]).abs())
        .fold(0.0, f64::max);
    let norm = lp_norm(&v, 1.0).map_err(|e| e.to_string())?;
    let bound = 10.0 * norm * norm * norm.exp();
    ensure(sup <= bound, format!("sup {sup:e} > {bound:e}"))?;
    Ok(format!("sup n|μₙ + v̂ₙ| = {sup:.4e} ≤ {bound:.4}"))
}

fn quadratic_smallness() -> Outcome {
    let norm = |eps: f64| nonlinear_norm(&grid(1024, move |x| eps * (2.0 * PI * x).cos()), 32);
    let (a, b, c) = (
        norm(0.2).map_err(|e| e.to_string())?,
        norm(0.1).map_err(|e| e.to_string())?,
        norm(0.05).map_err(|e| e.to_string())?,
    );
    let (r1, r2) = (a / b, b / c);
    ensure((3.5..=4.5).contains(&r1), format!("ratio at 0.2: {r1}"))?;
    ensure((3.5..=4.5).contains(&r2), format!("ratio at 0.1: {r2}"))?;
    Ok(format!("ratios {r1:.4}, {r2:.4}"))
}

fn round_trip(f: impl Fn(f64) -> f64, general: bool) -> Result<(f64, usize), String> {
    let v = grid(1024, f);
    let target = SpectralTarget::from_potential(&v, 32, 2.0, general).map_err(|e| e.to_string())?;
    let opts = ReconstructionOptions::default();
    let (w, report) = if general {
        reconstruct_general(&target, &opts)
    } else {
        reconstruct_even(&target, &opts)
    }
    .map_err(|e| e.to_string())?;
    ensure(report.converged, "did not converge")?;
    Ok((w.l2_distance(&v).map_err(|e| e.to_string())?, report.iterations))
}

fn symmetric_round_trip() -> Outcome {
    let start = Instant::now();
    let amps = [0.5, -0.5, 0.25, -0.25];
    let mut worst: f64 = 0.0;
    let mut most = 0;
    for &a in &amps {
        for &b in &amps {
            let (err, iters) = round_trip(trig(&[(1, a), (2, b)], &[]), false)
                .map_err(|e| format!("a = {a}, b = {b}: {e}"))?;
            ensure(err <= 1e-4, format!("a = {a}, b = {b}: L² error {err:e}"))?;
            ensure(iters <= 200, format!("a = {a}, b = {b}: {iters} iterations"))?;
            worst = worst.max(err);
            most = most.max(iters);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(120), format!("took {elapsed:?}"))?;
    Ok(format!(
        "16 potentials, worst L² {worst:.2e}, max {most} iterations, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn general_family() -> Vec<(Vec<(usize, f64)>, Vec<(usize, f64)>)> {
    vec![
        (vec![], vec![(1, 0.2)]),
        (vec![(1, 0.3)], vec![(2, 0.2)]),
        (vec![(1, 0.5)], vec![(1, 0.5)]),
        (vec![(2, -0.5)], vec![(1, 0.5)]),
        (vec![(1, -0.25), (2, 0.25)], vec![(1, -0.5), (2, 0.25)]),
    ]
}

fn general_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    for (cos, sin) in general_family() {
        let (err, _) = round_trip(trig(&cos, &sin), true).map_err(|e| format!("{cos:?} {sin:?}: {e}"))?;
        ensure(err <= 1e-4, format!("{cos:?} {sin:?}: L² error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("{} potentials, worst L² {worst:.2e}", general_family().len()))
}

/// Largest off-target change over `m ≤ 8`, plus the error on the target itself.
fn moves(before: &GridFunction, after: &GridFunction, n: usize, t: f64, eigen: bool) -> Result<(f64, f64, f64), String> {
    let d0 = spectral_data(before, 8).map_err(|e| e.to_string())?;
    let d1 = spectral_data(after, 8).map_err(|e| e.to_string())?;
    let (mut lam, mut nu, mut hit): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (a, b) in d0.iter().zip(&d1) {
        let dl = b.lambda - a.lambda;
        let dn = b.nu - a.nu;
        if a.n == n && eigen {
            hit = hit.max((dl - t).abs());
            nu = nu.max(dn.abs());
        } else if a.n == n {
            hit = hit.max((dn - t).abs());
            lam = lam.max(dl.abs());
        } else {
            lam = lam.max(dl.abs());
            nu = nu.max(dn.abs());
        }
    }
    Ok((hit, lam, nu))
}

fn darboux_isospectrality() -> Outcome {
    let zero = grid(2048, |_| 0.0);
    let cosine = grid(2048, |x| (2.0 * PI * x).cos());
    let general = grid(2048, |x| (2.0 * PI * x).sin() + x);
    let mut notes = Vec::new();

    for (name, v, n, t) in [("v=0", &zero, 1, 1.0), ("v=0", &zero, 2, -2.0), ("sin+x", &general, 3, 4.0)] {
        let out = shift_eigenvalue(v, n, t).map_err(|e| e.to_string())?;
        let (hit, lam, nu) = moves(v, &out, n, t, true)?;
        ensure(hit <= 1e-6 && lam <= 1e-6, format!("{name} λ{n}+{t}: target {hit:e}, others {lam:e}"))?;
        ensure(nu <= 1e-5, format!("{name} λ{n}+{t}: norming moved {nu:e}"))?;
        if name == "v=0" {
            let odd = parity_split(&out).1.max_abs();
            ensure(odd <= 1e-8, format!("{name} λ{n}+{t}: odd part {odd:e}"))?;
        }
        notes.push(format!("λ{n}: {hit:.1e}/{lam:.1e}"));
    }
    for (name, v, n, t) in [("v=0", &zero, 1, 0.5), ("cos", &cosine, 2, -0.3), ("sin+x", &general, 1, 1.0)] {
        let out = shift_norming(v, n, t).map_err(|e| e.to_string())?;
        let (hit, lam, nu) = moves(v, &out, n, t, false)?;
        ensure(hit <= 1e-5 && nu <= 1e-5, format!("{name} ν{n}+{t}: target {hit:e}, others {nu:e}"))?;
        ensure(lam <= 1e-6, format!("{name} ν{n}+{t}: eigenvalues moved {lam:e}"))?;
        notes.push(format!("ν{n}: {hit:.1e}/{lam:.1e}"));
    }
    Ok(notes.join(", "))
}

fn global_pipeline() -> Outcome {
    let mut mu = vec![0.0; 8];
    mu[0] = 8.0;
    let target = SpectralTarget::new(2.0, 0.0, mu, None).map_err(|e| e.to_string())?;
    let direct = reconstruct_even(&target, &ReconstructionOptions::default()).map(|(_, r)| r.converged);
    let (v, report) = global_reconstruct(&target, 1, &ReconstructionOptions::default()).map_err(|e| e.to_string())?;
    let ev = find_eigenvalues(&v, 8).map_err(|e| e.to_string())?;
    let worst = (1..=8).map(|n| (ev[n - 1] - target.lambda(n)).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-5, format!("max eigenvalue error {worst:e}"))?;
    Ok(format!(
        "max eigenvalue error {worst:.2e}; direct iteration converged: {}; {} warnings",
        direct.unwrap_or(false),
        report.warnings.len()
    ))
}

fn conversion() -> Outcome {
    let v = grid(1024, |x| (2.0 * PI * x).cos() + (2.0 * PI * x).sin());
    let data = spectral_data(&v, 64).map_err(|e| e.to_string())?;
    let lambdas: Vec<f64> = data.iter().map(|e| e.lambda).collect();
    let level = tail_level(&lambdas);
    let mut worst: f64 = 0.0;
    for e in &data[..8] {
        let predicted = wdot_magnitude(&lambdas, e.n, level).map_err(|e| e.to_string())? * e.nu.exp();
        worst = worst.max((e.alpha - predicted).abs() / e.alpha);
    }
    ensure(worst <= 1e-4, format!("relative mismatch {worst:e}"))?;

    // Deterministic pseudo-random inputs for the algebraic round trip.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut round: f64 = 0.0;
    for _ in 0..20 {
        let lambdas: Vec<f64> = (1..=16).map(|n| free(n) + 4.0 * (next() - 0.5)).collect();
        let nus: Vec<f64> = (0..16).map(|_| 3.0 * (next() - 0.5)).collect();
        let alphas = nu_to_alpha(&lambdas, &nus).map_err(|e| e.to_string())?;
        let back = nu_to_alpha(&lambdas, &alpha_to_nu(&lambdas, &alphas).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for (a, b) in alphas.iter().zip(&back) {
            round = round.max((a - b).abs() / a);
        }
    }
    ensure(round <= 1e-10, format!("round trip {round:e}"))?;
    Ok(format!("αₙ vs |ẇ|e^νₙ {worst:.2e}, round trip {round:.1e}"))
}

fn tail_identity() -> Outcome {
    let families: [(&str, fn(usize) -> f64); 2] = [
        ("μ₁ = 1", |m| if m == 1 { 1.0 } else { 0.0 }),
        ("μₘ = 1/m²", |m| 1.0 / (m * m) as f64),
    ];
    let mut notes = Vec::new();
    for (name, f) in families {
        let at = |n: usize| marchenko_tail_identity(&(1..=n).map(f).collect::<Vec<_>>(), n);
        let r16 = at(16).map_err(|e| e.to_string())?;
        let r32 = at(32).map_err(|e| e.to_string())?;
        ensure(r16 <= 1e-3, format!("{name}: residual {r16:e} at N = 16"))?;
        ensure(r32 <= r16, format!("{name}: residual grew {r16:e} -> {r32:e}"))?;
        notes.push(format!("{name}: {r16:.1e} -> {r32:.1e}"));
    }
    Ok(notes.join(", "))
}

fn admissibility_gate() -> Outcome {
    let potentials: Vec<(Box<dyn Fn(f64) -> f64>, bool)> = vec![
        (Box::new(|_| 0.0), false),
        (Box::new(|x| (2.0 * PI * x).cos()), false),
        (Box::new(trig(&[(1, 0.3), (2, 0.1)], &[])), false),
        (Box::new(trig(&[(1, 0.3)], &[(2, 0.2)])), true),
        (Box::new(|x| (2.0 * PI * x).cos() + (2.0 * PI * x).sin()), true),
        (Box::new(|x| (2.0 * PI * x).sin() + x), true),
    ];
    let count = potentials.len();
    for (i, (f, general)) in potentials.into_iter().enumerate() {
        let v = grid(1024, f);
        let t = SpectralTarget::from_potential(&v, 32, 2.0, general).map_err(|e| e.to_string())?;
        let r = check_admissible(&t);
        ensure(r.admissible, format!("test potential {i} rejected: {:?}", r.notes))?;
    }
    let crossing = SpectralTarget::new(2.0, 0.0, vec![0.0, -3.0 * PI * PI - 1.0, 0.0, 0.0], None)
        .map_err(|e| e.to_string())?;
    let r = check_admissible(&crossing);
    ensure(!r.admissible && r.first_violation == Some(1), format!("crossing target: {r:?}"))?;
    let n = 8;
    let mut mu = vec![0.0; n];
    mu[n - 1] = 2.0 * PI * PI * n as f64 + PI * PI + 1.0;
    let boundary = SpectralTarget::new(2.0, 0.0, mu, None).map_err(|e| e.to_string())?;
    let r = check_admissible(&boundary);
    ensure(!r.admissible && r.first_violation == Some(n), format!("boundary target: {r:?}"))?;
    Ok(format!("{count} forward data sets admissible, both violations caught at 1 and {n}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("zero-potential exactness", zero_potential),
        ("matrix-oracle agreement", matrix_oracle),
        ("series-ODE cross-validation", series_cross_validation),
        ("eigenvalue asymptotics", asymptotics),
        ("quadratic smallness at the origin", quadratic_smallness),
        ("symmetric round trip", symmetric_round_trip),
        ("general round trip", general_round_trip),
        ("Darboux isospectrality", darboux_isospectrality),
        ("global head/tail pipeline", global_pipeline),
        ("normalizing/norming conversion", conversion),
        ("tail identity", tail_identity),
        ("admissibility gate", admissibility_gate),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
