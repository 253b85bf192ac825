//! Reconstruction of potentials from eigenvalue remainders and norming constants.
//!
//! The iteration works on raw trigonometric coefficients. With
//! `μ̃ₙ(v) = μₙ(v) + v̂ₙ` (the part of the remainder that is quadratic in `v`),
//! a potential realizes `μ*` exactly when `v̂ₙ = μ̃ₙ(v) − μ*ₙ`, which is the
//! update applied each sweep. Sine coefficients are corrected from the
//! linearization `νₙ ≈ b̂ₙ / (2πn)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::darboux::{retarget_head, HeadTargets};
use crate::error::{Error, Result};
use crate::forward::{spectral_data, Eigenpair};
use crate::potential::{fourier_analyze, fourier_synthesize, lp_norm, GridFunction, TrigSeries};

/// Target data for reconstruction: `λₙ = π²n² + mu0 + mu[n−1]` for `n ≤ N`,
/// optionally `2πn·νₙ = nu_scaled[n−1]`; everything beyond `N` is taken as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTarget {
    pub p: f64,
    #[serde(rename = "N")]
    pub count: usize,
    pub mu0: f64,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub nu_scaled: Option<Vec<f64>>,
}

impl SpectralTarget {
    pub fn new(p: f64, mu0: f64, mu: Vec<f64>, nu_scaled: Option<Vec<f64>>) -> Result<Self> {
        let target = Self {
            p,
            count: mu.len(),
            mu0,
            mu,
            nu_scaled,
        };
        target.check_shape()?;
        Ok(target)
    }

    /// Target reproducing the first `count` data of `v`.
    pub fn from_potential(v: &GridFunction, count: usize, p: f64, with_norming: bool) -> Result<Self> {
        let data = spectral_data(v, count)?;
        Ok(Self::from_pairs(p, v.integral(), &data, with_norming))
    }

    pub fn from_pairs(p: f64, mu0: f64, pairs: &[Eigenpair], with_norming: bool) -> Self {
        let nu = with_norming.then(|| {
            pairs
                .iter()
                .map(|e| 2.0 * PI * e.n as f64 * e.nu)
                .collect()
        });
        Self {
            p,
            count: pairs.len(),
            mu0,
            mu: pairs.iter().map(|e| e.mu).collect(),
            nu_scaled: nu,
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("target needs N >= 1".into()));
        }
        if self.mu.len() != self.count {
            return Err(Error::InvalidArgument(format!(
                "mu has {} entries, N = {}",
                self.mu.len(),
                self.count
            )));
        }
        if let Some(nu) = &self.nu_scaled {
            if nu.len() != self.count {
                return Err(Error::InvalidArgument(format!(
                    "nu_scaled has {} entries, N = {}",
                    nu.len(),
                    self.count
                )));
            }
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidArgument(format!("p must be >= 1, got {}", self.p)));
        }
        let finite = self.mu0.is_finite()
            && self.mu.iter().all(|x| x.is_finite())
            && self.nu_scaled.iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("target values must be finite".into()));
        }
        Ok(())
    }

    /// Target eigenvalue `n` (1-based), including the zero tail beyond `N`.
    pub fn lambda(&self, n: usize) -> f64 {
        let rem = if n <= self.count { self.mu[n - 1] } else { 0.0 };
        PI * PI * (n * n) as f64 + self.mu0 + rem
    }

    /// Target norming constant `n` (1-based), zero when absent.
    pub fn nu(&self, n: usize) -> f64 {
        match &self.nu_scaled {
            Some(s) if n <= self.count => s[n - 1] / (2.0 * PI * n as f64),
            _ => 0.0,
        }
    }

    pub fn has_norming(&self) -> bool {
        self.nu_scaled.is_some()
    }

    /// First `n` with `λₙ ≥ λₙ₊₁`, checked up to the boundary with the zero tail.
    pub fn first_violation(&self) -> Option<usize> {
        (1..=self.count).find(|&n| !(self.lambda(n) < self.lambda(n + 1)))
    }

    fn require_admissible(&self) -> Result<()> {
        self.check_shape()?;
        match self.first_violation() {
            Some(n) => Err(Error::Inadmissible { first_violation: n }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub damping: f64,
    pub n_grid: usize,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-10,
            damping: 1.0,
            n_grid: 1024,
        }
    }
}

impl ReconstructionOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        crate::potential::check_grid(self.n_grid)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations: usize,
    /// Per sweep: `max(maxₙ|μₙ − μ*ₙ|, maxₙ 2πn|νₙ − ν*ₙ|)` of the iterate entering the sweep.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// `maxₙ |λₙ(v) − λ*ₙ|` of the returned potential.
    pub forward_residual: f64,
    /// `maxₙ 2πn |νₙ(v) − ν*ₙ|` of the returned potential (zero when no norming targets).
    pub norming_residual: f64,
}

const DAMPING_FLOOR: f64 = 1.0 / 16.0;

/// Symmetric reconstruction from eigenvalue remainders only.
pub fn reconstruct_even(target: &SpectralTarget, opts: &ReconstructionOptions) -> Result<(GridFunction, RunReport)> {
    if let Some(nu) = &target.nu_scaled {
        if nu.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidArgument(
                "nonzero norming targets need the general reconstruction".into(),
            ));
        }
    }
    iterate(target, opts, false)
}

/// Reconstruction from eigenvalue remainders and scaled norming constants.
pub fn reconstruct_general(
    target: &SpectralTarget,
    opts: &ReconstructionOptions,
) -> Result<(GridFunction, RunReport)> {
    if target.nu_scaled.is_none() {
        return Err(Error::InvalidArgument("general reconstruction needs nu_scaled".into()));
    }
    iterate(target, opts, true)
}

/// Picks the even or general iteration from the presence of norming targets.
pub fn reconstruct(target: &SpectralTarget, opts: &ReconstructionOptions) -> Result<(GridFunction, RunReport)> {
    if target.has_norming() {
        reconstruct_general(target, opts)
    } else {
        reconstruct_even(target, opts)
    }
}

struct Sweep {
    series: TrigSeries,
    residual: f64,
    forward: f64,
    norming: f64,
}

fn iterate(target: &SpectralTarget, opts: &ReconstructionOptions, general: bool) -> Result<(GridFunction, RunReport)> {
    opts.check()?;
    target.require_admissible()?;
    let n = target.count;
    if 4 * n > opts.n_grid {
        return Err(Error::InvalidArgument(format!(
            "n_grid = {} cannot carry N = {n} coefficients (need >= {})",
            opts.n_grid,
            4 * n
        )));
    }
    let nu_star: Vec<f64> = (1..=n).map(|k| target.nu(k)).collect();
    let scale = |k: usize| 2.0 * PI * k as f64;

    let mut cos: Vec<f64> = target.mu.iter().map(|m| -m).collect();
    let mut sin: Vec<f64> = if general {
        target.nu_scaled.clone().unwrap_or_else(|| vec![0.0; n])
    } else {
        vec![0.0; n]
    };

    let mut report = RunReport::default();
    let mut damping = opts.damping;
    let mut rises = 0;
    let mut best: Option<Sweep> = None;
    let mut previous = f64::INFINITY;

    for _ in 0..opts.max_iter {
        let series = TrigSeries::new(target.mu0, cos.clone(), sin.clone())?;
        let v = fourier_synthesize(&series, opts.n_grid)?;
        let data = spectral_data(&v, n).map_err(|e| e.at_step(report.iterations + 1))?;
        report.iterations += 1;

        let forward = (0..n)
            .map(|i| (data[i].mu - target.mu[i]).abs())
            .fold(0.0, f64::max);
        let norming = if general {
            (0..n)
                .map(|i| scale(i + 1) * (data[i].nu - nu_star[i]).abs())
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let residual = forward.max(norming);
        report.residual_history.push(residual);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(Sweep {
                series: series.clone(),
                residual,
                forward,
                norming,
            });
        }

        if residual > previous {
            rises += 1;
            if rises >= 2 {
                damping = (0.5 * damping).max(DAMPING_FLOOR);
                rises = 0;
            }
        } else {
            rises = 0;
        }
        previous = residual;

        let mut change: f64 = 0.0;
        for i in 0..n {
            let tilde = data[i].mu + cos[i];
            let step = damping * ((tilde - target.mu[i]) - cos[i]);
            cos[i] += step;
            change = change.max(step.abs());
            if general {
                let step = damping * scale(i + 1) * (nu_star[i] - data[i].nu);
                sin[i] += step;
                change = change.max(step.abs());
            }
        }
        if change <= opts.tol {
            report.converged = true;
            let series = TrigSeries::new(target.mu0, cos, sin)?;
            let v = fourier_synthesize(&series, opts.n_grid)?;
            return finish(v, target, general, report);
        }
    }

    let best = best.expect("at least one sweep");
    report.warnings.push(format!(
        "no convergence in {} sweeps; returning the iterate with residual {:e} (final damping {damping})",
        opts.max_iter, best.residual
    ));
    report.forward_residual = best.forward;
    report.norming_residual = best.norming;
    let v = fourier_synthesize(&best.series, opts.n_grid)?;
    Ok((v, report))
}

/// Re-runs the forward solver on `v` and records the residuals against `target`.
fn finish(v: GridFunction, target: &SpectralTarget, norming: bool, mut report: RunReport) -> Result<(GridFunction, RunReport)> {
    let (forward, nu) = verify(&v, target)?;
    report.forward_residual = forward;
    report.norming_residual = if norming { nu } else { 0.0 };
    Ok((v, report))
}

/// `(maxₙ |λₙ(v) − λ*ₙ|, maxₙ 2πn |νₙ(v) − ν*ₙ|)` over `n ≤ N`.
pub fn verify(v: &GridFunction, target: &SpectralTarget) -> Result<(f64, f64)> {
    let data = spectral_data(v, target.count)?;
    let mut forward: f64 = 0.0;
    let mut nu: f64 = 0.0;
    for e in &data {
        forward = forward.max((e.lambda - target.lambda(e.n)).abs());
        nu = nu.max(2.0 * PI * e.n as f64 * (e.nu - target.nu(e.n)).abs());
    }
    Ok((forward, nu))
}

/// Head/tail pipeline: iterate on the target with its head removed, shift the
/// mean, then move the first `head` eigenvalues (and norming constants) into
/// place with Darboux transforms.
pub fn global_reconstruct(
    target: &SpectralTarget,
    head: usize,
    opts: &ReconstructionOptions,
) -> Result<(GridFunction, RunReport)> {
    target.require_admissible()?;
    if head > target.count {
        return Err(Error::InvalidArgument(format!(
            "head = {head} exceeds N = {}",
            target.count
        )));
    }

    let mut tail = target.clone();
    tail.mu0 = 0.0;
    for m in tail.mu.iter_mut().take(head) {
        *m = 0.0;
    }
    if let Some(nu) = tail.nu_scaled.as_mut() {
        for x in nu.iter_mut().take(head) {
            *x = 0.0;
        }
    }
    let (v, mut report) = reconstruct(&tail, opts).map_err(|e| e.in_stage("tail"))?;
    if !report.converged {
        report
            .warnings
            .push("tail stage did not converge; continuing with its best iterate".into());
    }

    let v = v.add_constant(target.mu0);

    let mut heads = HeadTargets::default();
    for n in 1..=head {
        heads.eigenvalues.push((n, target.lambda(n)));
        if target.has_norming() {
            heads.norming.push((n, target.nu(n)));
        }
    }
    let placed = retarget_head(&v, &heads).map_err(|e| e.in_stage("head"))?;
    report.warnings.extend(placed.warnings);

    let (forward, nu) = verify(&placed.potential, target).map_err(|e| e.in_stage("verify"))?;
    report.forward_residual = forward;
    report.norming_residual = if target.has_norming() { nu } else { 0.0 };
    Ok((placed.potential, report))
}

/// `F⁻¹M̃(v)`: the cosine synthesis `−2Σ μ̃ₙ cos 2πnx` of the nonlinear part of the remainders.
pub fn nonlinear_part(v: &GridFunction, count: usize) -> Result<GridFunction> {
    let data = spectral_data(v, count)?;
    let coeffs = fourier_analyze(v, count)?;
    let tilde: Vec<f64> = data
        .iter()
        .zip(coeffs.cos())
        .map(|(e, a)| -(e.mu + a))
        .collect();
    fourier_synthesize(&TrigSeries::even(0.0, tilde)?, v.n_grid())
}

/// L² norm of [`nonlinear_part`].
pub fn nonlinear_norm(v: &GridFunction, count: usize) -> Result<f64> {
    lp_norm(&nonlinear_part(v, count)?, 2.0)
}

/// Hadamard estimate of `|ẇ(λₙ)|` with its tail correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WdotEstimate {
    pub value: f64,
    /// Bound on the neglected second-order part of the tail log-sum.
    pub log_remainder: f64,
}

/// `|ẇ(λₙ)|` from the spectrum alone.
///
/// `lambdas[m−1] = λₘ` for `m ≤ M`; beyond `M` every `λₘ − π²m²` is taken to be
/// `mu_bar`.
pub fn wdot_magnitude(lambdas: &[f64], n: usize, mu_bar: f64) -> Result<f64> {
    Ok(wdot_estimate(lambdas, n, mu_bar)?.value)
}

pub fn wdot_estimate(lambdas: &[f64], n: usize, mu_bar: f64) -> Result<WdotEstimate> {
    let size = lambdas.len();
    if n == 0 || n > size {
        return Err(Error::InvalidArgument(format!(
            "index n = {n} outside 1..={size}"
        )));
    }
    if lambdas.iter().any(|x| !x.is_finite()) || !mu_bar.is_finite() {
        return Err(Error::InvalidArgument("eigenvalues must be finite".into()));
    }
    if let Some(i) = (1..size).find(|&i| !(lambdas[i] > lambdas[i - 1])) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues must be strictly increasing; fails at m = {}",
            i + 1
        )));
    }
    let pi2 = PI * PI;
    let ln = lambdas[n - 1];
    let mut log_sum = 0.0;
    for (i, &lm) in lambdas.iter().enumerate() {
        let m = i + 1;
        if m == n {
            continue;
        }
        let free = pi2 * ((m * m) as f64 - (n * n) as f64);
        log_sum += ((lm - ln) / free).ln();
    }

    // Σ_{m>M} 1/(m² − n²) = (1/2n) Σ_{j=M−n+1}^{M+n} 1/j.
    let tail_sum: f64 = ((size + 1 - n)..=(size + n)).map(|j| 1.0 / j as f64).sum::<f64>() / (2.0 * n as f64);
    let c = (mu_bar - (ln - pi2 * (n * n) as f64)) / pi2;
    log_sum += c * tail_sum;
    let first = ((size + 1) * (size + 1) - n * n) as f64;
    let x_max = c.abs() / first;
    let log_remainder = if x_max < 0.5 {
        c * c * tail_sum / first
    } else {
        f64::INFINITY
    };

    let value = log_sum.exp() / (2.0 * pi2 * (n * n) as f64);
    Ok(WdotEstimate {
        value,
        log_remainder,
    })
}

/// Asymptotic level of `λₘ − π²m²` estimated from the top quarter of the data.
pub fn tail_level(lambdas: &[f64]) -> f64 {
    let size = lambdas.len();
    let start = size - (size / 4).max(1);
    let pi2 = PI * PI;
    let sum: f64 = (start..size)
        .map(|i| lambdas[i] - pi2 * ((i + 1) * (i + 1)) as f64)
        .sum();
    sum / (size - start) as f64
}

fn check_aligned(lambdas: &[f64], other: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty eigenvalue sequence".into()));
    }
    if lambdas.len() != other.len() {
        return Err(Error::InvalidArgument(format!(
            "sequence lengths differ: {} eigenvalues, {} constants",
            lambdas.len(),
            other.len()
        )));
    }
    Ok(())
}

/// `νₙ = log αₙ − log |ẇ(λₙ)|`.
pub fn alpha_to_nu(lambdas: &[f64], alphas: &[f64]) -> Result<Vec<f64>> {
    check_aligned(lambdas, alphas)?;
    if let Some(i) = alphas.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "alpha_{} = {} must be positive",
            i + 1,
            alphas[i]
        )));
    }
    let level = tail_level(lambdas);
    alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| Ok(a.ln() - wdot_magnitude(lambdas, i + 1, level)?.ln()))
        .collect()
}

/// `αₙ = |ẇ(λₙ)| e^{νₙ}`.
pub fn nu_to_alpha(lambdas: &[f64], nus: &[f64]) -> Result<Vec<f64>> {
    check_aligned(lambdas, nus)?;
    if nus.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("norming constants must be finite".into()));
    }
    let level = tail_level(lambdas);
    nus.iter()
        .enumerate()
        .map(|(i, &nu)| Ok(wdot_magnitude(lambdas, i + 1, level)? * nu.exp()))
        .collect()
}
