//! Admissibility and consistency diagnostics at finite truncation.
//!
//! Membership of infinite tails in sequence spaces cannot be decided from
//! finitely many numbers; the decay figures reported here are heuristics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::find_eigenvalues;
use crate::inverse::SpectralTarget;
use crate::potential::{fourier_analyze, fourier_synthesize, lp_norm, GridFunction, TrigSeries};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub admissible: bool,
    pub first_violation: Option<usize>,
    /// `maxₙ n·|μₙ + v̂ₙ|` when a potential was examined.
    pub decay_constant: Option<f64>,
    /// Residual of the tail identity when it was evaluated.
    pub identity_residual: Option<f64>,
    pub notes: Vec<String>,
}

/// Strict ordering of the target eigenvalues, including the step from `N` to the zero tail.
pub fn check_admissible(target: &SpectralTarget) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err(e) = target.check_shape() {
        report.notes.push(e.to_string());
        report.first_violation = Some(1);
        return report;
    }
    report.first_violation = target.first_violation();
    report.admissible = report.first_violation.is_none();
    if let Some(n) = report.first_violation {
        report.notes.push(format!(
            "lambda_{n} = {} is not below lambda_{} = {}",
            target.lambda(n),
            n + 1,
            target.lambda(n + 1)
        ));
    }
    report
}

/// Measures how fast `μₙ + v̂ₙ` decays: reports `maxₙ≤N n·|μₙ + v̂ₙ|` and notes
/// when it exceeds `10 ‖v‖₁² e^{‖v‖₁}`.
pub fn asymptotic_decay_check(v: &GridFunction, count: usize) -> Result<ValidationReport> {
    let lambdas = find_eigenvalues(v, count)?;
    let coeffs = fourier_analyze(v, count)?;
    let decay = decay_constant(&lambdas, &coeffs);
    let norm = lp_norm(v, 1.0)?;
    let bound = 10.0 * norm * norm * norm.exp();

    let target = SpectralTarget::new(
        1.0,
        coeffs.a0,
        lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| l - PI * PI * ((i + 1) * (i + 1)) as f64 - coeffs.a0)
            .collect(),
        None,
    )?;
    let mut report = check_admissible(&target);
    if !report.admissible {
        report
            .notes
            .push("computed spectrum does not join the zero tail; truncation too short".into());
    }
    report.decay_constant = Some(decay);
    if decay > bound {
        report.notes.push(format!(
            "decay constant {decay:e} exceeds 10·‖v‖₁²·exp(‖v‖₁) = {bound:e}"
        ));
    }
    report.notes.push("decay diagnostics are heuristic at finite N".into());
    Ok(report)
}

fn decay_constant(lambdas: &[f64], coeffs: &TrigSeries) -> f64 {
    lambdas
        .iter()
        .zip(coeffs.cos())
        .enumerate()
        .map(|(i, (l, a))| {
            let n = (i + 1) as f64;
            let mu = l - PI * PI * n * n - coeffs.a0;
            n * (mu + a).abs()
        })
        .fold(0.0, f64::max)
}

/// Compares the two sides of the tail identity
/// `(1/2π)[Σ_{m≠n}(1/(m−n) − 1/(m+n))μₘ − μₙ/(2n)] = ∫(½ − x) f(x) sin 2πnx dx`
/// with `f = −2 Σ μₘ cos 2πmx`, and returns the largest discrepancy over `n ≤ N/2`.
pub fn marchenko_tail_identity(mu: &[f64], count: usize) -> Result<f64> {
    if mu.len() != count || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected {count} >= 1 remainders, got {}",
            mu.len()
        )));
    }
    if mu.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("remainders must be finite".into()));
    }
    let inner = 4 * count;
    let coeff = |m: usize| if m <= count { mu[m - 1] } else { 0.0 };
    let n_grid = (64 * count).max(256);

    let f = fourier_synthesize(
        &TrigSeries::even(0.0, mu.iter().map(|m| -m).collect())?,
        n_grid,
    )?;
    let weighted = GridFunction::from_fn(n_grid, |x| 0.5 - x)?;
    let product = GridFunction::new(
        f.samples()
            .iter()
            .zip(weighted.samples())
            .map(|(a, b)| a * b)
            .collect(),
    )?;
    let right = fourier_analyze(&product, count)?;

    let half = (count / 2).max(1);
    let mut worst: f64 = 0.0;
    for n in 1..=half {
        let mut sum = 0.0;
        for m in 1..=inner {
            if m != n {
                sum += (1.0 / (m as f64 - n as f64) - 1.0 / (m + n) as f64) * coeff(m);
            }
        }
        let left = (sum - coeff(n) / (2.0 * n as f64)) / (2.0 * PI);
        worst = worst.max((left - right.sin()[n - 1]).abs());
    }
    Ok(worst)
}
