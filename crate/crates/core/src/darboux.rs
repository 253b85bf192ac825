//! Darboux-type transforms that change exactly one spectral datum.
//!
//! [`shift_eigenvalue`] moves `λₙ` by `t` and keeps every other eigenvalue and
//! every norming constant. [`shift_norming`] moves `νₙ` by `t` and keeps the
//! whole spectrum. Both subtract `2 (log F)″` for a positive factor `F` whose
//! first two derivatives are known in closed form from Cauchy solutions, so no
//! numerical differentiation of the grid data takes place.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{find_eigenvalues, spectral_data, Propagator};
use crate::potential::{cumulative_simpson_from_right, simpson, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Eigenvalue,
    Norming,
}

/// Request to move datum `n` by `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRequest {
    pub n: usize,
    pub t: f64,
    pub kind: ShiftKind,
}

impl ShiftRequest {
    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        match self.kind {
            ShiftKind::Eigenvalue => shift_eigenvalue(v, self.n, self.t),
            ShiftKind::Norming => shift_norming(v, self.n, self.t),
        }
    }
}

/// Moves the `n`-th Dirichlet eigenvalue to `λₙ + t`.
///
/// Requires `λₙ₋₁ < λₙ + t < λₙ₊₁` (no lower neighbour for `n = 1`).
/// With `ξ` solving the equation at `λₙ + t`, `ξ(0) = 1`, `ξ(1) = 1/φ′(1, λₙ)`,
/// the Wronskian `W = ξφ′ − ξ′φ` satisfies `W′ = tξφ`, `W″ = t(ξ′φ + ξφ′)`,
/// and the result is `v − 2(W″/W − (W′/W)²)`.
pub fn shift_eigenvalue(v: &GridFunction, n: usize, t: f64) -> Result<GridFunction> {
    check_index(n)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("shift must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let lambdas = find_eigenvalues(v, n + 1)?;
    let lambda = lambdas[n - 1];
    let target = lambda + t;
    let lower = if n >= 2 { lambdas[n - 2] } else { f64::NEG_INFINITY };
    let upper = lambdas[n];
    if !(target > lower && target < upper) {
        return Err(Error::Hypothesis(format!(
            "lambda_{n} + t = {target} must lie in ({lower}, {upper})"
        )));
    }

    let prop = Propagator::new(v);
    let (phi, dphi) = prop.solve(lambda, 0.0, 1.0)?;
    let (y1, dy1) = prop.solve(target, 1.0, 0.0)?;
    let (y2, dy2) = prop.solve(target, 0.0, 1.0)?;
    let last = phi.len() - 1;
    let end = 1.0 / dphi[last];
    let c = (end - y1[last]) / y2[last];
    let xi: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + c * b).collect();
    let dxi: Vec<f64> = dy1.iter().zip(&dy2).map(|(a, b)| a + c * b).collect();

    let mut out = Vec::with_capacity(last + 1);
    let mut min_w = f64::INFINITY;
    for i in 0..=last {
        let w = xi[i] * dphi[i] - dxi[i] * phi[i];
        if !(w > 0.0) {
            return Err(Error::Positivity {
                what: "Wronskian",
                min: w,
                node: i,
            });
        }
        min_w = min_w.min(w);
        let w1 = t * xi[i] * phi[i];
        let w2 = t * (dxi[i] * phi[i] + xi[i] * dphi[i]);
        let r = w1 / w;
        out.push(v.samples()[i] - 2.0 * (w2 / w - r * r));
    }
    GridFunction::new(out)
}

/// Moves the `n`-th norming constant to `νₙ + t` keeping the spectrum.
///
/// Uses `θ(x) = 1 + (eᵗ − 1) ∫ₓ¹ ψₙ²` with `ψₙ` the normalized eigenfunction,
/// so `θ(1) = 1`, `θ(0) = eᵗ`, `θ′ = −(eᵗ − 1)ψₙ²`, `θ″ = −2(eᵗ − 1)ψₙψₙ′`,
/// and returns `v − 2(θ″/θ − (θ′/θ)²)`.
pub fn shift_norming(v: &GridFunction, n: usize, t: f64) -> Result<GridFunction> {
    check_index(n)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("shift must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let lambda = find_eigenvalues(v, n)?[n - 1];
    let (phi, dphi) = Propagator::new(v).solve(lambda, 0.0, 1.0)?;
    let sq: Vec<f64> = phi.iter().map(|p| p * p).collect();
    let alpha = simpson(&sq);
    let scale = 1.0 / alpha.sqrt();
    let tail = cumulative_simpson_from_right(&sq);
    let g = t.exp_m1();

    let mut out = Vec::with_capacity(phi.len());
    for i in 0..phi.len() {
        let psi = phi[i] * scale;
        let dpsi = dphi[i] * scale;
        let theta = 1.0 + g * tail[i] / alpha;
        if !(theta > 0.0) {
            return Err(Error::Positivity {
                what: "norming factor",
                min: theta,
                node: i,
            });
        }
        let d1 = -g * psi * psi;
        let d2 = -2.0 * g * psi * dpsi;
        let r = d1 / theta;
        out.push(v.samples()[i] - 2.0 * (d2 / theta - r * r));
    }
    GridFunction::new(out)
}

fn check_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("index n must be >= 1".into()));
    }
    Ok(())
}

/// Final values requested for the first few spectral data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeadTargets {
    /// `(n, λ*ₙ)` pairs.
    pub eigenvalues: Vec<(usize, f64)>,
    /// `(n, ν*ₙ)` pairs.
    pub norming: Vec<(usize, f64)>,
}

impl HeadTargets {
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty() && self.norming.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Retargeted {
    pub potential: GridFunction,
    pub steps: Vec<ShiftRequest>,
    pub warnings: Vec<String>,
}

/// Eigenvalues closer than this (relative) to their target are left alone.
const SETTLED: f64 = 1e-12;

/// Places the head of the spectrum and selected norming constants.
///
/// Eigenvalues `1..=K` (K the largest index that actually moves) are first
/// parked to the left in ascending order at `base − (K + 1 − n)Δ`, with
/// `base = min(λ₁, smallest target)` and `Δ = max(1, λ₂ − λ₁)`, and then moved to
/// their targets in descending order. Every individual shift therefore
/// satisfies the no-crossing hypothesis. Norming constants are set last;
/// eigenvalue shifts leave them unchanged.
pub fn retarget_head(v: &GridFunction, targets: &HeadTargets) -> Result<Retargeted> {
    let mut warnings = Vec::new();
    let mut steps = Vec::new();
    let mut current = v.clone();
    if targets.is_empty() {
        return Ok(Retargeted {
            potential: current,
            steps,
            warnings,
        });
    }
    for &(n, value) in targets.eigenvalues.iter().chain(&targets.norming) {
        check_index(n)?;
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("target for n = {n} is not finite")));
        }
    }

    let head = targets.eigenvalues.iter().map(|e| e.0).max().unwrap_or(0);
    if head > 0 {
        let lambdas = find_eigenvalues(&current, head + 1)?;
        let mut wanted = lambdas[..head].to_vec();
        for &(n, value) in &targets.eigenvalues {
            wanted[n - 1] = value;
        }
        if let Some(i) = (0..head).find(|&i| {
            let next = if i + 1 < head { wanted[i + 1] } else { lambdas[head] };
            !(wanted[i] < next)
        }) {
            return Err(Error::Inadmissible {
                first_violation: i + 1,
            });
        }
        let moving = (0..head)
            .filter(|&i| (wanted[i] - lambdas[i]).abs() > SETTLED * (1.0 + lambdas[i].abs()))
            .max();
        if let Some(last) = moving {
            let k = last + 1;
            let gap = lambdas[1] - lambdas[0];
            let delta = gap.max(1.0);
            let base = lambdas[0].min(wanted.iter().copied().fold(f64::INFINITY, f64::min));
            let mut position = lambdas.clone();
            let mut schedule = Vec::with_capacity(2 * k);
            for n in 1..=k {
                schedule.push((n, base - (k + 1 - n) as f64 * delta));
            }
            for n in (1..=k).rev() {
                schedule.push((n, wanted[n - 1]));
            }
            for (n, goal) in schedule {
                let t = goal - position[n - 1];
                if t == 0.0 {
                    continue;
                }
                let lower = if n >= 2 { position[n - 2] } else { f64::NEG_INFINITY };
                let upper = position[n];
                let room = (goal - lower).min(upper - goal);
                if room < 1e-3 * delta {
                    warnings.push(format!(
                        "step {}: lambda_{n} -> {goal} is within {room:.3e} of a neighbour",
                        steps.len() + 1
                    ));
                }
                let step = steps.len() + 1;
                current = shift_eigenvalue(&current, n, t).map_err(|e| e.at_step(step))?;
                steps.push(ShiftRequest {
                    n,
                    t,
                    kind: ShiftKind::Eigenvalue,
                });
                // Track positions by re-measuring: shifts are exact only up to discretization.
                let fresh = find_eigenvalues(&current, head + 1).map_err(|e| e.at_step(step))?;
                position = fresh;
            }
        }
    }

    if !targets.norming.is_empty() {
        let top = targets.norming.iter().map(|e| e.0).max().unwrap_or(1);
        let data = spectral_data(&current, top)?;
        for &(n, value) in &targets.norming {
            let t = value - data[n - 1].nu;
            if t.abs() <= 1e-14 {
                continue;
            }
            let step = steps.len() + 1;
            current = shift_norming(&current, n, t).map_err(|e| e.at_step(step))?;
            steps.push(ShiftRequest {
                n,
                t,
                kind: ShiftKind::Norming,
            });
        }
    }

    Ok(Retargeted {
        potential: current,
        steps,
        warnings,
    })
}
