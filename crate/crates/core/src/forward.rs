//! Direct problem: Cauchy solutions of `−y″ + v y = λ y`, the characteristic
//! function `w(λ) = φ(1, λ)`, the Dirichlet spectrum and the per-eigenvalue
//! data `(λₙ, μₙ, νₙ, αₙ)`.
//!
//! The integrator is a fourth-order Magnus scheme on the potential's own grid.
//! Each step exponentiates a traceless 2×2 matrix in closed form, so constant
//! potentials (and `v = 0` in particular) are propagated exactly. The potential
//! is read at the two Gauss points of every interval through a local cubic
//! interpolant of the grid samples.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Probe, Result};
use crate::potential::{fourier_analyze, lp_norm, simpson, GridFunction};

/// Largest |λ| accepted by the integrator.
pub const LAMBDA_LIMIT: f64 = 1e8;

/// Grid nodes required per oscillation wavelength.
const NODES_PER_WAVELENGTH: f64 = 16.0;

/// Relative width of the certified bracket around every eigenvalue.
pub const BRACKET_TOL: f64 = 1e-10;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Solution of the Cauchy problem at spectral parameter `lambda`.
#[derive(Debug, Clone)]
pub struct CauchySolution {
    pub lambda: f64,
    pub y: GridFunction,
    pub dy: GridFunction,
}

/// One spectral record of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub n: usize,
    pub lambda: f64,
    /// `λₙ − π²n² − ∫v`.
    pub mu: f64,
    /// `log((−1)ⁿ φ′(1, λₙ))`.
    pub nu: f64,
    /// `∫ φ(·, λₙ)²`.
    pub alpha: f64,
    /// `φ̇(1, λₙ) φ′(1, λₙ)`, an independent estimate of `alpha`. Not serialized.
    #[serde(skip_serializing, default)]
    pub alpha_cross: f64,
}

/// Spectral data file: `{ "p", "N", "pairs": [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub p: f64,
    #[serde(rename = "N")]
    pub count: usize,
    pub pairs: Vec<Eigenpair>,
}

impl SpectralData {
    pub fn new(p: f64, pairs: Vec<Eigenpair>) -> Self {
        Self {
            p,
            count: pairs.len(),
            pairs,
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|e| e.lambda).collect()
    }
}

/// Outcome of [`find_eigenvalues_report`].
#[derive(Debug, Clone, Serialize)]
pub struct EigenSearch {
    pub eigenvalues: Vec<f64>,
    /// Probes used to bracket the eigenvalues, sorted by `lambda`.
    pub probes: Vec<Probe>,
    /// Whether the midpoint probes failed and node-count bisection was used.
    pub fallback: bool,
    /// Characteristic-function evaluations spent in refinement.
    pub refine_evaluations: usize,
}

/// Value and certified tail bound of the truncated iterated-integral series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// End-point state of a shot plus the number of interior sign changes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shot {
    pub y: f64,
    pub nodes: usize,
}

/// Potential values at the Gauss points of every grid interval.
pub(crate) struct Propagator {
    h: f64,
    gauss: Vec<(f64, f64)>,
}

impl Propagator {
    pub fn new(v: &GridFunction) -> Self {
        let n = v.n_grid();
        let s = v.samples();
        let c1 = 0.5 - SQRT3 / 6.0;
        let c2 = 0.5 + SQRT3 / 6.0;
        let gauss = (0..n)
            .map(|i| {
                let j0 = i.saturating_sub(1).min(n - 3);
                let off = (i - j0) as f64;
                let w1 = lagrange4(off + c1);
                let w2 = lagrange4(off + c2);
                let at = |w: [f64; 4]| (0..4).map(|k| w[k] * s[j0 + k]).sum::<f64>();
                (at(w1), at(w2))
            })
            .collect();
        Self {
            h: v.step(),
            gauss,
        }
    }

    fn n_grid(&self) -> usize {
        self.gauss.len()
    }

    fn check(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() || lambda.abs() > LAMBDA_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "|lambda| must be finite and <= {LAMBDA_LIMIT:e}, got {lambda}"
            )));
        }
        let required = required_grid(lambda);
        if self.n_grid() < required {
            return Err(Error::Resolution {
                lambda,
                required,
                actual: self.n_grid(),
            });
        }
        Ok(())
    }

    #[inline]
    fn step(&self, i: usize, lambda: f64, y: f64, dy: f64) -> (f64, f64) {
        let h = self.h;
        let (v1, v2) = self.gauss[i];
        let qbar = 0.5 * (v1 + v2) - lambda;
        let a = SQRT3 / 12.0 * h * h * (v1 - v2);
        let s2 = a * a + h * h * qbar;
        let (c, s) = exp_coeffs(s2);
        (
            (c + s * a) * y + s * h * dy,
            s * h * qbar * y + (c - s * a) * dy,
        )
    }

    /// Shoots from x = 0 and returns the state at x = 1.
    pub fn shoot(&self, lambda: f64, y0: f64, dy0: f64) -> Result<Shot> {
        self.check(lambda)?;
        let (mut y, mut dy) = (y0, dy0);
        let mut nodes = 0;
        let mut last_sign = 0.0;
        let n = self.n_grid();
        for i in 0..n {
            (y, dy) = self.step(i, lambda, y, dy);
            if i + 1 < n && y != 0.0 {
                let sg = y.signum();
                if last_sign != 0.0 && sg != last_sign {
                    nodes += 1;
                }
                last_sign = sg;
            }
        }
        if !(y.is_finite() && dy.is_finite()) {
            return Err(Error::UnsupportedDomain(format!(
                "Cauchy solution overflows at lambda = {lambda}"
            )));
        }
        Ok(Shot { y, nodes })
    }

    pub fn w(&self, lambda: f64) -> Result<f64> {
        Ok(self.shoot(lambda, 0.0, 1.0)?.y)
    }

    /// Full solution at all nodes.
    pub fn solve(&self, lambda: f64, y0: f64, dy0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(lambda)?;
        let n = self.n_grid();
        let mut ys = Vec::with_capacity(n + 1);
        let mut dys = Vec::with_capacity(n + 1);
        let (mut y, mut dy) = (y0, dy0);
        ys.push(y);
        dys.push(dy);
        for i in 0..n {
            (y, dy) = self.step(i, lambda, y, dy);
            ys.push(y);
            dys.push(dy);
        }
        if !(y.is_finite() && dy.is_finite()) {
            return Err(Error::UnsupportedDomain(format!(
                "Cauchy solution overflows at lambda = {lambda}"
            )));
        }
        Ok((ys, dys))
    }

    /// `ẇ(λ)` by central differences with one Richardson extrapolation.
    pub fn w_dot(&self, lambda: f64) -> Result<f64> {
        let h = 1e-4 * (1.0 + lambda.abs());
        let d = |h: f64| -> Result<f64> {
            Ok((self.w(lambda + h)? - self.w(lambda - h)?) / (2.0 * h))
        };
        let coarse = d(h)?;
        let fine = d(0.5 * h)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

/// Weights of the cubic through nodes 0, 1, 2, 3 evaluated at `t`.
fn lagrange4(t: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        for m in 0..4 {
            if m != k {
                *wk *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
    }
    w
}

/// `exp(Ω) = c·I + s·Ω` for a traceless 2×2 `Ω` with `Ω² = s2·I`.
#[inline]
fn exp_coeffs(s2: f64) -> (f64, f64) {
    if s2.abs() < 1e-6 {
        // Taylor to s2³; truncation below 1e-24.
        let c = 1.0 + s2 * (0.5 + s2 * (1.0 / 24.0 + s2 / 720.0));
        let s = 1.0 + s2 * (1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 / 5040.0));
        (c, s)
    } else if s2 > 0.0 {
        let r = s2.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-s2).sqrt();
        (r.cos(), r.sin() / r)
    }
}

/// Smallest `n_grid` resolving the oscillation at `lambda`.
pub fn required_grid(lambda: f64) -> usize {
    (NODES_PER_WAVELENGTH * lambda.max(1.0).sqrt() / (2.0 * PI)).ceil() as usize
}

pub fn integrate_cauchy(v: &GridFunction, lambda: f64, y0: f64, dy0: f64) -> Result<CauchySolution> {
    let (ys, dys) = Propagator::new(v).solve(lambda, y0, dy0)?;
    Ok(CauchySolution {
        lambda,
        y: GridFunction::new(ys)?,
        dy: GridFunction::new(dys)?,
    })
}

/// `w(λ, v) = φ(1, λ, v)` for the solution with `φ(0) = 0`, `φ′(0) = 1`.
pub fn char_w(v: &GridFunction, lambda: f64) -> Result<f64> {
    Propagator::new(v).w(lambda)
}

/// Partial sum `Σ_{k≤K} φₖ(1, λ)` of the iterated-integral expansion together
/// with the bound `Σ_{k>K} ‖v‖₁ᵏ / (k! λ^{(k+1)/2})` on the omitted terms.
///
/// Each `φₖ(x) = ∫₀ˣ φ₀(x − t) φₖ₋₁(t) v(t) dt` is evaluated by grid quadrature,
/// so the cost is `O(K · n_grid²)`. Intended as an independent check of [`char_w`].
pub fn series_phi(v: &GridFunction, lambda: f64, order: usize) -> Result<SeriesValue> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::UnsupportedDomain(format!(
            "series bound needs lambda > 0, got {lambda}"
        )));
    }
    let n = v.n_grid();
    let h = v.step();
    let k = lambda.sqrt();
    let kernel: Vec<f64> = (0..=n).map(|d| (k * d as f64 * h).sin() / k).collect();
    let mut prev = kernel.clone();
    let mut value = prev[n];
    let mut g = vec![0.0; n + 1];
    let mut next = vec![0.0; n + 1];
    for _ in 0..order {
        for ((gj, &pj), &vj) in g.iter_mut().zip(&prev).zip(v.samples()) {
            *gj = pj * vj;
        }
        for (i, out) in next.iter_mut().enumerate() {
            *out = partial_quadrature(i, h, |j| kernel[i - j] * g[j]);
        }
        std::mem::swap(&mut prev, &mut next);
        value += prev[n];
    }

    let u = lp_norm(v, 1.0)? / k;
    let mut term = 1.0;
    for j in 1..=order {
        term *= u / j as f64;
    }
    let mut tail = 0.0;
    let mut j = order + 1;
    loop {
        term *= u / j as f64;
        tail += term;
        if term <= 1e-18 * tail || term == 0.0 || j > order + 400 {
            break;
        }
        j += 1;
    }
    Ok(SeriesValue {
        value,
        tail_bound: tail / k,
    })
}

/// `∫₀^{x_i} f` from node values: Simpson panels, closing with a 3/8 panel when `i` is odd.
fn partial_quadrature(i: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    match i {
        0 => 0.0,
        1 => 0.5 * h * (f(0) + f(1)),
        _ => {
            let even_end = if i.is_multiple_of(2) { i } else { i - 3 };
            let mut acc = 0.0;
            if even_end > 0 {
                acc += f(0) + f(even_end);
                for j in 1..even_end {
                    acc += if j % 2 == 1 { 4.0 * f(j) } else { 2.0 * f(j) };
                }
                acc *= h / 3.0;
            }
            if even_end < i {
                let j = even_end;
                acc += 3.0 * h / 8.0 * (f(j) + 3.0 * f(j + 1) + 3.0 * f(j + 2) + f(j + 3));
            }
            acc
        }
    }
}

/// The `count` smallest Dirichlet eigenvalues.
pub fn find_eigenvalues(v: &GridFunction, count: usize) -> Result<Vec<f64>> {
    Ok(find_eigenvalues_report(v, count)?.eigenvalues)
}

/// [`find_eigenvalues`] with the bracketing diagnostics.
///
/// Probes sit at `π²(k+½)² + ∫v`, `k = 0..=count`. The probe pattern is accepted
/// when the probe below eigenvalue `k+1` shows `(−1)ᵏ` sign and exactly `k`
/// interior nodes. Otherwise brackets come from bisection on the node count
/// (Sturm oscillation) between `min v + π²/2` and `max v + π²(count+½)²`.
pub fn find_eigenvalues_report(v: &GridFunction, count: usize) -> Result<EigenSearch> {
    if count == 0 {
        return Err(Error::InvalidArgument("eigenvalue count must be >= 1".into()));
    }
    let prop = Propagator::new(v);
    let coeffs = fourier_analyze(v, count.min(v.n_grid() / 4))?;
    let mean = coeffs.a0;

    let top = PI * PI * (count as f64 + 0.5).powi(2) + v.max().max(mean);
    prop.check(top)?;

    let mut probes = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let lambda = PI * PI * (k as f64 + 0.5).powi(2) + mean;
        let shot = prop.shoot(lambda, 0.0, 1.0)?;
        probes.push(Probe {
            lambda,
            w: shot.y,
            nodes: shot.nodes,
        });
    }
    let pattern_ok = probes.iter().enumerate().all(|(k, p)| {
        let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
        p.nodes == k && p.w != 0.0 && p.w.signum() == expected
    });

    let (brackets, fallback) = if pattern_ok {
        let b = (1..=count)
            .map(|n| (probes[n - 1], probes[n]))
            .collect::<Vec<_>>();
        (b, false)
    } else {
        (count_brackets(&prop, v, count, &mut probes)?, true)
    };

    let refined: Vec<Result<(f64, usize)>> = brackets
        .par_iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let n = i + 1;
            let a_n = coeffs.cos().get(i).copied().unwrap_or(0.0);
            let guess = PI * PI * (n * n) as f64 + mean - a_n;
            refine(&prop, *lo, *hi, guess)
        })
        .collect();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut evaluations = 0;
    for r in refined {
        let (lambda, evals) = r?;
        eigenvalues.push(lambda);
        evaluations += evals;
    }
    probes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if eigenvalues.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Bracketing {
            message: "refined eigenvalues are not strictly increasing".into(),
            probes,
        });
    }
    Ok(EigenSearch {
        eigenvalues,
        probes,
        fallback,
        refine_evaluations: evaluations,
    })
}

fn count_brackets(
    prop: &Propagator,
    v: &GridFunction,
    count: usize,
    probes: &mut Vec<Probe>,
) -> Result<Vec<(Probe, Probe)>> {
    let probe = |lambda: f64, table: &mut Vec<Probe>| -> Result<Probe> {
        let shot = prop.shoot(lambda, 0.0, 1.0)?;
        let p = Probe {
            lambda,
            w: shot.y,
            nodes: shot.nodes,
        };
        table.push(p);
        Ok(p)
    };
    let lo = probe(v.min() + 0.5 * PI * PI, probes)?;
    let hi = probe(v.max() + PI * PI * (count as f64 + 0.5).powi(2), probes)?;
    if lo.nodes != 0 || hi.nodes < count {
        return Err(Error::Bracketing {
            message: format!(
                "node counts {} and {} at the search limits do not enclose {count} eigenvalues",
                lo.nodes, hi.nodes
            ),
            probes: probes.clone(),
        });
    }

    let mut brackets = Vec::with_capacity(count);
    for n in 1..=count {
        // Tightest known points with fewer than n and at least n nodes.
        let mut a = *probes
            .iter()
            .filter(|p| p.nodes < n)
            .max_by(|x, y| x.lambda.total_cmp(&y.lambda))
            .expect("lower limit has zero nodes");
        let mut b = *probes
            .iter()
            .filter(|p| p.nodes >= n)
            .min_by(|x, y| x.lambda.total_cmp(&y.lambda))
            .expect("upper limit has enough nodes");
        let mut iter = 0;
        while !(a.nodes == n - 1 && b.nodes == n) {
            iter += 1;
            if iter > 200 || b.lambda - a.lambda <= 1e-12 * (1.0 + b.lambda.abs()) {
                return Err(Error::Bracketing {
                    message: format!("could not isolate eigenvalue {n} by node count"),
                    probes: probes.clone(),
                });
            }
            let mid = probe(0.5 * (a.lambda + b.lambda), probes)?;
            if mid.nodes < n {
                a = mid;
            } else {
                b = mid;
            }
        }
        let expected = if n % 2 == 1 { 1.0 } else { -1.0 };
        if a.w.signum() != expected || b.w.signum() != -expected {
            return Err(Error::Bracketing {
                message: format!("sign of w inconsistent with node count around eigenvalue {n}"),
                probes: probes.clone(),
            });
        }
        brackets.push((a, b));
    }
    Ok(brackets)
}

/// Safeguarded Newton on `w` inside a sign-change bracket.
fn refine(prop: &Propagator, lo: Probe, hi: Probe, guess: f64) -> Result<(f64, usize)> {
    let (mut a, mut b, mut fa) = (lo.lambda, hi.lambda, lo.w);
    let evals = std::cell::Cell::new(0usize);
    let w = |x: f64| -> Result<f64> {
        evals.set(evals.get() + 1);
        prop.w(x)
    };
    let mut x = if guess > a && guess < b {
        guess
    } else {
        0.5 * (a + b)
    };
    for _ in 0..200 {
        let fx = w(x)?;
        if fx == 0.0 {
            return Ok((x, evals.get()));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let tol = BRACKET_TOL * (1.0 + x.abs());
        if b - a <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return Ok((x, evals.get()));
        }
        let delta = 1e-7 * (1.0 + x.abs());
        let d = (w(x + delta)? - w(x - delta)?) / (2.0 * delta);
        let mut next = x - fx / d;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) {
            // Converged: certify a narrow bracket around the estimate.
            let eps = 0.1 * tol;
            let (l, r) = (next - eps, next + eps);
            let (fl, fr) = (w(l)?, w(r)?);
            if fl.signum() != fr.signum() {
                return Ok((next, evals.get()));
            }
            if fl.signum() == fa.signum() {
                a = l.max(a);
                fa = fl;
            } else {
                b = r.min(b);
            }
            next = 0.5 * (a + b);
        }
        x = next;
    }
    Err(Error::Bracketing {
        message: format!("refinement did not converge in [{a}, {b}]"),
        probes: vec![lo, hi],
    })
}

/// Eigenvalues with remainders, norming constants and normalizing constants.
pub fn spectral_data(v: &GridFunction, count: usize) -> Result<Vec<Eigenpair>> {
    let lambdas = find_eigenvalues(v, count)?;
    let mean = v.integral();
    let prop = Propagator::new(v);
    lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let n = i + 1;
            let (y, dy) = prop.solve(lambda, 0.0, 1.0)?;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let slope = dy[dy.len() - 1];
            if !(sign * slope > 0.0) {
                return Err(Error::Consistency(format!(
                    "(-1)^n phi'(1) = {} <= 0 at n = {n}, lambda = {lambda}",
                    sign * slope
                )));
            }
            let sq: Vec<f64> = y.iter().map(|t| t * t).collect();
            let alpha = simpson(&sq);
            let alpha_cross = prop.w_dot(lambda)? * slope;
            Ok(Eigenpair {
                n,
                lambda,
                mu: lambda - PI * PI * (n * n) as f64 - mean,
                nu: (sign * slope).ln(),
                alpha,
                alpha_cross,
            })
        })
        .collect()
}
