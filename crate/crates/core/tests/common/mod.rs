//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `π² n²`.
pub fn free(n: usize) -> f64 {
    PI * PI * (n * n) as f64
}

/// Fourth-order finite differences for `−y″ + v y` with Dirichlet ends.
///
/// Interior nodes `x_i = i h`, `h = 1/(nodes + 1)`; the stencil
/// `(y₋₂ − 16y₋₁ + 30y₀ − 16y₁ + y₂)/(12h²)` reaches one node past each end,
/// where the odd reflection `y(−h) = −y(h)` closes it. The result is a
/// symmetric pentadiagonal matrix stored by its three diagonals.
pub struct FdMatrix {
    diag: Vec<f64>,
    off1: Vec<f64>,
    off2: Vec<f64>,
}

impl FdMatrix {
    pub fn new(nodes: usize, v: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / (nodes + 1) as f64;
        let s = 1.0 / (12.0 * h * h);
        let mut diag: Vec<f64> = (1..=nodes).map(|i| 30.0 * s + v(i as f64 * h)).collect();
        diag[0] -= s;
        diag[nodes - 1] -= s;
        Self {
            diag,
            off1: vec![-16.0 * s; nodes - 1],
            off2: vec![s; nodes - 2],
        }
    }

    /// Eigenvalues below `sigma`, from the inertia of `A − σI = L D Lᵀ`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        // l1[i] = L[i][i-1], l2[i] = L[i][i-2]
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        let mut negative = 0;
        for i in 0..n {
            let mut di = self.diag[i] - sigma;
            if i >= 2 {
                l2[i] = self.off2[i - 2] / d[i - 2];
                di -= l2[i] * l2[i] * d[i - 2];
            }
            if i >= 1 {
                let mut a = self.off1[i - 1];
                if i >= 2 {
                    a -= l2[i] * l1[i - 1] * d[i - 2];
                }
                l1[i] = a / d[i - 1];
                di -= l1[i] * l1[i] * d[i - 1];
            }
            if di == 0.0 {
                di = f64::EPSILON * (1.0 + sigma.abs());
            }
            if di < 0.0 {
                negative += 1;
            }
            d[i] = di;
        }
        negative
    }

    /// The `k`-th smallest eigenvalue (1-based) by bisection on the inertia count.
    pub fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        assert!(self.count_below(lo) < k && self.count_below(hi) >= k);
        while hi - lo > 1e-12 * (1.0 + hi.abs()) {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The first `count` eigenvalues of the 4096-node matrix for `v` with `|v| ≤ bound`.
pub fn matrix_eigenvalues(v: impl Fn(f64) -> f64, bound: f64, count: usize) -> Vec<f64> {
    let m = FdMatrix::new(4096, v);
    (1..=count)
        .map(|k| m.eigenvalue(k, -bound - 1.0, free(k) + bound + 1.0))
        .collect()
}

/// `a cos 2πx + b cos 4πx` style test family member.
pub fn trig(cos: &[(usize, f64)], sin: &[(usize, f64)]) -> impl Fn(f64) -> f64 {
    let cos = cos.to_vec();
    let sin = sin.to_vec();
    move |x| {
        cos.iter().map(|&(k, a)| a * (2.0 * PI * k as f64 * x).cos()).sum::<f64>()
            + sin.iter().map(|&(k, b)| b * (2.0 * PI * k as f64 * x).sin()).sum::<f64>()
    }
}
