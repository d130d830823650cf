//! Exact eigen-decomposition of a covariance updated by rank-one terms.
//!
//! With `A = V·diag(d)·Vᴴ`, the update `A ← λA + r rᴴ` becomes
//! `V·P·(λ·diag(d) + u uᵀ)·Pᴴ·Vᴴ` where `z = Vᴴ r`, `u = |z|` and `P` holds the
//! phases of `z`. The real diagonal-plus-rank-one core is solved through its
//! secular equation after deflating negligible and near-coincident entries;
//! eigenvectors use the Gu–Eisenstat recomputed weights so they stay
//! orthogonal to working precision.

use num_complex::Complex64;

use super::evd::{check_hermitian, hermitian_evd, HermitianEigen};
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{ensure, Result};

const MAX_ROOT_ITERATIONS: usize = 200;

/// Eigenpairs of `λA + r rᴴ` maintained across updates in `O(M³)` real
/// arithmetic per step (`O(M²)` for the eigenvalues), versus full Jacobi
/// re-diagonalization.
#[derive(Debug, Clone)]
pub struct EigenTracker {
    /// Eigenvalues in ascending order.
    values: Vec<f64>,
    /// Column `j` pairs with `values[j]`.
    vectors: ComplexMatrix,
}

impl EigenTracker {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        check_hermitian(a, "matrix")?;
        let e = hermitian_evd(a)?;
        let n = a.rows();
        let values: Vec<f64> = e.eigenvalues.iter().rev().copied().collect();
        let vectors = ComplexMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, n - 1 - c)]);
        Ok(Self { values, vectors })
    }

    /// Tracker for `δ·I`.
    pub fn scaled_identity(n: usize, delta: f64) -> Self {
        Self {
            values: vec![delta; n],
            vectors: ComplexMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Sorted descending, ties keeping ascending tracker order.
    pub fn eigen(&self) -> HermitianEigen {
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.values[j].total_cmp(&self.values[i]));
        HermitianEigen {
            eigenvalues: order.iter().map(|&i| self.values[i]).collect(),
            eigenvectors: ComplexMatrix::from_fn(n, n, |r, c| self.vectors[(r, order[c])]),
        }
    }

    /// The `d` dominant eigenvectors.
    pub fn principal(&self, d: usize) -> ComplexMatrix {
        let n = self.dim();
        assert!(d >= 1 && d <= n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.values[j].total_cmp(&self.values[i]));
        ComplexMatrix::from_fn(n, d, |r, c| self.vectors[(r, order[c])])
    }

    /// Applies `A ← λA + r rᴴ`.
    pub fn update(&mut self, lambda: f64, r: &[Complex64]) -> Result<()> {
        let n = self.dim();
        ensure!(
            r.len() == n,
            "update vector has length {} but the tracker is {n}-dimensional",
            r.len()
        );
        ensure!(lambda > 0.0, "forgetting factor must be positive");

        let z = self.vectors.adjoint_mul_vec(r);
        let mut d: Vec<f64> = self.values.iter().map(|v| v * lambda).collect();
        let mut u: Vec<f64> = z.iter().map(|x| x.norm()).collect();

        // absorb the phases of z into the basis: V ← V·P
        {
            let data = self.vectors.data_mut();
            for row in data.chunks_exact_mut(n) {
                for (x, zj) in row.iter_mut().zip(&z) {
                    let m = zj.norm();
                    if m > 0.0 {
                        *x *= zj / m;
                    }
                }
            }
        }

        let unorm2: f64 = u.iter().map(|x| x * x).sum();
        if unorm2 == 0.0 {
            self.values = d;
            return Ok(());
        }
        let unorm = unorm2.sqrt();
        let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 8.0 * f64::EPSILON * dmax.max(unorm2);

        // Deflation. `active` keeps indices with non-negligible weight and
        // well-separated poles, in ascending order of d.
        let mut active: Vec<usize> = Vec::with_capacity(n);
        for j in 0..n {
            if u[j] * unorm <= tol {
                u[j] = 0.0;
                continue;
            }
            if let Some(&p) = active.last() {
                let tau = u[p].hypot(u[j]);
                let c = u[j] / tau;
                let s = -u[p] / tau;
                if ((d[j] - d[p]) * c * s).abs() <= tol {
                    // rotate weight of p into j, leaving p decoupled
                    let (dp, dj) = (d[p], d[j]);
                    d[p] = c * c * dp + s * s * dj;
                    d[j] = s * s * dp + c * c * dj;
                    u[p] = 0.0;
                    u[j] = tau;
                    rotate_columns(&mut self.vectors, p, j, c, s);
                    active.pop();
                }
            }
            active.push(j);
        }
        active.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

        let k = active.len();
        let poles: Vec<f64> = active.iter().map(|&j| d[j]).collect();
        let weights: Vec<f64> = active.iter().map(|&j| u[j]).collect();
        let roots: Vec<Root> = (0..k)
            .map(|i| secular_root(&poles, &weights, i, unorm2))
            .collect();

        // Gu–Eisenstat: weights consistent with the computed roots
        let mut u_hat = vec![0.0; k];
        for j in 0..k {
            let gap = |i: usize| roots[i].minus_pole(&poles, j);
            let mut prod = gap(k - 1);
            for i in 0..j {
                prod *= gap(i) / (poles[i] - poles[j]);
            }
            for i in j..k - 1 {
                prod *= gap(i) / (poles[i + 1] - poles[j]);
            }
            u_hat[j] = prod.max(0.0).sqrt();
        }

        // eigenvectors of the secular core, mapped through the active columns
        let old_cols: Vec<Vec<Complex64>> =
            active.iter().map(|&j| self.vectors.column(j)).collect();
        for (i, root) in roots.iter().enumerate() {
            let mut w: Vec<f64> = (0..k)
                .map(|j| u_hat[j] / (-root.minus_pole(&poles, j)))
                .collect();
            let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in w.iter_mut() {
                *x /= wn;
            }
            let mut col = vec![ZERO; n];
            for (wj, c) in w.iter().zip(&old_cols) {
                for (o, x) in col.iter_mut().zip(c) {
                    *o += x * *wj;
                }
            }
            let target = active[i];
            self.vectors.set_column(target, &col);
            d[target] = root.value(&poles);
        }

        // keep ascending order
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        if order.iter().enumerate().any(|(i, &o)| i != o) {
            let v = &self.vectors;
            self.vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
            self.values = order.iter().map(|&i| d[i]).collect();
        } else {
            self.values = d;
        }
        Ok(())
    }
}

/// `V ← V·Gᵀ` on columns `p`, `j` with `G = [[c, s], [-s, c]]`.
fn rotate_columns(v: &mut ComplexMatrix, p: usize, j: usize, c: f64, s: f64) {
    let n = v.cols();
    for row in v.data_mut().chunks_exact_mut(n) {
        let x = row[p];
        let y = row[j];
        row[p] = x * c + y * s;
        row[j] = -x * s + y * c;
    }
}

/// A secular root stored as `pole[origin] + tau` so that root-minus-pole
/// differences keep full relative accuracy.
#[derive(Debug, Clone, Copy)]
struct Root {
    origin: usize,
    tau: f64,
}

impl Root {
    fn minus_pole(&self, poles: &[f64], j: usize) -> f64 {
        (poles[self.origin] - poles[j]) + self.tau
    }

    fn value(&self, poles: &[f64]) -> f64 {
        poles[self.origin] + self.tau
    }
}

/// `g(τ) = 1 + Σ u_j² / (δ_j − τ)` with `δ_j = pole_j − pole_origin`, and `g'`.
fn secular(poles: &[f64], weights: &[f64], origin: usize, tau: f64) -> (f64, f64) {
    let base = poles[origin];
    let mut g = 1.0;
    let mut dg = 0.0;
    for (p, w) in poles.iter().zip(weights) {
        let diff = (p - base) - tau;
        let t = w / diff;
        g += w * t;
        dg += t * t;
    }
    (g, dg)
}

/// Root `i` of `1 + Σ u_j²/(pole_j − μ)`, lying in `(pole_i, pole_{i+1})`, or
/// in `(pole_last, pole_last + ‖u‖²]` for the largest.
fn secular_root(poles: &[f64], weights: &[f64], i: usize, unorm2: f64) -> Root {
    let k = poles.len();
    let (origin, mut lo, mut hi) = if i + 1 == k {
        (i, 0.0, unorm2)
    } else {
        let width = poles[i + 1] - poles[i];
        let (g_mid, _) = secular(poles, weights, i, 0.5 * width);
        if g_mid >= 0.0 {
            (i, 0.0, 0.5 * width)
        } else {
            (i + 1, -0.5 * width, 0.0)
        }
    };
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERATIONS {
        let (g, dg) = secular(poles, weights, origin, tau);
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            hi = tau;
        } else {
            lo = tau;
        }
        let newton = tau - g / dg;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - tau).abs() <= 2.0 * f64::EPSILON * tau.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs())
        {
            tau = next;
            break;
        }
        tau = next;
    }
    Root { origin, tau }
}
