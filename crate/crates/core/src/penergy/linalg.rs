//! Linear solves for weighted Dirichlet Laplacians on terminal problems.
//!
//! Unknowns are the free vertices `1..n-1` of a collapsed problem graph,
//! stored at index `v - 1`. Edge weights are given per adjacency slot.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Largest free-vertex count solved by dense Cholesky.
pub(crate) const DENSE_LIMIT: usize = 400;

/// Dense lower Cholesky factor of a row-major SPD matrix, in place.
pub(crate) fn cholesky<S: Scalar>(a: &mut [S], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - a[j * n + k] * a[j * n + k];
        }
        if !(d > S::zero()) {
            return Err(Error::DomainError("matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solve `L Lᵀ x = b` given the factor from [`cholesky`].
pub(crate) fn cholesky_solve<S: Scalar>(l: &[S], n: usize, b: &mut [S]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Weighted Laplacian restricted to the free vertices of a terminal problem.
pub(crate) struct FreeLaplacian<'a, S> {
    graph: &'a Graph,
    weights: &'a [S],
    diag: Vec<S>,
}

impl<'a, S: Scalar> FreeLaplacian<'a, S> {
    pub(crate) fn new(graph: &'a Graph, weights: &'a [S]) -> Self {
        let k = graph.n() - 2;
        let diag = (1..=k)
            .map(|v| graph.adjacency_range(v).map(|e| weights[e]).sum())
            .collect();
        FreeLaplacian { graph, weights, diag }
    }

    fn size(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[S], y: &mut [S]) {
        let k = self.size();
        let targets = self.graph.raw_targets();
        for i in 0..k {
            let mut s = self.diag[i] * x[i];
            for e in self.graph.adjacency_range(i + 1) {
                let j = targets[e] as usize;
                if j >= 1 && j <= k {
                    s = s - self.weights[e] * x[j - 1];
                }
            }
            y[i] = s;
        }
    }

    fn dense(&self) -> Vec<S> {
        let k = self.size();
        let targets = self.graph.raw_targets();
        let mut a = vec![S::zero(); k * k];
        for i in 0..k {
            a[i * k + i] = self.diag[i];
            for e in self.graph.adjacency_range(i + 1) {
                let j = targets[e] as usize;
                if j >= 1 && j <= k {
                    a[i * k + j - 1] = a[i * k + j - 1] - self.weights[e];
                }
            }
        }
        a
    }

    /// Solve `A x = b`, `x` holding the initial guess. Returns the max-norm
    /// of the final residual.
    pub(crate) fn solve(&self, b: &[S], x: &mut [S], abs_tol: S) -> Result<S> {
        let k = self.size();
        if k == 0 {
            return Ok(S::zero());
        }
        if k <= DENSE_LIMIT {
            let mut a = self.dense();
            cholesky(&mut a, k)?;
            x.copy_from_slice(b);
            cholesky_solve(&a, k, x);
            let mut r = vec![S::zero(); k];
            self.apply(x, &mut r);
            return Ok(r
                .iter()
                .zip(b)
                .map(|(&ax, &bi)| (bi - ax).abs())
                .fold(S::zero(), S::max));
        }
        self.pcg(b, x, abs_tol)
    }

    /// Jacobi-preconditioned conjugate gradients.
    fn pcg(&self, b: &[S], x: &mut [S], abs_tol: S) -> Result<S> {
        let k = self.size();
        let max_norm = |v: &[S]| v.iter().fold(S::zero(), |m, &a| m.max(a.abs()));
        let dot = |a: &[S], b: &[S]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<S>();
        let mut r = vec![S::zero(); k];
        self.apply(x, &mut r);
        for i in 0..k {
            r[i] = b[i] - r[i];
        }
        let mut z: Vec<S> = r.iter().zip(&self.diag).map(|(&r, &d)| r / d).collect();
        let mut dir = z.clone();
        let mut q = vec![S::zero(); k];
        let mut rz = dot(&r, &z);
        let max_iter = (10 * k).max(1000);
        let mut best = max_norm(&r);
        for _ in 0..max_iter {
            if best <= abs_tol {
                break;
            }
            self.apply(&dir, &mut q);
            let dq = dot(&dir, &q);
            if !(dq > S::zero()) {
                break;
            }
            let alpha = rz / dq;
            for i in 0..k {
                x[i] = x[i] + alpha * dir[i];
                r[i] = r[i] - alpha * q[i];
            }
            best = max_norm(&r);
            for i in 0..k {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..k {
                dir[i] = z[i] + beta * dir[i];
            }
        }
        // Recompute the true residual; the recurrence drifts.
        self.apply(x, &mut q);
        Ok(q.iter()
            .zip(b)
            .map(|(&ax, &bi)| (bi - ax).abs())
            .fold(S::zero(), S::max))
    }
}

/// Inverse of a dense SPD matrix.
pub(crate) fn spd_inverse<S: Scalar>(mut a: Vec<S>, n: usize) -> Result<Vec<S>> {
    cholesky(&mut a, n)?;
    let mut inv = vec![S::zero(); n * n];
    let mut col = vec![S::zero(); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = S::zero());
        col[j] = S::one();
        cholesky_solve(&a, n, &mut col);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Ok(inv)
}
