//! p-energy, p-gradient, p-Laplacian and the p-Dirichlet solver.
//!
//! Conventions: `E_p(f) = Σ_{edges} m·|f(x) − f(y)|^p` with every undirected
//! edge counted once, `∇_p f(x, y) = |f(y) − f(x)|^{p−2}(f(y) − f(x))` on
//! oriented edges and `Δ_p f(x) = Σ_{y∼x} m·|f(x) − f(y)|^{p−2}(f(x) − f(y))`.

mod linalg;
mod solver;

pub use solver::{
    max_resistance, p_resistance, p_resistance_with, solve_potential, FlowResult, InitialGuess, MaxResistanceOptions,
    Potential, SolverConfig,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// `sign(d)·|d|^e`, continuous at zero for `e > 0`.
#[inline]
pub(crate) fn signed_pow<S: Scalar>(d: S, e: S) -> S {
    if d == S::zero() {
        S::zero()
    } else {
        d.signum() * d.abs().powf(e)
    }
}

fn check_len<S>(graph: &Graph, f: &[S]) -> Result<()> {
    if f.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: f.len(),
        });
    }
    Ok(())
}

fn check_p<S: Scalar>(p: S, min: S, strict: bool) -> Result<()> {
    let bad = if strict { !(p > min) } else { !(p >= min) };
    if bad || !p.is_finite() {
        return Err(Error::DomainError(format!(
            "p = {p} must be {} {min}",
            if strict { ">" } else { "≥" }
        )));
    }
    Ok(())
}

/// E_p(f), each undirected edge counted once with its multiplicity.
pub fn p_energy<S: Scalar>(graph: &Graph, f: &[S], p: S) -> Result<S> {
    check_len(graph, f)?;
    check_p(p, S::one(), false)?;
    Ok(graph
        .edges()
        .map(|(u, v, m)| S::of_u64(m as u64) * (f[u] - f[v]).abs().powf(p))
        .sum())
}

/// ∇_p f on the oriented edge (x, y).
pub fn p_gradient<S: Scalar>(f: &[S], x: usize, y: usize, p: S) -> S {
    signed_pow(f[y] - f[x], p - S::one())
}

/// Δ_p f at every vertex.
pub fn p_laplacian<S: Scalar>(graph: &Graph, f: &[S], p: S) -> Result<Vec<S>> {
    check_len(graph, f)?;
    check_p(p, S::one(), true)?;
    let e = p - S::one();
    Ok((0..graph.n())
        .map(|x| {
            graph
                .neighbors(x)
                .map(|(y, m)| S::of_u64(m as u64) * signed_pow(f[x] - f[y], e))
                .sum()
        })
        .collect())
}

/// Discrepancy in the discrete Stokes identity on `set`:
/// `|Σ_{a∈A} Δ_p f(a) + Σ_{e∈∂^E A} ∇_p f(ē)|`, ē oriented out of A.
///
/// Δ_p = −div ∇_p, so the sum of Δ_p over A is the flux of −∇_p out of A.
pub fn stokes_check<S: Scalar>(graph: &Graph, f: &[S], p: S, set: &[usize]) -> Result<S> {
    let lap = p_laplacian(graph, f, p)?;
    let mask = graph.mask(set)?;
    let inside: S = (0..graph.n()).filter(|&v| mask[v]).map(|v| lap[v]).sum();
    let outward: S = (0..graph.n())
        .filter(|&a| mask[a])
        .flat_map(|a| {
            graph
                .neighbors(a)
                .filter(|&(y, _)| !mask[y])
                .map(move |(y, m)| (a, y, m))
        })
        .map(|(a, y, m)| S::of_u64(m as u64) * p_gradient(f, a, y, p))
        .sum();
    Ok((inside + outward).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(m: usize) -> Graph {
        Graph::from_edges(m + 1, (0..m).map(|i| (i, i + 1, 1))).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(p_energy::<f64>(&path(1), &[1.0, 0.0], 2.0).unwrap(), 1.0);
        let e = p_energy::<f64>(&path(3), &[1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0], 3.0).unwrap();
        assert!((e - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(p_energy::<f64>(&path(3), &[0.3; 4], 2.5).unwrap(), 0.0);
        assert!(matches!(
            p_energy::<f64>(&path(3), &[0.0; 3], 2.0),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn energy_counts_multiplicity() {
        let g = Graph::from_edges(2, vec![(0, 1, 3)]).unwrap();
        assert_eq!(p_energy::<f32>(&g, &[2.0, 0.0], 2.0).unwrap(), 12.0);
    }

    #[test]
    fn laplacian_examples() {
        let lap = p_laplacian(&path(2), &[0.0, 1.0, 2.0], 2.0).unwrap();
        assert_eq!(lap[1], 0.0);
        let star = Graph::from_edges(5, (1..5).map(|i| (0, i, 1))).unwrap();
        let lap = p_laplacian(&star, &[1.0, 0.0, 0.0, 0.0, 0.0], 3.0).unwrap();
        assert_eq!(lap[0], 4.0);
        assert!(p_laplacian(&star, &[0.7; 5], 1.5).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_orientation() {
        let f = [1.0, 0.0];
        assert_eq!(p_gradient(&f, 0, 1, 3.0), -1.0);
        assert_eq!(p_gradient(&f, 1, 0, 3.0), 1.0);
    }

    #[test]
    fn stokes_on_path_and_constant() {
        let g = path(4);
        let f = [0.3, -1.2, 2.0, 0.5, 0.25];
        assert!(stokes_check(&g, &f, 2.5, &[1, 2]).unwrap() < 1e-12);
        assert_eq!(stokes_check(&g, &[1.0; 5], 2.5, &[0, 1]).unwrap(), 0.0);
    }
}
