use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, TerminalProblem};
use crate::penergy::linalg::{spd_inverse, FreeLaplacian};
use crate::penergy::{check_p, p_energy, signed_pow};
use crate::scalar::Scalar;

/// Starting point for the nonlinear solver.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess<S> {
    /// The p = 2 potential scaled to the source value.
    Harmonic,
    /// t/2 on every free vertex.
    Constant,
    /// Explicit values on every vertex of the problem graph; terminal
    /// entries are overwritten.
    Values(Vec<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<S> {
    /// Relative tolerance: max free |Δ_p f| ≤ tol · (total current).
    pub tol: S,
    pub max_iter: usize,
    /// Regularisation continuation, relative to the source value.
    pub eps_start: S,
    pub eps_end: S,
    pub init: InitialGuess<S>,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        let eps_end = if S::epsilon() < S::of(1e-12) { 1e-10 } else { 1e-4 };
        SolverConfig {
            tol: S::default_tolerance(),
            max_iter: 500,
            eps_start: S::of(1e-2),
            eps_end: S::of(eps_end),
            init: InitialGuess::Harmonic,
        }
    }
}

/// Minimiser of E_p on a terminal problem with f = t on the source and 0 on
/// the ground. `values` is indexed by problem-graph vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential<S> {
    pub values: Vec<S>,
    pub p: S,
    pub t: S,
    pub energy: S,
    /// max |Δ_p f| over free vertices.
    pub residual: S,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult<S> {
    pub resistance: S,
    pub capacity: S,
    /// Net p-current leaving the source, Δ_p f(source) for the unit potential.
    pub total_current: S,
    /// Source value t of the potential carrying unit current.
    pub unit_current_t: S,
    /// Largest relative defect among C_p = 1, E_p = t and R_p = t^{p−1}
    /// for the unit-current potential.
    pub identity_defect: S,
    pub potential: Potential<S>,
}

impl<S: Scalar + Serialize> Potential<S> {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("potential serialises")
    }
}

impl<S: Scalar + Serialize> FlowResult<S> {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flow result serialises")
    }
}

/// Net flux m·|f(x) − f(y)|^{p−2}(f(x) − f(y)) out of `x`, ignoring
/// differences at the roundoff floor.
fn flux_out<S: Scalar>(graph: &Graph, f: &[S], x: usize, e: S, floor: S) -> S {
    graph
        .neighbors(x)
        .map(|(y, m)| {
            let d = f[x] - f[y];
            if d.abs() <= floor {
                S::zero()
            } else {
                S::of_u64(m as u64) * signed_pow(d, e)
            }
        })
        .sum()
}

/// Largest free-vertex imbalance and the amount it may reach.
///
/// For p < 2 the current m|δ|^{p−1} is not Lipschitz at δ = 0, so edges
/// between vertices that the exact potential puts at the same level carry
/// roundoff currents far above any tolerance. Edges whose current is below
/// tol·scale/(2 deg x) are dropped at x and the remaining imbalance must stay
/// under tol·scale/2, which bounds the true imbalance by tol·scale. The
/// tolerance is also raised to the current that potential noise of size
/// 1024·ε·t produces at a vertex of maximal degree, since nothing finer is
/// resolvable.
fn judged_residual<S: Scalar>(graph: &Graph, f: &[S], p: S, tol: S, scale: S, floor: S) -> (S, S) {
    let pm1 = p - S::one();
    let k = graph.n() - 2;
    if p >= S::of(2.0) {
        let r = (1..=k)
            .map(|x| flux_out(graph, f, x, pm1, floor).abs())
            .fold(S::zero(), S::max);
        return (r, tol * scale);
    }
    let t = f[0];
    let noise = S::of_u64(graph.max_degree()) * (S::of(1024.0) * S::epsilon() * t).powf(pm1);
    let half = (tol * scale).max(noise) / S::of(2.0);
    let r = (1..=k)
        .map(|x| {
            let cut = half / S::of_u64(graph.degree(x));
            graph
                .neighbors(x)
                .map(|(y, m)| {
                    let d = f[x] - f[y];
                    let c = S::of_u64(m as u64) * signed_pow(d, pm1);
                    if d.abs() <= floor || c.abs() <= cut {
                        S::zero()
                    } else {
                        c
                    }
                })
                .sum::<S>()
                .abs()
        })
        .fold(S::zero(), S::max);
    (r, half)
}

struct Nonlinear<'a, S> {
    graph: &'a Graph,
    p: S,
    floor: S,
}

impl<S: Scalar> Nonlinear<'_, S> {
    /// (1/p) Σ m (δ² + ε²)^{p/2}.
    fn objective(&self, f: &[S], eps: S) -> S {
        let half_p = self.p / S::of(2.0);
        let e2 = eps * eps;
        self.graph
            .edges()
            .map(|(u, v, m)| {
                let d = f[u] - f[v];
                S::of_u64(m as u64) * (d * d + e2).powf(half_p)
            })
            .sum::<S>()
            / self.p
    }

    fn gradient(&self, f: &[S], eps: S, g: &mut [S]) {
        let pm1 = self.p - S::one();
        let half = (self.p - S::of(2.0)) / S::of(2.0);
        let e2 = eps * eps;
        for (i, gi) in g.iter_mut().enumerate() {
            let x = i + 1;
            *gi = if eps == S::zero() {
                flux_out(self.graph, f, x, pm1, self.floor)
            } else {
                self.graph
                    .neighbors(x)
                    .map(|(y, m)| {
                        let d = f[x] - f[y];
                        S::of_u64(m as u64) * (d * d + e2).powf(half) * d
                    })
                    .sum()
            };
        }
    }

    /// Per-slot Hessian weights m (δ² + ε²)^{(p−4)/2} ((p−1)δ² + ε²).
    fn hessian_weights(&self, f: &[S], eps: S, w: &mut [S]) {
        let targets = self.graph.raw_targets();
        let mult = self.graph.raw_mult();
        let pm1 = self.p - S::one();
        let expo = (self.p - S::of(4.0)) / S::of(2.0);
        let e2 = eps * eps;
        for x in 0..self.graph.n() {
            for s in self.graph.adjacency_range(x) {
                let d = f[x] - f[targets[s] as usize];
                let d2 = d * d;
                w[s] = S::of_u64(mult[s] as u64) * (d2 + e2).powf(expo) * (pm1 * d2 + e2);
            }
        }
    }
}

fn max_abs<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |m, &a| m.max(a.abs()))
}

/// Unit-weight harmonic extension of f(source) = t, f(ground) = 0.
fn harmonic<S: Scalar>(graph: &Graph, t: S, abs_tol: S) -> Result<(Vec<S>, S)> {
    let n = graph.n();
    let k = n - 2;
    let w: Vec<S> = graph.raw_mult().iter().map(|&m| S::of_u64(m as u64)).collect();
    let sys = FreeLaplacian::new(graph, &w);
    let mut b = vec![S::zero(); k];
    for (y, m) in graph.neighbors(0) {
        if (1..=k).contains(&y) {
            b[y - 1] = b[y - 1] + S::of_u64(m as u64) * t;
        }
    }
    let mut x = vec![t / S::of(2.0); k];
    let res = sys.solve(&b, &mut x, abs_tol)?;
    let mut f = Vec::with_capacity(n);
    f.push(t);
    f.extend(x);
    f.push(S::zero());
    Ok((f, res))
}

/// p-potential with source value `t`.
pub fn solve_potential<S: Scalar>(
    problem: &TerminalProblem,
    p: S,
    t: S,
    cfg: &SolverConfig<S>,
) -> Result<Potential<S>> {
    check_p(p, S::one(), true)?;
    if !(t > S::zero()) || !t.is_finite() {
        return Err(Error::DomainError(format!("source value {t} must be positive")));
    }
    let graph = &problem.graph;
    let n = graph.n();
    let k = n - 2;
    let floor = S::of(64.0) * S::epsilon() * t;
    let pm1 = p - S::one();
    let finish = |mut f: Vec<S>, iterations: usize| -> Result<Potential<S>> {
        for v in f.iter_mut().take(n - 1).skip(1) {
            *v = v.max(S::zero()).min(t);
        }
        let scale = flux_out(graph, &f, 0, pm1, floor).abs().max(S::min_positive_value());
        let (residual, allowed) = judged_residual(graph, &f, p, cfg.tol, scale, floor);
        if !(residual <= allowed) {
            return Err(Error::NonConvergence {
                iterations,
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(Potential {
            energy: p_energy(graph, &f, p)?,
            values: f,
            p,
            t,
            residual,
            iterations,
        })
    };

    let lin_tol = cfg.tol * S::of(1e-3) * t;
    if p == S::of(2.0) {
        let (f, _) = harmonic(graph, t, lin_tol)?;
        return finish(f, 1);
    }

    let mut f = match &cfg.init {
        InitialGuess::Harmonic => harmonic(graph, t, lin_tol)?.0,
        InitialGuess::Constant => {
            let mut f = vec![t / S::of(2.0); n];
            f[0] = t;
            f[n - 1] = S::zero();
            f
        }
        InitialGuess::Values(v) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            let mut f: Vec<S> = v.iter().map(|x| x.max(S::zero()).min(t)).collect();
            f[0] = t;
            f[n - 1] = S::zero();
            f
        }
    };
    if k == 0 {
        return finish(f, 0);
    }

    let nl = Nonlinear { graph, p, floor };
    let mut stages = Vec::new();
    let mut eps = cfg.eps_start;
    while eps > cfg.eps_end {
        stages.push(eps * t);
        eps = eps / S::of(10.0);
    }
    stages.push(cfg.eps_end * t);
    stages.push(S::zero());
    let eps_hess = cfg.eps_end * t;

    let mut g = vec![S::zero(); k];
    let mut w = vec![S::zero(); graph.raw_targets().len()];
    let mut d = vec![S::zero(); k];
    let mut trial = f.clone();
    let mut iterations = 0;
    let slack = S::of(64.0) * S::epsilon();
    for (si, &eps) in stages.iter().enumerate() {
        let last = si + 1 == stages.len();
        let stage_tol = if last {
            cfg.tol
        } else {
            cfg.tol.max(eps / t * S::of(1e-2))
        };
        loop {
            nl.gradient(&f, eps, &mut g);
            let gnorm = max_abs(&g);
            if last {
                // Stop on the same test `finish` applies.
                let scale = flux_out(graph, &f, 0, pm1, floor).abs().max(S::min_positive_value());
                let (r, allowed) = judged_residual(graph, &f, p, cfg.tol, scale, floor);
                if r <= allowed {
                    break;
                }
            } else {
                let scale = flux_out(graph, &f, 0, pm1, S::zero())
                    .abs()
                    .max(S::min_positive_value());
                if gnorm <= stage_tol * scale {
                    break;
                }
            }
            if iterations >= cfg.max_iter {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: gnorm.to_f64_lossy(),
                });
            }
            iterations += 1;
            nl.hessian_weights(&f, if eps > S::zero() { eps } else { eps_hess }, &mut w);
            let sys = FreeLaplacian::new(graph, &w);
            let rhs: Vec<S> = g.iter().map(|&x| -x).collect();
            d.iter_mut().for_each(|x| *x = S::zero());
            sys.solve(&rhs, &mut d, gnorm * S::of(1e-6))?;

            let j0 = nl.objective(&f, eps);
            let slope: S = g.iter().zip(&d).map(|(&a, &b)| a * b).sum();
            let mut alpha = S::one();
            let mut accepted = false;
            for _ in 0..60 {
                for i in 0..k {
                    trial[i + 1] = (f[i + 1] + alpha * d[i]).max(S::zero()).min(t);
                }
                let j1 = nl.objective(&trial, eps);
                if j1 <= j0 + S::of(1e-4) * alpha * slope.min(S::zero()) + slack * j0.abs() {
                    accepted = true;
                    break;
                }
                alpha = alpha / S::of(2.0);
            }
            if !accepted {
                // Near the minimum the energy change drops below roundoff, so
                // fall back to the full step if it shrinks the gradient.
                for i in 0..k {
                    trial[i + 1] = (f[i + 1] + d[i]).max(S::zero()).min(t);
                }
                let mut gt = vec![S::zero(); k];
                nl.gradient(&trial, eps, &mut gt);
                if !(max_abs(&gt) < gnorm) {
                    break;
                }
            }
            let moved = (1..=k).any(|i| trial[i] != f[i]);
            std::mem::swap(&mut f, &mut trial);
            trial.copy_from_slice(&f);
            if !moved {
                break;
            }
        }
    }
    finish(f, iterations)
}

/// R_p between the terminals with the default solver configuration.
pub fn p_resistance<S: Scalar>(problem: &TerminalProblem, p: S) -> Result<FlowResult<S>> {
    p_resistance_with(problem, p, &SolverConfig::default())
}

pub fn p_resistance_with<S: Scalar>(problem: &TerminalProblem, p: S, cfg: &SolverConfig<S>) -> Result<FlowResult<S>> {
    let potential = solve_potential(problem, p, S::one(), cfg)?;
    let graph = &problem.graph;
    let pm1 = p - S::one();
    let capacity = potential.energy;
    let total_current = flux_out(graph, &potential.values, 0, pm1, S::zero());
    let resistance = capacity.recip();

    let unit_current_t = capacity.powf(-pm1.recip());
    let scaled: Vec<S> = potential.values.iter().map(|&v| v * unit_current_t).collect();
    let current = flux_out(graph, &scaled, 0, pm1, S::zero());
    let energy = p_energy(graph, &scaled, p)?;
    let rel = |a: S, b: S| (a - b).abs() / b.abs();
    let identity_defect = rel(current, S::one())
        .max(rel(energy, unit_current_t))
        .max(rel(unit_current_t.powf(pm1), resistance));

    Ok(FlowResult {
        resistance,
        capacity,
        total_current,
        unit_current_t,
        identity_defect,
        potential,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaxResistanceOptions {
    /// Fix one endpoint at vertex 0 (valid on vertex-transitive graphs).
    pub transitive: bool,
    /// Vertex cap; defaults to 2000 for p = 2 and 200 otherwise.
    pub cap: Option<usize>,
}

/// R_{Γ,p}: the largest p-resistance between two vertices, and a pair
/// attaining it (lexicographically first among ties).
pub fn max_resistance<S: Scalar>(graph: &Graph, p: S, opts: &MaxResistanceOptions) -> Result<(S, (usize, usize))> {
    check_p(p, S::one(), true)?;
    let n = graph.n();
    let linear = p == S::of(2.0);
    let cap = opts.cap.unwrap_or(if linear { 2000 } else { 200 });
    if n > cap {
        return Err(Error::SizeCapExceeded {
            limit: cap as u64,
            needed: n as u64,
        });
    }
    if n < 2 {
        return Err(Error::BadArguments("need at least two vertices".into()));
    }
    let firsts = if opts.transitive { 1 } else { n - 1 };
    let mut best = (S::neg_infinity(), (0, 0));
    let mut consider = |r: S, pair: (usize, usize)| {
        if r > best.0 * (S::one() + S::of(1e-12)) || best.0 == S::neg_infinity() {
            best = (r, pair);
        }
    };
    if linear {
        // R(u, v) = G_uu + G_vv − 2 G_uv with G = (L + J/n)^{-1}.
        let shift = S::one() / S::of_u64(n as u64);
        let mut a = vec![shift; n * n];
        for u in 0..n {
            a[u * n + u] = a[u * n + u] + S::of_u64(graph.degree(u));
            for (v, m) in graph.neighbors(u) {
                a[u * n + v] = a[u * n + v] - S::of_u64(m as u64);
            }
        }
        let g = spd_inverse(a, n)?;
        for u in 0..firsts {
            for v in u + 1..n {
                consider(g[u * n + u] + g[v * n + v] - S::of(2.0) * g[u * n + v], (u, v));
            }
        }
    } else {
        for u in 0..firsts {
            for v in u + 1..n {
                let problem = TerminalProblem::collapse(graph, &[u], &[v])?;
                consider(p_resistance(&problem, p)?.resistance, (u, v));
            }
        }
    }
    Ok(best)
}
