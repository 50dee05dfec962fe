//! Simple random walk: escape probabilities by simulation and through the
//! resistance identity P[x → Y] = 1 / (deg(x) R_2(x ↔ Y)).
//!
//! Simulations use ChaCha8 seeded with `seed_from_u64(seed)`; walk `i` runs
//! on stream `i`, so every walk is reproducible on its own and results do not
//! depend on the thread count or on how far other walks ran. Trials are
//! processed in chunks of [`CHUNK`] walks and counts are summed.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BallGraph, Graph, TerminalProblem};
use crate::penergy::p_resistance;
use crate::scalar::Scalar;

/// Walks per RNG stream.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeEstimate {
    pub p_hat: f64,
    /// Completed (uncensored) walks.
    pub trials: u64,
    pub successes: u64,
    pub stderr: f64,
    pub seed: u64,
    /// Walks stopped at the step cap; excluded from `p_hat`.
    pub censored: u64,
}

impl EscapeEstimate {
    fn new(successes: u64, trials: u64, censored: u64, seed: u64) -> Self {
        let p_hat = if trials == 0 {
            f64::NAN
        } else {
            successes as f64 / trials as f64
        };
        EscapeEstimate {
            p_hat,
            trials,
            successes,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
            censored,
        }
    }
}

fn walk_rng(base: &ChaCha8Rng, walk: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(walk);
    rng
}

/// Walk index ranges of the fixed-size chunks.
fn chunks(trials: u64) -> impl ParallelIterator<Item = std::ops::Range<u64>> {
    let count = trials.div_ceil(CHUNK);
    (0..count)
        .into_par_iter()
        .map(move |c| c * CHUNK..(c * CHUNK + CHUNK).min(trials))
}

/// One step to a uniformly chosen incident edge.
#[inline]
fn step<R: Rng>(graph: &Graph, v: usize, rng: &mut R) -> usize {
    let range = graph.adjacency_range(v);
    let mut pick = rng.random_range(0..graph.degree(v));
    let targets = graph.raw_targets();
    let mult = graph.raw_mult();
    for s in range {
        let m = mult[s] as u64;
        if pick < m {
            return targets[s] as usize;
        }
        pick -= m;
    }
    unreachable!("pick is below the degree")
}

/// Escape estimates for every r in 1..=r_max from one coupled run: each
/// walk records the largest layer it reaches before returning to the centre.
/// The estimates are nonincreasing in r by construction.
pub fn simulate_escape_profile(ball: &BallGraph, r_max: u32, trials: u64, seed: u64) -> Result<Vec<EscapeEstimate>> {
    if r_max > ball.radius {
        return Err(Error::RadiusTooSmall {
            need: r_max,
            have: ball.radius,
        });
    }
    if r_max == 0 || trials == 0 {
        return Err(Error::BadArguments("need r ≥ 1 and trials ≥ 1".into()));
    }
    let graph = &ball.graph;
    let centre = ball.center();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let hist = chunks(trials)
        .map(|walks| {
            let mut hist = vec![0u64; r_max as usize + 1];
            for i in walks {
                let mut rng = walk_rng(&base, i);
                let mut v = step(graph, centre, &mut rng);
                let mut top = ball.layer[v];
                while v != centre && top < r_max {
                    v = step(graph, v, &mut rng);
                    top = top.max(ball.layer[v]);
                }
                hist[top as usize] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; r_max as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    // successes(r) = #walks whose top layer is ≥ r.
    let mut out = Vec::with_capacity(r_max as usize);
    let mut tail: u64 = 0;
    for r in (1..=r_max as usize).rev() {
        tail += hist[r];
        out.push(EscapeEstimate::new(tail, trials, 0, seed));
    }
    out.reverse();
    Ok(out)
}

/// Fraction of walks from the centre that reach S(x, r) before returning.
pub fn simulate_escape(ball: &BallGraph, r: u32, trials: u64, seed: u64) -> Result<EscapeEstimate> {
    Ok(*simulate_escape_profile(ball, r, trials, seed)?.last().expect("r ≥ 1"))
}

/// 1 / (deg(x) R_2(x ↔ S(x, r))).
pub fn escape_via_resistance<S: Scalar>(ball: &BallGraph, r: u32) -> Result<S> {
    if r > ball.radius {
        return Err(Error::RadiusTooSmall {
            need: r,
            have: ball.radius,
        });
    }
    if r == 0 {
        return Err(Error::BadArguments("need r ≥ 1".into()));
    }
    let sphere: Vec<usize> = ball.sphere(r).collect();
    let problem = TerminalProblem::collapse(&ball.graph, &[ball.center()], &sphere)?;
    let flow = p_resistance::<S>(&problem, S::of(2.0))?;
    Ok((S::of_u64(ball.graph.degree(ball.center())) * flow.resistance).recip())
}

/// Monte Carlo P[x → Y] on a finite graph. Walks longer than `step_cap`
/// steps (default 100 n²) are censored and excluded from the estimate.
pub fn hit_before_return(
    graph: &Graph,
    x: usize,
    target: &[usize],
    trials: u64,
    seed: u64,
    step_cap: Option<u64>,
) -> Result<EscapeEstimate> {
    let mask = graph.mask(target)?;
    if target.is_empty() {
        return Err(Error::BadArguments("target set is empty".into()));
    }
    if x >= graph.n() {
        return Err(Error::VertexOutOfRange {
            vertex: x,
            n: graph.n(),
        });
    }
    if mask[x] {
        return Err(Error::BadArguments("start vertex lies in the target set".into()));
    }
    if trials == 0 {
        return Err(Error::BadArguments("need trials ≥ 1".into()));
    }
    let n = graph.n() as u64;
    let cap = step_cap.unwrap_or(100 * n * n);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let (hits, censored) = chunks(trials)
        .map(|walks| {
            let (mut hits, mut censored) = (0u64, 0u64);
            for i in walks {
                let mut rng = walk_rng(&base, i);
                let mut v = x;
                let mut steps = 0u64;
                loop {
                    if steps == cap {
                        censored += 1;
                        break;
                    }
                    v = step(graph, v, &mut rng);
                    steps += 1;
                    if mask[v] {
                        hits += 1;
                        break;
                    }
                    if v == x {
                        break;
                    }
                }
            }
            (hits, censored)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(EscapeEstimate::new(hits, trials - censored, censored, seed))
}

/// One CSV row of an escape experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeRow {
    pub spec_hash: String,
    pub r: u32,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl EscapeRow {
    pub fn new(spec_hash: &str, r: u32, est: &EscapeEstimate) -> Self {
        EscapeRow {
            spec_hash: spec_hash.to_string(),
            r,
            trials: est.trials,
            p_hat: est.p_hat,
            stderr: est.stderr,
            seed: est.seed,
        }
    }
}

pub fn write_escape_csv<W: Write>(out: W, rows: &[EscapeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
