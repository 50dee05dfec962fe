use std::collections::{HashMap, VecDeque};

use num_rational::Ratio;
use num_traits::{CheckedAdd, Zero};

use crate::error::{Error, Result};
use crate::graph::{BallGraph, Graph};
use crate::scalar::Scalar;

/// Disjoint edge sets, each separating a source set from a ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutsetFamily {
    /// Edges `(u, v, multiplicity)` with `u < v`.
    pub cutsets: Vec<Vec<(usize, usize, u32)>>,
    /// Weighted size of each cutset.
    pub sizes: Vec<u64>,
}

impl CutsetFamily {
    /// Checks that the cutsets are nonempty, use only existing edges, are
    /// pairwise disjoint and that each one separates `source` from `ground`.
    pub fn new(
        graph: &Graph,
        source: &[usize],
        ground: &[usize],
        cutsets: Vec<Vec<(usize, usize, u32)>>,
    ) -> Result<Self> {
        let src = graph.mask(source)?;
        let gnd = graph.mask(ground)?;
        if source.is_empty() || ground.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut used: HashMap<(usize, usize), u32> = HashMap::new();
        let mut normalised = Vec::with_capacity(cutsets.len());
        for (i, cut) in cutsets.into_iter().enumerate() {
            let mut own: HashMap<(usize, usize), u32> = HashMap::new();
            for (u, v, m) in cut {
                let key = (u.min(v), u.max(v));
                *own.entry(key).or_default() += m;
            }
            if own.values().all(|&m| m == 0) {
                return Err(Error::InvalidCutsets(format!("cutset {i} is empty")));
            }
            for (&(u, v), &m) in &own {
                let total = used.entry((u, v)).or_default();
                *total += m;
                if v >= graph.n() || *total > graph.multiplicity(u, v) {
                    return Err(Error::InvalidCutsets(format!(
                        "edge ({u}, {v}) is missing or used by more than one cutset"
                    )));
                }
            }
            if !separates(graph, &src, &gnd, &own) {
                return Err(Error::InvalidCutsets(format!(
                    "cutset {i} does not separate source from ground"
                )));
            }
            let mut edges: Vec<(usize, usize, u32)> = own
                .into_iter()
                .filter(|&(_, m)| m > 0)
                .map(|((u, v), m)| (u, v, m))
                .collect();
            edges.sort_unstable();
            normalised.push(edges);
        }
        let sizes = normalised
            .iter()
            .map(|c| c.iter().map(|&(_, _, m)| m as u64).sum())
            .collect();
        Ok(CutsetFamily {
            cutsets: normalised,
            sizes,
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

fn separates(graph: &Graph, src: &[bool], gnd: &[bool], removed: &HashMap<(usize, usize), u32>) -> bool {
    let mut seen = src.to_vec();
    let mut queue: VecDeque<usize> = (0..graph.n()).filter(|&v| src[v]).collect();
    while let Some(u) = queue.pop_front() {
        if gnd[u] {
            return false;
        }
        for (v, m) in graph.neighbors(u) {
            let cut = removed.get(&(u.min(v), u.max(v))).copied().unwrap_or(0);
            if !seen[v] && m > cut {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    true
}

/// X_0, …, X_{r−1}: X_i is the edge boundary of B(x, i).
pub fn sphere_cutsets(ball: &BallGraph, r: u32) -> Result<CutsetFamily> {
    if r > ball.radius {
        return Err(Error::RadiusTooSmall {
            need: r,
            have: ball.radius,
        });
    }
    if r == 0 {
        return Err(Error::BadArguments("need r ≥ 1".into()));
    }
    let mut cuts = vec![Vec::new(); r as usize];
    for (u, v, m) in ball.graph.edges() {
        let (a, b) = (ball.layer[u], ball.layer[v]);
        let low = a.min(b);
        if a != b && low < r {
            cuts[low as usize].push((u, v, m));
        }
    }
    let ground: Vec<usize> = ball.sphere(r).collect();
    CutsetFamily::new(&ball.graph, &[ball.center()], &ground, cuts)
}

/// (Σ_i |Π_i|^{−1/(p−1)})^{p−1}.
pub fn nash_williams_bound<S: Scalar>(family: &CutsetFamily, p: S) -> Result<S> {
    if !(p > S::one()) {
        return Err(Error::DomainError(format!("p = {p} must exceed 1")));
    }
    if family.is_empty() || family.sizes.contains(&0) {
        return Err(Error::InvalidCutsets("empty family or empty cutset".into()));
    }
    let e = -(p - S::one()).recip();
    let sum: S = family.sizes.iter().map(|&s| S::of_u64(s).powf(e)).sum();
    Ok(sum.powf(p - S::one()))
}

/// The p = 2 bound Σ 1/|Π_i| as an exact fraction.
pub fn nash_williams_exact(family: &CutsetFamily) -> Result<Ratio<i64>> {
    if family.is_empty() || family.sizes.contains(&0) {
        return Err(Error::InvalidCutsets("empty family or empty cutset".into()));
    }
    family.sizes.iter().try_fold(Ratio::zero(), |acc, &s| {
        acc.checked_add(&Ratio::new(1, s as i64))
            .ok_or_else(|| Error::DomainError("exact sum overflows i64".into()))
    })
}
