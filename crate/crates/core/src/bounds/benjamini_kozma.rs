use crate::error::{Error, Result};
use crate::graph::{BallGraph, Graph, GrowthProfile};
use crate::isoperimetry::IsoProfile;
use crate::scalar::Scalar;

/// m / (12 φ(2m)), the growth-based lower bound on |∂A| for |A| = m.
pub fn csc_bound<S: Scalar>(profile: &GrowthProfile, m: u64) -> Result<S> {
    let top = *profile.beta.last().expect("profile has β(0)");
    if m == 0 || 2 * m > top {
        return Err(Error::OutOfProfileRange { m });
    }
    let phi = profile.phi(2 * m).ok_or(Error::OutOfProfileRange { m })?;
    Ok(S::of_u64(m) / (S::of(12.0) * S::of_u64(phi as u64)))
}

/// j_{A,p} from the set size and its boundary sizes.
pub fn j_from_boundaries<S: Scalar>(
    size: u64,
    vertex_boundary: u64,
    edge_boundary: u64,
    degree: u64,
    p: S,
) -> Result<S> {
    if vertex_boundary == 0 || edge_boundary == 0 {
        return Err(Error::EmptyBoundary);
    }
    let pm1 = p - S::one();
    let e_a = p / pm1;
    let e_b = pm1.recip();
    let vb = S::of_u64(vertex_boundary);
    let eb = S::of_u64(edge_boundary);
    let a = S::of_u64(size);
    let vertex = a / vb.powf(e_a) + vb.powf(e_b).recip();
    let edge = S::of_u64(degree) * a / eb.powf(e_a) + eb.powf(e_b).recip();
    Ok(vertex.min(edge))
}

/// j_{A,p} with deg(Γ) taken as the maximum degree of `graph`.
pub fn j_quantity<S: Scalar>(graph: &Graph, set: &[usize], p: S) -> Result<S> {
    let b = graph.boundary(set)?;
    let size = graph.mask(set)?.iter().filter(|&&x| x).count() as u64;
    j_from_boundaries(size, b.vertex as u64, b.edge, graph.max_degree(), p)
}

/// (1 + C)|A| / ξ^{p/(p−1)}: the bound on j_{A,p} when |∂A| ≥ ξ and ξ ≤ C|A|.
pub fn second_term_bound<S: Scalar>(size: u64, xi: S, c: S, p: S) -> S {
    (S::one() + c) * S::of_u64(size) / xi.powf(p / (p - S::one()))
}

/// Where the Benjamini–Kozma sum is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum BkTarget<'a> {
    /// u = centre, B = B(x, radius); bounds R_p(x ↔ ∂B). The ball must
    /// extend one layer beyond B so boundaries are exact.
    Ball { ball: &'a BallGraph, radius: u32 },
    /// Two vertices of a finite graph.
    Pair { graph: &'a Graph, u: usize, v: usize },
}

/// How the maximum of j_{A,p} over each size class is obtained.
#[derive(Debug, Clone, Copy)]
pub enum BkStrategy<'a> {
    /// Enumerate every connected set (at most [`EXHAUSTIVE_CAP`] vertices).
    Exhaustive,
    /// Replace |∂A| by the growth lower bound max(m / (12 φ(2m)), 1).
    Growth(&'a GrowthProfile),
    /// Replace |∂A| by an exact minimum vertex boundary per size.
    Profile(&'a IsoProfile),
}

pub const EXHAUSTIVE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BkBound<S> {
    /// The right-hand side raised to the power p − 1 (implied constant 1).
    pub value: S,
    /// deg(u)^{−1/(p−1)} (plus the same for v in the pair form).
    pub base: S,
    /// `(n, max j)` for each dyadic size class, per endpoint.
    pub terms: Vec<(u32, S)>,
}

/// Benjamini–Kozma type upper bound for R_p.
pub fn bk_upper_bound<S: Scalar>(target: BkTarget<'_>, p: S, strategy: BkStrategy<'_>) -> Result<BkBound<S>> {
    if !(p > S::one()) {
        return Err(Error::DomainError(format!("p = {p} must exceed 1")));
    }
    let inv = (p - S::one()).recip();
    match target {
        BkTarget::Ball { ball, radius } => {
            if ball.radius < radius + 1 {
                return Err(Error::RadiusTooSmall {
                    need: radius + 1,
                    have: ball.radius,
                });
            }
            let size = ball.inner_ball(radius).len();
            if ball.sphere(radius + 1).is_empty() {
                return Err(Error::BadArguments("B(x, r) is the whole graph".into()));
            }
            let deg = ball.ambient_degree;
            let classes = dyadic_classes(size, deg, 0);
            let terms = class_maxima(&ball.graph, size, ball.center(), deg, &classes, p, strategy)?;
            let base = S::of_u64(deg).powf(-inv);
            Ok(finish(base, terms, p))
        }
        BkTarget::Pair { graph, u, v } => {
            let n = graph.n();
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
                if !connected_without(graph, w) {
                    return Err(Error::BadArguments(format!(
                        "removing vertex {w} disconnects the graph"
                    )));
                }
            }
            if u == v {
                return Err(Error::BadArguments("endpoints coincide".into()));
            }
            let deg = graph.max_degree();
            let mut terms = Vec::new();
            let mut base = S::zero();
            for w in [u, v] {
                let classes = dyadic_classes(n, graph.degree(w), 1);
                terms.extend(class_maxima(graph, n, w, deg, &classes, p, strategy)?);
                base = base + S::of_u64(graph.degree(w)).powf(-inv);
            }
            Ok(finish(base, terms, p))
        }
    }
}

fn finish<S: Scalar>(base: S, terms: Vec<(u32, S)>, p: S) -> BkBound<S> {
    let sum = base + terms.iter().map(|&(_, j)| j).sum::<S>();
    BkBound {
        value: sum.powf(p - S::one()),
        base,
        terms,
    }
}

/// `(n, lo, hi)` with lo < |A| ≤ hi the integer form of
/// size/2^{n+1} < |A| ≤ size/2^n, for n from `first` to ⌊log2(size / deg)⌋.
fn dyadic_classes(size: usize, deg: u64, first: u32) -> Vec<(u32, usize, usize)> {
    let mut out = Vec::new();
    let mut n = first;
    // 2^n ≤ size / deg  ⇔  deg · 2^n ≤ size.
    while (deg as u128) << n <= size as u128 {
        let hi = size >> n;
        let lo = size >> (n + 1);
        if hi > lo {
            out.push((n, lo, hi));
        }
        n += 1;
    }
    out
}

fn connected_without(graph: &Graph, w: usize) -> bool {
    let n = graph.n();
    if n <= 2 {
        return true;
    }
    let start = if w == 0 { 1 } else { 0 };
    let mut seen = vec![false; n];
    seen[w] = true;
    seen[start] = true;
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for (y, _) in graph.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n - 1
}

/// Max of j_{A,p} over connected A ⊂ {0..universe} containing `root`, per class.
fn class_maxima<S: Scalar>(
    graph: &Graph,
    universe: usize,
    root: usize,
    degree: u64,
    classes: &[(u32, usize, usize)],
    p: S,
    strategy: BkStrategy<'_>,
) -> Result<Vec<(u32, S)>> {
    let vertex_term = |m: usize, xi: S| -> S {
        let pm1 = p - S::one();
        S::of_u64(m as u64) / xi.powf(p / pm1) + xi.powf(pm1.recip()).recip()
    };
    match strategy {
        BkStrategy::Growth(profile) => classes
            .iter()
            .map(|&(n, lo, hi)| {
                let mut best = S::neg_infinity();
                for m in lo + 1..=hi {
                    let xi = csc_bound::<S>(profile, m as u64)
                        .map_err(|_| Error::ProfileUnavailable(format!("growth profile does not reach 2·{m}")))?
                        .max(S::one());
                    best = best.max(vertex_term(m, xi));
                }
                Ok((n, best))
            })
            .collect(),
        BkStrategy::Profile(profile) => classes
            .iter()
            .map(|&(n, lo, hi)| {
                let mut best = S::neg_infinity();
                for m in lo + 1..=hi {
                    let xi = profile
                        .by_size
                        .get(&m)
                        .map(|s| s.vertex)
                        .ok_or_else(|| Error::ProfileUnavailable(format!("no profile entry for size {m}")))?;
                    best = best.max(vertex_term(m, S::of_u64(xi.max(1) as u64)));
                }
                Ok((n, best))
            })
            .collect(),
        BkStrategy::Exhaustive => {
            if universe > EXHAUSTIVE_CAP {
                return Err(Error::SizeCapExceeded {
                    limit: EXHAUSTIVE_CAP as u64,
                    needed: universe as u64,
                });
            }
            let best = exhaustive_class_maxima(graph, universe, root, degree, classes, p)?;
            Ok(classes
                .iter()
                .zip(best)
                .filter_map(|(&(n, _, _), b)| b.map(|b| (n, b)))
                .collect())
        }
    }
}

fn exhaustive_class_maxima<S: Scalar>(
    graph: &Graph,
    universe: usize,
    root: usize,
    degree: u64,
    classes: &[(u32, usize, usize)],
    p: S,
) -> Result<Vec<Option<S>>> {
    let inner: Vec<u32> = (0..universe)
        .map(|v| {
            graph
                .neighbors(v)
                .filter(|&(y, _)| y < universe)
                .fold(0u32, |m, (y, _)| m | 1 << y)
        })
        .collect();
    let outer: Vec<Vec<usize>> = (0..universe)
        .map(|v| {
            graph
                .neighbors(v)
                .filter(|&(y, _)| y >= universe)
                .map(|(y, _)| y)
                .collect()
        })
        .collect();
    let mut best: Vec<Option<S>> = vec![None; classes.len()];
    let mut scratch = Vec::new();
    let others: Vec<usize> = (0..universe).filter(|&v| v != root).collect();
    for bits in 0u32..1 << others.len() {
        let mut set = 1u32 << root;
        for (i, &v) in others.iter().enumerate() {
            if bits >> i & 1 == 1 {
                set |= 1 << v;
            }
        }
        let size = set.count_ones() as usize;
        let Some(c) = classes.iter().position(|&(_, lo, hi)| lo < size && size <= hi) else {
            continue;
        };
        // Connectivity by frontier growth inside the set.
        let mut reached = 1u32 << root;
        loop {
            let mut next = reached;
            let mut rest = reached;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                next |= inner[v] & set;
            }
            if next == reached {
                break;
            }
            reached = next;
        }
        if reached != set {
            continue;
        }
        let mut nbr = 0u32;
        let mut edge = 0u64;
        scratch.clear();
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            nbr |= inner[v];
            scratch.extend_from_slice(&outer[v]);
            for (y, m) in graph.neighbors(v) {
                if y >= universe || set >> y & 1 == 0 {
                    edge += m as u64;
                }
            }
        }
        scratch.sort_unstable();
        scratch.dedup();
        let vertex = (nbr & !set).count_ones() as u64 + scratch.len() as u64;
        let j = j_from_boundaries(size as u64, vertex, edge, degree, p)?;
        best[c] = Some(best[c].map_or(j, |b: S| b.max(j)));
    }
    Ok(best)
}
