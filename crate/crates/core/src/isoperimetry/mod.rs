//! Exact isoperimetric profiles of small graphs and empirical checks of
//! isoperimetric inequalities on balls.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{b, csc_bound, BoundReport, Side};
use crate::error::{Error, Result};
use crate::graph::{build_cayley_graph, BallGraph, Graph, GraphSpec, GrowthProfile};

/// Largest graph `exact_profile` will enumerate in either mode.
pub const HARD_CAP: usize = 26;

/// Vertex limit for the exhaustive verifiers.
pub const VERIFY_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    AllSets,
    ConnectedSets,
}

impl ProfileMode {
    pub fn default_cap(self) -> usize {
        match self {
            ProfileMode::AllSets => 14,
            ProfileMode::ConnectedSets => 20,
        }
    }
}

/// Minimum boundaries over all sets of one size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeMinimum {
    pub vertex: usize,
    pub vertex_witness: Vec<usize>,
    pub edge: u64,
    pub edge_witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoProfile {
    pub by_size: BTreeMap<usize, SizeMinimum>,
    pub exhaustive: bool,
    pub size_range: (usize, usize),
    pub mode: ProfileMode,
}

#[derive(Clone, Copy)]
struct Best {
    vertex: u32,
    vertex_mask: u32,
    edge: u64,
    edge_mask: u32,
}

/// For sets of equal size: true if `a` is lexicographically smaller than `b`
/// as a sorted vertex list.
fn lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

fn merge(into: &mut [Option<Best>], from: &[Option<Best>]) {
    for (slot, other) in into.iter_mut().zip(from) {
        let Some(o) = other else { continue };
        match slot {
            None => *slot = Some(*o),
            Some(s) => {
                if o.vertex < s.vertex || (o.vertex == s.vertex && lex_less(o.vertex_mask, s.vertex_mask)) {
                    s.vertex = o.vertex;
                    s.vertex_mask = o.vertex_mask;
                }
                if o.edge < s.edge || (o.edge == s.edge && lex_less(o.edge_mask, s.edge_mask)) {
                    s.edge = o.edge;
                    s.edge_mask = o.edge_mask;
                }
            }
        }
    }
}

fn mask_connected(mask: u32, nbr: &[u32]) -> bool {
    let mut reach = mask & mask.wrapping_neg();
    loop {
        let mut grown = reach;
        let mut bits = reach;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            grown |= nbr[v];
            bits &= bits - 1;
        }
        grown &= mask;
        if grown == reach {
            return reach == mask;
        }
        reach = grown;
    }
}

fn to_vertices(mask: u32) -> Vec<usize> {
    (0..32).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Exhaustive minimum vertex and edge boundaries for every size 1..n−1.
/// Ties go to the lexicographically least witness.
pub fn exact_profile(graph: &Graph, mode: ProfileMode, max_n: Option<usize>) -> Result<IsoProfile> {
    let n = graph.n();
    let cap = max_n.unwrap_or(mode.default_cap()).min(HARD_CAP);
    if n > cap {
        return Err(Error::SizeCapExceeded {
            limit: cap as u64,
            needed: n as u64,
        });
    }
    if n < 2 {
        return Err(Error::BadArguments("profile needs at least two vertices".into()));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).fold(0u32, |m, (y, _)| m | 1 << y))
        .collect();
    let adj: Vec<Vec<(u32, u64)>> = (0..n)
        .map(|v| graph.neighbors(v).map(|(y, m)| (y as u32, m as u64)).collect())
        .collect();
    let full: u32 = (1u32 << n) - 1;
    const BLOCK: u32 = 1 << 14;
    let blocks = full / BLOCK + 1;
    let best = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut local: Vec<Option<Best>> = vec![None; n];
            let lo = (blk * BLOCK).max(1);
            let hi = ((blk + 1) * BLOCK).min(full);
            for mask in lo..hi {
                if mode == ProfileMode::ConnectedSets && !mask_connected(mask, &nbr) {
                    continue;
                }
                let mut out = 0u32;
                let mut edge = 0u64;
                let mut bits = mask;
                while bits != 0 {
                    let v = bits.trailing_zeros() as usize;
                    out |= nbr[v];
                    for &(y, m) in &adj[v] {
                        if mask >> y & 1 == 0 {
                            edge += m;
                        }
                    }
                    bits &= bits - 1;
                }
                let vertex = (out & !mask).count_ones();
                let cand = Best {
                    vertex,
                    vertex_mask: mask,
                    edge,
                    edge_mask: mask,
                };
                let size = mask.count_ones() as usize;
                merge(&mut local[size..=size], &[Some(cand)]);
            }
            local
        })
        .reduce(
            || vec![None; n],
            |mut a, b| {
                merge(&mut a, &b);
                a
            },
        );
    let by_size = best
        .into_iter()
        .enumerate()
        .filter_map(|(size, b)| {
            b.map(|b| {
                (
                    size,
                    SizeMinimum {
                        vertex: b.vertex as usize,
                        vertex_witness: to_vertices(b.vertex_mask),
                        edge: b.edge,
                        edge_witness: to_vertices(b.edge_mask),
                    },
                )
            })
        })
        .collect();
    Ok(IsoProfile {
        by_size,
        exhaustive: true,
        size_range: (1, n - 1),
        mode,
    })
}

fn witness_mask(w: &[usize]) -> u64 {
    w.iter().fold(0u64, |m, &v| m | 1 << v)
}

impl IsoProfile {
    /// Recomputes every recorded minimum from its witness.
    pub fn witnesses_valid(&self, graph: &Graph) -> bool {
        self.by_size.iter().all(|(&size, m)| {
            let vb = graph.boundary(&m.vertex_witness);
            let eb = graph.boundary(&m.edge_witness);
            m.vertex_witness.len() == size
                && m.edge_witness.len() == size
                && matches!(vb, Ok(b) if b.vertex == m.vertex)
                && matches!(eb, Ok(b) if b.edge == m.edge)
        })
    }

    /// CSV with one row per size; witnesses as hexadecimal bitmasks.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "size",
            "min_vertex_boundary",
            "min_edge_boundary",
            "vertex_witness",
            "edge_witness",
        ])?;
        for (size, m) in &self.by_size {
            w.write_record([
                size.to_string(),
                m.vertex.to_string(),
                m.edge.to_string(),
                format!("{:#x}", witness_mask(&m.vertex_witness)),
                format!("{:#x}", witness_mask(&m.edge_witness)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// β and σ of a finite connected graph measured from vertex 0.
pub fn finite_growth_profile(graph: &Graph) -> Result<GrowthProfile> {
    let dist = graph.bfs_distances(0);
    let mut sigma = Vec::new();
    for d in dist {
        let d = d.ok_or(Error::Disconnected)? as usize;
        if sigma.len() <= d {
            sigma.resize(d + 1, 0u64);
        }
        sigma[d] += 1;
    }
    let beta: Vec<u64> = sigma
        .iter()
        .scan(0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    Ok(GrowthProfile {
        degree: beta.get(1).map_or(0, |b| b - 1),
        diameter: Some(sigma.len() as u32 - 1),
        beta,
        sigma,
    })
}

/// Exact minimum |∂A| against m/(12 φ(2m)) for every 1 ≤ m ≤ n/2.
pub fn verify_csc(graph: &Graph) -> Result<Vec<BoundReport<f64>>> {
    let profile = exact_profile(graph, ProfileMode::AllSets, Some(VERIFY_CAP))?;
    let growth = finite_growth_profile(graph)?;
    (1..=graph.n() / 2)
        .map(|m| {
            let bound = csc_bound::<f64>(&growth, m as u64)?;
            let exact = profile.by_size[&m].vertex as f64;
            Ok(BoundReport::strict("min vertex boundary", exact, bound, Side::Lower)
                .with_param("size", m as f64)
                .with_param("order", graph.n() as f64))
        })
        .collect()
}

/// Minimum |∂^E A| over k ≤ |A| ≤ n − k in C(ℤ/n, {−k..k}) against k²/4 − 1.
pub fn verify_cyclic_edge_iso(n: u64, k: u64) -> Result<BoundReport<f64>> {
    if k == 0 || 2 * k >= n {
        return Err(Error::BadArguments(format!("need 1 ≤ k < n/2, got n = {n}, k = {k}")));
    }
    if n as usize > VERIFY_CAP {
        return Err(Error::SizeCapExceeded {
            limit: VERIFY_CAP as u64,
            needed: n,
        });
    }
    let graph = build_cayley_graph(&GraphSpec::cyclic(n, k)?)?;
    let profile = exact_profile(&graph, ProfileMode::AllSets, Some(VERIFY_CAP))?;
    let min = (k as usize..=(n - k) as usize)
        .map(|m| profile.by_size[&m].edge)
        .min()
        .expect("k ≤ n − k");
    let bound = (k * k) as f64 / 4.0 - 1.0;
    Ok(BoundReport::strict("min edge boundary", min as f64, bound, Side::Lower)
        .with_param("n", n as f64)
        .with_param("k", k as f64))
}

/// Isoperimetric inequalities checked on sets inside a ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoTheorem {
    /// |∂A| ≫ min{|A|^{⌊q⌋/(⌊q⌋+1)}, r^{{q}/⌊q⌋} |A|^{(⌊q⌋−1)/⌊q⌋}} when β(r) ≥ r^q.
    GrowthIso,
    /// |∂A| ≫ β(1)^{1/b} |A|^{(b−1)/b} with b = b(q), when β(r) ≥ r^q β(1).
    RelativeGrowthIso,
    /// The β(1)-weighted form of `GrowthIso` for q ∈ [1, 3].
    RelativeLowDimIso,
    /// `GrowthIso` rewritten for β(r) = r^q exactly.
    ExactGrowthCorollary,
    /// |∂A| ≥ β(1)/32 whenever |A| ≤ β(r)/2 and diam ≥ r.
    LinearRelativeIso,
    /// Largest q with |∂B(n)| ≥ β(n)^{(q−1)/q} for all n with β(n) ≤ β(r)/2,
    /// reported against β(r) ≥ c r^q.
    BallBoundaryConverse,
}

/// Random connected sets drawn per decade of sizes.
pub const RANDOM_SETS_PER_DECADE: usize = 200;

/// Exhaustive minimisers when the ball is a small whole graph, otherwise
/// balls, half-balls and seeded random connected sets, all of size at most
/// `max_size` and contained in B(R − 1).
fn candidate_sets(ball: &BallGraph, max_size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if ball.covers_ambient() && ball.len() <= ProfileMode::AllSets.default_cap() {
        let profile = exact_profile(&ball.graph, ProfileMode::AllSets, None)?;
        let mut out: Vec<Vec<usize>> = profile
            .by_size
            .range(..=max_size)
            .flat_map(|(_, m)| [m.vertex_witness.clone(), m.edge_witness.clone()])
            .collect();
        out.sort();
        out.dedup();
        return Ok(out);
    }
    let interior = ball.inner_ball(ball.radius - 1).end;
    let mut out = std::collections::BTreeSet::new();
    for s in 0..ball.radius {
        let b = ball.inner_ball(s);
        if b.len() <= max_size {
            out.insert(b.clone().collect::<Vec<_>>());
        }
        let half: Vec<usize> = b.filter(|&v| ball.elements[v][0] <= 0).collect();
        if !half.is_empty() && half.len() <= max_size {
            out.insert(half);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = 1usize;
    while lo <= max_size {
        let hi = (lo * 10).min(max_size + 1);
        for _ in 0..RANDOM_SETS_PER_DECADE {
            let size = rng.random_range(lo..hi);
            out.insert(random_connected(ball, interior, size, &mut rng));
        }
        lo *= 10;
    }
    Ok(out.into_iter().collect())
}

/// Grows a connected set from the centre by adding uniformly chosen frontier
/// vertices below id `limit`.
fn random_connected(ball: &BallGraph, limit: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut inside = vec![false; limit];
    let mut frontier = vec![ball.center()];
    let mut queued = vec![false; limit];
    queued[ball.center()] = true;
    let mut set = Vec::with_capacity(size);
    while set.len() < size && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.random_range(0..frontier.len()));
        inside[v] = true;
        set.push(v);
        for (y, _) in ball.graph.neighbors(v) {
            if y < limit && !queued[y] {
                queued[y] = true;
                frontier.push(y);
            }
        }
    }
    set.sort_unstable();
    set
}

/// max ratio / min ratio over a set of reports.
pub fn ratio_spread(reports: &[BoundReport<f64>]) -> f64 {
    let (lo, hi) = reports.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.ratio), hi.max(r.ratio))
    });
    hi / lo
}

/// Checks `which` on candidate sets A ⊂ B(R − 1) with |A| ≤ β(r)/2. q is
/// the largest exponent for which the growth hypothesis holds at radius r.
pub fn check_iso_theorems(ball: &BallGraph, r: u32, which: IsoTheorem, seed: u64) -> Result<Vec<BoundReport<f64>>> {
    if r < 2 {
        return Err(Error::BadArguments("need r ≥ 2 to estimate q".into()));
    }
    if ball.radius < r + 1 {
        return Err(Error::RadiusTooSmall {
            need: r + 1,
            have: ball.radius,
        });
    }
    let growth = crate::graph::growth_profile(ball);
    if let Some(d) = growth.diameter {
        if r > d {
            return Err(Error::BadArguments(format!("r = {r} exceeds the diameter {d}")));
        }
    }
    let beta_r = growth.beta[r as usize] as f64;
    let beta_1 = growth.beta[1] as f64;
    let rf = r as f64;
    let max_size = growth.beta[r as usize] as usize / 2;

    if which == IsoTheorem::BallBoundaryConverse {
        let mut q = f64::INFINITY;
        for n in 1..r {
            if 2 * growth.beta[n as usize] > growth.beta[r as usize] {
                break;
            }
            let boundary = growth.sigma[n as usize + 1] as f64;
            let s = boundary.ln() / (growth.beta[n as usize] as f64).ln();
            if s < 1.0 {
                q = q.min(1.0 / (1.0 - s));
            }
        }
        if !q.is_finite() {
            return Err(Error::DomainError("boundary hypothesis holds for every q".into()));
        }
        return Ok(vec![BoundReport::informational(
            "ball volume",
            beta_r,
            rf.powf(q),
            Side::Lower,
        )
        .with_param("q", q)
        .with_param("r", rf)]);
    }

    let q_abs = beta_r.ln() / rf.ln();
    let q_rel = (beta_r / beta_1).ln() / rf.ln();
    let q = match which {
        IsoTheorem::GrowthIso | IsoTheorem::ExactGrowthCorollary => q_abs,
        IsoTheorem::RelativeGrowthIso => q_rel,
        IsoTheorem::RelativeLowDimIso => q_rel.min(3.0),
        _ => 1.0,
    };
    if q < 1.0 {
        return Err(Error::DomainError(format!("growth exponent q = {q:.4} is below 1")));
    }
    let fq = q.floor();
    let frac = q - fq;
    let bq = b(q)?;
    let rhs = |a: f64| -> f64 {
        match which {
            IsoTheorem::GrowthIso => a
                .powf(fq / (fq + 1.0))
                .min(rf.powf(frac / fq) * a.powf((fq - 1.0) / fq)),
            IsoTheorem::ExactGrowthCorollary => a
                .powf(fq / (fq + 1.0))
                .min(beta_r.powf(1.0 / fq - 1.0 / q) * a.powf(1.0 - 1.0 / fq)),
            IsoTheorem::RelativeGrowthIso => beta_1.powf(1.0 / bq) * a.powf((bq - 1.0) / bq),
            IsoTheorem::RelativeLowDimIso => (beta_1.powf(1.0 / (fq + 1.0)) * a.powf(fq / (fq + 1.0)))
                .min(beta_1.powf(1.0 / fq) * rf.powf(frac / fq) * a.powf((fq - 1.0) / fq)),
            IsoTheorem::LinearRelativeIso => beta_1 / 32.0,
            IsoTheorem::BallBoundaryConverse => unreachable!(),
        }
    };
    candidate_sets(ball, max_size, seed)?
        .into_iter()
        .map(|set| {
            let boundary = ball.graph.boundary(&set)?.vertex as f64;
            let a = set.len() as f64;
            let bound = rhs(a);
            let report = if which == IsoTheorem::LinearRelativeIso {
                BoundReport::strict("vertex boundary", boundary, bound, Side::Lower)
            } else {
                BoundReport::informational("vertex boundary", boundary, bound, Side::Lower)
            };
            Ok(report.with_param("size", a).with_param("q", q).with_param("r", rf))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Status;
    use crate::graph::build_ball;

    fn cycle(n: u64) -> Graph {
        build_cayley_graph(&GraphSpec::cyclic(n, 1).unwrap()).unwrap()
    }

    #[test]
    fn cycle_profile() {
        let g = cycle(6);
        let p = exact_profile(&g, ProfileMode::AllSets, None).unwrap();
        for m in 1..=4 {
            assert_eq!(p.by_size[&m].vertex, 2);
            assert_eq!(p.by_size[&m].edge, 2);
        }
        assert_eq!(p.by_size[&5].vertex, 1);
        assert_eq!(p.by_size[&1].vertex_witness, vec![0]);
        assert_eq!(p.by_size[&2].vertex_witness, vec![0, 1]);
        assert!(p.witnesses_valid(&g));
        assert_eq!(p.size_range, (1, 5));
    }

    #[test]
    fn complete_graph() {
        let g = Graph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v, 1)))).unwrap();
        let p = exact_profile(&g, ProfileMode::AllSets, None).unwrap();
        assert_eq!(p.by_size[&2].vertex, 2);
        assert_eq!(p.by_size[&2].edge, 4);
    }

    #[test]
    fn connected_mode_matches_on_cycle_edges() {
        let g = cycle(10);
        let all = exact_profile(&g, ProfileMode::AllSets, None).unwrap();
        let conn = exact_profile(&g, ProfileMode::ConnectedSets, None).unwrap();
        for m in 1..10 {
            assert_eq!(all.by_size[&m].edge, conn.by_size[&m].edge);
        }
        assert!(conn.witnesses_valid(&g));
    }

    #[test]
    fn caps() {
        let g = cycle(15);
        assert!(matches!(
            exact_profile(&g, ProfileMode::AllSets, None),
            Err(Error::SizeCapExceeded { limit: 14, needed: 15 })
        ));
        assert!(exact_profile(&g, ProfileMode::ConnectedSets, None).is_ok());
    }

    #[test]
    fn profile_csv() {
        let p = exact_profile(&cycle(5), ProfileMode::AllSets, None).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().nth(1).unwrap(), "1,2,2,0x1,0x1");
    }

    #[test]
    fn csc_on_small_graphs() {
        for g in [
            cycle(12),
            build_cayley_graph(&GraphSpec::torus(4, 2).unwrap()).unwrap(),
            Graph::from_edges(2, [(0, 1, 1)]).unwrap(),
        ] {
            let reports = verify_csc(&g).unwrap();
            assert_eq!(reports.len(), g.n() / 2);
            assert!(reports.iter().all(|r| r.status == Status::Pass));
        }
    }

    #[test]
    fn cyclic_edge() {
        let r = verify_cyclic_edge_iso(10, 4).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.computed >= 3.0);
        assert_eq!(verify_cyclic_edge_iso(8, 2).unwrap().bound, 0.0);
        let r = verify_cyclic_edge_iso(12, 5).unwrap();
        assert_eq!(r.bound, 5.25);
        assert_eq!(r.status, Status::Pass);
        assert!(verify_cyclic_edge_iso(10, 5).is_err());
        assert!(verify_cyclic_edge_iso(18, 2).is_err());
    }

    #[test]
    fn growth_iso_on_square_lattice() {
        let ball = build_ball(&GraphSpec::lattice(2).unwrap(), 7).unwrap();
        let reports = check_iso_theorems(&ball, 6, IsoTheorem::GrowthIso, 1).unwrap();
        let b3: Vec<usize> = ball.inner_ball(3).collect();
        let r3 = reports.iter().find(|r| r.params["size"] == b3.len() as f64).unwrap();
        assert_eq!(r3.status, Status::Informational);
        let single = reports.iter().find(|r| r.params["size"] == 1.0).unwrap();
        assert_eq!(single.computed, 8.0);
        assert!(ratio_spread(&reports) < 20.0);
    }

    #[test]
    fn linear_relative_iso_holds() {
        let ball = build_ball(&GraphSpec::lattice(2).unwrap(), 6).unwrap();
        let reports = check_iso_theorems(&ball, 5, IsoTheorem::LinearRelativeIso, 3).unwrap();
        assert!(reports.iter().all(|r| r.status == Status::Pass));
    }

    #[test]
    fn converse_reports_a_constant() {
        let ball = build_ball(&GraphSpec::lattice(2).unwrap(), 12).unwrap();
        let reports = check_iso_theorems(&ball, 10, IsoTheorem::BallBoundaryConverse, 0).unwrap();
        assert_eq!(reports.len(), 1);
        assert!(reports[0].params["q"] >= 1.0 && reports[0].ratio > 0.0);
    }

    #[test]
    fn minima_are_translation_invariant() {
        let ball = build_ball(&GraphSpec::torus(4, 2).unwrap(), 4).unwrap();
        let p = exact_profile(&ball.graph, ProfileMode::AllSets, Some(16)).unwrap();
        for m in p.by_size.values() {
            let moved = ball.translate(&m.vertex_witness, &[1, 2]).unwrap();
            assert_eq!(ball.graph.boundary(&moved).unwrap().vertex, m.vertex);
        }
    }
}
