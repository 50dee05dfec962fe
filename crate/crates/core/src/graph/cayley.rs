use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::network::Graph;
use crate::graph::spec::{GraphSpec, Modulus};

/// Default vertex cap for graph and ball construction.
pub const DEFAULT_SIZE_CAP: u64 = 5_000_000;

/// Finite Cayley graph of an all-finite spec with the default size cap.
pub fn build_cayley_graph(spec: &GraphSpec) -> Result<Graph> {
    build_cayley_graph_capped(spec, DEFAULT_SIZE_CAP)
}

/// Finite Cayley graph. Vertex ids are lexicographic ranks of the group
/// tuples (first factor most significant).
pub fn build_cayley_graph_capped(spec: &GraphSpec, cap: u64) -> Result<Graph> {
    spec.validate()?;
    let moduli: Vec<u64> = spec
        .factors
        .iter()
        .enumerate()
        .map(|(i, m)| m.finite().ok_or(Error::InfiniteFactorPresent(i)))
        .collect::<Result<_>>()?;
    let order = spec.order().unwrap_or(u128::MAX);
    if order > cap as u128 {
        return Err(Error::SizeCapExceeded {
            limit: cap,
            needed: order.min(u64::MAX as u128) as u64,
        });
    }
    let n = order as usize;
    let gens = spec.generator_set()?;
    let d = moduli.len();
    let mut strides = vec![1u64; d];
    for i in (0..d.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * moduli[i + 1];
    }

    let mut lists: Vec<Vec<(u32, u32)>> = Vec::with_capacity(n);
    let mut digits = vec![0i64; d];
    for v in 0..n as u64 {
        let mut rest = v;
        for i in 0..d {
            digits[i] = (rest / strides[i]) as i64;
            rest %= strides[i];
        }
        let row = gens
            .iter()
            .map(|g| {
                let id: u64 = (0..d)
                    .map(|i| ((digits[i] + g[i]).rem_euclid(moduli[i] as i64)) as u64 * strides[i])
                    .sum();
                (id as u32, 1)
            })
            .collect();
        lists.push(row);
    }
    let graph = Graph::from_lists(lists);
    if !graph.is_connected() {
        return Err(Error::DisconnectedGeneratingSet);
    }
    Ok(graph)
}

/// Induced subgraph on the ball B(e, R) around the identity.
///
/// Vertices are numbered by (layer, lexicographic group tuple), so the
/// centre is vertex 0 and each layer occupies a contiguous id range.
#[derive(Debug, Clone)]
pub struct BallGraph {
    pub graph: Graph,
    pub radius: u32,
    /// d(e, v) for every ball vertex.
    pub layer: Vec<u32>,
    /// Edges from v to vertices outside the ball; nonzero only in layer R.
    pub exit_degree: Vec<u64>,
    /// Canonical group tuple of every vertex.
    pub elements: Vec<Vec<i64>>,
    /// deg(Γ) of the ambient Cayley graph, |S \ {e}|.
    pub ambient_degree: u64,
    pub spec: GraphSpec,
    layer_offsets: Vec<usize>,
    index: HashMap<Vec<i64>, u32>,
}

impl BallGraph {
    /// The identity element.
    pub fn center(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer.is_empty()
    }

    /// Vertex ids of the sphere S(e, r).
    pub fn sphere(&self, r: u32) -> std::ops::Range<usize> {
        if r > self.radius {
            return self.len()..self.len();
        }
        self.layer_offsets[r as usize]..self.layer_offsets[r as usize + 1]
    }

    /// Vertex ids of the ball B(e, r), r ≤ R.
    pub fn inner_ball(&self, r: u32) -> std::ops::Range<usize> {
        0..self.sphere(r.min(self.radius)).end
    }

    /// True when the ball is the whole (finite) ambient graph.
    pub fn covers_ambient(&self) -> bool {
        self.exit_degree.iter().all(|&e| e == 0)
    }

    pub fn vertex_of(&self, element: &[i64]) -> Option<usize> {
        self.index.get(&self.spec.canonical(element)).map(|&i| i as usize)
    }

    /// Translate a vertex set by the group element `by`; `None` if some
    /// image leaves the ball.
    pub fn translate(&self, set: &[usize], by: &[i64]) -> Option<Vec<usize>> {
        let mut out = set
            .iter()
            .map(|&v| {
                let moved: Vec<i64> = self.elements[v].iter().zip(by).map(|(a, b)| a + b).collect();
                self.vertex_of(&moved)
            })
            .collect::<Option<Vec<_>>>()?;
        out.sort_unstable();
        Some(out)
    }
}

/// Ball with the default size cap.
pub fn build_ball(spec: &GraphSpec, radius: u32) -> Result<BallGraph> {
    build_ball_capped(spec, radius, DEFAULT_SIZE_CAP)
}

pub fn build_ball_capped(spec: &GraphSpec, radius: u32, cap: u64) -> Result<BallGraph> {
    spec.validate()?;
    let gens = spec.generator_set()?;
    let d = spec.dims();

    // Pack canonical tuples into u64 keys: with steps of size at most s,
    // infinite coordinates lie in [-(R + 1)s, (R + 1)s] while exploring the
    // ball and its exits.
    let step = gens.iter().flatten().map(|x| x.abs()).max().unwrap_or(1).max(1);
    let span = (radius as i64 + 1) * step;
    let bases: Vec<u128> = spec
        .factors
        .iter()
        .map(|m| match m {
            Modulus::Finite(m) => *m as u128,
            Modulus::Infinite => 2 * span as u128 + 1,
        })
        .collect();
    let key_space = bases.iter().fold(1u128, |a, b| a.saturating_mul(*b));
    if key_space > u64::MAX as u128 {
        return Err(Error::SizeCapExceeded {
            limit: cap,
            needed: u64::MAX,
        });
    }
    let key = |t: &[i64]| -> u64 {
        let mut k = 0u128;
        for (i, (&x, m)) in t.iter().zip(&spec.factors).enumerate() {
            let digit = match m {
                Modulus::Finite(_) => x as u128,
                Modulus::Infinite => (x + span) as u128,
            };
            k = k * bases[i] + digit;
        }
        k as u64
    };

    let origin = vec![0i64; d];
    let mut elements: Vec<Vec<i64>> = vec![origin.clone()];
    let mut layer: Vec<u32> = vec![0];
    let mut seen: HashMap<u64, u32> = HashMap::new();
    seen.insert(key(&origin), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut scratch = vec![0i64; d];
    while let Some(u) = queue.pop_front() {
        if layer[u] == radius {
            continue;
        }
        for g in &gens {
            for i in 0..d {
                scratch[i] = spec.factors[i].reduce(elements[u][i] + g[i]);
            }
            let k = key(&scratch);
            if seen.contains_key(&k) {
                continue;
            }
            if elements.len() as u64 >= cap {
                return Err(Error::SizeCapExceeded {
                    limit: cap,
                    needed: elements.len() as u64 + 1,
                });
            }
            seen.insert(k, elements.len() as u32);
            elements.push(scratch.clone());
            layer.push(layer[u] + 1);
            queue.push_back(elements.len() - 1);
        }
    }

    // Renumber by (layer, tuple).
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| layer[a].cmp(&layer[b]).then_with(|| elements[a].cmp(&elements[b])));
    let mut new_id = vec![0u32; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new as u32;
    }
    let elements: Vec<Vec<i64>> = order.iter().map(|&o| elements[o].clone()).collect();
    let layer: Vec<u32> = order.iter().map(|&o| layer[o]).collect();

    let mut lists: Vec<Vec<(u32, u32)>> = Vec::with_capacity(elements.len());
    let mut exit_degree = vec![0u64; elements.len()];
    for (v, t) in elements.iter().enumerate() {
        let mut row = Vec::with_capacity(gens.len());
        for g in &gens {
            for i in 0..d {
                scratch[i] = spec.factors[i].reduce(t[i] + g[i]);
            }
            match seen.get(&key(&scratch)) {
                Some(&old) => row.push((new_id[old as usize], 1)),
                None => exit_degree[v] += 1,
            }
        }
        lists.push(row);
    }
    let graph = Graph::from_lists(lists);

    let mut layer_offsets = vec![0usize; radius as usize + 2];
    for &l in &layer {
        layer_offsets[l as usize + 1] += 1;
    }
    for r in 0..=radius as usize {
        layer_offsets[r + 1] += layer_offsets[r];
    }
    let index = elements
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();

    Ok(BallGraph {
        graph,
        radius,
        layer,
        exit_degree,
        elements,
        ambient_degree: gens.len() as u64,
        spec: spec.clone(),
        layer_offsets,
        index,
    })
}
