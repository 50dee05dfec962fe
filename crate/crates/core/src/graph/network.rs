use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected multigraph in compressed adjacency form.
///
/// Every vertex lists its distinct neighbours together with the number of
/// parallel edges to each. Self-loops never occur and the adjacency is
/// symmetric with matching multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    mult: Vec<u32>,
    degree: Vec<u64>,
}

/// Result of [`Graph::boundary`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    /// |∂A|, the number of outside vertices adjacent to A.
    pub vertex: usize,
    /// |∂^E A|, edges leaving A counted with multiplicity.
    pub edge: u64,
    /// The outside vertices adjacent to A, ascending.
    pub vertices: Vec<usize>,
}

impl Graph {
    /// Builds a connected multigraph on `n` vertices.
    ///
    /// Repeated pairs accumulate multiplicity; self-loops are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let g = Self::from_edges_unchecked(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub(crate) fn from_edges_unchecked<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::SizeCapExceeded {
                limit: u32::MAX as u64,
                needed: n as u64,
            });
        }
        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for (u, v, m) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if u == v || m == 0 {
                continue;
            }
            lists[u].push((v as u32, m));
            lists[v].push((u as u32, m));
        }
        Ok(Self::from_lists(lists))
    }

    /// Builds from per-vertex neighbour lists that are already symmetric.
    pub(crate) fn from_lists(mut lists: Vec<Vec<(u32, u32)>>) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut mult = Vec::new();
        let mut degree = Vec::with_capacity(n);
        offsets.push(0);
        for list in lists.iter_mut() {
            list.sort_unstable();
            let mut d = 0u64;
            let mut i = 0;
            while i < list.len() {
                let (t, _) = list[i];
                let mut m = 0u32;
                while i < list.len() && list[i].0 == t {
                    m += list[i].1;
                    i += 1;
                }
                targets.push(t);
                mult.push(m);
                d += m as u64;
            }
            degree.push(d);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            mult,
            degree,
        }
    }

    pub fn n(&self) -> usize {
        self.degree.len()
    }

    /// Distinct neighbours of `v` with their edge multiplicities.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.mult[range])
            .map(|(&t, &m)| (t as usize, m))
    }

    pub(crate) fn adjacency_range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub(crate) fn raw_targets(&self) -> &[u32] {
        &self.targets
    }

    pub(crate) fn raw_mult(&self) -> &[u32] {
        &self.mult
    }

    /// Weighted degree (edges counted with multiplicity).
    pub fn degree(&self, v: usize) -> u64 {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degree
    }

    /// deg(Γ): the maximum weighted degree.
    pub fn max_degree(&self) -> u64 {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.degree.iter().sum::<u64>() / 2
    }

    /// Each undirected edge once, as `(u, v, multiplicity)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, m)| (u, v, m))
        })
    }

    /// Multiplicity of the edge `{u, v}`, zero when absent.
    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        let range = self.adjacency_range(u);
        match self.targets[range.clone()].binary_search(&(v as u32)) {
            Ok(i) => self.mult[range.start + i],
            Err(_) => 0,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.n() <= 1 {
            return true;
        }
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Graph distances from `src`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for (v, _) in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Membership mask for a vertex set, rejecting out-of-range ids.
    pub fn mask(&self, set: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n()];
        for &v in set {
            if v >= self.n() {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
            }
            mask[v] = true;
        }
        Ok(mask)
    }

    /// External vertex boundary ∂A and edge boundary ∂^E A of a nonempty
    /// proper subset.
    pub fn boundary(&self, set: &[usize]) -> Result<Boundary> {
        let mask = self.mask(set)?;
        let size = mask.iter().filter(|&&b| b).count();
        if size == 0 {
            return Err(Error::EmptySet);
        }
        if size == self.n() {
            return Err(Error::FullSet);
        }
        Ok(self.boundary_of_mask(&mask))
    }

    pub(crate) fn boundary_of_mask(&self, mask: &[bool]) -> Boundary {
        let mut outside = vec![false; self.n()];
        let mut edge = 0u64;
        for u in (0..self.n()).filter(|&u| mask[u]) {
            for (v, m) in self.neighbors(u) {
                if !mask[v] {
                    edge += m as u64;
                    outside[v] = true;
                }
            }
        }
        let vertices: Vec<usize> = (0..self.n()).filter(|&v| outside[v]).collect();
        Boundary {
            vertex: vertices.len(),
            edge,
            vertices,
        }
    }

    /// Diameter by BFS from every vertex; `None` if disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for s in 0..self.n() {
            for d in self.bfs_distances(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Eccentricity of one vertex (equals the diameter on transitive graphs).
    pub fn eccentricity(&self, v: usize) -> Option<u32> {
        self.bfs_distances(v)
            .into_iter()
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }
}
