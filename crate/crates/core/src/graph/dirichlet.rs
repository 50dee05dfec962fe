use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::cayley::BallGraph;
use crate::graph::network::Graph;

/// A network with two collapsed terminals.
///
/// Vertex 0 is the source, vertex `n - 1` the ground, and `1..n-1` are the
/// free vertices. Free vertices that cannot reach both terminals carry no
/// current and are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalProblem {
    pub graph: Graph,
    /// Original id of every free vertex, indexed by `free id - 1`.
    pub free_origin: Vec<usize>,
    pub source_set: Vec<usize>,
    pub ground_set: Vec<usize>,
}

impl TerminalProblem {
    /// Collapse `source` and `ground` of `graph` into single terminals.
    pub fn collapse(graph: &Graph, source: &[usize], ground: &[usize]) -> Result<Self> {
        let n = graph.n();
        let mut role = vec![0u8; n];
        for (set, tag) in [(source, 1u8), (ground, 2u8)] {
            if set.is_empty() {
                return Err(Error::EmptySet);
            }
            for &v in set {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if role[v] != 0 && role[v] != tag {
                    return Err(Error::BadArguments(format!("vertex {v} is in both terminal sets")));
                }
                role[v] = tag;
            }
        }

        // Vertices reachable from each terminal through free vertices only.
        let reach = |from: u8| {
            let mut seen = vec![false; n];
            let mut queue: VecDeque<usize> = (0..n).filter(|&v| role[v] == from).collect();
            for &v in &queue {
                seen[v] = true;
            }
            while let Some(u) = queue.pop_front() {
                for (v, _) in graph.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        if role[v] == 0 {
                            queue.push_back(v);
                        }
                    }
                }
            }
            seen
        };
        let from_source = reach(1);
        let from_ground = reach(2);
        let linked = (0..n).any(|v| role[v] == 2 && from_source[v]);
        if !linked {
            return Err(Error::DisconnectedTerminals);
        }

        let free_origin: Vec<usize> = (0..n)
            .filter(|&v| role[v] == 0 && from_source[v] && from_ground[v])
            .collect();
        let ground_id = free_origin.len() + 1;
        let mut id = vec![usize::MAX; n];
        for (i, &v) in free_origin.iter().enumerate() {
            id[v] = i + 1;
        }
        for v in 0..n {
            match role[v] {
                1 => id[v] = 0,
                2 => id[v] = ground_id,
                _ => {}
            }
        }

        let edges = graph
            .edges()
            .filter(|&(u, v, _)| id[u] != usize::MAX && id[v] != usize::MAX)
            .map(|(u, v, m)| (id[u], id[v], m));
        let collapsed = Graph::from_edges_unchecked(ground_id + 1, edges)?;

        let mut source_set = source.to_vec();
        source_set.sort_unstable();
        source_set.dedup();
        let mut ground_set = ground.to_vec();
        ground_set.sort_unstable();
        ground_set.dedup();
        Ok(TerminalProblem {
            graph: collapsed,
            free_origin,
            source_set,
            ground_set,
        })
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn ground(&self) -> usize {
        self.graph.n() - 1
    }

    pub fn free_count(&self) -> usize {
        self.graph.n() - 2
    }

    /// Swap the roles of source and ground.
    pub fn reversed(&self) -> Self {
        let n = self.graph.n();
        let flip = |v: usize| if v == 0 || v == n - 1 { n - 1 - v } else { v };
        let edges = self.graph.edges().map(|(u, v, m)| (flip(u), flip(v), m));
        TerminalProblem {
            graph: Graph::from_edges_unchecked(n, edges).expect("ids are in range"),
            free_origin: self.free_origin.clone(),
            source_set: self.ground_set.clone(),
            ground_set: self.source_set.clone(),
        }
    }
}

/// How the ground terminal of a ball problem is described.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletMode {
    /// Ground is the sphere S(x, r + 1).
    Sphere,
    /// Ground is everything outside B(x, r).
    Complement,
}

/// Centre-to-outside problem: source is the centre, ground is S(x, r + 1)
/// or Γ \ B(x, r). Both modes collapse to the same network.
pub fn dirichlet_problem(ball: &BallGraph, r: u32, mode: DirichletMode) -> Result<TerminalProblem> {
    if ball.radius < r + 1 {
        return Err(Error::RadiusTooSmall {
            need: r + 1,
            have: ball.radius,
        });
    }
    let ground: Vec<usize> = match mode {
        DirichletMode::Sphere => ball.sphere(r + 1).collect(),
        DirichletMode::Complement => (ball.inner_ball(r).end..ball.len()).collect(),
    };
    if ground.is_empty() {
        return Err(Error::DisconnectedTerminals);
    }
    TerminalProblem::collapse(&ball.graph, &[ball.center()], &ground)
}
