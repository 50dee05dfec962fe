use serde::{Deserialize, Serialize};

use crate::graph::cayley::BallGraph;

/// Ball and sphere cardinalities β(0..=R), σ(0..=R).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub beta: Vec<u64>,
    pub sigma: Vec<u64>,
    /// β(1) − 1.
    pub degree: u64,
    /// Set when the ambient graph is finite and the ball covers it.
    pub diameter: Option<u32>,
}

pub fn growth_profile(ball: &BallGraph) -> GrowthProfile {
    let sigma: Vec<u64> = (0..=ball.radius).map(|r| ball.sphere(r).len() as u64).collect();
    let beta: Vec<u64> = sigma
        .iter()
        .scan(0u64, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let degree = beta.get(1).map_or(ball.ambient_degree, |b| b - 1);
    let diameter = ball
        .covers_ambient()
        .then(|| sigma.iter().rposition(|&s| s > 0).unwrap_or(0) as u32);
    GrowthProfile {
        beta,
        sigma,
        degree,
        diameter,
    }
}

impl GrowthProfile {
    /// Largest radius recorded.
    pub fn radius(&self) -> u32 {
        self.beta.len() as u32 - 1
    }

    /// β(r); beyond the recorded range only known once the graph is covered.
    pub fn beta_at(&self, r: u32) -> Option<u64> {
        match self.beta.get(r as usize) {
            Some(&b) => Some(b),
            None => self.diameter.map(|_| *self.beta.last().unwrap()),
        }
    }

    /// |Γ| for a covered finite graph.
    pub fn order(&self) -> Option<u64> {
        self.diameter.map(|_| *self.beta.last().unwrap())
    }

    /// φ(ξ) = min{r ≥ 1 : β(r) ≥ ξ}, when determined by the profile.
    pub fn phi(&self, xi: u64) -> Option<u32> {
        (1..self.beta.len()).find(|&r| self.beta[r] >= xi).map(|r| r as u32)
    }
}
