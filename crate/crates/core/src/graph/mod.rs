//! Cayley graphs, metric balls and boundaries.

mod cayley;
mod dirichlet;
mod growth;
mod network;
mod spec;

pub use cayley::{
    build_ball, build_ball_capped, build_cayley_graph, build_cayley_graph_capped, BallGraph, DEFAULT_SIZE_CAP,
};
pub use dirichlet::{dirichlet_problem, DirichletMode, TerminalProblem};
pub use growth::{growth_profile, GrowthProfile};
pub use network::{Boundary, Graph};
pub(crate) use spec::short_hash;
pub use spec::{FactorSet, Family, GenTerm, GraphSpec, Modulus};
