//! Potential theory on vertex-transitive Cayley graphs.
//!
//! `vtresist` builds finite Cayley graphs and metric balls of (possibly
//! infinite) abelian Cayley graphs, solves the discrete p-Dirichlet problem
//! to obtain p-potentials, p-capacities and p-resistances, estimates escape
//! probabilities of the simple random walk, and evaluates the known two-sided
//! resistance bounds (Nash-Williams cutset sums, Benjamini–Kozma isoperimetric
//! sums, Coulhon–Saloff-Coste isoperimetry from growth) against exact values.
//!
//! The numeric code is generic over the scalar type (`f32`/`f64`, see
//! [`Scalar`]); exponent bookkeeping additionally works over exact rationals
//! (see [`Real`]). Concrete `f64` aliases are exported at the crate root.
//!
//! ```
//! use vtresist::graph::{build_ball, dirichlet_problem, DirichletMode, GraphSpec};
//! use vtresist::penergy::p_resistance;
//!
//! // Two parallel 4-edge paths: the 8-cycle seen from the centre of a ball.
//! let spec: GraphSpec = "family = \"cyclic_chords\"\nfactors = [8]\ngenerators = [\"chords:1\"]\n"
//!     .parse()
//!     .unwrap();
//! let ball = build_ball(&spec, 4).unwrap();
//! let problem = dirichlet_problem(&ball, 3, DirichletMode::Complement).unwrap();
//! let flow = p_resistance::<f64>(&problem, 2.0).unwrap();
//! assert!((flow.resistance - 2.0).abs() < 1e-9);
//! ```

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod isoperimetry;
pub mod penergy;
pub mod scalar;
pub mod walks;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Tool version embedded in every experiment artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Potential64 = penergy::Potential<f64>;
pub type FlowResult64 = penergy::FlowResult<f64>;
pub type SolverConfig64 = penergy::SolverConfig<f64>;
pub type BoundReport64 = bounds::BoundReport<f64>;
pub type Exponents64 = bounds::Exponents<f64>;
pub type ExactExponents = bounds::Exponents<num_rational::Ratio<i64>>;
