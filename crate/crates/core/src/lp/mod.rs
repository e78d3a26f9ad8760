//! Linear programming: a dense revised simplex and the two clustering relaxations.

pub mod cluster;
pub mod pairwise;
pub mod simplex;

pub use cluster::{solve_cluster_lp_exact, ClusterLpSolution, TripleStats, ZEntry};
pub use pairwise::{solve_pairwise_lp, PairwiseLpSolution};
pub use simplex::{LpProblem, LpSolverReport};
