//! Hybrid SAT solving on small Ising machines: semiprime benchmark
//! generation, CNF simplification, CNF to QUBO/Ising conversion, budgeted
//! subproblem decomposition and emulated annealing.

pub mod circuit;
pub mod cnf;
pub mod decompose;
pub mod error;
pub mod harness;
pub mod preprocess;
pub mod qubo;
pub mod solver;
