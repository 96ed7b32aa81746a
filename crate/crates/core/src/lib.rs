//! Fixed points of max/min probabilistic polynomial systems and reachability in
//! branching Markov decision processes and games.

pub mod bmdp;
pub mod certify;
pub mod error;
pub mod format;
pub mod graph;
pub mod gnm;
pub mod iterate;
pub mod linalg;
pub mod policy;
pub mod pps;
pub mod qualitative;
pub mod scalar;
pub mod sim;
pub mod simplex;
pub mod snf;
pub mod strategy;
pub mod synth;

pub use error::{Error, Result};
pub use gnm::{solve_gfp, solve_lfp, Mode, SolveOptions, SolveReport, ValueVector};
pub use policy::{Choice, Policy};
pub use pps::{Equation, MaxMinPps, Monomial, Player, ProbPoly, SystemClass};
pub use snf::{to_snf, SnfForm, SnfSystem};
