//! Reachability and yield analysis for continuous Petri nets.
//!
//! All arithmetic is exact. The main entry points are
//! [`reachable`] / [`at_least_reachable`] for decisions,
//! [`max_yield_binsearch`] and [`milp_max`] for goal-place yield, and
//! [`check_certificate`] for validating Parikh certificates.
//!
//! ```
//! use cpn_core::{fixtures, reachable, Marking, ReachMode};
//!
//! let (net, m0) = fixtures::fig1();
//! let zero = Marking::zeros(net.num_places());
//! assert!(!reachable(&net, &m0, &zero, ReachMode::Finite).unwrap().reachable);
//! assert!(reachable(&net, &m0, &zero, ReachMode::Limit).unwrap().reachable);
//! ```

pub mod error;
pub mod firing_set;
pub mod fixtures;
pub mod generators;
pub mod harness;
pub mod io;
pub mod lp;
pub mod milp;
pub mod net;
pub mod rational;
pub mod reach;
pub mod witness;
pub mod yield_search;

pub use error::{CpnError, Result};
pub use firing_set::{fireable, max_fs, Fireability};
pub use generators::{gen_lattice, gen_random, Instance};
pub use io::{parse_net, serialize_net, NetFile, ResultRecord};
pub use lp::{LinearProgram, LpOutcome, Relation, Sense};
pub use milp::{
    enumerate_solutions, milp_max, solve_milp, Enumeration, ExclusionCut, MilpMaxOptions, MilpProblem, MilpStrategy,
};
pub use net::{Cpn, CpnBuilder, Marking, Parikh, TransitionSet};
pub use rational::{q, ExtendedRational, Rational};
pub use reach::{at_least_reachable, reachable, ReachMode, ReachOptions, ReachResult, ReverseAnchor};
pub use witness::{check_at_least_certificate, check_certificate, replay, Replay};
pub use yield_search::{
    causal_upper_bound, default_epsilon, max_yield_binsearch, query_budget, yield_upper_bound, BisectOptions,
    BoundStatus, YieldResult, YieldStatus,
};
