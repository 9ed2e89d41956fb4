//! Equilibria of two-candidate costly-voting games under perceived-pivotality models.

pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod outcome;
pub mod ppm;
pub mod special;
pub mod support;

pub use equilibrium::{
    best_response, check_stability, classify_point, classify_rate, find_equilibria,
    find_equilibria_with, trace_sequence, EquilibriumKind, EquilibriumPoint, EquilibriumSequence,
    Selection, SolverConfig,
};
pub use error::{Error, Result};
pub use outcome::{
    exact_win_probability, jury_classify, mc_win_probability, normal_win_probability,
    polynomial_limit_wp, JuryClass, JuryVerdict, Method, WinProbability,
};
pub use ppm::{classify_ppm, Growth, PivotalityClass, Ppm, RateClass, Vanishing};
pub use support::{Issue, IssueSpec, PivotSet, SupportFunction};
