//! Brute-force equilibria: enumerate pure stopping rules and solve the
//! resulting zero-sum matrix game by linear programming.

pub mod matrix;
pub mod rules;
pub mod simplex;
pub mod solve;

pub use matrix::{build_matrix, GameMatrix};
pub use rules::{enumerate_stopping_rules, rule_count, StoppingRule, DEFAULT_CAP};
pub use solve::{
    clean_mix, mixture_to_generating, pure_gap, solve_scenario, solve_zero_sum, MixedSolution, PureGap,
    ScenarioSolution,
};
