//! Diffusion with a hidden drift regime: filtering, simulation, the coupled
//! obstacle system for the players' values, strategy extraction and Monte
//! Carlo verification.

mod band;
pub mod expr;
pub mod generator;
pub mod model;
pub mod paths;
pub mod pde;
pub mod strategy;
pub mod verify;

pub use expr::Expr;
pub use generator::{analytic_generator, generator_check, Derivatives, GeneratorCheck, GeneratorCoefficients, GeneratorMode, TestFunction};
pub use model::{Coefficients, DiffusionModel, StoppingPayoffs};
pub use paths::{posterior_from_likelihood, RegimePath, simulate_filter_paths, simulate_in_regime, simulate_regime_paths, ClampStats, PathBundle, Recording};
pub use pde::{pde_solve_system, reference_dynkin_1d, GridSize, PdeGrid, PdeOptions, PdeSurfaces};
pub use strategy::{extract_strategies, StrategyMap, StrategyPath, UninformedRule};
pub use verify::{mc_verify_sufficiency, ConditionCheck, SufficiencyReport, VerifyOptions};
