//! Zero-sum stopping games with a hidden binary regime: exact evaluation on
//! finite trees, equilibrium verification, a linear-programming oracle and a
//! diffusion/PDE companion for the filtered model.
//!
//! The tree, scenario and oracle modules are generic over [`Scalar`] (`f32`
//! or `f64`); the diffusion module works in `f64`. The aliases below fix
//! `f64`.

pub mod dynamics;
pub mod error;
pub mod game;
pub mod oracle;
pub mod sample;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::{survival_ratio, Scalar};

pub type TimeGrid = game::TimeGrid<f64>;
pub type FiltrationTree = game::FiltrationTree<f64>;
pub type PayoffTriple = game::PayoffTriple<f64>;
pub type GeneratingProcess = game::GeneratingProcess<f64>;
pub type ScenarioGame = scenario::ScenarioGame<f64>;
pub type StrategyProfile = scenario::StrategyProfile<f64>;
pub type ValueSurfaces = scenario::ValueSurfaces<f64>;
