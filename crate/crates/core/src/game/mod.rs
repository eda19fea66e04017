pub mod device;
pub mod expected;
pub mod generating;
pub mod grid;
pub mod payoff;
pub mod tree;

pub use device::{DeviceSequence, RandomDevice, Role};
pub use expected::{expected_payoff_exact, expected_payoff_mc, Estimate, LeafSampler};
pub use generating::{validate_levels, GeneratingProcess, Violation};
pub use grid::TimeGrid;
pub use payoff::PayoffTriple;
pub use tree::{FiltrationTree, NodeSpec, TreePath};
