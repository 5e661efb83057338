//! Graph isomorphism layer, actor and critic heads with hand-written
//! gradients, the Adam optimizer and a checksummed checkpoint format.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod graph;
pub mod network;
pub mod params;
pub mod real;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, CheckpointMeta};
pub use graph::GraphInput;
pub use network::{Evaluation, Mode, NetError};
pub use params::{GradTape, Group, NetConfig, Params, Tensor};
pub use real::Real;

/// Network parameters in the precision used for training.
pub type PolicyParams = Params<f32>;
pub type PolicyGrads = GradTape<f32>;
pub type PolicyGraph = GraphInput<f32>;
