//! Convolutional actor and critic for the log-map navigation policy, with
//! hand-written reverse-mode gradients, PPO losses, Adam and a binary
//! checkpoint format.
//!
//! Everything is generic over [`Real`] so gradient checks can run in `f64`
//! while training runs in `f32`.

pub mod checkpoint;
pub mod error;
pub mod loss;
pub mod net;
pub mod optim;
pub mod params;
pub mod policy;
pub mod real;

pub use checkpoint::Checkpoint;
pub use error::{Error, Result};
pub use net::{Cache, NetSpec, Trunk};
pub use optim::Adam;
pub use params::ParamSet;
pub use policy::{action_to_command, ActionDistribution, PolicyNet, ValueNet};
pub use real::Real;
