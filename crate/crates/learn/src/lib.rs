//! Learned flip policies: a small reverse-mode tensor library, the
//! EGNN/simplicial policy network and PPO training against the flip
//! environments of `flipforge-core`.

pub mod checkpoint;
pub mod gradcheck;
pub mod params;
pub mod policy;
pub mod ppo;
pub mod tape;
pub mod tensor;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use params::{Adam, ParamStore};
pub use policy::{ActorKind, ModelConfig, ModelError, PolicyNet, StateGraph};
pub use ppo::{train, TrainError, TrainInstance, TrainerConfig};
pub use tape::{Gradients, Tape, Var};
pub use tensor::{Sparse, Tensor};
