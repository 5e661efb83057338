//! Policy learning for running-order decisions: tree walks guided by the
//! network, episode rollouts with section rewards, clipped policy-gradient
//! updates and the two-stage curriculum with distillation.

pub mod config;
pub mod ppo;
pub mod rollout;
pub mod train;
pub mod walk;

pub use config::{ConfigError, TrainConfig};
pub use rollout::{reward, rollout, solve_greedy, RolloutConfig, RolloutError, Step, Trajectory};
pub use train::{train, CurvePoint, DelayKind, InstanceSampler, TrainError, TrainOutcome};
pub use walk::{route_walk, Decision, DecisionState, WalkMode};
