//! Dataset generation, supervised training, and reinforcement learning.

mod policy;
mod replay;
mod rl;
mod supervised;

pub use policy::{
    choose_greedy, choose_lookahead, choose_rl, choose_rl_lookahead, q_values, GreedyBot,
    HeuristicLeaf, LeafEvaluator, LookaheadBot, QLeaf,
};
pub use replay::{generate_replay, ReplayBuffer, ReplayDataset, ReplaySample};
pub use rl::{epsilon, rl_train, rl_train_from, LogRecord, RlConfig, TrainingLog};
pub use supervised::{train_supervised, train_supervised_into, EpochLog, SupervisedConfig};
