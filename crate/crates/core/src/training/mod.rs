//! Host objectives, their analytic gradients, optimizers, and trainers.

mod model;
mod optim;
mod pp;
mod scbow;
mod trainer;

pub use model::{Gradients, Model, RowGrads, SentenceForward};
pub use optim::{
    adadelta_step, adagrad_step, OptimizerConfig, OptimizerKind, OptimizerState, ADADELTA_EPS, ADADELTA_RHO,
    ADAGRAD_EPS,
};
pub use pp::{
    add_regularizer_grad, mine_negatives, mine_negatives_from_vectors, pp_loss, pp_loss_and_grad, MinedNegatives,
    PpBatch,
};
pub use scbow::{cross_entropy, scbow_loss, scbow_loss_and_grad, scbow_prob, ScbowInstance};
pub use trainer::{random_embeddings, train_pp, train_scbow, EpochLog, PpConfig, ScbowConfig, DEFAULT_SEED};
