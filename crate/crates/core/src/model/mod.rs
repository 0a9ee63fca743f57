//! The shallow convolutional classifier: embedding lookup, one trigram
//! convolution with a rectifier, global max pooling and a single sigmoid
//! output, with hand-written gradients and RMSprop.

mod cnn;
mod optim;
mod train;

pub use cnn::{
    dense_logit, loss, CnnHyper, CnnModel, CnnParams, ForwardCache, Gradients, TokenResponses, CNN_KIND, PARAM_GROUPS,
    TRIGRAM,
};
pub use optim::{rmsprop_step, RmsPropConfig};
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};
