//! The learned scoring function: a multi-layer perceptron producing one
//! logit per hypothesis, and the Gumbel-Softmax that turns a pool of logits
//! into selection probabilities.

mod gumbel;
mod network;

pub use gumbel::{gumbel_softmax, softmax, GumbelConfig, GumbelSample};
pub use network::{Gradients, Layer, Optimizer, ScoringNetwork, Task};
