//! Generative model machinery on top of `molvae-chem`.

pub mod codec;
pub mod eval;
pub mod nn;
pub mod objective;
pub mod optim;
pub mod pipeline;
