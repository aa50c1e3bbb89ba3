//! Decision procedures and axiom synthesis for products of difference frames.

pub mod constraints;
pub mod error;
pub mod experiment;
pub mod extnat;
pub mod formula;
pub mod frame;
pub mod grid;
pub mod pipeline;
pub mod pmorph;
pub mod semantics;
pub mod synth;

pub use error::{Error, Result};
pub use extnat::ExtNat;
