//! Primitive-stability certification for PSL(2,ℂ) representations of
//! surface and free groups.

pub mod charlab;
pub mod cli;
pub mod error;
pub mod hyp;
pub mod primitives;
pub mod pscert;
pub mod settings;
pub mod words;

pub use error::{Error, Result};
