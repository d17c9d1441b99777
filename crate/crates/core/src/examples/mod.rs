//! Built-in concrete model families with independent oracles.

pub mod cuntz;
pub mod group;
pub mod semicircular;
