#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod enumerate;
pub mod error;
pub mod real;
pub mod samplers;
pub mod model;
pub mod oracles;
pub mod partitions;
pub mod series;
pub mod tree;

pub use error::{Error, Result};
pub use real::Real;
pub use series::{Field, Scalar, Series, TruncSeries};
