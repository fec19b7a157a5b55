#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod branch;
pub mod error;
pub mod gluing;
pub mod lsq;
pub mod metric;
pub mod obstruction;
pub mod math;
pub mod params;
pub mod profile;
pub mod quad;
pub mod residuals;
pub mod roots;
pub mod series;

pub use error::{Error, Result};
