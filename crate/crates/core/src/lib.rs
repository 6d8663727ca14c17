//! Simulation and exact path algorithms for the regenerative sets cut out of
//! a two-sided Lévy path by sloped infima and Lipschitz minorants.
//!
//! The crate is `no_std` with `alloc`: everything here is a pure function of
//! its inputs and a seed. File formats, the CLI and parallel replica drivers
//! live in the companion `regenset` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod math;
pub mod minorant;
pub mod process;
pub mod quad;
pub mod seed;
pub mod sets;
pub mod stats;
pub mod sweep;
pub mod theory;

pub use error::{Error, Result};

pub use process::{mean_slope, simulate, JumpLaw, PathGrid, ProcessKind, ProcessSpec, Sampling};
pub use sets::{ClosedSet, Interval, SetComparison, Window};
pub use minorant::{MinorantKind, MinorantProfile};
pub use sweep::{CatalogEntry, SweepKind, SweepResult};
pub use theory::TheoryCurve;



