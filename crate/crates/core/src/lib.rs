//! Simulation of sequence alignment on a resistive content-addressable
//! memory.
//!
//! The [`cam`] module models the array itself, [`microcode`] turns truth
//! tables and vector operations into compare/write/shift cycles, [`energy`]
//! accounts for every cycle, and [`alignment`] runs pairwise and database
//! alignments on top of them. [`oracle`] holds plain dynamic-programming
//! references used to check the simulated results.

pub mod alignment;
pub mod bits;
pub mod cam;
pub mod energy;
pub mod error;
pub mod io;
pub mod microcode;
pub mod oracle;

pub use bits::{BitRow, ColumnSelector, RowPattern};
pub use cam::{CamArray, CompareOutcome, Geometry, WordRow};
pub use energy::{CycleCounts, EnergyBreakdown, EnergyLedger, EnergyParams, Event, RunReport};
pub use error::{Error, Result};
pub use microcode::{MicroOp, MicroProgram};
