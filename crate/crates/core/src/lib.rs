//! Quantum memory channels as unitary collision models.
//!
//! A device is a fixed unitary interaction between an internal memory and
//! the system passing through it. Because the memory is not reset between
//! uses, the channel seen by the system can drift from one use to the next.
//! This crate simulates such devices and checks when the drift vanishes:
//!
//! * [`repeatability`] builds controlled-U dilations of random unitary
//!   channels (identical channel on every use), evaluates the entropy bound
//!   that limits how often a nonunital channel can be repeated with a finite
//!   memory, and builds shift-register devices that are exactly n-repeatable.
//! * [`tomography`] runs six-probe qubit process tomography against a device
//!   and shows how the probe ordering changes the estimate.
//!
//! Entropies are in bits throughout. Composite spaces are ordered memory
//! first, system second.

pub mod channel;
pub mod device;
pub mod error;
pub mod matrix;
pub mod pauli;
pub mod random;
pub mod repeatability;
pub mod report;
pub mod state;
pub mod tomography;

pub use channel::{ChoiMatrix, KrausChannel, RandomUnitarySpec};
pub use device::{MemoryDevice, Record, UsageTranscript};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ProductSpace};
pub use state::{DensityOperator, UnitaryOperator, DEFAULT_TOLERANCE};
