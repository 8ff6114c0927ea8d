//! Two-way qubit teleportation through a resource that dephases with an environment,
//! simulated on the full qubit-environment density matrix.

pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod protocol;
pub mod scenarios;
pub mod verify;

pub use error::{Error, Result};
