//! Adiabaticity analysis for slowly driven closed and open quantum systems.
//!
//! Closed systems are tracked through their instantaneous eigenbasis,
//! open systems through the Jordan form of the Lindblad supermatrix.

pub mod closed;
pub mod consistency;
pub mod error;
pub mod export;
pub mod numkit;
pub mod ode;
pub mod open;
pub mod quadrature;
pub mod schedules;
pub mod trajectory;

pub use error::{Error, Result};
pub use schedules::{GeneratorSpec, Model, SystemKind};
pub use trajectory::Trajectory;
