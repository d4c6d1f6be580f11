//! Beam-to-beam contact: penalty laws, line contact, point and endpoint contacts,
//! and the broad-phase candidate search.

pub mod broad_phase;
pub mod kernel;
pub mod line;
pub mod penalty;
pub mod point;

pub use kernel::LocalSystem;
pub use line::{line_contact, BoundaryKind, Candidate, Interval, LineContactResult, LinePoint, LineSettings};
pub use penalty::PenaltyLaw;
pub use point::{PointContact, PointKind};
