//! Verification and measurement built on the flows.

pub mod ensemble;
pub mod derivative;
pub mod checks;
pub mod quasi_arc;
pub mod hulls;
pub mod report;
pub mod suite;
