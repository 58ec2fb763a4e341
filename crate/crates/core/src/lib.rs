//! Linear programming, total unimodularity and disaster-relief allocation.
//!
//! The three models (expendable and non-expendable resource allocation, and
//! k-medoid relief-centre location) have totally unimodular constraint
//! systems, so a vertex-terminating simplex method returns integral optima.
//! [`bnb`] and [`oracle`] provide independent integer answers to check that
//! against, and [`harness`] times the two approaches side by side.

pub mod bnb;
pub mod harness;
pub mod lp;
pub mod models;
pub mod oracle;
pub mod tu;
