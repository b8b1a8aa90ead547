//! Ostrowski-type error bounds for functions whose derivative (or a power of
//! it) is strongly convex, an oracle-backed harness that checks every bound
//! numerically, and a composite-midpoint integrator with a-priori error
//! certificates.

pub mod bounds;
pub mod cli;
pub mod corpus;
pub mod expr;
pub mod integrator;
pub mod json;
pub mod oracle;
pub mod sum;
pub mod verify;
