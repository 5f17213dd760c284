//! Non-linear (Ehresmann), principal and linear connections in local
//! coordinates, together with the machinery to machine-verify their
//! coordinate identities: curvature as a commutator of covariant
//! derivatives, the principal connection axiom, Cartan's structure
//! equation through gauge covariance, and the universality of principal
//! curvature on associated bundles.

pub mod expr;
pub mod linalg;

pub mod bundle;
pub mod connection;
pub mod liegroup;
pub mod principal;
pub mod associate;
pub mod transport;

pub mod config;
pub mod report;
pub mod runner;
pub mod sampling;
