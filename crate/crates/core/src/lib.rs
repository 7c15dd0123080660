//! Growth-rate spectra of filamentary kinematic dynamos and ABC flows in
//! twisted flux-tube coordinates.
//!
//! The reduced induction operator for the normal/binormal field components
//! of a helical filament is a 2×2 matrix ([`operator`]); its spectrum is
//! computed and classified in [`spectrum`] and independently reproduced by
//! time integration in [`sim`]. [`abc`] covers the ABC flow in tube
//! coordinates and the marginal-dynamo result at strong stagnation points.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abc;
pub mod cli;
pub mod flow;
pub mod geometry;
pub mod operator;
pub mod sim;
pub mod spectrum;

pub use operator::{build_matrix, CoefficientScheme, DynamoMatrix, PlasmaParams, SchemeRegistry, SchemeTag};
pub use spectrum::{characteristic_roots, ModeClass, Spectrum};
