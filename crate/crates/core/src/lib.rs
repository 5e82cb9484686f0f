//! Symbolic junction-condition engine for polynomial nonlinear PDE systems.
//!
//! The pipeline: parse a PDE system ([`dsl`]), expand the jump ansatz
//! U = ψ + χ·ω and decompose it exactly ([`classify`]), push the
//! decomposition through the Heaviside–Dirac calculus ([`dist`]) to obtain
//! necessary-and-sufficient junction conditions on the jump hypersurface
//! ([`junction`]), and cross-check them numerically by mollification
//! ([`numcheck`]). Everything symbolic is exact rational arithmetic over the
//! canonical polynomial carrier in [`expr`].

pub mod classify;
pub mod dist;
pub mod dsl;
pub mod expr;
pub mod junction;
pub mod numcheck;
