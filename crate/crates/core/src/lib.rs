//! Measurement-induced nonlocality (MIN) of bipartite quantum states.
//!
//! The trace-norm measure `N1(ρ) = max_Π ‖ρ − Π(ρ)‖₁` maximizes over
//! projective measurements on party A that leave `ρ_A` invariant. This crate
//! evaluates it in closed form where one exists (two-qubit states, `2×n`
//! pure states, Werner and isotropic families) and by brute-force search
//! otherwise, alongside the Hilbert-Schmidt and Bures variants, local
//! channels on party B, and the geometry of Bell-diagonal level sets.

pub mod audit;
pub mod channels;
pub mod error;
pub mod geometry;
pub mod matcore;
pub mod measure;
pub mod min;
pub mod states;

pub use error::{Error, Result};
