//! Discovery and elementary proofs of Ramanujan-type congruences
//! p₋ₐ(ℓn + r) ≡ 0 (mod ℓ) for powers of the partition generating function.
//!
//! The pipeline: [`search`] finds congruences numerically from truncated
//! [`qseries`]; [`prover`] rewrites 1/E(q)^a through E(q)³ and E(q^ℓ), builds
//! the polynomial POL and the relations Q_m in [`gradedpoly`], and either
//! observes POL = 0 or certifies POL ∈ (Q_m) with [`ideals`]. Certificates
//! are plain JSON and are re-checked from scratch by
//! [`prover::verify_certificate`].

pub mod cli;
pub mod error;
pub mod gradedpoly;
pub mod ideals;
pub mod linalg;
pub mod modfield;
pub mod prover;
pub mod qseries;
pub mod residues;
pub mod search;

pub use error::{Error, Result};
