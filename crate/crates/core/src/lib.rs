//! Exact arithmetic for irrational rotations, step cocycles over them, and the
//! linear coboundary equation `φ = ψ − ψ∘T_α`.

pub mod circle;
pub mod coboundary;
pub mod contfrac;
pub mod error;
pub mod fixed;
pub mod ostrowski;
pub mod stepcocycle;
pub mod serde_util;
pub mod skewsim;
pub mod verify;

pub use error::{Error, Result};
