//! Induced representations of finite-index subgroups of SL2(Z) and lifting
//! of vector-valued automorphic forms.
//!
//! The pipeline: describe a finite-index subgroup by a coset enumeration,
//! induce a finite-dimensional representation of the subgroup up to the full
//! modular group, and transport an automorphic form for the subgroup to a
//! vector-valued form for SL2(Z) whose components interleave the cusp
//! expansions of the original. Expansion coefficients stay exact (cyclotomic
//! rationals) whenever the input data permits.

pub mod cmat;
pub mod error;
pub mod induction;
pub mod io;
pub mod lift;
pub mod qseries;
pub mod rep;
pub mod scalar;
pub mod sl2;
pub mod subgroup;

pub use error::{Error, ErrorClass, Result};
