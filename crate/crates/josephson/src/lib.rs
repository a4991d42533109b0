//! Finite-lattice toolkit for superconducting junction physics.
//!
//! Two computational engines over the same model family:
//!
//! * an exact engine on the fermionic Fock space of up to 24 modes
//!   ([`fock`], [`evolve`], [`junction`]), and
//! * a quasi-free mean-field engine built from gap-equation solutions and
//!   Wick contractions ([`bcs`]), usable at lattice sizes far beyond exact
//!   diagonalization.
//!
//! [`experiments`] drives both engines through the physical checks: the dc
//! current-phase relation, the ac oscillation under a voltage bias, the
//! junction energy law, gauge-shift equivalence, cluster factorization, and
//! engine cross-validation.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bcs;
pub mod evolve;
pub mod experiments;
pub mod fock;
pub mod junction;
pub mod linalg;

mod error;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
