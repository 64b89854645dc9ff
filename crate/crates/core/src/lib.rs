//! hoflab: spectral computations for discrete magnetic Schrödinger operators
//! on the square and honeycomb lattices.
//!
//! The library builds finite-volume magnetic random Hamiltonians with Peierls
//! phases in the symmetric gauge, computes magnetic band structures through
//! Floquet matrices at rational flux 2πp/q, certifies Dirac cones at energy
//! zero, predicts Landau levels by Bohr–Sommerfeld quantization, estimates the
//! density of states under i.i.d. disorder, computes quantized Hall
//! conductivities in spectral gaps (Středa and Chern-sum routes), and measures
//! wave-packet transport exponents.
//!
//! Sign convention: hopping prefactors are −1/4 (square) and −1/3 (hexagonal),
//! so the bottom of the square-lattice spectrum sits at −1 and the honeycomb
//! Dirac cones sit at energy 0 between symmetric bands.

pub mod algebra;
pub mod dirac;
pub mod dos;
pub mod error;
pub mod floquet;
pub mod hall;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod rng;
pub mod semiclassics;
pub mod transport;

pub use error::{Error, Result};
