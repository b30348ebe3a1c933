//! Verification toolkit for toric mirror-symmetry identities in quantum
//! K-theory and quantum cohomology, at desk scale.
//!
//! The toolkit computes both sides of the following identities for Fano
//! symplectic toric manifolds of Picard rank <= 2 and reports the agreement:
//!
//! - the K-theoretic comparison identity between the q-oscillatory Jackson
//!   integral along the real thimble and the q-gamma-class pairing with the
//!   small K-theoretic I-function ([`oscillatory`]);
//! - the classical comparison identity between the oscillatory integral and
//!   the Gamma-class pairing with the cohomological I-function
//!   ([`oscillatory`]);
//! - the shared q-difference and differential systems satisfied by both
//!   sides, checked exactly in rational arithmetic ([`series`]);
//! - the q -> 1 confluence of the K-theoretic I/J-function to its
//!   cohomological analogue, both coefficientwise and along the q_k spiral
//!   ([`confluence`]);
//! - the q-Mellin factorization of the q-oscillatory integral into q-gamma
//!   values ([`oscillatory`]).
//!
//! Module map:
//! - [`toric`]: moment-map data, validation (compact/smooth/Fano), the rank-2
//!   normal form, and intersection numbers by iterated residues.
//! - [`algebra`]: the nilpotent cohomology quotient ring, Chern characters,
//!   and the characteristic classes Td, Gamma-hat, gamma_q-hat, ch_q.
//! - [`qfun`]: scalar q-special functions with certified truncation tails.
//! - [`series`]: truncated Novikov-series I-functions and the exact
//!   (q-)difference-equation residual checks.
//! - [`oscillatory`]: Jackson and classical oscillatory integrals and the
//!   two comparison pairings.
//! - [`confluence`]: q -> 1 limits, the q_k spiral, and error tables.
//! - [`cli`]: the command-line front end.
//!
//! Exact rational arithmetic is used wherever the identity being checked is
//! exact (intersection numbers, difference-equation residuals); certified
//! double precision is used for the analytic comparisons.

pub mod algebra;
pub mod cli;
pub mod confluence;
pub mod error;
pub mod modelfile;
pub mod oscillatory;
pub mod qfun;
pub mod quad;
pub mod scalar;
pub mod series;
pub mod toric;

pub use error::Error;
pub use scalar::{Rational, Scalar};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
