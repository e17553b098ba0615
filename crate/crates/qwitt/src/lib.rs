//! Quantum q-series invariants of negative-definite plumbed 3-manifolds and
//! the mod-3 Witt data extracted from their limits at the sixth root of unity.
//!
//! The crate is organized around one computational pipeline:
//!
//! 1. [`plumbing`] — plumbing graphs, their linking matrices and homological data,
//! 2. [`zhat`] — the lattice-theta / principal-value engine producing the exact
//!    q-series invariant per spin-c class,
//! 3. [`falsetheta`] — Eichler integrals of false theta functions: exact finite
//!    sums at roots of unity and the matching partial theta q-series,
//! 4. [`radial`] — numerical radial limits of q-series toward roots of unity,
//! 5. [`wrt`] — quantum SU(2) invariants: a brute-force refined state sum over
//!    colorings and the Gauss-sum contraction of q-series limits,
//! 6. [`witt`] — Witt coefficients, tau recognition on the `i^a sqrt(3)^b`
//!    lattice, and the extraction of `w(Y)`, `def_3`, and mod-3 cohomology ranks.
//!
//! Everything upstream of root-of-unity evaluation is exact (arbitrary-precision
//! integers and rationals); evaluations carry explicit precision and error bounds
//! via [`hp::ComplexHP`].

pub mod cli;
pub mod corpus;
pub mod falsetheta;
pub mod hp;
pub mod linalg;
pub mod plumbing;
pub mod qseries;
pub mod radial;
pub mod witt;
pub mod wrt;
pub mod zhat;

mod book;
