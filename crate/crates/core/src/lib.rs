//! Grothendieck-ring calculus for quotients of affine spaces by finite
//! abelian groups, with a finite-field point-counting oracle.
//!
//! * [`mclass`]: motivic classes, rewrite sessions, mod-L reduction and
//!   realizations.
//! * [`gfq`]: finite field towers.
//! * [`action`]: semi-linear affine actions, validation and normal form.
//! * [`quotient`]: invariant rings in dimension one, quotient classes and
//!   the orbit-counting oracle.
//! * [`nearby`]: nearby fibers and motivic reductions of SNC models.
//! * [`catalog`]: bundled actions and models; [`jinv`]: j-invariants.

pub mod action;
pub mod catalog;
pub mod gfq;
pub mod jinv;
pub mod mclass;
pub mod nearby;
pub mod quotient;

use num_bigint::BigInt;

/// Classes with arbitrary-precision coefficients.
pub type Class = mclass::MotivicClass<BigInt>;
/// Classes with machine-word coefficients, for small computations.
pub type SmallClass = mclass::MotivicClass<i64>;
pub type Poly = mclass::LefschetzPoly<BigInt>;
