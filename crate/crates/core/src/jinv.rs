//! j-invariants of short Weierstrass curves y² = x³ + ax + b and of their
//! Frobenius twists y² = x³ + a^p x + b^p.

use crate::gfq::{FieldElement, Fq};

/// 1728·4a³/(4a³ + 27b²), or None for a singular curve (p > 3).
pub fn j_invariant(f: Fq<'_>, a: &FieldElement, b: &FieldElement) -> Option<FieldElement> {
    let four_a3 = f.scale(&f.pow(a, 3), 4);
    let denom = f.add(&four_a3, &f.scale(&f.mul(b, b), 27));
    let inv = f.inv(&denom)?;
    Some(f.scale(&f.mul(&four_a3, &inv), 1728))
}

/// Comparison of a curve with its twist by the absolute Frobenius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistComparison {
    pub a: FieldElement,
    pub b: FieldElement,
    pub j: FieldElement,
    pub j_twist: FieldElement,
    /// b²/a³, when a ≠ 0.
    pub ratio: Option<FieldElement>,
    pub ratio_in_prime_field: bool,
}

impl TwistComparison {
    pub fn same_j(&self) -> bool {
        self.j == self.j_twist
    }

    /// Equal j-invariants exactly when b²/a³ lies in F_p.
    pub fn consistent(&self) -> bool {
        self.ratio.is_none() || self.same_j() == self.ratio_in_prime_field
    }
}

pub fn compare_with_twist(f: Fq<'_>, a: &FieldElement, b: &FieldElement) -> Option<TwistComparison> {
    let (ap, bp) = (f.frob(a, 1), f.frob(b, 1));
    let j = j_invariant(f, a, b)?;
    let j_twist = j_invariant(f, &ap, &bp)?;
    let ratio = f.inv(&f.pow(a, 3)).map(|i| f.mul(&f.mul(b, b), &i));
    let ratio_in_prime_field = ratio.as_ref().is_some_and(|r| f.frob(r, 1) == *r);
    Some(TwistComparison { a: a.clone(), b: b.clone(), j, j_twist, ratio, ratio_in_prime_field })
}
