//! Linear differential operators with smooth x-dependent coefficients.

use super::{Atom, Expr, MultiIndex};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearOpError {
    #[error("operator coefficient contains non-x atom {0:?}")]
    NonXCoefficient(Atom),
    #[error("multi-index length {found} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A finite sum Σ_j c_j(x)·D^{q_j} of coefficiented derivative monomials.
///
/// Coefficients may contain only coordinate and named-coefficient atoms, so an
/// operator is a fixed linear map on expressions regardless of the unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearOpSpec {
    dim: usize,
    terms: Vec<(Expr, MultiIndex)>,
}

impl LinearOpSpec {
    pub fn new(dim: usize, terms: Vec<(Expr, MultiIndex)>) -> Result<Self, LinearOpError> {
        for (coeff, q) in &terms {
            if q.len() != dim {
                return Err(LinearOpError::DimensionMismatch { expected: dim, found: q.len() });
            }
            for atom in coeff.atoms() {
                let in_range = match atom {
                    Atom::Coordinate(i) => *i < dim,
                    Atom::CoeffFn { deriv, .. } => deriv.len() == dim,
                    _ => return Err(LinearOpError::NonXCoefficient(atom.clone())),
                };
                if !in_range {
                    return Err(LinearOpError::DimensionMismatch {
                        expected: dim,
                        found: match atom {
                            Atom::Coordinate(i) => *i + 1,
                            Atom::CoeffFn { deriv, .. } => deriv.len(),
                            _ => unreachable!(),
                        },
                    });
                }
            }
        }
        Ok(LinearOpSpec { dim, terms })
    }

    pub fn identity(dim: usize) -> Self {
        LinearOpSpec { dim, terms: vec![(Expr::one(), MultiIndex::zero(dim))] }
    }

    pub fn derivative(dim: usize, dir: usize) -> Self {
        LinearOpSpec { dim, terms: vec![(Expr::one(), MultiIndex::unit(dim, dir))] }
    }

    pub fn zero(dim: usize) -> Self {
        LinearOpSpec { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Expr, MultiIndex)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_zero())
    }

    pub fn order(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, q)| q.order())
            .max()
            .unwrap_or(0)
    }

    /// Σ_j c_j · D^{q_j} e.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (coeff, q) in &self.terms {
            acc = acc + coeff.clone() * e.derivative_multi(q);
        }
        acc
    }

    /// The homogeneous part of exact derivative order `k`.
    pub fn homogeneous_part(&self, k: u32) -> LinearOpSpec {
        LinearOpSpec {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, q)| q.order() == k).cloned().collect(),
        }
    }

    /// First-order homogeneous part (drops the zero-order multiplication term).
    pub fn first_order_part(&self) -> LinearOpSpec {
        self.homogeneous_part(1)
    }

    pub fn add(&self, other: &LinearOpSpec) -> Result<LinearOpSpec, LinearOpError> {
        if self.dim != other.dim {
            return Err(LinearOpError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(LinearOpSpec { dim: self.dim, terms })
    }

    pub fn scaled(&self, factor: &Expr) -> Result<LinearOpSpec, LinearOpError> {
        LinearOpSpec::new(
            self.dim,
            self.terms
                .iter()
                .map(|(c, q)| (factor.clone() * c.clone(), q.clone()))
                .collect(),
        )
    }
}

/// Free-function form of [`LinearOpSpec::apply`].
pub fn apply_linear_op(op: &LinearOpSpec, e: &Expr) -> Expr {
    op.apply(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn u(p: u32) -> Expr {
        Expr::atom(Atom::UnknownJet { alpha: 0, deriv: MultiIndex::from_entries(vec![p]) })
    }

    #[test]
    fn identity_is_identity() {
        let e = u(0).pow(2) + u(1);
        assert_eq!(LinearOpSpec::identity(1).apply(&e), e);
    }

    #[test]
    fn derivative_op_chain_rule() {
        // D_x(u²) = 2u·u'
        let got = LinearOpSpec::derivative(1, 0).apply(&u(0).pow(2));
        assert_eq!(got, (u(0) * u(1)).scale(&rat(2, 1)));
    }

    #[test]
    fn coefficiented_first_order_op() {
        // (c(x)·D_x + 1) u = c·u' + u
        let c = Expr::atom(Atom::coeff_fn("c", 1));
        let op = LinearOpSpec::new(
            1,
            vec![(c.clone(), MultiIndex::unit(1, 0)), (Expr::one(), MultiIndex::zero(1))],
        )
        .unwrap();
        assert_eq!(op.apply(&u(0)), c * u(1) + u(0));
        assert_eq!(op.order(), 1);
        assert_eq!(op.first_order_part().apply(&u(0)), Expr::atom(Atom::coeff_fn("c", 1)) * u(1));
    }

    #[test]
    fn unknown_coefficients_are_rejected() {
        let err = LinearOpSpec::new(1, vec![(u(0), MultiIndex::zero(1))]).unwrap_err();
        assert!(matches!(err, LinearOpError::NonXCoefficient(_)));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = LinearOpSpec::new(2, vec![(Expr::one(), MultiIndex::zero(1))]).unwrap_err();
        assert_eq!(err, LinearOpError::DimensionMismatch { expected: 2, found: 1 });
    }
}
