//! Exact symbolic kernel: commutative polynomials over jet atoms.
//!
//! Every smooth symbol in the pipeline — operator left-hand sides, ansatz
//! expansions, certificate multipliers, junction-condition coefficients — is an
//! [`Expr`]: a canonically sorted sum of monomials with exact rational
//! coefficients over free commuting [`Atom`]s. Two expressions are equal as
//! polynomials iff their canonical forms are identical, which makes equality
//! decidable and exact.

mod atom;
mod linop;
mod subst;

pub use atom::{Atom, MultiIndex, Side};
pub use linop::{apply_linear_op, LinearOpError, LinearOpSpec};
pub use subst::{substitute, Bindings, SubstError};

use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A product of atom powers with an exact rational coefficient.
///
/// Factors are sorted by the canonical atom order and exponents are ≥ 1;
/// the factor list is the monomial's identity for merging and ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigRational,
    factors: Vec<(Atom, u32)>,
}

impl Monomial {
    pub fn constant(coeff: BigRational) -> Self {
        Monomial { coeff, factors: Vec::new() }
    }

    pub fn new(coeff: BigRational, mut factors: Vec<(Atom, u32)>) -> Self {
        factors.retain(|(_, e)| *e > 0);
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        // merge duplicate atoms
        let mut merged: Vec<(Atom, u32)> = Vec::with_capacity(factors.len());
        for (atom, exp) in factors {
            match merged.last_mut() {
                Some((last, e)) if *last == atom => *e += exp,
                _ => merged.push((atom, exp)),
            }
        }
        Monomial { coeff, factors: merged }
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.factors
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total degree (sum of exponents).
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Monomial::new(&self.coeff * &other.coeff, factors)
    }

    fn cmp_factors(&self, other: &Monomial) -> Ordering {
        self.factors.cmp(&other.factors)
    }
}

/// Canonical multivariate polynomial over jet atoms.
///
/// Invariant: monomials are sorted by their factor lists, factor lists are
/// unique, and no zero coefficient is stored. The normal form is unique, so
/// derived equality decides polynomial identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr {
    monomials: Vec<Monomial>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { monomials: Vec::new() }
    }

    pub fn one() -> Self {
        Expr::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Expr::from_monomials(vec![Monomial::constant(c)])
    }

    pub fn from_int(i: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::from_monomials(vec![Monomial::new(BigRational::one(), vec![(a, 1)])])
    }

    /// Canonicalize an arbitrary monomial list: sort, merge, drop zeros.
    pub fn from_monomials(monomials: Vec<Monomial>) -> Self {
        let mut sorted = monomials;
        sorted.sort_by(|a, b| a.cmp_factors(b));
        let mut out: Vec<Monomial> = Vec::with_capacity(sorted.len());
        for m in sorted {
            match out.last_mut() {
                Some(last) if last.cmp_factors(&m) == Ordering::Equal => {
                    last.coeff += &m.coeff;
                }
                _ => out.push(m),
            }
        }
        out.retain(|m| !m.coeff.is_zero());
        Expr { monomials: out }
    }

    /// Rebuild the canonical form. Already-canonical inputs come back unchanged.
    pub fn normalized(&self) -> Expr {
        Expr::from_monomials(self.monomials.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// The rational value of a constant expression, if it is one.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.monomials.len() {
            0 => Some(BigRational::zero()),
            1 if self.monomials[0].is_constant() => Some(self.monomials[0].coeff.clone()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial { coeff: &m.coeff * c, factors: m.factors.clone() })
                .collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// All atoms appearing in the expression (with repetition across monomials).
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.monomials.iter().flat_map(|m| m.factors.iter().map(|(a, _)| a))
    }

    /// Substitute every atom through `f` and renormalize.
    ///
    /// This is the ring homomorphism extending `f`; jet consistency is the
    /// caller's responsibility (see [`substitute`] for checked substitution).
    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Expr) -> Expr {
        let mut acc = Expr::zero();
        for m in &self.monomials {
            let mut term = Expr::constant(m.coeff.clone());
            for (atom, exp) in &m.factors {
                term = &term * &f(atom).pow(*exp);
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Total derivative along coordinate direction `dir` (Leibniz over factors).
    pub fn total_derivative(&self, dir: usize) -> Expr {
        let mut parts: Vec<Monomial> = Vec::new();
        for m in &self.monomials {
            for (k, (atom, exp)) in m.factors.iter().enumerate() {
                let datom = match atom {
                    Atom::Coordinate(i) => {
                        if *i == dir {
                            None // derivative is the constant 1
                        } else {
                            continue; // derivative is 0
                        }
                    }
                    _ => Some(atom.bump(dir).expect("non-coordinate atoms carry jets")),
                };
                let mut factors: Vec<(Atom, u32)> = Vec::with_capacity(m.factors.len() + 1);
                for (j, (a, e)) in m.factors.iter().enumerate() {
                    if j == k {
                        if *e > 1 {
                            factors.push((a.clone(), e - 1));
                        }
                    } else {
                        factors.push((a.clone(), *e));
                    }
                }
                if let Some(d) = datom {
                    factors.push((d, 1));
                }
                let coeff = &m.coeff * BigRational::from_integer(BigInt::from(*exp));
                parts.push(Monomial::new(coeff, factors));
            }
        }
        Expr::from_monomials(parts)
    }

    /// Iterated total derivative D^p (direction 0 applied first; the order is
    /// immaterial by derivative commutation).
    pub fn derivative_multi(&self, p: &MultiIndex) -> Expr {
        let mut acc = self.clone();
        for dir in p.directions() {
            acc = acc.total_derivative(dir);
        }
        acc
    }

    /// Collect monomials by the part of their factors selected by `pred`.
    ///
    /// Returns a map from the selected factor list (canonically sorted) to the
    /// expression formed by the unselected remainder of each monomial.
    pub fn collect_by(
        &self,
        pred: impl Fn(&Atom) -> bool,
    ) -> BTreeMap<Vec<(Atom, u32)>, Expr> {
        let mut groups: BTreeMap<Vec<(Atom, u32)>, Vec<Monomial>> = BTreeMap::new();
        for m in &self.monomials {
            let mut key = Vec::new();
            let mut rest = Vec::new();
            for (a, e) in m.factors() {
                if pred(a) {
                    key.push((a.clone(), *e));
                } else {
                    rest.push((a.clone(), *e));
                }
            }
            groups.entry(key).or_default().push(Monomial::new(m.coeff.clone(), rest));
        }
        groups
            .into_iter()
            .map(|(k, ms)| (k, Expr::from_monomials(ms)))
            .collect()
    }
}

/// Canonical total order on expressions (by monomial sequence).
impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.monomials.iter().zip(&other.monomials) {
            let c = a.cmp_factors(b).then_with(|| a.coeff.cmp(&b.coeff));
            if c != Ordering::Equal {
                return c;
            }
        }
        self.monomials.len().cmp(&other.monomials.len())
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut monomials = self.monomials.clone();
        monomials.extend(rhs.monomials.iter().cloned());
        Expr::from_monomials(monomials)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial { coeff: -&m.coeff, factors: m.factors.clone() })
                .collect(),
        }
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut parts = Vec::with_capacity(self.monomials.len() * rhs.monomials.len());
        for a in &self.monomials {
            for b in &rhs.monomials {
                parts.push(a.mul(b));
            }
        }
        Expr::from_monomials(parts)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

/// Decidable polynomial equality: canonical forms compared directly.
pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    a == b
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            let coeff = &m.coeff;
            if i == 0 {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else if coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = coeff.abs();
            if !mag.is_one() || m.is_constant() {
                write!(f, "{mag}")?;
                if !m.is_constant() {
                    write!(f, "*")?;
                }
            }
            for (j, (a, e)) in m.factors().iter().enumerate() {
                if j > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{a:?}")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
