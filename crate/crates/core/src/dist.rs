//! Heaviside–Dirac generalized expressions concentrated on Γ = {γ = 0}.
//!
//! A [`GenExpr`] is a finite sum  a·1 + b·H_γ + Σ_l c_l·D^lδ_γ  with smooth
//! [`Expr`] coefficients. The calculus consists of four rewrite facts:
//! derivatives of H_γ and D^lδ_γ produce a (D^pγ) factor and raise the Dirac
//! order, an explicit γ factor kills δ_γ, and  γ·D^{l+1}δ_γ = −(l+1)·D^lδ_γ.
//! Products involving Dirac atoms are deliberately *not* defined: on resoluble
//! derivation paths they never occur, so hitting one is reported as an error
//! instead of being assigned an arbitrary value.

use crate::expr::{rat, Atom, Expr, MultiIndex};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use thiserror::Error;

/// One singular carrier: the constant 1, H_γ, or D^lδ_γ (l = 0 is δ_γ itself).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DistAtom {
    One,
    Heaviside,
    DiracDeriv(u32),
}

impl fmt::Display for DistAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistAtom::One => write!(f, "1"),
            DistAtom::Heaviside => write!(f, "H"),
            DistAtom::DiracDeriv(0) => write!(f, "delta"),
            DistAtom::DiracDeriv(l) => write!(f, "D^{l}delta"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    /// δ·δ, δ·H and friends: exactly the products resolubility avoids.
    #[error("unsupported distributional product {left} * {right}")]
    UnsupportedDistributionalProduct { left: DistAtom, right: DistAtom },
    #[error("K_(p,l) is undefined for p = {p} with l = {l}")]
    KOutOfRange { p: MultiIndex, l: u32 },
}

/// Finite map from singular carrier to smooth coefficient; zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenExpr {
    parts: BTreeMap<DistAtom, Expr>,
}

impl GenExpr {
    pub fn zero() -> Self {
        GenExpr::default()
    }

    pub fn smooth(e: Expr) -> Self {
        GenExpr::single(DistAtom::One, e)
    }

    pub fn heaviside() -> Self {
        GenExpr::single(DistAtom::Heaviside, Expr::one())
    }

    pub fn dirac(l: u32) -> Self {
        GenExpr::single(DistAtom::DiracDeriv(l), Expr::one())
    }

    pub fn single(atom: DistAtom, coeff: Expr) -> Self {
        let mut parts = BTreeMap::new();
        if !coeff.is_zero() {
            parts.insert(atom, coeff);
        }
        GenExpr { parts }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = (&DistAtom, &Expr)> {
        self.parts.iter()
    }

    /// Coefficient of `atom` (zero if absent).
    pub fn part(&self, atom: &DistAtom) -> Expr {
        self.parts.get(atom).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn has_dirac(&self) -> bool {
        self.parts.keys().any(|a| matches!(a, DistAtom::DiracDeriv(_)))
    }

    fn insert_add(&mut self, atom: DistAtom, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        let sum = &self.part(&atom) + &coeff;
        if sum.is_zero() {
            self.parts.remove(&atom);
        } else {
            self.parts.insert(atom, sum);
        }
    }

    /// Apply `f` to every coefficient, dropping resulting zeros.
    pub fn map_coeffs(&self, mut f: impl FnMut(&Expr) -> Expr) -> GenExpr {
        let mut out = GenExpr::zero();
        for (atom, coeff) in &self.parts {
            out.insert_add(atom.clone(), f(coeff));
        }
        out
    }

    /// Multiply every part by a smooth expression.
    pub fn scale(&self, factor: &Expr) -> GenExpr {
        self.map_coeffs(|c| c * factor)
    }
}

impl Add for &GenExpr {
    type Output = GenExpr;
    fn add(self, rhs: &GenExpr) -> GenExpr {
        let mut out = self.clone();
        for (atom, coeff) in &rhs.parts {
            out.insert_add(atom.clone(), coeff.clone());
        }
        out
    }
}

impl Sub for &GenExpr {
    type Output = GenExpr;
    fn sub(self, rhs: &GenExpr) -> GenExpr {
        self + &(-rhs)
    }
}

impl Neg for &GenExpr {
    type Output = GenExpr;
    fn neg(self) -> GenExpr {
        self.map_coeffs(|c| -c)
    }
}

impl Add for GenExpr {
    type Output = GenExpr;
    fn add(self, rhs: GenExpr) -> GenExpr {
        &self + &rhs
    }
}

impl Sub for GenExpr {
    type Output = GenExpr;
    fn sub(self, rhs: GenExpr) -> GenExpr {
        &self - &rhs
    }
}

impl Neg for GenExpr {
    type Output = GenExpr;
    fn neg(self) -> GenExpr {
        -&self
    }
}

/// Product of two generalized expressions.
///
/// Defined cases: smooth·anything (coefficient multiplication) and H·H → H
/// (idempotence of the {0,1}-valued Heaviside). Any product touching a Dirac
/// atom on both sides, or Dirac·Heaviside, is an error.
pub fn gen_mul(g1: &GenExpr, g2: &GenExpr) -> Result<GenExpr, DistError> {
    let mut out = GenExpr::zero();
    for (a1, c1) in g1.parts() {
        for (a2, c2) in g2.parts() {
            let carrier = match (a1, a2) {
                (DistAtom::One, other) | (other, DistAtom::One) => other.clone(),
                (DistAtom::Heaviside, DistAtom::Heaviside) => DistAtom::Heaviside,
                _ => {
                    return Err(DistError::UnsupportedDistributionalProduct {
                        left: a1.clone(),
                        right: a2.clone(),
                    })
                }
            };
            out.insert_add(carrier, c1 * c2);
        }
    }
    Ok(out)
}

/// Total derivative in direction `dir`: Leibniz over parts, with
/// D H_γ = γ_{(dir)}·δ_γ and D(D^lδ_γ) = γ_{(dir)}·D^{l+1}δ_γ.
pub fn derive_gen(g: &GenExpr, dir: usize, dim: usize) -> GenExpr {
    let gamma_d = Expr::atom(Atom::GammaJet(MultiIndex::unit(dim, dir)));
    let mut out = GenExpr::zero();
    for (atom, coeff) in g.parts() {
        out.insert_add(atom.clone(), coeff.total_derivative(dir));
        match atom {
            DistAtom::One => {}
            DistAtom::Heaviside => {
                out.insert_add(DistAtom::DiracDeriv(0), coeff * &gamma_d);
            }
            DistAtom::DiracDeriv(l) => {
                out.insert_add(DistAtom::DiracDeriv(l + 1), coeff * &gamma_d);
            }
        }
    }
    out
}

/// Iterated [`derive_gen`] along the multi-index `p`.
pub fn derive_gen_multi(g: &GenExpr, p: &MultiIndex) -> GenExpr {
    let mut acc = g.clone();
    for dir in p.directions() {
        acc = derive_gen(&acc, dir, p.len());
    }
    acc
}

/// The coefficient polynomial K_{p,l}γ of the expansion
/// D^pH_γ = Σ_{l=0}^{|p|−1} [K_{p,l}γ]·D^lδ_γ, built by the recurrence
/// K_{p,0}γ = D^pγ for |p| = 1 and
/// K_{p+q,l}γ = D^q[K_{p,l}γ] + [K_{p,l−1}γ]·D^qγ for |q| = 1.
pub fn k_operator(p: &MultiIndex, l: u32) -> Result<Expr, DistError> {
    if p.order() == 0 || l >= p.order() {
        return Err(DistError::KOutOfRange { p: p.clone(), l });
    }
    Ok(k_rec(p, l as i64))
}

fn k_rec(p: &MultiIndex, l: i64) -> Expr {
    let order = p.order() as i64;
    if l < 0 || l >= order {
        return Expr::zero();
    }
    if order == 1 {
        // base case (|p| = 1, l = 0): D^p γ
        return Expr::atom(Atom::GammaJet(p.clone()));
    }
    let dir = p
        .entries()
        .iter()
        .rposition(|&e| e > 0)
        .expect("order ≥ 2 multi-index has a nonzero entry");
    let prev = p.lower(dir).expect("entry just located is nonzero");
    let gamma_d = Expr::atom(Atom::GammaJet(MultiIndex::unit(p.len(), dir)));
    k_rec(&prev, l).total_derivative(dir) + k_rec(&prev, l - 1) * gamma_d
}

/// D^p H_γ as a Dirac ladder: Σ_l [K_{p,l}γ]·D^lδ_γ.
///
/// For the zero multi-index this is H_γ itself.
pub fn expand_heaviside_derivative(p: &MultiIndex) -> GenExpr {
    if p.is_zero() {
        return GenExpr::heaviside();
    }
    let mut out = GenExpr::zero();
    for l in 0..p.order() {
        let coeff = k_rec(p, l as i64);
        out.insert_add(DistAtom::DiracDeriv(l), coeff);
    }
    out
}

/// Rewrite explicit γ factors out of Dirac coefficients:
/// γ·δ_γ = 0 and γ·D^{l+1}δ_γ = −(l+1)·D^lδ_γ, repeated to the fixpoint.
///
/// Only syntactically explicit zero-jet γ factors are recognized; smooth
/// coefficients that merely vanish on Γ are left alone.
pub fn reduce_gamma_delta(g: &GenExpr) -> GenExpr {
    let mut out = GenExpr::zero();
    // One sweep from the highest Dirac order down reaches the fixpoint,
    // because every rewrite strictly lowers the Dirac order.
    let mut pending: BTreeMap<u32, Expr> = BTreeMap::new();
    for (atom, coeff) in g.parts() {
        match atom {
            DistAtom::DiracDeriv(l) => {
                let entry = pending.entry(*l).or_insert_with(Expr::zero);
                *entry = &*entry + coeff;
            }
            other => out.insert_add(other.clone(), coeff.clone()),
        }
    }
    while let Some((&l, _)) = pending.iter().next_back() {
        let coeff = pending.remove(&l).unwrap();
        let mut kept = Vec::new();
        let mut lowered = Vec::new();
        for m in coeff.monomials() {
            let gamma_pos = m.factors().iter().position(|(a, _)| {
                matches!(a, Atom::GammaJet(q) if q.is_zero())
            });
            match gamma_pos {
                None => kept.push(m.clone()),
                Some(k) => {
                    if l == 0 {
                        continue; // γ·δ_γ = 0
                    }
                    // strip one γ power, lower the order, scale by −l
                    let mut factors = Vec::new();
                    for (j, (a, e)) in m.factors().iter().enumerate() {
                        let e = if j == k { e - 1 } else { *e };
                        if e > 0 {
                            factors.push((a.clone(), e));
                        }
                    }
                    let coeff = &m.coeff * rat(-(l as i64), 1);
                    lowered.push(crate::expr::Monomial::new(coeff, factors));
                }
            }
        }
        out.insert_add(DistAtom::DiracDeriv(l), Expr::from_monomials(kept));
        if !lowered.is_empty() {
            let entry = pending.entry(l - 1).or_insert_with(Expr::zero);
            *entry = &*entry + &Expr::from_monomials(lowered);
        }
    }
    out
}

/// Canonical form: coefficients normalized, γ–δ rules exhausted, zeros pruned.
pub fn gen_normal_form(g: &GenExpr) -> GenExpr {
    reduce_gamma_delta(&g.map_coeffs(|c| c.normalized()))
}
