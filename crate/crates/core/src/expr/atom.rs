//! Jet atoms: the free commuting symbols every smooth expression is built from.

use std::fmt;

/// Derivative multi-index over the ambient coordinates.
///
/// The entry at position `i` counts derivatives along coordinate `i`
/// (0-based internally; the DSL's `D[1]` maps to position 0).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit index e_dir (one derivative along `dir`).
    pub fn unit(dim: usize, dir: usize) -> Self {
        assert!(dir < dim, "direction {dir} out of range for dimension {dim}");
        let mut entries = vec![0; dim];
        entries[dir] = 1;
        MultiIndex(entries)
    }

    pub fn from_entries(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total derivative order |p|.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Index with one more derivative along `dir`.
    pub fn bump(&self, dir: usize) -> Self {
        let mut entries = self.0.clone();
        entries[dir] += 1;
        MultiIndex(entries)
    }

    /// Index with one fewer derivative along `dir`; `None` if there is none to remove.
    pub fn lower(&self, dir: usize) -> Option<Self> {
        if self.0[dir] == 0 {
            return None;
        }
        let mut entries = self.0.clone();
        entries[dir] -= 1;
        Some(MultiIndex(entries))
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Directions in canonical application order (direction 0 first), with repetition.
    pub fn directions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(dir, &count)| std::iter::repeat(dir).take(count as usize))
    }

    /// All multi-indices of the given dimension with order ≤ `max_order`,
    /// in ascending (order, lexicographic) order.
    pub fn all_up_to(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; dim];
        fn rec(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, left: u32) {
            if pos == current.len() {
                out.push(MultiIndex(current.clone()));
                return;
            }
            for take in 0..=left {
                current[pos] = take;
                rec(out, current, pos + 1, left - take);
            }
            current[pos] = 0;
        }
        for order in 0..=max_order {
            // fixed total order per block keeps the listing graded
            let mut block = Vec::new();
            rec(&mut block, &mut current, 0, order);
            block.retain(|p| p.order() == order);
            block.sort();
            out.extend(block);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Side of the singularity hypersurface a trace lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn tag(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

/// A jet atom: one free commuting symbol.
///
/// Jets are flat: a derivative of an unknown (or trace, γ, ψ, χ, ω) is a
/// single atom carrying its multi-index, never a nested tree. Differentiation
/// only bumps indices. The derived `Ord` (variant order, then indices) is the
/// canonical atom order used for monomial normal forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Coordinate x_i (0-based).
    Coordinate(usize),
    /// Opaque smooth coefficient function c(x) with a formal derivative jet.
    CoeffFn { name: String, deriv: MultiIndex },
    /// D^p U_α, the jet of an unknown (α is 0-based).
    UnknownJet { alpha: usize, deriv: MultiIndex },
    /// D^p of a one-sided trace U_± of unknown α.
    TraceJet { side: Side, alpha: usize, deriv: MultiIndex },
    /// D^p γ of the hypersurface function.
    GammaJet(MultiIndex),
    /// D^p ψ_α of the smooth ansatz part.
    PsiJet { alpha: usize, deriv: MultiIndex },
    /// D^p χ_α of the jump-amplitude ansatz part.
    ChiJet { alpha: usize, deriv: MultiIndex },
    /// D^p ω of the scalar ansatz factor.
    OmegaJet(MultiIndex),
}

impl Atom {
    pub fn coeff_fn(name: &str, dim: usize) -> Self {
        Atom::CoeffFn { name: name.to_string(), deriv: MultiIndex::zero(dim) }
    }

    pub fn unknown(alpha: usize, dim: usize) -> Self {
        Atom::UnknownJet { alpha, deriv: MultiIndex::zero(dim) }
    }

    pub fn trace(side: Side, alpha: usize, dim: usize) -> Self {
        Atom::TraceJet { side, alpha, deriv: MultiIndex::zero(dim) }
    }

    pub fn gamma(dim: usize) -> Self {
        Atom::GammaJet(MultiIndex::zero(dim))
    }

    pub fn psi(alpha: usize, dim: usize) -> Self {
        Atom::PsiJet { alpha, deriv: MultiIndex::zero(dim) }
    }

    pub fn chi(alpha: usize, dim: usize) -> Self {
        Atom::ChiJet { alpha, deriv: MultiIndex::zero(dim) }
    }

    pub fn omega(dim: usize) -> Self {
        Atom::OmegaJet(MultiIndex::zero(dim))
    }

    /// The derivative multi-index carried by this atom, if it has one.
    pub fn deriv(&self) -> Option<&MultiIndex> {
        match self {
            Atom::Coordinate(_) => None,
            Atom::CoeffFn { deriv, .. }
            | Atom::UnknownJet { deriv, .. }
            | Atom::TraceJet { deriv, .. }
            | Atom::PsiJet { deriv, .. }
            | Atom::ChiJet { deriv, .. } => Some(deriv),
            Atom::GammaJet(deriv) | Atom::OmegaJet(deriv) => Some(deriv),
        }
    }

    /// The base (zero-jet) atom of a derivative jet, together with its index.
    /// `None` for coordinates, which carry no jet structure.
    pub fn base(&self) -> Option<(Atom, MultiIndex)> {
        let deriv = self.deriv()?.clone();
        let zero = MultiIndex::zero(deriv.len());
        let base = match self {
            Atom::Coordinate(_) => unreachable!(),
            Atom::CoeffFn { name, .. } => Atom::CoeffFn { name: name.clone(), deriv: zero },
            Atom::UnknownJet { alpha, .. } => Atom::UnknownJet { alpha: *alpha, deriv: zero },
            Atom::TraceJet { side, alpha, .. } => {
                Atom::TraceJet { side: *side, alpha: *alpha, deriv: zero }
            }
            Atom::GammaJet(_) => Atom::GammaJet(zero),
            Atom::PsiJet { alpha, .. } => Atom::PsiJet { alpha: *alpha, deriv: zero },
            Atom::ChiJet { alpha, .. } => Atom::ChiJet { alpha: *alpha, deriv: zero },
            Atom::OmegaJet(_) => Atom::OmegaJet(zero),
        };
        Some((base, deriv))
    }

    /// Same atom with `deriv[dir]` bumped by one; `None` for coordinates.
    pub fn bump(&self, dir: usize) -> Option<Atom> {
        match self {
            Atom::Coordinate(_) => None,
            Atom::CoeffFn { name, deriv } => {
                Some(Atom::CoeffFn { name: name.clone(), deriv: deriv.bump(dir) })
            }
            Atom::UnknownJet { alpha, deriv } => {
                Some(Atom::UnknownJet { alpha: *alpha, deriv: deriv.bump(dir) })
            }
            Atom::TraceJet { side, alpha, deriv } => {
                Some(Atom::TraceJet { side: *side, alpha: *alpha, deriv: deriv.bump(dir) })
            }
            Atom::GammaJet(deriv) => Some(Atom::GammaJet(deriv.bump(dir))),
            Atom::PsiJet { alpha, deriv } => {
                Some(Atom::PsiJet { alpha: *alpha, deriv: deriv.bump(dir) })
            }
            Atom::ChiJet { alpha, deriv } => {
                Some(Atom::ChiJet { alpha: *alpha, deriv: deriv.bump(dir) })
            }
            Atom::OmegaJet(deriv) => Some(Atom::OmegaJet(deriv.bump(dir))),
        }
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Atom::OmegaJet(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Atom::UnknownJet { .. })
    }

    /// True for atoms allowed in linear-operator coefficients (functions of x only).
    pub fn is_x_only(&self) -> bool {
        matches!(self, Atom::Coordinate(_) | Atom::CoeffFn { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_order_is_additive() {
        let p = MultiIndex::from_entries(vec![2, 1]);
        let q = MultiIndex::from_entries(vec![0, 3]);
        assert_eq!(p.add(&q).order(), p.order() + q.order());
    }

    #[test]
    fn enumeration_is_graded_and_complete() {
        let all = MultiIndex::all_up_to(2, 2);
        assert_eq!(all.len(), 6); // (0,0),(0,1),(1,0),(0,2),(1,1),(2,0)
        for w in all.windows(2) {
            assert!(w[0].order() <= w[1].order());
        }
    }

    #[test]
    fn atom_order_groups_by_kind() {
        let dim = 2;
        let coord = Atom::Coordinate(1);
        let unknown = Atom::unknown(0, dim);
        let trace = Atom::trace(Side::Minus, 0, dim);
        let gamma = Atom::gamma(dim);
        assert!(coord < unknown);
        assert!(unknown < trace);
        assert!(trace < gamma);
        assert!(Side::Minus < Side::Plus);
    }

    #[test]
    fn base_of_jet_recovers_zero_index() {
        let a = Atom::UnknownJet { alpha: 0, deriv: MultiIndex::from_entries(vec![1, 2]) };
        let (base, deriv) = a.base().unwrap();
        assert_eq!(base, Atom::unknown(0, 2));
        assert_eq!(deriv, MultiIndex::from_entries(vec![1, 2]));
        assert!(Atom::Coordinate(0).base().is_none());
    }
}
