//! Checked atom substitution with automatic jet closure.

use super::{Atom, Expr};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    /// A derivative jet is explicitly bound to something other than the
    /// corresponding derivative of its base atom's image.
    #[error("jet {jet:?} is bound incompatibly with the binding of its base {base:?}")]
    InconsistentJetBinding { jet: Atom, base: Atom },
}

/// A simultaneous atom-to-expression binding set.
///
/// With `jet_closure` enabled, binding a base atom (e.g. the zero jet of an
/// unknown) implicitly binds every derivative jet to the matching total
/// derivative of the image, so `u_{(1)}` follows `u → ψ + χω` as
/// `ψ_{(1)} + χ_{(1)}ω + χω_{(1)}`.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    map: BTreeMap<Atom, Expr>,
    jet_closure: bool,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn with_jet_closure() -> Self {
        Bindings { map: BTreeMap::new(), jet_closure: true }
    }

    pub fn bind(mut self, atom: Atom, image: Expr) -> Self {
        self.map.insert(atom, image);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn image_of(&self, atom: &Atom) -> Option<Expr> {
        if let Some(e) = self.map.get(atom) {
            return Some(e.clone());
        }
        if self.jet_closure {
            if let Some((base, p)) = atom.base() {
                if !p.is_zero() {
                    if let Some(e) = self.map.get(&base) {
                        return Some(e.derivative_multi(&p));
                    }
                }
            }
        }
        None
    }

    /// Every explicitly bound derivative jet must agree with the derivative of
    /// its base's image (when the base is bound too).
    fn check_consistency(&self) -> Result<(), SubstError> {
        for (atom, image) in &self.map {
            let Some((base, p)) = atom.base() else { continue };
            if p.is_zero() {
                continue;
            }
            if let Some(base_image) = self.map.get(&base) {
                if base_image.derivative_multi(&p) != *image {
                    return Err(SubstError::InconsistentJetBinding {
                        jet: atom.clone(),
                        base,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Simultaneous replacement of bound atoms, then canonical normalization.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Result<Expr, SubstError> {
    bindings.check_consistency()?;
    Ok(e.map_atoms(&mut |a| match bindings.image_of(a) {
        Some(img) => img,
        None => Expr::atom(a.clone()),
    }))
}
