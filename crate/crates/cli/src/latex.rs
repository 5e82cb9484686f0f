//! LaTeX rendering of condition sets: math-mode fragments, one display
//! equation per condition, δ-family labeled on Γ and Heaviside near Γ.
//!
//! The grouping mirrors the DSL renderer: coefficients are collected by γ-jet,
//! positives lead each group, and the rational content is factored out as a
//! \tfrac prefix.

use jcond_core::dist::DistAtom;
use jcond_core::dsl::PDESystem;
use jcond_core::expr::{Atom, Expr, Monomial, MultiIndex, Side};
use jcond_core::junction::{ConditionStatus, JunctionConditionSet};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

fn subscript_letters(p: &MultiIndex, sys: &PDESystem) -> String {
    p.directions().map(|d| sys.coords[d].clone()).collect()
}

fn with_subscript(base: &str, p: &MultiIndex, sys: &PDESystem) -> String {
    let sub = subscript_letters(p, sys);
    match sub.len() {
        0 => base.to_string(),
        1 => format!("{base}_{sub}"),
        _ => format!("{base}_{{{sub}}}"),
    }
}

/// LaTeX for one atom; the flag says whether the base already carries a
/// superscript (and so needs parentheses when raised to a power).
fn atom_latex(atom: &Atom, sys: &PDESystem) -> (String, bool) {
    match atom {
        Atom::Coordinate(i) => (sys.coords[*i].clone(), false),
        Atom::CoeffFn { name, deriv } => (with_subscript(name, deriv, sys), false),
        Atom::UnknownJet { alpha, deriv } => {
            (with_subscript(&sys.unknowns[*alpha], deriv, sys), false)
        }
        Atom::TraceJet { side, alpha, deriv } => {
            let sup = match side {
                Side::Minus => "-",
                Side::Plus => "+",
            };
            let base = format!("{}^{sup}", sys.unknowns[*alpha]);
            (with_subscript(&base, deriv, sys), true)
        }
        Atom::GammaJet(p) => (with_subscript("\\gamma", p, sys), false),
        Atom::PsiJet { alpha, deriv } => {
            (with_subscript(&format!("\\psi_{{{}}}", sys.unknowns[*alpha]), deriv, sys), false)
        }
        Atom::ChiJet { alpha, deriv } => {
            (with_subscript(&format!("\\chi_{{{}}}", sys.unknowns[*alpha]), deriv, sys), false)
        }
        Atom::OmegaJet(p) => (with_subscript("\\omega", p, sys), false),
    }
}

fn powered_atom(atom: &Atom, exp: u32, sys: &PDESystem) -> String {
    let (base, has_sup) = atom_latex(atom, sys);
    if exp == 1 {
        return base;
    }
    let e = if exp < 10 { format!("^{exp}") } else { format!("^{{{exp}}}") };
    if has_sup {
        format!("({base}){e}")
    } else {
        format!("{base}{e}")
    }
}

fn rational_latex(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("\\tfrac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

fn magnitude_monomial(mag: &BigRational, factors: &[(Atom, u32)], sys: &PDESystem) -> String {
    let atoms: Vec<String> = factors.iter().map(|(a, e)| powered_atom(a, *e, sys)).collect();
    let joined = atoms.join("\\,");
    if !mag.is_one() || factors.is_empty() {
        format!("{}{joined}", rational_latex(mag))
    } else {
        joined
    }
}

fn monomial_seq<'a>(monomials: impl Iterator<Item = &'a Monomial>, sys: &PDESystem) -> String {
    let mut out = String::new();
    for (i, m) in monomials.enumerate() {
        let neg = m.coeff.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&magnitude_monomial(&m.coeff.abs(), m.factors(), sys));
    }
    out
}

fn rational_content(monomials: &[&Monomial]) -> BigRational {
    let mut num = BigInt::from(0);
    let mut den = BigInt::from(1);
    for m in monomials {
        num = num.gcd(&m.coeff.numer().abs());
        den = den.lcm(&m.coeff.denom().abs());
    }
    if num.is_zero() {
        BigRational::one()
    } else {
        BigRational::new(num, den)
    }
}

/// γ-grouped LaTeX of a condition coefficient.
pub fn expr_latex(e: &Expr, sys: &PDESystem) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let groups = e.collect_by(|a| matches!(a, Atom::GammaJet(_)));
    let mut ordered: Vec<(Vec<(Vec<usize>, u32)>, Vec<(Atom, u32)>, Expr)> = groups
        .into_iter()
        .map(|(key, inner)| {
            let sort_key: Vec<(Vec<usize>, u32)> = key
                .iter()
                .map(|(a, exp)| match a {
                    Atom::GammaJet(p) => (p.directions().collect(), *exp),
                    _ => unreachable!("group key contains only gamma jets"),
                })
                .collect();
            (sort_key, key, inner)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = String::new();
    for (i, (_, key, inner)) in ordered.iter().enumerate() {
        let mut monos: Vec<&Monomial> = inner.monomials().iter().collect();
        monos.sort_by_key(|m| m.coeff.is_negative());
        let gamma_part: Vec<String> =
            key.iter().map(|(a, exp)| powered_atom(a, *exp, sys)).collect();

        let (negative, body) = if monos.len() == 1 {
            let m = monos[0];
            let mut factors = m.factors().to_vec();
            factors.extend(key.iter().cloned());
            let merged = Monomial::new(m.coeff.abs(), factors);
            (m.coeff.is_negative(), magnitude_monomial(&merged.coeff, merged.factors(), sys))
        } else if key.is_empty() {
            let first_negative = monos[0].coeff.is_negative();
            let rendered: Vec<Monomial> = monos
                .iter()
                .map(|m| {
                    Monomial::new(
                        if first_negative { -&m.coeff } else { m.coeff.clone() },
                        m.factors().to_vec(),
                    )
                })
                .collect();
            (first_negative, monomial_seq(rendered.iter(), sys))
        } else {
            let content = rational_content(&monos);
            let negative = monos[0].coeff.is_negative();
            let scale = if negative { -&content } else { content.clone() };
            let scaled: Vec<Monomial> = monos
                .iter()
                .map(|m| Monomial::new(&m.coeff / &scale, m.factors().to_vec()))
                .collect();
            let mut body = String::new();
            if !content.is_one() {
                body.push_str(&rational_latex(&content));
            }
            body.push('(');
            body.push_str(&monomial_seq(scaled.iter(), sys));
            body.push(')');
            body.push_str("\\,");
            body.push_str(&gamma_part.join("\\,"));
            (negative, body)
        };
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

fn dist_atom_latex(atom: &DistAtom) -> String {
    match atom {
        DistAtom::One => "1".to_string(),
        DistAtom::Heaviside => "H_\\gamma".to_string(),
        DistAtom::DiracDeriv(0) => "\\delta_\\gamma".to_string(),
        DistAtom::DiracDeriv(l) => format!("D^{{{l}}}\\delta_\\gamma"),
    }
}

fn locality_latex(atom: &DistAtom) -> &'static str {
    match atom {
        DistAtom::One | DistAtom::Heaviside => "\\text{near } \\Gamma",
        DistAtom::DiracDeriv(_) => "\\text{on } \\Gamma",
    }
}

/// One display equation per condition, in the same order as the JSON listing.
pub fn latex_document(sys: &PDESystem, conds: &JunctionConditionSet) -> String {
    let mut out = format!("% junction conditions: {}\n", sys.name);
    for (i, ec) in conds.per_equation.iter().enumerate() {
        let beta = i + 1;
        let mut entries = ec.entries();
        entries.sort_by_key(|e| match (&e.atom, e.status) {
            (DistAtom::DiracDeriv(l), _) => (0u8, *l),
            (DistAtom::Heaviside, ConditionStatus::Required) => (1, 0),
            (DistAtom::Heaviside, ConditionStatus::SatisfiedByHypothesis) => (2, 0),
            (DistAtom::One, _) => (3, 0),
        });
        for e in entries {
            let note = match e.status {
                ConditionStatus::Required => String::new(),
                ConditionStatus::SatisfiedByHypothesis => {
                    ",\\ \\text{satisfied by hypothesis}".to_string()
                }
            };
            out.push_str(&format!(
                "\\[\n{} = 0 \\qquad [\\beta = {beta},\\ {},\\ {}{note}]\n\\]\n",
                expr_latex(&e.coefficient, sys),
                dist_atom_latex(&e.atom),
                locality_latex(&e.atom),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use jcond_core::classify::resoluble_decompose;
    use jcond_core::dsl::parse_system;
    use jcond_core::expr::rat;
    use jcond_core::junction::{
        junction_from_resoluble, restrict_to_gamma, simplify_with_classical,
    };

    fn burgers() -> PDESystem {
        parse_system(
            "system burgers\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\ngamma: x - 1/2*t\n",
        )
        .unwrap()
    }

    #[test]
    fn burgers_delta_condition_renders_exactly() {
        let sys = burgers();
        let up = Expr::atom(Atom::trace(Side::Plus, 0, 2));
        let um = Expr::atom(Atom::trace(Side::Minus, 0, 2));
        let gt = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![1, 0])));
        let gx = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![0, 1])));
        let cond = (up.clone() - um.clone()) * gt
            + (up.pow(2) - um.pow(2)).scale(&rat(1, 2)) * gx;
        assert_eq!(
            expr_latex(&cond, &sys),
            "(u^+ - u^-)\\,\\gamma_t + \\tfrac{1}{2}((u^+)^2 - (u^-)^2)\\,\\gamma_x"
        );
    }

    #[test]
    fn zero_renders_as_zero() {
        assert_eq!(expr_latex(&Expr::zero(), &burgers()), "0");
    }

    #[test]
    fn document_labels_localities() {
        let sys = burgers();
        let cert = resoluble_decompose(&sys).certificate.unwrap();
        let conds = restrict_to_gamma(&simplify_with_classical(
            &junction_from_resoluble(&sys, &cert).unwrap(),
            &sys,
        ));
        let doc = latex_document(&sys, &conds);
        assert!(doc.contains("\\text{on } \\Gamma"));
        assert!(doc.contains("\\text{near } \\Gamma"));
        assert!(doc.contains("satisfied by hypothesis"));
        assert!(doc.contains(
            "(u^+ - u^-)\\,\\gamma_t + \\tfrac{1}{2}((u^+)^2 - (u^-)^2)\\,\\gamma_x = 0"
        ));
    }

    #[test]
    fn squared_gamma_jet_keeps_plain_power() {
        let sys = parse_system(
            "system heat\ndim 2\ncoords t x\nunknowns u\neq: D[1] u - D[2,2] u = 0\n",
        )
        .unwrap();
        let up = Expr::atom(Atom::trace(Side::Plus, 0, 2));
        let um = Expr::atom(Atom::trace(Side::Minus, 0, 2));
        let gx = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![0, 1])));
        let coeff = -((up - um) * gx.pow(2));
        assert_eq!(expr_latex(&coeff, &sys), "(u^- - u^+)\\,\\gamma_x^2");
    }
}
