//! Rendering of expressions and systems back to the input syntax.
//!
//! Everything rendered here reparses (via [`parse_system`] /
//! [`parse_expr_extended`]) to an equal value; tests lean on that round trip.

use super::{dirs_of, PDESystem};
use crate::expr::{Atom, Expr, LinearOpSpec, Monomial, Side};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

#[cfg(test)]
use super::{parse_expr_extended, parse_system};

fn jet_name(base: &str, p: &crate::expr::MultiIndex) -> String {
    if p.is_zero() {
        return base.to_string();
    }
    let dirs: Vec<String> = dirs_of(p).iter().map(|d| d.to_string()).collect();
    format!("D[{}]{base}", dirs.join(","))
}

fn atom_name(atom: &Atom, sys: &PDESystem) -> String {
    match atom {
        Atom::Coordinate(i) => sys.coords[*i].clone(),
        Atom::CoeffFn { name, deriv } => jet_name(name, deriv),
        Atom::UnknownJet { alpha, deriv } => jet_name(&sys.unknowns[*alpha], deriv),
        Atom::TraceJet { side, alpha, deriv } => {
            let prefix = match side {
                Side::Minus => "um_",
                Side::Plus => "up_",
            };
            jet_name(&format!("{prefix}{}", sys.unknowns[*alpha]), deriv)
        }
        Atom::GammaJet(p) => jet_name("gamma", p),
        Atom::PsiJet { alpha, deriv } => jet_name(&format!("psi_{}", sys.unknowns[*alpha]), deriv),
        Atom::ChiJet { alpha, deriv } => jet_name(&format!("chi_{}", sys.unknowns[*alpha]), deriv),
        Atom::OmegaJet(p) => jet_name("omega", p),
    }
}

/// `magnitude * a^i * b^j`, omitting a unit magnitude unless there are no factors.
fn render_magnitude_monomial(mag: &BigRational, factors: &[(Atom, u32)], sys: &PDESystem) -> String {
    let mut pieces: Vec<String> = Vec::new();
    if !mag.is_one() || factors.is_empty() {
        pieces.push(mag.to_string());
    }
    for (atom, exp) in factors {
        let name = atom_name(atom, sys);
        if *exp == 1 {
            pieces.push(name);
        } else {
            pieces.push(format!("{name}^{exp}"));
        }
    }
    pieces.join("*")
}

fn render_monomial_seq<'a>(
    monomials: impl Iterator<Item = &'a Monomial>,
    sys: &PDESystem,
) -> String {
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
        out.push_str(&render_magnitude_monomial(&m.coeff.abs(), m.factors(), sys));
    }
    out
}

/// Flat canonical rendering: signed sum of monomials.
pub fn render_expr(e: &Expr, sys: &PDESystem) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    render_monomial_seq(e.monomials().iter(), sys)
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

/// Rendering grouped by γ-jet factors: each group becomes
/// `content*(sum)*gamma-part`, positive monomials leading in the sum, groups
/// ordered by their derivative lists (`D[1]gamma` before `D[2]gamma`).
pub fn render_expr_grouped(e: &Expr, sys: &PDESystem) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let groups = e.collect_by(|a| matches!(a, Atom::GammaJet(_)));
    let mut ordered: Vec<(Vec<(Vec<usize>, u32)>, Vec<(Atom, u32)>, Expr)> = groups
        .into_iter()
        .map(|(key, inner)| {
            let sort_key: Vec<(Vec<usize>, u32)> = key
                .iter()
                .map(|(a, e)| match a {
                    Atom::GammaJet(p) => (dirs_of(p), *e),
                    _ => unreachable!("group key contains only gamma jets"),
                })
                .collect();
            (sort_key, key, inner)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = String::new();
    for (i, (_, key, inner)) in ordered.iter().enumerate() {
        // positives first, canonical order within each sign class
        let mut monos: Vec<&Monomial> = inner.monomials().iter().collect();
        monos.sort_by_key(|m| m.coeff.is_negative());
        let gamma_part: Vec<String> = key
            .iter()
            .map(|(a, e)| {
                let name = atom_name(a, sys);
                if *e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();

        let (negative, body) = if monos.len() == 1 {
            let m = monos[0];
            let mut factors = m.factors().to_vec();
            factors.extend(key.iter().cloned());
            let merged = Monomial::new(m.coeff.abs(), factors);
            (m.coeff.is_negative(), render_magnitude_monomial(&merged.coeff, merged.factors(), sys))
        } else if key.is_empty() {
            // plain sum, no multiplier: render inline without parentheses
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
            (first_negative, render_monomial_seq(rendered.iter(), sys))
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
                body.push_str(&content.to_string());
                body.push('*');
            }
            body.push('(');
            body.push_str(&render_monomial_seq(scaled.iter(), sys));
            body.push(')');
            body.push('*');
            body.push_str(&gamma_part.join("*"));
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

/// Operator rendering: `c*D[dirs]` terms joined by `+`.
pub(crate) fn render_op(op: &LinearOpSpec, sys: &PDESystem) -> String {
    if op.terms().is_empty() {
        return "0".to_string();
    }
    let mut pieces: Vec<String> = Vec::new();
    for (coeff, q) in op.terms() {
        let coeff_str = if coeff.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            None
        } else if coeff.monomials().len() > 1 {
            Some(format!("({})", render_expr(coeff, sys)))
        } else {
            Some(render_expr(coeff, sys))
        };
        let piece = match (coeff_str, q.is_zero()) {
            (None, true) => "1".to_string(),
            (None, false) => jet_name("", q).trim_end().to_string(),
            (Some(c), true) => c,
            (Some(c), false) => format!("{c}*{}", jet_name("", q)),
        };
        pieces.push(piece);
    }
    pieces.join(" + ")
}

/// Full system file; reparses to an equivalent system.
pub fn render_system(sys: &PDESystem) -> String {
    let mut out = String::new();
    out.push_str(&format!("system {}\n", sys.name));
    out.push_str(&format!("dim {}\n", sys.dim));
    out.push_str(&format!("coords {}\n", sys.coords.join(" ")));
    out.push_str(&format!("unknowns {}\n", sys.unknowns.join(" ")));
    if !sys.coeffs.is_empty() {
        out.push_str(&format!("coeffs {}\n", sys.coeffs.join(" ")));
    }
    for eq in &sys.equations {
        out.push_str(&format!(
            "eq: {} = {}\n",
            render_expr(&eq.lhs, sys),
            render_expr(&eq.rhs, sys)
        ));
    }
    if let Some(g) = &sys.gamma.closed_form {
        out.push_str(&format!("gamma: {}\n", render_expr(g, sys)));
    }
    for t in &sys.traces {
        let side = match t.side {
            Side::Minus => "minus",
            Side::Plus => "plus",
        };
        out.push_str(&format!(
            "trace {side} {}: {}\n",
            sys.unknowns[t.alpha],
            render_expr(&t.expr, sys)
        ));
    }
    for m in &sys.mh {
        let mut parts: Vec<String> = Vec::new();
        for (alpha, op) in &m.linear {
            parts.push(format!("lin[{}]({})", sys.unknowns[*alpha], render_op(op, sys)));
        }
        for q in &m.quads {
            let entries: Vec<String> = q
                .entries
                .iter()
                .map(|(al, ar, p)| {
                    format!(
                        "{},{}: {}",
                        sys.unknowns[*al],
                        sys.unknowns[*ar],
                        render_op(p, sys)
                    )
                })
                .collect();
            parts.push(format!("quad({})[{}]", render_op(&q.outer, sys), entries.join("; ")));
        }
        out.push_str(&format!("mh[{}]: {}\n", m.beta, parts.join(" + ")));
    }
    if let Some(bx) = &sys.domain_box {
        let vals: Vec<String> = bx.iter().flat_map(|(lo, hi)| [lo.to_string(), hi.to_string()]).collect();
        out.push_str(&format!("box: {}\n", vals.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expr_equal, rat, MultiIndex};

    fn sys2() -> PDESystem {
        parse_system(
            "system s\ndim 2\ncoords t x\nunknowns u\ncoeffs c\n\
             eq: D[1] u + c * u * D[2] u = 0\ngamma: x - 1/2*t\n",
        )
        .unwrap()
    }

    #[test]
    fn flat_render_round_trips() {
        let sys = sys2();
        let e = &sys.equations[0].lhs;
        let back = parse_expr_extended(&render_expr(e, &sys), &sys).unwrap();
        assert!(expr_equal(&back, e));
    }

    #[test]
    fn grouped_render_matches_expected_shape() {
        let sys = sys2();
        let jump = Expr::atom(Atom::trace(Side::Plus, 0, 2)) - Expr::atom(Atom::trace(Side::Minus, 0, 2));
        let sq_jump = Expr::atom(Atom::trace(Side::Plus, 0, 2)).pow(2)
            - Expr::atom(Atom::trace(Side::Minus, 0, 2)).pow(2);
        let gt = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![1, 0])));
        let gx = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![0, 1])));
        let cond = jump * gt + sq_jump.scale(&rat(1, 2)) * gx;
        let text = render_expr_grouped(&cond, &sys);
        assert_eq!(
            text,
            "(up_u - um_u)*D[1]gamma + 1/2*(up_u^2 - um_u^2)*D[2]gamma"
        );
        let back = parse_expr_extended(&text, &sys).unwrap();
        assert!(expr_equal(&back, &cond));
    }

    #[test]
    fn grouped_render_single_monomial_and_plain_groups() {
        let sys = sys2();
        let up = Expr::atom(Atom::trace(Side::Plus, 0, 2));
        let gt = Expr::atom(Atom::GammaJet(MultiIndex::from_entries(vec![1, 0])));
        let e = up.scale(&rat(-2, 1)) * gt + Expr::atom(Atom::trace(Side::Minus, 0, 2));
        let text = render_expr_grouped(&e, &sys);
        assert_eq!(text, "um_u - 2*up_u*D[1]gamma");
        let back = parse_expr_extended(&text, &sys).unwrap();
        assert!(expr_equal(&back, &e));
    }

    #[test]
    fn system_render_round_trips() {
        let text = "system s\ndim 2\ncoords t x\nunknowns u\ncoeffs c\n\
                    eq: D[1] u + c*u*D[2] u = x\ngamma: x - 1/2*t\n\
                    trace minus u: 0\ntrace plus u: 1\n\
                    mh[1]: lin[u](D[1]) + quad(1/2 * D[2])[u,u: c]\nbox: 0 1 0 1\n";
        let sys = parse_system(text).unwrap();
        let rendered = render_system(&sys);
        let again = parse_system(&rendered).unwrap();
        assert_eq!(again.coords, sys.coords);
        assert!(expr_equal(
            &super::super::operator_expr(&again, 1).unwrap(),
            &super::super::operator_expr(&sys, 1).unwrap()
        ));
        assert_eq!(again.gamma.closed_form, sys.gamma.closed_form);
        assert_eq!(again.traces.len(), 2);
        assert_eq!(again.mh[0].linear, sys.mh[0].linear);
        assert_eq!(again.mh[0].quads, sys.mh[0].quads);
        assert_eq!(again.domain_box, sys.domain_box);
    }
}
