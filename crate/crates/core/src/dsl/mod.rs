//! Textual description language for PDE systems with a jump hypersurface.
//!
//! A system file declares a name, dimension, coordinate/unknown/coefficient
//! names, equations (polynomial in the unknown jets with smooth coefficients),
//! and the singularity surface Γ = {γ = 0}. Optional declarations carry data
//! for the other stages: `trace` closed forms for the numerical harness, an
//! `mh` certificate block, and a `box` domain for quadrature.
//!
//! ```text
//! system burgers
//! dim 2
//! coords t x
//! unknowns u
//! eq: D[1] u + u * D[2] u = 0
//! gamma: x - 0.5*t
//! ```

mod lex;
mod parse;
mod render;

pub use lex::Span;
pub use parse::{parse_expr_extended, parse_system};
pub use render::{render_expr, render_expr_grouped, render_system};

use crate::expr::{Atom, Expr, LinearOpSpec, MultiIndex, Side};
use num::BigRational;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}: {}", self.span, self.message)
    }
}

/// One equation T_β U = f_β. `beta` is the 1-based position in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub beta: usize,
    pub lhs: Expr,
    pub rhs: Expr,
    pub span: Span,
}

/// The hypersurface datum: symbolic γ (opaque jets) always; a closed form in
/// the coordinates additionally, when declared, for numerical work.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GammaSpec {
    pub closed_form: Option<Expr>,
    pub span: Option<Span>,
}

impl GammaSpec {
    pub fn is_symbolic_only(&self) -> bool {
        self.closed_form.is_none()
    }
}

/// Closed-form one-sided state for unknown `alpha` (0-based), for numcheck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDecl {
    pub side: Side,
    pub alpha: usize,
    pub expr: Expr,
    pub span: Span,
}

/// One quadratic block L[Σ U_α·(P_{αα'} U_{α'})] of an `mh` declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhQuadDecl {
    pub outer: LinearOpSpec,
    /// (α, α', P entry), indices 0-based.
    pub entries: Vec<(usize, usize, LinearOpSpec)>,
}

/// Claimed multiplicative-Heaviside shape for equation `beta` (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhEquationDecl {
    pub beta: usize,
    /// (α, L_α) pairs for the linear-in-U part, indices 0-based.
    pub linear: Vec<(usize, LinearOpSpec)>,
    pub quads: Vec<MhQuadDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PDESystem {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub unknowns: Vec<String>,
    pub coeffs: Vec<String>,
    pub equations: Vec<Equation>,
    pub gamma: GammaSpec,
    pub traces: Vec<TraceDecl>,
    pub mh: Vec<MhEquationDecl>,
    /// Quadrature domain per axis; `None` means the unit box.
    pub domain_box: Option<Vec<(BigRational, BigRational)>>,
}

impl PDESystem {
    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    /// Closed-form trace for (side, α), if declared.
    pub fn trace_expr(&self, side: Side, alpha: usize) -> Option<&Expr> {
        self.traces
            .iter()
            .find(|t| t.side == side && t.alpha == alpha)
            .map(|t| &t.expr)
    }

    pub fn mh_decl(&self, beta: usize) -> Option<&MhEquationDecl> {
        self.mh.iter().find(|m| m.beta == beta)
    }
}

/// T_β as a canonical symbolic object (β is 1-based; `None` if out of range).
pub fn operator_expr(sys: &PDESystem, beta: usize) -> Option<Expr> {
    sys.equations.get(beta.checked_sub(1)?).map(|eq| eq.lhs.normalized())
}

fn err(span: Span, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic { severity: Severity::Error, span, message: message.into() }
}

/// Structural checks on a constructed system; empty result means valid.
pub fn validate_system(sys: &PDESystem) -> Vec<ParseDiagnostic> {
    let mut diags = Vec::new();
    let n = sys.dim;
    let a = sys.unknowns.len();
    let top = Span { line: 1, col: 1 };
    if n == 0 {
        diags.push(err(top, "dimension must be at least 1"));
    }
    if sys.coords.len() != n {
        diags.push(err(
            top,
            format!("{} coordinate names for dimension {n}", sys.coords.len()),
        ));
    }
    if a == 0 {
        diags.push(err(top, "at least one unknown is required"));
    }
    if sys.equations.is_empty() {
        diags.push(err(top, "at least one equation is required"));
    }

    let check_atom = |diags: &mut Vec<ParseDiagnostic>,
                      span: Span,
                      what: &str,
                      atom: &Atom,
                      allow: &dyn Fn(&Atom) -> bool| {
        if let Some(p) = atom.deriv() {
            if p.len() != n {
                diags.push(err(
                    span,
                    format!("{what}: multi-index of length {} in dimension {n}", p.len()),
                ));
            }
        }
        if let Atom::Coordinate(i) = atom {
            if *i >= n {
                diags.push(err(span, format!("{what}: coordinate index {} out of range", i + 1)));
            }
        }
        if let Atom::UnknownJet { alpha, .. } | Atom::TraceJet { alpha, .. } = atom {
            if *alpha >= a {
                diags.push(err(span, format!("{what}: unknown index {} out of range", alpha + 1)));
            }
        }
        if !allow(atom) {
            diags.push(err(span, format!("{what}: atom {atom:?} is not allowed here")));
        }
    };

    for eq in &sys.equations {
        let what = format!("equation {}", eq.beta);
        for atom in eq.lhs.atoms() {
            check_atom(&mut diags, eq.span, &what, atom, &|a: &Atom| {
                matches!(a, Atom::Coordinate(_) | Atom::CoeffFn { .. } | Atom::UnknownJet { .. })
            });
        }
        for atom in eq.rhs.atoms() {
            check_atom(&mut diags, eq.span, &what, atom, &|a: &Atom| {
                matches!(a, Atom::Coordinate(_) | Atom::CoeffFn { .. })
            });
        }
    }

    if let Some(g) = &sys.gamma.closed_form {
        let span = sys.gamma.span.unwrap_or(top);
        for atom in g.atoms() {
            check_atom(&mut diags, span, "gamma", atom, &|a: &Atom| {
                matches!(a, Atom::Coordinate(_))
            });
        }
    }

    for t in &sys.traces {
        for atom in t.expr.atoms() {
            check_atom(&mut diags, t.span, "trace", atom, &|a: &Atom| {
                matches!(a, Atom::Coordinate(_))
            });
        }
        if t.alpha >= a {
            diags.push(err(t.span, format!("trace: unknown index {} out of range", t.alpha + 1)));
        }
    }

    for m in &sys.mh {
        if m.beta == 0 || m.beta > sys.equations.len() {
            diags.push(err(m.span, format!("mh: equation index {} out of range", m.beta)));
        }
        for (alpha, op) in &m.linear {
            if *alpha >= a {
                diags.push(err(m.span, format!("mh: unknown index {} out of range", alpha + 1)));
            }
            if op.dim() != n {
                diags.push(err(m.span, "mh: operator dimension mismatch".to_string()));
            }
        }
        for q in &m.quads {
            if q.outer.dim() != n {
                diags.push(err(m.span, "mh: operator dimension mismatch".to_string()));
            }
            for (al, ar, p) in &q.entries {
                if *al >= a || *ar >= a {
                    diags.push(err(m.span, "mh: unknown index out of range".to_string()));
                }
                if p.order() > 1 {
                    diags.push(err(
                        m.span,
                        format!("mh: inner operator has order {} but at most 1 is allowed", p.order()),
                    ));
                }
            }
        }
    }

    if let Some(bx) = &sys.domain_box {
        if bx.len() != n {
            diags.push(err(top, format!("box: {} intervals for dimension {n}", bx.len())));
        }
        for (lo, hi) in bx {
            if lo >= hi {
                diags.push(err(top, format!("box: empty interval [{lo}, {hi}]")));
            }
        }
    }

    diags
}

/// Build the 1-based direction list of a multi-index (direction 1 first,
/// repeated by entry), the inverse of parsing `D[dirs]`.
pub(crate) fn dirs_of(p: &MultiIndex) -> Vec<usize> {
    p.directions().map(|d| d + 1).collect()
}
