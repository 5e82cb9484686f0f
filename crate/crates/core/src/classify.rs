//! Structural classification: resolubility by exact linear solve, and
//! verification of multiplicative-Heaviside (MH) shape certificates.
//!
//! Resolubility is decided constructively. Substituting U_α = ψ_α + χ_α·ω
//! into an operator gives a polynomial in the ω-jets; the operator is
//! resoluble when that polynomial is a sum of smooth multipliers times whole
//! factors D^p(ω^l). Matching coefficients of the ω-jet monomials turns this
//! into a linear system with a rational matrix (rows: ω-jet monomials,
//! columns: basis elements D^p(ω^l)) and Expr-valued right-hand sides, solved
//! by exact elimination. Failure produces a witness monomial whose matching
//! equation is infeasible.

use crate::dsl::{operator_expr, MhEquationDecl, PDESystem};
use crate::expr::{
    rat, substitute, Atom, Bindings, Expr, LinearOpSpec, Monomial, MultiIndex,
};
use num::{BigRational, One, Zero};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// A product of ω-jet powers in canonical order; the empty vector is the
/// smooth (ω-free) part.
pub type OmegaMonomial = Vec<(Atom, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("inner MH operator must have order at most 1, got {0}")]
    InnerOperatorOrder(u32),
    #[error("no mh declaration for equation {beta}")]
    MissingMhDeclaration { beta: usize },
    #[error("mh certificate does not reproduce the operator of equation {beta}")]
    CertificateMismatch { beta: usize },
    #[error(
        "decomposition failed for equation {beta} despite a verified MH certificate \
         (internal defect); witness {witness}"
    )]
    DecompositionFailed { beta: usize, witness: String },
}

/// T_β(ψ + χω) expanded and collected by ω-jet monomial, per equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzExpansion {
    pub per_equation: Vec<BTreeMap<OmegaMonomial, Expr>>,
}

impl AnsatzExpansion {
    /// Re-multiply the collected form (the defining invariant).
    pub fn recombined(&self, idx: usize) -> Expr {
        let mut acc = Expr::zero();
        for (key, coeff) in &self.per_equation[idx] {
            let mut m = coeff.clone();
            for (atom, exp) in key {
                m = m * Expr::atom(atom.clone()).pow(*exp);
            }
            acc = acc + m;
        }
        acc
    }
}

fn ansatz_bindings(sys: &PDESystem) -> Bindings {
    let n = sys.dim;
    let mut b = Bindings::with_jet_closure();
    for alpha in 0..sys.num_unknowns() {
        let image = Expr::atom(Atom::psi(alpha, n))
            + Expr::atom(Atom::chi(alpha, n)) * Expr::atom(Atom::omega(n));
        b = b.bind(Atom::unknown(alpha, n), image);
    }
    b
}

/// Substitute U_α → ψ_α + χ_α·ω (jet closure) into every operator and group
/// by ω-jet monomial.
pub fn substitute_ansatz(sys: &PDESystem) -> AnsatzExpansion {
    let bindings = ansatz_bindings(sys);
    let per_equation = sys
        .equations
        .iter()
        .map(|eq| {
            let expanded = substitute(&eq.lhs, &bindings)
                .expect("ansatz bindings are jet-consistent by construction");
            expanded.collect_by(Atom::is_omega)
        })
        .collect();
    AnsatzExpansion { per_equation }
}

/// One candidate factor D^p(ω^l) with its ω-jet monomial expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaBasisElement {
    pub p: MultiIndex,
    pub l: u32,
    pub expansion: BTreeMap<OmegaMonomial, BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaBasis {
    pub elements: Vec<OmegaBasisElement>,
}

/// All (p, l) with order(p) ≤ max_order and 1 ≤ l ≤ max_power, in the fixed
/// solver column order: lexicographic in (l, p).
pub fn omega_basis(dim: usize, max_order: u32, max_power: u32) -> OmegaBasis {
    let omega = Expr::atom(Atom::omega(dim));
    let mut elements = Vec::new();
    for l in 1..=max_power {
        let power = omega.pow(l);
        for p in MultiIndex::all_up_to(dim, max_order) {
            let expanded = power.derivative_multi(&p);
            let mut expansion = BTreeMap::new();
            for m in expanded.monomials() {
                expansion.insert(m.factors().to_vec(), m.coeff.clone());
            }
            elements.push(OmegaBasisElement { p, l, expansion });
        }
    }
    elements.sort_by(|a, b| (a.l, &a.p).cmp(&(b.l, &b.p)));
    OmegaBasis { elements }
}

/// One certificate summand T·D^p(ω^l); (p = 0, l = 0) carries the smooth
/// remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertEntry {
    pub multiplier: Expr,
    pub p: MultiIndex,
    pub l: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResolubleCertificate {
    /// Indexed by equation position (β − 1).
    pub per_equation: Vec<Vec<CertEntry>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Resoluble,
    NotResoluble { witness: OmegaMonomial },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyReport {
    /// Per equation, in order.
    pub verdicts: Vec<Verdict>,
    /// Present iff every equation is resoluble.
    pub certificate: Option<ResolubleCertificate>,
}

impl ClassifyReport {
    pub fn all_resoluble(&self) -> bool {
        self.verdicts.iter().all(|v| matches!(v, Verdict::Resoluble))
    }
}

/// Pivot scan order over rows; the second ordering re-confirms witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EliminationOrder {
    Standard,
    Reversed,
}

/// Max total derivative weight of any monomial (Σ order·exponent over
/// unknown-jet factors) and max degree in the unknowns.
fn equation_bounds(lhs: &Expr) -> (u32, u32) {
    let mut max_weight = 0;
    let mut max_degree = 0;
    for m in lhs.monomials() {
        let mut weight = 0;
        let mut degree = 0;
        for (atom, exp) in m.factors() {
            if let Atom::UnknownJet { deriv, .. } = atom {
                weight += deriv.order() * exp;
                degree += exp;
            }
        }
        max_weight = max_weight.max(weight);
        max_degree = max_degree.max(degree);
    }
    (max_weight, max_degree)
}

/// Exact solve of Σ_e T_e·expansion(e) = collected ω-part, per equation.
fn decompose_equation(
    lhs: &Expr,
    dim: usize,
    collected: &BTreeMap<OmegaMonomial, Expr>,
    order: EliminationOrder,
) -> Result<Vec<CertEntry>, OmegaMonomial> {
    let smooth = collected.get(&Vec::new()).cloned().unwrap_or_else(Expr::zero);
    let (max_weight, max_degree) = equation_bounds(lhs);
    let basis = omega_basis(dim, max_weight, max_degree);

    // Row space: every ω-jet monomial seen in the target or the basis.
    let mut keys: BTreeSet<OmegaMonomial> = collected.keys().filter(|k| !k.is_empty()).cloned().collect();
    for e in &basis.elements {
        keys.extend(e.expansion.keys().cloned());
    }
    let rows: Vec<OmegaMonomial> = keys.into_iter().collect();
    let row_index: BTreeMap<&OmegaMonomial, usize> =
        rows.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let nrows = rows.len();
    let ncols = basis.elements.len();

    let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); ncols]; nrows];
    for (ci, e) in basis.elements.iter().enumerate() {
        for (key, coeff) in &e.expansion {
            a[row_index[key]][ci] = coeff.clone();
        }
    }
    let b_orig: Vec<Expr> = rows
        .iter()
        .map(|k| collected.get(k).cloned().unwrap_or_else(Expr::zero))
        .collect();
    let mut b = b_orig.clone();
    // Provenance: each working row as a rational combination of original rows.
    let mut prov: Vec<Vec<BigRational>> = (0..nrows)
        .map(|i| {
            let mut v = vec![BigRational::zero(); nrows];
            v[i] = BigRational::one();
            v
        })
        .collect();

    let scan: Vec<usize> = match order {
        EliminationOrder::Standard => (0..nrows).collect(),
        EliminationOrder::Reversed => (0..nrows).rev().collect(),
    };

    // Forward elimination restricted to not-yet-pivoted rows. Remaining rows
    // keep zeros in every processed column, so a leftover row is a pure
    // constraint: its right-hand side must vanish.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut used = vec![false; nrows];
    for ci in 0..ncols {
        let Some(&pr) = scan.iter().find(|&&r| !used[r] && !a[r][ci].is_zero()) else {
            continue;
        };
        used[pr] = true;
        pivot_of_col[ci] = Some(pr);
        let inv = a[pr][ci].clone();
        for r in 0..nrows {
            if r == pr || used[r] || a[r][ci].is_zero() {
                continue;
            }
            let factor = &a[r][ci] / &inv;
            for cj in ci..ncols {
                let delta = &factor * &a[pr][cj];
                a[r][cj] = &a[r][cj] - &delta;
            }
            b[r] = &b[r] - &b[pr].scale(&factor);
            for k in 0..nrows {
                let delta = &factor * &prov[pr][k];
                prov[r][k] = &prov[r][k] - &delta;
            }
        }
    }

    // Consistency: leftover rows must have zero right-hand side.
    let mut witnesses: Vec<OmegaMonomial> = Vec::new();
    for &r in &scan {
        if used[r] || b[r].is_zero() {
            continue;
        }
        // The infeasible combination; its witness is the canonically smallest
        // participating original monomial with a nonzero original target.
        let w = (0..nrows)
            .filter(|&k| !prov[r][k].is_zero() && !b_orig[k].is_zero())
            .map(|k| rows[k].clone())
            .min()
            .expect("a nonzero combination has a nonzero contributing target");
        witnesses.push(w);
    }
    if let Some(w) = witnesses.into_iter().min() {
        return Err(w);
    }

    // Back-substitution in reverse column order; free columns get zero.
    let mut t: Vec<Expr> = vec![Expr::zero(); ncols];
    for ci in (0..ncols).rev() {
        let Some(pr) = pivot_of_col[ci] else { continue };
        let mut rhs = b[pr].clone();
        for cj in ci + 1..ncols {
            if !a[pr][cj].is_zero() {
                rhs = rhs - t[cj].scale(&a[pr][cj]);
            }
        }
        t[ci] = rhs.scale(&(BigRational::one() / &a[pr][ci]));
    }

    let mut entries = Vec::new();
    if !smooth.is_zero() {
        entries.push(CertEntry { multiplier: smooth, p: MultiIndex::zero(dim), l: 0 });
    }
    for (ci, e) in basis.elements.iter().enumerate() {
        if !t[ci].is_zero() {
            entries.push(CertEntry { multiplier: t[ci].clone(), p: e.p.clone(), l: e.l });
        }
    }
    Ok(entries)
}

pub fn resoluble_decompose_with(sys: &PDESystem, order: EliminationOrder) -> ClassifyReport {
    let ansatz = substitute_ansatz(sys);
    let mut verdicts = Vec::new();
    let mut cert = ResolubleCertificate::default();
    let mut all_ok = true;
    for (idx, eq) in sys.equations.iter().enumerate() {
        match decompose_equation(&eq.lhs, sys.dim, &ansatz.per_equation[idx], order) {
            Ok(entries) => {
                verdicts.push(Verdict::Resoluble);
                cert.per_equation.push(entries);
            }
            Err(witness) => {
                verdicts.push(Verdict::NotResoluble { witness });
                cert.per_equation.push(Vec::new());
                all_ok = false;
            }
        }
    }
    let certificate = if all_ok {
        assert!(
            verify_certificate(sys, &cert),
            "solver produced a certificate that fails its own identity"
        );
        Some(cert)
    } else {
        None
    };
    ClassifyReport { verdicts, certificate }
}

/// Classify with the standard elimination ordering.
pub fn resoluble_decompose(sys: &PDESystem) -> ClassifyReport {
    resoluble_decompose_with(sys, EliminationOrder::Standard)
}

/// Check the certificate identity Σ T·D^p(ω^l) = T_β(ψ + χω) for every β.
pub fn verify_certificate(sys: &PDESystem, cert: &ResolubleCertificate) -> bool {
    if cert.per_equation.len() != sys.equations.len() {
        return false;
    }
    let bindings = ansatz_bindings(sys);
    let omega = Expr::atom(Atom::omega(sys.dim));
    for (idx, eq) in sys.equations.iter().enumerate() {
        let target = substitute(&eq.lhs, &bindings)
            .expect("ansatz bindings are jet-consistent by construction");
        let mut sum = Expr::zero();
        for entry in &cert.per_equation[idx] {
            let factor = omega.pow(entry.l).derivative_multi(&entry.p);
            sum = sum + entry.multiplier.clone() * factor;
        }
        if sum != target {
            return false;
        }
    }
    true
}

/// An operator of order at most one, the admissible inner factor of an MH
/// quadratic block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstOrderOp(LinearOpSpec);

impl FirstOrderOp {
    pub fn new(op: LinearOpSpec) -> Result<Self, ClassifyError> {
        if op.order() > 1 {
            return Err(ClassifyError::InnerOperatorOrder(op.order()));
        }
        Ok(FirstOrderOp(op))
    }

    pub fn op(&self) -> &LinearOpSpec {
        &self.0
    }

    /// The homogeneous first-order part Q (drops the multiplication term).
    pub fn first_order_part(&self) -> LinearOpSpec {
        self.0.first_order_part()
    }
}

/// One quadratic block L[Σ U_α·(P_{αα'} U_{α'})].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhQuad {
    pub outer: LinearOpSpec,
    pub entries: Vec<(usize, usize, FirstOrderOp)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhEquation {
    /// 1-based equation index.
    pub beta: usize,
    pub linear: Vec<(usize, LinearOpSpec)>,
    pub quads: Vec<MhQuad>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MHCertificate {
    pub equations: Vec<MhEquation>,
}

impl MHCertificate {
    /// Build from the system's `mh` declarations; every equation must be
    /// covered and every inner operator must have order ≤ 1.
    pub fn from_system(sys: &PDESystem) -> Result<Self, ClassifyError> {
        let mut equations = Vec::new();
        for eq in &sys.equations {
            let decl: &MhEquationDecl = sys
                .mh_decl(eq.beta)
                .ok_or(ClassifyError::MissingMhDeclaration { beta: eq.beta })?;
            equations.push(MhEquation {
                beta: eq.beta,
                linear: decl.linear.clone(),
                quads: decl
                    .quads
                    .iter()
                    .map(|q| {
                        Ok(MhQuad {
                            outer: q.outer.clone(),
                            entries: q
                                .entries
                                .iter()
                                .map(|(al, ar, p)| Ok((*al, *ar, FirstOrderOp::new(p.clone())?)))
                                .collect::<Result<_, ClassifyError>>()?,
                        })
                    })
                    .collect::<Result<_, ClassifyError>>()?,
            });
        }
        Ok(MHCertificate { equations })
    }

    pub fn equation(&self, beta: usize) -> Option<&MhEquation> {
        self.equations.iter().find(|e| e.beta == beta)
    }

    /// The operator the certificate claims for equation `beta`:
    /// Σ_α L_α U_α + Σ_ρ L_ρ[Σ_{αα'} U_α·(P_{ραα'} U_{α'})].
    pub fn expansion(&self, sys: &PDESystem, beta: usize) -> Option<Expr> {
        let eq = self.equation(beta)?;
        let n = sys.dim;
        let mut acc = Expr::zero();
        for (alpha, op) in &eq.linear {
            acc = acc + op.apply(&Expr::atom(Atom::unknown(*alpha, n)));
        }
        for quad in &eq.quads {
            let mut inner = Expr::zero();
            for (al, ar, p) in &quad.entries {
                inner = inner
                    + Expr::atom(Atom::unknown(*al, n))
                        * p.op().apply(&Expr::atom(Atom::unknown(*ar, n)));
            }
            acc = acc + quad.outer.apply(&inner);
        }
        Some(acc)
    }
}

/// True iff the certificate expansion reproduces every T_β exactly.
pub fn mh_verify(sys: &PDESystem, cert: &MHCertificate) -> bool {
    for eq in &sys.equations {
        let Some(expansion) = cert.expansion(sys, eq.beta) else {
            return false;
        };
        let target = operator_expr(sys, eq.beta).expect("beta ranges over the system's equations");
        if expansion != target {
            return false;
        }
    }
    true
}

/// Constructive resolubility of a verified MH system: decompose and return the
/// certificate. Failure after verification is an internal defect.
pub fn mh_to_resoluble(
    sys: &PDESystem,
    cert: &MHCertificate,
) -> Result<ResolubleCertificate, ClassifyError> {
    for eq in &sys.equations {
        let Some(expansion) = cert.expansion(sys, eq.beta) else {
            return Err(ClassifyError::MissingMhDeclaration { beta: eq.beta });
        };
        if expansion != operator_expr(sys, eq.beta).expect("beta in range") {
            return Err(ClassifyError::CertificateMismatch { beta: eq.beta });
        }
    }
    let report = resoluble_decompose(sys);
    match report.certificate {
        Some(cert) => Ok(cert),
        None => {
            let (beta, witness) = report
                .verdicts
                .iter()
                .enumerate()
                .find_map(|(i, v)| match v {
                    Verdict::NotResoluble { witness } => Some((i + 1, witness)),
                    Verdict::Resoluble => None,
                })
                .expect("a missing certificate implies a not-resoluble verdict");
            Err(ClassifyError::DecompositionFailed {
                beta,
                witness: format!("{witness:?}"),
            })
        }
    }
}

fn random_op(rng: &mut impl Rng, dim: usize, max_order: u32) -> LinearOpSpec {
    let nterms = rng.random_range(1..=2);
    let mut terms = Vec::new();
    for _ in 0..nterms {
        let coeff = match rng.random_range(0..6) {
            0 => Expr::from_int(1),
            1 => Expr::from_int(-1),
            2 => Expr::from_int(rng.random_range(2..=3)),
            3 => Expr::constant(rat(1, 2)),
            4 => Expr::atom(Atom::Coordinate(rng.random_range(0..dim))),
            _ => Expr::from_int(1) + Expr::atom(Atom::Coordinate(rng.random_range(0..dim))),
        };
        let order = rng.random_range(0..=max_order);
        let mut p = MultiIndex::zero(dim);
        for _ in 0..order {
            p = p.bump(rng.random_range(0..dim));
        }
        terms.push((coeff, p));
    }
    LinearOpSpec::new(dim, terms).expect("generated coefficients are x-only")
}

/// A random verified-MH system (with its `mh` declarations attached), for the
/// constructive-resolubility property run. Bounds: operator order ≤ 2 overall,
/// degree 2, unknowns ≤ 2, dimension ≤ 2.
pub fn random_mh_system(rng: &mut impl Rng) -> PDESystem {
    let dim = rng.random_range(1..=2);
    let nunknowns = rng.random_range(1..=2);
    let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    let unknowns: Vec<String> = (1..=nunknowns).map(|i| format!("u{i}")).collect();
    let nequations = rng.random_range(1..=nunknowns);

    let mut equations = Vec::new();
    let mut mh = Vec::new();
    for beta in 1..=nequations {
        let mut linear: Vec<(usize, LinearOpSpec)> = Vec::new();
        let mut quads = Vec::new();
        for alpha in 0..nunknowns {
            if rng.random_bool(0.7) {
                linear.push((alpha, random_op(rng, dim, 2)));
            }
        }
        let nquads = rng.random_range(if linear.is_empty() { 1..=2 } else { 0..=2 });
        for _ in 0..nquads {
            let outer = random_op(rng, dim, 1);
            let nentries = rng.random_range(1..=2);
            let mut entries = Vec::new();
            for _ in 0..nentries {
                let al = rng.random_range(0..nunknowns);
                let ar = rng.random_range(0..nunknowns);
                entries.push((al, ar, random_op(rng, dim, 1)));
            }
            quads.push(crate::dsl::MhQuadDecl { outer, entries });
        }
        let decl = MhEquationDecl {
            beta,
            linear,
            quads,
            span: crate::dsl::Span { line: 1, col: 1 },
        };
        mh.push(decl);
        equations.push(crate::dsl::Equation {
            beta,
            lhs: Expr::zero(), // filled below from the certificate expansion
            rhs: Expr::zero(),
            span: crate::dsl::Span { line: 1, col: 1 },
        });
    }

    let mut sys = PDESystem {
        name: "random_mh".to_string(),
        dim,
        coords,
        unknowns,
        coeffs: Vec::new(),
        equations,
        gamma: Default::default(),
        traces: Vec::new(),
        mh,
        domain_box: None,
    };
    let cert = MHCertificate::from_system(&sys).expect("generated inner operators have order ≤ 1");
    for idx in 0..sys.equations.len() {
        let beta = sys.equations[idx].beta;
        sys.equations[idx].lhs = cert.expansion(&sys, beta).expect("every beta is declared");
    }
    sys
}

/// DSL-syntax rendering of an ω-jet monomial (witness display).
pub fn render_omega_monomial(m: &OmegaMonomial, sys: &PDESystem) -> String {
    let e = Expr::from_monomials(vec![Monomial::new(BigRational::one(), m.clone())]);
    crate::dsl::render_expr(&e, sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system;
    use rand::SeedableRng;

    fn burgers() -> PDESystem {
        parse_system(
            "system burgers\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\ngamma: x - 1/2*t\n",
        )
        .unwrap()
    }

    fn om(entries: Vec<u32>) -> Atom {
        Atom::OmegaJet(MultiIndex::from_entries(entries))
    }

    fn psi(p: Vec<u32>) -> Expr {
        Expr::atom(Atom::PsiJet { alpha: 0, deriv: MultiIndex::from_entries(p) })
    }

    fn chi(p: Vec<u32>) -> Expr {
        Expr::atom(Atom::ChiJet { alpha: 0, deriv: MultiIndex::from_entries(p) })
    }

    #[test]
    fn burgers_ansatz_monomial_map() {
        let sys = burgers();
        let ans = substitute_ansatz(&sys);
        let map = &ans.per_equation[0];
        // {1 → ψ_t + ψψ_x, ω → χ_t + ψχ_x + χψ_x, ω² → χχ_x, ω_t → χ,
        //  ω_x → ψχ, ω·ω_x → χ²}
        assert_eq!(map.len(), 6);
        assert_eq!(map[&vec![]], psi(vec![1, 0]) + psi(vec![0, 0]) * psi(vec![0, 1]));
        assert_eq!(
            map[&vec![(om(vec![0, 0]), 1)]],
            chi(vec![1, 0]) + psi(vec![0, 0]) * chi(vec![0, 1]) + chi(vec![0, 0]) * psi(vec![0, 1])
        );
        assert_eq!(map[&vec![(om(vec![0, 0]), 2)]], chi(vec![0, 0]) * chi(vec![0, 1]));
        assert_eq!(map[&vec![(om(vec![1, 0]), 1)]], chi(vec![0, 0]));
        assert_eq!(map[&vec![(om(vec![0, 1]), 1)]], psi(vec![0, 0]) * chi(vec![0, 0]));
        assert_eq!(
            map[&vec![(om(vec![0, 0]), 1), (om(vec![0, 1]), 1)]],
            chi(vec![0, 0]).pow(2)
        );
        assert_eq!(ans.recombined(0), {
            let b = ansatz_bindings(&sys);
            substitute(&sys.equations[0].lhs, &b).unwrap()
        });
    }

    #[test]
    fn linear_and_square_term_maps() {
        let sys = parse_system("system s\ndim 2\ncoords t x\nunknowns u\neq: D[1] u = 0\n").unwrap();
        let map = &substitute_ansatz(&sys).per_equation[0];
        assert_eq!(map.len(), 3);
        assert_eq!(map[&vec![]], psi(vec![1, 0]));
        assert_eq!(map[&vec![(om(vec![0, 0]), 1)]], chi(vec![1, 0]));
        assert_eq!(map[&vec![(om(vec![1, 0]), 1)]], chi(vec![0, 0]));

        let sys = parse_system("system s\ndim 1\ncoords x\nunknowns u\neq: u^2 = 0\n").unwrap();
        let map = &substitute_ansatz(&sys).per_equation[0];
        assert_eq!(map[&vec![]], psi(vec![0]).pow(2));
        assert_eq!(map[&vec![(om(vec![0]), 1)]], (psi(vec![0]) * chi(vec![0])).scale(&rat(2, 1)));
        assert_eq!(map[&vec![(om(vec![0]), 2)]], chi(vec![0]).pow(2));
    }

    #[test]
    fn omega_basis_expansions() {
        let basis = omega_basis(1, 2, 2);
        let find = |p: Vec<u32>, l: u32| {
            basis
                .elements
                .iter()
                .find(|e| e.p == MultiIndex::from_entries(p.clone()) && e.l == l)
                .unwrap()
        };
        assert_eq!(find(vec![0], 1).expansion, BTreeMap::from([(vec![(om(vec![0]), 1)], rat(1, 1))]));
        assert_eq!(
            find(vec![1], 2).expansion,
            BTreeMap::from([(vec![(om(vec![0]), 1), (om(vec![1]), 1)], rat(2, 1))])
        );
        assert_eq!(
            find(vec![2], 2).expansion,
            BTreeMap::from([
                (vec![(om(vec![1]), 2)], rat(2, 1)),
                (vec![(om(vec![0]), 1), (om(vec![2]), 1)], rat(2, 1)),
            ])
        );
        // column order is lexicographic in (l, p)
        let order: Vec<(u32, Vec<u32>)> =
            basis.elements.iter().map(|e| (e.l, e.p.entries().to_vec())).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn burgers_certificate_matches_ground_truth() {
        let sys = burgers();
        let report = resoluble_decompose(&sys);
        assert!(report.all_resoluble());
        let cert = report.certificate.unwrap();
        let entries = &cert.per_equation[0];
        let expected = vec![
            (psi(vec![1, 0]) + psi(vec![0, 0]) * psi(vec![0, 1]), vec![0, 0], 0),
            (
                chi(vec![1, 0]) + psi(vec![0, 0]) * chi(vec![0, 1]) + chi(vec![0, 0]) * psi(vec![0, 1]),
                vec![0, 0],
                1,
            ),
            (psi(vec![0, 0]) * chi(vec![0, 0]), vec![0, 1], 1),
            (chi(vec![0, 0]), vec![1, 0], 1),
            (chi(vec![0, 0]) * chi(vec![0, 1]), vec![0, 0], 2),
            (chi(vec![0, 0]).pow(2).scale(&rat(1, 2)), vec![0, 1], 2),
        ];
        assert_eq!(entries.len(), expected.len());
        for (mult, p, l) in expected {
            let p = MultiIndex::from_entries(p);
            assert!(
                entries.iter().any(|e| e.p == p && e.l == l && e.multiplier == mult),
                "missing certificate entry for (p={p}, l={l})"
            );
        }
        assert!(verify_certificate(&sys, &cert));

        // perturbing one multiplier breaks the identity
        let mut broken = cert.clone();
        broken.per_equation[0][0].multiplier =
            broken.per_equation[0][0].multiplier.clone() + Expr::one();
        assert!(!verify_certificate(&sys, &broken));
    }

    #[test]
    fn gradient_square_is_not_resoluble() {
        let sys = parse_system(
            "system grad\ndim 2\ncoords t x\nunknowns u\neq: D[1] u + D[2] u * D[2] u = 0\n",
        )
        .unwrap();
        for order in [EliminationOrder::Standard, EliminationOrder::Reversed] {
            let report = resoluble_decompose_with(&sys, order);
            let Verdict::NotResoluble { witness } = &report.verdicts[0] else {
                panic!("expected not-resoluble")
            };
            assert_eq!(witness, &vec![(om(vec![0, 1]), 2)], "witness should be the ω_x² monomial");
        }
    }

    #[test]
    fn u_times_uxx_is_not_resoluble() {
        let sys = parse_system(
            "system ulap\ndim 2\ncoords t x\nunknowns u\neq: D[1] u + u * D[2,2] u = 0\n",
        )
        .unwrap();
        for order in [EliminationOrder::Standard, EliminationOrder::Reversed] {
            let report = resoluble_decompose_with(&sys, order);
            let Verdict::NotResoluble { witness } = &report.verdicts[0] else {
                panic!("expected not-resoluble")
            };
            assert_eq!(witness, &vec![(om(vec![0, 0]), 1), (om(vec![0, 2]), 1)]);
        }
    }

    #[test]
    fn burgers_mh_certificate_verifies_and_converts() {
        let sys = parse_system(
            "system burgers\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\ngamma: x - 1/2*t\n\
             mh[1]: lin[u](D[1]) + quad(1)[u,u: D[2]]\n",
        )
        .unwrap();
        let cert = MHCertificate::from_system(&sys).unwrap();
        assert!(mh_verify(&sys, &cert));
        let res = mh_to_resoluble(&sys, &cert).unwrap();
        assert!(verify_certificate(&sys, &res));
    }

    #[test]
    fn viscous_momentum_mh_verifies() {
        // u_t + u·u_x − ν·u_xx = f with L = D_t − ν·D_x² linear part
        let sys = parse_system(
            "system viscous\ndim 2\ncoords t x\nunknowns u\ncoeffs nu f\n\
             eq: D[1] u + u * D[2] u - nu * D[2,2] u = f\n\
             mh[1]: lin[u](D[1] - nu*D[2,2]) + quad(1/2 * D[2])[u,u: 1]\n",
        )
        .unwrap();
        let cert = MHCertificate::from_system(&sys).unwrap();
        assert!(mh_verify(&sys, &cert));
        assert!(mh_to_resoluble(&sys, &cert).is_ok());
    }

    #[test]
    fn pure_linear_system_certificate_has_low_degree() {
        let sys = parse_system(
            "system transport\ndim 2\ncoords t x\nunknowns u\neq: D[1] u + 2*D[2] u = 0\n\
             mh[1]: lin[u](D[1] + 2*D[2])\n",
        )
        .unwrap();
        let cert = MHCertificate::from_system(&sys).unwrap();
        assert!(mh_verify(&sys, &cert));
        let res = mh_to_resoluble(&sys, &cert).unwrap();
        assert!(res.per_equation[0].iter().all(|e| e.l <= 1));
    }

    #[test]
    fn toy_mhd_is_resoluble() {
        let sys = parse_system(
            "system mhd\ndim 2\ncoords t x\nunknowns u b\n\
             eq: D[1] u + u * D[2] b + b * D[2] u = 0\n\
             eq: D[1] b + u * D[2] b + b * D[2] u = 0\n",
        )
        .unwrap();
        let report = resoluble_decompose(&sys);
        assert!(report.all_resoluble());
    }

    #[test]
    fn mismatched_mh_certificate_is_rejected() {
        let sys = parse_system(
            "system s\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\nmh[1]: lin[u](D[1])\n",
        )
        .unwrap();
        let cert = MHCertificate::from_system(&sys).unwrap();
        assert!(!mh_verify(&sys, &cert));
        assert_eq!(
            mh_to_resoluble(&sys, &cert).unwrap_err(),
            ClassifyError::CertificateMismatch { beta: 1 }
        );
    }

    #[test]
    fn random_mh_systems_decompose() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let sys = random_mh_system(&mut rng);
            let cert = MHCertificate::from_system(&sys).unwrap();
            assert!(mh_verify(&sys, &cert));
            assert!(mh_to_resoluble(&sys, &cert).is_ok());
        }
    }
}
