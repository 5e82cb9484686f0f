//! Junction conditions for jump-discontinuous candidate solutions
//! U = U₋ + (U₊ − U₋)·H_γ.
//!
//! Two independent generators: the resoluble path pushes a resoluble
//! certificate through ω → H_γ (with H^l = H applied before differentiation),
//! and the MH path instantiates the closed junction formula for
//! multiplicative-Heaviside systems. Both end in a generalized expression per
//! equation whose distributional coefficients must vanish; agreement of the
//! two paths is a theorem and is enforced by tests.

use crate::classify::{MHCertificate, ResolubleCertificate};
use crate::dist::{
    derive_gen_multi, expand_heaviside_derivative, gen_mul, gen_normal_form, DistAtom, DistError,
    GenExpr,
};
use crate::dsl::PDESystem;
use crate::expr::{rat, substitute, Atom, Bindings, Expr, LinearOpSpec, Side};

/// Whether the candidate actually jumps across Γ (χ = U₊ − U₋) or not (χ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpMode {
    Jump,
    NoJump,
}

/// ψ_α → U⁻_α and χ_α → U⁺_α − U⁻_α (or 0), with jet closure.
#[derive(Debug, Clone)]
pub struct TraceBinding {
    bindings: Bindings,
    mode: JumpMode,
}

impl TraceBinding {
    pub fn new(sys: &PDESystem, mode: JumpMode) -> Self {
        let n = sys.dim;
        let mut bindings = Bindings::with_jet_closure();
        for alpha in 0..sys.num_unknowns() {
            let minus = Expr::atom(Atom::trace(Side::Minus, alpha, n));
            let plus = Expr::atom(Atom::trace(Side::Plus, alpha, n));
            let chi_image = match mode {
                JumpMode::Jump => plus - &minus,
                JumpMode::NoJump => Expr::zero(),
            };
            bindings = bindings
                .bind(Atom::psi(alpha, n), minus)
                .bind(Atom::chi(alpha, n), chi_image);
        }
        TraceBinding { bindings, mode }
    }

    pub fn jump(sys: &PDESystem) -> Self {
        TraceBinding::new(sys, JumpMode::Jump)
    }

    pub fn no_jump(sys: &PDESystem) -> Self {
        TraceBinding::new(sys, JumpMode::NoJump)
    }

    pub fn mode(&self) -> JumpMode {
        self.mode
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        substitute(e, &self.bindings).expect("trace bindings are jet-consistent by construction")
    }

    /// The jump (U⁺ − U⁻)_α, or zero in no-jump mode.
    fn jump_of(&self, alpha: usize, dim: usize) -> Expr {
        match self.mode {
            JumpMode::Jump => {
                Expr::atom(Atom::trace(Side::Plus, alpha, dim))
                    - Expr::atom(Atom::trace(Side::Minus, alpha, dim))
            }
            JumpMode::NoJump => Expr::zero(),
        }
    }

    /// The sum (U⁺ + U⁻)_α (which is 2U⁻_α in no-jump mode).
    fn sum_of(&self, alpha: usize, dim: usize) -> Expr {
        match self.mode {
            JumpMode::Jump => {
                Expr::atom(Atom::trace(Side::Plus, alpha, dim))
                    + Expr::atom(Atom::trace(Side::Minus, alpha, dim))
            }
            JumpMode::NoJump => {
                Expr::atom(Atom::trace(Side::Minus, alpha, dim)).scale(&rat(2, 1))
            }
        }
    }
}

/// Substitution U_α → one-sided trace, with jet closure (for T_β(U_±)).
fn side_binding(sys: &PDESystem, side: Side) -> Bindings {
    let n = sys.dim;
    let mut b = Bindings::with_jet_closure();
    for alpha in 0..sys.num_unknowns() {
        b = b.bind(Atom::unknown(alpha, n), Expr::atom(Atom::trace(side, alpha, n)));
    }
    b
}

/// T_β evaluated on the one-sided trace.
pub fn classical_operator_value(sys: &PDESystem, beta: usize, side: Side) -> Expr {
    let eq = &sys.equations[beta - 1];
    let b = side_binding(sys, side);
    substitute(&eq.lhs, &b).expect("side bindings are jet-consistent by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Required,
    SatisfiedByHypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionEntry {
    pub atom: DistAtom,
    pub coefficient: Expr,
    pub status: ConditionStatus,
}

/// Conditions for one equation: the residual's distributional coefficients
/// must vanish; the hypothesis slot holds the Heaviside coefficient discharged
/// by the classical-solution identity T_β(U₊) − T_β(U₋) = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationConditions {
    pub residual: GenExpr,
    pub hypothesis: Option<Expr>,
}

impl EquationConditions {
    pub fn entries(&self) -> Vec<ConditionEntry> {
        let mut out: Vec<ConditionEntry> = self
            .residual
            .parts()
            .map(|(atom, coeff)| ConditionEntry {
                atom: atom.clone(),
                coefficient: coeff.clone(),
                status: ConditionStatus::Required,
            })
            .collect();
        if let Some(h) = &self.hypothesis {
            out.push(ConditionEntry {
                atom: DistAtom::Heaviside,
                coefficient: h.clone(),
                status: ConditionStatus::SatisfiedByHypothesis,
            });
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        self.residual.is_zero() && self.hypothesis.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionConditionSet {
    pub per_equation: Vec<EquationConditions>,
    /// Binding the set was generated under; U₊ = U₋ makes the
    /// classical-solution hypothesis vacuous.
    pub mode: JumpMode,
}

impl JunctionConditionSet {
    pub fn is_trivial(&self) -> bool {
        self.per_equation.iter().all(EquationConditions::is_trivial)
    }
}

/// Locality of a condition (Remark-style reading: δ-family concentrates on Γ,
/// the Heaviside coefficient constrains a neighbourhood of Γ).
pub fn locality_label(atom: &DistAtom) -> &'static str {
    match atom {
        DistAtom::One | DistAtom::Heaviside => "near Gamma",
        DistAtom::DiracDeriv(_) => "on Gamma",
    }
}

/// Substitute ω = H_γ (H^l = H before differentiation) into a certificate
/// multiplier. Healthy multipliers are ω-free and come out smooth; ω-jets in a
/// corrupted multiplier force distributional products and surface as errors.
fn multiplier_to_gen(mult: &Expr) -> Result<GenExpr, DistError> {
    let mut acc = GenExpr::zero();
    for (key, coeff) in mult.collect_by(Atom::is_omega) {
        let mut g = GenExpr::smooth(coeff);
        for (atom, _power) in key {
            let factor = match &atom {
                Atom::OmegaJet(p) => expand_heaviside_derivative(p),
                _ => unreachable!("collect_by(is_omega) keys hold only ω-jets"),
            };
            g = gen_mul(&g, &factor)?;
        }
        acc = acc + g;
    }
    Ok(acc)
}

/// Conditions via the certificate route:
/// Σ_ρ T_ρ(U₋, U₊−U₋)·D^{p_ρ}H_γ − f_β, coefficients per distributional atom.
pub fn junction_from_resoluble_with(
    sys: &PDESystem,
    cert: &ResolubleCertificate,
    binding: &TraceBinding,
) -> Result<JunctionConditionSet, DistError> {
    let mut per_equation = Vec::new();
    for (idx, eq) in sys.equations.iter().enumerate() {
        let mut residual = GenExpr::zero();
        for entry in &cert.per_equation[idx] {
            let bound = binding.apply(&entry.multiplier);
            let mult = multiplier_to_gen(&bound)?;
            let dist_part = if entry.l == 0 {
                if entry.p.is_zero() {
                    GenExpr::smooth(Expr::one())
                } else {
                    continue; // D^p of a constant
                }
            } else {
                expand_heaviside_derivative(&entry.p)
            };
            residual = residual + gen_mul(&mult, &dist_part)?;
        }
        residual = residual - GenExpr::smooth(eq.rhs.clone());
        per_equation.push(EquationConditions {
            residual: gen_normal_form(&residual),
            hypothesis: None,
        });
    }
    Ok(JunctionConditionSet { per_equation, mode: binding.mode() })
}

pub fn junction_from_resoluble(
    sys: &PDESystem,
    cert: &ResolubleCertificate,
) -> Result<JunctionConditionSet, DistError> {
    junction_from_resoluble_with(sys, cert, &TraceBinding::jump(sys))
}

fn apply_op_gen(op: &LinearOpSpec, g: &GenExpr) -> GenExpr {
    let mut acc = GenExpr::zero();
    for (coeff, q) in op.terms() {
        acc = acc + derive_gen_multi(g, q).scale(coeff);
    }
    acc
}

/// Conditions straight from an MH certificate: classical part T_β(U₋)
/// plus L[(ΔU)H_γ], plus Σ_ρ L_ρ{[U₊P_ρU₊ − U₋P_ρU₋]H_γ}, plus
/// ½Σ_ρ L_ρ{Σ_{αα′}(U₊+U₋)_α(ΔU)_{α′}·Q_{ραα′}H_γ} with Q the first-order
/// homogeneous part of P; minus f_β.
pub fn junction_from_mh_with(
    sys: &PDESystem,
    cert: &MHCertificate,
    binding: &TraceBinding,
) -> Result<JunctionConditionSet, DistError> {
    let n = sys.dim;
    let mut per_equation = Vec::new();
    for eq in &sys.equations {
        let mh_eq = cert
            .equation(eq.beta)
            .expect("pre: verified MH certificate covers every equation");
        let mut residual = GenExpr::smooth(classical_operator_value(sys, eq.beta, Side::Minus));

        for (alpha, op) in &mh_eq.linear {
            let operand = GenExpr::heaviside().scale(&binding.jump_of(*alpha, n));
            residual = residual + apply_op_gen(op, &operand);
        }

        for quad in &mh_eq.quads {
            let mut inner_jump = Expr::zero();
            for (al, ar, p) in &quad.entries {
                let product = Expr::atom(Atom::unknown(*al, n))
                    * p.op().apply(&Expr::atom(Atom::unknown(*ar, n)));
                let plus = substitute(&product, &side_binding(sys, Side::Plus))
                    .expect("side bindings are jet-consistent");
                let minus = substitute(&product, &side_binding(sys, Side::Minus))
                    .expect("side bindings are jet-consistent");
                inner_jump = inner_jump + plus - minus;
            }
            residual = residual + apply_op_gen(&quad.outer, &GenExpr::heaviside().scale(&inner_jump));

            let mut half = GenExpr::zero();
            for (al, ar, p) in &quad.entries {
                let q_on_h = apply_op_gen(&p.first_order_part(), &GenExpr::heaviside());
                let coeff = binding.sum_of(*al, n) * binding.jump_of(*ar, n);
                half = half + q_on_h.scale(&coeff);
            }
            residual = residual + apply_op_gen(&quad.outer, &half).scale(&Expr::constant(rat(1, 2)));
        }

        residual = residual - GenExpr::smooth(eq.rhs.clone());
        per_equation.push(EquationConditions {
            residual: gen_normal_form(&residual),
            hypothesis: None,
        });
    }
    Ok(JunctionConditionSet { per_equation, mode: binding.mode() })
}

pub fn junction_from_mh(
    sys: &PDESystem,
    cert: &MHCertificate,
) -> Result<JunctionConditionSet, DistError> {
    junction_from_mh_with(sys, cert, &TraceBinding::jump(sys))
}

/// Discharge the parts implied by U_± being classical solutions: the smooth
/// part cancels against T_β(U₋) = f_β, and the Heaviside coefficient reduces
/// modulo T_β(U₊) − T_β(U₋) = 0 (recorded, not deleted).
pub fn simplify_with_classical(conds: &JunctionConditionSet, sys: &PDESystem) -> JunctionConditionSet {
    let per_equation = sys
        .equations
        .iter()
        .zip(&conds.per_equation)
        .map(|(eq, ec)| {
            let classical =
                classical_operator_value(sys, eq.beta, Side::Minus) - eq.rhs.clone();
            let hyp = match conds.mode {
                JumpMode::Jump => {
                    classical_operator_value(sys, eq.beta, Side::Plus)
                        - classical_operator_value(sys, eq.beta, Side::Minus)
                }
                JumpMode::NoJump => Expr::zero(),
            };
            let one_left = ec.residual.part(&DistAtom::One) - &classical;
            let h_left = ec.residual.part(&DistAtom::Heaviside) - &hyp;
            let mut residual = ec.residual.clone()
                - GenExpr::single(DistAtom::One, ec.residual.part(&DistAtom::One))
                - GenExpr::single(DistAtom::Heaviside, ec.residual.part(&DistAtom::Heaviside));
            if !one_left.is_zero() {
                residual = residual + GenExpr::single(DistAtom::One, one_left);
            }
            if !h_left.is_zero() {
                residual = residual + GenExpr::single(DistAtom::Heaviside, h_left);
            }
            EquationConditions {
                residual,
                hypothesis: if hyp.is_zero() { None } else { Some(hyp) },
            }
        })
        .collect();
    JunctionConditionSet { per_equation, mode: conds.mode }
}

/// On-Γ reduction: fold γ·δ-family coefficients (γδ_γ = 0, γD^{l+1}δ_γ =
/// −(l+1)D^lδ_γ). Idempotent.
pub fn restrict_to_gamma(conds: &JunctionConditionSet) -> JunctionConditionSet {
    JunctionConditionSet {
        per_equation: conds
            .per_equation
            .iter()
            .map(|ec| EquationConditions {
                residual: gen_normal_form(&ec.residual),
                hypothesis: ec.hypothesis.clone(),
            })
            .collect(),
        mode: conds.mode,
    }
}

/// Syntactic per-atom equality of two (normalized, restricted) sets.
pub fn conditions_equal(c1: &JunctionConditionSet, c2: &JunctionConditionSet) -> bool {
    if c1.per_equation.len() != c2.per_equation.len() {
        return false;
    }
    c1.per_equation
        .iter()
        .zip(&c2.per_equation)
        .all(|(a, b)| a.residual == b.residual && a.hypothesis == b.hypothesis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{
        mh_to_resoluble, resoluble_decompose, resoluble_decompose_with, EliminationOrder,
        MHCertificate,
    };
    use crate::dsl::parse_system;
    use crate::expr::MultiIndex;

    fn tr(side: Side, p: Vec<u32>) -> Expr {
        Expr::atom(Atom::TraceJet { side, alpha: 0, deriv: MultiIndex::from_entries(p) })
    }

    fn gj(p: Vec<u32>) -> Expr {
        Expr::atom(Atom::GammaJet(MultiIndex::from_entries(p)))
    }

    fn full_pipeline(sys: &PDESystem) -> JunctionConditionSet {
        let cert = resoluble_decompose(sys).certificate.expect("resoluble");
        let conds = junction_from_resoluble(sys, &cert).unwrap();
        restrict_to_gamma(&simplify_with_classical(&conds, sys))
    }

    #[test]
    fn burgers_rankine_hugoniot() {
        let sys = parse_system(
            "system burgers\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\ngamma: x - 1/2*t\n",
        )
        .unwrap();
        let conds = full_pipeline(&sys);
        let ec = &conds.per_equation[0];
        // sole required condition: (u₊−u₋)γ_t + ½(u₊²−u₋²)γ_x on Γ
        let delta = ec.residual.part(&DistAtom::DiracDeriv(0));
        let du = tr(Side::Plus, vec![0, 0]) - tr(Side::Minus, vec![0, 0]);
        let expected = du.clone() * gj(vec![1, 0])
            + (tr(Side::Plus, vec![0, 0]).pow(2) - tr(Side::Minus, vec![0, 0]).pow(2))
                .scale(&rat(1, 2))
                * gj(vec![0, 1]);
        assert_eq!(delta, expected);
        assert!(ec.residual.part(&DistAtom::One).is_zero());
        assert!(ec.residual.part(&DistAtom::Heaviside).is_zero());
        // the H-coefficient is discharged, not deleted
        let hyp = ec.hypothesis.clone().unwrap();
        let t_plus = tr(Side::Plus, vec![1, 0])
            + tr(Side::Plus, vec![0, 0]) * tr(Side::Plus, vec![0, 1]);
        let t_minus = tr(Side::Minus, vec![1, 0])
            + tr(Side::Minus, vec![0, 0]) * tr(Side::Minus, vec![0, 1]);
        assert_eq!(hyp, t_plus - t_minus);
    }

    #[test]
    fn linear_transport_conditions() {
        let sys = parse_system(
            "system transport\ndim 2\ncoords t x\nunknowns u\neq: D[1] u = 0\n",
        )
        .unwrap();
        let conds = full_pipeline(&sys);
        let ec = &conds.per_equation[0];
        let du = tr(Side::Plus, vec![0, 0]) - tr(Side::Minus, vec![0, 0]);
        assert_eq!(ec.residual.part(&DistAtom::DiracDeriv(0)), du * gj(vec![1, 0]));
        assert_eq!(
            ec.hypothesis.clone().unwrap(),
            tr(Side::Plus, vec![1, 0]) - tr(Side::Minus, vec![1, 0])
        );
    }

    #[test]
    fn heat_jump_produces_dirac_prime() {
        let sys = parse_system(
            "system heat\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u - D[2,2] u = 0\n",
        )
        .unwrap();
        let conds = full_pipeline(&sys);
        let ec = &conds.per_equation[0];
        let du = tr(Side::Plus, vec![0, 0]) - tr(Side::Minus, vec![0, 0]);
        let dux = tr(Side::Plus, vec![0, 1]) - tr(Side::Minus, vec![0, 1]);
        assert_eq!(
            ec.residual.part(&DistAtom::DiracDeriv(1)),
            -(du.clone() * gj(vec![0, 1]).pow(2))
        );
        assert_eq!(
            ec.residual.part(&DistAtom::DiracDeriv(0)),
            du.clone() * gj(vec![1, 0])
                - dux * gj(vec![0, 1]).scale(&rat(2, 1))
                - du * gj(vec![0, 2])
        );
    }

    #[test]
    fn theorem_paths_agree_on_burgers() {
        let sys = parse_system(
            "system burgers\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + u * D[2] u = 0\n\
             mh[1]: lin[u](D[1]) + quad(1)[u,u: D[2]]\n",
        )
        .unwrap();
        let mh_cert = MHCertificate::from_system(&sys).unwrap();
        let via_mh = restrict_to_gamma(&simplify_with_classical(
            &junction_from_mh(&sys, &mh_cert).unwrap(),
            &sys,
        ));
        let res_cert = mh_to_resoluble(&sys, &mh_cert).unwrap();
        let via_res = restrict_to_gamma(&simplify_with_classical(
            &junction_from_resoluble(&sys, &res_cert).unwrap(),
            &sys,
        ));
        assert!(conditions_equal(&via_mh, &via_res));
    }

    #[test]
    fn theorem_paths_agree_on_viscous_momentum() {
        let sys = parse_system(
            "system viscous\ndim 2\ncoords t x\nunknowns u\ncoeffs nu\n\
             eq: D[1] u + u * D[2] u - nu * D[2,2] u = 0\n\
             mh[1]: lin[u](D[1] - nu*D[2,2]) + quad(1/2 * D[2])[u,u: 1]\n",
        )
        .unwrap();
        let mh_cert = MHCertificate::from_system(&sys).unwrap();
        let via_mh = restrict_to_gamma(&simplify_with_classical(
            &junction_from_mh(&sys, &mh_cert).unwrap(),
            &sys,
        ));
        let res_cert = mh_to_resoluble(&sys, &mh_cert).unwrap();
        let via_res = restrict_to_gamma(&simplify_with_classical(
            &junction_from_resoluble(&sys, &res_cert).unwrap(),
            &sys,
        ));
        assert!(conditions_equal(&via_mh, &via_res));
        // δ′ coefficient present (second-order linear part)
        assert!(!via_mh.per_equation[0].residual.part(&DistAtom::DiracDeriv(1)).is_zero());
    }

    #[test]
    fn zero_order_p_entry_contributes_no_half_term() {
        // quad with P = multiplication by 1: Q = 0, so only the first sum acts
        let sys = parse_system(
            "system uv\ndim 2\ncoords t x\nunknowns u\n\
             eq: D[1] u + 2*u*D[2] u = 0\n\
             mh[1]: lin[u](D[1]) + quad(D[2])[u,u: 1]\n",
        )
        .unwrap();
        let mh_cert = MHCertificate::from_system(&sys).unwrap();
        assert!(crate::classify::mh_verify(&sys, &mh_cert));
        let via_mh = restrict_to_gamma(&simplify_with_classical(
            &junction_from_mh(&sys, &mh_cert).unwrap(),
            &sys,
        ));
        let du2 = tr(Side::Plus, vec![0, 0]).pow(2) - tr(Side::Minus, vec![0, 0]).pow(2);
        let du = tr(Side::Plus, vec![0, 0]) - tr(Side::Minus, vec![0, 0]);
        assert_eq!(
            via_mh.per_equation[0].residual.part(&DistAtom::DiracDeriv(0)),
            du * gj(vec![1, 0]) + du2 * gj(vec![0, 1])
        );
        let res_cert = mh_to_resoluble(&sys, &mh_cert).unwrap();
        let via_res = restrict_to_gamma(&simplify_with_classical(
            &junction_from_resoluble(&sys, &res_cert).unwrap(),
            &sys,
        ));
        assert!(conditions_equal(&via_mh, &via_res));
    }

    #[test]
    fn no_jump_is_trivial() {
        for text in [
            "system burgers\ndim 2\ncoords t x\nunknowns u\neq: D[1] u + u * D[2] u = 0\n",
            "system heat\ndim 2\ncoords t x\nunknowns u\neq: D[1] u - D[2,2] u = 0\n",
        ] {
            let sys = parse_system(text).unwrap();
            let cert = resoluble_decompose(&sys).certificate.unwrap();
            let conds =
                junction_from_resoluble_with(&sys, &cert, &TraceBinding::no_jump(&sys)).unwrap();
            let conds = restrict_to_gamma(&simplify_with_classical(&conds, &sys));
            assert!(conds.is_trivial());
            assert!(conds.per_equation.iter().all(|ec| ec.entries().is_empty()));
        }
    }

    #[test]
    fn certificate_choice_invariance() {
        for text in [
            "system burgers\ndim 2\ncoords t x\nunknowns u\neq: D[1] u + u * D[2] u = 0\n",
            "system heat\ndim 2\ncoords t x\nunknowns u\neq: D[1] u - D[2,2] u = 0\n",
            "system mhd\ndim 2\ncoords t x\nunknowns u b\n\
             eq: D[1] u + u * D[2] b + b * D[2] u = 0\n\
             eq: D[1] b + u * D[2] b + b * D[2] u = 0\n",
        ] {
            let sys = parse_system(text).unwrap();
            let c1 = resoluble_decompose_with(&sys, EliminationOrder::Standard)
                .certificate
                .unwrap();
            let c2 = resoluble_decompose_with(&sys, EliminationOrder::Reversed)
                .certificate
                .unwrap();
            let j1 = restrict_to_gamma(&simplify_with_classical(
                &junction_from_resoluble(&sys, &c1).unwrap(),
                &sys,
            ));
            let j2 = restrict_to_gamma(&simplify_with_classical(
                &junction_from_resoluble(&sys, &c2).unwrap(),
                &sys,
            ));
            assert!(conditions_equal(&j1, &j2));
        }
    }

    #[test]
    fn restrict_is_idempotent_and_one_part_absent() {
        let sys = parse_system(
            "system heat\ndim 2\ncoords t x\nunknowns u\neq: D[1] u - D[2,2] u = 0\n",
        )
        .unwrap();
        let cert = resoluble_decompose(&sys).certificate.unwrap();
        let conds = simplify_with_classical(&junction_from_resoluble(&sys, &cert).unwrap(), &sys);
        let once = restrict_to_gamma(&conds);
        let twice = restrict_to_gamma(&once);
        assert!(conditions_equal(&once, &twice));
        for ec in &once.per_equation {
            assert!(ec.residual.part(&DistAtom::One).is_zero());
        }
    }

    #[test]
    fn nonzero_rhs_cancels_in_one_part() {
        let sys = parse_system(
            "system forced\ndim 2\ncoords t x\nunknowns u\ncoeffs f\n\
             eq: D[1] u + u * D[2] u = f\n",
        )
        .unwrap();
        let conds = full_pipeline(&sys);
        assert!(conds.per_equation[0].residual.part(&DistAtom::One).is_zero());
        // δ-condition unchanged by the forcing
        let du = tr(Side::Plus, vec![0, 0]) - tr(Side::Minus, vec![0, 0]);
        let expected = du * gj(vec![1, 0])
            + (tr(Side::Plus, vec![0, 0]).pow(2) - tr(Side::Minus, vec![0, 0]).pow(2))
                .scale(&rat(1, 2))
                * gj(vec![0, 1]);
        assert_eq!(conds.per_equation[0].residual.part(&DistAtom::DiracDeriv(0)), expected);
    }

    #[test]
    fn locality_labels() {
        assert_eq!(locality_label(&DistAtom::DiracDeriv(0)), "on Gamma");
        assert_eq!(locality_label(&DistAtom::DiracDeriv(2)), "on Gamma");
        assert_eq!(locality_label(&DistAtom::Heaviside), "near Gamma");
    }
}
