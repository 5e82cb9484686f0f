//! Acceptance gate. Each test covers one criterion, prints a single
//! PASS/FAIL line, and enforces its wall-clock budget (run with
//! `--nocapture` to see the lines even on success).

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jcond_core::classify::{
    mh_to_resoluble, mh_verify, random_mh_system, resoluble_decompose, resoluble_decompose_with,
    verify_certificate, EliminationOrder, MHCertificate, Verdict,
};
use jcond_core::dist::{
    derive_gen, expand_heaviside_derivative, gen_normal_form, k_operator, reduce_gamma_delta,
    DistAtom, GenExpr,
};
use jcond_core::dsl::{parse_system, PDESystem};
use jcond_core::expr::{expr_equal, rat, Atom, Expr, Monomial, MultiIndex, Side};
use jcond_core::junction::{
    conditions_equal, junction_from_mh, junction_from_resoluble, restrict_to_gamma,
    simplify_with_classical, ConditionStatus, JunctionConditionSet, TraceBinding,
};
use jcond_core::numcheck::{
    build_grid, convergence_study, GridSpec, MollifierSpec, NumVerdict, Scenario,
};

fn criterion(
    number: u32,
    title: &str,
    budget: Duration,
    body: impl FnOnce() -> Result<(), String>,
) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let result = result.and(if elapsed <= budget {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, budget {budget:?}"))
    });
    match result {
        Ok(()) => println!("acceptance {number} ({title}): PASS [{elapsed:.2?}]"),
        Err(msg) => {
            println!("acceptance {number} ({title}): FAIL - {msg}");
            panic!("acceptance criterion {number} failed: {msg}");
        }
    }
}

fn load(text: &str) -> Result<PDESystem, String> {
    parse_system(text).map_err(|d| format!("parse failed: {d:?}"))
}

fn derived_conditions(sys: &PDESystem) -> Result<JunctionConditionSet, String> {
    let report = resoluble_decompose(sys);
    let cert = report.certificate.as_ref().ok_or("system is not resoluble")?;
    let conds = junction_from_resoluble(sys, cert).map_err(|e| e.to_string())?;
    Ok(restrict_to_gamma(&simplify_with_classical(&conds, sys)))
}

fn gamma_jet(entries: Vec<u32>) -> Expr {
    Expr::atom(Atom::GammaJet(MultiIndex::from_entries(entries)))
}

#[test]
fn acceptance_1_burgers_rankine_hugoniot() {
    criterion(1, "Burgers Rankine-Hugoniot", Duration::from_secs(1), || {
        let sys = load(include_str!("data/burgers.pde"))?;
        let conds = derived_conditions(&sys)?;
        let entries = conds.per_equation[0].entries();
        if entries.len() != 2 {
            return Err(format!("expected 2 entries, got {}", entries.len()));
        }
        let deltas: Vec<_> = entries
            .iter()
            .filter(|e| matches!(e.atom, DistAtom::DiracDeriv(_)))
            .collect();
        if deltas.len() != 1 || deltas[0].atom != DistAtom::DiracDeriv(0) {
            return Err("expected exactly one delta condition of order 0".to_string());
        }
        if deltas[0].status != ConditionStatus::Required {
            return Err("delta condition must be required".to_string());
        }
        let up = Expr::atom(Atom::trace(Side::Plus, 0, 2));
        let um = Expr::atom(Atom::trace(Side::Minus, 0, 2));
        let rh = (up.clone() - um.clone()) * gamma_jet(vec![1, 0])
            + (up.pow(2) - um.pow(2)).scale(&rat(1, 2)) * gamma_jet(vec![0, 1]);
        if !expr_equal(&deltas[0].coefficient, &rh) {
            return Err(format!("delta coefficient is {}", deltas[0].coefficient));
        }
        let hyps: Vec<_> = entries
            .iter()
            .filter(|e| e.status == ConditionStatus::SatisfiedByHypothesis)
            .collect();
        if hyps.len() != 1 || hyps[0].atom != DistAtom::Heaviside {
            return Err("expected exactly one Heaviside entry satisfied by hypothesis".to_string());
        }
        Ok(())
    });
}

#[test]
fn acceptance_2_theorem_paths_agree() {
    criterion(2, "MH and resoluble paths agree", Duration::from_secs(10), || {
        let corpus = [
            include_str!("data/burgers.pde"),
            include_str!("data/viscous_burgers.pde"),
            include_str!("data/mhd_toy.pde"),
            include_str!("data/transport.pde"),
            include_str!("data/heat_jump.pde"),
        ];
        if corpus.len() < 5 {
            return Err("need at least 5 MH systems".to_string());
        }
        for text in corpus {
            let sys = load(text)?;
            let mh = MHCertificate::from_system(&sys).map_err(|e| e.to_string())?;
            if !mh_verify(&sys, &mh) {
                return Err(format!("{}: MH declaration does not reproduce operator", sys.name));
            }
            let via_mh = restrict_to_gamma(&simplify_with_classical(
                &junction_from_mh(&sys, &mh).map_err(|e| e.to_string())?,
                &sys,
            ));
            let via_resoluble = derived_conditions(&sys)?;
            if !conditions_equal(&via_mh, &via_resoluble) {
                return Err(format!("{}: paths disagree", sys.name));
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_3_heaviside_derivative_oracle() {
    criterion(3, "D^p H expansion oracle", Duration::from_secs(5), || {
        for n in 1..=3usize {
            for p in MultiIndex::all_up_to(n, 4) {
                let direct = expand_heaviside_derivative(&p);
                let mut iterated = GenExpr::heaviside();
                for dir in p.directions() {
                    iterated = derive_gen(&iterated, dir, n);
                }
                if gen_normal_form(&direct) != gen_normal_form(&iterated) {
                    return Err(format!("mismatch at p = {p}"));
                }
            }
        }
        let dg = || gamma_jet(vec![1]);
        let d2g = || gamma_jet(vec![2]);
        let d3g = || gamma_jet(vec![3]);
        let p2 = MultiIndex::from_entries(vec![2]);
        let p3 = MultiIndex::from_entries(vec![3]);
        let expected = [
            (p2.clone(), 1, dg().pow(2)),
            (p2, 0, d2g()),
            (p3.clone(), 2, dg().pow(3)),
            (p3.clone(), 1, (dg() * d2g()).scale(&rat(3, 1))),
            (p3, 0, d3g()),
        ];
        for (p, l, want) in expected {
            let got = k_operator(&p, l).map_err(|e| e.to_string())?;
            if !expr_equal(&got.normalized(), &want.normalized()) {
                return Err(format!("K for p = {p}, l = {l}: got {got}"));
            }
        }
        Ok(())
    });
}

fn bare_gamma() -> Atom {
    Atom::GammaJet(MultiIndex::zero(2))
}

fn random_smooth(rng: &mut impl Rng) -> Expr {
    let pool = [
        bare_gamma(),
        Atom::GammaJet(MultiIndex::from_entries(vec![0, 1])),
        Atom::unknown(0, 2),
        Atom::Coordinate(1),
    ];
    let mut monos = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let coeff = rat(rng.random_range(-4..=4i64), rng.random_range(1..=3i64));
        if coeff == rat(0, 1) {
            continue;
        }
        let mut factors = Vec::new();
        for _ in 0..rng.random_range(0..=2) {
            factors.push((pool[rng.random_range(0..pool.len())].clone(), rng.random_range(1..=2)));
        }
        monos.push(Monomial::new(coeff, factors));
    }
    Expr::from_monomials(monos)
}

fn random_gen(rng: &mut impl Rng) -> GenExpr {
    let atoms = [
        DistAtom::One,
        DistAtom::Heaviside,
        DistAtom::DiracDeriv(0),
        DistAtom::DiracDeriv(1),
        DistAtom::DiracDeriv(2),
        DistAtom::DiracDeriv(3),
    ];
    let mut g = GenExpr::zero();
    for _ in 0..rng.random_range(1..=3) {
        g = g + GenExpr::single(atoms[rng.random_range(0..atoms.len())].clone(), random_smooth(rng));
    }
    g
}

/// Single-site rewriter for γ·D^l δ = −l·D^{l−1} δ (γ·δ = 0), applied at a
/// randomly chosen site; used to confirm the sweep reducer is order-independent.
fn rewrite_random_site(g: &GenExpr, rng: &mut impl Rng) -> Option<GenExpr> {
    let bare = bare_gamma();
    let mut sites = Vec::new();
    for (atom, coeff) in g.parts() {
        let DistAtom::DiracDeriv(l) = atom else { continue };
        for m in coeff.monomials() {
            if m.factors().iter().any(|(a, _)| *a == bare) {
                sites.push((*l, m.clone()));
            }
        }
    }
    if sites.is_empty() {
        return None;
    }
    let (l, m) = sites[rng.random_range(0..sites.len())].clone();
    let removed = GenExpr::single(DistAtom::DiracDeriv(l), Expr::from_monomials(vec![m.clone()]));
    let replacement = if l == 0 {
        GenExpr::zero()
    } else {
        let stripped: Vec<(Atom, u32)> = m
            .factors()
            .iter()
            .map(|(a, e)| (a.clone(), if *a == bare { e - 1 } else { *e }))
            .collect();
        GenExpr::single(
            DistAtom::DiracDeriv(l - 1),
            Expr::from_monomials(vec![Monomial::new(m.coeff.clone(), stripped)])
                .scale(&rat(-(l as i64), 1)),
        )
    };
    Some(&g.clone() - &removed + replacement)
}

#[test]
fn acceptance_4_reduction_rules() {
    criterion(4, "gamma-delta reduction", Duration::from_secs(10), || {
        let gamma = Expr::atom(bare_gamma());
        let g = GenExpr::single(DistAtom::DiracDeriv(0), gamma.clone());
        if !reduce_gamma_delta(&g).is_zero() {
            return Err("gamma * delta did not vanish".to_string());
        }
        for l in 0..=3u32 {
            let g = GenExpr::single(DistAtom::DiracDeriv(l + 1), gamma.clone());
            let want =
                GenExpr::single(DistAtom::DiracDeriv(l), Expr::constant(rat(-((l + 1) as i64), 1)));
            if reduce_gamma_delta(&g) != want {
                return Err(format!("gamma * D^{} delta reduced wrongly", l + 1));
            }
        }
        let g = GenExpr::single(DistAtom::DiracDeriv(2), gamma.pow(2));
        let want = GenExpr::single(DistAtom::DiracDeriv(0), Expr::constant(rat(2, 1)));
        if reduce_gamma_delta(&g) != want {
            return Err("gamma^2 * D^2 delta reduced wrongly".to_string());
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..1000 {
            let g = random_gen(&mut rng);
            let reduced = reduce_gamma_delta(&g);
            if gen_normal_form(&reduced) != gen_normal_form(&reduce_gamma_delta(&reduced)) {
                return Err(format!("case {case}: reduction is not idempotent"));
            }
            let mut cur = g.clone();
            let mut steps = 0;
            while let Some(next) = rewrite_random_site(&cur, &mut rng) {
                cur = next;
                steps += 1;
                if steps > 4096 {
                    return Err(format!("case {case}: rewriting did not terminate"));
                }
            }
            if gen_normal_form(&cur) != gen_normal_form(&reduced) {
                return Err(format!("case {case}: random-order result differs"));
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_5_verdicts_and_witnesses() {
    criterion(5, "verdicts and witnesses", Duration::from_secs(5), || {
        for text in [
            include_str!("data/burgers.pde"),
            include_str!("data/viscous_burgers.pde"),
            include_str!("data/mhd_toy.pde"),
            include_str!("data/transport.pde"),
            include_str!("data/heat_jump.pde"),
        ] {
            let sys = load(text)?;
            let report = resoluble_decompose(&sys);
            let cert = report
                .certificate
                .as_ref()
                .ok_or_else(|| format!("{} must be resoluble", sys.name))?;
            if !verify_certificate(&sys, cert) {
                return Err(format!("{}: certificate does not verify", sys.name));
            }
        }
        let omega_x = Atom::OmegaJet(MultiIndex::from_entries(vec![0, 1]));
        let omega = Atom::OmegaJet(MultiIndex::zero(2));
        let omega_xx = Atom::OmegaJet(MultiIndex::from_entries(vec![0, 2]));
        let cases = [
            (include_str!("data/not_resoluble_grad_sq.pde"), vec![(omega_x, 2u32)]),
            (include_str!("data/not_resoluble_ulap.pde"), vec![(omega, 1), (omega_xx, 1)]),
        ];
        for (text, want) in cases {
            let sys = load(text)?;
            for order in [EliminationOrder::Standard, EliminationOrder::Reversed] {
                let report = resoluble_decompose_with(&sys, order);
                let Verdict::NotResoluble { witness } = &report.verdicts[0] else {
                    return Err(format!("{} must not be resoluble", sys.name));
                };
                if *witness != want {
                    return Err(format!("{}: witness {witness:?} under {order:?}", sys.name));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_6_random_mh_systems_convert() {
    criterion(6, "random MH systems decompose", Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2026);
        for case in 0..100 {
            let sys = random_mh_system(&mut rng);
            let mh = MHCertificate::from_system(&sys)
                .map_err(|e| format!("case {case}: {e}"))?;
            if !mh_verify(&sys, &mh) {
                return Err(format!("case {case}: generated MH shape does not verify"));
            }
            let cert = mh_to_resoluble(&sys, &mh).map_err(|e| format!("case {case}: {e}"))?;
            if !verify_certificate(&sys, &cert) {
                return Err(format!("case {case}: converted certificate fails"));
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_7_mollified_burgers_verdicts() {
    criterion(7, "mollified shock verdicts", Duration::from_secs(30), || {
        let widths = vec![0.1, 0.05, 0.025];
        let mollifier = MollifierSpec::new(widths.clone()).map_err(|e| e.to_string())?;
        let grid_spec = GridSpec::new(24).map_err(|e| e.to_string())?;

        let sys = load(include_str!("data/burgers.pde"))?;
        let scenario = Scenario::from_system(&sys).map_err(|e| e.to_string())?;
        for &eps in &widths {
            let grid = build_grid(&scenario, &grid_spec, eps).map_err(|e| e.to_string())?;
            if grid.axes.iter().any(|a| a.len() > 400) {
                return Err(format!("grid exceeds 400 points per axis at eps {eps}"));
            }
        }
        let report =
            convergence_study(&scenario, &mollifier, &grid_spec, 0).map_err(|e| e.to_string())?;
        if report.verdict != NumVerdict::Consistent {
            return Err(format!("correct speed gave {:?}", report.verdict));
        }

        let sys = load(include_str!("data/burgers_wrong_speed.pde"))?;
        let scenario = Scenario::from_system(&sys).map_err(|e| e.to_string())?;
        let report =
            convergence_study(&scenario, &mollifier, &grid_spec, 0).map_err(|e| e.to_string())?;
        if report.verdict != NumVerdict::Violated {
            return Err(format!("wrong speed gave {:?}", report.verdict));
        }
        // Weak limit of the residual against φ is |s - 1/2|·|Δu|·∫ φ(t, s t) dt.
        for (i, f) in report.test_functions.iter().enumerate() {
            if !f.straddles {
                continue;
            }
            let steps = 20_000;
            let mut integral = 0.0;
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
                integral += w * f.eval(&[t, 0.6 * t]) / steps as f64;
            }
            let predicted = 0.1 * integral;
            let got = report.plateau[i];
            if (got - predicted).abs() > 0.3 * predicted {
                return Err(format!(
                    "plateau {got:.4e} outside 30% of predicted {predicted:.4e} for phi {i}"
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_8_no_jump_trivializes() {
    criterion(8, "no-jump scenario", Duration::from_secs(15), || {
        let sys = load(include_str!("data/burgers_nojump.pde"))?;
        let report = resoluble_decompose(&sys);
        let cert = report.certificate.as_ref().ok_or("must be resoluble")?;
        let conds = jcond_core::junction::junction_from_resoluble_with(
            &sys,
            cert,
            &TraceBinding::no_jump(&sys),
        )
        .map_err(|e| e.to_string())?;
        let conds = restrict_to_gamma(&simplify_with_classical(&conds, &sys));
        if !conds.is_trivial() {
            return Err("no-jump conditions are not empty".to_string());
        }
        let scenario = Scenario::from_system(&sys).map_err(|e| e.to_string())?;
        let mollifier = MollifierSpec::new(vec![0.1, 0.05, 0.025]).map_err(|e| e.to_string())?;
        let grid_spec = GridSpec::new(24).map_err(|e| e.to_string())?;
        let report =
            convergence_study(&scenario, &mollifier, &grid_spec, 0).map_err(|e| e.to_string())?;
        for sample in &report.samples {
            for &r in &sample.magnitude {
                if r > 1e-6 {
                    return Err(format!("residual {r:.3e} above 1e-6 at eps {}", sample.eps));
                }
            }
        }
        if report.verdict != NumVerdict::Consistent {
            return Err(format!("verdict {:?}", report.verdict));
        }
        Ok(())
    });
}
