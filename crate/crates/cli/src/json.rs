//! The `jcond/1` JSON document: fixed key order, deterministic content,
//! coefficient expressions as reparseable DSL strings.

use jcond_core::classify::{render_omega_monomial, CertEntry, ResolubleCertificate, Verdict};
use jcond_core::dist::DistAtom;
use jcond_core::dsl::{render_expr_grouped, PDESystem};
use jcond_core::junction::{ConditionStatus, JunctionConditionSet};
use jcond_core::numcheck::{NumVerdict, ResidualReport};
use serde::Serialize;

#[derive(Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub system: String,
    pub verdicts: Vec<VerdictJson>,
    pub certificates: Vec<CertificateJson>,
    pub conditions: Vec<ConditionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportJson>,
}

impl Document {
    pub fn new(sys: &PDESystem) -> Document {
        Document {
            schema: "jcond/1",
            system: sys.name.clone(),
            verdicts: Vec::new(),
            certificates: Vec::new(),
            conditions: Vec::new(),
            report: None,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
pub struct VerdictJson {
    pub beta: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

pub fn verdicts_json(sys: &PDESystem, verdicts: &[Verdict]) -> Vec<VerdictJson> {
    verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Verdict::Resoluble => {
                VerdictJson { beta: i + 1, status: "resoluble", witness: None }
            }
            Verdict::NotResoluble { witness } => VerdictJson {
                beta: i + 1,
                status: "not_resoluble",
                witness: Some(render_omega_monomial(witness, sys)),
            },
        })
        .collect()
}

#[derive(Serialize)]
pub struct CertificateJson {
    pub beta: usize,
    pub entries: Vec<CertEntryJson>,
}

#[derive(Serialize)]
pub struct CertEntryJson {
    pub multiplier: String,
    pub p: Vec<u32>,
    pub l: u32,
}

pub fn certificates_json(sys: &PDESystem, cert: &ResolubleCertificate) -> Vec<CertificateJson> {
    cert.per_equation
        .iter()
        .enumerate()
        .map(|(i, entries)| CertificateJson {
            beta: i + 1,
            entries: entries
                .iter()
                .map(|e: &CertEntry| CertEntryJson {
                    multiplier: render_expr_grouped(&e.multiplier, sys),
                    p: e.p.entries().to_vec(),
                    l: e.l,
                })
                .collect(),
        })
        .collect()
}

#[derive(Serialize)]
pub struct ConditionJson {
    pub beta: usize,
    pub atom: &'static str,
    pub order: u32,
    pub coefficient: String,
    pub locality: &'static str,
    pub status: &'static str,
}

fn atom_parts(atom: &DistAtom) -> (&'static str, u32) {
    match atom {
        DistAtom::One => ("1", 0),
        DistAtom::Heaviside => ("H", 0),
        DistAtom::DiracDeriv(l) => ("delta", *l),
    }
}

/// δ-family first (ascending order), then Heaviside; required entries before
/// hypothesis entries; equations in order.
pub fn conditions_json(sys: &PDESystem, conds: &JunctionConditionSet) -> Vec<ConditionJson> {
    let mut out = Vec::new();
    for (i, ec) in conds.per_equation.iter().enumerate() {
        let mut entries = ec.entries();
        entries.sort_by_key(|e| {
            let family = match (&e.atom, e.status) {
                (DistAtom::DiracDeriv(l), _) => (0u8, *l),
                (DistAtom::Heaviside, ConditionStatus::Required) => (1, 0),
                (DistAtom::Heaviside, ConditionStatus::SatisfiedByHypothesis) => (2, 0),
                (DistAtom::One, _) => (3, 0),
            };
            family
        });
        for e in entries {
            let (atom, order) = atom_parts(&e.atom);
            out.push(ConditionJson {
                beta: i + 1,
                atom,
                order,
                coefficient: render_expr_grouped(&e.coefficient, sys),
                locality: jcond_core::junction::locality_label(&e.atom),
                status: match e.status {
                    ConditionStatus::Required => "required",
                    ConditionStatus::SatisfiedByHypothesis => "satisfied_by_hypothesis",
                },
            });
        }
    }
    out
}

#[derive(Serialize)]
pub struct ReportJson {
    pub eps: Vec<f64>,
    pub grid: usize,
    pub seed: u64,
    pub verdict: &'static str,
    pub test_functions: Vec<TestFunctionJson>,
    pub gamma_points: Vec<Vec<f64>>,
    pub residuals: Vec<ResidualJson>,
    pub rates: Vec<Option<f64>>,
    pub plateau: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_max_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions_hold_numerically: Option<bool>,
}

#[derive(Serialize)]
pub struct TestFunctionJson {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub straddles: bool,
}

#[derive(Serialize)]
pub struct ResidualJson {
    pub eps: f64,
    pub magnitude: Vec<f64>,
    pub per_equation: Vec<Vec<f64>>,
}

pub fn verdict_str(v: NumVerdict) -> &'static str {
    match v {
        NumVerdict::Consistent => "consistent",
        NumVerdict::Violated => "violated",
        NumVerdict::Inconclusive => "inconclusive",
    }
}

pub fn report_json(report: &ResidualReport, seed: u64) -> ReportJson {
    ReportJson {
        eps: report.samples.iter().map(|s| s.eps).collect(),
        grid: report.base_points,
        seed,
        verdict: verdict_str(report.verdict),
        test_functions: report
            .test_functions
            .iter()
            .map(|f| TestFunctionJson {
                center: f.center.clone(),
                radii: f.radii.clone(),
                straddles: f.straddles,
            })
            .collect(),
        gamma_points: report.gamma_points.clone(),
        residuals: report
            .samples
            .iter()
            .map(|s| ResidualJson {
                eps: s.eps,
                magnitude: s.magnitude.clone(),
                per_equation: s.per_equation.clone(),
            })
            .collect(),
        rates: report
            .rates
            .iter()
            .map(|r| if r.is_finite() { Some(*r) } else { None })
            .collect(),
        plateau: report.plateau.clone(),
        condition_max_abs: None,
        conditions_hold_numerically: None,
    }
}
