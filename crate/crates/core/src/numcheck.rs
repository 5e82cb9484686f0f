//! Numerical validation of junction conditions by mollification.
//!
//! The jump candidate U = U₋ + (U₊−U₋)H_γ is smoothed with a tanh profile of
//! width ε, the original operators are evaluated on a grid by finite
//! differences, and weak residuals ∫(T_β(U_ε) − f_β)φ are tracked as ε
//! shrinks. Residuals vanish with ε exactly when the junction conditions hold
//! on Γ; the study classifies the decay as consistent / violated /
//! inconclusive under fixed, pinned thresholds.

use crate::dist::DistAtom;
use crate::dsl::PDESystem;
use crate::expr::{Atom, Expr, MultiIndex, Side};
use crate::junction::JunctionConditionSet;
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Quadrature tolerance: residuals below this are numerical zero.
pub const QUAD_TOL: f64 = 1e-6;
/// Plateau floor: 10 × quadrature tolerance.
pub const NOISE_FLOOR: f64 = 1e-5;
/// Minimum shrink factor per ε-halving for a "consistent" verdict.
pub const SHRINK_FACTOR: f64 = 1.5;
/// Shrink factor below which the tail counts as a plateau.
pub const PLATEAU_FACTOR: f64 = 1.2;
/// Mollification band half-width, in units of ε.
pub const BAND_HALF_WIDTH: f64 = 6.0;
/// In-band grid spacing target: ε / REFINE_DIVISOR.
pub const REFINE_DIVISOR: f64 = 8.0;
/// Hard in-band spacing limit: ε / COARSE_LIMIT.
pub const COARSE_LIMIT: f64 = 4.0;
/// Junction-condition values below this (at sampled Γ points) count as zero.
pub const CONDITION_TOL: f64 = 1e-8;
/// Gradient spot-check threshold for grad γ ≠ 0.
pub const GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("no closed-form gamma declared")]
    MissingGamma,
    #[error("no closed-form {} trace declared for unknown {alpha}", side.tag())]
    MissingTrace { side: Side, alpha: usize },
    #[error("grad gamma degenerate at a sampled Gamma point {point:?}")]
    GradientDegenerate { point: Vec<f64> },
    #[error("in-band grid spacing {spacing} exceeds the limit {limit} for eps {eps}")]
    GridTooCoarse { spacing: f64, limit: f64, eps: f64 },
    #[error("atom {atom:?} has no numerical value in this scenario")]
    UnboundAtom { atom: Atom },
    #[error("could not place a test function {kind} Gamma inside the box")]
    PlacementFailed { kind: &'static str },
    #[error("grid must have at least 8 points per axis, got {0}")]
    TooFewPoints(usize),
    #[error("mollifier widths must be positive and strictly descending")]
    BadWidths,
}

/// Evaluate a closed-form expression through an atom resolver.
pub fn eval_expr(
    e: &Expr,
    resolve: &mut dyn FnMut(&Atom) -> Result<f64, NumError>,
) -> Result<f64, NumError> {
    let mut acc = 0.0;
    for m in e.monomials() {
        let mut v = m.coeff.to_f64().expect("rational coefficients fit in f64");
        for (atom, exp) in m.factors() {
            v *= resolve(atom)?.powi(*exp as i32);
        }
        acc += v;
    }
    Ok(acc)
}

fn eval_in_coords(e: &Expr, x: &[f64]) -> Result<f64, NumError> {
    eval_expr(e, &mut |atom| match atom {
        Atom::Coordinate(i) => Ok(x[*i]),
        other => Err(NumError::UnboundAtom { atom: other.clone() }),
    })
}

/// ½(1 + tanh s): smooth, symmetric, saturating sigmoid.
pub fn mollifier_profile(s: f64) -> f64 {
    0.5 * (1.0 + s.tanh())
}

/// Descending positive mollification widths.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierSpec {
    widths: Vec<f64>,
}

impl MollifierSpec {
    pub fn new(widths: Vec<f64>) -> Result<Self, NumError> {
        if widths.is_empty() || widths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(NumError::BadWidths);
        }
        if widths.windows(2).any(|w| w[1] >= w[0]) {
            return Err(NumError::BadWidths);
        }
        Ok(MollifierSpec { widths })
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn max_width(&self) -> f64 {
        self.widths[0]
    }
}

/// Grid construction parameters; the actual axes are built per ε.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub base_points: usize,
    /// Refine the mollification band to spacing ε/REFINE_DIVISOR.
    pub refine: bool,
    /// In-band spacing target divisor (ε/divisor); 8 unless studying meshes.
    pub refine_divisor: f64,
}

impl GridSpec {
    pub fn new(base_points: usize) -> Result<Self, NumError> {
        if base_points < 8 {
            return Err(NumError::TooFewPoints(base_points));
        }
        Ok(GridSpec { base_points, refine: true, refine_divisor: REFINE_DIVISOR })
    }
}

/// A closed-form jump scenario: γ, both one-sided traces, and the box.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sys: PDESystem,
    pub gamma: Expr,
    pub gamma_grad: Vec<Expr>,
    pub traces_minus: Vec<Expr>,
    pub traces_plus: Vec<Expr>,
    pub box_bounds: Vec<(f64, f64)>,
}

impl Scenario {
    pub fn from_system(sys: &PDESystem) -> Result<Self, NumError> {
        let gamma = sys.gamma.closed_form.clone().ok_or(NumError::MissingGamma)?;
        let n = sys.dim;
        let mut traces_minus = Vec::new();
        let mut traces_plus = Vec::new();
        for alpha in 0..sys.num_unknowns() {
            traces_minus.push(
                sys.trace_expr(Side::Minus, alpha)
                    .cloned()
                    .ok_or(NumError::MissingTrace { side: Side::Minus, alpha })?,
            );
            traces_plus.push(
                sys.trace_expr(Side::Plus, alpha)
                    .cloned()
                    .ok_or(NumError::MissingTrace { side: Side::Plus, alpha })?,
            );
        }
        let box_bounds = match &sys.domain_box {
            Some(b) => b
                .iter()
                .map(|(lo, hi)| {
                    (lo.to_f64().expect("box bound fits in f64"), hi.to_f64().expect("box bound"))
                })
                .collect(),
            None => vec![(0.0, 1.0); n],
        };
        let gamma_grad = (0..n).map(|d| gamma.total_derivative(d)).collect();
        Ok(Scenario { sys: sys.clone(), gamma, gamma_grad, traces_minus, traces_plus, box_bounds })
    }

    pub fn gamma_at(&self, x: &[f64]) -> f64 {
        eval_in_coords(&self.gamma, x).expect("gamma is closed-form in the coordinates")
    }

    pub fn grad_gamma_at(&self, x: &[f64]) -> Vec<f64> {
        self.gamma_grad
            .iter()
            .map(|g| eval_in_coords(g, x).expect("gamma gradient is closed-form"))
            .collect()
    }

    fn check_gradient(&self, x: &[f64]) -> Result<(), NumError> {
        let g = self.grad_gamma_at(x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < GRAD_TOL {
            return Err(NumError::GradientDegenerate { point: x.to_vec() });
        }
        Ok(())
    }
}

/// A tensor grid with per-axis coordinates and trapezoid weights.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl Grid {
    fn from_axes(axes: Vec<Vec<f64>>) -> Grid {
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut strides = vec![1usize; shape.len()];
        for d in (0..shape.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * shape[d + 1];
        }
        let weights = axes
            .iter()
            .map(|xs| {
                let m = xs.len();
                (0..m)
                    .map(|i| {
                        let left = if i == 0 { xs[0] } else { xs[i - 1] };
                        let right = if i + 1 == m { xs[m - 1] } else { xs[i + 1] };
                        (right - left) / 2.0
                    })
                    .collect()
            })
            .collect();
        Grid { axes, shape, strides, weights }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    fn axis_index(&self, flat: usize, d: usize) -> usize {
        (flat / self.strides[d]) % self.shape[d]
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        (0..self.dim()).map(|d| self.axes[d][self.axis_index(flat, d)]).collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        (0..self.dim()).map(|d| self.weights[d][self.axis_index(flat, d)]).product()
    }

    /// 2nd-order first derivative along axis `d` (nonuniform central stencil,
    /// one-sided at the ends).
    pub fn axis_derivative(&self, f: &[f64], d: usize) -> Vec<f64> {
        let m = self.shape[d];
        let s = self.strides[d];
        let xs = &self.axes[d];
        let mut out = vec![0.0; f.len()];
        for flat in 0..f.len() {
            let i = self.axis_index(flat, d);
            out[flat] = if i == 0 {
                let (h0, h1) = (xs[1] - xs[0], xs[2] - xs[1]);
                let (f0, f1, f2) = (f[flat], f[flat + s], f[flat + 2 * s]);
                -f0 * (2.0 * h0 + h1) / (h0 * (h0 + h1)) + f1 * (h0 + h1) / (h0 * h1)
                    - f2 * h0 / (h1 * (h0 + h1))
            } else if i + 1 == m {
                let (h0, h1) = (xs[m - 1] - xs[m - 2], xs[m - 2] - xs[m - 3]);
                let (f0, f1, f2) = (f[flat], f[flat - s], f[flat - 2 * s]);
                f0 * (2.0 * h0 + h1) / (h0 * (h0 + h1)) - f1 * (h0 + h1) / (h0 * h1)
                    + f2 * h0 / (h1 * (h0 + h1))
            } else {
                let (hl, hr) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let (fl, f0, fr) = (f[flat - s], f[flat], f[flat + s]);
                (fr * hl * hl - fl * hr * hr + f0 * (hr * hr - hl * hl))
                    / (hl * hr * (hl + hr))
            };
        }
        out
    }
}

/// Build the tensor grid for width ε: uniform base axes, then each base
/// interval whose slab meets the band |γ| ≤ BAND_HALF_WIDTH·ε is subdivided to
/// spacing ≤ ε/refine_divisor. Fails if an in-band spacing exceeds ε/COARSE_LIMIT.
pub fn build_grid(scenario: &Scenario, spec: &GridSpec, eps: f64) -> Result<Grid, NumError> {
    let n = scenario.box_bounds.len();
    let base: Vec<Vec<f64>> = scenario
        .box_bounds
        .iter()
        .map(|(lo, hi)| {
            (0..spec.base_points)
                .map(|i| lo + (hi - lo) * i as f64 / (spec.base_points - 1) as f64)
                .collect()
        })
        .collect();
    let base_grid = Grid::from_axes(base.clone());

    // γ moves by at most grad_max · Σ|Δx_d| between a grid node and the
    // nearest sample below, so a slack of that reach keeps the marking
    // conservative without over-widening the refined region.
    let mut grad_max = 0.0f64;
    for flat in 0..base_grid.len() {
        let g = scenario.grad_gamma_at(&base_grid.coords(flat));
        grad_max = grad_max.max(g.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let band = BAND_HALF_WIDTH * eps;
    const HOT_SAMPLES: usize = 4;

    let mut axes = Vec::new();
    for d in 0..n {
        let xs = &base[d];
        let h_d = xs[1] - xs[0];
        let cross: f64 = (0..n)
            .filter(|dd| *dd != d)
            .map(|dd| (base[dd][1] - base[dd][0]) / 2.0)
            .sum();
        let reach = h_d / (2.0 * HOT_SAMPLES as f64) + cross;
        let slack = band + 1.25 * grad_max * reach;
        // Which base intervals on this axis meet the band in some slab?
        let mut hot = vec![false; xs.len() - 1];
        for flat in 0..base_grid.len() {
            let i = base_grid.axis_index(flat, d);
            if i >= hot.len() || hot[i] {
                continue;
            }
            let mut x = base_grid.coords(flat);
            for k in 0..=HOT_SAMPLES {
                x[d] = xs[i] + h_d * k as f64 / HOT_SAMPLES as f64;
                if scenario.gamma_at(&x).abs() <= slack {
                    hot[i] = true;
                    break;
                }
            }
        }
        let mut axis = vec![xs[0]];
        for (i, &is_hot) in hot.iter().enumerate() {
            let (a, b) = (xs[i], xs[i + 1]);
            let pieces = if spec.refine && is_hot {
                ((b - a) * spec.refine_divisor / eps).ceil().max(1.0) as usize
            } else {
                1
            };
            for k in 1..=pieces {
                axis.push(a + (b - a) * k as f64 / pieces as f64);
            }
        }
        axes.push(axis);
    }
    let grid = Grid::from_axes(axes);

    // Final honesty check: the realized in-band spacing.
    let limit = eps / COARSE_LIMIT;
    for flat in 0..grid.len() {
        if scenario.gamma_at(&grid.coords(flat)).abs() > band {
            continue;
        }
        for d in 0..n {
            let i = grid.axis_index(flat, d);
            let xs = &grid.axes[d];
            let spacing = if i + 1 < xs.len() { xs[i + 1] - xs[i] } else { xs[i] - xs[i - 1] };
            if spacing > limit {
                return Err(NumError::GridTooCoarse { spacing, limit, eps });
            }
        }
    }
    Ok(grid)
}

/// Sampled mollified field per unknown: U_ε = U₋ + (U₊−U₋)·profile(γ/ε).
/// Spot-checks grad γ ≠ 0 at near-Γ nodes.
pub fn mollified_field(
    scenario: &Scenario,
    eps: f64,
    grid: &Grid,
) -> Result<Vec<Vec<f64>>, NumError> {
    let mut fields = Vec::new();
    let mut gamma_vals = vec![0.0; grid.len()];
    for (flat, val) in gamma_vals.iter_mut().enumerate() {
        let x = grid.coords(flat);
        *val = scenario.gamma_at(&x);
        if val.abs() <= eps {
            scenario.check_gradient(&x)?;
        }
    }
    for alpha in 0..scenario.sys.num_unknowns() {
        let mut f = vec![0.0; grid.len()];
        for (flat, out) in f.iter_mut().enumerate() {
            let x = grid.coords(flat);
            let minus = eval_in_coords(&scenario.traces_minus[alpha], &x)?;
            let plus = eval_in_coords(&scenario.traces_plus[alpha], &x)?;
            *out = minus + (plus - minus) * mollifier_profile(gamma_vals[flat] / eps);
        }
        fields.push(f);
    }
    Ok(fields)
}

/// One compactly supported polynomial bump ∏ᵢ(1 − ((xᵢ−cᵢ)/rᵢ)²)³ clipped at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSpec {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub straddles: bool,
}

impl TestFunctionSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for (d, xi) in x.iter().enumerate() {
            let t = (xi - self.center[d]) / self.radii[d];
            let b = (1.0 - t * t).max(0.0);
            v *= b * b * b;
        }
        v
    }
}

/// Test-function placement: 5 bumps straddling Γ, 2 bumps clear of the band.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub functions: Vec<TestFunctionSpec>,
    /// Bisected on-Γ points (one per straddling bump), for condition checks.
    pub gamma_points: Vec<Vec<f64>>,
}

fn random_point(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect()
}

/// Sample γ over the support lattice (3 points per axis) of a bump.
fn gamma_range_on_support(
    scenario: &Scenario,
    spec: &TestFunctionSpec,
) -> (f64, f64) {
    let n = spec.center.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n)
            .map(|d| spec.center[d] + (idx[d] as f64 - 1.0) * spec.radii[d])
            .collect();
        let g = scenario.gamma_at(&x);
        lo = lo.min(g);
        hi = hi.max(g);
        let mut d = 0;
        loop {
            if d == n {
                return (lo, hi);
            }
            idx[d] += 1;
            if idx[d] < 3 {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn place_test_functions(
    scenario: &Scenario,
    eps_max: f64,
    seed: u64,
) -> Result<Placement, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = &scenario.box_bounds;
    let n = bounds.len();
    let extents: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let mut functions = Vec::new();
    let mut gamma_points = Vec::new();

    'straddle: for _ in 0..5 {
        for _ in 0..2000 {
            let a = random_point(&mut rng, bounds);
            let b = random_point(&mut rng, bounds);
            let (ga, gb) = (scenario.gamma_at(&a), scenario.gamma_at(&b));
            if ga == 0.0 || gb == 0.0 || ga.signum() == gb.signum() {
                continue;
            }
            // bisect to Γ
            let (mut lo, mut hi) = if ga < 0.0 { (a, b) } else { (b, a) };
            for _ in 0..80 {
                let mid: Vec<f64> =
                    lo.iter().zip(&hi).map(|(p, q)| (p + q) / 2.0).collect();
                if scenario.gamma_at(&mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let on_gamma: Vec<f64> = lo.iter().zip(&hi).map(|(p, q)| (p + q) / 2.0).collect();
            scenario.check_gradient(&on_gamma)?;

            let mut center = on_gamma.clone();
            let mut radii = vec![0.0; n];
            let mut ok = true;
            for d in 0..n {
                let r = (0.08 + 0.12 * rng.random_range(0.0..1.0)) * extents[d];
                center[d] += (rng.random_range(0.0..1.0) - 0.5) * 0.5 * r;
                let room = (center[d] - bounds[d].0).min(bounds[d].1 - center[d]) * 0.95;
                radii[d] = r.min(room);
                if radii[d] < 0.02 * extents[d] {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let spec = TestFunctionSpec { center, radii, straddles: true };
            let (glo, ghi) = gamma_range_on_support(scenario, &spec);
            if glo < -eps_max && ghi > eps_max {
                functions.push(spec);
                gamma_points.push(on_gamma);
                continue 'straddle;
            }
        }
        return Err(NumError::PlacementFailed { kind: "straddling" });
    }

    'away: for _ in 0..2 {
        for _ in 0..2000 {
            let center = random_point(&mut rng, bounds);
            let mut radii = vec![0.0; n];
            let mut ok = true;
            for d in 0..n {
                let r = (0.05 + 0.08 * rng.random_range(0.0..1.0)) * extents[d];
                let room = (center[d] - bounds[d].0).min(bounds[d].1 - center[d]) * 0.95;
                radii[d] = r.min(room);
                if radii[d] < 0.02 * extents[d] {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let spec = TestFunctionSpec { center, radii, straddles: false };
            let (glo, ghi) = gamma_range_on_support(scenario, &spec);
            let clearance = (BAND_HALF_WIDTH + 2.0) * eps_max;
            if glo.signum() == ghi.signum() && glo.abs().min(ghi.abs()) > clearance {
                functions.push(spec);
                continue 'away;
            }
        }
        return Err(NumError::PlacementFailed { kind: "away from" });
    }

    Ok(Placement { functions, gamma_points })
}

fn needed_jets(sys: &PDESystem) -> Vec<(usize, MultiIndex)> {
    let mut out: Vec<(usize, MultiIndex)> = Vec::new();
    for eq in &sys.equations {
        for atom in eq.lhs.atoms() {
            if let Atom::UnknownJet { alpha, deriv } = atom {
                let key = (*alpha, deriv.clone());
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        }
    }
    out
}

fn jet_arrays(
    sys: &PDESystem,
    grid: &Grid,
    fields: &[Vec<f64>],
) -> BTreeMap<(usize, Vec<u32>), Vec<f64>> {
    let mut cache: BTreeMap<(usize, Vec<u32>), Vec<f64>> = BTreeMap::new();
    fn get(
        cache: &mut BTreeMap<(usize, Vec<u32>), Vec<f64>>,
        grid: &Grid,
        fields: &[Vec<f64>],
        alpha: usize,
        p: &MultiIndex,
    ) -> Vec<f64> {
        let key = (alpha, p.entries().to_vec());
        if let Some(v) = cache.get(&key) {
            return v.clone();
        }
        let v = match p.directions().last() {
            None => fields[alpha].clone(),
            Some(d) => {
                let q = p.lower(d).expect("direction taken from the index");
                let lower = get(cache, grid, fields, alpha, &q);
                grid.axis_derivative(&lower, d)
            }
        };
        cache.insert(key, v.clone());
        v
    }
    for (alpha, p) in needed_jets(sys) {
        get(&mut cache, grid, fields, alpha, &p);
    }
    cache
}

/// Weak residuals ∫(T_β(U_ε) − f_β)·φ per test function and equation:
/// result[φ][β].
pub fn weak_residual(
    scenario: &Scenario,
    eps: f64,
    grid: &Grid,
    functions: &[TestFunctionSpec],
) -> Result<Vec<Vec<f64>>, NumError> {
    let sys = &scenario.sys;
    let fields = mollified_field(scenario, eps, grid)?;
    let jets = jet_arrays(sys, grid, &fields);

    let mut residuals = vec![vec![0.0; sys.equations.len()]; functions.len()];
    for flat in 0..grid.len() {
        let x = grid.coords(flat);
        let phis: Vec<f64> = functions.iter().map(|f| f.eval(&x)).collect();
        if phis.iter().all(|v| *v == 0.0) {
            continue;
        }
        let w = grid.weight(flat);
        for (bi, eq) in sys.equations.iter().enumerate() {
            let lhs = eval_expr(&eq.lhs, &mut |atom| match atom {
                Atom::Coordinate(i) => Ok(x[*i]),
                Atom::UnknownJet { alpha, deriv } => Ok(jets[&(*alpha, deriv.entries().to_vec())][flat]),
                other => Err(NumError::UnboundAtom { atom: other.clone() }),
            })?;
            let rhs = eval_in_coords(&eq.rhs, &x)?;
            let val = (lhs - rhs) * w;
            for (fi, phi) in phis.iter().enumerate() {
                residuals[fi][bi] += val * phi;
            }
        }
    }
    Ok(residuals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumVerdict {
    Consistent,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSample {
    pub eps: f64,
    /// result[φ][β], signed.
    pub per_equation: Vec<Vec<f64>>,
    /// max |residual| over equations, per φ.
    pub magnitude: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub samples: Vec<ResidualSample>,
    pub test_functions: Vec<TestFunctionSpec>,
    pub gamma_points: Vec<Vec<f64>>,
    pub base_points: usize,
    /// least-squares slope of log|residual| vs log ε, per φ (NaN at floor).
    pub rates: Vec<f64>,
    /// |residual| at the smallest ε, per φ.
    pub plateau: Vec<f64>,
    pub verdict: NumVerdict,
}

fn fit_rate(eps: &[f64], rs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(rs)
        .filter(|(_, r)| **r > 0.0)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy): (f64, f64) =
        pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Shrink factor normalized to one ε-halving.
fn halving_factor(e0: f64, r0: f64, e1: f64, r1: f64) -> f64 {
    if r1 <= QUAD_TOL {
        return f64::INFINITY;
    }
    let halvings = (e0 / e1).log2();
    (r0 / r1).powf(1.0 / halvings)
}

pub fn convergence_study(
    scenario: &Scenario,
    mollifier: &MollifierSpec,
    grid_spec: &GridSpec,
    seed: u64,
) -> Result<ResidualReport, NumError> {
    let placement = place_test_functions(scenario, mollifier.max_width(), seed)?;
    let mut samples = Vec::new();
    for &eps in mollifier.widths() {
        let grid = build_grid(scenario, grid_spec, eps)?;
        let per_equation = weak_residual(scenario, eps, &grid, &placement.functions)?;
        let magnitude = per_equation
            .iter()
            .map(|per_eq| per_eq.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .collect();
        samples.push(ResidualSample { eps, per_equation, magnitude });
    }

    let eps: Vec<f64> = mollifier.widths().to_vec();
    let nphi = placement.functions.len();
    let mut rates = Vec::new();
    let mut plateau = Vec::new();
    let mut any_violated = false;
    let mut all_consistent = true;
    for fi in 0..nphi {
        let rs: Vec<f64> = samples.iter().map(|s| s.magnitude[fi]).collect();
        rates.push(fit_rate(&eps, &rs));
        plateau.push(*rs.last().expect("at least one width"));
        if !placement.functions[fi].straddles {
            continue;
        }
        if rs.iter().all(|r| *r <= NOISE_FLOOR) {
            continue; // at the quadrature-noise floor: consistent
        }
        let factors: Vec<f64> = (0..rs.len() - 1)
            .map(|k| halving_factor(eps[k], rs[k], eps[k + 1], rs[k + 1]))
            .collect();
        let consistent = factors.iter().all(|f| *f >= SHRINK_FACTOR);
        let last = *factors.last().expect("at least two widths for a non-floor sequence");
        let violated = last < PLATEAU_FACTOR && *rs.last().unwrap() > NOISE_FLOOR;
        if violated {
            any_violated = true;
        }
        if !consistent {
            all_consistent = false;
        }
    }
    let verdict = if any_violated {
        NumVerdict::Violated
    } else if all_consistent {
        NumVerdict::Consistent
    } else {
        NumVerdict::Inconclusive
    };
    Ok(ResidualReport {
        samples,
        test_functions: placement.functions,
        gamma_points: placement.gamma_points,
        base_points: grid_spec.base_points,
        rates,
        plateau,
        verdict,
    })
}

/// Evaluate the symbolic junction-condition coefficients at on-Γ points;
/// returns the maximum |value| over conditions, atoms and points.
pub fn conditions_max_abs(
    scenario: &Scenario,
    conds: &JunctionConditionSet,
    points: &[Vec<f64>],
) -> Result<f64, NumError> {
    let mut max_abs = 0.0f64;
    for ec in &conds.per_equation {
        for (atom, coeff) in ec.residual.parts() {
            if *atom == DistAtom::One {
                continue;
            }
            for x in points {
                let v = eval_condition_coefficient(scenario, coeff, x)?;
                max_abs = max_abs.max(v.abs());
            }
        }
    }
    Ok(max_abs)
}

/// Evaluate an Expr in trace and γ jets at a point, using symbolic derivatives
/// of the closed forms.
pub fn eval_condition_coefficient(
    scenario: &Scenario,
    coeff: &Expr,
    x: &[f64],
) -> Result<f64, NumError> {
    eval_expr(coeff, &mut |atom| match atom {
        Atom::Coordinate(i) => Ok(x[*i]),
        Atom::GammaJet(p) => eval_in_coords(&scenario.gamma.derivative_multi(p), x),
        Atom::TraceJet { side, alpha, deriv } => {
            let base = match side {
                Side::Minus => &scenario.traces_minus[*alpha],
                Side::Plus => &scenario.traces_plus[*alpha],
            };
            eval_in_coords(&base.derivative_multi(deriv), x)
        }
        other => Err(NumError::UnboundAtom { atom: other.clone() }),
    })
}
