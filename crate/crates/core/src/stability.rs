//! Second variation of the weighted (r, s)-area under volume-preserving
//! normal variations, and the test-function argument that singles out the
//! Wulff shape.
//!
//! Conventions follow [`crate::functionals`]: `ν` inward, `S = -dν`,
//! `X_t = X + t·f·ν`. With `Λ = β` the Jacobi functional
//! `J(t) = B_{r,s}(t) + Λ·V(t)` (signed volume `V`) is critical, and
//!
//! ```text
//! J''(0)[f] = -∫ f R[f],   R[f] = Σ (j+1) a_j I_j[f],   I_j[f] = div(T_j ∇f) + q_j f
//! ```
//!
//! with `q_j = tr(T_j S²)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyModel;
use crate::curvalg::{b_coeff, discriminant_p, is_umbilic};
use crate::error::{Error, Result};
use crate::fd::{plateau_search, CachedFn, FdEstimate};
use crate::functionals::{area_rs, area_rs_with, check_weights, CurvatureField};
use crate::geometry::{SampledImmersion, VariationFamily};
use crate::parallel::map_nodes;

/// Thresholds used by the pipeline. [`Tolerances::scaled`] multiplies all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `max |β_k - β| ≤ beta_rel·|β|`.
    pub beta_rel: f64,
    /// Per-node `H·H_{j+1} - H_{j+2}` and `P_{j,F,x}(α)` bound for equality.
    pub equality_gap: f64,
    /// `|J''| ≤ j2_rel·f_scale` counts as zero.
    pub j2_rel: f64,
    /// Route agreement `max(route_rel·|J2_fd|, route_abs·‖f‖²)`.
    pub route_rel: f64,
    pub route_abs: f64,
    /// `‖f‖² ≤ degenerate²·f_scale` marks the degenerate test function.
    pub degenerate: f64,
    /// `|∫f| ≤ mean_zero·∫(|αF| + |β⟨X,ν⟩|)`.
    pub mean_zero: f64,
    /// Grouped integrals counted as zero.
    pub grouped_abs: f64,
    /// Pointwise sign slack for the grouped integrands.
    pub sign_slack: f64,
    /// Relative Richardson plateau for the FD route.
    pub plateau_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            beta_rel: 1e-6,
            equality_gap: 1e-6,
            j2_rel: 1e-4,
            route_rel: 1e-3,
            route_abs: 1e-4,
            degenerate: 1e-8,
            mean_zero: 1e-6,
            grouped_abs: 1e-8,
            sign_slack: 1e-10,
            plateau_rel: 1e-3,
        }
    }
}

impl Tolerances {
    pub fn scaled(factor: f64) -> Self {
        Self::default().times(factor)
    }

    /// Every threshold except the FD plateau multiplied by `factor`.
    pub fn times(&self, factor: f64) -> Self {
        let d = self;
        Self {
            beta_rel: d.beta_rel * factor,
            equality_gap: d.equality_gap * factor,
            j2_rel: d.j2_rel * factor,
            route_rel: d.route_rel * factor,
            route_abs: d.route_abs * factor,
            degenerate: d.degenerate * factor,
            mean_zero: d.mean_zero * factor,
            grouped_abs: d.grouped_abs * factor,
            sign_slack: d.sign_slack * factor,
            plateau_rel: d.plateau_rel,
        }
    }
}

/// A surface, an anisotropy and the weights `a_r..a_s`.
pub struct StabilityProblem<'a> {
    pub imm: &'a SampledImmersion,
    pub model: &'a AnisotropyModel,
    pub r: usize,
    pub s: usize,
    pub a: Vec<f64>,
    /// `b_j = (j+1)·C(n, j+1)` for `j = r..=s`.
    pub b: Vec<f64>,
    pub field: CurvatureField,
}

impl<'a> StabilityProblem<'a> {
    pub fn new(imm: &'a SampledImmersion, model: &'a AnisotropyModel, r: usize, s: usize, a: &[f64]) -> Result<Self> {
        let n = imm.dimension();
        check_weights(n, r, s, a)?;
        let field = CurvatureField::compute(imm, model)?;
        let b = (r..=s).map(|j| b_coeff(n, j)).collect();
        Ok(Self { imm, model, r, s, a: a.to_vec(), b, field })
    }

    pub fn n(&self) -> usize {
        self.imm.dimension()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (self.r..=self.s).zip(self.a.iter().zip(&self.b)).map(|(j, (a, b))| (j, *a, *b))
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if j + 1 > self.n() {
            return Err(Error::OutOfRange { value: j, range: format!("0..{}", self.n()) });
        }
        Ok(())
    }

    fn check_field(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.imm.len() {
            return Err(Error::InputDomain(format!("field has {} values, surface has {} nodes", f.len(), self.imm.len())));
        }
        Ok(())
    }

    /// `Σ a_j b_j H_{j+1}` per node.
    pub fn beta_field(&self) -> Vec<f64> {
        (0..self.imm.len()).map(|k| self.terms().map(|(j, a, b)| a * b * self.field.points[k].h[j + 1]).sum()).collect()
    }

    /// `Λ`: the area-weighted mean of the β-field (its value when constant).
    pub fn lambda(&self) -> Result<f64> {
        Ok(self.imm.integrate(&self.beta_field())? / self.imm.area())
    }

    /// `tr(T_j S²)` per node.
    pub fn q_field(&self, j: usize) -> Result<Vec<f64>> {
        self.check_j(j)?;
        Ok(map_nodes(self.imm.len(), |k| {
            let s = &self.imm.node(k).shape;
            (&self.field.points[k].t[j] * s * s).trace()
        }))
    }

    /// `tr(P_j S_F²)`, the other reading of `⟨T_j∘dν, dν⟩`.
    pub fn q_field_alt(&self, j: usize) -> Result<Vec<f64>> {
        self.check_j(j)?;
        Ok(map_nodes(self.imm.len(), |k| {
            let p = &self.field.points[k];
            (&p.p[j] * &p.s_f * &p.s_f).trace()
        }))
    }

    /// `T_j ∇f` in frame components.
    fn t_gradient(&self, j: usize, f: &[f64]) -> Result<Vec<DVector<f64>>> {
        let grad = self.imm.surface_gradient(f)?;
        Ok(grad.iter().zip(&self.field.points).map(|(g, p)| &p.t[j] * g).collect())
    }
}

/// `L_j f = div(T_j ∇f)`.
pub fn op_lj(problem: &StabilityProblem, j: usize, f: &[f64]) -> Result<Vec<f64>> {
    problem.check_j(j)?;
    problem.check_field(f)?;
    problem.imm.surface_divergence(&problem.t_gradient(j, f)?)
}

/// `I_j[f] = L_j f + q_j f`.
pub fn op_ij(problem: &StabilityProblem, j: usize, f: &[f64]) -> Result<Vec<f64>> {
    let l = op_lj(problem, j, f)?;
    let q = problem.q_field(j)?;
    Ok(l.iter().zip(&q).zip(f).map(|((l, q), f)| l + q * f).collect())
}

/// `R[f] = Σ (j+1) a_j I_j[f]`.
pub fn op_r(problem: &StabilityProblem, f: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.len()];
    for (j, a, _) in problem.terms() {
        let i = op_ij(problem, j, f)?;
        for (o, v) in out.iter_mut().zip(i) {
            *o += (j + 1) as f64 * a * v;
        }
    }
    Ok(out)
}

/// Residual fields of the two closed-form evaluations of `I_j`.
#[derive(Clone, Debug)]
pub struct ClosedFormResiduals {
    pub j: usize,
    /// `I_j[⟨X,ν⟩] + ⟨∇σ_{j+1}, X^T⟩ + (j+1)σ_{j+1}`.
    pub res1: Vec<f64>,
    /// `I_j[F(ν)] + ⟨∇σ_{j+1}, (∇F)(ν)⟩ - σ_1σ_{j+1} + (j+2)σ_{j+2}`.
    pub res2: Vec<f64>,
}

impl ClosedFormResiduals {
    /// Max-norm of both fields over nodes where `mask` is true.
    pub fn max_norm(&self, mask: &[bool]) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().zip(mask).filter(|(_, m)| **m).fold(0.0f64, |a, (x, _)| a.max(x.abs()));
        (m(&self.res1), m(&self.res2))
    }
}

pub fn closed_form_residuals(problem: &StabilityProblem, j: usize) -> Result<ClosedFormResiduals> {
    problem.check_j(j)?;
    let imm = problem.imm;
    let field = &problem.field;
    let split = imm.support_and_tangent();
    let sigma = field.sigma(j + 1);
    let grad_sigma = imm.surface_gradient(&sigma)?;
    let i_support = op_ij(problem, j, &split.support)?;
    let i_f = op_ij(problem, j, &field.f_nu)?;
    let mut res1 = Vec::with_capacity(imm.len());
    let mut res2 = Vec::with_capacity(imm.len());
    for k in 0..imm.len() {
        let p = &field.points[k];
        let g = imm.node(k);
        let grad_f = &g.frame * problem.model.sphere_gradient(g.normal.as_slice());
        let s1 = p.sigma_at(j + 1);
        res1.push(i_support[k] + grad_sigma[k].dot(&split.tangent[k]) + (j + 1) as f64 * s1);
        res2.push(i_f[k] + grad_sigma[k].dot(&grad_f) - p.sigma_at(1) * s1 + (j + 2) as f64 * p.sigma_at(j + 2));
    }
    Ok(ClosedFormResiduals { j, res1, res2 })
}

/// `f = αF(ν) + β⟨X, ν⟩` and the hypothesis checks behind it.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    #[serde(skip)]
    pub f: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// `max_k |β_k - β|`.
    pub beta_deviation: f64,
    pub beta_constant: bool,
    /// `min_k H_{s+1}`.
    pub h_next_min: f64,
    pub h_next_positive: bool,
    pub mean_zero_residual: f64,
    /// `∫(|αF| + |β⟨X,ν⟩|)`, the scale for the mean-zero test.
    pub magnitude: f64,
    /// `∫(αF)² + ∫(β⟨X,ν⟩)²`.
    pub f_scale: f64,
    /// `∫f²`.
    pub f_norm2: f64,
    pub degenerate: bool,
}

impl TestFunction {
    pub fn hypotheses_hold(&self) -> bool {
        self.beta_constant && self.h_next_positive
    }
}

pub fn build_test_function(problem: &StabilityProblem, tol: &Tolerances) -> Result<TestFunction> {
    let imm = problem.imm;
    let field = &problem.field;
    let beta_field = problem.beta_field();
    let beta = problem.lambda()?;
    let beta_deviation = beta_field.iter().fold(0.0f64, |m, v| m.max((v - beta).abs()));
    let h_next = field.h(problem.s + 1);
    let h_next_min = h_next.iter().copied().fold(f64::INFINITY, f64::min);
    let num: Vec<f64> =
        (0..imm.len()).map(|k| field.f_nu[k] * problem.terms().map(|(j, a, b)| a * b * field.points[k].h[j]).sum::<f64>()).collect();
    let alpha = imm.integrate(&num)? / imm.integrate(&field.f_nu)?;
    let support = imm.support_and_tangent().support;
    let af: Vec<f64> = field.f_nu.iter().map(|v| alpha * v).collect();
    let bu: Vec<f64> = support.iter().map(|v| beta * v).collect();
    let f: Vec<f64> = af.iter().zip(&bu).map(|(a, b)| a + b).collect();
    let abs: Vec<f64> = af.iter().zip(&bu).map(|(a, b)| a.abs() + b.abs()).collect();
    let magnitude = imm.integrate(&abs)?;
    let f_scale =
        imm.integrate(&af.iter().map(|v| v * v).collect::<Vec<_>>())? + imm.integrate(&bu.iter().map(|v| v * v).collect::<Vec<_>>())?;
    let f_norm2 = imm.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>())?;
    Ok(TestFunction {
        alpha,
        beta,
        beta_deviation,
        beta_constant: beta_deviation <= tol.beta_rel * beta.abs(),
        h_next_min,
        h_next_positive: h_next_min > 0.0,
        mean_zero_residual: imm.integrate(&f)?.abs(),
        magnitude,
        f_scale,
        f_norm2,
        degenerate: f_norm2 <= tol.degenerate * tol.degenerate * f_scale,
        f,
    })
}

/// `J''(0)[f]` by the operator route.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorForm {
    /// `-∫ f R[f]`.
    pub direct: f64,
    /// `Σ (j+1) a_j (∫⟨T_j∇f, ∇f⟩ - ∫ q_j f²)`.
    pub by_parts: f64,
    /// `direct` with `q_j = tr(P_j S_F²)`.
    pub direct_alt_q: f64,
}

fn check_mean_zero(imm: &SampledImmersion, f: &[f64], reference: f64, rel: f64) -> Result<()> {
    let mean = imm.integrate(f)?;
    if mean.abs() > rel * reference {
        return Err(Error::NotMeanZero(mean.abs()));
    }
    Ok(())
}

/// Operator route for a mean-zero `f` (`|∫f| ≤ 1e-6·∫|f|`).
pub fn jacobi_qform_operator(problem: &StabilityProblem, f: &[f64]) -> Result<OperatorForm> {
    problem.check_field(f)?;
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    check_mean_zero(problem.imm, f, problem.imm.integrate(&abs)?, Tolerances::default().mean_zero)?;
    operator_form(problem, f)
}

fn operator_form(problem: &StabilityProblem, f: &[f64]) -> Result<OperatorForm> {
    let imm = problem.imm;
    let grad = imm.surface_gradient(f)?;
    let (mut direct, mut by_parts, mut direct_alt_q) = (0.0, 0.0, 0.0);
    for (j, a, _) in problem.terms() {
        let c = (j + 1) as f64 * a;
        let l = op_lj(problem, j, f)?;
        let q = problem.q_field(j)?;
        let q_alt = problem.q_field_alt(j)?;
        let fl: Vec<f64> = f.iter().zip(&l).map(|(f, l)| f * l).collect();
        let qf2: Vec<f64> = f.iter().zip(&q).map(|(f, q)| q * f * f).collect();
        let qf2_alt: Vec<f64> = f.iter().zip(&q_alt).map(|(f, q)| q * f * f).collect();
        let energy: Vec<f64> = grad.iter().zip(&problem.field.points).map(|(g, p)| (&p.t[j] * g).dot(g)).collect();
        let (fl, qf2, qf2_alt, energy) = (imm.integrate(&fl)?, imm.integrate(&qf2)?, imm.integrate(&qf2_alt)?, imm.integrate(&energy)?);
        direct -= c * (fl + qf2);
        direct_alt_q -= c * (fl + qf2_alt);
        by_parts += c * (energy - qf2);
    }
    Ok(OperatorForm { direct, by_parts, direct_alt_q })
}

/// `J''(0)[f]` and `J'(0)` by finite differences of `J(t)`.
#[derive(Clone, Debug, Serialize)]
pub struct FdForm {
    pub second: FdEstimate,
    pub first: FdEstimate,
    pub lambda: f64,
}

/// FD route along `X + t f ν`. `amplitude` floors `‖f‖∞` when choosing steps.
pub fn jacobi_qform_fd(problem: &StabilityProblem, f: &[f64], amplitude: f64, plateau_rel: f64) -> Result<FdForm> {
    problem.check_field(f)?;
    let lambda = problem.lambda()?;
    let sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        let zero = FdEstimate { value: 0.0, step: 0.0, richardson_error: 0.0 };
        return Ok(FdForm { second: zero.clone(), first: zero, lambda });
    }
    let amp = sup.max(amplitude);
    let imm = problem.imm;
    let family = VariationFamily::new(imm.clone(), f.to_vec())?;
    let (r, s, a) = (problem.r, problem.s, problem.a.clone());
    let model = problem.model;
    let j0 = area_rs_with(imm, &problem.field, r, &a)? + lambda * imm.signed_volume();
    let mut j = CachedFn::new(|t: f64| {
        if t == 0.0 && !imm.is_closed_form() {
            return Ok(j0);
        }
        let moved = family.evaluate_at(t)?;
        Ok(area_rs(&moved, model, r, s, &a)? + lambda * moved.signed_volume())
    });
    let f2 = imm.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>())?;
    let magnitude = f2 * (1.0 + lambda.abs()) * amp * amp / (sup * sup);
    let second = plateau_search(&mut j, 2, 1.0 / amp, magnitude, plateau_rel)?;
    let first = plateau_search(&mut j, 1, 1.0 / amp, magnitude, plateau_rel).unwrap_or(FdEstimate {
        value: f64::NAN,
        step: 0.0,
        richardson_error: f64::INFINITY,
    });
    Ok(FdForm { second, first, lambda })
}

/// `J''` from the closed-form `I_j[F]`, `I_j[⟨X,ν⟩]` with the gradient terms
/// dropped (valid when the β-field is constant).
pub fn jacobi_qform_closed(problem: &StabilityProblem, t: &TestFunction) -> Result<f64> {
    let field = &problem.field;
    let r_f: Vec<f64> = (0..problem.imm.len())
        .map(|k| {
            let p = &field.points[k];
            problem
                .terms()
                .map(|(j, a, _)| {
                    let c = (j + 1) as f64 * a;
                    let s1 = p.sigma_at(j + 1);
                    let i_f = p.sigma_at(1) * s1 - (j + 2) as f64 * p.sigma_at(j + 2);
                    let i_u = -((j + 1) as f64) * s1;
                    c * (t.alpha * i_f + t.beta * i_u)
                })
                .sum()
        })
        .collect();
    let fr: Vec<f64> = t.f.iter().zip(&r_f).map(|(f, r)| f * r).collect();
    Ok(-problem.imm.integrate(&fr)?)
}

/// The two grouped integrals of one `j` and their pointwise signs.
#[derive(Clone, Debug, Serialize)]
pub struct GroupedTerm {
    pub j: usize,
    /// `-a_j b_j (n-j-1) α² ∫F (H H_{j+1} - H_{j+2})`.
    pub first: f64,
    /// `-a_j b_j (j+1) ∫F (H H_{j+1} α² - 2 H_{j+1} α β + H_j β²)`.
    pub second: f64,
    /// Largest pointwise integrand of each group (nonpositive in theory).
    pub first_max_integrand: f64,
    pub second_max_integrand: f64,
    /// `max_k |H H_{j+1} - H_{j+2}|`.
    pub max_gap: f64,
    /// `min_k (H H_{j+1} - H_{j+2})`.
    pub min_gap: f64,
    /// `max_k |P_{j,F,x}(α)|`.
    pub max_poly: f64,
    pub min_poly: f64,
    /// Largest `Δ / scale` over nodes.
    pub max_discriminant_ratio: f64,
    /// Nodes where `H_{j+1} ≤ 0` (sign test skipped).
    pub skipped_nodes: usize,
}

pub fn grouped_terms(problem: &StabilityProblem, t: &TestFunction) -> Result<Vec<GroupedTerm>> {
    let imm = problem.imm;
    let field = &problem.field;
    let n = problem.n();
    let mut out = Vec::new();
    for (j, a, b) in problem.terms() {
        let mut g1 = Vec::with_capacity(imm.len());
        let mut g2 = Vec::with_capacity(imm.len());
        let mut gaps = Vec::with_capacity(imm.len());
        let mut polys = Vec::with_capacity(imm.len());
        let mut disc = f64::NEG_INFINITY;
        let mut skipped = 0;
        for k in 0..imm.len() {
            let h = &field.points[k].h;
            let fnu = field.f_nu[k];
            let gap = h[1] * h[j + 1] - h[j + 2];
            let poly = fnu * (h[1] * h[j + 1] * t.alpha * t.alpha - 2.0 * h[j + 1] * t.alpha * t.beta + h[j] * t.beta * t.beta);
            g1.push(-a * b * (n - j - 1) as f64 * t.alpha * t.alpha * fnu * gap);
            g2.push(-a * b * (j + 1) as f64 * poly);
            gaps.push(gap);
            polys.push(poly);
            match discriminant_p(j, fnu, t.beta, h) {
                Ok(d) => disc = disc.max(d.delta / d.scale.max(f64::MIN_POSITIVE)),
                Err(Error::PositivityHypothesis(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(GroupedTerm {
            j,
            first: imm.integrate(&g1)?,
            second: imm.integrate(&g2)?,
            first_max_integrand: max(&g1),
            second_max_integrand: max(&g2),
            max_gap: amax(&gaps),
            min_gap: min(&gaps),
            max_poly: amax(&polys),
            min_poly: min(&polys),
            max_discriminant_ratio: disc,
            skipped_nodes: skipped,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Hypotheses hold and every term of the equality chain vanishes.
    WulffEquality,
    /// Hypotheses hold and `J''(f_test) ≤ 0` with routes agreeing.
    StableConsistent,
    /// β is not constant or `H_{s+1}` is not positive; the rest is exploratory.
    HypothesisViolated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::WulffEquality => "wulff-equality",
            Verdict::StableConsistent => "stable-consistent",
            Verdict::HypothesisViolated => "hypothesis-violated",
        })
    }
}

/// Everything the pipeline computed for one problem.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub resolution: usize,
    pub lambda: f64,
    pub test_function: TestFunction,
    pub j2_operator: f64,
    pub j2_operator_by_parts: f64,
    pub j2_operator_alt_q: f64,
    pub j2_closed_form: f64,
    pub j2_fd: f64,
    pub j2_fd_step: f64,
    pub j2_fd_richardson: f64,
    pub j1_fd: f64,
    pub grouped_terms: Vec<GroupedTerm>,
    pub grouped_total: f64,
    /// `max_k |S_F - κ̄·Id|` with `κ̄` the mean anisotropic principal curvature.
    pub sf_umbilic_deviation: f64,
    pub umbilic_everywhere: bool,
    pub routes_agree: bool,
    pub verdict: Verdict,
    /// Set when the β-field is not constant, in which case no verdict follows.
    pub exploratory: bool,
    pub tolerances: Tolerances,
}

impl StabilityReport {
    /// `(max |first|, max |second|)` over the grouped integrals.
    pub fn grouped_max(&self) -> (f64, f64) {
        self.grouped_terms.iter().fold((0.0f64, 0.0f64), |(a, b), t| (a.max(t.first.abs()), b.max(t.second.abs())))
    }

    pub fn max_equality_gap(&self) -> f64 {
        self.grouped_terms.iter().map(|t| t.max_gap.max(t.max_poly)).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The whole argument: test function, three `J''` routes, the grouped form and a verdict.
pub fn theorem_pipeline(problem: &StabilityProblem, tol: &Tolerances) -> Result<StabilityReport> {
    let imm = problem.imm;
    let test = build_test_function(problem, tol)?;
    let op = operator_form(problem, &test.f)?;
    let closed = jacobi_qform_closed(problem, &test)?;
    let amp_floor = tol.degenerate * (test.f_scale / imm.area()).sqrt();
    let fd = jacobi_qform_fd(problem, &test.f, amp_floor, tol.plateau_rel)?;
    let terms = grouped_terms(problem, &test)?;
    let grouped_total = terms.iter().map(|t| t.first + t.second).sum();

    let sf_dev = problem
        .field
        .points
        .iter()
        .map(|p| {
            let mean = p.kappa.iter().sum::<f64>() / p.n as f64;
            let mut d = p.s_f.clone();
            for i in 0..p.n {
                d[(i, i)] -= mean;
            }
            d.amax()
        })
        .fold(0.0, f64::max);
    let umbilic_everywhere = problem.field.points.iter().all(|p| is_umbilic(&p.kappa, 1e-4));

    let zero = tol.j2_rel * test.f_scale;
    let j2_vanish = [op.direct, closed, fd.second.value].iter().all(|v| v.abs() <= zero);
    let close = |x: f64, y: f64| (x - y).abs() <= (tol.route_rel * y.abs()).max(tol.route_abs * test.f_norm2);
    let routes_agree = if test.degenerate {
        j2_vanish
    } else {
        close(op.direct, fd.second.value) && close(op.by_parts, fd.second.value) && (!test.beta_constant || close(closed, fd.second.value))
    };
    let gaps_vanish = terms.iter().all(|t| t.max_gap <= tol.equality_gap && t.max_poly <= tol.equality_gap);
    let grouped_vanish = terms.iter().all(|t| t.first.abs() <= tol.grouped_abs && t.second.abs() <= tol.grouped_abs);

    let verdict = if !test.hypotheses_hold() {
        Verdict::HypothesisViolated
    } else if test.degenerate || (gaps_vanish && j2_vanish && grouped_vanish) {
        Verdict::WulffEquality
    } else {
        Verdict::StableConsistent
    };

    Ok(StabilityReport {
        n: problem.n(),
        r: problem.r,
        s: problem.s,
        a: problem.a.clone(),
        b: problem.b.clone(),
        resolution: imm.resolution(),
        lambda: fd.lambda,
        exploratory: !test.beta_constant,
        test_function: test,
        j2_operator: op.direct,
        j2_operator_by_parts: op.by_parts,
        j2_operator_alt_q: op.direct_alt_q,
        j2_closed_form: closed,
        j2_fd: fd.second.value,
        j2_fd_step: fd.second.step,
        j2_fd_richardson: fd.second.richardson_error,
        j1_fd: fd.first.value,
        grouped_terms: terms,
        grouped_total,
        sf_umbilic_deviation: sf_dev,
        umbilic_everywhere,
        routes_agree,
        verdict,
        tolerances: tol.clone(),
    })
}
