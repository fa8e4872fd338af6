//! Anisotropic r-areas, the weighted (r, s)-area, enclosed volume, the
//! Minkowski-type integral identities and first-variation checks.
//!
//! With `X_t = X + t·f·ν` (ν inward):
//!
//! * `d/dt ∫F(ν)σ_r = -b_r ∫ f H_{r+1}` with `b_r = (r+1)·C(n, r+1)`;
//! * `d/dt (1/(n+1))∫⟨X, ν⟩ = ∫ f`, so the enclosed volume changes by `-∫ f`.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::anisotropy::AnisotropyModel;
use crate::curvalg::{b_coeff, sf_operator, sigma_charpoly, CurvaturePoint};
use crate::error::{Error, Result};
use crate::fd::{plateau_search, CachedFn, FdEstimate};
use crate::geometry::{SampledImmersion, VariationFamily};
use crate::parallel::map_nodes;

/// `F(ν)` and the anisotropic curvature data at every node.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub n: usize,
    pub f_nu: Vec<f64>,
    pub points: Vec<CurvaturePoint>,
}

impl CurvatureField {
    pub fn compute(imm: &SampledImmersion, model: &AnisotropyModel) -> Result<Self> {
        if model.ambient_dim() != imm.ambient_dim() {
            return Err(Error::InputDomain(format!(
                "model lives on S^{} but the surface is in R^{}",
                model.ambient_dim() - 1,
                imm.ambient_dim()
            )));
        }
        let per_node = map_nodes(imm.len(), |k| -> Result<(f64, CurvaturePoint)> {
            let g = imm.node(k);
            let nu = g.normal.as_slice();
            let f = model.eval_f(nu)?;
            let a_f = model.a_f_unchecked(nu, &g.frame);
            Ok((f, CurvaturePoint::new(&a_f, &g.shape)?))
        });
        let mut f_nu = Vec::with_capacity(imm.len());
        let mut points = Vec::with_capacity(imm.len());
        for item in per_node {
            let (f, p) = item?;
            f_nu.push(f);
            points.push(p);
        }
        Ok(Self { n: imm.dimension(), f_nu, points })
    }

    /// `F(ν)σ_r` per node for `r = 0..=n`, skipping the spectral data.
    pub fn weighted_sigmas(imm: &SampledImmersion, model: &AnisotropyModel) -> Result<Vec<Vec<f64>>> {
        if model.ambient_dim() != imm.ambient_dim() {
            return Err(Error::InputDomain("model and surface dimensions differ".into()));
        }
        map_nodes(imm.len(), |k| -> Result<Vec<f64>> {
            let g = imm.node(k);
            let f = model.eval_f(g.normal.as_slice())?;
            let a_f = model.a_f_unchecked(g.normal.as_slice(), &g.frame);
            let sigma = sigma_charpoly(&sf_operator(&a_f, &g.shape)?)?;
            Ok(sigma.into_iter().map(|s| f * s).collect())
        })
        .into_iter()
        .collect()
    }

    pub fn sigma(&self, r: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma_at(r)).collect()
    }

    /// `H_r` per node, zero for `r > n`.
    pub fn h(&self, r: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.h.get(r).copied().unwrap_or(0.0)).collect()
    }

    /// `max_k |S_F - c·Id|` over nodes.
    pub fn sf_deviation(&self, c: f64) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let mut d = p.s_f.clone();
                for i in 0..p.n {
                    d[(i, i)] -= c;
                }
                d.amax()
            })
            .fold(0.0, f64::max)
    }
}

fn check_r(r: usize, max: usize) -> Result<()> {
    if r > max {
        return Err(Error::OutOfRange { value: r, range: format!("0..={max}") });
    }
    Ok(())
}

/// `∫ F(ν) σ_r`.
pub fn area_r(imm: &SampledImmersion, model: &AnisotropyModel, r: usize) -> Result<f64> {
    check_r(r, imm.dimension())?;
    area_r_with(imm, &CurvatureField::compute(imm, model)?, r)
}

pub fn area_r_with(imm: &SampledImmersion, field: &CurvatureField, r: usize) -> Result<f64> {
    check_r(r, field.n)?;
    let integrand: Vec<f64> = field.f_nu.iter().zip(field.points.iter()).map(|(f, p)| f * p.sigma_at(r)).collect();
    imm.integrate(&integrand)
}

/// Validates `0 ≤ r ≤ s ≤ n-2` and the coefficient list `a_r..a_s`.
pub fn check_weights(n: usize, r: usize, s: usize, a: &[f64]) -> Result<()> {
    if n < 2 || r > s || s > n - 2 {
        return Err(Error::InputDomain(format!("need 0 <= r <= s <= n-2, got r={r}, s={s}, n={n}")));
    }
    if a.len() != s - r + 1 {
        return Err(Error::InputDomain(format!("expected {} coefficients, got {}", s - r + 1, a.len())));
    }
    if a.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || !(a.iter().sum::<f64>() > 0.0) {
        return Err(Error::InputDomain("coefficients must be nonnegative and not all zero".into()));
    }
    Ok(())
}

/// `Σ_{j=r}^{s} a_j ∫F(ν)σ_j`.
pub fn area_rs(imm: &SampledImmersion, model: &AnisotropyModel, r: usize, s: usize, a: &[f64]) -> Result<f64> {
    check_weights(imm.dimension(), r, s, a)?;
    area_rs_with(imm, &CurvatureField::compute(imm, model)?, r, a)
}

pub fn area_rs_with(imm: &SampledImmersion, field: &CurvatureField, r: usize, a: &[f64]) -> Result<f64> {
    let integrand: Vec<f64> = field
        .f_nu
        .iter()
        .zip(field.points.iter())
        .map(|(f, p)| f * a.iter().enumerate().map(|(i, aj)| aj * p.sigma_at(r + i)).sum::<f64>())
        .collect();
    imm.integrate(&integrand)
}

pub fn enclosed_volume(imm: &SampledImmersion) -> f64 {
    imm.enclosed_volume()
}

/// `∫ (F(ν) H_r + H_{r+1} ⟨X, ν⟩)`, which vanishes on closed hypersurfaces.
pub fn minkowski_residual(imm: &SampledImmersion, model: &AnisotropyModel, r: usize) -> Result<f64> {
    let n = imm.dimension();
    if n == 0 || r > n - 1 {
        return Err(Error::OutOfRange { value: r, range: format!("0..={}", n.saturating_sub(1)) });
    }
    minkowski_residual_with(imm, &CurvatureField::compute(imm, model)?, r)
}

pub fn minkowski_residual_with(imm: &SampledImmersion, field: &CurvatureField, r: usize) -> Result<f64> {
    let support = imm.support_and_tangent().support;
    let integrand: Vec<f64> =
        (0..imm.len()).map(|k| field.f_nu[k] * field.points[k].h[r] + field.points[k].h[r + 1] * support[k]).collect();
    imm.integrate(&integrand)
}

/// Finite-difference derivative against a closed-form first variation.
#[derive(Clone, Debug, Serialize)]
pub struct VariationCheck {
    pub fd_derivative: f64,
    pub formula_value: f64,
    pub gap: f64,
    pub step: f64,
    pub richardson_error: f64,
}

fn speed_scale(family: &VariationFamily) -> Result<f64> {
    let amp = family.speed().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(amp > 0.0) {
        return Err(Error::InputDomain("speed field vanishes identically".into()));
    }
    Ok(1.0 / amp)
}

fn finish(fd: FdEstimate, formula_value: f64) -> VariationCheck {
    VariationCheck {
        fd_derivative: fd.value,
        formula_value,
        gap: (fd.value - formula_value).abs(),
        step: fd.step,
        richardson_error: fd.richardson_error,
    }
}

/// FD derivative of `t ↦ ∫F(ν_t)σ_r(t)` against `-b_r ∫ f H_{r+1}`.
pub fn first_variation_check(family: &VariationFamily, model: &AnisotropyModel, r: usize) -> Result<VariationCheck> {
    let base = family.base();
    let n = base.dimension();
    check_r(r, n - 1)?;
    let field = CurvatureField::compute(base, model)?;
    let h_next = field.h(r + 1);
    let f = family.speed();
    let weighted: Vec<f64> = f.iter().zip(&h_next).map(|(a, b)| a * b).collect();
    let formula_value = -b_coeff(n, r) * base.integrate(&weighted)?;
    let magnitude: Vec<f64> = weighted.iter().map(|v| v.abs()).collect();
    let magnitude = b_coeff(n, r) * base.integrate(&magnitude)?;
    let mut j = CachedFn::new(|t: f64| {
        if t == 0.0 {
            return area_r_with(base, &field, r);
        }
        area_r(&family.evaluate_at(t)?, model, r)
    });
    let fd = plateau_search(&mut j, 1, speed_scale(family)?, magnitude, 1e-3)?;
    Ok(finish(fd, formula_value))
}

/// FD derivative of the signed volume against `∫ f`.
pub fn volume_variation_check(family: &VariationFamily) -> Result<VariationCheck> {
    let base = family.base();
    let formula_value = base.integrate(family.speed())?;
    let abs: Vec<f64> = family.speed().iter().map(|v| v.abs()).collect();
    let magnitude = base.integrate(&abs)?;
    let mut j = CachedFn::new(|t: f64| Ok(family.evaluate_at(t)?.signed_volume()));
    let fd = plateau_search(&mut j, 1, speed_scale(family)?, magnitude, 1e-3)?;
    Ok(finish(fd, formula_value))
}

/// First-variation checks for several models and every `r`, plus the volume
/// check, from one rebuild of each varied surface.
#[derive(Clone, Debug, Serialize)]
pub struct VariationTable {
    /// `area[model][r]`.
    pub area: Vec<Vec<VariationCheck>>,
    pub volume: VariationCheck,
}

pub fn first_variation_table(family: &VariationFamily, models: &[&AnisotropyModel]) -> Result<VariationTable> {
    let base = family.base();
    let n = base.dimension();
    let f = family.speed();
    let fields = models.iter().map(|m| CurvatureField::compute(base, m)).collect::<Result<Vec<_>>>()?;
    // Per t: area_r for every (model, r), then the signed volume.
    let cache: RefCell<HashMap<u64, Vec<f64>>> = RefCell::new(HashMap::new());
    let row = |t: f64| -> Result<Vec<f64>> {
        if let Some(v) = cache.borrow().get(&t.to_bits()) {
            return Ok(v.clone());
        }
        let imm = family.evaluate_at(t)?;
        let mut v = Vec::with_capacity(models.len() * n + 1);
        for m in models {
            let weighted = CurvatureField::weighted_sigmas(&imm, m)?;
            for r in 0..n {
                let column: Vec<f64> = weighted.iter().map(|w| w[r]).collect();
                v.push(imm.integrate(&column)?);
            }
        }
        v.push(imm.signed_volume());
        cache.borrow_mut().insert(t.to_bits(), v.clone());
        Ok(v)
    };
    let scale = speed_scale(family)?;
    let mut area = Vec::with_capacity(models.len());
    for (mi, field) in fields.iter().enumerate() {
        let mut checks = Vec::with_capacity(n);
        for r in 0..n {
            let h_next = field.h(r + 1);
            let weighted: Vec<f64> = f.iter().zip(&h_next).map(|(a, b)| a * b).collect();
            let formula_value = -b_coeff(n, r) * base.integrate(&weighted)?;
            let magnitude = b_coeff(n, r) * base.integrate(&weighted.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
            let mut j = CachedFn::new(|t: f64| Ok(row(t)?[mi * n + r]));
            let fd = plateau_search(&mut j, 1, scale, magnitude, 1e-3)?;
            checks.push(finish(fd, formula_value));
        }
        area.push(checks);
    }
    let formula_value = base.integrate(f)?;
    let magnitude = base.integrate(&f.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
    let last = models.len() * n;
    let mut j = CachedFn::new(|t: f64| Ok(row(t)?[last]));
    let volume = finish(plateau_search(&mut j, 1, scale, magnitude, 1e-3)?, formula_value);
    Ok(VariationTable { area, volume })
}

/// One functional evaluation, as emitted in reports.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionalValue {
    pub functional: String,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub a: Option<Vec<f64>>,
    pub value: f64,
    pub resolution: usize,
    pub residual: Option<f64>,
    pub order_estimate: Option<f64>,
}

impl FunctionalValue {
    pub fn new(functional: &str, value: f64, resolution: usize) -> Self {
        Self { functional: functional.to_string(), r: None, s: None, a: None, value, resolution, residual: None, order_estimate: None }
    }
}

/// `log2(coarse / fine)`: the observed order when the grid spacing halves.
pub fn order_estimate(coarse: f64, fine: f64) -> f64 {
    (coarse.abs() / fine.abs()).log2()
}
