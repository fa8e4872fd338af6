//! Verification suites run by `wulff verify`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wulff_core::curvalg::{
    b_coeff, discriminant_p, maclaurin_check, newton_eps, newton_recurrence, normalized_means, sigma_charpoly, sigma_eps, trace_checks,
    CurvaturePoint,
};
use wulff_core::functionals::{first_variation_table, minkowski_residual_with, order_estimate, volume_variation_check, CurvatureField};
use wulff_core::geometry::{SampledImmersion, VariationFamily};
use wulff_core::stability::{closed_form_residuals, op_ij, StabilityProblem};

use crate::config::{ConfigError, RunConfig};

/// Refinement residuals below this are roundoff; no order is required.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub case: String,
    pub coarse: Option<f64>,
    pub fine: f64,
    pub order: Option<f64>,
    pub tolerance: f64,
    pub min_order: Option<f64>,
    pub passed: bool,
}

impl Entry {
    fn single(case: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { case: case.into(), coarse: None, fine: value, order: None, tolerance, min_order: None, passed: value <= tolerance }
    }

    fn refined(case: impl Into<String>, coarse: f64, fine: f64, tolerance: f64, min_order: f64) -> Self {
        let (coarse, fine) = (coarse.abs(), fine.abs());
        let order = order_estimate(coarse, fine);
        let order_ok = coarse <= NOISE_FLOOR || order >= min_order;
        Self {
            case: case.into(),
            coarse: Some(coarse),
            fine,
            order: order.is_finite().then_some(order),
            tolerance,
            min_order: Some(min_order),
            passed: fine <= tolerance && order_ok,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub resolutions: Vec<usize>,
    pub passed: bool,
    pub entries: Vec<Entry>,
}

fn finish(suite: &str, resolutions: Vec<usize>, entries: Vec<Entry>) -> SuiteResult {
    SuiteResult { suite: suite.into(), resolutions, passed: entries.iter().all(|e| e.passed), entries }
}

pub fn run(name: &str, cfg: &RunConfig) -> Result<SuiteResult, ConfigError> {
    let ts = cfg.tol_scale;
    match name {
        "traces" => Ok(traces(cfg, ts)),
        "maclaurin" => Ok(maclaurin(cfg, ts)),
        "discriminant" => discriminant(cfg, ts),
        "minkowski" => minkowski(cfg, ts),
        "first-variation" => first_variation(cfg, ts),
        "volume" => volume(cfg, ts),
        "closed-form" => closed_form(cfg, ts),
        "symmetry" => symmetry(cfg, ts),
        other => Err(ConfigError::Invalid(format!("unknown suite {other:?}"))),
    }
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn traces(cfg: &RunConfig, ts: f64) -> SuiteResult {
    let n = cfg.n;
    let mut rng = rng(cfg);
    let mut worst = [0.0f64; 7];
    for _ in 0..cfg.samples {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a_f = &b * b.transpose() + DMatrix::identity(n, n) * 0.3;
        let c = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = (&c + c.transpose()) * 0.5;
        let p = CurvaturePoint::new(&a_f, &s).expect("SPD A_F and symmetric S");
        let scale = p.spectral_radius().max(1.0);
        let cp = sigma_charpoly(&p.s_f).expect("square");
        for r in 0..=n {
            let e = sigma_eps(&p.s_f, r).expect("r <= n");
            worst[0] = worst[0].max((e - cp[r]).abs() / scale.powi(r as i32));
        }
        let rec = newton_recurrence(&p.s_f, &cp);
        for r in 0..n {
            if let Ok(eps) = newton_eps(&p.s_f, r) {
                worst[1] = worst[1].max(max_abs(&(&eps - &rec[r])) / scale.powi(r as i32));
            }
            worst[5] = worst[5].max(max_abs(&(&p.t[r] - p.t[r].transpose())) / max_abs(&p.t[r]).max(1.0));
            let pin = (r as f64 + 1.0) * p.sigma_at(r + 1) - b_coeff(n, r) * p.h[r + 1];
            worst[6] = worst[6].max(pin.abs() / scale.powi(r as i32 + 1));
        }
        for t in trace_checks(&p) {
            let s = scale.powi(t.r as i32 + 2);
            worst[2] = worst[2].max(t.trace / s);
            worst[3] = worst[3].max(t.trace_sf / s);
            worst[4] = worst[4].max(t.trace_sf2 / s);
        }
    }
    let names = ["sigma", "newton", "trace", "trace-sf", "trace-sf2", "t-symmetry", "normalization"];
    let tols = [1e-10, 1e-8, 1e-8, 1e-8, 1e-8, 1e-10, 1e-12];
    let entries = (0..7).map(|i| Entry::single(names[i], worst[i], tols[i] * ts)).collect();
    finish("traces", vec![], entries)
}

/// Principal curvatures in the cone `H_1..H_{r+1} > 0`, a tenth of them umbilic.
fn curvature_samples(cfg: &RunConfig) -> Vec<(Vec<f64>, usize)> {
    let n = cfg.n;
    let mut rng = rng(cfg);
    let mut out = Vec::with_capacity(cfg.samples);
    while out.len() < cfg.samples {
        let r = rng.gen_range(0..n);
        let kappa: Vec<f64> =
            if out.len() % 10 == 0 { vec![rng.gen_range(0.1..3.0); n] } else { (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect() };
        let h = normalized_means(&kappa);
        if (1..=r + 1).all(|j| h[j] > 0.0) {
            out.push((kappa, r));
        }
    }
    out
}

fn maclaurin(cfg: &RunConfig, ts: f64) -> SuiteResult {
    let (mut min_gap, mut stray) = (f64::INFINITY, 0usize);
    for (kappa, r) in curvature_samples(cfg) {
        let rep = maclaurin_check(&kappa, r).expect("r < n");
        min_gap = min_gap.min(rep.min_gap);
        let spread = kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - kappa.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > 1e-6 && rep.gaps.iter().any(|g| g.abs() <= 1e-10) {
            stray += 1;
        }
    }
    let min_gap = if min_gap.is_finite() { min_gap } else { 0.0 };
    finish(
        "maclaurin",
        vec![],
        vec![Entry::single("negative-gap", (-min_gap).max(0.0), 1e-10 * ts), Entry::single("non-umbilic-equalities", stray as f64, 0.0)],
    )
}

fn discriminant(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let (mut delta, mut poly) = (0.0f64, 0.0f64);
    for (kappa, r) in curvature_samples(cfg) {
        let h = normalized_means(&kappa);
        let f_nu = rng.gen_range(0.5..2.0);
        let beta = rng.gen_range(-2.0..2.0);
        for j in 0..=r {
            let d = discriminant_p(j, f_nu, beta, &h)?;
            delta = delta.max(d.delta / d.scale.max(1e-300));
            for i in 0..201 {
                poly = poly.max(-d.eval(-5.0 + 0.05 * i as f64));
            }
        }
    }
    Ok(finish(
        "discriminant",
        vec![],
        vec![Entry::single("positive-delta", delta.max(0.0), 1e-10 * ts), Entry::single("negative-p", poly.max(0.0), 1e-10 * ts)],
    ))
}

/// Coarse and fine surfaces; `resolution` is the fine level.
fn pair(cfg: &RunConfig) -> Result<(SampledImmersion, SampledImmersion), ConfigError> {
    if cfg.resolution < 32 || !cfg.resolution.is_multiple_of(4) {
        return Err(ConfigError::Invalid(format!(
            "refinement suites need a resolution divisible by 4 and at least 32, got {}",
            cfg.resolution
        )));
    }
    Ok((cfg.build(cfg.resolution / 2)?, cfg.build(cfg.resolution)?))
}

fn minkowski(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let model = cfg.model()?;
    let (c, f) = pair(cfg)?;
    let (cf, ff) = (CurvatureField::compute(&c, &model)?, CurvatureField::compute(&f, &model)?);
    let mut entries = Vec::new();
    for r in 0..cfg.n {
        let a = minkowski_residual_with(&c, &cf, r)?;
        let b = minkowski_residual_with(&f, &ff, r)?;
        entries.push(Entry::refined(format!("r={r}"), a, b, 1e-5 * ts, 3.5f64.log2()));
    }
    Ok(finish("minkowski", vec![cfg.resolution / 2, cfg.resolution], entries))
}

/// A fixed degree-2 polynomial in the unit normal.
fn speed(imm: &SampledImmersion, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = imm.ambient_dim();
    let lin: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    imm.nodes()
        .iter()
        .map(|g| {
            let p = &g.normal;
            let mut v = lin[m];
            for i in 0..m {
                v += lin[i] * p[i];
                for j in 0..m {
                    v += quad[i * m + j] * p[i] * p[j];
                }
            }
            v
        })
        .collect()
}

fn first_variation(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let model = cfg.model()?;
    let imm = cfg.build(cfg.resolution)?;
    let family = VariationFamily::new(imm.clone(), speed(&imm, cfg.seed))?;
    let table = first_variation_table(&family, &[&model])?;
    let entries = table.area[0]
        .iter()
        .enumerate()
        .map(|(r, c)| Entry::single(format!("r={r}"), c.gap, (1e-4 * c.formula_value.abs()).max(1e-6) * ts))
        .collect();
    Ok(finish("first-variation", vec![cfg.resolution], entries))
}

fn volume(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let imm = cfg.build(cfg.resolution)?;
    let family = VariationFamily::new(imm.clone(), speed(&imm, cfg.seed))?;
    let c = volume_variation_check(&family)?;
    Ok(finish("volume", vec![cfg.resolution], vec![Entry::single("volume", c.gap, 1e-6 * ts)]))
}

fn closed_form(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let model = cfg.model()?;
    let (c, f) = pair(cfg)?;
    let pc = StabilityProblem::new(&c, &model, 0, 0, &[1.0])?;
    let pf = StabilityProblem::new(&f, &model, 0, 0, &[1.0])?;
    let mut entries = Vec::new();
    for j in 0..cfg.n {
        let a = closed_form_residuals(&pc, j)?.max_norm(&c.interior_mask());
        let b = closed_form_residuals(&pf, j)?.max_norm(&f.interior_mask());
        entries.push(Entry::refined(format!("j={j} support"), a.0, b.0, 1e-4 * ts, 2.0));
        entries.push(Entry::refined(format!("j={j} anisotropy"), a.1, b.1, 1e-4 * ts, 2.0));
    }
    Ok(finish("closed-form", vec![cfg.resolution / 2, cfg.resolution], entries))
}

fn symmetry(cfg: &RunConfig, ts: f64) -> Result<SuiteResult, ConfigError> {
    let model = cfg.model()?;
    let imm = cfg.build(cfg.resolution)?;
    let prob = StabilityProblem::new(&imm, &model, 0, 0, &[1.0])?;
    let (f, g) = (speed(&imm, cfg.seed), speed(&imm, cfg.seed.wrapping_add(7)));
    let mut entries = Vec::new();
    for j in 0..cfg.n {
        let (if_, ig) = (op_ij(&prob, j, &f)?, op_ij(&prob, j, &g)?);
        let gif: Vec<f64> = g.iter().zip(&if_).map(|(a, b)| a * b).collect();
        let fig: Vec<f64> = f.iter().zip(&ig).map(|(a, b)| a * b).collect();
        let scale = imm.integrate(&gif.iter().map(|v| v.abs()).collect::<Vec<_>>())?
            + imm.integrate(&fig.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
        let gap = (imm.integrate(&gif)? - imm.integrate(&fig)?).abs() / scale.max(1e-300);
        entries.push(Entry::single(format!("j={j}"), gap, 1e-6 * ts));
    }
    Ok(finish("symmetry", vec![cfg.resolution], entries))
}
