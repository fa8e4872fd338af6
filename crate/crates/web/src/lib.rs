//! wasm-bindgen wrappers for the static page in `www/`.
//!
//! Three calls: sample a Wulff shape with its mean curvature, the curvature
//! invariants of a list of principal curvatures, and the stability report
//! of a surface/model pair.

use nalgebra::DMatrix;
use wasm_bindgen::prelude::*;

use wulff_core::anisotropy::AnisotropyModel;
use wulff_core::curvalg::{maclaurin_check, normalized_means};
use wulff_core::functionals::CurvatureField;
use wulff_core::geometry::{BuildOptions, SampledImmersion};
use wulff_core::stability::{theorem_pipeline, StabilityProblem, Tolerances};

const MAX_RESOLUTION: usize = 64;

fn model(kind: &str, param: f64) -> Result<AnisotropyModel, String> {
    let m = match kind {
        "isotropic" => AnisotropyModel::isotropic(3),
        "quadric" => AnisotropyModel::quadric(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![param, 1.0, 1.0]))),
        "pnorm" => {
            if param.fract() != 0.0 || param < 2.0 {
                return Err(format!("p must be an even integer >= 2, got {param}"));
            }
            AnisotropyModel::pnorm(param as u32, 3)
        }
        other => return Err(format!("unknown model {other:?}")),
    };
    m.map_err(|e| e.to_string())
}

fn check_resolution(resolution: usize) -> Result<(), String> {
    if !(8..=MAX_RESOLUTION).contains(&resolution) || !resolution.is_multiple_of(2) {
        return Err(format!("resolution must be even and in 8..={MAX_RESOLUTION}"));
    }
    Ok(())
}

/// `[x, y, z, H_1]` per node of the Wulff shape, flattened.
pub fn wulff_samples(kind: &str, param: f64, resolution: usize) -> Result<Vec<f64>, String> {
    check_resolution(resolution)?;
    let model = model(kind, param)?;
    model.require_convex(32).map_err(|e| e.to_string())?;
    let imm = SampledImmersion::wulff(&model, 1.0, BuildOptions::new(resolution)).map_err(|e| e.to_string())?;
    let field = CurvatureField::compute(&imm, &model).map_err(|e| e.to_string())?;
    let h1 = field.h(1);
    let mut out = Vec::with_capacity(4 * imm.len());
    for (g, h) in imm.nodes().iter().zip(h1) {
        out.extend(g.position.iter());
        out.push(h);
    }
    Ok(out)
}

/// `H_0..H_n` followed by the smallest Maclaurin gap for `r = n - 1`
/// (`NaN` outside the cone where the inequalities apply).
pub fn invariants(kappa: &[f64]) -> Result<Vec<f64>, String> {
    if kappa.len() < 2 || kappa.len() > 8 || kappa.iter().any(|k| !k.is_finite()) {
        return Err("give between 2 and 8 finite curvatures".into());
    }
    let n = kappa.len();
    let mut out = normalized_means(kappa);
    out.truncate(n + 1);
    let rep = maclaurin_check(kappa, n - 1).map_err(|e| e.to_string())?;
    out.push(if rep.in_positive_cone { rep.min_gap } else { f64::NAN });
    Ok(out)
}

/// Stability report as JSON for `r = s = 0` (`n = 2` allows nothing else).
pub fn stability(surface: &str, kind: &str, param: f64, resolution: usize) -> Result<String, String> {
    check_resolution(resolution)?;
    let model = model(kind, param)?;
    let opts = BuildOptions::new(resolution);
    let imm = match surface {
        "sphere" => SampledImmersion::sphere(2, 1.0, opts),
        "ellipsoid" => SampledImmersion::ellipsoid(&[1.3, 1.0, 0.8], opts),
        "wulff" => SampledImmersion::wulff(&model, 1.0, opts),
        other => return Err(format!("unknown surface {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let problem = StabilityProblem::new(&imm, &model, 0, 0, &[1.0]).map_err(|e| e.to_string())?;
    let report = theorem_pipeline(&problem, &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

#[wasm_bindgen(js_name = wulffSamples)]
pub fn wulff_samples_js(kind: &str, param: f64, resolution: usize) -> Result<Vec<f64>, JsError> {
    wulff_samples(kind, param, resolution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = curvatureInvariants)]
pub fn invariants_js(kappa: Vec<f64>) -> Result<Vec<f64>, JsError> {
    invariants(&kappa).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = stabilityReport)]
pub fn stability_js(surface: &str, kind: &str, param: f64, resolution: usize) -> Result<String, JsError> {
    stability(surface, kind, param, resolution).map_err(|e| JsError::new(&e))
}
