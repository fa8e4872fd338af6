//! Anisotropy functions on the unit sphere.
//!
//! A model stores its degree-1 homogeneous extension `F̃(y) = |y| F(y/|y|)`
//! to `R^{n+1} \ {0}`. All derivatives of `F` needed downstream come from
//! that extension: the spherical gradient is the tangential part of
//! `∇F̃`, and the operator `A_F = ∇dF + F·Id` on `T_x S^n` is the ambient
//! Hessian of `F̃` restricted to `x^⊥`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{orthonormal_complement, SphereGrid};

const UNIT_TOL: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Which family an [`AnisotropyModel`] belongs to.
#[derive(Clone)]
pub enum AnisotropyKind {
    /// `F ≡ 1`.
    Isotropic,
    /// `F̃(y) = sqrt(yᵀ Q y)` with `Q` symmetric positive definite.
    Quadric(DMatrix<f64>),
    /// `F̃(y) = (Σ y_i^p)^{1/p}` for even `p ≥ 2`.
    PNorm(u32),
    /// User supplied extension; derivatives by central differences.
    Custom { name: String, eval: ScalarFn },
}

impl fmt::Debug for AnisotropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnisotropyKind::Isotropic => write!(f, "Isotropic"),
            AnisotropyKind::Quadric(q) => write!(f, "Quadric({:?})", q.as_slice()),
            AnisotropyKind::PNorm(p) => write!(f, "PNorm({p})"),
            AnisotropyKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// An anisotropy function `F : S^n → R_+` together with its derivatives.
#[derive(Clone, Debug)]
pub struct AnisotropyModel {
    kind: AnisotropyKind,
    ambient_dim: usize,
}

/// Structured-text description of a model, as found in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AnisotropySpec {
    Isotropic,
    Quadric {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Pnorm {
        p: u32,
    },
    /// Zonal model `F(x) = Σ_l c_l P_l(x_last)` (Legendre polynomials).
    /// Evaluated through the finite-difference derivative path.
    Zonal {
        coeffs: Vec<f64>,
    },
}

impl AnisotropySpec {
    pub fn build(&self, ambient_dim: usize) -> Result<AnisotropyModel> {
        match self {
            AnisotropySpec::Isotropic => AnisotropyModel::isotropic(ambient_dim),
            AnisotropySpec::Quadric { q } => {
                if q.len() != ambient_dim || q.iter().any(|row| row.len() != ambient_dim) {
                    return Err(Error::ModelValidity(format!("quadric matrix must be {ambient_dim}x{ambient_dim}")));
                }
                let flat: Vec<f64> = q.iter().flatten().copied().collect();
                AnisotropyModel::quadric(DMatrix::from_row_slice(ambient_dim, ambient_dim, &flat))
            }
            AnisotropySpec::Pnorm { p } => AnisotropyModel::pnorm(*p, ambient_dim),
            AnisotropySpec::Zonal { coeffs } => AnisotropyModel::zonal(coeffs.clone(), ambient_dim),
        }
    }
}

/// Result of scanning the smallest eigenvalue of `A_F` over a sphere grid.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub min_eigenvalue: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    pub accepted: bool,
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

impl AnisotropyModel {
    pub fn isotropic(ambient_dim: usize) -> Result<Self> {
        check_dim(ambient_dim)?;
        Ok(Self { kind: AnisotropyKind::Isotropic, ambient_dim })
    }

    pub fn quadric(q: DMatrix<f64>) -> Result<Self> {
        let m = q.nrows();
        check_dim(m)?;
        if q.ncols() != m {
            return Err(Error::ModelValidity("quadric matrix must be square".into()));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(Error::ModelValidity(format!("quadric matrix not symmetric ({asym:e})")));
        }
        let min_eig = SymmetricEigen::new(q.clone()).eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::ModelValidity(format!("quadric matrix not positive definite (min eigenvalue {min_eig:e})")));
        }
        Ok(Self { kind: AnisotropyKind::Quadric(q), ambient_dim: m })
    }

    pub fn pnorm(p: u32, ambient_dim: usize) -> Result<Self> {
        check_dim(ambient_dim)?;
        if p < 2 || !p.is_multiple_of(2) {
            return Err(Error::ModelValidity(format!("p-norm exponent must be even and >= 2, got {p}")));
        }
        Ok(Self { kind: AnisotropyKind::PNorm(p), ambient_dim })
    }

    /// Wraps an arbitrary evaluator of the 1-homogeneous extension.
    pub fn custom(ambient_dim: usize, name: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        check_dim(ambient_dim)?;
        Ok(Self { kind: AnisotropyKind::Custom { name: name.into(), eval: Arc::new(eval) }, ambient_dim })
    }

    /// Zonal model `Σ c_l P_l(x_last)`, extended 1-homogeneously.
    pub fn zonal(coeffs: Vec<f64>, ambient_dim: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::ModelValidity("zonal model needs at least one coefficient".into()));
        }
        let name = format!("zonal{coeffs:?}");
        Self::custom(ambient_dim, name, move |y: &[f64]| {
            let r = norm(y);
            let z = y[y.len() - 1] / r;
            r * coeffs.iter().enumerate().map(|(l, c)| c * legendre(l, z)).sum::<f64>()
        })
    }

    pub fn kind(&self) -> &AnisotropyKind {
        &self.kind
    }

    /// Dimension of the ambient space `R^{n+1}`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.kind, AnisotropyKind::Isotropic)
    }

    /// `F(-x) = F(x)` for every built-in family except custom ones.
    pub fn is_even(&self) -> bool {
        !matches!(self.kind, AnisotropyKind::Custom { .. })
    }

    pub fn extension_eval(&self, y: &[f64]) -> f64 {
        match &self.kind {
            AnisotropyKind::Isotropic => norm(y),
            AnisotropyKind::Quadric(q) => quad_form(q, y).sqrt(),
            AnisotropyKind::PNorm(p) => {
                let s: f64 = y.iter().map(|v| v.powi(*p as i32)).sum();
                s.powf(1.0 / *p as f64)
            }
            AnisotropyKind::Custom { eval, .. } => eval(y),
        }
    }

    pub fn extension_grad(&self, y: &[f64]) -> DVector<f64> {
        let m = y.len();
        match &self.kind {
            AnisotropyKind::Isotropic => {
                let r = norm(y);
                DVector::from_iterator(m, y.iter().map(|v| v / r))
            }
            AnisotropyKind::Quadric(q) => {
                let yv = DVector::from_column_slice(y);
                let qy = q * &yv;
                let f = yv.dot(&qy).sqrt();
                qy / f
            }
            AnisotropyKind::PNorm(p) => {
                let p = *p as i32;
                let f = self.extension_eval(y);
                DVector::from_iterator(m, y.iter().map(|v| (v / f).powi(p - 1)))
            }
            AnisotropyKind::Custom { eval, .. } => {
                let h = 1e-5 * norm(y);
                let mut g = DVector::zeros(m);
                let mut yp = y.to_vec();
                for i in 0..m {
                    yp[i] = y[i] + h;
                    let fp = eval(&yp);
                    yp[i] = y[i] - h;
                    let fm = eval(&yp);
                    yp[i] = y[i];
                    g[i] = (fp - fm) / (2.0 * h);
                }
                g
            }
        }
    }

    pub fn extension_hess(&self, y: &[f64]) -> DMatrix<f64> {
        let m = y.len();
        match &self.kind {
            AnisotropyKind::Isotropic => {
                let r = norm(y);
                let yv = DVector::from_column_slice(y);
                (DMatrix::identity(m, m) - &yv * yv.transpose() / (r * r)) / r
            }
            AnisotropyKind::Quadric(q) => {
                let yv = DVector::from_column_slice(y);
                let qy = q * &yv;
                let f = yv.dot(&qy).sqrt();
                q / f - &qy * qy.transpose() / (f * f * f)
            }
            AnisotropyKind::PNorm(p) => {
                let p = *p as i32;
                let pf = p as f64;
                let f = self.extension_eval(y);
                let u: Vec<f64> = y.iter().map(|v| v / f).collect();
                let mut h = DMatrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        let mut v = (1.0 - pf) * u[i].powi(p - 1) * u[j].powi(p - 1);
                        if i == j {
                            v += (pf - 1.0) * u[i].powi(p - 2);
                        }
                        h[(i, j)] = v / f;
                    }
                }
                h
            }
            AnisotropyKind::Custom { eval, .. } => {
                let h = 1e-5 * norm(y);
                let mut out = DMatrix::zeros(m, m);
                let mut yp = y.to_vec();
                let mut at = |di: usize, si: f64, dj: usize, sj: f64| {
                    yp.copy_from_slice(y);
                    yp[di] += si * h;
                    yp[dj] += sj * h;
                    eval(&yp)
                };
                for i in 0..m {
                    for j in i..m {
                        let v = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0)) / (4.0 * h * h);
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
                out
            }
        }
    }

    fn check_unit(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::InputDomain(format!("expected a vector in R^{}, got length {}", self.ambient_dim, x.len())));
        }
        let r = norm(x);
        if (r - 1.0).abs() > UNIT_TOL {
            return Err(Error::InputDomain(format!("|x| = {r} is not 1")));
        }
        Ok(())
    }

    /// `F(x)` for a unit vector `x`.
    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        self.check_unit(x)?;
        let v = self.extension_eval(x);
        if !(v > 0.0) {
            return Err(Error::ModelValidity(format!("F(x) = {v} is not positive at {x:?}")));
        }
        Ok(v)
    }

    /// Gradient of `F` on the sphere at unit `x`, as an ambient vector.
    pub fn sphere_gradient(&self, x: &[f64]) -> DVector<f64> {
        let g = self.extension_grad(x);
        let radial: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        DVector::from_iterator(x.len(), g.iter().zip(x).map(|(gi, xi)| gi - radial * xi))
    }

    /// Matrix of `A_F = ∇dF + F·Id` in the orthonormal tangent frame whose
    /// rows are given in `frame` (n × (n+1)).
    pub fn a_f_operator(&self, x: &[f64], frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_unit(x)?;
        check_frame(x, frame)?;
        Ok(self.a_f_unchecked(x, frame))
    }

    pub(crate) fn a_f_unchecked(&self, x: &[f64], frame: &DMatrix<f64>) -> DMatrix<f64> {
        let h = self.extension_hess(x);
        let a = frame * h * frame.transpose();
        (&a + a.transpose()) * 0.5
    }

    /// Cahn–Hoffman map `φ(x) = F(x)x + ∇_{S^n}F(x) = ∇F̃(x)`.
    pub fn cahn_hoffman(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_unit(x)?;
        Ok(self.extension_grad(x))
    }

    /// Smallest eigenvalue of `A_F` over a pole-offset angular grid with
    /// `resolution` nodes per polar angle.
    pub fn convexity_scan(&self, resolution: usize) -> Result<ConvexityReport> {
        if resolution < 8 {
            return Err(Error::InputDomain(format!("scan resolution must be >= 8, got {resolution}")));
        }
        let grid = SphereGrid::new(self.ambient_dim, resolution)?;
        let points = grid.points();
        let mins = crate::parallel::map_nodes(points.len(), |k| {
            let x = &points[k];
            let frame = orthonormal_complement(x);
            let a = self.a_f_unchecked(x, &frame);
            SymmetricEigen::new(a).eigenvalues.min()
        });
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for (k, v) in mins.iter().enumerate() {
            if *v < best {
                best = *v;
                arg = k;
            }
        }
        Ok(ConvexityReport { min_eigenvalue: best, argmin: points[arg].clone(), samples: points.len(), accepted: best > 0.0 })
    }

    /// Fails with [`Error::ConvexityViolation`] unless the scan is positive.
    pub fn require_convex(&self, resolution: usize) -> Result<ConvexityReport> {
        let report = self.convexity_scan(resolution)?;
        if !report.accepted {
            return Err(Error::ConvexityViolation(format!("min eigenvalue of A_F is {:e} at {:?}", report.min_eigenvalue, report.argmin)));
        }
        Ok(report)
    }
}

fn check_dim(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InputDomain(format!("ambient dimension must be >= 2, got {m}")));
    }
    Ok(())
}

fn quad_form(q: &DMatrix<f64>, y: &[f64]) -> f64 {
    let m = y.len();
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += y[i] * q[(i, j)] * y[j];
        }
    }
    s
}

fn check_frame(x: &[f64], frame: &DMatrix<f64>) -> Result<()> {
    let n = x.len() - 1;
    if frame.nrows() != n || frame.ncols() != x.len() {
        return Err(Error::InputDomain(format!("frame must be {n}x{}, got {}x{}", x.len(), frame.nrows(), frame.ncols())));
    }
    for a in 0..n {
        let ea = frame.row(a);
        let tangency: f64 = ea.iter().zip(x).map(|(u, v)| u * v).sum();
        if tangency.abs() > UNIT_TOL {
            return Err(Error::InputDomain(format!("frame vector {a} is not tangent ({tangency:e})")));
        }
        for b in 0..n {
            let d = ea.dot(&frame.row(b)) - if a == b { 1.0 } else { 0.0 };
            if d.abs() > UNIT_TOL {
                return Err(Error::InputDomain(format!("frame is not orthonormal at ({a},{b})")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag411() -> AnisotropyModel {
        AnisotropyModel::quadric(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0]))).unwrap()
    }

    fn models() -> Vec<AnisotropyModel> {
        vec![
            AnisotropyModel::isotropic(3).unwrap(),
            diag411(),
            AnisotropyModel::pnorm(4, 3).unwrap(),
            AnisotropyModel::quadric(DMatrix::from_row_slice(
                4,
                4,
                &[3.0, 0.4, 0.0, 0.1, 0.4, 2.0, 0.2, 0.0, 0.0, 0.2, 1.5, 0.3, 0.1, 0.0, 0.3, 1.0],
            ))
            .unwrap(),
            AnisotropyModel::pnorm(6, 4).unwrap(),
        ]
    }

    fn sample_dirs(m: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for k in 0..40 {
            let t = k as f64 * 0.7317 + 0.1;
            let mut y: Vec<f64> = (0..m).map(|i| ((i + 1) as f64 * t).sin() + 0.3 * (i as f64)).collect();
            let r = norm(&y);
            y.iter_mut().for_each(|v| *v /= r);
            out.push(y);
        }
        out
    }

    #[test]
    fn eval_examples() {
        let iso = AnisotropyModel::isotropic(3).unwrap();
        assert_abs_diff_eq!(iso.eval_f(&[0.0, 0.6, 0.8]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(diag411().eval_f(&[1.0, 0.0, 0.0]).unwrap(), 2.0, epsilon = 1e-15);
        let p4 = AnisotropyModel::pnorm(4, 3).unwrap();
        assert_abs_diff_eq!(p4.eval_f(&[1.0, 0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_non_unit_and_non_positive() {
        let iso = AnisotropyModel::isotropic(3).unwrap();
        assert!(matches!(iso.eval_f(&[1.0, 1.0, 0.0]), Err(Error::InputDomain(_))));
        let neg = AnisotropyModel::custom(3, "neg", |y: &[f64]| -norm(y)).unwrap();
        assert!(matches!(neg.eval_f(&[1.0, 0.0, 0.0]), Err(Error::ModelValidity(_))));
    }

    #[test]
    fn constructors_validate() {
        assert!(AnisotropyModel::pnorm(3, 3).is_err());
        assert!(AnisotropyModel::quadric(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(AnisotropyModel::quadric(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }

    #[test]
    fn homogeneity_euler_and_radial_annihilation() {
        for model in models() {
            for x in sample_dirs(model.ambient_dim()) {
                let f = model.extension_eval(&x);
                let scaled: Vec<f64> = x.iter().map(|v| 2.7 * v).collect();
                assert!((model.extension_eval(&scaled) - 2.7 * f).abs() <= 1e-10 * f);
                let g = model.extension_grad(&x);
                let euler: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
                assert!((euler - f).abs() <= 1e-10 * f, "{model:?}");
                let h = model.extension_hess(&x);
                let hx = &h * DVector::from_column_slice(&x);
                assert!(hx.amax() <= 1e-10 * h.amax().max(1.0), "{model:?}: {}", hx.amax());
            }
        }
    }

    #[test]
    fn a_f_examples() {
        let iso = AnisotropyModel::isotropic(3).unwrap();
        let x = [0.0, 0.6, 0.8];
        let frame = orthonormal_complement(&x);
        let a = iso.a_f_operator(&x, &frame).unwrap();
        assert!((a - DMatrix::identity(2, 2)).amax() < 1e-14);

        let frame = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let a = diag411().a_f_operator(&[1.0, 0.0, 0.0], &frame).unwrap();
        assert!((a - DMatrix::from_diagonal_element(2, 2, 0.5)).amax() < 1e-14);
    }

    #[test]
    fn a_f_rejects_bad_frames() {
        let bad = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(diag411().a_f_operator(&[1.0, 0.0, 0.0], &bad).is_err());
    }

    #[test]
    fn a_f_matches_intrinsic_second_differences() {
        // d²/ds² F(cos s x + sin s e) at s = 0 equals e·(∇dF)·e; adding F gives A_F(e, e).
        for model in models() {
            for x in sample_dirs(model.ambient_dim()).into_iter().take(8) {
                let frame = orthonormal_complement(&x);
                let a = model.a_f_operator(&x, &frame).unwrap();
                let f0 = model.extension_eval(&x);
                let along = |e: &[f64], s: f64| {
                    let p: Vec<f64> = x.iter().zip(e).map(|(xi, ei)| s.cos() * xi + s.sin() * ei).collect();
                    model.extension_eval(&p)
                };
                let err_at = |h: f64| {
                    let mut err: f64 = 0.0;
                    for i in 0..frame.nrows() {
                        let e: Vec<f64> = frame.row(i).iter().copied().collect();
                        let d2 = (along(&e, h) - 2.0 * f0 + along(&e, -h)) / (h * h);
                        err = err.max((d2 + f0 - a[(i, i)]).abs());
                    }
                    err
                };
                let (e1, e2) = (err_at(1e-2), err_at(5e-3));
                assert!(e1 < 1e-2 * a.amax().max(1.0), "{model:?} {e1}");
                assert!(e2 < e1 / 3.0 || e2 < 1e-8, "{model:?}: {e1} -> {e2}");
            }
        }
    }

    #[test]
    fn frame_covariance() {
        let model = diag411();
        let x = sample_dirs(3)[3].clone();
        let frame = orthonormal_complement(&x);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let a = model.a_f_operator(&x, &frame).unwrap();
        let a2 = model.a_f_operator(&x, &(&rot * &frame)).unwrap();
        assert!((a2 - &rot * a * rot.transpose()).amax() < 1e-10);
    }

    #[test]
    fn cahn_hoffman_examples() {
        let z = diag411().cahn_hoffman(&[1.0, 0.0, 0.0]).unwrap();
        assert!((z - DVector::from_vec(vec![2.0, 0.0, 0.0])).amax() < 1e-15);
        let iso = AnisotropyModel::isotropic(3).unwrap();
        let x = sample_dirs(3)[5].clone();
        let z = iso.cahn_hoffman(&x).unwrap();
        assert!((z - DVector::from_vec(x)).amax() < 1e-15);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0]));
        let qinv = q.clone().try_inverse().unwrap();
        for x in sample_dirs(3) {
            let z = diag411().cahn_hoffman(&x).unwrap();
            assert!(((z.transpose() * &qinv * &z)[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn convexity_scan_examples() {
        let iso = AnisotropyModel::isotropic(3).unwrap().convexity_scan(16).unwrap();
        assert!((iso.min_eigenvalue - 1.0).abs() < 1e-12 && iso.accepted);
        let q = diag411().convexity_scan(32).unwrap();
        assert!(q.accepted && q.min_eigenvalue > 0.0);
        let dip = AnisotropyModel::zonal(vec![1.0, 0.0, 0.0, 0.0, 0.3], 3).unwrap();
        let r = dip.convexity_scan(32).unwrap();
        assert!(!r.accepted && r.min_eigenvalue < 0.0);
        assert!(dip.require_convex(32).is_err());
        assert!(diag411().convexity_scan(4).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let spec: AnisotropySpec = serde_json::from_str(r#"{"kind":"quadric","Q":[[4,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
        let m = spec.build(3).unwrap();
        assert_abs_diff_eq!(m.eval_f(&[1.0, 0.0, 0.0]).unwrap(), 2.0, epsilon = 1e-15);
        let p: AnisotropySpec = serde_json::from_str(r#"{"kind":"pnorm","p":4}"#).unwrap();
        assert_eq!(p, AnisotropySpec::Pnorm { p: 4 });
        assert!(serde_json::from_str::<AnisotropySpec>(r#"{"kind":"pnorm","p":4,"x":1}"#).is_err());
        assert!(AnisotropySpec::Quadric { q: vec![vec![1.0]] }.build(3).is_err());
    }
}
