//! Hyperspherical coordinates on `S^n ⊂ R^{n+1}` and pole-offset grids.
//!
//! Angles `u_0 .. u_{n-2}` are polar (range `(0, π)`), `u_{n-1}` is the
//! azimuth (period `2π`):
//!
//! ```text
//! p = (s_0⋯s_{n-2} cos u_{n-1}, s_0⋯s_{n-2} sin u_{n-1}, s_0⋯s_{n-3} cos u_{n-2}, …, cos u_0)
//! ```
//!
//! Negating polar angle `u_i` is the same point as flipping every later polar
//! angle (`u → π - u`) and shifting the azimuth by `π`. Grids use this to
//! extend stencils across the poles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Point of `S^n` at hyperspherical angles `u` (length `n`).
pub fn sphere_point(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let m = n + 1;
    let mut p = vec![0.0; m];
    let mut s = 1.0;
    for (i, ui) in u.iter().enumerate().take(n - 1) {
        p[m - 1 - i] = s * ui.cos();
        s *= ui.sin();
    }
    let az = u[n - 1];
    p[0] = s * az.cos();
    p[1] = s * az.sin();
    p
}

/// Chart derivatives `∂p/∂u_j` of [`sphere_point`], one per row.
pub fn sphere_jacobian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let m = n + 1;
    let mut jac = DMatrix::zeros(n, m);
    for j in 0..n {
        // Same products as sphere_point with the u_j factor differentiated.
        let mut s = 1.0;
        for (i, ui) in u.iter().enumerate().take(n - 1) {
            let (c, sn) = if i == j { (-ui.sin(), ui.cos()) } else { (ui.cos(), ui.sin()) };
            jac[(j, m - 1 - i)] = if i >= j { s * c } else { 0.0 };
            s *= sn;
        }
        let az = u[n - 1];
        if j == n - 1 {
            jac[(j, 0)] = -s * az.sin();
            jac[(j, 1)] = s * az.cos();
        } else {
            jac[(j, 0)] = s * az.cos();
            jac[(j, 1)] = s * az.sin();
        }
    }
    jac
}

/// Rows form an orthonormal basis of `x^⊥`.
pub fn orthonormal_complement(x: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    // Drop the coordinate direction most aligned with x.
    let skip = (0..m).max_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap()).unwrap_or(0);
    for k in (0..m).filter(|&k| k != skip) {
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        let d = x[k] / norm2;
        for i in 0..m {
            v[i] -= d * x[i];
        }
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
            for i in 0..m {
                v[i] -= d * b[i];
            }
        }
        let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= r);
        basis.push(v);
    }
    DMatrix::from_fn(m - 1, m, |a, i| basis[a][i])
}

/// Pole-offset angular grid on `S^n`: `N` nodes per polar angle at
/// `(k + 1/2)π/N`, `2N` azimuth nodes at `(k + 1/2)π/N`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    n: usize,
    resolution: usize,
}

impl SphereGrid {
    pub fn new(ambient_dim: usize, resolution: usize) -> Result<Self> {
        if ambient_dim < 3 {
            return Err(Error::InputDomain("sphere grids need ambient dimension >= 3".into()));
        }
        Ok(Self { n: ambient_dim - 1, resolution })
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let nn = self.resolution;
        let polar = self.n - 1;
        let mut dims = vec![nn; polar];
        dims.push(2 * nn);
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.n];
        for _ in 0..total {
            let u: Vec<f64> = idx.iter().map(|&k| (k as f64 + 0.5) * std::f64::consts::PI / nn as f64).collect();
            out.push(sphere_point(&u));
            for a in (0..self.n).rev() {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}
