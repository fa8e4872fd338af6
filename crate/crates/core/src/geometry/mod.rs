//! Closed hypersurfaces sampled on structured chart grids.
//!
//! Every surface is described by node positions on a [`ChartGrid`]; all
//! geometry (tangent frames, inward normals, shape operators, quadrature
//! weights) is recomputed from those positions with central differences
//! in chart coordinates. The Wulff builder knows the Cahn–Hoffman map and
//! its differential in closed form and passes exact tangents and normals
//! instead. Either way
//! the shape operator comes from the Weingarten equation
//! `b_ab = -⟨∂_a ν, ∂_b X⟩`, which needs first differences only. Stencils
//! near a pole are continued across it by the reflection rule of the
//! hyperspherical chart, so every node uses the same full-width stencil.
//!
//! Sign conventions: `ν` points into the enclosed body and `S = -dν`, so a
//! round sphere of radius `ρ` has `S = Id/ρ` and `⟨X, ν⟩ = -ρ`.

pub mod grid;
mod ops;
mod variation;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::anisotropy::{AnisotropyModel, AnisotropySpec};
use crate::error::{Error, Result};
use crate::parallel::{map_nodes, pairwise_sum};
use crate::sphere::{sphere_jacobian, sphere_point};

pub use grid::{Axis, AxisKind, ChartGrid, FdOrder, Topology};
use grid::{Stencil, MAX_HALF_WIDTH};
pub use ops::SupportSplit;
pub use variation::VariationFamily;

/// Angular distance from the chart poles used by [`SampledImmersion::interior_mask`].
pub const INTERIOR_MARGIN: f64 = std::f64::consts::PI / 8.0;

/// Geometry attached to one quadrature node.
#[derive(Clone, Debug)]
pub struct NodeGeometry {
    pub position: DVector<f64>,
    /// Inward unit normal.
    pub normal: DVector<f64>,
    /// Orthonormal tangent frame, one row per `e_a`.
    pub frame: DMatrix<f64>,
    /// Shape operator `S = -dν` in the frame (symmetric).
    pub shape: DMatrix<f64>,
    /// Quadrature weight: metric density times the chart rule.
    pub weight: f64,
    /// `sqrt(det g)` in chart coordinates.
    pub area_density: f64,
    /// Chart coordinate derivatives `∂_i X`, one per row.
    pub coord_basis: DMatrix<f64>,
    /// Inverse metric `g^{ij}`.
    pub metric_inv: DMatrix<f64>,
}

/// Resolution and stencil order for a build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub resolution: usize,
    pub fd_order: FdOrder,
}

impl BuildOptions {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, fd_order: FdOrder::default() }
    }

    pub fn with_fd_order(mut self, fd_order: FdOrder) -> Self {
        self.fd_order = fd_order;
        self
    }
}

/// Structured-text surface description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Sphere {
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Wulff {
        anisotropy: AnisotropySpec,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Torus {
        major: f64,
        minor: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

/// Quadrature-node discretization of a closed immersed hypersurface.
#[derive(Clone, Debug)]
pub struct SampledImmersion {
    grid: Arc<ChartGrid>,
    fd_order: FdOrder,
    stencil: Stencil,
    ambient: usize,
    positions: Arc<Vec<f64>>,
    params: Option<Arc<Vec<f64>>>,
    closed_form: bool,
    nodes: Vec<NodeGeometry>,
}

/// Closed-form first-order data of one node.
struct Exact {
    normal: DVector<f64>,
    tangents: DMatrix<f64>,
}

/// One node's row of the grid offset table.
pub(crate) struct Neighbors<'a> {
    pairs: &'a [u32],
}

impl SampledImmersion {
    /// Builds from a surface description. `n` is the hypersurface dimension.
    pub fn from_spec(spec: &SurfaceSpec, n: usize, opts: BuildOptions) -> Result<Self> {
        match spec {
            SurfaceSpec::Sphere { radius, center } => {
                let s = Self::sphere(n, *radius, opts)?;
                match center {
                    Some(c) => s.translated(c),
                    None => Ok(s),
                }
            }
            SurfaceSpec::Ellipsoid { semi_axes, center } => {
                if semi_axes.len() != n + 1 {
                    return Err(Error::InputDomain(format!("ellipsoid needs {} semi-axes", n + 1)));
                }
                let s = Self::ellipsoid(semi_axes, opts)?;
                match center {
                    Some(c) => s.translated(c),
                    None => Ok(s),
                }
            }
            SurfaceSpec::Wulff { anisotropy, scale } => {
                let model = anisotropy.build(n + 1)?;
                Self::wulff(&model, *scale, opts)
            }
            SurfaceSpec::Torus { major, minor } => {
                if n != 2 {
                    return Err(Error::InputDomain("the torus builder is only available for n = 2".into()));
                }
                Self::torus(*major, *minor, opts)
            }
        }
    }

    /// Round sphere of radius `radius` centred at the origin.
    pub fn sphere(n: usize, radius: f64, opts: BuildOptions) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InputDomain(format!("sphere radius must be positive, got {radius}")));
        }
        Self::from_sphere_map(n, opts, |p| p.iter().map(|v| radius * v).collect())
    }

    /// Ellipsoid `Σ (x_i / a_i)² = 1`.
    pub fn ellipsoid(semi_axes: &[f64], opts: BuildOptions) -> Result<Self> {
        if semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InputDomain("ellipsoid semi-axes must be positive".into()));
        }
        let axes = semi_axes.to_vec();
        Self::from_sphere_map(semi_axes.len() - 1, opts, move |p| p.iter().zip(&axes).map(|(v, a)| v * a).collect())
    }

    /// Wulff shape of `model`, scaled by `scale`.
    ///
    /// Parametrized as `X(p) = -scale·φ(-p)` with `φ` the Cahn–Hoffman map,
    /// so that its inward normal at `X(p)` is `-p` and `S_F = Id/scale`.
    /// For even models this is the usual `scale·φ(S^n)`.
    pub fn wulff(model: &AnisotropyModel, scale: f64, opts: BuildOptions) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InputDomain(format!("Wulff scale must be positive, got {scale}")));
        }
        let n = model.ambient_dim() - 1;
        let grid = Arc::new(ChartGrid::sphere(n, opts.resolution)?);
        let count = grid.node_count();
        let m = n + 1;
        let built = map_nodes(count, |k| {
            let u = grid.coords(k);
            let p = sphere_point(&u);
            let q: Vec<f64> = p.iter().map(|v| -v).collect();
            let x = model.extension_grad(&q) * -scale;
            // dX = scale·D²F(-p)·dp
            let tangents = sphere_jacobian(&u) * model.extension_hess(&q) * scale;
            (p, x, tangents)
        });
        let mut params = Vec::with_capacity(count * m);
        let mut positions = Vec::with_capacity(count * m);
        let mut exact = Vec::with_capacity(count);
        for (p, x, t) in built {
            exact.push(Exact { normal: DVector::from_iterator(m, p.iter().map(|v| -v)), tangents: t });
            params.extend(p);
            positions.extend(x.iter());
        }
        Self::assemble(grid, positions, Some(Arc::new(params)), Some(exact), opts.fd_order)
    }

    /// Torus of revolution around the `z` axis (`n = 2`).
    pub fn torus(major: f64, minor: f64, opts: BuildOptions) -> Result<Self> {
        if !(minor > 0.0 && major > minor) {
            return Err(Error::InputDomain(format!("torus needs 0 < minor < major, got {major}, {minor}")));
        }
        let grid = Arc::new(ChartGrid::torus(opts.resolution)?);
        let mut positions = Vec::with_capacity(grid.node_count() * 3);
        for node in 0..grid.node_count() {
            let u = grid.coords(node);
            let ring = major + minor * u[1].cos();
            positions.extend_from_slice(&[ring * u[0].cos(), ring * u[0].sin(), minor * u[1].sin()]);
        }
        Self::from_positions(grid, positions, None, opts.fd_order)
    }

    /// Builds a surface given as a map of the parameter sphere `S^n`.
    pub fn from_sphere_map(n: usize, opts: BuildOptions, map: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Result<Self> {
        let grid = Arc::new(ChartGrid::sphere(n, opts.resolution)?);
        let count = grid.node_count();
        let params: Vec<Vec<f64>> = (0..count).map(|k| sphere_point(&grid.coords(k))).collect();
        let mapped = map_nodes(count, |k| map(&params[k]));
        let mut positions = Vec::with_capacity(count * (n + 1));
        for x in &mapped {
            if x.len() != n + 1 {
                return Err(Error::InputDomain(format!("surface map must return points of R^{}", n + 1)));
            }
            positions.extend_from_slice(x);
        }
        let flat: Vec<f64> = params.into_iter().flatten().collect();
        Self::from_positions(grid, positions, Some(Arc::new(flat)), opts.fd_order)
    }

    /// Recomputes all geometry from node positions on `grid`.
    pub fn from_positions(grid: Arc<ChartGrid>, positions: Vec<f64>, params: Option<Arc<Vec<f64>>>, fd_order: FdOrder) -> Result<Self> {
        Self::assemble(grid, positions, params, None, fd_order)
    }

    fn assemble(
        grid: Arc<ChartGrid>,
        positions: Vec<f64>,
        params: Option<Arc<Vec<f64>>>,
        exact: Option<Vec<Exact>>,
        fd_order: FdOrder,
    ) -> Result<Self> {
        let n = grid.dim();
        let m = n + 1;
        let count = grid.node_count();
        if positions.len() != count * m {
            return Err(Error::InputDomain("position array does not match the grid".into()));
        }
        let size = positions.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut spread = 0.0f64;
        for c in 0..m {
            let (lo, hi) = positions[c..].iter().step_by(m).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
            spread = spread.max(hi - lo);
        }
        if !(spread > 1e-10 * (1.0 + size)) {
            return Err(Error::DegenerateMetric { node: 0, det: 0.0 });
        }
        if exact.as_ref().is_some_and(|v| v.len() != count) {
            return Err(Error::InputDomain("tangent data does not match the grid".into()));
        }
        let tables = grid.quadrature_tables();
        let mut imm = Self {
            grid: grid.clone(),
            fd_order,
            stencil: fd_order.stencil(),
            ambient: m,
            positions: Arc::new(positions),
            params,
            closed_form: exact.is_some(),
            nodes: Vec::new(),
        };
        let built = map_nodes(count, |k| imm.first_order(k, &tables, exact.as_ref().map(|e| &e[k])));
        let mut nodes = Vec::with_capacity(count);
        for r in built {
            nodes.push(r?);
        }
        let support: Vec<f64> = nodes.iter().map(|g| g.weight * g.position.dot(&g.normal)).collect();
        if pairwise_sum(&support) > 0.0 {
            for g in nodes.iter_mut() {
                g.normal.neg_mut();
            }
        }
        let normal_field: Vec<f64> = nodes.iter().flat_map(|g| g.normal.iter().copied()).collect();
        let shapes = map_nodes(count, |k| imm.shape_operator(k, &nodes[k], &normal_field));
        for (g, s) in nodes.iter_mut().zip(shapes) {
            g.shape = s;
        }
        imm.nodes = nodes;
        Ok(imm)
    }

    pub(crate) fn neighbors(&self, node: usize) -> Neighbors<'_> {
        let row = self.grid.dim() * MAX_HALF_WIDTH * 2;
        Neighbors { pairs: &self.grid.offset_table()[node * row..(node + 1) * row] }
    }

    /// First chart derivative along `axis` of component `c` of a strided field.
    pub(crate) fn d1(&self, nb: &Neighbors, data: &[f64], stride: usize, c: usize, axis: usize) -> f64 {
        let w = &self.stencil.first;
        let pairs = &nb.pairs[axis * MAX_HALF_WIDTH * 2..];
        let mut s = 0.0;
        for (o, wo) in w.iter().enumerate() {
            let (p, q) = (pairs[2 * o] as usize, pairs[2 * o + 1] as usize);
            s += wo * (data[p * stride + c] - data[q * stride + c]);
        }
        s / self.grid.axes[axis].spacing()
    }

    fn first_order(&self, k: usize, tables: &[Vec<f64>], exact: Option<&Exact>) -> Result<NodeGeometry> {
        let n = self.grid.dim();
        let m = self.ambient;
        let data = self.positions.as_slice();
        let coord_basis = match exact {
            Some(e) => e.tangents.clone(),
            None => {
                let nb = self.neighbors(k);
                DMatrix::from_fn(n, m, |a, c| self.d1(&nb, data, m, c, a))
            }
        };
        let g = &coord_basis * coord_basis.transpose();
        let det = g.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateMetric { node: k, det });
        }
        let metric_inv = g.clone().try_inverse().ok_or(Error::DegenerateMetric { node: k, det })?;

        let normal = match exact {
            Some(e) => e.normal.clone(),
            None => {
                let mut normal = DVector::zeros(m);
                let mut aug = DMatrix::zeros(m, m);
                aug.rows_mut(0, n).copy_from(&coord_basis);
                for c in 0..m {
                    aug.row_mut(n).fill(0.0);
                    aug[(n, c)] = 1.0;
                    normal[c] = aug.determinant();
                }
                normal
            }
        };
        let normal = &normal / normal.norm();

        let mut frame = DMatrix::zeros(n, m);
        for a in 0..n {
            let mut v = coord_basis.row(a).clone_owned();
            for b in 0..a {
                let d = v.dot(&frame.row(b));
                v -= d * frame.row(b);
            }
            let r = v.norm();
            frame.row_mut(a).copy_from(&(v / r));
        }
        let area_density = det.sqrt();
        Ok(NodeGeometry {
            position: DVector::from_column_slice(&data[k * m..(k + 1) * m]),
            normal,
            frame,
            shape: DMatrix::zeros(n, n),
            weight: area_density * self.grid.axis_weight(k, tables),
            area_density,
            coord_basis,
            metric_inv,
        })
    }

    fn shape_operator(&self, k: usize, g: &NodeGeometry, normal_field: &[f64]) -> DMatrix<f64> {
        let n = self.grid.dim();
        let m = self.ambient;
        let dnu = if self.closed_form {
            // ν = ±p
            let u = self.grid.coords(k);
            let p = DVector::from_vec(sphere_point(&u));
            let jac = sphere_jacobian(&u);
            if g.normal.dot(&p) < 0.0 {
                -jac
            } else {
                jac
            }
        } else {
            let nb = self.neighbors(k);
            DMatrix::from_fn(n, m, |a, c| self.d1(&nb, normal_field, m, c, a))
        };
        let b = -&dnu * g.coord_basis.transpose();
        let b = (&b + b.transpose()) * 0.5;
        // e_a = Σ_i C[a][i] ∂_i X
        let coeff = &g.frame * g.coord_basis.transpose() * &g.metric_inv;
        let shape = &coeff * b * coeff.transpose();
        (&shape + shape.transpose()) * 0.5
    }

    pub fn dimension(&self) -> usize {
        self.grid.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub(crate) fn grid_arc(&self) -> Arc<ChartGrid> {
        self.grid.clone()
    }

    pub fn fd_order(&self) -> FdOrder {
        self.fd_order
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &NodeGeometry {
        &self.nodes[k]
    }

    /// True when tangents and normals were evaluated in closed form rather
    /// than differenced.
    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Point of the parameter sphere that generated node `k`, for sphere charts.
    pub fn param_point(&self, k: usize) -> Option<&[f64]> {
        let m = self.ambient;
        self.params.as_ref().map(|p| &p[k * m..(k + 1) * m])
    }

    pub(crate) fn params_arc(&self) -> Option<Arc<Vec<f64>>> {
        self.params.clone()
    }

    /// Evaluates a function of the parameter-sphere point at every node.
    /// Errors for charts without a parameter sphere (tori).
    pub fn param_field(&self, f: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
        if self.params.is_none() {
            return Err(Error::InputDomain("surface has no parameter sphere".into()));
        }
        Ok((0..self.len()).map(|k| f(self.param_point(k).unwrap())).collect())
    }

    /// Nodes whose polar angles stay [`INTERIOR_MARGIN`] away from the chart poles.
    pub fn interior_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|k| self.grid.is_interior(k, INTERIOR_MARGIN)).collect()
    }

    /// Applies `X ↦ R X + c` and rebuilds.
    pub fn rigid_motion(&self, rotation: &DMatrix<f64>, shift: &[f64]) -> Result<Self> {
        let m = self.ambient;
        if rotation.shape() != (m, m) || shift.len() != m {
            return Err(Error::InputDomain("rigid motion has the wrong dimension".into()));
        }
        let mut out = Vec::with_capacity(self.positions.len());
        for x in self.positions.chunks(m) {
            let y = rotation * DVector::from_column_slice(x);
            out.extend(y.iter().zip(shift).map(|(a, b)| a + b));
        }
        let exact = self.closed_form.then(|| {
            self.nodes.iter().map(|g| Exact { normal: rotation * &g.normal, tangents: &g.coord_basis * rotation.transpose() }).collect()
        });
        Self::assemble(self.grid.clone(), out, self.params.clone(), exact, self.fd_order)
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        self.rigid_motion(&DMatrix::identity(self.ambient, self.ambient), shift)
    }

    /// Homothety `X ↦ λX`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InputDomain(format!("homothety factor must be positive, got {factor}")));
        }
        let out = self.positions.iter().map(|v| v * factor).collect();
        let exact = self
            .closed_form
            .then(|| self.nodes.iter().map(|g| Exact { normal: g.normal.clone(), tangents: &g.coord_basis * factor }).collect());
        Self::assemble(self.grid.clone(), out, self.params.clone(), exact, self.fd_order)
    }

    /// Replaces every tangent frame `E` by `Q_k E` (with `Q_k` orthogonal) and
    /// transforms shape operators accordingly. Scalar outputs must not change.
    pub fn reframe(&mut self, rotation: impl Fn(usize) -> DMatrix<f64>) {
        for (k, g) in self.nodes.iter_mut().enumerate() {
            let q = rotation(k);
            g.frame = &q * &g.frame;
            g.shape = &q * &g.shape * q.transpose();
        }
    }
}
