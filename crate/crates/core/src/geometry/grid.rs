//! Structured chart grids: index topology, central-difference stencils and
//! per-axis quadrature weights.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy order of the central-difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FdOrder {
    Four,
    Six,
    Eight,
    Twelve,
    #[default]
    Sixteen,
}

/// Central-difference weights for one order.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Stencil {
    /// Antisymmetric first-derivative weights for offsets `1..=half_width`.
    pub first: Vec<f64>,
    /// Second-derivative centre weight.
    pub centre: f64,
    /// Symmetric second-derivative weights for offsets `1..=half_width`.
    pub second: Vec<f64>,
}

impl FdOrder {
    pub fn half_width(self) -> usize {
        match self {
            FdOrder::Four => 2,
            FdOrder::Six => 3,
            FdOrder::Eight => 4,
            FdOrder::Twelve => 6,
            FdOrder::Sixteen => 8,
        }
    }

    pub fn order(self) -> usize {
        2 * self.half_width()
    }

    /// Closed-form weights of the widest central stencil of this half-width.
    pub(crate) fn stencil(self) -> Stencil {
        let m = self.half_width();
        let fact = |k: usize| (1..=k).fold(1.0, |a, i| a * i as f64);
        let mf2 = fact(m) * fact(m);
        let base: Vec<f64> = (1..=m)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * mf2 / (fact(m - k) * fact(m + k))
            })
            .collect();
        let first: Vec<f64> = base.iter().enumerate().map(|(i, b)| b / (i + 1) as f64).collect();
        let second: Vec<f64> = base.iter().enumerate().map(|(i, b)| 2.0 * b / ((i + 1) * (i + 1)) as f64).collect();
        let centre = -2.0 * second.iter().sum::<f64>();
        Stencil { first, centre, second }
    }
}

/// One coordinate direction of a chart.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisKind {
    /// Angle in `(0, π)` sampled at `(k + 1/2)π/N`. The surface element
    /// carries a factor `sin(u)^sin_power` on this axis.
    Polar { sin_power: u32 },
    /// Angle in `[0, 2π)` sampled at `2π(k + 1/2)/N`, so that no node of a
    /// sphere chart lies on a coordinate hyperplane.
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub len: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        match self.kind {
            AxisKind::Polar { .. } => PI / self.len as f64,
            AxisKind::Periodic => 2.0 * PI / self.len as f64,
        }
    }

    pub fn coord(&self, k: usize) -> f64 {
        match self.kind {
            AxisKind::Polar { .. } => (k as f64 + 0.5) * self.spacing(),
            AxisKind::Periodic => (k as f64 + 0.5) * self.spacing(),
        }
    }

    /// Quadrature weights for `∫ g(u) du` along this axis, where `g` carries
    /// the axis' `sin^p` surface-element factor.
    ///
    /// Odd powers use Fejér's first rule in `x = cos u` (divided by `sin u`);
    /// even powers and periodic axes integrate a smooth periodic function and
    /// use the uniform rule. Both are spectrally accurate on smooth surfaces.
    pub fn quadrature(&self) -> Vec<f64> {
        let n = self.len;
        match self.kind {
            AxisKind::Polar { sin_power } if sin_power % 2 == 1 => (0..n)
                .map(|k| {
                    let th = self.coord(k);
                    let mut s = 0.0;
                    for j in 1..=n / 2 {
                        let jf = j as f64;
                        s += (2.0 * jf * th).cos() / (4.0 * jf * jf - 1.0);
                    }
                    (2.0 / n as f64) * (1.0 - 2.0 * s) / th.sin()
                })
                .collect(),
            _ => vec![self.spacing(); n],
        }
    }
}

/// Which closed manifold the chart covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Topology {
    /// Hyperspherical angles, polar axes first, azimuth last.
    Sphere,
    /// Product of circles (`n = 2` torus).
    Torus,
}

/// Widest stencil half-width, the one of `FdOrder::Sixteen`.
pub(crate) const MAX_HALF_WIDTH: usize = 8;

/// Index topology of a single chart covering a closed hypersurface.
#[derive(Clone, Debug)]
pub struct ChartGrid {
    pub topology: Topology,
    pub axes: Vec<Axis>,
    strides: Vec<usize>,
    offsets: OnceLock<Vec<u32>>,
}

impl PartialEq for ChartGrid {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology && self.axes == other.axes
    }
}

impl ChartGrid {
    /// Sphere-type chart for an `n`-dimensional hypersurface with `resolution`
    /// nodes per polar angle and `2·resolution` azimuth nodes.
    pub fn sphere(n: usize, resolution: usize) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::InputDomain(format!("supported dimensions are 2 and 3, got {n}")));
        }
        check_resolution(resolution)?;
        let mut axes: Vec<Axis> =
            (0..n - 1).map(|i| Axis { kind: AxisKind::Polar { sin_power: (n - 1 - i) as u32 }, len: resolution }).collect();
        axes.push(Axis { kind: AxisKind::Periodic, len: 2 * resolution });
        Ok(Self::from_axes(Topology::Sphere, axes))
    }

    /// Torus chart, `2·resolution` nodes around the core circle and
    /// `resolution` around the tube.
    pub fn torus(resolution: usize) -> Result<Self> {
        check_resolution(resolution)?;
        let axes = vec![Axis { kind: AxisKind::Periodic, len: 2 * resolution }, Axis { kind: AxisKind::Periodic, len: resolution }];
        Ok(Self::from_axes(Topology::Torus, axes))
    }

    fn from_axes(topology: Topology, axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for a in (0..axes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].len;
        }
        Self { topology, axes, strides, offsets: OnceLock::new() }
    }

    /// Per node, per axis, `(plus, minus)` node pairs for offsets
    /// `1..=MAX_HALF_WIDTH`, built on first use.
    pub(crate) fn offset_table(&self) -> &[u32] {
        self.offsets.get_or_init(|| {
            let d = self.dim();
            let mut out = Vec::with_capacity(self.node_count() * d * MAX_HALF_WIDTH * 2);
            for node in 0..self.node_count() {
                let base = self.multi_index(node);
                for a in 0..d {
                    for o in 1..=MAX_HALF_WIDTH as i64 {
                        let (mut p, mut q) = (base, base);
                        p[a] += o;
                        q[a] -= o;
                        out.push(self.resolve(p) as u32);
                        out.push(self.resolve(q) as u32);
                    }
                }
            }
            out
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    /// Nodes per polar angle (or the tube resolution for a torus).
    pub fn resolution(&self) -> usize {
        match self.topology {
            Topology::Sphere => self.axes[0].len,
            Topology::Torus => self.axes[1].len,
        }
    }

    pub fn multi_index(&self, node: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rem = node;
        for (a, s) in self.strides.iter().enumerate() {
            out[a] = (rem / s) as i64;
            rem %= s;
        }
        out
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let idx = self.multi_index(node);
        self.axes.iter().enumerate().map(|(a, ax)| ax.coord(idx[a] as usize)).collect()
    }

    /// Maps a possibly out-of-range multi-index to the node holding the same
    /// surface point.
    pub fn resolve(&self, mut idx: [i64; 3]) -> usize {
        let d = self.dim();
        for a in 0..d {
            let len = self.axes[a].len as i64;
            match self.axes[a].kind {
                AxisKind::Polar { .. } => {
                    while idx[a] < 0 || idx[a] >= len {
                        idx[a] = if idx[a] < 0 { -1 - idx[a] } else { 2 * len - 1 - idx[a] };
                        for b in a + 1..d {
                            let lb = self.axes[b].len as i64;
                            match self.axes[b].kind {
                                AxisKind::Polar { .. } => idx[b] = lb - 1 - idx[b],
                                AxisKind::Periodic => idx[b] += lb / 2,
                            }
                        }
                    }
                }
                AxisKind::Periodic => idx[a] = idx[a].rem_euclid(len),
            }
        }
        let mut lin = 0usize;
        for a in 0..d {
            lin += idx[a] as usize * self.strides[a];
        }
        lin
    }

    /// Product quadrature weight of a node, excluding the metric density.
    pub fn axis_weight(&self, node: usize, tables: &[Vec<f64>]) -> f64 {
        let idx = self.multi_index(node);
        (0..self.dim()).map(|a| tables[a][idx[a] as usize]).product()
    }

    pub fn quadrature_tables(&self) -> Vec<Vec<f64>> {
        self.axes.iter().map(Axis::quadrature).collect()
    }

    /// `true` when every polar angle of the node is at least `margin` away
    /// from `0` and `π`.
    pub fn is_interior(&self, node: usize, margin: f64) -> bool {
        let idx = self.multi_index(node);
        self.axes.iter().enumerate().all(|(a, ax)| match ax.kind {
            AxisKind::Polar { .. } => {
                let u = ax.coord(idx[a] as usize);
                u >= margin && u <= PI - margin
            }
            AxisKind::Periodic => true,
        })
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 16 || !resolution.is_multiple_of(2) {
        return Err(Error::InputDomain(format!("resolution must be an even number >= 16, got {resolution}")));
    }
    Ok(())
}
