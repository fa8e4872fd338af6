use nalgebra::DVector;

use super::SampledImmersion;
use crate::error::{Error, Result};
use crate::parallel::{map_nodes, pairwise_sum};

/// Splitting of the position vector into normal and tangential parts.
#[derive(Clone, Debug)]
pub struct SupportSplit {
    /// `⟨X, ν⟩` per node.
    pub support: Vec<f64>,
    /// `X^T` in frame components per node.
    pub tangent: Vec<DVector<f64>>,
}

impl SampledImmersion {
    fn check_field(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::InputDomain(format!("field has {len} values, surface has {} nodes", self.len())));
        }
        Ok(())
    }

    /// `Σ w_k f_k` with pairwise summation in node order.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_field(field.len())?;
        let terms: Vec<f64> = self.nodes.iter().zip(field).map(|(g, f)| g.weight * f).collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn area(&self) -> f64 {
        pairwise_sum(&self.nodes.iter().map(|g| g.weight).collect::<Vec<_>>())
    }

    /// Surface gradient, in tangent-frame components.
    pub fn surface_gradient(&self, field: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_field(field.len())?;
        let n = self.dimension();
        Ok(map_nodes(self.len(), |k| {
            let nb = self.neighbors(k);
            let g = &self.nodes[k];
            let partial = DVector::from_fn(n, |a, _| self.d1(&nb, field, 1, 0, a));
            let raised = &g.metric_inv * partial;
            let ambient = g.coord_basis.transpose() * raised;
            &g.frame * ambient
        }))
    }

    /// Frame components → ambient vectors, flattened with stride `n + 1`.
    pub fn frame_to_ambient(&self, vectors: &[DVector<f64>]) -> Vec<f64> {
        let m = self.ambient;
        let mut out = Vec::with_capacity(self.len() * m);
        for (g, w) in self.nodes.iter().zip(vectors) {
            out.extend((g.frame.transpose() * w).iter());
        }
        out
    }

    /// Divergence of a tangent field given in frame components,
    /// `div V = g^{ij} ⟨∂_i V, ∂_j X⟩` with `V` the ambient field.
    pub fn surface_divergence(&self, vectors: &[DVector<f64>]) -> Result<Vec<f64>> {
        self.check_field(vectors.len())?;
        let m = self.ambient;
        let n = self.dimension();
        let ambient = self.frame_to_ambient(vectors);
        Ok(map_nodes(self.len(), |k| {
            let nb = self.neighbors(k);
            let g = &self.nodes[k];
            let mut s = 0.0;
            for i in 0..n {
                let dv = DVector::from_fn(m, |c, _| self.d1(&nb, &ambient, m, c, i));
                for j in 0..n {
                    s += g.metric_inv[(i, j)] * dv.dot(&g.coord_basis.row(j).transpose());
                }
            }
            s
        }))
    }

    pub fn support_and_tangent(&self) -> SupportSplit {
        let support = self.nodes.iter().map(|g| g.position.dot(&g.normal)).collect();
        let tangent = self.nodes.iter().map(|g| &g.frame * &g.position).collect();
        SupportSplit { support, tangent }
    }

    /// Positive volume of the enclosed body, `-(1/(n+1)) ∫⟨X, ν⟩`.
    pub fn enclosed_volume(&self) -> f64 {
        -self.signed_volume()
    }

    /// `(1/(n+1)) ∫⟨X, ν⟩`; its derivative along a normal speed `f` is `∫ f`.
    pub fn signed_volume(&self) -> f64 {
        let split = self.support_and_tangent();
        self.integrate(&split.support).unwrap() / self.ambient as f64
    }
}
