use super::SampledImmersion;
use crate::error::{Error, Result};

/// Normal-graph variation `X_t = X + t·f·ν` of a sampled immersion.
#[derive(Clone, Debug)]
pub struct VariationFamily {
    base: SampledImmersion,
    speed: Vec<f64>,
}

impl VariationFamily {
    pub fn new(base: SampledImmersion, speed: Vec<f64>) -> Result<Self> {
        if speed.len() != base.len() {
            return Err(Error::InputDomain(format!("speed has {} values, surface has {} nodes", speed.len(), base.len())));
        }
        Ok(Self { base, speed })
    }

    pub fn base(&self) -> &SampledImmersion {
        &self.base
    }

    pub fn speed(&self) -> &[f64] {
        &self.speed
    }

    /// The displaced surface at time `t`, with all geometry recomputed.
    pub fn evaluate_at(&self, t: f64) -> Result<SampledImmersion> {
        if t == 0.0 && !self.base.is_closed_form() {
            return Ok(self.base.clone());
        }
        let m = self.base.ambient_dim();
        let mut pos = Vec::with_capacity(self.base.len() * m);
        for (g, f) in self.base.nodes().iter().zip(&self.speed) {
            pos.extend(g.position.iter().zip(g.normal.iter()).map(|(x, nu)| x + t * f * nu));
        }
        SampledImmersion::from_positions(self.base.grid_arc(), pos, self.base.params_arc(), self.base.fd_order())
    }
}

#[cfg(test)]
mod tests {
    use super::super::BuildOptions;
    use super::*;

    #[test]
    fn zero_speed_is_stationary() {
        let s = SampledImmersion::ellipsoid(&[1.2, 1.0, 0.9], BuildOptions::new(16)).unwrap();
        let fam = VariationFamily::new(s.clone(), vec![0.0; s.len()]).unwrap();
        let moved = fam.evaluate_at(0.3).unwrap();
        for (a, b) in moved.positions().iter().zip(s.positions()) {
            assert_eq!(a, b);
        }
        assert!(VariationFamily::new(s, vec![0.0; 3]).is_err());
    }

    #[test]
    fn outward_growth_of_unit_sphere() {
        let s = SampledImmersion::sphere(2, 1.0, BuildOptions::new(32)).unwrap();
        let fam = VariationFamily::new(s.clone(), vec![-1.0; s.len()]).unwrap();
        let t = 0.25;
        let grown = fam.evaluate_at(t).unwrap();
        let reference = SampledImmersion::sphere(2, 1.0 + t, BuildOptions::new(32)).unwrap();
        for (a, b) in grown.positions().iter().zip(reference.positions()) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in grown.nodes().iter().zip(reference.nodes()) {
            assert!((&a.shape - &b.shape).amax() < 1e-8);
        }
    }

    #[test]
    fn collapsing_variation_errors() {
        let s = SampledImmersion::sphere(2, 1.0, BuildOptions::new(16)).unwrap();
        let fam = VariationFamily::new(s.clone(), vec![1.0; s.len()]).unwrap();
        assert!(fam.evaluate_at(1.0).is_err());
    }
}
