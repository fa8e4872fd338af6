//! Run configuration: a JSON file, then flag overrides, then validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use wulff_core::anisotropy::{AnisotropyModel, AnisotropySpec};
use wulff_core::functionals::check_weights;
use wulff_core::geometry::{BuildOptions, SampledImmersion, SurfaceSpec};
use wulff_core::stability::Tolerances;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config is not valid: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] wulff_core::Error),
}

pub const SUITES: [&str; 8] = ["traces", "maclaurin", "discriminant", "minkowski", "first-variation", "volume", "closed-form", "symmetry"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub r: usize,
    pub s: usize,
    pub a: Vec<f64>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self { r: 0, s: 0, a: vec![1.0] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Defaults to the Wulff shape of `anisotropy`.
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    #[serde(default = "default_anisotropy")]
    pub anisotropy: AnisotropySpec,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "unit")]
    pub tol_scale: f64,
    /// Not part of the config hash: neither changes any number.
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

fn default_n() -> usize {
    2
}
fn default_anisotropy() -> AnisotropySpec {
    AnisotropySpec::Isotropic
}
fn default_resolution() -> usize {
    32
}
fn default_samples() -> usize {
    1000
}
fn default_seed() -> u64 {
    1
}
fn unit() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config parses")
    }
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tol_scale: Option<f64>,
    pub n: Option<usize>,
    pub surface: Option<String>,
    pub model: Option<String>,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub a: Option<Vec<f64>>,
    pub suites: Vec<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// `diag(4, 1, ..., 1)`.
pub fn default_quadric(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i != j {
                        0.0
                    } else if i == 0 {
                        4.0
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect()
}

fn model_by_name(name: &str, m: usize) -> Result<AnisotropySpec, ConfigError> {
    match name {
        "isotropic" => Ok(AnisotropySpec::Isotropic),
        "quadric" => Ok(AnisotropySpec::Quadric { q: default_quadric(m) }),
        "pnorm" | "pnorm-4" => Ok(AnisotropySpec::Pnorm { p: 4 }),
        other => Err(ConfigError::Invalid(format!("unknown model {other:?} (isotropic, quadric, pnorm)"))),
    }
}

fn surface_by_name(name: &str, m: usize, anisotropy: &AnisotropySpec) -> Result<SurfaceSpec, ConfigError> {
    match name {
        "sphere" => Ok(SurfaceSpec::Sphere { radius: 1.0, center: None }),
        "ellipsoid" => {
            let mut semi_axes = vec![1.0; m];
            semi_axes[0] = 1.3;
            semi_axes[m - 1] = 0.8;
            Ok(SurfaceSpec::Ellipsoid { semi_axes, center: None })
        }
        "wulff" => Ok(SurfaceSpec::Wulff { anisotropy: anisotropy.clone(), scale: 1.0 }),
        "torus" => Ok(SurfaceSpec::Torus { major: 2.0, minor: 0.7 }),
        other => Err(ConfigError::Invalid(format!("unknown surface {other:?} (sphere, ellipsoid, wulff, torus)"))),
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(n) = o.n {
            self.n = n;
        }
        let m = self.n + 1;
        if let Some(v) = o.resolution {
            self.resolution = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = Some(v.clone());
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
        if let Some(v) = o.tol_scale {
            self.tol_scale = v;
        }
        if let Some(name) = &o.model {
            self.anisotropy = model_by_name(name, m)?;
        }
        if let Some(name) = &o.surface {
            self.surface = Some(surface_by_name(name, m, &self.anisotropy)?);
        }
        if let Some(r) = o.r {
            self.problem.r = r;
        }
        if let Some(s) = o.s {
            self.problem.s = s;
        }
        if let Some(a) = &o.a {
            self.problem.a = a.clone();
        }
        if !o.suites.is_empty() {
            self.suites = o.suites.clone();
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(2..=8).contains(&self.n) {
            return bad(format!("n must lie in 2..=8, got {}", self.n));
        }
        if self.resolution < 8 || !self.resolution.is_multiple_of(2) {
            return bad(format!("resolution must be even and >= 8, got {}", self.resolution));
        }
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return bad(format!("tol_scale must be positive, got {}", self.tol_scale));
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if self.samples == 0 {
            return bad("samples must be >= 1".into());
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return bad(format!("unknown suite {s:?}; known: {}", SUITES.join(", ")));
            }
        }
        if matches!(self.surface, Some(SurfaceSpec::Torus { .. })) && self.n != 2 {
            return bad("torus needs n = 2".into());
        }
        check_weights(self.n, self.problem.r, self.problem.s, &self.problem.a)?;
        self.model()?;
        Ok(())
    }

    pub fn model(&self) -> Result<AnisotropyModel, ConfigError> {
        Ok(self.anisotropy.build(self.n + 1)?)
    }

    pub fn surface_spec(&self) -> SurfaceSpec {
        self.surface.clone().unwrap_or(SurfaceSpec::Wulff { anisotropy: self.anisotropy.clone(), scale: 1.0 })
    }

    pub fn build(&self, resolution: usize) -> Result<SampledImmersion, ConfigError> {
        Ok(SampledImmersion::from_spec(&self.surface_spec(), self.n, BuildOptions::new(resolution))?)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.times(self.tol_scale)
    }

    /// SHA-256 of the serialized effective config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
