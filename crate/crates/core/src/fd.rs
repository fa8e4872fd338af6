//! Finite-difference derivatives of scalar functions of one variable, with
//! an automatic step search.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest step tried, before scaling.
pub const BASE_STEP: f64 = 1e-2;
/// Number of halvings tried.
pub const HALVINGS: usize = 10;
/// The sweep stops once the Richardson error exceeds its running minimum by this factor.
pub const RISE: f64 = 10.0;

/// A finite-difference derivative and the step it was taken at.
#[derive(Clone, Debug, Serialize)]
pub struct FdEstimate {
    pub value: f64,
    pub step: f64,
    /// `|D(h) - D(h/2)|` at the chosen step.
    pub richardson_error: f64,
}

/// Memoized `t ↦ J(t)`.
pub struct CachedFn<F> {
    f: F,
    cache: HashMap<u64, f64>,
}

impl<F: FnMut(f64) -> Result<f64>> CachedFn<F> {
    pub fn new(f: F) -> Self {
        Self { f, cache: HashMap::new() }
    }

    pub fn eval(&mut self, t: f64) -> Result<f64> {
        let key = t.to_bits();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = (self.f)(t)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }
}

/// 5-point central first derivative at 0.
pub fn central_first<F: FnMut(f64) -> Result<f64>>(j: &mut CachedFn<F>, h: f64) -> Result<f64> {
    Ok((-j.eval(2.0 * h)? + 8.0 * j.eval(h)? - 8.0 * j.eval(-h)? + j.eval(-2.0 * h)?) / (12.0 * h))
}

/// 5-point central second derivative at 0.
pub fn central_second<F: FnMut(f64) -> Result<f64>>(j: &mut CachedFn<F>, h: f64) -> Result<f64> {
    Ok((-j.eval(2.0 * h)? + 16.0 * j.eval(h)? - 30.0 * j.eval(0.0)? + 16.0 * j.eval(-h)? - j.eval(-2.0 * h)?) / (12.0 * h * h))
}

/// Step-halving sweep over `h_k = BASE_STEP · scale · 2^{-k}`; returns the
/// estimate whose Richardson error is smallest. The sweep ends early once the
/// error has grown by [`RISE`] past its minimum.
///
/// `magnitude` sets the plateau test: the sweep fails with a conditioning
/// error when no Richardson error falls below `plateau_rel · magnitude`.
pub fn plateau_search<F: FnMut(f64) -> Result<f64>>(
    j: &mut CachedFn<F>,
    order: u8,
    scale: f64,
    magnitude: f64,
    plateau_rel: f64,
) -> Result<FdEstimate> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InputDomain(format!("step scale must be positive, got {scale}")));
    }
    let derivative = |j: &mut CachedFn<F>, h: f64| match order {
        1 => central_first(j, h),
        2 => central_second(j, h),
        _ => Err(Error::InputDomain(format!("derivative order {order} not supported"))),
    };
    let mut best: Option<FdEstimate> = None;
    let mut prev = derivative(j, BASE_STEP * scale)?;
    for k in 1..=HALVINGS {
        let h = BASE_STEP * scale * 0.5f64.powi(k as i32);
        let value = derivative(j, h)?;
        let err = (value - prev).abs();
        prev = value;
        if !err.is_finite() {
            continue;
        }
        match &best {
            Some(b) if err >= b.richardson_error => {
                // Past the minimum and into roundoff.
                if err > RISE * b.richardson_error {
                    break;
                }
            }
            _ => best = Some(FdEstimate { value, step: h, richardson_error: err }),
        }
    }
    let best = best.ok_or_else(|| Error::Conditioning("no finite difference quotient".into()))?;
    let threshold = plateau_rel * magnitude.abs().max(best.value.abs());
    if best.richardson_error > threshold && best.richardson_error > 0.0 {
        return Err(Error::Conditioning(format!(
            "no stable step: best Richardson error {:e} exceeds {:e}",
            best.richardson_error, threshold
        )));
    }
    Ok(best)
}
