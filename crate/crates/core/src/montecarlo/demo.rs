use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::normal::Seed;
use crate::{Error, Result};

pub const DEMO_INTERCEPT: f64 = 1.0;
pub const DEMO_SLOPE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
}

/// `n` draws of `Y = 1 + 2 X + U` with independent `X, U ~ N(0, 1)`.
/// Returns the sample and the true slope.
pub fn demo_dgp(n: usize, seed: Seed) -> Result<(Vec<Observation>, f64)> {
    if n < 10 {
        return Err(Error::domain(format!(
            "demo sample size must be at least 10, got {n}"
        )));
    }
    let mut rng = seed.rng();
    let data = (0..n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.sample(StandardNormal);
            Observation {
                x,
                y: DEMO_INTERCEPT + DEMO_SLOPE * x + u,
            }
        })
        .collect();
    Ok((data, DEMO_SLOPE))
}

/// Centered cross-products `(Sxx, Sxy)`.
fn moments(data: &[Observation]) -> Option<(f64, f64)> {
    if data.len() < 2 {
        return None;
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|o| o.x).sum::<f64>() / n;
    let my = data.iter().map(|o| o.y).sum::<f64>() / n;
    let (sxx, sxy) = data.iter().fold((0.0, 0.0), |(sxx, sxy), o| {
        let dx = o.x - mx;
        (sxx + dx * dx, sxy + dx * (o.y - my))
    });
    Some((sxx, sxy))
}

/// OLS slope with an intercept. `None` when `x` has no variation.
pub fn ols_slope(data: &[Observation]) -> Option<f64> {
    let (sxx, sxy) = moments(data)?;
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Ridge penalty for a sample of size `n`: `4 / sqrt(n)`.
pub fn ridge_penalty(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}

/// Ridge slope minimizing `sum (y - a - b x)^2 + lambda b^2` with the
/// intercept unpenalized, i.e. `Sxy / (Sxx + lambda)`. Shrinks toward zero.
pub fn ridge_slope(data: &[Observation]) -> Option<f64> {
    let (sxx, sxy) = moments(data)?;
    let denom = sxx + ridge_penalty(data.len());
    (denom > 0.0).then(|| sxy / denom)
}
