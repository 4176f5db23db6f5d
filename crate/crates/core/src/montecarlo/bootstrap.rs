use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::normal::Seed;
use crate::{Error, Result};

/// Redraws allowed per replication after an estimator failure.
pub const MAX_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimates {
    pub s1_hat: f64,
    pub s2_hat: f64,
    /// Sample correlation clamped to `[-1, 1]`; 0 when either sequence has
    /// zero variance.
    pub rho_hat: f64,
    pub n_boot: usize,
    pub rho_degenerate: bool,
    /// Resamples on which an estimator failed and that were redrawn.
    pub failed_resamples: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Nonparametric pairs bootstrap of two estimators' standard errors and
/// correlation.
///
/// Each replication resamples whole rows with replacement and evaluates both
/// estimators on the same resample. An estimator returning `None` or a
/// non-finite value causes a redraw, up to [`MAX_RETRIES`] times per
/// replication. Replication `b` draws from sub-stream `b` of `seed`.
pub fn pairs_bootstrap<T, F1, F2>(
    data: &[T],
    estimator1: F1,
    estimator2: F2,
    n_boot: usize,
    seed: Seed,
) -> Result<BootstrapEstimates>
where
    T: Clone,
    F1: Fn(&[T]) -> Option<f64>,
    F2: Fn(&[T]) -> Option<f64>,
{
    if data.is_empty() {
        return Err(Error::domain("bootstrap needs at least one observation"));
    }
    if n_boot < 2 {
        return Err(Error::domain("bootstrap needs at least two replications"));
    }
    let n = data.len();
    let mut resample: Vec<T> = Vec::with_capacity(n);
    let mut est1 = Vec::with_capacity(n_boot);
    let mut est2 = Vec::with_capacity(n_boot);
    let mut failed = 0;

    for b in 0..n_boot {
        let mut rng = seed.substream(b as u64).rng();
        let mut attempt = 0;
        loop {
            resample.clear();
            resample.extend((0..n).map(|_| data[rng.random_range(0..n)].clone()));
            let pair = estimator1(&resample)
                .filter(|v| v.is_finite())
                .zip(estimator2(&resample).filter(|v| v.is_finite()));
            if let Some((a, c)) = pair {
                est1.push(a);
                est2.push(c);
                break;
            }
            failed += 1;
            attempt += 1;
            if attempt > MAX_RETRIES {
                return Err(Error::Numerical(format!(
                    "estimator failed on {attempt} consecutive resamples in replication {b}"
                )));
            }
        }
    }

    let (m1, m2) = (mean(&est1), mean(&est2));
    let denom = (n_boot - 1) as f64;
    let (mut v1, mut v2, mut c12) = (0.0, 0.0, 0.0);
    for (a, c) in est1.iter().zip(&est2) {
        v1 += (a - m1) * (a - m1);
        v2 += (c - m2) * (c - m2);
        c12 += (a - m1) * (c - m2);
    }
    let (s1_hat, s2_hat) = ((v1 / denom).sqrt(), (v2 / denom).sqrt());
    let rho_degenerate = s1_hat == 0.0 || s2_hat == 0.0;
    let rho_hat = if rho_degenerate {
        0.0
    } else {
        (c12 / denom / (s1_hat * s2_hat)).clamp(-1.0, 1.0)
    };
    Ok(BootstrapEstimates {
        s1_hat,
        s2_hat,
        rho_hat,
        n_boot,
        rho_degenerate,
        failed_resamples: failed,
    })
}
