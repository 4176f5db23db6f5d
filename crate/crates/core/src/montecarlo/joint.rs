use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc_stderr;
use crate::coverage::EstimatorModel;
use crate::error::check_level;
use crate::intervals::{build, Estimates, IntervalKind, MsePolicy};
use crate::normal::{BivariateNormal, Seed};
use crate::{Error, Result};

/// Replications per random sub-stream.
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: EstimatorModel,
    pub level: f64,
    pub n_reps: usize,
    pub seed: Seed,
    pub kinds: Vec<IntervalKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: IntervalKind,
    pub coverage: f64,
    pub mc_stderr: f64,
    pub median_length: f64,
    pub covered: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    pub summaries: Vec<KindSummary>,
}

impl SimulationResult {
    pub fn get(&self, kind: IntervalKind) -> Option<&KindSummary> {
        self.summaries.iter().find(|s| s.kind == kind)
    }
}

/// Where an interval kind is centered, as the weight on `theta2_hat`, and
/// its half-width. Both are fixed once the true `(s1, s2, rho)` are known.
#[derive(Debug, Clone, Copy)]
struct Template {
    weight: f64,
    half_width: f64,
}

fn template(kind: IntervalKind, model: &EstimatorModel, rho: f64, level: f64) -> Result<Template> {
    let est = Estimates {
        theta1_hat: Some(0.0),
        theta2_hat: Some(0.0),
        s1: model.s1,
        s2: Some(model.s2),
        rho: Some(rho),
    };
    let iv = build(kind, &est, level, MsePolicy::Strict)?;
    let weight = match kind {
        IntervalKind::CI1 | IntervalKind::CI3 => 0.0,
        IntervalKind::CI2 | IntervalKind::CI4 | IntervalKind::CI5 => 1.0,
        IntervalKind::CI6 | IntervalKind::CI6S => iv.calibration.map(|c| c.w).unwrap_or(1.0),
    };
    Ok(Template {
        weight,
        half_width: iv.half_width,
    })
}

/// Draws `(theta1_hat, theta2_hat)` from the joint normal model `n_reps`
/// times and records how often each interval kind covers `theta`.
///
/// Intervals use the model's true standard errors and correlation, so every
/// replication shares one calibration. Boundary hits count as covered.
pub fn simulate_joint_normal(cfg: &SimulationConfig) -> Result<SimulationResult> {
    cfg.model.validate()?;
    check_level(cfg.level)?;
    if cfg.n_reps == 0 {
        return Err(Error::domain("n_reps must be at least 1"));
    }
    if cfg.kinds.is_empty() {
        return Err(Error::domain("no interval kinds requested"));
    }
    let needs_rho = cfg.kinds.iter().any(|k| k.needs_rho());
    let rho = match cfg.model.rho {
        Some(r) => r,
        None if needs_rho => return Err(Error::domain("CI6 and CI6s need the correlation rho")),
        None => 0.0,
    };
    let templates = cfg
        .kinds
        .iter()
        .map(|&k| template(k, &cfg.model, rho, cfg.level))
        .collect::<Result<Vec<_>>>()?;
    let m = &cfg.model;
    let dist = BivariateNormal::new(m.theta, m.theta + m.b2, m.s1, m.s2, rho)?;

    let n_chunks = cfg.n_reps.div_ceil(CHUNK);
    let covered = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let reps = CHUNK.min(cfg.n_reps - chunk * CHUNK);
            let mut rng = cfg.seed.substream(chunk as u64).rng();
            let mut counts = vec![0u64; templates.len()];
            for _ in 0..reps {
                let (t1, t2) = dist.sample(&mut rng);
                for (count, tpl) in counts.iter_mut().zip(&templates) {
                    let center = (1.0 - tpl.weight) * t1 + tpl.weight * t2;
                    if center - tpl.half_width <= m.theta && m.theta <= center + tpl.half_width {
                        *count += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; templates.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let summaries = cfg
        .kinds
        .iter()
        .zip(&templates)
        .zip(covered)
        .map(|((&kind, tpl), hits)| {
            let coverage = hits as f64 / cfg.n_reps as f64;
            KindSummary {
                kind,
                coverage,
                mc_stderr: mc_stderr(coverage, cfg.n_reps),
                median_length: 2.0 * tpl.half_width,
                covered: hits,
            }
        })
        .collect();
    Ok(SimulationResult {
        config: cfg.clone(),
        summaries,
    })
}
