use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{demo_dgp, mc_stderr, median, ols_slope, pairs_bootstrap, ridge_slope};
use crate::error::check_level;
use crate::intervals::{ci1, ci2, ci5, ci6, Diagnostic, Interval, IntervalKind, MsePolicy};
use crate::normal::Seed;
use crate::{Error, Result};

/// Interval kinds reported by the demo study, in column order.
pub const STUDY_KINDS: [IntervalKind; 5] = [
    IntervalKind::CI1,
    IntervalKind::CI2,
    IntervalKind::CI5,
    IntervalKind::CI6S,
    IntervalKind::CI6,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub n: usize,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub cells: Vec<StudyCell>,
    pub sim_reps: usize,
    pub n_boot: usize,
    pub master_seed: Seed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    pub coverage: f64,
    pub mc_stderr: f64,
    pub median_length: f64,
}

/// One row of the study table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub level: f64,
    pub tag: String,
    pub sim_reps: usize,
    /// Stats for each of [`STUDY_KINDS`], same order.
    pub stats: Vec<KindStats>,
    /// Fraction of replications where `s2_hat > s1_hat` was clipped.
    pub clip_rate: f64,
}

impl StudyRow {
    pub fn stats(&self, kind: IntervalKind) -> Option<&KindStats> {
        STUDY_KINDS
            .iter()
            .position(|&k| k == kind)
            .and_then(|i| self.stats.get(i))
    }
}

struct Replication {
    covered: [bool; 5],
    length: [f64; 5],
    clipped: bool,
}

fn replicate(cell: &StudyCell, n_boot: usize, seed: Seed) -> Result<Replication> {
    let (data, theta) = demo_dgp(cell.n, seed.substream(0))?;
    let theta1 = ols_slope(&data).ok_or_else(|| Error::Numerical("OLS slope undefined".into()))?;
    let theta2 =
        ridge_slope(&data).ok_or_else(|| Error::Numerical("ridge slope undefined".into()))?;
    let boot = pairs_bootstrap(&data, ols_slope, ridge_slope, n_boot, seed.substream(1))?;
    let (s1, s2, rho) = (boot.s1_hat, boot.s2_hat, boot.rho_hat);
    let policy = MsePolicy::Clip;
    let intervals: [Interval; 5] = [
        ci1(theta1, s1, cell.level)?,
        ci2(theta2, s1, cell.level)?,
        ci5(theta2, s1, s2, cell.level, policy)?,
        ci6(theta1, theta2, s1, s2, rho, cell.level, true, policy)?,
        ci6(theta1, theta2, s1, s2, rho, cell.level, false, policy)?,
    ];
    Ok(Replication {
        covered: intervals.each_ref().map(|iv| iv.contains(theta)),
        length: intervals.each_ref().map(|iv| iv.length()),
        clipped: intervals
            .iter()
            .any(|iv| iv.diagnostics.contains(&Diagnostic::Clipped)),
    })
}

/// Repeats the full pipeline on fresh demo data: pairs bootstrap for
/// `(s1_hat, s2_hat, rho_hat)`, then CI1, CI2, CI5, CI6s and CI6 around the
/// OLS and ridge slopes. Reports coverage of the true slope and median
/// length per kind, one row per cell.
///
/// Replication `r` of cell `c` draws from `master_seed.substream(c).substream(r)`;
/// replications run in parallel and are aggregated in index order.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    if cfg.sim_reps == 0 {
        return Err(Error::domain("sim_reps must be at least 1"));
    }
    for cell in &cfg.cells {
        check_level(cell.level)?;
        if cell.n < 10 {
            return Err(Error::domain(format!("sample size {} is below 10", cell.n)));
        }
    }
    cfg.cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let cell_seed = cfg.master_seed.substream(c as u64);
            let reps = (0..cfg.sim_reps)
                .into_par_iter()
                .map(|r| replicate(cell, cfg.n_boot, cell_seed.substream(r as u64)))
                .collect::<Result<Vec<_>>>()?;
            let stats = (0..STUDY_KINDS.len())
                .map(|k| {
                    let hits = reps.iter().filter(|r| r.covered[k]).count();
                    let coverage = hits as f64 / reps.len() as f64;
                    let mut lengths: Vec<f64> = reps.iter().map(|r| r.length[k]).collect();
                    KindStats {
                        coverage,
                        mc_stderr: mc_stderr(coverage, reps.len()),
                        median_length: median(&mut lengths),
                    }
                })
                .collect();
            let clip_rate = reps.iter().filter(|r| r.clipped).count() as f64 / reps.len() as f64;
            Ok(StudyRow {
                n: cell.n,
                level: cell.level,
                tag: "demo".to_string(),
                sim_reps: cfg.sim_reps,
                stats,
                clip_rate,
            })
        })
        .collect()
}
