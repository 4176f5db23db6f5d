use biasci::calibrate::{calibrated_z, calibrated_z_w, length_ratio_table, optimal_w, Calibration};
use biasci::coverage::{cp_curve, EstimatorModel, WorstCase};
use biasci::intervals::{build, Estimates, Interval, IntervalKind, MsePolicy};
use biasci::io::{self, CpRow, CpRowKind, GridSpec};
use biasci::montecarlo::{
    run_study, simulate_joint_normal, SimulationConfig, StudyCell, StudyConfig,
};
use biasci::normal::{two_sided_z, Seed};
use biasci::{Error, Result};
use clap::{ArgGroup, Args};
use log::info;
use serde::Serialize;

use crate::output::{short, Format};
use crate::{Mode, OutputArgs, SEED_ENV};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("critical").required(true).args(["level", "z"])))]
pub struct CpArgs {
    /// Nominal level; the critical value is `z_{(1+level)/2}`.
    #[arg(long)]
    level: Option<f64>,
    /// Critical value used directly.
    #[arg(long)]
    z: Option<f64>,
    /// Number of equally spaced angles in [0, pi/2].
    #[arg(long, default_value_t = 201)]
    t_grid: usize,
    /// Weight on theta2_hat in the combined center.
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Correlation of the two estimators (matters only for w < 1).
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Serialize)]
struct CpReport {
    z: f64,
    level: Option<f64>,
    w: f64,
    rho: f64,
    rows: Vec<CpRow>,
    worst_case: WorstCase,
}

pub fn cp(a: &CpArgs) -> Result<()> {
    let z = match (a.level, a.z) {
        (Some(level), None) => two_sided_z(level)?,
        (None, Some(z)) => z,
        _ => return Err(Error::Domain("give exactly one of --level and --z".into())),
    };
    let (curve, worst) = cp_curve(z, a.w, a.rho, a.t_grid)?;
    let mut rows: Vec<CpRow> = curve
        .into_iter()
        .map(|(t, cp)| CpRow {
            row: CpRowKind::Grid,
            t,
            cp,
        })
        .collect();
    rows.push(CpRow {
        row: CpRowKind::WorstCase,
        t: worst.t_min,
        cp: worst.cp_min,
    });
    info!(
        "worst-case coverage {} at t = {}",
        short(worst.cp_min),
        short(worst.t_min)
    );
    match a.out.format_or(Format::Csv) {
        Format::Csv => a.out.emit(|w| io::write_cp_csv(w, &rows)),
        Format::Json => a.out.emit_json(&CpReport {
            z,
            level: a.level,
            w: a.w,
            rho: a.rho,
            rows,
            worst_case: worst,
        }),
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2: f64,
    #[arg(long)]
    level: f64,
    /// Correlation of the two estimators.
    #[arg(long)]
    rho: Option<f64>,
    /// Choose the weight that minimizes the critical value.
    #[arg(long, requires = "rho", conflicts_with = "w")]
    optimize_w: bool,
    /// Fixed weight on theta2_hat.
    #[arg(long)]
    w: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Serialize)]
struct CalibrationReport {
    #[serde(flatten)]
    calibration: Calibration,
    s1: f64,
    s2: f64,
    bias_bound: f64,
    length_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_vs_w1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_minima: Option<usize>,
}

pub fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let (calibration, ratio_vs_w1, local_minima) = if a.optimize_w {
        let rho = a
            .rho
            .ok_or_else(|| Error::Domain("--optimize-w needs --rho".into()))?;
        let opt = optimal_w(a.s1, a.s2, rho, a.level)?;
        let single = calibrated_z(a.s1, a.s2, a.level)?;
        let ratio = opt.calibration.z_tilde / single.z_tilde;
        (opt.calibration, Some(ratio), Some(opt.local_minima))
    } else {
        match (a.w, a.rho) {
            (Some(w), Some(rho)) => (calibrated_z_w(a.s1, a.s2, rho, a.level, w)?, None, None),
            (Some(1.0), None) => (calibrated_z(a.s1, a.s2, a.level)?, None, None),
            (Some(_), None) => return Err(Error::Domain("--w below 1 needs --rho".into())),
            (None, _) => (calibrated_z(a.s1, a.s2, a.level)?, None, None),
        }
    };
    info!(
        "z_tilde {} (w = {}), {} of the benchmark length",
        short(calibration.z_tilde),
        short(calibration.w),
        short(calibration.length_ratio())
    );
    match a.out.format_or(Format::Json) {
        Format::Csv => a.out.emit(|w| io::write_calibration_csv(w, &[calibration])),
        Format::Json => a.out.emit_json(&CalibrationReport {
            calibration,
            s1: a.s1,
            s2: a.s2,
            bias_bound: calibration.bias_bound_over_s1 * a.s1,
            length_ratio: calibration.length_ratio(),
            ratio_vs_w1,
            local_minima,
        }),
    }
}

#[derive(Debug, Args)]
pub struct CiArgs {
    /// Unbiased estimate.
    #[arg(long, allow_hyphen_values = true)]
    theta1: Option<f64>,
    /// Biased, lower-MSE estimate.
    #[arg(long, allow_hyphen_values = true)]
    theta2: Option<f64>,
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long)]
    level: f64,
    /// Comma-separated kinds: CI1..CI6, CI6s.
    #[arg(long, default_value = "CI1,CI2,CI5")]
    kinds: String,
    /// Build CI6 with the correlation shrunk to (1 + rho) / 2.
    #[arg(long)]
    shrink_rho: bool,
    /// Clip s2 to s1 instead of failing when s2 > s1.
    #[arg(long)]
    clip: bool,
    #[command(flatten)]
    out: OutputArgs,
}

fn policy(clip: bool) -> MsePolicy {
    if clip {
        MsePolicy::Clip
    } else {
        MsePolicy::Strict
    }
}

pub fn ci(a: &CiArgs) -> Result<()> {
    let mut kinds = io::parse_kind_list(&a.kinds)?;
    if a.shrink_rho {
        for k in kinds.iter_mut().filter(|k| **k == IntervalKind::CI6) {
            *k = IntervalKind::CI6S;
        }
        kinds.dedup();
    }
    let est = Estimates {
        theta1_hat: a.theta1,
        theta2_hat: a.theta2,
        s1: a.s1,
        s2: a.s2,
        rho: a.rho,
    };
    let intervals = kinds
        .iter()
        .map(|&k| build(k, &est, a.level, policy(a.clip)))
        .collect::<Result<Vec<Interval>>>()?;
    for iv in &intervals {
        info!(
            "{}: [{}, {}]",
            iv.kind,
            short(iv.lower()),
            short(iv.upper())
        );
    }
    match a.out.format_or(Format::Json) {
        Format::Csv => a.out.emit(|w| io::write_intervals_csv(w, &intervals)),
        Format::Json => a.out.emit_json(&intervals),
    }
}

#[derive(Debug, Args)]
pub struct LengthsArgs {
    #[arg(long)]
    level: f64,
    /// s2/s1 values, `start:stop:count` or a single value.
    #[arg(long)]
    s2_grid: GridSpec,
    /// Correlations for the optimal-weight column, same syntax.
    #[arg(long, allow_hyphen_values = true)]
    rho_grid: Option<GridSpec>,
    #[command(flatten)]
    out: OutputArgs,
}

pub fn lengths(a: &LengthsArgs) -> Result<()> {
    let ratios = a.s2_grid.values();
    let rhos = a.rho_grid.map(|g| g.values());
    let rows = length_ratio_table(a.level, &ratios, rhos.as_deref())?;
    info!("{} cells", rows.len());
    match a.out.format_or(Format::Csv) {
        Format::Csv => a.out.emit(|w| io::write_lengths_csv(w, &rows)),
        Format::Json => a.out.emit_json(&rows),
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Replications; defaults to 100000 (joint-normal) or 500 (demo).
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed.
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    seed: u64,
    /// True parameter (joint-normal).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Bias of theta2_hat (joint-normal).
    #[arg(long, allow_hyphen_values = true)]
    b2: Option<f64>,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long)]
    s2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Interval kinds (joint-normal).
    #[arg(long)]
    kinds: Option<String>,
    /// Comma-separated sample sizes (demo).
    #[arg(long)]
    n: Option<String>,
    /// Bootstrap replications per simulated sample (demo).
    #[arg(long)]
    boot: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

fn reject_flags(mode: &str, flags: &[(&str, bool)]) -> Result<()> {
    match flags.iter().find(|(_, given)| *given) {
        Some((name, _)) => Err(Error::Domain(format!(
            "--{name} does not apply to --mode {mode}"
        ))),
        None => Ok(()),
    }
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Domain(format!("--mode joint-normal needs --{name}")))
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    match a.mode {
        Mode::JointNormal => simulate_joint(a),
        Mode::Demo => simulate_demo(a),
    }
}

fn simulate_joint(a: &SimulateArgs) -> Result<()> {
    reject_flags(
        "joint-normal",
        &[("n", a.n.is_some()), ("boot", a.boot.is_some())],
    )?;
    let model = EstimatorModel::new(
        a.theta.unwrap_or(0.0),
        need(a.b2, "b2")?,
        need(a.s1, "s1")?,
        need(a.s2, "s2")?,
        a.rho,
    )?;
    let kinds = io::parse_kind_list(a.kinds.as_deref().unwrap_or("CI1,CI2,CI5"))?;
    let cfg = SimulationConfig {
        model,
        level: a.level,
        n_reps: a.reps.unwrap_or(100_000),
        seed: Seed(a.seed),
        kinds,
    };
    let result = simulate_joint_normal(&cfg)?;
    for s in &result.summaries {
        info!(
            "{}: coverage {} (se {})",
            s.kind,
            short(s.coverage),
            short(s.mc_stderr)
        );
    }
    match a.out.format_or(Format::Csv) {
        Format::Csv => a
            .out
            .emit(|w| io::write_simulation_csv(w, &result.summaries)),
        Format::Json => a.out.emit_json(&result),
    }
}

fn simulate_demo(a: &SimulateArgs) -> Result<()> {
    reject_flags(
        "demo",
        &[
            ("theta", a.theta.is_some()),
            ("b2", a.b2.is_some()),
            ("s1", a.s1.is_some()),
            ("s2", a.s2.is_some()),
            ("rho", a.rho.is_some()),
            ("kinds", a.kinds.is_some()),
        ],
    )?;
    let sizes =
        a.n.as_deref()
            .unwrap_or("100,200")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad sample size {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
    let cfg = StudyConfig {
        cells: sizes
            .into_iter()
            .map(|n| StudyCell { n, level: a.level })
            .collect(),
        sim_reps: a.reps.unwrap_or(500),
        n_boot: a.boot.unwrap_or(399),
        master_seed: Seed(a.seed),
    };
    let rows = run_study(&cfg)?;
    for r in &rows {
        let cps: Vec<String> = r.stats.iter().map(|s| short(s.coverage)).collect();
        info!("n = {}: coverage {}", r.n, cps.join(" "));
    }
    match a.out.format_or(Format::Csv) {
        Format::Csv => a.out.emit(|w| io::write_study_csv(w, &rows)),
        Format::Json => {
            let text = io::study_json(&rows)?;
            a.out.emit(|w| {
                writeln!(w, "{text}").map_err(|e| Error::Domain(format!("write failed: {e}")))
            })
        }
    }
}
