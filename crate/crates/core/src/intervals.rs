//! Interval constructors.
//!
//! | kind  | center                         | half-width          |
//! |-------|--------------------------------|---------------------|
//! | CI1   | `theta1_hat`                   | `z s1`              |
//! | CI2   | `theta2_hat`                   | `z s1`              |
//! | CI3   | `theta1_hat`                   | `z s2`              |
//! | CI4   | `theta2_hat`                   | `z s2`              |
//! | CI5   | `theta2_hat`                   | `z_tilde s1`        |
//! | CI6   | `(1-w*) theta1_hat + w* theta2_hat` | `z_tilde_w* s1` |
//!
//! `CI6s` is CI6 calibrated with the correlation replaced by `(1 + rho)/2`.
//! CI3 and CI4 undercover by construction and are only for comparison.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibrate::{calibrated_z, optimal_w, Calibration};
use crate::error::{check_level, check_rho};
use crate::normal::two_sided_z;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntervalKind {
    CI1,
    CI2,
    CI3,
    CI4,
    CI5,
    CI6,
    #[serde(rename = "CI6s")]
    CI6S,
}

impl IntervalKind {
    pub const ALL: [IntervalKind; 7] = [
        IntervalKind::CI1,
        IntervalKind::CI2,
        IntervalKind::CI3,
        IntervalKind::CI4,
        IntervalKind::CI5,
        IntervalKind::CI6,
        IntervalKind::CI6S,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntervalKind::CI1 => "CI1",
            IntervalKind::CI2 => "CI2",
            IntervalKind::CI3 => "CI3",
            IntervalKind::CI4 => "CI4",
            IntervalKind::CI5 => "CI5",
            IntervalKind::CI6 => "CI6",
            IntervalKind::CI6S => "CI6s",
        }
    }

    pub fn needs_theta1(self) -> bool {
        matches!(
            self,
            IntervalKind::CI1 | IntervalKind::CI3 | IntervalKind::CI6 | IntervalKind::CI6S
        )
    }

    pub fn needs_theta2(self) -> bool {
        !matches!(self, IntervalKind::CI1 | IntervalKind::CI3)
    }

    pub fn needs_rho(self) -> bool {
        matches!(self, IntervalKind::CI6 | IntervalKind::CI6S)
    }
}

impl fmt::Display for IntervalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntervalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        IntervalKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Parse(format!("unknown interval kind {t:?}")))
    }
}

/// Notes attached to an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// CI3 and CI4 cover less than the nominal level whenever `s2 < s1` or
    /// `b2 != 0`.
    Undercovers,
    /// Zero width: a nondegenerate estimator is never covered.
    ZeroCoverage,
    /// `s2 > s1` was clipped to `s2 = s1`.
    Clipped,
    /// Calibrated with `s2 = 0`; the critical value is the step point 1.
    DegenerateCalibration,
    /// Correlation shrunk to `(1 + rho) / 2` before calibration.
    ShrunkRho,
}

/// What to do when `s2 > s1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MsePolicy {
    #[default]
    Strict,
    /// Set `s2 = s1`, which zeroes the bias bound, and tag the interval.
    Clip,
}

/// A symmetric two-sided confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IntervalRecord", try_from = "IntervalRecord")]
pub struct Interval {
    pub kind: IntervalKind,
    pub level: f64,
    pub center: f64,
    pub half_width: f64,
    pub diagnostics: Vec<Diagnostic>,
    pub calibration: Option<Calibration>,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    fn new(kind: IntervalKind, level: f64, center: f64, half_width: f64) -> Self {
        Interval {
            kind,
            level,
            center,
            half_width,
            diagnostics: Vec::new(),
            calibration: None,
        }
    }
}

/// JSON shape of an [`Interval`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalRecord {
    pub kind: IntervalKind,
    pub level: f64,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

impl From<Interval> for IntervalRecord {
    fn from(iv: Interval) -> Self {
        IntervalRecord {
            kind: iv.kind,
            level: iv.level,
            center: iv.center,
            lower: iv.lower(),
            upper: iv.upper(),
            half_width: iv.half_width,
            diagnostics: iv.diagnostics,
            calibration: iv.calibration,
        }
    }
}

impl TryFrom<IntervalRecord> for Interval {
    type Error = Error;

    fn try_from(r: IntervalRecord) -> Result<Self> {
        check_level(r.level)?;
        if !(r.center.is_finite() && r.half_width.is_finite() && r.half_width >= 0.0) {
            return Err(Error::Parse(
                "interval needs a finite center and a nonnegative half-width".into(),
            ));
        }
        if !((r.center - r.half_width).is_finite() && (r.center + r.half_width).is_finite()) {
            return Err(Error::Parse("interval bounds overflow".into()));
        }
        let slack = 1e-9 * (r.center.abs() + r.half_width).max(1.0);
        if !((r.lower - (r.center - r.half_width)).abs() <= slack
            && (r.upper - (r.center + r.half_width)).abs() <= slack)
        {
            return Err(Error::Parse(format!(
                "bounds [{}, {}] disagree with center {} and half-width {}",
                r.lower, r.upper, r.center, r.half_width
            )));
        }
        Ok(Interval {
            kind: r.kind,
            level: r.level,
            center: r.center,
            half_width: r.half_width,
            diagnostics: r.diagnostics,
            calibration: r.calibration,
        })
    }
}

fn check_estimate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn standard(kind: IntervalKind, center: f64, scale: f64, level: f64) -> Result<Interval> {
    Ok(Interval::new(
        kind,
        level,
        center,
        two_sided_z(level)? * scale,
    ))
}

/// `theta1_hat +- z s1`.
pub fn ci1(theta1_hat: f64, s1: f64, level: f64) -> Result<Interval> {
    check_estimate("theta1_hat", theta1_hat)?;
    check_positive("s1", s1)?;
    standard(IntervalKind::CI1, theta1_hat, s1, level)
}

/// `theta2_hat +- z s1`.
pub fn ci2(theta2_hat: f64, s1: f64, level: f64) -> Result<Interval> {
    check_estimate("theta2_hat", theta2_hat)?;
    check_positive("s1", s1)?;
    standard(IntervalKind::CI2, theta2_hat, s1, level)
}

fn with_s2(kind: IntervalKind, center: f64, s2: f64, level: f64) -> Result<Interval> {
    if !(s2.is_finite() && s2 >= 0.0) {
        return Err(Error::domain(format!(
            "s2 must be nonnegative and finite, got {s2}"
        )));
    }
    let mut iv = standard(kind, center, s2, level)?;
    iv.diagnostics.push(Diagnostic::Undercovers);
    if s2 == 0.0 {
        iv.diagnostics.push(Diagnostic::ZeroCoverage);
    }
    Ok(iv)
}

/// `theta1_hat +- z s2`. Comparison only.
pub fn ci3(theta1_hat: f64, s2: f64, level: f64) -> Result<Interval> {
    check_estimate("theta1_hat", theta1_hat)?;
    with_s2(IntervalKind::CI3, theta1_hat, s2, level)
}

/// `theta2_hat +- z s2`. Comparison only.
pub fn ci4(theta2_hat: f64, s2: f64, level: f64) -> Result<Interval> {
    check_estimate("theta2_hat", theta2_hat)?;
    with_s2(IntervalKind::CI4, theta2_hat, s2, level)
}

/// Applies the policy to `s2 > s1`. Returns the `s2` to use and whether it
/// was clipped.
fn apply_policy(s1: f64, s2: f64, policy: MsePolicy) -> Result<(f64, bool)> {
    check_positive("s1", s1)?;
    if !(s2.is_finite() && s2 >= 0.0) {
        return Err(Error::domain(format!(
            "s2 must be nonnegative and finite, got {s2}"
        )));
    }
    match policy {
        _ if s2 <= s1 => Ok((s2, false)),
        MsePolicy::Strict => Err(Error::MseViolation { s1, s2 }),
        MsePolicy::Clip => Ok((s1, true)),
    }
}

fn attach(iv: &mut Interval, cal: Calibration, clipped: bool) {
    if clipped {
        iv.diagnostics.push(Diagnostic::Clipped);
    }
    if cal.degenerate {
        iv.diagnostics.push(Diagnostic::DegenerateCalibration);
    }
    iv.calibration = Some(cal);
}

/// `theta2_hat +- z_tilde s1` with `z_tilde` from [`calibrated_z`].
pub fn ci5(theta2_hat: f64, s1: f64, s2: f64, level: f64, policy: MsePolicy) -> Result<Interval> {
    check_estimate("theta2_hat", theta2_hat)?;
    let (s2, clipped) = apply_policy(s1, s2, policy)?;
    let cal = calibrated_z(s1, s2, level)?;
    let mut iv = Interval::new(IntervalKind::CI5, level, theta2_hat, cal.z_tilde * s1);
    attach(&mut iv, cal, clipped);
    Ok(iv)
}

/// Interval centered at the length-minimizing convex combination.
///
/// With `shrink_rho` the correlation is replaced by `(1 + rho) / 2` for both
/// the weight search and the critical value, and the kind is `CI6s`.
#[allow(clippy::too_many_arguments)]
pub fn ci6(
    theta1_hat: f64,
    theta2_hat: f64,
    s1: f64,
    s2: f64,
    rho: f64,
    level: f64,
    shrink_rho: bool,
    policy: MsePolicy,
) -> Result<Interval> {
    check_estimate("theta1_hat", theta1_hat)?;
    check_estimate("theta2_hat", theta2_hat)?;
    check_rho(rho)?;
    let (s2, clipped) = apply_policy(s1, s2, policy)?;
    let rho_used = if shrink_rho { 0.5 * (1.0 + rho) } else { rho };
    let opt = optimal_w(s1, s2, rho_used, level)?;
    let w = opt.w_star;
    let center = (1.0 - w) * theta1_hat + w * theta2_hat;
    let kind = if shrink_rho {
        IntervalKind::CI6S
    } else {
        IntervalKind::CI6
    };
    let mut iv = Interval::new(kind, level, center, opt.calibration.z_tilde * s1);
    if shrink_rho {
        iv.diagnostics.push(Diagnostic::ShrunkRho);
    }
    attach(&mut iv, opt.calibration, clipped);
    Ok(iv)
}

/// Point estimates and standard errors for building any interval kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimates {
    pub theta1_hat: Option<f64>,
    pub theta2_hat: Option<f64>,
    pub s1: f64,
    pub s2: Option<f64>,
    pub rho: Option<f64>,
}

fn require(v: Option<f64>, what: &str, kind: IntervalKind) -> Result<f64> {
    v.ok_or_else(|| Error::domain(format!("{kind} needs {what}")))
}

/// Builds one interval of the given kind.
pub fn build(
    kind: IntervalKind,
    est: &Estimates,
    level: f64,
    policy: MsePolicy,
) -> Result<Interval> {
    use IntervalKind::*;
    let t1 = || require(est.theta1_hat, "theta1", kind);
    let t2 = || require(est.theta2_hat, "theta2", kind);
    let s2 = || require(est.s2, "s2", kind);
    let rho = || require(est.rho, "rho", kind);
    match kind {
        CI1 => ci1(t1()?, est.s1, level),
        CI2 => ci2(t2()?, est.s1, level),
        CI3 => ci3(t1()?, s2()?, level),
        CI4 => ci4(t2()?, s2()?, level),
        CI5 => ci5(t2()?, est.s1, s2()?, level, policy),
        CI6 => ci6(t1()?, t2()?, est.s1, s2()?, rho()?, level, false, policy),
        CI6S => ci6(t1()?, t2()?, est.s1, s2()?, rho()?, level, true, policy),
    }
}
