//! Calibrated critical values and the length-minimizing convex combination.
//!
//! `calibrated_z` solves `cp_t(acos(s2/s1), z) = level` for `z`; the interval
//! `theta2_hat +- z s1` then has exact coverage when the bias sits at the MSE
//! bound and higher coverage for any smaller bias. `calibrated_z_w` does the
//! same for the convex combination and `optimal_w` picks the weight with the
//! smallest critical value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{angle_from_ratio, cp_t, cp_w};
use crate::error::{check_level, check_rho, check_std_errors, check_weight};
use crate::normal::two_sided_z;
use crate::optimize::{bisect_increasing, grid_then_golden};
use crate::{Error, Result};

/// Largest acceptable `|cp - level|` at the returned critical value.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Grid size for the weight search.
pub const WEIGHT_GRID: usize = 1001;
const WEIGHT_TOL: f64 = 1e-6;

/// A solved critical value together with the inputs that determine it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub z_tilde: f64,
    /// The uncalibrated `z_{(1+level)/2}`.
    pub z_standard: f64,
    pub level: f64,
    pub s2_over_s1: f64,
    pub rho: Option<f64>,
    pub w: f64,
    pub bias_bound_over_s1: f64,
    /// Set when `s2 = 0` and the coverage is a step function of `z`.
    pub degenerate: bool,
}

impl Calibration {
    /// Length relative to the uncalibrated interval `+- z_standard s1`.
    pub fn length_ratio(&self) -> f64 {
        self.z_tilde / self.z_standard
    }

    pub fn angle(&self) -> f64 {
        angle_from_ratio(self.s2_over_s1).expect("validated on construction")
    }

    /// Coverage at the bias bound implied by this critical value.
    pub fn coverage(&self) -> Result<f64> {
        cp_w(self.angle(), self.z_tilde, self.w, self.rho.unwrap_or(0.0))
    }

    /// `coverage() - level`.
    pub fn residual(&self) -> Result<f64> {
        Ok(self.coverage()? - self.level)
    }
}

fn ratio(s1: f64, s2: f64) -> f64 {
    if s2 == s1 {
        1.0
    } else {
        s2 / s1
    }
}

/// Solve `cp(z) = level` for a coverage function that is increasing in `z`
/// with `cp(0+) = 0`.
///
/// Bias is at most `s1` and the scale at most `s1`, so `z = 1 + z_standard`
/// already covers at least `level`; the upper end of the bracket
/// `10 z_standard + 1` contains it.
fn solve_z<F: Fn(f64) -> Result<f64>>(cp: F, level: f64, z_standard: f64) -> Result<f64> {
    let hi = 10.0 * z_standard + 1.0;
    let z = bisect_increasing(&cp, level, 0.0, hi, 0.0, cp(hi)?)?;
    let residual = cp(z)? - level;
    if residual.is_nan() || residual.abs() > RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "critical value {z} leaves residual {residual:e} at level {level}"
        )));
    }
    Ok(z)
}

/// Critical value `z_tilde` with `cp_t(acos(s2/s1), z_tilde) = level`.
///
/// Depends on `(s1, s2)` only through `s2 / s1`. With `s2 = 0` the coverage
/// jumps from 0 to 1 at `z = 1`, so `z_tilde = 1` and the result is flagged
/// degenerate.
pub fn calibrated_z(s1: f64, s2: f64, level: f64) -> Result<Calibration> {
    check_std_errors(s1, s2)?;
    check_level(level)?;
    let r = ratio(s1, s2);
    let t = angle_from_ratio(r)?;
    let z_standard = two_sided_z(level)?;
    let mut cal = Calibration {
        z_tilde: z_standard,
        z_standard,
        level,
        s2_over_s1: r,
        rho: None,
        w: 1.0,
        bias_bound_over_s1: ((1.0 - r) * (1.0 + r)).sqrt(),
        degenerate: false,
    };
    if r == 1.0 {
        return Ok(cal);
    }
    if s2 == 0.0 {
        cal.z_tilde = 1.0;
        cal.degenerate = true;
        return Ok(cal);
    }
    cal.z_tilde = solve_z(
        |z| if z > 0.0 { cp_t(t, z) } else { Ok(0.0) },
        level,
        z_standard,
    )?;
    Ok(cal)
}

/// Critical value for `(1 - w) theta1_hat + w theta2_hat +- z s1`.
pub fn calibrated_z_w(s1: f64, s2: f64, rho: f64, level: f64, w: f64) -> Result<Calibration> {
    check_std_errors(s1, s2)?;
    check_level(level)?;
    check_rho(rho)?;
    check_weight(w)?;
    if w == 1.0 {
        let mut cal = calibrated_z(s1, s2, level)?;
        cal.rho = Some(rho);
        return Ok(cal);
    }
    let r = ratio(s1, s2);
    let t = angle_from_ratio(r)?;
    let z_standard = two_sided_z(level)?;
    // surfaces the degenerate-combination error before solving
    cp_w(t, 1.0, w, rho)?;
    let z_tilde = solve_z(
        |z| if z > 0.0 { cp_w(t, z, w, rho) } else { Ok(0.0) },
        level,
        z_standard,
    )?;
    Ok(Calibration {
        z_tilde,
        z_standard,
        level,
        s2_over_s1: r,
        rho: Some(rho),
        w,
        bias_bound_over_s1: ((1.0 - r) * (1.0 + r)).sqrt(),
        degenerate: false,
    })
}

/// Length-minimizing convex combination weight and its calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalWeight {
    pub w_star: f64,
    pub calibration: Calibration,
    /// Strict local minima of `z_tilde(w)` seen on the weight grid.
    pub local_minima: usize,
}

/// Weight in `[0, 1]` minimizing the calibrated critical value.
///
/// Grid of 1001 weights, then golden-section refinement to `1e-6`. Ties go to
/// the larger weight. Weights whose combination has zero variance are
/// skipped. `w = 1` is on the grid, so the result is never longer than the
/// `w = 1` interval.
pub fn optimal_w(s1: f64, s2: f64, rho: f64, level: f64) -> Result<OptimalWeight> {
    check_std_errors(s1, s2)?;
    check_level(level)?;
    check_rho(rho)?;
    let objective = |w: f64| match calibrated_z_w(s1, s2, rho, level, w) {
        Ok(cal) => Ok(cal.z_tilde),
        Err(Error::Degenerate(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let found = grid_then_golden(objective, 0.0, 1.0, WEIGHT_GRID, WEIGHT_TOL, true)?;
    if found.local_minima > 1 {
        log::warn!(
            "z_tilde(w) has {} local minima on the grid (s2/s1 = {}, rho = {rho}, level = {level})",
            found.local_minima,
            ratio(s1, s2)
        );
    }
    let w_star = found.minimum.x;
    let calibration = calibrated_z_w(s1, s2, rho, level, w_star)?;
    Ok(OptimalWeight {
        w_star,
        calibration,
        local_minima: found.local_minima,
    })
}

/// One cell of a length-ratio table: calibrated length relative to the
/// uncalibrated `+- z s1` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthRatioRow {
    pub s2_over_s1: f64,
    pub rho: Option<f64>,
    pub ratio_ci5: f64,
    pub ratio_ci6: Option<f64>,
}

/// Length ratios over a grid of `s2/s1` (and optionally `rho`).
///
/// Cells are evaluated in parallel; output order is `s2/s1` major, `rho`
/// minor, identical to a serial loop.
pub fn length_ratio_table(
    level: f64,
    s2_over_s1: &[f64],
    rho: Option<&[f64]>,
) -> Result<Vec<LengthRatioRow>> {
    check_level(level)?;
    for &r in s2_over_s1 {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!(
                "s2/s1 grid value {r} is outside [0, 1]"
            )));
        }
    }
    if let Some(rhos) = rho {
        rhos.iter().try_for_each(|&p| check_rho(p))?;
    }
    let cells: Vec<(f64, Option<f64>)> = match rho {
        None => s2_over_s1.iter().map(|&r| (r, None)).collect(),
        Some(rhos) => s2_over_s1
            .iter()
            .flat_map(|&r| rhos.iter().map(move |&p| (r, Some(p))))
            .collect(),
    };
    cells
        .par_iter()
        .map(|&(r, p)| {
            let ratio_ci5 = calibrated_z(1.0, r, level)?.length_ratio();
            let ratio_ci6 = match p {
                Some(p) => Some(optimal_w(1.0, r, p, level)?.calibration.length_ratio()),
                None => None,
            };
            Ok(LengthRatioRow {
                s2_over_s1: r,
                rho: p,
                ratio_ci5,
                ratio_ci6,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::cp_from_bias;
    use crate::normal::Seed;
    use rand::Rng;

    #[test]
    fn zero_bias_bound_gives_standard_z() {
        for level in [0.5, 0.9, 0.95, 0.99] {
            let cal = calibrated_z(2.0, 2.0, level).unwrap();
            assert_eq!(cal.z_tilde, two_sided_z(level).unwrap());
            assert_eq!(cal.bias_bound_over_s1, 0.0);
        }
    }

    #[test]
    fn worked_example_critical_value() {
        let cal = calibrated_z(1.0, 0.5, 0.95).unwrap();
        assert!((cal.z_tilde - 1.69).abs() < 0.005);
        assert!((cal.length_ratio() - 0.86).abs() < 0.005);
        assert!((cal.bias_bound_over_s1 - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ninety_percent_critical_value_slightly_above_standard() {
        let cal = calibrated_z(1.0, 0.359f64.cos(), 0.90).unwrap();
        assert!((cal.z_tilde - 1.6451).abs() < 5e-4, "{cal:?}");
        assert!((cal.length_ratio() - 1.0001369).abs() < 5e-5, "{cal:?}");
        assert!(cal.z_tilde > cal.z_standard);
    }

    #[test]
    fn degenerate_s2_zero() {
        let cal = calibrated_z(1.0, 0.0, 0.95).unwrap();
        assert!(cal.degenerate);
        assert_eq!(cal.z_tilde, 1.0);
        assert_eq!(cal.coverage().unwrap(), 1.0);
    }

    #[test]
    fn mse_violation() {
        assert!(matches!(
            calibrated_z(1.0, 1.2, 0.95),
            Err(Error::MseViolation { .. })
        ));
        assert!(calibrated_z(1.0, 0.5, 1.0).is_err());
        assert!(calibrated_z(0.0, 0.0, 0.95).is_err());
    }

    #[test]
    fn weight_endpoints() {
        let one = calibrated_z_w(1.0, 0.4, 0.3, 0.95, 1.0).unwrap();
        assert_eq!(one.z_tilde, calibrated_z(1.0, 0.4, 0.95).unwrap().z_tilde);
        let zero = calibrated_z_w(1.0, 0.4, 0.3, 0.95, 0.0).unwrap();
        assert!((zero.z_tilde - two_sided_z(0.95).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_at_zero_bias_bound() {
        // z_w = z * s3w / s1 with s3w^2 = 0.25 + 0.25 + 2 * 0.1 * 0.25
        let cal = calibrated_z_w(1.0, 1.0, 0.1, 0.95, 0.5).unwrap();
        let expected = two_sided_z(0.95).unwrap() * 0.55f64.sqrt();
        assert!((cal.z_tilde - expected).abs() < 1e-12);
        assert!((cal.z_tilde - 1.4536).abs() < 1e-4);
    }

    #[test]
    fn degenerate_combination_is_an_error() {
        assert!(matches!(
            calibrated_z_w(1.0, 1.0, -1.0, 0.95, 0.5),
            Err(Error::Degenerate(_))
        ));
    }

    /// Brute-force minimizer over a fine weight grid, independent of the
    /// grid-plus-golden search.
    fn brute_force_w(s1: f64, s2: f64, rho: f64, level: f64) -> (f64, f64) {
        (0..=20_000)
            .map(|i| i as f64 / 20_000.0)
            .map(|w| (w, calibrated_z_w(s1, s2, rho, level, w).unwrap().z_tilde))
            .fold(
                (1.0, f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            )
    }

    #[test]
    fn optimal_weight_closed_form() {
        let opt = optimal_w(1.0, 1.0, 0.1, 0.95).unwrap();
        // (s1^2 - rho s1 s2) / (s1^2 + s2^2 - 2 rho s1 s2) = 0.9 / 1.8
        assert!((opt.w_star - 0.5).abs() < 1e-3, "{opt:?}");
        let ci5 = calibrated_z(1.0, 1.0, 0.95).unwrap();
        assert!((opt.calibration.z_tilde / ci5.z_tilde - 0.74).abs() < 0.005);
        let (w_bf, _) = brute_force_w(1.0, 1.0, 0.1, 0.95);
        assert!((opt.w_star - w_bf).abs() < 1e-3);
    }

    #[test]
    fn optimal_weight_matches_brute_force() {
        for &(s2, rho) in &[(0.5, 0.3), (0.8, -0.4), (0.2, 0.9), (0.95, 0.0)] {
            let opt = optimal_w(1.0, s2, rho, 0.95).unwrap();
            let (_, z_bf) = brute_force_w(1.0, s2, rho, 0.95);
            assert!(opt.calibration.z_tilde <= z_bf + 1e-9, "s2={s2} rho={rho}");
            assert_eq!(opt.local_minima, 1);
        }
    }

    #[test]
    fn small_s2_puts_weight_on_biased_estimator() {
        let opt = optimal_w(1.0, 0.02, 0.5, 0.95).unwrap();
        let ci5 = calibrated_z(1.0, 0.02, 0.95).unwrap();
        assert!(opt.w_star > 0.95, "{opt:?}");
        assert!((opt.calibration.z_tilde / ci5.z_tilde - 1.0).abs() < 0.02);
    }

    #[test]
    fn optimal_weight_survives_perfect_negative_correlation() {
        let opt = optimal_w(1.0, 1.0, -1.0, 0.95).unwrap();
        assert!(opt.calibration.z_tilde.is_finite());
    }

    #[test]
    fn table_examples() {
        let rows = length_ratio_table(0.95, &[0.1, 1.0], Some(&[0.1])).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].ratio_ci5 < 0.60);
        assert_eq!(rows[1].ratio_ci5, 1.0);
        assert!((rows[1].ratio_ci6.unwrap() - 0.74).abs() < 0.005);
        let plain = length_ratio_table(0.95, &[0.1, 0.5], None).unwrap();
        assert!(plain
            .iter()
            .all(|r| r.ratio_ci6.is_none() && r.rho.is_none()));
        assert!(length_ratio_table(0.95, &[1.5], None).is_err());
    }

    #[test]
    fn table_ci5_column_ignores_rho() {
        let rows = length_ratio_table(0.95, &[0.3, 0.7], Some(&[-0.5, 0.2, 0.9])).unwrap();
        for chunk in rows.chunks(3) {
            assert!(chunk.iter().all(|r| r.ratio_ci5 == chunk[0].ratio_ci5));
        }
    }

    #[test]
    fn residuals_and_scale_invariance() {
        let mut rng = Seed(10).rng();
        for _ in 0..1000 {
            let s1: f64 = rng.random_range(0.01..10.0);
            let r: f64 = rng.random_range(0.0..1.0);
            let level: f64 = rng.random_range(0.5..0.999);
            let c: f64 = rng.random_range(0.01..100.0);
            let a = calibrated_z(s1, r * s1, level).unwrap();
            let b = calibrated_z(c * s1, c * r * s1, level).unwrap();
            assert!(a.residual().unwrap().abs() <= 1e-9);
            assert!(
                (a.z_tilde - b.z_tilde).abs() <= 1e-12 * a.z_tilde,
                "{a:?} {b:?}"
            );
        }
    }

    #[test]
    fn weighted_residuals() {
        let mut rng = Seed(11).rng();
        for _ in 0..200 {
            let r: f64 = rng.random_range(0.0..=1.0);
            let rho: f64 = rng.random_range(-0.95..=1.0);
            let w: f64 = rng.random_range(0.0..=1.0);
            let level: f64 = rng.random_range(0.6..0.995);
            let cal = calibrated_z_w(1.0, r, rho, level, w).unwrap();
            assert!(cal.residual().unwrap().abs() <= 1e-9, "{cal:?}");
        }
    }

    #[test]
    fn shorter_at_conventional_levels() {
        let mut rng = Seed(12).rng();
        for _ in 0..300 {
            let r: f64 = rng.random_range(0.0..0.99);
            let level: f64 = rng.random_range(0.92..0.995);
            let cal = calibrated_z(1.0, r, level).unwrap();
            assert!(cal.z_tilde < cal.z_standard, "{cal:?}");
        }
    }

    #[test]
    fn coverage_guarantee_over_allowed_biases() {
        let mut rng = Seed(13).rng();
        for _ in 0..2000 {
            let s1: f64 = rng.random_range(0.1..5.0);
            let s2: f64 = s1 * rng.random_range(0.01..1.0);
            let level: f64 = rng.random_range(0.5..0.99);
            let cal = calibrated_z(s1, s2, level).unwrap();
            let bound = (s1 * s1 - s2 * s2).sqrt();
            let b2 = bound * rng.random_range(-1.0..=1.0);
            assert!(cp_from_bias(b2, s1, s2, cal.z_tilde).unwrap() >= level - 1e-9);
            let at_bound = cp_from_bias(bound, s1, s2, cal.z_tilde).unwrap();
            assert!((at_bound - level).abs() <= 1e-9);
        }
    }

    #[test]
    fn bracket_always_straddles_the_level() {
        let mut rng = Seed(14).rng();
        for _ in 0..500 {
            let r: f64 = rng.random_range(0.001..=1.0);
            let rho: f64 = rng.random_range(-0.9..=1.0);
            let w: f64 = rng.random_range(0.0..=1.0);
            let level: f64 = rng.random_range(0.001..0.9999);
            let z = two_sided_z(level).unwrap();
            let cp_hi = cp_w(r.acos(), 10.0 * z + 1.0, w, rho).unwrap();
            assert!(cp_hi >= level);
        }
    }
}
