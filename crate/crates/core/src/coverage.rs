//! Analytic coverage probabilities.
//!
//! Under equal MSE the bias and the biased estimator's standard error are
//! tied together by an angle `t`: `b2 = s1 sin t`, `s2 = s1 cos t`. The
//! coverage of `theta2_hat +- z s1` then depends on `(t, z)` only:
//!
//! ```text
//! CP(t, z) = Phi((z - sin t) / cos t) - Phi((-z - sin t) / cos t)
//! ```
//!
//! For the convex combination `(1 - w) theta1_hat + w theta2_hat` the bias
//! becomes `w sin t` and the scale `s3w / s1` with
//! `s3w^2 = (1-w)^2 s1^2 + w^2 s2^2 + 2 rho w (1-w) s1 s2`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_rho, check_std_errors, check_weight};
use crate::normal::{cdf, two_sided_z};
use crate::optimize::grid_then_golden;
use crate::{Error, Result};

/// Grid size for the worst-case scan over `t`.
pub const WORST_CASE_GRID: usize = 2001;
const WORST_CASE_TOL: f64 = 1e-8;
/// Deficit below the nominal level that counts as undercoverage when
/// locating the threshold level. Well above the rounding noise of `cp_t`.
const THRESHOLD_DEFICIT: f64 = 1e-13;

/// Joint normal sampling model for the estimator pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorModel {
    /// True parameter. Only used by simulations.
    pub theta: f64,
    /// Bias of the second estimator.
    pub b2: f64,
    pub s1: f64,
    pub s2: f64,
    /// Correlation of the two estimators, when known.
    pub rho: Option<f64>,
}

impl EstimatorModel {
    pub fn new(theta: f64, b2: f64, s1: f64, s2: f64, rho: Option<f64>) -> Result<Self> {
        let model = EstimatorModel {
            theta,
            b2,
            s1,
            s2,
            rho,
        };
        model.validate()?;
        Ok(model)
    }

    /// Places the model on the equal-MSE frontier at angle `t`.
    pub fn equal_mse(theta: f64, s1: f64, t: f64, rho: Option<f64>) -> Result<Self> {
        check_angle(t)?;
        let (b2, s2) = if t >= FRAC_PI_2 {
            (s1, 0.0)
        } else {
            (s1 * t.sin(), s1 * t.cos())
        };
        Self::new(theta, b2, s1, s2, rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || !self.b2.is_finite() {
            return Err(Error::domain("theta and b2 must be finite"));
        }
        check_std_errors(self.s1, self.s2)?;
        if let Some(rho) = self.rho {
            check_rho(rho)?;
        }
        let mse = self.b2 * self.b2 + self.s2 * self.s2;
        let bound = self.s1 * self.s1;
        if mse > bound * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "b2^2 + s2^2 = {mse} exceeds s1^2 = {bound}; the biased estimator must not have higher MSE"
            )));
        }
        Ok(())
    }

    /// Largest bias magnitude allowed by the MSE inequality.
    pub fn bias_bound(&self) -> f64 {
        bias_bound(self.s1, self.s2)
    }
}

pub(crate) fn bias_bound(s1: f64, s2: f64) -> f64 {
    ((s1 - s2) * (s1 + s2)).max(0.0).sqrt()
}

/// Equal-MSE angle `acos(s2 / s1)`, with the `s2 = 0` end mapped to exactly
/// `pi / 2`.
pub fn angle_from_ratio(s2_over_s1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s2_over_s1) {
        return Err(Error::domain(format!(
            "s2/s1 must lie in [0, 1], got {s2_over_s1}"
        )));
    }
    Ok(if s2_over_s1 == 0.0 {
        FRAC_PI_2
    } else {
        s2_over_s1.acos()
    })
}

fn check_angle(t: f64) -> Result<()> {
    if t.is_finite() && (0.0..=FRAC_PI_2).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "bias angle must lie in [0, pi/2], got {t}"
        )))
    }
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "critical value must be positive and finite, got {z}"
        )))
    }
}

/// Coverage of a point mass at bias `b` by `[-z, z]` (closed).
fn point_mass_cp(b: f64, z: f64) -> f64 {
    if b.abs() <= z {
        1.0
    } else {
        0.0
    }
}

/// P(|N(b, scale^2)| <= z) for `b >= 0`, `scale > 0`.
fn shifted_cp(b: f64, scale: f64, z: f64) -> f64 {
    cdf((z - b) / scale) - cdf((-z - b) / scale)
}

/// Coverage of `theta2_hat +- z s1` on the equal-MSE frontier.
///
/// At `t = pi/2` the second estimator is a point mass at `theta + s1`, so the
/// coverage is 1 when `z >= 1` and 0 otherwise.
pub fn cp_t(t: f64, z: f64) -> Result<f64> {
    check_angle(t)?;
    check_z(z)?;
    if t >= FRAC_PI_2 {
        return Ok(point_mass_cp(1.0, z));
    }
    Ok(shifted_cp(t.sin(), t.cos(), z))
}

/// Coverage of `theta2_hat +- z s1` given the bias directly.
///
/// Even in `b2` by construction. `s2 = 0` is the point-mass case.
pub fn cp_from_bias(b2: f64, s1: f64, s2: f64, z: f64) -> Result<f64> {
    if !(s1.is_finite() && s1 > 0.0) {
        return Err(Error::domain(format!("s1 must be positive, got {s1}")));
    }
    if !(s2.is_finite() && s2 >= 0.0) {
        return Err(Error::domain(format!("s2 must be nonnegative, got {s2}")));
    }
    if !b2.is_finite() {
        return Err(Error::domain(format!("bias must be finite, got {b2}")));
    }
    check_z(z)?;
    let b = b2.abs();
    if s2 == 0.0 {
        return Ok(point_mass_cp(b, z * s1));
    }
    Ok(shifted_cp(b, s2, z * s1))
}

/// `s3w / s1` on the equal-MSE frontier, written as
/// `sqrt(((1-w) + rho w c)^2 + (1 - rho^2) w^2 c^2)` so that the
/// `rho = -1` cancellation is exact.
pub fn combination_scale(cos_t: f64, w: f64, rho: f64) -> f64 {
    let a = (1.0 - w) + rho * w * cos_t;
    let b = (1.0 - rho * rho).max(0.0).sqrt() * w * cos_t;
    a.hypot(b)
}

/// Coverage of `theta3w_hat +- z s1` on the equal-MSE frontier, where
/// `theta3w_hat = (1 - w) theta1_hat + w theta2_hat`.
pub fn cp_w(t: f64, z: f64, w: f64, rho: f64) -> Result<f64> {
    check_angle(t)?;
    check_z(z)?;
    check_weight(w)?;
    check_rho(rho)?;
    if w == 1.0 {
        return cp_t(t, z);
    }
    let (sin_t, cos_t) = if t >= FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        (t.sin(), t.cos())
    };
    let scale = combination_scale(cos_t, w, rho);
    if scale.is_nan() || scale < 1e-12 {
        return Err(Error::Degenerate(format!(
            "w = {w}, rho = {rho}, cos t = {cos_t} gives a zero-variance combination"
        )));
    }
    Ok(shifted_cp(w * sin_t, scale, z))
}

/// Location and value of the smallest coverage over `t in [0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub t_min: f64,
    pub cp_min: f64,
    /// Strict local minima seen on the scan grid.
    pub local_minima: usize,
}

fn worst_case_by<F: Fn(f64) -> Result<f64>>(f: F) -> Result<WorstCase> {
    let g = grid_then_golden(f, 0.0, FRAC_PI_2, WORST_CASE_GRID, WORST_CASE_TOL, false)?;
    Ok(WorstCase {
        t_min: g.minimum.x,
        cp_min: g.minimum.value,
        local_minima: g.local_minima,
    })
}

/// Worst-case coverage of `theta2_hat +- z s1` over the equal-MSE frontier.
///
/// Dense grid plus golden-section refinement; `cp_t(., z)` is not assumed
/// unimodal. Ties go to the smaller `t`.
pub fn worst_case_cp(z: f64) -> Result<WorstCase> {
    check_z(z)?;
    worst_case_by(|t| cp_t(t, z))
}

/// Worst case of `cp_w(., z, w, rho)` over `t`.
pub fn worst_case_cp_w(z: f64, w: f64, rho: f64) -> Result<WorstCase> {
    check_z(z)?;
    check_weight(w)?;
    check_rho(rho)?;
    worst_case_by(|t| cp_w(t, z, w, rho))
}

/// `cp_w` on `points` equally spaced angles in `[0, pi/2]`, endpoints
/// included, together with the refined worst case.
pub fn cp_curve(z: f64, w: f64, rho: f64, points: usize) -> Result<(Vec<(f64, f64)>, WorstCase)> {
    if points < 2 {
        return Err(Error::domain(format!(
            "a curve needs at least 2 points, got {points}"
        )));
    }
    let worst = worst_case_cp_w(z, w, rho)?;
    let step = FRAC_PI_2 / (points - 1) as f64;
    let curve = (0..points)
        .map(|i| {
            let t = if i + 1 == points {
                FRAC_PI_2
            } else {
                i as f64 * step
            };
            cp_w(t, z, w, rho).map(|cp| (t, cp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((curve, worst))
}

fn undercovers(level: f64) -> Result<bool> {
    let z = two_sided_z(level)?;
    Ok(worst_case_cp(z)?.cp_min < level - THRESHOLD_DEFICIT)
}

/// Smallest confidence level at which `theta2_hat +- z s1` covers at least
/// the nominal level for every bias on the equal-MSE frontier.
///
/// Bisection on the level over `[0.85, 0.95]` to width `tol`.
pub fn coverage_threshold_level(tol: f64) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (mut lo, mut hi) = (0.85, 0.95);
    if !undercovers(lo)? || undercovers(hi)? {
        return Err(Error::Numerical(
            "threshold is not bracketed by [0.85, 0.95]".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if undercovers(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{sample_bivariate, Seed};
    use rand::Rng;

    const Z90: f64 = 1.644854;
    const Z95: f64 = 1.959964;

    #[test]
    fn cp_t_at_zero_bias_is_nominal() {
        for z in [0.3, 1.0, Z90, Z95, 2.575829] {
            let expected = 2.0 * cdf(z) - 1.0;
            assert!((cp_t(0.0, z).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn cp_t_published_values() {
        assert!((cp_t(0.359, Z90).unwrap() - 0.899953).abs() < 1e-6);
        assert!((cp_t(std::f64::consts::FRAC_PI_3, Z95).unwrap() - 0.986).abs() < 5e-4);
    }

    #[test]
    fn cp_t_point_mass_limit() {
        assert_eq!(cp_t(FRAC_PI_2, 1.0).unwrap(), 1.0);
        assert_eq!(cp_t(FRAC_PI_2, 1.5).unwrap(), 1.0);
        assert_eq!(cp_t(FRAC_PI_2, 0.99).unwrap(), 0.0);
        // approaches the limit from inside the interval
        assert!(cp_t(FRAC_PI_2 - 1e-6, 0.99).unwrap() < 1e-6);
        assert!(cp_t(FRAC_PI_2 - 1e-6, 1.5).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn cp_t_domain() {
        assert!(cp_t(0.1, 0.0).is_err());
        assert!(cp_t(0.1, -1.0).is_err());
        assert!(cp_t(-0.1, 1.0).is_err());
        assert!(cp_t(2.0, 1.0).is_err());
    }

    #[test]
    fn cp_from_bias_worked_example() {
        assert!((cp_from_bias(0.0, 1.0, 1.0, Z95).unwrap() - (2.0 * cdf(Z95) - 1.0)).abs() < 1e-15);
        assert!((cp_from_bias(0.5, 1.0, 0.5, Z95).unwrap() - 0.998).abs() < 5e-4);
        assert!((cp_from_bias(0.5, 1.0, 0.5, 1.69).unwrap() - 0.991).abs() < 5e-4);
    }

    #[test]
    fn cp_from_bias_point_mass() {
        assert_eq!(cp_from_bias(1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(cp_from_bias(-1.2, 1.0, 0.0, 1.1).unwrap(), 0.0);
        assert!(cp_from_bias(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(cp_from_bias(0.0, 1.0, -1.0, 1.0).is_err());
        assert!(cp_from_bias(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cp_w_special_weights() {
        for &(t, z, rho) in &[
            (0.0, Z95, 0.1),
            (0.7, 1.3, -0.5),
            (1.5, 2.2, 1.0),
            (FRAC_PI_2, 0.9, 0.0),
        ] {
            assert_eq!(cp_w(t, z, 1.0, rho).unwrap(), cp_t(t, z).unwrap());
            let unbiased = cp_w(t, z, 0.0, rho).unwrap();
            assert!((unbiased - (2.0 * cdf(z) - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn cp_w_degenerate_combination() {
        let err = cp_w(0.0, Z95, 0.5, -1.0).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "{err:?}");
        // cos t = (1 - w) / w with w = 0.8
        let t = 0.25f64.acos();
        assert!(matches!(cp_w(t, Z95, 0.8, -1.0), Err(Error::Degenerate(_))));
        assert!(cp_w(t, Z95, 0.8, -0.99).is_ok());
    }

    #[test]
    fn cp_w_matches_simulation() {
        // (t, z, w, rho) = (0.8, 1.959964, 0.5, 0.3), theta = 0, s1 = 1
        let (t, z, w, rho) = (0.8_f64, Z95, 0.5, 0.3);
        let n = 1_000_000;
        let draws = sample_bivariate(0.0, t.sin(), 1.0, t.cos(), rho, Seed(4242), n).unwrap();
        let hits = draws
            .iter()
            .filter(|&&(a, b)| ((1.0 - w) * a + w * b).abs() <= z)
            .count();
        let mc = hits as f64 / n as f64;
        let analytic = cp_w(t, z, w, rho).unwrap();
        assert!((mc - analytic).abs() < 0.002, "mc {mc} analytic {analytic}");
    }

    #[test]
    fn worst_case_at_ninety_percent() {
        let wc = worst_case_cp(Z90).unwrap();
        assert!((wc.t_min - 0.359).abs() < 1e-3, "{wc:?}");
        assert!((wc.cp_min - 0.899953).abs() < 1e-4, "{wc:?}");
    }

    #[test]
    fn worst_case_at_conventional_levels_is_zero_bias() {
        let wc = worst_case_cp(Z95).unwrap();
        assert_eq!(wc.t_min, 0.0);
        assert!((wc.cp_min - 0.95).abs() < 1e-6);
        let wc = worst_case_cp(2.575829).unwrap();
        assert_eq!(wc.t_min, 0.0);
        assert!((wc.cp_min - 0.99).abs() < 1e-6);
    }

    #[test]
    fn threshold_level() {
        let l = coverage_threshold_level(1e-4).unwrap();
        assert!((l - 0.917).abs() < 1e-3, "{l}");
        assert!(worst_case_cp(two_sided_z(0.95).unwrap()).unwrap().cp_min >= 0.95 - 1e-15);
        let at90 = worst_case_cp(two_sided_z(0.90).unwrap()).unwrap().cp_min;
        assert!((at90 - 0.899953).abs() < 1e-6 && at90 < 0.90);
    }

    #[test]
    fn model_validation() {
        assert!(EstimatorModel::new(0.0, 0.5, 1.0, 0.5, None).is_ok());
        assert!(EstimatorModel::new(0.0, 0.9, 1.0, 0.5, None).is_err());
        assert!(matches!(
            EstimatorModel::new(0.0, 0.0, 1.0, 1.1, None),
            Err(Error::MseViolation { .. })
        ));
        assert!(EstimatorModel::new(0.0, 0.0, 1.0, 0.5, Some(1.5)).is_err());
        let m =
            EstimatorModel::equal_mse(0.0, 2.0, std::f64::consts::FRAC_PI_6, Some(0.2)).unwrap();
        assert!((m.bias_bound() - m.b2).abs() < 1e-12);
        assert!(
            (EstimatorModel::new(0.0, 0.0, 1.0, 0.6, None)
                .unwrap()
                .bias_bound()
                - 0.8)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn evenness_in_bias_is_exact() {
        let mut rng = Seed(1).rng();
        for _ in 0..10_000 {
            let b: f64 = rng.random_range(-3.0..3.0);
            let s1: f64 = rng.random_range(0.1..3.0);
            let s2: f64 = rng.random_range(0.0..3.0);
            let z: f64 = rng.random_range(0.05..4.0);
            assert_eq!(
                cp_from_bias(b, s1, s2, z).unwrap(),
                cp_from_bias(-b, s1, s2, z).unwrap()
            );
        }
    }

    #[test]
    fn smaller_bias_covers_more() {
        let mut rng = Seed(2).rng();
        let mut checked = 0;
        while checked < 10_000 {
            let s1: f64 = rng.random_range(0.2..2.0);
            let s2: f64 = s1 * rng.random_range(0.05..1.0);
            let z: f64 = rng.random_range(0.5..3.0);
            let bb: f64 = rng.random_range(0.05..2.0) * s1;
            let b2: f64 = bb * rng.random_range(-0.99..0.99);
            let lhs = cp_from_bias(b2, s1, s2, z).unwrap();
            let rhs = cp_from_bias(bb, s1, s2, z).unwrap();
            // too close to 1 for double precision to separate
            if rhs > 1.0 - 1e-10 {
                continue;
            }
            assert!(lhs > rhs, "b2={b2} bB={bb} s1={s1} s2={s2} z={z}");
            checked += 1;
        }
    }

    #[test]
    fn increasing_in_z() {
        let mut rng = Seed(3).rng();
        let mut checked = 0;
        while checked < 10_000 {
            let t: f64 = rng.random_range(0.0..1.5);
            let w: f64 = rng.random_range(0.0..=1.0);
            let rho: f64 = rng.random_range(-0.9..=1.0);
            let z: f64 = rng.random_range(0.05..3.0);
            let z2 = z + rng.random_range(0.01..1.0);
            let (a, b) = (cp_w(t, z, w, rho).unwrap(), cp_w(t, z2, w, rho).unwrap());
            if a > 1.0 - 1e-10 {
                continue;
            }
            assert!(b > a, "t={t} w={w} rho={rho} z={z} z'={z2}");
            checked += 1;
        }
    }

    #[test]
    fn lower_mse_keeps_coverage_above_bound_case() {
        let z = two_sided_z(0.95).unwrap();
        let mut rng = Seed(4).rng();
        for _ in 0..10_000 {
            let s1: f64 = rng.random_range(0.1..3.0);
            let s2: f64 = s1 * rng.random_range(0.01..0.999);
            let bound = bias_bound(s1, s2);
            let b2 = bound * rng.random_range(-0.999..0.999);
            let cp = cp_from_bias(b2, s1, s2, z).unwrap();
            assert!(cp >= cp_from_bias(bound, s1, s2, z).unwrap());
            assert!(cp >= 0.95 - 1e-12);
        }
    }

    #[test]
    fn reduction_to_cp_t() {
        let mut rng = Seed(5).rng();
        for _ in 0..1000 {
            let t: f64 = rng.random_range(0.0..=FRAC_PI_2);
            let z: f64 = rng.random_range(0.05..4.0);
            let rho: f64 = rng.random_range(-1.0..=1.0);
            assert!((cp_w(t, z, 1.0, rho).unwrap() - cp_t(t, z).unwrap()).abs() <= 1e-15);
        }
    }
}
