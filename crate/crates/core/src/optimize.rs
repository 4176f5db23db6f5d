//! Scalar bisection and golden-section search.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Solves `f(x) = target` on `[lo, hi]` for nondecreasing `f`.
///
/// `f_lo` and `f_hi` are the function values at the bracket ends, passed in so
/// callers can supply analytic limits where `f` itself is undefined. Bisection
/// runs until the midpoint no longer moves, so the result is as accurate as
/// `f` allows.
pub fn bisect_increasing<F>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    f_hi: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::Numerical(format!(
            "bracket [{lo}, {hi}] does not straddle the target {target} (values {f_lo}, {f_hi})"
        )));
    }
    if f_lo == target {
        return Ok(lo);
    }
    if f_hi == target {
        return Ok(hi);
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v.is_nan() {
            return Err(Error::Numerical(format!("objective is NaN at {mid}")));
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<Minimum>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let value = f(x)?;
    let best = [(x, value), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, value), |acc, p| if p.1 < acc.1 { p } else { acc });
    Ok(Minimum {
        x: best.0,
        value: best.1,
    })
}

/// Dense grid scan followed by golden-section refinement around the best
/// grid point. Makes no unimodality assumption beyond the grid spacing.
///
/// `prefer_high` breaks ties toward the larger abscissa. A refined point
/// replaces the grid point only when it improves on it by more than rounding
/// noise, so flat minima stay at the grid location.
pub fn grid_then_golden<F>(
    f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
    prefer_high: bool,
) -> Result<GridMinimum>
where
    F: Fn(f64) -> Result<f64>,
{
    assert!(points >= 2);
    let step = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] || (prefer_high && v == values[best]) {
            best = i;
        }
    }
    let local_minima = (0..points)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i == points - 1 || values[i] < values[i + 1];
            left && right
        })
        .count();

    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(points - 1)];
    let refined = golden_section(&f, a, b, tol)?;
    let grid_value = values[best];
    let noise = 8.0 * f64::EPSILON * grid_value.abs().max(f64::MIN_POSITIVE);
    let minimum = if refined.value < grid_value - noise {
        refined
    } else {
        Minimum {
            x: xs[best],
            value: grid_value,
        }
    };
    Ok(GridMinimum {
        minimum,
        local_minima,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMinimum {
    pub minimum: Minimum,
    /// Strict local minima seen on the grid.
    pub local_minima: usize,
}
