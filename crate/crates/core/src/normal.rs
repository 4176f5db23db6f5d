//! Standard normal primitives and a seeded bivariate normal sampler.
//!
//! The CDF goes through `erfc` so that both tails keep full relative
//! precision; coverage formulas routinely evaluate it at arguments like
//! `-2z - sqrt(3)`. The quantile starts from a rational approximation and is
//! polished with Halley steps against that CDF.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::check_rho;
use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, unchecked. Infinite arguments map to 0 or 1.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal CDF with a domain check on `x`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "normal CDF needs a finite argument, got {x}"
        )));
    }
    Ok(cdf(x))
}

// Acklam's rational approximation to the lower-tail quantile.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

fn rational_lower_quantile(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `p`-quantile of the standard normal for `p <= 0.5`.
fn lower_quantile(p: f64) -> f64 {
    let mut x = rational_lower_quantile(p);
    for _ in 0..2 {
        let e = cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        let step = u / (1.0 + 0.5 * x * u);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Standard normal `p`-quantile, `z_p`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "quantile needs p in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        Ok(0.0)
    } else if p < 0.5 {
        Ok(lower_quantile(p))
    } else {
        // 1 - p is exact for p >= 0.5.
        Ok(-lower_quantile(1.0 - p))
    }
}

/// Two-sided critical value `z_{(1 + level)/2}`.
pub fn two_sided_z(level: f64) -> Result<f64> {
    crate::error::check_level(level)?;
    std_normal_quantile(0.5 + 0.5 * level)
}

/// Root seed for a reproducible random stream.
///
/// Sub-streams are derived as `hash(seed, index)` with a SplitMix64
/// finalizer, so work split across any number of threads draws the same
/// numbers as long as each chunk asks for its own index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    pub fn substream(self, index: u64) -> Seed {
        Seed(splitmix64(
            splitmix64(self.0) ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)),
        ))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Bivariate normal built from two independent standard normals:
/// `x1 = mu1 + s1 z1`, `x2 = mu2 + s2 (rho z1 + sqrt(1 - rho^2) z2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateNormal {
    mu1: f64,
    mu2: f64,
    s1: f64,
    s2: f64,
    rho: f64,
    rho_c: f64,
}

impl BivariateNormal {
    pub fn new(mu1: f64, mu2: f64, s1: f64, s2: f64, rho: f64) -> Result<Self> {
        if !(mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::domain("means must be finite"));
        }
        if !(s1.is_finite() && s1 >= 0.0 && s2.is_finite() && s2 >= 0.0) {
            return Err(Error::domain(format!(
                "standard deviations must be finite and nonnegative, got ({s1}, {s2})"
            )));
        }
        check_rho(rho)?;
        Ok(BivariateNormal {
            mu1,
            mu2,
            s1,
            s2,
            rho,
            rho_c: (1.0 - rho * rho).sqrt(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (
            self.mu1 + self.s1 * z1,
            self.mu2 + self.s2 * (self.rho * z1 + self.rho_c * z2),
        )
    }
}

/// `n` i.i.d. draws from the bivariate normal, deterministic in `seed`.
pub fn sample_bivariate(
    mu1: f64,
    mu2: f64,
    s1: f64,
    s2: f64,
    rho: f64,
    seed: Seed,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let dist = BivariateNormal::new(mu1, mu2, s1, s2, rho)?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}
