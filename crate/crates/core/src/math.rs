//! Float helpers that work without `std`.
//!
//! Everything routes through `libm`, which also keeps results bit-identical
//! across targets.

use core::f64::consts::{PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `e^x` by range reduction to `|r| ≤ ln2/2` and a degree-12 Taylor
/// polynomial; relative error below 1e-14 on `[−700, 700]`.
#[inline]
pub fn exp_fast(x: f64) -> f64 {
    const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    if x < -700.0 {
        return 0.0;
    }
    if x > 700.0 {
        return f64::INFINITY;
    }
    let n = libm::floor(x * core::f64::consts::LOG2_E + 0.5);
    let r = x - n * LN2_HI - n * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    for d in [
        39_916_800.0,
        3_628_800.0,
        362_880.0,
        40_320.0,
        5040.0,
        720.0,
        120.0,
        24.0,
        6.0,
        2.0,
        1.0,
        1.0,
    ] {
        p = p * r + 1.0 / d;
    }
    p * f64::from_bits(((n as i64 + 1023) as u64) << 52)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `⌊x⌋` for `|x| < 2^62`.
#[inline]
pub fn ifloor(x: f64) -> i64 {
    let t = x as i64;
    if (t as f64) > x {
        t - 1
    } else {
        t
    }
}

/// `⌈x⌉` for `|x| < 2^62`.
#[inline]
pub fn iceil(x: f64) -> i64 {
    let t = x as i64;
    if (t as f64) < x {
        t + 1
    } else {
        t
    }
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Maps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_positive(angle: f64) -> f64 {
    let r = angle - TAU * floor(angle / TAU);
    // r can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Maps an angle into `(-π, π]`.
#[inline]
pub fn wrap_signed(angle: f64) -> f64 {
    let r = wrap_positive(angle + PI) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_TAU * exp(-0.5 * z * z)
}

/// Tabulated standard normal CDF with cubic Hermite interpolation.
///
/// Absolute error is below 1e-10 everywhere; outside `±Z_MAX` the value
/// saturates to 0 or 1.
#[derive(Debug, Clone)]
pub struct NormalCdfTable {
    values: alloc::vec::Vec<f64>,
    slopes: alloc::vec::Vec<f64>,
}

impl NormalCdfTable {
    pub const Z_MAX: f64 = 8.5;
    const STEPS_PER_UNIT: f64 = 64.0;

    pub fn new() -> Self {
        let n = (2.0 * Self::Z_MAX * Self::STEPS_PER_UNIT) as usize + 1;
        let h = 1.0 / Self::STEPS_PER_UNIT;
        let mut values = alloc::vec::Vec::with_capacity(n);
        let mut slopes = alloc::vec::Vec::with_capacity(n);
        for i in 0..n {
            let z = -Self::Z_MAX + i as f64 * h;
            values.push(normal_cdf(z));
            // derivative with respect to the unit cell coordinate
            slopes.push(normal_pdf(z) * h);
        }
        Self { values, slopes }
    }

    #[inline]
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= -Self::Z_MAX {
            return 0.0;
        }
        if z >= Self::Z_MAX {
            return 1.0;
        }
        let u = (z + Self::Z_MAX) * Self::STEPS_PER_UNIT;
        let i = u as usize;
        let i = i.min(self.values.len() - 2);
        let t = u - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }
}

impl Default for NormalCdfTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Clamps `x` into `[lo, hi]`.
#[inline]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}
