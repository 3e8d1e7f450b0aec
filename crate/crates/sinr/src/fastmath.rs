//! Software sin/cos/exp/ln with pinned coefficients.
//!
//! Dictionary atoms and network activations must regenerate bit-exactly from
//! a seed, and the platform libm gives no such guarantee across systems. These
//! kernels use the classic Sun polynomial reductions (the ones fdlibm and its
//! descendants ship), so results are identical on every target and accurate to
//! a couple of ulps, plenty below every tolerance used in this crate. They are
//! also fast enough to sit inside training loops.

const PIO2_1: f64 = 1.570_796_326_734_125_614_17e+00; // first 33 bits of pi/2
const PIO2_1T: f64 = 6.077_100_506_506_192_249_32e-11; // pi/2 - PIO2_1
const FRAC_2_PI: f64 = 6.366_197_723_675_814_308_17e-01; // 2/pi

// sin kernel on |r| <= pi/4
const S1: f64 = -1.666_666_666_666_663_243_48e-01;
const S2: f64 = 8.333_333_333_322_489_461_24e-03;
const S3: f64 = -1.984_126_982_985_794_931_34e-04;
const S4: f64 = 2.755_731_370_707_006_767_89e-06;
const S5: f64 = -2.505_076_025_340_686_341_95e-08;
const S6: f64 = 1.589_690_995_211_550_102_21e-10;

// cos kernel on |r| <= pi/4
const C1: f64 = 4.166_666_666_666_660_190_37e-02;
const C2: f64 = -1.388_888_888_887_410_957_49e-03;
const C3: f64 = 2.480_158_728_947_672_941_78e-05;
const C4: f64 = -2.755_731_435_139_066_330_35e-07;
const C5: f64 = 2.087_572_321_298_174_827_90e-09;
const C6: f64 = -1.135_964_755_778_819_482_65e-11;

#[inline]
fn sin_kernel(r: f64) -> f64 {
    let z = r * r;
    let p = S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)));
    r + r * z * (S1 + z * p)
}

#[inline]
fn cos_kernel(r: f64) -> f64 {
    let z = r * r;
    let w = z * z;
    let p = C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6))));
    1.0 - 0.5 * z + w * p
}

/// Largest argument the two-constant reduction handles exactly; the product
/// n * PIO2_1 stays representable while |n| < 2^20.
const REDUCTION_LIMIT: f64 = 1.6e6;

/// Simultaneous sine and cosine. Bit-deterministic for |x| <= 1.6e6, which
/// covers every argument this crate produces; beyond that it falls back to
/// the platform libm rather than return garbage.
#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    if !x.is_finite() {
        return (f64::NAN, f64::NAN);
    }
    if x.abs() > REDUCTION_LIMIT {
        return x.sin_cos();
    }
    let n = (x * FRAC_2_PI).round();
    let r = (x - n * PIO2_1) - n * PIO2_1T;
    let s = sin_kernel(r);
    let c = cos_kernel(r);
    match (n as i64) & 3 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[inline]
pub fn sin(x: f64) -> f64 {
    sin_cos(x).0
}

#[inline]
pub fn cos(x: f64) -> f64 {
    sin_cos(x).1
}

const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-01;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
const LOG2_E: f64 = 1.442_695_040_888_963_387_00e+00;

// exp kernel rational coefficients
const P1: f64 = 1.666_666_666_666_660_190_37e-01;
const P2: f64 = -2.777_777_777_015_593_384_20e-03;
const P3: f64 = 6.613_756_321_437_934_361_17e-05;
const P4: f64 = -1.653_390_220_546_525_153_90e-06;
const P5: f64 = 4.138_136_797_057_238_460_39e-08;

/// 2^k for integer k, exact, including the gradual-underflow range.
#[inline]
fn scale_by_pow2(y: f64, k: i64) -> f64 {
    if k >= -1021 && k <= 1023 {
        y * f64::from_bits(((k + 1023) as u64) << 52)
    } else if k > 1023 {
        f64::INFINITY * y.signum()
    } else if k >= -1074 - 53 {
        // land in the subnormal range via an exact intermediate step
        let half = f64::from_bits(((k + 1000 + 1023) as u64) << 52);
        y * half * f64::from_bits(((-1000i64 + 1023) as u64) << 52)
    } else {
        0.0
    }
}

/// Deterministic e^x over the full finite range.
#[inline]
pub fn exp(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 709.782_712_893_384 {
        return f64::INFINITY;
    }
    if x < -745.2 {
        return 0.0;
    }
    let k = (x * LOG2_E).round();
    let hi = x - k * LN2_HI;
    let lo = k * LN2_LO;
    let r = hi - lo;
    let t = r * r;
    let c = r - t * (P1 + t * (P2 + t * (P3 + t * (P4 + t * P5))));
    let y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);
    scale_by_pow2(y, k as i64)
}

// ln kernel coefficients
const LG1: f64 = 6.666_666_666_666_735_130e-01;
const LG2: f64 = 3.999_999_999_940_941_908e-01;
const LG3: f64 = 2.857_142_874_366_239_149e-01;
const LG4: f64 = 2.222_219_843_214_978_396e-01;
const LG5: f64 = 1.818_357_216_161_805_012e-01;
const LG6: f64 = 1.531_383_769_920_937_332e-01;
const LG7: f64 = 1.479_819_860_511_658_591e-01;

/// Fraction bits of sqrt(2); mantissas at or above this are halved so the
/// reduced significand lands in [sqrt(2)/2, sqrt(2)).
const SQRT2_FRAC: u64 = 0x0006_A09E_667F_3BCD;

/// Deterministic natural logarithm. x <= 0 returns -inf (x == 0) or NaN.
#[inline]
pub fn ln(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut bits = x.to_bits();
    let mut k: i64 = 0;
    if bits < (1u64 << 52) {
        // subnormal: renormalize with an exact scale
        bits = (x * f64::from_bits(((54 + 1023) as u64) << 52)).to_bits();
        k -= 54;
    }
    k += ((bits >> 52) & 0x7FF) as i64 - 1023;
    let frac = bits & 0x000F_FFFF_FFFF_FFFF;
    let m = if frac >= SQRT2_FRAC {
        k += 1;
        f64::from_bits(frac | (1022u64 << 52))
    } else {
        f64::from_bits(frac | (1023u64 << 52))
    };
    let f = m - 1.0;
    let s = f / (2.0 + f);
    let z = s * s;
    let w = z * z;
    let t1 = w * (LG2 + w * (LG4 + w * LG6));
    let t2 = z * (LG1 + w * (LG3 + w * (LG5 + w * LG7)));
    let r = t2 + t1;
    let hfsq = 0.5 * f * f;
    let kf = k as f64;
    kf * LN2_HI - ((hfsq - (s * (hfsq + r) + kf * LN2_LO)) - f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        let mut state = 0x1234_5678_9ABC_DEF0u64;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                lo + u * (hi - lo)
            })
            .collect()
    }

    #[test]
    fn sin_cos_matches_libm_over_working_range() {
        let mut worst = 0.0f64;
        for x in lcg_points(200_000, -1.0e6, 1.0e6) {
            let (s, c) = sin_cos(x);
            worst = worst.max((s - x.sin()).abs()).max((c - x.cos()).abs());
        }
        assert!(worst < 1e-12, "worst abs error {worst:e}");
    }

    #[test]
    fn sin_cos_small_and_exact_points() {
        assert_eq!(sin(0.0), 0.0);
        assert_eq!(cos(0.0), 1.0);
        let (s, c) = sin_cos(std::f64::consts::FRAC_PI_2);
        assert!((s - 1.0).abs() < 1e-15);
        assert!(c.abs() < 1e-15);
        assert!(sin(f64::NAN).is_nan());
    }

    #[test]
    fn exp_matches_libm() {
        let mut worst = 0.0f64;
        for x in lcg_points(200_000, -700.0, 700.0) {
            let mine = exp(x);
            let theirs = x.exp();
            let rel = (mine - theirs).abs() / theirs;
            worst = worst.max(rel);
        }
        assert!(worst < 1e-13, "worst rel error {worst:e}");
        assert_eq!(exp(0.0), 1.0);
        assert_eq!(exp(f64::NEG_INFINITY), 0.0);
        assert_eq!(exp(800.0), f64::INFINITY);
        assert!(exp(-800.0) == 0.0);
    }

    #[test]
    fn exp_handles_subnormal_results() {
        let y = exp(-744.0);
        assert!(y > 0.0 && y < 1e-320);
    }

    #[test]
    fn ln_matches_libm() {
        let mut worst = 0.0f64;
        for x in lcg_points(100_000, 1e-12, 1e12) {
            let rel = (ln(x) - x.ln()).abs() / x.ln().abs().max(1.0);
            worst = worst.max(rel);
        }
        // dense coverage near 1 where ln crosses zero
        for x in lcg_points(100_000, 0.5, 2.0) {
            let diff = (ln(x) - x.ln()).abs();
            worst = worst.max(diff);
        }
        assert!(worst < 1e-13, "worst error {worst:e}");
        assert_eq!(ln(1.0), 0.0);
        assert_eq!(ln(0.0), f64::NEG_INFINITY);
        assert!(ln(-1.0).is_nan());
    }

    #[test]
    fn ln_exp_roundtrip_in_gaussian_tail_range() {
        // the Box-Muller path evaluates ln on (0, 1]; sqrt(-2 ln u) must be
        // clean down to the clamp floor
        for x in lcg_points(50_000, 1e-16, 1.0) {
            let diff = (ln(x) - x.ln()).abs();
            assert!(diff < 1e-13 * x.ln().abs().max(1.0));
        }
    }
}
