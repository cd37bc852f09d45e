//! Branch-free kernels for the pair sums that dominate run time.
//!
//! `exp_nonpositive` is written so the compiler can vectorise loops over it:
//! Cody-Waite range reduction, a degree-13 Taylor polynomial and an exponent
//! built by integer arithmetic. Relative error stays below 3e-16 on
//! `[-700, 0]`.

const LOG2_E: f64 = std::f64::consts::LOG2_E;
const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
// 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;
const MIN_ARG: f64 = -700.0;

/// `exp(x)` for `x <= 0`. Arguments below -700 are treated as -700, whose
/// exponential (~1e-304) is negligible in any sum this crate forms.
#[inline(always)]
pub fn exp_nonpositive(x: f64) -> f64 {
    let x = if x < MIN_ARG { MIN_ARG } else { x };
    let shifted = x * LOG2_E + ROUND_MAGIC;
    let k = shifted - ROUND_MAGIC;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // exp(r), |r| <= ln(2)/2
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let scale = f64::from_bits((shifted.to_bits() << 52).wrapping_add(1023u64 << 52));
    p * scale
}

/// `sum_j exp(scale * (values[j] - x)^2)` for `scale <= 0`.
#[inline]
pub fn gaussian_row_sum(x: f64, values: &[f64], scale: f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = values.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for (a, &v) in acc.iter_mut().zip(c) {
            let d = v - x;
            *a += exp_nonpositive(d * d * scale);
        }
    }
    let mut tail = 0.0;
    for &v in rest {
        let d = v - x;
        tail += exp_nonpositive(d * d * scale);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
