//! Small numeric helpers shared by the builders.

/// Smallest `m >= 0` with `den * 2^m >= num`, i.e. `max(0, ceil(log2(num/den)))`.
///
/// Computed by exact power-of-two scaling, so dyadic boundary cases such as
/// `num/den = 2^k` land exactly on `k` instead of drifting by an ulp.
pub fn ceil_log2_ratio(num: f64, den: f64) -> u32 {
    assert!(num > 0.0 && den > 0.0, "ceil_log2_ratio needs positive args");
    let mut m = 0u32;
    let mut scaled = den;
    while scaled < num {
        scaled *= 2.0;
        m += 1;
        assert!(m < 4096, "ceil_log2_ratio overflow");
    }
    m
}

/// `2^i` as f64 (exact for |i| < 1023).
#[inline]
pub fn pow2(i: i32) -> f64 {
    2f64.powi(i)
}

/// `n!` as f64; `inf` beyond 170.
pub fn factorial(n: usize) -> f64 {
    let mut acc = 1.0f64;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc
}

/// `ln(n!)` by direct summation; exact enough for bound bookkeeping.
pub fn ln_factorial(n: usize) -> f64 {
    let mut acc = 0.0f64;
    for k in 2..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// `log2(v)` that is exact when `v` is a power of two.
pub fn log2_exactish(v: f64) -> f64 {
    debug_assert!(v > 0.0);
    let (mant, exp) = frexp(v);
    if mant == 0.5 {
        return (exp - 1) as f64;
    }
    v.log2()
}

fn frexp(v: f64) -> (f64, i32) {
    if v == 0.0 || !v.is_finite() {
        return (v, 0);
    }
    let bits = v.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    if exp_field == 0 {
        // subnormal: renormalize
        let scaled = v * pow2(64);
        let (m, e) = frexp(scaled);
        return (m, e - 64);
    }
    let e = exp_field - 1022;
    let mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (mant, e)
}
