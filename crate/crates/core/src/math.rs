//! Float helpers that `core` lacks.

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Uniform sample in `[0, 1)` with 53 bits of precision.
pub(crate) fn unit_f64<R: rand::RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal sample (Box-Muller, one of the pair discarded).
pub(crate) fn std_normal<R: rand::RngCore + ?Sized>(rng: &mut R) -> f64 {
    let mut u1 = unit_f64(rng);
    while u1 <= f64::MIN_POSITIVE {
        u1 = unit_f64(rng);
    }
    let u2 = unit_f64(rng);
    sqrt(-2.0 * ln(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Number of `k`-subsets of `n` items, saturating at `u64::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}
