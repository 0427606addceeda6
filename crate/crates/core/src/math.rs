//! Float helpers that work without `std`.

/// Default absolute tolerance for comparing weights and objective values.
pub const TOL: f64 = 1e-9;

/// Tolerance for constraint satisfaction of fractional solutions.
pub const FEAS_TOL: f64 = 1e-7;

#[inline]
pub fn powf(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        libm::pow(x, e)
    }
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `ceil(log2(n))` for `n >= 1`, computed on integers.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Index of the unordered pair `u < v` in the row-major upper triangle of an
/// `n x n` matrix.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}
