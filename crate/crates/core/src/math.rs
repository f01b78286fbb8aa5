//! Float helpers that `core` does not provide.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// `|x|^p` with the `p == 1` and `p == 2` cases kept exact.
#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        powf(a, p)
    }
}

/// Largest float `lo` with `lo >= center - radius` such that `center - x <= radius`
/// evaluates true in floating point for every `x` in `[lo, center]`.
///
/// Rounding of `center - radius` can leave the naive endpoint one ulp outside
/// the tube; this nudges it back in.
pub(crate) fn tube_lo(center: f64, radius: f64) -> f64 {
    let mut lo = center - radius;
    while center - lo > radius {
        lo = lo.next_up();
    }
    lo
}

/// Mirror of [`tube_lo`] for the upper endpoint.
pub(crate) fn tube_hi(center: f64, radius: f64) -> f64 {
    let mut hi = center + radius;
    while hi - center > radius {
        hi = hi.next_down();
    }
    hi
}
