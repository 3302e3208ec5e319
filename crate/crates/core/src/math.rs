// Thin wrappers so every build (std or not) goes through the same libm code.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Safeguarded Newton for an increasing function with `f(lo) <= 0 <= f(hi)`.
///
/// `f` returns the value and the derivative. Falls back to bisection whenever
/// the Newton step leaves the bracket or does not shrink it fast enough.
pub(crate) fn bracketed_newton<F>(f: F, mut lo: f64, mut hi: f64, guess: f64) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    let mut last_step = hi - lo;
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            hi = x;
            x = 0.5 * (lo + hi);
            continue;
        }
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if dfx > 0.0 && dfx.is_finite() { x - fx / dfx } else { f64::NAN };
        let step;
        if newton > lo && newton < hi && (newton - x).abs() < last_step.abs() {
            step = newton - x;
            x = newton;
        } else {
            let mid = 0.5 * (lo + hi);
            step = mid - x;
            x = mid;
        }
        last_step = step;
        let scale = x.abs().max(f64::MIN_POSITIVE);
        if step.abs() <= 4.0 * f64::EPSILON * scale || hi - lo <= 4.0 * f64::EPSILON * scale {
            return Some(x);
        }
    }
    None
}
