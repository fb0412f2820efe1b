use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below this argument `ln(n!)` is summed term by term; above it the Stirling
/// series truncated after the `z^-9` term is accurate to machine precision.
const SERIES_THRESHOLD: u64 = 32;

/// `ln Γ(x + 1)` for any real `x ≥ 0`.
///
/// Integer arguments take the exact path of [`log_factorial_u64`]. Non-integer
/// arguments are shifted up by the recurrence `ln(x!) = ln((x+1)!) - ln(x+1)`
/// until the asymptotic series converges.
pub fn log_factorial<T: Scalar>(x: T) -> Result<T> {
    if x.is_nan() || x < T::zero() {
        return Err(Error::domain(format!(
            "log-factorial of a negative or NaN argument ({x})"
        )));
    }
    if x.is_infinite() {
        return Ok(T::infinity());
    }
    if x.fract() == T::zero() {
        if let Some(n) = x.to_u64() {
            return Ok(log_factorial_u64(n));
        }
    }
    let threshold = T::from_count(SERIES_THRESHOLD);
    let mut z = x;
    let mut shift = T::zero();
    while z < threshold {
        z = z + T::one();
        shift = shift + z.ln();
    }
    Ok(stirling_series(z) - shift)
}

/// `ln(n!)` for a non-negative integer.
pub fn log_factorial_u64<T: Scalar>(n: u64) -> T {
    if n <= SERIES_THRESHOLD {
        (2..=n)
            .map(|k| T::from_count(k).ln())
            .fold(T::zero(), |acc, v| acc + v)
    } else {
        stirling_series(T::from_count(n))
    }
}

fn stirling_series<T: Scalar>(z: T) -> T {
    let inv = z.recip();
    let inv2 = inv * inv;
    // 1/(12z) - 1/(360z^3) + 1/(1260z^5) - 1/(1680z^7) + 1/(1188z^9), Horner in 1/z^2
    let tail = inv
        * (T::lit(1.0 / 12.0)
            + inv2
                * (T::lit(-1.0 / 360.0)
                    + inv2
                        * (T::lit(1.0 / 1260.0)
                            + inv2 * (T::lit(-1.0 / 1680.0) + inv2 * T::lit(1.0 / 1188.0)))));
    z * z.ln() - z + T::lit(0.5) * (T::TAU() * z).ln() + tail
}
