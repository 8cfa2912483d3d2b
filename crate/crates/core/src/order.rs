//! Logarithms of exact group orders.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `log_base(order)` as a float, with an exact rational form when the order
/// and the base are powers of the same prime.
#[derive(Clone, Debug, PartialEq)]
pub struct LogOrder {
    pub base: u64,
    pub value: f64,
    /// `(num, den)` with `log_base(order) = num / den`.
    pub exact: Option<(u64, u64)>,
    /// Bit length of the order: `bits - 1 <= log2(order) < bits`.
    pub bits: u64,
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return libm::log(x.to_u64().unwrap_or(1) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    libm::log(top as f64) + shift as f64 * core::f64::consts::LN_2
}

/// `(p, e)` with `x = p^e` for prime `p`, found by trial division up to
/// `trial_limit`; `None` if `x` is 1 or not such a prime power.
pub fn prime_power(x: &BigUint, trial_limit: u64) -> Option<(u64, u64)> {
    if x.is_one() || x.is_zero() {
        return None;
    }
    let mut p = 2u64;
    while p <= trial_limit {
        if (x % p).is_zero() {
            let mut rest = x.clone();
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            return rest.is_one().then_some((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reduced fraction `num / den`.
pub fn reduce(num: u64, den: u64) -> (u64, u64) {
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

/// Logarithm of `order` in base `base` (`base >= 2`).
pub fn log_order(order: &BigUint, base: u64) -> LogOrder {
    let bits = order.bits();
    let value = ln_big(order) / libm::log(base as f64);
    let exact = if order.is_one() {
        Some((0, 1))
    } else {
        let limit = base.max(order.bits().min(1 << 16));
        match (
            prime_power(order, limit),
            prime_power(&BigUint::from(base), base),
        ) {
            (Some((p, a)), Some((q, b))) if p == q => Some(reduce(a, b)),
            _ => None,
        }
    };
    LogOrder {
        base,
        value,
        exact,
        bits,
    }
}

/// `log(a) / log(b)` for orders `a`, `b`: exact when both are powers of one
/// prime, else the float quotient of natural logarithms.
pub fn log_ratio(a: &BigUint, b: &BigUint) -> (f64, Option<(u64, u64)>) {
    if b.is_one() {
        return (0.0, None);
    }
    if a.is_one() {
        return (0.0, Some((0, 1)));
    }
    let limit = a.bits().max(b.bits()).min(1 << 16);
    let exact = match (prime_power(a, limit), prime_power(b, limit)) {
        (Some((p, x)), Some((q, y))) if p == q => Some(reduce(x, y)),
        _ => None,
    };
    let value = match exact {
        Some((x, y)) => x as f64 / y as f64,
        None => ln_big(a) / ln_big(b),
    };
    (value, exact)
}
