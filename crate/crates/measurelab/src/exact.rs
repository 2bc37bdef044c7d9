//! Exact rational arithmetic, vectors over the rationals, and norm policies.
//!
//! Everything measure-shaped in this crate is a [`Q`] (arbitrary-precision
//! rational). Euclidean norms are the one place irrationality is unavoidable;
//! the policy is: compare single norms through exact squares, and compare sums
//! of norms through truncated-decimal approximations with error below
//! `10^-DIGITS` per term ([`sqrt_floor`], [`sum_sqrt_approx`]). The default
//! precision leaves a comfortable margin over the documented `1e-30` test
//! tolerance.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Q = num_rational::BigRational;

/// Vector in `R^m` with exact rational entries.
pub type Vector = Vec<Q>;

/// Decimal digits used by high-precision square roots. Error per root is
/// below `10^-DIGITS`.
pub const SQRT_DIGITS: u32 = 60;

/// `n/d` as a rational. Panics if `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `2^k` as a rational; `k` may be negative.
pub fn pow2(k: i64) -> Q {
    if k >= 0 {
        Q::from_integer(BigInt::one() << (k as usize))
    } else {
        Q::new(BigInt::one(), BigInt::one() << ((-k) as usize))
    }
}

/// Parses a rational from `"p/q"`, an integer, or a decimal like `"0.25"`,
/// `"1e-4"`, `"-3.5e2"`. Exact: decimals become the rational they denote.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.contains(['+', '-']) {
        return None;
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['+', '-']);
    if int_digits.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut digits = String::new();
    digits.push_str(if int_digits.is_empty() {
        "0"
    } else {
        int_digits
    });
    digits.push_str(frac_part);
    let n: BigInt = digits.parse().ok()?;
    let scale = frac_part.len() as i64 - exp;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Q::new(n, ten.pow(scale as u32))
    } else {
        Q::from_integer(n * ten.pow((-scale) as u32))
    };
    Some(if negative { -value } else { value })
}

/// Renders `x` as `"p/q"` (or `"p"` when integral).
pub fn q_to_string(x: &Q) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if x.denom().is_one() {
        let _ = write!(s, "{}", x.numer());
    } else {
        let _ = write!(s, "{}/{}", x.numer(), x.denom());
    }
    s
}

/// Fixed-point decimal rendering with `digits` places, truncated toward zero.
/// Exact and deterministic; used for report columns that hold irrational
/// approximations.
pub fn decimal_string(x: &Q, digits: u32) -> String {
    use core::fmt::Write;
    let neg = x.is_negative();
    let a = x.abs();
    let scale = BigInt::from(10).pow(digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (int, frac) = scaled.div_rem(&scale);
    let mut s = String::new();
    if neg && !(int.is_zero() && frac.is_zero()) {
        s.push('-');
    }
    let _ = write!(s, "{int}");
    if digits > 0 {
        let frac_str = frac.to_string();
        s.push('.');
        for _ in frac_str.len()..digits as usize {
            s.push('0');
        }
        s.push_str(&frac_str);
    }
    s
}

/// Floor of the square root of a nonnegative rational, carried to
/// `digits` decimal places: the result `r` satisfies
/// `r <= sqrt(x) < r + 10^-digits`.
pub fn sqrt_floor(x: &Q, digits: u32) -> Q {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if x.is_zero() {
        return Q::zero();
    }
    let scale = BigInt::from(10).pow(digits);
    // sqrt(p/q) = sqrt(p*q)/q; scale numerator by 10^digits before the
    // integer square root so the error is below 10^-digits.
    let p = x.numer();
    let den = x.denom();
    let scaled = p * den * (&scale * &scale);
    let root = scaled.sqrt();
    Q::new(root, den * scale)
}

/// Exact square root when the rational is a perfect square of a rational.
pub fn sqrt_exact(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Q::zero());
    }
    let pn = x.numer().sqrt();
    let pd = x.denom().sqrt();
    if &(&pn * &pn) == x.numer() && &(&pd * &pd) == x.denom() {
        Some(Q::new(pn, pd))
    } else {
        None
    }
}

/// `sum_i sqrt(t_i)` when every term is a perfect square, else `None`.
pub fn sum_sqrt_exact(terms_sq: &[Q]) -> Option<Q> {
    let mut acc = Q::zero();
    for t in terms_sq {
        acc += sqrt_exact(t)?;
    }
    Some(acc)
}

/// `sum_i sqrt(t_i)` as a rational approximation; absolute error below
/// `n * 10^-digits`.
pub fn sum_sqrt_approx(terms_sq: &[Q], digits: u32) -> Q {
    let mut acc = Q::zero();
    for t in terms_sq {
        acc += sqrt_floor(t, digits);
    }
    acc
}

/// Smallest integer `m` with `2^m >= x`; requires `x > 0`.
pub fn ceil_log2(x: &Q) -> i64 {
    assert!(x.is_positive());
    let num_bits = x.numer().to_biguint().unwrap().bits() as i64;
    let den_bits = x.denom().to_biguint().unwrap().bits() as i64;
    // 2^(nb-1) <= num < 2^nb, so a first guess is nb - db; correct by compare.
    let mut m = num_bits - den_bits;
    while &pow2(m) < x {
        m += 1;
    }
    while m > i64::MIN && &pow2(m - 1) >= x {
        m -= 1;
    }
    m
}

/// Converts a float into the exact rational it denotes (binary expansion).
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Best-effort float view of a rational (for quadrature seeds and display).
pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

pub fn vzero(m: usize) -> Vector {
    alloc::vec![Q::zero(); m]
}

pub fn vadd(a: &[Q], b: &[Q]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Q], b: &[Q]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(c: &Q, a: &[Q]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn vdot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vadd_assign(a: &mut Vector, b: &[Q]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

pub fn is_vzero(a: &[Q]) -> bool {
    a.iter().all(Q::is_zero)
}

/// Largest absolute component; exact and cheap, used as the convergence
/// metric inside chain limits (norm-equivalent to the report norms).
pub fn sup_norm(a: &[Q]) -> Q {
    a.iter().map(Q::abs).max().unwrap_or_else(Q::zero)
}

/// Norm policy on `R^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    /// `sum |x_i|`: rational-exact throughout.
    L1,
    /// Euclidean: exact squares, high-precision decimals for sums.
    L2,
}

impl Norm {
    /// Square of the norm — always an exact rational. For `L1` this is
    /// `(sum |x_i|)^2`, kept squared so both policies compare uniformly.
    pub fn value_sq(&self, v: &[Q]) -> Q {
        match self {
            Norm::L1 => {
                let s: Q = v.iter().map(Q::abs).sum();
                &s * &s
            }
            Norm::L2 => v.iter().map(|x| x * x).sum(),
        }
    }

    /// The norm itself when rational (`L1` always; `L2` on perfect squares).
    pub fn value_exact(&self, v: &[Q]) -> Option<Q> {
        match self {
            Norm::L1 => Some(v.iter().map(Q::abs).sum()),
            Norm::L2 => sqrt_exact(&self.value_sq(v)),
        }
    }

    /// Rational approximation of the norm, error below `10^-SQRT_DIGITS`.
    pub fn value_approx(&self, v: &[Q]) -> Q {
        match self {
            Norm::L1 => v.iter().map(Q::abs).sum(),
            Norm::L2 => sqrt_floor(&self.value_sq(v), SQRT_DIGITS),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_q("5").unwrap(), qi(5));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("1e-4").unwrap(), q(1, 10000));
        assert_eq!(parse_q("-3.5e2").unwrap(), qi(-350));
        assert_eq!(parse_q("2.5e-1").unwrap(), q(1, 4));
        assert!(parse_q("").is_none());
        assert!(parse_q("1/0").is_none());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&q(1, 4), 3), "0.250");
        assert_eq!(decimal_string(&q(-1, 3), 5), "-0.33333");
        assert_eq!(decimal_string(&qi(7), 0), "7");
    }

    #[test]
    fn sqrt_bounds() {
        let two = qi(2);
        let r = sqrt_floor(&two, 40);
        assert!(&r * &r <= two);
        let step = Q::new(BigInt::one(), BigInt::from(10).pow(40));
        let r1 = &r + &step;
        assert!(&r1 * &r1 > two);
    }

    #[test]
    fn sqrt_exact_cases() {
        assert_eq!(sqrt_exact(&q(9, 4)).unwrap(), q(3, 2));
        assert!(sqrt_exact(&qi(2)).is_none());
        assert_eq!(sum_sqrt_exact(&[qi(9), qi(16)]).unwrap(), qi(7));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(&qi(1)), 0);
        assert_eq!(ceil_log2(&qi(2)), 1);
        assert_eq!(ceil_log2(&qi(3)), 2);
        assert_eq!(ceil_log2(&q(1, 4)), -2);
        assert_eq!(ceil_log2(&q(1, 3)), -1);
        assert_eq!(ceil_log2(&qi(4)), 2);
    }

    #[test]
    fn norms() {
        let v = alloc::vec![qi(3), qi(-4)];
        assert_eq!(Norm::L1.value_exact(&v).unwrap(), qi(7));
        assert_eq!(Norm::L2.value_sq(&v), qi(25));
        assert_eq!(Norm::L2.value_exact(&v).unwrap(), qi(5));
    }
}
