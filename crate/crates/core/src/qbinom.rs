//! Exact Gaussian binomial arithmetic.
//!
//! `[a, b]_q = prod_{0 <= i < b} (q^{a-i} - 1) / (q^{b-i} - 1)`, with
//! `[a, 0] = 1` and `[a, b] = 0` for negative `b` or `b > a`. Counts are
//! `BigCount` (arbitrary-precision nonnegative integers); bound formulas that
//! involve division are `BigRatio` (reduced arbitrary-precision rationals).
//! Counts are never built from rationals: the product formula is evaluated
//! with an exact division at every step, and a failed division panics rather
//! than rounding.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type BigCount = BigUint;
pub type BigRatio = BigRational;

/// q^e for a nonnegative exponent.
pub fn q_pow(q: u32, e: u64) -> BigCount {
    BigCount::from(q).pow(e as u32)
}

/// q^e as a rational, allowing negative exponents.
pub fn q_pow_signed(q: u32, e: i64) -> BigRatio {
    if e >= 0 {
        BigRatio::from_integer(BigInt::from(q_pow(q, e as u64)))
    } else {
        BigRatio::new(BigInt::one(), BigInt::from(q_pow(q, (-e) as u64)))
    }
}

pub fn factorial(n: u64) -> BigCount {
    (1..=n).fold(BigCount::one(), |acc, i| acc * BigCount::from(i))
}

/// True when q = p^e for a prime p and e >= 1.
pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut m = q;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return m == 1;
        }
        p += 1;
    }
    true
}

/// Gaussian binomial `[a, b]_q`, exact.
///
/// Each partial product along the iteration is itself a Gaussian binomial,
/// so every division is exact; an inexact division indicates an index bug
/// and panics.
pub fn gauss_binom(a: i64, b: i64, q: u32) -> BigCount {
    assert!(a >= 0, "gauss_binom: a must be nonnegative, got {a}");
    assert!(q >= 2, "gauss_binom: q must be at least 2, got {q}");
    if b < 0 || b > a {
        return BigCount::zero();
    }
    let mut acc = BigCount::one();
    for j in 0..b as u64 {
        acc *= q_pow(q, a as u64 - j) - BigCount::one();
        let den = q_pow(q, j + 1) - BigCount::one();
        let (quo, rem) = num_integer::Integer::div_rem(&acc, &den);
        assert!(
            rem.is_zero(),
            "gauss_binom: inexact division at step {j} for [{a},{b}]_{q}"
        );
        acc = quo;
    }
    acc
}

/// `[a, b]_q` as a rational, for bound formulas.
pub fn gauss_binom_ratio(a: i64, b: i64, q: u32) -> BigRatio {
    BigRatio::from_integer(BigInt::from(gauss_binom(a, b, q)))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("identity check ({item}) failed at m={m}, i={i}, q={q}")]
pub struct IdentityViolation {
    pub m: i64,
    pub i: i64,
    pub q: u32,
    pub item: &'static str,
}

/// Checks the recurrence and inequality battery for `[m, i]_q`:
///
/// (i)   [m,i] = [m-1,i-1] + q^i [m-1,i]  and  [m,i] = (q^m-1)/(q^i-1) [m-1,i-1]
/// (ii)  q^{m-i} < (q^m-1)/(q^i-1) < q^{m-i+1}  and
///       q^{i-m-1} < (q^i-1)/(q^m-1) < q^{i-m}, strict only for i < m
/// (iii) q^{i(m-i)} <= [m,i] < q^{i(m-i+1)}, lower bound strict for i < m
/// (iv)  (q^m-1)/(q^i-1) < 2 q^{m-i}
///
/// Requires 1 <= i <= m. A violation would indicate an arithmetic bug, not a
/// property of the inputs.
pub fn check_identities(m: i64, i: i64, q: u32) -> Result<(), IdentityViolation> {
    assert!(1 <= i && i <= m, "check_identities requires 1 <= i <= m");
    let fail = |item: &'static str| IdentityViolation { m, i, q, item };

    let b = |a: i64, b: i64| gauss_binom_ratio(a, b, q);
    let qp = |e: i64| q_pow_signed(q, e);
    let lhs = b(m, i);

    // (i) Pascal-type recurrence and ratio form
    if lhs != b(m - 1, i - 1) + qp(i) * b(m - 1, i) {
        return Err(fail("pascal recurrence"));
    }
    let ratio_mi = (qp(m) - BigRatio::one()) / (qp(i) - BigRatio::one());
    if lhs != ratio_mi.clone() * b(m - 1, i - 1) {
        return Err(fail("ratio form"));
    }

    // (ii) two-sided bounds on the ratio and its reciprocal
    let strict = i < m;
    let lo = qp(m - i);
    let ok_lower = if strict { lo < ratio_mi } else { lo <= ratio_mi };
    if !ok_lower {
        return Err(fail("ratio lower bound"));
    }
    if ratio_mi >= qp(m - i + 1) {
        return Err(fail("ratio upper bound"));
    }
    let recip = (qp(i) - BigRatio::one()) / (qp(m) - BigRatio::one());
    if qp(i - m - 1) >= recip {
        return Err(fail("reciprocal lower bound"));
    }
    let ok_recip_upper = if strict {
        recip < qp(i - m)
    } else {
        recip <= qp(i - m)
    };
    if !ok_recip_upper {
        return Err(fail("reciprocal upper bound"));
    }

    // (iii) power sandwich on [m,i]
    let lo3 = qp(i * (m - i));
    let ok3_lower = if strict { lo3 < lhs } else { lo3 <= lhs };
    if !(lo3 <= lhs && ok3_lower) {
        return Err(fail("binomial lower bound"));
    }
    if lhs >= qp(i * (m - i + 1)) {
        return Err(fail("binomial upper bound"));
    }

    // (iv) doubling bound on the ratio
    if ratio_mi >= BigRatio::from_integer(BigInt::from(2)) * qp(m - i) {
        return Err(fail("doubling bound"));
    }

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gb(a: i64, b: i64, q: u32) -> u64 {
        use num_traits::ToPrimitive;
        gauss_binom(a, b, q).to_u64().unwrap()
    }

    #[test]
    fn base_cases() {
        for a in 0..8 {
            assert_eq!(gb(a, 0, 2), 1);
            assert_eq!(gb(a, -1, 2), 0);
            assert_eq!(gb(a, a + 1, 2), 0);
        }
        assert_eq!(gb(0, 0, 3), 1);
    }

    #[test]
    fn small_values() {
        assert_eq!(gb(4, 2, 2), 35);
        assert_eq!(gb(3, 1, 2), 7);
        assert_eq!(gb(3, 2, 2), 7);
        assert_eq!(gb(5, 2, 2), 155);
        assert_eq!(gb(4, 2, 3), 130);
        assert_eq!(gb(2, 1, 3), 4);
    }

    #[test]
    fn symmetry() {
        for q in [2u32, 3, 4, 5] {
            for a in 0..10i64 {
                for b in 0..=a {
                    assert_eq!(gauss_binom(a, b, q), gauss_binom(a, a - b, q));
                }
            }
        }
    }

    #[test]
    fn pascal_spot_check() {
        // [5,2]_2 = [4,1] + 4*[4,2] = 15 + 140
        assert_eq!(gb(5, 2, 2), gb(4, 1, 2) + 4 * gb(4, 2, 2));
    }

    #[test]
    fn identity_sweep_m_up_to_12() {
        for q in [2u32, 3, 4, 5] {
            for m in 1..=12i64 {
                for i in 1..=m {
                    check_identities(m, i, q).unwrap();
                }
            }
        }
    }

    #[test]
    fn diagonal_case_holds_with_equality() {
        // i = m: q^{i*0} <= [i,i] = 1 with equality
        for q in [2u32, 3, 5] {
            for i in 1..=6i64 {
                assert_eq!(gauss_binom(i, i, q), BigCount::one());
                check_identities(i, i, q).unwrap();
            }
        }
    }

    #[test]
    fn prime_power_detection() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32] {
            assert!(is_prime_power(q), "{q}");
        }
        for q in [0u64, 1, 6, 10, 12, 14, 15, 18, 100] {
            assert!(!is_prime_power(q), "{q}");
        }
    }

    #[test]
    fn signed_powers() {
        assert_eq!(q_pow_signed(2, 3), BigRatio::from_integer(8.into()));
        assert_eq!(
            q_pow_signed(2, -2),
            BigRatio::new(1.into(), 4.into())
        );
    }
}
