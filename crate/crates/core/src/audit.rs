//! Exact evaluation of the closed-form upper bounds and the inequality
//! chains that compare them against the extremal lower bound.
//!
//! Each chain evaluates an upper-bound product `|F'|·|F|^r` (or `|F|^{r+1}`)
//! exactly as a rational and compares it, strictly, against the closed-form
//! lower bound on the extremal simplex count. The comparison is diagnostic:
//! at the intended thresholds every chain holds, at tiny n some reverse, and
//! the report says which. No floating point is used anywhere.
//!
//! Chain identifiers are stable strings: `lemma2.6`, `lemma3.3-sub2.2`,
//! `lemma3.4` (one report per m ≥ t+r+1), `lemma3.5` (one report per
//! t+1 ≤ m ≤ t+r−1), and `prop3.2` for the family-size audit.

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::family::f_x_k_size;
use crate::qbinom::{gauss_binom_ratio, is_prime_power, q_pow_signed, BigRatio};
use crate::simplex::n_trk_lower_bound_unchecked;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("range violation for {param}: {message}")]
    RangeViolation {
        param: &'static str,
        message: String,
    },
}

fn require(cond: bool, param: &'static str, message: String) -> Result<(), AuditError> {
    if cond {
        Ok(())
    } else {
        Err(AuditError::RangeViolation { param, message })
    }
}

/// One evaluated inequality: `lhs (<|<=) rhs`, with the direction recorded
/// in `strict` and the outcome in `holds`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub named_bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    pub lhs_num: String,
    pub lhs_den: String,
    pub rhs_num: String,
    pub rhs_den: String,
    pub strict: bool,
    pub holds: bool,
}

impl BoundReport {
    fn new(named_bound: &str, m: Option<i64>, lhs: BigRatio, rhs: BigRatio, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        BoundReport {
            named_bound: named_bound.to_string(),
            m,
            lhs_num: lhs.numer().to_string(),
            lhs_den: lhs.denom().to_string(),
            rhs_num: rhs.numer().to_string(),
            rhs_den: rhs.denom().to_string(),
            strict,
            holds,
        }
    }
}

/// Size bound for m-cross s-intersecting families whose t-covering numbers
/// are all at least l:
///
/// `[k, l-1] · [s, l-1]^{-1} · [k, s] · [n-k+t-l, k-s+t-l]`
pub fn cross_intersecting_bound(
    k: i64,
    l: i64,
    s: i64,
    t: i64,
    n: i64,
    q: u32,
) -> Result<BigRatio, AuditError> {
    require(is_prime_power(q as u64), "q", format!("{q} is not a prime power"))?;
    require(l > t, "l", format!("l = {l} must be at least t+1 = {}", t + 1))?;
    require(n >= 2 * k - s, "n", format!("n = {n} must be at least 2k-s = {}", 2 * k - s))?;
    require(
        s >= l - 1,
        "s",
        format!("s = {s} below l-1 = {} makes the inverse factor vanish", l - 1),
    )?;
    require(
        n - k + t - l >= 0,
        "n",
        format!("n-k+t-l = {} is negative", n - k + t - l),
    )?;
    Ok(gauss_binom_ratio(k, l - 1, q) / gauss_binom_ratio(s, l - 1, q)
        * gauss_binom_ratio(k, s, q)
        * gauss_binom_ratio(n - k + t - l, k - s + t - l, q))
}

/// Size bound for r-wise t-intersecting families in the covering-number
/// t+1 regime:
///
/// `[k, t] · [r+t-2, t]^{-1} · [k, r+t-2] · [n-k-1, k-r-t+1]`
pub fn family_size_bound(k: i64, r: i64, t: i64, n: i64, q: u32) -> Result<BigRatio, AuditError> {
    require(is_prime_power(q as u64), "q", format!("{q} is not a prime power"))?;
    require(r >= 2, "r", format!("r = {r} must be at least 2"))?;
    require(t >= 1, "t", format!("t = {t} must be at least 1"))?;
    require(
        n >= 2 * k - r - t + 2,
        "n",
        format!("n = {n} must be at least 2k-r-t+2 = {}", 2 * k - r - t + 2),
    )?;
    require(n - k > 0, "n", format!("n-k-1 = {} is negative", n - k - 1))?;
    Ok(gauss_binom_ratio(k, t, q) / gauss_binom_ratio(r + t - 2, t, q)
        * gauss_binom_ratio(k, r + t - 2, q)
        * gauss_binom_ratio(n - k - 1, k - r - t + 1, q))
}

/// `prop3.2` report: exact census of `F_{X,k}` for dim X = r+t against the
/// family-size bound (weak inequality). Diagnostic; the bound is known to
/// reverse for some parameter corners.
pub fn family_size_audit(
    n: i64,
    k: i64,
    r: i64,
    t: i64,
    q: u32,
) -> Result<BoundReport, AuditError> {
    validate_audit_params(n, k, r, t, q)?;
    require(
        n >= 2 * k - r - t + 2,
        "n",
        format!("n = {n} must be at least 2k-r-t+2 = {}", 2 * k - r - t + 2),
    )?;
    let size = f_x_k_size(n as usize, k as usize, q, (r + t) as usize);
    let bound = family_size_bound(k, r, t, n, q)?;
    Ok(BoundReport::new(
        "prop3.2",
        None,
        BigRatio::from_integer(size.into()),
        bound,
        false,
    ))
}

fn validate_audit_params(n: i64, k: i64, r: i64, t: i64, q: u32) -> Result<(), AuditError> {
    require(is_prime_power(q as u64), "q", format!("{q} is not a prime power"))?;
    require(r >= 2, "r", format!("r = {r} must be at least 2"))?;
    require(t >= 1, "t", format!("t = {t} must be at least 1"))?;
    require(
        k >= r + t - 1,
        "k",
        format!("k = {k} must be at least r+t-1 = {}", r + t - 1),
    )?;
    require(
        n >= k + 2,
        "n",
        format!("n = {n} must be at least k+2 = {}", k + 2),
    )?;
    require(
        n > r + t,
        "n",
        format!("n = {n} must be at least r+t+1 = {}", r + t + 1),
    )?;
    Ok(())
}

/// `[m, i]^{-1}` as used inside the chains. When i > m the binomial is zero
/// and the printed formula degenerates (this happens in the r = 2 case of
/// the `lemma2.6` chain); the chain then substitutes the power relaxation
/// `q^{-i(m-i)}`, which only enlarges the product being bounded.
fn inverse_binom_factor(m: i64, i: i64, q: u32) -> BigRatio {
    let g = gauss_binom_ratio(m, i, q);
    if g == BigRatio::from_integer(0.into()) {
        q_pow_signed(q, -(i * (m - i)))
    } else {
        BigRatio::one() / g
    }
}

fn pow(base: &BigRatio, e: i64) -> BigRatio {
    let mut acc = BigRatio::one();
    for _ in 0..e {
        acc *= base.clone();
    }
    acc
}

/// Evaluates every inequality chain exactly at (n, k, r, t, q) and reports
/// whether each upper-bound product sits strictly below the closed-form
/// lower bound on the extremal simplex count.
///
/// Chains:
/// - `lemma2.6`:       `([k,t+1][2r+t-4,t+1]^{-1}[k,2r+t-4][n-k-2,k-2r-t+2])^{r+1}`
/// - `lemma3.3-sub2.2`: `[k,r+t-2] q^{2t} [n-r-t,k-r-t] · B^r`
/// - `lemma3.4` (per m ≥ t+r+1): `[t,t-1] q^{t(m-t)} [n-m+1,k-m+1] · B^r`
/// - `lemma3.5` (per t+1 ≤ m ≤ t+r-1):
///   `[m,m-1][k-m+1,1][k-m+1,r+t-m][n-r-t-1,k-r-t] · B^r`
///
/// where B is the [`family_size_bound`] product.
pub fn threshold_audit(
    n: i64,
    k: i64,
    r: i64,
    t: i64,
    q: u32,
) -> Result<Vec<BoundReport>, AuditError> {
    validate_audit_params(n, k, r, t, q)?;
    let rhs = n_trk_lower_bound_unchecked(n as usize, k as usize, q, r as usize, t as usize);
    let gb = |a: i64, b: i64| gauss_binom_ratio(a, b, q);
    let mut reports = Vec::new();

    // lemma2.6: the whole family bound raised to r+1
    let s26 = 2 * r + t - 4;
    let b26 = gb(k, t + 1) * inverse_binom_factor(s26, t + 1, q) * gb(k, s26)
        * gb(n - k - 2, k - 2 * r - t + 2);
    reports.push(BoundReport::new(
        "lemma2.6",
        None,
        pow(&b26, r + 1),
        rhs.clone(),
        true,
    ));

    // the shared |F|^r factor
    let b32 = gb(k, t) / gb(r + t - 2, t) * gb(k, r + t - 2) * gb(n - k - 1, k - r - t + 1);
    let b32_r = pow(&b32, r);

    // lemma3.3 subcase 2.2
    let f33 = gb(k, r + t - 2) * q_pow_signed(q, 2 * t) * gb(n - r - t, k - r - t);
    reports.push(BoundReport::new(
        "lemma3.3-sub2.2",
        None,
        f33 * b32_r.clone(),
        rhs.clone(),
        true,
    ));

    // lemma3.4, one report per cover-complete dimension m above t+r
    for m in (t + r + 1)..=(k + 1) {
        let f34 = gb(t, t - 1) * q_pow_signed(q, t * (m - t)) * gb(n - m + 1, k - m + 1);
        reports.push(BoundReport::new(
            "lemma3.4",
            Some(m),
            f34 * b32_r.clone(),
            rhs.clone(),
            true,
        ));
    }

    // lemma3.5, one report per maximal cover-complete dimension m below t+r
    for m in (t + 1)..=(t + r - 1) {
        let f35 = gb(m, m - 1)
            * gb(k - m + 1, 1)
            * gb(k - m + 1, r + t - m)
            * gb(n - r - t - 1, k - r - t);
        reports.push(BoundReport::new(
            "lemma3.5",
            Some(m),
            f35 * b32_r.clone(),
            rhs.clone(),
            true,
        ));
    }

    Ok(reports)
}
