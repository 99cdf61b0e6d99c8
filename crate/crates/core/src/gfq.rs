//! Arithmetic in GF(q) for small prime powers q.
//!
//! Elements are integer codes in `[0, q)`. Prime fields use the natural
//! residue encoding. Extension fields pack polynomial coefficients in base p
//! (code = c_0 + c_1·p + ... + c_{e-1}·p^{e-1}) and reduce modulo a fixed
//! irreducible polynomial, so a given code means the same field element in
//! every run and in every file:
//!
//! - GF(4):  x^2 + x + 1
//! - GF(8):  x^3 + x + 1
//! - GF(9):  x^2 + 1
//! - GF(16): x^4 + x + 1
//!
//! All arithmetic goes through precomputed full tables; contexts are built
//! once per cardinality and shared for the life of the process.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Cardinalities with prebuilt arithmetic tables.
pub const SUPPORTED_Q: &[u32] = &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("unsupported cardinality q={0}; supported: {SUPPORTED_Q:?}")]
    UnsupportedCardinality(u32),
    #[error("division by zero: inv(0) is undefined")]
    DivisionByZero,
}

/// Immutable arithmetic context for one GF(q). Shared behind [`Field`].
pub struct FieldCtx {
    q: u32,
    p: u32,
    e: u32,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>, // inv[0] unused
}

/// Cheap copyable handle to a field context.
#[derive(Copy, Clone)]
pub struct Field(&'static FieldCtx);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.q == other.0.q
    }
}
impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.q.hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

/// Coefficients of the fixed irreducible modulus, constant term first,
/// including the leading 1.
fn modulus_coeffs(q: u32) -> &'static [u8] {
    match q {
        4 => &[1, 1, 1],
        8 => &[1, 1, 0, 1],
        9 => &[1, 0, 1],
        16 => &[1, 1, 0, 0, 1],
        _ => unreachable!("no modulus for q={q}"),
    }
}

fn factor_prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut m = q;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            return if m == 1 { Some((p, e)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

fn code_to_coeffs(code: u8, p: u32, e: u32) -> Vec<u8> {
    let mut c = code as u32;
    (0..e)
        .map(|_| {
            let d = (c % p) as u8;
            c /= p;
            d
        })
        .collect()
}

fn coeffs_to_code(coeffs: &[u8], p: u32) -> u8 {
    coeffs
        .iter()
        .rev()
        .fold(0u32, |acc, &c| acc * p + c as u32) as u8
}

fn build_ctx(q: u32) -> FieldCtx {
    let (p, e) = factor_prime_power(q).expect("supported q is a prime power");
    let n = q as usize;
    let mut add = vec![0u8; n * n];
    let mut mul = vec![0u8; n * n];
    let mut neg = vec![0u8; n];
    let mut inv = vec![0u8; n];

    if e == 1 {
        for a in 0..q {
            neg[a as usize] = ((q - a) % q) as u8;
            for b in 0..q {
                add[(a * q + b) as usize] = ((a + b) % q) as u8;
                mul[(a * q + b) as usize] = ((a * b) % q) as u8;
            }
        }
    } else {
        let modulus = modulus_coeffs(q);
        for a in 0..q as u8 {
            let ca = code_to_coeffs(a, p, e);
            let cneg: Vec<u8> = ca.iter().map(|&c| ((p - c as u32) % p) as u8).collect();
            neg[a as usize] = coeffs_to_code(&cneg, p);
            for b in 0..q as u8 {
                let cb = code_to_coeffs(b, p, e);
                let csum: Vec<u8> = ca
                    .iter()
                    .zip(&cb)
                    .map(|(&x, &y)| ((x as u32 + y as u32) % p) as u8)
                    .collect();
                add[a as usize * n + b as usize] = coeffs_to_code(&csum, p);

                // schoolbook product, then reduce by the monic modulus
                let mut prod = vec![0u32; 2 * e as usize - 1];
                for (i, &x) in ca.iter().enumerate() {
                    for (j, &y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x as u32 * y as u32) % p;
                    }
                }
                for d in (e as usize..prod.len()).rev() {
                    let c = prod[d];
                    if c == 0 {
                        continue;
                    }
                    prod[d] = 0;
                    for (i, &m) in modulus.iter().enumerate().take(e as usize) {
                        let idx = d - e as usize + i;
                        prod[idx] = (prod[idx] + c * (p - m as u32)) % p;
                    }
                }
                let cred: Vec<u8> = prod[..e as usize].iter().map(|&c| c as u8).collect();
                mul[a as usize * n + b as usize] = coeffs_to_code(&cred, p);
            }
        }
    }

    for a in 1..n {
        let b = (1..n)
            .find(|&b| mul[a * n + b] == 1)
            .expect("every nonzero element of GF(q) has an inverse");
        inv[a] = b as u8;
    }

    FieldCtx {
        q,
        p,
        e,
        add,
        mul,
        neg,
        inv,
    }
}

fn registry() -> &'static Vec<FieldCtx> {
    static REGISTRY: OnceLock<Vec<FieldCtx>> = OnceLock::new();
    REGISTRY.get_or_init(|| SUPPORTED_Q.iter().map(|&q| build_ctx(q)).collect())
}

impl Field {
    /// Field context for a supported prime power.
    pub fn new(q: u32) -> Result<Field, FieldError> {
        let idx = SUPPORTED_Q
            .iter()
            .position(|&s| s == q)
            .ok_or(FieldError::UnsupportedCardinality(q))?;
        Ok(Field(&registry()[idx]))
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn extension_degree(&self) -> u32 {
        self.0.e
    }

    pub fn is_gf2(&self) -> bool {
        self.0.q == 2
    }

    /// All element codes, 0 first.
    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.0.q as u8
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.0.add[a as usize * self.0.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.0.mul[a as usize * self.0.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u8) -> Result<u8, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.0.inv[a as usize])
    }

    pub fn div(&self, a: u8, b: u8) -> Result<u8, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Polynomial coefficients of an element code (base-p digits, constant
    /// term first). Round-trips with [`Field::from_coefficients`].
    pub fn coefficients(&self, a: u8) -> Vec<u8> {
        code_to_coeffs(a, self.0.p, self.0.e)
    }

    pub fn from_coefficients(&self, coeffs: &[u8]) -> u8 {
        coeffs_to_code(coeffs, self.0.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axioms_hold_exhaustively(f: Field) {
        let q = f.q() as usize;
        for a in f.elements() {
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "inverse fails in GF({q})");
            }
            for b in f.elements() {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in f.elements() {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(
                        f.mul(a, f.add(b, c)),
                        f.add(f.mul(a, b), f.mul(a, c)),
                        "distributivity fails in GF({q})"
                    );
                }
            }
        }
    }

    #[test]
    fn all_supported_fields_satisfy_axioms() {
        for &q in SUPPORTED_Q {
            axioms_hold_exhaustively(Field::new(q).unwrap());
        }
    }

    #[test]
    fn gf2_addition_is_xor() {
        let f = Field::new(2).unwrap();
        for a in 0..2u8 {
            for b in 0..2u8 {
                assert_eq!(f.add(a, b), a ^ b);
            }
        }
    }

    #[test]
    fn gf4_has_characteristic_two() {
        let f = Field::new(4).unwrap();
        assert_eq!(f.characteristic(), 2);
        assert_eq!(f.extension_degree(), 2);
        for a in f.elements() {
            assert_eq!(f.add(a, a), 0);
        }
    }

    #[test]
    fn gf4_multiplication_commutes_on_all_pairs() {
        let f = Field::new(4).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul(b, a));
            }
        }
    }

    #[test]
    fn six_is_rejected() {
        assert_eq!(Field::new(6), Err(FieldError::UnsupportedCardinality(6)));
        assert_eq!(Field::new(1), Err(FieldError::UnsupportedCardinality(1)));
        assert_eq!(Field::new(12), Err(FieldError::UnsupportedCardinality(12)));
    }

    #[test]
    fn gf3_and_gf5_spot_values() {
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.add(2, 2), 1);
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.inv(3).unwrap(), 2);
    }

    #[test]
    fn inv_of_zero_is_an_error() {
        for &q in SUPPORTED_Q {
            let f = Field::new(q).unwrap();
            assert_eq!(f.inv(0), Err(FieldError::DivisionByZero));
        }
    }

    #[test]
    fn element_codes_round_trip_through_coefficients() {
        for &q in SUPPORTED_Q {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.from_coefficients(&f.coefficients(a)), a);
            }
        }
    }
}
