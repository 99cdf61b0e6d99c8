//! Canonical subspaces of `F_q^n` and their lattice operations.
//!
//! Every subspace is stored as the reduced row-echelon basis of its span:
//! pivot columns strictly increasing, pivots equal to 1, pivot columns zero
//! elsewhere. The RREF matrix is unique per subspace, so equality and hashing
//! reduce to comparing the stored rows, and the textual encoding
//! (`"1,0,1;0,1,1"` — rows of element codes joined by semicolons) is stable
//! across runs.
//!
//! GF(2) rows are bit-packed into `u128` words (bit j = column j); rows over
//! other fields are dense element-code arrays. The packed path carries all
//! hot loops; `n` is capped at [`MAX_AMBIENT`] so a stacked double-width
//! elimination still fits one word.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::gfq::Field;
use crate::qbinom::{gauss_binom, BigCount};

/// Largest supported ambient dimension.
pub const MAX_AMBIENT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubspaceError {
    #[error("vector has length {got}, ambient dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element code {value} is out of range for GF({q})")]
    InvalidElement { value: u8, q: u32 },
    #[error("operands live in different ambient spaces")]
    AmbientMismatch,
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("subspaces do not form a direct sum decomposition of the ambient space")]
    NotDirectSum,
    #[error("invalid subspace encoding: {0}")]
    InvalidEncoding(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// GF(2): one u128 per basis row, bit j = column j.
    Packed(Vec<u128>),
    /// Other fields: dense element codes, one Vec per basis row.
    Dense(Vec<Vec<u8>>),
}

/// A subspace of `F_q^n` in canonical RREF basis form.
#[derive(Clone)]
pub struct Subspace {
    field: Field,
    n: usize,
    repr: Repr,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n && self.repr == other.repr
    }
}
impl Eq for Subspace {}

impl std::hash::Hash for Subspace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.n.hash(state);
        self.repr.hash(state);
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |s: &Subspace| (s.field.q(), s.n, s.dim());
        key(self).cmp(&key(other)).then_with(|| match (&self.repr, &other.repr) {
            (Repr::Packed(a), Repr::Packed(b)) => a.cmp(b),
            (Repr::Dense(a), Repr::Dense(b)) => a.cmp(b),
            (Repr::Packed(_), Repr::Dense(_)) => Ordering::Less,
            (Repr::Dense(_), Repr::Packed(_)) => Ordering::Greater,
        })
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(q={}, n={}, dim={}, [{}])",
            self.field.q(),
            self.n,
            self.dim(),
            self.encode()
        )
    }
}

// ---------------------------------------------------------------------------
// row engines

fn rref_packed(rows: &mut Vec<u128>, width: usize) {
    let mut rank = 0;
    for col in 0..width {
        let bit = 1u128 << col;
        if let Some(i) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) {
            rows.swap(rank, i);
            let pivot_row = rows[rank];
            for (j, row) in rows.iter_mut().enumerate() {
                if j != rank && *row & bit != 0 {
                    *row ^= pivot_row;
                }
            }
            rank += 1;
        }
    }
    rows.truncate(rank);
}

fn rref_dense(field: Field, rows: &mut Vec<Vec<u8>>) {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        if let Some(i) = (rank..rows.len()).find(|&i| rows[i][col] != 0) {
            rows.swap(rank, i);
            let inv = field.inv(rows[rank][col]).expect("nonzero pivot");
            for x in rows[rank].iter_mut() {
                *x = field.mul(*x, inv);
            }
            let pivot_row = rows[rank].clone();
            for (j, row) in rows.iter_mut().enumerate() {
                if j != rank && row[col] != 0 {
                    let factor = row[col];
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        *x = field.sub(*x, field.mul(factor, p));
                    }
                }
            }
            rank += 1;
        }
    }
    rows.truncate(rank);
}

fn pivot_of_packed(row: u128) -> usize {
    row.trailing_zeros() as usize
}

fn pivot_of_dense(row: &[u8]) -> usize {
    row.iter().position(|&x| x != 0).expect("nonzero row")
}

// ---------------------------------------------------------------------------

impl Subspace {
    pub fn zero(field: Field, n: usize) -> Subspace {
        assert!(n <= MAX_AMBIENT, "ambient dimension {n} exceeds {MAX_AMBIENT}");
        let repr = if field.is_gf2() {
            Repr::Packed(Vec::new())
        } else {
            Repr::Dense(Vec::new())
        };
        Subspace { field, n, repr }
    }

    pub fn full(field: Field, n: usize) -> Subspace {
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| {
                let mut r = vec![0u8; n];
                r[i] = 1;
                r
            })
            .collect();
        Subspace::from_rref_rows(field, n, rows)
    }

    /// Coordinate subspace spanned by the standard basis vectors at `cols`.
    pub fn coordinate(field: Field, n: usize, cols: &[usize]) -> Subspace {
        let mut sorted: Vec<usize> = cols.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let rows: Vec<Vec<u8>> = sorted
            .iter()
            .map(|&c| {
                assert!(c < n, "coordinate {c} out of range for ambient {n}");
                let mut r = vec![0u8; n];
                r[c] = 1;
                r
            })
            .collect();
        Subspace::from_rref_rows(field, n, rows)
    }

    /// Span of arbitrary vectors, canonicalized.
    pub fn from_vectors(
        field: Field,
        n: usize,
        vectors: &[Vec<u8>],
    ) -> Result<Subspace, SubspaceError> {
        if n > MAX_AMBIENT {
            return Err(SubspaceError::InvalidDimension(format!(
                "ambient dimension {n} exceeds {MAX_AMBIENT}"
            )));
        }
        for v in vectors {
            if v.len() != n {
                return Err(SubspaceError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            for &x in v {
                if x as u32 >= field.q() {
                    return Err(SubspaceError::InvalidElement {
                        value: x,
                        q: field.q(),
                    });
                }
            }
        }
        if field.is_gf2() {
            let mut rows: Vec<u128> = vectors.iter().map(|v| pack_row(v)).collect();
            rref_packed(&mut rows, n);
            Ok(Subspace {
                field,
                n,
                repr: Repr::Packed(rows),
            })
        } else {
            let mut rows: Vec<Vec<u8>> = vectors.to_vec();
            rref_dense(field, &mut rows);
            Ok(Subspace {
                field,
                n,
                repr: Repr::Dense(rows),
            })
        }
    }

    /// Fast path for rows already known to be in RREF (enumeration output).
    pub(crate) fn from_rref_rows(field: Field, n: usize, rows: Vec<Vec<u8>>) -> Subspace {
        debug_assert!(n <= MAX_AMBIENT);
        let repr = if field.is_gf2() {
            Repr::Packed(rows.iter().map(|v| pack_row(v)).collect())
        } else {
            Repr::Dense(rows)
        };
        let s = Subspace { field, n, repr };
        debug_assert_eq!(
            s,
            Subspace::from_vectors(field, n, &s.basis_rows()).unwrap(),
            "rows were not canonical RREF"
        );
        s
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Packed(rows) => rows.len(),
            Repr::Dense(rows) => rows.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.n
    }

    /// Basis rows as element codes (canonical RREF order).
    pub fn basis_rows(&self) -> Vec<Vec<u8>> {
        match &self.repr {
            Repr::Packed(rows) => rows.iter().map(|&r| unpack_row(r, self.n)).collect(),
            Repr::Dense(rows) => rows.clone(),
        }
    }

    /// Pivot columns, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        match &self.repr {
            Repr::Packed(rows) => rows.iter().map(|&r| pivot_of_packed(r)).collect(),
            Repr::Dense(rows) => rows.iter().map(|r| pivot_of_dense(r)).collect(),
        }
    }

    /// Textual encoding: basis rows as comma-separated element codes joined
    /// by semicolons. The zero subspace encodes as the empty string.
    pub fn encode(&self) -> String {
        self.basis_rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Parses the textual encoding, canonicalizing the rows.
    pub fn decode(field: Field, n: usize, text: &str) -> Result<Subspace, SubspaceError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Subspace::zero(field, n));
        }
        let mut rows = Vec::new();
        for row_text in text.split(';') {
            let row: Vec<u8> = row_text
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u8>()
                        .map_err(|_| SubspaceError::InvalidEncoding(format!("bad element {tok:?}")))
                })
                .collect::<Result<_, _>>()?;
            rows.push(row);
        }
        Subspace::from_vectors(field, n, &rows)
    }

    /// Membership test for a single vector.
    pub fn contains_vector(&self, v: &[u8]) -> bool {
        assert_eq!(v.len(), self.n, "vector length mismatch");
        match &self.repr {
            Repr::Packed(rows) => {
                let mut x = pack_row(v);
                for &row in rows {
                    let p = pivot_of_packed(row);
                    if x >> p & 1 == 1 {
                        x ^= row;
                    }
                }
                x == 0
            }
            Repr::Dense(rows) => {
                let f = self.field;
                let mut x = v.to_vec();
                for row in rows {
                    let p = pivot_of_dense(row);
                    if x[p] != 0 {
                        let factor = x[p];
                        for (xi, &ri) in x.iter_mut().zip(row) {
                            *xi = f.sub(*xi, f.mul(factor, ri));
                        }
                    }
                }
                x.iter().all(|&c| c == 0)
            }
        }
    }

    /// True iff `other` is a subspace of `self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool, SubspaceError> {
        self.check_ambient(other)?;
        Ok(other
            .basis_rows()
            .iter()
            .all(|row| self.contains_vector(row)))
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), SubspaceError> {
        if self.field != other.field || self.n != other.n {
            return Err(SubspaceError::AmbientMismatch);
        }
        Ok(())
    }

    /// Intersection via one stacked elimination pass that also yields the
    /// span; the modular law `dim A + dim B = dim(A+B) + dim(A∩B)` is
    /// asserted structurally.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        Ok(self.intersect_and_span(other)?.0)
    }

    pub fn span(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        Ok(self.intersect_and_span(other)?.1)
    }

    /// Dimension of the intersection without materializing the basis.
    pub fn intersection_dim(&self, other: &Subspace) -> Result<usize, SubspaceError> {
        self.check_ambient(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Packed(a), Repr::Packed(b)) => {
                Ok(zassenhaus_packed(a, b, self.n).0.len())
            }
            _ => Ok(self.intersect(other)?.dim()),
        }
    }

    /// Both halves of the stacked elimination: (A ∩ B, A + B).
    pub fn intersect_and_span(
        &self,
        other: &Subspace,
    ) -> Result<(Subspace, Subspace), SubspaceError> {
        self.check_ambient(other)?;
        let n = self.n;
        match (&self.repr, &other.repr) {
            (Repr::Packed(a), Repr::Packed(b)) => {
                let (inter, span) = zassenhaus_packed(a, b, n);
                assert_eq!(
                    a.len() + b.len(),
                    span.len() + inter.len(),
                    "modular law violated"
                );
                Ok((
                    Subspace {
                        field: self.field,
                        n,
                        repr: Repr::Packed(inter),
                    },
                    Subspace {
                        field: self.field,
                        n,
                        repr: Repr::Packed(span),
                    },
                ))
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                let (inter, span) = zassenhaus_dense(self.field, a, b, n);
                assert_eq!(
                    a.len() + b.len(),
                    span.len() + inter.len(),
                    "modular law violated"
                );
                Ok((
                    Subspace {
                        field: self.field,
                        n,
                        repr: Repr::Dense(inter),
                    },
                    Subspace {
                        field: self.field,
                        n,
                        repr: Repr::Dense(span),
                    },
                ))
            }
            _ => unreachable!("same field implies same representation"),
        }
    }

    /// Span of this subspace with extra vectors.
    pub fn span_with_vectors(&self, extra: &[Vec<u8>]) -> Result<Subspace, SubspaceError> {
        let mut rows = self.basis_rows();
        rows.extend_from_slice(extra);
        Subspace::from_vectors(self.field, self.n, &rows)
    }

    /// Span of several subspaces and extra vectors.
    pub fn span_many(
        field: Field,
        n: usize,
        parts: &[&Subspace],
        extra: &[Vec<u8>],
    ) -> Result<Subspace, SubspaceError> {
        let mut rows = Vec::new();
        for p in parts {
            if p.field != field || p.n != n {
                return Err(SubspaceError::AmbientMismatch);
            }
            rows.extend(p.basis_rows());
        }
        rows.extend_from_slice(extra);
        Subspace::from_vectors(field, n, &rows)
    }

    /// Deterministic complement: the coordinate subspace on the non-pivot
    /// columns. Satisfies X ∩ X' = 0 and X + X' = V.
    pub fn complement(&self) -> Subspace {
        let pivots = self.pivots();
        let cols: Vec<usize> = (0..self.n).filter(|c| !pivots.contains(c)).collect();
        Subspace::coordinate(self.field, self.n, &cols)
    }

    /// Projection of `self` onto the decomposition (X, Y) with X ⊕ Y = V:
    /// returns (F ∩ X, F(Y)) where F(Y) ⊆ Y is the unique subspace making
    /// (F ∩ X) + F(Y) equivalent to F with respect to X (same intersection
    /// with X, same sum with X; both are asserted).
    pub fn project(
        &self,
        x: &Subspace,
        y: &Subspace,
    ) -> Result<(Subspace, Subspace), SubspaceError> {
        self.check_ambient(x)?;
        self.check_ambient(y)?;
        let n = self.n;
        if x.dim() + y.dim() != n || x.intersection_dim(y)? != 0 {
            return Err(SubspaceError::NotDirectSum);
        }
        let f_cap_x = self.intersect(x)?;

        // Decompose each basis vector of F along (X, Y) by eliminating with
        // the stacked [X; Y] basis while tracking which block absorbed what.
        let x_rows = x.basis_rows();
        let y_rows = y.basis_rows();
        let mut y_parts: Vec<Vec<u8>> = Vec::with_capacity(self.dim());
        for v in self.basis_rows() {
            let coeffs = solve_in_basis(self.field, n, &x_rows, &y_rows, &v);
            let mut y_part = vec![0u8; n];
            for (c, row) in coeffs[x_rows.len()..].iter().zip(&y_rows) {
                for (acc, &ri) in y_part.iter_mut().zip(row) {
                    *acc = self.field.add(*acc, self.field.mul(*c, ri));
                }
            }
            y_parts.push(y_part);
        }
        let f_y = Subspace::from_vectors(self.field, n, &y_parts)?;

        assert_eq!(
            f_y.dim(),
            self.dim() - f_cap_x.dim(),
            "projection dimension mismatch"
        );
        let recombined = f_cap_x.span(&f_y)?;
        assert_eq!(
            recombined.intersect(x)?,
            f_cap_x,
            "projection does not preserve the intersection with X"
        );
        assert_eq!(
            recombined.span(x)?,
            self.span(x)?,
            "projection does not preserve the sum with X"
        );
        Ok((f_cap_x, f_y))
    }

    /// Image under a linear map given as an n×n matrix of element codes
    /// (vectors act on the left: v ↦ v·M).
    pub fn image_under(&self, matrix: &[Vec<u8>]) -> Result<Subspace, SubspaceError> {
        let n = self.n;
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(SubspaceError::DimensionMismatch {
                expected: n,
                got: matrix.len(),
            });
        }
        let f = self.field;
        let images: Vec<Vec<u8>> = self
            .basis_rows()
            .iter()
            .map(|v| {
                let mut out = vec![0u8; n];
                for (i, &vi) in v.iter().enumerate() {
                    if vi != 0 {
                        for (o, &m) in out.iter_mut().zip(&matrix[i]) {
                            *o = f.add(*o, f.mul(vi, m));
                        }
                    }
                }
                out
            })
            .collect();
        Subspace::from_vectors(f, n, &images)
    }

    /// All vectors of the subspace (including zero), in a deterministic
    /// order. Intended for small oracles; q^dim vectors.
    pub fn iter_vectors(&self) -> Vec<Vec<u8>> {
        let rows = self.basis_rows();
        let f = self.field;
        let q = f.q() as u64;
        let dim = rows.len();
        let total = q.pow(dim as u32);
        let mut out = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut v = vec![0u8; self.n];
            let mut rem = idx;
            for row in &rows {
                let c = (rem % q) as u8;
                rem /= q;
                if c != 0 {
                    for (vi, &ri) in v.iter_mut().zip(row) {
                        *vi = f.add(*vi, f.mul(c, ri));
                    }
                }
            }
            out.push(v);
        }
        out
    }
}

fn pack_row(v: &[u8]) -> u128 {
    v.iter()
        .enumerate()
        .fold(0u128, |acc, (j, &x)| acc | ((x as u128 & 1) << j))
}

fn unpack_row(row: u128, n: usize) -> Vec<u8> {
    (0..n).map(|j| (row >> j & 1) as u8).collect()
}

/// Stacked elimination on [A|A; B|0]: rows whose left half vanishes carry the
/// intersection in their right half, the rest carry the span in their left
/// half. Returns (intersection rows, span rows), each in RREF.
fn zassenhaus_packed(a: &[u128], b: &[u128], n: usize) -> (Vec<u128>, Vec<u128>) {
    debug_assert!(2 * n <= 128);
    let mask = if n == 64 {
        u64::MAX as u128
    } else {
        (1u128 << n) - 1
    };
    let mut rows: Vec<u128> = a.iter().map(|&r| r | (r << n)).collect();
    rows.extend(b.iter().copied());
    rref_packed(&mut rows, 2 * n);
    let mut inter = Vec::new();
    let mut span = Vec::new();
    for row in rows {
        if row & mask == 0 {
            inter.push(row >> n);
        } else {
            span.push(row & mask);
        }
    }
    (inter, span)
}

fn zassenhaus_dense(
    field: Field,
    a: &[Vec<u8>],
    b: &[Vec<u8>],
    n: usize,
) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(a.len() + b.len());
    for r in a {
        let mut row = r.clone();
        row.extend_from_slice(r);
        rows.push(row);
    }
    for r in b {
        let mut row = r.clone();
        row.extend(std::iter::repeat_n(0u8, n));
        rows.push(row);
    }
    rref_dense(field, &mut rows);
    let mut inter = Vec::new();
    let mut span = Vec::new();
    for row in rows {
        if row[..n].iter().all(|&x| x == 0) {
            inter.push(row[n..].to_vec());
        } else {
            span.push(row[..n].to_vec());
        }
    }
    (inter, span)
}

/// Coefficients of `v` in the stacked basis [x_rows; y_rows] (which must be
/// a basis of the ambient space).
fn solve_in_basis(
    field: Field,
    n: usize,
    x_rows: &[Vec<u8>],
    y_rows: &[Vec<u8>],
    v: &[u8],
) -> Vec<u8> {
    let m = x_rows.len() + y_rows.len();
    debug_assert_eq!(m, n, "stacked rows must form a basis");
    // Augment each basis row with an indicator column block and eliminate v.
    let mut aug: Vec<Vec<u8>> = Vec::with_capacity(m);
    for (i, row) in x_rows.iter().chain(y_rows.iter()).enumerate() {
        let mut r = row.clone();
        let mut ind = vec![0u8; m];
        ind[i] = 1;
        r.extend(ind);
        aug.push(r);
    }
    rref_dense(field, &mut aug);
    let mut rem = v.to_vec();
    let mut coeffs = vec![0u8; m];
    for row in &aug {
        let p = pivot_of_dense(&row[..n]);
        if rem[p] != 0 {
            let factor = rem[p];
            for (xi, &ri) in rem.iter_mut().zip(&row[..n]) {
                *xi = field.sub(*xi, field.mul(factor, ri));
            }
            for (ci, &ri) in coeffs.iter_mut().zip(&row[n..]) {
                *ci = field.add(*ci, field.mul(factor, ri));
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0), "vector outside the basis span");
    coeffs
}

// ---------------------------------------------------------------------------
// enumeration

/// Deterministic stream of all k-subspaces of `F_q^n`.
///
/// Order: pivot patterns (k-subsets of columns) lexicographically, then free
/// entries lexicographically with the last free position varying fastest. The
/// stream can be restarted from any pivot pattern, which is what partitioned
/// counting keys on.
pub struct SubspaceStream {
    field: Field,
    n: usize,
    k: usize,
    pattern: Option<Vec<usize>>,
    free_positions: Vec<(usize, usize)>,
    assignment: Vec<u8>,
    fresh_pattern: bool,
}

impl SubspaceStream {
    fn free_positions(pattern: &[usize], n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &c) in pattern.iter().enumerate() {
            for j in c + 1..n {
                if !pattern.contains(&j) {
                    out.push((i, j));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn start_at(field: Field, n: usize, k: usize, pattern: Option<Vec<usize>>) -> SubspaceStream {
        let free_positions = pattern
            .as_deref()
            .map_or_else(Vec::new, |p| Self::free_positions(p, n));
        let assignment = vec![0u8; free_positions.len()];
        SubspaceStream {
            field,
            n,
            k,
            pattern,
            free_positions,
            assignment,
            fresh_pattern: true,
        }
    }

    /// Restarts the stream at a given pivot pattern (inclusive).
    pub fn starting_at_pattern(
        field: Field,
        n: usize,
        k: usize,
        pattern: &[usize],
    ) -> Result<SubspaceStream, SubspaceError> {
        if k > n {
            return Err(SubspaceError::InvalidDimension(format!(
                "k={k} exceeds ambient dimension {n}"
            )));
        }
        if pattern.len() != k || pattern.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SubspaceError::InvalidDimension(
                "pattern must be a strictly increasing k-subset of columns".into(),
            ));
        }
        Ok(Self::start_at(field, n, k, Some(pattern.to_vec())))
    }

    fn advance_pattern(&mut self) {
        let pattern = self.pattern.as_mut().expect("pattern present");
        // lexicographic successor of a k-subset of {0..n-1}
        let k = pattern.len();
        if k == 0 {
            self.pattern = None;
            return;
        }
        let n = self.n;
        let mut i = k;
        loop {
            if i == 0 {
                self.pattern = None;
                return;
            }
            i -= 1;
            if pattern[i] < n - (k - i) {
                pattern[i] += 1;
                for j in i + 1..k {
                    pattern[j] = pattern[j - 1] + 1;
                }
                break;
            }
        }
        let pattern = self.pattern.as_deref().unwrap().to_vec();
        self.free_positions = Self::free_positions(&pattern, self.n);
        self.assignment = vec![0u8; self.free_positions.len()];
        self.fresh_pattern = true;
    }

    fn current_subspace(&self) -> Subspace {
        let pattern = self.pattern.as_deref().expect("pattern present");
        let mut rows = vec![vec![0u8; self.n]; self.k];
        for (i, &c) in pattern.iter().enumerate() {
            rows[i][c] = 1;
        }
        for (&(i, j), &v) in self.free_positions.iter().zip(&self.assignment) {
            rows[i][j] = v;
        }
        Subspace::from_rref_rows(self.field, self.n, rows)
    }

    fn advance_assignment(&mut self) -> bool {
        // lexicographic counting: last position fastest
        let qmax = (self.field.q() - 1) as u8;
        for slot in self.assignment.iter_mut().rev() {
            if *slot < qmax {
                *slot += 1;
                return true;
            }
            *slot = 0;
        }
        false
    }
}

impl Iterator for SubspaceStream {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            self.pattern.as_ref()?;
            if self.fresh_pattern {
                self.fresh_pattern = false;
                return Some(self.current_subspace());
            }
            if self.advance_assignment() {
                return Some(self.current_subspace());
            }
            self.advance_pattern();
        }
    }
}

/// All k-subspaces of `F_q^n`, exactly once each, in the canonical order.
/// The stream length equals `[n, k]_q`.
pub fn enumerate_subspaces(
    field: Field,
    n: usize,
    k: usize,
) -> Result<SubspaceStream, SubspaceError> {
    if n > MAX_AMBIENT {
        return Err(SubspaceError::InvalidDimension(format!(
            "ambient dimension {n} exceeds {MAX_AMBIENT}"
        )));
    }
    if k > n {
        return Err(SubspaceError::InvalidDimension(format!(
            "k={k} exceeds ambient dimension {n}"
        )));
    }
    let pattern: Vec<usize> = (0..k).collect();
    Ok(SubspaceStream::start_at(field, n, k, Some(pattern)))
}

/// Number of k-subspaces of `F_q^n`.
pub fn subspace_count(n: usize, k: usize, q: u32) -> BigCount {
    gauss_binom(n as i64, k as i64, q)
}

/// All j-subspaces B with `dim(A ∩ B) = l`, as a filtered stream.
///
/// The count is `q^{(i-l)(j-l)} [i, l] [n-i, j-l]` for `i = dim A`; tests
/// cross-check the stream length against that closed form.
pub fn enumerate_with_intersection(
    a: &Subspace,
    j: usize,
    l: usize,
) -> Result<impl Iterator<Item = Subspace> + '_, SubspaceError> {
    if j > a.ambient_dim() {
        return Err(SubspaceError::InvalidDimension(format!(
            "j={j} exceeds ambient dimension {}",
            a.ambient_dim()
        )));
    }
    if l > a.dim().min(j) {
        return Err(SubspaceError::InvalidDimension(format!(
            "l={l} exceeds min(dim A, j) = {}",
            a.dim().min(j)
        )));
    }
    let stream = enumerate_subspaces(a.field(), a.ambient_dim(), j)?;
    Ok(stream.filter(move |b| a.intersection_dim(b).expect("same ambient") == l))
}

/// All d-dimensional subspaces of `space`, lifted from an abstract
/// enumeration over its basis. Deterministic order.
pub fn subspaces_of(space: &Subspace, d: usize) -> Result<Vec<Subspace>, SubspaceError> {
    if d > space.dim() {
        return Err(SubspaceError::InvalidDimension(format!(
            "d={d} exceeds dim = {}",
            space.dim()
        )));
    }
    let basis = space.basis_rows();
    let f = space.field();
    let n = space.ambient_dim();
    let mut out = Vec::new();
    for abstract_sub in enumerate_subspaces(f, space.dim(), d)? {
        let lifted: Vec<Vec<u8>> = abstract_sub
            .basis_rows()
            .iter()
            .map(|coeffs| {
                let mut v = vec![0u8; n];
                for (c, row) in coeffs.iter().zip(&basis) {
                    if *c != 0 {
                        for (vi, &ri) in v.iter_mut().zip(row) {
                            *vi = f.add(*vi, f.mul(*c, ri));
                        }
                    }
                }
                v
            })
            .collect();
        out.push(Subspace::from_vectors(f, n, &lifted)?);
    }
    Ok(out)
}

/// Random invertible n×n matrix over the field, for change-of-basis checks.
pub fn random_invertible_matrix(field: Field, n: usize, rng: &mut impl rand::Rng) -> Vec<Vec<u8>> {
    loop {
        let m: Vec<Vec<u8>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| rng.gen_range(0..field.q()) as u8)
                    .collect()
            })
            .collect();
        let mut rows = m.clone();
        rref_dense(field, &mut rows);
        if rows.len() == n {
            return m;
        }
    }
}
