//! k-uniform families of subspaces: intersecting predicates, t-covers and
//! covering numbers, cover-complete subspaces, and the two extremal
//! constructions `F_{X,k}` (members meeting X in dimension ≥ dim X − 1) and
//! `F*_{X,k}` (the equality sub-family).
//!
//! Membership is kept both as an ordered list (insertion order, which is the
//! enumeration order for built families) and a hash set of canonical
//! encodings, so counts and reports are deterministic and membership tests
//! are O(1).
//!
//! File format (the interchange unit for the CLI): a header line
//! `q=<q> n=<n> k=<k>`, then one subspace encoding per line, `#` comments
//! allowed.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::gfq::Field;
use crate::qbinom::{gauss_binom, q_pow, BigCount};
use crate::subspace::{enumerate_subspaces, subspaces_of, Subspace, SubspaceError};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("family is empty")]
    EmptyFamily,
    #[error("member has dimension {got}, family is {expected}-uniform")]
    WrongMemberDimension { expected: usize, got: usize },
    #[error("member lives in a different ambient space")]
    AmbientMismatch,
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("duplicate member{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DuplicateMember { line: Option<usize> },
    #[error("file parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A deduplicated, ordered collection of k-subspaces with common ambient.
#[derive(Clone, Debug)]
pub struct Family {
    field: Field,
    n: usize,
    k: usize,
    members: Vec<Subspace>,
    index: HashSet<Subspace>,
}

/// Result of a covering-number search: the minimum dimension of a t-cover
/// and the complete list of covers of that dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverReport {
    pub tau: usize,
    pub covers: Vec<Subspace>,
}

impl Family {
    pub fn new(field: Field, n: usize, k: usize) -> Result<Family, FamilyError> {
        if k > n {
            return Err(FamilyError::InvalidDimension(format!(
                "k={k} exceeds ambient dimension {n}"
            )));
        }
        Ok(Family {
            field,
            n,
            k,
            members: Vec::new(),
            index: HashSet::new(),
        })
    }

    pub fn from_members<I: IntoIterator<Item = Subspace>>(
        field: Field,
        n: usize,
        k: usize,
        members: I,
    ) -> Result<Family, FamilyError> {
        let mut fam = Family::new(field, n, k)?;
        for m in members {
            fam.insert(m)?;
        }
        Ok(fam)
    }

    /// Adds a member; returns false if it was already present.
    pub fn insert(&mut self, s: Subspace) -> Result<bool, FamilyError> {
        if s.field() != self.field || s.ambient_dim() != self.n {
            return Err(FamilyError::AmbientMismatch);
        }
        if s.dim() != self.k {
            return Err(FamilyError::WrongMemberDimension {
                expected: self.k,
                got: s.dim(),
            });
        }
        if self.index.contains(&s) {
            return Ok(false);
        }
        self.index.insert(s.clone());
        self.members.push(s);
        Ok(true)
    }

    pub fn remove(&mut self, s: &Subspace) -> bool {
        if self.index.remove(s) {
            let pos = self.members.iter().position(|m| m == s).unwrap();
            self.members.remove(pos);
            true
        } else {
            false
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn ambient_dim(&self) -> usize {
        self.n
    }
    pub fn uniformity(&self) -> usize {
        self.k
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn member(&self, i: usize) -> &Subspace {
        &self.members[i]
    }
    pub fn members(&self) -> &[Subspace] {
        &self.members
    }
    pub fn iter(&self) -> impl Iterator<Item = &Subspace> {
        self.members.iter()
    }
    pub fn contains_member(&self, s: &Subspace) -> bool {
        self.index.contains(s)
    }

    /// Canonical textual key: sorted member encodings. Used for
    /// deterministic tie-breaking across differently-ordered copies.
    pub fn canonical_encoding(&self) -> String {
        let mut encs: Vec<String> = self.members.iter().map(|m| m.encode()).collect();
        encs.sort_unstable();
        encs.join("|")
    }

    /// Member-wise image under an invertible linear map.
    pub fn image_under(&self, matrix: &[Vec<u8>]) -> Result<Family, FamilyError> {
        let mut out = Family::new(self.field, self.n, self.k)?;
        for m in &self.members {
            out.insert(m.image_under(matrix)?)?;
        }
        Ok(out)
    }

    /// True iff every r-subset of members has intersection dimension ≥ t.
    /// Families with fewer than r members are vacuously intersecting.
    ///
    /// The combination walk carries the running intersection and stops at the
    /// first prefix whose intersection already dropped below t (any r-subset
    /// through that prefix witnesses the failure).
    pub fn is_r_wise_t_intersecting(&self, r: usize, t: usize) -> bool {
        assert!(r >= 2, "r must be at least 2");
        assert!(t >= 1, "t must be at least 1");
        if self.members.len() < r {
            return true;
        }
        self.intersecting_dfs(None, 0, r, t)
    }

    fn intersecting_dfs(
        &self,
        inter: Option<&Subspace>,
        start: usize,
        remaining: usize,
        t: usize,
    ) -> bool {
        if remaining == 0 {
            return true;
        }
        for i in start..=self.members.len() - remaining {
            let next = match inter {
                None => self.members[i].clone(),
                Some(s) => s.intersect(&self.members[i]).expect("same ambient"),
            };
            if next.dim() < t {
                return false;
            }
            if !self.intersecting_dfs(Some(&next), i + 1, remaining - 1, t) {
                return false;
            }
        }
        true
    }

    /// True iff `dim(T ∩ F) ≥ t` for every member F.
    pub fn is_t_cover(&self, cover: &Subspace, t: usize) -> Result<bool, FamilyError> {
        if cover.field() != self.field || cover.ambient_dim() != self.n {
            return Err(FamilyError::AmbientMismatch);
        }
        Ok(self
            .members
            .iter()
            .all(|m| cover.intersection_dim(m).expect("same ambient") >= t))
    }

    /// Covering number and the complete list of minimum-dimension t-covers,
    /// by dimension-ascending search.
    ///
    /// Candidates at dimension d extend a t-subspace of the first member
    /// (every t-cover meets it in ≥ t dimensions) by d − t directions inside
    /// the span of the members: a minimum cover sticking out of that span
    /// could be cut down to its intersection with the span, contradicting
    /// minimality. [`Family::covering_number_exhaustive`] is the independent
    /// slow route over all d-subspaces of the ambient space.
    pub fn covering_number(&self, t: usize) -> Result<CoverReport, FamilyError> {
        self.cover_search_validate(t)?;
        let first = &self.members[0];
        let mut span = first.clone();
        for m in &self.members[1..] {
            if span.is_full() {
                break;
            }
            span = span.span(m)?;
        }
        let anchors = subspaces_of(first, t)?;
        for d in t..=span.dim() {
            let mut seen: HashSet<Subspace> = HashSet::new();
            let mut covers: Vec<Subspace> = Vec::new();
            for anchor in &anchors {
                for cand in extensions_within(anchor, &span, d)? {
                    if seen.insert(cand.clone()) && self.is_t_cover(&cand, t)? {
                        covers.push(cand);
                    }
                }
            }
            if !covers.is_empty() {
                covers.sort_unstable();
                if d == t {
                    debug_assert!(covers
                        .iter()
                        .all(|c| self.members.iter().all(|m| m.contains(c).unwrap())));
                }
                return Ok(CoverReport { tau: d, covers });
            }
        }
        unreachable!("the span of the members is itself a t-cover")
    }

    /// Same result as [`Family::covering_number`], scanning every
    /// d-subspace of the ambient space.
    pub fn covering_number_exhaustive(&self, t: usize) -> Result<CoverReport, FamilyError> {
        self.cover_search_validate(t)?;
        for d in t..=self.n {
            let mut covers: Vec<Subspace> = Vec::new();
            for cand in enumerate_subspaces(self.field, self.n, d)? {
                if self.is_t_cover(&cand, t)? {
                    covers.push(cand);
                }
            }
            if !covers.is_empty() {
                covers.sort_unstable();
                return Ok(CoverReport { tau: d, covers });
            }
        }
        unreachable!("the full space is a t-cover when t <= k")
    }

    fn cover_search_validate(&self, t: usize) -> Result<(), FamilyError> {
        if self.members.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        if t == 0 || t > self.k {
            return Err(FamilyError::InvalidDimension(format!(
                "t={t} must satisfy 1 <= t <= k = {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Trivial ⟺ all members share a t-subspace ⟺ τ_t = t.
    pub fn is_trivial(&self, t: usize) -> Result<bool, FamilyError> {
        Ok(self.covering_number(t)?.tau == t)
    }

    /// True iff every (t+1)-subspace of `x` is a minimum t-cover of the
    /// family.
    pub fn is_cover_complete(&self, x: &Subspace, t: usize) -> Result<bool, FamilyError> {
        let report = self.covering_number(t)?;
        self.is_cover_complete_with(x, t, &report)
    }

    /// Variant reusing an already computed [`CoverReport`].
    pub fn is_cover_complete_with(
        &self,
        x: &Subspace,
        t: usize,
        report: &CoverReport,
    ) -> Result<bool, FamilyError> {
        if x.dim() < t + 1 {
            return Err(FamilyError::InvalidDimension(format!(
                "cover-completeness needs dim X >= t+1 = {}, got {}",
                t + 1,
                x.dim()
            )));
        }
        if report.tau != t + 1 {
            return Ok(false);
        }
        let cover_set: HashSet<&Subspace> = report.covers.iter().collect();
        Ok(subspaces_of(x, t + 1)?
            .iter()
            .all(|z| cover_set.contains(z)))
    }

    /// Non-members whose addition preserves the r-wise t-intersecting
    /// property. Scans all k-subspaces of the ambient space.
    pub fn extension_candidates(&self, r: usize, t: usize) -> Result<Vec<Subspace>, FamilyError> {
        let mut out = Vec::new();
        for cand in enumerate_subspaces(self.field, self.n, self.k)? {
            if !self.contains_member(&cand) && self.admits(&cand, r, t) {
                out.push(cand);
            }
        }
        Ok(out)
    }

    /// True iff adding `cand` keeps the family r-wise t-intersecting; only
    /// r-subsets through `cand` need checking.
    pub fn admits(&self, cand: &Subspace, r: usize, t: usize) -> bool {
        if self.members.len() + 1 < r {
            return true;
        }
        self.admits_dfs(cand, 0, r - 1, t)
    }

    fn admits_dfs(&self, inter: &Subspace, start: usize, remaining: usize, t: usize) -> bool {
        if remaining == 0 {
            return inter.dim() >= t;
        }
        if inter.dim() < t {
            return false;
        }
        for i in start..=self.members.len() - remaining {
            let next = inter.intersect(&self.members[i]).expect("same ambient");
            if !self.admits_dfs(&next, i + 1, remaining - 1, t) {
                return false;
            }
        }
        true
    }

    /// Maximality with respect to adding any k-subspace of the ambient
    /// space.
    pub fn is_maximal_r_wise_t_intersecting(
        &self,
        r: usize,
        t: usize,
    ) -> Result<bool, FamilyError> {
        if !self.is_r_wise_t_intersecting(r, t) {
            return Ok(false);
        }
        Ok(self.extension_candidates(r, t)?.is_empty())
    }

    // -- file format --------------------------------------------------------

    pub fn write<W: Write>(&self, w: &mut W) -> Result<(), FamilyError> {
        writeln!(w, "q={} n={} k={}", self.field.q(), self.n, self.k)?;
        for m in &self.members {
            writeln!(w, "{}", m.encode())?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Family, FamilyError> {
        let mut header: Option<(u32, usize, usize)> = None;
        let mut fam: Option<Family> = None;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if header.is_none() {
                let mut q = None;
                let mut n = None;
                let mut k = None;
                for tok in line.split_whitespace() {
                    let (key, val) = tok
                        .split_once('=')
                        .ok_or_else(|| FamilyError::Parse(format!("bad header token {tok:?}")))?;
                    let parsed: usize = val
                        .parse()
                        .map_err(|_| FamilyError::Parse(format!("bad header value {val:?}")))?;
                    match key {
                        "q" => q = Some(parsed as u32),
                        "n" => n = Some(parsed),
                        "k" => k = Some(parsed),
                        _ => return Err(FamilyError::Parse(format!("unknown header key {key:?}"))),
                    }
                }
                let (q, n, k) = match (q, n, k) {
                    (Some(q), Some(n), Some(k)) => (q, n, k),
                    _ => {
                        return Err(FamilyError::Parse(
                            "header must be `q=<q> n=<n> k=<k>`".into(),
                        ))
                    }
                };
                let field = Field::new(q)
                    .map_err(|e| FamilyError::Parse(format!("header: {e}")))?;
                header = Some((q, n, k));
                fam = Some(Family::new(field, n, k)?);
                continue;
            }
            let (_, n, _) = header.unwrap();
            let fam_ref = fam.as_mut().unwrap();
            let sub = Subspace::decode(fam_ref.field, n, line)?;
            if !fam_ref.insert(sub)? {
                return Err(FamilyError::DuplicateMember {
                    line: Some(lineno + 1),
                });
            }
        }
        fam.ok_or_else(|| FamilyError::Parse("missing header line".into()))
    }

    pub fn write_to_path(&self, path: &std::path::Path) -> Result<(), FamilyError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)
    }

    pub fn read_from_path(path: &std::path::Path) -> Result<Family, FamilyError> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Family::read(f)
    }
}

/// All d-dimensional subspaces T with `anchor ⊆ T ⊆ within`.
fn extensions_within(
    anchor: &Subspace,
    within: &Subspace,
    d: usize,
) -> Result<Vec<Subspace>, FamilyError> {
    let t = anchor.dim();
    if d < t {
        return Ok(Vec::new());
    }
    if !within.contains(anchor)? {
        return Ok(Vec::new());
    }
    if d == t {
        return Ok(vec![anchor.clone()]);
    }
    let extra = d - t;
    let quotient_dim = within.dim() - t;
    if extra > quotient_dim {
        return Ok(Vec::new());
    }
    // basis of `within` extending the anchor: anchor rows plus the rows of
    // `within` that survive reduction against the anchor
    let field = anchor.field();
    let n = anchor.ambient_dim();
    let mut complement_rows: Vec<Vec<u8>> = Vec::with_capacity(quotient_dim);
    let mut acc = anchor.clone();
    for row in within.basis_rows() {
        if !acc.contains_vector(&row) {
            complement_rows.push(row.clone());
            acc = acc.span_with_vectors(&[row])?;
        }
    }
    debug_assert_eq!(complement_rows.len(), quotient_dim);

    let mut out = Vec::new();
    for abstract_sub in enumerate_subspaces(field, quotient_dim, extra)? {
        let lifted: Vec<Vec<u8>> = abstract_sub
            .basis_rows()
            .iter()
            .map(|coeffs| {
                let mut v = vec![0u8; n];
                for (c, row) in coeffs.iter().zip(&complement_rows) {
                    if *c != 0 {
                        for (vi, &ri) in v.iter_mut().zip(row) {
                            *vi = field.add(*vi, field.mul(*c, ri));
                        }
                    }
                }
                v
            })
            .collect();
        out.push(anchor.span_with_vectors(&lifted)?);
    }
    Ok(out)
}

/// Number of k-subspaces F with `dim(F ∩ X) = l` for an i-dimensional X in
/// `F_q^n`: `q^{(i-l)(k-l)} [i, l] [n-i, k-l]`.
pub fn intersection_count(n: usize, k: usize, q: u32, i: usize, l: usize) -> BigCount {
    let (n, k, i, l) = (n as i64, k as i64, i as i64, l as i64);
    q_pow(q, ((i - l) * (k - l)) as u64) * gauss_binom(i, l, q) * gauss_binom(n - i, k - l, q)
}

/// Closed-form size of `F_{X,k}` for dim X = i: the sum of
/// [`intersection_count`] over l ≥ i − 1.
pub fn f_x_k_size(n: usize, k: usize, q: u32, dim_x: usize) -> BigCount {
    ((dim_x - 1)..=dim_x.min(k))
        .map(|l| intersection_count(n, k, q, dim_x, l))
        .sum()
}

/// `F_{X,k}`: all k-subspaces F with `dim(F ∩ X) ≥ dim X − 1`. The member
/// count is asserted against the closed-form census.
pub fn build_f_x_k(x: &Subspace, k: usize) -> Result<Family, FamilyError> {
    build_f_family(x, k, false)
}

/// `F*_{X,k}`: the sub-family with `dim(F ∩ X) = dim X − 1` exactly.
pub fn build_f_star_x_k(x: &Subspace, k: usize) -> Result<Family, FamilyError> {
    build_f_family(x, k, true)
}

fn build_f_family(x: &Subspace, k: usize, star: bool) -> Result<Family, FamilyError> {
    let dim_x = x.dim();
    let n = x.ambient_dim();
    if dim_x == 0 || dim_x > k + 1 || k > n {
        return Err(FamilyError::InvalidDimension(format!(
            "need 1 <= dim X <= k+1 <= n+1, got dim X = {dim_x}, k = {k}, n = {n}"
        )));
    }
    let mut fam = Family::new(x.field(), n, k)?;
    for cand in enumerate_subspaces(x.field(), n, k)? {
        let l = cand.intersection_dim(x)?;
        let keep = if star { l == dim_x - 1 } else { l >= dim_x - 1 };
        if keep {
            fam.insert(cand)?;
        }
    }
    let expected = if star {
        intersection_count(n, k, x.field().q(), dim_x, dim_x - 1)
    } else {
        f_x_k_size(n, k, x.field().q(), dim_x)
    };
    assert_eq!(
        BigCount::from(fam.len() as u64),
        expected,
        "family census disagrees with the closed-form count"
    );
    Ok(fam)
}

/// Pairwise intersection level implied by r-wise t-intersecting with
/// covering number l: `(r-2)(l-t) + t`.
pub fn derived_intersection_level(r: i64, l: i64, t: i64) -> i64 {
    debug_assert!(r >= 2 && l >= t);
    (r - 2) * (l - t) + t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::enumerate_subspaces;

    fn f2() -> Field {
        Field::new(2).unwrap()
    }

    fn all_k(n: usize, k: usize) -> Family {
        Family::from_members(f2(), n, k, enumerate_subspaces(f2(), n, k).unwrap()).unwrap()
    }

    fn coord(n: usize, d: usize) -> Subspace {
        Subspace::coordinate(f2(), n, &(0..d).collect::<Vec<_>>())
    }

    #[test]
    fn trivial_family_is_r_wise_intersecting_for_all_r() {
        // all planes of F_2^4 through a fixed line
        let t_sub = coord(4, 1);
        let mut fam = Family::new(f2(), 4, 2).unwrap();
        for s in enumerate_subspaces(f2(), 4, 2).unwrap() {
            if s.contains(&t_sub).unwrap() {
                fam.insert(s).unwrap();
            }
        }
        assert_eq!(fam.len(), 7);
        for r in 2..=5 {
            assert!(fam.is_r_wise_t_intersecting(r, 1));
        }
    }

    #[test]
    fn planes_of_f2_3_pairwise_intersect_but_planes_of_f2_4_do_not() {
        let planes3 = all_k(3, 2);
        assert!(planes3.is_r_wise_t_intersecting(2, 1));
        // oracle: every pair of distinct planes of a 3-space meets in a line
        for a in planes3.iter() {
            for b in planes3.iter() {
                assert!(a.intersection_dim(b).unwrap() >= 1);
            }
        }
        let planes4 = all_k(4, 2);
        assert!(!planes4.is_r_wise_t_intersecting(2, 1));
    }

    #[test]
    fn vacuous_truth_below_r_members() {
        let mut fam = Family::new(f2(), 4, 2).unwrap();
        fam.insert(coord(4, 2)).unwrap();
        fam.insert(Subspace::coordinate(f2(), 4, &[2, 3])).unwrap();
        // the two members are disjoint, but r=3 has no 3-subsets
        assert_eq!(fam.member(0).intersection_dim(fam.member(1)).unwrap(), 0);
        assert!(fam.is_r_wise_t_intersecting(3, 1));
        assert!(!fam.is_r_wise_t_intersecting(2, 1));
    }

    #[test]
    fn full_space_covers_everything() {
        let fam = all_k(3, 2);
        let v = Subspace::full(f2(), 3);
        assert!(fam.is_t_cover(&v, 1).unwrap());
        assert!(fam.is_t_cover(&v, 2).unwrap());
    }

    #[test]
    fn covering_number_of_trivial_family_is_t() {
        let t_sub = coord(4, 1);
        let mut fam = Family::new(f2(), 4, 2).unwrap();
        for s in enumerate_subspaces(f2(), 4, 2).unwrap() {
            if s.contains(&t_sub).unwrap() {
                fam.insert(s).unwrap();
            }
        }
        let report = fam.covering_number(1).unwrap();
        assert_eq!(report.tau, 1);
        assert!(report.covers.contains(&t_sub));
        assert!(fam.is_trivial(1).unwrap());
    }

    #[test]
    fn covering_number_of_all_planes_of_f2_3() {
        let fam = all_k(3, 2);
        let report = fam.covering_number(1).unwrap();
        assert_eq!(report.tau, 2);
        assert_eq!(report.covers.len(), 7, "every plane is a minimum 1-cover");
        assert!(!fam.is_trivial(1).unwrap());
    }

    #[test]
    fn pruned_and_exhaustive_cover_searches_agree() {
        let fam = all_k(3, 2);
        assert_eq!(
            fam.covering_number(1).unwrap(),
            fam.covering_number_exhaustive(1).unwrap()
        );
        let x = coord(4, 3);
        let fxk = build_f_x_k(&x, 2).unwrap();
        assert_eq!(
            fxk.covering_number(1).unwrap(),
            fxk.covering_number_exhaustive(1).unwrap()
        );
    }

    #[test]
    fn empty_family_cover_search_errors() {
        let fam = Family::new(f2(), 3, 2).unwrap();
        assert!(matches!(
            fam.covering_number(1),
            Err(FamilyError::EmptyFamily)
        ));
    }

    #[test]
    fn f_x_k_census_at_n6_k3() {
        let x = coord(6, 3);
        let fam = build_f_x_k(&x, 3).unwrap();
        let star = build_f_star_x_k(&x, 3).unwrap();
        assert_eq!(fam.len(), 99);
        assert_eq!(star.len(), 98);
        // F \ F* is exactly the members containing X
        for m in fam.iter() {
            let in_star = star.contains_member(m);
            let contains_x = m.contains(&x).unwrap();
            assert_eq!(in_star, !contains_x);
        }
    }

    #[test]
    fn f_x_k_with_full_ambient_x_is_everything() {
        let x = Subspace::full(f2(), 4);
        let fam = build_f_x_k(&x, 3).unwrap();
        assert_eq!(fam.len(), 15); // all 3-subspaces of F_2^4
    }

    #[test]
    fn f_x_k_cover_structure_at_n6() {
        let x = coord(6, 3);
        let fam = build_f_x_k(&x, 3).unwrap();
        let report = fam.covering_number(1).unwrap();
        assert_eq!(report.tau, 2);
        // every 2-subspace of X is a minimum 1-cover
        assert!(fam.is_cover_complete_with(&x, 1, &report).unwrap());
        // a (t+1)-subspace meeting X in dimension 0 cannot cover F*
        let star = build_f_star_x_k(&x, 3).unwrap();
        let z = Subspace::coordinate(f2(), 6, &[3, 4]);
        assert_eq!(z.intersection_dim(&x).unwrap(), 0);
        assert!(!star.is_t_cover(&z, 1).unwrap());
    }

    #[test]
    fn single_cover_subspace_is_cover_complete() {
        // dim X = t+1 and X a minimum cover: completeness reduces to X itself
        let fam = all_k(3, 2);
        let report = fam.covering_number(1).unwrap();
        assert_eq!(report.tau, 2);
        for x in report.covers.iter() {
            assert!(fam.is_cover_complete_with(x, 1, &report).unwrap());
        }
    }

    #[test]
    fn subspace_outside_x_is_not_cover_complete_for_the_star_family() {
        let x = coord(6, 3);
        let star = build_f_star_x_k(&x, 3).unwrap();
        let z = Subspace::coordinate(f2(), 6, &[3, 4]);
        assert_eq!(z.intersection_dim(&x).unwrap(), 0);
        assert!(!star.is_cover_complete(&z, 1).unwrap());
    }

    #[test]
    fn cover_completeness_implies_members_meet_x_in_codimension_one() {
        let x = coord(6, 3);
        let fam = build_f_x_k(&x, 3).unwrap();
        assert!(fam.is_cover_complete(&x, 1).unwrap());
        for m in fam.iter() {
            assert!(m.intersection_dim(&x).unwrap() >= x.dim() - 1);
        }
    }

    #[test]
    fn any_plane_inside_x_covers_f_x_k() {
        // oracle: for Z ⊆ X, dim(Z∩F) ≥ dim Z + dim(F∩X) − dim X by the
        // modular inequality inside X; both routes must agree
        let x = coord(6, 3);
        let fam = build_f_x_k(&x, 3).unwrap();
        for z in subspaces_of(&x, 2).unwrap() {
            for f in fam.iter() {
                let lower =
                    (z.dim() + f.intersection_dim(&x).unwrap()).saturating_sub(x.dim());
                assert!(z.intersection_dim(f).unwrap() >= lower);
                assert!(lower >= 1);
            }
            assert!(fam.is_t_cover(&z, 1).unwrap());
        }
    }

    #[test]
    fn derived_levels() {
        assert_eq!(derived_intersection_level(2, 5, 1), 1);
        assert_eq!(derived_intersection_level(3, 2, 1), 2);
        assert_eq!(derived_intersection_level(4, 3, 1), 5);
    }

    #[test]
    fn maximality_of_all_planes_of_f2_3() {
        let fam = all_k(3, 2);
        assert!(fam.is_maximal_r_wise_t_intersecting(2, 1).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let x = coord(4, 3);
        let fam = build_f_x_k(&x, 2).unwrap();
        let mut buf = Vec::new();
        fam.write(&mut buf).unwrap();
        let back = Family::read(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.len(), fam.len());
        for (a, b) in fam.iter().zip(back.iter()) {
            assert_eq!(a, b);
        }
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again, "file bytes are stable through a round trip");
    }

    #[test]
    fn file_rejects_duplicates_and_bad_headers() {
        let text = "q=2 n=3 k=2\n1,0,0;0,1,0\n1,0,0;0,1,0\n";
        assert!(matches!(
            Family::read(std::io::Cursor::new(text)),
            Err(FamilyError::DuplicateMember { line: Some(3) })
        ));
        let text = "n=3 k=2\n";
        assert!(matches!(
            Family::read(std::io::Cursor::new(text)),
            Err(FamilyError::Parse(_))
        ));
    }

    #[test]
    fn gl_action_preserves_predicates() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = coord(4, 3);
        let fam = build_f_x_k(&x, 2).unwrap();
        let tau_before = fam.covering_number(1).unwrap().tau;
        for _ in 0..5 {
            let m = crate::subspace::random_invertible_matrix(f2(), 4, &mut rng);
            let mapped = fam.image_under(&m).unwrap();
            let x_mapped = x.image_under(&m).unwrap();
            assert_eq!(mapped.len(), fam.len());
            assert_eq!(
                fam.is_r_wise_t_intersecting(2, 1),
                mapped.is_r_wise_t_intersecting(2, 1)
            );
            assert_eq!(mapped.covering_number(1).unwrap().tau, tau_before);
            assert_eq!(
                fam.is_cover_complete(&x, 1).unwrap(),
                mapped.is_cover_complete(&x_mapped, 1).unwrap()
            );
        }
    }
}
