//! Simplex predicates and exact simplex counting.
//!
//! An (r+1, t)-simplex is a set of r+1 distinct k-subspaces every r of which
//! intersect in dimension ≥ t while the full (r+1)-wise intersection has
//! dimension < t (the r = 2, t = 1 case is a triangle). `n_trk_exact` is the
//! simplex count of the family `F_{X,k}` built from a (t+r)-dimensional X —
//! the extremal value the bound chains compare against.
//!
//! Counting enumerates unordered member combinations in family order with a
//! running intersection, pruning a prefix only when the count cannot change:
//! a prefix of at most r members whose intersection already dropped below t
//! is contained in some r-subset of every completion, so no completion is a
//! simplex. Partitioning by first-member index makes the parallel count a
//! fixed-order sum of per-partition exact counts, identical for any worker
//! count.

use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::family::{build_f_star_x_k, build_f_x_k, Family, FamilyError};
use crate::gfq::{Field, FieldError};
use crate::qbinom::{factorial, gauss_binom_ratio, q_pow, BigCount, BigRatio};
use crate::subspace::{subspaces_of, Subspace, SubspaceError};

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("members of a simplex must be distinct")]
    DuplicateMember,
    #[error("family is not {r}-wise {t}-intersecting (pass the waiver to count anyway)")]
    NotIntersecting { r: usize, t: usize },
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("infeasible scale: {what} = {estimate} exceeds limit {limit} (raise the guard limit to override)")]
    InfeasibleScale {
        what: &'static str,
        estimate: u64,
        limit: u64,
    },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Scale guard for the enumeration-heavy operations; `factor` scales every
/// built-in limit.
#[derive(Copy, Clone, Debug)]
pub struct Guard {
    pub factor: u64,
}

impl Default for Guard {
    fn default() -> Self {
        Guard { factor: 1 }
    }
}

impl Guard {
    pub fn check(&self, what: &'static str, estimate: u64, base_limit: u64) -> Result<(), SimplexError> {
        let limit = base_limit.saturating_mul(self.factor);
        if estimate > limit {
            return Err(SimplexError::InfeasibleScale {
                what,
                estimate,
                limit,
            });
        }
        Ok(())
    }
}

/// Exact simplex count plus enumeration statistics.
#[derive(Clone, Debug)]
pub struct SimplexCount {
    pub count: BigCount,
    pub subsets_visited: u64,
    pub pruned: u64,
}

/// True iff the r+1 distinct members form an (r+1, t)-simplex: every
/// r-subset intersects in dimension ≥ t and the full intersection has
/// dimension < t.
pub fn is_simplex(members: &[&Subspace], r: usize, t: usize) -> Result<bool, SimplexError> {
    validate_rt(r, t)?;
    if members.len() != r + 1 {
        return Err(SimplexError::InvalidDimension(format!(
            "expected r+1 = {} members, got {}",
            r + 1,
            members.len()
        )));
    }
    if members.windows(2).any(|w| w[0].dim() != w[1].dim()) {
        return Err(SimplexError::InvalidDimension(
            "members must be uniform in dimension".into(),
        ));
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if members[i] == members[j] {
                return Err(SimplexError::DuplicateMember);
            }
        }
    }
    let mut full_inter = members[0].clone();
    for s in &members[1..] {
        full_inter = full_inter.intersect(s)?;
    }
    if full_inter.dim() >= t {
        return Ok(false);
    }
    Ok(all_leave_one_out_intersecting(members, t))
}

fn validate_rt(r: usize, t: usize) -> Result<(), SimplexError> {
    if r < 2 {
        return Err(SimplexError::InvalidDimension("r must be at least 2".into()));
    }
    if t < 1 {
        return Err(SimplexError::InvalidDimension("t must be at least 1".into()));
    }
    Ok(())
}

/// Counts the unordered (r+1)-subsets of the family that form a simplex.
///
/// The family must be r-wise t-intersecting (the definition presupposes it);
/// pass `waive_intersecting_check` to count over an arbitrary family.
pub fn count_simplices(family: &Family, r: usize, t: usize) -> Result<SimplexCount, SimplexError> {
    count_simplices_opts(family, r, t, false)
}

pub fn count_simplices_opts(
    family: &Family,
    r: usize,
    t: usize,
    waive_intersecting_check: bool,
) -> Result<SimplexCount, SimplexError> {
    validate_rt(r, t)?;
    let verified = if waive_intersecting_check {
        // r-subsets are no longer implied by a family-wide property, so each
        // candidate subset gets the full leave-one-out test at the leaf
        family.is_r_wise_t_intersecting(r, t)
    } else if family.is_r_wise_t_intersecting(r, t) {
        true
    } else {
        return Err(SimplexError::NotIntersecting { r, t });
    };
    let parts: Vec<(BigCount, u64, u64)> = (0..family.len())
        .into_par_iter()
        .map(|first| {
            let mut local = PartCount::default();
            let mut walk = Walk {
                family,
                t,
                verified,
                chosen: vec![first],
                incidence: None,
            };
            walk.descend(family.member(first), first + 1, r, &mut local);
            (BigCount::from(local.count), local.visited, local.pruned)
        })
        .collect();
    let mut total = SimplexCount {
        count: BigCount::from(0u32),
        subsets_visited: 0,
        pruned: 0,
    };
    for (c, v, p) in parts {
        total.count += c;
        total.subsets_visited += v;
        total.pruned += p;
    }
    debug_assert!(total.count <= binom(family.len() as u64, (r + 1) as u64));
    Ok(total)
}

/// Sequential count that also reports, per member, how many simplices it
/// participates in (so deleting member i removes exactly `incidence[i]`
/// simplices).
pub fn count_simplices_with_incidence(
    family: &Family,
    r: usize,
    t: usize,
) -> Result<(SimplexCount, Vec<u64>), SimplexError> {
    validate_rt(r, t)?;
    if !family.is_r_wise_t_intersecting(r, t) {
        return Err(SimplexError::NotIntersecting { r, t });
    }
    let mut incidence = vec![0u64; family.len()];
    let mut local = PartCount::default();
    for first in 0..family.len() {
        let mut walk = Walk {
            family,
            t,
            verified: true,
            chosen: vec![first],
            incidence: Some(&mut incidence),
        };
        walk.descend(family.member(first), first + 1, r, &mut local);
    }
    Ok((
        SimplexCount {
            count: BigCount::from(local.count),
            subsets_visited: local.visited,
            pruned: local.pruned,
        },
        incidence,
    ))
}

#[derive(Default)]
struct PartCount {
    count: u64,
    visited: u64,
    pruned: u64,
}

struct Walk<'a> {
    family: &'a Family,
    t: usize,
    verified: bool,
    chosen: Vec<usize>,
    incidence: Option<&'a mut Vec<u64>>,
}

impl Walk<'_> {
    /// Extends the current prefix by `remaining` more members in family
    /// order. `inter` is the intersection of the chosen prefix.
    fn descend(&mut self, inter: &Subspace, start: usize, remaining: usize, out: &mut PartCount) {
        // A too-small intersection over at most r chosen members kills every
        // completion: some r-subset of any completion goes through this
        // prefix.
        if inter.dim() < self.t {
            out.pruned += 1;
            return;
        }
        for i in start..self.family.len() {
            if self.family.len() - i < remaining {
                break;
            }
            let next = inter
                .intersect(self.family.member(i))
                .expect("members share an ambient space");
            if remaining == 1 {
                out.visited += 1;
                if next.dim() < self.t && (self.verified || self.leaf_is_simplex(i)) {
                    out.count += 1;
                    if let Some(incidence) = self.incidence.as_mut() {
                        for &c in &self.chosen {
                            incidence[c] += 1;
                        }
                        incidence[i] += 1;
                    }
                }
            } else {
                self.chosen.push(i);
                self.descend(&next, i + 1, remaining - 1, out);
                self.chosen.pop();
            }
        }
    }

    /// Leave-one-out check for unverified families: every r-subset of the
    /// chosen members plus `last` must intersect in dimension >= t.
    fn leaf_is_simplex(&self, last: usize) -> bool {
        let members: Vec<&Subspace> = self
            .chosen
            .iter()
            .chain(std::iter::once(&last))
            .map(|&i| self.family.member(i))
            .collect();
        all_leave_one_out_intersecting(&members, self.t)
    }
}

fn all_leave_one_out_intersecting(members: &[&Subspace], t: usize) -> bool {
    let m = members.len();
    let full = Subspace::full(members[0].field(), members[0].ambient_dim());
    let mut prefix: Vec<Subspace> = Vec::with_capacity(m + 1);
    prefix.push(full.clone());
    for s in members {
        let next = prefix.last().unwrap().intersect(s).expect("same ambient");
        prefix.push(next);
    }
    let mut suffix: Vec<Subspace> = vec![full; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].intersect(members[i]).expect("same ambient");
    }
    (0..m).all(|leave_out| {
        prefix[leave_out]
            .intersect(&suffix[leave_out + 1])
            .expect("same ambient")
            .dim()
            >= t
    })
}

fn binom(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigCount::from(0u32);
    }
    let mut acc = BigCount::one();
    for i in 0..k {
        acc = acc * BigCount::from(n - i) / BigCount::from(i + 1);
    }
    acc
}

/// Exact simplex count of `F_{X,k}` for the canonical coordinate
/// (t+r)-subspace X of `F_q^n`. By change-of-basis invariance the value
/// depends only on (n, k, q, r, t).
pub fn n_trk_exact(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
) -> Result<SimplexCount, SimplexError> {
    validate_rt(r, t)?;
    if r + t > n {
        return Err(SimplexError::InvalidDimension(format!(
            "r+t = {} exceeds ambient dimension {n}",
            r + t
        )));
    }
    if k + 1 < r + t {
        return Err(SimplexError::InvalidDimension(format!(
            "k = {k} must be at least r+t-1 = {}",
            r + t - 1
        )));
    }
    if k > n {
        return Err(SimplexError::InvalidDimension(format!(
            "k = {k} exceeds ambient dimension {n}"
        )));
    }
    let field = Field::new(q)?;
    let x = Subspace::coordinate(field, n, &(0..r + t).collect::<Vec<_>>());
    let fam = build_f_x_k(&x, k)?;
    count_simplices(&fam, r, t)
}

/// Closed-form lower bound on the extremal simplex count, valid for n > 2k:
///
/// `(1 / (2 (r+1)!)) · q^{r(k-r-t+1) + r(r+1)/2} · [n-r-t, k-r-t+1]^{r+1}
///  · prod_{i=0}^{r} [t+i, t+i-1]`
pub fn n_trk_lower_bound(
    n: usize,
    k: usize,
    q: u32,
    r: usize,
    t: usize,
) -> Result<BigRatio, SimplexError> {
    if n <= 2 * k {
        return Err(SimplexError::RangeViolation(format!(
            "n = {n} must exceed 2k = {}",
            2 * k
        )));
    }
    validate_rt(r, t)?;
    if k + 1 < r + t {
        return Err(SimplexError::InvalidDimension(format!(
            "k = {k} must be at least r+t-1 = {}",
            r + t - 1
        )));
    }
    Ok(n_trk_lower_bound_unchecked(n, k, q, r, t))
}

/// The same closed form without the n > 2k hypothesis, for diagnostic
/// comparisons.
pub(crate) fn n_trk_lower_bound_unchecked(
    n: usize,
    k: usize,
    q: u32,
    r: usize,
    t: usize,
) -> BigRatio {
    let (n, k, r, t) = (n as i64, k as i64, r as i64, t as i64);
    let exp = (r * (k - r - t + 1) + r * (r + 1) / 2) as u64;
    let mut acc = BigRatio::from_integer(q_pow(q, exp).into());
    let base = gauss_binom_ratio(n - r - t, k - r - t + 1, q);
    for _ in 0..=r {
        acc *= base.clone();
    }
    for i in 0..=r {
        acc *= gauss_binom_ratio(t + i, t + i - 1, q);
    }
    acc / BigRatio::from_integer(
        (BigCount::from(2u32) * factorial((r + 1) as u64)).into(),
    )
}

/// Polynomial lower bound on `log_q` of the extremal count:
/// `(r+1)(k-r-t+1)n - (k+1)(r+1)(k-r-t+1) + r(k+1) - r^2`. `q` to this power
/// sits below [`n_trk_lower_bound`].
pub fn n_trk_log_lower_bound(n: i64, k: i64, r: i64, t: i64) -> i64 {
    (r + 1) * (k - r - t + 1) * n - (k + 1) * (r + 1) * (k - r - t + 1) + r * (k + 1) - r * r
}

/// Exact census of the sequence-assembly construction behind the lower
/// bound, at enumerable scale.
#[derive(Clone, Debug)]
pub struct StepCounts {
    /// ordered (r+1)-tuples of hyperplanes of X with intersection dim t-1
    pub f_exact: BigCount,
    /// `q^{r(r+1)/2} · prod [t+i, t+i-1]`
    pub f_bound: BigCount,
    pub f_bound_holds: bool,
    /// ordered (r+1)-tuples over [Y, k-t-r+1] with zero intersection
    pub g_exact: BigCount,
    /// `[n-r-t, k-r-t+1]^{r+1} / 2`
    pub g_bound: BigRatio,
    pub g_bound_holds: bool,
    /// common fiber size of the projection over F*_{X,k}: q^{k-r-t+1}
    pub fiber_size: BigCount,
    pub fibers_uniform: bool,
    /// `(q^{k-r-t+1})^r`
    pub h_exact: BigCount,
    /// `f_exact · g_exact · h_exact / (r+1)!`
    pub assembled: BigRatio,
    pub n_exact: BigCount,
    pub assembled_holds: bool,
    /// sampled assemblies verified to be simplices
    pub assemblies_checked: u64,
    pub assemblies_are_simplices: bool,
}

/// Exhaustively verifies the construction that yields the lower bound, at
/// the given parameters:
///
/// - counts the hyperplane tuples (f) and checks the product bound,
/// - counts the zero-intersection tuples over the complement (g) and checks
///   the half-power bound,
/// - checks that the projection fibers over `F*_{X,k}` all have size
///   `q^{k-r-t+1}`,
/// - checks `f·g·h/(r+1)! ≤ n_trk_exact`, and
/// - assembles sampled tuples into member sequences and verifies each is a
///   simplex.
pub fn lemma23_step_counts(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    guard: Guard,
) -> Result<StepCounts, SimplexError> {
    validate_rt(r, t)?;
    if r + t > n || k + 1 < r + t || k > n || k < t + r - 1 {
        return Err(SimplexError::InvalidDimension(format!(
            "need r+t <= n, k >= r+t-1, k <= n; got n={n}, k={k}, r={r}, t={t}"
        )));
    }
    if k + 1 - t - r > n - r - t {
        return Err(SimplexError::InvalidDimension(format!(
            "complement dimension {} cannot host {}-subspaces",
            n - r - t,
            k + 1 - t - r
        )));
    }
    let field = Field::new(q)?;
    let x = Subspace::coordinate(field, n, &(0..r + t).collect::<Vec<_>>());
    let y = x.complement();

    let x_hyperplanes = subspaces_of(&x, r + t - 1)?;
    let y_pieces = subspaces_of(&y, k + 1 - t - r)?;
    let tuple_budget = |m: usize| (m as u64).saturating_pow((r + 1) as u32);
    guard.check("hyperplane tuples", tuple_budget(x_hyperplanes.len()), 100_000_000)?;
    guard.check("complement tuples", tuple_budget(y_pieces.len()), 100_000_000)?;

    let f_exact = count_tuples_with_final_dim(&x_hyperplanes, r + 1, t - 1, field, n);
    let mut f_bound = q_pow(q, (r * (r + 1) / 2) as u64);
    for i in 0..=r as i64 {
        f_bound *= crate::qbinom::gauss_binom(t as i64 + i, t as i64 + i - 1, q);
    }
    let f_bound_holds = f_exact >= f_bound;

    let g_exact = count_tuples_with_final_dim(&y_pieces, r + 1, 0, field, n);
    let g_bound = {
        let base = gauss_binom_ratio((n - r - t) as i64, (k + 1 - r - t) as i64, q);
        let mut acc = BigRatio::one();
        for _ in 0..=r {
            acc *= base.clone();
        }
        acc / BigRatio::from_integer(2.into())
    };
    let g_bound_holds = BigRatio::from_integer(g_exact.clone().into()) >= g_bound;

    // projection fibers over F*_{X,k}
    let star = build_f_star_x_k(&x, k)?;
    guard.check("star family size", star.len() as u64, 10_000_000)?;
    let mut fibers: std::collections::HashMap<(Subspace, Subspace), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, member) in star.iter().enumerate() {
        let (fx, fy) = member.project(&x, &y)?;
        fibers.entry((fx, fy)).or_default().push(i);
    }
    let fiber_size = q_pow(q, (k + 1 - r - t) as u64);
    let expected_pairs = x_hyperplanes.len() * y_pieces.len();
    let fibers_uniform = fibers.len() == expected_pairs
        && fibers
            .values()
            .all(|v| BigCount::from(v.len() as u64) == fiber_size);
    let h_exact = fiber_size.clone().pow(r as u32);

    let n_exact = n_trk_exact(q, n, k, r, t)?.count;
    let assembled = BigRatio::from_integer((f_exact.clone() * &g_exact * &h_exact).into())
        / BigRatio::from_integer(factorial((r + 1) as u64).into());
    let assembled_holds = assembled <= BigRatio::from_integer(n_exact.clone().into());

    // assemble a handful of qualifying tuple pairs and check each is a simplex
    let g_tuples = collect_tuples_with_final_dim(&x_hyperplanes, r + 1, t - 1, field, n, 3);
    let h_tuples = collect_tuples_with_final_dim(&y_pieces, r + 1, 0, field, n, 3);
    let mut assemblies_checked = 0u64;
    let mut assemblies_are_simplices = true;
    for gt in &g_tuples {
        for ht in &h_tuples {
            let mut members: Vec<&Subspace> = Vec::with_capacity(r + 1);
            for (gi, hi) in gt.iter().zip(ht) {
                let key = (x_hyperplanes[*gi].clone(), y_pieces[*hi].clone());
                let fiber = fibers.get(&key).expect("fiber exists when uniform");
                members.push(star.member(fiber[0]));
            }
            assemblies_checked += 1;
            if !is_simplex(&members, r, t)? {
                assemblies_are_simplices = false;
            }
        }
    }

    Ok(StepCounts {
        f_exact,
        f_bound,
        f_bound_holds,
        g_exact,
        g_bound,
        g_bound_holds,
        fiber_size,
        fibers_uniform,
        h_exact,
        assembled,
        n_exact,
        assembled_holds,
        assemblies_checked,
        assemblies_are_simplices,
    })
}

/// Number of ordered `len`-tuples over `pool` whose running intersection
/// ends at exactly `target` dimension. Repeats are allowed; a prefix below
/// `target` can never recover and is cut, a prefix at dimension 0 is
/// absorbed combinatorially when the target is 0.
fn count_tuples_with_final_dim(
    pool: &[Subspace],
    len: usize,
    target: usize,
    field: Field,
    n: usize,
) -> BigCount {
    let full = Subspace::full(field, n);
    let mut total = BigCount::from(0u32);
    let mut sink: TupleSink = None;
    tuple_dfs(pool, len, target, &full, 0, &mut total, &mut sink);
    total
}

/// In-progress tuple, collected tuples, and the collection cap.
type TupleSink = Option<(Vec<usize>, Vec<Vec<usize>>, usize)>;

/// First few qualifying tuples (as pool indices), in enumeration order.
fn collect_tuples_with_final_dim(
    pool: &[Subspace],
    len: usize,
    target: usize,
    field: Field,
    n: usize,
    limit: usize,
) -> Vec<Vec<usize>> {
    let full = Subspace::full(field, n);
    let mut total = BigCount::from(0u32);
    let mut sink: TupleSink = Some((Vec::new(), Vec::new(), limit));
    tuple_dfs(pool, len, target, &full, 0, &mut total, &mut sink);
    sink.unwrap().1
}

fn tuple_dfs(
    pool: &[Subspace],
    len: usize,
    target: usize,
    inter: &Subspace,
    depth: usize,
    total: &mut BigCount,
    sink: &mut TupleSink,
) {
    if depth == len {
        if inter.dim() == target {
            *total += BigCount::one();
            if let Some((cur, found, limit)) = sink.as_mut() {
                if found.len() < *limit {
                    found.push(cur.clone());
                }
            }
        }
        return;
    }
    if inter.dim() < target {
        return;
    }
    // absorbing state: once the intersection hits 0 with target 0, every
    // completion qualifies
    if target == 0 && inter.dim() == 0 && sink.is_none() {
        let remaining = (len - depth) as u32;
        *total += BigCount::from(pool.len() as u64).pow(remaining);
        return;
    }
    for (i, s) in pool.iter().enumerate() {
        let next = inter.intersect(s).expect("same ambient");
        if let Some((cur, _, _)) = sink.as_mut() {
            cur.push(i);
        }
        tuple_dfs(pool, len, target, &next, depth + 1, total, sink);
        if let Some((cur, _, _)) = sink.as_mut() {
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::build_f_x_k;
    use crate::subspace::enumerate_subspaces;
    use itertools::Itertools;
    use num_traits::ToPrimitive;

    fn f2() -> Field {
        Field::new(2).unwrap()
    }

    fn planes_of_f2_3() -> Family {
        Family::from_members(f2(), 3, 2, enumerate_subspaces(f2(), 3, 2).unwrap()).unwrap()
    }

    #[test]
    fn coordinate_triangle_is_a_simplex() {
        let a = Subspace::coordinate(f2(), 3, &[0, 1]);
        let b = Subspace::coordinate(f2(), 3, &[0, 2]);
        let c = Subspace::coordinate(f2(), 3, &[1, 2]);
        assert!(is_simplex(&[&a, &b, &c], 2, 1).unwrap());
    }

    #[test]
    fn members_of_a_trivial_family_never_form_a_simplex() {
        let line = Subspace::coordinate(f2(), 4, &[0]);
        let members: Vec<Subspace> = enumerate_subspaces(f2(), 4, 2)
            .unwrap()
            .filter(|s| s.contains(&line).unwrap())
            .collect();
        for triple in members.iter().combinations(3) {
            assert!(!is_simplex(&[triple[0], triple[1], triple[2]], 2, 1).unwrap());
        }
    }

    #[test]
    fn duplicates_are_rejected() {
        let a = Subspace::coordinate(f2(), 3, &[0, 1]);
        let b = Subspace::coordinate(f2(), 3, &[0, 2]);
        assert!(matches!(
            is_simplex(&[&a, &b, &a], 2, 1),
            Err(SimplexError::DuplicateMember)
        ));
    }

    #[test]
    fn simplex_predicate_agrees_with_direct_definition_on_all_triples() {
        // direct-definition oracle over all C(7,3) = 35 triples of planes
        let fam = planes_of_f2_3();
        let mut simplex_triples = 0;
        for triple in (0..fam.len()).combinations(3) {
            let (a, b, c) = (fam.member(triple[0]), fam.member(triple[1]), fam.member(triple[2]));
            let direct = a.intersection_dim(b).unwrap() >= 1
                && a.intersection_dim(c).unwrap() >= 1
                && b.intersection_dim(c).unwrap() >= 1
                && a.intersect(b).unwrap().intersection_dim(c).unwrap() < 1;
            assert_eq!(direct, is_simplex(&[a, b, c], 2, 1).unwrap());
            simplex_triples += direct as u64;
        }
        assert_eq!(simplex_triples, 28);
    }

    #[test]
    fn triangle_count_of_the_seven_planes() {
        let fam = planes_of_f2_3();
        let res = count_simplices(&fam, 2, 1).unwrap();
        assert_eq!(res.count.to_u64().unwrap(), 28);
        assert_eq!(res.subsets_visited, 35);
    }

    #[test]
    fn trivial_family_counts_zero() {
        let line = Subspace::coordinate(f2(), 4, &[0]);
        let fam = Family::from_members(
            f2(),
            4,
            2,
            enumerate_subspaces(f2(), 4, 2)
                .unwrap()
                .filter(|s| s.contains(&line).unwrap()),
        )
        .unwrap();
        let res = count_simplices(&fam, 2, 1).unwrap();
        assert_eq!(res.count.to_u64().unwrap(), 0);
    }

    #[test]
    fn non_intersecting_family_errors_unless_waived() {
        let fam = Family::from_members(f2(), 4, 2, enumerate_subspaces(f2(), 4, 2).unwrap())
            .unwrap();
        assert!(matches!(
            count_simplices(&fam, 2, 1),
            Err(SimplexError::NotIntersecting { r: 2, t: 1 })
        ));
        // waived count still works; value frozen from this enumeration
        let res = count_simplices_opts(&fam, 2, 1, true).unwrap();
        assert!(res.count > BigCount::from(0u32));
        assert!(res.pruned > 0, "disjoint pairs prune their subtrees");
    }

    #[test]
    fn count_is_invariant_under_change_of_basis() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let fam = planes_of_f2_3();
        let before = count_simplices(&fam, 2, 1).unwrap().count;
        for _ in 0..5 {
            let m = crate::subspace::random_invertible_matrix(f2(), 3, &mut rng);
            let mapped = fam.image_under(&m).unwrap();
            assert_eq!(count_simplices(&mapped, 2, 1).unwrap().count, before);
        }
    }

    #[test]
    fn ordered_sequences_are_a_factorial_multiple_of_unordered_counts() {
        let fam = planes_of_f2_3();
        let unordered = count_simplices(&fam, 2, 1).unwrap().count.to_u64().unwrap();
        let mut ordered = 0u64;
        for triple in (0..fam.len()).permutations(3) {
            let members: Vec<&Subspace> = triple.iter().map(|&i| fam.member(i)).collect();
            if is_simplex(&members, 2, 1).unwrap() {
                ordered += 1;
            }
        }
        assert_eq!(ordered, unordered * 6);
    }

    #[test]
    fn smallest_extremal_count_is_28() {
        let res = n_trk_exact(2, 3, 2, 2, 1).unwrap();
        assert_eq!(res.count.to_u64().unwrap(), 28);
    }

    #[test]
    fn smallest_extremal_count_over_gf3() {
        // 13 planes of F_3^3 pairwise meet in a line; 4 planes through each
        // of the 13 lines give 52 concurrent triples, so
        // C(13,3) - 13*C(4,3) = 286 - 52 = 234 triangles
        let res = n_trk_exact(3, 3, 2, 2, 1).unwrap();
        assert_eq!(res.count.to_u64().unwrap(), 234);
        assert_eq!(res.subsets_visited, 286);
    }

    #[test]
    fn mixed_dimension_members_are_rejected() {
        let a = Subspace::coordinate(f2(), 3, &[0, 1]);
        let b = Subspace::coordinate(f2(), 3, &[0, 2]);
        let c = Subspace::coordinate(f2(), 3, &[1]);
        assert!(matches!(
            is_simplex(&[&a, &b, &c], 2, 1),
            Err(SimplexError::InvalidDimension(_))
        ));
    }

    #[test]
    fn extremal_count_well_defined_under_choice_of_x() {
        // same count from a non-coordinate X, via a change of basis
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = Subspace::coordinate(f2(), 5, &[0, 1, 2]);
        let base = count_simplices(&build_f_x_k(&x, 2).unwrap(), 2, 1)
            .unwrap()
            .count;
        assert_eq!(base, n_trk_exact(2, 5, 2, 2, 1).unwrap().count);
        for _ in 0..3 {
            let m = crate::subspace::random_invertible_matrix(f2(), 5, &mut rng);
            let moved = x.image_under(&m).unwrap();
            let fam = build_f_x_k(&moved, 2).unwrap();
            assert_eq!(count_simplices(&fam, 2, 1).unwrap().count, base);
        }
    }

    #[test]
    fn lower_bound_requires_n_above_2k() {
        assert!(matches!(
            n_trk_lower_bound(6, 3, 2, 2, 1),
            Err(SimplexError::RangeViolation(_))
        ));
        assert!(n_trk_lower_bound(7, 3, 2, 2, 1).is_ok());
    }

    #[test]
    fn lower_bound_value_at_n7() {
        // (1/12) · 2^5 · [4,1]^3 · [1,0][2,1][3,2] = 32·3375·21/12 = 189000
        let b = n_trk_lower_bound(7, 3, 2, 2, 1).unwrap();
        assert_eq!(b, BigRatio::from_integer(189000.into()));
    }

    #[test]
    fn log_form_sits_below_the_closed_form() {
        use crate::qbinom::q_pow_signed;
        for (n, k, r, t) in [(7usize, 3usize, 2usize, 1usize), (5, 2, 2, 1), (7, 3, 3, 1), (9, 4, 2, 1)] {
            let lower = n_trk_lower_bound(n, k, 2, r, t).unwrap();
            let log_exp = n_trk_log_lower_bound(n as i64, k as i64, r as i64, t as i64);
            assert!(
                q_pow_signed(2, log_exp) <= lower,
                "log relaxation fails at n={n} k={k} r={r} t={t}"
            );
        }
    }

    #[test]
    fn guard_rejects_oversized_enumerations() {
        let err = lemma23_step_counts(2, 12, 6, 2, 1, Guard { factor: 0 }).unwrap_err();
        assert!(matches!(err, SimplexError::InfeasibleScale { .. }));
    }
}
