//! Desk-scale exploration of maximal r-wise t-intersecting families.
//!
//! For r = 2 the maximal families are exactly the maximal cliques of the
//! compatibility graph on all k-subspaces (edges join pairs meeting in
//! dimension ≥ t), listed here with Bron–Kerbosch over a degeneracy
//! ordering with max-degree pivoting. For r ≥ 3 there is no exhaustive
//! mode — hypergraph maximal listing blows up — only seeded greedy closure
//! sampling, and the report says so.
//!
//! Results are deterministic: vertices are indexed in enumeration order,
//! recursion order is fixed, sampling is driven by a seeded generator, and
//! witness lists are tie-broken by canonical family encoding.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::family::{build_f_star_x_k, Family, FamilyError};
use crate::gfq::{Field, FieldError};
use crate::qbinom::BigCount;
use crate::simplex::{count_simplices, n_trk_exact, Guard, SimplexError};
use crate::subspace::{enumerate_subspaces, Subspace, SubspaceError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("infeasible scale: {what} = {estimate} exceeds limit {limit} (raise the guard limit to override)")]
    InfeasibleScale {
        what: &'static str,
        estimate: u64,
        limit: u64,
    },
    #[error("exhaustive enumeration is only available for r = 2, got r = {0}")]
    ExhaustiveNeedsRTwo(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub const MAX_GRAPH_VERTICES: u64 = 2000;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Sampled,
}

/// Sandwich test outcome for one witness: whether
/// `F*_{X,k} ⊆ F ⊆ F_{X,k}` holds for some (r+t)-subspace X.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub holds: bool,
    pub x_encoding: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub mode: SearchMode,
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub r: usize,
    pub t: usize,
    pub families_examined: u64,
    pub best_count: BigCount,
    /// maximizing families, canonically ordered
    pub witnesses: Vec<Family>,
    pub witness_tau: Vec<usize>,
    pub sandwich: Vec<SandwichReport>,
    /// extremal reference value, when computable at these parameters
    pub ntrk_exact: Option<BigCount>,
}

struct Graph {
    adj: Vec<Vec<u64>>,
    blocks: usize,
    n: usize,
}

impl Graph {
    fn new(n: usize) -> Graph {
        let blocks = n.div_ceil(64);
        Graph {
            adj: vec![vec![0u64; blocks]; n],
            blocks,
            n,
        }
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a][b / 64] |= 1 << (b % 64);
        self.adj[b][a / 64] |= 1 << (a % 64);
    }

    fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|b| b.count_ones() as usize).sum()
    }

    fn neighbors_bits(&self, v: usize) -> &[u64] {
        &self.adj[v]
    }
}

#[derive(Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn empty(blocks: usize) -> BitSet {
        BitSet(vec![0u64; blocks])
    }
    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }
    fn remove(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }
    fn intersect_with(&self, other: &[u64]) -> BitSet {
        BitSet(self.0.iter().zip(other).map(|(a, b)| a & b).collect())
    }
    fn count_intersection(&self, other: &[u64]) -> usize {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let tz = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(i * 64 + tz)
                }
            })
        })
    }
}

fn compatibility_graph(
    vertices: &[Subspace],
    t: usize,
) -> Graph {
    let mut g = Graph::new(vertices.len());
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if vertices[i].intersection_dim(&vertices[j]).expect("same ambient") >= t {
                g.add_edge(i, j);
            }
        }
    }
    g
}

fn degeneracy_order(g: &Graph) -> Vec<usize> {
    let n = g.n;
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        removed[v] = true;
        order.push(v);
        for u in BitSet(g.neighbors_bits(v).to_vec()).iter() {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    order
}

fn bron_kerbosch_pivot(
    g: &Graph,
    r: &mut Vec<usize>,
    p: BitSet,
    x: BitSet,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        let mut clique = r.clone();
        clique.sort_unstable();
        out.push(clique);
        return;
    }
    // pivot on the vertex of P ∪ X with the most neighbors in P; only
    // P \ N(pivot) needs expanding, and its emptiness means no maximal
    // clique completes in this branch
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.count_intersection(g.neighbors_bits(u)), usize::MAX - u))
        .unwrap();
    let mut p = p;
    let mut x = x;
    let candidates: Vec<usize> = p
        .iter()
        .filter(|&v| g.adj[pivot][v / 64] >> (v % 64) & 1 == 0)
        .collect();
    for v in candidates {
        let nv = g.neighbors_bits(v);
        r.push(v);
        bron_kerbosch_pivot(g, r, p.intersect_with(nv), x.intersect_with(nv), out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// Every maximal t-intersecting family of k-subspaces (r = 2), as maximal
/// cliques of the compatibility graph, each family's members in enumeration
/// order. Guarded by the vertex count `[n, k]_q`.
pub fn enumerate_maximal_families_r2(
    q: u32,
    n: usize,
    k: usize,
    t: usize,
    guard: Guard,
) -> Result<Vec<Family>, SearchError> {
    let field = Field::new(q)?;
    if t == 0 || t > k {
        return Err(SearchError::InvalidParameter(format!(
            "t = {t} must satisfy 1 <= t <= k = {k}"
        )));
    }
    let vertex_count = crate::subspace::subspace_count(n, k, q)
        .to_u64()
        .unwrap_or(u64::MAX);
    let limit = MAX_GRAPH_VERTICES.saturating_mul(guard.factor);
    if vertex_count > limit {
        return Err(SearchError::InfeasibleScale {
            what: "compatibility graph vertices",
            estimate: vertex_count,
            limit,
        });
    }
    let vertices: Vec<Subspace> = enumerate_subspaces(field, n, k)?.collect();
    let g = compatibility_graph(&vertices, t);

    // degeneracy-ordered outer loop, pivoting inside
    let order = degeneracy_order(&g);
    let mut position = vec![0usize; vertices.len()];
    for (idx, &v) in order.iter().enumerate() {
        position[v] = idx;
    }
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        let nv = g.neighbors_bits(v);
        let mut p = BitSet::empty(g.blocks);
        let mut x = BitSet::empty(g.blocks);
        for u in BitSet(nv.to_vec()).iter() {
            if position[u] > position[v] {
                p.insert(u);
            } else {
                x.insert(u);
            }
        }
        let mut r = vec![v];
        bron_kerbosch_pivot(&g, &mut r, p, x, &mut cliques);
    }

    cliques
        .into_iter()
        .map(|clique| {
            Ok(Family::from_members(
                field,
                n,
                k,
                clique.into_iter().map(|v| vertices[v].clone()),
            )?)
        })
        .collect()
}

/// Greedy closure from `start`: repeatedly add a uniformly random admissible
/// k-subspace until none remains. The result is maximal by construction and
/// deterministic given the generator state.
pub fn greedy_closure(
    start: &Family,
    r: usize,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Family, SearchError> {
    let mut fam = start.clone();
    if r == 2 {
        // incremental candidate filtering: compatibility with each member
        let mut candidates: Vec<Subspace> =
            enumerate_subspaces(fam.field(), fam.ambient_dim(), fam.uniformity())?
                .filter(|c| {
                    !fam.contains_member(c)
                        && fam
                            .iter()
                            .all(|m| m.intersection_dim(c).expect("same ambient") >= t)
                })
                .collect();
        while !candidates.is_empty() {
            let pick = rng.gen_range(0..candidates.len());
            let chosen = candidates.swap_remove(pick);
            candidates.retain(|c| c.intersection_dim(&chosen).expect("same ambient") >= t);
            fam.insert(chosen)?;
        }
    } else {
        loop {
            let candidates = fam.extension_candidates(r, t)?;
            if candidates.is_empty() {
                break;
            }
            let pick = rng.gen_range(0..candidates.len());
            fam.insert(candidates[pick].clone())?;
        }
    }
    Ok(fam)
}

/// Stream of maximal families from seeded greedy closure (one per
/// iteration; repeats across iterations are possible).
pub fn sample_maximal_families(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    seed: u64,
    iterations: u64,
) -> Result<Vec<Family>, SearchError> {
    let field = Field::new(q)?;
    if r < 2 || t == 0 || t > k {
        return Err(SearchError::InvalidParameter(format!(
            "need r >= 2 and 1 <= t <= k, got r = {r}, t = {t}, k = {k}"
        )));
    }
    let vertices: Vec<Subspace> = enumerate_subspaces(field, n, k)?.collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(iterations as usize);
    for _ in 0..iterations {
        let start_idx = rng.gen_range(0..vertices.len());
        let start = Family::from_members(field, n, k, [vertices[start_idx].clone()])?;
        out.push(greedy_closure(&start, r, t, &mut rng)?);
    }
    Ok(out)
}

/// Does some (r+t)-subspace X sandwich the family between `F*_{X,k}` and
/// `F_{X,k}`? Scans all (r+t)-subspaces.
pub fn sandwich_check(family: &Family, r: usize, t: usize) -> Result<SandwichReport, SearchError> {
    let dim_x = r + t;
    let field = family.field();
    let n = family.ambient_dim();
    let k = family.uniformity();
    'outer: for x in enumerate_subspaces(field, n, dim_x)? {
        for m in family.iter() {
            if m.intersection_dim(&x)? + 1 < dim_x {
                continue 'outer; // member outside F_{X,k}
            }
        }
        let star = build_f_star_x_k(&x, k)?;
        if star.iter().all(|s| family.contains_member(s)) {
            return Ok(SandwichReport {
                holds: true,
                x_encoding: Some(x.encode()),
            });
        }
    }
    Ok(SandwichReport {
        holds: false,
        x_encoding: None,
    })
}

/// Counts simplices across maximal families and reports the maximizers,
/// their covering numbers, and their sandwich status.
#[allow(clippy::too_many_arguments)]
pub fn extremal_report(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    mode: SearchMode,
    seed: u64,
    iterations: u64,
    guard: Guard,
) -> Result<SearchResult, SearchError> {
    let families = match mode {
        SearchMode::Exhaustive => {
            if r != 2 {
                return Err(SearchError::ExhaustiveNeedsRTwo(r));
            }
            enumerate_maximal_families_r2(q, n, k, t, guard)?
        }
        SearchMode::Sampled => {
            // sampling materializes the candidate list, so the same vertex
            // budget applies
            let vertex_count = crate::subspace::subspace_count(n, k, q)
                .to_u64()
                .unwrap_or(u64::MAX);
            let limit = MAX_GRAPH_VERTICES.saturating_mul(guard.factor);
            if vertex_count > limit {
                return Err(SearchError::InfeasibleScale {
                    what: "candidate subspaces",
                    estimate: vertex_count,
                    limit,
                });
            }
            sample_maximal_families(q, n, k, r, t, seed, iterations)?
        }
    };
    let families_examined = families.len() as u64;

    let mut best = BigCount::from(0u32);
    let mut witnesses: Vec<Family> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for fam in families {
        let count = count_simplices(&fam, r, t)?.count;
        if count > best {
            best = count.clone();
            witnesses.clear();
            seen.clear();
        }
        if count == best && best > BigCount::from(0u32) && seen.insert(fam.canonical_encoding()) {
            witnesses.push(fam);
        }
    }
    witnesses.sort_by_key(|f| f.canonical_encoding());

    let mut sandwich = Vec::with_capacity(witnesses.len());
    let mut witness_tau = Vec::with_capacity(witnesses.len());
    for w in &witnesses {
        sandwich.push(sandwich_check(w, r, t)?);
        witness_tau.push(w.covering_number(t)?.tau);
    }

    let ntrk_exact = if r + t <= n && k + 1 >= r + t && k <= n {
        Some(n_trk_exact(q, n, k, r, t)?.count)
    } else {
        None
    };

    Ok(SearchResult {
        mode,
        n,
        k,
        q,
        r,
        t,
        families_examined,
        best_count: best,
        witnesses,
        witness_tau,
        sandwich,
        ntrk_exact,
    })
}
