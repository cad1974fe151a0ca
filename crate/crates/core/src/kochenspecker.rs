//! Ray sets, marking functions, weak Kochen-Specker verification, and the
//! derived orthogonality-graph machinery.
//!
//! Bundled ray sets carry exact components of the form a + b·√2, so every
//! orthogonality decision on them is made in integer arithmetic before any
//! float enters the picture; the float path serves user-supplied sets. The
//! bundled 33-ray set in dimension 3 is gated behind its structural checks
//! (33 rays, 16 bases, weak-KS verdict) in the test suite rather than
//! trusted as data.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graphgames::{Graph, QuantumIndependentSet};
use crate::numerics::{ComplexMatrix, NumericsError, C64};

#[derive(Debug, Error)]
pub enum KsError {
    #[error("dimension {0} too large for exhaustive basis enumeration (max 4)")]
    DimensionTooLarge(usize),
    #[error("ray set is not a weak Kochen-Specker set")]
    NotWeakKs,
    #[error("rays {0} and {1} are parallel")]
    ParallelRays(usize, usize),
    #[error("ray {index} has {got} components, expected {dim}")]
    BadRayLength { index: usize, got: usize, dim: usize },
    #[error("zero ray at index {0}")]
    ZeroRay(usize),
    #[error("malformed ray text: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Exact scalar a + b·√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SqrtTwoInt {
    pub int: i64,
    pub root: i64,
}

impl SqrtTwoInt {
    pub const ZERO: SqrtTwoInt = SqrtTwoInt { int: 0, root: 0 };

    pub fn new(int: i64, root: i64) -> Self {
        SqrtTwoInt { int, root }
    }

    pub fn add(self, o: Self) -> Self {
        SqrtTwoInt { int: self.int + o.int, root: self.root + o.root }
    }

    pub fn mul(self, o: Self) -> Self {
        SqrtTwoInt {
            int: self.int * o.int + 2 * self.root * o.root,
            root: self.int * o.root + self.root * o.int,
        }
    }

    pub fn is_zero(self) -> bool {
        self.int == 0 && self.root == 0
    }

    pub fn to_f64(self) -> f64 {
        self.int as f64 + self.root as f64 * std::f64::consts::SQRT_2
    }
}

fn exact_dot(u: &[SqrtTwoInt], v: &[SqrtTwoInt]) -> SqrtTwoInt {
    u.iter().zip(v).fold(SqrtTwoInt::ZERO, |acc, (&a, &b)| acc.add(a.mul(b)))
}

/// A set of pairwise non-parallel unit vectors, optionally with exact real
/// components.
#[derive(Clone, Debug)]
pub struct RaySet {
    dim: usize,
    rays: Vec<Vec<C64>>,
    exact: Option<Vec<Vec<SqrtTwoInt>>>,
}

impl RaySet {
    /// Builds from complex entries; each ray is normalized and pairwise
    /// parallelism is rejected.
    pub fn new(dim: usize, rays: Vec<Vec<C64>>) -> Result<Self, KsError> {
        let mut normalized = Vec::with_capacity(rays.len());
        for (i, r) in rays.into_iter().enumerate() {
            if r.len() != dim {
                return Err(KsError::BadRayLength { index: i, got: r.len(), dim });
            }
            let n = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-12 {
                return Err(KsError::ZeroRay(i));
            }
            normalized.push(r.into_iter().map(|c| c / n).collect::<Vec<_>>());
        }
        let rs = RaySet { dim, rays: normalized, exact: None };
        rs.check_pairwise()?;
        Ok(rs)
    }

    /// Builds from exact a + b·√2 components.
    pub fn from_exact(dim: usize, rows: Vec<Vec<SqrtTwoInt>>) -> Result<Self, KsError> {
        let mut rays = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(KsError::BadRayLength { index: i, got: r.len(), dim });
            }
            let norm2 = exact_dot(r, r);
            if norm2.is_zero() {
                return Err(KsError::ZeroRay(i));
            }
            let n = norm2.to_f64().sqrt();
            rays.push(r.iter().map(|c| C64::new(c.to_f64() / n, 0.0)).collect::<Vec<_>>());
        }
        let rs = RaySet { dim, rays, exact: Some(rows) };
        rs.check_pairwise()?;
        Ok(rs)
    }

    fn check_pairwise(&self) -> Result<(), KsError> {
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.parallel(i, j) {
                    return Err(KsError::ParallelRays(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Normalized components of ray `i`.
    pub fn ray(&self, i: usize) -> &[C64] {
        &self.rays[i]
    }

    fn dot(&self, i: usize, j: usize) -> C64 {
        self.rays[i]
            .iter()
            .zip(&self.rays[j])
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Orthogonality decision: exact when exact components are available,
    /// |⟨u,v⟩| ≤ 1e-9 otherwise.
    pub fn orthogonal(&self, i: usize, j: usize) -> bool {
        if let Some(exact) = &self.exact {
            return exact_dot(&exact[i], &exact[j]).is_zero();
        }
        self.dot(i, j).norm() <= 1e-9
    }

    fn parallel(&self, i: usize, j: usize) -> bool {
        if let Some(exact) = &self.exact {
            let d = exact_dot(&exact[i], &exact[j]);
            let n = exact_dot(&exact[i], &exact[i]).mul(exact_dot(&exact[j], &exact[j]));
            return d.mul(d) == n;
        }
        self.dot(i, j).norm() >= 1.0 - 1e-9
    }

    /// Parses the text format: one ray per line, whitespace-separated
    /// components, each an exact expression over integers and `sqrt2`
    /// (e.g. `0`, `-1`, `sqrt2`, `-2*sqrt2`, `1+sqrt2`). `#` starts a comment.
    pub fn parse(dim: usize, text: &str) -> Result<Self, KsError> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<SqrtTwoInt> = line
                .split_whitespace()
                .map(parse_component)
                .collect::<Result<_, _>>()?;
            rows.push(row);
        }
        Self::from_exact(dim, rows)
    }

    /// Renders the exact text format; only available for exact ray sets.
    pub fn to_text(&self) -> Option<String> {
        let exact = self.exact.as_ref()?;
        let mut out = String::new();
        for row in exact {
            let line: Vec<String> = row.iter().map(|c| render_component(*c)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        Some(out)
    }
}

fn parse_component(token: &str) -> Result<SqrtTwoInt, KsError> {
    let bad = || KsError::Parse(format!("bad component {token:?}"));
    let mut total = SqrtTwoInt::ZERO;
    let mut rest = token;
    let mut sign: i64 = 1;
    if let Some(r) = rest.strip_prefix('-') {
        sign = -1;
        rest = r;
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r;
    }
    while !rest.is_empty() {
        let end = rest[1..]
            .find(['+', '-'])
            .map(|p| p + 1)
            .unwrap_or(rest.len());
        let term = &rest[..end];
        let parsed = if let Some(coeff) = term.strip_suffix("sqrt2") {
            let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
            let k: i64 = if coeff.is_empty() { 1 } else { coeff.parse().map_err(|_| bad())? };
            SqrtTwoInt::new(0, sign * k)
        } else {
            let k: i64 = term.parse().map_err(|_| bad())?;
            SqrtTwoInt::new(sign * k, 0)
        };
        total = total.add(parsed);
        if end == rest.len() {
            break;
        }
        sign = if rest.as_bytes()[end] == b'-' { -1 } else { 1 };
        rest = &rest[end + 1..];
    }
    Ok(total)
}

fn render_component(c: SqrtTwoInt) -> String {
    let root = match c.root {
        0 => None,
        1 => Some("sqrt2".to_string()),
        -1 => Some("-sqrt2".to_string()),
        k => Some(format!("{k}*sqrt2")),
    };
    match (c.int, root) {
        (i, None) => i.to_string(),
        (0, Some(r)) => r,
        (i, Some(r)) if r.starts_with('-') => format!("{i}{r}"),
        (i, Some(r)) => format!("{i}+{r}"),
    }
}

/// The bundled 33-ray set in dimension 3 (components 0, ±1, ±√2), closed
/// under coordinate permutations and sign changes, in a fixed canonical
/// order: axes, face diagonals, the {0,1,√2} family, the {1,1,√2} family.
pub fn peres_33() -> RaySet {
    const I: (i64, i64) = (1, 0);
    const N: (i64, i64) = (-1, 0);
    const O: (i64, i64) = (0, 0);
    const R: (i64, i64) = (0, 1);
    const Q: (i64, i64) = (0, -1);
    #[rustfmt::skip]
    const RAYS: [[(i64, i64); 3]; 33] = [
        // axes
        [I, O, O], [O, I, O], [O, O, I],
        // face diagonals
        [I, I, O], [I, N, O], [I, O, I], [I, O, N], [O, I, I], [O, I, N],
        // one zero, one unit, one sqrt2
        [O, I, R], [O, I, Q], [O, R, I], [O, R, N],
        [I, O, R], [I, O, Q], [R, O, I], [R, O, N],
        [I, R, O], [I, Q, O], [R, I, O], [R, N, O],
        // two units and one sqrt2
        [R, I, I], [R, I, N], [R, N, I], [R, N, N],
        [I, R, I], [I, R, N], [I, Q, I], [I, Q, N],
        [I, I, R], [I, I, Q], [I, N, R], [I, N, Q],
    ];
    let rows = RAYS
        .iter()
        .map(|row| row.iter().map(|&(a, b)| SqrtTwoInt::new(a, b)).collect())
        .collect();
    RaySet::from_exact(3, rows).expect("bundled ray set is well-formed")
}

/// All orthonormal bases contained in the ray set, i.e. all mutually
/// orthogonal subsets of size `dim`, each sorted, in lexicographic order.
pub fn enumerate_bases(rs: &RaySet) -> Result<Vec<Vec<usize>>, KsError> {
    if rs.dim() > 4 {
        return Err(KsError::DimensionTooLarge(rs.dim()));
    }
    let n = rs.len();
    let mut bases = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(
        rs: &RaySet,
        start: usize,
        stack: &mut Vec<usize>,
        bases: &mut Vec<Vec<usize>>,
        n: usize,
    ) {
        if stack.len() == rs.dim() {
            bases.push(stack.clone());
            return;
        }
        for v in start..n {
            if stack.iter().all(|&u| rs.orthogonal(u, v)) {
                stack.push(v);
                extend(rs, v + 1, stack, bases, n);
                stack.pop();
            }
        }
    }
    extend(rs, 0, &mut stack, &mut bases, n);
    Ok(bases)
}

/// A {0,1} assignment on rays; admissible when every basis carries exactly
/// one marked ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingFunction {
    pub marks: Vec<bool>,
}

impl MarkingFunction {
    /// Whether every basis carries exactly one marked ray.
    pub fn satisfies(&self, bases: &[Vec<usize>]) -> bool {
        bases
            .iter()
            .all(|b| b.iter().filter(|&&v| self.marks[v]).count() == 1)
    }

    /// A pair of orthogonal marked rays, if one exists.
    pub fn marked_orthogonal_pair(&self, rs: &RaySet) -> Option<(usize, usize)> {
        let marked: Vec<usize> =
            (0..rs.len()).filter(|&v| self.marks[v]).collect();
        for (i, &u) in marked.iter().enumerate() {
            for &v in &marked[i + 1..] {
                if rs.orthogonal(u, v) {
                    return Some((u, v));
                }
            }
        }
        None
    }
}

/// Verdict of the weak Kochen-Specker test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakKsVerdict {
    /// No admissible marking function exists at all.
    KochenSpecker,
    /// Markings exist but each one marks two orthogonal rays.
    WeakKochenSpecker,
    /// An admissible marking avoids orthogonal marked pairs; here is one.
    NotWeakKs(MarkingFunction),
}

#[derive(Clone, Copy, PartialEq)]
enum MarkState {
    Unset,
    Zero,
    One,
}

/// Backtracking over marking assignments, basis by basis: choose the marked
/// ray of each basis, propagate the forced zeros through shared rays, and —
/// in counterexample mode — refuse choices orthogonal to an already marked
/// ray. Rays outside every basis are unconstrained and stay unmarked, which
/// is the choice most favorable to a counterexample.
fn search_marking(
    rs: &RaySet,
    bases: &[Vec<usize>],
    avoid_orthogonal: bool,
) -> Option<MarkingFunction> {
    let n = rs.len();
    let mut state = vec![MarkState::Unset; n];
    let orth: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && rs.orthogonal(i, j)).collect())
        .collect();

    fn rec(
        bi: usize,
        bases: &[Vec<usize>],
        state: &mut [MarkState],
        orth: &[Vec<usize>],
        avoid: bool,
    ) -> bool {
        if bi == bases.len() {
            return true;
        }
        let basis = &bases[bi];
        for &pick in basis {
            if state[pick] == MarkState::Zero {
                continue;
            }
            if basis.iter().any(|&o| o != pick && state[o] == MarkState::One) {
                continue;
            }
            if avoid
                && state[pick] == MarkState::Unset
                && orth[pick].iter().any(|&o| state[o] == MarkState::One)
            {
                continue;
            }
            let saved: Vec<(usize, MarkState)> =
                basis.iter().map(|&v| (v, state[v])).collect();
            state[pick] = MarkState::One;
            for &o in basis {
                if o != pick {
                    state[o] = MarkState::Zero;
                }
            }
            if rec(bi + 1, bases, state, orth, avoid) {
                return true;
            }
            for (v, s) in saved {
                state[v] = s;
            }
        }
        false
    }

    if rec(0, bases, &mut state, &orth, avoid_orthogonal) {
        Some(MarkingFunction {
            marks: state.iter().map(|&s| s == MarkState::One).collect(),
        })
    } else {
        None
    }
}

/// Classifies a ray set: Kochen-Specker (no marking function), weak
/// Kochen-Specker (every marking has an orthogonal marked pair), or neither
/// (with a counterexample marking).
pub fn is_weak_ks(rs: &RaySet) -> Result<WeakKsVerdict, KsError> {
    let bases = enumerate_bases(rs)?;
    if let Some(witness) = search_marking(rs, &bases, true) {
        debug_assert!(witness.satisfies(&bases));
        debug_assert!(witness.marked_orthogonal_pair(rs).is_none());
        return Ok(WeakKsVerdict::NotWeakKs(witness));
    }
    if search_marking(rs, &bases, false).is_some() {
        Ok(WeakKsVerdict::WeakKochenSpecker)
    } else {
        Ok(WeakKsVerdict::KochenSpecker)
    }
}

/// A set of projections together with the complete list of identity-summing
/// subsets (its bases). Rank-1 sets keep their source rays for exact
/// orthogonality decisions.
#[derive(Clone, Debug)]
pub struct ProjectiveKsSet {
    dim: usize,
    projections: Vec<ComplexMatrix>,
    bases: Vec<Vec<usize>>,
    rays: Option<RaySet>,
}

impl ProjectiveKsSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projection(&self, i: usize) -> &ComplexMatrix {
        &self.projections[i]
    }

    /// Identity-summing subsets, by projection index.
    pub fn bases(&self) -> &[Vec<usize>] {
        &self.bases
    }

    /// Orthogonality of two member projections (p·q = 0).
    pub fn orthogonal(&self, i: usize, j: usize) -> bool {
        if let Some(rays) = &self.rays {
            return rays.orthogonal(i, j);
        }
        let p = &self.projections[i];
        let q = &self.projections[j];
        p.mul(q).frob_norm() <= 1e-9
    }
}

/// Converts a verified weak Kochen-Specker ray set into the projective form:
/// rank-1 projectors v·v† with bases recomputed as the identity-summing
/// subsets (for rank-1 projections these are exactly the orthonormal bases
/// among the rays).
pub fn to_projective_ks(rs: &RaySet) -> Result<ProjectiveKsSet, KsError> {
    match is_weak_ks(rs)? {
        WeakKsVerdict::NotWeakKs(_) => return Err(KsError::NotWeakKs),
        WeakKsVerdict::KochenSpecker | WeakKsVerdict::WeakKochenSpecker => {}
    }
    let bases = enumerate_bases(rs)?;
    let projections = (0..rs.len())
        .map(|i| {
            let v = rs.ray(i);
            ComplexMatrix::from_fn(rs.dim(), rs.dim(), |r, c| v[r] * v[c].conj())
        })
        .collect();
    Ok(ProjectiveKsSet { dim: rs.dim(), projections, bases, rays: Some(rs.clone()) })
}

/// Vertex bookkeeping for the orthogonality graph: vertex = (basis index,
/// member position) in the multiset disjoint union of all bases.
#[derive(Clone, Debug)]
pub struct KsVertexMap {
    pairs: Vec<(usize, usize)>,
    projection_of: Vec<usize>,
}

impl KsVertexMap {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// (basis index, member position) of a vertex.
    pub fn pair(&self, vertex: usize) -> (usize, usize) {
        self.pairs[vertex]
    }

    /// Projection index of a vertex.
    pub fn projection(&self, vertex: usize) -> usize {
        self.projection_of[vertex]
    }
}

/// The orthogonality graph of the basis multiset: one vertex per basis
/// member, an edge wherever the underlying projections multiply to zero.
/// Equal projections recurring across bases give distinct, non-adjacent
/// vertices (p·p = p ≠ 0).
pub fn orthogonality_graph(ks: &ProjectiveKsSet) -> (Graph, KsVertexMap) {
    let mut pairs = Vec::new();
    let mut projection_of = Vec::new();
    for (a, basis) in ks.bases().iter().enumerate() {
        for (b, &p) in basis.iter().enumerate() {
            pairs.push((a, b));
            projection_of.push(p);
        }
    }
    let n = pairs.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let (pu, pv) = (projection_of[u], projection_of[v]);
            if pu != pv && ks.orthogonal(pu, pv) {
                edges.push((u, v));
            }
        }
    }
    let labels = pairs
        .iter()
        .map(|&(a, b)| format!("b{}p{}", a + 1, ks.bases()[a][b]))
        .collect();
    let graph = Graph::new(n, edges).expect("vertex indices in range").with_labels(labels);
    (graph, KsVertexMap { pairs, projection_of })
}

/// The quantum independent set carried by a projective Kochen-Specker set:
/// for question j and vertex (a,b), the operator is p_{ab} when a = j and
/// zero otherwise. Its size equals the number of bases.
pub fn quantum_independent_set_from_ks(ks: &ProjectiveKsSet) -> QuantumIndependentSet {
    let k = ks.bases().len();
    let (_, map) = orthogonality_graph(ks);
    let zero = ComplexMatrix::zeros(ks.dim(), ks.dim());
    let operators = (0..k)
        .map(|j| {
            (0..map.len())
                .map(|vertex| {
                    let (a, _) = map.pair(vertex);
                    if a == j {
                        ks.projection(map.projection(vertex)).clone()
                    } else {
                        zero.clone()
                    }
                })
                .collect()
        })
        .collect();
    QuantumIndependentSet::new(k, ks.dim(), operators)
}
