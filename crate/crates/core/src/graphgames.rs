//! Graphs, exact independence number, the independent set game, and quantum
//! independent sets.
//!
//! The independence solver is a branch-and-bound over adjacency bitsets:
//! branch on the max-degree candidate, bound by a greedy clique cover of the
//! residual candidate set. At the sizes handled here (≤ a few hundred
//! vertices) this finishes in milliseconds.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::games::{Dist, NonlocalGame};
use crate::numerics::{BipartiteState, ComplexMatrix, Tolerance};
use crate::strategies::{QuantumStrategy, StrategyError};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} out of range (graph has {1} vertices)")]
    VertexOutOfRange(usize, usize),
    #[error("search budget exceeded after {nodes} branch-and-bound nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("quantum independent set fails condition ({0}); residual {1:e}")]
    QisInvalid(&'static str, f64),
    #[error("malformed graph text: {0}")]
    Parse(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct VertexMask {
    words: Vec<u64>,
}

impl VertexMask {
    fn empty(n: usize) -> Self {
        VertexMask { words: vec![0; n.div_ceil(64)] }
    }

    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        VertexMask { words }
    }

    fn set(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    fn clear(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and_not(&self, other: &VertexMask) -> VertexMask {
        VertexMask {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    fn intersect_count(&self, other: &VertexMask) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// Finite simple undirected graph. The edge set is kept both as a hash set
/// (membership queries, serialization) and as per-vertex adjacency bitsets
/// (the branch-and-bound inner loop).
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: HashSet<(usize, usize)>,
    adjacency: Vec<VertexMask>,
    labels: Option<Vec<String>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut set = HashSet::new();
        let mut adjacency = vec![VertexMask::empty(n); n];
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            set.insert((u.min(v), u.max(v)));
            adjacency[u].set(v);
            adjacency[v].set(u);
        }
        Ok(Graph { n, edges: set, adjacency, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count()
    }

    /// Edges in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.edges.iter().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => format!("v{v}"),
        }
    }

    /// DOT rendering (undirected).
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph {\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {} [label=\"{}\"];", v, self.label(v));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }

    /// Minimal edge-list text: one `u v` pair per line, 0-based. Isolated
    /// vertices at the top end are preserved through a leading vertex-count
    /// comment.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# vertices {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut n = 0usize;
        let mut declared: Option<usize> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("vertices") {
                    declared = it
                        .next()
                        .and_then(|t| t.parse().ok());
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next()) {
                (Some(u), Some(v)) => (u, v),
                _ => return Err(GraphError::Parse(format!("bad line {line:?}"))),
            };
            let u: usize =
                u.parse().map_err(|_| GraphError::Parse(format!("bad vertex {u:?}")))?;
            let v: usize =
                v.parse().map_err(|_| GraphError::Parse(format!("bad vertex {v:?}")))?;
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        Graph::new(declared.unwrap_or(n).max(n), edges)
    }
}

/// Result of the exact independence solver.
#[derive(Clone, Debug)]
pub struct IndependenceResult {
    pub alpha: usize,
    pub witness: Vec<usize>,
    pub nodes: u64,
}

struct BnB<'g> {
    g: &'g Graph,
    best: usize,
    best_set: VertexMask,
    nodes: u64,
    budget: u64,
}

impl BnB<'_> {
    /// Greedy clique cover of the candidate set: each color class is a clique
    /// of the graph, so an independent set meets each class at most once.
    fn clique_cover_bound(&self, cand: &VertexMask) -> usize {
        let mut classes: Vec<VertexMask> = Vec::new();
        for v in cand.iter_ones() {
            let mut placed = false;
            for class in classes.iter_mut() {
                // v joins a class iff adjacent to all current members
                if class.and_not(&self.g.adjacency[v]).is_empty() {
                    class.set(v);
                    placed = true;
                    break;
                }
            }
            if !placed {
                let mut class = VertexMask::empty(self.g.n);
                class.set(v);
                classes.push(class);
            }
        }
        classes.len()
    }

    fn expand(&mut self, current: &VertexMask, cand: &VertexMask, size: usize) -> Result<(), GraphError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(GraphError::BudgetExceeded { nodes: self.nodes });
        }
        if cand.is_empty() {
            if size > self.best {
                self.best = size;
                self.best_set = current.clone();
            }
            return Ok(());
        }
        if size + self.clique_cover_bound(cand) <= self.best {
            return Ok(());
        }
        // branch on the candidate with the most candidate-neighbors; ties go
        // to the smallest index, keeping the witness canonical
        let mut rest = cand.clone();
        while !rest.is_empty() {
            if size + rest.count() <= self.best {
                return Ok(());
            }
            let mut pick = usize::MAX;
            let mut pick_deg = usize::MAX;
            for v in rest.iter_ones() {
                let d = self.g.adjacency[v].intersect_count(&rest);
                if pick == usize::MAX || d > pick_deg {
                    pick = v;
                    pick_deg = d;
                }
            }
            let v = pick;
            rest.clear(v);
            let mut with_v = current.clone();
            with_v.set(v);
            let mut next_cand = rest.and_not(&self.g.adjacency[v]);
            next_cand.clear(v);
            self.expand(&with_v, &next_cand, size + 1)?;
        }
        Ok(())
    }
}

/// Exact independence number with witness, by branch-and-bound. Errors with
/// the node count when the budget is exhausted.
pub fn independence_number(g: &Graph, budget: u64) -> Result<IndependenceResult, GraphError> {
    let mut solver = BnB {
        g,
        best: 0,
        best_set: VertexMask::empty(g.n),
        nodes: 0,
        budget,
    };
    let full = VertexMask::full(g.n);
    let empty = VertexMask::empty(g.n);
    solver.expand(&empty, &full, 0)?;
    let witness: Vec<usize> = solver.best_set.iter_ones().collect();
    Ok(IndependenceResult { alpha: solver.best, witness, nodes: solver.nodes })
}

/// The (G,t)-independent set game: questions are indices 1..t, answers are
/// vertices; identical questions force identical vertices, distinct questions
/// force distinct non-adjacent vertices. Synchronous by construction.
pub fn independent_set_game(g: &Graph, t: usize) -> NonlocalGame {
    assert!(t >= 1, "need at least one question");
    let questions: Vec<String> = (1..=t).map(|i| format!("x{i}")).collect();
    let answers: Vec<String> = (0..g.vertex_count()).map(|v| g.label(v)).collect();
    let adjacency: Vec<VertexMask> = g.adjacency.clone();
    NonlocalGame::new(
        questions.clone(),
        questions,
        answers.clone(),
        answers,
        Dist::Uniform,
        move |x, y, u, v| {
            if x == y {
                u == v
            } else {
                u != v && !adjacency[u].contains(v)
            }
        },
    )
    .expect("static game construction")
}

/// A family of projections P_{xu} indexed by question x ∈ [t] and vertex u.
#[derive(Clone, Debug)]
pub struct QuantumIndependentSet {
    size: usize,
    dim: usize,
    operators: Vec<Vec<ComplexMatrix>>,
}

impl QuantumIndependentSet {
    pub fn new(size: usize, dim: usize, operators: Vec<Vec<ComplexMatrix>>) -> Self {
        assert_eq!(operators.len(), size);
        QuantumIndependentSet { size, dim, operators }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operator(&self, x: usize, u: usize) -> &ComplexMatrix {
        &self.operators[x][u]
    }

    pub fn operators(&self) -> &[Vec<ComplexMatrix>] {
        &self.operators
    }
}

/// Residuals of the three defining conditions of a quantum independent set.
#[derive(Clone, Copy, Debug)]
pub struct QisCheck {
    /// ‖Σ_u P_{xu} − 1‖ maximized over x.
    pub completeness: f64,
    /// ‖P_{xu}·P_{yv}‖ maximized over edges (u,v) and question pairs.
    pub edge_orthogonality: f64,
    /// ‖P_{xu}·P_{yu}‖ maximized over x≠y and vertices u.
    pub repetition_orthogonality: f64,
    /// ‖P − P²‖ and ‖P − P*‖ maximized over all operators.
    pub projection: f64,
    pub pass: bool,
}

impl QisCheck {
    pub fn max_residual(&self) -> f64 {
        self.completeness
            .max(self.edge_orthogonality)
            .max(self.repetition_orthogonality)
            .max(self.projection)
    }
}

/// Verifies the quantum-independent-set conditions against a graph.
pub fn check_qis(g: &Graph, q: &QuantumIndependentSet, tol: Tolerance) -> QisCheck {
    let id = ComplexMatrix::identity(q.dim);
    let mut completeness: f64 = 0.0;
    let mut projection: f64 = 0.0;
    for x in 0..q.size {
        let mut sum = ComplexMatrix::zeros(q.dim, q.dim);
        for u in 0..g.vertex_count() {
            let p = q.operator(x, u);
            sum = sum.add(p);
            projection = projection
                .max(p.mul(p).sub(p).frob_norm())
                .max(p.sub(&p.adjoint()).frob_norm());
        }
        completeness = completeness.max(sum.sub(&id).frob_norm());
    }
    let mut edge_orthogonality: f64 = 0.0;
    for (u, v) in g.edges() {
        for x in 0..q.size {
            for y in 0..q.size {
                let p = q.operator(x, u);
                let r = q.operator(y, v);
                if p.is_zero() || r.is_zero() {
                    continue;
                }
                edge_orthogonality = edge_orthogonality
                    .max(p.mul(r).frob_norm())
                    .max(r.mul(p).frob_norm());
            }
        }
    }
    let mut repetition_orthogonality: f64 = 0.0;
    for u in 0..g.vertex_count() {
        for x in 0..q.size {
            for y in 0..q.size {
                if x == y {
                    continue;
                }
                let p = q.operator(x, u);
                let r = q.operator(y, u);
                if p.is_zero() || r.is_zero() {
                    continue;
                }
                repetition_orthogonality = repetition_orthogonality.max(p.mul(r).frob_norm());
            }
        }
    }
    let pass = completeness <= tol.eq
        && edge_orthogonality <= tol.eq
        && repetition_orthogonality <= tol.eq
        && projection <= tol.eq;
    QisCheck { completeness, edge_orthogonality, repetition_orthogonality, projection, pass }
}

/// The perfect strategy induced by a quantum independent set: maximally
/// entangled state of the projection dimension, Alice plays P_{xu}, Bob the
/// transposes.
pub fn strategy_from_qis(
    g: &Graph,
    q: &QuantumIndependentSet,
    tol: Tolerance,
) -> Result<QuantumStrategy, GraphError> {
    let check = check_qis(g, q, tol);
    if !check.pass {
        let (name, r): (&'static str, f64) = if check.completeness > tol.eq {
            ("completeness", check.completeness)
        } else if check.edge_orthogonality > tol.eq {
            ("edge orthogonality", check.edge_orthogonality)
        } else if check.repetition_orthogonality > tol.eq {
            ("repetition orthogonality", check.repetition_orthogonality)
        } else {
            ("projection", check.projection)
        };
        return Err(GraphError::QisInvalid(name, r));
    }
    let povms_a: Vec<Vec<ComplexMatrix>> = q.operators.clone();
    let povms_b: Vec<Vec<ComplexMatrix>> = q
        .operators
        .iter()
        .map(|family| family.iter().map(ComplexMatrix::transpose).collect())
        .collect();
    Ok(QuantumStrategy::new(
        BipartiteState::maximally_entangled(q.dim),
        povms_a,
        povms_b,
        tol,
    )?)
}

/// Encodes a classical independent set {v_1..v_t} as a dimension-1 quantum
/// independent set: P_{xu} = δ_{u,v_x}·1.
pub fn classical_embedding_qis(g: &Graph, vertices: &[usize]) -> QuantumIndependentSet {
    let one = ComplexMatrix::identity(1);
    let zero = ComplexMatrix::zeros(1, 1);
    let operators = vertices
        .iter()
        .map(|&pick| {
            (0..g.vertex_count())
                .map(|u| if u == pick { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    QuantumIndependentSet::new(vertices.len(), 1, operators)
}
