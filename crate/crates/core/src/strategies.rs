//! Quantum strategies: a shared bipartite state plus one POVM family per
//! question per player.
//!
//! Winning probabilities are evaluated through the amplitude matrix
//! (⟨ψ|E⊗F|ψ⟩ = ⟨M, E·M·Fᵀ⟩ for ψ reshaped to M); correlation tables go
//! through an explicit Kronecker quadratic form instead, so the two code
//! paths can be checked against each other. Families may contain exact zero
//! operators — lifted strategies for disjunction games need both parents'
//! answer sets to coexist.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::NonlocalGame;
use crate::numerics::{
    is_povm, kron, schmidt, BipartiteState, ComplexMatrix, NumericsError, Tolerance, C64,
};
use crate::parallel::{map_range, EvalBackend};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("player {player} question {question}: family is not a POVM")]
    InvalidPovm { player: char, question: usize },
    #[error("support of the state is not invariant under player {player} operator ({question},{answer}); residual {residual:e}")]
    SupportNotInvariant { player: char, question: usize, answer: usize, residual: f64 },
    #[error("matrix is not an isometry; ||U*U - 1|| = {residual:e}")]
    NotIsometry { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("malformed strategy JSON: {0}")]
    Json(String),
}

/// Shared state plus per-question POVM families for both players.
#[derive(Clone, Debug)]
pub struct QuantumStrategy {
    state: BipartiteState,
    povms_a: Vec<Vec<ComplexMatrix>>,
    povms_b: Vec<Vec<ComplexMatrix>>,
}

impl QuantumStrategy {
    pub fn new(
        state: BipartiteState,
        povms_a: Vec<Vec<ComplexMatrix>>,
        povms_b: Vec<Vec<ComplexMatrix>>,
        tol: Tolerance,
    ) -> Result<Self, StrategyError> {
        for (question, family) in povms_a.iter().enumerate() {
            for m in family {
                if m.rows() != state.dim_a() || m.cols() != state.dim_a() {
                    return Err(StrategyError::ShapeMismatch(format!(
                        "Alice operator for question {question} is {}x{}, state side is {}",
                        m.rows(),
                        m.cols(),
                        state.dim_a()
                    )));
                }
            }
            if !is_povm(family, tol)? {
                return Err(StrategyError::InvalidPovm { player: 'A', question });
            }
        }
        for (question, family) in povms_b.iter().enumerate() {
            for m in family {
                if m.rows() != state.dim_b() || m.cols() != state.dim_b() {
                    return Err(StrategyError::ShapeMismatch(format!(
                        "Bob operator for question {question} is {}x{}, state side is {}",
                        m.rows(),
                        m.cols(),
                        state.dim_b()
                    )));
                }
            }
            if !is_povm(family, tol)? {
                return Err(StrategyError::InvalidPovm { player: 'B', question });
            }
        }
        Ok(QuantumStrategy { state, povms_a, povms_b })
    }

    pub fn state(&self) -> &BipartiteState {
        &self.state
    }

    pub fn dim_a(&self) -> usize {
        self.state.dim_a()
    }

    pub fn dim_b(&self) -> usize {
        self.state.dim_b()
    }

    pub fn n_questions_a(&self) -> usize {
        self.povms_a.len()
    }

    pub fn n_questions_b(&self) -> usize {
        self.povms_b.len()
    }

    pub fn povms_a(&self) -> &[Vec<ComplexMatrix>] {
        &self.povms_a
    }

    pub fn povms_b(&self) -> &[Vec<ComplexMatrix>] {
        &self.povms_b
    }

    pub fn op_a(&self, x: usize, a: usize) -> &ComplexMatrix {
        &self.povms_a[x][a]
    }

    pub fn op_b(&self, y: usize, b: usize) -> &ComplexMatrix {
        &self.povms_b[y][b]
    }

    /// Schmidt rank of the shared state.
    pub fn schmidt_rank(&self, tol: Tolerance) -> Result<usize, StrategyError> {
        Ok(schmidt(&self.state, tol)?.rank())
    }
}

fn zero_flags(povms: &[Vec<ComplexMatrix>]) -> Vec<Vec<bool>> {
    povms.iter().map(|family| family.iter().map(|m| m.is_zero()).collect()).collect()
}

/// Re⟨ψ|E⊗F|ψ⟩ through the amplitude matrix: ⟨M, E·M·Fᵀ⟩.
fn pair_value(m: &ComplexMatrix, e: &ComplexMatrix, f: &ComplexMatrix) -> f64 {
    let emf = e.mul(m).mul(&f.transpose());
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in m.entries().iter().zip(emf.entries()) {
        acc += a.conj() * b;
    }
    debug_assert!(acc.im.abs() <= 1e-9, "imaginary residue {}", acc.im);
    acc.re
}

fn check_compat(g: &NonlocalGame, s: &QuantumStrategy) -> Result<(), StrategyError> {
    if s.povms_a.len() != g.n_inputs_a() || s.povms_b.len() != g.n_inputs_b() {
        return Err(StrategyError::IndexMismatch(format!(
            "strategy has {}/{} question families, game has {}/{}",
            s.povms_a.len(),
            s.povms_b.len(),
            g.n_inputs_a(),
            g.n_inputs_b()
        )));
    }
    for (x, family) in s.povms_a.iter().enumerate() {
        if family.len() != g.n_outputs_a() {
            return Err(StrategyError::IndexMismatch(format!(
                "Alice family {x} has {} operators, game has {} answers",
                family.len(),
                g.n_outputs_a()
            )));
        }
    }
    for (y, family) in s.povms_b.iter().enumerate() {
        if family.len() != g.n_outputs_b() {
            return Err(StrategyError::IndexMismatch(format!(
                "Bob family {y} has {} operators, game has {} answers",
                family.len(),
                g.n_outputs_b()
            )));
        }
    }
    Ok(())
}

/// Winning probability Σ dist(x,y)·Σ_{verify} ⟨ψ|E_{xa}⊗F_{yb}|ψ⟩.
pub fn win_prob(g: &NonlocalGame, s: &QuantumStrategy) -> Result<f64, StrategyError> {
    win_prob_with(g, s, EvalBackend::default())
}

pub fn win_prob_with(
    g: &NonlocalGame,
    s: &QuantumStrategy,
    backend: EvalBackend,
) -> Result<f64, StrategyError> {
    check_compat(g, s)?;
    let m = s.state.amplitude_matrix();
    let zeros_a = zero_flags(&s.povms_a);
    let zeros_b = zero_flags(&s.povms_b);
    let nb = g.n_inputs_b();
    let terms = map_range(backend, g.n_inputs_a() * nb, |xy| {
        let (x, y) = (xy / nb, xy % nb);
        let w = g.dist_f64(x, y);
        if w == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for (a, ea) in s.povms_a[x].iter().enumerate() {
            if zeros_a[x][a] {
                continue;
            }
            for (b, fb) in s.povms_b[y].iter().enumerate() {
                if zeros_b[y][b] || !g.verify(x, y, a, b) {
                    continue;
                }
                total += pair_value(&m, ea, fb);
            }
        }
        w * total
    });
    Ok(terms.iter().sum())
}

/// The full table p(a,b|x,y).
#[derive(Clone, Debug)]
pub struct Correlation {
    n_in_a: usize,
    n_in_b: usize,
    n_out_a: usize,
    n_out_b: usize,
    table: Vec<f64>,
}

impl Correlation {
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.table[((x * self.n_in_b + y) * self.n_out_a + a) * self.n_out_b + b]
    }

    pub fn n_inputs_a(&self) -> usize {
        self.n_in_a
    }

    pub fn n_inputs_b(&self) -> usize {
        self.n_in_b
    }

    pub fn n_outputs_a(&self) -> usize {
        self.n_out_a
    }

    pub fn n_outputs_b(&self) -> usize {
        self.n_out_b
    }

    /// Σ_{a,b} p(a,b|x,y); equals 1 for a well-formed strategy.
    pub fn answer_sum(&self, x: usize, y: usize) -> f64 {
        let base = (x * self.n_in_b + y) * self.n_out_a * self.n_out_b;
        self.table[base..base + self.n_out_a * self.n_out_b].iter().sum()
    }

    /// Largest absolute difference against another table of the same shape.
    pub fn max_deviation(&self, other: &Correlation) -> f64 {
        assert_eq!(self.table.len(), other.table.len());
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// p(a,b|x,y) = ⟨ψ|E_{xa}⊗F_{yb}|ψ⟩, evaluated through the explicit Kronecker
/// product; −1e-12 float noise is clamped to zero.
pub fn correlation(s: &QuantumStrategy) -> Correlation {
    correlation_with(s, EvalBackend::default())
}

pub fn correlation_with(s: &QuantumStrategy, backend: EvalBackend) -> Correlation {
    let n_in_a = s.povms_a.len();
    let n_in_b = s.povms_b.len();
    let n_out_a = s.povms_a.first().map_or(0, Vec::len);
    let n_out_b = s.povms_b.first().map_or(0, Vec::len);
    let psi = s.state.amplitudes();
    let zeros_a = zero_flags(&s.povms_a);
    let zeros_b = zero_flags(&s.povms_b);
    let rows = map_range(backend, n_in_a * n_in_b, |xy| {
        let (x, y) = (xy / n_in_b, xy % n_in_b);
        let mut row = vec![0.0; n_out_a * n_out_b];
        for a in 0..n_out_a {
            if zeros_a[x][a] {
                continue;
            }
            for b in 0..n_out_b {
                if zeros_b[y][b] {
                    continue;
                }
                let op = kron(&s.povms_a[x][a], &s.povms_b[y][b]);
                let applied = op.apply(psi);
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, v) in psi.iter().zip(&applied) {
                    acc += c.conj() * v;
                }
                let mut p = acc.re;
                if p < 0.0 && p > -1e-12 {
                    p = 0.0;
                }
                row[a * n_out_b + b] = p;
            }
        }
        row
    });
    Correlation { n_in_a, n_in_b, n_out_a, n_out_b, table: rows.concat() }
}

/// Restricts a strategy to the support of its state.
///
/// Requires the Alice/Bob supports to be invariant under every operator of
/// the respective player (checked; violation is reported with the offending
/// operator and residual). The output state has full Schmidt rank and the
/// output correlation equals the input correlation.
pub fn restrict_to_support(
    s: &QuantumStrategy,
    tol: Tolerance,
) -> Result<QuantumStrategy, StrategyError> {
    let sd = schmidt(&s.state, tol)?;
    let u_a = sd.left_isometry();
    let u_b = sd.right_isometry();
    let p_a = u_a.mul(&u_a.adjoint());
    let p_b = u_b.mul(&u_b.adjoint());

    let restrict = |povms: &[Vec<ComplexMatrix>],
                    u: &ComplexMatrix,
                    p: &ComplexMatrix,
                    player: char|
     -> Result<Vec<Vec<ComplexMatrix>>, StrategyError> {
        let mut out = Vec::with_capacity(povms.len());
        for (question, family) in povms.iter().enumerate() {
            let mut new_family = Vec::with_capacity(family.len());
            for (answer, e) in family.iter().enumerate() {
                let ep = e.mul(p);
                let residual = ep.sub(&p.mul(&ep)).frob_norm();
                if residual > tol.eq {
                    return Err(StrategyError::SupportNotInvariant {
                        player,
                        question,
                        answer,
                        residual,
                    });
                }
                new_family.push(u.adjoint().mul(e).mul(u));
            }
            out.push(new_family);
        }
        Ok(out)
    };

    let povms_a = restrict(&s.povms_a, &u_a, &p_a, 'A')?;
    let povms_b = restrict(&s.povms_b, &u_b, &p_b, 'B')?;
    let m = s.state.amplitude_matrix();
    let m_restricted = u_a.adjoint().mul(&m).mul(&u_b.conj());
    let state = BipartiteState::from_matrix(&m_restricted, tol)?;
    QuantumStrategy::new(state, povms_a, povms_b, tol)
}

/// ‖(E_{xa}⊗1)ψ − (1⊗F_{xa})ψ‖ for a symmetric-shape strategy; zero for
/// every (x,a) of a perfect strategy of a synchronous game.
pub fn check_sync_identity(s: &QuantumStrategy, x: usize, a: usize) -> Result<f64, StrategyError> {
    if s.povms_a.len() != s.povms_b.len() {
        return Err(StrategyError::ShapeMismatch(format!(
            "question sets differ: {} vs {}",
            s.povms_a.len(),
            s.povms_b.len()
        )));
    }
    if x >= s.povms_a.len() {
        return Err(StrategyError::ShapeMismatch(format!("question {x} out of range")));
    }
    if s.povms_a[x].len() != s.povms_b[x].len() || a >= s.povms_a[x].len() {
        return Err(StrategyError::ShapeMismatch(format!(
            "answer {a} out of range for question {x}"
        )));
    }
    let m = s.state.amplitude_matrix();
    let left = s.povms_a[x][a].mul(&m);
    let right = m.mul(&s.povms_b[x][a].transpose());
    Ok(left.sub(&right).frob_norm())
}

/// Residual norms of the three local-dilation identities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DilationReport {
    /// ‖U|ψ⟩ − |ψ̃⟩⊗|aux⟩‖ (after the tensor-factor swap identification).
    pub state_residual: f64,
    /// max over (x,a) of ‖U(E_{xa}⊗1)|ψ⟩ − [(Ẽ_{xa}⊗1)|ψ̃⟩]⊗|aux⟩‖.
    pub alice_residual: f64,
    /// max over (y,b) of the Bob analogue.
    pub bob_residual: f64,
}

impl DilationReport {
    pub fn max_residual(&self) -> f64 {
        self.state_residual.max(self.alice_residual).max(self.bob_residual)
    }
}

/// Checks whether `reference` is a local dilation of `s` via the given
/// isometries and auxiliary state.
///
/// `u_a : H_A → H̃_A⊗H_aux,A` is passed as a (d̃_A·aux_A) × d_A matrix with
/// the composite row index (ĩ·aux_A + p), and likewise for Bob. The dilation
/// identities compare vectors in H̃_A⊗H_aux,A⊗H̃_B⊗H_aux,B against
/// |ψ̃⟩⊗|aux⟩ ∈ H̃_A⊗H̃_B⊗H_aux,A⊗H_aux,B; the two orderings are identified
/// by swapping the middle tensor factors, realized here as the index
/// interleaving of a Kronecker product of amplitude matrices.
pub fn check_local_dilation(
    s: &QuantumStrategy,
    reference: &QuantumStrategy,
    u_a: &ComplexMatrix,
    u_b: &ComplexMatrix,
    aux: &BipartiteState,
    tol: Tolerance,
) -> Result<DilationReport, StrategyError> {
    let iso_residual_a = u_a
        .adjoint()
        .mul(u_a)
        .sub(&ComplexMatrix::identity(u_a.cols()))
        .frob_norm();
    if iso_residual_a > tol.eq {
        return Err(StrategyError::NotIsometry { residual: iso_residual_a });
    }
    let iso_residual_b = u_b
        .adjoint()
        .mul(u_b)
        .sub(&ComplexMatrix::identity(u_b.cols()))
        .frob_norm();
    if iso_residual_b > tol.eq {
        return Err(StrategyError::NotIsometry { residual: iso_residual_b });
    }
    if u_a.cols() != s.dim_a() || u_b.cols() != s.dim_b() {
        return Err(StrategyError::ShapeMismatch("isometry domain != strategy space".into()));
    }
    if u_a.rows() != reference.dim_a() * aux.dim_a()
        || u_b.rows() != reference.dim_b() * aux.dim_b()
    {
        return Err(StrategyError::ShapeMismatch(
            "isometry range != reference space ⊗ auxiliary space".into(),
        ));
    }
    if s.povms_a.len() != reference.povms_a.len() || s.povms_b.len() != reference.povms_b.len() {
        return Err(StrategyError::IndexMismatch("question sets differ".into()));
    }

    let m = s.state.amplitude_matrix();
    let m_ref = reference.state.amplitude_matrix();
    let aux_m = aux.amplitude_matrix();
    let u_b_t = u_b.transpose();

    // U vec(X) compared against the swapped ψ̃⊗aux layout == kron(X̃, aux)
    let push = |x: &ComplexMatrix| u_a.mul(x).mul(&u_b_t);
    let target = |x_ref: &ComplexMatrix| kron(x_ref, &aux_m);

    let state_residual = push(&m).sub(&target(&m_ref)).frob_norm();

    let mut alice_residual: f64 = 0.0;
    for (x, family) in s.povms_a.iter().enumerate() {
        if family.len() != reference.povms_a[x].len() {
            return Err(StrategyError::IndexMismatch(format!(
                "answer sets differ at Alice question {x}"
            )));
        }
        for (a, e) in family.iter().enumerate() {
            let lhs = push(&e.mul(&m));
            let rhs = target(&reference.povms_a[x][a].mul(&m_ref));
            alice_residual = alice_residual.max(lhs.sub(&rhs).frob_norm());
        }
    }
    let mut bob_residual: f64 = 0.0;
    for (y, family) in s.povms_b.iter().enumerate() {
        if family.len() != reference.povms_b[y].len() {
            return Err(StrategyError::IndexMismatch(format!(
                "answer sets differ at Bob question {y}"
            )));
        }
        for (b, f) in family.iter().enumerate() {
            let lhs = push(&m.mul(&f.transpose()));
            let rhs = target(&m_ref.mul(&reference.povms_b[y][b].transpose()));
            bob_residual = bob_residual.max(lhs.sub(&rhs).frob_norm());
        }
    }
    Ok(DilationReport { state_residual, alice_residual, bob_residual })
}

/// Block-diagonal direct sum of two strategies with the same question and
/// answer index sets; the state carries weight `weight1` on the first block.
pub fn direct_sum(
    s1: &QuantumStrategy,
    s2: &QuantumStrategy,
    weight1: f64,
) -> Result<QuantumStrategy, StrategyError> {
    if !(weight1 > 0.0 && weight1 < 1.0) {
        return Err(StrategyError::ShapeMismatch(format!(
            "weight {weight1} outside (0,1)"
        )));
    }
    if s1.povms_a.len() != s2.povms_a.len() || s1.povms_b.len() != s2.povms_b.len() {
        return Err(StrategyError::IndexMismatch("question sets differ".into()));
    }
    let block = |m1: &ComplexMatrix, m2: &ComplexMatrix| {
        let (r1, c1) = (m1.rows(), m1.cols());
        ComplexMatrix::from_fn(r1 + m2.rows(), c1 + m2.cols(), |i, j| {
            if i < r1 && j < c1 {
                m1.at(i, j)
            } else if i >= r1 && j >= c1 {
                m2.at(i - r1, j - c1)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let sum_family = |f1: &[Vec<ComplexMatrix>],
                      f2: &[Vec<ComplexMatrix>]|
     -> Result<Vec<Vec<ComplexMatrix>>, StrategyError> {
        f1.iter()
            .zip(f2)
            .enumerate()
            .map(|(q, (a, b))| {
                if a.len() != b.len() {
                    return Err(StrategyError::IndexMismatch(format!(
                        "answer sets differ at question {q}"
                    )));
                }
                Ok(a.iter().zip(b).map(|(x, y)| block(x, y)).collect())
            })
            .collect()
    };
    let m1 = s1.state.amplitude_matrix().scale(C64::new(weight1.sqrt(), 0.0));
    let m2 = s2.state.amplitude_matrix().scale(C64::new((1.0 - weight1).sqrt(), 0.0));
    let state = BipartiteState::from_matrix(&block(&m1, &m2), Tolerance::default())?;
    QuantumStrategy::new(
        state,
        sum_family(&s1.povms_a, &s2.povms_a)?,
        sum_family(&s1.povms_b, &s2.povms_b)?,
        Tolerance::default(),
    )
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// Strategy wire format: amplitudes as [re, im] pairs, POVMs keyed by
/// question label then answer label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyJson {
    pub state: StateJson,
    #[serde(rename = "povmsA")]
    pub povms_a: BTreeMap<String, BTreeMap<String, MatrixJson>>,
    #[serde(rename = "povmsB")]
    pub povms_b: BTreeMap<String, BTreeMap<String, MatrixJson>>,
}

fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.at(i, j).re, m.at(i, j).im]).collect())
        .collect()
}

fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix, StrategyError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(StrategyError::Json("ragged matrix".into()));
    }
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        for &[re, im] in row {
            entries.push(C64::new(re, im));
        }
    }
    ComplexMatrix::new(r, c, entries).map_err(StrategyError::from)
}

/// Serializes a strategy using the labels of the game it plays.
pub fn strategy_to_json(
    s: &QuantumStrategy,
    g: &NonlocalGame,
) -> Result<StrategyJson, StrategyError> {
    check_compat(g, s)?;
    let side = |povms: &[Vec<ComplexMatrix>], questions: &[String], answers: &[String]| {
        povms
            .iter()
            .enumerate()
            .map(|(x, family)| {
                (
                    questions[x].clone(),
                    family
                        .iter()
                        .enumerate()
                        .map(|(a, m)| (answers[a].clone(), matrix_to_json(m)))
                        .collect(),
                )
            })
            .collect()
    };
    Ok(StrategyJson {
        state: StateJson {
            dim_a: s.state.dim_a(),
            dim_b: s.state.dim_b(),
            amplitudes: s.state.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
        },
        povms_a: side(&s.povms_a, g.inputs_a(), g.outputs_a()),
        povms_b: side(&s.povms_b, g.inputs_b(), g.outputs_b()),
    })
}

/// Parses a strategy against the labels of a game. Missing answer labels
/// decode as zero operators.
pub fn strategy_from_json(
    j: &StrategyJson,
    g: &NonlocalGame,
    tol: Tolerance,
) -> Result<QuantumStrategy, StrategyError> {
    let amplitudes: Vec<C64> = j.state.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
    let state = BipartiteState::new(j.state.dim_a, j.state.dim_b, amplitudes, tol)?;
    let side = |map: &BTreeMap<String, BTreeMap<String, MatrixJson>>,
                questions: &[String],
                answers: &[String],
                dim: usize|
     -> Result<Vec<Vec<ComplexMatrix>>, StrategyError> {
        questions
            .iter()
            .map(|q| {
                let family = map
                    .get(q)
                    .ok_or_else(|| StrategyError::Json(format!("missing question {q:?}")))?;
                answers
                    .iter()
                    .map(|ans| match family.get(ans) {
                        Some(rows) => matrix_from_json(rows),
                        None => Ok(ComplexMatrix::zeros(dim, dim)),
                    })
                    .collect()
            })
            .collect()
    };
    let povms_a = side(&j.povms_a, g.inputs_a(), g.outputs_a(), j.state.dim_a)?;
    let povms_b = side(&j.povms_b, g.inputs_b(), g.outputs_b(), j.state.dim_b)?;
    QuantumStrategy::new(state, povms_a, povms_b, tol)
}

/// Embeds a deterministic strategy as rank-1 diagonal projectors on a product
/// state; its quantum winning probability equals the classical one exactly.
pub fn embed_deterministic(
    g: &NonlocalGame,
    f_a: &[usize],
    f_b: &[usize],
) -> Result<QuantumStrategy, StrategyError> {
    if f_a.len() != g.n_inputs_a() || f_b.len() != g.n_inputs_b() {
        return Err(StrategyError::IndexMismatch("answer function length".into()));
    }
    let one = ComplexMatrix::identity(1);
    let zero = ComplexMatrix::zeros(1, 1);
    let povms_a = f_a
        .iter()
        .map(|&pick| {
            (0..g.n_outputs_a())
                .map(|a| if a == pick { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let povms_b = f_b
        .iter()
        .map(|&pick| {
            (0..g.n_outputs_b())
                .map(|b| if b == pick { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let state = BipartiteState::new(1, 1, vec![C64::new(1.0, 0.0)], Tolerance::default())?;
    QuantumStrategy::new(state, povms_a, povms_b, Tolerance::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{classical_win_prob, DeterministicStrategy, Dist};
    use crate::numerics::pauli_z;
    use num::ToPrimitive;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn projector_up_down() -> (ComplexMatrix, ComplexMatrix) {
        let up = ComplexMatrix::identity(2).add(&pauli_z()).scale(c(0.5));
        let down = ComplexMatrix::identity(2).sub(&pauli_z()).scale(c(0.5));
        (up, down)
    }

    fn qubit_matching_game() -> NonlocalGame {
        NonlocalGame::new(
            vec!["q".into()],
            vec!["q".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            |_, _, a, b| a == b,
        )
        .unwrap()
    }

    fn matching_strategy() -> QuantumStrategy {
        let (up, down) = projector_up_down();
        QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![up.clone(), down.clone()]],
            vec![vec![up, down]],
            Tolerance::default(),
        )
        .unwrap()
    }

    #[test]
    fn matching_game_on_maximally_entangled_state_is_perfect() {
        let g = qubit_matching_game();
        let s = matching_strategy();
        let w = win_prob(&g, &s).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_of_identity_povm_is_one() {
        let s = QuantumStrategy::new(
            BipartiteState::product(&[c(1.0), c(0.0)], &[c(1.0)]).unwrap(),
            vec![vec![ComplexMatrix::identity(2)]],
            vec![vec![ComplexMatrix::identity(1)]],
            Tolerance::default(),
        )
        .unwrap();
        let corr = correlation(&s);
        assert!((corr.get(0, 0, 0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_projector_on_psi4_gives_half() {
        // E = F^T = (1+σ_Z)/2 ⊗ I on ψ₄; matching outcome carries weight 1/2
        let (up, _) = projector_up_down();
        let e = kron(&up, &ComplexMatrix::identity(2));
        let rest = ComplexMatrix::identity(4).sub(&e);
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(4),
            vec![vec![e.clone(), rest.clone()]],
            vec![vec![e.transpose(), rest.transpose()]],
            Tolerance::default(),
        )
        .unwrap();
        let corr = correlation(&s);
        assert!((corr.get(0, 0, 0, 0) - 0.5).abs() < 1e-12);
        assert!((corr.answer_sum(0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn win_prob_matches_correlation_route() {
        let g = qubit_matching_game();
        let s = matching_strategy();
        let w = win_prob(&g, &s).unwrap();
        let corr = correlation(&s);
        let mut acc = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                if g.verify(0, 0, a, b) {
                    acc += g.dist_f64(0, 0) * corr.get(0, 0, a, b);
                }
            }
        }
        assert!((w - acc).abs() < 1e-12);
    }

    #[test]
    fn classical_embedding_matches_exact_value() {
        let g = NonlocalGame::new(
            vec!["x0".into(), "x1".into()],
            vec!["y0".into(), "y1".into()],
            vec!["a0".into(), "a1".into()],
            vec!["b0".into(), "b1".into()],
            Dist::Uniform,
            |x, y, a, b| (a ^ b) == (x & y),
        )
        .unwrap();
        let det = DeterministicStrategy { f_a: vec![0, 1], f_b: vec![0, 0] };
        let classical = classical_win_prob(&g, &det).unwrap();
        let s = embed_deterministic(&g, &det.f_a, &det.f_b).unwrap();
        let quantum = win_prob(&g, &s).unwrap();
        assert!((quantum - classical.to_f64().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sync_identity_zero_for_transposed_bob() {
        let (up, down) = projector_up_down();
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![up.clone(), down.clone()]],
            vec![vec![up.transpose(), down.transpose()]],
            Tolerance::default(),
        )
        .unwrap();
        for a in 0..2 {
            assert!(check_sync_identity(&s, 0, a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sync_identity_positive_for_mismatched_bob() {
        let (up, down) = projector_up_down();
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![up.clone(), down.clone()]],
            // swapped answers
            vec![vec![down, up]],
            Tolerance::default(),
        )
        .unwrap();
        assert!(check_sync_identity(&s, 0, 0).unwrap() > 0.5);
    }

    #[test]
    fn sync_identity_zero_operators() {
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)]],
            vec![vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)]],
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(check_sync_identity(&s, 0, 1).unwrap(), 0.0);
    }

    fn padded_matching_strategy() -> QuantumStrategy {
        // rank-2 state embedded in 4x4 spaces; complements fill the POVMs
        let (up, down) = projector_up_down();
        let pad = |m: &ComplexMatrix, fill: &ComplexMatrix| {
            ComplexMatrix::from_fn(4, 4, |i, j| {
                if i < 2 && j < 2 {
                    m.at(i, j)
                } else if i >= 2 && j >= 2 {
                    fill.at(i - 2, j - 2)
                } else {
                    c(0.0)
                }
            })
        };
        let id2 = ComplexMatrix::identity(2);
        let zero2 = ComplexMatrix::zeros(2, 2);
        let mut amp = vec![c(0.0); 16];
        amp[0] = c(1.0 / 2f64.sqrt());
        amp[5] = c(1.0 / 2f64.sqrt());
        let state = BipartiteState::new(4, 4, amp, Tolerance::default()).unwrap();
        QuantumStrategy::new(
            state,
            vec![vec![pad(&up, &id2), pad(&down, &zero2)]],
            vec![vec![pad(&up, &id2), pad(&down, &zero2)]],
            Tolerance::default(),
        )
        .unwrap()
    }

    #[test]
    fn restrict_to_support_reaches_full_rank_and_preserves_correlation() {
        let s = padded_matching_strategy();
        let tol = Tolerance::default();
        assert_eq!(s.schmidt_rank(tol).unwrap(), 2);
        let r = restrict_to_support(&s, tol).unwrap();
        assert_eq!(r.dim_a(), 2);
        assert_eq!(r.schmidt_rank(tol).unwrap(), 2);
        assert!(correlation(&s).max_deviation(&correlation(&r)) < 1e-9);
        // idempotent up to unitary freedom
        let rr = restrict_to_support(&r, tol).unwrap();
        assert_eq!(rr.schmidt_rank(tol).unwrap(), 2);
        assert!(correlation(&r).max_deviation(&correlation(&rr)) < 1e-9);
    }

    #[test]
    fn restrict_to_support_rejects_non_invariant_operators() {
        // state supported on e0⊗e0 only, but the POVM mixes e0 and e1
        let had = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let s = QuantumStrategy::new(
            BipartiteState::product(&[c(1.0), c(0.0)], &[c(1.0), c(0.0)]).unwrap(),
            vec![vec![had.clone(), ComplexMatrix::identity(2).sub(&had)]],
            vec![vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)]],
            Tolerance::default(),
        )
        .unwrap();
        assert!(matches!(
            restrict_to_support(&s, Tolerance::default()),
            Err(StrategyError::SupportNotInvariant { player: 'A', .. })
        ));
    }

    #[test]
    fn local_dilation_identity_case() {
        let s = matching_strategy();
        let report = check_local_dilation(
            &s,
            &s,
            &ComplexMatrix::identity(2),
            &ComplexMatrix::identity(2),
            &BipartiteState::new(1, 1, vec![c(1.0)], Tolerance::default()).unwrap(),
            Tolerance::default(),
        )
        .unwrap();
        assert!(report.max_residual() < 1e-12);
    }

    #[test]
    fn local_dilation_detects_padding_by_ancilla() {
        let reference = matching_strategy();
        // tensor the reference with an ancilla product state e0⊗e0: operators
        // E⊗I₂ act on C²⊗C²_aux, state amplitudes are kron(M̃, aux)
        let mut aux_amp = vec![c(0.0); 4];
        aux_amp[0] = c(1.0);
        let aux = BipartiteState::new(2, 2, aux_amp, Tolerance::default()).unwrap();
        let big_m = kron(
            &reference.state().amplitude_matrix(),
            &aux.amplitude_matrix(),
        );
        let id2 = ComplexMatrix::identity(2);
        let widen = |family: &[ComplexMatrix]| -> Vec<ComplexMatrix> {
            family.iter().map(|e| kron(e, &id2)).collect()
        };
        let s = QuantumStrategy::new(
            BipartiteState::from_matrix(&big_m, Tolerance::default()).unwrap(),
            vec![widen(&reference.povms_a()[0])],
            vec![widen(&reference.povms_b()[0])],
            Tolerance::default(),
        )
        .unwrap();
        // the composite index of the big space already is (reference, ancilla)
        let u = ComplexMatrix::identity(4);
        let report =
            check_local_dilation(&s, &reference, &u, &u, &aux, Tolerance::default()).unwrap();
        assert!(report.max_residual() < 1e-9, "{report:?}");
    }

    #[test]
    fn local_dilation_flags_flipped_operator() {
        let reference = matching_strategy();
        let (up, down) = projector_up_down();
        // same spaces, Bob's answers swapped
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![up.clone(), down.clone()]],
            vec![vec![down, up]],
            Tolerance::default(),
        )
        .unwrap();
        let aux = BipartiteState::new(1, 1, vec![c(1.0)], Tolerance::default()).unwrap();
        let id = ComplexMatrix::identity(2);
        let report =
            check_local_dilation(&s, &reference, &id, &id, &aux, Tolerance::default()).unwrap();
        assert!(report.bob_residual > 0.1);
    }

    #[test]
    fn local_dilation_rejects_non_isometry() {
        let s = matching_strategy();
        let aux = BipartiteState::new(1, 1, vec![c(1.0)], Tolerance::default()).unwrap();
        let half = ComplexMatrix::identity(2).scale(c(0.5));
        assert!(matches!(
            check_local_dilation(&s, &s, &half, &half, &aux, Tolerance::default()),
            Err(StrategyError::NotIsometry { .. })
        ));
    }

    #[test]
    fn direct_sum_splits_winning_probability() {
        let g = qubit_matching_game();
        let s = matching_strategy();
        let d = direct_sum(&s, &s, 0.5).unwrap();
        assert_eq!(d.dim_a(), 4);
        let w = win_prob(&g, &d).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strategy_json_round_trip() {
        let g = qubit_matching_game();
        let s = matching_strategy();
        let j = strategy_to_json(&s, &g).unwrap();
        let text = serde_json::to_string(&j).unwrap();
        let parsed: StrategyJson = serde_json::from_str(&text).unwrap();
        let s2 = strategy_from_json(&parsed, &g, Tolerance::default()).unwrap();
        assert!(correlation(&s).max_deviation(&correlation(&s2)) < 1e-12);
    }
}
