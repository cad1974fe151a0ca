//! The disjunction combinator of two nonlocal games.
//!
//! Players receive one question from each parent game, choose which game to
//! answer, and win when both chose the same parent and their answers win it.
//! Joint questions are lexicographic pairs (parent-1 index, parent-2 index);
//! joint answers are the disjoint union of the parents' answer sets, parent 1
//! first. The module also implements the structural facts that make the
//! combinator useful: strategy lifting, extraction of a perfect parent
//! strategy from the component projections of any perfect strategy, the
//! decomposition of the perfect-classical-strategy question, and the
//! question-marginal identities available when parent 2 is synchronous.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{
    perfect_classical_exists, Dist, GameError, GameJson, NonlocalGame,
};
use crate::numerics::{
    projection_range_basis, schmidt, BipartiteState, ComplexMatrix, NumericsError, Tolerance, C64,
};
use crate::strategies::{win_prob, QuantumStrategy, StrategyError};

#[derive(Debug, Error)]
pub enum OrGameError {
    #[error("parent distributions must be uniform")]
    NonUniformDistribution,
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("strategy is not perfect: winning probability {win_prob}")]
    NotPerfect { win_prob: f64 },
    #[error("component operator sums depend on the question; max deviation {deviation:e}")]
    QuestionDependent { deviation: f64 },
    #[error("component operator sum is not a projection; residual {residual:e}")]
    NotProjection { residual: f64 },
    #[error("strategy puts no mass on this component (mass {mass:e})")]
    ZeroComponent { mass: f64 },
    #[error("second parent game is not synchronous")]
    ParentNotSynchronous,
    #[error("state has Schmidt rank {rank} on {dim_a}x{dim_b} spaces; restrict to its support first")]
    StateNotFullRank { rank: usize, dim_a: usize, dim_b: usize },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which parent of a disjunction game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParentId {
    First,
    Second,
}

impl ParentId {
    pub fn index(self) -> usize {
        match self {
            ParentId::First => 0,
            ParentId::Second => 1,
        }
    }

    pub fn other(self) -> ParentId {
        match self {
            ParentId::First => ParentId::Second,
            ParentId::Second => ParentId::First,
        }
    }
}

/// A disjunction game together with its parents and index maps.
#[derive(Clone, Debug)]
pub struct OrGame {
    game: NonlocalGame,
    parent1: NonlocalGame,
    parent2: NonlocalGame,
}

impl OrGame {
    pub fn game(&self) -> &NonlocalGame {
        &self.game
    }

    pub fn parent(&self, which: ParentId) -> &NonlocalGame {
        match which {
            ParentId::First => &self.parent1,
            ParentId::Second => &self.parent2,
        }
    }

    pub fn joint_question_a(&self, x1: usize, x2: usize) -> usize {
        x1 * self.parent2.n_inputs_a() + x2
    }

    pub fn split_question_a(&self, x: usize) -> (usize, usize) {
        (x / self.parent2.n_inputs_a(), x % self.parent2.n_inputs_a())
    }

    pub fn joint_question_b(&self, y1: usize, y2: usize) -> usize {
        y1 * self.parent2.n_inputs_b() + y2
    }

    pub fn split_question_b(&self, y: usize) -> (usize, usize) {
        (y / self.parent2.n_inputs_b(), y % self.parent2.n_inputs_b())
    }

    /// (parent, parent answer) of a joint Alice answer.
    pub fn answer_tag_a(&self, a: usize) -> (ParentId, usize) {
        if a < self.parent1.n_outputs_a() {
            (ParentId::First, a)
        } else {
            (ParentId::Second, a - self.parent1.n_outputs_a())
        }
    }

    pub fn answer_tag_b(&self, b: usize) -> (ParentId, usize) {
        if b < self.parent1.n_outputs_b() {
            (ParentId::First, b)
        } else {
            (ParentId::Second, b - self.parent1.n_outputs_b())
        }
    }

    pub fn joint_answer_a(&self, which: ParentId, a: usize) -> usize {
        match which {
            ParentId::First => a,
            ParentId::Second => self.parent1.n_outputs_a() + a,
        }
    }

    pub fn joint_answer_b(&self, which: ParentId, b: usize) -> usize {
        match which {
            ParentId::First => b,
            ParentId::Second => self.parent1.n_outputs_b() + b,
        }
    }

    pub fn to_json(&self) -> OrGameJson {
        OrGameJson {
            game: self.game.to_json(),
            parents: ParentsJson {
                first: self.parent1.to_json(),
                second: self.parent2.to_json(),
                question_index: "lexicographic (first-parent index, second-parent index)".into(),
                answer_tag: "disjoint union, first parent's answers first".into(),
            },
        }
    }

    pub fn from_json(j: &OrGameJson) -> Result<Self, OrGameError> {
        let parent1 = NonlocalGame::from_json(&j.parents.first)?;
        let parent2 = NonlocalGame::from_json(&j.parents.second)?;
        let rebuilt = or_game(&parent1, &parent2)?;
        let given = NonlocalGame::from_json(&j.game)?;
        if given.n_inputs_a() != rebuilt.game.n_inputs_a()
            || given.n_outputs_a() != rebuilt.game.n_outputs_a()
            || given.n_inputs_b() != rebuilt.game.n_inputs_b()
            || given.n_outputs_b() != rebuilt.game.n_outputs_b()
        {
            return Err(OrGameError::IndexMismatch(
                "serialized joint game does not match its parents".into(),
            ));
        }
        Ok(rebuilt)
    }
}

/// Wire format: the joint game in the shared game format plus a parents
/// block recording the index maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrGameJson {
    pub game: GameJson,
    pub parents: ParentsJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParentsJson {
    pub first: GameJson,
    pub second: GameJson,
    #[serde(rename = "questionIndex")]
    pub question_index: String,
    #[serde(rename = "answerTag")]
    pub answer_tag: String,
}

/// Builds the disjunction game of two uniform-distribution games.
pub fn or_game(g1: &NonlocalGame, g2: &NonlocalGame) -> Result<OrGame, OrGameError> {
    if !g1.is_uniform() || !g2.is_uniform() {
        return Err(OrGameError::NonUniformDistribution);
    }
    let cross = |l1: &[String], l2: &[String]| -> Vec<String> {
        l1.iter()
            .flat_map(|a| l2.iter().map(move |b| format!("({a},{b})")))
            .collect()
    };
    let tag = |l1: &[String], l2: &[String]| -> Vec<String> {
        l1.iter()
            .map(|a| format!("1:{a}"))
            .chain(l2.iter().map(|b| format!("2:{b}")))
            .collect()
    };
    let (n2a, n2b) = (g2.n_inputs_a(), g2.n_inputs_b());
    let (o1a, o1b) = (g1.n_outputs_a(), g1.n_outputs_b());
    let g1c = g1.clone();
    let g2c = g2.clone();
    let game = NonlocalGame::new(
        cross(g1.inputs_a(), g2.inputs_a()),
        cross(g1.inputs_b(), g2.inputs_b()),
        tag(g1.outputs_a(), g2.outputs_a()),
        tag(g1.outputs_b(), g2.outputs_b()),
        Dist::Uniform,
        move |x, y, a, b| {
            let (x1, x2) = (x / n2a, x % n2a);
            let (y1, y2) = (y / n2b, y % n2b);
            let first_a = a < o1a;
            let first_b = b < o1b;
            match (first_a, first_b) {
                (true, true) => g1c.verify(x1, y1, a, b),
                (false, false) => g2c.verify(x2, y2, a - o1a, b - o1b),
                _ => false,
            }
        },
    )?;
    Ok(OrGame { game, parent1: g1.clone(), parent2: g2.clone() })
}

/// Question/answer counts of a game, for size computations on games whose
/// body is not materialized. Shape stubs reject evaluation by construction —
/// they carry no verification table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameShape {
    #[serde(rename = "inputsA")]
    pub inputs_a: usize,
    #[serde(rename = "inputsB")]
    pub inputs_b: usize,
    #[serde(rename = "outputsA")]
    pub outputs_a: usize,
    #[serde(rename = "outputsB")]
    pub outputs_b: usize,
}

impl From<&NonlocalGame> for GameShape {
    fn from(g: &NonlocalGame) -> Self {
        GameShape {
            inputs_a: g.n_inputs_a(),
            inputs_b: g.n_inputs_b(),
            outputs_a: g.n_outputs_a(),
            outputs_b: g.n_outputs_b(),
        }
    }
}

/// Shape of the disjunction game: question counts multiply, answer counts
/// add.
pub fn or_game_shape(s1: &GameShape, s2: &GameShape) -> GameShape {
    GameShape {
        inputs_a: s1.inputs_a * s2.inputs_a,
        inputs_b: s1.inputs_b * s2.inputs_b,
        outputs_a: s1.outputs_a + s2.outputs_a,
        outputs_b: s1.outputs_b + s2.outputs_b,
    }
}

/// Lifts a parent strategy to the disjunction game: on joint question
/// (x₁,x₂) the player measures the parent operator of the chosen parent's
/// question and answers only within that parent's answer set; every other
/// answer carries the zero operator. Winning probability is preserved
/// exactly.
pub fn lift_strategy(
    og: &OrGame,
    which: ParentId,
    s: &QuantumStrategy,
) -> Result<QuantumStrategy, OrGameError> {
    let parent = og.parent(which);
    if s.n_questions_a() != parent.n_inputs_a() || s.n_questions_b() != parent.n_inputs_b() {
        return Err(OrGameError::IndexMismatch(format!(
            "strategy families {}/{} do not match parent questions {}/{}",
            s.n_questions_a(),
            s.n_questions_b(),
            parent.n_inputs_a(),
            parent.n_inputs_b()
        )));
    }
    for (x, fam) in s.povms_a().iter().enumerate() {
        if fam.len() != parent.n_outputs_a() {
            return Err(OrGameError::IndexMismatch(format!(
                "Alice family {x} has {} operators, parent has {} answers",
                fam.len(),
                parent.n_outputs_a()
            )));
        }
    }
    for (y, fam) in s.povms_b().iter().enumerate() {
        if fam.len() != parent.n_outputs_b() {
            return Err(OrGameError::IndexMismatch(format!(
                "Bob family {y} has {} operators, parent has {} answers",
                fam.len(),
                parent.n_outputs_b()
            )));
        }
    }
    let joint = og.game();
    let zero_a = ComplexMatrix::zeros(s.dim_a(), s.dim_a());
    let zero_b = ComplexMatrix::zeros(s.dim_b(), s.dim_b());
    let mut povms_a = Vec::with_capacity(joint.n_inputs_a());
    for x in 0..joint.n_inputs_a() {
        let (x1, x2) = og.split_question_a(x);
        let parent_q = if which == ParentId::First { x1 } else { x2 };
        let fam = (0..joint.n_outputs_a())
            .map(|a| {
                let (tag, pa) = og.answer_tag_a(a);
                if tag == which {
                    s.op_a(parent_q, pa).clone()
                } else {
                    zero_a.clone()
                }
            })
            .collect();
        povms_a.push(fam);
    }
    let mut povms_b = Vec::with_capacity(joint.n_inputs_b());
    for y in 0..joint.n_inputs_b() {
        let (y1, y2) = og.split_question_b(y);
        let parent_q = if which == ParentId::First { y1 } else { y2 };
        let fam = (0..joint.n_outputs_b())
            .map(|b| {
                let (tag, pb) = og.answer_tag_b(b);
                if tag == which {
                    s.op_b(parent_q, pb).clone()
                } else {
                    zero_b.clone()
                }
            })
            .collect();
        povms_b.push(fam);
    }
    Ok(QuantumStrategy::new(s.state().clone(), povms_a, povms_b, Tolerance::default())?)
}

/// The per-parent operator sums of a perfect full-Schmidt-rank strategy:
/// p_i = Σ_{a tagged i} E_{(x₁,x₂)a} (question-independent), and the Bob
/// analogues q_j. They are verified to be question-independent, projections,
/// complementary, and orthogonal.
#[derive(Clone, Debug)]
pub struct ComponentProjections {
    pub p1: ComplexMatrix,
    pub p2: ComplexMatrix,
    pub q1: ComplexMatrix,
    pub q2: ComplexMatrix,
}

/// Re⟨ψ|P⊗Q|ψ⟩ for the amplitude matrix of ψ.
fn sandwich(m: &ComplexMatrix, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let pmq = p.mul(m).mul(&q.transpose());
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in m.entries().iter().zip(pmq.entries()) {
        acc += a.conj() * b;
    }
    acc.re
}

pub fn component_projections(
    og: &OrGame,
    s: &QuantumStrategy,
    tol: Tolerance,
) -> Result<ComponentProjections, OrGameError> {
    let w = win_prob(og.game(), s)?;
    if (w - 1.0).abs() > tol.eq {
        return Err(OrGameError::NotPerfect { win_prob: w });
    }
    let rank = schmidt(s.state(), tol)?.rank();
    if rank != s.dim_a() || rank != s.dim_b() {
        return Err(OrGameError::StateNotFullRank {
            rank,
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
        });
    }
    let joint = og.game();
    let sum_side = |povms: &[Vec<ComplexMatrix>],
                    tag_of: &dyn Fn(usize) -> ParentId,
                    which: ParentId,
                    dim: usize|
     -> Result<ComplexMatrix, OrGameError> {
        let mut reference: Option<ComplexMatrix> = None;
        let mut deviation: f64 = 0.0;
        for family in povms {
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for (ans, op) in family.iter().enumerate() {
                if tag_of(ans) == which {
                    sum = sum.add(op);
                }
            }
            match &reference {
                None => reference = Some(sum),
                Some(r) => deviation = deviation.max(sum.sub(r).frob_norm()),
            }
        }
        if deviation > tol.eq {
            return Err(OrGameError::QuestionDependent { deviation });
        }
        Ok(reference.expect("games have at least one question"))
    };
    let p1 = sum_side(s.povms_a(), &|a| og.answer_tag_a(a).0, ParentId::First, s.dim_a())?;
    let q1 = sum_side(s.povms_b(), &|b| og.answer_tag_b(b).0, ParentId::First, s.dim_b())?;
    debug_assert_eq!(joint.n_outputs_a(), s.povms_a()[0].len());

    let check_projection = |p: &ComplexMatrix| -> Result<(), OrGameError> {
        let herm = p.sub(&p.adjoint()).frob_norm();
        let idem = p.mul(p).sub(p).frob_norm();
        let residual = herm.max(idem);
        if residual > tol.eq {
            return Err(OrGameError::NotProjection { residual });
        }
        Ok(())
    };
    check_projection(&p1)?;
    check_projection(&q1)?;
    let p2 = ComplexMatrix::identity(s.dim_a()).sub(&p1);
    let q2 = ComplexMatrix::identity(s.dim_b()).sub(&q1);
    // p1·p2 = p1 − p1² is bounded by the idempotency residual already
    // checked; recheck the complementary sums directly against the POVM
    // totals to catch drift.
    let ortho = p1.mul(&p2).frob_norm().max(q1.mul(&q2).frob_norm());
    if ortho > tol.eq {
        return Err(OrGameError::NotProjection { residual: ortho });
    }
    Ok(ComponentProjections { p1, p2, q1, q2 })
}

/// Extracts a perfect parent strategy from a perfect full-rank disjunction
/// strategy by compressing state and operators to the ranges of the
/// component projections. Fails with `ZeroComponent` when the strategy never
/// answers in this parent.
pub fn extract_component_strategy(
    og: &OrGame,
    s: &QuantumStrategy,
    which: ParentId,
    tol: Tolerance,
) -> Result<QuantumStrategy, OrGameError> {
    let cp = component_projections(og, s, tol)?;
    let (p, q) = match which {
        ParentId::First => (&cp.p1, &cp.q1),
        ParentId::Second => (&cp.p2, &cp.q2),
    };
    let m = s.state().amplitude_matrix();
    let mass = sandwich(&m, p, q);
    if mass <= tol.eq {
        return Err(OrGameError::ZeroComponent { mass });
    }
    let v_a = projection_range_basis(p)?;
    let v_b = projection_range_basis(q)?;
    let parent = og.parent(which);
    // fix the other parent's question arbitrarily; the component sums are
    // question-independent so index 0 is as good as any
    let compress = |op: &ComplexMatrix, v: &ComplexMatrix| v.adjoint().mul(op).mul(v);
    let mut povms_a = Vec::with_capacity(parent.n_inputs_a());
    for x1 in 0..parent.n_inputs_a() {
        let joint_q = match which {
            ParentId::First => og.joint_question_a(x1, 0),
            ParentId::Second => og.joint_question_a(0, x1),
        };
        let fam = (0..parent.n_outputs_a())
            .map(|a| compress(s.op_a(joint_q, og.joint_answer_a(which, a)), &v_a))
            .collect();
        povms_a.push(fam);
    }
    let mut povms_b = Vec::with_capacity(parent.n_inputs_b());
    for y1 in 0..parent.n_inputs_b() {
        let joint_q = match which {
            ParentId::First => og.joint_question_b(y1, 0),
            ParentId::Second => og.joint_question_b(0, y1),
        };
        let fam = (0..parent.n_outputs_b())
            .map(|b| compress(s.op_b(joint_q, og.joint_answer_b(which, b)), &v_b))
            .collect();
        povms_b.push(fam);
    }
    let compressed = v_a
        .adjoint()
        .mul(&m)
        .mul(&v_b.conj())
        .scale(C64::new(1.0 / mass.sqrt(), 0.0));
    let state = BipartiteState::from_matrix(&compressed, tol)?;
    Ok(QuantumStrategy::new(state, povms_a, povms_b, tol)?)
}

/// Whether the disjunction game has a perfect classical strategy. Any
/// perfect deterministic strategy of the joint game commits to a single
/// parent, so the answer decomposes into the parents' searches.
pub fn perfect_classical_exists_or(og: &OrGame) -> bool {
    perfect_classical_exists(&og.parent1).is_some()
        || perfect_classical_exists(&og.parent2).is_some()
}

/// Question-marginal identities of a perfect strategy when parent 2 is
/// synchronous: the parent-1 half of the question must not influence
/// parent-2 answers. Returns the largest residual over
///
/// * ‖(E_{(x₁,x₂)a} − E_{(x₃,x₂)a})⊗1 ψ‖ and the Bob analogue, and
/// * ‖(E_{(x₁,x₂)a}⊗1)ψ − (1⊗F_{(y₁,x₂)a})ψ‖,
///
/// quantified over parent-2 answers only.
pub fn check_marginal_independence(
    og: &OrGame,
    s: &QuantumStrategy,
    tol: Tolerance,
) -> Result<f64, OrGameError> {
    if !og.parent2.is_synchronous() {
        return Err(OrGameError::ParentNotSynchronous);
    }
    let w = win_prob(og.game(), s)?;
    if (w - 1.0).abs() > tol.eq {
        return Err(OrGameError::NotPerfect { win_prob: w });
    }
    let m = s.state().amplitude_matrix();
    let mut worst: f64 = 0.0;
    let (n1a, n1b) = (og.parent1.n_inputs_a(), og.parent1.n_inputs_b());
    let n2 = og.parent2.n_inputs_a();
    let o2 = og.parent2.n_outputs_a();
    for x2 in 0..n2 {
        for pa in 0..o2 {
            let a = og.joint_answer_a(ParentId::Second, pa);
            // applied operators (E⊗1)ψ as matrices E·M
            let applied: Vec<ComplexMatrix> = (0..n1a)
                .map(|x1| s.op_a(og.joint_question_a(x1, x2), a).mul(&m))
                .collect();
            for i in 0..n1a {
                for j in (i + 1)..n1a {
                    worst = worst.max(applied[i].sub(&applied[j]).frob_norm());
                }
            }
            let applied_b: Vec<ComplexMatrix> = (0..n1b)
                .map(|y1| {
                    m.mul(&s.op_b(og.joint_question_b(y1, x2), a).transpose())
                })
                .collect();
            for i in 0..n1b {
                for j in (i + 1)..n1b {
                    worst = worst.max(applied_b[i].sub(&applied_b[j]).frob_norm());
                }
            }
            for ea in &applied {
                for fb in &applied_b {
                    worst = worst.max(ea.sub(fb).frob_norm());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{classical_win_prob, DeterministicStrategy, Rational};
    use crate::magicsquare::{sync_magic_square_game, sync_magic_square_reference_strategy};
    use crate::numerics::pauli_z;
    use crate::strategies::{correlation, direct_sum};

    fn trivial_game(label: &str) -> NonlocalGame {
        NonlocalGame::new(
            vec![format!("{label}q")],
            vec![format!("{label}q")],
            vec![format!("{label}a")],
            vec![format!("{label}a")],
            Dist::Uniform,
            |_, _, _, _| true,
        )
        .unwrap()
    }

    fn matching_game(n_answers: usize) -> NonlocalGame {
        let ans: Vec<String> = (0..n_answers).map(|i| format!("m{i}")).collect();
        NonlocalGame::new(
            vec!["mq".into()],
            vec!["mq".into()],
            ans.clone(),
            ans,
            Dist::Uniform,
            |_, _, a, b| a == b,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_or_game_of_trivial_parents() {
        let g = trivial_game("t");
        let og = or_game(&g, &g).unwrap();
        assert_eq!(og.game().n_inputs_a(), 1);
        assert_eq!(og.game().n_outputs_a(), 2);
        // verify = same-tag indicator
        assert!(og.game().verify(0, 0, 0, 0));
        assert!(og.game().verify(0, 0, 1, 1));
        assert!(!og.game().verify(0, 0, 0, 1));
        assert!(!og.game().verify(0, 0, 1, 0));
    }

    #[test]
    fn or_game_rejects_non_uniform_parents() {
        let g = trivial_game("t");
        let skew = NonlocalGame::new(
            vec!["x0".into(), "x1".into()],
            vec!["y0".into()],
            vec!["a".into()],
            vec!["b".into()],
            Dist::Table(vec![Rational::new(1, 3), Rational::new(2, 3)]),
            |_, _, _, _| true,
        )
        .unwrap();
        assert!(matches!(or_game(&skew, &g), Err(OrGameError::NonUniformDistribution)));
    }

    #[test]
    fn shape_arithmetic() {
        let s1 = GameShape { inputs_a: 184, inputs_b: 235, outputs_a: 8, outputs_b: 2 };
        let s2 = GameShape { inputs_a: 6, inputs_b: 6, outputs_a: 8, outputs_b: 8 };
        let s = or_game_shape(&s1, &s2);
        assert_eq!(s, GameShape { inputs_a: 1104, inputs_b: 1410, outputs_a: 16, outputs_b: 10 });
    }

    fn projective_matching_strategy(d: usize) -> QuantumStrategy {
        // measure the computational basis on ψ_d; perfect for matching games
        let ops = |transpose: bool| -> Vec<Vec<ComplexMatrix>> {
            let fam: Vec<ComplexMatrix> = (0..d)
                .map(|i| {
                    let mut p = ComplexMatrix::zeros(d, d);
                    p.set(i, i, C64::new(1.0, 0.0));
                    if transpose {
                        p.transpose()
                    } else {
                        p
                    }
                })
                .collect();
            vec![fam]
        };
        QuantumStrategy::new(
            BipartiteState::maximally_entangled(d),
            ops(false),
            ops(true),
            Tolerance::default(),
        )
        .unwrap()
    }

    #[test]
    fn lift_preserves_winning_probability_exactly() {
        let g1 = matching_game(2);
        let g2 = trivial_game("t");
        let og = or_game(&g1, &g2).unwrap();
        let s = projective_matching_strategy(2);
        let parent_w = win_prob(&g1, &s).unwrap();
        let lifted = lift_strategy(&og, ParentId::First, &s).unwrap();
        let lifted_w = win_prob(og.game(), &lifted).unwrap();
        assert!((parent_w - lifted_w).abs() <= 1e-12);
        assert!((lifted_w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lift_of_suboptimal_strategy_keeps_its_value() {
        // deliberately degraded strategy: identity measurement answers 0
        let g1 = matching_game(2);
        let g2 = trivial_game("t");
        let og = or_game(&g1, &g2).unwrap();
        let id = ComplexMatrix::identity(2);
        let zero = ComplexMatrix::zeros(2, 2);
        let up = ComplexMatrix::identity(2).add(&pauli_z()).scale(C64::new(0.5, 0.0));
        let down = ComplexMatrix::identity(2).sub(&up);
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![id.clone(), zero.clone()]],
            vec![vec![up, down]],
            Tolerance::default(),
        )
        .unwrap();
        let w = win_prob(&g1, &s).unwrap();
        assert!(w < 1.0);
        let lifted = lift_strategy(&og, ParentId::First, &s).unwrap();
        assert!((win_prob(og.game(), &lifted).unwrap() - w).abs() <= 1e-12);
    }

    #[test]
    fn component_projections_of_mixed_strategy() {
        // or-game of two trivial parents; the strategy picks the parent by a
        // projective measurement of ψ₂
        let og = or_game(&trivial_game("u"), &trivial_game("v")).unwrap();
        let p0 = {
            let mut p = ComplexMatrix::zeros(2, 2);
            p.set(0, 0, C64::new(1.0, 0.0));
            p
        };
        let p1m = ComplexMatrix::identity(2).sub(&p0);
        let s = QuantumStrategy::new(
            BipartiteState::maximally_entangled(2),
            vec![vec![p0.clone(), p1m.clone()]],
            vec![vec![p0.clone(), p1m.clone()]],
            Tolerance::default(),
        )
        .unwrap();
        assert!((win_prob(og.game(), &s).unwrap() - 1.0).abs() < 1e-12);
        let cp = component_projections(&og, &s, Tolerance::default()).unwrap();
        let id = ComplexMatrix::identity(2);
        assert!(cp.p1.add(&cp.p2).sub(&id).frob_norm() < 1e-9);
        assert!(cp.p1.mul(&cp.p2).frob_norm() < 1e-9);
        assert!(cp.q1.add(&cp.q2).sub(&id).frob_norm() < 1e-9);
        assert!(cp.p1.sub(&p0).frob_norm() < 1e-9);
    }

    #[test]
    fn lifted_strategy_has_trivial_component_projections() {
        let g1 = matching_game(2);
        let g2 = matching_game(3);
        let og = or_game(&g1, &g2).unwrap();
        let lifted = lift_strategy(&og, ParentId::Second, &projective_matching_strategy(3)).unwrap();
        let cp = component_projections(&og, &lifted, Tolerance::default()).unwrap();
        assert!(cp.p1.frob_norm() < 1e-12);
        assert!(cp.p2.sub(&ComplexMatrix::identity(3)).frob_norm() < 1e-12);
        // extraction of the silent component fails
        assert!(matches!(
            extract_component_strategy(&og, &lifted, ParentId::First, Tolerance::default()),
            Err(OrGameError::ZeroComponent { .. })
        ));
        // extraction of the live component reproduces a perfect strategy
        let back = extract_component_strategy(&og, &lifted, ParentId::Second, Tolerance::default())
            .unwrap();
        assert!((win_prob(&g2, &back).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn direct_sum_extraction_round_trip() {
        let g1 = matching_game(2);
        let g2 = matching_game(3);
        let og = or_game(&g1, &g2).unwrap();
        let l1 = lift_strategy(&og, ParentId::First, &projective_matching_strategy(2)).unwrap();
        let l2 = lift_strategy(&og, ParentId::Second, &projective_matching_strategy(3)).unwrap();
        let s = direct_sum(&l1, &l2, 0.5).unwrap();
        assert!((win_prob(og.game(), &s).unwrap() - 1.0).abs() < 1e-12);
        let tol = Tolerance::default();
        let e1 = extract_component_strategy(&og, &s, ParentId::First, tol).unwrap();
        let e2 = extract_component_strategy(&og, &s, ParentId::Second, tol).unwrap();
        assert!((win_prob(&g1, &e1).unwrap() - 1.0).abs() < 1e-9);
        assert!((win_prob(&g2, &e2).unwrap() - 1.0).abs() < 1e-9);
        // extraction then re-lift keeps the winning probability
        let relift = lift_strategy(&og, ParentId::First, &e1).unwrap();
        assert!((win_prob(og.game(), &relift).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classical_decomposition_on_small_parents() {
        let winnable = trivial_game("w");
        let hard = matching_game(2); // perfect classically (both answer 0)
        let og = or_game(&hard, &winnable).unwrap();
        assert!(perfect_classical_exists_or(&og));
        // an unwinnable parent: every answer pair loses
        let impossible = NonlocalGame::new(
            vec!["q".into()],
            vec!["q".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            |_, _, _, _| false,
        )
        .unwrap();
        let og2 = or_game(&impossible, &impossible).unwrap();
        assert!(!perfect_classical_exists_or(&og2));
        let og3 = or_game(&impossible, &winnable).unwrap();
        assert!(perfect_classical_exists_or(&og3));
    }

    #[test]
    fn marginal_independence_of_lifted_sync_strategy() {
        let g1 = matching_game(2);
        let g2 = sync_magic_square_game();
        let og = or_game(&g1, &g2).unwrap();
        let lifted =
            lift_strategy(&og, ParentId::Second, &sync_magic_square_reference_strategy()).unwrap();
        let r = check_marginal_independence(&og, &lifted, Tolerance::default()).unwrap();
        assert!(r <= 1e-9, "residual {r}");
    }

    #[test]
    fn marginal_independence_requires_synchronous_parent() {
        let g1 = matching_game(2);
        let not_sync = NonlocalGame::new(
            vec!["x".into()],
            vec!["y".into()],
            vec!["a".into()],
            vec!["a".into()],
            Dist::Uniform,
            |_, _, _, _| true,
        )
        .unwrap();
        let og = or_game(&g1, &not_sync).unwrap();
        let s = lift_strategy(&og, ParentId::First, &projective_matching_strategy(2)).unwrap();
        assert!(matches!(
            check_marginal_independence(&og, &s, Tolerance::default()),
            Err(OrGameError::ParentNotSynchronous)
        ));
    }

    #[test]
    fn or_game_json_round_trip() {
        let og = or_game(&matching_game(2), &trivial_game("t")).unwrap();
        let text = serde_json::to_string(&og.to_json()).unwrap();
        let parsed: OrGameJson = serde_json::from_str(&text).unwrap();
        let og2 = OrGame::from_json(&parsed).unwrap();
        assert_eq!(og2.game().n_inputs_a(), og.game().n_inputs_a());
        assert_eq!(og2.game().losing_tuples(), og.game().losing_tuples());
    }

    #[test]
    fn lifted_deterministic_witness_wins_joint_game() {
        // classical witness lifted from a winnable parent
        let winnable = matching_game(2);
        let og = or_game(&matching_game(3), &winnable).unwrap();
        let w = DeterministicStrategy {
            f_a: vec![og.joint_answer_a(ParentId::Second, 0); og.game().n_inputs_a()],
            f_b: vec![og.joint_answer_b(ParentId::Second, 0); og.game().n_inputs_b()],
        };
        assert_eq!(
            classical_win_prob(og.game(), &w).unwrap(),
            Rational::new(1, 1)
        );
    }

    #[test]
    fn correlation_is_preserved_by_lifting_on_the_parent_block() {
        let g1 = matching_game(2);
        let g2 = trivial_game("t");
        let og = or_game(&g1, &g2).unwrap();
        let s = projective_matching_strategy(2);
        let lifted = lift_strategy(&og, ParentId::First, &s).unwrap();
        let parent_corr = correlation(&s);
        let lifted_corr = correlation(&lifted);
        for a in 0..2 {
            for b in 0..2 {
                let la = og.joint_answer_a(ParentId::First, a);
                let lb = og.joint_answer_b(ParentId::First, b);
                assert!((parent_corr.get(0, 0, a, b) - lifted_corr.get(0, 0, la, lb)).abs() < 1e-12);
            }
        }
    }
}
