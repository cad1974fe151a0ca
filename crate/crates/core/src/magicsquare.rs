//! The magic square game, its synchronous variant, and their reference
//! strategies.
//!
//! The game is the minimal-size version: Alice gets one of three row
//! constraints (product +1), Bob one of three column constraints
//! (product −1), answers are ±1 sign triples satisfying the respective
//! parity, and the players win when the assignments agree on the shared
//! cell. The reference strategy measures commuting two-qubit observables on
//! the maximally entangled state ψ₄; each row and column of the observable
//! grid multiplies to ±identity with the signs matching the constraints,
//! which is what makes the product formulas projective measurements.

use crate::games::{Dist, NonlocalGame};
use crate::numerics::{
    kron, pauli_x, pauli_y, pauli_z, BipartiteState, ComplexMatrix, Tolerance, C64,
};
use crate::strategies::QuantumStrategy;

/// Sign triples with product +1 (row answers).
pub const PLUS_TRIPLES: [[i8; 3]; 4] =
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

/// Sign triples with product −1 (column answers).
pub const MINUS_TRIPLES: [[i8; 3]; 4] =
    [[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]];

fn triple_label(t: &[i8; 3]) -> String {
    t.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// The 3×3 grid of two-qubit ±1-observables whose rows multiply to +1 and
/// columns to −1.
pub struct PauliTable {
    entries: Vec<Vec<ComplexMatrix>>,
}

impl PauliTable {
    pub fn new() -> Self {
        let i2 = ComplexMatrix::identity(2);
        let (sx, sy, sz) = (pauli_x(), pauli_y(), pauli_z());
        let minus = C64::new(-1.0, 0.0);
        let entries = vec![
            vec![kron(&i2, &sz), kron(&sz, &i2), kron(&sz, &sz)],
            vec![kron(&sx, &i2), kron(&i2, &sx), kron(&sx, &sx)],
            vec![
                kron(&sx, &sz).scale(minus),
                kron(&sz, &sx).scale(minus),
                kron(&sy, &sy),
            ],
        ];
        PauliTable { entries }
    }

    pub fn at(&self, row: usize, col: usize) -> &ComplexMatrix {
        &self.entries[row][col]
    }

    /// Product of the three observables in a row.
    pub fn row_product(&self, row: usize) -> ComplexMatrix {
        self.entries[row][0].mul(&self.entries[row][1]).mul(&self.entries[row][2])
    }

    /// Product of the three observables in a column.
    pub fn col_product(&self, col: usize) -> ComplexMatrix {
        self.entries[0][col].mul(&self.entries[1][col]).mul(&self.entries[2][col])
    }
}

impl Default for PauliTable {
    fn default() -> Self {
        Self::new()
    }
}

/// The magic square game: rows vs columns, win iff the shared cell agrees.
pub fn magic_square_game() -> NonlocalGame {
    NonlocalGame::new(
        vec!["r1".into(), "r2".into(), "r3".into()],
        vec!["c1".into(), "c2".into(), "c3".into()],
        PLUS_TRIPLES.iter().map(triple_label).collect(),
        MINUS_TRIPLES.iter().map(triple_label).collect(),
        Dist::Uniform,
        |x, y, a, b| PLUS_TRIPLES[a][y] == MINUS_TRIPLES[b][x],
    )
    .expect("static game construction")
}

/// Product of projectors (1 + s·X_k)/2 over the three observables of a line.
fn line_projector(obs: [&ComplexMatrix; 3], signs: &[i8; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    for (o, &s) in obs.iter().zip(signs) {
        let factor = ComplexMatrix::identity(4)
            .add(&o.scale(C64::new(s as f64, 0.0)))
            .scale(C64::new(0.5, 0.0));
        m = m.mul(&factor);
    }
    m
}

fn row_projectors(table: &PauliTable) -> Vec<Vec<ComplexMatrix>> {
    (0..3)
        .map(|x| {
            PLUS_TRIPLES
                .iter()
                .map(|signs| line_projector([table.at(x, 0), table.at(x, 1), table.at(x, 2)], signs))
                .collect()
        })
        .collect()
}

fn col_projectors_transposed(table: &PauliTable) -> Vec<Vec<ComplexMatrix>> {
    // Bob uses the transposed column observables
    (0..3)
        .map(|y| {
            let t = [
                table.at(0, y).transpose(),
                table.at(1, y).transpose(),
                table.at(2, y).transpose(),
            ];
            MINUS_TRIPLES
                .iter()
                .map(|signs| line_projector([&t[0], &t[1], &t[2]], signs))
                .collect()
        })
        .collect()
}

/// The perfect strategy for the magic square game: ψ₄ with row projectors for
/// Alice and transposed column projectors for Bob. All six families are PVMs.
pub fn magic_square_reference_strategy() -> QuantumStrategy {
    let table = PauliTable::new();
    QuantumStrategy::new(
        BipartiteState::maximally_entangled(4),
        row_projectors(&table),
        col_projectors_transposed(&table),
        Tolerance::default(),
    )
    .expect("reference strategy is a valid POVM family")
}

const SYNC_QUESTIONS: usize = 6; // r1 r2 r3 c1 c2 c3
const SYNC_ANSWERS: usize = 8; // PLUS_TRIPLES then MINUS_TRIPLES

fn is_row(x: usize) -> bool {
    x < 3
}

fn sync_verify(x: usize, y: usize, a: usize, b: usize) -> bool {
    let a_plus = a < 4;
    let b_plus = b < 4;
    match (is_row(x), is_row(y)) {
        (true, false) if a_plus && !b_plus => {
            PLUS_TRIPLES[a][y - 3] == MINUS_TRIPLES[b - 4][x]
        }
        (false, true) if !a_plus && b_plus => {
            PLUS_TRIPLES[b][x - 3] == MINUS_TRIPLES[a - 4][y]
        }
        (true, true) if a_plus && b_plus => x != y || a == b,
        (false, false) if !a_plus && !b_plus => x != y || a == b,
        _ => false,
    }
}

/// The synchronous magic square game: both players get any of the six
/// constraints; on identical questions identical answers are forced.
pub fn sync_magic_square_game() -> NonlocalGame {
    let questions: Vec<String> =
        ["r1", "r2", "r3", "c1", "c2", "c3"].iter().map(|s| s.to_string()).collect();
    let answers: Vec<String> = PLUS_TRIPLES
        .iter()
        .map(|t| format!("+{}", triple_label(t)))
        .chain(MINUS_TRIPLES.iter().map(|t| format!("-{}", triple_label(t))))
        .collect();
    NonlocalGame::new(
        questions.clone(),
        questions,
        answers.clone(),
        answers,
        Dist::Uniform,
        sync_verify,
    )
    .expect("static game construction")
}

/// The perfect strategy for the synchronous magic square game.
///
/// On row questions Alice plays her magic-square projectors over the +1
/// triples and the zero operator on every −1 triple; on column questions she
/// plays the transposes of Bob's magic-square projectors over the −1 triples.
/// Bob mirrors this with the roles of rows and columns exchanged.
pub fn sync_magic_square_reference_strategy() -> QuantumStrategy {
    let table = PauliTable::new();
    let e = row_projectors(&table);
    let f = col_projectors_transposed(&table);
    let zero = ComplexMatrix::zeros(4, 4);

    let mut povms_a: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(SYNC_QUESTIONS);
    let mut povms_b: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(SYNC_QUESTIONS);
    for x in 0..SYNC_QUESTIONS {
        let mut fam_a = vec![zero.clone(); SYNC_ANSWERS];
        let mut fam_b = vec![zero.clone(); SYNC_ANSWERS];
        if is_row(x) {
            for a in 0..4 {
                fam_a[a] = e[x][a].clone();
                fam_b[a] = e[x][a].transpose();
            }
        } else {
            for b in 0..4 {
                fam_a[4 + b] = f[x - 3][b].transpose();
                fam_b[4 + b] = f[x - 3][b].clone();
            }
        }
        povms_a.push(fam_a);
        povms_b.push(fam_b);
    }
    QuantumStrategy::new(
        BipartiteState::maximally_entangled(4),
        povms_a,
        povms_b,
        Tolerance::default(),
    )
    .expect("reference strategy is a valid POVM family")
}
