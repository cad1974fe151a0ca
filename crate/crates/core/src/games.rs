//! The classical side of the game model.
//!
//! A game is stored densely: a bit-packed verification table over
//! (x, y, a, b) index quadruples plus a rational question distribution.
//! Classical values are exact fractions; the perfect-strategy search is a
//! backtracking CSP over the two players' answer functions.

use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::{map_range, EvalBackend};

pub type Rational = Ratio<i64>;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("search space too large: {cardinality:e} deterministic strategy pairs exceed limit {limit:e}")]
    SearchSpaceTooLarge { cardinality: f64, limit: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid game table: {0}")]
    InvalidTable(String),
    #[error("malformed game JSON: {0}")]
    Json(String),
}

/// Question distribution; restricted to rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum Dist {
    Uniform,
    Table(Vec<Rational>),
}

#[derive(Clone, Debug)]
struct BitTable {
    words: Vec<u64>,
    len: usize,
}

impl BitTable {
    fn new(len: usize) -> Self {
        BitTable { words: vec![0; len.div_ceil(64)], len }
    }

    fn set(&mut self, idx: usize, v: bool) {
        debug_assert!(idx < self.len);
        if v {
            self.words[idx / 64] |= 1 << (idx % 64);
        } else {
            self.words[idx / 64] &= !(1 << (idx % 64));
        }
    }

    fn get(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }
}

/// A finite two-player nonlocal game.
#[derive(Clone, Debug)]
pub struct NonlocalGame {
    inputs_a: Vec<String>,
    inputs_b: Vec<String>,
    outputs_a: Vec<String>,
    outputs_b: Vec<String>,
    dist: Dist,
    verify: BitTable,
}

impl NonlocalGame {
    /// Builds a game from a verification predicate over index quadruples.
    pub fn new(
        inputs_a: Vec<String>,
        inputs_b: Vec<String>,
        outputs_a: Vec<String>,
        outputs_b: Vec<String>,
        dist: Dist,
        verify: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self, GameError> {
        let (na, nb, oa, ob) = (inputs_a.len(), inputs_b.len(), outputs_a.len(), outputs_b.len());
        if na == 0 || nb == 0 || oa == 0 || ob == 0 {
            return Err(GameError::InvalidTable("empty input or output set".into()));
        }
        if let Dist::Table(t) = &dist {
            if t.len() != na * nb {
                return Err(GameError::InvalidDistribution(format!(
                    "table has {} entries, expected {}",
                    t.len(),
                    na * nb
                )));
            }
            let mut sum = Rational::zero();
            for p in t {
                if *p < Rational::zero() {
                    return Err(GameError::InvalidDistribution("negative entry".into()));
                }
                sum += *p;
            }
            let dev = (sum.to_f64().unwrap_or(f64::NAN) - 1.0).abs();
            if !(dev <= 1e-12) {
                return Err(GameError::InvalidDistribution(format!("entries sum to {sum}")));
            }
        }
        let mut table = BitTable::new(na * nb * oa * ob);
        let mut idx = 0;
        for x in 0..na {
            for y in 0..nb {
                for a in 0..oa {
                    for b in 0..ob {
                        table.set(idx, verify(x, y, a, b));
                        idx += 1;
                    }
                }
            }
        }
        Ok(NonlocalGame { inputs_a, inputs_b, outputs_a, outputs_b, dist, verify: table })
    }

    /// Builds a game from its losing tuples (the verification table is the
    /// complement).
    pub fn from_losing(
        inputs_a: Vec<String>,
        inputs_b: Vec<String>,
        outputs_a: Vec<String>,
        outputs_b: Vec<String>,
        dist: Dist,
        losing: &[[usize; 4]],
    ) -> Result<Self, GameError> {
        let (na, nb, oa, ob) = (inputs_a.len(), inputs_b.len(), outputs_a.len(), outputs_b.len());
        for &[x, y, a, b] in losing {
            if x >= na || y >= nb || a >= oa || b >= ob {
                return Err(GameError::InvalidTable(format!(
                    "losing tuple ({x},{y},{a},{b}) out of range"
                )));
            }
        }
        let mut g = Self::new(inputs_a, inputs_b, outputs_a, outputs_b, dist, |_, _, _, _| true)?;
        for &[x, y, a, b] in losing {
            let idx = ((x * nb + y) * oa + a) * ob + b;
            g.verify.set(idx, false);
        }
        Ok(g)
    }

    pub fn n_inputs_a(&self) -> usize {
        self.inputs_a.len()
    }

    pub fn n_inputs_b(&self) -> usize {
        self.inputs_b.len()
    }

    pub fn n_outputs_a(&self) -> usize {
        self.outputs_a.len()
    }

    pub fn n_outputs_b(&self) -> usize {
        self.outputs_b.len()
    }

    pub fn inputs_a(&self) -> &[String] {
        &self.inputs_a
    }

    pub fn inputs_b(&self) -> &[String] {
        &self.inputs_b
    }

    pub fn outputs_a(&self) -> &[String] {
        &self.outputs_a
    }

    pub fn outputs_b(&self) -> &[String] {
        &self.outputs_b
    }

    pub fn verify(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        let idx = ((x * self.inputs_b.len() + y) * self.outputs_a.len() + a)
            * self.outputs_b.len()
            + b;
        self.verify.get(idx)
    }

    pub fn dist(&self, x: usize, y: usize) -> Rational {
        match &self.dist {
            Dist::Uniform => {
                Rational::new(1, (self.inputs_a.len() * self.inputs_b.len()) as i64)
            }
            Dist::Table(t) => t[x * self.inputs_b.len() + y],
        }
    }

    pub fn dist_f64(&self, x: usize, y: usize) -> f64 {
        self.dist(x, y).to_f64().unwrap()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.dist, Dist::Uniform)
    }

    /// Same question sets, same answer sets, and identical questions force
    /// identical answers.
    pub fn is_synchronous(&self) -> bool {
        if self.inputs_a != self.inputs_b || self.outputs_a != self.outputs_b {
            return false;
        }
        for x in 0..self.inputs_a.len() {
            for a in 0..self.outputs_a.len() {
                for b in 0..self.outputs_b.len() {
                    if a != b && self.verify(x, x, a, b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All losing tuples, in lexicographic order.
    pub fn losing_tuples(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for x in 0..self.n_inputs_a() {
            for y in 0..self.n_inputs_b() {
                for a in 0..self.n_outputs_a() {
                    for b in 0..self.n_outputs_b() {
                        if !self.verify(x, y, a, b) {
                            out.push([x, y, a, b]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> GameJson {
        GameJson {
            inputs_a: self.inputs_a.clone(),
            inputs_b: self.inputs_b.clone(),
            outputs_a: self.outputs_a.clone(),
            outputs_b: self.outputs_b.clone(),
            dist: match &self.dist {
                Dist::Uniform => DistJson::Uniform("uniform".into()),
                Dist::Table(t) => DistJson::Table(
                    t.iter().map(|r| [*r.numer(), *r.denom()]).collect(),
                ),
            },
            losing: self.losing_tuples(),
        }
    }

    pub fn from_json(j: &GameJson) -> Result<Self, GameError> {
        let dist = match &j.dist {
            DistJson::Uniform(s) => {
                if s != "uniform" {
                    return Err(GameError::Json(format!("unknown dist {s:?}")));
                }
                Dist::Uniform
            }
            DistJson::Table(t) => Dist::Table(
                t.iter()
                    .map(|[n, d]| {
                        if *d == 0 {
                            Err(GameError::Json("zero denominator in dist".into()))
                        } else {
                            Ok(Rational::new(*n, *d))
                        }
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        Self::from_losing(
            j.inputs_a.clone(),
            j.inputs_b.clone(),
            j.outputs_a.clone(),
            j.outputs_b.clone(),
            dist,
            &j.losing,
        )
    }
}

/// Wire format. Losing tuples are listed because winning tuples dominate in
/// the games built here.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameJson {
    #[serde(rename = "inputsA")]
    pub inputs_a: Vec<String>,
    #[serde(rename = "inputsB")]
    pub inputs_b: Vec<String>,
    #[serde(rename = "outputsA")]
    pub outputs_a: Vec<String>,
    #[serde(rename = "outputsB")]
    pub outputs_b: Vec<String>,
    pub dist: DistJson,
    pub losing: Vec<[usize; 4]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistJson {
    Uniform(String),
    Table(Vec<[i64; 2]>),
}

/// A pair of answer functions, one per player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub f_a: Vec<usize>,
    pub f_b: Vec<usize>,
}

/// Exact classical value with an optimal witness.
#[derive(Clone, Debug)]
pub struct ClassicalValueResult {
    pub value: Rational,
    pub witness: DeterministicStrategy,
}

/// Exact winning probability of a deterministic strategy.
pub fn classical_win_prob(
    g: &NonlocalGame,
    s: &DeterministicStrategy,
) -> Result<Rational, GameError> {
    if s.f_a.len() != g.n_inputs_a() || s.f_b.len() != g.n_inputs_b() {
        return Err(GameError::LabelMismatch(format!(
            "strategy answers {} /{} questions, game has {}/{}",
            s.f_a.len(),
            s.f_b.len(),
            g.n_inputs_a(),
            g.n_inputs_b()
        )));
    }
    if s.f_a.iter().any(|&a| a >= g.n_outputs_a()) || s.f_b.iter().any(|&b| b >= g.n_outputs_b()) {
        return Err(GameError::LabelMismatch("answer index out of range".into()));
    }
    let mut total = Rational::zero();
    for x in 0..g.n_inputs_a() {
        for y in 0..g.n_inputs_b() {
            if g.verify(x, y, s.f_a[x], s.f_b[y]) {
                total += g.dist(x, y);
            }
        }
    }
    Ok(total)
}

fn decode_strategy(mut code: u64, n: usize, radix: usize) -> Vec<usize> {
    let mut f = vec![0usize; n];
    for slot in f.iter_mut() {
        *slot = (code % radix as u64) as usize;
        code /= radix as u64;
    }
    f
}

/// Win count over question pairs weighted by the distribution, as an exact
/// rational.
fn strategy_value(g: &NonlocalGame, fa: &[usize], fb: &[usize]) -> Rational {
    match &g.dist {
        Dist::Uniform => {
            let mut wins: i64 = 0;
            for (x, &a) in fa.iter().enumerate() {
                for (y, &b) in fb.iter().enumerate() {
                    if g.verify(x, y, a, b) {
                        wins += 1;
                    }
                }
            }
            Rational::new(wins, (fa.len() * fb.len()) as i64)
        }
        Dist::Table(_) => {
            let mut total = Rational::zero();
            for (x, &a) in fa.iter().enumerate() {
                for (y, &b) in fb.iter().enumerate() {
                    if g.verify(x, y, a, b) {
                        total += g.dist(x, y);
                    }
                }
            }
            total
        }
    }
}

/// Exact classical value by exhaustive search over all deterministic strategy
/// pairs, guarded by `limit` on the pair count.
pub fn classical_value(g: &NonlocalGame, limit: f64) -> Result<ClassicalValueResult, GameError> {
    classical_value_with(g, limit, EvalBackend::default())
}

pub fn classical_value_with(
    g: &NonlocalGame,
    limit: f64,
    backend: EvalBackend,
) -> Result<ClassicalValueResult, GameError> {
    let count_a = (g.n_outputs_a() as f64).powi(g.n_inputs_a() as i32);
    let count_b = (g.n_outputs_b() as f64).powi(g.n_inputs_b() as i32);
    let cardinality = count_a * count_b;

    // Synchronous fast path: scan the shared-assignment subspace first. It is
    // a lower bound; if it reaches 1 it is the optimum and the general phase
    // can be skipped.
    let mut best: Option<(Rational, DeterministicStrategy)> = None;
    if g.is_synchronous() && count_a <= limit {
        for code in 0..count_a as u64 {
            let f = decode_strategy(code, g.n_inputs_a(), g.n_outputs_a());
            let v = strategy_value(g, &f, &f);
            if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                let hit_one = v == Rational::new(1, 1);
                best = Some((v, DeterministicStrategy { f_a: f.clone(), f_b: f }));
                if hit_one {
                    let (value, witness) = best.unwrap();
                    return Ok(ClassicalValueResult { value, witness });
                }
            }
        }
    }

    if cardinality > limit {
        return Err(GameError::SearchSpaceTooLarge { cardinality, limit });
    }

    let na = g.n_inputs_a();
    let nb = g.n_inputs_b();
    let oa = g.n_outputs_a();
    let ob = g.n_outputs_b();
    let per_fa = map_range(backend, count_a as usize, |ia| {
        let fa = decode_strategy(ia as u64, na, oa);
        let mut local_best: Option<(Rational, u64)> = None;
        for ib in 0..count_b as u64 {
            let fb = decode_strategy(ib, nb, ob);
            let v = strategy_value(g, &fa, &fb);
            if local_best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                local_best = Some((v, ib));
            }
        }
        local_best.map(|(v, ib)| (v, ia as u64, ib))
    });
    for entry in per_fa.into_iter().flatten() {
        let (v, ia, ib) = entry;
        if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
            best = Some((
                v,
                DeterministicStrategy {
                    f_a: decode_strategy(ia, na, oa),
                    f_b: decode_strategy(ib, nb, ob),
                },
            ));
        }
    }
    let (value, witness) = best.expect("non-empty strategy space");
    Ok(ClassicalValueResult { value, witness })
}

// ---------------------------------------------------------------------------
// Perfect-strategy search
// ---------------------------------------------------------------------------

fn full_words(n: usize) -> Vec<u64> {
    let mut words = vec![u64::MAX; n.div_ceil(64)];
    if n % 64 != 0 {
        *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
    }
    words
}

/// Jointly-interchangeable question classes: swapping questions x and x' for
/// both players simultaneously leaves the verification table and the
/// distribution invariant. Sorting Alice's answers within a class is then a
/// sound symmetry reduction for the perfect-strategy search.
fn interchangeable_classes(g: &NonlocalGame) -> Vec<Vec<usize>> {
    let n = g.n_inputs_a();
    if g.n_inputs_b() != n {
        return (0..n).map(|x| vec![x]).collect();
    }
    let swap = |x: usize, p: usize, q: usize| if x == p { q } else if x == q { p } else { x };
    let interchangeable = |p: usize, q: usize| -> bool {
        for x in 0..n {
            for y in 0..n {
                let (sx, sy) = (swap(x, p, q), swap(y, p, q));
                if g.dist(x, y) != g.dist(sx, sy) {
                    return false;
                }
                for a in 0..g.n_outputs_a() {
                    for b in 0..g.n_outputs_b() {
                        if g.verify(x, y, a, b) != g.verify(sx, sy, a, b) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    };
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        let mut placed = false;
        for class in classes.iter_mut() {
            if class.iter().all(|&m| interchangeable(m, x)) {
                class.push(x);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![x]);
        }
    }
    classes
}

/// Backtracking state for the perfect-strategy search. Domains live in one
/// flat word array; forward pruning records overwritten words on a trail so
/// backtracking is a pop loop instead of mask clones.
struct PerfectSearch<'g> {
    g: &'g NonlocalGame,
    na: usize,
    nb: usize,
    /// words per Alice / Bob domain
    wa: usize,
    wb: usize,
    /// Alice domains first (na·wa words), then Bob domains (nb·wb)
    domains: Vec<u64>,
    /// allowed Bob answers per (x, y, a), wb words each; identity rows for
    /// zero-probability pairs
    allowed_b: Vec<u64>,
    /// allowed Alice answers per (x, y, b), wa words each
    allowed_a: Vec<u64>,
    trail: Vec<(u32, u64)>,
    assignment: Vec<usize>,
    order: Vec<usize>,
    /// previous same-class Alice question, for the sorted-answer reduction
    pred: Vec<usize>,
}

impl<'g> PerfectSearch<'g> {
    fn new(g: &'g NonlocalGame) -> Self {
        let (na, nb, oa, ob) =
            (g.n_inputs_a(), g.n_inputs_b(), g.n_outputs_a(), g.n_outputs_b());
        let (wa, wb) = (oa.div_ceil(64), ob.div_ceil(64));
        let active = |x: usize, y: usize| g.dist(x, y) > Rational::zero();

        let mut allowed_b = vec![0u64; na * nb * oa * wb];
        let mut allowed_a = vec![0u64; na * nb * ob * wa];
        for x in 0..na {
            for y in 0..nb {
                let live = active(x, y);
                for a in 0..oa {
                    for b in 0..ob {
                        if !live || g.verify(x, y, a, b) {
                            allowed_b[((x * nb + y) * oa + a) * wb + b / 64] |= 1 << (b % 64);
                            allowed_a[((x * nb + y) * ob + b) * wa + a / 64] |= 1 << (a % 64);
                        }
                    }
                }
            }
        }

        // constraint degree: losing tuples touching the question
        let nvars = na + nb;
        let mut degree = vec![0u64; nvars];
        for x in 0..na {
            for y in 0..nb {
                if !active(x, y) {
                    continue;
                }
                let mut losing = 0u64;
                for a in 0..oa {
                    for b in 0..ob {
                        if !g.verify(x, y, a, b) {
                            losing += 1;
                        }
                    }
                }
                degree[x] += losing;
                degree[na + y] += losing;
            }
        }
        let mut order: Vec<usize> = (0..nvars).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(degree[v]), v));

        let mut pred = vec![usize::MAX; na];
        for class in interchangeable_classes(g) {
            for pair in class.windows(2) {
                pred[pair[1]] = pair[0];
            }
        }

        let mut domains = Vec::with_capacity(na * wa + nb * wb);
        for _ in 0..na {
            domains.extend_from_slice(&full_words(oa));
        }
        for _ in 0..nb {
            domains.extend_from_slice(&full_words(ob));
        }
        PerfectSearch {
            g,
            na,
            nb,
            wa,
            wb,
            domains,
            allowed_b,
            allowed_a,
            trail: Vec::new(),
            assignment: vec![usize::MAX; nvars],
            order,
            pred,
        }
    }

    fn domain_offset(&self, var: usize) -> (usize, usize) {
        if var < self.na {
            (var * self.wa, self.wa)
        } else {
            (self.na * self.wa + (var - self.na) * self.wb, self.wb)
        }
    }

    /// Intersects a domain with an allowed row, recording changes; returns
    /// false when the domain empties.
    fn prune(&mut self, var: usize, row_start: usize, row_words: usize, from_a: bool) -> bool {
        let (off, _) = self.domain_offset(var);
        let mut any = false;
        for w in 0..row_words {
            let old = self.domains[off + w];
            let row = if from_a {
                self.allowed_b[row_start + w]
            } else {
                self.allowed_a[row_start + w]
            };
            let new = old & row;
            if new != old {
                self.trail.push(((off + w) as u32, old));
                self.domains[off + w] = new;
            }
            any |= new != 0;
        }
        any
    }

    fn undo_to(&mut self, checkpoint: usize) {
        while self.trail.len() > checkpoint {
            let (idx, old) = self.trail.pop().unwrap();
            self.domains[idx as usize] = old;
        }
    }

    fn solve(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let var = self.order[depth];
        let (off, words) = self.domain_offset(var);
        let floor = if var < self.na
            && self.pred[var] != usize::MAX
            && self.assignment[self.pred[var]] != usize::MAX
        {
            self.assignment[self.pred[var]]
        } else {
            0
        };
        let snapshot: Vec<u64> = self.domains[off..off + words].to_vec();
        for (wi, &word) in snapshot.iter().enumerate() {
            let mut w = word;
            if wi < floor / 64 {
                continue;
            }
            if wi == floor / 64 {
                w &= u64::MAX << (floor % 64);
            }
            while w != 0 {
                let v = wi * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                self.assignment[var] = v;
                let checkpoint = self.trail.len();
                let mut dead = false;
                if var < self.na {
                    let x = var;
                    for y in 0..self.nb {
                        let other = self.na + y;
                        if self.assignment[other] != usize::MAX {
                            continue;
                        }
                        let row = ((x * self.nb + y) * self.g.n_outputs_a() + v) * self.wb;
                        if !self.prune(other, row, self.wb, true) {
                            dead = true;
                            break;
                        }
                    }
                } else {
                    let y = var - self.na;
                    for x in 0..self.na {
                        if self.assignment[x] != usize::MAX {
                            continue;
                        }
                        let row = ((x * self.nb + y) * self.g.n_outputs_b() + v) * self.wa;
                        if !self.prune(x, row, self.wa, false) {
                            dead = true;
                            break;
                        }
                    }
                }
                if !dead && self.solve(depth + 1) {
                    return true;
                }
                self.undo_to(checkpoint);
                self.assignment[var] = usize::MAX;
            }
        }
        false
    }
}

/// Searches for a perfect deterministic strategy by backtracking over partial
/// answer assignments with forward pruning.
///
/// Variables are the per-question answers of both players, statically ordered
/// by descending constraint degree (the number of losing tuples touching the
/// question). Assigning a value intersects the domains of all future
/// variables sharing a positive-probability question pair; an emptied domain
/// backtracks. Within a jointly-interchangeable question class Alice's
/// answers are required non-decreasing, which collapses the permutation
/// orbit of each candidate strategy to a single canonical representative.
pub fn perfect_classical_exists(g: &NonlocalGame) -> Option<DeterministicStrategy> {
    let mut search = PerfectSearch::new(g);
    if search.solve(0) {
        Some(DeterministicStrategy {
            f_a: search.assignment[..search.na].to_vec(),
            f_b: search.assignment[search.na..].to_vec(),
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn always_win() -> NonlocalGame {
        NonlocalGame::new(
            vec!["x".into()],
            vec!["y".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            |_, _, _, _| true,
        )
        .unwrap()
    }

    #[test]
    fn always_win_game_has_value_one() {
        let g = always_win();
        let r = classical_value(&g, 1e6).unwrap();
        assert_eq!(r.value, Rational::new(1, 1));
        assert_eq!(classical_win_prob(&g, &r.witness).unwrap(), Rational::new(1, 1));
        assert!(perfect_classical_exists(&g).is_some());
    }

    #[test]
    fn one_question_matching_game() {
        // single question, win iff answers agree
        let g = NonlocalGame::new(
            vec!["q".into()],
            vec!["q".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            |_, _, a, b| a == b,
        )
        .unwrap();
        let r = classical_value(&g, 1e6).unwrap();
        assert_eq!(r.value, Rational::new(1, 1));
    }

    #[test]
    fn search_space_guard_reports_cardinality() {
        let g = NonlocalGame::new(
            (0..10).map(|i| format!("x{i}")).collect(),
            (0..10).map(|i| format!("y{i}")).collect(),
            (0..10).map(|i| format!("a{i}")).collect(),
            (0..10).map(|i| format!("b{i}")).collect(),
            Dist::Uniform,
            |_, _, _, _| true,
        )
        .unwrap();
        match classical_value(&g, 1e6) {
            Err(GameError::SearchSpaceTooLarge { cardinality, .. }) => {
                assert!((cardinality - 1e20).abs() / 1e20 < 1e-9);
            }
            other => panic!("expected SearchSpaceTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn win_prob_rejects_mismatched_strategy() {
        let g = always_win();
        let s = DeterministicStrategy { f_a: vec![0, 0], f_b: vec![0] };
        assert!(matches!(classical_win_prob(&g, &s), Err(GameError::LabelMismatch(_))));
    }

    #[test]
    fn synchronicity_detection() {
        let sync = NonlocalGame::new(
            vec!["q0".into(), "q1".into()],
            vec!["q0".into(), "q1".into()],
            vec!["a".into(), "b".into()],
            vec!["a".into(), "b".into()],
            Dist::Uniform,
            |x, y, a, b| if x == y { a == b } else { true },
        )
        .unwrap();
        assert!(sync.is_synchronous());
        let not_sync = NonlocalGame::new(
            vec!["q0".into()],
            vec!["r0".into()],
            vec!["a".into()],
            vec!["a".into()],
            Dist::Uniform,
            |_, _, _, _| true,
        )
        .unwrap();
        assert!(!not_sync.is_synchronous());
    }

    #[test]
    fn synchronicity_invariant_under_question_relabeling() {
        let verify = |x: usize, y: usize, a: usize, b: usize| {
            if x == y {
                a == b
            } else {
                (a + b + x + y) % 2 == 0
            }
        };
        let g = NonlocalGame::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            verify,
        )
        .unwrap();
        // permute questions by the cycle (0 1 2) on both sides
        let perm = [1usize, 2, 0];
        let permuted = NonlocalGame::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            Dist::Uniform,
            |x, y, a, b| verify(perm[x], perm[y], a, b),
        )
        .unwrap();
        assert_eq!(g.is_synchronous(), permuted.is_synchronous());
    }

    #[test]
    fn json_round_trip() {
        let g = NonlocalGame::new(
            vec!["x0".into(), "x1".into()],
            vec!["y0".into()],
            vec!["a0".into(), "a1".into()],
            vec!["b0".into(), "b1".into(), "b2".into()],
            Dist::Uniform,
            |x, _, a, b| (x + a + b) % 2 == 0,
        )
        .unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let parsed: GameJson = serde_json::from_str(&text).unwrap();
        let g2 = NonlocalGame::from_json(&parsed).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                for b in 0..3 {
                    assert_eq!(g.verify(x, 0, a, b), g2.verify(x, 0, a, b));
                }
            }
        }
    }

    #[test]
    fn perfect_search_equals_value_one_on_small_games() {
        // a handful of deterministic small games
        for seed in 0..20u64 {
            let mut state = seed.wrapping_mul(2654435761).wrapping_add(12345);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize
            };
            let (n, o) = (2 + next() % 2, 2 + next() % 2);
            let bits: Vec<bool> = (0..n * n * o * o).map(|_| next() % 3 > 0).collect();
            let g = NonlocalGame::new(
                (0..n).map(|i| format!("x{i}")).collect(),
                (0..n).map(|i| format!("y{i}")).collect(),
                (0..o).map(|i| format!("a{i}")).collect(),
                (0..o).map(|i| format!("b{i}")).collect(),
                Dist::Uniform,
                |x, y, a, b| bits[((x * n + y) * o + a) * o + b],
            )
            .unwrap();
            let exists = perfect_classical_exists(&g);
            let value = classical_value(&g, 1e8).unwrap().value;
            assert_eq!(exists.is_some(), value == Rational::new(1, 1), "seed {seed}");
            if let Some(w) = exists {
                assert_eq!(classical_win_prob(&g, &w).unwrap(), Rational::new(1, 1));
            }
        }
    }
}
