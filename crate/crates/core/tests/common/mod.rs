//! Shared helpers for the integration suites: seeded randomness, random
//! states/POVMs/unitaries, and independent brute-force oracles.
#![allow(dead_code)] // each test binary uses a different subset

use nonlocal_core::numerics::{
    hermitian_eigen, BipartiteState, ComplexMatrix, Tolerance, C64,
};
use nonlocal_core::strategies::QuantumStrategy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed default seed; override with env NLG_SEED for exploration.
pub fn rng() -> ChaCha8Rng {
    let seed = std::env::var("NLG_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed_2024);
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_state(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize) -> BipartiteState {
    let mut amp: Vec<C64> = (0..dim_a * dim_b).map(|_| random_complex(rng)).collect();
    let norm = amp.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in amp.iter_mut() {
        *c /= norm;
    }
    BipartiteState::new(dim_a, dim_b, amp, Tolerance::default()).unwrap()
}

fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..dim * dim).map(|_| random_complex(rng)).collect();
    let g = ComplexMatrix::new(dim, dim, entries).unwrap();
    g.adjoint().mul(&g)
}

/// S^(-1/2) of a positive definite matrix through its eigendecomposition.
fn inv_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m).unwrap();
    let d = m.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        let w = 1.0 / vals[k].max(1e-12).sqrt();
        for i in 0..d {
            for j in 0..d {
                let add = vecs.at(i, k) * vecs.at(j, k).conj() * w;
                out.set(i, j, out.at(i, j) + add);
            }
        }
    }
    out
}

/// Random POVM with `n` outcomes on C^dim.
pub fn random_povm(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<ComplexMatrix> {
    let parts: Vec<ComplexMatrix> = (0..n).map(|_| random_psd(rng, dim)).collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in &parts {
        total = total.add(p);
    }
    let w = inv_sqrt(&total);
    parts.iter().map(|p| w.mul(p).mul(&w)).collect()
}

/// Random unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| random_complex(rng)).collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random strategy with full-rank state on C^r ⊗ C^r.
pub fn random_strategy(
    rng: &mut ChaCha8Rng,
    rank: usize,
    questions: usize,
    answers: usize,
) -> QuantumStrategy {
    let povms_a = (0..questions).map(|_| random_povm(rng, rank, answers)).collect();
    let povms_b = (0..questions).map(|_| random_povm(rng, rank, answers)).collect();
    QuantumStrategy::new(
        random_state(rng, rank, rank),
        povms_a,
        povms_b,
        Tolerance::default(),
    )
    .unwrap()
}

/// Pads a strategy into larger spaces: the state gains zero amplitudes, each
/// operator gains an arbitrary POVM block on the orthogonal complement. The
/// supports stay invariant and the correlation is untouched, but the state
/// becomes rank-deficient relative to its spaces.
pub fn pad_strategy(
    rng: &mut ChaCha8Rng,
    s: &QuantumStrategy,
    dim_a: usize,
    dim_b: usize,
) -> QuantumStrategy {
    let (ra, rb) = (s.dim_a(), s.dim_b());
    assert!(dim_a >= ra && dim_b >= rb);
    let embed = |m: &ComplexMatrix, fill: &ComplexMatrix, d: usize, r: usize| {
        ComplexMatrix::from_fn(d, d, |i, j| {
            if i < r && j < r {
                m.at(i, j)
            } else if i >= r && j >= r {
                fill.at(i - r, j - r)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let pad_side = |povms: &[Vec<ComplexMatrix>], d: usize, r: usize, rng: &mut ChaCha8Rng| {
        povms
            .iter()
            .map(|family| {
                let fills = if d > r {
                    random_povm(rng, d - r, family.len())
                } else {
                    vec![ComplexMatrix::zeros(0, 0); family.len()]
                };
                family
                    .iter()
                    .zip(fills)
                    .map(|(op, fill)| embed(op, &fill, d, r))
                    .collect()
            })
            .collect()
    };
    let povms_a = pad_side(s.povms_a(), dim_a, ra, rng);
    let povms_b = pad_side(s.povms_b(), dim_b, rb, rng);
    let mut amp = vec![C64::new(0.0, 0.0); dim_a * dim_b];
    for i in 0..ra {
        for j in 0..rb {
            amp[i * dim_b + j] = s.state().amplitude(i, j);
        }
    }
    QuantumStrategy::new(
        BipartiteState::new(dim_a, dim_b, amp, Tolerance::default()).unwrap(),
        povms_a,
        povms_b,
        Tolerance::default(),
    )
    .unwrap()
}

/// Conjugates a strategy by local unitaries: state (U⊗V)ψ, operators UEU†
/// and VFV†. Correlations are invariant.
pub fn rotate_strategy(
    s: &QuantumStrategy,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> QuantumStrategy {
    let m = s.state().amplitude_matrix();
    let rotated = u.mul(&m).mul(&v.transpose());
    let conj_a = |e: &ComplexMatrix| u.mul(e).mul(&u.adjoint());
    let conj_b = |f: &ComplexMatrix| v.mul(f).mul(&v.adjoint());
    QuantumStrategy::new(
        BipartiteState::from_matrix(&rotated, Tolerance::default()).unwrap(),
        s.povms_a().iter().map(|fam| fam.iter().map(&conj_a).collect()).collect(),
        s.povms_b().iter().map(|fam| fam.iter().map(&conj_b).collect()).collect(),
        Tolerance::default(),
    )
    .unwrap()
}

/// Exact independence number by subset dynamic programming (n ≤ 20).
pub fn brute_force_alpha(n: usize, edges: &[(usize, usize)]) -> usize {
    assert!(n <= 20);
    let mut adj = vec![0u32; n];
    for &(u, v) in edges {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let total = 1usize << n;
    let mut independent = vec![false; total];
    independent[0] = true;
    let mut best = 0;
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        independent[mask] = independent[rest] && (adj[low] as usize & mask) == 0;
        if independent[mask] {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Random graph edges with the given density.
pub fn random_graph_edges(
    rng: &mut ChaCha8Rng,
    n: usize,
    density: f64,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    edges
}
