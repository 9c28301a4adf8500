//! Seeded random instances shared by the property tests.

#![allow(dead_code)]

use flowclust::{ExchangeMatrix, FlowMatrix, Membership};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Random flow counts with strictly positive margins. Zeros only occur in
/// symmetric pairs: a one-sided zero drives the quasi-symmetric MLE to the
/// boundary, where the fit legitimately fails to converge.
pub fn random_flow(rng: &mut ChaCha8Rng, n: usize) -> FlowMatrix {
    let mut counts = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.8) {
                counts[(i, j)] = rng.gen_range(1.0..50.0);
                counts[(j, i)] = rng.gen_range(1.0..50.0);
            }
        }
        counts[(i, i)] = rng.gen_range(1.0..10.0);
    }
    FlowMatrix::new(counts, labels(n)).unwrap()
}

/// Symmetric weights on a random spanning tree plus `extra` chords, entries
/// jittered in `[0.8, 1.2]`, optionally with light diagonal mass.
pub fn random_connected(
    rng: &mut ChaCha8Rng,
    n: usize,
    extra: usize,
    diagonal: bool,
) -> ExchangeMatrix {
    let mut s = DMatrix::zeros(n, n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let w = rng.gen_range(0.8..1.2);
        s[(u, v)] = w;
        s[(v, u)] = w;
    }
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < 20 * extra.max(1) {
        attempts += 1;
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j && s[(i, j)] == 0.0 {
            let w = rng.gen_range(0.8..1.2);
            s[(i, j)] = w;
            s[(j, i)] = w;
            added += 1;
        }
    }
    if diagonal {
        for i in 0..n {
            s[(i, i)] = rng.gen_range(0.4..0.8);
        }
    }
    flowclust::to_exchange(&s, &labels(n)).unwrap()
}

/// Random weighted tree (shortest-path equals commute there).
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> ExchangeMatrix {
    random_connected(rng, n, 0, false)
}

/// Connected graph that is guaranteed to contain at least one cycle.
pub fn random_cyclic(rng: &mut ChaCha8Rng, n: usize) -> ExchangeMatrix {
    let extra = 1 + rng.gen_range(0..n.max(2) / 2 + 1);
    random_connected(rng, n, extra, false)
}

/// Positive-definite connected exchange matrix: half the mass of a
/// connected graph plus half its weights on the diagonal, which shifts the
/// normalized spectrum into [0, 1].
pub fn random_pd_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> ExchangeMatrix {
    let base = random_connected(rng, n, extra, false);
    let n = base.n();
    let f = base.weights();
    let mut e = base.matrix() * 0.5;
    for i in 0..n {
        e[(i, i)] += 0.5 * f[i];
    }
    ExchangeMatrix::new(e, base.labels().to_vec()).unwrap()
}

/// Connected zero-diagonal exchange matrix.
pub fn random_diag_free(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> ExchangeMatrix {
    random_connected(rng, n, extra, false)
}

/// Splits vertex `v` into two halves with shares `s` and `1-s`; the two
/// copies (placed at indices `v` and `n`) are equivalent by construction.
pub fn duplicate_vertex(e: &ExchangeMatrix, v: usize, s: f64) -> ExchangeMatrix {
    let n = e.n();
    let m = e.matrix();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            if i != v && j != v {
                out[(i, j)] = m[(i, j)];
            }
        }
    }
    for k in 0..n {
        if k == v {
            continue;
        }
        out[(v, k)] = s * m[(v, k)];
        out[(k, v)] = s * m[(k, v)];
        out[(n, k)] = (1.0 - s) * m[(v, k)];
        out[(k, n)] = (1.0 - s) * m[(k, v)];
    }
    out[(v, v)] = s * s * m[(v, v)];
    out[(n, n)] = (1.0 - s) * (1.0 - s) * m[(v, v)];
    out[(v, n)] = s * (1.0 - s) * m[(v, v)];
    out[(n, v)] = s * (1.0 - s) * m[(v, v)];
    let mut lab = e.labels().to_vec();
    let split = lab[v].clone();
    lab[v] = format!("{split}.a");
    lab.push(format!("{split}.b"));
    ExchangeMatrix::new(out, lab).unwrap()
}

/// Two disconnected complete (rank-one) blocks: all vertices within a block
/// are mutually equivalent, so chi-square distances vanish inside blocks.
pub fn two_block(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> ExchangeMatrix {
    let n = n1 + n2;
    let mass = rng.gen_range(0.3..0.7);
    let mut g1 = DVector::from_iterator(n1, (0..n1).map(|_| rng.gen_range(0.5..1.5)));
    g1 /= g1.sum();
    let mut g2 = DVector::from_iterator(n2, (0..n2).map(|_| rng.gen_range(0.5..1.5)));
    g2 /= g2.sum();
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n1 {
        for j in 0..n1 {
            e[(i, j)] = mass * g1[i] * g1[j];
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            e[(n1 + i, n1 + j)] = (1.0 - mass) * g2[i] * g2[j];
        }
    }
    ExchangeMatrix::new(e, labels(n)).unwrap()
}

/// Random row-stochastic membership.
pub fn random_membership(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Membership {
    let mut z = DMatrix::zeros(n, m);
    for i in 0..n {
        let mut row: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = row.iter().sum();
        for v in &mut row {
            *v /= sum;
        }
        let correction: f64 = 1.0 - row.iter().sum::<f64>();
        row[0] += correction;
        for (g, v) in row.into_iter().enumerate() {
            z[(i, g)] = v;
        }
    }
    Membership::new(z).unwrap()
}
