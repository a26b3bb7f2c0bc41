#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qwalk::{CMatrix, CoinOp, Permutation, WalkSpec, WalkState};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-ish random unitary: QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    g.qr().q()
}

pub fn random_coin<R: Rng>(rng: &mut R, d: usize, n: usize) -> CoinOp {
    CoinOp::new((0..n).map(|_| random_unitary(rng, d)).collect()).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, d: usize, n: usize) -> WalkState {
    WalkState::normalized(d, n, (0..d * n).map(|_| gaussian(rng)).collect()).unwrap()
}

fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    map
}

/// Fixed-point-free permutation with no 2-cycles, so that it and its inverse can both be coins.
fn random_long_cycles<R: Rng>(rng: &mut R, n: usize) -> Option<Vec<usize>> {
    for _ in 0..200 {
        let p = random_perm(rng, n);
        if (0..n).all(|j| p[j] != j && p[p[j]] != j) {
            return Some(p);
        }
    }
    None
}

fn random_matching<R: Rng>(rng: &mut R, n: usize) -> Option<Vec<usize>> {
    if n % 2 == 1 {
        return None;
    }
    let order = random_perm(rng, n);
    let mut map = vec![0; n];
    for pair in order.chunks(2) {
        map[pair[0]] = pair[1];
        map[pair[1]] = pair[0];
    }
    Some(map)
}

/// Random valid walk with `3 ≤ N ≤ max_n` and `2 ≤ d ≤ max_d`, assembled from
/// inverse pairs `{P, P⁻¹}` and perfect matchings, then filtered by validation.
pub fn random_spec<R: Rng>(rng: &mut R, max_n: usize, max_d: usize) -> WalkSpec {
    loop {
        let n = rng.random_range(3..=max_n);
        let d = rng.random_range(2..=max_d);
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut ok = true;
        while perms.len() < d && ok {
            let room = d - perms.len();
            let use_pair = room >= 2 && (n % 2 == 1 || rng.random_bool(0.5));
            if use_pair {
                match random_long_cycles(rng, n) {
                    Some(p) => {
                        let inv = Permutation::new(p.clone()).unwrap().inverse();
                        perms.push(p);
                        perms.push(inv.into());
                    }
                    None => ok = false,
                }
            } else {
                match random_matching(rng, n) {
                    Some(m) => perms.push(m),
                    None => ok = false,
                }
            }
        }
        if !ok {
            continue;
        }
        perms.shuffle(rng);
        if let Ok(spec) = WalkSpec::validate(n, perms) {
            return spec;
        }
    }
}

/// Real coordinates `(Re, Im)` of every entry; deliberately unrelated to the
/// library's compact skew-Hermitian encoding.
fn flatten(m: &CMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(v: &[f64], n: usize) -> CMatrix {
    CMatrix::from_iterator(n, n, v.chunks(2).map(|p| Complex64::new(p[0], p[1])))
}

/// Orthonormal basis of the span of `vectors` via the eigen-decomposition of the
/// Gram operator `Σ v vᵀ`.
fn span_basis(vectors: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    let mut gram = DMatrix::<f64>::zeros(len, len);
    for v in vectors {
        let col = nalgebra::DVector::from_column_slice(v);
        gram += &col * col.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    (0..len)
        .filter(|&i| eig.eigenvalues[i] > 1e-9 * top.max(1.0))
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

/// Generators `Sᵏ A S⁻ᵏ` for `k = 0…r−1`, `A` running over a basis of the
/// vertex-wise coin algebra `⊕_j u(d)`.
pub fn conjugated_coin_generators(spec: &WalkSpec) -> Vec<CMatrix> {
    let (d, n) = (spec.d(), spec.n());
    let s = qwalk::shift_matrix(spec);
    let mut out = Vec::new();
    let mut sk = CMatrix::identity(d * n, d * n);
    for _ in 0..spec.shift_order() {
        for j in 0..n {
            for a in 0..d {
                for b in 0..d {
                    let mut local = CMatrix::zeros(d, d);
                    if a == b {
                        local[(a, a)] = Complex64::i();
                    } else if a < b {
                        local[(a, b)] = Complex64::new(1.0, 0.0);
                        local[(b, a)] = Complex64::new(-1.0, 0.0);
                    } else {
                        local[(a, b)] = Complex64::i();
                        local[(b, a)] = Complex64::i();
                    }
                    let mut blocks = vec![CMatrix::zeros(d, d); n];
                    blocks[j] = local;
                    let mut big = CMatrix::zeros(d * n, d * n);
                    for (v, q) in blocks.iter().enumerate() {
                        for r in 0..d {
                            for c in 0..d {
                                big[(r * n + v, c * n + v)] = q[(r, c)];
                            }
                        }
                    }
                    out.push(&sk * big * sk.adjoint());
                }
            }
        }
        sk = &s * sk;
    }
    out
}

/// Dimension of the real Lie algebra generated by `gens`, by brute force:
/// bracket every pair of the current basis, re-span, repeat until stable.
pub fn oracle_closure_dim(gens: &[CMatrix]) -> usize {
    oracle_closure(gens).len()
}

pub fn oracle_closure(gens: &[CMatrix]) -> Vec<CMatrix> {
    let n = gens[0].nrows();
    let len = 2 * n * n;
    let mut basis = span_basis(&gens.iter().map(flatten).collect::<Vec<_>>(), len);
    loop {
        let mats: Vec<CMatrix> = basis.iter().map(|v| unflatten(v, n)).collect();
        let mut vectors = basis.clone();
        for i in 0..mats.len() {
            for j in 0..i {
                vectors.push(flatten(&(&mats[i] * &mats[j] - &mats[j] * &mats[i])));
            }
        }
        let next = span_basis(&vectors, len);
        if next.len() == basis.len() || next.len() == n * n {
            return next.iter().map(|v| unflatten(v, n)).collect();
        }
        basis = next;
    }
}

/// Distance from `m` to the real span of `basis` (Frobenius norm).
pub fn distance_to_span(m: &CMatrix, basis: &[CMatrix]) -> f64 {
    let target = flatten(m);
    let cols: Vec<Vec<f64>> = basis.iter().map(flatten).collect();
    let mut residual = target.clone();
    for _ in 0..2 {
        for q in &cols {
            let norm2: f64 = q.iter().map(|x| x * x).sum();
            let c: f64 = q.iter().zip(&residual).map(|(a, b)| a * b).sum::<f64>() / norm2;
            residual.iter_mut().zip(q).for_each(|(r, x)| *r -= c * x);
        }
    }
    residual.iter().map(|x| x * x).sum::<f64>().sqrt()
}
