//! Numerical closure of the dynamical Lie algebra.
//!
//! Skew-Hermitian `n × n` matrices are handled as real vectors of length `n²`:
//! `Im M_aa` on the diagonal slots, `√2 Re M_ab` and `√2 Im M_ab` (`a < b`) in the
//! upper and lower slots. The map is an isometry for the Frobenius inner product,
//! so orthonormality and rank decisions carry over unchanged.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllability::{analyze, joint_orbit, AnalysisError};
use crate::graph::WalkSpec;
use crate::parallel;
use crate::walk::{basis_index, CMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_CAP: usize = 24;
/// Candidates bracketed per parallel batch before the serial acceptance pass.
const BATCH: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("rank decision is ambiguous: residual ratio {ratio:.3e} is within a factor 10 of tol {tol:.1e}")]
    ToleranceDegenerate { ratio: f64, tol: f64 },
    #[error("dN = {dim} exceeds the closure cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("generator basis is empty")]
    EmptyBasis,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Position of an elementary generator; `a`, `b` are flattened `coin * N + vertex` indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `i E_aa`
    Diagonal { a: usize },
    /// `E_ab − E_ba`
    Antisymmetric { a: usize, b: usize },
    /// `i (E_ab + E_ba)`
    Symmetric { a: usize, b: usize },
}

#[derive(Clone)]
pub struct GeneratorBasis {
    /// Side length `dN` of the matrices.
    pub size: usize,
    pub mats: Vec<CMatrix>,
    pub kinds: Vec<GeneratorKind>,
}

impl fmt::Debug for GeneratorBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorBasis")
            .field("size", &self.size)
            .field("len", &self.mats.len())
            .finish()
    }
}

impl GeneratorBasis {
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Builds a basis from arbitrary skew-Hermitian matrices (kinds left empty).
    pub fn from_matrices(size: usize, mats: Vec<CMatrix>) -> GeneratorBasis {
        GeneratorBasis {
            size,
            mats,
            kinds: Vec::new(),
        }
    }
}

fn elementary(size: usize, kind: GeneratorKind) -> CMatrix {
    let mut m = CMatrix::zeros(size, size);
    let i = Complex64::i();
    match kind {
        GeneratorKind::Diagonal { a } => m[(a, a)] = i,
        GeneratorKind::Antisymmetric { a, b } => {
            m[(a, b)] = Complex64::new(1.0, 0.0);
            m[(b, a)] = Complex64::new(-1.0, 0.0);
        }
        GeneratorKind::Symmetric { a, b } => {
            m[(a, b)] = i;
            m[(b, a)] = i;
        }
    }
    m
}

/// Unordered position pairs `{(l,r),(m,s)}` with `(r,s) ∈ 𝒪_{l,m}`, as flattened `(a, b)`, `a < b`.
pub fn admissible_pairs(spec: &WalkSpec) -> Vec<(usize, usize)> {
    let n = spec.n();
    let mut out = Vec::new();
    for l in 0..spec.d() {
        for m in l + 1..spec.d() {
            let orbit = joint_orbit(spec, l, m).expect("coin indices in range");
            for &(r, s) in &orbit.pairs {
                let (a, b) = (basis_index(n, l, r), basis_index(n, m, s));
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    // l = m contributes only the diagonal, already covered by iE_aa
    out.sort_unstable();
    out.dedup();
    out
}

/// Elementary skew-Hermitian matrices spanning the support pattern of the
/// generating set: every `iE_aa`, then two generators per admissible pair.
pub fn generator_basis(spec: &WalkSpec) -> GeneratorBasis {
    let size = spec.dim();
    let mut kinds: Vec<GeneratorKind> = (0..size).map(|a| GeneratorKind::Diagonal { a }).collect();
    for (a, b) in admissible_pairs(spec) {
        kinds.push(GeneratorKind::Antisymmetric { a, b });
        kinds.push(GeneratorKind::Symmetric { a, b });
    }
    let mats = kinds.iter().map(|&k| elementary(size, k)).collect();
    GeneratorBasis { size, mats, kinds }
}

/// Real coordinates of a skew-Hermitian matrix (only the upper triangle and diagonal are read).
pub fn to_real_vector(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut v = vec![0.0; n * n];
    for a in 0..n {
        v[a * n + a] = m[(a, a)].im;
        for b in a + 1..n {
            v[a * n + b] = s * m[(a, b)].re;
            v[b * n + a] = s * m[(a, b)].im;
        }
    }
    v
}

pub fn from_real_vector(v: &[f64], n: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = Complex64::new(0.0, v[a * n + a]);
        for b in a + 1..n {
            let z = Complex64::new(s * v[a * n + b], s * v[b * n + a]);
            m[(a, b)] = z;
            m[(b, a)] = -z.conj();
        }
    }
    m
}

/// `[A, B] = AB − BA`.
pub fn bracket(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `max |M + M†|`.
pub fn skew_hermitian_deviation(m: &CMatrix) -> f64 {
    (m + m.adjoint()).camax()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of modified Gram–Schmidt against `basis`.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            if c != 0.0 {
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
    }
}

/// Orthonormal real basis of a growing span of skew-Hermitian matrices.
struct Span {
    size: usize,
    tol: f64,
    vecs: Vec<Vec<f64>>,
    mats: Vec<CMatrix>,
}

/// A candidate after projection onto a frozen prefix of the span.
struct Candidate {
    pre_norm: f64,
    residual: Vec<f64>,
}

impl Span {
    fn full(&self) -> bool {
        self.vecs.len() >= self.size * self.size
    }

    fn prepare(&self, m: &CMatrix, frozen: usize) -> Option<Candidate> {
        let mut residual = to_real_vector(m);
        let pre_norm = norm(&residual);
        if pre_norm < self.tol {
            return None;
        }
        project_out(&mut residual, &self.vecs[..frozen]);
        Some(Candidate { pre_norm, residual })
    }

    /// Finishes the projection against elements added after `frozen` and accepts if independent.
    fn accept(&mut self, mut cand: Candidate, frozen: usize) -> Result<bool, LieError> {
        project_out(&mut cand.residual, &self.vecs[frozen..]);
        let r = norm(&cand.residual);
        let ratio = r / cand.pre_norm;
        if ratio >= self.tol / 10.0 && ratio <= self.tol * 10.0 {
            return Err(LieError::ToleranceDegenerate { ratio, tol: self.tol });
        }
        if ratio <= self.tol || self.full() {
            return Ok(false);
        }
        cand.residual.iter_mut().for_each(|x| *x /= r);
        self.mats.push(from_real_vector(&cand.residual, self.size));
        self.vecs.push(cand.residual);
        Ok(true)
    }
}

/// Result of a closure run.
#[derive(Debug, Clone)]
pub struct Closure {
    pub dim: usize,
    /// Bracketing rounds performed (the initial span counts as round 0).
    pub iterations: usize,
    /// Orthonormal basis of the closure.
    pub elements: Vec<CMatrix>,
}

/// Closes `basis` under commutators. Deterministic for a given input order.
pub fn lie_closure(basis: &GeneratorBasis, tol: f64) -> Result<Closure, LieError> {
    if basis.is_empty() {
        return Err(LieError::EmptyBasis);
    }
    if !(tol > 0.0) {
        return Err(LieError::BadTolerance(tol));
    }
    let mut span = Span {
        size: basis.size,
        tol,
        vecs: Vec::new(),
        mats: Vec::new(),
    };
    for m in &basis.mats {
        let frozen = span.vecs.len();
        if let Some(c) = span.prepare(m, frozen) {
            span.accept(c, frozen)?;
        }
    }

    let mut done = 0;
    let mut iterations = 0;
    while done < span.vecs.len() && !span.full() {
        iterations += 1;
        let end = span.vecs.len();
        let pairs: Vec<(usize, usize)> = (done..end).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        for chunk in pairs.chunks(BATCH) {
            if span.full() {
                break;
            }
            let frozen = span.vecs.len();
            let prepared: Vec<Option<Candidate>> = parallel::install(|| {
                chunk
                    .par_iter()
                    .map(|&(i, j)| span.prepare(&bracket(&span.mats[i], &span.mats[j]), frozen))
                    .collect()
            });
            for cand in prepared.into_iter().flatten() {
                span.accept(cand, frozen)?;
                if span.full() {
                    break;
                }
            }
        }
        done = end;
    }
    Ok(Closure {
        dim: span.vecs.len(),
        iterations,
        elements: span.mats,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieClosureResult {
    pub dim: usize,
    pub predicted: usize,
    #[serde(rename = "match")]
    pub matched: bool,
    pub iterations: usize,
}

/// Dimension of the closure. `predicted` is `(dN)²` here; [`verify_structure`]
/// fills in the component-based prediction.
pub fn lie_closure_dim(basis: &GeneratorBasis, tol: f64) -> Result<LieClosureResult, LieError> {
    let c = lie_closure(basis, tol)?;
    let predicted = basis.size * basis.size;
    Ok(LieClosureResult {
        dim: c.dim,
        predicted,
        matched: c.dim == predicted,
        iterations: c.iterations,
    })
}

/// Largest entry of `m` linking two different blocks of `labels`.
pub fn off_block_magnitude(m: &CMatrix, labels: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            if labels[a] != labels[b] {
                worst = worst.max(m[(a, b)].norm());
            }
        }
    }
    worst
}

/// Block label (component index) of each flattened position `coin * N + vertex`.
pub fn position_blocks(spec: &WalkSpec, components: &[Vec<usize>]) -> Vec<usize> {
    let mut vertex_label = vec![0; spec.n()];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            vertex_label[v] = c;
        }
    }
    (0..spec.dim()).map(|a| vertex_label[a % spec.n()]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCheck {
    #[serde(flatten)]
    pub result: LieClosureResult,
    pub block_diagonal: bool,
    pub max_off_block: f64,
}

pub fn verify_structure(spec: &WalkSpec) -> Result<StructureCheck, LieError> {
    verify_structure_with(spec, DEFAULT_TOL, DEFAULT_CAP)
}

/// Closure dimension against the predicted one, plus the block-diagonal check
/// in the component ordering.
pub fn verify_structure_with(spec: &WalkSpec, tol: f64, cap: usize) -> Result<StructureCheck, LieError> {
    if spec.dim() > cap {
        return Err(LieError::CapExceeded { dim: spec.dim(), cap });
    }
    let report = analyze(spec)?;
    let closure = lie_closure(&generator_basis(spec), tol)?;
    let labels = position_blocks(spec, &report.components);
    let max_off_block = closure
        .elements
        .iter()
        .map(|m| off_block_magnitude(m, &labels))
        .fold(0.0, f64::max);
    Ok(StructureCheck {
        result: LieClosureResult {
            dim: closure.dim,
            predicted: report.predicted_lie_dim,
            matched: closure.dim == report.predicted_lie_dim,
            iterations: closure.iterations,
        },
        block_diagonal: max_off_block < 1e-9,
        max_off_block,
    })
}

/// Dense real matrix whose columns are the vectorized elements; handy for rank checks.
pub fn stack_real(mats: &[CMatrix]) -> DMatrix<f64> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut out = DMatrix::zeros(n * n, mats.len());
    for (c, m) in mats.iter().enumerate() {
        for (r, x) in to_real_vector(m).into_iter().enumerate() {
            out[(r, c)] = x;
        }
    }
    out
}
