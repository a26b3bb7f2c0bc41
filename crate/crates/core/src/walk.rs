//! States, coin operations and the conditional shift on `𝒞 ⊗ 𝒲`.
//!
//! Basis ordering is coin-major: `e_{k,j} = |c_k⟩ ⊗ |j⟩` sits at index
//! `k * N + j` (coins and vertices both 0-based). In this ordering the shift
//! is block-diagonal with the `k`-th block equal to the matrix of `P_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::graph::WalkSpec;

/// Tolerance on `‖Q†Q − I‖_max` when accepting coin blocks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on `|‖ψ‖² − 1|` when accepting states.
pub const NORM_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("state is not normalized (‖ψ‖² = {0})")]
    NotNormalized(f64),
    #[error("coin block at vertex {vertex} is not unitary (deviation {deviation:.3e})")]
    NotUnitary { vertex: usize, deviation: f64 },
}

#[inline]
pub fn basis_index(n: usize, coin: usize, vertex: usize) -> usize {
    coin * n + vertex
}

/// `max |Q†Q − I|` over all entries.
pub fn unitarity_deviation(q: &CMatrix) -> f64 {
    let prod = q.adjoint() * q;
    let mut dev: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Unit vector of amplitudes `α_{kj}` over the coin ⊗ walker basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    d: usize,
    n: usize,
    amps: Vec<Complex64>,
}

impl WalkState {
    pub fn new(d: usize, n: usize, amps: Vec<Complex64>) -> Result<WalkState, WalkError> {
        if amps.len() != d * n {
            return Err(WalkError::DimensionMismatch {
                expected: format!("{} amplitudes", d * n),
                got: format!("{}", amps.len()),
            });
        }
        let norm_sqr: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(WalkError::NotNormalized(norm_sqr));
        }
        Ok(WalkState { d, n, amps })
    }

    /// Rescales `amps` to unit norm. Fails only on a zero vector.
    pub fn normalized(d: usize, n: usize, mut amps: Vec<Complex64>) -> Result<WalkState, WalkError> {
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(WalkError::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        WalkState::new(d, n, amps)
    }

    /// `|c_coin⟩ ⊗ |vertex⟩`.
    pub fn basis(d: usize, n: usize, coin: usize, vertex: usize) -> WalkState {
        let mut amps = vec![ZERO; d * n];
        amps[basis_index(n, coin, vertex)] = ONE;
        WalkState { d, n, amps }
    }

    /// `|c⟩ ⊗ |vertex⟩` for an arbitrary unit coin vector `c`.
    pub fn localized(n: usize, coin: &[Complex64], vertex: usize) -> Result<WalkState, WalkError> {
        let d = coin.len();
        let mut amps = vec![ZERO; d * n];
        for (k, &c) in coin.iter().enumerate() {
            amps[basis_index(n, k, vertex)] = c;
        }
        WalkState::new(d, n, amps)
    }

    /// Equal weight on every basis vector.
    pub fn uniform(d: usize, n: usize) -> WalkState {
        let a = Complex64::new(1.0 / ((d * n) as f64).sqrt(), 0.0);
        WalkState {
            d,
            n,
            amps: vec![a; d * n],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amp(&self, coin: usize, vertex: usize) -> Complex64 {
        self.amps[basis_index(self.n, coin, vertex)]
    }

    /// Coin part at one vertex, `(α_{0j}, …, α_{d−1,j})` (not normalized).
    pub fn coin_vector(&self, vertex: usize) -> Vec<Complex64> {
        (0..self.d).map(|k| self.amp(k, vertex)).collect()
    }

    /// Probability weight at one vertex, `√(Σ_k |α_{kj}|²)`.
    pub fn vertex_weight(&self, vertex: usize) -> f64 {
        (0..self.d)
            .map(|k| self.amp(k, vertex).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `p_j = Σ_k |α_{kj}|²`.
    pub fn position_probabilities(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.d).map(|k| self.amp(k, j).norm_sqr()).sum())
            .collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WalkState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|`; global phase does not matter.
    pub fn fidelity(&self, other: &WalkState) -> f64 {
        self.inner(other).norm()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }

    fn check_spec(&self, spec: &WalkSpec) -> Result<(), WalkError> {
        if self.d != spec.d() || self.n != spec.n() {
            return Err(WalkError::DimensionMismatch {
                expected: format!("d={}, n={}", spec.d(), spec.n()),
                got: format!("d={}, n={}", self.d, self.n),
            });
        }
        Ok(())
    }
}

/// Coin tossing operation `C = Σ_j Q_j ⊗ |j⟩⟨j|`: one `d × d` unitary per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinOp {
    d: usize,
    blocks: Vec<CMatrix>,
}

impl CoinOp {
    pub fn new(blocks: Vec<CMatrix>) -> Result<CoinOp, WalkError> {
        let d = blocks.first().map_or(0, |b| b.nrows());
        for (vertex, q) in blocks.iter().enumerate() {
            if q.nrows() != d || q.ncols() != d {
                return Err(WalkError::DimensionMismatch {
                    expected: format!("{d}x{d} block"),
                    got: format!("{}x{} at vertex {vertex}", q.nrows(), q.ncols()),
                });
            }
            let deviation = unitarity_deviation(q);
            if deviation > UNITARY_TOL {
                return Err(WalkError::NotUnitary { vertex, deviation });
            }
        }
        Ok(CoinOp { d, blocks })
    }

    pub fn identity(d: usize, n: usize) -> CoinOp {
        CoinOp {
            d,
            blocks: vec![CMatrix::identity(d, d); n],
        }
    }

    /// The same coin `q` at every vertex.
    pub fn uniform(q: &CMatrix, n: usize) -> Result<CoinOp, WalkError> {
        CoinOp::new(vec![q.clone(); n])
    }

    /// Replaces the block at `vertex`.
    pub fn set_block(&mut self, vertex: usize, q: CMatrix) -> Result<(), WalkError> {
        if q.nrows() != self.d || q.ncols() != self.d {
            return Err(WalkError::DimensionMismatch {
                expected: format!("{0}x{0} block", self.d),
                got: format!("{}x{}", q.nrows(), q.ncols()),
            });
        }
        let deviation = unitarity_deviation(&q);
        if deviation > UNITARY_TOL {
            return Err(WalkError::NotUnitary { vertex, deviation });
        }
        self.blocks[vertex] = q;
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, vertex: usize) -> &CMatrix {
        &self.blocks[vertex]
    }

    /// Vertex-wise product `self · other` (apply `other` first).
    pub fn then_after(&self, other: &CoinOp) -> CoinOp {
        CoinOp {
            d: self.d,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let eye = CMatrix::identity(self.d, self.d);
        self.blocks.iter().all(|q| (q - &eye).camax() <= tol)
    }

    /// Explicit `dN × dN` matrix with `M[(k,j),(i,j)] = (Q_j)_{ki}`.
    pub fn matrix(&self) -> CMatrix {
        let n = self.n();
        let mut m = CMatrix::zeros(self.d * n, self.d * n);
        for (j, q) in self.blocks.iter().enumerate() {
            for k in 0..self.d {
                for i in 0..self.d {
                    m[(basis_index(n, k, j), basis_index(n, i, j))] = q[(k, i)];
                }
            }
        }
        m
    }

    /// Applies `C` in place, one `d`-block per vertex.
    fn apply_in_place(&self, n: usize, amps: &mut [Complex64]) {
        let mut local = vec![ZERO; self.d];
        for (j, q) in self.blocks.iter().enumerate() {
            for (k, slot) in local.iter_mut().enumerate() {
                *slot = (0..self.d).map(|i| q[(k, i)] * amps[basis_index(n, i, j)]).sum();
            }
            for (k, &v) in local.iter().enumerate() {
                amps[basis_index(n, k, j)] = v;
            }
        }
    }
}

/// Conditional shift `S = Σ_k |c_k⟩⟨c_k| ⊗ P_k`.
#[derive(Debug, Clone)]
pub struct ShiftOp<'a> {
    spec: &'a WalkSpec,
}

impl<'a> ShiftOp<'a> {
    pub fn new(spec: &'a WalkSpec) -> Self {
        ShiftOp { spec }
    }

    /// Image of basis index `(k, j)`: `(k, P_k j)`.
    #[inline]
    pub fn target(&self, index: usize) -> usize {
        let n = self.spec.n();
        let (k, j) = (index / n, index % n);
        basis_index(n, k, self.spec.perm(k).apply(j))
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; amps.len()];
        for (index, &a) in amps.iter().enumerate() {
            out[self.target(index)] = a;
        }
        out
    }

    /// Dense 0/1 permutation matrix.
    pub fn matrix(&self) -> CMatrix {
        let dim = self.spec.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for index in 0..dim {
            m[(self.target(index), index)] = ONE;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.spec.shift_order()
    }
}

pub fn coin_matrix(c: &CoinOp) -> CMatrix {
    c.matrix()
}

pub fn shift_matrix(spec: &WalkSpec) -> CMatrix {
    ShiftOp::new(spec).matrix()
}

pub fn shift_order(spec: &WalkSpec) -> usize {
    spec.shift_order()
}

/// One walk step `ψ ↦ S C ψ`.
pub fn step(state: &WalkState, coin: &CoinOp, spec: &WalkSpec) -> Result<WalkState, WalkError> {
    state.check_spec(spec)?;
    if coin.d() != spec.d() || coin.n() != spec.n() {
        return Err(WalkError::DimensionMismatch {
            expected: format!("coin with d={}, n={}", spec.d(), spec.n()),
            got: format!("d={}, n={}", coin.d(), coin.n()),
        });
    }
    let mut amps = state.amps.clone();
    coin.apply_in_place(spec.n(), &mut amps);
    Ok(WalkState {
        d: state.d,
        n: state.n,
        amps: ShiftOp::new(spec).apply(&amps),
    })
}

/// Applies `S C_m ⋯ S C_1` with `coins[0] = C_1` acting first.
pub fn apply_sequence(state: &WalkState, coins: &[CoinOp], spec: &WalkSpec) -> Result<WalkState, WalkError> {
    state.check_spec(spec)?;
    coins.iter().try_fold(state.clone(), |psi, c| step(&psi, c, spec))
}

pub fn position_probabilities(state: &WalkState) -> Vec<f64> {
    state.position_probabilities()
}
