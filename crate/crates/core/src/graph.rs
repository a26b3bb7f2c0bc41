//! Walk specifications: a connected regular graph together with the `d`
//! coin-conditioned permutations that move the walker along its edges.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{lcm, PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("walk needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("walk needs degree at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("permutation {perm} has length {len}, expected {n}")]
    LengthMismatch { perm: usize, len: usize, n: usize },
    #[error("permutation {perm} is not a bijection ({source})")]
    NotBijection { perm: usize, source: PermError },
    #[error("permutation {perm} fixes vertex {vertex} (self-loop)")]
    SelfLoop { perm: usize, vertex: usize },
    /// Two coin values move `vertex` to the same neighbour. This is also the
    /// only way an adjacency entry can exceed 1 (a multi-edge).
    #[error("permutations {first} and {second} both send vertex {vertex} to {target}")]
    CoinCollision {
        vertex: usize,
        first: usize,
        second: usize,
        target: usize,
    },
    #[error("transition {from} -> {to} has no reverse transition")]
    NotSymmetric { from: usize, to: usize },
    #[error("graph is disconnected: vertex {unreached} is not reachable from vertex 0")]
    Disconnected { unreached: usize },
    #[error("{0}")]
    Parity(String),
    #[error("unknown builtin walk {0:?}")]
    UnknownBuiltin(String),
}

/// A validated walk. Immutable once built.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct WalkSpec {
    n: usize,
    perms: Vec<Permutation>,
    neighbors: Vec<Vec<usize>>,
}

/// Unvalidated wire form: `{"n": 6, "perms": [[1,2,3,4,5,0], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSpec {
    pub n: usize,
    pub perms: Vec<Vec<usize>>,
}

impl TryFrom<RawSpec> for WalkSpec {
    type Error = SpecError;
    fn try_from(raw: RawSpec) -> Result<Self, SpecError> {
        WalkSpec::validate(raw.n, raw.perms)
    }
}

impl From<WalkSpec> for RawSpec {
    fn from(spec: WalkSpec) -> Self {
        RawSpec {
            n: spec.n,
            perms: spec.perms.into_iter().map(Vec::from).collect(),
        }
    }
}

impl std::fmt::Debug for WalkSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WalkSpec")
            .field("n", &self.n)
            .field("perms", &self.perms.iter().map(|p| p.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

impl WalkSpec {
    /// Checks every compatibility condition between the permutations and the graph they induce.
    pub fn validate(n: usize, perms: Vec<Vec<usize>>) -> Result<WalkSpec, SpecError> {
        for (perm, raw) in perms.iter().enumerate() {
            if raw.len() != n {
                return Err(SpecError::LengthMismatch {
                    perm,
                    len: raw.len(),
                    n,
                });
            }
        }
        let perms = perms
            .into_iter()
            .enumerate()
            .map(|(perm, raw)| {
                Permutation::new(raw).map_err(|source| SpecError::NotBijection { perm, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        WalkSpec::from_permutations(n, perms)
    }

    pub fn from_permutations(n: usize, perms: Vec<Permutation>) -> Result<WalkSpec, SpecError> {
        if n < 3 {
            return Err(SpecError::TooFewVertices(n));
        }
        if perms.len() < 2 {
            return Err(SpecError::DegreeTooSmall(perms.len()));
        }
        for (perm, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(SpecError::LengthMismatch {
                    perm,
                    len: p.len(),
                    n,
                });
            }
            if let Some(vertex) = p.fixed_points().next() {
                return Err(SpecError::SelfLoop { perm, vertex });
            }
        }
        for vertex in 0..n {
            for first in 0..perms.len() {
                for second in first + 1..perms.len() {
                    let target = perms[first].apply(vertex);
                    if target == perms[second].apply(vertex) {
                        return Err(SpecError::CoinCollision {
                            vertex,
                            first,
                            second,
                            target,
                        });
                    }
                }
            }
        }
        // After the collision check every adjacency entry is 0 or 1.
        let mut adjacency = vec![vec![false; n]; n];
        for p in &perms {
            for j in 0..n {
                adjacency[j][p.apply(j)] = true;
            }
        }
        for from in 0..n {
            for to in 0..n {
                if adjacency[from][to] && !adjacency[to][from] {
                    return Err(SpecError::NotSymmetric { from, to });
                }
            }
        }
        let neighbors: Vec<Vec<usize>> = adjacency
            .iter()
            .map(|row| (0..n).filter(|&l| row[l]).collect())
            .collect();

        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &w in &neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|s| !s) {
            return Err(SpecError::Disconnected { unreached });
        }

        Ok(WalkSpec { n, perms, neighbors })
    }

    /// Number of vertices `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Degree `d` (number of coin values).
    pub fn d(&self) -> usize {
        self.perms.len()
    }

    /// Dimension `dN` of the coin ⊗ walker space.
    pub fn dim(&self) -> usize {
        self.n * self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn perm(&self, coin: usize) -> &Permutation {
        &self.perms[coin]
    }

    /// Sorted neighbours of `j` in the underlying graph.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// `Σ_k P_k` as a dense 0/1 matrix, `A[l][j] = 1` iff some `P_k` sends `j` to `l`.
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.n]; self.n];
        for p in &self.perms {
            for j in 0..self.n {
                a[p.apply(j)][j] += 1;
            }
        }
        a
    }

    /// The coin value moving `from` to `to`, if they are adjacent.
    pub fn coin_between(&self, from: usize, to: usize) -> Option<usize> {
        self.perms.iter().position(|p| p.apply(from) == to)
    }

    /// Order `r` of the conditional shift: lcm of the permutation orders.
    pub fn shift_order(&self) -> usize {
        self.perms.iter().map(Permutation::order).fold(1, lcm)
    }

    /// Cartesian-product walk. Vertex `(j, k)` is flattened to `j * b.n() + k`;
    /// the first `a.d()` coins act on the first factor, the rest on the second.
    pub fn product(a: &WalkSpec, b: &WalkSpec) -> Result<WalkSpec, SpecError> {
        let (n1, n2) = (a.n, b.n);
        let mut perms = Vec::with_capacity(a.d() + b.d());
        for p in &a.perms {
            let map = (0..n1 * n2)
                .map(|v| p.apply(v / n2) * n2 + v % n2)
                .collect();
            perms.push(map);
        }
        for q in &b.perms {
            let map = (0..n1 * n2)
                .map(|v| (v / n2) * n2 + q.apply(v % n2))
                .collect();
            perms.push(map);
        }
        WalkSpec::validate(n1 * n2, perms)
    }

    /// Cycle walk with `P₊ = j ↦ j+1` and `P₋ = j ↦ j−1`.
    pub fn cycle_shift(n: usize) -> Result<WalkSpec, SpecError> {
        WalkSpec::from_permutations(
            n,
            vec![Permutation::rotation(n, 1), Permutation::rotation(n, -1)],
        )
    }

    /// Cycle walk whose coins are alternating adjacent transpositions:
    /// `(0 1)(2 3)…` and `(1 2)(3 4)…(N−1 0)`. Only exists for even `N`.
    pub fn cycle_exchange(n: usize) -> Result<WalkSpec, SpecError> {
        if n % 2 != 0 {
            return Err(SpecError::Parity(format!(
                "exchange walk on a cycle is possible only when N is even (N = {n})"
            )));
        }
        let plus = (0..n).map(|j| j ^ 1).collect();
        let minus = (0..n)
            .map(|j| if j % 2 == 1 { (j + 1) % n } else { (j + n - 1) % n })
            .collect();
        WalkSpec::validate(n, vec![plus, minus])
    }

    /// Complete graph `K_N` with the circulant coins `j ↦ j + k`, `k = 1…N−1`.
    pub fn complete(n: usize) -> Result<WalkSpec, SpecError> {
        WalkSpec::from_permutations(
            n,
            (1..n as i64).map(|k| Permutation::rotation(n, k)).collect(),
        )
    }

    /// Six-vertex degree-3 example: `P₊ = (0 1 2 3 4 5)`, `P₋ = (0 5 4 3 2 1)`, `P_c = (0 3)(1 5)(2 4)`.
    pub fn figure1() -> WalkSpec {
        WalkSpec::validate(
            6,
            vec![
                vec![1, 2, 3, 4, 5, 0],
                vec![5, 0, 1, 2, 3, 4],
                vec![3, 5, 4, 0, 2, 1],
            ],
        )
        .expect("figure-1 walk is valid")
    }

    pub fn torus(n1: usize, n2: usize) -> Result<WalkSpec, SpecError> {
        WalkSpec::product(&WalkSpec::cycle_shift(n1)?, &WalkSpec::cycle_shift(n2)?)
    }

    /// Named gallery walks: `cycle_shift(N)`, `cycle_exchange(N)`, `complete(N)`,
    /// `figure1`, `torus(N1,N2)`. A colon form such as `torus:3,3` also works.
    pub fn builtin(name: &str) -> Result<WalkSpec, SpecError> {
        let name = name.trim();
        let (head, args) = match name.find(['(', ':']) {
            Some(pos) => (
                &name[..pos],
                name[pos + 1..].trim_end_matches(')').to_string(),
            ),
            None => (name, String::new()),
        };
        let params = args
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SpecError::UnknownBuiltin(name.to_string()))?;
        let unknown = || SpecError::UnknownBuiltin(name.to_string());
        match (head, params.as_slice()) {
            ("cycle_shift" | "cycle", [n]) => WalkSpec::cycle_shift(*n),
            ("cycle_exchange", [n]) => WalkSpec::cycle_exchange(*n),
            ("complete", [n]) => WalkSpec::complete(*n),
            ("figure1", []) => Ok(WalkSpec::figure1()),
            ("torus", [a, b]) => WalkSpec::torus(*a, *b),
            _ => Err(unknown()),
        }
    }

    /// For degree-2 walks, which of the two possible coin structures this is.
    pub fn degree2_kind(&self) -> Option<Degree2Kind> {
        if self.d() != 2 {
            return None;
        }
        let (p, q) = (&self.perms[0], &self.perms[1]);
        let full_cycle = |x: &Permutation| x.cycles().len() == 1;
        let all_swaps = |x: &Permutation| x.cycles().iter().all(|c| c.len() == 2);
        if full_cycle(p) && q == &p.inverse() {
            Some(Degree2Kind::FullCycle)
        } else if all_swaps(p) && all_swaps(q) {
            Some(Degree2Kind::Exchange)
        } else {
            None
        }
    }
}

/// Shape of a degree-2 walk, up to relabelling the vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree2Kind {
    /// `P₊` is a single `N`-cycle and `P₋ = P₊⁻¹`.
    FullCycle,
    /// Both coins are products of disjoint adjacent transpositions (`N` even).
    Exchange,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_is_valid() {
        let spec = WalkSpec::figure1();
        assert_eq!((spec.n(), spec.d()), (6, 3));
        assert_eq!(spec.perm(2).to_string(), "(0 3)(1 5)(2 4)");
        assert_eq!(spec.neighbors(0), &[1, 3, 5]);
    }

    #[test]
    fn five_cycle_is_valid() {
        let spec = WalkSpec::validate(5, vec![vec![1, 2, 3, 4, 0], vec![4, 0, 1, 2, 3]]).unwrap();
        assert_eq!(spec.d(), 2);
        assert_eq!(spec, WalkSpec::cycle_shift(5).unwrap());
    }

    #[test]
    fn identity_is_self_loop() {
        let err = WalkSpec::validate(4, vec![vec![0, 1, 2, 3], vec![1, 2, 3, 0]]).unwrap_err();
        assert_eq!(err, SpecError::SelfLoop { perm: 0, vertex: 0 });
    }

    #[test]
    fn error_variants_name_offenders() {
        assert!(matches!(
            WalkSpec::validate(4, vec![vec![1, 2, 3], vec![1, 2, 3, 0]]),
            Err(SpecError::LengthMismatch { perm: 0, len: 3, n: 4 })
        ));
        assert!(matches!(
            WalkSpec::validate(4, vec![vec![1, 1, 3, 0], vec![3, 0, 1, 2]]),
            Err(SpecError::NotBijection { perm: 0, .. })
        ));
        // both coins send 0 to 1
        assert_eq!(
            WalkSpec::validate(4, vec![vec![1, 2, 3, 0], vec![1, 0, 3, 2]]).unwrap_err(),
            SpecError::CoinCollision { vertex: 0, first: 0, second: 1, target: 1 }
        );
        // 0 -> 1 -> 2 -> 3 -> 0 and 0 -> 2 -> ... : edge 0->1 exists without 1->0
        assert!(matches!(
            WalkSpec::validate(4, vec![vec![1, 2, 3, 0], vec![2, 3, 0, 1]]),
            Err(SpecError::NotSymmetric { .. })
        ));
        // two disjoint triangles
        assert_eq!(
            WalkSpec::validate(6, vec![vec![1, 2, 0, 4, 5, 3], vec![2, 0, 1, 5, 3, 4]]).unwrap_err(),
            SpecError::Disconnected { unreached: 3 }
        );
        assert_eq!(
            WalkSpec::validate(2, vec![vec![1, 0], vec![1, 0]]).unwrap_err(),
            SpecError::TooFewVertices(2)
        );
        assert_eq!(
            WalkSpec::validate(3, vec![vec![1, 2, 0]]).unwrap_err(),
            SpecError::DegreeTooSmall(1)
        );
    }

    #[test]
    fn adjacency_rows_and_columns_sum_to_degree() {
        for spec in [WalkSpec::figure1(), WalkSpec::complete(5).unwrap(), WalkSpec::torus(3, 4).unwrap()] {
            let a = spec.adjacency();
            for i in 0..spec.n() {
                assert_eq!(a[i].iter().map(|&x| x as usize).sum::<usize>(), spec.d());
                assert_eq!((0..spec.n()).map(|l| a[l][i] as usize).sum::<usize>(), spec.d());
                assert_eq!(a[i][i], 0);
            }
            assert_eq!(spec.dim() % 2, 0);
        }
    }

    #[test]
    fn cycle_exchange_four() {
        let spec = WalkSpec::cycle_exchange(4).unwrap();
        assert_eq!(spec.perm(0).to_string(), "(0 1)(2 3)");
        assert_eq!(spec.perm(1).to_string(), "(0 3)(1 2)");
        assert_eq!(spec.degree2_kind(), Some(Degree2Kind::Exchange));
        assert!(matches!(WalkSpec::cycle_exchange(5), Err(SpecError::Parity(_))));
    }

    #[test]
    fn complete_graph_adjacency() {
        let spec = WalkSpec::complete(4).unwrap();
        assert_eq!(spec.d(), 3);
        let a = spec.adjacency();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a[i][j], u8::from(i != j));
            }
        }
    }

    #[test]
    fn product_of_three_cycles() {
        let c3 = WalkSpec::cycle_shift(3).unwrap();
        let t = WalkSpec::product(&c3, &c3).unwrap();
        assert_eq!((t.n(), t.d()), (9, 4));
        // (1,2) = 5 under the lifted P₊ of the first factor -> (2,2) = 8
        assert_eq!(t.perm(0).apply(5), 8);
        // (1,2) under the lifted P₊ of the second factor -> (1,0) = 3
        assert_eq!(t.perm(2).apply(5), 3);

        let t35 = WalkSpec::product(&WalkSpec::cycle_shift(5).unwrap(), &c3).unwrap();
        assert_eq!((t35.n(), t35.d()), (15, 4));
    }

    #[test]
    fn shift_orders() {
        assert_eq!(WalkSpec::cycle_shift(5).unwrap().shift_order(), 5);
        assert_eq!(WalkSpec::figure1().shift_order(), 6);
        assert_eq!(WalkSpec::cycle_exchange(6).unwrap().shift_order(), 2);
    }

    #[test]
    fn builtin_names() {
        assert_eq!(WalkSpec::builtin("cycle_shift(5)").unwrap(), WalkSpec::cycle_shift(5).unwrap());
        assert_eq!(WalkSpec::builtin("torus:3,3").unwrap(), WalkSpec::torus(3, 3).unwrap());
        assert_eq!(WalkSpec::builtin("figure1").unwrap(), WalkSpec::figure1());
        assert!(matches!(WalkSpec::builtin("star(4)"), Err(SpecError::UnknownBuiltin(_))));
        assert!(matches!(WalkSpec::builtin("cycle_exchange(7)"), Err(SpecError::Parity(_))));
    }

    #[test]
    fn degree2_classification() {
        for n in 3..9 {
            assert_eq!(WalkSpec::cycle_shift(n).unwrap().degree2_kind(), Some(Degree2Kind::FullCycle));
        }
        assert_eq!(WalkSpec::figure1().degree2_kind(), None);
    }

    #[test]
    fn json_round_trip_validates() {
        let spec: WalkSpec =
            serde_json::from_str(r#"{"n": 6, "perms": [[1,2,3,4,5,0],[5,0,1,2,3,4],[3,5,4,0,2,1]]}"#).unwrap();
        assert_eq!(spec, WalkSpec::figure1());
        assert!(serde_json::from_str::<WalkSpec>(r#"{"n": 3, "perms": [[0,1,2],[1,2,0]]}"#).is_err());
    }
}
