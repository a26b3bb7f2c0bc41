//! Combinatorial controllability criteria.
//!
//! Three independent routes decide whether a walk is completely controllable:
//!
//! * joint orbits of the coin permutations and the reduced connectivity graph
//!   built from the cycles of `P_l^{-k} P_m^k`;
//! * the reachability sets `𝒩ᵏ(j)` (vertices reachable by walks of exactly `k` steps);
//! * a parity-labelled BFS on the graph (odd closed walk ⟺ one component).
//!
//! [`analyze`] runs all three, cross-checks them and reports the component
//! structure of the dynamical Lie algebra.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WalkSpec;
use crate::parallel;
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("criteria disagree at vertex {vertex}: {detail}")]
    CriterionConflict { vertex: usize, detail: String },
}

pub type VertexSet = BTreeSet<usize>;

/// `𝒪_{l,m} = ⋃_{k,j} (P_l^k j, P_m^k j)`; coin indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointOrbit {
    pub l: usize,
    pub m: usize,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl JointOrbit {
    pub fn contains(&self, r: usize, s: usize) -> bool {
        self.pairs.contains(&(r, s))
    }
}

fn check_coin(spec: &WalkSpec, coin: usize) -> Result<(), AnalysisError> {
    if coin >= spec.d() {
        return Err(AnalysisError::IndexOutOfRange {
            what: "coin",
            index: coin,
            limit: spec.d(),
        });
    }
    Ok(())
}

fn check_vertex(spec: &WalkSpec, j: usize) -> Result<(), AnalysisError> {
    if j >= spec.n() {
        return Err(AnalysisError::IndexOutOfRange {
            what: "vertex",
            index: j,
            limit: spec.n(),
        });
    }
    Ok(())
}

pub fn joint_orbit(spec: &WalkSpec, l: usize, m: usize) -> Result<JointOrbit, AnalysisError> {
    check_coin(spec, l)?;
    check_coin(spec, m)?;
    let (pl, pm) = (spec.perm(l), spec.perm(m));
    let mut pairs = BTreeSet::new();
    for j in 0..spec.n() {
        let (mut a, mut b) = (j, j);
        for _ in 0..spec.shift_order() {
            pairs.insert((a, b));
            a = pl.apply(a);
            b = pm.apply(b);
        }
    }
    Ok(JointOrbit { l, m, pairs })
}

/// Undirected graph on the walk's vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedGraph {
    pub n: usize,
    /// Edges `(r, s)` with `r < s`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl ReducedGraph {
    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n);
        for &(r, s) in &self.edges {
            uf.union(r, s);
        }
        uf.groups()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let root = self.find(v);
            by_root[root].push(v);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

/// Reduced connectivity graph: `r ~ s` whenever they share a cycle of some
/// `P_l^{-k} P_m^k` with `l < m` and `0 ≤ k < r`.
pub fn reduced_connectivity_graph(spec: &WalkSpec) -> ReducedGraph {
    let r = spec.shift_order();
    let d = spec.d();
    let triples: Vec<(usize, usize, usize)> = (0..d)
        .flat_map(|l| (l + 1..d).flat_map(move |m| (0..r).map(move |k| (l, m, k))))
        .collect();
    let edge_sets: Vec<BTreeSet<(usize, usize)>> = parallel::install(|| {
        triples
            .par_iter()
            .map(|&(l, m, k)| {
                let word: Permutation = spec
                    .perm(l)
                    .pow(-(k as i64))
                    .compose(&spec.perm(m).pow(k as i64))
                    .expect("walk permutations share a length");
                let mut edges = BTreeSet::new();
                for cycle in word.cycles() {
                    for (i, &a) in cycle.iter().enumerate() {
                        for &b in &cycle[i + 1..] {
                            edges.insert((a.min(b), a.max(b)));
                        }
                    }
                }
                edges
            })
            .collect()
    });
    let edges = edge_sets.into_iter().flatten().collect();
    ReducedGraph { n: spec.n(), edges }
}

fn step_set(spec: &WalkSpec, current: &[bool]) -> Vec<bool> {
    let mut next = vec![false; spec.n()];
    for (l, _) in current.iter().enumerate().filter(|(_, &inside)| inside) {
        for p in spec.perms() {
            next[p.apply(l)] = true;
        }
    }
    next
}

fn to_set(mask: &[bool]) -> VertexSet {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect()
}

/// `𝒩⁰(j), …, 𝒩^{kmax}(j)`. Not monotone in `k` in general.
pub fn reachable_sets(spec: &WalkSpec, j: usize, kmax: usize) -> Result<Vec<VertexSet>, AnalysisError> {
    check_vertex(spec, j)?;
    let mut mask = vec![false; spec.n()];
    mask[j] = true;
    let mut out = vec![to_set(&mask)];
    for _ in 0..kmax {
        mask = step_set(spec, &mask);
        out.push(to_set(&mask));
    }
    Ok(out)
}

/// Search cap for `k_j`. When the graph has an odd cycle every vertex is
/// covered after at most `2N − 2` steps, so `3N` is never the binding limit.
pub fn reach_cap(spec: &WalkSpec) -> usize {
    3 * spec.n()
}

/// Least `k` with `𝒩ᵏ(j) = V`, or `None` when no such `k` exists.
pub fn k_of(spec: &WalkSpec, j: usize) -> Result<Option<usize>, AnalysisError> {
    check_vertex(spec, j)?;
    let mut mask = vec![false; spec.n()];
    mask[j] = true;
    let mut found = None;
    for k in 0..=reach_cap(spec) {
        if mask.iter().all(|&b| b) {
            found = Some(k);
            break;
        }
        mask = step_set(spec, &mask);
    }
    let parity = parity_check(spec, j)?;
    match (found, parity.m) {
        (Some(_), 1) | (None, 2) => Ok(found),
        (None, _) => Err(AnalysisError::CriterionConflict {
            vertex: j,
            detail: format!(
                "no k ≤ {} covers every vertex although an odd closed walk exists",
                reach_cap(spec)
            ),
        }),
        (Some(k), _) => Err(AnalysisError::CriterionConflict {
            vertex: j,
            detail: format!("𝒩^{k}(j) covers every vertex although the graph is bipartite"),
        }),
    }
}

/// `𝐤 = min_j k_j` together with the smallest vertex achieving it.
pub fn kappa(spec: &WalkSpec) -> Result<Option<(usize, usize)>, AnalysisError> {
    let mut best: Option<(usize, usize)> = None;
    for j in 0..spec.n() {
        if let Some(k) = k_of(spec, j)? {
            if best.is_none_or(|(bk, _)| k < bk) {
                best = Some((k, j));
            }
        }
    }
    Ok(best)
}

/// A vertex reachable from the start both by an even and by an odd walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityWitness {
    pub vertex: usize,
    /// Shortest positive even closed walk length at `vertex`.
    pub even_steps: usize,
    /// Shortest odd closed walk length at `vertex`.
    pub odd_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheck {
    pub m: usize,
    pub witness: Option<ParityWitness>,
    /// `(V_e(j), V_o(j))` when they are disjoint (`m = 2`).
    pub partition: Option<(Vec<usize>, Vec<usize>)>,
}

/// Parity-labelled BFS from `j`: one component iff some vertex is reachable
/// from `j` in both an odd and an even number of steps.
pub fn parity_check(spec: &WalkSpec, j: usize) -> Result<ParityCheck, AnalysisError> {
    check_vertex(spec, j)?;
    let n = spec.n();
    let mut dist = vec![[usize::MAX; 2]; n];
    dist[j][0] = 0;
    let mut queue = VecDeque::from([(j, 0usize)]);
    while let Some((v, parity)) = queue.pop_front() {
        let next_parity = parity ^ 1;
        for &w in spec.neighbors(v) {
            if dist[w][next_parity] == usize::MAX {
                dist[w][next_parity] = dist[v][parity] + 1;
                queue.push_back((w, next_parity));
            }
        }
    }
    if dist[j][1] != usize::MAX {
        return Ok(ParityCheck {
            m: 1,
            witness: Some(ParityWitness {
                vertex: j,
                even_steps: 2,
                odd_steps: dist[j][1],
            }),
            partition: None,
        });
    }
    let even = (0..n).filter(|&v| dist[v][0] != usize::MAX).collect();
    let odd = (0..n).filter(|&v| dist[v][1] != usize::MAX).collect();
    Ok(ParityCheck {
        m: 2,
        witness: None,
        partition: Some((even, odd)),
    })
}

/// Outcome of running all three criteria on one walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaAgreement {
    /// Components of the reduced connectivity graph.
    pub orbit_components: Vec<Vec<usize>>,
    /// Some `k_j` is finite.
    pub reach_controllable: bool,
    /// Parity verdict from vertex 0.
    pub parity_m: usize,
    /// For `m = 2`, orbit components coincide with `{V_e(0), V_o(0)}`.
    pub partitions_match: bool,
    pub agree: bool,
}

pub fn verdicts_agree(spec: &WalkSpec) -> Result<CriteriaAgreement, AnalysisError> {
    let orbit_components = reduced_connectivity_graph(spec).components();
    let parity = parity_check(spec, 0)?;
    let mut reach_controllable = false;
    for j in 0..spec.n() {
        if k_of(spec, j)?.is_some() {
            reach_controllable = true;
            break;
        }
    }
    let orbit_ok = orbit_components.len() == 1;
    let partitions_match = match &parity.partition {
        None => orbit_components.len() == 1,
        Some((even, odd)) => {
            let mut expected = vec![even.clone(), odd.clone()];
            expected.sort();
            orbit_components == expected
        }
    };
    let agree = orbit_ok == reach_controllable && orbit_ok == (parity.m == 1) && partitions_match;
    Ok(CriteriaAgreement {
        orbit_components,
        reach_controllable,
        parity_m: parity.m,
        partitions_match,
        agree,
    })
}

/// Controllability verdict and the predicted Lie algebra structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub components: Vec<Vec<usize>>,
    pub component_sizes: Vec<usize>,
    pub controllable: bool,
    /// `Σ_j (d·v_j)²`: the algebra is `⊕_j u(d·v_j)`, one block per component.
    /// For one component this is `(dN)²`.
    pub predicted_lie_dim: usize,
    pub kappa: Option<usize>,
    pub kappa_vertex: Option<usize>,
    /// `2𝐤 + r` when controllable.
    pub step_bound: Option<usize>,
    pub verdicts_agree: bool,
}

/// `Σ_j (d·v_j)²` for component sizes `v_j`.
pub fn predicted_lie_dim(d: usize, component_sizes: &[usize]) -> usize {
    component_sizes.iter().map(|&v| (d * v) * (d * v)).sum()
}

pub fn analyze(spec: &WalkSpec) -> Result<ControllabilityReport, AnalysisError> {
    let agreement = verdicts_agree(spec)?;
    let components = agreement.orbit_components.clone();
    let component_sizes: Vec<usize> = components.iter().map(Vec::len).collect();
    let m = components.len();
    let controllable = m == 1;
    let kappa = if controllable { kappa(spec)? } else { None };
    Ok(ControllabilityReport {
        n: spec.n(),
        d: spec.d(),
        m,
        predicted_lie_dim: predicted_lie_dim(spec.d(), &component_sizes),
        components,
        component_sizes,
        controllable,
        kappa: kappa.map(|(k, _)| k),
        kappa_vertex: kappa.map(|(_, j)| j),
        step_bound: kappa.map(|(k, _)| 2 * k + spec.shift_order()),
        verdicts_agree: agreement.agree,
    })
}
