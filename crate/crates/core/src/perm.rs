//! Permutations of the vertex set in one-line notation.
//!
//! A [`Permutation`] stores `map[j]`, the image of vertex `j`. Composition
//! follows the matrix convention: `p.compose(&q)` is `p ∘ q`, i.e. `q` acts
//! first. Cycle notation is only used for display and parsing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("not a bijection: image {image} appears more than once or is out of range (length {len})")]
    NotBijection { image: usize, len: usize },
    #[error("permutation lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot parse cycle notation: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, PermError> {
        let len = map.len();
        let mut seen = vec![false; len];
        for &image in &map {
            if image >= len || seen[image] {
                return Err(PermError::NotBijection { image, len });
            }
            seen[image] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// `j ↦ j + shift (mod n)`, with negative shifts allowed.
    pub fn rotation(n: usize, shift: i64) -> Self {
        let n_i = n as i64;
        let map = (0..n_i).map(|j| (j + shift).rem_euclid(n_i) as usize).collect();
        Permutation { map }
    }

    /// Builds a permutation of `n` points from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (pos, &a) in cycle.iter().enumerate() {
                if a >= n || touched[a] {
                    return Err(PermError::NotBijection { image: a, len: n });
                }
                touched[a] = true;
                map[a] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Permutation::new(map)
    }

    /// Parses cycle notation such as `"(0 3)(1 5)(2 4)"`. Commas are accepted as separators.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Self, PermError> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| PermError::Parse(format!("expected '(' at {rest:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| PermError::Parse("unbalanced parenthesis".into()))?;
            let body = &open[..close];
            let cycle = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|tok| !tok.is_empty())
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| PermError::Parse(format!("bad vertex {tok:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        Permutation::from_cycles(n, &cycles)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &image)| j == image)
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.len() != other.len() {
            return Err(PermError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Permutation {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (j, &image) in self.map.iter().enumerate() {
            inv[image] = j;
        }
        Permutation { map: inv }
    }

    /// `self^k`; negative exponents use the inverse. Runs in O(n) via the cycle structure.
    pub fn pow(&self, k: i64) -> Permutation {
        let mut map = vec![0; self.len()];
        for cycle in self.cycles() {
            let len = cycle.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (pos, &a) in cycle.iter().enumerate() {
                map[a] = cycle[(pos + shift) % cycle.len()];
            }
        }
        Permutation { map }
    }

    /// Disjoint cycles covering every point, fixed points included as 1-cycles.
    /// Each cycle starts at its smallest element; cycles are ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = self.map[start];
            while next != start {
                seen[next] = true;
                cycle.push(next);
                next = self.map[next];
            }
            out.push(cycle);
        }
        out
    }

    /// Least `k ≥ 1` with `self^k = id`: the lcm of the cycle lengths.
    pub fn order(&self) -> usize {
        self.cycles().iter().map(Vec::len).fold(1, lcm)
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.iter().enumerate().filter(|(j, &i)| *j == i).map(|(j, _)| j)
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermError;
    fn try_from(map: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.map)
    }
}

/// Cycle notation, omitting fixed points; the identity prints as `()`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "(")?;
            for (i, a) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    /// One-line notation, e.g. `"[1, 2, 0]"` or `"1 2 0"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let map = s
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| PermError::Parse(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Permutation::new(map)
    }
}
