//! Irreducible permutations, the Rauzy operations `a` and `b`, and
//! Rauzy-class enumeration.
//!
//! A permutation pi of {1..m} is stored as its image list (pi(1),...,pi(m)),
//! 1-indexed exactly as it is written on paper. Irreducibility means no
//! proper prefix {1..k}, k < m, is invariant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two Rauzy operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RauzyOp {
    A,
    B,
}

impl RauzyOp {
    pub fn other(self) -> Self {
        match self {
            RauzyOp::A => RauzyOp::B,
            RauzyOp::B => RauzyOp::A,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            RauzyOp::A => 'a',
            RauzyOp::B => 'b',
        }
    }
}

impl fmt::Display for RauzyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for RauzyOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(RauzyOp::A),
            "b" | "B" => Ok(RauzyOp::B),
            _ => Err(Error::InvalidInput(format!("unknown Rauzy operation {s:?}"))),
        }
    }
}

/// An irreducible permutation of {1..m}, stored as its image list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its image list (pi(1),...,pi(m)).
    /// Rejects non-bijections and reducible permutations.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        Self::bijection(images).and_then(|p| {
            if p.is_irreducible() {
                Ok(p)
            } else {
                Err(Error::InvalidInput(format!("reducible permutation {p}")))
            }
        })
    }

    /// Builds a permutation checking only bijectivity, so that
    /// reducibility itself can be queried.
    pub fn bijection(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "permutation needs at least 2 symbols, got {m}"
            )));
        }
        let mut seen = vec![false; m + 1];
        for &v in &images {
            if v == 0 || v > m || seen[v] {
                return Err(Error::InvalidInput(format!(
                    "image list {images:?} is not a bijection of 1..{m}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn symbols(&self) -> usize {
        self.images.len()
    }

    /// pi(j) for 1 <= j <= m.
    #[inline]
    pub fn image(&self, j: usize) -> usize {
        self.images[j - 1]
    }

    /// pi^{-1}(v) for 1 <= v <= m.
    #[inline]
    pub fn preimage(&self, v: usize) -> usize {
        self.images.iter().position(|&x| x == v).expect("bijection") + 1
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// True iff no k < m with pi{1..k} = {1..k}.
    pub fn is_irreducible(&self) -> bool {
        let m = self.symbols();
        let mut max = 0usize;
        for k in 1..m {
            max = max.max(self.image(k));
            if max == k {
                return false;
            }
        }
        true
    }

    /// The Rauzy operation `a`.
    pub fn rauzy_a(&self) -> Permutation {
        let m = self.symbols();
        let k = self.preimage(m);
        let mut images = Vec::with_capacity(m);
        for j in 1..=m {
            images.push(if j <= k {
                self.image(j)
            } else if j == k + 1 {
                self.image(m)
            } else {
                self.image(j - 1)
            });
        }
        Permutation { images }
    }

    /// The Rauzy operation `b`.
    pub fn rauzy_b(&self) -> Permutation {
        let m = self.symbols();
        let pm = self.image(m);
        let mut images = Vec::with_capacity(m);
        for j in 1..=m {
            let pj = self.image(j);
            images.push(if pj <= pm {
                pj
            } else if pj < m {
                pj + 1
            } else {
                pm + 1
            });
        }
        Permutation { images }
    }

    pub fn apply_op(&self, op: RauzyOp) -> Permutation {
        match op {
            RauzyOp::A => self.rauzy_a(),
            RauzyOp::B => self.rauzy_b(),
        }
    }

    /// op^n applied to self.
    pub fn apply_op_n(&self, op: RauzyOp, n: u32) -> Permutation {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.apply_op(op);
        }
        p
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.images.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;
    /// Parses "3,2,1" or "3 2 1".
    fn from_str(s: &str) -> Result<Self> {
        let images: Vec<usize> = s
            .split([',', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad permutation entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        Permutation::new(images)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.images
    }
}

/// A Rauzy class: the closure of an irreducible permutation under both
/// operations, with members held in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RauzyClass {
    members: Vec<Permutation>,
    /// index of a-image and b-image per member, parallel to `members`
    a_edges: Vec<usize>,
    b_edges: Vec<usize>,
}

impl RauzyClass {
    /// Breadth-first closure of `seed` under {a, b}, visiting a before b.
    pub fn enumerate(seed: &Permutation) -> Result<RauzyClass> {
        if !seed.is_irreducible() {
            return Err(Error::InvalidInput(format!("reducible permutation {seed}")));
        }
        let mut index: BTreeMap<Permutation, ()> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::new();
        index.insert(seed.clone(), ());
        queue.push_back(seed.clone());
        while let Some(p) = queue.pop_front() {
            for q in [p.rauzy_a(), p.rauzy_b()] {
                if !index.contains_key(&q) {
                    index.insert(q.clone(), ());
                    queue.push_back(q);
                }
            }
        }
        let members: Vec<Permutation> = index.into_keys().collect();
        let pos = |p: &Permutation| members.binary_search(p).expect("closed under ops");
        let a_edges = members.iter().map(|p| pos(&p.rauzy_a())).collect();
        let b_edges = members.iter().map(|p| pos(&p.rauzy_b())).collect();
        Ok(RauzyClass {
            members,
            a_edges,
            b_edges,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.members.binary_search(p).is_ok()
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.members.binary_search(p).ok()
    }

    /// Directed edges (from, op, to) as member indices, a-edges first.
    pub fn edges(&self) -> impl Iterator<Item = (usize, RauzyOp, usize)> + '_ {
        let a = self
            .a_edges
            .iter()
            .enumerate()
            .map(|(i, &j)| (i, RauzyOp::A, j));
        let b = self
            .b_edges
            .iter()
            .enumerate()
            .map(|(i, &j)| (i, RauzyOp::B, j));
        a.chain(b)
    }

    /// DOT digraph with one node per permutation labeled by its image list.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph rauzy {\n");
        for (i, p) in self.members.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{p}\"];\n"));
        }
        for (i, op, j) in self.edges() {
            out.push_str(&format!("  n{i} -> n{j} [label=\"{op}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn irreducibility() {
        assert!(perm(&[2, 1]).is_irreducible());
        assert!(Permutation::bijection(vec![1, 2]).unwrap().is_irreducible() == false);
        assert!(!Permutation::bijection(vec![2, 1, 3]).unwrap().is_irreducible());
        assert!(Permutation::new(vec![1, 2]).is_err());
        assert!(Permutation::bijection(vec![2, 2]).is_err());
        assert!(Permutation::bijection(vec![0, 1]).is_err());
    }

    #[test]
    fn rauzy_ops_hand_values() {
        assert_eq!(perm(&[2, 1]).rauzy_a(), perm(&[2, 1]));
        assert_eq!(perm(&[3, 2, 1]).rauzy_a(), perm(&[3, 1, 2]));
        assert_eq!(perm(&[2, 3, 1]).rauzy_a(), perm(&[2, 3, 1]));
        assert_eq!(perm(&[2, 1]).rauzy_b(), perm(&[2, 1]));
        assert_eq!(perm(&[3, 2, 1]).rauzy_b(), perm(&[2, 3, 1]));
        assert_eq!(perm(&[3, 1, 2]).rauzy_b(), perm(&[3, 1, 2]));
    }

    #[test]
    fn ops_preserve_irreducibility() {
        for seed in [perm(&[2, 1]), perm(&[3, 2, 1]), perm(&[4, 3, 2, 1]), perm(&[4, 2, 3, 1])] {
            let class = RauzyClass::enumerate(&seed).unwrap();
            for p in class.members() {
                assert!(p.rauzy_a().is_irreducible());
                assert!(p.rauzy_b().is_irreducible());
            }
        }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(RauzyClass::enumerate(&perm(&[2, 1])).unwrap().len(), 1);
        let c3 = RauzyClass::enumerate(&perm(&[3, 2, 1])).unwrap();
        assert_eq!(c3.len(), 3);
        for p in [perm(&[3, 2, 1]), perm(&[3, 1, 2]), perm(&[2, 3, 1])] {
            assert!(c3.contains(&p));
        }
        assert_eq!(RauzyClass::enumerate(&perm(&[4, 3, 2, 1])).unwrap().len(), 7);
    }

    #[test]
    fn class_rejects_reducible() {
        let p = Permutation::bijection(vec![1, 2]).unwrap();
        assert!(RauzyClass::enumerate(&p).is_err());
    }

    #[test]
    fn ops_are_class_bijections() {
        for seed in [perm(&[3, 2, 1]), perm(&[4, 3, 2, 1])] {
            let class = RauzyClass::enumerate(&seed).unwrap();
            let n = class.len();
            for edges in [
                class.members().iter().map(|p| p.rauzy_a()).collect::<Vec<_>>(),
                class.members().iter().map(|p| p.rauzy_b()).collect::<Vec<_>>(),
            ] {
                let mut targets: Vec<usize> =
                    edges.iter().map(|q| class.index_of(q).unwrap()).collect();
                targets.sort_unstable();
                targets.dedup();
                assert_eq!(targets.len(), n);
            }
        }
    }

    #[test]
    fn dot_export_shape() {
        let dot = RauzyClass::enumerate(&perm(&[3, 2, 1])).unwrap().to_dot();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 6);
        assert!(dot.contains("label=\"3,2,1\""));
    }

    #[test]
    fn parse_roundtrip() {
        let p: Permutation = "3,2,1".parse().unwrap();
        assert_eq!(p.to_string(), "3,2,1");
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, "[3,2,1]");
        let back: Permutation = serde_json::from_str(&j).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Permutation>("[1,2]").is_err());
    }
}
