//! Partitions of a finite universe in canonical least-representative form.
//!
//! The representative of every element is the least element of its block, so
//! two partitions are equal exactly when their representative vectors are
//! equal. Congruences, their meets, and their joins are all handled through
//! this one type; `join` produces the transitive closure of the union of the
//! block relations, which is again a congruence whenever both inputs are.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    rep: Vec<usize>,
}

impl Partition {
    /// The identity partition (every element alone).
    pub fn identity(n: usize) -> Partition {
        Partition {
            rep: (0..n).collect(),
        }
    }

    /// The one-block partition.
    pub fn one_block(n: usize) -> Partition {
        Partition { rep: vec![0; n] }
    }

    /// Builds the finest partition relating every listed pair.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Partition {
        let mut uf = UnionFind::new(n);
        for (a, b) in pairs {
            uf.union(a, b);
        }
        uf.into_partition()
    }

    /// Builds a partition from explicit blocks, which must cover
    /// `{0, .., n-1}` without repetition.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Partition> {
        let mut rep = vec![usize::MAX; n];
        for block in blocks {
            if block.is_empty() {
                return Err(Error::invalid("empty block"));
            }
            let least = *block.iter().min().unwrap();
            for &x in block {
                if x >= n {
                    return Err(Error::ElementOutOfRange { value: x, size: n });
                }
                if rep[x] != usize::MAX {
                    return Err(Error::invalid(format!("element {x} appears twice")));
                }
                rep[x] = least;
            }
        }
        if let Some(missing) = rep.iter().position(|&r| r == usize::MAX) {
            return Err(Error::invalid(format!("element {missing} not covered")));
        }
        Ok(Partition { rep })
    }

    /// Parses block notation, e.g. `[[0,1],[2]]`.
    pub fn parse_blocks(text: &str) -> Result<Partition> {
        let blocks: Vec<Vec<usize>> = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("bad block notation: {e}")))?;
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::from_blocks(n, &blocks)
    }

    pub fn universe_size(&self) -> usize {
        self.rep.len()
    }

    /// The canonical representative (least element) of `x`'s block.
    pub fn rep(&self, x: usize) -> usize {
        self.rep[x]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.rep[a] == self.rep[b]
    }

    pub fn is_identity(&self) -> bool {
        self.rep.iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn is_one_block(&self) -> bool {
        self.rep.iter().all(|&r| r == 0)
    }

    pub fn block_count(&self) -> usize {
        self.rep
            .iter()
            .enumerate()
            .filter(|&(i, &r)| i == r)
            .count()
    }

    /// Blocks sorted by least element; within each block elements ascend.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.rep.len();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut index_of_rep = vec![usize::MAX; n];
        for x in 0..n {
            let r = self.rep[x];
            if index_of_rep[r] == usize::MAX {
                index_of_rep[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[index_of_rep[r]].push(x);
        }
        blocks
    }

    /// All related pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn related_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.rep.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.related(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Refinement order: `self <= other` iff every block of `self` is
    /// contained in a block of `other`.
    pub fn leq(&self, other: &Partition) -> bool {
        self.rep.len() == other.rep.len()
            && (0..self.rep.len()).all(|x| other.rep[x] == other.rep[self.rep[x]])
    }

    /// Join in the partition lattice: transitive closure of the union of
    /// the block relations.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        let n = self.check_same_universe(other)?;
        let mut uf = UnionFind::new(n);
        for x in 0..n {
            uf.union(x, self.rep[x]);
            uf.union(x, other.rep[x]);
        }
        Ok(uf.into_partition())
    }

    /// Meet in the partition lattice: blockwise intersection.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        let n = self.check_same_universe(other)?;
        let mut first: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut rep = vec![0usize; n];
        for x in 0..n {
            let key = (self.rep[x], other.rep[x]);
            rep[x] = *first.entry(key).or_insert(x);
        }
        Ok(Partition { rep })
    }

    fn check_same_universe(&self, other: &Partition) -> Result<usize> {
        if self.rep.len() != other.rep.len() {
            return Err(Error::UniverseMismatch(self.rep.len(), other.rep.len()));
        }
        Ok(self.rep.len())
    }

    /// Block notation, e.g. `[[0,1],[2]]`.
    pub fn block_notation(&self) -> String {
        let blocks = self.blocks();
        let inner: Vec<String> = blocks
            .iter()
            .map(|b| {
                let elems: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                format!("[{}]", elems.join(","))
            })
            .collect();
        format!("[{}]", inner.join(","))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.block_notation())
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(deserializer)?;
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::from_blocks(n, &blocks).map_err(D::Error::custom)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
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

    /// Unions by least representative so canonicalization is a single pass.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        let rep = (0..n).map(|x| self.find(x)).collect();
        Partition { rep }
    }
}

/// Incremental union-find that reports newly merged pairs; used by the
/// congruence-generation worklist.
pub(crate) struct PairCloser {
    uf: UnionFind,
}

impl PairCloser {
    pub fn new(n: usize) -> PairCloser {
        PairCloser {
            uf: UnionFind::new(n),
        }
    }

    /// Returns true when the union was nontrivial.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        self.uf.union(a, b)
    }

    pub fn finish(self) -> Partition {
        self.uf.into_partition()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_and_equality() {
        let p = Partition::from_pairs(4, vec![(3, 1), (1, 3)]);
        assert_eq!(p.rep(3), 1);
        assert_eq!(p.rep(1), 1);
        let q = Partition::from_blocks(4, &[vec![1, 3], vec![0], vec![2]]).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.block_notation(), "[[0],[1,3],[2]]");
    }

    #[test]
    fn join_is_transitive_closure() {
        let a = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let b = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        assert!(a.join(&b).unwrap().is_one_block());
        assert!(a.meet(&b).unwrap().is_identity());
        let zero = Partition::identity(3);
        assert_eq!(a.join(&zero).unwrap(), a);
    }

    #[test]
    fn leq_is_refinement() {
        let a = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        assert!(Partition::identity(3).leq(&a));
        assert!(a.leq(&Partition::one_block(3)));
        assert!(!a.leq(&Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap()));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = Partition::identity(3);
        let b = Partition::identity(4);
        assert!(a.join(&b).is_err());
    }

    #[test]
    fn blocks_round_trip_through_text() {
        let p = Partition::from_blocks(5, &[vec![0, 2], vec![1, 4], vec![3]]).unwrap();
        let q = Partition::parse_blocks(&p.block_notation()).unwrap();
        assert_eq!(p, q);
    }
}
