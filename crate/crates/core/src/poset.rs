//! Finite strict partial orders on the labels `1..=n`.
//!
//! A [`Poset`] stores the full (transitively closed) strict order as one
//! bitmask row per element. Public methods take and return 1-based labels;
//! the `*0` helpers used by the operator code work on 0-based indices.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Largest supported poset. Words are packed four bits per letter into a `u64`.
pub const MAX_SIZE: usize = 16;

/// A finite strict partial order on `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    n: usize,
    // up[a] has bit b set iff a < b (0-based)
    up: Vec<u32>,
    down: Vec<u32>,
}

/// Cover relations (Hasse diagram edges) as sorted 1-based pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoverList(pub Vec<(usize, usize)>);

impl fmt::Display for CoverList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(a, b)| format!("{a}<{b}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The on-disk and command-line shape of a poset: covers only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub n: usize,
    pub covers: Vec<[usize; 2]>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset(n={}, {})", self.n, self.covers())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SIZE {
        return Err(Error::Size(n));
    }
    Ok(())
}

impl Poset {
    /// Transitive closure of `relations` (1-based pairs `(a, b)` meaning `a < b`).
    pub fn from_covers(n: usize, relations: &[(usize, usize)]) -> Result<Poset> {
        check_size(n)?;
        let mut p = Poset::antichain(n);
        for &(a, b) in relations {
            for label in [a, b] {
                if label == 0 || label > n {
                    return Err(Error::Label { label, n });
                }
            }
            if a == b {
                return Err(Error::Cycle(a));
            }
            p.up[a - 1] |= 1 << (b - 1);
        }
        p.close()?;
        Ok(p)
    }

    /// Builds from a full boolean table `less[a][b]` (0-based), closing it transitively.
    pub fn from_table(less: &[Vec<bool>]) -> Result<Poset> {
        let n = less.len();
        let mut pairs = Vec::new();
        for (a, row) in less.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse("relation table is not square".into()));
            }
            for (b, &x) in row.iter().enumerate() {
                if x {
                    pairs.push((a + 1, b + 1));
                }
            }
        }
        Poset::from_covers(n, &pairs)
    }

    pub fn from_json(json: &PosetJson) -> Result<Poset> {
        let pairs: Vec<(usize, usize)> = json.covers.iter().map(|c| (c[0], c[1])).collect();
        Poset::from_covers(json.n, &pairs)
    }

    pub fn parse_json(s: &str) -> Result<Poset> {
        let json: PosetJson = serde_json::from_str(s)?;
        Poset::from_json(&json)
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            n: self.n,
            covers: self.covers().0.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("poset json")
    }

    // Warshall closure on bitmask rows; fails on a cycle.
    fn close(&mut self) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            for a in 0..n {
                if self.up[a] >> k & 1 == 1 {
                    self.up[a] |= self.up[k];
                }
            }
        }
        for a in 0..n {
            if self.up[a] >> a & 1 == 1 {
                return Err(Error::Cycle(a + 1));
            }
        }
        self.down = vec![0; n];
        for a in 0..n {
            for b in 0..n {
                if self.up[a] >> b & 1 == 1 {
                    self.down[b] |= 1 << a;
                }
            }
        }
        debug_assert!(self.is_valid_order());
        Ok(())
    }

    /// Checks irreflexivity, antisymmetry and transitivity of the stored table.
    pub fn is_valid_order(&self) -> bool {
        let n = self.n;
        for a in 0..n {
            if self.less0(a, a) {
                return false;
            }
            for b in 0..n {
                if self.less0(a, b) && self.less0(b, a) {
                    return false;
                }
                if self.less0(a, b) && self.up[b] & !self.up[a] != 0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `a < b` for 1-based labels.
    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less0(a - 1, b - 1)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.comparable0(a - 1, b - 1)
    }

    #[inline]
    pub(crate) fn less0(&self, a: usize, b: usize) -> bool {
        self.up[a] >> b & 1 == 1
    }

    #[inline]
    pub(crate) fn comparable0(&self, a: usize, b: usize) -> bool {
        (self.up[a] | self.down[a]) >> b & 1 == 1
    }

    #[inline]
    pub(crate) fn up_mask(&self, a: usize) -> u32 {
        self.up[a]
    }

    #[inline]
    pub(crate) fn down_mask(&self, a: usize) -> u32 {
        self.down[a]
    }

    /// All relations `a < b` (1-based), lexicographically sorted.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.less0(a, b) {
                    out.push((a + 1, b + 1));
                }
            }
        }
        out
    }

    pub fn num_relations(&self) -> usize {
        self.up.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// The Hasse diagram: relations with nothing strictly between.
    pub fn covers(&self) -> CoverList {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.less0(a, b) && self.up[a] & self.down[b] == 0 {
                    out.push((a + 1, b + 1));
                }
            }
        }
        CoverList(out)
    }

    pub fn is_chain(&self) -> bool {
        (0..self.n).all(|a| (self.up[a] | self.down[a]).count_ones() as usize == self.n - 1)
    }

    pub fn is_antichain(&self) -> bool {
        self.up.iter().all(|&m| m == 0)
    }

    /// Connected components of the comparability graph, as sorted 1-based
    /// blocks ordered by their least element.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut seen = 0u32;
        let mut blocks = Vec::new();
        for start in 0..n {
            if seen >> start & 1 == 1 {
                continue;
            }
            let mut block = 1u32 << start;
            let mut frontier = block;
            while frontier != 0 {
                let a = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let next = (self.up[a] | self.down[a]) & !block;
                block |= next;
                frontier |= next;
            }
            seen |= block;
            blocks.push(mask_to_labels(block));
        }
        blocks
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// The dual order: `a < b` in the dual iff `b < a` here.
    pub fn dual(&self) -> Poset {
        Poset {
            n: self.n,
            up: self.down.clone(),
            down: self.up.clone(),
        }
    }

    /// Relabels element `a` as `perm[a - 1]` (a permutation of `1..=n`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Poset> {
        if perm.len() != self.n || !is_permutation(perm) {
            return Err(Error::NotAPermutation(self.n));
        }
        let pairs: Vec<(usize, usize)> = self
            .relations()
            .into_iter()
            .map(|(a, b)| (perm[a - 1], perm[b - 1]))
            .collect();
        Poset::from_covers(self.n, &pairs)
    }

    /// The induced order on `labels` (1-based, any order), relabelled
    /// `1..=labels.len()` following the order given.
    pub fn restrict(&self, labels: &[usize]) -> Result<Poset> {
        let mut pairs = Vec::new();
        for (i, &a) in labels.iter().enumerate() {
            for (j, &b) in labels.iter().enumerate() {
                if self.less(a, b) {
                    pairs.push((i + 1, j + 1));
                }
            }
        }
        Poset::from_covers(labels.len(), &pairs)
    }

    pub fn chain(n: usize) -> Poset {
        let pairs: Vec<(usize, usize)> = (1..n).map(|a| (a, a + 1)).collect();
        Poset::from_covers(n, &pairs).expect("chain")
    }

    pub fn antichain(n: usize) -> Poset {
        Poset {
            n,
            up: vec![0; n],
            down: vec![0; n],
        }
    }

    /// Disjoint union; summands are relabelled consecutively in order.
    pub fn direct_sum(parts: &[Poset]) -> Result<Poset> {
        let n: usize = parts.iter().map(|p| p.n).sum();
        check_size(n)?;
        let mut pairs = Vec::new();
        let mut offset = 0;
        for p in parts {
            pairs.extend(
                p.relations()
                    .into_iter()
                    .map(|(a, b)| (a + offset, b + offset)),
            );
            offset += p.n;
        }
        Poset::from_covers(n, &pairs)
    }

    /// Direct sum of chains of the given lengths.
    pub fn sum_of_chains(lengths: &[usize]) -> Result<Poset> {
        let parts: Vec<Poset> = lengths.iter().map(|&l| Poset::chain(l)).collect();
        Poset::direct_sum(&parts)
    }

    /// `(P, P1, P2)`: two chains `1..k` and `k+1..n`; `P1` adds `k+1 < k`
    /// (the N-shape); `P2` adds `k < k+1` (the full chain).
    pub fn n_shape_triple(n: usize, k: usize) -> Result<(Poset, Poset, Poset)> {
        if n < 2 || k == 0 || k >= n {
            return Err(Error::Range(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        let mut base: Vec<(usize, usize)> = (1..k).map(|a| (a, a + 1)).collect();
        base.extend((k + 1..n).map(|a| (a, a + 1)));
        let p = Poset::from_covers(n, &base)?;
        let mut with1 = base.clone();
        with1.push((k + 1, k));
        let p1 = Poset::from_covers(n, &with1)?;
        let mut with2 = base;
        with2.push((k, k + 1));
        let p2 = Poset::from_covers(n, &with2)?;
        Ok((p, p1, p2))
    }

    /// Random poset: visit all ordered pairs in a seeded shuffled order and
    /// add each with probability `1/n` unless it would close a cycle.
    pub fn random(n: usize, seed: u64) -> Result<Poset> {
        let mut rng = stream_rng(seed, 0);
        Poset::random_with(n, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Poset> {
        check_size(n)?;
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
        pairs.shuffle(rng);
        let mut p = Poset::antichain(n);
        let prob = 1.0 / n as f64;
        for (a, b) in pairs {
            // draw for every pair so the stream does not depend on the outcome
            let accept = rng.random::<f64>() < prob;
            if accept && !p.less0(b, a) && !p.less0(a, b) {
                p.up[a] |= 1 << b;
                p.close()?;
            }
        }
        Ok(p)
    }

    /// Lexicographically least linear extension (greedy least minimal element).
    pub fn least_extension(&self) -> Vec<usize> {
        let mut placed = 0u32;
        let mut word = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let a = (0..self.n)
                .find(|&a| placed >> a & 1 == 0 && self.down[a] & !placed == 0)
                .expect("some minimal element");
            placed |= 1 << a;
            word.push(a + 1);
        }
        word
    }

    /// Direct sum of chains on the same labels: each component is totally
    /// ordered by the least linear extension of its restriction.
    pub fn chain_ordering(&self) -> Poset {
        let mut pairs = Vec::new();
        for block in self.connected_components() {
            let sub = self.restrict(&block).expect("restriction");
            let order: Vec<usize> = sub
                .least_extension()
                .iter()
                .map(|&i| block[i - 1])
                .collect();
            pairs.extend(order.windows(2).map(|w| (w[0], w[1])));
        }
        Poset::from_covers(self.n, &pairs).expect("chain ordering")
    }

    /// Whether `self` is a direct sum of chains.
    pub fn is_sum_of_chains(&self) -> bool {
        self.connected_components().iter().all(|block| {
            block
                .iter()
                .all(|&a| block.iter().all(|&b| a == b || self.comparable(a, b)))
        })
    }
}

pub(crate) fn mask_to_labels(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

pub(crate) fn is_permutation(perm: &[usize]) -> bool {
    let n = perm.len();
    let mut seen = vec![false; n + 1];
    for &x in perm {
        if x == 0 || x > n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Whether some relabelling of `p` makes every relation of `p` hold in `q`.
pub fn poset_inclusion(p: &Poset, q: &Poset) -> Result<bool> {
    if p.n != q.n {
        return Err(Error::SizeMismatch(p.n, q.n));
    }
    if p.num_relations() > q.num_relations() {
        return Ok(false);
    }
    let n = p.n;
    let mut image = vec![usize::MAX; n];
    let mut used = 0u32;
    Ok(embed(p, q, 0, &mut image, &mut used))
}

// Backtracking over assignments image[a] for a = 0..n, checking relations
// among already-assigned elements.
fn embed(p: &Poset, q: &Poset, a: usize, image: &mut [usize], used: &mut u32) -> bool {
    let n = p.n;
    if a == n {
        return true;
    }
    for x in 0..n {
        if *used >> x & 1 == 1 {
            continue;
        }
        let ok = (0..a).all(|b| {
            (!p.less0(a, b) || q.less0(x, image[b])) && (!p.less0(b, a) || q.less0(image[b], x))
        });
        if ok {
            image[a] = x;
            *used |= 1 << x;
            if embed(p, q, a + 1, image, used) {
                return true;
            }
            *used &= !(1 << x);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pset(n: usize, rel: &[(usize, usize)]) -> Poset {
        Poset::from_covers(n, rel).unwrap()
    }

    #[test]
    fn closure_of_two_chains() {
        let p = pset(4, &[(1, 2), (3, 4)]);
        assert_eq!(p.relations(), vec![(1, 2), (3, 4)]);
        assert!(p.is_valid_order());
    }

    #[test]
    fn empty_covers_give_antichain() {
        let p = pset(3, &[]);
        assert!(p.is_antichain());
        assert!(p.relations().is_empty());
    }

    #[test]
    fn cycle_rejected() {
        assert!(matches!(
            Poset::from_covers(3, &[(1, 2), (2, 3), (3, 1)]),
            Err(Error::Cycle(_))
        ));
    }

    #[test]
    fn bad_label_rejected() {
        assert_eq!(
            Poset::from_covers(3, &[(1, 4)]),
            Err(Error::Label { label: 4, n: 3 })
        );
    }

    #[test]
    fn transitive_closure_is_taken() {
        let p = pset(3, &[(1, 2), (2, 3)]);
        assert!(p.less(1, 3));
        assert_eq!(p.covers().0, vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn connectivity() {
        assert!(!Poset::antichain(2).is_connected());
        assert!(Poset::chain(4).is_connected());
        assert!(pset(4, &[(1, 2), (3, 4), (3, 2)]).is_connected());
        assert!(Poset::chain(1).is_connected());
    }

    #[test]
    fn components() {
        assert_eq!(
            pset(4, &[(1, 2), (3, 4)]).connected_components(),
            vec![vec![1, 2], vec![3, 4]]
        );
        assert_eq!(Poset::chain(3).connected_components(), vec![vec![1, 2, 3]]);
        assert_eq!(
            pset(4, &[(1, 3), (2, 3)]).connected_components(),
            vec![vec![1, 2, 3], vec![4]]
        );
    }

    #[test]
    fn dual_examples() {
        let c = Poset::chain(3).dual();
        assert_eq!(c.relations(), vec![(2, 1), (3, 1), (3, 2)]);
        assert_eq!(Poset::antichain(4).dual(), Poset::antichain(4));
        let n = pset(4, &[(1, 2), (3, 4), (3, 2)]).dual();
        assert_eq!(n, pset(4, &[(2, 1), (4, 3), (2, 3)]));
    }

    #[test]
    fn families() {
        let (p, p1, p2) = Poset::n_shape_triple(4, 2).unwrap();
        assert_eq!(p, pset(4, &[(1, 2), (3, 4)]));
        assert_eq!(p1, pset(4, &[(1, 2), (3, 4), (3, 2)]));
        assert_eq!(p2, Poset::chain(4));
        assert!(p1.num_relations() > p.num_relations());
        assert!(p2.is_chain());
        assert_eq!(
            Poset::direct_sum(&[Poset::chain(1), Poset::chain(1)]).unwrap(),
            Poset::antichain(2)
        );
        assert_eq!(
            Poset::direct_sum(&[Poset::chain(2), Poset::chain(2)]).unwrap(),
            p
        );
        assert!(matches!(Poset::n_shape_triple(4, 4), Err(Error::Range(_))));
        assert!(matches!(Poset::n_shape_triple(4, 0), Err(Error::Range(_))));
    }

    #[test]
    fn random_poset_is_deterministic() {
        assert_eq!(Poset::random(1, 9).unwrap(), Poset::antichain(1));
        let a = Poset::random(5, 12345).unwrap();
        let b = Poset::random(5, 12345).unwrap();
        assert_eq!(a, b);
        assert!(a.is_valid_order());
    }

    #[test]
    fn inclusion() {
        let v = pset(3, &[(1, 3), (2, 3)]);
        assert!(poset_inclusion(&Poset::antichain(3), &v).unwrap());
        assert!(poset_inclusion(&v, &Poset::chain(3)).unwrap());
        assert!(!poset_inclusion(&Poset::chain(3), &Poset::antichain(3)).unwrap());
        // V is not contained in Lambda: it needs an element above two others
        assert!(!poset_inclusion(&v, &v.dual()).unwrap());
        assert_eq!(
            poset_inclusion(&v, &Poset::chain(4)),
            Err(Error::SizeMismatch(3, 4))
        );
    }

    #[test]
    fn chain_ordering_examples() {
        assert_eq!(Poset::antichain(3).chain_ordering(), Poset::antichain(3));
        let v4 = pset(4, &[(1, 3), (2, 3)]);
        assert_eq!(v4.chain_ordering(), pset(4, &[(1, 2), (2, 3)]));
        let two = pset(4, &[(1, 2), (3, 4)]);
        assert_eq!(two.chain_ordering(), two);
        assert!(v4.chain_ordering().is_sum_of_chains());
    }

    #[test]
    fn json_round_trip() {
        let p = pset(4, &[(1, 2), (3, 4), (3, 2)]);
        let s = p.to_json_string();
        assert_eq!(s, r#"{"n":4,"covers":[[1,2],[3,2],[3,4]]}"#);
        assert_eq!(Poset::parse_json(&s).unwrap(), p);
    }
}
