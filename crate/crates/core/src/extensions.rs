//! Linear extensions and the operators acting on them on the right (on positions).
//!
//! Positions are 1-based in the public API. Operator words are applied
//! left factor first: `pi . tau_i tau_{i+1}` means apply `tau_i`, then `tau_{i+1}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poset::{is_permutation, Poset, MAX_SIZE};

/// A permutation word `pi_1 ... pi_n` of `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinearExtension(pub Vec<usize>);

impl LinearExtension {
    pub fn new(word: Vec<usize>) -> Result<Self> {
        if !is_permutation(&word) {
            return Err(Error::NotAPermutation(word.len()));
        }
        Ok(LinearExtension(word))
    }

    /// A word validated against `p`.
    pub fn of(p: &Poset, word: Vec<usize>) -> Result<Self> {
        if word.len() != p.size() {
            return Err(Error::NotAPermutation(p.size()));
        }
        if !is_linear_extension(p, &word)? {
            return Err(Error::NotALinearExtension);
        }
        Ok(LinearExtension(word))
    }

    pub fn word(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The reversed word, a linear extension of the dual poset.
    pub fn reversed(&self) -> LinearExtension {
        LinearExtension(self.0.iter().rev().copied().collect())
    }

    /// Compact digit-string form, available for `n <= 9`.
    pub fn compact(&self) -> Option<String> {
        if self.0.len() > 9 {
            return None;
        }
        Some(self.0.iter().map(|d| char::from(b'0' + *d as u8)).collect())
    }
}

impl fmt::Display for LinearExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for LinearExtension {
    type Err = Error;

    /// Accepts space-separated integers, or a digit string when `n <= 9`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let word: Vec<usize> = if s.contains(char::is_whitespace) || s.contains(',') {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Parse(format!("bad digit {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        LinearExtension::new(word)
    }
}

/// Whether `word` (a permutation of `1..=n`) respects every relation of `p`.
pub fn is_linear_extension(p: &Poset, word: &[usize]) -> Result<bool> {
    if word.len() != p.size() || !is_permutation(word) {
        return Err(Error::NotAPermutation(p.size()));
    }
    let mut seen = 0u32;
    for &x in word {
        // everything below x must already be placed
        if p.down_mask(x - 1) & !seen != 0 {
            return Ok(false);
        }
        seen |= 1 << (x - 1);
    }
    Ok(true)
}

/// All linear extensions of a poset in lexicographic order, with index lookup.
#[derive(Clone, Debug)]
pub struct ExtensionSet {
    n: usize,
    // 0-based letters, n per word
    letters: Vec<u8>,
    keys: Vec<u64>,
}

/// Packs a 0-based word, first letter most significant, so numeric order is
/// lexicographic order.
#[inline]
pub(crate) fn pack(word0: &[u8]) -> u64 {
    word0.iter().fold(0u64, |acc, &x| acc << 4 | x as u64)
}

impl ExtensionSet {
    /// Backtracking over currently minimal elements, least first.
    pub fn enumerate(p: &Poset) -> ExtensionSet {
        let n = p.size();
        let mut set = ExtensionSet {
            n,
            letters: Vec::new(),
            keys: Vec::new(),
        };
        let mut word = Vec::with_capacity(n);
        extend_from(p, 0, &mut word, &mut set);
        set
    }

    pub fn poset_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// The 0-based letters of extension `idx`.
    pub(crate) fn letters(&self, idx: usize) -> &[u8] {
        &self.letters[idx * self.n..(idx + 1) * self.n]
    }

    pub fn get(&self, idx: usize) -> LinearExtension {
        LinearExtension(self.letters(idx).iter().map(|&x| x as usize + 1).collect())
    }

    pub(crate) fn index_of_letters(&self, word0: &[u8]) -> Option<usize> {
        self.keys.binary_search(&pack(word0)).ok()
    }

    pub fn index_of(&self, w: &LinearExtension) -> Option<usize> {
        if w.len() != self.n {
            return None;
        }
        let word0: Vec<u8> = w.0.iter().map(|&x| (x - 1) as u8).collect();
        self.index_of_letters(&word0)
    }

    pub fn iter(&self) -> impl Iterator<Item = LinearExtension> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

fn extend_from(p: &Poset, placed: u32, word: &mut Vec<u8>, set: &mut ExtensionSet) {
    let n = p.size();
    if word.len() == n {
        set.letters.extend_from_slice(word);
        set.keys.push(pack(word));
        return;
    }
    for a in 0..n {
        if placed >> a & 1 == 0 && p.down_mask(a) & !placed == 0 {
            word.push(a as u8);
            extend_from(p, placed | 1 << a, word, set);
            word.pop();
        }
    }
}

/// Convenience wrapper for [`ExtensionSet::enumerate`].
pub fn enumerate_extensions(p: &Poset) -> ExtensionSet {
    debug_assert!(p.size() <= MAX_SIZE);
    ExtensionSet::enumerate(p)
}

// ---- in-place operators on 0-based letters; `i` is a 0-based position ----

#[inline]
pub(crate) fn tau0(p: &Poset, w: &mut [u8], i: usize) {
    let (a, b) = (w[i] as usize, w[i + 1] as usize);
    if !p.comparable0(a, b) {
        w.swap(i, i + 1);
    }
}

/// `T_{i,j}` with 0-based positions.
#[inline]
pub(crate) fn t_op0(p: &Poset, w: &mut [u8], i: usize, j: usize) {
    if i <= j {
        for k in i..j {
            tau0(p, w, k);
        }
    } else {
        for k in (j..i).rev() {
            tau0(p, w, k);
        }
    }
}

/// The tau-substituted transposition word, 0-based positions.
#[inline]
pub(crate) fn transposition0(p: &Poset, w: &mut [u8], i: usize, j: usize) {
    if i == j {
        return;
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    if i < j {
        // tau_i ... tau_{j-2} tau_{j-1} tau_{j-2} ... tau_i
        for k in lo..hi {
            tau0(p, w, k);
        }
        for k in (lo..hi - 1).rev() {
            tau0(p, w, k);
        }
    } else {
        // tau_{i-1} ... tau_{j+1} tau_j tau_{j+1} ... tau_{i-1}
        for k in (lo..hi).rev() {
            tau0(p, w, k);
        }
        for k in lo + 1..hi {
            tau0(p, w, k);
        }
    }
}

fn to_letters(p: &Poset, pi: &LinearExtension) -> Result<Vec<u8>> {
    if !is_linear_extension(p, &pi.0)? {
        return Err(Error::NotALinearExtension);
    }
    Ok(pi.0.iter().map(|&x| (x - 1) as u8).collect())
}

fn from_letters(w: &[u8]) -> LinearExtension {
    LinearExtension(w.iter().map(|&x| x as usize + 1).collect())
}

fn check_pos(pos: usize, max: usize) -> Result<()> {
    if pos == 0 || pos > max {
        return Err(Error::PositionRange { pos, max });
    }
    Ok(())
}

/// `pi . tau_i`: swap positions `i, i+1` when their values are incomparable.
pub fn apply_tau(p: &Poset, pi: &LinearExtension, i: usize) -> Result<LinearExtension> {
    check_pos(i, p.size().saturating_sub(1))?;
    let mut w = to_letters(p, pi)?;
    tau0(p, &mut w, i - 1);
    Ok(from_letters(&w))
}

/// `pi . T_{i,j}`: move the entry at position `i` towards position `j`
/// through consecutive taus.
pub fn apply_t(p: &Poset, pi: &LinearExtension, i: usize, j: usize) -> Result<LinearExtension> {
    check_pos(i, p.size())?;
    check_pos(j, p.size())?;
    let mut w = to_letters(p, pi)?;
    t_op0(p, &mut w, i - 1, j - 1);
    Ok(from_letters(&w))
}

/// The transposition `t_{i,j}` written in simple transpositions with each
/// `s_k` replaced by `tau_k`.
pub fn apply_transposition_analogue(
    p: &Poset,
    pi: &LinearExtension,
    i: usize,
    j: usize,
) -> Result<LinearExtension> {
    check_pos(i, p.size())?;
    check_pos(j, p.size())?;
    let mut w = to_letters(p, pi)?;
    transposition0(p, &mut w, i - 1, j - 1);
    Ok(from_letters(&w))
}

/// Re-sorts, within each connected component of `p`, the values occupying
/// that component's positions according to `q`'s chain order.
pub fn sort_map(p: &Poset, q: &Poset, pi: &LinearExtension) -> Result<LinearExtension> {
    let sorter = Sorter::new(p, q)?;
    let mut w = to_letters(p, pi)?;
    sorter.sort0(&mut w);
    Ok(from_letters(&w))
}

/// Precomputed component data for repeated sort-map applications.
pub(crate) struct Sorter {
    // component id of each 0-based element
    comp: Vec<usize>,
    // per component, its elements in q's chain order (0-based)
    order: Vec<Vec<u8>>,
}

impl Sorter {
    pub(crate) fn new(p: &Poset, q: &Poset) -> Result<Sorter> {
        if p.size() != q.size() {
            return Err(Error::IncompatiblePosets);
        }
        let blocks = p.connected_components();
        if q.connected_components() != blocks || !q.is_sum_of_chains() {
            return Err(Error::IncompatiblePosets);
        }
        if p.relations().iter().any(|&(a, b)| !q.less(a, b)) {
            return Err(Error::IncompatiblePosets);
        }
        let mut comp = vec![0; p.size()];
        let mut order = Vec::with_capacity(blocks.len());
        for (c, block) in blocks.iter().enumerate() {
            let mut elems: Vec<u8> = block.iter().map(|&a| (a - 1) as u8).collect();
            // in a chain, rank = number of elements below
            elems.sort_by_key(|&a| q.down_mask(a as usize).count_ones());
            for &a in &elems {
                comp[a as usize] = c;
            }
            order.push(elems);
        }
        Ok(Sorter { comp, order })
    }

    pub(crate) fn sort0(&self, w: &mut [u8]) {
        let mut next = vec![0usize; self.order.len()];
        for x in w.iter_mut() {
            let c = self.comp[*x as usize];
            *x = self.order[c][next[c]];
            next[c] += 1;
        }
    }
}

/// Reverses a word; maps `L(P)` bijectively onto `L(dual P)`.
pub fn reverse_extension(pi: &LinearExtension) -> LinearExtension {
    pi.reversed()
}

/// A sequence of at most `n` moves `(i, j)` whose successive application via
/// [`apply_t`] carries `from` to `to`: for each target position, the wanted
/// value is brought forward with one `T_{j,i}`.
pub fn sorting_path(
    p: &Poset,
    from: &LinearExtension,
    to: &LinearExtension,
) -> Result<Vec<(usize, usize)>> {
    let mut w = to_letters(p, from)?;
    let target = to_letters(p, to)?;
    let mut path = Vec::new();
    for i in 0..w.len() {
        let j = (i..w.len())
            .find(|&j| w[j] == target[i])
            .expect("value present");
        if j != i {
            t_op0(p, &mut w, j, i);
            debug_assert_eq!(w[i], target[i]);
            path.push((j + 1, i + 1));
        }
    }
    Ok(path)
}
