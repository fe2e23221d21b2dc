//! Exact transition matrices of the chains on `L(P)`, the lumping quotient
//! induced by the sort map, and the reversal conjugation.
//!
//! Rows and columns are indexed by [`ExtensionSet`] positions (lexicographic).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{t_op0, tau0, transposition0, ExtensionSet, Sorter};
use crate::poset::Poset;
use crate::rational::RationalMatrix;

/// Index distribution for the Bubley-Dyer chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    #[default]
    Uniform,
    /// `p_i` proportional to `i (n - i)`.
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainSpec {
    RandomToRandom,
    RandomToTop,
    BubleyDyer(Weighting),
    TranspositionAnalogue,
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainSpec::RandomToRandom => write!(f, "random-to-random"),
            ChainSpec::RandomToTop => write!(f, "random-to-top"),
            ChainSpec::BubleyDyer(Weighting::Uniform) => write!(f, "bubley-dyer"),
            ChainSpec::BubleyDyer(Weighting::Quadratic) => write!(f, "bubley-dyer-quadratic"),
            ChainSpec::TranspositionAnalogue => write!(f, "transposition"),
        }
    }
}

impl std::str::FromStr for ChainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "r2r" | "random-to-random" => ChainSpec::RandomToRandom,
            "r2t" | "random-to-top" => ChainSpec::RandomToTop,
            "bd" | "bubley-dyer" => ChainSpec::BubleyDyer(Weighting::Uniform),
            "bd-quadratic" | "bubley-dyer-quadratic" => ChainSpec::BubleyDyer(Weighting::Quadratic),
            "transposition" => ChainSpec::TranspositionAnalogue,
            other => return Err(Error::Parse(format!("unknown chain {other:?}"))),
        })
    }
}

/// For each state, the target of every equally likely move.
#[derive(Clone, Debug)]
pub struct MoveTable {
    dim: usize,
    moves: usize,
    targets: Vec<u32>,
}

impl MoveTable {
    fn build(
        p: &Poset,
        ext: &ExtensionSet,
        moves: usize,
        apply: impl Fn(&mut [u8], usize),
    ) -> Self {
        let dim = ext.len();
        let mut targets = Vec::with_capacity(dim * moves);
        let mut w = vec![0u8; p.size()];
        for s in 0..dim {
            for m in 0..moves {
                w.copy_from_slice(ext.letters(s));
                apply(&mut w, m);
                let t = ext.index_of_letters(&w).expect("operators preserve L(P)");
                targets.push(t as u32);
            }
        }
        MoveTable {
            dim,
            moves,
            targets,
        }
    }

    /// Moves `(i, j)` in `[n]^2` applying `T_{i,j}`.
    pub fn random_to_random(p: &Poset, ext: &ExtensionSet) -> Self {
        let n = p.size();
        Self::build(p, ext, n * n, |w, m| t_op0(p, w, m / n, m % n))
    }

    /// Moves `i` in `[n]` applying `T_{i,n}`.
    pub fn random_to_top(p: &Poset, ext: &ExtensionSet) -> Self {
        let n = p.size();
        Self::build(p, ext, n, |w, m| t_op0(p, w, m, n - 1))
    }

    /// Moves `(i, j)` in `[n]^2` applying the tau-substituted transposition.
    pub fn transposition(p: &Poset, ext: &ExtensionSet) -> Self {
        let n = p.size();
        Self::build(p, ext, n * n, |w, m| transposition0(p, w, m / n, m % n))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moves(&self) -> usize {
        self.moves
    }

    pub fn targets(&self, state: usize) -> &[u32] {
        &self.targets[state * self.moves..(state + 1) * self.moves]
    }

    /// Transition matrix: entry counts over the number of moves.
    pub fn to_matrix(&self) -> RationalMatrix {
        let d = self.dim;
        let mut num = vec![0i64; d * d];
        for s in 0..d {
            for &t in self.targets(s) {
                num[s * d + t as usize] += 1;
            }
        }
        RationalMatrix::from_parts(d, self.moves as i64, num)
    }

    /// One step of the distribution `dist` (a row vector).
    pub fn step(&self, dist: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let w = 1.0 / self.moves as f64;
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let share = mass * w;
            for &t in self.targets(s) {
                out[t as usize] += share;
            }
        }
    }
}

/// `M(pi, pi') = |{(i, j) : pi' = pi . T_{i,j}}| / n^2`.
pub fn build_r2r_matrix(p: &Poset, ext: &ExtensionSet) -> RationalMatrix {
    MoveTable::random_to_random(p, ext).to_matrix()
}

/// `N(pi, pi') = |{i : pi' = pi . T_{i,n}}| / n`.
pub fn build_random_to_top_matrix(p: &Poset, ext: &ExtensionSet) -> RationalMatrix {
    MoveTable::random_to_top(p, ext).to_matrix()
}

/// Lazy adjacent-swap chain: stay with probability 1/2, otherwise apply
/// `tau_i` with `i` drawn from `weighting`.
pub fn build_bubley_dyer_matrix(
    p: &Poset,
    ext: &ExtensionSet,
    weighting: Weighting,
) -> RationalMatrix {
    let n = p.size();
    let d = ext.len();
    if n < 2 {
        return RationalMatrix::identity(d);
    }
    // integer weights w_i for i = 1..n-1 and their total
    let weights: Vec<i64> = (1..n)
        .map(|i| match weighting {
            Weighting::Uniform => 1,
            Weighting::Quadratic => (i * (n - i)) as i64,
        })
        .collect();
    let total: i64 = weights.iter().sum();
    let mut num = vec![0i64; d * d];
    let mut w = vec![0u8; n];
    for s in 0..d {
        num[s * d + s] += total;
        for (k, &wk) in weights.iter().enumerate() {
            w.copy_from_slice(ext.letters(s));
            tau0(p, &mut w, k);
            let t = ext.index_of_letters(&w).expect("tau preserves L(P)");
            num[s * d + t] += wk;
        }
    }
    RationalMatrix::from_parts(d, 2 * total, num)
}

/// `(1/n^2)` times the count of `(i, j)` carrying `pi` to `pi'` through the
/// tau-substituted transposition word.
pub fn build_transposition_matrix(p: &Poset, ext: &ExtensionSet) -> RationalMatrix {
    MoveTable::transposition(p, ext).to_matrix()
}

pub fn build_matrix(p: &Poset, ext: &ExtensionSet, spec: ChainSpec) -> RationalMatrix {
    match spec {
        ChainSpec::RandomToRandom => build_r2r_matrix(p, ext),
        ChainSpec::RandomToTop => build_random_to_top_matrix(p, ext),
        ChainSpec::BubleyDyer(w) => build_bubley_dyer_matrix(p, ext, w),
        ChainSpec::TranspositionAnalogue => build_transposition_matrix(p, ext),
    }
}

/// Which Gram product of the random-to-top matrix reproduces `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorOrientation {
    /// `M = N N^t` only.
    NNt,
    /// `M = N^t N` only.
    NtN,
    Both,
    Neither,
}

impl FactorOrientation {
    pub fn is_unique(self) -> bool {
        matches!(self, FactorOrientation::NNt | FactorOrientation::NtN)
    }
}

pub fn factorization_orientation(
    m: &RationalMatrix,
    n: &RationalMatrix,
) -> Result<FactorOrientation> {
    let nt = n.transpose();
    let left = n.mul(&nt)? == *m;
    let right = nt.mul(n)? == *m;
    Ok(match (left, right) {
        (true, false) => FactorOrientation::NNt,
        (false, true) => FactorOrientation::NtN,
        (true, true) => FactorOrientation::Both,
        (false, false) => FactorOrientation::Neither,
    })
}

/// Checks the lumping condition for the partition `fibers` of the state
/// indices and returns the quotient matrix (fibers in the given order).
pub fn lumped_matrix(m: &RationalMatrix, fibers: &[Vec<usize>]) -> Result<RationalMatrix> {
    let d = m.dim();
    let mut block_of = vec![usize::MAX; d];
    for (b, fiber) in fibers.iter().enumerate() {
        if fiber.is_empty() {
            return Err(Error::Range(format!("fiber {b} is empty")));
        }
        for &s in fiber {
            if s >= d || block_of[s] != usize::MAX {
                return Err(Error::Range(format!("fibers do not partition 0..{d}")));
            }
            block_of[s] = b;
        }
    }
    if block_of.contains(&usize::MAX) {
        return Err(Error::Range(format!("fibers do not cover 0..{d}")));
    }
    let k = fibers.len();
    let nums = m.numerators();
    let block_sums = |s: usize| {
        let mut sums = vec![0i64; k];
        for (t, &x) in nums[s * d..(s + 1) * d].iter().enumerate() {
            sums[block_of[t]] += x;
        }
        sums
    };
    let mut quotient = Vec::with_capacity(k * k);
    for fiber in fibers {
        let rep = block_sums(fiber[0]);
        for &s in &fiber[1..] {
            let other = block_sums(s);
            if let Some(block) = (0..k).find(|&b| other[b] != rep[b]) {
                return Err(Error::NotLumpable {
                    sigma: fiber[0],
                    sigma_prime: s,
                    block,
                });
            }
        }
        quotient.extend(rep);
    }
    Ok(RationalMatrix::from_parts(k, m.den(), quotient))
}

/// Preimages of the sort map `L(p) -> L(q)`, indexed by `L(q)` positions.
pub fn sort_fibers(
    p: &Poset,
    q: &Poset,
    ext_p: &ExtensionSet,
    ext_q: &ExtensionSet,
) -> Result<Vec<Vec<usize>>> {
    let sorter = Sorter::new(p, q)?;
    let mut fibers = vec![Vec::new(); ext_q.len()];
    let mut w = vec![0u8; p.size()];
    for s in 0..ext_p.len() {
        w.copy_from_slice(ext_p.letters(s));
        sorter.sort0(&mut w);
        let t = ext_q
            .index_of_letters(&w)
            .ok_or(Error::IncompatiblePosets)?;
        fibers[t].push(s);
    }
    Ok(fibers)
}

/// Position in `L(p)` of the reversal of each extension of `dual(p)`.
pub fn reversal_permutation(
    p: &Poset,
    ext_p: &ExtensionSet,
    ext_dual: &ExtensionSet,
) -> Vec<usize> {
    let n = p.size();
    let mut w = vec![0u8; n];
    (0..ext_dual.len())
        .map(|b| {
            w.copy_from_slice(ext_dual.letters(b));
            w.reverse();
            ext_p
                .index_of_letters(&w)
                .expect("reversal maps L(dual) onto L(P)")
        })
        .collect()
}

/// `R^t M R` for the 0/1 matrix `R` of the reversal bijection
/// `L(p) -> L(dual p)`; indexed by `L(dual p)`.
pub fn conjugate_by_reversal(p: &Poset, m: &RationalMatrix) -> Result<RationalMatrix> {
    let ext_p = ExtensionSet::enumerate(p);
    if m.dim() != ext_p.len() {
        return Err(Error::DimensionMismatch(m.dim(), ext_p.len()));
    }
    let ext_dual = ExtensionSet::enumerate(&p.dual());
    let perm = reversal_permutation(p, &ext_p, &ext_dual);
    Ok(m.permuted(&perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extensions::LinearExtension;
    use num_rational::Ratio;

    fn two_chains() -> Poset {
        Poset::from_covers(4, &[(1, 2), (3, 4)]).unwrap()
    }

    /// Lexicographic index of each extension in the order
    /// 3412, 3142, 3124, 1342, 1324, 1234.
    fn example_order(ext: &ExtensionSet) -> Vec<usize> {
        ["3412", "3142", "3124", "1342", "1324", "1234"]
            .iter()
            .map(|s| {
                ext.index_of(&s.parse::<LinearExtension>().unwrap())
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn two_chain_matrix_matches_sixteenths() {
        let p = two_chains();
        let ext = ExtensionSet::enumerate(&p);
        let m = build_r2r_matrix(&p, &ext).permuted(&example_order(&ext));
        let expected: Vec<i64> = vec![
            8, 4, 2, 2, 0, 0, 4, 4, 3, 3, 2, 0, 2, 3, 6, 0, 3, 2, 2, 3, 0, 6, 3, 2, 0, 2, 3, 3, 4,
            4, 0, 0, 2, 2, 4, 8,
        ];
        assert_eq!(m, RationalMatrix::from_parts(6, 16, expected));
    }

    #[test]
    fn chain_matrices_are_trivial() {
        let c = Poset::chain(4);
        let ext = ExtensionSet::enumerate(&c);
        for spec in [
            ChainSpec::RandomToRandom,
            ChainSpec::RandomToTop,
            ChainSpec::BubleyDyer(Weighting::Uniform),
            ChainSpec::TranspositionAnalogue,
        ] {
            assert_eq!(build_matrix(&c, &ext, spec), RationalMatrix::identity(1));
        }
    }

    /// Card removal and reinsertion on plain permutations, independent of the
    /// tau operators.
    fn insertion_oracle(n: usize) -> (ExtensionSet, Vec<Vec<Ratio<i64>>>) {
        let ext = ExtensionSet::enumerate(&Poset::antichain(n));
        let d = ext.len();
        let mut rows = vec![vec![Ratio::from_integer(0); d]; d];
        for (a, row) in rows.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut w = ext.get(a).0;
                    let card = w.remove(i);
                    w.insert(j, card);
                    let b = ext.index_of(&LinearExtension(w)).unwrap();
                    row[b] += Ratio::new(1, (n * n) as i64);
                }
            }
        }
        (ext, rows)
    }

    #[test]
    fn antichain_matches_card_insertion() {
        for n in 2..=4 {
            let (ext, rows) = insertion_oracle(n);
            let m = build_r2r_matrix(&Poset::antichain(n), &ext);
            assert_eq!(m, RationalMatrix::from_rows(&rows));
        }
    }

    #[test]
    fn antichain3_entries() {
        let p = Poset::antichain(3);
        let ext = ExtensionSet::enumerate(&p);
        let m = build_r2r_matrix(&p, &ext);
        let at = |a: &str, b: &str| {
            m.get(
                ext.index_of(&a.parse().unwrap()).unwrap(),
                ext.index_of(&b.parse().unwrap()).unwrap(),
            )
        };
        assert_eq!(at("123", "123"), Ratio::new(1, 3));
        assert_eq!(at("123", "213"), Ratio::new(2, 9));
        assert_eq!(at("123", "132"), Ratio::new(2, 9));
        // single-card moves across two positions are 3-cycles
        assert_eq!(at("123", "231"), Ratio::new(1, 9));
        assert_eq!(at("123", "312"), Ratio::new(1, 9));
        // a non-adjacent transposition is not one move away
        assert_eq!(at("123", "321"), Ratio::new(0, 1));
    }

    #[test]
    fn small_antichain_matrices() {
        let p = Poset::antichain(2);
        let ext = ExtensionSet::enumerate(&p);
        let half = RationalMatrix::from_parts(2, 2, vec![1, 1, 1, 1]);
        assert_eq!(build_random_to_top_matrix(&p, &ext), half);
        assert_eq!(build_transposition_matrix(&p, &ext), half);
        // stay with probability 1/2, otherwise tau_1 always swaps
        assert_eq!(build_bubley_dyer_matrix(&p, &ext, Weighting::Uniform), half);
    }

    #[test]
    fn two_chain_factorization() {
        let p = two_chains();
        let ext = ExtensionSet::enumerate(&p);
        let m = build_r2r_matrix(&p, &ext);
        let n = build_random_to_top_matrix(&p, &ext);
        assert_eq!(n.mul(&n.transpose()).unwrap(), m);
        assert_eq!(
            factorization_orientation(&m, &n).unwrap(),
            FactorOrientation::NNt
        );
    }

    #[test]
    fn bubley_dyer_properties() {
        let p = Poset::from_covers(4, &[(1, 3), (2, 3)]).unwrap();
        let ext = ExtensionSet::enumerate(&p);
        for w in [Weighting::Uniform, Weighting::Quadratic] {
            let m = build_bubley_dyer_matrix(&p, &ext, w);
            assert!(m.is_row_stochastic());
            assert!(m.is_symmetric());
            for i in 0..m.dim() {
                assert!(m.get(i, i) >= Ratio::new(1, 2));
            }
        }
    }

    #[test]
    fn lumping_v_plus_point() {
        let p = Poset::from_covers(4, &[(1, 3), (2, 3)]).unwrap();
        let q = p.chain_ordering();
        let (ep, eq) = (ExtensionSet::enumerate(&p), ExtensionSet::enumerate(&q));
        let fibers = sort_fibers(&p, &q, &ep, &eq).unwrap();
        let lumped = lumped_matrix(&build_r2r_matrix(&p, &ep), &fibers).unwrap();
        assert_eq!(lumped, build_r2r_matrix(&q, &eq));
    }

    #[test]
    fn lumping_identity_cases() {
        for p in [two_chains(), Poset::antichain(2)] {
            let ext = ExtensionSet::enumerate(&p);
            let fibers = sort_fibers(&p, &p.chain_ordering(), &ext, &ext).unwrap();
            assert!(fibers.iter().all(|f| f.len() == 1));
            let m = build_r2r_matrix(&p, &ext);
            assert_eq!(lumped_matrix(&m, &fibers).unwrap(), m);
        }
    }

    #[test]
    fn non_lumpable_partition_has_witness() {
        let p = Poset::antichain(3);
        let ext = ExtensionSet::enumerate(&p);
        let m = build_r2r_matrix(&p, &ext);
        let err = lumped_matrix(&m, &[vec![0, 1], vec![2, 3, 4, 5]]).unwrap_err();
        assert!(matches!(err, Error::NotLumpable { .. }), "{err:?}");
    }

    #[test]
    fn reversal_conjugation() {
        let p = two_chains();
        let ext = ExtensionSet::enumerate(&p);
        let m = build_r2r_matrix(&p, &ext);
        let dual = p.dual();
        let conj = conjugate_by_reversal(&p, &m).unwrap();
        assert_eq!(
            conj,
            build_r2r_matrix(&dual, &ExtensionSet::enumerate(&dual))
        );
    }
}
