//! Exact mixing times, the relaxation-time sandwich, sampling and diameters.
//!
//! Distances are computed from floating-point matrix powers after a single
//! rational-to-float conversion; `d(k)` only needs about 1e-12 accuracy.

use std::collections::VecDeque;

use nalgebra::{DMatrix, RowDVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_form;
use crate::chains::{build_matrix, ChainSpec, MoveTable, Weighting};
use crate::error::{Error, Result};
use crate::extensions::{sorting_path, t_op0, ExtensionSet, LinearExtension};
use crate::poset::{CoverList, Poset};
use crate::rational::RationalMatrix;
use crate::rng::stream_rng;
use crate::spectral::{eigenvalues_symmetric, DEFAULT_TOL};

/// Start-state convention recorded in single-start reports.
pub const LEAST_EXTENSION_START: &str = "lexicographically least extension";

/// Half the L1 distance between two distributions.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    for v in [a, b] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-12 || v.iter().any(|&x| x < -1e-15) {
            return Err(Error::NotADistribution);
        }
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

// Distance to uniform of a row of length d.
fn tv_to_uniform(row: impl Iterator<Item = f64>, d: usize) -> f64 {
    let u = 1.0 / d as f64;
    0.5 * row.map(|x| (x - u).abs()).sum::<f64>()
}

fn check_chain(m: &RationalMatrix) -> Result<()> {
    // every chain here is doubly stochastic, so the stationary law is uniform
    if !m.is_doubly_stochastic() {
        return Err(Error::NotStochastic);
    }
    Ok(())
}

/// Iterates `d(k)` for `k = 0, 1, ...` (worst case over starts, or from one start).
struct Profiler {
    d: usize,
    step: DMatrix<f64>,
    state: Profile,
}

enum Profile {
    All(DMatrix<f64>),
    From(RowDVector<f64>),
}

impl Profiler {
    fn new(m: &RationalMatrix, from_state: Option<usize>) -> Result<Self> {
        check_chain(m)?;
        let d = m.dim();
        if let Some(s) = from_state {
            if s >= d {
                return Err(Error::Range(format!("start state {s} outside 0..{d}")));
            }
        }
        let step = DMatrix::from_row_slice(d, d, &m.to_f64());
        let state = match from_state {
            None => Profile::All(DMatrix::identity(d, d)),
            Some(s) => {
                let mut v = RowDVector::zeros(d);
                v[s] = 1.0;
                Profile::From(v)
            }
        };
        Ok(Profiler { d, step, state })
    }

    fn distance(&self) -> f64 {
        match &self.state {
            Profile::All(pk) => (0..self.d)
                .map(|r| tv_to_uniform(pk.row(r).iter().copied(), self.d))
                .fold(0.0, f64::max),
            Profile::From(v) => tv_to_uniform(v.iter().copied(), self.d),
        }
    }

    fn advance(&mut self) {
        match &mut self.state {
            Profile::All(pk) => *pk = &*pk * &self.step,
            Profile::From(v) => *v = &*v * &self.step,
        }
    }
}

/// `d(k) = max_x ||M^k(x, .) - uniform||` for `k = 0..=k_max`, or the
/// single-start distance when `from_state` is given.
pub fn distance_profile(
    m: &RationalMatrix,
    from_state: Option<usize>,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let mut prof = Profiler::new(m, from_state)?;
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        out.push((k, prof.distance()));
        if k < k_max {
            prof.advance();
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub chain: Option<String>,
    pub epsilon: f64,
    pub num_states: usize,
    /// `None` for the worst case over all starts.
    pub start: Option<String>,
    pub t_mix: usize,
    /// `max(lambda_2, |lambda_min|)`; zero for a single state.
    pub lambda_star: f64,
    pub t_rel: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub diameter: usize,
    pub profile: Vec<(usize, f64)>,
    /// `lower_bound <= t_mix <= upper_bound` (meaningful for worst-case reports).
    pub sandwich_holds: bool,
    /// `t_mix >= diameter / 2`.
    pub diameter_bound_holds: bool,
}

/// First `k` with `d(k) <= epsilon`, together with the relaxation-time bounds
/// `(t_rel - 1) ln(1/(2 eps)) <= t_mix <= ln(1/(eps pi_min)) t_rel`.
pub fn exact_mixing_time(
    m: &RationalMatrix,
    epsilon: f64,
    from_state: Option<usize>,
) -> Result<MixingReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon {epsilon} outside (0, 1)")));
    }
    check_chain(m)?;
    let d = m.dim();
    let lambda_star = if d == 1 {
        0.0
    } else {
        let eigs = eigenvalues_symmetric(m, DEFAULT_TOL)?;
        eigs[1].max(eigs[d - 1].abs())
    };
    if lambda_star >= 1.0 - 1e-12 {
        return Err(Error::NoConvergence(0));
    }
    let t_rel = 1.0 / (1.0 - lambda_star);
    let pi_min = 1.0 / d as f64;
    let lower_bound = (t_rel - 1.0) * (1.0 / (2.0 * epsilon)).ln();
    let upper_bound = (1.0 / (epsilon * pi_min)).ln() * t_rel;
    let cap = ((10.0 * upper_bound).ceil() as usize).max(1);

    let mut prof = Profiler::new(m, from_state)?;
    let mut profile = Vec::new();
    let mut k = 0;
    loop {
        let dk = prof.distance();
        profile.push((k, dk));
        if dk <= epsilon {
            break;
        }
        if k >= cap {
            return Err(Error::NoConvergence(cap));
        }
        prof.advance();
        k += 1;
    }
    let t_mix = k;
    let diameter = support_diameter(m);
    Ok(MixingReport {
        chain: None,
        epsilon,
        num_states: d,
        start: from_state.map(|_| LEAST_EXTENSION_START.to_string()),
        t_mix,
        lambda_star,
        t_rel,
        lower_bound,
        upper_bound,
        diameter,
        profile,
        sandwich_holds: lower_bound <= t_mix as f64 + 1e-9 && t_mix as f64 <= upper_bound + 1e-9,
        diameter_bound_holds: 2 * t_mix >= diameter,
    })
}

/// Worst-case mixing report for `spec` on `p`.
pub fn mixing_report(p: &Poset, spec: ChainSpec, epsilon: f64) -> Result<MixingReport> {
    let ext = ExtensionSet::enumerate(p);
    let m = build_matrix(p, &ext, spec);
    let mut report = exact_mixing_time(&m, epsilon, None)?;
    report.chain = Some(spec.to_string());
    Ok(report)
}

pub fn bubley_dyer_mixing(p: &Poset, epsilon: f64) -> Result<MixingReport> {
    mixing_report(p, ChainSpec::BubleyDyer(Weighting::Uniform), epsilon)
}

/// Side-by-side mixing of the random-to-random and Bubley-Dyer chains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainComparison {
    pub random_to_random: MixingReport,
    pub bubley_dyer: MixingReport,
    /// Expected tau applications per random-to-random step over those per
    /// Bubley-Dyer step: `E|i - j| / (1/2) = 2 (n^2 - 1) / (3 n)`.
    pub step_cost_ratio: f64,
    pub t_mix_ratio: f64,
}

pub fn compare_chains(p: &Poset, epsilon: f64) -> Result<ChainComparison> {
    let r2r = mixing_report(p, ChainSpec::RandomToRandom, epsilon)?;
    let bd = bubley_dyer_mixing(p, epsilon)?;
    let n = p.size() as f64;
    let t_mix_ratio = if bd.t_mix == 0 {
        1.0
    } else {
        r2r.t_mix as f64 / bd.t_mix as f64
    };
    Ok(ChainComparison {
        step_cost_ratio: 2.0 * (n * n - 1.0) / (3.0 * n),
        t_mix_ratio,
        random_to_random: r2r,
        bubley_dyer: bd,
    })
}

/// One random-to-random step: `i, j` uniform on `1..=n`, apply `T_{i,j}`.
pub fn chain_step<R: Rng + ?Sized>(
    p: &Poset,
    pi: &LinearExtension,
    rng: &mut R,
) -> LinearExtension {
    let mut w: Vec<u8> = pi.0.iter().map(|&x| (x - 1) as u8).collect();
    step_letters(p, &mut w, rng);
    LinearExtension(w.iter().map(|&x| x as usize + 1).collect())
}

#[inline]
fn step_letters<R: Rng + ?Sized>(p: &Poset, w: &mut [u8], rng: &mut R) {
    let n = p.size();
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    t_op0(p, w, i, j);
}

/// How many steps each sampling chain runs before its state is kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BurnIn {
    /// `ceil(n^2 ln(10 n!) / (n + 2))`: the relaxation bound `n^2/(n+2)` in
    /// the upper mixing bound at `eps = 0.1`, `pi_min = 1/n!`.
    #[default]
    Conjectured,
    /// `ceil(ln(10 |L(P)|) t_rel)` using the actual second eigenvalue.
    Paranoid,
    Steps(usize),
}

pub fn burn_in_steps(p: &Poset, burn_in: BurnIn) -> Result<usize> {
    let n = p.size() as f64;
    Ok(match burn_in {
        BurnIn::Steps(k) => k,
        BurnIn::Conjectured => {
            let ln_fact: f64 = (1..=p.size()).map(|k| (k as f64).ln()).sum();
            (n * n * ((10.0f64).ln() + ln_fact) / (n + 2.0)).ceil() as usize
        }
        BurnIn::Paranoid => {
            let ext = ExtensionSet::enumerate(p);
            if ext.len() == 1 {
                return Ok(0);
            }
            let m = build_matrix(p, &ext, ChainSpec::RandomToRandom);
            let eigs = eigenvalues_symmetric(&m, DEFAULT_TOL)?;
            let lambda_star = eigs[1].max(eigs[eigs.len() - 1].abs());
            ((10.0 * ext.len() as f64).ln() / (1.0 - lambda_star)).ceil() as usize
        }
    })
}

/// `count` independent chains from the least extension, each run for the
/// burn-in; chain `c` draws from stream `c` of `seed`.
pub fn sample_extensions(
    p: &Poset,
    count: usize,
    burn_in: BurnIn,
    seed: u64,
) -> Result<Vec<LinearExtension>> {
    if count == 0 {
        return Err(Error::Range("count must be at least 1".into()));
    }
    let steps = burn_in_steps(p, burn_in)?;
    let start: Vec<u8> = p.least_extension().iter().map(|&x| (x - 1) as u8).collect();
    Ok((0..count as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let mut w = start.clone();
            for _ in 0..steps {
                step_letters(p, &mut w, &mut rng);
            }
            LinearExtension(w.iter().map(|&x| x as usize + 1).collect())
        })
        .collect())
}

/// A replayable run of one chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTrace {
    pub seed: u64,
    pub start: LinearExtension,
    pub steps: usize,
    #[serde(rename = "final")]
    pub end: LinearExtension,
}

pub fn run_chain(p: &Poset, start: &LinearExtension, steps: usize, seed: u64) -> SampleTrace {
    let mut rng = stream_rng(seed, 0);
    let mut cur = start.clone();
    for _ in 0..steps {
        cur = chain_step(p, &cur, &mut rng);
    }
    SampleTrace {
        seed,
        start: start.clone(),
        steps,
        end: cur,
    }
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn max_eccentricity(adj: &[Vec<usize>]) -> usize {
    (0..adj.len())
        .into_par_iter()
        .map(|s| bfs(adj, s).into_iter().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

fn move_graph(table: &MoveTable) -> Vec<Vec<usize>> {
    (0..table.dim())
        .map(|s| {
            let mut nb: Vec<usize> = table
                .targets(s)
                .iter()
                .map(|&t| t as usize)
                .filter(|&t| t != s)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Largest graph distance between extensions under single `T_{i,j}` moves.
pub fn diameter(p: &Poset) -> usize {
    let ext = ExtensionSet::enumerate(p);
    max_eccentricity(&move_graph(&MoveTable::random_to_random(p, &ext)))
}

/// Diameter of the graph of positive off-diagonal entries.
pub fn support_diameter(m: &RationalMatrix) -> usize {
    let d = m.dim();
    let nums = m.numerators();
    let adj: Vec<Vec<usize>> = (0..d)
        .map(|r| (0..d).filter(|&c| c != r && nums[r * d + c] != 0).collect())
        .collect();
    max_eccentricity(&adj)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiameterCheck {
    pub n: usize,
    pub num_extensions: usize,
    pub diameter: usize,
    pub pairs_checked: usize,
    pub longest_path: usize,
    /// Every sorting path replays to its target.
    pub replay_ok: bool,
    /// Every sorting path is at least as long as the BFS distance.
    pub dominates_bfs: bool,
}

impl DiameterCheck {
    pub fn holds(&self) -> bool {
        self.diameter <= self.n
            && self.longest_path <= self.n
            && self.replay_ok
            && self.dominates_bfs
    }
}

/// BFS diameter plus the constructive sorting paths between all pairs
/// (or `max_pairs` seeded random pairs when there are more).
pub fn diameter_check(p: &Poset, max_pairs: Option<usize>, seed: u64) -> Result<DiameterCheck> {
    let ext = ExtensionSet::enumerate(p);
    let adj = move_graph(&MoveTable::random_to_random(p, &ext));
    let d = ext.len();
    let pairs: Vec<(usize, usize)> = match max_pairs {
        Some(k) if k < d * d => {
            let mut rng = stream_rng(seed, 0);
            (0..k)
                .map(|_| (rng.random_range(0..d), rng.random_range(0..d)))
                .collect()
        }
        _ => (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect(),
    };
    let mut sources: Vec<usize> = pairs.iter().map(|&(a, _)| a).collect();
    sources.sort_unstable();
    sources.dedup();
    let dists: Vec<(usize, Vec<usize>)> = sources.par_iter().map(|&s| (s, bfs(&adj, s))).collect();
    let lookup = |s: usize| &dists[dists.binary_search_by_key(&s, |x| x.0).unwrap()].1;
    let mut longest_path = 0;
    let mut replay_ok = true;
    let mut dominates_bfs = true;
    for &(a, b) in &pairs {
        let (from, to) = (ext.get(a), ext.get(b));
        let path = sorting_path(p, &from, &to)?;
        longest_path = longest_path.max(path.len());
        let mut cur = from;
        for &(i, j) in &path {
            cur = crate::extensions::apply_t(p, &cur, i, j)?;
        }
        replay_ok &= cur == to;
        dominates_bfs &= path.len() >= lookup(a)[b];
    }
    Ok(DiameterCheck {
        n: p.size(),
        num_extensions: d,
        diameter: max_eccentricity(&adj),
        pairs_checked: pairs.len(),
        longest_path,
        replay_ok,
        dominates_bfs,
    })
}

/// Mixing time from one start, evolving the distribution through the move
/// table (no dense matrix), so it scales to tens of thousands of states.
pub fn mixing_time_from(
    table: &MoveTable,
    start: usize,
    epsilon: f64,
    cap: usize,
) -> Result<usize> {
    let d = table.dim();
    let mut cur = vec![0.0; d];
    cur[start] = 1.0;
    let mut next = vec![0.0; d];
    for k in 0..=cap {
        if tv_to_uniform(cur.iter().copied(), d) <= epsilon {
            return Ok(k);
        }
        table.step(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::NoConvergence(cap))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub poset_index: usize,
    pub canonical_covers: CoverList,
    pub num_extensions: usize,
    pub t_mix: usize,
}

/// Least-squares fit `mean_tmix ~ coef * f(n)` with its RMS residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub coef: f64,
    pub rms_residual: f64,
}

impl Fit {
    fn through_origin(xs: &[f64], ys: &[f64]) -> Fit {
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let coef = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - coef * x).powi(2)).sum();
        Fit {
            coef,
            rms_residual: (rss / xs.len().max(1) as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummaryRow {
    pub n: usize,
    pub mean_tmix: f64,
    pub fit_nlogn: f64,
    pub fit_n2logn: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub seed: u64,
    pub epsilon: f64,
    pub start: String,
    pub rows: Vec<ScalingRow>,
    pub summary: Vec<ScalingSummaryRow>,
    pub fit_nlogn: Fit,
    pub fit_n2logn: Fit,
}

impl ScalingTable {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("n,poset_index,canonical_covers,num_extensions,t_mix\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.poset_index, r.canonical_covers, r.num_extensions, r.t_mix
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,mean_tmix,fit_nlogn,fit_n2logn\n");
        for r in &self.summary {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n, r.mean_tmix, r.fit_nlogn, r.fit_n2logn
            ));
        }
        out
    }
}

/// Mean single-start mixing time of random nontrivial posets for each size.
///
/// Poset `idx` of size `n` is drawn from stream `(n << 32) | idx` of `seed`;
/// chains are redrawn from the same stream.
pub fn scaling_experiment(
    n_from: usize,
    n_to: usize,
    posets_per_n: usize,
    epsilon: f64,
    seed: u64,
) -> Result<ScalingTable> {
    if n_from < 2 || n_to < n_from {
        return Err(Error::Range(format!("bad size range {n_from}..={n_to}")));
    }
    let mut rows = Vec::new();
    for n in n_from..=n_to {
        let per_n: Vec<ScalingRow> = (0..posets_per_n)
            .into_par_iter()
            .map(|idx| {
                let mut rng = stream_rng(seed, ((n as u64) << 32) | idx as u64);
                let p = loop {
                    let p = Poset::random_with(n, &mut rng)?;
                    if !p.is_chain() {
                        break p;
                    }
                };
                let ext = ExtensionSet::enumerate(&p);
                let table = MoveTable::random_to_random(&p, &ext);
                let t_mix = mixing_time_from(&table, 0, epsilon, 1_000_000)?;
                Ok(ScalingRow {
                    n,
                    poset_index: idx,
                    canonical_covers: canonical_form(&p),
                    num_extensions: ext.len(),
                    t_mix,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(per_n);
    }
    let sizes: Vec<usize> = (n_from..=n_to).collect();
    let means: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let ts: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.t_mix as f64)
                .collect();
            ts.iter().sum::<f64>() / ts.len().max(1) as f64
        })
        .collect();
    let nlogn: Vec<f64> = sizes.iter().map(|&n| n as f64 * (n as f64).ln()).collect();
    let n2logn: Vec<f64> = sizes
        .iter()
        .map(|&n| (n * n) as f64 * (n as f64).ln())
        .collect();
    let fit_nlogn = Fit::through_origin(&nlogn, &means);
    let fit_n2logn = Fit::through_origin(&n2logn, &means);
    let summary = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| ScalingSummaryRow {
            n,
            mean_tmix: means[i],
            fit_nlogn: fit_nlogn.coef * nlogn[i],
            fit_n2logn: fit_n2logn.coef * n2logn[i],
        })
        .collect();
    Ok(ScalingTable {
        seed,
        epsilon,
        start: LEAST_EXTENSION_START.to_string(),
        rows,
        summary,
        fit_nlogn,
        fit_n2logn,
    })
}
