//! Exhaustive second-eigenvalue survey over isomorphism classes, the
//! inclusion-ordered table, and the search for pairs where adding relations
//! raises the second eigenvalue.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, enumerate_classes};
use crate::error::{Error, Result};
use crate::poset::{poset_inclusion, CoverList, Poset, PosetJson};
use crate::rational::Rational;
use crate::spectral::{
    conjecture_check, conjectured_bound, ratio_str, ratio_to_f64, SpectralReport,
};

/// Largest size the survey accepts (sizes above 6 are slow).
pub const SURVEY_MAX_SIZE: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub covers: CoverList,
    pub n: usize,
    pub num_extensions: usize,
    pub lambda2: f64,
    #[serde(with = "ratio_str")]
    pub bound: Rational,
    pub satisfies: bool,
    pub tight: bool,
    pub connected: bool,
    pub min_eigenvalue: f64,
}

impl SurveyRecord {
    pub fn from_report(r: &SpectralReport) -> SurveyRecord {
        SurveyRecord {
            covers: r.covers.clone(),
            n: r.n,
            num_extensions: r.num_extensions,
            lambda2: r.lambda2,
            bound: r.bound,
            satisfies: r.verdict.satisfies_bound,
            tight: r.verdict.is_tight,
            connected: r.connected,
            min_eigenvalue: r.min_eigenvalue,
        }
    }

    /// Rebuilds the derived flags from the covers, `lambda2` and `n`.
    pub fn recompute(&mut self, tol: f64) -> Result<()> {
        let p = Poset::from_covers(self.n, &self.covers.0)?;
        self.bound = conjectured_bound(self.n);
        let b = ratio_to_f64(self.bound);
        self.satisfies = self.lambda2 <= b + tol;
        self.tight = (self.lambda2 - b).abs() <= tol;
        self.connected = p.is_connected();
        Ok(())
    }

    pub fn tight_iff_disconnected(&self) -> bool {
        self.tight == !self.connected
    }

    pub fn nonnegative(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol
    }

    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// Parses one JSON line; flags are recomputed rather than read.
    pub fn from_jsonl(line: &str, tol: f64) -> Result<SurveyRecord> {
        let mut r: SurveyRecord = serde_json::from_str(line)?;
        r.recompute(tol)?;
        Ok(r)
    }

    pub const CSV_HEADER: &'static str =
        "n,canonical_covers,num_extensions,lambda2,bound,satisfies,tight,connected,min_eigenvalue";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}/{},{},{},{},{}",
            self.n,
            self.covers,
            self.num_extensions,
            self.lambda2,
            self.bound.numer(),
            self.bound.denom(),
            self.satisfies,
            self.tight,
            self.connected,
            self.min_eigenvalue
        )
    }
}

/// Everything needed to reproduce and inspect a failing class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationDump {
    pub kinds: Vec<String>,
    pub poset: PosetJson,
    pub record: SurveyRecord,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub n_max: usize,
    pub tol: f64,
    /// `(size, number of classes)` for sizes `1..=n_max`.
    pub classes_per_size: Vec<(usize, usize)>,
    /// Classes of sizes `2..=n_max`, chains included.
    pub classes_from_size_two: usize,
    /// Classes of sizes `1..=n_max`; one more if the empty poset is counted.
    pub classes_total: usize,
    pub classes_total_with_empty: usize,
    /// Nontrivial (non-chain) classes of sizes `2..=n_max` with a record.
    pub checked: usize,
    pub bound_violations: usize,
    pub negative_eigenvalue_violations: usize,
    pub tightness_violations: usize,
    pub disconnected: usize,
    pub tight: usize,
}

impl SurveySummary {
    pub fn is_clean(&self) -> bool {
        self.bound_violations == 0
            && self.negative_eigenvalue_violations == 0
            && self.tightness_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Survey {
    pub summary: SurveySummary,
    pub records: Vec<SurveyRecord>,
    pub violations: Vec<ViolationDump>,
}

impl Survey {
    pub fn records_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_jsonl() + "\n").collect()
    }

    pub fn records_csv(&self) -> String {
        let mut out = format!("{}\n", SurveyRecord::CSV_HEADER);
        for r in &self.records {
            out.push_str(&r.to_csv_row());
            out.push('\n');
        }
        out
    }
}

/// Loads prior records (one JSON object per line), skipping blank lines and
/// `{"meta": ...}` header lines.
pub fn load_records(jsonl: &str, tol: f64) -> Result<Vec<SurveyRecord>> {
    jsonl
        .lines()
        .filter(|l| !l.trim().is_empty() && !is_meta_line(l))
        .map(|l| SurveyRecord::from_jsonl(l, tol))
        .collect()
}

fn is_meta_line(line: &str) -> bool {
    matches!(serde_json::from_str::<serde_json::Value>(line), Ok(serde_json::Value::Object(m)) if m.contains_key("meta"))
}

fn check_size(n_max: usize) -> Result<()> {
    if !(1..=SURVEY_MAX_SIZE).contains(&n_max) {
        return Err(Error::Range(format!(
            "n_max {n_max} outside 1..={SURVEY_MAX_SIZE}"
        )));
    }
    Ok(())
}

fn violation_kinds(r: &SurveyRecord, tol: f64) -> Vec<String> {
    let mut kinds = Vec::new();
    if !r.satisfies {
        kinds.push("bound".to_string());
    }
    if !r.nonnegative(tol) {
        kinds.push("negative_eigenvalue".to_string());
    }
    if !r.tight_iff_disconnected() {
        kinds.push("tightness".to_string());
    }
    kinds
}

/// Checks every nontrivial class of size `2..=n_max`.
pub fn verify_all(n_max: usize, tol: f64) -> Result<Survey> {
    verify_all_resumable(n_max, tol, Vec::new(), |_| Ok(()))
}

/// As [`verify_all`], reusing `prior` records (keyed by canonical form) and
/// handing each newly computed record to `sink` in canonical order, size by
/// size, so a caller can checkpoint.
pub fn verify_all_resumable<F>(
    n_max: usize,
    tol: f64,
    prior: Vec<SurveyRecord>,
    mut sink: F,
) -> Result<Survey>
where
    F: FnMut(&SurveyRecord) -> Result<()>,
{
    check_size(n_max)?;
    let mut done: BTreeMap<(usize, CoverList), SurveyRecord> = prior
        .into_iter()
        .map(|r| ((r.n, r.covers.clone()), r))
        .collect();
    let mut summary = SurveySummary {
        n_max,
        tol,
        ..SurveySummary::default()
    };
    let mut records = Vec::new();
    let mut violations = Vec::new();
    for n in 1..=n_max {
        let classes = enumerate_classes(n);
        summary.classes_per_size.push((n, classes.len()));
        summary.classes_total += classes.len();
        if n < 2 {
            continue;
        }
        summary.classes_from_size_two += classes.len();
        let todo: Vec<&(CoverList, Poset)> = classes
            .iter()
            .filter(|(c, p)| !p.is_chain() && !done.contains_key(&(n, c.clone())))
            .collect();
        let fresh: Vec<(SurveyRecord, Vec<f64>)> = todo
            .par_iter()
            .map(|(_, p)| {
                let rep = conjecture_check(p, tol)?;
                Ok((SurveyRecord::from_report(&rep), rep.eigenvalues))
            })
            .collect::<Result<_>>()?;
        let mut spectra = BTreeMap::new();
        for (rec, eigs) in fresh {
            sink(&rec)?;
            spectra.insert(rec.covers.clone(), eigs);
            done.insert((n, rec.covers.clone()), rec);
        }
        for (c, p) in classes.iter().filter(|(_, p)| !p.is_chain()) {
            let rec = done[&(n, c.clone())].clone();
            let kinds = violation_kinds(&rec, tol);
            summary.checked += 1;
            summary.disconnected += usize::from(!rec.connected);
            summary.tight += usize::from(rec.tight);
            summary.bound_violations += usize::from(!rec.satisfies);
            summary.negative_eigenvalue_violations += usize::from(!rec.nonnegative(tol));
            summary.tightness_violations += usize::from(!rec.tight_iff_disconnected());
            if !kinds.is_empty() {
                let eigenvalues = match spectra.remove(c) {
                    Some(e) => e,
                    None => conjecture_check(p, tol)?.eigenvalues,
                };
                violations.push(ViolationDump {
                    kinds,
                    poset: p.to_json(),
                    record: rec.clone(),
                    eigenvalues,
                });
            }
            records.push(rec);
        }
    }
    summary.classes_total_with_empty = summary.classes_total + 1;
    Ok(Survey {
        summary,
        records,
        violations,
    })
}

/// A class whose second eigenvalue rises when relations are added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityPair {
    /// The smaller poset (fewer relations).
    pub sub: CoverList,
    pub sup: CoverList,
    pub lambda2_sub: f64,
    pub lambda2_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityScan {
    pub n: usize,
    pub tol: f64,
    pub classes: usize,
    pub inclusions: usize,
    pub pairs: Vec<MonotonicityPair>,
    /// The pair set maps to itself under taking duals.
    pub duality_closed: bool,
    /// Number of orbits of the pair set under duality.
    pub dual_orbits: usize,
    /// Anything other than one orbit of two mirror-image pairs.
    pub needs_review: bool,
}

fn second_eigenvalues(classes: &[(CoverList, Poset)], tol: f64) -> Result<Vec<f64>> {
    classes
        .par_iter()
        .map(|(_, p)| conjecture_check(p, tol).map(|r| r.lambda2))
        .collect()
}

/// All included pairs `P` in `Q` of non-chain classes of size `n` with
/// `lambda2(P) < lambda2(Q) - tol`.
pub fn monotonicity_scan(n: usize, tol: f64) -> Result<MonotonicityScan> {
    if !(2..=6).contains(&n) {
        return Err(Error::Range(format!("scan size {n} outside 2..=6")));
    }
    let classes: Vec<(CoverList, Poset)> = enumerate_classes(n)
        .into_iter()
        .filter(|(_, p)| !p.is_chain())
        .collect();
    let lambda = second_eigenvalues(&classes, tol)?;
    let idx: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|a| {
            (0..classes.len())
                .filter(move |&b| b != a)
                .map(move |b| (a, b))
        })
        .collect();
    let included: Vec<(usize, usize)> = idx
        .into_par_iter()
        .filter_map(
            |(a, b)| match poset_inclusion(&classes[a].1, &classes[b].1) {
                Ok(true) => Some(Ok((a, b))),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            },
        )
        .collect::<Result<_>>()?;
    let mut pairs: Vec<MonotonicityPair> = included
        .iter()
        .filter(|&&(a, b)| lambda[a] < lambda[b] - tol)
        .map(|&(a, b)| MonotonicityPair {
            sub: classes[a].0.clone(),
            sup: classes[b].0.clone(),
            lambda2_sub: lambda[a],
            lambda2_sup: lambda[b],
        })
        .collect();
    pairs.sort_by(|x, y| (&x.sub, &x.sup).cmp(&(&y.sub, &y.sup)));

    let key = |c: &CoverList| -> CoverList {
        canonical_form(
            &Poset::from_covers(n, &c.0)
                .expect("class representative")
                .dual(),
        )
    };
    let set: BTreeSet<(CoverList, CoverList)> = pairs
        .iter()
        .map(|p| (p.sub.clone(), p.sup.clone()))
        .collect();
    let mirrored: BTreeSet<(CoverList, CoverList)> =
        set.iter().map(|(a, b)| (key(a), key(b))).collect();
    let duality_closed = set == mirrored;
    let mut orbits = BTreeSet::new();
    for (a, b) in &set {
        let m = (key(a), key(b));
        let pair = (a.clone(), b.clone());
        orbits.insert(if m < pair { (m, pair) } else { (pair, m) });
    }
    let dual_orbits = orbits.len();
    let needs_review = !(dual_orbits == 1 && pairs.len() == 2);
    Ok(MonotonicityScan {
        n,
        tol,
        classes: classes.len(),
        inclusions: included.len(),
        pairs,
        duality_closed,
        dual_orbits,
        needs_review,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionRow {
    pub covers: CoverList,
    pub num_relations: usize,
    pub num_extensions: usize,
    /// `None` for the chain.
    pub lambda2: Option<f64>,
}

/// One row per class of size `n`, topologically sorted by inclusion (fewer
/// relations first) with ties broken by canonical form.
pub fn inclusion_table(n: usize) -> Result<Vec<InclusionRow>> {
    if !(1..=5).contains(&n) {
        return Err(Error::Range(format!("table size {n} outside 1..=5")));
    }
    let classes = enumerate_classes(n);
    let k = classes.len();
    let rows: Vec<InclusionRow> = classes
        .par_iter()
        .map(|(c, p)| {
            let (num_extensions, lambda2) = if p.is_chain() {
                (1, None)
            } else {
                let r = conjecture_check(p, crate::spectral::DEFAULT_TOL)?;
                (r.num_extensions, Some(r.lambda2))
            };
            Ok(InclusionRow {
                covers: c.clone(),
                num_relations: p.num_relations(),
                num_extensions,
                lambda2,
            })
        })
        .collect::<Result<_>>()?;
    let mut preds = vec![0usize; k];
    let mut succ = vec![Vec::new(); k];
    for a in 0..k {
        for b in 0..k {
            if a != b && poset_inclusion(&classes[a].1, &classes[b].1)? {
                preds[b] += 1;
                succ[a].push(b);
            }
        }
    }
    // classes are already sorted by canonical form, so index order breaks ties
    let mut ready: BTreeSet<usize> = (0..k).filter(|&i| preds[i] == 0).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &succ[i] {
            preds[j] -= 1;
            if preds[j] == 0 {
                ready.insert(j);
            }
        }
    }
    debug_assert_eq!(order.len(), k);
    Ok(order.into_iter().map(|i| rows[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_small() {
        let s = verify_all(3, 1e-9).unwrap();
        assert_eq!(s.summary.checked, 1 + 4);
        assert!(s.summary.is_clean());
        let anti = s
            .records
            .iter()
            .find(|r| r.n == 3 && r.covers.0.is_empty())
            .unwrap();
        assert!(anti.tight);
        assert!((anti.lambda2 - 4.0 / 9.0).abs() < 1e-9);
        let v = Poset::from_covers(3, &[(1, 3), (2, 3)]).unwrap();
        let lambda = v.dual();
        for p in [v, lambda] {
            let r = s
                .records
                .iter()
                .find(|r| r.covers == canonical_form(&p))
                .unwrap();
            assert!(r.lambda2 < anti.lambda2 - 1e-9);
        }
    }

    #[test]
    fn survey_four() {
        let s = verify_all(4, 1e-9).unwrap();
        assert_eq!(s.summary.checked, 1 + 4 + 15);
        let four: Vec<_> = s.records.iter().filter(|r| r.n == 4).collect();
        assert_eq!(four.iter().filter(|r| !r.connected).count(), 6);
        assert!(four.iter().all(|r| r.tight != r.connected));
        assert!(s.violations.is_empty());
    }

    #[test]
    fn records_reload_with_recomputed_flags() {
        let s = verify_all(3, 1e-9).unwrap();
        let mut text = s.records_jsonl();
        text = text.replace("\"satisfies\":true", "\"satisfies\":false");
        text.insert_str(0, "{\"meta\":{\"version\":\"x\"}}\n\n");
        let back = load_records(&text, 1e-9).unwrap();
        assert_eq!(back, s.records);
        assert!(s.records_csv().starts_with(SurveyRecord::CSV_HEADER));
    }

    #[test]
    fn resume_skips_prior() {
        let full = verify_all(4, 1e-9).unwrap();
        let prior: Vec<_> = full.records.iter().filter(|r| r.n <= 3).cloned().collect();
        let mut fresh = 0;
        let resumed = verify_all_resumable(4, 1e-9, prior, |_| {
            fresh += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(fresh, 15);
        assert_eq!(resumed, full);
    }

    #[test]
    fn figure_table_small() {
        let two = inclusion_table(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].num_extensions, 2);
        assert_eq!(two[0].lambda2, Some(0.0));
        assert_eq!((two[1].num_extensions, two[1].lambda2), (1, None));
        let four = inclusion_table(4).unwrap();
        assert_eq!(four.len(), 16);
        assert_eq!(four[0].num_extensions, 24);
        assert!((four[0].lambda2.unwrap() - 0.625).abs() < 1e-9);
        for w in four.windows(2) {
            assert!(
                w[0].num_relations <= w[1].num_relations
                    || !poset_inclusion(
                        &Poset::from_covers(4, &w[1].covers.0).unwrap(),
                        &Poset::from_covers(4, &w[0].covers.0).unwrap()
                    )
                    .unwrap()
            );
        }
    }

    #[test]
    fn scan_four_is_empty() {
        let s = monotonicity_scan(4, 1e-9).unwrap();
        assert!(s.pairs.is_empty());
        assert!(s.duality_closed);
    }
}
