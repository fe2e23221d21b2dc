//! Spectra of the random-to-random matrices, the second-eigenvalue bound
//! `(1 + 1/n)(1 - 2/n)`, the N-shape rank-one certificate and interlacing.

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_form;
use crate::chains::{build_r2r_matrix, lumped_matrix, sort_fibers};
use crate::error::{Error, Result};
use crate::extensions::{ExtensionSet, LinearExtension};
use crate::poset::{CoverList, Poset};
use crate::rational::{Rational, RationalMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Serializes a ratio as `"p/q"`.
pub(crate) mod ratio_str {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        let (a, b) = s.split_once('/').unwrap_or((&s, "1"));
        let a: i64 = a.trim().parse().map_err(D::Error::custom)?;
        let b: i64 = b.trim().parse().map_err(D::Error::custom)?;
        if b == 0 {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(a, b))
    }
}

/// `(1 + 1/n)(1 - 2/n) = (n + 1)(n - 2) / n^2`.
pub fn conjectured_bound(n: usize) -> Rational {
    let n = n as i64;
    Ratio::new((n + 1) * (n - 2), n * n)
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// All eigenvalues of a symmetric matrix, descending.
///
/// Householder tridiagonalisation with implicit symmetric QR; the result is
/// checked against the exact trace at `10 * tol` (relative to the trace).
pub fn eigenvalues_symmetric(m: &RationalMatrix, tol: f64) -> Result<Vec<f64>> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let d = m.dim();
    if d == 0 {
        return Ok(Vec::new());
    }
    let dense = DMatrix::from_row_slice(d, d, &m.to_f64());
    let mut eigs: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    if eigs.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure);
    }
    eigs.sort_by(|a, b| b.total_cmp(a));
    let trace = ratio_to_f64(m.trace());
    let sum: f64 = eigs.iter().sum();
    if (sum - trace).abs() > 10.0 * tol * trace.abs().max(1.0) {
        return Err(Error::EigenFailure);
    }
    Ok(eigs)
}

/// Eigenvalues of `M_P`, descending.
pub fn r2r_spectrum(p: &Poset, tol: f64) -> Result<Vec<f64>> {
    let ext = ExtensionSet::enumerate(p);
    eigenvalues_symmetric(&build_r2r_matrix(p, &ext), tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub satisfies_bound: bool,
    pub is_tight: bool,
    pub all_nonnegative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub covers: CoverList,
    pub num_extensions: usize,
    pub connected: bool,
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    pub gap: f64,
    pub t_rel: f64,
    pub min_eigenvalue: f64,
    #[serde(with = "ratio_str")]
    pub bound: Rational,
    pub bound_value: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl Verdict {
    pub fn evaluate(lambda2: f64, min_eigenvalue: f64, bound: f64, tol: f64) -> Verdict {
        Verdict {
            satisfies_bound: lambda2 <= bound + tol,
            is_tight: (lambda2 - bound).abs() <= tol,
            all_nonnegative: min_eigenvalue >= -tol,
        }
    }
}

/// Spectrum of `M_P` against the conjectured bound.
pub fn conjecture_check(p: &Poset, tol: f64) -> Result<SpectralReport> {
    if p.is_chain() {
        return Err(Error::TrivialPoset);
    }
    let eigenvalues = r2r_spectrum(p, tol)?;
    Ok(report_from_spectrum(p, eigenvalues, tol))
}

pub(crate) fn report_from_spectrum(p: &Poset, eigenvalues: Vec<f64>, tol: f64) -> SpectralReport {
    let n = p.size();
    let lambda2 = eigenvalues[1];
    let min_eigenvalue = *eigenvalues.last().expect("nonempty spectrum");
    let bound = conjectured_bound(n);
    let bound_value = ratio_to_f64(bound);
    let gap = 1.0 - lambda2;
    SpectralReport {
        n,
        covers: canonical_form(p),
        num_extensions: eigenvalues.len(),
        connected: p.is_connected(),
        lambda2,
        gap,
        t_rel: 1.0 / gap,
        min_eigenvalue,
        bound,
        bound_value,
        tol,
        verdict: Verdict::evaluate(lambda2, min_eigenvalue, bound_value, tol),
        eigenvalues,
    }
}

/// The distinguished extensions of the two-chain poset `1<..<k`, `k+1<..<n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialExtensions {
    /// `1..k-1, k+1..n, k`
    pub pi0: LinearExtension,
    /// `pi^(1,i)` for `i = 1..=k`: `1..i-1, k+1, i..k, k+2..n`
    pub pi1: Vec<LinearExtension>,
    /// `pi^(2,i)` for `i = k+1..=n`: `1..k-1, k+1..i, k, i+1..n`
    pub pi2: Vec<LinearExtension>,
}

pub fn special_extensions(n: usize, k: usize) -> Result<SpecialExtensions> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Range(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    let mut pi0: Vec<usize> = (1..k).collect();
    pi0.extend(k + 1..=n);
    pi0.push(k);
    let pi1 = (1..=k)
        .map(|i| {
            let mut w: Vec<usize> = (1..i).collect();
            w.push(k + 1);
            w.extend(i..=k);
            w.extend(k + 2..=n);
            LinearExtension(w)
        })
        .collect();
    let pi2 = (k + 1..=n)
        .map(|i| {
            let mut w: Vec<usize> = (1..k).collect();
            w.extend(k + 1..=i);
            w.push(k);
            w.extend(i + 1..=n);
            LinearExtension(w)
        })
        .collect();
    Ok(SpecialExtensions {
        pi0: LinearExtension(pi0),
        pi1,
        pi2,
    })
}

/// Exact certificate that `M_{P1 u P2} = M_P + tau c c^t - tau d d^t` for the
/// two-chain poset `P` split by the N-shape `P1` and the chain `P2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneCertificate {
    pub n: usize,
    pub k: usize,
    #[serde(with = "ratio_str")]
    pub tau: Rational,
    /// Row labels (lexicographic `L(P)`) for `c`, `d` and the matrices.
    pub rows: Vec<LinearExtension>,
    #[serde(with = "ratio_vec")]
    pub c: Vec<Rational>,
    #[serde(with = "ratio_vec")]
    pub d: Vec<Rational>,
    pub special: SpecialExtensions,
    #[serde(skip)]
    pub m_p: Option<RationalMatrix>,
    #[serde(skip)]
    pub m_union: Option<RationalMatrix>,
    pub verified: bool,
}

mod ratio_vec {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v
            .iter()
            .map(|r| format!("{}/{}", r.numer(), r.denom()))
            .collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        use serde::de::Error as _;
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| {
                let (a, b) = s.split_once('/').unwrap_or((s, "1"));
                let a: i64 = a.parse().map_err(D::Error::custom)?;
                let b: i64 = b.parse().map_err(D::Error::custom)?;
                Ok(Rational::new(a, b))
            })
            .collect()
    }
}

/// Block matrix of `M_{P1}` and the 1x1 block of `P2`, indexed like `L(P)`.
pub fn nshape_union_matrix(
    n: usize,
    k: usize,
) -> Result<(ExtensionSet, RationalMatrix, RationalMatrix)> {
    let (p, p1, _p2) = Poset::n_shape_triple(n, k)?;
    let ext = ExtensionSet::enumerate(&p);
    let ext1 = ExtensionSet::enumerate(&p1);
    let m_p = build_r2r_matrix(&p, &ext);
    let m1 = build_r2r_matrix(&p1, &ext1);
    let d = ext.len();
    let map: Vec<Option<usize>> = ext.iter().map(|w| ext1.index_of(&w)).collect();
    let rows: Vec<Vec<Rational>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| match (map[a], map[b]) {
                    (Some(x), Some(y)) => m1.get(x, y),
                    (None, None) => Ratio::from_integer(1),
                    _ => Ratio::from_integer(0),
                })
                .collect()
        })
        .collect();
    Ok((ext, m_p, RationalMatrix::from_rows(&rows)))
}

pub fn nshape_rank_one_certificate(n: usize, k: usize) -> Result<RankOneCertificate> {
    let special = special_extensions(n, k)?;
    let (ext, m_p, m_union) = nshape_union_matrix(n, k)?;
    let d = ext.len();
    let (ni, ki) = (n as i64, k as i64);
    let tau = Ratio::new(1, 2 * ki * (ni - ki) * ni * ni);
    let idx = |w: &LinearExtension| ext.index_of(w).expect("special extension lies in L(P)");
    let zero = Ratio::from_integer(0);
    let mut c = vec![zero; d];
    let mut dv = vec![zero; d];
    for w in &special.pi1 {
        c[idx(w)] += ni - ki;
        dv[idx(w)] += ni - ki;
    }
    for w in &special.pi2 {
        c[idx(w)] += ki;
        dv[idx(w)] -= ki;
    }
    let identity = LinearExtension((1..=n).collect());
    c[idx(&identity)] -= 2 * ki * (ni - ki);
    let rhs = m_p
        .add(&RationalMatrix::outer(tau, &c, &c))?
        .sub(&RationalMatrix::outer(tau, &dv, &dv))?;
    let verified = rhs == m_union;
    Ok(RankOneCertificate {
        n,
        k,
        tau,
        rows: ext.iter().collect(),
        c,
        d: dv,
        special,
        m_p: Some(m_p),
        m_union: Some(m_union),
        verified,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateSign {
    /// `B = A + t v v^t`, `t >= 0`.
    Plus,
    /// `B = A - t v v^t`, `t >= 0`.
    Minus,
}

/// Whether descending spectra `a` (of `A`) and `b` (of `B`) interlace as a
/// rank-one update of the given sign allows.
pub fn interlacing_check(a: &[f64], b: &[f64], sign: UpdateSign, tol: f64) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let m = a.len();
    Ok(match sign {
        UpdateSign::Plus => (1..m).all(|i| b[i] >= a[i] - tol && b[i] <= a[i - 1] + tol),
        UpdateSign::Minus => {
            (0..m.saturating_sub(1)).all(|i| b[i] >= a[i + 1] - tol && b[i] <= a[i] + tol)
        }
    })
}

/// Every eigenvalue of the lumped chain on `chain_ordering(p)` appears in the
/// spectrum of `M_P` (as sets, within `tol`), including the bound value.
pub fn lifted_spectrum_check(p: &Poset, tol: f64) -> Result<bool> {
    if p.is_connected() {
        return Err(Error::ConnectedPoset);
    }
    let q = p.chain_ordering();
    let (ep, eq) = (ExtensionSet::enumerate(p), ExtensionSet::enumerate(&q));
    let mp = build_r2r_matrix(p, &ep);
    let fibers = sort_fibers(p, &q, &ep, &eq)?;
    let lumped = lumped_matrix(&mp, &fibers)?;
    let spec_p = eigenvalues_symmetric(&mp, tol)?;
    let spec_q = eigenvalues_symmetric(&lumped, tol)?;
    let bound = ratio_to_f64(conjectured_bound(p.size()));
    Ok(spec_q
        .iter()
        .chain(std::iter::once(&bound))
        .all(|&x| contains_within(&spec_p, x, tol)))
}

/// Whether some entry of the descending list `spectrum` is within `tol` of `x`.
pub fn contains_within(spectrum: &[f64], x: f64, tol: f64) -> bool {
    spectrum.iter().any(|&y| (y - x).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi rotations, used as an independent eigenvalue oracle.
    fn jacobi_eigenvalues(mut a: Vec<f64>, d: usize) -> Vec<f64> {
        for _sweep in 0..100 {
            let off: f64 = (0..d)
                .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * d + j].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    let apq = a[p * d + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let (akp, akq) = (a[k * d + p], a[k * d + q]);
                        a[k * d + p] = c * akp - s * akq;
                        a[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let (apk, aqk) = (a[p * d + k], a[q * d + k]);
                        a[p * d + k] = c * apk - s * aqk;
                        a[q * d + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
        eigs.sort_by(|x, y| y.total_cmp(x));
        eigs
    }

    #[test]
    fn trivial_and_two_by_two() {
        assert_eq!(
            eigenvalues_symmetric(&RationalMatrix::identity(1), 1e-9).unwrap(),
            vec![1.0]
        );
        let m = RationalMatrix::from_parts(2, 2, vec![1, 1, 1, 1]);
        let e = eigenvalues_symmetric(&m, 1e-9).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12 && e[1].abs() < 1e-12);
        let ns = RationalMatrix::from_parts(2, 2, vec![1, 1, 0, 2]);
        assert_eq!(eigenvalues_symmetric(&ns, 1e-9), Err(Error::NotSymmetric));
    }

    #[test]
    fn agrees_with_jacobi_oracle() {
        for p in [
            Poset::from_covers(4, &[(1, 2), (3, 4), (3, 2)]).unwrap(),
            Poset::antichain(4),
            Poset::from_covers(5, &[(1, 3), (2, 3), (4, 5)]).unwrap(),
        ] {
            let ext = ExtensionSet::enumerate(&p);
            let m = build_r2r_matrix(&p, &ext);
            let fast = eigenvalues_symmetric(&m, 1e-9).unwrap();
            let slow = jacobi_eigenvalues(m.to_f64(), m.dim());
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(conjectured_bound(2), Ratio::from_integer(0));
        assert_eq!(conjectured_bound(3), Ratio::new(4, 9));
        assert_eq!(conjectured_bound(4), Ratio::new(5, 8));
        assert_eq!(conjectured_bound(5), Ratio::new(18, 25));
    }

    #[test]
    fn two_chains_tight() {
        let p = Poset::from_covers(4, &[(1, 2), (3, 4)]).unwrap();
        let r = conjecture_check(&p, 1e-9).unwrap();
        assert!((r.lambda2 - 0.625).abs() < 1e-12);
        assert!(r.verdict.is_tight && r.verdict.satisfies_bound && r.verdict.all_nonnegative);
        assert!(!r.connected);
    }

    #[test]
    fn antichain_and_nshape_reports() {
        let r5 = conjecture_check(&Poset::antichain(5), 1e-9).unwrap();
        assert!(r5.verdict.is_tight);
        assert_eq!(r5.bound, Ratio::new(18, 25));
        assert_eq!(r5.bound_value, 0.72);
        let r3 = conjecture_check(&Poset::antichain(3), 1e-9).unwrap();
        assert!(r3.verdict.is_tight);
        assert!((r3.lambda2 - 4.0 / 9.0).abs() < 1e-12);
        let (_, p1, _) = Poset::n_shape_triple(4, 2).unwrap();
        let rn = conjecture_check(&p1, 1e-9).unwrap();
        assert!(rn.verdict.satisfies_bound && !rn.verdict.is_tight);
        assert_eq!(
            conjecture_check(&Poset::chain(3), 1e-9),
            Err(Error::TrivialPoset)
        );
    }

    #[test]
    fn special_extensions_4_2() {
        let s = special_extensions(4, 2).unwrap();
        let show =
            |v: &[LinearExtension]| v.iter().map(|w| w.compact().unwrap()).collect::<Vec<_>>();
        assert_eq!(s.pi0.compact().unwrap(), "1342");
        assert_eq!(show(&s.pi1), ["3124", "1324"]);
        assert_eq!(show(&s.pi2), ["1324", "1342"]);
        assert_eq!(s.pi1[1], s.pi2[0]);
        let (p, _, _) = Poset::n_shape_triple(4, 2).unwrap();
        for w in s.pi1.iter().chain(&s.pi2).chain([&s.pi0]) {
            assert!(crate::extensions::is_linear_extension(&p, &w.0).unwrap());
        }
        assert!(special_extensions(4, 4).is_err());
    }

    #[test]
    fn certificate_4_2() {
        let cert = nshape_rank_one_certificate(4, 2).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.tau, Ratio::new(1, 128));
        let at = |s: &str| {
            cert.rows
                .iter()
                .position(|w| w.compact().unwrap() == s)
                .unwrap()
        };
        let r = |x: i64| Ratio::from_integer(x);
        assert_eq!(cert.c[at("3124")], r(2));
        assert_eq!(cert.c[at("1324")], r(4));
        assert_eq!(cert.c[at("1342")], r(2));
        assert_eq!(cert.c[at("1234")], r(-8));
        assert_eq!(cert.c[at("3412")], r(0));
        assert_eq!(cert.d[at("3124")], r(2));
        assert_eq!(cert.d[at("1324")], r(0));
        assert_eq!(cert.d[at("1342")], r(-2));
        assert_eq!(cert.d[at("1234")], r(0));
    }

    #[test]
    fn interlacing_edge_cases() {
        let a = [1.0, 0.5, 0.2];
        assert!(interlacing_check(&a, &a, UpdateSign::Plus, 1e-12).unwrap());
        assert!(interlacing_check(&a, &a, UpdateSign::Minus, 1e-12).unwrap());
        assert!(!interlacing_check(&a, &[1.0, 0.9, 0.6], UpdateSign::Plus, 1e-12).unwrap());
        assert_eq!(
            interlacing_check(&a, &[1.0], UpdateSign::Plus, 1e-12),
            Err(Error::LengthMismatch(3, 1))
        );
    }

    #[test]
    fn lifted_spectrum() {
        assert!(lifted_spectrum_check(&Poset::antichain(2), 1e-9).unwrap());
        let p = Poset::from_covers(4, &[(1, 3), (2, 3)]).unwrap();
        assert!(lifted_spectrum_check(&p, 1e-9).unwrap());
        assert!(contains_within(
            &r2r_spectrum(&p, 1e-9).unwrap(),
            0.625,
            1e-9
        ));
        assert_eq!(
            lifted_spectrum_check(&Poset::chain(3), 1e-9),
            Err(Error::ConnectedPoset)
        );
    }
}
