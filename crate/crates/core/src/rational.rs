//! Dense square matrices of exact rationals stored over a common denominator.
//!
//! Entries are `num[r * dim + c] / den`, kept in lowest terms (the gcd of the
//! denominator and all numerators is 1, `den > 0`), so structural equality is
//! exact rational equality.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    den: i64,
    num: Vec<i64>,
}

/// Export shape: `{"dim": d, "den": D, "num": [[...]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub den: i64,
    pub num: Vec<Vec<i64>>,
}

impl RationalMatrix {
    pub fn zeros(dim: usize) -> Self {
        RationalMatrix {
            dim,
            den: 1,
            num: vec![0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.num[i * dim + i] = 1;
        }
        m
    }

    /// Row-major numerators over `den`, reduced on construction.
    pub fn from_parts(dim: usize, den: i64, num: Vec<i64>) -> Self {
        assert_eq!(num.len(), dim * dim, "numerator buffer has wrong length");
        assert!(den != 0, "zero denominator");
        let mut m = RationalMatrix { dim, den, num };
        m.normalize();
        m
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Self {
        let dim = rows.len();
        let den = rows
            .iter()
            .flatten()
            .fold(1i64, |acc, r| acc.lcm(r.denom()));
        let num = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), dim, "matrix must be square");
                row.iter().map(move |r| r.numer() * (den / r.denom()))
            })
            .collect();
        Self::from_parts(dim, den, num)
    }

    /// `s * v * w^t` for column vectors `v, w`.
    pub fn outer(scale: Rational, v: &[Rational], w: &[Rational]) -> Self {
        let rows: Vec<Vec<Rational>> = v
            .iter()
            .map(|&a| w.iter().map(|&b| scale * a * b).collect())
            .collect();
        Self::from_rows(&rows)
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            self.num.iter_mut().for_each(|x| *x = -*x);
        }
        let g = self.num.iter().fold(self.den, |g, &x| g.gcd(&x));
        if g > 1 {
            self.den /= g;
            self.num.iter_mut().for_each(|x| *x /= g);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn numerators(&self) -> &[i64] {
        &self.num
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        Ratio::new(self.num[r * self.dim + c], self.den)
    }

    pub fn row(&self, r: usize) -> Vec<Rational> {
        (0..self.dim).map(|c| self.get(r, c)).collect()
    }

    pub fn trace(&self) -> Rational {
        let t: i64 = (0..self.dim).map(|i| self.num[i * self.dim + i]).sum();
        Ratio::new(t, self.den)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut num = vec![0; d * d];
        for r in 0..d {
            for c in 0..d {
                num[c * d + r] = self.num[r * d + c];
            }
        }
        RationalMatrix {
            dim: d,
            den: self.den,
            num,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.dim;
        (0..d).all(|r| (r + 1..d).all(|c| self.num[r * d + c] == self.num[c * d + r]))
    }

    pub fn is_row_stochastic(&self) -> bool {
        let d = self.dim;
        self.num.iter().all(|&x| x >= 0)
            && (0..d).all(|r| self.num[r * d..(r + 1) * d].iter().sum::<i64>() == self.den)
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.is_row_stochastic() && self.transpose().is_row_stochastic()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let d = self.dim;
        let den = self.den.checked_mul(other.den).ok_or(Error::Overflow)?;
        let mut num = vec![0i64; d * d];
        for r in 0..d {
            let mut acc = vec![0i128; d];
            for k in 0..d {
                let a = self.num[r * d + k] as i128;
                if a == 0 {
                    continue;
                }
                let row = &other.num[k * d..(k + 1) * d];
                for (slot, &b) in acc.iter_mut().zip(row) {
                    *slot += a * b as i128;
                }
            }
            for (c, v) in acc.into_iter().enumerate() {
                num[r * d + c] = i64::try_from(v).map_err(|_| Error::Overflow)?;
            }
        }
        Ok(Self::from_parts(d, den, num))
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let den = self.den.lcm(&other.den);
        let (fa, fb) = (den / self.den, den / other.den);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| {
                a.checked_mul(fa)
                    .zip(b.checked_mul(fb * sign))
                    .and_then(|(x, y)| x.checked_add(y))
                    .ok_or(Error::Overflow)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(self.dim, den, num))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    /// `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.dim;
        assert_eq!(perm.len(), d);
        let mut num = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                num[i * d + j] = self.num[perm[i] * d + perm[j]];
            }
        }
        RationalMatrix {
            dim: d,
            den: self.den,
            num,
        }
    }

    /// Row-major `f64` copy.
    pub fn to_f64(&self) -> Vec<f64> {
        let den = self.den as f64;
        self.num.iter().map(|&x| x as f64 / den).collect()
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            dim: self.dim,
            den: self.den,
            num: self
                .num
                .chunks(self.dim.max(1))
                .map(|r| r.to_vec())
                .collect(),
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        if json.num.len() != json.dim || json.num.iter().any(|r| r.len() != json.dim) {
            return Err(Error::Parse("matrix rows do not match dim".into()));
        }
        if json.den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self::from_parts(json.dim, json.den, json.num.concat()))
    }

    /// Decimal CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let vals = self.to_f64();
        let mut out = String::new();
        for r in 0..self.dim {
            let row: Vec<String> = vals[r * self.dim..(r + 1) * self.dim]
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
