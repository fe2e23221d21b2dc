//! Named poset families: `antichain:n`, `chain:n`, `nshape:n,k`, `sumchains:a,b,...`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poset::Poset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Antichain(usize),
    Chain(usize),
    /// Chains `1..k` and `k+1..n` joined by the cover `k+1 < k`.
    NShape(usize, usize),
    SumOfChains(Vec<usize>),
}

impl Family {
    pub fn build(&self) -> Result<Poset> {
        match self {
            Family::Antichain(n) => sized(*n).map(Poset::antichain),
            Family::Chain(n) => sized(*n).map(Poset::chain),
            Family::NShape(n, k) => Poset::n_shape_triple(*n, *k).map(|(_, p1, _)| p1),
            Family::SumOfChains(parts) => {
                if parts.is_empty() || parts.contains(&0) {
                    return Err(Error::Parse("sumchains needs positive lengths".into()));
                }
                sized(parts.iter().sum())?;
                Poset::sum_of_chains(parts)
            }
        }
    }
}

fn sized(n: usize) -> Result<usize> {
    if n == 0 || n > crate::poset::MAX_SIZE {
        Err(Error::Size(n))
    } else {
        Ok(n)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected name:args, got {s:?}")))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("bad family arguments {args:?}: {e}")))?;
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("{name} takes {k} argument(s)")))
            }
        };
        match name.trim() {
            "antichain" => arity(1).map(|_| Family::Antichain(nums[0])),
            "chain" => arity(1).map(|_| Family::Chain(nums[0])),
            "nshape" => arity(2).map(|_| Family::NShape(nums[0], nums[1])),
            "sumchains" => Ok(Family::SumOfChains(nums)),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// Parses and builds a family expression in one go.
pub fn family_poset(spec: &str) -> Result<Poset> {
    spec.parse::<Family>()?.build()
}
