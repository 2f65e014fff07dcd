//! Degree-restricted, weighted tree models.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::partitions::factorial;

/// Weights of the unbounded families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnboundedWeights {
    /// `w_k = 1`: plane trees.
    Ones,
    /// `w_k = 1/k!`: labeled trees (Cayley).
    InvFactorial,
}

/// Allowed out-degrees with per-degree weights `w_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeModel {
    /// Finite `D`, sorted ascending, with rational weights.
    Finite { degrees: Vec<usize>, weights: Vec<BigRational> },
    Unbounded(UnboundedWeights),
}

impl DegreeModel {
    /// Builds and validates a finite model from parallel degree/weight lists.
    pub fn finite(degrees: &[usize], weights: &[BigRational]) -> Result<Self> {
        if degrees.len() != weights.len() {
            return Err(Error::InvalidModel(format!(
                "{} degrees but {} weights",
                degrees.len(),
                weights.len()
            )));
        }
        let mut pairs: Vec<(usize, BigRational)> = degrees.iter().copied().zip(weights.iter().cloned()).collect();
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModel(format!("degree {} listed twice", w[0].0)));
            }
        }
        let m = DegreeModel::Finite {
            degrees: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.into_iter().map(|p| p.1).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Finite model from integer weights.
    pub fn finite_int(degrees: &[usize], weights: &[i64]) -> Result<Self> {
        let w: Vec<BigRational> = weights.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
        Self::finite(degrees, &w)
    }

    /// `D = {0,1,2}`, `w = [1,1,1]`.
    pub fn unary_binary() -> Self {
        Self::finite_int(&[0, 1, 2], &[1, 1, 1]).expect("valid preset")
    }

    /// `D = {0,1,2}`, `w = [1,2,1]`.
    pub fn binary121() -> Self {
        Self::finite_int(&[0, 1, 2], &[1, 2, 1]).expect("valid preset")
    }

    /// `D = {0,2}`, `w = [1,1]`.
    pub fn binary() -> Self {
        Self::finite_int(&[0, 2], &[1, 1]).expect("valid preset")
    }

    pub fn plane() -> Self {
        DegreeModel::Unbounded(UnboundedWeights::Ones)
    }

    pub fn labeled() -> Self {
        DegreeModel::Unbounded(UnboundedWeights::InvFactorial)
    }

    pub fn validate(&self) -> Result<()> {
        let DegreeModel::Finite { degrees, weights } = self else { return Ok(()) };
        if degrees.first() != Some(&0) {
            return Err(Error::InvalidModel("0 must be an allowed degree".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidModel("weights must be non-negative".into()));
        }
        if weights[0].is_zero() {
            return Err(Error::InvalidModel("w_0 must be positive".into()));
        }
        if !degrees.iter().zip(weights).any(|(&d, w)| d >= 2 && !w.is_zero()) {
            return Err(Error::InvalidModel("some degree k >= 2 needs a positive weight".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, DegreeModel::Finite { .. })
    }

    /// Largest allowed degree, `None` if unbounded.
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            DegreeModel::Finite { degrees, .. } => degrees.last().copied(),
            DegreeModel::Unbounded(_) => None,
        }
    }

    /// `w_k`, or `None` when `k` is not allowed (or has zero weight).
    pub fn weight(&self, k: usize) -> Option<BigRational> {
        match self {
            DegreeModel::Finite { degrees, weights } => {
                let i = degrees.binary_search(&k).ok()?;
                if weights[i].is_zero() {
                    None
                } else {
                    Some(weights[i].clone())
                }
            }
            DegreeModel::Unbounded(UnboundedWeights::Ones) => Some(BigRational::one()),
            DegreeModel::Unbounded(UnboundedWeights::InvFactorial) => {
                Some(BigRational::new(BigInt::one(), factorial(k as u32).into()))
            }
        }
    }

    pub fn allows(&self, k: usize) -> bool {
        self.weight(k).is_some()
    }

    /// Allowed degrees up to `limit` (inclusive).
    pub fn degrees_upto(&self, limit: usize) -> Vec<usize> {
        (0..=limit).filter(|&k| self.allows(k)).collect()
    }

    /// `gcd{k-1 : k in D, k > 0}` constraint: whether a tree with `n` vertices exists.
    pub fn size_reachable(&self, n: usize) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            DegreeModel::Unbounded(_) => true,
            DegreeModel::Finite { .. } => {
                // Out-degrees sum to n-1 over n vertices; check by a small DP.
                let ds = self.degrees_upto(n - 1);
                let mut reach = alloc::vec![alloc::vec![false; n]; n + 1];
                reach[0][0] = true;
                for v in 0..n {
                    for s in 0..n {
                        if !reach[v][s] {
                            continue;
                        }
                        for &d in &ds {
                            if s + d < n {
                                reach[v + 1][s + d] = true;
                            }
                        }
                    }
                }
                reach[n][n - 1]
            }
        }
    }

    /// Short identifier used in reports and cache headers.
    pub fn signature(&self) -> String {
        match self {
            DegreeModel::Unbounded(UnboundedWeights::Ones) => "plane".into(),
            DegreeModel::Unbounded(UnboundedWeights::InvFactorial) => "labeled".into(),
            DegreeModel::Finite { degrees, weights } => {
                let d: Vec<String> = degrees.iter().map(|d| format!("{d}")).collect();
                let w: Vec<String> = weights.iter().map(|w| format!("{w}")).collect();
                format!("D={};w={}", d.join(","), w.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for m in [DegreeModel::unary_binary(), DegreeModel::binary121(), DegreeModel::binary()] {
            m.validate().unwrap();
        }
        assert_eq!(DegreeModel::binary121().weight(1), Some(BigRational::from_integer(2.into())));
        assert_eq!(DegreeModel::binary().weight(1), None);
        assert_eq!(DegreeModel::labeled().weight(3), Some(BigRational::new(1.into(), 6.into())));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(DegreeModel::finite_int(&[1, 2], &[1, 1]).is_err());
        assert!(DegreeModel::finite_int(&[0, 1], &[1, 1]).is_err());
        assert!(DegreeModel::finite_int(&[0, 2], &[1, -1]).is_err());
        assert!(DegreeModel::finite_int(&[0, 2, 2], &[1, 1, 1]).is_err());
        assert!(DegreeModel::finite_int(&[0, 2], &[1]).is_err());
    }

    #[test]
    fn parity_obstruction() {
        let b = DegreeModel::binary();
        assert!(b.size_reachable(1));
        assert!(!b.size_reachable(2));
        assert!(b.size_reachable(3));
        assert!(!b.size_reachable(10));
        assert!(DegreeModel::unary_binary().size_reachable(10));
        let ternary = DegreeModel::finite_int(&[0, 3], &[1, 1]).unwrap();
        assert!(ternary.size_reachable(7));
        assert!(!ternary.size_reachable(6));
    }
}
