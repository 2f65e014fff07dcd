//! Integer partitions and the cycle-index coefficients `c(j,t)`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::Result;
use crate::series::{Field, TruncSeries};

/// A partition stored by multiplicities: `mult[m-1]` parts equal to `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    mult: Vec<u32>,
}

impl Partition {
    pub fn from_parts(parts: &[u32]) -> Self {
        let max = parts.iter().copied().max().unwrap_or(0) as usize;
        let mut mult = vec![0u32; max];
        for &p in parts {
            assert!(p > 0, "parts must be positive");
            mult[p as usize - 1] += 1;
        }
        Partition { mult }
    }

    /// Number of parts equal to `m`.
    pub fn multiplicity(&self, m: u32) -> u32 {
        if m == 0 {
            return 0;
        }
        self.mult.get(m as usize - 1).copied().unwrap_or(0)
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// `|λ|`, the number of parts.
    pub fn len(&self) -> u32 {
        self.mult.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The integer being partitioned.
    pub fn weight(&self) -> u32 {
        self.mult.iter().enumerate().map(|(i, &c)| (i as u32 + 1) * c).sum()
    }

    /// Parts in non-increasing order.
    pub fn parts(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len() as usize);
        for (i, &c) in self.mult.iter().enumerate().rev() {
            for _ in 0..c {
                out.push(i as u32 + 1);
            }
        }
        out
    }
}

/// All partitions of `j`, reverse-lexicographic in their part lists.
pub fn enumerate_partitions(j: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    if j == 0 {
        out.push(Partition { mult: Vec::new() });
        return out;
    }
    let mut parts = vec![j];
    loop {
        out.push(Partition::from_parts(&parts));
        // Rightmost part larger than one.
        let Some(k) = parts.iter().rposition(|&p| p > 1) else { break };
        let ones = (parts.len() - k - 1) as u32;
        let v = parts[k] - 1;
        parts.truncate(k);
        let mut rest = ones + 1 + v;
        while rest > 0 {
            let take = v.min(rest);
            parts.push(take);
            rest -= take;
        }
    }
    out
}

/// Number of partitions of `j` by the standard dynamic program.
pub fn partition_count(j: usize) -> BigUint {
    let mut p = vec![BigUint::from(0u32); j + 1];
    p[0] = BigUint::one();
    for part in 1..=j {
        for s in part..=j {
            let add = p[s - part].clone();
            p[s] += add;
        }
    }
    p[j].clone()
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `(Σk)! / Πk_i!`
pub fn multinomial(kparts: &[u32]) -> BigUint {
    let mut total = 0u32;
    let mut acc = BigUint::one();
    for &k in kparts {
        for i in 1..=k {
            total += 1;
            acc = acc * total / i;
        }
    }
    acc
}

/// `m!^{-t}` in the field of `t`.
pub fn inv_factorial_pow<S: Field>(m: u32, t: &S) -> Result<S> {
    let f = S::from_ratio(&BigRational::from_integer(factorial(m).into()), t.ctx());
    f.pow(&t.neg())
}

/// `c(j,t)` by the defining sum over partitions of `j`.
pub fn c_coeff<S: Field>(j: u32, t: &S) -> Result<S> {
    let ctx = t.ctx();
    let mut weights: Vec<S> = Vec::with_capacity(j as usize + 1);
    for m in 0..=j {
        weights.push(inv_factorial_pow(m, t)?);
    }
    let mut sum = S::zero(ctx);
    for lam in enumerate_partitions(j) {
        let k = lam.len();
        let mn = multinomial(lam.multiplicities());
        let mut term = S::from_ratio(&BigRational::from_integer(mn.into()), ctx).div_i64(k as i64);
        if k % 2 == 0 {
            term = term.neg();
        }
        for (i, &c) in lam.multiplicities().iter().enumerate() {
            if c > 0 {
                term = term.mul(&weights[i + 1].powi(c));
            }
        }
        sum = sum.add(&term);
    }
    Ok(sum.mul_i64(j as i64))
}

/// Memoized `c(j,t)` for a fixed `t`, filled through `c(j,t) = j [z^j] log Σ z^n/n!^t`.
///
/// The log identity costs `O(N^2)` where the partition sum grows like `p(N)`.
#[derive(Clone, Debug)]
pub struct CTable<S: Field> {
    t: S,
    values: Vec<S>,
}

impl<S: Field> CTable<S> {
    pub fn new(t: S, max_j: usize) -> Result<Self> {
        let mut tab = CTable { t, values: Vec::new() };
        tab.ensure(max_j)?;
        Ok(tab)
    }

    pub fn t(&self) -> &S {
        &self.t
    }

    /// Largest `j` currently held.
    pub fn max_j(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn ensure(&mut self, max_j: usize) -> Result<()> {
        if !self.values.is_empty() && self.max_j() >= max_j {
            return Ok(());
        }
        let ctx = self.t.ctx();
        let mut a = Vec::with_capacity(max_j + 1);
        for n in 0..=max_j {
            a.push(inv_factorial_pow(n as u32, &self.t)?);
        }
        let l = TruncSeries::from_coeffs(a, max_j, ctx).log()?;
        self.values = l.coeffs().iter().enumerate().map(|(j, v)| v.mul_i64(j as i64)).collect();
        Ok(())
    }

    /// `c(j,t)` for `1 <= j <= max_j`.
    pub fn get(&self, j: usize) -> &S {
        &self.values[j]
    }
}

/// Pólya cycle-index polynomial `Z(S_k; a_1, ..., a_k)` in weighted form:
/// `Σ_{λ⊢k} Π_j a_j^{λ_j} / (j^{λ_j} λ_j!)`.
pub fn cycle_index<S: Field>(k: u32, a: &[S]) -> S {
    let ctx = a[0].ctx();
    // k Z_k = Σ_{j=1..k} a_j Z_{k-j}
    let mut z = vec![S::one(ctx)];
    for m in 1..=k as usize {
        let mut acc = S::zero(ctx);
        for j in 1..=m {
            acc = acc.add(&a[j - 1].mul(&z[m - j]));
        }
        z.push(acc.div_i64(m as i64));
    }
    z[k as usize].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Real;
    use alloc::collections::BTreeSet;
    use num_bigint::BigInt;

    type Q = BigRational;

    fn qi(v: i64) -> Q {
        Q::from_integer(BigInt::from(v))
    }

    fn brute_partitions(j: u32, max: u32) -> Vec<Vec<u32>> {
        if j == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in 1..=max.min(j) {
            for mut rest in brute_partitions(j - p, p) {
                rest.insert(0, p);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn partitions_of_small_j() {
        let one = enumerate_partitions(1);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].parts(), vec![1]);
        let four = enumerate_partitions(4);
        assert_eq!(four.len(), 5);
        let brute: BTreeSet<Vec<u32>> = brute_partitions(4, 4).into_iter().collect();
        let ours: BTreeSet<Vec<u32>> = four.iter().map(|p| p.parts()).collect();
        assert_eq!(brute, ours);
        let order: Vec<Vec<u32>> = four.iter().map(|p| p.parts()).collect();
        assert_eq!(order, vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]);
    }

    #[test]
    fn partition_counts_match_dp() {
        assert_eq!(enumerate_partitions(10).len(), 42);
        for j in 1..=22u32 {
            let ps = enumerate_partitions(j);
            assert_eq!(BigUint::from(ps.len()), partition_count(j as usize));
            assert!(ps.iter().all(|p| p.weight() == j));
            let distinct: BTreeSet<Vec<u32>> = ps.iter().map(|p| p.parts()).collect();
            assert_eq!(distinct.len(), ps.len());
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&[1, 1]), BigUint::from(2u32));
        assert_eq!(multinomial(&[2, 0]), BigUint::from(1u32));
        let direct = factorial(6) / (factorial(3) * factorial(2) * factorial(1));
        assert_eq!(multinomial(&[3, 2, 1]), direct);
        assert_eq!(direct, BigUint::from(60u32));
    }

    #[test]
    fn multinomials_sum_to_compositions() {
        for j in 1..=16u32 {
            let total: BigUint = enumerate_partitions(j).iter().map(|p| multinomial(p.multiplicities())).sum();
            assert_eq!(total, BigUint::from(2u32).pow(j - 1));
        }
    }

    #[test]
    fn c_coeff_examples() {
        for t in [0i64, 1, 2, 3] {
            assert_eq!(c_coeff(1, &qi(t)).unwrap(), qi(1));
        }
        for j in 1..=30 {
            assert_eq!(c_coeff(j, &qi(0)).unwrap(), qi(1), "c({j},0)");
        }
        let c22 = c_coeff(2, &qi(2)).unwrap();
        assert_eq!(c22, Q::new((-1).into(), 2.into()));
        // 2^{t-1} c(2,t) = 1 - 2^{t-1}
        for t in 1..6u32 {
            let p = qi(2).pow((t - 1) as i32);
            assert_eq!(p.clone() * c_coeff(2, &qi(t as i64)).unwrap(), qi(1) - p);
        }
    }

    #[test]
    fn log_identity_matches_partition_sum() {
        for t in [0i64, 1, 2, 4, 6] {
            let tab = CTable::new(qi(t), 24).unwrap();
            for j in 1..=24 {
                assert_eq!(tab.get(j), &c_coeff(j as u32, &qi(t)).unwrap(), "j={j} t={t}");
            }
        }
        let half = Q::new(1.into(), 2.into());
        assert!(CTable::new(half, 4).is_err());
    }

    #[test]
    fn real_mode_matches_exact() {
        let prec = 192;
        for t in 1..=4i64 {
            let exact = CTable::new(qi(t), 20).unwrap();
            let real = CTable::new(Real::from_i64(t, prec), 20).unwrap();
            let slow = c_coeff(12, &Real::from_i64(t, prec)).unwrap();
            for j in 1..=20 {
                let e = Real::from_ratio(exact.get(j), prec);
                let scale = e.abs().to_f64().max(1.0);
                assert!((real.get(j) - &e).abs().to_f64() <= scale * libm::ldexp(1.0, -192 + 8));
            }
            let e12 = Real::from_ratio(exact.get(12), prec);
            assert!((slow - e12).abs().to_f64() <= libm::ldexp(1.0, -192 + 16));
        }
    }

    #[test]
    fn t_one_kills_higher_coefficients() {
        let tab = CTable::new(qi(1), 30).unwrap();
        for j in 2..=30 {
            assert_eq!(tab.get(j), &qi(0));
        }
    }

    #[test]
    fn cycle_index_of_symmetric_group() {
        // Z(S_2; a1, a2) = (a1^2 + a2)/2
        let z = cycle_index(2, &[qi(3), qi(5)]);
        assert_eq!(z, Q::new(14.into(), 2.into()));
        // All variables one: Z(S_k) = 1.
        for k in 1..8 {
            let a = vec![qi(1); k as usize];
            assert_eq!(cycle_index(k, &a), qi(1));
        }
    }
}
