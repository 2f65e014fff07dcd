//! Exact probabilities and moments from exhaustive enumeration.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::enumerate::{Ceilings, ClassView, PolyaTable};
use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::partitions::factorial;
use crate::series::ratio_to_f64;

fn rat(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Natural log of a positive big integer without overflowing `f64`.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * core::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_ratio(q: &BigRational) -> f64 {
    ln_biguint(q.numer().magnitude()) - ln_biguint(q.denom().magnitude())
}

/// `C_k = binom(2k, k) / (k+1)`
pub fn catalan(k: usize) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k as u64 {
        c = c * (2 * (2 * i + 1)) / (i + 2);
    }
    c
}

/// One row of the plane-tree decay table.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub q: BigRational,
    /// `-ln(q)/n`
    pub rate: f64,
}

/// Exact oracles over one enumeration table.
pub struct Oracle {
    model: DegreeModel,
    table: PolyaTable,
    max_n: usize,
}

impl Oracle {
    pub fn new(model: &DegreeModel, max_n: usize, ceilings: &Ceilings) -> Result<Self> {
        let table = PolyaTable::new(model, max_n, ceilings)?;
        Ok(Oracle { model: model.clone(), table, max_n })
    }

    pub fn model(&self) -> &DegreeModel {
        &self.model
    }

    pub fn table(&self) -> &PolyaTable {
        &self.table
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("size must be at least 1".into()));
        }
        if n > self.max_n {
            return Err(Error::CeilingExceeded { n, ceiling: self.max_n });
        }
        Ok(())
    }

    pub fn for_each(&self, n: usize, f: &mut impl FnMut(&ClassView<'_>)) -> Result<()> {
        self.check(n)?;
        self.table.for_each(n, f);
        Ok(())
    }

    pub fn class_count(&self, n: usize) -> Result<u64> {
        self.check(n)?;
        Ok(self.table.count(n))
    }

    /// `Σ_P n!/|Aut P|` (equals `n^{n-1}`).
    pub fn cayley_sum(&self, n: usize) -> Result<BigUint> {
        let nf = factorial(n as u32);
        let mut s = BigUint::zero();
        self.for_each(n, &mut |v| s += &nf / v.aut)?;
        Ok(s)
    }

    /// `Σ_P (n!/|Aut P|)^2`
    pub fn labeled_square_sum(&self, n: usize) -> Result<BigUint> {
        let nf = factorial(n as u32);
        let mut s = BigUint::zero();
        self.for_each(n, &mut |v| {
            let k = &nf / v.aut;
            s += &k * &k;
        })?;
        Ok(s)
    }

    /// `Σ_P 1/|Aut P|^2`, the coefficient `[x^n] P(x,2)`.
    pub fn inv_aut_square_sum(&self, n: usize) -> Result<BigRational> {
        let nf = factorial(n as u32);
        let s = self.labeled_square_sum(n)?;
        Ok(BigRational::new(s.into(), (&nf * &nf).into()))
    }

    /// `Σ_P |Aut P|^{-t}` for integer `t >= 0`.
    pub fn aut_power_sum(&self, n: usize, t: u32) -> Result<BigRational> {
        let mut s = BigRational::zero();
        self.for_each(n, &mut |v| {
            s += BigRational::new(BigInt::one(), BigInt::from(v.aut).pow(t));
        })?;
        Ok(s)
    }

    /// `Σ_P PR(P)` (number of plane trees when unrestricted).
    pub fn plane_sum(&self, n: usize) -> Result<BigUint> {
        let mut s = BigUint::zero();
        self.for_each(n, &mut |v| s += v.plane_representations())?;
        Ok(s)
    }

    /// `Σ_P PR(P)^2`
    pub fn plane_square_sum(&self, n: usize) -> Result<BigUint> {
        let mut s = BigUint::zero();
        self.for_each(n, &mut |v| {
            let p = BigUint::from(v.plane_representations());
            s += &p * &p;
        })?;
        Ok(s)
    }

    /// Per degree profile: `(Σ PR, Σ PR^2)`.
    fn profile_sums(&self, n: usize) -> Result<BTreeMap<Vec<u8>, (BigUint, BigUint)>> {
        let mut m: BTreeMap<Vec<u8>, (BigUint, BigUint)> = BTreeMap::new();
        self.for_each(n, &mut |v| {
            let pr = BigUint::from(v.plane_representations());
            let e = m.entry(v.profile.to_vec()).or_insert_with(|| (BigUint::zero(), BigUint::zero()));
            e.1 += &pr * &pr;
            e.0 += pr;
        })?;
        Ok(m)
    }

    fn profile_weight(&self, profile: &[u8]) -> Result<BigRational> {
        let mut w = BigRational::one();
        for (d, &c) in profile.iter().enumerate() {
            if c > 0 {
                let wk = self.model.weight(d).ok_or(Error::DegreeViolation { vertex: 0, degree: d })?;
                w *= wk.pow(c as u32);
            }
        }
        Ok(w)
    }

    /// `(Σ W, Σ W^2)` over classes of size `n`.
    pub fn weight_sums(&self, n: usize) -> Result<(BigRational, BigRational)> {
        let mut s1 = BigRational::zero();
        let mut s2 = BigRational::zero();
        for (profile, (a, b)) in self.profile_sums(n)? {
            let w = self.profile_weight(&profile)?;
            s1 += &w * rat(a);
            s2 += &w * &w * rat(b);
        }
        Ok((s1, s2))
    }

    /// Collision probability of two conditioned Galton–Watson trees: `ΣW^2/(ΣW)^2`.
    pub fn p_gw(&self, n: usize) -> Result<BigRational> {
        let (s1, s2) = self.weight_sums(n)?;
        if s1.is_zero() {
            return Err(Error::UnreachableSize { n });
        }
        Ok(s2 / (&s1 * &s1))
    }

    /// Collision probability of two uniform rooted labeled trees.
    pub fn p_labeled(&self, n: usize) -> Result<BigRational> {
        let s = self.labeled_square_sum(n)?;
        let nn = BigUint::from(n as u64).pow(2 * (n as u32 - 1));
        Ok(BigRational::new(s.into(), nn.into()))
    }

    /// Collision probability of two uniform plane trees.
    pub fn q_plane(&self, n: usize) -> Result<BigRational> {
        let s1 = self.plane_sum(n)?;
        let s2 = self.plane_square_sum(n)?;
        Ok(BigRational::new(s2.into(), (&s1 * &s1).into()))
    }

    /// Exact `(E L, Var L)` of the leaf count of a pair of uniform labeled trees
    /// conditioned on being isomorphic (class law `∝ 1/|Aut|^2`).
    pub fn iso_pair_leaf_moments(&self, n: usize) -> Result<(BigRational, BigRational)> {
        self.iso_pair_degree_moments(n, 0)
    }

    /// Same as [`Oracle::iso_pair_leaf_moments`] for vertices of out-degree `d`.
    pub fn iso_pair_degree_moments(&self, n: usize, d: usize) -> Result<(BigRational, BigRational)> {
        let nf = factorial(n as u32);
        let mut s0 = BigUint::zero();
        let mut s1 = BigUint::zero();
        let mut s2 = BigUint::zero();
        self.for_each(n, &mut |v| {
            let k = &nf / v.aut;
            let w = &k * &k;
            let c = v.profile.get(d).copied().unwrap_or(0) as u64;
            s1 += &w * c;
            s2 += &w * (c * c);
            s0 += w;
        })?;
        let m1 = BigRational::new(s1.into(), s0.clone().into());
        let m2 = BigRational::new(s2.into(), s0.into());
        let var = &m2 - &m1 * &m1;
        Ok((m1, var))
    }

    /// `E[log W(P)]` and `Var[log W(P)]` for a uniformly random class (model weights).
    pub fn uniform_log_weight_moments(&self, n: usize) -> Result<(f64, f64)> {
        let mut logw: Vec<f64> = Vec::new();
        for d in 0..=n {
            logw.push(match self.model.weight(d) {
                Some(w) => ln_ratio(&w) + ln_biguint(&factorial(d as u32)),
                None => f64::NAN,
            });
        }
        self.uniform_moments(n, |v| {
            let mut s = -(v.aut as f64).ln();
            for (d, &c) in v.profile.iter().enumerate() {
                if c > 0 {
                    s += c as f64 * logw[d];
                }
            }
            s
        })
    }

    /// `E[log |Aut P|]` and `Var[log |Aut P|]` for a uniformly random class.
    pub fn uniform_log_aut_moments(&self, n: usize) -> Result<(f64, f64)> {
        self.uniform_moments(n, |v| (v.aut as f64).ln())
    }

    fn uniform_moments(&self, n: usize, f: impl Fn(&ClassView<'_>) -> f64) -> Result<(f64, f64)> {
        // Two-pass-free update (Welford).
        let mut count = 0f64;
        let mut mean = 0f64;
        let mut m2 = 0f64;
        self.for_each(n, &mut |v| {
            let x = f(v);
            count += 1.0;
            let d = x - mean;
            mean += d / count;
            m2 += d * (x - mean);
        })?;
        Ok((mean, m2 / count))
    }

    /// Exact class law for sampler checks: `(code, probability)` under
    /// `labeled` (∝ 1/|Aut|), GW (∝ W) or uniform classes.
    pub fn class_law(&self, n: usize, law: ClassLaw) -> Result<Vec<(crate::tree::CanonicalCode, f64)>> {
        let mut items: Vec<(crate::tree::CanonicalCode, BigRational)> = Vec::new();
        let nf = factorial(n as u32);
        let mut err = None;
        self.for_each(n, &mut |v| {
            let code = self.table.tree_of(v).canonical_code();
            let w = match law {
                ClassLaw::Labeled => rat(&nf / v.aut),
                ClassLaw::Uniform => BigRational::one(),
                ClassLaw::Weighted => match self.profile_weight(v.profile) {
                    Ok(w) => w * rat(BigUint::from(v.plane_representations())),
                    Err(e) => {
                        err = Some(e);
                        BigRational::zero()
                    }
                },
            };
            items.push((code, w));
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        let total: BigRational = items.iter().map(|p| p.1.clone()).sum();
        Ok(items.into_iter().map(|(c, w)| (c, ratio_to_f64(&(w / &total)))).collect())
    }
}

/// Class laws available from [`Oracle::class_law`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassLaw {
    Labeled,
    Weighted,
    Uniform,
}

/// `p_n` for two uniform rooted labeled trees.
pub fn exact_p_labeled(n: usize, ceilings: &Ceilings) -> Result<BigRational> {
    Oracle::new(&DegreeModel::labeled(), n, ceilings)?.p_labeled(n)
}

/// `g_n = ΣW^2/(ΣW)^2` for the conditioned Galton–Watson model.
pub fn exact_p_gw(n: usize, model: &DegreeModel, ceilings: &Ceilings) -> Result<BigRational> {
    Oracle::new(model, n, ceilings)?.p_gw(n)
}

/// Rows `(n, q_n, -ln(q_n)/n)` for `n = 1..=n_max`.
pub fn plane_decay_table(n_max: usize, ceilings: &Ceilings) -> Result<Vec<DecayRow>> {
    let o = Oracle::new(&DegreeModel::plane(), n_max, ceilings)?;
    (1..=n_max)
        .map(|n| {
            let q = o.q_plane(n)?;
            let rate = -ln_ratio(&q) / n as f64;
            Ok(DecayRow { n, q, rate: if rate == 0.0 { 0.0 } else { rate } })
        })
        .collect()
}

/// `-ln(q)/n` for a probability `q`.
pub fn decay_rate(q: &BigRational, n: usize) -> f64 {
    let r = -ln_ratio(q) / n as f64;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{all_plane_trees, CanonicalCode};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn labeled_small() {
        let c = Ceilings::default();
        assert_eq!(exact_p_labeled(1, &c).unwrap(), q(1, 1));
        assert_eq!(exact_p_labeled(2, &c).unwrap(), q(1, 1));
        assert_eq!(exact_p_labeled(3, &c).unwrap(), q(5, 9));
    }

    /// All 9 rooted labeled trees on 3 vertices, paired.
    #[test]
    fn labeled_three_by_brute_force() {
        let mut trees = Vec::new();
        for root in 0..3usize {
            for p1 in 0..3usize {
                for p2 in 0..3usize {
                    let mut parents = [None; 3];
                    let others: Vec<usize> = (0..3).filter(|&v| v != root).collect();
                    parents[others[0]] = Some(p1);
                    parents[others[1]] = Some(p2);
                    if let Ok(t) = crate::tree::RootedTree::from_parents(&parents) {
                        trees.push(t.canonical_code());
                    }
                }
            }
        }
        assert_eq!(trees.len(), 9);
        let hits = trees.iter().flat_map(|a| trees.iter().map(move |b| (a == b) as u32)).sum::<u32>();
        assert_eq!(q(hits as i64, 81), q(5, 9));
    }

    #[test]
    fn gw_small() {
        let c = Ceilings::default();
        let ub = DegreeModel::unary_binary();
        assert_eq!(exact_p_gw(3, &ub, &c).unwrap(), q(1, 2));
        assert_eq!(exact_p_gw(4, &ub, &c).unwrap(), q(3, 8));
        let o = Oracle::new(&ub, 4, &c).unwrap();
        let (s1, s2) = o.weight_sums(4).unwrap();
        assert_eq!((s1, s2), (q(4, 1), q(6, 1)));
        assert_eq!(exact_p_gw(3, &DegreeModel::plane(), &c).unwrap(), q(1, 2));
        assert!(matches!(exact_p_gw(4, &DegreeModel::binary(), &c), Err(Error::UnreachableSize { .. })));
        // The labeled weights 1/k! reproduce p_n.
        let lab = Oracle::new(&DegreeModel::labeled(), 8, &c).unwrap();
        for n in 1..=8 {
            assert_eq!(lab.p_gw(n).unwrap(), lab.p_labeled(n).unwrap());
        }
    }

    #[test]
    fn identities_small() {
        let c = Ceilings::default();
        let o = Oracle::new(&DegreeModel::plane(), 10, &c).unwrap();
        for n in 1..=10 {
            assert_eq!(o.cayley_sum(n).unwrap(), BigUint::from(n as u64).pow(n as u32 - 1));
            assert_eq!(o.plane_sum(n).unwrap(), catalan(n - 1));
            assert_eq!(o.plane_sum(n).unwrap(), BigUint::from(all_plane_trees(n).len()));
        }
        assert_eq!(o.plane_sum(5).unwrap(), BigUint::from(14u32));
    }

    #[test]
    fn plane_decay_small() {
        let rows = plane_decay_table(6, &Ceilings::default()).unwrap();
        assert_eq!(rows[0].q, q(1, 1));
        assert_eq!(rows[0].rate, 0.0);
        assert_eq!(rows[2].q, q(1, 2));
    }

    #[test]
    fn plane_collision_by_brute_force() {
        let o = Oracle::new(&DegreeModel::plane(), 9, &Ceilings::default()).unwrap();
        for n in 1..=9 {
            let trees = all_plane_trees(n);
            let mut classes: BTreeMap<CanonicalCode, u64> = BTreeMap::new();
            for t in &trees {
                *classes.entry(t.canonical_code()).or_default() += 1;
            }
            let s2: u64 = classes.values().map(|c| c * c).sum();
            let total = trees.len() as u64;
            assert_eq!(o.q_plane(n).unwrap(), q(s2 as i64, (total * total) as i64), "n = {n}");
        }
    }

    #[test]
    fn leaf_moments_size_three() {
        let o = Oracle::new(&DegreeModel::labeled(), 3, &Ceilings::default()).unwrap();
        let (m, _) = o.iso_pair_leaf_moments(3).unwrap();
        // Path and cherry carry weights (3!/|Aut|)^2 = 36 and 9.
        assert_eq!(m, q(6, 5));
        let (m1, v1) = o.iso_pair_leaf_moments(1).unwrap();
        assert_eq!((m1, v1), (q(1, 1), q(0, 1)));
    }

    #[test]
    fn logs_of_big_numbers() {
        let v = BigUint::from(10u32).pow(500u32);
        assert!((ln_biguint(&v) - 500.0 * 10f64.ln()).abs() < 1e-9);
        assert_eq!(catalan(4), BigUint::from(14u32));
    }
}
