//! Uniform random Pólya trees by unranking against exact count tables.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::tree::RootedTree;

/// Largest size the count tables are built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerCeilings {
    pub unrestricted: usize,
    pub restricted: usize,
}

impl Default for SamplerCeilings {
    fn default() -> Self {
        SamplerCeilings { unrestricted: 100, restricted: 400 }
    }
}

/// `binom(a + j - 1, j)`: multisets of size `j` over `a` types.
fn multichoose(a: &BigUint, j: usize) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..j {
        r = r * (a + BigUint::from(i)) / BigUint::from(i + 1);
    }
    r
}

/// Count tables `C(s, k, m)`: multisets of `k` trees of total size `s`, each of size at most `m`.
#[derive(Clone, Debug)]
pub struct PolyaSampler {
    allowed: Vec<usize>,
    kmax: usize,
    max_n: usize,
    /// `a[m]`: number of classes of size `m`.
    a: Vec<BigUint>,
    /// `c[m][s][k]`.
    c: Vec<Vec<Vec<BigUint>>>,
}

impl PolyaSampler {
    /// Tables for sizes up to `max_n` under the degree set of `model` (weights ignored).
    pub fn new(model: &DegreeModel, max_n: usize, ceilings: &SamplerCeilings) -> Result<Self> {
        let ceiling = if model.is_finite() { ceilings.restricted } else { ceilings.unrestricted };
        if max_n > ceiling {
            return Err(Error::CeilingExceeded { n: max_n, ceiling });
        }
        let max_n = max_n.max(1);
        let allowed = model.degrees_upto(max_n - 1);
        let kmax = allowed.last().copied().unwrap_or(0);
        let top = max_n - 1;
        let mut a = vec![BigUint::zero(); max_n + 1];
        let mut c: Vec<Vec<Vec<BigUint>>> = Vec::with_capacity(top + 1);
        let layer0: Vec<Vec<BigUint>> = (0..=top)
            .map(|s| {
                let mut row = vec![BigUint::zero(); s.min(kmax) + 1];
                if s == 0 {
                    row[0] = BigUint::one();
                }
                row
            })
            .collect();
        c.push(layer0);
        for m in 1..=top {
            let am: BigUint = allowed.iter().filter(|&&k| k < c[m - 1][m - 1].len()).map(|&k| &c[m - 1][m - 1][k]).sum();
            a[m] = am;
            let mcs: Vec<BigUint> = (0..=kmax).map(|j| multichoose(&a[m], j)).collect();
            let prev = &c[m - 1];
            let mut layer = Vec::with_capacity(top + 1);
            for s in 0..=top {
                let width = s.min(kmax) + 1;
                let mut row = vec![BigUint::zero(); width];
                for (k, slot) in row.iter_mut().enumerate() {
                    let mut acc = BigUint::zero();
                    let mut j = 0;
                    while j <= k && j * m <= s {
                        let (rs, rk) = (s - j * m, k - j);
                        if rk < prev[rs].len() && !mcs[j].is_zero() {
                            let base = &prev[rs][rk];
                            if !base.is_zero() {
                                acc += base * &mcs[j];
                            }
                        }
                        j += 1;
                    }
                    *slot = acc;
                }
                layer.push(row);
            }
            c.push(layer);
        }
        a[max_n] = allowed
            .iter()
            .filter(|&&k| k < c[top][top].len())
            .map(|&k| &c[top][top][k])
            .sum();
        Ok(PolyaSampler { allowed, kmax, max_n, a, c })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Number of classes of size `n`.
    pub fn count(&self, n: usize) -> &BigUint {
        &self.a[n]
    }

    fn forest(&self, s: usize, k: usize, m: usize) -> BigUint {
        let m = m.min(s);
        match self.c[m][s].get(k) {
            Some(v) => v.clone(),
            None => BigUint::zero(),
        }
    }

    fn forest_ref(&self, s: usize, k: usize, m: usize) -> Option<&BigUint> {
        self.c[m.min(s)][s].get(k)
    }

    /// Class of size `n` with index `r < count(n)`, as preorder degrees.
    pub fn unrank(&self, n: usize, r: &BigUint) -> Result<RootedTree> {
        if n == 0 || n > self.max_n {
            return Err(Error::CeilingExceeded { n, ceiling: self.max_n });
        }
        if r >= &self.a[n] {
            return Err(Error::InvalidArgument("rank out of range".into()));
        }
        let mut out = Vec::with_capacity(n);
        self.unrank_tree(n, r.clone(), &mut out);
        RootedTree::from_preorder_degrees(out)
    }

    /// Uniform class of size `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<RootedTree> {
        if n == 0 || n > self.max_n {
            return Err(Error::CeilingExceeded { n, ceiling: self.max_n });
        }
        if self.a[n].is_zero() {
            return Err(Error::UnreachableSize { n });
        }
        let r = rng.gen_biguint_below(&self.a[n]);
        let mut out = Vec::with_capacity(n);
        self.unrank_tree(n, r, &mut out);
        RootedTree::from_preorder_degrees(out)
    }

    fn unrank_tree(&self, n: usize, mut r: BigUint, out: &mut Vec<u32>) {
        if n == 1 {
            out.push(0);
            return;
        }
        for &k in &self.allowed {
            if k == 0 || k > n - 1 {
                continue;
            }
            let cnt = self.forest(n - 1, k, n - 1);
            if r < cnt {
                out.push(k as u32);
                self.unrank_forest(n - 1, k, n - 1, r, out);
                return;
            }
            r -= cnt;
        }
        unreachable!("rank below the class count");
    }

    fn unrank_forest(&self, s: usize, k: usize, m: usize, mut r: BigUint, out: &mut Vec<u32>) {
        if k == 0 {
            debug_assert!(s == 0);
            return;
        }
        let zero = BigUint::zero();
        let below = |mm: usize| -> &BigUint {
            if mm == 0 {
                &zero
            } else {
                self.forest_ref(s, k, mm).unwrap_or(&zero)
            }
        };
        // Largest part size: the largest m' <= m with C(s,k,m'-1) <= r.
        let (mut lo, mut hi) = (1usize, m.min(s));
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if below(mid - 1) <= &r {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let mp = lo;
        r -= below(mp - 1);
        let am = &self.a[mp];
        let mut j = 1;
        let mut mc = am.clone();
        loop {
            let rest = self.forest(s - j * mp, k - j, mp - 1);
            let block = &rest * &mc;
            if r < block {
                let idx = &r / &rest;
                let rem = &r % &rest;
                let mut types = Vec::with_capacity(j);
                unrank_multiset(am, j, idx, &mut types);
                for t in types {
                    self.unrank_tree(mp, t, out);
                }
                self.unrank_forest(s - j * mp, k - j, mp - 1, rem, out);
                return;
            }
            r -= block;
            j += 1;
            debug_assert!(j <= k && j * mp <= s);
            mc = mc * (am + BigUint::from(j - 1)) / BigUint::from(j);
        }
    }

    /// Degree bound of the table.
    pub fn max_degree(&self) -> usize {
        self.kmax
    }
}

/// Multiset of `j` values from `0..a` with colex index `idx`, largest first.
fn unrank_multiset(a: &BigUint, j: usize, mut idx: BigUint, out: &mut Vec<BigUint>) {
    let mut upper = a.clone();
    for left in (1..=j).rev() {
        if left == 1 {
            out.push(idx);
            return;
        }
        // Largest element x: the smallest x with binom(x + left, left) > idx.
        let (mut lo, mut hi) = (BigUint::zero(), &upper - 1u32);
        while lo < hi {
            let mid: BigUint = (&lo + &hi) >> 1;
            if multichoose(&(&mid + 1u32), left) > idx {
                hi = mid;
            } else {
                lo = mid + 1u32;
            }
        }
        let x = lo;
        idx -= multichoose(&x, left);
        upper = &x + 1u32;
        out.push(x);
    }
}

/// One uniform Pólya tree (unrestricted degrees) of size `n`.
pub fn sample_polya_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<RootedTree> {
    PolyaSampler::new(&DegreeModel::labeled(), n, &SamplerCeilings::default())?.sample(n, rng)
}
