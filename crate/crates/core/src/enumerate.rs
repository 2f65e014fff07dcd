//! Exhaustive generation of Pólya trees (isomorphism classes) by size.
//!
//! A tree is a root over a multiset of smaller trees. Trees are numbered by
//! increasing size; a class of size `n` is generated once as a non-increasing
//! list of child ids, so no deduplication is needed.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::tree::{CanonicalCode, RootedTree};

/// Size ceilings for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ceilings {
    /// Unbounded degree set.
    pub unrestricted: usize,
    /// Finite degree set.
    pub restricted: usize,
}

impl Default for Ceilings {
    fn default() -> Self {
        Ceilings { unrestricted: 20, restricted: 24 }
    }
}

impl Ceilings {
    pub fn for_model(&self, m: &DegreeModel) -> usize {
        if m.is_finite() {
            self.restricted
        } else {
            self.unrestricted
        }
    }

    pub fn check(&self, n: usize, m: &DegreeModel) -> Result<()> {
        let c = self.for_model(m);
        if n > c {
            Err(Error::CeilingExceeded { n, ceiling: c })
        } else {
            Ok(())
        }
    }
}

/// Statistics of one class as seen during enumeration.
#[derive(Clone, Copy, Debug)]
pub struct ClassView<'a> {
    pub n: usize,
    /// `|Aut P|`
    pub aut: u128,
    /// `Π_v deg(v)!`
    pub degree_factorials: u128,
    /// `profile[d]` = vertices of out-degree `d`.
    pub profile: &'a [u8],
    /// Root children as table ids, non-increasing.
    pub children: &'a [u32],
}

impl ClassView<'_> {
    /// `PR(P) = Π deg! / |Aut|`
    pub fn plane_representations(&self) -> u128 {
        self.degree_factorials / self.aut
    }

    pub fn leaves(&self) -> usize {
        self.profile[0] as usize
    }
}

/// Table of all classes up to a stored size, with on-the-fly generation one size beyond.
pub struct PolyaTable {
    allowed: Vec<bool>,
    max_degree: usize,
    stored: usize,
    size_start: Vec<u32>,
    kid_off: Vec<u32>,
    kids: Vec<u32>,
    aut: Vec<u128>,
    dfact: Vec<u128>,
    profile: Vec<u8>,
    stride: usize,
}

fn fact_u128(k: usize) -> u128 {
    (1..=k as u128).product()
}

impl PolyaTable {
    /// Prepares enumeration of every size up to `max_n` (classes of size `max_n` are streamed).
    pub fn new(model: &DegreeModel, max_n: usize, ceilings: &Ceilings) -> Result<Self> {
        ceilings.check(max_n, model)?;
        let max_n = max_n.max(1);
        let limit = max_n - 1;
        let allowed: Vec<bool> = (0..=limit).map(|k| model.allows(k)).collect();
        let max_degree = (0..=limit).rev().find(|&k| allowed[k]).unwrap_or(0);
        let stride = max_degree + 1;
        let mut t = PolyaTable {
            allowed,
            max_degree,
            stored: 0,
            size_start: vec![0, 0],
            kid_off: vec![0],
            kids: Vec::new(),
            aut: Vec::new(),
            dfact: Vec::new(),
            profile: Vec::new(),
            stride,
        };
        for s in 1..max_n {
            let mut buf = Vec::new();
            let mut chosen = Vec::with_capacity(max_degree);
            let mut prof = vec![0u8; stride];
            t.generate(s, s - 1, u32::MAX, &mut chosen, &mut prof, &mut |v| {
                buf.push((v.aut, v.degree_factorials, v.profile.to_vec(), v.children.to_vec()));
            });
            for (a, d, p, k) in buf {
                t.kids.extend_from_slice(&k);
                t.kid_off.push(t.kids.len() as u32);
                t.aut.push(a);
                t.dfact.push(d);
                t.profile.extend_from_slice(&p);
            }
            t.size_start.push(t.aut.len() as u32);
            t.stored = s;
        }
        Ok(t)
    }

    pub fn stored_size(&self) -> usize {
        self.stored
    }

    /// Number of stored classes of size `s`.
    pub fn stored_count(&self, s: usize) -> usize {
        if s == 0 || s > self.stored {
            return 0;
        }
        (self.size_start[s + 1] - self.size_start[s]) as usize
    }

    fn view(&self, id: u32, s: usize) -> ClassView<'_> {
        let i = id as usize;
        ClassView {
            n: s,
            aut: self.aut[i],
            degree_factorials: self.dfact[i],
            profile: &self.profile[i * self.stride..(i + 1) * self.stride],
            children: &self.kids[self.kid_off[i] as usize..self.kid_off[i + 1] as usize],
        }
    }

    fn size_of(&self, id: u32) -> usize {
        // size_start is increasing; find the block holding id.
        self.size_start.partition_point(|&s| s <= id) - 1
    }

    /// Visits every class of size `n` (`n <= stored + 1`).
    pub fn for_each(&self, n: usize, f: &mut impl FnMut(&ClassView<'_>)) {
        assert!(n >= 1 && n <= self.stored + 1, "size {n} not covered by this table");
        if n <= self.stored {
            for id in self.size_start[n]..self.size_start[n + 1] {
                f(&self.view(id, n));
            }
            return;
        }
        let mut chosen = Vec::with_capacity(self.max_degree);
        let mut prof = vec![0u8; self.stride];
        self.generate(n, n - 1, u32::MAX, &mut chosen, &mut prof, f);
    }

    /// Number of classes of size `n`.
    pub fn count(&self, n: usize) -> u64 {
        let mut c = 0u64;
        self.for_each(n, &mut |_| c += 1);
        c
    }

    /// Children multisets summing to `remaining` with ids `<= max_id`.
    fn generate(
        &self,
        n: usize,
        remaining: usize,
        max_id: u32,
        chosen: &mut Vec<u32>,
        prof: &mut Vec<u8>,
        f: &mut impl FnMut(&ClassView<'_>),
    ) {
        if remaining == 0 {
            let deg = chosen.len();
            if !self.allowed[deg] {
                return;
            }
            let mut aut: u128 = 1;
            let mut dfact: u128 = fact_u128(deg);
            let mut run = 0u128;
            for (i, &c) in chosen.iter().enumerate() {
                aut *= self.aut[c as usize];
                dfact *= self.dfact[c as usize];
                run = if i > 0 && chosen[i - 1] == c { run + 1 } else { 1 };
                aut *= run;
            }
            prof[deg] += 1;
            f(&ClassView { n, aut, degree_factorials: dfact, profile: prof, children: chosen });
            prof[deg] -= 1;
            return;
        }
        if chosen.len() >= self.max_degree {
            return;
        }
        let slots = self.max_degree - chosen.len();
        let top_size = if max_id == u32::MAX { self.stored } else { self.size_of(max_id) };
        let mut sz = remaining.min(top_size);
        while sz >= 1 {
            if slots * sz < remaining {
                break;
            }
            let lo = self.size_start[sz];
            let hi = if max_id == u32::MAX { self.size_start[sz + 1] } else { self.size_start[sz + 1].min(max_id + 1) };
            for id in (lo..hi).rev() {
                let p = id as usize * self.stride;
                for d in 0..self.stride {
                    prof[d] += self.profile[p + d];
                }
                chosen.push(id);
                self.generate(n, remaining - sz, id, chosen, prof, f);
                chosen.pop();
                for d in 0..self.stride {
                    prof[d] -= self.profile[p + d];
                }
            }
            sz -= 1;
        }
    }

    /// Rebuilds a tree from a view (children in non-increasing id order).
    pub fn tree_of(&self, v: &ClassView<'_>) -> RootedTree {
        let mut degs = vec![v.children.len() as u32];
        for &c in v.children {
            self.push_degrees(c, &mut degs);
        }
        RootedTree::from_preorder_degrees(degs).expect("table trees are valid")
    }

    fn push_degrees(&self, id: u32, out: &mut Vec<u32>) {
        let i = id as usize;
        let kids = &self.kids[self.kid_off[i] as usize..self.kid_off[i + 1] as usize];
        out.push(kids.len() as u32);
        for &c in kids {
            self.push_degrees(c, out);
        }
    }
}

/// One isomorphism class with exact statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyaRecord {
    pub code: CanonicalCode,
    pub n: usize,
    pub aut: BigUint,
    pub pr: BigUint,
    pub weight: BigRational,
    pub degree_profile: BTreeMap<usize, usize>,
}

impl PolyaRecord {
    pub fn from_view(table: &PolyaTable, v: &ClassView<'_>, model: &DegreeModel) -> Result<Self> {
        let tree = table.tree_of(v);
        let mut weight = BigRational::from_integer(BigInt::from(v.plane_representations()));
        let mut degree_profile = BTreeMap::new();
        for (d, &c) in v.profile.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = model.weight(d).ok_or(Error::DegreeViolation { vertex: 0, degree: d })?;
            weight *= num_traits::Pow::pow(&w, c as u32);
            degree_profile.insert(d, c as usize);
        }
        Ok(PolyaRecord {
            code: tree.canonical_code(),
            n: v.n,
            aut: BigUint::from(v.aut),
            pr: BigUint::from(v.plane_representations()),
            weight,
            degree_profile,
        })
    }

    pub fn tree(&self) -> RootedTree {
        self.code.to_tree().expect("record codes are valid")
    }
}

/// Streams every class of size `n` allowed by `model`.
pub fn enumerate_polya(
    n: usize,
    model: &DegreeModel,
    ceilings: &Ceilings,
    f: &mut impl FnMut(PolyaRecord),
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    let table = PolyaTable::new(model, n, ceilings)?;
    let mut err = None;
    table.for_each(n, &mut |v| match PolyaRecord::from_view(&table, v, model) {
        Ok(r) => f(r),
        Err(e) => err = Some(e),
    });
    err.map_or(Ok(()), Err)
}

/// Collects [`enumerate_polya`] into a vector.
pub fn polya_records(n: usize, model: &DegreeModel, ceilings: &Ceilings) -> Result<Vec<PolyaRecord>> {
    let mut out = Vec::new();
    enumerate_polya(n, model, ceilings, &mut |r| out.push(r))?;
    Ok(out)
}

/// Number of classes of each size `1..=n_max`.
pub fn class_counts(n_max: usize, model: &DegreeModel, ceilings: &Ceilings) -> Result<Vec<u64>> {
    let table = PolyaTable::new(model, n_max, ceilings)?;
    Ok((1..=n_max).map(|n| table.count(n)).collect())
}
