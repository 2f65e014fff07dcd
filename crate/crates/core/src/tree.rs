//! Rooted trees in preorder layout, AHU canonical codes and symmetry counts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::partitions::factorial;

/// An ordered rooted tree stored as its preorder out-degree sequence.
///
/// Vertex `v`'s first child is `v + 1`; the next sibling of a child `c` is
/// `c + size[c]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    degrees: Vec<u32>,
    sizes: Vec<u32>,
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedTree{:?}", self.degrees)
    }
}

/// AHU code: `(` + sorted child codes + `)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(pub Vec<u8>);

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", core::str::from_utf8(&self.0).unwrap_or("?"))
    }
}

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> alloc::string::String {
        let mut s = alloc::string::String::with_capacity(self.0.len() * 2);
        for b in &self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    /// Rebuilds a tree (children in code order) from a parenthesis code.
    pub fn to_tree(&self) -> Result<RootedTree> {
        let mut degrees = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        for &b in &self.0 {
            match b {
                b'(' => {
                    if let Some(&p) = open.last() {
                        degrees[p] += 1;
                    } else if !degrees.is_empty() {
                        return Err(Error::InvalidTree("code has two roots".into()));
                    }
                    open.push(degrees.len());
                    degrees.push(0u32);
                }
                b')' => {
                    open.pop().ok_or_else(|| Error::InvalidTree("unbalanced code".into()))?;
                }
                _ => return Err(Error::InvalidTree("unexpected byte in code".into())),
            }
        }
        if !open.is_empty() {
            return Err(Error::InvalidTree("unbalanced code".into()));
        }
        RootedTree::from_preorder_degrees(degrees)
    }
}

impl RootedTree {
    /// Validates a preorder (Łukasiewicz) degree sequence.
    pub fn from_preorder_degrees(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        let mut open: i64 = 1;
        for (i, &d) in degrees.iter().enumerate() {
            open += d as i64 - 1;
            if open == 0 && i + 1 != degrees.len() {
                return Err(Error::InvalidTree("degree sequence closes early".into()));
            }
        }
        if open != 0 {
            return Err(Error::InvalidTree("degree sequence does not close".into()));
        }
        let sizes = subtree_sizes(&degrees);
        Ok(RootedTree { degrees, sizes })
    }

    /// Builds from child lists; children are laid out in the given order.
    pub fn from_children(children: &[Vec<usize>], root: usize) -> Result<Self> {
        let n = children.len();
        if root >= n {
            return Err(Error::InvalidTree("root out of range".into()));
        }
        let mut degrees = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(Error::InvalidTree("cycle or shared child".into()));
            }
            seen[v] = true;
            degrees.push(children[v].len() as u32);
            for &c in children[v].iter().rev() {
                if c >= n {
                    return Err(Error::InvalidTree("child out of range".into()));
                }
                stack.push(c);
            }
        }
        if degrees.len() != n {
            return Err(Error::InvalidTree("disconnected".into()));
        }
        Self::from_preorder_degrees(degrees)
    }

    /// Builds from a parent array (`None` marks the root).
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parents.iter().enumerate() {
            match p {
                Some(p) if *p < n => children[*p].push(v),
                Some(_) => return Err(Error::InvalidTree("parent out of range".into())),
                None if root.is_none() => root = Some(v),
                None => return Err(Error::InvalidTree("two roots".into())),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidTree("no root".into()))?;
        Self::from_children(&children, root)
    }

    pub fn single() -> Self {
        Self::from_preorder_degrees(vec![0]).expect("valid")
    }

    /// Path with `n` vertices.
    pub fn path(n: usize) -> Self {
        let mut d = vec![1u32; n];
        d[n - 1] = 0;
        Self::from_preorder_degrees(d).expect("valid")
    }

    /// Root with `k` leaf children.
    pub fn star(k: usize) -> Self {
        let mut d = vec![0u32; k + 1];
        d[0] = k as u32;
        Self::from_preorder_degrees(d).expect("valid")
    }

    /// Root over the given subtrees, in order.
    pub fn join(branches: &[RootedTree]) -> Self {
        let mut d = vec![branches.len() as u32];
        for b in branches {
            d.extend_from_slice(&b.degrees);
        }
        Self::from_preorder_degrees(d).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v] as usize
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.sizes[v] as usize
    }

    pub fn children(&self, v: usize) -> Children<'_> {
        Children { tree: self, next: v + 1, left: self.degrees[v] }
    }

    /// Root branches as standalone trees.
    pub fn branches(&self) -> Vec<RootedTree> {
        self.children(0)
            .map(|c| {
                let end = c + self.sizes[c] as usize;
                RootedTree { degrees: self.degrees[c..end].to_vec(), sizes: self.sizes[c..end].to_vec() }
            })
            .collect()
    }

    pub fn leaves(&self) -> usize {
        self.degrees.iter().filter(|&&d| d == 0).count()
    }

    /// Map degree -> number of vertices with that out-degree.
    pub fn degree_profile(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &d in &self.degrees {
            *m.entry(d as usize).or_insert(0) += 1;
        }
        m
    }

    /// Reorders every child list with `pick(k)`, which returns an index in `0..k`.
    pub fn permute_children(&self, pick: &mut impl FnMut(usize) -> usize) -> RootedTree {
        fn rec(t: &RootedTree, v: usize, pick: &mut impl FnMut(usize) -> usize, out: &mut Vec<u32>) {
            out.push(t.degrees[v]);
            let mut kids: Vec<usize> = t.children(v).collect();
            let mut order = Vec::with_capacity(kids.len());
            while !kids.is_empty() {
                let i = pick(kids.len());
                order.push(kids.swap_remove(i));
            }
            for c in order {
                rec(t, c, pick, out);
            }
        }
        let mut out = Vec::with_capacity(self.len());
        rec(self, 0, pick, &mut out);
        RootedTree::from_preorder_degrees(out).expect("permutation keeps validity")
    }

    /// Canonical codes of every vertex's subtree.
    fn vertex_codes(&self) -> Vec<Vec<u8>> {
        let n = self.len();
        let mut codes: Vec<Vec<u8>> = vec![Vec::new(); n];
        for v in (0..n).rev() {
            let mut kids: Vec<Vec<u8>> = self.children(v).map(|c| core::mem::take(&mut codes[c])).collect();
            kids.sort_unstable();
            let mut code = Vec::with_capacity(2 * self.sizes[v] as usize);
            code.push(b'(');
            for k in &kids {
                code.extend_from_slice(k);
            }
            code.push(b')');
            codes[v] = code;
        }
        codes
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        let mut codes = self.vertex_codes();
        CanonicalCode(core::mem::take(&mut codes[0]))
    }

    /// The canonical representative (children in code order).
    pub fn canonical_form(&self) -> RootedTree {
        self.canonical_code().to_tree().expect("codes are well formed")
    }

    pub fn is_isomorphic(&self, other: &RootedTree) -> bool {
        self.len() == other.len() && small_or_full_eq(self, other)
    }

    /// `|Aut T|` via `Π mult(B)! |Aut B|^{mult(B)}` over root-branch classes.
    pub fn aut_size(&self) -> BigUint {
        let n = self.len();
        let mut codes: Vec<Vec<u8>> = vec![Vec::new(); n];
        let mut aut: Vec<BigUint> = vec![BigUint::one(); n];
        for v in (0..n).rev() {
            let mut kids: Vec<(Vec<u8>, usize)> =
                self.children(v).map(|c| (core::mem::take(&mut codes[c]), c)).collect();
            kids.sort_unstable();
            let mut a = BigUint::one();
            let mut run = 0u32;
            for i in 0..kids.len() {
                a *= &aut[kids[i].1];
                run = if i > 0 && kids[i].0 == kids[i - 1].0 { run + 1 } else { 1 };
                a *= run;
            }
            let mut code = Vec::with_capacity(2 * self.sizes[v] as usize);
            code.push(b'(');
            for k in &kids {
                code.extend_from_slice(&k.0);
            }
            code.push(b')');
            codes[v] = code;
            aut[v] = a;
        }
        aut.swap_remove(0)
    }

    /// `Π_v deg(v)!`
    pub fn degree_factorial_product(&self) -> BigUint {
        self.degrees.iter().fold(BigUint::one(), |acc, &d| acc * factorial(d))
    }

    /// Number of distinct plane embeddings, `Π deg(v)! / |Aut T|`.
    pub fn plane_representations(&self) -> BigUint {
        self.degree_factorial_product() / self.aut_size()
    }

    /// Class weight `Π w_{deg(v)} deg(v)! / |Aut T|`.
    pub fn class_weight(&self, m: &DegreeModel) -> Result<BigRational> {
        let mut w = BigRational::one();
        for (v, &d) in self.degrees.iter().enumerate() {
            let wk = m.weight(d as usize).ok_or(Error::DegreeViolation { vertex: v, degree: d as usize })?;
            w *= wk;
        }
        let pr = self.plane_representations();
        Ok(w * BigRational::from_integer(BigInt::from(pr)))
    }

    /// 64-bit canonical code for trees with at most 32 vertices.
    pub fn small_code(&self) -> Option<u64> {
        if self.len() > 32 {
            return None;
        }
        let mut d = [0u8; 32];
        for (i, &x) in self.degrees.iter().enumerate() {
            d[i] = x as u8;
        }
        Some(small_code(&d[..self.len()]))
    }
}

fn small_or_full_eq(a: &RootedTree, b: &RootedTree) -> bool {
    match (a.small_code(), b.small_code()) {
        (Some(x), Some(y)) => x == y,
        _ => a.canonical_code() == b.canonical_code(),
    }
}

fn subtree_sizes(degrees: &[u32]) -> Vec<u32> {
    let n = degrees.len();
    let mut sizes = vec![1u32; n];
    // Reverse preorder: pop each vertex's children off a stack of finished subtrees.
    let mut stack: Vec<u32> = Vec::with_capacity(n);
    for v in (0..n).rev() {
        let mut s = 1;
        for _ in 0..degrees[v] {
            s += sizes[stack.pop().expect("valid sequence") as usize];
        }
        sizes[v] = s;
        stack.push(v as u32);
    }
    sizes
}

/// Iterator over a vertex's children.
pub struct Children<'a> {
    tree: &'a RootedTree,
    next: usize,
    left: u32,
}

impl Iterator for Children<'_> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.left == 0 {
            return None;
        }
        let c = self.next;
        self.left -= 1;
        self.next = c + self.tree.sizes[c] as usize;
        Some(c)
    }
}

pub fn canonical_code(t: &RootedTree) -> CanonicalCode {
    t.canonical_code()
}

pub fn are_isomorphic(a: &RootedTree, b: &RootedTree) -> bool {
    a.is_isomorphic(b)
}

pub fn aut_size(t: &RootedTree) -> BigUint {
    t.aut_size()
}

pub fn plane_representations(t: &RootedTree) -> BigUint {
    t.plane_representations()
}

pub fn class_weight(t: &RootedTree, m: &DegreeModel) -> Result<BigRational> {
    t.class_weight(m)
}

/// Canonical code of a preorder degree sequence with at most 32 vertices.
///
/// A subtree with `s` vertices is `1 · children · 0` in `2s` bits, children
/// sorted by `(bit length, value)`.
pub fn small_code(degrees: &[u8]) -> u64 {
    let n = degrees.len();
    debug_assert!(n <= 32);
    let mut bits = [0u64; 32];
    let mut lens = [0u8; 32];
    let mut top = 0usize;
    for v in (0..n).rev() {
        let d = degrees[v] as usize;
        let base = top - d;
        // Insertion sort of the d finished child codes on the stack top.
        for i in base + 1..top {
            let (kb, kl) = (bits[i], lens[i]);
            let mut j = i;
            while j > base && (lens[j - 1], bits[j - 1]) > (kl, kb) {
                bits[j] = bits[j - 1];
                lens[j] = lens[j - 1];
                j -= 1;
            }
            bits[j] = kb;
            lens[j] = kl;
        }
        let mut acc: u64 = 1;
        let mut len: u32 = 1;
        for i in base..top {
            acc = (acc << lens[i]) | bits[i];
            len += lens[i] as u32;
        }
        acc <<= 1;
        len += 1;
        bits[base] = acc;
        lens[base] = len as u8;
        top = base + 1;
    }
    bits[0]
}

/// All plane trees with `n` vertices, as preorder degree sequences.
pub fn all_plane_trees(n: usize) -> Vec<RootedTree> {
    fn rec(n: usize, open: i64, cur: &mut Vec<u32>, out: &mut Vec<RootedTree>) {
        let left = n - cur.len();
        if left == 0 {
            if open == 0 {
                out.push(RootedTree::from_preorder_degrees(cur.clone()).expect("valid"));
            }
            return;
        }
        for d in 0..left as u32 {
            let o = open + d as i64 - 1;
            if o < 0 || (o == 0 && left != 1) || o > (left as i64 - 1) {
                continue;
            }
            cur.push(d);
            rec(n, o, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::with_capacity(n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Isomorphism by trying every bijection of children.
    fn brute_iso(a: &RootedTree, av: usize, b: &RootedTree, bv: usize) -> bool {
        if a.degree(av) != b.degree(bv) || a.subtree_size(av) != b.subtree_size(bv) {
            return false;
        }
        let ak: Vec<usize> = a.children(av).collect();
        let bk: Vec<usize> = b.children(bv).collect();
        fn matchup(a: &RootedTree, ak: &[usize], b: &RootedTree, bk: &mut Vec<usize>) -> bool {
            if ak.is_empty() {
                return true;
            }
            for i in 0..bk.len() {
                let c = bk.remove(i);
                if brute_iso(a, ak[0], b, c) && matchup(a, &ak[1..], b, bk) {
                    bk.insert(i, c);
                    return true;
                }
                bk.insert(i, c);
            }
            false
        }
        matchup(a, &ak, b, &mut bk.clone())
    }

    fn cherry() -> RootedTree {
        RootedTree::star(2)
    }

    #[test]
    fn codes_basic() {
        assert_eq!(RootedTree::single().canonical_code().0, b"()".to_vec());
        let a = RootedTree::from_children(&[vec![1, 2], vec![], vec![]], 0).unwrap();
        let b = RootedTree::from_children(&[vec![2, 1], vec![], vec![]], 0).unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
        let l = RootedTree::join(&[RootedTree::single(), RootedTree::path(2)]);
        let r = RootedTree::join(&[RootedTree::path(2), RootedTree::single()]);
        assert_eq!(l.canonical_code(), r.canonical_code());
        assert_ne!(l.degrees(), r.degrees());
        assert!(!are_isomorphic(&RootedTree::path(3), &cherry()));
        assert!(are_isomorphic(&l, &l));
    }

    #[test]
    fn size_five_shapes() {
        let trees = all_plane_trees(5);
        assert_eq!(trees.len(), 14);
        let codes: BTreeSet<CanonicalCode> = trees.iter().map(|t| t.canonical_code()).collect();
        assert_eq!(codes.len(), 9);
        // Each code class is a brute-force isomorphism class.
        let reps: Vec<RootedTree> = codes.iter().map(|c| c.to_tree().unwrap()).collect();
        for i in 0..reps.len() {
            for j in 0..reps.len() {
                assert_eq!(brute_iso(&reps[i], 0, &reps[j], 0), i == j);
            }
        }
    }

    #[test]
    fn codes_agree_with_brute_force_up_to_seven() {
        for n in 1..=7 {
            let trees = all_plane_trees(n);
            for a in &trees {
                for b in &trees {
                    let fast = a.canonical_code() == b.canonical_code();
                    assert_eq!(fast, brute_iso(a, 0, b, 0));
                    assert_eq!(a.small_code() == b.small_code(), fast);
                }
            }
        }
    }

    #[test]
    fn permuted_copies_are_isomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [5usize, 9, 20, 31, 32, 60] {
            for _ in 0..20 {
                // Random recursive tree as a source of shapes.
                let parents: Vec<Option<usize>> =
                    (0..n).map(|v| if v == 0 { None } else { Some(rng.gen_range(0..v)) }).collect();
                let t = RootedTree::from_parents(&parents).unwrap();
                let p = t.permute_children(&mut |k| rng.gen_range(0..k));
                assert!(are_isomorphic(&t, &p));
                assert_eq!(t.canonical_code(), p.canonical_code());
                assert_eq!(t.aut_size(), p.aut_size());
                assert_eq!(t.canonical_form().canonical_code(), t.canonical_code());
            }
        }
    }

    #[test]
    fn automorphisms() {
        assert_eq!(RootedTree::single().aut_size(), BigUint::one());
        assert_eq!(cherry().aut_size(), BigUint::from(2u32));
        for k in 0..8 {
            assert_eq!(RootedTree::star(k).aut_size(), factorial(k as u32));
        }
        // Two cherries under a root: 2! * 2 * 2.
        let t = RootedTree::join(&[cherry(), cherry()]);
        assert_eq!(t.aut_size(), BigUint::from(8u32));
    }

    #[test]
    fn plane_representation_counts() {
        assert_eq!(RootedTree::path(6).plane_representations(), BigUint::one());
        assert_eq!(cherry().plane_representations(), BigUint::one());
        let t = RootedTree::join(&[RootedTree::single(), RootedTree::path(2)]);
        assert_eq!(t.plane_representations(), BigUint::from(2u32));
        // Against distinct orderings among all plane trees.
        for n in 1..=8 {
            let trees = all_plane_trees(n);
            let mut counts: BTreeMap<CanonicalCode, u32> = BTreeMap::new();
            for t in &trees {
                *counts.entry(t.canonical_code()).or_default() += 1;
            }
            for (code, c) in counts {
                let t = code.to_tree().unwrap();
                assert_eq!(t.plane_representations(), BigUint::from(c));
                assert_eq!(t.aut_size() * BigUint::from(c), t.degree_factorial_product());
            }
        }
    }

    #[test]
    fn class_weights() {
        let ub = DegreeModel::unary_binary();
        let one = BigRational::one();
        assert_eq!(RootedTree::single().class_weight(&ub).unwrap(), one);
        assert_eq!(cherry().class_weight(&ub).unwrap(), one);
        let t = RootedTree::join(&[RootedTree::single(), RootedTree::path(2)]);
        assert_eq!(t.class_weight(&ub).unwrap(), BigRational::from_integer(2.into()));
        let b121 = DegreeModel::binary121();
        assert_eq!(RootedTree::single().class_weight(&b121).unwrap(), one);
        let err = RootedTree::star(3).class_weight(&ub).unwrap_err();
        assert_eq!(err, Error::DegreeViolation { vertex: 0, degree: 3 });
    }

    #[test]
    fn invalid_inputs() {
        assert!(RootedTree::from_preorder_degrees(vec![0, 0]).is_err());
        assert!(RootedTree::from_preorder_degrees(vec![2, 0]).is_err());
        assert!(RootedTree::from_parents(&[None, None]).is_err());
        assert!(CanonicalCode(b"(()".to_vec()).to_tree().is_err());
        assert!(CanonicalCode(b"()()".to_vec()).to_tree().is_err());
    }
}
