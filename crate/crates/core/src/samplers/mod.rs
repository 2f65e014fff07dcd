//! Seeded tree samplers and Monte Carlo estimators.

pub mod polya;

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumerate::{Ceilings, PolyaTable};
use crate::error::{Error, Result};
use crate::model::DegreeModel;
use crate::tree::{small_code, CanonicalCode, RootedTree};

pub use polya::{sample_polya_uniform, PolyaSampler, SamplerCeilings};

/// Seed plus stream: the stream separates workers (or chunks) under one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    /// ChaCha8 keyed by the seed, positioned on the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// Rooted labeled tree of size `n` decoded from a uniform parent sequence of length `n-1`
/// (the last entry is the root), with labels dropped.
pub fn sample_labeled_rooted<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<RootedTree> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n == 1 {
        return Ok(RootedTree::single());
    }
    let label = Uniform::new(0, n as u32);
    let seq: Vec<usize> = (0..n - 1).map(|_| label.sample(rng) as usize).collect();
    let parents = decode_rooted_prufer(n, &seq);
    RootedTree::from_parents(&parents)
}

/// Inverse of the rooted Prüfer code: repeatedly detach the smallest leaf and attach it to
/// the next sequence entry.
pub fn decode_rooted_prufer(n: usize, seq: &[usize]) -> Vec<Option<usize>> {
    let mut cnt = vec![0usize; n];
    for &v in seq {
        cnt[v] += 1;
    }
    let mut parents = vec![None; n];
    let mut ptr = 0;
    while cnt[ptr] != 0 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for (i, &p) in seq.iter().enumerate() {
        parents[leaf] = Some(p);
        cnt[p] -= 1;
        if i + 1 == seq.len() {
            break;
        }
        if cnt[p] == 0 && p < ptr {
            leaf = p;
        } else {
            ptr += 1;
            while cnt[ptr] != 0 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    parents
}

/// Canonical `u64` code (as [`small_code`]) of a uniform rooted labeled tree, `n <= 32`,
/// built while decoding, without materializing the tree.
pub fn labeled_small_code<R: Rng + ?Sized>(n: usize, rng: &mut R) -> u64 {
    debug_assert!((1..=32).contains(&n));
    if n == 1 {
        return 0b10;
    }
    let mut seq = [0u8; 32];
    let mut cnt = [0u8; 32];
    let label = Uniform::new(0, n as u32);
    for s in seq.iter_mut().take(n - 1) {
        let v = label.sample(rng) as u8;
        *s = v;
        cnt[v as usize] += 1;
    }
    let mut code = [0u64; 32];
    let mut len = [0u8; 32];
    let mut head = [u8::MAX; 32];
    let mut next = [u8::MAX; 32];
    let mut scratch = ([0u64; 32], [0u8; 32]);
    let mut ptr = 0usize;
    while cnt[ptr] != 0 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for i in 0..n - 1 {
        let p = seq[i] as usize;
        let (c, l) = close(leaf, &head, &next, &code, &len, &mut scratch);
        code[leaf] = c;
        len[leaf] = l;
        next[leaf] = head[p];
        head[p] = leaf as u8;
        cnt[p] -= 1;
        if i + 2 == n {
            break;
        }
        if cnt[p] == 0 && p < ptr {
            leaf = p;
        } else {
            ptr += 1;
            while cnt[ptr] != 0 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    let root = seq[n - 2] as usize;
    close(root, &head, &next, &code, &len, &mut scratch).0
}

/// `1 · sorted child codes · 0` for vertex `v` from its finished children.
#[inline]
fn close(
    v: usize,
    head: &[u8; 32],
    next: &[u8; 32],
    code: &[u64; 32],
    len: &[u8; 32],
    scratch: &mut ([u64; 32], [u8; 32]),
) -> (u64, u8) {
    if head[v] == u8::MAX {
        return (0b10, 2);
    }
    let (kb, kl) = scratch;
    let mut d = 0;
    let mut c = head[v];
    while c != u8::MAX {
        let (b, l) = (code[c as usize], len[c as usize]);
        let mut j = d;
        while j > 0 && (kl[j - 1], kb[j - 1]) > (l, b) {
            kb[j] = kb[j - 1];
            kl[j] = kl[j - 1];
            j -= 1;
        }
        kb[j] = b;
        kl[j] = l;
        d += 1;
        c = next[c as usize];
    }
    let mut acc: u64 = 1;
    let mut total: u32 = 1;
    for i in 0..d {
        acc = (acc << kl[i]) | kb[i];
        total += kl[i] as u32;
    }
    (acc << 1, (total + 1) as u8)
}

/// Integer weights proportional to `w_k` for `k < n`, in the model's degree order.
fn integer_weights(model: &DegreeModel, n: usize) -> Vec<(usize, BigUint)> {
    let ws: Vec<(usize, num_rational::BigRational)> =
        model.degrees_upto(n.saturating_sub(1)).into_iter().filter_map(|k| model.weight(k).map(|w| (k, w))).collect();
    let mut l = num_bigint::BigInt::from(1);
    for (_, w) in &ws {
        l = l.lcm(w.denom());
    }
    ws.into_iter()
        .map(|(k, w)| {
            let v = (w * num_rational::BigRational::from_integer(l.clone())).to_integer();
            (k, v.to_biguint().expect("non-negative weight"))
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Dp {
    Small { w: Vec<u64>, t: Vec<Vec<u64>>, u: Vec<Vec<Option<Uniform<u64>>>> },
    Big { w: Vec<BigUint>, t: Vec<Vec<BigUint>> },
}

/// Exact sampler for simply generated (conditioned Galton–Watson) trees of a fixed size:
/// a degree sequence is drawn with probability `∝ Π w_{d_i}` from a table over
/// (vertices left, degree sum left), then rotated into a valid preorder by the cycle lemma.
#[derive(Clone, Debug)]
pub struct CgwSampler {
    n: usize,
    degrees: Vec<usize>,
    dp: Dp,
}

impl CgwSampler {
    pub fn new(model: &DegreeModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !model.size_reachable(n) {
            return Err(Error::UnreachableSize { n });
        }
        let iw = integer_weights(model, n);
        let degrees: Vec<usize> = iw.iter().map(|p| p.0).collect();
        let s_max = n - 1;
        let mut t = vec![vec![BigUint::zero(); s_max + 1]; n + 1];
        t[0][0] = BigUint::from(1u32);
        for v in 1..=n {
            for s in 0..=s_max {
                let mut acc = BigUint::zero();
                for (k, w) in &iw {
                    if *k > s {
                        break;
                    }
                    let prev = &t[v - 1][s - k];
                    if !prev.is_zero() {
                        acc += w * prev;
                    }
                }
                t[v][s] = acc;
            }
        }
        let fits = t.iter().flatten().all(|x| x.bits() <= 63) && iw.iter().all(|p| p.1.bits() <= 63);
        let dp = if fits {
            let t: Vec<Vec<u64>> = t.iter().map(|row| row.iter().map(|x| x.to_u64().expect("fits")).collect()).collect();
            let u = t.iter().map(|row| row.iter().map(|&x| (x > 0).then(|| Uniform::new(0, x))).collect()).collect();
            Dp::Small { w: iw.iter().map(|p| p.1.to_u64().expect("fits")).collect(), t, u }
        } else {
            Dp::Big { w: iw.into_iter().map(|p| p.1).collect(), t }
        };
        Ok(CgwSampler { n, degrees, dp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weighted sequence in `out` (length `n`), then cycle-lemma rotation in place.
    pub fn sample_degrees<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u8]) {
        let n = self.n;
        let mut s = n - 1;
        match &self.dp {
            Dp::Small { w, t, u } => {
                for (i, slot) in out.iter_mut().enumerate().take(n) {
                    let v = n - i;
                    if s == 0 {
                        *slot = 0;
                        continue;
                    }
                    let mut r = u[v][s].as_ref().expect("reachable state").sample(rng);
                    let mut pick = 0;
                    for (idx, &k) in self.degrees.iter().enumerate() {
                        if k > s {
                            break;
                        }
                        let b = w[idx] * t[v - 1][s - k];
                        if r < b {
                            pick = k;
                            break;
                        }
                        r -= b;
                    }
                    *slot = pick as u8;
                    s -= pick;
                }
            }
            Dp::Big { w, t } => {
                for (i, slot) in out.iter_mut().enumerate().take(n) {
                    let v = n - i;
                    if s == 0 {
                        *slot = 0;
                        continue;
                    }
                    let mut r = rng.gen_biguint_below(&t[v][s]);
                    let mut pick = 0;
                    for (idx, &k) in self.degrees.iter().enumerate() {
                        if k > s {
                            break;
                        }
                        let b = &w[idx] * &t[v - 1][s - k];
                        if r < b {
                            pick = k;
                            break;
                        }
                        r -= b;
                    }
                    *slot = pick as u8;
                    s -= pick;
                }
            }
        }
        rotate_to_preorder(&mut out[..n]);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RootedTree> {
        let mut buf = vec![0u8; self.n];
        if self.n > u8::MAX as usize {
            return self.sample_wide(rng);
        }
        self.sample_degrees(rng, &mut buf);
        RootedTree::from_preorder_degrees(buf.into_iter().map(u32::from).collect())
    }

    fn sample_wide<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RootedTree> {
        // Degrees above 255 need a wider buffer; same algorithm.
        let n = self.n;
        let mut out = vec![0u32; n];
        let mut s = n - 1;
        let (w, t): (Vec<BigUint>, &Vec<Vec<BigUint>>);
        let owned;
        match &self.dp {
            Dp::Big { w: bw, t: bt } => {
                w = bw.clone();
                t = bt;
            }
            Dp::Small { w: sw, t: st, .. } => {
                w = sw.iter().map(|&x| BigUint::from(x)).collect();
                owned = st.iter().map(|r| r.iter().map(|&x| BigUint::from(x)).collect()).collect::<Vec<Vec<BigUint>>>();
                t = &owned;
            }
        }
        for (i, slot) in out.iter_mut().enumerate() {
            let v = n - i;
            if s == 0 {
                break;
            }
            let mut r = rng.gen_biguint_below(&t[v][s]);
            for (idx, &k) in self.degrees.iter().enumerate() {
                if k > s {
                    break;
                }
                let b = &w[idx] * &t[v - 1][s - k];
                if r < b {
                    *slot = k as u32;
                    s -= k;
                    break;
                }
                r -= b;
            }
        }
        let start = cycle_start(out.iter().map(|&d| d as i64));
        out.rotate_left(start);
        RootedTree::from_preorder_degrees(out)
    }

    /// [`small_code`] of a fresh sample (`n <= 32`).
    pub fn sample_small_code<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut buf = [0u8; 32];
        self.sample_degrees(rng, &mut buf[..self.n]);
        small_code(&buf[..self.n])
    }
}

/// Index where the unique valid rotation of a sequence with `Σ (d_i - 1) = -1` starts:
/// just after the first minimum of the partial sums.
fn cycle_start(ds: impl Iterator<Item = i64>) -> usize {
    let mut sum = 0i64;
    let mut best = i64::MAX;
    let mut at = 0;
    let mut len = 0;
    for (i, d) in ds.enumerate() {
        sum += d - 1;
        if sum < best {
            best = sum;
            at = i;
        }
        len = i + 1;
    }
    (at + 1) % len.max(1)
}

/// Cycle lemma: rotates a degree sequence with `Σ (d_i - 1) = -1` into preorder.
pub fn rotate_to_preorder(ds: &mut [u8]) {
    let start = cycle_start(ds.iter().map(|&d| d as i64));
    ds.rotate_left(start);
}

/// One conditioned Galton–Watson tree of size `n`.
pub fn sample_cgw<R: Rng + ?Sized>(n: usize, model: &DegreeModel, rng: &mut R) -> Result<RootedTree> {
    CgwSampler::new(model, n)?.sample(rng)
}

/// Tree models whose pairs are compared.
#[derive(Clone, Debug, PartialEq)]
pub enum McModel {
    Labeled,
    Cgw(DegreeModel),
    Plane,
}

/// Confidence-interval construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CiMethod {
    Wilson,
    Normal,
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Pairs per chunk; chunk `c` draws from stream `c`.
pub const CHUNK_PAIRS: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct MCEstimate {
    pub estimate: f64,
    pub samples: u64,
    pub hits: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: CiMethod,
}

impl MCEstimate {
    pub fn from_counts(samples: u64, hits: u64, method: CiMethod) -> Self {
        let n = samples as f64;
        let p = if samples == 0 { 0.0 } else { hits as f64 / n };
        let z = Z95;
        let (lo, hi) = match method {
            CiMethod::Wilson => {
                let denom = 1.0 + z * z / n;
                let center = (p + z * z / (2.0 * n)) / denom;
                let half = z * libm::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
                (center - half, center + half)
            }
            CiMethod::Normal => {
                let half = z * libm::sqrt(p * (1.0 - p) / n);
                (p - half, p + half)
            }
        };
        MCEstimate {
            estimate: p,
            samples,
            hits,
            ci_low: lo.clamp(0.0, p),
            ci_high: hi.clamp(p, 1.0),
            method,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }
}

/// A prepared pair-collision experiment; chunks can run in any order or in parallel.
#[derive(Clone, Debug)]
pub struct McJob {
    n: usize,
    samples: u64,
    seed: u64,
    kind: JobKind,
}

#[derive(Clone, Debug)]
enum JobKind {
    Labeled,
    Gw(CgwSampler),
}

impl McJob {
    pub fn new(n: usize, model: &McModel, samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let kind = match model {
            McModel::Labeled => JobKind::Labeled,
            McModel::Cgw(m) => JobKind::Gw(CgwSampler::new(m, n)?),
            McModel::Plane => JobKind::Gw(CgwSampler::new(&DegreeModel::plane(), n)?),
        };
        Ok(McJob { n, samples, seed, kind })
    }

    pub fn chunks(&self) -> u64 {
        self.samples.div_ceil(CHUNK_PAIRS)
    }

    /// `(pairs, hits)` of chunk `c`.
    pub fn run_chunk(&self, c: u64) -> (u64, u64) {
        let pairs = CHUNK_PAIRS.min(self.samples - c * CHUNK_PAIRS);
        let mut rng = RngSpec::new(self.seed, c).rng();
        let mut hits = 0u64;
        if self.n <= 32 {
            for _ in 0..pairs {
                let (a, b) = match &self.kind {
                    JobKind::Labeled => (labeled_small_code(self.n, &mut rng), labeled_small_code(self.n, &mut rng)),
                    JobKind::Gw(s) => (s.sample_small_code(&mut rng), s.sample_small_code(&mut rng)),
                };
                hits += (a == b) as u64;
            }
        } else {
            for _ in 0..pairs {
                let (a, b) = (self.draw_code(&mut rng), self.draw_code(&mut rng));
                hits += (a == b) as u64;
            }
        }
        (pairs, hits)
    }

    fn draw_code<R: Rng + ?Sized>(&self, rng: &mut R) -> CanonicalCode {
        let t = match &self.kind {
            JobKind::Labeled => sample_labeled_rooted(self.n, rng),
            JobKind::Gw(s) => s.sample(rng),
        };
        t.expect("sampler produces valid trees").canonical_code()
    }

    pub fn finish(&self, pairs: u64, hits: u64, method: CiMethod) -> MCEstimate {
        MCEstimate::from_counts(pairs, hits, method)
    }
}

/// Fraction of `samples` independent pairs whose canonical codes coincide.
pub fn mc_iso_probability(n: usize, model: &McModel, samples: u64, seed: u64, method: CiMethod) -> Result<MCEstimate> {
    let job = McJob::new(n, model, samples, seed)?;
    let (mut pairs, mut hits) = (0u64, 0u64);
    for c in 0..job.chunks() {
        let (p, h) = job.run_chunk(c);
        pairs += p;
        hits += h;
    }
    Ok(job.finish(pairs, hits, method))
}

/// Leaf statistics of labeled pairs conditioned on being isomorphic.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafStats {
    pub n: usize,
    pub samples: u64,
    pub mean_leaves: f64,
    pub var_leaves: f64,
    /// `mean_leaves / n`.
    pub mean_fraction: f64,
    /// Standard error of `mean_fraction`.
    pub std_error: f64,
}

/// Draws classes with probability `∝ (n!/|Aut P|)^2` and records the representative's leaves.
pub fn mc_isomorphic_pair_leaf_stats(n: usize, samples: u64, seed: u64, ceilings: &Ceilings) -> Result<LeafStats> {
    if samples == 0 || n == 0 {
        return Err(Error::InvalidArgument("n and samples must be positive".into()));
    }
    let model = DegreeModel::labeled();
    ceilings.check(n, &model)?;
    let table = PolyaTable::new(&model, n, ceilings)?;
    let mut cum: Vec<f64> = Vec::new();
    let mut leaves: Vec<u32> = Vec::new();
    let mut total = 0f64;
    table.for_each(n, &mut |v| {
        let inv = 1.0 / v.aut as f64;
        total += inv * inv;
        cum.push(total);
        leaves.push(v.leaves() as u32);
    });
    let mut rng = RngSpec::new(seed, 0).rng();
    let (mut s1, mut s2) = (0f64, 0f64);
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * total;
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        let l = leaves[i] as f64;
        s1 += l;
        s2 += l * l;
    }
    let m = samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0);
    Ok(LeafStats {
        n,
        samples,
        mean_leaves: mean,
        var_leaves: var,
        mean_fraction: mean / n as f64,
        std_error: libm::sqrt(var / m) / n as f64,
    })
}
