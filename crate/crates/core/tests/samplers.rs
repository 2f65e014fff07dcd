use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use treeiso_core::enumerate::{class_counts, Ceilings};
use treeiso_core::model::DegreeModel;
use treeiso_core::oracles::{exact_p_gw, exact_p_labeled, ClassLaw, Oracle};
use treeiso_core::samplers::*;
use treeiso_core::series::Field;
use treeiso_core::tree::{CanonicalCode, RootedTree};

fn freq(draws: usize, mut f: impl FnMut() -> RootedTree) -> BTreeMap<CanonicalCode, f64> {
    let mut m = BTreeMap::new();
    for _ in 0..draws {
        *m.entry(f().canonical_code()).or_insert(0.0) += 1.0;
    }
    m.values_mut().for_each(|v| *v /= draws as f64);
    m
}

fn within_4_sigma(p_hat: f64, p: f64, draws: usize) {
    let sd = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((p_hat - p).abs() <= 4.0 * sd, "{p_hat} vs {p} (sd {sd})");
}

fn tv(emp: &BTreeMap<CanonicalCode, f64>, law: &[(CanonicalCode, f64)]) -> f64 {
    let mut d = 0.0;
    let mut seen = BTreeSet::new();
    for (c, p) in law {
        d += (emp.get(c).copied().unwrap_or(0.0) - p).abs();
        seen.insert(c.clone());
    }
    for (c, p) in emp {
        if !seen.contains(c) {
            d += p;
        }
    }
    d / 2.0
}

#[test]
fn rng_spec_is_deterministic() {
    use rand::RngCore;
    let a: Vec<u64> = {
        let mut r = RngSpec::new(7, 3).rng();
        (0..8).map(|_| r.next_u64()).collect()
    };
    let b: Vec<u64> = {
        let mut r = RngSpec::new(7, 3).rng();
        (0..8).map(|_| r.next_u64()).collect()
    };
    let c: Vec<u64> = {
        let mut r = RngSpec::new(7, 4).rng();
        (0..8).map(|_| r.next_u64()).collect()
    };
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn rooted_prufer_is_a_bijection() {
    for n in 2..=5usize {
        let total = n.pow(n as u32 - 1);
        let mut seen = BTreeSet::new();
        for idx in 0..total {
            let mut x = idx;
            let seq: Vec<usize> = (0..n - 1)
                .map(|_| {
                    let v = x % n;
                    x /= n;
                    v
                })
                .collect();
            let parents = decode_rooted_prufer(n, &seq);
            assert_eq!(parents.iter().filter(|p| p.is_none()).count(), 1);
            assert_eq!(parents.iter().position(|p| p.is_none()), Some(seq[n - 2]));
            RootedTree::from_parents(&parents).unwrap();
            seen.insert(parents);
        }
        assert_eq!(seen.len(), total, "n={n}");
    }
}

#[test]
fn labeled_small_sizes() {
    let mut rng = RngSpec::new(1, 0).rng();
    for _ in 0..100 {
        assert_eq!(sample_labeled_rooted(1, &mut rng).unwrap().len(), 1);
        assert!(sample_labeled_rooted(2, &mut rng).unwrap().is_isomorphic(&RootedTree::path(2)));
    }
}

#[test]
fn labeled_n3_shapes() {
    let draws = 1_000_000;
    let mut rng = RngSpec::new(11, 0).rng();
    let f = freq(draws, || sample_labeled_rooted(3, &mut rng).unwrap());
    within_4_sigma(f[&RootedTree::path(3).canonical_code()], 6.0 / 9.0, draws);
    within_4_sigma(f[&RootedTree::star(2).canonical_code()], 3.0 / 9.0, draws);
}

#[test]
fn labeled_law_matches_oracle() {
    let oracle = Oracle::new(&DegreeModel::labeled(), 6, &Ceilings::default()).unwrap();
    for n in 2..=6 {
        let mut rng = RngSpec::new(100 + n as u64, 0).rng();
        let emp = freq(1_000_000, || sample_labeled_rooted(n, &mut rng).unwrap());
        let law = oracle.class_law(n, ClassLaw::Labeled).unwrap();
        let d = tv(&emp, &law);
        assert!(d < 0.01, "n={n} tv={d}");
    }
}

#[test]
fn fast_codes_match_trees() {
    for n in 1..=12 {
        for stream in 0..200 {
            let spec = RngSpec::new(5, stream);
            let t = sample_labeled_rooted(n, &mut spec.rng()).unwrap();
            assert_eq!(t.small_code(), Some(labeled_small_code(n, &mut spec.rng())), "n={n}");
        }
        let s = CgwSampler::new(&DegreeModel::unary_binary(), n).unwrap();
        for stream in 0..200 {
            let spec = RngSpec::new(6, stream);
            let t = s.sample(&mut spec.rng()).unwrap();
            assert_eq!(t.small_code(), Some(s.sample_small_code(&mut spec.rng())));
        }
    }
}

#[test]
fn cgw_basics() {
    let mut rng = RngSpec::new(2, 0).rng();
    let ub = DegreeModel::unary_binary();
    assert_eq!(sample_cgw(1, &ub, &mut rng).unwrap().len(), 1);
    let bin = DegreeModel::binary();
    for n in [2, 4, 10] {
        assert!(matches!(sample_cgw(n, &bin, &mut rng), Err(treeiso_core::Error::UnreachableSize { .. })));
    }
    for _ in 0..2000 {
        let t = sample_cgw(11, &bin, &mut rng).unwrap();
        assert!(t.degrees().iter().all(|&d| d == 0 || d == 2));
        let t = sample_cgw(9, &ub, &mut rng).unwrap();
        assert!(t.degrees().iter().all(|&d| d <= 2));
    }
}

#[test]
fn cgw_unary_binary_n3() {
    // Both classes have weight 1 (one plane representation each).
    let draws = 1_000_000;
    let mut rng = RngSpec::new(3, 0).rng();
    let s = CgwSampler::new(&DegreeModel::unary_binary(), 3).unwrap();
    let f = freq(draws, || s.sample(&mut rng).unwrap());
    within_4_sigma(f[&RootedTree::path(3).canonical_code()], 0.5, draws);
    within_4_sigma(f[&RootedTree::star(2).canonical_code()], 0.5, draws);
}

#[test]
fn cgw_law_matches_oracle() {
    for m in [DegreeModel::unary_binary(), DegreeModel::binary121(), DegreeModel::binary()] {
        let oracle = Oracle::new(&m, 7, &Ceilings::default()).unwrap();
        for n in 2..=7 {
            if !m.size_reachable(n) {
                continue;
            }
            let s = CgwSampler::new(&m, n).unwrap();
            let mut rng = RngSpec::new(200 + n as u64, 1).rng();
            let emp = freq(1_000_000, || s.sample(&mut rng).unwrap());
            let law = oracle.class_law(n, ClassLaw::Weighted).unwrap();
            let d = tv(&emp, &law);
            assert!(d < 0.01, "{} n={n} tv={d}", m.signature());
        }
    }
}

#[test]
fn plane_and_big_weights() {
    // Plane trees are cgw with unit weights; labeled trees are cgw with w_k = 1/k!.
    let oracle = Oracle::new(&DegreeModel::plane(), 6, &Ceilings::default()).unwrap();
    let s = CgwSampler::new(&DegreeModel::plane(), 6).unwrap();
    let mut rng = RngSpec::new(9, 0).rng();
    let emp = freq(400_000, || s.sample(&mut rng).unwrap());
    assert!(tv(&emp, &oracle.class_law(6, ClassLaw::Weighted).unwrap()) < 0.01);
    let lab = Oracle::new(&DegreeModel::labeled(), 6, &Ceilings::default()).unwrap();
    let s = CgwSampler::new(&DegreeModel::labeled(), 6).unwrap();
    let emp = freq(400_000, || s.sample(&mut rng).unwrap());
    assert!(tv(&emp, &lab.class_law(6, ClassLaw::Labeled).unwrap()) < 0.01);
    // Large sizes go through the arbitrary-precision table.
    let s = CgwSampler::new(&DegreeModel::plane(), 120).unwrap();
    let t = s.sample(&mut rng).unwrap();
    assert_eq!(t.len(), 120);
}

#[test]
fn polya_counts_match_enumeration() {
    let c = Ceilings::default();
    for m in [DegreeModel::labeled(), DegreeModel::unary_binary(), DegreeModel::binary()] {
        let s = PolyaSampler::new(&m, 16, &SamplerCeilings::default()).unwrap();
        let counts = class_counts(16, &m, &c).unwrap();
        for n in 1..=16 {
            assert_eq!(s.count(n), &BigUint::from(counts[n - 1]), "{} n={n}", m.signature());
        }
    }
}

#[test]
fn polya_unranking_is_a_bijection() {
    for m in [DegreeModel::labeled(), DegreeModel::unary_binary()] {
        let s = PolyaSampler::new(&m, 10, &SamplerCeilings::default()).unwrap();
        for n in 1..=10 {
            let total: u64 = s.count(n).try_into().unwrap();
            let codes: BTreeSet<CanonicalCode> =
                (0..total).map(|r| s.unrank(n, &BigUint::from(r)).unwrap().canonical_code()).collect();
            assert_eq!(codes.len() as u64, total);
        }
    }
}

#[test]
fn polya_uniform_small() {
    let mut rng = RngSpec::new(4, 0).rng();
    assert_eq!(sample_polya_uniform(1, &mut rng).unwrap().len(), 1);
    let s = PolyaSampler::new(&DegreeModel::labeled(), 6, &SamplerCeilings::default()).unwrap();
    let draws = 1_000_000;
    let f = freq(draws, || s.sample(3, &mut rng).unwrap());
    within_4_sigma(f[&RootedTree::path(3).canonical_code()], 0.5, draws);

    let draws = 200_000;
    let f = freq(draws, || s.sample(6, &mut rng).unwrap());
    assert_eq!(f.len(), 20);
    let expected = draws as f64 / 20.0;
    let chi2: f64 = f.values().map(|p| (p * draws as f64 - expected).powi(2) / expected).sum();
    let pval = 1.0 - ChiSquared::new(19.0).unwrap().cdf(chi2);
    assert!(pval > 1e-3, "chi2={chi2} p={pval}");
}

#[test]
fn polya_ceiling() {
    let r = PolyaSampler::new(&DegreeModel::labeled(), 101, &SamplerCeilings::default());
    assert!(matches!(r, Err(treeiso_core::Error::CeilingExceeded { .. })));
    let s = PolyaSampler::new(&DegreeModel::unary_binary(), 200, &SamplerCeilings::default()).unwrap();
    let mut rng = RngSpec::new(8, 0).rng();
    let t = s.sample(200, &mut rng).unwrap();
    assert_eq!(t.len(), 200);
    assert!(t.degrees().iter().all(|&d| d <= 2));
}

#[test]
fn mc_labeled_n3() {
    let e = mc_iso_probability(3, &McModel::Labeled, 1_000_000, 1, CiMethod::Wilson).unwrap();
    within_4_sigma(e.estimate, 5.0 / 9.0, 1_000_000);
    assert!(e.ci_low <= e.estimate && e.estimate <= e.ci_high);
    let exact = exact_p_labeled(3, &Ceilings::default()).unwrap().to_f64();
    assert!((exact - 5.0 / 9.0).abs() < 1e-15);
}

#[test]
fn mc_n1_is_one() {
    for m in [McModel::Labeled, McModel::Plane, McModel::Cgw(DegreeModel::binary())] {
        let e = mc_iso_probability(1, &m, 1000, 3, CiMethod::Wilson).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.ci_high, 1.0);
    }
}

#[test]
fn mc_unary_binary_n8() {
    let exact = exact_p_gw(8, &DegreeModel::unary_binary(), &Ceilings::default()).unwrap().to_f64();
    let e = mc_iso_probability(8, &McModel::Cgw(DegreeModel::unary_binary()), 1_000_000, 2, CiMethod::Wilson).unwrap();
    within_4_sigma(e.estimate, exact, 1_000_000);
}

#[test]
fn mc_is_chunk_order_independent() {
    let job = McJob::new(7, &McModel::Labeled, 300_000, 42).unwrap();
    let fwd: (u64, u64) = (0..job.chunks()).map(|c| job.run_chunk(c)).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let rev: (u64, u64) = (0..job.chunks()).rev().map(|c| job.run_chunk(c)).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert_eq!(fwd, rev);
    assert_eq!(fwd.0, 300_000);
    let e = mc_iso_probability(7, &McModel::Labeled, 300_000, 42, CiMethod::Wilson).unwrap();
    assert_eq!((e.samples, e.hits), fwd);
}

#[test]
fn mc_large_n_uses_full_codes() {
    let e = mc_iso_probability(40, &McModel::Plane, 2000, 5, CiMethod::Normal).unwrap();
    assert_eq!(e.samples, 2000);
    assert!(e.estimate < 0.01);
}

#[test]
fn leaf_stats() {
    let c = Ceilings::default();
    let s = mc_isomorphic_pair_leaf_stats(1, 10, 1, &c).unwrap();
    assert_eq!(s.mean_fraction, 1.0);
    let s = mc_isomorphic_pair_leaf_stats(3, 1_000_000, 1, &c).unwrap();
    // Class weights (3!/2)^2 = 9 for the path... and (3!/2)^2 for the cherry: 36 : 9.
    let (mean, var) = Oracle::new(&DegreeModel::labeled(), 3, &c).unwrap().iso_pair_leaf_moments(3).unwrap();
    assert_eq!(mean.to_f64(), 1.2);
    within_4_sigma(s.mean_leaves - 1.0, 0.2, 1_000_000);
    assert!((s.var_leaves - var.to_f64()).abs() < 0.01);
    let oracle = Oracle::new(&DegreeModel::labeled(), 12, &c).unwrap();
    let (m12, v12) = oracle.iso_pair_leaf_moments(12).unwrap();
    let s = mc_isomorphic_pair_leaf_stats(12, 100_000, 7, &c).unwrap();
    let se = (v12.to_f64() / 100_000.0).sqrt() / 12.0;
    assert!((s.mean_fraction - m12.to_f64() / 12.0).abs() <= 4.0 * se);
}

proptest! {
    #[test]
    fn wilson_brackets_the_estimate(samples in 1u64..10_000_000, frac in 0.0f64..=1.0) {
        let hits = ((samples as f64) * frac).floor() as u64;
        for m in [CiMethod::Wilson, CiMethod::Normal] {
            let e = MCEstimate::from_counts(samples, hits, m);
            prop_assert!(0.0 <= e.ci_low && e.ci_low <= e.estimate);
            prop_assert!(e.estimate <= e.ci_high && e.ci_high <= 1.0);
        }
    }

    #[test]
    fn cycle_lemma_yields_valid_preorder(seed in 0u64..1000, n in 1usize..30) {
        let s = CgwSampler::new(&DegreeModel::binary121(), n).unwrap();
        let mut rng = RngSpec::new(seed, 0).rng();
        let mut buf = vec![0u8; n];
        s.sample_degrees(&mut rng, &mut buf);
        prop_assert!(RootedTree::from_preorder_degrees(buf.iter().map(|&d| d as u32).collect()).is_ok());
    }
}
