use proptest::prelude::*;

use sumset_core::chains::{chain_prob_table, spectral_constants};
use sumset_core::exact::{inclusion_prob, missing_prob};
use sumset_core::model::{compute_sumset, sumset_naive};
use sumset_core::orbits::{pair_geometry, pair_missing_prob, pair_missing_prob_upper};
use sumset_core::{BitSet, Params, Probability, SubsetSample};

fn subset(max_n: usize) -> impl Strategy<Value = SubsetSample> {
    (0..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n + 1).prop_map(move |bits| {
            let elems: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
            SubsetSample::from_elements(n, &elems).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn sumset_matches_double_loop(a in subset(16)) {
        let fast: Vec<usize> = compute_sumset(&a).iter().collect();
        prop_assert_eq!(fast, sumset_naive(&a));
    }

    #[test]
    fn sumset_matches_double_loop_multiword(a in subset(300)) {
        let fast: Vec<usize> = compute_sumset(&a).iter().collect();
        prop_assert_eq!(fast, sumset_naive(&a));
    }

    #[test]
    fn count_relations(a in subset(200)) {
        let c = compute_sumset(&a).missing();
        prop_assert_eq!(c.w, c.y + c.z);
        prop_assert!(c.y_tilde <= c.y);
        prop_assert!(c.z_tilde <= c.z);
        prop_assert!(c.y <= a.n_max() + 1 && c.z <= a.n_max());
    }

    #[test]
    fn reflection_mirrors_the_sumset(a in subset(120)) {
        let n = a.n_max();
        let s = compute_sumset(&a);
        let r = compute_sumset(&a.reflect());
        for k in 0..=2 * n {
            prop_assert_eq!(s.contains(k), r.contains(2 * n - k));
        }
        let mid_missing = usize::from(!s.contains(n));
        prop_assert_eq!(r.missing().y, s.missing().z + mid_missing);
    }

    #[test]
    fn or_shifted_matches_bitwise(len in 1usize..400, shift in 0usize..450, seed in any::<u64>()) {
        let mut src = BitSet::new(len);
        let mut x = seed | 1;
        for i in 0..len {
            x ^= x << 13; x ^= x >> 7; x ^= x << 17;
            if x & 3 == 0 { src.set(i); }
        }
        let mut dst = BitSet::new(2 * len);
        dst.or_shifted(&src, shift);
        for i in 0..2 * len {
            let want = i >= shift && i - shift < len && src.get(i - shift);
            prop_assert_eq!(dst.get(i), want);
        }
    }

    #[test]
    fn inclusion_is_a_symmetric_probability(p in 0.001f64..0.999, n_max in 0usize..500, frac in 0.0f64..1.0) {
        let params = Params::new(p, n_max).unwrap();
        let n = ((2 * n_max) as f64 * frac) as usize;
        let a = inclusion_prob(n, &params).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, inclusion_prob(2 * n_max - n, &params).unwrap());
        prop_assert!((a + missing_prob(n, &params).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_table_is_decreasing_and_sandwiched(p in 0.01f64..0.99) {
        let prob = Probability::new(p).unwrap();
        let t = chain_prob_table(prob, 200);
        let s = spectral_constants(prob);
        for k in 1..=200 {
            prop_assert!(t.get(k) <= t.get(k - 1));
            prop_assert!(t.get(k) <= s.lambda1.powi(k as i32 - 1) * (1.0 + 1e-12));
            prop_assert!((t.get(k) - s.chain_prob(k)).abs() <= 1e-10 * t.get(k));
        }
    }

    #[test]
    fn pair_prob_is_below_upper_bound(p in 0.05f64..0.95, m in 2usize..200, frac in 0.0f64..1.0) {
        let n = ((m as f64) * frac) as usize;
        prop_assume!(n < m);
        let g = pair_geometry(m, n).unwrap();
        prop_assume!(g.l >= 2);
        let params = Params::new(p, m).unwrap();
        let exact = pair_missing_prob(m, n, &params).unwrap();
        let upper = pair_missing_prob_upper(m, n, Probability::new(p).unwrap()).unwrap();
        prop_assert!(exact <= upper * (1.0 + 1e-12));
        prop_assert!(exact <= missing_prob(n, &params).unwrap() + 1e-15);
    }

    #[test]
    fn geometry_is_consistent(m in 1usize..2000, frac in 0.0f64..1.0) {
        let n = ((m as f64) * frac) as usize;
        prop_assume!(n < m);
        let g = pair_geometry(m, n).unwrap();
        prop_assert_eq!(g.d1 + g.d2, m - n);
        prop_assert!(g.d1 >= 1);
        prop_assert_eq!(g.loopless_long + g.looped_long, g.d1);
        prop_assert_eq!(g.loopless_short + g.looped_short, g.d2);
        prop_assert_eq!(g.loopless_long % 2, 0);
        prop_assert_eq!(g.loopless_short % 2, 0);
    }
}
