use proptest::prelude::*;
use supersingular::gfq::{binom_mod_p, FieldElem};
use supersingular::induction::{Model, Named};
use supersingular::invariants::QuotientContext;
use supersingular::localring::Mat2Local;
use supersingular::quotient::PhiMap;
use supersingular::weights::{
    apply_a_weight, evaluate_schedule, r_j_w_j, schedule_a_j, subsets, weight_from_char, SerreWeight,
};

fn exact_binom(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// A word in generators of K = GL_2(O).
fn k_matrix(m: &Model, word: &[(u8, u32, u32)]) -> Mat2Local {
    let r = m.ring();
    let gf = m.gf();
    let mut g = r.mat_identity();
    for &(kind, code, depth) in word {
        let lam = gf.elem(code % gf.order());
        let t = r.mul(&r.teichmuller(lam), &r.pi_pow(depth));
        let unit = r.teichmuller(if lam.is_zero() { FieldElem::ONE } else { lam });
        let h = match kind % 5 {
            0 => r.delta_b(t),
            1 => r.lower_unipotent(lam),
            2 => r.w(),
            3 => r.diag(unit, r.one()),
            _ => r.delta_a(t),
        };
        g = r.mat_mul(&g, &h);
    }
    g
}

fn generic_seed() -> impl Strategy<Value = SerreWeight> {
    (prop::sample::select(vec![7u32, 11, 13]), 2u32..5, any::<u64>(), any::<i64>()).prop_map(|(p, f, bits, w)| {
        let span = (p - 6) as u64;
        let r: Vec<u32> = (0..f).map(|j| 3 + ((bits >> (8 * j)) % span) as u32).collect();
        SerreWeight::new(p, r, w.rem_euclid(1 << 20)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lucas_matches_exact_binomials(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]), n in 0u64..120, k in 0u64..120) {
        let oracle = if k > n { 0 } else { (exact_binom(n, k) % p as u128) as u64 };
        prop_assert_eq!(binom_mod_p(n, k, p), oracle);
    }

    #[test]
    fn schedules_reach_closed_forms(seed in generic_seed()) {
        for j_set in subsets(seed.f()) {
            let end = evaluate_schedule(&seed, &schedule_a_j(&j_set, seed.f())).pop().unwrap_or_else(|| seed.clone());
            prop_assert_eq!(end.param(), r_j_w_j(&j_set, &seed).0);
        }
    }

    #[test]
    fn letters_preserve_central_character(seed in generic_seed(), j in 0u32..4) {
        let j = j % seed.f();
        let next = apply_a_weight(j, &seed);
        let q1 = seed.q() - 1;
        prop_assert_eq!((seed.param() + 2 * seed.w) % q1, (next.param() + 2 * next.w) % q1);
    }

    #[test]
    fn regular_weights_round_trip_through_characters(seed in generic_seed()) {
        prop_assert_eq!(weight_from_char(seed.highest_char(), seed.p, seed.f()).unwrap(), seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi_is_k_equivariant_modulo_im_t(words in prop::collection::vec(prop::collection::vec((0u8..5, 0u32..1000, 0u32..2), 1..4), 1..4)) {
        let seed = SerreWeight::new(7, vec![3, 3], 0).unwrap();
        let target = Model::new(&seed, 1, 1).unwrap();
        let j = 1u32;
        let s = target.build_element(&Named::S { n: 1, k: 7u64.pow(j) * 4 }).unwrap();
        let source = Model::with_ring(&apply_a_weight(j, &seed), target.ring().clone());
        let phi = PhiMap::build(source, s, &target).unwrap();
        let ctx = QuotientContext::new(&target, 1);
        let ks: Vec<Mat2Local> = words.iter().map(|w| k_matrix(&target, w)).collect();
        prop_assert!(phi.is_equivariant(&ctx, &ks).unwrap());
    }
}

