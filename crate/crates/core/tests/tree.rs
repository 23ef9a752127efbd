use proptest::prelude::*;
use supersingular::gfq::FieldElem;
use supersingular::induction::{InducedElement, Model, Vertex};
use supersingular::localring::Mat2Local;
use supersingular::weights::SerreWeight;

fn model(p: u32, r: Vec<u32>, w: i64) -> Model {
    Model::new(&SerreWeight::new(p, r, w).unwrap(), 1, 5).unwrap()
}

/// Builds a group element from a word of (kind, digit, depth) letters.
fn word_matrix(m: &Model, word: &[(u8, u32, u32)]) -> Mat2Local {
    let r = m.ring();
    let gf = m.gf();
    let mut g = r.mat_identity();
    for &(kind, code, depth) in word {
        let lam = gf.elem(code % gf.order());
        let t = r.mul(&r.teichmuller(lam), &r.pi_pow(depth));
        let unit = r.teichmuller(if lam.is_zero() { FieldElem::ONE } else { lam });
        let h = match kind % 7 {
            0 => r.delta_b(t),
            1 => r.delta_c(t),
            2 => r.delta_a(t),
            3 => r.diag(unit, r.one()),
            4 => r.w(),
            5 => r.beta(),
            _ => r.lower_unipotent(lam),
        };
        g = r.mat_mul(&g, &h);
    }
    g
}

fn element(m: &Model, terms: &[(u32, u8, u64, Vec<u32>)]) -> InducedElement {
    let gf = m.gf();
    let mut x = InducedElement::zero();
    for (n, side, code, vals) in terms {
        let n = n % 3;
        let v = Vertex { n, side: side % 2, code: code % m.q().pow(n) };
        let val: Vec<FieldElem> = (0..m.dim()).map(|i| gf.elem(vals[i % vals.len()] % gf.order())).collect();
        x.add_term(gf, v, FieldElem::ONE, &val);
    }
    x
}

fn letters() -> impl Strategy<Value = Vec<(u8, u32, u32)>> {
    prop::collection::vec((0u8..7, 0u32..1000, 0u32..2), 1..4)
}

fn terms() -> impl Strategy<Value = Vec<(u32, u8, u64, Vec<u32>)>> {
    prop::collection::vec((0u32..3, 0u8..2, 0u64..10_000, prop::collection::vec(0u32..1000, 1..5)), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn hecke_commutes_with_the_action_q7(word in letters(), xs in terms()) {
        let m = model(7, vec![3], 0);
        let g = word_matrix(&m, &word);
        let x = element(&m, &xs);
        prop_assert_eq!(m.hecke(&m.act(&g, &x).unwrap()), m.act(&g, &m.hecke(&x)).unwrap());
    }

    #[test]
    fn hecke_commutes_with_the_action_q25(word in letters(), xs in terms()) {
        let m = model(5, vec![2, 1], 1);
        let g = word_matrix(&m, &word);
        let x = element(&m, &xs);
        prop_assert_eq!(m.hecke(&m.act(&g, &x).unwrap()), m.act(&g, &m.hecke(&x)).unwrap());
    }

    #[test]
    fn action_is_a_group_action(w1 in letters(), w2 in letters(), xs in terms()) {
        let m = model(5, vec![2, 1], 0);
        let (g, h) = (word_matrix(&m, &w1), word_matrix(&m, &w2));
        let x = element(&m, &xs);
        let gh = m.ring().mat_mul(&g, &h);
        prop_assert_eq!(m.act(&gh, &x).unwrap(), m.act(&g, &m.act(&h, &x).unwrap()).unwrap());
    }

    #[test]
    fn reducer_inverts_hecke(xs in terms()) {
        let m = model(7, vec![3], 0);
        let x = element(&m, &xs);
        let y = m.hecke(&x);
        prop_assert_eq!(m.im_t_membership(&y, 3).unwrap(), Some(x));
    }
}
