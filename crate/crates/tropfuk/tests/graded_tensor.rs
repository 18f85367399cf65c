mod common;
use common::*;

use proptest::prelude::*;
use tropfuk::graded_tensor::*;
use tropfuk::rat::int;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn koszul_independent_of_decomposition(
        degs in prop::collection::vec(0i64..4, 1..=8),
        seed in prop::collection::vec(0usize..100, 8),
    ) {
        let perm = shuffled(degs.len(), &seed);
        prop_assert_eq!(koszul_sign_oracle(&degs, &perm), insertion_sign(&degs, &perm));
    }

    #[test]
    fn pair_sign_matches_moves(
        v in prop::collection::vec(0i64..4, 1..=5),
        w in prop::collection::vec(0i64..4, 1..=5),
        a in 0usize..5,
        b in 0usize..5,
    ) {
        let alpha = a % v.len();
        let beta = b % w.len();
        let mut v = v;
        let mut w = w;
        v[alpha] %= 2;
        w[beta] = 1 - v[alpha];
        prop_assert_eq!(library_pair_sign(&v, &w, alpha, beta), pair_oracle(&v, &w, alpha, beta));
    }

    #[test]
    fn loop_sign_matches_moves(
        v in prop::collection::vec(0i64..4, 2..=7),
        a in 0usize..7,
        b in 0usize..7,
    ) {
        let n = v.len();
        let (x, y) = (a % n, b % n);
        prop_assume!(x != y);
        let (alpha, beta) = (x.min(y), x.max(y));
        let mut v = v;
        v[alpha] %= 2;
        v[beta] = 1 - v[alpha];
        prop_assert_eq!(library_loop_sign(&v, alpha, beta), loop_oracle(&v, alpha, beta));
    }
}

#[test]
fn pair_sign_reduces_to_prefix_parity() {
    pair_prefix_parity();
}

#[test]
fn pairing_antisymmetry() {
    let b = PairingB;
    for d in 0..2 {
        let p = GradedGenerator::new("p", "p*", d);
        let q = GradedGenerator::new("p*", "p", 1 - d);
        assert_eq!(b.value(&p, &q), -b.value(&q, &p));
        let sign = if (p.degree * q.degree) % 2 == 0 { 1 } else { -1 };
        assert_eq!(b.value(&q, &p), -sign * b.value(&p, &q));
    }
}

#[test]
fn degree_shaped_tensors() {
    let g0 = GradedGenerator::new("a", "a*", 0);
    let g1 = GradedGenerator::new("b", "b*", 1);
    let mut t = Tensor::new(vec![vec![g0.clone()], vec![g0.clone()], vec![g1.clone()]], 2, int(1), Grading::Shifted);
    t.add(vec![0, 0, 0], &NovikovSeries::monomial(int(0), 1, int(1)));
    assert_eq!(tensor_degree(&t).unwrap(), 2);
    let mut t = Tensor::new(vec![vec![g1.clone()]; 4], 0, int(1), Grading::Shifted);
    t.add(vec![0; 4], &NovikovSeries::monomial(int(0), 1, int(1)));
    assert_eq!(tensor_degree(&t).unwrap(), 0);
    let empty = Tensor::new(vec![vec![g0]; 2], 7, int(1), Grading::Plain);
    assert_eq!(tensor_degree(&empty).unwrap(), 7);
}

#[test]
fn json_dump_shape() {
    let t = rank_one(&[0, 1], &plain_keys(2, "x"));
    let j = t.to_json();
    assert_eq!(j[0]["tuple"], serde_json::json!(["x0", "x1"]));
    assert_eq!(j[0]["series"][0]["exp"], "0");
    assert_eq!(j[0]["series"][0]["coeff"], 1);
}
