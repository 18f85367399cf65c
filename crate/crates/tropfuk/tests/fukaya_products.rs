mod common;
use common::*;

use tropfuk::base_geometry::auto_perturb;
use tropfuk::exec::Mode;
use tropfuk::fukaya_products::{
    as_multilinear, assemble_mu, chain_map_check, default_request, tensor_of, verify_a_infinity, verify_quantum, ProductRequest, Settings,
};
use tropfuk::perm_operad::Perm;
use tropfuk::rat::int;

#[test]
fn triangle_products_match_cover_count() {
    triangle_cover_agreement();
}

#[test]
fn a_infinity_cancels_with_certificate() {
    let chain = auto_perturb(&[0, 1, 2, 3], 1);
    let r = verify_a_infinity(1, &chain, &Settings::new(int(4)), true).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    assert!(r.residuals.is_empty());
    assert!(!r.pairs.is_empty());
    for p in &r.pairs {
        assert_eq!(p.signs.0 + p.signs.1, 0);
    }
}

#[test]
fn a_infinity_cancels_at_circumference_two() {
    let chain = auto_perturb(&[0, 1, 2, 3], 2);
    let r = verify_a_infinity(2, &chain, &Settings::new(int(6)), false).unwrap();
    assert_eq!(r.check_passed("residual_zero"), Some(true));
}

#[test]
fn sequential_and_parallel_agree() {
    let chain = auto_perturb(&[0, 2, 1, 3], 1);
    let mut st = Settings::new(int(5));
    st.mode = Mode::Sequential;
    let a = assemble_mu(&ProductRequest::disk(1, chain.clone(), st.clone())).unwrap();
    st.mode = Mode::Auto;
    let b = assemble_mu(&ProductRequest::disk(1, chain, st)).unwrap();
    assert_eq!(a.tensor, b.tensor);
}

#[test]
fn quantum_relation_for_two_circles() {
    let sigma: Perm = "(1 2)(3)".parse().unwrap();
    let req = default_request(1, &sigma, int(4)).unwrap();
    let r = verify_quantum(&req).unwrap();
    for name in ["A_annulus_tensor_zero", "B_loop_term_zero", "B_certificate", "degenerations", "C_mixed_terms_empty"] {
        assert_eq!(r.check_passed(name), Some(true), "{name}: {:#?}", r.checks);
    }
    assert!(!r.pairs.is_empty(), "the loop term has contributions to cancel");
    for p in &r.pairs {
        assert_eq!(p.signs.0, -p.signs.1);
    }
    let t: serde_json::Value = r.to_json();
    assert_eq!(t["verdict"], "pass");
}

#[test]
fn chain_map_sizes() {
    let st = Settings::new(int(4));
    for (n, b) in [(4, 0), (3, 1), (2, 1)] {
        let r = chain_map_check(n, b, None, 1, &st).unwrap();
        assert!(r.passed(), "({n}, {b}): {:#?}", r.checks);
        assert_eq!(r.relation, format!("chain_map_{n}_{b}"));
    }
    assert!(chain_map_check(5, 0, None, 1, &st).is_err());
}

#[test]
fn multilinear_round_trip() {
    let chain = auto_perturb(&[0, 1, 2], 1);
    let st = Settings::new(int(6));
    let mu = assemble_mu(&ProductRequest::disk(1, chain, st.clone())).unwrap();
    let m = as_multilinear(&mu).unwrap();
    let back = tensor_of(&m, mu.tensor.declared_degree, st.grading);
    assert_eq!(back.coeffs, mu.tensor.coeffs);
}

#[test]
fn annulus_has_no_multilinear_form() {
    let sigma: Perm = "(1 2)(3)".parse().unwrap();
    let req = default_request(1, &sigma, int(3)).unwrap();
    let mu = assemble_mu(&req).unwrap();
    assert!(as_multilinear(&mu).is_err());
}
