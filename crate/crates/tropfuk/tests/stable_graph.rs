mod common;
use common::*;

use itertools::Itertools;
use tropfuk::exec::Mode;
use tropfuk::stable_graph::*;

#[test]
fn three_vertex_graph_genus() {
    let g = three_vertex_graph();
    assert!(g.validate().valid);
    assert_eq!(g.total_genus().unwrap(), 2);
    assert_eq!(g.edges().len(), 4);
    assert!(g.edge_count_identity());
    let c = g.contract(&[(2, 3)]).unwrap();
    assert_eq!(c.target.vertices.len(), 2);
    assert_eq!(c.target.total_genus().unwrap(), 2);
}

#[test]
fn relabelled_graph_is_isomorphic() {
    let g = three_vertex_graph();
    // swap the two flags of each edge: commutes with the involution
    let perm = [1, 0, 3, 2, 6, 7, 4, 5, 8];
    let h = StableGraph {
        vertices: g.vertices.iter().map(|b| b.iter().map(|&f| perm[f]).collect()).collect(),
        involution: (0..9).map(|f| perm[g.involution[perm.iter().position(|&x| x == f).unwrap()]]).collect(),
        genus: g.genus.clone(),
        legs: g.legs.iter().map(|(f, l)| (perm[*f], *l)).collect(),
    };
    assert!(h.validate().valid);
    assert!(are_isomorphic(&g, &h).unwrap());
    assert!(are_isomorphic(&g, &g).unwrap());
    assert!(!are_isomorphic(&StableGraph::star(3, 1), &StableGraph::star_loops(3, 1, 0)).unwrap());
}

#[test]
fn enumeration_examples() {
    let c = enumerate_iso_classes(3, 0, 16, Mode::Sequential).unwrap();
    assert_eq!(c, vec![StableGraph::star(3, 0).canonical().unwrap()]);
    let c = enumerate_iso_classes(1, 1, 16, Mode::Sequential).unwrap();
    assert_eq!(c.len(), 2);
    assert!(c.contains(&StableGraph::star(1, 1).canonical().unwrap()));
    assert!(c.contains(&StableGraph::star_loops(1, 1, 0).canonical().unwrap()));
    assert!(enumerate_iso_classes(2, 0, 16, Mode::Sequential).is_err());
}

#[test]
fn enumeration_invariants() {
    for (n, b) in [(3, 0), (4, 0), (5, 0), (1, 1), (2, 1), (3, 1), (1, 2)] {
        let seq = enumerate_iso_classes(n, b, 12, Mode::Sequential).unwrap();
        let par = enumerate_iso_classes(n, b, 12, Mode::Auto).unwrap();
        assert_eq!(seq, par);
        assert!(seq.contains(&StableGraph::star(n, b).canonical().unwrap()));
        for (x, y) in seq.iter().tuple_combinations() {
            assert!(!are_isomorphic(x, y).unwrap());
        }
        for g in &seq {
            assert!(g.validate().valid);
            assert_eq!(g.total_genus().unwrap(), b);
            assert!(g.edge_count_identity());
            let edges = g.edges();
            for k in 0..=edges.len() {
                for sub in edges.iter().copied().combinations(k) {
                    let c = g.contract(&sub).unwrap();
                    assert!(c.target.validate().valid);
                    assert_eq!(c.target.total_genus().unwrap(), b);
                    assert_eq!(c.target.legs.values().collect::<Vec<_>>().len(), n);
                }
            }
        }
    }
}

#[test]
fn contractions_compose() {
    for (n, b) in [(4, 0), (5, 0), (2, 1), (3, 1)] {
        for g in enumerate_iso_classes(n, b, 12, Mode::Auto).unwrap() {
            let edges = g.edges();
            for k in 0..=edges.len() {
                for first in edges.iter().copied().combinations(k) {
                    let rest: Vec<Edge> = edges.iter().copied().filter(|e| !first.contains(e)).collect();
                    let c1 = g.contract(&first).unwrap();
                    for j in 0..=rest.len() {
                        for second in rest.iter().copied().combinations(j) {
                            let mapped: Vec<Edge> = second.iter().map(|(a, b)| (c1.flag_map[a], c1.flag_map[b])).collect();
                            let two_step = c1.target.contract(&mapped).unwrap().target;
                            let union: Vec<Edge> = first.iter().chain(&second).copied().collect();
                            let one_step = g.contract(&union).unwrap().target;
                            assert!(are_isomorphic(&two_step, &one_step).unwrap());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn class_counts_are_stable_under_flag_bound() {
    // (4, 0): the star and the three ways to split the legs two and two
    let c = enumerate_iso_classes(4, 0, 16, Mode::Auto).unwrap();
    assert_eq!(c.len(), 4);
}
