//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropfuk::base_geometry::{auto_perturb, corner_degree, intersection_points, CirclePoint, Lagrangian};
use tropfuk::exec::Mode;
use tropfuk::fukaya_products::{assemble_mu, slot_basis, triangle_oracle, ProductRequest, Settings};
use tropfuk::graded_tensor::*;
use tropfuk::perm_operad::*;
use tropfuk::rat::{frac, int, modulo, Rational};
use tropfuk::stable_graph::StableGraph;
use tropfuk::tropical_moduli::{
    enumerate_types, mark_edges, rigid_solutions, solve, Boundary, Corner, Lift, RibbonType, RigidOptions, Slot, TmgSolution,
};

// stable_graph

/// Three genus-0 vertices, four edges and a single leg (flags 0-based).
pub fn three_vertex_graph() -> StableGraph {
    StableGraph::from_parts(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]], &[(0, 1), (2, 3), (4, 6), (5, 7)], vec![0, 0, 0], &[(8, 1)])
}

// perm_operad

pub fn perms_on(letters: &[Letter]) -> Vec<Perm> {
    letters
        .iter()
        .copied()
        .permutations(letters.len())
        .map(|img| {
            let cycles: Vec<Vec<Letter>> = {
                // build from the image map via two-line notation
                let mut seen = vec![false; letters.len()];
                let mut out = Vec::new();
                for i in 0..letters.len() {
                    if seen[i] {
                        continue;
                    }
                    let mut c = Vec::new();
                    let mut j = i;
                    while !seen[j] {
                        seen[j] = true;
                        c.push(letters[j]);
                        j = letters.iter().position(|&x| x == img[j]).unwrap();
                    }
                    out.push(c);
                }
                out
            };
            Perm::from_cycles(&cycles).unwrap()
        })
        .collect()
}

pub fn nums(r: std::ops::RangeInclusive<u32>) -> Vec<Letter> {
    r.map(Letter::Num).collect()
}

/// Generators with `b <= 2` that are at least semistable.
pub fn gens_on(letters: &[Letter]) -> Vec<StGenerator> {
    let mut out = Vec::new();
    for p in perms_on(letters) {
        for g in 0..=1 {
            let s = StGenerator::new(p.clone(), g).unwrap();
            if s.b() <= 2 && 2 * s.b() + s.n() as i64 - 2 >= 0 {
                out.push(s);
            }
        }
    }
    out
}

// graded_tensor

/// Rearranges by moving symbols one at a time from the right end of their
/// target slot leftward (insertion order), a different adjacent-swap
/// decomposition from the library's bubble sort.
pub fn insertion_sign(degrees: &[i64], perm: &[usize]) -> i32 {
    let mut word: Vec<usize> = (0..perm.len()).collect();
    let mut sign = 1;
    for (i, &want) in perm.iter().enumerate() {
        let mut j = word.iter().position(|&x| x == want).unwrap();
        while j > i {
            if (degrees[word[j]] * degrees[word[j - 1]]).rem_euclid(2) == 1 {
                sign = -sign;
            }
            word.swap(j, j - 1);
            j -= 1;
        }
    }
    sign
}

pub fn parity(e: i64) -> i32 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Moves-based sign for inserting v into w: bring B next to v_a, v_a next to
/// w_b, cycle the w-prefix to the back, evaluate the pairing, cycle back.
pub fn pair_oracle(v: &[i64], w: &[i64], alpha: usize, beta: usize) -> i32 {
    let n1 = v.len();
    let n2 = w.len();
    let mut degs = vec![1i64];
    degs.extend_from_slice(v);
    degs.extend_from_slice(w);
    let vi = |i: usize| 1 + i;
    let wi = |j: usize| 1 + n1 + j;
    let mut target: Vec<usize> = (0..n1).filter(|&i| i != alpha).map(vi).collect();
    target.push(0);
    target.push(vi(alpha));
    target.push(wi(beta));
    target.extend((beta + 1..n2).map(wi));
    target.extend((0..beta).map(wi));
    let s1 = koszul_sign_oracle(&degs, &target);

    let rest_v: Vec<i64> = (0..n1).filter(|&i| i != alpha).map(|i| v[i]).collect();
    let mut degs2 = rest_v.clone();
    degs2.extend_from_slice(&w[beta + 1..]);
    degs2.extend_from_slice(&w[..beta]);
    let nv = rest_v.len();
    let nafter = n2 - beta - 1;
    let mut target2: Vec<usize> = (nv + nafter..nv + nafter + beta).collect();
    target2.extend(0..nv);
    target2.extend(nv..nv + nafter);
    let s2 = koszul_sign_oracle(&degs2, &target2);
    s1 * s2 * parity(v[alpha])
}

pub fn loop_oracle(v: &[i64], alpha: usize, beta: usize) -> i32 {
    let n = v.len();
    let mut degs = vec![1i64];
    degs.extend_from_slice(v);
    let mut target: Vec<usize> = (0..beta).filter(|&i| i != alpha).map(|i| i + 1).collect();
    target.push(0);
    target.push(alpha + 1);
    target.push(beta + 1);
    target.extend((beta + 1..n).map(|i| i + 1));
    koszul_sign_oracle(&degs, &target) * parity(v[alpha])
}

pub fn rank_one(degs: &[i64], keys: &[(String, String)]) -> Tensor {
    let slots: Vec<Vec<GradedGenerator>> =
        degs.iter().zip(keys).map(|(&d, (k, dk))| vec![GradedGenerator::new(k.clone(), dk.clone(), d)]).collect();
    let n = degs.len() as i64;
    let mut t = Tensor::new(slots, n - degs.iter().sum::<i64>(), int(3), Grading::Plain);
    t.add(vec![0; degs.len()], &NovikovSeries::monomial(int(0), 1, int(3)));
    t
}

pub fn plain_keys(n: usize, tag: &str) -> Vec<(String, String)> {
    (0..n).map(|i| (format!("{tag}{i}"), format!("{tag}{i}*"))).collect()
}

/// Sign that contract_pair puts on two rank-one tensors with the given
/// degrees, where v_alpha = p and w_beta = p*.
pub fn library_pair_sign(v: &[i64], w: &[i64], alpha: usize, beta: usize) -> i32 {
    let mut vk = plain_keys(v.len(), "v");
    vk[alpha] = ("p".into(), "p*".into());
    let mut wk = plain_keys(w.len(), "w");
    wk[beta] = ("p*".into(), "p".into());
    let out = contract_pair(&rank_one(v, &vk), &rank_one(w, &wk), alpha, beta).unwrap();
    let c = out.coeffs.values().next().unwrap().coeff(&int(0));
    c as i32
}

pub fn library_loop_sign(v: &[i64], alpha: usize, beta: usize) -> i32 {
    let mut k = plain_keys(v.len(), "v");
    k[alpha] = ("p".into(), "p*".into());
    k[beta] = ("p*".into(), "p".into());
    let out = contract_loop(&rank_one(v, &k), alpha, beta).unwrap();
    out.coeffs.values().next().unwrap().coeff(&int(0)) as i32
}

pub fn shuffled(n: usize, seed: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for (i, &s) in seed.iter().enumerate().take(n) {
        let j = i + s % (n - i);
        p.swap(i, j);
    }
    p
}

pub fn all_words(n: usize) -> Vec<Vec<i64>> {
    (0..1u32 << n).map(|m| (0..n).map(|i| ((m >> i) & 1) as i64).collect()).collect()
}

// tropical_moduli

pub fn chain(d: i64, slopes: &[i64]) -> Boundary {
    Boundary::chain(d, slopes.iter().map(|&s| Lagrangian::unperturbed(s)).collect()).unwrap()
}

/// Two boundary circles: `outer` slopes as one chain, then `inner` slopes as
/// another, on distinct Lagrangians.
pub fn annulus(d: i64, outer: &[i64], inner: &[i64]) -> Boundary {
    let slopes: Vec<i64> = outer.iter().chain(inner).copied().collect();
    let lags = auto_perturb(&slopes, d);
    let (a, b) = (outer.len(), inner.len());
    let mut slots = Vec::new();
    let mut next = Vec::new();
    for j in 0..a {
        slots.push(Slot { source: j, target: (j + 1) % a });
        next.push((j + 1) % a);
    }
    for j in 0..b {
        slots.push(Slot { source: a + j, target: a + (j + 1) % b });
        next.push(a + (j + 1) % b);
    }
    Boundary::new(d, lags, slots, next).unwrap()
}

pub fn sample_boundaries() -> Vec<Boundary> {
    vec![
        chain(1, &[0, 1, 2]),
        chain(1, &[2, 0, 1]),
        chain(2, &[0, 1, 2, 3]),
        chain(1, &[0, 2, 1, 3]),
        chain(1, &[0, 1, 2, 3, 4]),
        chain(1, &[1, 3, 0, 4, 2]),
        annulus(1, &[0, 1], &[2]),
        annulus(1, &[0, 2], &[1]),
        annulus(1, &[0, 1, 2], &[3]),
        annulus(1, &[0, 1], &[2, 3]),
        annulus(1, &[1, 0], &[2, 4]),
        annulus(1, &[0, 1, 3], &[2, 4]),
        annulus(1, &[0, 1, 2, 3], &[4]),
    ]
}

/// Corner degrees forced by the slopes, and one generic lift of corners
/// sitting on intersection points.
pub fn generic_data(b: &Boundary, t: &RibbonType, k: usize) -> (Vec<u8>, Lift) {
    let mut degrees = Vec::new();
    let mut corners = Vec::new();
    for (s, sl) in b.slots.iter().enumerate() {
        let (src, tgt) = (&b.lagrangians[sl.source], &b.lagrangians[sl.target]);
        degrees.push(corner_degree(src, tgt));
        let pts = intersection_points(src, tgt, b.d);
        corners.push(pts[(s * 7 + k) % pts.len()].base.lift(s as i64 % 2));
    }
    (degrees, Lift::new(t, corners))
}

/// Fiber offset difference plus the label times the base, which is integral
/// exactly on the Lagrangian pair.
pub fn lagrangian_defect(t: &RibbonType, s: &TmgSolution, e: usize) -> Rational {
    let b = &t.boundary;
    let tail_v = t.ribbon.vertex[t.edges[e].tail];
    int(t.edge_label(e)) * &s.phi[tail_v] - &s.seeds[e] + b.offset(t.face[t.edges[e].tail]) - b.offset(t.face[t.edges[e].head])
}

/// Rigid triangle on unperturbed lines at circumference 8 with the given
/// corner bases, picked out by its lifted corners (up to deck translation)
/// and area.
pub fn triangle_sign(slopes: [i64; 3], bases: [i64; 3]) -> i32 {
    let d = 8;
    let b = chain(d, &slopes);
    let corners: Vec<Corner> = (0..3)
        .map(|j| Corner { base: CirclePoint::new(int(bases[j]), d), degree: corner_degree(&b.lagrangians[j], &b.lagrangians[(j + 1) % 3]) })
        .collect();
    let found = rigid_solutions(&b, &corners, &RigidOptions::new(int(5))).unwrap();
    let hits: Vec<_> = found
        .iter()
        .filter(|s| {
            let lifted = s.lifted_corners();
            let shift = &lifted[0] - int(bases[0]);
            s.area == int(4) && (0..3).all(|j| lifted[j] == int(bases[j]) + &shift)
        })
        .collect();
    assert_eq!(hits.len(), 1, "slopes {slopes:?} bases {bases:?}: {} candidates", found.len());
    hits[0].sign
}

// fukaya_products

/// Counterclockwise triangles in the universal cover with sides on lifts of
/// `a`, `b`, `c` (in that order) and corners over `bases`, one per deck
/// orbit, as exponent -> count. The first corner is pinned to its base with
/// the unshifted lift of `a`; the lift of `c` runs over its integer shifts.
pub fn cover_triangles(d: i64, chain: &[Lagrangian], bases: &[Rational], q: &Rational) -> BTreeMap<Rational, i64> {
    let (a, b, c) = (&chain[0], &chain[1], &chain[2]);
    let dd = int(d);
    let line = |l: &Lagrangian, shift: i64, y: &Rational| -int(l.slope) * y + &l.offset + int(shift);
    let meet = |l: &Lagrangian, j: i64, m: &Lagrangian, k: i64| {
        // -n_l y + v_l + j = -n_m y + v_m + k
        (&m.offset + int(k) - &l.offset - int(j)) / int(m.slope - l.slope)
    };
    let mut out = BTreeMap::new();
    let y0 = bases[0].clone();
    let x0 = line(a, 0, &y0);
    let jb = &x0 - line(b, 0, &y0);
    if !jb.is_integer() || b.slope == c.slope || a.slope == c.slope {
        return out;
    }
    let jb = jb.to_integer().try_into().unwrap();
    for jc in -400i64..=400 {
        let y1 = meet(b, jb, c, jc);
        let y2 = meet(a, 0, c, jc);
        if modulo(&(&y1 - &bases[1]), &dd) != int(0) || modulo(&(&y2 - &bases[2]), &dd) != int(0) {
            continue;
        }
        let (x1, x2) = (line(b, jb, &y1), line(a, 0, &y2));
        let twice = (&y1 - &y0) * (&x2 - &x0) - (&x1 - &x0) * (&y2 - &y0);
        if twice > int(0) && twice < int(2) * q {
            *out.entry(twice / int(2)).or_insert(0) += 1;
        }
    }
    out
}

/// Compositions along an edge for n <= 5, b <= 2; returns how many were defined.
pub fn edge_compositions() -> usize {
    let mut checked = 0;
    for n in 2..=5u32 {
        for k in 1..n {
            let mut left = nums(1..=k);
            left.push(Letter::F);
            let mut right = nums(k + 1..=n);
            right.push(Letter::Fp);
            for a in gens_on(&left) {
                for b in gens_on(&right) {
                    match compose_edge(&a, &b) {
                        Ok(c) => {
                            assert_eq!(c.b(), a.b() + b.b(), "{a} o {b}");
                            assert_eq!(c.g, a.g + b.g);
                            assert_eq!(c.n(), n as usize);
                            checked += 1;
                        }
                        Err(PermError::EmptyCycle) => {
                            assert_eq!(a.perm.apply(Letter::F), Letter::F);
                            assert_eq!(b.perm.apply(Letter::Fp), Letter::Fp);
                        }
                        Err(e) => panic!("{a} o {b}: {e}"),
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
    checked
}

/// Self-compositions for n <= 5, b <= 2; returns how many were defined.
pub fn loop_compositions() -> usize {
    let mut ok = 0;
    for n in 1..=5u32 {
        let mut letters = nums(1..=n);
        letters.extend([Letter::F, Letter::Fp]);
        for a in gens_on(&letters) {
            match compose_loop(&a) {
                Ok(r) => {
                    assert_eq!(r.generator.b(), a.b() + 1, "{a}");
                    assert_eq!(r.literal_power, a.g + 1);
                    assert!(r.generator.g == a.g || r.generator.g == a.g + 1);
                    ok += 1;
                }
                Err(PermError::NonIntegralGenus(..)) => {
                    // only when f and f' are adjacent or alone, so a cycle disappears
                    let f = a.perm.apply(Letter::F);
                    let fp = a.perm.apply(Letter::Fp);
                    assert!(f == Letter::Fp || fp == Letter::F || f == Letter::F || fp == Letter::Fp, "{a}");
                }
                Err(e) => panic!("{a}: {e}"),
            }
        }
    }
    assert!(ok > 1000);
    ok
}

/// Every Feynman preimage of a generator with n <= 5, b <= 2 composes back to it.
pub fn preimage_roundtrips() -> usize {
    let mut count = 0;
    for n in 1..=5usize {
        for b in 0..=2u32 {
            let Ok(targets) = generators(n, b) else {
                continue;
            };
            for t in targets {
                for term in feynman_preimages(&t, &Shape::Loop, Mode::Auto) {
                    let Preimage::Loop(s) = &term.preimage else { panic!() };
                    assert_eq!(compose_loop(s).unwrap().generator, t);
                    assert!(term.host.validate().valid);
                    count += 1;
                }
                for k in 0..=n {
                    for left in (1..=n as u32).combinations(k) {
                        for lb in 0..=b {
                            let shape = Shape::Edge { left: left.iter().copied().collect(), left_b: lb, right_b: b - lb };
                            for term in feynman_preimages(&t, &shape, Mode::Auto) {
                                let Preimage::Edge(x, y) = &term.preimage else { panic!() };
                                assert_eq!(compose_edge(x, y).unwrap(), t);
                                assert_eq!((x.b(), y.b()), (lb as i64, (b - lb) as i64));
                                assert!(term.host.validate().valid);
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    count
}

/// Exhaustive over degree words in {0,1} of arity <= 5.
pub fn pair_prefix_parity() -> usize {
    let mut count = 0;
    // degree-two tensors in degrees {0,1}, v contracted at its last slot
    for n in 1..=5 {
        for m in 1..=5 {
            for v in all_words(n).into_iter().filter(|x| x.iter().sum::<i64>() == 2) {
                for w in all_words(m).into_iter().filter(|x| x.iter().sum::<i64>() == 2) {
                    let alpha = n - 1;
                    for beta in 0..m {
                        if v[alpha] + w[beta] != 1 {
                            continue;
                        }
                        let prefix: i64 = w[..beta].iter().sum();
                        assert_eq!(library_pair_sign(&v, &w, alpha, beta), parity(prefix), "{v:?} {w:?} {beta}");
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// 100 seeded solved instances; returns how many had a marked edge.
pub fn propagation_instances() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut instances = 0;
    let mut with_loop = 0;
    let boundaries = sample_boundaries();
    while instances < 100 {
        let b = &boundaries[rng.gen_range(0..boundaries.len())];
        let types = enumerate_types(b).unwrap();
        let t = &types[rng.gen_range(0..types.len())];
        let corners: Vec<Rational> = (0..b.len())
            .map(|s| {
                let sl = b.slots[s];
                let pts = intersection_points(&b.lagrangians[sl.source], &b.lagrangians[sl.target], b.d);
                pts[rng.gen_range(0..pts.len())].base.lift(rng.gen_range(-2..=2))
            })
            .collect();
        let mut lift = Lift::new(t, corners);
        let marked = mark_edges(t);
        for &e in &marked {
            lift.winding[e] = rng.gen_range(-1..=1);
            lift.branch[e] = rng.gen_range(-3..=3);
        }
        let solved = solve(t, &lift, &vec![0; b.len()]).expect("unpinned system is consistent");
        // a random point of the solution space, free vertices included
        let mut x = solved.affine.particular.clone();
        for k in &solved.affine.kernel {
            let c = frac(rng.gen_range(-20..=20), rng.gen_range(1..=7));
            for (xi, ki) in x.iter_mut().zip(k) {
                *xi += &c * ki;
            }
        }
        let s = solved.system.unpack(&x);
        for e in 0..t.edges.len() {
            assert!(lagrangian_defect(t, &s, e).is_integer(), "edge {e} (marked {marked:?})");
        }
        instances += 1;
        with_loop += usize::from(!marked.is_empty());
    }
    assert!(with_loop >= 20 && with_loop <= 80, "{with_loop} one-loop instances");
    with_loop
}

/// Every triple of generators for a few chains, d in {1, 2}, Q = 9; returns
/// the number of tuples carrying triangles.
pub fn triangle_cover_agreement() -> usize {
    let q = int(9);
    let mut nonzero = 0;
    for d in [1, 2] {
        for slopes in [[0, 1, 2], [2, 0, 1], [0, 2, 1], [1, 0, 3]] {
            let chain = auto_perturb(&slopes, d);
            let mu = assemble_mu(&ProductRequest::disk(d, chain.clone(), Settings::new(q.clone()))).unwrap();
            let bases: Vec<Vec<Rational>> =
                (0..3).map(|s| slot_basis(&mu.boundary, s).into_iter().map(|(_, c)| c.base.value().clone()).collect()).collect();
            for i in 0..bases[0].len() {
                for j in 0..bases[1].len() {
                    for k in 0..bases[2].len() {
                        let ys = [bases[0][i].clone(), bases[1][j].clone(), bases[2][k].clone()];
                        let want = cover_triangles(d, &chain, &ys, &q);
                        let got: BTreeMap<Rational, i64> = mu.tensor.coeff(&[i, j, k]).terms().map(|(e, c)| (e.clone(), *c)).collect();
                        assert_eq!(got, want, "d {d} slopes {slopes:?} tuple ({i}, {j}, {k})");
                        let lib: BTreeMap<Rational, i64> =
                            triangle_oracle(d, &[chain[0].clone(), chain[1].clone(), chain[2].clone()], &ys, &q)
                                .terms()
                                .map(|(e, c)| (e.clone(), *c))
                                .collect();
                        assert_eq!(lib, want);
                        nonzero += usize::from(!want.is_empty());
                    }
                }
            }
        }
    }
    // the degree sum rules out every triangle for slopes (0, 2, 1)
    assert!(nonzero >= 10, "{nonzero} tuples with triangles");
    nonzero
}
