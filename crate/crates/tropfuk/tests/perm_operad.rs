mod common;
use common::*;

use tropfuk::exec::Mode;
use tropfuk::perm_operad::*;

#[test]
fn edge_composition_adds_b() {
    edge_compositions();
}

#[test]
fn loop_composition_raises_b() {
    loop_compositions();
}

#[test]
fn deletion_undoes_insertion() {
    for n in 1..=5u32 {
        let base = nums(1..=n);
        for p in perms_on(&base) {
            // f and f' each go after some letter or into a cycle of their own
            let spots: Vec<Option<Letter>> = std::iter::once(None).chain(base.iter().copied().map(Some)).collect();
            for &sf in &spots {
                for &sfp in spots.iter().chain([Some(Letter::F)].iter()) {
                    let mut cycles: Vec<Vec<Letter>> = p.cycles();
                    let mut insert = |after: Option<Letter>, x: Letter| match after {
                        None => cycles.push(vec![x]),
                        Some(y) => {
                            for c in cycles.iter_mut() {
                                if let Some(i) = c.iter().position(|&z| z == y) {
                                    c.insert(i + 1, x);
                                    return;
                                }
                            }
                        }
                    };
                    insert(sf, Letter::F);
                    insert(sfp, Letter::Fp);
                    let q = Perm::from_cycles(&cycles).unwrap();
                    assert_eq!(pi_ff(&q).unwrap(), p);
                }
            }
        }
    }
}

#[test]
fn chain_contractions_commute() {
    let f2 = Letter::Num(100);
    let f2p = Letter::Num(101);
    let a_letters = [Letter::Num(1), Letter::Num(2), Letter::F];
    let b_letters = [Letter::Num(3), Letter::Fp, f2];
    let c_letters = [Letter::Num(4), Letter::Num(5), f2p];
    let to_f = |from: Letter| move |l: Letter| if l == from { Letter::F } else { l };
    let to_fp = |from: Letter| move |l: Letter| if l == from { Letter::Fp } else { l };
    let mut count = 0;
    for a in perms_on(&a_letters) {
        for b in perms_on(&b_letters) {
            for c in perms_on(&c_letters) {
                let ga = StGenerator::new(a.clone(), 0).unwrap();
                let gb = StGenerator::new(b.clone(), 0).unwrap();
                let gc = StGenerator::new(c.relabel(to_fp(f2p)), 0).unwrap();
                // first edge, then second
                let first = compose_edge(&ga, &gb).map(|x| StGenerator::new(x.perm.relabel(to_f(f2)), x.g).unwrap());
                let left = first.and_then(|x| compose_edge(&x, &gc));
                // second edge, then first
                let gb2 = StGenerator::new(
                    b.relabel(|l| match l {
                        Letter::Fp => f2p,
                        l if l == f2 => Letter::F,
                        l => l,
                    }),
                    0,
                )
                .unwrap();
                let second = compose_edge(&gb2, &gc).map(|x| StGenerator::new(x.perm.relabel(to_fp(f2p)), x.g).unwrap());
                let right = second.and_then(|x| compose_edge(&ga, &x));
                match (left, right) {
                    (Ok(l), Ok(r)) => {
                        assert_eq!(l, r);
                        count += 1;
                    }
                    (Err(_), Err(_)) => {}
                    (l, r) => panic!("{a} {b} {c}: {l:?} vs {r:?}"),
                }
            }
        }
    }
    assert!(count > 0);
}

#[test]
fn preimages_recompose() {
    preimage_roundtrips();
}

#[test]
fn split_cycle_loop_preimages() {
    for (target, k, n) in [("(1 2)(3)", 2, 3), ("(1)(2 3)", 1, 3), ("(1 2)(3 4)", 2, 4), ("(1 2 3)(4)", 3, 4)] {
        let t: StGenerator = target.parse().unwrap();
        let pre = feynman_preimages(&t, &Shape::Loop, Mode::Sequential);
        assert_eq!(pre.len(), k * (n - k), "{target}");
        let mut word: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
        word.push("f".into());
        word.extend((k + 1..=n).map(|i| i.to_string()));
        word.push("f'".into());
        let interleaved: StGenerator = format!("({})", word.join(" ")).parse().unwrap();
        assert!(pre.iter().any(|p| p.preimage == Preimage::Loop(interleaved.clone())));
        for p in &pre {
            let Preimage::Loop(s) = &p.preimage else { panic!() };
            assert_eq!(s.perm.cycle_count(), 1);
        }
    }
    let t: StGenerator = "(1 2 3)".parse().unwrap();
    assert!(feynman_preimages(&t, &Shape::Loop, Mode::Sequential).is_empty());
}
