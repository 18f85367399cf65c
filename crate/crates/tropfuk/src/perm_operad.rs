//! Permutations with a t-power, their edge and loop compositions, deletion of
//! the auxiliary letters f, f', and preimages under the two compositions.
//!
//! Products apply the rightmost factor first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::exec::{self, Mode};
use crate::stable_graph::StableGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("cannot parse permutation {0:?}: {1}")]
    Parse(String, String),
    #[error("letter {0} missing from the ground set")]
    Missing(Letter),
    #[error("ground sets overlap or carry the wrong auxiliary letter")]
    BadGround,
    #[error("unstable generator: n={0}, b={1}")]
    Unstable(usize, i64),
    #[error("composition leaves no consistent t-power (b={0}, cycles={1})")]
    NonIntegralGenus(i64, usize),
    #[error("contraction deletes a whole cycle")]
    EmptyCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Num(u32),
    F,
    Fp,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Num(k) => write!(f, "{k}"),
            Letter::F => write!(f, "f"),
            Letter::Fp => write!(f, "f'"),
        }
    }
}

impl FromStr for Letter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f" => Ok(Letter::F),
            "f'" => Ok(Letter::Fp),
            _ => s.parse::<u32>().map(Letter::Num).map_err(|_| format!("bad letter {s:?}")),
        }
    }
}

/// A bijection of a finite set of letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    map: BTreeMap<Letter, Letter>,
}

impl Perm {
    pub fn identity(letters: impl IntoIterator<Item = Letter>) -> Self {
        Perm { map: letters.into_iter().map(|l| (l, l)).collect() }
    }

    pub fn from_cycles(cycles: &[Vec<Letter>]) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for c in cycles {
            for (i, &l) in c.iter().enumerate() {
                if map.insert(l, c[(i + 1) % c.len()]).is_some() {
                    return Err(format!("letter {l} repeated"));
                }
            }
        }
        Ok(Perm { map })
    }

    /// `images[i]` is the image of `i + 1`.
    pub fn from_images(images: &[u32]) -> Self {
        Perm { map: images.iter().enumerate().map(|(i, &x)| (Letter::Num(i as u32 + 1), Letter::Num(x))).collect() }
    }

    pub fn apply(&self, l: Letter) -> Letter {
        self.map.get(&l).copied().unwrap_or(l)
    }

    pub fn ground(&self) -> BTreeSet<Letter> {
        self.map.keys().copied().collect()
    }

    pub fn contains(&self, l: Letter) -> bool {
        self.map.contains_key(&l)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn images(&self) -> Vec<Letter> {
        self.map.values().copied().collect()
    }

    /// `self` after `other`, on the union of both ground sets.
    pub fn after(&self, other: &Perm) -> Perm {
        let ground: BTreeSet<Letter> = self.ground().union(&other.ground()).copied().collect();
        Perm { map: ground.into_iter().map(|l| (l, self.apply(other.apply(l)))).collect() }
    }

    /// Cycles, each starting at its least letter, ordered by that letter.
    pub fn cycles(&self) -> Vec<Vec<Letter>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.map.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut c = vec![start];
            seen.insert(start);
            let mut x = self.apply(start);
            while x != start {
                seen.insert(x);
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Renames every letter through `f`, which must be injective.
    pub fn relabel(&self, f: impl Fn(Letter) -> Letter) -> Perm {
        Perm { map: self.map.iter().map(|(&k, &v)| (f(k), f(v))).collect() }
    }

    /// Exchanges the names f and f'.
    pub fn swap_aux(&self) -> Perm {
        let sw = |l: Letter| match l {
            Letter::F => Letter::Fp,
            Letter::Fp => Letter::F,
            x => x,
        };
        Perm { map: self.map.iter().map(|(&k, &v)| (sw(k), sw(v))).collect() }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            write!(f, "({})", c.iter().map(|l| l.to_string()).join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Perm {
    type Err = PermError;
    fn from_str(s: &str) -> Result<Self, PermError> {
        let err = |m: &str| PermError::Parse(s.to_string(), m.to_string());
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| err("expected '('"))?;
            let end = body.find(')').ok_or_else(|| err("unclosed cycle"))?;
            let letters: Result<Vec<Letter>, String> =
                body[..end].split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(str::parse).collect();
            let letters = letters.map_err(|m| err(&m))?;
            if letters.is_empty() {
                return Err(err("empty cycle"));
            }
            cycles.push(letters);
            rest = body[end + 1..].trim_start();
        }
        Perm::from_cycles(&cycles).map_err(|m| err(&m))
    }
}

/// `sigma t^g` with `b = 2g + cycles - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StGenerator {
    pub perm: Perm,
    pub g: u32,
}

impl StGenerator {
    /// Any nonempty permutation; stability is checked where it matters.
    pub fn new(perm: Perm, g: u32) -> Result<Self, PermError> {
        if perm.is_empty() {
            return Err(PermError::Unstable(0, -1));
        }
        Ok(StGenerator { perm, g })
    }

    /// `2b + n - 2 > 0`.
    pub fn is_stable(&self) -> bool {
        2 * self.b() + self.n() as i64 - 2 > 0
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn b(&self) -> i64 {
        2 * self.g as i64 + self.perm.cycle_count() as i64 - 1
    }
}

impl fmt::Display for StGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}t^{}", self.perm, self.g)
    }
}

impl FromStr for StGenerator {
    type Err = PermError;
    /// `"(1 2 f)(3)"` or `"(1 2)t^1"`.
    fn from_str(s: &str) -> Result<Self, PermError> {
        let (p, g) = match s.rfind('t') {
            Some(i) if s[..i].trim_end().ends_with(')') => {
                let g = s[i + 1..].trim_start_matches('^').trim();
                let g = g.parse::<u32>().map_err(|_| PermError::Parse(s.into(), "bad t-power".into()))?;
                (&s[..i], g)
            }
            _ => (s, 0),
        };
        StGenerator::new(p.parse()?, g)
    }
}

/// All `sigma t^g` on `1..=n` with `2g + cycles - 1 = b`, ordered by the
/// image vector of `sigma`.
pub fn generators(n: usize, b: u32) -> Result<Vec<StGenerator>, PermError> {
    if 2 * b as i64 + n as i64 - 2 <= 0 {
        return Err(PermError::Unstable(n, b as i64));
    }
    let mut out = Vec::new();
    for images in (1..=n as u32).permutations(n) {
        let perm = Perm::from_images(&images);
        let i = perm.cycle_count() as i64;
        let twice_g = b as i64 + 1 - i;
        if twice_g >= 0 && twice_g % 2 == 0 {
            out.push(StGenerator { perm, g: (twice_g / 2) as u32 });
        }
    }
    Ok(out)
}

/// Deletes f and f' from the cycle notation.
pub fn pi_ff(sigma: &Perm) -> Result<Perm, PermError> {
    for l in [Letter::F, Letter::Fp] {
        if !sigma.contains(l) {
            return Err(PermError::Missing(l));
        }
    }
    let aux = |l: Letter| matches!(l, Letter::F | Letter::Fp);
    let mut map = BTreeMap::new();
    for l in sigma.ground().into_iter().filter(|&l| !aux(l)) {
        let mut y = sigma.apply(l);
        while aux(y) {
            y = sigma.apply(y);
        }
        map.insert(l, y);
    }
    Ok(Perm { map })
}

fn transposition() -> Perm {
    Perm::from_cycles(&[vec![Letter::F, Letter::Fp]]).expect("two distinct letters")
}

/// `pi_ff(sigma tau (f f')) t^{g + g'}` for `a` on `S + {f}` and `b` on
/// `T + {f'}`.
pub fn compose_edge(a: &StGenerator, b: &StGenerator) -> Result<StGenerator, PermError> {
    let (ga, gb) = (a.perm.ground(), b.perm.ground());
    if !ga.contains(&Letter::F) || ga.contains(&Letter::Fp) || !gb.contains(&Letter::Fp) || gb.contains(&Letter::F) {
        return Err(PermError::BadGround);
    }
    if !ga.is_disjoint(&gb) {
        return Err(PermError::BadGround);
    }
    // two-letter vertices are allowed here so that a bare edge can be
    // absorbed, one-letter ones are not
    for s in [a, b] {
        if 2 * s.b() + s.n() as i64 - 2 < 0 {
            return Err(PermError::Unstable(s.n(), s.b()));
        }
    }
    if a.perm.apply(Letter::F) == Letter::F && b.perm.apply(Letter::Fp) == Letter::Fp {
        return Err(PermError::EmptyCycle);
    }
    let prod = a.perm.after(&b.perm.after(&transposition()));
    Ok(StGenerator { perm: pi_ff(&prod)?, g: a.g + b.g })
}

/// Result of a loop contraction. `g` is solved from the target grading
/// `b_out = b_in + 1`; `literal_power` is the uniform `g + 1` reading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopResult {
    pub generator: StGenerator,
    pub literal_power: u32,
}

/// `pi_ff(sigma (f f'))` with the t-power fixed by `b_out = b_in + 1`.
pub fn compose_loop(a: &StGenerator) -> Result<LoopResult, PermError> {
    let perm = pi_ff(&a.perm.after(&transposition()))?;
    let b_out = a.b() + 1;
    let i_out = perm.cycle_count() as i64;
    let twice_g = b_out + 1 - i_out;
    if perm.is_empty() || twice_g < 0 || twice_g % 2 != 0 {
        return Err(PermError::NonIntegralGenus(b_out, perm.cycle_count()));
    }
    Ok(LoopResult { generator: StGenerator { perm, g: (twice_g / 2) as u32 }, literal_power: a.g + 1 })
}

/// Cohomological degree `n + b`.
pub fn generator_degree(a: &StGenerator) -> i64 {
    a.n() as i64 + a.b()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Trivial,
    Sgn,
}

/// The twist `sgn_n[-n + b - 2]` as degree bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeTwist {
    pub n: i64,
    pub b: i64,
    pub shift: i64,
    pub parity: Parity,
}

impl DegreeTwist {
    pub fn gamma(n: usize, b: u32) -> Self {
        let (n, b) = (n as i64, b as i64);
        DegreeTwist { n, b, shift: -n + b - 2, parity: Parity::Sgn }
    }

    /// Degree of the dual of a shifted generator `sigma t^g [shift]`.
    pub fn dual_degree(&self) -> i64 {
        -(self.n + self.b + self.shift)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Loop,
    /// Letters on the vertex carrying f, and the genus split.
    Edge {
        left: BTreeSet<u32>,
        left_b: u32,
        right_b: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preimage {
    Loop(StGenerator),
    Edge(StGenerator, StGenerator),
}

#[derive(Clone, Debug)]
pub struct PreimageTerm {
    pub preimage: Preimage,
    pub host: StableGraph,
}

fn all_with(letters: &[Letter], b: i64, mode: Mode) -> Vec<StGenerator> {
    let perms: Vec<Vec<Letter>> = letters.iter().copied().permutations(letters.len()).collect();
    exec::flat_map(mode, &perms, |img| {
        let perm = Perm { map: letters.iter().copied().zip(img.iter().copied()).collect() };
        let twice_g = b + 1 - perm.cycle_count() as i64;
        if twice_g < 0 || twice_g % 2 != 0 {
            return vec![];
        }
        let s = StGenerator { perm, g: (twice_g / 2) as u32 };
        if s.is_stable() {
            vec![s]
        } else {
            vec![]
        }
    })
}

/// Every preimage of `target` under the composition of the given shape.
/// Loop preimages are listed once per exchange of f and f'.
pub fn feynman_preimages(target: &StGenerator, shape: &Shape, mode: Mode) -> Vec<PreimageTerm> {
    let letters: Vec<Letter> = target.perm.ground().into_iter().collect();
    let n = letters.len();
    let tb = target.b();
    match shape {
        Shape::Loop => {
            if tb < 1 {
                return vec![];
            }
            let mut ground = letters.clone();
            ground.extend([Letter::F, Letter::Fp]);
            let mut out = Vec::new();
            for s in all_with(&ground, tb - 1, mode) {
                if s.perm.swap_aux() < s.perm {
                    continue;
                }
                if compose_loop(&s).is_ok_and(|r| &r.generator == target) {
                    let host = StableGraph::star_loops(n, 1, (tb - 1) as u32);
                    out.push(PreimageTerm { preimage: Preimage::Loop(s), host });
                }
            }
            out
        }
        Shape::Edge { left, left_b, right_b } => {
            if (*left_b + *right_b) as i64 != tb {
                return vec![];
            }
            let mut l: Vec<Letter> = letters.iter().copied().filter(|x| matches!(x, Letter::Num(k) if left.contains(k))).collect();
            let mut r: Vec<Letter> = letters.iter().copied().filter(|x| !l.contains(x)).collect();
            l.push(Letter::F);
            r.push(Letter::Fp);
            let lefts = all_with(&l, *left_b as i64, mode);
            let rights = all_with(&r, *right_b as i64, mode);
            let host = edge_host(&l, *left_b, &r, *right_b);
            let mut out = Vec::new();
            for a in &lefts {
                for b in &rights {
                    if compose_edge(a, b).is_ok_and(|c| &c == target) {
                        out.push(PreimageTerm { preimage: Preimage::Edge(a.clone(), b.clone()), host: host.clone() });
                    }
                }
            }
            out
        }
    }
}

fn edge_host(l: &[Letter], lb: u32, r: &[Letter], rb: u32) -> StableGraph {
    let mut legs = Vec::new();
    let mut flag = 0;
    let mut blocks = vec![Vec::new(), Vec::new()];
    let mut ends = [0, 0];
    for (v, side) in [l, r].into_iter().enumerate() {
        for &x in side {
            if let Letter::Num(k) = x {
                legs.push((flag, k));
            } else {
                ends[v] = flag;
            }
            blocks[v].push(flag);
            flag += 1;
        }
    }
    StableGraph::from_parts(blocks, &[(ends[0], ends[1])], vec![lb, rb], &legs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(s: &str) -> StGenerator {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let g = gen("(2 f 1)(3 f')");
        assert_eq!(g.to_string(), "(1 2 f)(3 f')t^0");
        assert_eq!(gen("(1 2)t^1").g, 1);
        assert!("(1 1)".parse::<Perm>().is_err());
        assert!("(1 2".parse::<Perm>().is_err());
    }

    #[test]
    fn generator_lists() {
        let g = generators(3, 0).unwrap();
        assert_eq!(g.iter().map(|x| x.to_string()).collect::<Vec<_>>(), ["(1 2 3)t^0", "(1 3 2)t^0"]);
        let g = generators(2, 1).unwrap();
        assert_eq!(g.iter().map(|x| x.to_string()).collect::<Vec<_>>(), ["(1)(2)t^0"]);
        let g = generators(2, 2).unwrap();
        assert_eq!(g.iter().map(|x| x.to_string()).collect::<Vec<_>>(), ["(1 2)t^1"]);
        assert!(generators(1, 1).unwrap().is_empty());
        assert!(generators(2, 0).is_err());
    }

    #[test]
    fn deletion() {
        let p = |s: &str| s.parse::<Perm>().unwrap();
        assert_eq!(pi_ff(&p("(1 2 f 3 f')")).unwrap(), p("(1 2 3)"));
        assert_eq!(pi_ff(&p("(1)(f)(f')")).unwrap(), p("(1)"));
        assert_eq!(pi_ff(&p("(1 f)(2 f')")).unwrap(), p("(1)(2)"));
        assert_eq!(pi_ff(&p("(1 f)")), Err(PermError::Missing(Letter::Fp)));
    }

    #[test]
    fn edge_examples() {
        let c = compose_edge(&gen("(1 2 f)"), &gen("(3 f')")).unwrap();
        assert_eq!(c.to_string(), "(1 2 3)t^0");
        let c = compose_edge(&gen("(1 2 f)"), &gen("(3 4 f')")).unwrap();
        assert_eq!(c.to_string(), "(1 2 3 4)t^0");
        assert_eq!(compose_edge(&gen("(f)"), &gen("(3 4 f')")), Err(PermError::Unstable(1, 0)));
        assert_eq!(compose_edge(&gen("(1 2)(f)"), &gen("(3 4)(f')")), Err(PermError::EmptyCycle));
    }

    #[test]
    fn loop_examples() {
        let r = compose_loop(&gen("(1 2 f 3 f')")).unwrap();
        assert_eq!(r.generator.to_string(), "(1 2)(3)t^0");
        assert_eq!(r.literal_power, 1);
        assert_eq!(r.generator.b(), 1);
        // merging f and f' directly after each other leaves (1 2)(f')-type data
        assert!(matches!(compose_loop(&gen("(1 2 f f')")), Err(PermError::NonIntegralGenus(..))));
        let r = compose_loop(&gen("(1 f)(2 f')")).unwrap();
        assert_eq!(r.generator.to_string(), "(1 2)t^1");
        assert_eq!(r.generator.b(), 2);
    }

    #[test]
    fn degrees() {
        assert_eq!(generator_degree(&gen("(1 2 3)")), 3);
        let t = DegreeTwist::gamma(3, 0);
        assert_eq!(t.dual_degree(), 2);
        assert_eq!(DegreeTwist::gamma(5, 1).dual_degree(), 0);
    }
}
