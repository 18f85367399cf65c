//! Truncated Novikov series, graded tensors over them, the degree-one pairing
//! and the two contraction maps (edge insertion and loop self-contraction)
//! with their Koszul signs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::rat::{self, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(String, String),
    #[error("slot {0} of the first tensor is not dual to slot {1} of the second")]
    NotDual(usize, usize),
    #[error("slot index {0} out of range for arity {1}")]
    BadSlot(usize, usize),
    #[error("loop contraction needs two distinct slots, got {0} and {1}")]
    SameSlot(usize, usize),
    #[error("gradings differ between contracted tensors")]
    GradingMismatch,
    #[error("tuple {0} has degree {1}, declared {2}")]
    InconsistentTuple(String, i64, i64),
}

/// A formal sum `sum c_i q^{e_i}` with `0 <= e_i < cutoff`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NovikovSeries {
    terms: BTreeMap<Rational, i64>,
    cutoff: Rational,
}

impl NovikovSeries {
    pub fn zero(cutoff: Rational) -> Self {
        NovikovSeries { terms: BTreeMap::new(), cutoff }
    }

    /// `c q^e`, or zero when `e` is at or past the cutoff.
    pub fn monomial(exp: Rational, coeff: i64, cutoff: Rational) -> Self {
        assert!(!exp.is_negative(), "negative Novikov exponent");
        let mut s = NovikovSeries::zero(cutoff);
        s.add_term(exp, coeff);
        s
    }

    pub fn cutoff(&self) -> &Rational {
        &self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &i64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &Rational) -> i64 {
        self.terms.get(exp).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Rational, coeff: i64) {
        if coeff == 0 || exp >= self.cutoff {
            return;
        }
        let total = self.coeff(&exp) + coeff;
        if total == 0 {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, total);
        }
    }

    fn check(&self, other: &Self) -> Result<(), TensorError> {
        if self.cutoff != other.cutoff {
            return Err(TensorError::CutoffMismatch(rat::show(&self.cutoff), rat::show(&other.cutoff)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, TensorError> {
        self.check(other)?;
        let mut out = NovikovSeries::zero(self.cutoff.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = NovikovSeries::zero(self.cutoff.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.terms.iter().map(|(e, c)| serde_json::json!({"exp": rat::show(e), "coeff": c})).collect())
    }
}

impl fmt::Display for NovikovSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{}q^{}", c, rat::show(e))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A basis element of one slot. `key` identifies it, `dual` is the key of the
/// generator it pairs with, `degree` is its degree in V.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GradedGenerator {
    pub key: String,
    pub dual: String,
    pub degree: i64,
}

impl GradedGenerator {
    pub fn new(key: impl Into<String>, dual: impl Into<String>, degree: i64) -> Self {
        GradedGenerator { key: key.into(), dual: dual.into(), degree }
    }
}

/// Which degree enters the Koszul signs. `Plain` uses `deg v`; `Shifted`
/// uses `1 - deg v`, the degree each factor carries once a tensor of `n`
/// factors sits in degree `n - sum deg v_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Grading {
    Plain,
    Shifted,
}

impl Grading {
    pub fn koszul(self, g: &GradedGenerator) -> i64 {
        match self {
            Grading::Plain => g.degree,
            Grading::Shifted => 1 - g.degree,
        }
    }
}

/// The pairing `B(p, p*) = (-1)^{|p|}` of degree one.
#[derive(Clone, Copy, Debug, Default)]
pub struct PairingB;

impl PairingB {
    pub const DEGREE: i64 = 1;

    pub fn value(&self, p: &GradedGenerator, q: &GradedGenerator) -> i64 {
        if p.dual == q.key && q.dual == p.key && p.degree + q.degree == Self::DEGREE {
            if p.degree.rem_euclid(2) == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }
}

/// A tensor in `V^{(x) n}` with one basis list per slot and integer Novikov
/// coefficients indexed by tuples of basis positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor {
    pub slots: Vec<Vec<GradedGenerator>>,
    pub coeffs: BTreeMap<Vec<usize>, NovikovSeries>,
    pub declared_degree: i64,
    pub cutoff: Rational,
    pub grading: Grading,
}

impl Tensor {
    pub fn new(slots: Vec<Vec<GradedGenerator>>, declared_degree: i64, cutoff: Rational, grading: Grading) -> Self {
        Tensor { slots, coeffs: BTreeMap::new(), declared_degree, cutoff, grading }
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn entry(&self, tuple: &[usize]) -> Vec<&GradedGenerator> {
        tuple.iter().enumerate().map(|(s, &i)| &self.slots[s][i]).collect()
    }

    /// Adds `series` to the coefficient of `tuple`, dropping zeros.
    pub fn add(&mut self, tuple: Vec<usize>, series: &NovikovSeries) {
        let merged = match self.coeffs.remove(&tuple) {
            Some(old) => old.add(series).expect("cutoff checked at construction"),
            None => series.clone(),
        };
        if !merged.is_zero() {
            self.coeffs.insert(tuple, merged);
        }
    }

    pub fn coeff(&self, tuple: &[usize]) -> NovikovSeries {
        self.coeffs.get(tuple).cloned().unwrap_or_else(|| NovikovSeries::zero(self.cutoff.clone()))
    }

    /// Position of the generator with `key` in slot `s`.
    pub fn position(&self, s: usize, key: &str) -> Option<usize> {
        self.slots[s].iter().position(|g| g.key == key)
    }

    /// The same tensor with its slots reordered: slot `i` of the result is
    /// slot `order[i]` of `self`. Coefficients pick up the Koszul sign of the
    /// reordering.
    pub fn permute_slots(&self, order: &[usize]) -> Tensor {
        let mut out =
            Tensor::new(order.iter().map(|&i| self.slots[i].clone()).collect(), self.declared_degree, self.cutoff.clone(), self.grading);
        for (t, c) in &self.coeffs {
            let degs: Vec<i64> = t.iter().enumerate().map(|(s, &i)| self.grading.koszul(&self.slots[s][i])).collect();
            let sign = koszul_sign_oracle(&degs, order);
            out.add(order.iter().map(|&i| t[i]).collect(), &c.scale(sign as i64));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|(t, s)| {
                    let ids: Vec<String> = self.entry(t).iter().map(|g| g.key.clone()).collect();
                    serde_json::json!({"tuple": ids, "series": s.to_json()})
                })
                .collect(),
        )
    }
}

/// Sign of rearranging a graded word: `perm[i]` is the old position of the
/// symbol that ends up at position `i`. Realized by adjacent transpositions
/// (bubble sort), each contributing `(-1)^{|x||y|}`.
pub fn koszul_sign_oracle(degrees: &[i64], perm: &[usize]) -> i32 {
    assert_eq!(degrees.len(), perm.len());
    // current[i] = old index of the symbol now at position i
    let mut current: Vec<usize> = (0..perm.len()).collect();
    let mut target_pos = vec![0usize; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        target_pos[p] = i;
    }
    let mut sign = 1;
    loop {
        let mut swapped = false;
        for i in 0..current.len().saturating_sub(1) {
            if target_pos[current[i]] > target_pos[current[i + 1]] {
                if (degrees[current[i]] * degrees[current[i + 1]]).rem_euclid(2) == 1 {
                    sign = -sign;
                }
                current.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    sign
}

/// Exponent of the insertion sign for `v` into `w` at slots `alpha`, `beta`
/// (0-based), given the degrees of the factors:
/// `|v_a| sum_{i>a}|v_i| + sum_{j<b}|w_j|(|w|-|w_j|) + |B|(|v|-|v_a|)
///  + sum_{l<b}|w_l|(|v|+|w|-|v_a|-|w_b|-|w_l|)`.
pub fn pair_sign_exponent(v: &[i64], w: &[i64], alpha: usize, beta: usize) -> i64 {
    let sv: i64 = v.iter().sum();
    let sw: i64 = w.iter().sum();
    let a = v[alpha];
    let c = w[beta];
    let after: i64 = v[alpha + 1..].iter().sum();
    let mut e = a * after;
    for &wj in &w[..beta] {
        e += wj * (sw - wj);
    }
    e += PairingB::DEGREE * (sv - a);
    for &wl in &w[..beta] {
        e += wl * (sv + sw - a - c - wl);
    }
    e
}

/// Exponent of the self-contraction sign at slots `alpha < beta` (0-based):
/// `|v_a| sum_{a<i<b}|v_i| + |B|(sum_{j<b}|v_j| - |v_a|)`.
pub fn loop_sign_exponent(v: &[i64], alpha: usize, beta: usize) -> i64 {
    let a = v[alpha];
    let between: i64 = v[alpha + 1..beta].iter().sum();
    let before: i64 = v[..beta].iter().sum();
    a * between + PairingB::DEGREE * (before - a)
}

fn parity_sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn dual_slots(x: &[GradedGenerator], y: &[GradedGenerator]) -> bool {
    let xs: BTreeSet<&str> = x.iter().map(|g| g.dual.as_str()).collect();
    let ys: BTreeSet<&str> = y.iter().map(|g| g.key.as_str()).collect();
    xs == ys
}

/// Inserts `v` into `w` by pairing slot `alpha` of `v` with slot `beta` of
/// `w`. The result has slots `w_1..w_{beta-1}, v without alpha, w_{beta+1}..`.
pub fn contract_pair(v: &Tensor, w: &Tensor, alpha: usize, beta: usize) -> Result<Tensor, TensorError> {
    if alpha >= v.arity() {
        return Err(TensorError::BadSlot(alpha, v.arity()));
    }
    if beta >= w.arity() {
        return Err(TensorError::BadSlot(beta, w.arity()));
    }
    if v.cutoff != w.cutoff {
        return Err(TensorError::CutoffMismatch(rat::show(&v.cutoff), rat::show(&w.cutoff)));
    }
    if v.grading != w.grading {
        return Err(TensorError::GradingMismatch);
    }
    if !dual_slots(&v.slots[alpha], &w.slots[beta]) {
        return Err(TensorError::NotDual(alpha, beta));
    }
    let mut slots: Vec<Vec<GradedGenerator>> = w.slots[..beta].to_vec();
    slots.extend(v.slots.iter().enumerate().filter(|(i, _)| *i != alpha).map(|(_, s)| s.clone()));
    slots.extend(w.slots[beta + 1..].iter().cloned());
    let mut out = Tensor::new(slots, v.declared_degree + w.declared_degree - PairingB::DEGREE, v.cutoff.clone(), v.grading);

    let mut by_beta: HashMap<&str, Vec<(&Vec<usize>, &NovikovSeries)>> = HashMap::new();
    for (tw, cw) in &w.coeffs {
        by_beta.entry(w.slots[beta][tw[beta]].key.as_str()).or_default().push((tw, cw));
    }
    let g = v.grading;
    for (tv, cv) in &v.coeffs {
        let p = &v.slots[alpha][tv[alpha]];
        let Some(partners) = by_beta.get(p.dual.as_str()) else {
            continue;
        };
        let vdeg: Vec<i64> = tv.iter().enumerate().map(|(s, &i)| g.koszul(&v.slots[s][i])).collect();
        for (tw, cw) in partners {
            let q = &w.slots[beta][tw[beta]];
            let b = PairingB.value(p, q);
            if b == 0 {
                continue;
            }
            let wdeg: Vec<i64> = tw.iter().enumerate().map(|(s, &i)| g.koszul(&w.slots[s][i])).collect();
            let sign = parity_sign(pair_sign_exponent(&vdeg, &wdeg, alpha, beta)) * b;
            let mut t: Vec<usize> = tw[..beta].to_vec();
            t.extend(tv.iter().enumerate().filter(|(i, _)| *i != alpha).map(|(_, &x)| x));
            t.extend(tw[beta + 1..].iter().copied());
            let prod = cv.mul(cw)?.scale(sign);
            out.add(t, &prod);
        }
    }
    Ok(out)
}

/// Self-contraction of slots `alpha < beta` of `v`.
pub fn contract_loop(v: &Tensor, alpha: usize, beta: usize) -> Result<Tensor, TensorError> {
    if alpha == beta {
        return Err(TensorError::SameSlot(alpha, beta));
    }
    let (alpha, beta) = (alpha.min(beta), alpha.max(beta));
    if beta >= v.arity() {
        return Err(TensorError::BadSlot(beta, v.arity()));
    }
    if !dual_slots(&v.slots[alpha], &v.slots[beta]) {
        return Err(TensorError::NotDual(alpha, beta));
    }
    let keep: Vec<usize> = (0..v.arity()).filter(|&i| i != alpha && i != beta).collect();
    let mut out =
        Tensor::new(keep.iter().map(|&i| v.slots[i].clone()).collect(), v.declared_degree - PairingB::DEGREE, v.cutoff.clone(), v.grading);
    let g = v.grading;
    for (t, c) in &v.coeffs {
        let p = &v.slots[alpha][t[alpha]];
        let q = &v.slots[beta][t[beta]];
        let b = PairingB.value(p, q);
        if b == 0 {
            continue;
        }
        let degs: Vec<i64> = t.iter().enumerate().map(|(s, &i)| g.koszul(&v.slots[s][i])).collect();
        let sign = parity_sign(loop_sign_exponent(&degs, alpha, beta)) * b;
        out.add(keep.iter().map(|&i| t[i]).collect(), &c.scale(sign));
    }
    Ok(out)
}

/// Declared degree, after checking `n - sum deg = declared` on every tuple.
pub fn tensor_degree(v: &Tensor) -> Result<i64, TensorError> {
    for t in v.coeffs.keys() {
        let n = t.len() as i64;
        let s: i64 = v.entry(t).iter().map(|g| g.degree).sum();
        if n - s != v.declared_degree {
            let ids: Vec<String> = v.entry(t).iter().map(|g| g.key.clone()).collect();
            return Err(TensorError::InconsistentTuple(ids.join(","), n - s, v.declared_degree));
        }
    }
    Ok(v.declared_degree)
}
