//! Product tensors assembled from rigid tropical counts, and checkers for the
//! A-infinity relation (disks) and the quantum relation (annuli).
//!
//! A tensor has one slot per boundary corner, in slot order, and its
//! coefficient on a tuple of intersection points is the signed q-series of
//! rigid tropical graphs with those corners. Relations are evaluated with the
//! contraction maps of [`crate::graded_tensor`]; their certificates follow
//! every one-dimensional family from a contributing term to its partner.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::base_geometry::{self, intersection_points, GeometryError, Lagrangian};
use crate::exec::{self, Mode};
use crate::graded_tensor::{self, GradedGenerator, Grading, NovikovSeries, PairingB, Tensor, TensorError};
use crate::perm_operad::{self, Letter, Perm, PermError, Preimage, Shape, StGenerator};
use crate::rat::{self, int, Rational};
use crate::tropical_moduli::{
    enumerate_types, glue_pair, glue_self, rigid_solutions, walk_family, Boundary, Corner, FamilyStart, FamilyWalk, Piece, PieceKey,
    RigidOptions, RigidSolution, Slot, TropicalError,
};

#[derive(Debug, Error)]
pub enum FukayaError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tropical(#[from] TropicalError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("bad request: {0}")]
    Request(String),
}

/// How a rigid graph is signed in the product tensors. `Unit` counts every
/// rigid polygon with `+1`; `Surface` uses [`crate::tropical_moduli::surface_sign`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SignConvention {
    #[default]
    Unit,
    Surface,
}

impl SignConvention {
    fn of(self, s: &RigidSolution) -> i64 {
        match self {
            SignConvention::Unit => 1,
            SignConvention::Surface => s.sign as i64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub q: Rational,
    pub convention: SignConvention,
    pub grading: Grading,
    pub mode: Mode,
}

impl Settings {
    pub fn new(q: Rational) -> Self {
        Settings { q, convention: SignConvention::Unit, grading: Grading::Shifted, mode: Mode::Auto }
    }
}

/// Lagrangian chains, one per boundary circle; `cycles[c]` lists the slots
/// (0-based) of circle `c` in boundary order, and slot `cycles[c][j]` is a
/// corner from `chains[c][j]` to `chains[c][j + 1]`.
#[derive(Clone, Debug)]
pub struct ProductRequest {
    pub d: i64,
    pub chains: Vec<Vec<Lagrangian>>,
    pub cycles: Vec<Vec<usize>>,
    pub settings: Settings,
}

impl ProductRequest {
    /// One disk with slots `0..chain.len()` in order.
    pub fn disk(d: i64, chain: Vec<Lagrangian>, settings: Settings) -> Self {
        let n = chain.len();
        ProductRequest { d, chains: vec![chain], cycles: vec![(0..n).collect()], settings }
    }

    pub fn b(&self) -> u32 {
        self.cycles.len().saturating_sub(1) as u32
    }

    pub fn boundary(&self) -> Result<Boundary, FukayaError> {
        if self.chains.len() != self.cycles.len() || self.chains.is_empty() {
            return Err(FukayaError::Request("one Lagrangian chain per boundary circle is required".into()));
        }
        let n: usize = self.cycles.iter().map(Vec::len).sum();
        let mut lags: Vec<Lagrangian> = Vec::new();
        let index = |l: &Lagrangian, lags: &mut Vec<Lagrangian>| match lags.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                lags.push(l.clone());
                lags.len() - 1
            }
        };
        let mut slots = vec![None; n];
        let mut next = vec![usize::MAX; n];
        for (chain, cyc) in self.chains.iter().zip(&self.cycles) {
            if chain.len() != cyc.len() {
                return Err(FukayaError::Request("chain length differs from its cycle".into()));
            }
            let k = cyc.len();
            for j in 0..k {
                let s = *cyc.get(j).filter(|&&s| s < n).ok_or_else(|| FukayaError::Request("slot out of range".into()))?;
                if slots[s].is_some() {
                    return Err(FukayaError::Request(format!("slot {} appears twice", s + 1)));
                }
                let source = index(&chain[j], &mut lags);
                let target = index(&chain[(j + 1) % k], &mut lags);
                slots[s] = Some(Slot { source, target });
                next[s] = cyc[(j + 1) % k];
            }
        }
        let slots: Vec<Slot> = slots.into_iter().collect::<Option<_>>().ok_or_else(|| FukayaError::Request("a slot is missing".into()))?;
        Ok(Boundary::new(self.d, lags, slots, next)?)
    }

    fn check_transversal(&self) -> Result<(), FukayaError> {
        let mut ls: Vec<Lagrangian> = self.chains.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        ls.sort_by(|a, b| a.offset.cmp(&b.offset).then(a.slope.cmp(&b.slope)));
        if ls.len() < 2 {
            return Ok(());
        }
        let t = base_geometry::is_transversal(&ls, self.d)?;
        if !t.transversal {
            return Err(FukayaError::Request(format!("not transversal: {}", t.diagnostic.unwrap_or_default())));
        }
        Ok(())
    }
}

fn lag_name(l: &Lagrangian) -> String {
    l.to_string()
}

/// Generators of one slot with their corner data. Distinct Lagrangians give
/// their intersection points; a corner from a Lagrangian to itself carries
/// the unit (degree 0) and the point class (degree 1), both over base 0.
pub fn slot_basis(boundary: &Boundary, slot: usize) -> Vec<(GradedGenerator, Corner)> {
    let Slot { source, target } = boundary.slots[slot];
    let (a, b) = (&boundary.lagrangians[source], &boundary.lagrangians[target]);
    let (na, nb) = (lag_name(a), lag_name(b));
    if a == b {
        let base = crate::base_geometry::CirclePoint::new(Rational::from_integer(0.into()), boundary.d);
        let unit = format!("{na}>{nb}@0#unit");
        let point = format!("{na}>{nb}@0#point");
        return vec![
            (GradedGenerator::new(unit.clone(), point.clone(), 0), Corner { base: base.clone(), degree: 0 }),
            (GradedGenerator::new(point, unit, 1), Corner { base, degree: 1 }),
        ];
    }
    intersection_points(a, b, boundary.d)
        .into_iter()
        .map(|p| {
            let y = rat::show(p.base.value());
            let g = GradedGenerator::new(format!("{na}>{nb}@{y}"), format!("{nb}>{na}@{y}"), p.degree as i64);
            (g, Corner { base: p.base, degree: p.degree })
        })
        .collect()
}

/// A product tensor with the rigid solutions behind each coefficient.
#[derive(Clone, Debug)]
pub struct MuTensor {
    pub tensor: Tensor,
    pub boundary: Boundary,
    pub b: u32,
    pub solutions: BTreeMap<Vec<usize>, Vec<RigidSolution>>,
    /// Tuples whose degree sum admits rigid solutions.
    pub admissible: usize,
    /// Set when the moduli are empty for a structural reason.
    pub empty_reason: Option<String>,
}

impl MuTensor {
    pub fn solution_count(&self) -> usize {
        self.solutions.values().map(Vec::len).sum()
    }
}

pub fn assemble_mu(req: &ProductRequest) -> Result<MuTensor, FukayaError> {
    req.check_transversal()?;
    let boundary = req.boundary()?;
    assemble_boundary(&boundary, &req.settings)
}

/// [`assemble_mu`] for an explicit boundary.
pub fn assemble_boundary(boundary: &Boundary, st: &Settings) -> Result<MuTensor, FukayaError> {
    let n = boundary.len();
    let b = boundary.loops();
    let bases: Vec<Vec<(GradedGenerator, Corner)>> = (0..n).map(|s| slot_basis(boundary, s)).collect();
    let declared = 2 - 2 * b as i64;
    let mut tensor =
        Tensor::new(bases.iter().map(|v| v.iter().map(|(g, _)| g.clone()).collect()).collect(), declared, st.q.clone(), st.grading);
    let want = n as i64 - 2 + 2 * b as i64;
    let tuples: Vec<Vec<usize>> = bases
        .iter()
        .map(|v| 0..v.len())
        .multi_cartesian_product()
        .filter(|t| t.iter().enumerate().map(|(s, &i)| bases[s][i].1.degree as i64).sum::<i64>() == want)
        .collect();
    let mut out = MuTensor {
        tensor: tensor.clone(),
        boundary: boundary.clone(),
        b,
        solutions: BTreeMap::new(),
        admissible: tuples.len(),
        empty_reason: None,
    };
    if tuples.is_empty() {
        out.empty_reason = Some(format!("no corner tuple has degree sum {want}"));
        return Ok(out);
    }
    match enumerate_types(boundary) {
        Err(TropicalError::Boundary(m)) if m.contains("label is zero") => {
            out.empty_reason = Some("every corner joins a Lagrangian to itself".into());
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
        Ok(_) => {}
    }
    let opts = RigidOptions { q: st.q.clone(), extent: None, mode: Mode::Sequential };
    let found = exec::map(st.mode, &tuples, |t| {
        let corners: Vec<Corner> = t.iter().enumerate().map(|(s, &i)| bases[s][i].1.clone()).collect();
        rigid_solutions(boundary, &corners, &opts).map(|v| (t.clone(), v))
    });
    for r in found {
        let (t, sols) = r?;
        if sols.is_empty() {
            continue;
        }
        let mut series = NovikovSeries::zero(st.q.clone());
        for s in &sols {
            series.add_term(s.area.clone(), st.convention.of(s));
        }
        tensor.add(t.clone(), &series);
        out.solutions.insert(t, sols);
    }
    out.tensor = tensor;
    Ok(out)
}

/// A multilinear map `m_{n-1}`: inputs are generators of slots `1..n-1`
/// (the duals of the tensor's corners), the value is a combination of
/// generators of the last slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multilinear {
    pub inputs: Vec<Vec<GradedGenerator>>,
    pub outputs: Vec<GradedGenerator>,
    pub values: BTreeMap<Vec<usize>, Vec<(usize, NovikovSeries)>>,
    pub cutoff: Rational,
}

/// `m(q_1, ..., q_{n-1}) = sum prod B(p_i, q_i) p_n` over the coefficients
/// of a disk tensor.
pub fn as_multilinear(t: &MuTensor) -> Result<Multilinear, FukayaError> {
    if t.b != 0 {
        return Err(FukayaError::Request("only disk tensors define multilinear maps".into()));
    }
    multilinear_of(&t.tensor)
}

pub fn multilinear_of(t: &Tensor) -> Result<Multilinear, FukayaError> {
    let n = t.arity();
    if n == 0 {
        return Err(FukayaError::Request("empty tensor".into()));
    }
    let inputs: Vec<Vec<GradedGenerator>> = t.slots[..n - 1]
        .iter()
        .map(|s| s.iter().map(|g| GradedGenerator::new(g.dual.clone(), g.key.clone(), 1 - g.degree)).collect())
        .collect();
    let mut values: BTreeMap<Vec<usize>, Vec<(usize, NovikovSeries)>> = BTreeMap::new();
    for (tuple, c) in &t.coeffs {
        let mut sign = 1;
        for s in 0..n - 1 {
            sign *= PairingB.value(&t.slots[s][tuple[s]], &inputs[s][tuple[s]]);
        }
        values.entry(tuple[..n - 1].to_vec()).or_default().push((tuple[n - 1], c.scale(sign)));
    }
    Ok(Multilinear { inputs, outputs: t.slots[n - 1].clone(), values, cutoff: t.cutoff.clone() })
}

/// Inverse of [`multilinear_of`].
pub fn tensor_of(m: &Multilinear, declared: i64, grading: Grading) -> Tensor {
    let mut slots: Vec<Vec<GradedGenerator>> =
        m.inputs.iter().map(|s| s.iter().map(|g| GradedGenerator::new(g.dual.clone(), g.key.clone(), 1 - g.degree)).collect()).collect();
    slots.push(m.outputs.clone());
    let mut t = Tensor::new(slots, declared, m.cutoff.clone(), grading);
    for (ins, outs) in &m.values {
        let mut sign = 1;
        for (s, &i) in ins.iter().enumerate() {
            sign *= PairingB.value(&t.slots[s][i], &m.inputs[s][i]);
        }
        for (o, c) in outs {
            let mut tuple = ins.clone();
            tuple.push(*o);
            t.add(tuple, &c.scale(sign));
        }
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub tuple: Vec<String>,
    pub series: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// One contributing term of a relation: a composition of rigid solutions.
#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub part: String,
    pub tuple: Vec<String>,
    #[serde(with = "crate::rat::as_str")]
    pub area: Rational,
    /// Signed coefficient after contraction.
    pub sign: i64,
    /// Product of surface signs of the pieces.
    pub surface_sign: i32,
    #[serde(skip)]
    key: Vec<PieceKey>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Pair {
    pub left: usize,
    pub right: usize,
    pub area: String,
    pub signs: (i64, i64),
    pub surface_signs: (i32, i32),
    pub walls: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub residuals: Vec<Residual>,
    pub terms: Vec<Term>,
    pub pairs: Vec<Pair>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub verdict: String,
}

impl RelationReport {
    fn new(relation: impl Into<String>) -> Self {
        RelationReport {
            relation: relation.into(),
            residuals: Vec::new(),
            terms: Vec::new(),
            pairs: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            verdict: String::new(),
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    fn finish(mut self) -> Self {
        let ok = self.checks.iter().all(|c| c.pass);
        self.verdict = if ok { "pass" } else { "fail" }.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn check_passed(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn residuals_of(t: &Tensor) -> Vec<Residual> {
    t.coeffs
        .iter()
        .map(|(tuple, s)| Residual { tuple: t.entry(tuple).iter().map(|g| g.key.clone()).collect(), series: s.to_json() })
        .collect()
}

/// Sum of tensors over identical slot bases.
pub fn tensor_sum(parts: &[&Tensor]) -> Result<Tensor, FukayaError> {
    let first = parts.first().ok_or_else(|| FukayaError::Request("empty sum".into()))?;
    let mut out = Tensor::new(first.slots.clone(), first.declared_degree, first.cutoff.clone(), first.grading);
    for p in parts {
        if p.slots != first.slots {
            return Err(FukayaError::Request("summands have different slot bases".into()));
        }
        for (t, c) in &p.coeffs {
            out.add(t.clone(), c);
        }
    }
    Ok(out)
}

fn negate(t: &Tensor) -> Tensor {
    let mut out = t.clone();
    for c in out.coeffs.values_mut() {
        *c = c.scale(-1);
    }
    out
}

fn single(t: &Tensor, tuple: &[usize], s: &RigidSolution, conv: SignConvention) -> Tensor {
    let mut one = Tensor::new(t.slots.clone(), t.declared_degree, t.cutoff.clone(), t.grading);
    one.add(tuple.to_vec(), &NovikovSeries::monomial(s.area.clone(), conv.of(s), t.cutoff.clone()));
    one
}

fn only_coeff(t: &Tensor) -> Option<(Vec<usize>, Rational, i64)> {
    let (tuple, s) = t.coeffs.iter().next()?;
    let (e, c) = s.terms().next()?;
    Some((tuple.clone(), e.clone(), *c))
}

/// A composition term together with the data to start its family walk.
struct PendingTerm {
    term: Term,
    start: Result<FamilyStart, TropicalError>,
}

/// Walks every term's family, matches its far end with another term and
/// records the pairs. Returns whether the matching is perfect with equal
/// areas and cancelling signs, plus the walks themselves.
fn pair_terms(report: &mut RelationReport, pending: Vec<PendingTerm>, mode: Mode) -> (bool, Vec<Option<FamilyWalk>>) {
    let walks: Vec<Result<FamilyWalk, TropicalError>> = exec::map(mode, &pending, |p| match &p.start {
        Ok(s) => walk_family(s),
        Err(e) => Err(TropicalError::Walk(e.to_string())),
    });
    let terms: Vec<Term> = pending.into_iter().map(|p| p.term).collect();
    let mut index: BTreeMap<Vec<PieceKey>, usize> = BTreeMap::new();
    let mut ok = true;
    for (i, t) in terms.iter().enumerate() {
        if index.insert(t.key.clone(), i).is_some() {
            report.notes.push(format!("terms share the key of term {i}"));
            ok = false;
        }
    }
    let mut partner = vec![None; terms.len()];
    for (i, w) in walks.iter().enumerate() {
        match w {
            Ok(w) => {
                if w.start.keys() != terms[i].key {
                    report.notes.push(format!("term {i}: walk does not start at the term"));
                    ok = false;
                }
                match index.get(&w.end.keys()) {
                    Some(&j) => partner[i] = Some(j),
                    None => {
                        report.notes.push(format!("term {i}: family ends outside the relation"));
                        ok = false;
                    }
                }
            }
            Err(e) => {
                report.notes.push(format!("term {i}: {e}"));
                ok = false;
            }
        }
    }
    for (i, p) in partner.iter().enumerate() {
        let Some(j) = *p else { continue };
        if j == i || partner[j] != Some(i) {
            report.notes.push(format!("term {i}: partner {j} is not mutual"));
            ok = false;
            continue;
        }
        if i < j {
            let (a, b) = (&terms[i], &terms[j]);
            if a.area != b.area || a.sign + b.sign != 0 {
                ok = false;
            }
            report.pairs.push(Pair {
                left: i,
                right: j,
                area: rat::show(&a.area),
                signs: (a.sign, b.sign),
                surface_signs: (a.surface_sign, b.surface_sign),
                walls: walks[i].as_ref().map(|w| w.walls.len()).unwrap_or(0),
            });
        }
    }
    report.terms = terms;
    (ok, walks.into_iter().map(Result::ok).collect())
}

/// Checks `mu(mu(x0, x1), x2, x3) + mu(x0, mu(x1, x2), x3)`-type cancellation
/// for the chain `(K0, K1, K2, K3)`: the two insertions of a triangle into a
/// triangle, summed with the signs of [`graded_tensor::contract_pair`].
pub fn verify_a_infinity(d: i64, chain: &[Lagrangian], st: &Settings, certificate: bool) -> Result<RelationReport, FukayaError> {
    if chain.len() != 4 {
        return Err(FukayaError::Request(format!("a chain of 4 Lagrangians is required, got {}", chain.len())));
    }
    let k = |ix: [usize; 3]| ProductRequest::disk(d, ix.iter().map(|&i| chain[i].clone()).collect(), st.clone());
    let whole = ProductRequest::disk(d, chain.to_vec(), st.clone());
    whole.check_transversal()?;
    let target = whole.boundary()?;
    let m012 = assemble_mu(&k([0, 1, 2]))?;
    let m023 = assemble_mu(&k([0, 2, 3]))?;
    let m123 = assemble_mu(&k([1, 2, 3]))?;
    let m013 = assemble_mu(&k([0, 1, 3]))?;
    // (01, 12 | 20) into (02 | 23, 30), and (12, 23 | 31) into (01, 13 | 30)
    let t1 = graded_tensor::contract_pair(&m012.tensor, &m023.tensor, 2, 0)?;
    let t2 = graded_tensor::contract_pair(&m123.tensor, &m013.tensor, 2, 1)?;
    let residual = tensor_sum(&[&t1, &t2])?;
    let mutated = tensor_sum(&[&t1, &negate(&t2)])?;
    let mut report = RelationReport::new("a_infinity");
    report.residuals = residuals_of(&residual);
    report.check("residual_zero", residual.is_zero(), format!("{} nonzero tuples", residual.coeffs.len()));
    let vacuous = t1.is_zero() && t2.is_zero();
    report.check(
        "mutation_detected",
        vacuous || !mutated.is_zero(),
        if vacuous {
            "both insertions vanish; mutation test is vacuous".to_string()
        } else {
            format!("{} tuples differ after flipping one insertion", mutated.coeffs.len())
        },
    );
    report.notes.push(format!("insertion terms: {} and {} nonzero tuples", t1.coeffs.len(), t2.coeffs.len()));
    if certificate {
        let mut pending = Vec::new();
        let maps1 = ([Some(0), Some(1), None], [None, Some(2), Some(3)]);
        let maps2 = ([Some(1), Some(2), None], [Some(0), None, Some(3)]);
        for (part, v, w, alpha, beta, (va, wa)) in [("first", &m012, &m023, 2, 0, maps1), ("second", &m123, &m013, 2, 1, maps2)] {
            for (tv, sv) in &v.solutions {
                for (tw, sw) in &w.solutions {
                    if PairingB.value(&v.tensor.slots[alpha][tv[alpha]], &w.tensor.slots[beta][tw[beta]]) == 0 {
                        continue;
                    }
                    for a in sv {
                        for b in sw {
                            if &a.area + &b.area >= st.q {
                                continue;
                            }
                            let c = graded_tensor::contract_pair(
                                &single(&v.tensor, tv, a, st.convention),
                                &single(&w.tensor, tw, b, st.convention),
                                alpha,
                                beta,
                            )?;
                            let Some((tuple, area, sign)) = only_coeff(&c) else {
                                continue;
                            };
                            let mut key = vec![Piece::from_rigid(a).key(), Piece::from_rigid(b).key()];
                            key.sort();
                            let term = Term {
                                part: part.into(),
                                tuple: c.entry(&tuple).iter().map(|g| g.key.clone()).collect(),
                                area,
                                sign,
                                surface_sign: a.sign * b.sign,
                                key,
                            };
                            let start = glue_pair(&target, a, alpha, &va, b, beta, &wa);
                            pending.push(PendingTerm { term, start });
                        }
                    }
                }
            }
        }
        let count = pending.len();
        let (ok, walks) = pair_terms(&mut report, pending, st.mode);
        report.check("certificate", ok && report.pairs.len() * 2 == count, format!("{} terms in {} pairs", count, report.pairs.len()));
        let crossing = report.pairs.iter().all(|p| report.terms[p.left].part != report.terms[p.right].part);
        report.check("endpoints_in_distinct_terms", crossing, "each family joins the two insertions");
        let walls: usize = walks.iter().flatten().map(|w| w.walls.len()).sum();
        report.notes.push(format!("{walls} walls crossed in total"));
    }
    Ok(report.finish())
}

/// The cyclic generator of a boundary, with slot `s` as letter `s + 1`.
pub fn boundary_generator(b: &Boundary) -> StGenerator {
    let cycles: Vec<Vec<Letter>> = b.cycles().iter().map(|c| c.iter().map(|&s| Letter::Num(s as u32 + 1)).collect()).collect();
    StGenerator { perm: Perm::from_cycles(&cycles).expect("cycles are disjoint"), g: 0 }
}

/// Corner of a letter: slots keep their Lagrangians, an auxiliary letter
/// joins its neighbours (or, alone on its circle, dualizes its partner).
fn aux_slot(perm: &Perm, base: &Boundary, aux: Letter, partner: Option<(&Perm, Letter)>) -> Option<Slot> {
    let slot_of = |l: Letter| match l {
        Letter::Num(k) => Some(base.slots[k as usize - 1]),
        _ => None,
    };
    let next = perm.apply(aux);
    if next != aux {
        let prev = perm.cycles().into_iter().find(|c| c.contains(&aux)).and_then(|c| {
            let i = c.iter().position(|&x| x == aux)?;
            Some(c[(i + c.len() - 1) % c.len()])
        })?;
        return Some(Slot { source: slot_of(prev)?.target, target: slot_of(next)?.source });
    }
    let (p, other) = partner?;
    let s = aux_slot(p, base, other, None)?;
    Some(Slot { source: s.target, target: s.source })
}

/// Boundary of a generator whose numbered letters are slots of `base`.
/// Slots are listed as `order` gives them.
fn boundary_of(perm: &Perm, base: &Boundary, order: &[Letter], partner: Option<(&Perm, Letter)>) -> Option<Boundary> {
    let mut slots = Vec::new();
    for &l in order {
        slots.push(match l {
            Letter::Num(k) => base.slots[k as usize - 1],
            aux => aux_slot(perm, base, aux, partner)?,
        });
    }
    let pos = |l: Letter| order.iter().position(|&x| x == l).unwrap();
    let next = order.iter().map(|&l| pos(perm.apply(l))).collect();
    Boundary::new(base.d, base.lagrangians.clone(), slots, next).ok()
}

fn letter_order(perm: &Perm) -> Vec<Letter> {
    perm.ground().into_iter().collect()
}

/// Checks the quantum relation for an annulus boundary: (A) the annulus
/// tensor vanishes, (B) the self-contraction of the disk tensors with the
/// interleaved boundary vanishes, with a pairing certificate from the
/// annulus families, and (C) every disk-and-annulus composition has empty
/// moduli.
pub fn verify_quantum(req: &ProductRequest) -> Result<RelationReport, FukayaError> {
    if req.cycles.len() != 2 {
        return Err(FukayaError::Request("the quantum relation needs exactly two boundary circles".into()));
    }
    req.check_transversal()?;
    let st = &req.settings;
    let target = req.boundary()?;
    let n = target.len();
    let gen = boundary_generator(&target);
    let mut report = RelationReport::new("quantum");

    // (A)
    let mu = assemble_boundary(&target, st)?;
    let detail = match &mu.empty_reason {
        Some(r) => format!("empty: {r}"),
        None => format!("{} admissible tuples, {} rigid annuli", mu.admissible, mu.solution_count()),
    };
    report.check("A_annulus_tensor_zero", mu.tensor.is_zero(), detail);
    report.residuals.extend(residuals_of(&mu.tensor));

    // (B)
    let natural: Vec<Letter> = (1..=n as u32).map(Letter::Num).collect();
    let mut loop_parts = Vec::new();
    let mut pending = Vec::new();
    for p in perm_operad::feynman_preimages(&gen, &Shape::Loop, st.mode) {
        let Preimage::Loop(s) = p.preimage else {
            continue;
        };
        // read the interleaved circle from its smallest letter, as disk
        // tensors are read from their first slot
        let first = *s.perm.ground().iter().next().expect("nonempty");
        let mut order = vec![first];
        let mut x = s.perm.apply(first);
        while x != first {
            order.push(x);
            x = s.perm.apply(x);
        }
        let Some(disk) = boundary_of(&s.perm, &target, &order, None) else {
            report.notes.push(format!("{} has no consistent Lagrangian labelling", s.perm));
            continue;
        };
        let f = order.iter().position(|&l| l == Letter::F).unwrap();
        let fp = order.iter().position(|&l| l == Letter::Fp).unwrap();
        let m = assemble_boundary(&disk, st)?;
        let rest: Vec<Letter> = order.iter().copied().filter(|l| matches!(l, Letter::Num(_))).collect();
        let pi: Vec<usize> = natural.iter().map(|l| rest.iter().position(|x| x == l).unwrap()).collect();
        // relabelling acts with the Koszul sign and the sign of the permutation
        let twist = perm_sign(&pi);
        let push = |t: &Tensor| -> Result<Tensor, FukayaError> {
            let r = graded_tensor::contract_loop(t, f, fp)?.permute_slots(&pi);
            Ok(if twist < 0 { negate(&r) } else { r })
        };
        let reordered = push(&m.tensor)?;
        report.notes.push(format!(
            "{}: {} rigid disks, {} nonzero tuples after contraction",
            s.perm,
            m.solution_count(),
            reordered.coeffs.len()
        ));
        let map: Vec<Option<usize>> = order.iter().map(|l| if let Letter::Num(k) = l { Some(*k as usize - 1) } else { None }).collect();
        for (t, sols) in &m.solutions {
            if PairingB.value(&m.tensor.slots[f][t[f]], &m.tensor.slots[fp][t[fp]]) == 0 {
                continue;
            }
            for sol in sols {
                let one = push(&single(&m.tensor, t, sol, st.convention))?;
                let Some((tuple, area, sign)) = only_coeff(&one) else {
                    continue;
                };
                let term = Term {
                    part: s.perm.to_string(),
                    tuple: one.entry(&tuple).iter().map(|g| g.key.clone()).collect(),
                    area,
                    sign,
                    surface_sign: sol.sign,
                    key: vec![Piece::from_rigid(sol).key()],
                };
                let start = glue_self(&target, sol, f, fp, &map);
                pending.push(PendingTerm { term, start });
            }
        }
        loop_parts.push(reordered);
    }
    let loop_sum = if loop_parts.is_empty() { None } else { Some(tensor_sum(&loop_parts.iter().collect::<Vec<_>>())?) };
    let b_zero = loop_sum.as_ref().is_none_or(|t| t.is_zero());
    if let Some(t) = &loop_sum {
        report.residuals.extend(residuals_of(t));
    }
    report.check("B_loop_term_zero", b_zero, format!("{} interleaved circles", loop_parts.len()));
    let count = pending.len();
    let (ok, walks) = pair_terms(&mut report, pending, st.mode);
    report.check("B_certificate", ok && report.pairs.len() * 2 == count, format!("{} terms in {} pairs", count, report.pairs.len()));

    // degenerations of the annulus families
    let mut deg_ok = true;
    let mut deg_detail = Vec::new();
    for w in walks.iter().flatten() {
        let new_corners = |e: &crate::tropical_moduli::Endpoint| -> Vec<(Slot, u8)> {
            e.pieces
                .iter()
                .flat_map(|p| {
                    p.origin
                        .iter()
                        .enumerate()
                        .filter(|(_, o)| o.is_none())
                        .map(|(i, _)| (p.boundary.slots[i], p.degrees[i]))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let (a, b) = (new_corners(&w.start), new_corners(&w.end));
        let degs_ok = |c: &[(Slot, u8)]| {
            let mut d: Vec<u8> = c.iter().map(|x| x.1).collect();
            d.sort();
            d == [0, 1]
        };
        let one = |c: &[(Slot, u8)]| c.iter().find(|x| x.1 == 1).map(|x| x.0);
        let common = match (one(&a), one(&b)) {
            (Some(p), Some(q)) => [p.source, p.target].iter().any(|l| *l == q.source || *l == q.target),
            _ => false,
        };
        let single_piece = w.start.pieces.len() == 1 && w.end.pieces.len() == 1;
        let area_eq = w.start.area() == w.end.area();
        let this = degs_ok(&a) && degs_ok(&b) && common && single_piece && area_eq;
        if !this {
            deg_detail.push(format!("start {:?} end {:?}", a, b));
        }
        deg_ok &= this;
    }
    let walked = walks.iter().flatten().count();
    report.check(
        "degenerations",
        deg_ok && walked == count,
        if deg_detail.is_empty() {
            format!("{walked} families, each end adds one degree-1 and one degree-0 corner")
        } else {
            deg_detail.join("; ")
        },
    );
    let surface_eq = report.pairs.iter().filter(|p| p.surface_signs.0 == p.surface_signs.1).count();
    report.notes.push(format!("surface signs agree on {surface_eq} of {} pairs", report.pairs.len()));

    // (C)
    let mut c_ok = true;
    let mut c_terms = 0;
    let nums: Vec<u32> = (1..=n as u32).collect();
    for size in 0..=n {
        for left in nums.iter().copied().combinations(size) {
            let left: BTreeSet<u32> = left.into_iter().collect();
            for (lb, rb) in [(0, 1), (1, 0)] {
                let shape = Shape::Edge { left: left.clone(), left_b: lb, right_b: rb };
                for p in perm_operad::feynman_preimages(&gen, &shape, st.mode) {
                    let Preimage::Edge(a, b) = p.preimage else {
                        continue;
                    };
                    c_terms += 1;
                    let (count, why) = edge_term_count(&target, &a, &b, st)?;
                    if count != 0 {
                        c_ok = false;
                    }
                    report.notes.push(format!("{} o {}: {} composed solutions ({})", a, b, count, why));
                }
            }
        }
    }
    report.check("C_mixed_terms_empty", c_ok, format!("{c_terms} compositions"));
    report.notes.push("the overall sign multiplying the annulus tensor is not determined; it does not affect vanishing".into());
    Ok(report.finish())
}

/// Number of pairs of rigid solutions composing into the edge term `a o b`,
/// with a short reason when a factor is empty.
fn edge_term_count(target: &Boundary, a: &StGenerator, b: &StGenerator, st: &Settings) -> Result<(usize, String), FukayaError> {
    let oa = letter_order(&a.perm);
    let ob = letter_order(&b.perm);
    let (Some(ba), Some(bb)) =
        (boundary_of(&a.perm, target, &oa, Some((&b.perm, Letter::Fp))), boundary_of(&b.perm, target, &ob, Some((&a.perm, Letter::F))))
    else {
        return Ok((0, "no consistent Lagrangian labelling".into()));
    };
    let ma = assemble_boundary(&ba, st)?;
    let mb = assemble_boundary(&bb, st)?;
    let why = |m: &MuTensor| m.empty_reason.clone().unwrap_or_else(|| format!("{} rigid", m.solution_count()));
    let fa = oa.iter().position(|&l| l == Letter::F).unwrap();
    let fb = ob.iter().position(|&l| l == Letter::Fp).unwrap();
    let mut count = 0;
    for (ta, sa) in &ma.solutions {
        for (tb, sb) in &mb.solutions {
            if PairingB.value(&ma.tensor.slots[fa][ta[fa]], &mb.tensor.slots[fb][tb[fb]]) == 0 {
                continue;
            }
            count += sa.iter().cartesian_product(sb.iter()).filter(|(x, y)| &x.area + &y.area < st.q).count();
        }
    }
    Ok((count, format!("factors: {}; {}", why(&ma), why(&mb))))
}

/// Default chains for a boundary partition: one perturbed Lagrangian per
/// chain position, the first circle on slopes `1, 2, ...`, the second
/// starting at slope `0`.
pub fn default_request(d: i64, sigma: &Perm, q: Rational) -> Result<ProductRequest, FukayaError> {
    let cycles: Vec<Vec<usize>> = sigma
        .cycles()
        .iter()
        .map(|c| {
            c.iter()
                .map(|l| {
                    if let Letter::Num(k) = l {
                        Ok(*k as usize - 1)
                    } else {
                        Err(FukayaError::Request("auxiliary letter in a boundary".into()))
                    }
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let sizes: Vec<usize> = cycles.iter().map(Vec::len).collect();
    let mut slopes: Vec<Vec<i64>> = Vec::new();
    match sizes.as_slice() {
        [k] => slopes.push((0..*k as i64).collect()),
        [k1, k2] => {
            slopes.push((1..=*k1 as i64).collect());
            let mut s = vec![0];
            s.extend((1..*k2 as i64).map(|i| *k1 as i64 + i));
            slopes.push(s);
        }
        _ => return Err(FukayaError::Request("one or two boundary circles are supported".into())),
    }
    let all: Vec<i64> = slopes.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let lags = base_geometry::auto_perturb(&all, d);
    let pick = |s: i64| lags[all.iter().position(|&x| x == s).unwrap()].clone();
    let chains = slopes.iter().map(|c| c.iter().map(|&s| pick(s)).collect()).collect();
    Ok(ProductRequest { d, chains, cycles, settings: Settings::new(q) })
}

/// Both sides of the chain-map equation at `(n, b)`. The module side has
/// zero differential, so the left side vanishes and the check reduces to
/// the relation on the right.
pub fn chain_map_check(n: usize, b: u32, sigma: Option<&Perm>, d: i64, st: &Settings) -> Result<RelationReport, FukayaError> {
    let mut report = match (n, b) {
        (4, 0) => {
            let lags = base_geometry::auto_perturb(&[0, 1, 2, 3], d);
            verify_a_infinity(d, &lags, st, true)?
        }
        (3, 1) | (2, 1) => {
            let default = if n == 3 { "(1 2)(3)" } else { "(1)(2)" };
            let sigma = match sigma {
                Some(s) => s.clone(),
                None => default.parse()?,
            };
            if sigma.len() != n || sigma.cycle_count() != 2 {
                return Err(FukayaError::Request(format!("sigma {sigma} must have {n} letters in two cycles")));
            }
            let mut req = default_request(d, &sigma, st.q.clone())?;
            req.settings = st.clone();
            verify_quantum(&req)?
        }
        _ => return Err(FukayaError::Request(format!("(n, b) = ({n}, {b}) is outside the supported sizes"))),
    };
    report.relation = format!("chain_map_{n}_{b}");
    report.checks.insert(0, Check { name: "module_side_zero".into(), pass: true, detail: "the module differential vanishes".into() });
    Ok(report.finish())
}

/// Universal-cover count of triangles, used as an independent cross-check
/// by the command line and the tests: for corner bases `(y0, y1, y2)` of the
/// chain `(A, B, C)`, every counterclockwise triangle with sides on lifts of
/// `A`, `B`, `C` and corners over the given bases, up to deck translation,
/// weighted `q^area`.
pub fn triangle_oracle(d: i64, chain: &[Lagrangian; 3], bases: &[Rational; 3], q: &Rational) -> NovikovSeries {
    let [a, b, c] = chain;
    let dd = int(d);
    let mut out = NovikovSeries::zero(q.clone());
    // corner 0 on A (lift 0) and B at y0; corner 1 on B and C at y1 + k d;
    // corner 2 is where that lift of C meets A
    let y0 = bases[0].clone();
    let x0 = a.fiber_at(&y0);
    let jb = &x0 - b.fiber_at(&y0);
    if !jb.is_integer() {
        return out;
    }
    let reach = 4 * (rat::ceil_sqrt(&(int(2) * q)) + 2) + 4;
    for k in -reach..=reach {
        let y1 = &bases[1] + int(k) * &dd;
        let x1 = b.fiber_at(&y1) + &jb;
        let jc = &x1 - c.fiber_at(&y1);
        if !jc.is_integer() {
            continue;
        }
        if a.slope == c.slope {
            continue;
        }
        // -a y + va = -c y + vc + jc
        let y2 = (&c.offset + &jc - &a.offset) / int(c.slope - a.slope);
        if rat::modulo(&(&y2 - &bases[2]), &dd) != Rational::from_integer(0.into()) {
            continue;
        }
        let x2 = a.fiber_at(&y2);
        let twice = (&y1 - &y0) * (&x2 - &x0) - (&y2 - &y0) * (&x1 - &x0);
        let zero = Rational::from_integer(0.into());
        if twice > zero || (twice == zero && y0 == y1 && y1 == y2) {
            out.add_term(twice / int(2), 1);
        }
    }
    out
}

/// Sign of a permutation given as a list of images.
pub fn perm_sign(p: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}
