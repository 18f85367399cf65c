//! One-dimensional families of tropical graphs, followed exactly from one
//! degenerate end to the other.
//!
//! A configuration is stored per dart: the lifted image of every vertex, and
//! for every dart the strip value and base displacement measured outward
//! from its vertex. Gluing legs, Whitehead moves and cutting an edge are then
//! local edits, and windings, seeds and lattice branches of the current type
//! are recomputed from the darts.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::linalg;
use super::ribbon::{End, Ribbon};
use super::rigid::RigidSolution;
use super::solution::{Lift, TmgSolution};
use super::system::{self, add_pins, build_system, lambda};
use super::types::{default_output, Edge, RibbonType};
use super::{Boundary, Slot, TropicalError};
use crate::rat::{self, int, Rational};

const MAX_STEPS: usize = 10_000;

fn walk_err(msg: impl Into<String>) -> TropicalError {
    TropicalError::Walk(msg.into())
}

#[derive(Clone, Debug)]
struct Config {
    ribbon: Ribbon,
    phi: Vec<Rational>,
    out_v: Vec<Rational>,
    disp: Vec<Rational>,
}

#[derive(Clone, Debug)]
struct State {
    ty: RibbonType,
    lift: Lift,
    sol: TmgSolution,
    degrees: Vec<u8>,
}

fn config_of(t: &RibbonType, lift: &Lift, s: &TmgSolution) -> Config {
    let r = &t.ribbon;
    let mut out_v = Vec::with_capacity(r.dart_count());
    let mut disp = Vec::with_capacity(r.dart_count());
    for dart in 0..r.dart_count() {
        match r.end[dart] {
            End::Leg(slot) => {
                let dl = s.corner(t, lift, slot) - &s.phi[r.vertex[dart]];
                out_v.push(int(t.leg_label(slot)) * &dl);
                disp.push(dl);
            }
            End::Twin(_) => {
                let (e, tail) = t.edge_of_dart(dart).unwrap();
                let dl = s.delta(t, lift, e);
                if tail {
                    out_v.push(s.v0(e).clone());
                    disp.push(dl);
                } else {
                    out_v.push(-s.v1(t, lift, e));
                    disp.push(-dl);
                }
            }
        }
    }
    Config { ribbon: r.clone(), phi: s.phi.clone(), out_v, disp }
}

fn state_of(boundary: &Boundary, c: &Config, output: usize, edges: Option<Vec<Edge>>, degrees: &[u8]) -> Result<State, TropicalError> {
    let t = RibbonType::new(boundary.clone(), c.ribbon.clone(), output, edges).map_err(walk_err)?;
    let r = &t.ribbon;
    let d = int(boundary.d);
    let corners: Vec<Rational> = (0..t.leg_count())
        .map(|slot| {
            let dart = r.leg_dart(slot).unwrap();
            &c.phi[r.vertex[dart]] + &c.disp[dart]
        })
        .collect();
    let mut winding = Vec::with_capacity(t.edges.len());
    let mut seeds = Vec::with_capacity(t.edges.len());
    for e in &t.edges {
        let span = &c.phi[r.vertex[e.head]] - &c.phi[r.vertex[e.tail]];
        let w = rat::to_i64(&((&c.disp[e.tail] - span) / &d)).ok_or_else(|| walk_err("edge winding is not an integer"))?;
        winding.push(w);
        seeds.push(c.out_v[e.tail].clone());
    }
    let phi_p = corners[output].clone();
    let mut lift = Lift { corners, winding, branch: vec![0; t.edges.len()] };
    let sol = TmgSolution { phi: c.phi.clone(), phi_p, seeds, free_parameters: 0 };
    for &e in &system::build_system(&t, &lift).marked {
        let tail_v = r.vertex[t.edges[e].tail];
        let off = lambda(&t, &lift, e);
        let m = -(int(t.edge_label(e)) * &sol.phi[tail_v] - sol.v0(e) + off);
        lift.branch[e] = rat::to_i64(&m).ok_or_else(|| walk_err("Lagrangian condition fails on a marked edge"))?;
    }
    let st = State { ty: t, lift, sol, degrees: degrees.to_vec() };
    let mut sys = build_system(&st.ty, &st.lift);
    add_pins(&st.ty, &st.lift, &st.degrees, &mut sys);
    if linalg::mat_vec(&sys.matrix, &sys.pack(&st.sol)) != sys.rhs {
        return Err(walk_err("configuration does not solve its system"));
    }
    Ok(st)
}

/// Joins two legs into an edge; strip values are unchanged and the edge
/// displacement is the sum of the two leg displacements.
fn link_legs(c: &mut Config, a: usize, b: usize) {
    c.ribbon.link(a, b);
    let dl = &c.disp[a] - &c.disp[b];
    c.disp[b] = -dl.clone();
    c.disp[a] = dl;
}

/// One side of a degeneration: a polygon or annulus with its lifted corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub boundary: Boundary,
    #[serde(serialize_with = "ser_rats")]
    pub corners: Vec<Rational>,
    pub degrees: Vec<u8>,
    #[serde(with = "crate::rat::as_str")]
    pub area: Rational,
    pub sign: i32,
    /// Slot of the family's boundary for each slot, `None` for cut legs.
    pub origin: Vec<Option<usize>>,
}

fn ser_rats<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rat::show))
}

/// Corner data up to deck translation: `(source, target, degree, lift)` per
/// corner, sorted, with lifts shifted so the first lies in `[0, d)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PieceKey {
    pub corners: Vec<(i64, Rational, i64, Rational, u8, Rational)>,
    pub area: Rational,
}

impl Piece {
    pub fn from_rigid(s: &RigidSolution) -> Piece {
        Piece {
            boundary: s.ty.boundary.clone(),
            corners: s.lifted_corners(),
            degrees: s.degrees.clone(),
            area: s.area.clone(),
            sign: s.sign,
            origin: (0..s.ty.leg_count()).map(Some).collect(),
        }
    }

    pub fn key(&self) -> PieceKey {
        let b = &self.boundary;
        let mut cs: Vec<_> = (0..b.len())
            .map(|i| {
                let Slot { source, target } = b.slots[i];
                let (ls, lt) = (&b.lagrangians[source], &b.lagrangians[target]);
                (ls.slope, ls.offset.clone(), lt.slope, lt.offset.clone(), self.degrees[i], self.corners[i].clone())
            })
            .collect();
        cs.sort();
        if let Some(first) = cs.first() {
            let d = int(b.d);
            let shift = (&first.5 / &d).floor() * &d;
            for c in cs.iter_mut() {
                c.5 -= &shift;
            }
        }
        PieceKey { corners: cs, area: self.area.clone() }
    }
}

/// A degenerate end of a family: the pieces obtained by cutting the edge
/// whose strip value vanishes at one end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Endpoint {
    pub pieces: Vec<Piece>,
    /// Lifted base of the new corner.
    #[serde(with = "crate::rat::as_str")]
    pub corner: Rational,
}

impl Endpoint {
    pub fn keys(&self) -> Vec<PieceKey> {
        let mut k: Vec<PieceKey> = self.pieces.iter().map(Piece::key).collect();
        k.sort();
        k
    }

    pub fn area(&self) -> Rational {
        self.pieces.iter().fold(Rational::zero(), |a, p| a + &p.area)
    }

    pub fn sign(&self) -> i32 {
        self.pieces.iter().map(|p| p.sign).product()
    }
}

/// An interior edge shrinking to zero length and reappearing with the other
/// splitting of its quadrivalent vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Wall {
    #[serde(with = "crate::rat::as_str")]
    pub position: Rational,
    pub label_before: i64,
    pub label_after: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyWalk {
    pub start: Endpoint,
    pub end: Endpoint,
    pub walls: Vec<Wall>,
}

/// A degenerate configuration at which a family starts: two legs glued into
/// an edge whose strip value vanishes at one end.
#[derive(Clone, Debug)]
pub struct FamilyStart {
    state: State,
    glued: usize,
}

fn relabel(r: &mut Ribbon, map: &[Option<usize>]) {
    for e in r.end.iter_mut() {
        if let End::Leg(s) = e {
            if let Some(t) = map[*s] {
                *s = t;
            }
        }
    }
}

fn start_from(target: &Boundary, c: Config, degrees: Vec<Option<u8>>, glued: usize) -> Result<FamilyStart, TropicalError> {
    let degrees: Vec<u8> = degrees.into_iter().collect::<Option<_>>().ok_or_else(|| walk_err("a slot of the target is not covered"))?;
    let output = default_output(target).ok_or_else(|| walk_err("every leg label is zero"))?;
    let state = state_of(target, &c, output, None, &degrees)?;
    Ok(FamilyStart { state, glued })
}

/// Glues corner `a_slot` of `a` to corner `b_slot` of `b` (translated so the
/// two lifts agree). `a_map` and `b_map` send the remaining slots to slots of
/// `target`.
pub fn glue_pair(
    target: &Boundary,
    a: &RigidSolution,
    a_slot: usize,
    a_map: &[Option<usize>],
    b: &RigidSolution,
    b_slot: usize,
    b_map: &[Option<usize>],
) -> Result<FamilyStart, TropicalError> {
    let ca = config_of(&a.ty, &a.lift, &a.solution);
    let cb = config_of(&b.ty, &b.lift, &b.solution);
    let shift = a.solution.corner(&a.ty, &a.lift, a_slot) - b.solution.corner(&b.ty, &b.lift, b_slot);
    if !rat::modulo(&shift, &int(target.d)).is_zero() {
        return Err(walk_err("glued corners sit over different base points"));
    }
    let mut ra = ca.ribbon.clone();
    let mut rb = cb.ribbon.clone();
    relabel(&mut ra, a_map);
    relabel(&mut rb, b_map);
    let (vo, dof) = (ra.vertex_count(), ra.dart_count());
    let mut r = ra;
    for rot in &rb.rot {
        let v = r.add_vertex();
        for &dart in rot {
            let end = match rb.end[dart] {
                End::Twin(t) => End::Twin(t + dof),
                leg => leg,
            };
            r.add_dart(v, end);
        }
    }
    debug_assert_eq!(r.vertex_count(), vo + rb.vertex_count());
    let da = a.ty.ribbon.leg_dart(a_slot).unwrap();
    let db = b.ty.ribbon.leg_dart(b_slot).unwrap() + dof;
    let mut c = Config {
        ribbon: r,
        phi: ca.phi.iter().cloned().chain(cb.phi.iter().map(|y| y + &shift)).collect(),
        out_v: ca.out_v.iter().chain(&cb.out_v).cloned().collect(),
        disp: ca.disp.iter().chain(&cb.disp).cloned().collect(),
    };
    link_legs(&mut c, da, db);
    let mut degrees = vec![None; target.len()];
    for (s, m) in a_map.iter().enumerate() {
        if let (Some(t), true) = (m, s != a_slot) {
            degrees[*t] = Some(a.degrees[s]);
        }
    }
    for (s, m) in b_map.iter().enumerate() {
        if let (Some(t), true) = (m, s != b_slot) {
            degrees[*t] = Some(b.degrees[s]);
        }
    }
    start_from(target, c, degrees, da)
}

/// Glues corners `f` and `fp` of a single solution into the edge that closes
/// a cycle. `map` sends the remaining slots to slots of `target`.
pub fn glue_self(target: &Boundary, p: &RigidSolution, f: usize, fp: usize, map: &[Option<usize>]) -> Result<FamilyStart, TropicalError> {
    let mut c = config_of(&p.ty, &p.lift, &p.solution);
    let yf = p.solution.corner(&p.ty, &p.lift, f);
    let yfp = p.solution.corner(&p.ty, &p.lift, fp);
    if !rat::modulo(&(yf - yfp), &int(target.d)).is_zero() {
        return Err(walk_err("glued corners sit over different base points"));
    }
    relabel(&mut c.ribbon, map);
    let df = p.ty.ribbon.leg_dart(f).unwrap();
    let dfp = p.ty.ribbon.leg_dart(fp).unwrap();
    link_legs(&mut c, df, dfp);
    let mut degrees = vec![None; target.len()];
    for (s, m) in map.iter().enumerate() {
        if let (Some(t), true) = (m, s != f && s != fp) {
            degrees[*t] = Some(p.degrees[s]);
        }
    }
    start_from(target, c, degrees, df)
}

/// Cuts edge `e` at the end where its strip value vanishes.
fn cut(st: &State, e: usize) -> Result<Endpoint, TropicalError> {
    let t = &st.ty;
    let mut c = config_of(t, &st.lift, &st.sol);
    let Edge { tail, head } = t.edges[e];
    let at_tail = c.out_v[tail].is_zero();
    if at_tail == c.out_v[head].is_zero() {
        return Err(walk_err("cut edge must vanish at exactly one end"));
    }
    let collapsed = if at_tail { tail } else { head };
    let b = &t.boundary;
    let n = b.len();
    let r = &c.ribbon;
    let new_slot = |dart: usize| Slot { source: t.face[r.prev_ccw(dart)], target: t.face[dart] };
    let mut slots = b.slots.clone();
    slots.push(new_slot(tail));
    slots.push(new_slot(head));
    let corner = c.phi[r.vertex[collapsed]].clone();
    c.ribbon.cut(tail, n, n + 1);
    c.disp[collapsed] = Rational::zero();
    let next = c.ribbon.realised_next(n + 2);
    let label = |s: usize| b.slope(slots[s].target) - b.slope(slots[s].source);
    let mut degrees = st.degrees.clone();
    let (sc, sf) = if at_tail { (n, n + 1) } else { (n + 1, n) };
    degrees.push(0);
    degrees.push(0);
    degrees[sc] = 1;
    if label(sc) >= 0 || label(sf) <= 0 {
        return Err(walk_err("cut corners have the wrong labels"));
    }
    let mut pieces = Vec::new();
    for comp in c.ribbon.components() {
        let (mut sub, dmap) = c.ribbon.restrict(&comp);
        let mut old_slots: Vec<usize> = sub.legs().into_iter().map(|(s, _)| s).collect();
        old_slots.sort();
        let mut new_of = vec![None; n + 2];
        for (i, &s) in old_slots.iter().enumerate() {
            new_of[s] = Some(i);
        }
        relabel(&mut sub, &new_of);
        let p_next: Vec<usize> = old_slots.iter().map(|&s| new_of[next[s]].expect("boundary stays in its piece")).collect();
        let p_slots: Vec<Slot> = old_slots.iter().map(|&s| slots[s]).collect();
        let pb = Boundary::new(b.d, b.lagrangians.clone(), p_slots, p_next)?;
        // a cut cycle edge can leave its winding on another edge of the
        // piece, so positions are re-derived along the piece's edges
        let mut pos: Vec<Option<Rational>> = vec![None; c.ribbon.vertex_count()];
        pos[comp[0]] = Some(c.phi[comp[0]].clone());
        let mut queue = vec![comp[0]];
        while let Some(v) = queue.pop() {
            let here = pos[v].clone().unwrap();
            for &dart in &c.ribbon.rot[v] {
                if let End::Twin(other) = c.ribbon.end[dart] {
                    let w = c.ribbon.vertex[other];
                    if pos[w].is_none() {
                        pos[w] = Some(&here + &c.disp[dart]);
                        queue.push(w);
                    }
                }
            }
        }
        let mut corners = Vec::new();
        for &s in &old_slots {
            let dart = c.ribbon.leg_dart(s).unwrap();
            corners.push(pos[c.ribbon.vertex[dart]].as_ref().unwrap() + &c.disp[dart]);
        }
        let mut area = Rational::zero();
        let mut sign = 1;
        for &v in &comp {
            for &dart in &c.ribbon.rot[v] {
                match c.ribbon.end[dart] {
                    End::Leg(s) => {
                        area += c.disp[dart].abs() * c.out_v[dart].abs();
                        if label(s) < 0 {
                            let mut g = c.ribbon.next_ccw(dart);
                            while g != dart && c.ribbon.leg(g).is_some_and(|m| label(m) == 0) {
                                g = c.ribbon.next_ccw(g);
                            }
                            if c.disp[g].is_negative() {
                                sign = -sign;
                            }
                        }
                    }
                    End::Twin(other) if dart < other => {
                        area += c.disp[dart].abs() * (c.out_v[dart].abs() + c.out_v[other].abs());
                    }
                    End::Twin(_) => {}
                }
            }
        }
        debug_assert_eq!(dmap.iter().flatten().count(), sub.dart_count());
        pieces.push(Piece {
            boundary: pb,
            corners,
            degrees: old_slots.iter().map(|&s| degrees[s]).collect(),
            area: area / int(2),
            sign,
            origin: old_slots.iter().map(|&s| (s < n).then_some(s)).collect(),
        });
    }
    Ok(Endpoint { pieces, corner })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Quantity {
    Delta,
    V0,
    V1,
}

/// Follows the family through Whitehead walls until a strip value vanishes
/// at the end of an edge. The start and end are returned as cut pieces.
pub fn walk_family(start: &FamilyStart) -> Result<FamilyWalk, TropicalError> {
    let mut st = start.state.clone();
    let (e0, _) = st.ty.edge_of_dart(start.glued).ok_or_else(|| walk_err("glued dart is not an edge"))?;
    let first = cut(&st, e0)?;
    let mut walls = Vec::new();
    for _ in 0..MAX_STEPS {
        let t = &st.ty;
        let solved = system::solve(t, &st.lift, &st.degrees).ok_or_else(|| walk_err("system is inconsistent"))?;
        if solved.dimension() != 1 {
            return Err(walk_err(format!("family has dimension {}", solved.dimension())));
        }
        let sys = &solved.system;
        let x0 = sys.pack(&st.sol);
        let z = &solved.affine.kernel[0];
        let dz = sys.unpack(z);
        let r = &t.ribbon;
        let mut qs: Vec<(Quantity, usize, Rational, Rational)> = Vec::new();
        for e in 0..t.edges.len() {
            let Edge { tail, head } = t.edges[e];
            let dd = &dz.phi[r.vertex[head]] - &dz.phi[r.vertex[tail]];
            let dv1 = &dz.seeds[e] + int(t.edge_label(e)) * &dd;
            qs.push((Quantity::Delta, e, st.sol.delta(t, &st.lift, e), dd));
            qs.push((Quantity::V0, e, st.sol.v0(e).clone(), dz.seeds[e].clone()));
            qs.push((Quantity::V1, e, st.sol.v1(t, &st.lift, e), dv1));
        }
        let small_sign = |a: &Rational, b: &Rational, s: i32| {
            if a.is_zero() {
                rat::sign(b) * s
            } else {
                rat::sign(a)
            }
        };
        let valid_dir = |s: i32| {
            (0..t.edges.len()).all(|e| {
                let signs: Vec<i32> = qs[3 * e..3 * e + 3].iter().map(|(_, _, a, b)| small_sign(a, b, s)).collect();
                signs[0] != 0 && signs.iter().all(|&x| x == signs[0])
            })
        };
        let dir = match (valid_dir(1), valid_dir(-1)) {
            (true, false) => 1,
            (false, true) => -1,
            (true, true) => return Err(walk_err("both directions are valid")),
            (false, false) => return Err(walk_err("no valid direction")),
        };
        let mut best: Option<Rational> = None;
        let mut hits: Vec<(Quantity, usize)> = Vec::new();
        for (kind, e, a, b) in &qs {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let tq = -(a / b) * int(dir as i64);
            if !tq.is_positive() {
                continue;
            }
            match &best {
                Some(x) if tq > *x => {}
                Some(x) if tq == *x => hits.push((*kind, *e)),
                _ => {
                    best = Some(tq);
                    hits = vec![(*kind, *e)];
                }
            }
        }
        let tstar = best.ok_or_else(|| walk_err("family does not end"))?;
        let step = tstar * int(dir as i64);
        let x1: Vec<Rational> = x0.iter().zip(z).map(|(a, b)| a + b * &step).collect();
        st.sol = sys.unpack(&x1);
        match hits.as_slice() {
            [(Quantity::Delta, e)] => {
                let e = *e;
                let Edge { tail: x, head: y } = t.edges[e];
                let (vx, vy) = (r.vertex[x], r.vertex[y]);
                if vx == vy {
                    return Err(walk_err("a loop edge shrinks"));
                }
                let mut c = config_of(t, &st.lift, &st.sol);
                c.phi[vy] = c.phi[vx].clone();
                c.ribbon.whitehead(x, y);
                let sum_x = c.ribbon.rot[vx].iter().filter(|&&g| g != x).fold(Rational::zero(), |acc, &g| acc + &c.out_v[g]);
                c.out_v[x] = -sum_x.clone();
                c.out_v[y] = sum_x;
                c.disp[x] = Rational::zero();
                c.disp[y] = Rational::zero();
                let label_before = t.edge_label(e);
                let position = c.phi[vx].clone();
                let edges = t.edges.clone();
                let (b, output) = (t.boundary.clone(), t.output);
                st = state_of(&b, &c, output, Some(edges), &st.degrees)?;
                walls.push(Wall { position, label_before, label_after: st.ty.edge_label(e) });
            }
            [(Quantity::V0 | Quantity::V1, e)] => {
                let end = cut(&st, *e)?;
                return Ok(FamilyWalk { start: first, end, walls });
            }
            _ => return Err(walk_err(format!("{} simultaneous events", hits.len()))),
        }
    }
    Err(walk_err("too many walls"))
}
