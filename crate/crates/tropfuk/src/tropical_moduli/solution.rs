//! Solutions of a type: validity, area and sign.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::ribbon::End;
use super::types::RibbonType;
use super::Corner;
use crate::rat::{self, int, Rational};

/// Discrete data fixing the lift of a graph to the universal cover: the
/// lifted base of every corner (the output entry is ignored), an integer
/// winding per edge and a lattice branch per edge (read on marked edges).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lift {
    pub corners: Vec<Rational>,
    pub winding: Vec<i64>,
    pub branch: Vec<i64>,
}

impl Lift {
    pub fn new(t: &RibbonType, corners: Vec<Rational>) -> Self {
        Lift { corners, winding: vec![0; t.edges.len()], branch: vec![0; t.edges.len()] }
    }

    pub fn zero(t: &RibbonType) -> Self {
        Lift::new(t, vec![Rational::zero(); t.leg_count()])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmgSolution {
    pub phi: Vec<Rational>,
    pub phi_p: Rational,
    pub seeds: Vec<Rational>,
    pub free_parameters: usize,
}

impl TmgSolution {
    /// Lifted base displacement from tail to head.
    pub fn delta(&self, t: &RibbonType, lift: &Lift, e: usize) -> Rational {
        let r = &t.ribbon;
        let (a, b) = (r.vertex[t.edges[e].tail], r.vertex[t.edges[e].head]);
        &self.phi[b] - &self.phi[a] + int(lift.winding[e] * t.boundary.d)
    }

    pub fn v0(&self, e: usize) -> &Rational {
        &self.seeds[e]
    }

    pub fn v1(&self, t: &RibbonType, lift: &Lift, e: usize) -> Rational {
        &self.seeds[e] + int(t.edge_label(e)) * self.delta(t, lift, e)
    }

    /// Lifted position of a corner; the output corner sits at `phi(p)`.
    pub fn corner(&self, t: &RibbonType, lift: &Lift, slot: usize) -> Rational {
        if slot == t.output {
            self.phi_p.clone()
        } else {
            lift.corners[slot].clone()
        }
    }

    /// Displacement from a corner to its vertex.
    pub fn leg_delta(&self, t: &RibbonType, lift: &Lift, slot: usize) -> Rational {
        let v = t.ribbon.vertex[t.ribbon.leg_dart(slot).unwrap()];
        &self.phi[v] - self.corner(t, lift, slot)
    }

    pub fn to_json(&self, t: &RibbonType, area: &Rational, sign: i32) -> serde_json::Value {
        let phi: serde_json::Map<String, serde_json::Value> =
            self.phi.iter().enumerate().map(|(v, y)| (v.to_string(), rat::show(y).into())).collect();
        let seeds: serde_json::Map<String, serde_json::Value> =
            self.seeds.iter().enumerate().map(|(e, y)| (e.to_string(), rat::show(y).into())).collect();
        serde_json::json!({
            "type": t.to_json(),
            "phi": phi,
            "phi_p": rat::show(&self.phi_p),
            "seeds": seeds,
            "area": rat::show(area),
            "sign": sign,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

/// Checks balancing, edge directions and lengths, collapsed legs, the
/// Lagrangian condition on every edge and leg, and the output corner.
pub fn validate(t: &RibbonType, lift: &Lift, s: &TmgSolution, corners: &[Corner]) -> Validation {
    let mut diag = Vec::new();
    let r = &t.ribbon;
    let b = &t.boundary;
    let d = int(b.d);
    for v in 0..r.vertex_count() {
        let mut sum = Rational::zero();
        for &dart in &r.rot[v] {
            match r.end[dart] {
                End::Leg(slot) => sum += int(t.leg_label(slot)) * s.leg_delta(t, lift, slot),
                End::Twin(_) => {
                    let (e, tail) = t.edge_of_dart(dart).unwrap();
                    if tail {
                        sum -= s.v0(e);
                    } else {
                        sum += s.v1(t, lift, e);
                    }
                }
            }
        }
        if !sum.is_zero() {
            diag.push(format!("vertex {v} unbalanced by {}", rat::show(&sum)));
        }
    }
    for e in 0..t.edges.len() {
        let dl = s.delta(t, lift, e);
        let (a, z) = (rat::sign(s.v0(e)), rat::sign(&s.v1(t, lift, e)));
        let sd = rat::sign(&dl);
        if sd == 0 {
            diag.push(format!("edge {e} has zero length"));
        } else if a != sd || z != sd {
            if a == 0 || z == 0 {
                diag.push(format!("edge {e} has infinite length"));
            } else {
                diag.push(format!("edge {e} points against its motion"));
            }
        }
        let tail_v = r.vertex[t.edges[e].tail];
        let l = int(t.edge_label(e)) * &s.phi[tail_v] - s.v0(e) + b.offset(t.face[t.edges[e].tail]) - b.offset(t.face[t.edges[e].head]);
        if !l.is_integer() {
            diag.push(format!("edge {e} violates the Lagrangian condition"));
        }
    }
    for slot in 0..t.leg_count() {
        let n = t.leg_label(slot);
        let collapsed = s.leg_delta(t, lift, slot).is_zero();
        if (n < 0 || corners[slot].degree == 1) && !collapsed {
            diag.push(format!("leg {} must be collapsed", slot + 1));
        }
        let y = s.corner(t, lift, slot);
        let sl = b.slots[slot];
        let l = int(n) * &y + b.offset(sl.source) - b.offset(sl.target);
        if !l.is_integer() {
            diag.push(format!("corner {} is off its Lagrangians", slot + 1));
        }
    }
    let want = corners[t.output].base.value();
    if !(rat::modulo(&s.phi_p, &d) == *want) {
        diag.push(format!("output lands at {} instead of {}", rat::show(&rat::modulo(&s.phi_p, &d)), corners[t.output].base));
    }
    let total = (0..t.leg_count()).fold(Rational::zero(), |acc, slot| acc + int(t.leg_label(slot)) * s.corner(t, lift, slot));
    if !rat::modulo(&total, &d).is_zero() {
        diag.push("weighted corner sum is not in dZ".into());
    }
    Validation { valid: diag.is_empty(), diagnostics: diag }
}

/// Area swept by the strips: `|delta| * (|v(0)| + |v(1)|) / 2` per edge and
/// leg. Directions agree along a valid edge, so no edge changes sign inside.
pub fn surface_area(t: &RibbonType, lift: &Lift, s: &TmgSolution) -> Rational {
    let mut a = Rational::zero();
    for e in 0..t.edges.len() {
        a += s.delta(t, lift, e).abs() * (s.v0(e).abs() + s.v1(t, lift, e).abs());
    }
    for slot in 0..t.leg_count() {
        let dl = s.leg_delta(t, lift, slot);
        a += dl.abs() * (int(t.leg_label(slot)) * &dl).abs();
    }
    a / int(2)
}

/// Product over corners with a negative label of the direction in which the
/// boundary leaves the corner: the base displacement along the next dart
/// counterclockwise (skipping zero-label legs), `+1` when it increases.
pub fn surface_sign(t: &RibbonType, lift: &Lift, s: &TmgSolution) -> i32 {
    let r = &t.ribbon;
    let mut sign = 1;
    for slot in 0..t.leg_count() {
        if t.leg_label(slot) >= 0 {
            continue;
        }
        let start = r.leg_dart(slot).unwrap();
        let mut g = r.next_ccw(start);
        while g != start && r.leg(g).is_some_and(|m| t.leg_label(m) == 0) {
            g = r.next_ccw(g);
        }
        let v = r.vertex[g];
        let out = match r.end[g] {
            End::Leg(m) => s.corner(t, lift, m) - &s.phi[v],
            End::Twin(_) => {
                let (e, tail) = t.edge_of_dart(g).unwrap();
                let dl = s.delta(t, lift, e);
                if tail {
                    dl
                } else {
                    -dl
                }
            }
        };
        if rat::sign(&out) < 0 {
            sign = -sign;
        }
    }
    sign
}
