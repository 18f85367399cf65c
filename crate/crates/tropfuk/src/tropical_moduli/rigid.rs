//! Enumeration of rigid tropical graphs with given corners below an area
//! cutoff.

use itertools::Itertools;
use num_traits::Zero;

use super::linalg::{self, Matrix};
use super::solution::{surface_area, surface_sign, validate, Lift, TmgSolution};
use super::system::{add_pins, build_system, rhs_for, ConstraintSystem};
use super::types::{enumerate_types, RibbonType};
use super::{Boundary, Corner, TropicalError};
use crate::exec::{self, Mode};
use crate::rat::{self, int, Rational};

#[derive(Clone, Debug)]
pub struct RigidOptions {
    /// Keep solutions of area strictly below `q`.
    pub q: Rational,
    /// Override for [`extent_bound`].
    pub extent: Option<Rational>,
    pub mode: Mode,
}

impl RigidOptions {
    pub fn new(q: Rational) -> Self {
        RigidOptions { q, extent: None, mode: Mode::Auto }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidSolution {
    pub ty: RibbonType,
    pub lift: Lift,
    pub solution: TmgSolution,
    pub degrees: Vec<u8>,
    pub area: Rational,
    /// Product of corner directions, see [`surface_sign`].
    pub sign: i32,
}

impl RigidSolution {
    /// Lifted base of every corner, the output included.
    pub fn lifted_corners(&self) -> Vec<Rational> {
        (0..self.ty.leg_count()).map(|s| self.solution.corner(&self.ty, &self.lift, s)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.solution.to_json(&self.ty, &self.area, self.sign);
        v["corners"] = self.lifted_corners().iter().map(rat::show).collect::<Vec<_>>().into();
        v["winding"] = self.lift.winding.clone().into();
        v
    }
}

/// How far (in the base) corners of a graph of area below `q` can sit from
/// each other. A strip between slopes differing by `n` over a base interval
/// of length `L` covers at least `L^2 / 2`; parallel strips between distinct
/// same-slope Lagrangians cover at least their separation times `L`.
pub fn extent_bound(boundary: &Boundary, q: &Rational) -> Rational {
    let mut s = int(2 * rat::ceil_sqrt(&(int(2) * q)) + boundary.d);
    let d = int(boundary.d);
    let mut gap: Option<Rational> = None;
    let ls = &boundary.lagrangians;
    for (i, a) in ls.iter().enumerate() {
        for b in &ls[i + 1..] {
            if a.slope == b.slope {
                let g = rat::modulo(&(&a.offset - &b.offset), &int(1));
                let g = if g > &int(1) - &g { int(1) - g } else { g };
                if !g.is_zero() && gap.as_ref().is_none_or(|x| g < *x) {
                    gap = Some(g);
                }
            }
        }
    }
    if let Some(g) = gap {
        s += q / g;
    }
    Rational::from_integer(rat::ceil_int(&(s / &d))) * d
}

/// A type with its pinned system for the zero lift and, when square and
/// invertible, the inverse matrix. Only the right-hand side depends on the
/// lift.
struct Prepared {
    ty: RibbonType,
    sys: ConstraintSystem,
    inverse: Option<Matrix>,
}

fn prepare(ty: RibbonType, degrees: &[u8]) -> Prepared {
    let mut sys = build_system(&ty, &Lift::zero(&ty));
    add_pins(&ty, &Lift::zero(&ty), degrees, &mut sys);
    let n = sys.cols();
    let inverse = if sys.matrix.len() == n && !linalg::det(&sys.matrix).is_zero() {
        let cols: Option<Vec<Vec<Rational>>> = (0..n)
            .map(|i| {
                let mut e = vec![Rational::zero(); n];
                e[i] = int(1);
                linalg::solve(&sys.matrix, &e).map(|a| a.particular)
            })
            .collect();
        cols.map(|c| (0..n).map(|r| (0..n).map(|k| c[k][r].clone()).collect()).collect())
    } else {
        None
    };
    Prepared { ty, sys, inverse }
}

fn solve_prepared(p: &Prepared, lift: &Lift) -> Option<TmgSolution> {
    let rhs = rhs_for(&p.ty, &p.sys, lift);
    let x = match &p.inverse {
        Some(inv) => linalg::mat_vec(inv, &rhs),
        None => {
            let a = linalg::solve(&p.sys.matrix, &rhs)?;
            if !a.kernel.is_empty() {
                return None;
            }
            a.particular
        }
    };
    Some(p.sys.unpack(&x))
}

/// Cheap part of validation: strict and consistent edge directions and the
/// output landing on its base point.
fn quick_ok(t: &RibbonType, lift: &Lift, s: &TmgSolution, out_base: &Rational) -> bool {
    for e in 0..t.edges.len() {
        let sd = rat::sign(&s.delta(t, lift, e));
        if sd == 0 || rat::sign(s.v0(e)) != sd || rat::sign(&s.v1(t, lift, e)) != sd {
            return false;
        }
    }
    rat::modulo(&s.phi_p, &int(t.boundary.d)) == *out_base
}

/// Every valid rigid tropical graph with the given corners and area below
/// `opts.q`, up to deck translation. The first non-output corner that pins
/// the picture (nonzero label or degree one) is lifted to its base point;
/// the other corners, windings and lattice branches run over windows sized
/// by [`extent_bound`].
pub fn rigid_solutions(boundary: &Boundary, corners: &[Corner], opts: &RigidOptions) -> Result<Vec<RigidSolution>, TropicalError> {
    let n = boundary.len();
    if corners.len() != n {
        return Err(TropicalError::Boundary(format!("{} corners for {n} slots", corners.len())));
    }
    if let Some(c) = corners.iter().find(|c| c.degree > 1) {
        return Err(TropicalError::Degree(c.degree));
    }
    let b = boundary.loops();
    let sum_deg: i64 = corners.iter().map(|c| c.degree as i64).sum();
    let dim = n as i64 - 2 + 2 * b as i64 - sum_deg;
    if dim != 0 {
        return Err(TropicalError::NotRigid(dim));
    }
    let types = enumerate_types(boundary)?;
    let degrees: Vec<u8> = corners.iter().map(|c| c.degree).collect();
    let s = opts.extent.clone().unwrap_or_else(|| extent_bound(boundary, &opts.q));
    let d = boundary.d;
    let k_max = rat::to_i64(&(&s / int(d)).ceil()).unwrap_or(1) + 1;
    let output = types.first().map(|t| t.output).unwrap_or(0);
    let pins = |slot: usize| boundary.label(slot) != 0 || degrees[slot] == 1;
    let reference = (0..n).find(|&x| x != output && pins(x));
    let ranges: Vec<Vec<i64>> =
        (0..n).map(|x| if x == output || Some(x) == reference || !pins(x) { vec![0] } else { (-k_max..=k_max).collect() }).collect();
    let max_label = (0..n).map(|x| boundary.label(x).abs()).max().unwrap_or(0);
    let m_max = (max_label + 1) * 2 * (k_max + 1) * d + 2;

    let prepared: Vec<Prepared> = exec::map(opts.mode, &types, |t| prepare(t.clone(), &degrees));
    // split the work by type and by the first enumerated corner
    let split = (0..n).find(|&x| ranges[x].len() > 1);
    let mut jobs = Vec::new();
    for ti in 0..prepared.len() {
        match split {
            Some(x) => jobs.extend(ranges[x].iter().map(|&k| (ti, Some(k)))),
            None => jobs.push((ti, None)),
        }
    }
    let out_base = corners[output].base.value().clone();
    let found = exec::flat_map(opts.mode, &jobs, |&(ti, first)| {
        let p = &prepared[ti];
        let t = &p.ty;
        let mut local_ranges = ranges.clone();
        if let (Some(x), Some(k)) = (split, first) {
            local_ranges[x] = vec![k];
        }
        let marked = p.sys.marked.clone();
        let mut hits = Vec::new();
        for ks in local_ranges.iter().map(|r| r.iter().copied()).multi_cartesian_product() {
            let lifted: Vec<Rational> = (0..n).map(|x| corners[x].base.lift(ks[x])).collect();
            let base = Lift::new(t, lifted);
            let mut lifts = vec![base];
            for &e in &marked {
                let mut next = Vec::new();
                for l in &lifts {
                    for w in -k_max..=k_max {
                        for m in -m_max..=m_max {
                            let mut l2 = l.clone();
                            l2.winding[e] = w;
                            l2.branch[e] = m;
                            next.push(l2);
                        }
                    }
                }
                lifts = next;
            }
            for lift in lifts {
                let Some(sol) = solve_prepared(p, &lift) else {
                    continue;
                };
                if !quick_ok(t, &lift, &sol, &out_base) {
                    continue;
                }
                if !validate(t, &lift, &sol, corners).valid {
                    continue;
                }
                let area = surface_area(t, &lift, &sol);
                if area >= opts.q {
                    continue;
                }
                let sign = surface_sign(t, &lift, &sol);
                hits.push(RigidSolution { ty: t.clone(), lift, solution: sol, degrees: degrees.clone(), area, sign });
            }
        }
        hits
    });
    Ok(found)
}
