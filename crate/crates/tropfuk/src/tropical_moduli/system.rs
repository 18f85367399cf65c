//! The linear system of balancing and Lagrangian conditions.

use num_traits::Zero;

use super::linalg::{self, Affine, Matrix};
use super::ribbon::End;
use super::solution::{Lift, TmgSolution};
use super::types::{mark_edges, RibbonType};
use crate::rat::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Row {
    Balance(usize),
    Lagrangian(usize),
    /// A degree-one corner fixes the image of its vertex.
    Pin(usize),
}

/// Columns are `phi(v)` for the vertices in traversal order, then `phi(p)`,
/// then the seeds `v_e(0)` in traversal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub matrix: Matrix,
    pub rhs: Vec<Rational>,
    pub rows: Vec<Row>,
    pub vertex_col: Vec<usize>,
    pub p_col: usize,
    pub seed_col: Vec<usize>,
    pub marked: Vec<usize>,
}

impl ConstraintSystem {
    pub fn cols(&self) -> usize {
        self.p_col + 1 + self.seed_col.len()
    }

    /// Square block on the `phi(p)` and seed columns over the balancing and
    /// Lagrangian rows.
    pub fn b_matrix(&self) -> Matrix {
        self.matrix.iter().zip(&self.rows).filter(|(_, r)| !matches!(r, Row::Pin(_))).map(|(row, _)| row[self.p_col..].to_vec()).collect()
    }

    fn push(&mut self, row: Vec<Rational>, rhs: Rational, kind: Row) {
        self.matrix.push(row);
        self.rhs.push(rhs);
        self.rows.push(kind);
    }

    pub fn unpack(&self, x: &[Rational]) -> TmgSolution {
        TmgSolution {
            phi: self.vertex_col.iter().map(|&c| x[c].clone()).collect(),
            phi_p: x[self.p_col].clone(),
            seeds: self.seed_col.iter().map(|&c| x[c].clone()).collect(),
            free_parameters: 0,
        }
    }

    pub fn pack(&self, s: &TmgSolution) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.cols()];
        for (v, &c) in self.vertex_col.iter().enumerate() {
            x[c] = s.phi[v].clone();
        }
        x[self.p_col] = s.phi_p.clone();
        for (e, &c) in self.seed_col.iter().enumerate() {
            x[c] = s.seeds[e].clone();
        }
        x
    }
}

/// Balancing rows for every vertex and one Lagrangian row per marked edge:
/// `n_e * phi(tail) - v_e(0) = -lambda_e` with
/// `lambda_e = offset(left) - offset(right) + branch_e`.
pub fn build_system(t: &RibbonType, lift: &Lift) -> ConstraintSystem {
    let tr = t.traversal();
    let nv = t.vertex_count();
    let ne = t.edges.len();
    let mut vertex_col = vec![0; nv];
    for (i, &v) in tr.vertices.iter().enumerate() {
        vertex_col[v] = i;
    }
    let p_col = nv;
    let mut seed_col = vec![0; ne];
    for (i, &e) in tr.edges.iter().enumerate() {
        seed_col[e] = nv + 1 + i;
    }
    let marked = mark_edges(t);
    let cols = nv + 1 + ne;
    let mut sys =
        ConstraintSystem { matrix: Vec::new(), rhs: Vec::new(), rows: Vec::new(), vertex_col, p_col, seed_col, marked: marked.clone() };
    let r = &t.ribbon;
    let d = int(t.boundary.d);
    for &v in &tr.vertices {
        let mut row = vec![Rational::zero(); cols];
        let mut rhs = Rational::zero();
        for &dart in &r.rot[v] {
            match r.end[dart] {
                End::Leg(s) => {
                    let n = int(t.leg_label(s));
                    row[sys.vertex_col[v]] += &n;
                    if s == t.output {
                        row[p_col] -= &n;
                    } else {
                        rhs += &n * &lift.corners[s];
                    }
                }
                End::Twin(_) => {
                    let (e, is_tail) = t.edge_of_dart(dart).unwrap();
                    if is_tail {
                        row[sys.seed_col[e]] -= int(1);
                    } else {
                        let n = int(t.edge_label(e));
                        let tail_v = r.vertex[t.edges[e].tail];
                        row[sys.seed_col[e]] += int(1);
                        row[sys.vertex_col[v]] += &n;
                        row[sys.vertex_col[tail_v]] -= &n;
                        rhs -= &n * int(lift.winding[e]) * &d;
                    }
                }
            }
        }
        sys.push(row, rhs, Row::Balance(v));
    }
    for &e in &marked {
        let mut row = vec![Rational::zero(); cols];
        let tail_v = r.vertex[t.edges[e].tail];
        row[sys.vertex_col[tail_v]] += int(t.edge_label(e));
        row[sys.seed_col[e]] -= int(1);
        let rhs = -lambda(t, lift, e);
        sys.push(row, rhs, Row::Lagrangian(e));
    }
    sys
}

/// `offset(left) - offset(right) + branch`.
pub(crate) fn lambda(t: &RibbonType, lift: &Lift, e: usize) -> Rational {
    let b = &t.boundary;
    b.offset(t.face[t.edges[e].tail]) - b.offset(t.face[t.edges[e].head]) + int(lift.branch[e])
}

/// The system with pins for degree-one corners, and its solution set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solved {
    pub system: ConstraintSystem,
    pub affine: Affine,
}

impl Solved {
    pub fn dimension(&self) -> usize {
        self.affine.kernel.len()
    }

    /// The unique solution of a rigid system.
    pub fn point(&self) -> Option<TmgSolution> {
        (self.dimension() == 0).then(|| self.system.unpack(&self.affine.particular))
    }
}

/// Adds pins (`phi(x) = y` for degree-one legs, `phi(u) = phi(p)` for a
/// degree-one output) and solves exactly. `None` when inconsistent.
pub fn solve(t: &RibbonType, lift: &Lift, degrees: &[u8]) -> Option<Solved> {
    let mut sys = build_system(t, lift);
    add_pins(t, lift, degrees, &mut sys);
    let affine = linalg::solve(&sys.matrix, &sys.rhs)?;
    Some(Solved { system: sys, affine })
}

pub(crate) fn add_pins(t: &RibbonType, lift: &Lift, degrees: &[u8], sys: &mut ConstraintSystem) {
    let r = &t.ribbon;
    let cols = sys.cols();
    for s in 0..t.leg_count() {
        if degrees[s] != 1 {
            continue;
        }
        let v = r.vertex[r.leg_dart(s).unwrap()];
        let mut row = vec![Rational::zero(); cols];
        row[sys.vertex_col[v]] = int(1);
        let rhs = if s == t.output {
            row[sys.p_col] = int(-1);
            Rational::zero()
        } else {
            lift.corners[s].clone()
        };
        sys.push(row, rhs, Row::Pin(s));
    }
}

/// Right-hand side of the pinned system for another lift, in the row order
/// of `sys`.
pub(crate) fn rhs_for(t: &RibbonType, sys: &ConstraintSystem, lift: &Lift) -> Vec<Rational> {
    let r = &t.ribbon;
    let d = int(t.boundary.d);
    sys.rows
        .iter()
        .map(|row| match *row {
            Row::Balance(v) => {
                let mut rhs = Rational::zero();
                for &dart in &r.rot[v] {
                    match r.end[dart] {
                        End::Leg(s) if s != t.output => rhs += int(t.leg_label(s)) * &lift.corners[s],
                        End::Leg(_) => {}
                        End::Twin(_) => {
                            let (e, is_tail) = t.edge_of_dart(dart).unwrap();
                            if !is_tail {
                                rhs -= int(t.edge_label(e)) * int(lift.winding[e]) * &d;
                            }
                        }
                    }
                }
                rhs
            }
            Row::Lagrangian(e) => -lambda(t, lift, e),
            Row::Pin(s) if s == t.output => Rational::zero(),
            Row::Pin(s) => lift.corners[s].clone(),
        })
        .collect()
}
