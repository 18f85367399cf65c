//! Tropical Morse trees and one-loop graphs mapping to the circle `R/dZ`.
//!
//! A ribbon type fixes the trivalent domain, its cyclic orders and the
//! Lagrangian on each side of every edge. Given lifted corner positions the
//! balancing and Lagrangian conditions form a linear system whose solutions
//! are the tropical graphs of that type; rigid ones are counted by
//! [`rigid_solutions`] and one-dimensional families are followed by
//! [`walk_family`].

mod family;
pub mod linalg;
mod ribbon;
mod rigid;
mod solution;
mod system;
mod types;

use serde::Serialize;
use thiserror::Error;

use crate::base_geometry::{CirclePoint, Lagrangian};
use crate::rat::Rational;

pub use family::{glue_pair, glue_self, walk_family, Endpoint, FamilyStart, FamilyWalk, Piece, PieceKey, Wall};
pub use ribbon::{End, Ribbon};
pub use rigid::{extent_bound, rigid_solutions, RigidOptions, RigidSolution};
pub use solution::{surface_area, surface_sign, validate, Lift, TmgSolution, Validation};
pub use system::{build_system, solve, ConstraintSystem, Solved};
pub use types::{default_output, enumerate_types, mark_edges, Edge, RibbonType, Traversal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TropicalError {
    #[error("unstable (n, b) = ({0}, {1})")]
    Unstable(usize, u32),
    #[error("invalid boundary: {0}")]
    Boundary(String),
    #[error("expected dimension {0}, rigid counts need 0")]
    NotRigid(i64),
    #[error("corner degree {0} is not 0 or 1")]
    Degree(u8),
    #[error("family walk failed: {0}")]
    Walk(String),
    #[error("only b = 0 and b = 1 are supported, got {0}")]
    Genus(u32),
}

/// A tensor slot: a corner from `source` to `target` (indices into
/// `Boundary::lagrangians`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Slot {
    pub source: usize,
    pub target: usize,
}

/// Lagrangians, slots and the boundary permutation `next` (the slot that
/// follows each slot when its boundary circle is traversed with the surface
/// on the left).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Boundary {
    pub d: i64,
    pub lagrangians: Vec<Lagrangian>,
    pub slots: Vec<Slot>,
    pub next: Vec<usize>,
}

impl Boundary {
    pub fn new(d: i64, lagrangians: Vec<Lagrangian>, slots: Vec<Slot>, next: Vec<usize>) -> Result<Self, TropicalError> {
        let n = slots.len();
        if d <= 0 {
            return Err(TropicalError::Boundary(format!("circumference {d}")));
        }
        if next.len() != n {
            return Err(TropicalError::Boundary("next has the wrong length".into()));
        }
        let mut seen = vec![false; n];
        for &j in &next {
            if j >= n || seen[j] {
                return Err(TropicalError::Boundary("next is not a permutation".into()));
            }
            seen[j] = true;
        }
        for (i, s) in slots.iter().enumerate() {
            if s.source >= lagrangians.len() || s.target >= lagrangians.len() {
                return Err(TropicalError::Boundary(format!("slot {i} names a missing Lagrangian")));
            }
            if slots[next[i]].source != s.target {
                return Err(TropicalError::Boundary(format!(
                    "slot {i} ends on L#{} but slot {} starts on L#{}",
                    s.target, next[i], slots[next[i]].source
                )));
            }
        }
        Ok(Boundary { d, lagrangians, slots, next })
    }

    /// One cyclic chain `(K_0, ..., K_{k-1})` with slot `j` in `Hom(K_j, K_{j+1})`.
    pub fn chain(d: i64, lagrangians: Vec<Lagrangian>) -> Result<Self, TropicalError> {
        let k = lagrangians.len();
        let slots = (0..k).map(|j| Slot { source: j, target: (j + 1) % k }).collect();
        let next = (0..k).map(|j| (j + 1) % k).collect();
        Boundary::new(d, lagrangians, slots, next)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slope(&self, lag: usize) -> i64 {
        self.lagrangians[lag].slope
    }

    pub fn offset(&self, lag: usize) -> &Rational {
        &self.lagrangians[lag].offset
    }

    /// Leg label `n(target) - n(source)`.
    pub fn label(&self, slot: usize) -> i64 {
        let s = self.slots[slot];
        self.slope(s.target) - self.slope(s.source)
    }

    /// The boundary circles, each listed from its smallest slot.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut j = self.next[s];
            while j != s {
                seen[j] = true;
                c.push(j);
                j = self.next[j];
            }
            out.push(c);
        }
        out
    }

    /// `b` with `b + 1` boundary circles.
    pub fn loops(&self) -> u32 {
        self.cycles().len() as u32 - 1
    }
}

/// A corner position: base point and degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Corner {
    pub base: CirclePoint,
    pub degree: u8,
}
