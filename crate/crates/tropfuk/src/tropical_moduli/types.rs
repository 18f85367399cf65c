//! Combinatorial types: trivalent ribbon graphs whose boundary arcs carry the
//! Lagrangians of a [`Boundary`].

use std::collections::BTreeMap;

use serde::Serialize;

use super::ribbon::{End, Ribbon};
use super::{Boundary, Slot, TropicalError};

/// An internal edge by its two darts; the strip runs from `tail` to `head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RibbonType {
    pub boundary: Boundary,
    pub ribbon: Ribbon,
    /// Lagrangian on the left of each dart.
    pub face: Vec<usize>,
    pub edges: Vec<Edge>,
    pub output: usize,
}

/// Depth-first order from the output vertex, taking edges on cycles before
/// bridges. Closing edges are the ones that reach an already visited vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traversal {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub closing: Vec<usize>,
}

impl RibbonType {
    /// Reads faces off the rotations. With `edges = None` the edges are
    /// oriented toward the output along the traversal tree, and each closing
    /// edge away from the vertex that closes it.
    pub fn new(boundary: Boundary, ribbon: Ribbon, output: usize, edges: Option<Vec<Edge>>) -> Result<Self, String> {
        let face = ribbon.faces(&boundary)?;
        if ribbon.leg_dart(output).is_none() {
            return Err(format!("no leg for output slot {output}"));
        }
        let placeholder: Vec<Edge> = ribbon.edge_darts().into_iter().map(|(a, b)| Edge { tail: a, head: b }).collect();
        let given = edges.is_some();
        let mut t = RibbonType { boundary, ribbon, face, edges: edges.unwrap_or(placeholder), output };
        if given {
            let mut have: Vec<(usize, usize)> = t.edges.iter().map(|e| (e.tail.min(e.head), e.tail.max(e.head))).collect();
            have.sort();
            if have != t.ribbon.edge_darts() {
                return Err("edge list does not match the ribbon".into());
            }
        } else {
            t.orient_by_traversal();
        }
        Ok(t)
    }

    fn orient_by_traversal(&mut self) {
        let (tr, parent_side) = self.walk();
        let mut edges = Vec::with_capacity(self.edges.len());
        for &e in &tr.edges {
            let Edge { tail: a, head: b } = self.edges[e];
            let from_dart = parent_side[&e];
            // `from_dart` is the dart the traversal left through
            let other = if from_dart == a { b } else { a };
            if tr.closing.contains(&e) {
                edges.push(Edge { tail: from_dart, head: other });
            } else {
                edges.push(Edge { tail: other, head: from_dart });
            }
        }
        self.edges = edges;
    }

    /// The traversal plus, for every edge, the dart it was entered from.
    fn walk(&self) -> (Traversal, BTreeMap<usize, usize>) {
        let r = &self.ribbon;
        let root = r.vertex[r.leg_dart(self.output).expect("output leg")];
        let bridges: Vec<bool> = (0..self.edges.len()).map(|e| self.is_bridge(e)).collect();
        let mut visited = vec![false; r.vertex_count()];
        let mut used = vec![false; self.edges.len()];
        let mut tr = Traversal { vertices: vec![root], edges: Vec::new(), closing: Vec::new() };
        let mut from = BTreeMap::new();
        visited[root] = true;
        self.dfs(r.leg_dart(self.output).unwrap(), &bridges, &mut visited, &mut used, &mut tr, &mut from);
        (tr, from)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        entry: usize,
        bridges: &[bool],
        visited: &mut [bool],
        used: &mut [bool],
        tr: &mut Traversal,
        from: &mut BTreeMap<usize, usize>,
    ) {
        let r = &self.ribbon;
        let mut cand: Vec<usize> = r.rotated(entry).into_iter().skip(1).filter(|&d| r.twin(d).is_some()).collect();
        cand.sort_by_key(|&d| bridges[self.edge_of_dart(d).unwrap().0]);
        for d in cand {
            let (e, _) = self.edge_of_dart(d).unwrap();
            if used[e] {
                continue;
            }
            used[e] = true;
            tr.edges.push(e);
            from.insert(e, d);
            let t = r.twin(d).unwrap();
            let u = r.vertex[t];
            if visited[u] {
                tr.closing.push(e);
            } else {
                visited[u] = true;
                tr.vertices.push(u);
                self.dfs(t, bridges, visited, used, tr, from);
            }
        }
    }

    fn is_bridge(&self, e: usize) -> bool {
        let Edge { tail, head } = self.edges[e];
        let r = &self.ribbon;
        let (s, goal) = (r.vertex[tail], r.vertex[head]);
        if s == goal {
            return false;
        }
        let mut seen = vec![false; r.vertex_count()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &d in &r.rot[v] {
                if d == tail || d == head {
                    continue;
                }
                if let Some(t) = r.twin(d) {
                    let u = r.vertex[t];
                    if u == goal {
                        return false;
                    }
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        true
    }

    pub fn traversal(&self) -> Traversal {
        self.walk().0
    }

    pub fn leg_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.ribbon.vertex_count()
    }

    pub fn betti(&self) -> i64 {
        self.ribbon.betti()
    }

    pub fn leg_label(&self, slot: usize) -> i64 {
        self.boundary.label(slot)
    }

    /// `n(left of head dart) - n(left of tail dart)`.
    pub fn edge_label(&self, e: usize) -> i64 {
        let Edge { tail, head } = self.edges[e];
        self.boundary.slope(self.face[head]) - self.boundary.slope(self.face[tail])
    }

    /// The edge through `d` and whether `d` is its tail.
    pub fn edge_of_dart(&self, d: usize) -> Option<(usize, bool)> {
        self.edges.iter().enumerate().find_map(|(i, e)| {
            if e.tail == d {
                Some((i, true))
            } else if e.head == d {
                Some((i, false))
            } else {
                None
            }
        })
    }

    /// Label of the strip through dart `d`, oriented into `d`'s vertex.
    pub fn incoming_label(&self, d: usize) -> i64 {
        let b = &self.boundary;
        b.slope(self.face[d]) - b.slope(self.face[self.ribbon.prev_ccw(d)])
    }

    /// Incoming labels at each vertex sum to zero.
    pub fn labels_balance(&self) -> bool {
        self.ribbon.rot.iter().all(|r| r.iter().map(|&d| self.incoming_label(d)).sum::<i64>() == 0)
    }

    pub fn encode(&self) -> Vec<i64> {
        self.ribbon.encode(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let r = &self.ribbon;
        let vertices: Vec<serde_json::Value> = r
            .rot
            .iter()
            .map(|rot| {
                serde_json::Value::Array(
                    rot.iter()
                        .map(|&d| match r.end[d] {
                            End::Leg(s) => serde_json::json!({"leg": s + 1}),
                            End::Twin(_) => {
                                let (e, tail) = self.edge_of_dart(d).unwrap();
                                serde_json::json!({"edge": e, "end": if tail { "tail" } else { "head" }})
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        let edges: Vec<serde_json::Value> = (0..self.edges.len())
            .map(|e| {
                serde_json::json!({
                    "tail": r.vertex[self.edges[e].tail],
                    "head": r.vertex[self.edges[e].head],
                    "label": self.edge_label(e),
                })
            })
            .collect();
        let legs: Vec<serde_json::Value> = (0..self.leg_count())
            .map(|s| serde_json::json!({"slot": s + 1, "vertex": r.vertex[r.leg_dart(s).unwrap()], "label": self.leg_label(s)}))
            .collect();
        serde_json::json!({
            "vertices": vertices,
            "edges": edges,
            "legs": legs,
            "output": self.output + 1,
            "betti": self.betti(),
        })
    }
}

/// Closing edges of the traversal: one per independent cycle, none for trees.
pub fn mark_edges(t: &RibbonType) -> Vec<usize> {
    t.traversal().closing
}

enum Shape {
    Leaf(usize),
    Node(Box<Shape>, Box<Shape>),
}

fn shapes(seq: &[usize]) -> Vec<Shape> {
    if seq.len() == 1 {
        return vec![Shape::Leaf(seq[0])];
    }
    let mut out = Vec::new();
    for k in 1..seq.len() {
        for l in shapes(&seq[..k]) {
            for r in shapes(&seq[k..]) {
                out.push(Shape::Node(Box::new(clone_shape(&l)), Box::new(r)));
            }
        }
    }
    out
}

fn clone_shape(s: &Shape) -> Shape {
    match s {
        Shape::Leaf(x) => Shape::Leaf(*x),
        Shape::Node(a, b) => Shape::Node(Box::new(clone_shape(a)), Box::new(clone_shape(b))),
    }
}

fn attach(r: &mut Ribbon, v: usize, s: &Shape) {
    match s {
        Shape::Leaf(slot) => {
            r.add_dart(v, End::Leg(*slot));
        }
        Shape::Node(a, b) => {
            let w = r.add_vertex();
            let up = r.add_dart(v, End::Leg(usize::MAX));
            let down = r.add_dart(w, End::Leg(usize::MAX));
            r.link(up, down);
            attach(r, w, a);
            attach(r, w, b);
        }
    }
}

/// All planar binary trees whose legs follow the single boundary circle of
/// `boundary`, rooted at the leg of `output`.
fn trees(boundary: &Boundary, output: usize) -> Vec<Ribbon> {
    let mut seq = Vec::new();
    let mut j = boundary.next[output];
    while j != output {
        seq.push(j);
        j = boundary.next[j];
    }
    let mut out = Vec::new();
    for s in shapes(&seq) {
        let Shape::Node(a, b) = s else { continue };
        let mut r = Ribbon::new();
        let root = r.add_vertex();
        r.add_dart(root, End::Leg(output));
        attach(&mut r, root, &a);
        attach(&mut r, root, &b);
        if r.realised_next(boundary.len()) != boundary.next {
            r.mirror();
        }
        debug_assert_eq!(r.realised_next(boundary.len()), boundary.next);
        out.push(r);
    }
    out
}

/// Default output slot: the last slot with a nonzero label.
pub fn default_output(boundary: &Boundary) -> Option<usize> {
    (0..boundary.len()).rev().find(|&s| boundary.label(s) != 0)
}

/// Inserts auxiliary slots `F` after `a_last` and `F'` after `b_last`, joining
/// the two boundary circles into one. Returns the extended boundary and the
/// slot indices of `F` and `F'`.
pub(crate) fn join_cycles(boundary: &Boundary, a_last: usize, b_last: usize) -> (Boundary, usize, usize) {
    let n = boundary.len();
    let (f, fp) = (n, n + 1);
    let ta = boundary.slots[a_last].target;
    let tb = boundary.slots[b_last].target;
    let mut slots = boundary.slots.clone();
    slots.push(Slot { source: ta, target: tb });
    slots.push(Slot { source: tb, target: ta });
    let mut next = boundary.next.clone();
    next.push(boundary.next[b_last]);
    next.push(boundary.next[a_last]);
    next[a_last] = f;
    next[b_last] = fp;
    let ext = Boundary::new(boundary.d, boundary.lagrangians.clone(), slots, next).expect("joined boundary is consistent");
    (ext, f, fp)
}

/// Every trivalent ribbon type for `boundary` (one or two boundary circles),
/// sorted by canonical encoding. One-loop types arise by gluing the two
/// auxiliary legs of a tree for a joined circle; the glued edge is the one
/// that a cut through the cycle would undo.
pub fn enumerate_types(boundary: &Boundary) -> Result<Vec<RibbonType>, TropicalError> {
    let n = boundary.len();
    let b = boundary.loops();
    if b > 1 {
        return Err(TropicalError::Genus(b));
    }
    if 2 * b as i64 + n as i64 - 2 <= 0 {
        return Err(TropicalError::Unstable(n, b));
    }
    let output = default_output(boundary).ok_or_else(|| TropicalError::Boundary("every leg label is zero".into()))?;
    let mut found: BTreeMap<Vec<i64>, Ribbon> = BTreeMap::new();
    if b == 0 {
        for r in trees(boundary, output) {
            found.entry(r.encode(0)).or_insert(r);
        }
    } else {
        let cycles = boundary.cycles();
        for &a_last in &cycles[0] {
            for &b_last in &cycles[1] {
                let (ext, f, fp) = join_cycles(boundary, a_last, b_last);
                for mut r in trees(&ext, output) {
                    let df = r.leg_dart(f).unwrap();
                    let dfp = r.leg_dart(fp).unwrap();
                    r.link(df, dfp);
                    if r.faces(boundary).is_err() {
                        continue;
                    }
                    found.entry(r.encode(0)).or_insert(r);
                }
            }
        }
    }
    found.into_values().map(|r| RibbonType::new(boundary.clone(), r, output, None).map_err(TropicalError::Boundary)).collect()
}
