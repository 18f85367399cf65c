//! Ribbon graphs as darts with counterclockwise rotations.

use std::collections::VecDeque;

use super::Boundary;

/// What sits at the far end of a dart: an external corner (the slot index of
/// a leg) or the opposite dart of an internal edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Leg(usize),
    Twin(usize),
}

/// Every dart points out of its vertex; `rot[v]` lists the darts at `v`
/// counterclockwise.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ribbon {
    pub rot: Vec<Vec<usize>>,
    pub vertex: Vec<usize>,
    pub end: Vec<End>,
}

impl Ribbon {
    pub fn new() -> Self {
        Ribbon::default()
    }

    pub fn add_vertex(&mut self) -> usize {
        self.rot.push(Vec::new());
        self.rot.len() - 1
    }

    pub fn add_dart(&mut self, v: usize, end: End) -> usize {
        let d = self.end.len();
        self.end.push(end);
        self.vertex.push(v);
        self.rot[v].push(d);
        d
    }

    pub fn link(&mut self, a: usize, b: usize) {
        self.end[a] = End::Twin(b);
        self.end[b] = End::Twin(a);
    }

    pub fn vertex_count(&self) -> usize {
        self.rot.len()
    }

    pub fn dart_count(&self) -> usize {
        self.end.len()
    }

    fn pos(&self, d: usize) -> usize {
        self.rot[self.vertex[d]].iter().position(|&x| x == d).expect("dart not in its rotation")
    }

    pub fn next_ccw(&self, d: usize) -> usize {
        let r = &self.rot[self.vertex[d]];
        r[(self.pos(d) + 1) % r.len()]
    }

    pub fn prev_ccw(&self, d: usize) -> usize {
        let r = &self.rot[self.vertex[d]];
        r[(self.pos(d) + r.len() - 1) % r.len()]
    }

    pub fn twin(&self, d: usize) -> Option<usize> {
        match self.end[d] {
            End::Twin(t) => Some(t),
            End::Leg(_) => None,
        }
    }

    pub fn leg(&self, d: usize) -> Option<usize> {
        match self.end[d] {
            End::Leg(s) => Some(s),
            End::Twin(_) => None,
        }
    }

    pub fn leg_dart(&self, slot: usize) -> Option<usize> {
        self.end.iter().position(|e| *e == End::Leg(slot))
    }

    /// `(slot, dart)` for every leg, by slot.
    pub fn legs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.dart_count()).filter_map(|d| self.leg(d).map(|s| (s, d))).collect();
        out.sort();
        out
    }

    /// Internal edges as dart pairs `(a, b)` with `a < b`.
    pub fn edge_darts(&self) -> Vec<(usize, usize)> {
        (0..self.dart_count()).filter_map(|a| self.twin(a).filter(|&b| a < b).map(|b| (a, b))).collect()
    }

    pub fn is_trivalent(&self) -> bool {
        self.rot.iter().all(|r| r.len() == 3)
    }

    /// Vertex sets of the connected components, each sorted, in order of
    /// their smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.vertex_count()];
        let mut out = Vec::new();
        for s in 0..self.vertex_count() {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            comp[s] = c;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &d in &self.rot[v] {
                    if let Some(t) = self.twin(d) {
                        let u = self.vertex[t];
                        if comp[u] == usize::MAX {
                            comp[u] = c;
                            members.push(u);
                            stack.push(u);
                        }
                    }
                }
            }
            members.sort();
            out.push(members);
        }
        out
    }

    /// First Betti number of a connected ribbon graph.
    pub fn betti(&self) -> i64 {
        self.edge_darts().len() as i64 - self.vertex_count() as i64 + self.components().len() as i64
    }

    /// Walks the boundary arc that ends at leg `j`: starting from the sector
    /// just clockwise of `j`, returns the darts whose left side lies on that
    /// arc together with the leg the arc starts from.
    pub fn arc_into(&self, leg_dart: usize) -> Option<(Vec<usize>, usize)> {
        let mut darts = Vec::new();
        let mut s = self.prev_ccw(leg_dart);
        for _ in 0..=self.dart_count() {
            darts.push(s);
            match self.end[s] {
                End::Leg(_) => return Some((darts, s)),
                End::Twin(t) => s = self.prev_ccw(t),
            }
        }
        None
    }

    /// Lagrangian index on the left of every dart, read off from the
    /// boundary arcs between consecutive legs. Fails when an arc does not
    /// match `boundary.next` or a face carries no leg.
    pub fn faces(&self, boundary: &Boundary) -> Result<Vec<usize>, String> {
        let mut face = vec![usize::MAX; self.dart_count()];
        for (j, lj) in self.legs() {
            let (darts, li) = self.arc_into(lj).ok_or("boundary walk does not close")?;
            let i = self.leg(li).expect("arc ends on a leg");
            if boundary.next[i] != j {
                return Err(format!(
                    "arc into slot {j} starts at slot {i}, expected slot {}",
                    boundary.next.iter().position(|&x| x == j).unwrap_or(usize::MAX)
                ));
            }
            let lag = boundary.slots[j].source;
            for s in darts {
                if face[s] != usize::MAX {
                    return Err(format!("dart {s} lies on two arcs"));
                }
                face[s] = lag;
            }
        }
        if face.contains(&usize::MAX) {
            return Err("a face carries no leg".into());
        }
        Ok(face)
    }

    /// The boundary permutation realised by the rotations: `next[i] = j`
    /// when the arc into leg `j` starts at leg `i`. Indexed by slot; slots
    /// without legs map to themselves.
    pub fn realised_next(&self, slots: usize) -> Vec<usize> {
        let mut next: Vec<usize> = (0..slots).collect();
        for (j, lj) in self.legs() {
            if let Some((_, li)) = self.arc_into(lj) {
                next[self.leg(li).unwrap()] = j;
            }
        }
        next
    }

    pub fn mirror(&mut self) {
        for r in self.rot.iter_mut() {
            r.reverse();
        }
    }

    /// Breadth-first encoding from the leg of `slot`; equal encodings mean
    /// isomorphic ribbon graphs with the same leg slots.
    pub fn encode(&self, slot: usize) -> Vec<i64> {
        let Some(d0) = self.leg_dart(slot) else {
            return Vec::new();
        };
        let mut id = vec![usize::MAX; self.vertex_count()];
        let mut entry = vec![usize::MAX; self.vertex_count()];
        let mut out = Vec::new();
        let mut q = VecDeque::new();
        let v0 = self.vertex[d0];
        id[v0] = 0;
        entry[v0] = d0;
        q.push_back(v0);
        let mut count = 1;
        while let Some(v) = q.pop_front() {
            let r = &self.rot[v];
            let k = self.pos(entry[v]);
            out.push(-1_000_000 - r.len() as i64);
            for i in 0..r.len() {
                let d = r[(k + i) % r.len()];
                match self.end[d] {
                    End::Leg(s) => out.push(-(s as i64) - 1),
                    End::Twin(t) => {
                        let u = self.vertex[t];
                        if id[u] == usize::MAX {
                            id[u] = count;
                            entry[u] = t;
                            count += 1;
                            q.push_back(u);
                        }
                        let ru = self.rot[u].len();
                        let off = (self.pos(t) + ru - self.pos(entry[u])) % ru;
                        out.push((id[u] * 16 + off) as i64);
                    }
                }
            }
        }
        out
    }

    /// Whitehead move on the edge with darts `x` (at `X`) and `y` (at `Y`):
    /// with rotations `X = (x, a1, a2)` and `Y = (y, b1, b2)` the result is
    /// `X = (x, a2, b1)` and `Y = (y, b2, a1)`, the other planar splitting of
    /// the quadrivalent vertex `(a1, a2, b1, b2)`.
    pub fn whitehead(&mut self, x: usize, y: usize) {
        let (vx, vy) = (self.vertex[x], self.vertex[y]);
        assert_ne!(vx, vy, "whitehead move on a loop");
        let rx = self.rotated(x);
        let ry = self.rotated(y);
        assert!(rx.len() == 3 && ry.len() == 3, "whitehead move needs trivalent ends");
        let (a1, a2, b1, b2) = (rx[1], rx[2], ry[1], ry[2]);
        self.rot[vx] = vec![x, a2, b1];
        self.rot[vy] = vec![y, b2, a1];
        self.vertex[b1] = vx;
        self.vertex[a1] = vy;
    }

    /// Rotation at the vertex of `d`, starting from `d`.
    pub fn rotated(&self, d: usize) -> Vec<usize> {
        let r = &self.rot[self.vertex[d]];
        let k = self.pos(d);
        (0..r.len()).map(|i| r[(k + i) % r.len()]).collect()
    }

    /// Cuts the edge through dart `a` into two legs with the given slots.
    pub fn cut(&mut self, a: usize, slot_a: usize, slot_b: usize) {
        let b = self.twin(a).expect("cut needs an internal edge");
        self.end[a] = End::Leg(slot_a);
        self.end[b] = End::Leg(slot_b);
    }

    /// Restricts to the vertices `keep` (a union of components), renumbering
    /// vertices and darts. Returns the new ribbon and the old-to-new dart map.
    pub fn restrict(&self, keep: &[usize]) -> (Ribbon, Vec<Option<usize>>) {
        let mut out = Ribbon::new();
        let mut dmap = vec![None; self.dart_count()];
        for &v in keep {
            let nv = out.add_vertex();
            for &d in &self.rot[v] {
                dmap[d] = Some(out.add_dart(nv, self.end[d]));
            }
        }
        for e in out.end.iter_mut() {
            if let End::Twin(t) = e {
                *t = dmap[*t].expect("restriction cuts an edge");
            }
        }
        (out, dmap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod(order: [usize; 3]) -> Ribbon {
        let mut r = Ribbon::new();
        let v = r.add_vertex();
        for s in order {
            r.add_dart(v, End::Leg(s));
        }
        r
    }

    #[test]
    fn tripod_arcs() {
        let r = tripod([0, 1, 2]);
        // the arc into leg 0 starts just clockwise of it, at leg 2
        assert_eq!(r.realised_next(3), vec![1, 2, 0]);
        let mut m = r.clone();
        m.mirror();
        assert_eq!(m.realised_next(3), vec![2, 0, 1]);
        assert_eq!(r.encode(0), tripod([1, 2, 0]).encode(0));
        assert_ne!(r.encode(0), m.encode(0));
    }

    #[test]
    fn whitehead_twice_is_an_isomorphism() {
        let mut r = Ribbon::new();
        let x = r.add_vertex();
        let y = r.add_vertex();
        let dx = r.add_dart(x, End::Leg(9));
        r.add_dart(x, End::Leg(0));
        r.add_dart(x, End::Leg(1));
        let dy = r.add_dart(y, End::Leg(9));
        r.add_dart(y, End::Leg(2));
        r.add_dart(y, End::Leg(3));
        r.link(dx, dy);
        let before = r.realised_next(4);
        let mut w = r.clone();
        w.whitehead(dx, dy);
        assert_eq!(w.realised_next(4), before);
        assert_ne!(w.encode(0), r.encode(0));
        w.whitehead(dx, dy);
        assert_eq!(w.encode(0), r.encode(0));
    }
}
