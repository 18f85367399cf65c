//! Stable graphs: flags grouped into vertices, an involution pairing flags
//! into edges, a genus per vertex and labels on the legs.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use thiserror::Error;

use crate::exec::{self, Mode};

pub const MAX_FLAGS: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("unstable signature n={0}, b={1}")]
    Unstable(usize, u32),
    #[error("{0} flags exceeds the brute-force bound of {MAX_FLAGS}")]
    TooLarge(usize),
}

/// Flags are `0..involution.len()`. A flag fixed by the involution is a leg.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    pub vertices: Vec<Vec<usize>>,
    pub involution: Vec<usize>,
    pub genus: Vec<u32>,
    pub legs: BTreeMap<usize, u32>,
}

/// An edge as its two flags, smaller first.
pub type Edge = (usize, usize);

#[derive(Clone, Debug)]
pub struct Contraction {
    pub source: StableGraph,
    pub contracted: Vec<Edge>,
    pub target: StableGraph,
    /// Surviving source flags to target flags.
    pub flag_map: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl StableGraph {
    /// Builds a graph from vertex blocks, edge pairs, genera and
    /// `(flag, label)` legs. Flags not mentioned in `edges` are legs.
    pub fn from_parts(vertices: Vec<Vec<usize>>, edges: &[Edge], genus: Vec<u32>, legs: &[(usize, u32)]) -> Self {
        let nflags = vertices.iter().map(|b| b.len()).sum();
        let mut involution: Vec<usize> = (0..nflags).collect();
        for &(a, b) in edges {
            involution[a] = b;
            involution[b] = a;
        }
        StableGraph { vertices, involution, genus, legs: legs.iter().copied().collect() }
    }

    /// One vertex of genus `b` with `n` legs labelled `1..=n`.
    pub fn star(n: usize, b: u32) -> Self {
        Self::star_loops(n, 0, b)
    }

    /// One vertex of genus `b`, `n` legs and `loops` self-edges.
    pub fn star_loops(n: usize, loops: usize, b: u32) -> Self {
        let edges: Vec<Edge> = (0..loops).map(|i| (n + 2 * i, n + 2 * i + 1)).collect();
        let legs: Vec<(usize, u32)> = (0..n).map(|i| (i, i as u32 + 1)).collect();
        Self::from_parts(vec![(0..n + 2 * loops).collect()], &edges, vec![b], &legs)
    }

    /// Two stars with `n1` and `n2` flags joined along one edge. Legs are
    /// numbered `1..n1-1` on the first vertex, then on through the second.
    pub fn edge_join(n1: usize, b1: u32, n2: usize, b2: u32) -> Self {
        let first: Vec<usize> = (0..n1).collect();
        let second: Vec<usize> = (n1..n1 + n2).collect();
        let mut legs = Vec::new();
        let mut label = 1;
        for f in (0..n1 - 1).chain(n1 + 1..n1 + n2) {
            legs.push((f, label));
            label += 1;
        }
        Self::from_parts(vec![first, second], &[(n1 - 1, n1)], vec![b1, b2], &legs)
    }

    pub fn flag_count(&self) -> usize {
        self.involution.len()
    }

    pub fn vertex_of(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.flag_count()];
        for (v, block) in self.vertices.iter().enumerate() {
            for &f in block {
                if f < out.len() {
                    out[f] = v;
                }
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.flag_count()).filter(|&f| self.involution[f] > f).map(|f| (f, self.involution[f])).collect()
    }

    pub fn leg_count(&self) -> usize {
        (0..self.flag_count()).filter(|&f| self.involution[f] == f).count()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.vertices[v].len()
    }

    /// All invariants, reported rather than enforced.
    pub fn validate(&self) -> Validation {
        let mut bad = Vec::new();
        let nf = self.flag_count();
        let mut seen = vec![0usize; nf];
        for block in &self.vertices {
            for &f in block {
                if f >= nf {
                    bad.push(format!("flag {f} out of range"));
                } else {
                    seen[f] += 1;
                }
            }
        }
        for (f, &c) in seen.iter().enumerate() {
            if c != 1 {
                bad.push(format!("flag {f} lies in {c} vertices"));
            }
        }
        if self.genus.len() != self.vertices.len() {
            bad.push("genus list does not match vertex count".into());
        }
        for f in 0..nf {
            let s = self.involution[f];
            if s >= nf || self.involution[s] != f {
                bad.push(format!("involution fails at flag {f}"));
            }
        }
        if !bad.is_empty() {
            return Validation { valid: false, violations: bad };
        }
        if !self.connected() {
            bad.push("graph is disconnected".into());
        }
        for (v, block) in self.vertices.iter().enumerate() {
            if 2 * self.genus[v] as i64 + block.len() as i64 - 2 <= 0 {
                bad.push(format!("vertex {v} is unstable"));
            }
        }
        let legs: BTreeSet<usize> = (0..nf).filter(|&f| self.involution[f] == f).collect();
        let labelled: BTreeSet<usize> = self.legs.keys().copied().collect();
        if legs != labelled {
            bad.push("leg labels do not match the fixed flags".into());
        }
        let labels: BTreeSet<u32> = self.legs.values().copied().collect();
        let expected: BTreeSet<u32> = (1..=legs.len() as u32).collect();
        if labels != expected || self.legs.len() != legs.len() {
            bad.push("leg labels are not a bijection onto 1..n".into());
        }
        Validation { valid: bad.is_empty(), violations: bad }
    }

    fn connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let vof = self.vertex_of();
        let mut reached = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(v) = stack.pop() {
            for &f in &self.vertices[v] {
                let u = vof[self.involution[f]];
                if !reached[u] {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    fn require_valid(&self) -> Result<(), GraphError> {
        let v = self.validate();
        if v.valid {
            Ok(())
        } else {
            Err(GraphError::Invalid(v.violations.join("; ")))
        }
    }

    /// First Betti number of the underlying graph.
    pub fn betti(&self) -> u32 {
        (self.edges().len() + 1 - self.vertices.len()) as u32
    }

    pub fn total_genus(&self) -> Result<u32, GraphError> {
        self.require_valid()?;
        Ok(self.genus.iter().sum::<u32>() + self.betti())
    }

    /// `|Edge| = b(G) - 1 + sum_v (1 - b(v))`.
    pub fn edge_count_identity(&self) -> bool {
        let Ok(b) = self.total_genus() else {
            return false;
        };
        let rhs: i64 = b as i64 - 1 + self.genus.iter().map(|&g| 1 - g as i64).sum::<i64>();
        self.edges().len() as i64 == rhs
    }

    /// Collapses the edges in `edges`, merging endpoints. An edge whose ends
    /// are already merged raises the merged vertex's genus by one.
    pub fn contract(&self, edges: &[Edge]) -> Result<Contraction, GraphError> {
        let own: BTreeSet<Edge> = self.edges().into_iter().collect();
        let mut cut = BTreeSet::new();
        for &(a, b) in edges {
            let e = (a.min(b), a.max(b));
            if !own.contains(&e) {
                return Err(GraphError::NotAnEdge(a, b));
            }
            cut.insert(e);
        }
        let vof = self.vertex_of();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut extra = vec![0u32; self.vertices.len()];
        for &(a, b) in &cut {
            let (ra, rb) = (find(&mut parent, vof[a]), find(&mut parent, vof[b]));
            if ra == rb {
                extra[ra] += 1;
            } else {
                parent[rb] = ra;
                extra[ra] += extra[rb];
                extra[rb] = 0;
            }
        }
        let roots: Vec<usize> = (0..self.vertices.len()).filter(|&v| find(&mut parent, v) == v).collect();
        let dropped: BTreeSet<usize> = cut.iter().flat_map(|&(a, b)| [a, b]).collect();
        let survivors: Vec<usize> = (0..self.flag_count()).filter(|f| !dropped.contains(f)).collect();
        let flag_map: BTreeMap<usize, usize> = survivors.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut vertices = Vec::new();
        let mut genus = Vec::new();
        for &r in &roots {
            let mut block = Vec::new();
            let mut g = extra[r];
            for v in 0..self.vertices.len() {
                if find(&mut parent, v) == r {
                    g += self.genus[v];
                    block.extend(self.vertices[v].iter().filter_map(|f| flag_map.get(f).copied()));
                }
            }
            block.sort_unstable();
            vertices.push(block);
            genus.push(g);
        }
        let involution = survivors.iter().map(|&f| flag_map[&self.involution[f]]).collect();
        let legs = self.legs.iter().map(|(f, l)| (flag_map[f], *l)).collect();
        let target = StableGraph { vertices, involution, genus, legs };
        Ok(Contraction { source: self.clone(), contracted: cut.into_iter().collect(), target, flag_map })
    }

    fn vertex_key(&self, v: usize) -> (u32, usize, Vec<u32>) {
        let mut legs: Vec<u32> = self.vertices[v].iter().filter_map(|f| self.legs.get(f).copied()).collect();
        legs.sort_unstable();
        (self.genus[v], self.valence(v), legs)
    }

    fn multiplicities(&self) -> Vec<Vec<u32>> {
        let n = self.vertices.len();
        let vof = self.vertex_of();
        let mut m = vec![vec![0u32; n]; n];
        for (a, b) in self.edges() {
            let (u, v) = (vof[a], vof[b]);
            m[u][v] += 1;
            if u != v {
                m[v][u] += 1;
            }
        }
        m
    }

    fn encode(&self, order: &[usize], mult: &[Vec<u32>]) -> Vec<u32> {
        let mut code = Vec::new();
        for &v in order {
            let (g, val, legs) = self.vertex_key(v);
            code.push(g);
            code.push(val as u32);
            code.push(legs.len() as u32);
            code.extend(legs);
        }
        for i in 0..order.len() {
            for j in i..order.len() {
                code.push(mult[order[i]][order[j]]);
            }
        }
        code
    }

    /// Lexicographically least encoding over vertex orders that respect the
    /// (genus, valence, legs) classes, and the vertex order achieving it.
    fn best_order(&self) -> (Vec<u32>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        idx.sort_by_key(|&v| self.vertex_key(v));
        let groups: Vec<Vec<usize>> = idx.into_iter().chunk_by(|&v| self.vertex_key(v)).into_iter().map(|(_, g)| g.collect()).collect();
        let mult = self.multiplicities();
        let choices: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| g.iter().copied().permutations(g.len()).collect()).collect();
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        for combo in choices.iter().map(|c| c.iter()).multi_cartesian_product() {
            let order: Vec<usize> = combo.into_iter().flatten().copied().collect();
            let code = self.encode(&order, &mult);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                best = Some((code, order));
            }
        }
        best.unwrap_or_else(|| (Vec::new(), Vec::new()))
    }

    /// Canonical representative of the leg-labelled isomorphism class.
    pub fn canonical(&self) -> Result<StableGraph, GraphError> {
        if self.flag_count() > MAX_FLAGS {
            return Err(GraphError::TooLarge(self.flag_count()));
        }
        self.require_valid()?;
        let (_, order) = self.best_order();
        let mult = self.multiplicities();
        let n = order.len();
        // flags per vertex: legs by label, loops, then edges by neighbour
        let mut vertices = Vec::new();
        let mut legs = BTreeMap::new();
        let mut toward: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; n];
        let mut next = 0;
        for (i, &v) in order.iter().enumerate() {
            let mut block = Vec::new();
            for l in self.vertex_key(v).2 {
                legs.insert(next, l);
                block.push(next);
                next += 1;
            }
            for (j, &u) in order.iter().enumerate() {
                let k = if i == j { 2 * mult[v][v] } else { mult[v][u] } as usize;
                for _ in 0..k {
                    toward[i][j].push(next);
                    block.push(next);
                    next += 1;
                }
            }
            vertices.push(block);
        }
        let mut involution: Vec<usize> = (0..next).collect();
        for i in 0..n {
            for c in toward[i][i].chunks(2) {
                involution[c[0]] = c[1];
                involution[c[1]] = c[0];
            }
            for j in i + 1..n {
                for (&a, &b) in toward[i][j].iter().zip(&toward[j][i]) {
                    involution[a] = b;
                    involution[b] = a;
                }
            }
        }
        let genus = order.iter().map(|&v| self.genus[v]).collect();
        Ok(StableGraph { vertices, involution, genus, legs })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let genus: serde_json::Map<String, serde_json::Value> =
            self.genus.iter().enumerate().map(|(v, g)| (v.to_string(), (*g).into())).collect();
        let legs: serde_json::Map<String, serde_json::Value> = self.legs.iter().map(|(f, l)| ((f + 1).to_string(), (*l).into())).collect();
        serde_json::json!({
            "flags": (1..=self.flag_count()).collect::<Vec<_>>(),
            "vertices": self.vertices.iter().map(|b| b.iter().map(|f| f + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "involution": self.edges().iter().map(|(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
            "genus": genus,
            "legs": legs,
        })
    }
}

/// Leg-label-preserving isomorphism test.
pub fn are_isomorphic(a: &StableGraph, b: &StableGraph) -> Result<bool, GraphError> {
    for g in [a, b] {
        if g.flag_count() > MAX_FLAGS {
            return Err(GraphError::TooLarge(g.flag_count()));
        }
    }
    if a.flag_count() != b.flag_count() || a.vertices.len() != b.vertices.len() || a.edges().len() != b.edges().len() {
        return Ok(false);
    }
    Ok(a.best_order().0 == b.best_order().0)
}

fn multisets(pairs: &[(usize, usize)], k: usize) -> Vec<Vec<(usize, usize)>> {
    pairs.iter().copied().combinations_with_replacement(k).collect()
}

/// One canonical representative per class with `n` legs and total genus `b`,
/// restricted to at most `max_flags` flags.
pub fn enumerate_iso_classes(n: usize, b: u32, max_flags: usize, mode: Mode) -> Result<Vec<StableGraph>, GraphError> {
    if 2 * b as i64 + n as i64 - 2 <= 0 {
        return Err(GraphError::Unstable(n, b));
    }
    if max_flags > MAX_FLAGS {
        return Err(GraphError::TooLarge(max_flags));
    }
    let mut jobs = Vec::new();
    for nv in 1..=(2 * b as usize + n - 2) {
        for gens in (0..nv).map(|_| 0..=b).multi_cartesian_product() {
            let sg: u32 = gens.iter().sum();
            if sg > b || gens.windows(2).any(|w| w[0] < w[1]) {
                continue;
            }
            let ne = b as usize + nv - 1 - sg as usize;
            if n + 2 * ne > max_flags {
                continue;
            }
            let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|i| (i..nv).map(move |j| (i, j))).collect();
            for edges in multisets(&pairs, ne) {
                jobs.push((gens.clone(), edges));
            }
        }
    }
    let found = exec::flat_map(mode, &jobs, |(gens, edges)| {
        let nv = gens.len();
        let mut out = Vec::new();
        let mut deg = vec![0usize; nv];
        for &(i, j) in edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        for assign in (0..n).map(|_| 0..nv).multi_cartesian_product() {
            let mut d = deg.clone();
            for &v in &assign {
                d[v] += 1;
            }
            if (0..nv).any(|v| 2 * gens[v] as usize + d[v] < 3) {
                continue;
            }
            let g = build(gens, edges, &assign);
            if g.validate().valid {
                out.push(g.canonical().expect("valid by construction"));
            }
        }
        out
    });
    let set: BTreeSet<StableGraph> = found.into_iter().collect();
    Ok(set.into_iter().collect())
}

fn build(gens: &[u32], edges: &[(usize, usize)], assign: &[usize]) -> StableGraph {
    let mut vertices = vec![Vec::new(); gens.len()];
    let mut next = 0;
    let mut legs = Vec::new();
    for (l, &v) in assign.iter().enumerate() {
        vertices[v].push(next);
        legs.push((next, l as u32 + 1));
        next += 1;
    }
    let mut pairs = Vec::new();
    for &(i, j) in edges {
        vertices[i].push(next);
        vertices[j].push(next + 1);
        pairs.push((next, next + 1));
        next += 2;
    }
    StableGraph::from_parts(vertices, &pairs, gens.to_vec(), &legs)
}
