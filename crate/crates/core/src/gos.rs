//! Graphs of spaces: assembly of the total space from vertex-spaces and
//! thick edge-spaces, realizations of partial local isometries, E-parallelism
//! classes, strictness, horizontal quotients, induced graphs of links,
//! controlledness, and the remote-osculation and empty-corner diagnostics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::complex::{
    mid_cell, square_corner_sides, CellId, CubeComplex, Cube3, Edge, EdgeRef, FaceRef, LinkCellRef,
    LinkComplex, Square,
};
use crate::error::Error;
use crate::hyperplane::{
    self, crossing, edge_parallelism_classes, hyperplanes, is_square_corner_pair,
};
use crate::map::{validate_partial_local_isometry, CubicalMap, PartialLocalIsometry};
use crate::sym::{Dir, SquareSym};

// ---------------------------------------------------------------------------
// Underlying graphs
// ---------------------------------------------------------------------------

/// Undirected graph with loops and multi-edges; each edge keeps an initial
/// and a terminal vertex so attaching data can refer to its two ends.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UGraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeMap<String, (String, String)>,
}

impl UGraph {
    pub fn bouquet(n: usize) -> UGraph {
        let mut g = UGraph::default();
        g.vertices.insert("v".to_string());
        for j in 1..=n {
            g.edges.insert(format!("g{j}"), ("v".to_string(), "v".to_string()));
        }
        g
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (e, (a, b)) in &self.edges {
            if !self.vertices.contains(a) || !self.vertices.contains(b) {
                return Err(Error::InvalidGos(format!("edge `{e}` has an unknown endpoint")));
            }
        }
        Ok(())
    }

    pub fn is_tree(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        if self.edges.len() + 1 != self.vertices.len() {
            return false;
        }
        // connected?
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in self.edges.values() {
            if a == b {
                return false;
            }
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.vertices.iter().next().unwrap().as_str()];
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                if let Some(ns) = adj.get(v) {
                    stack.extend(ns);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    pub fn is_bouquet(&self) -> bool {
        self.vertices.len() == 1 && self.edges.values().all(|(a, b)| a == b)
    }
}

// ---------------------------------------------------------------------------
// Graphs of spaces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpace {
    pub space: CubeComplex,
    /// attaching map into the vertex-space at the initial vertex (level -1)
    pub tau1: CubicalMap,
    /// attaching map into the vertex-space at the terminal vertex (level +1)
    pub tau2: CubicalMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOfSpaces {
    pub graph: UGraph,
    pub vertex_spaces: BTreeMap<String, CubeComplex>,
    pub edge_spaces: BTreeMap<String, EdgeSpace>,
}

impl GraphOfSpaces {
    pub fn validate(&self) -> Result<(), Error> {
        self.graph.validate()?;
        for v in &self.graph.vertices {
            let Some(x) = self.vertex_spaces.get(v) else {
                return Err(Error::InvalidGos(format!("vertex `{v}` has no space")));
            };
            if !x.validate().is_ok() {
                return Err(Error::InvalidGos(format!("vertex-space of `{v}` is invalid")));
            }
        }
        for (e, (v1, v2)) in &self.graph.edges {
            let Some(es) = self.edge_spaces.get(e) else {
                return Err(Error::InvalidGos(format!("edge `{e}` has no space")));
            };
            if !es.space.validate().is_ok() {
                return Err(Error::InvalidGos(format!("edge-space of `{e}` is invalid")));
            }
            if es.space.dim() > 2 {
                return Err(Error::DimensionCap(format!("edge-space of `{e}` has dimension > 2")));
            }
            if !es.space.is_connected() {
                return Err(Error::InvalidGos(format!("edge-space of `{e}` is not connected")));
            }
            for (tau, v, side) in [(&es.tau1, v1, 1), (&es.tau2, v2, 2)] {
                if tau.domain != es.space {
                    return Err(Error::InvalidGos(format!("tau{side} of `{e}`: domain mismatch")));
                }
                if tau.codomain != self.vertex_spaces[v] {
                    return Err(Error::InvalidGos(format!("tau{side} of `{e}`: codomain mismatch")));
                }
                tau.validate().map_err(|err| {
                    Error::InvalidGos(format!("tau{side} of `{e}` is not cubical: {err}"))
                })?;
                if !tau.is_injective() {
                    return Err(Error::InvalidGos(format!("tau{side} of `{e}` is not injective")));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Total spaces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Vertex { vertex: String, cell: CellId },
    EdgeMid { edge: String, cell: CellId },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TotalSpace {
    pub gos: GraphOfSpaces,
    pub complex: CubeComplex,
    pub provenance: BTreeMap<CellId, Provenance>,
}

pub fn vcell(v: &str, c: &str) -> CellId {
    format!("{v}.{c}")
}

pub fn mcell(e: &str, c: &str) -> CellId {
    format!("{e}.{}", mid_cell(c))
}

impl TotalSpace {
    /// Projection to the underlying graph.
    pub fn project(&self, cell: &str) -> Option<&str> {
        match self.provenance.get(cell)? {
            Provenance::Vertex { vertex, .. } => Some(vertex),
            Provenance::EdgeMid { edge, .. } => Some(edge),
        }
    }

    pub fn vertex_cells<'a>(&'a self, v: &'a str) -> impl Iterator<Item = (&'a CellId, &'a Provenance)> + 'a {
        self.provenance.iter().filter(move |(_, p)| match p {
            Provenance::Vertex { vertex, .. } => vertex == v,
            _ => false,
        })
    }
}

/// Glue the thick edge-spaces onto the vertex-spaces.
pub fn assemble(gos: &GraphOfSpaces) -> Result<TotalSpace, Error> {
    gos.validate()?;
    let mut x = CubeComplex::default();
    let mut prov: BTreeMap<CellId, Provenance> = BTreeMap::new();

    let mut record = |id: CellId, p: Provenance| -> Result<(), Error> {
        if prov.insert(id.clone(), p).is_some() {
            return Err(Error::InvalidGos(format!("total-space cell id `{id}` collides")));
        }
        Ok(())
    };

    for (v, xv) in &gos.vertex_spaces {
        for c in &xv.vertices {
            x.vertices.insert(vcell(v, c));
            record(vcell(v, c), Provenance::Vertex { vertex: v.clone(), cell: c.clone() })?;
        }
        for (id, e) in &xv.edges {
            x.edges.insert(
                vcell(v, id),
                Edge { ends: [vcell(v, &e.ends[0]), vcell(v, &e.ends[1])] },
            );
            record(vcell(v, id), Provenance::Vertex { vertex: v.clone(), cell: id.clone() })?;
        }
        for (id, s) in &xv.squares {
            x.squares.insert(
                vcell(v, id),
                Square {
                    corners: s.corners.clone().map(|c| vcell(v, &c)),
                    sides: s.sides.clone().map(|r| EdgeRef { edge: vcell(v, &r.edge), dir: r.dir }),
                },
            );
            record(vcell(v, id), Provenance::Vertex { vertex: v.clone(), cell: id.clone() })?;
        }
        for (id, c) in &xv.cubes3 {
            x.cubes3.insert(
                vcell(v, id),
                Cube3 {
                    corners: c.corners.clone().map(|w| vcell(v, &w)),
                    edges: c.edges.clone().map(|r| EdgeRef { edge: vcell(v, &r.edge), dir: r.dir }),
                    faces: c
                        .faces
                        .clone()
                        .map(|f| FaceRef { square: vcell(v, &f.square), sym: f.sym }),
                },
            );
            record(vcell(v, id), Provenance::Vertex { vertex: v.clone(), cell: id.clone() })?;
        }
    }

    for (e, (v1, v2)) in &gos.graph.edges {
        let es = &gos.edge_spaces[e];
        let t1v = |c: &str| vcell(v1, &es.tau1.vertex_map[c]);
        let t2v = |c: &str| vcell(v2, &es.tau2.vertex_map[c]);
        for c in &es.space.vertices {
            x.edges.insert(mcell(e, c), Edge { ends: [t1v(c), t2v(c)] });
            record(mcell(e, c), Provenance::EdgeMid { edge: e.clone(), cell: c.clone() })?;
        }
        for (id, ec) in &es.space.edges {
            let (e1, d1) = &es.tau1.edge_map[id];
            let (e2, d2) = &es.tau2.edge_map[id];
            x.squares.insert(
                mcell(e, id),
                Square {
                    corners: [
                        t1v(&ec.ends[0]),
                        t1v(&ec.ends[1]),
                        t2v(&ec.ends[0]),
                        t2v(&ec.ends[1]),
                    ],
                    sides: [
                        EdgeRef { edge: vcell(v1, e1), dir: *d1 },
                        EdgeRef { edge: vcell(v2, e2), dir: *d2 },
                        EdgeRef { edge: mcell(e, &ec.ends[0]), dir: 1 },
                        EdgeRef { edge: mcell(e, &ec.ends[1]), dir: 1 },
                    ],
                },
            );
            record(mcell(e, id), Provenance::EdgeMid { edge: e.clone(), cell: id.clone() })?;
        }
        for (id, sc) in &es.space.squares {
            let (s1, g1) = &es.tau1.square_map[id];
            let (s2, g2) = &es.tau2.square_map[id];
            let mut corners: Vec<CellId> = Vec::with_capacity(8);
            for k in 0..4usize {
                corners.push(t1v(&sc.corners[k]));
            }
            for k in 0..4usize {
                corners.push(t2v(&sc.corners[k]));
            }
            let side_img = |tau: &CubicalMap, v: &str, side: usize| -> EdgeRef {
                let r = &sc.sides[side];
                let (ei, di) = &tau.edge_map[&r.edge];
                EdgeRef { edge: vcell(v, ei), dir: di * r.dir }
            };
            let edges: [EdgeRef; 12] = [
                // x-edges (y,z)
                side_img(&es.tau1, v1, 0),
                side_img(&es.tau1, v1, 1),
                side_img(&es.tau2, v2, 0),
                side_img(&es.tau2, v2, 1),
                // y-edges (x,z)
                side_img(&es.tau1, v1, 2),
                side_img(&es.tau1, v1, 3),
                side_img(&es.tau2, v2, 2),
                side_img(&es.tau2, v2, 3),
                // z-edges (x,y)
                EdgeRef { edge: mcell(e, &sc.corners[0]), dir: 1 },
                EdgeRef { edge: mcell(e, &sc.corners[1]), dir: 1 },
                EdgeRef { edge: mcell(e, &sc.corners[2]), dir: 1 },
                EdgeRef { edge: mcell(e, &sc.corners[3]), dir: 1 },
            ];
            let side_face = |side: usize| -> FaceRef {
                let r = &sc.sides[side];
                let sym = if r.dir == 1 {
                    SquareSym::identity()
                } else {
                    SquareSym { perm: [0, 1], flip: [true, false] }
                };
                FaceRef { square: mcell(e, &r.edge), sym }
            };
            let faces: [FaceRef; 6] = [
                side_face(2),
                side_face(3),
                side_face(0),
                side_face(1),
                FaceRef { square: vcell(v1, s1), sym: *g1 },
                FaceRef { square: vcell(v2, s2), sym: *g2 },
            ];
            x.cubes3.insert(
                mcell(e, id),
                Cube3 { corners: corners.try_into().unwrap(), edges, faces },
            );
            record(mcell(e, id), Provenance::EdgeMid { edge: e.clone(), cell: id.clone() })?;
        }
    }

    let report = x.validate();
    if !report.is_ok() {
        return Err(Error::InvalidGos(format!(
            "assembled total space is invalid: {:?}",
            report.violations.first()
        )));
    }
    Ok(TotalSpace { gos: gos.clone(), complex: x, provenance: prov })
}

/// The realization of `(Y, O)`: one vertex carrying `Y`, one loop per map,
/// with the loop's edge-space the map's domain, attached by inclusion at the
/// initial end and by the map at the terminal end.
pub fn realization(y: &CubeComplex, maps: &[PartialLocalIsometry]) -> Result<GraphOfSpaces, Error> {
    for phi in maps {
        let report = validate_partial_local_isometry(y, phi);
        if !report.is_ok() {
            return Err(Error::Precondition(format!(
                "partial local isometry `{}` is invalid: {}",
                phi.name,
                report.failures.join("; ")
            )));
        }
    }
    let graph = UGraph::bouquet(maps.len());
    let mut vertex_spaces = BTreeMap::new();
    vertex_spaces.insert("v".to_string(), y.clone());
    let mut edge_spaces = BTreeMap::new();
    for (j, phi) in maps.iter().enumerate() {
        let tau1 = CubicalMap::inclusion(y, &phi.domain);
        edge_spaces.insert(
            format!("g{}", j + 1),
            EdgeSpace { space: tau1.domain.clone(), tau1, tau2: phi.map.clone() },
        );
    }
    Ok(GraphOfSpaces { graph, vertex_spaces, edge_spaces })
}

// ---------------------------------------------------------------------------
// E-parallelism classes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellSym {
    V,
    E(Dir),
    S(SquareSym),
}

impl CellSym {
    fn id_for(other: &CellSym) -> CellSym {
        match other {
            CellSym::V => CellSym::V,
            CellSym::E(_) => CellSym::E(1),
            CellSym::S(_) => CellSym::S(SquareSym::identity()),
        }
    }
    fn compose(&self, other: &CellSym) -> CellSym {
        match (self, other) {
            (CellSym::V, CellSym::V) => CellSym::V,
            (CellSym::E(a), CellSym::E(b)) => CellSym::E(a * b),
            (CellSym::S(a), CellSym::S(b)) => CellSym::S(a.compose(b)),
            _ => unreachable!("mixed-dimension symmetry composition"),
        }
    }
    fn inverse(&self) -> CellSym {
        match self {
            CellSym::V => CellSym::V,
            CellSym::E(d) => CellSym::E(*d),
            CellSym::S(g) => CellSym::S(g.inverse()),
        }
    }
}

/// A cell identified with itself under a nontrivial symmetry; the quotient
/// would fold the cell and is refused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistWitness {
    pub cell: CellId,
}

/// E-parallelism classes of the vertical cells of a total space, with the
/// relative symmetry of each cell against its class representative.
pub struct EClasses {
    /// cell -> representative (least id in the class)
    pub rep: BTreeMap<CellId, CellId>,
    /// cell -> members of its class
    pub classes: BTreeMap<CellId, BTreeSet<CellId>>,
    rel: BTreeMap<CellId, CellSym>,
    pub twists: Vec<TwistWitness>,
}

impl EClasses {
    pub fn class_of(&self, cell: &str) -> Option<&BTreeSet<CellId>> {
        self.classes.get(self.rep.get(cell)?)
    }

    pub fn rel_dir(&self, cell: &str) -> Dir {
        match self.rel[cell] {
            CellSym::E(d) => d,
            _ => unreachable!("rel_dir on non-edge"),
        }
    }

    pub fn rel_sym(&self, cell: &str) -> SquareSym {
        match self.rel[cell] {
            CellSym::S(g) => g,
            CellSym::V => SquareSym::identity(),
            _ => unreachable!("rel_sym on non-square"),
        }
    }
}

struct WeightedDsu {
    parent: Vec<usize>,
    weight: Vec<CellSym>,
}

impl WeightedDsu {
    fn new(syms: Vec<CellSym>) -> Self {
        WeightedDsu { parent: (0..syms.len()).collect(), weight: syms }
    }

    /// returns (root, w) with `char_i = char_root ∘ w`
    fn find(&mut self, i: usize) -> (usize, CellSym) {
        if self.parent[i] == i {
            return (i, CellSym::id_for(&self.weight[i]));
        }
        let (root, wp) = self.find(self.parent[i]);
        let w = wp.compose(&self.weight[i]);
        self.parent[i] = root;
        self.weight[i] = w;
        (root, w)
    }

    /// record `char_a = char_b ∘ g`; returns a twist if inconsistent
    fn union(&mut self, a: usize, b: usize, g: CellSym) -> Option<usize> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra != rb {
            // char_rb = char_b ∘ pb^{-1} = char_a ∘ g^{-1} ∘ pb^{-1}
            //         = char_ra ∘ pa ∘ g^{-1} ∘ pb^{-1}
            self.parent[rb] = ra;
            self.weight[rb] = pa.compose(&g.inverse()).compose(&pb.inverse());
            None
        } else {
            let expected = pb.compose(&g);
            if pa != expected {
                Some(a)
            } else {
                None
            }
        }
    }
}

/// Compute the E-parallelism classes generated by identifying the two ends
/// of every thick edge-space cell.
pub fn e_classes(t: &TotalSpace) -> EClasses {
    // vertical cells = vertex-space cells
    let mut ids: Vec<CellId> = Vec::new();
    let mut syms: Vec<CellSym> = Vec::new();
    for (id, p) in &t.provenance {
        if let Provenance::Vertex { .. } = p {
            let sym = match t.complex.cell_dim(id).unwrap() {
                0 => CellSym::V,
                1 => CellSym::E(1),
                2 => CellSym::S(SquareSym::identity()),
                _ => CellSym::S(SquareSym::identity()), // 3-cubes are never identified
            };
            ids.push(id.clone());
            syms.push(sym);
        }
    }
    let index: BTreeMap<&CellId, usize> = ids.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut dsu = WeightedDsu::new(syms);
    let mut twists: Vec<TwistWitness> = Vec::new();

    for (e, (v1, v2)) in &t.gos.graph.edges {
        let es = &t.gos.edge_spaces[e];
        for c in &es.space.vertices {
            let a = vcell(v1, &es.tau1.vertex_map[c]);
            let b = vcell(v2, &es.tau2.vertex_map[c]);
            if let Some(i) = dsu.union(index[&a], index[&b], CellSym::V) {
                twists.push(TwistWitness { cell: ids[i].clone() });
            }
        }
        for id in es.space.edges.keys() {
            let (e1, d1) = &es.tau1.edge_map[id];
            let (e2, d2) = &es.tau2.edge_map[id];
            let a = vcell(v1, e1);
            let b = vcell(v2, e2);
            // char_a = char_b ∘ (d2 ∘ d1^{-1})
            let g = CellSym::E(d2 * d1);
            if let Some(i) = dsu.union(index[&a], index[&b], g) {
                twists.push(TwistWitness { cell: ids[i].clone() });
            }
        }
        for id in es.space.squares.keys() {
            let (s1, g1) = &es.tau1.square_map[id];
            let (s2, g2) = &es.tau2.square_map[id];
            let a = vcell(v1, s1);
            let b = vcell(v2, s2);
            let g = CellSym::S(g2.compose(&g1.inverse()));
            if let Some(i) = dsu.union(index[&a], index[&b], g) {
                twists.push(TwistWitness { cell: ids[i].clone() });
            }
        }
    }

    // re-root every class at its least member
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..ids.len() {
        let (r, _) = dsu.find(i);
        groups.entry(r).or_default().push(i);
    }
    let mut rep = BTreeMap::new();
    let mut classes: BTreeMap<CellId, BTreeSet<CellId>> = BTreeMap::new();
    let mut rel = BTreeMap::new();
    for (_, members) in groups {
        let min = members.iter().min_by_key(|&&i| &ids[i]).copied().unwrap();
        let (_, pmin) = dsu.find(min);
        let set: BTreeSet<CellId> = members.iter().map(|&i| ids[i].clone()).collect();
        for &i in &members {
            let (_, pi) = dsu.find(i);
            // char_i = char_root ∘ pi, char_min = char_root ∘ pmin
            // => char_i = char_min ∘ (pmin^{-1} ∘ pi)
            rel.insert(ids[i].clone(), pmin.inverse().compose(&pi));
            rep.insert(ids[i].clone(), ids[min].clone());
        }
        classes.insert(ids[min].clone(), set);
    }
    twists.sort_by(|a, b| a.cell.cmp(&b.cell));
    twists.dedup();
    EClasses { rep, classes, rel, twists }
}

/// Strictness on 0-cubes: no two distinct 0-cubes of one vertex-space lie in
/// one E-parallelism class.
pub fn is_strict(t: &TotalSpace) -> Result<(), StrictnessWitness> {
    let ec = e_classes(t);
    strictness_witness(t, &ec).map_or(Ok(()), Err)
}

fn strictness_witness(t: &TotalSpace, ec: &EClasses) -> Option<StrictnessWitness> {
    for (v, xv) in &t.gos.vertex_spaces {
        let mut seen: BTreeMap<&CellId, CellId> = BTreeMap::new();
        for c in &xv.vertices {
            let id = vcell(v, c);
            let r = &ec.rep[&id];
            if let Some(prev) = seen.get(r) {
                return Some(StrictnessWitness {
                    vertex_space: v.clone(),
                    cell_a: prev.clone(),
                    cell_b: id,
                });
            }
            seen.insert(r, id);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictnessWitness {
    pub vertex_space: String,
    pub cell_a: CellId,
    pub cell_b: CellId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonStrictWitness {
    VertexPair(StrictnessWitness),
    Twisted(TwistWitness),
}

/// A materialized strict quotient: the complex, the cell map `q`, and the
/// per-cell direction data needed to transport attaching references.
pub struct StrictQuotient {
    pub complex: CubeComplex,
    /// total-space cell -> quotient cell
    pub q: BTreeMap<CellId, CellId>,
    pub classes: EClasses,
}

pub enum HorizontalQuotient {
    Strict(StrictQuotient),
    NonStrict(NonStrictWitness),
}

/// Collapse every thick edge-space along its interval factor. Non-strict
/// quotients are reported with a witness and never materialized.
pub fn horizontal_quotient(t: &TotalSpace) -> Result<HorizontalQuotient, Error> {
    let ec = e_classes(t);
    if let Some(tw) = ec.twists.first() {
        return Ok(HorizontalQuotient::NonStrict(NonStrictWitness::Twisted(tw.clone())));
    }
    if let Some(w) = strictness_witness(t, &ec) {
        return Ok(HorizontalQuotient::NonStrict(NonStrictWitness::VertexPair(w)));
    }

    let mut x = CubeComplex::default();
    let mut q: BTreeMap<CellId, CellId> = BTreeMap::new();

    let q_edge = |ec: &EClasses, e: &CellId, d: Dir| -> EdgeRef {
        EdgeRef { edge: ec.rep[e].clone(), dir: ec.rel_dir(e) * d }
    };

    for rep in ec.classes.keys() {
        match t.complex.cell_dim(rep).unwrap() {
            0 => {
                x.vertices.insert(rep.clone());
            }
            1 => {
                let e = &t.complex.edges[rep];
                x.edges.insert(
                    rep.clone(),
                    Edge { ends: [ec.rep[&e.ends[0]].clone(), ec.rep[&e.ends[1]].clone()] },
                );
            }
            2 => {
                let s = &t.complex.squares[rep];
                x.squares.insert(
                    rep.clone(),
                    Square {
                        corners: s.corners.clone().map(|c| ec.rep[&c].clone()),
                        sides: [
                            q_edge(&ec, &s.sides[0].edge, s.sides[0].dir),
                            q_edge(&ec, &s.sides[1].edge, s.sides[1].dir),
                            q_edge(&ec, &s.sides[2].edge, s.sides[2].dir),
                            q_edge(&ec, &s.sides[3].edge, s.sides[3].dir),
                        ],
                    },
                );
            }
            _ => {
                let c = &t.complex.cubes3[rep];
                x.cubes3.insert(
                    rep.clone(),
                    Cube3 {
                        corners: c.corners.clone().map(|w| ec.rep[&w].clone()),
                        edges: [
                            q_edge(&ec, &c.edges[0].edge, c.edges[0].dir),
                            q_edge(&ec, &c.edges[1].edge, c.edges[1].dir),
                            q_edge(&ec, &c.edges[2].edge, c.edges[2].dir),
                            q_edge(&ec, &c.edges[3].edge, c.edges[3].dir),
                            q_edge(&ec, &c.edges[4].edge, c.edges[4].dir),
                            q_edge(&ec, &c.edges[5].edge, c.edges[5].dir),
                            q_edge(&ec, &c.edges[6].edge, c.edges[6].dir),
                            q_edge(&ec, &c.edges[7].edge, c.edges[7].dir),
                            q_edge(&ec, &c.edges[8].edge, c.edges[8].dir),
                            q_edge(&ec, &c.edges[9].edge, c.edges[9].dir),
                            q_edge(&ec, &c.edges[10].edge, c.edges[10].dir),
                            q_edge(&ec, &c.edges[11].edge, c.edges[11].dir),
                        ],
                        faces: c.faces.clone().map(|f| FaceRef {
                            square: ec.rep[&f.square].clone(),
                            sym: ec.rel_sym(&f.square).compose(&f.sym),
                        }),
                    },
                );
            }
        }
    }

    for (cell, p) in &t.provenance {
        match p {
            Provenance::Vertex { .. } => {
                q.insert(cell.clone(), ec.rep[cell].clone());
            }
            Provenance::EdgeMid { edge, cell: c } => {
                let (v1, _) = &t.gos.graph.edges[edge];
                let es = &t.gos.edge_spaces[edge];
                let lo = match es.space.cell_dim(c).unwrap() {
                    0 => vcell(v1, &es.tau1.vertex_map[c]),
                    1 => vcell(v1, &es.tau1.edge_map[c].0),
                    _ => vcell(v1, &es.tau1.square_map[c].0),
                };
                q.insert(cell.clone(), ec.rep[&lo].clone());
            }
        }
    }

    let report = x.validate();
    if !report.is_ok() {
        return Err(Error::InvalidComplex(format!(
            "strict quotient failed to validate: {:?}",
            report.violations.first()
        )));
    }
    Ok(HorizontalQuotient::Strict(StrictQuotient { complex: x, q, classes: ec }))
}

// ---------------------------------------------------------------------------
// Horizontal graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizontalEdge {
    /// the mid edge cell of the total space realizing this step
    pub id: CellId,
    pub from: CellId,
    pub to: CellId,
    /// underlying graph edge
    pub label: String,
}

/// The E-parallelism class of a 0-cube together with the horizontal 1-cells
/// connecting its members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizontalGraph {
    pub vertices: BTreeSet<CellId>,
    pub edges: Vec<HorizontalEdge>,
}

/// The set of vertical cells E-parallel to `cell` (for a mid cell, to its
/// end cells).
pub fn e_class(t: &TotalSpace, cell: &str) -> Result<BTreeSet<CellId>, Error> {
    let ec = e_classes(t);
    match t.provenance.get(cell) {
        None => Err(Error::UnknownCell(cell.to_string())),
        Some(Provenance::Vertex { .. }) => Ok(ec.class_of(cell).unwrap().clone()),
        Some(Provenance::EdgeMid { edge, cell: c }) => {
            let (v1, _) = &t.gos.graph.edges[edge];
            let es = &t.gos.edge_spaces[edge];
            let lo = match es.space.cell_dim(c).unwrap() {
                0 => vcell(v1, &es.tau1.vertex_map[c]),
                1 => vcell(v1, &es.tau1.edge_map[c].0),
                _ => vcell(v1, &es.tau1.square_map[c].0),
            };
            Ok(ec.class_of(&lo).unwrap().clone())
        }
    }
}

pub fn horizontal_graph(t: &TotalSpace, zero_cube: &str) -> Result<HorizontalGraph, Error> {
    if t.complex.cell_dim(zero_cube) != Some(0) {
        return Err(Error::Precondition(format!("`{zero_cube}` is not a 0-cube")));
    }
    let ec = e_classes(t);
    horizontal_graph_with(t, &ec, zero_cube)
}

fn horizontal_graph_with(t: &TotalSpace, ec: &EClasses, zero_cube: &str) -> Result<HorizontalGraph, Error> {
    let class = ec
        .class_of(zero_cube)
        .ok_or_else(|| Error::UnknownCell(zero_cube.to_string()))?
        .clone();
    let mut edges = Vec::new();
    for (e, (v1, v2)) in &t.gos.graph.edges {
        let es = &t.gos.edge_spaces[e];
        for c in &es.space.vertices {
            let from = vcell(v1, &es.tau1.vertex_map[c]);
            if class.contains(&from) {
                edges.push(HorizontalEdge {
                    id: mcell(e, c),
                    from: from.clone(),
                    to: vcell(v2, &es.tau2.vertex_map[c]),
                    label: e.clone(),
                });
            }
        }
    }
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(HorizontalGraph { vertices: class, edges })
}

impl HorizontalGraph {
    /// The projection to the underlying graph is an immersion: at each
    /// vertex, outgoing labels are distinct and incoming labels are distinct.
    pub fn projection_is_immersion(&self) -> bool {
        let mut out: BTreeSet<(&CellId, &String)> = BTreeSet::new();
        let mut inn: BTreeSet<(&CellId, &String)> = BTreeSet::new();
        for e in &self.edges {
            if !out.insert((&e.from, &e.label)) {
                return false;
            }
            if !inn.insert((&e.to, &e.label)) {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Induced graphs of links
// ---------------------------------------------------------------------------

type LinkCellKey = (CellId, LinkCellRef);

/// The graph of spaces induced on links over the horizontal graph of a
/// quotient 0-cube: vertex-spaces are links in vertex-spaces, edge-spaces
/// links in edge-spaces, attached through the attaching maps.
pub struct InducedGraphOfLinks {
    pub graph: HorizontalGraph,
    /// per member 0-cube (total-space id): the link in its vertex-space
    pub vertex_links: BTreeMap<CellId, LinkComplex>,
    /// per horizontal edge id: the link in the edge-space and its two
    /// attachments into the end vertex links
    pub edge_links: BTreeMap<CellId, EdgeLink>,
}

pub struct EdgeLink {
    pub link: LinkComplex,
    pub into_from: BTreeMap<LinkCellRef, LinkCellRef>,
    pub into_to: BTreeMap<LinkCellRef, LinkCellRef>,
}

pub fn induced_graph_of_links(
    t: &TotalSpace,
    sq: &StrictQuotient,
    x: &str,
) -> Result<InducedGraphOfLinks, Error> {
    if !sq.complex.vertices.contains(x) {
        return Err(Error::UnknownCell(x.to_string()));
    }
    let graph = horizontal_graph_with(t, &sq.classes, x)?;
    let mut vertex_links = BTreeMap::new();
    for m in &graph.vertices {
        let Provenance::Vertex { vertex, cell } = &t.provenance[m] else {
            unreachable!("class members are vertical")
        };
        vertex_links.insert(m.clone(), t.gos.vertex_spaces[vertex].link(cell)?);
    }
    let mut edge_links = BTreeMap::new();
    for he in &graph.edges {
        let Provenance::EdgeMid { edge, cell } = &t.provenance[&he.id] else {
            unreachable!("horizontal edges are mid cells")
        };
        let es = &t.gos.edge_spaces[edge];
        let link = es.space.link(cell)?;
        let into_from = es.tau1.link_map(cell)?;
        let into_to = es.tau2.link_map(cell)?;
        edge_links.insert(he.id.clone(), EdgeLink { link, into_from, into_to });
    }
    Ok(InducedGraphOfLinks { graph, vertex_links, edge_links })
}

impl InducedGraphOfLinks {
    /// Horizontal quotient of the induced graph of links: union-find over the
    /// link cells of all vertex links, seeded by the edge-link attachments.
    /// Returns the classes, keyed by least member.
    pub fn link_quotient(&self) -> BTreeMap<LinkCellKey, BTreeSet<LinkCellKey>> {
        let mut nodes: Vec<LinkCellKey> = Vec::new();
        for (m, link) in &self.vertex_links {
            for v in &link.vertices {
                nodes.push((m.clone(), v.clone()));
            }
            for e in &link.edges {
                nodes.push((m.clone(), e.cell.clone()));
            }
            for tr in &link.triangles {
                nodes.push((m.clone(), tr.cell.clone()));
            }
        }
        nodes.sort();
        let index: BTreeMap<&LinkCellKey, usize> =
            nodes.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut dsu = hyperplane::Dsu::new(nodes.len());
        for he in &self.graph.edges {
            let el = &self.edge_links[&he.id];
            for (src, dst1) in &el.into_from {
                let dst2 = &el.into_to[src];
                let a = (he.from.clone(), dst1.clone());
                let b = (he.to.clone(), dst2.clone());
                dsu.union(index[&a], index[&b]);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<LinkCellKey>> = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            groups.entry(dsu.find(i)).or_default().insert(n.clone());
        }
        groups.into_values().map(|set| (set.iter().next().unwrap().clone(), set)).collect()
    }
}

/// Check that the horizontal quotient of the induced graph of links equals
/// the link of `x` in the quotient complex, via the canonical renaming of
/// link cells through class representatives.
pub fn verify_link_quotient(
    t: &TotalSpace,
    sq: &StrictQuotient,
    x: &str,
) -> Result<(), String> {
    let igl = induced_graph_of_links(t, sq, x).map_err(|e| e.to_string())?;
    let quotient_link = sq.complex.link(x).map_err(|e| e.to_string())?;
    let ec = &sq.classes;

    // expected quotient link cell for a member link cell
    let transport = |m: &CellId, c: &LinkCellRef| -> LinkCellRef {
        let Provenance::Vertex { vertex, .. } = &t.provenance[m] else { unreachable!() };
        let owner_total = vcell(vertex, &c.owner);
        let rep = ec.rep[&owner_total].clone();
        match t.complex.cell_dim(&owner_total).unwrap() {
            1 => {
                let d = ec.rel_dir(&owner_total);
                let slot = if d == 1 { c.slot } else { 1 - c.slot };
                LinkCellRef { owner: rep, slot }
            }
            2 => {
                let g = ec.rel_sym(&owner_total);
                LinkCellRef { owner: rep, slot: g.corner(c.slot as usize) as u8 }
            }
            _ => LinkCellRef { owner: rep, slot: c.slot },
        }
    };

    let classes = igl.link_quotient();
    let mut image: BTreeSet<LinkCellRef> = BTreeSet::new();
    for members in classes.values() {
        let mut transported: BTreeSet<LinkCellRef> = BTreeSet::new();
        for (m, c) in members {
            transported.insert(transport(m, c));
        }
        if transported.len() != 1 {
            return Err(format!("class does not transport to a single quotient link cell: {transported:?}"));
        }
        let cell = transported.into_iter().next().unwrap();
        if !image.insert(cell.clone()) {
            return Err(format!("two link classes transport to the same quotient cell {cell:?}"));
        }
    }
    let mut expected: BTreeSet<LinkCellRef> = BTreeSet::new();
    for v in &quotient_link.vertices {
        expected.insert(v.clone());
    }
    for e in &quotient_link.edges {
        expected.insert(e.cell.clone());
    }
    for tr in &quotient_link.triangles {
        expected.insert(tr.cell.clone());
    }
    if image != expected {
        return Err(format!(
            "link cells differ: quotient has {} cells, induced quotient gives {}",
            expected.len(),
            image.len()
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Controlled graphs of spaces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlReport {
    pub precondition_failures: Vec<String>,
    pub wall_injectivity_failures: Vec<String>,
    pub cross_injectivity_failures: Vec<String>,
    pub self_osculating_edge_spaces: Vec<String>,
}

impl ControlReport {
    pub fn is_controlled(&self) -> bool {
        self.precondition_failures.is_empty()
            && self.wall_injectivity_failures.is_empty()
            && self.cross_injectivity_failures.is_empty()
            && self.self_osculating_edge_spaces.is_empty()
    }
}

/// Wall-injectivity, cross-injectivity, and non-self-osculation of every
/// edge-space attachment.
pub fn is_controlled(gos: &GraphOfSpaces) -> ControlReport {
    let mut report = ControlReport::default();
    if let Err(e) = gos.validate() {
        report.precondition_failures.push(e.to_string());
        return report;
    }
    for (v, xv) in &gos.vertex_spaces {
        if xv.is_npc().is_err() {
            report.precondition_failures.push(format!("vertex-space `{v}` is not NPC"));
        }
    }
    for (e, es) in &gos.edge_spaces {
        if es.space.is_npc().is_err() {
            report.precondition_failures.push(format!("edge-space `{e}` is not NPC"));
        }
        for (tau, side) in [(&es.tau1, 1), (&es.tau2, 2)] {
            if tau.is_local_isometry().is_err() {
                report
                    .precondition_failures
                    .push(format!("tau{side} of `{e}` is not a local isometry"));
            }
        }
    }
    if !report.precondition_failures.is_empty() {
        return report;
    }

    for (e, es) in &gos.edge_spaces {
        let classes_e = edge_parallelism_classes(&es.space);
        let (mc_e, hps_e) = hyperplanes(&es.space);
        for (tau, side) in [(&es.tau1, 1), (&es.tau2, 2)] {
            let xv = &tau.codomain;
            let classes_v = edge_parallelism_classes(xv);
            let (mc_v, hps_v) = hyperplanes(xv);
            let class_v_of = |edge: &CellId| -> usize {
                classes_v.iter().position(|c| c.contains(edge)).unwrap()
            };
            // wall-injectivity
            let mut images: BTreeMap<usize, &BTreeSet<CellId>> = BTreeMap::new();
            for ce in &classes_e {
                let rep = ce.iter().next().unwrap();
                let img = class_v_of(&tau.edge_map[rep].0);
                if let Some(prev) = images.insert(img, ce) {
                    report.wall_injectivity_failures.push(format!(
                        "edge `{e}` side {side}: hyperplanes `{}` and `{}` extend to one hyperplane",
                        prev.iter().next().unwrap(),
                        ce.iter().next().unwrap()
                    ));
                }
            }
            // cross-injectivity: non-crossing hyperplanes extend to
            // non-crossing hyperplanes
            for i in 0..hps_e.len() {
                for j in (i + 1)..hps_e.len() {
                    let crossed_up = crossing(&mc_e, hps_e[i].component, hps_e[j].component).is_some();
                    if crossed_up {
                        continue;
                    }
                    let rep_i = &tau.edge_map[hps_e[i].dual_edges.iter().next().unwrap()].0;
                    let rep_j = &tau.edge_map[hps_e[j].dual_edges.iter().next().unwrap()].0;
                    let hi = hps_v.iter().find(|h| h.dual_edges.contains(rep_i)).unwrap();
                    let hj = hps_v.iter().find(|h| h.dual_edges.contains(rep_j)).unwrap();
                    if hi.component != hj.component
                        && crossing(&mc_v, hi.component, hj.component).is_some()
                    {
                        report.cross_injectivity_failures.push(format!(
                            "edge `{e}` side {side}: non-crossing hyperplanes `{}`/`{}` extend to crossing ones",
                            hps_e[i].id, hps_e[j].id
                        ));
                    }
                }
            }
            // the attached edge-space must not self-osculate
            let image = tau.image();
            match hyperplane::subcomplex_self_osculates(xv, &image) {
                Ok(Some(w)) => report.self_osculating_edge_spaces.push(format!(
                    "edge `{e}` side {side}: image self-osculates at `{}` via `{}`",
                    w.vertex, w.edge_b
                )),
                Ok(None) => {}
                Err(err) => report.precondition_failures.push(err.to_string()),
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Remote osculation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RemoteOsculation {
    SelfOsculation {
        hyperplane: CellId,
        edge_a: CellId,
        edge_b: CellId,
        end_a: CellId,
        end_b: CellId,
    },
    InterOsculation {
        hyperplane_a: CellId,
        hyperplane_b: CellId,
        edge_a: CellId,
        edge_b: CellId,
        end_a: CellId,
        end_b: CellId,
    },
}

/// Pairs of vertical dual 1-cubes of one hyperplane (or of a crossing pair)
/// whose ends lie apart in one horizontal graph while their quotient images
/// do not corner a square.
pub fn detect_remote_osculation(t: &TotalSpace, sq: &StrictQuotient) -> Vec<RemoteOsculation> {
    let ec = &sq.classes;
    let (mc, hps) = hyperplanes(&t.complex);
    let is_vertical =
        |cell: &CellId| matches!(t.provenance.get(cell), Some(Provenance::Vertex { .. }));
    let mut out: BTreeSet<RemoteOsculation> = BTreeSet::new();

    let same_class = |a: &CellId, b: &CellId| ec.rep[a] == ec.rep[b];
    let ends_of = |e: &CellId, dir: Dir| -> (CellId, CellId) {
        let ends = &t.complex.edges[e].ends;
        if dir == 1 {
            (ends[0].clone(), ends[1].clone())
        } else {
            (ends[1].clone(), ends[0].clone())
        }
    };

    for h in &hps {
        let Some(orient) = &h.orientation else { continue };
        let verticals: Vec<&CellId> = h.dual_edges.iter().filter(|e| is_vertical(e)).collect();
        for i in 0..verticals.len() {
            for j in (i + 1)..verticals.len() {
                let (a, b) = (verticals[i], verticals[j]);
                let (ia, ta) = ends_of(a, orient[a]);
                let (ib, tb) = ends_of(b, orient[b]);
                for (ea, eb) in [(ia, ib), (ta, tb)] {
                    if ea != eb && same_class(&ea, &eb) {
                        let qa = &ec.rep[a];
                        let qb = &ec.rep[b];
                        if qa != qb && !is_square_corner_pair(&sq.complex, qa, qb) {
                            out.insert(RemoteOsculation::SelfOsculation {
                                hyperplane: h.id.clone(),
                                edge_a: a.clone(),
                                edge_b: b.clone(),
                                end_a: ea,
                                end_b: eb,
                            });
                        }
                    }
                }
            }
        }
    }

    for i in 0..hps.len() {
        for j in (i + 1)..hps.len() {
            if crossing(&mc, hps[i].component, hps[j].component).is_none() {
                continue;
            }
            let va: Vec<&CellId> = hps[i].dual_edges.iter().filter(|e| is_vertical(e)).collect();
            let vb: Vec<&CellId> = hps[j].dual_edges.iter().filter(|e| is_vertical(e)).collect();
            for a in &va {
                for b in &vb {
                    for ea in &t.complex.edges[*a].ends {
                        for eb in &t.complex.edges[*b].ends {
                            if ea != eb && same_class(ea, eb) {
                                let qa = &ec.rep[*a];
                                let qb = &ec.rep[*b];
                                if !is_square_corner_pair(&sq.complex, qa, qb) {
                                    out.insert(RemoteOsculation::InterOsculation {
                                        hyperplane_a: hps[i].id.clone(),
                                        hyperplane_b: hps[j].id.clone(),
                                        edge_a: (*a).clone(),
                                        edge_b: (*b).clone(),
                                        end_a: ea.clone(),
                                        end_b: eb.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Empty k-corners
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KCornerWitness {
    pub k: u8,
    pub center: CellId,
    /// image cells of the squares (or 3-cubes) of the corner
    pub cells: BTreeSet<CellId>,
}

/// Enumerate empty cycles of squares around 0-cubes and of 3-cubes around
/// 1-cubes, by direct scanning of the attachment data. Deduplicated by
/// image cell set.
pub fn detect_empty_k_corners(x: &CubeComplex) -> Vec<KCornerWitness> {
    let mut out: BTreeSet<KCornerWitness> = BTreeSet::new();

    // corners at 0-cubes: incidences are square corners with their two
    // directed-away edge-ends
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    struct Inc {
        owner: CellId,
        slot: usize,
        ends: [(CellId, u8); 2],
    }
    let mut by_vertex: BTreeMap<&CellId, Vec<Inc>> = BTreeMap::new();
    for (id, s) in &x.squares {
        for corner in 0..4usize {
            let v = &s.corners[corner];
            let [sa, sb] = square_corner_sides(corner);
            let (ea, ka) = x.side_end_at_corner(s, sa, corner);
            let (eb, kb) = x.side_end_at_corner(s, sb, corner);
            by_vertex.entry(v).or_default().push(Inc {
                owner: id.clone(),
                slot: corner,
                ends: [(ea, ka), (eb, kb)],
            });
        }
    }
    // filled triangles at 0-cubes, from 3-cube corners
    let mut filled: BTreeMap<&CellId, Vec<BTreeSet<(CellId, usize)>>> = BTreeMap::new();
    for c in x.cubes3.values() {
        for corner in 0..8usize {
            let v = &c.corners[corner];
            let mut triple = BTreeSet::new();
            for axis in 0..3usize {
                let pos = corner & (1 << axis) != 0;
                let f = crate::complex::cube_face_index(axis, pos);
                let fr = &c.faces[f];
                let free = crate::complex::face_free_axes(axis);
                let mut sc = 0usize;
                if corner & (1 << free[0]) != 0 {
                    sc |= 1;
                }
                if corner & (1 << free[1]) != 0 {
                    sc |= 2;
                }
                triple.insert((fr.square.clone(), fr.sym.corner(sc)));
            }
            filled.entry(v).or_default().push(triple);
        }
    }

    for (v, incs) in &by_vertex {
        for (i, a) in incs.iter().enumerate() {
            // k = 1: the two directed-away ends coincide
            if a.ends[0] == a.ends[1] {
                out.insert(KCornerWitness {
                    k: 1,
                    center: (*v).clone(),
                    cells: BTreeSet::from([a.owner.clone()]),
                });
            }
            for b in incs.iter().skip(i + 1) {
                // k = 2: equal unordered end pairs with distinct ends
                if a.ends[0] != a.ends[1] {
                    let pa = BTreeSet::from([a.ends[0].clone(), a.ends[1].clone()]);
                    let pb = BTreeSet::from([b.ends[0].clone(), b.ends[1].clone()]);
                    if pa == pb {
                        out.insert(KCornerWitness {
                            k: 2,
                            center: (*v).clone(),
                            cells: BTreeSet::from([a.owner.clone(), b.owner.clone()]),
                        });
                    }
                }
            }
        }
        // k = 3: embedded triangles of incidences with no filling cube corner
        let n = incs.len();
        for i in 0..n {
            let (p, q) = (&incs[i].ends[0], &incs[i].ends[1]);
            if p == q {
                continue;
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                let bj = &incs[j];
                // bj joins q to a third end r
                let r = if &bj.ends[0] == q && &bj.ends[1] != p && &bj.ends[1] != q {
                    &bj.ends[1]
                } else if &bj.ends[1] == q && &bj.ends[0] != p && &bj.ends[0] != q {
                    &bj.ends[0]
                } else {
                    continue;
                };
                for l in 0..n {
                    if l == i || l == j {
                        continue;
                    }
                    let bl = &incs[l];
                    let closes = (&bl.ends[0] == r && &bl.ends[1] == p)
                        || (&bl.ends[1] == r && &bl.ends[0] == p);
                    if !closes {
                        continue;
                    }
                    let triple: BTreeSet<(CellId, usize)> = [
                        (incs[i].owner.clone(), incs[i].slot),
                        (bj.owner.clone(), bj.slot),
                        (bl.owner.clone(), bl.slot),
                    ]
                    .into_iter()
                    .collect();
                    let is_filled = filled
                        .get(v)
                        .map(|ts| ts.contains(&triple))
                        .unwrap_or(false);
                    if !is_filled {
                        out.insert(KCornerWitness {
                            k: 3,
                            center: (*v).clone(),
                            cells: triple.into_iter().map(|(c, _)| c).collect(),
                        });
                    }
                }
            }
        }
    }

    // corners at 1-cubes: incidences are 3-cube edge slots with their two
    // (square, side) faces
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    struct EInc {
        owner: CellId,
        slot: usize,
        ends: [(CellId, u8); 2],
    }
    let mut by_edge: BTreeMap<&CellId, Vec<EInc>> = BTreeMap::new();
    for (id, c) in &x.cubes3 {
        for slot in 0..12usize {
            let e = &c.edges[slot].edge;
            let (axis, fixed) = crate::complex::cube_edge_slot(slot);
            let mut ends = Vec::with_capacity(2);
            for other in (0..3usize).filter(|&i| i != axis) {
                let f = crate::complex::cube_face_index(other, fixed[other]);
                let fr = &c.faces[f];
                let free = crate::complex::face_free_axes(other);
                let chart_pos = free.iter().position(|&a| a == axis).unwrap();
                let third = free[1 - chart_pos];
                let side_in_chart =
                    crate::complex::square_side_index(1 - chart_pos, fixed[third]);
                let (fa2, p2) = crate::complex::SQUARE_SIDES[side_in_chart];
                let mut f2 = [false; 2];
                f2[fa2] = p2;
                let (a_out, fixed_out, _d) = fr.sym.edge(1 - fa2, f2);
                let side_out = crate::complex::square_side_index(1 - a_out, fixed_out[1 - a_out]);
                ends.push((fr.square.clone(), side_out as u8));
            }
            by_edge.entry(e).or_default().push(EInc {
                owner: id.clone(),
                slot,
                ends: [ends[0].clone(), ends[1].clone()],
            });
        }
    }
    for (e, incs) in &by_edge {
        for (i, a) in incs.iter().enumerate() {
            if a.ends[0] == a.ends[1] {
                out.insert(KCornerWitness {
                    k: 1,
                    center: (*e).clone(),
                    cells: BTreeSet::from([a.owner.clone()]),
                });
            }
            for b in incs.iter().skip(i + 1) {
                if a.ends[0] != a.ends[1] {
                    let pa = BTreeSet::from([a.ends[0].clone(), a.ends[1].clone()]);
                    let pb = BTreeSet::from([b.ends[0].clone(), b.ends[1].clone()]);
                    if pa == pb {
                        out.insert(KCornerWitness {
                            k: 2,
                            center: (*e).clone(),
                            cells: BTreeSet::from([a.owner.clone(), b.owner.clone()]),
                        });
                    }
                }
            }
        }
        // triangles around an edge can never be filled under the cap
        let n = incs.len();
        for i in 0..n {
            let (p, q) = (&incs[i].ends[0], &incs[i].ends[1]);
            if p == q {
                continue;
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                let bj = &incs[j];
                let r = if &bj.ends[0] == q && &bj.ends[1] != p && &bj.ends[1] != q {
                    &bj.ends[1]
                } else if &bj.ends[1] == q && &bj.ends[0] != p && &bj.ends[0] != q {
                    &bj.ends[0]
                } else {
                    continue;
                };
                for l in 0..n {
                    if l == i || l == j {
                        continue;
                    }
                    let bl = &incs[l];
                    let closes = (&bl.ends[0] == r && &bl.ends[1] == p)
                        || (&bl.ends[1] == r && &bl.ends[0] == p);
                    if closes {
                        out.insert(KCornerWitness {
                            k: 3,
                            center: (*e).clone(),
                            cells: [&incs[i], bj, bl].iter().map(|x| x.owner.clone()).collect(),
                        });
                    }
                }
            }
        }
    }

    out.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Horizontal paths (shared with the free-group translation)
// ---------------------------------------------------------------------------

/// One step of a horizontal path: crossing the fiber of `cell` in the thick
/// edge-space over `label`, forward means from the tau1 end to the tau2 end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizontalStep {
    pub label: String,
    pub forward: bool,
}

/// Breadth-first horizontal path between two 0-cubes of the same class.
pub fn horizontal_path(
    t: &TotalSpace,
    from: &str,
    to: &str,
) -> Result<Option<Vec<HorizontalStep>>, Error> {
    let hg = horizontal_graph(t, from)?;
    if !hg.vertices.contains(to) {
        return Ok(None);
    }
    let mut prev: BTreeMap<&CellId, (usize, bool)> = BTreeMap::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::from([from]);
    seen.insert(from);
    'outer: while let Some(cur) = queue.pop_front() {
        for (i, e) in hg.edges.iter().enumerate() {
            let next = if e.from == cur {
                Some((&e.to, true))
            } else if e.to == cur {
                Some((&e.from, false))
            } else {
                None
            };
            if let Some((n, fwd)) = next {
                if seen.insert(n) {
                    prev.insert(n, (i, fwd));
                    if n == to {
                        break 'outer;
                    }
                    queue.push_back(n);
                }
            }
        }
    }
    if from == to {
        return Ok(Some(Vec::new()));
    }
    if !seen.contains(to) {
        return Ok(None);
    }
    let mut steps = Vec::new();
    let mut cur = to.to_string();
    while cur != from {
        let (i, fwd) = prev[&cur];
        let e = &hg.edges[i];
        steps.push(HorizontalStep { label: e.label.clone(), forward: fwd });
        cur = if fwd { e.from.clone() } else { e.to.clone() };
    }
    steps.reverse();
    Ok(Some(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build, Subcomplex};
    use crate::hyperplane::is_special;

    fn point_complex(name: &str) -> CubeComplex {
        let mut x = CubeComplex::default();
        build::vertex(&mut x, name);
        x
    }

    fn edge_ab() -> CubeComplex {
        let mut y = CubeComplex::default();
        build::edge(&mut y, "e", "a", "b");
        y
    }

    fn phi_a_to_b(y: &CubeComplex) -> PartialLocalIsometry {
        let dom = Subcomplex::from_cells(y, ["a".to_string()]).unwrap();
        let mut map = CubicalMap::new(dom.extract(y), y.clone());
        map.vertex_map.insert("a".into(), "b".into());
        PartialLocalIsometry { name: "ab".into(), domain: dom, map }
    }

    #[test]
    fn assemble_point_loop_is_circle() {
        let pt = point_complex("p");
        let mut gos = GraphOfSpaces {
            graph: UGraph::bouquet(1),
            vertex_spaces: BTreeMap::from([("v".to_string(), pt.clone())]),
            edge_spaces: BTreeMap::new(),
        };
        let sub = Subcomplex::full(&pt);
        gos.edge_spaces.insert(
            "g1".to_string(),
            EdgeSpace {
                space: pt.clone(),
                tau1: CubicalMap::inclusion(&pt, &sub),
                tau2: CubicalMap::inclusion(&pt, &sub),
            },
        );
        let t = assemble(&gos).unwrap();
        assert_eq!(t.complex.vertices.len(), 1);
        assert_eq!(t.complex.edges.len(), 1);
    }

    #[test]
    fn assemble_realization_edge_ab() {
        let y = edge_ab();
        let gos = realization(&y, &[phi_a_to_b(&y)]).unwrap();
        let t = assemble(&gos).unwrap();
        // Y plus one horizontal edge
        assert_eq!(t.complex.vertices.len(), 2);
        assert_eq!(t.complex.edges.len(), 2);
        assert!(t.complex.validate().is_ok());
        // empty family: total space is Y again
        let gos0 = realization(&y, &[]).unwrap();
        let t0 = assemble(&gos0).unwrap();
        assert_eq!(t0.complex.vertices.len(), 2);
        assert_eq!(t0.complex.edges.len(), 1);
    }

    /// Two lone squares glued along a shared side edge-space over one edge.
    fn two_square_tree() -> GraphOfSpaces {
        let xa = build::lone_square("a");
        let xb = build::lone_square("b");
        let side_a = Subcomplex::from_cells(&xa, ["ar".to_string()]).unwrap();
        let side_b = Subcomplex::from_cells(&xb, ["bl".to_string()]).unwrap();
        let es = side_a.extract(&xa);
        let tau1 = CubicalMap::inclusion(&xa, &side_a);
        // match ar (av1->av3) onto bl (bv0->bv2)
        let mut tau2 = CubicalMap::new(es.clone(), xb.clone());
        tau2.vertex_map.insert("av1".into(), "bv0".into());
        tau2.vertex_map.insert("av3".into(), "bv2".into());
        tau2.edge_map.insert("ar".into(), ("bl".into(), 1));
        tau2.validate().unwrap();
        let _ = side_b;
        let mut graph = UGraph::default();
        graph.vertices.insert("p".into());
        graph.vertices.insert("q".into());
        graph.edges.insert("e".into(), ("p".into(), "q".into()));
        GraphOfSpaces {
            graph,
            vertex_spaces: BTreeMap::from([("p".to_string(), xa), ("q".to_string(), xb)]),
            edge_spaces: BTreeMap::from([(
                "e".to_string(),
                EdgeSpace { space: es, tau1, tau2 },
            )]),
        }
    }

    #[test]
    fn assemble_two_square_tree() {
        let gos = two_square_tree();
        let t = assemble(&gos).unwrap();
        // 2 vertex squares + 1 connecting square
        assert_eq!(t.complex.squares.len(), 3);
        assert!(t.complex.is_npc().is_ok());
    }

    #[test]
    fn quotient_of_realization_edge_ab_is_nonstrict() {
        let y = edge_ab();
        let gos = realization(&y, &[phi_a_to_b(&y)]).unwrap();
        let t = assemble(&gos).unwrap();
        match horizontal_quotient(&t).unwrap() {
            HorizontalQuotient::NonStrict(NonStrictWitness::VertexPair(w)) => {
                assert_eq!(w.vertex_space, "v");
                assert_eq!(w.cell_a, "v.a");
                assert_eq!(w.cell_b, "v.b");
            }
            _ => panic!("expected a vertex pair witness"),
        }
    }

    #[test]
    fn quotient_of_two_square_tree_is_strict() {
        let gos = two_square_tree();
        let t = assemble(&gos).unwrap();
        assert!(is_strict(&t).is_ok());
        match horizontal_quotient(&t).unwrap() {
            HorizontalQuotient::Strict(sq) => {
                // two squares sharing a side
                assert_eq!(sq.complex.squares.len(), 2);
                assert_eq!(sq.complex.edges.len(), 7);
                assert_eq!(sq.complex.vertices.len(), 6);
                assert!(sq.complex.is_npc().is_ok());
                // every quotient 0-cube's induced graph of links matches
                for v in sq.complex.vertices.clone() {
                    verify_link_quotient(&t, &sq, &v).unwrap();
                }
            }
            _ => panic!("expected strict"),
        }
    }

    /// Circle of three copies of the edge ab, point edge-spaces, a_{k+1}
    /// glued to b_k.
    fn three_cycle_of_edges() -> GraphOfSpaces {
        let y = edge_ab();
        let mut graph = UGraph::default();
        for k in 0..3 {
            graph.vertices.insert(format!("u{k}"));
        }
        for k in 0..3 {
            graph.edges.insert(format!("c{k}"), (format!("u{k}"), format!("u{}", (k + 1) % 3)));
        }
        let mut vertex_spaces = BTreeMap::new();
        for k in 0..3 {
            vertex_spaces.insert(format!("u{k}"), y.clone());
        }
        let mut edge_spaces = BTreeMap::new();
        let pt = point_complex("p");
        for k in 0..3 {
            let mut tau1 = CubicalMap::new(pt.clone(), y.clone());
            tau1.vertex_map.insert("p".into(), "b".into());
            let mut tau2 = CubicalMap::new(pt.clone(), y.clone());
            tau2.vertex_map.insert("p".into(), "a".into());
            edge_spaces.insert(format!("c{k}"), EdgeSpace { space: pt.clone(), tau1, tau2 });
        }
        GraphOfSpaces { graph, vertex_spaces, edge_spaces }
    }

    #[test]
    fn quotient_of_three_cycle_is_three_cycle_graph() {
        let gos = three_cycle_of_edges();
        let t = assemble(&gos).unwrap();
        assert!(is_strict(&t).is_ok());
        match horizontal_quotient(&t).unwrap() {
            HorizontalQuotient::Strict(sq) => {
                assert_eq!(sq.complex.vertices.len(), 3);
                assert_eq!(sq.complex.edges.len(), 3);
                assert!(sq.complex.squares.is_empty());
                for v in sq.complex.vertices.clone() {
                    verify_link_quotient(&t, &sq, &v).unwrap();
                }
            }
            _ => panic!("expected strict"),
        }
    }

    #[test]
    fn e_class_and_horizontal_graph_of_point_loop() {
        let pt = point_complex("p");
        let sub = Subcomplex::full(&pt);
        let gos = GraphOfSpaces {
            graph: UGraph::bouquet(1),
            vertex_spaces: BTreeMap::from([("v".to_string(), pt.clone())]),
            edge_spaces: BTreeMap::from([(
                "g1".to_string(),
                EdgeSpace {
                    space: pt.clone(),
                    tau1: CubicalMap::inclusion(&pt, &sub),
                    tau2: CubicalMap::inclusion(&pt, &sub),
                },
            )]),
        };
        let t = assemble(&gos).unwrap();
        let cls = e_class(&t, "v.p").unwrap();
        assert_eq!(cls, BTreeSet::from(["v.p".to_string()]));
        let hg = horizontal_graph(&t, "v.p").unwrap();
        assert_eq!(hg.vertices.len(), 1);
        assert_eq!(hg.edges.len(), 1);
        assert_eq!(hg.edges[0].label, "g1");
        assert!(hg.projection_is_immersion());
    }

    #[test]
    fn moebius_style_twist_is_refused() {
        // loop edge-space glued to itself with a reversal: the quotient
        // would fold the loop and is not a cube complex
        let mut y = CubeComplex::default();
        build::edge(&mut y, "a", "x", "x");
        let sub = Subcomplex::full(&y);
        let inc = CubicalMap::inclusion(&y, &sub);
        let mut rev = CubicalMap::new(y.clone(), y.clone());
        rev.vertex_map.insert("x".into(), "x".into());
        rev.edge_map.insert("a".into(), ("a".into(), -1));
        rev.validate().unwrap();
        let gos = GraphOfSpaces {
            graph: UGraph::bouquet(1),
            vertex_spaces: BTreeMap::from([("v".to_string(), y.clone())]),
            edge_spaces: BTreeMap::from([(
                "g1".to_string(),
                EdgeSpace { space: y.clone(), tau1: inc, tau2: rev },
            )]),
        };
        let t = assemble(&gos).unwrap();
        match horizontal_quotient(&t).unwrap() {
            HorizontalQuotient::NonStrict(NonStrictWitness::Twisted(w)) => {
                assert_eq!(w.cell, "v.a");
            }
            _ => panic!("expected twist witness"),
        }
    }

    #[test]
    fn controlled_verdicts() {
        let y = edge_ab();
        let gos = realization(&y, &[phi_a_to_b(&y)]).unwrap();
        let report = is_controlled(&gos);
        assert!(report.is_controlled(), "{report:?}");

        // wall-injectivity failure: a 2-edge path mapping into one class of
        // the bent strip
        let x = crate::hyperplane::test_fixtures::ustrip();
        let mut path = CubeComplex::default();
        build::edge(&mut path, "p0", "q0", "q1");
        build::edge(&mut path, "p1", "q1", "q2");
        let mut tau2 = CubicalMap::new(path.clone(), x.clone());
        tau2.vertex_map.insert("q0".into(), "v4".into());
        tau2.vertex_map.insert("q1".into(), "v1".into());
        tau2.vertex_map.insert("q2".into(), "w2".into());
        tau2.edge_map.insert("p0".into(), ("c1".into(), -1));
        tau2.edge_map.insert("p1".into(), ("c4".into(), 1));
        tau2.validate().unwrap();
        assert!(tau2.is_local_isometry().is_ok());
        // other side: attach the same path into a fresh strip of length 2
        let strip = build::strip(2);
        let mut tau1 = CubicalMap::new(path.clone(), strip.clone());
        tau1.vertex_map.insert("q0".into(), "x0".into());
        tau1.vertex_map.insert("q1".into(), "x1".into());
        tau1.vertex_map.insert("q2".into(), "x2".into());
        tau1.edge_map.insert("p0".into(), ("b0".into(), 1));
        tau1.edge_map.insert("p1".into(), ("b1".into(), 1));
        tau1.validate().unwrap();
        let mut graph = UGraph::default();
        graph.vertices.insert("p".into());
        graph.vertices.insert("q".into());
        graph.edges.insert("e".into(), ("p".into(), "q".into()));
        let gos = GraphOfSpaces {
            graph,
            vertex_spaces: BTreeMap::from([
                ("p".to_string(), strip),
                ("q".to_string(), x),
            ]),
            edge_spaces: BTreeMap::from([(
                "e".to_string(),
                EdgeSpace { space: path, tau1, tau2 },
            )]),
        };
        let report = is_controlled(&gos);
        assert!(!report.wall_injectivity_failures.is_empty(), "{report:?}");
    }

    #[test]
    fn remote_osculation_detected_on_strip_cycle() {
        // two single-square strips in a cycle: rung to rung along one edge,
        // opposite bottom corners along the other; the merged rung hyperplane
        // remotely self-osculates and the quotient self-osculates
        let p = build::strip(1);
        let q = build::strip(1);
        let mut graph = UGraph::default();
        graph.vertices.insert("P".into());
        graph.vertices.insert("Q".into());
        graph.edges.insert("e".into(), ("P".into(), "Q".into()));
        graph.edges.insert("f".into(), ("Q".into(), "P".into()));
        let mut fedge = CubeComplex::default();
        build::edge(&mut fedge, "z", "z0", "z1");
        let mut tau1 = CubicalMap::new(fedge.clone(), p.clone());
        tau1.vertex_map.insert("z0".into(), "x1".into());
        tau1.vertex_map.insert("z1".into(), "y1".into());
        tau1.edge_map.insert("z".into(), ("r1".into(), 1));
        tau1.validate().unwrap();
        let mut tau2 = CubicalMap::new(fedge.clone(), q.clone());
        tau2.vertex_map.insert("z0".into(), "x0".into());
        tau2.vertex_map.insert("z1".into(), "y0".into());
        tau2.edge_map.insert("z".into(), ("r0".into(), 1));
        tau2.validate().unwrap();
        let pt = point_complex("w");
        let mut ptau1 = CubicalMap::new(pt.clone(), q.clone());
        ptau1.vertex_map.insert("w".into(), "x1".into());
        let mut ptau2 = CubicalMap::new(pt.clone(), p.clone());
        ptau2.vertex_map.insert("w".into(), "x0".into());
        let gos = GraphOfSpaces {
            graph,
            vertex_spaces: BTreeMap::from([("P".to_string(), p), ("Q".to_string(), q)]),
            edge_spaces: BTreeMap::from([
                ("e".to_string(), EdgeSpace { space: fedge, tau1, tau2 }),
                ("f".to_string(), EdgeSpace { space: pt, tau1: ptau1, tau2: ptau2 }),
            ]),
        };
        let t = assemble(&gos).unwrap();
        let HorizontalQuotient::Strict(sq) = horizontal_quotient(&t).unwrap() else {
            panic!("expected strict quotient");
        };
        let witnesses = detect_remote_osculation(&t, &sq);
        assert!(witnesses
            .iter()
            .any(|w| matches!(w, RemoteOsculation::SelfOsculation { .. })));
        // the quotient itself self-osculates, matching the upstream witness
        let report = is_special(&sq.complex);
        assert!(report.pathologies().contains("self_osculation"));
    }

    #[test]
    fn empty_corner_examples() {
        let open = build::squares_around_vertex(3, false);
        let ws = detect_empty_k_corners(&open);
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].k, 3);
        assert_eq!(ws[0].center, "c");
        assert_eq!(ws[0].cells.len(), 3);

        let filled = build::squares_around_vertex(3, true);
        assert!(detect_empty_k_corners(&filled).is_empty());

        // bigon of squares: two squares sharing both sides at a corner
        let mut bigon = CubeComplex::default();
        build::edge(&mut bigon, "e1", "v", "w1");
        build::edge(&mut bigon, "e2", "v", "w2");
        build::edge(&mut bigon, "f1", "w1", "z1");
        build::edge(&mut bigon, "g1", "w2", "z1");
        build::edge(&mut bigon, "f2", "w1", "z2");
        build::edge(&mut bigon, "g2", "w2", "z2");
        build::square(&mut bigon, "s1", [("e1", 1), ("g1", 1), ("e2", 1), ("f1", 1)]);
        build::square(&mut bigon, "s2", [("e1", 1), ("g2", 1), ("e2", 1), ("f2", 1)]);
        assert!(bigon.validate().is_ok());
        let ws = detect_empty_k_corners(&bigon);
        assert!(ws.iter().any(|w| w.k == 2 && w.center == "v"));
        assert!(bigon.is_npc().is_err());

        // loop corner: square with both directed-away sides equal
        let mut x = CubeComplex::default();
        build::vertex(&mut x, "v");
        build::edge(&mut x, "a", "v", "v");
        build::edge(&mut x, "c", "v", "v");
        build::square(&mut x, "s", [("a", 1), ("c", 1), ("a", 1), ("c", 1)]);
        let ws = detect_empty_k_corners(&x);
        assert!(ws.iter().any(|w| w.k == 1));
    }

    #[test]
    fn empty_corners_agree_with_npc_on_fixtures() {
        for x in [
            build::lone_square(""),
            build::torus(),
            build::moebius(),
            build::strip(3),
            build::self_crossing(),
            build::self_osculating(),
            build::inter_osculating(),
            build::solid_cube(),
            build::squares_around_vertex(3, false),
            build::squares_around_vertex(3, true),
            build::squares_around_vertex(4, false),
            crate::hyperplane::test_fixtures::ustrip(),
        ] {
            let npc = x.is_npc().is_ok();
            let empty = detect_empty_k_corners(&x).is_empty();
            assert_eq!(npc, empty, "disagreement on {:?}", x.squares.keys().collect::<Vec<_>>());
        }
    }

    #[test]
    fn horizontal_path_on_three_cycle() {
        let gos = three_cycle_of_edges();
        let t = assemble(&gos).unwrap();
        let p = horizontal_path(&t, "u0.b", "u1.a").unwrap().unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].label, "c0");
        assert!(p[0].forward);
        assert!(horizontal_path(&t, "u0.b", "u0.a").unwrap().is_none());
    }
}
