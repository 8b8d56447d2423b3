//! Cube complexes of dimension at most 3 with explicit boundary attachments,
//! links, the simplicity and flagness checks, and products with an interval.
//!
//! Cells are named by opaque string ids; all iteration is in sorted id order
//! so that verdicts and witnesses are reproducible.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::sym::{check_dir, Dir, SquareSym};

pub type CellId = String;

/// Oriented 1-cube; `ends[0]` is the initial vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub ends: [CellId; 2],
}

/// A directed reference to an edge: `dir = +1` traverses it forward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub edge: CellId,
    pub dir: Dir,
}

/// 2-cube. Corners in order `c00, c10, c01, c11` (bit 0 = x, bit 1 = y).
/// Sides in order `y=-1, y=+1, x=-1, x=+1`, each directed along the
/// increasing free coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub corners: [CellId; 4],
    pub sides: [EdgeRef; 4],
}

/// Attachment of one face of a 3-cube: the target square reparametrized by a
/// square symmetry, so that `char_cube ∘ p_face = char_square ∘ sym`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceRef {
    pub square: CellId,
    pub sym: SquareSym,
}

/// 3-cube. Corners indexed by bits (x,y,z); edge slots 0..3 run along x for
/// (y,z) in (-,-),(+,-),(-,+),(+,+), 4..7 along y for (x,z), 8..11 along z
/// for (x,y); faces in order x=-1, x=+1, y=-1, y=+1, z=-1, z=+1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cube3 {
    pub corners: [CellId; 8],
    pub edges: [EdgeRef; 12],
    pub faces: [FaceRef; 6],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeComplex {
    pub vertices: BTreeSet<CellId>,
    pub edges: BTreeMap<CellId, Edge>,
    pub squares: BTreeMap<CellId, Square>,
    pub cubes3: BTreeMap<CellId, Cube3>,
}

/// Side index geometry of the standard square.
pub const SQUARE_SIDES: [(usize, bool); 4] = [(1, false), (1, true), (0, false), (0, true)];

/// `(start corner, end corner)` of each side, in canonical direction.
pub fn square_side_corners(side: usize) -> (usize, usize) {
    let (fixed_axis, pos) = SQUARE_SIDES[side];
    let free_axis = 1 - fixed_axis;
    let base = if pos { 1 << fixed_axis } else { 0 };
    (base, base | (1 << free_axis))
}

/// Side of the standard square with the given fixed axis and sign.
pub fn square_side_index(fixed_axis: usize, pos: bool) -> usize {
    SQUARE_SIDES.iter().position(|&s| s == (fixed_axis, pos)).unwrap()
}

/// The two sides meeting at a square corner.
pub fn square_corner_sides(corner: usize) -> [usize; 2] {
    let x = corner & 1 != 0;
    let y = corner & 2 != 0;
    [square_side_index(1, y), square_side_index(0, x)]
}

/// Edge slot geometry of the standard 3-cube: `(free axis, fixed bits)` per slot.
pub fn cube_edge_slot(slot: usize) -> (usize, [bool; 3]) {
    let axis = slot / 4;
    let k = slot % 4;
    let others: [usize; 2] = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let mut fixed = [false; 3];
    fixed[others[0]] = k & 1 != 0;
    fixed[others[1]] = k & 2 != 0;
    (axis, fixed)
}

pub fn cube_edge_slot_index(axis: usize, fixed: [bool; 3]) -> usize {
    let others: [usize; 2] = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    axis * 4 + (fixed[others[0]] as usize) + 2 * (fixed[others[1]] as usize)
}

/// `(start corner, end corner)` of a cube edge slot.
pub fn cube_edge_corners(slot: usize) -> (usize, usize) {
    let (axis, fixed) = cube_edge_slot(slot);
    let mut base = 0;
    for i in 0..3 {
        if i != axis && fixed[i] {
            base |= 1 << i;
        }
    }
    (base, base | (1 << axis))
}

pub const CUBE_FACES: [(usize, bool); 6] =
    [(0, false), (0, true), (1, false), (1, true), (2, false), (2, true)];

pub fn cube_face_index(axis: usize, pos: bool) -> usize {
    axis * 2 + pos as usize
}

/// Free axes of a face, in increasing order (the face chart axes).
pub fn face_free_axes(axis: usize) -> [usize; 2] {
    match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// Corner of `I^3` under the chart of face `(axis,pos)` at square corner `c`.
pub fn face_corner_to_cube(axis: usize, pos: bool, c: usize) -> usize {
    let free = face_free_axes(axis);
    let mut out = 0;
    if pos {
        out |= 1 << axis;
    }
    if c & 1 != 0 {
        out |= 1 << free[0];
    }
    if c & 2 != 0 {
        out |= 1 << free[1];
    }
    out
}

/// Cube edge slot under the chart of face `(axis,pos)` at square side `s`.
/// Charts are monotone, so directions are preserved.
pub fn face_side_to_cube_edge(axis: usize, pos: bool, side: usize) -> usize {
    let free = face_free_axes(axis);
    let (fixed_axis2, p2) = SQUARE_SIDES[side];
    let mut fixed = [false; 3];
    if pos {
        fixed[axis] = true;
    }
    fixed[free[fixed_axis2]] = p2;
    cube_edge_slot_index(free[1 - fixed_axis2], fixed)
}

/// One structural defect found by `validate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub cell: CellId,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl CubeComplex {
    pub fn dim(&self) -> usize {
        if !self.cubes3.is_empty() {
            3
        } else if !self.squares.is_empty() {
            2
        } else if !self.edges.is_empty() {
            1
        } else {
            0
        }
    }

    pub fn cell_count(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.squares.len() + self.cubes3.len()
    }

    pub fn cell_dim(&self, id: &str) -> Option<usize> {
        if self.vertices.contains(id) {
            Some(0)
        } else if self.edges.contains_key(id) {
            Some(1)
        } else if self.squares.contains_key(id) {
            Some(2)
        } else if self.cubes3.contains_key(id) {
            Some(3)
        } else {
            None
        }
    }

    /// All cell ids, vertices first, then edges, squares, 3-cubes.
    pub fn all_cells(&self) -> impl Iterator<Item = &CellId> {
        self.vertices
            .iter()
            .chain(self.edges.keys())
            .chain(self.squares.keys())
            .chain(self.cubes3.keys())
    }

    /// Directed complex edge realizing side `side` of square `sq`.
    pub fn side_directed(&self, sq: &Square, side: usize) -> (CellId, Dir) {
        let r = &sq.sides[side];
        (r.edge.clone(), r.dir)
    }

    /// The link vertex (edge-end) sitting at `corner` of square `sq` along `side`.
    pub fn side_end_at_corner(&self, sq: &Square, side: usize, corner: usize) -> (CellId, u8) {
        let (start, _end) = square_side_corners(side);
        let r = &sq.sides[side];
        let at_start = corner == start;
        let end_idx = match (at_start, r.dir) {
            (true, 1) => 0,
            (true, _) => 1,
            (false, 1) => 1,
            (false, _) => 0,
        };
        (r.edge.clone(), end_idx)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let mut push = |cell: &str, msg: String| {
            out.push(Violation { cell: cell.to_string(), message: msg });
        };

        for (id, e) in &self.edges {
            for v in &e.ends {
                if !self.vertices.contains(v) {
                    push(id, format!("edge endpoint `{v}` is not a vertex"));
                }
            }
        }

        for (id, s) in &self.squares {
            for c in &s.corners {
                if !self.vertices.contains(c) {
                    push(id, format!("square corner `{c}` is not a vertex"));
                }
            }
            for (k, r) in s.sides.iter().enumerate() {
                if !check_dir(r.dir) {
                    push(id, format!("side {k} has direction {}", r.dir));
                    continue;
                }
                let Some(e) = self.edges.get(&r.edge) else {
                    push(id, format!("side {k} references unknown edge `{}`", r.edge));
                    continue;
                };
                let (start, end) = square_side_corners(k);
                let (want_start, want_end) = (&s.corners[start], &s.corners[end]);
                let (got_start, got_end) = if r.dir == 1 {
                    (&e.ends[0], &e.ends[1])
                } else {
                    (&e.ends[1], &e.ends[0])
                };
                if got_start != want_start || got_end != want_end {
                    push(
                        id,
                        format!(
                            "side {k} edge `{}` runs {got_start}->{got_end} but corners demand {want_start}->{want_end}",
                            r.edge
                        ),
                    );
                }
            }
        }

        for (id, c) in &self.cubes3 {
            for v in &c.corners {
                if !self.vertices.contains(v) {
                    push(id, format!("cube corner `{v}` is not a vertex"));
                }
            }
            for (k, r) in c.edges.iter().enumerate() {
                if !check_dir(r.dir) {
                    push(id, format!("edge slot {k} has direction {}", r.dir));
                    continue;
                }
                let Some(e) = self.edges.get(&r.edge) else {
                    push(id, format!("edge slot {k} references unknown edge `{}`", r.edge));
                    continue;
                };
                let (start, end) = cube_edge_corners(k);
                let (want_start, want_end) = (&c.corners[start], &c.corners[end]);
                let (got_start, got_end) = if r.dir == 1 {
                    (&e.ends[0], &e.ends[1])
                } else {
                    (&e.ends[1], &e.ends[0])
                };
                if got_start != want_start || got_end != want_end {
                    push(id, format!("edge slot {k} endpoints disagree with corners"));
                }
            }
            for (f, fr) in c.faces.iter().enumerate() {
                let (axis, pos) = CUBE_FACES[f];
                let Some(sq) = self.squares.get(&fr.square) else {
                    push(id, format!("face {f} references unknown square `{}`", fr.square));
                    continue;
                };
                // corners
                for cc in 0..4usize {
                    let cube_corner = face_corner_to_cube(axis, pos, cc);
                    let want = &c.corners[cube_corner];
                    let got = &sq.corners[fr.sym.corner(cc)];
                    if want != got {
                        push(
                            id,
                            format!(
                                "face {f} square `{}` corner mismatch at cube corner {cube_corner}",
                                fr.square
                            ),
                        );
                    }
                }
                // edges: cube edge slot along the face must equal the mapped square side
                for side in 0..4usize {
                    let slot = face_side_to_cube_edge(axis, pos, side);
                    let want = &c.edges[slot];
                    let (fixed_axis2, p2) = SQUARE_SIDES[side];
                    let free_axis2 = 1 - fixed_axis2;
                    let mut fixed = [false; 2];
                    fixed[fixed_axis2] = p2;
                    let (a_out, fixed_out, dir) = fr.sym.edge(free_axis2, fixed);
                    let side_out = square_side_index(1 - a_out, fixed_out[1 - a_out]);
                    let target = &sq.sides[side_out];
                    if want.edge != target.edge || want.dir != target.dir * dir {
                        push(
                            id,
                            format!(
                                "face {f} square `{}` disagrees with edge slot {slot} (shared-edge consistency)",
                                fr.square
                            ),
                        );
                    }
                }
            }
        }
        ValidationReport { violations: out }
    }

    /// Edge ids incident to a vertex, each tagged with the end index.
    pub fn edge_ends_at(&self, v: &str) -> Vec<(CellId, u8)> {
        let mut out = Vec::new();
        for (id, e) in &self.edges {
            if e.ends[0] == v {
                out.push((id.clone(), 0));
            }
            if e.ends[1] == v {
                out.push((id.clone(), 1));
            }
        }
        out
    }

    /// Connectivity of the underlying cell incidence graph.
    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut stack = vec![self.vertices.iter().next().unwrap().as_str()];
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in self.edges.values() {
            adj.entry(e.ends[0].as_str()).or_default().push(e.ends[1].as_str());
            adj.entry(e.ends[1].as_str()).or_default().push(e.ends[0].as_str());
        }
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            if let Some(ns) = adj.get(v) {
                stack.extend(ns.iter().copied());
            }
        }
        // squares/cubes attach along vertices, so vertex connectivity decides
        seen.len() == self.vertices.len()
    }
}

// ---------------------------------------------------------------------------
// Links
// ---------------------------------------------------------------------------

/// A corner cell of the link: the `slot`-th corner of the `(dim D + k)`-cube
/// `owner` at `D`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkCellRef {
    pub owner: CellId,
    pub slot: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEdge {
    pub cell: LinkCellRef,
    pub ends: [LinkCellRef; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkTriangle {
    pub cell: LinkCellRef,
    pub sides: [LinkCellRef; 3],
}

/// Link of a cube, kept as a multicomplex: loops and parallel 1-simplices are
/// representable, and `simplicial()` is a verdict rather than an invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkComplex {
    pub vertices: Vec<LinkCellRef>,
    pub edges: Vec<LinkEdge>,
    pub triangles: Vec<LinkTriangle>,
}

impl LinkComplex {
    /// A loop or a pair of parallel 1-simplices with equal boundary, if any.
    pub fn loop_or_bigon(&self) -> Option<Vec<LinkCellRef>> {
        for e in &self.edges {
            if e.ends[0] == e.ends[1] {
                return Some(vec![e.cell.clone()]);
            }
        }
        let mut seen: BTreeMap<(LinkCellRef, LinkCellRef), &LinkEdge> = BTreeMap::new();
        for e in &self.edges {
            let mut key = (e.ends[0].clone(), e.ends[1].clone());
            if key.0 > key.1 {
                key = (key.1, key.0);
            }
            if let Some(prev) = seen.get(&key) {
                return Some(vec![prev.cell.clone(), e.cell.clone()]);
            }
            seen.insert(key, e);
        }
        None
    }

    pub fn is_simplicial(&self) -> bool {
        self.loop_or_bigon().is_none()
    }

    /// Vertex set of a triangle, via its three sides.
    fn triangle_vertices(&self, t: &LinkTriangle) -> Option<BTreeSet<LinkCellRef>> {
        let mut out = BTreeSet::new();
        for s in &t.sides {
            let e = self.edges.iter().find(|e| e.cell == *s)?;
            out.insert(e.ends[0].clone());
            out.insert(e.ends[1].clone());
        }
        Some(out)
    }

    /// Flagness for simplicial links under the dimension cap: every 3-clique
    /// spans a 2-simplex and no 4-clique exists at all. Returns the offending
    /// clique on failure.
    pub fn flag_witness(&self) -> Result<Option<Vec<LinkCellRef>>, Error> {
        if !self.is_simplicial() {
            return Err(Error::NonSimplicialLink);
        }
        let n = self.vertices.len();
        let idx: BTreeMap<&LinkCellRef, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj = vec![vec![false; n]; n];
        for e in &self.edges {
            let a = idx[&e.ends[0]];
            let b = idx[&e.ends[1]];
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let mut filled: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for t in &self.triangles {
            if let Some(vs) = self.triangle_vertices(t) {
                filled.insert(vs.iter().map(|v| idx[v]).collect());
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if !adj[a][b] {
                    continue;
                }
                for c in (b + 1)..n {
                    if !(adj[a][c] && adj[b][c]) {
                        continue;
                    }
                    let tri: BTreeSet<usize> = [a, b, c].into_iter().collect();
                    if !filled.contains(&tri) {
                        return Ok(Some(vec![
                            self.vertices[a].clone(),
                            self.vertices[b].clone(),
                            self.vertices[c].clone(),
                        ]));
                    }
                    for d in (c + 1)..n {
                        if adj[a][d] && adj[b][d] && adj[c][d] {
                            return Ok(Some(vec![
                                self.vertices[a].clone(),
                                self.vertices[b].clone(),
                                self.vertices[c].clone(),
                                self.vertices[d].clone(),
                            ]));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

impl CubeComplex {
    /// Link of a cube of dimension <= 2. Vertices of the link are corners of
    /// `(dim+1)`-cubes at `D`, 1-simplices corners of `(dim+2)`-cubes,
    /// 2-simplices corners of `(dim+3)`-cubes.
    pub fn link(&self, d: &str) -> Result<LinkComplex, Error> {
        match self.cell_dim(d) {
            None => Err(Error::UnknownCell(d.to_string())),
            Some(0) => Ok(self.link_of_vertex(d)),
            Some(1) => Ok(self.link_of_edge(d)),
            Some(2) => Ok(self.link_of_square(d)),
            Some(_) => Err(Error::DimensionCap("links are defined for cubes of dimension <= 2".into())),
        }
    }

    fn link_of_vertex(&self, v: &str) -> LinkComplex {
        let mut link = LinkComplex::default();
        for (id, e) in &self.edges {
            for end in 0..2u8 {
                if e.ends[end as usize] == v {
                    link.vertices.push(LinkCellRef { owner: id.clone(), slot: end });
                }
            }
        }
        for (id, s) in &self.squares {
            for corner in 0..4usize {
                if s.corners[corner] == v {
                    let [side_a, side_b] = square_corner_sides(corner);
                    let (ea, ka) = self.side_end_at_corner(s, side_a, corner);
                    let (eb, kb) = self.side_end_at_corner(s, side_b, corner);
                    link.edges.push(LinkEdge {
                        cell: LinkCellRef { owner: id.clone(), slot: corner as u8 },
                        ends: [
                            LinkCellRef { owner: ea, slot: ka },
                            LinkCellRef { owner: eb, slot: kb },
                        ],
                    });
                }
            }
        }
        for (id, c) in &self.cubes3 {
            for corner in 0..8usize {
                if c.corners[corner] == v {
                    let mut sides = Vec::with_capacity(3);
                    for axis in 0..3usize {
                        let pos = corner & (1 << axis) != 0;
                        let f = cube_face_index(axis, pos);
                        let fr = &c.faces[f];
                        // square corner mapping to this cube corner
                        let free = face_free_axes(axis);
                        let mut sc = 0usize;
                        if corner & (1 << free[0]) != 0 {
                            sc |= 1;
                        }
                        if corner & (1 << free[1]) != 0 {
                            sc |= 2;
                        }
                        sides.push(LinkCellRef {
                            owner: fr.square.clone(),
                            slot: fr.sym.corner(sc) as u8,
                        });
                    }
                    link.triangles.push(LinkTriangle {
                        cell: LinkCellRef { owner: id.clone(), slot: corner as u8 },
                        sides: [sides[0].clone(), sides[1].clone(), sides[2].clone()],
                    });
                }
            }
        }
        link
    }

    fn link_of_edge(&self, e: &str) -> LinkComplex {
        let mut link = LinkComplex::default();
        for (id, s) in &self.squares {
            for side in 0..4usize {
                if s.sides[side].edge == e {
                    link.vertices.push(LinkCellRef { owner: id.clone(), slot: side as u8 });
                }
            }
        }
        for (id, c) in &self.cubes3 {
            for slot in 0..12usize {
                if c.edges[slot].edge == e {
                    let (axis, fixed) = cube_edge_slot(slot);
                    let mut ends = Vec::with_capacity(2);
                    for other in (0..3).filter(|&i| i != axis) {
                        let f = cube_face_index(other, fixed[other]);
                        let fr = &c.faces[f];
                        // which side of the face chart carries this edge slot
                        let free = face_free_axes(other);
                        let free_axis2 = free.iter().position(|&a| a == axis).unwrap();
                        let third = free[1 - free_axis2];
                        let side_in_chart = square_side_index(1 - free_axis2, fixed[third]);
                        let (fa2, p2) = SQUARE_SIDES[side_in_chart];
                        let mut f2 = [false; 2];
                        f2[fa2] = p2;
                        let (a_out, fixed_out, _dir) = fr.sym.edge(1 - fa2, f2);
                        let side_out = square_side_index(1 - a_out, fixed_out[1 - a_out]);
                        ends.push(LinkCellRef { owner: fr.square.clone(), slot: side_out as u8 });
                    }
                    link.edges.push(LinkEdge {
                        cell: LinkCellRef { owner: id.clone(), slot: slot as u8 },
                        ends: [ends[0].clone(), ends[1].clone()],
                    });
                }
            }
        }
        link
    }

    fn link_of_square(&self, s: &str) -> LinkComplex {
        let mut link = LinkComplex::default();
        for (id, c) in &self.cubes3 {
            for f in 0..6usize {
                if c.faces[f].square == s {
                    link.vertices.push(LinkCellRef { owner: id.clone(), slot: f as u8 });
                }
            }
        }
        link
    }

    /// Simplicity: no loops and no bigons in the link of any cube.
    pub fn is_simple(&self) -> Result<(), (CellId, Vec<LinkCellRef>)> {
        for d in self.vertices.iter().chain(self.edges.keys()).chain(self.squares.keys()) {
            let link = self.link(d).expect("cells enumerated from the complex");
            if let Some(w) = link.loop_or_bigon() {
                return Err((d.clone(), w));
            }
        }
        Ok(())
    }

    /// Gromov's criterion: simple, and the link of every 0-cube is flag.
    pub fn is_npc(&self) -> Result<(), NpcFailure> {
        if let Err((cell, witness)) = self.is_simple() {
            return Err(NpcFailure::NotSimple { cell, witness });
        }
        for v in &self.vertices {
            let link = self.link_of_vertex(v);
            match link.flag_witness() {
                Ok(None) => {}
                Ok(Some(clique)) => {
                    return Err(NpcFailure::NotFlag { vertex: v.clone(), clique });
                }
                Err(_) => unreachable!("simplicity was just established"),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NpcFailure {
    NotSimple { cell: CellId, witness: Vec<LinkCellRef> },
    NotFlag { vertex: CellId, clique: Vec<LinkCellRef> },
}

// ---------------------------------------------------------------------------
// Subcomplexes
// ---------------------------------------------------------------------------

/// A boundary-closed selection of cells of an ambient complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcomplex {
    pub cells: BTreeSet<CellId>,
}

impl Subcomplex {
    pub fn full(x: &CubeComplex) -> Self {
        Subcomplex { cells: x.all_cells().cloned().collect() }
    }

    pub fn from_cells<I: IntoIterator<Item = CellId>>(x: &CubeComplex, cells: I) -> Result<Self, Error> {
        let mut set: BTreeSet<CellId> = cells.into_iter().collect();
        let mut grow: Vec<CellId> = set.iter().cloned().collect();
        while let Some(c) = grow.pop() {
            match x.cell_dim(&c) {
                None => return Err(Error::UnknownCell(c)),
                Some(0) => {}
                Some(1) => {
                    for v in &x.edges[&c].ends {
                        if set.insert(v.clone()) {
                            grow.push(v.clone());
                        }
                    }
                }
                Some(2) => {
                    let s = &x.squares[&c];
                    for v in &s.corners {
                        if set.insert(v.clone()) {
                            grow.push(v.clone());
                        }
                    }
                    for r in &s.sides {
                        if set.insert(r.edge.clone()) {
                            grow.push(r.edge.clone());
                        }
                    }
                }
                Some(_) => {
                    let cu = &x.cubes3[&c];
                    for v in &cu.corners {
                        if set.insert(v.clone()) {
                            grow.push(v.clone());
                        }
                    }
                    for r in &cu.edges {
                        if set.insert(r.edge.clone()) {
                            grow.push(r.edge.clone());
                        }
                    }
                    for f in &cu.faces {
                        if set.insert(f.square.clone()) {
                            grow.push(f.square.clone());
                        }
                    }
                }
            }
        }
        Ok(Subcomplex { cells: set })
    }

    /// Extract the subcomplex as a complex of its own, keeping cell ids.
    pub fn extract(&self, x: &CubeComplex) -> CubeComplex {
        let mut out = CubeComplex::default();
        for c in &self.cells {
            match x.cell_dim(c) {
                Some(0) => {
                    out.vertices.insert(c.clone());
                }
                Some(1) => {
                    out.edges.insert(c.clone(), x.edges[c].clone());
                }
                Some(2) => {
                    out.squares.insert(c.clone(), x.squares[c].clone());
                }
                Some(3) => {
                    out.cubes3.insert(c.clone(), x.cubes3[c].clone());
                }
                _ => {}
            }
        }
        out
    }

    pub fn contains(&self, id: &str) -> bool {
        self.cells.contains(id)
    }
}

// ---------------------------------------------------------------------------
// Product with an interval
// ---------------------------------------------------------------------------

/// `X x I` together with the two end embeddings and the collapsing cell map.
#[derive(Debug, Clone)]
pub struct ProductWithInterval {
    pub complex: CubeComplex,
    /// cell of X -> cell at level -1
    pub lo: BTreeMap<CellId, CellId>,
    /// cell of X -> cell at level +1
    pub hi: BTreeMap<CellId, CellId>,
    /// cell of X -> the mid cell `c x I` (one dimension up)
    pub mid: BTreeMap<CellId, CellId>,
    /// collapse X x I -> X
    pub projection: BTreeMap<CellId, CellId>,
}

pub fn level_cell(c: &str, hi: bool) -> CellId {
    format!("{c}@{}", if hi { "+" } else { "-" })
}

pub fn mid_cell(c: &str) -> CellId {
    format!("{c}@I")
}

/// Build `X x I` for `dim X <= 2`.
pub fn product_with_interval(x: &CubeComplex) -> Result<ProductWithInterval, Error> {
    if x.dim() > 2 {
        return Err(Error::DimensionCap("product with interval needs dim <= 2".into()));
    }
    let mut p = CubeComplex::default();
    let mut lo = BTreeMap::new();
    let mut hi = BTreeMap::new();
    let mut mid = BTreeMap::new();
    let mut projection = BTreeMap::new();

    for v in &x.vertices {
        for level in [false, true] {
            let c = level_cell(v, level);
            p.vertices.insert(c.clone());
            projection.insert(c.clone(), v.clone());
            if level {
                hi.insert(v.clone(), c);
            } else {
                lo.insert(v.clone(), c);
            }
        }
        let m = mid_cell(v);
        p.edges.insert(
            m.clone(),
            Edge { ends: [level_cell(v, false), level_cell(v, true)] },
        );
        projection.insert(m.clone(), v.clone());
        mid.insert(v.clone(), m);
    }

    for (id, e) in &x.edges {
        for level in [false, true] {
            let c = level_cell(id, level);
            p.edges.insert(
                c.clone(),
                Edge { ends: [level_cell(&e.ends[0], level), level_cell(&e.ends[1], level)] },
            );
            projection.insert(c.clone(), id.clone());
            if level {
                hi.insert(id.clone(), c);
            } else {
                lo.insert(id.clone(), c);
            }
        }
        // square e x I: x along e, y along I
        let m = mid_cell(id);
        p.squares.insert(
            m.clone(),
            Square {
                corners: [
                    level_cell(&e.ends[0], false),
                    level_cell(&e.ends[1], false),
                    level_cell(&e.ends[0], true),
                    level_cell(&e.ends[1], true),
                ],
                sides: [
                    EdgeRef { edge: level_cell(id, false), dir: 1 },
                    EdgeRef { edge: level_cell(id, true), dir: 1 },
                    EdgeRef { edge: mid_cell(&e.ends[0]), dir: 1 },
                    EdgeRef { edge: mid_cell(&e.ends[1]), dir: 1 },
                ],
            },
        );
        projection.insert(m.clone(), id.clone());
        mid.insert(id.clone(), m);
    }

    for (id, s) in &x.squares {
        for level in [false, true] {
            let c = level_cell(id, level);
            p.squares.insert(
                c.clone(),
                Square {
                    corners: [
                        level_cell(&s.corners[0], level),
                        level_cell(&s.corners[1], level),
                        level_cell(&s.corners[2], level),
                        level_cell(&s.corners[3], level),
                    ],
                    sides: [
                        EdgeRef { edge: level_cell(&s.sides[0].edge, level), dir: s.sides[0].dir },
                        EdgeRef { edge: level_cell(&s.sides[1].edge, level), dir: s.sides[1].dir },
                        EdgeRef { edge: level_cell(&s.sides[2].edge, level), dir: s.sides[2].dir },
                        EdgeRef { edge: level_cell(&s.sides[3].edge, level), dir: s.sides[3].dir },
                    ],
                },
            );
            projection.insert(c.clone(), id.clone());
            if level {
                hi.insert(id.clone(), c);
            } else {
                lo.insert(id.clone(), c);
            }
        }
        // cube s x I: (x,y) from s, z along I
        let m = mid_cell(id);
        let mut corners: Vec<CellId> = Vec::with_capacity(8);
        for level in [false, true] {
            for k in 0..4usize {
                corners.push(level_cell(&s.corners[k], level));
            }
        }
        let mut edges: Vec<EdgeRef> = Vec::with_capacity(12);
        // x-edges at (y,z): image of the y=±1 sides at each level
        for z in [false, true] {
            for yside in 0..2usize {
                let r = &s.sides[yside];
                edges.push(EdgeRef { edge: level_cell(&r.edge, z), dir: r.dir });
            }
        }
        // reorder: slots 0..3 are (y,z) = (0,0),(1,0),(0,1),(1,1)
        let x_edges = [edges[0].clone(), edges[1].clone(), edges[2].clone(), edges[3].clone()];
        edges.clear();
        // y-edges at (x,z): sides x=-1 (2) and x=+1 (3)
        let mut y_edges = Vec::with_capacity(4);
        for z in [false, true] {
            for xside in 2..4usize {
                let r = &s.sides[xside];
                y_edges.push(EdgeRef { edge: level_cell(&r.edge, z), dir: r.dir });
            }
        }
        // z-edges at (x,y): corner verticals
        let mut z_edges = Vec::with_capacity(4);
        for k in 0..4usize {
            z_edges.push(EdgeRef { edge: mid_cell(&s.corners[k]), dir: 1 });
        }
        let mut all_edges: Vec<EdgeRef> = Vec::with_capacity(12);
        all_edges.extend(x_edges);
        all_edges.extend(y_edges);
        all_edges.extend(z_edges);

        let id2 = SquareSym::identity();
        let flip_first = SquareSym { perm: [0, 1], flip: [true, false] };
        let faces: [FaceRef; 6] = [
            // x=-1: chart (y,z); the mid square of the x=-1 side, first axis
            // reversed when the side slot runs against the edge
            face_for_side(s, 2, &flip_first),
            face_for_side(s, 3, &flip_first),
            face_for_side(s, 0, &flip_first),
            face_for_side(s, 1, &flip_first),
            FaceRef { square: level_cell(id, false), sym: id2 },
            FaceRef { square: level_cell(id, true), sym: id2 },
        ];

        p.cubes3.insert(
            m.clone(),
            Cube3 {
                corners: corners.try_into().unwrap(),
                edges: all_edges.try_into().unwrap(),
                faces,
            },
        );
        projection.insert(m.clone(), id.clone());
        mid.insert(id.clone(), m);
    }

    Ok(ProductWithInterval { complex: p, lo, hi, mid, projection })
}

fn face_for_side(s: &Square, side: usize, flip_first: &SquareSym) -> FaceRef {
    let r = &s.sides[side];
    let sym = if r.dir == 1 { SquareSym::identity() } else { *flip_first };
    FaceRef { square: mid_cell(&r.edge), sym }
}

// ---------------------------------------------------------------------------
// Small constructors used across tests and fixtures
// ---------------------------------------------------------------------------

pub mod build {
    use super::*;

    pub fn vertex(x: &mut CubeComplex, id: &str) {
        x.vertices.insert(id.to_string());
    }

    pub fn edge(x: &mut CubeComplex, id: &str, from: &str, to: &str) {
        x.vertices.insert(from.to_string());
        x.vertices.insert(to.to_string());
        x.edges.insert(id.to_string(), Edge { ends: [from.to_string(), to.to_string()] });
    }

    /// Square from four directed side references; corners are inferred.
    pub fn square(x: &mut CubeComplex, id: &str, sides: [(&str, Dir); 4]) {
        let get = |x: &CubeComplex, (e, d): (&str, Dir), want_start: bool| -> CellId {
            let ends = &x.edges[e].ends;
            let idx = if (d == 1) == want_start { 0 } else { 1 };
            ends[idx].clone()
        };
        let c00 = get(x, sides[0], true);
        let c10 = get(x, sides[0], false);
        let c01 = get(x, sides[1], true);
        let c11 = get(x, sides[1], false);
        x.squares.insert(
            id.to_string(),
            Square {
                corners: [c00, c10, c01, c11],
                sides: sides.map(|(e, d)| EdgeRef { edge: e.to_string(), dir: d }),
            },
        );
    }

    /// A lone square with fresh corners and sides.
    pub fn lone_square(prefix: &str) -> CubeComplex {
        let mut x = CubeComplex::default();
        let v = |i: usize| format!("{prefix}v{i}");
        for i in 0..4 {
            vertex(&mut x, &v(i));
        }
        edge(&mut x, &format!("{prefix}b"), &v(0), &v(1));
        edge(&mut x, &format!("{prefix}t"), &v(2), &v(3));
        edge(&mut x, &format!("{prefix}l"), &v(0), &v(2));
        edge(&mut x, &format!("{prefix}r"), &v(1), &v(3));
        square(
            &mut x,
            &format!("{prefix}s"),
            [
                (&format!("{prefix}b"), 1),
                (&format!("{prefix}t"), 1),
                (&format!("{prefix}l"), 1),
                (&format!("{prefix}r"), 1),
            ],
        );
        x
    }

    /// One-vertex torus: a single square with both side pairs glued.
    pub fn torus() -> CubeComplex {
        let mut x = CubeComplex::default();
        vertex(&mut x, "v");
        edge(&mut x, "a", "v", "v");
        edge(&mut x, "b", "v", "v");
        square(&mut x, "s", [("a", 1), ("a", 1), ("b", 1), ("b", 1)]);
        x
    }

    /// Moebius square: bottom and top glued by a flip.
    pub fn moebius() -> CubeComplex {
        let mut x = CubeComplex::default();
        vertex(&mut x, "p");
        vertex(&mut x, "q");
        edge(&mut x, "a", "p", "q");
        edge(&mut x, "m1", "p", "q");
        edge(&mut x, "m2", "q", "p");
        square(&mut x, "s", [("a", 1), ("a", -1), ("m1", 1), ("m2", 1)]);
        x
    }

    /// Single square whose one hyperplane crosses itself.
    pub fn self_crossing() -> CubeComplex {
        let mut x = CubeComplex::default();
        vertex(&mut x, "v");
        edge(&mut x, "a", "v", "v");
        edge(&mut x, "b", "v", "v");
        square(&mut x, "s", [("a", 1), ("b", 1), ("b", 1), ("a", 1)]);
        x
    }

    /// Single square on four loops: both hyperplanes self-osculate, nothing else.
    pub fn self_osculating() -> CubeComplex {
        let mut x = CubeComplex::default();
        vertex(&mut x, "v");
        for e in ["a", "b", "c", "d"] {
            edge(&mut x, e, "v", "v");
        }
        square(&mut x, "s", [("a", 1), ("b", 1), ("c", 1), ("d", 1)]);
        x
    }

    /// Three squares in which two crossing hyperplanes also osculate.
    pub fn inter_osculating() -> CubeComplex {
        let mut x = CubeComplex::default();
        for i in 1..=6 {
            vertex(&mut x, &format!("p{i}"));
        }
        edge(&mut x, "b", "p1", "p2");
        edge(&mut x, "t", "p3", "p4");
        edge(&mut x, "l", "p1", "p3");
        edge(&mut x, "r", "p2", "p4");
        edge(&mut x, "b2", "p2", "p3");
        edge(&mut x, "t2", "p4", "p5");
        edge(&mut x, "r2", "p3", "p5");
        edge(&mut x, "k1", "p1", "p6");
        edge(&mut x, "k2", "p2", "p6");
        square(&mut x, "s1", [("b", 1), ("t", 1), ("l", 1), ("r", 1)]);
        square(&mut x, "s2", [("b2", 1), ("t2", 1), ("r", 1), ("r2", 1)]);
        square(&mut x, "s3", [("b2", -1), ("k1", 1), ("l", -1), ("k2", 1)]);
        x
    }

    /// Horizontal strip of `n` squares: rungs r0..rn, bottoms bi, tops ti.
    pub fn strip(n: usize) -> CubeComplex {
        let mut x = CubeComplex::default();
        for i in 0..=n {
            vertex(&mut x, &format!("x{i}"));
            vertex(&mut x, &format!("y{i}"));
            edge(&mut x, &format!("r{i}"), &format!("x{i}"), &format!("y{i}"));
        }
        for i in 0..n {
            edge(&mut x, &format!("b{i}"), &format!("x{i}"), &format!("x{}", i + 1));
            edge(&mut x, &format!("t{i}"), &format!("y{i}"), &format!("y{}", i + 1));
            square(
                &mut x,
                &format!("s{i}"),
                [
                    (&format!("b{i}"), 1),
                    (&format!("t{i}"), 1),
                    (&format!("r{i}"), 1),
                    (&format!("r{}", i + 1), 1),
                ],
            );
        }
        x
    }

    /// The solid 3-cube, as `square x I`.
    pub fn solid_cube() -> CubeComplex {
        product_with_interval(&lone_square("")).unwrap().complex
    }

    /// `n` squares glued around a central vertex in a cycle, optionally
    /// filled by a 3-cube when `n == 3`.
    pub fn squares_around_vertex(n: usize, fill: bool) -> CubeComplex {
        // spokes e0..e_{n-1} from center c, outer verticals u_i, squares
        // between consecutive spokes
        let mut x = CubeComplex::default();
        vertex(&mut x, "c");
        for i in 0..n {
            vertex(&mut x, &format!("m{i}"));
            edge(&mut x, &format!("e{i}"), "c", &format!("m{i}"));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            vertex(&mut x, &format!("o{i}"));
            edge(&mut x, &format!("f{i}"), &format!("m{i}"), &format!("o{i}"));
            edge(&mut x, &format!("g{i}"), &format!("m{j}"), &format!("o{i}"));
            square(
                &mut x,
                &format!("s{i}"),
                [
                    (&format!("e{i}"), 1),
                    (&format!("g{i}"), 1),
                    (&format!("e{j}"), 1),
                    (&format!("f{i}"), 1),
                ],
            );
        }
        if fill && n == 3 {
            vertex(&mut x, "w");
            for i in 0..3 {
                edge(&mut x, &format!("h{i}"), &format!("o{i}"), "w");
            }
            // outer shell squares closing the cube boundary
            square(&mut x, "sx", [("f0", 1), ("h2", 1), ("g2", 1), ("h0", 1)]);
            square(&mut x, "sy", [("g0", 1), ("h1", 1), ("f1", 1), ("h0", 1)]);
            square(&mut x, "sz", [("f2", 1), ("h1", 1), ("g1", 1), ("h2", 1)]);
            // cube with corner c at origin; axes along e0, e1, e2
            // corners: 000=c, 100=m0, 010=m1, 001=m2, 110=o0, 011=o1, 101=o2, 111=w
            let corners = [
                "c".to_string(),
                "m0".to_string(),
                "m1".to_string(),
                "o0".to_string(),
                "m2".to_string(),
                "o2".to_string(),
                "o1".to_string(),
                "w".to_string(),
            ];
            let er = |e: &str, d: Dir| EdgeRef { edge: e.to_string(), dir: d };
            let edges = [
                // x-edges (y,z) = 00,10,01,11
                er("e0", 1),
                er("g0", 1),
                er("f2", 1),
                er("h1", 1),
                // y-edges (x,z)
                er("e1", 1),
                er("f0", 1),
                er("g1", 1),
                er("h2", 1),
                // z-edges (x,y)
                er("e2", 1),
                er("g2", 1),
                er("f1", 1),
                er("h0", 1),
            ];
            // faces: x=-1 chart (y,z): square s1 spanned by e1,e2 at c
            // we specify each face by matching its chart onto a square
            let faces = [
                face_by_edges(&x, &corners, 0, false),
                face_by_edges(&x, &corners, 0, true),
                face_by_edges(&x, &corners, 1, false),
                face_by_edges(&x, &corners, 1, true),
                face_by_edges(&x, &corners, 2, false),
                face_by_edges(&x, &corners, 2, true),
            ];
            let edges_arr = edges;
            let cube = Cube3 { corners, edges: edges_arr, faces: faces.map(|f| f.unwrap()) };
            x.cubes3.insert("cube".to_string(), cube);
        }
        x
    }

    /// Find the square of `x` matching face `(axis,pos)` of a cube whose
    /// corner list is given, and the symmetry aligning the charts. Searches
    /// all squares and symmetries; intended for small hand-built complexes.
    pub fn face_by_edges(
        x: &CubeComplex,
        corners: &[CellId; 8],
        axis: usize,
        pos: bool,
    ) -> Option<FaceRef> {
        let want: Vec<CellId> = (0..4)
            .map(|c| corners[face_corner_to_cube(axis, pos, c)].clone())
            .collect();
        for (id, s) in &x.squares {
            for sym in SquareSym::all() {
                if (0..4).all(|c| s.corners[sym.corner(c)] == want[c]) {
                    // corner match is necessary; validate() confirms edges later
                    let fr = FaceRef { square: id.clone(), sym };
                    return Some(fr);
                }
            }
        }
        None
    }
}
