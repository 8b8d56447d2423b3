//! Cubical maps between complexes and the local conditions on them:
//! immersion, local isometry, local convexity of subcomplexes, and validity
//! of partial local isometries.
//!
//! A map stores, per cell, an image cell of the same dimension plus the
//! symmetry of the standard cube aligning the two characteristic maps:
//! `f ∘ char_c = char_{image(c)} ∘ sym(c)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{
    square_side_index, CellId, CubeComplex, LinkCellRef, LinkComplex, Subcomplex, CUBE_FACES,
    SQUARE_SIDES,
};
use crate::error::Error;
use crate::sym::{CubeSym, Dir, SquareSym};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicalMap {
    pub domain: CubeComplex,
    pub codomain: CubeComplex,
    pub vertex_map: BTreeMap<CellId, CellId>,
    pub edge_map: BTreeMap<CellId, (CellId, Dir)>,
    pub square_map: BTreeMap<CellId, (CellId, SquareSym)>,
    pub cube_map: BTreeMap<CellId, (CellId, CubeSym)>,
}

impl CubicalMap {
    pub fn new(domain: CubeComplex, codomain: CubeComplex) -> Self {
        CubicalMap {
            domain,
            codomain,
            vertex_map: BTreeMap::new(),
            edge_map: BTreeMap::new(),
            square_map: BTreeMap::new(),
            cube_map: BTreeMap::new(),
        }
    }

    pub fn identity(x: &CubeComplex) -> Self {
        let mut m = CubicalMap::new(x.clone(), x.clone());
        for v in &x.vertices {
            m.vertex_map.insert(v.clone(), v.clone());
        }
        for e in x.edges.keys() {
            m.edge_map.insert(e.clone(), (e.clone(), 1));
        }
        for s in x.squares.keys() {
            m.square_map.insert(s.clone(), (s.clone(), SquareSym::identity()));
        }
        for c in x.cubes3.keys() {
            m.cube_map.insert(c.clone(), (c.clone(), CubeSym::identity()));
        }
        m
    }

    /// The inclusion of a boundary-closed cell selection, as a map from the
    /// extracted complex into the ambient one.
    pub fn inclusion(x: &CubeComplex, sub: &Subcomplex) -> Self {
        let dom = sub.extract(x);
        let mut m = CubicalMap::new(dom.clone(), x.clone());
        for v in &dom.vertices {
            m.vertex_map.insert(v.clone(), v.clone());
        }
        for e in dom.edges.keys() {
            m.edge_map.insert(e.clone(), (e.clone(), 1));
        }
        for s in dom.squares.keys() {
            m.square_map.insert(s.clone(), (s.clone(), SquareSym::identity()));
        }
        for c in dom.cubes3.keys() {
            m.cube_map.insert(c.clone(), (c.clone(), CubeSym::identity()));
        }
        m
    }

    pub fn image_of(&self, cell: &str) -> Option<CellId> {
        self.vertex_map
            .get(cell)
            .cloned()
            .or_else(|| self.edge_map.get(cell).map(|(c, _)| c.clone()))
            .or_else(|| self.square_map.get(cell).map(|(c, _)| c.clone()))
            .or_else(|| self.cube_map.get(cell).map(|(c, _)| c.clone()))
    }

    /// Image of a directed edge.
    pub fn directed_edge(&self, e: &str, dir: Dir) -> Option<(CellId, Dir)> {
        let (e2, d) = self.edge_map.get(e)?;
        Some((e2.clone(), d * dir))
    }

    /// Boundary compatibility and totality.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidMap(msg));
        for v in &self.domain.vertices {
            let Some(w) = self.vertex_map.get(v) else {
                return bad(format!("vertex `{v}` has no image"));
            };
            if !self.codomain.vertices.contains(w) {
                return bad(format!("vertex `{v}` maps to unknown `{w}`"));
            }
        }
        for (id, e) in &self.domain.edges {
            let Some((e2, d)) = self.edge_map.get(id) else {
                return bad(format!("edge `{id}` has no image"));
            };
            let Some(target) = self.codomain.edges.get(e2) else {
                return bad(format!("edge `{id}` maps to unknown `{e2}`"));
            };
            let (w0, w1) = if *d == 1 {
                (&target.ends[0], &target.ends[1])
            } else {
                (&target.ends[1], &target.ends[0])
            };
            if self.vertex_map.get(&e.ends[0]) != Some(w0) || self.vertex_map.get(&e.ends[1]) != Some(w1) {
                return bad(format!("edge `{id}`: endpoint images disagree"));
            }
        }
        for (id, s) in &self.domain.squares {
            let Some((s2, sym)) = self.square_map.get(id) else {
                return bad(format!("square `{id}` has no image"));
            };
            let Some(target) = self.codomain.squares.get(s2) else {
                return bad(format!("square `{id}` maps to unknown `{s2}`"));
            };
            for c in 0..4usize {
                if self.vertex_map.get(&s.corners[c]) != Some(&target.corners[sym.corner(c)]) {
                    return bad(format!("square `{id}`: corner {c} image disagrees"));
                }
            }
            for side in 0..4usize {
                let (fa, p) = SQUARE_SIDES[side];
                let mut fixed = [false; 2];
                fixed[fa] = p;
                let (a_out, fixed_out, dir) = sym.edge(1 - fa, fixed);
                let side_out = square_side_index(1 - a_out, fixed_out[1 - a_out]);
                let want = &target.sides[side_out];
                let Some((e2, d2)) = self.directed_edge(&s.sides[side].edge, s.sides[side].dir) else {
                    return bad(format!("square `{id}`: side {side} edge unmapped"));
                };
                if e2 != want.edge || d2 != want.dir * dir {
                    return bad(format!("square `{id}`: side {side} image disagrees"));
                }
            }
        }
        for (id, c) in &self.domain.cubes3 {
            let Some((c2, sym)) = self.cube_map.get(id) else {
                return bad(format!("cube `{id}` has no image"));
            };
            let Some(target) = self.codomain.cubes3.get(c2) else {
                return bad(format!("cube `{id}` maps to unknown `{c2}`"));
            };
            for k in 0..8usize {
                if self.vertex_map.get(&c.corners[k]) != Some(&target.corners[sym.corner(k)]) {
                    return bad(format!("cube `{id}`: corner {k} image disagrees"));
                }
            }
            for f in 0..6usize {
                let (axis, pos) = CUBE_FACES[f];
                let (axis2, pos2, rho) = sym.face_chart(axis, pos);
                let f2 = crate::complex::cube_face_index(axis2, pos2);
                let src = &c.faces[f];
                let tgt = &target.faces[f2];
                let Some((q2, qsym)) = self.square_map.get(&src.square) else {
                    return bad(format!("cube `{id}`: face {f} square unmapped"));
                };
                if *q2 != tgt.square {
                    return bad(format!("cube `{id}`: face {f} square image disagrees"));
                }
                // f ∘ char_Q = char_Q' ∘ qsym must match tgt.sym ∘ rho ∘ src.sym^{-1}
                let want = tgt.sym.compose(&rho).compose(&src.sym.inverse());
                if *qsym != want {
                    return bad(format!("cube `{id}`: face {f} symmetry disagrees"));
                }
            }
        }
        Ok(())
    }

    /// `g ∘ self` (apply `self` first).
    pub fn compose(&self, g: &CubicalMap) -> Result<CubicalMap, Error> {
        if self.codomain != g.domain {
            return Err(Error::Mismatch("compose: codomain of first map is not domain of second".into()));
        }
        let mut out = CubicalMap::new(self.domain.clone(), g.codomain.clone());
        for (v, w) in &self.vertex_map {
            out.vertex_map.insert(v.clone(), g.vertex_map[w].clone());
        }
        for (e, (e2, d)) in &self.edge_map {
            let (e3, d2) = &g.edge_map[e2];
            out.edge_map.insert(e.clone(), (e3.clone(), d * d2));
        }
        for (s, (s2, sym)) in &self.square_map {
            let (s3, sym2) = &g.square_map[s2];
            out.square_map.insert(s.clone(), (s3.clone(), sym2.compose(sym)));
        }
        for (c, (c2, sym)) in &self.cube_map {
            let (c3, sym2) = &g.cube_map[c2];
            out.cube_map.insert(c.clone(), (c3.clone(), sym2.compose(sym)));
        }
        Ok(out)
    }

    pub fn is_injective(&self) -> bool {
        let vs: BTreeSet<_> = self.vertex_map.values().collect();
        let es: BTreeSet<_> = self.edge_map.values().map(|(c, _)| c).collect();
        let ss: BTreeSet<_> = self.square_map.values().map(|(c, _)| c).collect();
        let cs: BTreeSet<_> = self.cube_map.values().map(|(c, _)| c).collect();
        vs.len() == self.vertex_map.len()
            && es.len() == self.edge_map.len()
            && ss.len() == self.square_map.len()
            && cs.len() == self.cube_map.len()
    }

    /// The image, as a subcomplex of the codomain.
    pub fn image(&self) -> Subcomplex {
        let cells: BTreeSet<CellId> = self
            .vertex_map
            .values()
            .cloned()
            .chain(self.edge_map.values().map(|(c, _)| c.clone()))
            .chain(self.square_map.values().map(|(c, _)| c.clone()))
            .chain(self.cube_map.values().map(|(c, _)| c.clone()))
            .collect();
        Subcomplex { cells }
    }

    /// The induced map on links of a 0-cube, as a map of link cell names.
    pub fn link_map(&self, v: &str) -> Result<BTreeMap<LinkCellRef, LinkCellRef>, Error> {
        let link = self.domain.link(v)?;
        let mut out = BTreeMap::new();
        for lv in &link.vertices {
            let (e2, d) = &self.edge_map[&lv.owner];
            let slot = if *d == 1 { lv.slot } else { 1 - lv.slot };
            out.insert(lv.clone(), LinkCellRef { owner: e2.clone(), slot });
        }
        for le in &link.edges {
            let (s2, sym) = &self.square_map[&le.cell.owner];
            out.insert(
                le.cell.clone(),
                LinkCellRef { owner: s2.clone(), slot: sym.corner(le.cell.slot as usize) as u8 },
            );
        }
        for lt in &link.triangles {
            let (c2, sym) = &self.cube_map[&lt.cell.owner];
            out.insert(
                lt.cell.clone(),
                LinkCellRef { owner: c2.clone(), slot: sym.corner(lt.cell.slot as usize) as u8 },
            );
        }
        Ok(out)
    }

    /// Immersion: the induced link map at every 0-cube is injective on cells.
    pub fn is_immersion(&self) -> Result<(), ImmersionFailure> {
        for v in &self.domain.vertices {
            let m = self.link_map(v).expect("domain vertices have links");
            let link = self.domain.link(v).unwrap();
            let mut seen_v: BTreeMap<LinkCellRef, LinkCellRef> = BTreeMap::new();
            for lv in &link.vertices {
                if let Some(prev) = seen_v.insert(m[lv].clone(), lv.clone()) {
                    return Err(ImmersionFailure { vertex: v.clone(), cells: vec![prev, lv.clone()] });
                }
            }
            let mut seen_e: BTreeMap<LinkCellRef, LinkCellRef> = BTreeMap::new();
            for le in &link.edges {
                if let Some(prev) = seen_e.insert(m[&le.cell].clone(), le.cell.clone()) {
                    return Err(ImmersionFailure { vertex: v.clone(), cells: vec![prev, le.cell.clone()] });
                }
            }
            let mut seen_t: BTreeMap<LinkCellRef, LinkCellRef> = BTreeMap::new();
            for lt in &link.triangles {
                if let Some(prev) = seen_t.insert(m[&lt.cell].clone(), lt.cell.clone()) {
                    return Err(ImmersionFailure { vertex: v.clone(), cells: vec![prev, lt.cell.clone()] });
                }
            }
        }
        Ok(())
    }

    /// Local isometry: an immersion whose link images are full subcomplexes.
    pub fn is_local_isometry(&self) -> Result<(), LocalIsometryFailure> {
        if let Err(f) = self.is_immersion() {
            return Err(LocalIsometryFailure::NotImmersion(f));
        }
        for v in &self.domain.vertices {
            let m = self.link_map(v).unwrap();
            let w = &self.vertex_map[v];
            let dom_link = self.domain.link(v).unwrap();
            let cod_link = self.codomain.link(w).unwrap();
            let vset: BTreeSet<LinkCellRef> = dom_link.vertices.iter().map(|c| m[c].clone()).collect();
            let eset: BTreeSet<LinkCellRef> = dom_link.edges.iter().map(|e| m[&e.cell].clone()).collect();
            let tset: BTreeSet<LinkCellRef> = dom_link.triangles.iter().map(|t| m[&t.cell].clone()).collect();
            if let Some(witness) = fullness_failure(&cod_link, &vset, &eset, &tset) {
                return Err(LocalIsometryFailure::MissingSimplex { vertex: v.clone(), witness });
            }
        }
        Ok(())
    }

    /// Bijective with boundary-compatible inverse; domain must equal codomain.
    pub fn is_automorphism(&self) -> bool {
        self.domain == self.codomain
            && self.validate().is_ok()
            && self.is_injective()
            && self.vertex_map.len() == self.domain.vertices.len()
            && self.edge_map.len() == self.domain.edges.len()
            && self.square_map.len() == self.domain.squares.len()
            && self.cube_map.len() == self.domain.cubes3.len()
    }
}

/// A simplex of `link` whose boundary lies in the selected sets but which is
/// not itself selected.
pub fn fullness_failure(
    link: &LinkComplex,
    vset: &BTreeSet<LinkCellRef>,
    eset: &BTreeSet<LinkCellRef>,
    tset: &BTreeSet<LinkCellRef>,
) -> Option<Vec<LinkCellRef>> {
    for e in &link.edges {
        if vset.contains(&e.ends[0]) && vset.contains(&e.ends[1]) && !eset.contains(&e.cell) {
            return Some(vec![e.ends[0].clone(), e.ends[1].clone()]);
        }
    }
    for t in &link.triangles {
        if t.sides.iter().all(|s| eset.contains(s)) && !tset.contains(&t.cell) {
            return Some(t.sides.to_vec());
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImmersionFailure {
    pub vertex: CellId,
    pub cells: Vec<LinkCellRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalIsometryFailure {
    NotImmersion(ImmersionFailure),
    MissingSimplex { vertex: CellId, witness: Vec<LinkCellRef> },
}

/// Local convexity of a subcomplex: every link inclusion is full.
pub fn is_locally_convex(x: &CubeComplex, a: &Subcomplex) -> Result<(), (CellId, Vec<LinkCellRef>)> {
    let ax = a.extract(x);
    for v in &ax.vertices {
        let big = x.link(v).expect("subcomplex vertex is ambient vertex");
        let small = ax.link(v).unwrap();
        let vset: BTreeSet<LinkCellRef> = small.vertices.iter().cloned().collect();
        let eset: BTreeSet<LinkCellRef> = small.edges.iter().map(|e| e.cell.clone()).collect();
        let tset: BTreeSet<LinkCellRef> = small.triangles.iter().map(|t| t.cell.clone()).collect();
        if let Some(w) = fullness_failure(&big, &vset, &eset, &tset) {
            return Err((v.clone(), w));
        }
    }
    Ok(())
}

/// An injective local isometry defined on a locally convex connected
/// subcomplex, with locally convex image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialLocalIsometry {
    pub name: String,
    /// boundary-closed domain cells inside the ambient complex
    pub domain: Subcomplex,
    /// map from the extracted domain complex into the ambient complex
    pub map: CubicalMap,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialIsometryReport {
    pub failures: Vec<String>,
}

impl PartialIsometryReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check every condition in the definition; all failures are reported.
pub fn validate_partial_local_isometry(
    ambient: &CubeComplex,
    phi: &PartialLocalIsometry,
) -> PartialIsometryReport {
    let mut failures = Vec::new();
    if ambient.is_npc().is_err() {
        failures.push("ambient complex is not nonpositively curved".to_string());
    }
    let dom = phi.domain.extract(ambient);
    if phi.map.domain != dom {
        failures.push("map domain differs from the extracted domain subcomplex".to_string());
    }
    if phi.map.codomain != *ambient {
        failures.push("map codomain is not the ambient complex".to_string());
    }
    if let Err(e) = phi.map.validate() {
        failures.push(format!("map is not cubical: {e}"));
        return PartialIsometryReport { failures };
    }
    if !dom.is_connected() {
        failures.push("domain subcomplex is not connected".to_string());
    }
    if !phi.map.is_injective() {
        failures.push("map is not injective".to_string());
    }
    if let Err((v, _)) = is_locally_convex(ambient, &phi.domain) {
        failures.push(format!("domain is not locally convex at `{v}`"));
    }
    let image = phi.map.image();
    if let Err((v, _)) = is_locally_convex(ambient, &image) {
        failures.push(format!("image is not locally convex at `{v}`"));
    }
    if let Err(f) = phi.map.is_local_isometry() {
        failures.push(format!("map is not a local isometry: {f:?}"));
    }
    PartialIsometryReport { failures }
}
