//! Immersed hyperplanes: the midcube complex, dual edge classes under
//! elementary parallelism, carriers, orientations, and the four pathology
//! checks behind the specialness verdict.
//!
//! Two independent computation routes exist on purpose. Parallelism classes
//! come from a union-find over edges; midcube components come from tracing
//! the glued midcube cells. The tests cross-check them against each other.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{cube_edge_slot, square_corner_sides, CellId, CubeComplex, Subcomplex};
use crate::error::Error;
use crate::sym::Dir;

// ---------------------------------------------------------------------------
// Elementary parallelism
// ---------------------------------------------------------------------------

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }
    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Union-find closure of "opposite sides of a square", two generating pairs
/// per square. Classes are sorted edge id sets, ordered by least element.
pub fn edge_parallelism_classes(x: &CubeComplex) -> Vec<BTreeSet<CellId>> {
    let ids: Vec<&CellId> = x.edges.keys().collect();
    let index: BTreeMap<&CellId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut dsu = Dsu::new(ids.len());
    for s in x.squares.values() {
        dsu.union(index[&s.sides[0].edge], index[&s.sides[1].edge]);
        dsu.union(index[&s.sides[2].edge], index[&s.sides[3].edge]);
    }
    let mut classes: BTreeMap<usize, BTreeSet<CellId>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        classes.entry(dsu.find(i)).or_default().insert((*id).clone());
    }
    let mut out: Vec<BTreeSet<CellId>> = classes.into_values().collect();
    out.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    out
}

// ---------------------------------------------------------------------------
// Midcube complex
// ---------------------------------------------------------------------------

/// One midcube: a slice of its owning cube with one coordinate zeroed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Midcube {
    /// midpoint of a 1-cube
    OfEdge(CellId),
    /// slice of a square with the given coordinate zeroed
    OfSquare(CellId, u8),
    /// slice of a 3-cube with the given coordinate zeroed
    OfCube(CellId, u8),
}

impl Midcube {
    pub fn owner(&self) -> &CellId {
        match self {
            Midcube::OfEdge(c) | Midcube::OfSquare(c, _) | Midcube::OfCube(c, _) => c,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MidcubeComplex {
    pub cells: Vec<Midcube>,
    /// component index per cell, components numbered by least member
    pub component: Vec<usize>,
    pub component_count: usize,
}

impl MidcubeComplex {
    pub fn component_of(&self, m: &Midcube) -> Option<usize> {
        let i = self.cells.binary_search(m).ok()?;
        Some(self.component[i])
    }

    pub fn members(&self, comp: usize) -> impl Iterator<Item = &Midcube> {
        self.cells
            .iter()
            .zip(self.component.iter())
            .filter_map(move |(m, c)| (*c == comp).then_some(m))
    }
}

/// Boundary midcubes of the slice `{x[axis] = 0}` of a square: the midpoints
/// of the two sides it crosses.
fn square_midcube_boundary(x: &CubeComplex, s: &str, axis: u8) -> [Midcube; 2] {
    let sq = &x.squares[s];
    // {x=0} runs along y and crosses the y=±1 sides, and vice versa
    let crossed = if axis == 0 { [0usize, 1] } else { [2, 3] };
    [
        Midcube::OfEdge(sq.sides[crossed[0]].edge.clone()),
        Midcube::OfEdge(sq.sides[crossed[1]].edge.clone()),
    ]
}

/// Boundary midcubes of the slice `{x[axis] = 0}` of a 3-cube: a midcube of
/// each of the four faces it crosses, transported through the attaching
/// symmetry.
fn cube_midcube_boundary(x: &CubeComplex, c: &str, axis: u8) -> Vec<Midcube> {
    let cube = &x.cubes3[c];
    let mut out = Vec::with_capacity(4);
    for other in (0..3usize).filter(|&a| a != axis as usize) {
        for pos in [false, true] {
            let f = crate::complex::cube_face_index(other, pos);
            let fr = &cube.faces[f];
            let free = crate::complex::face_free_axes(other);
            let chart_axis = free.iter().position(|&a| a == axis as usize).unwrap();
            // the chart line {u_chart_axis = 0} maps to the square line
            // {x[j] = 0} where sym.perm[j] = chart_axis
            let target_axis = fr.sym.perm.iter().position(|&p| p == chart_axis).unwrap();
            out.push(Midcube::OfSquare(fr.square.clone(), target_axis as u8));
        }
    }
    out
}

/// Components of the disjoint union of midcubes glued along their faces.
pub fn build_midcube_complex(x: &CubeComplex) -> MidcubeComplex {
    let mut cells: Vec<Midcube> = Vec::new();
    for e in x.edges.keys() {
        cells.push(Midcube::OfEdge(e.clone()));
    }
    for s in x.squares.keys() {
        cells.push(Midcube::OfSquare(s.clone(), 0));
        cells.push(Midcube::OfSquare(s.clone(), 1));
    }
    for c in x.cubes3.keys() {
        for axis in 0..3u8 {
            cells.push(Midcube::OfCube(c.clone(), axis));
        }
    }
    cells.sort();
    let index: BTreeMap<&Midcube, usize> = cells.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut dsu = Dsu::new(cells.len());
    for s in x.squares.keys() {
        for axis in 0..2u8 {
            let me = index[&Midcube::OfSquare(s.clone(), axis)];
            for b in square_midcube_boundary(x, s, axis) {
                dsu.union(me, index[&b]);
            }
        }
    }
    for c in x.cubes3.keys() {
        for axis in 0..3u8 {
            let me = index[&Midcube::OfCube(c.clone(), axis)];
            for b in cube_midcube_boundary(x, c, axis) {
                dsu.union(me, index[&b]);
            }
        }
    }
    let mut roots: BTreeMap<usize, usize> = BTreeMap::new();
    let mut component = vec![0usize; cells.len()];
    for i in 0..cells.len() {
        let r = dsu.find(i);
        let next = roots.len();
        let c = *roots.entry(r).or_insert(next);
        component[i] = c;
    }
    let component_count = roots.len();
    MidcubeComplex { cells, component, component_count }
}

// ---------------------------------------------------------------------------
// Hyperplanes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperplane {
    /// least dual edge id; stable across runs
    pub id: CellId,
    pub dual_edges: BTreeSet<CellId>,
    /// direction per dual edge; present exactly when two-sided
    pub orientation: Option<BTreeMap<CellId, Dir>>,
    /// midcube component index in the complex-wide `MidcubeComplex`
    pub component: usize,
    pub carrier: Subcomplex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoSidedness {
    TwoSided(BTreeMap<CellId, Dir>),
    /// a chain of dual edges along which orientation propagation reverses
    OneSided(Vec<CellId>),
}

/// Propagate directions across squares; the lexicographically least dual
/// edge gets `+1`.
pub fn two_sidedness(x: &CubeComplex, dual: &BTreeSet<CellId>) -> TwoSidedness {
    // constraints o(a)*da = o(b)*db for each parallel pair inside `dual`
    let mut constraints: BTreeMap<CellId, Vec<(CellId, Dir)>> = BTreeMap::new();
    let mut push = |a: &CellId, da: Dir, b: &CellId, db: Dir| {
        let rel = da * db;
        if a == b {
            if rel != 1 {
                // a glued to itself with a flip; record as a loop constraint
                constraints.entry(a.clone()).or_default().push((b.clone(), rel));
            }
            return;
        }
        constraints.entry(a.clone()).or_default().push((b.clone(), rel));
        constraints.entry(b.clone()).or_default().push((a.clone(), rel));
    };
    for s in x.squares.values() {
        for pair in [[0usize, 1], [2, 3]] {
            let (ea, eb) = (&s.sides[pair[0]], &s.sides[pair[1]]);
            if dual.contains(&ea.edge) && dual.contains(&eb.edge) {
                push(&ea.edge, ea.dir, &eb.edge, eb.dir);
            }
        }
    }
    for c in x.cubes3.values() {
        for axis in 0..3usize {
            let slots: Vec<usize> = (0..12).filter(|&k| cube_edge_slot(k).0 == axis).collect();
            for i in 0..slots.len() {
                for j in (i + 1)..slots.len() {
                    let (ra, rb) = (&c.edges[slots[i]], &c.edges[slots[j]]);
                    if dual.contains(&ra.edge) && dual.contains(&rb.edge) {
                        push(&ra.edge, ra.dir, &rb.edge, rb.dir);
                    }
                }
            }
        }
    }
    let mut orient: BTreeMap<CellId, Dir> = BTreeMap::new();
    let mut parent: BTreeMap<CellId, CellId> = BTreeMap::new();
    for start in dual {
        if orient.contains_key(start) {
            continue;
        }
        orient.insert(start.clone(), 1);
        let mut queue = std::collections::VecDeque::from([start.clone()]);
        while let Some(e) = queue.pop_front() {
            let oe = orient[&e];
            if let Some(cons) = constraints.get(&e).cloned() {
                for (f, rel) in cons {
                    let of = oe * rel;
                    match orient.get(&f) {
                        None => {
                            orient.insert(f.clone(), of);
                            parent.insert(f.clone(), e.clone());
                            queue.push_back(f.clone());
                        }
                        Some(prev) if *prev != of => {
                            let mut cycle = vec![f.clone(), e.clone()];
                            let mut cur = e.clone();
                            while let Some(p) = parent.get(&cur) {
                                cycle.push(p.clone());
                                cur = p.clone();
                            }
                            return TwoSidedness::OneSided(cycle);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    TwoSidedness::TwoSided(orient)
}

/// All hyperplanes, one per midcube component, with carriers.
pub fn hyperplanes(x: &CubeComplex) -> (MidcubeComplex, Vec<Hyperplane>) {
    let mc = build_midcube_complex(x);
    let mut duals: BTreeMap<usize, BTreeSet<CellId>> = BTreeMap::new();
    for (m, comp) in mc.cells.iter().zip(mc.component.iter()) {
        if let Midcube::OfEdge(e) = m {
            duals.entry(*comp).or_default().insert(e.clone());
        }
    }
    let mut out = Vec::new();
    for (comp, dual) in &duals {
        let mut cells: BTreeSet<CellId> = BTreeSet::new();
        for (m, c) in mc.cells.iter().zip(mc.component.iter()) {
            if c == comp {
                cells.insert(m.owner().clone());
            }
        }
        let carrier = Subcomplex::from_cells(x, cells).expect("owners are cells of x");
        let orientation = match two_sidedness(x, dual) {
            TwoSidedness::TwoSided(o) => Some(o),
            TwoSidedness::OneSided(_) => None,
        };
        out.push(Hyperplane {
            id: dual.iter().next().expect("edge midcube components are nonempty").clone(),
            dual_edges: dual.clone(),
            orientation,
            component: *comp,
            carrier,
        });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    (mc, out)
}

/// Self-crossing: some cube owns two distinct midcubes of the component.
pub fn self_crossing(mc: &MidcubeComplex, h: &Hyperplane) -> Option<CellId> {
    let mut seen: BTreeSet<&CellId> = BTreeSet::new();
    for m in mc.members(h.component) {
        if let Midcube::OfSquare(c, _) | Midcube::OfCube(c, _) = m {
            if !seen.insert(c) {
                return Some(c.clone());
            }
        }
    }
    None
}

/// Do two distinct components cross (own midcubes of one cube)?
pub fn crossing(mc: &MidcubeComplex, a: usize, b: usize) -> Option<CellId> {
    let mut owners_a: BTreeSet<&CellId> = BTreeSet::new();
    for m in mc.members(a) {
        if let Midcube::OfSquare(c, _) | Midcube::OfCube(c, _) = m {
            owners_a.insert(c);
        }
    }
    for m in mc.members(b) {
        if let Midcube::OfSquare(c, _) | Midcube::OfCube(c, _) = m {
            if owners_a.contains(c) {
                return Some((*c).clone());
            }
        }
    }
    None
}

/// Is the unordered pair `{a, b}` a pair of consecutive sides of any square?
pub fn is_square_corner_pair(x: &CubeComplex, a: &str, b: &str) -> bool {
    for s in x.squares.values() {
        for corner in 0..4usize {
            let [sa, sb] = square_corner_sides(corner);
            let (ea, eb) = (s.sides[sa].edge.as_str(), s.sides[sb].edge.as_str());
            if (ea == a && eb == b) || (ea == b && eb == a) {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsculationWitness {
    pub edge_a: CellId,
    pub edge_b: CellId,
    pub vertex: CellId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelfOsculation {
    No,
    Yes(OsculationWitness),
    /// the check needs an orientation, which one-sided hyperplanes lack
    BlockedOneSided,
}

fn endpoints(x: &CubeComplex, e: &str, dir: Dir) -> (CellId, CellId) {
    let ends = &x.edges[e].ends;
    if dir == 1 {
        (ends[0].clone(), ends[1].clone())
    } else {
        (ends[1].clone(), ends[0].clone())
    }
}

/// Two distinct oriented dual edges sharing an initial or a terminal vertex
/// without cornering a square.
pub fn self_osculation(x: &CubeComplex, h: &Hyperplane) -> SelfOsculation {
    let Some(orient) = &h.orientation else {
        return SelfOsculation::BlockedOneSided;
    };
    let duals: Vec<&CellId> = h.dual_edges.iter().collect();
    for i in 0..duals.len() {
        for j in (i + 1)..duals.len() {
            let (a, b) = (duals[i], duals[j]);
            let (ia, ta) = endpoints(x, a, orient[a]);
            let (ib, tb) = endpoints(x, b, orient[b]);
            let shared = if ia == ib {
                Some(ia.clone())
            } else if ta == tb {
                Some(ta.clone())
            } else {
                None
            };
            if let Some(v) = shared {
                if !is_square_corner_pair(x, a, b) {
                    return SelfOsculation::Yes(OsculationWitness {
                        edge_a: a.clone(),
                        edge_b: b.clone(),
                        vertex: v,
                    });
                }
            }
        }
    }
    SelfOsculation::No
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterOsculationWitness {
    pub hyperplane_a: CellId,
    pub hyperplane_b: CellId,
    pub crossing_cube: CellId,
    pub osculation: OsculationWitness,
}

/// Crossing hyperplanes whose unoriented dual edges meet off-corner.
pub fn inter_osculation(
    x: &CubeComplex,
    mc: &MidcubeComplex,
    h1: &Hyperplane,
    h2: &Hyperplane,
) -> Option<InterOsculationWitness> {
    let cube = crossing(mc, h1.component, h2.component)?;
    for a in &h1.dual_edges {
        for b in &h2.dual_edges {
            let ea = &x.edges[a].ends;
            let eb = &x.edges[b].ends;
            let shared = ea.iter().find(|va| eb.contains(va));
            if let Some(v) = shared {
                if !is_square_corner_pair(x, a, b) {
                    return Some(InterOsculationWitness {
                        hyperplane_a: h1.id.clone(),
                        hyperplane_b: h2.id.clone(),
                        crossing_cube: cube,
                        osculation: OsculationWitness {
                            edge_a: a.clone(),
                            edge_b: b.clone(),
                            vertex: v.clone(),
                        },
                    });
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Specialness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneFlags {
    pub one_sided: Option<Vec<CellId>>,
    pub self_crossing: Option<CellId>,
    pub self_osculating: SelfOsculation,
    /// dual edges that are loops; a separate diagnostic, not a pathology flag
    pub loop_dual_edges: Vec<CellId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialnessReport {
    pub hyperplanes: BTreeMap<CellId, HyperplaneFlags>,
    pub inter_osculations: Vec<InterOsculationWitness>,
    pub special: bool,
    pub precondition_failures: Vec<String>,
}

impl SpecialnessReport {
    /// The set of pathology kinds present.
    pub fn pathologies(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::new();
        for f in self.hyperplanes.values() {
            if f.one_sided.is_some() {
                out.insert("one_sided");
            }
            if f.self_crossing.is_some() {
                out.insert("self_crossing");
            }
            if matches!(f.self_osculating, SelfOsculation::Yes(_)) {
                out.insert("self_osculation");
            }
        }
        if !self.inter_osculations.is_empty() {
            out.insert("inter_osculation");
        }
        out
    }
}

/// Aggregate the four checks over all hyperplanes and pairs. Precondition
/// failures (invalid or non-NPC input) are recorded, never silently ignored.
pub fn is_special(x: &CubeComplex) -> SpecialnessReport {
    let mut precondition_failures = Vec::new();
    let report = x.validate();
    if !report.is_ok() {
        precondition_failures.push(format!("complex is invalid: {} violations", report.violations.len()));
    }
    if let Err(f) = x.is_npc() {
        precondition_failures.push(format!("complex is not nonpositively curved: {f:?}"));
    }
    let (mc, hps) = hyperplanes(x);
    let mut flags = BTreeMap::new();
    for h in &hps {
        let one_sided = match two_sidedness(x, &h.dual_edges) {
            TwoSidedness::TwoSided(_) => None,
            TwoSidedness::OneSided(cycle) => Some(cycle),
        };
        let loop_dual_edges: Vec<CellId> = h
            .dual_edges
            .iter()
            .filter(|e| x.edges[*e].ends[0] == x.edges[*e].ends[1])
            .cloned()
            .collect();
        flags.insert(
            h.id.clone(),
            HyperplaneFlags {
                one_sided,
                self_crossing: self_crossing(&mc, h),
                self_osculating: self_osculation(x, h),
                loop_dual_edges,
            },
        );
    }
    let mut inter = Vec::new();
    for i in 0..hps.len() {
        for j in (i + 1)..hps.len() {
            if let Some(w) = inter_osculation(x, &mc, &hps[i], &hps[j]) {
                inter.push(w);
            }
        }
    }
    let clean = precondition_failures.is_empty()
        && inter.is_empty()
        && flags.values().all(|f| {
            f.one_sided.is_none()
                && f.self_crossing.is_none()
                && matches!(f.self_osculating, SelfOsculation::No)
        });
    SpecialnessReport {
        hyperplanes: flags,
        inter_osculations: inter,
        special: clean,
        precondition_failures,
    }
}

/// Does some hyperplane of `a` extend to a hyperplane of `x` dual to a
/// 1-cube outside `a` that still touches `a` in 0-cubes?
pub fn subcomplex_self_osculates(
    x: &CubeComplex,
    a: &Subcomplex,
) -> Result<Option<OsculationWitness>, Error> {
    let ax = a.extract(x);
    if !ax.validate().is_ok() {
        return Err(Error::InvalidComplex("subcomplex does not extract to a valid complex".into()));
    }
    let classes_x = edge_parallelism_classes(x);
    let classes_a = edge_parallelism_classes(&ax);
    for ca in classes_a {
        let rep = ca.iter().next().unwrap();
        let Some(ext) = classes_x.iter().find(|c| c.contains(rep)) else { continue };
        for e in ext.iter() {
            if a.contains(e) {
                continue;
            }
            for v in &x.edges[e].ends {
                if ax.vertices.contains(v) {
                    return Ok(Some(OsculationWitness {
                        edge_a: rep.clone(),
                        edge_b: e.clone(),
                        vertex: v.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use crate::complex::{build, CubeComplex};

    /// Bent 3-square strip whose rung class self-osculates at `v1`.
    pub fn ustrip() -> CubeComplex {
        let mut x = CubeComplex::default();
        for i in 1..=6 {
            build::vertex(&mut x, &format!("v{i}"));
        }
        build::vertex(&mut x, "w2");
        build::edge(&mut x, "a1", "v1", "v2");
        build::edge(&mut x, "a2", "v4", "v5");
        build::edge(&mut x, "a3", "v2", "v3");
        build::edge(&mut x, "a4", "v5", "v6");
        build::edge(&mut x, "a5", "v3", "v1");
        build::edge(&mut x, "a6", "v6", "w2");
        build::edge(&mut x, "c1", "v1", "v4");
        build::edge(&mut x, "c2", "v2", "v5");
        build::edge(&mut x, "c3", "v3", "v6");
        build::edge(&mut x, "c4", "v1", "w2");
        build::square(&mut x, "q1", [("a1", 1), ("a2", 1), ("c1", 1), ("c2", 1)]);
        build::square(&mut x, "q2", [("a3", 1), ("a4", 1), ("c2", 1), ("c3", 1)]);
        build::square(&mut x, "q3", [("a5", 1), ("a6", 1), ("c3", 1), ("c4", 1)]);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build, product_with_interval};

    #[test]
    fn classes_of_basic_complexes() {
        let x = build::lone_square("");
        let classes = edge_parallelism_classes(&x);
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.len() == 2));

        let t = build::torus();
        let classes = edge_parallelism_classes(&t);
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.len() == 1));

        let strip = build::strip(2);
        let classes = edge_parallelism_classes(&strip);
        let rungs: BTreeSet<CellId> = ["r0", "r1", "r2"].iter().map(|s| s.to_string()).collect();
        assert!(classes.contains(&rungs));
        assert_eq!(classes.len(), 3);
    }

    #[test]
    fn midcube_components_match_classes() {
        for x in [
            build::lone_square(""),
            build::torus(),
            build::moebius(),
            build::strip(3),
            build::self_crossing(),
            build::self_osculating(),
            build::inter_osculating(),
            build::solid_cube(),
            build::squares_around_vertex(3, true),
            super::test_fixtures::ustrip(),
        ] {
            let classes = edge_parallelism_classes(&x);
            let (_, hps) = hyperplanes(&x);
            assert_eq!(classes.len(), hps.len());
            let duals: Vec<BTreeSet<CellId>> = hps.iter().map(|h| h.dual_edges.clone()).collect();
            for c in &classes {
                assert!(duals.contains(c), "class {c:?} not a dual set");
            }
        }
    }

    #[test]
    fn solid_cube_has_three_hyperplanes() {
        let x = build::solid_cube();
        let (mc, hps) = hyperplanes(&x);
        assert_eq!(mc.component_count, 3);
        assert_eq!(hps.len(), 3);
        for h in &hps {
            assert_eq!(h.dual_edges.len(), 4);
            assert!(self_crossing(&mc, h).is_none());
        }
    }

    #[test]
    fn torus_hyperplanes_are_circles() {
        let t = build::torus();
        let mc = build_midcube_complex(&t);
        assert_eq!(mc.component_count, 2);
        for comp in 0..2 {
            assert_eq!(mc.members(comp).count(), 2);
        }
        let (_, hps) = hyperplanes(&t);
        for h in &hps {
            assert_eq!(h.carrier.cells.len(), t.cell_count());
        }
    }

    #[test]
    fn moebius_is_one_sided() {
        let m = build::moebius();
        let (_, hps) = hyperplanes(&m);
        let a = hps.iter().find(|h| h.dual_edges.contains("a")).unwrap();
        assert!(a.orientation.is_none());
        assert!(matches!(two_sidedness(&m, &a.dual_edges), TwoSidedness::OneSided(_)));
        let other = hps.iter().find(|h| !h.dual_edges.contains("a")).unwrap();
        assert!(other.orientation.is_some());
    }

    #[test]
    fn product_midlevel_is_single_hyperplane() {
        for x in [build::lone_square(""), build::torus(), build::strip(2)] {
            let prod = product_with_interval(&x).unwrap();
            let (_, hps) = hyperplanes(&prod.complex);
            let vertical: Vec<&Hyperplane> = hps
                .iter()
                .filter(|h| h.dual_edges.iter().all(|e| e.ends_with("@I")))
                .collect();
            assert_eq!(vertical.len(), 1);
            assert_eq!(vertical[0].dual_edges.len(), x.vertices.len());
        }
    }

    #[test]
    fn carriers_contain_dual_edges() {
        for x in [build::torus(), build::strip(3), build::inter_osculating()] {
            let (_, hps) = hyperplanes(&x);
            for h in &hps {
                for e in &h.dual_edges {
                    assert!(h.carrier.contains(e));
                }
                assert!(h.carrier.extract(&x).validate().is_ok());
            }
        }
    }

    #[test]
    fn pathology_catalog_is_exact() {
        let sc = is_special(&build::self_crossing());
        assert_eq!(sc.pathologies(), BTreeSet::from(["self_crossing"]));
        assert!(!sc.special);
        assert!(sc.precondition_failures.is_empty());

        let os = is_special(&build::moebius());
        assert_eq!(os.pathologies(), BTreeSet::from(["one_sided"]));
        let blocked = os
            .hyperplanes
            .values()
            .filter(|f| matches!(f.self_osculating, SelfOsculation::BlockedOneSided))
            .count();
        assert_eq!(blocked, 1);

        let so = is_special(&build::self_osculating());
        assert_eq!(so.pathologies(), BTreeSet::from(["self_osculation"]));

        let io = is_special(&build::inter_osculating());
        assert_eq!(io.pathologies(), BTreeSet::from(["inter_osculation"]));

        assert!(is_special(&build::lone_square("")).special);
        assert!(is_special(&build::torus()).special);
        assert!(is_special(&build::solid_cube()).special);
    }

    #[test]
    fn square_hyperplanes_cross_but_do_not_inter_osculate() {
        let x = build::lone_square("");
        let (mc, hps) = hyperplanes(&x);
        assert!(crossing(&mc, hps[0].component, hps[1].component).is_some());
        assert!(inter_osculation(&x, &mc, &hps[0], &hps[1]).is_none());
    }

    #[test]
    fn subcomplex_osculation_cases() {
        let x = build::lone_square("");
        let all = Subcomplex::full(&x);
        assert!(subcomplex_self_osculates(&x, &all).unwrap().is_none());
        // one side: its hyperplane extends to the opposite side, which
        // misses the subcomplex entirely
        let side = Subcomplex::from_cells(&x, ["b".to_string()]).unwrap();
        assert!(subcomplex_self_osculates(&x, &side).unwrap().is_none());
        // side plus a far corner: the extension now touches in a 0-cube
        let side_plus = Subcomplex::from_cells(&x, ["b".to_string(), "v2".to_string()]).unwrap();
        let w = subcomplex_self_osculates(&x, &side_plus).unwrap().unwrap();
        assert_eq!(w.edge_b, "t");
        assert_eq!(w.vertex, "v2");
    }

    #[test]
    fn ustrip_rung_class_self_osculates() {
        let x = super::test_fixtures::ustrip();
        assert!(x.validate().is_ok());
        assert!(x.is_npc().is_ok());
        let report = is_special(&x);
        assert!(report.pathologies().contains("self_osculation"));
        // the self-osculating class is the rung class c1..c4
        let f = &report.hyperplanes["c1"];
        match &f.self_osculating {
            SelfOsculation::Yes(w) => {
                assert_eq!((w.edge_a.as_str(), w.edge_b.as_str(), w.vertex.as_str()), ("c1", "c4", "v1"));
            }
            other => panic!("expected rung self-osculation, got {other:?}"),
        }
    }
}
