//! File formats. Complexes travel as `cubecomplex.v1`, maps as
//! `cubicalmap.v1` with a flat per-cell `{image, sym}` table, graphs of
//! spaces as `gos.v1`, quotients as `quotient.v1`, coset products as
//! `product.v1` (an alternating list of words and generator lists), and
//! certificates as `certificate.v1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::complex::{CellId, CubeComplex, Cube3, Edge, EdgeRef, FaceRef, Square};
use crate::error::Error;
use crate::freegrp::{CosetProduct, FiniteQuotient, Perm, StallingsGraph, Word};
use crate::gos::{EdgeSpace, GraphOfSpaces, UGraph};
use crate::map::{CubicalMap, PartialLocalIsometry};
use crate::pipeline::{HrushovskiCertificate, Ledger, Target};
use crate::sym::{CubeSym, SquareSym};

// ---------------------------------------------------------------------------
// cubecomplex.v1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexV1 {
    pub dim: usize,
    pub vertices: Vec<CellId>,
    pub edges: Vec<EdgeV1>,
    pub squares: Vec<SquareV1>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cubes3: Vec<Cube3V1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeV1 {
    pub id: CellId,
    pub ends: [CellId; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareV1 {
    pub id: CellId,
    pub corners: [CellId; 4],
    pub sides: [SideV1; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideV1 {
    pub edge: CellId,
    pub dir: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cube3V1 {
    pub id: CellId,
    pub corners: [CellId; 8],
    pub edges: [SideV1; 12],
    pub faces: [FaceV1; 6],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceV1 {
    pub square: CellId,
    pub sym: u8,
}

pub fn complex_to_json(x: &CubeComplex) -> ComplexV1 {
    ComplexV1 {
        dim: x.dim(),
        vertices: x.vertices.iter().cloned().collect(),
        edges: x
            .edges
            .iter()
            .map(|(id, e)| EdgeV1 { id: id.clone(), ends: e.ends.clone() })
            .collect(),
        squares: x
            .squares
            .iter()
            .map(|(id, s)| SquareV1 {
                id: id.clone(),
                corners: s.corners.clone(),
                sides: s.sides.clone().map(|r| SideV1 { edge: r.edge, dir: r.dir }),
            })
            .collect(),
        cubes3: x
            .cubes3
            .iter()
            .map(|(id, c)| Cube3V1 {
                id: id.clone(),
                corners: c.corners.clone(),
                edges: c.edges.clone().map(|r| SideV1 { edge: r.edge, dir: r.dir }),
                faces: c
                    .faces
                    .clone()
                    .map(|f| FaceV1 { square: f.square, sym: f.sym.index() }),
            })
            .collect(),
    }
}

pub fn complex_from_json(v: &ComplexV1) -> Result<CubeComplex, Error> {
    let mut x = CubeComplex::default();
    for id in &v.vertices {
        if !x.vertices.insert(id.clone()) {
            return Err(Error::InvalidInput(format!("duplicate vertex id `{id}`")));
        }
    }
    for e in &v.edges {
        if x.edges.insert(e.id.clone(), Edge { ends: e.ends.clone() }).is_some() {
            return Err(Error::InvalidInput(format!("duplicate edge id `{}`", e.id)));
        }
    }
    for s in &v.squares {
        let sq = Square {
            corners: s.corners.clone(),
            sides: s.sides.clone().map(|r| EdgeRef { edge: r.edge, dir: r.dir }),
        };
        if x.squares.insert(s.id.clone(), sq).is_some() {
            return Err(Error::InvalidInput(format!("duplicate square id `{}`", s.id)));
        }
    }
    for c in &v.cubes3 {
        let mut faces = Vec::with_capacity(6);
        for f in &c.faces {
            let sym = SquareSym::from_index(f.sym)
                .ok_or_else(|| Error::InvalidInput(format!("square symmetry {} out of range", f.sym)))?;
            faces.push(FaceRef { square: f.square.clone(), sym });
        }
        let cube = Cube3 {
            corners: c.corners.clone(),
            edges: c.edges.clone().map(|r| EdgeRef { edge: r.edge, dir: r.dir }),
            faces: faces.try_into().unwrap(),
        };
        if x.cubes3.insert(c.id.clone(), cube).is_some() {
            return Err(Error::InvalidInput(format!("duplicate cube id `{}`", c.id)));
        }
    }
    if v.dim != x.dim() {
        return Err(Error::InvalidInput(format!(
            "declared dimension {} differs from the computed {}",
            v.dim,
            x.dim()
        )));
    }
    let report = x.validate();
    if !report.is_ok() {
        return Err(Error::InvalidComplex(format!(
            "{} violations; first: {:?}",
            report.violations.len(),
            report.violations.first()
        )));
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// cubicalmap.v1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapV1 {
    pub domain: ComplexV1,
    pub codomain: ComplexV1,
    /// flat per-cell table; `sym` is `+1|-1` for edges, `0..7` for squares,
    /// `0..47` for 3-cubes, `0` for vertices
    pub cells: BTreeMap<CellId, CellImageV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellImageV1 {
    pub image: CellId,
    #[serde(default)]
    pub sym: i64,
}

fn check_globally_unique(x: &CubeComplex) -> Result<(), Error> {
    let mut seen = std::collections::BTreeSet::new();
    for c in x.all_cells() {
        if !seen.insert(c) {
            return Err(Error::InvalidInput(format!(
                "cell id `{c}` is used in two dimensions; the flat map format needs globally unique ids"
            )));
        }
    }
    Ok(())
}

pub fn map_to_json(f: &CubicalMap) -> Result<MapV1, Error> {
    check_globally_unique(&f.domain)?;
    let mut cells = BTreeMap::new();
    for (v, w) in &f.vertex_map {
        cells.insert(v.clone(), CellImageV1 { image: w.clone(), sym: 0 });
    }
    for (e, (w, d)) in &f.edge_map {
        cells.insert(e.clone(), CellImageV1 { image: w.clone(), sym: *d as i64 });
    }
    for (s, (w, g)) in &f.square_map {
        cells.insert(s.clone(), CellImageV1 { image: w.clone(), sym: g.index() as i64 });
    }
    for (c, (w, g)) in &f.cube_map {
        cells.insert(c.clone(), CellImageV1 { image: w.clone(), sym: g.index() as i64 });
    }
    Ok(MapV1 {
        domain: complex_to_json(&f.domain),
        codomain: complex_to_json(&f.codomain),
        cells,
    })
}

pub fn map_from_json(v: &MapV1) -> Result<CubicalMap, Error> {
    let domain = complex_from_json(&v.domain)?;
    let codomain = complex_from_json(&v.codomain)?;
    check_globally_unique(&domain)?;
    let mut f = CubicalMap::new(domain, codomain);
    for (cell, img) in &v.cells {
        match f.domain.cell_dim(cell) {
            Some(0) => {
                f.vertex_map.insert(cell.clone(), img.image.clone());
            }
            Some(1) => {
                let d = match img.sym {
                    1 => 1,
                    -1 => -1,
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "edge `{cell}`: direction must be +1 or -1, got {other}"
                        )))
                    }
                };
                f.edge_map.insert(cell.clone(), (img.image.clone(), d));
            }
            Some(2) => {
                let g = u8::try_from(img.sym)
                    .ok()
                    .and_then(SquareSym::from_index)
                    .ok_or_else(|| Error::InvalidInput(format!("square `{cell}`: bad symmetry")))?;
                f.square_map.insert(cell.clone(), (img.image.clone(), g));
            }
            Some(3) => {
                let g = u8::try_from(img.sym)
                    .ok()
                    .and_then(CubeSym::from_index)
                    .ok_or_else(|| Error::InvalidInput(format!("cube `{cell}`: bad symmetry")))?;
                f.cube_map.insert(cell.clone(), (img.image.clone(), g));
            }
            _ => return Err(Error::UnknownCell(cell.clone())),
        }
    }
    f.validate()?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// gos.v1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GosV1 {
    pub graph: GraphV1,
    pub vertex_spaces: BTreeMap<String, ComplexV1>,
    pub edge_spaces: BTreeMap<String, EdgeSpaceV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphV1 {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSpaceV1 {
    pub space: ComplexV1,
    pub tau1: MapV1,
    pub tau2: MapV1,
}

pub fn gos_to_json(g: &GraphOfSpaces) -> Result<GosV1, Error> {
    Ok(GosV1 {
        graph: GraphV1 {
            vertices: g.graph.vertices.iter().cloned().collect(),
            edges: g
                .graph
                .edges
                .iter()
                .map(|(id, (a, b))| EdgeV1 { id: id.clone(), ends: [a.clone(), b.clone()] })
                .collect(),
        },
        vertex_spaces: g
            .vertex_spaces
            .iter()
            .map(|(v, x)| (v.clone(), complex_to_json(x)))
            .collect(),
        edge_spaces: g
            .edge_spaces
            .iter()
            .map(|(e, es)| {
                Ok((
                    e.clone(),
                    EdgeSpaceV1 {
                        space: complex_to_json(&es.space),
                        tau1: map_to_json(&es.tau1)?,
                        tau2: map_to_json(&es.tau2)?,
                    },
                ))
            })
            .collect::<Result<_, Error>>()?,
    })
}

pub fn gos_from_json(v: &GosV1) -> Result<GraphOfSpaces, Error> {
    let mut graph = UGraph::default();
    graph.vertices = v.graph.vertices.iter().cloned().collect();
    for e in &v.graph.edges {
        graph.edges.insert(e.id.clone(), (e.ends[0].clone(), e.ends[1].clone()));
    }
    let mut vertex_spaces = BTreeMap::new();
    for (name, c) in &v.vertex_spaces {
        vertex_spaces.insert(name.clone(), complex_from_json(c)?);
    }
    let mut edge_spaces = BTreeMap::new();
    for (name, es) in &v.edge_spaces {
        edge_spaces.insert(
            name.clone(),
            EdgeSpace {
                space: complex_from_json(&es.space)?,
                tau1: map_from_json(&es.tau1)?,
                tau2: map_from_json(&es.tau2)?,
            },
        );
    }
    let gos = GraphOfSpaces { graph, vertex_spaces, edge_spaces };
    gos.validate()?;
    Ok(gos)
}

// ---------------------------------------------------------------------------
// instance.v1: a complex with named partial local isometries
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceV1 {
    pub complex: ComplexV1,
    pub maps: Vec<PartialMapV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialMapV1 {
    pub name: String,
    /// cells of the domain subcomplex (boundary closure is applied)
    pub domain: Vec<CellId>,
    pub cells: BTreeMap<CellId, CellImageV1>,
}

pub fn instance_from_json(v: &InstanceV1) -> Result<(CubeComplex, Vec<PartialLocalIsometry>), Error> {
    let y = complex_from_json(&v.complex)?;
    check_globally_unique(&y)?;
    let mut maps = Vec::new();
    for pm in &v.maps {
        let domain = crate::complex::Subcomplex::from_cells(&y, pm.domain.iter().cloned())?;
        let dom = domain.extract(&y);
        let mut f = CubicalMap::new(dom, y.clone());
        for (cell, img) in &pm.cells {
            match f.domain.cell_dim(cell) {
                Some(0) => {
                    f.vertex_map.insert(cell.clone(), img.image.clone());
                }
                Some(1) => {
                    let d: i8 = match img.sym {
                        1 => 1,
                        -1 => -1,
                        o => {
                            return Err(Error::InvalidInput(format!(
                                "map `{}`: edge `{cell}` has direction {o}",
                                pm.name
                            )))
                        }
                    };
                    f.edge_map.insert(cell.clone(), (img.image.clone(), d));
                }
                Some(2) => {
                    let g = u8::try_from(img.sym)
                        .ok()
                        .and_then(SquareSym::from_index)
                        .ok_or_else(|| {
                            Error::InvalidInput(format!("map `{}`: bad symmetry on `{cell}`", pm.name))
                        })?;
                    f.square_map.insert(cell.clone(), (img.image.clone(), g));
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "map `{}`: cell `{cell}` is not in the domain subcomplex",
                        pm.name
                    )))
                }
            }
        }
        f.validate()?;
        maps.push(PartialLocalIsometry { name: pm.name.clone(), domain, map: f });
    }
    Ok((y, maps))
}

pub fn instance_to_json(
    y: &CubeComplex,
    maps: &[PartialLocalIsometry],
) -> Result<InstanceV1, Error> {
    check_globally_unique(y)?;
    let mut out = Vec::new();
    for phi in maps {
        let mut cells = BTreeMap::new();
        for (v, w) in &phi.map.vertex_map {
            cells.insert(v.clone(), CellImageV1 { image: w.clone(), sym: 0 });
        }
        for (e, (w, d)) in &phi.map.edge_map {
            cells.insert(e.clone(), CellImageV1 { image: w.clone(), sym: *d as i64 });
        }
        for (s, (w, g)) in &phi.map.square_map {
            cells.insert(s.clone(), CellImageV1 { image: w.clone(), sym: g.index() as i64 });
        }
        out.push(PartialMapV1 {
            name: phi.name.clone(),
            domain: phi.domain.cells.iter().cloned().collect(),
            cells,
        });
    }
    Ok(InstanceV1 { complex: complex_to_json(y), maps: out })
}

// ---------------------------------------------------------------------------
// quotient.v1 and product.v1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientV1 {
    pub rank: usize,
    pub degree: usize,
    /// image arrays over the points 0..degree-1
    pub gens: Vec<Vec<usize>>,
}

pub fn quotient_to_json(q: &FiniteQuotient) -> QuotientV1 {
    QuotientV1 {
        rank: q.rank,
        degree: q.degree,
        gens: q.gens.iter().map(|p| p.0.clone()).collect(),
    }
}

pub fn quotient_from_json(v: &QuotientV1) -> Result<FiniteQuotient, Error> {
    FiniteQuotient::new(v.rank, v.degree, v.gens.iter().cloned().map(Perm).collect())
}

/// `{"rank": n, "product": [word, [gens], word, [gens], ..., word]}` with
/// words as strings over `a..z` (capitals are inverses) and subgroups as
/// lists of generator words.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductV1 {
    pub rank: usize,
    pub product: Vec<Value>,
}

pub fn product_from_json(v: &ProductV1) -> Result<CosetProduct, Error> {
    if v.product.len() < 3 || v.product.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "product must alternate word, subgroup, ..., word with at least one subgroup".into(),
        ));
    }
    let word_at = |val: &Value| -> Result<Word, Error> {
        let s = val
            .as_str()
            .ok_or_else(|| Error::InvalidInput("expected a word string".into()))?;
        let w = Word::parse(s)?;
        if w.max_generator() > v.rank {
            return Err(Error::InvalidWord("word exceeds the declared rank".into()));
        }
        Ok(w)
    };
    let subgroup_at = |val: &Value| -> Result<StallingsGraph, Error> {
        let arr = val
            .as_array()
            .ok_or_else(|| Error::InvalidInput("expected a generator list".into()))?;
        let gens: Vec<Word> = arr
            .iter()
            .map(&word_at)
            .collect::<Result<_, _>>()?;
        StallingsGraph::from_generators(v.rank, &gens)
    };
    let head = word_at(&v.product[0])?;
    let mut factors = Vec::new();
    let mut i = 1;
    while i < v.product.len() {
        let h = subgroup_at(&v.product[i])?;
        let w = word_at(&v.product[i + 1])?;
        factors.push((h, w));
        i += 2;
    }
    Ok(CosetProduct { rank: v.rank, head, factors })
}

// ---------------------------------------------------------------------------
// certificate.v1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateV1 {
    pub schema: String,
    pub target: String,
    pub y: ComplexV1,
    pub complex: ComplexV1,
    pub iota: MapV1,
    pub automorphisms: Vec<MapV1>,
    pub ledger: Vec<LedgerEntryV1>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient: Option<QuotientV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntryV1 {
    pub name: String,
    pub pass: bool,
    pub required: bool,
    pub detail: String,
}

pub fn certificate_to_json(c: &HrushovskiCertificate) -> Result<CertificateV1, Error> {
    Ok(CertificateV1 {
        schema: "certificate.v1".to_string(),
        target: match c.target {
            Target::Npc => "npc".to_string(),
            Target::Special => "special".to_string(),
        },
        y: complex_to_json(&c.y),
        complex: complex_to_json(&c.complex),
        iota: map_to_json(&c.iota)?,
        automorphisms: c.autos.iter().map(map_to_json).collect::<Result<_, _>>()?,
        ledger: c
            .ledger
            .entries
            .iter()
            .map(|e| LedgerEntryV1 {
                name: e.name.clone(),
                pass: e.pass,
                required: e.required,
                detail: e.detail.clone(),
            })
            .collect(),
        quotient: c.quotient.as_ref().map(quotient_to_json),
    })
}

pub fn certificate_from_json(v: &CertificateV1) -> Result<HrushovskiCertificate, Error> {
    if v.schema != "certificate.v1" {
        return Err(Error::InvalidInput(format!("unknown schema `{}`", v.schema)));
    }
    let target = match v.target.as_str() {
        "npc" => Target::Npc,
        "special" => Target::Special,
        other => return Err(Error::InvalidInput(format!("unknown target `{other}`"))),
    };
    let mut ledger = Ledger::default();
    for e in &v.ledger {
        ledger.entries.push(crate::pipeline::LedgerEntry {
            name: e.name.clone(),
            pass: e.pass,
            required: e.required,
            detail: e.detail.clone(),
        });
    }
    Ok(HrushovskiCertificate {
        target,
        y: complex_from_json(&v.y)?,
        complex: complex_from_json(&v.complex)?,
        iota: map_from_json(&v.iota)?,
        autos: v.automorphisms.iter().map(map_from_json).collect::<Result<_, _>>()?,
        ledger,
        quotient: v.quotient.as_ref().map(quotient_from_json).transpose()?,
        cover: None,
    })
}

// ---------------------------------------------------------------------------
// specialness.v1
// ---------------------------------------------------------------------------

pub fn specialness_to_json(r: &crate::hyperplane::SpecialnessReport) -> Value {
    serde_json::json!({
        "schema": "specialness.v1",
        "special": r.special,
        "pathologies": r.pathologies().into_iter().collect::<Vec<_>>(),
        "hyperplanes": r.hyperplanes,
        "inter_osculations": r.inter_osculations,
        "precondition_failures": r.precondition_failures,
    })
}
