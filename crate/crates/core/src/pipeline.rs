//! Finite regular covers of realizations, induced automorphisms and their
//! descent to the horizontal quotient, cover verification, and the full
//! construction: a compact complex `R` containing `Y` in which every given
//! partial local isometry extends to an automorphism, with a re-checkable
//! certificate.
//!
//! Conventions, fixed once: the Cayley graph has an edge `q -> q·φ(g_j)` per
//! element `q` and generator `j`; the thick edge-space over it attaches the
//! domain `Y_j` into copy `q` at the initial end and its image `φ_j(Y_j)`
//! into copy `q·φ(g_j)` at the terminal end (the lift of the loop). Deck and
//! extension automorphisms act by left multiplication, which commutes with
//! the right-multiplication edge structure; the automorphism extending
//! `φ_j` is left multiplication by `φ(g_j)^{-1}`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::complex::{CellId, CubeComplex, Subcomplex};
use crate::error::Error;
use crate::freegrp::{
    find_separating_quotient_with, intersect, strictness_products, Exhausted, FiniteQuotient,
    Perm, QuotientCandidates, SearchTrace,
};
pub use crate::freegrp::Budget;
use crate::gos::{
    assemble, horizontal_quotient, is_controlled, realization, vcell, EdgeSpace, GraphOfSpaces,
    HorizontalQuotient, StrictQuotient, TotalSpace, UGraph,
};
use crate::hyperplane::{hyperplanes, is_special};
use crate::map::{
    is_locally_convex, validate_partial_local_isometry, CubicalMap, PartialLocalIsometry,
};

// ---------------------------------------------------------------------------
// Induced covers
// ---------------------------------------------------------------------------

/// The finite regular cover of a realization induced by a finite quotient of
/// the free group on the loops.
pub struct CoverSpec {
    pub quotient: FiniteQuotient,
    pub realization: GraphOfSpaces,
    pub realization_total: TotalSpace,
    pub cayley: UGraph,
    pub gos: GraphOfSpaces,
    pub total: TotalSpace,
    /// vertex id of the copy over the identity element
    pub base_vertex: String,
    /// covering projection onto the realization's total space
    pub projection: CubicalMap,
}

fn copy_name(i: usize) -> String {
    format!("q{i}")
}

/// The generator images must be nontrivial with pairwise distinct images and
/// inverses, so the Cayley graph is loop-free with `2n` distinct neighbors.
pub fn generator_images_admissible(q: &FiniteQuotient) -> bool {
    let mut seen: Vec<Perm> = Vec::new();
    for g in &q.gens {
        if g.is_identity() {
            return false;
        }
        for h in [g.clone(), g.inverse()] {
            if seen.contains(&h) {
                return false;
            }
            seen.push(h);
        }
    }
    true
}

pub fn induced_cover(real: &GraphOfSpaces, q: &FiniteQuotient) -> Result<CoverSpec, Error> {
    if !real.graph.is_bouquet() {
        return Err(Error::Precondition("realization must sit over a bouquet".into()));
    }
    let rank = real.graph.edges.len();
    if q.rank != rank {
        return Err(Error::Mismatch(format!(
            "quotient rank {} differs from the number of partial maps {rank}",
            q.rank
        )));
    }
    let y = &real.vertex_spaces["v"];

    let mut cayley = UGraph::default();
    for i in 0..q.order() {
        cayley.vertices.insert(copy_name(i));
    }
    let mut vertex_spaces = BTreeMap::new();
    for i in 0..q.order() {
        vertex_spaces.insert(copy_name(i), y.clone());
    }
    let mut edge_spaces = BTreeMap::new();
    for j in 1..=rank {
        let loop_id = format!("g{j}");
        let es = &real.edge_spaces[&loop_id];
        let gj = q
            .element_index(&q.gens[j - 1])
            .expect("generator image is an element of the table");
        for i in 0..q.order() {
            let target = q.mul_idx(i, gj);
            let id = format!("{}:{loop_id}", copy_name(i));
            cayley.edges.insert(id.clone(), (copy_name(i), copy_name(target)));
            edge_spaces.insert(
                id,
                EdgeSpace { space: es.space.clone(), tau1: es.tau1.clone(), tau2: es.tau2.clone() },
            );
        }
    }
    let gos = GraphOfSpaces { graph: cayley.clone(), vertex_spaces, edge_spaces };
    let total = assemble(&gos)?;
    let realization_total = assemble(real)?;

    // covering projection: strip the copy index
    let mut proj = CubicalMap::new(total.complex.clone(), realization_total.complex.clone());
    for (cell, p) in &total.provenance {
        let image = match p {
            crate::gos::Provenance::Vertex { cell: c, .. } => vcell("v", c),
            crate::gos::Provenance::EdgeMid { edge, cell: c } => {
                let loop_id = edge.split(':').nth(1).expect("cover edge ids are q<i>:g<j>");
                crate::gos::mcell(loop_id, c)
            }
        };
        match total.complex.cell_dim(cell).unwrap() {
            0 => {
                proj.vertex_map.insert(cell.clone(), image);
            }
            1 => {
                proj.edge_map.insert(cell.clone(), (image, 1));
            }
            2 => {
                proj.square_map.insert(cell.clone(), (image, crate::sym::SquareSym::identity()));
            }
            _ => {
                proj.cube_map.insert(cell.clone(), (image, crate::sym::CubeSym::identity()));
            }
        }
    }
    proj.validate()
        .map_err(|e| Error::InvalidMap(format!("covering projection is not cubical: {e}")))?;

    let base_vertex = copy_name(q.identity_index());
    Ok(CoverSpec {
        quotient: q.clone(),
        realization: real.clone(),
        realization_total,
        cayley,
        gos,
        total,
        base_vertex,
        projection: proj,
    })
}

impl FiniteQuotient {
    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        let p = self.elements[a].compose(&self.elements[b]);
        self.element_index(&p).expect("element table is closed")
    }

    pub fn inv_idx(&self, a: usize) -> usize {
        self.element_index(&self.elements[a].inverse()).expect("element table is closed")
    }
}

/// The covering projection restricts to a bijection on every link.
pub fn covering_links_ok(cover: &CoverSpec) -> bool {
    if cover.projection.is_immersion().is_err() {
        return false;
    }
    for v in &cover.total.complex.vertices {
        let up = cover.total.complex.link(v).expect("vertex of the total space");
        let down = cover
            .realization_total
            .complex
            .link(&cover.projection.vertex_map[v])
            .expect("projected vertex");
        if up.vertices.len() != down.vertices.len()
            || up.edges.len() != down.edges.len()
            || up.triangles.len() != down.triangles.len()
        {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Induced automorphisms and descent
// ---------------------------------------------------------------------------

/// Left multiplication by `h` (an element index) on copy indices, identity
/// on the `Y` coordinate of every copy and thick edge-space.
pub fn deck_automorphism(cover: &CoverSpec, h: usize) -> CubicalMap {
    let q = &cover.quotient;
    let move_vertex = |name: &str| -> String {
        let i: usize = name.strip_prefix('q').unwrap().parse().unwrap();
        copy_name(q.mul_idx(h, i))
    };
    let move_cell = |cell: &CellId| -> CellId {
        match &cover.total.provenance[cell] {
            crate::gos::Provenance::Vertex { vertex, cell: c } => vcell(&move_vertex(vertex), c),
            crate::gos::Provenance::EdgeMid { edge, cell: c } => {
                let (u, loop_id) = edge.split_once(':').unwrap();
                crate::gos::mcell(&format!("{}:{loop_id}", move_vertex(u)), c)
            }
        }
    };
    let x = &cover.total.complex;
    let mut f = CubicalMap::new(x.clone(), x.clone());
    for v in &x.vertices {
        f.vertex_map.insert(v.clone(), move_cell(v));
    }
    for e in x.edges.keys() {
        f.edge_map.insert(e.clone(), (move_cell(e), 1));
    }
    for s in x.squares.keys() {
        f.square_map.insert(s.clone(), (move_cell(s), crate::sym::SquareSym::identity()));
    }
    for c in x.cubes3.keys() {
        f.cube_map.insert(c.clone(), (move_cell(c), crate::sym::CubeSym::identity()));
    }
    f
}

/// The automorphism of the cover extending the `j`-th partial map: left
/// multiplication by `φ(g_j)^{-1}`.
pub fn induced_automorphism(cover: &CoverSpec, j: usize) -> Result<CubicalMap, Error> {
    if j == 0 || j > cover.quotient.rank {
        return Err(Error::InvalidInput(format!("generator index {j} out of range")));
    }
    let q = &cover.quotient;
    let gj = q.element_index(&q.gens[j - 1]).unwrap();
    Ok(deck_automorphism(cover, q.inv_idx(gj)))
}

/// Descend an automorphism of the total space to the strict quotient; the
/// descent square `q ∘ Φ = Φ^E ∘ q` is verified cell by cell.
pub fn descend(
    t: &TotalSpace,
    sq: &StrictQuotient,
    phi: &CubicalMap,
) -> Result<CubicalMap, Error> {
    let ec = &sq.classes;
    let mut out = CubicalMap::new(sq.complex.clone(), sq.complex.clone());
    for rep in sq.complex.vertices.iter() {
        let img = &phi.vertex_map[rep];
        out.vertex_map.insert(rep.clone(), ec.rep[img].clone());
    }
    for rep in sq.complex.edges.keys() {
        let (img, d) = &phi.edge_map[rep];
        out.edge_map.insert(rep.clone(), (ec.rep[img].clone(), ec.rel_dir(img) * d));
    }
    for rep in sq.complex.squares.keys() {
        let (img, g) = &phi.square_map[rep];
        out.square_map
            .insert(rep.clone(), (ec.rep[img].clone(), ec.rel_sym(img).compose(g)));
    }
    for rep in sq.complex.cubes3.keys() {
        let (img, g) = &phi.cube_map[rep];
        // 3-cubes are never identified, so the representative is itself
        out.cube_map.insert(rep.clone(), (ec.rep[img].clone(), *g));
    }
    out.validate()
        .map_err(|e| Error::InvalidMap(format!("descended map is not cubical: {e}")))?;
    // exact descent square on every cell
    for cell in t.complex.all_cells() {
        let lhs = &sq.q[&phi.image_of(cell).ok_or_else(|| Error::UnknownCell(cell.clone()))?];
        let rhs = out.image_of(&sq.q[cell]).unwrap();
        if *lhs != rhs {
            return Err(Error::InvalidMap(format!(
                "descent square fails at `{cell}`: {lhs} vs {rhs}"
            )));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cover verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Npc,
    Special,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    pub pass: bool,
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    fn push(&mut self, name: &str, pass: bool, required: bool, detail: String) {
        self.entries.push(LedgerEntry { name: name.to_string(), pass, required, detail });
    }

    pub fn all_required_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass || !e.required)
    }

    pub fn get(&self, name: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// The verified data of an accepted cover: the quotient complex, the
/// embedding of the base copy, and the descended automorphisms.
pub struct VerifiedCover {
    pub ledger: Ledger,
    pub quotient_complex: Option<CubeComplex>,
    pub iota: Option<CubicalMap>,
    pub autos: Vec<CubicalMap>,
}

/// Run every check the construction relies on; failures are recorded in the
/// ledger, not thrown.
pub fn verify_cover(cover: &CoverSpec, target: Target) -> VerifiedCover {
    let special = target == Target::Special;
    let mut ledger = Ledger::default();
    let y = &cover.realization.vertex_spaces["v"];

    let links_ok = covering_links_ok(cover);
    ledger.push(
        "covering_projection",
        links_ok,
        true,
        "projection is cubical and restricts to link bijections".into(),
    );

    let hq = match horizontal_quotient(&cover.total) {
        Ok(hq) => hq,
        Err(e) => {
            ledger.push("strict", false, true, format!("quotient construction failed: {e}"));
            return VerifiedCover { ledger, quotient_complex: None, iota: None, autos: Vec::new() };
        }
    };
    let sq = match hq {
        HorizontalQuotient::Strict(sq) => {
            ledger.push("strict", true, true, "horizontal quotient is strict".into());
            sq
        }
        HorizontalQuotient::NonStrict(w) => {
            ledger.push("strict", false, true, format!("non-strict: {w:?}"));
            return VerifiedCover { ledger, quotient_complex: None, iota: None, autos: Vec::new() };
        }
    };

    let npc = sq.complex.is_npc().is_ok();
    ledger.push("quotient_npc", npc, true, "link criterion".into());
    let corners = crate::gos::detect_empty_k_corners(&sq.complex);
    let agree = corners.is_empty() == npc;
    ledger.push(
        "empty_corners",
        corners.is_empty() && agree,
        true,
        format!("{} empty corners; agreement with the link criterion: {agree}", corners.len()),
    );

    // embedding of the base copy of Y
    let mut iota = CubicalMap::new(y.clone(), sq.complex.clone());
    let b = &cover.base_vertex;
    for v in &y.vertices {
        iota.vertex_map.insert(v.clone(), sq.q[&vcell(b, v)].clone());
    }
    for e in y.edges.keys() {
        let total_id = vcell(b, e);
        iota.edge_map
            .insert(e.clone(), (sq.q[&total_id].clone(), sq.classes.rel_dir(&total_id)));
    }
    for s in y.squares.keys() {
        let total_id = vcell(b, s);
        iota.square_map
            .insert(s.clone(), (sq.q[&total_id].clone(), sq.classes.rel_sym(&total_id)));
    }
    for c in y.cubes3.keys() {
        let total_id = vcell(b, c);
        iota.cube_map
            .insert(c.clone(), (sq.q[&total_id].clone(), crate::sym::CubeSym::identity()));
    }
    let iota_ok = iota.validate().is_ok() && iota.is_injective();
    ledger.push(
        "embedding",
        iota_ok,
        true,
        "the base copy of Y maps isomorphically onto a subcomplex".into(),
    );

    let lc = is_locally_convex(&sq.complex, &iota.image());
    ledger.push(
        "embedding_locally_convex",
        lc.is_ok(),
        special,
        format!("{:?}", lc.err()),
    );

    if special {
        let report = is_special(&sq.complex);
        ledger.push(
            "quotient_special",
            report.special,
            true,
            format!("pathologies: {:?}", report.pathologies()),
        );
        let (_, hps) = hyperplanes(&sq.complex);
        let two_sided = hps.iter().all(|h| h.orientation.is_some());
        ledger.push("quotient_two_sided", two_sided, true, "all quotient hyperplanes two-sided".into());
        let control = is_controlled(&cover.realization);
        ledger.push(
            "realization_controlled",
            control.is_controlled(),
            true,
            format!("{control:?}"),
        );
    }

    // automorphisms: extension and exact descent per generator
    let mut autos = Vec::new();
    let rank = cover.quotient.rank;
    for j in 1..=rank {
        let up = match induced_automorphism(cover, j) {
            Ok(up) => up,
            Err(e) => {
                ledger.push(&format!("automorphism_g{j}"), false, true, e.to_string());
                continue;
            }
        };
        let up_ok = up.is_automorphism()
            && commutes_with_cayley(cover, &up);
        ledger.push(
            &format!("automorphism_g{j}"),
            up_ok,
            true,
            "cover automorphism over a Cayley graph automorphism".into(),
        );
        match descend(&cover.total, &sq, &up) {
            Ok(down) => {
                let auto_ok = down.is_automorphism();
                ledger.push(
                    &format!("descent_g{j}"),
                    auto_ok,
                    true,
                    "descends with an exact descent square".into(),
                );
                // extension: Φ^E(ι(y)) = ι(φ_j(y)) on every cell of Y_j
                let es = &cover.realization.edge_spaces[&format!("g{j}")];
                let mut ok = true;
                for c in es.space.all_cells() {
                    let dom_cell = es.tau1.image_of(c).expect("inclusion is total");
                    let img_cell = es.tau2.image_of(c).expect("map is total");
                    let lhs = down.image_of(&iota.image_of(&dom_cell).unwrap()).unwrap();
                    let rhs = iota.image_of(&img_cell).unwrap();
                    if lhs != rhs {
                        ok = false;
                        break;
                    }
                }
                ledger.push(
                    &format!("extension_g{j}"),
                    ok,
                    true,
                    "the descended automorphism extends the partial map".into(),
                );
                autos.push(down);
            }
            Err(e) => {
                ledger.push(&format!("descent_g{j}"), false, true, e.to_string());
            }
        }
    }

    let dim_ok = sq.complex.dim() == y.dim();
    ledger.push(
        "dimension",
        dim_ok,
        true,
        format!("dim R = {}, dim Y = {}", sq.complex.dim(), y.dim()),
    );

    VerifiedCover {
        ledger,
        quotient_complex: Some(sq.complex),
        iota: Some(iota),
        autos,
    }
}

/// The automorphism maps vertex-spaces to vertex-spaces over a graph
/// automorphism: check cell-wise through the provenance.
fn commutes_with_cayley(cover: &CoverSpec, up: &CubicalMap) -> bool {
    let mut vertex_image: BTreeMap<&str, String> = BTreeMap::new();
    for (cell, p) in &cover.total.provenance {
        let Some(img) = up.image_of(cell) else { return false };
        let (pv, iv) = match (p, &cover.total.provenance[&img]) {
            (
                crate::gos::Provenance::Vertex { vertex: a, .. },
                crate::gos::Provenance::Vertex { vertex: b, .. },
            ) => (a.as_str(), b.clone()),
            (
                crate::gos::Provenance::EdgeMid { edge: a, .. },
                crate::gos::Provenance::EdgeMid { edge: b, .. },
            ) => (a.as_str(), b.clone()),
            _ => return false,
        };
        if let Some(prev) = vertex_image.get(pv) {
            if *prev != iv {
                return false;
            }
        } else {
            vertex_image.insert(pv, iv);
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Cover search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub trace: SearchTrace,
}

/// Stage 1 separates the strictness products under the generator-image
/// constraints; stage 2 verifies the induced cover; stage 3 refines by
/// intersecting with further catalog quotients until the ledger passes or
/// the budget runs out.
pub fn search_cover(
    real: &GraphOfSpaces,
    target: Target,
    budget: &Budget,
) -> Result<(CoverSpec, VerifiedCover), Exhausted> {
    let start = Instant::now();
    let mut trace = SearchTrace::default();
    let rank = real.graph.edges.len();
    let total = assemble(real).map_err(|e| Exhausted {
        trace: SearchTrace { candidates_tried: 0, notes: vec![format!("assembly failed: {e}")] },
    })?;
    let products = strictness_products(&total).map_err(|e| Exhausted {
        trace: SearchTrace { candidates_tried: 0, notes: vec![format!("products failed: {e}")] },
    })?;
    trace.notes.push(format!("{} strictness products", products.len()));

    let accept = |q: &FiniteQuotient| rank == 0 || generator_images_admissible(q);
    let mut q = find_separating_quotient_with(rank, &products, budget, accept).map_err(|e| {
        let mut t = e.trace;
        t.notes.push("stage 1 exhausted".into());
        Exhausted { trace: t }
    })?;
    trace.notes.push(format!("stage 1 quotient: degree {}, order {}", q.degree, q.order()));

    let mut refinements = QuotientCandidates::new(rank, budget);
    loop {
        if start.elapsed().as_secs_f64() > budget.max_seconds {
            trace.notes.push("time budget exhausted during refinement".into());
            return Err(Exhausted { trace });
        }
        trace.candidates_tried += 1;
        if rank > 0 && !generator_images_admissible(&q) {
            trace.notes.push("cover construction rejected: inadmissible generator images".into());
            // fall through to refinement
        } else {
        match induced_cover(real, &q) {
            Ok(cover) => {
                let verified = verify_cover(&cover, target);
                if verified.ledger.all_required_pass() {
                    trace.notes.push(format!(
                        "accepted cover over quotient of order {}",
                        q.order()
                    ));
                    return Ok((cover, verified));
                }
                let failing: Vec<&str> = verified
                    .ledger
                    .entries
                    .iter()
                    .filter(|e| e.required && !e.pass)
                    .map(|e| e.name.as_str())
                    .collect();
                trace.notes.push(format!("cover rejected: {failing:?}"));
            }
            Err(e) => {
                trace.notes.push(format!("cover construction rejected: {e}"));
            }
        }
        }
        // refine: intersect with the next catalog quotient
        let mut refined = None;
        for (name, degree, tuple) in refinements.by_ref() {
            let Ok(candidate) = FiniteQuotient::new(rank, degree, tuple) else { continue };
            match intersect(&q, &candidate) {
                Ok(next) => {
                    if accept(&next) || !accept(&q) {
                        trace.notes.push(format!("refined with {name}"));
                        refined = Some(next);
                        break;
                    }
                }
                Err(_) => continue,
            }
        }
        match refined {
            Some(next) => q = next,
            None => {
                trace.notes.push("refinement stream exhausted".into());
                return Err(Exhausted { trace });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// The full construction
// ---------------------------------------------------------------------------

pub struct HrushovskiCertificate {
    pub target: Target,
    pub y: CubeComplex,
    pub complex: CubeComplex,
    pub iota: CubicalMap,
    /// one automorphism of `complex` per partial map, in input order
    pub autos: Vec<CubicalMap>,
    pub ledger: Ledger,
    pub quotient: Option<FiniteQuotient>,
    /// kept for idempotent re-verification
    pub cover: Option<CoverSpec>,
}

pub struct HrushovskiOptions {
    pub target: Target,
    pub budget: Budget,
    /// drop partial maps that are restrictions of another map (by inclusion)
    pub prune_restrictions: bool,
}

impl Default for HrushovskiOptions {
    fn default() -> Self {
        HrushovskiOptions {
            target: Target::Npc,
            budget: Budget::default(),
            prune_restrictions: false,
        }
    }
}

/// Is `a` a restriction of `b`? Inclusion of domains plus agreement.
fn is_restriction(a: &PartialLocalIsometry, b: &PartialLocalIsometry) -> bool {
    if !a.domain.cells.is_subset(&b.domain.cells) {
        return false;
    }
    a.map.vertex_map.iter().all(|(k, v)| b.map.vertex_map.get(k) == Some(v))
        && a.map.edge_map.iter().all(|(k, v)| b.map.edge_map.get(k) == Some(v))
        && a.map.square_map.iter().all(|(k, v)| b.map.square_map.get(k) == Some(v))
}

pub enum HrushovskiOutcome {
    Certificate(Box<HrushovskiCertificate>),
    Exhausted(Exhausted),
}

pub fn hrushovski(
    y: &CubeComplex,
    maps: &[PartialLocalIsometry],
    opts: &HrushovskiOptions,
) -> Result<HrushovskiOutcome, Error> {
    for phi in maps {
        let report = validate_partial_local_isometry(y, phi);
        if !report.is_ok() {
            return Err(Error::Precondition(format!(
                "partial local isometry `{}`: {}",
                phi.name,
                report.failures.join("; ")
            )));
        }
    }
    let mut kept: Vec<PartialLocalIsometry> = Vec::new();
    if opts.prune_restrictions {
        for (i, a) in maps.iter().enumerate() {
            let redundant = maps
                .iter()
                .enumerate()
                .any(|(jj, b)| i != jj && is_restriction(a, b) && !(is_restriction(b, a) && jj > i));
            if !redundant {
                kept.push(a.clone());
            }
        }
    } else {
        kept = maps.to_vec();
    }

    if opts.target == Target::Special {
        let report = is_special(y);
        if !report.special {
            return Err(Error::Precondition(format!(
                "Y is not special: {:?}",
                report.pathologies()
            )));
        }
    }

    if kept.is_empty() {
        // nothing to extend: Y itself certifies
        let mut ledger = Ledger::default();
        ledger.push("embedding", true, true, "identity embedding".into());
        let npc = y.is_npc().is_ok();
        ledger.push("quotient_npc", npc, true, "Y itself".into());
        if opts.target == Target::Special {
            ledger.push("quotient_special", is_special(y).special, true, "Y itself".into());
        }
        ledger.push("dimension", true, true, format!("dim R = dim Y = {}", y.dim()));
        return Ok(HrushovskiOutcome::Certificate(Box::new(HrushovskiCertificate {
            target: opts.target,
            y: y.clone(),
            complex: y.clone(),
            iota: CubicalMap::identity(y),
            autos: Vec::new(),
            ledger,
            quotient: None,
            cover: None,
        })));
    }

    let real = realization(y, &kept)?;
    if opts.target == Target::Special {
        let control = is_controlled(&real);
        if !control.is_controlled() {
            return Err(Error::Precondition(format!(
                "the family is not controlled: {control:?}"
            )));
        }
    }
    match search_cover(&real, opts.target, &opts.budget) {
        Ok((cover, verified)) => {
            let certificate = HrushovskiCertificate {
                target: opts.target,
                y: y.clone(),
                complex: verified.quotient_complex.expect("accepted cover has a quotient"),
                iota: verified.iota.expect("accepted cover has an embedding"),
                autos: verified.autos,
                ledger: verified.ledger,
                quotient: Some(cover.quotient.clone()),
                cover: Some(cover),
            };
            Ok(HrushovskiOutcome::Certificate(Box::new(certificate)))
        }
        Err(e) => Ok(HrushovskiOutcome::Exhausted(e)),
    }
}

/// Re-check the certificate from its complex and maps alone: embedding,
/// automorphisms, extensions, curvature, and dimension.
pub fn replay_certificate(cert: &HrushovskiCertificate, maps: &[PartialLocalIsometry]) -> Ledger {
    let mut ledger = Ledger::default();
    let r = &cert.complex;
    ledger.push("complex_valid", r.validate().is_ok(), true, String::new());
    ledger.push("quotient_npc", r.is_npc().is_ok(), true, String::new());
    if cert.target == Target::Special {
        ledger.push("quotient_special", is_special(r).special, true, String::new());
        let img = cert.iota.image();
        ledger.push(
            "embedding_locally_convex",
            is_locally_convex(r, &img).is_ok(),
            true,
            String::new(),
        );
    }
    ledger.push(
        "embedding",
        cert.iota.validate().is_ok() && cert.iota.is_injective(),
        true,
        String::new(),
    );
    ledger.push(
        "dimension",
        r.dim() == cert.y.dim(),
        true,
        format!("dim R = {}, dim Y = {}", r.dim(), cert.y.dim()),
    );
    for (j, (auto, phi)) in cert.autos.iter().zip(maps.iter()).enumerate() {
        ledger.push(
            &format!("automorphism_g{}", j + 1),
            auto.is_automorphism(),
            true,
            String::new(),
        );
        let mut ok = true;
        for c in phi.map.domain.all_cells() {
            let img_cell = phi.map.image_of(c).unwrap();
            let lhs = auto.image_of(&cert.iota.image_of(c).unwrap()).unwrap();
            let rhs = cert.iota.image_of(&img_cell).unwrap();
            if lhs != rhs {
                ok = false;
            }
        }
        ledger.push(&format!("extension_g{}", j + 1), ok, true, String::new());
    }
    ledger
}

/// The subcomplex of `R` carrying the embedded copy of `Y`.
pub fn embedded_copy(cert: &HrushovskiCertificate) -> Subcomplex {
    cert.iota.image()
}
