//! Seeded generators of random instances: square complexes, NPC complexes
//! built as products of graphs with locally convex subcomplexes, tree-shaped
//! graphs of spaces, and graph realizations with random partial isometries.
//! Everything is deterministic in the seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::complex::{build, CellId, CubeComplex, Edge, EdgeRef, Square, Subcomplex};
use crate::gos::{EdgeSpace, GraphOfSpaces, UGraph};
use crate::map::{is_locally_convex, validate_partial_local_isometry, CubicalMap, PartialLocalIsometry};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random valid square complex: random edges over a small vertex set, then
/// squares whose sides reuse or create edges consistently with the corners.
pub fn random_square_complex(rng: &mut StdRng, max_squares: usize) -> CubeComplex {
    let mut x = CubeComplex::default();
    let nv = rng.gen_range(1..=6);
    for i in 0..nv {
        build::vertex(&mut x, &format!("v{i}"));
    }
    let vertices: Vec<CellId> = x.vertices.iter().cloned().collect();
    let ne = rng.gen_range(0..=8);
    for i in 0..ne {
        let a = vertices[rng.gen_range(0..vertices.len())].clone();
        let b = vertices[rng.gen_range(0..vertices.len())].clone();
        x.edges.insert(format!("e{i}"), Edge { ends: [a, b] });
    }
    let ns = rng.gen_range(0..=max_squares);
    for i in 0..ns {
        let vs: Vec<CellId> =
            (0..4).map(|_| vertices[rng.gen_range(0..vertices.len())].clone()).collect();
        let corners: [CellId; 4] = [vs[0].clone(), vs[1].clone(), vs[2].clone(), vs[3].clone()];
        let mut sides = Vec::with_capacity(4);
        for side in 0..4usize {
            let (sc, ec) = crate::complex::square_side_corners(side);
            let want = (&corners[sc], &corners[ec]);
            // reuse a matching edge sometimes
            let mut candidates: Vec<(CellId, i8)> = Vec::new();
            for (id, e) in &x.edges {
                if (&e.ends[0], &e.ends[1]) == want {
                    candidates.push((id.clone(), 1));
                }
                if (&e.ends[1], &e.ends[0]) == want {
                    candidates.push((id.clone(), -1));
                }
            }
            if !candidates.is_empty() && rng.gen_bool(0.7) {
                let (id, d) = candidates[rng.gen_range(0..candidates.len())].clone();
                sides.push(EdgeRef { edge: id, dir: d });
            } else {
                let id = format!("s{i}e{side}");
                x.edges.insert(id.clone(), Edge { ends: [want.0.clone(), want.1.clone()] });
                sides.push(EdgeRef { edge: id, dir: 1 });
            }
        }
        x.squares.insert(
            format!("s{i}"),
            Square { corners, sides: sides.try_into().unwrap() },
        );
    }
    debug_assert!(x.validate().is_ok());
    x
}

/// A random graph complex on `nv` vertices with `ne` edges; loops and
/// multi-edges allowed, always connected when `connected` is set.
pub fn random_graph(rng: &mut StdRng, nv: usize, ne: usize, connected: bool) -> CubeComplex {
    let mut x = CubeComplex::default();
    for i in 0..nv {
        build::vertex(&mut x, &format!("v{i}"));
    }
    let mut k = 0;
    if connected {
        for i in 1..nv {
            let j = rng.gen_range(0..i);
            build::edge(&mut x, &format!("e{k}"), &format!("v{j}"), &format!("v{i}"));
            k += 1;
        }
    }
    while k < ne {
        let a = rng.gen_range(0..nv);
        let b = rng.gen_range(0..nv);
        build::edge(&mut x, &format!("e{k}"), &format!("v{a}"), &format!("v{b}"));
        k += 1;
    }
    x
}

/// The square complex `G1 x G2` of two graphs; nonpositively curved.
pub fn graph_product(g1: &CubeComplex, g2: &CubeComplex) -> CubeComplex {
    assert!(g1.dim() <= 1 && g2.dim() <= 1);
    let mut x = CubeComplex::default();
    let pv = |u: &str, v: &str| format!("{u}*{v}");
    for u in &g1.vertices {
        for v in &g2.vertices {
            build::vertex(&mut x, &pv(u, v));
        }
    }
    for (e, ee) in &g1.edges {
        for v in &g2.vertices {
            x.edges.insert(
                pv(e, v),
                Edge { ends: [pv(&ee.ends[0], v), pv(&ee.ends[1], v)] },
            );
        }
    }
    for u in &g1.vertices {
        for (f, fe) in &g2.edges {
            x.edges.insert(
                pv(u, f),
                Edge { ends: [pv(u, &fe.ends[0]), pv(u, &fe.ends[1])] },
            );
        }
    }
    for (e, ee) in &g1.edges {
        for (f, fe) in &g2.edges {
            let (a, b) = (&ee.ends[0], &ee.ends[1]);
            let (c, d) = (&fe.ends[0], &fe.ends[1]);
            x.squares.insert(
                pv(e, f),
                Square {
                    corners: [pv(a, c), pv(b, c), pv(a, d), pv(b, d)],
                    sides: [
                        EdgeRef { edge: pv(e, c), dir: 1 },
                        EdgeRef { edge: pv(e, d), dir: 1 },
                        EdgeRef { edge: pv(a, f), dir: 1 },
                        EdgeRef { edge: pv(b, f), dir: 1 },
                    ],
                },
            );
        }
    }
    x
}

/// Close a cell selection to a locally convex subcomplex by adding the
/// missing squares until every link inclusion is full.
pub fn locally_convex_closure(x: &CubeComplex, seed_cells: BTreeSet<CellId>) -> Subcomplex {
    let mut sub = Subcomplex::from_cells(x, seed_cells).expect("seed cells exist");
    loop {
        let mut grew = false;
        let a = sub.extract(x);
        for v in &a.vertices {
            let big = x.link(v).unwrap();
            let small = a.link(v).unwrap();
            let vset: BTreeSet<_> = small.vertices.iter().cloned().collect();
            let eset: BTreeSet<_> = small.edges.iter().map(|e| e.cell.clone()).collect();
            for e in &big.edges {
                if vset.contains(&e.ends[0]) && vset.contains(&e.ends[1]) && !eset.contains(&e.cell)
                {
                    sub = Subcomplex::from_cells(
                        x,
                        sub.cells.iter().cloned().chain([e.cell.owner.clone()]),
                    )
                    .unwrap();
                    grew = true;
                }
            }
            // dimension <= 2, so triangles cannot be missing
        }
        if !grew {
            return sub;
        }
    }
}

/// A random connected locally convex subcomplex of `x`.
pub fn random_locally_convex_subcomplex(rng: &mut StdRng, x: &CubeComplex) -> Subcomplex {
    let all: Vec<CellId> = x.all_cells().cloned().collect();
    let n = rng.gen_range(1..=all.len().min(4));
    let seeds: BTreeSet<CellId> =
        (0..n).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
    let sub = locally_convex_closure(x, seeds);
    // keep the connected component of the least vertex
    let a = sub.extract(x);
    let start = a.vertices.iter().next().unwrap().clone();
    let mut seen: BTreeSet<CellId> = BTreeSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (id, e) in &a.edges {
            if e.ends.contains(&v) {
                for w in &e.ends {
                    if seen.insert(w.clone()) {
                        stack.push(w.clone());
                    }
                }
                seen.insert(id.clone());
            }
        }
    }
    // squares with all corners seen
    for (id, s) in &a.squares {
        if s.corners.iter().all(|c| seen.contains(c)) {
            seen.insert(id.clone());
        }
    }
    let comp = locally_convex_closure(x, seen);
    debug_assert!(is_locally_convex(x, &comp).is_ok());
    comp
}

/// A random NPC square complex: the product of two random graphs, cut down
/// to a random locally convex subcomplex.
pub fn random_npc_complex(rng: &mut StdRng) -> CubeComplex {
    let (n1, m1) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let g1 = random_graph(rng, n1, m1, true);
    let (n2, m2) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let g2 = random_graph(rng, n2, m2, true);
    let prod = graph_product(&g1, &g2);
    if rng.gen_bool(0.4) {
        let sub = random_locally_convex_subcomplex(rng, &prod);
        sub.extract(&prod)
    } else {
        prod
    }
}

/// A random tree of spaces with NPC vertex-spaces and inclusion-style
/// injective locally isometric attaching maps.
pub fn random_tree_gos(rng: &mut StdRng) -> GraphOfSpaces {
    let n = rng.gen_range(1..=4);
    let mut graph = UGraph::default();
    graph.vertices.insert("t0".into());
    let mut vertex_spaces = BTreeMap::new();
    vertex_spaces.insert("t0".to_string(), random_npc_complex(rng));
    let mut edge_spaces = BTreeMap::new();
    for i in 1..n {
        let parent = format!("t{}", rng.gen_range(0..i));
        let child = format!("t{i}");
        graph.vertices.insert(child.clone());
        let parent_space = vertex_spaces[&parent].clone();
        let sub = random_locally_convex_subcomplex(rng, &parent_space);
        let es = sub.extract(&parent_space);
        let tau_parent = CubicalMap::inclusion(&parent_space, &sub);
        // the child space contains the edge-space: either the edge-space
        // itself or its product with a path, attached along one end
        let (child_space, tau_child) = if es.dim() <= 1 && rng.gen_bool(0.5) {
            let mut p = CubeComplex::default();
            build::edge(&mut p, "pe", "p0", "p1");
            let prod = graph_product(&es, &p);
            let mut tau = CubicalMap::new(es.clone(), prod.clone());
            for v in &es.vertices {
                tau.vertex_map.insert(v.clone(), format!("{v}*p0"));
            }
            for e in es.edges.keys() {
                tau.edge_map.insert(e.clone(), (format!("{e}*p0"), 1));
            }
            (prod, tau)
        } else {
            (es.clone(), CubicalMap::identity(&es))
        };
        vertex_spaces.insert(child.clone(), child_space);
        graph.edges.insert(format!("te{i}"), (parent, child));
        edge_spaces.insert(
            format!("te{i}"),
            EdgeSpace { space: es, tau1: tau_parent, tau2: tau_child },
        );
    }
    GraphOfSpaces { graph, vertex_spaces, edge_spaces }
}

/// All injective graph maps from a connected subgraph into the graph, built
/// by backtracking; returns a random one, if any exists.
fn random_injective_graph_map(
    rng: &mut StdRng,
    y: &CubeComplex,
    dom: &CubeComplex,
) -> Option<CubicalMap> {
    let dverts: Vec<&CellId> = dom.vertices.iter().collect();
    let dedges: Vec<(&CellId, &Edge)> = dom.edges.iter().collect();
    let yverts: Vec<&CellId> = y.vertices.iter().collect();

    #[allow(clippy::too_many_arguments)]
    fn extend(
        rng: &mut StdRng,
        y: &CubeComplex,
        dedges: &[(&CellId, &Edge)],
        k: usize,
        vmap: &mut BTreeMap<CellId, CellId>,
        emap: &mut BTreeMap<CellId, (CellId, i8)>,
        used_v: &mut BTreeSet<CellId>,
        used_e: &mut BTreeSet<CellId>,
    ) -> bool {
        if k == dedges.len() {
            return true;
        }
        let (id, e) = dedges[k];
        let mut options: Vec<(CellId, i8)> = Vec::new();
        for (fid, f) in &y.edges {
            if used_e.contains(fid) {
                continue;
            }
            for dir in [1i8, -1] {
                let (f0, f1) = if dir == 1 {
                    (&f.ends[0], &f.ends[1])
                } else {
                    (&f.ends[1], &f.ends[0])
                };
                let ok0 = match vmap.get(&e.ends[0]) {
                    Some(v) => v == f0,
                    None => !used_v.contains(f0),
                };
                // a fresh second endpoint must also not collide with the
                // first when both are new and the domain ends are distinct
                let ok1 = match vmap.get(&e.ends[1]) {
                    Some(v) => v == f1,
                    None => {
                        !used_v.contains(f1)
                            && (e.ends[0] == e.ends[1] || vmap.contains_key(&e.ends[0]) || f0 != f1)
                    }
                };
                let loops_match = (e.ends[0] == e.ends[1]) == (f0 == f1);
                if ok0 && ok1 && loops_match {
                    options.push((fid.clone(), dir));
                }
            }
        }
        // shuffle deterministically
        for i in (1..options.len()).rev() {
            options.swap(i, rng.gen_range(0..=i));
        }
        for (fid, dir) in options {
            let f = &y.edges[&fid];
            let (f0, f1) = if dir == 1 {
                (f.ends[0].clone(), f.ends[1].clone())
            } else {
                (f.ends[1].clone(), f.ends[0].clone())
            };
            let fresh0 = !vmap.contains_key(&e.ends[0]);
            let fresh1 = !vmap.contains_key(&e.ends[1]);
            vmap.entry(e.ends[0].clone()).or_insert_with(|| f0.clone());
            vmap.entry(e.ends[1].clone()).or_insert_with(|| f1.clone());
            used_v.insert(f0.clone());
            used_v.insert(f1.clone());
            used_e.insert(fid.clone());
            emap.insert(id.clone(), (fid.clone(), dir));
            if extend(rng, y, dedges, k + 1, vmap, emap, used_v, used_e) {
                return true;
            }
            emap.remove(id);
            used_e.remove(&fid);
            if fresh0 {
                vmap.remove(&e.ends[0]);
                used_v.remove(&f0);
            }
            if fresh1 {
                vmap.remove(&e.ends[1]);
                used_v.remove(&f1);
            }
        }
        false
    }

    let mut vmap = BTreeMap::new();
    let mut emap = BTreeMap::new();
    let mut used_v = BTreeSet::new();
    let mut used_e = BTreeSet::new();
    if dedges.is_empty() {
        // a single vertex: map it anywhere
        let img = yverts[rng.gen_range(0..yverts.len())].clone();
        vmap.insert(dverts[0].clone(), img);
    } else if !extend(rng, y, &dedges, 0, &mut vmap, &mut emap, &mut used_v, &mut used_e) {
        return None;
    }
    // isolated domain vertices (none: domains are connected)
    let mut f = CubicalMap::new(dom.clone(), y.clone());
    f.vertex_map = vmap;
    f.edge_map = emap;
    f.validate().ok()?;
    if !f.is_injective() {
        return None;
    }
    Some(f)
}

/// A random connected subgraph of a graph complex.
fn random_connected_subgraph(rng: &mut StdRng, y: &CubeComplex) -> Subcomplex {
    let verts: Vec<&CellId> = y.vertices.iter().collect();
    let start = verts[rng.gen_range(0..verts.len())].clone();
    let mut cells: BTreeSet<CellId> = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    let steps = rng.gen_range(0..=3);
    for _ in 0..steps {
        let mut candidates = Vec::new();
        for (id, e) in &y.edges {
            if cells.contains(id) {
                continue;
            }
            if frontier.iter().any(|v| e.ends.contains(v)) {
                candidates.push(id.clone());
            }
        }
        if candidates.is_empty() {
            break;
        }
        let pick = candidates[rng.gen_range(0..candidates.len())].clone();
        let e = &y.edges[&pick];
        cells.insert(pick);
        for v in &e.ends {
            if cells.insert(v.clone()) {
                frontier.push(v.clone());
            }
        }
    }
    Subcomplex::from_cells(y, cells).unwrap()
}

/// A random graph `Y` with a few random injective partial isometries.
pub fn random_graph_realization(
    rng: &mut StdRng,
) -> (CubeComplex, Vec<PartialLocalIsometry>) {
    let (nv, ne) = (rng.gen_range(2..=5), rng.gen_range(2..=6));
    let y = random_graph(rng, nv, ne, true);
    let nmaps = rng.gen_range(1..=3);
    let mut maps = Vec::new();
    for j in 0..nmaps {
        for _attempt in 0..8 {
            let dom = random_connected_subgraph(rng, &y);
            let domx = dom.extract(&y);
            if let Some(map) = random_injective_graph_map(rng, &y, &domx) {
                let phi = PartialLocalIsometry { name: format!("m{j}"), domain: dom, map };
                if validate_partial_local_isometry(&y, &phi).is_ok() {
                    maps.push(phi);
                    break;
                }
            }
        }
    }
    (y, maps)
}
