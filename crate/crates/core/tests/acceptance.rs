//! Acceptance suite. Each test prints one pass/fail line with its timing;
//! all witnesses and verdicts are exact, and every random family is seeded.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use cubecc_core::complex::{build, square_corner_sides, CellId, CubeComplex, Subcomplex};
use cubecc_core::freegrp::{
    bounded_elements, double_coset_contains, find_separating_quotient, separates, Budget,
    CosetProduct, StallingsGraph, Word,
};
use cubecc_core::gos::{
    assemble, detect_empty_k_corners, horizontal_quotient, is_controlled, is_strict, realization,
    HorizontalQuotient,
};
use cubecc_core::hyperplane::{
    edge_parallelism_classes, hyperplanes, is_special, SelfOsculation,
};
use cubecc_core::map::{is_locally_convex, CubicalMap, PartialLocalIsometry};
use cubecc_core::pipeline::{
    descend, hrushovski, induced_automorphism, HrushovskiOptions, HrushovskiOutcome, Target,
};
use cubecc_core::sample;

fn report(criterion: &str, started: Instant, limit_secs: f64, pass: bool) {
    let elapsed = started.elapsed().as_secs_f64();
    eprintln!(
        "acceptance {criterion}: {} ({elapsed:.2}s, limit {limit_secs}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed");
    assert!(
        elapsed < limit_secs,
        "{criterion} exceeded the time limit: {elapsed:.2}s >= {limit_secs}s"
    );
}

// -------------------------------------------------------------------------
// 1. Pathology catalog: each minimal fixture shows exactly its pathology.
// -------------------------------------------------------------------------

#[test]
fn criterion_1_pathology_catalog() {
    let started = Instant::now();
    let cases: [(&str, CubeComplex); 4] = [
        ("self_crossing", build::self_crossing()),
        ("one_sided", build::moebius()),
        ("self_osculation", build::self_osculating()),
        ("inter_osculation", build::inter_osculating()),
    ];
    let mut pass = true;
    for (expected, x) in &cases {
        assert!(x.validate().is_ok());
        assert!(x.is_npc().is_ok(), "{expected} fixture must be NPC");
        let r = is_special(x);
        let got = r.pathologies();
        if got != BTreeSet::from([*expected]) || r.special {
            eprintln!("fixture {expected}: got {got:?}");
            pass = false;
        }
    }
    report("criterion 1 (pathology catalog)", started, 1.0, pass);
}

// -------------------------------------------------------------------------
// 2. Oracle equivalence on random square complexes: the dual-class route
//    agrees with the midcube route, and empty-corner emptiness with the
//    link criterion.
// -------------------------------------------------------------------------

/// Pathology verdicts computed from the parallelism classes alone, without
/// the midcube complex. Keyed by least dual edge.
struct ClassVerdicts {
    self_crossing: BTreeSet<CellId>,
    one_sided: BTreeSet<CellId>,
    self_osculating: BTreeSet<CellId>,
    inter_osculating: BTreeSet<(CellId, CellId)>,
}

fn class_route(x: &CubeComplex) -> ClassVerdicts {
    let classes = edge_parallelism_classes(x);
    let key = |i: usize| classes[i].iter().next().unwrap().clone();
    let class_of: BTreeMap<&CellId, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |e| (e, i)))
        .collect();

    // orientation by brute-force assignment over each class
    let mut orientations: Vec<Option<BTreeMap<CellId, i8>>> = Vec::new();
    for c in &classes {
        orientations.push(orient_class(x, c));
    }

    // crossing pairs of classes through squares and 3-cubes
    let mut crossing: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut self_crossing: BTreeSet<CellId> = BTreeSet::new();
    for s in x.squares.values() {
        let a = class_of[&s.sides[0].edge];
        let b = class_of[&s.sides[2].edge];
        if a == b {
            self_crossing.insert(key(a));
        } else {
            crossing.insert((a.min(b), a.max(b)));
        }
    }
    for c in x.cubes3.values() {
        let axes = [
            class_of[&c.edges[0].edge],
            class_of[&c.edges[4].edge],
            class_of[&c.edges[8].edge],
        ];
        for i in 0..3 {
            for j in (i + 1)..3 {
                if axes[i] == axes[j] {
                    self_crossing.insert(key(axes[i]));
                } else {
                    crossing.insert((axes[i].min(axes[j]), axes[i].max(axes[j])));
                }
            }
        }
    }

    let corner_pair = |a: &CellId, b: &CellId| -> bool {
        for s in x.squares.values() {
            for corner in 0..4usize {
                let [sa, sb] = square_corner_sides(corner);
                let (ea, eb) = (&s.sides[sa].edge, &s.sides[sb].edge);
                if (ea == a && eb == b) || (ea == b && eb == a) {
                    return true;
                }
            }
        }
        false
    };

    let mut one_sided = BTreeSet::new();
    let mut self_osculating = BTreeSet::new();
    for (i, c) in classes.iter().enumerate() {
        match &orientations[i] {
            None => {
                one_sided.insert(key(i));
            }
            Some(orient) => {
                let duals: Vec<&CellId> = c.iter().collect();
                'pairs: for p in 0..duals.len() {
                    for q in (p + 1)..duals.len() {
                        let (a, b) = (duals[p], duals[q]);
                        let ea = &x.edges[a].ends;
                        let eb = &x.edges[b].ends;
                        let (ia, ta) = if orient[a] == 1 {
                            (&ea[0], &ea[1])
                        } else {
                            (&ea[1], &ea[0])
                        };
                        let (ib, tb) = if orient[b] == 1 {
                            (&eb[0], &eb[1])
                        } else {
                            (&eb[1], &eb[0])
                        };
                        if (ia == ib || ta == tb) && !corner_pair(a, b) {
                            self_osculating.insert(key(i));
                            break 'pairs;
                        }
                    }
                }
            }
        }
    }

    let mut inter_osculating = BTreeSet::new();
    for &(i, j) in &crossing {
        'out: for a in &classes[i] {
            for b in &classes[j] {
                let ea = &x.edges[a].ends;
                let eb = &x.edges[b].ends;
                let shares = ea.iter().any(|v| eb.contains(v));
                if shares && !corner_pair(a, b) {
                    inter_osculating.insert((key(i), key(j)));
                    break 'out;
                }
            }
        }
    }

    ClassVerdicts { self_crossing, one_sided, self_osculating, inter_osculating }
}

/// Try every sign assignment on small classes, falling back to constraint
/// propagation seeded at each edge for larger ones.
fn orient_class(x: &CubeComplex, class: &BTreeSet<CellId>) -> Option<BTreeMap<CellId, i8>> {
    let duals: Vec<&CellId> = class.iter().collect();
    let idx: BTreeMap<&CellId, usize> = duals.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let mut constraints: Vec<(usize, usize, i8)> = Vec::new();
    for s in x.squares.values() {
        for pair in [[0usize, 1], [2, 3]] {
            let (ra, rb) = (&s.sides[pair[0]], &s.sides[pair[1]]);
            if class.contains(&ra.edge) && class.contains(&rb.edge) {
                constraints.push((idx[&ra.edge], idx[&rb.edge], ra.dir * rb.dir));
            }
        }
    }
    for c in x.cubes3.values() {
        for axis in 0..3usize {
            let slots: Vec<usize> = (0..12)
                .filter(|&k| cubecc_core::complex::cube_edge_slot(k).0 == axis)
                .collect();
            for i in 0..slots.len() {
                for j in (i + 1)..slots.len() {
                    let (ra, rb) = (&c.edges[slots[i]], &c.edges[slots[j]]);
                    if class.contains(&ra.edge) && class.contains(&rb.edge) {
                        constraints.push((idx[&ra.edge], idx[&rb.edge], ra.dir * rb.dir));
                    }
                }
            }
        }
    }
    let n = duals.len();
    if n <= 16 {
        'assign: for bits in 0..(1u32 << n) {
            let sign = |i: usize| if bits & (1 << i) != 0 { -1i8 } else { 1 };
            for &(a, b, rel) in &constraints {
                if sign(a) != sign(b) * rel {
                    continue 'assign;
                }
            }
            let mut out = BTreeMap::new();
            for (i, e) in duals.iter().enumerate() {
                out.insert((*e).clone(), sign(i));
            }
            // normalize: least edge positive
            if out[duals[0]] == -1 {
                for v in out.values_mut() {
                    *v = -*v;
                }
            }
            return Some(out);
        }
        None
    } else {
        // propagation with a union-find over signed components
        let mut assign: Vec<Option<i8>> = vec![None; n];
        for start in 0..n {
            if assign[start].is_some() {
                continue;
            }
            assign[start] = Some(1);
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                let su = assign[u].unwrap();
                for &(a, b, rel) in &constraints {
                    let (v, sv) = if a == u {
                        (b, su * rel)
                    } else if b == u {
                        (a, su * rel)
                    } else {
                        continue;
                    };
                    match assign[v] {
                        None => {
                            assign[v] = Some(sv);
                            stack.push(v);
                        }
                        Some(prev) if prev != sv => return None,
                        _ => {}
                    }
                }
            }
        }
        let mut out = BTreeMap::new();
        for (i, e) in duals.iter().enumerate() {
            out.insert((*e).clone(), assign[i].unwrap());
        }
        Some(out)
    }
}

#[test]
fn criterion_2_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = sample::rng(2026);
    let mut checked = 0;
    while checked < 200 {
        let x = sample::random_square_complex(&mut rng, 12);
        if !x.validate().is_ok() {
            continue;
        }
        checked += 1;

        // route A: midcube components
        let (mc, hps) = hyperplanes(&x);
        let mut a_self_crossing = BTreeSet::new();
        let mut a_one_sided = BTreeSet::new();
        let mut a_self_osc = BTreeSet::new();
        for h in &hps {
            if cubecc_core::hyperplane::self_crossing(&mc, h).is_some() {
                a_self_crossing.insert(h.id.clone());
            }
            if h.orientation.is_none() {
                a_one_sided.insert(h.id.clone());
            }
            if matches!(
                cubecc_core::hyperplane::self_osculation(&x, h),
                SelfOsculation::Yes(_)
            ) {
                a_self_osc.insert(h.id.clone());
            }
        }
        let mut a_inter = BTreeSet::new();
        for i in 0..hps.len() {
            for j in (i + 1)..hps.len() {
                if cubecc_core::hyperplane::inter_osculation(&x, &mc, &hps[i], &hps[j]).is_some() {
                    a_inter.insert((hps[i].id.clone(), hps[j].id.clone()));
                }
            }
        }

        // route B: parallelism classes only
        let b = class_route(&x);
        assert_eq!(a_self_crossing, b.self_crossing, "self-crossing mismatch");
        assert_eq!(a_one_sided, b.one_sided, "one-sidedness mismatch");
        assert_eq!(a_self_osc, b.self_osculating, "self-osculation mismatch");
        assert_eq!(a_inter, b.inter_osculating, "inter-osculation mismatch");

        // empty corners against the link criterion
        let empty = detect_empty_k_corners(&x).is_empty();
        assert_eq!(empty, x.is_npc().is_ok(), "corner/link disagreement");
    }
    report("criterion 2 (oracle equivalence, 200 complexes)", started, 30.0, true);
}

// -------------------------------------------------------------------------
// 3. Tree laws: strict NPC quotients, special on the controlled subset.
// -------------------------------------------------------------------------

#[test]
fn criterion_3_tree_laws() {
    let started = Instant::now();
    let mut rng = sample::rng(33);
    let mut special_subset = 0;
    for _ in 0..100 {
        let gos = sample::random_tree_gos(&mut rng);
        let t = assemble(&gos).expect("tree instance assembles");
        assert!(is_strict(&t).is_ok(), "tree of spaces must be strict");
        let HorizontalQuotient::Strict(sq) = horizontal_quotient(&t).unwrap() else {
            panic!("tree quotient must materialize");
        };
        assert!(sq.complex.is_npc().is_ok(), "tree quotient must be NPC");

        // hyperplane tree-splitting in controlled instances: vertical
        // hyperplanes meet each vertex-space in one connected piece
        let control = is_controlled(&gos);
        let total_special = is_special(&t.complex);
        if control.is_controlled() && total_special.special {
            special_subset += 1;
            let quotient_report = is_special(&sq.complex);
            assert!(
                quotient_report.special,
                "controlled special tree quotient must be special: {:?}",
                quotient_report.pathologies()
            );
            // no remote osculation in controlled special trees
            let remote = cubecc_core::gos::detect_remote_osculation(&t, &sq);
            assert!(remote.is_empty(), "tree instance has remote osculation: {remote:?}");
        }
    }
    assert!(special_subset >= 20, "controlled-special subset too small: {special_subset}");
    eprintln!("  (controlled-special subset size: {special_subset}/100)");
    report("criterion 3 (tree laws, 100 instances)", started, 60.0, true);
}

// -------------------------------------------------------------------------
// 4. Separation suite.
// -------------------------------------------------------------------------

/// Bounded-length identity exclusion: no product of short subgroup elements
/// and connecting words reduces to the empty word.
fn identity_excluded_up_to(p: &CosetProduct, len: usize) -> bool {
    let mut partial: BTreeSet<Word> = BTreeSet::new();
    partial.insert(p.head.reduce());
    for (h, w) in &p.factors {
        let elems = bounded_elements(h, len);
        let mut next = BTreeSet::new();
        for s in &partial {
            for k in &elems {
                let u = s.concat(k).concat(w);
                // anything longer than the remaining cancellation reach
                // cannot contribute to the empty word
                if u.0.len() <= len * (p.factors.len() + 1) {
                    next.insert(u);
                }
            }
        }
        partial = next;
    }
    !partial.contains(&Word::empty())
}

#[test]
fn criterion_4_separation_suite() {
    let started = Instant::now();
    let g = |s: &str| Word::parse(s).unwrap();
    let sub = |rank: usize, gens: &[&str]| {
        let gens: Vec<Word> = gens.iter().map(|x| g(x)).collect();
        StallingsGraph::from_generators(rank, &gens).unwrap()
    };
    let prod = |rank: usize, head: &str, factors: Vec<(StallingsGraph, &str)>| CosetProduct {
        rank,
        head: g(head),
        factors: factors.into_iter().map(|(h, w)| (h, g(w))).collect(),
    };

    let instances: Vec<(&str, CosetProduct, usize)> = vec![
        ("hall <a> vs b", prod(2, "", vec![(sub(2, &["a"]), "b")]), 2),
        ("<a>·b·<a>", prod(2, "", vec![(sub(2, &["a"]), "b"), (sub(2, &["a"]), "")]), 8),
        ("<a>·ba·<b>", prod(2, "", vec![(sub(2, &["a"]), "ba"), (sub(2, &["b"]), "")]), 8),
        ("<aa,b>·a", prod(2, "", vec![(sub(2, &["aa", "b"]), "a")]), 8),
        ("a·<bb>·a", prod(2, "a", vec![(sub(2, &["bb"]), "a")]), 8),
        ("<ab>·a·<ba>", prod(2, "", vec![(sub(2, &["ab"]), "a"), (sub(2, &["ba"]), "")]), 8),
        ("rank3 <a>·c·<b>", prod(3, "", vec![(sub(3, &["a"]), "c"), (sub(3, &["b"]), "")]), 8),
        ("rank3 <ab>·c", prod(3, "", vec![(sub(3, &["ab"]), "c")]), 8),
        (
            "rank3 <a,b>·c·<a,b>",
            prod(3, "", vec![(sub(3, &["a", "b"]), "c"), (sub(3, &["a", "b"]), "")]),
            8,
        ),
        ("<aab>·ab", prod(2, "", vec![(sub(2, &["aab"]), "ab")]), 8),
        ("b·<a>·b", prod(2, "b", vec![(sub(2, &["a"]), "b")]), 8),
    ];

    for (name, p, max_degree) in &instances {
        assert!(
            identity_excluded_up_to(p, 4),
            "instance `{name}` is not identity-free up to the bound"
        );
        let budget = Budget { max_degree: 8, max_seconds: 10.0, seed: 0 };
        let q = find_separating_quotient(p.rank, std::slice::from_ref(p), &budget)
            .unwrap_or_else(|e| panic!("instance `{name}` exhausted: {e:?}"));
        assert!(q.degree <= *max_degree, "instance `{name}` needed degree {}", q.degree);
        assert!(separates(&q, p).unwrap());
        // the separating kernel contains no short product member
        for w in sampled_members(p, 8) {
            assert!(!q.in_kernel(&w).unwrap(), "kernel member {} in `{name}`", w.display());
        }
    }
    report("criterion 4 (separation suite, 11 instances)", started, 10.0, true);
}

fn sampled_members(p: &CosetProduct, len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = vec![p.head.reduce()];
    for (h, w) in &p.factors {
        let elems: Vec<Word> = bounded_elements(h, len.min(4)).into_iter().take(5).collect();
        let mut next = Vec::new();
        for s in out.iter().take(10) {
            for k in &elems {
                next.push(s.concat(k).concat(w));
            }
        }
        out = next;
    }
    out.retain(|w| w.0.len() <= 10 && !w.0.is_empty());
    out.truncate(20);
    out
}

// -------------------------------------------------------------------------
// 5. Double-coset law on random realizations.
// -------------------------------------------------------------------------

#[test]
fn criterion_5_double_coset_law() {
    let started = Instant::now();
    let mut rng = sample::rng(55);
    let mut checked = 0;
    while checked < 50 {
        let (y, maps) = sample::random_graph_realization(&mut rng);
        if maps.is_empty() {
            continue;
        }
        let real = realization(&y, &maps).unwrap();
        let t = assemble(&real).unwrap();
        checked += 1;

        let vertices: Vec<String> = t.complex.vertices.iter().cloned().collect();
        let mut pairs = 0;
        for a in &vertices {
            if pairs > 6 {
                break;
            }
            let hg = cubecc_core::gos::horizontal_graph(&t, a).unwrap();
            assert!(hg.projection_is_immersion());
            for b in hg.vertices.iter() {
                if a == b {
                    continue;
                }
                pairs += 1;
                let ka = cubecc_core::freegrp::horizontal_subgroup(&t, a).unwrap();
                let kb = cubecc_core::freegrp::horizontal_subgroup(&t, b).unwrap();
                let w = cubecc_core::freegrp::connecting_word(&t, a, b).unwrap().unwrap();

                // every enumerated path label lies in the double coset
                for label in path_labels(&hg, a, b, 6) {
                    assert!(
                        double_coset_contains(&ka, &w, &kb, &label),
                        "label {} escapes K·w·K",
                        label.display()
                    );
                }
                // and sampled double-coset elements are realized by paths
                let tracer = cubecc_core::freegrp::horizontal_subgroup(&t, a).unwrap();
                let target = trace_vertex(&t, &hg, a, b);
                for k1 in bounded_elements(&ka, 3).into_iter().take(4) {
                    for k2 in bounded_elements(&kb, 3).into_iter().take(4) {
                        let word = k1.concat(&w).concat(&k2);
                        assert_eq!(
                            tracer.trace(tracer.base, &word),
                            Some(target),
                            "double coset element {} does not trace a path",
                            word.display()
                        );
                    }
                }
            }
        }
    }
    report("criterion 5 (double-coset law, 50 realizations)", started, 30.0, true);
}

/// Non-backtracking walk labels between two 0-cubes, up to a length bound.
fn path_labels(
    hg: &cubecc_core::gos::HorizontalGraph,
    from: &str,
    to: &str,
    max_len: usize,
) -> Vec<Word> {
    let mut out = Vec::new();
    // (vertex, word)
    let mut layer: Vec<(String, Word)> = vec![(from.to_string(), Word::empty())];
    if from == to {
        out.push(Word::empty());
    }
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (v, w) in &layer {
            let last = w.0.last().copied().unwrap_or(0);
            for e in &hg.edges {
                let j: i32 = e.label.strip_prefix('g').unwrap().parse().unwrap();
                if e.from == *v && last != -j {
                    let mut w2 = w.clone();
                    w2.0.push(j);
                    if e.to == to {
                        out.push(w2.clone());
                    }
                    next.push((e.to.clone(), w2));
                }
                if e.to == *v && last != j {
                    let mut w2 = w.clone();
                    w2.0.push(-j);
                    if e.from == to {
                        out.push(w2.clone());
                    }
                    next.push((e.from.clone(), w2));
                }
            }
        }
        layer = next;
        if layer.len() > 4000 {
            break;
        }
    }
    out.truncate(200);
    out
}

/// The Stallings-graph vertex index of `to` inside the component of `from`.
fn trace_vertex(
    _t: &cubecc_core::gos::TotalSpace,
    hg: &cubecc_core::gos::HorizontalGraph,
    _from: &str,
    to: &str,
) -> usize {
    // mirror the vertex indexing used by horizontal_subgroup
    let verts: Vec<&String> = hg.vertices.iter().collect();
    verts.iter().position(|v| *v == to).unwrap()
}

// -------------------------------------------------------------------------
// 6. End-to-end extension on graph instances.
// -------------------------------------------------------------------------

fn phi_from_vertex_map(
    y: &CubeComplex,
    name: &str,
    domain: &[&str],
    vmap: &[(&str, &str)],
    emap: &[(&str, &str, i8)],
) -> PartialLocalIsometry {
    let dom = Subcomplex::from_cells(y, domain.iter().map(|s| s.to_string())).unwrap();
    let mut map = CubicalMap::new(dom.extract(y), y.clone());
    for (a, b) in vmap {
        map.vertex_map.insert(a.to_string(), b.to_string());
    }
    for (e, f, d) in emap {
        map.edge_map.insert(e.to_string(), (f.to_string(), *d));
    }
    map.validate().unwrap();
    PartialLocalIsometry { name: name.into(), domain: dom, map }
}

#[test]
fn criterion_6_end_to_end_npc() {
    let started = Instant::now();

    // the edge instance: R is a 3-cycle with a rotation moving a to b
    let mut y = CubeComplex::default();
    build::edge(&mut y, "e", "a", "b");
    let phi = phi_from_vertex_map(&y, "ab", &["a"], &[("a", "b")], &[]);
    let t0 = Instant::now();
    let out = hrushovski(&y, std::slice::from_ref(&phi), &HrushovskiOptions::default()).unwrap();
    let HrushovskiOutcome::Certificate(cert) = out else { panic!("expected certificate") };
    assert!(t0.elapsed().as_secs_f64() < 60.0);
    assert!(cert.ledger.all_required_pass(), "{:#?}", cert.ledger);
    assert_eq!(cert.complex.dim(), 1);
    // R is the 3-cycle up to isomorphism: 3 vertices, 3 edges, all of
    // degree 2, connected
    assert_eq!(cert.complex.vertices.len(), 3);
    assert_eq!(cert.complex.edges.len(), 3);
    assert!(cert.complex.is_connected());
    for v in &cert.complex.vertices {
        assert_eq!(cert.complex.edge_ends_at(v).len(), 2);
    }
    let a_img = cert.iota.image_of("a").unwrap();
    let b_img = cert.iota.image_of("b").unwrap();
    assert_eq!(cert.autos[0].image_of(&a_img).unwrap(), b_img, "Φ(a) = b");

    // three further graph instances
    let mut instances: Vec<(CubeComplex, Vec<PartialLocalIsometry>)> = Vec::new();
    // 4-cycle, rotate one edge to the next
    let mut c4 = CubeComplex::default();
    for i in 0..4 {
        build::edge(&mut c4, &format!("e{i}"), &format!("v{i}"), &format!("v{}", (i + 1) % 4));
    }
    instances.push((
        c4.clone(),
        vec![phi_from_vertex_map(
            &c4,
            "rot",
            &["e0"],
            &[("v0", "v1"), ("v1", "v2")],
            &[("e0", "e1", 1)],
        )],
    ));
    // path of two edges, shift
    let mut p3 = CubeComplex::default();
    build::edge(&mut p3, "e0", "v0", "v1");
    build::edge(&mut p3, "e1", "v1", "v2");
    instances.push((
        p3.clone(),
        vec![phi_from_vertex_map(
            &p3,
            "shift",
            &["e0"],
            &[("v0", "v1"), ("v1", "v2")],
            &[("e0", "e1", 1)],
        )],
    ));
    // figure-8: map one loop to the other, plus the identity on a vertex
    let mut f8 = CubeComplex::default();
    build::edge(&mut f8, "a", "x", "x");
    build::edge(&mut f8, "b", "x", "x");
    instances.push((
        f8.clone(),
        vec![
            phi_from_vertex_map(&f8, "ab", &["a"], &[("x", "x")], &[("a", "b", 1)]),
            phi_from_vertex_map(&f8, "ba", &["b"], &[("x", "x")], &[("b", "a", 1)]),
        ],
    ));

    for (i, (y, maps)) in instances.iter().enumerate() {
        let t0 = Instant::now();
        let out = hrushovski(y, maps, &HrushovskiOptions::default()).unwrap();
        let HrushovskiOutcome::Certificate(cert) = out else {
            panic!("instance {i} exhausted")
        };
        assert!(t0.elapsed().as_secs_f64() < 60.0, "instance {i} too slow");
        assert!(cert.ledger.all_required_pass(), "instance {i}: {:#?}", cert.ledger);
        assert_eq!(cert.complex.dim(), y.dim());
        // extension equalities on every domain cell
        for (j, phi) in maps.iter().enumerate() {
            for c in phi.map.domain.all_cells() {
                let lhs = cert.autos[j].image_of(&cert.iota.image_of(c).unwrap()).unwrap();
                let rhs = cert.iota.image_of(&phi.map.image_of(c).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "instance {i}, map {j}, cell {c}");
            }
        }
    }
    report("criterion 6 (end-to-end, 4 graph instances)", started, 240.0, true);
}

// -------------------------------------------------------------------------
// 7. End-to-end special extension in dimension 2.
// -------------------------------------------------------------------------

#[test]
fn criterion_7_end_to_end_special() {
    let started = Instant::now();
    let y = build::lone_square("");
    let phi = phi_from_vertex_map(
        &y,
        "shift",
        &["l"],
        &[("v0", "v1"), ("v2", "v3")],
        &[("l", "r", 1)],
    );
    let opts = HrushovskiOptions { target: Target::Special, ..Default::default() };
    let out = hrushovski(&y, std::slice::from_ref(&phi), &opts).unwrap();
    let HrushovskiOutcome::Certificate(cert) = out else { panic!("expected certificate") };
    assert!(cert.ledger.all_required_pass(), "{:#?}", cert.ledger);
    assert!(cert.ledger.get("quotient_special").unwrap().pass);
    assert!(cert.ledger.get("quotient_two_sided").unwrap().pass);
    assert!(cert.ledger.get("embedding_locally_convex").unwrap().pass);
    assert_eq!(cert.complex.dim(), 2);
    // independent re-checks from the certificate data alone
    assert!(is_special(&cert.complex).special);
    assert!(is_locally_convex(&cert.complex, &cert.iota.image()).is_ok());
    for c in phi.map.domain.all_cells() {
        let lhs = cert.autos[0].image_of(&cert.iota.image_of(c).unwrap()).unwrap();
        let rhs = cert.iota.image_of(&phi.map.image_of(c).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
    report("criterion 7 (end-to-end special, 2-dimensional)", started, 300.0, true);
}

// -------------------------------------------------------------------------
// 8. Descent exactness on every accepted cover.
// -------------------------------------------------------------------------

#[test]
fn criterion_8_descent_exactness() {
    let started = Instant::now();

    let mut accepted: Vec<(CubeComplex, Vec<PartialLocalIsometry>, Target)> = Vec::new();
    let mut y = CubeComplex::default();
    build::edge(&mut y, "e", "a", "b");
    accepted.push((
        y.clone(),
        vec![phi_from_vertex_map(&y, "ab", &["a"], &[("a", "b")], &[])],
        Target::Npc,
    ));
    let mut f8 = CubeComplex::default();
    build::edge(&mut f8, "a", "x", "x");
    build::edge(&mut f8, "b", "x", "x");
    accepted.push((
        f8.clone(),
        vec![phi_from_vertex_map(&f8, "ab", &["a"], &[("x", "x")], &[("a", "b", 1)])],
        Target::Npc,
    ));
    let sqc = build::lone_square("");
    accepted.push((
        sqc.clone(),
        vec![phi_from_vertex_map(
            &sqc,
            "shift",
            &["l"],
            &[("v0", "v1"), ("v2", "v3")],
            &[("l", "r", 1)],
        )],
        Target::Special,
    ));

    for (y, maps, target) in &accepted {
        let opts = HrushovskiOptions { target: *target, ..Default::default() };
        let out = hrushovski(y, maps, &opts).unwrap();
        let HrushovskiOutcome::Certificate(cert) = out else { panic!("exhausted") };
        let cover = cert.cover.as_ref().expect("nontrivial runs keep the cover");
        let HorizontalQuotient::Strict(sq) = horizontal_quotient(&cover.total).unwrap() else {
            panic!("accepted cover must be strict");
        };
        for j in 1..=maps.len() {
            let up = induced_automorphism(cover, j).unwrap();
            let down = descend(&cover.total, &sq, &up).unwrap();
            // exact combinatorial equality, cell for cell
            for cell in cover.total.complex.all_cells() {
                let lhs = &sq.q[&up.image_of(cell).unwrap()];
                let rhs = down.image_of(&sq.q[cell]).unwrap();
                assert_eq!(*lhs, rhs, "descent square fails at {cell}");
            }
        }
    }
    report("criterion 8 (descent exactness, all accepted covers)", started, 120.0, true);
}
