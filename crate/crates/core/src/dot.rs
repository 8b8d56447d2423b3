//! DOT emission for 1-skeletons, links, carriers with highlighted dual
//! edges, underlying graphs, and horizontal graphs.

use std::fmt::Write;

use crate::complex::{CubeComplex, LinkComplex};
use crate::gos::{HorizontalGraph, UGraph};
use crate::hyperplane::Hyperplane;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// The 1-skeleton as a directed graph (edge orientation is intrinsic).
pub fn skeleton(x: &CubeComplex, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    for v in &x.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (id, e) in &x.edges {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&e.ends[0]),
            quote(&e.ends[1]),
            quote(id)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// A link as an undirected graph; triangles are emitted as comments.
pub fn link(l: &LinkComplex, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "graph {} {{", quote(name)).unwrap();
    let vname = |c: &crate::complex::LinkCellRef| format!("{}#{}", c.owner, c.slot);
    for v in &l.vertices {
        writeln!(out, "  {};", quote(&vname(v))).unwrap();
    }
    for e in &l.edges {
        writeln!(
            out,
            "  {} -- {} [label={}];",
            quote(&vname(&e.ends[0])),
            quote(&vname(&e.ends[1])),
            quote(&vname(&e.cell))
        )
        .unwrap();
    }
    for t in &l.triangles {
        writeln!(out, "  // 2-simplex {}", vname(&t.cell)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// The carrier's 1-skeleton with the dual edges of the hyperplane in bold.
pub fn carrier(x: &CubeComplex, h: &Hyperplane, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    let sub = h.carrier.extract(x);
    for v in &sub.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (id, e) in &sub.edges {
        let style = if h.dual_edges.contains(id) {
            " style=bold color=red"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} -> {} [label={}{}];",
            quote(&e.ends[0]),
            quote(&e.ends[1]),
            quote(id),
            style
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn ugraph(g: &UGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    for v in &g.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (id, (a, b)) in &g.edges {
        writeln!(out, "  {} -> {} [label={}];", quote(a), quote(b), quote(id)).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn horizontal(h: &HorizontalGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    for v in &h.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for e in &h.edges {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&e.from),
            quote(&e.to),
            quote(&e.label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
