//! Regenerates the fixture files under `fixtures/`.
//!
//! Run with `cargo run -p cubecc-cli --example gen_fixtures`.

use std::fs;
use std::path::Path;

use cubecc_core::complex::{build, CubeComplex, Subcomplex};
use cubecc_core::json as schema;
use cubecc_core::map::{CubicalMap, PartialLocalIsometry};

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    println!("wrote {}", path.display());
}

fn write_complex(dir: &Path, name: &str, x: &CubeComplex) {
    assert!(x.validate().is_ok(), "{name} must validate");
    write_json(dir, name, &schema::complex_to_json(x));
}

fn ustrip() -> CubeComplex {
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

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).unwrap();

    write_complex(&dir, "square.json", &build::lone_square(""));
    write_complex(&dir, "torus.json", &build::torus());
    write_complex(&dir, "moebius.json", &build::moebius());
    write_complex(&dir, "selfcross.json", &build::self_crossing());
    write_complex(&dir, "selfosc.json", &build::self_osculating());
    write_complex(&dir, "interosc.json", &build::inter_osculating());
    write_complex(&dir, "strip2.json", &build::strip(2));
    write_complex(&dir, "ustrip.json", &ustrip());
    write_complex(&dir, "cube3.json", &build::solid_cube());
    write_complex(&dir, "tricorner_open.json", &build::squares_around_vertex(3, false));
    write_complex(&dir, "tricorner_filled.json", &build::squares_around_vertex(3, true));

    // the edge instance: Y = one edge, the map carrying a to b
    let mut y = CubeComplex::default();
    build::edge(&mut y, "e", "a", "b");
    let dom = Subcomplex::from_cells(&y, ["a".to_string()]).unwrap();
    let mut map = CubicalMap::new(dom.extract(&y), y.clone());
    map.vertex_map.insert("a".into(), "b".into());
    let phi = PartialLocalIsometry { name: "ab".into(), domain: dom, map };
    write_json(&dir, "edge_ab.instance.json", &schema::instance_to_json(&y, &[phi]).unwrap());

    // controlled special square instance: shift the left side to the right
    let sq = build::lone_square("");
    let dom = Subcomplex::from_cells(&sq, ["l".to_string()]).unwrap();
    let mut map = CubicalMap::new(dom.extract(&sq), sq.clone());
    map.vertex_map.insert("v0".into(), "v1".into());
    map.vertex_map.insert("v2".into(), "v3".into());
    map.edge_map.insert("l".into(), ("r".into(), 1));
    map.validate().unwrap();
    let phi = PartialLocalIsometry { name: "shift".into(), domain: dom, map };
    write_json(&dir, "square_shift.instance.json", &schema::instance_to_json(&sq, &[phi]).unwrap());

    // 4-cycle rotation instance
    let mut c4 = CubeComplex::default();
    for i in 0..4 {
        build::edge(&mut c4, &format!("e{i}"), &format!("v{i}"), &format!("v{}", (i + 1) % 4));
    }
    let dom = Subcomplex::from_cells(&c4, ["e0".to_string()]).unwrap();
    let mut map = CubicalMap::new(dom.extract(&c4), c4.clone());
    map.vertex_map.insert("v0".into(), "v1".into());
    map.vertex_map.insert("v1".into(), "v2".into());
    map.edge_map.insert("e0".into(), ("e1".into(), 1));
    map.validate().unwrap();
    let phi = PartialLocalIsometry { name: "rot".into(), domain: dom, map };
    write_json(&dir, "cycle4_rotate.instance.json", &schema::instance_to_json(&c4, &[phi]).unwrap());

    // separation inputs: the Hall instance alone, then a two-product file
    write_json(
        &dir,
        "hall.products.json",
        &serde_json::json!([{"rank": 2, "product": ["", ["a"], "b"]}]),
    );
    write_json(
        &dir,
        "pair.products.json",
        &serde_json::json!([
            {"rank": 2, "product": ["", ["a"], "b"]},
            {"rank": 2, "product": ["", ["a"], "ba", ["b"], ""]}
        ]),
    );
}
