//! Builds a small label tree and walks through the queries the rest of the
//! library relies on.
//!
//!     cargo run --example taxonomy_queries

use hierembed::taxonomy::{Taxonomy, TreeSpec};

fn main() -> hierembed::Result<()> {
    let t = Taxonomy::from_json_str(
        r#"{"name": "instruments", "children": [
            {"name": "strings", "children": [{"name": "violin"}, {"name": "cello"}]},
            {"name": "winds", "children": [
                {"name": "brass", "children": [{"name": "trumpet"}, {"name": "horn"}]},
                {"name": "flute"}
            ]}
        ]}"#,
    )?;

    let id = |n: &str| t.id_of(n).unwrap();
    let (height, diameter) = t.height_and_diameter();
    println!(
        "{} nodes, {} leaves, height {height}, diameter {diameter}",
        t.len(),
        t.leaves().len()
    );

    let lca = t.lca(id("trumpet"), id("flute"))?;
    println!("lca(trumpet, flute) = {}", t.name(lca));
    println!(
        "distance trumpet -> winds = {}",
        t.node_distance(id("trumpet"), id("winds"))?
    );

    // flute is shallower than the deepest level, so it stands in for itself there
    for level in t.levels_with_multiple_classes() {
        let names: Vec<&str> = level.classes.iter().map(|&c| t.name(c)).collect();
        println!("level {}: {names:?}", level.depth);
    }
    for leaf in ["cello", "flute"] {
        let targets: Vec<&str> = t
            .levels_with_multiple_classes()
            .iter()
            .map(|l| t.name(t.target_at_level(id(leaf), l.depth).unwrap()))
            .collect();
        println!("{leaf} targets per level: {targets:?}");
    }

    let spec = TreeSpec::node("root", vec![TreeSpec::leaf("x"), TreeSpec::leaf("y")]);
    let flat = Taxonomy::from_spec(&spec)?;
    println!("flat tree json: {}", flat.to_json_string());
    Ok(())
}
