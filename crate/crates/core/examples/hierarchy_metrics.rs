//! Retrieval and hierarchy metrics on a toy ranking.
//!
//!     cargo run --example hierarchy_metrics

use hierembed::metrics::{mnr, ndcg, rank_by_cosine, relevance, rp_at_k, RankedList, RelevanceKind};
use hierembed::taxonomy::{Taxonomy, TreeSpec};

fn main() -> hierembed::Result<()> {
    let t = Taxonomy::from_spec(&TreeSpec::node(
        "root",
        vec![
            TreeSpec::node("A", vec![TreeSpec::leaf("a1"), TreeSpec::leaf("a2")]),
            TreeSpec::node("B", vec![TreeSpec::leaf("b1")]),
        ],
    ))?;
    let id = |n: &str| t.id_of(n).unwrap();
    println!(
        "rel_sum(a1, a2) = {}",
        relevance(&t, id("a1"), id("a2"), RelevanceKind::Sum)?
    );
    println!(
        "rel_max(a1, b1) = {}",
        relevance(&t, id("a1"), id("b1"), RelevanceKind::Max)?
    );

    // one query at a1 with candidates a1, a2, b1, b1
    let leaves = [id("a1"), id("a1"), id("a2"), id("b1"), id("b1")];
    let forward = RankedList {
        query: 0,
        candidates: vec![1, 2, 3, 4],
    };
    let reversed = RankedList {
        query: 0,
        candidates: vec![4, 3, 2, 1],
    };
    println!(
        "MNR forward {}  reversed {}",
        mnr(&[forward], &leaves, &t)?.value,
        mnr(&[reversed], &leaves, &t)?.value
    );

    let emb = vec![
        vec![1.0, 0.0],
        vec![0.9, 0.1],
        vec![0.7, 0.6],
        vec![-0.2, 1.0],
        vec![0.0, 1.0],
        vec![0.95, 0.05],
    ];
    let leaves = [id("a1"), id("a1"), id("a2"), id("b1"), id("b1"), id("a1")];
    let lists = rank_by_cosine(&emb)?;
    println!("RP@5 {:.3}", rp_at_k(&lists, &leaves, 5)?);
    println!("MNR {:.3}", mnr(&lists, &leaves, &t)?.value);
    println!(
        "NDCG sum {:.4}  max {:.4}",
        ndcg(&lists, &leaves, &t, RelevanceKind::Sum)?.value,
        ndcg(&lists, &leaves, &t, RelevanceKind::Max)?.value
    );
    Ok(())
}
