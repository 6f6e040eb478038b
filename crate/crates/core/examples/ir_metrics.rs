//! Recall, nDCG, hit rate and MRR on a hand-made run.

use std::collections::{BTreeMap, BTreeSet};

use geotime_rerank::eval::{evaluate_run, render_table, Judgments, Runs};

fn ids(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let judgments = Judgments::from_map(BTreeMap::from([
        ("q1".to_string(), BTreeSet::from_iter(ids(&["a", "c"]))),
        ("q2".to_string(), BTreeSet::from_iter(ids(&["x"]))),
        // No relevant events: skipped and counted.
        ("q3".to_string(), BTreeSet::new()),
    ]));

    let good: Runs = BTreeMap::from([
        ("q1".to_string(), ids(&["a", "b", "c", "d"])),
        ("q2".to_string(), ids(&["x", "y"])),
    ]);
    let poor: Runs = BTreeMap::from([
        ("q1".to_string(), ids(&["d", "b", "a", "c"])),
        ("q2".to_string(), ids(&["y", "z", "w", "x"])),
    ]);

    let cutoffs = [1, 3, 10];
    let good = evaluate_run(&good, &judgments, &cutoffs)?;
    let poor = evaluate_run(&poor, &judgments, &cutoffs)?;
    print!(
        "{}",
        render_table(&[("good".into(), &good), ("poor".into(), &poor)])
    );
    println!(
        "evaluated {}, skipped {}",
        good.evaluated_queries, good.skipped_queries
    );
    Ok(())
}
