use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{hit_at_k, ndcg_at_k, recall_at_k, reciprocal_rank_at_k, Runs};
use super::{EvalError, Judgments};

pub const DEFAULT_CUTOFFS: [usize; 4] = [1, 3, 10, 100];

/// Aggregate metrics at one cutoff, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub k: usize,
    pub recall: f64,
    pub hit_rate: f64,
    pub ndcg: f64,
    pub mrr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Recall,
    HitRate,
    Ndcg,
    Mrr,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Recall, Metric::HitRate, Metric::Ndcg, Metric::Mrr];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Recall => "Recall",
            Metric::HitRate => "HitRate",
            Metric::Ndcg => "nDCG",
            Metric::Mrr => "MRR",
        }
    }
}

impl MetricValues {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Recall => self.recall,
            Metric::HitRate => self.hit_rate,
            Metric::Ndcg => self.ndcg,
            Metric::Mrr => self.mrr,
        }
    }
}

/// Per-query values at one cutoff, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryValues {
    pub k: usize,
    pub recall: f64,
    pub hit: f64,
    pub ndcg: f64,
    pub reciprocal_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryBreakdown {
    pub query_id: String,
    pub relevant: usize,
    pub values: Vec<QueryValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cutoffs: Vec<usize>,
    pub metrics: Vec<MetricValues>,
    pub evaluated_queries: usize,
    pub skipped_queries: usize,
    pub per_query: Vec<QueryBreakdown>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub manifest: serde_json::Value,
}

impl EvalReport {
    pub fn at(&self, k: usize) -> Option<&MetricValues> {
        self.metrics.iter().find(|m| m.k == k)
    }

    /// Shorthand for a metric at a cutoff; NaN if the cutoff was not evaluated.
    pub fn value(&self, metric: Metric, k: usize) -> f64 {
        self.at(k).map_or(f64::NAN, |m| m.get(metric))
    }

    pub fn with_manifest(mut self, manifest: serde_json::Value) -> Self {
        self.manifest = manifest;
        self
    }
}

/// Scores every judged query with a non-empty relevant set. Queries missing
/// from `runs` count as empty rankings. Aggregation runs in sorted query order.
pub fn evaluate_run(
    runs: &Runs,
    judgments: &Judgments,
    cutoffs: &[usize],
) -> Result<EvalReport, EvalError> {
    let mut cutoffs = cutoffs.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let empty = Vec::new();
    let mut per_query = Vec::new();
    for (query_id, relevant) in judgments.iter() {
        if relevant.is_empty() {
            continue;
        }
        let ranked = runs.get(query_id).unwrap_or(&empty);
        let values = cutoffs
            .iter()
            .map(|&k| {
                Ok(QueryValues {
                    k,
                    recall: 100.0 * recall_at_k(ranked, relevant, k)?,
                    hit: if hit_at_k(ranked, relevant, k) {
                        100.0
                    } else {
                        0.0
                    },
                    ndcg: 100.0 * ndcg_at_k(ranked, relevant, k)?,
                    reciprocal_rank: 100.0 * reciprocal_rank_at_k(ranked, relevant, k),
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        per_query.push(QueryBreakdown {
            query_id: query_id.clone(),
            relevant: relevant.len(),
            values,
        });
    }
    if per_query.is_empty() {
        return Err(EvalError::NoEvaluableQueries);
    }
    let skipped = judgments.skipped_count();
    if skipped > 0 {
        log::warn!("{skipped} queries have no relevant events and were skipped");
    }
    let n = per_query.len() as f64;
    let metrics = cutoffs
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mean = |f: fn(&QueryValues) -> f64| {
                per_query.iter().map(|q| f(&q.values[i])).sum::<f64>() / n
            };
            MetricValues {
                k,
                recall: mean(|v| v.recall),
                hit_rate: mean(|v| v.hit),
                ndcg: mean(|v| v.ndcg),
                mrr: mean(|v| v.reciprocal_rank),
            }
        })
        .collect();
    Ok(EvalReport {
        cutoffs,
        metrics,
        evaluated_queries: per_query.len(),
        skipped_queries: skipped,
        per_query,
        manifest: serde_json::Value::Null,
    })
}

/// Aligned text table, one row per labeled report, grouped by metric then
/// cutoff. Values print with one decimal.
pub fn render_table(rows: &[(String, &EvalReport)]) -> String {
    let cutoffs: Vec<usize> = rows
        .first()
        .map(|(_, r)| r.cutoffs.clone())
        .unwrap_or_default();
    let mut header = vec!["Run".to_string()];
    for metric in Metric::ALL {
        for k in &cutoffs {
            header.push(format!("{}@{k}", metric.label()));
        }
    }
    let mut body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, report)| {
            let mut cells = vec![label.clone()];
            for metric in Metric::ALL {
                for &k in &cutoffs {
                    cells.push(format!("{:.1}", report.value(metric, k)));
                }
            }
            cells
        })
        .collect();
    body.insert(0, header);
    align(&body)
}

/// Left-aligns the first column and right-aligns the rest.
pub(crate) fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Per-metric differences `baseline - other` at each shared cutoff.
pub fn metric_deltas(baseline: &EvalReport, other: &EvalReport) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for m in &baseline.metrics {
        if let Some(o) = other.at(m.k) {
            for metric in Metric::ALL {
                out.insert(
                    format!("{}@{}", metric.label(), m.k),
                    m.get(metric) - o.get(metric),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn judgments(pairs: &[(&str, &[&str])]) -> Judgments {
        Judgments::from_map(
            pairs
                .iter()
                .map(|(q, r)| {
                    (
                        q.to_string(),
                        r.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
                    )
                })
                .collect(),
        )
    }

    fn runs(pairs: &[(&str, &[&str])]) -> Runs {
        pairs
            .iter()
            .map(|(q, r)| (q.to_string(), r.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    #[test]
    fn perfect_and_empty_runs() {
        let j = judgments(&[("q1", &["a", "b"]), ("q2", &["c"]), ("q3", &[])]);
        let perfect = evaluate_run(
            &runs(&[("q1", &["a", "b"]), ("q2", &["c"])]),
            &j,
            &[3, 1, 10],
        )
        .unwrap();
        assert_eq!(perfect.cutoffs, [1, 3, 10]);
        assert_eq!(perfect.evaluated_queries, 2);
        assert_eq!(perfect.skipped_queries, 1);
        for m in &perfect.metrics {
            if m.k >= 2 {
                assert_eq!(
                    (m.recall, m.hit_rate, m.ndcg, m.mrr),
                    (100.0, 100.0, 100.0, 100.0)
                );
            }
        }
        let miss = evaluate_run(
            &runs(&[("q1", &["x"]), ("q2", &["y"])]),
            &j,
            &DEFAULT_CUTOFFS,
        )
        .unwrap();
        assert!(miss
            .metrics
            .iter()
            .all(|m| m.recall == 0.0 && m.hit_rate == 0.0 && m.ndcg == 0.0 && m.mrr == 0.0));
    }

    #[test]
    fn no_evaluable_queries() {
        let j = judgments(&[("q", &[])]);
        assert!(matches!(
            evaluate_run(&Runs::new(), &j, &[1]),
            Err(EvalError::NoEvaluableQueries)
        ));
    }

    #[test]
    fn table_shape() {
        let j = judgments(&[("q", &["a"])]);
        let r = evaluate_run(&runs(&[("q", &["b", "a"])]), &j, &[1, 3]).unwrap();
        let table = render_table(&[("dense".into(), &r), ("gt-r".into(), &r)]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("Run "));
        assert!(lines[0].contains("nDCG@3"));
        assert!(lines[1].contains("63.1"));
        assert_eq!(lines[1].len(), lines[2].len());
        let deltas = metric_deltas(&r, &r);
        assert_eq!(deltas.len(), 8);
        assert!(deltas.values().all(|d| *d == 0.0));
    }

    proptest::proptest! {
        #[test]
        fn invariant_to_query_order(
            rows in proptest::collection::vec(
                (proptest::collection::vec(0u8..12, 0..10), proptest::collection::btree_set(0u8..12, 1..4)),
                1..10,
            ),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let named: Vec<(String, Vec<String>, BTreeSet<String>)> = rows
                .iter()
                .enumerate()
                .map(|(i, (r, rel))| {
                    (format!("q{i}"), r.iter().map(|x| format!("e{x}")).collect(), rel.iter().map(|x| format!("e{x}")).collect())
                })
                .collect();
            let build = |order: &[usize]| {
                let mut runs = Runs::new();
                let mut map = BTreeMap::new();
                for &i in order {
                    runs.insert(named[i].0.clone(), named[i].1.clone());
                    map.insert(named[i].0.clone(), named[i].2.clone());
                }
                evaluate_run(&runs, &Judgments::from_map(map), &DEFAULT_CUTOFFS).unwrap()
            };
            let forward: Vec<usize> = (0..named.len()).collect();
            let mut shuffled = forward.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            proptest::prop_assert_eq!(build(&forward), build(&shuffled));
        }
    }
}
