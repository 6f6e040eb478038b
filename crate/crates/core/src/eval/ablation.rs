use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::EvalContext;
use super::report::{metric_deltas, render_table, EvalReport};
use super::EvalError;
use crate::gtr::{Feature, GtrParams};

/// Removal order of the ablation table, after the `none` baseline.
pub const ABLATION_ORDER: [Feature; 5] = [
    Feature::Latitude,
    Feature::Temporal,
    Feature::Distance,
    Feature::Category,
    Feature::Semantic,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// `none` for the baseline, else the removed feature.
    pub removed: String,
    pub report: EvalReport,
    /// `baseline - row` per metric label such as `nDCG@10`.
    pub deltas: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub rows: Vec<AblationRow>,
}

impl Ablation {
    pub fn row(&self, removed: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.removed == removed)
    }

    pub fn render_table(&self) -> String {
        render_table(
            &self
                .rows
                .iter()
                .map(|r| (r.removed.clone(), &r.report))
                .collect::<Vec<_>>(),
        )
    }
}

/// Baseline with every feature, then one run per single-feature removal.
/// Stage-1 candidates are shared, so only the fusion changes.
pub fn ablation(ctx: &EvalContext<'_>, params: &GtrParams) -> Result<Ablation, EvalError> {
    if let Some(missing) = Feature::ALL.iter().find(|f| !params.is_enabled(**f)) {
        return Err(EvalError::Ablation(format!(
            "baseline must enable every feature; `{}` is off",
            missing.name()
        )));
    }
    let configs: Vec<(String, GtrParams)> = std::iter::once(("none".to_string(), params.clone()))
        .chain(
            ABLATION_ORDER
                .iter()
                .map(|f| (f.name().to_string(), params.clone().without(*f))),
        )
        .collect();
    let reports = configs
        .into_par_iter()
        .map(|(label, p)| Ok((label, ctx.evaluate_gtr(&p)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    let baseline = reports[0].1.clone();
    let rows = reports
        .into_iter()
        .map(|(removed, report)| AblationRow {
            deltas: metric_deltas(&baseline, &report),
            removed,
            report,
        })
        .collect();
    Ok(Ablation { rows })
}
