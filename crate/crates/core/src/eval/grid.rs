use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::EvalContext;
use super::report::{align, EvalReport, Metric};
use super::EvalError;
use crate::gtr::{Feature, GtrParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGridPoint {
    pub w_s: f64,
    pub w_c: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub step: f64,
    pub objective: String,
    pub points: Vec<WeightGridPoint>,
    pub best: usize,
}

impl GridSearch {
    pub fn best_point(&self) -> &WeightGridPoint {
        &self.points[self.best]
    }

    pub fn render_table(&self) -> String {
        let mut rows = vec![vec![
            "w_s".to_string(),
            "w_c".into(),
            "Recall@10".into(),
            "nDCG@10".into(),
            "MRR@10".into(),
            String::new(),
        ]];
        for (i, p) in self.points.iter().enumerate() {
            rows.push(vec![
                format!("{:.1}", p.w_s),
                format!("{:.1}", p.w_c),
                format!("{:.1}", p.report.value(Metric::Recall, 10)),
                format!("{:.1}", p.report.value(Metric::Ndcg, 10)),
                format!("{:.1}", p.report.value(Metric::Mrr, 10)),
                if i == self.best {
                    "*".into()
                } else {
                    String::new()
                },
            ]);
        }
        align(&rows)
    }
}

/// `(w_s, w_c)` pairs summing to one in increments of `step`, w_s ascending.
pub fn weight_grid(step: f64) -> Result<Vec<(f64, f64)>, EvalError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(EvalError::InvalidStep(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(EvalError::InvalidStep(step));
    }
    let n = n as u32;
    Ok((0..=n)
        .map(|i| (f64::from(i) / f64::from(n), f64::from(n - i) / f64::from(n)))
        .collect())
}

/// Parameters for one grid point. A zero weight removes its feature.
pub fn params_for_weights(template: &GtrParams, w_s: f64, w_c: f64) -> GtrParams {
    let mut params = template.clone();
    params.w_s = w_s;
    params.w_c = w_c;
    if w_s == 0.0 {
        params.enabled_features.remove(&Feature::Semantic);
    }
    if w_c == 0.0 {
        params.enabled_features.remove(&Feature::Category);
    }
    params
}

/// Evaluates GT-R at every grid point. The argmax is by nDCG@10; ties go to
/// the larger `w_s`.
pub fn grid_search_weights(
    ctx: &EvalContext<'_>,
    template: &GtrParams,
    step: f64,
) -> Result<GridSearch, EvalError> {
    let points = weight_grid(step)?
        .into_par_iter()
        .map(|(w_s, w_c)| {
            let report = ctx.evaluate_gtr(&params_for_weights(template, w_s, w_c))?;
            Ok(WeightGridPoint { w_s, w_c, report })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.report.value(Metric::Ndcg, 10) >= points[best].report.value(Metric::Ndcg, 10) {
            best = i;
        }
    }
    Ok(GridSearch {
        step,
        objective: "nDCG@10".into(),
        points,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = weight_grid(0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert!(g.iter().all(|(s, c)| (s + c - 1.0).abs() < 1e-12));
        assert_eq!(g[1], (0.1, 0.9));
        assert_eq!(
            weight_grid(0.5).unwrap(),
            [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]
        );
        assert_eq!(weight_grid(1.0).unwrap().len(), 2);
        for bad in [0.0, -0.1, 0.3, 1.5, f64::NAN] {
            assert!(weight_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_weight_disables() {
        let t = GtrParams::default();
        let p = params_for_weights(&t, 0.0, 1.0);
        assert!(!p.is_enabled(Feature::Semantic));
        assert!(p.validate().is_ok());
        let p = params_for_weights(&t, 1.0, 0.0);
        assert!(!p.is_enabled(Feature::Category));
        assert!(p.validate().is_ok());
    }
}
