use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GtrError;

/// The five re-ranking signals, in fusion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Semantic,
    Category,
    Distance,
    Latitude,
    Temporal,
}

impl Feature {
    pub const ALL: [Feature; 5] = [
        Feature::Semantic,
        Feature::Category,
        Feature::Distance,
        Feature::Latitude,
        Feature::Temporal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Semantic => "semantic",
            Feature::Category => "category",
            Feature::Distance => "distance",
            Feature::Latitude => "latitude",
            Feature::Temporal => "temporal",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = GtrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| GtrError::InvalidParams(format!("unknown feature `{s}`")))
    }
}

/// How the latitude feature's base ranking is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatitudeMode {
    /// Start from the raw semantic permutation, then boost far events inside
    /// the latitude band.
    #[default]
    SemanticSeed,
    /// Start from the ascending rank of |Δlatitude| instead.
    DiffSort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GtrParams {
    pub n_retrieve: usize,
    pub n_rerank: usize,
    /// Distance threshold in km.
    pub tau_d: f64,
    pub beta_d: f64,
    /// Latitude threshold in degrees.
    pub tau_phi: f64,
    pub beta_phi: f64,
    /// Semantic weight; adjusted rank is raw / w_s.
    pub w_s: f64,
    /// Category weight; adjusted rank is raw / w_c.
    pub w_c: f64,
    pub rrf_k: f64,
    pub earth_radius_km: f64,
    pub enabled_features: BTreeSet<Feature>,
    pub latitude_mode: LatitudeMode,
}

impl Default for GtrParams {
    fn default() -> Self {
        Self {
            n_retrieve: 100,
            n_rerank: 10,
            tau_d: 500.0,
            beta_d: 2.0,
            tau_phi: 5.0,
            beta_phi: 2.0,
            w_s: 0.1,
            w_c: 0.9,
            rrf_k: 60.0,
            earth_radius_km: 6371.0,
            enabled_features: Feature::ALL.into_iter().collect(),
            latitude_mode: LatitudeMode::SemanticSeed,
        }
    }
}

impl GtrParams {
    pub fn is_enabled(&self, feature: Feature) -> bool {
        self.enabled_features.contains(&feature)
    }

    pub fn with_features(mut self, features: impl IntoIterator<Item = Feature>) -> Self {
        self.enabled_features = features.into_iter().collect();
        self
    }

    pub fn without(mut self, feature: Feature) -> Self {
        self.enabled_features.remove(&feature);
        self
    }

    /// Weights only need to be positive for features that are enabled.
    pub fn validate(&self) -> Result<(), GtrError> {
        let fail = |msg: String| Err(GtrError::InvalidParams(msg));
        if self.enabled_features.is_empty() {
            return fail("at least one feature must be enabled".into());
        }
        if self.n_rerank > self.n_retrieve {
            return fail(format!(
                "n_rerank {} exceeds n_retrieve {}",
                self.n_rerank, self.n_retrieve
            ));
        }
        for (name, v) in [
            ("beta_d", self.beta_d),
            ("beta_phi", self.beta_phi),
            ("rrf_k", self.rrf_k),
            ("earth_radius_km", self.earth_radius_km),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("tau_d", self.tau_d), ("tau_phi", self.tau_phi)] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be non-negative, got {v}"));
            }
        }
        for (feature, name, w) in [
            (Feature::Semantic, "w_s", self.w_s),
            (Feature::Category, "w_c", self.w_c),
        ] {
            if self.is_enabled(feature) && !(w.is_finite() && w > 0.0) {
                return fail(format!(
                    "{name} must be positive while {feature} is enabled, got {w}"
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let p = GtrParams::default();
        p.validate().unwrap();
        assert_eq!((p.n_retrieve, p.n_rerank), (100, 10));
        assert_eq!(
            (p.tau_d, p.beta_d, p.tau_phi, p.beta_phi),
            (500.0, 2.0, 5.0, 2.0)
        );
        assert_eq!(
            (p.w_s, p.w_c, p.rrf_k, p.earth_radius_km),
            (0.1, 0.9, 60.0, 6371.0)
        );
        assert_eq!(p.enabled_features.len(), 5);
    }

    #[test]
    fn invalid_params() {
        assert!(GtrParams {
            n_rerank: 101,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GtrParams {
            beta_d: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GtrParams {
            w_s: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GtrParams {
            w_s: 0.0,
            ..Default::default()
        }
        .without(Feature::Semantic)
        .validate()
        .is_ok());
        assert!(GtrParams::default().with_features([]).validate().is_err());
    }

    #[test]
    fn serde_partial_and_feature_names() {
        let p: GtrParams =
            serde_json::from_str(r#"{"tau_d":300,"enabled_features":["semantic"]}"#).unwrap();
        assert_eq!(p.tau_d, 300.0);
        assert_eq!(p.beta_d, 2.0);
        assert_eq!(
            p.enabled_features.into_iter().collect::<Vec<_>>(),
            vec![Feature::Semantic]
        );
        assert_eq!("Latitude".parse::<Feature>().unwrap(), Feature::Latitude);
        assert!("elevation".parse::<Feature>().is_err());
    }
}
