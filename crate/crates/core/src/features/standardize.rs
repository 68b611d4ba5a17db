use serde::{Deserialize, Serialize};

/// Per-centrality z-score statistics over the training population.
///
/// Stored as `f32` so that a checkpoint reproduces the exact scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStandardizer {
    pub mean: [f32; 5],
    pub std: [f32; 5],
}

impl Default for FeatureStandardizer {
    fn default() -> Self {
        Self {
            mean: [0.0; 5],
            std: [1.0; 5],
        }
    }
}

impl FeatureStandardizer {
    /// Population mean and standard deviation; a zero deviation becomes 1.
    pub fn fit<'a>(values: impl IntoIterator<Item = &'a [f64; 5]>) -> Self {
        let mut count = 0usize;
        let mut sum = [0.0f64; 5];
        let mut rows = Vec::new();
        for v in values {
            count += 1;
            for k in 0..5 {
                sum[k] += v[k];
            }
            rows.push(*v);
        }
        if count == 0 {
            return Self::default();
        }
        let mean = sum.map(|s| s / count as f64);
        let mut var = [0.0f64; 5];
        for v in &rows {
            for k in 0..5 {
                var[k] += (v[k] - mean[k]).powi(2);
            }
        }
        let std = var.map(|s| {
            let sd = (s / count as f64).sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        });
        Self {
            mean: mean.map(|m| m as f32),
            std: std.map(|s| s as f32),
        }
    }

    pub fn apply(&self, raw: &[f64; 5]) -> [f64; 5] {
        std::array::from_fn(|k| (raw[k] - self.mean[k] as f64) / self.std[k] as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardizeMode {
    /// Statistics fitted once on the training graphs.
    #[default]
    Global,
    /// Statistics recomputed on each graph.
    PerGraph,
}

impl std::str::FromStr for StandardizeMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "global" => Ok(Self::Global),
            "per-graph" => Ok(Self::PerGraph),
            other => Err(crate::Error::Config(format!("unknown standardization `{other}`"))),
        }
    }
}
