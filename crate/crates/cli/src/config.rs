//! JSON run configuration: the five model parameters plus optional
//! per-subcommand blocks. Unknown keys are rejected everywhere so typos
//! fail loudly instead of silently falling back to defaults.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_in: f64,
    pub delta_out: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sim: Option<SimBlock>,
    #[serde(default)]
    pub recursion: Option<RecursionBlock>,
    #[serde(default)]
    pub density: Option<DensityBlock>,
    #[serde(default)]
    pub sample: Option<SampleBlock>,
    #[serde(default)]
    pub compare: Option<CompareBlock>,
    #[serde(default)]
    pub gf: Option<GfBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default)]
    pub edges: Option<usize>,
    #[serde(default)]
    pub edge_list: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursionBlock {
    #[serde(default)]
    pub imax: Option<usize>,
    #[serde(default)]
    pub jmax: Option<usize>,
    #[serde(default)]
    pub marginal: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityBlock {
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub quantile: Option<f64>,
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub edges: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub imax: Option<usize>,
    #[serde(default)]
    pub jmax: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfBlock {
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
}
