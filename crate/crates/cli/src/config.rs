//! Experiment configuration (JSON). Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use framedisc_core::discretize::{Mode, PipelineConfig, RadiusChoice};
use framedisc_core::selector::{SearchConfig, Strategy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub frame: FrameSpec,
    #[serde(default)]
    pub space: SpaceSpec,
    pub grid: GridSpec,
    pub epsilon: f64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Fixed separation radius; adaptive sweep when absent.
    #[serde(default)]
    pub r: Option<f64>,
    pub net_radius: f64,
    #[serde(default)]
    pub adaptive: AdaptiveSpec,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub selector_delta: f64,
    #[serde(default)]
    pub bench: Option<BenchSpec>,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_mode() -> Mode {
    Mode::Practical
}

fn default_delta() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSpec {
    Exponential {
        n: usize,
        interval: (f64, f64),
    },
    Gabor {
        n: usize,
        time: (f64, f64),
        /// Keep time coordinates with `|s| ≤ band_radius`.
        #[serde(default)]
        band_radius: Option<f64>,
    },
    Wavelet {
        profile: WaveletProfile,
        n: usize,
        time: (f64, f64),
        /// Keep eigenvectors above this fraction of the top eigenvalue.
        #[serde(default)]
        spectral_floor: Option<f64>,
    },
    Sinc {
        bandwidth: f64,
        interval: (f64, f64),
        n: usize,
        #[serde(default)]
        spectral_floor: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveletProfile {
    Band { lo: f64, hi: f64 },
    OddGaussian,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    /// Overrides the small-scale cutoff `R_A` of the built-in space.
    #[serde(default)]
    pub small_scale_cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub intervals: Vec<(f64, f64)>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSpec {
    pub start: f64,
    pub steps: u32,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        Self {
            start: 0.25,
            steps: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub strategy: Strategy,
    #[serde(default)]
    pub starts: usize,
    #[serde(default = "default_budget")]
    pub budget_factor: usize,
}

fn default_budget() -> usize {
    4
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            strategy: Strategy::Greedy,
            starts: 0,
            budget_factor: 4,
        }
    }
}

impl From<SearchSpec> for SearchConfig {
    fn from(s: SearchSpec) -> Self {
        SearchConfig {
            strategy: s.strategy,
            starts: s.starts,
            budget_factor: s.budget_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub delta: f64,
    pub pairs: usize,
    pub trials: usize,
    #[serde(default = "default_bench_dim")]
    pub dim: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
}

fn default_bench_dim() -> usize {
    4
}

fn default_levels() -> usize {
    1
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Exhaustive, Strategy::Greedy]
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            delta: 0.05,
            pairs: 8,
            trials: 100,
            dim: default_bench_dim(),
            levels: 1,
            strategies: default_strategies(),
        }
    }
}

/// Command-line overrides applied on top of a file or demo config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if o.r.is_some() {
            self.r = o.r;
        }
        if o.out.is_some() {
            self.output = o.out.clone();
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            bail!("epsilon must lie in (0, 1), got {}", self.epsilon);
        }
        if !(self.net_radius > 0.0) {
            bail!("net_radius must be positive");
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                bail!("r must be positive");
            }
        }
        if self.grid.counts.is_empty() || self.grid.counts.contains(&0) {
            bail!("grid counts must be positive");
        }
        if self.grid.counts.len() != self.grid.intervals.len() {
            bail!("grid needs one count per interval");
        }
        if !(self.adaptive.start > 0.0) {
            bail!("adaptive start must be positive");
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            epsilon: self.epsilon,
            mode: self.mode,
            net_radius: self.net_radius,
            radius: match self.r {
                Some(r) => RadiusChoice::Fixed(r),
                None => RadiusChoice::Adaptive {
                    start: self.adaptive.start,
                    steps: self.adaptive.steps,
                },
            },
            search: self.search.into(),
            seed: self.seed,
            selector_delta: self.selector_delta,
        }
    }

    /// Built-in configuration of a demo.
    pub fn demo(name: &str) -> Result<Self> {
        let text = match name {
            "exponential" => include_str!("../demos/exponential.json"),
            "gabor" => include_str!("../demos/gabor.json"),
            "wavelet" => include_str!("../demos/wavelet.json"),
            "sinc" => include_str!("../demos/sinc.json"),
            other => bail!("unknown demo {other:?} (expected gabor, wavelet, exponential or sinc)"),
        };
        Self::from_json(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demos_parse() {
        for name in ["exponential", "gabor", "wavelet", "sinc"] {
            ExperimentConfig::demo(name).unwrap();
        }
        assert!(ExperimentConfig::demo("haar").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let base = include_str!("../demos/exponential.json");
        let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
        v["typo"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
        v["frame"]["extra"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        let mut cfg = ExperimentConfig::demo("exponential").unwrap();
        let o = Overrides {
            epsilon: Some(1.5),
            ..Default::default()
        };
        assert!(cfg.apply(&o).is_err());
    }
}
