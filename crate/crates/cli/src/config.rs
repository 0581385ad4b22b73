use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use wva_core::detector::DetectorSetup;
use wva_core::params::PhysicalParams;
use wva_core::pipeline::{Engine, Experiment, Numerics};
use wva_core::qubit::QubitState;
use wva_core::weakvalue::{Outcome, PostselectionSpec};

/// Engine names as spelled on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    #[default]
    Effective,
    ExactLinear,
    ExactSin,
}

impl From<EngineChoice> for Engine {
    fn from(e: EngineChoice) -> Self {
        match e {
            EngineChoice::Effective => Engine::Effective,
            EngineChoice::ExactLinear => Engine::ExactLinearized,
            EngineChoice::ExactSin => Engine::ExactSinusoidal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl Default for QubitSection {
    fn default() -> Self {
        // prepared for A_w = 5i at eta = 0.4
        let q = QubitState::for_weak_value(Complex64::new(0.0, 5.0), 0.4)
            .expect("default weak value is reachable");
        Self {
            alpha: q.alpha(),
            beta: q.beta(),
            theta: q.theta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostselectSection {
    pub eta: f64,
    #[serde(default)]
    pub outcome: Outcome,
}

impl Default for PostselectSection {
    fn default() -> Self {
        Self {
            eta: 0.4,
            outcome: Outcome::Ground,
        }
    }
}

pub const DEFAULT_TRIALS: usize = 10_000;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub x_pos: f64,
    pub l: f64,
    pub n_atoms: u64,
    pub chi: f64,
    pub delta0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0_second: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl DetectorSection {
    pub fn setup(&self, seed: Option<u64>) -> DetectorSetup {
        DetectorSetup {
            x_pos: self.x_pos,
            l: self.l,
            n_atoms: self.n_atoms,
            chi: self.chi,
            delta0: self.delta0,
            delta0_second: self.delta0_second,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path to a numeric leaf, e.g. `physical.delta_over_2pi`.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepSection {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            bail!("sweep of `{}` has zero steps", self.parameter);
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            bail!(
                "sweep bounds must be finite (start = {}, stop = {})",
                self.start,
                self.stop
            );
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            bail!(
                "log sweep needs positive bounds (start = {}, stop = {})",
                self.start,
                self.stop
            );
        }
        let n = self.steps;
        let at = |k: usize| {
            if n == 1 {
                return self.start;
            }
            let f = k as f64 / (n - 1) as f64;
            match self.scale {
                Scale::Linear => self.start + f * (self.stop - self.start),
                Scale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
            }
        };
        Ok((0..n).map(at).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub physical: PhysicalParams,
    #[serde(default)]
    pub qubit: QubitSection,
    #[serde(default)]
    pub postselect: PostselectSection,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            engine: EngineChoice::default(),
            physical: PhysicalParams::worked_example(),
            qubit: QubitSection::default(),
            postselect: PostselectSection::default(),
            numerics: Numerics::default(),
            detector: None,
            sweep: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        if let Some(sweep) = &cfg.sweep {
            cfg.leaf(&sweep.parameter)?;
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    fn leaf(&self, path: &str) -> Result<toml::Value> {
        let root = toml::Value::try_from(self)?;
        let mut node = &root;
        for key in path.split('.') {
            node = node
                .get(key)
                .ok_or_else(|| anyhow!("sweep parameter `{path}` does not resolve (no `{key}`)"))?;
        }
        match node {
            toml::Value::Float(_) | toml::Value::Integer(_) => Ok(node.clone()),
            _ => bail!("sweep parameter `{path}` is not a numeric field"),
        }
    }

    /// Copy of this config with the numeric leaf at `path` set to `value`.
    /// Integer leaves take the rounded value.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Self> {
        let mut root = toml::Value::try_from(self)?;
        let (parents, last) = match path.rsplit_once('.') {
            Some((p, l)) => (Some(p), l),
            None => (None, path),
        };
        let mut node = &mut root;
        for key in parents.into_iter().flat_map(|p| p.split('.')) {
            node = node
                .get_mut(key)
                .ok_or_else(|| anyhow!("sweep parameter `{path}` does not resolve (no `{key}`)"))?;
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| anyhow!("sweep parameter `{path}` does not resolve"))?;
        let slot = table
            .get_mut(last)
            .ok_or_else(|| anyhow!("sweep parameter `{path}` does not resolve (no `{last}`)"))?;
        *slot = match slot {
            toml::Value::Integer(_) => toml::Value::Integer(value.round() as i64),
            toml::Value::Float(_) => toml::Value::Float(value),
            _ => bail!("sweep parameter `{path}` is not a numeric field"),
        };
        Ok(root.try_into()?)
    }

    pub fn qubit_state(&self) -> Result<QubitState> {
        let q = self.qubit;
        QubitState::new(q.alpha, q.beta, q.theta).map_err(|e| anyhow!("[qubit] {e}"))
    }

    pub fn postselection(&self) -> PostselectionSpec {
        PostselectionSpec {
            eta: self.postselect.eta,
            outcome: self.postselect.outcome,
        }
    }

    /// Builds the experiment; every failure here is a configuration error.
    pub fn experiment(&self) -> Result<Experiment> {
        self.numerics
            .grid()
            .map_err(|e| anyhow!("[numerics] {e}"))?;
        Ok(Experiment {
            physical: self.physical,
            qubit: self.qubit_state()?,
            postselect: self.postselection(),
            engine: self.engine.into(),
            numerics: self.numerics,
        })
    }

    pub fn detector_setup(&self) -> Result<Option<(DetectorSetup, usize)>> {
        let Some(d) = self.detector else {
            return Ok(None);
        };
        let setup = d.setup(self.seed);
        let grid = self
            .numerics
            .grid()
            .map_err(|e| anyhow!("[numerics] {e}"))?;
        setup
            .validate(&grid)
            .map_err(|e| anyhow!("[detector] {e}"))?;
        Ok(Some((setup, d.trials)))
    }
}
