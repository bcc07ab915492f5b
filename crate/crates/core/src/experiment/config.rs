use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::boussinesq::{
    bona_smith_params, beta_from_speed, BoussinesqModel, GaussianDatum, InitialData, NonlinearForm,
    SolitaryWave,
};
use crate::error::{Error, Result};
use crate::integrator::{RunSpec, StartKind, StartingProcedure};
use crate::lmm::{make_method, method_by_name, GeneratingPair, PlmMethod};
use crate::nls::{NlsModel, SolitonParams};
use crate::spectral::make_grid;
use crate::system::PartitionedSystem;

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PLMM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Nls,
    Boussinesq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Soliton,
    PerturbedSoliton,
    BbSolitary,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartName {
    #[default]
    Exact,
    Midpoint,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    #[default]
    Conservative,
    Pointwise,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A user-supplied method, referenced by its `name` in `method`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMethod {
    pub name: String,
    pub p_rho: Vec<f64>,
    pub p_sigma: Vec<f64>,
    pub q_rho: Vec<f64>,
    pub q_sigma: Vec<f64>,
}

/// Declarative description of one experiment. Each `(method, dt)` pair is an
/// independent run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub scenario: Scenario,
    pub method: OneOrMany<String>,
    pub dt: OneOrMany<f64>,
    #[serde(default = "default_l_i")]
    pub l_i: f64,
    #[serde(default = "default_l_s")]
    pub l_s: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    pub t_end: f64,
    /// Recording stride in steps; exclusive with `record_interval`.
    pub record_every: Option<usize>,
    /// Recording stride in time units; rounded to whole steps per `dt`.
    pub record_interval: Option<f64>,
    #[serde(default)]
    pub start: StartName,
    /// Target order of the reference starter; defaults to the method order + 2.
    pub start_order: Option<usize>,
    pub output: PathBuf,
    #[serde(default)]
    pub swap_partitions: bool,
    #[serde(default)]
    pub profile_times: Vec<f64>,

    // NLS wave
    #[serde(default = "one")]
    pub sigma: f64,
    /// Soliton shape parameter `a > 0`.
    #[serde(default = "one")]
    pub shape: f64,
    /// Wave speed (NLS group velocity, or Boussinesq solitary-wave speed).
    pub speed: Option<f64>,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    /// Factors applied to `(P, Q)` in the perturbed-soliton scenario.
    pub perturbation: Option<[f64; 2]>,

    // Boussinesq
    #[serde(default = "default_theta_sq")]
    pub theta_sq: f64,
    pub beta: Option<f64>,
    #[serde(default = "default_gauss_amp")]
    pub gauss_amp: f64,
    #[serde(default = "default_gauss_rate")]
    pub gauss_rate: f64,
    #[serde(default = "default_gauss_ratio")]
    pub gauss_ratio: f64,
    #[serde(default)]
    pub nonlinear_form: FormName,

    pub custom: Option<CustomMethod>,
}

fn default_l_i() -> f64 {
    -128.0
}
fn default_l_s() -> f64 {
    128.0
}
fn default_n() -> usize {
    2048
}
fn one() -> f64 {
    1.0
}
fn default_x0() -> f64 {
    -40.0
}
fn default_theta0() -> f64 {
    FRAC_PI_4
}
fn default_theta_sq() -> f64 {
    9.0 / 11.0
}
fn default_gauss_amp() -> f64 {
    1.2
}
fn default_gauss_rate() -> f64 {
    6.42e-2
}
fn default_gauss_ratio() -> f64 {
    0.87
}

/// Default recording stride in time units.
const DEFAULT_RECORD_INTERVAL: f64 = 0.1;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let dts = self.dt.to_vec();
        if dts.is_empty() {
            return Err(Error::Config("dt list is empty".into()));
        }
        if let Some(bad) = dts.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::Config(format!("dt must be positive, got {bad}")));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        match (self.record_every, self.record_interval) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give record_every or record_interval, not both".into()))
            }
            (Some(0), _) => return Err(Error::Config("record_every must be at least 1".into())),
            (_, Some(v)) if !(v > 0.0) => {
                return Err(Error::Config(format!("record_interval must be positive, got {v}")))
            }
            _ => {}
        }
        let compatible = matches!(
            (self.model, self.scenario),
            (ModelKind::Nls, Scenario::Soliton)
                | (ModelKind::Nls, Scenario::PerturbedSoliton)
                | (ModelKind::Boussinesq, Scenario::BbSolitary)
                | (ModelKind::Boussinesq, Scenario::Gaussian)
        );
        if !compatible {
            return Err(Error::Config(format!(
                "scenario {:?} does not belong to model {:?}",
                self.scenario, self.model
            )));
        }
        if self.start == StartName::Exact
            && matches!(self.scenario, Scenario::PerturbedSoliton | Scenario::Gaussian)
        {
            return Err(Error::Config(
                "exact starting values need a scenario with a known solution".into(),
            ));
        }
        make_grid(self.l_i, self.l_s, self.n)?;
        for name in self.method.to_vec() {
            self.resolve_method(&name)?;
        }
        self.build_system()?;
        Ok(())
    }

    /// Output directory, honouring [`OUTPUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.clone(),
        }
    }

    pub fn resolve_method(&self, name: &str) -> Result<PlmMethod> {
        let method = match &self.custom {
            Some(c) if c.name == name => make_method(
                GeneratingPair::new(c.p_rho.clone(), c.p_sigma.clone())?,
                GeneratingPair::new(c.q_rho.clone(), c.q_sigma.clone())?,
                &c.name,
            )?,
            _ => method_by_name(name)?,
        };
        Ok(if self.swap_partitions { method.swapped() } else { method })
    }

    pub fn methods(&self) -> Result<Vec<PlmMethod>> {
        self.method.to_vec().iter().map(|n| self.resolve_method(n)).collect()
    }

    pub fn dts(&self) -> Vec<f64> {
        self.dt.to_vec()
    }

    pub fn starting_procedure(&self, method: &PlmMethod) -> StartingProcedure {
        let kind = match self.start {
            StartName::Exact => StartKind::ExactNodal,
            StartName::Midpoint => StartKind::ImplicitMidpoint,
            StartName::Reference => StartKind::ReferenceRk,
        };
        let target_order = match kind {
            StartKind::ImplicitMidpoint => 2,
            _ => self.start_order.unwrap_or(method.order + 2),
        };
        StartingProcedure { kind, target_order }
    }

    pub fn run_spec(&self, dt: f64) -> RunSpec {
        let every = match (self.record_every, self.record_interval) {
            (Some(k), _) => k,
            (None, Some(iv)) => ((iv / dt).round() as usize).max(1),
            (None, None) => ((DEFAULT_RECORD_INTERVAL / dt).round() as usize).max(1),
        };
        RunSpec::new(dt, self.t_end, every).with_snapshots(self.profile_times.clone())
    }

    pub fn build_system(&self) -> Result<Box<dyn PartitionedSystem>> {
        let grid = make_grid(self.l_i, self.l_s, self.n)?;
        match self.model {
            ModelKind::Nls => {
                let params = SolitonParams::from_shape(self.shape, self.speed.unwrap_or(1.0), self.x0, self.theta0);
                let mut model = NlsModel::new(grid, self.sigma, params)?;
                if self.scenario == Scenario::PerturbedSoliton {
                    let [a1, a2] = self.perturbation.unwrap_or([1.05, 1.05]);
                    model = model.with_perturbation(a1, a2);
                }
                Ok(Box::new(model))
            }
            ModelKind::Boussinesq => {
                let params = bona_smith_params(self.theta_sq)?;
                let initial = match self.scenario {
                    Scenario::BbSolitary => {
                        let beta = match (self.beta, self.speed) {
                            (Some(b), _) => b,
                            (None, Some(c)) => beta_from_speed(c),
                            (None, None) => 3f64.sqrt() / 2.0,
                        };
                        InitialData::SolitaryWave(SolitaryWave::new(beta, &params, self.x0)?)
                    }
                    _ => InitialData::Gaussian(GaussianDatum {
                        amp: self.gauss_amp,
                        rate: self.gauss_rate,
                        ratio: self.gauss_ratio,
                        x0: self.x0,
                    }),
                };
                let form = match self.nonlinear_form {
                    FormName::Conservative => NonlinearForm::Conservative,
                    FormName::Pointwise => NonlinearForm::Pointwise,
                };
                let model = BoussinesqModel::new(grid, params, initial).with_form(form);
                model.initial_state()?;
                Ok(Box::new(model))
            }
        }
    }
}
