//! Run configuration file.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use speclag::{CollisionParams, Integrator, Scenario, VelocityGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub collision: CollisionConfig,
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub advisor: AdvisorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            collision: CollisionConfig::default(),
            scenario: default_scenario(),
            integrator: IntegratorConfig::default(),
            outputs: OutputConfig::default(),
            advisor: AdvisorConfig::default(),
        }
    }
}

fn default_scenario() -> Scenario {
    Scenario::by_name("bkw").expect("registered")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width `L` of the velocity box.
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_l() -> f64 {
    10.0
}

fn default_n() -> usize {
    32
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            l: default_l(),
            n: default_n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_b_tilde")]
    pub b_tilde: f64,
    #[serde(default = "default_g_tr")]
    pub g_tr: f64,
    #[serde(default = "yes")]
    pub projection: bool,
}

fn default_b_tilde() -> f64 {
    1.0 / (4.0 * PI)
}

fn default_g_tr() -> f64 {
    8.0
}

fn yes() -> bool {
    true
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            b_tilde: default_b_tilde(),
            g_tr: default_g_tr(),
            projection: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_kind")]
    pub kind: Integrator,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Defaults to the scenario's own start time.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub t_final: Option<f64>,
    /// Abort when `min f` falls below minus this value.
    #[serde(default)]
    pub negativity_abort: Option<f64>,
}

fn default_kind() -> Integrator {
    Integrator::Euler
}

fn default_dt() -> f64 {
    0.05
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            dt: default_dt(),
            t0: None,
            t_final: None,
            negativity_abort: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Bspf,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Steps between field snapshots; 0 keeps only the initial and final fields.
    #[serde(default)]
    pub cadence: usize,
    /// Write axis slices through the origin.
    #[serde(default = "yes")]
    pub slices: bool,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Bspf, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            cadence: 0,
            slices: true,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Width from the energy, amplitude from dominance.
    #[serde(alias = "method1")]
    Energy,
    /// Width minimizing the bound at a reference point.
    #[serde(alias = "method2")]
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisorConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_v_target")]
    pub v_target: f64,
    /// Reference point for [`Method::Reference`].
    #[serde(default = "default_v_ref")]
    pub v_ref: f64,
    #[serde(default = "default_g_ref")]
    pub g_ref: f64,
}

fn default_method() -> Method {
    Method::Energy
}

fn default_tol() -> f64 {
    0.1
}

fn default_v_target() -> f64 {
    6.0
}

fn default_v_ref() -> f64 {
    3.0
}

fn default_g_ref() -> f64 {
    8.0
}

impl Default for AdvisorConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol: default_tol(),
            v_target: default_v_target(),
            v_ref: default_v_ref(),
            g_ref: default_g_ref(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.collision_params()?;
        self.scenario.validate()?;
        let i = &self.integrator;
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            bail!("integrator.dt must be positive, got {}", i.dt);
        }
        if let Some(t1) = i.t_final {
            if t1 < self.t0() {
                bail!("integrator.t_final = {t1} precedes t0 = {}", self.t0());
            }
        }
        if matches!(i.negativity_abort, Some(x) if !(x >= 0.0)) {
            bail!("integrator.negativity_abort must be nonnegative");
        }
        let a = &self.advisor;
        for (name, x) in [
            ("tol", a.tol),
            ("v_target", a.v_target),
            ("v_ref", a.v_ref),
            ("g_ref", a.g_ref),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                bail!("advisor.{name} must be positive, got {x}");
            }
        }
        if self.outputs.formats.is_empty() {
            bail!("outputs.formats must name at least one format");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.grid.l, self.grid.n).context("invalid [grid]")
    }

    pub fn collision_params(&self) -> Result<CollisionParams> {
        let c = &self.collision;
        CollisionParams::new(c.lambda, c.b_tilde, c.g_tr).context("invalid [collision]")
    }

    pub fn t0(&self) -> f64 {
        self.integrator
            .t0
            .unwrap_or_else(|| self.scenario.start_time())
    }

    /// Warning text when the kernel oscillation `2 pi / g_tr` is shorter than
    /// two Fourier spacings.
    pub fn nyquist_warning(&self) -> Option<String> {
        let dzeta = PI / self.grid.l;
        let wavelength = 2.0 * PI / self.collision.g_tr;
        (wavelength < 2.0 * dzeta).then(|| {
            format!(
                "warning: g_tr = {} resolves poorly (Nyquist): kernel wavelength 2 pi/g_tr = {:.4} \
                 is below 2 dzeta = {:.4}; keep g_tr below L = {}",
                self.collision.g_tr,
                wavelength,
                2.0 * dzeta,
                self.grid.l
            )
        })
    }
}
