//! Flat `key = value` scenario files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bath::{BathKind, BathSpec, QuadControls, SpinKernel};
use crate::error::{Error, Result};
use crate::model::{Coupling, SystemParams};

use super::presets;

/// Largest spin count accepted from a config.
pub const MAX_SPINS: usize = 200;

const DEFAULT_DT: f64 = 0.005;

pub const VALID_KEYS: &[&str] = &[
    "preset",
    "model",
    "n",
    "eps0",
    "delta0",
    "eps",
    "delta",
    "beta",
    "g",
    "s",
    "omega_c",
    "dt",
    "t_max",
    "corr_state",
    "corr_term",
    "quad_nodes",
    "out",
    "literal_alpha",
    "jx2",
    "spin_kernel",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Bosonic bath coupled through `Jz`.
    Boson,
    /// Two-level-system bath coupled through `Jx`.
    SpinEnv,
    /// Bosonic bath with `Δ = Δ0 = 0`; has an exact solution.
    Dephasing,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Boson => "boson",
            ModelKind::SpinEnv => "spin_env",
            ModelKind::Dephasing => "dephasing",
        }
    }

    pub fn bath_kind(&self) -> BathKind {
        match self {
            ModelKind::SpinEnv => BathKind::Spin,
            _ => BathKind::Bosonic,
        }
    }

    pub fn coupling(&self) -> Coupling {
        match self {
            ModelKind::SpinEnv => Coupling::Jx,
            _ => Coupling::Jz,
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boson" => Ok(ModelKind::Boson),
            "spin_env" => Ok(ModelKind::SpinEnv),
            "dephasing" => Ok(ModelKind::Dephasing),
            _ => Err(Error::Config(format!(
                "model: expected one of boson, spin_env, dephasing; got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Preset name, if the config started from one.
    pub name: Option<String>,
    pub model: ModelKind,
    pub n: usize,
    pub eps0: f64,
    pub delta0: f64,
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    pub g: f64,
    pub s: f64,
    pub omega_c: f64,
    /// `None` picks [`ScenarioConfig::effective_dt`].
    pub dt: Option<f64>,
    pub t_max: f64,
    pub corr_state: bool,
    pub corr_term: bool,
    pub quad_nodes: usize,
    pub out: Option<PathBuf>,
    /// Use the `F = Jz` closed-form coefficients even when `F = Jx`.
    pub literal_alpha: bool,
    pub jx2: bool,
    pub spin_kernel: SpinKernel,
}

impl ScenarioConfig {
    /// Defaults for everything but `model` and `n`.
    pub fn new(model: ModelKind, n: usize) -> Self {
        ScenarioConfig {
            name: None,
            model,
            n,
            eps0: 4.0,
            delta0: 0.0,
            eps: 4.0,
            delta: 0.0,
            beta: 1.0,
            g: 0.05,
            s: 1.0,
            omega_c: 5.0,
            dt: None,
            t_max: 5.0,
            corr_state: true,
            corr_term: true,
            quad_nodes: QuadControls::default().nodes,
            out: None,
            literal_alpha: false,
            jx2: false,
            spin_kernel: SpinKernel::Exact,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "custom".to_string())
    }

    /// Step that resolves both the system and the bath time scales.
    pub fn effective_dt(&self) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        let scale = self.eps.hypot(self.delta).max(self.omega_c);
        DEFAULT_DT.min(0.02 / scale)
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        SystemParams::new(self.eps0, self.delta0, self.eps, self.delta)
    }

    pub fn bath_spec(&self) -> BathSpec {
        let mut spec = BathSpec::new(self.model.bath_kind(), self.g, self.s, self.omega_c, self.beta);
        spec.quad.nodes = self.quad_nodes;
        spec.spin_kernel = self.spin_kernel;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, constraint: &str, value: String| {
            Err(Error::Config(format!("{key}: must be {constraint}, got {value}")))
        };
        if self.n == 0 || self.n > MAX_SPINS {
            return bad("n", &format!("between 1 and {MAX_SPINS}"), self.n.to_string());
        }
        for (key, v) in [
            ("eps0", self.eps0),
            ("delta0", self.delta0),
            ("eps", self.eps),
            ("delta", self.delta),
        ] {
            if !v.is_finite() {
                return bad(key, "finite", v.to_string());
            }
        }
        for (key, v) in [
            ("beta", self.beta),
            ("s", self.s),
            ("omega_c", self.omega_c),
            ("t_max", self.t_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(key, "> 0", v.to_string());
            }
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return bad("g", ">= 0", self.g.to_string());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad("dt", "> 0", dt.to_string());
            }
            if dt > self.t_max {
                return bad("dt", "<= t_max", dt.to_string());
            }
        }
        let min_nodes = 4 * crate::quadrature::PANEL_ORDER;
        if self.quad_nodes < min_nodes {
            return bad("quad_nodes", &format!(">= {min_nodes}"), self.quad_nodes.to_string());
        }
        if self.model == ModelKind::Dephasing && (self.delta != 0.0 || self.delta0 != 0.0) {
            return Err(Error::Config(
                "delta, delta0: must both be 0 for model = dephasing".into(),
            ));
        }
        Ok(())
    }

    /// Text that parses back to this config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("model", self.model.to_string());
        line("n", self.n.to_string());
        line("eps0", self.eps0.to_string());
        line("delta0", self.delta0.to_string());
        line("eps", self.eps.to_string());
        line("delta", self.delta.to_string());
        line("beta", self.beta.to_string());
        line("g", self.g.to_string());
        line("s", self.s.to_string());
        line("omega_c", self.omega_c.to_string());
        if let Some(dt) = self.dt {
            line("dt", dt.to_string());
        }
        line("t_max", self.t_max.to_string());
        line("corr_state", self.corr_state.to_string());
        line("corr_term", self.corr_term.to_string());
        line("quad_nodes", self.quad_nodes.to_string());
        if let Some(p) = &self.out {
            line("out", p.display().to_string());
        }
        line("literal_alpha", self.literal_alpha.to_string());
        line("jx2", self.jx2.to_string());
        let kernel = match self.spin_kernel {
            SpinKernel::Exact => "exact",
            SpinKernel::Tanh => "tanh",
        };
        line("spin_kernel", kernel.to_string());
        out
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected {expected}, got '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

/// Parses and validates a scenario file.
///
/// A `preset` key seeds every field from the registry; the remaining keys
/// override it regardless of their position in the file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !VALID_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown key '{key}'; valid keys: {}",
                VALID_KEYS.join(", ")
            )));
        }
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
    }

    let mut cfg = match entries.remove("preset") {
        Some(name) => presets::get(&name)?,
        None => {
            let model: ModelKind = entries
                .get("model")
                .ok_or_else(|| Error::Config("missing key: model".into()))?
                .parse()?;
            let n = entries
                .get("n")
                .ok_or_else(|| Error::Config("missing key: n".into()))?;
            ScenarioConfig::new(model, parse_value("n", n, "a positive integer")?)
        }
    };

    for (key, value) in &entries {
        let v = value.as_str();
        let k = key.as_str();
        let num = || parse_value::<f64>(k, v, "a number");
        match k {
            "model" => cfg.model = v.parse()?,
            "n" => cfg.n = parse_value(k, v, "a positive integer")?,
            "eps0" => cfg.eps0 = num()?,
            "delta0" => cfg.delta0 = num()?,
            "eps" => cfg.eps = num()?,
            "delta" => cfg.delta = num()?,
            "beta" => cfg.beta = num()?,
            "g" => cfg.g = num()?,
            "s" => cfg.s = num()?,
            "omega_c" => cfg.omega_c = num()?,
            "dt" => cfg.dt = Some(num()?),
            "t_max" => cfg.t_max = num()?,
            "corr_state" => cfg.corr_state = parse_bool(k, v)?,
            "corr_term" => cfg.corr_term = parse_bool(k, v)?,
            "quad_nodes" => cfg.quad_nodes = parse_value(k, v, "a positive integer")?,
            "out" => cfg.out = Some(PathBuf::from(v)),
            "literal_alpha" => cfg.literal_alpha = parse_bool(k, v)?,
            "jx2" => cfg.jx2 = parse_bool(k, v)?,
            "spin_kernel" => {
                cfg.spin_kernel = match v {
                    "exact" => SpinKernel::Exact,
                    "tanh" => SpinKernel::Tanh,
                    _ => {
                        return Err(Error::Config(format!(
                            "spin_kernel: expected exact or tanh, got '{v}'"
                        )))
                    }
                }
            }
            _ => unreachable!("keys are checked against VALID_KEYS"),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Command-line overrides applied after parsing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub no_corr_term: bool,
    pub no_corr_state: bool,
    pub quad_nodes: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(dt) = self.dt {
            cfg.dt = Some(dt);
        }
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        if self.no_corr_term {
            cfg.corr_term = false;
        }
        if self.no_corr_state {
            cfg.corr_state = false;
        }
        if let Some(n) = self.quad_nodes {
            cfg.quad_nodes = n;
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        cfg.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_names_model() {
        let err = parse_config("").unwrap_err();
        assert_eq!(err.to_string(), "missing key: model");
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = parse_config("model = boson\nn = 2\ntemperature = 3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key 'temperature'"));
        assert!(msg.contains("omega_c"));
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = parse_config("# header\nbeta = 2 # colder\npreset = fig4\n").unwrap();
        assert_eq!(cfg.beta, 2.0);
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.name.as_deref(), Some("fig4"));
    }

    #[test]
    fn out_of_range_names_key_and_constraint() {
        let err = parse_config("model = boson\nn = 2\nbeta = -1").unwrap_err();
        assert_eq!(err.to_string(), "beta: must be > 0, got -1");
        let err = parse_config("model = dephasing\nn = 2\ndelta = 0.5").unwrap_err();
        assert!(err.to_string().contains("delta"));
        let err = parse_config("model = boson\nn = 0").unwrap_err();
        assert!(err.to_string().starts_with("n: must be"));
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = presets::get("fig12").unwrap();
        cfg.name = None;
        cfg.dt = Some(0.0025);
        assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
    }

    #[test]
    fn default_step_resolves_fastest_scale() {
        let cfg = presets::get("fig1").unwrap();
        assert!((cfg.effective_dt() - 0.004).abs() < 1e-15);
        let mut slow = ScenarioConfig::new(ModelKind::Boson, 2);
        slow.eps = 0.5;
        slow.omega_c = 1.0;
        assert_eq!(slow.effective_dt(), 0.005);
    }
}
