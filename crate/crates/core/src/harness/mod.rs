//! Scenario execution, CSV output and parameter sweeps.

pub mod config;
pub mod presets;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::correlation::{CorrelationTerm, FrPath};
use crate::dephasing::{DephasingBath, ExactDephasing};
use crate::error::{Error, Result};
use crate::initial_state::{prepare_correlated, prepare_uncorrelated, CorrelatedState, PreparationSpec};
use crate::linalg::{OperatorMatrix, SpinSystem};
use crate::solver::{build_kernel, evolve, Generator, TimeGrid, Trajectory};

pub use config::{parse_config, ModelKind, Overrides, ScenarioConfig};

/// `2⟨Jx⟩/N` and `4⟨Jx²⟩/N²` along a list of states.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Curves {
    pub jx: Vec<f64>,
    pub jx2: Vec<f64>,
}

impl Curves {
    fn from_states(sys: &SpinSystem, states: &[OperatorMatrix]) -> Self {
        let n = sys.n_spins() as f64;
        let jx2_op = sys.jx() * sys.jx();
        Curves {
            jx: states.iter().map(|r| 2.0 * (r * sys.jx()).trace().re / n).collect(),
            jx2: states.iter().map(|r| 4.0 * (r * &jx2_op).trace().re / (n * n)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactCurves {
    pub corr: Curves,
    pub uncorr: Curves,
    /// Largest change of any population over the run.
    pub max_population_drift: f64,
}

/// Diagnostics of the perturbative correlated initial state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialDiagnostics {
    pub zprime: f64,
    pub correction_norm: f64,
    pub min_eigenvalue: f64,
    pub hermitization: f64,
}

impl From<&CorrelatedState> for InitialDiagnostics {
    fn from(s: &CorrelatedState) -> Self {
        InitialDiagnostics {
            zprime: s.zprime,
            correction_norm: s.correction_norm,
            min_eigenvalue: s.min_eigenvalue,
            hermitization: s.hermitization,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub times: Vec<f64>,
    /// Run with the configured correlation toggles.
    pub corr: Trajectory,
    /// Product initial state, no correlation term.
    pub uncorr: Trajectory,
    pub exact: Option<ExactCurves>,
    pub initial: InitialDiagnostics,
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl ComparisonReport {
    /// `D = max_t |jx_corr − jx_uncorr|`.
    pub fn d_metric(&self) -> f64 {
        max_abs_gap(&self.corr.jx, &self.uncorr.jx)
    }

    /// `max_t |jx_ME − jx_exact|` for the correlated and uncorrelated pairs.
    pub fn oracle_deviation(&self) -> Option<(f64, f64)> {
        self.exact.as_ref().map(|e| {
            (
                max_abs_gap(&self.corr.jx, &e.corr.jx),
                max_abs_gap(&self.uncorr.jx, &e.uncorr.jx),
            )
        })
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.corr.max_trace_drift.max(self.uncorr.max_trace_drift)
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t", "jx_corr", "jx_uncorr"];
        if self.exact.is_some() {
            cols.extend(["jx_exact_corr", "jx_exact_uncorr"]);
        }
        if self.config.jx2 {
            cols.extend(["jx2_corr", "jx2_uncorr"]);
        }
        cols.join(",")
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![*t, self.corr.jx[i], self.uncorr.jx[i]];
            if let Some(e) = &self.exact {
                row.extend([e.corr.jx[i], e.uncorr.jx[i]]);
            }
            if self.config.jx2 {
                row.extend([self.corr.jx2[i], self.uncorr.jx2[i]]);
            }
            writeln!(w, "{}", format_row(&row))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "scenario {}: D = {:.6e}, trace drift = {:.3e}, min eigenvalue of rho0 = {:.3e}\n",
            self.scenario,
            self.d_metric(),
            self.max_trace_drift(),
            self.initial.min_eigenvalue
        );
        if let Some((c, u)) = self.oracle_deviation() {
            s.push_str(&format!(
                "max |jx_me - jx_exact|: correlated = {c:.6e}, uncorrelated = {u:.6e}\n"
            ));
        }
        s
    }
}

/// Twelve significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn format_row(values: &[f64]) -> String {
    values.iter().map(|v| format_value(*v)).collect::<Vec<_>>().join(",")
}

struct Setup {
    sys: SpinSystem,
    prep: PreparationSpec,
    grid: TimeGrid,
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    cfg.validate()?;
    let sys = SpinSystem::new(cfg.n)?;
    let prep = PreparationSpec::rotation_y_half_pi(&sys, cfg.eps0, cfg.delta0);
    let grid = TimeGrid::covering(cfg.t_max, cfg.effective_dt())?;
    Ok(Setup { sys, prep, grid })
}

fn with_context<T>(cfg: &ScenarioConfig, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Scenario {
        scenario: cfg.label(),
        source: Box::new(e),
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ComparisonReport> {
    with_context(cfg, run_inner(cfg))
}

fn run_inner(cfg: &ScenarioConfig) -> Result<ComparisonReport> {
    let Setup { sys, prep, grid } = setup(cfg)?;
    let params = cfg.system_params()?;
    let spec = cfg.bath_spec();
    let bath = spec.correlations()?;
    let f = cfg.model.coupling().operator(&sys);
    let h_s = params.h_s(&sys);
    let kernel = build_kernel(&h_s, &f, &bath, grid)?;

    let correlated = prepare_correlated(&sys, &prep, &bath, &f)?;
    let product = prepare_uncorrelated(&sys, &prep, cfg.beta)?;

    let jcorr = if cfg.corr_term {
        let path = match (cfg.model, cfg.literal_alpha) {
            (ModelKind::SpinEnv, false) => FrPath::Generic,
            _ => FrPath::ClosedForm,
        };
        let term = CorrelationTerm::new(&sys, &params, &prep, &f, &bath, path)?;
        Some(term.table(grid.half_step(), grid.half_nodes())?)
    } else {
        None
    };

    let rho_corr = if cfg.corr_state { &correlated.rho0 } else { &product };
    let with = Generator {
        h_s: &h_s,
        f: &f,
        kernel: &kernel,
        jcorr: jcorr.as_ref(),
    };
    let without = Generator { jcorr: None, ..with };
    let (corr, uncorr) = rayon::join(
        || evolve(rho_corr, &sys, &with, grid, cfg.corr_state),
        || evolve(&product, &sys, &without, grid, false),
    );
    let (corr, uncorr) = (corr?, uncorr?);

    let exact = if cfg.model == ModelKind::Dephasing {
        Some(exact_curves(cfg, &sys, &prep, &grid, correlated.rho0.clone())?)
    } else {
        None
    };

    Ok(ComparisonReport {
        scenario: cfg.label(),
        config: cfg.clone(),
        times: grid.times(),
        corr,
        uncorr,
        exact,
        initial: InitialDiagnostics::from(&correlated),
    })
}

fn exact_curves(
    cfg: &ScenarioConfig,
    sys: &SpinSystem,
    prep: &PreparationSpec,
    grid: &TimeGrid,
    rho0_corr: OperatorMatrix,
) -> Result<ExactCurves> {
    let bath = DephasingBath::new(&cfg.bath_spec())?;
    let ex = ExactDephasing::new(sys.clone(), prep.clone(), cfg.eps, bath, rho0_corr)?;
    let times = grid.times();
    let corr: Vec<OperatorMatrix> = times
        .par_iter()
        .map(|&t| ex.state(t, true))
        .collect::<Result<_>>()?;
    let uncorr: Vec<OperatorMatrix> = times
        .par_iter()
        .map(|&t| ex.state(t, false))
        .collect::<Result<_>>()?;
    let mut drift: f64 = 0.0;
    for (states, start) in [(&corr, &ex.rho0_corr), (&uncorr, &ex.rho0_uncorr)] {
        for r in states {
            for k in 0..sys.dim() {
                drift = drift.max((r.get(k, k) - start.get(k, k)).norm());
            }
        }
    }
    Ok(ExactCurves {
        corr: Curves::from_states(sys, &corr),
        uncorr: Curves::from_states(sys, &uncorr),
        max_population_drift: drift,
    })
}

/// Exact pure-dephasing curves alone.
#[derive(Clone, Debug)]
pub struct ExactReport {
    pub scenario: String,
    pub times: Vec<f64>,
    pub curves: ExactCurves,
    pub jx2: bool,
}

impl ExactReport {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header = String::from("t,jx_exact_corr,jx_exact_uncorr");
        if self.jx2 {
            header.push_str(",jx2_exact_corr,jx2_exact_uncorr");
        }
        writeln!(w, "{header}")?;
        let c = &self.curves;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![*t, c.corr.jx[i], c.uncorr.jx[i]];
            if self.jx2 {
                row.extend([c.corr.jx2[i], c.uncorr.jx2[i]]);
            }
            writeln!(w, "{}", format_row(&row))?;
        }
        Ok(())
    }
}

pub fn run_exact(cfg: &ScenarioConfig) -> Result<ExactReport> {
    with_context(cfg, run_exact_inner(cfg))
}

fn run_exact_inner(cfg: &ScenarioConfig) -> Result<ExactReport> {
    if cfg.model != ModelKind::Dephasing {
        return Err(Error::Config(format!(
            "model: exact solution needs dephasing, got {}",
            cfg.model
        )));
    }
    let Setup { sys, prep, grid } = setup(cfg)?;
    let bath = cfg.bath_spec().correlations()?;
    let rho0 = prepare_correlated(&sys, &prep, &bath, sys.jz())?.rho0;
    Ok(ExactReport {
        scenario: cfg.label(),
        times: grid.times(),
        curves: exact_curves(cfg, &sys, &prep, &grid, rho0)?,
        jx2: cfg.jx2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    Beta,
    S,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(SweepAxis::N),
            "beta" => Ok(SweepAxis::Beta),
            "s" => Ok(SweepAxis::S),
            _ => Err(Error::Config(format!("axis: expected N, beta or s; got '{s}'"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "N",
            SweepAxis::Beta => "beta",
            SweepAxis::S => "s",
        })
    }
}

impl SweepAxis {
    fn apply(&self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        match self {
            SweepAxis::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("N: must be a positive integer, got {value}")));
                }
                cfg.n = value as usize;
            }
            SweepAxis::Beta => cfg.beta = value,
            SweepAxis::S => cfg.s = value,
        }
        cfg.validate()
    }
}

/// `D` for each axis value; scenarios run in parallel, rows keep input order.
pub fn sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<(f64, f64)>> {
    values
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            c.name = Some(format!("{} {axis}={v}", cfg.label()));
            let r = axis.apply(&mut c, v).and_then(|_| run_scenario(&c));
            match r {
                Ok(rep) => Ok((v, rep.d_metric())),
                Err(e) => Err(Error::Scenario {
                    scenario: format!("{} {axis}={v}", cfg.label()),
                    source: Box::new(e),
                }),
            }
        })
        .collect()
}

pub fn write_sweep_csv(axis: SweepAxis, rows: &[(f64, f64)], mut w: impl Write) -> Result<()> {
    writeln!(w, "{axis},D")?;
    for (v, d) in rows {
        writeln!(w, "{},{}", v, format_value(*d))?;
    }
    Ok(())
}
