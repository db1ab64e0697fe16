//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Every entry point takes the same `key = value` scenario text the CLI
//! reads, so the page and the command line share one parser and one set of
//! error messages.

use initcorr::bath::BathSpec;
use initcorr::harness::{parse_config, presets, run_exact, run_scenario};
use wasm_bindgen::prelude::*;

/// Curves for one run, flattened for JS.
#[wasm_bindgen]
pub struct Curves {
    times: Vec<f64>,
    corr: Vec<f64>,
    uncorr: Vec<f64>,
    exact_corr: Vec<f64>,
    exact_uncorr: Vec<f64>,
    summary: String,
}

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn corr(&self) -> Vec<f64> {
        self.corr.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn uncorr(&self) -> Vec<f64> {
        self.uncorr.clone()
    }

    /// Empty unless the model is pure dephasing.
    #[wasm_bindgen(getter, js_name = exactCorr)]
    pub fn exact_corr(&self) -> Vec<f64> {
        self.exact_corr.clone()
    }

    #[wasm_bindgen(getter, js_name = exactUncorr)]
    pub fn exact_uncorr(&self) -> Vec<f64> {
        self.exact_uncorr.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

pub fn simulate_text(config: &str) -> initcorr::Result<Curves> {
    let rep = run_scenario(&parse_config(config)?)?;
    let (exact_corr, exact_uncorr) = match &rep.exact {
        Some(e) => (e.corr.jx.clone(), e.uncorr.jx.clone()),
        None => (Vec::new(), Vec::new()),
    };
    Ok(Curves {
        summary: rep.summary(),
        times: rep.times,
        corr: rep.corr.jx,
        uncorr: rep.uncorr.jx,
        exact_corr,
        exact_uncorr,
    })
}

pub fn exact_text(config: &str) -> initcorr::Result<Curves> {
    let rep = run_exact(&parse_config(config)?)?;
    Ok(Curves {
        summary: format!("scenario {}: exact pure-dephasing solution\n", rep.scenario),
        times: rep.times,
        corr: Vec::new(),
        uncorr: Vec::new(),
        exact_corr: rep.curves.corr.jx,
        exact_uncorr: rep.curves.uncorr.jx,
    })
}

/// `[τ, Re C(τ), Im C(τ)]` triples on `points` nodes of `[0, tau_max]`.
pub fn bath_correlation_text(config: &str, tau_max: f64, points: usize) -> initcorr::Result<Vec<f64>> {
    let cfg = parse_config(config)?;
    let spec: BathSpec = cfg.bath_spec();
    let bath = spec.correlations()?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let tau = tau_max * i as f64 / (points - 1) as f64;
        let c = bath.real_corr(tau);
        out.extend([tau, c.re, c.im]);
    }
    Ok(out)
}

fn js(e: initcorr::Error) -> JsError {
    JsError::new(&format!("error[{}]: {e}", e.kind()))
}

/// Master equation with and without initial correlations, plus the exact
/// curves for pure dephasing.
#[wasm_bindgen]
pub fn simulate(config: &str) -> Result<Curves, JsError> {
    simulate_text(config).map_err(js)
}

/// Exact pure-dephasing curves only.
#[wasm_bindgen(js_name = exactDephasing)]
pub fn exact_dephasing(config: &str) -> Result<Curves, JsError> {
    exact_text(config).map_err(js)
}

#[wasm_bindgen(js_name = bathCorrelation)]
pub fn bath_correlation(config: &str, tau_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    bath_correlation_text(config, tau_max, points).map_err(js)
}

/// Scenario text for a preset, for seeding the editor.
#[wasm_bindgen(js_name = presetConfig)]
pub fn preset_config(name: &str) -> Result<String, JsError> {
    presets::get(name).map(|c| c.to_config_text()).map_err(js)
}

#[wasm_bindgen(js_name = presetNames)]
pub fn preset_names() -> Vec<String> {
    presets::names().map(str::to_owned).collect()
}
