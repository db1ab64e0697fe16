//! Named parameter sets for the published figures.

use crate::error::{Error, Result};

use super::config::{ModelKind, ScenarioConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> ScenarioConfig,
}

impl Preset {
    pub fn config(&self) -> ScenarioConfig {
        let mut cfg = (self.build)();
        cfg.name = Some(self.name.to_string());
        cfg
    }
}

fn dephasing(n: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(ModelKind::Dephasing, n);
    c.t_max = 2.0;
    c
}

fn tunneling(model: ModelKind, n: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(model, n);
    c.eps0 = 4.0;
    c.eps = 2.5;
    c.delta = 0.5;
    c.delta0 = 0.5;
    c
}

fn boson(n: usize) -> ScenarioConfig {
    tunneling(ModelKind::Boson, n)
}

fn with_beta(mut c: ScenarioConfig, beta: f64) -> ScenarioConfig {
    c.beta = beta;
    c
}

fn with_jx2(mut c: ScenarioConfig) -> ScenarioConfig {
    c.jx2 = true;
    c
}

fn sub_ohmic(mut c: ScenarioConfig) -> ScenarioConfig {
    c.s = 0.5;
    c
}

pub static PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        summary: "pure dephasing, N = 1, exact and master-equation curves",
        build: || dephasing(1),
    },
    Preset {
        name: "fig2",
        summary: "pure dephasing, N = 4",
        build: || dephasing(4),
    },
    Preset {
        name: "fig3",
        summary: "pure dephasing, N = 10",
        build: || dephasing(10),
    },
    Preset {
        name: "fig4",
        summary: "bosonic bath with tunneling, N = 2",
        build: || boson(2),
    },
    Preset {
        name: "fig5",
        summary: "bosonic bath with tunneling, N = 4",
        build: || boson(4),
    },
    Preset {
        name: "fig6",
        summary: "bosonic bath with tunneling, N = 10",
        build: || boson(10),
    },
    Preset {
        name: "fig7",
        summary: "as fig6 with beta = 0.5",
        build: || with_beta(boson(10), 0.5),
    },
    Preset {
        name: "fig8",
        summary: "as fig6 with beta = 1.5",
        build: || with_beta(boson(10), 1.5),
    },
    Preset {
        name: "fig9",
        summary: "second moment jx2, N = 4",
        build: || with_jx2(boson(4)),
    },
    Preset {
        name: "fig10",
        summary: "second moment jx2, N = 10",
        build: || with_jx2(boson(10)),
    },
    Preset {
        name: "fig11",
        summary: "sub-Ohmic bath s = 0.5, N = 4",
        build: || sub_ohmic(boson(4)),
    },
    Preset {
        name: "fig12",
        summary: "sub-Ohmic bath s = 0.5, N = 10",
        build: || sub_ohmic(boson(10)),
    },
    Preset {
        name: "fig13",
        summary: "spin environment coupled through Jx, N = 4",
        build: || tunneling(ModelKind::SpinEnv, 4),
    },
    Preset {
        name: "fig14",
        summary: "spin environment coupled through Jx, N = 10",
        build: || tunneling(ModelKind::SpinEnv, 10),
    },
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn get(name: &str) -> Result<ScenarioConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}'; available: {}",
                names().collect::<Vec<_>>().join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    #[test]
    fn every_preset_round_trips_and_validates() {
        for p in PRESETS {
            let direct = p.config();
            direct.validate().unwrap();
            let parsed = parse_config(&format!("preset = {}", p.name)).unwrap();
            assert_eq!(parsed, direct, "{}", p.name);
        }
    }

    #[test]
    fn caption_parameters() {
        let f1 = get("fig1").unwrap();
        assert_eq!(
            (f1.model, f1.n, f1.eps, f1.eps0, f1.delta, f1.g, f1.beta, f1.omega_c, f1.s),
            (ModelKind::Dephasing, 1, 4.0, 4.0, 0.0, 0.05, 1.0, 5.0, 1.0)
        );
        let f4 = get("fig4").unwrap();
        assert_eq!(
            (f4.model, f4.n, f4.eps0, f4.eps, f4.delta, f4.delta0, f4.g),
            (ModelKind::Boson, 2, 4.0, 2.5, 0.5, 0.5, 0.05)
        );
        let f11 = get("fig11").unwrap();
        assert_eq!((f11.n, f11.s, f11.eps), (4, 0.5, 2.5));
        assert_eq!(get("fig14").unwrap().model, ModelKind::SpinEnv);
    }

    #[test]
    fn unknown_preset_lists_names() {
        let msg = get("fig99").unwrap_err().to_string();
        assert!(msg.contains("fig1,") && msg.contains("fig14"));
    }
}
