//! Shipped configurations, one per figure of the reference data set.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub json: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        summary: "gain G(tau) for A' in {2, 3, 4, 5.5}, tau0 = 5",
        json: include_str!("../presets/fig1.json"),
    },
    Preset {
        name: "fig2",
        summary: "Mandel Q of an amplified Fock state n0 = 5, A' in {0.05, 1}, tau0 = 0, n_B = 0.01",
        json: include_str!("../presets/fig2.json"),
    },
    Preset {
        name: "fig3",
        summary: "quadrature variances of squeezed vacuum r = 1, A' = 0.1, n_B = 0.1, tau0 = 4",
        json: include_str!("../presets/fig3.json"),
    },
    Preset {
        name: "fig3-wigner",
        summary: "Wigner grids of the fig3 state at tau in {0, 4, 8}",
        json: include_str!("../presets/fig3-wigner.json"),
    },
    Preset {
        name: "fig4",
        summary: "temperature in kelvin, omega0 = 1e14 s^-1, n_B = 1e3, A' in {0.05, 1}, tau0 = 8",
        json: include_str!("../presets/fig4.json"),
    },
    Preset {
        name: "fig5",
        summary: "entropy slope [S(14) - S(10)]/4 against A', tau0 = 8, n_B = 10",
        json: include_str!("../presets/fig5.json"),
    },
    Preset {
        name: "signal",
        summary: "noise kernel and signal width for a coherent input alpha0 = 10",
        json: include_str!("../presets/signal.json"),
    },
];

pub fn load(name: &str) -> CliResult<RunConfig> {
    let preset = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })?;
    RunConfig::from_json(preset.json)
}
