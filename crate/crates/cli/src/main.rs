// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qamp_cli::config::{parse_input, OneOrMany};
use qamp_cli::{presets, CliError, CliResult, CommandKind, Format, RunConfig};
use qamp_core::oracle::LeakagePolicy;
use qamp_core::phase_space::QuasiOrder;
use qamp_core::InputField;

/// Transient quantum amplifier: gain, noise, photon statistics, phase-space
/// grids and a master-equation cross-check.
///
/// Exit status: 0 success, 1 output could not be written, 2 configuration
/// error, 3 numeric failure (quadrature, truncation or step control).
/// QAMP_THREADS caps the worker threads used for parameter sweeps.
#[derive(Parser)]
#[command(name = "qamp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a preset or config file as given
    Run(Common),
    /// Gain G(tau) and gain factor W(tau)
    Gain(Common),
    /// Noise kernel, added noise and output fluctuations
    Noise(Common),
    /// Mandel Q and the time it turns non-negative
    Mandel(Common),
    /// Quadrature variances of a squeezed input
    Squeezing(Common),
    /// Quasiprobability grids at selected times
    Wigner {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Temperature, entropy and population ratio for a thermal input
    Thermal {
        #[command(flatten)]
        common: Common,
        /// Emit the entropy slope [S(14) - S(10)]/4 per A' instead
        #[arg(long)]
        slopes: bool,
    },
    /// Truncated Fock-space master equation compared with the closed forms
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// List the shipped presets
    Presets,
}

#[derive(Args)]
struct Common {
    /// Shipped configuration to start from (see `qamp presets`)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// JSON configuration file to start from
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; CSV output also writes a .json sidecar
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Comma-separated A' values, one cell each
    #[arg(long, value_delimiter = ',')]
    aprime: Option<Vec<f64>>,
    /// Medium occupation n_B = B'/A'
    #[arg(long, conflicts_with = "bprime", allow_hyphen_values = true)]
    nb: Option<f64>,
    /// Thermal floor B'
    #[arg(long, allow_hyphen_values = true)]
    bprime: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau0: Option<f64>,
    /// Field angular frequency in s^-1 (temperatures in kelvin)
    #[arg(long)]
    omega0: Option<f64>,
    /// omega0 / epsilon; 0 is the rotating frame
    #[arg(long, allow_hyphen_values = true)]
    phase_rate: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// coherent:RE,IM | fock:N | squeezed:R,PHI[,RE,IM] | thermal:NBAR
    #[arg(long, value_parser = parse_input, allow_hyphen_values = true)]
    input: Option<InputField>,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated times
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Points per axis
    #[arg(long)]
    points: Option<usize>,
    /// Half width of the grid around the output mean
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum OrderArg {
    Q,
    Wigner,
    P,
}

#[derive(Args)]
struct OracleArgs {
    /// Fock levels
    #[arg(long)]
    dim: Option<usize>,
    /// Fixed RK4 step
    #[arg(long)]
    step: Option<f64>,
    /// Keep integrating past the leakage threshold and flag the run
    #[arg(long)]
    record_leakage: bool,
    #[arg(long)]
    leakage_threshold: Option<f64>,
}

fn base(common: &Common, command: Option<CommandKind>) -> CliResult<RunConfig> {
    let loaded = if let Some(name) = &common.preset {
        Some(presets::load(name)?)
    } else if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Some(RunConfig::from_json(&text)?)
    } else {
        None
    };
    match (loaded, command) {
        (Some(cfg), Some(cmd)) if cfg.command != cmd => Err(CliError::config(format!(
            "configuration is for `{}`, not `{}`",
            cfg.command.name(),
            cmd.name()
        ))),
        (Some(cfg), _) => Ok(cfg),
        (None, Some(cmd)) => Ok(RunConfig::default_for(cmd)),
        (None, None) => Err(CliError::config("run needs --preset or --config")),
    }
}

fn apply(common: &Common, cfg: &mut RunConfig) {
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
        // keep the extension in step with a preset's default file name
        if common.out.is_none() {
            if let Some(p) = &cfg.output.path {
                cfg.output.path = Some(p.with_extension(match f {
                    Format::Csv => "csv",
                    Format::Json => "json",
                }));
            }
        }
    }
    let p = &mut cfg.params;
    if let Some(a) = &common.aprime {
        p.a_prime = OneOrMany::Many(a.clone());
    }
    if let Some(n) = common.nb {
        p.n_b = Some(n);
        p.b_prime = None;
    }
    if let Some(b) = common.bprime {
        p.b_prime = Some(b);
        p.n_b = None;
    }
    if let Some(t) = common.tau0 {
        p.tau0 = t;
    }
    if let Some(w) = common.omega0 {
        p.omega0 = Some(w);
    }
    if let Some(r) = common.phase_rate {
        p.phase_rate = r;
    }
    if let Some(t) = common.tau_start {
        cfg.tau.start = t;
    }
    if let Some(t) = common.tau_end {
        cfg.tau.end = Some(t);
    }
    if let Some(n) = common.samples {
        cfg.tau.samples = n;
    }
    if let Some(i) = common.input {
        cfg.input = Some(i);
    }
}

fn build(cmd: Cmd) -> CliResult<Option<RunConfig>> {
    let cfg = match cmd {
        Cmd::Presets => {
            for p in presets::PRESETS {
                println!("{:<12} {}", p.name, p.summary);
            }
            return Ok(None);
        }
        Cmd::Run(common) => {
            let mut cfg = base(&common, None)?;
            apply(&common, &mut cfg);
            cfg
        }
        Cmd::Gain(c) | Cmd::Noise(c) | Cmd::Mandel(c) | Cmd::Squeezing(c) => {
            unreachable!("handled by simple(): {}", c.preset.is_some())
        }
        Cmd::Wigner { common, grid } => {
            let mut cfg = base(&common, Some(CommandKind::Wigner))?;
            apply(&common, &mut cfg);
            let w = &mut cfg.wigner;
            if let Some(t) = grid.times {
                w.times = Some(t);
            }
            if let Some(n) = grid.points {
                w.points = n;
            }
            if let Some(h) = grid.half_width {
                w.half_width = Some(h);
            }
            if let Some(o) = grid.order {
                w.order = match o {
                    OrderArg::Q => QuasiOrder::Q,
                    OrderArg::Wigner => QuasiOrder::Wigner,
                    OrderArg::P => QuasiOrder::P,
                };
            }
            cfg
        }
        Cmd::Thermal { common, slopes } => {
            let mut cfg = base(&common, Some(CommandKind::Thermal))?;
            apply(&common, &mut cfg);
            if slopes {
                cfg.thermal.slope_table = true;
            }
            cfg
        }
        Cmd::Oracle { common, oracle } => {
            let mut cfg = base(&common, Some(CommandKind::Oracle))?;
            apply(&common, &mut cfg);
            let o = &mut cfg.oracle;
            if let Some(d) = oracle.dim {
                o.dim = Some(d);
            }
            if let Some(s) = oracle.step {
                o.step = Some(s);
            }
            if let Some(t) = oracle.leakage_threshold {
                o.leakage_threshold = t;
            }
            if oracle.record_leakage {
                o.leakage_policy = LeakagePolicy::Record;
            }
            cfg
        }
    };
    Ok(Some(cfg))
}

fn simple(kind: CommandKind, common: &Common) -> CliResult<Option<RunConfig>> {
    let mut cfg = base(common, Some(kind))?;
    apply(common, &mut cfg);
    Ok(Some(cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.cmd {
        Cmd::Gain(c) => simple(CommandKind::Gain, &c),
        Cmd::Noise(c) => simple(CommandKind::Noise, &c),
        Cmd::Mandel(c) => simple(CommandKind::Mandel, &c),
        Cmd::Squeezing(c) => simple(CommandKind::Squeezing, &c),
        other => build(other),
    };
    let result = cfg.and_then(|cfg| match cfg {
        Some(cfg) => qamp_cli::execute(cfg).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        None => Ok(()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qamp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
