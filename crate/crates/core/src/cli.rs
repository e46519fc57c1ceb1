//! Command-line front end. Data goes to stdout or `--out`; diagnostics go to
//! stderr. Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::correlation::{conditional_correlation, delta_grid, tau_grid, mollow_correlation, correlation_closed};
use crate::error::{Error, Result};
use crate::field::weight_tensor;
use crate::model::{sideband_rate, stationary_state, SystemParams};
use crate::spectrum::{
    audit, find_peaks, spectrum_field, spectrum_mollow_printed, spectrum_numeric, sweep_peak_heights, AuditGrids,
    SpectrumSeries, MAX_PEAK_STEP,
};
use crate::trajectory::{ensemble, estimate_stationary, TrajectoryConfig};

pub const SCHEMA: &str = "resfluor/v1";

#[derive(Parser, Debug)]
#[command(name = "resfluor", version, allow_negative_numbers = true, about = "Resonance-fluorescence spectra of a driven two-level atom")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    /// Decay rate Γ in rad/s.
    #[arg(long, global = true, default_value_t = 1e8)]
    pub gamma: f64,
    /// Rabi frequency in units of Γ.
    #[arg(long, global = true, default_value_t = 4.0)]
    pub rabi: f64,
    /// Transition frequency ω0 in rad/s.
    #[arg(long, global = true, default_value_t = 1e15)]
    pub omega0: f64,
    /// Correlation horizon in units of 1/Γ.
    #[arg(long, global = true, default_value_t = 40.0)]
    pub tau_max: f64,
    #[arg(long, global = true, default_value_t = 4000)]
    pub tau_steps: usize,
    /// Half-width of the detuning grid in units of Γ.
    #[arg(long, global = true, default_value_t = 32.0)]
    pub delta_span: f64,
    #[arg(long, global = true, default_value_t = 2001)]
    pub delta_steps: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Divide spectra by their value at δ = 0.
    #[arg(long, global = true)]
    pub normalized: bool,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Field spectrum (printed closed form, or the numeric transform with --oracle).
    Spectrum {
        #[arg(long)]
        oracle: bool,
    },
    /// Mollow spectrum (printed closed form, or the regression transform with --oracle).
    Mollow {
        #[arg(long)]
        oracle: bool,
    },
    /// Conditional-measurement correlation envelope g(τ).
    Correlation,
    /// Peak report of both printed spectra (JSON).
    Peaks,
    /// Printed spectra at δ = 0 over a range of Rabi frequencies.
    Sweep {
        /// Smallest Ω/Γ.
        #[arg(long, default_value_t = 0.01)]
        rabi_min: f64,
        /// Largest Ω/Γ.
        #[arg(long, default_value_t = 8.0)]
        rabi_max: f64,
        #[arg(long, default_value_t = 800)]
        points: usize,
    },
    /// Field weight tensor w_ij at a detector position.
    Field {
        /// Detector position `x,y,z` in metres.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [1e-6, 0.0, 0.0])]
        position: Vec<f64>,
    },
    /// Quantum-jump estimate of the stationary state and emission rate.
    Trajectory {
        #[arg(long, default_value_t = 100)]
        trajectories: usize,
        /// Trajectory length in units of 1/Γ.
        #[arg(long, default_value_t = 1000.0)]
        duration: f64,
    },
    /// Printed-formula audit (JSON).
    Audit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Mollow { .. } => "mollow",
            Command::Correlation => "correlation",
            Command::Peaks => "peaks",
            Command::Sweep { .. } => "sweep",
            Command::Field { .. } => "field",
            Command::Trajectory { .. } => "trajectory",
            Command::Audit => "audit",
        }
    }

    fn extra_params(&self) -> Value {
        match self {
            Command::Spectrum { oracle } | Command::Mollow { oracle } => json!({ "oracle": oracle }),
            Command::Sweep { rabi_min, rabi_max, points } => {
                json!({ "rabi_min": rabi_min, "rabi_max": rabi_max, "points": points })
            }
            Command::Field { position } => json!({ "position": position }),
            Command::Trajectory { trajectories, duration } => {
                json!({ "trajectories": trajectories, "duration": duration })
            }
            _ => json!({}),
        }
    }
}

/// A table for CSV output or a JSON value.
enum Payload {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<f64>>, extra: Value },
    Document(Value),
}

/// Renders the command output as text.
pub fn run(cli: &Cli) -> Result<String> {
    let args = &cli.run;
    let params = SystemParams::from_relative(args.gamma, args.rabi, args.omega0)?;
    let (payload, effective) = execute(&cli.command, args, &params)?;
    let mut echo = serde_json::to_value(&effective).expect("serialisable arguments");
    if let (Value::Object(map), Value::Object(extra)) = (&mut echo, cli.command.extra_params()) {
        map.extend(extra);
    }
    render(cli.command.name(), args.format, &echo, payload)
}

fn execute(command: &Command, args: &RunArgs, params: &SystemParams) -> Result<(Payload, RunArgs)> {
    let g = params.gamma();
    let mut effective = args.clone();
    let tau = || tau_grid(args.tau_max / g, args.tau_steps);
    let delta = |steps: usize| delta_grid(args.delta_span * g, steps);
    let spectrum_table = |s: SpectrumSeries| -> Result<Payload> {
        let s = if args.normalized { s.normalize()? } else { s };
        Ok(Payload::Table {
            columns: vec!["delta", "S"],
            rows: s.delta.iter().zip(&s.values).map(|(d, v)| vec![*d, *v]).collect(),
            extra: json!({}),
        })
    };
    let payload = match command {
        Command::Spectrum { oracle } => {
            let grid = delta(args.delta_steps)?;
            let s = if *oracle {
                spectrum_numeric(&correlation_closed(params, &tau()?)?, &grid, params)?
            } else {
                spectrum_field(params, &grid)?
            };
            spectrum_table(s)?
        }
        Command::Mollow { oracle } => {
            let grid = delta(args.delta_steps)?;
            let s = if *oracle {
                spectrum_numeric(&mollow_correlation(params, &tau()?)?, &grid, params)?
            } else {
                spectrum_mollow_printed(params, &grid)?
            };
            spectrum_table(s)?
        }
        Command::Correlation => {
            let env = conditional_correlation(params, &tau()?)?;
            Payload::Table {
                columns: vec!["tau", "g"],
                rows: env.tau.iter().zip(&env.values).map(|(t, v)| vec![*t, v.re]).collect(),
                extra: json!({ "carrier": env.carrier, "persistent_offset": env.persistent_offset.re }),
            }
        }
        Command::Peaks => {
            // the peak finder needs a step of at most Γ/50
            let needed = (2.0 * args.delta_span / MAX_PEAK_STEP).ceil() as usize + 1;
            let steps = args.delta_steps.max(needed | 1);
            if steps != args.delta_steps {
                log::info!("delta_steps raised from {} to {steps} for peak resolution", args.delta_steps);
                effective.delta_steps = steps;
            }
            let grid = delta(steps)?;
            let field = find_peaks(&spectrum_field(params, &grid)?)?;
            let mollow = find_peaks(&spectrum_mollow_printed(params, &grid)?)?;
            Payload::Document(json!({ "mu": sideband_rate(params).mu, "field": field, "mollow": mollow }))
        }
        Command::Sweep { rabi_min, rabi_max, points } => {
            if !(rabi_max > rabi_min) || *rabi_min < 0.0 || *points < 2 {
                return Err(Error::InvalidParameter("sweep needs 0 <= rabi_min < rabi_max and points >= 2".into()));
            }
            let list: Vec<f64> = (0..*points)
                .map(|i| g * (rabi_min + (rabi_max - rabi_min) * i as f64 / (*points - 1) as f64))
                .collect();
            let rows = sweep_peak_heights(params, &list)?;
            Payload::Table {
                columns: vec!["rabi", "S_peak", "SMol_peak"],
                rows: rows.iter().map(|r| vec![r.rabi, r.field_peak, r.mollow_peak]).collect(),
                extra: json!({}),
            }
        }
        Command::Field { position } => {
            if position.len() != 3 {
                return Err(Error::InvalidParameter(format!("--position needs three components, got {}", position.len())));
            }
            let x = [position[0], position[1], position[2]];
            let w = weight_tensor(x, params.omega0())?;
            let mut rows = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    rows.push(vec![i as f64, j as f64, w.tensor[i][j]]);
                }
            }
            Payload::Table { columns: vec!["i", "j", "w"], rows, extra: json!({ "units": "m^-3" }) }
        }
        Command::Trajectory { trajectories, duration } => {
            let config = TrajectoryConfig::standard(params, duration / g);
            let runs = ensemble(params, config, args.seed, *trajectories)?;
            let est = estimate_stationary(params, &runs)?;
            let exact = stationary_state(params);
            let rate = g * (1.0 - exact.p00);
            Payload::Table {
                columns: vec!["quantity", "estimate", "stderr", "exact"],
                rows: vec![
                    vec![0.0, est.state.p00, est.state_stderr[0], exact.p00],
                    vec![1.0, est.state.re01, est.state_stderr[1], exact.re01],
                    vec![2.0, est.state.im01, est.state_stderr[2], exact.im01],
                    vec![3.0, est.jump_rate, est.jump_rate_stderr, rate],
                ],
                extra: json!({ "quantities": ["p00", "re01", "im01", "jump_rate"] }),
            }
        }
        Command::Audit => Payload::Document(serde_json::to_value(audit(params, AuditGrids::defaults(params))?).expect("serialisable report")),
    };
    Ok((payload, effective))
}

fn render(command: &str, format: Format, echo: &Value, payload: Payload) -> Result<String> {
    match (format, payload) {
        (Format::Csv, Payload::Table { columns, rows, extra }) => {
            let mut out = String::new();
            let mut comment = format!("# {SCHEMA} command={command}");
            for (k, v) in echo.as_object().into_iter().flatten().chain(extra.as_object().into_iter().flatten()) {
                let _ = write!(comment, " {k}={}", v.to_string().replace(' ', ""));
            }
            out.push_str(&comment);
            out.push('\n');
            out.push_str(&columns.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        (Format::Json, Payload::Table { columns, rows, extra }) => {
            let mut data = serde_json::Map::new();
            for (k, name) in columns.iter().enumerate() {
                data.insert(name.to_string(), rows.iter().map(|r| r[k]).collect::<Vec<f64>>().into());
            }
            if let Value::Object(extra) = extra {
                data.extend(extra);
            }
            envelope(command, echo, Value::Object(data))
        }
        // documents are JSON in either format
        (_, Payload::Document(doc)) => envelope(command, echo, doc),
    }
}

fn envelope(command: &str, echo: &Value, data: Value) -> Result<String> {
    let doc = json!({ "schema": SCHEMA, "command": command, "params": echo, "data": data });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
