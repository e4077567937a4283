//! Command-line front end of the `vsc` binary.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure,
//! 3 verification failure.

pub mod config;
pub mod figures;
pub mod output;
pub mod run;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::params::derive;
use crate::scenarios::{detuning_sweep, linear_grid, SweepMeasure, SweepSpec};
use config::{RawConfig, RawOutput, RawParams, RawScenario, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vsc", version, about = "Molecular vibrations collectively coupled to one cavity mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print polariton frequencies, beat period and coupling regime.
    Derive(ParamArgs),
    /// Write a trajectory and its observables.
    Simulate(RunArgs),
    /// Tabulate the beat period against cavity detuning.
    Sweep(SweepArgs),
    /// Sample one molecule's phase-space trajectory at chosen times.
    PhaseSpace(PhaseArgs),
    /// Check the closed form against the oracle and the spectrum.
    Verify(VerifyArgs),
    /// Emit the datasets behind the figures.
    Figures(FigureArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ParamArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega_v: Option<f64>,
    /// Cavity frequency.
    #[arg(long)]
    omega: Option<f64>,
    /// Diamagnetic (collective coupling) frequency.
    #[arg(long)]
    omega_d: Option<f64>,
    /// Number of molecules.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ScenarioArgs {
    /// fully_excited or partially_activated.
    #[arg(long)]
    kind: Option<String>,
    /// Activation ratio; implies partial activation.
    #[arg(long)]
    beta: Option<f64>,
    /// Initial velocity spread in units of x0·omega_v.
    #[arg(long)]
    velocity_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory [default: $VSC_OUTPUT_DIR or ./vsc-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG line plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Time span in beat periods.
    #[arg(long)]
    span: Option<f64>,
    /// Samples per bare vibrational period.
    #[arg(long)]
    sampling: Option<usize>,
    /// Molecules written to the trajectory table.
    #[arg(long)]
    molecules: Option<usize>,
    /// Comma-separated subset of trajectory,observables,phase_space,energies.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    /// closed_form or oracle.
    #[arg(long)]
    engine: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Analytic,
    Trajectory,
    Both,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Lowest omega/omega_v.
    #[arg(long, default_value_t = 0.5)]
    from: f64,
    /// Highest omega/omega_v.
    #[arg(long, default_value_t = 2.0)]
    to: f64,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 150)]
    steps: usize,
    #[arg(long, value_enum, default_value = "analytic")]
    measure: MeasureArg,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct PhaseArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Molecule label, starting at 1.
    #[arg(long, default_value_t = 1)]
    molecule: usize,
    /// Comma-separated sample times.
    #[arg(long, value_delimiter = ',', default_value = "0,5,25")]
    times: Vec<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Ensemble size.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Shorter oracle runs.
    #[arg(long)]
    quick: bool,
    /// Also write the report to this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FigureArgs {
    /// Comma-separated figure ids (1a..1d, 2a..2e, 3a, 3b) or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    fig: Vec<String>,
    /// Comma-separated omega_d/omega_v values replacing the preset couplings.
    #[arg(long, value_delimiter = ',')]
    coupling: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

impl ParamArgs {
    fn raw(&self) -> Result<RawConfig> {
        let base = match &self.config {
            Some(path) => config::read_raw(path)?,
            None => RawConfig::default(),
        };
        let over = RawConfig {
            params: RawParams {
                omega_v: self.omega_v,
                omega: self.omega,
                omega_d: self.omega_d,
                n: self.n,
                mass: self.mass,
                x0: self.x0,
                si: None,
            },
            ..Default::default()
        };
        Ok(base.merge(over))
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let over = RawConfig {
            params: RawParams::default(),
            scenario: RawScenario {
                kind: self.scenario.kind.clone(),
                beta: self.scenario.beta,
                velocity_scale: self.scenario.velocity_scale,
                seed: self.scenario.seed,
            },
            output: RawOutput {
                span: self.span,
                sampling: self.sampling,
                outputs: self.outputs.clone(),
                dir: self.output.out.clone(),
                molecules: self.molecules,
                engine: self.engine.clone(),
                svg: self.output.svg.then_some(true),
            },
        };
        self.params.raw()?.merge(over).resolve()
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Rounds to 12 significant digits so printed values read cleanly.
fn sig12(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut impl Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match command {
        Command::Derive(args) => {
            let raw = args.raw()?;
            // scenario and output sections do not matter here
            let cfg = RawConfig {
                scenario: RawScenario::default(),
                output: RawOutput::default(),
                ..raw
            }
            .resolve()?;
            let p = cfg.params;
            let d = derive(&p)?;
            let rows: [(&str, String); 16] = [
                ("omega_v", sig12(p.omega_v).to_string()),
                ("omega", sig12(p.omega_c).to_string()),
                ("omega_d", sig12(p.omega_d).to_string()),
                ("n", p.n_molecules.to_string()),
                ("g", sig12(d.g).to_string()),
                ("omega_bar", sig12(d.omega_bar_sq.sqrt()).to_string()),
                ("alpha", sig12(d.alpha).to_string()),
                ("lambda", sig12(d.lambda).to_string()),
                ("omega_plus", sig12(d.omega_plus).to_string()),
                ("omega_minus", sig12(d.omega_minus).to_string()),
                ("gap", sig12(d.gap).to_string()),
                ("beat_period", sig12(d.beat_period).to_string()),
                ("rabi_splitting", sig12(d.vrs).to_string()),
                ("rabi_splitting_alt", sig12(d.vrs_alt).to_string()),
                ("coupling_ratio", sig12(d.vrs / p.omega_v).to_string()),
                ("regime", d.regime.as_str().to_string()),
            ];
            for (k, v) in rows {
                writeln!(out, "{k:<20}{v}").map_err(io)?;
            }
            if let Some(si) = cfg.si {
                let q = si.to_si();
                writeln!(out, "{:<20}{}", "omega_v_si_rad_s", q.omega_v).map_err(io)?;
                writeln!(out, "{:<20}{}", "omega_si_rad_s", q.omega_c).map_err(io)?;
                writeln!(out, "{:<20}{}", "omega_d_si_rad_s", q.omega_d).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let sim = run::simulate(&cfg)?;
            for path in run::write_simulation(&cfg, &sim)? {
                writeln!(out, "wrote {}", path.display()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let cfg = args.run.resolve()?;
            if !(args.from > 0.0 && args.to > args.from && args.steps > 0) {
                return Err(Error::InvalidInput("need 0 < --from < --to and --steps >= 1".into()));
            }
            let measure = match args.measure {
                MeasureArg::Analytic => SweepMeasure::Analytic,
                MeasureArg::Trajectory => SweepMeasure::FromTrajectory,
                MeasureArg::Both => SweepMeasure::Both,
            };
            let mut spec = SweepSpec::new(
                linear_grid(args.from, args.to, args.steps),
                cfg.params.omega_d,
                cfg.scenario.clone(),
                measure,
            );
            spec.span_periods = cfg.span;
            spec.samples_per_period = cfg.sampling;
            let rows = detuning_sweep(&spec, &cfg.params)?;
            let header = run::header_for(&cfg);
            let cols: Vec<String> = ["omega_ratio", "gap", "t_analytic", "t_measured", "envelope_min", "ok"]
                .map(String::from)
                .into();
            let table = output::csv_table(
                &header,
                &cols,
                rows.iter().map(|r| {
                    vec![
                        r.ratio,
                        r.gap,
                        r.t_analytic,
                        r.t_measured.unwrap_or(f64::NAN),
                        r.envelope_min.unwrap_or(f64::NAN),
                        if r.error.is_none() { 1.0 } else { 0.0 },
                    ]
                }),
            );
            for r in rows.iter().filter(|r| r.error.is_some()) {
                log::warn!("omega/omega_v = {}: {}", r.ratio, r.error.as_deref().unwrap_or(""));
            }
            let path = output::write(&cfg.output_dir, "sweep.csv", &table)?;
            writeln!(out, "wrote {}", path.display()).map_err(io)?;
            if cfg.svg {
                let xs: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
                let mut series = vec![("T analytic".to_string(), rows.iter().map(|r| r.t_analytic).collect())];
                if measure != SweepMeasure::Analytic {
                    series.push((
                        "T measured".into(),
                        rows.iter().map(|r| r.t_measured.unwrap_or(f64::NAN)).collect(),
                    ));
                }
                let svg = output::svg_plot("Beat period", "omega/omega_v", &xs, &series);
                let path = output::write(&cfg.output_dir, "sweep.svg", &svg)?;
                writeln!(out, "wrote {}", path.display()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::PhaseSpace(args) => {
            let cfg = args.run.resolve()?;
            if args.molecule == 0 {
                return Err(Error::InvalidInput("molecule labels start at 1".into()));
            }
            let ps = run::phase_space(&cfg, args.molecule - 1, &args.times)?;
            let path = output::write(&cfg.output_dir, "phase_space.csv", &run::phase_space_csv(&ps))?;
            writeln!(out, "wrote {}", path.display()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            if args.n < 2 {
                return Err(Error::InvalidInput("verify needs --n >= 2".into()));
            }
            let report = verify::run_verification(args.n, args.quick)?;
            let text = report.render();
            out.write_all(text.as_bytes()).map_err(io)?;
            if let Some(dir) = &args.out {
                output::write(dir, "verify.txt", &text)?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Figures(args) => {
            let ids: Vec<String> = if args.fig.iter().any(|f| f == "all") {
                figures::FIGURES.iter().map(|s| s.to_string()).collect()
            } else {
                args.fig.clone()
            };
            let dir = args.output.out.clone().unwrap_or_else(config::default_output_dir);
            for id in ids {
                let ds = figures::figure(id.trim(), args.coupling.as_deref(), args.seed)?;
                let path = output::write(&dir, &format!("{}.csv", ds.name), &ds.csv())?;
                writeln!(out, "wrote {}", path.display()).map_err(io)?;
                if args.output.svg {
                    let path = output::write(&dir, &format!("{}.svg", ds.name), &ds.svg())?;
                    writeln!(out, "wrote {}", path.display()).map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}
