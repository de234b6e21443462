//! Command-line front end: sweeps, figure presets, landscape fits and
//! configuration checks. Output files land in `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use giant_atom::config::{env_overrides, validate_config_with, ConfigError, RunConfig, PRESETS};
use giant_atom::landscape::{fit_landscape, FitOptions, FitParam};
use giant_atom::sweep::{self, run_preset, run_sweep, SweepOutput};
use giant_atom::units;

#[derive(Parser)]
#[command(name = "giant-atom", version, about = "Giant-atom relaxation and driven-dissipation simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file; defaults reproduce the reference device.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for sampled quantities (overrides solver.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Extra `section.key=value` overrides, applied after the environment.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Effective decay rate over the sweep frequency axis.
    Landscape {
        #[arg(long)]
        start_ghz: Option<f64>,
        #[arg(long)]
        stop_ghz: Option<f64>,
        #[arg(long)]
        count: Option<u64>,
    },
    /// Undriven decay trace of the excited state.
    Relax {
        #[arg(long)]
        qubit_ghz: Option<f64>,
        #[arg(long, value_enum)]
        solver: Option<Solver>,
        #[arg(long)]
        t_max_ns: Option<f64>,
        #[arg(long)]
        t_count: Option<u64>,
    },
    /// Driven qubit: finite-duration evolution or the steady state.
    Driven {
        #[arg(long, value_enum, default_value_t = Mode::Evolve)]
        mode: Mode,
        #[arg(long)]
        qubit_ghz: Option<f64>,
        #[arg(long)]
        rabi_mhz: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        detuning_mhz: Option<f64>,
        #[arg(long)]
        duration_us: Option<f64>,
    },
    /// Steady-state coherence and purity over the (Rabi, detuning) grid.
    Map {
        #[arg(long)]
        qubit_ghz: Option<f64>,
    },
    /// Fit the landscape model to measured rates.
    Fit {
        /// CSV with `omega_ghz` and `gamma_eff_mhz` columns.
        #[arg(long)]
        samples: PathBuf,
        /// Free parameters (default: all).
        #[arg(long, value_delimiter = ',')]
        free: Vec<String>,
    },
    /// Regenerate the data behind one figure.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        name: String,
    },
    /// Check a configuration and print the resolved values.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Series,
    Dde,
    ModeOracle,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Evolve,
    Steady,
}

struct ConfigErrors(Vec<ConfigError>);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(ConfigErrors(list)) = e.downcast_ref::<ConfigErrors>() {
                eprintln!("invalid configuration ({} problem{}):", list.len(), if list.len() == 1 { "" } else { "s" });
                for err in list {
                    eprintln!("  {err}");
                }
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        }
    }
}

impl std::fmt::Debug for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} configuration errors", self.0.len())
    }
}

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msgs: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&msgs.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

fn push<T: ToString>(ov: &mut Vec<(String, String)>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        ov.push((key.to_string(), v.to_string()));
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

fn load_config(g: &Global, verb: &[(String, String)]) -> anyhow::Result<RunConfig> {
    let text = match &g.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut ov = env_overrides(std::env::vars());
    for s in &g.set {
        let Some((k, v)) = s.split_once('=') else { bail!("--set expects KEY=VALUE, got '{s}'") };
        ov.push((k.trim().to_string(), v.trim().to_string()));
    }
    push(&mut ov, "solver.seed", g.seed);
    ov.extend_from_slice(verb);
    validate_config_with(&text, ov).map_err(|e| ConfigErrors(e).into())
}

fn verb_overrides(cmd: &Command) -> Vec<(String, String)> {
    let mut ov = Vec::new();
    match cmd {
        Command::Landscape { start_ghz, stop_ghz, count } => {
            ov.push(("sweep.quantity".into(), quote("gamma_eff")));
            push(&mut ov, "sweep.freq_start_ghz", *start_ghz);
            push(&mut ov, "sweep.freq_stop_ghz", *stop_ghz);
            push(&mut ov, "sweep.freq_count", *count);
        }
        Command::Relax { qubit_ghz, solver, t_max_ns, t_count } => {
            ov.push(("sweep.quantity".into(), quote("pe_trace")));
            push(&mut ov, "sweep.qubit_ghz", *qubit_ghz);
            let name = solver.map(|s| match s {
                Solver::Series => quote("series"),
                Solver::Dde => quote("dde"),
                Solver::ModeOracle => quote("mode_oracle"),
            });
            push(&mut ov, "solver.relax_solver", name);
            push(&mut ov, "sweep.t_max_ns", *t_max_ns);
            push(&mut ov, "sweep.t_count", *t_count);
        }
        Command::Driven { mode, qubit_ghz, rabi_mhz, detuning_mhz, duration_us } => {
            push(&mut ov, "drive.rabi_mhz", *rabi_mhz);
            push(&mut ov, "drive.detuning_mhz", *detuning_mhz);
            push(&mut ov, "drive.duration_us", *duration_us);
            push(&mut ov, "sweep.qubit_ghz", *qubit_ghz);
            match mode {
                Mode::Evolve => ov.push(("sweep.quantity".into(), quote("evolve"))),
                Mode::Steady => ov.push(("sweep.quantity".into(), quote("steady_pe"))),
            }
        }
        Command::Map { qubit_ghz } => {
            ov.push(("sweep.quantity".into(), quote("map")));
            push(&mut ov, "sweep.qubit_ghz", *qubit_ghz);
        }
        Command::Preset { name } => ov.push(("sweep.preset".into(), quote(name))),
        Command::Fit { .. } | Command::Validate => {}
    }
    ov
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    let mut cfg = load_config(g, &verb_overrides(&cli.command))?;
    if let Command::Driven { mode: Mode::Steady, .. } = cli.command {
        // single-point frequency axis at the qubit
        let q = cfg.sweep.qubit_ghz;
        cfg = load_config(g, &[
            verb_overrides(&cli.command),
            vec![
                ("sweep.freq_start_ghz".into(), q.to_string()),
                ("sweep.freq_stop_ghz".into(), q.to_string()),
                ("sweep.freq_count".into(), "1".into()),
            ],
        ]
        .concat())?;
    }
    let threads = if g.threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { g.threads };

    let output = match &cli.command {
        Command::Validate => {
            print!("{}", cfg.render());
            println!("\n# config_hash = {}", cfg.hash());
            println!("# SI values");
            for (k, v) in cfg.si_echo() {
                println!("#   {k} = {v}");
            }
            return Ok(());
        }
        Command::Fit { samples, free } => fit(&cfg, samples, free)?,
        Command::Preset { name } => sweep::with_threads(threads, || run_preset(name, &cfg))??,
        _ => sweep::with_threads(threads, || run_sweep(&cfg))??,
    };
    output.write_to(&g.out).with_context(|| format!("writing to {}", g.out.display()))?;
    for f in &output.files {
        println!("{}", g.out.join(&f.name).display());
    }
    if output.masked > 0 {
        eprintln!("warning: {} grid cells masked (see mask_reason column)", output.masked);
    }
    Ok(())
}

fn read_samples(path: &Path) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("{} has no '{name}' column", path.display()));
    let (iw, ig) = (col("omega_ghz")?, col("gamma_eff_mhz")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> anyhow::Result<f64> {
            rec.get(j).unwrap_or("").parse::<f64>().with_context(|| format!("row {}: bad number", i + 1))
        };
        let (w, y) = (parse(iw)?, parse(ig)?);
        if y.is_finite() {
            out.push((units::ghz(w), units::mhz(y)));
        }
    }
    Ok(out)
}

fn fit(cfg: &RunConfig, samples: &Path, free: &[String]) -> anyhow::Result<SweepOutput> {
    let data = read_samples(samples)?;
    let mut opts = FitOptions::default();
    if !free.is_empty() {
        opts.free = free
            .iter()
            .map(|n| {
                FitParam::ALL.into_iter().find(|p| p.name() == n).with_context(|| {
                    let names: Vec<&str> = FitParam::ALL.iter().map(|p| p.name()).collect();
                    format!("unknown fit parameter '{n}' (expected {})", names.join(", "))
                })
            })
            .collect::<anyhow::Result<_>>()?;
    }
    let report = fit_landscape(&data, &cfg.landscape, &opts)?;
    if !report.converged {
        log::warn!("fit stopped after {} iterations without converging", report.iterations);
    }
    if !report.delay_identifiable {
        log::warn!("delay is not identifiable from these samples");
    }
    let mut toml = String::from("[landscape]\n");
    for (k, v) in report.landscape.to_config_values() {
        match k {
            "n_pairs" => toml.push_str(&format!("{k} = {}\n", v as u64)),
            _ => toml.push_str(&format!("{k} = {v:?}\n")),
        }
    }
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    println!("fit: residual {:.3e}, {} iterations, converged = {}", report.residual_norm, report.iterations, report.converged);
    for (k, v) in &report.params {
        println!("  {k} = {v}");
    }
    Ok(SweepOutput {
        files: vec![
            sweep::OutputFile { name: "fit.json".into(), contents: json },
            sweep::OutputFile { name: "fit.landscape.toml".into(), contents: toml },
        ],
        masked: 0,
    })
}
