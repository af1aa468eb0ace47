//! Command-line surface over the library: steady states, spectra, preset
//! sweeps, oracle comparisons, and machine-readable provenance.
//!
//! Exit codes: 0 success, 2 validation failure, 3 model degeneracy or
//! numerical failure, 4 I/O failure, 5 resource limits (Hilbert-space cap).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use autler_cavity::bloch;
use autler_cavity::error::{Error, Result};
use autler_cavity::oracle::{atomic_marginal, oracle_steady_state, FullModelConfig, OracleReport};
use autler_cavity::params::{ModelParams, PartialParams};
use autler_cavity::spectrum::{
    default_grid, extract_peaks, spectrum_trace, write_trace_csv, SpectrumTrace,
};
use autler_cavity::sweeps;

#[derive(Parser)]
#[command(
    name = "autler-cavity",
    version,
    about = "Absorption spectrum of a V-type atom coupled to a lossy thermal cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reduced steady state and print the atomic moments.
    SteadyState(SteadyStateArgs),
    /// Compute a spectrum trace, write it as CSV, and print the peak table.
    Spectrum(SpectrumArgs),
    /// Run a figure preset and write its CSV/JSON outputs.
    Sweep(SweepArgs),
    /// Compare the reduced steady state against the joint-model oracle.
    OracleCompare(OracleCompareArgs),
    /// Preset registry queries.
    Preset(PresetArgs),
}

/// Parameter entry shared by the computing subcommands. Flags mirror the
/// config-file keys; a flag overrides the same key from --config.
#[derive(Args, Clone)]
struct ParamFlags {
    /// Config file with one key=value per line ('#' starts a comment).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    g1_re: Option<f64>,
    #[arg(long)]
    g1_im: Option<f64>,
    #[arg(long)]
    g2_re: Option<f64>,
    #[arg(long)]
    g2_im: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    omega21: Option<f64>,
    #[arg(long)]
    n_thermal: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    d1_re: Option<f64>,
    #[arg(long)]
    d1_im: Option<f64>,
    #[arg(long)]
    d2_re: Option<f64>,
    #[arg(long)]
    d2_im: Option<f64>,
}

impl ParamFlags {
    fn as_partial(&self) -> PartialParams {
        PartialParams {
            g1_re: self.g1_re,
            g1_im: self.g1_im,
            g2_re: self.g2_re,
            g2_im: self.g2_im,
            kappa: self.kappa,
            delta: self.delta,
            omega21: self.omega21,
            n_thermal: self.n_thermal,
            eta: self.eta,
            d1_re: self.d1_re,
            d1_im: self.d1_im,
            d2_re: self.d2_re,
            d2_im: self.d2_im,
        }
    }

    /// Layering: preset (if any) under config file under flags.
    fn resolve(&self, preset: Option<&str>) -> Result<ModelParams> {
        let mut acc = match preset {
            Some(name) => partial_from(sweeps::preset(name)?.params),
            None => PartialParams::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            acc = acc.merged_with(PartialParams::parse_config(&text)?);
        }
        let params = acc.merged_with(self.as_partial()).finalize()?;
        if let Some(warning) = params.bad_cavity_warning() {
            eprintln!("warning: {warning}");
        }
        Ok(params)
    }
}

fn partial_from(p: ModelParams) -> PartialParams {
    PartialParams {
        g1_re: Some(p.g1.re),
        g1_im: Some(p.g1.im),
        g2_re: Some(p.g2.re),
        g2_im: Some(p.g2.im),
        kappa: Some(p.kappa),
        delta: Some(p.delta),
        omega21: Some(p.omega21),
        n_thermal: Some(p.n_thermal),
        eta: Some(p.eta),
        d1_re: Some(p.d1.re),
        d1_im: Some(p.d1.im),
        d2_re: Some(p.d2.re),
        d2_im: Some(p.d2.im),
    }
}

#[derive(Args)]
struct SteadyStateArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Also write the state as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write the run manifest to this path.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Figure preset supplying the parameter set (flags still override).
    #[arg(long)]
    preset: Option<String>,
    /// Grid start; requires --omega-max and --omega-steps.
    #[arg(long)]
    omega_min: Option<f64>,
    /// Grid end; requires --omega-min and --omega-steps.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Number of grid points; without the omega flags a default grid
    /// covering both sidebands is used.
    #[arg(long)]
    omega_steps: Option<usize>,
    /// CSV destination.
    #[arg(long, value_name = "PATH", default_value = "spectrum.csv")]
    output: PathBuf,
    /// Run manifest destination (default: next to the CSV).
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Preset to run (see `preset list`).
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    preset: Option<String>,
    /// Run every registered preset.
    #[arg(long)]
    all: bool,
    /// Output directory for CSV/JSON files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (0 = automatic; AUTLER_CAVITY_WORKERS overrides the
    /// default).
    #[arg(long)]
    workers: Option<usize>,
    /// Run manifest destination (default: manifest.json in --out-dir).
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct OracleCompareArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Fock cutoff of the oracle run.
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    /// Second cutoff for the truncation-convergence delta.
    #[arg(long, default_value_t = 25)]
    n_max_check: usize,
    /// Allow thermal occupations above 2 (large Fock spaces, slow).
    #[arg(long)]
    force: bool,
    /// With eta != 1, skip the oracle and report the reduced state only.
    #[arg(long)]
    force_reduced_only: bool,
    /// Also write the report as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write the run manifest to this path.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    #[command(subcommand)]
    command: PresetCommand,
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Print the registered preset names.
    List,
}

/// Everything needed to reconstruct a run. The timestamp records when; all
/// other fields determine the outputs bit-exactly.
#[derive(serde::Serialize)]
struct RunManifest {
    subcommand: String,
    version: String,
    timestamp_unix_seconds: u64,
    params: Option<ModelParams>,
    settings: Map<String, Value>,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl RunManifest {
    fn new(subcommand: &str, params: Option<ModelParams>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: autler_cavity::VERSION.to_string(),
            timestamp_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            params,
            settings: Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.settings.insert(key.to_string(), value);
    }

    fn record_path(list: &mut Vec<String>, path: &Path) {
        list.push(path.display().to_string());
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SteadyState(args) => cmd_steady_state(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleCompare(args) => cmd_oracle_compare(args),
        Command::Preset(args) => match args.command {
            PresetCommand::List => {
                for name in sweeps::PRESET_NAMES {
                    println!("{name}");
                }
                Ok(())
            }
        },
    }
}

fn cmd_steady_state(args: SteadyStateArgs) -> Result<()> {
    let params = args.params.resolve(None)?;
    let state = bloch::steady_state(&params)?;
    // Populations lie in [0, 1], so 12 decimals carry 12 significant digits;
    // the coherence can be arbitrarily small and stays in e-notation.
    println!("p0    = {:.12}", state.p0);
    println!("p1    = {:.12}", state.p1);
    println!("p2    = {:.12}", state.p2);
    println!("coh12 = {:.11e} + {:.11e}i", state.coh12.re, state.coh12.im);

    let mut manifest = RunManifest::new("steady-state", Some(params));
    if let Some(config) = &args.params.config {
        RunManifest::record_path(&mut manifest.inputs, config);
    }
    if let Some(path) = &args.json {
        let mut bytes = serde_json::to_vec_pretty(&state)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        RunManifest::record_path(&mut manifest.outputs, path);
    }
    if let Some(path) = &args.manifest {
        manifest.write(path)?;
    }
    Ok(())
}

fn build_grid(args: &SpectrumArgs, params: &ModelParams) -> Result<Vec<f64>> {
    match (args.omega_min, args.omega_max, args.omega_steps) {
        (None, None, None) => default_grid(params),
        (Some(lo), Some(hi), Some(steps)) => {
            if steps == 0 {
                return Err(Error::InvalidGrid {
                    message: "omega grid needs at least one point".to_string(),
                });
            }
            if steps == 1 {
                return Ok(vec![lo]);
            }
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidGrid {
                    message: format!("omega range [{lo}, {hi}] is not increasing"),
                });
            }
            Ok((0..steps)
                .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
                .collect())
        }
        _ => Err(Error::InvalidGrid {
            message: "give all of --omega-min, --omega-max, --omega-steps or none".to_string(),
        }),
    }
}

fn print_peaks(trace: &SpectrumTrace) {
    match extract_peaks(trace) {
        Ok(peaks) if peaks.is_empty() => println!("peaks: none found"),
        Ok(peaks) => {
            println!("peaks (center, height, fwhm):");
            for p in peaks {
                println!("  {:+.6e}  {:+.6e}  {:.6e}", p.center, p.height, p.fwhm);
            }
        }
        Err(e) => println!("peaks: not measurable on this grid ({e})"),
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let params = args.params.resolve(args.preset.as_deref())?;
    let grid = build_grid(&args, &params)?;
    let trace = spectrum_trace(&params, &grid)?;

    let mut file = std::fs::File::create(&args.output)?;
    write_trace_csv(&trace, &mut file)?;
    println!("wrote {} points to {}", grid.len(), args.output.display());
    print_peaks(&trace);

    let mut manifest = RunManifest::new("spectrum", Some(params));
    if let Some(preset) = &args.preset {
        manifest.set("preset", json!(preset));
    }
    manifest.set(
        "grid",
        json!({
            "omega_min": grid.first(),
            "omega_max": grid.last(),
            "points": grid.len(),
            "explicit": args.omega_min.is_some(),
        }),
    );
    if let Some(config) = &args.params.config {
        RunManifest::record_path(&mut manifest.inputs, config);
    }
    RunManifest::record_path(&mut manifest.outputs, &args.output);
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.output.with_extension("manifest.json"));
    manifest.write(&manifest_path)?;
    Ok(())
}

fn default_workers() -> usize {
    std::env::var("AUTLER_CAVITY_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let workers = args.workers.unwrap_or_else(default_workers);
    let names: Vec<&str> = if args.all {
        sweeps::PRESET_NAMES.to_vec()
    } else {
        vec![args.preset.as_deref().expect("clap enforces presence")]
    };

    let mut manifest = RunManifest::new("sweep", None);
    manifest.set("presets", json!(names));
    manifest.set("workers", json!(workers));
    for name in &names {
        let result = sweeps::run_preset(name, workers)?;
        for path in sweeps::write_outputs(&result, &args.out_dir)? {
            println!("wrote {}", path.display());
            RunManifest::record_path(&mut manifest.outputs, &path);
        }
    }
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.out_dir.join("manifest.json"));
    manifest.write(&manifest_path)?;
    Ok(())
}

/// Absolute and relative gaps for one scalar quantity; the relative gap is
/// omitted when the reference is zero.
fn deviation_entry(oracle_value: f64, reduced_value: f64) -> Value {
    let abs = (oracle_value - reduced_value).abs();
    let rel = if reduced_value != 0.0 {
        Some(abs / reduced_value.abs())
    } else {
        None
    };
    json!({ "abs": abs, "rel": rel })
}

fn cmd_oracle_compare(args: OracleCompareArgs) -> Result<()> {
    let params = args.params.resolve(None)?;
    let reduced = bloch::steady_state(&params)?;

    if params.eta != 1.0 && !args.force_reduced_only {
        return Err(Error::UnsupportedEta { eta: params.eta });
    }
    if params.n_thermal > 2.0 && !args.force {
        return Err(Error::InvalidParameter {
            name: "n_thermal".to_string(),
            message: format!(
                "N = {} needs a Fock cutoff far beyond the default; pass --force to accept \
                 the cost",
                params.n_thermal
            ),
        });
    }

    let mut report = json!({
        "reduced": reduced,
        "oracle": Value::Null,
        "deviation": Value::Null,
        "convergence": Value::Null,
    });
    if params.eta == 1.0 {
        let config = FullModelConfig::new(params, args.n_max);
        let solution = oracle_steady_state(&config)?;
        let atom = atomic_marginal(&solution.rho);
        report["oracle"] = serde_json::to_value(OracleReport::new(&config, &solution))?;
        report["deviation"] = json!({
            "p0": deviation_entry(atom.p0, reduced.p0),
            "p1": deviation_entry(atom.p1, reduced.p1),
            "p2": deviation_entry(atom.p2, reduced.p2),
            "coh12_abs": (atom.coh12 - reduced.coh12).norm(),
        });
        if args.n_max_check > args.n_max {
            let finer = FullModelConfig::new(params, args.n_max_check);
            let atom_finer = atomic_marginal(&oracle_steady_state(&finer)?.rho);
            let delta = (atom.p0 - atom_finer.p0)
                .abs()
                .max((atom.p1 - atom_finer.p1).abs())
                .max((atom.p2 - atom_finer.p2).abs())
                .max((atom.coh12 - atom_finer.coh12).norm());
            report["convergence"] = json!({
                "n_max": args.n_max,
                "n_max_check": args.n_max_check,
                "max_marginal_change": delta,
            });
        }
    }

    let pretty = serde_json::to_string_pretty(&report)?;
    println!("{pretty}");

    let mut manifest = RunManifest::new("oracle-compare", Some(params));
    manifest.set("n_max", json!(args.n_max));
    manifest.set("n_max_check", json!(args.n_max_check));
    manifest.set("force", json!(args.force));
    manifest.set("force_reduced_only", json!(args.force_reduced_only));
    if let Some(config) = &args.params.config {
        RunManifest::record_path(&mut manifest.inputs, config);
    }
    if let Some(path) = &args.json {
        std::fs::write(path, format!("{pretty}\n"))?;
        RunManifest::record_path(&mut manifest.outputs, path);
    }
    if let Some(path) = &args.manifest {
        manifest.write(path)?;
    }
    Ok(())
}
