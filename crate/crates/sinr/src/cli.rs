//! Command-line front end: orchestrates train → compress → decompress →
//! evaluate pipelines and emits reproducible reports.
//!
//! Contract:
//! - `sinr <command> [--flag value]...` with commands `train`, `compress`,
//!   `decompress`, `eval`, `sweep`, `diagnose`, `pipeline`.
//! - Exit codes: 0 success, 2 usage/validation error, 1 runtime failure.
//! - Config precedence: command-line flags > config file (`key=value` lines,
//!   `#` comments) > built-in defaults.
//! - Output files are written atomically (temp file + rename): a failed run
//!   leaves no partial artifacts behind.
//! - CSV outputs are UTF-8 with a header row.
//! - Every command is deterministic given its config; all randomness flows
//!   from `--seed` (training init) and `--master-seed` (codec dictionaries).
//! - The env var `SINR_THREADS` caps internal parallelism (see
//!   [`configure_threads`], called by the binary before dispatch).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::codec::{
    compress_inr, decompress_inr, encode_network_raw, CompressConfig, CompressReport,
    SparsitySelection, DEFAULT_REL_TOL,
};
use crate::inr::{
    coordinate_grid, init_network, train, weight_gaussianity, Activation, ActivationKind,
    Architecture, Network, TrainConfig,
};
use crate::signals::{
    bpp, display_db, iou, load_image, load_voxels, psnr, render_inr_image, render_inr_occupancy,
    ImageSignal, OccupancyGrid,
};
use crate::sparse::{sweep_s, CodingMode, CodingParams};
use crate::{Error, Result};

/// Occupancy decision threshold: network outputs strictly above this count
/// as occupied, matching binary {0, 1} targets split at the midpoint.
pub const OCCUPANCY_THRESHOLD: f64 = 0.5;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Compress,
    Decompress,
    Eval,
    Sweep,
    Diagnose,
    Pipeline,
}

impl Command {
    fn parse(token: &str) -> Option<Command> {
        match token {
            "train" => Some(Command::Train),
            "compress" => Some(Command::Compress),
            "decompress" => Some(Command::Decompress),
            "eval" => Some(Command::Eval),
            "sweep" => Some(Command::Sweep),
            "diagnose" => Some(Command::Diagnose),
            "pipeline" => Some(Command::Pipeline),
            _ => None,
        }
    }
}

/// Everything a command run needs, resolved from defaults, an optional
/// config file, and command-line flags (in that order of precedence).
/// Fields irrelevant to a command are simply unused.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// Primary input: signal file for train/pipeline, checkpoint for
    /// compress/sweep/diagnose, compressed artifact for decompress/eval.
    pub input: Option<PathBuf>,
    /// Primary output: checkpoint, compressed artifact, or CSV per command.
    pub output: Option<PathBuf>,
    /// Ground-truth signal for eval; optional for compress (enables bpp).
    pub reference: Option<PathBuf>,
    /// Per-epoch loss CSV path; defaults to the checkpoint path with a
    /// `.loss.csv` extension for train, and is skipped by pipeline if unset.
    pub loss_csv: Option<PathBuf>,
    pub activation: ActivationKind,
    pub hidden_layers: usize,
    pub width: usize,
    pub omega0: f64,
    pub sigma: f64,
    pub pe_levels: usize,
    pub epochs: usize,
    /// None picks the per-activation default learning rate.
    pub lr: Option<f64>,
    pub seed: u64,
    /// Fixed per-layer sparsity; mutually exclusive with `rel_tol`.
    pub s: Option<usize>,
    /// Auto-sweep tolerance; None and no `s` means auto at the default.
    pub rel_tol: Option<f64>,
    pub k2_factor: usize,
    pub bitwidth: u8,
    pub master_seed: u64,
    pub lossless: bool,
}

impl RunConfig {
    fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            input: None,
            output: None,
            reference: None,
            loss_csv: None,
            activation: ActivationKind::Sine,
            hidden_layers: 3,
            width: 128,
            omega0: 30.0,
            sigma: 10.0,
            pe_levels: 0,
            epochs: 2000,
            lr: None,
            seed: 0,
            s: None,
            rel_tol: None,
            k2_factor: CodingParams::default().k2_factor,
            bitwidth: 16,
            master_seed: 0,
            lossless: false,
        }
    }

    fn sparsity(&self) -> SparsitySelection {
        match self.s {
            Some(s) => SparsitySelection::Fixed(s),
            None => SparsitySelection::Auto { rel_tol: self.rel_tol.unwrap_or(DEFAULT_REL_TOL) },
        }
    }

    fn coding_params(&self) -> CodingParams {
        CodingParams { k2_factor: self.k2_factor, ..CodingParams::default() }
    }

    fn compress_config(&self) -> CompressConfig {
        CompressConfig {
            sparsity: self.sparsity(),
            coding: self.coding_params(),
            bitwidth: self.bitwidth,
            master_seed: self.master_seed,
            lossless: self.lossless,
        }
    }

    fn architecture_for(&self, signal: &Signal) -> Architecture {
        let (input_dim, output_dim) = signal.io_dims();
        let mut activation = Activation::new(self.activation);
        activation.omega0 = self.omega0;
        activation.sigma = self.sigma;
        Architecture {
            input_dim,
            output_dim,
            hidden_layers: self.hidden_layers,
            width: self.width,
            activation,
            pe_levels: self.pe_levels,
        }
    }

    fn train_config(&self) -> TrainConfig {
        let mut tc = TrainConfig::for_activation(self.activation);
        tc.epochs = self.epochs;
        if let Some(lr) = self.lr {
            tc.learning_rate = lr;
        }
        tc
    }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

/// A violation of the command-line contract itself (exit code 2), as opposed
/// to a failure while doing the work (exit code 1).
#[derive(Debug, PartialEq, Eq)]
pub struct UsageError(pub String);

pub fn usage() -> &'static str {
    "usage: sinr <command> [--flag value]...

commands:
  train       fit a network to a signal; writes a checkpoint and a loss CSV
  compress    sparse-code a checkpoint into a compressed artifact
  decompress  reconstruct a checkpoint from a compressed artifact
  eval        render a checkpoint/artifact against a reference signal (CSV)
  sweep       per-layer sparsity/error/size curves for a checkpoint (CSV)
  diagnose    per-layer weight moment diagnostics for a checkpoint (CSV)
  pipeline    train + compress + decompress + eval in one deterministic run

paths:
  --input PATH       signal (train/pipeline), checkpoint (compress/sweep/
                     diagnose), or compressed artifact (decompress/eval)
  --output PATH      checkpoint, artifact, or CSV, depending on the command
  --reference PATH   ground-truth signal (required by eval; optional for
                     compress, enables bits-per-pixel in the report)
  --loss-csv PATH    where train writes per-epoch loss (default: the
                     checkpoint path with extension .loss.csv)
  --config PATH      key=value file; flags override file entries

signals are recognized by extension: .pgm/.ppm images, .svox voxel grids

architecture (train, pipeline):
  --activation NAME  sine | gaussian | relu        (default sine)
  --hidden-layers N  hidden layer count            (default 3)
  --width N          hidden layer width            (default 128)
  --omega0 X         sine frequency scale          (default 30)
  --sigma X          gaussian sharpness            (default 10)
  --pe-levels N      positional-encoding levels    (default 0 = off)

training (train, pipeline):
  --epochs N         full-batch Adam epochs        (default 2000)
  --lr X             learning rate                 (default per activation)
  --seed N           weight-init seed              (default 0)

codec (compress, sweep, pipeline):
  --s N              fixed per-layer sparsity (conflicts with --rel-tol)
  --rel-tol X        auto-sweep error tolerance    (default 0.02)
  --k2-factor N      dictionary atoms per signal dimension (default 2)
  --bitwidth N       quantizer bits, 2..=16        (default 16)
  --master-seed N    dictionary seed               (default 0)
  --lossless         store sparse values as raw f32 instead of quantizing

environment:
  SINR_THREADS       caps the size of the internal thread pool

exit codes: 0 success, 2 usage/validation error, 1 runtime failure"
}

/// Splits raw arguments into (key, value) pairs without touching RunConfig,
/// so config-file entries can be applied first and flags second.
fn scan_flags(args: &[String]) -> std::result::Result<Vec<(String, String)>, UsageError> {
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(body) = arg.strip_prefix("--") else {
            return Err(UsageError(format!("unexpected positional argument '{arg}'")));
        };
        if body.is_empty() {
            return Err(UsageError("bare '--' is not a flag".into()));
        }
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        let key = key.replace('_', "-");
        let value = match inline {
            Some(v) => v,
            None if key == "lossless" || key == "help" => "true".to_string(),
            None => {
                i += 1;
                match args.get(i) {
                    Some(v) => v.clone(),
                    None => return Err(UsageError(format!("flag --{key} is missing its value"))),
                }
            }
        };
        pairs.push((key, value));
        i += 1;
    }
    Ok(pairs)
}

fn parse_usize(key: &str, value: &str) -> std::result::Result<usize, UsageError> {
    value
        .parse()
        .map_err(|_| UsageError(format!("--{key} expects an unsigned integer, got '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> std::result::Result<u64, UsageError> {
    value
        .parse()
        .map_err(|_| UsageError(format!("--{key} expects an unsigned integer, got '{value}'")))
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, UsageError> {
    let x: f64 = value
        .parse()
        .map_err(|_| UsageError(format!("--{key} expects a number, got '{value}'")))?;
    if !x.is_finite() {
        return Err(UsageError(format!("--{key} must be finite, got '{value}'")));
    }
    Ok(x)
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, UsageError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(UsageError(format!("--{key} expects true or false, got '{value}'"))),
    }
}

fn apply_pair(cfg: &mut RunConfig, key: &str, value: &str) -> std::result::Result<(), UsageError> {
    match key {
        "input" => cfg.input = Some(PathBuf::from(value)),
        "output" => cfg.output = Some(PathBuf::from(value)),
        "reference" => cfg.reference = Some(PathBuf::from(value)),
        "loss-csv" => cfg.loss_csv = Some(PathBuf::from(value)),
        "activation" => {
            cfg.activation = match value.to_ascii_lowercase().as_str() {
                "sine" => ActivationKind::Sine,
                "gaussian" => ActivationKind::Gaussian,
                "relu" => ActivationKind::Relu,
                _ => {
                    return Err(UsageError(format!(
                        "--activation expects sine, gaussian, or relu, got '{value}'"
                    )))
                }
            }
        }
        "hidden-layers" => cfg.hidden_layers = parse_usize(key, value)?,
        "width" => cfg.width = parse_usize(key, value)?,
        "omega0" => cfg.omega0 = parse_f64(key, value)?,
        "sigma" => cfg.sigma = parse_f64(key, value)?,
        "pe-levels" => cfg.pe_levels = parse_usize(key, value)?,
        "epochs" => cfg.epochs = parse_usize(key, value)?,
        "lr" => cfg.lr = Some(parse_f64(key, value)?),
        "seed" => cfg.seed = parse_u64(key, value)?,
        "s" => cfg.s = Some(parse_usize(key, value)?),
        "rel-tol" => cfg.rel_tol = Some(parse_f64(key, value)?),
        "k2-factor" => cfg.k2_factor = parse_usize(key, value)?,
        "bitwidth" => {
            let b = parse_usize(key, value)?;
            if !(2..=16).contains(&b) {
                return Err(UsageError(format!("--bitwidth must be in 2..=16, got {b}")));
            }
            cfg.bitwidth = b as u8;
        }
        "master-seed" => cfg.master_seed = parse_u64(key, value)?,
        "lossless" => cfg.lossless = parse_bool(key, value)?,
        _ => return Err(UsageError(format!("unknown flag --{key}"))),
    }
    Ok(())
}

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped,
/// underscores in keys are interchangeable with dashes.
fn parse_config_file(path: &Path) -> std::result::Result<Vec<(String, String)>, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(UsageError(format!(
                "config file {} line {}: expected key=value, got '{}'",
                path.display(),
                lineno + 1,
                line
            )));
        };
        pairs.push((key.trim().replace('_', "-"), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Full argument resolution: command word, config file (if any), flags.
/// Returns Ok(None) when the invocation only asked for help.
pub fn parse_args(args: &[String]) -> std::result::Result<Option<RunConfig>, UsageError> {
    let Some(first) = args.first() else {
        return Err(UsageError("missing command".into()));
    };
    if first == "help" || first == "--help" || first == "-h" {
        return Ok(None);
    }
    let Some(command) = Command::parse(first) else {
        return Err(UsageError(format!("unknown command '{first}'")));
    };
    let pairs = scan_flags(&args[1..])?;
    if pairs.iter().any(|(k, _)| k == "help") {
        return Ok(None);
    }

    let mut cfg = RunConfig::new(command);
    // Config file first, then flags, so flags win.
    for (key, value) in pairs.iter().filter(|(k, _)| k == "config") {
        let _ = key;
        for (k, v) in parse_config_file(Path::new(value))? {
            if k == "config" {
                return Err(UsageError("config files cannot nest via a config key".into()));
            }
            apply_pair(&mut cfg, &k, &v)?;
        }
    }
    for (key, value) in pairs.iter().filter(|(k, _)| k != "config") {
        apply_pair(&mut cfg, key, value)?;
    }

    validate_required(&cfg)?;
    Ok(Some(cfg))
}

/// Presence and exclusivity checks, before any file is touched.
fn validate_required(cfg: &RunConfig) -> std::result::Result<(), UsageError> {
    let need = |field: &Option<PathBuf>, flag: &str| {
        if field.is_none() {
            Err(UsageError(format!(
                "{} requires {flag}",
                command_name(cfg.command)
            )))
        } else {
            Ok(())
        }
    };
    need(&cfg.input, "--input")?;
    match cfg.command {
        Command::Eval => {
            need(&cfg.output, "--output")?;
            need(&cfg.reference, "--reference")?;
        }
        _ => need(&cfg.output, "--output")?,
    }
    if cfg.s.is_some() && cfg.rel_tol.is_some() {
        return Err(UsageError(
            "--s and --rel-tol are mutually exclusive; pick fixed or auto sparsity".into(),
        ));
    }
    Ok(())
}

fn command_name(command: Command) -> &'static str {
    match command {
        Command::Train => "train",
        Command::Compress => "compress",
        Command::Decompress => "decompress",
        Command::Eval => "eval",
        Command::Sweep => "sweep",
        Command::Diagnose => "diagnose",
        Command::Pipeline => "pipeline",
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Builds the global thread pool honoring `SINR_THREADS`. Call once, before
/// any parallel work; later calls are harmless no-ops.
pub fn configure_threads() {
    if let Ok(raw) = std::env::var("SINR_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring SINR_THREADS value '{raw}' (want an integer >= 1)"),
        }
    }
}

/// Parses and runs a full invocation, mapping outcomes to the exit-code
/// contract: 0 success, 2 usage error, 1 runtime failure.
pub fn run(args: &[String]) -> i32 {
    match parse_args(args) {
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{}", usage());
            2
        }
        Ok(None) => {
            println!("{}", usage());
            0
        }
        Ok(Some(cfg)) => match execute(&cfg) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    }
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        Command::Train => cmd_train(cfg),
        Command::Compress => cmd_compress(cfg),
        Command::Decompress => cmd_decompress(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Diagnose => cmd_diagnose(cfg),
        Command::Pipeline => cmd_pipeline(cfg),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// The two signal modalities, dispatched on file extension.
enum Signal {
    Image(ImageSignal),
    Voxels(OccupancyGrid),
}

impl Signal {
    /// (coordinate dimension, output channels) for the fitting network.
    fn io_dims(&self) -> (usize, usize) {
        match self {
            Signal::Image(img) => (2, img.channels()),
            Signal::Voxels(_) => (3, 1),
        }
    }

    /// Grid dimensions in `coordinate_grid` order.
    fn grid_dims(&self) -> Vec<usize> {
        match self {
            Signal::Image(img) => vec![img.height(), img.width()],
            Signal::Voxels(g) => {
                let (nx, ny, nz) = g.dims();
                vec![nx, ny, nz]
            }
        }
    }

    fn to_targets(&self) -> crate::mat::Mat {
        match self {
            Signal::Image(img) => img.to_targets(),
            Signal::Voxels(g) => g.to_targets(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Signal::Image(img) => {
                format!("image {}x{}x{}", img.width(), img.height(), img.channels())
            }
            Signal::Voxels(g) => {
                let (nx, ny, nz) = g.dims();
                format!("voxels {nx}x{ny}x{nz}")
            }
        }
    }
}

fn load_signal(path: &Path) -> Result<Signal> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "ppm" => Ok(Signal::Image(load_image(path)?)),
        "svox" => Ok(Signal::Voxels(load_voxels(path)?)),
        _ => Err(Error::invalid(format!(
            "unsupported signal file {}: expected a .pgm/.ppm image or .svox voxel grid",
            path.display()
        ))),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network> {
    let bytes = read_bytes(path)?;
    decompress_inr(&bytes)
        .map_err(|e| Error::format(format!("while decoding {}: {e}", path.display())))
}

/// Writes via a sibling temp file + rename so a failure never leaves a
/// partial artifact at `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut name = path.file_name().map(|n| n.to_os_string()).ok_or_else(|| {
        Error::invalid(format!("output path {} has no file name", path.display()))
    })?;
    name.push(format!(".tmp.{}", std::process::id()));
    let tmp = path.with_file_name(name);
    let attempt = fs::write(&tmp, bytes).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = attempt {
        let _ = fs::remove_file(&tmp);
        return Err(Error::invalid(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

fn require(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::invalid(format!("{flag} is required")))
}

fn mode_name(mode: CodingMode) -> &'static str {
    match mode {
        CodingMode::PerVector => "per-vector",
        CodingMode::Flattened => "flattened",
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::invalid(format!("{name}: {e}")))
}

/// Renders the network in the reference signal's geometry and returns the
/// quality metric: ("psnr_db", PSNR) for images, ("iou", IoU) for voxels.
fn evaluate_against(net: &Network, signal: &Signal) -> Result<(&'static str, f64)> {
    match signal {
        Signal::Image(img) => {
            if net.arch.input_dim != 2 || net.arch.output_dim != img.channels() {
                return Err(Error::invalid(format!(
                    "modality mismatch: network maps {} -> {} but the reference is an \
                     image needing 2 -> {}",
                    net.arch.input_dim,
                    net.arch.output_dim,
                    img.channels()
                )));
            }
            let rendered = render_inr_image(net, img.width(), img.height())?;
            Ok(("psnr_db", display_db(psnr(img, &rendered)?)))
        }
        Signal::Voxels(grid) => {
            if net.arch.input_dim != 3 || net.arch.output_dim != 1 {
                return Err(Error::invalid(format!(
                    "modality mismatch: network maps {} -> {} but the reference is a \
                     voxel grid needing 3 -> 1",
                    net.arch.input_dim, net.arch.output_dim
                )));
            }
            let rendered = render_inr_occupancy(net, grid.dims(), OCCUPANCY_THRESHOLD)?;
            Ok(("iou", iou(grid, &rendered)?))
        }
    }
}

/// Bits per grid cell from the artifact's real on-disk size: per pixel for
/// images, per voxel for grids.
fn bits_per_cell(file_bytes: u64, signal: &Signal) -> Result<(&'static str, f64)> {
    match signal {
        Signal::Image(img) => Ok(("bpp", bpp(file_bytes, img.width(), img.height())?)),
        Signal::Voxels(g) => {
            let (nx, ny, nz) = g.dims();
            let cells = (nx * ny * nz) as f64;
            Ok(("bpv", 8.0 * file_bytes as f64 / cells))
        }
    }
}

fn print_compress_report(report: &CompressReport) {
    for layer in &report.layers {
        println!(
            "layer {} mode {} k1 {} k2 {} s {} rel_err {} stored_scalars {}",
            layer.layer,
            mode_name(layer.mode),
            layer.k1,
            layer.k2,
            layer.s,
            layer.worst_rel_err,
            layer.stored_scalars
        );
    }
    println!("t_s {}", report.t_s);
    println!("t_sinr {}", report.t_sinr);
    println!("stored_scalars {}", report.stored_scalars);
    println!("container_bytes {}", report.container_bytes);
    println!("compressed_bytes {}", report.bytes);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Shared by train and pipeline: fit a fresh network to the signal, write
/// the loss CSV if requested, and return the trained network.
fn train_on_signal(cfg: &RunConfig, signal: &Signal, loss_csv: Option<&Path>) -> Result<Network> {
    let arch = cfg.architecture_for(signal);
    let mut net = init_network(&arch, cfg.seed)?;
    let coords = coordinate_grid(&signal.grid_dims())?;
    let targets = signal.to_targets();
    let result = train(&mut net, &coords, &targets, &cfg.train_config())?;
    if let Some(path) = loss_csv {
        let mut csv = String::from("epoch,loss\n");
        for (epoch, loss) in result.loss_history.iter().enumerate() {
            let _ = writeln!(csv, "{epoch},{loss}");
        }
        write_atomic(path, csv.as_bytes())?;
        println!("loss_csv {}", path.display());
    }
    Ok(net)
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let signal = load_signal(&input)?;
    println!("signal {} {}", input.display(), signal.describe());

    let loss_csv = cfg
        .loss_csv
        .clone()
        .unwrap_or_else(|| output.with_extension("loss.csv"));
    let net = train_on_signal(cfg, &signal, Some(&loss_csv))?;

    let bytes = encode_network_raw(&net, true, cfg.bitwidth)?;
    write_atomic(&output, &bytes)?;
    println!("checkpoint {}", output.display());
    println!("checkpoint_bytes {}", bytes.len());

    // Report quality from the artifact actually written, not the in-memory
    // network, so this number is exactly what eval will reproduce.
    let reloaded = load_network(&output)?;
    let (metric, value) = evaluate_against(&reloaded, &signal)?;
    println!("final_{metric} {value}");
    Ok(())
}

fn cmd_compress(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let net = load_network(&input)?;
    let (bytes, report) = compress_inr(&net, &cfg.compress_config())?;
    write_atomic(&output, &bytes)?;
    println!("input {}", input.display());
    println!("output {}", output.display());
    print_compress_report(&report);
    if let Some(reference) = &cfg.reference {
        let signal = load_signal(reference)?;
        let (unit, value) = bits_per_cell(bytes.len() as u64, &signal)?;
        println!("{unit} {value}");
    }
    Ok(())
}

fn cmd_decompress(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let net = load_network(&input)?;
    let bytes = encode_network_raw(&net, true, cfg.bitwidth)?;
    write_atomic(&output, &bytes)?;
    println!("checkpoint {}", output.display());
    println!("checkpoint_bytes {}", bytes.len());
    Ok(())
}

fn cmd_eval(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let reference = require(&cfg.reference, "--reference")?;
    let signal = load_signal(&reference)?;
    let net = load_network(&input)?;
    let file_bytes = fs::metadata(&input)
        .map_err(|e| Error::invalid(format!("cannot stat {}: {e}", input.display())))?
        .len();

    let (metric, value) = evaluate_against(&net, &signal)?;
    let (unit, density) = bits_per_cell(file_bytes, &signal)?;

    let mut csv = String::from("metric,value\n");
    let _ = writeln!(csv, "{metric},{value}");
    let _ = writeln!(csv, "{unit},{density}");
    let _ = writeln!(csv, "file_bytes,{file_bytes}");
    write_atomic(&output, csv.as_bytes())?;

    println!("{metric} {value}");
    println!("{unit} {density}");
    println!("file_bytes {file_bytes}");
    println!("metrics_csv {}", output.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let net = load_network(&input)?;
    let rel_tol = cfg.rel_tol.unwrap_or(DEFAULT_REL_TOL);
    let params = cfg.coding_params();

    let mut csv = String::from("layer,s,worst_rel_err,projected_bytes\n");
    for (i, w) in net.weights.iter().enumerate() {
        // Same per-layer seed rule as compression, so chosen s transfers.
        let outcome = sweep_s(w, cfg.master_seed ^ i as u64, rel_tol, &params)?;
        for point in &outcome.curve {
            let _ = writeln!(csv, "{i},{},{},{}", point.s, point.worst_rel_err, point.payload_bytes);
        }
        println!(
            "layer {i} mode {} k1 {} k2 {} chosen_s {} worst_rel_err {} met {}",
            mode_name(outcome.mode),
            outcome.k1,
            outcome.k2,
            outcome.s,
            outcome.worst_rel_err,
            outcome.met
        );
    }
    write_atomic(&output, csv.as_bytes())?;
    println!("sweep_csv {}", output.display());
    Ok(())
}

fn cmd_diagnose(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let net = load_network(&input)?;

    let mut csv = String::from("layer,count,mean,std,skewness,excess_kurtosis\n");
    for m in weight_gaussianity(&net) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            m.layer, m.count, m.mean, m.std, m.skewness, m.excess_kurtosis
        );
        println!(
            "layer {} count {} mean {} std {} skewness {} excess_kurtosis {}",
            m.layer, m.count, m.mean, m.std, m.skewness, m.excess_kurtosis
        );
    }
    write_atomic(&output, csv.as_bytes())?;
    println!("moments_csv {}", output.display());
    Ok(())
}

fn cmd_pipeline(cfg: &RunConfig) -> Result<()> {
    let input = require(&cfg.input, "--input")?;
    let output = require(&cfg.output, "--output")?;
    let signal = stage("train", load_signal(&input))?;
    println!("signal {} {}", input.display(), signal.describe());

    let net = stage("train", train_on_signal(cfg, &signal, cfg.loss_csv.as_deref()))?;
    let (metric, before) = stage("train", evaluate_against(&net, &signal))?;
    println!("{metric}_uncompressed {before}");

    // Baseline: the same container machinery with dense raw weights,
    // quantized and entropy coded — the size to beat.
    let baseline = stage("compress", encode_network_raw(&net, false, cfg.bitwidth))?;
    println!("baseline_bytes {}", baseline.len());

    let (bytes, report) = stage("compress", compress_inr(&net, &cfg.compress_config()))?;
    stage("compress", write_atomic(&output, &bytes))?;
    println!("artifact {}", output.display());
    print_compress_report(&report);
    println!("size_ratio {}", bytes.len() as f64 / baseline.len() as f64);

    let decoded = stage("decompress", decompress_inr(&bytes))?;
    let (metric_after, after) = stage("eval", evaluate_against(&decoded, &signal))?;
    println!("{metric_after}_decoded {after}");
    match signal {
        Signal::Image(_) => println!("psnr_drop_db {}", before - after),
        Signal::Voxels(_) => println!("iou_drop {}", before - after),
    }
    let (unit, density) = stage("eval", bits_per_cell(bytes.len() as u64, &signal))?;
    println!("{unit} {density}");
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
