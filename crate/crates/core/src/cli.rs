//! Command-line front end: `simulate`, `sweep`, `oracle` and `compare`.
//!
//! Every command resolves a [`RunSpec`] from defaults, an optional JSON config
//! file (`--config`) and command-line flags, in that order of precedence. The
//! resolved spec is echoed as the first line of every output (`# spec {...}`
//! for CSV, a `spec` field for JSON); either form can be passed back through
//! `--config` to reproduce the run.
//!
//! Exit codes: 0 success, 1 invalid spec, 2 state space over capacity,
//! 3 `compare` failed its threshold.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    replicate_seed, run, run_from, JsonlEventWriter, RunOptions, RunSummary, SampleSchedule,
};
use crate::error::{param, Error, Result};
use crate::model::{Horizon, ModelParams, RingConfiguration};
use crate::moving::MovingDistribution;
use crate::observables::{q_l, MetricsSample};
use crate::oracle::{build_generator, mc_vs_exact_with, point_mass, product_law, OracleReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_COMPARE_FAILED: i32 = 3;

/// Fully resolved description of a run. Output paths are not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub length: usize,
    pub types: usize,
    /// Type frequencies; uniform when absent.
    pub p: Option<Vec<f64>>,
    /// `h:<int>`, `full-uniform`, `full-geometric:<rho>` or `custom:<path>`.
    pub horizon: String,
    pub tau: i32,
    pub lazy: bool,
    pub tmax: f64,
    pub seed: u64,
    pub reps: usize,
    pub sample_every: Option<f64>,
    pub sample_times: Option<Vec<f64>>,
    pub qlist: Vec<usize>,
    /// Initial configuration as a run-length string; random when absent.
    pub initial: Option<String>,
    /// `fig7`: the hopping-singleton configuration for the given `h`.
    pub preset: Option<String>,
    pub tv_threshold: f64,
    pub check_invariants: bool,
    /// Test hook: the simulation skips the target-dissatisfaction check.
    pub corrupt_engine: bool,
    pub grid_length: Vec<usize>,
    pub grid_horizon: Vec<String>,
    pub grid_tau: Vec<i32>,
    pub grid_lazy: Vec<bool>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            length: 100,
            types: 2,
            p: None,
            horizon: "h:1".into(),
            tau: 0,
            lazy: false,
            tmax: 100.0,
            seed: 0,
            reps: 1,
            sample_every: None,
            sample_times: None,
            qlist: vec![1],
            initial: None,
            preset: None,
            tv_threshold: 0.02,
            check_invariants: false,
            corrupt_engine: false,
            grid_length: Vec::new(),
            grid_horizon: Vec::new(),
            grid_tau: Vec::new(),
            grid_lazy: Vec::new(),
        }
    }
}

/// The model objects a [`RunSpec`] describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub len: usize,
    pub params: ModelParams,
    pub mu: MovingDistribution,
    pub initial: Option<RingConfiguration>,
}

/// Parses a horizon string for a ring of length `len`.
pub fn parse_horizon(s: &str, len: usize) -> Result<(Horizon, MovingDistribution)> {
    let s = s.trim();
    let mu = if let Some(h) = s.strip_prefix("h:") {
        let h: usize = h
            .parse()
            .map_err(|_| Error::Parameter(format!("horizon `{s}`: h must be an integer")))?;
        if 2 * h + 1 > len {
            return param(format!("horizon h={h} needs L >= {}, got {len}", 2 * h + 1));
        }
        MovingDistribution::bounded_uniform(len, h)?
    } else if s == "full-uniform" {
        MovingDistribution::ring_uniform(len)?
    } else if let Some(rho) = s.strip_prefix("full-geometric:") {
        let rho: f64 = rho
            .parse()
            .map_err(|_| Error::Parameter(format!("horizon `{s}`: rho must be a number")))?;
        MovingDistribution::folded_geometric(len, rho)?
    } else if let Some(path) = s.strip_prefix("custom:") {
        MovingDistribution::load_pmf_file(Path::new(path), len)?
    } else {
        return param(format!(
            "horizon `{s}` is not h:<int>, full-uniform, full-geometric:<rho> or custom:<path>"
        ));
    };
    Ok((mu.horizon(), mu))
}

impl RunSpec {
    /// Applies the preset, if any, to length, types and initial state.
    fn with_preset(&self) -> Result<RunSpec> {
        let mut spec = self.clone();
        match self.preset.as_deref() {
            None => {}
            Some("fig7") => {
                let h: usize = self
                    .horizon
                    .strip_prefix("h:")
                    .and_then(|h| h.parse().ok())
                    .ok_or_else(|| {
                        Error::Parameter("preset fig7 needs --horizon h:<int>".into())
                    })?;
                let cfg = RingConfiguration::singleton_hop(h)?;
                spec.length = cfg.len();
                spec.types = 3;
                spec.initial = Some(cfg.to_rle());
            }
            Some(other) => return param(format!("unknown preset `{other}`")),
        }
        Ok(spec)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let spec = self.with_preset()?;
        spec.resolve_plain()
    }

    fn resolve_plain(&self) -> Result<Resolved> {
        if self.types < 2 || self.types > 255 {
            return param(format!("types must be in 2..=255, got {}", self.types));
        }
        if self.length < 3 {
            return param(format!("length must be at least 3, got {}", self.length));
        }
        if self.tmax.is_nan() || self.tmax < 0.0 {
            return param(format!("tmax must be >= 0, got {}", self.tmax));
        }
        if self.reps == 0 {
            return param("reps must be at least 1");
        }
        if self.qlist.contains(&0) {
            return param("qlist entries must be >= 1");
        }
        if let Some(ts) = &self.sample_times {
            if ts.windows(2).any(|w| w[0] > w[1]) {
                return param("sample times must be sorted ascending");
            }
        }
        let (horizon, mu) = parse_horizon(&self.horizon, self.length)?;
        let p = match &self.p {
            Some(p) if p.len() != self.types => {
                return param(format!(
                    "{} frequencies given for {} types",
                    p.len(),
                    self.types
                ))
            }
            Some(p) => p.clone(),
            None => vec![1.0 / self.types as f64; self.types],
        };
        let params = ModelParams::new(p, horizon)?
            .with_tau(self.tau)
            .with_lazy(self.lazy);
        params.validate_for(self.length)?;
        let initial = match &self.initial {
            Some(rle) => {
                let cfg = RingConfiguration::from_rle(rle, self.types)?;
                if cfg.len() != self.length {
                    return param(format!(
                        "initial configuration has length {}, spec says {}",
                        cfg.len(),
                        self.length
                    ));
                }
                Some(cfg)
            }
            None => None,
        };
        Ok(Resolved {
            len: self.length,
            params,
            mu,
            initial,
        })
    }

    fn engine_params(&self, r: &Resolved) -> ModelParams {
        let mut p = r.params.clone();
        p.relax_target_check = self.corrupt_engine;
        p
    }

    fn schedule(&self) -> SampleSchedule {
        if let Some(ts) = &self.sample_times {
            SampleSchedule::At(ts.clone())
        } else if let Some(dt) = self.sample_every {
            SampleSchedule::Every(dt)
        } else if self.tmax > 0.0 {
            SampleSchedule::At(vec![0.0, self.tmax])
        } else {
            SampleSchedule::At(vec![0.0])
        }
    }

    /// Single-line JSON echo.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn header_line(&self) -> String {
        format!("# spec {}", self.to_json())
    }

    /// Reads a config file: a JSON spec object, a JSON report carrying a
    /// `spec` field, or any output whose first line is a `# spec` header.
    pub fn from_config_text(text: &str) -> Result<RunSpec> {
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if let Some(json) = first.trim().strip_prefix("# spec ") {
            return Ok(serde_json::from_str(json)?);
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("spec") {
            Some(spec) if spec.is_object() => Ok(serde_json::from_value(spec.clone())?),
            _ => Ok(serde_json::from_value(value)?),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "schelling", version, about = "Schelling swap model on a ring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trajectories and write a metrics CSV.
    Simulate(SpecArgs),
    /// One summary row per grid point and replicate.
    Sweep(SpecArgs),
    /// Exact analysis of a small ring.
    Oracle(SpecArgs),
    /// Total-variation distance between simulation and the exact law at --tmax.
    Compare(SpecArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// JSON spec, or any output of this tool (its spec header is read back).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'L')]
    pub length: Option<usize>,
    #[arg(long)]
    pub types: Option<usize>,
    /// Comma-separated type frequencies.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// h:<int> | full-uniform | full-geometric:<rho> | custom:<path>
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<i32>,
    #[arg(long)]
    pub lazy: bool,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Base seed; replicate k > 0 of a multi-replicate run uses a derived seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    /// Comma-separated ascending sample times.
    #[arg(long, value_delimiter = ',')]
    pub sample_times: Option<Vec<f64>>,
    /// Comma-separated l values for the q_l columns.
    #[arg(long, value_delimiter = ',')]
    pub qlist: Option<Vec<usize>>,
    /// Initial configuration as run-length string `type:count,...`.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub tv_threshold: Option<f64>,
    #[arg(long)]
    pub check_invariants: bool,
    #[arg(long, hide = true)]
    pub corrupt_engine: bool,
    #[arg(long, value_delimiter = ',')]
    pub grid_length: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_horizon: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid_tau: Option<Vec<i32>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_lazy: Option<Vec<bool>>,
    /// Main output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Event log (JSONL), single-replicate simulate only.
    #[arg(long)]
    pub events_out: Option<PathBuf>,
    /// Final configuration(s) as run-length strings, one per replicate.
    #[arg(long)]
    pub snapshot_out: Option<PathBuf>,
}

impl SpecArgs {
    pub fn to_spec(&self) -> Result<RunSpec> {
        let mut s = match &self.config {
            Some(path) => RunSpec::from_config_text(&std::fs::read_to_string(path)?)?,
            None => RunSpec::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    s.$f = v.clone().into();
                }
            )*};
        }
        set!(
            length,
            types,
            horizon,
            tau,
            tmax,
            seed,
            reps,
            qlist,
            tv_threshold
        );
        set!(grid_length, grid_horizon, grid_tau, grid_lazy);
        if self.p.is_some() {
            s.p = self.p.clone();
        }
        if self.sample_every.is_some() {
            s.sample_every = self.sample_every;
        }
        if self.sample_times.is_some() {
            s.sample_times = self.sample_times.clone();
        }
        if self.initial.is_some() {
            s.initial = self.initial.clone();
        }
        if self.preset.is_some() {
            s.preset = self.preset.clone();
        }
        s.lazy |= self.lazy;
        s.check_invariants |= self.check_invariants;
        s.corrupt_engine |= self.corrupt_engine;
        Ok(s)
    }
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command; `Ok` carries the exit code.
pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a.to_spec()?, a).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(&a.to_spec()?, a).map(|_| EXIT_OK),
        Command::Oracle(a) => cmd_oracle(&a.to_spec()?, a).map(|_| EXIT_OK),
        Command::Compare(a) => {
            let pass = cmd_compare(&a.to_spec()?, a)?;
            Ok(if pass { EXIT_OK } else { EXIT_COMPARE_FAILED })
        }
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn run_one(
    spec: &RunSpec,
    r: &Resolved,
    seed: u64,
    opts: &RunOptions,
    events: Option<&Path>,
) -> Result<RunSummary> {
    let params = spec.engine_params(r);
    let mut writer = match events {
        Some(p) => Some(JsonlEventWriter::new(BufWriter::new(File::create(p)?))),
        None => None,
    };
    let summary = match &r.initial {
        Some(cfg) => run_from(
            cfg.clone(),
            &params,
            &r.mu,
            seed,
            spec.tmax,
            opts,
            &mut writer,
        )?,
        None => run(r.len, &params, &r.mu, seed, spec.tmax, opts, &mut writer)?,
    };
    if let Some(w) = writer {
        w.finish()?;
    }
    Ok(summary)
}

fn seed_for(spec: &RunSpec, k: usize) -> u64 {
    if spec.reps == 1 {
        spec.seed
    } else {
        replicate_seed(spec.seed, k as u64)
    }
}

/// Metrics CSV (with `replicate,seed` leading columns when `reps > 1`).
pub fn cmd_simulate(spec: &RunSpec, io: &SpecArgs) -> Result<Vec<RunSummary>> {
    let r = spec.resolve()?;
    if spec.reps > 1 && io.events_out.is_some() {
        return param("--events-out needs reps = 1");
    }
    let opts = RunOptions {
        check_invariants: spec.check_invariants,
        schedule: spec.schedule(),
        l_list: spec.qlist.clone(),
        ..RunOptions::default()
    };
    let summaries: Vec<RunSummary> = if spec.reps == 1 {
        vec![run_one(
            spec,
            &r,
            spec.seed,
            &opts,
            io.events_out.as_deref(),
        )?]
    } else {
        (0..spec.reps)
            .into_par_iter()
            .map(|k| run_one(spec, &r, seed_for(spec, k), &opts, None))
            .collect::<Result<_>>()?
    };

    let mut out = open_out(&io.out)?;
    writeln!(out, "{}", spec.header_line())?;
    let header = MetricsSample::csv_header(&spec.qlist, r.params.types);
    if spec.reps == 1 {
        writeln!(out, "{header}")?;
    } else {
        writeln!(out, "replicate,seed,{header}")?;
    }
    for (k, s) in summaries.iter().enumerate() {
        for sample in &s.samples {
            if spec.reps == 1 {
                writeln!(out, "{}", sample.csv_row())?;
            } else {
                writeln!(out, "{k},{},{}", s.seed, sample.csv_row())?;
            }
        }
    }
    out.flush()?;

    if let Some(path) = &io.snapshot_out {
        let mut snap = BufWriter::new(File::create(path)?);
        writeln!(snap, "{}", spec.header_line())?;
        for s in &summaries {
            writeln!(snap, "{}", s.final_config.to_rle())?;
        }
        snap.flush()?;
    }
    Ok(summaries)
}

fn grid_or<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

pub const SWEEP_HEADER: &str = "length,horizon,tau,lazy,replicate,seed,absorbed,t_absorbed,final_density,final_q_h,swaps_per_site_mean";

/// One row per (grid point, replicate), in grid-then-replicate order.
pub fn cmd_sweep(spec: &RunSpec, io: &SpecArgs) -> Result<String> {
    let lengths = grid_or(&spec.grid_length, spec.length);
    let horizons = grid_or(&spec.grid_horizon, spec.horizon.clone());
    let taus = grid_or(&spec.grid_tau, spec.tau);
    let lazies = grid_or(&spec.grid_lazy, spec.lazy);
    let mut points = Vec::new();
    for &length in &lengths {
        for horizon in &horizons {
            for &tau in &taus {
                for &lazy in &lazies {
                    let mut p = spec.clone();
                    p.length = length;
                    p.horizon = horizon.clone();
                    p.tau = tau;
                    p.lazy = lazy;
                    let resolved = p.resolve()?;
                    points.push((p, resolved));
                }
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|g| (0..spec.reps).map(move |k| (g, k)))
        .collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let (p, r) = &points[g];
            let seed = replicate_seed(spec.seed, k as u64);
            let s = run_one(p, r, seed, &RunOptions::default(), None)?;
            let cfg = &s.final_config;
            let q_h = match r.params.horizon {
                Horizon::Finite(h) if h >= 1 => q_l(cfg, h)?.to_string(),
                _ => String::new(),
            };
            let t_abs = s.absorbed_at.map(|t| t.to_string()).unwrap_or_default();
            Ok(format!(
                "{},{},{},{},{k},{seed},{},{t_abs},{},{q_h},{}",
                p.length,
                p.horizon,
                p.tau,
                p.lazy,
                s.absorbed,
                cfg.separator_count() as f64 / cfg.len() as f64,
                s.swaps_per_site()
            ))
        })
        .collect::<Result<_>>()?;
    let mut text = String::new();
    let _ = writeln!(text, "{}", spec.header_line());
    let _ = writeln!(text, "{SWEEP_HEADER}");
    for row in rows {
        let _ = writeln!(text, "{row}");
    }
    let mut out = open_out(&io.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(text)
}

#[derive(Serialize)]
struct WithSpec<'a, T: Serialize> {
    spec: &'a RunSpec,
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(spec: &RunSpec, body: T, out: &Option<PathBuf>) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, &WithSpec { spec, body })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Exact report. The initial law is the point mass on the initial
/// configuration when one is given, else the product law.
pub fn cmd_oracle(spec: &RunSpec, io: &SpecArgs) -> Result<OracleReport> {
    let r = spec.resolve()?;
    let g = build_generator(r.len, &r.params, &r.mu)?;
    let pi0 = match &r.initial {
        Some(cfg) => point_mass(g.space(), cfg)?,
        None => product_law(g.space(), &r.params.p)?,
    };
    let report = OracleReport::analyse(&g, &pi0)?;
    write_json(spec, &report, &io.out)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub tv: f64,
    pub truncation_error: f64,
    pub n_reps: usize,
    pub t: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Engine versus exact law at `tmax` from the product law; `reps` replicates.
pub fn cmd_compare(spec: &RunSpec, io: &SpecArgs) -> Result<bool> {
    let r = spec.resolve()?;
    if r.initial.is_some() {
        return param("compare starts from the product law; drop --initial/--preset");
    }
    if spec.reps < 10_000 {
        return param(format!("compare needs reps >= 10000, got {}", spec.reps));
    }
    let engine = spec.engine_params(&r);
    let tv = mc_vs_exact_with(
        r.len, &r.params, &engine, &r.mu, spec.tmax, spec.reps, spec.seed,
    )?;
    let report = CompareReport {
        tv: tv.tv,
        truncation_error: tv.truncation_error,
        n_reps: tv.n_reps,
        t: tv.t,
        threshold: spec.tv_threshold,
        pass: tv.tv <= spec.tv_threshold,
    };
    write_json(spec, &report, &io.out)?;
    Ok(report.pass)
}
