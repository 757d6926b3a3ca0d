use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use povmcoh::io::{read_json, ChannelFile, PovmFile, StateFile};
use povmcoh::sdp::{pic_feasibility, FmaxContext, FmaxOptions, FmaxResult, PicOptions, PicVerdict, SdpOptions};
use povmcoh::trine::{
    coherence_landscape, conversion_landscape, run_suite, write_landscape_csv, write_landscape_json, SphereGrid,
    SuiteOptions,
};
use povmcoh::{
    c_rel_povm, canonical_extension, canonical_kraus, minimal_extension, trine_povm, Channel, DensityMatrix,
    ExtensionKind, NaimarkExtension, Povm,
};

mod config;

use config::{positive, resolve, ConfigFile};

/// POVM-based coherence: Naimark extensions, coherence values, incoherent channels and
/// conversion fidelities.
///
/// POVM arguments take a JSON file or the built-in name `trine`. Results go to stdout as
/// JSON unless `--out` is given; diagnostics go to stderr.
#[derive(Debug, Parser)]
#[command(name = "povmcoh", version)]
struct Cli {
    /// `key = value` file supplying defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Interior-point tolerance on relative residuals [default: 1e-9].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Slack below which a channel is not realizable [default: 1e-7].
    #[arg(long, global = true)]
    feas_threshold: Option<f64>,
    /// Interior-point iteration cap [default: 200].
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Naimark extension used by the SDPs [default: minimal].
    #[arg(long, global = true)]
    kind: Option<ExtensionKind>,
    /// Seed for randomized checks [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for landscapes [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write results to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; only landscapes support csv [default: json, csv for landscapes].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print solver iterations to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative entropy of POVM-based coherence of a state, in bits.
    Coherence {
        #[arg(long)]
        povm: String,
        #[arg(long)]
        state: PathBuf,
    },
    /// Naimark extension of a POVM.
    Naimark {
        #[arg(long)]
        povm: String,
    },
    /// Whether a channel is POVM-incoherent.
    PicCheck {
        #[arg(long)]
        povm: String,
        #[arg(long)]
        channel: PathBuf,
    },
    /// Largest fidelity with `sigma` reachable from `rho` by POVM-incoherent channels.
    Fmax {
        #[arg(long)]
        povm: String,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Optimize over all channels instead.
        #[arg(long)]
        unconstrained: bool,
    },
    /// Coherence or conversion fidelity over a (φ, θ) grid of pure qubit states.
    Landscape {
        #[arg(long)]
        povm: String,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Source state for conversion landscapes.
        #[arg(long)]
        state: Option<PathBuf>,
        /// `N_PHIxN_THETA` [default: 181x91].
        #[arg(long)]
        grid: Option<SphereGrid>,
    },
    /// Runs the trine reference checks; exits nonzero if any check fails.
    TrineSuite {
        /// Run the checks on this POVM instead of the exact trine.
        #[arg(long)]
        povm: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Coherence,
    Conversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Flags merged with the config file.
struct Settings {
    sdp: SdpOptions,
    feas_threshold: f64,
    kind: ExtensionKind,
    seed: u64,
    threads: Option<usize>,
    format: Option<Format>,
    grid: SphereGrid,
    out: Option<PathBuf>,
}

impl Settings {
    fn new(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let defaults = SdpOptions::default();
        let sdp = SdpOptions {
            tol: positive("tol", resolve(cli.tol, &file, "tol", defaults.tol)?)?,
            max_iters: resolve(cli.max_iters, &file, "max-iters", defaults.max_iters)?,
            verbose: cli.verbose,
        };
        if sdp.max_iters == 0 {
            bail!("max-iters must be positive");
        }
        let feas_threshold = positive(
            "feas-threshold",
            resolve(cli.feas_threshold, &file, "feas-threshold", PicOptions::default().feas_threshold)?,
        )?;
        let grid = match &cli.command {
            Command::Landscape { grid: Some(g), .. } => *g,
            _ => file.get("grid")?.unwrap_or_default(),
        };
        Ok(Self {
            sdp,
            feas_threshold,
            kind: resolve(cli.kind, &file, "kind", ExtensionKind::Minimal)?,
            seed: resolve(cli.seed, &file, "seed", 0)?,
            threads: cli.threads.or(file.get("threads")?),
            format: cli.format.or(file.get("format")?),
            grid,
            out: cli.out.clone(),
        })
    }

    fn pic(&self) -> PicOptions {
        PicOptions { sdp: self.sdp, feas_threshold: self.feas_threshold, ..PicOptions::default() }
    }

    fn fmax(&self, unconstrained: bool) -> FmaxOptions {
        FmaxOptions { sdp: self.sdp, unconstrained }
    }

    fn json_only(&self) -> Result<()> {
        if self.format == Some(Format::Csv) {
            bail!("CSV output is only available for landscapes");
        }
        Ok(())
    }
}

fn load_povm(arg: &str) -> Result<Povm> {
    if arg == "trine" && !Path::new(arg).exists() {
        return Ok(trine_povm());
    }
    let file: PovmFile = read_json(arg).with_context(|| format!("reading POVM {arg}"))?;
    Povm::new(file.effects()?).with_context(|| format!("validating POVM {arg}"))
}

fn load_state(path: &Path) -> Result<DensityMatrix> {
    let file: StateFile = read_json(path).with_context(|| format!("reading state {}", path.display()))?;
    file.density().with_context(|| format!("validating state {}", path.display()))
}

fn load_channel(path: &Path) -> Result<Channel> {
    let file: ChannelFile = read_json(path).with_context(|| format!("reading channel {}", path.display()))?;
    Channel::new(file.kraus()?).with_context(|| format!("validating channel {}", path.display()))
}

fn extension(p: &Povm, kind: ExtensionKind) -> Result<NaimarkExtension> {
    Ok(match kind {
        ExtensionKind::Minimal => minimal_extension(p)?,
        ExtensionKind::Canonical => canonical_extension(&canonical_kraus(p))?,
    })
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PicReport {
    kind: ExtensionKind,
    d_prime: usize,
    #[serde(flatten)]
    verdict: PicVerdict,
}

#[derive(Serialize)]
struct FmaxReport {
    kind: Option<ExtensionKind>,
    #[serde(flatten)]
    result: FmaxResult,
}

fn run(cli: &Cli) -> Result<bool> {
    let s = Settings::new(cli)?;
    if let Some(n) = s.threads {
        if n == 0 {
            bail!("threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = s.out.as_deref();
    match &cli.command {
        Command::Coherence { povm, state } => {
            s.json_only()?;
            let p = load_povm(povm)?;
            let report = c_rel_povm(&load_state(state)?, &p)?;
            emit(&report, out)?;
        }
        Command::Naimark { povm } => {
            s.json_only()?;
            let x = extension(&load_povm(povm)?, s.kind)?;
            eprintln!("{} extension, d' = {}", x.kind(), x.d_prime());
            emit(&x.to_file(), out)?;
        }
        Command::PicCheck { povm, channel } => {
            s.json_only()?;
            let x = extension(&load_povm(povm)?, s.kind)?;
            let verdict = pic_feasibility(&load_channel(channel)?.process(), &x, &s.pic())?;
            if verdict.marginal {
                eprintln!("warning: slack {:.3e} is within the marginal band", verdict.slack.unwrap_or(f64::NAN));
            }
            emit(&PicReport { kind: s.kind, d_prime: x.d_prime(), verdict }, out)?;
        }
        Command::Fmax { povm, rho, sigma, unconstrained } => {
            s.json_only()?;
            let p = load_povm(povm)?;
            let (rho, sigma) = (load_state(rho)?, load_state(sigma)?);
            let ctx = if *unconstrained {
                FmaxContext::unconstrained(p.dim(), &s.sdp)
            } else {
                FmaxContext::new(&extension(&p, s.kind)?, &s.fmax(false))?
            };
            let result = ctx.fmax(&rho, &sigma)?;
            emit(&FmaxReport { kind: (!unconstrained).then_some(s.kind), result }, out)?;
        }
        Command::Landscape { povm, mode, state, .. } => {
            let p = load_povm(povm)?;
            let samples = match mode {
                Mode::Coherence => coherence_landscape(&p, &s.grid)?,
                Mode::Conversion => {
                    let Some(state) = state else { bail!("conversion landscapes need --state") };
                    let ctx = FmaxContext::new(&extension(&p, s.kind)?, &s.fmax(false))?;
                    conversion_landscape(&load_state(state)?, &ctx, &s.grid)?
                }
            };
            eprintln!("{} points on a {} grid", samples.len(), s.grid);
            let csv_by_name = out.is_none_or(|p| p.extension().is_none_or(|e| e != "json"));
            let w = sink(out)?;
            match s.format {
                Some(Format::Csv) => write_landscape_csv(&samples, w)?,
                Some(Format::Json) => write_landscape_json(&samples, w)?,
                None if csv_by_name => write_landscape_csv(&samples, w)?,
                None => write_landscape_json(&samples, w)?,
            }
        }
        Command::TrineSuite { povm } => {
            s.json_only()?;
            let effects = match povm {
                Some(path) => {
                    let file: PovmFile =
                        read_json(path).with_context(|| format!("reading POVM {}", path.display()))?;
                    Some(file.effects()?)
                }
                None => None,
            };
            let opts = SuiteOptions { pic: s.pic(), fmax: s.fmax(false), seed: s.seed, ..SuiteOptions::default() };
            let report = run_suite(effects, &opts);
            for c in &report.checks {
                eprintln!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            emit(&report, out)?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

/// A closed downstream pipe (`| head`) is not a failure.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
