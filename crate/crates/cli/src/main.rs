//! `cbf-sim`: complementary beam search, pattern tabulation and BER sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use cbf_core::array::{AngleGrid, ArrayGeometry};
use cbf_core::channel::SnrPoint;
use cbf_core::search::{
    find_complementary_pair, find_complementary_triple, golay_construct, ComplementaryBeamSet,
    PhaseCodebook, SearchMethod, SearchOptions,
};
use cbf_core::simulation::{run_ber, Scheme, SimConfig};
use clap::error::ErrorKind;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use thiserror::Error;

mod output;
mod settings;

use output::{ber_csv, num, pattern_csv, unix_now, FileDigest, OutDir, RunManifest};
use settings::{BerSettings, IndexList, Measure, SchemeArg, SearchSettings};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("the following required argument was not provided: {0}")]
    Missing(&'static str),
    #[error(transparent)]
    Core(#[from] cbf_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Parser)]
#[command(
    name = "cbf-sim",
    version,
    about = "Complementary beams for omnidirectional broadcast from sub-array ULAs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find complementary weights; writes beamset.json and pattern.csv, prints the pattern variance.
    Search(SearchArgs),
    /// Tabulate power patterns of inline weights or a beam-set file into pattern.csv.
    Pattern(PatternArgs),
    /// Monte Carlo BER sweep; writes ber.csv and manifest.json.
    Ber(BerArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Search(_) => "search",
            Self::Pattern(_) => "pattern",
            Self::Ber(_) => "ber",
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    settings: SearchSettings,
    /// JSON file with default values for any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["weights", "beams"])))]
struct PatternArgs {
    /// Comma-separated phase indices of one weight vector; repeat per sub-array.
    #[arg(long, action = clap::ArgAction::Append)]
    weights: Vec<IndexList>,
    /// Phase-shifter accuracy K for --weights.
    #[arg(long, default_value_t = 4)]
    accuracy: usize,
    /// Element spacing in wavelengths for --weights.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// Beam-set JSON written by `search`.
    #[arg(long)]
    beams: Option<PathBuf>,
    /// Angle grid resolution. [default: 512, or the beam set's grid]
    #[arg(long)]
    grid_points: Option<usize>,
    /// Angle grid spacing. [default: theta, or the beam set's grid]
    #[arg(long, value_enum)]
    grid_measure: Option<Measure>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    settings: BerSettings,
    /// JSON file with default values for any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let result = match cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Pattern(args) => cmd_pattern(args),
        Command::Ber(args) => cmd_ber(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Failure::Usage(_) | Failure::Missing(_))) => {
            let kind = match e {
                Failure::Missing(_) => ErrorKind::MissingRequiredArgument,
                _ => ErrorKind::InvalidValue,
            };
            let mut cmd = Cli::command();
            cmd.build();
            let sub = cmd.find_subcommand_mut(name).expect("known subcommand");
            sub.error(kind, e.to_string()).exit()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn grid_from(points: usize, measure: Measure) -> Result<AngleGrid, Failure> {
    Ok(AngleGrid::new(measure.into(), points)?)
}

fn cmd_search(args: SearchArgs) -> Result<(), Failure> {
    let cfg = args.settings.resolve(args.config.as_deref())?;
    let geometry = ArrayGeometry::ula(cfg.elements, cfg.subarrays, cfg.spacing)?;
    let grid = grid_from(cfg.grid_points, cfg.grid_measure)?;
    let codebook = PhaseCodebook::new(cfg.accuracy)?;
    let options = SearchOptions::new(cfg.method.into())
        .seed(cfg.seed)
        .budget(cfg.budget)
        .ceiling(cfg.ceiling)
        .workers(cfg.workers);
    let set = match cfg.subarrays {
        2 => find_complementary_pair(&geometry, codebook, &grid, options)?,
        3 => find_complementary_triple(&geometry, codebook, &grid, options)?,
        m => {
            return Err(Failure::Usage(format!(
                "--subarrays must be 2 (pair) or 3 (triple), got {m}"
            )))
        }
    };
    let out = OutDir::create(&args.out)?;
    out.write("beamset.json", &format!("{}\n", set.to_json()))?;
    out.write(
        "pattern.csv",
        &pattern_csv(&set.geometry, &set.subarrays, &set.weights, &set.grid)?,
    )?;
    println!("{}", num(set.variance));
    Ok(())
}

fn read_beams(path: &std::path::Path) -> Result<(ComplementaryBeamSet, String), Failure> {
    let text = std::fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((ComplementaryBeamSet::from_json(&text)?, text))
}

fn cmd_pattern(args: PatternArgs) -> Result<(), Failure> {
    let (geometry, subarrays, weights, default_grid) = match &args.beams {
        Some(path) => {
            let (set, _) = read_beams(path)?;
            (set.geometry, set.subarrays, set.weights, set.grid)
        }
        None => {
            let ns = args.weights[0].0.len();
            if let Some(w) = args.weights.iter().find(|w| w.0.len() != ns) {
                return Err(Failure::Usage(format!(
                    "weight vectors differ in length ({} vs {ns})",
                    w.0.len()
                )));
            }
            let codebook = PhaseCodebook::new(args.accuracy)?;
            let weights = args
                .weights
                .iter()
                .map(|w| codebook.weights(&w.0))
                .collect::<cbf_core::Result<Vec<_>>>()?;
            let m = weights.len();
            let geometry = ArrayGeometry::ula(m * ns, m, args.spacing)?;
            (geometry, (0..m).collect(), weights, AngleGrid::default())
        }
    };
    let grid = match (args.grid_points, args.grid_measure) {
        (None, None) => default_grid,
        (points, measure) => grid_from(
            points.unwrap_or(default_grid.len()),
            measure.unwrap_or(match default_grid.measure() {
                cbf_core::array::GridMeasure::UniformInTheta => Measure::Theta,
                cbf_core::array::GridMeasure::UniformInPsi => Measure::Psi,
            }),
        )?,
    };
    let out = OutDir::create(&args.out)?;
    out.write(
        "pattern.csv",
        &pattern_csv(&geometry, &subarrays, &weights, &grid)?,
    )?;
    Ok(())
}

/// Golay pair when the sub-array length allows one, otherwise a seeded
/// stochastic search with K = 4.
fn default_beams(
    elements: usize,
    seed: u64,
    workers: usize,
) -> Result<ComplementaryBeamSet, Failure> {
    let geometry = ArrayGeometry::ula(elements, 2, 0.5)?;
    let grid = AngleGrid::default();
    let (method, accuracy) = if golay_construct(geometry.subarray_size()).is_ok() {
        (SearchMethod::Golay, 2)
    } else {
        (SearchMethod::Stochastic, 4)
    };
    let options = SearchOptions::new(method).seed(seed).workers(workers);
    Ok(find_complementary_pair(
        &geometry,
        PhaseCodebook::new(accuracy)?,
        &grid,
        options,
    )?)
}

fn cmd_ber(args: BerArgs) -> Result<(), Failure> {
    let started = unix_now();
    let cfg = args.settings.resolve(args.config.as_deref())?;
    let mut inputs = Vec::new();
    let scheme = match cfg.scheme {
        SchemeArg::Single => Scheme::Single,
        SchemeArg::Rbf => Scheme::rbf(ArrayGeometry::ula(cfg.elements, 2, 0.5)?, cfg.rbf_block)?,
        SchemeArg::Cbf => {
            let beams = match &cfg.beams {
                Some(path) => {
                    let (set, text) = read_beams(path)?;
                    inputs.push(FileDigest::of(&path.display().to_string(), text.as_bytes()));
                    set
                }
                None => default_beams(cfg.elements, cfg.seed, cfg.workers)?,
            };
            Scheme::cbf(beams)?
        }
    };
    let angles_deg = cfg.angles.0.clone();
    let mut sim = SimConfig::new(
        scheme,
        cfg.channel.into(),
        angles_deg.iter().map(|a| a.to_radians()).collect(),
        cfg.snr_db.values().into_iter().map(SnrPoint::new).collect(),
    );
    sim.min_bits = cfg.min_bits;
    sim.max_bits = cfg.max_bits;
    sim.target_errors = cfg.target_errors;
    sim.equal_subarrays = !cfg.independent_subarrays;
    sim.seed = cfg.seed;
    sim.workers = cfg.workers;
    let curve = run_ber(&sim)?;

    let out = OutDir::create(&args.out)?;
    let csv = out.write("ber.csv", &ber_csv(&curve, &angles_deg))?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "ber",
        seed: cfg.seed,
        config: cfg,
        started_unix: started,
        finished_unix: unix_now(),
        inputs,
        outputs: vec![csv],
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    out.write("manifest.json", &format!("{json}\n"))?;
    Ok(())
}
