//! Flag sets that double as `--config` documents.
//!
//! Every field is optional so a flag can be told apart from its absence; a
//! flag wins over the config file, which wins over the built-in default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cbf_core::array::GridMeasure;
use cbf_core::channel::ChannelKind;
use cbf_core::search::SearchMethod;
use cbf_core::simulation::default_angles_deg;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const SEED_ENV: &str = "CBF_SIM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Golay,
    Stochastic,
}

impl From<Method> for SearchMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Exhaustive => Self::Exhaustive,
            Method::Golay => Self::Golay,
            Method::Stochastic => Self::Stochastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Points evenly spaced in angle.
    Theta,
    /// Points evenly spaced in sin(angle).
    Psi,
}

impl From<Measure> for GridMeasure {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Theta => Self::UniformInTheta,
            Measure::Psi => Self::UniformInPsi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Cbf,
    Rbf,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    Awgn,
    Rayleigh,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Awgn => Self::Awgn,
            ChannelArg::Rayleigh => Self::Rayleigh,
        }
    }
}

/// Inclusive `start:step:stop` sweep in dB, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SnrRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrRange {
    pub fn values(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        // Rounded so that 0.1-style steps print as typed.
        (0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts = s
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{p}` is not a number"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let range = match parts[..] {
            [v] => Self {
                start: v,
                step: 1.0,
                stop: v,
            },
            [start, step, stop] => Self { start, step, stop },
            _ => return Err(format!("expected start:step:stop, got `{s}`")),
        };
        if !(range.start.is_finite() && range.stop.is_finite() && range.step.is_finite()) {
            return Err("SNR bounds must be finite".into());
        }
        if range.step <= 0.0 || range.stop < range.start {
            return Err(format!("`{s}` is not an increasing sweep"));
        }
        Ok(range)
    }
}

impl fmt::Display for SnrRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl TryFrom<String> for SnrRange {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<SnrRange> for String {
    fn from(r: SnrRange) -> Self {
        r.to_string()
    }
}

/// Comma-separated angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleList(pub Vec<f64>);

impl FromStr for AngleList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let angles = s
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{a}` is not an angle"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(a) = angles.iter().find(|a| !(-90.0..=90.0).contains(*a)) {
            return Err(format!("{a}° lies outside [-90, 90]"));
        }
        Ok(Self(angles))
    }
}

/// Comma-separated codebook indices for one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexList(pub Vec<usize>);

impl FromStr for IndexList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|i| {
                i.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("`{i}` is not a phase index"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    /// Total number of array elements.
    #[arg(long)]
    pub elements: Option<usize>,
    /// Number of sub-arrays (RF chains): 2 for a pair, 3 for a triple. [default: 2]
    #[arg(long)]
    pub subarrays: Option<usize>,
    /// Phase-shifter accuracy K (phases are multiples of 2π/K). [default: 4]
    #[arg(long)]
    pub accuracy: Option<usize>,
    /// Search strategy. [default: exhaustive]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Angle grid resolution. [default: 512]
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Angle grid spacing. [default: theta]
    #[arg(long, value_enum)]
    pub grid_measure: Option<Measure>,
    /// Element spacing in wavelengths. [default: 0.5]
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Stochastic search seed; falls back to $CBF_SIM_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stochastic search evaluation budget. [default: 100000]
    #[arg(long)]
    pub budget: Option<u64>,
    /// Largest exhaustive search space accepted. [default: 10000000]
    #[arg(long)]
    pub ceiling: Option<u128>,
    /// Search threads. [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub elements: usize,
    pub subarrays: usize,
    pub accuracy: usize,
    pub method: Method,
    pub grid_points: usize,
    pub grid_measure: Measure,
    pub spacing: f64,
    pub seed: u64,
    pub budget: u64,
    pub ceiling: u128,
    pub workers: usize,
}

impl SearchSettings {
    pub fn resolve(self, config: Option<&Path>) -> Result<SearchConfig, Failure> {
        let file: Self = config.map(read_config).transpose()?.unwrap_or_default();
        let seed = match self.seed.or(file.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        Ok(SearchConfig {
            elements: self
                .elements
                .or(file.elements)
                .ok_or(Failure::Missing("--elements <ELEMENTS>"))?,
            subarrays: self.subarrays.or(file.subarrays).unwrap_or(2),
            accuracy: self.accuracy.or(file.accuracy).unwrap_or(4),
            method: self.method.or(file.method).unwrap_or(Method::Exhaustive),
            grid_points: self.grid_points.or(file.grid_points).unwrap_or(512),
            grid_measure: self
                .grid_measure
                .or(file.grid_measure)
                .unwrap_or(Measure::Theta),
            spacing: self.spacing.or(file.spacing).unwrap_or(0.5),
            seed,
            budget: self
                .budget
                .or(file.budget)
                .unwrap_or(cbf_core::search::DEFAULT_BUDGET),
            ceiling: self
                .ceiling
                .or(file.ceiling)
                .unwrap_or(cbf_core::search::DEFAULT_CEILING),
            workers: self
                .workers
                .or(file.workers)
                .unwrap_or_else(default_workers),
        })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerSettings {
    /// Transmission scheme.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Channel model.
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    /// Eb/N0 sweep in dB as start:step:stop. [default: 0:2:12]
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<SnrRange>,
    /// Comma-separated observation angles in degrees. [default: 0,±14.48,±30,±60,±85]
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<AngleList>,
    /// Minimum bits per (angle, SNR) point. [default: 100000]
    #[arg(long)]
    pub min_bits: Option<u64>,
    /// Hard cap on bits per point. [default: max(min-bits, 1000000)]
    #[arg(long)]
    pub max_bits: Option<u64>,
    /// Errors to collect before stopping past min-bits. [default: 200]
    #[arg(long)]
    pub target_errors: Option<u64>,
    /// Master seed; falls back to $CBF_SIM_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation threads; results do not depend on it. [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Total array elements, split into two sub-arrays. [default: 16]
    #[arg(long)]
    pub elements: Option<usize>,
    /// Beam-set JSON for CBF. [default: Golay pair, else a seeded stochastic search]
    #[arg(long)]
    pub beams: Option<PathBuf>,
    /// Symbols per random beam for RBF (even). [default: 2]
    #[arg(long)]
    pub rbf_block: Option<usize>,
    /// Draw separate Rayleigh coefficients for the two sub-arrays.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub independent_subarrays: Option<bool>,
}

/// Fully resolved `ber` settings; serializes to a document `--config` accepts.
#[derive(Debug, Clone, Serialize)]
pub struct BerConfig {
    pub scheme: SchemeArg,
    pub channel: ChannelArg,
    pub snr_db: SnrRange,
    pub angles: AngleList,
    pub min_bits: u64,
    pub max_bits: u64,
    pub target_errors: u64,
    pub seed: u64,
    pub workers: usize,
    pub elements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beams: Option<PathBuf>,
    pub rbf_block: usize,
    pub independent_subarrays: bool,
}

impl BerSettings {
    pub fn resolve(self, config: Option<&Path>) -> Result<BerConfig, Failure> {
        let file: Self = config.map(read_config).transpose()?.unwrap_or_default();
        let seed = match self.seed.or(file.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        // Relative beam paths inside a config file are relative to that file.
        let file_beams = file.beams.map(|b| match config.and_then(Path::parent) {
            Some(dir) if b.is_relative() => dir.join(b),
            _ => b,
        });
        let min_bits = self.min_bits.or(file.min_bits).unwrap_or(100_000);
        Ok(BerConfig {
            scheme: self
                .scheme
                .or(file.scheme)
                .ok_or(Failure::Missing("--scheme <SCHEME>"))?,
            channel: self
                .channel
                .or(file.channel)
                .ok_or(Failure::Missing("--channel <CHANNEL>"))?,
            snr_db: self.snr_db.or(file.snr_db).unwrap_or(SnrRange {
                start: 0.0,
                step: 2.0,
                stop: 12.0,
            }),
            angles: self
                .angles
                .or(file.angles)
                .unwrap_or_else(|| AngleList(default_angles_deg())),
            min_bits,
            max_bits: self
                .max_bits
                .or(file.max_bits)
                .unwrap_or(min_bits.max(1_000_000)),
            target_errors: self
                .target_errors
                .or(file.target_errors)
                .unwrap_or(cbf_core::simulation::DEFAULT_TARGET_ERRORS),
            seed,
            workers: self
                .workers
                .or(file.workers)
                .unwrap_or_else(default_workers),
            elements: self.elements.or(file.elements).unwrap_or(16),
            beams: self.beams.or(file_beams),
            rbf_block: self.rbf_block.or(file.rbf_block).unwrap_or(2),
            independent_subarrays: self
                .independent_subarrays
                .or(file.independent_subarrays)
                .unwrap_or(false),
        })
    }
}
