//! Monte Carlo BER campaigns for three broadcast schemes:
//!
//! * `cbf`: Alamouti-coded streams over two sub-arrays, each shaped by one
//!   beam of a complementary pair, each at half the power budget.
//! * `rbf`: one stream over the whole array with a fresh random weight vector
//!   per pattern block.
//! * `single`: one isotropic element at the full power budget.
//!
//! Every scheme radiates unit average power per symbol period.
//!
//! Work is cut into fixed-size chunks keyed by `(angle, snr, chunk)`. Each
//! chunk draws from its own ChaCha stream, and chunk statistics are folded in
//! index order until the stopping rule fires, so a curve depends only on the
//! configuration and seed.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array::{gain_at, ArrayGeometry, WeightVector};
use crate::channel::{
    complex_gaussian, qpsk_demodulate_all, qpsk_modulate, rayleigh_block, ChannelKind,
    ChannelRealization, SnrPoint, SymbolFrame, DEFAULT_BLOCK_LENGTH,
};
use crate::error::{domain, Error, Result};
use crate::search::{random_beam, ComplementaryBeamSet};
use crate::stbc::{
    alamouti_encode, composite_channel, mmse_decode, receive, CompositeChannel, NoiseModel,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Smallest accepted `min_bits`.
pub const MIN_BITS_FLOOR: u64 = 10_000;
/// Errors per point the stopping rule aims for.
pub const DEFAULT_TARGET_ERRORS: u64 = 200;
/// Bits simulated per chunk (rounded up to whole units).
const CHUNK_BITS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Cbf,
    Rbf,
    Single,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cbf => "cbf",
            Self::Rbf => "rbf",
            Self::Single => "single",
        })
    }
}

/// A broadcast scheme together with what it needs to transmit.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Cbf {
        beams: ComplementaryBeamSet,
    },
    Rbf {
        geometry: ArrayGeometry,
        block_length: usize,
    },
    Single,
}

impl Scheme {
    pub fn cbf(beams: ComplementaryBeamSet) -> Result<Self> {
        if beams.geometry.num_subarrays() != 2 || beams.weights.len() != 2 {
            return domain("cbf needs a beam pair over exactly two sub-arrays");
        }
        if !beams.variance.is_finite() {
            return domain("cbf beam set has no recorded variance");
        }
        Ok(Self::Cbf { beams })
    }

    /// Random beamforming over all elements of `geometry`. The pattern
    /// changes every `block_length` symbols, which must be even so that blocks
    /// align with fading blocks.
    pub fn rbf(geometry: ArrayGeometry, block_length: usize) -> Result<Self> {
        if block_length < 2 || !block_length.is_multiple_of(2) {
            return domain(format!(
                "rbf block length must be even and ≥ 2, got {block_length}"
            ));
        }
        Ok(Self::Rbf {
            geometry,
            block_length,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            Self::Cbf { .. } => SchemeKind::Cbf,
            Self::Rbf { .. } => SchemeKind::Rbf,
            Self::Single => SchemeKind::Single,
        }
    }

    /// Symbols per independent unit (codeword or pattern block).
    fn unit_symbols(&self) -> usize {
        match self {
            Self::Rbf { block_length, .. } => *block_length,
            _ => DEFAULT_BLOCK_LENGTH,
        }
    }
}

/// What the receiver observes plus the channel state it is assumed to know.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub samples: Vec<Complex64>,
    pub state: ChannelState,
    /// Sum of `|x|²` over all radiating elements and symbol periods.
    pub radiated_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelState {
    /// One composite channel per Alamouti codeword.
    Stbc(Vec<CompositeChannel>),
    /// One scalar gain per symbol.
    Scalar(Vec<Complex64>),
}

/// The realization in force at each of the first `symbols` symbols.
fn per_symbol(channels: &[ChannelRealization], symbols: usize) -> Result<Vec<&ChannelRealization>> {
    let out: Vec<_> = channels
        .iter()
        .flat_map(|c| std::iter::repeat_n(c, c.block_length))
        .take(symbols)
        .collect();
    if out.len() < symbols {
        return domain(format!(
            "channel realizations cover {} symbols, frame needs {symbols}",
            out.len()
        ));
    }
    Ok(out)
}

fn noise_pair<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> [Complex64; 2] {
    if variance == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [
        complex_gaussian(variance, rng),
        complex_gaussian(variance, rng),
    ]
}

/// Per-stream beam gains of a complementary pair at `angle`, including the
/// `1/√2` power split.
pub fn cbf_gains(beams: &ComplementaryBeamSet, angle: f64) -> Result<[Complex64; 2]> {
    let g = |i: usize| {
        gain_at(
            &beams.weights[i],
            &beams.geometry,
            beams.subarrays[i],
            angle,
        )
    };
    Ok([g(0)? * FRAC_1_SQRT_2, g(1)? * FRAC_1_SQRT_2])
}

/// Sum over elements of `|w_n|² / N_s`, the fraction of a stream's power that
/// leaves the array.
fn element_power(weights: &[Complex64]) -> f64 {
    weights.iter().map(|w| w.norm_sqr()).sum::<f64>() / weights.len() as f64
}

/// Alamouti-encodes symbol pairs and sends them through the two beams.
pub fn transmit_cbf<R: Rng + ?Sized>(
    frame: &SymbolFrame,
    beams: &ComplementaryBeamSet,
    angle: f64,
    channels: &[ChannelRealization],
    noise_variance: f64,
    rng: &mut R,
) -> Result<Received> {
    if !frame.symbols.len().is_multiple_of(2) {
        return domain("cbf transmits whole Alamouti codewords; symbol count must be even");
    }
    if beams.weights.len() != 2 {
        return domain("cbf needs exactly two beams");
    }
    let gains = cbf_gains(beams, angle)?;
    let stream_power = [
        element_power(beams.weights[0].entries()) / 2.0,
        element_power(beams.weights[1].entries()) / 2.0,
    ];
    let mut samples = Vec::with_capacity(frame.symbols.len());
    let mut state = Vec::with_capacity(frame.symbols.len() / 2);
    let mut energy = 0.0;
    let blocks = per_symbol(channels, frame.symbols.len())?;
    for (c, pair) in frame.symbols.chunks_exact(2).enumerate() {
        let ch = blocks[2 * c];
        if !std::ptr::eq(ch, blocks[2 * c + 1]) {
            return domain("fading block boundary splits an Alamouti codeword");
        }
        let cw = alamouti_encode(pair[0], pair[1]);
        for (m, power) in stream_power.iter().enumerate() {
            energy += power * (cw.symbol(m, 0).norm_sqr() + cw.symbol(m, 1).norm_sqr());
        }
        let noise = noise_pair(noise_variance, rng);
        let (y1, y2) = receive(&cw, gains, [ch.h1, ch.h2], noise);
        samples.push(y1);
        samples.push(y2);
        state.push(composite_channel(gains[0], gains[1], ch.h1, ch.h2));
    }
    Ok(Received {
        samples,
        state: ChannelState::Stbc(state),
        radiated_energy: energy,
    })
}

/// One stream over the whole array, redrawing the weights every
/// `block_length` symbols.
#[allow(clippy::too_many_arguments)]
pub fn transmit_rbf<R: Rng + ?Sized>(
    frame: &SymbolFrame,
    geometry: &ArrayGeometry,
    block_length: usize,
    angle: f64,
    channels: &[ChannelRealization],
    noise_variance: f64,
    rng: &mut R,
) -> Result<Received> {
    if block_length == 0 {
        return domain("rbf block length must be positive");
    }
    let full = geometry.as_single_subarray();
    let n = geometry.total_elements();
    let mut samples = Vec::with_capacity(frame.symbols.len());
    let mut gains = Vec::with_capacity(frame.symbols.len());
    let mut energy = 0.0;
    let mut weights = None;
    let blocks = per_symbol(channels, frame.symbols.len())?;
    for (t, s) in frame.symbols.iter().enumerate() {
        if t % block_length == 0 {
            weights = Some(random_beam(n, rng));
        }
        let w = weights.as_ref().expect("drawn at block start");
        let ch = blocks[t];
        // Elements of each sub-array see that sub-array's coefficient.
        let g = if ch.h1 == ch.h2 {
            gain_at(w, &full, 0, angle)? * ch.h1
        } else {
            per_subarray_gain(w, geometry, angle, [ch.h1, ch.h2])?
        };
        energy += element_power(w.entries()) * s.norm_sqr();
        let noise = if noise_variance == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            complex_gaussian(noise_variance, rng)
        };
        samples.push(g * s + noise);
        gains.push(g);
    }
    Ok(Received {
        samples,
        state: ChannelState::Scalar(gains),
        radiated_energy: energy,
    })
}

/// Full-array gain when sub-array `m` sees coefficient `h[m]`.
fn per_subarray_gain(
    w: &WeightVector,
    geometry: &ArrayGeometry,
    angle: f64,
    h: [Complex64; 2],
) -> Result<Complex64> {
    // gain_at normalizes by 1/√N_s; the full array uses 1/√N.
    let rescale = (geometry.subarray_size() as f64 / geometry.total_elements() as f64).sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    for (m, hm) in h.iter().enumerate().take(geometry.num_subarrays()) {
        let entries: Vec<Complex64> = geometry
            .subarray_elements(m)?
            .into_iter()
            .map(|n| w.entries()[n])
            .collect();
        let part = WeightVector::from_entries(entries)?;
        total += gain_at(&part, geometry, m, angle)? * rescale * hm;
    }
    Ok(total)
}

/// The benchmark: one isotropic element carrying the whole power budget.
pub fn transmit_single<R: Rng + ?Sized>(
    frame: &SymbolFrame,
    channels: &[ChannelRealization],
    noise_variance: f64,
    rng: &mut R,
) -> Result<Received> {
    let mut samples = Vec::with_capacity(frame.symbols.len());
    let mut gains = Vec::with_capacity(frame.symbols.len());
    let mut energy = 0.0;
    let blocks = per_symbol(channels, frame.symbols.len())?;
    for (s, ch) in frame.symbols.iter().zip(blocks) {
        let h = ch.h1;
        energy += s.norm_sqr();
        let noise = if noise_variance == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            complex_gaussian(noise_variance, rng)
        };
        samples.push(h * s + noise);
        gains.push(h);
    }
    Ok(Received {
        samples,
        state: ChannelState::Scalar(gains),
        radiated_energy: energy,
    })
}

/// Linear MMSE estimates of the transmitted symbols.
pub fn detect(received: &Received, noise_variance: f64) -> Result<Vec<Complex64>> {
    let noise = NoiseModel::new(noise_variance)?;
    match &received.state {
        ChannelState::Stbc(channels) => {
            let mut out = Vec::with_capacity(received.samples.len());
            for (y, h) in received.samples.chunks_exact(2).zip(channels) {
                out.extend(mmse_decode((y[0], y[1]), h, noise)?);
            }
            Ok(out)
        }
        ChannelState::Scalar(gains) => received
            .samples
            .iter()
            .zip(gains)
            .map(|(y, g)| {
                let denom = g.norm_sqr() + noise_variance;
                if denom == 0.0 {
                    Err(Error::Singular)
                } else {
                    Ok(g.conj() * y / denom)
                }
            })
            .collect(),
    }
}

/// Default observation angles in degrees: broadside, the first null of a
/// uniform 8-element beam, and progressively wider angles.
pub fn default_angles_deg() -> Vec<f64> {
    let null = 0.25f64.asin().to_degrees();
    vec![0.0, null, -null, 30.0, -30.0, 60.0, -60.0, 85.0, -85.0]
}

/// A full campaign description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub channel: ChannelKind,
    /// Observation angles, radians.
    pub angles: Vec<f64>,
    pub snr_grid: Vec<SnrPoint>,
    pub min_bits: u64,
    /// Keep simulating past `min_bits` until this many errors are seen...
    pub target_errors: u64,
    /// ...or this many bits have been spent.
    pub max_bits: u64,
    /// Rayleigh only: both sub-arrays see the same coefficient.
    pub equal_subarrays: bool,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(
        scheme: Scheme,
        channel: ChannelKind,
        angles: Vec<f64>,
        snr_grid: Vec<SnrPoint>,
    ) -> Self {
        Self {
            scheme,
            channel,
            angles,
            snr_grid,
            min_bits: 100_000,
            target_errors: DEFAULT_TARGET_ERRORS,
            max_bits: 1_000_000,
            equal_subarrays: true,
            seed: 0,
            workers: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.angles.is_empty() {
            return domain("no observation angles");
        }
        if self.snr_grid.is_empty() {
            return domain("empty SNR grid");
        }
        if self.min_bits < MIN_BITS_FLOOR {
            return domain(format!("min_bits must be at least {MIN_BITS_FLOOR}"));
        }
        if self.max_bits < self.min_bits {
            return domain("max_bits must not be below min_bits");
        }
        if let Some(a) = self
            .angles
            .iter()
            .find(|a| !a.is_finite() || a.abs() > std::f64::consts::FRAC_PI_2 + 1e-12)
        {
            return domain(format!("angle {a} rad outside the ULA visible region"));
        }
        Ok(())
    }
}

/// Statistics for one `(angle, snr)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub angle: f64,
    pub eb_n0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Half-width of the 95% confidence interval.
    pub ci95: f64,
    /// Radiated energy per symbol period, averaged over the run.
    pub radiated_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub scheme: SchemeKind,
    pub channel: ChannelKind,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn point(&self, angle: f64, eb_n0_db: f64) -> Option<&BerPoint> {
        self.points
            .iter()
            .find(|p| (p.angle - angle).abs() < 1e-12 && (p.eb_n0_db - eb_n0_db).abs() < 1e-12)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    bits: u64,
    errors: u64,
    units: u64,
    /// Σ over units of (errors in unit)².
    errors_sq: f64,
    energy: f64,
    periods: u64,
}

impl ChunkStats {
    fn merge(&mut self, o: &ChunkStats) {
        self.bits += o.bits;
        self.errors += o.errors;
        self.units += o.units;
        self.errors_sq += o.errors_sq;
        self.energy += o.energy;
        self.periods += o.periods;
    }
}

fn stream_id(angle: usize, snr: usize, chunk: u64) -> u64 {
    ((angle as u64) << 48) | ((snr as u64) << 32) | chunk
}

fn random_bits(rng: &mut ChaCha8Rng, count: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word = rng.next_u64();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}

struct PointJob<'a> {
    config: &'a SimConfig,
    angle: f64,
    angle_idx: usize,
    snr_idx: usize,
    noise_variance: f64,
    units_per_chunk: usize,
    unit_symbols: usize,
}

impl PointJob<'_> {
    fn run_chunk(&self, chunk: u64) -> Result<ChunkStats> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream_id(self.angle_idx, self.snr_idx, chunk));

        let symbols = self.units_per_chunk * self.unit_symbols;
        let bits = random_bits(&mut rng, 2 * symbols);
        let frame = qpsk_modulate(&bits)?;
        let blocks = symbols / DEFAULT_BLOCK_LENGTH;
        let channels = match self.config.channel {
            ChannelKind::Awgn => vec![ChannelRealization::unit(DEFAULT_BLOCK_LENGTH); blocks],
            ChannelKind::Rayleigh => rayleigh_block(
                blocks,
                self.config.equal_subarrays,
                DEFAULT_BLOCK_LENGTH,
                &mut rng,
            )?,
        };
        let nv = self.noise_variance;
        let received = match &self.config.scheme {
            Scheme::Cbf { beams } => {
                transmit_cbf(&frame, beams, self.angle, &channels, nv, &mut rng)?
            }
            Scheme::Rbf {
                geometry,
                block_length,
            } => transmit_rbf(
                &frame,
                geometry,
                *block_length,
                self.angle,
                &channels,
                nv,
                &mut rng,
            )?,
            Scheme::Single => transmit_single(&frame, &channels, nv, &mut rng)?,
        };
        let decided = qpsk_demodulate_all(&detect(&received, nv)?);

        let unit_bits = 2 * self.unit_symbols;
        let mut stats = ChunkStats {
            bits: bits.len() as u64,
            units: self.units_per_chunk as u64,
            energy: received.radiated_energy,
            periods: symbols as u64,
            ..Default::default()
        };
        for (sent, got) in bits
            .chunks_exact(unit_bits)
            .zip(decided.chunks_exact(unit_bits))
        {
            let e = sent.iter().zip(got).filter(|(a, b)| a != b).count() as u64;
            stats.errors += e;
            stats.errors_sq += (e * e) as f64;
        }
        Ok(stats)
    }

    fn done(&self, s: &ChunkStats) -> bool {
        let c = self.config;
        s.bits >= c.min_bits && (s.errors >= c.target_errors || s.bits >= c.max_bits)
    }

    fn run(&self) -> Result<BerPoint> {
        let workers = self.config.workers.max(1);
        let mut total = ChunkStats::default();
        let mut next = 0u64;
        'outer: loop {
            let batch: Vec<u64> = (next..next + workers as u64).collect();
            next += workers as u64;
            let results: Vec<Result<ChunkStats>> = if workers == 1 {
                vec![self.run_chunk(batch[0])]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = batch
                        .iter()
                        .map(|&c| s.spawn(move || self.run_chunk(c)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("simulation worker panicked"))
                        .collect()
                })
            };
            for r in results {
                total.merge(&r?);
                if self.done(&total) {
                    break 'outer;
                }
            }
        }
        Ok(self.summarize(&total))
    }

    fn summarize(&self, s: &ChunkStats) -> BerPoint {
        let ber = s.errors as f64 / s.bits as f64;
        // Errors inside one unit share a pattern and a fading coefficient, so
        // the interval treats units, not bits, as the independent samples.
        let unit_bits = (2 * self.unit_symbols) as f64;
        let n = s.units as f64;
        let mean = s.errors as f64 / unit_bits / n;
        let sum_sq = s.errors_sq / (unit_bits * unit_bits);
        let var = if s.units > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        BerPoint {
            angle: self.angle,
            eb_n0_db: self.config.snr_grid[self.snr_idx].eb_n0_db,
            bits: s.bits,
            errors: s.errors,
            ber,
            ci95: Z95 * (var / n).sqrt(),
            radiated_power: s.energy / s.periods as f64,
        }
    }
}

/// Runs every `(angle, snr)` cell of `config`, angles outermost.
pub fn run_ber(config: &SimConfig) -> Result<BerCurve> {
    config.validate()?;
    let unit_symbols = config.scheme.unit_symbols();
    let units_per_chunk = CHUNK_BITS.div_ceil(2 * unit_symbols);
    let mut points = Vec::with_capacity(config.angles.len() * config.snr_grid.len());
    for (angle_idx, &angle) in config.angles.iter().enumerate() {
        for (snr_idx, snr) in config.snr_grid.iter().enumerate() {
            let job = PointJob {
                config,
                angle,
                angle_idx,
                snr_idx,
                noise_variance: snr.noise_variance(),
                units_per_chunk,
                unit_symbols,
            };
            points.push(job.run()?);
        }
    }
    Ok(BerCurve {
        scheme: config.scheme.kind(),
        channel: config.channel,
        points,
    })
}
