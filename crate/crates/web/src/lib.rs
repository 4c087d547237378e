//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Everything runs on the page's thread, so searches and simulations use a
//! single worker.

use cbf_core::array::{beam_pattern, composite_pattern, AngleGrid, ArrayGeometry, BeamPattern};
use cbf_core::channel::{ChannelKind, SnrPoint};
use cbf_core::search::{
    find_complementary_pair, find_complementary_triple, golay_construct, random_beam,
    ComplementaryBeamSet, PhaseCodebook, SearchMethod, SearchOptions,
};
use cbf_core::simulation::{run_ber, Scheme, SimConfig};
use cbf_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Power patterns sampled on a uniform angle grid.
#[wasm_bindgen]
pub struct PatternView {
    theta_deg: Vec<f64>,
    members: Vec<Vec<f64>>,
    composite: Vec<f64>,
    variance: f64,
    summary: String,
}

#[wasm_bindgen]
impl PatternView {
    #[wasm_bindgen(getter)]
    pub fn theta_deg(&self) -> Vec<f64> {
        self.theta_deg.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Power pattern of the `i`-th beam.
    pub fn member(&self, i: usize) -> Vec<f64> {
        self.members.get(i).cloned().unwrap_or_default()
    }

    /// Mean power of all beams.
    #[wasm_bindgen(getter)]
    pub fn composite(&self) -> Vec<f64> {
        self.composite.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn variance(&self) -> f64 {
        self.variance
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

impl PatternView {
    fn from_patterns(patterns: Vec<BeamPattern>, summary: String) -> Result<Self> {
        let theta_deg = patterns[0]
            .grid
            .points()
            .iter()
            .map(|t| t.to_degrees())
            .collect();
        let members = patterns.iter().map(|p| p.power()).collect();
        let comp = composite_pattern(patterns)?;
        Ok(Self {
            theta_deg,
            members,
            composite: comp.power,
            variance: comp.variance,
            summary,
        })
    }
}

#[wasm_bindgen]
pub struct BerEstimate {
    pub ber: f64,
    pub ci95: f64,
    pub bits: f64,
    pub errors: f64,
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn method_from(name: &str) -> Result<SearchMethod> {
    name.parse()
}

pub fn search(
    elements: usize,
    subarrays: usize,
    accuracy: usize,
    method: &str,
    seed: u32,
    budget: u32,
    points: usize,
) -> Result<PatternView> {
    let geometry = ArrayGeometry::ula(elements, subarrays, 0.5)?;
    let grid = AngleGrid::uniform_theta(points)?;
    let options = SearchOptions::new(method_from(method)?)
        .seed(seed.into())
        .budget(budget.into());
    let codebook = PhaseCodebook::new(accuracy)?;
    let set = match subarrays {
        2 => find_complementary_pair(&geometry, codebook, &grid, options)?,
        3 => find_complementary_triple(&geometry, codebook, &grid, options)?,
        m => return Err(Error::Domain(format!("choose 2 or 3 sub-arrays, not {m}"))),
    };
    let patterns = set
        .weights
        .iter()
        .zip(&set.subarrays)
        .map(|(w, &m)| beam_pattern(w, &set.geometry, m, &grid))
        .collect::<Result<Vec<_>>>()?;
    let indices: Vec<String> = set
        .phase_indices
        .iter()
        .map(|v| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let summary = format!(
        "{} search, K = {}: [{}], {} candidates",
        set.meta.method,
        set.accuracy,
        indices.join("] ["),
        set.meta.candidates_evaluated
    );
    PatternView::from_patterns(patterns, summary)
}

/// Searches complementary beams and returns their patterns.
#[wasm_bindgen]
pub fn complementary_beams(
    elements: usize,
    subarrays: usize,
    accuracy: usize,
    method: &str,
    seed: u32,
    budget: u32,
    points: usize,
) -> std::result::Result<PatternView, JsError> {
    search(elements, subarrays, accuracy, method, seed, budget, points).map_err(js)
}

pub fn random(elements: usize, seed: u32, points: usize) -> Result<PatternView> {
    let geometry = ArrayGeometry::ula(elements, 1, 0.5)?;
    let grid = AngleGrid::uniform_theta(points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
    let w = random_beam(elements, &mut rng);
    let pattern = beam_pattern(&w, &geometry, 0, &grid)?;
    PatternView::from_patterns(
        vec![pattern],
        format!("random beam over {elements} elements, seed {seed}"),
    )
}

/// Pattern of one random beam over the whole array, as used by random
/// beamforming in a single block.
#[wasm_bindgen]
pub fn random_beam_pattern(
    elements: usize,
    seed: u32,
    points: usize,
) -> std::result::Result<PatternView, JsError> {
    random(elements, seed, points).map_err(js)
}

fn default_beams(elements: usize) -> Result<ComplementaryBeamSet> {
    let geometry = ArrayGeometry::ula(elements, 2, 0.5)?;
    let grid = AngleGrid::default();
    if golay_construct(geometry.subarray_size()).is_ok() {
        find_complementary_pair(
            &geometry,
            PhaseCodebook::new(2)?,
            &grid,
            SearchOptions::new(SearchMethod::Golay),
        )
    } else {
        let options = SearchOptions::new(SearchMethod::Stochastic).budget(20_000);
        find_complementary_pair(&geometry, PhaseCodebook::new(4)?, &grid, options)
    }
}

pub fn estimate(
    scheme: &str,
    channel: &str,
    elements: usize,
    snr_db: f64,
    angle_deg: f64,
    bits: u32,
    seed: u32,
) -> Result<BerEstimate> {
    let scheme = match scheme {
        "cbf" => Scheme::cbf(default_beams(elements)?)?,
        "rbf" => Scheme::rbf(ArrayGeometry::ula(elements, 2, 0.5)?, 2)?,
        "single" => Scheme::Single,
        other => return Err(Error::Parse(format!("unknown scheme `{other}`"))),
    };
    let channel = match channel {
        "awgn" => ChannelKind::Awgn,
        "rayleigh" => ChannelKind::Rayleigh,
        other => return Err(Error::Parse(format!("unknown channel `{other}`"))),
    };
    let mut cfg = SimConfig::new(
        scheme,
        channel,
        vec![angle_deg.to_radians()],
        vec![SnrPoint::new(snr_db)],
    );
    cfg.min_bits = bits.into();
    cfg.max_bits = bits.into();
    cfg.seed = seed.into();
    let p = &run_ber(&cfg)?.points[0];
    Ok(BerEstimate {
        ber: p.ber,
        ci95: p.ci95,
        bits: p.bits as f64,
        errors: p.errors as f64,
    })
}

/// Monte Carlo BER at one angle and Eb/N0 for `cbf`, `rbf` or `single`.
#[wasm_bindgen]
pub fn ber_point(
    scheme: &str,
    channel: &str,
    elements: usize,
    snr_db: f64,
    angle_deg: f64,
    bits: u32,
    seed: u32,
) -> std::result::Result<BerEstimate, JsError> {
    estimate(scheme, channel, elements, snr_db, angle_deg, bits, seed).map_err(js)
}
