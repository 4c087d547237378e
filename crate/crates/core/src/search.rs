//! Search for sets of unit-modulus weight vectors whose power patterns sum to
//! a constant.
//!
//! Three strategies are available:
//!
//! * **exhaustive** enumerates every codebook combination. The first phase of
//!   each vector is pinned to index 0 because a global phase rotation leaves
//!   `|g(θ)|` unchanged, which shrinks the space from `K^(r·N_s)` to
//!   `K^(r·(N_s-1))` for a group of `r` beams.
//! * **golay** builds a binary complementary pair by recursive doubling; its
//!   composite pattern is flat for every power-of-two length.
//! * **stochastic** runs random restarts followed by single-coefficient hill
//!   climbing under a fixed evaluation budget.
//!
//! Candidates are ranked by `(variance, phase-index tuple)`, with variances
//! bucketed at [`TIE_QUANTUM`] so that round-off does not decide between
//! exactly tied optima.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array::{
    beam_pattern, composite_pattern, power_variance, AngleGrid, ArrayGeometry, WeightVector,
};
use crate::error::{domain, Error, Result};

/// Variances closer than this are treated as ties.
pub const TIE_QUANTUM: f64 = 1e-12;
/// Default evaluation budget of the stochastic search.
pub const DEFAULT_BUDGET: u64 = 100_000;
/// Default ceiling on exhaustive candidates.
pub const DEFAULT_CEILING: u128 = 10_000_000;

/// `exp(j 2π k / K)`, exact on the four axis points.
pub(crate) fn unit_phasor(k: usize, accuracy: usize) -> Complex64 {
    let k = k % accuracy;
    if (4 * k).is_multiple_of(accuracy) {
        match 4 * k / accuracy {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / accuracy as f64)
    }
}

/// The quantized phase set `{exp(j 2π k / K) : k = 0..K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCodebook {
    accuracy: usize,
}

impl PhaseCodebook {
    pub fn new(accuracy: usize) -> Result<Self> {
        if accuracy == 0 {
            return domain("codebook accuracy K must be at least 1");
        }
        Ok(Self { accuracy })
    }

    pub fn accuracy(&self) -> usize {
        self.accuracy
    }

    /// Phase step `2π / K`.
    pub fn granularity(&self) -> f64 {
        2.0 * PI / self.accuracy as f64
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        unit_phasor(k, self.accuracy)
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        (0..self.accuracy).map(|k| self.coefficient(k)).collect()
    }

    /// Weight vector whose `n`-th entry is coefficient `indices[n]`.
    pub fn weights(&self, indices: &[usize]) -> Result<WeightVector> {
        if let Some(&bad) = indices.iter().find(|&&k| k >= self.accuracy) {
            return domain(format!(
                "phase index {bad} outside codebook of size {}",
                self.accuracy
            ));
        }
        let phases = indices
            .iter()
            .map(|&k| self.granularity() * k as f64)
            .collect();
        let entries = indices.iter().map(|&k| self.coefficient(k)).collect();
        Ok(WeightVector::from_parts(phases, entries))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Exhaustive,
    Golay,
    Stochastic,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Golay => "golay",
            Self::Stochastic => "stochastic",
        })
    }
}

impl FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "golay" => Ok(Self::Golay),
            "stochastic" => Ok(Self::Stochastic),
            other => Err(Error::Parse(format!("unknown search method `{other}`"))),
        }
    }
}

/// Knobs shared by the search strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub method: SearchMethod,
    /// Seed of the stochastic search.
    pub seed: u64,
    /// Candidate evaluations for the stochastic search.
    pub budget: u64,
    /// Upper bound on `K^(r·(N_s-1))` accepted by the exhaustive search.
    pub ceiling: u128,
    /// Declared parallelism. Results depend on it only for the stochastic
    /// search, whose budget is split across per-worker streams.
    pub workers: usize,
}

impl SearchOptions {
    pub fn new(method: SearchMethod) -> Self {
        Self {
            method,
            seed: 0,
            budget: DEFAULT_BUDGET,
            ceiling: DEFAULT_CEILING,
            workers: 1,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn ceiling(mut self, ceiling: u128) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchMeta {
    pub method: SearchMethod,
    pub candidates_evaluated: u64,
    /// Present for the stochastic search only.
    pub seed: Option<u64>,
}

/// Weights found for a group of sub-arrays, scored on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryBeamSet {
    pub geometry: ArrayGeometry,
    /// Sub-arrays driven by `weights`, in order.
    pub subarrays: Vec<usize>,
    pub accuracy: usize,
    pub weights: Vec<WeightVector>,
    /// Codebook indices of every weight entry.
    pub phase_indices: Vec<Vec<usize>>,
    /// Composite pattern variance of `weights` on `grid`.
    pub variance: f64,
    pub grid: AngleGrid,
    pub meta: SearchMeta,
}

impl ComplementaryBeamSet {
    fn assemble(
        geometry: &ArrayGeometry,
        subarrays: &[usize],
        codebook: PhaseCodebook,
        phase_indices: Vec<Vec<usize>>,
        grid: &AngleGrid,
        meta: SearchMeta,
    ) -> Result<Self> {
        let weights = phase_indices
            .iter()
            .map(|idx| codebook.weights(idx))
            .collect::<Result<Vec<_>>>()?;
        let variance = composite_variance(geometry, subarrays, &weights, grid)?;
        Ok(Self {
            geometry: geometry.clone(),
            subarrays: subarrays.to_vec(),
            accuracy: codebook.accuracy(),
            weights,
            phase_indices,
            variance,
            grid: grid.clone(),
            meta,
        })
    }

    /// Serializes the set in the beam-set JSON layout.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BeamSetDocument::from(self)).expect("beam set serializes")
    }

    /// Parses a beam-set JSON document. Weights are rebuilt from their complex
    /// values and the variance is recomputed on the stored grid.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BeamSetDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }
}

/// Composite variance of `weights` driving `subarrays` of `geometry`.
pub fn composite_variance(
    geometry: &ArrayGeometry,
    subarrays: &[usize],
    weights: &[WeightVector],
    grid: &AngleGrid,
) -> Result<f64> {
    if subarrays.len() != weights.len() {
        return Err(Error::Dimension {
            expected: subarrays.len(),
            got: weights.len(),
        });
    }
    let patterns = weights
        .iter()
        .zip(subarrays)
        .map(|(w, &m)| beam_pattern(w, geometry, m, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(composite_pattern(patterns)?.variance)
}

#[derive(Serialize, Deserialize)]
struct WeightDocument {
    phase_indices: Vec<usize>,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct BeamSetDocument {
    geometry: ArrayGeometry,
    subarrays: Vec<usize>,
    #[serde(rename = "K")]
    accuracy: usize,
    method: SearchMethod,
    seed: Option<u64>,
    candidates_evaluated: u64,
    weights: Vec<WeightDocument>,
    variance: f64,
    grid: AngleGrid,
}

impl From<&ComplementaryBeamSet> for BeamSetDocument {
    fn from(set: &ComplementaryBeamSet) -> Self {
        Self {
            geometry: set.geometry.clone(),
            subarrays: set.subarrays.clone(),
            accuracy: set.accuracy,
            method: set.meta.method,
            seed: set.meta.seed,
            candidates_evaluated: set.meta.candidates_evaluated,
            weights: set
                .weights
                .iter()
                .zip(&set.phase_indices)
                .map(|(w, idx)| WeightDocument {
                    phase_indices: idx.clone(),
                    values: w.entries().to_vec(),
                })
                .collect(),
            variance: set.variance,
            grid: set.grid.clone(),
        }
    }
}

impl TryFrom<BeamSetDocument> for ComplementaryBeamSet {
    type Error = Error;

    fn try_from(doc: BeamSetDocument) -> Result<Self> {
        let ns = doc.geometry.subarray_size();
        let mut weights = Vec::with_capacity(doc.weights.len());
        let mut phase_indices = Vec::with_capacity(doc.weights.len());
        for w in doc.weights {
            if w.values.len() != ns {
                return Err(Error::Dimension {
                    expected: ns,
                    got: w.values.len(),
                });
            }
            weights.push(WeightVector::from_entries(w.values)?);
            phase_indices.push(w.phase_indices);
        }
        let variance = composite_variance(&doc.geometry, &doc.subarrays, &weights, &doc.grid)?;
        Ok(Self {
            geometry: doc.geometry,
            subarrays: doc.subarrays,
            accuracy: doc.accuracy,
            weights,
            phase_indices,
            variance,
            grid: doc.grid,
            meta: SearchMeta {
                method: doc.method,
                candidates_evaluated: doc.candidates_evaluated,
                seed: doc.seed,
            },
        })
    }
}

/// Binary complementary pair of length `len` from the doubling
/// `a' = [a b]`, `b' = [a -b]` seeded with `a = b = [1]`.
pub fn golay_construct(len: usize) -> Result<(WeightVector, WeightVector)> {
    let (a, b) = golay_signs(len)?;
    Ok((WeightVector::from_signs(&a), WeightVector::from_signs(&b)))
}

fn golay_signs(len: usize) -> Result<(Vec<i8>, Vec<i8>)> {
    if !len.is_power_of_two() {
        return Err(Error::UnsupportedLength(len));
    }
    let mut a = vec![1i8];
    let mut b = vec![1i8];
    while a.len() < len {
        let next_a: Vec<i8> = a.iter().chain(&b).copied().collect();
        let next_b: Vec<i8> = a.iter().copied().chain(b.iter().map(|s| -s)).collect();
        a = next_a;
        b = next_b;
    }
    Ok((a, b))
}

/// Complementary pair for the two sub-arrays of `geometry`.
pub fn find_complementary_pair(
    geometry: &ArrayGeometry,
    codebook: PhaseCodebook,
    grid: &AngleGrid,
    options: SearchOptions,
) -> Result<ComplementaryBeamSet> {
    if geometry.num_subarrays() != 2 {
        return domain(format!(
            "pair search needs 2 sub-arrays, geometry has {}",
            geometry.num_subarrays()
        ));
    }
    find_complementary_set(geometry, &[0, 1], codebook, grid, options)
}

/// Complementary triple for the three sub-arrays of `geometry`. Only the
/// exhaustive method guarantees the global minimum.
pub fn find_complementary_triple(
    geometry: &ArrayGeometry,
    codebook: PhaseCodebook,
    grid: &AngleGrid,
    options: SearchOptions,
) -> Result<ComplementaryBeamSet> {
    if geometry.num_subarrays() != 3 {
        return domain(format!(
            "triple search needs 3 sub-arrays, geometry has {}",
            geometry.num_subarrays()
        ));
    }
    find_complementary_set(geometry, &[0, 1, 2], codebook, grid, options)
}

/// Searches weights for an arbitrary group of sub-arrays (size 2 or 3).
pub fn find_complementary_set(
    geometry: &ArrayGeometry,
    subarrays: &[usize],
    codebook: PhaseCodebook,
    grid: &AngleGrid,
    options: SearchOptions,
) -> Result<ComplementaryBeamSet> {
    let group = subarrays.len();
    if !(2..=3).contains(&group) {
        return domain(format!("groups hold 2 or 3 sub-arrays, got {group}"));
    }
    for &m in subarrays {
        geometry.subarray_elements(m)?;
    }
    let ns = geometry.subarray_size();
    match options.method {
        SearchMethod::Golay => {
            if group != 2 {
                return domain("the Golay construction only yields pairs");
            }
            let (a, b) = golay_signs(ns)?;
            let binary = PhaseCodebook::new(2)?;
            let to_idx = |s: &[i8]| s.iter().map(|&x| usize::from(x < 0)).collect::<Vec<_>>();
            let meta = SearchMeta {
                method: SearchMethod::Golay,
                candidates_evaluated: 1,
                seed: None,
            };
            ComplementaryBeamSet::assemble(
                geometry,
                subarrays,
                binary,
                vec![to_idx(&a), to_idx(&b)],
                grid,
                meta,
            )
        }
        SearchMethod::Exhaustive => {
            let space = candidate_space(codebook.accuracy(), ns, group);
            if space > options.ceiling {
                return Err(Error::Capacity {
                    candidates: space,
                    ceiling: options.ceiling,
                });
            }
            let scorer = Scorer::new(geometry, codebook, grid);
            let (indices, evaluated) = exhaustive(&scorer, group, options.workers);
            let meta = SearchMeta {
                method: SearchMethod::Exhaustive,
                candidates_evaluated: evaluated,
                seed: None,
            };
            ComplementaryBeamSet::assemble(geometry, subarrays, codebook, indices, grid, meta)
        }
        SearchMethod::Stochastic => {
            let scorer = Scorer::new(geometry, codebook, grid);
            let (indices, evaluated) = stochastic(&scorer, group, &options);
            let meta = SearchMeta {
                method: SearchMethod::Stochastic,
                candidates_evaluated: evaluated,
                seed: Some(options.seed),
            };
            ComplementaryBeamSet::assemble(geometry, subarrays, codebook, indices, grid, meta)
        }
    }
}

/// `K^(group·(N_s-1))`, saturating.
fn candidate_space(accuracy: usize, ns: usize, group: usize) -> u128 {
    let exp = (group * (ns - 1)) as u32;
    (accuracy as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

/// Ranking key: bucketed variance first, then the phase-index tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Rank {
    bucket: i64,
    indices: Vec<Vec<usize>>,
}

impl Rank {
    fn new(variance: f64, mut indices: Vec<Vec<usize>>) -> Self {
        indices.sort();
        Self {
            bucket: (variance / TIE_QUANTUM).round() as i64,
            indices,
        }
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bucket
            .cmp(&other.bucket)
            .then_with(|| self.indices.cmp(&other.indices))
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn better(best: Option<Rank>, candidate: Rank) -> Option<Rank> {
    match best {
        Some(b) if b <= candidate => Some(b),
        _ => Some(candidate),
    }
}

/// Precomputed steering terms shared by the exhaustive and stochastic search.
///
/// Power patterns do not depend on which sub-array a vector drives, so every
/// candidate is scored at the element positions of a single sub-array.
struct Scorer {
    accuracy: usize,
    ns: usize,
    /// `steer[n][g] = a_n(θ_g) / √N_s`.
    steer: Vec<Vec<Complex64>>,
    coefficients: Vec<Complex64>,
}

impl Scorer {
    fn new(geometry: &ArrayGeometry, codebook: PhaseCodebook, grid: &AngleGrid) -> Self {
        let ns = geometry.subarray_size();
        let norm = (ns as f64).sqrt().recip();
        let d = geometry.spacing();
        let steer = (0..ns)
            .map(|n| {
                grid.points()
                    .iter()
                    .map(|t| Complex64::from_polar(norm, -2.0 * PI * d * n as f64 * t.sin()))
                    .collect()
            })
            .collect();
        Self {
            accuracy: codebook.accuracy(),
            ns,
            steer,
            coefficients: codebook.coefficients(),
        }
    }

    fn grid_len(&self) -> usize {
        self.steer[0].len()
    }

    fn gains(&self, indices: &[usize]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.grid_len()];
        for (n, &k) in indices.iter().enumerate() {
            let c = self.coefficients[k];
            for (acc, s) in g.iter_mut().zip(&self.steer[n]) {
                *acc += c * s;
            }
        }
        g
    }

    fn power(&self, indices: &[usize]) -> Vec<f64> {
        self.gains(indices).iter().map(|g| g.norm_sqr()).collect()
    }

    /// Phase indices of reduced candidate `c` (first index pinned to 0, most
    /// significant digit first so that `c` follows lexicographic order).
    fn decode(&self, mut c: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ns];
        for slot in idx[1..].iter_mut().rev() {
            *slot = c % self.accuracy;
            c /= self.accuracy;
        }
        idx
    }

    fn reduced_count(&self) -> usize {
        self.accuracy.pow((self.ns - 1) as u32)
    }
}

struct Centered {
    variance: Vec<f64>,
    centered: Vec<Vec<f64>>,
}

impl Centered {
    fn new(scorer: &Scorer) -> Self {
        let count = scorer.reduced_count();
        let mut variance = Vec::with_capacity(count);
        let mut centered = Vec::with_capacity(count);
        for c in 0..count {
            let p = scorer.power(&scorer.decode(c));
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            let dev: Vec<f64> = p.iter().map(|x| x - mean).collect();
            variance.push(dev.iter().map(|x| x * x).sum::<f64>() / p.len() as f64);
            centered.push(dev);
        }
        Self { variance, centered }
    }

    fn covariance(&self, i: usize, j: usize) -> f64 {
        let a = &self.centered[i];
        let b = &self.centered[j];
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
    }
}

/// Scores every non-decreasing candidate tuple. The variance of a mean of
/// power patterns expands into per-pattern variances and pairwise covariances.
fn exhaustive(scorer: &Scorer, group: usize, workers: usize) -> (Vec<Vec<usize>>, u64) {
    let table = Centered::new(scorer);
    let count = scorer.reduced_count();
    let cov_matrix = (group == 3).then(|| {
        (0..count)
            .map(|i| {
                (0..count)
                    .map(|j| table.covariance(i, j))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    });

    let scan = |worker: usize| -> (Option<(Rank, Vec<usize>)>, u64) {
        let mut best: Option<(Rank, Vec<usize>)> = None;
        let mut evaluated = 0u64;
        let mut consider = |tuple: Vec<usize>, var: f64| {
            evaluated += 1;
            let rank = Rank::new(var, tuple.iter().map(|&c| scorer.decode(c)).collect());
            if best.as_ref().is_none_or(|(b, _)| rank < *b) {
                best = Some((rank, tuple));
            }
        };
        for i in (worker..count).step_by(workers) {
            for j in i..count {
                let vij = table.variance[i] + table.variance[j];
                match &cov_matrix {
                    None => {
                        let var = (vij + 2.0 * table.covariance(i, j)) / 4.0;
                        consider(vec![i, j], var);
                    }
                    Some(cov) => {
                        for k in j..count {
                            let var = (vij
                                + table.variance[k]
                                + 2.0 * (cov[i][j] + cov[i][k] + cov[j][k]))
                                / 9.0;
                            consider(vec![i, j, k], var);
                        }
                    }
                }
            }
        }
        (best, evaluated)
    };

    let workers = workers.max(1).min(count.max(1));
    let partials: Vec<_> = if workers == 1 {
        vec![scan(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || scan(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };

    let evaluated = partials.iter().map(|(_, e)| e).sum();
    let (rank, _) = partials
        .into_iter()
        .filter_map(|(b, _)| b)
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("at least one candidate");
    (rank.indices, evaluated)
}

/// Random restarts with single-coefficient hill climbing. The evaluation
/// sequence of each worker does not depend on the budget, so the best
/// variance found can only improve as the budget grows.
fn stochastic(scorer: &Scorer, group: usize, options: &SearchOptions) -> (Vec<Vec<usize>>, u64) {
    let workers = options.workers.max(1);
    let share = |w: usize| {
        options.budget / workers as u64 + u64::from((w as u64) < options.budget % workers as u64)
    };
    let run = |w: usize| climb(scorer, group, options.seed, w as u64, share(w));
    let partials: Vec<_> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };
    let evaluated = partials.iter().map(|(_, e)| e).sum();
    let best = partials
        .into_iter()
        .filter_map(|(b, _)| b)
        .min()
        .map(|r| r.indices)
        .unwrap_or_else(|| vec![vec![0; scorer.ns]; group]);
    (best, evaluated)
}

fn climb(
    scorer: &Scorer,
    group: usize,
    seed: u64,
    stream: u64,
    budget: u64,
) -> (Option<Rank>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let k = scorer.accuracy;
    let ns = scorer.ns;
    let grid_len = scorer.grid_len();
    let moves_exist = ns > 1 && k > 1;
    let patience = 2 * group * (ns.saturating_sub(1)) * k.saturating_sub(1);

    let score = |gains: &[Vec<Complex64>]| -> f64 {
        let power: Vec<f64> = (0..grid_len)
            .map(|g| gains.iter().map(|m| m[g].norm_sqr()).sum::<f64>() / group as f64)
            .collect();
        power_variance(&power)
    };

    let mut best: Option<Rank> = None;
    let mut evaluated = 0u64;
    while evaluated < budget {
        let mut indices: Vec<Vec<usize>> = (0..group)
            .map(|_| {
                let mut v = vec![0; ns];
                for slot in v.iter_mut().skip(1) {
                    *slot = rng.random_range(0..k);
                }
                v
            })
            .collect();
        let mut gains: Vec<Vec<Complex64>> = indices.iter().map(|v| scorer.gains(v)).collect();
        let mut current = score(&gains);
        evaluated += 1;
        best = better(best, Rank::new(current, indices.clone()));
        if !moves_exist {
            break;
        }

        let mut stall = 0;
        while evaluated < budget && stall < patience {
            let member = rng.random_range(0..group);
            let pos = rng.random_range(1..ns);
            let old = indices[member][pos];
            let new = (old + rng.random_range(1..k)) % k;
            let delta = scorer.coefficients[new] - scorer.coefficients[old];
            let mut trial = gains.clone();
            for (g, s) in trial[member].iter_mut().zip(&scorer.steer[pos]) {
                *g += delta * s;
            }
            let var = score(&trial);
            evaluated += 1;
            if var < current - TIE_QUANTUM {
                indices[member][pos] = new;
                gains = trial;
                current = var;
                stall = 0;
                best = better(best, Rank::new(current, indices.clone()));
            } else {
                stall += 1;
            }
        }
    }
    (best, evaluated)
}

/// Splits `num_chains` RF chains into consecutive pairs, folding the last
/// three into one group when the count is odd. Chains are numbered from 0.
pub fn group_rf_chains(num_chains: usize) -> Result<Vec<Vec<usize>>> {
    if num_chains < 2 {
        return domain(format!("need at least 2 RF chains, got {num_chains}"));
    }
    let pairs = if num_chains.is_multiple_of(2) {
        num_chains / 2
    } else {
        (num_chains - 3) / 2
    };
    let mut groups: Vec<Vec<usize>> = (0..pairs).map(|p| vec![2 * p, 2 * p + 1]).collect();
    if num_chains % 2 == 1 {
        groups.push((num_chains - 3..num_chains).collect());
    }
    Ok(groups)
}

/// Unit-modulus weights with independent phases uniform on `[0, 2π)`.
pub fn random_beam<R: Rng + ?Sized>(len: usize, rng: &mut R) -> WeightVector {
    WeightVector::from_phases((0..len).map(|_| rng.random_range(0.0..2.0 * PI)).collect())
}
