//! Uniform linear arrays split into sub-arrays: steering vectors, beam
//! patterns, composite patterns and the angular variance metric.
//!
//! Element `n` of the whole array (counted from zero) sits at `n * spacing`
//! wavelengths from the reference, so its far-field phase at departure angle
//! `theta` is `-2π · spacing · n · sin(theta)`. Sub-arrays keep their global
//! element offsets; this is what makes the sum of two sub-array patterns equal
//! the pattern of the concatenated weights.
//!
//! Patterns are normalized by `1/√N_s`, so a unit-modulus weight vector has
//! unit mean power over one period of the electrical angle `ψ = 2π d sinθ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance used when validating unit-modulus inputs.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// A uniform linear array of `total_elements` isotropic elements partitioned
/// into `num_subarrays` equally sized sub-arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    total_elements: usize,
    num_subarrays: usize,
    /// Element pitch in wavelengths (d/λ).
    spacing: f64,
    /// `partition[n]` is the sub-array driving element `n`.
    partition: Vec<usize>,
}

impl ArrayGeometry {
    /// ULA with contiguous sub-arrays: sub-array `m` drives elements
    /// `m*N_s .. (m+1)*N_s`.
    pub fn ula(total_elements: usize, num_subarrays: usize, spacing: f64) -> Result<Self> {
        if num_subarrays == 0 {
            return domain("number of sub-arrays must be at least 1");
        }
        if total_elements == 0 || !total_elements.is_multiple_of(num_subarrays) {
            return domain(format!(
                "{total_elements} elements cannot be split into {num_subarrays} equal sub-arrays"
            ));
        }
        let ns = total_elements / num_subarrays;
        let partition = (0..total_elements).map(|n| n / ns).collect();
        Self::with_partition(total_elements, num_subarrays, spacing, partition)
    }

    /// ULA with an explicit element → sub-array assignment. Every sub-array
    /// must receive the same number of elements.
    pub fn with_partition(
        total_elements: usize,
        num_subarrays: usize,
        spacing: f64,
        partition: Vec<usize>,
    ) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return domain(format!("element spacing must be positive, got {spacing}"));
        }
        if partition.len() != total_elements {
            return Err(Error::Dimension {
                expected: total_elements,
                got: partition.len(),
            });
        }
        if num_subarrays == 0 || !total_elements.is_multiple_of(num_subarrays) {
            return domain("sub-arrays must have equal, non-zero size");
        }
        let ns = total_elements / num_subarrays;
        let mut counts = vec![0usize; num_subarrays];
        for &m in &partition {
            if m >= num_subarrays {
                return domain(format!("element assigned to unknown sub-array {m}"));
            }
            counts[m] += 1;
        }
        if counts.iter().any(|&c| c != ns) {
            return domain("every sub-array must hold exactly N/M elements");
        }
        Ok(Self {
            total_elements,
            num_subarrays,
            spacing,
            partition,
        })
    }

    pub fn total_elements(&self) -> usize {
        self.total_elements
    }

    pub fn num_subarrays(&self) -> usize {
        self.num_subarrays
    }

    /// Elements per sub-array, `N_s = N / M`.
    pub fn subarray_size(&self) -> usize {
        self.total_elements / self.num_subarrays
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Global indices of the elements in sub-array `m`, ascending.
    pub fn subarray_elements(&self, m: usize) -> Result<Vec<usize>> {
        self.check_subarray(m)?;
        Ok(self
            .partition
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == m)
            .map(|(n, _)| n)
            .collect())
    }

    /// The same physical array driven as a single sub-array.
    pub fn as_single_subarray(&self) -> Self {
        Self {
            total_elements: self.total_elements,
            num_subarrays: 1,
            spacing: self.spacing,
            partition: vec![0; self.total_elements],
        }
    }

    fn check_subarray(&self, m: usize) -> Result<()> {
        if m >= self.num_subarrays {
            return domain(format!(
                "sub-array index {m} out of range (array has {})",
                self.num_subarrays
            ));
        }
        Ok(())
    }
}

fn check_angle(theta: f64) -> Result<()> {
    // Allow for rounding when callers convert ±90° to radians.
    if !theta.is_finite() || theta.abs() > FRAC_PI_2 + 1e-12 {
        return domain(format!(
            "angle {theta} rad lies outside the ULA front half-plane [-π/2, π/2]"
        ));
    }
    Ok(())
}

/// Phase of element `n` relative to the array reference: `-2π d n sinθ`.
#[inline]
fn element_phase(spacing: f64, n: usize, sin_theta: f64) -> f64 {
    -2.0 * PI * spacing * n as f64 * sin_theta
}

/// Response of the elements of one sub-array to a plane wave at `angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub angle: f64,
    pub entries: Vec<Complex64>,
}

pub fn steering_vector(
    geometry: &ArrayGeometry,
    subarray: usize,
    angle: f64,
) -> Result<SteeringVector> {
    check_angle(angle)?;
    let s = angle.sin();
    let entries = geometry
        .subarray_elements(subarray)?
        .into_iter()
        .map(|n| Complex64::from_polar(1.0, element_phase(geometry.spacing, n, s)))
        .collect();
    Ok(SteeringVector { angle, entries })
}

/// Unit-modulus analog weights `w_n = exp(j φ_n)` for one sub-array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    phases: Vec<f64>,
    entries: Vec<Complex64>,
}

impl WeightVector {
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let entries = phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect();
        Self { phases, entries }
    }

    pub(crate) fn from_parts(phases: Vec<f64>, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(phases.len(), entries.len());
        Self { phases, entries }
    }

    /// Binary weights with entries exactly `+1` or `-1`.
    pub fn from_signs(signs: &[i8]) -> Self {
        let phases = signs
            .iter()
            .map(|&s| if s < 0 { PI } else { 0.0 })
            .collect();
        let entries = signs
            .iter()
            .map(|&s| Complex64::new(if s < 0 { -1.0 } else { 1.0 }, 0.0))
            .collect();
        Self { phases, entries }
    }

    /// Accepts arbitrary complex entries as long as each has unit modulus.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        if let Some(e) = entries
            .iter()
            .find(|e| (e.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
        {
            return domain(format!("weight entry {e} is not unit modulus"));
        }
        let phases = entries.iter().map(|e| e.arg()).collect();
        Ok(Self { phases, entries })
    }

    /// All-ones weights (broadside beam).
    pub fn uniform(len: usize) -> Self {
        Self::from_signs(&vec![1; len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Multiplies every entry by `exp(j alpha)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        Self::from_phases(self.phases.iter().map(|p| p + alpha).collect())
    }

    /// `[self; other]`, the weights of two sub-arrays driven as one.
    pub fn concat(&self, other: &WeightVector) -> Self {
        let mut phases = self.phases.clone();
        phases.extend_from_slice(&other.phases);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self { phases, entries }
    }
}

/// How grid points are spread over the visible region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMeasure {
    /// Equal steps in θ over `[-π/2, π/2)`.
    UniformInTheta,
    /// Equal steps in `sin θ` over `[-1, 1)`, i.e. equal steps of the
    /// electrical angle ψ. For half-wavelength spacing this covers exactly one
    /// period of ψ.
    UniformInPsi,
}

/// Sampling grid over the ULA visible region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridSpec", try_from = "GridSpec")]
pub struct AngleGrid {
    measure: GridMeasure,
    points: Vec<f64>,
}

/// Serialized form of an [`AngleGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub measure: GridMeasure,
    pub points: usize,
}

impl From<AngleGrid> for GridSpec {
    fn from(g: AngleGrid) -> Self {
        g.spec()
    }
}

impl TryFrom<GridSpec> for AngleGrid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        AngleGrid::new(s.measure, s.points)
    }
}

/// Default pattern grid size.
pub const DEFAULT_GRID_POINTS: usize = 512;

impl AngleGrid {
    pub fn new(measure: GridMeasure, points: usize) -> Result<Self> {
        if points < 2 {
            return domain(format!(
                "an angle grid needs at least 2 points, got {points}"
            ));
        }
        let n = points as f64;
        let points = match measure {
            GridMeasure::UniformInTheta => (0..points)
                .map(|i| -FRAC_PI_2 + PI * i as f64 / n)
                .collect(),
            GridMeasure::UniformInPsi => (0..points)
                .map(|i| (-1.0 + 2.0 * i as f64 / n).asin())
                .collect(),
        };
        Ok(Self { measure, points })
    }

    pub fn uniform_theta(points: usize) -> Result<Self> {
        Self::new(GridMeasure::UniformInTheta, points)
    }

    pub fn uniform_psi(points: usize) -> Result<Self> {
        Self::new(GridMeasure::UniformInPsi, points)
    }

    pub fn measure(&self) -> GridMeasure {
        self.measure
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            measure: self.measure,
            points: self.points.len(),
        }
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self::uniform_theta(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

/// Sampled complex gain of one sub-array.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub grid: AngleGrid,
    pub gains: Vec<Complex64>,
    /// Scale applied to the raw array factor (`1/√N_s`).
    pub normalization: f64,
}

impl BeamPattern {
    pub fn power(&self) -> Vec<f64> {
        self.gains.iter().map(|g| g.norm_sqr()).collect()
    }
}

/// Un-normalized array factor `Σ_n c_n a_n(θ)` of arbitrary complex
/// coefficients over sub-array `m`, evaluated on every grid point.
pub fn array_factor(
    coefficients: &[Complex64],
    geometry: &ArrayGeometry,
    subarray: usize,
    grid: &AngleGrid,
) -> Result<Vec<Complex64>> {
    let elements = geometry.subarray_elements(subarray)?;
    if coefficients.len() != elements.len() {
        return Err(Error::Dimension {
            expected: elements.len(),
            got: coefficients.len(),
        });
    }
    Ok(grid
        .points
        .iter()
        .map(|&theta| factor_at(coefficients, &elements, geometry.spacing, theta))
        .collect())
}

fn factor_at(
    coefficients: &[Complex64],
    elements: &[usize],
    spacing: f64,
    theta: f64,
) -> Complex64 {
    let s = theta.sin();
    coefficients
        .iter()
        .zip(elements)
        .map(|(c, &n)| c * Complex64::from_polar(1.0, element_phase(spacing, n, s)))
        .sum()
}

/// Normalized gain `g_m(θ) = w^T a_m(θ) / √N_s` at a single angle.
pub fn gain_at(
    w: &WeightVector,
    geometry: &ArrayGeometry,
    subarray: usize,
    angle: f64,
) -> Result<Complex64> {
    check_angle(angle)?;
    let elements = geometry.subarray_elements(subarray)?;
    if w.len() != elements.len() {
        return Err(Error::Dimension {
            expected: elements.len(),
            got: w.len(),
        });
    }
    let norm = (elements.len() as f64).sqrt().recip();
    Ok(factor_at(&w.entries, &elements, geometry.spacing, angle) * norm)
}

pub fn beam_pattern(
    w: &WeightVector,
    geometry: &ArrayGeometry,
    subarray: usize,
    grid: &AngleGrid,
) -> Result<BeamPattern> {
    let raw = array_factor(&w.entries, geometry, subarray, grid)?;
    let normalization = (geometry.subarray_size() as f64).sqrt().recip();
    Ok(BeamPattern {
        grid: grid.clone(),
        gains: raw.into_iter().map(|g| g * normalization).collect(),
        normalization,
    })
}

/// Several patterns radiated simultaneously by independent streams.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositePattern {
    pub members: Vec<BeamPattern>,
    /// `sqrt(mean_m |g_m(θ)|²)` per grid point.
    pub amplitude: Vec<f64>,
    /// `mean_m |g_m(θ)|²` per grid point.
    pub power: Vec<f64>,
    pub variance: f64,
}

impl CompositePattern {
    pub fn grid(&self) -> &AngleGrid {
        &self.members[0].grid
    }

    pub fn power(&self) -> Vec<f64> {
        self.power.clone()
    }
}

pub fn composite_pattern(patterns: Vec<BeamPattern>) -> Result<CompositePattern> {
    let Some(first) = patterns.first() else {
        return domain("composite pattern needs at least one member");
    };
    let grid = first.grid.clone();
    for p in &patterns {
        if p.grid != grid {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: p.grid.len(),
            });
        }
    }
    let count = patterns.len() as f64;
    let power: Vec<f64> = (0..grid.len())
        .map(|i| patterns.iter().map(|p| p.gains[i].norm_sqr()).sum::<f64>() / count)
        .collect();
    let variance = power_variance(&power);
    Ok(CompositePattern {
        members: patterns,
        amplitude: power.iter().map(|p| p.sqrt()).collect(),
        power,
        variance,
    })
}

/// Anything with a power pattern sampled on an [`AngleGrid`].
pub trait PowerPattern {
    fn grid(&self) -> &AngleGrid;
    fn power(&self) -> Vec<f64>;
}

impl PowerPattern for BeamPattern {
    fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    fn power(&self) -> Vec<f64> {
        BeamPattern::power(self)
    }
}

impl PowerPattern for CompositePattern {
    fn grid(&self) -> &AngleGrid {
        CompositePattern::grid(self)
    }

    fn power(&self) -> Vec<f64> {
        CompositePattern::power(self)
    }
}

/// Angular variance of `|g|²` on `grid`: the mean squared deviation of the
/// power pattern from its own mean.
pub fn pattern_variance<P: PowerPattern + ?Sized>(pattern: &P, grid: &AngleGrid) -> Result<f64> {
    if pattern.grid() != grid {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: pattern.grid().len(),
        });
    }
    Ok(power_variance(&pattern.power()))
}

/// Mean squared deviation of a sampled power pattern from its mean.
pub fn power_variance(power: &[f64]) -> f64 {
    if power.is_empty() {
        return 0.0;
    }
    let n = power.len() as f64;
    let mean = power.iter().sum::<f64>() / n;
    power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n
}
