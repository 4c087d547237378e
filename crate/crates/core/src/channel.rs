//! QPSK symbols, additive white Gaussian noise and block Rayleigh fading.
//!
//! Gray mapping, first bit on the in-phase axis, second on quadrature:
//!
//! | bits | symbol          |
//! |------|-----------------|
//! | 00   | ( 1 + j) / √2   |
//! | 01   | ( 1 - j) / √2   |
//! | 10   | (-1 + j) / √2   |
//! | 11   | (-1 - j) / √2   |

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Unit-energy QPSK symbols and the bits they carry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
}

#[inline]
fn level(bit: u8) -> f64 {
    if bit == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    }
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<SymbolFrame> {
    if !bits.len().is_multiple_of(2) {
        return domain(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        ));
    }
    if bits.iter().any(|&b| b > 1) {
        return domain("bits must be 0 or 1");
    }
    let symbols = bits
        .chunks_exact(2)
        .map(|d| Complex64::new(level(d[0]), level(d[1])))
        .collect();
    Ok(SymbolFrame {
        bits: bits.to_vec(),
        symbols,
    })
}

/// Minimum-distance decision for one soft symbol. Invariant to positive
/// scaling of the input.
pub fn qpsk_demodulate(soft: Complex64) -> [u8; 2] {
    [u8::from(soft.re < 0.0), u8::from(soft.im < 0.0)]
}

pub fn qpsk_demodulate_all(soft: &[Complex64]) -> Vec<u8> {
    soft.iter().flat_map(|&s| qpsk_demodulate(s)).collect()
}

/// Circular complex Gaussian sample with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Adds complex noise of total variance `variance` (half per real dimension).
pub fn awgn<R: Rng + ?Sized>(
    samples: &[Complex64],
    variance: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return domain(format!(
            "noise variance must be non-negative, got {variance}"
        ));
    }
    if variance == 0.0 {
        return Ok(samples.to_vec());
    }
    Ok(samples
        .iter()
        .map(|s| s + complex_gaussian(variance, rng))
        .collect())
}

/// Channel coefficients of the two sub-arrays over one fading block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h1: Complex64,
    pub h2: Complex64,
    pub block_length: usize,
}

impl ChannelRealization {
    /// AWGN: both coefficients are 1.
    pub fn unit(block_length: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            h1: one,
            h2: one,
            block_length,
        }
    }
}

/// Symbols per fading block: one Alamouti codeword.
pub const DEFAULT_BLOCK_LENGTH: usize = 2;

/// Independent unit-power Rayleigh blocks. With `equal_subarrays` both
/// sub-arrays see the same coefficient.
pub fn rayleigh_block<R: Rng + ?Sized>(
    num_blocks: usize,
    equal_subarrays: bool,
    block_length: usize,
    rng: &mut R,
) -> Result<Vec<ChannelRealization>> {
    if num_blocks == 0 {
        return domain("need at least one fading block");
    }
    Ok((0..num_blocks)
        .map(|_| {
            let h1 = complex_gaussian(1.0, rng);
            let h2 = if equal_subarrays {
                h1
            } else {
                complex_gaussian(1.0, rng)
            };
            ChannelRealization {
                h1,
                h2,
                block_length,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Awgn => "awgn",
            Self::Rayleigh => "rayleigh",
        })
    }
}

/// Bits per QPSK symbol.
pub const BITS_PER_SYMBOL: f64 = 2.0;

/// An operating point given as Eb/N0 in dB, for unit-energy symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub eb_n0_db: f64,
}

impl SnrPoint {
    pub fn new(eb_n0_db: f64) -> Self {
        Self { eb_n0_db }
    }

    pub fn eb_n0(&self) -> f64 {
        10f64.powf(self.eb_n0_db / 10.0)
    }

    /// `Es/N0 = Eb/N0 + 10 log10(2)` in dB.
    pub fn es_n0_db(&self) -> f64 {
        self.eb_n0_db + 10.0 * BITS_PER_SYMBOL.log10()
    }

    /// Complex noise variance `N0` for unit symbol energy.
    pub fn noise_variance(&self) -> f64 {
        1.0 / (BITS_PER_SYMBOL * self.eb_n0())
    }
}
