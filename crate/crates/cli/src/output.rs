use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cbf_core::array::{beam_pattern, composite_pattern, AngleGrid, ArrayGeometry, WeightVector};
use cbf_core::simulation::BerCurve;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Formats `x` with 9 significant digits, `%g` style.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Power pattern table: one `g{m}_power` column per weight vector, then the
/// composite (mean) power.
pub fn pattern_csv(
    geometry: &ArrayGeometry,
    subarrays: &[usize],
    weights: &[WeightVector],
    grid: &AngleGrid,
) -> cbf_core::Result<String> {
    let patterns = weights
        .iter()
        .zip(subarrays)
        .map(|(w, &m)| beam_pattern(w, geometry, m, grid))
        .collect::<cbf_core::Result<Vec<_>>>()?;
    let powers: Vec<Vec<f64>> = patterns.iter().map(|p| p.power()).collect();
    let composite = composite_pattern(patterns)?;

    let mut out = String::from("theta_deg");
    for m in 1..=powers.len() {
        out.push_str(&format!(",g{m}_power"));
    }
    out.push_str(",composite_power\n");
    for (i, theta) in grid.points().iter().enumerate() {
        out.push_str(&num(theta.to_degrees()));
        for p in &powers {
            out.push(',');
            out.push_str(&num(p[i]));
        }
        out.push(',');
        out.push_str(&num(composite.power[i]));
        out.push('\n');
    }
    Ok(out)
}

pub const BER_HEADER: &str = "scheme,channel,angle_deg,ebn0_db,bits,errors,ber,ci95";

/// BER table. `angles_deg` are the user-facing labels for `curve`'s angles,
/// in the same order.
pub fn ber_csv(curve: &BerCurve, angles_deg: &[f64]) -> String {
    let mut out = format!("{BER_HEADER}\n");
    let per_angle = curve.points.len() / angles_deg.len().max(1);
    for (i, p) in curve.points.iter().enumerate() {
        let angle = angles_deg[i / per_angle];
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            curve.scheme,
            curve.channel,
            num(angle),
            num(p.eb_n0_db),
            p.bits,
            p.errors,
            num(p.ber),
            num(p.ci95),
        ));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(name: &str, contents: &[u8]) -> Self {
        Self {
            file: name.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents)),
        }
    }
}

/// Provenance record written next to simulation outputs. Its `config` is a
/// complete settings document that `--config` accepts verbatim.
#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes text outputs into `dir`, creating it if needed.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|source| Failure::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<FileDigest, Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| Failure::Io { path, source })?;
        Ok(FileDigest::of(name, contents.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(8.0000000000001), "8");
        assert_eq!(num(-90.0), "-90");
        assert_eq!(num(0.25f64.asin().to_degrees()), "14.4775122");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(0.00012345678912), "0.000123456789");
        assert_eq!(num(1.5e-5), "1.5e-05");
        assert_eq!(num(123456789.4), "123456789");
        assert_eq!(num(1234567890.0), "1.23456789e+09");
        assert_eq!(num(9.9999999999), "10");
        assert_eq!(num(7.1e-33), "7.1e-33");
    }

    #[test]
    fn digest_is_sha256_hex() {
        let d = FileDigest::of("x", b"abc");
        assert_eq!(
            d.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(d.bytes, 3);
    }
}
