//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cbf_core::array::{beam_pattern, AngleGrid, ArrayGeometry};
use cbf_core::search::{
    find_complementary_pair, random_beam, PhaseCodebook, SearchMethod, SearchOptions,
};
use cbf_core::stbc::{
    alamouti_encode, composite_channel, fallback_pattern, mmse_decode, receive, NoiseModel,
};
use cbf_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

type Verdict = Result<String, String>;

fn cbf_sim(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cbf-sim"))
        .args(args)
        .env_remove("CBF_SIM_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn workers() -> String {
    std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .to_string()
}

#[derive(Debug, Clone)]
struct Row {
    angle: String,
    db: f64,
    bits: u64,
    ber: f64,
    ci: f64,
}

fn read_ber(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).expect("ber.csv");
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                angle: f[2].to_string(),
                db: f[3].parse().unwrap(),
                bits: f[4].parse().unwrap(),
                ber: f[6].parse().unwrap(),
                ci: f[7].parse().unwrap(),
            }
        })
        .collect()
}

fn ber_run(dir: &Path, name: &str, args: &[&str]) -> Result<Vec<Row>, String> {
    let out = dir.join(name);
    let w = workers();
    let mut full = vec!["ber"];
    full.extend_from_slice(args);
    full.extend(["--workers", &w, "--out", out.to_str().unwrap()]);
    cbf_sim(&full)?;
    Ok(read_ber(&out.join("ber.csv")))
}

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn awgn_oracle(db: f64) -> f64 {
    q((2.0 * 10f64.powf(db / 10.0)).sqrt())
}

fn rayleigh_oracle(db: f64) -> f64 {
    let g = 10f64.powf(db / 10.0);
    0.5 * (1.0 - (g / (1.0 + g)).sqrt())
}

fn within_limit(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, limit {limit:?}"))
    }
}

/// Variance of the composite column of a pattern CSV, computed from the file.
fn csv_composite_variance(path: &Path) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    let p: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / p.len() as f64
}

fn isotropy(dir: &Path) -> Verdict {
    let mut report = Vec::new();
    for (label, args, limit) in [
        (
            "golay N=16",
            vec!["--elements", "16", "--method", "golay"],
            Duration::from_secs(1),
        ),
        (
            "exhaustive N_s=2 K=2",
            vec![
                "--elements",
                "4",
                "--accuracy",
                "2",
                "--method",
                "exhaustive",
            ],
            Duration::from_secs(10),
        ),
    ] {
        let out = dir.join(label.replace([' ', '='], "_"));
        let mut full = vec!["search", "--subarrays", "2", "--grid-points", "4096"];
        full.extend(args);
        full.extend(["--out", out.to_str().unwrap()]);
        let t = Instant::now();
        let stdout = cbf_sim(&full)?;
        within_limit(t.elapsed(), limit, label)?;
        let reported: f64 = stdout
            .trim()
            .parse()
            .map_err(|_| format!("bad stdout `{stdout}`"))?;
        let from_csv = csv_composite_variance(&out.join("pattern.csv"));
        if reported > 1e-10 || from_csv > 1e-10 {
            return Err(format!(
                "{label}: variance {reported:e} (csv {from_csv:e}) > 1e-10"
            ));
        }
        report.push(format!("{label} σ²={reported:.1e} in {:.2?}", t.elapsed()));
    }
    Ok(report.join("; "))
}

/// Unreduced brute force with independent steering arithmetic.
fn brute_force_min(ns: usize, k: usize, thetas: &[f64]) -> f64 {
    let powers: Vec<Vec<f64>> = (0..k.pow(ns as u32))
        .map(|code| {
            let idx: Vec<usize> = (0..ns).map(|n| code / k.pow(n as u32) % k).collect();
            thetas
                .iter()
                .map(|t| {
                    let g: Complex64 = idx
                        .iter()
                        .enumerate()
                        .map(|(n, &i)| {
                            Complex64::from_polar(
                                1.0,
                                2.0 * PI * i as f64 / k as f64 - PI * n as f64 * t.sin(),
                            )
                        })
                        .sum();
                    g.norm_sqr() / ns as f64
                })
                .collect()
        })
        .collect();
    let g = thetas.len() as f64;
    let mut best = f64::INFINITY;
    for a in &powers {
        for b in &powers {
            let c: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
            let mu = c.iter().sum::<f64>() / g;
            best = best.min(c.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / g);
        }
    }
    best
}

fn brute_force_equivalence() -> Verdict {
    let t = Instant::now();
    let grid = AngleGrid::default();
    let mut report = Vec::new();
    for (ns, k) in [(2, 2), (2, 4), (3, 2)] {
        let geom = ArrayGeometry::ula(2 * ns, 2, 0.5).map_err(|e| e.to_string())?;
        let set = find_complementary_pair(
            &geom,
            PhaseCodebook::new(k).map_err(|e| e.to_string())?,
            &grid,
            SearchOptions::new(SearchMethod::Exhaustive),
        )
        .map_err(|e| e.to_string())?;
        let oracle = brute_force_min(ns, k, grid.points());
        let diff = (set.variance - oracle).abs();
        if diff > 1e-12 {
            return Err(format!(
                "(N_s={ns}, K={k}): search {:e} vs brute force {oracle:e}",
                set.variance
            ));
        }
        report.push(format!("({ns},{k}) Δ={diff:.0e}"));
    }
    within_limit(t.elapsed(), Duration::from_secs(60), "brute force")?;
    Ok(format!("{} in {:.2?}", report.join(" "), t.elapsed()))
}

fn matches_oracle(rows: &[Row], oracle: fn(f64) -> f64, what: &str) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for r in rows {
        if r.bits < 1_000_000 {
            return Err(format!(
                "{what} {}° {} dB: only {} bits",
                r.angle, r.db, r.bits
            ));
        }
        let z = (r.ber - oracle(r.db)).abs() / r.ci;
        if z > 3.0 {
            return Err(format!(
                "{what} {}° {} dB: BER {} vs {} ({z:.2} CIs)",
                r.angle,
                r.db,
                r.ber,
                oracle(r.db)
            ));
        }
        worst = worst.max(z);
    }
    Ok(worst)
}

fn cbf_equals_single_awgn(rows: &[Row], elapsed: Duration) -> Verdict {
    within_limit(elapsed, Duration::from_secs(300), "CBF AWGN sweep")?;
    let worst = matches_oracle(rows, awgn_oracle, "CBF")?;
    Ok(format!(
        "{} points, worst {worst:.2} CI half-widths, {elapsed:.1?}",
        rows.len()
    ))
}

fn angle_invariance(rows: &[Row]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut dbs: Vec<f64> = rows.iter().map(|r| r.db).collect();
    dbs.dedup();
    dbs.sort_by(f64::total_cmp);
    dbs.dedup();
    for db in dbs {
        let at: Vec<&Row> = rows.iter().filter(|r| r.db == db).collect();
        for a in &at {
            for b in &at {
                let combined = (a.ci.powi(2) + b.ci.powi(2)).sqrt();
                let ratio = (a.ber - b.ber).abs() / combined;
                if ratio > 3.0 {
                    return Err(format!(
                        "{db} dB: {}° vs {}° differ by {ratio:.2} combined CIs",
                        a.angle, b.angle
                    ));
                }
                worst = worst.max(ratio);
            }
        }
    }
    Ok(format!(
        "worst pairwise gap {worst:.2} combined CI half-widths"
    ))
}

fn rbf_inferior(dir: &Path, cbf: &[Row]) -> Verdict {
    let rbf = ber_run(
        dir,
        "rbf_awgn",
        &[
            "--scheme",
            "rbf",
            "--channel",
            "awgn",
            "--snr-db",
            "8",
            "--min-bits",
            "1000000",
            "--max-bits",
            "1000000",
        ],
    )?;
    let mut tightest = f64::INFINITY;
    for r in &rbf {
        let c = cbf
            .iter()
            .find(|c| c.angle == r.angle && c.db == 8.0)
            .ok_or("no CBF point at 8 dB")?;
        if r.bits < 1_000_000 {
            return Err(format!("RBF {}°: only {} bits", r.angle, r.bits));
        }
        let gap = (r.ber - r.ci) - (c.ber + c.ci);
        if gap <= 0.0 {
            return Err(format!(
                "{}°: RBF {}±{} overlaps CBF {}±{}",
                r.angle, r.ber, r.ci, c.ber, c.ci
            ));
        }
        tightest = tightest.min((r.ber - r.ci) / (c.ber + c.ci));
    }
    let mean_rbf = rbf.iter().map(|r| r.ber).sum::<f64>() / rbf.len() as f64;
    Ok(format!(
        "RBF mean BER {mean_rbf:.2e} vs CBF {:.2e}; lower RBF bound ≥ {tightest:.1}× upper CBF bound",
        awgn_oracle(8.0)
    ))
}

fn rayleigh_oracle_check(dir: &Path) -> Verdict {
    let t = Instant::now();
    let common = [
        "--channel",
        "rayleigh",
        "--snr-db",
        "5:5:15",
        "--min-bits",
        "1000000",
        "--max-bits",
        "1000000",
    ];
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for scheme in ["cbf", "single"] {
        let mut args = vec!["--scheme", scheme];
        args.extend(common);
        let rows = ber_run(dir, &format!("{scheme}_rayleigh"), &args)?;
        worst = worst.max(matches_oracle(&rows, rayleigh_oracle, scheme)?);
        n += rows.len();
    }
    within_limit(t.elapsed(), Duration::from_secs(300), "Rayleigh sweeps")?;
    Ok(format!(
        "{n} points, worst {worst:.2} CI half-widths (oracle at 10 dB = {:.5}), {:.1?}",
        rayleigh_oracle(10.0),
        t.elapsed()
    ))
}

fn stbc_properties() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let zero = Complex64::new(0.0, 0.0);
    let (mut gram_err, mut zf_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let (g, h, s) = ([c(), c()], [c(), c()], [c(), c()]);
        let ch = composite_channel(g[0], g[1], h[0], h[1]);
        let gram = ch.gram();
        let rho = ch.gain();
        gram_err = gram_err
            .max(gram[0][1].norm())
            .max(gram[1][0].norm())
            .max((gram[0][0] - rho).norm())
            .max((gram[1][1] - rho).norm());
        let y = receive(&alamouti_encode(s[0], s[1]), g, h, [zero, zero]);
        let est = mmse_decode(y, &ch, NoiseModel::noiseless()).map_err(|e| e.to_string())?;
        zf_err = zf_err
            .max((est[0] - s[0]).norm())
            .max((est[1] - s[1]).norm());
    }
    if gram_err > 1e-12 {
        return Err(format!("HᴴH off scaled identity by {gram_err:e}"));
    }
    if zf_err > 1e-9 {
        return Err(format!("noiseless decode error {zf_err:e}"));
    }

    let grid = AngleGrid::uniform_theta(256).unwrap();
    let mut fb_err: f64 = 0.0;
    let mut wrng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..1_000 {
        let ns = 1 + trial % 8;
        let geom = ArrayGeometry::ula(2 * ns, 2, 0.5).unwrap();
        let (w1, w2) = (random_beam(ns, &mut wrng), random_beam(ns, &mut wrng));
        let fb = fallback_pattern(&w1, &w2, &geom, &grid).map_err(|e| e.to_string())?;
        let p1 = beam_pattern(&w1, &geom, 0, &grid).unwrap();
        let p2 = beam_pattern(&w2, &geom, 1, &grid).unwrap();
        for i in 0..grid.len() {
            fb_err = fb_err.max((fb.gains[i] - p1.gains[i] - p2.gains[i]).norm());
        }
    }
    if fb_err > 1e-12 {
        return Err(format!("fallback pattern differs from g1+g2 by {fb_err:e}"));
    }
    Ok(format!(
        "gram {gram_err:.1e}, ZF {zf_err:.1e}, fallback {fb_err:.1e} in {:.2?}",
        t.elapsed()
    ))
}

fn determinism(dir: &Path) -> Verdict {
    let mut checked = Vec::new();
    for (scheme, channel) in [("cbf", "rayleigh"), ("rbf", "awgn"), ("single", "rayleigh")] {
        for w in ["1", "2"] {
            let mut digests = Vec::new();
            for rep in 0..2 {
                let out = dir.join(format!("det_{scheme}_{w}_{rep}"));
                cbf_sim(&[
                    "ber",
                    "--scheme",
                    scheme,
                    "--channel",
                    channel,
                    "--snr-db",
                    "0:4:8",
                    "--seed",
                    "2024",
                    "--angles",
                    "0,30,-60",
                    "--workers",
                    w,
                    "--out",
                    out.to_str().unwrap(),
                ])?;
                digests.push(fs::read(out.join("ber.csv")).unwrap());
            }
            if digests[0] != digests[1] {
                return Err(format!(
                    "{scheme}/{channel} with {w} workers differs between runs"
                ));
            }
        }
        checked.push(format!("{scheme}/{channel}"));
    }
    Ok(format!(
        "{} byte-identical on rerun (1 and 2 workers)",
        checked.join(", ")
    ))
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("scratch dir");
    let dir = scratch.path();
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();

    results.push((1, "isotropy", isotropy(dir)));
    results.push((2, "brute-force equivalence", brute_force_equivalence()));

    let t = Instant::now();
    let cbf = ber_run(
        dir,
        "cbf_awgn",
        &[
            "--scheme",
            "cbf",
            "--channel",
            "awgn",
            "--snr-db",
            "4:2:8",
            "--min-bits",
            "1000000",
            "--max-bits",
            "1000000",
        ],
    );
    let elapsed = t.elapsed();
    match cbf {
        Ok(rows) => {
            results.push((
                3,
                "CBF matches single antenna in AWGN",
                cbf_equals_single_awgn(&rows, elapsed),
            ));
            results.push((4, "angle invariance", angle_invariance(&rows)));
            results.push((5, "RBF worse than CBF in AWGN", rbf_inferior(dir, &rows)));
        }
        Err(e) => {
            for (n, name) in [
                (3, "CBF matches single antenna in AWGN"),
                (4, "angle invariance"),
                (5, "RBF worse than CBF in AWGN"),
            ] {
                results.push((n, name, Err(e.clone())));
            }
        }
    }
    results.push((6, "Rayleigh closed form", rayleigh_oracle_check(dir)));
    results.push((7, "STBC properties", stbc_properties()));
    results.push((8, "determinism", determinism(dir)));

    println!();
    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS  [{n}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  [{n}] {name}: {detail}");
            }
        }
    }
    println!(
        "\nacceptance: {} passed, {failed} failed\n",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
