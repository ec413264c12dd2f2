//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mrdm_core::rate_plan::{enumerate_compositions, frame_time, Composition};
use mrdm_core::spectrum::{compare_spectra, random_payloads};
use mrdm_core::{
    aggregate_rate, allocate_bands, analyze, synthesize, CoefficientFrame, FilterPair, Multiplexer, PayloadKind,
    RatePlan,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn pairs() -> [FilterPair; 2] {
    [FilterPair::haar(), FilterPair::db4()]
}

fn equal_rate_plan(blocklength: u64, scales: u32, basic_rate: u64, resolution: u32) -> RatePlan {
    let mut counts = vec![0; scales as usize];
    counts[scales as usize - 1] = 1 << scales;
    RatePlan::from_composition(blocklength, basic_rate, resolution, &Composition::new(counts))
}

fn brute_force_compositions(scales: usize) -> Vec<Vec<u64>> {
    fn scan(scales: usize, j: usize, remaining: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j == scales {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        let weight = 1u64 << (scales - j);
        for n in 0..=(1u64 << j) {
            if n * weight > remaining {
                break;
            }
            prefix.push(n);
            scan(scales, j + 1, remaining - n * weight, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    scan(scales, 1, 1 << scales, &mut Vec::new(), &mut out);
    out
}

fn table_one() -> Outcome {
    let expected: [[u64; 3]; 9] =
        [[2, 0, 0], [1, 2, 0], [1, 1, 2], [1, 0, 4], [0, 4, 0], [0, 3, 2], [0, 2, 4], [0, 1, 6], [0, 0, 8]];
    let start = Instant::now();
    let output =
        Command::new(env!("CARGO_BIN_EXE_mrdm")).args(["compositions", "3"]).output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(output.status.success(), "compositions 3 exited with {}", output.status);
    let text = String::from_utf8_lossy(&output.stdout);
    let rows: Vec<Vec<u64>> = text
        .lines()
        .filter(|l| l.starts_with('A'))
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    ensure!(rows == expected.map(|r| r.to_vec()), "table differs: {rows:?}");
    let labels: Vec<&str> = text.lines().filter(|l| l.starts_with('A')).map(|l| l.split(',').next().unwrap()).collect();
    ensure!(labels == ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"], "row labels {labels:?}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");

    let mut counts = Vec::new();
    for j in 1..=8 {
        let mut oracle = brute_force_compositions(j);
        oracle.sort_unstable_by(|a, b| b.cmp(a));
        let got: Vec<Vec<u64>> = enumerate_compositions(j as u32)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|c| c.counts().to_vec())
            .collect();
        ensure!(got == oracle, "J={j}: enumeration differs from brute force");
        counts.push(got.len());
    }
    Ok(format!("9 rows in order, command took {elapsed:?}; oracle agrees for J<=8 (counts {counts:?})"))
}

fn frame_numerology() -> Outcome {
    let cases: [(u64, u32, u32, Ratio<u128>); 6] = [
        (512, 3, 8, Ratio::new(8, 1_000)),
        (64, 3, 8, Ratio::new(1, 1_000)),
        (256, 5, 1, Ratio::new(125, 1_000_000)),
        (128, 5, 2, Ratio::new(125, 1_000_000)),
        (64, 5, 4, Ratio::new(125, 1_000_000)),
        (32, 5, 8, Ratio::new(125, 1_000_000)),
    ];
    for (n, j, b, expected) in cases {
        let plan = equal_rate_plan(n, j, 64_000, b);
        let t = frame_time(&plan).map_err(|e| e.to_string())?;
        ensure!(t == expected, "({n},{j},64k,B={b}): T = {t}, expected {expected}");
        if j == 5 {
            let rate = aggregate_rate(&plan).map_err(|e| e.to_string())?;
            ensure!(rate == 2_048_000, "({n},{j},64k,B={b}): aggregate {rate}");
        }
    }
    Ok("8 ms, 1 ms and four 125 us frames exact; J=5 aggregate 2048000 bps".into())
}

fn perfect_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac3);
    let mut worst = 0.0f64;
    let mut transforms = 0;
    for pair in pairs() {
        for n in [64usize, 256, 1024, 4096] {
            for depth in 1..=5 {
                for _ in 0..100 {
                    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let frame = analyze(&x, depth, &pair).map_err(|e| e.to_string())?;
                    let y = synthesize(&frame, &pair).map_err(|e| e.to_string())?;
                    let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst = worst.max(err);
                    transforms += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-10, "max error {worst:e}");
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("{transforms} frames, max error {worst:.2e}, {elapsed:?}"))
}

fn digital_round_trip() -> Outcome {
    let start = Instant::now();
    let mut plans = 0;
    for j in 1..=5u32 {
        for comp in enumerate_compositions(j).map_err(|e| e.to_string())? {
            let plan = RatePlan::from_composition(1 << (j + 3), 64_000, 8, &comp);
            for pair in pairs() {
                let seed = (plans as u64) << 8 | j as u64;
                let payloads = random_payloads(&plan, seed, 1).remove(0);
                let mux = Multiplexer::new(plan.clone(), pair).map_err(|e| e.to_string())?;
                let signal = mux.mux(&payloads).map_err(|e| e.to_string())?;
                let back = mux.demux(&signal, PayloadKind::Bits).map_err(|e| format!("J={j} {comp}: {e}"))?;
                ensure!(back == payloads, "J={j} {comp} {}: bits differ", mux.pair().name());
                plans += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{plans} plan/wavelet combinations bit-exact, {elapsed:?}"))
}

fn allocation_topologies() -> Outcome {
    let tree_json = |rates: &[u64]| -> Result<Value, String> {
        let mut plan = RatePlan::new(64, 3, 64_000, 8);
        for (i, &r) in rates.iter().enumerate() {
            plan = plan.with_channel(format!("u{}", i + 1), r);
        }
        let tree = allocate_bands(&plan).map_err(|e| e.to_string())?;
        serde_json::from_str(&tree.to_json()).map_err(|e| e.to_string())
    };
    let slots = |band: &Value| -> Vec<(String, u64, u64)> {
        band["slots"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| {
                (
                    s["channel"].as_str().unwrap().to_string(),
                    s["decimation"].as_u64().unwrap(),
                    s["phase"].as_u64().unwrap(),
                )
            })
            .collect()
    };
    let slot = |c: &str, m: u64, p: u64| (c.to_string(), m, p);

    // two 256k users: detail band 1 and the level-1 approximation
    let a1 = tree_json(&[256_000, 256_000])?;
    ensure!(a1["root"]["kind"] == "split" && a1["root"]["band"]["level"] == 1, "A1 root {}", a1["root"]);
    ensure!(slots(&a1["root"]["band"]) == [slot("u1", 1, 0)], "A1 band 1");
    ensure!(a1["root"]["child"]["kind"] == "leaf" && a1["root"]["child"]["level"] == 1, "A1 lacks level-1 leaf");
    ensure!(a1["root"]["child"]["channel"] == "u2", "A1 leaf channel");

    // 256k + two 128k: band 1, band 2, level-2 approximation
    let a2 = tree_json(&[256_000, 128_000, 128_000])?;
    let node1 = &a2["root"]["child"];
    ensure!(slots(&node1["band"]) == [slot("u2", 1, 0)], "A2 band 2");
    ensure!(node1["child"]["kind"] == "leaf" && node1["child"]["level"] == 2, "A2 leaf");

    // 256k + 128k + two 64k
    let a3 = tree_json(&[256_000, 128_000, 64_000, 64_000])?;
    let node2 = &a3["root"]["child"]["child"];
    ensure!(slots(&node2["band"]) == [slot("u3", 1, 0)], "A3 band 3");
    ensure!(node2["child"]["kind"] == "leaf" && node2["child"]["level"] == 3, "A3 leaf");

    // 256k + four 64k: two TDM users share detail band 2
    let a4 = tree_json(&[256_000, 64_000, 64_000, 64_000, 64_000])?;
    ensure!(slots(&a4["root"]["band"]) == [slot("u1", 1, 0)], "A4 band 1");
    let band2 = slots(&a4["root"]["child"]["band"]);
    ensure!(band2 == [slot("u2", 2, 0), slot("u3", 2, 1)], "A4 band 2 {band2:?}");
    ensure!(slots(&a4["root"]["child"]["child"]["band"]) == [slot("u4", 1, 0)], "A4 band 3");
    ensure!(a4["root"]["child"]["child"]["child"]["level"] == 3, "A4 leaf level");
    Ok("A1 level-1 leaf; A2 level-2 leaf; A3 level-3 leaf; A4 two phase slots in band 2".into())
}

fn spectral_properties() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (j, n) in [(2u32, 64u64), (2, 128), (2, 512), (2, 256), (3, 512), (4, 1024), (5, 2048)] {
        let plan = equal_rate_plan(n, j, 64_000, 8);
        for pair in pairs() {
            let payloads = random_payloads(&plan, n ^ j as u64, 1).remove(0);
            let report = compare_spectra(&plan, &pair, &payloads).map_err(|e| e.to_string())?;
            ensure!(report.len == n as usize && report.rows.len() == n as usize, "J={j} N={n}: length {}", report.len);
            let e = rel(report.energy_tdm, report.energy_mrdm);
            let tdm_parseval: f64 = report.rows.iter().map(|r| r.mag_tdm * r.mag_tdm).sum::<f64>() / n as f64;
            let mrdm_parseval: f64 = report.rows.iter().map(|r| r.mag_mrdm * r.mag_mrdm).sum::<f64>() / n as f64;
            let p1 = rel(tdm_parseval, report.energy_tdm);
            let p2 = rel(mrdm_parseval, report.energy_mrdm);
            worst = worst.max(e).max(p1).max(p2);
            ensure!(e <= 1e-9, "J={j} N={n} {}: energy mismatch {e:e}", pair.name());
            ensure!(p1 <= 1e-9 && p2 <= 1e-9, "J={j} N={n} {}: Parseval {p1:e} {p2:e}", pair.name());
        }
    }
    Ok(format!("7 parameter sets x 2 wavelets, worst relative gap {worst:.2e}"))
}

fn linear_complexity() -> Outcome {
    let pair = FilterPair::db4();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let time = |x: &[f64]| -> Duration {
        (0..7)
            .map(|_| {
                let start = Instant::now();
                std::hint::black_box(analyze(std::hint::black_box(x), 5, &pair).unwrap());
                start.elapsed()
            })
            .min()
            .unwrap()
    };
    let times: Vec<(usize, Duration)> = (16..=19)
        .map(|log_n| {
            let n = 1usize << log_n;
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (n, time(&x))
        })
        .collect();
    let mut ratios = Vec::new();
    for w in times.windows(2) {
        let ratio = w[1].1.as_secs_f64() / w[0].1.as_secs_f64();
        ratios.push(ratio);
        ensure!(ratio <= 3.0, "time({})/time({}) = {ratio:.2}", w[1].0, w[0].0);
    }
    Ok(format!("doubling ratios for N=2^16..2^18: {:?}", ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()))
}

fn haar_basis(n: usize, depth: usize, coeff: usize) -> Vec<f64> {
    let mut col = vec![0.0; n];
    let mut offset = 0;
    for level in 1..=depth {
        let count = n >> level;
        if coeff < offset + count {
            let k = coeff - offset;
            let width = 1usize << level;
            let amp = 2f64.powf(-(level as f64) / 2.0);
            for (i, v) in col[k * width..(k + 1) * width].iter_mut().enumerate() {
                *v = if i < width / 2 { amp } else { -amp };
            }
            return col;
        }
        offset += count;
    }
    let k = coeff - offset;
    let width = 1usize << depth;
    col[k * width..(k + 1) * width].fill(2f64.powf(-(depth as f64) / 2.0));
    col
}

fn dense_synthesis_oracle() -> Outcome {
    let haar = FilterPair::haar();
    let mut worst = 0.0f64;
    for log_n in 1..=4usize {
        let n = 1 << log_n;
        for depth in 1..=log_n {
            for c in 0..n {
                let mut flat = vec![0.0; n];
                flat[c] = 1.0;
                let mut details = Vec::new();
                let mut offset = 0;
                for level in 1..=depth {
                    details.push(flat[offset..offset + (n >> level)].to_vec());
                    offset += n >> level;
                }
                let frame =
                    CoefficientFrame::from_parts(details, flat[offset..].to_vec()).map_err(|e| e.to_string())?;
                let column = synthesize(&frame, &haar).map_err(|e| e.to_string())?;
                let oracle = haar_basis(n, depth, c);
                let err = column.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                ensure!(err <= 1e-12, "N={n} depth={depth} column {c}: error {err:e}");
            }
        }
    }
    Ok(format!("all columns for N<=16, every depth; max error {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC1 composition table", table_one),
        ("AC2 frame-time numerology", frame_numerology),
        ("AC3 perfect reconstruction", perfect_reconstruction),
        ("AC4 digital round trip", digital_round_trip),
        ("AC5 allocation topologies", allocation_topologies),
        ("AC6 energy and length", spectral_properties),
        ("AC7 linear complexity", linear_complexity),
        ("AC8 dense synthesis oracle", dense_synthesis_oracle),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
