use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use mrdm_core::codec::{Bits, Multiplexer, PayloadContent, PayloadKind, TributaryPayload};
use mrdm_core::formats::{self, SampleFormat};
use mrdm_core::rate_plan::{
    aggregate_rate, allocate_bands, enumerate_compositions, frame_time, tributary_rates, validate_plan, Placement,
    RatePlan,
};
use mrdm_core::spectrum::{compare_spectra_frames, random_payloads, ReportHeader};
use mrdm_core::wavelet::{make_wavelet_system, parse_coefficients, FilterPair, WaveletSpec};

use crate::error::Failure;

/// Largest J printed by `compositions`.
const MAX_TABLE_SCALES: u32 = 8;

pub struct Setup {
    pub plan: PathBuf,
    pub wavelet: String,
    pub format: SampleFormat,
}

type CmdResult = Result<(), Failure>;

fn read_plan(path: &Path) -> Result<RatePlan, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::config(e).context(format!("reading {}", path.display())))?;
    RatePlan::from_json(&text).map_err(|e| Failure::config(e).context(format!("parsing plan {}", path.display())))
}

fn load_wavelet(flag: &str) -> Result<FilterPair, Failure> {
    let spec = match flag.strip_prefix("file:") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(e).context(format!("reading {path}")))?;
            let line = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .ok_or_else(|| Failure::config(anyhow!("{path} holds no coefficients")))?;
            WaveletSpec::Raw { name: flag.to_string(), g: parse_coefficients(line)? }
        }
        None => WaveletSpec::named(flag)?,
    };
    Ok(make_wavelet_system(&spec)?)
}

fn multiplexer(setup: &Setup) -> Result<Multiplexer, Failure> {
    let plan = read_plan(&setup.plan)?;
    let pair = load_wavelet(&setup.wavelet)?;
    Ok(Multiplexer::new(plan, pair)?)
}

fn human_seconds(seconds: f64) -> String {
    if seconds >= 1.0 {
        format!("{seconds} s")
    } else if seconds >= 1e-3 {
        format!("{} ms", round_display(seconds * 1e3))
    } else {
        format!("{} μs", round_display(seconds * 1e6))
    }
}

fn round_display(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn human_rate(bps: u64) -> String {
    if bps >= 1_000_000 {
        format!("{} Mbps", bps as f64 / 1e6)
    } else if bps >= 1_000 {
        format!("{} kbps", bps as f64 / 1e3)
    } else {
        format!("{bps} bps")
    }
}

pub fn plan(path: &Path, tree_out: Option<&Path>, verbose: bool) -> CmdResult {
    let plan = read_plan(path)?;
    let comp = validate_plan(&plan)?;
    let t = frame_time(&plan)?;
    let rate = aggregate_rate(&plan)?;
    let tree = allocate_bands(&plan)?;

    let mut out = String::new();
    let _ =
        writeln!(out, "plan: N={} J={} R={} bps B={}", plan.blocklength, plan.scales, plan.basic_rate, plan.resolution);
    let _ = writeln!(out, "composition: {comp}");
    let seconds = *t.numer() as f64 / *t.denom() as f64;
    let _ = writeln!(out, "frame time: T = {}/{} s = {}", t.numer(), t.denom(), human_seconds(seconds));
    let _ = writeln!(out, "aggregate rate: {rate} bps ({})", human_rate(rate));
    let _ = writeln!(out, "allocation:");
    let _ = writeln!(out, "  {:<12} {:>12} {:>8}  placement", "channel", "rate_bps", "samples");
    for ch in &plan.channels {
        let placement = match tree.placement_of(&ch.id).expect("allocation places every channel") {
            Placement::Leaf { level } => format!("approximation level {level}"),
            Placement::Slot { level, decimation, phase } => {
                format!("detail level {level} decimation {decimation} phase {phase}")
            }
        };
        let _ = writeln!(
            out,
            "  {:<12} {:>12} {:>8}  {placement}",
            ch.id,
            ch.rate_bps,
            plan.samples_per_frame(ch.rate_bps)
        );
    }
    if verbose {
        let _ = writeln!(out, "{}", tree.to_json());
    }
    print!("{out}");
    if let Some(p) = tree_out {
        fs::write(p, tree.to_json() + "\n")?;
    }
    Ok(())
}

pub fn compositions(scales: u32, rate: u64) -> CmdResult {
    if scales == 0 || scales > MAX_TABLE_SCALES {
        return Err(Failure::config(anyhow!("J={scales} outside 1..={MAX_TABLE_SCALES} for tabular output")));
    }
    let rows = enumerate_compositions(scales)?;
    let mut rates = tributary_rates(scales, rate);
    rates.reverse();
    let mut out = String::new();
    let _ = writeln!(out, "# J={scales} R_bps={rate} compositions={}", rows.len());
    out.push_str("row");
    for (j, r) in rates.iter().enumerate() {
        let _ = write!(out, ",n{}@{r}bps", j + 1);
    }
    out.push('\n');
    for (i, comp) in rows.iter().enumerate() {
        let _ = write!(out, "A{}", i + 1);
        for n in comp.counts() {
            let _ = write!(out, ",{n}");
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

/// Splits each channel's stream into frames; every channel must hold the
/// same whole number of frames.
fn split_frames(
    mux: &Multiplexer,
    streams: Vec<(String, PayloadContent)>,
) -> Result<Vec<Vec<TributaryPayload>>, Failure> {
    let mut frame_count = None;
    let mut per_channel = Vec::new();
    for (id, content) in streams {
        let (frames, chunks): (usize, Vec<PayloadContent>) = match content {
            PayloadContent::Bits(bits) => {
                let per = mux.bits_per_frame(&id).expect("declared channel");
                let frames = bits.len() / per;
                let rest = &bits.as_slice()[frames * per..];
                if rest.len() >= 8 || rest.iter().any(|&b| b) {
                    return Err(Failure::io(anyhow!(
                        "`{id}.bits` holds {} bits, not a whole number of {per}-bit frames",
                        bits.len()
                    )));
                }
                (frames, (0..frames).map(|f| PayloadContent::Bits(bits.slice(f * per..(f + 1) * per))).collect())
            }
            PayloadContent::Samples(samples) => {
                let per = mux.samples_per_frame(&id).expect("declared channel");
                if samples.len() % per != 0 {
                    return Err(Failure::io(anyhow!(
                        "`{id}.samples` holds {} samples, not a whole number of {per}-sample frames",
                        samples.len()
                    )));
                }
                let frames = samples.len() / per;
                (frames, samples.chunks(per).map(|c| PayloadContent::Samples(c.to_vec())).collect())
            }
        };
        if frames == 0 {
            return Err(Failure::io(anyhow!("channel `{id}` holds less than one frame")));
        }
        match frame_count {
            None => frame_count = Some(frames),
            Some(n) if n != frames => {
                return Err(Failure::io(anyhow!("channel `{id}` holds {frames} frames, others hold {n}")));
            }
            Some(_) => {}
        }
        per_channel.push((id, chunks));
    }
    let frames = frame_count.unwrap_or(0);
    Ok((0..frames)
        .map(|f| {
            per_channel
                .iter()
                .map(|(id, chunks)| TributaryPayload { id: id.clone(), content: chunks[f].clone() })
                .collect()
        })
        .collect())
}

pub fn mux(setup: &Setup, dir: &Path, out: &Path, verbose: bool) -> CmdResult {
    let mux = multiplexer(setup)?;
    let mut streams = Vec::new();
    for ch in &mux.plan().channels {
        let bits_path = dir.join(format!("{}.bits", ch.id));
        let samples_path = dir.join(format!("{}.samples", ch.id));
        let content = match (bits_path.is_file(), samples_path.is_file()) {
            (true, true) => {
                return Err(Failure::io(anyhow!("both {} and {} exist", bits_path.display(), samples_path.display())))
            }
            (true, false) => PayloadContent::Bits(Bits::from_bytes(&fs::read(&bits_path)?)),
            (false, true) => {
                let bytes = fs::read(&samples_path)?;
                PayloadContent::Samples(
                    formats::decode(&bytes, setup.format)
                        .map_err(|e| Failure::from(e).context(format!("reading {}", samples_path.display())))?,
                )
            }
            (false, false) => {
                return Err(Failure::io(anyhow!("no payload file for channel `{}` in {}", ch.id, dir.display())))
            }
        };
        streams.push((ch.id.clone(), content));
    }
    let frames = split_frames(&mux, streams)?;
    let mut signal = Vec::with_capacity(frames.len() * mux.plan().blocklength as usize);
    for (i, payloads) in frames.iter().enumerate() {
        signal.extend(mux.mux(payloads).map_err(|e| Failure::from(e).context(format!("frame {i}")))?.samples);
    }
    fs::write(out, formats::encode(&signal, setup.format))?;
    if verbose {
        eprintln!("muxed {} frame(s) into {} samples", frames.len(), signal.len());
    }
    Ok(())
}

pub fn demux(setup: &Setup, input: &Path, out_dir: &Path, bits: bool, verbose: bool) -> CmdResult {
    let mux = multiplexer(setup)?;
    let bytes = fs::read(input).map_err(|e| Failure::io(e).context(format!("reading {}", input.display())))?;
    let signal = formats::decode(&bytes, setup.format)?;
    let len = mux.plan().blocklength as usize;
    if signal.is_empty() || signal.len() % len != 0 {
        return Err(Failure::io(anyhow!(
            "signal has {} samples, not a whole number of {len}-sample frames",
            signal.len()
        )));
    }
    let kind = if bits { PayloadKind::Bits } else { PayloadKind::Samples };
    let channels = &mux.plan().channels;
    let mut recovered_bits: Vec<Bits> = vec![Bits::new(); channels.len()];
    let mut recovered_samples: Vec<Vec<f64>> = vec![Vec::new(); channels.len()];
    for (i, frame) in signal.chunks(len).enumerate() {
        let payloads = mux.demux_samples(frame, kind).map_err(|e| Failure::from(e).context(format!("frame {i}")))?;
        for (k, p) in payloads.into_iter().enumerate() {
            match p.content {
                PayloadContent::Bits(b) => recovered_bits[k].extend(&b),
                PayloadContent::Samples(s) => recovered_samples[k].extend(s),
            }
        }
    }
    fs::create_dir_all(out_dir)?;
    for (k, ch) in channels.iter().enumerate() {
        if bits {
            fs::write(out_dir.join(format!("{}.bits", ch.id)), recovered_bits[k].to_bytes())?;
        } else {
            fs::write(
                out_dir.join(format!("{}.samples", ch.id)),
                formats::encode(&recovered_samples[k], setup.format),
            )?;
        }
    }
    if verbose {
        eprintln!("demuxed {} frame(s) into {} channel(s)", signal.len() / len, channels.len());
    }
    Ok(())
}

pub fn spectrum(setup: &Setup, seed: u64, frames: usize, out: &Path) -> CmdResult {
    if frames == 0 {
        return Err(Failure::config(anyhow!("--frames must be at least 1")));
    }
    let mux = multiplexer(setup)?;
    let payloads = random_payloads(mux.plan(), seed, frames);
    let report = compare_spectra_frames(mux.plan(), mux.pair(), &payloads)?;
    let header = ReportHeader { seed, scales: mux.plan().scales, wavelet: setup.wavelet.clone() };
    fs::write(out, report.to_csv(&header))?;
    Ok(())
}

pub fn roundtrip(setup: &Setup, seed: u64, frames: usize, verbose: bool) -> CmdResult {
    let mux = multiplexer(setup)?;
    for (i, payloads) in random_payloads(mux.plan(), seed, frames).iter().enumerate() {
        let signal = mux.mux(payloads)?;
        let back = mux.demux(&signal, PayloadKind::Bits).map_err(|e| Failure::from(e).context(format!("frame {i}")))?;
        if &back != payloads {
            return Err(Failure::integrity(anyhow!("frame {i}: recovered bits differ from the input")));
        }
        if verbose {
            eprintln!("frame {i}: ok");
        }
    }
    println!(
        "round trip ok: {frames} frame(s), {} channel(s), wavelet {}, plan digest {}",
        mux.plan().channels.len(),
        mux.pair().name(),
        mux.digest()
    );
    Ok(())
}
