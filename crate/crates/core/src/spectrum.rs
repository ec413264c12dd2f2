//! Magnitude spectra of the muxed signal against a plain TDM reference
//! built from the same tributary samples.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::codec::{match_payloads, payload_samples, Bits, CodecError, Multiplexer, TributaryPayload};
use crate::formats::format_value;
use crate::rate_plan::{validate_plan, RatePlan};
use crate::wavelet::FilterPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub k: usize,
    pub mag_tdm: f64,
    pub mag_mrdm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub len: usize,
    pub rows: Vec<SpectrumRow>,
    /// Time-domain energy of the TDM reference.
    pub energy_tdm: f64,
    /// Time-domain energy of the muxed signal.
    pub energy_mrdm: f64,
}

/// Identifies a report in its CSV header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportHeader {
    pub seed: u64,
    pub scales: u32,
    pub wavelet: String,
}

impl SpectrumReport {
    pub fn to_csv(&self, header: &ReportHeader) -> String {
        let mut out = String::with_capacity(64 + self.rows.len() * 56);
        let _ = writeln!(out, "# seed={} N={} J={} wavelet={}", header.seed, self.len, header.scales, header.wavelet);
        out.push_str("k,mag_tdm,mag_mrdm\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{}", row.k, format_value(row.mag_tdm), format_value(row.mag_mrdm));
        }
        out
    }
}

/// Concatenation of each channel's sample block, in declaration order.
pub fn tdm_reference(plan: &RatePlan, payloads: &[TributaryPayload]) -> Result<Vec<f64>, CodecError> {
    validate_plan(plan)?;
    let ordered = match_payloads(plan, payloads)?;
    let mut out = Vec::with_capacity(plan.blocklength as usize);
    for (ch, payload) in plan.channels.iter().zip(ordered) {
        out.extend(payload_samples(payload, plan.samples_per_frame(ch.rate_bps), plan.resolution)?);
    }
    Ok(out)
}

/// `|X[k]|` for `k = 0..N`.
pub fn dft_magnitude(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Spectra of one frame: muxed signal against its TDM reference.
pub fn compare_spectra(
    plan: &RatePlan,
    pair: &FilterPair,
    payloads: &[TributaryPayload],
) -> Result<SpectrumReport, CodecError> {
    compare_spectra_frames(plan, pair, std::slice::from_ref(&payloads.to_vec()))
}

/// Spectra of several consecutive frames, each signal concatenated across
/// frames before the transform.
pub fn compare_spectra_frames(
    plan: &RatePlan,
    pair: &FilterPair,
    frames: &[Vec<TributaryPayload>],
) -> Result<SpectrumReport, CodecError> {
    let mux = Multiplexer::new(plan.clone(), pair.clone())?;
    let mut tdm = Vec::new();
    let mut mrdm = Vec::new();
    for payloads in frames {
        tdm.extend(tdm_reference(plan, payloads)?);
        mrdm.extend(mux.mux(payloads)?.samples);
    }
    debug_assert_eq!(tdm.len(), mrdm.len());
    let rows = dft_magnitude(&tdm)
        .into_iter()
        .zip(dft_magnitude(&mrdm))
        .enumerate()
        .map(|(k, (mag_tdm, mag_mrdm))| SpectrumRow { k, mag_tdm, mag_mrdm })
        .collect();
    Ok(SpectrumReport { len: tdm.len(), rows, energy_tdm: energy(&tdm), energy_mrdm: energy(&mrdm) })
}

/// Uniform random bit payloads for `frames` consecutive frames.
pub fn random_payloads(plan: &RatePlan, seed: u64, frames: usize) -> Vec<Vec<TributaryPayload>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|_| {
            plan.channels
                .iter()
                .map(|ch| {
                    let n = plan.samples_per_frame(ch.rate_bps) * plan.resolution as usize;
                    TributaryPayload::bits(ch.id.clone(), Bits::from_bools((0..n).map(|_| rng.gen()).collect()))
                })
                .collect()
        })
        .collect()
}
