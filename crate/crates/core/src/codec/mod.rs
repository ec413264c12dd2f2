//! End-to-end multiplex and demultiplex of one frame.
//!
//! Tributary samples are scattered into a [`CoefficientFrame`] as laid out
//! by the [`AllocationTree`], and the frame is synthesized into the muxed
//! signal. Demultiplex analyses only down to the tree's leaf level, gathers
//! each channel's coefficients back in slot order and, for digital
//! channels, decodes them to bits.

mod quantize;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mra::{self, CoefficientFrame, TransformError};
use crate::rate_plan::{allocate_bands, slot_indices, validate_plan, AllocationTree, Placement, PlanError, RatePlan};
use crate::wavelet::FilterPair;

pub use quantize::{dequantize_samples, quantize_words, word_level, Bits};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("BadLength: {len} bits is not a whole number of {resolution}-bit words")]
    BadLength { len: usize, resolution: u32 },
    #[error("BadResolution: B={0} outside 1..=24")]
    BadResolution(u32),
    #[error("invalid bit character `{0}`")]
    BadBitString(char),
    #[error("OffGrid: sample {index} = {value} {} is not within the guard band of any level", channel.as_deref().map(|c| format!("of `{c}`")).unwrap_or_default())]
    OffGrid { channel: Option<String>, index: usize, value: f64 },
    #[error("MissingChannel: no payload for channel `{0}`")]
    MissingChannel(String),
    #[error("DuplicateChannel: two payloads for channel `{0}`")]
    DuplicateChannel(String),
    #[error("UnknownChannel: payload `{0}` is not declared in the plan")]
    UnknownChannel(String),
    #[error("PayloadLengthMismatch: channel `{id}` needs {expected} {unit}, got {got}")]
    PayloadLengthMismatch { id: String, expected: usize, got: usize, unit: &'static str },
    #[error("SampleOutOfRange: channel `{id}` sample {index} = {value} outside [-1, 1)")]
    SampleOutOfRange { id: String, index: usize, value: f64 },
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("PlanMismatch: signal was built for plan {signal}, demultiplexing with {plan}")]
    PlanMismatch { signal: String, plan: String },
}

impl CodecError {
    fn for_channel(self, id: &str) -> Self {
        match self {
            CodecError::OffGrid { channel: None, index, value } => {
                CodecError::OffGrid { channel: Some(id.to_string()), index, value }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PayloadContent {
    Bits(Bits),
    Samples(Vec<f64>),
}

/// One channel's data for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TributaryPayload {
    pub id: String,
    pub content: PayloadContent,
}

impl TributaryPayload {
    pub fn bits(id: impl Into<String>, bits: Bits) -> Self {
        TributaryPayload { id: id.into(), content: PayloadContent::Bits(bits) }
    }

    pub fn samples(id: impl Into<String>, samples: Vec<f64>) -> Self {
        TributaryPayload { id: id.into(), content: PayloadContent::Samples(samples) }
    }

    pub fn as_samples(&self) -> Option<&[f64]> {
        match &self.content {
            PayloadContent::Samples(s) => Some(s),
            PayloadContent::Bits(_) => None,
        }
    }

    pub fn as_bits(&self) -> Option<&Bits> {
        match &self.content {
            PayloadContent::Bits(b) => Some(b),
            PayloadContent::Samples(_) => None,
        }
    }
}

/// Which representation demultiplexed payloads are returned in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    Bits,
    Samples,
}

/// The muxed signal of one frame, tagged with the digest of the plan and
/// allocation it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MuxedSignal {
    pub samples: Vec<f64>,
    pub plan_digest: String,
}

impl MuxedSignal {
    /// Wraps externally obtained samples (for example read from a file) as
    /// a signal of `plan`.
    pub fn for_plan(plan: &RatePlan, samples: Vec<f64>) -> Result<Self, CodecError> {
        let tree = allocate_bands(plan)?;
        Ok(MuxedSignal { samples, plan_digest: plan_digest(plan, &tree) })
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

/// Short hex digest of a plan and its allocation tree.
pub fn plan_digest(plan: &RatePlan, tree: &AllocationTree) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(plan).expect("plan serializes"));
    hasher.update(serde_json::to_vec(tree).expect("tree serializes"));
    hex::encode(&hasher.finalize()[..8])
}

/// Converts a payload to samples, checking its length against `expected`
/// samples at resolution `resolution`.
pub(crate) fn payload_samples(
    payload: &TributaryPayload,
    expected: usize,
    resolution: u32,
) -> Result<Vec<f64>, CodecError> {
    let id = &payload.id;
    match &payload.content {
        PayloadContent::Bits(bits) => {
            let want = expected * resolution as usize;
            if bits.len() != want {
                return Err(CodecError::PayloadLengthMismatch {
                    id: id.clone(),
                    expected: want,
                    got: bits.len(),
                    unit: "bits",
                });
            }
            quantize_words(bits, resolution)
        }
        PayloadContent::Samples(samples) => {
            if samples.len() != expected {
                return Err(CodecError::PayloadLengthMismatch {
                    id: id.clone(),
                    expected,
                    got: samples.len(),
                    unit: "samples",
                });
            }
            if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(-1.0..1.0).contains(*v)) {
                return Err(CodecError::SampleOutOfRange { id: id.clone(), index, value });
            }
            Ok(samples.clone())
        }
    }
}

/// Matches payloads to declared channels, returning them in declaration order.
pub(crate) fn match_payloads<'a>(
    plan: &RatePlan,
    payloads: &'a [TributaryPayload],
) -> Result<Vec<&'a TributaryPayload>, CodecError> {
    for (i, p) in payloads.iter().enumerate() {
        if plan.channel(&p.id).is_none() {
            return Err(CodecError::UnknownChannel(p.id.clone()));
        }
        if payloads[..i].iter().any(|q| q.id == p.id) {
            return Err(CodecError::DuplicateChannel(p.id.clone()));
        }
    }
    plan.channels
        .iter()
        .map(|ch| payloads.iter().find(|p| p.id == ch.id).ok_or_else(|| CodecError::MissingChannel(ch.id.clone())))
        .collect()
}

fn coefficient_indices(frame_len: usize, placement: Placement) -> Result<Option<(usize, Vec<usize>)>, CodecError> {
    match placement {
        Placement::Leaf { .. } => Ok(None),
        Placement::Slot { level, decimation, phase } => {
            let band_len = frame_len >> level;
            Ok(Some((level as usize, slot_indices(band_len, decimation as usize, phase as usize)?)))
        }
    }
}

/// Scatters every channel's samples into a coefficient frame.
pub fn assemble_frame(
    plan: &RatePlan,
    tree: &AllocationTree,
    payloads: &[TributaryPayload],
) -> Result<CoefficientFrame, CodecError> {
    validate_plan(plan)?;
    tree.check(plan)?;
    let ordered = match_payloads(plan, payloads)?;
    let len = plan.blocklength as usize;
    let mut frame = CoefficientFrame::zeros(len, tree.depth() as usize)?;
    for (ch, payload) in plan.channels.iter().zip(ordered) {
        let samples = payload_samples(payload, plan.samples_per_frame(ch.rate_bps), plan.resolution)?;
        let placement = tree.placement_of(&ch.id).expect("checked tree places every channel");
        match coefficient_indices(len, placement)? {
            None => frame.approx_mut().copy_from_slice(&samples),
            Some((level, indices)) => {
                let band = frame.detail_mut(level);
                for (&i, &v) in indices.iter().zip(&samples) {
                    band[i] = v;
                }
            }
        }
    }
    Ok(frame)
}

/// Gathers each channel's samples back out of a frame, in tree order.
pub fn disassemble_frame(frame: &CoefficientFrame, tree: &AllocationTree) -> Result<Vec<TributaryPayload>, CodecError> {
    if frame.depth() != tree.depth() as usize {
        return Err(CodecError::ShapeMismatch(format!(
            "frame has depth {}, tree has leaf level {}",
            frame.depth(),
            tree.depth()
        )));
    }
    let len = frame.len();
    tree.placements()
        .into_iter()
        .map(|(channel, placement)| {
            let samples =
                match coefficient_indices(len, placement).map_err(|e| CodecError::ShapeMismatch(e.to_string()))? {
                    None => frame.approx().to_vec(),
                    Some((level, indices)) => {
                        let band = frame.detail(level);
                        indices.iter().map(|&i| band[i]).collect()
                    }
                };
            Ok(TributaryPayload::samples(channel, samples))
        })
        .collect()
}

/// A validated plan, its allocation and a wavelet system, ready to mux and
/// demux any number of frames.
#[derive(Debug, Clone)]
pub struct Multiplexer {
    plan: RatePlan,
    tree: AllocationTree,
    pair: FilterPair,
    digest: String,
}

impl Multiplexer {
    pub fn new(plan: RatePlan, pair: FilterPair) -> Result<Self, CodecError> {
        let tree = allocate_bands(&plan)?;
        let digest = plan_digest(&plan, &tree);
        Ok(Multiplexer { plan, tree, pair, digest })
    }

    pub fn plan(&self) -> &RatePlan {
        &self.plan
    }

    pub fn tree(&self) -> &AllocationTree {
        &self.tree
    }

    pub fn pair(&self) -> &FilterPair {
        &self.pair
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Samples channel `id` contributes per frame.
    pub fn samples_per_frame(&self, id: &str) -> Option<usize> {
        self.plan.channel(id).map(|c| self.plan.samples_per_frame(c.rate_bps))
    }

    /// Bits channel `id` contributes per frame in digital mode.
    pub fn bits_per_frame(&self, id: &str) -> Option<usize> {
        self.samples_per_frame(id).map(|s| s * self.plan.resolution as usize)
    }

    pub fn assemble(&self, payloads: &[TributaryPayload]) -> Result<CoefficientFrame, CodecError> {
        assemble_frame(&self.plan, &self.tree, payloads)
    }

    pub fn mux(&self, payloads: &[TributaryPayload]) -> Result<MuxedSignal, CodecError> {
        let frame = self.assemble(payloads)?;
        let samples = mra::synthesize(&frame, &self.pair)?;
        Ok(MuxedSignal { samples, plan_digest: self.digest.clone() })
    }

    /// Recovers payloads in plan declaration order.
    pub fn demux(&self, signal: &MuxedSignal, kind: PayloadKind) -> Result<Vec<TributaryPayload>, CodecError> {
        if signal.plan_digest != self.digest {
            return Err(CodecError::PlanMismatch { signal: signal.plan_digest.clone(), plan: self.digest.clone() });
        }
        self.demux_samples(&signal.samples, kind)
    }

    /// Demultiplexes raw samples assumed to follow this plan.
    pub fn demux_samples(&self, samples: &[f64], kind: PayloadKind) -> Result<Vec<TributaryPayload>, CodecError> {
        let len = self.plan.blocklength as usize;
        if samples.len() != len {
            return Err(CodecError::ShapeMismatch(format!("signal has {} samples, frame needs {len}", samples.len())));
        }
        let frame = mra::analyze(samples, self.tree.depth() as usize, &self.pair)?;
        let mut recovered = disassemble_frame(&frame, &self.tree)?;
        let mut out = Vec::with_capacity(recovered.len());
        for ch in &self.plan.channels {
            let idx = recovered.iter().position(|p| p.id == ch.id).expect("tree places every channel");
            let payload = recovered.swap_remove(idx);
            out.push(match kind {
                PayloadKind::Samples => payload,
                PayloadKind::Bits => {
                    let samples = payload.as_samples().expect("disassembly yields samples");
                    let bits = dequantize_samples(samples, self.plan.resolution).map_err(|e| e.for_channel(&ch.id))?;
                    TributaryPayload::bits(ch.id.clone(), bits)
                }
            });
        }
        Ok(out)
    }
}

/// Multiplexes one frame.
pub fn mux(plan: &RatePlan, pair: &FilterPair, payloads: &[TributaryPayload]) -> Result<MuxedSignal, CodecError> {
    Multiplexer::new(plan.clone(), pair.clone())?.mux(payloads)
}

/// Demultiplexes one frame.
pub fn demux(
    plan: &RatePlan,
    pair: &FilterPair,
    signal: &MuxedSignal,
    kind: PayloadKind,
) -> Result<Vec<TributaryPayload>, CodecError> {
    Multiplexer::new(plan.clone(), pair.clone())?.demux(signal, kind)
}
