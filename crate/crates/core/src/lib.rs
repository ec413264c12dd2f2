//! Multiresolution division multiplexing.
//!
//! Tributary channels are placed as approximation and detail coefficients
//! of an orthonormal wavelet decomposition; synthesis produces the muxed
//! signal and Mallat analysis recovers the channels.
//!
//! - [`wavelet`]: orthonormal filter pairs (Haar, db4, user-supplied).
//! - [`mra`]: periodic single-level and cascaded analysis/synthesis.
//! - [`rate_plan`]: frame time, rate tiers, compositions, band allocation.
//! - [`codec`]: quantizer, frame assembly, mux and demux.
//! - [`spectrum`]: magnitude spectra against a TDM reference.
//! - [`formats`]: raw and CSV sample encodings.

pub mod codec;
pub mod formats;
pub mod mra;
pub mod rate_plan;
pub mod spectrum;
pub mod wavelet;

pub use codec::{
    assemble_frame, demux, dequantize_samples, disassemble_frame, mux, quantize_words, Bits, CodecError, Multiplexer,
    MuxedSignal, PayloadContent, PayloadKind, TributaryPayload,
};
pub use mra::{analyze, analyze_level, synthesize, synthesize_level, CoefficientFrame, LevelPair, TransformError};
pub use rate_plan::{
    aggregate_rate, allocate_bands, enumerate_compositions, frame_time, slot_indices, tributary_rates, validate_plan,
    AllocationTree, ChannelSpec, Composition, PlanError, RatePlan,
};
pub use spectrum::{compare_spectra, dft_magnitude, tdm_reference, SpectrumReport};
pub use wavelet::{
    check_orthonormality, derive_wavelet_filter, make_wavelet_system, FilterPair, WaveletError, WaveletSpec,
};
