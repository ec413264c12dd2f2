use std::fmt;

use mrdm_core::codec::CodecError;
use mrdm_core::formats::FormatError;
use mrdm_core::rate_plan::PlanError;
use mrdm_core::wavelet::WaveletError;

/// Plan or configuration invalid.
pub const EXIT_CONFIG: u8 = 2;
/// I/O failure or payload shape mismatch.
pub const EXIT_IO: u8 = 3;
/// Demultiplexed data failed its integrity check.
pub const EXIT_INTEGRITY: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CONFIG, error: error.into() }
    }

    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_IO, error: error.into() }
    }

    pub fn integrity(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_INTEGRITY, error: error.into() }
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        Failure { code: self.code, error: self.error.context(msg) }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Failure::config(e)
    }
}

impl From<WaveletError> for Failure {
    fn from(e: WaveletError) -> Self {
        Failure::config(e)
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::UnknownFormat(_) => Failure::config(e),
            _ => Failure::io(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e)
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Plan(_) | CodecError::BadResolution(_) => Failure::config(e),
            CodecError::OffGrid { .. } | CodecError::PlanMismatch { .. } => Failure::integrity(e),
            _ => Failure::io(e),
        }
    }
}
