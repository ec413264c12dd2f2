//! Orthonormal two-channel filter pairs.
//!
//! A [`FilterPair`] holds the scaling (lowpass) filter `g` and the wavelet
//! (highpass) filter `h` of one orthonormal wavelet system. The wavelet
//! filter is always derived from `g` by the alternating flip
//! `h[n] = (-1)^n g[L-1-n]`, so only `g` is ever supplied by callers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Tolerance used when accepting user-supplied coefficients.
pub const ACCEPT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveletError {
    #[error("unknown wavelet `{0}` (builtins: haar, db4)")]
    UnknownWavelet(String),
    #[error("filter length {0} is odd")]
    OddLength(usize),
    #[error("coefficients are not orthonormal: {0}")]
    NotOrthonormal(String),
    #[error("cannot parse coefficient `{0}`")]
    Parse(String),
}

/// Builtin wavelet systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Haar,
    Db4,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Haar => "haar",
            Builtin::Db4 => "db4",
        }
    }

    /// Scaling coefficients in closed form.
    pub fn scaling(self) -> Vec<f64> {
        match self {
            Builtin::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Builtin::Db4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * std::f64::consts::SQRT_2;
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Builtin::Haar),
            "db4" | "daub4" | "d4" => Ok(Builtin::Db4),
            other => Err(WaveletError::UnknownWavelet(other.to_string())),
        }
    }
}

/// How a wavelet system is requested.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveletSpec {
    Builtin(Builtin),
    /// Raw scaling coefficients with a display name.
    Raw {
        name: String,
        g: Vec<f64>,
    },
}

impl WaveletSpec {
    pub fn named(name: &str) -> Result<Self, WaveletError> {
        Ok(WaveletSpec::Builtin(name.parse()?))
    }
}

/// Scaling filter `g` and wavelet filter `h` of one orthonormal system.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    name: String,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl FilterPair {
    /// Builds a pair from scaling coefficients without checking
    /// orthonormality. Only the length parity is enforced; use
    /// [`check_orthonormality`] to inspect the result.
    pub fn from_scaling_unchecked(name: impl Into<String>, g: Vec<f64>) -> Result<Self, WaveletError> {
        let h = derive_wavelet_filter(&g)?;
        Ok(FilterPair { name: name.into(), g, h })
    }

    pub fn haar() -> Self {
        make_wavelet_system(&WaveletSpec::Builtin(Builtin::Haar)).expect("haar is orthonormal")
    }

    pub fn db4() -> Self {
        make_wavelet_system(&WaveletSpec::Builtin(Builtin::Db4)).expect("db4 is orthonormal")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scaling(&self) -> &[f64] {
        &self.g
    }

    pub fn wavelet(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// Constructs and validates a wavelet system.
pub fn make_wavelet_system(spec: &WaveletSpec) -> Result<FilterPair, WaveletError> {
    let pair = match spec {
        WaveletSpec::Builtin(b) => FilterPair::from_scaling_unchecked(b.name(), b.scaling())?,
        WaveletSpec::Raw { name, g } => FilterPair::from_scaling_unchecked(name.clone(), g.clone())?,
    };
    let report = check_orthonormality(&pair);
    if !report.is_empty() {
        let msg = report.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(WaveletError::NotOrthonormal(msg));
    }
    Ok(pair)
}

/// Alternating flip: `h[n] = (-1)^n g[L-1-n]`.
pub fn derive_wavelet_filter(g: &[f64]) -> Result<Vec<f64>, WaveletError> {
    let len = g.len();
    if len % 2 != 0 {
        return Err(WaveletError::OddLength(len));
    }
    Ok((0..len)
        .map(|n| {
            let v = g[len - 1 - n];
            if n % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect())
}

/// One named constraint of an orthonormal filter pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Even length of at least two.
    Length,
    /// `sum g = sqrt(2)`.
    SumRule,
    /// `sum_n g[n] g[n+2k] = delta(k)` for the given shift `k`.
    DoubleShift(usize),
    /// `h` is the alternating flip of `g`.
    AlternatingFlip,
    /// `sum h = 0`.
    WaveletZeroMean,
    /// `sum_n g[n] h[n+2k] = 0` for the given signed shift `k`.
    CrossOrthogonality(isize),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Length => write!(f, "even length >= 2"),
            Constraint::SumRule => write!(f, "sum(g) = sqrt(2)"),
            Constraint::DoubleShift(k) => write!(f, "double-shift orthonormality (k={k})"),
            Constraint::AlternatingFlip => write!(f, "alternating flip"),
            Constraint::WaveletZeroMean => write!(f, "sum(h) = 0"),
            Constraint::CrossOrthogonality(k) => write!(f, "g/h cross orthogonality (k={k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated (residual {:e})", self.constraint, self.residual)
    }
}

fn shifted_dot(a: &[f64], b: &[f64], shift: isize) -> f64 {
    a.iter()
        .enumerate()
        .filter_map(|(n, &x)| {
            let m = n as isize + shift;
            (m >= 0 && (m as usize) < b.len()).then(|| x * b[m as usize])
        })
        .sum()
}

/// Lists every violated invariant of `pair` at [`ACCEPT_TOLERANCE`].
/// An empty report means the pair is an orthonormal wavelet system.
pub fn check_orthonormality(pair: &FilterPair) -> Vec<Violation> {
    let (g, h) = (&pair.g, &pair.h);
    let len = g.len();
    let mut report = Vec::new();
    let mut flag = |constraint, residual: f64| {
        if !(residual <= ACCEPT_TOLERANCE) {
            report.push(Violation { constraint, residual });
        }
    };

    flag(Constraint::Length, if len >= 2 && len % 2 == 0 { 0.0 } else { f64::INFINITY });
    if h.len() != len {
        flag(Constraint::AlternatingFlip, f64::INFINITY);
        return report;
    }

    flag(Constraint::SumRule, (g.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs());
    for k in 0..len.div_ceil(2).max(1) {
        let target = if k == 0 { 1.0 } else { 0.0 };
        flag(Constraint::DoubleShift(k), (shifted_dot(g, g, 2 * k as isize) - target).abs());
    }
    let flip_residual = match derive_wavelet_filter(g) {
        Ok(expected) => expected.iter().zip(h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    flag(Constraint::AlternatingFlip, flip_residual);
    flag(Constraint::WaveletZeroMean, h.iter().sum::<f64>().abs());
    let half = len as isize / 2;
    for k in -half..=half {
        flag(Constraint::CrossOrthogonality(k), shifted_dot(g, h, 2 * k).abs());
    }
    report
}

/// Parses one CSV line of decimal coefficients.
pub fn parse_coefficients(line: &str) -> Result<Vec<f64>, WaveletError> {
    line.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| WaveletError::Parse(s.to_string())))
        .collect()
}

/// Formats coefficients as one CSV line with 17 significant digits.
pub fn format_coefficients(g: &[f64]) -> String {
    g.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}
