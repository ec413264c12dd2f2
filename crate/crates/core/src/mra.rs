//! Mallat analysis and synthesis with periodic boundaries.
//!
//! Analysis correlates forward: `approx[k] = sum_n g[n] x[(2k+n) mod M]`,
//! and synthesis scatters with the same indexing, so the two are exact
//! transposes. Level 1 is the finest scale.

use thiserror::Error;

use crate::wavelet::FilterPair;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("signal length {0} must be even and at least 2")]
    OddLength(usize),
    #[error("approximation has {approx} coefficients but detail has {detail}")]
    LengthMismatch { approx: usize, detail: usize },
    #[error("length {len} is not divisible by 2^{depth} (depth must be >= 1)")]
    BadDepth { len: usize, depth: usize },
    #[error("malformed coefficient frame: {0}")]
    MalformedFrame(String),
}

/// Approximation and detail coefficients of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPair {
    pub approx: Vec<f64>,
    pub detail: Vec<f64>,
}

impl LevelPair {
    pub fn new(approx: Vec<f64>, detail: Vec<f64>) -> Result<Self, TransformError> {
        if approx.len() != detail.len() || approx.is_empty() {
            return Err(TransformError::LengthMismatch { approx: approx.len(), detail: detail.len() });
        }
        Ok(LevelPair { approx, detail })
    }
}

/// Coefficients of one frame along the approximation chain.
///
/// `details[0]` is level 1 (length N/2), `details[d-1]` is level `d`, and
/// `approx` is the level-`d` approximation (length N/2^d).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFrame {
    details: Vec<Vec<f64>>,
    approx: Vec<f64>,
}

impl CoefficientFrame {
    /// All-zero frame for a blocklength and depth.
    pub fn zeros(len: usize, depth: usize) -> Result<Self, TransformError> {
        check_depth(len, depth)?;
        Ok(CoefficientFrame {
            details: (1..=depth).map(|j| vec![0.0; len >> j]).collect(),
            approx: vec![0.0; len >> depth],
        })
    }

    pub fn from_parts(details: Vec<Vec<f64>>, approx: Vec<f64>) -> Result<Self, TransformError> {
        let depth = details.len();
        if depth == 0 {
            return Err(TransformError::MalformedFrame("no detail levels".into()));
        }
        let len = approx.len() << depth;
        if approx.is_empty() {
            return Err(TransformError::MalformedFrame("empty approximation".into()));
        }
        for (i, d) in details.iter().enumerate() {
            if d.len() != len >> (i + 1) {
                return Err(TransformError::MalformedFrame(format!(
                    "level {} has {} coefficients, expected {}",
                    i + 1,
                    d.len(),
                    len >> (i + 1)
                )));
            }
        }
        Ok(CoefficientFrame { details, approx })
    }

    pub fn depth(&self) -> usize {
        self.details.len()
    }

    /// Blocklength N of the signal this frame represents.
    pub fn len(&self) -> usize {
        self.approx.len() << self.depth()
    }

    pub fn is_empty(&self) -> bool {
        self.approx.is_empty()
    }

    /// Detail coefficients at `level` (1-based, 1 = finest).
    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - 1]
    }

    pub fn detail_mut(&mut self, level: usize) -> &mut [f64] {
        &mut self.details[level - 1]
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn approx_mut(&mut self) -> &mut [f64] {
        &mut self.approx
    }

    /// Every coefficient, finest detail first, approximation last.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.details.iter().flatten().chain(self.approx.iter()).copied()
    }

    pub fn energy(&self) -> f64 {
        self.coefficients().map(|c| c * c).sum()
    }
}

fn check_depth(len: usize, depth: usize) -> Result<(), TransformError> {
    if depth == 0 || depth >= usize::BITS as usize || len == 0 || len % (1usize << depth) != 0 {
        return Err(TransformError::BadDepth { len, depth });
    }
    Ok(())
}

/// One analysis step: `M` samples in, `M/2` approximation and detail out.
pub fn analyze_level(x: &[f64], pair: &FilterPair) -> Result<LevelPair, TransformError> {
    let m = x.len();
    if m < 2 || m % 2 != 0 {
        return Err(TransformError::OddLength(m));
    }
    let (g, h) = (pair.scaling(), pair.wavelet());
    let half = m / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let base = 2 * k;
        let (mut a, mut d) = (0.0, 0.0);
        if base + g.len() <= m {
            for (n, (&gn, &hn)) in g.iter().zip(h).enumerate() {
                let v = x[base + n];
                a += gn * v;
                d += hn * v;
            }
        } else {
            for (n, (&gn, &hn)) in g.iter().zip(h).enumerate() {
                let v = x[(base + n) % m];
                a += gn * v;
                d += hn * v;
            }
        }
        approx[k] = a;
        detail[k] = d;
    }
    Ok(LevelPair { approx, detail })
}

/// One synthesis step, the exact inverse of [`analyze_level`].
pub fn synthesize_level(lp: &LevelPair, pair: &FilterPair) -> Result<Vec<f64>, TransformError> {
    synthesize_parts(&lp.approx, &lp.detail, pair)
}

fn synthesize_parts(approx: &[f64], detail: &[f64], pair: &FilterPair) -> Result<Vec<f64>, TransformError> {
    if approx.len() != detail.len() || approx.is_empty() {
        return Err(TransformError::LengthMismatch { approx: approx.len(), detail: detail.len() });
    }
    let (g, h) = (pair.scaling(), pair.wavelet());
    let m = 2 * approx.len();
    let mut x = vec![0.0; m];
    for (k, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        let base = 2 * k;
        if base + g.len() <= m {
            for (n, (&gn, &hn)) in g.iter().zip(h).enumerate() {
                x[base + n] += gn * a + hn * d;
            }
        } else {
            for (n, (&gn, &hn)) in g.iter().zip(h).enumerate() {
                x[(base + n) % m] += gn * a + hn * d;
            }
        }
    }
    Ok(x)
}

/// Cascaded analysis down to `depth` levels.
pub fn analyze(x: &[f64], depth: usize, pair: &FilterPair) -> Result<CoefficientFrame, TransformError> {
    check_depth(x.len(), depth)?;
    let mut details = Vec::with_capacity(depth);
    let mut running = x.to_vec();
    for _ in 0..depth {
        let LevelPair { approx, detail } = analyze_level(&running, pair)?;
        details.push(detail);
        running = approx;
    }
    Ok(CoefficientFrame { details, approx: running })
}

/// Cascaded synthesis from the deepest level outward.
pub fn synthesize(frame: &CoefficientFrame, pair: &FilterPair) -> Result<Vec<f64>, TransformError> {
    let mut running = frame.approx.clone();
    for detail in frame.details.iter().rev() {
        if detail.len() != running.len() {
            return Err(TransformError::MalformedFrame(format!(
                "detail of length {} paired with approximation of length {}",
                detail.len(),
                running.len()
            )));
        }
        running = synthesize_parts(&running, detail, pair)?;
    }
    Ok(running)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn haar_level_examples() {
        let haar = FilterPair::haar();
        let lp = analyze_level(&[1.0, 1.0], &haar).unwrap();
        close(&lp.approx, &[SQRT_2], 1e-15);
        close(&lp.detail, &[0.0], 1e-15);

        let lp = analyze_level(&[1.0, 0.0, 0.0, 0.0], &haar).unwrap();
        close(&lp.approx, &[FRAC_1_SQRT_2, 0.0], 1e-15);
        close(&lp.detail, &[FRAC_1_SQRT_2, 0.0], 1e-15);

        let lp = analyze_level(&[3.0, 1.0, 2.0, 2.0], &haar).unwrap();
        close(&lp.approx, &[2.0 * SQRT_2, 2.0 * SQRT_2], 1e-14);
        close(&lp.detail, &[SQRT_2, 0.0], 1e-14);
        close(&synthesize_level(&lp, &haar).unwrap(), &[3.0, 1.0, 2.0, 2.0], 1e-14);

        let lp = LevelPair::new(vec![SQRT_2], vec![0.0]).unwrap();
        close(&synthesize_level(&lp, &haar).unwrap(), &[1.0, 1.0], 1e-15);
    }

    #[test]
    fn zeros_synthesize_to_zeros() {
        for pair in [FilterPair::haar(), FilterPair::db4()] {
            let lp = LevelPair::new(vec![0.0; 4], vec![0.0; 4]).unwrap();
            assert_eq!(synthesize_level(&lp, &pair).unwrap(), vec![0.0; 8]);
        }
    }

    #[test]
    fn level_errors() {
        let haar = FilterPair::haar();
        assert_eq!(analyze_level(&[1.0, 2.0, 3.0], &haar), Err(TransformError::OddLength(3)));
        assert_eq!(analyze_level(&[], &haar), Err(TransformError::OddLength(0)));
        assert!(matches!(LevelPair::new(vec![1.0], vec![1.0, 2.0]), Err(TransformError::LengthMismatch { .. })));
        assert!(matches!(analyze(&[0.0; 12], 3, &haar), Err(TransformError::BadDepth { len: 12, depth: 3 })));
        assert!(matches!(analyze(&[0.0; 8], 0, &haar), Err(TransformError::BadDepth { .. })));
    }

    #[test]
    fn cascade_examples() {
        let haar = FilterPair::haar();
        let f = analyze(&[1.0; 4], 2, &haar).unwrap();
        close(f.detail(1), &[0.0, 0.0], 1e-15);
        close(f.detail(2), &[0.0], 1e-15);
        close(f.approx(), &[2.0], 1e-15);

        let f = analyze(&[0.5; 4], 2, &haar).unwrap();
        close(f.approx(), &[1.0], 1e-15);

        let x = [0.3, -1.0, 2.5, 0.25, 7.0, 1.0];
        let f = analyze(&x, 1, &haar).unwrap();
        let lp = analyze_level(&x, &haar).unwrap();
        assert_eq!(f.approx(), lp.approx.as_slice());
        assert_eq!(f.detail(1), lp.detail.as_slice());
    }

    #[test]
    fn haar_synthesis_shapes() {
        let haar = FilterPair::haar();
        let scale = CoefficientFrame::from_parts(vec![vec![0.0, 0.0], vec![0.0]], vec![1.0]).unwrap();
        close(&synthesize(&scale, &haar).unwrap(), &[0.5; 4], 1e-15);
        let wave = CoefficientFrame::from_parts(vec![vec![0.0, 0.0], vec![1.0]], vec![0.0]).unwrap();
        close(&synthesize(&wave, &haar).unwrap(), &[0.5, 0.5, -0.5, -0.5], 1e-15);
    }

    #[test]
    fn malformed_frames() {
        assert!(CoefficientFrame::from_parts(vec![vec![0.0; 3], vec![0.0]], vec![0.0]).is_err());
        assert!(CoefficientFrame::from_parts(vec![], vec![0.0]).is_err());
        assert!(CoefficientFrame::from_parts(vec![vec![]], vec![]).is_err());
    }

    #[test]
    fn db4_wraps_on_short_levels() {
        let db4 = FilterPair::db4();
        let x = [0.25, -0.5, 0.75, 0.125];
        let f = analyze(&x, 2, &db4).unwrap();
        close(&synthesize(&f, &db4).unwrap(), &x, 1e-14);
    }
}
