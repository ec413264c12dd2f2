//! Rate numerology of a multiplex: frame time, tributary rate tiers,
//! capacity compositions and plan validation.
//!
//! A plan is the tuple (N, J, R, B) plus its declared channels. Rates are
//! measured in units of the basic rate R: a channel at `2^(J-j) R` occupies
//! `2^(J-j)` units and a frame carries `2^J` units in total.

mod alloc;

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alloc::{allocate_bands, slot_indices, AllocNode, AllocationTree, DetailBand, Placement, Slot};

/// Largest J accepted by [`enumerate_compositions`].
pub const MAX_ENUMERATION_SCALES: u32 = 16;
/// Default cap on the number of compositions produced by one enumeration.
pub const DEFAULT_COMPOSITION_CAP: u64 = 1_000_000;
/// Largest J accepted in a plan.
pub const MAX_PLAN_SCALES: u32 = 30;
/// Largest converter resolution.
pub const MAX_RESOLUTION: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("NotPowerOfTwoN: blocklength {0} is not a power of two")]
    NotPowerOfTwoN(u64),
    #[error("DepthExceedsBlocklength: J={scales} needs N >= 2^J, got N={blocklength}")]
    DepthExceedsBlocklength { blocklength: u64, scales: u32 },
    #[error("InvalidScaleCount: J={0} outside 1..={max}", max = MAX_PLAN_SCALES)]
    InvalidScaleCount(u32),
    #[error("JTooLarge: J={scales} would produce {count} compositions (cap {cap})")]
    JTooLarge { scales: u32, count: u64, cap: u64 },
    #[error("BadResolution: B={0} outside 1..={max}", max = MAX_RESOLUTION)]
    BadResolution(u32),
    #[error("BadBasicRate: R={0} must be positive and R*2^J must fit in 64 bits")]
    BadBasicRate(u64),
    #[error("IllegalRate: channel `{id}` rate {rate} bps is not R*2^i for 0 <= i < J")]
    IllegalRate { id: String, rate: u64 },
    #[error("CapacityMismatch: channel rates sum to {total} bps, frame carries {capacity} bps")]
    CapacityMismatch { total: u64, capacity: u64 },
    #[error("RateInconsistentWithFm: channel `{id}` rate {rate} bps but B*2*f_m = {expected} bps")]
    RateInconsistentWithFm { id: String, rate: u64, expected: u64 },
    #[error("DuplicateChannel: channel id `{0}` declared twice")]
    DuplicateChannel(String),
    #[error("BadPhase: phase {phase} with decimation {decimation} in a band of {band_length}")]
    BadPhase { band_length: usize, decimation: usize, phase: usize },
    #[error("MalformedTree: {0}")]
    MalformedTree(String),
}

/// One declared tributary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub id: String,
    pub rate_bps: u64,
    /// Maximum analog frequency, when the channel is a sampled analog source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_m_hz: Option<u64>,
}

impl ChannelSpec {
    pub fn new(id: impl Into<String>, rate_bps: u64) -> Self {
        ChannelSpec { id: id.into(), rate_bps, f_m_hz: None }
    }
}

/// Multiplex parameters (N, J, R, B) and the channel list, as read from
/// a plan file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatePlan {
    #[serde(rename = "N")]
    pub blocklength: u64,
    #[serde(rename = "J")]
    pub scales: u32,
    #[serde(rename = "R_bps")]
    pub basic_rate: u64,
    #[serde(rename = "B")]
    pub resolution: u32,
    pub channels: Vec<ChannelSpec>,
}

impl RatePlan {
    pub fn new(blocklength: u64, scales: u32, basic_rate: u64, resolution: u32) -> Self {
        RatePlan { blocklength, scales, basic_rate, resolution, channels: Vec::new() }
    }

    pub fn with_channel(mut self, id: impl Into<String>, rate_bps: u64) -> Self {
        self.channels.push(ChannelSpec::new(id, rate_bps));
        self
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Plan realizing a composition, channels named `c1, c2, ...` in
    /// descending rate order.
    pub fn from_composition(blocklength: u64, basic_rate: u64, resolution: u32, comp: &Composition) -> Self {
        let scales = comp.scales();
        let mut plan = RatePlan::new(blocklength, scales, basic_rate, resolution);
        let mut next = 1;
        for (j, &count) in comp.counts().iter().enumerate() {
            let rate = basic_rate << (scales as usize - (j + 1));
            for _ in 0..count {
                plan = plan.with_channel(format!("c{next}"), rate);
                next += 1;
            }
        }
        plan
    }

    /// Frame capacity in units of R.
    pub fn units(&self) -> u64 {
        1u64 << self.scales
    }

    pub fn channel(&self, id: &str) -> Option<&ChannelSpec> {
        self.channels.iter().find(|c| c.id == id)
    }

    /// Samples a channel contributes to one frame: `rate * T / B`.
    pub fn samples_per_frame(&self, rate_bps: u64) -> usize {
        (rate_bps / self.basic_rate * (self.blocklength >> self.scales)) as usize
    }
}

/// Channel counts per rate tier: `n[j-1]` channels at `2^(J-j) R`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition(Vec<u64>);

impl Composition {
    pub fn new(counts: Vec<u64>) -> Self {
        Composition(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn scales(&self) -> u32 {
        self.0.len() as u32
    }

    /// Whether `sum n_j 2^(J-j) = 2^J`.
    pub fn fills_frame(&self) -> bool {
        let scales = self.0.len();
        if scales == 0 || scales >= 64 {
            return false;
        }
        let used =
            self.0.iter().enumerate().try_fold(0u64, |acc, (j, &n)| {
                n.checked_mul(1u64 << (scales - 1 - j)).and_then(|u| acc.checked_add(u))
            });
        used == Some(1u64 << scales)
    }

    pub fn channel_count(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Transmission time of one frame, `N B / (2^J R)` seconds, exactly.
pub fn frame_time(plan: &RatePlan) -> Result<Ratio<u128>, PlanError> {
    validate_plan(plan)?;
    Ok(frame_time_of(plan.blocklength, plan.scales, plan.basic_rate, plan.resolution))
}

/// Frame time from raw parameters, without channel validation.
pub fn frame_time_of(blocklength: u64, scales: u32, basic_rate: u64, resolution: u32) -> Ratio<u128> {
    Ratio::new(blocklength as u128 * resolution as u128, (basic_rate as u128) << scales)
}

/// Output rate of the multiplex, `2^J R` bits per second.
pub fn aggregate_rate(plan: &RatePlan) -> Result<u64, PlanError> {
    validate_plan(plan)?;
    Ok(plan.basic_rate << plan.scales)
}

/// Admissible tributary rates `R, 2R, ..., 2^(J-1) R`, ascending.
pub fn tributary_rates(scales: u32, basic_rate: u64) -> Vec<u64> {
    (0..scales).map(|i| basic_rate << i).collect()
}

/// Checks every plan invariant and returns the composition it induces.
pub fn validate_plan(plan: &RatePlan) -> Result<Composition, PlanError> {
    let RatePlan { blocklength, scales, basic_rate, resolution, ref channels } = *plan;
    if scales == 0 || scales > MAX_PLAN_SCALES {
        return Err(PlanError::InvalidScaleCount(scales));
    }
    if !blocklength.is_power_of_two() {
        return Err(PlanError::NotPowerOfTwoN(blocklength));
    }
    if blocklength < 1u64 << scales {
        return Err(PlanError::DepthExceedsBlocklength { blocklength, scales });
    }
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(PlanError::BadResolution(resolution));
    }
    if basic_rate == 0 || basic_rate.leading_zeros() <= scales + 1 {
        return Err(PlanError::BadBasicRate(basic_rate));
    }

    let mut seen = HashSet::new();
    let mut counts = vec![0u64; scales as usize];
    let mut total: u64 = 0;
    for ch in channels {
        if !seen.insert(ch.id.as_str()) {
            return Err(PlanError::DuplicateChannel(ch.id.clone()));
        }
        let tier = tributary_rates(scales, basic_rate)
            .iter()
            .position(|&r| r == ch.rate_bps)
            .ok_or_else(|| PlanError::IllegalRate { id: ch.id.clone(), rate: ch.rate_bps })?;
        if let Some(fm) = ch.f_m_hz {
            let expected = (resolution as u64).saturating_mul(2).saturating_mul(fm);
            if expected != ch.rate_bps {
                return Err(PlanError::RateInconsistentWithFm { id: ch.id.clone(), rate: ch.rate_bps, expected });
            }
        }
        // tier i = rate 2^i R sits at level j = J - i
        counts[scales as usize - 1 - tier] += 1;
        total = total.saturating_add(ch.rate_bps);
    }
    let capacity = basic_rate << scales;
    if total != capacity {
        return Err(PlanError::CapacityMismatch { total, capacity });
    }
    Ok(Composition(counts))
}

/// Number of compositions for `J` scales, saturating.
pub fn count_compositions(scales: u32) -> u64 {
    if scales == 0 || scales > MAX_ENUMERATION_SCALES {
        return 0;
    }
    let target = 1usize << scales;
    // partitions of 2^J into powers of two no larger than 2^(J-1)
    let mut ways = vec![0u64; target + 1];
    ways[0] = 1;
    for i in 0..scales {
        let part = 1usize << i;
        for amount in part..=target {
            ways[amount] = ways[amount].saturating_add(ways[amount - part]);
        }
    }
    ways[target]
}

/// All compositions for `J` scales, lexicographically descending.
pub fn enumerate_compositions(scales: u32) -> Result<Vec<Composition>, PlanError> {
    enumerate_compositions_capped(scales, DEFAULT_COMPOSITION_CAP)
}

pub fn enumerate_compositions_capped(scales: u32, cap: u64) -> Result<Vec<Composition>, PlanError> {
    if scales == 0 {
        return Err(PlanError::InvalidScaleCount(scales));
    }
    let count = count_compositions(scales);
    if scales > MAX_ENUMERATION_SCALES || count > cap {
        return Err(PlanError::JTooLarge { scales, count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut prefix = Vec::with_capacity(scales as usize);
    descend(scales as usize, 1u64 << scales, &mut prefix, &mut out);
    debug_assert_eq!(out.len() as u64, count);
    Ok(out)
}

fn descend(scales: usize, remaining: u64, prefix: &mut Vec<u64>, out: &mut Vec<Composition>) {
    let j = prefix.len() + 1;
    let weight = 1u64 << (scales - j);
    if j == scales {
        prefix.push(remaining);
        out.push(Composition(prefix.clone()));
        prefix.pop();
        return;
    }
    for n in (0..=remaining / weight).rev() {
        prefix.push(n);
        descend(scales, remaining - n * weight, prefix, out);
        prefix.pop();
    }
}
