//! Deterministic assignment of channels to detail bands, TDM phases and
//! approximation nodes.
//!
//! Channels are placed largest first (ties in declaration order). Each one
//! goes to the finest detail band holding a free buddy chunk large enough,
//! taking the lowest free phase and halving chunks until the size matches.
//! When no band has room, the current approximation node either becomes the
//! channel's leaf (exact size match) or is split one level deeper, which
//! opens a new detail band.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{validate_plan, PlanError, RatePlan};

/// One TDM slot inside a detail band: the channel owns coefficient indices
/// `phase, phase + decimation, phase + 2*decimation, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub channel: String,
    pub decimation: u64,
    pub phase: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetailBand {
    pub level: u32,
    pub slots: Vec<Slot>,
}

/// Node of the allocation tree. The root sits at level 0 (the whole frame).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AllocNode {
    /// The channel's samples are the approximation at `level`.
    Leaf { level: u32, channel: String },
    /// Detail band at `level + 1` plus the approximation child at `level + 1`.
    Split { level: u32, band: DetailBand, child: Box<AllocNode> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationTree {
    pub scales: u32,
    pub root: AllocNode,
}

/// Where one channel's samples live in a coefficient frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Leaf { level: u32 },
    Slot { level: u32, decimation: u64, phase: u64 },
}

impl AllocationTree {
    /// Level of the leaf node, which is also the analysis depth a frame needs.
    pub fn depth(&self) -> u32 {
        self.leaf().0
    }

    /// `(level, channel)` of the approximation leaf.
    pub fn leaf(&self) -> (u32, &str) {
        let mut node = &self.root;
        loop {
            match node {
                AllocNode::Leaf { level, channel } => return (*level, channel),
                AllocNode::Split { child, .. } => node = child,
            }
        }
    }

    /// Detail bands from finest (level 1) to coarsest.
    pub fn bands(&self) -> Vec<&DetailBand> {
        let mut out = Vec::new();
        let mut node = &self.root;
        while let AllocNode::Split { band, child, .. } = node {
            out.push(band);
            node = child;
        }
        out
    }

    pub fn band(&self, level: u32) -> Option<&DetailBand> {
        self.bands().into_iter().find(|b| b.level == level)
    }

    /// Every placement in tree order: band slots finest first, leaf last.
    pub fn placements(&self) -> Vec<(&str, Placement)> {
        let mut out: Vec<(&str, Placement)> = self
            .bands()
            .into_iter()
            .flat_map(|b| {
                b.slots.iter().map(move |s| {
                    (s.channel.as_str(), Placement::Slot { level: b.level, decimation: s.decimation, phase: s.phase })
                })
            })
            .collect();
        let (level, channel) = self.leaf();
        out.push((channel, Placement::Leaf { level }));
        out
    }

    pub fn placement_of(&self, channel: &str) -> Option<Placement> {
        self.placements().into_iter().find(|(c, _)| *c == channel).map(|(_, p)| p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Checks the tree against a plan: levels are consecutive, slots are
    /// legal and pairwise disjoint, units add up to `2^J`, and every
    /// declared channel appears exactly once with the size its rate needs.
    pub fn check(&self, plan: &RatePlan) -> Result<(), PlanError> {
        let bad = |msg: String| Err(PlanError::MalformedTree(msg));
        if self.scales != plan.scales {
            return bad(format!("tree has J={} but plan has J={}", self.scales, plan.scales));
        }
        let scales = self.scales;
        let mut node = &self.root;
        let mut expected_level = 0;
        let mut units: u64 = 0;
        let mut sizes: HashMap<String, u64> = HashMap::new();
        let mut record = |channel: &str, size: u64| -> Result<(), PlanError> {
            if sizes.insert(channel.to_string(), size).is_some() {
                return bad(format!("channel `{channel}` placed twice"));
            }
            Ok(())
        };
        loop {
            match node {
                AllocNode::Leaf { level, channel } => {
                    if *level != expected_level || *level > scales {
                        return bad(format!("leaf at level {level}, expected {expected_level}"));
                    }
                    let size = 1u64 << (scales - level);
                    units += size;
                    record(channel, size)?;
                    break;
                }
                AllocNode::Split { level, band, child } => {
                    if *level != expected_level || band.level != level + 1 || band.level > scales {
                        return bad(format!("split at level {level} with band level {}", band.level));
                    }
                    let band_units = 1u64 << (scales - band.level);
                    for (i, s) in band.slots.iter().enumerate() {
                        if !s.decimation.is_power_of_two() || s.decimation > band_units || s.phase >= s.decimation {
                            return bad(format!("slot ({}, {}) illegal in band {}", s.decimation, s.phase, band.level));
                        }
                        for other in &band.slots[..i] {
                            let modulus = s.decimation.min(other.decimation);
                            if s.phase % modulus == other.phase % modulus {
                                return bad(format!(
                                    "slots of `{}` and `{}` overlap in band {}",
                                    s.channel, other.channel, band.level
                                ));
                            }
                        }
                        let size = band_units / s.decimation;
                        units += size;
                        record(&s.channel, size)?;
                    }
                    expected_level += 1;
                    node = child;
                }
            }
        }
        if units != 1u64 << scales {
            return bad(format!("placements cover {units} units, frame has {}", 1u64 << scales));
        }
        if sizes.len() != plan.channels.len() {
            return bad(format!("tree places {} channels, plan declares {}", sizes.len(), plan.channels.len()));
        }
        for ch in &plan.channels {
            match sizes.get(ch.id.as_str()) {
                None => return bad(format!("channel `{}` not placed", ch.id)),
                Some(&size) if size * plan.basic_rate != ch.rate_bps => {
                    return bad(format!("channel `{}` given {size} units for {} bps", ch.id, ch.rate_bps))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Coefficient indices owned by slot `(decimation, phase)` in a band.
pub fn slot_indices(band_length: usize, decimation: usize, phase: usize) -> Result<Vec<usize>, PlanError> {
    if !decimation.is_power_of_two() || phase >= decimation || band_length % decimation != 0 {
        return Err(PlanError::BadPhase { band_length, decimation, phase });
    }
    Ok((phase..band_length).step_by(decimation).collect())
}

struct BandBuilder {
    level: u32,
    /// Units held by the whole band.
    units: u64,
    /// Free buddy chunks as `(decimation, phase)`.
    free: Vec<(u64, u64)>,
    slots: Vec<Slot>,
}

impl BandBuilder {
    fn new(level: u32, scales: u32) -> Self {
        BandBuilder { level, units: 1u64 << (scales - level), free: vec![(1, 0)], slots: Vec::new() }
    }

    fn try_place(&mut self, channel: &str, size: u64) -> bool {
        let units = self.units;
        let Some(idx) = self
            .free
            .iter()
            .enumerate()
            .filter(|(_, &(m, _))| units / m >= size)
            .min_by_key(|(_, &(_, p))| p)
            .map(|(i, _)| i)
        else {
            return false;
        };
        let (mut m, p) = self.free.swap_remove(idx);
        while units / m > size {
            self.free.push((2 * m, p + m));
            m *= 2;
        }
        self.slots.push(Slot { channel: channel.to_string(), decimation: m, phase: p });
        true
    }
}

/// Runs the deterministic buddy allocation for a valid plan.
pub fn allocate_bands(plan: &RatePlan) -> Result<AllocationTree, PlanError> {
    validate_plan(plan)?;
    let scales = plan.scales;
    let mut order: Vec<usize> = (0..plan.channels.len()).collect();
    order.sort_by(|&a, &b| plan.channels[b].rate_bps.cmp(&plan.channels[a].rate_bps));

    let mut bands: Vec<BandBuilder> = Vec::new();
    let mut node_level = 0u32;
    let mut leaf: Option<&str> = None;
    for idx in order {
        let ch = &plan.channels[idx];
        let size = ch.rate_bps / plan.basic_rate;
        if leaf.is_some() {
            return Err(PlanError::MalformedTree(format!("no room left for `{}`", ch.id)));
        }
        loop {
            if bands.iter_mut().any(|b| b.try_place(&ch.id, size)) {
                break;
            }
            let node_units = 1u64 << (scales - node_level);
            if node_units == size {
                leaf = Some(&ch.id);
                break;
            }
            if node_level == scales || node_units < size {
                return Err(PlanError::MalformedTree(format!("cannot place `{}`", ch.id)));
            }
            node_level += 1;
            bands.push(BandBuilder::new(node_level, scales));
        }
    }
    let leaf = leaf.ok_or_else(|| PlanError::MalformedTree("approximation node left empty".into()))?;

    let mut root = AllocNode::Leaf { level: node_level, channel: leaf.to_string() };
    for band in bands.into_iter().rev() {
        root = AllocNode::Split {
            level: band.level - 1,
            band: DetailBand { level: band.level, slots: band.slots },
            child: Box::new(root),
        };
    }
    let tree = AllocationTree { scales, root };
    debug_assert_eq!(tree.check(plan), Ok(()));
    Ok(tree)
}
