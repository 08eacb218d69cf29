//! The discrete control space `U` and trajectories through it.
//!
//! A [`ControlPoint`] is one sensing action: which center frequency is
//! radiated, from which trunk/module (and therefore which physical position),
//! and with which transmit polarization in which time slot. The control space
//! is discretized to the scheduler grid; embodiment is a static element
//! geometry.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::map_state_to_element;
use crate::scheduler::{FabricConfig, Schedule, ScheduleEntry, SubbandPlan};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn as_str(self) -> &'static str {
        match self {
            Pol::H => "H",
            Pol::V => "V",
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyState {
    /// Global center-frequency index, unique across the whole fabric.
    pub index: usize,
    pub center_hz: f64,
    pub chirp_bandwidth_hz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApertureState {
    pub chain_id: usize,
    pub module_id: usize,
    pub element_position: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveformState {
    pub chirp_duration_s: f64,
    pub pol_tx: Pol,
    pub slot_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub f: FrequencyState,
    pub q: ApertureState,
    pub s: WaveformState,
}

/// The five discrete coordinates that fully identify a sensing action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey {
    pub freq_index: usize,
    pub chain: usize,
    pub module: usize,
    pub pol_tx: Pol,
    pub slot: usize,
}

impl StateKey {
    /// Stable 64-bit digest used to derive per-state noise streams.
    pub fn digest(&self) -> u64 {
        let mut h = 0x9e37_79b9_7f4a_7c15u64;
        for word in [
            self.freq_index as u64,
            self.chain as u64,
            self.module as u64,
            self.pol_tx as u64,
            self.slot as u64,
        ] {
            h = splitmix64(h ^ word);
        }
        h
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ControlPoint {
    pub fn key(&self) -> StateKey {
        StateKey {
            freq_index: self.f.index,
            chain: self.q.chain_id,
            module: self.q.module_id,
            pol_tx: self.s.pol_tx,
            slot: self.s.slot_index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<ControlPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<ControlPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("trajectory is empty".into()));
        }
        if let Some(w) = points
            .windows(2)
            .find(|w| w[1].s.slot_index < w[0].s.slot_index)
        {
            return Err(Error::InvalidInput(format!(
                "trajectory slots decrease from {} to {}",
                w[0].s.slot_index, w[1].s.slot_index
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Regroups the trajectory into schedule entries.
    pub fn to_entries(&self, p_steps: usize) -> Vec<ScheduleEntry> {
        self.points
            .iter()
            .map(|u| ScheduleEntry {
                slot: u.s.slot_index,
                chain_id: u.q.chain_id,
                module_id: u.q.module_id,
                step: u.f.index % p_steps,
                pol_tx: u.s.pol_tx,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSpaceBounds {
    pub k_chains: usize,
    pub m_modules: usize,
    pub p_steps: usize,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

impl From<&FabricConfig> for ControlSpaceBounds {
    fn from(cfg: &FabricConfig) -> Self {
        Self {
            k_chains: cfg.k_chains,
            m_modules: cfg.m_modules,
            p_steps: cfg.p_steps,
            band_lo_hz: cfg.band_lo_hz,
            band_hi_hz: cfg.band_hi_hz,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointViolation {
    ChainOutOfRange { chain_id: usize, k_chains: usize },
    ModuleOutOfRange { module_id: usize, m_modules: usize },
    FrequencyIndexOutOfRange { index: usize, limit: usize },
    NonPositiveCenter(f64),
    NonPositiveBandwidth(f64),
    NonPositiveDuration(f64),
    BandOverflow { lo_hz: f64, hi_hz: f64 },
    NonFinitePosition(Vec3),
}

impl fmt::Display for PointViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointViolation::ChainOutOfRange { chain_id, k_chains } => {
                write!(f, "chain_id out of range: {chain_id} >= K={k_chains}")
            }
            PointViolation::ModuleOutOfRange { module_id, m_modules } => {
                write!(f, "module_id out of range: {module_id} >= M={m_modules}")
            }
            PointViolation::FrequencyIndexOutOfRange { index, limit } => {
                write!(f, "frequency index out of range: {index} >= {limit}")
            }
            PointViolation::NonPositiveCenter(v) => write!(f, "center frequency not positive: {v}"),
            PointViolation::NonPositiveBandwidth(v) => {
                write!(f, "chirp bandwidth not positive: {v}")
            }
            PointViolation::NonPositiveDuration(v) => write!(f, "chirp duration not positive: {v}"),
            PointViolation::BandOverflow { lo_hz, hi_hz } => {
                write!(f, "band overflow: chirp spans [{lo_hz}, {hi_hz}] Hz")
            }
            PointViolation::NonFinitePosition(p) => write!(f, "element position not finite: {p:?}"),
        }
    }
}

impl std::error::Error for PointViolation {}

/// Checks a control point against the declared bounds, returning the first
/// violated constraint.
pub fn validate_point(u: &ControlPoint, bounds: &ControlSpaceBounds) -> Result<(), PointViolation> {
    if u.q.chain_id >= bounds.k_chains {
        return Err(PointViolation::ChainOutOfRange {
            chain_id: u.q.chain_id,
            k_chains: bounds.k_chains,
        });
    }
    if u.q.module_id >= bounds.m_modules {
        return Err(PointViolation::ModuleOutOfRange {
            module_id: u.q.module_id,
            m_modules: bounds.m_modules,
        });
    }
    let limit = bounds.k_chains * bounds.m_modules * bounds.p_steps;
    if u.f.index >= limit {
        return Err(PointViolation::FrequencyIndexOutOfRange {
            index: u.f.index,
            limit,
        });
    }
    if !(u.f.center_hz > 0.0) {
        return Err(PointViolation::NonPositiveCenter(u.f.center_hz));
    }
    if !(u.f.chirp_bandwidth_hz > 0.0) {
        return Err(PointViolation::NonPositiveBandwidth(u.f.chirp_bandwidth_hz));
    }
    if !(u.s.chirp_duration_s > 0.0) {
        return Err(PointViolation::NonPositiveDuration(u.s.chirp_duration_s));
    }
    let lo = u.f.center_hz - u.f.chirp_bandwidth_hz / 2.0;
    let hi = u.f.center_hz + u.f.chirp_bandwidth_hz / 2.0;
    if lo < bounds.band_lo_hz || hi > bounds.band_hi_hz {
        return Err(PointViolation::BandOverflow { lo_hz: lo, hi_hz: hi });
    }
    if u.q.element_position.iter().any(|c| !c.is_finite()) {
        return Err(PointViolation::NonFinitePosition(u.q.element_position));
    }
    Ok(())
}

/// Static placement of the virtual elements along a straight aperture line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FabricGeometry {
    /// Position of element 0.
    pub origin: Vec3,
    /// Unit vector along the aperture.
    pub direction: Vec3,
    pub spacing_m: f64,
    pub n_elements: usize,
}

impl FabricGeometry {
    /// Builds a geometry whose element centroid sits at `center`.
    pub fn centered(center: Vec3, direction: Vec3, spacing_m: f64, n_elements: usize) -> Self {
        let dir = normalize(direction);
        let half = (n_elements.saturating_sub(1)) as f64 * spacing_m / 2.0;
        let origin = [
            center[0] - half * dir[0],
            center[1] - half * dir[1],
            center[2] - half * dir[2],
        ];
        Self {
            origin,
            direction: dir,
            spacing_m,
            n_elements,
        }
    }

    pub fn element_position(&self, v: usize) -> Vec3 {
        let offset = v as f64 * self.spacing_m;
        [
            self.origin[0] + offset * self.direction[0],
            self.origin[1] + offset * self.direction[1],
            self.origin[2] + offset * self.direction[2],
        ]
    }

    pub fn center(&self) -> Vec3 {
        let offset = (self.n_elements.saturating_sub(1)) as f64 * self.spacing_m / 2.0;
        [
            self.origin[0] + offset * self.direction[0],
            self.origin[1] + offset * self.direction[1],
            self.origin[2] + offset * self.direction[2],
        ]
    }

    pub fn length_m(&self) -> f64 {
        (self.n_elements.saturating_sub(1)) as f64 * self.spacing_m
    }
}

pub(crate) fn normalize(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Expands a schedule into one control point per active entry, ordered by
/// slot and then chain.
pub fn trajectory_from_schedule(
    sched: &Schedule,
    cfg: &FabricConfig,
    plan: &SubbandPlan,
    geometry: &FabricGeometry,
) -> Result<Trajectory> {
    let mut entries = sched.entries.clone();
    entries.sort_by_key(|e| (e.slot, e.chain_id, e.module_id, e.step));
    let points = entries
        .iter()
        .map(|e| {
            let element = map_state_to_element(e.chain_id, e.module_id, e.step, cfg, plan, geometry)
                .map_err(|_| Error::UnknownModule {
                    chain: e.chain_id,
                    module: e.module_id,
                    step: e.step,
                })?;
            Ok(ControlPoint {
                f: FrequencyState {
                    index: element.index,
                    center_hz: element.carrier_hz,
                    chirp_bandwidth_hz: cfg.chirp_bandwidth_hz,
                },
                q: ApertureState {
                    chain_id: e.chain_id,
                    module_id: e.module_id,
                    element_position: element.position,
                },
                s: WaveformState {
                    chirp_duration_s: cfg.chirp_duration_s,
                    pol_tx: e.pol_tx,
                    slot_index: e.slot,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(points)
}
