//! Frequency–time activation plan for a multi-trunk clip-on-module fabric.
//!
//! Each of the `K` chains drives one trunk carrying `M` modules. The system
//! band is split into `K·M` equal, contiguous subbands (chain-major,
//! module-minor, ascending). Inside each subband a module has `P` probing
//! states whose chirp bands sit centered in `P` equal sub-slices.
//!
//! In every slot each chain radiates exactly one chirp. Because concurrent
//! chains always sit in different subbands, their beat signals never share
//! spectrum. The validator, not the builder, is the contract: any schedule
//! that satisfies its conditions is accepted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generative_space::Pol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FabricConfig {
    pub k_chains: usize,
    pub m_modules: usize,
    pub p_steps: usize,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub chirp_bandwidth_hz: f64,
    pub chirp_duration_s: f64,
}

impl FabricConfig {
    pub fn n_vir(&self) -> usize {
        self.k_chains * self.m_modules * self.p_steps
    }

    pub fn frame_len(&self) -> usize {
        self.m_modules * self.p_steps
    }

    pub fn band_width_hz(&self) -> f64 {
        self.band_hi_hz - self.band_lo_hz
    }

    pub fn band_center_hz(&self) -> f64 {
        (self.band_lo_hz + self.band_hi_hz) / 2.0
    }

    pub fn subband_width_hz(&self) -> f64 {
        self.band_width_hz() / (self.k_chains * self.m_modules) as f64
    }

    pub fn step_width_hz(&self) -> f64 {
        self.subband_width_hz() / self.p_steps as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubbandPlan {
    pub k_chains: usize,
    pub m_modules: usize,
    pub p_steps: usize,
    pub chirp_bandwidth_hz: f64,
    /// `[lo, hi]` per (chain, module), chain-major.
    pub subbands: Vec<[f64; 2]>,
    /// Center per (chain, module, step), indexed like the virtual elements.
    pub centers: Vec<f64>,
}

impl SubbandPlan {
    pub fn subband(&self, chain: usize, module: usize) -> [f64; 2] {
        self.subbands[chain * self.m_modules + module]
    }

    pub fn center(&self, chain: usize, module: usize, step: usize) -> f64 {
        self.centers[(chain * self.m_modules + module) * self.p_steps + step]
    }

    pub fn chirp_band(&self, chain: usize, module: usize, step: usize) -> [f64; 2] {
        let c = self.center(chain, module, step);
        [c - self.chirp_bandwidth_hz / 2.0, c + self.chirp_bandwidth_hz / 2.0]
    }

    pub fn contains(&self, chain: usize, module: usize, step: usize) -> bool {
        chain < self.k_chains && module < self.m_modules && step < self.p_steps
    }
}

pub fn partition_band(cfg: &FabricConfig) -> Result<SubbandPlan> {
    if cfg.k_chains == 0 || cfg.m_modules == 0 || cfg.p_steps == 0 {
        return Err(Error::InvalidFabric("K, M and P must all be at least 1".into()));
    }
    if !(cfg.band_hi_hz > cfg.band_lo_hz) || !(cfg.band_lo_hz > 0.0) {
        return Err(Error::InvalidFabric(format!(
            "band [{}, {}] Hz is empty or non-positive",
            cfg.band_lo_hz, cfg.band_hi_hz
        )));
    }
    if !(cfg.chirp_bandwidth_hz > 0.0) {
        return Err(Error::InvalidFabric("chirp bandwidth must be positive".into()));
    }
    let width = cfg.subband_width_hz();
    let step = cfg.step_width_hz();
    if cfg.chirp_bandwidth_hz > step {
        return Err(Error::ChirpDoesNotFit {
            chirp_hz: cfg.chirp_bandwidth_hz,
            step_hz: step,
        });
    }

    let n_sub = cfg.k_chains * cfg.m_modules;
    let mut subbands = Vec::with_capacity(n_sub);
    let mut centers = Vec::with_capacity(cfg.n_vir());
    for j in 0..n_sub {
        let lo = cfg.band_lo_hz + j as f64 * width;
        // last edge pinned so the subbands tile the band exactly
        let hi = if j + 1 == n_sub {
            cfg.band_hi_hz
        } else {
            cfg.band_lo_hz + (j + 1) as f64 * width
        };
        subbands.push([lo, hi]);
        for p in 0..cfg.p_steps {
            centers.push(lo + (p as f64 + 0.5) * step);
        }
    }
    Ok(SubbandPlan {
        k_chains: cfg.k_chains,
        m_modules: cfg.m_modules,
        p_steps: cfg.p_steps,
        chirp_bandwidth_hz: cfg.chirp_bandwidth_hz,
        subbands,
        centers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub slot: usize,
    pub chain_id: usize,
    pub module_id: usize,
    pub step: usize,
    pub pol_tx: Pol,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub n_slots: usize,
}

impl Schedule {
    pub fn entries_in_slot(&self, slot: usize) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(move |e| e.slot == slot)
    }

    /// Entry multiset grouped by slot.
    pub fn by_slot(&self) -> BTreeMap<usize, Vec<ScheduleEntry>> {
        let mut map: BTreeMap<usize, Vec<ScheduleEntry>> = BTreeMap::new();
        for e in &self.entries {
            map.entry(e.slot).or_default().push(*e);
        }
        for v in map.values_mut() {
            v.sort();
        }
        map
    }

    /// CSV with columns `slot,chain,module,step,center_hz,chirp_bw_hz,pol_tx`.
    pub fn to_csv(&self, plan: &SubbandPlan) -> String {
        let mut out = String::from("slot,chain,module,step,center_hz,chirp_bw_hz,pol_tx\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.slot,
                e.chain_id,
                e.module_id,
                e.step,
                plan.center(e.chain_id, e.module_id, e.step),
                plan.chirp_bandwidth_hz,
                e.pol_tx
            ));
        }
        out
    }
}

/// Round-robin construction: modules in the outer loop, steps in the inner
/// loop, all chains concurrent, one full frame per transmit polarization.
pub fn build_schedule(cfg: &FabricConfig, pol_states: &[Pol]) -> Schedule {
    let frame_len = cfg.frame_len();
    let mut entries = Vec::with_capacity(frame_len * cfg.k_chains * pol_states.len());
    for (frame, &pol_tx) in pol_states.iter().enumerate() {
        for module_id in 0..cfg.m_modules {
            for step in 0..cfg.p_steps {
                let slot = frame * frame_len + module_id * cfg.p_steps + step;
                for chain_id in 0..cfg.k_chains {
                    entries.push(ScheduleEntry {
                        slot,
                        chain_id,
                        module_id,
                        step,
                        pol_tx,
                    });
                }
            }
        }
    }
    Schedule {
        entries,
        n_slots: frame_len * pol_states.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    IndexOutOfRange { entry: usize },
    SlotOutOfRange { entry: usize, slot: usize, n_slots: usize },
    SpectralCollision { slot: usize, first: usize, second: usize },
    FrameLength { n_slots: usize, frame_len: usize },
    MixedPolarization { frame: usize, entry: usize },
    RepeatedPolarization { frame: usize, pol: Pol },
    IncompleteFrameCoverage { frame: usize, chain: usize, module: usize, step: usize, count: usize },
    SlotActivation { slot: usize, chain: usize, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexOutOfRange { entry } => {
                write!(f, "entry {entry}: chain/module/step index out of range")
            }
            Violation::SlotOutOfRange { entry, slot, n_slots } => {
                write!(f, "entry {entry}: slot {slot} outside schedule of {n_slots} slots")
            }
            Violation::SpectralCollision { slot, first, second } => write!(
                f,
                "spectral collision in slot {slot}: entries {first} and {second} overlap"
            ),
            Violation::FrameLength { n_slots, frame_len } => write!(
                f,
                "frame length: {n_slots} slots is not a positive multiple of M*P = {frame_len}"
            ),
            Violation::MixedPolarization { frame, entry } => {
                write!(f, "mixed polarization in frame {frame} at entry {entry}")
            }
            Violation::RepeatedPolarization { frame, pol } => {
                write!(f, "frame {frame} repeats transmit polarization {pol}")
            }
            Violation::IncompleteFrameCoverage {
                frame,
                chain,
                module,
                step,
                count,
            } => write!(
                f,
                "incomplete frame coverage: frame {frame} has (chain {chain}, module {module}, step {step}) {count} times"
            ),
            Violation::SlotActivation { slot, chain, count } => write!(
                f,
                "slot {slot}: chain {chain} activated {count} times, expected exactly 1"
            ),
        }
    }
}

impl std::error::Error for Violation {}

fn overlaps(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] < b[1] && b[0] < a[1]
}

/// Checks, in order: index ranges, spectral disjointness of concurrent
/// entries, frame length, per-frame polarization, frame coverage and the
/// one-chirp-per-chain-per-slot discipline. Returns the first violation.
pub fn validate_schedule(sched: &Schedule, plan: &SubbandPlan, cfg: &FabricConfig) -> Result<(), Violation> {
    for (i, e) in sched.entries.iter().enumerate() {
        if e.chain_id >= cfg.k_chains
            || e.module_id >= cfg.m_modules
            || e.step >= cfg.p_steps
            || !plan.contains(e.chain_id, e.module_id, e.step)
        {
            return Err(Violation::IndexOutOfRange { entry: i });
        }
        if e.slot >= sched.n_slots {
            return Err(Violation::SlotOutOfRange {
                entry: i,
                slot: e.slot,
                n_slots: sched.n_slots,
            });
        }
    }

    // (e) spectral disjointness
    let mut per_slot: Vec<Vec<usize>> = vec![Vec::new(); sched.n_slots];
    for (i, e) in sched.entries.iter().enumerate() {
        per_slot[e.slot].push(i);
    }
    for (slot, idx) in per_slot.iter().enumerate() {
        for (a_pos, &a) in idx.iter().enumerate() {
            let ea = &sched.entries[a];
            let band_a = plan.chirp_band(ea.chain_id, ea.module_id, ea.step);
            for &b in &idx[a_pos + 1..] {
                let eb = &sched.entries[b];
                if overlaps(band_a, plan.chirp_band(eb.chain_id, eb.module_id, eb.step)) {
                    return Err(Violation::SpectralCollision {
                        slot,
                        first: a,
                        second: b,
                    });
                }
            }
        }
    }

    // (c) frame length
    let frame_len = cfg.frame_len();
    if sched.n_slots == 0 || !sched.n_slots.is_multiple_of(frame_len) {
        return Err(Violation::FrameLength {
            n_slots: sched.n_slots,
            frame_len,
        });
    }
    let n_frames = sched.n_slots / frame_len;

    // (d) one transmit polarization per frame, each used once
    let mut frame_pol: Vec<Option<Pol>> = vec![None; n_frames];
    for (i, e) in sched.entries.iter().enumerate() {
        let frame = e.slot / frame_len;
        match frame_pol[frame] {
            None => frame_pol[frame] = Some(e.pol_tx),
            Some(p) if p != e.pol_tx => return Err(Violation::MixedPolarization { frame, entry: i }),
            _ => {}
        }
    }
    let mut seen = BTreeSet::new();
    for (frame, pol) in frame_pol.iter().enumerate() {
        if let Some(pol) = pol {
            if !seen.insert(*pol) {
                return Err(Violation::RepeatedPolarization { frame, pol: *pol });
            }
        }
    }

    // (b) every (chain, module, step) exactly once per frame
    let n_vir = cfg.n_vir();
    let mut counts = vec![0usize; n_frames * n_vir];
    for e in &sched.entries {
        let v = (e.chain_id * cfg.m_modules + e.module_id) * cfg.p_steps + e.step;
        counts[(e.slot / frame_len) * n_vir + v] += 1;
    }
    for (i, &count) in counts.iter().enumerate() {
        if count != 1 {
            let (frame, v) = (i / n_vir, i % n_vir);
            return Err(Violation::IncompleteFrameCoverage {
                frame,
                chain: v / (cfg.m_modules * cfg.p_steps),
                module: (v / cfg.p_steps) % cfg.m_modules,
                step: v % cfg.p_steps,
                count,
            });
        }
    }

    // (a) each chain exactly once per slot
    let mut activations = vec![0usize; sched.n_slots * cfg.k_chains];
    for e in &sched.entries {
        activations[e.slot * cfg.k_chains + e.chain_id] += 1;
    }
    for (i, &count) in activations.iter().enumerate() {
        if count != 1 {
            return Err(Violation::SlotActivation {
                slot: i / cfg.k_chains,
                chain: i % cfg.k_chains,
                count,
            });
        }
    }
    Ok(())
}

pub fn frame_duration(sched: &Schedule, cfg: &FabricConfig) -> f64 {
    sched.n_slots as f64 * cfg.chirp_duration_s
}
