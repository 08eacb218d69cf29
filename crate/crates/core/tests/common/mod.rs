//! Independent oracles shared by the integration and acceptance suites.
//!
//! Nothing here calls the validator, the range-profile transform or the
//! back-projector; each oracle recomputes its answer from first principles.

#![allow(dead_code)]

use std::f64::consts::PI;

use genspace::fmcw::{BeatSignal, ChirpConfig, NoiseConfig};
use genspace::generative_space::{FabricGeometry, Pol};
use genspace::polarimetry::FabricSetup;
use genspace::scene::{PointScatterer, ScatteringMatrix, Scene};
use genspace::scheduler::{partition_band, FabricConfig, Schedule, ScheduleEntry};
use genspace::{Complex64, Vec3};

pub fn fabric(k: usize, m: usize, p: usize) -> FabricConfig {
    let band = 21e9;
    FabricConfig {
        k_chains: k,
        m_modules: m,
        p_steps: p,
        band_lo_hz: 60e9,
        band_hi_hz: 60e9 + band,
        chirp_bandwidth_hz: 0.9 * band / (k * m * p) as f64,
        chirp_duration_s: 100e-6,
    }
}

/// Case-study fabric: 2 chains, 4 modules, 8 steps over 60-81 GHz.
pub fn case_fabric() -> FabricConfig {
    FabricConfig {
        k_chains: 2,
        m_modules: 4,
        p_steps: 8,
        band_lo_hz: 60e9,
        band_hi_hz: 81e9,
        chirp_bandwidth_hz: 300e6,
        chirp_duration_s: 51.2e-6,
    }
}

pub fn case_setup(c_mps: f64) -> FabricSetup {
    let fabric = case_fabric();
    let d = c_mps / 70.5e9 / 2.0;
    FabricSetup {
        plan: partition_band(&fabric).unwrap(),
        geometry: FabricGeometry::centered([0.0; 3], [1.0, 0.0, 0.0], d, 64),
        fabric,
        sample_rate_hz: 5e6,
        c_mps,
        pad_factor: 4,
    }
}

pub fn unit_scene(position: Vec3) -> Scene {
    Scene::new(
        "unit",
        vec![PointScatterer {
            position,
            scattering: ScatteringMatrix::identity(),
        }],
    )
}

/// Chirp band of (chain, module, step) from plain band arithmetic.
pub fn oracle_band(cfg: &FabricConfig, chain: usize, module: usize, step: usize) -> (f64, f64) {
    let sub = (cfg.band_hi_hz - cfg.band_lo_hz) / (cfg.k_chains * cfg.m_modules) as f64;
    let slice = sub / cfg.p_steps as f64;
    let center = cfg.band_lo_hz + (chain * cfg.m_modules + module) as f64 * sub + (step as f64 + 0.5) * slice;
    (center - cfg.chirp_bandwidth_hz / 2.0, center + cfg.chirp_bandwidth_hz / 2.0)
}

/// Validity of a single-polarization schedule, checked directly.
pub fn oracle_valid_single_pol(cfg: &FabricConfig, sched: &Schedule) -> bool {
    let frame = cfg.m_modules * cfg.p_steps;
    if sched.n_slots == 0 || !sched.n_slots.is_multiple_of(frame) {
        return false;
    }
    for slot in 0..sched.n_slots {
        let active: Vec<&ScheduleEntry> = sched.entries.iter().filter(|e| e.slot == slot).collect();
        for chain in 0..cfg.k_chains {
            if active.iter().filter(|e| e.chain_id == chain).count() != 1 {
                return false;
            }
        }
        for (i, a) in active.iter().enumerate() {
            let ba = oracle_band(cfg, a.chain_id, a.module_id, a.step);
            for b in &active[i + 1..] {
                let bb = oracle_band(cfg, b.chain_id, b.module_id, b.step);
                if ba.0 < bb.1 && bb.0 < ba.1 {
                    return false;
                }
            }
        }
    }
    for f in 0..sched.n_slots / frame {
        for chain in 0..cfg.k_chains {
            for module in 0..cfg.m_modules {
                for step in 0..cfg.p_steps {
                    let n = sched
                        .entries
                        .iter()
                        .filter(|e| {
                            e.slot / frame == f && e.chain_id == chain && e.module_id == module && e.step == step
                        })
                        .count();
                    if n != 1 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Every single-pol schedule of `n_slots` slots with one activation per chain
/// per slot: `(M·P)^(K·n_slots)` candidates.
pub fn enumerate_schedules(cfg: &FabricConfig, n_slots: usize) -> Vec<Schedule> {
    let options = cfg.m_modules * cfg.p_steps;
    let positions = cfg.k_chains * n_slots;
    let total = options.pow(positions as u32);
    (0..total)
        .map(|mut code| {
            let mut entries = Vec::with_capacity(positions);
            for slot in 0..n_slots {
                for chain in 0..cfg.k_chains {
                    let pick = code % options;
                    code /= options;
                    entries.push(ScheduleEntry {
                        slot,
                        chain_id: chain,
                        module_id: pick / cfg.p_steps,
                        step: pick % cfg.p_steps,
                        pol_tx: Pol::H,
                    });
                }
            }
            Schedule { entries, n_slots }
        })
        .collect()
}

/// Frequency of the strongest component, scanning a dense grid with a
/// direct (unwindowed) DFT sum.
pub fn dft_peak_hz(samples: &[Complex64], fs: f64, f_lo: f64, f_hi: f64, step: f64) -> f64 {
    let mut best = (f_lo, -1.0);
    let n_steps = ((f_hi - f_lo) / step).ceil() as usize;
    for i in 0..=n_steps {
        let f = f_lo + i as f64 * step;
        let acc: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(n, z)| z * Complex64::from_polar(1.0, -2.0 * PI * f * n as f64 / fs))
            .sum();
        if acc.norm() > best.1 {
            best = (f, acc.norm());
        }
    }
    best.0
}

/// Noiseless dechirped samples of a unit target at `target` seen from
/// `element` with carrier `f_c`, written out independently of the engine.
pub fn model_samples(chirp: &ChirpConfig, element: &Vec3, target: &Vec3, c: f64) -> Vec<Complex64> {
    let r = ((target[0] - element[0]).powi(2) + (target[1] - element[1]).powi(2) + (target[2] - element[2]).powi(2))
        .sqrt();
    let slope = chirp.bandwidth_hz / chirp.duration_s;
    let fb = 2.0 * r * slope / c;
    let mid = (chirp.n_samples as f64 - 1.0) / 2.0;
    (0..chirp.n_samples)
        .map(|n| {
            let t = (n as f64 - mid) / chirp.sample_rate_hz;
            Complex64::from_polar(1.0, 2.0 * PI * fb * t - 4.0 * PI * chirp.center_hz * r / c)
        })
        .collect()
}

/// Matched-filter response over raw beat samples for a unit target at `p`.
pub fn matched_filter(signals: &[(Vec3, BeatSignal)], p: &Vec3) -> f64 {
    signals
        .iter()
        .map(|(pos, sig)| {
            let model = model_samples(&sig.chirp, pos, p, sig.c_mps);
            sig.samples.iter().zip(&model).map(|(s, m)| s * m.conj()).sum::<Complex64>()
        })
        .sum::<Complex64>()
        .norm()
}

/// Peak of the matched filter over a rectangular grid in the y=0 plane.
pub fn matched_filter_peak(signals: &[(Vec3, BeatSignal)], xs: &[f64], zs: &[f64]) -> Vec3 {
    let mut best = ([0.0; 3], -1.0);
    for &z in zs {
        for &x in xs {
            let p = [x, 0.0, z];
            let v = matched_filter(signals, &p);
            if v > best.1 {
                best = (p, v);
            }
        }
    }
    best.0
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn noiseless() -> NoiseConfig {
    NoiseConfig::none()
}

/// Prints a single acceptance verdict line.
pub fn verdict(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
