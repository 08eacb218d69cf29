//! Subcommand orchestration and report emission.
//!
//! Each run writes into a staging directory that is renamed into place only
//! after every file has been written; on failure the staging directory is
//! removed. File contents never embed wall-clock time, so identical configs
//! give byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::arch::{case_study_specs, compare, ArchSpec, ComparisonTable};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::fmcw::range_resolution;
use crate::generative_space::Pol;
use crate::imaging::{backproject_at, RangeProfile, VirtualElement};
use crate::polarimetry::{
    group_channels, image_channels, world_model, Channel, ImageGrid, PolFrame, ScatterEstimate,
};
use crate::scene::{ground_truth_report, GroundTruthRow};
use crate::scheduler::{frame_duration, validate_schedule};
use crate::{distance, Vec3};

/// Accumulates output files in memory before they are committed.
#[derive(Debug, Default)]
pub struct RunOutput {
    files: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    /// Writes all files under `<out>/<run_name>` atomically.
    pub fn commit(&self, out: &Path, run_name: &str) -> Result<PathBuf> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let staging = out.join(format!(".staging-{run_name}"));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        let result = self.write_all(&staging).and_then(|_| {
            let mut target = out.join(run_name);
            let mut n = 1;
            while target.exists() {
                target = out.join(format!("{run_name}-{n}"));
                n += 1;
            }
            fs::rename(&staging, &target).map_err(|e| Error::io(&target, e))?;
            Ok(target)
        });
        if result.is_err() {
            let _ = fs::remove_dir_all(&staging);
        }
        result
    }

    fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub fn run_name(command: &str, hash: &str) -> String {
    let millis = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    format!("{command}-{}-{millis}", &hash[..16.min(hash.len())])
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleSummary {
    pub n_slots: usize,
    pub n_entries: usize,
    pub frame_duration_s: f64,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Localization {
    pub truth: Vec3,
    pub peak: Vec3,
    pub dx_m: f64,
    pub dz_m: f64,
    pub range_cell_m: f64,
    pub cross_range_cell_m: f64,
    pub within_cell: bool,
    /// Peak magnitude over `N_vir` times the mean single-element response.
    pub coherent_gain_ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counters {
    pub states_simulated: usize,
    pub range_profiles: usize,
    pub pixels_per_channel: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_hash: String,
    pub schedule: Option<ScheduleSummary>,
    pub localization: Vec<Localization>,
    pub s_estimates: Vec<ScatterEstimate>,
    pub counters: Counters,
    pub outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    files: Vec<String>,
}

fn finish(mut out: RunOutput, mut report: RunReport) -> Result<RunOutput> {
    let mut names = out.names();
    names.push("report.json".into());
    names.push("manifest.json".into());
    report.outputs = names.clone();
    out.add_json("report.json", &report)?;
    out.add_json(
        "manifest.json",
        &Manifest {
            command: &report.command,
            config_hash: &report.config_hash,
            files: names,
        },
    )?;
    Ok(out)
}

fn schedule_summary(cfg: &ScenarioConfig) -> Result<(crate::scheduler::Schedule, ScheduleSummary)> {
    let setup = cfg.setup();
    let sched = crate::scheduler::build_schedule(&cfg.fabric, &Pol::BOTH);
    let verdict = validate_schedule(&sched, &setup.plan, &cfg.fabric);
    let summary = ScheduleSummary {
        n_slots: sched.n_slots,
        n_entries: sched.entries.len(),
        frame_duration_s: frame_duration(&sched, &cfg.fabric),
        verdict: match &verdict {
            Ok(()) => "OK".to_string(),
            Err(v) => v.to_string(),
        },
    };
    verdict?;
    Ok((sched, summary))
}

/// Specs for `compare`: the case-study trio, or 64-element-equivalent
/// variants sized from a scenario's fabric.
pub fn compare_specs(cfg: Option<&ScenarioConfig>) -> Vec<ArchSpec> {
    let Some(cfg) = cfg else {
        return case_study_specs();
    };
    let f = &cfg.fabric;
    let n = f.n_vir() as u32;
    let n_tx = (1..=n).filter(|d| n.is_multiple_of(*d) && d * d <= n).max().unwrap_or(1);
    vec![
        ArchSpec::phased_array(n, 2),
        ArchSpec::tdm_mimo(n_tx, n / n_tx, 2),
        ArchSpec::mrc_faa_caf(f.k_chains as u32, f.m_modules as u32, f.p_steps as u32, 2),
    ]
}

pub fn compare_outputs(specs: &[ArchSpec]) -> Result<(ComparisonTable, RunOutput)> {
    let table = compare(specs);
    let mut out = RunOutput::default();
    out.add("table.csv", table.to_csv());
    out.add("table.txt", table.render_text());
    out.add_json("table.json", &table)?;
    let hash = hex::encode(Sha256::digest(serde_json::to_string(specs)?.as_bytes()));
    let report = RunReport {
        command: "compare".into(),
        config_hash: hash,
        schedule: None,
        localization: Vec::new(),
        s_estimates: Vec::new(),
        counters: Counters::default(),
        outputs: Vec::new(),
    };
    Ok((table, finish(out, report)?))
}

pub fn schedule_outputs(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (sched, summary) = schedule_summary(cfg)?;
    let setup = cfg.setup();
    let mut out = RunOutput::default();
    out.add("schedule.csv", sched.to_csv(&setup.plan));
    out.add_json("schedule.json", &sched)?;
    out.add_json("subband_plan.json", &setup.plan)?;
    let report = RunReport {
        command: "schedule".into(),
        config_hash: cfg.hash(),
        schedule: Some(summary),
        localization: Vec::new(),
        s_estimates: Vec::new(),
        counters: Counters::default(),
        outputs: Vec::new(),
    };
    finish(out, report)
}

fn acquire(cfg: &ScenarioConfig) -> Result<(Vec<crate::polarimetry::Acquired>, ScheduleSummary)> {
    let (sched, summary) = schedule_summary(cfg)?;
    let setup = cfg.setup();
    let traj = crate::generative_space::trajectory_from_schedule(&sched, &cfg.fabric, &setup.plan, &setup.geometry)?;
    let acquired = setup.acquire(&traj, &cfg.scene, &cfg.noise, &Pol::BOTH)?;
    Ok((acquired, summary))
}

/// Largest range the imaging grid needs, used to trim profile dumps.
fn grid_max_range(cfg: &ScenarioConfig) -> f64 {
    let g = &cfg.grid;
    let corners = [
        [g.x_min, g.y_plane, g.z_min],
        [g.x_min, g.y_plane, g.z_max],
        [g.x_max, g.y_plane, g.z_min],
        [g.x_max, g.y_plane, g.z_max],
    ];
    (0..cfg.geometry.n_elements)
        .flat_map(|v| corners.iter().map(move |p| distance(p, &cfg.geometry.element_position(v))))
        .fold(0.0, f64::max)
}

pub fn simulate_outputs(cfg: &ScenarioConfig, debug_signals: bool) -> Result<RunOutput> {
    let (acquired, summary) = acquire(cfg)?;
    let mut out = RunOutput::default();
    out.add("schedule.csv", {
        let setup = cfg.setup();
        crate::scheduler::build_schedule(&cfg.fabric, &Pol::BOTH).to_csv(&setup.plan)
    });

    // bins up to the imaging extent plus a few native resolution cells
    let limit = acquired
        .first()
        .map(|a| grid_max_range(cfg) + 4.0 * a.profile.resolution_m)
        .unwrap_or(0.0);
    let mut csv = String::from("slot,chain,module,step,element,pol_tx,pol_rx,bin,range_m,re,im\n");
    for a in &acquired {
        let p = &a.profile;
        for (k, z) in p.values.iter().enumerate() {
            let r = p.range_of_bin(k);
            if r > limit {
                break;
            }
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.6},{:e},{:e}\n",
                a.point.s.slot_index,
                a.point.q.chain_id,
                a.point.q.module_id,
                a.element.step,
                a.element.index,
                a.point.s.pol_tx,
                p.pol_rx,
                k,
                r,
                z.re,
                z.im
            ));
        }
        if debug_signals {
            out.add(
                format!(
                    "signals/slot{:03}_chain{}_rx{}.csv",
                    a.point.s.slot_index, a.point.q.chain_id, p.pol_rx
                ),
                a.signal.to_csv(),
            );
        }
    }
    out.add("range_profiles.csv", csv);
    let report = RunReport {
        command: "simulate".into(),
        config_hash: cfg.hash(),
        schedule: Some(summary),
        localization: Vec::new(),
        s_estimates: Vec::new(),
        counters: Counters {
            states_simulated: acquired.len() / 2,
            range_profiles: acquired.len(),
            pixels_per_channel: 0,
        },
        outputs: Vec::new(),
    };
    finish(out, report)
}

/// Mean magnitude of single-element back-projections at `p`.
pub fn single_element_response(profiles: &[(VirtualElement, RangeProfile)], p: &Vec3, c_mps: f64) -> Result<f64> {
    let mut sum = 0.0;
    for pair in profiles {
        sum += backproject_at(std::slice::from_ref(pair), &[*p], c_mps)?[0].norm();
    }
    Ok(sum / profiles.len() as f64)
}

/// Localizes each truth scatterer on the combined-power image, searching a
/// window of four resolution cells in each direction.
pub fn localize(
    image: &ImageGrid,
    frame: &PolFrame,
    truth: &[GroundTruthRow],
    cfg: &ScenarioConfig,
) -> Result<Vec<Localization>> {
    let power = image.power();
    let grid = &image.grid;
    let nx = grid.nx();
    let range_cell = range_resolution(cfg.fabric.band_width_hz(), cfg.c_mps);
    let lambda = cfg.c_mps / cfg.fabric.band_center_hz();
    let length = cfg.geometry.length_m();
    truth
        .iter()
        .map(|t| {
            let cross_cell = lambda * t.range_m / (2.0 * length);
            let mut best: Option<(usize, f64)> = None;
            for (i, &pw) in power.iter().enumerate() {
                let p = grid.point(i % nx, i / nx);
                if (p[0] - t.position[0]).abs() > 4.0 * cross_cell || (p[2] - t.position[2]).abs() > 4.0 * range_cell {
                    continue;
                }
                if best.is_none_or(|(_, b)| pw > b) {
                    best = Some((i, pw));
                }
            }
            let (i, _) = best.ok_or_else(|| {
                Error::InvalidInput(format!("scatterer at {:?} lies outside the image grid", t.position))
            })?;
            let peak = grid.point(i % nx, i / nx);
            let dx = peak[0] - t.position[0];
            let dz = peak[2] - t.position[2];

            // strongest truth channel drives the coherent-gain check
            let (channel, entry) = Channel::ALL
                .iter()
                .map(|c| (*c, t.scattering.entry(c.tx, c.rx).norm()))
                .fold((Channel::ALL[0], -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let gain = if entry > 0.0 {
                let profiles = &frame.channel(channel).profiles;
                let single = single_element_response(profiles, &t.position, cfg.c_mps)?;
                let img = image.channel(channel).expect("four channels");
                Some(img.values[i].norm() / (profiles.len() as f64 * single))
            } else {
                None
            };
            Ok(Localization {
                truth: t.position,
                peak,
                dx_m: dx,
                dz_m: dz,
                range_cell_m: range_cell,
                cross_range_cell_m: cross_cell,
                within_cell: dz.abs() <= range_cell && dx.abs() <= cross_cell,
                coherent_gain_ratio: gain,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ImageMeta<'a> {
    config_hash: String,
    grid: &'a crate::imaging::GridSpec,
    nx: usize,
    nz: usize,
    channels: Vec<String>,
}

pub fn reconstruct_outputs(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (acquired, summary) = acquire(cfg)?;
    let setup = cfg.setup();
    let n_profiles = acquired.len();
    let frame = group_channels(acquired, &setup, summary.n_slots, cfg.scene.spreading_loss);
    let image = image_channels(&frame, &cfg.grid)?;
    let truth = ground_truth_report(&cfg.scene, &cfg.geometry);
    let localization = localize(&image, &frame, &truth, cfg)?;
    let wm = world_model(&frame, &cfg.scene.scatterers)?;

    let mut out = RunOutput::default();
    out.add("image.csv", image.to_csv());
    out.add_json(
        "image_meta.json",
        &ImageMeta {
            config_hash: cfg.hash(),
            grid: &cfg.grid,
            nx: cfg.grid.nx(),
            nz: cfg.grid.nz(),
            channels: image.channels.iter().map(|(c, _)| c.label()).collect(),
        },
    )?;
    out.add_json("world_model.json", &wm)?;
    out.add_json("ground_truth.json", &truth)?;
    let report = RunReport {
        command: "reconstruct".into(),
        config_hash: cfg.hash(),
        schedule: Some(summary),
        localization,
        s_estimates: wm.estimates.clone(),
        counters: Counters {
            states_simulated: n_profiles / 2,
            range_profiles: n_profiles,
            pixels_per_channel: cfg.grid.nx() * cfg.grid.nz(),
        },
        outputs: Vec::new(),
    };
    finish(out, report)
}

/// Runs `f`, commits its outputs under `out`, and logs wall time to stderr.
pub fn execute(command: &str, hash: &str, out: &Path, f: impl FnOnce() -> Result<RunOutput>) -> Result<PathBuf> {
    let start = Instant::now();
    let output = f()?;
    let dir = output.commit(out, &run_name(command, hash))?;
    eprintln!("{command}: {:.3} s", start.elapsed().as_secs_f64());
    Ok(dir)
}
