//! Dual-polarization acquisition and per-location scattering-matrix
//! estimation.
//!
//! Transmit polarization is serialized (a full H frame, then a full V frame);
//! both receive polarizations are captured on every chirp. Estimates are
//! normalized by a simulated unit target at the same location, which makes
//! them exact under the forward model.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmcw::{simulate_state, ChirpConfig, NoiseConfig};
use crate::generative_space::{trajectory_from_schedule, ControlPoint, FabricGeometry, Pol, Trajectory};
use crate::imaging::{
    backproject, backproject_at, map_state_to_element, range_profile, GridSpec, Image, RangeProfile,
    VirtualElement,
};
use crate::scene::{PointScatterer, ScatteringMatrix, Scene};
use crate::scheduler::{build_schedule, validate_schedule, FabricConfig, Schedule, SubbandPlan};
use crate::Vec3;

/// Everything needed to turn a scene into range profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FabricSetup {
    pub fabric: FabricConfig,
    pub plan: SubbandPlan,
    pub geometry: FabricGeometry,
    pub sample_rate_hz: f64,
    pub c_mps: f64,
    pub pad_factor: usize,
}

impl FabricSetup {
    pub fn chirp_for(&self, center_hz: f64) -> Result<ChirpConfig> {
        ChirpConfig::new(
            center_hz,
            self.fabric.chirp_bandwidth_hz,
            self.fabric.chirp_duration_s,
            self.sample_rate_hz,
        )
    }

    pub fn schedule(&self, pol_states: &[Pol]) -> Result<Schedule> {
        let sched = build_schedule(&self.fabric, pol_states);
        validate_schedule(&sched, &self.plan, &self.fabric)?;
        Ok(sched)
    }

    pub fn trajectory(&self, pol_states: &[Pol]) -> Result<Trajectory> {
        let sched = self.schedule(pol_states)?;
        trajectory_from_schedule(&sched, &self.fabric, &self.plan, &self.geometry)
    }

    pub fn element_for(&self, u: &ControlPoint) -> Result<VirtualElement> {
        map_state_to_element(
            u.q.chain_id,
            u.q.module_id,
            u.f.index % self.fabric.p_steps,
            &self.fabric,
            &self.plan,
            &self.geometry,
        )
    }

    /// Simulates every point of a trajectory on each requested receive
    /// polarization. Output order follows the trajectory, then `rx_pols`.
    pub fn acquire(
        &self,
        traj: &Trajectory,
        scene: &Scene,
        noise: &NoiseConfig,
        rx_pols: &[Pol],
    ) -> Result<Vec<Acquired>> {
        traj.points()
            .par_iter()
            .map(|u| {
                let element = self.element_for(u)?;
                let chirp = self.chirp_for(u.f.center_hz)?;
                rx_pols
                    .iter()
                    .map(|&rx| {
                        let signal = simulate_state(u, scene, &chirp, noise, rx, self.c_mps)?;
                        let profile = range_profile(&signal, self.pad_factor);
                        Ok(Acquired {
                            point: *u,
                            element,
                            signal,
                            profile,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    }
}

/// One simulated state on one receive polarization.
#[derive(Clone, Debug)]
pub struct Acquired {
    pub point: ControlPoint,
    pub element: VirtualElement,
    pub signal: crate::fmcw::BeatSignal,
    pub profile: RangeProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub tx: Pol,
    pub rx: Pol,
}

impl Channel {
    /// HH, HV, VH, VV in scattering-matrix order (`HV`: received H, sent V).
    pub const ALL: [Channel; 4] = [
        Channel { tx: Pol::H, rx: Pol::H },
        Channel { tx: Pol::V, rx: Pol::H },
        Channel { tx: Pol::H, rx: Pol::V },
        Channel { tx: Pol::V, rx: Pol::V },
    ];

    pub fn label(&self) -> String {
        format!("{}{}", self.rx, self.tx).to_lowercase()
    }
}

#[derive(Clone, Debug)]
pub struct ChannelProfiles {
    pub channel: Channel,
    /// Sorted by element index.
    pub profiles: Vec<(VirtualElement, RangeProfile)>,
}

#[derive(Clone, Debug)]
pub struct PolFrame {
    pub channels: Vec<ChannelProfiles>,
    pub slot_span: usize,
    pub setup: FabricSetup,
    pub spreading_loss: bool,
}

impl PolFrame {
    pub fn channel(&self, channel: Channel) -> &ChannelProfiles {
        self.channels
            .iter()
            .find(|c| c.channel == channel)
            .expect("pol frame holds all four channels")
    }

    pub fn n_vir(&self) -> usize {
        self.setup.fabric.n_vir()
    }
}

pub fn dof_count(n_vir: usize) -> usize {
    4 * n_vir
}

/// Runs the dual-polarization schedule through the forward model.
pub fn acquire_pol_frame(scene: &Scene, setup: &FabricSetup, noise: &NoiseConfig) -> Result<PolFrame> {
    let sched = setup.schedule(&Pol::BOTH)?;
    let traj = trajectory_from_schedule(&sched, &setup.fabric, &setup.plan, &setup.geometry)?;
    let acquired = setup.acquire(&traj, scene, noise, &Pol::BOTH)?;
    Ok(group_channels(acquired, setup, sched.n_slots, scene.spreading_loss))
}

pub(crate) fn group_channels(
    acquired: Vec<Acquired>,
    setup: &FabricSetup,
    slot_span: usize,
    spreading_loss: bool,
) -> PolFrame {
    let mut channels: Vec<ChannelProfiles> = Channel::ALL
        .iter()
        .map(|&channel| ChannelProfiles {
            channel,
            profiles: Vec::new(),
        })
        .collect();
    for a in acquired {
        let ch = Channel {
            tx: a.point.s.pol_tx,
            rx: a.profile.pol_rx,
        };
        if let Some(slot) = channels.iter_mut().find(|c| c.channel == ch) {
            slot.profiles.push((a.element, a.profile));
        }
    }
    for c in &mut channels {
        c.profiles.sort_by_key(|(el, _)| el.index);
    }
    PolFrame {
        channels,
        slot_span,
        setup: setup.clone(),
        spreading_loss,
    }
}

/// Noiseless back-projected response of a unit co-polar target at
/// `location`.
pub fn calibration_response(setup: &FabricSetup, location: &Vec3, spreading_loss: bool) -> Result<Complex64> {
    let mut scene = Scene::new(
        "calibration",
        vec![PointScatterer {
            position: *location,
            scattering: ScatteringMatrix::identity(),
        }],
    );
    scene.spreading_loss = spreading_loss;
    let traj = setup.trajectory(&[Pol::H])?;
    let acquired = setup.acquire(&traj, &scene, &NoiseConfig::none(), &[Pol::H])?;
    let profiles: Vec<(VirtualElement, RangeProfile)> =
        acquired.into_iter().map(|a| (a.element, a.profile)).collect();
    let g = backproject_at(&profiles, &[*location], setup.c_mps)?[0];
    if !(g.norm() > 0.0) {
        return Err(Error::InvalidInput(format!("calibration response vanishes at {location:?}")));
    }
    Ok(g)
}

pub fn estimate_scattering(frame: &PolFrame, location: &Vec3) -> Result<ScatteringMatrix> {
    let g = calibration_response(&frame.setup, location, frame.spreading_loss)?;
    let mut s = ScatteringMatrix::ZERO;
    for ch in &frame.channels {
        let value = backproject_at(&ch.profiles, &[*location], frame.setup.c_mps)?[0];
        s.set_entry(ch.channel.tx, ch.channel.rx, value / g);
    }
    Ok(s)
}

/// Four co-registered image channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub grid: GridSpec,
    pub channels: Vec<(Channel, Image)>,
}

impl ImageGrid {
    pub fn channel(&self, channel: Channel) -> Option<&Image> {
        self.channels.iter().find(|(c, _)| *c == channel).map(|(_, i)| i)
    }

    /// Total power over all channels per pixel.
    pub fn power(&self) -> Vec<f64> {
        let n = self.channels.first().map_or(0, |(_, i)| i.values.len());
        (0..n)
            .map(|p| self.channels.iter().map(|(_, img)| img.values[p].norm_sqr()).sum())
            .collect()
    }

    /// CSV with columns `x,z,hh,hv,vh,vv` holding channel magnitudes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,z");
        for (c, _) in &self.channels {
            out.push(',');
            out.push_str(&c.label());
        }
        out.push('\n');
        let nx = self.grid.nx();
        for iz in 0..self.grid.nz() {
            for ix in 0..nx {
                out.push_str(&format!("{:.6},{:.6}", self.grid.x(ix), self.grid.z(iz)));
                for (_, img) in &self.channels {
                    out.push_str(&format!(",{:.9e}", img.values[iz * nx + ix].norm()));
                }
                out.push('\n');
            }
        }
        out
    }
}

pub fn image_channels(frame: &PolFrame, grid: &GridSpec) -> Result<ImageGrid> {
    let channels = frame
        .channels
        .iter()
        .map(|ch| Ok((ch.channel, backproject(&ch.profiles, grid, frame.setup.c_mps)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageGrid { grid: *grid, channels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterEstimate {
    pub location: Vec3,
    pub estimate: ScatteringMatrix,
    pub truth: Option<ScatteringMatrix>,
    /// `‖Ŝ − S‖_F / ‖S‖_F` when truth is known.
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldModelFrame {
    pub elements: usize,
    pub dof: usize,
    pub timestamp_slots: usize,
    pub estimates: Vec<ScatterEstimate>,
}

/// Estimates `S` at each truth scatterer location.
pub fn world_model(frame: &PolFrame, truth: &[PointScatterer]) -> Result<WorldModelFrame> {
    let estimates = truth
        .iter()
        .map(|t| {
            let estimate = estimate_scattering(frame, &t.position)?;
            let rel = estimate.sub(&t.scattering).frobenius_norm() / t.scattering.frobenius_norm();
            Ok(ScatterEstimate {
                location: t.position,
                estimate,
                truth: Some(t.scattering),
                relative_error: Some(rel),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WorldModelFrame {
        elements: frame.n_vir(),
        dof: dof_count(frame.n_vir()),
        timestamp_slots: frame.slot_span,
        estimates,
    })
}
