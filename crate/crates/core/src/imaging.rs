//! Fast-time range profiling and slow-time aperture synthesis.
//!
//! Every scheduled (chain, module, step) maps to one virtual element with its
//! own position and carrier. Range profiles are windowed, zero-padded spectra
//! of the dechirped samples, referenced to the chirp midpoint so that a
//! single tone produces a real-valued envelope times the carrier phase.
//! Back-projection then rotates each element's carrier phase out at the
//! candidate pixel range, which fuses the disjoint subbands coherently.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmcw::BeatSignal;
use crate::generative_space::{FabricGeometry, Pol, StateKey};
use crate::scheduler::{FabricConfig, SubbandPlan};
use crate::{distance, Vec3};

pub const DEFAULT_PAD_FACTOR: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualElement {
    pub index: usize,
    pub position: Vec3,
    pub carrier_hz: f64,
    pub chain: usize,
    pub module: usize,
    pub step: usize,
}

/// Frequency-state to element mapping: `v = chain·M·P + module·P + step`,
/// placed `v·d` along the aperture line.
pub fn map_state_to_element(
    chain: usize,
    module: usize,
    step: usize,
    cfg: &FabricConfig,
    plan: &SubbandPlan,
    geometry: &FabricGeometry,
) -> Result<VirtualElement> {
    if chain >= cfg.k_chains || module >= cfg.m_modules || step >= cfg.p_steps {
        return Err(Error::InvalidInput(format!(
            "state (chain {chain}, module {module}, step {step}) outside K={}, M={}, P={}",
            cfg.k_chains, cfg.m_modules, cfg.p_steps
        )));
    }
    let index = chain * cfg.m_modules * cfg.p_steps + module * cfg.p_steps + step;
    if index >= geometry.n_elements || !plan.contains(chain, module, step) {
        return Err(Error::UnknownModule { chain, module, step });
    }
    Ok(VirtualElement {
        index,
        position: geometry.element_position(index),
        carrier_hz: plan.center(chain, module, step),
        chain,
        module,
        step,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeProfile {
    pub values: Vec<Complex64>,
    /// Range spacing of adjacent (padded) bins.
    pub bin_size_m: f64,
    /// Native resolution `c / (2 B_chirp)` of one chirp.
    pub resolution_m: f64,
    pub state: StateKey,
    pub pol_rx: Pol,
    pub c_mps: f64,
}

impl RangeProfile {
    pub fn range_of_bin(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_size_m
    }

    /// Largest range that can be interpolated.
    pub fn support_m(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.bin_size_m
    }

    /// Linearly interpolated profile value at `range_m`.
    pub fn lookup(&self, range_m: f64) -> Option<Complex64> {
        let pos = range_m / self.bin_size_m;
        if !(pos >= 0.0) {
            return None;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return if i + 1 == self.values.len() && pos == i as f64 {
                Some(self.values[i])
            } else {
                None
            };
        }
        let frac = pos - i as f64;
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }

    pub fn peak_bin(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best })
            .0
    }

    pub fn scaled(&self, alpha: Complex64) -> RangeProfile {
        RangeProfile {
            values: self.values.iter().map(|z| z * alpha).collect(),
            ..self.clone()
        }
    }
}

/// Symmetric raised-cosine (Hann) window.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos())
        .collect()
}

/// Windowed, zero-padded spectrum of a beat signal, normalized so that a
/// unit tone on a bin center has unit magnitude. A `pad_factor` of 0 is
/// treated as 1.
pub fn range_profile(sig: &BeatSignal, pad_factor: usize) -> RangeProfile {
    let n = sig.samples.len();
    let n_fft = n * pad_factor.max(1);
    let window = hann(n);
    let gain: f64 = window.iter().sum();

    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (i, (s, w)) in sig.samples.iter().zip(&window).enumerate() {
        buf[i] = s * (w / gain);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    fft.process(&mut buf);

    // reference the phase to the chirp midpoint
    let mid = (n as f64 - 1.0) / 2.0;
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, 2.0 * PI * k as f64 * mid / n_fft as f64);
    }

    let slope = sig.chirp.slope_hz_per_s();
    RangeProfile {
        values: buf,
        bin_size_m: sig.chirp.sample_rate_hz / n_fft as f64 * sig.c_mps / (2.0 * slope),
        resolution_m: sig.c_mps / (2.0 * sig.chirp.bandwidth_hz),
        state: sig.state,
        pol_rx: sig.pol_rx,
        c_mps: sig.c_mps,
    }
}

/// Rectangular imaging grid in the `y = y_plane` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub z_step: f64,
    #[serde(default)]
    pub y_plane: f64,
}

impl GridSpec {
    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) / self.x_step + 1e-9).floor() as usize + 1
    }

    pub fn nz(&self) -> usize {
        ((self.z_max - self.z_min) / self.z_step + 1e-9).floor() as usize + 1
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.x_step
    }

    pub fn z(&self, iz: usize) -> f64 {
        self.z_min + iz as f64 * self.z_step
    }

    pub fn point(&self, ix: usize, iz: usize) -> Vec3 {
        [self.x(ix), self.y_plane, self.z(iz)]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.x_step, self.z_min, self.z_max, self.z_step]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_step > 0.0) || !(self.z_step > 0.0) {
            return Err(Error::InvalidInput("grid steps must be positive and finite".into()));
        }
        if self.x_max < self.x_min || self.z_max < self.z_min {
            return Err(Error::InvalidInput("grid extents are inverted".into()));
        }
        Ok(())
    }

    fn corners(&self) -> [Vec3; 4] {
        let (x1, x2) = (self.x_min, self.x(self.nx() - 1));
        let (z1, z2) = (self.z_min, self.z(self.nz() - 1));
        [
            [x1, self.y_plane, z1],
            [x1, self.y_plane, z2],
            [x2, self.y_plane, z1],
            [x2, self.y_plane, z2],
        ]
    }
}

/// One complex image channel, stored row-major with `z` as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl Image {
    pub fn at(&self, ix: usize, iz: usize) -> Complex64 {
        self.values[iz * self.grid.nx() + ix]
    }

    /// `(ix, iz, |I|)` of the largest-magnitude pixel.
    pub fn peak(&self) -> (usize, usize, f64) {
        let nx = self.grid.nx();
        let (i, m) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        (i % nx, i / nx, m)
    }

    pub fn peak_position(&self) -> Vec3 {
        let (ix, iz, _) = self.peak();
        self.grid.point(ix, iz)
    }
}

fn check_profiles(profiles: &[(VirtualElement, RangeProfile)]) -> Result<()> {
    let Some((_, first)) = profiles.first() else {
        return Err(Error::InvalidInput("back-projection needs at least one profile".into()));
    };
    for (_, p) in profiles {
        if p.values.len() != first.values.len() || (p.bin_size_m - first.bin_size_m).abs() > 1e-12 * first.bin_size_m {
            return Err(Error::InvalidInput("profiles use different chirp configurations".into()));
        }
    }
    Ok(())
}

/// Coherent sum of interpolated profile values at a single point.
pub fn backproject_point(profiles: &[(VirtualElement, RangeProfile)], p: &Vec3, c_mps: f64) -> Complex64 {
    profiles
        .iter()
        .map(|(el, prof)| {
            let r = distance(p, &el.position);
            let v = prof.lookup(r).unwrap_or_default();
            v * Complex64::from_polar(1.0, 2.0 * PI * el.carrier_hz * 2.0 * r / c_mps)
        })
        .sum()
}

/// Largest element-to-point range the grid requires.
fn required_support(profiles: &[(VirtualElement, RangeProfile)], points: &[Vec3]) -> f64 {
    profiles
        .iter()
        .flat_map(|(el, _)| points.iter().map(move |p| distance(p, &el.position)))
        .fold(0.0, f64::max)
}

pub fn backproject(profiles: &[(VirtualElement, RangeProfile)], grid: &GridSpec, c_mps: f64) -> Result<Image> {
    check_profiles(profiles)?;
    grid.validate()?;
    let support = profiles[0].1.support_m();
    let needed = required_support(profiles, &grid.corners());
    if needed > support {
        return Err(Error::GridExceedsRangeSupport {
            needed_m: needed,
            support_m: support,
        });
    }
    let nx = grid.nx();
    let nz = grid.nz();
    let values: Vec<Complex64> = (0..nz)
        .into_par_iter()
        .flat_map_iter(|iz| {
            (0..nx).map(move |ix| backproject_point(profiles, &grid.point(ix, iz), c_mps))
        })
        .collect();
    Ok(Image { grid: *grid, values })
}

/// Back-projection at an arbitrary set of points, with the same range-support
/// check as [`backproject`].
pub fn backproject_at(
    profiles: &[(VirtualElement, RangeProfile)],
    points: &[Vec3],
    c_mps: f64,
) -> Result<Vec<Complex64>> {
    check_profiles(profiles)?;
    let support = profiles[0].1.support_m();
    let needed = required_support(profiles, points);
    if needed > support {
        return Err(Error::GridExceedsRangeSupport {
            needed_m: needed,
            support_m: support,
        });
    }
    Ok(points.iter().map(|p| backproject_point(profiles, p, c_mps)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    /// Uniform grid over `sin θ ∈ [-1, 1)`, θ measured from broadside toward
    /// the aperture direction.
    pub sin_theta: Vec<f64>,
    pub values: Vec<Complex64>,
    pub reference_hz: f64,
}

impl AngularSpectrum {
    pub fn bin_width(&self) -> f64 {
        2.0 / self.sin_theta.len() as f64
    }

    pub fn peak_sin_theta(&self) -> f64 {
        let i = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best })
            .0;
        self.sin_theta[i]
    }

    pub fn peak_angle(&self) -> f64 {
        self.peak_sin_theta().asin()
    }
}

/// Slow-time angular transform at one range bin.
///
/// Each element's sample is rotated to the mean carrier using the bin-center
/// range, then matched against far-field steering phases built from each
/// element's own carrier. Since carrier and position both grow with the
/// element index, a range offset from the bin center shows up as a bearing
/// offset; targets should sit near a bin center.
pub fn angular_spectrum(
    profiles: &[(VirtualElement, RangeProfile)],
    range_bin: usize,
    n_vir: usize,
    n_angles: usize,
) -> Result<AngularSpectrum> {
    let mut present = vec![false; n_vir];
    for (el, _) in profiles {
        if el.index < n_vir {
            present[el.index] = true;
        }
    }
    let missing: Vec<usize> = present
        .iter()
        .enumerate()
        .filter(|(_, p)| !**p)
        .map(|(i, _)| i)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingElements(missing));
    }
    check_profiles(profiles)?;
    if range_bin >= profiles[0].1.values.len() || n_angles == 0 {
        return Err(Error::InvalidInput(format!("range bin {range_bin} or angle count {n_angles} invalid")));
    }

    let c = profiles[0].1.c_mps;
    let r_bin = profiles[0].1.range_of_bin(range_bin);
    let n = profiles.len() as f64;
    let f_ref = profiles.iter().map(|(el, _)| el.carrier_hz).sum::<f64>() / n;
    let mut center = [0.0; 3];
    for (el, _) in profiles {
        for (c_i, p_i) in center.iter_mut().zip(el.position) {
            *c_i += p_i / n;
        }
    }
    let (lo, hi) = profiles.iter().fold((&profiles[0].0, &profiles[0].0), |(lo, hi), (el, _)| {
        (if el.index < lo.index { el } else { lo }, if el.index > hi.index { el } else { hi })
    });
    let axis = if lo.index == hi.index {
        [1.0, 0.0, 0.0]
    } else {
        crate::generative_space::normalize([
            hi.position[0] - lo.position[0],
            hi.position[1] - lo.position[1],
            hi.position[2] - lo.position[2],
        ])
    };

    let compensated: Vec<(f64, f64, Complex64)> = profiles
        .iter()
        .map(|(el, prof)| {
            let u = (0..3).map(|i| (el.position[i] - center[i]) * axis[i]).sum::<f64>();
            let z = prof.values[range_bin]
                * Complex64::from_polar(1.0, 4.0 * PI * (el.carrier_hz - f_ref) * r_bin / c);
            (el.carrier_hz, u, z)
        })
        .collect();

    let sin_theta: Vec<f64> = (0..n_angles)
        .map(|i| -1.0 + 2.0 * i as f64 / n_angles as f64)
        .collect();
    let values = sin_theta
        .iter()
        .map(|s| {
            compensated
                .iter()
                .map(|(f, u, z)| z * Complex64::from_polar(1.0, -4.0 * PI * f * u * s / c))
                .sum()
        })
        .collect();
    Ok(AngularSpectrum {
        sin_theta,
        values,
        reference_hz: f_ref,
    })
}
