//! Dechirped FMCW forward model for a single sensing state.
//!
//! Stop-and-hop point targets, residual video phase neglected. The fast-time
//! axis is centered on the chirp midpoint, where the instantaneous transmit
//! frequency equals the state's center frequency, so the carrier phase term
//! `exp(-j 2π f_c 2R / c)` is the phase of each tone at `t = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generative_space::{splitmix64, ControlPoint, Pol, StateKey};
use crate::scene::{range_to, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChirpConfig {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
}

impl ChirpConfig {
    pub fn new(center_hz: f64, bandwidth_hz: f64, duration_s: f64, sample_rate_hz: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0) || !(duration_s > 0.0) || !(sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "chirp needs positive bandwidth, duration and sample rate (got {bandwidth_hz}, {duration_s}, {sample_rate_hz})"
            )));
        }
        let n_samples = (duration_s * sample_rate_hz).round() as usize;
        if n_samples < 2 {
            return Err(Error::InvalidInput(format!(
                "chirp yields {n_samples} samples; at least 2 required"
            )));
        }
        Ok(Self {
            center_hz,
            bandwidth_hz,
            duration_s,
            sample_rate_hz,
            n_samples,
        })
    }

    pub fn with_center(&self, center_hz: f64) -> Self {
        Self { center_hz, ..*self }
    }

    pub fn slope_hz_per_s(&self) -> f64 {
        self.bandwidth_hz / self.duration_s
    }

    /// Fast-time instant of sample `n`, relative to the chirp midpoint.
    pub fn sample_time(&self, n: usize) -> f64 {
        (n as f64 - (self.n_samples as f64 - 1.0) / 2.0) / self.sample_rate_hz
    }

    /// Largest range whose beat tone stays below the (complex) sample rate.
    pub fn max_unambiguous_range_m(&self, c_mps: f64) -> f64 {
        self.sample_rate_hz * c_mps / (2.0 * self.slope_hz_per_s())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    ComplexGaussian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// SNR of a unit-amplitude scatterer's tone against the per-sample noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(snr_db: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::ComplexGaussian,
            snr_db,
            seed,
        }
    }

    /// Per-sample complex noise power `E|n|^2`.
    pub fn noise_power(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::ComplexGaussian => 10f64.powf(-self.snr_db / 10.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeatSignal {
    pub samples: Vec<Complex64>,
    pub chirp: ChirpConfig,
    pub state: StateKey,
    pub pol_rx: Pol,
    /// Propagation speed the signal was synthesized with.
    pub c_mps: f64,
}

impl BeatSignal {
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// CSV dump with columns `sample_index,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_index,re,im\n");
        for (i, z) in self.samples.iter().enumerate() {
            out.push_str(&format!("{i},{:e},{:e}\n", z.re, z.im));
        }
        out
    }
}

pub fn beat_frequency(range_m: f64, slope_hz_per_s: f64, c_mps: f64) -> f64 {
    2.0 * range_m * slope_hz_per_s / c_mps
}

pub fn range_resolution(bandwidth_hz: f64, c_mps: f64) -> f64 {
    c_mps / (2.0 * bandwidth_hz)
}

/// Synthesizes the dechirped beat signal observed on receive polarization
/// `pol_rx` for one control point.
pub fn simulate_state(
    u: &ControlPoint,
    scene: &Scene,
    chirp: &ChirpConfig,
    noise: &NoiseConfig,
    pol_rx: Pol,
    c_mps: f64,
) -> Result<BeatSignal> {
    let tol = 1e-9 * u.f.center_hz.abs().max(1.0);
    if (chirp.center_hz - u.f.center_hz).abs() > tol {
        return Err(Error::ChirpCenterMismatch {
            chirp_hz: chirp.center_hz,
            state_hz: u.f.center_hz,
        });
    }
    let n = chirp.n_samples;
    let slope = chirp.slope_hz_per_s();
    let mut samples = vec![Complex64::new(0.0, 0.0); n];

    for scatterer in &scene.scatterers {
        let r = range_to(scatterer, &u.q.element_position)?;
        let mut amplitude = scatterer.scattering.entry(u.s.pol_tx, pol_rx);
        if amplitude == Complex64::new(0.0, 0.0) {
            continue;
        }
        if scene.spreading_loss {
            amplitude /= r * r;
        }
        let fb = beat_frequency(r, slope, c_mps);
        let carrier = Complex64::from_polar(1.0, -2.0 * PI * chirp.center_hz * 2.0 * r / c_mps);
        let a = amplitude * carrier;
        for (i, s) in samples.iter_mut().enumerate() {
            let t = chirp.sample_time(i);
            *s += a * Complex64::from_polar(1.0, 2.0 * PI * fb * t);
        }
    }

    if noise.kind == NoiseKind::ComplexGaussian {
        let sigma = (noise.noise_power() / 2.0).sqrt();
        let stream = splitmix64(noise.seed ^ splitmix64(u.key().digest() ^ pol_rx as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        for s in samples.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *s += Complex64::new(sigma * re, sigma * im);
        }
    }

    Ok(BeatSignal {
        samples,
        chirp: *chirp,
        state: u.key(),
        pol_rx,
        c_mps,
    })
}
