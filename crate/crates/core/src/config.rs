//! Scenario configuration: strict JSON ingestion and cross-field checks.
//!
//! Parsing rejects unknown fields. Validation then collects every violated
//! constraint with its field path instead of stopping at the first one.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, FieldError, Result};
use crate::fmcw::{ChirpConfig, NoiseConfig, NoiseKind};
use crate::generative_space::{normalize, FabricGeometry};
use crate::imaging::{GridSpec, DEFAULT_PAD_FACTOR};
use crate::polarimetry::FabricSetup;
use crate::scene::{PointScatterer, ScatteringMatrix, Scene};
use crate::scheduler::{partition_band, FabricConfig};
use crate::{distance, Vec3, SPEED_OF_LIGHT};

pub const CASE_STUDY_JSON: &str = include_str!("../presets/case_study_v.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFabric {
    pub k_chains: usize,
    pub m_modules: usize,
    pub p_steps: usize,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub chirp_bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    /// Declared virtual element count, checked against `K·M·P`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_vir: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spacing {
    Meters(f64),
    Named(NamedSpacing),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedSpacing {
    HalfWavelength,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `origin` is the position of element 0.
    #[default]
    FirstElement,
    /// `origin` is the aperture centroid.
    Center,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGeometry {
    pub origin: Vec3,
    pub direction: Vec3,
    pub spacing: Spacing,
    #[serde(default)]
    pub anchor: Anchor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScattering {
    pub hh: [f64; 2],
    pub hv: [f64; 2],
    pub vh: [f64; 2],
    pub vv: [f64; 2],
}

impl From<RawScattering> for ScatteringMatrix {
    fn from(r: RawScattering) -> Self {
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        ScatteringMatrix::new(c(r.hh), c(r.hv), c(r.vh), c(r.vv))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScatterer {
    pub position: Vec3,
    pub scattering: RawScattering,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScene {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub scatterers: Vec<RawScatterer>,
    #[serde(default)]
    pub reciprocal: bool,
    #[serde(default)]
    pub spreading_loss: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChirp {
    pub sample_rate_hz: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNoise {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProcessing {
    #[serde(default = "default_pad")]
    pub pad_factor: usize,
}

impl Default for RawProcessing {
    fn default() -> Self {
        Self {
            pad_factor: DEFAULT_PAD_FACTOR,
        }
    }
}

fn default_pad() -> usize {
    DEFAULT_PAD_FACTOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConstants {
    #[serde(default = "default_c")]
    pub c_mps: f64,
}

impl Default for RawConstants {
    fn default() -> Self {
        Self { c_mps: SPEED_OF_LIGHT }
    }
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

/// The on-disk scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub fabric: RawFabric,
    pub geometry: RawGeometry,
    #[serde(default = "empty_scene")]
    pub scene: RawScene,
    pub chirp: RawChirp,
    #[serde(default)]
    pub noise: RawNoise,
    pub grid: GridSpec,
    #[serde(default)]
    pub processing: RawProcessing,
    #[serde(default)]
    pub constants: RawConstants,
    #[serde(default)]
    pub seed: u64,
}

fn empty_scene() -> RawScene {
    RawScene {
        name: String::new(),
        scatterers: Vec::new(),
        reciprocal: false,
        spreading_loss: false,
    }
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub raw: RawConfig,
    pub fabric: FabricConfig,
    pub geometry: FabricGeometry,
    pub scene: Scene,
    pub chirp: ChirpConfig,
    pub noise: NoiseConfig,
    pub grid: GridSpec,
    pub pad_factor: usize,
    pub c_mps: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn setup(&self) -> FabricSetup {
        FabricSetup {
            fabric: self.fabric,
            plan: partition_band(&self.fabric).expect("validated fabric partitions"),
            geometry: self.geometry,
            sample_rate_hz: self.chirp.sample_rate_hz,
            c_mps: self.c_mps,
            pad_factor: self.pad_factor,
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.raw).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn with_seed(&self, seed: u64) -> Result<ScenarioConfig> {
        let mut raw = self.raw.clone();
        raw.seed = seed;
        validate(raw)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, origin: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: origin.as_ref().to_path_buf(),
        source,
    })?;
    validate(raw)
}

pub fn case_study() -> ScenarioConfig {
    parse_config(CASE_STUDY_JSON, "case_study_v.json").expect("bundled preset is valid")
}

fn positive(errors: &mut Vec<FieldError>, path: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        errors.push(FieldError::new(path, format!("must be positive and finite (got {v})")));
    }
}

pub fn validate(raw: RawConfig) -> Result<ScenarioConfig> {
    let mut errors = Vec::new();
    let f = &raw.fabric;
    for (path, v) in [
        ("fabric.k_chains", f.k_chains),
        ("fabric.m_modules", f.m_modules),
        ("fabric.p_steps", f.p_steps),
    ] {
        if v == 0 {
            errors.push(FieldError::new(path, "must be at least 1"));
        }
    }
    positive(&mut errors, "fabric.band_lo_hz", f.band_lo_hz);
    positive(&mut errors, "fabric.band_hi_hz", f.band_hi_hz);
    if !(f.band_hi_hz > f.band_lo_hz) {
        errors.push(FieldError::new("fabric.band_hi_hz", "must exceed band_lo_hz"));
    }
    positive(&mut errors, "fabric.chirp_bandwidth_hz", f.chirp_bandwidth_hz);
    positive(&mut errors, "fabric.chirp_duration_s", f.chirp_duration_s);
    if let Some(n) = f.n_vir {
        if n != f.k_chains * f.m_modules * f.p_steps {
            errors.push(FieldError::new(
                "fabric.n_vir",
                format!("declared {n} but K*M*P = {}", f.k_chains * f.m_modules * f.p_steps),
            ));
        }
    }
    let fabric = FabricConfig {
        k_chains: f.k_chains,
        m_modules: f.m_modules,
        p_steps: f.p_steps,
        band_lo_hz: f.band_lo_hz,
        band_hi_hz: f.band_hi_hz,
        chirp_bandwidth_hz: f.chirp_bandwidth_hz,
        chirp_duration_s: f.chirp_duration_s,
    };
    let fabric_ok = errors.is_empty();
    if fabric_ok && fabric.chirp_bandwidth_hz > fabric.step_width_hz() {
        errors.push(FieldError::new(
            "fabric.chirp_bandwidth_hz",
            format!(
                "chirp does not fit subband step: {} Hz > {} Hz",
                fabric.chirp_bandwidth_hz,
                fabric.step_width_hz()
            ),
        ));
    }

    let c_mps = raw.constants.c_mps;
    positive(&mut errors, "constants.c_mps", c_mps);

    let g = &raw.geometry;
    let dir_norm = g.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(dir_norm > 0.0) || !dir_norm.is_finite() {
        errors.push(FieldError::new("geometry.direction", "must be a nonzero finite vector"));
    }
    if g.origin.iter().any(|v| !v.is_finite()) {
        errors.push(FieldError::new("geometry.origin", "must be finite"));
    }
    let spacing_m = match g.spacing {
        Spacing::Meters(d) => {
            positive(&mut errors, "geometry.spacing", d);
            d
        }
        Spacing::Named(NamedSpacing::HalfWavelength) => c_mps / fabric.band_center_hz() / 2.0,
    };
    let n_vir = fabric.n_vir();
    let geometry = if errors.iter().any(|e| e.path.starts_with("geometry")) {
        None
    } else {
        let direction = normalize(g.direction);
        Some(match g.anchor {
            Anchor::FirstElement => FabricGeometry {
                origin: g.origin,
                direction,
                spacing_m,
                n_elements: n_vir,
            },
            Anchor::Center => FabricGeometry::centered(g.origin, direction, spacing_m, n_vir),
        })
    };

    let scene = Scene {
        name: raw.scene.name.clone(),
        scatterers: raw
            .scene
            .scatterers
            .iter()
            .map(|s| PointScatterer {
                position: s.position,
                scattering: s.scattering.into(),
            })
            .collect(),
        spreading_loss: raw.scene.spreading_loss,
        reciprocal: raw.scene.reciprocal,
    };
    errors.extend(scene.validate("scene"));
    if let Some(geo) = &geometry {
        for (i, s) in scene.scatterers.iter().enumerate() {
            if (0..geo.n_elements).any(|v| distance(&s.position, &geo.element_position(v)) == 0.0) {
                errors.push(FieldError::new(
                    format!("scene.scatterers[{i}].position"),
                    "coincides with an aperture element",
                ));
            }
        }
    }

    positive(&mut errors, "chirp.sample_rate_hz", raw.chirp.sample_rate_hz);
    let chirp = if fabric_ok && raw.chirp.sample_rate_hz > 0.0 {
        match ChirpConfig::new(
            fabric.band_center_hz(),
            fabric.chirp_bandwidth_hz,
            fabric.chirp_duration_s,
            raw.chirp.sample_rate_hz,
        ) {
            Ok(c) => Some(c),
            Err(e) => {
                errors.push(FieldError::new("chirp.sample_rate_hz", e.to_string()));
                None
            }
        }
    } else {
        None
    };

    let noise = match raw.noise.kind {
        NoiseKind::None => NoiseConfig {
            kind: NoiseKind::None,
            snr_db: raw.noise.snr_db.unwrap_or(f64::INFINITY),
            seed: raw.seed,
        },
        NoiseKind::ComplexGaussian => {
            let snr = raw.noise.snr_db.unwrap_or(f64::NAN);
            if !snr.is_finite() {
                errors.push(FieldError::new("noise.snr_db", "required and finite for complex_gaussian noise"));
            }
            NoiseConfig::gaussian(snr, raw.seed)
        }
    };

    let pad_factor = raw.processing.pad_factor;
    if pad_factor == 0 {
        errors.push(FieldError::new("processing.pad_factor", "must be at least 1"));
    }

    let grid = raw.grid;
    if let Err(e) = grid.validate() {
        errors.push(FieldError::new("grid", e.to_string()));
    } else if let (Some(geo), Some(ch)) = (&geometry, &chirp) {
        if pad_factor > 0 && c_mps > 0.0 {
            let n_fft = ch.n_samples * pad_factor;
            let bin = ch.sample_rate_hz / n_fft as f64 * c_mps / (2.0 * ch.slope_hz_per_s());
            let support = (n_fft - 1) as f64 * bin;
            let corners = [
                [grid.x_min, grid.y_plane, grid.z_min],
                [grid.x_min, grid.y_plane, grid.z_max],
                [grid.x_max, grid.y_plane, grid.z_min],
                [grid.x_max, grid.y_plane, grid.z_max],
            ];
            let needed = (0..geo.n_elements)
                .flat_map(|v| corners.iter().map(move |p| distance(p, &geo.element_position(v))))
                .fold(0.0, f64::max);
            if needed > support {
                errors.push(FieldError::new(
                    "grid",
                    format!("grid exceeds range support: needs {needed:.3} m, profiles cover {support:.3} m"),
                ));
            }
        }
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(ScenarioConfig {
        fabric,
        geometry: geometry.expect("checked"),
        scene,
        chirp: chirp.expect("checked"),
        noise,
        grid,
        pad_factor,
        c_mps,
        seed: raw.seed,
        raw,
    })
}
