//! Polarimetric point-scatterer world and ground-truth queries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::generative_space::{FabricGeometry, Pol};
use crate::{distance, Vec3};

/// 2x2 complex backscatter matrix, indexed `[rx][tx]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringMatrix {
    pub s_hh: Complex64,
    pub s_hv: Complex64,
    pub s_vh: Complex64,
    pub s_vv: Complex64,
}

impl ScatteringMatrix {
    pub const ZERO: ScatteringMatrix = ScatteringMatrix {
        s_hh: Complex64::new(0.0, 0.0),
        s_hv: Complex64::new(0.0, 0.0),
        s_vh: Complex64::new(0.0, 0.0),
        s_vv: Complex64::new(0.0, 0.0),
    };

    pub fn new(s_hh: Complex64, s_hv: Complex64, s_vh: Complex64, s_vv: Complex64) -> Self {
        Self {
            s_hh,
            s_hv,
            s_vh,
            s_vv,
        }
    }

    pub fn identity() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Entry seen by a receiver of polarization `rx` for a transmit
    /// polarization `tx` (`S_HV` is H received, V transmitted).
    pub fn entry(&self, tx: Pol, rx: Pol) -> Complex64 {
        match (rx, tx) {
            (Pol::H, Pol::H) => self.s_hh,
            (Pol::H, Pol::V) => self.s_hv,
            (Pol::V, Pol::H) => self.s_vh,
            (Pol::V, Pol::V) => self.s_vv,
        }
    }

    pub fn set_entry(&mut self, tx: Pol, rx: Pol, value: Complex64) {
        match (rx, tx) {
            (Pol::H, Pol::H) => self.s_hh = value,
            (Pol::H, Pol::V) => self.s_hv = value,
            (Pol::V, Pol::H) => self.s_vh = value,
            (Pol::V, Pol::V) => self.s_vv = value,
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.s_hh, self.s_hv, self.s_vh, self.s_vv]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &ScatteringMatrix) -> ScatteringMatrix {
        ScatteringMatrix::new(
            self.s_hh - other.s_hh,
            self.s_hv - other.s_hv,
            self.s_vh - other.s_vh,
            self.s_vv - other.s_vv,
        )
    }

    pub fn scale(&self, alpha: Complex64) -> ScatteringMatrix {
        ScatteringMatrix::new(
            self.s_hh * alpha,
            self.s_hv * alpha,
            self.s_vh * alpha,
            self.s_vv * alpha,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_reciprocal(&self) -> bool {
        (self.s_hv - self.s_vh).norm() <= 1e-12 * (1.0 + self.frobenius_norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointScatterer {
    pub position: Vec3,
    pub scattering: ScatteringMatrix,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub name: String,
    pub scatterers: Vec<PointScatterer>,
    /// Apply two-way 1/R^2 amplitude spreading.
    #[serde(default)]
    pub spreading_loss: bool,
    /// Monostatic reciprocity: `s_hv == s_vh` enforced at load time.
    #[serde(default)]
    pub reciprocal: bool,
}

impl Scene {
    pub fn new(name: impl Into<String>, scatterers: Vec<PointScatterer>) -> Self {
        Self {
            name: name.into(),
            scatterers,
            spreading_loss: false,
            reciprocal: false,
        }
    }

    pub fn union(&self, other: &Scene) -> Scene {
        let mut scatterers = self.scatterers.clone();
        scatterers.extend_from_slice(&other.scatterers);
        Scene {
            name: format!("{}+{}", self.name, other.name),
            scatterers,
            spreading_loss: self.spreading_loss,
            reciprocal: self.reciprocal && other.reciprocal,
        }
    }

    /// Field-path validation errors, empty when the scene is admissible.
    pub fn validate(&self, prefix: &str) -> Vec<FieldError> {
        let mut errors = Vec::new();
        for (i, s) in self.scatterers.iter().enumerate() {
            let path = format!("{prefix}.scatterers[{i}]");
            if s.position.iter().any(|c| !c.is_finite()) {
                errors.push(FieldError::new(format!("{path}.position"), "position must be finite"));
            }
            if !s.scattering.is_finite() {
                errors.push(FieldError::new(
                    format!("{path}.scattering"),
                    "scattering entries must be finite",
                ));
            } else if !(s.scattering.frobenius_norm() > 0.0) {
                errors.push(FieldError::new(
                    format!("{path}.scattering"),
                    "active scatterer needs a nonzero scattering matrix",
                ));
            }
            if self.reciprocal && !s.scattering.is_reciprocal() {
                errors.push(FieldError::new(
                    format!("{path}.scattering"),
                    "reciprocity requires hv == vh",
                ));
            }
        }
        errors
    }
}

/// Exact Euclidean range between a scatterer and a radiating element.
pub fn range_to(scatterer: &PointScatterer, element_position: &Vec3) -> Result<f64> {
    let r = distance(&scatterer.position, element_position);
    if r == 0.0 {
        return Err(Error::ZeroRange(*element_position));
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub index: usize,
    pub position: Vec3,
    /// Range from the aperture centroid.
    pub range_m: f64,
    /// Signed offset along the aperture direction.
    pub cross_range_m: f64,
    pub scattering: ScatteringMatrix,
}

pub fn ground_truth_report(scene: &Scene, geometry: &FabricGeometry) -> Vec<GroundTruthRow> {
    let center = geometry.center();
    let dir = geometry.direction;
    scene
        .scatterers
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let rel = [
                s.position[0] - center[0],
                s.position[1] - center[1],
                s.position[2] - center[2],
            ];
            GroundTruthRow {
                index,
                position: s.position,
                range_m: distance(&s.position, &center),
                cross_range_m: rel[0] * dir[0] + rel[1] * dir[1] + rel[2] * dir[2],
                scattering: s.scattering,
            }
        })
        .collect()
}
