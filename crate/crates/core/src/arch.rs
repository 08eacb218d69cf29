//! Frame-overhead and update-rate comparison of phased-array, TDM-MIMO and
//! multi-chain frequency-as-aperture architectures.
//!
//! Quantitative rows are computed. The ordinal rows (energy, calibration,
//! flexibility, persistence) have no underlying formula and are carried as
//! fixed labels per architecture family.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArchVariant {
    PhasedArray { n_elements: u32 },
    TdmMimo { n_tx: u32, n_rx: u32 },
    MrcFaaCaf { k: u32, m: u32, p: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub variant: ArchVariant,
    /// 2 for full polarimetry.
    pub pol_tx_states: u32,
}

impl ArchSpec {
    pub fn phased_array(n_elements: u32, pol_tx_states: u32) -> Self {
        Self {
            variant: ArchVariant::PhasedArray { n_elements },
            pol_tx_states,
        }
    }

    pub fn tdm_mimo(n_tx: u32, n_rx: u32, pol_tx_states: u32) -> Self {
        Self {
            variant: ArchVariant::TdmMimo { n_tx, n_rx },
            pol_tx_states,
        }
    }

    pub fn mrc_faa_caf(k: u32, m: u32, p: u32, pol_tx_states: u32) -> Self {
        Self {
            variant: ArchVariant::MrcFaaCaf { k, m, p },
            pol_tx_states,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.variant {
            ArchVariant::PhasedArray { .. } => "Phased Array",
            ArchVariant::TdmMimo { .. } => "TDM-MIMO",
            ArchVariant::MrcFaaCaf { .. } => "MRC-FaA-CAF",
        }
    }

    pub fn is_valid(&self) -> bool {
        let counts_ok = match self.variant {
            ArchVariant::PhasedArray { n_elements } => n_elements >= 1,
            ArchVariant::TdmMimo { n_tx, n_rx } => n_tx >= 1 && n_rx >= 1,
            ArchVariant::MrcFaaCaf { k, m, p } => k >= 1 && m >= 1 && p >= 1,
        };
        counts_ok && self.pol_tx_states >= 1
    }
}

/// The three dual-polarized, 64-element configurations of the case study.
pub fn case_study_specs() -> Vec<ArchSpec> {
    vec![
        ArchSpec::phased_array(64, 2),
        ArchSpec::tdm_mimo(8, 8, 2),
        ArchSpec::mrc_faa_caf(2, 4, 8, 2),
    ]
}

pub fn virtual_elements(a: &ArchSpec) -> u32 {
    match a.variant {
        ArchVariant::PhasedArray { n_elements } => n_elements,
        ArchVariant::TdmMimo { n_tx, n_rx } => n_tx * n_rx,
        ArchVariant::MrcFaaCaf { k, m, p } => k * m * p,
    }
}

/// Sensing states per full polarimetric frame, relative to one
/// single-polarization reference frame.
pub fn frame_multiplier(a: &ArchSpec) -> u32 {
    match a.variant {
        ArchVariant::PhasedArray { .. } | ArchVariant::MrcFaaCaf { .. } => a.pol_tx_states,
        ArchVariant::TdmMimo { n_tx, .. } => n_tx * a.pol_tx_states,
    }
}

/// World-model update rate `1 / (x · T0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateRate {
    pub t0_multiple: u32,
}

impl UpdateRate {
    /// Rate in Hz for a given reference-frame time.
    pub fn hz(&self, t0_s: f64) -> f64 {
        1.0 / (self.t0_multiple as f64 * t0_s)
    }
}

impl fmt::Display for UpdateRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t0_multiple == 1 {
            write!(f, "1/T0")
        } else {
            write!(f, "1/({}T0)", self.t0_multiple)
        }
    }
}

pub fn update_rate(a: &ArchSpec) -> UpdateRate {
    UpdateRate {
        t0_multiple: frame_multiplier(a),
    }
}

/// Raw chirps per full frame, assuming one chirp per sensing state, that a
/// phased array receives on all elements at once, that each TDM transmit
/// chirp is received on all `n_rx` channels, and that the `K` chains of the
/// clip-on fabric run concurrently.
pub fn absolute_chirps_per_frame(a: &ArchSpec) -> u32 {
    match a.variant {
        ArchVariant::PhasedArray { .. } => a.pol_tx_states,
        ArchVariant::TdmMimo { n_tx, .. } => n_tx * a.pol_tx_states,
        ArchVariant::MrcFaaCaf { m, p, .. } => m * p * a.pol_tx_states,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ordinal {
    Low,
    LowModerate,
    Moderate,
    ModerateHigh,
    High,
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordinal::Low => "Low",
            Ordinal::LowModerate => "Low-Moderate",
            Ordinal::Moderate => "Moderate",
            Ordinal::ModerateHigh => "Moderate-High",
            Ordinal::High => "High",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalCell {
    pub level: Ordinal,
    pub note: Option<String>,
}

impl OrdinalCell {
    fn new(level: Ordinal, note: &str) -> Self {
        Self {
            level,
            note: (!note.is_empty()).then(|| note.to_string()),
        }
    }
}

impl fmt::Display for OrdinalCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.note {
            Some(n) => write!(f, "{} ({n})", self.level),
            None => write!(f, "{}", self.level),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalLabels {
    pub energy: OrdinalCell,
    pub hardware_calibration: OrdinalCell,
    pub deployment_flexibility: OrdinalCell,
    pub persistence_suitability: OrdinalCell,
}

/// Published qualitative assessment for each architecture family.
pub fn ordinal_labels(variant: &ArchVariant) -> OrdinalLabels {
    use Ordinal::*;
    match variant {
        ArchVariant::PhasedArray { .. } => OrdinalLabels {
            energy: OrdinalCell::new(High, "many RF chains, phase shifters"),
            hardware_calibration: OrdinalCell::new(High, "dense array, global calibration"),
            deployment_flexibility: OrdinalCell::new(Low, "rigid array geometry"),
            persistence_suitability: OrdinalCell::new(Moderate, ""),
        },
        ArchVariant::TdmMimo { .. } => OrdinalLabels {
            energy: OrdinalCell::new(ModerateHigh, "sequential Tx activations"),
            hardware_calibration: OrdinalCell::new(Moderate, "fewer RF chains, heavy calibration"),
            deployment_flexibility: OrdinalCell::new(Moderate, "fixed Tx-Rx"),
            persistence_suitability: OrdinalCell::new(Low, ""),
        },
        ArchVariant::MrcFaaCaf { .. } => OrdinalLabels {
            energy: OrdinalCell::new(LowModerate, "few RF chains, passive CMs"),
            hardware_calibration: OrdinalCell::new(Low, "modular CMs, localized calibration"),
            deployment_flexibility: OrdinalCell::new(High, "embodied, reconfigurable fabric"),
            persistence_suitability: OrdinalCell::new(High, ""),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchMetrics {
    pub spec: ArchSpec,
    pub architecture: String,
    pub virtual_elements: u32,
    pub pol_channels_per_element: u32,
    pub frame_multiplier: u32,
    pub update_rate: UpdateRate,
    pub absolute_chirps_per_frame: u32,
    pub labels: OrdinalLabels,
}

impl ArchMetrics {
    pub fn of(spec: &ArchSpec) -> Self {
        Self {
            spec: *spec,
            architecture: spec.name().to_string(),
            virtual_elements: virtual_elements(spec),
            // dual-polarized receive on every element
            pol_channels_per_element: 2 * spec.pol_tx_states,
            frame_multiplier: frame_multiplier(spec),
            update_rate: update_rate(spec),
            absolute_chirps_per_frame: absolute_chirps_per_frame(spec),
            labels: ordinal_labels(&spec.variant),
        }
    }

    fn elements_cell(&self) -> String {
        match self.spec.variant {
            ArchVariant::PhasedArray { n_elements } => format!("{n_elements} (instantaneous)"),
            ArchVariant::TdmMimo { n_tx, n_rx } => {
                format!("{n_tx} x {n_rx} = {} (TDM)", self.virtual_elements)
            }
            ArchVariant::MrcFaaCaf { k, m, p } => {
                format!("KMP = {k}x{m}x{p} = {} (waveform-orchestrated)", self.virtual_elements)
            }
        }
    }

    fn channels_cell(&self) -> String {
        if self.pol_channels_per_element == 4 {
            "4 (HH, HV, VH, VV)".to_string()
        } else {
            self.pol_channels_per_element.to_string()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ArchMetrics>,
}

pub const T0_FOOTNOTE: &str = "T0 is the time to acquire one single-polarization reference frame of each \
architecture; rates are normalized per architecture and do not assume equal absolute T0. \
Absolute chirps assume one chirp per sensing state.";

pub fn compare(specs: &[ArchSpec]) -> ComparisonTable {
    ComparisonTable {
        rows: specs.iter().map(ArchMetrics::of).collect(),
    }
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "architecture,virtual_elements,pol_channels_per_element,frame_multiplier,update_rate,\
absolute_chirps_per_frame,energy,hardware_calibration,deployment_flexibility,persistence_suitability\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.architecture,
                r.virtual_elements,
                r.pol_channels_per_element,
                r.frame_multiplier,
                r.update_rate,
                r.absolute_chirps_per_frame,
                r.labels.energy.level,
                r.labels.hardware_calibration.level,
                r.labels.deployment_flexibility.level,
                r.labels.persistence_suitability.level,
            ));
        }
        out
    }

    /// Dimension-by-architecture grid with aligned columns.
    pub fn render_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Dimension".to_string()];
        header.extend(self.rows.iter().map(|r| r.architecture.clone()));
        grid.push(header);

        type Cell = fn(&ArchMetrics) -> String;
        let dims: [(&str, Cell); 9] = [
            ("Effective spatial virtual elements", |r| r.elements_cell()),
            ("Polarimetric channels per element", |r| r.channels_cell()),
            ("Frame-based acquisition overhead", |r| format!("x{}", r.frame_multiplier)),
            ("World-model update rate", |r| r.update_rate.to_string()),
            ("Absolute chirps per frame", |r| r.absolute_chirps_per_frame.to_string()),
            ("Energy consumption scaling", |r| r.labels.energy.to_string()),
            ("Hardware and calibration cost", |r| r.labels.hardware_calibration.to_string()),
            ("Deployment flexibility", |r| r.labels.deployment_flexibility.to_string()),
            ("Suitability for persistent EM world modeling", |r| {
                r.labels.persistence_suitability.to_string()
            }),
        ];
        for (name, cell) in dims {
            let mut row = vec![name.to_string()];
            row.extend(self.rows.iter().map(cell));
            grid.push(row);
        }

        let n_cols = grid[0].len();
        let widths: Vec<usize> = (0..n_cols)
            .map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in grid.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("-+-"));
                out.push('\n');
            }
        }
        out.push('\n');
        out.push_str("Note: ");
        out.push_str(T0_FOOTNOTE);
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_element_counts() {
        assert_eq!(virtual_elements(&ArchSpec::tdm_mimo(8, 8, 2)), 64);
        assert_eq!(virtual_elements(&ArchSpec::mrc_faa_caf(2, 4, 8, 2)), 64);
        assert_eq!(virtual_elements(&ArchSpec::mrc_faa_caf(1, 1, 1, 2)), 1);
        assert_eq!(virtual_elements(&ArchSpec::phased_array(64, 2)), 64);
    }

    #[test]
    fn frame_multipliers() {
        assert_eq!(frame_multiplier(&ArchSpec::phased_array(64, 2)), 2);
        assert_eq!(frame_multiplier(&ArchSpec::tdm_mimo(8, 8, 2)), 16);
        assert_eq!(frame_multiplier(&ArchSpec::tdm_mimo(4, 16, 1)), 4);
        assert_eq!(frame_multiplier(&ArchSpec::mrc_faa_caf(2, 4, 8, 2)), 2);
    }

    #[test]
    fn update_rates() {
        assert_eq!(update_rate(&ArchSpec::mrc_faa_caf(2, 4, 8, 2)).to_string(), "1/(2T0)");
        assert_eq!(update_rate(&ArchSpec::tdm_mimo(8, 8, 2)).to_string(), "1/(16T0)");
        let one = update_rate(&ArchSpec::phased_array(64, 1));
        assert_eq!(one.t0_multiple, 1);
        assert_eq!(one.to_string(), "1/T0");
        assert!((update_rate(&ArchSpec::tdm_mimo(8, 8, 2)).hz(1e-3) - 62.5).abs() < 1e-9);
    }

    #[test]
    fn absolute_chirps() {
        assert_eq!(absolute_chirps_per_frame(&ArchSpec::phased_array(64, 2)), 2);
        assert_eq!(absolute_chirps_per_frame(&ArchSpec::tdm_mimo(8, 8, 2)), 16);
        assert_eq!(absolute_chirps_per_frame(&ArchSpec::mrc_faa_caf(2, 4, 8, 2)), 64);
    }

    #[test]
    fn compare_rows() {
        let t = compare(&case_study_specs());
        assert_eq!(t.rows.len(), 3);
        let single = compare(&[ArchSpec::mrc_faa_caf(2, 4, 8, 2)]);
        assert_eq!(single.rows.len(), 1);
        let alt = ArchMetrics::of(&ArchSpec::mrc_faa_caf(4, 4, 4, 2));
        assert_eq!(
            (alt.virtual_elements, alt.frame_multiplier, alt.absolute_chirps_per_frame),
            (64, 2, 32)
        );
    }

    #[test]
    fn ordinal_fixtures() {
        let t = compare(&case_study_specs());
        let persist: Vec<Ordinal> = t.rows.iter().map(|r| r.labels.persistence_suitability.level).collect();
        assert_eq!(persist, [Ordinal::Moderate, Ordinal::Low, Ordinal::High]);
        let energy: Vec<String> = t.rows.iter().map(|r| r.labels.energy.level.to_string()).collect();
        assert_eq!(energy, ["High", "Moderate-High", "Low-Moderate"]);
    }

    #[test]
    fn tdm_penalty_grows_with_tx_count() {
        // fixed 64 virtual elements
        let pairs = [(1, 64), (2, 32), (4, 16), (8, 8), (16, 4), (32, 2), (64, 1)];
        let mults: Vec<u32> = pairs
            .iter()
            .map(|&(tx, rx)| {
                let s = ArchSpec::tdm_mimo(tx, rx, 2);
                assert_eq!(virtual_elements(&s), 64);
                frame_multiplier(&s)
            })
            .collect();
        assert!(mults.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_shape() {
        let csv = compare(&case_study_specs()).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "TDM-MIMO,64,4,16,1/(16T0),16,Moderate-High,Moderate,Moderate,Low");
    }
}
