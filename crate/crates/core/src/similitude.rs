//! Conversion between scale-model and full-scale modal quantities.
//!
//! Under Froude-type similitude with geometry factor `F_l` the frequency
//! factor is `F_f = 1 / sqrt(F_l)`. Damping ratios are dimensionless and
//! transfer unchanged, although a physical model is rarely calibrated for
//! damping, so transferred values carry an `uncalibrated` flag.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorSource {
    DerivedFromGeometry,
    Stated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub geometry_factor: f64,
    pub frequency_factor: f64,
    pub factor_source: FactorSource,
}

/// Geometry factor of the reference scale model.
pub const REFERENCE_GEOMETRY_FACTOR: f64 = 200.0;
/// Frequency factor quoted for the reference model, rounded from 1/sqrt(200).
pub const REFERENCE_STATED_FACTOR: f64 = 0.07;

/// Full-scale natural frequencies (Hz) of the prototype bridge, in the
/// order b1, b2, b3, t1.
pub const REFERENCE_FULL_SCALE_HZ: [(&str, f64); 4] = [
    ("f_b1", 0.156),
    ("f_b2", 0.171),
    ("f_b3", 0.258),
    ("f_t1", 0.523),
];

pub fn frequency_factor(geometry_factor: f64) -> Result<f64> {
    if !(geometry_factor > 0.0) || !geometry_factor.is_finite() {
        return Err(Error::invalid(format!(
            "geometry factor must be positive, got {geometry_factor}"
        )));
    }
    Ok(1.0 / geometry_factor.sqrt())
}

impl ScalingLaw {
    pub fn from_geometry(geometry_factor: f64) -> Result<Self> {
        Ok(ScalingLaw {
            geometry_factor,
            frequency_factor: frequency_factor(geometry_factor)?,
            factor_source: FactorSource::DerivedFromGeometry,
        })
    }

    /// A quoted frequency factor, kept next to the geometry factor it was
    /// rounded from.
    pub fn stated(geometry_factor: f64, frequency_factor: f64) -> Result<Self> {
        // validates the geometry factor
        self::frequency_factor(geometry_factor)?;
        if !(frequency_factor > 0.0) || !frequency_factor.is_finite() {
            return Err(Error::invalid(format!(
                "frequency factor must be positive, got {frequency_factor}"
            )));
        }
        Ok(ScalingLaw {
            geometry_factor,
            frequency_factor,
            factor_source: FactorSource::Stated,
        })
    }

    /// Law of the reference model with its quoted factor of 0.07.
    pub fn reference_stated() -> Self {
        ScalingLaw {
            geometry_factor: REFERENCE_GEOMETRY_FACTOR,
            frequency_factor: REFERENCE_STATED_FACTOR,
            factor_source: FactorSource::Stated,
        }
    }

    /// `1 / sqrt(F_l)`, whatever the law's source.
    pub fn derived_factor(&self) -> f64 {
        1.0 / self.geometry_factor.sqrt()
    }

    /// Relative gap between the factor in use and the derived one.
    pub fn factor_discrepancy(&self) -> f64 {
        (self.frequency_factor - self.derived_factor()) / self.derived_factor()
    }
}

pub fn to_full_scale(model_frequency: f64, law: &ScalingLaw) -> Result<f64> {
    if !(model_frequency > 0.0) || !model_frequency.is_finite() {
        return Err(Error::invalid(format!(
            "model frequency must be positive, got {model_frequency}"
        )));
    }
    Ok(model_frequency * law.frequency_factor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFrequency {
    pub label: String,
    pub frequency: f64,
}

impl LabeledFrequency {
    pub fn new(label: impl Into<String>, frequency: f64) -> Self {
        LabeledFrequency {
            label: label.into(),
            frequency,
        }
    }
}

pub fn reference_full_scale() -> Vec<LabeledFrequency> {
    REFERENCE_FULL_SCALE_HZ
        .iter()
        .map(|&(l, f)| LabeledFrequency::new(l, f))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    pub scaled: f64,
    pub reference: f64,
    pub absolute_diff: f64,
    pub relative_diff: f64,
}

/// Pair scaled and reference frequencies by label, in the order of
/// `scaled`. Both lists must carry the same label set.
pub fn compare_to_reference(
    scaled: &[LabeledFrequency],
    reference: &[LabeledFrequency],
) -> Result<Vec<Comparison>> {
    if scaled.len() != reference.len() {
        return Err(Error::LabelMismatch(format!(
            "{} scaled values against {} reference values",
            scaled.len(),
            reference.len()
        )));
    }
    scaled
        .iter()
        .map(|s| {
            let r = reference
                .iter()
                .find(|r| r.label == s.label)
                .ok_or_else(|| {
                    Error::LabelMismatch(format!("no reference value for {}", s.label))
                })?;
            let absolute_diff = s.frequency - r.frequency;
            Ok(Comparison {
                label: s.label.clone(),
                scaled: s.frequency,
                reference: r.frequency,
                absolute_diff,
                relative_diff: absolute_diff / r.frequency,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferredDamping {
    pub zeta: f64,
    pub uncalibrated: bool,
}

pub fn transfer_damping(model_zeta: f64) -> Result<TransferredDamping> {
    if !(0.0..1.0).contains(&model_zeta) {
        return Err(Error::invalid(format!(
            "damping ratio must lie in [0, 1), got {model_zeta}"
        )));
    }
    Ok(TransferredDamping {
        zeta: model_zeta,
        uncalibrated: true,
    })
}

/// One line of the scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub label: String,
    pub model_hz: f64,
    pub factor: f64,
    pub full_scale_hz: f64,
    pub reference_hz: Option<f64>,
    pub rel_diff: Option<f64>,
}

/// Scale every model frequency and attach the matching reference value,
/// if one exists.
pub fn scaling_table(
    model: &[LabeledFrequency],
    law: &ScalingLaw,
    reference: &[LabeledFrequency],
) -> Result<Vec<ScalingRow>> {
    model
        .iter()
        .map(|m| {
            let full = to_full_scale(m.frequency, law)?;
            let reference_hz = reference
                .iter()
                .find(|r| r.label == m.label)
                .map(|r| r.frequency);
            Ok(ScalingRow {
                label: m.label.clone(),
                model_hz: m.frequency,
                factor: law.frequency_factor,
                full_scale_hz: full,
                reference_hz,
                rel_diff: reference_hz.map(|r| (full - r) / r),
            })
        })
        .collect()
}

/// CSV: `label,model_hz,factor,full_scale_hz,reference_hz,rel_diff`.
pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "label,model_hz,factor,full_scale_hz,reference_hz,rel_diff"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.label,
            r.model_hz,
            r.factor,
            r.full_scale_hz,
            crate::spectral::opt(r.reference_hz),
            crate::spectral::opt(r.rel_diff)
        )?;
    }
    Ok(())
}

/// Round half away from zero to `decimals` places, for display only.
pub fn round_to(value: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (value * p).round() / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_examples() {
        assert!((frequency_factor(200.0).unwrap() - 0.070_710_678_118_654_75).abs() < 1e-15);
        assert_eq!(frequency_factor(1.0).unwrap(), 1.0);
        assert_eq!(frequency_factor(4.0).unwrap(), 0.5);
        assert!(frequency_factor(0.0).is_err());
        assert!(frequency_factor(-3.0).is_err());
    }

    #[test]
    fn reference_table_reproduced() {
        let law = ScalingLaw::reference_stated();
        let model = [2.263, 2.085, 3.752, 7.906];
        let expected = [0.158, 0.146, 0.263, 0.553];
        for (m, e) in model.iter().zip(expected) {
            assert_eq!(round_to(to_full_scale(*m, &law).unwrap(), 3), e);
        }
        assert!((law.factor_discrepancy() + 0.010_050_5).abs() < 1e-6);
    }

    #[test]
    fn identity_law() {
        let law = ScalingLaw::from_geometry(1.0).unwrap();
        assert_eq!(to_full_scale(3.752, &law).unwrap(), 3.752);
        assert_eq!(law.factor_source, FactorSource::DerivedFromGeometry);
    }

    #[test]
    fn comparison_examples() {
        let scaled = vec![
            LabeledFrequency::new("f_b1", 0.158),
            LabeledFrequency::new("f_b2", 0.146),
        ];
        let cmp = compare_to_reference(&scaled, &reference_full_scale()[..2]).unwrap();
        assert!((cmp[0].absolute_diff - 0.002).abs() < 1e-12);
        assert!((cmp[0].relative_diff - 0.012_820_5).abs() < 1e-6);
        assert!((cmp[1].absolute_diff + 0.025).abs() < 1e-12);
        assert!((cmp[1].relative_diff + 0.146_198_8).abs() < 1e-6);

        let same = compare_to_reference(&scaled, &scaled).unwrap();
        assert!(same
            .iter()
            .all(|c| c.absolute_diff == 0.0 && c.relative_diff == 0.0));

        let other = vec![
            LabeledFrequency::new("f_b1", 0.158),
            LabeledFrequency::new("f_x", 0.1),
        ];
        assert!(matches!(
            compare_to_reference(&scaled, &other),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn damping_transfers_unchanged() {
        for z in [0.0038, 0.0, 0.0033] {
            let t = transfer_damping(z).unwrap();
            assert_eq!(t.zeta, z);
            assert!(t.uncalibrated);
        }
        assert!(transfer_damping(1.0).is_err());
    }

    #[test]
    fn scaling_csv_layout() {
        let model = vec![
            LabeledFrequency::new("f_b1", 2.263),
            LabeledFrequency::new("f_z", 1.0),
        ];
        let rows = scaling_table(
            &model,
            &ScalingLaw::reference_stated(),
            &reference_full_scale(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_scaling_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "label,model_hz,factor,full_scale_hz,reference_hz,rel_diff"
        );
        assert!(lines[1].starts_with("f_b1,2.263,0.07,"));
        assert!(lines[2].ends_with(",,"));
    }
}
