//! Analysis parameters: built-in defaults, then command-line flags, then an
//! optional JSON config file whose entries win over both.

use std::path::Path;

use anyhow::{bail, Context, Result};
use oma_core::decay::DecayOptions;
use oma_core::similitude::{ScalingLaw, REFERENCE_GEOMETRY_FACTOR};
use oma_core::simulator::lillebaelt_default;
use oma_core::spectral::{Band, ModeLabel, Window, DEFAULT_MATCH_TOLERANCE};
use oma_core::ssi::SsiConfig;
use serde::{Deserialize, Serialize};

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub band: Option<[f64; 2]>,
    pub orders: Option<[usize; 3]>,
    pub n_periods: Option<u32>,
    pub fl: Option<f64>,
    pub ff: Option<f64>,
    pub seed: Option<u64>,
    pub window: Option<Window>,
    pub prominence: Option<f64>,
    pub max_peaks: Option<usize>,
    pub match_tolerance: Option<f64>,
    pub hankel_rows: Option<usize>,
    pub min_support: Option<usize>,
    pub band_half_width: Option<f64>,
    pub filter_sections: Option<usize>,
    pub modes: Option<Vec<ModeLabel>>,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fill every field that is unset here from `other`.
    pub fn or(self, other: AnalysisConfig) -> AnalysisConfig {
        AnalysisConfig {
            band: self.band.or(other.band),
            orders: self.orders.or(other.orders),
            n_periods: self.n_periods.or(other.n_periods),
            fl: self.fl.or(other.fl),
            ff: self.ff.or(other.ff),
            seed: self.seed.or(other.seed),
            window: self.window.or(other.window),
            prominence: self.prominence.or(other.prominence),
            max_peaks: self.max_peaks.or(other.max_peaks),
            match_tolerance: self.match_tolerance.or(other.match_tolerance),
            hankel_rows: self.hankel_rows.or(other.hankel_rows),
            min_support: self.min_support.or(other.min_support),
            band_half_width: self.band_half_width.or(other.band_half_width),
            filter_sections: self.filter_sections.or(other.filter_sections),
            modes: self.modes.or(other.modes),
        }
    }
}

/// Fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub band: Band,
    pub window: Window,
    pub prominence: f64,
    pub max_peaks: usize,
    pub match_tolerance: f64,
    pub ssi: SsiConfig,
    pub n_periods: u32,
    pub decay: DecayOptions,
    pub law: ScalingLaw,
    pub modes: Vec<ModeLabel>,
    pub seed: u64,
}

pub fn reference_modes() -> Vec<ModeLabel> {
    lillebaelt_default()
        .model
        .modes
        .iter()
        .map(|m| ModeLabel::new(m.label.clone(), m.frequency))
        .collect()
}

impl Settings {
    /// Resolve `flags` with `file` (if any) taking precedence.
    pub fn resolve(flags: AnalysisConfig, file: Option<AnalysisConfig>) -> Result<Settings> {
        let c = match file {
            Some(f) => f.or(flags),
            None => flags,
        };
        let [lo, hi] = c.band.unwrap_or([1.0, 9.0]);
        let band = Band::new(lo, hi)?;
        let mut ssi = SsiConfig::default();
        if let Some([min, max, step]) = c.orders {
            ssi.min_order = min;
            ssi.max_order = max;
            ssi.order_step = step;
        }
        ssi.orders()?;
        ssi.hankel_rows = c.hankel_rows;
        if let Some(s) = c.min_support {
            ssi.min_support = s;
        }
        let modes = c.modes.unwrap_or_else(reference_modes);
        if modes.is_empty() {
            bail!("modes must not be empty");
        }
        let mut decay = DecayOptions {
            neighbor_frequencies: modes.iter().map(|m| m.nominal).collect(),
            ..DecayOptions::default()
        };
        if let Some(w) = c.band_half_width {
            decay.band_half_width = w;
        }
        if let Some(s) = c.filter_sections {
            decay.filter_sections = s;
        }
        let law = match (c.fl, c.ff) {
            (Some(_), Some(_)) => bail!("give either fl or ff, not both"),
            (Some(fl), None) => ScalingLaw::from_geometry(fl)?,
            (None, Some(ff)) => ScalingLaw::stated(REFERENCE_GEOMETRY_FACTOR, ff)?,
            (None, None) => ScalingLaw::reference_stated(),
        };
        let n_periods = c.n_periods.unwrap_or(5);
        if n_periods == 0 {
            bail!("n_periods must be at least 1");
        }
        Ok(Settings {
            band,
            window: c.window.unwrap_or_default(),
            prominence: c.prominence.unwrap_or(0.05),
            max_peaks: c.max_peaks.unwrap_or(4),
            match_tolerance: c.match_tolerance.unwrap_or(DEFAULT_MATCH_TOLERANCE),
            ssi,
            n_periods,
            decay,
            law,
            modes,
            seed: c.seed.unwrap_or(0),
        })
    }

    /// Label of the configured mode closest to `frequency`.
    pub fn nearest_mode(&self, frequency: f64) -> &ModeLabel {
        self.modes
            .iter()
            .min_by(|a, b| {
                (a.nominal - frequency)
                    .abs()
                    .total_cmp(&(b.nominal - frequency).abs())
            })
            .expect("modes are non-empty")
    }
}
