//! Covariance-driven stochastic subspace identification.
//!
//! The pipeline runs output covariances -> block Hankel SVD -> balanced
//! realization `(A, C)` -> discrete eigenvalues -> modal poles. Sweeping the
//! model order yields a stabilization diagram; poles that stay put across
//! orders are clustered into modal estimates.
//!
//! The method assumes broadband (white-noise-like) excitation. Harmonic
//! forcing breaks that assumption, so records from harmonic shakers should
//! be restricted to their free-decay part before identification.

mod covariance;
mod realization;
mod stabilization;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use covariance::{
    estimate_covariances, estimate_covariances_with, CovarianceNormalization, CovarianceSequence,
};
pub use realization::{
    discrete_pole, modal_parameters, poles_from_realization, realize_system, PoleExtraction,
    Realization, Realizer,
};
pub use stabilization::{
    build_stabilization_diagram, classify, cluster_stable_poles, mac, FailedOrder, IdentifiedMode,
    ModalResult, StabilityCriteria, StabilityFlags, StabilityRule, StabilizationDiagram,
};

use crate::error::{Error, Result};
use crate::records::TimeSeriesRecord;

/// One modal pole at one model order. Stored once per conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleEstimate {
    pub frequency: f64,
    pub damping_ratio: f64,
    /// Discrete-time eigenvalue the pole was derived from.
    pub eigenvalue: Complex64,
    /// `C v`, scaled so the largest-magnitude entry is `1 + 0i`.
    pub mode_shape: Vec<Complex64>,
    pub model_order: usize,
    pub stable_frequency: bool,
    pub stable_damping: bool,
    pub stable_shape: bool,
    pub fully_stable: bool,
}

/// Parameters for a full identification run on one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsiConfig {
    pub min_order: usize,
    pub max_order: usize,
    pub order_step: usize,
    /// Block rows of the Hankel matrix; derived from the order range and
    /// channel count when `None`.
    pub hankel_rows: Option<usize>,
    pub criteria: StabilityCriteria,
    pub min_support: usize,
    /// Largest frequency gap (Hz) inside one pole cluster.
    pub freq_gap: f64,
    pub normalization: CovarianceNormalization,
}

impl Default for SsiConfig {
    fn default() -> Self {
        SsiConfig {
            min_order: 2,
            max_order: 40,
            order_step: 2,
            hankel_rows: None,
            criteria: StabilityCriteria::default(),
            min_support: 5,
            freq_gap: 0.05,
            normalization: CovarianceNormalization::Unbiased,
        }
    }
}

/// Lower bound on the default block-row count. At 200 Hz this spans 0.2 s
/// of lags per Hankel side.
pub const MIN_HANKEL_ROWS: usize = 40;

/// Enough block rows for `max_order` states, and at least
/// [`MIN_HANKEL_ROWS`].
pub fn default_hankel_rows(max_order: usize, n_channels: usize) -> usize {
    (max_order.div_ceil(n_channels.max(1)) + 1).max(MIN_HANKEL_ROWS)
}

impl SsiConfig {
    /// Configuration for free-decay records. The `1/(N-i)` scaling of the
    /// unbiased estimator inflates late lags of a decaying signal and
    /// biases damping low, so free decays use the `1/N` scaling.
    pub fn free_decay() -> Self {
        SsiConfig {
            normalization: CovarianceNormalization::Biased,
            ..SsiConfig::default()
        }
    }

    pub fn orders(&self) -> Result<Vec<usize>> {
        if self.order_step == 0 || !self.order_step.is_multiple_of(2) {
            return Err(Error::invalid("order step must be a positive even number"));
        }
        if self.min_order == 0
            || !self.min_order.is_multiple_of(2)
            || self.max_order < self.min_order
        {
            return Err(Error::invalid("order range must be even and increasing"));
        }
        Ok((self.min_order..=self.max_order)
            .step_by(self.order_step)
            .collect())
    }

    pub fn hankel_rows_for(&self, n_channels: usize) -> usize {
        self.hankel_rows
            .unwrap_or_else(|| default_hankel_rows(self.max_order, n_channels))
    }
}

#[derive(Debug, Clone)]
pub struct SsiOutcome {
    pub diagram: StabilizationDiagram,
    pub modes: ModalResult,
    pub hankel_rows: usize,
}

/// Covariances, order sweep and clustering in one call.
pub fn identify(record: &TimeSeriesRecord, config: &SsiConfig) -> Result<SsiOutcome> {
    let orders = config.orders()?;
    let hankel_rows = config.hankel_rows_for(record.n_channels());
    let cov = estimate_covariances_with(record, 2 * hankel_rows - 1, config.normalization)?;
    let diagram = build_stabilization_diagram(&cov, &orders, hankel_rows, &config.criteria)?;
    let modes = cluster_stable_poles(&diagram, config.min_support, config.freq_gap)?;
    Ok(SsiOutcome {
        diagram,
        modes,
        hankel_rows,
    })
}
