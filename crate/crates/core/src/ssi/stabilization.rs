use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::covariance::CovarianceSequence;
use super::realization::{poles_from_realization, Realizer};
use super::PoleEstimate;
use crate::error::{Error, Result};
use crate::stats;

/// Relative slack applied to the stability thresholds so that exact
/// boundary values are classified as stable despite rounding.
const BOUNDARY_SLACK: f64 = 1e-9;

/// Modal assurance criterion `|a^H b|^2 / ((a^H a)(b^H b))`.
pub fn mac(shape_a: &[Complex64], shape_b: &[Complex64]) -> Result<f64> {
    if shape_a.len() != shape_b.len() || shape_a.is_empty() {
        return Err(Error::invalid(
            "mode shapes must have equal, non-zero length",
        ));
    }
    let cross: Complex64 = shape_a.iter().zip(shape_b).map(|(a, b)| a.conj() * b).sum();
    let na: f64 = shape_a.iter().map(|a| a.norm_sqr()).sum();
    let nb: f64 = shape_b.iter().map(|b| b.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateShape);
    }
    Ok((cross.norm_sqr() / (na * nb)).min(1.0))
}

/// How the three per-pole checks combine into a "fully stable" verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityRule {
    /// Frequency, damping and MAC must all pass.
    #[default]
    All,
    /// Damping must pass, plus frequency or MAC.
    DampingAndFrequencyOrShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCriteria {
    /// Maximum relative frequency change between consecutive orders.
    pub df_rel: f64,
    /// Maximum relative damping change between consecutive orders.
    pub dzeta_rel: f64,
    /// Minimum MAC between consecutive orders.
    pub mac_min: f64,
    #[serde(default)]
    pub rule: StabilityRule,
}

impl Default for StabilityCriteria {
    fn default() -> Self {
        StabilityCriteria {
            df_rel: 0.01,
            dzeta_rel: 0.05,
            mac_min: 0.99,
            rule: StabilityRule::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilityFlags {
    pub frequency: bool,
    pub damping: bool,
    pub shape: bool,
}

impl StabilityFlags {
    pub fn fully_stable(&self, rule: StabilityRule) -> bool {
        match rule {
            StabilityRule::All => self.frequency && self.damping && self.shape,
            StabilityRule::DampingAndFrequencyOrShape => {
                self.damping && (self.frequency || self.shape)
            }
        }
    }
}

/// Compare a pole against its counterpart at the previous model order.
pub fn classify(
    previous: &PoleEstimate,
    current: &PoleEstimate,
    criteria: &StabilityCriteria,
) -> StabilityFlags {
    let frequency = relative_change(previous.frequency, current.frequency)
        .is_some_and(|r| r <= criteria.df_rel * (1.0 + BOUNDARY_SLACK));
    let damping = relative_change(previous.damping_ratio, current.damping_ratio)
        .is_some_and(|r| r <= criteria.dzeta_rel * (1.0 + BOUNDARY_SLACK));
    let shape = mac(&previous.mode_shape, &current.mode_shape)
        .is_ok_and(|m| m >= criteria.mac_min * (1.0 - BOUNDARY_SLACK));
    StabilityFlags {
        frequency,
        damping,
        shape,
    }
}

/// `|current - previous| / |previous|`; zero when both are zero, `None`
/// when only the reference is zero.
fn relative_change(previous: f64, current: f64) -> Option<f64> {
    if previous == 0.0 {
        return (current == 0.0).then_some(0.0);
    }
    Some((current - previous).abs() / previous.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedOrder {
    pub order: usize,
    pub reason: String,
}

/// Poles identified over a sweep of model orders, with stability flags
/// relative to the preceding order.
#[derive(Debug, Clone)]
pub struct StabilizationDiagram {
    pub orders: Vec<usize>,
    pub poles: Vec<PoleEstimate>,
    pub criteria: StabilityCriteria,
    pub failed_orders: Vec<FailedOrder>,
}

impl StabilizationDiagram {
    pub fn poles_at(&self, order: usize) -> impl Iterator<Item = &PoleEstimate> {
        self.poles.iter().filter(move |p| p.model_order == order)
    }

    pub fn fully_stable(&self) -> impl Iterator<Item = &PoleEstimate> {
        self.poles.iter().filter(|p| p.fully_stable)
    }

    /// CSV: `order,frequency_hz,damping_ratio,stable_f,stable_zeta,stable_mac,fully_stable`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "order,frequency_hz,damping_ratio,stable_f,stable_zeta,stable_mac,fully_stable"
        )?;
        for p in &self.poles {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.model_order,
                p.frequency,
                p.damping_ratio,
                p.stable_frequency as u8,
                p.stable_damping as u8,
                p.stable_shape as u8,
                p.fully_stable as u8
            )?;
        }
        Ok(())
    }
}

/// Realize the system at every order in `orders` and flag each pole against
/// the nearest-in-frequency pole of the previous successful order.
///
/// Orders that fail to realize are recorded in `failed_orders` and skipped.
pub fn build_stabilization_diagram(
    cov: &CovarianceSequence,
    orders: &[usize],
    hankel_rows: usize,
    criteria: &StabilityCriteria,
) -> Result<StabilizationDiagram> {
    if orders.is_empty() {
        return Err(Error::invalid("order sweep is empty"));
    }
    for w in orders.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("orders must be strictly increasing"));
        }
    }
    if let Some(&bad) = orders.iter().find(|&&o| o == 0 || o % 2 != 0) {
        return Err(Error::InvalidOrder {
            order: bad,
            reason: "orders must be positive and even".into(),
        });
    }
    let realizer = Realizer::new(cov, hankel_rows)?;
    let mut poles = Vec::new();
    let mut failed_orders = Vec::new();
    let mut previous: Option<Vec<PoleEstimate>> = None;
    for &order in orders {
        let extracted = realizer
            .realize(order)
            .and_then(|r| poles_from_realization(&r, cov.sample_rate()));
        match extracted {
            Ok(ex) => {
                let mut current = ex.poles;
                if let Some(prev) = &previous {
                    flag_against(prev, &mut current, criteria);
                }
                poles.extend(current.iter().cloned());
                previous = Some(current);
            }
            Err(e) => failed_orders.push(FailedOrder {
                order,
                reason: e.to_string(),
            }),
        }
    }
    Ok(StabilizationDiagram {
        orders: orders.to_vec(),
        poles,
        criteria: *criteria,
        failed_orders,
    })
}

fn flag_against(
    previous: &[PoleEstimate],
    current: &mut [PoleEstimate],
    criteria: &StabilityCriteria,
) {
    for pole in current.iter_mut() {
        let Some(partner) = nearest_partner(previous, pole) else {
            continue;
        };
        let flags = classify(partner, pole, criteria);
        pole.stable_frequency = flags.frequency;
        pole.stable_damping = flags.damping;
        pole.stable_shape = flags.shape;
        pole.fully_stable = flags.fully_stable(criteria.rule);
    }
}

/// Nearest pole in frequency; ties go to the higher MAC.
fn nearest_partner<'a>(
    previous: &'a [PoleEstimate],
    pole: &PoleEstimate,
) -> Option<&'a PoleEstimate> {
    let best = previous
        .iter()
        .map(|p| (p.frequency - pole.frequency).abs())
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    let tie = 1e-12 * pole.frequency.abs().max(1.0);
    previous
        .iter()
        .filter(|p| (p.frequency - pole.frequency).abs() <= best + tie)
        .max_by(|a, b| {
            let ma = mac(&a.mode_shape, &pole.mode_shape).unwrap_or(0.0);
            let mb = mac(&b.mode_shape, &pole.mode_shape).unwrap_or(0.0);
            ma.total_cmp(&mb)
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifiedMode {
    pub label: String,
    pub frequency: f64,
    pub frequency_std: f64,
    pub damping_ratio: f64,
    pub damping_std: f64,
    #[serde(skip)]
    pub mode_shape: Vec<Complex64>,
    /// Number of fully stable poles in the cluster.
    pub support: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModalResult {
    pub modes: Vec<IdentifiedMode>,
}

impl ModalResult {
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode with frequency closest to `frequency`.
    pub fn nearest(&self, frequency: f64) -> Option<&IdentifiedMode> {
        self.modes.iter().min_by(|a, b| {
            (a.frequency - frequency)
                .abs()
                .total_cmp(&(b.frequency - frequency).abs())
        })
    }

    /// CSV: `label,frequency_hz,frequency_std_hz,damping_ratio,damping_std,support`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "label,frequency_hz,frequency_std_hz,damping_ratio,damping_std,support"
        )?;
        for m in &self.modes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                m.label, m.frequency, m.frequency_std, m.damping_ratio, m.damping_std, m.support
            )?;
        }
        Ok(())
    }
}

/// Group fully stable poles by single linkage in frequency (consecutive gap
/// at most `freq_gap`) and keep clusters with at least `min_support` poles.
pub fn cluster_stable_poles(
    diagram: &StabilizationDiagram,
    min_support: usize,
    freq_gap: f64,
) -> Result<ModalResult> {
    if min_support < 2 {
        return Err(Error::invalid("min_support must be at least 2"));
    }
    if !(freq_gap > 0.0) {
        return Err(Error::invalid("freq_gap must be positive"));
    }
    let mut stable: Vec<&PoleEstimate> = diagram.fully_stable().collect();
    stable.sort_by(|a, b| {
        a.frequency
            .total_cmp(&b.frequency)
            .then(a.model_order.cmp(&b.model_order))
    });

    let mut clusters: Vec<Vec<&PoleEstimate>> = Vec::new();
    for p in stable {
        match clusters.last_mut() {
            Some(c) if p.frequency - c[c.len() - 1].frequency <= freq_gap => c.push(p),
            _ => clusters.push(vec![p]),
        }
    }

    let mut modes = Vec::new();
    for mut cluster in clusters.into_iter().filter(|c| c.len() >= min_support) {
        let freqs: Vec<f64> = cluster.iter().map(|p| p.frequency).collect();
        let zetas: Vec<f64> = cluster.iter().map(|p| p.damping_ratio).collect();
        cluster.sort_by_key(|p| p.model_order);
        let median = cluster[(cluster.len() - 1) / 2];
        modes.push(IdentifiedMode {
            label: format!("mode_{}", modes.len() + 1),
            frequency: stats::mean(&freqs).unwrap_or_default(),
            frequency_std: stats::sample_std(&freqs).unwrap_or_default(),
            damping_ratio: stats::mean(&zetas).unwrap_or_default(),
            damping_std: stats::sample_std(&zetas).unwrap_or_default(),
            mode_shape: median.mode_shape.clone(),
            support: cluster.len(),
        });
    }
    Ok(ModalResult { modes })
}
