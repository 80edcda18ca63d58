//! Damping from free-decay responses via the logarithmic decrement.
//!
//! For two oscillation maxima `a1` and `a2` that are `n` periods apart the
//! decrement is `ln(a1 / a2) / n` and the damping ratio follows as
//! `decrement / (2 pi)`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::BandPass;
use crate::records::{MeasurementSet, TimeSeriesRecord};
use crate::spectral::Band;

/// Annotation key carrying the time (s) at which the exciter was switched
/// off.
pub const EXCITATION_OFF_KEY: &str = "excitation_off_s";

/// Periods of the target mode skipped after the exciter is switched off.
pub const SETTLE_PERIODS: f64 = 2.0;
/// Consecutive periods of strictly falling envelope that mark a decay.
const MIN_DECAY_PERIODS: usize = 5;
/// Smallest total envelope drop over those periods.
const MIN_DECAY_DROP: f64 = 1e-3;
/// Maxima below this fraction of the segment's peak magnitude are noise.
const NOISE_FLOOR_FRACTION: f64 = 0.05;

/// Free-vibration part of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySegment {
    pub channel: String,
    pub t_start: f64,
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Pass band applied before segmentation, if any.
    pub band_filter: Option<Band>,
}

impl DecaySegment {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    fn time_of(&self, index: f64) -> f64 {
        self.t_start + index / self.sample_rate
    }
}

/// Two maxima `n_periods` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPair {
    pub t1: f64,
    pub a1: f64,
    pub t2: f64,
    pub a2: f64,
    pub n_periods: u32,
}

/// Locate the free-vibration part of every channel.
///
/// With an excitation-off hint the segment starts [`SETTLE_PERIODS`]
/// periods of the target mode after the hint. Without one, each channel's
/// per-period envelope is searched from its global maximum for the first
/// point after which it keeps falling for at least five periods.
pub fn detect_free_decay(
    record: &TimeSeriesRecord,
    target_frequency: f64,
    excitation_off_hint: Option<f64>,
) -> Result<Vec<DecaySegment>> {
    if !(target_frequency > 0.0) {
        return Err(Error::invalid("target frequency must be positive"));
    }
    let fs = record.sample_rate();
    let n = record.n_samples();
    let make = |c: usize, k: usize| DecaySegment {
        channel: record.channels()[c].id.clone(),
        t_start: record.time_of(k),
        samples: record.channel(c)[k..].to_vec(),
        sample_rate: fs,
        band_filter: None,
    };

    if let Some(hint) = excitation_off_hint {
        if hint < record.start_time() || hint >= record.end_time() {
            return Err(Error::invalid(format!(
                "excitation-off hint {hint} s lies outside the record [{}, {}) s",
                record.start_time(),
                record.end_time()
            )));
        }
        let start = hint + SETTLE_PERIODS / target_frequency;
        let k = ((start - record.start_time()) * fs - 1e-9).ceil().max(0.0) as usize;
        if k + 2 > n {
            return Err(Error::SegmentTooShort {
                duration: record.end_time() - start,
                required: SETTLE_PERIODS / target_frequency,
            });
        }
        return Ok((0..record.n_channels()).map(|c| make(c, k)).collect());
    }

    let period = fs / target_frequency;
    let segments: Vec<DecaySegment> = (0..record.n_channels())
        .filter_map(|c| decay_onset(record.channel(c), period).map(|k| make(c, k)))
        .collect();
    if segments.is_empty() {
        return Err(Error::NoDecayDetected);
    }
    Ok(segments)
}

/// Sample index where a sustained envelope decay begins.
fn decay_onset(x: &[f64], period: f64) -> Option<usize> {
    let env = period_envelope(x, period);
    let (peak_window, peak) = env
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(j, &(_, v))| (j, v))?;
    if !(peak > 0.0) {
        return None;
    }
    for j in peak_window..env.len().saturating_sub(MIN_DECAY_PERIODS) {
        if env[j].1 < 0.5 * peak {
            break;
        }
        let run = &env[j..=j + MIN_DECAY_PERIODS];
        let falling = run.windows(2).all(|w| w[1].1 < w[0].1);
        if falling && run[MIN_DECAY_PERIODS].1 <= run[0].1 * (1.0 - MIN_DECAY_DROP) {
            return Some(run[0].0);
        }
    }
    None
}

/// Per-period maxima of `|x|` as `(window start index, refined peak)`.
fn period_envelope(x: &[f64], period: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut j = 0usize;
    loop {
        let lo = (j as f64 * period).round() as usize;
        let hi = (((j + 1) as f64) * period).round() as usize;
        if hi > x.len() || hi <= lo {
            break;
        }
        let (i, _) = x[lo..hi]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty window");
        let i = lo + i;
        let refined = if i > 0 && i + 1 < x.len() {
            parabolic_peak(x[i - 1].abs(), x[i].abs(), x[i + 1].abs()).1
        } else {
            x[i].abs()
        };
        out.push((lo, refined));
        j += 1;
    }
    out
}

/// Vertex `(offset, value)` of the parabola through three equally spaced
/// samples around a maximum.
fn parabolic_peak(left: f64, center: f64, right: f64) -> (f64, f64) {
    let denom = left - 2.0 * center + right;
    if denom >= 0.0 {
        return (0.0, center);
    }
    let offset = (0.5 * (left - right) / denom).clamp(-0.5, 0.5);
    (offset, center - 0.25 * (left - right) * offset)
}

/// Interpolated local maxima `(time, amplitude)` above `floor`.
fn local_maxima(segment: &DecaySegment, floor: f64) -> Vec<(f64, f64)> {
    let x = &segment.samples;
    let mut out = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            let (offset, value) = parabolic_peak(x[i - 1], x[i], x[i + 1]);
            if value > floor {
                out.push((segment.time_of(i as f64 + offset), value));
            }
        }
    }
    out
}

/// First maximum above the noise floor and the maximum nearest to
/// `n_periods` target periods later.
pub fn extract_peak_pair(
    segment: &DecaySegment,
    target_frequency: f64,
    n_periods: u32,
) -> Result<PeakPair> {
    if n_periods == 0 {
        return Err(Error::invalid("n_periods must be at least 1"));
    }
    if !(target_frequency > 0.0) {
        return Err(Error::invalid("target frequency must be positive"));
    }
    let required = (n_periods as f64 + 1.0) / target_frequency;
    if segment.duration() < required {
        return Err(Error::SegmentTooShort {
            duration: segment.duration(),
            required,
        });
    }
    let peak_abs = segment.samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let maxima = local_maxima(segment, NOISE_FLOOR_FRACTION * peak_abs);
    let needed = n_periods as usize + 1;
    if maxima.len() < needed {
        return Err(Error::TooFewMaxima {
            found: maxima.len(),
            required: needed,
        });
    }
    let (t1, a1) = maxima[0];
    let target_time = t1 + n_periods as f64 / target_frequency;
    let &(t2, a2) = maxima[1..]
        .iter()
        .min_by(|a, b| {
            (a.0 - target_time)
                .abs()
                .total_cmp(&(b.0 - target_time).abs())
        })
        .expect("at least two maxima");
    Ok(PeakPair {
        t1,
        a1,
        t2,
        a2,
        n_periods,
    })
}

/// `(1/n) ln(a1 / a2)`.
pub fn log_decrement(pair: &PeakPair) -> Result<f64> {
    if !(pair.a2 > 0.0) {
        return Err(Error::NonPositiveAmplitude(pair.a2));
    }
    if !(pair.a1 > 0.0) {
        return Err(Error::NonPositiveAmplitude(pair.a1));
    }
    if pair.n_periods == 0 {
        return Err(Error::invalid("n_periods must be at least 1"));
    }
    Ok((pair.a1 / pair.a2).ln() / pair.n_periods as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingRelation {
    /// `zeta = decrement / (2 pi)`.
    #[default]
    SmallDamping,
    /// `zeta = decrement / sqrt(4 pi^2 + decrement^2)`.
    Exact,
}

pub fn damping_from_decrement(decrement: f64) -> f64 {
    decrement / (2.0 * PI)
}

pub fn damping_with(decrement: f64, relation: DampingRelation) -> f64 {
    match relation {
        DampingRelation::SmallDamping => damping_from_decrement(decrement),
        DampingRelation::Exact => decrement / (4.0 * PI * PI + decrement * decrement).sqrt(),
    }
}

/// Mode whose damping is to be estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTarget {
    pub label: String,
    pub frequency: f64,
}

impl DecayTarget {
    pub fn new(label: impl Into<String>, frequency: f64) -> Self {
        DecayTarget {
            label: label.into(),
            frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayOptions {
    /// Half width (Hz) of the band-pass around the target frequency.
    pub band_half_width: f64,
    pub filter_sections: usize,
    /// Overrides the record's [`EXCITATION_OFF_KEY`] annotation.
    pub excitation_off_hint: Option<f64>,
    pub relation: DampingRelation,
    /// Minimum coefficient of determination of the log-envelope line for a
    /// channel to count as responsive.
    pub min_fit_r2: f64,
    /// Frequencies of other modes near the target. The pass band shrinks
    /// to 0.4 of the gap to the closest one so that it does not beat
    /// with the target.
    pub neighbor_frequencies: Vec<f64>,
}

impl DecayOptions {
    /// Pass band around `target_frequency` after narrowing for neighbors.
    pub fn band_for(&self, target_frequency: f64) -> Result<Band> {
        let gap = self
            .neighbor_frequencies
            .iter()
            .map(|n| (n - target_frequency).abs())
            .filter(|g| *g > 0.0)
            .fold(f64::INFINITY, f64::min);
        let half = self.band_half_width.min(0.4 * gap);
        Band::new(
            (target_frequency - half).max(target_frequency * 0.05),
            target_frequency + half,
        )
    }
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            band_half_width: 0.5,
            filter_sections: 2,
            excitation_off_hint: None,
            relation: DampingRelation::SmallDamping,
            min_fit_r2: 0.9,
            neighbor_frequencies: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDamping {
    pub record: usize,
    pub channel: String,
    pub pair: PeakPair,
    pub decrement: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedChannel {
    pub record: usize,
    pub channel: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampingEstimate {
    pub mode_label: String,
    pub per_channel: Vec<ChannelDamping>,
    /// Mean over channels, one entry per record that yielded a value.
    pub per_record_mean: Vec<f64>,
    /// Mean of the per-record means.
    pub mean_zeta: f64,
    pub rejected: Vec<RejectedChannel>,
}

impl DampingEstimate {
    /// CSV: `mode,channel,t1_s,a1,t2_s,a2,n,lambda,zeta` plus one `mean` row.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "mode,channel,t1_s,a1,t2_s,a2,n,lambda,zeta")?;
        }
        let multi = self
            .per_channel
            .iter()
            .any(|c| c.record != self.per_channel[0].record);
        for c in &self.per_channel {
            let channel = if multi {
                format!("{}#{}", c.channel, c.record)
            } else {
                c.channel.clone()
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.mode_label,
                channel,
                c.pair.t1,
                c.pair.a1,
                c.pair.t2,
                c.pair.a2,
                c.pair.n_periods,
                c.decrement,
                c.zeta
            )?;
        }
        writeln!(out, "{},mean,,,,,,,{}", self.mode_label, self.mean_zeta)
    }
}

/// Band-pass every channel of a record around `band`.
pub fn filter_record(
    record: &TimeSeriesRecord,
    band: Band,
    sections: usize,
) -> Result<TimeSeriesRecord> {
    let bp = BandPass::design(band, record.sample_rate(), sections)?;
    record.with_columns(record.columns().iter().map(|c| bp.filtfilt(c)).collect())
}

/// Slope and coefficient of determination of `ln(envelope)` per period,
/// fitted from the segment start until the envelope first falls below a
/// tenth of its maximum.
pub fn envelope_fit(segment: &DecaySegment, target_frequency: f64) -> Option<(f64, f64, usize)> {
    let env = period_envelope(&segment.samples, segment.sample_rate / target_frequency);
    let top = env.iter().map(|e| e.1).fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let used: Vec<f64> = env
        .iter()
        .map(|e| e.1)
        .take_while(|&v| v >= 0.1 * top)
        .map(f64::ln)
        .collect();
    let m = used.len();
    if m < 3 {
        return None;
    }
    let mx = (m - 1) as f64 / 2.0;
    let my = used.iter().sum::<f64>() / m as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, y) in used.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        0.0
    };
    Some((slope, r2, m))
}

/// Minimum number of envelope periods in a responsive channel's fit.
const MIN_FIT_PERIODS: usize = 10;

/// A fitted envelope decaying faster than this fraction of the band-pass
/// ring-down rate is taken as the filter's own transient, typically the
/// forced response of another mode cut off at switch-off.
const MAX_RINGDOWN_FRACTION: f64 = 1.0 / 3.0;

/// Damping for one mode over all records of a measurement set.
///
/// Per channel: band-pass around the target, locate the free decay, skip
/// the filter's settling time, pick the peak pair, take the decrement and convert. Channels whose filtered
/// decay is not a clean exponential (see [`envelope_fit`]), or decays about
/// as fast as the filter rings, are rejected.
/// Channel values are averaged per record, then over records.
pub fn estimate_damping(
    records: &MeasurementSet,
    target: &DecayTarget,
    n_periods: u32,
    options: &DecayOptions,
) -> Result<DampingEstimate> {
    let f = target.frequency;
    let band = options.band_for(f)?;
    let mut per_channel = Vec::new();
    let mut rejected = Vec::new();
    let mut per_record_mean = Vec::new();
    for (ri, record) in records.records().iter().enumerate() {
        let hint = match options.excitation_off_hint {
            Some(h) => Some(h),
            None => record
                .annotation(EXCITATION_OFF_KEY)
                .and_then(|v| v.parse::<f64>().ok()),
        };
        let mut reject = |channel: &str, reason: String| {
            rejected.push(RejectedChannel {
                record: ri,
                channel: channel.to_string(),
                reason,
            })
        };
        let bp = BandPass::design(band, record.sample_rate(), options.filter_sections)?;
        let filtered =
            record.with_columns(record.columns().iter().map(|c| bp.filtfilt(c)).collect())?;
        let settle = (bp.settling_time() * record.sample_rate()).ceil() as usize;
        let segments = match detect_free_decay(&filtered, f, hint) {
            Ok(s) => s,
            Err(e) => {
                reject("*", e.to_string());
                continue;
            }
        };
        let mut zetas = Vec::new();
        for mut seg in segments {
            // the filter smooths the envelope corner at the onset
            let skip = settle.min(seg.samples.len());
            seg.samples.drain(..skip);
            seg.t_start += skip as f64 / seg.sample_rate;
            seg.band_filter = Some(band);
            let ringdown = std::f64::consts::PI * (band.hi - band.lo);
            match envelope_fit(&seg, f) {
                Some((slope, _, _)) if -slope * f > MAX_RINGDOWN_FRACTION * ringdown => {
                    reject(
                        &seg.channel,
                        format!(
                            "decay rate {:.3} 1/s close to the filter ring-down {ringdown:.3} 1/s",
                            -slope * f
                        ),
                    );
                    continue;
                }
                Some((slope, r2, m))
                    if slope < 0.0 && r2 >= options.min_fit_r2 && m >= MIN_FIT_PERIODS => {}
                Some((slope, r2, m)) => {
                    reject(
                        &seg.channel,
                        format!("no clean decay (slope {slope:.3e}, r2 {r2:.3}, {m} periods)"),
                    );
                    continue;
                }
                None => {
                    reject(&seg.channel, "no response in the pass band".into());
                    continue;
                }
            }
            let outcome = extract_peak_pair(&seg, f, n_periods).and_then(|pair| {
                let decrement = log_decrement(&pair)?;
                Ok((pair, decrement))
            });
            match outcome {
                Ok((pair, decrement)) if decrement > 0.0 => {
                    let zeta = damping_with(decrement, options.relation);
                    zetas.push(zeta);
                    per_channel.push(ChannelDamping {
                        record: ri,
                        channel: seg.channel.clone(),
                        pair,
                        decrement,
                        zeta,
                    });
                }
                Ok((_, decrement)) => {
                    reject(&seg.channel, format!("non-positive decrement {decrement}"))
                }
                Err(e) => reject(&seg.channel, e.to_string()),
            }
        }
        if !zetas.is_empty() {
            per_record_mean.push(zetas.iter().sum::<f64>() / zetas.len() as f64);
        }
    }
    if per_record_mean.is_empty() {
        return Err(Error::NoUsableChannel(target.label.clone()));
    }
    let mean_zeta = per_record_mean.iter().sum::<f64>() / per_record_mean.len() as f64;
    Ok(DampingEstimate {
        mode_label: target.label.clone(),
        per_channel,
        per_record_mean,
        mean_zeta,
        rejected,
    })
}
