//! Magnitude spectra, peak picking and frequency statistics for
//! natural-frequency identification.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::TimeSeriesRecord;
use crate::stats;

/// Default tolerance for assigning peaks to nominal mode frequencies (Hz).
///
/// Below the smallest gap between the Lillebælt model modes (0.178 Hz).
pub const DEFAULT_MATCH_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NyquistVerdict {
    Ok,
    Undersampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyquistCheck {
    pub verdict: NyquistVerdict,
    /// Twice the highest expected frequency (Hz).
    pub minimum_rate: f64,
}

/// Sampling-theorem check: the rate must be at least twice the highest
/// expected frequency (boundary inclusive).
pub fn check_nyquist(sample_rate: f64, f_max_expected: f64) -> Result<NyquistCheck> {
    if !(sample_rate > 0.0 && f_max_expected > 0.0) {
        return Err(Error::invalid(
            "sample rate and expected frequency must be positive",
        ));
    }
    let minimum_rate = 2.0 * f_max_expected;
    let verdict = if sample_rate >= minimum_rate {
        NyquistVerdict::Ok
    } else {
        NyquistVerdict::Undersampled
    };
    Ok(NyquistCheck {
        verdict,
        minimum_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => {
                let denom = (n - 1) as f64;
                (0..n)
                    .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / denom).cos()))
                    .collect()
            }
        }
    }
}

/// A frequency band `[lo, hi]` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::invalid(format!("invalid band [{lo}, {hi}]")));
        }
        Ok(Band { lo, hi })
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f <= self.hi
    }
}

/// One-sided magnitude spectrum of every channel of a record, normalized
/// per channel to the largest bin inside `normalized_band`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    channel_ids: Vec<String>,
    frequencies: Vec<f64>,
    /// `magnitudes[c][k]`, normalized.
    magnitudes: Vec<Vec<f64>>,
    /// Per-channel divisor applied during normalization.
    scales: Vec<f64>,
    resolution: f64,
    padded_length: usize,
    sample_rate: f64,
    window: Window,
    normalized_band: Band,
}

impl Spectrum {
    pub fn channel_ids(&self) -> &[String] {
        &self.channel_ids
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn magnitudes(&self, channel: usize) -> &[f64] {
        &self.magnitudes[channel]
    }

    /// Spectrum of `channel` before normalization, `|X_k|`.
    pub fn raw_magnitudes(&self, channel: usize) -> Vec<f64> {
        let s = self.scales[channel];
        self.magnitudes[channel].iter().map(|m| m * s).collect()
    }

    pub fn scale(&self, channel: usize) -> f64 {
        self.scales[channel]
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn padded_length(&self) -> usize {
        self.padded_length
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn normalized_band(&self) -> Band {
        self.normalized_band
    }

    pub fn n_channels(&self) -> usize {
        self.channel_ids.len()
    }

    /// Energy of the unnormalized one-sided spectrum, scaled so that it
    /// equals the time-domain energy for a rectangular window.
    pub fn energy(&self, channel: usize) -> f64 {
        let raw = self.raw_magnitudes(channel);
        let n = self.padded_length;
        let mut sum = 0.0;
        for (k, m) in raw.iter().enumerate() {
            let both_sides = k != 0 && !(n.is_multiple_of(2) && k == n / 2);
            sum += if both_sides { 2.0 } else { 1.0 } * m * m;
        }
        sum / n as f64
    }

    /// CSV: `frequency_hz,<channel_id>...` with normalized magnitudes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "frequency_hz")?;
        for id in &self.channel_ids {
            write!(out, ",{id}")?;
        }
        writeln!(out)?;
        for (k, f) in self.frequencies.iter().enumerate() {
            write!(out, "{f}")?;
            for m in &self.magnitudes {
                write!(out, ",{}", m[k])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// FFT magnitude spectrum of each channel.
///
/// The signal is zero-padded to `zero_pad_to` samples, or to the next power
/// of two when not given. Each channel is divided by its largest magnitude
/// inside `band`.
pub fn compute_spectrum(
    record: &TimeSeriesRecord,
    window: Window,
    band: Band,
    zero_pad_to: Option<usize>,
) -> Result<Spectrum> {
    let n = record.n_samples();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let fs = record.sample_rate();
    let nyquist = fs / 2.0;
    if band.hi > nyquist {
        return Err(Error::BandAboveNyquist {
            hi: band.hi,
            nyquist,
        });
    }
    let padded = match zero_pad_to {
        Some(p) if p < n => {
            return Err(Error::invalid(format!(
                "zero_pad_to {p} is shorter than the record ({n} samples)"
            )))
        }
        Some(p) => p,
        None => n.next_power_of_two(),
    };
    let resolution = fs / padded as f64;
    let n_bins = padded / 2 + 1;
    let frequencies: Vec<f64> = (0..n_bins).map(|k| k as f64 * resolution).collect();
    let in_band: Vec<usize> = (0..n_bins)
        .filter(|&k| band.contains(frequencies[k]))
        .collect();
    if in_band.is_empty() {
        return Err(Error::EmptyBand {
            lo: band.lo,
            hi: band.hi,
        });
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(padded);
    let taper = window.coefficients(n);
    let mut magnitudes = Vec::with_capacity(record.n_channels());
    let mut scales = Vec::with_capacity(record.n_channels());
    let mut buffer = vec![Complex::new(0.0, 0.0); padded];
    for (c, spec) in record.channels().iter().enumerate() {
        buffer.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
        for (z, (x, w)) in buffer.iter_mut().zip(record.channel(c).iter().zip(&taper)) {
            z.re = x * w;
        }
        fft.process(&mut buffer);
        let mut mags: Vec<f64> = buffer[..n_bins].iter().map(|z| z.norm()).collect();
        let peak = in_band.iter().map(|&k| mags[k]).fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::DegenerateSignal(spec.id.clone()));
        }
        mags.iter_mut().for_each(|m| *m /= peak);
        magnitudes.push(mags);
        scales.push(peak);
    }

    Ok(Spectrum {
        channel_ids: record.channels().iter().map(|c| c.id.clone()).collect(),
        frequencies,
        magnitudes,
        scales,
        resolution,
        padded_length: padded,
        sample_rate: fs,
        window,
        normalized_band: band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    pub magnitude: f64,
    pub channel: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub band: Band,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn for_channel<'a>(&'a self, channel: &'a str) -> impl Iterator<Item = &'a Peak> + 'a {
        self.peaks.iter().filter(move |p| p.channel == channel)
    }

    /// CSV: `channel,frequency_hz,magnitude`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "channel,frequency_hz,magnitude")?;
        for p in &self.peaks {
            writeln!(out, "{},{},{}", p.channel, p.frequency, p.magnitude)?;
        }
        Ok(())
    }
}

/// Local maxima of each channel inside `band` with topographic prominence of
/// at least `min_prominence`.
///
/// Peak frequencies are refined by a parabola through the three bins around
/// the maximum; reported magnitudes are the bin values. Each channel keeps
/// at most `max_peaks` of its largest peaks. The result is sorted by
/// frequency.
pub fn pick_peaks(
    spectrum: &Spectrum,
    band: Band,
    min_prominence: f64,
    max_peaks: usize,
) -> Result<PeakSet> {
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(Error::invalid("min_prominence must lie in (0, 1)"));
    }
    let freqs = spectrum.frequencies();
    let (Some(&f_first), Some(&f_last)) = (freqs.first(), freqs.last()) else {
        return Err(Error::EmptyBand {
            lo: band.lo,
            hi: band.hi,
        });
    };
    if band.lo < f_first || band.hi > f_last {
        return Err(Error::invalid(format!(
            "band [{}, {}] Hz is outside the spectrum range [{f_first}, {f_last}] Hz",
            band.lo, band.hi
        )));
    }
    let lo = freqs.partition_point(|&f| f < band.lo);
    let hi = freqs.partition_point(|&f| f <= band.hi);
    if hi <= lo {
        return Err(Error::EmptyBand {
            lo: band.lo,
            hi: band.hi,
        });
    }

    let mut peaks = Vec::new();
    for c in 0..spectrum.n_channels() {
        let m = spectrum.magnitudes(c);
        let mut found: Vec<(usize, f64)> = Vec::new();
        for i in lo.max(1)..hi.min(m.len() - 1) {
            if m[i] > m[i - 1] && m[i] >= m[i + 1] {
                let prom = prominence(&m[lo..hi], i - lo);
                if prom >= min_prominence {
                    found.push((i, m[i]));
                }
            }
        }
        found.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        found.truncate(max_peaks);
        for (i, mag) in found {
            let offset = parabolic_offset(m[i - 1], m[i], m[i + 1]);
            let frequency = (i as f64 + offset) * spectrum.resolution();
            peaks.push(Peak {
                frequency: frequency.clamp(band.lo, band.hi),
                magnitude: mag,
                channel: spectrum.channel_ids()[c].clone(),
            });
        }
    }
    peaks.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(PeakSet { peaks, band })
}

/// Vertex offset (in bins, within ±0.5) of the parabola through three
/// equally spaced points centered on a maximum.
fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = left - 2.0 * center + right;
    if denom == 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// Height of `m[i]` above the higher of the two lowest points separating it
/// from taller terrain (or the slice ends).
fn prominence(m: &[f64], i: usize) -> f64 {
    let h = m[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if m[j] > h {
            break;
        }
        left_min = left_min.min(m[j]);
    }
    let mut right_min = h;
    for &v in &m[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// A mode label with the nominal frequency used to match peaks against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub label: String,
    pub nominal: f64,
}

impl ModeLabel {
    pub fn new(label: impl Into<String>, nominal: f64) -> Self {
        ModeLabel {
            label: label.into(),
            nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyStat {
    pub label: String,
    pub nominal: f64,
    /// Number of peak sets that contributed a frequency.
    pub count: usize,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
}

impl FrequencyStat {
    /// No peak set matched this label.
    pub fn is_missing(&self) -> bool {
        self.count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyStatistics {
    pub modes: Vec<FrequencyStat>,
}

impl FrequencyStatistics {
    pub fn get(&self, label: &str) -> Option<&FrequencyStat> {
        self.modes.iter().find(|m| m.label == label)
    }

    pub fn missing(&self) -> impl Iterator<Item = &FrequencyStat> {
        self.modes.iter().filter(|m| m.is_missing())
    }

    /// CSV: `label,nominal_hz,mean_hz,std_hz,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "label,nominal_hz,mean_hz,std_hz,count")?;
        for m in &self.modes {
            writeln!(
                out,
                "{},{},{},{},{}",
                m.label,
                m.nominal,
                opt(m.mean),
                opt(m.std_dev),
                m.count
            )?;
        }
        Ok(())
    }
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Mean and sample standard deviation of each mode's frequency over a
/// number of measurements.
///
/// Every peak is assigned to the label with the nearest nominal frequency,
/// provided it lies within `match_tolerance`. Each peak set contributes at
/// most one value per label: the frequency of its strongest matching peak.
pub fn aggregate_frequencies(
    peak_sets: &[PeakSet],
    mode_labels: &[ModeLabel],
    match_tolerance: f64,
) -> Result<FrequencyStatistics> {
    if peak_sets.is_empty() {
        return Err(Error::invalid("at least one peak set is required"));
    }
    if !(match_tolerance > 0.0) {
        return Err(Error::invalid("match tolerance must be positive"));
    }
    let mut per_label: Vec<Vec<f64>> = vec![Vec::new(); mode_labels.len()];
    for set in peak_sets {
        let mut best: Vec<Option<&Peak>> = vec![None; mode_labels.len()];
        for p in &set.peaks {
            let nearest = mode_labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i, (p.frequency - l.nominal).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, d)) = nearest {
                if d <= match_tolerance && best[i].is_none_or(|b| p.magnitude > b.magnitude) {
                    best[i] = Some(p);
                }
            }
        }
        for (i, b) in best.into_iter().enumerate() {
            if let Some(p) = b {
                per_label[i].push(p.frequency);
            }
        }
    }
    let modes = mode_labels
        .iter()
        .zip(per_label)
        .map(|(l, values)| FrequencyStat {
            label: l.label.clone(),
            nominal: l.nominal,
            count: values.len(),
            mean: stats::mean(&values),
            std_dev: stats::sample_std(&values),
        })
        .collect();
    Ok(FrequencyStatistics { modes })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    use super::*;
    use crate::records::{ChannelKind, ChannelSpec};

    fn record_from(fs: f64, columns: Vec<Vec<f64>>) -> TimeSeriesRecord {
        let channels = (0..columns.len())
            .map(|c| ChannelSpec::new(format!("ch{c}"), ChannelKind::AccelerationZ, 1.0, 0.0))
            .collect();
        TimeSeriesRecord::new(fs, 0.0, channels, columns, BTreeMap::new()).unwrap()
    }

    fn sine(f: f64, fs: f64, seconds: f64, amp: f64) -> Vec<f64> {
        let n = (seconds * fs) as usize;
        (0..n)
            .map(|k| amp * (2.0 * PI * f * k as f64 / fs).sin())
            .collect()
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
    }

    #[test]
    fn nyquist_cases() {
        let c = check_nyquist(200.0, 8.0).unwrap();
        assert_eq!(c.verdict, NyquistVerdict::Ok);
        assert_eq!(c.minimum_rate, 16.0);
        assert_eq!(
            check_nyquist(16.0, 8.0).unwrap().verdict,
            NyquistVerdict::Ok
        );
        assert_eq!(
            check_nyquist(15.0, 8.0).unwrap().verdict,
            NyquistVerdict::Undersampled
        );
        assert!(check_nyquist(0.0, 8.0).is_err());
        assert!(check_nyquist(200.0, -1.0).is_err());
    }

    #[test]
    fn single_sinusoid_spectrum() {
        let r = record_from(200.0, vec![sine(2.263, 200.0, 90.0, 1.0)]);
        let s =
            compute_spectrum(&r, Window::Rectangular, Band::new(0.5, 20.0).unwrap(), None).unwrap();
        assert_eq!(s.padded_length(), 32768);
        assert_eq!(s.resolution() * s.padded_length() as f64, 200.0);
        let k = argmax(s.magnitudes(0));
        assert!((s.frequencies()[k] - 2.263).abs() <= s.resolution());
        assert_eq!(s.magnitudes(0)[k], 1.0);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let r = record_from(200.0, vec![vec![0.0; 1000]]);
        let err = compute_spectrum(&r, Window::Rectangular, Band::new(1.0, 9.0).unwrap(), None);
        assert!(matches!(err, Err(Error::DegenerateSignal(_))));
    }

    #[test]
    fn band_above_nyquist_rejected() {
        let r = record_from(200.0, vec![sine(5.0, 200.0, 2.0, 1.0)]);
        let err = compute_spectrum(
            &r,
            Window::Rectangular,
            Band::new(1.0, 120.0).unwrap(),
            None,
        );
        assert!(matches!(err, Err(Error::BandAboveNyquist { .. })));
        let err = compute_spectrum(
            &r,
            Window::Rectangular,
            Band::new(1.0, 9.0).unwrap(),
            Some(10),
        );
        assert!(err.is_err());
    }

    #[test]
    fn two_sinusoids_give_two_peaks() {
        let a = sine(2.085, 200.0, 90.0, 1.0);
        let b = sine(3.752, 200.0, 90.0, 1.0);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let r = record_from(200.0, vec![sum]);
        let band = Band::new(1.0, 9.0).unwrap();
        let s = compute_spectrum(&r, Window::Rectangular, band, None).unwrap();
        let peaks = pick_peaks(&s, band, 0.3, 10).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks.peaks[0].frequency - 2.085).abs() <= s.resolution());
        assert!((peaks.peaks[1].frequency - 3.752).abs() <= s.resolution());
    }

    #[test]
    fn torsion_frequency_single_peak() {
        let r = record_from(200.0, vec![sine(7.906, 200.0, 90.0, 3.0)]);
        let band = Band::new(1.0, 9.0).unwrap();
        // Hann sidelobes stay below the prominence threshold
        let s = compute_spectrum(&r, Window::Hann, band, None).unwrap();
        let peaks = pick_peaks(&s, band, 0.05, 4).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks.peaks[0].frequency - 7.906).abs() <= 0.02);
    }

    #[test]
    fn monotone_spectrum_has_no_peaks() {
        // exponential decay has a monotonically falling magnitude spectrum
        let x: Vec<f64> = (0..4096).map(|k| (-(k as f64) / 20.0).exp()).collect();
        let r = record_from(200.0, vec![x]);
        let band = Band::new(1.0, 9.0).unwrap();
        let s = compute_spectrum(&r, Window::Rectangular, band, None).unwrap();
        assert!(pick_peaks(&s, band, 0.05, 4).unwrap().is_empty());
    }

    #[test]
    fn parseval_rectangular() {
        let x: Vec<f64> = (0..3000)
            .map(|k| (0.37 * k as f64).sin() + 0.25 * (1.9 * k as f64).cos() + 0.1)
            .collect();
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let r = record_from(200.0, vec![x]);
        let s =
            compute_spectrum(&r, Window::Rectangular, Band::new(1.0, 90.0).unwrap(), None).unwrap();
        assert!((s.energy(0) - time_energy).abs() / time_energy < 1e-6);
        // odd padded length exercises the unpaired last bin
        let s = compute_spectrum(
            &r,
            Window::Rectangular,
            Band::new(1.0, 90.0).unwrap(),
            Some(3001),
        )
        .unwrap();
        assert!((s.energy(0) - time_energy).abs() / time_energy < 1e-6);
    }

    #[test]
    fn aggregation_examples() {
        let set = |f: f64| PeakSet {
            peaks: vec![Peak {
                frequency: f,
                magnitude: 1.0,
                channel: "B_az".into(),
            }],
            band: Band::new(1.0, 9.0).unwrap(),
        };
        let labels = [ModeLabel::new("f_b1", 2.263)];

        let same: Vec<PeakSet> = (0..6).map(|_| set(2.263)).collect();
        let st = aggregate_frequencies(&same, &labels, DEFAULT_MATCH_TOLERANCE).unwrap();
        assert_eq!(st.modes[0].mean, Some(2.263));
        assert_eq!(st.modes[0].std_dev, Some(0.0));
        assert_eq!(st.modes[0].count, 6);

        let sets: Vec<PeakSet> = [2.25, 2.26, 2.27, 2.26, 2.27, 2.25]
            .iter()
            .map(|&f| set(f))
            .collect();
        let st = aggregate_frequencies(&sets, &labels, DEFAULT_MATCH_TOLERANCE).unwrap();
        assert!((st.modes[0].mean.unwrap() - 2.26).abs() < 1e-12);
        assert!((st.modes[0].std_dev.unwrap() - 0.008944).abs() < 1e-6);
    }

    #[test]
    fn unmatched_label_is_flagged() {
        let sets = vec![PeakSet {
            peaks: vec![Peak {
                frequency: 2.27,
                magnitude: 1.0,
                channel: "a".into(),
            }],
            band: Band::new(1.0, 9.0).unwrap(),
        }];
        let labels = [ModeLabel::new("f_b1", 2.263), ModeLabel::new("f_t1", 7.906)];
        let st = aggregate_frequencies(&sets, &labels, 0.15).unwrap();
        let t1 = st.get("f_t1").unwrap();
        assert!(t1.is_missing());
        assert_eq!(t1.mean, None);
        assert_eq!(st.missing().count(), 1);
    }

    #[test]
    fn nearest_label_and_strongest_peak_win() {
        let band = Band::new(1.0, 9.0).unwrap();
        let sets = vec![PeakSet {
            peaks: vec![
                Peak {
                    frequency: 2.10,
                    magnitude: 0.4,
                    channel: "a".into(),
                },
                Peak {
                    frequency: 2.24,
                    magnitude: 0.5,
                    channel: "a".into(),
                },
                Peak {
                    frequency: 2.27,
                    magnitude: 0.9,
                    channel: "b".into(),
                },
            ],
            band,
        }];
        let labels = [ModeLabel::new("f_b1", 2.263), ModeLabel::new("f_b2", 2.085)];
        let st = aggregate_frequencies(&sets, &labels, 0.15).unwrap();
        assert_eq!(st.get("f_b1").unwrap().mean, Some(2.27));
        assert_eq!(st.get("f_b2").unwrap().mean, Some(2.10));
    }
}
