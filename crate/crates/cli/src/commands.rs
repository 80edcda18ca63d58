use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use oma_core::decay::{
    estimate_damping, DampingEstimate, DecayTarget, EXCITATION_OFF_KEY, SETTLE_PERIODS,
};
use oma_core::records::{read_record, slice_time, write_record, MeasurementSet, TimeSeriesRecord};
use oma_core::similitude::{
    reference_full_scale, scaling_table, write_scaling_csv, LabeledFrequency, ScalingRow,
};
use oma_core::simulator::{lillebaelt_default, Scenario};
use oma_core::spectral::{
    aggregate_frequencies, compute_spectrum, pick_peaks, FrequencyStatistics, PeakSet, Spectrum,
};
use oma_core::ssi::{identify, SsiConfig, SsiOutcome};

use crate::settings::Settings;
use crate::svg::{Chart, Series, Style};

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "record".into())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .with_context(|| format!("invalid scenario {}", path.display()))
}

/// Run a scenario and write `<out>/<name>.csv` with its sidecar. The
/// scenario itself is stored in the `scenario` annotation.
pub fn cmd_simulate(scenario: &Scenario, out: &Path, name: &str) -> Result<PathBuf> {
    let record = scenario
        .run()
        .map_err(|e| anyhow!("scenario {name}: {e}"))?
        .annotated("scenario", serde_json::to_string(scenario)?)
        .annotated("seed", scenario.seed.to_string());
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(format!("{name}.csv"));
    write_record(&record, &path)?;
    Ok(path)
}

/// Impulse drop positions of the standard campaign, as fractions of the
/// span. Midspan is skipped because it is a node of the second bending
/// mode.
pub const CAMPAIGN_IMPULSE_POSITIONS: [f64; 6] = [0.4, 1.0 / 6.0, 0.25, 0.6, 0.75, 5.0 / 6.0];

/// Six drop tests and one servo test per reference mode, named so that
/// they sort by protocol.
pub fn campaign(seed: u64) -> Vec<(String, Scenario)> {
    let setup = lillebaelt_default();
    let span = setup.model.span_length;
    let mut out: Vec<(String, Scenario)> = CAMPAIGN_IMPULSE_POSITIONS
        .iter()
        .enumerate()
        .map(|(i, r)| {
            (
                format!("impulse_{}", i + 1),
                Scenario::reference_impulse(r * span, 90.0, seed.wrapping_add(i as u64 * 100)),
            )
        })
        .collect();
    for (i, mode) in setup.model.modes.iter().enumerate() {
        out.push((
            format!("servo_{}", mode.label),
            Scenario::reference_servo(mode.frequency, seed.wrapping_add(1000 + i as u64 * 100)),
        ));
    }
    out
}

pub fn read_inputs(inputs: &[PathBuf]) -> Result<Vec<(PathBuf, TimeSeriesRecord)>> {
    if inputs.is_empty() {
        bail!("no input records given");
    }
    inputs
        .iter()
        .map(|p| {
            let r = read_record(p).with_context(|| format!("reading {}", p.display()))?;
            Ok((p.clone(), r))
        })
        .collect()
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

/// Longest polyline drawn per series.
const MAX_PLOT_POINTS: usize = 4000;

pub(crate) fn thin(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let stride = points.len().div_ceil(MAX_PLOT_POINTS).max(1);
    points.into_iter().step_by(stride).collect()
}

pub(crate) fn spectrum_chart(title: &str, s: &Spectrum, settings: &Settings) -> Chart {
    let mut chart = Chart::new(title, "frequency [Hz]", "normalized magnitude");
    let band = settings.band;
    for (c, id) in s.channel_ids().iter().enumerate() {
        let pts = s
            .frequencies()
            .iter()
            .zip(s.magnitudes(c))
            .filter(|(f, _)| band.contains(**f))
            .map(|(f, m)| (*f, *m))
            .collect();
        chart = chart.with(Series::new(id.clone(), thin(pts), Style::Line));
    }
    for m in &settings.modes {
        if band.contains(m.nominal) {
            chart.markers.push((m.nominal, m.label.clone()));
        }
    }
    chart
}

pub(crate) fn spectrum_of(record: &TimeSeriesRecord, settings: &Settings) -> Result<Spectrum> {
    Ok(compute_spectrum(
        record,
        settings.window,
        settings.band,
        None,
    )?)
}

pub fn cmd_spectrum(inputs: &[PathBuf], out: &Path, settings: &Settings) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    for (path, record) in read_inputs(inputs)? {
        let s = spectrum_of(&record, settings)
            .with_context(|| format!("spectrum of {}", path.display()))?;
        let name = stem(&path);
        let csv = out.join(format!("{name}_spectrum.csv"));
        s.write_csv(create(&csv)?)?;
        let svg = out.join(format!("{name}_spectrum.svg"));
        write_text(&svg, &spectrum_chart(&name, &s, settings).render())?;
        written.extend([csv, svg]);
    }
    Ok(written)
}

pub(crate) fn peaks_of(record: &TimeSeriesRecord, settings: &Settings) -> Result<PeakSet> {
    let s = spectrum_of(record, settings)?;
    Ok(pick_peaks(
        &s,
        settings.band,
        settings.prominence,
        settings.max_peaks,
    )?)
}

/// Per-record peak lists plus `frequencies.csv` aggregating all inputs
/// against the configured mode labels.
pub fn cmd_peaks(
    inputs: &[PathBuf],
    out: &Path,
    settings: &Settings,
) -> Result<FrequencyStatistics> {
    ensure_dir(out)?;
    let mut sets = Vec::new();
    for (path, record) in read_inputs(inputs)? {
        let peaks =
            peaks_of(&record, settings).with_context(|| format!("peaks of {}", path.display()))?;
        peaks.write_csv(create(&out.join(format!("{}_peaks.csv", stem(&path))))?)?;
        sets.push(peaks);
    }
    let stats = aggregate_frequencies(&sets, &settings.modes, settings.match_tolerance)?;
    stats.write_csv(create(&out.join("frequencies.csv"))?)?;
    Ok(stats)
}

/// Drive frequency and free-decay part of a servo record, if the record
/// says when its exciter was switched off.
pub fn free_decay_part(
    record: &TimeSeriesRecord,
    settings: &Settings,
) -> Result<Option<(TimeSeriesRecord, f64)>> {
    let Some(off) = record.annotation(EXCITATION_OFF_KEY) else {
        return Ok(None);
    };
    let off: f64 = off
        .parse()
        .map_err(|_| anyhow!("annotation {EXCITATION_OFF_KEY} is not a number: {off}"))?;
    let drive = match record.annotation("drive_frequency_hz") {
        Some(d) => d
            .parse()
            .map_err(|_| anyhow!("annotation drive_frequency_hz is not a number: {d}"))?,
        None => settings
            .modes
            .iter()
            .map(|m| m.nominal)
            .fold(f64::INFINITY, f64::min),
    };
    let start = off + SETTLE_PERIODS / drive;
    Ok(Some((slice_time(record, start, record.end_time())?, drive)))
}

/// SSI on one record: the free decay with `1/N` covariances when the
/// record carries an exciter switch-off time, the whole record otherwise.
pub fn ssi_of(
    record: &TimeSeriesRecord,
    settings: &Settings,
    whole_record: bool,
) -> Result<SsiOutcome> {
    let part = if whole_record {
        None
    } else {
        free_decay_part(record, settings)?
    };
    match part {
        Some((free, _)) => {
            let config = SsiConfig {
                normalization: SsiConfig::free_decay().normalization,
                ..settings.ssi.clone()
            };
            Ok(identify(&free, &config)?)
        }
        None => Ok(identify(record, &settings.ssi)?),
    }
}

pub(crate) fn stabilization_chart(title: &str, outcome: &SsiOutcome, settings: &Settings) -> Chart {
    let d = &outcome.diagram;
    let in_band = |f: f64| f <= settings.band.hi * 1.5;
    let stable = d
        .poles
        .iter()
        .filter(|p| p.fully_stable && in_band(p.frequency))
        .map(|p| (p.frequency, p.model_order as f64))
        .collect();
    let other = d
        .poles
        .iter()
        .filter(|p| !p.fully_stable && in_band(p.frequency))
        .map(|p| (p.frequency, p.model_order as f64))
        .collect();
    let mut chart = Chart::new(title, "frequency [Hz]", "model order")
        .with(Series::new("stable", stable, Style::Dots))
        .with(Series::new("not stable", other, Style::Rings));
    chart.markers = outcome
        .modes
        .modes
        .iter()
        .filter(|m| in_band(m.frequency))
        .map(|m| (m.frequency, format!("{:.3}", m.frequency)))
        .collect();
    chart
}

pub fn cmd_ssi(
    inputs: &[PathBuf],
    out: &Path,
    settings: &Settings,
    whole_record: bool,
) -> Result<Vec<SsiOutcome>> {
    ensure_dir(out)?;
    let mut outcomes = Vec::new();
    for (path, record) in read_inputs(inputs)? {
        let name = stem(&path);
        let o = ssi_of(&record, settings, whole_record)
            .with_context(|| format!("ssi of {}", path.display()))?;
        o.diagram
            .write_csv(create(&out.join(format!("{name}_stabilization.csv")))?)?;
        o.modes
            .write_csv(create(&out.join(format!("{name}_modes.csv")))?)?;
        write_text(
            &out.join(format!("{name}_stabilization.svg")),
            &stabilization_chart(&name, &o, settings).render(),
        )?;
        outcomes.push(o);
    }
    Ok(outcomes)
}

/// Target of a decay analysis: given explicitly, else the configured mode
/// nearest to the first record's drive frequency.
pub fn decay_target(
    records: &[TimeSeriesRecord],
    explicit: Option<DecayTarget>,
    settings: &Settings,
) -> Result<DecayTarget> {
    if let Some(t) = explicit {
        return Ok(t);
    }
    let drive: f64 = records
        .first()
        .and_then(|r| r.annotation("drive_frequency_hz"))
        .ok_or_else(|| {
            anyhow!("no --target given and the record has no drive_frequency_hz annotation")
        })?
        .parse()
        .context("parsing drive_frequency_hz")?;
    let m = settings.nearest_mode(drive);
    Ok(DecayTarget::new(m.label.clone(), m.nominal))
}

pub fn damping_for(
    records: Vec<TimeSeriesRecord>,
    target: &DecayTarget,
    settings: &Settings,
) -> Result<DampingEstimate> {
    let set = MeasurementSet::new(target.label.clone(), records)?;
    Ok(estimate_damping(
        &set,
        target,
        settings.n_periods,
        &settings.decay,
    )?)
}

pub fn cmd_logdec(
    inputs: &[PathBuf],
    out: &Path,
    settings: &Settings,
    target: Option<DecayTarget>,
) -> Result<DampingEstimate> {
    ensure_dir(out)?;
    let records: Vec<TimeSeriesRecord> = read_inputs(inputs)?.into_iter().map(|(_, r)| r).collect();
    let target = decay_target(&records, target, settings)?;
    let est = damping_for(records, &target, settings)?;
    est.write_csv(
        create(&out.join(format!("damping_{}.csv", target.label)))?,
        true,
    )?;
    Ok(est)
}

/// Read `label,...,mean_hz,...` rows of a frequency table.
pub fn read_frequency_table(path: &Path) -> Result<Vec<LabeledFrequency>> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no {name} column", path.display()))
    };
    let (label, mean) = (col("label")?, col("mean_hz")?);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let text = row.get(mean).unwrap_or("");
        if text.is_empty() {
            continue;
        }
        let f: f64 = text
            .parse()
            .with_context(|| format!("{}: bad mean_hz {text}", path.display()))?;
        out.push(LabeledFrequency::new(row.get(label).unwrap_or(""), f));
    }
    Ok(out)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::Reader::from_reader(f))
}

/// Scale model frequencies to full scale. Without explicit frequencies
/// the configured nominal mode frequencies are used.
pub fn cmd_scale(
    frequencies: Option<Vec<LabeledFrequency>>,
    out: &Path,
    settings: &Settings,
) -> Result<Vec<ScalingRow>> {
    ensure_dir(out)?;
    let model = frequencies.unwrap_or_else(|| {
        settings
            .modes
            .iter()
            .map(|m| LabeledFrequency::new(m.label.clone(), m.nominal))
            .collect()
    });
    let rows = scaling_table(&model, &settings.law, &reference_full_scale())?;
    write_scaling_csv(&rows, create(&out.join("scaling.csv"))?)?;
    Ok(rows)
}
