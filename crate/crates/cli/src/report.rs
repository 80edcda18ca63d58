//! Full analysis of a measurement directory: frequencies from drop tests,
//! damping from servo free decays, and full-scale conversion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use oma_core::decay::{DampingEstimate, DecayTarget};
use oma_core::filter::BandPass;
use oma_core::records::{list_records, read_record, TimeSeriesRecord};
use oma_core::similitude::{
    reference_full_scale, round_to, scaling_table, write_scaling_csv, LabeledFrequency, ScalingRow,
};
use oma_core::spectral::{aggregate_frequencies, FrequencyStatistics};

use crate::commands::{
    create, damping_for, peaks_of, spectrum_chart, spectrum_of, ssi_of, stabilization_chart, thin,
    write_text,
};
use crate::settings::Settings;
use crate::svg::{Chart, Series, Style};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no records found in {0}")]
    NoRecords(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Impulse,
    Servo,
}

/// Drop tests carry `excitation = impulse_drop`, servo tests
/// `servo_harmonic`. Records without that annotation count as servo tests
/// when they name a switch-off time and as drop tests otherwise.
pub fn protocol_of(record: &TimeSeriesRecord) -> Protocol {
    match record.annotation("excitation") {
        Some("servo_harmonic") => Protocol::Servo,
        Some("impulse_drop") => Protocol::Impulse,
        _ if record
            .annotation(oma_core::decay::EXCITATION_OFF_KEY)
            .is_some() =>
        {
            Protocol::Servo
        }
        _ => Protocol::Impulse,
    }
}

/// One line of the damping table.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingRow {
    pub label: String,
    pub n_records: usize,
    pub ssi_frequency: Option<f64>,
    pub ssi_damping: Option<f64>,
    pub logdec_damping: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub frequencies: Option<FrequencyStatistics>,
    pub damping: Vec<DampingRow>,
    pub scaling: Vec<ScalingRow>,
    /// One entry per failed stage: `(what, why)`.
    pub failures: Vec<(String, String)>,
    /// Channels left out of a damping estimate, with the reason.
    pub skipped: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl ReportSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn pct(v: Option<f64>) -> String {
    v.map(|z| format!("{:.2} %", 100.0 * z))
        .unwrap_or_else(|| "-".into())
}

fn hz(v: Option<f64>) -> String {
    v.map(|f| format!("{:.3} Hz", round_to(f, 3)))
        .unwrap_or_else(|| "-".into())
}

fn decay_chart(
    label: &str,
    record: &TimeSeriesRecord,
    est: &DampingEstimate,
    settings: &Settings,
) -> Result<Option<Chart>> {
    let Some(first) = est.per_channel.iter().find(|c| c.record == 0) else {
        return Ok(None);
    };
    let Some(c) = record.channel_index(&first.channel) else {
        return Ok(None);
    };
    let band = settings.decay.band_for(est_frequency(settings, label))?;
    let bp = BandPass::design(band, record.sample_rate(), settings.decay.filter_sections)?;
    let y = bp.filtfilt(record.channel(c));
    let pts = y
        .iter()
        .enumerate()
        .map(|(k, v)| (record.time_of(k), *v))
        .collect();
    let p = first.pair;
    Ok(Some(
        Chart::new(
            format!("{label} free decay, {}", first.channel),
            "time [s]",
            "band-passed response",
        )
        .with(Series::new(first.channel.clone(), thin(pts), Style::Line))
        .with(Series::new(
            "peak pair",
            vec![(p.t1, p.a1), (p.t2, p.a2)],
            Style::Dots,
        )),
    ))
}

fn est_frequency(settings: &Settings, label: &str) -> f64 {
    settings
        .modes
        .iter()
        .find(|m| m.label == label)
        .map(|m| m.nominal)
        .unwrap_or(1.0)
}

/// Analyse every record in `dir` and write the report bundle to `out`.
///
/// A failing record or stage is noted in the summary and the remaining
/// work continues; only an empty directory is an error.
pub fn cmd_report(dir: &Path, out: &Path, settings: &Settings) -> Result<ReportSummary> {
    let paths = list_records(dir)?;
    if paths.is_empty() {
        return Err(ReportError::NoRecords(dir.to_path_buf()).into());
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut failures = Vec::new();
    let mut skipped = Vec::new();
    let mut files = Vec::new();
    let mut impulse = Vec::new();
    let mut servo = Vec::new();
    for p in &paths {
        let name = crate::commands::stem(p);
        match read_record(p) {
            Ok(r) => match protocol_of(&r) {
                Protocol::Impulse => impulse.push((name, r)),
                Protocol::Servo => servo.push((name, r)),
            },
            Err(e) => failures.push((name, format!("{:#}", anyhow::Error::from(e)))),
        }
    }

    // drop tests: spectra and peak statistics
    let mut sets = Vec::new();
    for (i, (name, r)) in impulse.iter().enumerate() {
        match peaks_of(r, settings) {
            Ok(p) => sets.push(p),
            Err(e) => failures.push((format!("{name}: peaks"), format!("{e:#}"))),
        }
        if i == 0 {
            if let Ok(s) = spectrum_of(r, settings) {
                let path = out.join("spectra.svg");
                write_text(
                    &path,
                    &spectrum_chart(&format!("spectrum of {name}"), &s, settings).render(),
                )?;
                files.push(path);
            }
        }
    }
    let frequencies = if sets.is_empty() {
        None
    } else {
        let stats = aggregate_frequencies(&sets, &settings.modes, settings.match_tolerance)?;
        let path = out.join("table1_frequencies.csv");
        stats.write_csv(create(&path)?)?;
        files.push(path);
        for m in stats.missing() {
            failures.push((
                format!("frequency {}", m.label),
                "no matching peak in any drop test".into(),
            ));
        }
        Some(stats)
    };

    // servo tests grouped by the mode they drive
    let mut groups: BTreeMap<usize, Vec<(String, TimeSeriesRecord)>> = BTreeMap::new();
    for (name, r) in servo {
        let drive = r
            .annotation("drive_frequency_hz")
            .and_then(|d| d.parse::<f64>().ok());
        match drive {
            Some(d) => {
                let label = &settings.nearest_mode(d).label;
                let idx = settings
                    .modes
                    .iter()
                    .position(|m| &m.label == label)
                    .expect("mode exists");
                groups.entry(idx).or_default().push((name, r));
            }
            None => failures.push((
                name,
                "servo record without drive_frequency_hz annotation".into(),
            )),
        }
    }
    let mut damping = Vec::new();
    for (idx, group) in &groups {
        let mode = &settings.modes[*idx];
        let mut ssi_f = Vec::new();
        let mut ssi_z = Vec::new();
        for (j, (name, r)) in group.iter().enumerate() {
            match ssi_of(r, settings, false) {
                Ok(o) => {
                    let path = out.join(format!("stabilization_{name}.csv"));
                    o.diagram.write_csv(create(&path)?)?;
                    files.push(path);
                    if j == 0 {
                        let path = out.join(format!("stabilization_{}.svg", mode.label));
                        write_text(
                            &path,
                            &stabilization_chart(&format!("{} ({name})", mode.label), &o, settings)
                                .render(),
                        )?;
                        files.push(path);
                    }
                    match o.modes.nearest(mode.nominal) {
                        Some(m)
                            if (m.frequency - mode.nominal).abs() <= settings.match_tolerance =>
                        {
                            ssi_f.push(m.frequency);
                            ssi_z.push(m.damping_ratio);
                        }
                        _ => failures.push((
                            format!("{name}: ssi"),
                            format!("no stable mode near {} Hz", mode.nominal),
                        )),
                    }
                }
                Err(e) => failures.push((format!("{name}: ssi"), format!("{e:#}"))),
            }
        }
        let target = DecayTarget::new(mode.label.clone(), mode.nominal);
        let records: Vec<TimeSeriesRecord> = group.iter().map(|g| g.1.clone()).collect();
        let logdec = match damping_for(records, &target, settings) {
            Ok(est) => {
                let path = out.join(format!("damping_{}.csv", mode.label));
                est.write_csv(create(&path)?, true)?;
                files.push(path);
                for r in &est.rejected {
                    let name = &group[r.record].0;
                    skipped.push(format!(
                        "{name}/{} for {}: {}",
                        r.channel, mode.label, r.reason
                    ));
                }
                if let Some(chart) = decay_chart(&mode.label, &group[0].1, &est, settings)? {
                    let path = out.join(format!("decay_{}.svg", mode.label));
                    write_text(&path, &chart.render())?;
                    files.push(path);
                }
                Some(est.mean_zeta)
            }
            Err(e) => {
                failures.push((format!("{}: log decrement", mode.label), format!("{e:#}")));
                None
            }
        };
        damping.push(DampingRow {
            label: mode.label.clone(),
            n_records: group.len(),
            ssi_frequency: mean(&ssi_f),
            ssi_damping: mean(&ssi_z),
            logdec_damping: logdec,
        });
    }
    if !damping.is_empty() {
        let path = out.join("table2_damping.csv");
        let mut text = String::from(
            "label,n_records,ssi_frequency_hz,ssi_damping_ratio,logdec_damping_ratio\n",
        );
        for d in &damping {
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                d.label,
                d.n_records,
                opt(d.ssi_frequency),
                opt(d.ssi_damping),
                opt(d.logdec_damping)
            );
        }
        write_text(&path, &text)?;
        files.push(path);
    }

    // full-scale conversion of the measured frequencies
    let measured: Vec<LabeledFrequency> = frequencies
        .iter()
        .flat_map(|s| s.modes.iter())
        .filter_map(|m| m.mean.map(|f| LabeledFrequency::new(m.label.clone(), f)))
        .collect();
    let scaling = if measured.is_empty() {
        Vec::new()
    } else {
        let rows = scaling_table(&measured, &settings.law, &reference_full_scale())?;
        let path = out.join("table3_scaling.csv");
        write_scaling_csv(&rows, create(&path)?)?;
        files.push(path);
        rows
    };

    let summary = ReportSummary {
        frequencies,
        damping,
        scaling,
        failures,
        skipped,
        files,
    };
    let path = out.join("report.txt");
    write_text(&path, &render_text(&summary, settings, paths.len()))?;
    let mut summary = summary;
    summary.files.push(path);
    Ok(summary)
}

fn render_text(s: &ReportSummary, settings: &Settings, n_records: usize) -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut t = String::new();
    let _ = writeln!(t, "generated_unix_s: {now}");
    let _ = writeln!(t, "records: {n_records}");
    if let Some(f) = &s.frequencies {
        let _ = writeln!(t, "\nNatural frequencies from drop tests");
        let _ = writeln!(t, "{:<8} {:>12} {:>12} {:>6}", "mode", "mean", "std", "n");
        for m in &f.modes {
            let _ = writeln!(
                t,
                "{:<8} {:>12} {:>12} {:>6}",
                m.label,
                hz(m.mean),
                hz(m.std_dev),
                m.count
            );
        }
    }
    if !s.damping.is_empty() {
        let _ = writeln!(t, "\nDamping from servo free decays");
        let _ = writeln!(
            t,
            "{:<8} {:>12} {:>10} {:>10} {:>4}",
            "mode", "f (SSI)", "zeta SSI", "zeta LD", "n"
        );
        for d in &s.damping {
            let _ = writeln!(
                t,
                "{:<8} {:>12} {:>10} {:>10} {:>4}",
                d.label,
                hz(d.ssi_frequency),
                pct(d.ssi_damping),
                pct(d.logdec_damping),
                d.n_records
            );
        }
        let _ = writeln!(
            t,
            "damping transfers to full scale unchanged but is not calibrated for the model"
        );
    }
    if !s.scaling.is_empty() {
        let law = &settings.law;
        let _ = writeln!(
            t,
            "\nFull scale, F_f = {} ({:?}; 1/sqrt(F_l) = {:.6})",
            law.frequency_factor,
            law.factor_source,
            law.derived_factor()
        );
        let _ = writeln!(
            t,
            "{:<8} {:>12} {:>12} {:>12} {:>9}",
            "mode", "model", "full scale", "reference", "diff"
        );
        for r in &s.scaling {
            let diff = r
                .rel_diff
                .map(|d| format!("{:+.1} %", 100.0 * d))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                t,
                "{:<8} {:>12} {:>12} {:>12} {:>9}",
                r.label,
                hz(Some(r.model_hz)),
                hz(Some(r.full_scale_hz)),
                hz(r.reference_hz),
                diff
            );
        }
    }
    if !s.skipped.is_empty() {
        let _ = writeln!(t, "\nChannels left out of the decrement");
        for note in &s.skipped {
            let _ = writeln!(t, "{note}");
        }
    }
    if !s.failures.is_empty() {
        let _ = writeln!(t, "\nFailures");
        for (what, why) in &s.failures {
            let _ = writeln!(t, "{what}: {why}");
        }
    }
    t
}
