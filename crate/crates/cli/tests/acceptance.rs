//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use oma_cli::commands::{campaign, ssi_of};
use oma_cli::{cmd_report, cmd_simulate, AnalysisConfig, Settings};
use oma_core::decay::{damping_from_decrement, extract_peak_pair, log_decrement, DecaySegment};
use oma_core::records::{read_record, write_record, ChannelKind, ChannelSpec, TimeSeriesRecord};
use oma_core::similitude::{round_to, to_full_scale, ScalingLaw};
use oma_core::simulator::{
    lillebaelt_default, modal_responses, simulate, ExcitationSpec, ModalModel, ModeKind, ModeSpec,
    Scenario, SensorSpec,
};
use oma_core::spectral::{
    check_nyquist, compute_spectrum, pick_peaks, Band, NyquistVerdict, Window,
};
use oma_core::ssi::{
    classify, discrete_pole, mac, modal_parameters, PoleEstimate, StabilityCriteria,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
/// Name, check and time limit.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn similitude_reproduction() -> Outcome {
    let law = ScalingLaw::reference_stated();
    let model: [f64; 4] = [2.263, 2.085, 3.752, 7.906];
    let expected = [0.158, 0.146, 0.263, 0.553];
    let got: Vec<f64> = model
        .iter()
        .map(|f| {
            to_full_scale(*f, &law)
                .map(|v| round_to(v, 3))
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, String>>()?;
    check(got == expected, format!("got {got:?}"))?;
    Ok(format!("{got:?} Hz with F_f = {}", law.frequency_factor))
}

fn nyquist() -> Outcome {
    let c = check_nyquist(200.0, 8.0).map_err(|e| e.to_string())?;
    check(
        c.verdict == NyquistVerdict::Ok && c.minimum_rate == 16.0,
        format!("{c:?}"),
    )?;
    Ok(format!("{:?}, minimum {} Hz", c.verdict, c.minimum_rate))
}

fn spectral_round_trip() -> Outcome {
    let setup = lillebaelt_default();
    let span = setup.model.span_length;
    // one IMU at B: three bending modes on z, torsion on the gyro
    let imu = SensorSpec::at(
        "B",
        span / 4.0,
        vec![ChannelKind::AccelerationZ, ChannelKind::AngularVelocityX],
    )
    .ideal();
    let r = simulate(
        &setup.model,
        &ExcitationSpec::impulse(0.192, 0.1, 0.4 * span, 0.05),
        &[imu],
        90.0,
    )
    .map_err(|e| e.to_string())?;
    let band = Band::new(1.0, 9.0).map_err(|e| e.to_string())?;
    let s = compute_spectrum(&r, Window::Rectangular, band, None).map_err(|e| e.to_string())?;
    let peaks = pick_peaks(&s, band, 0.05, 4).map_err(|e| e.to_string())?;
    check(peaks.len() == 4, format!("{} peaks", peaks.len()))?;
    let mut worst: f64 = 0.0;
    for m in &setup.model.modes {
        let d = peaks
            .peaks
            .iter()
            .map(|p| (p.frequency - m.frequency).abs())
            .fold(f64::INFINITY, f64::min);
        check(d <= 0.02, format!("{} off by {d:.4} Hz", m.label))?;
        worst = worst.max(d);
    }
    Ok(format!("4 peaks, largest error {worst:.4} Hz"))
}

fn ssi_round_trip() -> Outcome {
    let settings = Settings::resolve(
        AnalysisConfig {
            orders: Some([2, 40, 2]),
            ..Default::default()
        },
        None,
    )
    .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for (i, m) in lillebaelt_default().model.modes.iter().enumerate() {
        let t = Instant::now();
        let rec = Scenario::reference_servo(m.frequency, 500 + i as u64)
            .run()
            .map_err(|e| e.to_string())?;
        let out = ssi_of(&rec, &settings, false).map_err(|e| format!("{e:#}"))?;
        let elapsed = t.elapsed();
        let aligned = out
            .diagram
            .fully_stable()
            .filter(|p| (p.frequency - m.frequency).abs() / m.frequency <= 0.005)
            .count();
        check(
            aligned >= settings.ssi.min_support,
            format!("{}: {aligned} fully stable poles", m.label),
        )?;
        let id = out
            .modes
            .nearest(m.frequency)
            .ok_or(format!("{}: no cluster", m.label))?;
        let df = (id.frequency - m.frequency) / m.frequency;
        let dz = (id.damping_ratio - m.damping_ratio) / m.damping_ratio;
        check(
            df.abs() <= 0.005,
            format!("{}: frequency off by {:.3} %", m.label, 100.0 * df),
        )?;
        check(
            dz.abs() <= 0.2,
            format!("{}: damping off by {:.1} %", m.label, 100.0 * dz),
        )?;
        check(
            elapsed < Duration::from_secs(60),
            format!("{}: {elapsed:?}", m.label),
        )?;
        lines.push(format!(
            "{} df {:+.3} % dz {:+.1} % ({aligned} stable, {:.2} s)",
            m.label,
            100.0 * df,
            100.0 * dz,
            elapsed.as_secs_f64()
        ));
    }
    Ok(lines.join("; "))
}

fn log_decrement_accuracy() -> Outcome {
    let (f, zeta, fs): (f64, f64, f64) = (2.263, 0.0037, 200.0);
    let w = 2.0 * PI * f;
    let wd = w * (1.0 - zeta * zeta).sqrt();
    let samples = (0..(20.0 * fs) as usize)
        .map(|k| {
            let t = k as f64 / fs;
            (-zeta * w * t).exp() * (wd * t).cos()
        })
        .collect();
    let seg = DecaySegment {
        channel: "x".into(),
        t_start: 0.0,
        samples,
        sample_rate: fs,
        band_filter: None,
    };
    let pair = extract_peak_pair(&seg, f, 5).map_err(|e| e.to_string())?;
    let z = damping_from_decrement(log_decrement(&pair).map_err(|e| e.to_string())?);
    let rel = (z - zeta).abs() / zeta;
    check(rel <= 1e-3, format!("zeta {z}, relative error {rel:.2e}"))?;
    Ok(format!("zeta {z:.7}, relative error {rel:.2e}"))
}

fn pole_conversion_identity() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let f: f64 = rng.random_range(0.1..90.0);
        let zeta: f64 = rng.random_range(0.0..0.1);
        let (f2, z2) = modal_parameters(discrete_pole(f, zeta, 200.0), 200.0);
        let ef = (f2 - f).abs() / f;
        let ez = if zeta > 0.0 {
            (z2 - zeta).abs() / zeta
        } else {
            z2.abs()
        };
        worst = worst.max(ef).max(ez);
    }
    check(worst <= 1e-9, format!("max relative error {worst:.2e}"))?;
    Ok(format!("max relative error {worst:.2e} over 1000 poles"))
}

fn pole(f: f64, zeta: f64, shape: Vec<Complex64>) -> PoleEstimate {
    PoleEstimate {
        frequency: f,
        damping_ratio: zeta,
        eigenvalue: discrete_pole(f, zeta, 200.0),
        mode_shape: shape,
        model_order: 2,
        stable_frequency: false,
        stable_damping: false,
        stable_shape: false,
        fully_stable: false,
    }
}

fn stability_thresholds() -> Outcome {
    let c = StabilityCriteria::default();
    let e1 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let theta = 0.99f64.sqrt().acos();
    let at_limit = vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(theta.sin(), 0.0),
    ];
    let past_limit = vec![
        Complex64::new(0.9899f64.sqrt(), 0.0),
        Complex64::new(0.0101f64.sqrt(), 0.0),
    ];
    let ones = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
    let near = vec![Complex64::new(1.0, 0.0), Complex64::new(0.9, 0.0)];
    // (what, previous, current, expected (frequency, damping, shape))
    let cases = [
        (
            "2.263 -> 2.280 Hz",
            pole(2.263, 0.0037, e1.clone()),
            pole(2.280, 0.0037, e1.clone()),
            (true, true, true),
        ),
        (
            "zeta 0.0037 -> 0.0040",
            pole(2.263, 0.0037, e1.clone()),
            pole(2.263, 0.0040, e1.clone()),
            (true, false, true),
        ),
        (
            "df/f exactly 1 %",
            pole(2.0, 0.004, e1.clone()),
            pole(2.02, 0.004, e1.clone()),
            (true, true, true),
        ),
        (
            "df/f just above 1 %",
            pole(2.0, 0.004, e1.clone()),
            pole(2.0201, 0.004, e1.clone()),
            (false, true, true),
        ),
        (
            "dzeta/zeta exactly 5 %",
            pole(3.0, 0.004, e1.clone()),
            pole(3.0, 0.0042, e1.clone()),
            (true, true, true),
        ),
        (
            "dzeta/zeta just above 5 %",
            pole(3.0, 0.004, e1.clone()),
            pole(3.0, 0.00421, e1.clone()),
            (true, false, true),
        ),
        (
            "MAC exactly 0.99",
            pole(3.0, 0.004, e1.clone()),
            pole(3.0, 0.004, at_limit),
            (true, true, true),
        ),
        (
            "MAC 0.9899",
            pole(3.0, 0.004, e1.clone()),
            pole(3.0, 0.004, past_limit),
            (true, true, false),
        ),
        (
            "MAC (1,1) vs (1,0.9)",
            pole(3.0, 0.004, ones.clone()),
            pole(3.0, 0.004, near.clone()),
            (true, true, true),
        ),
    ];
    for (what, prev, curr, (ef, ez, es)) in &cases {
        let v = classify(prev, curr, &c);
        check(
            (v.frequency, v.damping, v.shape) == (*ef, *ez, *es),
            format!("{what}: got {v:?}"),
        )?;
        check(
            v.fully_stable(c.rule) == (*ef && *ez && *es),
            format!("{what}: full verdict"),
        )?;
    }
    let m = mac(&ones, &near).map_err(|e| e.to_string())?;
    check((m - 0.997_238_2).abs() < 1e-6, format!("MAC {m}"))?;
    Ok(format!(
        "{} boundary cases, MAC example {m:.5}",
        cases.len()
    ))
}

fn files_in(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        out.insert(
            p.file_name().unwrap().to_string_lossy().into_owned(),
            std::fs::read(&p).unwrap(),
        );
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let settings = Settings::resolve(AnalysisConfig::default(), None).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    let mut records = Vec::new();
    for run in ["a", "b"] {
        let rec_dir = tmp.path().join(run).join("records");
        for (name, s) in campaign(7) {
            cmd_simulate(&s, &rec_dir, &name).map_err(|e| format!("{e:#}"))?;
        }
        let rep_dir = tmp.path().join(run).join("report");
        let summary = cmd_report(&rec_dir, &rep_dir, &settings).map_err(|e| format!("{e:#}"))?;
        check(
            summary.ok(),
            format!("report failures: {:?}", summary.failures),
        )?;
        records.push(files_in(&rec_dir));
        reports.push(files_in(&rep_dir));
    }
    check(records[0] == records[1], "record files differ")?;
    let csv = |m: &BTreeMap<String, Vec<u8>>| {
        m.iter()
            .filter(|(k, _)| k.ends_with(".csv"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<Vec<_>>()
    };
    check(csv(&reports[0]) == csv(&reports[1]), "report CSVs differ")?;
    let n_csv = csv(&reports[0]).len();
    check(n_csv >= 3, "report wrote no tables")?;
    Ok(format!(
        "{} record files and {n_csv} report CSVs identical",
        records[0].len()
    ))
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
        .prop_filter("non-zero", |v: &Vec<Complex64>| {
            v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6
        })
}

const PROPERTY_CASES: u32 = 128;

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn invariant_suite() -> Outcome {
    let pair = (1usize..6).prop_flat_map(|n| (complex_vec(n), complex_vec(n)));
    run_property("mac symmetry", pair.clone(), |(a, b)| {
        prop_assert!((mac(&a, &b).unwrap() - mac(&b, &a).unwrap()).abs() < 1e-12);
        Ok(())
    })?;
    run_property(
        "mac scale invariance",
        (pair, 0.01f64..100.0, -PI..PI),
        |((a, b), r, phi)| {
            let s = Complex64::from_polar(r, phi);
            let sa: Vec<Complex64> = a.iter().map(|v| v * s).collect();
            prop_assert!((mac(&a, &b).unwrap() - mac(&sa, &b).unwrap()).abs() < 1e-10);
            Ok(())
        },
    )?;
    run_property(
        "mac collinearity",
        (
            (1usize..6).prop_flat_map(complex_vec),
            0.01f64..100.0,
            -PI..PI,
        ),
        |(a, r, phi)| {
            let s = Complex64::from_polar(r, phi);
            let b: Vec<Complex64> = a.iter().map(|v| v * s).collect();
            prop_assert!((mac(&a, &b).unwrap() - 1.0).abs() < 1e-12);
            Ok(())
        },
    )?;
    run_property(
        "decrement scale invariance",
        (1.0f64..9.0, 0.001f64..0.02, 1e-3f64..1e3, 1u32..8),
        |(f, zeta, k, n)| {
            let w = 2.0 * PI * f;
            let seg = |amp: f64| DecaySegment {
                channel: "x".into(),
                t_start: 0.0,
                samples: (0..(200.0 * (n as f64 + 3.0) / f) as usize)
                    .map(|i| {
                        let t = i as f64 / 200.0;
                        amp * (-zeta * w * t).exp() * (w * (1.0 - zeta * zeta).sqrt() * t).cos()
                    })
                    .collect(),
                sample_rate: 200.0,
                band_filter: None,
            };
            let a = log_decrement(&extract_peak_pair(&seg(1.0), f, n).unwrap()).unwrap();
            let b = log_decrement(&extract_peak_pair(&seg(k), f, n).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            Ok(())
        },
    )?;
    let single = |k: u32, f: f64, zeta: f64| ModalModel {
        span_length: 3.0,
        modes: vec![ModeSpec::new("m", ModeKind::Bending, k, f, zeta)],
        deck_half_width: 0.1,
    };
    run_property(
        "simulator energy decay",
        (
            1u32..4,
            1.0f64..9.0,
            0.001f64..0.05,
            0.1f64..2.9,
            0.1f64..2.9,
        ),
        |(k, f, zeta, xe, xs)| {
            let sensors = [SensorSpec::at("S", xs, vec![ChannelKind::AccelerationZ]).ideal()];
            let r = simulate(
                &single(k, f, zeta),
                &ExcitationSpec::impulse(0.192, 0.1, xe, 0.0),
                &sensors,
                8.0,
            )
            .unwrap();
            let period = (200.0 / f).ceil() as usize;
            let env: Vec<f64> = r.channel(0)[4..]
                .chunks(period)
                .filter(|c| c.len() == period)
                .map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs())))
                .collect();
            for w in env.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + (PI * f / 200.0).powi(2)) + 1e-300);
            }
            Ok(())
        },
    )?;
    run_property(
        "node excitation nullity",
        (2u32..6, 1u32..5, 1.0f64..9.0, 0.0f64..0.05),
        |(k, j, f, zeta)| {
            prop_assume!(j < k);
            let x = 3.0 * j as f64 / k as f64;
            let resp = modal_responses(
                &single(k, f, zeta),
                &ExcitationSpec::impulse(0.192, 0.1, x, 0.0),
                200.0,
                2.0,
            )
            .unwrap();
            prop_assert!(resp[0].q.iter().all(|q| q.abs() < 1e-15 * 0.269));
            Ok(())
        },
    )?;
    let cols = (1usize..4, 2usize..40)
        .prop_flat_map(|(c, n)| prop::collection::vec(prop::collection::vec(-1e6f64..1e6, n), c));
    run_property(
        "record round trip",
        (cols, 1.0f64..1000.0, -100.0f64..100.0),
        |(cols, fs, t0)| {
            let chans = (0..cols.len())
                .map(|i| ChannelSpec::new(format!("c{i}"), ChannelKind::AccelerationZ, 0.0, 0.0))
                .collect();
            let r = TimeSeriesRecord::new(fs, t0, chans, cols, BTreeMap::new()).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.csv");
            write_record(&r, &p).unwrap();
            let back = read_record(&p).unwrap();
            for (a, b) in back.columns().iter().zip(r.columns()) {
                for (u, v) in a.iter().zip(b) {
                    prop_assert!((u - v).abs() <= 1e-9 * v.abs().max(1.0));
                }
            }
            prop_assert!((back.start_time() - t0).abs() <= 1e-9 * t0.abs().max(1.0));
            Ok(())
        },
    )?;
    Ok(format!("7 properties x {PROPERTY_CASES} cases"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "similitude reproduction",
            similitude_reproduction,
            Duration::from_secs(1),
        ),
        ("Nyquist check", nyquist, Duration::from_secs(1)),
        (
            "spectral round trip",
            spectral_round_trip,
            Duration::from_secs(10),
        ),
        // four measurements, each under 60 s
        ("SSI round trip", ssi_round_trip, Duration::from_secs(240)),
        (
            "log-decrement accuracy",
            log_decrement_accuracy,
            Duration::from_secs(1),
        ),
        (
            "pole-conversion identity",
            pole_conversion_identity,
            Duration::from_secs(1),
        ),
        (
            "stability thresholds",
            stability_thresholds,
            Duration::from_secs(1),
        ),
        ("determinism", determinism, Duration::from_secs(30)),
        ("invariant suite", invariant_suite, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    println!("acceptance: {} criteria", criteria.len());
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = t.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= *limit {
                Ok(msg)
            } else {
                Err(format!(
                    "took {:.2} s, limit {} s",
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                ))
            }
        });
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "{tag} {}. {name} [{:.3} s]: {msg}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
