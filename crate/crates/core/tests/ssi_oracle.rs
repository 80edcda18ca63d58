use oma_core::records::{slice_time, TimeSeriesRecord};
use oma_core::simulator::{lillebaelt_default, simulate, ExcitationSpec, NoiseSpec, SensorSpec};
use oma_core::ssi::{
    build_stabilization_diagram, cluster_stable_poles, estimate_covariances_with,
    poles_from_realization, CovarianceNormalization, Realizer, StabilityCriteria,
};

const TRUTH: [f64; 4] = [2.263, 2.085, 3.752, 7.906];

/// Drop test with noise off but 16-bit quantization kept, cut after the
/// pulse so that only the free decay remains.
fn drop_record(damping: Option<[f64; 4]>) -> TimeSeriesRecord {
    let mut setup = lillebaelt_default();
    if let Some(z) = damping {
        for (m, z) in setup.model.modes.iter_mut().zip(z) {
            m.damping_ratio = z;
        }
    }
    let sensors: Vec<SensorSpec> = setup
        .default_sensors()
        .into_iter()
        .map(|s| SensorSpec {
            noise: NoiseSpec::None,
            ..s
        })
        .collect();
    let r = simulate(
        &setup.model,
        &ExcitationSpec::impulse(0.192, 0.1, 1.2, 0.05),
        &sensors,
        90.0,
    )
    .unwrap();
    slice_time(&r, 0.05, r.end_time()).unwrap()
}

fn orders() -> Vec<usize> {
    (2..=40).step_by(2).collect()
}

#[test]
fn order_eight_finds_the_four_modes() {
    let r = drop_record(None);
    let cov = estimate_covariances_with(&r, 79, CovarianceNormalization::Biased).unwrap();
    let real = Realizer::new(&cov, 40).unwrap().realize(8).unwrap();
    let poles = poles_from_realization(&real, r.sample_rate())
        .unwrap()
        .poles;
    assert_eq!(poles.len(), 4);
    for f in TRUTH {
        assert!(
            poles.iter().any(|p| (p.frequency - f).abs() / f < 0.005),
            "{f}"
        );
    }
}

#[test]
fn physical_poles_stay_stable_above_order_eight() {
    let r = drop_record(None);
    let cov = estimate_covariances_with(&r, 79, CovarianceNormalization::Biased).unwrap();
    let d =
        build_stabilization_diagram(&cov, &orders(), 40, &StabilityCriteria::default()).unwrap();
    assert!(d.failed_orders.is_empty());
    // order 8 is the first to hold all four, so its torsion pole has no
    // partner below; from order 10 on every physical pole is stable
    for order in (10..=40).step_by(2) {
        for f in TRUTH {
            assert!(
                d.poles_at(order)
                    .any(|p| p.fully_stable && (p.frequency - f).abs() / f < 0.005),
                "order {order}, {f} Hz"
            );
        }
    }
}

#[test]
fn clusters_recover_configured_damping() {
    let ssi_column = [0.0038, 0.0035, 0.0024, 0.0023];
    let r = drop_record(Some(ssi_column));
    let cov = estimate_covariances_with(&r, 79, CovarianceNormalization::Biased).unwrap();
    let d =
        build_stabilization_diagram(&cov, &orders(), 40, &StabilityCriteria::default()).unwrap();
    let modes = cluster_stable_poles(&d, 5, 0.05).unwrap();
    for (f, z) in TRUTH.iter().zip(ssi_column) {
        let m = modes.nearest(*f).unwrap();
        assert!((m.frequency - f).abs() / f < 0.005);
        assert!(
            (m.damping_ratio - z).abs() / z < 0.05,
            "{f}: {}",
            m.damping_ratio
        );
        assert!(m.support >= 15);
    }
}

#[test]
fn verdicts_ignore_uniform_signal_scaling() {
    let r = drop_record(None);
    let scaled = r
        .with_columns(
            r.columns()
                .iter()
                .map(|c| c.iter().map(|v| 7.5 * v).collect())
                .collect(),
        )
        .unwrap();
    let verdicts = |r: &TimeSeriesRecord| {
        let cov = estimate_covariances_with(r, 79, CovarianceNormalization::Biased).unwrap();
        let d = build_stabilization_diagram(&cov, &orders(), 40, &StabilityCriteria::default())
            .unwrap();
        d.poles
            .iter()
            .map(|p| (p.model_order, p.fully_stable))
            .collect::<Vec<_>>()
    };
    assert_eq!(verdicts(&r), verdicts(&scaled));
}
