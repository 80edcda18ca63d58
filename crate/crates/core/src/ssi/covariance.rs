use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::TimeSeriesRecord;

/// Divisor used for the lag-`i` output covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceNormalization {
    /// `1 / (N - i)`: unbiased for stationary (ambient) responses.
    #[default]
    Unbiased,
    /// `1 / N`: keeps the decay rate of transient (free-decay) responses.
    ///
    /// With `1 / (N - i)` the covariances of a decaying record grow by
    /// `N / (N - i)`, which shifts the identified damping ratio down by
    /// about `fs / (N * omega)`.
    Biased,
}

/// Output covariance blocks `R_0 ..= R_max_lag`, each `n_ch x n_ch`.
#[derive(Debug, Clone)]
pub struct CovarianceSequence {
    sample_rate: f64,
    blocks: Vec<DMatrix<f64>>,
}

impl CovarianceSequence {
    /// Wrap precomputed blocks (e.g. exact covariances of a known system).
    pub fn from_blocks(sample_rate: f64, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidRate(sample_rate));
        }
        let first = blocks
            .first()
            .ok_or_else(|| Error::invalid("covariance sequence needs at least one block"))?;
        let n = first.nrows();
        if n == 0 || blocks.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::invalid(
                "covariance blocks must be square and equally sized",
            ));
        }
        Ok(CovarianceSequence {
            sample_rate,
            blocks,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn n_channels(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Largest available lag.
    pub fn max_lag(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, lag: usize) -> &DMatrix<f64> {
        &self.blocks[lag]
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }
}

/// `R_i = (1/(N-i)) sum_k y_{k+i} y_k^T` on mean-removed channels.
pub fn estimate_covariances(
    record: &TimeSeriesRecord,
    max_lag: usize,
) -> Result<CovarianceSequence> {
    estimate_covariances_with(record, max_lag, CovarianceNormalization::Unbiased)
}

pub fn estimate_covariances_with(
    record: &TimeSeriesRecord,
    max_lag: usize,
    normalization: CovarianceNormalization,
) -> Result<CovarianceSequence> {
    let n = record.n_samples();
    if 2 * max_lag >= n {
        return Err(Error::RecordTooShort {
            samples: n,
            requested: format!("covariances up to lag {max_lag}"),
        });
    }
    let centered: Vec<Vec<f64>> = record
        .columns()
        .iter()
        .map(|col| {
            let m = col.iter().sum::<f64>() / n as f64;
            col.iter().map(|v| v - m).collect()
        })
        .collect();
    let l = centered.len();
    let mut blocks = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let divisor = match normalization {
            CovarianceNormalization::Unbiased => (n - lag) as f64,
            CovarianceNormalization::Biased => n as f64,
        };
        let mut r = DMatrix::zeros(l, l);
        for a in 0..l {
            let ya = &centered[a][lag..];
            for b in 0..l {
                let yb = &centered[b][..n - lag];
                let s: f64 = ya.iter().zip(yb).map(|(p, q)| p * q).sum();
                r[(a, b)] = s / divisor;
            }
        }
        blocks.push(r);
    }
    Ok(CovarianceSequence {
        sample_rate: record.sample_rate(),
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;
    use crate::records::{ChannelKind, ChannelSpec};

    fn record(columns: Vec<Vec<f64>>) -> TimeSeriesRecord {
        let channels = (0..columns.len())
            .map(|c| ChannelSpec::new(format!("c{c}"), ChannelKind::AccelerationZ, 0.0, 0.0))
            .collect();
        TimeSeriesRecord::new(200.0, 0.0, channels, columns, BTreeMap::new()).unwrap()
    }

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn white_noise_covariance() {
        let cov = estimate_covariances(&record(vec![white(100_000, 7)]), 10).unwrap();
        assert!((cov.block(0)[(0, 0)] - 1.0).abs() < 0.05);
        assert!(cov.block(10)[(0, 0)].abs() < 0.05);
    }

    #[test]
    fn constant_signal_has_zero_covariance() {
        let cov = estimate_covariances(&record(vec![vec![3.5; 500]]), 20).unwrap();
        assert!(cov.blocks().iter().all(|b| b[(0, 0)] == 0.0));
    }

    #[test]
    fn sinusoid_autocovariance() {
        let (a, f, fs) = (2.0, 2.263, 200.0);
        let x: Vec<f64> = (0..200_000)
            .map(|k| a * (2.0 * PI * f * k as f64 / fs + 0.3).cos())
            .collect();
        let cov = estimate_covariances(&record(vec![x]), 40).unwrap();
        for i in [0usize, 5, 17, 40] {
            let expected = a * a / 2.0 * (2.0 * PI * f * i as f64 / fs).cos();
            assert!((cov.block(i)[(0, 0)] - expected).abs() < 2e-3, "lag {i}");
        }
    }

    #[test]
    fn lag_zero_block_symmetric_psd() {
        let x = white(5000, 1);
        let y: Vec<f64> = x
            .iter()
            .zip(white(5000, 2))
            .map(|(a, b)| 0.5 * a + b)
            .collect();
        let cov = estimate_covariances(&record(vec![x, y]), 5).unwrap();
        let r0 = cov.block(0);
        assert!((r0[(0, 1)] - r0[(1, 0)]).abs() < 1e-8);
        let eig = r0.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-8));
    }

    #[test]
    fn cross_covariance_indexing() {
        // y is x delayed by 3 samples: R_3(y, x) = var(x), R_3(x, y) ~ 0
        let x = white(50_000, 3);
        let mut y = vec![0.0; 3];
        y.extend_from_slice(&x[..x.len() - 3]);
        let cov = estimate_covariances(&record(vec![x, y]), 4).unwrap();
        assert!((cov.block(3)[(1, 0)] - 1.0).abs() < 0.05);
        assert!(cov.block(3)[(0, 1)].abs() < 0.05);
    }

    #[test]
    fn too_long_lag_rejected() {
        let err = estimate_covariances(&record(vec![white(100, 0)]), 50);
        assert!(matches!(err, Err(Error::RecordTooShort { .. })));
    }

    #[test]
    fn biased_normalization_divides_by_n() {
        let x = white(1000, 5);
        let u = estimate_covariances_with(
            &record(vec![x.clone()]),
            10,
            CovarianceNormalization::Unbiased,
        )
        .unwrap();
        let b = estimate_covariances_with(&record(vec![x]), 10, CovarianceNormalization::Biased)
            .unwrap();
        let ratio = b.block(10)[(0, 0)] / u.block(10)[(0, 0)];
        assert!((ratio - 990.0 / 1000.0).abs() < 1e-12);
    }
}
