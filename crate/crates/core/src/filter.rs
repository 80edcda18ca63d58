//! Zero-phase band-pass filtering with cascaded second-order sections.

use crate::error::{Error, Result};
use crate::spectral::Band;

/// One biquad in direct form II transposed, normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn run(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let out = self.b0 * input + z1;
            z1 = self.b1 * input - self.a1 * out + z2;
            z2 = self.b2 * input - self.a2 * out;
            *v = out;
        }
    }
}

/// Band-pass made of identical constant-peak-gain sections centered on the
/// geometric mean of the band edges, applied forward and backward.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    band: Band,
    sample_rate: f64,
    sections: Vec<Biquad>,
    pad: usize,
}

impl BandPass {
    pub fn design(band: Band, sample_rate: f64, n_sections: usize) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidRate(sample_rate));
        }
        if band.lo <= 0.0 || band.hi >= sample_rate / 2.0 {
            return Err(Error::invalid(format!(
                "band-pass edges [{}, {}] Hz must lie strictly inside (0, {}) Hz",
                band.lo,
                band.hi,
                sample_rate / 2.0
            )));
        }
        if n_sections == 0 {
            return Err(Error::invalid("band-pass needs at least one section"));
        }
        let f0 = (band.lo * band.hi).sqrt();
        let q = f0 / (band.hi - band.lo);
        let w0 = 2.0 * std::f64::consts::PI * f0 / sample_rate;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        let section = Biquad {
            b0: alpha / a0,
            b1: 0.0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
        };
        // roughly three time constants of the cascade
        let pad = (3.0 * sample_rate / (band.hi - band.lo)).ceil() as usize * n_sections;
        Ok(BandPass {
            band,
            sample_rate,
            sections: vec![section; n_sections],
            pad,
        })
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Time for the start-up transient of the cascade to fall to about
    /// `e^-3` of its initial size.
    pub fn settling_time(&self) -> f64 {
        3.0 * self.sections.len() as f64 / (std::f64::consts::PI * (self.band.hi - self.band.lo))
    }

    fn run_all(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Forward-backward filtering with odd-reflection padding at both ends.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.pad.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.run_all(&mut ext);
        ext.reverse();
        self.run_all(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| (2.0 * PI * f * k as f64 / fs).sin())
            .collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn passes_center_and_rejects_far_tones() {
        let fs = 200.0;
        let bp = BandPass::design(Band::new(1.763, 2.763).unwrap(), fs, 2).unwrap();
        let center = (1.763f64 * 2.763).sqrt();
        let pass = bp.filtfilt(&tone(center, fs, 20_000));
        assert!(
            (rms(&pass[4000..16000]) - rms(&tone(center, fs, 20_000)[4000..16000])).abs() < 1e-3
        );
        let stop = bp.filtfilt(&tone(7.906, fs, 20_000));
        assert!(rms(&stop[4000..16000]) < 1e-3);
    }

    #[test]
    fn zero_phase_at_center() {
        let fs = 200.0;
        let bp = BandPass::design(Band::new(3.0, 4.5).unwrap(), fs, 2).unwrap();
        let f = (3.0f64 * 4.5).sqrt();
        let x = tone(f, fs, 10_000);
        let y = bp.filtfilt(&x);
        for k in 3000..7000 {
            assert!((x[k] - y[k]).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_designs() {
        assert!(BandPass::design(Band::new(1.0, 120.0).unwrap(), 200.0, 1).is_err());
        assert!(BandPass::design(Band::new(1.0, 2.0).unwrap(), 200.0, 0).is_err());
    }
}
