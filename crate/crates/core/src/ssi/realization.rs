use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use super::covariance::CovarianceSequence;
use super::PoleEstimate;
use crate::error::{Error, Result};

/// Orders whose singular value ratio `s_order / s_1` falls below this are
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;
/// Relative cutoff of the pseudo-inverse in the shift-invariance solve.
const PINV_CUTOFF: f64 = 1e-10;

/// Discrete-time state-space pair identified from output covariances.
#[derive(Debug, Clone)]
pub struct Realization {
    /// State transition matrix, `order x order`.
    pub a: DMatrix<f64>,
    /// Output matrix, `n_ch x order`.
    pub c: DMatrix<f64>,
}

impl Realization {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
}

/// Block Hankel matrix of covariances with its SVD, reusable across model
/// orders.
#[derive(Debug, Clone)]
pub struct Realizer {
    n_ch: usize,
    hankel_rows: usize,
    u: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl Realizer {
    /// Factorize the `hankel_rows x hankel_rows` block Hankel matrix whose
    /// block `(p, q)` is `R_{p+q+1}`.
    pub fn new(cov: &CovarianceSequence, hankel_rows: usize) -> Result<Self> {
        if hankel_rows < 2 {
            return Err(Error::invalid("hankel_rows must be at least 2"));
        }
        let needed = 2 * hankel_rows - 1;
        if cov.max_lag() < needed {
            return Err(Error::invalid(format!(
                "block Hankel with {hankel_rows} block rows needs lags up to {needed}, have {}",
                cov.max_lag()
            )));
        }
        let l = cov.n_channels();
        let dim = hankel_rows * l;
        let mut h = DMatrix::zeros(dim, dim);
        for p in 0..hankel_rows {
            for q in 0..hankel_rows {
                h.view_mut((p * l, q * l), (l, l))
                    .copy_from(cov.block(p + q + 1));
            }
        }
        let svd = SVD::new(h, true, false);
        let u = svd
            .u
            .ok_or_else(|| Error::invalid("SVD did not produce U"))?;
        Ok(Realizer {
            n_ch: l,
            hankel_rows,
            u,
            singular_values: svd.singular_values.iter().copied().collect(),
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn hankel_rows(&self) -> usize {
        self.hankel_rows
    }

    /// Largest order the shift-invariance solve can determine.
    pub fn max_order(&self) -> usize {
        (self.hankel_rows - 1) * self.n_ch
    }

    pub fn realize(&self, order: usize) -> Result<Realization> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::InvalidOrder {
                order,
                reason: "order must be a positive even number".into(),
            });
        }
        if order > self.max_order() {
            return Err(Error::InvalidOrder {
                order,
                reason: format!(
                    "exceeds {} for {} block rows of {} channels",
                    self.max_order(),
                    self.hankel_rows,
                    self.n_ch
                ),
            });
        }
        let s1 = self.singular_values[0];
        let ratio = if s1 > 0.0 {
            self.singular_values[order - 1] / s1
        } else {
            0.0
        };
        if !(ratio >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient { order, ratio });
        }

        let l = self.n_ch;
        let rows = self.hankel_rows * l;
        let sqrt_s = DVector::from_iterator(
            order,
            self.singular_values[..order].iter().map(|s| s.sqrt()),
        );
        let mut obs = self.u.columns(0, order).into_owned();
        for (j, mut col) in obs.column_iter_mut().enumerate() {
            col *= sqrt_s[j];
        }
        let c = obs.rows(0, l).into_owned();
        let upper = obs.rows(0, rows - l).into_owned();
        let lower = obs.rows(l, rows - l).into_owned();
        let a = pseudo_inverse(upper)? * lower;
        Ok(Realization { a, c })
    }
}

/// `order`-state realization from a block Hankel matrix with `hankel_rows`
/// block rows.
pub fn realize_system(
    cov: &CovarianceSequence,
    order: usize,
    hankel_rows: usize,
) -> Result<Realization> {
    if order == 0 {
        return Err(Error::InvalidOrder {
            order,
            reason: "order must be positive".into(),
        });
    }
    Realizer::new(cov, hankel_rows)?.realize(order)
}

fn pseudo_inverse(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = SVD::new(m, true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::invalid("SVD did not produce singular vectors")),
    };
    let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = PINV_CUTOFF * s_max;
    let mut s_inv = DMatrix::zeros(v_t.nrows(), u.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            s_inv[(i, i)] = 1.0 / s;
        }
    }
    Ok(v_t.transpose() * s_inv * u.transpose())
}

/// Modal poles of a realization, plus a count of eigenvalues discarded on
/// the negative real axis.
#[derive(Debug, Clone)]
pub struct PoleExtraction {
    pub poles: Vec<PoleEstimate>,
    pub discarded_negative_real: usize,
}

/// Discrete eigenvalue of a mode with natural frequency `f` (Hz) and
/// damping ratio `zeta` sampled at `fs`.
pub fn discrete_pole(frequency: f64, damping_ratio: f64, sample_rate: f64) -> Complex64 {
    let omega = 2.0 * std::f64::consts::PI * frequency;
    let mu = Complex64::new(
        -damping_ratio * omega,
        omega * (1.0 - damping_ratio * damping_ratio).sqrt(),
    );
    (mu / sample_rate).exp()
}

/// Inverse of [`discrete_pole`]: `(frequency, damping_ratio)` from
/// `mu = ln(lambda) * fs` on the principal branch.
pub fn modal_parameters(lambda: Complex64, sample_rate: f64) -> (f64, f64) {
    let mu = lambda.ln() * sample_rate;
    let magnitude = mu.norm();
    (magnitude / (2.0 * std::f64::consts::PI), -mu.re / magnitude)
}

/// Eigen-analysis of `A`: one pole per conjugate pair (positive imaginary
/// part), mode shapes `C v` scaled so their largest entry is `1 + 0i`.
pub fn poles_from_realization(real: &Realization, sample_rate: f64) -> Result<PoleExtraction> {
    if !(sample_rate > 0.0) {
        return Err(Error::InvalidRate(sample_rate));
    }
    if real.a.nrows() != real.a.ncols() {
        return Err(Error::invalid("state matrix must be square"));
    }
    let order = real.a.nrows();
    let schur =
        Schur::try_new(real.a.clone(), f64::EPSILON, 1_000_000).ok_or(Error::EigenNoConvergence)?;
    let eigenvalues = schur.complex_eigenvalues();
    let a_c = real.a.map(|v| Complex64::new(v, 0.0));
    let c_c = real.c.map(|v| Complex64::new(v, 0.0));

    let mut poles = Vec::new();
    let mut discarded = 0;
    for &lambda in eigenvalues.iter() {
        if lambda.im > 0.0 {
            let (frequency, damping_ratio) = modal_parameters(lambda, sample_rate);
            let v = eigenvector(&a_c, lambda);
            let mode_shape = normalize_shape((&c_c * v).iter().copied().collect());
            poles.push(PoleEstimate {
                frequency,
                damping_ratio,
                eigenvalue: lambda,
                mode_shape,
                model_order: order,
                stable_frequency: false,
                stable_damping: false,
                stable_shape: false,
                fully_stable: false,
            });
        } else if lambda.im == 0.0 && lambda.re < 0.0 {
            discarded += 1;
        }
    }
    poles.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(PoleExtraction {
        poles,
        discarded_negative_real: discarded,
    })
}

/// Right eigenvector for `lambda` by inverse iteration.
fn eigenvector(a: &DMatrix<Complex64>, lambda: Complex64) -> DVector<Complex64> {
    let n = a.nrows();
    let shift = lambda + Complex64::new(1e-10 * lambda.norm().max(1.0), 0.0);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let lu = m.lu();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0, 0.1 * (i as f64 + 1.0)));
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(w) => {
                let norm = w.norm();
                if !(norm.is_finite() && norm > 0.0) {
                    break;
                }
                v = w.unscale(norm);
            }
            None => break,
        }
    }
    v
}

fn normalize_shape(mut shape: Vec<Complex64>) -> Vec<Complex64> {
    let pivot = shape
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()));
    if let Some(p) = pivot {
        if p.norm() > 0.0 {
            shape.iter_mut().for_each(|z| *z /= p);
        }
    }
    shape
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact covariances R_i = C A^(i-1) G of a chosen discrete system.
    fn exact_covariances(
        a: &DMatrix<f64>,
        c: &DMatrix<f64>,
        g: &DMatrix<f64>,
        lags: usize,
    ) -> CovarianceSequence {
        let mut blocks = vec![DMatrix::identity(c.nrows(), c.nrows())];
        let mut power = DMatrix::identity(a.nrows(), a.nrows());
        for _ in 1..=lags {
            blocks.push(c * &power * g);
            power = &power * a;
        }
        CovarianceSequence::from_blocks(100.0, blocks).unwrap()
    }

    fn rotation_system(f: f64, zeta: f64, fs: f64) -> DMatrix<f64> {
        let lam = discrete_pole(f, zeta, fs);
        DMatrix::from_row_slice(2, 2, &[lam.re, lam.im, -lam.im, lam.re])
    }

    #[test]
    fn two_state_system_recovered() {
        let a = rotation_system(7.0, 0.02, 100.0);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.3]);
        let g = DMatrix::from_row_slice(2, 1, &[0.5, -0.2]);
        let cov = exact_covariances(&a, &c, &g, 20);
        let real = realize_system(&cov, 2, 5).unwrap();
        let got = real.a.clone().complex_eigenvalues();
        let want = discrete_pole(7.0, 0.02, 100.0);
        let best = got
            .iter()
            .map(|z| (z - want).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "distance {best}");
    }

    #[test]
    fn invalid_orders() {
        let a = rotation_system(7.0, 0.02, 100.0);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.3]);
        let g = DMatrix::from_row_slice(2, 1, &[0.5, -0.2]);
        let cov = exact_covariances(&a, &c, &g, 20);
        assert!(matches!(
            realize_system(&cov, 0, 5),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            realize_system(&cov, 3, 5),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            realize_system(&cov, 4, 5),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn pole_conversion_examples() {
        let lam = discrete_pole(2.263, 0.0037, 200.0);
        let (f, z) = modal_parameters(lam, 200.0);
        assert!((f - 2.263).abs() < 1e-9);
        assert!((z - 0.0037).abs() < 1e-9);

        let (f, z) = modal_parameters(Complex64::new(0.0, 1.0), 200.0);
        assert!((f - 50.0).abs() < 1e-12);
        assert!(z.abs() < 1e-15);

        let real = Realization {
            a: DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]),
            c: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        };
        let ex = poles_from_realization(&real, 200.0).unwrap();
        assert!(ex.poles.is_empty());
        assert_eq!(ex.discarded_negative_real, 1);
    }

    #[test]
    fn mode_shape_normalized_to_unit_pivot() {
        let a = rotation_system(3.0, 0.01, 50.0);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        let ex = poles_from_realization(&Realization { a, c }, 50.0).unwrap();
        assert_eq!(ex.poles.len(), 1);
        let shape = &ex.poles[0].mode_shape;
        let pivot = shape
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        assert!((pivot - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(shape.iter().all(|z| z.norm() <= 1.0 + 1e-12));
        assert!((ex.poles[0].frequency - 3.0).abs() < 1e-9);
    }
}
