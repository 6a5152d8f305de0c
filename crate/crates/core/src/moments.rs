//! Moments of Gaussian quadratic forms, mis-classification estimates and Hellinger affinity.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::arw::{
    derive_scales, sample_mu, sample_precision, ArwParams, MeanVector, MixtureSampler,
    PrecisionMatrix, ScaleSet,
};
use crate::classify::TrainedClassifier;
use crate::error::{invalid, Error, Result};
use crate::linalg::SparseSym;
use crate::math;

/// `S = X'AX + 2d'X` with `X ~ N(mu, Sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFormSpec {
    pub a: DMatrix<f64>,
    pub d: DVector<f64>,
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl QuadFormSpec {
    pub fn new(
        a: DMatrix<f64>,
        d: DVector<f64>,
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let spec = QuadFormSpec { a, d, mu, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        for m in [&self.a, &self.sigma] {
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: m.nrows(),
                });
            }
            for i in 0..p {
                for j in 0..i {
                    if m[(i, j)] != m[(j, i)] {
                        return Err(Error::NotSymmetric { row: i, col: j });
                    }
                }
            }
        }
        if self.d.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: self.d.len(),
            });
        }
        crate::linalg::log_det(&self.sigma)?;
        Ok(())
    }
}

/// Closed-form mean and variance of `S`.
///
/// `mean = Tr(A Sigma) + mu'A mu + 2 d'mu`,
/// `var = 2 Tr((A Sigma)^2) + 4 (mu'A Sigma A mu + 2 mu'A Sigma d + d'Sigma d)`.
pub fn quad_form_moments(spec: &QuadFormSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let QuadFormSpec { a, d, mu, sigma } = spec;
    let a_sigma = a * sigma;
    let a_mu = a * mu;
    let mean = a_sigma.trace() + mu.dot(&a_mu) + 2.0 * d.dot(mu);
    let sigma_a_mu = sigma * &a_mu;
    let sigma_d = sigma * d;
    let var = 2.0 * (&a_sigma * &a_sigma).trace()
        + 4.0 * (a_mu.dot(&sigma_a_mu) + 2.0 * a_mu.dot(&sigma_d) + d.dot(&sigma_d));
    Ok((mean, var))
}

/// Monte Carlo moments with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMoments {
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

/// Sample mean and unbiased sample variance of `S` over `reps` draws.
pub fn mc_quad_form<R: Rng + ?Sized>(
    spec: &QuadFormSpec,
    reps: usize,
    rng: &mut R,
) -> Result<McMoments> {
    spec.validate()?;
    if reps < 100 {
        return Err(invalid("reps", "need at least 100 draws"));
    }
    let p = spec.dim();
    let l = spec
        .sigma
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { pivot: 0 })?
        .l();
    let mut draws = Vec::with_capacity(reps);
    let mut z = DVector::zeros(p);
    for _ in 0..reps {
        for v in z.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        let x = &spec.mu + &l * &z;
        let s = x.dot(&(&spec.a * &x)) + 2.0 * spec.d.dot(&x);
        draws.push(s);
    }
    let n = reps as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for s in &draws {
        let c = s - mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    let var = m2 / (n - 1.0);
    let m4 = m4 / n;
    let mv = m2 / n;
    Ok(McMoments {
        mean,
        var,
        se_mean: math::sqrt(var / n),
        se_var: math::sqrt(((m4 - mv * mv) / n).max(0.0)),
    })
}

/// Balanced mis-classification rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrEstimate {
    pub mr: f64,
    pub se: f64,
    pub n_test: usize,
    /// `(P(predict 1 | class 0), P(predict 0 | class 1))`.
    pub per_class: (f64, f64),
}

/// Draw `n_test / 2` fresh points per class and average the two error rates.
pub fn estimate_mr<R: Rng + ?Sized>(
    model: &TrainedClassifier,
    mu: &MeanVector,
    omega0: &PrecisionMatrix,
    omega1: &PrecisionMatrix,
    n_test: usize,
    rng: &mut R,
) -> Result<MrEstimate> {
    let sampler = MixtureSampler::new(mu, omega0, omega1)?;
    estimate_mr_with(model, &sampler, n_test, rng)
}

pub fn estimate_mr_with<R: Rng + ?Sized>(
    model: &TrainedClassifier,
    sampler: &MixtureSampler,
    n_test: usize,
    rng: &mut R,
) -> Result<MrEstimate> {
    if n_test < 2 {
        return Err(invalid("n_test", "need at least 2 test points"));
    }
    let m0 = n_test / 2;
    let m1 = n_test - m0;
    let mut wrong = [0usize; 2];
    for (k, m) in [(0u8, m0), (1u8, m1)] {
        for _ in 0..m {
            let x = sampler.sample_class(k, rng);
            if model.predict(&x)?.0 != k {
                wrong[k as usize] += 1;
            }
        }
    }
    Ok(mr_from_counts(wrong[0], m0, wrong[1], m1))
}

/// Balanced rate from per-class error counts.
pub fn mr_from_counts(wrong0: usize, m0: usize, wrong1: usize, m1: usize) -> MrEstimate {
    let e0 = wrong0 as f64 / m0 as f64;
    let e1 = wrong1 as f64 / m1 as f64;
    let se = 0.5 * math::sqrt(e0 * (1.0 - e0) / m0 as f64 + e1 * (1.0 - e1) / m1 as f64);
    MrEstimate {
        mr: 0.5 * (e0 + e1),
        se,
        n_test: m0 + m1,
        per_class: (e0, e1),
    }
}

/// `ln H` between `N(mu0, Omega0^{-1})` and `N(mu1, Omega1^{-1})`.
pub fn log_hellinger_exact(
    mu0: &[f64],
    mu1: &[f64],
    omega0: &SparseSym,
    omega1: &SparseSym,
) -> Result<f64> {
    let p = omega0.dim();
    for len in [mu0.len(), mu1.len(), omega1.dim()] {
        if len != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: len,
            });
        }
    }
    let ld0 = omega0.log_det()?;
    let ld1 = omega1.log_det()?;
    let sum = omega0.add(omega1)?;
    let sum_factor = sum.cholesky()?;
    let ld_avg = sum_factor.log_det() - (p as f64) * core::f64::consts::LN_2;
    let dm: Vec<f64> = mu1.iter().zip(mu0).map(|(a, b)| a - b).collect();
    let shift = if dm.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        // ((Sigma0 + Sigma1) / 2)^{-1} = 2 Omega1 (Omega0 + Omega1)^{-1} Omega0.
        let y = sum_factor.solve(&omega0.mul_vec(&dm));
        2.0 * crate::linalg::dot(&omega1.mul_vec(&dm), &y)
    };
    Ok(0.25 * ld0 + 0.25 * ld1 - 0.5 * ld_avg - 0.125 * shift)
}

/// Exact Hellinger affinity `H = integral sqrt(f g)`.
pub fn hellinger_exact(
    mu0: &[f64],
    mu1: &[f64],
    omega0: &SparseSym,
    omega1: &SparseSym,
) -> Result<f64> {
    Ok(math::exp(log_hellinger_exact(mu0, mu1, omega0, omega1)?))
}

/// Small-signal approximation `exp(-(||mu||^2 + ||Omega0 - Omega1||_F^2 / 8) / 2)` for
/// class means `-mu` and `mu`.
pub fn hellinger_approx(mu: &[f64], omega0: &SparseSym, omega1: &SparseSym) -> Result<f64> {
    let m2: f64 = mu.iter().map(|v| v * v).sum();
    let f = omega0.sub(omega1)?.frobenius_sq();
    Ok(math::exp(-0.5 * (m2 + f / 8.0)))
}

/// Mean exact affinity over `draws` model realizations at `params`.
pub fn impossibility_indicator<R: Rng + ?Sized>(
    params: &ArwParams,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    let scales = derive_scales(params)?;
    impossibility_indicator_scales(&scales, params.p, draws, rng)
}

/// [`impossibility_indicator`] for explicit scales.
pub fn impossibility_indicator_scales<R: Rng + ?Sized>(
    scales: &ScaleSet,
    p: usize,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if draws == 0 {
        return Err(invalid("draws", "need at least one draw"));
    }
    let mut total = 0.0;
    for _ in 0..draws {
        let mu = sample_mu(scales, p, rng);
        let o0 = sample_precision(scales, p, rng)?;
        let o1 = sample_precision(scales, p, rng)?;
        total += hellinger_exact(&mu.negated(), &mu.values, o0.entries(), o1.entries())?;
    }
    Ok(total / draws as f64)
}

/// Dense Gaussian log-density, used by tests as an independent oracle.
#[doc(hidden)]
pub fn dense_log_density(x: &[f64], mean: &[f64], omega: &DMatrix<f64>) -> Result<f64> {
    let p = x.len();
    let r = DVector::from_iterator(p, x.iter().zip(mean).map(|(a, b)| a - b));
    let ld = crate::linalg::log_det(omega)?;
    let q = r.dot(&(omega * &r));
    Ok(0.5 * ld - 0.5 * q - 0.5 * (p as f64) * math::ln(2.0 * core::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ideal_qda;
    use crate::rng::from_seed;

    fn random_spec(p: usize, seed: u64) -> QuadFormSpec {
        let mut rng = from_seed(seed);
        let mut g = || rng.sample::<f64, _>(StandardNormal);
        let b = DMatrix::from_fn(p, p, |_, _| g());
        let a0 = DMatrix::from_fn(p, p, |_, _| g());
        let a = (&a0 + a0.transpose()) * 0.25;
        let sigma = &b * b.transpose() / (p as f64) + DMatrix::identity(p, p) * 0.5;
        let d = DVector::from_fn(p, |_, _| g() * 0.5);
        let mu = DVector::from_fn(p, |_, _| g() * 0.5);
        QuadFormSpec::new(a, d, mu, sigma).unwrap()
    }

    #[test]
    fn chi_square_and_linear_cases() {
        let p = 7;
        let spec = QuadFormSpec::new(
            DMatrix::identity(p, p),
            DVector::zeros(p),
            DVector::zeros(p),
            DMatrix::identity(p, p),
        )
        .unwrap();
        assert_eq!(quad_form_moments(&spec).unwrap(), (7.0, 14.0));
        let mut s = random_spec(4, 1);
        s.a = DMatrix::zeros(4, 4);
        let (m, v) = quad_form_moments(&s).unwrap();
        assert!((m - 2.0 * s.d.dot(&s.mu)).abs() < 1e-12);
        assert!((v - 4.0 * s.d.dot(&(&s.sigma * &s.d))).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_a() {
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = 0.5;
        let r = QuadFormSpec::new(
            a,
            DVector::zeros(2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
        );
        assert_eq!(r, Err(Error::NotSymmetric { row: 1, col: 0 }));
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        for (k, p) in [2usize, 4, 8].into_iter().enumerate() {
            let spec = random_spec(p, 40 + k as u64);
            let (m, v) = quad_form_moments(&spec).unwrap();
            let mc = mc_quad_form(&spec, 100_000, &mut from_seed(k as u64)).unwrap();
            assert!(
                (mc.mean - m).abs() < 4.0 * mc.se_mean,
                "p={p} {} vs {m}",
                mc.mean
            );
            assert!(
                (mc.var - v).abs() < 4.0 * mc.se_var,
                "p={p} {} vs {v}",
                mc.var
            );
        }
    }

    #[test]
    fn monte_carlo_scaling_and_reproducibility() {
        let p = 5;
        let eps = 1e-3;
        let spec = QuadFormSpec::new(
            DMatrix::identity(p, p),
            DVector::zeros(p),
            DVector::zeros(p),
            DMatrix::identity(p, p) * eps,
        )
        .unwrap();
        let mc = mc_quad_form(&spec, 20_000, &mut from_seed(2)).unwrap();
        assert!((mc.mean - p as f64 * eps).abs() < 4.0 * mc.se_mean);
        let again = mc_quad_form(&spec, 20_000, &mut from_seed(2)).unwrap();
        assert_eq!(mc, again);
        assert!(mc_quad_form(&spec, 99, &mut from_seed(2)).is_err());
    }

    #[test]
    fn hellinger_identities() {
        let om = SparseSym::new(vec![1.5, 1.2, 0.8], vec![(0, 2, 0.3)]).unwrap();
        let mu = [0.1, 0.2, -0.3];
        assert!((hellinger_exact(&mu, &mu, &om, &om).unwrap() - 1.0).abs() < 1e-14);
        let m = [0.3, 0.05, 1.2, 0.7];
        let o1 = SparseSym::diagonal(m.iter().map(|v| 1.0 + v).collect());
        let h = hellinger_exact(&[0.0; 4], &[0.0; 4], &SparseSym::identity(4), &o1).unwrap();
        let want: f64 = m
            .iter()
            .map(|v| libm::pow(1.0 + v, 0.25) / libm::sqrt((2.0 + v) / 2.0))
            .product();
        assert!((h - want).abs() < 1e-14);
    }

    #[test]
    fn hellinger_matches_dense_integral_formula() {
        let o0 = SparseSym::new(vec![1.4, 1.1, 0.9], vec![(0, 1, 0.3)]).unwrap();
        let o1 = SparseSym::new(vec![0.8, 1.3, 1.2], vec![(1, 2, -0.4)]).unwrap();
        let mu0 = [0.2, -0.1, 0.5];
        let mu1 = [-0.3, 0.4, 0.0];
        let h = hellinger_exact(&mu0, &mu1, &o0, &o1).unwrap();
        // Oracle in covariance form.
        let s0 = o0.to_dense().try_inverse().unwrap();
        let s1 = o1.to_dense().try_inverse().unwrap();
        let sb = (&s0 + &s1) * 0.5;
        let dm = DVector::from_iterator(3, mu0.iter().zip(&mu1).map(|(a, b)| a - b));
        let q = dm.dot(&(sb.clone().try_inverse().unwrap() * &dm));
        let want = s0.determinant().powf(0.25) * s1.determinant().powf(0.25)
            / sb.determinant().sqrt()
            * (-0.125 * q).exp();
        assert!((h - want).abs() < 1e-12);
        let sym = hellinger_exact(&mu1, &mu0, &o1, &o0).unwrap();
        assert!((h - sym).abs() < 1e-14);
    }

    #[test]
    fn single_entry_perturbation_drops_affinity() {
        let p = 60;
        let base = SparseSym::identity(p);
        let eta = libm::pow(p as f64, -0.3);
        let pert = SparseSym::new(vec![1.0; p], vec![(3, 17, eta)]).unwrap();
        let h = hellinger_exact(&[0.0; 60], &[0.0; 60], &base, &pert).unwrap();
        assert!(h < 1.0 - 1e-6);
    }

    #[test]
    fn collapsed_model_has_unit_affinity() {
        let s = ScaleSet::new(10, 0.0, 0.1, 0.1, 0.0, 1e-9).unwrap();
        let h = impossibility_indicator_scales(&s, 100, 3, &mut from_seed(1)).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_gap_shrinks_with_scale() {
        let mut gaps = Vec::new();
        for scale in [0.1, 0.05, 0.01] {
            let p = 200;
            let mut rng = from_seed(7);
            let s = ScaleSet::new(50, 0.1, scale, scale, 0.01, scale).unwrap();
            let mu = sample_mu(&s, p, &mut rng);
            let o0 = crate::arw::sample_precision_with(
                &s,
                p,
                &crate::arw::ModelOptions {
                    diagonal: crate::arw::DiagonalLaw::RandomSign,
                    ..Default::default()
                },
                &mut rng,
            )
            .unwrap();
            let o1 = sample_precision(&s, p, &mut rng).unwrap();
            let exact = -2.0
                * log_hellinger_exact(&mu.negated(), &mu.values, o0.entries(), o1.entries())
                    .unwrap();
            let approx =
                -2.0 * libm::log(hellinger_approx(&mu.values, o0.entries(), o1.entries()).unwrap());
            gaps.push(((exact - approx) / exact).abs());
        }
        assert!(gaps[2] < gaps[0], "{gaps:?}");
        assert!(gaps[2] < 0.05, "{gaps:?}");
    }

    #[test]
    fn mr_estimate_edge_cases() {
        let p = 3;
        let mu = MeanVector::from_values(vec![20.0; p]);
        let eye = PrecisionMatrix::identity(p);
        let model = ideal_qda(&mu, eye.entries(), eye.entries()).unwrap();
        let est = estimate_mr(&model, &mu, &eye, &eye, 400, &mut from_seed(1)).unwrap();
        assert_eq!(est.mr, 0.0);
        assert!((est.mr - 0.5 * (est.per_class.0 + est.per_class.1)).abs() < 1e-15);
        let flat = ideal_qda(&MeanVector::zeros(p), eye.entries(), eye.entries()).unwrap();
        let coin = estimate_mr(&flat, &mu, &eye, &eye, 400, &mut from_seed(2)).unwrap();
        // A constant rule errs on exactly one class.
        assert_eq!(coin.mr, 0.5);
    }

    #[test]
    fn dense_density_oracle_is_normalized_at_mode() {
        let om = DMatrix::identity(2, 2);
        let v = dense_log_density(&[0.0, 0.0], &[0.0, 0.0], &om).unwrap();
        assert!((v + libm::log(2.0 * core::f64::consts::PI)).abs() < 1e-14);
    }
}
