//! Trapezoid estimators of the truncated Fourier transform
//! `F_T(omega) = T^{-1/2} int_0^T e^{-i omega t} Y_t dt` on irregular grids,
//! and the exact finite-horizon second moments they converge to.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::model::CarmaSpec;
use crate::simulate::{FinePath, SamplePath};

/// `e^{-i omega x}`.
#[inline]
fn phase(omega: f64, x: f64) -> Complex64 {
    let (s, c) = (omega * x).sin_cos();
    Complex64::new(c, -s)
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(invalid("trapezoid rule needs at least two points"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid times must be strictly increasing"));
    }
    Ok(())
}

/// Trapezoid weights `alpha_j` for `int e^{-i omega x} y(x) dx` on `times`:
/// half the span of the neighbouring cells times the phase.
pub fn trapezoid_weights(times: &[f64], omega: f64) -> Result<Vec<Complex64>> {
    check_grid(times)?;
    let n = times.len();
    Ok((0..n)
        .map(|j| {
            let left = if j > 0 { times[j - 1] } else { times[0] };
            let right = if j + 1 < n { times[j + 1] } else { times[n - 1] };
            phase(omega, times[j]) * (0.5 * (right - left))
        })
        .collect())
}

/// `sum_j alpha_j y_j`, the trapezoid approximation of `int e^{-i omega x} y(x) dx`.
pub fn integrate_trapezoid(times: &[f64], values: &[f64], omega: f64) -> Result<Complex64> {
    check_grid(times)?;
    if times.len() != values.len() {
        return Err(invalid(format!("{} values for {} grid points", values.len(), times.len())));
    }
    let n = times.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let left = times[j.saturating_sub(1)];
        let right = times[(j + 1).min(n - 1)];
        acc += phase(omega, times[j]) * (0.5 * (right - left) * values[j]);
    }
    Ok(acc)
}

/// `intervals * h^3 / 12 * sup |f''|`, the composite trapezoid error bound.
pub fn error_bound(intervals: usize, h_max: f64, sup_second_derivative: f64) -> f64 {
    intervals as f64 * h_max.powi(3) / 12.0 * sup_second_derivative
}

/// One evaluation of the normalised truncated Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtSample {
    pub omega: f64,
    pub value: Complex64,
    pub horizon: f64,
    pub n_points: usize,
    pub h_max: f64,
    /// `(master_seed, stream_index)` of the generating path, when known.
    pub seed: Option<(u64, u64)>,
}

/// `T^{-1/2} sum_j alpha_j Y_j` over the path's grid, `T` the grid's length.
pub fn truncated_ft(path: &SamplePath, omega: f64) -> Result<FtSample> {
    let horizon = path.grid.horizon();
    let raw = integrate_trapezoid(path.grid.times(), &path.y, omega)?;
    Ok(FtSample {
        omega,
        value: raw / horizon.sqrt(),
        horizon,
        n_points: path.grid.len(),
        h_max: path.grid.h_max(),
        seed: path.metadata.as_ref().map(|m| (m.master_seed, m.stream_index)),
    })
}

/// [`truncated_ft`] at several frequencies.
pub fn truncated_ft_many(path: &SamplePath, omegas: &[f64]) -> Result<Vec<FtSample>> {
    omegas.iter().map(|&w| truncated_ft(path, w)).collect()
}

/// The same estimator on the fine simulation grid, a proxy for the exact
/// integral of the simulated path.
pub fn fine_ft_oracle(fine: &FinePath, omega: f64) -> Result<Complex64> {
    let horizon = fine.times[fine.times.len() - 1] - fine.times[0];
    Ok(integrate_trapezoid(&fine.times, &fine.y, omega)? / horizon.sqrt())
}

/// Which closed form of the finite-horizon correction to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KFormula {
    /// Derived from the state-space solution; agrees with direct integration
    /// of the autocovariance.
    #[default]
    Derived,
    /// The published expression: opposite sign on the two boundary-resolvent
    /// terms and transposed pairing in the stationary-covariance terms.
    AsPrinted,
}

fn eye(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n)
}

fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    linalg::solve_complex(m, &eye(m.rows()))
}

fn unit_last(n: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(n, n);
    e[(n - 1, n - 1)] = Complex64::new(1.0, 0.0);
    e
}

fn quad(b: &[f64], m: &ComplexMatrix) -> Complex64 {
    let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let v = m.mul_vec(&bc);
    bc.iter().zip(&v).map(|(x, y)| x * y).sum()
}

/// `int_0^T e^{-i s t} dt`.
fn phase_integral(s: f64, horizon: f64) -> Complex64 {
    if s == 0.0 {
        Complex64::new(horizon, 0.0)
    } else {
        (Complex64::new(1.0, 0.0) - phase(s, horizon)) / Complex64::new(0.0, s)
    }
}

/// Middle matrices of `T E[F(w1) F(w2)] = b^T R1 M R2^T b`, split into the
/// term growing with `T` and the bounded remainder.
fn middle_terms(
    spec: &CarmaSpec,
    horizon: f64,
    omega1: f64,
    omega2: f64,
    form: KFormula,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let n = spec.p();
    let a = spec.state_matrix().to_complex();
    let at = a.transpose();
    let sigma2 = Complex64::new(spec.sigma2(), 0.0);
    let big_e = linalg::mat_exp(spec.state_matrix(), horizon)?.to_complex();
    let big_et = big_e.transpose();
    let p_x = spec.stationary_covariance()?.to_complex();
    let ee = unit_last(n);
    let s = omega1 + omega2;
    let tail = phase(s, horizon);
    let i = Complex64::new(0.0, 1.0);

    let r1 = linalg::resolvent(spec.state_matrix(), omega1)?;
    let r2t = linalg::resolvent(spec.state_matrix(), omega2)?.transpose();

    let growing = ee.scaled(sigma2 * phase_integral(s, horizon));

    let back1 = inverse(&eye(n).scaled(i * omega1).add(&at))?;
    let i12 = ee
        .matmul(&back1)
        .matmul(&big_et.scaled(phase(-omega1, horizon)).sub(&eye(n)))
        .scaled(sigma2 * tail);
    let back2 = inverse(&eye(n).scaled(i * omega2).add(&a))?;
    let i13 = back2
        .matmul(&big_e.scaled(phase(-omega2, horizon)).sub(&eye(n)))
        .matmul(&ee)
        .scaled(sigma2 * tail);

    let stationary = p_x.scaled(Complex64::new(1.0, 0.0) + tail);
    let (left, right) = match form {
        KFormula::Derived => (big_e.matmul(&p_x), p_x.matmul(&big_et)),
        KFormula::AsPrinted => (p_x.matmul(&big_et), big_e.matmul(&p_x)),
    };
    let stationary = stationary
        .sub(&left.scaled(phase(omega1, horizon)))
        .sub(&right.scaled(phase(omega2, horizon)));
    let boundary = match form {
        KFormula::Derived => stationary.sub(&i12).sub(&i13),
        KFormula::AsPrinted => stationary.add(&i12).add(&i13),
    };
    Ok((r1, growing, boundary, r2t))
}

/// The bounded correction `K` in
/// `T E[F(w1) F(w2)] = sigma2 H(w1) H(w2) int_0^T e^{-i(w1+w2)t} dt + K`.
pub fn finite_horizon_correction(
    spec: &CarmaSpec,
    horizon: f64,
    omega1: f64,
    omega2: f64,
    form: KFormula,
) -> Result<Complex64> {
    let (r1, _, boundary, r2t) = middle_terms(spec, horizon, omega1, omega2, form)?;
    Ok(quad(spec.ma_coeffs(), &r1.matmul(&boundary).matmul(&r2t)))
}

/// Exact `E[F_T(w1) F_T(w2)]` for the stationary process on `[0, T]`.
/// At `w2 = -w1` this is `E|F_T(w1)|^2 = sigma2 |H(w1)|^2 + K / T`.
pub fn theoretical_product_mean(
    spec: &CarmaSpec,
    horizon: f64,
    omega1: f64,
    omega2: f64,
    form: KFormula,
) -> Result<Complex64> {
    let (r1, growing, boundary, r2t) = middle_terms(spec, horizon, omega1, omega2, form)?;
    let total = r1.matmul(&growing.add(&boundary)).matmul(&r2t);
    Ok(quad(spec.ma_coeffs(), &total) / horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::RngStream;
    use crate::grid::ObservationGrid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn car1() -> CarmaSpec {
        CarmaSpec::car1(1.0, 2.0, 1.0).unwrap()
    }

    fn carma21() -> CarmaSpec {
        CarmaSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn weight_examples() {
        let w = trapezoid_weights(&[0.0, 0.5, 1.0], 0.0).unwrap();
        assert_eq!(w, vec![c(0.25, 0.0), c(0.5, 0.0), c(0.25, 0.0)]);
        let w = trapezoid_weights(&[0.0, 0.1, 0.9, 1.0], 0.0).unwrap();
        let want = [0.05, 0.45, 0.45, 0.05];
        for (x, y) in w.iter().zip(want) {
            assert!((x.re - y).abs() < 1e-15 && x.im == 0.0);
        }
        let w = trapezoid_weights(&[0.0, 1.0], PI).unwrap();
        assert!(close(w[1], c(-0.5, 0.0), 1e-15));
        assert!(trapezoid_weights(&[0.0], 1.0).is_err());
        assert!(trapezoid_weights(&[0.0, 0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn exact_for_affine_and_constant() {
        let g = ObservationGrid::non_equidistant(10.0, 0.1, &mut RngStream::new(2, 0)).unwrap();
        let t = g.times();
        let ones = vec![1.0; t.len()];
        assert!((integrate_trapezoid(t, &ones, 0.0).unwrap().re - 10.0).abs() < 1e-11);
        let affine: Vec<f64> = t.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((integrate_trapezoid(t, &affine, 0.0).unwrap().re - 140.0).abs() < 1e-10);
        let zeros = vec![0.0; t.len()];
        assert_eq!(integrate_trapezoid(t, &zeros, 2.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn quadratic_example() {
        let t = [0.0, 0.5, 1.0];
        let y: Vec<f64> = t.iter().map(|x| x * x).collect();
        let v = integrate_trapezoid(&t, &y, 0.0).unwrap();
        assert_eq!(v, c(0.375, 0.0));
        // error 1/24 equals the bound 2 * 0.5^3 / 12 * 2
        assert!((v.re - 1.0 / 3.0) <= error_bound(2, 0.5, 2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn sine_error_bound_over_many_grids() {
        let exact = 2.0;
        for seed in 0..1000 {
            let g = ObservationGrid::jittered(PI, 126, &mut RngStream::new(seed, 7)).unwrap();
            let y: Vec<f64> = g.times().iter().map(|x| x.sin()).collect();
            let err = (integrate_trapezoid(g.times(), &y, 0.0).unwrap().re - exact).abs();
            let bound = error_bound(g.len() - 1, g.max_gap(), 1.0);
            assert!(err <= bound * (1.0 + 1e-12), "seed {seed}: {err} > {bound}");
        }
    }

    #[test]
    fn oscillatory_integrand() {
        // int_0^{2 pi} e^{-i t} cos t dt = pi
        let n = 20_000;
        let t: Vec<f64> = (0..=n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| x.cos()).collect();
        assert!(close(integrate_trapezoid(&t, &y, 1.0).unwrap(), c(PI, 0.0), 1e-6));
    }

    #[test]
    fn normalisation_and_metadata() {
        let g = ObservationGrid::from_times(vec![0.0, 2.0, 4.0]).unwrap();
        let p = SamplePath::new(g, vec![1.0, 1.0, 1.0]).unwrap();
        let f = truncated_ft(&p, 0.0).unwrap();
        assert!((f.value.re - 2.0).abs() < 1e-15);
        assert_eq!((f.horizon, f.n_points, f.seed), (4.0, 3, None));
        assert_eq!(truncated_ft_many(&p, &[0.0, 1.0]).unwrap().len(), 2);
    }

    /// Independent oracle: `gamma(h) = sum_k c_k e^{lambda_k |h|}` integrated
    /// over the square in closed form.
    fn modal_oracle(roots: &[Complex64], weights: &[Complex64], horizon: f64, w1: f64, w2: f64) -> Complex64 {
        let g = |z: Complex64| {
            if z.norm() == 0.0 {
                c(horizon, 0.0)
            } else {
                ((z * horizon).exp() - 1.0) / z
            }
        };
        let i = c(0.0, 1.0);
        let s = w1 + w2;
        roots
            .iter()
            .zip(weights)
            .map(|(&l, &ck)| {
                ck * ((g(l - i * w1) - g(-i * s)) / (l + i * w2) + (g(l - i * w2) - g(-i * s)) / (l + i * w1))
            })
            .sum::<Complex64>()
            / horizon
    }

    fn car1_oracle(t: f64, w1: f64, w2: f64) -> Complex64 {
        // gamma(h) = e^{-2|h|} / 4
        modal_oracle(&[c(-2.0, 0.0)], &[c(0.25, 0.0)], t, w1, w2)
    }

    fn carma21_oracle(t: f64, w1: f64, w2: f64) -> Complex64 {
        // roots of z^2 + z + 2; c_k = b(l) b(-l) / (a'(l) a(-l)) with b(z) = 1 + z
        let r = 7.0_f64.sqrt() / 2.0;
        let roots = [c(-0.5, r), c(-0.5, -r)];
        let weights: Vec<Complex64> = roots
            .iter()
            .map(|&l| (1.0 + l) * (1.0 - l) / ((2.0 * l + 1.0) * (l * l - l + 2.0)))
            .collect();
        modal_oracle(&roots, &weights, t, w1, w2)
    }

    #[test]
    fn modal_oracle_reproduces_variance() {
        // gamma(0) from the modal weights
        let r = 7.0_f64.sqrt() / 2.0;
        let total: Complex64 = [c(-0.5, r), c(-0.5, -r)]
            .iter()
            .map(|&l| (1.0 + l) * (1.0 - l) / ((2.0 * l + 1.0) * (l * l - l + 2.0)))
            .sum();
        assert!(close(total, c(0.75, 0.0), 1e-14));
    }

    #[test]
    fn derived_form_matches_oracle() {
        for &(t, w1, w2) in &[(50.0, 1.0, -1.0), (10.0, 0.1, -0.1), (7.3, 0.4, 1.3), (20.0, 0.0, 0.0), (3.0, -2.0, 0.5)] {
            let got = theoretical_product_mean(&car1(), t, w1, w2, KFormula::Derived).unwrap();
            let want = car1_oracle(t, w1, w2);
            assert!(close(got, want, 1e-11 * (1.0 + want.norm())), "car1 {t} {w1} {w2}: {got} vs {want}");
            let got = theoretical_product_mean(&carma21(), t, w1, w2, KFormula::Derived).unwrap();
            let want = carma21_oracle(t, w1, w2);
            assert!(close(got, want, 1e-11 * (1.0 + want.norm())), "carma21 {t} {w1} {w2}: {got} vs {want}");
        }
    }

    #[test]
    fn printed_form_differs_from_oracle() {
        let got = theoretical_product_mean(&car1(), 50.0, 1.0, -1.0, KFormula::AsPrinted).unwrap();
        let want = car1_oracle(50.0, 1.0, -1.0);
        assert!(!close(got, want, 1e-6), "{got} vs {want}");
    }

    #[test]
    fn car1_correction_example() {
        let k = finite_horizon_correction(&car1(), 50.0, 1.0, -1.0, KFormula::Derived).unwrap();
        assert!(k.im.abs() < 1e-12);
        assert!((k.re / 50.0 + 0.0012).abs() < 1e-4, "{}", k.re / 50.0);
    }

    #[test]
    fn long_horizon_limit() {
        let v = theoretical_product_mean(&car1(), 1e4, 1.0, -1.0, KFormula::Derived).unwrap();
        assert!((v.re - 0.2).abs() < 1e-3 && v.im.abs() < 1e-12);
        let v = theoretical_product_mean(&carma21(), 1e4, 1.0, -1.0, KFormula::Derived).unwrap();
        let limit = carma21().sigma2() * carma21().transfer(1.0).norm_sqr();
        assert!((v.re - limit).abs() < 1e-3);
    }

    #[test]
    fn decay_off_the_antidiagonal() {
        let short = theoretical_product_mean(&car1(), 10.0, 1.0, 0.5, KFormula::Derived).unwrap().norm();
        let long = theoretical_product_mean(&car1(), 1000.0, 1.0, 0.5, KFormula::Derived).unwrap().norm();
        assert!(long < short / 50.0, "{short} {long}");
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(seed in 0u64..1000, omega in -20.0f64..20.0) {
            let g = ObservationGrid::non_equidistant(5.0, 0.1, &mut RngStream::new(seed, 0)).unwrap();
            let mut rng = RngStream::new(seed, 1);
            let y: Vec<f64> = g.times().iter().map(|_| rng.standard_normal()).collect();
            let plus = integrate_trapezoid(g.times(), &y, omega).unwrap();
            let minus = integrate_trapezoid(g.times(), &y, -omega).unwrap();
            prop_assert!(close(plus, minus.conj(), 1e-12));
        }

        #[test]
        fn linearity(seed in 0u64..1000, omega in -20.0f64..20.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = ObservationGrid::non_equidistant(5.0, 0.1, &mut RngStream::new(seed, 0)).unwrap();
            let mut rng = RngStream::new(seed, 1);
            let y: Vec<f64> = g.times().iter().map(|_| rng.standard_normal()).collect();
            let z: Vec<f64> = g.times().iter().map(|_| rng.standard_normal()).collect();
            let mix: Vec<f64> = y.iter().zip(&z).map(|(u, v)| a * u + b * v).collect();
            let t = g.times();
            let lhs = integrate_trapezoid(t, &mix, omega).unwrap();
            let rhs = integrate_trapezoid(t, &y, omega).unwrap() * a + integrate_trapezoid(t, &z, omega).unwrap() * b;
            prop_assert!(close(lhs, rhs, 1e-10));
        }

        #[test]
        fn product_mean_is_hermitian_in_frequency(t in 1.0f64..60.0, w in -5.0f64..5.0) {
            let s = carma21();
            let v = theoretical_product_mean(&s, t, w, -w, KFormula::Derived).unwrap();
            prop_assert!(v.im.abs() < 1e-10 * (1.0 + v.re.abs()));
            prop_assert!(v.re > 0.0);
        }
    }
}
