//! CARMA(p, q) model: polynomials, transfer function, spectral density,
//! stationary moments and the limit laws of the truncated Fourier transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CarmaError, Result};
use crate::linalg::{self, RealMatrix};

/// Validated CARMA(p, q) specification.
///
/// `a = [a_1, ..., a_p]` are the autoregressive coefficients of
/// `a(z) = z^p + a_1 z^{p-1} + ... + a_p`, `b = [b_0, ..., b_{p-1}]` the
/// moving-average coefficients of `b(z) = b_0 + b_1 z + ... + b_{p-1} z^{p-1}`
/// (always stored with length `p`), and `sigma2` the variance of `L(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct CarmaSpec {
    q: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    sigma2: f64,
    state_matrix: RealMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSpec {
    p: usize,
    q: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    sigma2: f64,
}

impl TryFrom<RawSpec> for CarmaSpec {
    type Error = CarmaError;

    fn try_from(raw: RawSpec) -> Result<Self> {
        if raw.a.len() != raw.p {
            return Err(CarmaError::InvalidModel(format!(
                "p = {} but {} autoregressive coefficients given",
                raw.p,
                raw.a.len()
            )));
        }
        let spec = CarmaSpec::new(raw.a, raw.b, raw.sigma2)?;
        if spec.q != raw.q {
            return Err(CarmaError::InvalidModel(format!(
                "q = {} but the highest non-zero MA coefficient is b_{} (need b_q != 0 and b_j = 0 for q < j < p)",
                raw.q, spec.q
            )));
        }
        Ok(spec)
    }
}

impl From<CarmaSpec> for RawSpec {
    fn from(spec: CarmaSpec) -> Self {
        RawSpec {
            p: spec.a.len(),
            q: spec.q,
            a: spec.a,
            b: spec.b,
            sigma2: spec.sigma2,
        }
    }
}

impl CarmaSpec {
    /// Builds and validates a specification. `b` may be shorter than `p`; it
    /// is zero-padded. `q` is the index of the last non-zero MA coefficient.
    pub fn new(a: Vec<f64>, mut b: Vec<f64>, sigma2: f64) -> Result<Self> {
        let p = a.len();
        if p == 0 {
            return Err(CarmaError::InvalidModel("p must be at least 1".into()));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(CarmaError::InvalidModel("non-finite coefficient".into()));
        }
        if b.len() > p {
            return Err(CarmaError::InvalidModel(format!(
                "p > q violated: {} MA coefficients for p = {p}",
                b.len()
            )));
        }
        b.resize(p, 0.0);
        let q = b
            .iter()
            .rposition(|&x| x != 0.0)
            .ok_or_else(|| CarmaError::InvalidModel("b_q != 0 violated: all MA coefficients are zero".into()))?;
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(CarmaError::InvalidModel(format!(
                "driver variance sigma2 must be positive and finite, got {sigma2}"
            )));
        }
        if !linalg::is_stable(&a) {
            return Err(CarmaError::InvalidModel(format!(
                "stability violated: a(z) with coefficients {a:?} has a root with non-negative real part"
            )));
        }
        let state_matrix = linalg::companion(&a)?;
        Ok(Self {
            q,
            a,
            b,
            sigma2,
            state_matrix,
        })
    }

    /// CAR(1) with `a(z) = z + a1` and `b(z) = b0`.
    pub fn car1(b0: f64, a1: f64, sigma2: f64) -> Result<Self> {
        Self::new(vec![a1], vec![b0], sigma2)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ar_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn ma_coeffs(&self) -> &[f64] {
        &self.b
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Same model with a different driver variance.
    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), sigma2)
    }

    /// Short hex digest of the canonical JSON form, used to label outputs.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serialises");
        crate::hex_digest(json.as_bytes())[..16].to_string()
    }

    /// The companion matrix `A`.
    pub fn state_matrix(&self) -> &RealMatrix {
        &self.state_matrix
    }

    /// `a(z)` by Horner's rule.
    pub fn poly_a(&self, z: Complex64) -> Complex64 {
        linalg::eval_monic(&self.a, z)
    }

    /// `b(z)` by Horner's rule.
    pub fn poly_b(&self, z: Complex64) -> Complex64 {
        self.b
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Transfer function `H(omega) = b(i omega) / a(i omega)`.
    pub fn transfer(&self, omega: f64) -> Complex64 {
        let z = Complex64::new(0.0, omega);
        self.poly_b(z) / self.poly_a(z)
    }

    /// `f_Y(omega) = sigma2 / (2 pi) |H(omega)|^2`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.sigma2 / (2.0 * PI) * self.transfer(omega).norm_sqr()
    }

    /// Roots of `a(z)`, i.e. the eigenvalues of `A`.
    pub fn ar_roots(&self) -> Result<Vec<Complex64>> {
        linalg::poly_roots(&self.a)
    }

    /// `|max Re lambda|` over the roots of `a(z)`: the decay rate of the slowest mode.
    pub fn slowest_decay_rate(&self) -> Result<f64> {
        let max_re = self
            .ar_roots()?
            .iter()
            .map(|r| r.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(-max_re)
    }

    /// Stationary state covariance `P_X`, the solution of `A P + P A^T + sigma2 e e^T = 0`.
    pub fn stationary_covariance(&self) -> Result<RealMatrix> {
        linalg::lyapunov_solve(&self.state_matrix, self.sigma2)
    }

    /// `gamma_Y(h) = b^T e^{A|h|} P_X b`.
    pub fn autocovariance(&self, lag: f64) -> Result<f64> {
        let p_x = self.stationary_covariance()?;
        let prop = linalg::mat_exp(&self.state_matrix, lag.abs())?;
        let v = prop.matmul(&p_x).mul_vec(&self.b);
        Ok(self.b.iter().zip(&v).map(|(x, y)| x * y).sum())
    }

    /// Limit law of the normalised truncated Fourier transform at `omega`.
    pub fn limit_law(&self, omega: f64, statistic: Statistic) -> Result<LimitLaw> {
        let kind = match statistic {
            Statistic::ReIm | Statistic::ModulusSquared if omega <= 0.0 => {
                return Err(invalid(format!(
                    "{statistic:?} limit law needs a positive frequency, got {omega}"
                )))
            }
            Statistic::ZeroFreq | Statistic::ZeroFreqChiSq if omega != 0.0 => {
                return Err(invalid(format!(
                    "{statistic:?} limit law needs frequency 0, got {omega}"
                )))
            }
            Statistic::ReIm => LimitKind::ComplexIsotropicNormal {
                variance: 0.5 * self.sigma2 * self.transfer(omega).norm_sqr(),
            },
            Statistic::ModulusSquared => LimitKind::ExponentialModulus {
                mean: self.sigma2 * self.transfer(omega).norm_sqr(),
            },
            Statistic::ZeroFreq => LimitKind::RealNormal {
                variance: self.zero_frequency_variance(),
            },
            Statistic::ZeroFreqChiSq => LimitKind::ScaledChiSquared1 {
                scale: self.zero_frequency_variance(),
            },
        };
        Ok(LimitLaw { omega, kind })
    }

    /// `(b(0) / a(0))^2 sigma2`.
    fn zero_frequency_variance(&self) -> f64 {
        let ratio = self.b[0] / self.a[self.a.len() - 1];
        ratio * ratio * self.sigma2
    }
}

/// Which functional of the transform a limit law describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Real and imaginary parts at a positive frequency.
    ReIm,
    /// `|T|^2` at a positive frequency.
    ModulusSquared,
    /// The (real) transform at frequency zero.
    ZeroFreq,
    /// Squared standardised transform at frequency zero.
    ZeroFreqChiSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    /// `N(0, variance)` on the real line.
    RealNormal { variance: f64 },
    /// Independent `N(0, variance)` real and imaginary parts.
    ComplexIsotropicNormal { variance: f64 },
    /// `Exp` with the given mean.
    ExponentialModulus { mean: f64 },
    /// `x^2 / scale` is chi-squared with one degree of freedom.
    ScaledChiSquared1 { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub omega: f64,
    pub kind: LimitKind,
}
