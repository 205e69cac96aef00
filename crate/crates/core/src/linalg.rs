//! Small dense linear algebra for the CARMA state-space machinery.
//!
//! Everything here works on `p x p` matrices with `p <= 10`, so the routines
//! favour plain dense elimination over anything clever.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{invalid, CarmaError, Result};

/// Complex scalar used for polynomial values, transfer functions and transforms.
pub type ComplexScalar = Complex64;

/// Real dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        Self::from_row_major(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scaled(-1.0))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Complex dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn real_part(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.re).collect(),
        }
    }

    pub fn imag_part(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.im).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Field operations needed by Gaussian elimination.
trait Pivot: Copy + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> + std::ops::Div<Output = Self> {
    fn magnitude(self) -> f64;
}

impl Pivot for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Pivot for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Solves `A X = B` in place by partial-pivot elimination. `a` is `n x n`,
/// `b` is `n x m`, both row-major. On return `b` holds `X`.
fn gauss_solve<T: Pivot>(n: usize, a: &mut [T], m: usize, b: &mut [T]) -> Result<()> {
    let scale = a.iter().fold(0.0_f64, |s, x| s.max(x.magnitude()));
    if scale == 0.0 {
        return Err(CarmaError::Singular("zero matrix".into()));
    }
    for col in 0..n {
        let (piv, piv_mag) = (col..n)
            .map(|r| (r, a[r * n + col].magnitude()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_mag <= scale * 1e-14 {
            return Err(CarmaError::Singular(format!("pivot {piv_mag:e} in column {col}")));
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            for j in 0..m {
                b.swap(col * m + j, piv * m + j);
            }
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f.magnitude() == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] = a[r * n + j] - f * a[col * n + j];
            }
            for j in 0..m {
                b[r * m + j] = b[r * m + j] - f * b[col * m + j];
            }
        }
    }
    for col in (0..n).rev() {
        let d = a[col * n + col];
        for j in 0..m {
            let mut acc = b[col * m + j];
            for k in col + 1..n {
                acc = acc - a[col * n + k] * b[k * m + j];
            }
            b[col * m + j] = acc / d;
        }
    }
    Ok(())
}

/// Solves `A X = B` for real matrices.
pub fn solve(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    if !a.is_square() || a.rows != b.rows {
        return Err(invalid("solve: shape mismatch"));
    }
    let mut lhs = a.data.clone();
    let mut rhs = b.data.clone();
    gauss_solve(a.rows, &mut lhs, b.cols, &mut rhs)?;
    Ok(RealMatrix {
        rows: b.rows,
        cols: b.cols,
        data: rhs,
    })
}

/// Solves `A X = B` for complex matrices.
pub fn solve_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != a.cols || a.rows != b.rows {
        return Err(invalid("solve: shape mismatch"));
    }
    let mut lhs = a.data.clone();
    let mut rhs = b.data.clone();
    gauss_solve(a.rows, &mut lhs, b.cols, &mut rhs)?;
    Ok(ComplexMatrix {
        rows: b.rows,
        cols: b.cols,
        data: rhs,
    })
}

/// Companion matrix of `a(z) = z^p + a_1 z^{p-1} + ... + a_p`: ones on the
/// superdiagonal and `(-a_p, ..., -a_1)` in the last row.
pub fn companion(a_coeffs: &[f64]) -> Result<RealMatrix> {
    let p = a_coeffs.len();
    if p == 0 {
        return Err(invalid("companion: empty coefficient list"));
    }
    let mut m = RealMatrix::zeros(p, p);
    for i in 0..p - 1 {
        m[(i, i + 1)] = 1.0;
    }
    for (j, &coef) in a_coeffs.iter().rev().enumerate() {
        m[(p - 1, j)] = -coef;
    }
    Ok(m)
}

const PADE_ORDER: usize = 8;

/// `e^{A t}` by scaling and squaring around a diagonal Pade approximant.
///
/// The argument is scaled so that `||A t / 2^s||_1 <= 1/2`; at that radius
/// the [8/8] approximant is accurate far below double precision.
pub fn mat_exp(a: &RealMatrix, t: f64) -> Result<RealMatrix> {
    if !a.is_square() {
        return Err(invalid("mat_exp: matrix is not square"));
    }
    if !t.is_finite() {
        return Err(invalid("mat_exp: non-finite time"));
    }
    let n = a.rows;
    let at = a.scaled(t);
    let norm = at.norm_one();
    if norm == 0.0 {
        return Ok(RealMatrix::identity(n));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = at.scaled(0.5_f64.powi(squarings));

    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!), built by the ratio recurrence
    let mut coef = 1.0;
    let mut numer = RealMatrix::identity(n);
    let mut denom = RealMatrix::identity(n);
    let mut power = RealMatrix::identity(n);
    for k in 1..=PADE_ORDER {
        coef *= (PADE_ORDER - k + 1) as f64 / (k * (2 * PADE_ORDER - k + 1)) as f64;
        power = power.matmul(&x);
        let term = power.scaled(coef);
        numer = numer.add(&term);
        denom = if k % 2 == 0 { denom.add(&term) } else { denom.sub(&term) };
    }
    let mut result = solve(&denom, &numer)?;
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Evaluates the monic polynomial `z^p + c_1 z^{p-1} + ... + c_p` by Horner's rule.
pub fn eval_monic(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &c| acc * z + c)
}

const DK_MAX_ITER: usize = 500;
const DK_TOL: f64 = 1e-12;

/// Roots of `z^p + c_1 z^{p-1} + ... + c_p` by Durand-Kerner iteration.
///
/// Roots are returned with multiplicity. Each root `r` satisfies
/// `|a(r)| <= 1e-10 (1 + |r|)^p`; if the iteration cannot reach that the
/// call fails with [`CarmaError::NoConvergence`].
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let p = coeffs.len();
    if p == 0 {
        return Err(invalid("poly_roots: degree must be at least 1"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("poly_roots: non-finite coefficient"));
    }
    if p == 1 {
        return Ok(vec![Complex64::new(-coeffs[0], 0.0)]);
    }
    // Cauchy bound on root moduli sets the radius of the starting circle.
    let radius = 1.0 + coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    // Points on a circle, rotated off the real axis so conjugate pairs can separate.
    let mut roots: Vec<Complex64> = (0..p)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / p as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();

    for _ in 0..DK_MAX_ITER {
        let mut max_step = 0.0_f64;
        for i in 0..p {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates: nudge apart
                roots[i] += Complex64::new(1e-8, 1e-8) * (1.0 + zi.norm());
                max_step = f64::INFINITY;
                continue;
            }
            let step = eval_monic(coeffs, zi) / denom;
            roots[i] = zi - step;
            max_step = max_step.max(step.norm() / (1.0 + zi.norm()));
        }
        if max_step <= DK_TOL {
            break;
        }
    }

    let residual_ok = |r: &Complex64| {
        eval_monic(coeffs, *r).norm() <= 1e-10 * (1.0 + r.norm()).powi(p as i32)
    };
    if roots.iter().all(residual_ok) {
        Ok(roots)
    } else {
        Err(CarmaError::NoConvergence(format!(
            "Durand-Kerner did not converge after {DK_MAX_ITER} iterations"
        )))
    }
}

/// Margin below zero required of every root's real part.
pub const STABILITY_MARGIN: f64 = -1e-9;

/// True when every root of `a(z)` has real part below [`STABILITY_MARGIN`].
pub fn is_stable(a_coeffs: &[f64]) -> bool {
    match poly_roots(a_coeffs) {
        Ok(roots) => roots.iter().all(|r| r.re < STABILITY_MARGIN),
        Err(_) => false,
    }
}

/// `(i omega I - A)^{-1}`.
pub fn resolvent(a: &RealMatrix, omega: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(invalid("resolvent: matrix is not square"));
    }
    let n = a.rows;
    let shifted = ComplexMatrix::identity(n)
        .scaled(Complex64::new(0.0, omega))
        .sub(&a.to_complex());
    solve_complex(&shifted, &ComplexMatrix::identity(n))
}

/// Solves the Lyapunov equation `A P + P A^T + sigma2 e e^T = 0` with
/// `e = (0, ..., 0, 1)^T`.
///
/// Uses the Kronecker form `(I (x) A + A (x) I) vec(P) = -sigma2 vec(e e^T)`
/// with column-major `vec`, solved densely.
pub fn lyapunov_solve(a: &RealMatrix, sigma2: f64) -> Result<RealMatrix> {
    if !a.is_square() {
        return Err(invalid("lyapunov_solve: matrix is not square"));
    }
    let n = a.rows;
    let nn = n * n;
    let mut kron = RealMatrix::zeros(nn, nn);
    // vec index of P[i][j] is j*n + i
    for i in 0..n {
        for j in 0..n {
            let row = j * n + i;
            for k in 0..n {
                // (A P)[i][j] = sum_k A[i][k] P[k][j]
                kron[(row, j * n + k)] += a[(i, k)];
                // (P A^T)[i][j] = sum_k P[i][k] A[j][k]
                kron[(row, k * n + i)] += a[(j, k)];
            }
        }
    }
    let mut rhs = RealMatrix::zeros(nn, 1);
    rhs[((n - 1) * n + (n - 1), 0)] = -sigma2;
    let vec_p = solve(&kron, &rhs)
        .map_err(|e| CarmaError::Singular(format!("Lyapunov system: {e}")))?;
    let mut p = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = 0.5 * (vec_p[(j * n + i, 0)] + vec_p[(i * n + j, 0)]);
        }
    }
    Ok(p)
}
