//! Dense linear algebra, activations and a central-difference gradient oracle.
//!
//! Vectors are plain `[f64]` slices; [`Matrix`] is a row-major dense matrix.
//! Everything here is pure and re-entrant.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Default perturbation for [`finite_diff_gradient`].
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Floor for the relative-error denominator in gradient checks.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-8;

/// Largest relative error a gradient check may report and still pass.
pub const GRADCHECK_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("shape mismatch in {op}: left is {left:?}, right is {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{0}: empty input")]
    Empty(&'static str),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("non-finite loss at perturbed parameters {indices:?}")]
    NonFiniteLoss { indices: Vec<usize> },
}

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{})", self.rows, self.cols)?;
        if self.data.len() <= 16 {
            write!(f, " {:?}", self.data)?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericError> {
        if data.len() != rows * cols {
            return Err(NumericError::Shape {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; meant for tests and literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Matrix) -> Result<(), NumericError> {
        if self.shape() != other.shape() {
            return Err(NumericError::Shape {
                op: "axpy",
                left: self.shape(),
                right: other.shape(),
            });
        }
        axpy(alpha, &other.data, &mut self.data);
        Ok(())
    }

    /// `self += alpha * u vᵀ` where `u` has `rows` entries and `v` has `cols`.
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) -> Result<(), NumericError> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(NumericError::Shape {
                op: "add_outer",
                left: self.shape(),
                right: (u.len(), v.len()),
            });
        }
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            axpy(alpha * ui, v, self.row_mut(i));
        }
        Ok(())
    }

    /// `out += Aᵀ y`, the transpose product used when propagating gradients.
    pub fn matvec_transpose_acc(&self, y: &[f64], out: &mut [f64]) -> Result<(), NumericError> {
        if y.len() != self.rows || out.len() != self.cols {
            return Err(NumericError::Shape {
                op: "matvec_transpose",
                left: self.shape(),
                right: (y.len(), out.len()),
            });
        }
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            axpy(yi, self.row(i), out);
        }
        Ok(())
    }

    /// `out += A x` without allocating.
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) -> Result<(), NumericError> {
        if x.len() != self.cols || out.len() != self.rows {
            return Err(NumericError::Shape {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o += dot(row, x);
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Matrix-vector product `A x`.
pub fn matvec(a: &Matrix, x: &[f64]) -> Result<Vec<f64>, NumericError> {
    let mut out = vec![0.0; a.rows];
    if a.cols != x.len() {
        return Err(NumericError::Shape {
            op: "matvec",
            left: a.shape(),
            right: (x.len(), 1),
        });
    }
    a.matvec_acc(x, &mut out)?;
    Ok(out)
}

pub fn tanh_map(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(z: &[f64]) -> Result<Vec<f64>, NumericError> {
    if z.is_empty() {
        return Err(NumericError::Empty("softmax"));
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Central-difference gradient of `loss` at `params`.
///
/// Every coordinate is perturbed by `±epsilon` in turn; coordinates whose
/// perturbed loss is not finite are collected into a single error.
pub fn finite_diff_gradient<F>(mut loss: F, params: &[f64], epsilon: f64) -> Result<Vec<f64>, NumericError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(NumericError::BadEpsilon(epsilon));
    }
    let mut theta = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    let mut bad = Vec::new();
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + epsilon;
        let plus = loss(&theta);
        theta[i] = orig - epsilon;
        let minus = loss(&theta);
        theta[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            bad.push(i);
            grad.push(f64::NAN);
        } else {
            grad.push((plus - minus) / (2.0 * epsilon));
        }
    }
    if bad.is_empty() {
        Ok(grad)
    } else {
        Err(NumericError::NonFiniteLoss { indices: bad })
    }
}

/// `|a - n| / max(|a| + |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Outcome of comparing analytic gradients against finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `block[index]` of the worst coordinate.
    pub worst_parameter: String,
    /// Worst relative error per named parameter block.
    pub per_parameter_errors: BTreeMap<String, f64>,
}

impl GradCheckReport {
    /// Compares named blocks of analytic and numeric gradients.
    ///
    /// Each item is `(name, analytic, numeric)` with equal-length slices.
    pub fn compare<'a, I>(blocks: I) -> Result<Self, NumericError>
    where
        I: IntoIterator<Item = (&'a str, &'a [f64], &'a [f64])>,
    {
        let mut per = BTreeMap::new();
        let mut worst = (0.0_f64, String::new());
        for (name, analytic, numeric) in blocks {
            if analytic.len() != numeric.len() {
                return Err(NumericError::Shape {
                    op: "grad_check",
                    left: (analytic.len(), 1),
                    right: (numeric.len(), 1),
                });
            }
            let mut block_max = 0.0_f64;
            for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
                let e = relative_error(a, n);
                if e > block_max {
                    block_max = e;
                }
                if e > worst.0 || worst.1.is_empty() {
                    worst = (e.max(worst.0), format!("{name}[{i}]"));
                }
            }
            let entry = per.entry(name.to_string()).or_insert(0.0_f64);
            *entry = entry.max(block_max);
        }
        Ok(GradCheckReport {
            max_relative_error: worst.0,
            worst_parameter: worst.1,
            per_parameter_errors: per,
        })
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "max relative error: {:.3e} at {}",
            self.max_relative_error, self.worst_parameter
        )?;
        for (name, err) in &self.per_parameter_errors {
            writeln!(f, "  {name}: {err:.3e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matvec_examples() {
        assert_eq!(
            matvec(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(matvec(&Matrix::zeros(2, 3), &[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(matvec(&a, &[1.0, -1.0]).unwrap(), vec![-1.0, -1.0]);
    }

    #[test]
    fn matvec_shape_error_names_both_shapes() {
        let err = matvec(&Matrix::zeros(2, 3), &[1.0, 2.0]).unwrap_err();
        assert_eq!(
            err,
            NumericError::Shape {
                op: "matvec",
                left: (2, 3),
                right: (2, 1)
            }
        );
        let msg = err.to_string();
        assert!(msg.contains("(2, 3)") && msg.contains("(2, 1)"), "{msg}");
    }

    #[test]
    fn tanh_examples() {
        assert_eq!(tanh_map(&[0.0, 0.0]), vec![0.0, 0.0]);
        let p = tanh_map(&[0.37, 1.0]);
        let n = tanh_map(&[-0.37, -1.0]);
        assert_eq!(p[0], -n[0]);
        assert!((p[1] - 0.761_594_155_955_764_9).abs() < 1e-15);
    }

    #[test]
    fn softmax_examples() {
        let u = softmax(&[0.0, 0.0, 0.0]).unwrap();
        for v in &u {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let s = softmax(&[1.0, 2.0, 3.0]).unwrap();
        let oracle = [
            0.090_030_573_170_380_46,
            0.244_728_471_054_797_65,
            0.665_240_955_774_821_9,
        ];
        for (a, b) in s.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(softmax(&[]), Err(NumericError::Empty("softmax")));
    }

    #[test]
    fn softmax_large_magnitudes_stay_on_simplex() {
        let s = softmax(&[1000.0, -1000.0, 999.0]).unwrap();
        assert!(s.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_diff_examples() {
        let g = finite_diff_gradient(|t| t[0] * t[0], &[3.0], DEFAULT_EPSILON).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-8);
        let g = finite_diff_gradient(|_| 4.2, &[1.0, -2.0, 0.5], DEFAULT_EPSILON).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn finite_diff_reports_non_finite_points() {
        let err = finite_diff_gradient(
            |t| if t[1] > 1.0 { f64::INFINITY } else { t[0] },
            &[0.0, 1.0, 0.0],
            DEFAULT_EPSILON,
        )
        .unwrap_err();
        assert_eq!(err, NumericError::NonFiniteLoss { indices: vec![1] });
        assert!(matches!(
            finite_diff_gradient(|t| t[0], &[0.0], 0.0),
            Err(NumericError::BadEpsilon(_))
        ));
    }

    #[test]
    fn report_max_is_max_of_blocks() {
        let a = [1.0, 2.0];
        let n = [1.0, 2.2];
        let z = [0.0];
        let r = GradCheckReport::compare([("w", &a[..], &n[..]), ("b", &z[..], &z[..])]).unwrap();
        let max = r.per_parameter_errors.values().copied().fold(0.0, f64::max);
        assert_eq!(r.max_relative_error, max);
        assert_eq!(r.worst_parameter, "w[1]");
        assert_eq!(r.per_parameter_errors["b"], 0.0);
    }

    proptest! {
        #[test]
        fn matvec_distributes(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec(-3.0f64..3.0, 40),
        ) {
            let a = Matrix::from_fn(rows, cols, |i, j| seed[(i * 5 + j) % 40]);
            let x: Vec<f64> = (0..cols).map(|j| seed[(j + 25) % 40]).collect();
            let y: Vec<f64> = (0..cols).map(|j| seed[(j * 3 + 7) % 40]).collect();
            let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
            let lhs = matvec(&a, &xy).unwrap();
            let ax = matvec(&a, &x).unwrap();
            let ay = matvec(&a, &y).unwrap();
            for i in 0..rows {
                prop_assert!((lhs[i] - ax[i] - ay[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn softmax_is_simplex_point(z in proptest::collection::vec(-1e3f64..1e3, 1..12), c in -50.0f64..50.0) {
            let s = softmax(&z).unwrap();
            prop_assert!(s.iter().all(|v| *v >= 0.0 && v.is_finite()));
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let t = softmax(&shifted).unwrap();
            for (a, b) in s.iter().zip(&t) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn finite_diff_matches_polynomials(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0) {
            // f(x) = a x^3 + b x^2, f'(x) = 3a x^2 + 2b x; central difference error is a·ε².
            let f = |t: &[f64]| a * t[0].powi(3) + b * t[0].powi(2);
            let g = finite_diff_gradient(f, &[x], 1e-4).unwrap();
            let exact = 3.0 * a * x * x + 2.0 * b * x;
            prop_assert!((g[0] - exact).abs() < 1e-6);
        }
    }
}
