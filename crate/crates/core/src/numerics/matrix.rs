//! Dense row-major f64 matrices with a parallel GEMM backend.
//!
//! Products are computed by `matrixmultiply::dgemm` over fixed-size row or
//! column bands. The band size is a constant, so results are bit-identical
//! for any number of worker threads: each band is an independent dgemm call
//! writing a disjoint slice of the output.

use crate::error::{CoreError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Output rows (or columns) handled per parallel task. Fixed so that the
/// split, and therefore every floating-point result, does not depend on
/// the worker count.
const GEMM_BAND: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
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

    /// Builds a matrix from row-major data, validating length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CoreError::shape(format!(
                "matrix data length {} != {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(CoreError::invalid("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the given rows (in order) into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// `self += c * other`, entrywise.
    pub fn axpy(&mut self, c: f64, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CoreError::shape(format!(
                "axpy {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// Matrix-vector product `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(CoreError::shape(format!(
                "matvec: {}x{} with vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Wrapper so raw output pointers can cross rayon task boundaries. Each
/// task writes only its own disjoint band.
#[derive(Clone, Copy)]
struct SendPtr(*mut f64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// Stride description of an operand: (pointer, row stride, col stride).
#[derive(Clone, Copy)]
struct Operand {
    ptr: *const f64,
    rs: isize,
    cs: isize,
}
unsafe impl Send for Operand {}
unsafe impl Sync for Operand {}

/// `c = a * b` where the operands are stride views; parallel over fixed
/// bands of the larger output dimension.
fn gemm_into(m: usize, k: usize, n: usize, a: Operand, b: Operand, c: &mut [f64]) {
    debug_assert_eq!(c.len(), m * n);
    let cp = SendPtr(c.as_mut_ptr());
    // c is dense row-major.
    let (rsc, csc) = (n as isize, 1isize);
    if m >= n {
        let bands: Vec<usize> = (0..m).step_by(GEMM_BAND).collect();
        bands.par_iter().for_each(|&r0| {
            // Rebind whole structs so closure capture uses the Send/Sync
            // wrappers rather than the raw-pointer fields.
            let (a, b, cp) = (a, b, cp);
            let rows = GEMM_BAND.min(m - r0);
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    k,
                    n,
                    1.0,
                    a.ptr.offset(r0 as isize * a.rs),
                    a.rs,
                    a.cs,
                    b.ptr,
                    b.rs,
                    b.cs,
                    0.0,
                    cp.0.offset(r0 as isize * rsc),
                    rsc,
                    csc,
                );
            }
        });
    } else {
        let bands: Vec<usize> = (0..n).step_by(GEMM_BAND).collect();
        bands.par_iter().for_each(|&c0| {
            let (a, b, cp) = (a, b, cp);
            let cols = GEMM_BAND.min(n - c0);
            unsafe {
                matrixmultiply::dgemm(
                    m,
                    k,
                    cols,
                    1.0,
                    a.ptr,
                    a.rs,
                    a.cs,
                    b.ptr.offset(c0 as isize * b.cs),
                    b.rs,
                    b.cs,
                    0.0,
                    cp.0.offset(c0 as isize * csc),
                    rsc,
                    csc,
                );
            }
        });
    }
}

fn view(m: &Matrix) -> Operand {
    Operand {
        ptr: m.as_slice().as_ptr(),
        rs: m.cols() as isize,
        cs: 1,
    }
}

fn view_t(m: &Matrix) -> Operand {
    Operand {
        ptr: m.as_slice().as_ptr(),
        rs: 1,
        cs: m.cols() as isize,
    }
}

/// Matrix of i.i.d. Gaussian entries, reproducible per the stream contract.
pub fn gaussian_matrix(
    rows: usize,
    cols: usize,
    mean: f64,
    std: f64,
    rng: &mut crate::numerics::rng::RngStream,
) -> Result<Matrix> {
    if std < 0.0 {
        return Err(CoreError::invalid(format!("negative std {std}")));
    }
    let mut data = vec![0.0; rows * cols];
    rng.fill_normal(&mut data, mean, std);
    Ok(Matrix { rows, cols, data })
}

/// Standard product `a * b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(CoreError::shape(format!(
            "matmul: {}x{} * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = Matrix::zeros(a.rows(), b.cols());
    gemm_into(
        a.rows(),
        a.cols(),
        b.cols(),
        view(a),
        view(b),
        out.as_mut_slice(),
    );
    Ok(out)
}

/// `a * b^T` without materializing the transpose.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(CoreError::shape(format!(
            "matmul_nt: {}x{} * ({}x{})^T",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = Matrix::zeros(a.rows(), b.rows());
    gemm_into(
        a.rows(),
        a.cols(),
        b.rows(),
        view(a),
        view_t(b),
        out.as_mut_slice(),
    );
    Ok(out)
}

/// `a^T * b` without materializing the transpose.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(CoreError::shape(format!(
            "matmul_tn: ({}x{})^T * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = Matrix::zeros(a.cols(), b.cols());
    gemm_into(
        a.cols(),
        a.rows(),
        b.cols(),
        view_t(a),
        view(b),
        out.as_mut_slice(),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::RngStream;
    use proptest::prelude::*;

    /// Independent oracle: naive triple loop.
    fn matmul_naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.normal())
    }

    fn max_rel_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).abs() / (1.0 + x.abs().max(y.abs())))
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = RngStream::new(7, 0);
        let m = random_matrix(3, 3, &mut rng);
        let id = Matrix::identity(3);
        let prod = matmul(&id, &m).unwrap();
        assert_eq!(prod, m);
    }

    #[test]
    fn zeros_annihilate() {
        let mut rng = RngStream::new(8, 0);
        let m = random_matrix(3, 4, &mut rng);
        let z = Matrix::zeros(2, 3);
        let prod = matmul(&z, &m).unwrap();
        assert!(prod.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!((prod.rows(), prod.cols()), (2, 4));
    }

    #[test]
    fn matches_naive_oracle() {
        let mut rng = RngStream::new(9, 0);
        let a = random_matrix(5, 5, &mut rng);
        let b = random_matrix(5, 5, &mut rng);
        let fast = matmul(&a, &b).unwrap();
        let slow = matmul_naive(&a, &b);
        assert!(max_rel_diff(&fast, &slow) < 1e-12);
    }

    #[test]
    fn transposed_variants_match_naive() {
        let mut rng = RngStream::new(10, 0);
        let a = random_matrix(4, 6, &mut rng);
        let b = random_matrix(3, 6, &mut rng);
        let nt = matmul_nt(&a, &b).unwrap(); // 4x6 * 6x3
        let bt = Matrix::from_fn(6, 3, |i, j| b.get(j, i));
        assert!(max_rel_diff(&nt, &matmul_naive(&a, &bt)) < 1e-12);

        let c = random_matrix(6, 4, &mut rng);
        let d = random_matrix(6, 5, &mut rng);
        let tn = matmul_tn(&c, &d).unwrap(); // 4x6 * 6x5
        let ct = Matrix::from_fn(4, 6, |i, j| c.get(j, i));
        assert!(max_rel_diff(&tn, &matmul_naive(&ct, &d)) < 1e-12);
    }

    #[test]
    fn banding_matches_single_call_shapes() {
        // Output large enough to span several bands in both regimes.
        let mut rng = RngStream::new(11, 0);
        let a = random_matrix(150, 40, &mut rng);
        let b = random_matrix(40, 150, &mut rng);
        let fast = matmul(&a, &b).unwrap();
        let slow = matmul_naive(&a, &b);
        assert!(max_rel_diff(&fast, &slow) < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(4, 2);
        assert!(matches!(
            matmul(&a, &b),
            Err(CoreError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn matvec_matches_matmul() {
        let mut rng = RngStream::new(12, 0);
        let a = random_matrix(7, 5, &mut rng);
        let x: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let xm = Matrix::from_vec(5, 1, x.clone()).unwrap();
        let y = a.matvec(&x).unwrap();
        let ym = matmul_naive(&a, &xm);
        for i in 0..7 {
            assert!((y[i] - ym.get(i, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_matrix_zero_std_is_constant() {
        let mut rng = RngStream::new(1, 0);
        let m = gaussian_matrix(4, 5, 0.25, 0.0, &mut rng).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn gaussian_matrix_rejects_negative_std() {
        let mut rng = RngStream::new(1, 0);
        assert!(gaussian_matrix(2, 2, 0.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_matrix_same_seed_bit_identical() {
        let mut a = RngStream::new(99, 7);
        let mut b = RngStream::new(99, 7);
        let ma = gaussian_matrix(10, 10, 0.0, 1.0, &mut a).unwrap();
        let mb = gaussian_matrix(10, 10, 0.0, 1.0, &mut b).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn gaussian_matrix_recovers_weight_stats() {
        use crate::numerics::stats::weight_stats;
        let n = 784;
        let mut rng = RngStream::new(5, 0);
        let m = gaussian_matrix(n, n, 0.0, 0.5 / (n as f64).sqrt(), &mut rng).unwrap();
        let s = weight_stats(&m, n).unwrap();
        assert!(s.j0.abs() < 0.06);
        assert!(s.j > 0.48 && s.j < 0.52);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn associativity(seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 1);
            let a = random_matrix(4, 3, &mut rng);
            let b = random_matrix(3, 5, &mut rng);
            let c = random_matrix(5, 2, &mut rng);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            prop_assert!(max_rel_diff(&left, &right) < 1e-9);
        }

        #[test]
        fn distributivity(seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 2);
            let a = random_matrix(4, 3, &mut rng);
            let b = random_matrix(3, 4, &mut rng);
            let c = random_matrix(3, 4, &mut rng);
            let mut bc = b.clone();
            bc.axpy(1.0, &c).unwrap();
            let left = matmul(&a, &bc).unwrap();
            let mut right = matmul(&a, &b).unwrap();
            right.axpy(1.0, &matmul(&a, &c).unwrap()).unwrap();
            prop_assert!(max_rel_diff(&left, &right) < 1e-9);
        }
    }
}
