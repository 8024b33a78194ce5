use nalgebra::DMatrix;

/// Dense real symmetric matrix.
///
/// Symmetry is exact: every constructor either evaluates the upper triangle
/// only and mirrors it, or checks the input and then mirrors its upper
/// triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymMatrix(DMatrix<f64>);

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("matrix is not symmetric: |m[{row}][{col}] - m[{col}][{row}]| = {gap:e}")]
pub struct NotSymmetric {
    pub row: usize,
    pub col: usize,
    pub gap: f64,
}

impl DenseSymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    /// Accepts `m` if it is square and symmetric to within `tol` (absolute),
    /// then mirrors the upper triangle so the result is exactly symmetric.
    pub fn from_matrix(m: DMatrix<f64>, tol: f64) -> Result<Self, NotSymmetric> {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        let mut m = m;
        for j in 0..n {
            for i in 0..j {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > tol || gap.is_nan() {
                    return Err(NotSymmetric { row: i, col: j, gap });
                }
                m[(j, i)] = m[(i, j)];
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn max_abs_diff(&self, other: &DenseSymMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `P X Pᵀ` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(perm[i], perm[j])] = self.0[(i, j)];
            }
        }
        Self(m)
    }
}

impl AsRef<DMatrix<f64>> for DenseSymMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}
