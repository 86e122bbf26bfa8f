//! Small dense complex matrices.

use num_complex::Complex64;

/// Row-major square or rectangular complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
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

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let cols = self.cols;
        &mut self.data[i * cols..(i + 1) * cols]
    }

    /// Top-left `size × size` block.
    pub fn top_left(&self, size: usize) -> CMatrix {
        assert!(size <= self.rows && size <= self.cols);
        let mut out = CMatrix::zeros(size, size);
        for i in 0..size {
            out.row_mut(i).copy_from_slice(&self.row(i)[..size]);
        }
        out
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Determinant by LU factorization with partial pivoting.
///
/// Panics if `m` is not square. An empty matrix has determinant 1.
pub fn det(m: &CMatrix) -> Complex64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| a[(x, k)].norm().total_cmp(&a[(y, k)].norm()))
            .unwrap_or(k);
        if a[(pivot, k)] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != k {
            for c in 0..n {
                let tmp = a[(k, c)];
                a[(k, c)] = a[(pivot, c)];
                a[(pivot, c)] = tmp;
            }
            det = -det;
        }
        let p = a[(k, k)];
        det *= p;
        for r in k + 1..n {
            let factor = a[(r, k)] / p;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in k + 1..n {
                let v = a[(k, c)];
                a[(r, c)] -= factor * v;
            }
        }
    }
    det
}

/// Scale against which `|det|` is compared to decide nondegeneracy:
/// `1e-10 · Π_rows max(1, ‖row‖₂)`.
pub fn hadamard_threshold(m: &CMatrix) -> f64 {
    1e-10
        * (0..m.rows())
            .map(|i| {
                let norm = m.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                norm.max(1.0)
            })
            .product::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Laplace expansion along the first row; independent of the LU path.
    fn cofactor_det(m: &CMatrix) -> Complex64 {
        let n = m.rows();
        if n == 0 {
            return c(1.0, 0.0);
        }
        if n == 1 {
            return m[(0, 0)];
        }
        let mut total = c(0.0, 0.0);
        for col in 0..n {
            let minor = CMatrix::from_rows(
                (1..n)
                    .map(|r| (0..n).filter(|&k| k != col).map(|k| m[(r, k)]).collect())
                    .collect(),
            );
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            total += m[(0, col)] * sign * cofactor_det(&minor);
        }
        total
    }

    #[test]
    fn one_by_one_and_identity() {
        let a = c(2.5, -1.0);
        assert_eq!(det(&CMatrix::from_rows(vec![vec![a]])), a);
        for k in 1..7 {
            assert_eq!(det(&CMatrix::identity(k)), c(1.0, 0.0));
        }
    }

    #[test]
    fn singular_matrix_has_zero_det() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        assert!(det(&m).norm() < 1e-15);
    }

    #[test]
    fn fixed_4x4_matches_cofactor() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(3.0, 0.0)],
            vec![c(0.0, -1.0), c(2.0, 2.0), c(1.0, 0.0), c(0.0, 0.5)],
            vec![c(4.0, 0.0), c(-2.0, 1.0), c(0.0, 3.0), c(1.0, 1.0)],
            vec![c(0.3, 0.3), c(1.0, -1.0), c(2.0, 0.0), c(-1.0, 0.0)],
        ]);
        let lu = det(&m);
        let cf = cofactor_det(&m);
        assert!((lu - cf).norm() <= 1e-12 * cf.norm());
    }

    #[test]
    fn thresholds() {
        assert_eq!(hadamard_threshold(&CMatrix::identity(3)), 1e-10);
        let five = CMatrix::from_rows(vec![vec![c(5.0, 0.0)]]);
        assert!((hadamard_threshold(&five) - 5e-10).abs() < 1e-24);
    }

    #[test]
    fn top_left_block() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ]);
        assert_eq!(m.top_left(1), CMatrix::from_rows(vec![vec![c(1.0, 0.0)]]));
    }

    proptest! {
        #[test]
        fn lu_matches_cofactor(size in 1usize..=6, seed in proptest::collection::vec(-3.0f64..3.0, 72)) {
            let rows = (0..size)
                .map(|r| (0..size).map(|k| c(seed[2 * (r * 6 + k)], seed[2 * (r * 6 + k) + 1])).collect())
                .collect();
            let m = CMatrix::from_rows(rows);
            let lu = det(&m);
            let cf = cofactor_det(&m);
            let scale = hadamard_threshold(&m) * 1e10;
            prop_assert!((lu - cf).norm() <= 1e-12 * scale.max(cf.norm()));
            prop_assert!(hadamard_threshold(&m) > 0.0);
        }
    }
}
