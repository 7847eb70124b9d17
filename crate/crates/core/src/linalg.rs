//! Dense complex matrix helpers on top of `nalgebra`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(h: &CMat) -> Self {
        assert!(h.is_square(), "eigendecomposition needs a square matrix");
        let n = h.nrows();
        if n == 0 {
            return Self { values: DVector::zeros(0), vectors: CMat::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(hermitian_part(h));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V diag(g(λ)) V^H`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = g(self.values[j]);
            scaled.column_mut(j).scale_mut(w);
        }
        let mut out = &scaled * self.vectors.adjoint();
        symmetrize_hermitian(&mut out);
        out
    }
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    let mut out = a.clone();
    symmetrize_hermitian(&mut out);
    out
}

pub fn symmetrize_hermitian(a: &mut CMat) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in 0..i {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

pub fn symmetrize(a: &mut CMat) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = (a[(i, j)] + a[(j, i)]) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
}

/// `‖A − A^H‖_F`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to zero.
pub fn project_psd(a: &CMat) -> CMat {
    HermitianEigen::new(a).reconstruct_with(|l| l.max(0.0))
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// Real Frobenius inner product `Re tr(A^H B)`.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Column-major vectorization.
pub fn vec_col_major(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

/// Block diagonal `[a 0; 0 b]`.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Numerical rank: eigenvalues above `rel_threshold · λ_max`.
pub fn numerical_rank(h: &CMat, rel_threshold: f64) -> usize {
    let eig = HermitianEigen::new(h);
    let top = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return 0;
    }
    eig.values.iter().filter(|&&v| v > rel_threshold * top).count()
}

/// Render a complex matrix as row-major CSV with `re+imj` cells.
pub fn to_csv(a: &CMat) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if j > 0 {
                out.push(',');
            }
            let z = a[(i, j)];
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            let _ = write!(out, "{:e}{}{:e}j", z.re, sign, z.im.abs());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.5, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.3, 0.2),
                C64::new(0.0, 0.0),
                C64::new(0.3, -0.2),
                C64::new(4.0, 0.0),
            ],
        );
        let eig = HermitianEigen::new(&a);
        assert!(eig.values[0] <= eig.values[1] && eig.values[1] <= eig.values[2]);
        let back = eig.reconstruct_with(|l| l);
        assert!((back - &a).norm() < 1e-12);
    }

    #[test]
    fn psd_projection_clips() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(-2.0, 0.0), C64::new(5.0, 0.0)]));
        let p = project_psd(&d);
        assert!((p[(1, 1)].re).abs() < 1e-14);
        assert!((p[(2, 2)].re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn csv_cells() {
        let a = CMat::from_row_slice(1, 2, &[C64::new(1.0, -2.0), C64::new(0.5, 0.0)]);
        assert_eq!(to_csv(&a), "1e0-2e0j,5e-1+0e0j\n");
    }
}
