//! Primal log-barrier Newton method for
//! `min τ Tr(R) + ½‖D − C R C^H‖_F²` over structured PSD `R`.

use lrthcr::{CMat, C64};
use nalgebra::{DMatrix, DVector};

use super::structure::{basis, inner};

pub struct Problem {
    basis: Vec<CMat>,
    compressed: Vec<CMat>,
    data: CMat,
    tau: f64,
}

impl Problem {
    /// `c` is the augmented compression matrix.
    pub fn new(m: usize, c: &CMat, data: CMat, tau: f64) -> Self {
        let basis = basis(m);
        let compressed = basis.iter().map(|a| c * a * c.adjoint()).collect();
        Self { basis, compressed, data, tau }
    }

    fn assemble(&self, x: &DVector<f64>) -> CMat {
        let d = self.basis[0].nrows();
        let mut r = CMat::zeros(d, d);
        for (xi, a) in x.iter().zip(&self.basis) {
            r += a * C64::new(*xi, 0.0);
        }
        r
    }

    /// Objective at an arbitrary matrix `r` with compression `c`.
    pub fn objective_at(&self, r: &CMat, c: &CMat) -> f64 {
        let resid = &self.data - c * r * c.adjoint();
        self.tau * r.trace().re + 0.5 * resid.norm_squared()
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        let mut resid = self.data.clone();
        for (xi, cm) in x.iter().zip(&self.compressed) {
            resid -= cm * C64::new(*xi, 0.0);
        }
        let tr: f64 = x.iter().zip(&self.basis).map(|(xi, a)| xi * a.trace().re).sum();
        self.tau * tr + 0.5 * resid.norm_squared()
    }

    /// Hermitian PD test through a real embedding Cholesky.
    fn log_det(&self, r: &CMat) -> Option<f64> {
        let d = r.nrows();
        let emb = DMatrix::from_fn(2 * d, 2 * d, |i, k| {
            let z = r[(i % d, k % d)];
            match (i < d, k < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let ch = emb.cholesky()?;
        Some(ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
    }

    /// Minimize by the barrier method from `R = I`; returns the optimal value.
    pub fn solve(&self) -> f64 {
        let n = self.basis.len();
        let d = self.basis[0].nrows() as f64;
        let mut x = DVector::zeros(n);
        x[0] = 1.0;
        let gram = DMatrix::from_fn(n, n, |i, k| inner(&self.compressed[i], &self.compressed[k]));
        let traces: Vec<f64> = self.basis.iter().map(|a| a.trace().re).collect();
        let mut t = 1.0;
        loop {
            for _ in 0..200 {
                let r = self.assemble(&x);
                let rinv = r.clone().try_inverse().expect("interior point");
                let mut resid = self.data.clone();
                for (xi, cm) in x.iter().zip(&self.compressed) {
                    resid -= cm * C64::new(*xi, 0.0);
                }
                let ra: Vec<CMat> = self.basis.iter().map(|a| &rinv * a).collect();
                let grad = DVector::from_fn(n, |i, _| {
                    t * (self.tau * traces[i] - inner(&self.compressed[i], &resid)) - ra[i].trace().re
                });
                let hess = DMatrix::from_fn(n, n, |i, k| t * gram[(i, k)] + (&ra[i] * &ra[k]).trace().re);
                let rhs = -&grad;
                let step = match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => hess.clone().lu().solve(&rhs).expect("barrier Hessian is nonsingular"),
                };
                let decrement = -grad.dot(&step);
                if decrement < 1e-20 {
                    break;
                }
                let phi = |x: &DVector<f64>| -> Option<f64> {
                    let ld = self.log_det(&self.assemble(x))?;
                    Some(t * self.objective(x) - ld)
                };
                let f0 = phi(&x).expect("interior point");
                let mut s = 1.0;
                loop {
                    let cand = &x + &step * s;
                    if let Some(f) = phi(&cand) {
                        if f <= f0 - 0.25 * s * decrement {
                            x = cand;
                            break;
                        }
                    }
                    s *= 0.5;
                    if s < 1e-12 {
                        break;
                    }
                }
                if s < 1e-12 {
                    break;
                }
            }
            let f = self.objective(&x);
            if d / t <= 1e-12 * f.abs().max(1e-3) {
                return f;
            }
            t *= 8.0;
        }
    }
}
