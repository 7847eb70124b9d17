//! ADMM for structured PSD least squares.
//!
//! Solves, over a real parameter vector `x = (x_s, x_n)`,
//!
//! ```text
//! minimize   τ c·x_s + ½‖d − F x‖²
//! subject to S(x_s) ⪰ 0,  x_n ≥ 0
//! ```
//!
//! where `S` maps structure parameters to a Hermitian matrix through a
//! [`StructureBasis`], `F` is a dense complex fit operator and `x_n` are
//! optional nonnegative nuisance variables. The splitting is `S(x_s) = Z`,
//! `x_n = w`; the `x`-update is a linear solve with a matrix that does not
//! depend on `τ` or the data. The penalty `ρ` is adapted by residual
//! balancing during the early iterations and the system is refactored
//! whenever it changes.

use nalgebra::{Cholesky, DVector, Dyn};

use crate::linalg::{CMat, CVec, HermitianEigen};
use crate::structure::StructureBasis;

#[derive(Debug, Clone)]
pub(crate) struct AdmmSettings {
    pub max_iter: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

/// Iterates in scaled dual form, with the current penalty and its factorization.
#[derive(Debug, Clone)]
pub(crate) struct AdmmState {
    pub x: DVector<f64>,
    z: CMat,
    w: DVector<f64>,
    u_mat: CMat,
    u_vec: DVector<f64>,
    rho: f64,
    chol: Option<Cholesky<f64, Dyn>>,
}

/// Residual ratio outside `[1/BALANCE, BALANCE]` triggers a penalty update.
const BALANCE: f64 = 5.0;
const ADAPT_EVERY: usize = 10;
const RHO_STEP_MAX: f64 = 10.0;
const RHO_RANGE: f64 = 1e6;

#[derive(Debug, Clone, Copy)]
pub(crate) struct AdmmStats {
    pub iterations: usize,
    pub primal: f64,
    pub dual: f64,
    pub converged: bool,
}

/// Data-dependent part of the quadratic: `Re(F^H d)` and `d`.
#[derive(Debug, Clone)]
pub(crate) struct FitData {
    b: DVector<f64>,
    d: CVec,
}

#[derive(Debug)]
pub(crate) struct Kernel {
    basis: StructureBasis,
    n_nonneg: usize,
    fit: CMat,
    gram: nalgebra::DMatrix<f64>,
    traces: DVector<f64>,
    rho: f64,
}

impl Kernel {
    /// `fit` has one column per parameter: the structure parameters first,
    /// then the `n_nonneg` nuisance parameters.
    pub fn new(basis: StructureBasis, n_nonneg: usize, fit: CMat, rho: f64) -> Self {
        let ns = basis.len();
        let n = ns + n_nonneg;
        assert_eq!(fit.ncols(), n, "fit operator has the wrong number of columns");
        let q = (fit.adjoint() * &fit).map(|z| z.re);
        // Exact symmetry for the factorization.
        let gram = (&q + q.transpose()) * 0.5;
        let mut traces = DVector::zeros(n);
        for (i, t) in basis.traces().into_iter().enumerate() {
            traces[i] = t;
        }
        Self { basis, n_nonneg, fit, gram, traces, rho }
    }

    fn factor(&self, rho: f64) -> Cholesky<f64, Dyn> {
        let ns = self.basis.len();
        let norms = self.basis.norms_sq();
        let mut q = self.gram.clone();
        for i in 0..q.nrows() {
            q[(i, i)] += rho * if i < ns { norms[i] } else { 1.0 };
        }
        Cholesky::new(q).expect("ADMM system matrix is positive definite")
    }

    pub fn basis(&self) -> &StructureBasis {
        &self.basis
    }

    pub fn num_params(&self) -> usize {
        self.basis.len() + self.n_nonneg
    }

    pub fn prepare(&self, d: CVec) -> FitData {
        let b = (self.fit.adjoint() * &d).map(|z| z.re);
        FitData { b, d }
    }

    pub fn cold_state(&self) -> AdmmState {
        let dim = self.basis.dim();
        AdmmState {
            x: DVector::zeros(self.num_params()),
            z: CMat::zeros(dim, dim),
            w: DVector::zeros(self.n_nonneg),
            u_mat: CMat::zeros(dim, dim),
            u_vec: DVector::zeros(self.n_nonneg),
            rho: self.rho,
            chol: None,
        }
    }

    /// `‖d − F x‖²`.
    pub fn fit_residual(&self, data: &FitData, x: &DVector<f64>) -> f64 {
        let xc = x.map(|v| crate::C64::new(v, 0.0));
        (&data.d - &self.fit * xc).norm_squared()
    }

    /// `τ c·x_s + ½‖d − F x‖²`.
    pub fn objective(&self, data: &FitData, x: &DVector<f64>, tau: f64) -> f64 {
        tau * self.traces.dot(x) + 0.5 * self.fit_residual(data, x)
    }

    /// `c·x_s`, the trace of `S(x_s)`.
    pub fn traces_dot(&self, x: &DVector<f64>) -> f64 {
        self.traces.dot(x)
    }

    pub fn structure_params<'a>(&self, x: &'a DVector<f64>) -> &'a [f64] {
        &x.as_slice()[..self.basis.len()]
    }

    pub fn nuisance_params<'a>(&self, x: &'a DVector<f64>) -> &'a [f64] {
        &x.as_slice()[self.basis.len()..]
    }

    /// The structured iterate `S(x_s)`, shifted by `|λ_min| I` when it is
    /// slightly indefinite so the result is exactly structured and PSD.
    pub fn estimate(&self, state: &AdmmState) -> CMat {
        let mut s = self.basis.assemble(self.structure_params(&state.x));
        if s.nrows() == 0 {
            return s;
        }
        let lmin = HermitianEigen::new(&s).min();
        if lmin < 0.0 {
            for i in 0..s.nrows() {
                s[(i, i)].re -= lmin;
            }
        }
        s
    }

    pub fn run(&self, data: &FitData, tau: f64, settings: &AdmmSettings, state: &mut AdmmState) -> AdmmStats {
        let ns = self.basis.len();
        if state.chol.is_none() {
            state.chol = Some(self.factor(state.rho));
        }
        let adapt_until = settings.max_iter / 2;
        let mut stats = AdmmStats { iterations: 0, primal: f64::INFINITY, dual: f64::INFINITY, converged: false };
        for it in 1..=settings.max_iter {
            let rho = state.rho;
            // x-update.
            let target = &state.z - &state.u_mat;
            let adj = self.basis.adjoint(&target);
            let mut rhs = data.b.clone();
            for i in 0..ns {
                rhs[i] += rho * adj[i] - tau * self.traces[i];
            }
            for k in 0..self.n_nonneg {
                rhs[ns + k] += rho * (state.w[k] - state.u_vec[k]);
            }
            state.x = state.chol.as_ref().expect("factored above").solve(&rhs);

            // Z-update: PSD cone and nonnegative orthant.
            let s = self.basis.assemble(&state.x.as_slice()[..ns]);
            let v = &s + &state.u_mat;
            let z_new = HermitianEigen::new(&v).reconstruct_with(|l| l.max(0.0));
            let xn = state.x.rows(ns, self.n_nonneg).into_owned();
            let w_new = (&xn + &state.u_vec).map(|t| t.max(0.0));

            // Dual update and residuals.
            let r_mat = &s - &z_new;
            let r_vec = &xn - &w_new;
            state.u_mat += &r_mat;
            state.u_vec += &r_vec;
            let primal = (r_mat.norm_squared() + r_vec.norm_squared()).sqrt();
            let dual = rho * ((&z_new - &state.z).norm_squared() + (&w_new - &state.w).norm_squared()).sqrt();
            state.z = z_new;
            state.w = w_new;

            let scale_p = (s.norm_squared() + xn.norm_squared())
                .sqrt()
                .max((state.z.norm_squared() + state.w.norm_squared()).sqrt())
                .max(1.0);
            let scale_d = (rho * (state.u_mat.norm_squared() + state.u_vec.norm_squared()).sqrt()).max(1.0);
            stats = AdmmStats { iterations: it, primal, dual, converged: false };
            let rel_p = primal / (settings.tol_primal * scale_p);
            let rel_d = dual / (settings.tol_dual * scale_d);
            if rel_p <= 1.0 && rel_d <= 1.0 {
                stats.converged = true;
                break;
            }
            if it % ADAPT_EVERY == 0 && it <= adapt_until {
                let ratio = rel_p / rel_d.max(f64::MIN_POSITIVE);
                if !(1.0 / BALANCE..=BALANCE).contains(&ratio) {
                    let step = ratio.sqrt().clamp(1.0 / RHO_STEP_MAX, RHO_STEP_MAX);
                    let new_rho = (rho * step).clamp(self.rho / RHO_RANGE, self.rho * RHO_RANGE);
                    if new_rho != rho {
                        let k = rho / new_rho;
                        state.u_mat *= crate::C64::new(k, 0.0);
                        state.u_vec *= k;
                        state.rho = new_rho;
                        state.chol = Some(self.factor(new_rho));
                    }
                }
            }
        }
        stats
    }
}
