//! Toeplitz/Hankel parameterization of the augmented covariance
//! `R_a = [T, H; conj(H), conj(T)]` and the vectorization maps used to fit it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, symmetrize_hermitian, trace_re, CMat, CVec, C64};
use crate::signal::{Compression, HarmonicScene, MeasurementDesign, SampleMoments};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Generators of the Toeplitz and Hankel blocks.
///
/// `T(i, j) = u[i - j]` with `u[-m] = conj(u[m])`, and `H(i, j) = v[i + j]`
/// (0-based). Only the nonnegative lags of `u` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct THParams {
    lags: Vec<C64>,
    hankel: Vec<C64>,
}

impl THParams {
    pub fn zeros(m: usize) -> Self {
        Self { lags: vec![ZERO; m], hankel: vec![ZERO; 2 * m - 1] }
    }

    /// From the full Toeplitz generator indexed `-(M-1)..=(M-1)` and the
    /// Hankel generator indexed `0..=2M-2`.
    pub fn from_generators(u: &[C64], v: &[C64]) -> Result<Self> {
        let lags = toeplitz_lags(u)?;
        if v.len() != u.len() {
            return Err(Error::InvalidGenerator(format!(
                "Hankel generator has length {}, expected {}",
                v.len(),
                u.len()
            )));
        }
        Ok(Self { lags, hankel: v.to_vec() })
    }

    /// From nonnegative Toeplitz lags `u[0..M]` (imaginary part of `u[0]` dropped).
    pub fn from_lags(mut lags: Vec<C64>, hankel: Vec<C64>) -> Result<Self> {
        let m = lags.len();
        if m == 0 || hankel.len() != 2 * m - 1 {
            return Err(Error::InvalidGenerator(format!(
                "{} lags need a Hankel generator of length {}, got {}",
                m,
                (2 * m).saturating_sub(1),
                hankel.len()
            )));
        }
        lags[0].im = 0.0;
        Ok(Self { lags, hankel })
    }

    /// Ground-truth generators of a scene: `u[m] = Σ r_k e^{j2πm f_k}`,
    /// `v[s] = Σ r_k e^{j2φ_k} e^{j2πs f_k}`.
    pub fn from_scene(scene: &HarmonicScene, m: usize) -> Self {
        let mut p = Self::zeros(m);
        for ((&f, &phi), &r) in scene.frequencies().iter().zip(scene.phases()).zip(scene.powers()) {
            for (lag, u) in p.lags.iter_mut().enumerate() {
                *u += C64::from_polar(r, 2.0 * PI * lag as f64 * f);
            }
            for (s, v) in p.hankel.iter_mut().enumerate() {
                *v += C64::from_polar(r, 2.0 * phi + 2.0 * PI * s as f64 * f);
            }
        }
        p.lags[0].im = 0.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.lags.len()
    }

    pub fn lags(&self) -> &[C64] {
        &self.lags
    }

    pub fn hankel_generator(&self) -> &[C64] {
        &self.hankel
    }

    /// Full Toeplitz generator, element `k` holding `u[k - (M-1)]`.
    pub fn toeplitz_generator(&self) -> Vec<C64> {
        let m = self.dim();
        (0..2 * m - 1).map(|k| if k + 1 >= m { self.lags[k + 1 - m] } else { self.lags[m - 1 - k].conj() }).collect()
    }

    /// Number of real degrees of freedom, `6M - 3`.
    pub fn real_len(m: usize) -> usize {
        6 * m - 3
    }

    /// `[Re u0, Re u1, Im u1, ..., Re v0, Im v0, ...]`.
    pub fn to_real(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(Self::real_len(self.dim()));
        x.push(self.lags[0].re);
        for u in &self.lags[1..] {
            x.push(u.re);
            x.push(u.im);
        }
        for v in &self.hankel {
            x.push(v.re);
            x.push(v.im);
        }
        x
    }

    pub fn from_real(m: usize, x: &[f64]) -> Self {
        assert_eq!(x.len(), Self::real_len(m), "real parameter vector has the wrong length");
        let mut lags = vec![C64::new(x[0], 0.0)];
        let mut it = x[1..].chunks_exact(2);
        for _ in 1..m {
            let c = it.next().unwrap();
            lags.push(C64::new(c[0], c[1]));
        }
        let hankel = it.map(|c| C64::new(c[0], c[1])).collect();
        Self { lags, hankel }
    }
}

fn toeplitz_lags(u: &[C64]) -> Result<Vec<C64>> {
    if u.len() % 2 == 0 {
        return Err(Error::InvalidGenerator(format!("Toeplitz generator length {} is not odd", u.len())));
    }
    let m = u.len().div_ceil(2);
    let center = m - 1;
    let scale = u.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
    let tol = 1e-12 * scale;
    for lag in 0..m {
        let pos = u[center + lag];
        let neg = u[center - lag];
        if (pos - neg.conj()).norm() > tol {
            return Err(Error::InvalidGenerator(format!("u[-{lag}] is not conj(u[{lag}])")));
        }
    }
    let mut lags: Vec<C64> = u[center..].to_vec();
    lags[0].im = 0.0;
    Ok(lags)
}

fn toeplitz_from_lags(lags: &[C64]) -> CMat {
    let m = lags.len();
    CMat::from_fn(m, m, |i, j| if i >= j { lags[i - j] } else { lags[j - i].conj() })
}

fn hankel_from_unchecked(v: &[C64], m: usize) -> CMat {
    CMat::from_fn(m, m, |i, j| v[i + j])
}

/// Hermitian Toeplitz `T(i, j) = u[i - j]` from the full generator.
pub fn toeplitz_from(u: &[C64]) -> Result<CMat> {
    Ok(toeplitz_from_lags(&toeplitz_lags(u)?))
}

/// Symmetric Hankel `H(i, j) = v[i + j]` from a generator of odd length `2M - 1`.
pub fn hankel_from(v: &[C64]) -> Result<CMat> {
    if v.len() % 2 == 0 {
        return Err(Error::InvalidGenerator(format!("Hankel generator length {} is not odd", v.len())));
    }
    Ok(hankel_from_unchecked(v, v.len().div_ceil(2)))
}

/// A `2M × 2M` Hermitian augmented covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCovariance {
    pub matrix: CMat,
    pub params: Option<THParams>,
}

impl AugmentedCovariance {
    /// Wrap an arbitrary Hermitian matrix of even size.
    pub fn from_matrix(mut matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "augmented covariance must be 2M × 2M, got {:?}",
                matrix.shape()
            )));
        }
        symmetrize_hermitian(&mut matrix);
        Ok(Self { matrix, params: None })
    }

    pub fn from_scene(scene: &HarmonicScene, m: usize) -> Self {
        assemble_augmented(&THParams::from_scene(scene, m))
    }

    /// `M`.
    pub fn half_dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn toeplitz_block(&self) -> CMat {
        let m = self.half_dim();
        self.matrix.view((0, 0), (m, m)).into_owned()
    }

    pub fn hankel_block(&self) -> CMat {
        let m = self.half_dim();
        self.matrix.view((0, m), (m, m)).into_owned()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }

    /// `‖R_a − P(R_a)‖_F` where `P` is the projection onto structured matrices.
    pub fn structure_defect(&self) -> f64 {
        match project_structure(&self.matrix) {
            Ok(p) => (assemble_augmented(&p).matrix - &self.matrix).norm(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// `[T, H; conj(H), conj(T)]`.
pub fn assemble_augmented(p: &THParams) -> AugmentedCovariance {
    let m = p.dim();
    let t = toeplitz_from_lags(&p.lags);
    let h = hankel_from_unchecked(&p.hankel, m);
    let mut matrix = CMat::zeros(2 * m, 2 * m);
    matrix.view_mut((0, 0), (m, m)).copy_from(&t);
    matrix.view_mut((0, m), (m, m)).copy_from(&h);
    matrix.view_mut((m, 0), (m, m)).copy_from(&h.map(|z| z.conj()));
    matrix.view_mut((m, m), (m, m)).copy_from(&t.map(|z| z.conj()));
    AugmentedCovariance { matrix, params: Some(p.clone()) }
}

/// Orthogonal (Frobenius) projection of a Hermitian matrix onto the
/// jointly Toeplitz-Hankel structured subspace: each generator entry is the
/// mean of every matrix entry it controls, conjugated where it appears conjugated.
pub fn project_structure(g: &CMat) -> Result<THParams> {
    if !g.is_square() || g.nrows() % 2 != 0 || g.nrows() == 0 {
        return Err(Error::InvalidDimension(format!("expected 2M × 2M, got {:?}", g.shape())));
    }
    let defect = hermitian_defect(g);
    if defect > 1e-8 * g.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidInput(format!("input is not Hermitian (‖G − G^H‖ = {defect:e})")));
    }
    let mut g = g.clone();
    symmetrize_hermitian(&mut g);
    let m = g.nrows() / 2;

    let mut lag_sum = vec![ZERO; m];
    let mut lag_count = vec![0usize; m];
    let mut han_sum = vec![ZERO; 2 * m - 1];
    let mut han_count = vec![0usize; 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            // T(i, j) = u[i - j]; conj(T)(i, j) = conj(u[i - j]).
            if i >= j {
                lag_sum[i - j] += g[(i, j)] + g[(m + i, m + j)].conj();
            } else {
                lag_sum[j - i] += g[(i, j)].conj() + g[(m + i, m + j)];
            }
            lag_count[i.abs_diff(j)] += 2;
            han_sum[i + j] += g[(i, m + j)] + g[(m + i, j)].conj();
            han_count[i + j] += 2;
        }
    }
    let lags: Vec<C64> = lag_sum.iter().zip(&lag_count).map(|(s, &c)| s / c as f64).collect();
    let hankel = han_sum.iter().zip(&han_count).map(|(s, &c)| s / c as f64).collect();
    THParams::from_lags(lags, hankel)
}

/// `R̂_z = [R̂_y, Ĉ_y; conj(Ĉ_y), conj(R̂_y)]`.
pub fn build_rz(m: &SampleMoments) -> CMat {
    let n = m.dim();
    let mut rz = CMat::zeros(2 * n, 2 * n);
    rz.view_mut((0, 0), (n, n)).copy_from(&m.cov);
    rz.view_mut((0, n), (n, n)).copy_from(&m.pcov);
    rz.view_mut((n, 0), (n, n)).copy_from(&m.pcov.map(|z| z.conj()));
    rz.view_mut((n, n), (n, n)).copy_from(&m.cov.map(|z| z.conj()));
    rz
}

/// Lower triangle (diagonal included) in column-major order.
pub fn subvec(c: &CMat) -> CVec {
    let n = c.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for col in 0..n {
        for row in col..n {
            out.push(c[(row, col)]);
        }
    }
    CVec::from_vec(out)
}

/// The 0/1 matrix `U` with `subvec(C) = U vec(C)`.
pub fn subvec_selector(n: usize) -> nalgebra::DMatrix<f64> {
    let mut u = nalgebra::DMatrix::zeros(n * (n + 1) / 2, n * n);
    let mut r = 0;
    for col in 0..n {
        for row in col..n {
            u[(r, col * n + row)] = 1.0;
            r += 1;
        }
    }
    u
}

/// `q = [vec(R_y); subvec(C_y); conj(subvec(C_y))]`, length `2N² + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub q: CVec,
}

impl MomentVector {
    pub fn len_for(n: usize) -> usize {
        2 * n * n + n
    }

    /// Position in `R_z` of every entry of `q`, in order.
    pub fn rz_positions(n: usize) -> Vec<(usize, usize)> {
        let mut pos = Vec::with_capacity(Self::len_for(n));
        for col in 0..n {
            for row in 0..n {
                pos.push((row, col));
            }
        }
        for col in 0..n {
            for row in col..n {
                pos.push((row, n + col));
            }
        }
        for col in 0..n {
            for row in col..n {
                pos.push((n + row, col));
            }
        }
        pos
    }

    /// Read `q` out of a `2N × 2N` augmented matrix.
    pub fn from_rz(rz: &CMat) -> Self {
        let n = rz.nrows() / 2;
        let q = Self::rz_positions(n).into_iter().map(|p| rz[p]);
        Self { q: CVec::from_iterator(Self::len_for(n), q) }
    }
}

pub fn build_qy(r_y: &CMat, c_y: &CMat) -> Result<MomentVector> {
    let n = r_y.nrows();
    if !r_y.is_square() || c_y.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("R_y is {:?}, C_y is {:?}", r_y.shape(), c_y.shape())));
    }
    let c = subvec(c_y);
    let q = r_y.iter().copied().chain(c.iter().copied()).chain(c.iter().map(|z| z.conj()));
    Ok(MomentVector { q: CVec::from_iterator(MomentVector::len_for(n), q) })
}

/// `J' R_a J'^H`; in selection mode a principal submatrix on `Ω'`.
pub fn compress(r_a: &CMat, design: &MeasurementDesign) -> Result<CMat> {
    let m = design.full_dim();
    if r_a.shape() != (2 * m, 2 * m) {
        return Err(Error::DimensionMismatch(format!(
            "R_a is {:?}, design expects {} × {}",
            r_a.shape(),
            2 * m,
            2 * m
        )));
    }
    Ok(match design.compression() {
        Compression::Selection(_) => {
            let idx = design.augmented_indices().unwrap();
            CMat::from_fn(idx.len(), idx.len(), |i, j| r_a[(idx[i], idx[j])])
        }
        Compression::Dense(_) => {
            let jp = design.augmented_matrix();
            let mut out = &jp * r_a * jp.adjoint();
            symmetrize_hermitian(&mut out);
            out
        }
    })
}

/// Which structured subspace a [`StructureBasis`] spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    /// `[T, H; conj(H), conj(T)]`, `6M - 3` real parameters.
    Augmented,
    /// Hermitian Toeplitz `T` alone, `2M - 1` real parameters.
    Toeplitz,
}

/// Real-linear basis `{B_i}` of a structured Hermitian subspace, stored
/// sparsely. `x ↦ Σ x_i B_i` and its adjoint `V ↦ (Re⟨B_i, V⟩)_i`.
#[derive(Debug, Clone)]
pub struct StructureBasis {
    kind: StructureKind,
    half: usize,
    dim: usize,
    elements: Vec<Vec<(usize, usize, C64)>>,
}

impl StructureBasis {
    pub fn new(kind: StructureKind, m: usize) -> Self {
        assert!(m >= 1);
        let dim = match kind {
            StructureKind::Augmented => 2 * m,
            StructureKind::Toeplitz => m,
        };
        let mut elements = Vec::new();
        let with_lower = kind == StructureKind::Augmented;

        // Toeplitz lags.
        for lag in 0..m {
            let units: &[C64] = if lag == 0 { &[ONE] } else { &[ONE, I] };
            for &w in units {
                let mut e = Vec::new();
                for j in 0..m - lag {
                    let i = j + lag;
                    e.push((i, j, w));
                    if lag > 0 {
                        e.push((j, i, w.conj()));
                    }
                    if with_lower {
                        e.push((m + i, m + j, w.conj()));
                        if lag > 0 {
                            e.push((m + j, m + i, w));
                        }
                    }
                }
                elements.push(e);
            }
        }
        if with_lower {
            for s in 0..2 * m - 1 {
                for w in [ONE, I] {
                    let mut e = Vec::new();
                    for i in 0..m {
                        if s >= i && s - i < m {
                            let j = s - i;
                            e.push((i, m + j, w));
                            e.push((m + i, j, w.conj()));
                        }
                    }
                    elements.push(e);
                }
            }
        }
        Self { kind, half: m, dim, elements }
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    /// `M`.
    pub fn half_dim(&self) -> usize {
        self.half
    }

    /// Side length of the structured matrices.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> CMat {
        let mut b = CMat::zeros(self.dim, self.dim);
        for &(r, c, w) in &self.elements[i] {
            b[(r, c)] += w;
        }
        b
    }

    pub fn assemble(&self, x: &[f64]) -> CMat {
        assert_eq!(x.len(), self.len());
        let mut out = CMat::zeros(self.dim, self.dim);
        for (e, &xi) in self.elements.iter().zip(x) {
            if xi != 0.0 {
                for &(r, c, w) in e {
                    out[(r, c)] += w * xi;
                }
            }
        }
        out
    }

    pub fn adjoint(&self, v: &CMat) -> Vec<f64> {
        self.elements.iter().map(|e| e.iter().map(|&(r, c, w)| (w.conj() * v[(r, c)]).re).sum()).collect()
    }

    /// `‖B_i‖_F²`; the basis is orthogonal so this is the whole Gram matrix.
    pub fn norms_sq(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.iter().map(|(_, _, w)| w.norm_sqr()).sum()).collect()
    }

    /// `tr(B_i)`.
    pub fn traces(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.iter().filter(|(r, c, _)| r == c).map(|(_, _, w)| w.re).sum()).collect()
    }
}
