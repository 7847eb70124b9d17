//! Direct real parametrization of the Toeplitz-Hankel augmented structure,
//! written without the library's basis.

use lrthcr::{CMat, C64};

/// Real basis matrices of `[[T, H], [conj H, conj T]]` for array size `m`,
/// with `T` Hermitian Toeplitz and `H` symmetric Hankel. Not normalized.
pub fn basis(m: usize) -> Vec<CMat> {
    let d = 2 * m;
    let mut out = Vec::new();
    let one = C64::new(1.0, 0.0);
    let j = C64::new(0.0, 1.0);
    // Toeplitz lag k: T(r, c) = u[r - c], u[-k] = conj u[k].
    for k in 0..m {
        let coeffs: &[C64] = if k == 0 { &[one] } else { &[one, j] };
        for &w in coeffs {
            let mut a = CMat::zeros(d, d);
            for r in 0..m {
                for c in 0..m {
                    let val = if r == c + k {
                        w
                    } else if c == r + k {
                        w.conj()
                    } else {
                        continue;
                    };
                    a[(r, c)] += val;
                    a[(m + r, m + c)] += val.conj();
                }
            }
            out.push(a);
        }
    }
    // Hankel anti-diagonal s: H(r, c) = v[r + c].
    for s in 0..(2 * m - 1) {
        for w in [one, j] {
            let mut a = CMat::zeros(d, d);
            for r in 0..m {
                for c in 0..m {
                    if r + c == s {
                        a[(r, m + c)] = w;
                        a[(m + r, c)] = w.conj();
                    }
                }
            }
            out.push(a);
        }
    }
    out
}

pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Least-squares fit of `g` by the basis through the normal equations.
pub fn brute_force_projection(g: &CMat, m: usize) -> CMat {
    let b = basis(m);
    let n = b.len();
    let gram = nalgebra::DMatrix::from_fn(n, n, |i, k| inner(&b[i], &b[k]));
    let rhs = nalgebra::DVector::from_fn(n, |i, _| inner(&b[i], g));
    let x = gram.lu().solve(&rhs).expect("basis is linearly independent");
    let mut out = CMat::zeros(2 * m, 2 * m);
    for (xi, bi) in x.iter().zip(&b) {
        out += bi * C64::new(*xi, 0.0);
    }
    out
}
