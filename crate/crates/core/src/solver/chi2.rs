//! Upper quantile of the chi-squared distribution.

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// `η` such that `Prob{χ²(dof) > η} = p`.
///
/// Inverts the regularized incomplete gamma function with a safeguarded
/// Newton iteration. The lower tail is used when `p > 1/2` so that `η → 0`
/// as `p → 1` keeps full relative accuracy.
pub fn chi2_quantile(dof: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if dof == 0 {
        return Err(Error::InvalidInput("chi-squared needs at least one degree of freedom".into()));
    }
    let a = dof as f64 / 2.0;
    let upper = p <= 0.5;
    let target = if upper { p } else { 1.0 - p };
    // g(x) > 0 once x is past the root, in both tails.
    let g = |x: f64| if upper { target - gamma_ur(a, x) } else { gamma_lr(a, x) - target };
    let log_norm = ln_gamma(a);
    let density = |x: f64| ((a - 1.0) * x.ln() - x - log_norm).exp();

    let mut lo = 0.0_f64;
    let mut hi = a.max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = density(x);
        let newton = x - gx / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
            x = next;
            break;
        }
        x = next;
    }
    Ok(2.0 * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dof_closed_form() {
        for p in [0.5, 0.1, 0.01, 1e-6] {
            let eta = chi2_quantile(2, p).unwrap();
            let want = -2.0 * f64::ln(p);
            assert!((eta - want).abs() <= 1e-12 * want, "p = {p}: {eta} vs {want}");
        }
        assert!((chi2_quantile(2, 0.01).unwrap() - 9.2103404).abs() < 1e-7);
    }

    #[test]
    fn quantile_at_probability_near_one_vanishes() {
        let eta = chi2_quantile(36, 1.0 - 1e-12).unwrap();
        assert!(eta > 0.0 && eta < 5.0);
        let eta2 = chi2_quantile(36, 1.0 - 1e-15).unwrap();
        assert!(eta2 < eta);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(matches!(chi2_quantile(3, 0.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(chi2_quantile(3, 1.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(chi2_quantile(3, f64::NAN), Err(Error::InvalidProbability(_))));
        assert!(chi2_quantile(0, 0.1).is_err());
    }

    #[test]
    fn monotone_in_p_and_dof() {
        let mut prev = f64::INFINITY;
        for p in [0.001, 0.01, 0.05, 0.5, 0.9] {
            let eta = chi2_quantile(10, p).unwrap();
            assert!(eta < prev);
            prev = eta;
        }
        assert!(chi2_quantile(36, 0.01).unwrap() < chi2_quantile(37, 0.01).unwrap());
    }
}
