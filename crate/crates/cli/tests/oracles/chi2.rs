//! Chi-squared quantiles by composite Gauss-Legendre quadrature of the
//! density and bisection, with the gamma function from exact factorial identities.

use std::f64::consts::PI;

fn gamma_half(k: usize) -> f64 {
    // Γ(k/2)
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let n = (k - 1) / 2;
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let mut g = PI.sqrt();
        for i in 0..n {
            g *= i as f64 + 0.5;
        }
        g
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn composite(f: &dyn Fn(f64) -> f64, rule: &[(f64, f64)], a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let c = a + (i as f64 + 0.5) * h;
            rule.iter().map(|&(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Doubles the panel count until two successive estimates agree to near machine precision.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(20);
    let mut prev = composite(f, &rule, a, b, 4);
    let mut panels = 8;
    loop {
        let next = composite(f, &rule, a, b, panels);
        if (next - prev).abs() <= 1e-15 * next.abs() || panels >= 1 << 12 {
            return next;
        }
        prev = next;
        panels *= 2;
    }
}

/// Upper tail `P(χ²_k > x)`, integrating in `s = √t` so the density is smooth at 0.
pub fn upper_tail(k: usize, x: f64) -> f64 {
    let norm = 2.0 / (2f64.powf(k as f64 / 2.0) * gamma_half(k));
    let f = move |s: f64| norm * s.powi(k as i32 - 1) * (-0.5 * s * s).exp();
    let root = x.sqrt();
    // The density beyond s = root + 40 is below 1e-300 for every k used here.
    let hi = root.max((k as f64).sqrt()) + 40.0;
    integrate(&f, root, hi)
}

/// `x` with `P(χ²_k > x) = p`.
pub fn quantile(k: usize, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 10.0 * k as f64 + 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_tail(k, mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
