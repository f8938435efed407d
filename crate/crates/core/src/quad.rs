//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal panels on `[a, b]`, `n` nodes each.
pub fn composite(a: f64, b: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        for &(x, w) in &rule {
            out.push((x0 + h * x, h * w));
        }
    }
    out
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, n: usize) -> f64 {
    composite(a, b, panels, n).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Adaptive Gauss–Legendre: panels are bisected until the `n`-point
/// estimate agrees with the sum over the two halves to within the share of
/// `tol` proportional to the panel length. Returns the integral and the
/// number of integrand evaluations.
pub fn adaptive(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
    max_depth: u32,
) -> (f64, usize) {
    let rule = gauss_legendre(n);
    let mut evals = 0;
    let mut panel = |x0: f64, x1: f64, evals: &mut usize| -> f64 {
        *evals += rule.len();
        rule.iter().map(|&(x, w)| w * (x1 - x0) * f(x0 + (x1 - x0) * x)).sum()
    };
    let whole = panel(a, b, &mut evals);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    while let Some((x0, x1, est, depth)) = stack.pop() {
        let m = 0.5 * (x0 + x1);
        let l = panel(x0, m, &mut evals);
        let r = panel(m, x1, &mut evals);
        let share = tol * (x1 - x0) / (b - a);
        if (l + r - est).abs() <= share || depth >= max_depth {
            total += l + r;
        } else {
            stack.push((m, x1, r, depth + 1));
            stack.push((x0, m, l, depth + 1));
        }
    }
    (total, evals)
}
