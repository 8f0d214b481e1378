//! Tridiagonal solves for the implicit damage step.

/// Solves `a[i]x[i-1] + b[i]x[i] + c[i]x[i+1] = d[i]` in place (`d` becomes
/// `x`). `a[0]` and `c[n-1]` are ignored. The systems assembled by the damage
/// step are diagonally dominant, so no pivoting is needed.
pub fn solve(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    debug_assert!(a.len() == n && b.len() == n && c.len() == n);
    if n == 0 {
        return;
    }
    let mut cp = vec![0.0; n];
    let mut m = b[0];
    cp[0] = c[0] / m;
    d[0] /= m;
    for i in 1..n {
        m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Cyclic variant: `a[0]` couples row 0 to `x[n-1]` and `c[n-1]` couples the
/// last row to `x[0]`; needs `n >= 3`. Sherman–Morrison on top of [`solve`].
pub fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    debug_assert!(n >= 3);
    let alpha = c[n - 1];
    let beta = a[0];
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    solve(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    solve(a, &bb, c, &mut u);
    let fact = (d[0] + beta * d[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
    for i in 0..n {
        d[i] -= fact * u[i];
    }
}
