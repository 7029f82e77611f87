//! Symmetric tridiagonal eigenproblems by Sturm-sequence bisection.

/// Pivots smaller than this are nudged away from zero in the LDLᵀ sweep.
const PIVOT_GUARD: f64 = 1e-300;

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1] / q
        };
        q = diag[i] - lambda - coupling;
        if q.abs() < PIVOT_GUARD {
            q = -PIVOT_GUARD;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based), bisected to absolute width `tol`.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift) x = rhs` with the Thomas algorithm.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let guard = |v: f64| if v.abs() < 1e-300 { 1e-300 } else { v };
    let mut b = guard(diag[0] - shift);
    c[0] = if n > 1 { off[0] / b } else { 0.0 };
    d[0] = rhs[0] / b;
    for i in 1..n {
        b = guard(diag[i] - shift - off[i - 1] * c[i - 1]);
        c[i] = if i + 1 < n { off[i] / b } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Eigenvector for an (accurately known) eigenvalue by inverse iteration,
/// normalized to unit Euclidean length with a positive largest component.
pub fn eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = lambda - 1e-9 * lambda.abs().max(1.0);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        let mut w = solve_shifted(diag, off, shift, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        v = w;
    }
    let peak = v
        .iter()
        .copied()
        .fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if peak < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        // -u'' on (0, 1) with Dirichlet walls: 4/h² sin²(jπh/2)
        let n = 99;
        let h = 1.0 / (n + 1) as f64;
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        for k in 0..5 {
            let exact = 4.0 / (h * h) * ((k + 1) as f64 * PI * h / 2.0).sin().powi(2);
            let got = kth_eigenvalue(&diag, &off, k, 1e-10);
            assert!((got - exact).abs() < 1e-8, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn counts_are_monotone() {
        let diag = [2.0, -1.0, 3.0, 0.5];
        let off = [1.0, 0.5, -0.7];
        let mut prev = 0;
        for step in 0..200 {
            let lambda = -5.0 + step as f64 * 0.05;
            let c = sturm_count(&diag, &off, lambda);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 4);
    }

    #[test]
    fn inverse_iteration_recovers_sine_mode() {
        let n = 49;
        let h = 1.0 / (n + 1) as f64;
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let lambda = kth_eigenvalue(&diag, &off, 0, 1e-10);
        let v = eigenvector(&diag, &off, lambda);
        let s: Vec<f64> = (1..=n).map(|i| (PI * i as f64 * h).sin()).collect();
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, b) in v.iter().zip(&s) {
            assert!((a - b / norm).abs() < 1e-8);
        }
    }
}
