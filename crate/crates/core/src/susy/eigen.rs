//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.
//!
//! Only the lowest few eigenvalues of the finite-difference Hamiltonian are
//! ever needed, so bisection on the negative-pivot count of `T - x` beats a
//! full decomposition comfortably.

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`,
/// counted through the signs of the LDL^T pivots.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut t = diag[0] - x;
    if t < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if t == 0.0 { f64::MIN_POSITIVE } else { t };
        t = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if t < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues, ascending.
pub(crate) fn lowest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    assert!(off.len() + 1 == n, "off-diagonal length mismatch");
    assert!(
        count <= n,
        "cannot extract more eigenvalues than the dimension"
    );

    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);

    let mut out = Vec::with_capacity(count);
    let mut floor = lo;
    for j in 0..count {
        let mut a = floor;
        let mut b = hi;
        for _ in 0..200 {
            if b - a <= 1e-14 * scale {
                break;
            }
            let mid = 0.5 * (a + b);
            if count_below(diag, off, mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        let lambda = 0.5 * (a + b);
        out.push(lambda);
        floor = a; // eigenvalue j+1 cannot lie below eigenvalue j
    }
    out
}

/// Lowest eigenvalues of `-d^2/dx^2 + V` with Dirichlet walls at both ends
/// of the sampled potential (units with `2m = 1`, `hbar = 1`).
pub(crate) fn dirichlet_spectrum(potential: &[f64], step: f64, count: usize) -> Vec<f64> {
    let inner = &potential[1..potential.len() - 1];
    let kin = 1.0 / (step * step);
    let diag: Vec<f64> = inner.iter().map(|&v| 2.0 * kin + v).collect();
    let off = vec![-kin; inner.len() - 1];
    lowest_eigenvalues(&diag, &off, count)
}
