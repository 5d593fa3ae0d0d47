//! Fixed-step RK4 integration of the superpotential ladder.
//!
//! The ladder equations close over the superpotentials alone: the partner
//! potential entering equation `k` is an algebraic function of the lower
//! components at the same point,
//!
//! ```text
//! W_k' = S_k + W_k^2 - V_{k-1},    V_k = 2 S_k + 2 W_k^2 - V_{k-1},
//! ```
//!
//! with `V_0 = 0` and spacings `S_k < 0`. Integrating the whole vector at
//! once therefore needs no interpolation of gridded intermediates, while
//! the triangular dependency (component `k` reads only components below
//! it) lets lower components continue after a higher one diverges.

/// Derivatives of all `active` components at one point.
pub(crate) fn ladder_rhs(w: &[f64], spacings: &[f64], out: &mut [f64], active: usize) {
    let mut v_prev = 0.0;
    for k in 0..active {
        let wsq = w[k] * w[k];
        out[k] = spacings[k] + wsq - v_prev;
        v_prev = 2.0 * spacings[k] + 2.0 * wsq - v_prev;
    }
}

/// Partner potential `V_j` at one point from the step recurrence,
/// `j = 0 ..= upto` (0 returns 0).
pub(crate) fn partner_potential(w: &[f64], spacings: &[f64], upto: usize) -> f64 {
    let mut v_prev = 0.0;
    for k in 0..upto {
        v_prev = 2.0 * spacings[k] + 2.0 * w[k] * w[k] - v_prev;
    }
    v_prev
}

pub(crate) struct IntegratedLadder {
    /// `w[k][node]`, full grid length, `NaN` outside the component's extent.
    pub w: Vec<Vec<f64>>,
    /// Symmetric valid extent of each component, in nodes from the center.
    pub valid_half_nodes: Vec<usize>,
}

/// Integrate outward from the center in both directions, freezing
/// components (and everything above them) when they exceed `threshold`.
pub(crate) fn integrate(
    spacings: &[f64],
    half_nodes: usize,
    step: f64,
    threshold: f64,
) -> IntegratedLadder {
    let m = spacings.len();
    let nodes = 2 * half_nodes + 1;
    let mut w = vec![vec![f64::NAN; nodes]; m];
    for arr in &mut w {
        arr[half_nodes] = 0.0;
    }
    let mut valid_pos = vec![half_nodes; m];
    let mut valid_neg = vec![half_nodes; m];

    for (sign, valid) in [(1.0, &mut valid_pos), (-1.0, &mut valid_neg)] {
        let h = sign * step;
        let mut state = vec![0.0f64; m];
        let mut active = m;
        let mut k1 = vec![0.0; m];
        let mut k2 = vec![0.0; m];
        let mut k3 = vec![0.0; m];
        let mut k4 = vec![0.0; m];
        let mut stage = vec![0.0; m];

        for i in 1..=half_nodes {
            if active == 0 {
                break;
            }
            ladder_rhs(&state, spacings, &mut k1, active);
            for k in 0..active {
                stage[k] = state[k] + 0.5 * h * k1[k];
            }
            ladder_rhs(&stage, spacings, &mut k2, active);
            for k in 0..active {
                stage[k] = state[k] + 0.5 * h * k2[k];
            }
            ladder_rhs(&stage, spacings, &mut k3, active);
            for k in 0..active {
                stage[k] = state[k] + h * k3[k];
            }
            ladder_rhs(&stage, spacings, &mut k4, active);
            for k in 0..active {
                state[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }

            // freeze the first diverged component and everything above it
            if let Some(bad) =
                (0..active).find(|&k| !state[k].is_finite() || state[k].abs() > threshold)
            {
                valid[bad..active].fill(i - 1);
                active = bad;
                if active == 0 {
                    break;
                }
            }

            let node = (half_nodes as f64 + sign * i as f64) as usize;
            for (k, arr) in w.iter_mut().enumerate().take(active) {
                arr[node] = state[k];
            }
        }
    }

    let valid_half_nodes = valid_pos
        .into_iter()
        .zip(valid_neg)
        .map(|(p, n)| p.min(n))
        .collect();
    IntegratedLadder {
        w,
        valid_half_nodes,
    }
}

/// Five-point centered first derivative on a uniform grid.
pub(crate) fn centered_derivative(values: &[f64], i: usize, step: f64) -> f64 {
    (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * step)
}
