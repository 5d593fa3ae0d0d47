//! First-order matrix form `dW/dx + f(W) W = b` of the superpotential
//! ladder, and the experiment that decides which index/sign convention of
//! the matrix entries actually reproduces the ladder equations.
//!
//! The reference entry rule builds `f` upper-triangular with diagonal
//! `-W_a` and strictly-upper entries `(-1)^a 2 W_b`; the constant vector is
//! `b_k = S_k + sum_{i=1}^{k-1} (-1)^i 2 S_{k-i}` with spacings `S`. When
//! its residual along integrated trajectories does not vanish, the
//! experiment reports the variant that does (see
//! [`equivalence_experiment`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::susy::riccati::centered_derivative;
use crate::susy::SuperpotentialSet;

/// Candidate entry conventions for the coupling matrix `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LloydVariant {
    /// Upper-triangular, strictly-upper entry `(-1)^a 2 W_b` (the reference
    /// form as written).
    UpperRowSign,
    /// The same entry rule applied to the reversed state vector
    /// `(W_M, ..., W_1)` with the constant vector reversed to match.
    UpperRowSignReversed,
    /// Transposed triangle with a pair-dependent sign: strictly-lower entry
    /// `(-1)^{a+b+1} 2 W_b`. This is the convention consistent with the
    /// ladder equations.
    LowerPairSign,
}

impl LloydVariant {
    pub const ALL: [LloydVariant; 3] = [
        LloydVariant::UpperRowSign,
        LloydVariant::UpperRowSignReversed,
        LloydVariant::LowerPairSign,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            LloydVariant::UpperRowSign => "upper triangle, row sign (-1)^a (reference form)",
            LloydVariant::UpperRowSignReversed => "reference form on the reversed state vector",
            LloydVariant::LowerPairSign => "lower triangle, pair sign (-1)^(a+b+1)",
        }
    }
}

/// Builder for the matrix system at a given state vector.
#[derive(Debug, Clone)]
pub struct LloydSystem {
    spacings: Vec<f64>,
}

impl LloydSystem {
    pub fn new(spacings: Vec<f64>) -> Self {
        LloydSystem { spacings }
    }

    pub fn from_superpotentials(sps: &SuperpotentialSet) -> Self {
        LloydSystem {
            spacings: sps.spacings().to_vec(),
        }
    }

    pub fn m(&self) -> usize {
        self.spacings.len()
    }

    /// Constant vector `b_k = S_k + sum_{i=1}^{k-1} (-1)^i 2 S_{k-i}`.
    pub fn b(&self) -> Vec<f64> {
        let m = self.m();
        (1..=m)
            .map(|k| {
                let mut acc = self.spacings[k - 1];
                for i in 1..k {
                    let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
                    acc += sign * 2.0 * self.spacings[k - 1 - i];
                }
                acc
            })
            .collect()
    }

    /// Coupling matrix in the reference (upper-triangular) form.
    pub fn f(&self, w: &[f64]) -> Vec<Vec<f64>> {
        self.f_variant(w, LloydVariant::UpperRowSign)
    }

    /// Coupling matrix under the given entry convention. For the reversed
    /// variant the matrix acts on the reversed state vector.
    pub fn f_variant(&self, w: &[f64], variant: LloydVariant) -> Vec<Vec<f64>> {
        let m = self.m();
        assert_eq!(w.len(), m, "state vector length mismatch");
        let mut f = vec![vec![0.0; m]; m];
        for a in 1..=m {
            for b in 1..=m {
                f[a - 1][b - 1] = match variant {
                    LloydVariant::UpperRowSign | LloydVariant::UpperRowSignReversed => {
                        if a == b {
                            -w[a - 1]
                        } else if a < b {
                            let sign = if a % 2 == 1 { -1.0 } else { 1.0 };
                            sign * 2.0 * w[b - 1]
                        } else {
                            0.0
                        }
                    }
                    LloydVariant::LowerPairSign => {
                        if a == b {
                            -w[a - 1]
                        } else if b < a {
                            let sign = if (a + b + 1) % 2 == 1 { -1.0 } else { 1.0 };
                            sign * 2.0 * w[b - 1]
                        } else {
                            0.0
                        }
                    }
                };
            }
        }
        f
    }

    /// Residual `W' + f(W) W - b` of one variant at a single point.
    pub fn residual(&self, w: &[f64], w_prime: &[f64], variant: LloydVariant) -> Vec<f64> {
        let m = self.m();
        let (w_v, wp_v, b_v): (Vec<f64>, Vec<f64>, Vec<f64>) = match variant {
            LloydVariant::UpperRowSignReversed => (
                w.iter().rev().copied().collect(),
                w_prime.iter().rev().copied().collect(),
                self.b().into_iter().rev().collect(),
            ),
            _ => (w.to_vec(), w_prime.to_vec(), self.b()),
        };
        let f = self.f_variant(&w_v, variant);
        (0..m)
            .map(|row| {
                let coupling: f64 = (0..m).map(|col| f[row][col] * w_v[col]).sum();
                wp_v[row] + coupling - b_v[row]
            })
            .collect()
    }
}

/// The matrix system instantiated at one grid node, with the reference-form
/// residual against the integrated trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct LloydPoint {
    pub x: f64,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Instantiate the reference-form system at grid node `node` of an
/// integrated ladder. The node must sit at least two steps inside the valid
/// sub-grid so the derivative stencil applies.
pub fn lloyd_system_at(sps: &SuperpotentialSet, node: usize) -> Result<LloydPoint> {
    let m = sps.ladder_size();
    if m == 0 {
        return Err(Error::InvalidInput(
            "the degenerate single-level ladder has no matrix system".into(),
        ));
    }
    let grid = sps.grid();
    let center = grid.half_nodes();
    let valid = sps.valid_half_nodes_common();
    if valid < 2 || node < center - valid + 2 || node > center + valid - 2 {
        return Err(Error::OutOfRange {
            what: "grid node",
            value: node as u64,
            min: (center - valid + 2) as u64,
            max: (center + valid - 2) as u64,
        });
    }
    let w: Vec<f64> = (0..m).map(|k| sps.w_values(k)[node]).collect();
    let w_prime: Vec<f64> = (0..m)
        .map(|k| centered_derivative(sps.w_values(k), node, grid.step()))
        .collect();
    let system = LloydSystem::from_superpotentials(sps);
    let f = system.f(&w);
    let b = system.b();
    let residual = system.residual(&w, &w_prime, LloydVariant::UpperRowSign);
    Ok(LloydPoint {
        x: grid.x(node),
        w,
        w_prime,
        f,
        b,
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantResidual {
    pub variant: LloydVariant,
    pub max_residual: f64,
}

/// Outcome of checking every entry convention against the integrated
/// trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct LloydReport {
    pub m: usize,
    pub tolerance: f64,
    pub residuals: Vec<VariantResidual>,
    /// Variants whose residual stays below the tolerance everywhere.
    pub satisfied: Vec<LloydVariant>,
    pub lines: Vec<String>,
}

impl LloydReport {
    pub fn reference_form_holds(&self) -> bool {
        self.satisfied.contains(&LloydVariant::UpperRowSign)
    }
}

/// Evaluate `max |W' + f(W) W - b|` along the integrated trajectories for
/// every entry convention, using a five-point derivative stencil, and
/// report which conventions satisfy the system.
pub fn equivalence_experiment(sps: &SuperpotentialSet, tolerance: f64) -> Result<LloydReport> {
    let m = sps.ladder_size();
    if m == 0 {
        return Err(Error::InvalidInput(
            "the degenerate single-level ladder has no matrix system".into(),
        ));
    }
    let grid = sps.grid();
    let center = grid.half_nodes();
    let valid = sps.valid_half_nodes_common();
    if valid < 3 {
        return Err(Error::InvalidInput(
            "valid sub-grid too narrow for the residual stencil".into(),
        ));
    }
    let system = LloydSystem::from_superpotentials(sps);

    let mut maxima = [0.0f64; 3];
    let mut w = vec![0.0; m];
    let mut w_prime = vec![0.0; m];
    for node in (center - valid + 2)..=(center + valid - 2) {
        for k in 0..m {
            w[k] = sps.w_values(k)[node];
            w_prime[k] = centered_derivative(sps.w_values(k), node, grid.step());
        }
        for (slot, &variant) in LloydVariant::ALL.iter().enumerate() {
            let res = system.residual(&w, &w_prime, variant);
            let worst = res.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
            maxima[slot] = maxima[slot].max(worst);
        }
    }

    let residuals: Vec<VariantResidual> = LloydVariant::ALL
        .iter()
        .zip(maxima)
        .map(|(&variant, max_residual)| VariantResidual {
            variant,
            max_residual,
        })
        .collect();
    let satisfied: Vec<LloydVariant> = residuals
        .iter()
        .filter(|r| r.max_residual < tolerance)
        .map(|r| r.variant)
        .collect();

    let mut lines = Vec::new();
    lines.push(format!(
        "matrix-form residual experiment, M = {m}, tolerance {tolerance:.1e}"
    ));
    for r in &residuals {
        let verdict = if r.max_residual < tolerance {
            "satisfies"
        } else {
            "violates"
        };
        lines.push(format!(
            "  {:55} max |residual| = {:10.3e}  -> {} the system",
            r.variant.label(),
            r.max_residual,
            verdict
        ));
    }
    if satisfied.is_empty() {
        lines.push("  no tested convention satisfies the system".into());
    } else if !satisfied.contains(&LloydVariant::UpperRowSign) {
        lines.push(format!(
            "  discrepancy: the reference entry rule does not reproduce the ladder; \
             the consistent convention is: {}",
            satisfied
                .iter()
                .map(|v| v.label())
                .collect::<Vec<_>>()
                .join("; ")
        ));
    }

    Ok(LloydReport {
        m,
        tolerance,
        residuals,
        satisfied,
        lines,
    })
}
