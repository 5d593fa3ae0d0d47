//! Projective-measurement factorization protocol.
//!
//! An integer `N <= 2^d` with `k` distinct prime factors labels a `k`-fold
//! degenerate energy level `ln N` of the combined log-prime / log-integer
//! Hamiltonian: `ln N = ln p_a + ln(N / p_a)` for each distinct factor
//! `p_a`. Measuring the log-prime part samples one branch with Born
//! probability `|c_a|^2` and collapses the state onto it; dividing out the
//! measured prime and repeating factors `N` completely in as many
//! measurements as the protocol variant dictates.
//!
//! The simulator consults the classical factorization oracle to *construct*
//! each degenerate manifold, emulating the physics (nature knows the
//! degeneracy structure of its own spectrum). The protocol's accounting --
//! measurement and division counts, recorded probabilities -- never uses
//! oracle information.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{factor_oracle, Factorization, PrimeTable};

const NORM_TOL: f64 = 1e-12;

/// One decomposition `ln N = ln p + ln(N/p)` of a degenerate level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Branch {
    pub prime: u64,
    pub cofactor: u64,
}

impl Branch {
    pub fn log_prime(&self) -> f64 {
        (self.prime as f64).ln()
    }

    pub fn log_cofactor(&self) -> f64 {
        (self.cofactor as f64).ln()
    }
}

/// State over the `k`-fold degenerate manifold of `|ln N>`.
///
/// Branches are ordered by ascending prime; amplitudes are normalized to
/// unit probability within `1e-12`.
#[derive(Debug, Clone)]
pub struct BranchState {
    n: u64,
    branches: Vec<Branch>,
    amplitudes: Vec<Complex64>,
}

/// Outcome of a single projective measurement of the log-prime observable.
#[derive(Debug, Clone)]
pub struct Measurement {
    /// The prime whose logarithm was observed.
    pub prime: u64,
    /// Born probability of this outcome at measurement time.
    pub probability: f64,
    /// Uniform draw that selected the outcome (recorded for replay).
    pub draw: f64,
    /// Post-measurement state: amplitude 1 on the observed branch.
    pub collapsed: BranchState,
}

impl BranchState {
    fn manifold(n: u64, table: &PrimeTable) -> Result<Vec<Branch>> {
        if n < 2 || n > table.cutoff() {
            return Err(Error::OutOfRange {
                what: "integer N",
                value: n,
                min: 2,
                max: table.cutoff(),
            });
        }
        let decomposition = factor_oracle(n)?;
        let mut branches = Vec::with_capacity(decomposition.distinct_count());
        for p in decomposition.primes() {
            if !table.contains(p) {
                return Err(Error::FactorOutsideTable {
                    n,
                    prime: p,
                    table_len: table.len(),
                });
            }
            branches.push(Branch {
                prime: p,
                cofactor: n / p,
            });
        }
        Ok(branches)
    }

    /// Manifold of `n` with amplitudes drawn uniformly from the complex unit
    /// sphere (normalized standard complex Gaussians).
    pub fn random(n: u64, table: &PrimeTable, rng: &mut impl Rng) -> Result<Self> {
        let branches = Self::manifold(n, table)?;
        let k = branches.len();
        let amplitudes = loop {
            let raw: Vec<Complex64> = (0..k)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                break raw.into_iter().map(|c| c / norm).collect();
            }
        };
        Ok(BranchState {
            n,
            branches,
            amplitudes,
        })
    }

    /// Manifold of `n` with caller-supplied amplitudes (must be normalized).
    ///
    /// Zero amplitudes are allowed: such a branch is simply unreachable by a
    /// measurement on this state.
    pub fn with_amplitudes(n: u64, table: &PrimeTable, amplitudes: Vec<Complex64>) -> Result<Self> {
        let branches = Self::manifold(n, table)?;
        if amplitudes.len() != branches.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes supplied for a {}-branch manifold",
                amplitudes.len(),
                branches.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sq,
                tol: NORM_TOL,
            });
        }
        Ok(BranchState {
            n,
            branches,
            amplitudes,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Degeneracy `k`: the number of distinct prime factors of `n`.
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Measure the log-prime observable: sample a branch with Born
    /// probability `|c_a|^2` and collapse onto it.
    pub fn measure_h1(&self, rng: &mut impl Rng) -> Measurement {
        let draw: f64 = rng.random();
        let probs = self.probabilities();
        let total: f64 = probs.iter().sum();
        let mut cumulative = 0.0;
        let mut chosen = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            cumulative += p;
            if draw < cumulative {
                chosen = i;
                break;
            }
        }
        let mut amplitudes = vec![Complex64::ZERO; self.branches.len()];
        amplitudes[chosen] = Complex64::ONE;
        Measurement {
            prime: self.branches[chosen].prime,
            // dividing by the rounding-limited total keeps a certain
            // outcome at exactly 1
            probability: probs[chosen] / total,
            draw,
            collapsed: BranchState {
                n: self.n,
                branches: self.branches.clone(),
                amplitudes,
            },
        }
    }
}

/// Protocol variant.
///
/// `A` performs one measurement per prime counted with multiplicity,
/// dividing once after each. `B` performs one measurement per *distinct*
/// prime, dividing classically until the measured prime no longer divides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    A,
    B,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            other => Err(format!("unknown variant {other:?} (expected A or B)")),
        }
    }
}

/// One measurement step of a factorization run.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub step: usize,
    pub prime: u64,
    #[serde(rename = "prob")]
    pub probability: f64,
    pub before: u64,
    pub after: u64,
    pub draw: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunCounts {
    pub measurements: usize,
    pub divisions: usize,
}

/// Full trace of a factorization run: every measurement, the recovered
/// factorization, and the seed for bit-exact replay.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationRun {
    pub n: u64,
    pub variant: Variant,
    pub seed: u64,
    pub steps: Vec<MeasurementRecord>,
    pub result: Factorization,
    pub counts: RunCounts,
}

/// Run the factorization protocol on `n` with a dedicated seeded generator.
///
/// A fresh random manifold is prepared for every measurement, so branches
/// with zero amplitude in any particular preparation cannot stall the run.
pub fn factorize(
    n: u64,
    variant: Variant,
    table: &PrimeTable,
    seed: u64,
) -> Result<FactorizationRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut measured: Vec<(u64, u32)> = Vec::new();
    let mut divisions = 0usize;
    let mut current = n;
    // validate up front so the error points at the input, not an intermediate
    BranchState::manifold(n, table)?;

    while current > 1 {
        let state = BranchState::random(current, table, &mut rng)?;
        let m = state.measure_h1(&mut rng);
        let before = current;
        let applied = match variant {
            Variant::A => 1u32,
            Variant::B => {
                let mut a = 0;
                let mut rest = current;
                while rest.is_multiple_of(m.prime) {
                    rest /= m.prime;
                    a += 1;
                }
                a
            }
        };
        current /= m.prime.pow(applied);
        divisions += applied as usize;
        steps.push(MeasurementRecord {
            step: steps.len() + 1,
            prime: m.prime,
            probability: m.probability,
            before,
            after: current,
            draw: m.draw,
        });
        measured.push((m.prime, applied));
    }

    let measurements = steps.len();
    Ok(FactorizationRun {
        n,
        variant,
        seed,
        steps,
        result: Factorization::from_pairs(n, measured),
        counts: RunCounts {
            measurements,
            divisions,
        },
    })
}

/// Single-measurement primality test: `n` is declared prime exactly when
/// the measured log-prime observable returns `ln n` itself, i.e. the
/// manifold consists of the sole branch `(n, 1)`.
pub fn primality_test(n: u64, table: &PrimeTable, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = BranchState::random(n, table, &mut rng)?;
    let m = state.measure_h1(&mut rng);
    Ok(m.prime == n)
}

/// Node of the exhaustive variant-B outcome tree for some integer.
///
/// Each child edge is labelled with a measurable prime and the multiplicity
/// divided out; leaves (value 1) carry the complete factorization that the
/// path accumulated. Every root-to-leaf path is a realizable sequence of
/// measurement outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct PathNode {
    pub value: u64,
    pub children: Vec<PathEdge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Factorization>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathEdge {
    pub prime: u64,
    pub multiplicity: u32,
    pub child: PathNode,
}

impl PathNode {
    pub fn leaf_count(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(|e| e.child.leaf_count()).sum()
        }
    }

    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|e| 1 + e.child.depth())
            .max()
            .unwrap_or(0)
    }

    /// Results carried by every leaf below this node.
    pub fn leaf_results(&self) -> Vec<&Factorization> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Factorization>) {
        if self.children.is_empty() {
            if let Some(result) = &self.result {
                out.push(result);
            }
        }
        for edge in &self.children {
            edge.child.collect_leaves(out);
        }
    }

    /// Deduplicated `(from, to, prime, multiplicity)` edges: distinct paths
    /// that reach the same intermediate integer merge into one graph node,
    /// which is the natural picture of the branching measurement stages.
    pub fn dedup_edges(&self) -> Vec<(u64, u64, u64, u32)> {
        let mut edges = Vec::new();
        self.collect_edges(&mut edges);
        edges.sort();
        edges.dedup();
        edges
    }

    fn collect_edges(&self, out: &mut Vec<(u64, u64, u64, u32)>) {
        for edge in &self.children {
            out.push((self.value, edge.child.value, edge.prime, edge.multiplicity));
            edge.child.collect_edges(out);
        }
    }
}

/// Enumerate every variant-B measurement path for `n`.
pub fn enumerate_paths(n: u64, table: &PrimeTable) -> Result<PathNode> {
    BranchState::manifold(n, table)?;
    fn build(value: u64, n: u64, acc: &[(u64, u32)]) -> PathNode {
        if value == 1 {
            return PathNode {
                value,
                children: Vec::new(),
                result: Some(Factorization::from_pairs(n, acc.iter().copied())),
            };
        }
        let decomposition = factor_oracle(value).expect("value >= 2 on every internal node");
        let children = decomposition
            .pairs()
            .map(|(p, a)| {
                let mut next = acc.to_vec();
                next.push((p, a));
                PathEdge {
                    prime: p,
                    multiplicity: a,
                    child: build(value / p.pow(a), n, &next),
                }
            })
            .collect();
        PathNode {
            value,
            children,
            result: None,
        }
    }
    Ok(build(n, n, &[]))
}

/// Prepare `|ln N>` by repeated projective measurement of a state spread
/// over the integer window `[n - delta, n + delta]` with squared-weight
/// distribution `|gamma|^2`.
///
/// Returns the number of iterations until the window measurement returned
/// `n`, together with the manifold of `n` prepared from the same generator.
/// Expected iterations are `1 / |gamma_n|^2`.
pub fn prepare_from_window(
    n: u64,
    delta: u64,
    window_amplitudes: &[f64],
    table: &PrimeTable,
    seed: u64,
) -> Result<(u64, BranchState)> {
    let lo = n.saturating_sub(delta);
    if lo < 2 || n + delta > table.cutoff() {
        return Err(Error::OutOfRange {
            what: "window [N-delta, N+delta]",
            value: if lo < 2 { lo } else { n + delta },
            min: 2,
            max: table.cutoff(),
        });
    }
    let len = 2 * delta as usize + 1;
    if window_amplitudes.len() != len {
        return Err(Error::InvalidInput(format!(
            "window of half-width {delta} needs {len} weights, got {}",
            window_amplitudes.len()
        )));
    }
    let probs: Vec<f64> = window_amplitudes.iter().map(|g| g * g).collect();
    let norm_sq: f64 = probs.iter().sum();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm_sq, tol: 1e-9 });
    }
    if probs[delta as usize] == 0.0 {
        return Err(Error::UnreachableTarget);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut iterations = 0u64;
    loop {
        iterations += 1;
        let draw: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut idx = len - 1;
        for (i, &p) in probs.iter().enumerate() {
            cumulative += p;
            if draw < cumulative {
                idx = i;
                break;
            }
        }
        if lo + idx as u64 == n {
            break;
        }
    }
    let state = BranchState::random(n, table, &mut rng)?;
    Ok((iterations, state))
}
