//! Diagonal multi-spin operator synthesis.
//!
//! Over `d` qubits, every diagonal operator is a combination of products of
//! number operators `N_i = (1 + Z_i)/2`, one coefficient `j_S` per subset
//! `S` of qubit indices. Its eigenvalue on basis state `b` is the subset
//! sum `e(b) = sum_{S subset of b} j_S` (a zeta transform), so prescribing
//! the `2^d` eigenvalues determines the `2^d` couplings uniquely through
//! the inverse Moebius transform. No dense matrix is ever materialized:
//! the transforms run in place in `O(d 2^d)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported qubit count for eigenvalue arrays (`2^24` entries).
pub const MAX_QUBITS: u32 = 24;

/// Eigenvalue array of the binary-counter operator: basis state `b` carries
/// eigenvalue `b + 2`, giving consecutive integers `2 ..= 2^d + 1`.
pub fn build_o2_diagonal(d: u32) -> Result<Vec<u64>> {
    if d == 0 || d > MAX_QUBITS {
        return Err(Error::OutOfRange {
            what: "qubit count d",
            value: d as u64,
            min: 1,
            max: MAX_QUBITS as u64,
        });
    }
    Ok((0..1u64 << d).map(|b| b + 2).collect())
}

/// In-place subset-sum (zeta) transform: `out[b] = sum_{s subset of b} in[s]`.
///
/// `values.len()` must be a power of two.
pub fn zeta_transform(values: &mut [f64]) {
    assert!(
        values.len().is_power_of_two(),
        "length must be a power of two"
    );
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for mask in 0..n {
            if mask & bit != 0 {
                values[mask] += values[mask ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// In-place Moebius transform, the inverse of [`zeta_transform`]:
/// `out[s] = sum_{t subset of s} (-1)^{|s \ t|} in[t]`.
pub fn mobius_transform(values: &mut [f64]) {
    assert!(
        values.len().is_power_of_two(),
        "length must be a power of two"
    );
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for mask in 0..n {
            if mask & bit != 0 {
                values[mask] -= values[mask ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// Within-popcount ordering used by [`Assignment::canonical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetOrder {
    /// Subsets sorted by their index tuples, e.g. {1,2} < {1,3} < {2,3}.
    Lexicographic,
    /// The ordering used by the published three-qubit coupling table:
    /// {1,2}, {2,3}, {1,3}. Only defined for `d <= 3`; larger tables do not
    /// pin the ordering down.
    Paper,
}

impl std::str::FromStr for SubsetOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "canonical" | "lexicographic" => Ok(SubsetOrder::Lexicographic),
            "paper" => Ok(SubsetOrder::Paper),
            other => Err(format!(
                "unknown assignment {other:?} (expected canonical or paper)"
            )),
        }
    }
}

/// Bijection from basis-state bitmask to target index: which target
/// eigenvalue sits on which basis state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    d: u32,
    order: SubsetOrder,
    /// `perm[basis_state] = target_index`
    perm: Vec<usize>,
}

impl Assignment {
    /// Assign targets in increasing order to basis states sorted by
    /// popcount, breaking ties by `order`.
    pub fn canonical(d: u32, order: SubsetOrder) -> Result<Self> {
        if d == 0 || d > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "qubit count d",
                value: d as u64,
                min: 1,
                max: MAX_QUBITS as u64,
            });
        }
        if order == SubsetOrder::Paper && d > 3 {
            return Err(Error::InvalidInput(
                "subset order 'paper' is only defined for d <= 3".into(),
            ));
        }
        let size = 1usize << d;
        let sequence: Vec<usize> = match order {
            SubsetOrder::Paper if d == 3 => {
                vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b110, 0b101, 0b111]
            }
            _ => {
                let mut states: Vec<usize> = (0..size).collect();
                states.sort_by_key(|&b| (b.count_ones(), bit_tuple(b)));
                states
            }
        };
        let mut perm = vec![0usize; size];
        for (target_index, &basis) in sequence.iter().enumerate() {
            perm[basis] = target_index;
        }
        Ok(Assignment { d, order, perm })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn order(&self) -> SubsetOrder {
        self.order
    }

    /// Target index assigned to basis state `basis`.
    pub fn target_index(&self, basis: usize) -> usize {
        self.perm[basis]
    }
}

/// Set-bit index tuple of a mask, for lexicographic subset comparison.
/// {1,2} -> [1,2] sorts before {1,4} -> [1,4] sorts before {2,3} -> [2,3].
fn bit_tuple(mask: usize) -> Vec<u32> {
    (0..usize::BITS)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

/// What the couplings were solved for; purely descriptive metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Primes,
    LogPrimes,
    Custom,
}

/// The `2^d` multi-spin coefficients of a diagonal operator, indexed by
/// subset bitmask (qubit `i` at bit `i - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    d: u32,
    target: TargetKind,
    assignment: Assignment,
    j: Vec<f64>,
}

impl CouplingSet {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn target(&self) -> TargetKind {
        self.target
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Coefficient of the subset with bitmask `mask`.
    pub fn coupling(&self, mask: usize) -> f64 {
        self.j[mask]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    /// Eigenvalue array recovered through the zeta transform.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e = self.j.clone();
        zeta_transform(&mut e);
        e
    }
}

impl Serialize for CouplingSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            mask: String,
            indices: Vec<u32>,
            j: f64,
        }
        let entries: Vec<Entry> = self
            .j
            .iter()
            .enumerate()
            .map(|(mask, &j)| Entry {
                mask: format!("{mask:0width$b}", width = self.d as usize),
                indices: bit_tuple(mask),
                j,
            })
            .collect();
        let mut s = serializer.serialize_struct("CouplingSet", 4)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("target", &self.target)?;
        s.serialize_field("assignment", &self.assignment)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

/// Solve for the couplings that realize `targets` under `assignment`.
///
/// The subset linear system is unitriangular in subset order, so the
/// Moebius transform inverts it exactly in `O(d 2^d)`.
pub fn solve_couplings(
    d: u32,
    targets: &[f64],
    assignment: &Assignment,
    kind: TargetKind,
) -> Result<CouplingSet> {
    if d == 0 || d > MAX_QUBITS {
        return Err(Error::OutOfRange {
            what: "qubit count d",
            value: d as u64,
            min: 1,
            max: MAX_QUBITS as u64,
        });
    }
    if assignment.d() != d {
        return Err(Error::InvalidInput(format!(
            "assignment is for d = {}, not d = {d}",
            assignment.d()
        )));
    }
    let size = 1usize << d;
    if targets.len() != size {
        return Err(Error::InvalidInput(format!(
            "need {size} targets for d = {d}, got {}",
            targets.len()
        )));
    }
    let mut j: Vec<f64> = (0..size)
        .map(|b| targets[assignment.target_index(b)])
        .collect();
    mobius_transform(&mut j);
    Ok(CouplingSet {
        d,
        target: kind,
        assignment: assignment.clone(),
        j,
    })
}

/// Eigenvalue array of a coupling set (free function form of
/// [`CouplingSet::eigenvalues`]).
pub fn eigenvalues_from_couplings(cs: &CouplingSet) -> Vec<f64> {
    cs.eigenvalues()
}

/// Independent dense route: build the full `2^d x 2^d` subset-incidence
/// matrix and solve it by Gaussian elimination with partial pivoting.
/// Intended as a cross-check of the transform path for small `d`.
pub fn solve_couplings_dense(d: u32, targets: &[f64], assignment: &Assignment) -> Result<Vec<f64>> {
    if d == 0 || d > 10 {
        return Err(Error::OutOfRange {
            what: "qubit count d (dense route)",
            value: d as u64,
            min: 1,
            max: 10,
        });
    }
    if assignment.d() != d {
        return Err(Error::InvalidInput(format!(
            "assignment is for d = {}, not d = {d}",
            assignment.d()
        )));
    }
    let size = 1usize << d;
    if targets.len() != size {
        return Err(Error::InvalidInput(format!(
            "need {size} targets for d = {d}, got {}",
            targets.len()
        )));
    }
    // rows: one equation e(b) = sum_{s subset b} j_s per basis state
    let mut a = vec![vec![0.0f64; size]; size];
    let mut rhs = vec![0.0f64; size];
    for b in 0..size {
        rhs[b] = targets[assignment.target_index(b)];
        for (s, row) in a[b].iter_mut().enumerate() {
            if s & b == s {
                *row = 1.0;
            }
        }
    }
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return Err(Error::InvalidInput("singular subset system".into()));
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = a[col].clone();
        let pivot_rhs = rhs[col];
        for (row, a_row) in a.iter_mut().enumerate() {
            if row != col && a_row[col] != 0.0 {
                let factor = a_row[col] / pivot_row[col];
                for (dst, &src) in a_row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= factor * src;
                }
                rhs[row] -= factor * pivot_rhs;
            }
        }
    }
    Ok((0..size).map(|i| rhs[i] / a[i][i]).collect())
}
