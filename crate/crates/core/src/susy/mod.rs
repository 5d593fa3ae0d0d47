//! Analog realization: one-dimensional potentials with prescribed spectra.
//!
//! The inverse-spectral ladder starts from the flat potential and adds one
//! level per step through the superpotential recurrence (see [`riccati`]).
//! The raw ladder realizes its *lowest* M targets as bound states while the
//! highest coincides with the continuum edge of the final potential, so no
//! finite box recovers it accurately. The builder therefore appends
//! auxiliary confinement levels above the requested spectrum by default
//! (see [`RealizationOptions`]); every requested level then sits strictly
//! below the edge and the finite-difference eigensolver reproduces the
//! spectrum to the grid's accuracy. The declared target spectrum is always
//! the requested one; auxiliary levels are recorded separately.

mod eigen;
pub mod lloyd;
mod riccati;

use std::io::{BufRead, Write as IoWrite};

use serde::Serialize;

use crate::error::{Error, Result};

pub use lloyd::{
    equivalence_experiment, lloyd_system_at, LloydPoint, LloydReport, LloydSystem, LloydVariant,
};

/// Uniform symmetric grid on `[-L, L]` with a node at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    half_width: f64,
    step: f64,
    #[serde(skip)]
    half_nodes: usize,
}

impl Grid {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if half_width.is_nan() || half_width <= 0.0 || step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidInput(
                "grid extent and step must be positive".into(),
            ));
        }
        let ratio = half_width / step;
        let half_nodes = ratio.round();
        if (ratio - half_nodes).abs() > 1e-9 * ratio.max(1.0) || half_nodes < 1.0 {
            return Err(Error::InvalidInput(format!(
                "half-width {half_width} is not an integral multiple of step {step}"
            )));
        }
        Ok(Grid {
            half_width,
            step,
            half_nodes: half_nodes as usize,
        })
    }

    /// Grid with `2^exponent` nodes per side: `step = half_width / 2^exponent`.
    pub fn with_step_exponent(half_width: f64, exponent: u32) -> Result<Self> {
        if half_width.is_nan() || half_width <= 0.0 || exponent == 0 || exponent > 24 {
            return Err(Error::InvalidInput(format!(
                "bad grid request: half_width {half_width}, exponent {exponent}"
            )));
        }
        let half_nodes = 1usize << exponent;
        Ok(Grid {
            half_width,
            step: half_width / half_nodes as f64,
            half_nodes,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half_nodes(&self) -> usize {
        self.half_nodes
    }

    pub fn node_count(&self) -> usize {
        2 * self.half_nodes + 1
    }

    /// Coordinate of node `i`, with the origin at index `half_nodes`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.half_nodes as f64) * self.step
    }

    /// Same extent, half the step.
    pub fn refined(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            step: 0.5 * self.step,
            half_nodes: 2 * self.half_nodes,
        }
    }
}

/// How a requested spectrum is realized as bound states.
#[derive(Debug, Clone, Serialize)]
pub struct RealizationOptions {
    /// Auxiliary confinement levels appended above the requested spectrum.
    /// With zero the raw ladder is built and the highest requested level
    /// lands on the continuum edge.
    pub aux_levels: usize,
    /// Spacing of the auxiliary levels; `None` picks
    /// `max(1.0, top requested gap)`.
    pub aux_gap: Option<f64>,
    /// A superpotential exceeding this magnitude is considered divergent.
    pub blowup_threshold: f64,
    /// Minimum usable symmetric half-width; divergence inside it is an error.
    pub min_half_width: f64,
}

impl Default for RealizationOptions {
    fn default() -> Self {
        RealizationOptions {
            aux_levels: 1,
            aux_gap: None,
            blowup_threshold: 1e6,
            min_half_width: 1.0,
        }
    }
}

impl RealizationOptions {
    /// The bare ladder: no auxiliary confinement levels.
    pub fn raw() -> Self {
        RealizationOptions {
            aux_levels: 0,
            ..Default::default()
        }
    }
}

fn validated_ladder(targets: &[f64], opts: &RealizationOptions) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Err(Error::InvalidInput(
            "at least one target level is required".into(),
        ));
    }
    if !targets.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidInput("target levels must be finite".into()));
    }
    if !targets.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "target levels must be strictly increasing".into(),
        ));
    }
    let base = targets[0];
    let mut ladder: Vec<f64> = targets.iter().map(|t| t - base).collect();
    if opts.aux_levels > 0 {
        let top_gap = if ladder.len() >= 2 {
            ladder[ladder.len() - 1] - ladder[ladder.len() - 2]
        } else {
            1.0
        };
        let gap = opts.aux_gap.unwrap_or_else(|| top_gap.max(1.0));
        if !gap.is_finite() || gap <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "auxiliary gap must be positive, got {gap}"
            )));
        }
        for _ in 0..opts.aux_levels {
            ladder.push(ladder[ladder.len() - 1] + gap);
        }
    }
    Ok(ladder)
}

/// Grid suggestion for a target list: wide enough that the slowest
/// superpotential kink flattens out well inside the box, with the step
/// held near the reference resolution `12 / 2^9` however wide the box
/// grows.
pub fn suggested_grid(targets: &[f64], opts: &RealizationOptions) -> Result<Grid> {
    let ladder = validated_ladder(targets, opts)?;
    // slowest kink decays like exp(-2 sqrt(g_min) x); near-degenerate
    // levels demand room in proportion to the level density; and the top
    // level's classical turning point grows with the well depth
    let mut min_gap = f64::INFINITY;
    let mut density = 0.0;
    for w in ladder.windows(2) {
        let gap = w[1] - w[0];
        min_gap = min_gap.min(gap);
        density += 1.0 / gap.sqrt();
    }
    let depth = ladder[ladder.len() - 1] - ladder[0];
    let half_width = if min_gap.is_finite() {
        (8.0 / min_gap.sqrt())
            .max(0.3 * density)
            .max(4.0 * depth.sqrt())
            .ceil()
            .max(12.0)
    } else {
        12.0
    };
    let reference_step = 12.0 / (1 << 9) as f64;
    let exponent = ((half_width / reference_step).log2().ceil() as u32).clamp(9, 24);
    Grid::with_step_exponent(half_width, exponent)
}

/// Residual of the ladder equations measured with a five-point centered
/// derivative stencil along the integrated trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualStats {
    /// Maximum over the core region where every superpotential stays within
    /// magnitude 1 (where the stencil's truncation error is meaningful).
    pub max_in_core: f64,
    /// Maximum over the full interior of the valid sub-grid.
    pub max_overall: f64,
    /// Half-width of the core region.
    pub core_half_width: f64,
    /// Core maximum per ladder component.
    pub per_component: Vec<f64>,
}

/// Integrated superpotential ladder for a (possibly augmented) spectrum.
#[derive(Debug, Clone)]
pub struct SuperpotentialSet {
    grid: Grid,
    /// Requested levels, original scale.
    targets: Vec<f64>,
    /// Normalized (first level at 0) augmented levels actually realized.
    ladder: Vec<f64>,
    aux_levels: usize,
    /// Negative spacings `S_k = ladder[M-k] - ladder[M]`, `k = 1..=M`.
    spacings: Vec<f64>,
    /// `w[k][node]`; `NaN` outside the per-component valid extent.
    w: Vec<Vec<f64>>,
    valid_half_nodes: Vec<usize>,
}

impl SuperpotentialSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn ladder_targets(&self) -> &[f64] {
        &self.ladder
    }

    pub fn aux_levels(&self) -> usize {
        self.aux_levels
    }

    /// Number of superpotential components (ladder steps).
    pub fn ladder_size(&self) -> usize {
        self.spacings.len()
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    /// Gridded values of component `k` (0-based), full grid length.
    pub fn w_values(&self, k: usize) -> &[f64] {
        &self.w[k]
    }

    pub fn valid_half_nodes(&self, k: usize) -> usize {
        self.valid_half_nodes[k]
    }

    /// Symmetric extent on which every component is valid, in nodes.
    pub fn valid_half_nodes_common(&self) -> usize {
        self.valid_half_nodes
            .iter()
            .copied()
            .min()
            .unwrap_or(self.grid.half_nodes)
    }

    pub fn valid_half_width(&self) -> f64 {
        self.valid_half_nodes_common() as f64 * self.grid.step
    }

    /// Partner potential `V_j` at a node through the step recurrence.
    pub fn partner_potential_at(&self, j: usize, node: usize) -> f64 {
        let w: Vec<f64> = (0..j).map(|k| self.w[k][node]).collect();
        riccati::partner_potential(&w, &self.spacings, j)
    }

    /// Ladder-equation residual statistics (five-point centered stencil).
    pub fn riccati_residuals(&self) -> ResidualStats {
        let center = self.grid.half_nodes;
        let h = self.grid.step;
        let m = self.ladder_size();
        let mut per_component = vec![0.0f64; m];
        let mut max_overall: f64 = 0.0;
        let mut core_half_width: f64 = 0.0;

        for (k, wk) in self.w.iter().enumerate() {
            let valid = self.valid_half_nodes[k];
            if valid < 3 {
                continue;
            }
            for node in (center - valid + 2)..=(center + valid - 2) {
                let derivative = riccati::centered_derivative(wk, node, h);
                let v_prev = self.partner_potential_at(k, node);
                let residual =
                    (derivative - (self.spacings[k] + wk[node] * wk[node] - v_prev)).abs();
                max_overall = max_overall.max(residual);
                let in_core = (0..=k).all(|j| self.w[j][node].abs() <= 1.0);
                if in_core {
                    per_component[k] = per_component[k].max(residual);
                    if k == m - 1 {
                        core_half_width = core_half_width.max(self.grid.x(node).abs());
                    }
                }
            }
        }
        let max_in_core = per_component.iter().fold(0.0f64, |a, &b| a.max(b));
        ResidualStats {
            max_in_core,
            max_overall,
            core_half_width,
            per_component,
        }
    }
}

/// Integrate the superpotential ladder for `targets` on `grid`.
pub fn build_superpotentials(
    targets: &[f64],
    grid: Grid,
    opts: &RealizationOptions,
) -> Result<SuperpotentialSet> {
    let ladder = validated_ladder(targets, opts)?;
    let m = ladder.len() - 1;
    let top = ladder[m];
    let spacings: Vec<f64> = (1..=m).map(|k| ladder[m - k] - top).collect();

    let integrated =
        riccati::integrate(&spacings, grid.half_nodes, grid.step, opts.blowup_threshold);

    if let Some(k) = integrated
        .valid_half_nodes
        .iter()
        .position(|&v| (v as f64) * grid.step < opts.min_half_width)
    {
        return Err(Error::Blowup {
            k: k + 1,
            reached: integrated.valid_half_nodes[k] as f64 * grid.step,
            threshold: opts.blowup_threshold,
            min_half_width: opts.min_half_width,
        });
    }

    Ok(SuperpotentialSet {
        grid,
        targets: targets.to_vec(),
        ladder,
        aux_levels: opts.aux_levels,
        spacings,
        w: integrated.w,
        valid_half_nodes: integrated.valid_half_nodes,
    })
}

/// Gridded potential with a declared target spectrum and recorded offset.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    grid: Grid,
    v: Vec<f64>,
    targets: Vec<f64>,
    offset: f64,
    residual: Option<ResidualStats>,
}

/// Metadata sidecar describing a [`PotentialTable`].
#[derive(Debug, Clone, Serialize)]
pub struct PotentialMetadata<'a> {
    pub targets: &'a [f64],
    pub offset: f64,
    pub half_width: f64,
    pub step: f64,
    pub nodes: usize,
    pub residual: Option<&'a ResidualStats>,
}

impl PotentialTable {
    /// Wrap externally supplied potential values (custom wells, CSV loads).
    /// The declared target list may be empty when unknown.
    pub fn from_values(grid: Grid, v: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if v.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "{} potential values for a {}-node grid",
                v.len(),
                grid.node_count()
            )));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(
                "potential values must be finite".into(),
            ));
        }
        Ok(PotentialTable {
            grid,
            v,
            targets,
            offset: 0.0,
            residual: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Constant added so the ground state sits at the first declared target.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn residual(&self) -> Option<&ResidualStats> {
        self.residual.as_ref()
    }

    pub fn metadata(&self) -> PotentialMetadata<'_> {
        PotentialMetadata {
            targets: &self.targets,
            offset: self.offset,
            half_width: self.grid.half_width,
            step: self.grid.step,
            nodes: self.grid.node_count(),
            residual: self.residual.as_ref(),
        }
    }

    /// Two-column `x,V` CSV with `.` decimal separators.
    pub fn write_csv<W: IoWrite>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,V")?;
        for (i, v) in self.v.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.x(i), v)?;
        }
        Ok(())
    }

    /// Parse an `x,V` CSV produced by [`Self::write_csv`] (or equivalent).
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut xs: Vec<f64> = Vec::new();
        let mut vs: Vec<f64> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::MalformedTable(format!("read failure: {e}")))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut parts = trimmed.split(',');
            let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
                return Err(Error::MalformedTable(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            };
            match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if lineno == 0 => continue, // header
                _ => {
                    return Err(Error::MalformedTable(format!(
                        "line {}: non-numeric row",
                        lineno + 1
                    )));
                }
            }
        }
        if xs.len() < 5 {
            return Err(Error::MalformedTable(format!(
                "only {} usable rows",
                xs.len()
            )));
        }
        if xs.len().is_multiple_of(2) {
            return Err(Error::MalformedTable(
                "expected an odd number of nodes (symmetric grid)".into(),
            ));
        }
        let step = xs[1] - xs[0];
        if step.is_nan() || step <= 0.0 {
            return Err(Error::MalformedTable(
                "grid must be strictly increasing".into(),
            ));
        }
        for w in xs.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(Error::MalformedTable("grid spacing is not uniform".into()));
            }
        }
        let center = xs.len() / 2;
        if xs[center].abs() > 1e-9 * xs[xs.len() - 1].abs().max(1.0) {
            return Err(Error::MalformedTable(
                "grid is not centered on x = 0".into(),
            ));
        }
        let grid = Grid::new(xs[xs.len() - 1], step)?;
        PotentialTable::from_values(grid, vs, Vec::new())
    }
}

/// Assemble the final potential from an integrated ladder:
/// `V = 2 sum_k (-1)^{M-k} (S_k + W_k^2)` on the common valid sub-grid,
/// then a constant offset placing the eigensolver's ground state at the
/// first requested target (the offset is recorded).
pub fn assemble_potential(sps: &SuperpotentialSet) -> Result<PotentialTable> {
    let m = sps.ladder_size();
    let center = sps.grid.half_nodes;
    let valid = sps.valid_half_nodes_common();
    if valid < 2 {
        return Err(Error::Blowup {
            k: 1,
            reached: valid as f64 * sps.grid.step,
            threshold: f64::INFINITY,
            min_half_width: 2.0 * sps.grid.step,
        });
    }
    let sub_grid = Grid {
        half_width: valid as f64 * sps.grid.step,
        step: sps.grid.step,
        half_nodes: valid,
    };
    let mut v = vec![0.0f64; sub_grid.node_count()];
    for k in 0..m {
        // ladder index k+1 carries sign (-1)^(M-(k+1))
        let sign = if (m - (k + 1)).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let wk = &sps.w[k];
        for (i, value) in v.iter_mut().enumerate() {
            let node = center - valid + i;
            let w = wk[node];
            *value += 2.0 * sign * (sps.spacings[k] + w * w);
        }
    }

    let ground = eigen::dirichlet_spectrum(&v, sub_grid.step, 1)[0];
    let offset = sps.targets[0] - ground;
    for value in &mut v {
        *value += offset;
    }

    Ok(PotentialTable {
        grid: sub_grid,
        v,
        targets: sps.targets.clone(),
        offset,
        residual: Some(sps.riccati_residuals()),
    })
}

/// Lowest `n_levels` eigenvalues of the potential with Dirichlet walls at
/// the sub-grid edges. When the table declares a target spectrum, at most
/// that many levels may be requested.
pub fn eigen_solve(pt: &PotentialTable, n_levels: usize) -> Result<Vec<f64>> {
    let max_levels = if pt.targets.is_empty() {
        pt.grid.node_count() - 2
    } else {
        pt.targets.len()
    };
    if n_levels == 0 || n_levels > max_levels {
        return Err(Error::OutOfRange {
            what: "eigenvalue count",
            value: n_levels as u64,
            min: 1,
            max: max_levels as u64,
        });
    }
    Ok(eigen::dirichlet_spectrum(&pt.v, pt.grid.step, n_levels))
}

/// Spectrum computed at a grid and its half-step refinement.
#[derive(Debug, Clone, Serialize)]
pub struct RefinedSpectrum {
    /// Eigenvalues on the refined grid (the quoted result).
    pub eigenvalues: Vec<f64>,
    pub coarse: Vec<f64>,
    /// Largest eigenvalue movement caused by the refinement.
    pub max_change: f64,
}

/// Build, assemble, and eigensolve at `grid` and at its refinement. Errors
/// with [`Error::GridTooCoarse`] when refinement moves any eigenvalue by
/// more than `tol`.
pub fn eigen_solve_refined(
    targets: &[f64],
    grid: Grid,
    opts: &RealizationOptions,
    n_levels: usize,
    tol: f64,
) -> Result<RefinedSpectrum> {
    let coarse = eigen_solve(
        &assemble_potential(&build_superpotentials(targets, grid, opts)?)?,
        n_levels,
    )?;
    let fine = eigen_solve(
        &assemble_potential(&build_superpotentials(targets, grid.refined(), opts)?)?,
        n_levels,
    )?;
    let max_change = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (c - f).abs())
        .fold(0.0f64, f64::max);
    if max_change > tol {
        return Err(Error::GridTooCoarse { max_change, tol });
    }
    Ok(RefinedSpectrum {
        eigenvalues: fine,
        coarse,
        max_change,
    })
}
