//! Synthetic-model and synthetic-data generation: random DAGs, random
//! weights, Dirichlet thresholds, latent sampling, discretisation and
//! bootstrap resampling.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::model::LatentDagModel;
use crate::rng::{gamma, standard_normal, StreamRng};
use crate::special::std_normal_quantile;

/// An N x n table of 0-based integer levels with per-column level counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalDataset {
    rows: usize,
    cols: usize,
    cells: Vec<u32>, // row-major
    level_counts: Vec<usize>,
}

impl OrdinalDataset {
    pub fn new(rows: Vec<Vec<u32>>, level_counts: Vec<usize>) -> Result<Self> {
        let n = level_counts.len();
        if n == 0 || rows.is_empty() {
            return Err(Error::Data(
                "dataset needs at least one row and column".into(),
            ));
        }
        if level_counts.iter().any(|&l| l < 2) {
            return Err(Error::Data("every column needs at least two levels".into()));
        }
        let mut cells = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!(
                    "row {r} has {} cells, expected {n}",
                    row.len()
                )));
            }
            for (m, &cell) in row.iter().enumerate() {
                if cell as usize >= level_counts[m] {
                    return Err(Error::Data(format!(
                        "cell ({r}, {}) = {cell} exceeds level count {}",
                        m + 1,
                        level_counts[m]
                    )));
                }
            }
            cells.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols: n,
            cells,
            level_counts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn level_counts(&self) -> &[usize] {
        &self.level_counts
    }

    /// Level of row `r` (0-based) in column `m` (1-based).
    pub fn level(&self, r: usize, m: usize) -> u32 {
        self.cells[r * self.cols + m - 1]
    }

    /// Column `m` (1-based) as a vector.
    pub fn column(&self, m: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.level(r, m)).collect()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }
}

/// Parameters of the synthetic-model generator; defaults reproduce the
/// usual benchmark configuration (16 nodes, 5 expected neighbours, weights
/// of magnitude 0.4..1, 2..6 levels, Dirichlet concentration 2).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub nodes: usize,
    pub expected_neighbors: f64,
    pub weight_low: f64,
    pub weight_high: f64,
    pub level_min: usize,
    pub level_max: usize,
    pub nu: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            nodes: 16,
            expected_neighbors: 5.0,
            weight_low: 0.4,
            weight_high: 1.0,
            level_min: 2,
            level_max: 6,
            nu: 2.0,
        }
    }
}

/// Erdős–Rényi DAG: a uniformly random permutation fixes the topological
/// order, then each of the `n(n-1)/2` order-respecting edges is kept
/// independently with probability `expected_neighbors / (n-1)`.
///
/// `expected_neighbors` is the expected total (in plus out) degree.
pub fn random_dag(n: usize, expected_neighbors: f64, rng: &mut StreamRng) -> Result<Dag> {
    if n < 2 {
        return Err(Error::InvalidParam("random_dag needs n >= 2".into()));
    }
    if !(expected_neighbors > 0.0 && expected_neighbors <= (n - 1) as f64) {
        return Err(Error::InvalidParam(format!(
            "expected_neighbors must lie in (0, {}], got {expected_neighbors}",
            n - 1
        )));
    }
    let p = expected_neighbors / (n - 1) as f64;
    // Fisher-Yates for the topological order
    let mut perm: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut edges = Vec::new();
    for lo in 0..n {
        for hi in (lo + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((perm[lo], perm[hi]));
            }
        }
    }
    Dag::new(n, edges)
}

/// One weight per edge, drawn uniformly from `(-high, -low) ∪ (low, high)`
/// with equal sign probability.
pub fn random_weights(
    dag: &Dag,
    low: f64,
    high: f64,
    rng: &mut StreamRng,
) -> Result<Vec<((usize, usize), f64)>> {
    if !(low > 0.0 && low < high && high.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "weight magnitudes need 0 < low < high, got ({low}, {high})"
        )));
    }
    Ok(dag
        .edges()
        .map(|e| {
            let magnitude = low + rng.random::<f64>() * (high - low);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (e, sign * magnitude)
        })
        .collect())
}

/// Thresholds from symmetric Dirichlet cell probabilities: draw
/// `p ~ Dir(levels, nu)` and cut the standard normal at the cumulative
/// probabilities. Returns the full vector with `±∞` sentinels.
///
/// Draws whose cumulative probabilities graze 0 or 1 (within 1e-12) are
/// redrawn; after 64 failed attempts an error is returned.
pub fn random_thresholds(levels: usize, nu: f64, rng: &mut StreamRng) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::InvalidParam("need at least two levels".into()));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "Dirichlet concentration must be positive, got {nu}"
        )));
    }
    for _ in 0..64 {
        let draws: Vec<f64> = (0..levels).map(|_| gamma(nu, rng)).collect();
        let total: f64 = draws.iter().sum();
        let probs: Vec<f64> = draws.iter().map(|g| g / total).collect();
        if let Ok(thresholds) = thresholds_from_probs(&probs) {
            return Ok(thresholds);
        }
    }
    Err(Error::Numeric(format!(
        "no valid Dirichlet({levels}, {nu}) threshold draw in 64 attempts"
    )))
}

/// Cut points for given cell probabilities: `α_l = Φ⁻¹(Σ_{j<=l} p_j)`,
/// sentinels appended.
pub fn thresholds_from_probs(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() < 2 {
        return Err(Error::InvalidParam(
            "need at least two cell probabilities".into(),
        ));
    }
    let mut thresholds = Vec::with_capacity(probs.len() + 1);
    thresholds.push(f64::NEG_INFINITY);
    let mut cum = 0.0;
    for &p in &probs[..probs.len() - 1] {
        cum += p;
        if !(1e-12..=1.0 - 1e-12).contains(&cum) {
            return Err(Error::Numeric(format!(
                "cumulative cell probability {cum} too close to 0 or 1"
            )));
        }
        let alpha = std_normal_quantile(cum)?;
        if let Some(&last) = thresholds.last() {
            if last >= alpha {
                return Err(Error::Numeric(
                    "cell probabilities produce non-increasing thresholds".into(),
                ));
            }
        }
        thresholds.push(alpha);
    }
    thresholds.push(f64::INFINITY);
    Ok(thresholds)
}

/// A full random model: random DAG and weights, standardized to unit
/// marginal latent variances, then random level counts and thresholds.
pub fn random_model(cfg: &SynthConfig, rng: &mut StreamRng) -> Result<LatentDagModel> {
    if cfg.level_min < 2 || cfg.level_max < cfg.level_min {
        return Err(Error::InvalidParam(format!(
            "level range ({}, {}) invalid",
            cfg.level_min, cfg.level_max
        )));
    }
    let dag = random_dag(cfg.nodes, cfg.expected_neighbors, rng)?;
    let weights = random_weights(&dag, cfg.weight_low, cfg.weight_high, rng)?;
    // placeholder cuts; the real ones are drawn on the standardized scale
    let base = LatentDagModel::new(
        dag,
        vec![0.0; cfg.nodes],
        weights,
        vec![1.0; cfg.nodes],
        vec![vec![0.0]; cfg.nodes],
    )?;
    let std = base.standardize()?;
    let mut interiors = Vec::with_capacity(cfg.nodes);
    for _ in 0..cfg.nodes {
        let levels = rng.random_range(cfg.level_min..=cfg.level_max);
        let full = random_thresholds(levels, cfg.nu, rng)?;
        interiors.push(full[1..full.len() - 1].to_vec());
    }
    LatentDagModel::new(
        std.dag().clone(),
        std.means().to_vec(),
        std.coeffs().collect::<Vec<_>>(),
        std.noise_vars().to_vec(),
        interiors,
    )
}

/// Ancestral sampling of the latent Gaussian vector, one row at a time in
/// topological order.
pub fn sample_latent(model: &LatentDagModel, n_rows: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    let n = model.node_count();
    let order = model.dag().topological_order().to_vec();
    let sd: Vec<f64> = model.noise_vars().iter().map(|&v| libm::sqrt(v)).collect();
    let mut out = DMatrix::zeros(n_rows, n);
    for r in 0..n_rows {
        for &m in &order {
            let mut val = model.mean(m) + sd[m - 1] * standard_normal(rng);
            for &h in model.dag().parents(m).expect("validated node") {
                let beta = model.coeff(h, m).expect("edge coefficient");
                val += beta * (out[(r, h - 1)] - model.mean(h));
            }
            out[(r, m - 1)] = val;
        }
    }
    out
}

/// Empirical (data-level) standardization: center each column at its mean
/// and scale it to unit sample variance. The analytic alternative is
/// [`LatentDagModel::standardize`]; this variant matches pipelines that
/// normalize the simulated sample itself.
pub fn standardize_latent(latent: &mut DMatrix<f64>) -> Result<()> {
    let rows = latent.nrows();
    if rows < 2 {
        return Err(Error::Data("need at least two rows to standardize".into()));
    }
    for c in 0..latent.ncols() {
        let mut col = latent.column_mut(c);
        let mean = col.iter().sum::<f64>() / rows as f64;
        let var = col.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (rows - 1) as f64;
        if var <= 0.0 {
            return Err(Error::Data(format!("column {} is constant", c + 1)));
        }
        let sd = libm::sqrt(var);
        for y in col.iter_mut() {
            *y = (*y - mean) / sd;
        }
    }
    Ok(())
}

/// Level of a latent value under a sentinel-included threshold vector:
/// the number of interior cut points at or below it (boundary values join
/// the upper interval).
pub(crate) fn level_of(thresholds: &[f64], y: f64) -> u32 {
    let interior = &thresholds[1..thresholds.len() - 1];
    interior.partition_point(|&t| t <= y) as u32
}

/// Discretise a latent sample column by column through the model's
/// thresholds.
pub fn discretise(latent: &DMatrix<f64>, model: &LatentDagModel) -> Result<OrdinalDataset> {
    let n = model.node_count();
    if latent.ncols() != n {
        return Err(Error::Data(format!(
            "latent matrix has {} columns for {} nodes",
            latent.ncols(),
            n
        )));
    }
    if latent.nrows() == 0 {
        return Err(Error::Data("latent matrix has no rows".into()));
    }
    let mut rows = Vec::with_capacity(latent.nrows());
    for r in 0..latent.nrows() {
        let mut row = Vec::with_capacity(n);
        for m in 1..=n {
            let y = latent[(r, m - 1)];
            if !y.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite latent value at ({r}, {m})"
                )));
            }
            row.push(level_of(model.thresholds(m), y));
        }
        rows.push(row);
    }
    OrdinalDataset::new(rows, (1..=n).map(|m| model.levels(m)).collect())
}

/// N rows drawn uniformly with replacement; level counts carry over.
pub fn bootstrap_resample(data: &OrdinalDataset, rng: &mut StreamRng) -> OrdinalDataset {
    let n_rows = data.rows();
    let mut cells = Vec::with_capacity(n_rows * data.cols());
    for _ in 0..n_rows {
        let r = rng.random_range(0..n_rows);
        cells.extend_from_slice(data.row(r));
    }
    OrdinalDataset {
        rows: n_rows,
        cols: data.cols(),
        cells,
        level_counts: data.level_counts().to_vec(),
    }
}
