//! Baseline parameter estimation from ordinal data: marginal thresholds,
//! pairwise polychoric correlations and DAG-conditional coefficients for a
//! known graph.
//!
//! Thresholds are estimated marginally first and held fixed while each
//! pairwise correlation is maximized (the usual two-step estimator); a
//! known DAG then turns the assembled correlation matrix into path
//! coefficients and noise variances by nodewise regression.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::model::LatentDagModel;
use crate::simulate::OrdinalDataset;
use crate::special::{bvn_cdf_raw, std_normal_quantile};

/// Record of the eigenvalue floor applied to a non-positive-definite
/// pairwise correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdRepair {
    /// Smallest eigenvalue before flooring at 1e-8.
    pub min_eigenvalue: f64,
}

/// Coefficients and noise variances induced by a DAG on a correlation
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DagFit {
    pub b_hat: BTreeMap<(usize, usize), f64>,
    pub v_hat: Vec<f64>,
    pub repair: Option<PsdRepair>,
}

/// Everything estimated from one dataset: per-node thresholds (sentinels
/// included), the pairwise latent correlation matrix and the
/// DAG-conditional fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedParams {
    pub thresholds: Vec<Vec<f64>>,
    pub corr: DMatrix<f64>,
    pub b_hat: BTreeMap<(usize, usize), f64>,
    pub v_hat: Vec<f64>,
    pub repair: Option<PsdRepair>,
}

/// Marginal threshold estimates `α̂(l) = Φ⁻¹(F̂(l-1))` from observed level
/// frequencies; sentinels appended.
///
/// An interior cumulative frequency of exactly 0 or 1 means some level was
/// never observed and the cut is not estimable.
pub fn estimate_thresholds(column: &[u32], levels: usize) -> Result<Vec<f64>> {
    if column.is_empty() {
        return Err(Error::Estimation("empty column".into()));
    }
    if levels < 2 {
        return Err(Error::Estimation("need at least two levels".into()));
    }
    let mut counts = vec![0usize; levels];
    for &cell in column {
        if cell as usize >= levels {
            return Err(Error::Data(format!(
                "observed level {cell} exceeds declared count {levels}"
            )));
        }
        counts[cell as usize] += 1;
    }
    // an unobserved level either drives a cumulative frequency to 0/1 or
    // collapses two adjacent cuts onto the same quantile
    if let Some(l) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Estimation(format!(
            "level {l} unobserved: its threshold cut is not estimable"
        )));
    }
    let n = column.len() as f64;
    let mut thresholds = Vec::with_capacity(levels + 1);
    thresholds.push(f64::NEG_INFINITY);
    let mut cum = 0usize;
    for l in 1..levels {
        cum += counts[l - 1];
        let f = cum as f64 / n;
        thresholds.push(std_normal_quantile(f)?);
    }
    thresholds.push(f64::INFINITY);
    Ok(thresholds)
}

/// Rectangle probability of a standard bivariate normal over the cell
/// `[a_lo, a_hi] x [b_lo, b_hi]`.
fn cell_prob(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64, rho: f64) -> f64 {
    (bvn_cdf_raw(a_hi, b_hi, rho) - bvn_cdf_raw(a_lo, b_hi, rho) - bvn_cdf_raw(a_hi, b_lo, rho)
        + bvn_cdf_raw(a_lo, b_lo, rho))
    .max(0.0)
}

/// Polychoric correlation of two ordinal columns with given (fixed)
/// thresholds, by bivariate-probit maximum likelihood.
///
/// The profile log-likelihood is maximized over `ρ ∈ (-1, 1)` by
/// golden-section search to an argument tolerance of 1e-6; cell
/// probabilities are floored at 1e-300 inside the log.
pub fn estimate_polychoric(
    col_a: &[u32],
    col_b: &[u32],
    alpha_a: &[f64],
    alpha_b: &[f64],
) -> Result<f64> {
    if col_a.len() != col_b.len() || col_a.is_empty() {
        return Err(Error::Estimation(
            "columns must be non-empty and of equal length".into(),
        ));
    }
    for alpha in [alpha_a, alpha_b] {
        if alpha.len() < 3
            || alpha[0] != f64::NEG_INFINITY
            || *alpha.last().unwrap() != f64::INFINITY
            || alpha
                .windows(2)
                .any(|w| w[0] >= w[1] || w[0].is_nan() || w[1].is_nan())
        {
            return Err(Error::Estimation(
                "thresholds must be strictly increasing with ±∞ sentinels".into(),
            ));
        }
    }
    let la = alpha_a.len() - 1;
    let lb = alpha_b.len() - 1;
    let mut table = vec![0u64; la * lb];
    for (&a, &b) in col_a.iter().zip(col_b) {
        let (a, b) = (a as usize, b as usize);
        if a >= la || b >= lb {
            return Err(Error::Data("observed level outside threshold range".into()));
        }
        table[a * lb + b] += 1;
    }
    if table.iter().filter(|&&c| c > 0).count() <= 1 {
        return Err(Error::NonIdentifiable(
            "all observations fall in a single cell".into(),
        ));
    }
    let loglik = |rho: f64| -> f64 {
        let mut ll = 0.0;
        for a in 0..la {
            for b in 0..lb {
                let count = table[a * lb + b];
                if count == 0 {
                    continue;
                }
                let p = cell_prob(alpha_a[a], alpha_a[a + 1], alpha_b[b], alpha_b[b + 1], rho)
                    .max(1e-300);
                ll += count as f64 * libm::log(p);
            }
        }
        ll
    };
    Ok(golden_section_max(&loglik, -1.0 + 1e-9, 1.0 - 1e-9, 1e-6))
}

/// Golden-section maximization of a unimodal function on `[lo, hi]` to an
/// argument tolerance `tol`.
fn golden_section_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.6180339887498949;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Nodewise regression of a correlation matrix on a known DAG:
/// `b̂_m = R_PP⁻¹ R_Pm` and `v̂_m = 1 - R_mP R_PP⁻¹ R_Pm` per node, roots
/// getting unit variance.
///
/// A non-positive-definite input (pairwise estimates need not cohere) is
/// first repaired by flooring its eigenvalues at 1e-8, re-symmetrizing and
/// rescaling to unit diagonal; the repair is reported.
pub fn fit_given_dag(dag: &Dag, corr: &DMatrix<f64>) -> Result<DagFit> {
    let n = dag.node_count();
    if corr.nrows() != n || corr.ncols() != n {
        return Err(Error::Estimation(format!(
            "correlation matrix is {}x{} for {n} nodes",
            corr.nrows(),
            corr.ncols()
        )));
    }
    let symmetric = 0.5 * (corr + corr.transpose());
    let eigen = SymmetricEigen::new(symmetric.clone());
    let min_eig = eigen.eigenvalues.min();
    let (work, repair) = if min_eig < 1e-8 {
        let floored = DMatrix::from_diagonal(&eigen.eigenvalues.map(|e| e.max(1e-8)));
        let rebuilt = &eigen.eigenvectors * floored * eigen.eigenvectors.transpose();
        let rebuilt = 0.5 * (&rebuilt + rebuilt.transpose());
        let scale: Vec<f64> = (0..n).map(|m| libm::sqrt(rebuilt[(m, m)])).collect();
        let rescaled = DMatrix::from_fn(n, n, |r, c| rebuilt[(r, c)] / (scale[r] * scale[c]));
        (
            rescaled,
            Some(PsdRepair {
                min_eigenvalue: min_eig,
            }),
        )
    } else {
        (symmetric, None)
    };
    let mut b_hat = BTreeMap::new();
    let mut v_hat = vec![1.0; n];
    for m in 1..=n {
        let parents = dag.parents(m)?.to_vec();
        if parents.is_empty() {
            continue;
        }
        let p = parents.len();
        let r_pp = DMatrix::from_fn(p, p, |r, c| work[(parents[r] - 1, parents[c] - 1)]);
        let r_pm = DMatrix::from_fn(p, 1, |r, _| work[(parents[r] - 1, m - 1)]);
        let chol = r_pp.cholesky().ok_or_else(|| {
            Error::LinAlg(format!(
                "parent correlation submatrix of node {m} is singular"
            ))
        })?;
        let beta = chol.solve(&r_pm);
        let mut residual = work[(m - 1, m - 1)];
        for (idx, &h) in parents.iter().enumerate() {
            b_hat.insert((h, m), beta[(idx, 0)]);
            residual -= beta[(idx, 0)] * r_pm[(idx, 0)];
        }
        if residual.is_nan() || residual <= 0.0 {
            return Err(Error::Estimation(format!(
                "non-positive residual variance {residual} at node {m}"
            )));
        }
        v_hat[m - 1] = residual;
    }
    Ok(DagFit {
        b_hat,
        v_hat,
        repair,
    })
}

/// Full two-step fit of a dataset against a known DAG; the returned model
/// is standardized (zero means, unit marginal latent variances).
pub fn fit_model(data: &OrdinalDataset, dag: &Dag) -> Result<(LatentDagModel, FittedParams)> {
    let n = dag.node_count();
    if data.cols() != n {
        return Err(Error::Data(format!(
            "dataset has {} columns for {n} nodes",
            data.cols()
        )));
    }
    let mut thresholds = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    for m in 1..=n {
        let col = data.column(m);
        thresholds.push(estimate_thresholds(&col, data.level_counts()[m - 1])?);
        columns.push(col);
    }
    let mut corr = DMatrix::identity(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let rho =
                estimate_polychoric(&columns[a], &columns[b], &thresholds[a], &thresholds[b])?;
            corr[(a, b)] = rho;
            corr[(b, a)] = rho;
        }
    }
    let fit = fit_given_dag(dag, &corr)?;
    let interiors = thresholds
        .iter()
        .map(|t| t[1..t.len() - 1].to_vec())
        .collect();
    let model = LatentDagModel::new(
        dag.clone(),
        vec![0.0; n],
        fit.b_hat.clone(),
        fit.v_hat.clone(),
        interiors,
    )?;
    Ok((
        model,
        FittedParams {
            thresholds,
            corr,
            b_hat: fit.b_hat,
            v_hat: fit.v_hat,
            repair: fit.repair,
        },
    ))
}
