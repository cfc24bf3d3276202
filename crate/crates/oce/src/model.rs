//! The latent Gaussian DAG model: parameters, implied covariance, total
//! causal effects and standardization.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Dag;

/// A latent Gaussian DAG model over ordinal variables.
///
/// Each node `m` carries a latent mean `mu_m`, a noise variance `v_m`, one
/// path coefficient per incoming edge, and a strictly increasing threshold
/// vector that discretises the latent variable into `L_m >= 2` ordered
/// levels. Thresholds are stored with their `±∞` sentinels, so
/// `thresholds(m)` has length `L_m + 1` and `threshold(m, 0) = -∞`,
/// `threshold(m, L_m) = +∞`.
///
/// Coefficients are kept as a sparse `(parent, child) -> β` map. In dense
/// form the convention is `B[child][parent] = β`, which makes
/// `Σ = (I - B)⁻¹ V (I - B)⁻ᵀ` and `W = (I - B)⁻¹` hold as written.
///
/// Values are immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDagModel {
    dag: Dag,
    mu: Vec<f64>,
    coeffs: BTreeMap<(usize, usize), f64>,
    noise: Vec<f64>,
    thresholds: Vec<Vec<f64>>,
    tau: Vec<Vec<i64>>,
}

impl LatentDagModel {
    /// Build and validate a model.
    ///
    /// `interior_thresholds[m]` lists the `L_m - 1` finite cut points of
    /// node `m + 1`; sentinels are added here. Level labels default to
    /// `0..L_m - 1`.
    pub fn new(
        dag: Dag,
        mu: Vec<f64>,
        coeffs: impl IntoIterator<Item = ((usize, usize), f64)>,
        noise: Vec<f64>,
        interior_thresholds: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = dag.node_count();
        if mu.len() != n {
            return Err(Error::InvalidModel(format!(
                "mu has {} entries for {} nodes",
                mu.len(),
                n
            )));
        }
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("mu must be finite".into()));
        }
        if noise.len() != n {
            return Err(Error::InvalidModel(format!(
                "v has {} entries for {} nodes",
                noise.len(),
                n
            )));
        }
        if noise.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidModel(
                "noise variances must be finite and strictly positive".into(),
            ));
        }
        let coeffs: BTreeMap<(usize, usize), f64> = coeffs.into_iter().collect();
        for (&(h, j), b) in &coeffs {
            if !dag.has_edge(h, j) {
                return Err(Error::InvalidModel(format!(
                    "coefficient on missing edge {h} -> {j}"
                )));
            }
            if !b.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coefficient on {h} -> {j} is not finite"
                )));
            }
        }
        if coeffs.len() != dag.edge_count() {
            return Err(Error::InvalidModel(format!(
                "{} coefficients for {} edges",
                coeffs.len(),
                dag.edge_count()
            )));
        }
        if interior_thresholds.len() != n {
            return Err(Error::InvalidModel(format!(
                "thresholds given for {} of {} nodes",
                interior_thresholds.len(),
                n
            )));
        }
        let mut thresholds = Vec::with_capacity(n);
        let mut tau = Vec::with_capacity(n);
        for (m, cuts) in interior_thresholds.into_iter().enumerate() {
            if cuts.is_empty() {
                return Err(Error::InvalidModel(format!(
                    "node {} needs at least one threshold (two levels)",
                    m + 1
                )));
            }
            if cuts.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "node {} has a non-finite interior threshold",
                    m + 1
                )));
            }
            if cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidModel(format!(
                    "thresholds of node {} are not strictly increasing",
                    m + 1
                )));
            }
            let levels = cuts.len() + 1;
            let mut full = Vec::with_capacity(levels + 1);
            full.push(f64::NEG_INFINITY);
            full.extend(cuts);
            full.push(f64::INFINITY);
            thresholds.push(full);
            tau.push((0..levels as i64).collect());
        }
        Ok(Self {
            dag,
            mu,
            coeffs,
            noise,
            thresholds,
            tau,
        })
    }

    /// Replace the default `0..L-1` level labels.
    pub fn with_level_labels(mut self, tau: Vec<Vec<i64>>) -> Result<Self> {
        if tau.len() != self.node_count() {
            return Err(Error::InvalidModel("one label vector per node".into()));
        }
        for (m, labels) in tau.iter().enumerate() {
            if labels.len() != self.levels(m + 1) {
                return Err(Error::InvalidModel(format!(
                    "node {} has {} levels but {} labels",
                    m + 1,
                    self.levels(m + 1),
                    labels.len()
                )));
            }
            if labels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidModel(format!(
                    "labels of node {} are not strictly increasing",
                    m + 1
                )));
            }
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn node_count(&self) -> usize {
        self.dag.node_count()
    }

    pub fn mean(&self, m: usize) -> f64 {
        self.mu[m - 1]
    }

    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    pub fn noise_var(&self, m: usize) -> f64 {
        self.noise[m - 1]
    }

    pub fn noise_vars(&self) -> &[f64] {
        &self.noise
    }

    pub fn coeff(&self, h: usize, j: usize) -> Option<f64> {
        self.coeffs.get(&(h, j)).copied()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coeffs.iter().map(|(&e, &b)| (e, b))
    }

    /// Number of ordinal levels of node `m`.
    pub fn levels(&self, m: usize) -> usize {
        self.thresholds[m - 1].len() - 1
    }

    /// Thresholds of node `m` including the `±∞` sentinels.
    pub fn thresholds(&self, m: usize) -> &[f64] {
        &self.thresholds[m - 1]
    }

    pub fn interior_thresholds(&self, m: usize) -> &[f64] {
        let t = &self.thresholds[m - 1];
        &t[1..t.len() - 1]
    }

    /// `α(m, l)` for `l` in `0..=L_m`, sentinels included.
    pub fn threshold(&self, m: usize, l: usize) -> f64 {
        self.thresholds[m - 1][l]
    }

    /// The latent band `[α(m, l-1), α(m, l))` of level `l` in `1..=L_m`.
    pub fn level_band(&self, m: usize, l: usize) -> Result<(f64, f64)> {
        self.check_node(m)?;
        if l == 0 || l > self.levels(m) {
            return Err(Error::Query(format!(
                "level {l} out of range 1..={} for node {m}",
                self.levels(m)
            )));
        }
        Ok((self.threshold(m, l - 1), self.threshold(m, l)))
    }

    pub fn level_labels(&self, m: usize) -> &[i64] {
        &self.tau[m - 1]
    }

    pub(crate) fn check_node(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: m,
                n: self.node_count(),
            });
        }
        Ok(())
    }

    /// Dense coefficient matrix with `B[(j-1, h-1)] = β_hj`.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut b = DMatrix::zeros(n, n);
        for (&(h, j), &beta) in &self.coeffs {
            b[(j - 1, h - 1)] = beta;
        }
        b
    }

    /// Implied covariance `Σ = (I-B)⁻¹ V (I-B)⁻ᵀ`, the total-effect matrix
    /// `W = (I-B)⁻¹` and the marginal standard deviations.
    ///
    /// `W` is accumulated by forward substitution along the topological
    /// order, so no general inverse is ever formed.
    pub fn covariance(&self) -> Result<CovarianceBundle> {
        let n = self.node_count();
        let mut w = DMatrix::<f64>::identity(n, n);
        for &j in self.dag.topological_order() {
            // row_j of W = e_j + Σ_{h ∈ pa(j)} β_hj · row_h; parents are
            // already final because they precede j in the order.
            for &h in self.dag.parents(j).expect("validated node") {
                let beta = self.coeffs[&(h, j)];
                for col in 0..n {
                    let add = beta * w[(h - 1, col)];
                    w[(j - 1, col)] += add;
                }
            }
        }
        let mut scaled = w.clone();
        for col in 0..n {
            let s = libm::sqrt(self.noise[col]);
            for row in 0..n {
                scaled[(row, col)] *= s;
            }
        }
        let sigma = &scaled * scaled.transpose();
        if sigma.clone().cholesky().is_none() {
            return Err(Error::LinAlg(
                "implied covariance is not positive definite".into(),
            ));
        }
        let d = (0..n).map(|m| libm::sqrt(sigma[(m, m)])).collect();
        Ok(CovarianceBundle { sigma, w, d })
    }

    /// Total causal effect of `h` on `j`: the sum over all directed paths
    /// of the products of path coefficients, `W_jh`. Zero when `j` is not
    /// a descendant of `h`.
    pub fn total_effect(&self, h: usize, j: usize) -> Result<f64> {
        self.check_node(h)?;
        self.check_node(j)?;
        if h == j {
            return Err(Error::Query("total effect requires distinct nodes".into()));
        }
        Ok(self.covariance()?.total_effect(h, j))
    }

    /// The observationally equivalent model with `μ = 0` and unit marginal
    /// latent variances; the joint ordinal distribution is unchanged.
    pub fn standardize(&self) -> Result<LatentDagModel> {
        let bundle = self.covariance()?;
        let d = &bundle.d;
        let coeffs: BTreeMap<(usize, usize), f64> = self
            .coeffs
            .iter()
            .map(|(&(h, j), &b)| ((h, j), b * d[h - 1] / d[j - 1]))
            .collect();
        let noise = self
            .noise
            .iter()
            .enumerate()
            .map(|(m, v)| v / (d[m] * d[m]))
            .collect();
        let interior = (1..=self.node_count())
            .map(|m| {
                self.interior_thresholds(m)
                    .iter()
                    .map(|a| (a - self.mu[m - 1]) / d[m - 1])
                    .collect()
            })
            .collect();
        let model = LatentDagModel::new(
            self.dag.clone(),
            vec![0.0; self.node_count()],
            coeffs,
            noise,
            interior,
        )?;
        model.with_level_labels(self.tau.clone())
    }
}

/// Covariance structure implied by a model: `Σ`, `W = (I-B)⁻¹` and the
/// marginal standard deviations `d_m = √Σ_mm`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBundle {
    pub sigma: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub d: Vec<f64>,
}

impl CovarianceBundle {
    /// `Σ_jk`, 1-based.
    pub fn sigma_entry(&self, j: usize, k: usize) -> f64 {
        self.sigma[(j - 1, k - 1)]
    }

    /// `W_jh`, the total effect of `h` on `j`, 1-based.
    pub fn total_effect(&self, h: usize, j: usize) -> f64 {
        self.w[(j - 1, h - 1)]
    }

    /// Marginal standard deviation `√Σ_mm`, 1-based.
    pub fn marginal_sd(&self, m: usize) -> f64 {
        self.d[m - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn chain2() -> LatentDagModel {
        let dag = Dag::new(2, [(1, 2)]).unwrap();
        LatentDagModel::new(
            dag,
            vec![0.0, 0.0],
            [((1, 2), 0.5)],
            vec![1.0, 1.0],
            vec![vec![0.2], vec![0.4]],
        )
        .unwrap()
    }

    #[test]
    fn edgeless_identity() {
        let dag = Dag::new(3, []).unwrap();
        let m = LatentDagModel::new(
            dag,
            vec![0.0; 3],
            [],
            vec![1.0; 3],
            vec![vec![0.0], vec![0.0], vec![0.0]],
        )
        .unwrap();
        let b = m.covariance().unwrap();
        assert_eq!(b.sigma, DMatrix::identity(3, 3));
        assert_eq!(b.w, DMatrix::identity(3, 3));
    }

    #[test]
    fn chain_covariance_by_hand() {
        let b = chain2().covariance().unwrap();
        assert_abs_diff_eq!(b.sigma_entry(1, 1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.sigma_entry(1, 2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.sigma_entry(2, 2), 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b.total_effect(1, 2), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn total_effect_sums_paths() {
        // 1->2 (0.5), 2->3 (0.9), 1->3 (0.8): effect of 1 on 3 is 0.8 + 0.45
        let dag = Dag::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let m = LatentDagModel::new(
            dag,
            vec![0.0; 3],
            [((1, 2), 0.5), ((2, 3), 0.9), ((1, 3), 0.8)],
            vec![1.0; 3],
            vec![vec![0.0], vec![0.0], vec![0.0]],
        )
        .unwrap();
        assert_abs_diff_eq!(m.total_effect(1, 3).unwrap(), 1.25, epsilon = 1e-15);
        // non-descendant pair
        assert_eq!(m.total_effect(3, 1).unwrap(), 0.0);
        assert!(m.total_effect(2, 2).is_err());
    }

    // exhaustive directed-path enumeration, the independent total-effect oracle
    fn path_sum(m: &LatentDagModel, from: usize, to: usize) -> f64 {
        fn walk(m: &LatentDagModel, at: usize, to: usize, acc: f64, total: &mut f64) {
            if at == to {
                *total += acc;
                return;
            }
            for &c in m.dag().children(at).unwrap() {
                walk(m, c, to, acc * m.coeff(at, c).unwrap(), total);
            }
        }
        let mut total = 0.0;
        walk(m, from, to, 1.0, &mut total);
        total
    }

    #[test]
    fn total_effect_matches_path_enumeration() {
        use rand::Rng;
        let mut rng = crate::rng::RngHandle::new(17).rng();
        for _ in 0..50 {
            let n = rng.random_range(2..=6usize);
            let mut edges = Vec::new();
            for h in 1..=n {
                for j in (h + 1)..=n {
                    if rng.random::<f64>() < 0.5 {
                        edges.push((h, j));
                    }
                }
            }
            let dag = Dag::new(n, edges.iter().copied()).unwrap();
            let coeffs: Vec<_> = edges
                .iter()
                .map(|&e| (e, rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let m =
                LatentDagModel::new(dag, vec![0.0; n], coeffs, vec![1.0; n], vec![vec![0.0]; n])
                    .unwrap();
            for h in 1..=n {
                for j in 1..=n {
                    if h == j {
                        continue;
                    }
                    assert_abs_diff_eq!(
                        m.total_effect(h, j).unwrap(),
                        path_sum(&m, h, j),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn reconstruction_identity() {
        let m = chain2();
        let bundle = m.covariance().unwrap();
        let n = m.node_count();
        let i_minus_b = DMatrix::identity(n, n) - m.coefficient_matrix();
        let prod = i_minus_b * &bundle.w;
        let err = (&prod - DMatrix::identity(n, n)).abs().max();
        assert!(err < 1e-12);
    }

    #[test]
    fn standardize_chain() {
        let m = chain2();
        let s = m.standardize().unwrap();
        assert_abs_diff_eq!(
            s.coeff(1, 2).unwrap(),
            0.5 / 1.25f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s.coeff(1, 2).unwrap(), 0.4472136, epsilon = 1e-7);
        let b = s.covariance().unwrap();
        assert_abs_diff_eq!(b.sigma_entry(1, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.sigma_entry(2, 2), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn standardize_is_idempotent() {
        let s = chain2().standardize().unwrap();
        let s2 = s.standardize().unwrap();
        for ((_, a), (_, b)) in s.coeffs().zip(s2.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for m in 1..=2 {
            assert_abs_diff_eq!(s.noise_var(m), s2.noise_var(m), epsilon = 1e-12);
            for (a, b) in s
                .interior_thresholds(m)
                .iter()
                .zip(s2.interior_thresholds(m))
            {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn standardize_preserves_marginal_cell_probabilities() {
        use crate::special::std_normal_cdf;
        let dag = Dag::new(3, [(1, 2), (2, 3)]).unwrap();
        let m = LatentDagModel::new(
            dag,
            vec![0.4, -1.0, 2.0],
            [((1, 2), 0.8), ((2, 3), -0.6)],
            vec![0.5, 2.0, 1.5],
            vec![vec![0.2, 1.0], vec![-1.5, 0.0, 0.4], vec![2.5]],
        )
        .unwrap();
        let s = m.standardize().unwrap();
        let bundle = m.covariance().unwrap();
        for node in 1..=3 {
            let d = bundle.marginal_sd(node);
            for l in 1..=m.levels(node) {
                let p_orig = std_normal_cdf((m.threshold(node, l) - m.mean(node)) / d)
                    - std_normal_cdf((m.threshold(node, l - 1) - m.mean(node)) / d);
                let sd = s.covariance().unwrap().marginal_sd(node);
                let p_std = std_normal_cdf(s.threshold(node, l) / sd)
                    - std_normal_cdf(s.threshold(node, l - 1) / sd);
                assert_abs_diff_eq!(p_orig, p_std, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zeroed_edge_matches_deleted_edge() {
        let dag = Dag::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let zeroed = LatentDagModel::new(
            dag,
            vec![0.0; 3],
            [((1, 2), 0.5), ((2, 3), 0.0), ((1, 3), 0.8)],
            vec![1.0; 3],
            vec![vec![0.0]; 3],
        )
        .unwrap();
        let deleted = LatentDagModel::new(
            Dag::new(3, [(1, 2), (1, 3)]).unwrap(),
            vec![0.0; 3],
            [((1, 2), 0.5), ((1, 3), 0.8)],
            vec![1.0; 3],
            vec![vec![0.0]; 3],
        )
        .unwrap();
        let a = zeroed.covariance().unwrap().sigma;
        let b = deleted.covariance().unwrap().sigma;
        assert!((a - b).abs().max() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_models() {
        let dag = Dag::new(2, [(1, 2)]).unwrap();
        // missing coefficient
        assert!(LatentDagModel::new(
            dag.clone(),
            vec![0.0; 2],
            [],
            vec![1.0; 2],
            vec![vec![0.0], vec![0.0]],
        )
        .is_err());
        // coefficient off the edge set
        assert!(LatentDagModel::new(
            dag.clone(),
            vec![0.0; 2],
            [((2, 1), 0.5)],
            vec![1.0; 2],
            vec![vec![0.0], vec![0.0]],
        )
        .is_err());
        // non-positive variance
        assert!(LatentDagModel::new(
            dag.clone(),
            vec![0.0; 2],
            [((1, 2), 0.5)],
            vec![1.0, 0.0],
            vec![vec![0.0], vec![0.0]],
        )
        .is_err());
        // non-increasing thresholds
        assert!(LatentDagModel::new(
            dag.clone(),
            vec![0.0; 2],
            [((1, 2), 0.5)],
            vec![1.0; 2],
            vec![vec![0.3, 0.3], vec![0.0]],
        )
        .is_err());
        // level labels with wrong arity
        let ok = LatentDagModel::new(
            dag,
            vec![0.0; 2],
            [((1, 2), 0.5)],
            vec![1.0; 2],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        assert!(ok
            .clone()
            .with_level_labels(vec![vec![0, 1, 2], vec![0, 1]])
            .is_err());
        assert!(ok.with_level_labels(vec![vec![0, 1], vec![5, 9]]).is_ok());
    }
}
