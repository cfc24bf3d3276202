//! Ordinal causal effects.
//!
//! The effect of shifting an ordinal intervention variable `X_i` from
//! level `l` to level `l'` on the level probabilities of an outcome `X_o`
//! is a difference of two arm probabilities, each mixing atomic latent
//! interventions over the level's band with an intervention policy.
//!
//! Three routes are provided and cross-validate each other:
//!
//! * closed form for the truncated-normal policy, reducing each arm to
//!   four bivariate normal distribution function evaluations;
//! * numeric distributional integration of the atomic band probability
//!   against each arm's policy;
//! * numeric quantile integration, pairing the two bands point by point
//!   through the policy quantile map.

use crate::error::{Error, Result};
use crate::intervene::{post_intervention_mutilated_with, MutilatedSem};
use crate::model::LatentDagModel;
use crate::quad::integrate;
use crate::special::{
    bvn_cdf_raw, normal_mass, std_normal_cdf, std_normal_quantile_unchecked, std_normal_sf,
    TruncatedNormal, DEGENERATE_MASS,
};

/// How atomic interventions are mixed over a level band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// The marginal latent normal truncated to the band. Well defined for
    /// every band, including the two semi-infinite ones.
    TruncatedNormal,
    /// Uniform density on the band; rejected for the lowest and highest
    /// level, whose bands are semi-infinite.
    UniformOnBand,
}

impl Policy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::TruncatedNormal => "trunc-normal",
            Policy::UniformOnBand => "uniform",
        }
    }
}

/// Evaluation route for an effect query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    ClosedForm,
    NumericDistributional,
    NumericQuantile,
}

impl Approach {
    pub fn as_str(&self) -> &'static str {
        match self {
            Approach::ClosedForm => "closed",
            Approach::NumericDistributional => "numeric-dist",
            Approach::NumericQuantile => "numeric-quant",
        }
    }
}

/// One effect request: shift node `i` from `from_level` to `to_level`
/// (1-based level indices) and tabulate the change per outcome level of
/// node `o`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterventionQuery {
    pub i: usize,
    pub o: usize,
    pub from_level: usize,
    pub to_level: usize,
    pub policy: Policy,
    pub approach: Approach,
}

impl InterventionQuery {
    pub fn validate(&self, model: &LatentDagModel) -> Result<()> {
        model.check_node(self.i)?;
        model.check_node(self.o)?;
        if self.i == self.o {
            return Err(Error::Query(
                "intervention and outcome nodes must differ".into(),
            ));
        }
        let li = model.levels(self.i);
        for l in [self.from_level, self.to_level] {
            if l == 0 || l > li {
                return Err(Error::Query(format!(
                    "level {l} out of range 1..={li} for node {}",
                    self.i
                )));
            }
        }
        Ok(())
    }
}

/// Per-outcome-level effects of one shift, with integration error
/// estimates for the numeric routes.
#[derive(Debug, Clone, PartialEq)]
pub struct OceTable {
    pub values: Vec<f64>,
    pub query: InterventionQuery,
    pub diagnostics: Option<Vec<f64>>,
}

/// The standardized quantities the closed form runs on.
///
/// With `z_i` the standardized intervention value, the outcome threshold
/// `k` standardizes to the affine form `a_k + b z_i`; an arm probability
/// then collapses to bivariate normal evaluations at
/// `(ᾱ(i, ·), ã_k, ρ)` with `ã_k = a_k / √(1+b²)` and `ρ = -b / √(1+b²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectTerms {
    /// Standardized intervention thresholds `ᾱ(i, l)`, sentinels included.
    pub alpha_bar_i: Vec<f64>,
    /// Outcome threshold intercepts `a_k`, sentinels included.
    pub a: Vec<f64>,
    /// Common slope `b = -W_oi σ_i / √Σ̃_oo`.
    pub b: f64,
    /// `a_k / √(1+b²)`, sentinels included.
    pub a_tilde: Vec<f64>,
    /// `-b / √(1+b²)`.
    pub rho: f64,
    i: usize,
    o: usize,
}

impl EffectTerms {
    pub fn new(model: &LatentDagModel, i: usize, o: usize) -> Result<Self> {
        model.check_node(i)?;
        model.check_node(o)?;
        if i == o {
            return Err(Error::Query(
                "intervention and outcome nodes must differ".into(),
            ));
        }
        let bundle = model.covariance()?;
        let sigma_i = bundle.marginal_sd(i);
        let var_tilde = MutilatedSem::of(model, i)?.outcome_variance(model, o)?;
        if var_tilde.is_nan() || var_tilde <= 0.0 {
            return Err(Error::Numeric(format!(
                "post-intervention variance of node {o} is not positive"
            )));
        }
        let sd_tilde = libm::sqrt(var_tilde);
        let w_oi = bundle.total_effect(i, o);
        let standardize = |t: f64, center: f64, scale: f64| {
            if t.is_infinite() {
                t
            } else {
                (t - center) / scale
            }
        };
        let alpha_bar_i: Vec<f64> = model
            .thresholds(i)
            .iter()
            .map(|&t| standardize(t, model.mean(i), sigma_i))
            .collect();
        let a: Vec<f64> = model
            .thresholds(o)
            .iter()
            .map(|&t| standardize(t, model.mean(o), sd_tilde))
            .collect();
        let b = -w_oi * sigma_i / sd_tilde;
        let den = libm::sqrt(1.0 + b * b);
        let a_tilde: Vec<f64> = a
            .iter()
            .map(|&ak| if ak.is_infinite() { ak } else { ak / den })
            .collect();
        let rho = -b / den;
        debug_assert!(rho.abs() < 1.0);
        Ok(Self {
            alpha_bar_i,
            a,
            b,
            a_tilde,
            rho,
            i,
            o,
        })
    }

    pub fn intervention(&self) -> usize {
        self.i
    }

    pub fn outcome(&self) -> usize {
        self.o
    }

    fn levels_i(&self) -> usize {
        self.alpha_bar_i.len() - 1
    }

    fn levels_o(&self) -> usize {
        self.a.len() - 1
    }

    /// Standardized band `[ᾱ(i, l-1), ᾱ(i, l)]` of intervention level `l`.
    fn band(&self, l: usize) -> (f64, f64) {
        (self.alpha_bar_i[l - 1], self.alpha_bar_i[l])
    }

    fn band_mass(&self, l: usize) -> Result<f64> {
        let (lo, hi) = self.band(l);
        let mass = normal_mass(lo, hi);
        if mass < DEGENERATE_MASS {
            return Err(Error::DegenerateLevel {
                node: self.i,
                level: l,
            });
        }
        Ok(mass)
    }

    /// `P(Y_o standardizes below threshold k | z_i)`; sentinels give 0/1.
    fn outcome_cdf(&self, k: usize, z_i: f64) -> f64 {
        let a_k = self.a[k];
        if a_k == f64::NEG_INFINITY {
            0.0
        } else if a_k == f64::INFINITY {
            1.0
        } else {
            std_normal_cdf(a_k + self.b * z_i)
        }
    }

    /// Atomic probability that the outcome lands in level `k` given the
    /// standardized intervention value `z_i`.
    fn outcome_level_prob(&self, k: usize, z_i: f64) -> f64 {
        (self.outcome_cdf(k, z_i) - self.outcome_cdf(k - 1, z_i)).max(0.0)
    }

    /// `∫ Φ(a_k + b z) φ(z) dz` over `(-∞, ᾱ(i, l)]` in closed form.
    fn gaussian_mix_cdf(&self, l: usize, k: usize) -> f64 {
        bvn_cdf_raw(self.alpha_bar_i[l], self.a_tilde[k], self.rho)
    }

    /// Closed-form arm probability: outcome level `k` under the
    /// truncated-normal policy on intervention level `l`.
    fn arm_prob_closed(&self, l: usize, k: usize) -> Result<f64> {
        let mass = self.band_mass(l)?;
        let num = self.gaussian_mix_cdf(l, k)
            - self.gaussian_mix_cdf(l - 1, k)
            - self.gaussian_mix_cdf(l, k - 1)
            + self.gaussian_mix_cdf(l - 1, k - 1);
        Ok((num / mass).clamp(0.0, 1.0))
    }

    /// Closed-form arm probability of the upper tail `X_o >= level j`.
    fn arm_tail_closed(&self, l: usize, j: usize) -> Result<f64> {
        let mass = self.band_mass(l)?;
        let below = self.gaussian_mix_cdf(l, j - 1) - self.gaussian_mix_cdf(l - 1, j - 1);
        Ok(1.0 - (below / mass).clamp(0.0, 1.0))
    }
}

const QUAD_TOL: f64 = 1e-8;
const QUAD_DEPTH: u32 = 50;

/// Closed-form OCE table for the shift `from_level -> to_level` under the
/// truncated-normal policy.
pub fn oce_closed_form(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    from_level: usize,
    to_level: usize,
) -> Result<OceTable> {
    let query = InterventionQuery {
        i,
        o,
        from_level,
        to_level,
        policy: Policy::TruncatedNormal,
        approach: Approach::ClosedForm,
    };
    query.validate(model)?;
    let terms = EffectTerms::new(model, i, o)?;
    closed_form_with(&terms, query)
}

fn closed_form_with(terms: &EffectTerms, query: InterventionQuery) -> Result<OceTable> {
    let values = (1..=terms.levels_o())
        .map(|k| {
            Ok(terms.arm_prob_closed(query.to_level, k)?
                - terms.arm_prob_closed(query.from_level, k)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(OceTable {
        values,
        query,
        diagnostics: None,
    })
}

/// Numeric OCE table by adaptive quadrature, for either policy and either
/// of the two numeric approaches.
pub fn oce_numeric(model: &LatentDagModel, query: InterventionQuery) -> Result<OceTable> {
    query.validate(model)?;
    let terms = EffectTerms::new(model, query.i, query.o)?;
    numeric_with(&terms, query)
}

fn numeric_with(terms: &EffectTerms, query: InterventionQuery) -> Result<OceTable> {
    if query.approach == Approach::ClosedForm {
        if query.policy == Policy::UniformOnBand {
            return Err(Error::Query(
                "the closed form applies to the truncated-normal policy only".into(),
            ));
        }
        return closed_form_with(terms, query);
    }
    for l in [query.from_level, query.to_level] {
        let (lo, hi) = terms.band(l);
        terms.band_mass(l)?;
        if query.policy == Policy::UniformOnBand && (lo.is_infinite() || hi.is_infinite()) {
            return Err(Error::Query(format!(
                "the uniform policy cannot target level {l} of node {}: its band is \
                 semi-infinite; use the truncated-normal policy",
                terms.i
            )));
        }
    }
    let levels_o = terms.levels_o();
    let mut values = Vec::with_capacity(levels_o);
    let mut diags = Vec::with_capacity(levels_o);
    for k in 1..=levels_o {
        let (value, err) = match query.approach {
            Approach::NumericDistributional => {
                let (hi_val, hi_err) = arm_prob_numeric(terms, query.policy, query.to_level, k)?;
                let (lo_val, lo_err) = arm_prob_numeric(terms, query.policy, query.from_level, k)?;
                (hi_val - lo_val, hi_err + lo_err)
            }
            Approach::NumericQuantile => quantile_entry(terms, query, k)?,
            Approach::ClosedForm => unreachable!(),
        };
        values.push(value);
        diags.push(err);
    }
    Ok(OceTable {
        values,
        query,
        diagnostics: Some(diags),
    })
}

/// Distributional arm: `∫ P(X_o = k | do(z)) policy(z) dz` over band `l`.
///
/// For the truncated-normal policy the integral is taken in probability
/// space, `u = Φ(z)` (or the survival analogue when the band sits in the
/// right tail), which removes the semi-infinite limits and the policy
/// density in one substitution.
fn arm_prob_numeric(terms: &EffectTerms, policy: Policy, l: usize, k: usize) -> Result<(f64, f64)> {
    let (lo, hi) = terms.band(l);
    match policy {
        Policy::TruncatedNormal => {
            let mass = terms.band_mass(l)?;
            let out = if lo >= 0.0 {
                // right-tail band: z = -Φ⁻¹(q) over survival values
                let q_lo = std_normal_sf(hi);
                let q_hi = std_normal_sf(lo);
                integrate(
                    &|q: f64| terms.outcome_level_prob(k, -std_normal_quantile_unchecked(q)),
                    q_lo,
                    q_hi,
                    QUAD_TOL * mass,
                    QUAD_DEPTH,
                )?
            } else {
                let u_lo = std_normal_cdf(lo);
                let u_hi = std_normal_cdf(hi);
                integrate(
                    &|u: f64| terms.outcome_level_prob(k, std_normal_quantile_unchecked(u)),
                    u_lo,
                    u_hi,
                    QUAD_TOL * mass,
                    QUAD_DEPTH,
                )?
            };
            Ok((out.value / mass, out.abs_err / mass))
        }
        Policy::UniformOnBand => {
            let width = hi - lo;
            let out = integrate(
                &|z: f64| terms.outcome_level_prob(k, z),
                lo,
                hi,
                QUAD_TOL * width,
                QUAD_DEPTH,
            )?;
            Ok((out.value / width, out.abs_err / width))
        }
    }
}

/// Quantile-approach entry: pair the two bands through the policy
/// quantile map and integrate the kernel difference once,
/// `∫₀¹ [P_k(q_to(p)) - P_k(q_from(p))] dp`.
fn quantile_entry(terms: &EffectTerms, query: InterventionQuery, k: usize) -> Result<(f64, f64)> {
    let q_from = band_quantile(terms, query.policy, query.from_level)?;
    let q_to = band_quantile(terms, query.policy, query.to_level)?;
    let out = integrate(
        &|p: f64| terms.outcome_level_prob(k, q_to(p)) - terms.outcome_level_prob(k, q_from(p)),
        0.0,
        1.0,
        QUAD_TOL,
        QUAD_DEPTH,
    )?;
    Ok((out.value, out.abs_err))
}

fn band_quantile(terms: &EffectTerms, policy: Policy, l: usize) -> Result<Box<dyn Fn(f64) -> f64>> {
    let (lo, hi) = terms.band(l);
    match policy {
        Policy::TruncatedNormal => {
            let tn = TruncatedNormal::new(0.0, 1.0, lo, hi).map_err(|e| match e {
                Error::DegenerateInterval(_) => Error::DegenerateLevel {
                    node: terms.i,
                    level: l,
                },
                other => other,
            })?;
            Ok(Box::new(move |p| tn.quantile(p).expect("p in (0,1)")))
        }
        Policy::UniformOnBand => {
            if lo.is_infinite() || hi.is_infinite() {
                return Err(Error::Query(format!(
                    "the uniform policy cannot target level {l} of node {}: its band is \
                     semi-infinite; use the truncated-normal policy",
                    terms.i
                )));
            }
            Ok(Box::new(move |p| lo + p * (hi - lo)))
        }
    }
}

/// Cumulative effect `P[X_o >= τ(o, j) | do l'] - P[X_o >= τ(o, j) | do l]`
/// under the truncated-normal policy: the outer integration limits of the
/// per-level effect replaced by the upper tail `[α(o, j-1), +∞)`. Equals
/// the partial sum `Σ_{k >= j} OCE(k, l -> l')`.
pub fn oce_cumulative(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    from_level: usize,
    to_level: usize,
    j: usize,
) -> Result<f64> {
    let query = InterventionQuery {
        i,
        o,
        from_level,
        to_level,
        policy: Policy::TruncatedNormal,
        approach: Approach::ClosedForm,
    };
    query.validate(model)?;
    let terms = EffectTerms::new(model, i, o)?;
    if j == 0 || j > terms.levels_o() {
        return Err(Error::Query(format!(
            "outcome level {j} out of range 1..={}",
            terms.levels_o()
        )));
    }
    Ok(terms.arm_tail_closed(to_level, j)? - terms.arm_tail_closed(from_level, j)?)
}

/// `P(X_o = τ(o, k) | do(Y_i = y))` for an atomic intervention, from the
/// mutilated-SEM post-intervention law.
pub fn atomic_level_prob(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    y: f64,
    k: usize,
) -> Result<f64> {
    model.check_node(i)?;
    model.check_node(o)?;
    if i == o {
        return Err(Error::Query(
            "intervention and outcome nodes must differ".into(),
        ));
    }
    if k == 0 || k > model.levels(o) {
        return Err(Error::Query(format!(
            "outcome level {k} out of range 1..={}",
            model.levels(o)
        )));
    }
    let bundle = model.covariance()?;
    let dist = post_intervention_mutilated_with(model, &bundle, i, o, y)?;
    let sd = libm::sqrt(dist.var_do);
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::Numeric(format!(
            "post-intervention variance of node {o} is zero"
        )));
    }
    let z = |t: f64| {
        if t.is_infinite() {
            t
        } else {
            (t - dist.mu_do) / sd
        }
    };
    Ok(normal_mass(
        z(model.threshold(o, k - 1)),
        z(model.threshold(o, k)),
    ))
}

/// Every shift `(l, l')` with `l != l'`, as `(l, l', table)` triples in
/// lexicographic order. The standardized terms are computed once per
/// `(i, o)` pair and shared across cells.
pub fn oce_all_shifts(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    policy: Policy,
    approach: Approach,
) -> Result<Vec<(usize, usize, OceTable)>> {
    let terms = EffectTerms::new(model, i, o)?;
    let levels_i = terms.levels_i();
    let mut out = Vec::with_capacity(levels_i * (levels_i - 1));
    for from_level in 1..=levels_i {
        for to_level in 1..=levels_i {
            if from_level == to_level {
                continue;
            }
            let query = InterventionQuery {
                i,
                o,
                from_level,
                to_level,
                policy,
                approach,
            };
            let table = numeric_with(&terms, query)?;
            out.push((from_level, to_level, table));
        }
    }
    Ok(out)
}

/// Dispatch a query to its approach.
pub fn compute_oce(model: &LatentDagModel, query: InterventionQuery) -> Result<OceTable> {
    match query.approach {
        Approach::ClosedForm => {
            if query.policy == Policy::UniformOnBand {
                return Err(Error::Query(
                    "the closed form applies to the truncated-normal policy only".into(),
                ));
            }
            oce_closed_form(model, query.i, query.o, query.from_level, query.to_level)
        }
        _ => oce_numeric(model, query),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use approx::assert_abs_diff_eq;

    /// Two binary variables: 1 -> 2 with b = 0.5, V = I, α = (0.2, 0.4).
    pub(crate) fn toy_binary() -> LatentDagModel {
        LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.5)],
            vec![1.0; 2],
            vec![vec![0.2], vec![0.4]],
        )
        .unwrap()
    }

    /// Three binary variables: 1 -> 2, 1 -> 3, 2 -> 3 with
    /// b = (0.5, 0.8, 0.9), V = I, α = (1.2, 2.4, 3.3).
    pub(crate) fn toy_three_binary() -> LatentDagModel {
        LatentDagModel::new(
            Dag::new(3, [(1, 2), (1, 3), (2, 3)]).unwrap(),
            vec![0.0; 3],
            [((1, 2), 0.5), ((1, 3), 0.8), ((2, 3), 0.9)],
            vec![1.0; 3],
            vec![vec![1.2], vec![2.4], vec![3.3]],
        )
        .unwrap()
    }

    // Closed-form value cross-checked against an independent bivariate
    // normal implementation; six digits round to -0.281642.
    const TOY_OCE_LEVEL0: f64 = -0.2816419985355254;

    #[test]
    fn binary_toy_closed_form() {
        let table = oce_closed_form(&toy_binary(), 1, 2, 1, 2).unwrap();
        assert_abs_diff_eq!(table.values[0], TOY_OCE_LEVEL0, epsilon = 1e-9);
        assert_abs_diff_eq!(table.values[0], -0.281642, epsilon = 1e-4);
        assert_abs_diff_eq!(table.values[1], 0.281642, epsilon = 1e-4);
    }

    #[test]
    fn binary_toy_numeric_paths() {
        for approach in [Approach::NumericDistributional, Approach::NumericQuantile] {
            let table = oce_numeric(
                &toy_binary(),
                InterventionQuery {
                    i: 1,
                    o: 2,
                    from_level: 1,
                    to_level: 2,
                    policy: Policy::TruncatedNormal,
                    approach,
                },
            )
            .unwrap();
            assert_abs_diff_eq!(table.values[0], -0.281642, epsilon = 1e-4);
            assert_abs_diff_eq!(table.values[1], 0.281642, epsilon = 1e-4);
            let diags = table.diagnostics.unwrap();
            assert!(diags.iter().all(|&e| e >= 0.0));
        }
    }

    #[test]
    fn three_binary_closed_form() {
        let table = oce_closed_form(&toy_three_binary(), 2, 3, 1, 2).unwrap();
        assert_abs_diff_eq!(table.values[0], -0.2590655, epsilon = 1e-3);
        assert_abs_diff_eq!(table.values[1], 0.2590634, epsilon = 1e-3);
        // tighter pin from an independent bivariate-normal cross-check
        assert_abs_diff_eq!(table.values[0], -0.2590633522468557, epsilon = 1e-9);
    }

    #[test]
    fn same_levels_give_zero_table() {
        let table = oce_closed_form(&toy_binary(), 1, 2, 2, 2).unwrap();
        assert!(table.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn antisymmetry_is_exact() {
        let up = oce_closed_form(&toy_three_binary(), 1, 3, 1, 2).unwrap();
        let down = oce_closed_form(&toy_three_binary(), 1, 3, 2, 1).unwrap();
        for (a, b) in up.values.iter().zip(&down.values) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn zero_sum_over_levels() {
        let table = oce_closed_form(&toy_three_binary(), 1, 3, 1, 2).unwrap();
        let sum: f64 = table.values.iter().sum();
        assert!(sum.abs() < 1e-9);
    }

    #[test]
    fn closed_vs_numeric_agree() {
        for approach in [Approach::NumericDistributional, Approach::NumericQuantile] {
            let closed = oce_closed_form(&toy_three_binary(), 2, 3, 1, 2).unwrap();
            let numeric = oce_numeric(
                &toy_three_binary(),
                InterventionQuery {
                    i: 2,
                    o: 3,
                    from_level: 1,
                    to_level: 2,
                    policy: Policy::TruncatedNormal,
                    approach,
                },
            )
            .unwrap();
            for (c, n) in closed.values.iter().zip(&numeric.values) {
                assert_abs_diff_eq!(*c, *n, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn uniform_policy_rejects_semi_infinite_band() {
        let err = oce_numeric(
            &toy_binary(),
            InterventionQuery {
                i: 1,
                o: 2,
                from_level: 1,
                to_level: 2,
                policy: Policy::UniformOnBand,
                approach: Approach::NumericDistributional,
            },
        );
        assert!(matches!(err, Err(Error::Query(msg)) if msg.contains("semi-infinite")));
    }

    #[test]
    fn uniform_policy_on_interior_bands() {
        // four levels so bands 2 and 3 are finite
        let m = LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.8)],
            vec![1.0; 2],
            vec![vec![-0.8, 0.0, 0.9], vec![0.1]],
        )
        .unwrap();
        for approach in [Approach::NumericDistributional, Approach::NumericQuantile] {
            let table = oce_numeric(
                &m,
                InterventionQuery {
                    i: 1,
                    o: 2,
                    from_level: 2,
                    to_level: 3,
                    policy: Policy::UniformOnBand,
                    approach,
                },
            )
            .unwrap();
            let sum: f64 = table.values.iter().sum();
            assert!(sum.abs() < 1e-7, "sum {sum}");
            assert!(table.values[1] != 0.0);
        }
    }

    #[test]
    fn uniform_distributional_and_quantile_agree() {
        let m = LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.8)],
            vec![1.0; 2],
            vec![vec![-0.8, 0.0, 0.9], vec![0.1]],
        )
        .unwrap();
        let mk = |approach| InterventionQuery {
            i: 1,
            o: 2,
            from_level: 2,
            to_level: 3,
            policy: Policy::UniformOnBand,
            approach,
        };
        let d = oce_numeric(&m, mk(Approach::NumericDistributional)).unwrap();
        let q = oce_numeric(&m, mk(Approach::NumericQuantile)).unwrap();
        for (a, b) in d.values.iter().zip(&q.values) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-6);
        }
    }

    #[test]
    fn cumulative_effect_cases() {
        let m = toy_binary();
        // j = 1 covers the whole line: total mass shift is zero
        assert_eq!(oce_cumulative(&m, 1, 2, 1, 2, 1).unwrap(), 0.0);
        // binary outcome: j = 2 equals the level-1 (upper) OCE entry
        let cum = oce_cumulative(&m, 1, 2, 1, 2, 2).unwrap();
        assert_abs_diff_eq!(cum, 0.281642, epsilon = 1e-4);
        // partial-sum identity on a wider model
        let wide = LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.7)],
            vec![1.0; 2],
            vec![vec![-0.3, 0.5], vec![-1.0, 0.0, 0.8]],
        )
        .unwrap();
        let table = oce_closed_form(&wide, 1, 2, 1, 3).unwrap();
        for j in 1..=4 {
            let cum = oce_cumulative(&wide, 1, 2, 1, 3, j).unwrap();
            let partial: f64 = table.values[(j - 1)..].iter().sum();
            assert_abs_diff_eq!(cum, partial, epsilon = 1e-9);
        }
        assert!(oce_cumulative(&wide, 1, 2, 1, 3, 5).is_err());
    }

    #[test]
    fn atomic_level_probs_partition() {
        let m = toy_three_binary();
        for y in [-1.5, 0.0, 2.0] {
            let total: f64 = (1..=2)
                .map(|k| atomic_level_prob(&m, 1, 3, y, k).unwrap())
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn atomic_level_prob_binary_complement() {
        use crate::intervene::post_intervention_mutilated;
        use crate::special::std_normal_cdf;
        let m = toy_binary();
        let y = 0.8;
        let d = post_intervention_mutilated(&m, 1, 2, y).unwrap();
        let expect = 1.0 - std_normal_cdf((0.4 - d.mu_do) / d.var_do.sqrt());
        assert_abs_diff_eq!(
            atomic_level_prob(&m, 1, 2, y, 2).unwrap(),
            expect,
            epsilon = 1e-14
        );
    }

    #[test]
    fn all_shifts_enumerates_tensor() {
        let m = LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.6)],
            vec![1.0; 2],
            vec![vec![-0.5, 0.5], vec![0.0]],
        )
        .unwrap();
        let shifts =
            oce_all_shifts(&m, 1, 2, Policy::TruncatedNormal, Approach::ClosedForm).unwrap();
        assert_eq!(shifts.len(), 3 * 2); // L_i (L_i - 1)
        for (l, lp, table) in &shifts {
            assert_ne!(l, lp);
            assert_eq!(table.values.len(), 2);
        }
    }

    #[test]
    fn query_validation() {
        let m = toy_binary();
        let bad = InterventionQuery {
            i: 1,
            o: 1,
            from_level: 1,
            to_level: 2,
            policy: Policy::TruncatedNormal,
            approach: Approach::ClosedForm,
        };
        assert!(bad.validate(&m).is_err());
        let out_of_range = InterventionQuery {
            i: 1,
            o: 2,
            from_level: 0,
            to_level: 3,
            policy: Policy::TruncatedNormal,
            approach: Approach::ClosedForm,
        };
        assert!(out_of_range.validate(&m).is_err());
    }

    #[test]
    fn degenerate_level_is_named() {
        // second band of node 1 is [39, 40]: mass underflows
        let m = LatentDagModel::new(
            Dag::new(2, [(1, 2)]).unwrap(),
            vec![0.0; 2],
            [((1, 2), 0.5)],
            vec![1.0; 2],
            vec![vec![39.0, 40.0], vec![0.0]],
        )
        .unwrap();
        let err = oce_closed_form(&m, 1, 2, 1, 2);
        assert!(matches!(
            err,
            Err(Error::DegenerateLevel { node: 1, level: 2 })
        ));
    }

    #[test]
    fn non_descendant_outcome_is_null() {
        let m = LatentDagModel::new(
            Dag::new(3, [(1, 2), (1, 3)]).unwrap(),
            vec![0.0; 3],
            [((1, 2), 0.7), ((1, 3), 0.9)],
            vec![1.0; 3],
            vec![vec![0.0]; 3],
        )
        .unwrap();
        let table = oce_closed_form(&m, 2, 3, 1, 2).unwrap();
        for v in table.values {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn standardization_leaves_tables_unchanged() {
        let m = toy_three_binary();
        let s = m.standardize().unwrap();
        for (i, o) in [(1usize, 2usize), (1, 3), (2, 3)] {
            let a = oce_closed_form(&m, i, o, 1, 2).unwrap();
            let b = oce_closed_form(&s, i, o, 1, 2).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
            }
        }
    }
}
