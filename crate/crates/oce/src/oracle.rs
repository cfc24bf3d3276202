//! Brute-force Monte Carlo estimation of ordinal causal effects by
//! simulating the mutilated SEM under policy draws.
//!
//! Each arm draws the intervention value from the policy restricted to its
//! level band, overwrites node `i`, propagates descendants with fresh
//! noise and tallies the outcome level. Non-descendants are sampled once
//! per row from the observational model, which the truncated factorisation
//! makes equivalent to mutilating the full system.
//!
//! Rows are processed in fixed-size chunks, one derived RNG stream per
//! chunk; counts are integers, so the merged estimate is bit-identical to
//! a sequential run no matter how chunks are scheduled.

use rayon::prelude::*;

use crate::effects::Policy;
use crate::error::{Error, Result};
use crate::model::LatentDagModel;
use crate::rng::{open01, standard_normal, RngHandle, StreamRng};
use crate::simulate::level_of;
use crate::special::TruncatedNormal;

const CHUNK_ROWS: usize = 1 << 16;

/// Monte Carlo estimate of one OCE table: per-level effect, its standard
/// error, the draws per arm and the raw level counts of both arms.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub value: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_samples: usize,
    pub from_counts: Vec<u64>,
    pub to_counts: Vec<u64>,
}

struct SimPlan {
    order: Vec<usize>,               // 0-based topological order
    parents: Vec<Vec<(usize, f64)>>, // per 0-based node
    mu: Vec<f64>,
    noise_sd: Vec<f64>,
    i0: usize,
    o0: usize,
    out_thresholds: Vec<f64>,
    levels_o: usize,
}

impl SimPlan {
    fn new(model: &LatentDagModel, i: usize, o: usize) -> Self {
        let n = model.node_count();
        let parents = (1..=n)
            .map(|j| {
                model
                    .dag()
                    .parents(j)
                    .expect("validated node")
                    .iter()
                    .map(|&h| (h - 1, model.coeff(h, j).expect("edge coefficient")))
                    .collect()
            })
            .collect();
        Self {
            order: model
                .dag()
                .topological_order()
                .iter()
                .map(|&m| m - 1)
                .collect(),
            parents,
            mu: model.means().to_vec(),
            noise_sd: model.noise_vars().iter().map(|&v| libm::sqrt(v)).collect(),
            i0: i - 1,
            o0: o - 1,
            out_thresholds: model.thresholds(o).to_vec(),
            levels_o: model.levels(o),
        }
    }

    /// One row: policy draw at `i`, everything else ancestral.
    fn simulate_row(
        &self,
        draw: &impl Fn(&mut StreamRng) -> f64,
        vals: &mut [f64],
        rng: &mut StreamRng,
    ) -> u32 {
        for &m in &self.order {
            let mut v = if m == self.i0 {
                draw(rng)
            } else {
                self.mu[m] + self.noise_sd[m] * standard_normal(rng)
            };
            if m != self.i0 {
                for &(h, beta) in &self.parents[m] {
                    v += beta * (vals[h] - self.mu[h]);
                }
            }
            vals[m] = v;
        }
        level_of(&self.out_thresholds, vals[self.o0])
    }
}

enum BandSampler {
    Normal(TruncatedNormal),
    Uniform { lo: f64, width: f64 },
}

impl BandSampler {
    fn new(model: &LatentDagModel, i: usize, level: usize, policy: Policy) -> Result<Self> {
        let (lo, hi) = model.level_band(i, level)?;
        match policy {
            Policy::TruncatedNormal => {
                let sigma_i = model.covariance()?.marginal_sd(i);
                let tn =
                    TruncatedNormal::new(model.mean(i), sigma_i, lo, hi).map_err(|e| match e {
                        Error::DegenerateInterval(_) => Error::DegenerateLevel { node: i, level },
                        other => other,
                    })?;
                Ok(BandSampler::Normal(tn))
            }
            Policy::UniformOnBand => {
                if lo.is_infinite() || hi.is_infinite() {
                    return Err(Error::Query(format!(
                        "the uniform policy cannot target level {level} of node {i}: its band \
                         is semi-infinite; use the truncated-normal policy"
                    )));
                }
                Ok(BandSampler::Uniform { lo, width: hi - lo })
            }
        }
    }

    fn at(&self, u: f64) -> f64 {
        match self {
            BandSampler::Normal(tn) => tn.quantile(u).expect("u in (0,1)"),
            BandSampler::Uniform { lo, width } => lo + u * width,
        }
    }
}

fn chunks_of(n: usize) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let mut done = 0usize;
    let mut idx = 0u64;
    while done < n {
        let rows = CHUNK_ROWS.min(n - done);
        out.push((idx, rows));
        done += rows;
        idx += 1;
    }
    out
}

fn run_arm(plan: &SimPlan, sampler: &BandSampler, n: usize, arm: &RngHandle) -> Vec<u64> {
    chunks_of(n)
        .par_iter()
        .map(|&(idx, rows)| {
            let mut rng = arm.derive(idx).rng();
            let mut vals = vec![0.0; plan.mu.len()];
            let mut counts = vec![0u64; plan.levels_o];
            let draw = |rng: &mut StreamRng| sampler.at(open01(rng));
            for _ in 0..rows {
                let level = plan.simulate_row(&draw, &mut vals, &mut rng);
                counts[level as usize] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; plan.levels_o],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn validate(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    levels: [usize; 2],
    n: usize,
) -> Result<()> {
    model.check_node(i)?;
    model.check_node(o)?;
    if i == o {
        return Err(Error::Query(
            "intervention and outcome nodes must differ".into(),
        ));
    }
    for l in levels {
        model.level_band(i, l)?;
    }
    if n == 0 {
        return Err(Error::InvalidParam("need at least one draw per arm".into()));
    }
    Ok(())
}

/// Monte Carlo OCE with independent arms: `n` rows per arm, each arm on
/// its own derived stream, so the per-level binomial standard error is
/// exact.
#[allow(clippy::too_many_arguments)]
pub fn oracle_oce(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    from_level: usize,
    to_level: usize,
    policy: Policy,
    n: usize,
    handle: &RngHandle,
) -> Result<OracleEstimate> {
    validate(model, i, o, [from_level, to_level], n)?;
    let plan = SimPlan::new(model, i, o);
    let from_sampler = BandSampler::new(model, i, from_level, policy)?;
    let to_sampler = BandSampler::new(model, i, to_level, policy)?;
    let from_counts = run_arm(&plan, &from_sampler, n, &handle.derive(0));
    let to_counts = run_arm(&plan, &to_sampler, n, &handle.derive(1));
    let nf = n as f64;
    let mut value = Vec::with_capacity(plan.levels_o);
    let mut std_err = Vec::with_capacity(plan.levels_o);
    for k in 0..plan.levels_o {
        let pf = from_counts[k] as f64 / nf;
        let pt = to_counts[k] as f64 / nf;
        value.push((to_counts[k] as f64 - from_counts[k] as f64) / nf);
        std_err.push(((pt * (1.0 - pt) + pf * (1.0 - pf)) / nf).sqrt());
    }
    Ok(OracleEstimate {
        value,
        std_err,
        n_samples: n,
        from_counts,
        to_counts,
    })
}

/// Monte Carlo OCE with common random numbers: both arms share each row's
/// noise vector and policy uniform, only the intervention value differs.
/// The standard error comes from the paired per-row differences.
#[allow(clippy::too_many_arguments)]
pub fn oracle_oce_crn(
    model: &LatentDagModel,
    i: usize,
    o: usize,
    from_level: usize,
    to_level: usize,
    policy: Policy,
    n: usize,
    handle: &RngHandle,
) -> Result<OracleEstimate> {
    validate(model, i, o, [from_level, to_level], n)?;
    let plan = SimPlan::new(model, i, o);
    let from_sampler = BandSampler::new(model, i, from_level, policy)?;
    let to_sampler = BandSampler::new(model, i, to_level, policy)?;
    let arm = handle.derive(2);
    let levels_o = plan.levels_o;
    let n_nodes = plan.mu.len();

    // per chunk: from-counts, to-counts and the count of rows landing in
    // the same level under both arms (for the paired variance)
    let (from_counts, to_counts, both) = chunks_of(n)
        .par_iter()
        .map(|&(idx, rows)| {
            let mut rng = arm.derive(idx).rng();
            let mut eps = vec![0.0; n_nodes];
            let mut vals_from = vec![0.0; n_nodes];
            let mut vals_to = vec![0.0; n_nodes];
            let mut cf = vec![0u64; levels_o];
            let mut ct = vec![0u64; levels_o];
            let mut cb = vec![0u64; levels_o];
            for _ in 0..rows {
                let u = open01(&mut rng);
                for &m in &plan.order {
                    if m != plan.i0 {
                        eps[m] = standard_normal(&mut rng);
                    }
                }
                for &m in &plan.order {
                    if m == plan.i0 {
                        vals_from[m] = from_sampler.at(u);
                        vals_to[m] = to_sampler.at(u);
                        continue;
                    }
                    let base = plan.mu[m] + plan.noise_sd[m] * eps[m];
                    let (mut vf, mut vt) = (base, base);
                    for &(h, beta) in &plan.parents[m] {
                        vf += beta * (vals_from[h] - plan.mu[h]);
                        vt += beta * (vals_to[h] - plan.mu[h]);
                    }
                    vals_from[m] = vf;
                    vals_to[m] = vt;
                }
                let lf = level_of(&plan.out_thresholds, vals_from[plan.o0]) as usize;
                let lt = level_of(&plan.out_thresholds, vals_to[plan.o0]) as usize;
                cf[lf] += 1;
                ct[lt] += 1;
                if lf == lt {
                    cb[lf] += 1;
                }
            }
            (cf, ct, cb)
        })
        .reduce(
            || {
                (
                    vec![0u64; levels_o],
                    vec![0u64; levels_o],
                    vec![0u64; levels_o],
                )
            },
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(b.0) {
                    *x += y;
                }
                for (x, y) in a.1.iter_mut().zip(b.1) {
                    *x += y;
                }
                for (x, y) in a.2.iter_mut().zip(b.2) {
                    *x += y;
                }
                a
            },
        );

    let nf = n as f64;
    let mut value = Vec::with_capacity(levels_o);
    let mut std_err = Vec::with_capacity(levels_o);
    for k in 0..levels_o {
        let m1 = (to_counts[k] as f64 - from_counts[k] as f64) / nf;
        // d ∈ {-1, 0, 1}: d² = 1 exactly when the arms disagree about level k
        let m2 = (to_counts[k] + from_counts[k] - 2 * both[k]) as f64 / nf;
        value.push(m1);
        std_err.push(((m2 - m1 * m1).max(0.0) / nf).sqrt());
    }
    Ok(OracleEstimate {
        value,
        std_err,
        n_samples: n,
        from_counts,
        to_counts,
    })
}
