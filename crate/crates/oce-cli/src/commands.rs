//! Subcommand implementations.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use oce::effects::{
    atomic_level_prob, compute_oce, oce_all_shifts, oce_closed_form, oce_cumulative, oce_numeric,
    Approach, InterventionQuery, Policy,
};
use oce::estimate::fit_model;
use oce::oracle::{oracle_oce, oracle_oce_crn};
use oce::rng::RngHandle;
use oce::simulate::{bootstrap_resample, discretise, random_model, sample_latent, SynthConfig};
use oce::special::{bvn_cdf, std_normal_cdf};
use oce::{Dag, Error, LatentDagModel, Result};

use crate::dataset_file::{read_dataset, write_dataset};
use crate::model_file::{read_dag, read_model, write_model};
use crate::report::{summarize, write_records, write_summary, Format, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Closed,
    NumericDist,
    NumericQuant,
}

impl Method {
    fn approach(self) -> Approach {
        match self {
            Method::Closed => Approach::ClosedForm,
            Method::NumericDist => Approach::NumericDistributional,
            Method::NumericQuant => Approach::NumericQuantile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyArg {
    TruncNormal,
    Uniform,
}

impl PolicyArg {
    fn policy(self) -> Policy {
        match self {
            PolicyArg::TruncNormal => Policy::TruncatedNormal,
            PolicyArg::Uniform => Policy::UniformOnBand,
        }
    }
}

/// Seed priority: flag, then the OCE_SEED environment variable, then
/// entropy. Whatever wins is echoed so runs can be replayed.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("OCE_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or_else(rand::random)
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| Error::Data(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn echo_header(out: &mut dyn Write, seed: Option<u64>, started: Instant) -> Result<()> {
    let argv: Vec<String> = std::env::args().collect();
    let res = (|| -> std::io::Result<()> {
        writeln!(out, "# command: {}", argv.join(" "))?;
        match seed {
            Some(s) => writeln!(out, "# seed: {s}")?,
            None => writeln!(out, "# seed: -")?,
        }
        writeln!(
            out,
            "# elapsed_ms: {:.3}",
            started.elapsed().as_secs_f64() * 1e3
        )
    })();
    res.map_err(|e| Error::Data(format!("cannot write report: {e}")))
}

#[derive(clap::Args, Debug)]
pub struct GenerateArgs {
    /// Number of nodes
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
    /// Expected total degree per node
    #[arg(long, default_value_t = 5.0)]
    pub neighbors: f64,
    #[arg(long, default_value_t = 0.4)]
    pub weight_low: f64,
    #[arg(long, default_value_t = 1.0)]
    pub weight_high: f64,
    /// Inclusive level-count range per node, as MIN,MAX
    #[arg(long, value_parser = parse_level_range, default_value = "2,6")]
    pub levels: (usize, usize),
    /// Dirichlet concentration for the cell probabilities
    #[arg(long, default_value_t = 2.0)]
    pub nu: f64,
    /// Dataset rows to draw
    #[arg(long, default_value_t = 500)]
    pub rows: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "model.toml")]
    pub model_out: PathBuf,
    #[arg(long, default_value = "data.csv")]
    pub data_out: PathBuf,
}

fn parse_level_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| "expected MIN,MAX".to_string())?;
    let lo: usize = lo.trim().parse().map_err(|_| "MIN is not an integer")?;
    let hi: usize = hi.trim().parse().map_err(|_| "MAX is not an integer")?;
    if lo < 2 || hi < lo {
        return Err(format!("invalid level range ({lo}, {hi})"));
    }
    Ok((lo, hi))
}

pub fn run_generate(args: &GenerateArgs) -> Result<()> {
    if args.rows == 0 {
        return Err(Error::InvalidParam("need at least one row".into()));
    }
    let seed = resolve_seed(args.seed);
    let cfg = SynthConfig {
        nodes: args.nodes,
        expected_neighbors: args.neighbors,
        weight_low: args.weight_low,
        weight_high: args.weight_high,
        level_min: args.levels.0,
        level_max: args.levels.1,
        nu: args.nu,
    };
    let mut rng = RngHandle::new(seed).rng();
    let model = random_model(&cfg, &mut rng)?;
    let latent = sample_latent(&model, args.rows, &mut rng);
    let data = discretise(&latent, &model)?;
    write_model(&args.model_out, &model)?;
    write_dataset(&args.data_out, &data, model.dag().labels())?;
    println!("seed: {seed}");
    println!(
        "model: {} ({} nodes, {} edges)",
        args.model_out.display(),
        model.node_count(),
        model.dag().edge_count()
    );
    println!(
        "data: {} ({} rows x {} columns)",
        args.data_out.display(),
        data.rows(),
        data.cols()
    );
    Ok(())
}

#[derive(clap::Args, Debug)]
pub struct EffectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Intervention node (1-based)
    #[arg(short = 'i', long)]
    pub intervention: usize,
    /// Outcome node (1-based)
    #[arg(short = 'o', long)]
    pub outcome: usize,
    /// Level shifted away from (1-based index)
    #[arg(long)]
    pub from: Option<usize>,
    /// Level shifted to (1-based index)
    #[arg(long)]
    pub to: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = PolicyArg::TruncNormal)]
    pub policy: PolicyArg,
    /// Emit the full L_i x (L_i - 1) x L_o shift tensor
    #[arg(long, conflicts_with_all = ["from", "to", "cumulative"])]
    pub all_shifts: bool,
    /// Emit the single cumulative effect P[X_o >= level j] instead
    #[arg(long, value_name = "J")]
    pub cumulative: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_effect(args: &EffectArgs) -> Result<()> {
    let started = Instant::now();
    let model = read_model(&args.model)?;
    let (i, o) = (args.intervention, args.outcome);
    let mut records = Vec::new();
    if args.all_shifts {
        let shifts = oce_all_shifts(&model, i, o, args.policy.policy(), args.method.approach())?;
        for (l, l_prime, table) in shifts {
            for (k, &value) in table.values.iter().enumerate() {
                records.push(Record {
                    rep: None,
                    i,
                    o,
                    l,
                    l_prime,
                    k: k + 1,
                    value,
                    method: args.method.approach().as_str(),
                    std_err: None,
                });
            }
        }
    } else {
        let (from, to) = match (args.from, args.to) {
            (Some(f), Some(t)) => (f, t),
            _ => {
                return Err(Error::Query(
                    "--from and --to are required unless --all-shifts is given".into(),
                ))
            }
        };
        if let Some(j) = args.cumulative {
            if args.method != Method::Closed {
                return Err(Error::Query(
                    "cumulative effects are evaluated in closed form; drop --method".into(),
                ));
            }
            let value = oce_cumulative(&model, i, o, from, to, j)?;
            records.push(Record {
                rep: None,
                i,
                o,
                l: from,
                l_prime: to,
                k: j,
                value,
                method: "closed",
                std_err: None,
            });
        } else {
            let query = InterventionQuery {
                i,
                o,
                from_level: from,
                to_level: to,
                policy: args.policy.policy(),
                approach: args.method.approach(),
            };
            let table = compute_oce(&model, query)?;
            for (k, &value) in table.values.iter().enumerate() {
                records.push(Record {
                    rep: None,
                    i,
                    o,
                    l: from,
                    l_prime: to,
                    k: k + 1,
                    value,
                    method: args.method.approach().as_str(),
                    std_err: None,
                });
            }
        }
    }
    let mut out = open_out(args.out.as_ref())?;
    echo_header(&mut *out, None, started)?;
    write_records(&mut *out, &records, args.format)
}

#[derive(clap::Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short = 'i', long)]
    pub intervention: usize,
    #[arg(short = 'o', long)]
    pub outcome: usize,
    #[arg(long)]
    pub from: usize,
    #[arg(long)]
    pub to: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::TruncNormal)]
    pub policy: PolicyArg,
    /// Monte Carlo draws per arm
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// Couple the arms through common random numbers
    #[arg(long)]
    pub crn: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_oracle(args: &OracleArgs) -> Result<()> {
    let started = Instant::now();
    let model = read_model(&args.model)?;
    let seed = resolve_seed(args.seed);
    let handle = RngHandle::new(seed);
    let run = if args.crn { oracle_oce_crn } else { oracle_oce };
    let est = run(
        &model,
        args.intervention,
        args.outcome,
        args.from,
        args.to,
        args.policy.policy(),
        args.draws,
        &handle,
    )?;
    let records: Vec<Record> = est
        .value
        .iter()
        .zip(&est.std_err)
        .enumerate()
        .map(|(k, (&value, &se))| Record {
            rep: None,
            i: args.intervention,
            o: args.outcome,
            l: args.from,
            l_prime: args.to,
            k: k + 1,
            value,
            method: "oracle",
            std_err: Some(se),
        })
        .collect();
    let mut out = open_out(args.out.as_ref())?;
    echo_header(&mut *out, Some(seed), started)?;
    write_records(&mut *out, &records, args.format)
}

#[derive(clap::Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model file providing the known graph (weights ignored)
    #[arg(long)]
    pub dag: PathBuf,
    #[arg(long, default_value = "fitted.toml")]
    pub model_out: PathBuf,
}

pub fn run_estimate(args: &EstimateArgs) -> Result<()> {
    let (data, _labels) = read_dataset(&args.data)?;
    let dag = read_dag(&args.dag)?;
    let (model, params) = fit_model(&data, &dag)?;
    write_model(&args.model_out, &model)?;
    println!(
        "fitted {} nodes / {} edges from {} rows -> {}",
        dag.node_count(),
        dag.edge_count(),
        data.rows(),
        args.model_out.display()
    );
    if let Some(repair) = params.repair {
        println!(
            "note: pairwise correlation matrix was not positive definite \
             (min eigenvalue {:.3e}); eigenvalues floored at 1e-8",
            repair.min_eigenvalue
        );
    }
    Ok(())
}

#[derive(clap::Args, Debug)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model file providing the known graph (weights ignored)
    #[arg(long)]
    pub dag: PathBuf,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short = 'i', long)]
    pub intervention: usize,
    #[arg(short = 'o', long)]
    pub outcome: usize,
    #[arg(long)]
    pub from: usize,
    #[arg(long)]
    pub to: usize,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    /// Write every replicate's records (CSV) here
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_bootstrap(args: &BootstrapArgs) -> Result<()> {
    let started = Instant::now();
    if args.reps == 0 {
        return Err(Error::InvalidParam("need at least one replicate".into()));
    }
    let (data, _labels) = read_dataset(&args.data)?;
    let dag = read_dag(&args.dag)?;
    let seed = resolve_seed(args.seed);
    let handle = RngHandle::new(seed);
    let query = InterventionQuery {
        i: args.intervention,
        o: args.outcome,
        from_level: args.from,
        to_level: args.to,
        policy: Policy::TruncatedNormal,
        approach: args.method.approach(),
    };
    // one derived stream per replicate: resample, refit, recompute
    let results: Vec<Result<Vec<f64>>> = (0..args.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = handle.derive(rep as u64).rng();
            let sample = bootstrap_resample(&data, &mut rng);
            let (model, _) = fit_model(&sample, &dag)?;
            Ok(compute_oce(&model, query)?.values)
        })
        .collect();

    let mut records = Vec::new();
    let mut values = Vec::new();
    let mut failures = Vec::new();
    for (rep, result) in results.into_iter().enumerate() {
        match result {
            Ok(table) => {
                for (k, &value) in table.iter().enumerate() {
                    records.push(Record {
                        rep: Some(rep),
                        i: args.intervention,
                        o: args.outcome,
                        l: args.from,
                        l_prime: args.to,
                        k: k + 1,
                        value,
                        method: args.method.approach().as_str(),
                        std_err: None,
                    });
                }
                values.push(table);
            }
            Err(e) => failures.push((rep, e)),
        }
    }
    if let Some(path) = &args.records {
        let mut out = open_out(Some(path))?;
        write_records(&mut *out, &records, Format::Csv)?;
    }
    let mut out = open_out(args.out.as_ref())?;
    echo_header(&mut *out, Some(seed), started)?;
    let failed_list: Vec<String> = failures.iter().map(|(rep, _)| rep.to_string()).collect();
    writeln!(
        out,
        "# replicates: {} ok, {} failed{}",
        values.len(),
        failures.len(),
        if failed_list.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed_list.join(", "))
        }
    )
    .map_err(|e| Error::Data(format!("cannot write report: {e}")))?;
    if 2 * failures.len() > args.reps {
        let (rep, e) = &failures[0];
        return Err(Error::Estimation(format!(
            "{} of {} bootstrap replicates failed to fit (first: replicate {rep}: {e})",
            failures.len(),
            args.reps
        )));
    }
    write_summary(&mut *out, &summarize(&values), args.format)
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// Draws for the empirical three-variable contingency table
    #[arg(long, default_value_t = 10_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 20_002)]
    pub seed: u64,
}

struct Check {
    name: &'static str,
    computed: f64,
    expected: f64,
    tol: f64,
}

impl Check {
    fn passed(&self) -> bool {
        (self.computed - self.expected).abs() <= self.tol
    }
}

fn binary_reference_model() -> LatentDagModel {
    LatentDagModel::new(
        Dag::new(2, [(1, 2)]).unwrap(),
        vec![0.0; 2],
        [((1, 2), 0.5)],
        vec![1.0; 2],
        vec![vec![0.2], vec![0.4]],
    )
    .expect("reference model is valid")
}

fn three_binary_reference_model() -> LatentDagModel {
    LatentDagModel::new(
        Dag::new(3, [(1, 2), (1, 3), (2, 3)]).unwrap(),
        vec![0.0; 3],
        [((1, 2), 0.5), ((1, 3), 0.8), ((2, 3), 0.9)],
        vec![1.0; 3],
        vec![vec![1.2], vec![2.4], vec![3.3]],
    )
    .expect("reference model is valid")
}

/// Built-in reproduction of the two reference cases, with per-value
/// deltas. Returns an error (exit code 4) if any check misses its
/// tolerance.
pub fn run_verify(args: &VerifyArgs) -> Result<()> {
    let mut checks = Vec::new();

    // ---- two binary variables -------------------------------------
    let binary = binary_reference_model();
    let closed = oce_closed_form(&binary, 1, 2, 1, 2)?;
    checks.push(Check {
        name: "binary closed level 0",
        computed: closed.values[0],
        expected: -0.281642,
        tol: 1e-4,
    });
    checks.push(Check {
        name: "binary closed level 1",
        computed: closed.values[1],
        expected: 0.281642,
        tol: 1e-4,
    });
    for (method, expected0, expected1) in [
        (Method::NumericDist, -0.2816425, 0.281642),
        (Method::NumericQuant, -0.2816404, 0.2816419),
    ] {
        let table = oce_numeric(
            &binary,
            InterventionQuery {
                i: 1,
                o: 2,
                from_level: 1,
                to_level: 2,
                policy: Policy::TruncatedNormal,
                approach: method.approach(),
            },
        )?;
        let tag = method.approach().as_str();
        checks.push(Check {
            name: match tag {
                "numeric-dist" => "binary numeric-dist level 0",
                _ => "binary numeric-quant level 0",
            },
            computed: table.values[0],
            expected: expected0,
            tol: 1e-4,
        });
        checks.push(Check {
            name: match tag {
                "numeric-dist" => "binary numeric-dist level 1",
                _ => "binary numeric-quant level 1",
            },
            computed: table.values[1],
            expected: expected1,
            tol: 1e-4,
        });
    }
    // contingency-table risk difference from bivariate-normal cells
    let bundle = binary.covariance()?;
    let sd2 = bundle.marginal_sd(2);
    let corr = bundle.sigma_entry(1, 2) / sd2;
    let delta = bvn_cdf(0.2, 0.4 / sd2, corr)?;
    let beta = std_normal_cdf(0.2) - delta;
    let upsilon = std_normal_cdf(0.4 / sd2) - delta;
    let theta = 1.0 - delta - beta - upsilon;
    checks.push(Check {
        name: "binary contingency risk difference vs closed",
        computed: upsilon / (upsilon + theta) - delta / (delta + beta),
        expected: closed.values[0],
        tol: 1e-6,
    });

    // ---- three binary variables ------------------------------------
    let three = three_binary_reference_model();
    let closed3 = oce_closed_form(&three, 2, 3, 1, 2)?;
    checks.push(Check {
        name: "three-binary closed level 0",
        computed: closed3.values[0],
        expected: -0.2590655,
        tol: 1e-3,
    });
    checks.push(Check {
        name: "three-binary closed level 1",
        computed: closed3.values[1],
        expected: 0.2590634,
        tol: 1e-3,
    });

    let risk_diff_mc = three_binary_mc_risk_difference(&three, args.draws, args.seed)?;
    checks.push(Check {
        name: "three-binary empirical risk difference",
        computed: risk_diff_mc,
        expected: -0.3617032,
        tol: 5e-3,
    });

    let mut all_ok = true;
    for c in &checks {
        let ok = c.passed();
        all_ok &= ok;
        println!(
            "{:<48} computed {:>12.7} expected {:>12.7} |delta| {:.3e} tol {:.0e} {}",
            c.name,
            c.computed,
            c.expected,
            (c.computed - c.expected).abs(),
            c.tol,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    // the latent effect must *disagree* with the raw risk difference
    let gap = (closed3.values[0] - risk_diff_mc).abs();
    let gap_ok = gap > 0.05;
    all_ok &= gap_ok;
    println!(
        "{:<48} gap {:.4} (must exceed 0.05) {}",
        "three-binary latent vs empirical disagreement",
        gap,
        if gap_ok { "PASS" } else { "FAIL" }
    );

    if all_ok {
        println!("VERIFY: PASS ({} checks)", checks.len() + 1);
        Ok(())
    } else {
        println!("VERIFY: FAIL");
        Err(Error::Numeric("verification failed".into()))
    }
}

fn three_binary_mc_risk_difference(model: &LatentDagModel, draws: usize, seed: u64) -> Result<f64> {
    let batch = 100_000usize.min(draws.max(1));
    let mut rng = RngHandle::new(seed).rng();
    let mut cells = [0u64; 8];
    let mut done = 0usize;
    while done < draws {
        let rows = batch.min(draws - done);
        let latent = sample_latent(model, rows, &mut rng);
        let data = discretise(&latent, model)?;
        for r in 0..rows {
            let idx = (data.level(r, 1) as usize) << 2
                | (data.level(r, 2) as usize) << 1
                | data.level(r, 3) as usize;
            cells[idx] += 1;
        }
        done += rows;
    }
    let p = |idx: usize| cells[idx] as f64 / draws as f64;
    let p_x1 = p(0b100) + p(0b101) + p(0b110) + p(0b111);
    let p3 = |x1: usize, x2: usize| {
        let hi = p(x1 << 2 | x2 << 1 | 1);
        let lo = p(x1 << 2 | x2 << 1);
        hi / (hi + lo)
    };
    Ok(((1.0 - p3(0, 1)) * (1.0 - p_x1) + (1.0 - p3(1, 1)) * p_x1)
        - ((1.0 - p3(0, 0)) * (1.0 - p_x1) + (1.0 - p3(1, 0)) * p_x1))
}

/// Atomic-intervention probe used by the `atomic` subcommand.
#[derive(clap::Args, Debug)]
pub struct AtomicArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short = 'i', long)]
    pub intervention: usize,
    #[arg(short = 'o', long)]
    pub outcome: usize,
    /// Latent value to pin the intervention node at
    #[arg(long)]
    pub value: f64,
}

pub fn run_atomic(args: &AtomicArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let levels = model.levels(args.outcome);
    println!("k,probability");
    for k in 1..=levels {
        let p = atomic_level_prob(&model, args.intervention, args.outcome, args.value, k)?;
        println!("{k},{p}");
    }
    Ok(())
}
