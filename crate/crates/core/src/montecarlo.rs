//! Ensembles over random ±1 initial states and the empirical concentration
//! and anti-concentration reports built from them.

use std::fmt::Write as _;

use statrs::function::erf::erf;

use crate::dynamics::{
    degree_weighted_mean, linear_step_with, one_step_closed_form, run, step_with, InteractionFunction, RunControl,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypergraph::{check_probability, rademacher_init, Hypergraph3};
use crate::motif::{epsilon, MotifGraph, DEFAULT_C};
use crate::prediction::{shift_theorem, sigma_from_local, weighted_average};
use crate::report::{entry, opt_entry, Report};
use crate::summation::pairwise_sum;

/// Fraction of runs a high-probability clause must hold in.
pub const FRACTION_THRESHOLD: f64 = 0.9;

/// Relative tolerance for the ensemble-mean `σ_λ`.
pub const SIGMA_TOLERANCE: f64 = 0.05;

/// Berry–Esseen constant, upper end of the known interval.
pub const BERRY_ESSEEN_C0: f64 = 0.56;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleParams {
    pub p_init: f64,
    pub runs: u64,
    pub tol: f64,
    pub t_max: u64,
    pub base_seed: u64,
    /// Runs execute concurrently under `Parallel`; each run is sequential.
    pub exec: Exec,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams { p_init: 0.5, runs: 50, tol: 1e-9, t_max: 10_000, base_seed: 0, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub mu_bar: f64,
    /// `None` when the run was discarded because `σ_λ` is undefined.
    pub sigma_lambda: Option<f64>,
    pub consensus: f64,
    pub steps_to_converge: Option<u64>,
    /// `‖R^(t)(x^(1))‖_∞` at `t = probe_time`.
    pub residual_norm: f64,
    /// Convergence step, or `t_max` when the run did not converge.
    pub probe_time: u64,
    pub x1_min: f64,
    pub x1_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub result: std::result::Result<RunMetrics, String>,
}

impl RunRecord {
    pub fn metrics(&self) -> Option<&RunMetrics> {
        self.result.as_ref().ok()
    }
}

/// Mean, sample standard deviation and range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = pairwise_sum(values.iter().copied()) / count as f64;
        let var = if count > 1 {
            pairwise_sum(values.iter().map(|v| (v - mean).powi(2))) / (count - 1) as f64
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Aggregate { count, mean, std: var.sqrt(), min, max })
    }

    pub fn standard_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub p_init: f64,
    pub lambda: f64,
    pub runs: u64,
    /// One record per seed, in seed order.
    pub records: Vec<RunRecord>,
    pub discard_count: usize,
    pub failed_count: usize,
    pub mu_bar: Option<Aggregate>,
    pub sigma_lambda: Option<Aggregate>,
    pub consensus: Option<Aggregate>,
    pub steps_to_converge: Option<Aggregate>,
    pub residual_norm: Option<Aggregate>,
}

impl EnsembleSummary {
    fn from_records(p_init: f64, lambda: f64, records: Vec<RunRecord>) -> Self {
        let ok: Vec<&RunMetrics> = records.iter().filter_map(RunRecord::metrics).collect();
        let collect = |f: &dyn Fn(&RunMetrics) -> Option<f64>| Aggregate::of(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>());
        EnsembleSummary {
            p_init,
            lambda,
            runs: records.len() as u64,
            discard_count: ok.iter().filter(|m| m.sigma_lambda.is_none()).count(),
            failed_count: records.len() - ok.len(),
            mu_bar: collect(&|m| Some(m.mu_bar)),
            sigma_lambda: collect(&|m| m.sigma_lambda),
            consensus: collect(&|m| Some(m.consensus)),
            steps_to_converge: collect(&|m| m.steps_to_converge.map(|s| s as f64)),
            residual_norm: collect(&|m| Some(m.residual_norm)),
            records,
        }
    }

    pub fn successful(&self) -> impl Iterator<Item = &RunMetrics> {
        self.records.iter().filter_map(RunRecord::metrics)
    }

    /// Per-run CSV `seed,mu_bar,sigma_lambda,consensus,steps,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,mu_bar,sigma_lambda,consensus,steps,residual\n");
        for r in &self.records {
            match &r.result {
                Ok(m) => {
                    let sigma = m.sigma_lambda.map_or_else(|| "discarded".to_string(), |s| format!("{s:.16e}"));
                    let steps = m.steps_to_converge.map_or_else(|| "none".to_string(), |s| s.to_string());
                    let _ = writeln!(
                        out,
                        "{},{:.16e},{sigma},{:.16e},{steps},{:.16e}",
                        r.seed, m.mu_bar, m.consensus, m.residual_norm
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},error,error,error,error,error", r.seed);
                }
            }
        }
        out
    }
}

fn aggregate_entries(name: &str, a: &Option<Aggregate>) -> Vec<(String, String)> {
    match a {
        Some(a) => vec![
            entry(format!("{name}.mean"), a.mean),
            entry(format!("{name}.std"), a.std),
            entry(format!("{name}.min"), a.min),
            entry(format!("{name}.max"), a.max),
        ],
        None => vec![entry(format!("{name}.mean"), "none")],
    }
}

impl Report for EnsembleSummary {
    fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![
            entry("runs", self.runs),
            entry("p_init", self.p_init),
            entry("lambda", self.lambda),
            entry("discard_count", self.discard_count),
            entry("failed_count", self.failed_count),
        ];
        e.extend(aggregate_entries("mu_bar", &self.mu_bar));
        e.extend(aggregate_entries("sigma_lambda", &self.sigma_lambda));
        e.extend(aggregate_entries("consensus", &self.consensus));
        e.extend(aggregate_entries("steps_to_converge", &self.steps_to_converge));
        e.extend(aggregate_entries("residual_norm", &self.residual_norm));
        e
    }
}

fn simulate_one(
    h: &Hypergraph3,
    g: &MotifGraph,
    f: &InteractionFunction,
    params: &EnsembleParams,
    seed: u64,
    exec: Exec,
) -> Result<RunMetrics> {
    let x0 = rademacher_init(h.n(), params.p_init, seed)?;
    let mu_bar = weighted_average(g, &x0)?;
    let local = one_step_closed_form(h, g, &x0, f)?;
    let sigma_lambda = match sigma_from_local(g, &x0.values, &local.sigma_lambda) {
        Ok(s) => Some(s),
        Err(Error::ZeroWeightedSum) => None,
        Err(e) => return Err(e),
    };
    let control = RunControl { tol: params.tol, t_max: params.t_max, stride: Some(u64::MAX), exec };
    let trace = run(h, &x0, f, &control)?;
    let probe_time = trace.steps_to_converge.unwrap_or(params.t_max);

    // R^(t)(x1) = x^(t+1) - P^t x^(1); the trace ends at x^(t).
    let x1 = step_with(h, &x0, f, exec)?;
    let nonlinear = step_with(h, &trace.final_state, f, exec)?;
    let mut linear = x1.clone();
    for _ in 0..probe_time {
        linear = linear_step_with(g, &linear, exec)?;
    }
    let residual_norm = nonlinear.values.iter().zip(&linear.values).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));

    Ok(RunMetrics {
        mu_bar,
        sigma_lambda,
        consensus: degree_weighted_mean(h, &trace.final_state.values),
        steps_to_converge: trace.steps_to_converge,
        residual_norm,
        probe_time,
        x1_min: x1.values.iter().copied().fold(f64::INFINITY, f64::min),
        x1_max: x1.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// `params.runs` independent runs with seeds `base_seed, base_seed + 1, ..`.
/// Per-run failures are recorded, not propagated.
pub fn run_ensemble(h: &Hypergraph3, f: &InteractionFunction, params: &EnsembleParams) -> Result<EnsembleSummary> {
    check_probability("p_init", params.p_init)?;
    if params.runs == 0 {
        return Err(Error::InvalidParameter("an ensemble needs at least one run".into()));
    }
    if !(params.tol > 0.0) || params.t_max == 0 {
        return Err(Error::InvalidParameter("tol must be positive and t_max at least 1".into()));
    }
    let g = MotifGraph::build(h);
    let records = params.exec.map_indices(params.runs as usize, |k| {
        let seed = params.base_seed.wrapping_add(k as u64);
        let result = simulate_one(h, &g, f, params, seed, Exec::Sequential).map_err(|e| e.to_string());
        RunRecord { seed, result }
    });
    let summary = EnsembleSummary::from_records(params.p_init, f.lambda, records);
    if summary.failed_count > 0 {
        log::warn!("{} of {} runs failed", summary.failed_count, summary.runs);
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub runs: u64,
    pub theorem_shift: f64,
    /// Runs with a defined `σ_λ`.
    pub sigma_count: usize,
    pub sigma_mean: Option<f64>,
    /// Deviation of the ensemble-mean `σ_λ` from the theorem value, relative
    /// unless the theorem value is zero.
    pub sigma_mean_deviation: Option<f64>,
    pub sigma_max_deviation: Option<f64>,
    pub sigma_fraction_within: f64,
    pub sigma_tolerance: f64,
    pub sigma_ok: bool,
    pub epsilon: f64,
    pub mu_window_fraction: f64,
    pub mu_ok: bool,
    pub gamma: f64,
    /// Window `6γ` for every `|x_i^(1) - μ(1 + σ_λ)|`.
    pub x1_window: f64,
    pub x1_window_fraction: f64,
    pub x1_ok: bool,
    pub fraction_threshold: f64,
    pub verdict: bool,
}

impl Report for ConcentrationReport {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("runs", self.runs),
            entry("theorem_shift", self.theorem_shift),
            entry("sigma_count", self.sigma_count),
            opt_entry("sigma_mean", self.sigma_mean),
            opt_entry("sigma_mean_deviation", self.sigma_mean_deviation),
            opt_entry("sigma_max_deviation", self.sigma_max_deviation),
            entry("sigma_fraction_within", self.sigma_fraction_within),
            entry("sigma_tolerance", self.sigma_tolerance),
            entry("sigma_ok", self.sigma_ok),
            entry("epsilon", self.epsilon),
            entry("mu_window_fraction", self.mu_window_fraction),
            entry("mu_ok", self.mu_ok),
            entry("gamma", self.gamma),
            entry("x1_window", self.x1_window),
            entry("x1_window_fraction", self.x1_window_fraction),
            entry("x1_ok", self.x1_ok),
            entry("fraction_threshold", self.fraction_threshold),
            entry("verdict", if self.verdict { "pass" } else { "fail" }),
        ]
    }
}

/// Checks the ensemble against the concentration of `σ_λ`, of `μ̄` around
/// `μ = 2p - 1`, and of `x^(1)` around `μ(1 + σ_λ)`.
pub fn concentration_report(e: &EnsembleSummary, f: &InteractionFunction, g: &MotifGraph) -> Result<ConcentrationReport> {
    let theorem_shift = shift_theorem(e.p_init, f)?;
    let deviation = |s: f64| {
        if theorem_shift == 0.0 {
            (s - theorem_shift).abs()
        } else {
            ((s - theorem_shift) / theorem_shift).abs()
        }
    };
    let sigmas: Vec<f64> = e.successful().filter_map(|m| m.sigma_lambda).collect();
    let sigma_mean = Aggregate::of(&sigmas).map(|a| a.mean);
    let sigma_mean_deviation = sigma_mean.map(deviation);
    let sigma_max_deviation = sigmas.iter().map(|&s| deviation(s)).reduce(f64::max);
    let runs = e.runs as f64;
    let sigma_fraction_within = sigmas.iter().filter(|&&s| deviation(s) <= SIGMA_TOLERANCE).count() as f64 / runs;

    let eps = epsilon(g, DEFAULT_C)?;
    let mu = 2.0 * e.p_init - 1.0;
    let mu_window_fraction = e.successful().filter(|m| (m.mu_bar - mu).abs() < eps).count() as f64 / runs;
    let gamma = eps / 6.0;
    let x1_window = 6.0 * gamma;
    let x1_window_fraction = e
        .successful()
        .filter(|m| {
            m.sigma_lambda.is_some_and(|s| {
                let centre = mu * (1.0 + s);
                (m.x1_max - centre).abs() <= x1_window && (m.x1_min - centre).abs() <= x1_window
            })
        })
        .count() as f64
        / runs;

    let sigma_ok = sigma_mean_deviation.is_some_and(|d| d <= SIGMA_TOLERANCE);
    let mu_ok = mu_window_fraction >= FRACTION_THRESHOLD;
    let x1_ok = x1_window_fraction >= FRACTION_THRESHOLD;
    Ok(ConcentrationReport {
        runs: e.runs,
        theorem_shift,
        sigma_count: sigmas.len(),
        sigma_mean,
        sigma_mean_deviation,
        sigma_max_deviation,
        sigma_fraction_within,
        sigma_tolerance: SIGMA_TOLERANCE,
        sigma_ok,
        epsilon: eps,
        mu_window_fraction,
        mu_ok,
        gamma,
        x1_window,
        x1_window_fraction,
        x1_ok,
        fraction_threshold: FRACTION_THRESHOLD,
        verdict: sigma_ok && mu_ok && x1_ok,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiConcentrationReport {
    pub a: f64,
    pub runs: u64,
    pub empirical: f64,
    /// Argument `a ΣD / √(ΣD²)` of the folded normal CDF.
    pub normal_argument: f64,
    pub psi0: f64,
    pub c0: f64,
    pub bound: f64,
    pub standard_error: f64,
    pub passed: bool,
}

impl Report for AntiConcentrationReport {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("a", self.a),
            entry("runs", self.runs),
            entry("empirical_fraction", self.empirical),
            entry("normal_argument", self.normal_argument),
            entry("psi0", self.psi0),
            entry("C0", self.c0),
            entry("bound", self.bound),
            entry("standard_error", self.standard_error),
            entry("verdict", if self.passed { "pass" } else { "fail" }),
        ]
    }
}

/// Compares the empirical `Pr(|μ̄| > a)` with the lower bound
/// `1 - Ψ(a ΣD / √(ΣD²)) - 2 C0 ψ0`, allowing two binomial standard errors.
pub fn anticoncentration_report(e: &EnsembleSummary, g: &MotifGraph, a: f64) -> Result<AntiConcentrationReport> {
    if e.p_init != 0.5 {
        return Err(Error::WrongInitProbability(e.p_init));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    let d: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let s1 = pairwise_sum(d.iter().copied());
    let s2 = pairwise_sum(d.iter().map(|v| v * v));
    let s3 = pairwise_sum(d.iter().map(|v| v * v * v));
    let normal_argument = a * s1 / s2.sqrt();
    let psi0 = s3 / s2.powf(1.5);
    let bound = 1.0 - erf(normal_argument / std::f64::consts::SQRT_2) - 2.0 * BERRY_ESSEEN_C0 * psi0;
    let runs = e.runs as f64;
    let empirical = e.successful().filter(|m| m.mu_bar.abs() > a).count() as f64 / runs;
    let q = bound.clamp(0.0, 1.0);
    let standard_error = (q * (1.0 - q) / runs).sqrt();
    Ok(AntiConcentrationReport {
        a,
        runs: e.runs,
        empirical,
        normal_argument,
        psi0,
        c0: BERRY_ESSEEN_C0,
        bound,
        standard_error,
        passed: empirical >= bound - 2.0 * standard_error,
    })
}
