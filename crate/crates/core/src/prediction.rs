//! Closed-form consensus predictions and the finite-n assumption checker.

use crate::dynamics::{one_step_closed_form, InteractionFunction};
use crate::error::{Error, Result};
use crate::hypergraph::{check_probability, Hypergraph3, StateVector};
use crate::motif::{epsilon, find_m, spectral_summary, MotifGraph, SpectralSummary};
use crate::report::{entry, opt_entry, Report};
use crate::summation::pairwise_sum;

/// Consensus of the mean-field topology, where every ordered triple
/// (repetitions included) is present: `a` vertices start at `+1` and
/// `b = n - a` at `-1`.
pub fn mean_field_consensus(n: u64, a: u64, f: &InteractionFunction) -> Result<f64> {
    if n == 0 || a > n {
        return Err(Error::InvalidParameter(format!("need 0 <= a <= n and n >= 1, got a = {a}, n = {n}")));
    }
    let (nf, af, bf) = (n as f64, a as f64, (n - a) as f64);
    let mixed = 2.0 * af * bf * f.discordance();
    let denominator = nf * nf - mixed;
    if !(denominator > 0.0) {
        return Err(Error::SingularDenominator(denominator));
    }
    Ok((af - bf) / nf * (1.0 + mixed / denominator))
}

/// Limit shift `u / (1 - u)` with `u = 2p(1-p)(1 - s(2λ))`.
pub fn shift_theorem(p_init: f64, f: &InteractionFunction) -> Result<f64> {
    check_probability("p_init", p_init)?;
    let u = 2.0 * p_init * (1.0 - p_init) * f.discordance();
    let denominator = 1.0 - u;
    if denominator.abs() < f64::EPSILON {
        return Err(Error::SingularDenominator(denominator));
    }
    Ok(u / denominator)
}

/// `μ̄ = sum_i D_i x_i / sum_i D_i`.
pub fn weighted_average(g: &MotifGraph, x0: &StateVector) -> Result<f64> {
    x0.check_len(g.n())?;
    g.check_no_isolated()?;
    let num = pairwise_sum(g.degrees().iter().zip(&x0.values).map(|(&d, &x)| d as f64 * x));
    Ok(num / g.total_degree() as f64)
}

/// Global shift `σ_λ = sum_i (sum_j W_ij σ_{λ;j}) x_i / sum_i D_i x_i`.
pub fn sigma_lambda_exact(h: &Hypergraph3, g: &MotifGraph, x0: &StateVector, f: &InteractionFunction) -> Result<f64> {
    let local = one_step_closed_form(h, g, x0, f)?;
    sigma_from_local(g, &x0.values, &local.sigma_lambda)
}

pub(crate) fn sigma_from_local(g: &MotifGraph, x: &[f64], local_sigma: &[f64]) -> Result<f64> {
    let denominator = pairwise_sum(g.degrees().iter().zip(x).map(|(&d, &v)| d as f64 * v));
    if denominator.abs() <= 1e-12 * g.total_degree() as f64 {
        return Err(Error::ZeroWeightedSum);
    }
    let numerator = pairwise_sum((0..g.n()).map(|i| {
        let spread: f64 = pairwise_sum(g.row(i).map(|(j, w)| w as f64 * local_sigma[j]));
        spread * x[i]
    }));
    Ok(numerator / denominator)
}

/// Steps after which the linear bound `ν^t √(Δ n)` falls to `target`.
pub fn convergence_time_estimate(summary: &SpectralSummary, target: f64) -> Result<u64> {
    if summary.nu >= 1.0 - 1e-12 {
        return Err(Error::NuNotLessThanOne(summary.nu));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    let ratio = (summary.delta_ratio * summary.n as f64).sqrt() / target;
    if ratio <= 1.0 {
        return Ok(0);
    }
    if summary.nu <= 0.0 {
        return Ok(1);
    }
    Ok((ratio.ln() / (1.0 / summary.nu).ln()).ceil().max(0.0) as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub mu_bar: f64,
    /// `None` when the degree-weighted initial sum vanishes.
    pub sigma_lambda: Option<f64>,
    pub shift_theorem: f64,
    pub predicted_consensus_exact: Option<f64>,
    pub predicted_consensus_theorem: f64,
    pub t_estimate: u64,
    pub target: f64,
}

impl Report for PredictionReport {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("mu_bar", self.mu_bar),
            opt_entry("sigma_lambda", self.sigma_lambda),
            entry("shift_theorem", self.shift_theorem),
            opt_entry("predicted_consensus_exact", self.predicted_consensus_exact),
            entry("predicted_consensus_theorem", self.predicted_consensus_theorem),
            entry("T_estimate", self.t_estimate),
            entry("target", self.target),
        ]
    }
}

/// Every prediction for a ±1 initial state drawn with `p_init`. Refuses
/// disconnected motif graphs.
pub fn predict(
    h: &Hypergraph3,
    g: &MotifGraph,
    x0: &StateVector,
    p_init: f64,
    f: &InteractionFunction,
    target: f64,
) -> Result<PredictionReport> {
    let summary = spectral_summary(g)?;
    if !summary.connected {
        return Err(Error::Disconnected);
    }
    let mu_bar = weighted_average(g, x0)?;
    let sigma_lambda = match sigma_lambda_exact(h, g, x0, f) {
        Ok(s) => Some(s),
        Err(Error::ZeroWeightedSum) => None,
        Err(e) => return Err(e),
    };
    let shift = shift_theorem(p_init, f)?;
    Ok(PredictionReport {
        mu_bar,
        sigma_lambda,
        shift_theorem: shift,
        predicted_consensus_exact: sigma_lambda.map(|s| mu_bar * (1.0 + s)),
        predicted_consensus_theorem: mu_bar * (1.0 + shift),
        t_estimate: convergence_time_estimate(&summary, target)?,
        target,
    })
}

/// Finite-n stand-ins for the asymptotic hypergraph assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionThresholds {
    /// Degree clause: `min_i |N_i| >= degree_factor * ln n`.
    pub degree_factor: f64,
    /// Mixing clause: `M ε <= m_eps_max`.
    pub m_eps_max: f64,
    /// Each `≪` / `<` in the `δ` window is read as "smaller by this factor".
    pub window_factor: f64,
    /// Berry–Esseen clause: `sum D^3 / (sum D^2)^{3/2} <= moment_max`.
    pub moment_max: f64,
}

impl Default for AssumptionThresholds {
    fn default() -> Self {
        AssumptionThresholds { degree_factor: 3.0, m_eps_max: 0.2, window_factor: 5.0, moment_max: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaChoice {
    GeometricMean,
    PowerLaw,
}

impl DeltaChoice {
    fn name(self) -> &'static str {
        match self {
            DeltaChoice::GeometricMean => "geometric_mean",
            DeltaChoice::PowerLaw => "n^(-3/4)",
        }
    }
}

/// Extra clauses for the balanced start `p = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedClauses {
    pub delta: f64,
    pub delta_choice: DeltaChoice,
    pub delta_window_ok: bool,
    pub moment_ratio: f64,
    pub moment_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub n: usize,
    pub min_degree: usize,
    pub degree_ratio: f64,
    pub degree_ok: bool,
    pub connected: bool,
    pub non_bipartite: bool,
    /// Spectral fields are `None` when a vertex is isolated.
    pub nu: Option<f64>,
    pub delta_ratio: Option<f64>,
    pub c: f64,
    pub epsilon: Option<f64>,
    pub m_max: u32,
    pub m: Option<u32>,
    pub m_eps_product: Option<f64>,
    pub m_eps_ok: bool,
    pub extra_p_half: Option<BalancedClauses>,
    pub thresholds: AssumptionThresholds,
    pub verdict: bool,
}

impl Report for AssumptionReport {
    fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![
            entry("n", self.n),
            entry("min_degree", self.min_degree),
            entry("degree_ratio_to_log_n", self.degree_ratio),
            entry("degree_threshold_factor", self.thresholds.degree_factor),
            entry("degree_ok", self.degree_ok),
            entry("connected", self.connected),
            entry("non_bipartite", self.non_bipartite),
            opt_entry("nu", self.nu),
            opt_entry("delta_ratio", self.delta_ratio),
            entry("C", self.c),
            opt_entry("epsilon", self.epsilon),
            entry("m_max", self.m_max),
            opt_entry("M", self.m),
            opt_entry("M_eps_product", self.m_eps_product),
            entry("M_eps_threshold", self.thresholds.m_eps_max),
            entry("M_eps_ok", self.m_eps_ok),
        ];
        if let Some(x) = &self.extra_p_half {
            e.extend([
                entry("delta", x.delta),
                entry("delta_choice", x.delta_choice.name()),
                entry("window_factor", self.thresholds.window_factor),
                entry("delta_window_ok", x.delta_window_ok),
                entry("moment_ratio", x.moment_ratio),
                entry("moment_threshold", self.thresholds.moment_max),
                entry("moment_ok", x.moment_ok),
            ]);
        }
        e.push(entry("verdict", if self.verdict { "pass" } else { "fail" }));
        e
    }
}

pub fn check_assumptions(h: &Hypergraph3, g: &MotifGraph, p_init: f64, c: f64, m_max: u32) -> Result<AssumptionReport> {
    check_assumptions_with(h, g, p_init, c, m_max, &AssumptionThresholds::default())
}

pub fn check_assumptions_with(
    h: &Hypergraph3,
    g: &MotifGraph,
    p_init: f64,
    c: f64,
    m_max: u32,
    thresholds: &AssumptionThresholds,
) -> Result<AssumptionReport> {
    check_probability("p_init", p_init)?;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let n = h.n();
    let log_n = (n as f64).ln();
    let min_degree = h.min_degree();
    let degree_ok = min_degree as f64 >= thresholds.degree_factor * log_n;

    let summary = spectral_summary(g).ok();
    let eps = epsilon(g, c).ok();
    let m = match (&summary, eps) {
        (Some(s), Some(e)) if s.nu < 1.0 - 1e-12 => find_m(s, e, m_max)?,
        _ => None,
    };
    let m_eps_product = m.zip(eps).map(|(m, e)| m as f64 * e);
    let m_eps_ok = m_eps_product.is_some_and(|v| v <= thresholds.m_eps_max);

    let extra_p_half = (p_init == 0.5).then(|| {
        let degrees: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
        let s1 = pairwise_sum(degrees.iter().copied());
        let s2 = pairwise_sum(degrees.iter().map(|d| d * d));
        let s3 = pairwise_sum(degrees.iter().map(|d| d * d * d));
        let moment_ratio = if s2 > 0.0 { s3 / s2.powf(1.5) } else { f64::INFINITY };
        let k = thresholds.window_factor;
        let in_window = |delta: f64| match (m, eps) {
            (Some(m), Some(e)) => {
                let lower = m as f64 * e * e;
                lower <= delta / k && delta <= e / k && delta <= s2.sqrt() / (k * s1)
            }
            _ => false,
        };
        let geometric = match (m, eps) {
            (Some(m), Some(e)) => (m as f64 * e * e * e).sqrt(),
            _ => f64::NAN,
        };
        let (delta, delta_choice) = if in_window(geometric) {
            (geometric, DeltaChoice::GeometricMean)
        } else {
            ((n as f64).powf(-0.75), DeltaChoice::PowerLaw)
        };
        BalancedClauses {
            delta,
            delta_choice,
            delta_window_ok: in_window(delta),
            moment_ratio,
            moment_ok: moment_ratio <= thresholds.moment_max,
        }
    });

    let connected = summary.as_ref().is_some_and(|s| s.connected);
    let non_bipartite = summary.as_ref().is_some_and(|s| !s.bipartite);
    let verdict = degree_ok
        && connected
        && non_bipartite
        && m_eps_ok
        && extra_p_half.as_ref().is_none_or(|x| x.delta_window_ok && x.moment_ok);
    Ok(AssumptionReport {
        n,
        min_degree,
        degree_ratio: min_degree as f64 / log_n,
        degree_ok,
        connected,
        non_bipartite,
        nu: summary.as_ref().map(|s| s.nu),
        delta_ratio: summary.as_ref().map(|s| s.delta_ratio),
        c,
        epsilon: eps,
        m_max,
        m,
        m_eps_product,
        m_eps_ok,
        extra_p_half,
        thresholds: thresholds.clone(),
        verdict,
    })
}

/// Edge probability `max(floor, K (ln n)^{1/3} / n^{1 - 2γ/3})` that makes
/// Erdős–Rényi hypergraphs satisfy the assumptions for large `n`.
pub fn er_edge_probability(n: usize, k: f64, gamma: f64, floor: f64) -> f64 {
    let nf = n as f64;
    (k * nf.ln().cbrt() / nf.powf(1.0 - 2.0 * gamma / 3.0)).max(floor).min(1.0)
}
