//! Nonlinear three-body averaging, its linear limit, the exact first step,
//! the affine rescaling of two-valued states, and the nonlinear residual.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypergraph::{Hypergraph3, StateVector};
use crate::motif::MotifGraph;
use crate::report::{entry, opt_entry, Report};
use crate::summation::{pairwise_sum, PairwiseSum};

#[derive(Debug, Clone, PartialEq)]
pub enum Strength {
    /// `s(x) = e^x`.
    Exponential,
    /// `s(x) = sum_k a_k x^k` with coefficients `a_0, a_1, ..`.
    PowerSeries(Vec<f64>),
}

/// Pair weight `s(λ |x_j - x_k|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionFunction {
    pub kind: Strength,
    pub lambda: f64,
}

impl InteractionFunction {
    pub fn exponential(lambda: f64) -> Self {
        warn_lambda(lambda);
        InteractionFunction { kind: Strength::Exponential, lambda }
    }

    pub fn power_series(coefficients: Vec<f64>, lambda: f64) -> Result<Self> {
        if coefficients.len() < 2 || coefficients[0] != 1.0 || coefficients[1] != 1.0 {
            return Err(Error::InvalidCoefficients(coefficients));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCoefficients(coefficients));
        }
        warn_lambda(lambda);
        Ok(InteractionFunction { kind: Strength::PowerSeries(coefficients), lambda })
    }

    pub fn is_linear(&self) -> bool {
        self.lambda == 0.0
    }

    /// `s(u)`.
    pub fn s(&self, u: f64) -> f64 {
        match &self.kind {
            Strength::Exponential => u.exp(),
            Strength::PowerSeries(a) => a.iter().rev().fold(0.0, |acc, &c| acc * u + c),
        }
    }

    /// Weight of a pair whose states differ by `diff`.
    #[inline]
    pub fn strength(&self, diff: f64) -> f64 {
        self.s(self.lambda * diff.abs())
    }

    /// `1 - s(2λ)`, the weight lost by a discordant ±1 pair.
    pub fn discordance(&self) -> f64 {
        1.0 - self.s(2.0 * self.lambda)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Strength::Exponential => format!("exponential(lambda={})", self.lambda),
            Strength::PowerSeries(a) => format!("power_series(lambda={}, a={a:?})", self.lambda),
        }
    }
}

fn warn_lambda(lambda: f64) {
    if lambda.abs() >= 0.5 {
        log::warn!("|lambda| = {} lies outside the analysed range (-1/2, 1/2)", lambda.abs());
    }
}

fn check_vertices(h: &Hypergraph3, x: &StateVector) -> Result<()> {
    x.check_len(h.n())?;
    match h.first_isolated() {
        Some(i) => Err(Error::IsolatedVertex(i)),
        None => Ok(()),
    }
}

fn update_vertex(h: &Hypergraph3, x: &[f64], f: &InteractionFunction, i: usize) -> Result<f64> {
    let mut num = PairwiseSum::new();
    let mut z = PairwiseSum::new();
    for &[j, k] in h.neighbor_pairs(i) {
        let (xj, xk) = (x[j as usize], x[k as usize]);
        let w = f.strength(xj - xk);
        num.add(w * (xj + xk) * 0.5);
        z.add(w);
    }
    let z = z.total();
    if !z.is_finite() {
        return Err(Error::NonFiniteNormalization { vertex: i, z });
    }
    if !(z > 0.0) {
        return Err(Error::NonpositiveNormalization { vertex: i, z });
    }
    Ok(num.total() / z)
}

/// One synchronous update on the ambient execution strategy.
pub fn step(h: &Hypergraph3, x: &StateVector, f: &InteractionFunction) -> Result<StateVector> {
    step_with(h, x, f, Exec::default())
}

pub fn step_with(h: &Hypergraph3, x: &StateVector, f: &InteractionFunction, exec: Exec) -> Result<StateVector> {
    check_vertices(h, x)?;
    let values = exec
        .map_indices(h.n(), |i| update_vertex(h, &x.values, f, i))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector { values, time: x.time + 1, seed: x.seed })
}

/// `x' = D^{-1} W x`.
pub fn linear_step(g: &MotifGraph, x: &StateVector) -> Result<StateVector> {
    linear_step_with(g, x, Exec::default())
}

pub fn linear_step_with(g: &MotifGraph, x: &StateVector, exec: Exec) -> Result<StateVector> {
    x.check_len(g.n())?;
    g.check_no_isolated()?;
    let values = exec.map_indices(g.n(), |i| {
        pairwise_sum(g.row(i).map(|(j, w)| w as f64 * x.values[j])) / g.degree(i) as f64
    });
    Ok(StateVector { values, time: x.time + 1, seed: x.seed })
}

/// Degree-weighted mean `sum D_i x_i / sum D_i` with `D_i = 2 |N_i|`.
pub(crate) fn degree_weighted_mean(h: &Hypergraph3, x: &[f64]) -> f64 {
    let num = pairwise_sum(h.degrees().zip(x).map(|(d, v)| d as f64 * v));
    let den: usize = h.degrees().sum();
    num / den as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunControl {
    pub tol: f64,
    pub t_max: u64,
    /// Snapshot stride; `None` picks 1 up to 1000 vertices and 10 above.
    pub stride: Option<u64>,
    pub exec: Exec,
}

impl Default for RunControl {
    fn default() -> Self {
        RunControl { tol: 1e-9, t_max: 10_000, stride: None, exec: Exec::default() }
    }
}

impl RunControl {
    fn effective_stride(&self, n: usize) -> u64 {
        self.stride.unwrap_or(if n <= 1000 { 1 } else { 10 }).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// Snapshots at `t = 0`, every stride, and the final step.
    pub states: Vec<StateVector>,
    /// Spread `max - min` at `t = 0, 1, ..`.
    pub spread_history: Vec<f64>,
    pub consensus_value: f64,
    pub steps_to_converge: Option<u64>,
    pub tol: f64,
    pub final_state: StateVector,
}

impl SimulationTrace {
    pub fn final_spread(&self) -> f64 {
        *self.spread_history.last().expect("history holds t = 0")
    }

    pub fn steps_taken(&self) -> u64 {
        self.final_state.time
    }

    /// Long-form CSV `t,vertex,value` over the stored snapshots.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,vertex,value\n");
        for s in &self.states {
            for (i, v) in s.values.iter().enumerate() {
                let _ = writeln!(out, "{},{i},{v:.16e}", s.time);
            }
        }
        out
    }
}

impl Report for SimulationTrace {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("consensus_value", self.consensus_value),
            opt_entry("steps_to_converge", self.steps_to_converge),
            entry("final_spread", self.final_spread()),
            entry("steps_taken", self.steps_taken()),
            entry("tol", self.tol),
        ]
    }
}

/// Iterates [`step`] until the spread is at most `tol` or `t_max` steps
/// have been taken. Running out of steps is not an error.
pub fn run(h: &Hypergraph3, x0: &StateVector, f: &InteractionFunction, control: &RunControl) -> Result<SimulationTrace> {
    if !(control.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", control.tol)));
    }
    if control.t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be at least 1".into()));
    }
    check_vertices(h, x0)?;
    let stride = control.effective_stride(h.n());
    let mut x = StateVector { time: 0, ..x0.clone() };
    let mut states = vec![x.clone()];
    let mut spread_history = vec![x.spread()];
    let mut steps_to_converge = (spread_history[0] <= control.tol).then_some(0);
    while steps_to_converge.is_none() && x.time < control.t_max {
        x = step_with(h, &x, f, control.exec)?;
        let spread = x.spread();
        spread_history.push(spread);
        if spread <= control.tol {
            steps_to_converge = Some(x.time);
        }
        if x.time.is_multiple_of(stride) {
            states.push(x.clone());
        }
    }
    if states.last().map(|s| s.time) != Some(x.time) {
        states.push(x.clone());
    }
    Ok(SimulationTrace {
        consensus_value: degree_weighted_mean(h, &x.values),
        states,
        spread_history,
        steps_to_converge,
        tol: control.tol,
        final_state: x,
    })
}

/// Exact first update from a ±1 state, split per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct OneStepDecomposition {
    /// Number of discordant pairs `{j, k}` in `N_i`.
    pub c: Vec<usize>,
    /// Local weighted average `(1/D_i) sum_j W_ij x_j`.
    pub mu_bar: Vec<f64>,
    /// Local shift `c_i k / (|N_i| - c_i k)` with `k = 1 - s(2λ)`.
    pub sigma_lambda: Vec<f64>,
    pub x1: Vec<f64>,
}

pub fn one_step_closed_form(
    h: &Hypergraph3,
    g: &MotifGraph,
    x0: &StateVector,
    f: &InteractionFunction,
) -> Result<OneStepDecomposition> {
    check_vertices(h, x0)?;
    x0.check_len(g.n())?;
    if let Some(i) = x0.values.iter().position(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::NonBinaryState { vertex: i, value: x0.values[i] });
    }
    let x = &x0.values;
    let k = f.discordance();
    let n = h.n();
    let mut out = OneStepDecomposition {
        c: Vec::with_capacity(n),
        mu_bar: Vec::with_capacity(n),
        sigma_lambda: Vec::with_capacity(n),
        x1: Vec::with_capacity(n),
    };
    for i in 0..n {
        let c = h.neighbor_pairs(i).iter().filter(|&&[j, l]| x[j as usize] != x[l as usize]).count();
        let mu = pairwise_sum(g.row(i).map(|(j, w)| w as f64 * x[j])) / g.degree(i) as f64;
        let denominator = h.degree(i) as f64 - c as f64 * k;
        if !(denominator > 0.0) {
            return Err(Error::SingularLocalNormalization { vertex: i, denominator });
        }
        let sigma = c as f64 * k / denominator;
        out.c.push(c);
        out.mu_bar.push(mu);
        out.sigma_lambda.push(sigma);
        out.x1.push(mu * (1.0 + sigma));
    }
    Ok(out)
}

/// `y = scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    pub fn apply(&self, x: &StateVector) -> StateVector {
        StateVector {
            values: x.values.iter().map(|v| self.scale * v + self.offset).collect(),
            ..x.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescaling {
    pub x0: StateVector,
    pub lambda: f64,
    pub map: AffineMap,
}

/// Maps a state valued in `{lo, hi}` with coupling `lambda_tilde` onto the
/// conjugate ±1 chain. Simulating the returned `(x0, lambda)` and applying
/// `map` reproduces the original chain.
pub fn rescale_to_pm1(y0: &StateVector, lo: f64, hi: f64, lambda_tilde: f64) -> Result<Rescaling> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite lo < hi, got ({lo}, {hi})")));
    }
    let limit = 1.0 / (hi - lo);
    if !(lambda_tilde.abs() < limit) {
        return Err(Error::LambdaOutOfRange { lambda: lambda_tilde, limit });
    }
    let values = y0
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v == hi {
                Ok(1.0)
            } else if v == lo {
                Ok(-1.0)
            } else {
                Err(Error::BadRange { vertex: i, value: v, lo, hi })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = (hi - lo) / 2.0;
    Ok(Rescaling {
        x0: StateVector { values, ..y0.clone() },
        lambda: lambda_tilde * scale,
        map: AffineMap { scale, offset: (lo + hi) / 2.0 },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub vector: Vec<f64>,
    pub norm: f64,
}

/// `R^(t)(x1)`: `t` nonlinear steps from `x1` minus `t` linear steps.
pub fn nonlinear_residual(
    h: &Hypergraph3,
    g: &MotifGraph,
    x1: &StateVector,
    f: &InteractionFunction,
    t: u64,
) -> Result<Residual> {
    nonlinear_residual_with(h, g, x1, f, t, Exec::default())
}

pub fn nonlinear_residual_with(
    h: &Hypergraph3,
    g: &MotifGraph,
    x1: &StateVector,
    f: &InteractionFunction,
    t: u64,
    exec: Exec,
) -> Result<Residual> {
    check_vertices(h, x1)?;
    let mut nonlinear = x1.clone();
    let mut linear = x1.clone();
    for _ in 0..t {
        nonlinear = step_with(h, &nonlinear, f, exec)?;
        linear = linear_step_with(g, &linear, exec)?;
    }
    let vector: Vec<f64> = nonlinear.values.iter().zip(&linear.values).map(|(a, b)| a - b).collect();
    let norm = vector.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(Residual { vector, norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{generate_complete, generate_erdos_renyi, rademacher_init};

    fn single() -> Hypergraph3 {
        Hypergraph3::from_edge_list(3, [[0, 1, 2]]).unwrap().0
    }

    #[test]
    fn power_series_validation() {
        assert!(InteractionFunction::power_series(vec![1.0, 1.0, 0.5], 0.1).is_ok());
        assert!(matches!(
            InteractionFunction::power_series(vec![1.0, 2.0], 0.1),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(InteractionFunction::power_series(vec![1.0], 0.1).is_err());
        let f = InteractionFunction::power_series(vec![1.0, 1.0, 0.5, 1.0 / 6.0], 0.3).unwrap();
        assert!((f.s(0.2) - (1.0 + 0.2 + 0.02 + 0.008 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn single_hyperedge_step() {
        for lambda in [-0.4, 0.0, 0.3] {
            let x = StateVector::new(vec![1.0, 1.0, -1.0]);
            let y = step(&single(), &x, &InteractionFunction::exponential(lambda)).unwrap();
            assert_eq!(y.values, vec![0.0, 0.0, 1.0]);
            assert_eq!(y.time, 1);
        }
    }

    #[test]
    fn constant_is_fixed() {
        let h = generate_erdos_renyi(15, 0.4, 2).unwrap();
        let x = StateVector::constant(15, 0.37);
        let y = step(&h, &x, &InteractionFunction::exponential(0.3)).unwrap();
        assert!(y.values.iter().all(|&v| (v - 0.37).abs() < 1e-15));
    }

    #[test]
    fn isolated_and_length_errors() {
        let (h, _) = Hypergraph3::from_edge_list(4, [[0, 1, 2]]).unwrap();
        let f = InteractionFunction::exponential(0.1);
        assert!(matches!(step(&h, &StateVector::constant(4, 1.0), &f), Err(Error::IsolatedVertex(3))));
        assert!(matches!(step(&single(), &StateVector::constant(4, 1.0), &f), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn nonpositive_normalization_detected() {
        // s(u) = 1 + u - u^2 is negative at u = 2 (λ = 1, |diff| = 2).
        let f = InteractionFunction::power_series(vec![1.0, 1.0, -1.0], 1.0).unwrap();
        let x = StateVector::new(vec![1.0, 1.0, -1.0]);
        let err = step(&single(), &x, &f).unwrap_err();
        assert!(matches!(err, Error::NonpositiveNormalization { vertex: 0, .. }), "{err}");
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let h = generate_erdos_renyi(40, 0.3, 5).unwrap();
        let x = rademacher_init(40, 0.6, 1).unwrap();
        let f = InteractionFunction::exponential(-0.3);
        let a = step_with(&h, &x, &f, Exec::Sequential).unwrap();
        let b = step_with(&h, &x, &f, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_step_examples() {
        let g = MotifGraph::build(&generate_complete(4).unwrap());
        let y = linear_step(&g, &StateVector::constant(4, 1.0)).unwrap();
        assert!(y.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let y = linear_step(&g, &StateVector::new(vec![1.0, 1.0, 1.0, -1.0])).unwrap();
        let expected = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0];
        for (a, b) in y.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_lambda_matches_linear() {
        let h = generate_erdos_renyi(25, 0.3, 9).unwrap();
        let g = MotifGraph::build(&h);
        let f = InteractionFunction::exponential(0.0);
        let mut x = rademacher_init(25, 0.5, 3).unwrap();
        let mut y = x.clone();
        for _ in 0..10 {
            x = step(&h, &x, &f).unwrap();
            y = linear_step(&g, &y).unwrap();
            for (a, b) in x.values.iter().zip(&y.values) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_run_converges_immediately() {
        let h = generate_complete(6).unwrap();
        let tr = run(&h, &StateVector::constant(6, -0.25), &InteractionFunction::exponential(0.2), &RunControl::default())
            .unwrap();
        assert_eq!(tr.steps_to_converge, Some(0));
        assert_eq!(tr.consensus_value, -0.25);
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.spread_history, vec![0.0]);
    }

    #[test]
    fn run_snapshots_and_convergence() {
        let h = generate_erdos_renyi(30, 0.3, 4).unwrap();
        let x0 = rademacher_init(30, 0.7, 8).unwrap();
        let control = RunControl { stride: Some(3), ..RunControl::default() };
        let tr = run(&h, &x0, &InteractionFunction::exponential(-0.2), &control).unwrap();
        let t = tr.steps_to_converge.expect("converges");
        assert!(tr.final_spread() <= 1e-9);
        assert_eq!(tr.spread_history.len() as u64, t + 1);
        assert_eq!(tr.states[0].time, 0);
        assert_eq!(tr.states.last().unwrap().time, t);
        assert!(tr.states.iter().all(|s| s.time % 3 == 0 || s.time == t));
        assert!(tr.states.iter().all(|s| s.max_abs() <= 1.0 + 1e-15));
        assert!(tr.to_csv().starts_with("t,vertex,value\n0,0,"));
    }

    #[test]
    fn run_without_convergence() {
        let h = generate_erdos_renyi(30, 0.3, 4).unwrap();
        let x0 = rademacher_init(30, 0.5, 1).unwrap();
        let control = RunControl { t_max: 2, ..RunControl::default() };
        let tr = run(&h, &x0, &InteractionFunction::exponential(0.1), &control).unwrap();
        assert_eq!(tr.steps_to_converge, None);
        assert_eq!(tr.steps_taken(), 2);
    }

    #[test]
    fn closed_form_hand_cases() {
        let h = single();
        let g = MotifGraph::build(&h);
        let f = InteractionFunction::exponential(0.3);
        let d = one_step_closed_form(&h, &g, &StateVector::constant(3, 1.0), &f).unwrap();
        assert_eq!(d.c, vec![0, 0, 0]);
        assert_eq!(d.sigma_lambda, vec![0.0; 3]);
        assert_eq!(d.x1, vec![1.0; 3]);
        let d = one_step_closed_form(&h, &g, &StateVector::new(vec![1.0, 1.0, -1.0]), &f).unwrap();
        assert_eq!((d.c[0], d.mu_bar[0], d.x1[0]), (1, 0.0, 0.0));
        assert_eq!((d.c[2], d.mu_bar[2], d.x1[2]), (0, 1.0, 1.0));
    }

    #[test]
    fn closed_form_rejects_non_binary() {
        let h = single();
        let g = MotifGraph::build(&h);
        let err = one_step_closed_form(&h, &g, &StateVector::new(vec![1.0, 0.5, -1.0]), &InteractionFunction::exponential(0.1));
        assert!(matches!(err, Err(Error::NonBinaryState { vertex: 1, .. })));
    }

    #[test]
    fn closed_form_matches_step() {
        for seed in 0..10 {
            let h = generate_erdos_renyi(20, 0.3, seed).unwrap();
            if h.first_isolated().is_some() {
                continue;
            }
            let g = MotifGraph::build(&h);
            let x0 = rademacher_init(20, 0.5, 100 + seed).unwrap();
            let f = InteractionFunction::exponential(0.3);
            let d = one_step_closed_form(&h, &g, &x0, &f).unwrap();
            let x1 = step(&h, &x0, &f).unwrap();
            for (a, b) in d.x1.iter().zip(&x1.values) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rescaling_examples() {
        let y = StateVector::new(vec![-1.0, 1.0, 1.0]);
        let r = rescale_to_pm1(&y, -1.0, 1.0, 0.3).unwrap();
        assert_eq!(r.x0.values, y.values);
        assert_eq!(r.lambda, 0.3);
        assert_eq!(r.map, AffineMap { scale: 1.0, offset: 0.0 });

        let y = StateVector::new(vec![0.0, 1.0, 1.0]);
        let r = rescale_to_pm1(&y, 0.0, 1.0, 0.4).unwrap();
        assert_eq!(r.x0.values, vec![-1.0, 1.0, 1.0]);
        assert!((r.lambda - 0.2).abs() < 1e-15);
        assert_eq!(r.map, AffineMap { scale: 0.5, offset: 0.5 });
    }

    #[test]
    fn rescaling_errors() {
        let y = StateVector::new(vec![0.0, 0.5]);
        assert!(matches!(rescale_to_pm1(&y, 0.0, 1.0, 0.1), Err(Error::BadRange { vertex: 1, .. })));
        let y = StateVector::new(vec![0.0, 2.0]);
        assert!(matches!(rescale_to_pm1(&y, 0.0, 2.0, 0.5), Err(Error::LambdaOutOfRange { .. })));
    }

    #[test]
    fn residual_trivial_cases() {
        let h = generate_erdos_renyi(20, 0.4, 1).unwrap();
        let g = MotifGraph::build(&h);
        let x1 = rademacher_init(20, 0.5, 2).unwrap();
        let r = nonlinear_residual(&h, &g, &x1, &InteractionFunction::exponential(0.3), 0).unwrap();
        assert_eq!(r.norm, 0.0);
        let r = nonlinear_residual(&h, &g, &x1, &InteractionFunction::exponential(0.0), 15).unwrap();
        assert!(r.norm <= 1e-12);
        let r = nonlinear_residual(&h, &g, &x1, &InteractionFunction::exponential(0.3), 3).unwrap();
        assert!(r.norm > 0.0);
    }
}
