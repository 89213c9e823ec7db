//! Discrete-time nonlinear three-body averaging on 3-uniform hypergraphs.
//!
//! Every vertex repeatedly replaces its state by a weighted average of the
//! midpoints of its neighbor pairs, each pair weighted by `s(λ|x_j - x_k|)`.
//! The crate provides the hypergraph model and generators, the triangle motif
//! graph with its spectral quantities, the nonlinear and linear engines,
//! closed-form predictions of the consensus value, an assumption checker, and
//! Monte Carlo ensembles for the concentration statements.
//!
//! Per-vertex updates and ensemble runs use rayon when the `parallel` feature
//! is enabled (the default). Every result is independent of the thread
//! schedule: each vertex sums its neighbor pairs in a fixed order, and
//! ensemble records are reduced in seed order.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod hypergraph;
pub mod io;
pub mod montecarlo;
pub mod motif;
pub mod prediction;
pub mod report;
mod summation;

pub use dynamics::{
    linear_step, nonlinear_residual, one_step_closed_form, rescale_to_pm1, run, step, step_with,
    AffineMap, InteractionFunction, OneStepDecomposition, Rescaling, Residual, RunControl,
    SimulationTrace, Strength,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use hypergraph::{
    generate_complete, generate_erdos_renyi, generate_torus, rademacher_init, Hypergraph3,
    StateVector, RNG_NAME,
};
pub use montecarlo::{
    anticoncentration_report, concentration_report, run_ensemble, AntiConcentrationReport,
    ConcentrationReport, EnsembleParams, EnsembleSummary, RunMetrics, RunRecord,
};
pub use motif::{
    epsilon, er_spectrum_certificate, find_m, spectral_comparison_certificate, spectral_summary,
    ComparisonCertificate, ErSpectrumCertificate, MotifGraph, SpectralSummary, DEFAULT_C,
    EIGEN_TOL,
};
pub use prediction::{
    check_assumptions, check_assumptions_with, convergence_time_estimate, mean_field_consensus,
    predict, shift_theorem, sigma_lambda_exact, weighted_average, AssumptionReport,
    AssumptionThresholds, PredictionReport,
};
pub use report::Report;
