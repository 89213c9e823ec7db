//! Triangle motif graph `W`, its degrees `D`, the random-walk matrix
//! `P = D^{-1} W`, and the spectral quantities built on them.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph3;
use crate::report::{entry, opt_entry, Report};

/// Tolerance for every eigenvalue comparison.
pub const EIGEN_TOL: f64 = 1e-9;

/// Default constant in `ε`, the smallest round value above `√18`.
pub const DEFAULT_C: f64 = 4.3;

/// Largest size for which the full spectrum is computed densely.
pub const DENSE_LIMIT: usize = 2000;

/// Weighted motif graph in compressed sparse rows.
///
/// `W_ij` counts the hyperedges containing both `i` and `j`; the diagonal is
/// zero and `D_i = sum_j W_ij = 2 |N_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifGraph {
    n: usize,
    row_offsets: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<u32>,
    degree: Vec<u64>,
}

impl MotifGraph {
    pub fn build(h: &Hypergraph3) -> Self {
        let n = h.n();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut degree = Vec::with_capacity(n);
        let mut scratch: Vec<u32> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend(h.neighbor_pairs(i).iter().flatten());
            scratch.sort_unstable();
            for run in scratch.chunk_by(|a, b| a == b) {
                cols.push(run[0]);
                weights.push(run.len() as u32);
            }
            row_offsets.push(cols.len());
            degree.push(2 * h.degree(i) as u64);
        }
        MotifGraph { n, row_offsets, cols, weights, degree }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero entries `(j, W_ij)` of row `i`, ascending in `j`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.cols[r.clone()].iter().zip(&self.weights[r]).map(|(&j, &w)| (j as usize, w))
    }

    pub fn weight(&self, i: usize, j: usize) -> u32 {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.weights[r.start + k],
            Err(_) => 0,
        }
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degree
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.degree[i]
    }

    pub fn total_degree(&self) -> u64 {
        self.degree.iter().sum()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.cols.len()
    }

    pub fn check_no_isolated(&self) -> Result<()> {
        match self.degree.iter().position(|&d| d == 0) {
            Some(i) => Err(Error::IsolatedVertex(i)),
            None => Ok(()),
        }
    }

    pub fn dense_w(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                m[(i, j)] = w as f64;
            }
        }
        m
    }

    /// Dense `P = D^{-1} W`.
    pub fn dense_p(&self) -> Result<DMatrix<f64>> {
        self.check_no_isolated()?;
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let d = self.degree[i] as f64;
            for (j, w) in self.row(i) {
                m[(i, j)] = w as f64 / d;
            }
        }
        Ok(m)
    }

    /// Dense `D^{-1/2} W D^{-1/2}`, which shares its spectrum with `P`.
    pub fn dense_normalized(&self) -> Result<DMatrix<f64>> {
        self.check_no_isolated()?;
        let inv_sqrt: Vec<f64> = self.degree.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                m[(i, j)] = w as f64 * inv_sqrt[i] * inv_sqrt[j];
            }
        }
        Ok(m)
    }

    fn components_and_bipartite(&self) -> (usize, bool) {
        let mut color = vec![u8::MAX; self.n];
        let mut components = 0;
        let mut bipartite = true;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if color[s] != u8::MAX {
                continue;
            }
            components += 1;
            color[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for (u, _) in self.row(v) {
                    if color[u] == u8::MAX {
                        color[u] = 1 - color[v];
                        queue.push_back(u);
                    } else if color[u] == color[v] {
                        bipartite = false;
                    }
                }
            }
        }
        (components, bipartite)
    }

    /// Whether the nonzero pattern of `W` is connected.
    pub fn is_connected(&self) -> bool {
        self.components_and_bipartite().0 == 1
    }

    /// Whether the nonzero pattern of `W` admits a proper 2-coloring.
    pub fn is_bipartite(&self) -> bool {
        self.components_and_bipartite().1
    }

    /// `y = D^{-1/2} W D^{-1/2} x` without forming the matrix.
    fn normalized_matvec(&self, inv_sqrt: &[f64], x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self.row(i).map(|(j, w)| w as f64 * inv_sqrt[j] * x[j]).sum();
            *yi = s * inv_sqrt[i];
        }
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Spectrum of `W`, sorted descending.
pub fn spectrum_w(g: &MotifGraph) -> Vec<f64> {
    sorted_desc(SymmetricEigen::new(g.dense_w()).eigenvalues.iter().copied().collect())
}

/// Spectrum of `P` via its symmetric normalization, sorted descending.
pub fn spectrum_p(g: &MotifGraph) -> Result<Vec<f64>> {
    let s = g.dense_normalized()?;
    Ok(sorted_desc(SymmetricEigen::new(s).eigenvalues.iter().copied().collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub n: usize,
    /// Spectrum of `P`, descending. `None` above [`DENSE_LIMIT`], where only
    /// `nu` is computed.
    pub eigenvalues_p: Option<Vec<f64>>,
    pub nu: f64,
    pub delta_ratio: f64,
    pub connected: bool,
    pub bipartite: bool,
    pub d_min: u64,
    pub d_max: u64,
}

impl Report for SpectralSummary {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("n", self.n),
            entry("nu", self.nu),
            entry("delta_ratio", self.delta_ratio),
            entry("d_min", self.d_min),
            entry("d_max", self.d_max),
            entry("connected", self.connected),
            entry("bipartite", self.bipartite),
            opt_entry("lambda_2", self.eigenvalues_p.as_ref().map(|e| e[1])),
            opt_entry("lambda_n", self.eigenvalues_p.as_ref().and_then(|e| e.last().copied())),
        ]
    }
}

pub fn spectral_summary(g: &MotifGraph) -> Result<SpectralSummary> {
    spectral_summary_with_limit(g, DENSE_LIMIT)
}

pub fn spectral_summary_with_limit(g: &MotifGraph, dense_limit: usize) -> Result<SpectralSummary> {
    g.check_no_isolated()?;
    let (components, bipartite) = g.components_and_bipartite();
    let d_min = *g.degree.iter().min().unwrap();
    let d_max = *g.degree.iter().max().unwrap();
    let (eigenvalues_p, nu) = if g.n <= dense_limit {
        let ev = spectrum_p(g)?;
        let nu = ev[1].abs().max(ev[g.n - 1].abs()).min(1.0);
        (Some(ev), nu)
    } else {
        (None, second_eigenvalue_iterative(g).min(1.0))
    };
    Ok(SpectralSummary {
        n: g.n,
        eigenvalues_p,
        nu,
        delta_ratio: d_max as f64 / d_min as f64,
        connected: components == 1,
        bipartite,
        d_min,
        d_max,
    })
}

/// `ν` by block orthogonal iteration on `D^{-1/2} W D^{-1/2}`, deflated
/// against its top eigenvector `√D / ‖√D‖`.
///
/// Stops once the Ritz pair of largest magnitude has residual below
/// `1e-10`. For a symmetric operator the residual bounds the distance to an
/// eigenvalue.
pub fn second_eigenvalue_iterative(g: &MotifGraph) -> f64 {
    const BLOCK: usize = 4;
    const MAX_ITERS: usize = 200_000;
    let n = g.n;
    let b = BLOCK.min(n - 1);
    let inv_sqrt: Vec<f64> = g.degree.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let top = {
        let v = DVector::from_iterator(n, g.degree.iter().map(|&d| (d as f64).sqrt()));
        let norm = v.norm();
        v / norm
    };
    let deflate = |m: &mut DMatrix<f64>| {
        for mut c in m.column_iter_mut() {
            let proj = c.dot(&top);
            c.axpy(-proj, &top, 1.0);
        }
    };
    let apply = |q: &DMatrix<f64>| {
        let mut out = DMatrix::zeros(n, q.ncols());
        let mut buf = vec![0.0; n];
        for k in 0..q.ncols() {
            g.normalized_matvec(&inv_sqrt, q.column(k).as_slice(), &mut buf);
            out.column_mut(k).copy_from_slice(&buf);
        }
        out
    };
    // Deterministic, generic starting block.
    let mut q = DMatrix::from_fn(n, b, |i, k| ((1 + i * (2 * k + 3)) as f64 * 0.618_033_988_749_895).fract() - 0.5);
    deflate(&mut q);
    q = q.qr().q();
    let mut estimate = 0.0;
    for iter in 0..MAX_ITERS {
        let mut z = apply(&q);
        deflate(&mut z);
        if iter % 8 == 0 {
            let t = q.transpose() * &z;
            let t = (&t + t.transpose()) * 0.5;
            let eig = SymmetricEigen::new(t);
            let (k, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            let y = eig.eigenvectors.column(k);
            let ritz = &q * y;
            let residual = (&z * y - &ritz * theta).norm();
            estimate = theta.abs();
            if residual < 1e-10 {
                return estimate;
            }
        }
        q = z.qr().q();
    }
    log::warn!("orthogonal iteration for nu did not converge; returning last Ritz value");
    estimate
}

/// Per-index comparison between the spectra of `P` and of `W` rescaled by
/// `2 / (d_max + d_min)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCertificate {
    pub lambda_w: Vec<f64>,
    pub lambda_p: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: f64,
    pub max_lhs: f64,
    pub passed: bool,
}

impl Report for ComparisonCertificate {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("certificate", "adjacency_vs_transition"),
            entry("n", self.lhs.len()),
            entry("rhs", self.rhs),
            entry("max_lhs", self.max_lhs),
            entry("tolerance", EIGEN_TOL),
            entry("passed", self.passed),
        ]
    }
}

pub fn spectral_comparison_certificate(g: &MotifGraph) -> Result<ComparisonCertificate> {
    let lambda_p = spectrum_p(g)?;
    let lambda_w = spectrum_w(g);
    let d_min = *g.degree.iter().min().unwrap() as f64;
    let d_max = *g.degree.iter().max().unwrap() as f64;
    let c = 2.0 / (d_max + d_min);
    let rhs = (d_max / d_min) * (d_max - d_min) / (d_max + d_min);
    let lhs: Vec<f64> = lambda_p.iter().zip(&lambda_w).map(|(p, w)| (p - c * w).abs()).collect();
    let max_lhs = lhs.iter().copied().fold(0.0, f64::max);
    Ok(ComparisonCertificate { passed: max_lhs <= rhs + EIGEN_TOL, lambda_w, lambda_p, lhs, rhs, max_lhs })
}

/// Checks the Erdős–Rényi spectral window: the top eigenvalue of `W` near
/// `p (n-2)(n-1)`, every other near `-p (n-2)`, both within
/// `√(n ln n / p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErSpectrumCertificate {
    pub p_edge: f64,
    pub bound: f64,
    pub lambda_1: f64,
    pub expected_lambda_1: f64,
    pub expected_bulk: f64,
    /// `bound - |deviation|` per eigenvalue of `W`, descending order; negative
    /// entries are violations.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub max_bulk_deviation: f64,
    pub passed: bool,
}

impl Report for ErSpectrumCertificate {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            entry("certificate", "erdos_renyi_spectrum"),
            entry("p_edge", self.p_edge),
            entry("bound", self.bound),
            entry("lambda_1", self.lambda_1),
            entry("expected_lambda_1", self.expected_lambda_1),
            entry("expected_bulk", self.expected_bulk),
            entry("max_bulk_deviation", self.max_bulk_deviation),
            entry("min_margin", self.min_margin),
            entry("passed", self.passed),
        ]
    }
}

pub fn er_spectrum_certificate(g: &MotifGraph, p_edge: f64) -> Result<ErSpectrumCertificate> {
    if !(p_edge > 0.0 && p_edge <= 1.0) {
        return Err(Error::InvalidProbability { name: "p_edge", value: p_edge });
    }
    let n = g.n as f64;
    let lw = spectrum_w(g);
    let bound = (n * n.ln() / p_edge).sqrt();
    let expected_lambda_1 = p_edge * (n - 2.0) * (n - 1.0);
    let expected_bulk = -p_edge * (n - 2.0);
    let margins: Vec<f64> = lw
        .iter()
        .enumerate()
        .map(|(i, &l)| bound - (l - if i == 0 { expected_lambda_1 } else { expected_bulk }).abs())
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let max_bulk_deviation = lw[1..].iter().map(|l| (l - expected_bulk).abs()).fold(0.0, f64::max);
    Ok(ErSpectrumCertificate {
        p_edge,
        bound,
        lambda_1: lw[0],
        expected_lambda_1,
        expected_bulk,
        passed: min_margin >= -EIGEN_TOL,
        margins,
        min_margin,
        max_bulk_deviation,
    })
}

/// `ε = C √(ln n) max_i √(Σ_j (W_ij / D_i)²)`.
pub fn epsilon(g: &MotifGraph, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    g.check_no_isolated()?;
    let worst = (0..g.n)
        .map(|i| {
            let d = g.degree[i] as f64;
            g.row(i).map(|(_, w)| (w as f64 / d).powi(2)).sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(c * (g.n as f64).ln().sqrt() * worst.sqrt())
}

/// Smallest `m` in `1..=m_max` with `ν^m / (1 - ν) · √(Δ n) ≤ m ε`.
pub fn find_m(summary: &SpectralSummary, eps: f64, m_max: u32) -> Result<Option<u32>> {
    if summary.nu >= 1.0 - 1e-12 {
        return Err(Error::NuNotLessThanOne(summary.nu));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    let scale = (summary.delta_ratio * summary.n as f64).sqrt() / (1.0 - summary.nu);
    Ok((1..=m_max).find(|&m| summary.nu.powi(m as i32) * scale <= m as f64 * eps))
}

/// CSV with columns `index,lambda_W,lambda_P`, both spectra descending.
pub fn spectrum_csv(g: &MotifGraph) -> Result<String> {
    use std::fmt::Write as _;
    let lp = spectrum_p(g)?;
    let lw = spectrum_w(g);
    let mut out = String::from("index,lambda_W,lambda_P\n");
    for (i, (w, p)) in lw.iter().zip(&lp).enumerate() {
        let _ = writeln!(out, "{i},{w},{p}");
    }
    Ok(out)
}
