//! Simple 3-uniform hypergraphs, generators, and random initial states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the generator behind every seeded draw in this crate.
pub const RNG_NAME: &str = "chacha8";

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// A simple 3-uniform hypergraph on vertices `0..n`.
///
/// Triples are stored sorted and deduplicated, in lexicographic order. For
/// each vertex `i` the neighborhood `N_i` lists the pairs `{j, k}` such that
/// `{i, j, k}` is a hyperedge, as sorted `[j, k]` with `j < k`, in ascending
/// order. That order fixes the summation order of the dynamics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph3 {
    n: usize,
    triples: Vec<[u32; 3]>,
    pair_offsets: Vec<usize>,
    pairs: Vec<[u32; 2]>,
}

impl Hypergraph3 {
    /// Canonicalizes an edge list. Returns the hypergraph and the number of
    /// duplicate triples that were collapsed.
    pub fn from_edge_list<I>(n: usize, triples: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = [i64; 3]>,
    {
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} vertices exceed the u32 index range")));
        }
        let mut canon = Vec::new();
        for (t, raw) in triples.into_iter().enumerate() {
            for &v in &raw {
                if v < 0 || v as u64 >= n as u64 {
                    return Err(Error::OutOfRange { index: v, n, triple: t });
                }
            }
            let mut s = raw;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::DegenerateTriple { triple: t, members: raw });
            }
            canon.push([s[0] as u32, s[1] as u32, s[2] as u32]);
        }
        let before = canon.len();
        canon.sort_unstable();
        canon.dedup();
        let duplicates = before - canon.len();
        Ok((Self::from_canonical(n, canon), duplicates))
    }

    /// Builds from triples that are already sorted, deduplicated and valid.
    fn from_canonical(n: usize, triples: Vec<[u32; 3]>) -> Self {
        debug_assert!(triples.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n];
        for t in &triples {
            for &v in t {
                degree[v as usize] += 1;
            }
        }
        let mut pair_offsets = Vec::with_capacity(n + 1);
        pair_offsets.push(0);
        for d in &degree {
            pair_offsets.push(pair_offsets.last().unwrap() + d);
        }
        let mut cursor = pair_offsets[..n].to_vec();
        let mut pairs = vec![[0u32; 2]; 3 * triples.len()];
        for &[a, b, c] in &triples {
            for (v, pair) in [(a, [b, c]), (b, [a, c]), (c, [a, b])] {
                pairs[cursor[v as usize]] = pair;
                cursor[v as usize] += 1;
            }
        }
        for i in 0..n {
            pairs[pair_offsets[i]..pair_offsets[i + 1]].sort_unstable();
        }
        Hypergraph3 { n, triples, pair_offsets, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triples(&self) -> &[[u32; 3]] {
        &self.triples
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    /// The neighborhood `N_i`.
    pub fn neighbor_pairs(&self, i: usize) -> &[[u32; 2]] {
        &self.pairs[self.pair_offsets[i]..self.pair_offsets[i + 1]]
    }

    /// `|N_i|`, the number of hyperedges containing `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.pair_offsets[i + 1] - self.pair_offsets[i]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.pair_offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().max().unwrap_or(0)
    }

    pub fn first_isolated(&self) -> Option<usize> {
        self.degrees().position(|d| d == 0)
    }

    /// Applies a vertex relabeling `v -> perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: perm.len() });
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("relabeling is not a permutation".into()));
            }
        }
        let triples = self
            .triples
            .iter()
            .map(|t| t.map(|v| perm[v as usize] as i64));
        Ok(Self::from_edge_list(self.n, triples)?.0)
    }
}

/// Per-vertex real states with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub time: u64,
    pub seed: Option<u64>,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        StateVector { values, time: 0, seed: None }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_i x_i - min_i x_i`.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if self.values.is_empty() { 0.0 } else { hi - lo }
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: n, got: self.values.len() })
        }
    }
}

/// Erdős–Rényi 3-uniform hypergraph: every triple independently with
/// probability `p_edge`. Triples are visited in lexicographic order, one
/// Bernoulli draw each, so the result is a pure function of the arguments.
pub fn generate_erdos_renyi(n: usize, p_edge: f64, seed: u64) -> Result<Hypergraph3> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    check_probability("p_edge", p_edge)?;
    let mut rng = rng_from_seed(seed);
    let mut triples = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            for c in b + 1..n as u32 {
                if rng.gen_bool(p_edge) {
                    triples.push([a, b, c]);
                }
            }
        }
    }
    Ok(Hypergraph3::from_canonical(n, triples))
}

pub fn generate_complete(n: usize) -> Result<Hypergraph3> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    let mut triples = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            for c in b + 1..n as u32 {
                triples.push([a, b, c]);
            }
        }
    }
    Ok(Hypergraph3::from_canonical(n, triples))
}

/// Discrete torus `(Z/LZ)^d` with one hyperedge `{i - e_j, i, i + e_j}` per
/// vertex and axis. Vertex `(c_0, .., c_{d-1})` is flattened to
/// `sum_j c_j L^j`.
pub fn generate_torus(side: usize, dim: usize) -> Result<Hypergraph3> {
    if side < 5 {
        return Err(Error::TooSmallTorus(side));
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let n = u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or(Error::TorusTooLarge { side, dim })?;
    let mut triples = Vec::with_capacity(n * dim);
    let mut stride = 1usize;
    for _axis in 0..dim {
        for v in 0..n {
            let coord = (v / stride) % side;
            let base = v - coord * stride;
            let prev = base + ((coord + side - 1) % side) * stride;
            let next = base + ((coord + 1) % side) * stride;
            triples.push([prev as i64, v as i64, next as i64]);
        }
        stride *= side;
    }
    Ok(Hypergraph3::from_edge_list(n, triples)?.0)
}

/// i.i.d. states, `+1` with probability `p_init` and `-1` otherwise.
pub fn rademacher_init(n: usize, p_init: f64, seed: u64) -> Result<StateVector> {
    check_probability("p_init", p_init)?;
    let mut rng = rng_from_seed(seed);
    let values = (0..n)
        .map(|_| if rng.gen_bool(p_init) { 1.0 } else { -1.0 })
        .collect();
    Ok(StateVector { values, time: 0, seed: Some(seed) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn single_hyperedge_neighborhoods() {
        let (h, dup) = Hypergraph3::from_edge_list(3, [[0, 1, 2]]).unwrap();
        assert_eq!(dup, 0);
        assert_eq!(h.neighbor_pairs(0), &[[1, 2]]);
        assert_eq!(h.neighbor_pairs(1), &[[0, 2]]);
        assert_eq!(h.neighbor_pairs(2), &[[0, 1]]);
    }

    #[test]
    fn duplicates_collapse() {
        let (h, dup) = Hypergraph3::from_edge_list(4, [[0, 1, 2], [2, 1, 0]]).unwrap();
        assert_eq!(h.num_triples(), 1);
        assert_eq!(dup, 1);
    }

    #[test]
    fn rejects_bad_triples() {
        assert!(matches!(
            Hypergraph3::from_edge_list(4, [[0, 1, 1]]),
            Err(Error::DegenerateTriple { .. })
        ));
        assert!(matches!(
            Hypergraph3::from_edge_list(4, [[0, 1, 4]]),
            Err(Error::OutOfRange { index: 4, .. })
        ));
        assert!(matches!(
            Hypergraph3::from_edge_list(4, [[-1, 1, 2]]),
            Err(Error::OutOfRange { index: -1, .. })
        ));
        assert!(matches!(Hypergraph3::from_edge_list(2, []), Err(Error::TooFewVertices(2))));
    }

    #[test]
    fn degree_sums() {
        let h = generate_erdos_renyi(15, 0.3, 9).unwrap();
        let total: usize = h.degrees().sum();
        assert_eq!(total, 3 * h.num_triples());
        for i in 0..h.n() {
            let containing = h.triples().iter().filter(|t| t.contains(&(i as u32))).count();
            assert_eq!(h.degree(i), containing);
        }
    }

    #[test]
    fn complete_counts() {
        assert_eq!(generate_complete(3).unwrap().num_triples(), 1);
        let h4 = generate_complete(4).unwrap();
        assert_eq!(h4.num_triples(), 4);
        assert!(h4.degrees().all(|d| d == 3));
        let h6 = generate_complete(6).unwrap();
        assert_eq!(h6.num_triples(), 20);
        assert!(h6.degrees().all(|d| d == binom(5, 2)));
    }

    #[test]
    fn er_extremes() {
        assert_eq!(generate_erdos_renyi(10, 1.0, 3).unwrap().num_triples(), 120);
        assert_eq!(generate_erdos_renyi(10, 0.0, 3).unwrap().num_triples(), 0);
        assert!(generate_erdos_renyi(10, 1.5, 3).is_err());
        assert_eq!(generate_erdos_renyi(10, 1.0, 3).unwrap(), generate_complete(10).unwrap());
    }

    #[test]
    fn er_counts_within_four_sigma() {
        let (n, p) = (200usize, 0.05);
        let h = generate_erdos_renyi(n, p, 42).unwrap();
        let trials = binom(n, 3) as f64;
        let sd = (trials * p * (1.0 - p)).sqrt();
        assert!((h.num_triples() as f64 - p * trials).abs() <= 4.0 * sd);
        let pair_trials = binom(n - 1, 2) as f64;
        let sd_deg = (pair_trials * p * (1.0 - p)).sqrt();
        assert!((h.min_degree() as f64 - p * pair_trials).abs() <= 4.0 * sd_deg);
    }

    #[test]
    fn er_is_deterministic() {
        assert_eq!(generate_erdos_renyi(30, 0.2, 5).unwrap(), generate_erdos_renyi(30, 0.2, 5).unwrap());
        assert_ne!(generate_erdos_renyi(30, 0.2, 5).unwrap(), generate_erdos_renyi(30, 0.2, 6).unwrap());
    }

    #[test]
    fn torus_shapes() {
        let t5 = generate_torus(5, 1).unwrap();
        assert_eq!((t5.n(), t5.num_triples()), (5, 5));
        assert!(t5.degrees().all(|d| d == 3));
        assert_eq!(generate_torus(6, 1).unwrap().num_triples(), 6);
        let t52 = generate_torus(5, 2).unwrap();
        assert_eq!((t52.n(), t52.num_triples()), (25, 50));
        assert!(t52.degrees().all(|d| d == 6));
        assert!(matches!(generate_torus(4, 1), Err(Error::TooSmallTorus(4))));
        assert!(matches!(generate_torus(5, 0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn torus_cycle_triples_by_hand() {
        let t = generate_torus(5, 1).unwrap();
        let expected: Vec<[u32; 3]> = vec![[0, 1, 2], [0, 1, 4], [0, 3, 4], [1, 2, 3], [2, 3, 4]];
        assert_eq!(t.triples(), expected.as_slice());
    }

    #[test]
    fn rademacher_values() {
        assert_eq!(rademacher_init(5, 1.0, 1).unwrap().values, vec![1.0; 5]);
        assert_eq!(rademacher_init(5, 0.0, 1).unwrap().values, vec![-1.0; 5]);
        let x = rademacher_init(10_000, 0.5, 7).unwrap();
        let mean = x.values.iter().sum::<f64>() / 10_000.0;
        assert!(mean.abs() <= 0.04, "mean {mean}");
        assert!(x.is_binary());
        assert_eq!((x.time, x.seed), (0, Some(7)));
    }

    #[test]
    fn relabel_is_isomorphic() {
        let h = generate_erdos_renyi(8, 0.4, 2).unwrap();
        let perm = [3, 1, 7, 0, 2, 6, 5, 4];
        let g = h.relabel(&perm).unwrap();
        assert_eq!(g.num_triples(), h.num_triples());
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(g.degree(p), h.degree(i));
        }
    }
}
