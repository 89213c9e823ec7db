/// Streaming pairwise (tree) summation.
///
/// Partial sums are kept for blocks of size 2^k following the binary
/// representation of the count, so the result equals the balanced tree sum
/// for power-of-two lengths with O(log n) state and no allocation.
#[derive(Debug, Clone)]
pub(crate) struct PairwiseSum {
    partial: [f64; 64],
    len: usize,
    count: u64,
}

impl PairwiseSum {
    pub(crate) fn new() -> Self {
        PairwiseSum { partial: [0.0; 64], len: 0, count: 0 }
    }

    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        self.count += 1;
        let mut acc = value;
        for _ in 0..self.count.trailing_zeros() {
            self.len -= 1;
            acc += self.partial[self.len];
        }
        self.partial[self.len] = acc;
        self.len += 1;
    }

    pub(crate) fn total(&self) -> f64 {
        self.partial[..self.len].iter().rev().fold(0.0, |s, &v| s + v)
    }
}

pub(crate) fn pairwise_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = PairwiseSum::new();
    for v in values {
        s.add(v);
    }
    s.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(v: &[f64]) -> f64 {
        match v.len() {
            0 => 0.0,
            1 => v[0],
            n => tree(&v[..n / 2]) + tree(&v[n / 2..]),
        }
    }

    #[test]
    fn matches_recursive_tree_on_powers_of_two() {
        let v: Vec<f64> = (0..256).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(v.iter().copied()), tree(&v));
    }

    #[test]
    fn exact_on_integers() {
        assert_eq!(pairwise_sum((1..=1000).map(f64::from)), 500500.0);
        assert_eq!(pairwise_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn beats_naive_on_ill_conditioned_input() {
        let v: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 1 << 16)).collect();
        let naive: f64 = v.iter().sum();
        let exact = 1.0 + (1 << 16) as f64 * 1e-16;
        assert!((pairwise_sum(v.iter().copied()) - exact).abs() < (naive - exact).abs());
    }
}
