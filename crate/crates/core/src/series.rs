//! Absolutely convergent series: products of series, a numerical
//! Weierstrass test, and truncated multivariate power series with a
//! certified geometric tail bound.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative size of the estimated remainder below which a series of
/// nonnegative terms counts as converged.
pub const SERIES_TOLERANCE: f64 = 1e-10;

/// Estimated remainder `Σ_{n>len} |tₙ|` of a series given by its leading
/// terms. The last two blocks of `max(len/4, 1)` terms give a geometric
/// ratio `q`; the remainder is `last block · q/(1 − q)`, and infinite when
/// the blocks do not shrink. A single term is a finite sum with no tail.
pub fn tail_estimate(terms: &[f64]) -> f64 {
    let n = terms.len();
    if n < 2 {
        return 0.0;
    }
    let w = (n / 4).max(1);
    let block = |range: std::ops::Range<usize>| terms[range].iter().map(|t| t.abs()).sum::<f64>();
    let last = block(n - w..n);
    let previous = block(n - 2 * w..n - w);
    if last == 0.0 {
        return 0.0;
    }
    let q = last / previous;
    if !(q < 1.0) {
        return f64::INFINITY;
    }
    last * q / (1.0 - q)
}

/// Weierstrass test on the sup norms `‖fₙ‖_K`: true when `Σ‖fₙ‖` is
/// finite with an estimated remainder below [`SERIES_TOLERANCE`] relative
/// to the sum, so `Σfₙ` converges uniformly on `K` and its truncation can be
/// trusted.
pub fn uniform_convergence_bound(term_sup_norms: &[f64]) -> bool {
    if term_sup_norms.iter().any(|t| !t.is_finite()) {
        return false;
    }
    let total: f64 = term_sup_norms.iter().map(|t| t.abs()).sum();
    tail_estimate(term_sup_norms) <= SERIES_TOLERANCE * total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductSum {
    /// `(Σaₖ)(Σbₗ)`.
    pub value: f64,
    /// `Σₙ Σ_{k+l=n} aₖbₗ`, the double sum along diagonals.
    pub double_sum: f64,
    pub difference: f64,
}

/// Sum of `aₖbₗ` over all pairs, computed as a product of sums and along
/// diagonals. Both series must pass [`uniform_convergence_bound`] on their
/// absolute values.
pub fn product_series_sum(a: &[f64], b: &[f64]) -> Result<ProductSum> {
    for s in [a, b] {
        if !uniform_convergence_bound(s) {
            let remainder = tail_estimate(s);
            return Err(Error::Divergence { remainder });
        }
    }
    let value = a.iter().sum::<f64>() * b.iter().sum::<f64>();
    let mut double_sum = 0.0;
    for n in 0..(a.len() + b.len()).saturating_sub(1) {
        let lo = n.saturating_sub(b.len() - 1);
        let hi = n.min(a.len() - 1);
        double_sum += (lo..=hi).map(|k| a[k] * b[n - k]).sum::<f64>();
    }
    Ok(ProductSum {
        value,
        double_sum,
        difference: (value - double_sum).abs(),
    })
}

/// Multi-indices of `p` variables with total degree `≤ n`, ordered by
/// degree and then lexicographically (descending in the first variable).
pub fn multi_indices(p: usize, n: u32) -> Vec<Vec<u32>> {
    fn fill(rest: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 1 {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=degree).rev() {
            prefix.push(k);
            fill(rest - 1, degree - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if p == 0 {
        return out;
    }
    for degree in 0..=n {
        fill(p, degree, &mut Vec::with_capacity(p), &mut out);
    }
    out
}

fn monomial(x: &[f64], k: &[u32]) -> f64 {
    x.iter().zip(k).map(|(x, &k)| x.powi(k as i32)).product()
}

/// `Σ_{|k|≤N} c_k (z − a)^k` about a center `a`, together with a witness
/// point `x` at which the full series is known to converge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiSeries {
    degree: u32,
    indices: Vec<Vec<u32>>,
    coefficients: Vec<f64>,
    center: Vec<f64>,
    witness: Vec<f64>,
}

impl MultiSeries {
    /// `coefficients` follow [`multi_indices`]`(center.len(), degree)`.
    pub fn new(degree: u32, coefficients: Vec<f64>, center: Vec<f64>, witness: Vec<f64>) -> Result<Self> {
        let p = center.len();
        if p == 0 || witness.len() != p {
            return Err(Error::InvalidArgument(format!(
                "center and witness need the same positive dimension, got {} and {}",
                p,
                witness.len()
            )));
        }
        let indices = multi_indices(p, degree);
        if coefficients.len() != indices.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {} multi-indices",
                coefficients.len(),
                indices.len()
            )));
        }
        if coefficients.iter().chain(&center).chain(&witness).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series data must be finite".into()));
        }
        if center.iter().zip(&witness).any(|(a, x)| a == x) {
            return Err(Error::InvalidArgument("witness must differ from the center in every coordinate".into()));
        }
        Ok(Self {
            degree,
            indices,
            coefficients,
            center,
            witness,
        })
    }

    pub fn from_fn<F: Fn(&[u32]) -> f64>(degree: u32, center: Vec<f64>, witness: Vec<f64>, c: F) -> Result<Self> {
        let coefficients = multi_indices(center.len(), degree).iter().map(|k| c(k)).collect();
        Self::new(degree, coefficients, center, witness)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The same series cut at a lower degree.
    pub fn truncated(&self, degree: u32) -> Self {
        let keep = self.indices.iter().take_while(|k| k.iter().sum::<u32>() <= degree).count();
        Self {
            degree: degree.min(self.degree),
            indices: self.indices[..keep].to_vec(),
            coefficients: self.coefficients[..keep].to_vec(),
            center: self.center.clone(),
            witness: self.witness.clone(),
        }
    }

    /// `M = max_k |c_k (x − a)^k|` over the stored coefficients. The bound
    /// needs the supremum over all `k`, so this is exact only when the
    /// maximum is attained at degree `≤ N`.
    pub fn witness_bound(&self) -> f64 {
        let dx: Vec<f64> = self.witness.iter().zip(&self.center).map(|(x, a)| x - a).collect();
        self.indices
            .iter()
            .zip(&self.coefficients)
            .map(|(k, c)| (c * monomial(&dx, k)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Bound on `|Σ_{|k|>N} c_k (z − a)^k|`.
    pub tail_bound: f64,
    pub witness_bound: f64,
    /// `Θᵢ = r / |xᵢ − aᵢ|`.
    pub theta: Vec<f64>,
}

/// `Σ_{|k|>N} Θ^k` as a sum of nonnegative terms, with no cancellation:
/// peeling off the first variable gives
/// `T_p(N) = Σ_{j≤N} Θ₁ʲ T_{p−1}(N−j) + Θ₁^{N+1}/(1−Θ₁) · Π_{i≥2} 1/(1−Θᵢ)`.
pub fn geometric_tail(theta: &[f64], n: u32) -> f64 {
    let (first, rest) = match theta.split_first() {
        Some(s) => s,
        None => return 0.0,
    };
    if rest.is_empty() {
        return first.powi(n as i32 + 1) / (1.0 - first);
    }
    let full_rest: f64 = rest.iter().map(|t| 1.0 / (1.0 - t)).product();
    let mut sum = first.powi(n as i32 + 1) / (1.0 - first) * full_rest;
    // tails of the remaining variables for every degree 0..=n
    let rest_tails: Vec<f64> = (0..=n).map(|m| geometric_tail(rest, m)).collect();
    for j in 0..=n {
        sum += first.powi(j as i32) * rest_tails[(n - j) as usize];
    }
    sum
}

/// Evaluates the truncated series at `z` in the closed ball `‖z − a‖ ≤ r`
/// with the bound `M Σ_{|k|>N} Θ^k` on the omitted terms, valid because
/// `|c_k (z − a)^k| ≤ M Θ^k` whenever every `|zᵢ − aᵢ| ≤ r < |xᵢ − aᵢ|`.
pub fn multivariate_eval(series: &MultiSeries, z: &[f64], r: f64) -> Result<Evaluation> {
    if z.len() != series.dimension() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, series has {} variables",
            z.len(),
            series.dimension()
        )));
    }
    let limit = series
        .witness
        .iter()
        .zip(&series.center)
        .map(|(x, a)| (x - a).abs())
        .fold(f64::INFINITY, f64::min);
    if !(r > 0.0 && r < limit) {
        return Err(Error::Radius { r, limit });
    }
    let dz: Vec<f64> = z.iter().zip(&series.center).map(|(z, a)| z - a).collect();
    let distance = dz.iter().map(|d| d * d).sum::<f64>().sqrt();
    if distance > r {
        return Err(Error::OutsideBall { distance, r });
    }
    let value = series
        .indices
        .iter()
        .zip(&series.coefficients)
        .map(|(k, c)| c * monomial(&dz, k))
        .sum();
    let theta: Vec<f64> = series
        .witness
        .iter()
        .zip(&series.center)
        .map(|(x, a)| r / (x - a).abs())
        .collect();
    let witness_bound = series.witness_bound();
    Ok(Evaluation {
        value,
        tail_bound: witness_bound * geometric_tail(&theta, series.degree),
        witness_bound,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weierstrass_examples() {
        let geometric: Vec<f64> = (0..80).map(|n| 0.5f64.powi(n)).collect();
        assert!(uniform_convergence_bound(&geometric));
        let harmonic: Vec<f64> = (1..=2000).map(|n| 1.0 / n as f64).collect();
        assert!(!uniform_convergence_bound(&harmonic));
        assert!(uniform_convergence_bound(&[1.0]));
    }

    #[test]
    fn product_examples() {
        let a: Vec<f64> = (0..80).map(|k| 0.5f64.powi(k)).collect();
        let s = product_series_sum(&a, &a).unwrap();
        assert!((s.value - 4.0).abs() < 1e-12);
        assert!(s.difference < 1e-12);
        assert_eq!(product_series_sum(&[1.0], &[1.0]).unwrap().value, 1.0);
        let harmonic: Vec<f64> = (1..=2000).map(|n| 1.0 / n as f64).collect();
        assert!(matches!(product_series_sum(&a, &harmonic), Err(Error::Divergence { .. })));
    }

    #[test]
    fn multi_index_order() {
        assert_eq!(
            multi_indices(2, 2),
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        // C(n + p, p) indices
        assert_eq!(multi_indices(3, 4).len(), 35);
    }

    #[test]
    fn geometric_tail_matches_brute_force() {
        let theta = [0.3, 0.55, 0.7];
        for n in [0, 3, 10] {
            let total: f64 = theta.iter().map(|t| 1.0 / (1.0 - t)).product();
            let head: f64 = multi_indices(3, n).iter().map(|k| monomial(&theta, k)).sum();
            let tail = geometric_tail(&theta, n);
            assert!((tail - (total - head)).abs() < 1e-12 * total, "{n}");
        }
    }

    #[test]
    fn all_ones_series() {
        let s = MultiSeries::from_fn(60, vec![0.0, 0.0], vec![0.9, 0.9], |_| 1.0).unwrap();
        let e = multivariate_eval(&s, &[0.5, 0.5], 0.75).unwrap();
        assert!((e.value - 4.0).abs() < 1e-12);
        assert!(e.tail_bound >= 0.0);
        let at_center = multivariate_eval(&s, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(at_center.value, 1.0);
        assert!(at_center.tail_bound > 0.0);
    }

    #[test]
    fn argument_errors() {
        let s = MultiSeries::from_fn(3, vec![0.0, 0.0], vec![0.9, -0.8], |_| 1.0).unwrap();
        assert!(matches!(multivariate_eval(&s, &[0.1, 0.1], 0.8), Err(Error::Radius { .. })));
        assert!(matches!(multivariate_eval(&s, &[0.5, 0.5], 0.5), Err(Error::OutsideBall { .. })));
        assert!(MultiSeries::from_fn(3, vec![0.0], vec![0.0], |_| 1.0).is_err());
        assert!(MultiSeries::new(1, vec![1.0], vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn tail_bound_decreases_in_degree(
            t1 in 0.01f64..0.95, t2 in 0.01f64..0.95, n in 0u32..30,
        ) {
            let a = geometric_tail(&[t1, t2], n);
            let b = geometric_tail(&[t1, t2], n + 1);
            prop_assert!(b >= 0.0 && b <= a);
        }

        #[test]
        fn truncation_error_is_bounded(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 231),
            z1 in -0.35f64..0.35, z2 in -0.35f64..0.35, n in 2u32..10,
        ) {
            // degree 20 in two variables has 231 coefficients
            let full = MultiSeries::new(20, coeffs, vec![0.0, 0.0], vec![0.9, 0.9]).unwrap();
            let cut = full.truncated(n);
            let e = multivariate_eval(&cut, &[z1, z2], 0.5).unwrap();
            let reference = multivariate_eval(&full, &[z1, z2], 0.5).unwrap().value;
            let m = full.witness_bound();
            prop_assert!((e.value - reference).abs() <= m * geometric_tail(&e.theta, n) + 1e-14);
        }
    }
}
