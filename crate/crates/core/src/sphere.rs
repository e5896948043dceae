//! The round unit sphere `S^(D-1)`: exact monomial integrals against the
//! O(D)-invariant measure and a deterministic low-discrepancy sampler.

use crate::error::{Error, Result};
use crate::special::{double_factorial, gamma, inverse_normal_cdf};

/// Total mass of the invariant measure, `|S^(D-1)| = 2 pi^(D/2) / Gamma(D/2)`.
#[must_use]
pub fn surface_area(dim: usize) -> f64 {
    let d2 = dim as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(d2) / gamma(d2)
}

/// Integral of `prod_i (t^i)^(a_i)` over the sphere.  Vanishes unless every
/// exponent is even; otherwise
/// `|S^(D-1)| prod_i (a_i - 1)!! / prod_(t=1..k) (D + 2t - 2)` with
/// `2k = sum a_i`.
pub fn monomial_integral(dim: usize, exponents: &[usize]) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if exponents.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "expected {dim} exponents, got {}",
            exponents.len()
        )));
    }
    if exponents.iter().any(|a| a % 2 == 1) {
        return Ok(0.0);
    }
    let total: usize = exponents.iter().sum();
    let k = total / 2;
    let mut value = surface_area(dim);
    for &a in exponents {
        value *= double_factorial(a as i64 - 1);
    }
    for t in 1..=k {
        value /= (dim + 2 * t - 2) as f64;
    }
    Ok(value)
}

/// Same integral addressed by an index word `(i_1, ..., i_m)` instead of an
/// exponent vector.
pub fn monomial_integral_of_word(dim: usize, word: &[usize]) -> Result<f64> {
    let mut exponents = vec![0usize; dim];
    for &i in word {
        if i < 1 || i > dim {
            return Err(Error::InvalidIndexEntry { entry: i, dim });
        }
        exponents[i - 1] += 1;
    }
    monomial_integral(dim, &exponents)
}

const PRIMES: [usize; 30] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113,
];

fn radical_inverse(base: usize, mut n: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut value = 0.0;
    let mut factor = inv;
    while n > 0 {
        value += (n % base) as f64 * factor;
        n /= base;
        factor *= inv;
    }
    value
}

/// Deterministic point set on the sphere: a seeded Halton sequence mapped
/// through the inverse normal CDF and normalized.  Identical seeds give
/// identical points on every platform.
#[derive(Debug, Clone)]
pub struct SphereSampler {
    dim: usize,
    offset: usize,
}

impl SphereSampler {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if dim > PRIMES.len() {
            return Err(Error::InvalidArgument(format!(
                "sampler supports dimension up to {}, got {dim}",
                PRIMES.len()
            )));
        }
        // Skip an initial segment; different seeds use disjoint segments.
        let offset = 101 + (seed as usize).wrapping_mul(7919) % (1 << 30);
        Ok(SphereSampler { dim, offset })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `i`-th point of the set, unit norm.
    #[must_use]
    pub fn point(&self, i: usize) -> Vec<f64> {
        let n = self.offset + i;
        let mut v: Vec<f64> = (0..self.dim)
            .map(|j| {
                let u = radical_inverse(PRIMES[j], n).clamp(1e-12, 1.0 - 1e-12);
                inverse_normal_cdf(u)
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // The clamp keeps every coordinate finite and the norm positive.
        assert!(norm > 1e-8, "zero-norm draw from clamped Gaussian map");
        for x in v.iter_mut() {
            *x /= norm;
        }
        v
    }

    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|i| self.point(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Independent oracle: the pairing expansion.  Sums `prod delta` over
    /// all perfect matchings of the word, then divides by
    /// `D (D+2) ... (D + 2k - 2)`.
    fn pairing_oracle(dim: usize, word: &[usize]) -> f64 {
        if word.len() % 2 == 1 {
            return 0.0;
        }
        fn matchings(word: &[usize], used: &mut [bool]) -> f64 {
            let first = match used.iter().position(|u| !u) {
                Some(i) => i,
                None => return 1.0,
            };
            used[first] = true;
            let mut total = 0.0;
            for j in (first + 1)..word.len() {
                if used[j] || word[first] != word[j] {
                    continue;
                }
                used[j] = true;
                total += matchings(word, used);
                used[j] = false;
            }
            used[first] = false;
            total
        }
        let mut used = vec![false; word.len()];
        let mut value = surface_area(dim) * matchings(word, &mut used);
        for t in 1..=(word.len() / 2) {
            value /= (dim + 2 * t - 2) as f64;
        }
        value
    }

    #[test]
    fn known_low_order_values() {
        let four_pi = 4.0 * std::f64::consts::PI;
        assert_abs_diff_eq!(surface_area(3), four_pi, epsilon = 1e-12);
        assert_abs_diff_eq!(
            monomial_integral(3, &[2, 0, 0]).unwrap(),
            four_pi / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            monomial_integral(3, &[2, 2, 0]).unwrap(),
            four_pi / 15.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            monomial_integral(3, &[4, 0, 0]).unwrap(),
            four_pi / 5.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            monomial_integral(2, &[2, 0]).unwrap(),
            std::f64::consts::PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(monomial_integral(3, &[1, 2, 0]).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_pairing_oracle() {
        for dim in 2..=5 {
            for word in [
                vec![1, 1],
                vec![1, 2, 1, 2],
                vec![1, 1, 1, 1],
                vec![2, 2, 1, 1, 2, 2],
                vec![1, 1, 2, 2, 2, 2, 1, 1],
            ] {
                if word.iter().any(|&i| i > dim) {
                    continue;
                }
                let closed = monomial_integral_of_word(dim, &word).unwrap();
                let oracle = pairing_oracle(dim, &word);
                assert_abs_diff_eq!(closed, oracle, epsilon = 1e-12 * (1.0 + oracle.abs()));
            }
        }
    }

    #[test]
    fn monte_carlo_oracle_agrees_within_three_sigma() {
        // Uniform sphere samples via normalized Gaussians, one fixed seed.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let dim = 3;
        let n = 1_000_000usize;
        let exps = [2usize, 2, 0];
        let area = surface_area(dim);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let mut v = [0.0f64; 3];
            let mut norm2 = 0.0;
            for x in v.iter_mut() {
                // Box-Muller from two uniforms.
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *x = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                norm2 += *x * *x;
            }
            let norm = norm2.sqrt();
            let mut val = 1.0;
            for (x, &a) in v.iter().zip(exps.iter()) {
                val *= (x / norm).powi(a as i32);
            }
            sum += val;
            sum_sq += val * val;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        let sigma = area * (var / n as f64).sqrt();
        let estimate = area * mean;
        let exact = monomial_integral(dim, &exps).unwrap();
        assert!(
            (estimate - exact).abs() <= 3.0 * sigma,
            "MC {estimate} vs exact {exact}, sigma {sigma}"
        );
    }

    #[test]
    fn sampler_is_deterministic_and_on_sphere() {
        let s1 = SphereSampler::new(4, 7).unwrap();
        let s2 = SphereSampler::new(4, 7).unwrap();
        let s3 = SphereSampler::new(4, 8).unwrap();
        for i in 0..50 {
            let p = s1.point(i);
            assert_eq!(p, s2.point(i));
            let norm2: f64 = p.iter().map(|x| x * x).sum();
            assert_abs_diff_eq!(norm2, 1.0, epsilon = 1e-12);
        }
        assert_ne!(s1.point(0), s3.point(0));
    }

    #[test]
    fn sampler_second_moments_look_uniform() {
        let dim = 3;
        let s = SphereSampler::new(dim, 0).unwrap();
        let n = 4096;
        let mut acc = vec![0.0f64; dim];
        for p in s.points(n) {
            for (a, x) in acc.iter_mut().zip(p.iter()) {
                *a += x * x;
            }
        }
        for a in acc {
            assert!(
                (a / n as f64 - 1.0 / dim as f64).abs() < 0.02,
                "second moment {} vs {}",
                a / n as f64,
                1.0 / dim as f64
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn random_words_match_pairing_oracle(
            dim in 2usize..5,
            len in 1usize..7,
            seed in any::<u64>(),
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let word: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=dim)).collect();
            let closed = monomial_integral_of_word(dim, &word).unwrap();
            let oracle = pairing_oracle(dim, &word);
            prop_assert!((closed - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        }
    }
}
