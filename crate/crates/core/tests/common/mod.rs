//! Shared test oracles, independent of the library's numeric paths.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive};

/// Exact binomial tails by rational arithmetic, for success probability
/// `t_num / t_den`. Returns `(lower, upper)` with `lower[m] = P(X <= m)`
/// and `upper[m] = P(X >= m)` for `m in 0..=k`.
#[allow(dead_code)]
pub fn exact_binomial_tails(k: usize, t_num: u64, t_den: u64) -> (Vec<f64>, Vec<f64>) {
    assert!(t_den > 0 && t_num < t_den && t_num > 0);
    let num = BigInt::from(t_num);
    let q_num = BigInt::from(t_den - t_num);
    let denom = BigInt::from(t_den).pow(k as u32);

    let mut choose = BigInt::one();
    let mut pmf: Vec<BigRational> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            // C(k, j) = C(k, j-1) * (k - j + 1) / j, exact at every step.
            choose = choose * BigInt::from(k - j + 1) / BigInt::from(j);
        }
        let term = &choose * num.pow(j as u32) * q_num.pow((k - j) as u32);
        pmf.push(BigRational::new(term, denom.clone()));
    }

    let mut lower = Vec::with_capacity(k + 1);
    let mut acc = BigRational::new(BigInt::from(0), BigInt::one());
    for p in &pmf {
        acc += p;
        lower.push(acc.to_f64().unwrap());
    }
    let mut upper = vec![0.0; k + 1];
    acc = BigRational::new(BigInt::from(0), BigInt::one());
    for j in (0..=k).rev() {
        acc += &pmf[j];
        upper[j] = acc.to_f64().unwrap();
    }
    (lower, upper)
}

/// Sample mean and standard error of the mean.
#[allow(dead_code)]
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance.
#[allow(dead_code)]
pub fn sample_variance(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
