//! Exact binomial tail probabilities.
//!
//! The early-termination filter asks for `P(X >= m)` and `P(X <= m)` with
//! `X ~ Binomial(K, T)`, where `K` is at most a few hundred and the answers
//! span from 1 down to below 1e-22. Tails are summed term by term in
//! log space (log-sum-exp around the largest term) with compensated
//! summation, which keeps full relative accuracy even for the far tails.
//! No normal or Poisson approximation is used anywhere.

use crate::error::{Error, Result};
use crate::real::Real;

/// The match-count model of one group: `trials` bins, each matching
/// independently with probability `success_prob`. Carries its ln-factorial
/// table so repeated tail queries do not recompute it.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialModel<F> {
    trials: usize,
    success_prob: F,
    ln_fact: Vec<F>,
}

impl<F: Real> BinomialModel<F> {
    pub fn new(trials: usize, success_prob: F) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("binomial trial count must be >= 1"));
        }
        if !(success_prob > F::zero() && success_prob < F::one()) {
            return Err(Error::invalid("success probability must lie in (0, 1)"));
        }
        let mut ln_fact = Vec::with_capacity(trials + 1);
        ln_fact.push(F::zero());
        let mut acc = F::zero();
        for i in 1..=trials {
            acc = acc + F::from_count(i).ln();
            ln_fact.push(acc);
        }
        Ok(Self { trials, success_prob, ln_fact })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn success_prob(&self) -> F {
        self.success_prob
    }

    /// ln P(X = j).
    fn ln_pmf(&self, j: usize) -> F {
        let k = self.trials;
        let p = self.success_prob;
        let q = F::one() - p;
        let ln_choose = self.ln_fact[k] - self.ln_fact[j] - self.ln_fact[k - j];
        ln_choose + F::from_count(j) * p.ln() + F::from_count(k - j) * q.ln()
    }

    /// Sums `sum_{j in lo..=hi} P(X = j)` stably: factors out the largest
    /// log term, Kahan-compensates the mantissa sum.
    fn tail_sum(&self, lo: usize, hi: usize) -> F {
        let ln_terms: Vec<F> = (lo..=hi).map(|j| self.ln_pmf(j)).collect();
        let max_ln = ln_terms
            .iter()
            .copied()
            .fold(F::neg_infinity(), |a, b| if b > a { b } else { a });
        let mut sum = F::zero();
        let mut comp = F::zero();
        for &lt in &ln_terms {
            let term = (lt - max_ln).exp();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let out = max_ln.exp() * sum;
        // Clamp away rounding excursions outside [0, 1].
        out.min(F::one()).max(F::zero())
    }
}

/// Every tail of one model, precomputed for constant-time lookups.
///
/// The comparison filters query one tail per group per pair; over a corpus
/// that is millions of lookups of at most `K + 2` distinct values, so the
/// table is built once per run. Entries are accumulated from the small end
/// of each tail with compensated summation, preserving relative accuracy
/// down to the ~1e-23 far tails.
#[derive(Debug, Clone)]
pub struct TailTable<F> {
    /// `lower[m] = P(X <= m)` for `m in 0..=K`.
    lower: Vec<F>,
    /// `upper[m] = P(X >= m)` for `m in 0..=K`.
    upper: Vec<F>,
}

impl<F: Real> TailTable<F> {
    pub fn new(model: &BinomialModel<F>) -> Self {
        let k = model.trials;
        let pmf: Vec<F> = (0..=k).map(|j| model.ln_pmf(j).exp()).collect();
        let clamp = |v: F| v.min(F::one()).max(F::zero());

        let mut lower = Vec::with_capacity(k + 1);
        let mut sum = F::zero();
        let mut comp = F::zero();
        for &p in &pmf {
            let y = p - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            lower.push(clamp(sum));
        }
        *lower.last_mut().expect("k >= 1") = F::one();

        let mut upper = vec![F::zero(); k + 1];
        sum = F::zero();
        comp = F::zero();
        for j in (0..=k).rev() {
            let y = pmf[j] - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            upper[j] = clamp(sum);
        }
        upper[0] = F::one();

        Self { lower, upper }
    }

    pub fn trials(&self) -> usize {
        self.lower.len() - 1
    }

    /// `P(X <= m)`; same domain as [`lower_tail`].
    pub fn lower_tail(&self, m: i64) -> Result<F> {
        let k = self.trials() as i64;
        if m < -1 || m > k {
            return Err(Error::invalid(format!("lower tail point {m} outside [-1, {k}]")));
        }
        if m == -1 {
            return Ok(F::zero());
        }
        Ok(self.lower[m as usize])
    }

    /// `P(X >= m)`; same domain as [`upper_tail`].
    pub fn upper_tail(&self, m: i64) -> Result<F> {
        let k = self.trials() as i64;
        if m < 0 || m > k + 1 {
            return Err(Error::invalid(format!("upper tail point {m} outside [0, {}]", k + 1)));
        }
        if m == k + 1 {
            return Ok(F::zero());
        }
        Ok(self.upper[m as usize])
    }
}

/// `P(X >= m)`. Valid for `0 <= m <= K+1`; `m = K+1` gives 0.
/// Monotone non-increasing in `m`.
pub fn upper_tail<F: Real>(m: i64, model: &BinomialModel<F>) -> Result<F> {
    let k = model.trials as i64;
    if m < 0 || m > k + 1 {
        return Err(Error::invalid(format!(
            "upper tail point {m} outside [0, {}]",
            k + 1
        )));
    }
    if m == 0 {
        return Ok(F::one());
    }
    if m == k + 1 {
        return Ok(F::zero());
    }
    Ok(model.tail_sum(m as usize, model.trials))
}

/// `P(X <= m)`. Valid for `-1 <= m <= K`; `m = -1` gives 0.
/// Monotone non-decreasing in `m`.
pub fn lower_tail<F: Real>(m: i64, model: &BinomialModel<F>) -> Result<F> {
    let k = model.trials as i64;
    if m < -1 || m > k {
        return Err(Error::invalid(format!(
            "lower tail point {m} outside [-1, {k}]"
        )));
    }
    if m == -1 {
        return Ok(F::zero());
    }
    if m == k {
        return Ok(F::one());
    }
    Ok(model.tail_sum(0, m as usize))
}
