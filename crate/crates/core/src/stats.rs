//! Small statistics helpers shared by the Monte-Carlo checks.

// Needed without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Two-sided z for a 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard deviation of a binomial proportion.
pub fn proportion_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// True when an observed proportion lies within `k` standard deviations of
/// `p`. A floor of one count keeps degenerate `p` in {0, 1} meaningful.
pub fn within_sigmas(successes: u64, trials: u64, p: f64, k: f64) -> bool {
    let observed = successes as f64 / trials as f64;
    let sigma = proportion_sigma(p, trials).max(1.0 / trials as f64);
    (observed - p).abs() <= k * sigma
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities.
pub fn chi_square(observed: &[u64], expected_probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Upper-tail 1% critical value of chi-square with `dof` degrees of freedom
/// (Wilson-Hilferty approximation; accurate to a few percent for dof >= 2).
pub fn chi_square_critical_1pct(dof: usize) -> f64 {
    let k = dof as f64;
    let z = 2.326_347_874_040_841;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Probability that a sum of independent Bernoulli(`probs[i]`) variables is
/// at least `threshold`.
pub fn poisson_binomial_tail(probs: &[f64], threshold: usize) -> f64 {
    if threshold == 0 {
        return 1.0;
    }
    if threshold > probs.len() {
        return 0.0;
    }
    let mut pmf = alloc::vec![0.0f64; probs.len() + 1];
    pmf[0] = 1.0;
    for (i, &q) in probs.iter().enumerate() {
        for j in (0..=i + 1).rev() {
            let stay = pmf[j] * (1.0 - q);
            let step = if j > 0 { pmf[j - 1] * q } else { 0.0 };
            pmf[j] = stay + step;
        }
    }
    pmf[threshold..].iter().sum::<f64>().min(1.0)
}

/// Binomial(m, q) upper tail `P[X >= threshold]`.
pub fn binomial_tail(m: usize, q: f64, threshold: usize) -> f64 {
    poisson_binomial_tail(&alloc::vec![q; m], threshold)
}
