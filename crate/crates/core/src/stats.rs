//! Monte Carlo estimation helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Asymptotic Kolmogorov–Smirnov coefficients `c(α)` with `D_crit ≈ c / √m`.
pub const KS_COEFF_05: f64 = 1.36;
pub const KS_COEFF_01: f64 = 1.63;

/// Point estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCI {
    pub mean: f64,
    pub half_width: f64,
    pub count: usize,
}

impl EstimateCI {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    /// Standard error implied by the half-width.
    pub fn std_error(&self) -> f64 {
        self.half_width / Z_95
    }

    pub fn overlaps(&self, other: &EstimateCI) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Sample mean and 95% half-width `1.96 s / √m`.
///
/// Samples are sorted before summation, so the result is bit-identical under
/// any permutation of the input.
pub fn mean_ci(samples: &[f64]) -> Result<EstimateCI> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: m });
    }
    let v = sorted(samples);
    let mean = pairwise_sum(&v) / m as f64;
    let sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (m - 1) as f64;
    Ok(EstimateCI {
        mean,
        half_width: Z_95 * (var / m as f64).sqrt(),
        count: m,
    })
}

/// Sample standard deviation (unbiased variance).
pub fn std_dev(samples: &[f64]) -> Result<f64> {
    let est = mean_ci(samples)?;
    Ok(est.std_error() * (est.count as f64).sqrt())
}

/// Kolmogorov–Smirnov distance `sup |F_m - F|` between the empirical CDF of
/// `samples` and `cdf`, taking both one-sided gaps at every sample point.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(samples);
    let m = v.len() as f64;
    let mut d = 0.0f64;
    let mut k = 0;
    while k < v.len() {
        // ties share one jump of the empirical CDF
        let mut end = k + 1;
        while end < v.len() && v[end] == v[k] {
            end += 1;
        }
        let f = cdf(v[k]);
        d = d.max(f - k as f64 / m).max(end as f64 / m - f);
        k = end;
    }
    d
}

/// Critical KS distance at `m` samples for the given coefficient.
pub fn ks_critical(m: usize, coeff: f64) -> f64 {
    coeff / (m as f64).sqrt()
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test of observed counts against cell probabilities.
///
/// Cells whose expected count is below 5 are pooled (in order) so that each
/// pooled cell reaches 5.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    assert_eq!(observed.len(), probs.len(), "observed/probability length mismatch");
    let total: u64 = observed.iter().sum();
    let total_f = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p * total_f;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: cells.len(),
        });
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Ordinary least-squares fit `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{exponential, rng_from_seed};
    use proptest::prelude::*;

    #[test]
    fn constant_samples() {
        let e = mean_ci(&[3.0; 10]).unwrap();
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.half_width, 0.0);
    }

    #[test]
    fn two_point_hand_computation() {
        let e = mean_ci(&[0.0, 2.0]).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!((e.half_width - 1.96).abs() < 1e-15);
        assert_eq!(e.count, 2);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            mean_ci(&[1.0]),
            Err(Error::InsufficientSamples { need: 2, got: 1 })
        );
    }

    #[test]
    fn half_width_scales_inverse_sqrt() {
        let mut rng = rng_from_seed(11);
        let a: Vec<f64> = (0..20_000).map(|_| exponential(&mut rng, 1.0)).collect();
        let b: Vec<f64> = (0..80_000).map(|_| exponential(&mut rng, 1.0)).collect();
        let ratio = mean_ci(&a).unwrap().half_width / mean_ci(&b).unwrap().half_width;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn ks_single_sample_at_median() {
        let d = ks_distance(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 + x.min(0.5) });
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_quantile_samples() {
        let m = 99;
        let xs: Vec<f64> = (1..=m).map(|k| k as f64 / (m + 1) as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d <= 1.0 / (m + 1) as f64 + 1e-12, "d = {d}");
    }

    #[test]
    fn ks_exponential_samples() {
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..10_000).map(|_| exponential(&mut rng, 1.0)).collect();
        let d = ks_distance(&xs, |x| 1.0 - (-x).exp());
        assert!(d <= 0.02, "d = {d}");
        assert!(ks_critical(10_000, KS_COEFF_01) < 0.0164);
    }

    #[test]
    fn chi_square_uniform_die() {
        let mut rng = rng_from_seed(9);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[(rand::Rng::random_range(&mut rng, 0..6)) as usize] += 1;
        }
        let r = chi_square(&counts, &[1.0 / 6.0; 6]).unwrap();
        assert_eq!(r.dof, 5);
        assert!(r.p_value > 0.001);
        let skewed = chi_square(&[2000, 1000], &[0.5, 0.5]).unwrap();
        assert!(skewed.p_value < 1e-10);
    }

    #[test]
    fn fit_recovers_line() {
        let (a, b) = linear_fit(&[1.0, 2.0, 3.0], &[5.0, 7.0, 9.0]);
        assert!((a - 2.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn mean_ci_permutation_invariant(mut xs in prop::collection::vec(-1e3f64..1e3, 2..200), seed in any::<u64>()) {
            let a = mean_ci(&xs).unwrap();
            let mut rng = rng_from_seed(seed);
            rand::seq::SliceRandom::shuffle(xs.as_mut_slice(), &mut rng);
            let b = mean_ci(&xs).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn ks_invariant_under_monotone_map(xs in prop::collection::vec(0.0f64..5.0, 1..100)) {
            let cdf = |x: f64| 1.0 - (-x).exp();
            let d1 = ks_distance(&xs, cdf);
            let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let d2 = ks_distance(&ys, |y: f64| cdf(y.ln()));
            prop_assert!((d1 - d2).abs() < 1e-12);
        }
    }
}
