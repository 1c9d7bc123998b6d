//! Exact event-driven simulation of the edge-count chain.
//!
//! The count is advanced as a birth-death chain: from `k` edges the holding
//! time is `Exp(λ_k + μ_k)` and the jump goes up with probability
//! `λ_k / (λ_k + μ_k)`. Every sampler takes an explicit seed; batch helpers
//! derive per-replica seeds with [`replica_seed`] and run replicas in
//! parallel, collecting in replica order.

use rand::RngCore;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::analytic::{
    binomial_tail, cycle_expectation, expected_descent, expected_hitting,
    expected_stationarity_time,
};
use crate::error::{domain, Error, Result};
use crate::logspace::LogNonNegative;
use crate::model::{DerivedParams, ModelParams};
use crate::rng::{exponential, open_unit, replica_seed, rng_from_seed};
use crate::stats::{mean_ci, EstimateCI};

/// Multiple of the mean stationarity time used as the default censoring cap.
pub const DEFAULT_CAP_MULTIPLE: f64 = 1e4;

/// Default censoring cap `10^4 · E(T_s)`.
pub fn default_cap(d: &DerivedParams) -> f64 {
    DEFAULT_CAP_MULTIPLE * expected_stationarity_time(d)
}

/// Runs `f(replica_seed(master, r))` for `r = 0..replicas` on the current
/// rayon pool and returns results in replica order.
pub fn replicate<T, F>(replicas: usize, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| f(replica_seed(master, r)))
        .collect()
}

/// One jump of the count chain from `k`: `(holding time, next count)`.
#[inline]
fn step<R: RngCore + ?Sized>(d: &DerivedParams, k: u64, rng: &mut R) -> (f64, u64) {
    let up = d.birth_rate_unchecked(k);
    let total = up + d.death_rate_unchecked(k);
    let dt = exponential(rng, total);
    // U ∈ (0, 1], so a zero rate is never chosen
    if open_unit(rng) * total <= up {
        (dt, k + 1)
    } else {
        (dt, k - 1)
    }
}

fn check_count(k: u64, d: &DerivedParams) -> Result<()> {
    if k > d.pairs() {
        Err(Error::EdgeCount {
            count: k,
            max: d.pairs(),
        })
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(domain(name, x, "(0, inf]"))
    }
}

/// Edge-count path on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub horizon: f64,
    /// `(time, count)` pairs, starting with `(0, start)`.
    pub events: Vec<(f64, u64)>,
}

impl Trajectory {
    pub fn start(&self) -> u64 {
        self.events[0].1
    }

    /// Count at time `t` (right-continuous).
    pub fn count_at(&self, t: f64) -> u64 {
        let idx = self.events.partition_point(|&(s, _)| s <= t);
        self.events[idx.saturating_sub(1)].1
    }

    /// Total time in `[0, horizon]` with count equal to `level`.
    pub fn occupation_time(&self, level: u64) -> f64 {
        let mut total = 0.0;
        for (w, &(t, k)) in self.events.iter().enumerate() {
            let end = self.events.get(w + 1).map_or(self.horizon, |e| e.0);
            if k == level {
                total += end - t;
            }
        }
        total
    }
}

fn run_trajectory<R: RngCore + ?Sized>(
    d: &DerivedParams,
    start: u64,
    horizon: f64,
    rng: &mut R,
) -> Trajectory {
    let mut events = vec![(0.0, start)];
    let (mut t, mut k) = (0.0, start);
    loop {
        let (dt, next) = step(d, k, rng);
        t += dt;
        if t > horizon {
            break;
        }
        k = next;
        events.push((t, k));
    }
    Trajectory {
        params: *d.params(),
        horizon,
        events,
    }
}

pub fn simulate_trajectory(d: &DerivedParams, start: u64, horizon: f64, seed: u64) -> Result<Trajectory> {
    check_count(start, d)?;
    check_positive("horizon", horizon)?;
    if !horizon.is_finite() {
        return Err(domain("horizon", horizon, "finite"));
    }
    Ok(run_trajectory(d, start, horizon, &mut rng_from_seed(seed)))
}

/// Trajectory started from a `Binomial(N, p_n)` count.
pub fn simulate_stationary_trajectory(d: &DerivedParams, horizon: f64, seed: u64) -> Result<Trajectory> {
    check_positive("horizon", horizon)?;
    let mut rng = rng_from_seed(seed);
    let start = sample_stationary_count(d, &mut rng);
    Ok(run_trajectory(d, start, horizon, &mut rng))
}

/// Draw from the stationary edge-count law `Binomial(N, p_n)`.
pub fn sample_stationary_count<R: RngCore + ?Sized>(d: &DerivedParams, rng: &mut R) -> u64 {
    Binomial::new(d.pairs(), d.edge_prob())
        .expect("valid binomial")
        .sample(rng)
}

/// Result of one capped first-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Passage {
    Hit(f64),
    Censored { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingSample {
    pub start: u64,
    pub target: u64,
    pub passage: Passage,
    pub seed: u64,
}

impl HittingSample {
    pub fn time(&self) -> Option<f64> {
        match self.passage {
            Passage::Hit(t) => Some(t),
            Passage::Censored { .. } => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self.passage, Passage::Censored { .. })
    }
}

/// First passage of the count from `start` to `target`, both directions
/// allowed, censored once the clock passes `cap`.
pub(crate) fn first_passage<R: RngCore + ?Sized>(
    d: &DerivedParams,
    start: u64,
    target: u64,
    cap: f64,
    rng: &mut R,
) -> Passage {
    let (mut t, mut k) = (0.0, start);
    while k != target {
        let (dt, next) = step(d, k, rng);
        t += dt;
        if t > cap {
            return Passage::Censored { cap };
        }
        k = next;
    }
    Passage::Hit(t)
}

fn check_hitting(d: &DerivedParams, start: u64, target: u64, cap: f64) -> Result<()> {
    if start >= target {
        return Err(Error::Ordering(format!(
            "hitting target must exceed the start (from = {start}, to = {target})"
        )));
    }
    check_count(target, d)?;
    check_positive("cap", cap)
}

pub fn sample_hitting_time(
    d: &DerivedParams,
    start: u64,
    target: u64,
    seed: u64,
    cap: f64,
) -> Result<HittingSample> {
    check_hitting(d, start, target, cap)?;
    let passage = first_passage(d, start, target, cap, &mut rng_from_seed(seed));
    Ok(HittingSample {
        start,
        target,
        passage,
        seed,
    })
}

pub fn sample_hitting_times(
    d: &DerivedParams,
    start: u64,
    target: u64,
    replicas: usize,
    seed: u64,
    cap: f64,
) -> Result<Vec<HittingSample>> {
    check_hitting(d, start, target, cap)?;
    Ok(replicate(replicas, seed, |s| {
        sample_hitting_time(d, start, target, s, cap).expect("validated")
    }))
}

/// Maximum of `N` independent `Exp(λ)` refresh clocks.
pub fn sample_stationarity_time(d: &DerivedParams, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let rate = d.update_rate();
    (0..d.pairs()).fold(0.0, |m, _| f64::max(m, exponential(&mut rng, rate)))
}

pub fn sample_stationarity_times(d: &DerivedParams, replicas: usize, seed: u64) -> Vec<f64> {
    replicate(replicas, seed, |s| sample_stationarity_time(d, s))
}

/// One descent from `i` to `s`, with the time spent at or above `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub i: u64,
    pub s: u64,
    pub time_above: f64,
    /// Length of the descent, a draw of `τ_i(s)`.
    pub descent_time: f64,
}

pub fn sample_time_above(d: &DerivedParams, i: u64, s: u64, seed: u64) -> Result<CycleSample> {
    if s >= i {
        return Err(Error::Ordering(format!(
            "cycle needs s < i (s = {s}, i = {i})"
        )));
    }
    check_count(i, d)?;
    let mut rng = rng_from_seed(seed);
    let (mut t, mut above, mut k) = (0.0, 0.0, i);
    while k != s {
        let (dt, next) = step(d, k, &mut rng);
        t += dt;
        if k >= i {
            above += dt;
        }
        k = next;
    }
    Ok(CycleSample {
        i,
        s,
        time_above: above,
        descent_time: t,
    })
}

/// Regenerative estimate of `E(τ_0(i))` for a supercritical target.
///
/// `E(τ_0(i)) = E(τ_0(s)) + E(C) - E(τ_i(s))` where `C` is an `i → s → i`
/// cycle and `E(C) = E(T_{≥i}) / P(η ≥ i)`. Only `E(T_{≥i})` is simulated;
/// the tail and both correction terms are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalEstimate {
    pub i: u64,
    pub s: u64,
    pub time_above: EstimateCI,
    pub tail: LogNonNegative,
    pub cycle: LogNonNegative,
    /// `E(τ_0(s))`.
    pub lead_in: LogNonNegative,
    /// `E(τ_i(s))`.
    pub descent: LogNonNegative,
    /// `E(C) + E(τ_0(s)) - E(τ_i(s))`.
    pub estimate: LogNonNegative,
    /// `E(C) + E(τ_0(s))`, an upper bound that omits the descent correction.
    pub upper_biased: LogNonNegative,
    /// Half-width of the 95% interval, from the simulated numerator only.
    pub half_width: LogNonNegative,
}

impl RenewalEstimate {
    pub fn count(&self) -> usize {
        self.time_above.count
    }

    pub fn lower(&self) -> LogNonNegative {
        self.estimate
            .checked_sub(self.half_width)
            .unwrap_or(LogNonNegative::ZERO)
    }

    pub fn upper(&self) -> LogNonNegative {
        self.estimate + self.half_width
    }

    /// Linear-scale interval, when representable.
    pub fn as_linear(&self) -> Option<EstimateCI> {
        Some(EstimateCI {
            mean: self.estimate.to_linear()?,
            half_width: self.half_width.to_linear()?,
            count: self.count(),
        })
    }
}

/// Smallest replica count accepted by [`estimate_hitting_renewal`].
pub const MIN_RENEWAL_REPLICAS: usize = 100;

pub fn estimate_hitting_renewal(
    d: &DerivedParams,
    c: f64,
    replicas: usize,
    seed: u64,
) -> Result<RenewalEstimate> {
    let eq = d.equilibrium_density();
    if !(c > eq && c.is_finite()) {
        return Err(domain("c", c, format!("({eq}, inf), above beta/(2 alpha)")));
    }
    if replicas < MIN_RENEWAL_REPLICAS {
        return Err(Error::InsufficientSamples {
            need: MIN_RENEWAL_REPLICAS,
            got: replicas,
        });
    }
    let i = d.count_at_density(c);
    let s = d.count_at_density(eq);
    check_count(i, d)?;
    if s == 0 || s >= i {
        return Err(Error::Ordering(format!(
            "renewal split needs 0 < s < i (s = {s}, i = {i}); increase n"
        )));
    }
    let above: Vec<f64> = replicate(replicas, seed, |r| {
        sample_time_above(d, i, s, r).expect("validated").time_above
    });
    let time_above = mean_ci(&above)?;
    let tail = binomial_tail(i, d)?.tail;
    let cycle = cycle_expectation(time_above.mean, tail)?;
    let lead_in = expected_hitting(0, s, d)?.value;
    let descent = expected_descent(i, s, d)?;
    let upper_biased = cycle + lead_in;
    // E(C) ≥ E(τ_i(s)) always holds in expectation; a noisy small estimate
    // can reverse it, in which case the estimate floors at E(τ_0(s)).
    let estimate = (cycle + lead_in).checked_sub(descent).unwrap_or(lead_in);
    Ok(RenewalEstimate {
        i,
        s,
        time_above,
        tail,
        cycle,
        lead_in,
        descent,
        estimate,
        upper_biased,
        half_width: LogNonNegative::from_value(time_above.half_width) / tail,
    })
}

fn check_escape(d: &DerivedParams, j: u64, i: u64, s: u64) -> Result<()> {
    if !(s < j && j < i) {
        return Err(Error::Ordering(format!(
            "escape needs s < j < i (s = {s}, j = {j}, i = {i})"
        )));
    }
    check_count(i, d)
}

/// Whether the count started at `j` reaches `i` before `s`.
pub fn sample_escape(d: &DerivedParams, j: u64, i: u64, s: u64, seed: u64) -> Result<bool> {
    check_escape(d, j, i, s)?;
    let mut rng = rng_from_seed(seed);
    let mut k = j;
    while k != i && k != s {
        k = step(d, k, &mut rng).1;
    }
    Ok(k == i)
}

/// Monte Carlo estimate of `P(τ_j(i) < τ_j(s))`.
pub fn sample_escape_probability(
    d: &DerivedParams,
    j: u64,
    i: u64,
    s: u64,
    replicas: usize,
    seed: u64,
) -> Result<EstimateCI> {
    check_escape(d, j, i, s)?;
    let hits: Vec<f64> = replicate(replicas, seed, |r| {
        if sample_escape(d, j, i, s, r).expect("validated") {
            1.0
        } else {
            0.0
        }
    });
    mean_ci(&hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{escape_probability, expected_hitting_step, fluid_trajectory, mean_holding_time, stationarity_cdf};
    use crate::model::derive;
    use crate::stats::{chi_square, ks_distance, ks_critical, KS_COEFF_01};
    use statrs::distribution::{Binomial as BinomialLaw, Discrete};

    fn unit(n: u64) -> DerivedParams {
        derive(n, 1.0, 1.0).unwrap()
    }

    fn hit_times(samples: &[HittingSample]) -> Vec<f64> {
        samples.iter().map(|s| s.time().expect("not censored")).collect()
    }

    #[test]
    fn first_event_from_empty() {
        let d = derive(10, 1.0, 2.0).unwrap();
        let firsts: Vec<f64> = replicate(100_000, 11, |s| {
            simulate_trajectory(&d, 0, 5.0, s).unwrap().events[1].0
        });
        let ci = mean_ci(&firsts).unwrap();
        let expected = 9.0 / (2.0 * 45.0);
        assert!((ci.mean - expected).abs() < 3.0 * ci.std_error(), "{ci:?}");
    }

    #[test]
    fn two_vertex_occupation() {
        let d = derive(2, 1.0, 3.0).unwrap();
        let fractions: Vec<f64> = replicate(200, 5, |s| {
            simulate_trajectory(&d, 0, 200.0, s).unwrap().occupation_time(1) / 200.0
        });
        let ci = mean_ci(&fractions).unwrap();
        assert!((ci.mean - 0.75).abs() < 3.0 * ci.std_error(), "{ci:?}");
    }

    #[test]
    fn paths_move_by_one() {
        let d = unit(15);
        for seed in 0..20 {
            let tr = simulate_trajectory(&d, 30, 5.0, seed).unwrap();
            for w in tr.events.windows(2) {
                assert!(w[1].0 > w[0].0);
                assert_eq!(w[0].1.abs_diff(w[1].1), 1);
                assert!(w[1].1 <= d.pairs());
            }
            assert!(tr.events.last().unwrap().0 <= 5.0);
            assert_eq!(tr.count_at(0.0), 30);
        }
    }

    #[test]
    fn trajectory_rejects_bad_input() {
        let d = unit(4);
        assert!(simulate_trajectory(&d, 7, 1.0, 0).is_err());
        assert!(simulate_trajectory(&d, 0, 0.0, 0).is_err());
    }

    #[test]
    fn single_edge_hitting_is_exponential() {
        let d = unit(2);
        let samples = sample_hitting_times(&d, 0, 1, 10_000, 3, 1e6).unwrap();
        let ks = ks_distance(&hit_times(&samples), |t| -(-t).exp_m1());
        assert!(ks <= 0.02, "{ks}");
    }

    #[test]
    fn hitting_mean_matches_recursion() {
        let d = unit(20);
        let samples = sample_hitting_times(&d, 0, 6, 20_000, 8, default_cap(&d)).unwrap();
        let ci = mean_ci(&hit_times(&samples)).unwrap();
        let exact = expected_hitting(0, 6, &d).unwrap().value.value();
        assert!((ci.mean - exact).abs() < 3.0 * ci.std_error(), "{ci:?} vs {exact}");
    }

    #[test]
    fn top_step_not_censored() {
        let d = unit(3);
        let samples = sample_hitting_times(&d, 2, 3, 500, 4, default_cap(&d)).unwrap();
        assert!(samples.iter().all(|s| !s.is_censored()));
    }

    #[test]
    fn censoring_is_reported() {
        let d = unit(40);
        let s = sample_hitting_time(&d, 0, 500, 1, 0.5).unwrap();
        assert_eq!(s.passage, Passage::Censored { cap: 0.5 });
        assert!(s.time().is_none());
        assert!(sample_hitting_time(&d, 6, 6, 1, 1.0).is_err());
    }

    #[test]
    fn stationarity_time_law() {
        let d = unit(30);
        let t = sample_stationarity_times(&d, 10_000, 21);
        let ks = ks_distance(&t, |x| stationarity_cdf(x.max(0.0), &d).unwrap());
        assert!(ks <= 0.02, "{ks}");
        let ci = mean_ci(&t).unwrap();
        let exact = expected_stationarity_time(&d);
        assert!((ci.mean - exact).abs() < 3.0 * ci.std_error(), "{ci:?} vs {exact}");
        let single = sample_stationarity_times(&derive(2, 0.5, 1.0).unwrap(), 10_000, 2);
        assert!(ks_distance(&single, |x| -(-1.5 * x).exp_m1()) < ks_critical(10_000, KS_COEFF_01));
    }

    #[test]
    fn time_above_bracket() {
        let d = unit(40);
        let hold = mean_holding_time(32, &d).unwrap();
        let samples: Vec<CycleSample> = replicate(2000, 17, |s| sample_time_above(&d, 32, 20, s).unwrap());
        assert!(samples.iter().all(|c| c.time_above > 0.0 && c.descent_time >= c.time_above));
        let ci = mean_ci(&samples.iter().map(|c| c.time_above).collect::<Vec<_>>()).unwrap();
        assert!(ci.mean >= hold && ci.mean <= 50.0 * hold, "{ci:?} vs {hold}");
        let descent = mean_ci(&samples.iter().map(|c| c.descent_time).collect::<Vec<_>>()).unwrap();
        let exact = expected_descent(32, 20, &d).unwrap().value();
        assert!((descent.mean - exact).abs() < 3.0 * descent.std_error(), "{descent:?} vs {exact}");
        let degenerate = sample_time_above(&d, 21, 20, 1).unwrap();
        assert!(degenerate.time_above > 0.0);
        assert!(sample_time_above(&d, 20, 20, 1).is_err());
    }

    #[test]
    fn renewal_matches_exact_mean() {
        let d = unit(30);
        let est = estimate_hitting_renewal(&d, 0.8, 4000, 5).unwrap();
        assert_eq!((est.i, est.s), (24, 15));
        let exact = expected_hitting(0, 24, &d).unwrap().value;
        let (lo, hi) = (est.lower(), est.upper());
        assert!(lo <= exact && exact <= hi, "{est:?} vs {exact}");
        assert!(est.upper_biased > est.estimate);
        assert!(estimate_hitting_renewal(&d, 0.5, 1000, 5).is_err());
        assert!(estimate_hitting_renewal(&d, 0.8, 50, 5).is_err());
    }

    #[test]
    fn renewal_log_slope_tracks_entropy_exponent() {
        let ns = [30u64, 40, 50];
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (k, &n) in ns.iter().enumerate() {
            let d = unit(n);
            let est = estimate_hitting_renewal(&d, 0.8, 100_000, 40 + k as u64).unwrap();
            let exact = expected_hitting(0, est.i, &d).unwrap().value;
            assert!(est.lower() <= exact && exact <= est.upper(), "n = {n}: {est:?} vs {exact}");
            xs.push(n as f64);
            ys.push(est.estimate.ln());
        }
        let per_vertex = 0.8 * 1.6f64.ln() - 0.8 + 0.5;
        let (slope, _) = crate::stats::linear_fit(&xs, &ys);
        assert!((slope / per_vertex - 1.0).abs() <= 0.2, "slope {slope} vs {per_vertex}");
    }

    #[test]
    fn renewal_with_unit_tail() {
        // i below the stationary mean: tail is 1 and E(C) is the time above
        let d = derive(20, 1.0, 1.0).unwrap();
        let est = estimate_hitting_renewal(&d, 0.51, 200, 1);
        // [0.51·20] = 10 = s, so the split degenerates
        assert!(est.is_err());
    }

    #[test]
    fn escape_matches_gamblers_ruin() {
        let d = unit(3);
        let ci = sample_escape_probability(&d, 1, 2, 0, 20_000, 13).unwrap();
        assert!((ci.mean - 0.5).abs() < 3.0 * ci.std_error());
        let d = unit(20);
        let exact = escape_probability(14, 18, 10, &d).unwrap();
        let ci = sample_escape_probability(&d, 14, 18, 10, 20_000, 14).unwrap();
        assert!((ci.mean - exact).abs() < 3.0 * ci.std_error(), "{ci:?} vs {exact}");
        assert!(sample_escape_probability(&d, 10, 18, 10, 10, 1).is_err());
    }

    #[test]
    fn return_below_has_floor() {
        for &n in &[20u64, 40, 60] {
            let d = unit(n);
            let i = d.count_at_density(0.9);
            let s = d.count_at_density(0.5);
            let ci = sample_escape_probability(&d, i - 1, i, s, 4000, n).unwrap();
            assert!(1.0 - ci.mean >= 0.01, "n = {n}: {ci:?}");
        }
    }

    #[test]
    fn stationary_marginal_is_binomial() {
        let d = unit(8);
        let law = BinomialLaw::new(d.edge_prob(), d.pairs()).unwrap();
        let probs: Vec<f64> = (0..=d.pairs()).map(|k| law.pmf(k)).collect();
        for &t in &[0.3, 2.0] {
            let counts: Vec<u64> = replicate(10_000, 31, |s| {
                simulate_stationary_trajectory(&d, 3.0, s).unwrap().count_at(t)
            });
            let mut observed = vec![0u64; probs.len()];
            for k in counts {
                observed[k as usize] += 1;
            }
            let test = chi_square(&observed, &probs).unwrap();
            assert!(test.p_value > 0.001, "t = {t}: {test:?}");
        }
    }

    #[test]
    fn fluid_limit() {
        let d = unit(2000);
        let grid = [0.25, 0.5, 1.0];
        let paths: Vec<Vec<u64>> = replicate(100, 2, |s| {
            let tr = simulate_trajectory(&d, 0, 1.0, s).unwrap();
            grid.iter().map(|&t| tr.count_at(t)).collect()
        });
        for (g, &t) in grid.iter().enumerate() {
            let xs: Vec<f64> = paths.iter().map(|p| p[g] as f64 / 2000.0).collect();
            let mean = mean_ci(&xs).unwrap().mean;
            let fluid = fluid_trajectory(t, 0.0, &d).unwrap();
            assert!((mean - fluid).abs() < 0.01, "t = {t}: {mean} vs {fluid}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let d = unit(25);
        let a = simulate_trajectory(&d, 3, 2.0, 99).unwrap();
        let b = simulate_trajectory(&d, 3, 2.0, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_trajectory(&d, 3, 2.0, 100).unwrap();
        assert_ne!(a, c);
        let serial: Vec<f64> = (0..64)
            .map(|r| sample_stationarity_time(&d, replica_seed(4, r)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let parallel = pool.install(|| sample_stationarity_times(&d, 64, 4));
        assert_eq!(serial, parallel);
    }

    #[test]
    fn first_step_mean_from_zero() {
        let d = unit(3);
        let samples = sample_hitting_times(&d, 0, 1, 20_000, 7, 1e6).unwrap();
        let ci = mean_ci(&hit_times(&samples)).unwrap();
        let exact = expected_hitting_step(0, &d).unwrap().value();
        assert!((ci.mean - exact).abs() < 3.0 * ci.std_error());
    }
}
