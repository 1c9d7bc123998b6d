//! Closed-form and numerically stable evaluation of the model's exact results.
//!
//! Covers the single-edge transition functions, separation and the law of the
//! fastest time to stationarity, expected hitting times of the edge-count
//! chain (stable recursion, closed form, and a dense linear-solve oracle),
//! the fluid limit, the relative-entropy exponent with binomial tail bounds,
//! the renewal identity for regenerative cycles, and the component-size rate
//! functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::logspace::{log_sum_exp, LogNonNegative};
use crate::model::DerivedParams;

/// State of a single vertex pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Absent,
    Present,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(domain("t", t, "[0, inf)"))
    }
}

/// Stationary law of one pair: `π(Present) = p_n`, `π(Absent) = q_n`.
pub fn stationary_probability(state: EdgeState, d: &DerivedParams) -> f64 {
    match state {
        EdgeState::Present => d.edge_prob(),
        EdgeState::Absent => d.absent_prob(),
    }
}

/// `P(χ(t) = to | χ(0) = from)` for the on-off edge process.
pub fn transition_probability(
    from: EdgeState,
    to: EdgeState,
    t: f64,
    d: &DerivedParams,
) -> Result<f64> {
    check_time(t)?;
    let stay = (-d.update_rate() * t).exp();
    let moved = -(-d.update_rate() * t).exp_m1();
    let p = d.edge_prob();
    let q = d.absent_prob();
    Ok(match (from, to) {
        (EdgeState::Absent, EdgeState::Present) => p * moved,
        (EdgeState::Absent, EdgeState::Absent) => stay + q * moved,
        (EdgeState::Present, EdgeState::Present) => stay + p * moved,
        (EdgeState::Present, EdgeState::Absent) => q * moved,
    })
}

/// Separation of a single edge process from stationarity, `e^{-λt}`.
///
/// Identical for both starting states.
pub fn edge_separation(t: f64, d: &DerivedParams) -> Result<f64> {
    check_time(t)?;
    Ok((-d.update_rate() * t).exp())
}

/// `P(T_s ≤ t) = (1 - e^{-λt})^N`.
pub fn stationarity_cdf(t: f64, d: &DerivedParams) -> Result<f64> {
    check_time(t)?;
    let s = (-d.update_rate() * t).exp();
    Ok((d.pairs() as f64 * (-s).ln_1p()).exp())
}

/// Separation of the whole graph, `1 - P(T_s ≤ t)`.
pub fn graph_separation(t: f64, d: &DerivedParams) -> Result<f64> {
    check_time(t)?;
    let s = (-d.update_rate() * t).exp();
    Ok(-(d.pairs() as f64 * (-s).ln_1p()).exp_m1())
}

/// Standard Gumbel CDF `e^{-e^{-x}}`.
pub fn gumbel_limit_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Centres a stationarity time for the Gumbel limit: `αt - 2 log n + log 2`.
pub fn gumbel_centred(t: f64, d: &DerivedParams) -> f64 {
    d.alpha() * t - 2.0 * (d.n() as f64).ln() + std::f64::consts::LN_2
}

/// `H_m = Σ_{k=1}^m 1/k`.
pub fn harmonic(m: u64) -> f64 {
    const EXACT_UP_TO: u64 = 1 << 20;
    if m <= EXACT_UP_TO {
        // smallest terms first
        (1..=m).rev().map(|k| 1.0 / k as f64).sum()
    } else {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let x = m as f64;
        let inv2 = 1.0 / (x * x);
        x.ln() + EULER_GAMMA + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0
    }
}

/// Mean of the maximum of `N` i.i.d. `Exp(λ)` clocks, `H_N / λ`.
pub fn expected_stationarity_time(d: &DerivedParams) -> f64 {
    harmonic(d.pairs()) / d.update_rate()
}

/// `E(H_i) = 1/(λ_i + μ_i)`, the mean holding time of the count chain in `i`.
pub fn mean_holding_time(i: u64, d: &DerivedParams) -> Result<f64> {
    Ok(1.0 / (d.birth_rate(i)? + d.death_rate(i)?))
}

/// Jump probabilities `(p(i,i-1), p(i,i+1))` of the embedded chain.
pub fn jump_probabilities(i: u64, d: &DerivedParams) -> Result<(f64, f64)> {
    let (up, down) = (d.birth_rate(i)?, d.death_rate(i)?);
    let total = up + down;
    Ok((down / total, up / total))
}

/// Expected first-passage time from `from` edges to `to > from` edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingExpectation {
    pub from: u64,
    pub to: u64,
    pub value: LogNonNegative,
}

/// `E(τ_k(k+1))` for `k = 0, …, upto - 1`, by the first-step recursion.
pub fn hitting_steps(d: &DerivedParams, upto: u64) -> Result<Vec<LogNonNegative>> {
    if upto > d.pairs() {
        return Err(Error::EdgeCount {
            count: upto,
            max: d.pairs(),
        });
    }
    let mut steps = Vec::with_capacity(upto as usize);
    let mut prev = LogNonNegative::ZERO;
    for k in 0..upto {
        let ln_up = d.birth_rate_unchecked(k).ln();
        // E_k = 1/λ_k + (μ_k/λ_k) E_{k-1}; the second term vanishes at k = 0.
        let ln_hold = -ln_up;
        let cur = if k == 0 {
            LogNonNegative::from_ln(ln_hold)
        } else {
            let ln_ratio = d.death_rate_unchecked(k).ln() - ln_up;
            LogNonNegative::from_ln(ln_hold) + LogNonNegative::from_ln(ln_ratio + prev.ln())
        };
        steps.push(cur);
        prev = cur;
    }
    Ok(steps)
}

/// `E(τ_i(i+1))`.
pub fn expected_hitting_step(i: u64, d: &DerivedParams) -> Result<LogNonNegative> {
    if i >= d.pairs() {
        return Err(Error::Ordering(format!(
            "no upward step from the complete graph (i = {i}, N = {})",
            d.pairs()
        )));
    }
    Ok(*hitting_steps(d, i + 1)?.last().expect("at least one step"))
}

fn check_hitting_pair(from: u64, to: u64, d: &DerivedParams) -> Result<()> {
    if from >= to {
        return Err(Error::Ordering(format!(
            "hitting target must exceed the start (from = {from}, to = {to})"
        )));
    }
    if to > d.pairs() {
        return Err(Error::EdgeCount {
            count: to,
            max: d.pairs(),
        });
    }
    Ok(())
}

/// `E(τ_from(to)) = Σ_{k=from}^{to-1} E(τ_k(k+1))`.
pub fn expected_hitting(from: u64, to: u64, d: &DerivedParams) -> Result<HittingExpectation> {
    check_hitting_pair(from, to, d)?;
    let steps = hitting_steps(d, to)?;
    Ok(HittingExpectation {
        from,
        to,
        value: steps[from as usize..].iter().sum(),
    })
}

/// `E(τ_i(i+1))` from the factorial/binomial closed form, evaluated with
/// log-gamma. Used to cross-check [`hitting_steps`].
pub fn expected_hitting_step_closed_form(i: u64, d: &DerivedParams) -> Result<LogNonNegative> {
    let big_n = d.pairs();
    if i >= big_n {
        return Err(Error::Ordering(format!("no upward step from i = {i}")));
    }
    let m = (d.n() - 1) as f64;
    let ln_ratio = (d.alpha() / d.beta() * m).ln();
    let terms: Vec<f64> = (0..=i)
        .map(|k| ln_binomial(big_n, i - k) + k as f64 * ln_ratio)
        .collect();
    let ln_prefactor = m.ln() + ln_gamma((big_n - i) as f64) + ln_gamma((i + 1) as f64)
        - d.beta().ln()
        - ln_gamma((big_n + 1) as f64);
    Ok(LogNonNegative::from_ln(ln_prefactor + log_sum_exp(&terms)))
}

/// `E(τ_from(to))` summing the closed-form steps.
pub fn expected_hitting_closed_form(
    from: u64,
    to: u64,
    d: &DerivedParams,
) -> Result<LogNonNegative> {
    check_hitting_pair(from, to, d)?;
    (from..to)
        .map(|k| expected_hitting_step_closed_form(k, d))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.iter().sum())
}

/// Largest system the exact oracle will solve.
pub const ORACLE_DIMENSION_CAP: u64 = 2000;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite rate")
}

/// Solves a tridiagonal system exactly by forward elimination and back
/// substitution. `lower[0]` and `upper[dim-1]` are ignored.
fn solve_tridiagonal_exact(
    lower: &[BigRational],
    diag: &[BigRational],
    upper: &[BigRational],
    rhs: &[BigRational],
) -> Option<Vec<BigRational>> {
    let dim = diag.len();
    let mut c = Vec::with_capacity(dim);
    let mut r = Vec::with_capacity(dim);
    for k in 0..dim {
        let (pivot, value) = if k == 0 {
            (diag[0].clone(), rhs[0].clone())
        } else {
            let f: &BigRational = &lower[k];
            (
                &diag[k] - f * &c[k - 1],
                &rhs[k] - f * &r[k - 1],
            )
        };
        if pivot.is_zero() {
            return None;
        }
        c.push(&upper[k] / &pivot);
        r.push(value / &pivot);
    }
    let mut x = vec![BigRational::zero(); dim];
    for k in (0..dim).rev() {
        x[k] = if k + 1 == dim {
            r[k].clone()
        } else {
            &r[k] - &c[k] * &x[k + 1]
        };
    }
    Some(x)
}

/// Expected hitting time by solving the first-step equations in exact
/// rational arithmetic.
///
/// Unknowns `x_k = E(τ_k(to))` for `k < to` satisfy
/// `(λ_k+μ_k) x_k - λ_k x_{k+1} - μ_k x_{k-1} = 1` with `x_to = 0`. Far above
/// the equilibrium the solution is nearly constant in `k`, so floating-point
/// elimination cancels catastrophically; exact arithmetic does not.
pub fn expected_hitting_oracle(from: u64, to: u64, d: &DerivedParams) -> Result<LogNonNegative> {
    check_hitting_pair(from, to, d)?;
    if to > ORACLE_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim: to,
            cap: ORACLE_DIMENSION_CAP,
        });
    }
    let big_n = BigInt::from(d.pairs());
    let pair_birth = exact(d.beta()) / BigInt::from(d.n() - 1);
    let alpha = exact(d.alpha());
    let birth = |k: u64| &pair_birth * (&big_n - BigInt::from(k));
    let death = |k: u64| &alpha * BigInt::from(k);
    let mut lower = Vec::with_capacity(to as usize);
    let mut diag = Vec::with_capacity(to as usize);
    let mut upper = Vec::with_capacity(to as usize);
    for k in 0..to {
        let (up, down) = (birth(k), death(k));
        diag.push(&up + &down);
        upper.push(-up);
        lower.push(-down);
    }
    let rhs = vec![num_traits::One::one(); to as usize];
    let x = solve_tridiagonal_exact(&lower, &diag, &upper, &rhs)
        .ok_or_else(|| Error::Ordering("first-step system is singular".into()))?;
    Ok(LogNonNegative::from_ln(ln_rational(&x[from as usize])))
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("small integer").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64-bit head").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn ln_rational(x: &BigRational) -> f64 {
    assert!(*x.numer() > BigInt::zero() && *x.denom() > BigInt::zero());
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// `E(τ_from(to))` for a downward passage `from > to`, by the mirrored
/// recursion `E(τ_k(k-1)) = 1/μ_k + (λ_k/μ_k) E(τ_{k+1}(k))`.
pub fn expected_descent(from: u64, to: u64, d: &DerivedParams) -> Result<LogNonNegative> {
    if from <= to {
        return Err(Error::Ordering(format!(
            "descent needs from > to (from = {from}, to = {to})"
        )));
    }
    if from > d.pairs() {
        return Err(Error::EdgeCount {
            count: from,
            max: d.pairs(),
        });
    }
    let mut next = LogNonNegative::ZERO;
    let mut total = Vec::with_capacity((from - to) as usize);
    for k in (to + 1..=d.pairs()).rev() {
        let ln_down = d.death_rate_unchecked(k).ln();
        let mut cur = LogNonNegative::from_ln(-ln_down);
        if !next.is_zero() {
            let ln_ratio = d.birth_rate_unchecked(k).ln() - ln_down;
            cur = cur + LogNonNegative::from_ln(ln_ratio + next.ln());
        }
        if k <= from {
            total.push(cur);
        }
        next = cur;
    }
    Ok(total.iter().sum())
}

/// `P(τ_j(i) < τ_j(s))` for `s < j < i`, by the gambler's-ruin formula for
/// birth-death chains evaluated in log space.
pub fn escape_probability(j: u64, i: u64, s: u64, d: &DerivedParams) -> Result<f64> {
    if !(s < j && j < i) {
        return Err(Error::Ordering(format!(
            "escape needs s < j < i (s = {s}, j = {j}, i = {i})"
        )));
    }
    if i > d.pairs() {
        return Err(Error::EdgeCount {
            count: i,
            max: d.pairs(),
        });
    }
    // ln ρ_k = Σ_{m=s+1}^{k} ln(μ_m / λ_m), ρ_s = 1
    let mut weights = Vec::with_capacity((i - s) as usize);
    let mut acc = 0.0;
    weights.push(acc);
    for m in s + 1..i {
        acc += d.death_rate_unchecked(m).ln() - d.birth_rate_unchecked(m).ln();
        weights.push(acc);
    }
    let below = log_sum_exp(&weights[..(j - s) as usize]);
    let all = log_sum_exp(&weights);
    Ok((below - all).exp().min(1.0))
}

/// Limit of `τ_[c_start n]([c_end n])`: `-log((β-2αc_end)/(β-2αc_start))/α`.
///
/// Both endpoints must lie strictly on the same side of `β/(2α)`, moving
/// towards it. Equal endpoints give zero.
pub fn fluid_time(c_start: f64, c_end: f64, d: &DerivedParams) -> Result<f64> {
    let eq = d.equilibrium_density();
    if !(c_start >= 0.0 && c_start.is_finite()) {
        return Err(domain("c_start", c_start, "[0, inf)"));
    }
    if !c_end.is_finite() {
        return Err(domain("c_end", c_end, "finite"));
    }
    let same_side_below = c_start < eq && c_end < eq;
    let same_side_above = c_start > eq && c_end > eq;
    if !(same_side_below || same_side_above) {
        return Err(Error::FluidSingular {
            start: c_start,
            end: c_end,
            equilibrium: eq,
        });
    }
    if (same_side_below && c_end < c_start) || (same_side_above && c_end > c_start) {
        return Err(Error::Ordering(format!(
            "fluid path from {c_start} to {c_end} moves away from the equilibrium {eq}"
        )));
    }
    let (a, b) = (d.alpha(), d.beta());
    Ok(-((b - 2.0 * a * c_end) / (b - 2.0 * a * c_start)).ln() / a)
}

/// Deterministic limit of `η(t)/n` started from density `c_start`.
pub fn fluid_trajectory(t: f64, c_start: f64, d: &DerivedParams) -> Result<f64> {
    check_time(t)?;
    let decay = (-d.alpha() * t).exp();
    Ok(d.equilibrium_density() * -(-d.alpha() * t).exp_m1() + c_start * decay)
}

/// Bernoulli relative entropy `D(a‖p)`.
pub fn relative_entropy(a: f64, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&a) && p > 0.0 && p < 1.0);
    let present = if a == 0.0 { 0.0 } else { a * (a / p).ln() };
    let absent = if a == 1.0 {
        0.0
    } else {
        (1.0 - a) * ((-a).ln_1p() - (-p).ln_1p())
    };
    present + absent
}

/// Per-vertex exponent `c log(2αc/β) - c + β/(2α)` of supercritical hitting times.
pub fn supercritical_exponent(c: f64, d: &DerivedParams) -> f64 {
    let eq = d.equilibrium_density();
    c * (c / eq).ln() - c + eq
}

/// `N·D(i/N ‖ p_n)` at `i = [cn]` next to its linear-in-`n` approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyExponent {
    pub count: u64,
    pub exact: f64,
    pub asymptotic: f64,
}

pub fn entropy_exponent(c: f64, d: &DerivedParams) -> Result<EntropyExponent> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain("c", c, "(0, inf)"));
    }
    let i = d.count_at_density(c);
    if i == 0 || i >= d.pairs() {
        return Err(Error::EdgeCount {
            count: i,
            max: d.pairs().saturating_sub(1),
        });
    }
    Ok(EntropyExponent {
        count: i,
        exact: count_entropy(i, d),
        asymptotic: d.n() as f64 * supercritical_exponent(c, d),
    })
}

/// `N·D(i/N ‖ p_n)` for an explicit count.
pub fn count_entropy(i: u64, d: &DerivedParams) -> f64 {
    let big_n = d.pairs() as f64;
    big_n * relative_entropy(i as f64 / big_n, d.edge_prob())
}

/// Upper tail `P(Bin(N, p_n) ≥ i)` with the two-sided exponential bounds
/// `(8i)^{-1/2} e^{-N·D} ≤ P ≤ e^{-N·D}`, which apply when `i/N > p_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTail {
    pub count: u64,
    pub tail: LogNonNegative,
    pub bounds: Option<(LogNonNegative, LogNonNegative)>,
}

impl BinomialTail {
    pub fn within_bounds(&self, rel_tol: f64) -> Option<bool> {
        let slack = rel_tol.ln_1p();
        self.bounds.map(|(lo, hi)| {
            self.tail.ln() >= lo.ln() - slack && self.tail.ln() <= hi.ln() + slack
        })
    }
}

/// Terms more than this many nats below the running maximum are dropped.
const TAIL_CUTOFF_NATS: f64 = 60.0;

pub fn binomial_tail(i: u64, d: &DerivedParams) -> Result<BinomialTail> {
    let big_n = d.pairs();
    if i > big_n {
        return Err(Error::EdgeCount {
            count: i,
            max: big_n,
        });
    }
    let p = d.edge_prob();
    let bounds = (i as f64 / big_n as f64 > p).then(|| {
        let ln_upper = -count_entropy(i, d);
        let ln_lower = ln_upper - 0.5 * (8.0 * i as f64).ln();
        (LogNonNegative::from_ln(ln_lower), LogNonNegative::from_ln(ln_upper))
    });
    if i == 0 {
        return Ok(BinomialTail {
            count: 0,
            tail: LogNonNegative::ONE,
            bounds,
        });
    }
    let (ln_p, ln_q) = (p.ln(), d.absent_prob().ln());
    let mode = ((big_n + 1) as f64 * p).floor() as u64;
    let mut logs = Vec::new();
    let mut max = f64::NEG_INFINITY;
    for k in i..=big_n {
        let l = ln_binomial(big_n, k) + k as f64 * ln_p + (big_n - k) as f64 * ln_q;
        max = max.max(l);
        logs.push(l);
        if k > mode && l < max - TAIL_CUTOFF_NATS {
            break;
        }
    }
    let ln_tail = log_sum_exp(&logs).min(0.0);
    Ok(BinomialTail {
        count: i,
        tail: LogNonNegative::from_ln(ln_tail),
        bounds,
    })
}

/// Renewal identity `E(C) = E(T_{≥i}) / P(η ≥ i)` for one regenerative cycle.
pub fn cycle_expectation(time_above: f64, tail: LogNonNegative) -> Result<LogNonNegative> {
    if !(time_above >= 0.0 && time_above.is_finite()) {
        return Err(domain("time_above", time_above, "[0, inf)"));
    }
    if tail.is_zero() || tail.ln() > 0.0 {
        return Err(domain("tail", tail.value(), "(0, 1]"));
    }
    Ok(LogNonNegative::from_value(time_above) / tail)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(domain("eps", eps, "(0, 1)"))
    }
}

/// Edge density `-log(1-ε)/(2ε)` at which the static giant component holds a
/// fraction `ε` of the vertices.
pub fn c_epsilon(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(-(-eps).ln_1p() / (2.0 * eps))
}

/// `2c_ε - 1`, computed without cancellation.
fn excess_density(eps: f64) -> f64 {
    // -log(1-ε) - ε = Σ_{k≥2} ε^k / k
    let tail = if eps < 0.1 {
        let mut term = eps;
        let mut s = 0.0;
        for k in 2..40 {
            term *= eps;
            s += term / k as f64;
        }
        s
    } else {
        -(-eps).ln_1p() - eps
    };
    tail / eps
}

/// Exponent `K(ε) = c_ε log(2c_ε) + 1/2 - c_ε` of the edge-count route.
pub fn edge_route_rate(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let u = excess_density(eps);
    let c = 0.5 * (1.0 + u);
    Ok(c * u.ln_1p() - 0.5 * u)
}

/// Large-deviation rate `I₁(x)` for the largest-component fraction of the
/// critical static graph.
pub fn component_rate(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain("x", x, "(0, 1)"));
    }
    Ok(-x * (-(-x).exp_m1()).ln() + x * x.ln() + (1.0 - x) * (-x).ln_1p() + x * (1.0 - x))
}

/// The `ε` at which `2c_ε - 1 = 1`; the small-`ε` expansion of `K` needs `ε` below it.
pub fn expansion_limit() -> f64 {
    // c_ε is increasing in ε; bisect c_ε = 1
    let (mut lo, mut hi) = (0.5f64, 0.99f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess_density(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Both component-emergence exponents at one `ε`, with their leading
/// small-`ε` terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunctions {
    pub eps: f64,
    pub c_eps: f64,
    pub edge_route: f64,
    pub component: f64,
    pub edge_route_leading: f64,
    pub component_leading: f64,
}

pub fn rate_functions(eps: f64) -> Result<RateFunctions> {
    check_eps(eps)?;
    let limit = expansion_limit();
    if eps >= limit {
        return Err(domain("eps", eps, format!("(0, {limit:.6}) where |2c_eps - 1| < 1")));
    }
    Ok(RateFunctions {
        eps,
        c_eps: c_epsilon(eps)?,
        edge_route: edge_route_rate(eps)?,
        component: component_rate(eps)?,
        edge_route_leading: eps * eps / 16.0,
        component_leading: eps * eps * eps / 8.0,
    })
}
