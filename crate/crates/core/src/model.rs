//! Model parameters and the rates derived from them.
//!
//! Every other module obtains rates through [`derive`]; nothing recomputes
//! the defining formulas locally.

use crate::error::{Error, Result};

/// Vertex count and the two per-pair rates of the on-off edge process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: u64,
    alpha: f64,
    beta: f64,
}

impl ModelParams {
    /// `alpha` is the per-edge death rate, `beta / (n - 1)` the per-pair birth rate.
    pub fn new(n: u64, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModel(format!("n = {n} must be at least 2")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidModel(format!("alpha = {alpha} must be positive")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidModel(format!("beta = {beta} must be positive")));
        }
        if n.checked_mul(n - 1).is_none_or(|x| x / 2 > i64::MAX as u64) {
            return Err(Error::InvalidModel(format!("n = {n} overflows the pair count")));
        }
        Ok(Self { n, alpha, beta })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Quantities derived once from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    params: ModelParams,
    pairs: u64,
    edge_prob: f64,
    absent_prob: f64,
    update_rate: f64,
}

/// Validate `(n, alpha, beta)` and compute the derived rates.
pub fn derive(n: u64, alpha: f64, beta: f64) -> Result<DerivedParams> {
    ModelParams::new(n, alpha, beta).map(DerivedParams::from)
}

impl From<ModelParams> for DerivedParams {
    fn from(params: ModelParams) -> Self {
        let n = params.n;
        let m = (n - 1) as f64;
        let pairs = n * (n - 1) / 2;
        let denom = params.beta + m * params.alpha;
        let edge_prob = params.beta / denom;
        let absent_prob = m * params.alpha / denom;
        Self {
            params,
            pairs,
            edge_prob,
            absent_prob,
            update_rate: params.alpha + params.beta / m,
        }
    }
}

impl DerivedParams {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> u64 {
        self.params.n
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    /// Number of vertex pairs, `n(n-1)/2`.
    pub fn pairs(&self) -> u64 {
        self.pairs
    }

    /// Stationary probability that a given pair carries an edge.
    pub fn edge_prob(&self) -> f64 {
        self.edge_prob
    }

    pub fn absent_prob(&self) -> f64 {
        self.absent_prob
    }

    /// Rate of the per-pair Poisson update clock.
    pub fn update_rate(&self) -> f64 {
        self.update_rate
    }

    /// Per-pair birth rate `beta / (n - 1)`.
    pub fn pair_birth_rate(&self) -> f64 {
        self.params.beta / (self.params.n - 1) as f64
    }

    /// Equilibrium edge density `beta / (2 alpha)` on the `edges / n` scale.
    pub fn equilibrium_density(&self) -> f64 {
        self.params.beta / (2.0 * self.params.alpha)
    }

    fn check_count(&self, k: u64) -> Result<()> {
        if k > self.pairs {
            Err(Error::EdgeCount {
                count: k,
                max: self.pairs,
            })
        } else {
            Ok(())
        }
    }

    /// Birth rate of the edge-count chain in state `k`.
    pub fn birth_rate(&self, k: u64) -> Result<f64> {
        self.check_count(k)?;
        Ok(self.birth_rate_unchecked(k))
    }

    /// Death rate of the edge-count chain in state `k`.
    pub fn death_rate(&self, k: u64) -> Result<f64> {
        self.check_count(k)?;
        Ok(self.death_rate_unchecked(k))
    }

    #[inline]
    pub(crate) fn birth_rate_unchecked(&self, k: u64) -> f64 {
        (self.pairs - k) as f64 * self.params.beta / (self.params.n - 1) as f64
    }

    #[inline]
    pub(crate) fn death_rate_unchecked(&self, k: u64) -> f64 {
        k as f64 * self.params.alpha
    }

    /// `[x * n]` rounded half-to-even, the edge count matching density `x`.
    pub fn count_at_density(&self, x: f64) -> u64 {
        round_half_even(x * self.params.n as f64)
    }
}

/// Closest integer to a nonnegative `x`, ties to even.
pub fn round_half_even(x: f64) -> u64 {
    debug_assert!(x >= 0.0);
    let r = x.round_ties_even();
    if r <= 0.0 {
        0
    } else {
        r as u64
    }
}
