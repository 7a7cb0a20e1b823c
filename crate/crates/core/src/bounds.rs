//! Closed-form sampling-rate bounds for recovering every cluster of at least
//! a given size from uniformly sampled similarities, plus the random-graph
//! connectivity inequalities they rest on.
//!
//! Notation in doc comments: `N` items, minimum cluster size `n`, failure
//! probability `alpha`, oversampling factor `kappa`, cluster-size scaling
//! `n = delta * N^beta`, and `q = 1 - p`. Logarithms are natural.
//!
//! Terms shaped like `1 - x^(a/n)` are evaluated as `-expm1((a/n) ln x)`; the
//! naive form cancels catastrophically once `n` is large and the rate is small.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator in the union-bound constant `C = alpha n / (78 N)` used to
/// split the intra-cluster connectivity requirement into two closed-form terms.
pub const UNION_BOUND_DENOMINATOR: f64 = 78.0;

/// `2 * lambda` with `lambda = 10`: the factor by which
/// `(1 + q^((n-2)/2))^(n-1)` may exceed `(1 + q^(n/2))^(n-1)` for `n >= 4`.
pub const MIDDLE_TERM_FACTOR: f64 = 20.0;

/// Smallest oversampling factor the asymptotic rates are stated for.
pub const MIN_KAPPA: f64 = 3.0;

/// A bound on the sampling rate. `raw` is the formula value as computed; it
/// can exceed 1 for the asymptotic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub raw: f64,
}

impl Rate {
    pub fn new(raw: f64) -> Self {
        Rate { raw }
    }

    /// `raw` clamped into `[0, 1]`.
    pub fn probability(&self) -> f64 {
        self.raw.clamp(0.0, 1.0)
    }
}

/// Expected number of observed unordered pairs at rate `p`: `p N (N-1) / 2`.
pub fn expected_pairs(n_items: usize, p: f64) -> f64 {
    let n = n_items as f64;
    p * n * (n - 1.0) / 2.0
}

/// Expected number of observed entries of the full `N x N` matrix, `p N^2`.
/// This is the count under which `(2 kappa / delta) N ln N` is exact for the
/// linear-size regime.
pub fn expected_matrix_entries(n_items: usize, p: f64) -> f64 {
    let n = n_items as f64;
    p * n * n
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {v}")))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= MIN_KAPPA && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("kappa must be at least {MIN_KAPPA}, got {kappa}")))
    }
}

/// `1 - x^e` for `x` in `(0, 1]`.
fn one_minus_pow(x: f64, e: f64) -> f64 {
    -(e * x.ln()).exp_m1()
}

/// The two intra-cluster terms, for real-valued `n` so the asymptotic
/// cross-checks can plug in `delta N^beta` directly.
pub fn prop2_terms(n_items: f64, cluster_size: f64, alpha: f64) -> (f64, f64) {
    let n = cluster_size;
    let first = one_minus_pow(alpha * n / (UNION_BOUND_DENOMINATOR * n_items), 2.0 / n);
    // 2^(1/(n-1)) - 1 without cancellation.
    let spread = (std::f64::consts::LN_2 / (n - 1.0)).exp_m1();
    let second = one_minus_pow(spread, 2.0 / n);
    (first, second)
}

/// Rate that makes every cluster of at least `n` items induce a connected
/// sampling subgraph with probability `1 - alpha/2`:
/// `max{1 - (alpha n / 78N)^(2/n), 1 - (2^(1/(n-1)) - 1)^(2/n)}`.
pub fn prop2_rate(n_items: usize, cluster_size: usize, alpha: f64) -> Result<Rate> {
    check_alpha(alpha)?;
    if n_items < 4 || cluster_size < 4 || cluster_size > n_items {
        return Err(Error::InvalidParameter(format!(
            "need N >= 4 and 4 <= n <= N, got N = {n_items}, n = {cluster_size}"
        )));
    }
    let (a, b) = prop2_terms(n_items as f64, cluster_size as f64, alpha);
    Ok(Rate::new(a.max(b)))
}

pub fn prop3_term(n_items: f64, cluster_size: f64, alpha: f64) -> f64 {
    one_minus_pow(alpha / (2.0 * (n_items - cluster_size)), 1.0 / cluster_size)
}

/// Rate that gives every size-`n` cluster at least one observed similarity to
/// each of the at most `N - n` other clusters with probability `1 - alpha/2`:
/// `1 - (alpha / 2(N - n))^(1/n)`.
///
/// The exponent is `1/n`, as in the union-bound derivation and the combined
/// rate. `N == n` leaves nothing to link and yields 0.
pub fn prop3_rate(n_items: usize, cluster_size: usize, alpha: f64) -> Result<Rate> {
    check_alpha(alpha)?;
    if cluster_size == 0 || cluster_size > n_items {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= n <= N, got N = {n_items}, n = {cluster_size}"
        )));
    }
    if cluster_size == n_items {
        return Ok(Rate::new(0.0));
    }
    Ok(Rate::new(prop3_term(n_items as f64, cluster_size as f64, alpha)))
}

/// Combined rate: the larger of [`prop2_rate`] and [`prop3_rate`].
pub fn theorem1_rate(n_items: usize, cluster_size: usize, alpha: f64) -> Result<Rate> {
    if cluster_size >= n_items {
        return Err(Error::InvalidParameter(format!(
            "need n < N, got N = {n_items}, n = {cluster_size}"
        )));
    }
    let intra = prop2_rate(n_items, cluster_size, alpha)?;
    let inter = prop3_rate(n_items, cluster_size, alpha)?;
    Ok(Rate::new(intra.raw.max(inter.raw)))
}

/// `2 kappa ln(N) / n`: the asymptotic rate written in terms of the cluster
/// size directly.
pub fn asymptotic_rate_for_cluster_size(n_items: usize, cluster_size: f64, kappa: f64) -> Result<Rate> {
    check_kappa(kappa)?;
    if n_items < 2 || !(cluster_size > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N >= 2 and n > 0, got N = {n_items}, n = {cluster_size}"
        )));
    }
    Ok(Rate::new(2.0 * kappa * (n_items as f64).ln() / cluster_size))
}

/// `(2 kappa / delta) N^(-beta) ln N` for clusters of size `delta N^beta`.
pub fn theorem2_rate(n_items: usize, delta: f64, beta: f64, kappa: f64) -> Result<Rate> {
    check_unit_interval("delta", delta)?;
    check_unit_interval("beta", beta)?;
    check_kappa(kappa)?;
    if n_items < 2 {
        return Err(Error::InvalidParameter(format!("need N >= 2, got {n_items}")));
    }
    let n = n_items as f64;
    Ok(Rate::new(2.0 * kappa / delta * n.powf(-beta) * n.ln()))
}

/// Smallest `N` for which the asymptotic rate is guaranteed:
/// `ceil(max{4, (alpha/2)^(1/(1-2kappa)), (alpha delta/78)^(1/(1-beta-kappa))})`.
pub fn theorem2_min_n(alpha: f64, delta: f64, beta: f64, kappa: f64) -> Result<u64> {
    check_alpha(alpha)?;
    check_unit_interval("delta", delta)?;
    check_unit_interval("beta", beta)?;
    check_kappa(kappa)?;
    let (a, b, c) = theorem2_min_n_terms(alpha, delta, beta, kappa);
    Ok(a.max(b).max(c).ceil() as u64)
}

/// The three raw terms of [`theorem2_min_n`] before the ceiling.
pub fn theorem2_min_n_terms(alpha: f64, delta: f64, beta: f64, kappa: f64) -> (f64, f64, f64) {
    (
        4.0,
        (alpha / 2.0).powf(1.0 / (1.0 - 2.0 * kappa)),
        (alpha * delta / UNION_BOUND_DENOMINATOR).powf(1.0 / (1.0 - beta - kappa)),
    )
}

/// Linear-size clusters (`beta = 1`): `(2 kappa / delta) ln(N) / N`.
pub fn theorem3_rate(n_items: usize, delta: f64, kappa: f64) -> Result<Rate> {
    theorem2_rate(n_items, delta, 1.0, kappa)
}

pub fn theorem3_min_n(alpha: f64, delta: f64, kappa: f64) -> Result<u64> {
    theorem2_min_n(alpha, delta, 1.0, kappa)
}

/// Everything reported alongside an asymptotic rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticSummary {
    pub rate: f64,
    pub raw_rate: f64,
    pub cluster_size: f64,
    pub expected_samples: f64,
    pub expected_matrix_entries: f64,
    pub min_n: u64,
    pub min_n_ok: bool,
}

pub fn theorem2_summary(n_items: usize, alpha: f64, delta: f64, beta: f64, kappa: f64) -> Result<AsymptoticSummary> {
    let rate = theorem2_rate(n_items, delta, beta, kappa)?;
    let min_n = theorem2_min_n(alpha, delta, beta, kappa)?;
    let p = rate.probability();
    Ok(AsymptoticSummary {
        rate: p,
        raw_rate: rate.raw,
        cluster_size: delta * (n_items as f64).powf(beta),
        expected_samples: expected_pairs(n_items, p),
        expected_matrix_entries: expected_matrix_entries(n_items, p),
        min_n,
        min_n_ok: n_items as u64 >= min_n,
    })
}

/// Lower bound on `P(G(n, p) is connected)`:
///
/// `1 - q^(n-1) ((1 + q^((n-2)/2))^(n-1) - q^((n-1)(n-2)/2))
///    - q^(n/2) ((1 + q^((n-2)/2))^(n-1) - 1)`.
///
/// Returned unclamped; it goes negative for small `p`.
pub fn gilbert_lower_bound(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    let q = 1.0 - p;
    let nf = n as f64;
    let inner = (1.0 + q.powf((nf - 2.0) / 2.0)).powf(nf - 1.0);
    let tail = q.powf((nf - 1.0) * (nf - 2.0) / 2.0);
    Ok(1.0 - q.powf(nf - 1.0) * (inner - tail) - q.powf(nf / 2.0) * (inner - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1 {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `2 q^(n/2) (1 + q^((n-2)/2))^(n-1) <= 20 q^(n/2) (1 + q^(n/2))^(n-1)`.
pub fn lemma1_check(n: usize, q: f64) -> Result<Lemma1> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need n >= 4, got {n}")));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q must lie in [0, 1], got {q}")));
    }
    let nf = n as f64;
    let half = q.powf(nf / 2.0);
    let lhs = 2.0 * half * (1.0 + q.powf((nf - 2.0) / 2.0)).powf(nf - 1.0);
    let rhs = MIDDLE_TERM_FACTOR * half * (1.0 + half).powf(nf - 1.0);
    Ok(Lemma1 {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Parameter bundle for the CLI and experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n_items: usize,
    pub cluster_size: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub delta: f64,
    pub beta: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_items < 4 || self.cluster_size < 4 || self.cluster_size > self.n_items {
            return Err(Error::InvalidParameter(format!(
                "need N >= 4 and 4 <= n <= N, got N = {}, n = {}",
                self.n_items, self.cluster_size
            )));
        }
        check_alpha(self.alpha)?;
        check_kappa(self.kappa)?;
        check_unit_interval("delta", self.delta)?;
        check_unit_interval("beta", self.beta)
    }
}
