//! The auxiliary random walk with symmetric discrete-Laplace increments.
//!
//! For `β > 0` the increments have law `P_β(k) = e^{-(β/2)|k|} / c_β`. A
//! configuration with extension `N` corresponds to a walk with `N + 1`
//! increments pinned to 0 at both ends.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `β` together with the scalars derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    /// `c_β = Σ_k e^{-(β/2)|k|} = (1 + q) / (1 - q)`.
    pub c_beta: f64,
    /// `Γ_β = c_β e^{-β}`.
    pub gamma_beta: f64,
    /// `σ_β² = E_β[V_1²] = 2q / (1 - q)²`.
    pub sigma2_beta: f64,
    /// `q = e^{-β/2}`, the geometric ratio of the increment law.
    pub q: f64,
}

impl ModelParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::NonPositiveBeta(beta));
        }
        let q = (-beta / 2.0).exp();
        let one_minus_q = -(-beta / 2.0).exp_m1();
        let c_beta = (1.0 + q) / one_minus_q;
        Ok(Self {
            beta,
            c_beta,
            gamma_beta: c_beta * (-beta).exp(),
            sigma2_beta: 2.0 * q / (one_minus_q * one_minus_q),
            q,
        })
    }

    pub fn log_gamma(&self) -> f64 {
        self.c_beta.ln() - self.beta
    }

    /// `P_β(V_1 - V_0 = k)`.
    pub fn increment_pmf(&self, k: i64) -> f64 {
        self.q.powi(k.unsigned_abs().min(i32::MAX as u64) as i32) / self.c_beta
    }

    /// Largest `|k|` whose weight `e^{-(β/2)|k|}` is still at least `1e-16`.
    pub fn tail_cutoff(&self) -> u64 {
        (16.0 * std::f64::consts::LN_10 / (self.beta / 2.0)).ceil() as u64
    }

    fn check_tilt(&self, h: f64) -> Result<()> {
        if !(h.abs() < self.beta / 2.0) {
            return Err(Error::OutsideDomain {
                h0: h,
                h1: 0.0,
                half_beta: self.beta / 2.0,
            });
        }
        Ok(())
    }

    /// `(q e^{h}, q e^{-h}, 1 - q e^{h}, 1 - q e^{-h})`; the complements keep
    /// full precision near the edge `|h| = β/2`. The generating function is
    /// `E_β[e^{h V_1}] = (1 + a/(1-a) + b/(1-b)) / c_β`.
    fn mgf_parts(&self, h: f64) -> (f64, f64, f64, f64) {
        let half = self.beta / 2.0;
        let up = self.q * h.exp();
        let down = self.q * (-h).exp();
        (up, down, -(h - half).exp_m1(), -(-h - half).exp_m1())
    }

    /// Cumulant generating function `L(h) = log E_β[e^{h V_1}]`.
    pub fn cumulant(&self, h: f64) -> Result<f64> {
        self.check_tilt(h)?;
        Ok(self.cumulant_unchecked(h))
    }

    pub(crate) fn cumulant_unchecked(&self, h: f64) -> f64 {
        let (a, b, ca, cb) = self.mgf_parts(h);
        let m = 1.0 + a / ca + b / cb;
        (m / self.c_beta).ln()
    }

    /// `L'(h)`.
    pub fn cumulant_d1(&self, h: f64) -> Result<f64> {
        self.check_tilt(h)?;
        Ok(self.cumulant_d1_unchecked(h))
    }

    pub(crate) fn cumulant_d1_unchecked(&self, h: f64) -> f64 {
        let (a, b, ca, cb) = self.mgf_parts(h);
        let m = 1.0 + a / ca + b / cb;
        let dm = a / (ca * ca) - b / (cb * cb);
        dm / m
    }

    /// `L''(h)`.
    pub fn cumulant_d2(&self, h: f64) -> Result<f64> {
        self.check_tilt(h)?;
        Ok(self.cumulant_d2_unchecked(h))
    }

    pub(crate) fn cumulant_d2_unchecked(&self, h: f64) -> f64 {
        let (a, b, ca, cb) = self.mgf_parts(h);
        let m = 1.0 + a / ca + b / cb;
        let dm = a / (ca * ca) - b / (cb * cb);
        let ddm = a * (1.0 + a) / ca.powi(3) + b * (1.0 + b) / cb.powi(3);
        ddm / m - (dm / m) * (dm / m)
    }

    /// Exact draw from the increment law as the difference of two
    /// independent geometric variables on `{0, 1, ...}` with ratio `q`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        geometric(self.q, rng) - geometric(self.q, rng)
    }
}

/// `P(X = k) = (1 - q) q^k` by inversion.
fn geometric<R: Rng + ?Sized>(q: f64, rng: &mut R) -> i64 {
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let u: f64 = 1.0 - rng.gen::<f64>();
    (u.ln() / q.ln()).floor() as i64
}

/// A walk trajectory `V_0, ..., V_M` started at `V_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPath {
    values: Vec<i64>,
}

impl WalkPath {
    pub fn new(values: Vec<i64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `G_N(V) = Σ_{i=1..N} |V_i|`.
    pub fn geometric_area(&self, n: usize) -> u64 {
        self.values.iter().skip(1).take(n).map(|v| v.unsigned_abs()).sum()
    }

    /// Whether `V` lies in `𝒱_{N, L-N}`: pinned at `0` and `N + 1` with
    /// `G_N = L - N`.
    pub fn is_pinned_with_area(&self, n: usize, area: u64) -> bool {
        self.values.len() == n + 2
            && self.values[0] == 0
            && self.values[n + 1] == 0
            && self.geometric_area(n) == area
    }
}

/// One excursion of a walk away from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excursion {
    /// `τ_{r-1}`.
    pub start: usize,
    /// `τ_r`.
    pub end: usize,
    /// `X_r = τ_r - τ_{r-1} + Σ_{i=τ_{r-1}}^{τ_r - 1} |V_i|`.
    pub area: u64,
}

/// Splits a walk at `τ_{r+1} = inf{i > τ_r : V_{i-1} ≠ 0, V_{i-1} V_i ≤ 0}`.
pub fn excursions(walk: &WalkPath) -> Vec<Excursion> {
    let v = walk.values();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..v.len() {
        if v[i - 1] != 0 && v[i - 1].signum() * v[i].signum() <= 0 {
            let area = (i - start) as u64 + v[start..i].iter().map(|x| x.unsigned_abs()).sum::<u64>();
            out.push(Excursion { start, end: i, area });
            start = i;
        }
    }
    out
}

/// `y_j = Σ_i q^{|j - i|} x_i` over the same index window, in `O(n)`.
///
/// Entries of `x` outside the window are treated as zero. Both passes only
/// add nonnegative multiples when `x ≥ 0`, so no cancellation occurs.
pub(crate) fn laplace_convolve(q: f64, x: &[f64], y: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(y.len(), n);
    if n == 0 {
        return;
    }
    let mut acc = 0.0;
    for j in 0..n {
        acc = acc * q + x[j];
        y[j] = acc;
    }
    let mut acc = 0.0;
    for j in (0..n).rev() {
        // acc holds Σ_{i>j} q^{i-j} x_i
        y[j] += acc;
        acc = (acc + x[j]) * q;
    }
}
