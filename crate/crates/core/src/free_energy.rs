//! Critical point, the δ-tilted transfer operator, the excess free energy
//! and the constants governing the transition near `β_c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::{laplace_convolve, ModelParams};

/// Solver tolerance on `|Γ_β - 1|` at the critical point.
pub const CRITICAL_RESIDUAL: f64 = 1e-12;
/// Absolute tolerance of the δ root solver.
pub const DELTA_TOLERANCE: f64 = 1e-10;
/// Stop doubling the transfer truncation once the eigenvalue moves less.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;
/// Successive Rayleigh quotients closer than this end the power iteration.
pub const RAYLEIGH_TOLERANCE: f64 = 1e-12;

const MAX_HALF_WIDTH: usize = 1 << 21;

/// `β_c`, the unique root of `Γ_β = 1`, by bisection on `log Γ_β`.
pub fn critical_beta() -> f64 {
    let log_gamma = |b: f64| ModelParams::new(b).expect("positive beta").log_gamma();
    let (mut lo, mut hi) = (0.5, 2.0);
    debug_assert!(log_gamma(lo) > 0.0 && log_gamma(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_gamma(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let b = 0.5 * (lo + hi);
    // One Newton polish; d/dβ log Γ_β = -(1 + q/(1 - q²)).
    let p = ModelParams::new(b).expect("positive beta");
    let slope = -(1.0 + p.q / (1.0 - p.q * p.q));
    b - p.log_gamma() / slope
}

/// The symmetrized transfer operator `D^{1/2} P D^{1/2}` with
/// `P(u, v) = P_β(v - u)` and `D = diag(e^{-δ|v|})`, truncated to
/// `|v| ≤ half_width`.
struct TransferOperator {
    q: f64,
    inv_c: f64,
    sqrt_weight: Vec<f64>,
    half_width: usize,
}

impl TransferOperator {
    fn new(params: &ModelParams, delta: f64, half_width: usize) -> Self {
        let sqrt_weight = (0..=2 * half_width)
            .map(|i| (-0.5 * delta * (i as f64 - half_width as f64).abs()).exp())
            .collect();
        Self {
            q: params.q,
            inv_c: 1.0 / params.c_beta,
            sqrt_weight,
            half_width,
        }
    }

    fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    fn apply(&self, x: &[f64], scratch: &mut [f64], y: &mut [f64]) {
        for ((s, &xi), &w) in scratch.iter_mut().zip(x).zip(&self.sqrt_weight) {
            *s = xi * w;
        }
        laplace_convolve(self.q, scratch, y);
        for (yi, &w) in y.iter_mut().zip(&self.sqrt_weight) {
            *yi *= w * self.inv_c;
        }
    }

    /// Top eigenvalue by power iteration, optionally warm-started from a
    /// vector on a (possibly smaller) centered window.
    fn top_eigenvalue(&self, warm: Option<&[f64]>, delta: f64) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        let mut x: Vec<f64> = match warm {
            Some(w) if w.len() <= n => {
                let off = (n - w.len()) / 2;
                let mut v = vec![0.0; n];
                v[off..off + w.len()].copy_from_slice(w);
                // Fill the new margins with a decaying tail.
                let decay = (-delta.cbrt()).exp();
                for i in (0..off).rev() {
                    v[i] = v[i + 1] * decay;
                    v[n - 1 - i] = v[i];
                }
                v
            }
            _ => {
                let scale = delta.cbrt().max(1.0 / self.half_width as f64);
                (0..n)
                    .map(|i| (-scale * (i as f64 - self.half_width as f64).abs()).exp())
                    .collect()
            }
        };
        normalize(&mut x);
        let mut y = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let mut rq_prev = f64::NAN;
        let max_iter = 2_000_000usize.max(50 * n);
        for _ in 0..max_iter {
            self.apply(&x, &mut scratch, &mut y);
            let rq = dot(&x, &y);
            std::mem::swap(&mut x, &mut y);
            normalize(&mut x);
            if (rq - rq_prev).abs() < RAYLEIGH_TOLERANCE * rq.abs().max(1e-300) {
                return Ok((rq, x));
            }
            rq_prev = rq;
        }
        Err(Error::NoConvergence {
            what: "power iteration",
            last: rq_prev,
            previous: f64::NAN,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

/// Result of a transfer-operator evaluation with its truncation history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedRate {
    /// `h_β(δ)` at the final truncation.
    pub value: f64,
    /// Change from the previous truncation doubling.
    pub error_band: f64,
    pub half_width: usize,
}

/// `h_β(δ) = lim (1/N) log E_β[e^{-δ G_N}]` as the log of the top eigenvalue
/// of the tilted kernel, doubling the value window until stable.
pub fn h_beta(params: &ModelParams, delta: f64) -> Result<f64> {
    h_beta_detailed(params, delta).map(|r| r.value)
}

pub fn h_beta_detailed(params: &ModelParams, delta: f64) -> Result<TiltedRate> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be finite and nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(TiltedRate {
            value: 0.0,
            error_band: 0.0,
            half_width: 0,
        });
    }
    let mut half_width = 8 * delta.powf(-2.0 / 3.0).ceil() as usize;
    let mut previous: Option<f64> = None;
    let mut warm: Option<Vec<f64>> = None;
    loop {
        let op = TransferOperator::new(params, delta, half_width);
        let (lambda, vec) = op.top_eigenvalue(warm.as_deref(), delta)?;
        let value = lambda.ln();
        if let Some(prev) = previous {
            if (value - prev).abs() < TRUNCATION_TOLERANCE {
                return Ok(TiltedRate {
                    value,
                    error_band: (value - prev).abs(),
                    half_width,
                });
            }
        }
        if half_width >= MAX_HALF_WIDTH {
            return Err(Error::NoConvergence {
                what: "transfer operator truncation",
                last: value,
                previous: previous.unwrap_or(f64::NAN),
            });
        }
        previous = Some(value);
        warm = Some(vec);
        half_width *= 2;
    }
}

/// Direct finite-`N` estimate `(1/N) log E_β[e^{-δ G_N}]`, iterating the
/// tilted kernel from `V_0 = 0`. The value window is cut where the
/// increment tails fall below double precision.
pub fn h_beta_finite(params: &ModelParams, delta: f64, steps: usize) -> f64 {
    let half_width = steps.min(4 * params.tail_cutoff() as usize * (steps as f64).sqrt() as usize + 64);
    let n = 2 * half_width + 1;
    let weight: Vec<f64> = (0..n)
        .map(|i| (-delta * (i as f64 - half_width as f64).abs()).exp() / params.c_beta)
        .collect();
    let mut x = vec![0.0; n];
    x[half_width] = 1.0;
    let mut y = vec![0.0; n];
    let mut log_scale = 0.0;
    for _ in 0..steps {
        laplace_convolve(params.q, &x, &mut y);
        let mut total = 0.0;
        for (yi, &w) in y.iter_mut().zip(&weight) {
            *yi *= w;
            total += *yi;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / total;
        }
        log_scale += total.ln();
    }
    log_scale / steps as f64
}

/// `g(δ) = log Γ_β - δ + h_β(δ)`, the function whose root is `f̃(β)`.
pub fn root_function(params: &ModelParams, delta: f64) -> Result<f64> {
    Ok(params.log_gamma() - delta + h_beta(params, delta)?)
}

/// Excess free energy `f̃(β)`: zero on the collapsed side, otherwise the
/// unique root of [`root_function`] found by bisection on `[0, log Γ_β]`.
pub fn excess_free_energy(params: &ModelParams) -> Result<f64> {
    excess_free_energy_with_tolerance(params, DELTA_TOLERANCE)
}

pub fn excess_free_energy_with_tolerance(params: &ModelParams, tolerance: f64) -> Result<f64> {
    let log_gamma = params.log_gamma();
    if log_gamma <= 0.0 || params.beta >= critical_beta() {
        return Ok(0.0);
    }
    // g(0) = log Γ > 0 and g(log Γ) = h(log Γ) < 0.
    let (mut lo, mut hi) = (0.0, log_gamma);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if root_function(params, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `f(β) = β + f̃(β)`.
pub fn free_energy(params: &ModelParams) -> Result<f64> {
    Ok(params.beta + excess_free_energy(params)?)
}

/// A per-monomer exponential tilt that keeps the walk-side dynamic
/// programs inside double-precision range: close to `f̃(β)`.
///
/// Any value gives exact results; only the conditioning changes.
pub fn conditioning_tilt(params: &ModelParams) -> f64 {
    let log_gamma = params.log_gamma();
    if log_gamma <= 0.05 {
        0.0
    } else {
        excess_free_energy_with_tolerance(params, 1e-4).unwrap_or(0.0)
    }
}

/// Airy function derivative `Ai'(x)` from its Maclaurin series.
///
/// Coefficients follow `a_{n+3} = a_n / ((n+2)(n+3))` from `y'' = x y`.
/// A fixed 150 terms puts the truncation error far below `1e-16` for
/// `|x| ≤ 4`; outside that range the series loses accuracy to cancellation.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_series(x).1
}

/// `Ai(x)` from the same series.
pub fn airy_ai(x: f64) -> f64 {
    airy_series(x).0
}

/// `Ai(0) = 1 / (3^{2/3} Γ(2/3))`.
pub const AIRY_AI_ZERO: f64 = 0.355_028_053_887_817_239_26;
/// `-Ai'(0) = 1 / (3^{1/3} Γ(1/3))`.
pub const AIRY_AIPRIME_ZERO_NEG: f64 = 0.258_819_403_792_806_798_41;

const AIRY_TERMS: usize = 150;

fn airy_series(x: f64) -> (f64, f64) {
    let mut coef = vec![0.0; AIRY_TERMS + 3];
    coef[0] = AIRY_AI_ZERO;
    coef[1] = -AIRY_AIPRIME_ZERO_NEG;
    for n in 0..AIRY_TERMS {
        coef[n + 3] = coef[n] / ((n + 2) as f64 * (n + 3) as f64);
    }
    // Horner for both the series and its derivative.
    let mut value = 0.0;
    let mut deriv = 0.0;
    for n in (0..AIRY_TERMS).rev() {
        value = value * x + coef[n];
        if n > 0 {
            deriv = deriv * x + n as f64 * coef[n];
        }
    }
    (value, deriv)
}

/// `|a'_1|`, the smallest zero of `Ai'` in absolute value, by bisection on
/// the bracket `[-1.1, -0.9]`.
pub fn airy_prime_first_zero() -> f64 {
    let (mut lo, mut hi) = (-1.1, -0.9);
    let f_lo = airy_ai_prime(lo);
    debug_assert!(f_lo * airy_ai_prime(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = airy_ai_prime(mid);
        if f_mid == 0.0 {
            return -mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    -0.5 * (lo + hi)
}

/// Constants of the transition at `β_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    pub beta_c: f64,
    /// `c = 1 + e^{-β_c/2} / (1 - e^{-β_c})`, equal to `-∂_β log Γ_β` at `β_c`.
    pub slope_c: f64,
    /// `d = 2^{-1/3} |a'_1| σ_{β_c}^{2/3}`.
    pub area_d: f64,
    pub airy_prime_zero: f64,
    /// `(c / d)^{3/2}`.
    pub amplitude: f64,
    pub sigma2: f64,
    /// `|Γ_{β_c} - 1|`.
    pub gamma_residual: f64,
    /// `|Ai'(-|a'_1|)|`.
    pub airy_residual: f64,
    /// `|c + ∂_β log Γ_β|` with the derivative by central differences.
    pub slope_check: f64,
}

pub fn critical_amplitude() -> CriticalConstants {
    let beta_c = critical_beta();
    let p = ModelParams::new(beta_c).expect("positive beta");
    let e_half = (-beta_c / 2.0).exp();
    let slope_c = 1.0 + e_half / (1.0 - (-beta_c).exp());
    let airy_prime_zero = airy_prime_first_zero();
    let area_d = 2f64.powf(-1.0 / 3.0) * airy_prime_zero * p.sigma2_beta.powf(1.0 / 3.0);
    let h = 1e-5;
    let lg = |b: f64| ModelParams::new(b).expect("positive beta").log_gamma();
    let derivative = (lg(beta_c + h) - lg(beta_c - h)) / (2.0 * h);
    CriticalConstants {
        beta_c,
        slope_c,
        area_d,
        airy_prime_zero,
        amplitude: (slope_c / area_d).powf(1.5),
        sigma2: p.sigma2_beta,
        gamma_residual: (p.gamma_beta - 1.0).abs(),
        airy_residual: airy_ai_prime(-airy_prime_zero).abs(),
        slope_check: (slope_c + derivative).abs(),
    }
}
