//! The collapsed-phase limit shape.
//!
//! For a tilt `H = (h_0, h_1)` put
//! `L_Λ(H) = ∫_0^1 L(x h_0 + h_1) dx` with `L` the increment cumulant. The
//! rate of `{G_N = uN², V_N = 0}` is `g(u) = -u h̃_0 + L_Λ(H̃)` where
//! `H̃ = (∇L_Λ)^{-1}(u, 0)`; maximizing `a log Γ_β + a g(1/a²)` gives the
//! rescaled extension `a_β`, and the profile converges to
//! `γ_β(s) = a_β γ*(s / a_β)` with `γ*(s) = ∫_0^s L'((1/2 - x) h̃_0) dx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::critical_beta;
use crate::quad::integrate;
use crate::walk::{laplace_convolve, ModelParams};

const QUAD_TOL: f64 = 1e-12;
/// The Hessian only steers Newton, so it is integrated more loosely.
const HESSIAN_RELATIVE_TOL: f64 = 1e-9;
/// Newton stops once `‖∇L_Λ(H) - target‖` is this small.
pub const NEWTON_RESIDUAL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 200;
const BACKTRACK_HALVINGS: u32 = 40;
/// Distance kept from the boundary of the tilt domain.
const DOMAIN_MARGIN: f64 = 1e-9;
/// Tolerance of the golden-section search for `a_β`.
pub const A_BETA_TOLERANCE: f64 = 1e-8;

fn inside(params: &ModelParams, h0: f64, h1: f64, margin: f64) -> bool {
    let half = params.beta / 2.0 - margin;
    h1.abs() < half && (h0 + h1).abs() < half
}

fn check_domain(params: &ModelParams, h0: f64, h1: f64) -> Result<()> {
    if inside(params, h0, h1, 0.0) && h0.is_finite() && h1.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            h0,
            h1,
            half_beta: params.beta / 2.0,
        })
    }
}

/// `L_Λ(h_0, h_1)`; the tilt `x h_0 + h_1` must stay in `(-β/2, β/2)` on
/// `[0, 1]`, i.e. at both endpoints.
pub fn l_lambda(params: &ModelParams, h0: f64, h1: f64) -> Result<f64> {
    check_domain(params, h0, h1)?;
    integrate(|x| params.cumulant_unchecked(x * h0 + h1), 0.0, 1.0, QUAD_TOL)
}

/// `∇L_Λ = (∫ x L'(x h_0 + h_1) dx, ∫ L'(x h_0 + h_1) dx)`.
pub fn grad_l_lambda(params: &ModelParams, h0: f64, h1: f64) -> Result<(f64, f64)> {
    check_domain(params, h0, h1)?;
    let d0 = integrate(|x| x * params.cumulant_d1_unchecked(x * h0 + h1), 0.0, 1.0, QUAD_TOL)?;
    let d1 = integrate(|x| params.cumulant_d1_unchecked(x * h0 + h1), 0.0, 1.0, QUAD_TOL)?;
    Ok((d0, d1))
}

/// Hessian of `L_Λ` as `(∂00, ∂01, ∂11)`.
pub fn hessian_l_lambda(params: &ModelParams, h0: f64, h1: f64) -> Result<(f64, f64, f64)> {
    check_domain(params, h0, h1)?;
    let f = |k: i32, tol: f64| integrate(|x| x.powi(k) * params.cumulant_d2_unchecked(x * h0 + h1), 0.0, 1.0, tol);
    // The unweighted integral bounds the other two and sets the scale.
    let d11 = f(0, 1e-6)?;
    let tol = HESSIAN_RELATIVE_TOL * d11.max(1.0);
    Ok((f(2, tol)?, f(1, tol)?, f(0, tol)?))
}

/// `H̃ = (∇L_Λ)^{-1}(target)` by damped Newton from the origin, halving
/// steps that leave the domain or fail to reduce the residual.
pub fn invert_grad(params: &ModelParams, target: (f64, f64)) -> Result<(f64, f64)> {
    let residual = |h: (f64, f64)| -> Result<(f64, f64, f64)> {
        let g = grad_l_lambda(params, h.0, h.1)?;
        let r = (g.0 - target.0, g.1 - target.1);
        Ok((r.0, r.1, r.0.hypot(r.1)))
    };
    let mut h = (0.0, 0.0);
    let (mut r0, mut r1, mut norm) = residual(h)?;
    let mut previous = f64::NAN;
    for _ in 0..NEWTON_MAX_ITER {
        if norm <= NEWTON_RESIDUAL {
            return Ok(h);
        }
        let (a, b, d) = hessian_l_lambda(params, h.0, h.1)?;
        let det = a * d - b * b;
        let step = (-(d * r0 - b * r1) / det, -(a * r1 - b * r0) / det);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=BACKTRACK_HALVINGS {
            let cand = (h.0 + t * step.0, h.1 + t * step.1);
            if inside(params, cand.0, cand.1, DOMAIN_MARGIN) {
                // A trial point where the quadrature fails counts as rejected.
                let Ok((c0, c1, cn)) = residual(cand) else {
                    t *= 0.5;
                    continue;
                };
                if cn < norm {
                    h = cand;
                    r0 = c0;
                    r1 = c1;
                    previous = norm;
                    norm = cn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= NEWTON_RESIDUAL {
        return Ok(h);
    }
    Err(Error::NoConvergence {
        what: "gradient inversion",
        last: norm,
        previous,
    })
}

/// `h̃_0(u, 0)`.
pub fn htilde0(params: &ModelParams, u: f64) -> Result<f64> {
    invert_grad(params, (u, 0.0)).map(|h| h.0)
}

/// `g_β(u) = -u h̃_0(u, 0) + L_Λ(H̃(u, 0))`.
pub fn g_rate(params: &ModelParams, u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    let (h0, h1) = invert_grad(params, (u, 0.0))?;
    Ok(-u * h0 + l_lambda(params, h0, h1)?)
}

/// `a log Γ_β + a g_β(1/a²)`.
pub fn extension_objective(params: &ModelParams, a: f64) -> Result<f64> {
    Ok(a * params.log_gamma() + a * g_rate(params, 1.0 / (a * a))?)
}

/// The same objective written as `a log Γ_β - h̃_0/a + a L_Λ(H̃)`.
pub fn extension_objective_expanded(params: &ModelParams, a: f64) -> Result<f64> {
    let (h0, h1) = invert_grad(params, (1.0 / (a * a), 0.0))?;
    Ok(a * params.log_gamma() - h0 / a + a * l_lambda(params, h0, h1)?)
}

/// `a_β`, the maximizer of [`extension_objective`]: log-spaced scan of
/// `[0.05, 20]` then golden-section refinement.
pub fn a_beta(params: &ModelParams) -> Result<f64> {
    if params.beta <= critical_beta() {
        return Err(Error::InvalidArgument(format!(
            "the extension constant needs beta above the critical point, got {}",
            params.beta
        )));
    }
    let points = 120;
    let (lo, hi) = (0.05f64.ln(), 20f64.ln());
    let grid: Vec<f64> = (0..points).map(|k| (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp()).collect();
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (k, &a) in grid.iter().enumerate() {
        // The inversion can fail for extreme areas; such points are not
        // maximizers.
        if let Ok(v) = extension_objective(params, a) {
            if v > best_val {
                best_val = v;
                best = k;
            }
        }
    }
    if best == 0 || best == points - 1 {
        return Err(Error::NoConvergence {
            what: "extension constant bracket",
            last: grid[best],
            previous: best_val,
        });
    }
    let f = |a: f64| extension_objective(params, a);
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > A_BETA_TOLERANCE {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sampled limit shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffData {
    pub beta: f64,
    pub a_beta: f64,
    /// `h̃_0(1/a_β², 0)`.
    pub htilde0: f64,
    /// `(u, h̃_0(u, 0))` on a few reference areas.
    pub htilde0_at: Vec<(f64, f64)>,
    /// Uniform grid over `[0, a_β]`.
    pub s: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `∫_0^1 γ*` by nested quadrature; equals `1/a_β²`.
    pub star_area: f64,
}

impl WulffData {
    pub fn max_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }

    /// `γ_β(s)` by linear interpolation on the grid; zero outside `[0, a_β]`.
    pub fn gamma_at(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= self.a_beta {
            return 0.0;
        }
        let h = self.a_beta / (self.s.len() - 1) as f64;
        let k = ((s / h).floor() as usize).min(self.s.len() - 2);
        let w = (s - self.s[k]) / h;
        self.gamma[k] * (1.0 - w) + self.gamma[k + 1] * w
    }
}

/// `γ*(s) = ∫_0^s L'((1/2 - x) h̃_0) dx` for a given `h̃_0`.
pub fn gamma_star(params: &ModelParams, h0: f64, s: f64) -> Result<f64> {
    integrate(|x| params.cumulant_d1_unchecked((0.5 - x) * h0), 0.0, s, QUAD_TOL)
}

pub fn wulff_curve(params: &ModelParams, grid: usize) -> Result<WulffData> {
    if grid < 2 {
        return Err(Error::InvalidArgument("the curve grid needs at least two points".into()));
    }
    let a = a_beta(params)?;
    let h0 = htilde0(params, 1.0 / (a * a))?;
    let mut s = Vec::with_capacity(grid);
    let mut gamma = Vec::with_capacity(grid);
    let mut acc = 0.0;
    let mut prev = 0.0;
    for k in 0..grid {
        let t = k as f64 / (grid - 1) as f64;
        acc += integrate(|x| params.cumulant_d1_unchecked((0.5 - x) * h0), prev, t, QUAD_TOL)?;
        prev = t;
        s.push(a * t);
        gamma.push(a * acc);
    }
    let star_area = integrate(|t| gamma_star(params, h0, t).unwrap_or(f64::NAN), 0.0, 1.0, 1e-11)?;
    let htilde0_at = [0.05, 0.1, 0.25, 0.5, 1.0]
        .iter()
        .map(|&u| htilde0(params, u).map(|h| (u, h)))
        .collect::<Result<_>>()?;
    Ok(WulffData {
        beta: params.beta,
        a_beta: a,
        htilde0: h0,
        htilde0_at,
        s,
        gamma,
        star_area,
    })
}

/// `log P_β(G_N = area, V_N = 0)` for the walk started at 0, by a dynamic
/// program over `(|value|, area)`.
pub fn area_constrained_log_prob(params: &ModelParams, steps: usize, area: usize) -> f64 {
    // Column a holds |v| ≤ a (a walk at |v| has swept at least |v|).
    let offset = |a: usize| a * (a + 1) / 2;
    let size = offset(area + 1);
    let mut cur = vec![0.0f64; size];
    let mut next = vec![0.0f64; size];
    cur[0] = 1.0;
    let mut log_scale = 0.0;
    let mut x = vec![0.0f64; 2 * area + 1];
    let mut y = vec![0.0f64; 2 * area + 1];
    for step in 1..=steps {
        next.fill(0.0);
        for src in 0..=area {
            let col = &cur[offset(src)..offset(src) + src + 1];
            let Some(support) = col.iter().rposition(|&v| v > 0.0) else {
                continue;
            };
            let reach = if step == steps { 0 } else { area - src };
            let radius = support.max(reach);
            let n = 2 * radius + 1;
            x[..n].fill(0.0);
            for u in 0..=support {
                x[radius + u] = col[u];
                x[radius - u] = col[u];
            }
            laplace_convolve(params.q, &x[..n], &mut y[..n]);
            for v in 0..=reach {
                next[offset(src + v) + v] += y[radius + v] / params.c_beta;
            }
        }
        let max = next.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return f64::NEG_INFINITY;
        }
        for v in next.iter_mut() {
            *v /= max;
        }
        log_scale += max.ln();
        std::mem::swap(&mut cur, &mut next);
    }
    cur[offset(area)].ln() + log_scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p2() -> ModelParams {
        ModelParams::new(2.0).unwrap()
    }

    fn random_interior(p: &ModelParams, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let half = p.beta / 2.0;
        let h1 = rng.gen_range(-0.8 * half..0.8 * half);
        let end = rng.gen_range(-0.8 * half..0.8 * half);
        (end - h1, h1)
    }

    #[test]
    fn l_lambda_basics() {
        let p = p2();
        assert_eq!(l_lambda(&p, 0.0, 0.0).unwrap(), 0.0);
        let h = 0.4;
        assert!((l_lambda(&p, 0.0, h).unwrap() - p.cumulant(h).unwrap()).abs() < 1e-13);
        for &(a, b) in &[(0.3, -0.2), (-0.5, 0.4), (1.2, -0.7)] {
            let x = l_lambda(&p, a, b).unwrap();
            let y = l_lambda(&p, -a, -b).unwrap();
            assert!((x - y).abs() < 1e-13);
        }
        assert!(l_lambda(&p, 0.0, 1.0).is_err());
        assert!(l_lambda(&p, 1.5, 0.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = p2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eps = 1e-5;
        for _ in 0..20 {
            let (h0, h1) = random_interior(&p, &mut rng);
            let (g0, g1) = grad_l_lambda(&p, h0, h1).unwrap();
            let f0 = (l_lambda(&p, h0 + eps, h1).unwrap() - l_lambda(&p, h0 - eps, h1).unwrap()) / (2.0 * eps);
            let f1 = (l_lambda(&p, h0, h1 + eps).unwrap() - l_lambda(&p, h0, h1 - eps).unwrap()) / (2.0 * eps);
            assert!((g0 - f0).abs() < 1e-7 && (g1 - f1).abs() < 1e-7, "({h0}, {h1})");
            let (m0, m1) = grad_l_lambda(&p, -h0, -h1).unwrap();
            assert!((m0 + g0).abs() < 1e-13 && (m1 + g1).abs() < 1e-13);
        }
        assert_eq!(grad_l_lambda(&p, 0.0, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn inversion_round_trip() {
        let p = p2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(invert_grad(&p, (0.0, 0.0)).unwrap(), (0.0, 0.0));
        for _ in 0..20 {
            let h = random_interior(&p, &mut rng);
            let g = grad_l_lambda(&p, h.0, h.1).unwrap();
            let back = invert_grad(&p, g).unwrap();
            assert!((back.0 - h.0).abs() < 1e-8 && (back.1 - h.1).abs() < 1e-8, "{h:?} -> {back:?}");
        }
    }

    #[test]
    fn inversion_sign_pattern_and_symmetry() {
        let p = p2();
        for &u in &[0.05, 0.5, 3.0] {
            let (h0, h1) = invert_grad(&p, (u, 0.0)).unwrap();
            assert!(h0 > 0.0 && h1 < 0.0);
            assert!((h1 + h0 / 2.0).abs() < 1e-9, "{h0} {h1}");
        }
    }

    #[test]
    fn rate_is_nonpositive_and_continuous() {
        let p = p2();
        let us: Vec<f64> = (1..=80).map(|k| 0.025 * k as f64).collect();
        let gs: Vec<f64> = us.iter().map(|&u| g_rate(&p, u).unwrap()).collect();
        assert!(gs.iter().all(|&g| g <= 0.0));
        let max_jump = gs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        let fine: Vec<f64> = (0..=20).map(|k| g_rate(&p, 1.0 + 0.00125 * k as f64).unwrap()).collect();
        let fine_jump = fine.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(fine_jump < max_jump / 5.0);
    }

    #[test]
    fn extension_constant() {
        let p = p2();
        let a = a_beta(&p).unwrap();
        let at = extension_objective(&p, a).unwrap();
        assert!(at > extension_objective(&p, 0.5 * a).unwrap());
        assert!(at > extension_objective(&p, 2.0 * a).unwrap());
        for &x in &[0.5, 1.0, 2.5] {
            let d = extension_objective(&p, x).unwrap() - extension_objective_expanded(&p, x).unwrap();
            assert!(d.abs() < 1e-12);
        }
        assert!(a_beta(&ModelParams::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn curve_invariants() {
        let p = p2();
        let w = wulff_curve(&p, 201).unwrap();
        assert!(w.gamma[0].abs() < 1e-10 && w.gamma[200].abs() < 1e-10);
        for k in 0..=100 {
            assert!((w.gamma[k] - w.gamma[200 - k]).abs() < 1e-10);
        }
        let top = w.gamma.iter().copied().enumerate().fold((0, 0.0), |b, (i, g)| if g > b.1 { (i, g) } else { b });
        assert_eq!(top.0, 100);
        assert!(w.gamma.iter().all(|&g| g >= -1e-12));
        for k in 1..=100 {
            assert!(w.gamma[k] >= w.gamma[k - 1]);
        }
        assert!((w.star_area - 1.0 / (w.a_beta * w.a_beta)).abs() < 1e-8);
        // Trapezoid area of γ_β over [0, a_β] is 1.
        let h = w.a_beta / 200.0;
        let area: f64 = w.gamma.windows(2).map(|g| 0.5 * (g[0] + g[1]) * h).sum();
        assert!((area - 1.0).abs() < 1e-3, "{area}");
    }

    #[test]
    fn small_area_dp() {
        // Two steps: P(V_1 = v, V_2 = 0) = pmf(v)², area |v|.
        let p = p2();
        let direct = 2.0 * p.increment_pmf(3).powi(2);
        assert!((area_constrained_log_prob(&p, 2, 3) - direct.ln()).abs() < 1e-12);
    }
}
