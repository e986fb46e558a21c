//! Exact partition functions.
//!
//! Three engines compute `Z_{L,β}`: exhaustive enumeration, a dynamic
//! program over stretches, and the random-walk representation
//! `Z_{L,β} = c_β e^{βL} Σ_N Γ_β^N P_β(V_{N+1} = 0, G_N = L - N)`.
//! Everything is reported in log scale since `Z` reaches `e^{2βL}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{conditioning_tilt, excess_free_energy};
use crate::walk::{laplace_convolve, ModelParams};

/// Largest `L` accepted by the exhaustive enumeration.
pub const BRUTE_FORCE_MAX_LENGTH: usize = 14;
/// Largest `L` accepted by the stretch dynamic program.
pub const STRETCH_DP_MAX_LENGTH: usize = 8192;
/// Largest `L` for the step-indexed walk program that yields the
/// extension weights (cubic time).
pub const WALK_LAYERED_MAX_LENGTH: usize = 2048;
/// Largest `L` for the aggregated walk table used by the exact sampler.
pub const WALK_TABLE_MAX_LENGTH: usize = 8192;

fn check_budget(what: &'static str, length: usize, limit: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::InvalidArgument("length must be positive".into()));
    }
    if length > limit {
        return Err(Error::BudgetExceeded {
            what,
            requested: length,
            limit,
        });
    }
    Ok(())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Number of configurations of size `L` with each value of `H`, indexed by
/// `H`. Exhaustive.
pub fn energy_histogram(length: usize) -> Result<Vec<u64>> {
    check_budget("brute-force enumeration", length, BRUTE_FORCE_MAX_LENGTH)?;
    fn rec(remaining: usize, prev: i64, energy: usize, hist: &mut Vec<u64>) {
        if remaining == 0 {
            if hist.len() <= energy {
                hist.resize(energy + 1, 0);
            }
            hist[energy] += 1;
            return;
        }
        let max = remaining as i64 - 1;
        for l in -max..=max {
            let w = crate::model::wedge(prev, l) as usize;
            rec(remaining - 1 - l.unsigned_abs() as usize, l, energy + w, hist);
        }
    }
    let mut hist = Vec::new();
    rec(length, 0, 0, &mut hist);
    Ok(hist)
}

/// `Z_{L,β}` by exhaustive enumeration.
pub fn brute_force_z(length: usize, beta: f64) -> Result<f64> {
    Ok(energy_histogram(length)?
        .iter()
        .enumerate()
        .map(|(h, &n)| n as f64 * (beta * h as f64).exp())
        .sum())
}

/// Stretch recursion `F(r, m)`: the weight of completing a configuration
/// with `r` units remaining after a stretch of magnitude `m`,
///
/// `F(r, m) = [r = 0] + z F(r-1, 0) + Σ_{k=1}^{r-1} (a + e^{β min(m, k)}) F(r-k-1, k)`.
///
/// The opposite-sign branch carries the wedge; the same-sign branch (weight
/// `a`) carries none. Returns `log F(r, 0)` for `r = 0..=L`. Each row is
/// stored scaled by its maximum with the log scale kept separately.
fn stretch_recursion(length: usize, beta: f64, zero_weight: f64, same_sign_weight: f64) -> Vec<f64> {
    let width = |r: usize| length - r + 1;
    let mut offsets = Vec::with_capacity(length + 2);
    let mut total = 0usize;
    for r in 0..=length {
        offsets.push(total);
        total += width(r);
    }
    let mut rows = vec![0.0f64; total];
    let mut scale = vec![0.0f64; length + 1];
    let mut out = vec![0.0f64; length + 1];
    rows[..width(0)].fill(1.0);

    let mut prefix = vec![0.0f64; length + 1];
    let mut plain = vec![0.0f64; length + 1];
    let mut tilted = vec![0.0f64; length + 1];
    for r in 1..=length {
        let reference = scale[r - 1];
        let zero_term = zero_weight * rows[offsets[r - 1]];
        // plain[k] = F(r-k-1, k) and prefix[k] = Σ_{j ≤ k} e^{βj} F(r-j-1, j),
        // both relative to e^{reference}.
        let mut plain_total = 0.0;
        prefix[0] = 0.0;
        for k in 1..r {
            let j = r - k - 1;
            let cell = rows[offsets[j] + k];
            let rel = scale[j] - reference;
            plain[k] = rel.exp() * cell;
            plain_total += plain[k];
            tilted[k] = (beta * k as f64 + rel).exp() * cell;
            prefix[k] = prefix[k - 1] + tilted[k];
        }
        let base = zero_term + same_sign_weight * plain_total;
        let row = &mut rows[offsets[r]..offsets[r] + width(r)];
        let top = r.saturating_sub(1);
        for m in top.min(row.len() - 1)..row.len() {
            row[m] = base + prefix[top];
        }
        // upper(m) = Σ_{k>m} e^{βm} F(r-k-1, k), by upper(m) = e^{-β}(upper(m+1) + e^{β(m+1)} plain[m+1]).
        let mut upper = 0.0;
        let decay = (-beta).exp();
        for m in (0..top).rev() {
            let k = m + 1;
            upper = decay * (upper + tilted[k]);
            if m < row.len() {
                row[m] = base + prefix[m] + upper;
            }
        }
        let max = row.iter().copied().fold(0.0f64, f64::max);
        if max > 0.0 {
            for x in row.iter_mut() {
                *x /= max;
            }
            scale[r] = reference + max.ln();
        } else {
            scale[r] = reference;
        }
        out[r] = scale[r] + row[0].ln();
    }
    out[0] = 0.0;
    out
}

/// `log Z_{r,β}` for `r = 1..=L` (index `r - 1`) from one stretch-DP pass.
pub fn dp_log_z_all(length: usize, beta: f64) -> Result<Vec<f64>> {
    check_budget("stretch dynamic program", length, STRETCH_DP_MAX_LENGTH)?;
    check_beta(beta)?;
    Ok(stretch_recursion(length, beta, 1.0, 1.0)[1..].to_vec())
}

/// `log Z_{L,β}` by the stretch dynamic program (`β ≥ 0`).
pub fn dp_log_z(length: usize, beta: f64) -> Result<f64> {
    Ok(*dp_log_z_all(length, beta)?.last().expect("nonempty"))
}

/// `Z_{L,β}` by the stretch dynamic program; may overflow to infinity for
/// large `βL`, use [`dp_log_z`] there.
pub fn dp_z(length: usize, beta: f64) -> Result<f64> {
    dp_log_z(length, beta).map(f64::exp)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite and nonnegative, got {beta}")));
    }
    Ok(())
}

/// `log Z°_{L,β}`: configurations made of one bead, i.e. all consecutive
/// stretches of opposite sign and nonzero (a single stretch always
/// qualifies).
pub fn one_bead_log_z(length: usize, beta: f64) -> Result<f64> {
    check_budget("stretch dynamic program", length, STRETCH_DP_MAX_LENGTH)?;
    check_beta(beta)?;
    if length == 1 {
        return Ok(0.0);
    }
    // One sign choice is fixed by the recursion's first step.
    Ok(std::f64::consts::LN_2 + stretch_recursion(length, beta, 0.0, 0.0)[length])
}

/// Unnormalized `log Z^pat_n` for `n = 1..=n_max` (index `n - 1`): one
/// pattern is a run of nonzero stretches closed by a zero stretch.
fn pattern_log_z_all(n_max: usize, beta: f64) -> Vec<f64> {
    let nonzero = stretch_recursion(n_max - 1, beta, 0.0, 1.0);
    nonzero[..n_max].to_vec()
}

/// `log Ẑ_{L,β} = log Z^pat_L - βL`, the one-pattern weight in excess
/// normalization (so that the weights `Ẑ_n e^{-f̃ n}` form the renewal law
/// `K`).
pub fn one_pattern_log_z(length: usize, params: &ModelParams) -> Result<f64> {
    check_budget("stretch dynamic program", length, STRETCH_DP_MAX_LENGTH)?;
    Ok(pattern_log_z_all(length, params.beta)[length - 1] - params.beta * length as f64)
}

/// The renewal law `K(n) = Ẑ_{n,β} e^{-f̃(β) n}` of pattern lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternLaw {
    pub excess_free_energy: f64,
    /// `K(n)` at index `n - 1`, truncated once terms drop below `cutoff`.
    pub weights: Vec<f64>,
    pub cutoff: f64,
}

impl PatternLaw {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn pattern_law(params: &ModelParams, cutoff: f64) -> Result<PatternLaw> {
    let f = excess_free_energy(params)?;
    let mut n_max = 256usize;
    loop {
        let logs = pattern_log_z_all(n_max, params.beta);
        let weights: Vec<f64> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| (l - (params.beta + f) * (i + 1) as f64).exp())
            .collect();
        if let Some(last) = weights.iter().rposition(|&w| w >= cutoff) {
            if last + 1 < n_max {
                return Ok(PatternLaw {
                    excess_free_energy: f,
                    weights: weights[..=last].to_vec(),
                    cutoff,
                });
            }
        }
        if n_max >= STRETCH_DP_MAX_LENGTH {
            return Err(Error::BudgetExceeded {
                what: "pattern law truncation",
                requested: 2 * n_max,
                limit: STRETCH_DP_MAX_LENGTH,
            });
        }
        n_max *= 2;
    }
}

/// Which walks the step-indexed program admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum WalkRestriction {
    /// Any walk pinned at both ends.
    Pinned,
    /// Walks with `V_1, ..., V_N > 0` (one sign of the one-bead family).
    Positive,
}

/// Output of the step-indexed walk program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRepresentation {
    pub length: usize,
    pub beta: f64,
    /// `log Z̃_{L,β}`.
    pub log_excess: f64,
    /// `log(Γ_β^N P_β(V_{N+1} = 0, G_N = L - N))` for `N = 1..=L`
    /// (index `N - 1`); `-∞` where the event is empty.
    pub log_extension_weights: Vec<f64>,
}

fn column_offset(c: usize) -> usize {
    c * (c + 1) / 2
}

/// Step-indexed program over `(consumed, |value|)`, consumed counting steps
/// plus `Σ|V_i|`. Layer `i` holds the walks after `i` steps; column `c` of
/// a layer stores `|v| ≤ c`.
fn walk_layers(length: usize, params: &ModelParams, restriction: WalkRestriction) -> Vec<f64> {
    let tilt = conditioning_tilt(params);
    let step_weight = params.gamma_beta / params.c_beta;
    let tilt_weight: Vec<f64> = (0..=length + 1).map(|j| (-tilt * j as f64).exp()).collect();
    let q_pow: Vec<f64> = (0..=length).map(|v| params.q.powi(v as i32)).collect();
    let size = column_offset(length + 1);
    let mut cur = vec![0.0f64; size];
    let mut next = vec![0.0f64; size];
    cur[0] = 1.0;
    let mut log_scale = 0.0;
    let mut out = vec![f64::NEG_INFINITY; length];
    let mut x = vec![0.0f64; 2 * length + 1];
    let mut y = vec![0.0f64; 2 * length + 1];
    let positive = restriction == WalkRestriction::Positive;

    for step in 1..=length {
        next[column_offset(step)..].fill(0.0);
        for src in (step - 1)..length {
            let src_radius = src - (step - 1);
            let col = &cur[column_offset(src)..column_offset(src) + src_radius + 1];
            if col.iter().all(|&v| v == 0.0) {
                continue;
            }
            let tgt_radius = length - src - 1;
            let radius = src_radius.max(tgt_radius);
            let n = 2 * radius + 1;
            x[..n].fill(0.0);
            for (u, &w) in col.iter().enumerate() {
                x[radius + u] = w;
                if !positive && u > 0 {
                    x[radius - u] = w;
                }
            }
            laplace_convolve(params.q, &x[..n], &mut y[..n]);
            let first = usize::from(positive);
            for v in first..=tgt_radius {
                let c = src + 1 + v;
                next[column_offset(c) + v] += step_weight * y[radius + v] * tilt_weight[1 + v];
            }
        }
        let last = &next[column_offset(length)..column_offset(length) + length + 1];
        let mut closing = if positive { 0.0 } else { last[0] };
        for v in 1..=length {
            let w = last[v] * q_pow[v];
            closing += if positive { w } else { 2.0 * w };
        }
        closing /= params.c_beta;
        if closing > 0.0 {
            out[step - 1] = closing.ln() + log_scale + tilt * length as f64;
        }
        let max = next[column_offset(step)..].iter().copied().fold(0.0f64, f64::max);
        if max == 0.0 {
            break;
        }
        for v in next[column_offset(step)..].iter_mut() {
            *v /= max;
        }
        log_scale += max.ln();
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

/// `Z̃_{L,β} = Z_{L,β} e^{-βL} / c_β` with its decomposition by extension,
/// from the step-indexed walk program.
pub fn walk_repr(length: usize, params: &ModelParams) -> Result<WalkRepresentation> {
    check_budget("step-indexed walk program", length, WALK_LAYERED_MAX_LENGTH)?;
    let weights = walk_layers(length, params, WalkRestriction::Pinned);
    Ok(WalkRepresentation {
        length,
        beta: params.beta,
        log_excess: log_sum_exp(&weights),
        log_extension_weights: weights,
    })
}

/// `log Σ_N Γ_β^N P_β(V_1..V_N > 0, V_{N+1} = 0, G_N = L - N)`, the walk
/// form of `e^{-βL} Z°_{L,β} / (2 c_β)` for `L ≥ 2`.
pub fn one_bead_walk_log_weight(length: usize, params: &ModelParams) -> Result<f64> {
    check_budget("step-indexed walk program", length, WALK_LAYERED_MAX_LENGTH)?;
    Ok(log_sum_exp(&walk_layers(length, params, WalkRestriction::Positive)))
}

/// Walk weights summed over the step index:
/// `A(v, c) = Σ_i Γ_β^i P_β(V_i = v, i + Σ_{j ≤ i} |V_j| = c)` for `c ≤ L`,
/// stored for `v ≥ 0` by symmetry and multiplied by `e^{λc}` for a
/// conditioning tilt `λ`. The backbone of the exact sampler.
#[derive(Clone, Debug)]
pub struct WalkTable {
    length: usize,
    params: ModelParams,
    tilt: f64,
    cells: Vec<f64>,
}

impl WalkTable {
    pub fn build(length: usize, params: &ModelParams) -> Result<Self> {
        check_budget("aggregated walk table", length, WALK_TABLE_MAX_LENGTH)?;
        let tilt = conditioning_tilt(params);
        let step_weight = params.gamma_beta / params.c_beta;
        let tilt_weight: Vec<f64> = (0..=length + 1).map(|j| (-tilt * j as f64).exp()).collect();
        let mut cells = vec![0.0f64; column_offset(length + 1)];
        cells[0] = 1.0;
        let mut x = vec![0.0f64; 2 * length + 1];
        let mut y = vec![0.0f64; 2 * length + 1];
        for src in 0..length {
            let col = &cells[column_offset(src)..column_offset(src) + src + 1];
            let Some(support) = col.iter().rposition(|&v| v > 0.0) else {
                continue;
            };
            let tgt_radius = length - src - 1;
            let radius = support.max(tgt_radius);
            let n = 2 * radius + 1;
            x[..n].fill(0.0);
            for u in 0..=support {
                x[radius + u] = col[u];
                x[radius - u] = col[u];
            }
            laplace_convolve(params.q, &x[..n], &mut y[..n]);
            for v in 0..=tgt_radius {
                let c = src + 1 + v;
                cells[column_offset(c) + v] += step_weight * y[radius + v] * tilt_weight[1 + v];
            }
        }
        let table = Self {
            length,
            params: *params,
            tilt,
            cells,
        };
        if !table.log_excess().is_finite() {
            return Err(Error::NoConvergence {
                what: "walk table (range exhausted)",
                last: table.log_excess(),
                previous: f64::NAN,
            });
        }
        Ok(table)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Tilted cell `A(|v|, c) e^{λc}`.
    pub fn cell(&self, v: i64, consumed: usize) -> f64 {
        let a = v.unsigned_abs() as usize;
        if a > consumed {
            return 0.0;
        }
        self.cells[column_offset(consumed) + a]
    }

    /// Column `c` for `|v| = 0, 1, ...`, trimmed after its last positive
    /// entry.
    pub fn column(&self, consumed: usize) -> &[f64] {
        let col = &self.cells[column_offset(consumed)..column_offset(consumed) + consumed + 1];
        let end = col.iter().rposition(|&v| v > 0.0).map_or(0, |i| i + 1);
        &col[..end]
    }

    /// `log Z̃_{c,β}` for `1 ≤ c ≤ L`.
    pub fn log_excess_at(&self, consumed: usize) -> f64 {
        let col = &self.cells[column_offset(consumed)..column_offset(consumed) + consumed + 1];
        let mut total = col[0];
        let mut qp = 1.0;
        for &w in &col[1..] {
            qp *= self.params.q;
            total += 2.0 * w * qp;
        }
        (total / self.params.c_beta).ln() + self.tilt * consumed as f64
    }

    /// `log Z̃_{L,β}`.
    pub fn log_excess(&self) -> f64 {
        self.log_excess_at(self.length)
    }
}

/// `log Z̃_{L,β}` from the aggregated walk table.
pub fn walk_repr_log_z(length: usize, params: &ModelParams) -> Result<f64> {
    Ok(WalkTable::build(length, params)?.log_excess())
}

/// `Z̃_{L,β}`.
pub fn walk_repr_z(length: usize, params: &ModelParams) -> Result<f64> {
    walk_repr_log_z(length, params).map(f64::exp)
}

/// All partition quantities at one `(L, β)`, in log scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTable {
    pub length: usize,
    pub beta: f64,
    pub log_z: f64,
    /// `log Z̃_{L,β}`; absent at `β = 0`.
    pub log_z_excess: Option<f64>,
    pub log_z_one_bead: f64,
    /// `log Ẑ_{L,β}`; absent at `β = 0`.
    pub log_z_one_pattern: Option<f64>,
    /// Extension weights summing to `Z̃`; absent at `β = 0`.
    pub log_extension_weights: Option<Vec<f64>>,
}

impl PartitionTable {
    pub fn build(length: usize, beta: f64) -> Result<Self> {
        let log_z = dp_log_z(length, beta)?;
        let log_z_one_bead = one_bead_log_z(length, beta)?;
        let (log_z_excess, log_z_one_pattern, log_extension_weights) = if beta > 0.0 {
            let params = ModelParams::new(beta)?;
            let repr = walk_repr(length, &params)?;
            (
                Some(repr.log_excess),
                Some(one_pattern_log_z(length, &params)?),
                Some(repr.log_extension_weights),
            )
        } else {
            (None, None, None)
        };
        Ok(Self {
            length,
            beta,
            log_z,
            log_z_excess,
            log_z_one_bead,
            log_z_one_pattern,
            log_extension_weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_configs, beads, hamiltonian, patterns};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_z(1, 0.7).unwrap(), 1.0);
        assert_eq!(brute_force_z(2, 0.7).unwrap(), 3.0);
        assert_eq!(brute_force_z(3, 0.7).unwrap(), 7.0);
        let b: f64 = 1.3;
        assert!(rel(brute_force_z(4, b).unwrap(), 15.0 + 2.0 * b.exp()) < 1e-15);
        assert!(brute_force_z(15, 1.0).is_err());
        assert!(brute_force_z(0, 1.0).is_err());
    }

    #[test]
    fn histogram_matches_config_list() {
        for length in 1..=9 {
            let mut hist = vec![0u64; length];
            for cfg in all_configs(length) {
                hist[hamiltonian(&cfg) as usize] += 1;
            }
            let mut h = energy_histogram(length).unwrap();
            h.resize(length, 0);
            assert_eq!(h, hist);
        }
    }

    #[test]
    fn stretch_dp_matches_enumeration() {
        for &beta in &[0.0, 0.5, crate::free_energy::critical_beta(), 2.0] {
            for length in 1..=12 {
                let exact = brute_force_z(length, beta).unwrap();
                let dp = dp_z(length, beta).unwrap();
                assert!(rel(dp, exact) < 1e-10, "L={length} beta={beta}: {dp} vs {exact}");
            }
        }
    }

    #[test]
    fn beta_zero_growth() {
        let all = dp_log_z_all(512, 0.0).unwrap();
        assert!(rel(all[7].exp(), 577.0) < 1e-12);
        let ratio = (all[511] - all[510]).exp();
        assert!((ratio - (1.0 + 2f64.sqrt())).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn three_engines_agree() {
        for &beta in &[0.5, 1.0, 2.0] {
            let p = ModelParams::new(beta).unwrap();
            for length in 1..=64 {
                let dp = dp_log_z(length, beta).unwrap();
                let layered = walk_repr(length, &p).unwrap().log_excess;
                let table = walk_repr_log_z(length, &p).unwrap();
                let via_walk = p.c_beta.ln() + beta * length as f64 + layered;
                assert!((dp - via_walk).abs() < 1e-8, "L={length} beta={beta}: {dp} vs {via_walk}");
                assert!((layered - table).abs() < 1e-9, "L={length} beta={beta}");
            }
        }
    }

    #[test]
    fn single_site_walk_form() {
        let p = ModelParams::new(1.7).unwrap();
        let z = walk_repr_z(1, &p).unwrap();
        assert!(rel(z, p.gamma_beta / (p.c_beta * p.c_beta)) < 1e-14);
        assert!(rel(z, (-1.7f64).exp() / p.c_beta) < 1e-12);
    }

    #[test]
    fn extension_weights_match_enumeration() {
        let beta = 1.0;
        let p = ModelParams::new(beta).unwrap();
        for length in [4usize, 7, 10] {
            let mut by_n = vec![0.0; length];
            for cfg in all_configs(length) {
                by_n[cfg.extension() - 1] += (beta * hamiltonian(&cfg) as f64).exp();
            }
            let repr = walk_repr(length, &p).unwrap();
            let scale = p.c_beta * (beta * length as f64).exp();
            for (n, &w) in by_n.iter().enumerate() {
                assert!(rel(repr.log_extension_weights[n].exp() * scale, w) < 1e-10, "L={length} N={}", n + 1);
            }
        }
    }

    #[test]
    fn one_bead_examples() {
        let b: f64 = 0.9;
        assert!(rel(one_bead_log_z(4, b).unwrap().exp(), 2.0 + 2.0 * b.exp()) < 1e-14);
        assert_eq!(one_bead_log_z(1, b).unwrap(), 0.0);
        for &beta in &[0.0, 0.5, 2.0] {
            for length in 1..=10 {
                let expect: f64 = all_configs(length)
                    .iter()
                    .filter(|c| beads(c).count() == 1)
                    .map(|c| (beta * hamiltonian(c) as f64).exp())
                    .sum();
                let got = one_bead_log_z(length, beta).unwrap().exp();
                assert!(rel(got, expect) < 1e-12, "L={length} beta={beta}");
                assert!(got <= dp_z(length, beta).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn one_bead_walk_form() {
        for &beta in &[0.5, 1.0, 2.0] {
            let p = ModelParams::new(beta).unwrap();
            for length in 2..=40 {
                let lhs = one_bead_log_z(length, beta).unwrap() - beta * length as f64 - (2.0 * p.c_beta).ln();
                let rhs = one_bead_walk_log_weight(length, &p).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "L={length} beta={beta}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn one_bead_square_root_decay() {
        let beta = 2.0;
        let xs: Vec<f64> = [64usize, 128, 256, 512, 1024].iter().map(|&l| l as f64).collect();
        let ratios: Vec<f64> = xs
            .iter()
            .map(|&l| (one_bead_log_z(l as usize, beta).unwrap() - beta * l) / l.sqrt())
            .collect();
        assert!(ratios.iter().all(|&r| r < 0.0), "{ratios:?}");
        let spread = ratios[3] - ratios[4];
        assert!(spread.abs() < 0.1 * ratios[4].abs(), "{ratios:?}");
    }

    #[test]
    fn one_pattern_matches_enumeration() {
        let p = ModelParams::new(1.2).unwrap();
        assert!(rel(one_pattern_log_z(1, &p).unwrap().exp(), (-1.2f64).exp()) < 1e-14);
        for length in 1..=10 {
            let expect: f64 = all_configs(length)
                .iter()
                .filter(|c| {
                    let pat = patterns(c);
                    pat.count() == 1 && pat.incomplete.is_none()
                })
                .map(|c| (p.beta * hamiltonian(c) as f64).exp())
                .sum();
            let got = one_pattern_log_z(length, &p).unwrap() + p.beta * length as f64;
            if expect == 0.0 {
                assert_eq!(got, f64::NEG_INFINITY, "L={length}");
            } else {
                assert!((got - expect.ln()).abs() < 1e-12, "L={length}");
            }
        }
    }

    #[test]
    fn pattern_law_normalized_with_exponential_tail() {
        let p = ModelParams::new(0.5).unwrap();
        let law = pattern_law(&p, 1e-14).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-4, "{}", law.total());
        let xs: Vec<f64> = (20..=200).map(|n| n as f64).collect();
        let ys: Vec<f64> = (20..=200).map(|n| law.weights[n - 1].ln()).collect();
        let fit = crate::stats::linear_fit(&xs, &ys).unwrap();
        assert!(fit.slope < 0.0 && fit.r_squared > 0.99, "{fit:?}");
    }

    #[test]
    fn z_nondecreasing_in_beta() {
        for length in [5usize, 20, 100] {
            let vals: Vec<f64> = [0.0, 0.3, 0.9, 1.5, 3.0].iter().map(|&b| dp_log_z(length, b).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn table_invariants() {
        let t = PartitionTable::build(12, 0.8).unwrap();
        assert!(t.log_z >= 19601f64.ln());
        let w = t.log_extension_weights.as_ref().unwrap();
        assert!((log_sum_exp(w) - t.log_z_excess.unwrap()).abs() < 1e-12);
        assert!(t.log_z_one_bead <= t.log_z);
        let zero = PartitionTable::build(10, 0.0).unwrap();
        assert!(zero.log_z_excess.is_none());
        assert!(rel(zero.log_z.exp(), 3363.0) < 1e-12);
    }
}
