//! Configurations of the partially directed walk and their decompositions.
//!
//! A configuration is stored as its signed stretch vector. Geometry derived
//! from it (envelopes, center-of-mass walk) is kept exact: half-integers are
//! carried as doubled integers in [`HalfInt`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::WalkPath;

/// `x ∧̃ y`: the number of self-touchings between two consecutive stretches.
///
/// Equals `min(|x|, |y|)` for stretches of opposite sign and 0 otherwise, which
/// is also `(|x| + |y| - |x + y|) / 2`.
#[inline]
pub fn wedge(x: i64, y: i64) -> u64 {
    if (x < 0 && y > 0) || (x > 0 && y < 0) {
        x.unsigned_abs().min(y.unsigned_abs())
    } else {
        0
    }
}

/// A configuration `l ∈ Ω_L`: stretches `(l_1, ..., l_N)` with
/// `Σ|l_n| + N = L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StretchConfig {
    stretches: Vec<i64>,
    length: usize,
}

impl StretchConfig {
    /// Builds a configuration and infers its size `L = Σ|l_n| + N`.
    pub fn new(stretches: Vec<i64>) -> Result<Self> {
        if stretches.is_empty() {
            return Err(Error::InvalidConfig("a configuration needs at least one stretch".into()));
        }
        let length = stretches.iter().map(|l| l.unsigned_abs() as usize).sum::<usize>() + stretches.len();
        Ok(Self { stretches, length })
    }

    /// Builds a configuration and checks it has the announced size.
    pub fn with_length(stretches: Vec<i64>, length: usize) -> Result<Self> {
        let cfg = Self::new(stretches)?;
        if cfg.length != length {
            return Err(Error::InvalidConfig(format!(
                "stretches account for {} monomers, expected L = {}",
                cfg.length, length
            )));
        }
        Ok(cfg)
    }

    pub fn stretches(&self) -> &[i64] {
        &self.stretches
    }

    /// Number of monomers `L`.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Horizontal extension `N`.
    pub fn extension(&self) -> usize {
        self.stretches.len()
    }

    /// The configuration with every stretch reversed (`l -> -l`).
    pub fn flipped(&self) -> Self {
        Self {
            stretches: self.stretches.iter().map(|l| -l).collect(),
            length: self.length,
        }
    }

    /// Total vertical displacement `l_1 + ... + l_N`.
    pub fn displacement(&self) -> i64 {
        self.stretches.iter().sum()
    }

    pub fn max_abs_stretch(&self) -> u64 {
        self.stretches.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub(crate) fn from_parts_unchecked(stretches: Vec<i64>, length: usize) -> Self {
        debug_assert_eq!(
            stretches.iter().map(|l| l.unsigned_abs() as usize).sum::<usize>() + stretches.len(),
            length
        );
        Self { stretches, length }
    }
}

impl fmt::Display for StretchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.stretches.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// `H_L(l) = Σ_{n<N} l_n ∧̃ l_{n+1}`.
pub fn hamiltonian(cfg: &StretchConfig) -> u64 {
    cfg.stretches.windows(2).map(|w| wedge(w[0], w[1])).sum()
}

/// Image of a configuration under the inverse walk bijection:
/// `V_0 = V_{N+1} = 0` and `V_i = (-1)^{i-1} l_i`.
pub fn to_walk(cfg: &StretchConfig) -> WalkPath {
    let mut values = Vec::with_capacity(cfg.extension() + 2);
    values.push(0);
    values.extend(
        cfg.stretches
            .iter()
            .enumerate()
            .map(|(i, &l)| if i % 2 == 0 { l } else { -l }),
    );
    values.push(0);
    WalkPath::new(values)
}

/// Maps a pinned walk `(V_0, ..., V_{N+1})` back to its configuration.
pub fn from_walk(walk: &WalkPath) -> Result<StretchConfig> {
    let v = walk.values();
    if v.len() < 3 || v[0] != 0 || v[v.len() - 1] != 0 {
        return Err(Error::InvalidArgument(
            "walk must have at least one interior point and be pinned to 0 at both ends".into(),
        ));
    }
    let stretches: Vec<i64> = v[1..v.len() - 1]
        .iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { x } else { -x })
        .collect();
    StretchConfig::new(stretches)
}

/// Upper and lower envelopes `(ℰ⁺, ℰ⁻)` indexed `0..=N+1`.
pub fn envelopes(cfg: &StretchConfig) -> (Vec<i64>, Vec<i64>) {
    let n = cfg.extension();
    let mut upper = Vec::with_capacity(n + 2);
    let mut lower = Vec::with_capacity(n + 2);
    upper.push(0);
    lower.push(0);
    let mut before = 0i64;
    for &l in &cfg.stretches {
        let after = before + l;
        upper.push(before.max(after));
        lower.push(before.min(after));
        before = after;
    }
    upper.push(before);
    lower.push(before);
    (upper, lower)
}

/// An exact half-integer, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_int(x: i64) -> Self {
        HalfInt(2 * x)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Center-of-mass walk `M_{l,0..=N+1}`: `M_{l,i} = l_1 + ... + l_{i-1} + l_i/2`.
pub fn center_of_mass(cfg: &StretchConfig) -> Vec<HalfInt> {
    let mut out = Vec::with_capacity(cfg.extension() + 2);
    out.push(HalfInt(0));
    let mut before = 0i64;
    for &l in &cfg.stretches {
        out.push(HalfInt(2 * before + l));
        before += l;
    }
    out.push(HalfInt::from_int(before));
    out
}

/// Profile `|l_0|, ..., |l_{N+1}|` with the padding `l_0 = l_{N+1} = 0`.
pub fn profile(cfg: &StretchConfig) -> Vec<u64> {
    let mut out = Vec::with_capacity(cfg.extension() + 2);
    out.push(0);
    out.extend(cfg.stretches.iter().map(|l| l.unsigned_abs()));
    out.push(0);
    out
}

/// Bead decomposition: maximal runs of nonzero stretches with strictly
/// alternating signs. Zero stretches form beads of their own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeadDecomposition {
    /// `x_0 = 0 < x_1 < ... < x_{n(l)} = N`.
    pub boundaries: Vec<usize>,
    /// Monomer counts `I_1, ..., I_{n(l)}`.
    pub sizes: Vec<usize>,
    /// Index (0-based) of the first largest bead.
    pub largest_index: usize,
}

impl BeadDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest_size(&self) -> usize {
        self.sizes[self.largest_index]
    }
}

pub fn beads(cfg: &StretchConfig) -> BeadDecomposition {
    let l = &cfg.stretches;
    let n = l.len();
    let mut boundaries = vec![0];
    let mut sizes = Vec::new();
    let mut start = 0;
    let mut size = 0usize;
    for i in 0..n {
        size += l[i].unsigned_abs() as usize + 1;
        // l_{N+1} = 0 closes the last bead.
        let next = if i + 1 < n { l[i + 1] } else { 0 };
        if wedge(l[i], next) == 0 {
            boundaries.push(i + 1);
            sizes.push(size);
            size = 0;
            start = i + 1;
        }
    }
    debug_assert_eq!(start, n);
    let mut largest_index = 0;
    for (j, &s) in sizes.iter().enumerate() {
        if s > sizes[largest_index] {
            largest_index = j;
        }
    }
    BeadDecomposition {
        boundaries,
        sizes,
        largest_index,
    }
}

/// Pattern decomposition: consecutive segments each ending at the first
/// zero stretch after the previous one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternDecomposition {
    /// `T_0 = 0 < T_1 < ... < T_{p(l)}`.
    pub stop_times: Vec<usize>,
    /// Pattern sizes `σ_1, ..., σ_{p(l)}`.
    pub sizes: Vec<usize>,
    /// Monomers in a trailing segment containing no zero stretch, if any.
    pub incomplete: Option<usize>,
}

impl PatternDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn patterns(cfg: &StretchConfig) -> PatternDecomposition {
    let mut stop_times = vec![0];
    let mut sizes = Vec::new();
    let mut size = 0usize;
    for (i, &l) in cfg.stretches.iter().enumerate() {
        size += l.unsigned_abs() as usize + 1;
        if l == 0 {
            stop_times.push(i + 1);
            sizes.push(size);
            size = 0;
        }
    }
    PatternDecomposition {
        stop_times,
        sizes,
        incomplete: (size > 0).then_some(size),
    }
}

/// A configuration seen through the scaling operator, sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    pub t: Vec<f64>,
    pub center: Vec<f64>,
    pub profile: Vec<f64>,
}

/// Samples `L^{-space_exp} (M_{l, ⌊t L^time_exp⌋ ∧ N}, |l_{⌊t L^time_exp⌋ ∧ N}|)`
/// at `grid` equally spaced times in `[0, t_max]`.
pub fn rescale(cfg: &StretchConfig, time_exp: f64, space_exp: f64, t_max: f64, grid: usize) -> Result<RescaledPath> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must contain at least one point".into()));
    }
    if !(t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be nonnegative, got {t_max}")));
    }
    let len = cfg.length() as f64;
    let time_scale = len.powf(time_exp);
    let space_scale = len.powf(space_exp);
    let n = cfg.extension();
    let com = center_of_mass(cfg);
    let mut out = RescaledPath {
        t: Vec::with_capacity(grid),
        center: Vec::with_capacity(grid),
        profile: Vec::with_capacity(grid),
    };
    for k in 0..grid {
        let t = if grid == 1 { 0.0 } else { t_max * k as f64 / (grid - 1) as f64 };
        // Guard against t·L^α landing a hair below an integer.
        let idx = ((t * time_scale + 1e-9).floor() as usize).min(n);
        let prof = if idx == 0 { 0 } else { cfg.stretches[idx - 1].unsigned_abs() };
        out.t.push(t);
        out.center.push(com[idx].to_f64() / space_scale);
        out.profile.push(prof as f64 / space_scale);
    }
    Ok(out)
}

/// Calls `f` on every configuration of `Ω_L`, in lexicographic order of the
/// stretch vector.
pub fn for_each_config<F: FnMut(&StretchConfig)>(length: usize, mut f: F) {
    fn rec<F: FnMut(&StretchConfig)>(remaining: usize, length: usize, buf: &mut Vec<i64>, f: &mut F) {
        if remaining == 0 {
            f(&StretchConfig::from_parts_unchecked(buf.clone(), length));
            return;
        }
        // Each stretch costs |l| + 1 monomers.
        let max = remaining as i64 - 1;
        for l in -max..=max {
            buf.push(l);
            rec(remaining - l.unsigned_abs() as usize - 1, length, buf, f);
            buf.pop();
        }
    }
    if length == 0 {
        return;
    }
    let mut buf = Vec::new();
    rec(length, length, &mut buf, &mut f);
}

/// All of `Ω_L` collected into a vector.
pub fn all_configs(length: usize) -> Vec<StretchConfig> {
    let mut out = Vec::new();
    for_each_config(length, |c| out.push(c.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: &[i64]) -> StretchConfig {
        StretchConfig::new(l.to_vec()).unwrap()
    }

    #[test]
    fn wedge_cases() {
        assert_eq!(wedge(2, -3), 2);
        assert_eq!(wedge(2, 3), 0);
        assert_eq!(wedge(0, 5), 0);
        assert_eq!(wedge(-4, 1), 1);
    }

    #[test]
    fn wedge_matches_absolute_value_identity() {
        for x in -50i64..=50 {
            for y in -50i64..=50 {
                let twice = x.abs() + y.abs() - (x + y).abs();
                assert_eq!(2 * wedge(x, y) as i64, twice, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(StretchConfig::new(vec![]).is_err());
        assert!(StretchConfig::with_length(vec![2, -3, 1], 9).is_ok());
        assert!(StretchConfig::with_length(vec![2, -3, 1], 8).is_err());
        assert_eq!(cfg(&[0]).length(), 1);
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&cfg(&[2, -3, 1])), 3);
        assert_eq!(hamiltonian(&cfg(&[7])), 0);
        assert_eq!(hamiltonian(&cfg(&[1, -1])), 1);
        assert_eq!(hamiltonian(&cfg(&[1, 1])), 0);
    }

    #[test]
    fn walk_examples() {
        assert_eq!(to_walk(&cfg(&[2, -3, 1])).values(), &[0, 2, 3, 1, 0]);
        assert_eq!(to_walk(&cfg(&[0])).values(), &[0, 0, 0]);
        assert_eq!(from_walk(&WalkPath::new(vec![0, 2, 3, 1, 0])).unwrap(), cfg(&[2, -3, 1]));
        assert_eq!(from_walk(&WalkPath::new(vec![0, 0, 0])).unwrap(), cfg(&[0]));
        assert!(from_walk(&WalkPath::new(vec![0, 2, 1])).is_err());
        assert!(from_walk(&WalkPath::new(vec![1, 2, 0])).is_err());
        assert!(from_walk(&WalkPath::new(vec![0, 0])).is_err());
    }

    #[test]
    fn envelope_and_center_examples() {
        let c = cfg(&[2, -3, 1]);
        let (up, lo) = envelopes(&c);
        assert_eq!(up, vec![0, 2, 2, 0, 0]);
        assert_eq!(lo, vec![0, 0, -1, -1, 0]);
        let m: Vec<i64> = center_of_mass(&c).iter().map(|h| h.doubled()).collect();
        assert_eq!(m, vec![0, 2, 1, -1, 0]);
        let single: Vec<f64> = center_of_mass(&cfg(&[5])).iter().map(|h| h.to_f64()).collect();
        assert_eq!(single, vec![0.0, 2.5, 5.0]);
        assert_eq!(HalfInt(-1).to_string(), "-1/2");
    }

    #[test]
    fn positive_stretches_lower_envelope_is_previous_partial_sum() {
        let c = cfg(&[1, 3, 2]);
        let (_, lo) = envelopes(&c);
        assert_eq!(&lo[1..4], &[0, 1, 4]);
    }

    #[test]
    fn bead_examples() {
        let one = beads(&cfg(&[2, -3, 1]));
        assert_eq!(one.count(), 1);
        assert_eq!(one.sizes, vec![9]);
        let two = beads(&cfg(&[1, 1]));
        assert_eq!(two.boundaries, vec![0, 1, 2]);
        assert_eq!(two.sizes, vec![2, 2]);
        let zeros = beads(&cfg(&[0, 0, 0, 0]));
        assert_eq!(zeros.count(), 4);
        let mixed = beads(&cfg(&[1, 0, 3, -4, 2, 2]));
        assert_eq!(mixed.boundaries, vec![0, 1, 2, 5, 6]);
        assert_eq!(mixed.sizes, vec![2, 1, 12, 3]);
        assert_eq!(mixed.largest_index, 2);
        assert_eq!(mixed.largest_size(), 12);
    }

    #[test]
    fn pattern_examples() {
        let p = patterns(&cfg(&[1, 0, -2, 0]));
        assert_eq!(p.count(), 2);
        assert_eq!(p.sizes, vec![3, 4]);
        assert_eq!(p.stop_times, vec![0, 2, 4]);
        assert_eq!(p.incomplete, None);
        let z = patterns(&cfg(&[0]));
        assert_eq!(z.sizes, vec![1]);
        let none = patterns(&cfg(&[2, -1, 3]));
        assert_eq!(none.count(), 0);
        assert_eq!(none.incomplete, Some(9));
    }

    #[test]
    fn rescale_identity_and_clamp() {
        let c = cfg(&[2, -3, 1]);
        let r = rescale(&c, 0.0, 0.0, 4.0, 5).unwrap();
        assert_eq!(r.profile, vec![0.0, 2.0, 3.0, 1.0, 1.0]);
        assert_eq!(r.center, vec![0.0, 1.0, 0.5, -0.5, -0.5]);
        assert!(rescale(&c, 0.5, 0.5, 1.0, 0).is_err());
        let far = rescale(&c, 0.5, 0.5, 100.0, 3).unwrap();
        assert_eq!(far.profile[2], 1.0 / 3.0);
    }

    #[test]
    fn config_counts_follow_pell_recursion() {
        let counts: Vec<usize> = (1..=9).map(|l| all_configs(l).len()).collect();
        assert_eq!(counts, vec![1, 3, 7, 17, 41, 99, 239, 577, 1393]);
    }

    #[test]
    fn exhaustive_walk_and_geometry_identities() {
        for len in 1..=10 {
            for_each_config(len, |c| {
                let w = to_walk(c);
                assert_eq!(&from_walk(&w).unwrap(), c);
                let n = c.extension();
                assert_eq!(w.geometric_area(n), (len - n) as u64);
                // H = Σ|V_i| - ½ Σ_{i=0}^{N} |V_{i+1} - V_i|  on the walk side
                let v = w.values();
                let area: i64 = v.iter().map(|x| x.abs()).sum();
                let incr: i64 = v.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
                assert_eq!(2 * hamiltonian(c) as i64, 2 * area - incr);

                let (up, lo) = envelopes(c);
                let m = center_of_mass(c);
                let prof = profile(c);
                for i in 1..=n {
                    assert!(up[i] >= lo[i]);
                    assert_eq!((up[i] - lo[i]) as u64, prof[i]);
                    assert_eq!(2 * up[i], m[i].doubled() + prof[i] as i64);
                    assert_eq!(2 * lo[i], m[i].doubled() - prof[i] as i64);
                }
                assert_eq!(up[n + 1], c.displacement());

                let b = beads(c);
                assert_eq!(b.sizes.iter().sum::<usize>(), len);
                for j in 1..b.boundaries.len() {
                    let (lo_b, hi_b) = (b.boundaries[j - 1], b.boundaries[j]);
                    for i in lo_b..hi_b - 1 {
                        assert!(wedge(c.stretches()[i], c.stretches()[i + 1]) > 0);
                    }
                    if hi_b < n {
                        assert_eq!(wedge(c.stretches()[hi_b - 1], c.stretches()[hi_b]), 0);
                    }
                }

                let p = patterns(c);
                let zeros = c.stretches().iter().filter(|&&l| l == 0).count();
                assert_eq!(p.count(), zeros);
                assert_eq!(p.sizes.iter().sum::<usize>() + p.incomplete.unwrap_or(0), len);
                for k in 1..p.stop_times.len() {
                    let beads_inside = b.boundaries.iter().filter(|&&x| x > p.stop_times[k - 1] && x <= p.stop_times[k]).count();
                    assert!(beads_inside >= 1);
                }
            });
        }
    }
}
