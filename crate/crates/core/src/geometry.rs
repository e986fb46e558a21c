//! Ensemble estimators and finite-size scaling fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{beads, patterns, rescale, StretchConfig};
use crate::sampler::Ensemble;
use crate::stats::{linear_fit, mean_stderr, MeanEstimate};

fn require_nonempty(ens: &Ensemble) -> Result<()> {
    if ens.is_empty() {
        Err(Error::EmptyEnsemble)
    } else {
        Ok(())
    }
}

fn estimate<F: Fn(&StretchConfig) -> f64>(ens: &Ensemble, f: F) -> Result<MeanEstimate> {
    let xs: Vec<f64> = ens.configs.iter().map(f).collect();
    mean_stderr(&xs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionStats {
    pub extension: MeanEstimate,
    /// `N_l / √L`.
    pub per_sqrt_length: MeanEstimate,
    /// `N_l / L`.
    pub per_length: MeanEstimate,
}

pub fn extension_stats(ens: &Ensemble) -> Result<ExtensionStats> {
    require_nonempty(ens)?;
    let l = ens.length as f64;
    Ok(ExtensionStats {
        extension: estimate(ens, |c| c.extension() as f64)?,
        per_sqrt_length: estimate(ens, |c| c.extension() as f64 / l.sqrt())?,
        per_length: estimate(ens, |c| c.extension() as f64 / l)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeadStats {
    pub count: MeanEstimate,
    /// `I_max / L`.
    pub largest_fraction: MeanEstimate,
    /// `(t, P̂(I_max / L ≥ t))` for the requested thresholds.
    pub largest_fraction_tail: Vec<(f64, f64)>,
}

pub fn bead_stats(ens: &Ensemble, thresholds: &[f64]) -> Result<BeadStats> {
    require_nonempty(ens)?;
    let l = ens.length as f64;
    let fractions: Vec<f64> = ens.configs.iter().map(|c| beads(c).largest_size() as f64 / l).collect();
    let tail = thresholds
        .iter()
        .map(|&t| {
            let hits = fractions.iter().filter(|&&f| f >= t).count();
            (t, hits as f64 / fractions.len() as f64)
        })
        .collect();
    Ok(BeadStats {
        count: estimate(ens, |c| beads(c).count() as f64)?,
        largest_fraction: mean_stderr(&fractions)?,
        largest_fraction_tail: tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternStats {
    /// `p(l) / L`, counting completed patterns.
    pub density: MeanEstimate,
    /// Empirical law of all completed pattern sizes pooled over the
    /// ensemble, index `n - 1`.
    pub size_law: Vec<f64>,
    /// Empirical law of `σ_1` over configurations with at least one pattern.
    pub first_size_law: Vec<f64>,
}

fn normalize_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

pub fn pattern_stats(ens: &Ensemble) -> Result<PatternStats> {
    require_nonempty(ens)?;
    let mut sizes = vec![0u64; ens.length];
    let mut first = vec![0u64; ens.length];
    for cfg in &ens.configs {
        let p = patterns(cfg);
        for &s in &p.sizes {
            sizes[s - 1] += 1;
        }
        if let Some(&s) = p.sizes.first() {
            first[s - 1] += 1;
        }
    }
    let l = ens.length as f64;
    Ok(PatternStats {
        density: estimate(ens, |c| patterns(c).count() as f64 / l)?,
        size_law: normalize_counts(&sizes),
        first_size_law: normalize_counts(&first),
    })
}

/// Pointwise mean of rescaled center-of-mass and profile curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanProfile {
    pub time_exp: f64,
    pub space_exp: f64,
    pub t: Vec<f64>,
    pub center: Vec<f64>,
    pub center_stderr: Vec<f64>,
    pub profile: Vec<f64>,
    pub profile_stderr: Vec<f64>,
    /// Whether each configuration was flipped to a nonnegative total
    /// displacement before averaging.
    pub sign_aligned: bool,
}

impl MeanProfile {
    pub fn profile_sup(&self) -> f64 {
        self.profile.iter().copied().fold(0.0, f64::max)
    }

    pub fn center_sup(&self) -> f64 {
        self.center.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

pub fn mean_profile(ens: &Ensemble, time_exp: f64, space_exp: f64, t_max: f64, grid: usize) -> Result<MeanProfile> {
    require_nonempty(ens)?;
    let mut center = vec![Vec::with_capacity(ens.len()); grid];
    let mut profile = vec![Vec::with_capacity(ens.len()); grid];
    let mut t = Vec::new();
    for cfg in &ens.configs {
        let aligned;
        let cfg = if cfg.displacement() < 0 {
            aligned = cfg.flipped();
            &aligned
        } else {
            cfg
        };
        let r = rescale(cfg, time_exp, space_exp, t_max, grid)?;
        for k in 0..grid {
            center[k].push(r.center[k]);
            profile[k].push(r.profile[k]);
        }
        t = r.t;
    }
    let summarize = |cols: &[Vec<f64>]| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut m = Vec::with_capacity(grid);
        let mut s = Vec::with_capacity(grid);
        for col in cols {
            let e = mean_stderr(col)?;
            m.push(e.mean);
            s.push(e.stderr);
        }
        Ok((m, s))
    };
    let (center, center_stderr) = summarize(&center)?;
    let (profile, profile_stderr) = summarize(&profile)?;
    Ok(MeanProfile {
        time_exp,
        space_exp,
        t,
        center,
        center_stderr,
        profile,
        profile_stderr,
        sign_aligned: true,
    })
}

/// Log-log regression of an observable against `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub observable: String,
    pub lengths: Vec<usize>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided 95% half-width from the residual variance.
    pub half_width: f64,
}

pub fn exponent_fit(observable: &str, lengths: &[usize], means: &[f64], stderrs: &[f64]) -> Result<ScalingReport> {
    if lengths.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: lengths.len(),
        });
    }
    if means.len() != lengths.len() || stderrs.len() != lengths.len() {
        return Err(Error::InvalidArgument("lengths, means and stderrs differ in size".into()));
    }
    if means.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive means".into()));
    }
    let xs: Vec<f64> = lengths.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(ScalingReport {
        observable: observable.to_string(),
        lengths: lengths.to_vec(),
        means: means.to_vec(),
        stderrs: stderrs.to_vec(),
        slope: fit.slope,
        intercept: fit.intercept,
        half_width: student_t_975(lengths.len() - 2) * fit.slope_stderr,
    })
}

/// 97.5% quantile of Student's t law.
fn student_t_975(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
    match dof {
        0 => f64::INFINITY,
        d if d <= TABLE.len() => TABLE[d - 1],
        d if d <= 30 => 2.042 + (2.228 - 2.042) * (30 - d) as f64 / 20.0,
        _ => 1.96,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_configs, to_walk};
    use crate::sampler::SamplerKind;
    use crate::walk::excursions;

    fn ensemble(configs: Vec<StretchConfig>, length: usize) -> Ensemble {
        Ensemble {
            beta: 1.0,
            length,
            seed: 0,
            kind: SamplerKind::Exact,
            mcmc: None,
            configs,
        }
    }

    #[test]
    fn single_config_has_zero_stderr() {
        let c = StretchConfig::new(vec![2, -1, 0]).unwrap();
        let ens = ensemble(vec![c.clone(), c], 6);
        let s = extension_stats(&ens).unwrap();
        assert_eq!(s.extension.mean, 3.0);
        assert_eq!(s.extension.stderr, 0.0);
        assert!((s.per_length.mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_ensemble_errors() {
        let ens = ensemble(vec![], 4);
        assert!(extension_stats(&ens).is_err());
        assert!(bead_stats(&ens, &[0.5]).is_err());
        assert!(pattern_stats(&ens).is_err());
        assert!(mean_profile(&ens, 0.5, 0.5, 1.0, 4).is_err());
    }

    #[test]
    fn no_zero_stretch_means_no_pattern() {
        let ens = ensemble(vec![StretchConfig::new(vec![3, -2]).unwrap()], 7);
        let p = pattern_stats(&ens).unwrap();
        assert_eq!(p.density.mean, 0.0);
        assert!(p.size_law.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn flip_invariance() {
        for length in [6usize, 8] {
            let all = all_configs(length);
            let flipped: Vec<StretchConfig> = all.iter().map(|c| c.flipped()).collect();
            let a = ensemble(all, length);
            let b = ensemble(flipped, length);
            assert_eq!(extension_stats(&a).unwrap(), extension_stats(&b).unwrap());
            assert_eq!(bead_stats(&a, &[0.5]).unwrap(), bead_stats(&b, &[0.5]).unwrap());
            assert_eq!(pattern_stats(&a).unwrap(), pattern_stats(&b).unwrap());
            let pa = mean_profile(&a, 0.5, 0.5, 1.5, 9).unwrap();
            let pb = mean_profile(&b, 0.5, 0.5, 1.5, 9).unwrap();
            for k in 0..9 {
                assert!((pa.profile[k] - pb.profile[k]).abs() < 1e-12);
                assert!((pa.center[k] - pb.center[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bead_count_is_excursions_plus_zero_stretches() {
        for length in 1..=10 {
            for cfg in all_configs(length) {
                let zeros = cfg.stretches().iter().filter(|&&l| l == 0).count();
                let exc = excursions(&to_walk(&cfg)).len();
                assert_eq!(beads(&cfg).count(), exc + zeros, "{cfg}");
            }
        }
    }

    #[test]
    fn exact_power_law_slope() {
        let lengths = [64usize, 128, 256, 512, 1024];
        let means: Vec<f64> = lengths.iter().map(|&l| 3.0 * (l as f64).powf(2.0 / 3.0)).collect();
        let r = exponent_fit("synthetic", &lengths, &means, &[0.0; 5]).unwrap();
        assert!((r.slope - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.half_width < 1e-10);
        assert!(exponent_fit("x", &lengths[..2], &means[..2], &[0.0; 2]).is_err());
    }
}
