//! Exact identities and distribution tests, as a report.

use std::collections::HashMap;

use anyhow::Result;
use ipdsaw_core::free_energy::{critical_amplitude, critical_beta};
use ipdsaw_core::ipsaw::{classify, enumerate_family, self_touchings};
use ipdsaw_core::model::{all_configs, hamiltonian};
use ipdsaw_core::partition::{brute_force_z, dp_log_z, dp_z, walk_repr_log_z};
use ipdsaw_core::sampler::sample_mcmc;
use ipdsaw_core::stats::{chi_square, chi_square_upper_tail, total_variation};
use ipdsaw_core::{ExactSampler, Family, LatticePath, McmcParams, ModelParams, StretchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::SelftestArgs;
use crate::report::Report;

const SAMPLER_LENGTH: usize = 8;
/// TV bounds calibrated for 10⁶ draws over the 577 configurations of size 8.
const EXACT_TV: f64 = 0.01;
const MCMC_TV: f64 = 0.02;
const REFERENCE_DRAWS: f64 = 1e6;

struct Checks {
    rows: Vec<(&'static str, String, bool, String)>,
}

impl Checks {
    fn add(&mut self, suite: &'static str, check: impl Into<String>, pass: bool, detail: String) {
        self.rows.push((suite, check.into(), pass, detail));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn critical(c: &mut Checks) {
    let k = critical_amplitude();
    let mut x = 0.5f64;
    for _ in 0..60 {
        x -= (x * x * x + x * x + x - 1.0) / (3.0 * x * x + 2.0 * x + 1.0);
    }
    let gap = (k.beta_c + 2.0 * x.ln()).abs();
    c.add("critical", "gamma residual", k.gamma_residual <= 1e-12, format!("{:e}", k.gamma_residual));
    c.add("critical", "closed form", gap <= 1e-10, format!("{gap:e}"));
    c.add("critical", "airy zero", k.airy_residual <= 1e-10, format!("{:e}", k.airy_residual));
}

fn engines(c: &mut Checks) -> Result<()> {
    let b: f64 = 1.3;
    let goldens = [(2, 3.0), (3, 7.0), (4, 15.0 + 2.0 * b.exp())];
    for (l, want) in goldens {
        let got = dp_z(l, b)?;
        c.add("engines", format!("Z_{l}(1.3)"), rel(got, want) <= 1e-12, format!("{got}"));
    }
    for beta in [0.0, 0.5, critical_beta(), 2.0] {
        let mut worst = 0.0f64;
        for l in 1..=12 {
            worst = worst.max(rel(dp_z(l, beta)?, brute_force_z(l, beta)?));
        }
        c.add("engines", format!("brute = dp, L <= 12, beta {beta}"), worst <= 1e-10, format!("{worst:e}"));
    }
    for beta in [0.5, 1.0, 2.0] {
        let p = ModelParams::new(beta)?;
        let mut worst = 0.0f64;
        for l in 1..=64 {
            let walk = p.c_beta.ln() + beta * l as f64 + walk_repr_log_z(l, &p)?;
            worst = worst.max((walk - dp_log_z(l, beta)?).exp_m1().abs());
        }
        c.add("engines", format!("dp = walk, L <= 64, beta {beta}"), worst <= 1e-8, format!("{worst:e}"));
    }
    Ok(())
}

fn gibbs_law(length: usize, beta: f64) -> Result<HashMap<Vec<i64>, f64>> {
    let z = brute_force_z(length, beta)?;
    Ok(all_configs(length)
        .into_iter()
        .map(|cfg| {
            let w = (beta * hamiltonian(&cfg) as f64).exp() / z;
            (cfg.stretches().to_vec(), w)
        })
        .collect())
}

fn tally<'a>(configs: impl Iterator<Item = &'a StretchConfig>) -> HashMap<Vec<i64>, u64> {
    let mut counts = HashMap::new();
    for cfg in configs {
        *counts.entry(cfg.stretches().to_vec()).or_default() += 1;
    }
    counts
}

fn samplers(c: &mut Checks, args: &SelftestArgs) -> Result<()> {
    let draws = args.draws.max(1);
    // TV of an exact sampler shrinks like n^{-1/2}.
    let scale = (REFERENCE_DRAWS / draws as f64).sqrt().max(1.0);
    for (k, beta) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let law = gibbs_law(SAMPLER_LENGTH, beta)?;
        let p = ModelParams::new(beta)?;
        let mut sampler = ExactSampler::new(SAMPLER_LENGTH, &p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(2 * k as u64));
        let exact: Vec<StretchConfig> = (0..draws).map(|_| sampler.sample(&mut rng)).collect();
        let counts = tally(exact.iter());
        let tv = total_variation(&counts, &law);
        c.add("sampler", format!("exact TV, beta {beta}"), tv <= EXACT_TV * scale, format!("{tv:.4}"));
        let keys: Vec<&Vec<i64>> = law.keys().collect();
        let observed: Vec<u64> = keys.iter().map(|k| counts.get(*k).copied().unwrap_or(0)).collect();
        let probs: Vec<f64> = keys.iter().map(|k| law[*k]).collect();
        let (stat, dof) = chi_square(&observed, &probs, 5.0);
        let pval = chi_square_upper_tail(stat, dof);
        c.add("sampler", format!("exact chi-square, beta {beta}"), pval > 1e-3, format!("p = {pval:.4}"));
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(2 * k as u64 + 1));
        let schedule = McmcParams {
            samples: draws,
            burn_in: 100_000,
            thin: 10,
        };
        let chain = sample_mcmc(SAMPLER_LENGTH, beta, &mut rng, schedule)?;
        let tv = total_variation(&tally(chain.iter()), &law);
        c.add("sampler", format!("mcmc TV, beta {beta}"), tv <= MCMC_TV * scale, format!("{tv:.4}"));
    }
    Ok(())
}

fn lattice(c: &mut Checks) -> Result<()> {
    let mut mismatches = 0usize;
    let mut total = 0usize;
    for l in 1..=12 {
        for cfg in all_configs(l) {
            let path = LatticePath::from_stretches(&cfg);
            let ok = classify(&path).pd && self_touchings(&path)? == hamiltonian(&cfg);
            mismatches += usize::from(!ok);
            total += 1;
        }
    }
    c.add(
        "lattice",
        "midpoint touchings = stretch hamiltonian, L <= 12",
        mismatches == 0,
        format!("{mismatches} of {total} differ"),
    );
    let max = 10;
    let tables: Vec<Vec<u64>> = Family::ALL.iter().map(|&f| enumerate_family(f, max).map(|t| t.counts())).collect::<Result<_, _>>()?;
    let chain_ok = (0..max).all(|i| tables.windows(2).all(|w| w[0][i] >= w[1][i]));
    c.add("lattice", "saw >= psaw >= ne >= pd, L <= 10", chain_ok, format!("L = {max}: {:?}", tables.iter().map(|t| t[max - 1]).collect::<Vec<_>>()));
    let pd_ok = (1..=max).all(|l| dp_z(l, 0.0).map(|z| rel(z, tables[3][l - 1] as f64) <= 1e-12).unwrap_or(false));
    c.add("lattice", "pd counts = |Omega_L|", pd_ok, format!("{:?}", tables[3]));
    Ok(())
}

/// Runs every suite; returns the report and the number of failed checks.
pub fn run(args: &SelftestArgs) -> Result<(Report, usize)> {
    let mut c = Checks { rows: Vec::new() };
    critical(&mut c);
    engines(&mut c)?;
    samplers(&mut c, args)?;
    lattice(&mut c)?;
    let failed = c.rows.iter().filter(|r| !r.2).count();
    let mut r = Report::new(vec!["suite", "check", "pass", "detail"]);
    for (suite, check, pass, detail) in &c.rows {
        r.row(vec![json!(suite), json!(check), json!(pass), json!(detail)]);
    }
    r.notes.push(format!("checks {} failed {failed}", c.rows.len()));
    r.result = json!({ "checks": c.rows.len(), "failed": failed });
    Ok((r, failed))
}
