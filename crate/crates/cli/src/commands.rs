use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use ipdsaw_core::free_energy::{critical_amplitude, critical_beta, excess_free_energy, free_energy};
use ipdsaw_core::geometry::{bead_stats, exponent_fit, extension_stats, mean_profile, pattern_stats};
use ipdsaw_core::ipsaw::{enumerate_family, growth_estimates};
use ipdsaw_core::partition::{brute_force_z, dp_log_z, walk_repr_log_z};
use ipdsaw_core::wulff::wulff_curve;
use ipdsaw_core::{Ensemble, McmcParams, ModelParams, SamplerKind};
use serde_json::json;

use crate::args::{AnalyzeArgs, FreeEnergyArgs, IpsawArgs, PartitionArgs, ProfileArgs, SampleArgs, WulffArgs};
use crate::error::ConfigError;
use crate::pool::par_map;
use crate::report::{num, Meta, Report};
use crate::svg::{Plot, Series};

/// Largest length handled by brute-force enumeration in `partition`.
const BRUTE_FORCE_MAX_LENGTH: usize = 12;
const MIN_FIT_LENGTHS: usize = 3;

pub struct Output {
    pub report: Report,
    pub plot: Option<Plot>,
}

impl From<Report> for Output {
    fn from(report: Report) -> Self {
        Self { report, plot: None }
    }
}

fn phase(beta: f64) -> &'static str {
    let bc = critical_beta();
    if (beta - bc).abs() <= 1e-12 {
        "critical"
    } else if beta < bc {
        "extended"
    } else {
        "collapsed"
    }
}

/// Root of `x³ + x² + x = 1` by Newton from 1/2.
fn cubic_root() -> f64 {
    let mut x = 0.5f64;
    for _ in 0..60 {
        x -= (x * x * x + x * x + x - 1.0) / (3.0 * x * x + 2.0 * x + 1.0);
    }
    x
}

pub fn critical() -> Result<Output> {
    let c = critical_amplitude();
    let closed_form_gap = (c.beta_c + 2.0 * cubic_root().ln()).abs();
    let mut r = Report::new(vec!["quantity", "value"]);
    for (name, value) in [
        ("beta_c", c.beta_c),
        ("gamma_residual", c.gamma_residual),
        ("closed_form_gap", closed_form_gap),
        ("slope_c", c.slope_c),
        ("slope_check", c.slope_check),
        ("area_d", c.area_d),
        ("airy_prime_zero", c.airy_prime_zero),
        ("airy_residual", c.airy_residual),
        ("sigma2", c.sigma2),
        ("amplitude", c.amplitude),
    ] {
        r.row(vec![json!(name), num(value)]);
    }
    let mut result = serde_json::to_value(c)?;
    result["closed_form_gap"] = num(closed_form_gap);
    r.result = result;
    Ok(r.into())
}

struct FreeEnergyRow {
    beta: f64,
    excess: f64,
    total: f64,
    dp: Option<f64>,
}

pub fn free_energy_table(args: &FreeEnergyArgs) -> Result<Output> {
    if let Some(l) = args.dp_length {
        if l < 2 {
            return Err(ConfigError(format!("--dp-length must be at least 2, got {l}")).into());
        }
    }
    let rows = par_map(&args.beta_grid.0, |&beta| -> Result<FreeEnergyRow> {
        let p = ModelParams::new(beta)?;
        let excess = excess_free_energy(&p)?;
        let total = free_energy(&p)?;
        let dp = match args.dp_length {
            Some(l) => Some(dp_log_z(l, beta)? - dp_log_z(l - 1, beta)?),
            None => None,
        };
        Ok(FreeEnergyRow { beta, excess, total, dp })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["beta", "phase", "excess_free_energy", "free_energy"];
    if args.dp_length.is_some() {
        columns.extend(["dp_log_ratio", "dp_gap"]);
    }
    let mut r = Report::new(columns);
    let mut result = Vec::new();
    for row in &rows {
        let mut cells = vec![num(row.beta), json!(phase(row.beta)), num(row.excess), num(row.total)];
        let mut obj = json!({
            "beta": num(row.beta),
            "phase": phase(row.beta),
            "excess_free_energy": num(row.excess),
            "free_energy": num(row.total),
        });
        if let Some(dp) = row.dp {
            cells.extend([num(dp), num(dp - row.total)]);
            obj["dp_log_ratio"] = num(dp);
            obj["dp_gap"] = num(dp - row.total);
        }
        r.row(cells);
        result.push(obj);
    }
    r.notes.push(format!("beta_c {}", critical_beta()));
    r.result = json!({ "beta_c": critical_beta(), "rows": result });
    let plot = Plot::new("Excess free energy", "β", "f̃(β)")
        .with(Series::line("f̃", rows.iter().map(|r| (r.beta, r.excess)).collect()))
        .with(Series::points("grid", rows.iter().map(|r| (r.beta, r.excess)).collect()))
        .marker(critical_beta(), "β_c");
    Ok(Output { report: r, plot: Some(plot) })
}

pub fn partition(args: &PartitionArgs) -> Result<Output> {
    if args.length == 0 {
        return Err(ConfigError("--length must be positive".into()).into());
    }
    let l = args.length;
    let mut r = Report::new(vec!["beta", "engine", "log_z"]);
    let mut result = Vec::new();
    for &beta in &args.beta_grid.0 {
        let dp = dp_log_z(l, beta)?;
        let mut engines = vec![("stretch_dp", dp)];
        if l <= BRUTE_FORCE_MAX_LENGTH {
            engines.push(("brute_force", brute_force_z(l, beta)?.ln()));
        }
        if beta > 0.0 {
            let p = ModelParams::new(beta)?;
            let walk = p.c_beta.ln() + beta * l as f64 + walk_repr_log_z(l, &p)?;
            engines.push(("walk", walk));
        }
        for (engine, log_z) in &engines {
            r.row(vec![num(beta), json!(engine), num(*log_z)]);
        }
        let worst = engines.iter().map(|(_, v)| (v - dp).abs()).fold(0.0, f64::max);
        r.notes.push(format!("beta {beta} max_log_gap {worst:e}"));
        result.push(json!({
            "beta": num(beta),
            "engines": engines.iter().map(|(e, v)| (e.to_string(), num(*v))).collect::<BTreeMap<_, _>>(),
            "max_log_gap": num(worst),
        }));
    }
    r.result = json!({ "length": l, "cells": result });
    Ok(r.into())
}

/// The ensemble file text, with the run metadata as comment lines after the
/// fixed header.
pub fn sample(args: &SampleArgs, meta: &Meta) -> Result<String> {
    if args.length == 0 || args.count == 0 {
        return Err(ConfigError("--length and --count must be positive".into()).into());
    }
    let ens = match args.sampler {
        SamplerKind::Exact => Ensemble::exact(args.length, &ModelParams::new(args.beta)?, args.count, args.seed)?,
        SamplerKind::Mcmc => {
            if args.thin == 0 {
                return Err(ConfigError("--thin must be positive".into()).into());
            }
            let schedule = McmcParams {
                samples: args.count,
                burn_in: args.burn_in,
                thin: args.thin,
            };
            Ensemble::mcmc(args.length, args.beta, schedule, args.seed)?
        }
    };
    let mut buf = Vec::new();
    ens.write_to(&mut buf)?;
    let text = String::from_utf8(buf).expect("ensemble text is ascii");
    let header_lines = if ens.mcmc.is_some() { 2 } else { 1 };
    let mut out = String::with_capacity(text.len() + 256);
    let mut lines = text.split_inclusive('\n');
    for line in lines.by_ref().take(header_lines) {
        out.push_str(line);
    }
    out.push_str(&meta.comment_lines());
    for line in lines {
        out.push_str(line);
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Ensemble> {
    Ensemble::load(path).with_context(|| format!("cannot read ensemble {}", path.display()))
}

struct Summary {
    ens_beta: f64,
    length: usize,
    kind: SamplerKind,
    count: usize,
    extension: ipdsaw_core::geometry::ExtensionStats,
    beads: ipdsaw_core::geometry::BeadStats,
    pattern_density: ipdsaw_core::stats::MeanEstimate,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Output> {
    let summaries = par_map(&args.inputs, |path| -> Result<Summary> {
        let ens = load(path)?;
        Ok(Summary {
            ens_beta: ens.beta,
            length: ens.length,
            kind: ens.kind,
            count: ens.len(),
            extension: extension_stats(&ens)?,
            beads: bead_stats(&ens, &[0.5, 0.9])?,
            pattern_density: pattern_stats(&ens)?.density,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(vec![
        "file",
        "beta",
        "length",
        "kind",
        "count",
        "mean_extension",
        "extension_stderr",
        "extension_per_sqrt_length",
        "extension_per_length",
        "mean_beads",
        "largest_bead_fraction",
        "pattern_density",
    ]);
    let mut per_file = Vec::new();
    for (path, s) in args.inputs.iter().zip(&summaries) {
        r.row(vec![
            json!(path.display().to_string()),
            num(s.ens_beta),
            json!(s.length),
            json!(s.kind),
            json!(s.count),
            num(s.extension.extension.mean),
            num(s.extension.extension.stderr),
            num(s.extension.per_sqrt_length.mean),
            num(s.extension.per_length.mean),
            num(s.beads.count.mean),
            num(s.beads.largest_fraction.mean),
            num(s.pattern_density.mean),
        ]);
        per_file.push(json!({
            "file": path.display().to_string(),
            "beta": num(s.ens_beta),
            "length": s.length,
            "kind": s.kind,
            "count": s.count,
            "extension": s.extension,
            "beads": s.beads,
            "pattern_density": s.pattern_density,
        }));
    }
    // Fits per β over distinct lengths, in order of first appearance.
    let mut groups: Vec<(f64, Vec<&Summary>)> = Vec::new();
    for s in &summaries {
        match groups.iter_mut().find(|(b, _)| b.to_bits() == s.ens_beta.to_bits()) {
            Some((_, g)) => g.push(s),
            None => groups.push((s.ens_beta, vec![s])),
        }
    }
    let mut fits = Vec::new();
    let mut plot = Plot::new("Extension scaling", "log L", "log mean N");
    for (beta, mut group) in groups {
        group.sort_by_key(|s| s.length);
        group.dedup_by_key(|s| s.length);
        if group.len() < MIN_FIT_LENGTHS {
            r.notes.push(format!("fit beta={beta} skipped: {} distinct lengths, need {MIN_FIT_LENGTHS}", group.len()));
            continue;
        }
        let lengths: Vec<usize> = group.iter().map(|s| s.length).collect();
        let observables: [(&str, Vec<f64>, Vec<f64>); 2] = [
            (
                "extension",
                group.iter().map(|s| s.extension.extension.mean).collect(),
                group.iter().map(|s| s.extension.extension.stderr).collect(),
            ),
            (
                "largest_bead",
                group.iter().map(|s| s.beads.largest_fraction.mean * s.length as f64).collect(),
                group.iter().map(|s| s.beads.largest_fraction.stderr * s.length as f64).collect(),
            ),
        ];
        for (name, means, stderrs) in observables {
            let fit = exponent_fit(name, &lengths, &means, &stderrs)?;
            r.notes.push(format!(
                "fit beta={beta} {name} slope={} half_width={} intercept={}",
                fit.slope, fit.half_width, fit.intercept
            ));
            if name == "extension" {
                let pts: Vec<(f64, f64)> = lengths.iter().zip(&means).map(|(&l, &m)| ((l as f64).ln(), m.ln())).collect();
                let line = pts.iter().map(|&(x, _)| (x, fit.intercept + fit.slope * x)).collect();
                plot = plot
                    .with(Series::points(format!("β = {beta}"), pts))
                    .with(Series::line(format!("slope {:.3}", fit.slope), line));
            }
            fits.push(json!({ "beta": num(beta), "fit": fit }));
        }
    }
    r.result = json!({ "ensembles": per_file, "fits": fits });
    let plot = (!plot.series.is_empty()).then_some(plot);
    Ok(Output { report: r, plot })
}

pub fn profile(args: &ProfileArgs) -> Result<Output> {
    if args.grid == 0 {
        return Err(ConfigError("--grid must be positive".into()).into());
    }
    let ens = load(&args.input)?;
    let collapsed = ens.beta > critical_beta();
    let time_exp = args.time_exp.unwrap_or(if collapsed { 0.5 } else { 1.0 });
    let curve = if collapsed && time_exp == 0.5 && args.space_exp == 0.5 {
        Some(wulff_curve(&ModelParams::new(ens.beta)?, 401)?)
    } else {
        None
    };
    let t_max = match (args.t_max, &curve) {
        (Some(t), _) => t,
        (None, Some(w)) => 1.25 * w.a_beta,
        (None, None) => 1.0,
    };
    let prof = mean_profile(&ens, time_exp, args.space_exp, t_max, args.grid)?;
    let mut columns = vec!["t", "center", "center_stderr", "profile", "profile_stderr"];
    if curve.is_some() {
        columns.push("gamma");
    }
    let mut r = Report::new(columns);
    for k in 0..prof.t.len() {
        let mut cells = vec![
            num(prof.t[k]),
            num(prof.center[k]),
            num(prof.center_stderr[k]),
            num(prof.profile[k]),
            num(prof.profile_stderr[k]),
        ];
        if let Some(w) = &curve {
            cells.push(num(w.gamma_at(prof.t[k])));
        }
        r.row(cells);
    }
    let mut plot = Plot::new(
        format!("Mean rescaled profile, β = {}, L = {}", ens.beta, ens.length),
        "t",
        "profile",
    )
    .with(Series::line("mean |l|", prof.t.iter().copied().zip(prof.profile.iter().copied()).collect()));
    let mut result = json!({ "beta": num(ens.beta), "length": ens.length, "profile": prof });
    if let Some(w) = &curve {
        let sup = prof.t.iter().zip(&prof.profile).map(|(&t, &m)| (m - w.gamma_at(t)).abs()).fold(0.0, f64::max);
        r.notes.push(format!("a_beta {} max_gamma {} sup_distance {sup}", w.a_beta, w.max_gamma()));
        result["a_beta"] = num(w.a_beta);
        result["sup_distance"] = num(sup);
        plot = plot
            .with(Series::line("γ_β", w.s.iter().copied().zip(w.gamma.iter().copied()).collect()))
            .marker(w.a_beta, "a_β");
    }
    r.result = result;
    Ok(Output { report: r, plot: Some(plot) })
}

pub fn wulff(args: &WulffArgs) -> Result<Output> {
    let p = ModelParams::new(args.beta)?;
    if args.beta <= critical_beta() {
        return Err(ConfigError(format!(
            "the limit shape exists only above β_c = {}, got β = {}",
            critical_beta(),
            args.beta
        ))
        .into());
    }
    let w = wulff_curve(&p, args.grid)?;
    let mut r = Report::new(vec!["s", "gamma"]);
    for (s, g) in w.s.iter().zip(&w.gamma) {
        r.row(vec![num(*s), num(*g)]);
    }
    let area: f64 = w.s.windows(2).zip(w.gamma.windows(2)).map(|(s, g)| 0.5 * (s[1] - s[0]) * (g[0] + g[1])).sum();
    r.notes.push(format!(
        "a_beta {} htilde0 {} max_gamma {} star_area {} trapezoid_area {area}",
        w.a_beta,
        w.htilde0,
        w.max_gamma(),
        w.star_area
    ));
    let plot = Plot::new(format!("Limit shape, β = {}", args.beta), "s", "γ_β(s)")
        .with(Series::line("γ_β", w.s.iter().copied().zip(w.gamma.iter().copied()).collect()));
    r.result = json!({ "curve": w, "max_gamma": num(w.max_gamma()), "trapezoid_area": num(area) });
    Ok(Output { report: r, plot: Some(plot) })
}

pub fn ipsaw(args: &IpsawArgs) -> Result<Output> {
    let table = enumerate_family(args.family, args.max_length)?;
    let mut r = Report::new(vec!["length", "beta", "count", "log_z"]);
    for length in 1..=args.max_length {
        for &beta in &args.beta_grid.0 {
            r.row(vec![json!(length), num(beta), json!(table.count(length)), num(table.log_z(length, beta))]);
        }
    }
    let growth = if args.max_length >= 3 {
        let g = growth_estimates(&table, &args.beta_grid.0)?;
        for e in &g {
            r.notes.push(format!("growth beta={} estimate={} spread={}", e.beta, e.estimate, e.spread));
        }
        Some(g)
    } else {
        None
    };
    let log_counts: Vec<(f64, f64)> = (1..=args.max_length).map(|l| (l as f64, (table.count(l) as f64).ln())).collect();
    let plot = Plot::new(format!("{} counts", args.family), "L", "log count")
        .with(Series::points(args.family.name(), log_counts));
    r.result = json!({ "family": args.family, "counts": table.counts(), "histograms": table.histograms, "growth": growth });
    Ok(Output { report: r, plot: Some(plot) })
}
