//! Gibbs sampling of configurations: exact sampling through the walk
//! representation and a Metropolis chain on stretch vectors.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{from_walk, hamiltonian, StretchConfig};
use crate::partition::{walk_repr, WalkTable};
use crate::stats::CompensatedSum;
use crate::walk::{ModelParams, WalkPath};

/// Largest `L` for the exact sampler.
pub const EXACT_SAMPLER_MAX_LENGTH: usize = crate::partition::WALK_TABLE_MAX_LENGTH;

/// `P_{L,β}(N_l = k)` for `k = 1..=L` (index `k - 1`).
pub fn extension_law(length: usize, params: &ModelParams) -> Result<Vec<f64>> {
    let repr = walk_repr(length, params)?;
    Ok(repr
        .log_extension_weights
        .iter()
        .map(|w| (w - repr.log_excess).exp())
        .collect())
}

/// Exact sampler. Walks are drawn backwards from the pinned endpoint: the
/// last value with weight `A(|v|, L) P(v → 0)`, then each predecessor `u`
/// at `c' = c - 1 - |v|` with weight `A(|u|, c') P(u → v)`, where `A` sums
/// the walk weights over the step index. This draws `N` and the trajectory
/// jointly with the Gibbs law.
#[derive(Clone, Debug)]
pub struct ExactSampler {
    table: WalkTable,
    /// `q^k` for `k = 0..=2L`; underflows to zero far out.
    q_pow: Vec<f64>,
    weights: Vec<f64>,
}

impl ExactSampler {
    pub fn new(length: usize, params: &ModelParams) -> Result<Self> {
        let table = WalkTable::build(length, params)?;
        let q_pow = (0..=2 * length).map(|k| params.q.powi(k as i32)).collect();
        Ok(Self {
            table,
            q_pow,
            weights: Vec::with_capacity(2 * length + 1),
        })
    }

    pub fn length(&self) -> usize {
        self.table.length()
    }

    pub fn params(&self) -> &ModelParams {
        self.table.params()
    }

    /// `log Z̃_{L,β}` from the sampler's table.
    pub fn log_excess(&self) -> f64 {
        self.table.log_excess()
    }

    /// Draws `u ∈ [-s, s]` with weight `column[|u|] q^{|target - u|}`.
    fn draw_value<R: Rng + ?Sized>(&mut self, consumed: usize, target: i64, rng: &mut R) -> i64 {
        let column = self.table.column(consumed);
        let support = column.len() as i64 - 1;
        debug_assert!(support >= 0, "empty column {consumed}");
        self.weights.clear();
        let mut total = CompensatedSum::default();
        for u in -support..=support {
            let w = column[u.unsigned_abs() as usize] * self.q_pow[(target - u).unsigned_abs() as usize];
            self.weights.push(w);
            total.add(w);
        }
        let threshold = rng.gen::<f64>() * total.value();
        let mut acc = CompensatedSum::default();
        let mut last_positive = 0usize;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                last_positive = i;
                acc.add(w);
                if acc.value() > threshold {
                    return i as i64 - support;
                }
            }
        }
        // Rounding left the threshold above the accumulated mass.
        last_positive as i64 - support
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StretchConfig {
        let length = self.length();
        let mut reversed = Vec::new();
        let mut consumed = length;
        let mut v = self.draw_value(consumed, 0, rng);
        loop {
            reversed.push(v);
            let prev = consumed - 1 - v.unsigned_abs() as usize;
            if prev == 0 {
                break;
            }
            v = self.draw_value(prev, v, rng);
            consumed = prev;
        }
        let mut values = Vec::with_capacity(reversed.len() + 2);
        values.push(0);
        values.extend(reversed.iter().rev());
        values.push(0);
        from_walk(&WalkPath::new(values)).expect("sampled walk is pinned with the right area")
    }
}

/// One exact draw; builds the sampler table each call.
pub fn sample_exact<R: Rng + ?Sized>(length: usize, params: &ModelParams, rng: &mut R) -> Result<StretchConfig> {
    Ok(ExactSampler::new(length, params)?.sample(rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Mcmc,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Exact => "exact",
            SamplerKind::Mcmc => "mcmc",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerKind::Exact),
            "mcmc" => Ok(SamplerKind::Mcmc),
            other => Err(Error::InvalidArgument(format!("unknown sampler kind {other:?}"))),
        }
    }
}

/// Chain schedule. Both `burn_in` and `thin` count proposals; `samples`
/// configurations are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcParams {
    pub samples: usize,
    pub burn_in: u64,
    pub thin: u64,
}

/// A set of sampled configurations with the information to regenerate it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub beta: f64,
    pub length: usize,
    pub seed: u64,
    pub kind: SamplerKind,
    pub mcmc: Option<McmcParams>,
    pub configs: Vec<StretchConfig>,
}

impl Ensemble {
    /// `count` exact draws from a ChaCha8 stream seeded with `seed`.
    pub fn exact(length: usize, params: &ModelParams, count: usize, seed: u64) -> Result<Self> {
        let mut sampler = ExactSampler::new(length, params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let configs = (0..count).map(|_| sampler.sample(&mut rng)).collect();
        Ok(Self {
            beta: params.beta,
            length,
            seed,
            kind: SamplerKind::Exact,
            mcmc: None,
            configs,
        })
    }

    /// A Metropolis run from the all-zero configuration.
    pub fn mcmc(length: usize, beta: f64, schedule: McmcParams, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let configs = sample_mcmc(length, beta, &mut rng, schedule)?;
        Ok(Self {
            beta,
            length,
            seed,
            kind: SamplerKind::Mcmc,
            mcmc: Some(schedule),
            configs,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# ipdsaw v1 beta={} L={} seed={} kind={}",
            self.beta, self.length, self.seed, self.kind
        )?;
        if let Some(m) = &self.mcmc {
            writeln!(out, "# mcmc samples={} burn_in={} thin={}", m.samples, m.burn_in, m.thin)?;
        }
        for cfg in &self.configs {
            write!(out, "{}", cfg.extension())?;
            for l in cfg.stretches() {
                write!(out, " {l}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header = header?;
        let fields = parse_header(&header, "# ipdsaw v1 ", &["beta", "L", "seed", "kind"], 1)?;
        let beta: f64 = parse_field(&fields[0], 1)?;
        let length: usize = parse_field(&fields[1], 1)?;
        let seed: u64 = parse_field(&fields[2], 1)?;
        let kind: SamplerKind = fields[3].parse().map_err(|e: Error| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut mcmc = None;
        let mut configs = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with("# mcmc ") {
                let f = parse_header(trimmed, "# mcmc ", &["samples", "burn_in", "thin"], line_no)?;
                mcmc = Some(McmcParams {
                    samples: parse_field(&f[0], line_no)?,
                    burn_in: parse_field(&f[1], line_no)?,
                    thin: parse_field(&f[2], line_no)?,
                });
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let nums: Vec<i64> = trimmed
                .split_whitespace()
                .map(|t| parse_field(t, line_no))
                .collect::<Result<_>>()?;
            let (&n, stretches) = nums.split_first().expect("nonempty line");
            if n < 0 || n as usize != stretches.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("declared {n} stretches, found {}", stretches.len()),
                });
            }
            let cfg = StretchConfig::with_length(stretches.to_vec(), length).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            configs.push(cfg);
        }
        Ok(Self {
            beta,
            length,
            seed,
            kind,
            mcmc,
            configs,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn parse_header(line: &str, prefix: &str, keys: &[&str], line_no: usize) -> Result<Vec<String>> {
    let rest = line.strip_prefix(prefix).ok_or_else(|| Error::Parse {
        line: line_no,
        message: format!("expected a line starting with {prefix:?}"),
    })?;
    let mut values = vec![None; keys.len()];
    for token in rest.split_whitespace() {
        let (k, v) = token.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("malformed field {token:?}"),
        })?;
        if let Some(pos) = keys.iter().position(|key| *key == k) {
            values[pos] = Some(v.to_string());
        }
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| {
            v.ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("missing field {k}"),
            })
        })
        .collect()
}

fn parse_field<T: FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {s:?}"),
    })
}

/// Metropolis proposals. Structural moves index into `[0, L)` so their
/// proposal probability does not depend on the current extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposal {
    /// Move one unit of magnitude between stretches `i` and `j`
    /// (`l_i += di`, `l_j += dj`, total magnitude unchanged).
    Transfer { i: usize, j: usize, di: i64, dj: i64 },
    /// `l_i → -l_i`.
    Flip { i: usize },
    /// Remove the zero stretch at `i`, then grow `|l_j|` by one in the
    /// reduced vector (`l_j += d`).
    Merge { i: usize, j: usize, d: i64 },
    /// Shrink `|l_j|` by one (`l_j += d`), then insert a zero stretch at
    /// position `i`.
    Split { j: usize, d: i64, i: usize },
}

impl Proposal {
    /// The proposed stretch vector, or `None` for an inadmissible draw.
    pub fn apply(&self, state: &[i64], length: usize) -> Option<Vec<i64>> {
        let n = state.len();
        match *self {
            Proposal::Transfer { i, j, di, dj } => {
                if i == j || i >= n || j >= n {
                    return None;
                }
                let (a, b) = (state[i] + di, state[j] + dj);
                if a.abs() + b.abs() != state[i].abs() + state[j].abs() {
                    return None;
                }
                let mut out = state.to_vec();
                out[i] = a;
                out[j] = b;
                Some(out)
            }
            Proposal::Flip { i } => {
                if i >= n || state[i] == 0 {
                    return None;
                }
                let mut out = state.to_vec();
                out[i] = -out[i];
                Some(out)
            }
            Proposal::Merge { i, j, d } => {
                if n < 2 || i >= n || state[i] != 0 || j >= n - 1 {
                    return None;
                }
                let mut out = state.to_vec();
                out.remove(i);
                if (out[j] + d).abs() != out[j].abs() + 1 {
                    return None;
                }
                out[j] += d;
                Some(out)
            }
            Proposal::Split { j, d, i } => {
                if j >= n || (state[j] + d).abs() + 1 != state[j].abs() || i > n || n + 1 > length {
                    return None;
                }
                let mut out = state.to_vec();
                out[j] += d;
                out.insert(i, 0);
                Some(out)
            }
        }
    }

    /// Every proposal from a state with `n` stretches, with its probability.
    pub fn enumerate(n: usize, length: usize) -> Vec<(Proposal, f64)> {
        let mut out = Vec::new();
        let signs = [-1i64, 1];
        let pt = 0.25 / (4.0 * (n * n) as f64);
        for i in 0..n {
            for j in 0..n {
                for di in signs {
                    for dj in signs {
                        out.push((Proposal::Transfer { i, j, di, dj }, pt));
                    }
                }
            }
        }
        for i in 0..n {
            out.push((Proposal::Flip { i }, 0.25 / n as f64));
        }
        let ps = 0.25 / (2.0 * (length * length) as f64);
        for i in 0..length {
            for j in 0..length {
                for d in signs {
                    out.push((Proposal::Merge { i, j, d }, ps));
                    out.push((Proposal::Split { j, d, i }, ps));
                }
            }
        }
        out
    }

    pub fn draw<R: Rng + ?Sized>(n: usize, length: usize, rng: &mut R) -> Proposal {
        let sign = |rng: &mut R| if rng.gen::<bool>() { 1 } else { -1 };
        match rng.gen_range(0..4u8) {
            0 => Proposal::Transfer {
                i: rng.gen_range(0..n),
                j: rng.gen_range(0..n),
                di: sign(rng),
                dj: sign(rng),
            },
            1 => Proposal::Flip { i: rng.gen_range(0..n) },
            2 => Proposal::Merge {
                i: rng.gen_range(0..length),
                j: rng.gen_range(0..length),
                d: sign(rng),
            },
            _ => Proposal::Split {
                j: rng.gen_range(0..length),
                d: sign(rng),
                i: rng.gen_range(0..length),
            },
        }
    }
}

fn energy(stretches: &[i64]) -> u64 {
    stretches.windows(2).map(|w| crate::model::wedge(w[0], w[1])).sum()
}

/// Metropolis chain on `Ω_L` targeting `e^{βH} / Z_{L,β}`.
#[derive(Clone, Debug)]
pub struct McmcChain {
    length: usize,
    beta: f64,
    state: Vec<i64>,
    energy: u64,
    accepted: u64,
    proposed: u64,
}

impl McmcChain {
    /// Starts from the all-zero configuration `(0, ..., 0)`.
    pub fn new(length: usize, beta: f64) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidArgument("the chain needs L >= 2".into()));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite and nonnegative, got {beta}")));
        }
        Ok(Self {
            length,
            beta,
            state: vec![0; length],
            energy: 0,
            accepted: 0,
            proposed: 0,
        })
    }

    pub fn from_config(cfg: &StretchConfig, beta: f64) -> Result<Self> {
        let mut chain = Self::new(cfg.length(), beta)?;
        chain.state = cfg.stretches().to_vec();
        chain.energy = hamiltonian(cfg);
        Ok(chain)
    }

    pub fn state(&self) -> &[i64] {
        &self.state
    }

    pub fn config(&self) -> StretchConfig {
        StretchConfig::from_parts_unchecked(self.state.clone(), self.length)
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }

    /// One proposal; returns whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.proposed += 1;
        let proposal = Proposal::draw(self.state.len(), self.length, rng);
        let Some(candidate) = proposal.apply(&self.state, self.length) else {
            return false;
        };
        let e = energy(&candidate);
        let delta = e as f64 - self.energy as f64;
        if delta >= 0.0 || rng.gen::<f64>() < (self.beta * delta).exp() {
            self.state = candidate;
            self.energy = e;
            self.accepted += 1;
            true
        } else {
            false
        }
    }
}

/// Runs `burn_in` proposals, then keeps one configuration every `thin`
/// proposals until `samples` are collected.
pub fn sample_mcmc<R: Rng + ?Sized>(length: usize, beta: f64, rng: &mut R, schedule: McmcParams) -> Result<Vec<StretchConfig>> {
    if schedule.thin == 0 {
        return Err(Error::InvalidArgument("thin must be at least 1".into()));
    }
    let mut chain = McmcChain::new(length, beta)?;
    for _ in 0..schedule.burn_in {
        chain.step(rng);
    }
    let mut out = Vec::with_capacity(schedule.samples);
    for _ in 0..schedule.samples {
        for _ in 0..schedule.thin {
            chain.step(rng);
        }
        out.push(chain.config());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::all_configs;
    use std::collections::{HashMap, HashSet, VecDeque};

    fn gibbs(length: usize, beta: f64) -> HashMap<Vec<i64>, f64> {
        let configs = all_configs(length);
        let z: f64 = configs.iter().map(|c| (beta * hamiltonian(c) as f64).exp()).sum();
        configs
            .iter()
            .map(|c| (c.stretches().to_vec(), (beta * hamiltonian(c) as f64).exp() / z))
            .collect()
    }

    #[test]
    fn extension_law_small() {
        let p = ModelParams::new(1.0).unwrap();
        let law = extension_law(4, &p).unwrap();
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut by_n = [0.0; 4];
        for (cfg, w) in gibbs(4, 1.0) {
            by_n[cfg.len() - 1] += w;
        }
        for k in 0..4 {
            assert!((law[k] - by_n[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_sampler_conditional_probabilities_are_exact() {
        // Sum over all backward draw sequences of their probabilities: each
        // configuration's total must equal its Gibbs weight.
        let length = 7;
        let beta = 0.8;
        let p = ModelParams::new(beta).unwrap();
        let sampler = ExactSampler::new(length, &p).unwrap();
        let law = gibbs(length, beta);
        let table = &sampler.table;
        let q = p.q;
        for (stretches, prob) in &law {
            let walk = crate::model::to_walk(&StretchConfig::new(stretches.clone()).unwrap());
            let v = walk.values();
            let n = stretches.len();
            // Backward chain probability.
            let mut consumed = length;
            let mut target = 0i64;
            let mut total = 1.0;
            for i in (1..=n).rev() {
                let col = table.column(consumed);
                let s = col.len() as i64 - 1;
                let norm: f64 = (-s..=s).map(|u| col[u.unsigned_abs() as usize] * q.powi((target - u).abs() as i32)).sum();
                total *= table.cell(v[i], consumed) * q.powi((target - v[i]).abs() as i32) / norm;
                target = v[i];
                consumed -= 1 + v[i].unsigned_abs() as usize;
            }
            assert_eq!(consumed, 0);
            assert!((total - prob).abs() < 1e-12, "{stretches:?}: {total} vs {prob}");
        }
    }

    #[test]
    fn exact_sampler_statistics() {
        let length = 6;
        let beta = 1.0;
        let p = ModelParams::new(beta).unwrap();
        let mut sampler = ExactSampler::new(length, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
        let draws = 200_000;
        for _ in 0..draws {
            let cfg = sampler.sample(&mut rng);
            assert_eq!(cfg.length(), length);
            *counts.entry(cfg.stretches().to_vec()).or_default() += 1;
        }
        let law = gibbs(length, beta);
        let tv = crate::stats::total_variation(&counts, &law);
        assert!(tv < 0.01, "{tv}");
    }

    #[test]
    fn exact_sampler_deterministic() {
        let p = ModelParams::new(2.0).unwrap();
        let a = Ensemble::exact(30, &p, 20, 99).unwrap();
        let b = Ensemble::exact(30, &p, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = Ensemble::exact(30, &p, 20, 100).unwrap();
        assert_ne!(a.configs, c.configs);
    }

    #[test]
    fn mean_energy_increases_with_beta() {
        let mut prev = -1.0;
        for &beta in &[0.5, 1.0, 2.0, 5.0] {
            let p = ModelParams::new(beta).unwrap();
            let ens = Ensemble::exact(9, &p, 4000, 3).unwrap();
            let mean = ens.configs.iter().map(|c| hamiltonian(c) as f64).sum::<f64>() / ens.len() as f64;
            assert!(mean > prev, "beta {beta}: {mean} <= {prev}");
            prev = mean;
        }
        // Maximal H at L = 9 is 4.
        assert!(prev > 3.5, "{prev}");
    }

    #[test]
    fn ensemble_round_trip() {
        let p = ModelParams::new(1.5).unwrap();
        let ens = Ensemble::exact(12, &p, 50, 5).unwrap();
        let mut buf = Vec::new();
        ens.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# ipdsaw v1 beta=1.5 L=12 seed=5 kind=exact\n"));
        assert_eq!(Ensemble::read_from(&buf[..]).unwrap(), ens);

        let m = Ensemble::mcmc(
            10,
            0.7,
            McmcParams {
                samples: 30,
                burn_in: 100,
                thin: 3,
            },
            8,
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(Ensemble::read_from(&buf[..]).unwrap(), m);
    }

    #[test]
    fn ensemble_parse_errors() {
        assert!(Ensemble::read_from(&b""[..]).is_err());
        assert!(Ensemble::read_from(&b"# ipdsaw v1 beta=1 L=3 seed=1\n"[..]).is_err());
        let bad_count = b"# ipdsaw v1 beta=1 L=3 seed=1 kind=exact\n2 0\n";
        assert!(matches!(Ensemble::read_from(&bad_count[..]), Err(Error::Parse { line: 2, .. })));
        let bad_length = b"# ipdsaw v1 beta=1 L=3 seed=1 kind=exact\n1 0\n";
        assert!(Ensemble::read_from(&bad_length[..]).is_err());
    }

    #[test]
    fn proposals_conserve_length() {
        let length = 7;
        for cfg in all_configs(length) {
            for (prop, _) in Proposal::enumerate(cfg.extension(), length) {
                if let Some(next) = prop.apply(cfg.stretches(), length) {
                    assert!(StretchConfig::with_length(next, length).is_ok(), "{prop:?} from {cfg}");
                }
            }
        }
    }

    /// Full transition kernel over `Ω_L`.
    fn kernel(length: usize, beta: f64) -> HashMap<(Vec<i64>, Vec<i64>), f64> {
        let mut k: HashMap<(Vec<i64>, Vec<i64>), f64> = HashMap::new();
        for cfg in all_configs(length) {
            let x = cfg.stretches().to_vec();
            let ex = energy(&x) as f64;
            let props = Proposal::enumerate(x.len(), length);
            let total: f64 = props.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (prop, p) in props {
                if let Some(y) = prop.apply(&x, length) {
                    let acc = (beta * (energy(&y) as f64 - ex)).exp().min(1.0);
                    *k.entry((x.clone(), y)).or_default() += p * acc;
                }
            }
        }
        k
    }

    #[test]
    fn detailed_balance() {
        for &beta in &[0.0, 0.5, 2.0] {
            let length = 7;
            let law = gibbs(length, beta);
            let k = kernel(length, beta);
            for ((x, y), &pxy) in &k {
                if x == y {
                    continue;
                }
                let pyx = k.get(&(y.clone(), x.clone())).copied().unwrap_or(0.0);
                assert!((law[x] * pxy - law[y] * pyx).abs() < 1e-15, "{x:?} -> {y:?}");
            }
        }
    }

    #[test]
    fn chain_is_irreducible() {
        for length in 2..=8 {
            let k = kernel(length, 0.0);
            let mut adj: HashMap<Vec<i64>, Vec<Vec<i64>>> = HashMap::new();
            for (x, y) in k.keys() {
                adj.entry(x.clone()).or_default().push(y.clone());
            }
            let start = vec![0i64; length];
            let mut seen = HashSet::from([start.clone()]);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for y in adj.get(&x).into_iter().flatten() {
                    if seen.insert(y.clone()) {
                        queue.push_back(y.clone());
                    }
                }
            }
            assert_eq!(seen.len(), all_configs(length).len(), "L={length}");
            // And back: every state reaches the all-zero configuration.
            let mut radj: HashMap<Vec<i64>, Vec<Vec<i64>>> = HashMap::new();
            for (x, y) in k.keys() {
                radj.entry(y.clone()).or_default().push(x.clone());
            }
            let target = vec![0i64; length];
            let mut seen = HashSet::from([target.clone()]);
            let mut queue = VecDeque::from([target]);
            while let Some(x) = queue.pop_front() {
                for y in radj.get(&x).into_iter().flatten() {
                    if seen.insert(y.clone()) {
                        queue.push_back(y.clone());
                    }
                }
            }
            assert_eq!(seen.len(), all_configs(length).len());
        }
    }

    #[test]
    fn mcmc_small_law() {
        let length = 6;
        let beta = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let kept = sample_mcmc(
            length,
            beta,
            &mut rng,
            McmcParams {
                samples: 200_000,
                burn_in: 1000,
                thin: 4,
            },
        )
        .unwrap();
        let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
        for c in &kept {
            *counts.entry(c.stretches().to_vec()).or_default() += 1;
        }
        let tv = crate::stats::total_variation(&counts, &gibbs(length, beta));
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn mcmc_rejects_bad_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = McmcParams {
            samples: 1,
            burn_in: 0,
            thin: 0,
        };
        assert!(sample_mcmc(5, 1.0, &mut rng, s).is_err());
        assert!(McmcChain::new(1, 1.0).is_err());
        assert!(McmcChain::new(4, -1.0).is_err());
    }
}
