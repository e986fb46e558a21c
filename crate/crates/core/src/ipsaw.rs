//! Exhaustive enumeration of square-lattice path families with the
//! edge-midpoint self-touching energy.
//!
//! Families, from largest to smallest: self-avoiding (SAW), prudent
//! (PSAW: no step points toward an already visited site), north-east
//! prudent (NE: prudent, and no step whose ray meets the closed quadrant
//! `(-∞, 0]²`) and partially directed (PD: first step right, no left
//! steps). PD paths of length `L` are in bijection with stretch
//! configurations of size `L` (stretch `l_n` follows the `n`-th right step).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StretchConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Up,
    Left,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Right, Direction::Up, Direction::Left, Direction::Down];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Right => (1, 0),
            Direction::Up => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Down => (0, -1),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Right => 'R',
            Direction::Up => 'U',
            Direction::Left => 'L',
            Direction::Down => 'D',
        }
    }
}

/// A nearest-neighbour path from the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePath {
    steps: Vec<Direction>,
}

impl LatticePath {
    pub fn new(steps: Vec<Direction>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[Direction] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `w_0 = (0, 0), ..., w_L`.
    pub fn sites(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut p = (0, 0);
        out.push(p);
        for d in &self.steps {
            let (dx, dy) = d.delta();
            p = (p.0 + dx, p.1 + dy);
            out.push(p);
        }
        out
    }

    /// Step midpoints `w_{i-1} + w_i` in doubled coordinates.
    pub fn midpoints_doubled(&self) -> Vec<(i32, i32)> {
        self.sites().windows(2).map(|w| (w[0].0 + w[1].0, w[0].1 + w[1].1)).collect()
    }

    /// The partially directed path of a stretch configuration: a right
    /// step, then `|l_1|` vertical steps, a right step, and so on.
    pub fn from_stretches(cfg: &StretchConfig) -> Self {
        let mut steps = Vec::with_capacity(cfg.length());
        for &l in cfg.stretches() {
            steps.push(Direction::Right);
            let d = if l >= 0 { Direction::Up } else { Direction::Down };
            steps.extend(std::iter::repeat_n(d, l.unsigned_abs() as usize));
        }
        Self { steps }
    }

    /// Inverse of [`LatticePath::from_stretches`], for PD paths.
    pub fn to_stretches(&self) -> Option<StretchConfig> {
        if self.steps.first() != Some(&Direction::Right) {
            return None;
        }
        let mut stretches = Vec::new();
        for &d in &self.steps {
            match d {
                Direction::Right => stretches.push(0i64),
                Direction::Up => *stretches.last_mut()? += 1,
                Direction::Down => *stretches.last_mut()? -= 1,
                Direction::Left => return None,
            }
        }
        // Mixed signs within a stretch would be an immediate reversal.
        StretchConfig::new(stretches).ok().filter(|c| Self::from_stretches(c) == *self)
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.steps {
            write!(f, "{}", d.letter())?;
        }
        Ok(())
    }
}

impl FromStr for LatticePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'R' => Ok(Direction::Right),
                'U' => Ok(Direction::Up),
                'L' => Ok(Direction::Left),
                'D' => Ok(Direction::Down),
                other => Err(Error::InvalidArgument(format!("unknown step {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(LatticePath::new)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Saw,
    Psaw,
    Ne,
    Pd,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Saw, Family::Psaw, Family::Ne, Family::Pd];

    /// Largest enumerable length.
    pub fn max_length(self) -> usize {
        match self {
            Family::Saw | Family::Psaw => 16,
            Family::Ne | Family::Pd => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Saw => "saw",
            Family::Psaw => "psaw",
            Family::Ne => "ne",
            Family::Pd => "pd",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?} (expected saw, psaw, ne or pd)")))
    }
}

/// Membership flags of one path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySet {
    pub saw: bool,
    pub psaw: bool,
    pub ne: bool,
    pub pd: bool,
}

impl FamilySet {
    pub fn contains(&self, family: Family) -> bool {
        match family {
            Family::Saw => self.saw,
            Family::Psaw => self.psaw,
            Family::Ne => self.ne,
            Family::Pd => self.pd,
        }
    }
}

/// Whether the ray from `p` in direction `d` meets `(-∞, 0]²`.
fn ray_hits_third_quadrant(p: (i32, i32), d: Direction) -> bool {
    let (x, y) = p;
    match d {
        Direction::Left => y <= 0,
        Direction::Down => x <= 0,
        Direction::Right => y <= 0 && x < 0,
        Direction::Up => x <= 0 && y < 0,
    }
}

/// Family membership by direct scans over the visited sites.
pub fn classify(path: &LatticePath) -> FamilySet {
    let sites = path.sites();
    let distinct: HashSet<_> = sites.iter().collect();
    let saw = distinct.len() == sites.len();
    let mut psaw = saw;
    let mut ne = saw;
    if saw {
        for (i, &d) in path.steps().iter().enumerate() {
            let p = sites[i];
            let (dx, dy) = d.delta();
            let toward = sites[..=i].iter().any(|&s| {
                let (rx, ry) = (s.0 - p.0, s.1 - p.1);
                match (dx, dy) {
                    (0, _) => rx == 0 && ry * dy > 0,
                    _ => ry == 0 && rx * dx > 0,
                }
            });
            if toward {
                psaw = false;
                ne = false;
                break;
            }
            if ray_hits_third_quadrant(p, d) {
                ne = false;
            }
        }
    }
    let pd = saw && path.steps().first() == Some(&Direction::Right) && !path.steps().contains(&Direction::Left);
    FamilySet { saw, psaw, ne, pd }
}

/// Non-consecutive step pairs whose midpoints are at distance 1.
pub fn self_touchings(path: &LatticePath) -> Result<u64> {
    if !classify(path).saw {
        return Err(Error::InvalidArgument(format!("path {path} is not self-avoiding")));
    }
    let mids = path.midpoints_doubled();
    let mut count = 0;
    for i in 0..mids.len() {
        for j in i + 2..mids.len() {
            let (dx, dy) = (mids[i].0 - mids[j].0, mids[i].1 - mids[j].1);
            if dx.abs() + dy.abs() == 2 && (dx == 0 || dy == 0) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Touching histograms per length for one family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTable {
    pub family: Family,
    pub max_length: usize,
    /// `histograms[L - 1][h]` paths of length `L` with `h` touchings.
    pub histograms: Vec<Vec<u64>>,
}

impl FamilyTable {
    pub fn count(&self, length: usize) -> u64 {
        self.histograms[length - 1].iter().sum()
    }

    pub fn counts(&self) -> Vec<u64> {
        (1..=self.max_length).map(|l| self.count(l)).collect()
    }

    /// `log Z^{family}_{L,β}`.
    pub fn log_z(&self, length: usize, beta: f64) -> f64 {
        let hist = &self.histograms[length - 1];
        let terms: Vec<f64> = hist
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(h, &n)| (n as f64).ln() + beta * h as f64)
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }

    pub fn z(&self, length: usize, beta: f64) -> f64 {
        self.log_z(length, beta).exp()
    }
}

/// Per-`β` sequences `log(Z_L / Z_{L-1})`, `L = 2..=max_length`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub beta: f64,
    pub log_ratios: Vec<f64>,
    /// Mean of the last two ratios; odd-even oscillations average out.
    pub estimate: f64,
    /// Difference between the last two ratios.
    pub spread: f64,
}

pub fn growth_estimates(table: &FamilyTable, betas: &[f64]) -> Result<Vec<GrowthEstimate>> {
    if table.max_length < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: table.max_length,
        });
    }
    Ok(betas
        .iter()
        .map(|&beta| {
            let log_ratios: Vec<f64> = (2..=table.max_length)
                .map(|l| table.log_z(l, beta) - table.log_z(l - 1, beta))
                .collect();
            let n = log_ratios.len();
            GrowthEstimate {
                beta,
                estimate: 0.5 * (log_ratios[n - 1] + log_ratios[n - 2]),
                spread: (log_ratios[n - 1] - log_ratios[n - 2]).abs(),
                log_ratios,
            }
        })
        .collect())
}

/// Depth-first walker with incremental occupancy, ray bounds and touching
/// counts. Coordinates are shifted by `max_length + 1` to index arrays.
struct Walker {
    family: Family,
    max_length: usize,
    side: usize,
    mid_side: usize,
    pos: (i32, i32),
    visited: Vec<bool>,
    midpoints: Vec<bool>,
    row_min: Vec<i32>,
    row_max: Vec<i32>,
    col_min: Vec<i32>,
    col_max: Vec<i32>,
    steps: Vec<Direction>,
    touchings: Vec<u64>,
    undo: Vec<[i32; 4]>,
    histograms: Vec<Vec<u64>>,
}

const EMPTY_MIN: i32 = i32::MAX;
const EMPTY_MAX: i32 = i32::MIN;

impl Walker {
    fn new(family: Family, max_length: usize) -> Self {
        let side = 2 * max_length + 3;
        let mid_side = 2 * side;
        let mut w = Self {
            family,
            max_length,
            side,
            mid_side,
            pos: (0, 0),
            visited: vec![false; side * side],
            midpoints: vec![false; mid_side * mid_side],
            row_min: vec![EMPTY_MIN; side],
            row_max: vec![EMPTY_MAX; side],
            col_min: vec![EMPTY_MIN; side],
            col_max: vec![EMPTY_MAX; side],
            steps: Vec::with_capacity(max_length),
            touchings: vec![0],
            undo: Vec::with_capacity(max_length),
            histograms: vec![Vec::new(); max_length],
        };
        w.mark_site((0, 0));
        w
    }

    fn shift(&self) -> i32 {
        self.max_length as i32 + 1
    }

    fn site_index(&self, p: (i32, i32)) -> usize {
        let s = self.shift();
        (p.1 + s) as usize * self.side + (p.0 + s) as usize
    }

    fn mid_index(&self, m: (i32, i32)) -> usize {
        let s = 2 * self.shift();
        (m.1 + s) as usize * self.mid_side + (m.0 + s) as usize
    }

    fn mark_site(&mut self, p: (i32, i32)) {
        let i = self.site_index(p);
        self.visited[i] = true;
        let (r, c) = ((p.1 + self.shift()) as usize, (p.0 + self.shift()) as usize);
        self.row_min[r] = self.row_min[r].min(p.0);
        self.row_max[r] = self.row_max[r].max(p.0);
        self.col_min[c] = self.col_min[c].min(p.1);
        self.col_max[c] = self.col_max[c].max(p.1);
    }

    fn allowed(&self, d: Direction) -> bool {
        let (dx, dy) = d.delta();
        let next = (self.pos.0 + dx, self.pos.1 + dy);
        if self.visited[self.site_index(next)] {
            return false;
        }
        let (x, y) = self.pos;
        let prudent = || {
            let (r, c) = ((y + self.shift()) as usize, (x + self.shift()) as usize);
            match d {
                Direction::Right => self.row_max[r] <= x,
                Direction::Left => self.row_min[r] >= x,
                Direction::Up => self.col_max[c] <= y,
                Direction::Down => self.col_min[c] >= y,
            }
        };
        match self.family {
            Family::Saw => true,
            Family::Psaw => prudent(),
            Family::Ne => prudent() && !ray_hits_third_quadrant(self.pos, d),
            Family::Pd => d != Direction::Left && (!self.steps.is_empty() || d == Direction::Right),
        }
    }

    fn push(&mut self, d: Direction) {
        let (dx, dy) = d.delta();
        let next = (self.pos.0 + dx, self.pos.1 + dy);
        let (r, c) = ((next.1 + self.shift()) as usize, (next.0 + self.shift()) as usize);
        self.undo.push([self.row_min[r], self.row_max[r], self.col_min[c], self.col_max[c]]);
        let mid = (self.pos.0 + next.0, self.pos.1 + next.1);
        let mut gained = 0u64;
        for (ox, oy) in [(2, 0), (-2, 0), (0, 2), (0, -2)] {
            if self.midpoints[self.mid_index((mid.0 + ox, mid.1 + oy))] {
                gained += 1;
            }
        }
        // The previous midpoint sits at distance 1 exactly when it was a
        // step in the same direction; consecutive pairs do not count.
        if self.steps.last() == Some(&d) {
            gained -= 1;
        }
        let mi = self.mid_index(mid);
        self.midpoints[mi] = true;
        self.mark_site(next);
        self.pos = next;
        self.steps.push(d);
        let t = self.touchings.last().copied().unwrap_or(0) + gained;
        self.touchings.push(t);
    }

    fn pop(&mut self) {
        let d = self.steps.pop().expect("pop on empty walk");
        self.touchings.pop();
        let (dx, dy) = d.delta();
        let prev = (self.pos.0 - dx, self.pos.1 - dy);
        let i = self.site_index(self.pos);
        self.visited[i] = false;
        let mi = self.mid_index((self.pos.0 + prev.0, self.pos.1 + prev.1));
        self.midpoints[mi] = false;
        let (r, c) = ((self.pos.1 + self.shift()) as usize, (self.pos.0 + self.shift()) as usize);
        let [a, b, e, f] = self.undo.pop().expect("undo stack");
        self.row_min[r] = a;
        self.row_max[r] = b;
        self.col_min[c] = e;
        self.col_max[c] = f;
        self.pos = prev;
    }

    fn record(&mut self) {
        let depth = self.steps.len();
        let t = *self.touchings.last().expect("nonempty") as usize;
        let hist = &mut self.histograms[depth - 1];
        if hist.len() <= t {
            hist.resize(t + 1, 0);
        }
        hist[t] += 1;
    }

    fn dfs(&mut self, record_from: usize) {
        if self.steps.len() >= record_from {
            self.record();
        }
        if self.steps.len() == self.max_length {
            return;
        }
        for d in Direction::ALL {
            if self.allowed(d) {
                self.push(d);
                self.dfs(record_from);
                self.pop();
            }
        }
    }
}

fn merge_histograms(into: &mut [Vec<u64>], from: &[Vec<u64>]) {
    for (a, b) in into.iter_mut().zip(from) {
        if a.len() < b.len() {
            a.resize(b.len(), 0);
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
}

/// Prefixes of length `min(2, max_length)` admitted by the family.
fn prefixes(family: Family, max_length: usize) -> (Vec<Vec<Direction>>, Vec<Vec<u64>>) {
    let depth = max_length.min(2);
    let mut w = Walker::new(family, max_length);
    let mut out = Vec::new();
    fn rec(w: &mut Walker, depth: usize, out: &mut Vec<Vec<Direction>>) {
        if !w.steps.is_empty() {
            w.record();
        }
        if w.steps.len() == depth {
            out.push(w.steps.clone());
            return;
        }
        for d in Direction::ALL {
            if w.allowed(d) {
                w.push(d);
                rec(w, depth, out);
                w.pop();
            }
        }
    }
    rec(&mut w, depth, &mut out);
    (out, w.histograms)
}

/// Enumerates every path of the family up to `max_length`, recording touching
/// histograms. Work is split by two-step prefixes over `threads` workers;
/// the result does not depend on the split.
pub fn enumerate_family_with_threads(family: Family, max_length: usize, threads: usize) -> Result<FamilyTable> {
    if max_length == 0 {
        return Err(Error::InvalidArgument("length must be positive".into()));
    }
    if max_length > family.max_length() {
        return Err(Error::BudgetExceeded {
            what: "lattice path enumeration",
            requested: max_length,
            limit: family.max_length(),
        });
    }
    let (prefixes, mut histograms) = prefixes(family, max_length);
    if max_length > 2 {
        let threads = threads.max(1).min(prefixes.len().max(1));
        let chunks: Vec<Vec<Vec<Direction>>> = (0..threads)
            .map(|t| prefixes.iter().skip(t).step_by(threads).cloned().collect())
            .collect();
        let results: Vec<Vec<Vec<u64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        let mut w = Walker::new(family, max_length);
                        for prefix in chunk {
                            for &d in prefix {
                                w.push(d);
                            }
                            w.dfs(3);
                            for _ in prefix {
                                w.pop();
                            }
                        }
                        w.histograms
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("enumeration worker panicked")).collect()
        });
        for r in &results {
            merge_histograms(&mut histograms, r);
        }
    }
    for h in histograms.iter_mut() {
        while h.len() > 1 && h.last() == Some(&0) {
            h.pop();
        }
    }
    Ok(FamilyTable {
        family,
        max_length,
        histograms,
    })
}

pub fn enumerate_family(family: Family, max_length: usize) -> Result<FamilyTable> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    enumerate_family_with_threads(family, max_length, threads)
}
