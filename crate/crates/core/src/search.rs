//! Factorized distribution families and searches over them.
//!
//! A [`FactorizedDist`] is a product of conditional tables and deterministic
//! nodes over named axes. Every pattern fixes which factors are free (searched)
//! and which are part of the model (channel, state law, source).
//!
//! Searches evaluate candidate distributions independently. Their polytope
//! vertices are merged through [`crate::geometry::hull_with`], which sorts
//! candidates before deduplication, so the merge does not depend on the
//! order in which candidates were produced.

use crate::geometry::{hull_with, Frontier, RatePoint};
use crate::info::{advance, Axis, DeterministicMap, InfoError, JointPmf, MAX_CELLS};
use crate::regions::{
    bounds_to_polytope, eval_theorem1, eval_theorem2, eval_theorem4, eval_theorem5, Causality, CribCase,
    LinkCapacities, RegionBounds, RegionError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest number of grid points an enumeration may project.
pub const GRID_CAP: u128 = 100_000_000;
const ROW_TOL: f64 = 1e-12;
const CHUNK: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("inconsistent shapes: {0}")]
    InconsistentShapes(String),
    #[error("enumeration would visit {0} distributions, above the cap")]
    CapExceeded(u128),
    #[error("pattern {0:?} has no frontier evaluator")]
    UnsupportedPattern(Pattern),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub type Result<T> = std::result::Result<T, SearchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Thm1A,
    Thm1B,
    Thm2,
    Thm3,
    Thm4sc,
    Thm4c,
    Thm5sc,
    Thm5c,
}

/// A conditional table `P(children | parents)`: one row per parent
/// configuration, each row over the child configurations (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub children: Vec<String>,
    pub parents: Vec<String>,
    pub table: Vec<f64>,
    pub free: bool,
}

/// `child = map(parents)` with the parent configuration in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetNode {
    pub child: String,
    pub parents: Vec<String>,
    pub map: DeterministicMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedDist {
    pub pattern: Pattern,
    pub axes: Vec<Axis>,
    pub factors: Vec<Factor>,
    pub det: Vec<DetNode>,
}

/// A memoryless channel `P(y | inputs)` with inputs ordered (X1, X2[, S]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub input_sizes: Vec<usize>,
    pub output_size: usize,
    pub table: Vec<f64>,
}

impl Channel {
    pub fn new(input_sizes: Vec<usize>, output_size: usize, table: Vec<f64>) -> Result<Self> {
        let c = Channel { input_sizes, output_size, table };
        c.validate()?;
        Ok(c)
    }

    /// Builds a deterministic channel from a function of the inputs.
    pub fn deterministic(input_sizes: Vec<usize>, output_size: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        Self::from_fn(input_sizes, output_size, |x, y| if f(x) == y { 1.0 } else { 0.0 })
    }

    pub fn from_fn(input_sizes: Vec<usize>, output_size: usize, f: impl Fn(&[usize], usize) -> f64) -> Result<Self> {
        let rows: usize = input_sizes.iter().product();
        let mut idx = vec![0; input_sizes.len()];
        let mut table = Vec::with_capacity(rows * output_size);
        for _ in 0..rows {
            for y in 0..output_size {
                table.push(f(&idx, y));
            }
            advance(&mut idx, &input_sizes);
        }
        Self::new(input_sizes, output_size, table)
    }

    pub fn validate(&self) -> Result<()> {
        let rows: usize = self.input_sizes.iter().product();
        if self.output_size == 0 || rows == 0 || self.table.len() != rows * self.output_size {
            return Err(SearchError::InconsistentShapes("channel table".into()));
        }
        check_rows(&self.table, self.output_size, "channel")
    }
}

fn check_rows(table: &[f64], width: usize, what: &str) -> Result<()> {
    for row in table.chunks(width) {
        let s: f64 = row.iter().sum();
        if row.iter().any(|&v| !(v >= -1e-15)) || (s - 1.0).abs() > ROW_TOL {
            return Err(SearchError::InconsistentShapes(format!("{what} row does not sum to 1")));
        }
    }
    Ok(())
}

/// Model ingredients that the search never varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    /// `P(y | x1, x2[, s])`. Unused for the source-coding pattern.
    pub channel: Option<Channel>,
    /// Cribbing map of encoder 2 on X1 (or on X̂1 for source coding).
    pub crib1: Option<DeterministicMap>,
    /// Cribbing map of encoder 1 on X2 (two-sided patterns only).
    pub crib2: Option<DeterministicMap>,
    /// `P(s)` for one state row, or `P(s | a)` with one row per action.
    pub state: Option<Vec<Vec<f64>>>,
    /// Source law `P(x)` for the source-coding pattern.
    pub source: Option<Vec<f64>>,
    /// Reconstruction map `x̂2 = h(u, z)` for the source-coding pattern.
    pub reconstruction: Option<DeterministicMap>,
    /// Alphabet of X̂1 for the source-coding pattern.
    pub xh1_size: Option<usize>,
}

impl Problem {
    pub fn mac(channel: Channel, crib1: DeterministicMap, crib2: Option<DeterministicMap>) -> Self {
        Problem {
            channel: Some(channel),
            crib1: Some(crib1),
            crib2,
            state: None,
            source: None,
            reconstruction: None,
            xh1_size: None,
        }
    }

    pub fn with_state(mut self, state: Vec<Vec<f64>>) -> Self {
        self.state = Some(state);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Alphabet sizes of auxiliaries by name (U, V, W).
    pub aux_cardinalities: BTreeMap<String, usize>,
    pub grid_steps: usize,
    pub use_grid: bool,
    pub random_samples: usize,
    pub refine_iters: usize,
    pub seed: u64,
    /// Replace the coupled factor P(u, x2 | s, v, a, w) by
    /// P(u | s, v, a, w) P(x2 | s, v, a, w). No claim that this is lossless.
    pub split_coupled_factor: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            aux_cardinalities: BTreeMap::new(),
            grid_steps: 8,
            use_grid: true,
            random_samples: 0,
            refine_iters: 0,
            seed: 0,
            split_coupled_factor: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_steps == 0 {
            return Err(SearchError::InvalidConfig("grid_steps must be at least 1".into()));
        }
        if !self.use_grid && self.random_samples == 0 {
            return Err(SearchError::InvalidConfig("neither grid nor random mode is active".into()));
        }
        if self.aux_cardinalities.values().any(|&k| k == 0) {
            return Err(SearchError::InvalidConfig("auxiliary cardinality 0".into()));
        }
        Ok(())
    }

    pub fn card(&self, name: &str) -> usize {
        self.aux_cardinalities.get(name).copied().unwrap_or(2)
    }

    pub fn with_card(mut self, name: &str, k: usize) -> Self {
        self.aux_cardinalities.insert(name.to_string(), k);
        self
    }
}

fn free(children: &[&str], parents: &[&str]) -> Factor {
    Factor { children: names(children), parents: names(parents), table: Vec::new(), free: true }
}

fn fixed(children: &[&str], parents: &[&str], table: Vec<f64>) -> Factor {
    Factor { children: names(children), parents: names(parents), table, free: false }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone().ok_or_else(|| SearchError::InvalidConfig(format!("problem lacks {what}")))
}

impl FactorizedDist {
    /// The family member of `pattern` with every free row uniform.
    pub fn template(pattern: Pattern, problem: &Problem, cfg: &SearchConfig) -> Result<Self> {
        use Pattern::*;
        let mut det = Vec::new();
        let mut factors = Vec::new();
        let axes: Vec<Axis>;
        let channel = || -> Result<Channel> {
            let c = need(&problem.channel, "a channel")?;
            c.validate()?;
            Ok(c)
        };
        match pattern {
            Thm1A | Thm1B => {
                let ch = channel()?;
                if ch.input_sizes.len() != 2 {
                    return Err(SearchError::InconsistentShapes("channel needs inputs (X1, X2)".into()));
                }
                let g1 = need(&problem.crib1, "crib1")?;
                let g2 = problem.crib2.clone().unwrap_or_else(|| DeterministicMap::constant(ch.input_sizes[1]));
                axes = vec![
                    Axis::new("U", cfg.card("U")),
                    Axis::new("X1", ch.input_sizes[0]),
                    Axis::new("Z1", g1.codomain_size()),
                    Axis::new("X2", ch.input_sizes[1]),
                    Axis::new("Z2", g2.codomain_size()),
                    Axis::new("Y", ch.output_size),
                ];
                factors.push(free(&["U"], &[]));
                factors.push(free(&["X1"], &["U"]));
                factors.push(if pattern == Thm1A { free(&["X2"], &["U"]) } else { free(&["X2"], &["U", "Z1"]) });
                factors.push(fixed(&["Y"], &["X1", "X2"], ch.table));
                det.push(DetNode { child: "Z1".into(), parents: names(&["X1"]), map: g1 });
                det.push(DetNode { child: "Z2".into(), parents: names(&["X2"]), map: g2 });
            }
            Thm2 => {
                let ch = channel()?;
                if ch.input_sizes.len() != 2 {
                    return Err(SearchError::InconsistentShapes("channel needs inputs (X1, X2)".into()));
                }
                let f = need(&problem.crib1, "crib1")?;
                axes = vec![
                    Axis::new("U", cfg.card("U")),
                    Axis::new("X1", ch.input_sizes[0]),
                    Axis::new("Z", f.codomain_size()),
                    Axis::new("X2", ch.input_sizes[1]),
                    Axis::new("Y", ch.output_size),
                ];
                factors.push(free(&["U"], &[]));
                factors.push(free(&["X1"], &["U"]));
                factors.push(free(&["X2"], &["U", "Z"]));
                factors.push(fixed(&["Y"], &["X1", "X2"], ch.table));
                det.push(DetNode { child: "Z".into(), parents: names(&["X1"]), map: f });
            }
            Thm3 => {
                let src = need(&problem.source, "a source law")?;
                let f = need(&problem.crib1, "crib1")?;
                let h = need(&problem.reconstruction, "a reconstruction map")?;
                let xh1 = problem.xh1_size.unwrap_or(src.len());
                let u = cfg.card("U");
                if h.domain_size() != u * f.codomain_size() {
                    return Err(SearchError::InconsistentShapes("reconstruction map domain must be |U|*|Z|".into()));
                }
                axes = vec![
                    Axis::new("X", src.len()),
                    Axis::new("U", u),
                    Axis::new("Xh1", xh1),
                    Axis::new("Z", f.codomain_size()),
                    Axis::new("Xh2", h.codomain_size()),
                ];
                factors.push(fixed(&["X"], &[], src));
                factors.push(free(&["U"], &["X"]));
                factors.push(free(&["Xh1"], &["X", "U"]));
                det.push(DetNode { child: "Z".into(), parents: names(&["Xh1"]), map: f });
                det.push(DetNode { child: "Xh2".into(), parents: names(&["U", "Z"]), map: h });
            }
            Thm4sc | Thm4c => {
                let ch = channel()?;
                if ch.input_sizes.len() != 3 {
                    return Err(SearchError::InconsistentShapes("channel needs inputs (X1, X2, S)".into()));
                }
                let f = need(&problem.crib1, "crib1")?;
                let ps = need(&problem.state, "a state law")?;
                if ps.len() != 1 || ps[0].len() != ch.input_sizes[2] {
                    return Err(SearchError::InconsistentShapes("state law must be one row over S".into()));
                }
                axes = vec![
                    Axis::new("S", ch.input_sizes[2]),
                    Axis::new("U", cfg.card("U")),
                    Axis::new("X1", ch.input_sizes[0]),
                    Axis::new("Z", f.codomain_size()),
                    Axis::new("X2", ch.input_sizes[1]),
                    Axis::new("Y", ch.output_size),
                ];
                factors.push(fixed(&["S"], &[], ps[0].clone()));
                factors.push(free(&["U"], &["S"]));
                factors.push(free(&["X1"], &["U"]));
                factors.push(if pattern == Thm4sc {
                    free(&["X2"], &["S", "U"])
                } else {
                    free(&["X2"], &["S", "U", "Z"])
                });
                factors.push(fixed(&["Y"], &["X1", "X2", "S"], ch.table));
                det.push(DetNode { child: "Z".into(), parents: names(&["X1"]), map: f });
            }
            Thm5sc | Thm5c => {
                let ch = channel()?;
                if ch.input_sizes.len() != 3 {
                    return Err(SearchError::InconsistentShapes("channel needs inputs (X1, X2, S)".into()));
                }
                let psa = need(&problem.state, "an action-to-state law")?;
                if psa.is_empty() || psa.iter().any(|r| r.len() != ch.input_sizes[2]) {
                    return Err(SearchError::InconsistentShapes("state law rows must be over S".into()));
                }
                if let Some(&a) = cfg.aux_cardinalities.get("A") {
                    if a != psa.len() {
                        return Err(SearchError::InconsistentShapes("|A| differs from the state law rows".into()));
                    }
                }
                axes = vec![
                    Axis::new("W", cfg.card("W")),
                    Axis::new("V", cfg.card("V")),
                    Axis::new("A", psa.len()),
                    Axis::new("S", ch.input_sizes[2]),
                    Axis::new("X1", ch.input_sizes[0]),
                    Axis::new("U", cfg.card("U")),
                    Axis::new("X2", ch.input_sizes[1]),
                    Axis::new("Y", ch.output_size),
                ];
                factors.push(free(&["W"], &[]));
                factors.push(free(&["V"], &["W"]));
                factors.push(free(&["A"], &["W"]));
                factors.push(fixed(&["S"], &["A"], psa.concat()));
                factors.push(free(&["X1"], &["V", "W"]));
                if pattern == Thm5c {
                    factors.push(free(&["U"], &["S", "V", "A", "W"]));
                    factors.push(free(&["X2"], &["V", "U", "S", "A", "W", "X1"]));
                } else if cfg.split_coupled_factor {
                    factors.push(free(&["U"], &["S", "V", "A", "W"]));
                    factors.push(free(&["X2"], &["S", "V", "A", "W"]));
                } else {
                    factors.push(free(&["U", "X2"], &["S", "V", "A", "W"]));
                }
                factors.push(fixed(&["Y"], &["X1", "X2", "S"], ch.table));
            }
        }
        let mut fd = FactorizedDist { pattern, axes, factors, det };
        let shapes = fd.shapes()?;
        for (f, (rows, width)) in fd.factors.iter_mut().zip(shapes) {
            if f.free {
                f.table = vec![1.0 / width as f64; rows * width];
            }
        }
        fd.validate()?;
        Ok(fd)
    }

    fn size_of(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.size)
            .ok_or_else(|| SearchError::InconsistentShapes(format!("unknown axis `{name}`")))
    }

    fn group_size(&self, group: &[String]) -> Result<usize> {
        group.iter().try_fold(1usize, |acc, n| Ok(acc * self.size_of(n)?))
    }

    /// (rows, row width) for every factor.
    pub fn shapes(&self) -> Result<Vec<(usize, usize)>> {
        self.factors.iter().map(|f| Ok((self.group_size(&f.parents)?, self.group_size(&f.children)?))).collect()
    }

    /// Checks that every axis is produced exactly once and every row is a pmf.
    pub fn validate(&self) -> Result<()> {
        let mut produced: Vec<&str> = Vec::new();
        for f in &self.factors {
            produced.extend(f.children.iter().map(|s| s.as_str()));
        }
        produced.extend(self.det.iter().map(|d| d.child.as_str()));
        for a in &self.axes {
            let n = produced.iter().filter(|&&p| p == a.name).count();
            if n != 1 {
                return Err(SearchError::InconsistentShapes(format!("axis `{}` produced {n} times", a.name)));
            }
        }
        if produced.len() != self.axes.len() {
            return Err(SearchError::InconsistentShapes("factor child not among the axes".into()));
        }
        for (f, (rows, width)) in self.factors.iter().zip(self.shapes()?) {
            if f.table.len() != rows * width {
                return Err(SearchError::InconsistentShapes(format!(
                    "factor over {:?} has {} entries, expected {}",
                    f.children,
                    f.table.len(),
                    rows * width
                )));
            }
            check_rows(&f.table, width, "factor")?;
        }
        for d in &self.det {
            let dom = self.group_size(&d.parents)?;
            if d.map.domain_size() != dom || d.map.codomain_size() != self.size_of(&d.child)? {
                return Err(SearchError::InconsistentShapes(format!("map for `{}`", d.child)));
            }
        }
        Ok(())
    }

    /// Indices of the free factors, in order.
    pub fn free_factors(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i].free).collect()
    }
}

/// Precomputed cell-to-entry plan for repeatedly assembling one family.
#[derive(Debug, Clone)]
pub struct Assembler {
    axes: Vec<Axis>,
    cells: usize,
    nfac: usize,
    live: Vec<u32>,
    offsets: Vec<u32>,
}

fn group_offset(group_idx: &[usize], sizes: &[usize], idx: &[usize]) -> usize {
    group_idx.iter().fold(0, |acc, &g| acc * sizes[g] + idx[g])
}

impl Assembler {
    pub fn new(fd: &FactorizedDist) -> Result<Self> {
        fd.validate()?;
        let sizes: Vec<usize> = fd.axes.iter().map(|a| a.size).collect();
        let cells = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&c| c <= MAX_CELLS));
        let cells = cells.ok_or(InfoError::TooLarge(usize::MAX))?;
        let pos = |n: &String| fd.axes.iter().position(|a| &a.name == n).expect("validated");
        let fac: Vec<(Vec<usize>, Vec<usize>, usize)> = fd
            .factors
            .iter()
            .map(|f| {
                let c: Vec<usize> = f.children.iter().map(pos).collect();
                let w = c.iter().map(|&i| sizes[i]).product();
                (f.parents.iter().map(pos).collect(), c, w)
            })
            .collect();
        let dets: Vec<(usize, Vec<usize>, &DeterministicMap)> =
            fd.det.iter().map(|d| (pos(&d.child), d.parents.iter().map(pos).collect(), &d.map)).collect();
        let mut idx = vec![0usize; sizes.len()];
        let mut live = Vec::new();
        let mut offsets = Vec::new();
        for cell in 0..cells {
            let ok = dets.iter().all(|(c, par, m)| m.apply(group_offset(par, &sizes, &idx)) == idx[*c]);
            if ok {
                live.push(cell as u32);
                for (par, ch, w) in &fac {
                    offsets.push((group_offset(par, &sizes, &idx) * w + group_offset(ch, &sizes, &idx)) as u32);
                }
            }
            advance(&mut idx, &sizes);
        }
        Ok(Assembler { axes: fd.axes.clone(), cells, nfac: fac.len(), live, offsets })
    }

    /// Multiplies the factor tables into `out` (resized to the joint size).
    pub fn assemble_into(&self, tables: &[&[f64]], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.cells, 0.0);
        for (k, &cell) in self.live.iter().enumerate() {
            let offs = &self.offsets[k * self.nfac..(k + 1) * self.nfac];
            let mut p = 1.0;
            for (t, &o) in tables.iter().zip(offs) {
                p *= t[o as usize];
            }
            out[cell as usize] = p;
        }
    }

    pub fn assemble(&self, fd: &FactorizedDist) -> Result<JointPmf> {
        let tables: Vec<&[f64]> = fd.factors.iter().map(|f| f.table.as_slice()).collect();
        let mut out = Vec::new();
        self.assemble_into(&tables, &mut out);
        Ok(JointPmf::from_parts_unchecked(self.axes.clone(), out)?)
    }
}

/// Joint law of a factorized distribution.
pub fn assemble(fd: &FactorizedDist) -> Result<JointPmf> {
    let j = Assembler::new(fd)?.assemble(fd)?;
    j.validate()?;
    Ok(j)
}

/// Evaluates the region inequalities belonging to `pattern` at `p`.
pub fn evaluate(pattern: Pattern, p: &JointPmf, links: LinkCapacities) -> Result<RegionBounds> {
    use Pattern::*;
    Ok(match pattern {
        Thm1A => eval_theorem1(p, links, CribCase::A)?,
        Thm1B => eval_theorem1(p, links, CribCase::B)?,
        Thm2 => eval_theorem2(p, links.c12)?,
        Thm4sc => eval_theorem4(p, links, Causality::StrictlyCausal)?,
        Thm4c => eval_theorem4(p, links, Causality::Causal)?,
        Thm5sc => eval_theorem5(p, links.c12, Causality::StrictlyCausal)?,
        Thm5c => eval_theorem5(p, links.c12, Causality::Causal)?,
        Thm3 => return Err(SearchError::UnsupportedPattern(Thm3)),
    })
}

/// Lattice points of the simplex with `k` parts and resolution `steps`,
/// in lexicographic order of the integer compositions.
pub fn simplex_lattice(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(k - 1, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, &mut Vec::new(), &mut out);
    out.into_iter().map(|c| c.into_iter().map(|v| v as f64 / steps as f64).collect()).collect()
}

/// C(steps + k - 1, k - 1), the number of lattice points per row.
pub fn lattice_count(k: usize, steps: usize) -> u128 {
    let (n, r) = ((steps + k - 1) as u128, (k - 1) as u128);
    let mut c: u128 = 1;
    for i in 0..r {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Free rows as (factor index, row index, width).
fn free_rows(fd: &FactorizedDist) -> Result<Vec<(usize, usize, usize)>> {
    let shapes = fd.shapes()?;
    let mut rows = Vec::new();
    for i in fd.free_factors() {
        let (r, w) = shapes[i];
        for row in 0..r {
            rows.push((i, row, w));
        }
    }
    Ok(rows)
}

/// Deterministic enumeration of all lattice assignments of the free rows.
pub struct GridIter {
    current: FactorizedDist,
    rows: Vec<(usize, usize, usize)>,
    lattices: BTreeMap<usize, Vec<Vec<f64>>>,
    digits: Vec<usize>,
    total: u128,
    emitted: u128,
}

impl GridIter {
    pub fn total(&self) -> u128 {
        self.total
    }

    fn write_row(&mut self, r: usize) {
        let (f, row, w) = self.rows[r];
        let vals = &self.lattices[&w][self.digits[r]];
        self.current.factors[f].table[row * w..(row + 1) * w].copy_from_slice(vals);
    }

    /// Advances to the next point, leaving it in `current`. Returns false at the end.
    fn step(&mut self) -> bool {
        if self.emitted >= self.total {
            return false;
        }
        if self.emitted > 0 {
            let mut r = self.rows.len();
            while r > 0 {
                r -= 1;
                self.digits[r] += 1;
                let (_, _, w) = self.rows[r];
                if self.digits[r] < self.lattices[&w].len() {
                    self.write_row(r);
                    break;
                }
                self.digits[r] = 0;
                self.write_row(r);
            }
        }
        self.emitted += 1;
        true
    }

    fn current(&self) -> &FactorizedDist {
        &self.current
    }
}

impl Iterator for GridIter {
    type Item = FactorizedDist;
    fn next(&mut self) -> Option<FactorizedDist> {
        if self.step() {
            Some(self.current.clone())
        } else {
            None
        }
    }
}

/// Projected number of grid points for `pattern` under `cfg`.
pub fn grid_count(template: &FactorizedDist, steps: usize) -> Result<u128> {
    let mut total: u128 = 1;
    for (_, _, w) in free_rows(template)? {
        total = total.saturating_mul(lattice_count(w, steps));
    }
    Ok(total)
}

/// Every assignment of lattice rows to the free factors of `pattern`.
pub fn enumerate_grid(pattern: Pattern, cfg: &SearchConfig, problem: &Problem) -> Result<GridIter> {
    cfg.validate()?;
    let template = FactorizedDist::template(pattern, problem, cfg)?;
    grid_iter(template, cfg.grid_steps)
}

fn grid_iter(mut current: FactorizedDist, steps: usize) -> Result<GridIter> {
    let rows = free_rows(&current)?;
    let total = grid_count(&current, steps)?;
    if total > GRID_CAP {
        return Err(SearchError::CapExceeded(total));
    }
    let mut lattices = BTreeMap::new();
    for &(_, _, w) in &rows {
        lattices.entry(w).or_insert_with(|| simplex_lattice(w, steps));
    }
    for &(f, row, w) in &rows {
        current.factors[f].table[row * w..(row + 1) * w].copy_from_slice(&lattices[&w][0]);
    }
    let digits = vec![0; rows.len()];
    Ok(GridIter { current, rows, lattices, digits, total, emitted: 0 })
}

fn splitmix(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for stream `i` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed, i))
}

/// Draws every free row from a flat Dirichlet law.
pub fn randomize<R: Rng>(fd: &mut FactorizedDist, rng: &mut R) -> Result<()> {
    for (f, row, w) in free_rows(fd)? {
        let t = &mut fd.factors[f].table[row * w..(row + 1) * w];
        let mut s = 0.0;
        for v in t.iter_mut() {
            *v = rng.sample::<f64, _>(Exp1);
            s += *v;
        }
        for v in t.iter_mut() {
            *v /= s;
        }
    }
    Ok(())
}

/// Which candidate produced a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Candidate {
    Grid(u64),
    Random(u64),
}

struct Evaluator<'a> {
    pattern: Pattern,
    links: LinkCapacities,
    asm: Assembler,
    buf: Vec<f64>,
    axes: &'a [Axis],
}

impl Evaluator<'_> {
    /// Polytope vertices at `fd`, or None when the distribution is infeasible.
    fn vertices(&mut self, fd: &FactorizedDist) -> Result<Option<Vec<RatePoint>>> {
        let tables: Vec<&[f64]> = fd.factors.iter().map(|f| f.table.as_slice()).collect();
        self.asm.assemble_into(&tables, &mut self.buf);
        let joint = JointPmf::from_parts_unchecked(self.axes.to_vec(), std::mem::take(&mut self.buf))?;
        let b = evaluate(self.pattern, &joint, self.links);
        self.buf = joint.into_table();
        let b = b?;
        if !b.feasible {
            return Ok(None);
        }
        Ok(Some(bounds_to_polytope(&b)?.vertices))
    }
}

fn check_pattern(pattern: Pattern) -> Result<()> {
    if pattern == Pattern::Thm3 {
        return Err(SearchError::UnsupportedPattern(pattern));
    }
    Ok(())
}

/// Visits every candidate of the grid and random modes in a fixed order.
fn for_each_candidate(
    pattern: Pattern,
    problem: &Problem,
    cfg: &SearchConfig,
    mut visit: impl FnMut(Candidate, &FactorizedDist) -> Result<()>,
) -> Result<FactorizedDist> {
    cfg.validate()?;
    let template = FactorizedDist::template(pattern, problem, cfg)?;
    if cfg.use_grid {
        let mut g = grid_iter(template.clone(), cfg.grid_steps)?;
        let mut i = 0u64;
        while g.step() {
            visit(Candidate::Grid(i), g.current())?;
            i += 1;
        }
    }
    let mut fd = template.clone();
    for i in 0..cfg.random_samples as u64 {
        randomize(&mut fd, &mut stream_rng(cfg.seed, i))?;
        visit(Candidate::Random(i), &fd)?;
    }
    Ok(template)
}

/// Rebuilds the distribution a candidate label refers to.
pub fn materialize(pattern: Pattern, problem: &Problem, cfg: &SearchConfig, c: Candidate) -> Result<FactorizedDist> {
    let template = FactorizedDist::template(pattern, problem, cfg)?;
    match c {
        Candidate::Grid(i) => {
            let mut fd = template;
            let rows = free_rows(&fd)?;
            let mut lattices = BTreeMap::new();
            let mut rem = i as u128;
            for &(f, row, w) in rows.iter().rev() {
                let lat = lattices.entry(w).or_insert_with(|| simplex_lattice(w, cfg.grid_steps));
                let d = (rem % lat.len() as u128) as usize;
                rem /= lat.len() as u128;
                fd.factors[f].table[row * w..(row + 1) * w].copy_from_slice(&lat[d]);
            }
            Ok(fd)
        }
        Candidate::Random(i) => {
            let mut fd = template;
            randomize(&mut fd, &mut stream_rng(cfg.seed, i))?;
            Ok(fd)
        }
    }
}

/// Union over the family of the per-distribution polytopes, convexified.
/// Infeasible distributions are skipped. Each hull vertex carries the
/// distribution that produced it.
pub fn achievable_frontier(
    pattern: Pattern,
    problem: &Problem,
    links: LinkCapacities,
    cfg: &SearchConfig,
) -> Result<Frontier<FactorizedDist>> {
    let labels = frontier_candidates(pattern, problem, links, cfg)?;
    let mut cache: BTreeMap<Candidate, FactorizedDist> = BTreeMap::new();
    let mut out = Vec::with_capacity(labels.provenance.len());
    for c in &labels.provenance {
        if !cache.contains_key(c) {
            cache.insert(*c, materialize(pattern, problem, cfg, *c)?);
        }
        out.push(cache[c].clone());
    }
    Ok(Frontier { plane: labels.plane, vertices: labels.vertices, provenance: out })
}

/// Like [`achievable_frontier`] but with candidate labels as provenance.
pub fn frontier_candidates(
    pattern: Pattern,
    problem: &Problem,
    links: LinkCapacities,
    cfg: &SearchConfig,
) -> Result<Frontier<Candidate>> {
    check_pattern(pattern)?;
    links.validate()?;
    let template = FactorizedDist::template(pattern, problem, cfg)?;
    let plane = if pattern == Pattern::Thm2 { crate::geometry::Plane::R0R1 } else { crate::geometry::Plane::R1R2 };
    let mut ev = Evaluator { pattern, links, asm: Assembler::new(&template)?, buf: Vec::new(), axes: &template.axes };
    let mut pts: Vec<(RatePoint, Candidate)> = Vec::new();
    for_each_candidate(pattern, problem, cfg, |c, fd| {
        if let Some(vs) = ev.vertices(fd)? {
            pts.extend(vs.into_iter().map(|v| (v, c)));
        }
        if pts.len() > CHUNK {
            let (v, p) = hull_with(std::mem::take(&mut pts), &|c: &Candidate| *c);
            pts = v.into_iter().zip(p).collect();
        }
        Ok(())
    })?;
    Ok(Frontier::from_points(plane, pts, |c| *c))
}

fn objective(vs: &[RatePoint], w: f64) -> Option<(f64, RatePoint)> {
    vs.iter().map(|p| (w * p.r1 + (1.0 - w) * p.r2, *p)).fold(None, |best, cur| match best {
        Some(b) if b.0 >= cur.0 => Some(b),
        _ => Some(cur),
    })
}

/// Maximizes `w*R1 + (1-w)*R2` (or `w*R0 + (1-w)*R1`) over the family.
/// After the scan, `refine_iters` rounds of pairwise mass moves are applied
/// to the incumbent, halving the step after a round without improvement.
pub fn max_weighted_sum(
    pattern: Pattern,
    problem: &Problem,
    links: LinkCapacities,
    w: f64,
    cfg: &SearchConfig,
) -> Result<(RatePoint, FactorizedDist)> {
    check_pattern(pattern)?;
    links.validate()?;
    if !(0.0..=1.0).contains(&w) {
        return Err(SearchError::InvalidConfig(format!("weight {w} outside [0, 1]")));
    }
    let template = FactorizedDist::template(pattern, problem, cfg)?;
    let mut ev = Evaluator { pattern, links, asm: Assembler::new(&template)?, buf: Vec::new(), axes: &template.axes };
    let mut best: Option<(f64, RatePoint, FactorizedDist)> = None;
    for_each_candidate(pattern, problem, cfg, |_, fd| {
        if let Some(vs) = ev.vertices(fd)? {
            if let Some((val, p)) = objective(&vs, w) {
                if best.as_ref().is_none_or(|b| val > b.0) {
                    best = Some((val, p, fd.clone()));
                }
            }
        }
        Ok(())
    })?;
    let Some((mut val, mut point, mut fd)) = best else {
        return Ok((RatePoint::new(0.0, 0.0), template));
    };
    let rows = free_rows(&fd)?;
    let mut delta = 0.5 / cfg.grid_steps as f64;
    for _ in 0..cfg.refine_iters {
        let mut improved = false;
        for &(f, row, width) in &rows {
            for i in 0..width {
                for j in 0..width {
                    let base = row * width;
                    let m = delta.min(fd.factors[f].table[base + i]);
                    if i == j || m <= 0.0 {
                        continue;
                    }
                    let saved = (fd.factors[f].table[base + i], fd.factors[f].table[base + j]);
                    fd.factors[f].table[base + i] -= m;
                    fd.factors[f].table[base + j] += m;
                    let cand = ev.vertices(&fd)?.and_then(|vs| objective(&vs, w));
                    match cand {
                        Some((v, p)) if v > val + 1e-15 => {
                            val = v;
                            point = p;
                            improved = true;
                        }
                        _ => {
                            fd.factors[f].table[base + i] = saved.0;
                            fd.factors[f].table[base + j] = saved.1;
                        }
                    }
                }
            }
        }
        if !improved {
            delta /= 2.0;
        }
    }
    Ok((point, fd))
}
