//! Dense probability tables over named finite alphabets and the Shannon
//! measures computed from them. All logarithms are base 2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of cells a dense table may hold.
pub const MAX_CELLS: usize = 10_000_000;

const NEG_TOL: f64 = -1e-15;
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("negative probability mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("axis `{0}` appears in more than one group")]
    OverlappingAxes(String),
    #[error("duplicate axis name `{0}`")]
    DuplicateAxis(String),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("table with {0} cells exceeds the dense-table cap")]
    TooLarge(usize),
    #[error("map value {value} out of range for codomain size {codomain}")]
    MapOutOfRange { value: usize, codomain: usize },
    #[error("alphabet sizes must be positive (axis `{0}`)")]
    EmptyAlphabet(String),
}

pub type Result<T> = std::result::Result<T, InfoError>;

fn check_mass(probs: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < NEG_TOL {
            return Err(InfoError::NegativeMass { index, value });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(InfoError::NotNormalized { sum });
    }
    Ok(())
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// A probability mass function on `{0, .., alphabet_size - 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf")]
pub struct Pmf {
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPmf {
    probs: Vec<f64>,
}

impl TryFrom<RawPmf> for Pmf {
    type Error = InfoError;
    fn try_from(raw: RawPmf) -> Result<Self> {
        Pmf::new(raw.probs)
    }
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(InfoError::EmptyAlphabet("pmf".into()));
        }
        check_mass(&probs)?;
        Ok(Pmf { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Pmf { probs: vec![1.0 / k as f64; k.max(1)] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| plogp(p)).sum()
    }
}

/// Checks the nonnegativity and normalization of a bare probability vector.
pub fn validate_pmf(probs: &[f64]) -> Result<()> {
    check_mass(probs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Axis { name: name.into(), size }
    }
}

/// Joint law over named axes, stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct JointPmf {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJoint {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

impl TryFrom<RawJoint> for JointPmf {
    type Error = InfoError;
    fn try_from(raw: RawJoint) -> Result<Self> {
        JointPmf::new(raw.axes, raw.table)
    }
}

fn check_axes(axes: &[Axis]) -> Result<usize> {
    let mut cells: usize = 1;
    for (i, a) in axes.iter().enumerate() {
        if a.size == 0 {
            return Err(InfoError::EmptyAlphabet(a.name.clone()));
        }
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(InfoError::DuplicateAxis(a.name.clone()));
        }
        cells = cells.checked_mul(a.size).filter(|&c| c <= MAX_CELLS).ok_or(InfoError::TooLarge(usize::MAX))?;
    }
    Ok(cells)
}

impl JointPmf {
    /// Builds a validated joint table.
    pub fn new(axes: Vec<Axis>, table: Vec<f64>) -> Result<Self> {
        let cells = check_axes(&axes)?;
        if table.len() != cells {
            return Err(InfoError::SizeMismatch { expected: cells, found: table.len() });
        }
        check_mass(&table)?;
        Ok(JointPmf { axes, table })
    }

    /// Builds a table without the normalization check. Shapes are still checked.
    /// Intended for tables produced by exact products of validated factors.
    pub fn from_parts_unchecked(axes: Vec<Axis>, table: Vec<f64>) -> Result<Self> {
        let cells = check_axes(&axes)?;
        if table.len() != cells {
            return Err(InfoError::SizeMismatch { expected: cells, found: table.len() });
        }
        Ok(JointPmf { axes, table })
    }

    /// Fills a table from a function of the multi-index.
    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let cells = check_axes(&axes)?;
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let mut idx = vec![0usize; sizes.len()];
        let mut table = Vec::with_capacity(cells);
        for _ in 0..cells {
            table.push(f(&idx));
            advance(&mut idx, &sizes);
        }
        JointPmf::new(axes, table)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn into_table(self) -> Vec<f64> {
        self.table
    }

    pub fn validate(&self) -> Result<()> {
        check_axes(&self.axes)?;
        check_mass(&self.table)
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes.iter().position(|a| a.name == name).ok_or_else(|| InfoError::UnknownAxis(name.to_string()))
    }

    pub fn axis_size(&self, name: &str) -> Result<usize> {
        Ok(self.axes[self.axis_index(name)?].size)
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.axis_index(n)?;
            if out.contains(&i) {
                return Err(InfoError::OverlappingAxes(n.to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Bitmask of the named axes, for use with [`JointPmf::entropy_mask`].
    pub fn mask(&self, names: &[&str]) -> Result<u64> {
        let mut m = 0u64;
        for i in self.indices(names)? {
            m |= 1 << i;
        }
        Ok(m)
    }

    /// Marginal table over the given axes, in the given order.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPmf> {
        let keep = self.indices(names)?;
        let table = self.marginal_table(&keep);
        let axes = keep.iter().map(|&i| self.axes[i].clone()).collect();
        Ok(JointPmf { axes, table })
    }

    fn marginal_table(&self, keep: &[usize]) -> Vec<f64> {
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.size).collect();
        let out_len: usize = keep.iter().map(|&i| sizes[i]).product();
        // stride of each source axis inside the output table
        let mut out_stride = vec![0usize; sizes.len()];
        let mut s = 1;
        for &i in keep.iter().rev() {
            out_stride[i] = s;
            s *= sizes[i];
        }
        let mut out = vec![0.0; out_len];
        if keep.is_empty() {
            out[0] = self.table.iter().sum();
            return out;
        }
        let mut idx = vec![0usize; sizes.len()];
        let mut pos = 0usize;
        for &p in &self.table {
            out[pos] += p;
            // odometer increment keeping `pos` in sync
            let mut k = sizes.len();
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                pos += out_stride[k];
                if idx[k] < sizes[k] {
                    break;
                }
                pos -= out_stride[k] * sizes[k];
                idx[k] = 0;
            }
        }
        out
    }

    /// Entropy of the marginal on the axes selected by `mask` (bit i = axis i).
    pub fn entropy_mask(&self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let keep: Vec<usize> = (0..self.axes.len()).filter(|i| mask >> i & 1 == 1).collect();
        if keep.len() == self.axes.len() {
            return self.table.iter().map(|&p| plogp(p)).sum();
        }
        self.marginal_table(&keep).iter().map(|&p| plogp(p)).sum()
    }

    /// H(axes) in bits. The empty set has entropy 0.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        Ok(self.entropy_mask(self.mask(names)?))
    }

    /// H(target | given) = H(target, given) - H(given), never below 0.
    pub fn cond_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        let t = self.mask(target)?;
        let g = self.mask(given)?;
        disjoint(self, t, g)?;
        Ok((self.entropy_mask(t | g) - self.entropy_mask(g)).max(0.0))
    }

    /// I(A; B | C) in bits. Small negative round-off is clamped to 0.
    pub fn cond_mutual_info(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        Ok(self.cond_mutual_info_raw(a, b, given)?.max(0.0))
    }

    /// I(A; B | C) without clamping, for invariant checks.
    pub fn cond_mutual_info_raw(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let ma = self.mask(a)?;
        let mb = self.mask(b)?;
        let mc = self.mask(given)?;
        disjoint(self, ma, mb)?;
        disjoint(self, ma, mc)?;
        disjoint(self, mb, mc)?;
        Ok(self.entropy_mask(ma | mc) + self.entropy_mask(mb | mc)
            - self.entropy_mask(ma | mb | mc)
            - self.entropy_mask(mc))
    }

    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.cond_mutual_info(a, b, &[])
    }

    /// Appends a new axis carrying `map(source)`.
    pub fn pushforward(&self, source: &str, map: &DeterministicMap, new_name: &str) -> Result<JointPmf> {
        let src = self.axis_index(source)?;
        let src_size = self.axes[src].size;
        if map.domain_size() != src_size {
            return Err(InfoError::SizeMismatch { expected: src_size, found: map.domain_size() });
        }
        if self.has_axis(new_name) {
            return Err(InfoError::DuplicateAxis(new_name.to_string()));
        }
        let mut axes = self.axes.clone();
        axes.push(Axis::new(new_name, map.codomain_size()));
        let cells = check_axes(&axes)?;
        let stride: usize = self.axes[src + 1..].iter().map(|a| a.size).product();
        let k = map.codomain_size();
        let mut table = vec![0.0; cells];
        for (c, &p) in self.table.iter().enumerate() {
            let x = (c / stride) % src_size;
            table[c * k + map.apply(x)] = p;
        }
        Ok(JointPmf { axes, table })
    }

    /// Renames axes; names not in the map are kept.
    pub fn rename(&self, pairs: &[(&str, &str)]) -> Result<JointPmf> {
        let mut axes = self.axes.clone();
        for (from, to) in pairs {
            let i = self.axis_index(from)?;
            axes[i].name = to.to_string();
        }
        check_axes(&axes)?;
        Ok(JointPmf { axes, table: self.table.clone() })
    }

    /// Largest absolute cell difference to `other` after aligning axes by name.
    pub fn max_abs_diff(&self, other: &JointPmf) -> Result<f64> {
        if self.axes.len() != other.axes.len() {
            return Err(InfoError::SizeMismatch { expected: self.axes.len(), found: other.axes.len() });
        }
        let names: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).collect();
        let aligned = other.marginal(&names)?;
        for (a, b) in self.axes.iter().zip(&aligned.axes) {
            if a.size != b.size {
                return Err(InfoError::SizeMismatch { expected: a.size, found: b.size });
            }
        }
        Ok(self.table.iter().zip(&aligned.table).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

fn disjoint(p: &JointPmf, a: u64, b: u64) -> Result<()> {
    let both = a & b;
    if both != 0 {
        let i = both.trailing_zeros() as usize;
        return Err(InfoError::OverlappingAxes(p.axes[i].name.clone()));
    }
    Ok(())
}

/// Increments a row-major multi-index; wraps to all zeros after the last cell.
pub fn advance(idx: &mut [usize], sizes: &[usize]) {
    let mut k = sizes.len();
    while k > 0 {
        k -= 1;
        idx[k] += 1;
        if idx[k] < sizes[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// A function from `{0..domain}` to `{0..codomain}`, such as a cribbing map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMap")]
pub struct DeterministicMap {
    codomain_size: usize,
    table: Vec<usize>,
}

#[derive(Deserialize)]
struct RawMap {
    codomain_size: usize,
    table: Vec<usize>,
}

impl TryFrom<RawMap> for DeterministicMap {
    type Error = InfoError;
    fn try_from(raw: RawMap) -> Result<Self> {
        DeterministicMap::new(raw.table, raw.codomain_size)
    }
}

impl DeterministicMap {
    pub fn new(table: Vec<usize>, codomain_size: usize) -> Result<Self> {
        if table.is_empty() {
            return Err(InfoError::EmptyAlphabet("map domain".into()));
        }
        if codomain_size == 0 {
            return Err(InfoError::EmptyAlphabet("map codomain".into()));
        }
        if let Some(&value) = table.iter().find(|&&v| v >= codomain_size) {
            return Err(InfoError::MapOutOfRange { value, codomain: codomain_size });
        }
        Ok(DeterministicMap { codomain_size, table })
    }

    pub fn identity(k: usize) -> Self {
        DeterministicMap { codomain_size: k, table: (0..k).collect() }
    }

    /// Maps everything to symbol 0 (no cribbing).
    pub fn constant(domain: usize) -> Self {
        DeterministicMap { codomain_size: 1, table: vec![0; domain] }
    }

    pub fn domain_size(&self) -> usize {
        self.table.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain_size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&v| v == self.table[0])
    }
}
