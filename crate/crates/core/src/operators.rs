//! Sparse coefficient-space operators between tagged Koornwinder bases.
//!
//! Column `(n, k)` of every operator holds the expansion of the image of
//! the basis element `(n, k)` in the range basis, so `apply` is a plain
//! matrix-vector product. Entries are stored as triplets sorted by
//! `(col, row)`; columns are contiguous and binary-searchable.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koornwinder::{basis_dim, index_to_linear, linear_to_index, TriIndex, TriParams};

/// Basis `P_{n,k}^{params}` (or `x^a y^b z^c P_{n,k}^{params}` when
/// `weighted`), truncated at total degree `maxdeg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTag {
    pub params: TriParams,
    pub weighted: bool,
    pub maxdeg: usize,
}

impl BasisTag {
    pub fn new(params: TriParams, weighted: bool, maxdeg: usize) -> Self {
        BasisTag { params, weighted, maxdeg }
    }

    pub fn dim(&self) -> usize {
        basis_dim(self.maxdeg)
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.weighted { "weighted " } else { "" };
        write!(f, "{w}{} N={}", self.params, self.maxdeg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec {
    pub basis: BasisTag,
    pub values: Vec<f64>,
}

impl CoeffVec {
    pub fn new(basis: BasisTag, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} coefficients for a basis of dimension {}",
                values.len(),
                basis.dim()
            )));
        }
        Ok(CoeffVec { basis, values })
    }

    pub fn zeros(basis: BasisTag) -> Self {
        CoeffVec { basis, values: vec![0.0; basis.dim()] }
    }

    /// Unit vector on `(n, k)`.
    pub fn unit(basis: BasisTag, idx: TriIndex) -> Result<Self> {
        let mut v = Self::zeros(basis);
        let i = index_to_linear(idx)?;
        if i >= v.values.len() {
            return Err(Error::Usage(format!("{idx} exceeds basis degree {}", basis.maxdeg)));
        }
        v.values[i] = 1.0;
        Ok(v)
    }

    pub fn get(&self, idx: TriIndex) -> f64 {
        index_to_linear(idx).ok().and_then(|i| self.values.get(i).copied()).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub name: String,
    pub domain: BasisTag,
    pub range: BasisTag,
    entries: Vec<Triplet>,
}

impl SparseOp {
    /// Collects triplets, summing duplicates in a fixed order and dropping
    /// exact zeros.
    pub fn from_triplets(name: &str, domain: BasisTag, range: BasisTag, triplets: Vec<Triplet>) -> Result<Self> {
        let (rows, cols) = (range.dim(), domain.dim());
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for t in triplets {
            if t.row >= rows || t.col >= cols {
                return Err(Error::Usage(format!("entry ({}, {}) outside a {rows}x{cols} operator", t.row, t.col)));
            }
            *acc.entry((t.col, t.row)).or_insert(0.0) += t.value;
        }
        let entries =
            acc.into_iter().filter(|(_, v)| *v != 0.0).map(|((col, row), value)| Triplet { row, col, value }).collect();
        Ok(SparseOp { name: name.to_string(), domain, range, entries })
    }

    pub fn entries(&self) -> &[Triplet] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.range.dim(), self.domain.dim())
    }

    /// Entries of column `col`, by binary search.
    pub fn column(&self, col: usize) -> &[Triplet] {
        let lo = self.entries.partition_point(|t| t.col < col);
        let hi = self.entries.partition_point(|t| t.col <= col);
        &self.entries[lo..hi]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let c = self.column(col);
        c.binary_search_by_key(&row, |t| t.row).map(|i| c[i].value).unwrap_or(0.0)
    }

    pub fn max_col_nnz(&self) -> usize {
        (0..self.domain.dim()).map(|c| self.column(c).len()).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let (r, c) = self.shape();
        let mut m = nalgebra::DMatrix::zeros(r, c);
        for t in &self.entries {
            m[(t.row, t.col)] = t.value;
        }
        m
    }

    pub fn apply(&self, v: &CoeffVec) -> Result<CoeffVec> {
        if v.basis != self.domain {
            return Err(Error::BasisMismatch(format!("{} expects {}, got {}", self.name, self.domain, v.basis)));
        }
        let mut w = CoeffVec::zeros(self.range);
        for t in &self.entries {
            w.values[t.row] += t.value * v.values[t.col];
        }
        Ok(w)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SparseOp) -> Result<SparseOp> {
        if inner.range != self.domain {
            return Err(Error::BasisMismatch(format!(
                "cannot compose {} after {}: {} vs {}",
                self.name, inner.name, self.domain, inner.range
            )));
        }
        let mut out = Vec::new();
        for t in &inner.entries {
            for s in self.column(t.row) {
                out.push(Triplet { row: s.row, col: t.col, value: s.value * t.value });
            }
        }
        Self::from_triplets(&format!("{}*{}", self.name, inner.name), inner.domain, self.range, out)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &SparseOp, alpha: f64) -> Result<SparseOp> {
        if self.domain != other.domain || self.range != other.range {
            return Err(Error::BasisMismatch(format!("cannot add {} and {}", self.name, other.name)));
        }
        let mut all = self.entries.clone();
        all.extend(other.entries.iter().map(|t| Triplet { value: alpha * t.value, ..*t }));
        Self::from_triplets(&self.name, self.domain, self.range, all)
    }

    /// Embedding of `domain` into the same basis at a degree `range.maxdeg >= domain.maxdeg`.
    pub fn padded_identity(domain: BasisTag, maxdeg: usize) -> Result<SparseOp> {
        if maxdeg < domain.maxdeg {
            return Err(Error::Usage("padded identity cannot truncate".into()));
        }
        let range = BasisTag { maxdeg, ..domain };
        let t = (0..domain.dim()).map(|i| Triplet { row: i, col: i, value: 1.0 }).collect();
        Self::from_triplets("identity", domain, range, t)
    }
}

/// Named operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    DiffX,
    DiffY,
    DiffZ,
    WeightedDiffX,
    WeightedDiffY,
    WeightedDiffZ,
    ConvA,
    ConvB,
    ConvC,
    MultX,
    MultY,
    MultZ,
    MultSameX,
    MultSameY,
    MultSameZ,
    EigenDiagK,
    EigenDiagN,
}

impl Builder {
    pub const ALL: [Builder; 17] = [
        Builder::DiffX,
        Builder::DiffY,
        Builder::DiffZ,
        Builder::WeightedDiffX,
        Builder::WeightedDiffY,
        Builder::WeightedDiffZ,
        Builder::ConvA,
        Builder::ConvB,
        Builder::ConvC,
        Builder::MultX,
        Builder::MultY,
        Builder::MultZ,
        Builder::MultSameX,
        Builder::MultSameY,
        Builder::MultSameZ,
        Builder::EigenDiagK,
        Builder::EigenDiagN,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Builder::DiffX => "diff_x",
            Builder::DiffY => "diff_y",
            Builder::DiffZ => "diff_z",
            Builder::WeightedDiffX => "weighted_diff_x",
            Builder::WeightedDiffY => "weighted_diff_y",
            Builder::WeightedDiffZ => "weighted_diff_z",
            Builder::ConvA => "conv_a",
            Builder::ConvB => "conv_b",
            Builder::ConvC => "conv_c",
            Builder::MultX => "mult_x",
            Builder::MultY => "mult_y",
            Builder::MultZ => "mult_z",
            Builder::MultSameX => "mult_same_x",
            Builder::MultSameY => "mult_same_y",
            Builder::MultSameZ => "mult_same_z",
            Builder::EigenDiagK => "eigen_diag_k",
            Builder::EigenDiagN => "eigen_diag_n",
        }
    }

    /// Documented per-column stencil bound.
    pub fn stencil_bound(&self) -> usize {
        match self {
            Builder::DiffY | Builder::WeightedDiffY | Builder::EigenDiagK | Builder::EigenDiagN => 1,
            Builder::DiffX | Builder::DiffZ | Builder::WeightedDiffX | Builder::WeightedDiffZ => 2,
            Builder::ConvA | Builder::MultX => 2,
            Builder::ConvB | Builder::ConvC | Builder::MultY | Builder::MultZ => 4,
            // full 3x3 block in (n, k) for y and z; degrees n-1..n+1 for x
            Builder::MultSameX => 3,
            Builder::MultSameY | Builder::MultSameZ => 9,
        }
    }

    pub fn build(&self, n: usize, abc: TriParams) -> Result<SparseOp> {
        match self {
            Builder::DiffX => build_diff_x(n, abc),
            Builder::DiffY => build_diff_y(n, abc),
            Builder::DiffZ => build_diff_z(n, abc),
            Builder::WeightedDiffX => build_weighted_diff_x(n, abc),
            Builder::WeightedDiffY => build_weighted_diff_y(n, abc),
            Builder::WeightedDiffZ => build_weighted_diff_z(n, abc),
            Builder::ConvA => build_conv_a(n, abc),
            Builder::ConvB => build_conv_b(n, abc),
            Builder::ConvC => build_conv_c(n, abc),
            Builder::MultX => build_mult_x(n, abc),
            Builder::MultY => build_mult_y(n, abc),
            Builder::MultZ => build_mult_z(n, abc),
            Builder::MultSameX => build_mult_same_basis(CoordAxis::X, n, abc),
            Builder::MultSameY => build_mult_same_basis(CoordAxis::Y, n, abc),
            Builder::MultSameZ => build_mult_same_basis(CoordAxis::Z, n, abc),
            Builder::EigenDiagK => build_eigen_diag_k(n, abc),
            Builder::EigenDiagN => build_eigen_diag_n(n, abc),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builder::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown operator '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoordAxis {
    X,
    Y,
    Z,
}

fn require_three_param(abc: TriParams) -> Result<()> {
    abc.validate()?;
    if abc.d != 0.0 {
        return Err(Error::Usage(format!("sparse operators use d = 0, got {abc}")));
    }
    Ok(())
}

fn require_positive(name: &str, label: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} needs {label} > 0, got {v}")))
    }
}

fn nonzero(name: &str, what: &str, v: f64, idx: TriIndex) -> Result<f64> {
    if v == 0.0 {
        Err(Error::Degenerate(format!("{name}: {what} vanishes at {idx}")))
    } else {
        Ok(v)
    }
}

/// Assembles an operator column by column. `stencil` returns
/// `(n', k', value)` for the image of `(n, k)`; targets outside the
/// triangle of valid indices are zero polynomials and are skipped.
fn assemble<F>(name: &str, domain: BasisTag, range: BasisTag, stencil: F) -> Result<SparseOp>
where
    F: Fn(TriIndex) -> Result<Vec<(i64, i64, f64)>> + Sync,
{
    let cols: Vec<TriIndex> = TriIndex::up_to(domain.maxdeg).collect();
    let parts: Vec<Vec<Triplet>> = cols
        .par_iter()
        .enumerate()
        .map(|(col, idx)| {
            let mut out = Vec::new();
            for (n, k, value) in stencil(*idx)? {
                let target = TriIndex::extended(n, k);
                if !target.is_valid() || value == 0.0 {
                    continue;
                }
                if n as usize > range.maxdeg {
                    return Err(Error::Usage(format!("{name}: image of {idx} exceeds range degree")));
                }
                out.push(Triplet { row: index_to_linear(target)?, col, value });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    SparseOp::from_triplets(name, domain, range, parts.into_iter().flatten().collect())
}

fn tags(abc: TriParams, weighted: bool, n: usize, range: TriParams, range_deg: usize) -> (BasisTag, BasisTag) {
    (BasisTag::new(abc, weighted, n), BasisTag::new(range, weighted, range_deg))
}

fn nk(idx: TriIndex) -> (f64, f64) {
    (idx.n as f64, idx.k as f64)
}

/// `∂/∂y : (a,b,c) → (a,b+1,c+1)`.
pub fn build_diff_y(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (dom, ran) = tags(p, false, n, p.shifted(0.0, 1.0, 1.0, 0.0), n.saturating_sub(1));
    assemble("diff_y", dom, ran, |i| {
        let (_, k) = nk(i);
        Ok(vec![(i.n - 1, i.k - 1, k + p.b + p.c + 1.0)])
    })
}

/// `∂/∂x : (a,b,c) → (a+1,b,c+1)`.
pub fn build_diff_x(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(1.0, 0.0, 1.0, 0.0), n.saturating_sub(1));
    assemble("diff_x", dom, ran, |i| {
        if i.n == 0 {
            return Ok(vec![]);
        }
        let (nn, k) = nk(i);
        let den = nonzero("diff_x", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n - 1, i.k, (nn + k + a + b + c + 2.0) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k - 1, (k + b) * (nn + k + b + c + 1.0) / den),
        ])
    })
}

/// `∂/∂z = ∂/∂y - ∂/∂x : (a,b,c) → (a+1,b+1,c)`.
pub fn build_diff_z(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(1.0, 1.0, 0.0, 0.0), n.saturating_sub(1));
    assemble("diff_z", dom, ran, |i| {
        if i.n == 0 {
            return Ok(vec![]);
        }
        let (nn, k) = nk(i);
        let den = nonzero("diff_z", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n - 1, i.k, -(nn + k + a + b + c + 2.0) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k - 1, (k + c) * (nn + k + b + c + 1.0) / den),
        ])
    })
}

/// `∂/∂x` on weighted bases: `(a,b,c) → (a-1,b,c-1)`.
pub fn build_weighted_diff_x(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("weighted_diff_x", "a", p.a)?;
    require_positive("weighted_diff_x", "c", p.c)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, true, n, p.shifted(-1.0, 0.0, -1.0, 0.0), n + 1);
    assemble("weighted_diff_x", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("weighted_diff_x", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![(i.n + 1, i.k, -(k + c) * (nn - k + 1.0) / den), (i.n + 1, i.k + 1, -(k + 1.0) * (nn - k + a) / den)])
    })
}

/// `∂/∂y` on weighted bases: `(a,b,c) → (a,b-1,c-1)`.
pub fn build_weighted_diff_y(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("weighted_diff_y", "b", p.b)?;
    require_positive("weighted_diff_y", "c", p.c)?;
    let (dom, ran) = tags(p, true, n, p.shifted(0.0, -1.0, -1.0, 0.0), n + 1);
    assemble("weighted_diff_y", dom, ran, |i| Ok(vec![(i.n + 1, i.k + 1, -(i.k as f64 + 1.0))]))
}

/// `∂/∂z` on weighted bases: `(a,b,c) → (a-1,b-1,c)`.
pub fn build_weighted_diff_z(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("weighted_diff_z", "a", p.a)?;
    require_positive("weighted_diff_z", "b", p.b)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, true, n, p.shifted(-1.0, -1.0, 0.0, 0.0), n + 1);
    assemble("weighted_diff_z", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("weighted_diff_z", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![(i.n + 1, i.k, (k + b) * (nn - k + 1.0) / den), (i.n + 1, i.k + 1, -(k + 1.0) * (nn - k + a) / den)])
    })
}

/// Conversion `(a,b,c) → (a+1,b,c)`.
pub fn build_conv_a(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(1.0, 0.0, 0.0, 0.0), n);
    assemble("conv_a", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("conv_a", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?;
        Ok(vec![(i.n, i.k, (nn + k + a + b + c + 2.0) / den), (i.n - 1, i.k, (nn + k + b + c + 1.0) / den)])
    })
}

/// Conversion `(a,b,c) → (a,b+1,c)`.
pub fn build_conv_b(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(0.0, 1.0, 0.0, 0.0), n);
    assemble("conv_b", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("conv_b", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?
            * nonzero("conv_b", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n, i.k, (nn + k + a + b + c + 2.0) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k, -(nn - k + a) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k - 1, (k + c) * (nn + k + b + c + 1.0) / den),
            (i.n, i.k - 1, -(k + c) * (nn - k + 1.0) / den),
        ])
    })
}

/// Conversion `(a,b,c) → (a,b,c+1)`.
pub fn build_conv_c(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(0.0, 0.0, 1.0, 0.0), n);
    assemble("conv_c", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("conv_c", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?
            * nonzero("conv_c", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n, i.k, (nn + k + a + b + c + 2.0) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k, -(nn - k + a) * (k + b + c + 1.0) / den),
            (i.n - 1, i.k - 1, -(k + b) * (nn + k + b + c + 1.0) / den),
            (i.n, i.k - 1, (k + b) * (nn - k + 1.0) / den),
        ])
    })
}

/// Multiplication by `x`: `(a,b,c) → (a-1,b,c)`.
pub fn build_mult_x(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("mult_x", "a", p.a)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(-1.0, 0.0, 0.0, 0.0), n + 1);
    assemble("mult_x", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("mult_x", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?;
        Ok(vec![(i.n, i.k, (nn - k + a) / den), (i.n + 1, i.k, (nn - k + 1.0) / den)])
    })
}

/// Multiplication by `y`: `(a,b,c) → (a,b-1,c)`.
pub fn build_mult_y(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("mult_y", "b", p.b)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(0.0, -1.0, 0.0, 0.0), n + 1);
    assemble("mult_y", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("mult_y", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?
            * nonzero("mult_y", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n, i.k, (k + b) * (nn + k + b + c + 1.0) / den),
            (i.n, i.k + 1, -(k + 1.0) * (nn - k + a) / den),
            (i.n + 1, i.k, -(k + b) * (nn - k + 1.0) / den),
            (i.n + 1, i.k + 1, (k + 1.0) * (nn + k + a + b + c + 2.0) / den),
        ])
    })
}

/// Multiplication by `z`: `(a,b,c) → (a,b,c-1)`.
pub fn build_mult_z(n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    require_positive("mult_z", "c", p.c)?;
    let (a, b, c) = (p.a, p.b, p.c);
    let (dom, ran) = tags(p, false, n, p.shifted(0.0, 0.0, -1.0, 0.0), n + 1);
    assemble("mult_z", dom, ran, |i| {
        let (nn, k) = nk(i);
        let den = nonzero("mult_z", "2n+a+b+c+2", 2.0 * nn + a + b + c + 2.0, i)?
            * nonzero("mult_z", "2k+b+c+1", 2.0 * k + b + c + 1.0, i)?;
        Ok(vec![
            (i.n, i.k, (k + c) * (nn + k + b + c + 1.0) / den),
            (i.n, i.k + 1, (k + 1.0) * (nn - k + a) / den),
            (i.n + 1, i.k, -(k + c) * (nn - k + 1.0) / den),
            (i.n + 1, i.k + 1, -(k + 1.0) * (nn + k + a + b + c + 2.0) / den),
        ])
    })
}

/// Coordinate multiplication within one basis, through the lowered family
/// and back up by conversion.
pub fn build_mult_same_basis(axis: CoordAxis, n: usize, p: TriParams) -> Result<SparseOp> {
    require_three_param(p)?;
    let (mult, conv, name) = match axis {
        CoordAxis::X => (build_mult_x(n, p)?, build_conv_a(n + 1, p.shifted(-1.0, 0.0, 0.0, 0.0))?, "mult_same_x"),
        CoordAxis::Y => (build_mult_y(n, p)?, build_conv_b(n + 1, p.shifted(0.0, -1.0, 0.0, 0.0))?, "mult_same_y"),
        CoordAxis::Z => (build_mult_z(n, p)?, build_conv_c(n + 1, p.shifted(0.0, 0.0, -1.0, 0.0))?, "mult_same_z"),
    };
    let mut op = conv.compose(&mult)?;
    op.name = name.to_string();
    Ok(op)
}

fn eigen_diag(name: &str, n: usize, p: TriParams, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<SparseOp> {
    require_three_param(p)?;
    let (dom, ran) = tags(p, false, n, p, n);
    assemble(name, dom, ran, |i| {
        let (nn, k) = nk(i);
        Ok(vec![(i.n, i.k, f(nn, k))])
    })
}

/// Diagonal `-k (k+b+c+1)`.
pub fn build_eigen_diag_k(n: usize, p: TriParams) -> Result<SparseOp> {
    eigen_diag("eigen_diag_k", n, p, |_, k| -k * (k + p.b + p.c + 1.0))
}

/// Diagonal `-n (n+a+b+c+2)`.
pub fn build_eigen_diag_n(n: usize, p: TriParams) -> Result<SparseOp> {
    eigen_diag("eigen_diag_n", n, p, |nn, _| eigenvalue_n(nn as usize, p))
}

/// `μ_n = -n (n+a+b+c+2)`.
pub fn eigenvalue_n(n: usize, p: TriParams) -> f64 {
    let n = n as f64;
    -n * (n + p.a + p.b + p.c + 2.0)
}

/// Solves `(λ I - L) u = f` where `L` is the total-degree eigen-operator,
/// so `u_{n,k} = f_{n,k} / (λ - μ_n)`. A resonant degree is an error only
/// when `f` has content there (above `1e-12 ‖f‖∞`, the level of projection
/// noise); otherwise that block of `u` is zero.
pub fn helmholtz_solve(lambda: f64, f: &CoeffVec) -> Result<CoeffVec> {
    if f.basis.weighted || f.basis.params.d != 0.0 {
        return Err(Error::Usage("the diagonal solve needs an unweighted (a,b,c) basis".into()));
    }
    let p = f.basis.params;
    let noise = 1e-12 * f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut values = vec![0.0; f.values.len()];
    for (i, v) in f.values.iter().enumerate() {
        let n = linear_to_index(i).n as usize;
        let mu = eigenvalue_n(n, p);
        if (lambda - mu).abs() < 1e-12 * lambda.abs().max(1.0) {
            if v.abs() > noise {
                return Err(Error::Resonance { n, lambda, eigenvalue: mu });
            }
            continue;
        }
        values[i] = v / (lambda - mu);
    }
    CoeffVec::new(f.basis, values)
}

/// Sidecar recording what a Matrix Market file holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpDescriptor {
    pub builder: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub domain: BasisTag,
    pub range: BasisTag,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("toml")
}

impl SparseOp {
    pub fn descriptor(&self) -> OpDescriptor {
        let (rows, cols) = self.shape();
        OpDescriptor { builder: self.name.clone(), rows, cols, nnz: self.nnz(), domain: self.domain, range: self.range }
    }

    /// Matrix Market coordinate text, 1-based, entries in storage order.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        let (rows, cols) = self.shape();
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        s.push_str(&format!("% {}: {} -> {}\n", self.name, self.domain, self.range));
        s.push_str(&format!("{rows} {cols} {}\n", self.nnz()));
        for t in &self.entries {
            s.push_str(&format!("{} {} {:e}\n", t.row + 1, t.col + 1, t.value));
        }
        w.write_all(s.as_bytes()).map_err(io_err)
    }

    /// Writes `path` and its TOML sidecar.
    pub fn export(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(io_err)?;
        self.write_matrix_market(std::io::BufWriter::new(f))?;
        let toml = toml::to_string(&self.descriptor()).map_err(|e| Error::Usage(e.to_string()))?;
        std::fs::write(sidecar_path(path), toml).map_err(io_err)
    }

    /// Reads an operator written by [`SparseOp::export`].
    pub fn import(path: &Path) -> Result<SparseOp> {
        let text = std::fs::read_to_string(sidecar_path(path)).map_err(io_err)?;
        let desc: OpDescriptor = toml::from_str(&text).map_err(|e| Error::Usage(format!("bad descriptor: {e}")))?;
        let f = std::fs::File::open(path).map_err(io_err)?;
        let triplets = read_matrix_market(std::io::BufReader::new(f), desc.rows, desc.cols, desc.nnz)?;
        SparseOp::from_triplets(&desc.builder, desc.domain, desc.range, triplets)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Usage(format!("i/o: {e}"))
}

fn read_matrix_market<R: BufRead>(r: R, rows: usize, cols: usize, nnz: usize) -> Result<Vec<Triplet>> {
    let bad = |m: &str| Error::Usage(format!("malformed Matrix Market file: {m}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?.map_err(io_err)?;
    if !header.starts_with("%%MatrixMarket matrix coordinate real general") {
        return Err(bad("header"));
    }
    let mut body =
        lines.map(|l| l.map_err(io_err)).filter(|l| !matches!(l, Ok(s) if s.starts_with('%') || s.trim().is_empty()));
    let size = body.next().ok_or_else(|| bad("missing size line"))??;
    let dims: Vec<usize> =
        size.split_whitespace().map(|t| t.parse().map_err(|_| bad("size line"))).collect::<Result<_>>()?;
    if dims != [rows, cols, nnz] {
        return Err(bad("size line disagrees with descriptor"));
    }
    let mut out = Vec::with_capacity(nnz);
    for line in body {
        let line = line?;
        let mut it = line.split_whitespace();
        let (Some(r), Some(c), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(bad(&line));
        };
        let r: usize = r.parse().map_err(|_| bad(&line))?;
        let c: usize = c.parse().map_err(|_| bad(&line))?;
        let value: f64 = v.parse().map_err(|_| bad(&line))?;
        if r == 0 || c == 0 {
            return Err(bad("indices are 1-based"));
        }
        out.push(Triplet { row: r - 1, col: c - 1, value });
    }
    if out.len() != nnz {
        return Err(bad("entry count"));
    }
    Ok(out)
}
