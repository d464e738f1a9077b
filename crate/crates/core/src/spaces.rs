//! Elements of finite-dimensional spaces and of c₀₀, with their norms.

use std::fmt;

use crate::error::{Error, Result};

/// Which space an element (or sequence, or operator side) lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Dense(usize),
    Sparse,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Dense(d) => write!(f, "dense({d})"),
            Space::Sparse => write!(f, "sparse"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Sup,
    /// `p >= 1`; dense elements only.
    P(f64),
}

impl Norm {
    /// The norm a space carries unless told otherwise: Euclidean on ℝ^d,
    /// supremum on c₀₀.
    pub fn default_for(space: Space) -> Norm {
        match space {
            Space::Dense(_) => Norm::P(2.0),
            Space::Sparse => Norm::Sup,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Sup => write!(f, "sup"),
            Norm::P(p) => write!(f, "p{p}"),
        }
    }
}

/// Finitely supported real sequence. Entries are sorted by index, indices
/// start at 1 and no stored value is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    entries: Vec<(u64, f64)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from arbitrary pairs. Zeros are dropped; duplicate or zero
    /// indices and non-finite values are rejected.
    pub fn from_pairs<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self> {
        let mut entries: Vec<(u64, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        if entries.iter().any(|e| e.0 == 0) {
            return Err(Error::InvalidElement("sparse indices start at 1".into()));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidElement("duplicate sparse index".into()));
        }
        if entries.iter().any(|e| !e.1.is_finite()) {
            return Err(Error::InvalidElement("non-finite coordinate".into()));
        }
        entries.retain(|e| e.1 != 0.0);
        Ok(Self { entries })
    }

    /// Caller guarantees sorted unique positive indices; zeros are pruned.
    pub(crate) fn from_sorted_unchecked(mut entries: Vec<(u64, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        entries.retain(|e| e.1 != 0.0);
        Self { entries }
    }

    pub fn unit(k: u64) -> Self {
        debug_assert!(k >= 1);
        Self { entries: vec![(k, 1.0)] }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.last().map(|e| e.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: u64) -> f64 {
        match self.entries.binary_search_by_key(&k, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.1.abs()))
    }

    /// `alpha * self + beta * other`, merged in index order.
    pub fn axpby(&self, alpha: f64, other: &SparseVec, beta: f64) -> SparseVec {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    (x.0, alpha * x.1 + beta * y.1)
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    (x.0, alpha * x.1)
                }
                (Some(x), None) => {
                    i += 1;
                    (x.0, alpha * x.1)
                }
                (_, Some(y)) => {
                    j += 1;
                    (y.0, beta * y.1)
                }
                (None, None) => unreachable!(),
            };
            if next.1 != 0.0 {
                out.push(next);
            }
        }
        SparseVec { entries: out }
    }

    /// `sup_k |self_k - other_k|` without materialising the difference.
    pub fn sup_distance(&self, other: &SparseVec) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut m = 0.0f64;
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    x.1 - y.1
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    x.1
                }
                (Some(x), None) => {
                    i += 1;
                    x.1
                }
                (_, Some(y)) => {
                    j += 1;
                    y.1
                }
                (None, None) => unreachable!(),
            };
            m = m.max(d.abs());
        }
        m
    }

    pub fn map_values(&self, f: impl Fn(u64, f64) -> f64) -> SparseVec {
        SparseVec::from_sorted_unchecked(self.entries.iter().map(|&(k, v)| (k, f(k, v))).collect())
    }
}

/// A vector in ℝ^d or in c₀₀.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceElement {
    Dense(Vec<f64>),
    Sparse(SparseVec),
}

impl SpaceElement {
    pub fn dense(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidElement("dense elements need dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidElement("non-finite coordinate".into()));
        }
        Ok(SpaceElement::Dense(coords))
    }

    pub fn sparse<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self> {
        Ok(SpaceElement::Sparse(SparseVec::from_pairs(pairs)?))
    }

    pub fn zero(space: Space) -> Self {
        match space {
            Space::Dense(d) => SpaceElement::Dense(vec![0.0; d]),
            Space::Sparse => SpaceElement::Sparse(SparseVec::new()),
        }
    }

    /// The k-th unit vector of c₀₀, or of ℝ^d with `k` taken cyclically.
    pub fn unit(space: Space, k: u64) -> Self {
        match space {
            Space::Dense(d) => {
                let mut v = vec![0.0; d];
                v[((k - 1) % d as u64) as usize] = 1.0;
                SpaceElement::Dense(v)
            }
            Space::Sparse => SpaceElement::Sparse(SparseVec::unit(k)),
        }
    }

    pub fn space(&self) -> Space {
        match self {
            SpaceElement::Dense(v) => Space::Dense(v.len()),
            SpaceElement::Sparse(_) => Space::Sparse,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SpaceElement::Dense(v) => v.iter().all(|&c| c == 0.0),
            SpaceElement::Sparse(s) => s.is_empty(),
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseVec> {
        match self {
            SpaceElement::Sparse(s) => Some(s),
            SpaceElement::Dense(_) => None,
        }
    }

    pub fn as_dense(&self) -> Option<&[f64]> {
        match self {
            SpaceElement::Dense(v) => Some(v),
            SpaceElement::Sparse(_) => None,
        }
    }

    pub fn norm(&self, nrm: Norm) -> Result<f64> {
        match (self, nrm) {
            (SpaceElement::Sparse(s), Norm::Sup) => Ok(s.sup_norm()),
            (SpaceElement::Sparse(_), Norm::P(_)) => Err(Error::PNormOnSparse),
            (SpaceElement::Dense(v), Norm::Sup) => Ok(v.iter().fold(0.0, |m, c| m.max(c.abs()))),
            (SpaceElement::Dense(v), Norm::P(p)) => p_norm(v.iter().copied(), p),
        }
    }

    /// `‖self − other‖` without allocating the difference for sparse inputs.
    pub fn distance(&self, other: &SpaceElement, nrm: Norm) -> Result<f64> {
        match (self, other) {
            (SpaceElement::Sparse(a), SpaceElement::Sparse(b)) => match nrm {
                Norm::Sup => Ok(a.sup_distance(b)),
                Norm::P(_) => Err(Error::PNormOnSparse),
            },
            (SpaceElement::Dense(a), SpaceElement::Dense(b)) => {
                check_dims(a.len(), b.len())?;
                let diffs = a.iter().zip(b).map(|(x, y)| x - y);
                match nrm {
                    Norm::Sup => Ok(diffs.fold(0.0, |m, c| m.max(c.abs()))),
                    Norm::P(p) => p_norm(diffs, p),
                }
            }
            _ => Err(mismatch(self.space(), other.space())),
        }
    }

    pub fn add(&self, other: &SpaceElement) -> Result<SpaceElement> {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SpaceElement) -> Result<SpaceElement> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn scale(&self, alpha: f64) -> SpaceElement {
        match self {
            SpaceElement::Dense(v) => SpaceElement::Dense(v.iter().map(|c| alpha * c).collect()),
            SpaceElement::Sparse(s) => SpaceElement::Sparse(s.map_values(|_, c| alpha * c)),
        }
    }

    /// `alpha·self + beta·other`.
    pub fn axpby(&self, alpha: f64, other: &SpaceElement, beta: f64) -> Result<SpaceElement> {
        match (self, other) {
            (SpaceElement::Dense(a), SpaceElement::Dense(b)) => {
                check_dims(a.len(), b.len())?;
                Ok(SpaceElement::Dense(a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()))
            }
            (SpaceElement::Sparse(a), SpaceElement::Sparse(b)) => Ok(SpaceElement::Sparse(a.axpby(alpha, b, beta))),
            _ => Err(mismatch(self.space(), other.space())),
        }
    }

    /// Coordinate `k` (1-based); zero outside the support or dimension.
    pub fn coord(&self, k: u64) -> f64 {
        match self {
            SpaceElement::Dense(v) => v.get((k as usize).wrapping_sub(1)).copied().unwrap_or(0.0),
            SpaceElement::Sparse(s) => s.get(k),
        }
    }
}

fn p_norm(values: impl Iterator<Item = f64>, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p-norm needs finite p >= 1, got {p}")));
    }
    let vals: Vec<f64> = values.map(f64::abs).collect();
    let scale = vals.iter().fold(0.0f64, |m, &c| m.max(c));
    if scale == 0.0 {
        return Ok(0.0);
    }
    if p == 2.0 {
        return Ok(scale * vals.iter().map(|c| (c / scale).powi(2)).sum::<f64>().sqrt());
    }
    Ok(scale * vals.iter().map(|c| (c / scale).powf(p)).sum::<f64>().powf(1.0 / p))
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn mismatch(expected: Space, got: Space) -> Error {
    Error::SpaceMismatch { expected: expected.to_string(), got: got.to_string() }
}

impl fmt::Display for SpaceElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceElement::Dense(v) => {
                let items: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "dense[{}]", items.join(","))
            }
            SpaceElement::Sparse(s) => {
                let items: Vec<String> = s.entries.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                write!(f, "sparse{{{}}}", items.join(", "))
            }
        }
    }
}
