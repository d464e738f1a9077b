//! Linear operators given by descriptions that can be evaluated, printed and
//! re-parsed, plus position-dependent sequence transforms.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::primes::is_prime;
use crate::sequences::{self, PrefixForm, PrefixSums, RealFn, SequenceSpec};
use crate::spaces::{mismatch, Norm, Space, SpaceElement, SparseVec};

const NORM_PROBE_SEED: u64 = 0x0005_eed0_f0b5;
const MIN_RANDOM_PROBES: u64 = 256;
const POWER_STEPS: usize = 200;

/// Diagonal entries `d(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagonalRule {
    /// `k` for prime `k`, else 1.
    PrimeScale,
    /// `1/k`
    Reciprocal,
    Identity,
    Constant(f64),
}

impl DiagonalRule {
    pub fn at(&self, k: u64) -> f64 {
        match self {
            DiagonalRule::PrimeScale => {
                if is_prime(k) {
                    k as f64
                } else {
                    1.0
                }
            }
            DiagonalRule::Reciprocal => 1.0 / k as f64,
            DiagonalRule::Identity => 1.0,
            DiagonalRule::Constant(c) => *c,
        }
    }

    /// `sup_k |d(k)|` when finite.
    pub fn bound(&self) -> Option<f64> {
        match self {
            DiagonalRule::PrimeScale => None,
            DiagonalRule::Reciprocal | DiagonalRule::Identity => Some(1.0),
            DiagonalRule::Constant(c) => Some(c.abs()),
        }
    }
}

impl fmt::Display for DiagonalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagonalRule::PrimeScale => write!(f, "prime_scale"),
            DiagonalRule::Reciprocal => write!(f, "reciprocal"),
            DiagonalRule::Identity => write!(f, "identity"),
            DiagonalRule::Constant(c) => write!(f, "const({c})"),
        }
    }
}

/// Weights `w(i)` of a functional on c₀₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// `w(i) = i`, unbounded on c₀₀.
    Index,
    /// `w(i) = 1/i²`, bounded by π²/6 under the sup-norm.
    InverseSquare,
}

impl WeightRule {
    pub fn at(&self, i: u64) -> f64 {
        match self {
            WeightRule::Index => i as f64,
            WeightRule::InverseSquare => 1.0 / (i as f64 * i as f64),
        }
    }

    pub fn bounded(&self) -> bool {
        matches!(self, WeightRule::InverseSquare)
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightRule::Index => "index",
            WeightRule::InverseSquare => "inverse_square",
        })
    }
}

/// A linear functional `x ↦ Σ_i w_i x_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalSpec {
    Coordinate(u64),
    DenseWeights(Vec<f64>),
    /// On c₀₀. `bounded` is advisory and never used as proof.
    SparseWeighted { rule: WeightRule, bounded: bool },
}

impl FunctionalSpec {
    pub fn coordinate(j: u64) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidArgument("coordinates are indexed from 1".into()));
        }
        Ok(FunctionalSpec::Coordinate(j))
    }

    pub fn weighted(rule: WeightRule) -> Self {
        FunctionalSpec::SparseWeighted { rule, bounded: rule.bounded() }
    }

    /// The weight on coordinate `i`.
    pub fn coeff(&self, i: u64) -> f64 {
        match self {
            FunctionalSpec::Coordinate(j) => {
                if i == *j {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionalSpec::DenseWeights(w) => w.get(i as usize - 1).copied().unwrap_or(0.0),
            FunctionalSpec::SparseWeighted { rule, .. } => rule.at(i),
        }
    }

    fn check(&self, space: Space) -> Result<()> {
        match (self, space) {
            (FunctionalSpec::Coordinate(j), Space::Dense(d)) if *j as usize > d => {
                Err(Error::DimensionMismatch { expected: d, got: *j as usize })
            }
            (FunctionalSpec::DenseWeights(w), Space::Dense(d)) if w.len() != d => {
                Err(Error::DimensionMismatch { expected: d, got: w.len() })
            }
            (FunctionalSpec::DenseWeights(_), Space::Sparse) => {
                Err(Error::SpaceMismatch { expected: "dense space".into(), got: "sparse".into() })
            }
            (FunctionalSpec::SparseWeighted { .. }, Space::Dense(d)) => {
                Err(Error::SpaceMismatch { expected: "sparse".into(), got: Space::Dense(d).to_string() })
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &SpaceElement) -> Result<f64> {
        self.check(x.space())?;
        Ok(match x {
            SpaceElement::Dense(v) => v.iter().enumerate().map(|(i, c)| self.coeff(i as u64 + 1) * c).sum(),
            SpaceElement::Sparse(s) => s.entries().iter().map(|&(i, c)| self.coeff(i) * c).sum(),
        })
    }

    /// Known bound on `|f(x)| / ‖x‖` under `norm`.
    pub fn norm_bound(&self, norm: Norm) -> Option<f64> {
        match (self, norm) {
            (FunctionalSpec::Coordinate(_), _) => Some(1.0),
            (FunctionalSpec::DenseWeights(w), Norm::Sup) => Some(w.iter().map(|c| c.abs()).sum()),
            (FunctionalSpec::DenseWeights(w), Norm::P(p)) => {
                let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
                Some(if q.is_infinite() {
                    w.iter().fold(0.0, |m, c| m.max(c.abs()))
                } else {
                    w.iter().map(|c| c.abs().powf(q)).sum::<f64>().powf(1.0 / q)
                })
            }
            (FunctionalSpec::SparseWeighted { rule: WeightRule::InverseSquare, .. }, Norm::Sup) => {
                Some(std::f64::consts::PI.powi(2) / 6.0)
            }
            _ => None,
        }
    }
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalSpec::Coordinate(j) => write!(f, "coord({j})"),
            FunctionalSpec::DenseWeights(w) => {
                write!(f, "weights[")?;
                for (i, c) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")
            }
            FunctionalSpec::SparseWeighted { rule, .. } => write!(f, "weighted({rule})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Diagonal { rule: DiagonalRule, space: Space },
    RankOne { functional: FunctionalSpec, y0: SpaceElement, domain: Space },
    /// Sum of rank-one terms `x ↦ f_j(x) y_j`.
    FiniteRank { terms: Vec<(FunctionalSpec, SpaceElement)>, domain: Space },
    Matrix { rows: Vec<Vec<f64>> },
    /// `outer ∘ inner`
    Compose(Box<OperatorSpec>, Box<OperatorSpec>),
    /// `α·S + β·T`
    LinearCombo(f64, Box<OperatorSpec>, f64, Box<OperatorSpec>),
}

/// A validated linear map between two spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    domain: Space,
    codomain: Space,
}

impl OperatorSpec {
    pub fn diagonal(rule: DiagonalRule, space: Space) -> Self {
        Self { kind: OperatorKind::Diagonal { rule, space }, domain: space, codomain: space }
    }

    pub fn identity(space: Space) -> Self {
        Self::diagonal(DiagonalRule::Identity, space)
    }

    pub fn rank_one(functional: FunctionalSpec, y0: SpaceElement, domain: Space) -> Result<Self> {
        functional.check(domain)?;
        let codomain = y0.space();
        Ok(Self { kind: OperatorKind::RankOne { functional, y0, domain }, domain, codomain })
    }

    pub fn finite_rank(terms: Vec<(FunctionalSpec, SpaceElement)>, domain: Space) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument("finite_rank needs at least one term".into()));
        };
        let codomain = first.1.space();
        for (f, y) in &terms {
            f.check(domain)?;
            if y.space() != codomain {
                return Err(mismatch(codomain, y.space()));
            }
        }
        Ok(Self { kind: OperatorKind::FiniteRank { terms, domain }, domain, codomain })
    }

    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if cols == 0 {
            return Err(Error::InvalidArgument("matrix needs at least one row and one column".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
        }
        if rows.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let (domain, codomain) = (Space::Dense(cols), Space::Dense(rows.len()));
        Ok(Self { kind: OperatorKind::Matrix { rows }, domain, codomain })
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: OperatorSpec, inner: OperatorSpec) -> Result<Self> {
        if inner.codomain != outer.domain {
            return Err(mismatch(outer.domain, inner.codomain));
        }
        let (domain, codomain) = (inner.domain, outer.codomain);
        Ok(Self { kind: OperatorKind::Compose(Box::new(outer), Box::new(inner)), domain, codomain })
    }

    /// `α·S + β·T`.
    pub fn linear_combo(alpha: f64, s: OperatorSpec, beta: f64, t: OperatorSpec) -> Result<Self> {
        if s.domain != t.domain {
            return Err(mismatch(s.domain, t.domain));
        }
        if s.codomain != t.codomain {
            return Err(mismatch(s.codomain, t.codomain));
        }
        let (domain, codomain) = (s.domain, s.codomain);
        Ok(Self { kind: OperatorKind::LinearCombo(alpha, Box::new(s), beta, Box::new(t)), domain, codomain })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn domain(&self) -> Space {
        self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    /// Whether the description carries an explicit norm bound. Used to pick
    /// operators for checks about norm-bounded maps, never as proof.
    pub fn has_norm_bound(&self) -> bool {
        match &self.kind {
            OperatorKind::Diagonal { rule, .. } => rule.bound().is_some(),
            OperatorKind::RankOne { functional, domain, .. } => functional.norm_bound(Norm::default_for(*domain)).is_some(),
            OperatorKind::FiniteRank { terms, domain } => {
                terms.iter().all(|(f, _)| f.norm_bound(Norm::default_for(*domain)).is_some())
            }
            OperatorKind::Matrix { .. } => true,
            OperatorKind::Compose(a, b) => a.has_norm_bound() && b.has_norm_bound(),
            OperatorKind::LinearCombo(_, a, _, b) => a.has_norm_bound() && b.has_norm_bound(),
        }
    }

    pub fn apply(&self, x: &SpaceElement) -> Result<SpaceElement> {
        if x.space() != self.domain {
            return Err(mismatch(self.domain, x.space()));
        }
        match &self.kind {
            OperatorKind::Diagonal { rule, .. } => Ok(match x {
                SpaceElement::Sparse(s) => SpaceElement::Sparse(s.map_values(|k, v| rule.at(k) * v)),
                SpaceElement::Dense(v) => {
                    SpaceElement::Dense(v.iter().enumerate().map(|(i, c)| rule.at(i as u64 + 1) * c).collect())
                }
            }),
            OperatorKind::RankOne { functional, y0, .. } => Ok(y0.scale(functional.eval(x)?)),
            OperatorKind::FiniteRank { terms, .. } => {
                let mut out = SpaceElement::zero(self.codomain);
                for (f, y) in terms {
                    out = out.axpby(1.0, y, f.eval(x)?)?;
                }
                Ok(out)
            }
            OperatorKind::Matrix { rows } => {
                let v = x.as_dense().expect("domain checked");
                Ok(SpaceElement::Dense(rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()))
            }
            OperatorKind::Compose(outer, inner) => outer.apply(&inner.apply(x)?),
            OperatorKind::LinearCombo(a, s, b, t) => s.apply(x)?.axpby(*a, &t.apply(x)?, *b),
        }
    }
}

fn fmt_space_suffix(space: Space) -> String {
    match space {
        Space::Dense(d) => format!("dim={d}"),
        Space::Sparse => "sparse".into(),
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            OperatorKind::Diagonal { rule, space } => match space {
                Space::Sparse => write!(f, "diag({rule})"),
                Space::Dense(_) => write!(f, "diag({rule}, {})", fmt_space_suffix(*space)),
            },
            OperatorKind::RankOne { functional, y0, domain } => {
                if *domain == y0.space() {
                    write!(f, "rank1({functional}, {y0})")
                } else {
                    write!(f, "rank1({functional}, {y0}, {})", fmt_space_suffix(*domain))
                }
            }
            OperatorKind::FiniteRank { terms, domain } => {
                write!(f, "finite_rank(")?;
                for (i, (func, y)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    if *domain == y.space() {
                        write!(f, "rank1({func}, {y})")?;
                    } else {
                        write!(f, "rank1({func}, {y}, {})", fmt_space_suffix(*domain))?;
                    }
                }
                write!(f, ")")
            }
            OperatorKind::Matrix { rows } => {
                write!(f, "matrix[")?;
                for (i, r) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "[")?;
                    for (j, c) in r.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "]")
            }
            OperatorKind::Compose(a, b) => write!(f, "compose({a}, {b})"),
            OperatorKind::LinearCombo(a, s, b, t) => write!(f, "combo({a}, {s}, {b}, {t})"),
        }
    }
}

/// Position-dependent rules `(n, x_n) ↦ y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformRule {
    /// `n·x_n` for prime `n`, else `x_n`.
    PrimeScaleByPosition,
}

/// A map on sequences that looks at the position of each term. Not a linear
/// operator on the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceTransform {
    pub rule: TransformRule,
}

impl SequenceTransform {
    pub fn prime_scale_by_position() -> Self {
        Self { rule: TransformRule::PrimeScaleByPosition }
    }

    pub fn factor(&self, n: u64) -> f64 {
        match self.rule {
            TransformRule::PrimeScaleByPosition => {
                if is_prime(n) {
                    n as f64
                } else {
                    1.0
                }
            }
        }
    }

    pub fn apply(&self, n: u64, x: &SpaceElement) -> SpaceElement {
        x.scale(self.factor(n))
    }
}

impl fmt::Display for SequenceTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            TransformRule::PrimeScaleByPosition => write!(f, "transform(prime_scale_by_position)"),
        }
    }
}

/// Anything that turns a sequence into an image sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Mapping {
    Operator(OperatorSpec),
    Transform(SequenceTransform),
}

impl Mapping {
    /// `None` for transforms, which act on any space.
    pub fn domain(&self) -> Option<Space> {
        match self {
            Mapping::Operator(op) => Some(op.domain()),
            Mapping::Transform(_) => None,
        }
    }

    pub fn as_operator(&self) -> Option<&OperatorSpec> {
        match self {
            Mapping::Operator(op) => Some(op),
            Mapping::Transform(_) => None,
        }
    }
}

impl From<OperatorSpec> for Mapping {
    fn from(op: OperatorSpec) -> Self {
        Mapping::Operator(op)
    }
}

impl From<SequenceTransform> for Mapping {
    fn from(t: SequenceTransform) -> Self {
        Mapping::Transform(t)
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mapping::Operator(op) => write!(f, "{op}"),
            Mapping::Transform(t) => write!(f, "{t}"),
        }
    }
}

/// `n ↦ S(x_n)`, or `n ↦ rule(n, x_n)` for transforms.
pub fn image_sequence(mapping: &Mapping, seq: &SequenceSpec) -> Result<SequenceSpec> {
    let label = format!("apply({mapping}, {})", seq.label());
    match mapping {
        Mapping::Transform(t) => {
            let t = *t;
            Ok(sequences::scaled_by_position(seq, Arc::new(move |n| t.factor(n)), label))
        }
        Mapping::Operator(op) => Ok(operator_image(op, seq)?.with_label(label)),
    }
}

fn operator_image(op: &OperatorSpec, seq: &SequenceSpec) -> Result<SequenceSpec> {
    if seq.space() != op.domain() {
        return Err(mismatch(op.domain(), seq.space()));
    }
    if let Some(p) = seq.prefix_form() {
        if let Some(s) = prefix_image(op, seq, p)? {
            return Ok(s);
        }
    }
    let norm = if op.codomain() == seq.space() { seq.norm() } else { Norm::default_for(op.codomain()) };
    let (op2, inner) = (op.clone(), seq.clone());
    Ok(SequenceSpec::from_fn("image", op.codomain(), norm, seq.seed(), move |n| op2.apply(&inner.element(n)?)))
}

/// Scalar sequence `n ↦ f(x_n)` for a prefix-form sequence.
fn functional_along(f: &FunctionalSpec, p: &PrefixForm) -> Result<RealFn> {
    let (w, f2) = (p.weights.clone(), f.clone());
    let sums = PrefixSums::new(Arc::new(move |i| if i == 0 { 0.0 } else { f2.coeff(i) * w(i) }));
    let mut parts: Vec<(RealFn, f64)> = Vec::with_capacity(p.low_rank.len());
    for (r, v) in &p.low_rank {
        parts.push((r.clone(), f.eval(&SpaceElement::Sparse(v.clone()))?));
    }
    let scale = p.scale.clone();
    Ok(Arc::new(move |n| {
        let mut acc = sums.get(n);
        for (r, fv) in &parts {
            acc += r(n) * fv;
        }
        match &scale {
            Some(s) => s(n) * acc,
            None => acc,
        }
    }))
}

/// Keeps the prefix structure where the algebra allows it.
fn prefix_image(op: &OperatorSpec, seq: &SequenceSpec, p: &PrefixForm) -> Result<Option<SequenceSpec>> {
    let zero_weights: RealFn = Arc::new(|_| 0.0);
    Ok(match op.kind() {
        OperatorKind::Diagonal { rule, .. } => {
            let (rule, w) = (*rule, p.weights.clone());
            let form = PrefixForm {
                weights: Arc::new(move |i| rule.at(i) * w(i)),
                scale: p.scale.clone(),
                low_rank: p.low_rank.iter().map(|(r, v)| (r.clone(), v.map_values(|k, c| rule.at(k) * c))).collect(),
            };
            Some(SequenceSpec::from_prefix("image", form))
        }
        OperatorKind::RankOne { functional, y0, .. } => {
            let r = functional_along(functional, p)?;
            match y0 {
                SpaceElement::Sparse(y) => Some(SequenceSpec::from_prefix(
                    "image",
                    PrefixForm { weights: zero_weights, scale: None, low_rank: vec![(r, y.clone())] },
                )),
                SpaceElement::Dense(_) => {
                    let y = y0.clone();
                    Some(SequenceSpec::from_fn("image", y0.space(), Norm::default_for(y0.space()), None, move |n| {
                        Ok(y.scale(r(n)))
                    }))
                }
            }
        }
        OperatorKind::FiniteRank { terms, .. } if op.codomain() == Space::Sparse => {
            let mut low_rank: Vec<(RealFn, SparseVec)> = Vec::with_capacity(terms.len());
            for (f, y) in terms {
                low_rank.push((functional_along(f, p)?, y.as_sparse().expect("sparse codomain").clone()));
            }
            Some(SequenceSpec::from_prefix("image", PrefixForm { weights: zero_weights, scale: None, low_rank }))
        }
        OperatorKind::Compose(outer, inner) => Some(operator_image(outer, &operator_image(inner, seq)?)?),
        OperatorKind::LinearCombo(a, s, b, t) => {
            Some(sequences::combine(&operator_image(s, seq)?, &operator_image(t, seq)?, *a, *b)?)
        }
        _ => None,
    })
}

/// Lower bound on `‖S‖` from coordinate vectors `e_1..e_probes` and at least
/// 256 seeded random probes. On ℝ^d the best probe is refined by power
/// iteration on the assembled matrix; every candidate ratio is measured
/// through [`OperatorSpec::apply`].
pub fn operator_norm_estimate(op: &OperatorSpec, probes: u64) -> Result<f64> {
    if probes == 0 {
        return Err(Error::InvalidArgument("probes must be at least 1".into()));
    }
    let (dn, cn) = (Norm::default_for(op.domain()), Norm::default_for(op.codomain()));
    let ratio = |x: &SpaceElement| -> Result<f64> {
        let r = x.norm(dn)?;
        Ok(if r == 0.0 { 0.0 } else { op.apply(x)?.norm(cn)? / r })
    };
    let coord_count = match op.domain() {
        Space::Dense(d) => probes.min(d as u64),
        Space::Sparse => probes,
    };
    let coord_best = par::try_map_indices(coord_count, |k| ratio(&SpaceElement::unit(op.domain(), k)))?
        .into_iter()
        .fold(0.0f64, f64::max);

    let random = random_probes(op.domain(), probes.max(MIN_RANDOM_PROBES), probes);
    let ratios = par::map_slice(&random, ratio).into_iter().collect::<Result<Vec<_>>>()?;
    let (mut best, best_idx) = ratios
        .iter()
        .enumerate()
        .fold((coord_best, None), |acc, (i, &r)| if r > acc.0 { (r, Some(i)) } else { acc });

    if let Space::Dense(d) = op.domain() {
        // Columns of the matrix, then power iteration on AᵀA.
        let cols: Vec<Vec<f64>> = (1..=d as u64)
            .map(|k| op.apply(&SpaceElement::unit(op.domain(), k)).map(|y| y.as_dense().map(<[f64]>::to_vec)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .unwrap_or_default();
        if cols.len() == d {
            let mut x: Vec<f64> = match best_idx {
                Some(i) => random[i].as_dense().expect("dense probe").to_vec(),
                None => vec![1.0; d],
            };
            for _ in 0..POWER_STEPS {
                let ax: Vec<f64> = (0..cols[0].len()).map(|r| (0..d).map(|c| cols[c][r] * x[c]).sum()).collect();
                let atax: Vec<f64> = (0..d).map(|c| cols[c].iter().zip(&ax).map(|(a, b)| a * b).sum()).collect();
                let n = atax.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n == 0.0 {
                    break;
                }
                x = atax.into_iter().map(|v| v / n).collect();
            }
            best = best.max(ratio(&SpaceElement::Dense(x))?);
        }
    }
    Ok(best)
}

fn random_probes(space: Space, count: u64, spread: u64) -> Vec<SpaceElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_PROBE_SEED);
    (0..count)
        .map(|_| match space {
            Space::Dense(d) => SpaceElement::Dense((0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()),
            Space::Sparse => {
                let top = spread.max(16);
                let k = rng.random_range(1..=4usize);
                let mut pairs: Vec<(u64, f64)> = Vec::with_capacity(k);
                while pairs.len() < k {
                    let i = rng.random_range(1..=top);
                    if pairs.iter().all(|p| p.0 != i) {
                        pairs.push((i, rng.random_range(-1.0..=1.0)));
                    }
                }
                SpaceElement::Sparse(SparseVec::from_pairs(pairs).expect("valid probe"))
            }
        })
        .collect()
}
