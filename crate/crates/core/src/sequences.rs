//! Deterministic sequences `n ↦ x_n` of space elements.
//!
//! Most sequences are plain generators. Sequences in c₀₀ whose terms are
//! growing prefixes, like `(1, 1/2, …, 1/n, 0, …)`, are kept in a structured
//! [`PrefixForm`] so that distances to a fixed element can be computed for
//! all `n <= H` in O(H) instead of O(H²). Diagonal and rank-one images and
//! position-dependent scalings of such sequences stay in that form.

use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{IndexSet, SetKind};
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{mismatch, Norm, Space, SpaceElement, SparseVec};

pub type ElementFn = Arc<dyn Fn(u64) -> Result<SpaceElement> + Send + Sync>;
pub type RealFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Index-probe cap for locating subsequence members.
pub const DEFAULT_SUBSEQUENCE_CAP: u64 = 100_000_000;

#[derive(Clone)]
enum Repr {
    Generic(ElementFn),
    Prefix(PrefixForm),
}

/// A sequence of elements of one space, with the norm it is measured in.
///
/// The label is a descriptor in the sequence grammar and re-parses to an
/// equivalent sequence for every sequence built by this crate.
#[derive(Clone)]
pub struct SequenceSpec {
    label: String,
    space: Space,
    norm: Norm,
    seed: Option<u64>,
    repr: Repr,
}

impl fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceSpec({} in {} with {} norm)", self.label, self.space, self.norm)
    }
}

impl SequenceSpec {
    /// Wraps an arbitrary generator. The generator must return elements of
    /// `space` for every `n >= 1`.
    pub fn from_fn(
        label: impl Into<String>,
        space: Space,
        norm: Norm,
        seed: Option<u64>,
        generator: impl Fn(u64) -> Result<SpaceElement> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), space, norm, seed, repr: Repr::Generic(Arc::new(generator)) }
    }

    pub(crate) fn from_prefix(label: impl Into<String>, form: PrefixForm) -> Self {
        Self { label: label.into(), space: Space::Sparse, norm: Norm::Sup, seed: None, repr: Repr::Prefix(form) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn prefix_form(&self) -> Option<&PrefixForm> {
        match &self.repr {
            Repr::Prefix(p) => Some(p),
            Repr::Generic(_) => None,
        }
    }

    /// `x_n`, 1-based.
    pub fn element(&self, n: u64) -> Result<SpaceElement> {
        if n == 0 {
            return Err(Error::InvalidArgument("sequences are indexed from 1".into()));
        }
        match &self.repr {
            Repr::Generic(g) => g(n),
            Repr::Prefix(p) => Ok(SpaceElement::Sparse(p.element(n))),
        }
    }

    /// `‖x_k − c‖` for `k = 1..=horizon`.
    pub fn distances(&self, c: &SpaceElement, horizon: u64) -> Result<Vec<f64>> {
        if c.space() != self.space {
            return Err(mismatch(self.space, c.space()));
        }
        if let (Repr::Prefix(p), SpaceElement::Sparse(cs)) = (&self.repr, c) {
            if let Some(d) = p.distances(cs, horizon) {
                return Ok(d);
            }
        }
        self.distances_generic(c, horizon)
    }

    /// Element-by-element evaluation, bypassing any structured shortcut.
    pub fn distances_generic(&self, c: &SpaceElement, horizon: u64) -> Result<Vec<f64>> {
        if c.space() != self.space {
            return Err(mismatch(self.space, c.space()));
        }
        let norm = self.norm;
        par::try_map_indices(horizon, |k| self.element(k)?.distance(c, norm))
    }

    /// `‖x_k‖` for `k = 1..=horizon`.
    pub fn norms(&self, horizon: u64) -> Result<Vec<f64>> {
        self.distances(&SpaceElement::zero(self.space), horizon)
    }

    /// `x_1, …, x_horizon`.
    pub fn elements(&self, horizon: u64) -> Result<Vec<SpaceElement>> {
        par::try_map_indices(horizon, |k| self.element(k))
    }
}

/// Cumulative sums `Σ_{i<=n} t_i`, extended on demand and shared between
/// threads. Summation always runs in index order.
pub(crate) struct PrefixSums {
    terms: RealFn,
    table: RwLock<Vec<f64>>,
}

impl PrefixSums {
    pub(crate) fn new(terms: RealFn) -> Arc<Self> {
        Arc::new(Self { terms, table: RwLock::new(vec![0.0]) })
    }

    pub(crate) fn get(&self, n: u64) -> f64 {
        let n = n as usize;
        {
            let t = self.table.read().expect("prefix table poisoned");
            if n < t.len() {
                return t[n];
            }
        }
        let mut t = self.table.write().expect("prefix table poisoned");
        let target = (n + 1).max(2 * t.len()).max(1024);
        let mut acc = *t.last().expect("table starts at 0");
        for i in t.len()..target {
            acc += (self.terms)(i as u64);
            t.push(acc);
        }
        t[n]
    }
}

/// `x_n = s(n) · ( Σ_{i<=n} w_i e_i + Σ_j r_j(n) v_j )` in c₀₀.
#[derive(Clone)]
pub(crate) struct PrefixForm {
    pub(crate) weights: RealFn,
    pub(crate) scale: Option<RealFn>,
    pub(crate) low_rank: Vec<(RealFn, SparseVec)>,
}

impl PrefixForm {
    pub(crate) fn element(&self, n: u64) -> SparseVec {
        let mut x = SparseVec::from_sorted_unchecked((1..=n).map(|i| (i, (self.weights)(i))).collect());
        for (r, v) in &self.low_rank {
            x = x.axpby(1.0, v, r(n));
        }
        match &self.scale {
            Some(s) => {
                let s = s(n);
                x.map_values(|_, c| s * c)
            }
            None => x,
        }
    }

    /// Union of the low-rank supports, sorted.
    fn low_rank_support(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.low_rank.iter().flat_map(|(_, v)| v.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Sup-distances to `c` for `k = 1..=horizon`, or `None` when the
    /// structure gives no shortcut (a position-dependent scale with nonzero `c`).
    fn distances(&self, c: &SparseVec, horizon: u64) -> Option<Vec<f64>> {
        if self.scale.is_some() && !c.is_empty() {
            return None;
        }
        let h = horizon as usize;
        let s_l = self.low_rank_support();
        let (c_l, c_c): (Vec<(u64, f64)>, Vec<(u64, f64)>) =
            c.entries().iter().partition(|e| s_l.binary_search(&e.0).is_ok());

        let w: Vec<f64> = par::map_indices(horizon, |i| (self.weights)(i));
        let wi = |i: u64| w[i as usize - 1];

        let mut excluded = vec![false; h + 1];
        for &i in s_l.iter().chain(c_c.iter().map(|e| &e.0)) {
            if i as usize <= h {
                excluded[i as usize] = true;
            }
        }

        // Running max over i <= k of |w_i - c_i| (c_i = 0 outside supp c),
        // skipping the low-rank coordinates which are handled per k.
        let mut base = vec![0.0f64; h + 1];
        let mut run = 0.0f64;
        let mut cp = c_c.iter().peekable();
        for k in 1..=h {
            if !excluded[k] {
                run = run.max(wi(k as u64).abs());
            }
            while let Some(&&(i, ci)) = cp.peek() {
                if i as usize > k {
                    break;
                }
                run = run.max((wi(i) - ci).abs());
                cp.next();
            }
            base[k] = run;
        }
        // Coordinates of c beyond k are matched by zeros of x_k.
        let mut tail = c_c.iter().filter(|e| e.0 as usize > h).fold(0.0f64, |m, e| m.max(e.1.abs()));
        let mut rev = c_c.iter().rev().filter(|e| e.0 as usize <= h).peekable();
        for k in (1..=h).rev() {
            base[k] = base[k].max(tail);
            while let Some(&&(i, ci)) = rev.peek() {
                if (i as usize) < k {
                    break;
                }
                tail = tail.max(ci.abs());
                rev.next();
            }
        }

        let lr_vals: Vec<Vec<f64>> =
            self.low_rank.iter().map(|(_, v)| s_l.iter().map(|&i| v.get(i)).collect()).collect();
        let c_at: Vec<f64> = s_l
            .iter()
            .map(|i| c_l.iter().find(|e| e.0 == *i).map_or(0.0, |e| e.1))
            .collect();
        let w_at: Vec<f64> = s_l.iter().map(|&i| if i as usize <= h { wi(i) } else { 0.0 }).collect();

        Some(par::map_indices(horizon, |k| {
            let mut d = base[k as usize];
            if !s_l.is_empty() {
                let r: Vec<f64> = self.low_rank.iter().map(|(rf, _)| rf(k)).collect();
                for (t, &i) in s_l.iter().enumerate() {
                    let mut val = if i <= k { w_at[t] } else { 0.0 };
                    for (j, rj) in r.iter().enumerate() {
                        val += rj * lr_vals[j][t];
                    }
                    d = d.max((val - c_at[t]).abs());
                }
            }
            match &self.scale {
                Some(s) => s(k).abs() * d,
                None => d,
            }
        }))
    }

    pub(crate) fn rescaled(&self, factor: RealFn) -> PrefixForm {
        let scale: RealFn = match &self.scale {
            Some(s) => {
                let s = s.clone();
                Arc::new(move |n| s(n) * factor(n))
            }
            None => factor,
        };
        PrefixForm { weights: self.weights.clone(), scale: Some(scale), low_rank: self.low_rank.clone() }
    }
}

/// How large a spike is at index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnitude {
    /// `n ↦ n`
    Index,
    Constant(f64),
}

impl Magnitude {
    pub fn at(&self, n: u64) -> f64 {
        match self {
            Magnitude::Index => n as f64,
            Magnitude::Constant(c) => *c,
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Index => write!(f, "n"),
            Magnitude::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// `x_n = (1, 1/2, …, 1/n, 0, …)` in c₀₀.
pub fn harmonic_prefix_sequence() -> SequenceSpec {
    SequenceSpec::from_prefix(
        "harmonic",
        PrefixForm { weights: Arc::new(|i| 1.0 / i as f64), scale: None, low_rank: Vec::new() },
    )
}

/// `x_n = e_n` in c₀₀.
pub fn unit_coords() -> SequenceSpec {
    SequenceSpec::from_fn("unit_coords", Space::Sparse, Norm::Sup, None, |n| {
        Ok(SpaceElement::Sparse(SparseVec::unit(n)))
    })
}

/// `x_n = e_{p_n}` with `p_n` the n-th prime.
pub fn prime_coords() -> SequenceSpec {
    SequenceSpec::from_fn("prime_coords", Space::Sparse, Norm::Sup, None, |n| {
        Ok(SpaceElement::Sparse(SparseVec::unit(crate::primes::nth_prime(n))))
    })
}

fn space_label(space: Space) -> String {
    match space {
        Space::Dense(d) => format!("dim={d}"),
        Space::Sparse => "sparse".into(),
    }
}

pub fn zero(space: Space) -> SequenceSpec {
    let z = SpaceElement::zero(space);
    SequenceSpec::from_fn(format!("zero({})", space_label(space)), space, Norm::default_for(space), None, move |_| {
        Ok(z.clone())
    })
}

pub fn constant(v: SpaceElement) -> SequenceSpec {
    let space = v.space();
    let label = format!("const({v})");
    SequenceSpec::from_fn(label, space, Norm::default_for(space), None, move |_| Ok(v.clone()))
}

/// `x_n = n` in ℝ¹.
pub fn linear() -> SequenceSpec {
    SequenceSpec::from_fn("linear", Space::Dense(1), Norm::P(2.0), None, |n| Ok(SpaceElement::Dense(vec![n as f64])))
}

/// `x_n = (−1)^n` in ℝ¹.
pub fn alternating() -> SequenceSpec {
    SequenceSpec::from_fn("alternating", Space::Dense(1), Norm::P(2.0), None, |n| {
        Ok(SpaceElement::Dense(vec![if n % 2 == 0 { 1.0 } else { -1.0 }]))
    })
}

/// Multiplies each term by a position-dependent scalar.
pub(crate) fn scaled_by_position(seq: &SequenceSpec, factor: RealFn, label: String) -> SequenceSpec {
    match &seq.repr {
        Repr::Prefix(p) => SequenceSpec::from_prefix(label, p.rescaled(factor)).with_seed(seq.seed),
        Repr::Generic(g) => {
            let g = g.clone();
            SequenceSpec::from_fn(label, seq.space, seq.norm, seq.seed, move |n| Ok(g(n)?.scale(factor(n))))
        }
    }
}

/// `x_n / n`.
pub fn decay(seq: &SequenceSpec) -> SequenceSpec {
    scaled_by_position(seq, Arc::new(|n| 1.0 / n as f64), format!("decay({})", seq.label))
}

/// `x_n = magnitude(n)·e(n)` for `n` in `spikes`, else `base_n`, where `e(n)`
/// is `e_n` in c₀₀ and `e_1` in ℝ^d.
pub fn spike_sequence(base: &SequenceSpec, spikes: IndexSet, magnitude: Magnitude) -> SequenceSpec {
    let space = base.space;
    let label = if base.label == "zero(dim=1)" {
        format!("spike({spikes}, {magnitude})")
    } else {
        format!("spike({spikes}, {magnitude}, {})", base.label)
    };
    let b = base.clone();
    SequenceSpec::from_fn(label, space, base.norm, base.seed, move |n| {
        if spikes.contains(n) {
            let e = match space {
                Space::Sparse => SpaceElement::unit(space, n),
                Space::Dense(_) => SpaceElement::unit(space, 1),
            };
            Ok(e.scale(magnitude.at(n)))
        } else {
            b.element(n)
        }
    })
}

struct MemberCache {
    members: Vec<u64>,
    scanned: u64,
}

/// `y_k = x_{m_k}` where `m_k` is the k-th smallest member of `along`.
pub fn subsequence(seq: &SequenceSpec, along: IndexSet, cap: u64) -> SequenceSpec {
    let label = format!("subseq({}, {along})", seq.label);
    let inner = seq.clone();
    let closed = matches!(along.kind(), SetKind::Multiples(_) | SetKind::Squares | SetKind::Primes);
    let cache = Arc::new(Mutex::new(MemberCache { members: Vec::new(), scanned: 0 }));
    SequenceSpec::from_fn(label, seq.space, seq.norm, seq.seed, move |k| {
        let m = if closed {
            along.nth_member(k, cap)?
        } else {
            let mut c = cache.lock().expect("member cache poisoned");
            while (c.members.len() as u64) < k && c.scanned < cap {
                let end = (c.scanned + c.scanned.max(1024)).min(cap);
                for n in c.scanned + 1..=end {
                    if along.contains(n) {
                        c.members.push(n);
                    }
                }
                c.scanned = end;
            }
            match c.members.get(k as usize - 1) {
                Some(&m) => m,
                None => {
                    return Err(Error::HorizonExhausted {
                        set: along.to_string(),
                        wanted: k,
                        found: c.members.len() as u64,
                        cap,
                    })
                }
            }
        };
        inner.element(m)
    })
}

fn fmt_scalar(x: f64) -> String {
    format!("{x}")
}

/// `α·x_n + β·y_n`.
pub fn combine(a: &SequenceSpec, b: &SequenceSpec, alpha: f64, beta: f64) -> Result<SequenceSpec> {
    if a.space != b.space {
        return Err(mismatch(a.space, b.space));
    }
    if a.norm != b.norm {
        return Err(Error::SpaceMismatch { expected: format!("{} norm", a.norm), got: format!("{} norm", b.norm) });
    }
    let label = format!("combine({}, {}, {}, {})", a.label, b.label, fmt_scalar(alpha), fmt_scalar(beta));
    let seed = a.seed.or(b.seed);
    if let (Repr::Prefix(p), Repr::Prefix(q)) = (&a.repr, &b.repr) {
        if p.scale.is_none() && q.scale.is_none() {
            let (wp, wq) = (p.weights.clone(), q.weights.clone());
            let mut low_rank = Vec::with_capacity(p.low_rank.len() + q.low_rank.len());
            for (coef, src) in [(alpha, &p.low_rank), (beta, &q.low_rank)] {
                for (r, v) in src {
                    let r = r.clone();
                    low_rank.push((Arc::new(move |n| coef * r(n)) as RealFn, v.clone()));
                }
            }
            let form = PrefixForm { weights: Arc::new(move |i| alpha * wp(i) + beta * wq(i)), scale: None, low_rank };
            return Ok(SequenceSpec::from_prefix(label, form).with_seed(seed));
        }
    }
    let (x, y) = (a.clone(), b.clone());
    Ok(SequenceSpec::from_fn(label, a.space, a.norm, seed, move |n| {
        x.element(n)?.axpby(alpha, &y.element(n)?, beta)
    }))
}

/// Seeded elements of the closed unit ball. Dense draws are uniform on the
/// cube and pulled back onto the ball when they leave it; sparse draws put
/// 1–4 coordinates in `[-1, 1]` at indices up to 16.
pub fn random_unit_ball(space: Space, seed: u64) -> SequenceSpec {
    let label = format!("random({}, seed={seed})", space_label(space));
    let norm = Norm::default_for(space);
    SequenceSpec::from_fn(label, space, norm, Some(seed), move |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n);
        match space {
            Space::Dense(d) => {
                let x = SpaceElement::Dense((0..d).map(|_| rng.random_range(-1.0..=1.0)).collect());
                let r = x.norm(norm)?;
                Ok(if r > 1.0 { x.scale(1.0 / r) } else { x })
            }
            Space::Sparse => {
                let k = rng.random_range(1..=4usize);
                let mut pairs: Vec<(u64, f64)> = Vec::with_capacity(k);
                while pairs.len() < k {
                    let i = rng.random_range(1..=16u64);
                    let v = rng.random_range(-1.0..=1.0);
                    if pairs.iter().all(|p| p.0 != i) {
                        pairs.push((i, v));
                    }
                }
                SpaceElement::sparse(pairs)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_terms() {
        let h = harmonic_prefix_sequence();
        assert_eq!(h.element(1).unwrap(), SpaceElement::sparse([(1, 1.0)]).unwrap());
        assert_eq!(h.element(3).unwrap(), SpaceElement::sparse([(1, 1.0), (2, 0.5), (3, 1.0 / 3.0)]).unwrap());
        assert!(h.norms(500).unwrap().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn spikes() {
        let s = spike_sequence(&zero(Space::Dense(1)), IndexSet::squares(), Magnitude::Index);
        assert_eq!(s.label(), "spike(squares, n)");
        assert_eq!(s.element(4).unwrap(), SpaceElement::Dense(vec![4.0]));
        assert_eq!(s.element(5).unwrap(), SpaceElement::Dense(vec![0.0]));
        let s = spike_sequence(&zero(Space::Sparse), IndexSet::primes(), Magnitude::Constant(3.0));
        assert_eq!(s.element(7).unwrap(), SpaceElement::sparse([(7, 3.0)]).unwrap());
    }

    #[test]
    fn subsequences() {
        let s = subsequence(&linear(), IndexSet::multiples(2).unwrap(), DEFAULT_SUBSEQUENCE_CAP);
        assert_eq!(s.element(3).unwrap(), SpaceElement::Dense(vec![6.0]));

        let drop_first = IndexSet::complement(IndexSet::finite([1]).unwrap());
        let h = harmonic_prefix_sequence();
        let s = subsequence(&h, drop_first, DEFAULT_SUBSEQUENCE_CAP);
        assert_eq!(s.element(1).unwrap(), h.element(2).unwrap());

        let spikes = spike_sequence(&zero(Space::Dense(1)), IndexSet::squares(), Magnitude::Index);
        let s = subsequence(&spikes, IndexSet::complement(IndexSet::squares()), DEFAULT_SUBSEQUENCE_CAP);
        assert!((1..=100).all(|k| s.element(k).unwrap().is_zero()));
    }

    #[test]
    fn subsequence_runs_out() {
        let s = subsequence(&linear(), IndexSet::finite([2, 3]).unwrap(), 1000);
        assert_eq!(s.element(2).unwrap(), SpaceElement::Dense(vec![3.0]));
        assert!(matches!(s.element(3), Err(Error::HorizonExhausted { wanted: 3, found: 2, cap: 1000, .. })));
    }

    #[test]
    fn combinations() {
        let x = random_unit_ball(Space::Dense(3), 7);
        let z = combine(&x, &x, 1.0, -1.0).unwrap();
        assert!((1..=50).all(|n| z.element(n).unwrap().is_zero()));

        let c = combine(&harmonic_prefix_sequence(), &zero(Space::Sparse), 2.0, 0.0).unwrap();
        assert_eq!(c.element(1).unwrap(), SpaceElement::sparse([(1, 2.0)]).unwrap());

        assert!(combine(&linear(), &zero(Space::Sparse), 1.0, 1.0).is_err());
    }

    #[test]
    fn random_ball_is_reproducible_and_bounded() {
        for space in [Space::Dense(3), Space::Sparse] {
            let a = random_unit_ball(space, 7);
            let b = random_unit_ball(space, 7);
            for n in 1..=200 {
                let x = a.element(n).unwrap();
                assert_eq!(x, b.element(n).unwrap());
                assert!(x.norm(a.norm()).unwrap() <= 1.0 + 1e-15);
            }
            assert_ne!(a.element(1).unwrap(), random_unit_ball(space, 8).element(1).unwrap());
        }
    }

    #[test]
    fn prefix_sums_extend() {
        let p = PrefixSums::new(Arc::new(|i| i as f64));
        assert_eq!(p.get(0), 0.0);
        assert_eq!(p.get(4), 10.0);
        assert_eq!(p.get(5000), 5000.0 * 5001.0 / 2.0);
    }

    #[test]
    fn prefix_distances_match_elementwise() {
        let h = harmonic_prefix_sequence();
        let shifted = combine(&h, &constant(SpaceElement::sparse([(2, 0.3), (40, -1.0)]).unwrap()), 1.0, 2.0).unwrap();
        assert!(shifted.prefix_form().is_none(), "const is generic, so the combination is too");
        let cands = [
            SpaceElement::zero(Space::Sparse),
            SpaceElement::sparse([(1, 1.0), (2, 0.5)]).unwrap(),
            SpaceElement::sparse([(3, 0.1), (7, 2.0), (5000, 0.25)]).unwrap(),
            h.element(37).unwrap(),
        ];
        let decayed = decay(&h);
        for seq in [&h, &decayed] {
            for c in &cands {
                if seq.prefix_form().unwrap().scale.is_some() && !c.is_zero() {
                    continue;
                }
                let fast = seq.distances(c, 600).unwrap();
                let slow = seq.distances_generic(c, 600).unwrap();
                assert_eq!(fast, slow, "{} vs {c}", seq.label());
            }
        }
    }
}
