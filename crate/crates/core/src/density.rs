//! Exact counting and natural-density estimation for subsets of ℕ₊.
//!
//! Every statistical verdict in the crate reduces to a question about the
//! density of some index set. Counts are exact integers; ratios are only
//! formed in `f64` when a profile is reported.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::{par, primes};

/// Exact rational in `[0, 1]`.
pub type Rational = Ratio<u64>;

pub type Predicate = Arc<dyn Fn(u64) -> bool + Send + Sync>;

/// Default horizon for raw density computations.
pub const DEFAULT_HORIZON: u64 = 1_000_000;
/// Default tolerance for density verdicts.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

#[derive(Clone)]
pub enum SetKind {
    Primes,
    Multiples(u64),
    Squares,
    Finite(BTreeSet<u64>),
    Complement(Box<IndexSet>),
    Union(Box<IndexSet>, Box<IndexSet>),
    Intersection(Box<IndexSet>, Box<IndexSet>),
    Custom { label: String, predicate: Predicate },
}

/// A subset of ℕ₊ given by a membership predicate, with its natural density
/// when that is known in closed form.
#[derive(Clone)]
pub struct IndexSet {
    kind: SetKind,
    analytic_density: Option<Rational>,
}

impl IndexSet {
    pub fn primes() -> Self {
        Self { kind: SetKind::Primes, analytic_density: Some(Rational::from_integer(0)) }
    }

    /// Positive multiples of `m`; `m` must be at least 1.
    pub fn multiples(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("multiples(m) requires m >= 1".into()));
        }
        Ok(Self { kind: SetKind::Multiples(m), analytic_density: Some(Rational::new(1, m)) })
    }

    pub fn squares() -> Self {
        Self { kind: SetKind::Squares, analytic_density: Some(Rational::from_integer(0)) }
    }

    /// A finite set; zero is not a member of ℕ₊ and is rejected.
    pub fn finite<I: IntoIterator<Item = u64>>(members: I) -> Result<Self> {
        let members: BTreeSet<u64> = members.into_iter().collect();
        if members.contains(&0) {
            return Err(Error::InvalidArgument("finite sets index from 1".into()));
        }
        Ok(Self { kind: SetKind::Finite(members), analytic_density: Some(Rational::from_integer(0)) })
    }

    pub fn complement(inner: IndexSet) -> Self {
        let analytic_density = inner.analytic_density.map(|q| Rational::from_integer(1) - q);
        Self { kind: SetKind::Complement(Box::new(inner)), analytic_density }
    }

    pub fn union(a: IndexSet, b: IndexSet) -> Self {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let analytic_density = match (a.analytic_density, b.analytic_density) {
            (Some(x), Some(y)) if x == zero => Some(y),
            (Some(x), Some(y)) if y == zero => Some(x),
            (Some(x), _) | (_, Some(x)) if x == one => Some(one),
            _ => None,
        };
        Self { kind: SetKind::Union(Box::new(a), Box::new(b)), analytic_density }
    }

    pub fn intersection(a: IndexSet, b: IndexSet) -> Self {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let analytic_density = match (a.analytic_density, b.analytic_density) {
            (Some(x), _) | (_, Some(x)) if x == zero => Some(zero),
            (Some(x), Some(y)) if x == one => Some(y),
            (Some(x), Some(y)) if y == one => Some(x),
            _ => None,
        };
        Self { kind: SetKind::Intersection(Box::new(a), Box::new(b)), analytic_density }
    }

    /// A set defined by an arbitrary deterministic predicate.
    pub fn custom(label: impl Into<String>, predicate: Predicate, analytic_density: Option<Rational>) -> Self {
        Self { kind: SetKind::Custom { label: label.into(), predicate }, analytic_density }
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn analytic_density(&self) -> Option<Rational> {
        self.analytic_density
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match &self.kind {
            SetKind::Primes => primes::is_prime(n),
            SetKind::Multiples(m) => n.is_multiple_of(*m),
            SetKind::Squares => {
                let r = n.isqrt();
                r * r == n
            }
            SetKind::Finite(s) => s.contains(&n),
            SetKind::Complement(a) => !a.contains(n),
            SetKind::Union(a, b) => a.contains(n) || b.contains(n),
            SetKind::Intersection(a, b) => a.contains(n) && b.contains(n),
            SetKind::Custom { predicate, .. } => predicate(n),
        }
    }

    /// `|{k <= n : k in K}|`, exactly.
    pub fn count(&self, n: u64) -> u64 {
        self.counts_at(&[n])[0]
    }

    /// Exact counts at each bound of a nondecreasing list.
    ///
    /// Primes, multiples, squares and finite sets (and complements of those)
    /// are counted without enumeration; everything else goes through a
    /// membership mask that is built once up to the largest bound.
    pub fn counts_at(&self, bounds: &[u64]) -> Vec<u64> {
        debug_assert!(bounds.windows(2).all(|w| w[0] <= w[1]));
        match &self.kind {
            SetKind::Primes => primes::prime_pi_at(bounds),
            SetKind::Multiples(m) => bounds.iter().map(|n| n / m).collect(),
            SetKind::Squares => bounds.iter().map(|n| n.isqrt()).collect(),
            SetKind::Finite(s) => bounds.iter().map(|&n| s.range(..=n).count() as u64).collect(),
            SetKind::Complement(a) => {
                a.counts_at(bounds).iter().zip(bounds).map(|(c, n)| n - c).collect()
            }
            _ => {
                let Some(&max) = bounds.last() else {
                    return Vec::new();
                };
                let mask = self.mask(max);
                let mut out = Vec::with_capacity(bounds.len());
                let mut acc = 0u64;
                let mut k = 0u64;
                for &b in bounds {
                    while k < b {
                        acc += mask[k as usize] as u64;
                        k += 1;
                    }
                    out.push(acc);
                }
                out
            }
        }
    }

    /// Membership of `1..=horizon`; `mask[k - 1]` answers `k`.
    ///
    /// Custom predicates are evaluated exactly once per index.
    pub fn mask(&self, horizon: u64) -> Vec<bool> {
        let h = horizon as usize;
        match &self.kind {
            SetKind::Primes => {
                let mut s = primes::sieve(horizon);
                s.remove(0);
                s
            }
            SetKind::Multiples(m) => {
                let mut v = vec![false; h];
                let mut k = *m as usize;
                while k <= h {
                    v[k - 1] = true;
                    k += *m as usize;
                }
                v
            }
            SetKind::Squares => {
                let mut v = vec![false; h];
                let mut r = 1usize;
                while r * r <= h {
                    v[r * r - 1] = true;
                    r += 1;
                }
                v
            }
            SetKind::Finite(s) => {
                let mut v = vec![false; h];
                for &k in s.range(..=horizon) {
                    v[k as usize - 1] = true;
                }
                v
            }
            SetKind::Complement(a) => a.mask(horizon).into_iter().map(|b| !b).collect(),
            SetKind::Union(a, b) => {
                a.mask(horizon).into_iter().zip(b.mask(horizon)).map(|(x, y)| x || y).collect()
            }
            SetKind::Intersection(a, b) => {
                a.mask(horizon).into_iter().zip(b.mask(horizon)).map(|(x, y)| x && y).collect()
            }
            SetKind::Custom { predicate, .. } => par::map_indices(horizon, |k| predicate(k)),
        }
    }

    /// The k-th smallest member (1-based), scanning at most `cap` indices when
    /// no closed form is available.
    pub fn nth_member(&self, k: u64, cap: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::InvalidArgument("members are indexed from 1".into()));
        }
        match &self.kind {
            SetKind::Multiples(m) => return Ok(k * m),
            SetKind::Squares => return Ok(k * k),
            SetKind::Primes => return Ok(primes::nth_prime(k)),
            _ => {}
        }
        let mut found = 0;
        for n in 1..=cap {
            if self.contains(n) {
                found += 1;
                if found == k {
                    return Ok(n);
                }
            }
        }
        Err(Error::HorizonExhausted { set: self.to_string(), wanted: k, found, cap })
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SetKind::Primes => write!(f, "primes"),
            SetKind::Multiples(m) => write!(f, "multiples({m})"),
            SetKind::Squares => write!(f, "squares"),
            SetKind::Finite(s) => {
                let items: Vec<String> = s.iter().map(u64::to_string).collect();
                write!(f, "finite({})", items.join(","))
            }
            SetKind::Complement(a) => write!(f, "complement({a})"),
            SetKind::Union(a, b) => write!(f, "union({a}, {b})"),
            SetKind::Intersection(a, b) => write!(f, "intersection({a}, {b})"),
            SetKind::Custom { label, .. } => write!(f, "{label}"),
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet({self})")
    }
}

/// Checkpoint schedule for a density profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `base, base², …` and the horizon itself.
    Geometric { base: u64 },
    /// `step, 2·step, …` and the horizon itself.
    Linear { step: u64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Geometric { base: 10 }
    }
}

impl Schedule {
    pub fn checkpoints(&self, horizon: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        match *self {
            Schedule::Geometric { base } => {
                if base < 2 {
                    return Err(Error::InvalidArgument("geometric base must be >= 2".into()));
                }
                let mut n = base;
                while n < horizon {
                    out.push(n);
                    n = match n.checked_mul(base) {
                        Some(v) => v,
                        None => break,
                    };
                }
            }
            Schedule::Linear { step } => {
                if step == 0 {
                    return Err(Error::InvalidArgument("linear step must be >= 1".into()));
                }
                let mut n = step;
                while n < horizon {
                    out.push(n);
                    n += step;
                }
            }
        }
        if horizon >= 1 {
            out.push(horizon);
        }
        if out.len() < 2 {
            return Err(Error::EmptySchedule { horizon, found: out.len() });
        }
        Ok(out)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Geometric { base } => write!(f, "geometric({base})"),
            Schedule::Linear { step } => write!(f, "linear({step})"),
        }
    }
}

/// Exact counts of a set at increasing checkpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityProfile {
    checkpoints: Vec<u64>,
    counts: Vec<u64>,
}

impl DensityProfile {
    pub fn new(checkpoints: Vec<u64>, counts: Vec<u64>) -> Result<Self> {
        if checkpoints.len() != counts.len() || checkpoints.is_empty() {
            return Err(Error::InvalidArgument("checkpoints and counts must be nonempty and aligned".into()));
        }
        if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("checkpoints must be strictly increasing and positive".into()));
        }
        if counts.iter().zip(&checkpoints).any(|(c, n)| c > n) || counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("counts must be nondecreasing and bounded by their checkpoint".into()));
        }
        Ok(Self { checkpoints, counts })
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn horizon(&self) -> u64 {
        *self.checkpoints.last().expect("nonempty")
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.counts.iter().zip(&self.checkpoints).map(|(&c, &n)| c as f64 / n as f64).collect()
    }

    pub fn final_count(&self) -> u64 {
        *self.counts.last().expect("nonempty")
    }

    pub fn final_ratio(&self) -> f64 {
        self.final_count() as f64 / self.horizon() as f64
    }
}

impl Serialize for DensityProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DensityProfile", 3)?;
        s.serialize_field("checkpoints", &self.checkpoints)?;
        s.serialize_field("counts", &self.counts)?;
        s.serialize_field("ratios", &self.ratios())?;
        s.end()
    }
}

/// Counts `set` at every checkpoint of `schedule` up to `horizon`.
pub fn density_profile(set: &IndexSet, horizon: u64, schedule: Schedule) -> Result<DensityProfile> {
    if horizon < 2 {
        return Err(Error::HorizonTooSmall { min: 2, got: horizon });
    }
    let checkpoints = schedule.checkpoints(horizon)?;
    let counts = set.counts_at(&checkpoints);
    DensityProfile::new(checkpoints, counts)
}

/// Three-valued outcome of a finite-horizon check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Confirmed,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Confirmed => "confirmed",
            Decision::Refuted => "refuted",
            Decision::Inconclusive => "inconclusive",
        })
    }
}

/// The density a profile is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Zero,
    Ratio(Rational),
}

impl Target {
    pub fn as_ratio(&self) -> Rational {
        match self {
            Target::Zero => Rational::from_integer(0),
            Target::Ratio(q) => *q,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Zero => write!(f, "zero"),
            Target::Ratio(q) => write!(f, "{q}"),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityVerdict {
    pub profile: DensityProfile,
    pub target: Target,
    pub tolerance: f64,
    pub horizon: u64,
    pub decision: Decision,
    /// First checkpoint from which the deviation exceeds the tolerance at
    /// every later checkpoint.
    pub witness: Option<u64>,
}

/// `|c/n - p/q|` as an exact fraction `num / den`.
fn deviation(count: u64, n: u64, target: Rational) -> (u128, u128) {
    let (p, q) = (*target.numer() as u128, *target.denom() as u128);
    let lhs = count as u128 * q;
    let rhs = p * n as u128;
    (lhs.abs_diff(rhs), q * n as u128)
}

/// Decides whether `profile` tends to `target`.
///
/// Confirmed when the final ratio is within `tolerance` of the target and the
/// last ⌈r/3⌉ checkpoints are all within `2·tolerance`. Refuted when the final
/// deviation is at least `2·tolerance` and the deviation never shrinks from
/// the checkpoint preceding that window onwards. Anything else is inconclusive.
pub fn density_verdict(profile: &DensityProfile, target: Target, tolerance: f64) -> Result<DensityVerdict> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let q = target.as_ratio();
    if q > Rational::from_integer(1) {
        return Err(Error::InvalidArgument(format!("target density {q} exceeds 1")));
    }
    let devs: Vec<(u128, u128)> =
        profile.counts.iter().zip(&profile.checkpoints).map(|(&c, &n)| deviation(c, n, q)).collect();
    let dev_f = |d: &(u128, u128)| d.0 as f64 / d.1 as f64;
    let r = devs.len();
    let window = r.div_ceil(3);
    let tail = &devs[r - window..];
    let trend = &devs[(r - window).saturating_sub(1)..];
    let last = dev_f(&devs[r - 1]);

    let decision = if last <= tolerance && tail.iter().all(|d| dev_f(d) <= 2.0 * tolerance) {
        Decision::Confirmed
    } else if last >= 2.0 * tolerance && trend.windows(2).all(|w| w[1].0 * w[0].1 >= w[0].0 * w[1].1) {
        Decision::Refuted
    } else {
        Decision::Inconclusive
    };

    let witness = if last > tolerance {
        let start = devs.iter().rposition(|d| dev_f(d) <= tolerance).map_or(0, |i| i + 1);
        Some(profile.checkpoints[start])
    } else {
        None
    };

    Ok(DensityVerdict {
        profile: profile.clone(),
        target,
        tolerance,
        horizon: profile.horizon(),
        decision,
        witness,
    })
}
