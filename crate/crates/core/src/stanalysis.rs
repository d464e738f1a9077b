//! Finite-horizon verdicts for statistical convergence, boundedness and the
//! Cauchy property of sequences.
//!
//! Every verdict reduces to density checks of exceedance sets such as
//! `{k : ‖x_k − x‖ >= ε}`, counted exactly at the checkpoints of a schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::Serialize;
use serde_json::json;

use crate::density::{density_verdict, Decision, DensityProfile, DensityVerdict, Schedule, Target};
use crate::error::{Error, Result};
use crate::par;
use crate::sequences::SequenceSpec;
use crate::spaces::{Norm, Space, SpaceElement, SparseVec};

pub const DEFAULT_EPSILON_GRID: [f64; 3] = [0.5, 0.1, 0.01];
pub const CLASSIFICATION_HORIZON: u64 = 100_000;
/// Primes have ratio 0.0959 at 10⁵, so density-zero checks over primes need
/// a tolerance of at least that at the classification horizon.
pub const CLASSIFICATION_TOLERANCE: f64 = 0.1;
/// Number of random functionals added to the coordinate ones in the weak check.
pub const WEAK_RANDOM_FUNCTIONALS: usize = 8;

const MEDIAN_SAMPLES: u64 = 101;
const TAIL_CANDIDATES: u64 = 16;
const MIN_NEIGHBOURS: usize = 8;

/// Horizon, tolerance and checkpoint schedule shared by a batch of verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub horizon: u64,
    pub tolerance: f64,
    pub schedule: Schedule,
}

impl Settings {
    pub fn new(horizon: u64, tolerance: f64) -> Self {
        Self { horizon, tolerance, schedule: Schedule::default() }
    }

    pub fn classification() -> Self {
        Self::new(CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)
    }

    fn validate(&self) -> Result<Vec<u64>> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.horizon < 2 {
            return Err(Error::HorizonTooSmall { min: 2, got: self.horizon });
        }
        self.schedule.checkpoints(self.horizon)
    }

    /// Tail window `(H/10, H]` used for candidate search.
    fn tail_start(&self) -> u64 {
        self.horizon / 10 + 1
    }
}

/// Doubling probes `1, 2, 4, …` up to `horizon / 64`.
pub fn default_probes(horizon: u64) -> Vec<f64> {
    let top = (horizon / 64).max(1) as f64;
    std::iter::successors(Some(1.0f64), |m| Some(m * 2.0)).take_while(|&m| m <= top).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerdictKind {
    Convergence { limit: SpaceElement },
    /// `bound` is the first probe whose exceedance set has confirmed density zero.
    Bounded { bound: Option<f64> },
    /// The anchor accepted for each ε, if any.
    Cauchy { anchors: Vec<Option<u64>> },
    /// Per functional, the bound found for its real sequence.
    WeaklyBounded { bounds: Vec<Option<f64>> },
    /// Convergence along a subsequence; `limit` is the accepted or best candidate.
    Subsequential { limit: Option<SpaceElement> },
}

impl VerdictKind {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictKind::Convergence { .. } => "convergence",
            VerdictKind::Bounded { .. } => "bounded",
            VerdictKind::Cauchy { .. } => "cauchy",
            VerdictKind::WeaklyBounded { .. } => "weakly_bounded",
            VerdictKind::Subsequential { .. } => "subsequential",
        }
    }
}

/// A statistical verdict for one sequence.
///
/// For convergence, Cauchy and weak-bound verdicts the decision is confirmed
/// iff every entry of `per_epsilon` is, and refuted iff some entry is. For
/// bounded verdicts the entries are the probes tried in order and the search
/// stops at the first confirmed one.
#[derive(Debug, Clone, PartialEq)]
pub struct StVerdict {
    pub kind: VerdictKind,
    pub epsilon_grid: Vec<f64>,
    pub per_epsilon: Vec<DensityVerdict>,
    pub decision: Decision,
    pub horizon: u64,
}

impl StVerdict {
    fn witness_json(&self) -> serde_json::Value {
        match &self.kind {
            VerdictKind::Convergence { limit } => {
                let refuted = self.epsilon_grid.iter().zip(&self.per_epsilon).find(|(_, v)| v.decision == Decision::Refuted);
                json!({
                    "limit": limit.to_string(),
                    "refuted_epsilon": refuted.map(|(e, _)| *e),
                    "from_checkpoint": refuted.and_then(|(_, v)| v.witness),
                })
            }
            VerdictKind::Bounded { bound } => json!({ "bound": bound }),
            VerdictKind::Cauchy { anchors } => json!({ "anchors": anchors }),
            VerdictKind::WeaklyBounded { bounds } => json!({ "bounds": bounds }),
            VerdictKind::Subsequential { limit } => json!({ "limit": limit.as_ref().map(|l| l.to_string()) }),
        }
    }
}

struct EpsilonEntry<'a>(f64, &'a DensityVerdict);

impl Serialize for EpsilonEntry<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(3))?;
        m.serialize_entry("epsilon", &self.0)?;
        m.serialize_entry("final_ratio", &self.1.profile.final_ratio())?;
        m.serialize_entry("decision", &self.1.decision)?;
        m.end()
    }
}

impl Serialize for StVerdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<EpsilonEntry> =
            self.epsilon_grid.iter().zip(&self.per_epsilon).map(|(&e, v)| EpsilonEntry(e, v)).collect();
        let mut s = serializer.serialize_struct("StVerdict", 6)?;
        s.serialize_field("kind", self.kind.name())?;
        s.serialize_field("decision", &self.decision)?;
        s.serialize_field("horizon", &self.horizon)?;
        s.serialize_field("epsilon_grid", &self.epsilon_grid)?;
        s.serialize_field("per_epsilon", &entries)?;
        s.serialize_field("witness", &self.witness_json())?;
        s.end()
    }
}

fn validate_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} must be nonempty")));
    }
    if let Some(e) = grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidArgument(format!("{what} entries must be positive and finite, got {e}")));
    }
    Ok(())
}

/// Exact counts of `{k <= n_i : flag(k)}` at each checkpoint.
fn exceedance_profile(values: &[f64], checkpoints: &[u64], flag: impl Fn(f64) -> bool) -> Result<DensityProfile> {
    let mut counts = Vec::with_capacity(checkpoints.len());
    let mut count = 0u64;
    let mut k = 0usize;
    for &n in checkpoints {
        while k < n as usize {
            if flag(values[k]) {
                count += 1;
            }
            k += 1;
        }
        counts.push(count);
    }
    DensityProfile::new(checkpoints.to_vec(), counts)
}

fn zero_verdict(values: &[f64], checkpoints: &[u64], settings: &Settings, flag: impl Fn(f64) -> bool) -> Result<DensityVerdict> {
    density_verdict(&exceedance_profile(values, checkpoints, flag)?, Target::Zero, settings.tolerance)
}

fn aggregate(verdicts: &[DensityVerdict]) -> Decision {
    if verdicts.iter().all(|v| v.decision == Decision::Confirmed) {
        Decision::Confirmed
    } else if verdicts.iter().any(|v| v.decision == Decision::Refuted) {
        Decision::Refuted
    } else {
        Decision::Inconclusive
    }
}

/// Verdict for `‖x_k − candidate‖ → 0` statistically, from precomputed distances.
fn convergence_from_distances(
    distances: &[f64],
    candidate: SpaceElement,
    grid: &[f64],
    settings: &Settings,
    checkpoints: &[u64],
) -> Result<StVerdict> {
    let per_epsilon = par::map_slice(grid, |&eps| zero_verdict(distances, checkpoints, settings, |d| d >= eps))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(StVerdict {
        kind: VerdictKind::Convergence { limit: candidate },
        epsilon_grid: grid.to_vec(),
        decision: aggregate(&per_epsilon),
        per_epsilon,
        horizon: settings.horizon,
    })
}

pub fn st_converges(seq: &SequenceSpec, candidate: &SpaceElement, grid: &[f64], settings: &Settings) -> Result<StVerdict> {
    validate_grid(grid, "epsilon grid")?;
    let checkpoints = settings.validate()?;
    let distances = seq.distances(candidate, settings.horizon)?;
    convergence_from_distances(&distances, candidate.clone(), grid, settings, &checkpoints)
}

/// Probe search over `{k : values_k > M}`.
fn bounded_from_values(values: &[f64], probes: &[f64], settings: &Settings) -> Result<StVerdict> {
    validate_grid(probes, "probe list")?;
    let checkpoints = settings.validate()?;
    let mut per_epsilon = Vec::new();
    let mut bound = None;
    for &m in probes {
        let v = zero_verdict(values, &checkpoints, settings, |x| x > m)?;
        let done = v.decision == Decision::Confirmed;
        per_epsilon.push(v);
        if done {
            bound = Some(m);
            break;
        }
    }
    let decision = match (bound, per_epsilon.last()) {
        (Some(_), _) => Decision::Confirmed,
        (None, Some(v)) if v.decision == Decision::Refuted => Decision::Refuted,
        _ => Decision::Inconclusive,
    };
    Ok(StVerdict {
        kind: VerdictKind::Bounded { bound },
        epsilon_grid: probes[..per_epsilon.len()].to_vec(),
        per_epsilon,
        decision,
        horizon: settings.horizon,
    })
}

/// Searches `probes` (increasing) for an `M` with `{n : ‖x_n‖ > M}` of density zero.
pub fn st_bounded(seq: &SequenceSpec, probes: &[f64], settings: &Settings) -> Result<StVerdict> {
    settings.validate()?;
    let norms = seq.norms(settings.horizon)?;
    bounded_from_values(&norms, probes, settings)
}

/// [`st_bounded`] for a real sequence, measured by `|x_k|`.
pub fn st_bounded_real(xs: impl Fn(u64) -> f64 + Sync, probes: &[f64], settings: &Settings) -> Result<StVerdict> {
    settings.validate()?;
    let values = par::map_indices(settings.horizon, |k| xs(k).abs());
    bounded_from_values(&values, probes, settings)
}

/// Anchors `10, 100, …` up to `horizon / 10`.
pub fn cauchy_anchors(horizon: u64) -> Vec<u64> {
    std::iter::successors(Some(10u64), |a| a.checked_mul(10)).take_while(|&a| a <= horizon / 10).collect()
}

/// For each ε, looks for an anchor `a` with `{k : ‖x_k − x_a‖ >= ε}` of density zero.
pub fn st_cauchy(seq: &SequenceSpec, grid: &[f64], settings: &Settings) -> Result<StVerdict> {
    validate_grid(grid, "epsilon grid")?;
    let checkpoints = settings.validate()?;
    let anchors = cauchy_anchors(settings.horizon);
    if anchors.is_empty() {
        return Err(Error::HorizonTooSmall { min: 100, got: settings.horizon });
    }
    let samples = Samples::new(seq, settings.horizon)?;
    // by_anchor[a][e]
    let by_anchor = anchors
        .iter()
        .map(|&a| {
            let d = samples.distances(&samples.element(a)?)?;
            grid.iter()
                .map(|&eps| zero_verdict(&d, &checkpoints, settings, |x| x >= eps))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_epsilon = Vec::with_capacity(grid.len());
    let mut chosen = Vec::with_capacity(grid.len());
    for e in 0..grid.len() {
        let column: Vec<&DensityVerdict> = by_anchor.iter().map(|row| &row[e]).collect();
        let pick = column
            .iter()
            .position(|v| v.decision == Decision::Confirmed)
            .or_else(|| column.iter().position(|v| v.decision == Decision::Inconclusive))
            .unwrap_or(column.len() - 1);
        chosen.push((column[pick].decision == Decision::Confirmed).then_some(anchors[pick]));
        per_epsilon.push(column[pick].clone());
    }
    Ok(StVerdict {
        kind: VerdictKind::Cauchy { anchors: chosen },
        epsilon_grid: grid.to_vec(),
        decision: aggregate(&per_epsilon),
        per_epsilon,
        horizon: settings.horizon,
    })
}

/// A probe functional on ℝ^d.
pub type Functional = Vec<f64>;

/// Coordinate functionals followed by [`WEAK_RANDOM_FUNCTIONALS`] seeded ones
/// with weights in `[-1, 1]`.
pub fn default_functionals(dim: usize, seed: u64) -> Vec<Functional> {
    let mut out: Vec<Functional> = (0..dim)
        .map(|j| (0..dim).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..WEAK_RANDOM_FUNCTIONALS {
        out.push((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    out
}

/// st-boundedness of every real sequence `f(x_n)` for `f` in `functionals`.
pub fn weakly_st_bounded(
    seq: &SequenceSpec,
    functionals: &[Functional],
    probes: &[f64],
    settings: &Settings,
) -> Result<StVerdict> {
    let Space::Dense(dim) = seq.space() else {
        return Err(Error::SpaceMismatch { expected: "dense space".into(), got: seq.space().to_string() });
    };
    if functionals.is_empty() {
        return Err(Error::InvalidArgument("functional list must be nonempty".into()));
    }
    if let Some(f) = functionals.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: f.len() });
    }
    settings.validate()?;
    let elements = seq.elements(settings.horizon)?;
    let mut bounds = Vec::with_capacity(functionals.len());
    let mut per_epsilon = Vec::with_capacity(functionals.len());
    let mut grid = Vec::with_capacity(functionals.len());
    for f in functionals {
        let values: Vec<f64> = elements
            .iter()
            .map(|x| {
                let xs = x.as_dense().expect("dense sequence");
                xs.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs()
            })
            .collect();
        let v = bounded_from_values(&values, probes, settings)?;
        let VerdictKind::Bounded { bound } = v.kind else { unreachable!() };
        bounds.push(bound);
        grid.push(*v.epsilon_grid.last().expect("at least one probe"));
        let mut last = v.per_epsilon.last().expect("at least one probe").clone();
        // The last probe carries the bounded verdict's decision.
        last.decision = v.decision;
        per_epsilon.push(last);
    }
    Ok(StVerdict {
        kind: VerdictKind::WeaklyBounded { bounds },
        epsilon_grid: grid,
        decision: aggregate(&per_epsilon),
        per_epsilon,
        horizon: settings.horizon,
    })
}

/// Whether some `M = 2^k` bounds every `‖x_n‖`, `n <= horizon`.
/// Confirmed with that `M`, otherwise inconclusive.
pub fn norm_bounded(seq: &SequenceSpec, settings: &Settings) -> Result<(Decision, Option<f64>)> {
    let max = seq.norms(settings.horizon)?.into_iter().fold(0.0f64, f64::max);
    let m = (-20..=40).map(|k| 2f64.powi(k)).find(|&m| max <= m);
    Ok(match m {
        Some(m) => (Decision::Confirmed, Some(m)),
        None => (Decision::Inconclusive, None),
    })
}

/// Whether `‖x_n‖ < ε` on the whole tail window for every ε in `grid`.
/// Confirmed or inconclusive.
pub fn norm_null(seq: &SequenceSpec, grid: &[f64], settings: &Settings) -> Result<Decision> {
    validate_grid(grid, "epsilon grid")?;
    let eps = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let norms = seq.norms(settings.horizon)?;
    let tail = &norms[settings.tail_start() as usize - 1..];
    Ok(if tail.iter().all(|&r| r < eps) { Decision::Confirmed } else { Decision::Inconclusive })
}

/// Sequence terms up to the horizon: stored when evaluation is generic,
/// left to the structured distance kernel otherwise.
enum Samples<'a> {
    Stored { elements: Vec<SpaceElement>, norm: Norm, space: Space },
    Structured { seq: &'a SequenceSpec, horizon: u64 },
}

impl<'a> Samples<'a> {
    fn new(seq: &'a SequenceSpec, horizon: u64) -> Result<Self> {
        Ok(if seq.prefix_form().is_some() {
            Samples::Structured { seq, horizon }
        } else {
            Samples::Stored { elements: seq.elements(horizon)?, norm: seq.norm(), space: seq.space() }
        })
    }

    fn element(&self, n: u64) -> Result<SpaceElement> {
        match self {
            Samples::Stored { elements, .. } => Ok(elements[n as usize - 1].clone()),
            Samples::Structured { seq, .. } => seq.element(n),
        }
    }

    fn distances(&self, c: &SpaceElement) -> Result<Vec<f64>> {
        match self {
            Samples::Stored { elements, norm, space } => {
                if c.space() != *space {
                    return Err(crate::spaces::mismatch(*space, c.space()));
                }
                par::map_slice(elements, |x| x.distance(c, *norm)).into_iter().collect()
            }
            Samples::Structured { seq, horizon } => seq.distances(c, *horizon),
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// `count` indices spread evenly over `(H/10, H]`, including `H`.
fn tail_indices(settings: &Settings, count: u64) -> Vec<u64> {
    let lo = settings.tail_start();
    let hi = settings.horizon;
    let mut idx: Vec<u64> = (0..count).map(|t| lo + (hi - lo) * t / (count - 1).max(1)).collect();
    idx.dedup();
    idx
}

fn median_of(elements: &[SpaceElement], space: Space) -> Result<SpaceElement> {
    match space {
        Space::Dense(d) => {
            let coords = (0..d)
                .map(|i| {
                    let mut col: Vec<f64> = elements.iter().map(|x| x.as_dense().expect("dense")[i]).collect();
                    median(&mut col)
                })
                .collect();
            SpaceElement::dense(coords)
        }
        Space::Sparse => {
            let mut support: Vec<u64> =
                elements.iter().flat_map(|x| x.as_sparse().expect("sparse").support()).collect();
            support.sort_unstable();
            support.dedup();
            let pairs = support.into_iter().map(|i| {
                let mut col: Vec<f64> = elements.iter().map(|x| x.coord(i)).collect();
                (i, median(&mut col))
            });
            Ok(SpaceElement::Sparse(SparseVec::from_pairs(pairs.filter(|p| p.1 != 0.0))?))
        }
    }
}

/// Coordinatewise median of 101 terms spread over the tail window `(H/10, H]`.
/// Robust to density-zero spikes, so it recovers the statistical limit of a
/// convergent sequence.
pub fn median_candidate(seq: &SequenceSpec, settings: &Settings) -> Result<SpaceElement> {
    settings.validate()?;
    let elements = tail_indices(settings, MEDIAN_SAMPLES)
        .into_iter()
        .map(|n| seq.element(n))
        .collect::<Result<Vec<_>>>()?;
    median_of(&elements, seq.space())
}

/// st-convergence towards the median candidate.
pub fn st_converges_to_median(seq: &SequenceSpec, grid: &[f64], settings: &Settings) -> Result<StVerdict> {
    let c = median_candidate(seq, settings)?;
    st_converges(seq, &c, grid, settings)
}

/// Looks for a statistical limit or a subsequential limit.
///
/// Confirmed when the sequence st-converges to its median candidate, or when
/// some candidate (the median or one of 16 tail terms) has at least 8 tail
/// terms within every ε of the grid. Refuted when every candidate is isolated:
/// at most one term `n <= H` lies within half the largest ε of it. Otherwise
/// inconclusive. `per_epsilon` holds the convergence verdicts towards the
/// reported limit, so this kind does not follow the all-confirmed aggregation.
pub fn st_subsequential(seq: &SequenceSpec, grid: &[f64], settings: &Settings) -> Result<StVerdict> {
    validate_grid(grid, "epsilon grid")?;
    let checkpoints = settings.validate()?;
    let samples = Samples::new(seq, settings.horizon)?;
    let med = {
        let elements = tail_indices(settings, MEDIAN_SAMPLES)
            .into_iter()
            .map(|n| samples.element(n))
            .collect::<Result<Vec<_>>>()?;
        median_of(&elements, seq.space())?
    };
    let d = samples.distances(&med)?;
    let conv = convergence_from_distances(&d, med.clone(), grid, settings, &checkpoints)?;
    if conv.decision == Decision::Confirmed {
        return Ok(StVerdict { kind: VerdictKind::Subsequential { limit: Some(med) }, ..conv });
    }

    let eps_min = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps_max = grid.iter().cloned().fold(0.0, f64::max);
    let tail = settings.tail_start() as usize - 1;
    let mut isolated = true;
    let mut candidates = vec![med];
    for n in tail_indices(settings, TAIL_CANDIDATES) {
        candidates.push(samples.element(n)?);
    }
    for (i, c) in candidates.into_iter().enumerate() {
        let d = if i == 0 { d.clone() } else { samples.distances(&c)? };
        let near_tail = d[tail..].iter().filter(|&&x| x < eps_min).count();
        if near_tail >= MIN_NEIGHBOURS {
            let conv = convergence_from_distances(&d, c.clone(), grid, settings, &checkpoints)?;
            return Ok(StVerdict { kind: VerdictKind::Subsequential { limit: Some(c) }, decision: Decision::Confirmed, ..conv });
        }
        if d.iter().filter(|&&x| x < eps_max / 2.0).count() > 1 {
            isolated = false;
        }
    }
    Ok(StVerdict {
        kind: VerdictKind::Subsequential { limit: None },
        decision: if isolated { Decision::Refuted } else { Decision::Inconclusive },
        ..conv
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::IndexSet;
    use crate::sequences::{self, Magnitude};

    fn reciprocal() -> SequenceSpec {
        SequenceSpec::from_fn("reciprocal", Space::Dense(1), Norm::P(2.0), None, |n| {
            SpaceElement::dense(vec![1.0 / n as f64])
        })
    }

    #[test]
    fn reciprocal_converges_to_zero() {
        let s = Settings::new(10_000, 0.01);
        let v = st_converges(&reciprocal(), &SpaceElement::zero(Space::Dense(1)), &[0.1], &s).unwrap();
        assert_eq!(v.decision, Decision::Confirmed);
        assert_eq!(v.per_epsilon[0].profile.final_count(), 10);
    }

    #[test]
    fn spikes_are_statistically_null_and_bounded() {
        let s = Settings::new(100_000, 0.01);
        let spikes = sequences::spike_sequence(&sequences::zero(Space::Dense(1)), IndexSet::squares(), Magnitude::Index);
        let v = st_converges(&spikes, &SpaceElement::zero(Space::Dense(1)), &[0.5], &s).unwrap();
        assert_eq!(v.decision, Decision::Confirmed);
        let p = &v.per_epsilon[0].profile;
        for (&n, &c) in p.checkpoints().iter().zip(p.counts()) {
            assert_eq!(c, (n as f64).sqrt().floor() as u64);
        }
        let b = st_bounded(&spikes, &default_probes(s.horizon), &s).unwrap();
        assert_eq!(b.decision, Decision::Confirmed);
        assert_eq!(b.kind, VerdictKind::Bounded { bound: Some(1.0) });
    }

    #[test]
    fn linear_is_not_bounded() {
        let s = Settings::new(100_000, 0.01);
        let v = st_bounded(&sequences::linear(), &default_probes(s.horizon), &s).unwrap();
        assert_eq!(v.decision, Decision::Refuted);
        let v = st_bounded(&sequences::constant(SpaceElement::dense(vec![3.0, 4.0]).unwrap()), &[10.0], &s).unwrap();
        assert_eq!(v.kind, VerdictKind::Bounded { bound: Some(10.0) });
    }

    #[test]
    fn harmonic_is_cauchy_but_not_convergent() {
        let s = Settings::new(100_000, 0.01);
        let h = sequences::harmonic_prefix_sequence();
        let c = st_cauchy(&h, &DEFAULT_EPSILON_GRID, &s).unwrap();
        assert_eq!(c.decision, Decision::Confirmed);
        assert_eq!(c.kind, VerdictKind::Cauchy { anchors: vec![Some(10), Some(10), Some(100)] });
        let v = st_converges(&h, &SpaceElement::zero(Space::Sparse), &[0.5, 0.1], &s).unwrap();
        assert_eq!(v.decision, Decision::Refuted);
    }

    #[test]
    fn alternating_is_not_cauchy() {
        let s = Settings::new(100_000, 0.01);
        let v = st_cauchy(&sequences::alternating(), &[0.5], &s).unwrap();
        assert_eq!(v.decision, Decision::Refuted);
        assert_eq!(v.per_epsilon[0].profile.final_ratio(), 0.5);
    }

    #[test]
    fn weak_bounds() {
        let s = Settings::new(10_000, 0.01);
        let probes = default_probes(s.horizon);
        let spikes = SequenceSpec::from_fn("spikes", Space::Dense(2), Norm::P(2.0), None, |n| {
            let r = (n as f64).sqrt().floor() as u64;
            SpaceElement::dense(vec![if r * r == n { n as f64 } else { 0.0 }, 0.0])
        });
        let runaway = SequenceSpec::from_fn("runaway", Space::Dense(2), Norm::P(2.0), None, |n| {
            SpaceElement::dense(vec![n as f64, 0.0])
        });
        let fs = default_functionals(2, 1);
        assert_eq!(fs.len(), 2 + WEAK_RANDOM_FUNCTIONALS);
        assert_eq!(weakly_st_bounded(&spikes, &fs, &probes, &s).unwrap().decision, Decision::Confirmed);
        assert_eq!(weakly_st_bounded(&runaway, &fs, &probes, &s).unwrap().decision, Decision::Refuted);
        assert!(weakly_st_bounded(&sequences::unit_coords(), &fs, &probes, &s).is_err());
    }

    #[test]
    fn median_ignores_spikes() {
        let s = Settings::classification();
        let v = SpaceElement::dense(vec![0.25, -0.5]).unwrap();
        let spikes = sequences::spike_sequence(&sequences::constant(v.clone()), IndexSet::primes(), Magnitude::Index);
        assert_eq!(median_candidate(&spikes, &s).unwrap(), v);
    }

    #[test]
    fn subsequential_limits() {
        let s = Settings::new(20_000, 0.1);
        let v = st_subsequential(&sequences::alternating(), &DEFAULT_EPSILON_GRID, &s).unwrap();
        assert_eq!(v.decision, Decision::Confirmed);
        let v = st_subsequential(&sequences::unit_coords(), &DEFAULT_EPSILON_GRID, &s).unwrap();
        assert_eq!(v.decision, Decision::Refuted);
        let v = st_subsequential(&sequences::linear(), &DEFAULT_EPSILON_GRID, &s).unwrap();
        assert_eq!(v.decision, Decision::Refuted);
    }

    #[test]
    fn report_shape() {
        let s = Settings::new(1000, 0.01);
        let v = st_converges(&reciprocal(), &SpaceElement::zero(Space::Dense(1)), &[0.5, 0.1], &s).unwrap();
        let j = serde_json::to_value(&v).unwrap();
        let keys: Vec<&String> = j.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["kind", "decision", "horizon", "epsilon_grid", "per_epsilon", "witness"]);
        assert_eq!(j["per_epsilon"][1]["final_ratio"], 0.01);
    }
}
