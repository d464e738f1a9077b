//! Empirical classification of operators against a fixed sequence corpus.
//!
//! Operator properties quantify over all sequences, so a finite corpus can
//! only refute them. "Consistent" is the strongest positive outcome.

use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::density::{Decision, IndexSet, Schedule};
use crate::error::{Error, Result};
use crate::operators::{image_sequence, Mapping};
use crate::par;
use crate::sequences::{self, Magnitude, SequenceSpec};
use crate::spaces::{Space, SpaceElement};
use crate::stanalysis::{
    default_probes, norm_bounded, norm_null, st_bounded, st_converges, st_subsequential, Settings, StVerdict,
    VerdictKind, DEFAULT_EPSILON_GRID,
};

pub const CORPUS_VERSION: &str = "v1";

/// A versioned list of sequences in one space.
#[derive(Debug, Clone)]
pub struct Corpus {
    version: String,
    space: Space,
    sequences: Vec<SequenceSpec>,
}

fn sparse_elem(pairs: &[(u64, f64)]) -> SpaceElement {
    SpaceElement::sparse(pairs.iter().copied()).expect("valid literal")
}

/// `(1, 1/2, 1/4, …)` truncated to `d` coordinates.
fn halving(d: usize) -> SpaceElement {
    SpaceElement::Dense((0..d).map(|i| 0.5f64.powi(i as i32)).collect())
}

impl Corpus {
    pub fn new(version: impl Into<String>, sequences: Vec<SequenceSpec>) -> Result<Self> {
        let Some(first) = sequences.first() else { return Err(Error::EmptyCorpus) };
        let space = first.space();
        if let Some(s) = sequences.iter().find(|s| s.space() != space) {
            return Err(crate::spaces::mismatch(space, s.space()));
        }
        Ok(Self { version: version.into(), space, sequences })
    }

    /// The default corpus of a space.
    ///
    /// Both spaces get three seeded random unit-ball sequences, spikes of
    /// magnitude `n` over squares and over primes, and a null sequence
    /// `v/n`. c₀₀ additionally gets the harmonic prefixes, `e_n`, `e_{p_n}`
    /// and `e_{p_n}/n`.
    pub fn default_for(space: Space, seed: u64) -> Self {
        let mut seqs: Vec<SequenceSpec> = (1..=3).map(|k| sequences::random_unit_ball(space, seed + k)).collect();
        let zero = sequences::zero(space);
        seqs.push(sequences::spike_sequence(&zero, IndexSet::squares(), Magnitude::Index));
        seqs.push(sequences::spike_sequence(&zero, IndexSet::primes(), Magnitude::Index));
        match space {
            Space::Sparse => {
                seqs.push(sequences::decay(&sequences::constant(sparse_elem(&[(1, 0.5), (2, 0.25)]))));
                seqs.push(sequences::harmonic_prefix_sequence());
                seqs.push(sequences::unit_coords());
                seqs.push(sequences::prime_coords());
                seqs.push(sequences::decay(&sequences::prime_coords()));
            }
            Space::Dense(d) => seqs.push(sequences::decay(&sequences::constant(halving(d)))),
        }
        Self::new(CORPUS_VERSION, seqs).expect("corpus members share a space")
    }

    /// Dense sequences for comparing convergence with the Cauchy property:
    /// convergent ones, their density-zero spike corruptions, and divergent
    /// ones (runaway, oscillating, random).
    pub fn convergence_family(dim: usize, seed: u64) -> Self {
        let space = Space::Dense(dim);
        let v = halving(dim).scale(0.5);
        let w = SpaceElement::Dense((0..dim).map(|i| (i + 1) as f64).collect());
        let neg_e1 = SpaceElement::unit(space, 1).scale(-1.0);
        let cv = sequences::constant(v.clone());
        let settling = sequences::combine(&cv, &sequences::decay(&sequences::constant(w.clone())), 1.0, 1.0).unwrap();
        let rnd = sequences::random_unit_ball(space, seed + 1);
        let zero = sequences::zero(space);
        let spike = sequences::spike_sequence;
        let seqs = vec![
            cv.clone(),
            sequences::constant(w.clone()),
            sequences::decay(&sequences::constant(w)),
            settling.clone(),
            spike(&cv, IndexSet::squares(), Magnitude::Index),
            spike(&cv, IndexSet::primes(), Magnitude::Index),
            spike(&settling, IndexSet::squares(), Magnitude::Index),
            spike(&sequences::decay(&cv), IndexSet::multiples(1000).unwrap(), Magnitude::Index),
            rnd.clone(),
            sequences::random_unit_ball(space, seed + 2),
            spike(&zero, IndexSet::complement(IndexSet::finite([1]).unwrap()), Magnitude::Index),
            spike(&sequences::constant(neg_e1), IndexSet::multiples(2).unwrap(), Magnitude::Constant(1.0)),
            zero.clone(),
            sequences::subsequence(
                &spike(&cv, IndexSet::squares(), Magnitude::Index),
                IndexSet::multiples(2).unwrap(),
                sequences::DEFAULT_SUBSEQUENCE_CAP,
            ),
            sequences::decay(&rnd),
            spike(&zero, IndexSet::squares(), Magnitude::Constant(5.0)),
            sequences::combine(&rnd, &cv, 0.001, 1.0).unwrap(),
        ];
        Self::new(CORPUS_VERSION, seqs).expect("corpus members share a space")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn sequences(&self) -> &[SequenceSpec] {
        &self.sequences
    }

    pub fn push(&mut self, seq: SequenceSpec) -> Result<()> {
        if seq.space() != self.space {
            return Err(crate::spaces::mismatch(self.space, seq.space()));
        }
        self.sequences.push(seq);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// st-bounded inputs give st-bounded images.
    StBounded,
    /// Norm-bounded inputs give st-bounded images.
    NStBounded,
    /// st-null inputs give st-null images.
    StContinuous,
    /// Norm-null inputs give st-null images.
    NStContinuous,
    /// st-bounded inputs give images with a statistical or subsequential limit.
    StCompact,
}

impl Property {
    pub const ALL: [Property; 5] =
        [Property::StBounded, Property::NStBounded, Property::StContinuous, Property::NStContinuous, Property::StCompact];

    pub fn name(&self) -> &'static str {
        match self {
            Property::StBounded => "st_bounded",
            Property::NStBounded => "n_st_bounded",
            Property::StContinuous => "st_continuous",
            Property::NStContinuous => "n_st_continuous",
            Property::StCompact => "st_compact",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown property `{s}`")))
    }
}

impl Serialize for Property {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Consistent,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Consistent => "consistent",
            Outcome::Refuted => "refuted",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// Horizon, tolerance, ε-grid and bound probes for a classification run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub settings: Settings,
    pub epsilon_grid: Vec<f64>,
    pub probes: Vec<f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self::new(Settings::classification())
    }
}

impl ClassifyConfig {
    pub fn new(settings: Settings) -> Self {
        Self { settings, epsilon_grid: DEFAULT_EPSILON_GRID.to_vec(), probes: default_probes(settings.horizon) }
    }
}

/// Per-sequence summary of a classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub sequence: String,
    pub hypothesis: Decision,
    /// Only evaluated when the hypothesis is confirmed.
    pub conclusion: Option<Decision>,
    /// Bound found for the image, for boundedness properties.
    pub bound: Option<f64>,
}

/// A corpus sequence whose verdicts violate the property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub sequence: String,
    pub hypothesis: StVerdict,
    pub conclusion: StVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub operator: String,
    pub property: Property,
    pub outcome: Outcome,
    pub corpus_version: String,
    pub horizon: u64,
    pub tolerance: f64,
    pub schedule: Schedule,
    pub epsilon_grid: Vec<f64>,
    pub probes: Vec<f64>,
    pub instances: Vec<Instance>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl Serialize for ClassificationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ClassificationReport", 12)?;
        s.serialize_field("operator", &self.operator)?;
        s.serialize_field("property", &self.property)?;
        s.serialize_field("outcome", &self.outcome)?;
        s.serialize_field("corpus_version", &self.corpus_version)?;
        s.serialize_field("horizon", &self.horizon)?;
        s.serialize_field("tolerance", &self.tolerance)?;
        s.serialize_field("schedule", &self.schedule.to_string())?;
        s.serialize_field("epsilon_grid", &self.epsilon_grid)?;
        s.serialize_field("probes", &self.probes)?;
        s.serialize_field("instances", &self.instances)?;
        s.serialize_field("witnesses", &self.witnesses)?;
        s.serialize_field("notes", &self.notes)?;
        s.end()
    }
}

/// Hypothesis verdict for one input sequence.
pub fn hypothesis_verdict(property: Property, seq: &SequenceSpec, config: &ClassifyConfig) -> Result<StVerdict> {
    let s = &config.settings;
    match property {
        Property::StBounded | Property::StCompact => st_bounded(seq, &config.probes, s),
        Property::NStBounded => {
            let (decision, m) = norm_bounded(seq, s)?;
            match (decision, m) {
                // With M above every norm the exceedance set is empty.
                (Decision::Confirmed, Some(m)) => st_bounded(seq, &[m], s),
                _ => {
                    let mut v = st_bounded(seq, &config.probes, s)?;
                    v.decision = Decision::Inconclusive;
                    Ok(v)
                }
            }
        }
        Property::StContinuous => st_converges(seq, &SpaceElement::zero(seq.space()), &config.epsilon_grid, s),
        Property::NStContinuous => {
            let mut v = st_converges(seq, &SpaceElement::zero(seq.space()), &config.epsilon_grid, s)?;
            if norm_null(seq, &config.epsilon_grid, s)? != Decision::Confirmed && v.decision == Decision::Confirmed {
                v.decision = Decision::Inconclusive;
            }
            Ok(v)
        }
    }
}

/// Conclusion verdict for one image sequence.
pub fn conclusion_verdict(property: Property, image: &SequenceSpec, config: &ClassifyConfig) -> Result<StVerdict> {
    let s = &config.settings;
    match property {
        Property::StBounded | Property::NStBounded => st_bounded(image, &config.probes, s),
        Property::StContinuous | Property::NStContinuous => {
            st_converges(image, &SpaceElement::zero(image.space()), &config.epsilon_grid, s)
        }
        Property::StCompact => st_subsequential(image, &config.epsilon_grid, s),
    }
}

fn transform_note(mapping: &Mapping) -> Option<String> {
    match mapping {
        Mapping::Transform(t) => Some(format!(
            "{t} scales each term by a factor that depends on its position; it is not a linear map of the space, \
             so this outcome describes the sequence map only"
        )),
        Mapping::Operator(_) => None,
    }
}

/// Runs the property's hypothesis on every corpus sequence and, where it is
/// confirmed, the conclusion on the image sequence.
pub fn classify(
    mapping: &Mapping,
    property: Property,
    corpus: &Corpus,
    config: &ClassifyConfig,
) -> Result<ClassificationReport> {
    if corpus.sequences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(d) = mapping.domain() {
        if d != corpus.space {
            return Err(crate::spaces::mismatch(d, corpus.space));
        }
    }
    let rows = par::map_slice(&corpus.sequences, |seq| -> Result<(Instance, Option<Witness>)> {
        let hyp = hypothesis_verdict(property, seq, config)?;
        if hyp.decision != Decision::Confirmed {
            let inst = Instance { sequence: seq.label().to_string(), hypothesis: hyp.decision, conclusion: None, bound: None };
            return Ok((inst, None));
        }
        let image = image_sequence(mapping, seq)?;
        let conc = conclusion_verdict(property, &image, config)?;
        let bound = match conc.kind {
            VerdictKind::Bounded { bound } => bound,
            _ => None,
        };
        let inst = Instance {
            sequence: seq.label().to_string(),
            hypothesis: hyp.decision,
            conclusion: Some(conc.decision),
            bound,
        };
        let witness = (conc.decision == Decision::Refuted).then(|| Witness {
            sequence: seq.label().to_string(),
            hypothesis: hyp,
            conclusion: conc,
        });
        Ok((inst, witness))
    });
    let mut instances = Vec::with_capacity(rows.len());
    let mut witnesses = Vec::new();
    for row in rows {
        let (inst, w) = row?;
        instances.push(inst);
        witnesses.extend(w);
    }
    let outcome = if !witnesses.is_empty() {
        Outcome::Refuted
    } else if instances.iter().any(|i| i.hypothesis == Decision::Confirmed) {
        Outcome::Consistent
    } else {
        Outcome::Inconclusive
    };
    Ok(ClassificationReport {
        operator: mapping.to_string(),
        property,
        outcome,
        corpus_version: corpus.version.clone(),
        horizon: config.settings.horizon,
        tolerance: config.settings.tolerance,
        schedule: config.settings.schedule,
        epsilon_grid: config.epsilon_grid.clone(),
        probes: config.probes.clone(),
        instances,
        witnesses,
        notes: transform_note(mapping).into_iter().collect(),
    })
}

fn field<'a>(v: &'a serde_json::Value, key: &str) -> Result<&'a serde_json::Value> {
    v.get(key).ok_or_else(|| Error::InvalidArgument(format!("report has no `{key}` field")))
}

fn float_list(v: &serde_json::Value, key: &str) -> Result<Vec<f64>> {
    field(v, key)?
        .as_array()
        .and_then(|a| a.iter().map(serde_json::Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Error::InvalidArgument(format!("`{key}` must be a list of numbers")))
}

fn text<'a>(v: &'a serde_json::Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| Error::InvalidArgument(format!("`{key}` must be a string")))
}

/// Re-runs every witness of a serialized report from the descriptors it
/// echoes. Each entry is true when the hypothesis is again confirmed and the
/// conclusion again refuted.
pub fn reverify_witnesses(report: &serde_json::Value) -> Result<Vec<bool>> {
    let mapping = crate::parse::parse_mapping(text(report, "operator")?)?;
    let property: Property = text(report, "property")?.parse()?;
    let horizon = field(report, "horizon")?
        .as_u64()
        .ok_or_else(|| Error::InvalidArgument("`horizon` must be an integer".into()))?;
    let tolerance = field(report, "tolerance")?
        .as_f64()
        .ok_or_else(|| Error::InvalidArgument("`tolerance` must be a number".into()))?;
    let schedule = crate::parse::parse_schedule(text(report, "schedule")?)?;
    let config = ClassifyConfig {
        settings: Settings { horizon, tolerance, schedule },
        epsilon_grid: float_list(report, "epsilon_grid")?,
        probes: float_list(report, "probes")?,
    };
    let witnesses = field(report, "witnesses")?
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("`witnesses` must be a list".into()))?;
    witnesses
        .iter()
        .map(|w| {
            let seq = crate::parse::parse_sequence(text(w, "sequence")?)?;
            let hyp = hypothesis_verdict(property, &seq, &config)?;
            if hyp.decision != Decision::Confirmed {
                return Ok(false);
            }
            let conc = conclusion_verdict(property, &image_sequence(&mapping, &seq)?, &config)?;
            Ok(conc.decision == Decision::Refuted)
        })
        .collect()
}
