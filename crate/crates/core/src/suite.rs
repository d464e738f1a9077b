//! Desk-scale checks of the structural statements about statistically
//! bounded, continuous and compact operators and statistical Cauchy sequences.
//!
//! Each check runs a fixed set of instances, counts passes, and records every
//! failure with the verdicts that caused it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::classify::{classify, ClassificationReport, ClassifyConfig, Corpus, Outcome, Property};
use crate::density::{density_verdict, Decision, DensityProfile, Target};
use crate::error::{Error, Result};
use crate::operators::{
    image_sequence, operator_norm_estimate, DiagonalRule, FunctionalSpec, Mapping, OperatorKind, OperatorSpec, SequenceTransform,
    WeightRule,
};
use crate::parse::{parse_element, parse_operator};
use crate::primes::is_prime;
use crate::sequences::{self, SequenceSpec};
use crate::spaces::{Space, SpaceElement};
use crate::stanalysis::{
    default_functionals, median_candidate, norm_bounded, st_bounded, st_cauchy, st_converges, weakly_st_bounded,
    Settings, StVerdict, VerdictKind,
};

pub const THEOREM_IDS: [&str; 14] = [
    "bounded_inclusion",
    "finite_dim_all_bounded",
    "theorem_M",
    "subspace_closure",
    "finite_rank_bounded",
    "bounded_iff_continuous",
    "continuity_inclusions",
    "compact_implies_bounded_and_continuous",
    "compact_composition",
    "compact_norm_limit",
    "unbounded_functional_not_compact",
    "weak_equiv",
    "cauchy_suite",
    "prime_scaling_readings",
];

/// Tolerance for `‖S_m − S‖ = 1/(m+1)`.
pub const NORM_LIMIT_TOLERANCE: f64 = 1e-12;
/// Truncation orders used for the norm-limit check.
pub const TRUNCATION_ORDERS: [u64; 5] = [1, 2, 4, 8, 16];
/// Exponents `k` of the doubling search `M = 2^k`.
pub const BOUND_EXPONENTS: std::ops::RangeInclusive<i32> = -20..=20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub instance: String,
    pub reason: String,
    pub witnesses: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheckResult {
    pub id: String,
    pub statement: String,
    pub min_instances: usize,
    pub instances: usize,
    pub passes: usize,
    pub failures: Vec<Failure>,
    pub details: serde_json::Value,
    pub status: Status,
}

/// Knobs for a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub classify: ClassifyConfig,
    /// Seed for corpora, random matrices and probe functionals.
    pub seed: u64,
    /// Fixes the dimension of the random matrices; by default it cycles 1..=8.
    pub matrix_dim: Option<usize>,
    pub matrix_count: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { classify: ClassifyConfig::default(), seed: 0, matrix_dim: None, matrix_count: 20 }
    }
}

impl SuiteConfig {
    pub fn settings(&self) -> &Settings {
        &self.classify.settings
    }
}

struct Tally {
    instances: usize,
    passes: usize,
    failures: Vec<Failure>,
}

impl Tally {
    fn new() -> Self {
        Self { instances: 0, passes: 0, failures: Vec::new() }
    }

    fn record(&mut self, instance: impl Into<String>, ok: bool, reason: impl Into<String>, witnesses: Vec<serde_json::Value>) {
        self.instances += 1;
        if ok {
            self.passes += 1;
        } else {
            self.failures.push(Failure { instance: instance.into(), reason: reason.into(), witnesses });
        }
    }

    fn finish(self, id: &str, statement: &str, min_instances: usize, details: serde_json::Value) -> TheoremCheckResult {
        let status = if self.failures.is_empty() && self.instances >= min_instances { Status::Pass } else { Status::Fail };
        TheoremCheckResult {
            id: id.to_string(),
            statement: statement.to_string(),
            min_instances,
            instances: self.instances,
            passes: self.passes,
            failures: self.failures,
            details,
            status,
        }
    }
}

fn op(src: &str) -> OperatorSpec {
    parse_operator(src).expect("catalogue descriptors are valid")
}

fn elem(src: &str) -> SpaceElement {
    parse_element(src).expect("catalogue literals are valid")
}

/// Seeded `d×d` matrix with entries in `[-1, 1]` rounded to three decimals.
pub fn random_matrix(d: usize, seed: u64) -> OperatorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..d)
        .map(|_| (0..d).map(|_| (rng.random_range(-1.0f64..=1.0) * 1000.0).round() / 1000.0).collect())
        .collect();
    OperatorSpec::matrix(rows).expect("square matrix")
}

/// Linear operators on c₀₀ used across checks, bounded and unbounded.
pub fn sparse_catalogue() -> Vec<OperatorSpec> {
    [
        "diag(identity)",
        "diag(reciprocal)",
        "diag(const(2))",
        "diag(prime_scale)",
        "rank1(coord(1), sparse{1:1})",
        "rank1(weighted(inverse_square), sparse{1:1, 2:-1})",
        "rank1(weighted(index), sparse{1:1})",
        "finite_rank(rank1(coord(1), sparse{1:1}), rank1(weighted(inverse_square), sparse{2:0.5}))",
        "compose(diag(reciprocal), diag(prime_scale))",
        "combo(1, diag(identity), -1, diag(reciprocal))",
    ]
    .into_iter()
    .map(op)
    .collect()
}

/// Linear operators on ℝ³.
pub fn dense_catalogue(seed: u64) -> Vec<OperatorSpec> {
    vec![
        random_matrix(3, seed + 101),
        random_matrix(3, seed + 102),
        op("rank1(weights[0.5,-1,0.25], dense[1,0,2])"),
        op("diag(const(3), dim=3)"),
        op("finite_rank(rank1(weights[1,0,0], dense[0,1,0]), rank1(coord(3), dense[1,1,1]))"),
    ]
}

/// Twenty finite-support elements with largest support index below 100.
pub fn harmonic_candidates() -> Vec<SpaceElement> {
    let mut out = vec![SpaceElement::zero(Space::Sparse)];
    let prefix = |j: u64| SpaceElement::sparse((1..=j).map(|k| (k, 1.0 / k as f64))).expect("valid prefix");
    out.extend((1..=10).map(prefix));
    out.extend([20, 50].map(prefix));
    for s in [
        "sparse{1:1}",
        "sparse{1:2}",
        "sparse{1:1, 2:0.5, 3:0.3}",
        "sparse{5:-1}",
        "sparse{1:0.5, 40:0.025}",
        "sparse{2:3}",
        "sparse{1:1, 2:0.5, 3:0.3333333333333333, 4:0.25, 97:0.01}",
    ] {
        out.push(elem(s));
    }
    out
}

fn largest_index(c: &SpaceElement) -> u64 {
    c.as_sparse().and_then(|s| s.max_index()).unwrap_or(0)
}

/// Runs checks and caches classifications shared between them.
pub struct Suite {
    config: SuiteConfig,
    reports: Mutex<HashMap<(String, Property), Arc<ClassificationReport>>>,
    corpora: Mutex<HashMap<String, Arc<Corpus>>>,
}

impl Suite {
    pub fn new(config: SuiteConfig) -> Self {
        Self { config, reports: Mutex::new(HashMap::new()), corpora: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.config
    }

    fn corpus(&self, space: Space) -> Arc<Corpus> {
        let key = space.to_string();
        let mut c = self.corpora.lock().expect("corpus cache poisoned");
        c.entry(key).or_insert_with(|| Arc::new(Corpus::default_for(space, self.config.seed))).clone()
    }

    /// Classification of `mapping` on the default corpus of its domain.
    pub fn report(&self, mapping: &Mapping, property: Property) -> Result<Arc<ClassificationReport>> {
        let key = (mapping.to_string(), property);
        if let Some(r) = self.reports.lock().expect("report cache poisoned").get(&key) {
            return Ok(r.clone());
        }
        let corpus = self.corpus(mapping.domain().unwrap_or(Space::Sparse));
        let r = Arc::new(classify(mapping, property, &corpus, &self.config.classify)?);
        self.reports.lock().expect("report cache poisoned").insert(key, r.clone());
        Ok(r)
    }

    fn outcome(&self, o: &OperatorSpec, property: Property) -> Result<(Outcome, Arc<ClassificationReport>)> {
        let r = self.report(&Mapping::Operator(o.clone()), property)?;
        Ok((r.outcome, r))
    }

    pub fn run_all(&self) -> Result<Vec<TheoremCheckResult>> {
        THEOREM_IDS.iter().map(|id| self.check(id)).collect()
    }

    pub fn check(&self, id: &str) -> Result<TheoremCheckResult> {
        match id {
            "bounded_inclusion" => self.bounded_inclusion(),
            "finite_dim_all_bounded" => self.finite_dim_all_bounded(),
            "theorem_M" => self.theorem_m(),
            "subspace_closure" => self.subspace_closure(),
            "finite_rank_bounded" => self.finite_rank_bounded(),
            "bounded_iff_continuous" => self.bounded_iff_continuous(),
            "continuity_inclusions" => self.continuity_inclusions(),
            "compact_implies_bounded_and_continuous" => self.compact_implies_bounded_and_continuous(),
            "compact_composition" => self.compact_composition(),
            "compact_norm_limit" => self.compact_norm_limit(),
            "unbounded_functional_not_compact" => self.unbounded_functional_not_compact(),
            "weak_equiv" => self.weak_equiv(),
            "cauchy_suite" => self.cauchy_suite(),
            "prime_scaling_readings" => self.prime_scaling_readings(),
            other => Err(Error::UnknownTheorem(other.to_string())),
        }
    }

    fn all_operators(&self) -> Vec<OperatorSpec> {
        let mut ops = sparse_catalogue();
        ops.extend(dense_catalogue(self.config.seed));
        ops
    }

    fn bounded_inclusion(&self) -> Result<TheoremCheckResult> {
        let s = self.config.settings();
        let mut t = Tally::new();
        for space in [Space::Sparse, Space::Dense(3)] {
            for seq in self.corpus(space).sequences() {
                let (nb, m) = norm_bounded(seq, s)?;
                if nb != Decision::Confirmed {
                    continue;
                }
                let v = st_bounded(seq, &self.config.classify.probes, s)?;
                let ok = v.decision == Decision::Confirmed;
                t.record(seq.label(), ok, format!("norm bounded by {m:?} but st_bounded {}", v.decision), vec![json!(v)]);
            }
        }
        for o in self.all_operators().into_iter().filter(OperatorSpec::has_norm_bound) {
            let (out, r) = self.outcome(&o, Property::NStBounded)?;
            t.record(o.to_string(), out == Outcome::Consistent, format!("n_st_bounded {out}"), vec![json!(*r)]);
        }
        Ok(t.finish(
            "bounded_inclusion",
            "norm-bounded sequences are st-bounded, and norm-bounded operators are n-st-bounded",
            10,
            json!({}),
        ))
    }

    fn finite_dim_all_bounded(&self) -> Result<TheoremCheckResult> {
        let s = self.config.settings();
        let mut t = Tally::new();
        let mut dims = Vec::new();
        for k in 1..=self.config.matrix_count {
            let d = self.config.matrix_dim.unwrap_or(1 + ((k - 1) % 8) as usize);
            dims.push(d);
            let m = random_matrix(d, self.config.seed + k);
            let (out, r) = self.outcome(&m, Property::StBounded)?;
            // Independent bound: ‖Sx‖ <= ‖S‖_F ‖x‖ on the first terms.
            let OperatorKind::Matrix { rows } = m.kind() else { unreachable!("random_matrix builds a matrix") };
            let frob = rows.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
            let mut bound_ok = true;
            for seq in self.corpus(Space::Dense(d)).sequences() {
                for n in 1..=1000.min(s.horizon) {
                    let x = seq.element(n)?;
                    let y = m.apply(&x)?;
                    let (ny, nx) = (y.norm(seq.norm())?, x.norm(seq.norm())?);
                    if ny > frob * nx * (1.0 + 1e-12) {
                        bound_ok = false;
                    }
                }
            }
            t.record(
                m.to_string(),
                out == Outcome::Consistent && bound_ok,
                format!("st_bounded {out}, Frobenius bound holds: {bound_ok}"),
                vec![json!(*r)],
            );
        }
        Ok(t.finish(
            "finite_dim_all_bounded",
            "every linear operator on a finite-dimensional space is st-bounded",
            self.config.matrix_count as usize,
            json!({ "dimensions": dims }),
        ))
    }

    /// Smallest `M = 2^k` with `{n : ‖Sx_n‖ > M‖x_n‖}` of confirmed density
    /// zero for every corpus sequence.
    pub fn bound_constant(&self, o: &OperatorSpec) -> Result<Option<f64>> {
        let s = self.config.settings();
        let checkpoints = s.schedule.checkpoints(s.horizon)?;
        let mut worst: Option<f64> = Some(0.0);
        for seq in self.corpus(o.domain()).sequences() {
            let image = image_sequence(&Mapping::Operator(o.clone()), seq)?;
            let (nx, ny) = (seq.norms(s.horizon)?, image.norms(s.horizon)?);
            let found = BOUND_EXPONENTS.map(|k| 2f64.powi(k)).find(|&m| {
                let mut counts = Vec::with_capacity(checkpoints.len());
                let mut c = 0u64;
                let mut k = 0usize;
                for &n in &checkpoints {
                    while k < n as usize {
                        if ny[k] > m * nx[k] {
                            c += 1;
                        }
                        k += 1;
                    }
                    counts.push(c);
                }
                let p = DensityProfile::new(checkpoints.clone(), counts).expect("valid counts");
                density_verdict(&p, Target::Zero, s.tolerance).map(|v| v.decision == Decision::Confirmed).unwrap_or(false)
            });
            worst = match (worst, found) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
        Ok(worst)
    }

    fn theorem_m(&self) -> Result<TheoremCheckResult> {
        let mut t = Tally::new();
        let mut details = Vec::new();
        let mut ops: Vec<(OperatorSpec, bool)> = vec![(OperatorSpec::identity(Space::Sparse), false)];
        for k in 1..=10u64 {
            ops.push((random_matrix(2 + (k % 3) as usize, self.config.seed + 200 + k), true));
        }
        ops.extend(sparse_catalogue().into_iter().filter(OperatorSpec::has_norm_bound).map(|o| (o, false)));
        for (o, compare) in ops {
            let (out, _) = self.outcome(&o, Property::StBounded)?;
            if out != Outcome::Consistent {
                continue;
            }
            let m = self.bound_constant(&o)?;
            let estimate = operator_norm_estimate(&o, 64)?;
            let within = m.is_some_and(|m| !compare || (estimate / 2.0 <= m && m <= 2.0 * estimate));
            details.push(json!({ "operator": o.to_string(), "M": m, "norm_estimate": estimate }));
            t.record(o.to_string(), within, format!("M = {m:?}, norm estimate {estimate}"), vec![]);
        }
        Ok(t.finish(
            "theorem_M",
            "an st-bounded operator satisfies ‖Sx_n‖ <= M‖x_n‖ for almost all n",
            5,
            json!(details),
        ))
    }

    fn scaled(o: &OperatorSpec, alpha: f64) -> Result<OperatorSpec> {
        let scale = OperatorSpec::diagonal(DiagonalRule::Constant(alpha), o.codomain());
        OperatorSpec::compose(scale, o.clone())
    }

    fn subspace_closure(&self) -> Result<TheoremCheckResult> {
        let sp = sparse_catalogue();
        let dn = dense_catalogue(self.config.seed);
        let pairs = [(&sp[1], &sp[5]), (&sp[0], &sp[7]), (&sp[2], &sp[1]), (&dn[0], &dn[1]), (&dn[0], &dn[3])];
        let mut t = Tally::new();
        for (a, b) in pairs {
            let pre = [self.outcome(a, Property::StBounded)?.0, self.outcome(b, Property::StBounded)?.0];
            if pre.iter().any(|o| *o != Outcome::Consistent) {
                t.record(format!("{a} and {b}"), false, format!("precondition failed: {pre:?}"), vec![]);
                continue;
            }
            for derived in [OperatorSpec::linear_combo(1.0, a.clone(), 1.0, b.clone())?, Self::scaled(a, -2.5)?] {
                let (out, r) = self.outcome(&derived, Property::StBounded)?;
                t.record(derived.to_string(), out == Outcome::Consistent, format!("st_bounded {out}"), vec![json!(*r)]);
            }
        }
        Ok(t.finish(
            "subspace_closure",
            "sums and scalar multiples of st-bounded operators are st-bounded",
            6,
            json!({}),
        ))
    }

    fn finite_rank_bounded(&self) -> Result<TheoremCheckResult> {
        let ops = [
            "rank1(coord(1), sparse{1:1})",
            "rank1(weighted(inverse_square), sparse{1:1, 2:-1})",
            "finite_rank(rank1(coord(1), sparse{1:1}), rank1(weighted(inverse_square), sparse{2:0.5}))",
            "rank1(weights[0.5,-1,0.25], dense[1,0,2])",
            "finite_rank(rank1(weights[1,0,0], dense[0,1,0]), rank1(coord(3), dense[1,1,1]))",
        ];
        let mut t = Tally::new();
        for src in ops {
            let (out, r) = self.outcome(&op(src), Property::StBounded)?;
            t.record(src, out == Outcome::Consistent, format!("st_bounded {out}"), vec![json!(*r)]);
        }
        Ok(t.finish("finite_rank_bounded", "finite-rank operators with bounded functionals are st-bounded", 3, json!({})))
    }

    fn bounded_iff_continuous(&self) -> Result<TheoremCheckResult> {
        let mut t = Tally::new();
        let mut rows = Vec::new();
        for o in self.all_operators() {
            let (b, rb) = self.outcome(&o, Property::StBounded)?;
            let (c, rc) = self.outcome(&o, Property::StContinuous)?;
            rows.push(json!({ "operator": o.to_string(), "st_bounded": b, "st_continuous": c }));
            t.record(o.to_string(), b == c, format!("st_bounded {b} but st_continuous {c}"), vec![json!(*rb), json!(*rc)]);
        }
        Ok(t.finish(
            "bounded_iff_continuous",
            "a linear operator is st-bounded iff it is st-continuous",
            10,
            json!(rows),
        ))
    }

    fn continuity_inclusions(&self) -> Result<TheoremCheckResult> {
        let mut t = Tally::new();
        for o in self.all_operators() {
            let (c, rc) = self.outcome(&o, Property::StContinuous)?;
            if o.has_norm_bound() {
                t.record(format!("{o}: norm-continuous"), c == Outcome::Consistent, format!("st_continuous {c}"), vec![json!(*rc)]);
            }
            if c == Outcome::Consistent {
                let (n, rn) = self.outcome(&o, Property::NStContinuous)?;
                t.record(format!("{o}: st-continuous"), n != Outcome::Refuted, format!("n_st_continuous {n}"), vec![json!(*rn)]);
            }
        }
        Ok(t.finish(
            "continuity_inclusions",
            "norm-continuous operators are st-continuous, and st-continuous ones are n-st-continuous",
            5,
            json!({}),
        ))
    }

    fn compact_implies_bounded_and_continuous(&self) -> Result<TheoremCheckResult> {
        let mut t = Tally::new();
        let mut compact = Vec::new();
        for o in self.all_operators() {
            let (k, _) = self.outcome(&o, Property::StCompact)?;
            if k != Outcome::Consistent {
                continue;
            }
            compact.push(o.to_string());
            let (b, rb) = self.outcome(&o, Property::StBounded)?;
            let (c, rc) = self.outcome(&o, Property::StContinuous)?;
            t.record(
                o.to_string(),
                b == Outcome::Consistent && c == Outcome::Consistent,
                format!("st_compact consistent, st_bounded {b}, st_continuous {c}"),
                vec![json!(*rb), json!(*rc)],
            );
        }
        Ok(t.finish(
            "compact_implies_bounded_and_continuous",
            "st-compact operators are st-bounded and st-continuous",
            3,
            json!({ "compact": compact }),
        ))
    }

    fn compact_composition(&self) -> Result<TheoremCheckResult> {
        let compact = ["diag(reciprocal)", "rank1(weighted(inverse_square), sparse{1:1, 2:-1})"].map(op);
        let left = ["diag(identity)", "diag(const(2))", "compose(diag(reciprocal), diag(prime_scale))"].map(op);
        let right = ["diag(identity)", "diag(const(2))", "combo(1, diag(identity), -1, diag(reciprocal))"].map(op);
        let mut t = Tally::new();
        for tk in &compact {
            let (pre, _) = self.outcome(tk, Property::StCompact)?;
            for s in &left {
                let (ps, _) = self.outcome(s, Property::StContinuous)?;
                let c = OperatorSpec::compose(s.clone(), tk.clone())?;
                self.composition_instance(&mut t, &c, pre == Outcome::Consistent && ps == Outcome::Consistent)?;
            }
            for r in &right {
                let (pr, _) = self.outcome(r, Property::StBounded)?;
                let c = OperatorSpec::compose(tk.clone(), r.clone())?;
                self.composition_instance(&mut t, &c, pre == Outcome::Consistent && pr == Outcome::Consistent)?;
            }
        }
        Ok(t.finish(
            "compact_composition",
            "S∘T and T∘R are st-compact for st-compact T, st-continuous S and st-bounded R",
            6,
            json!({}),
        ))
    }

    fn composition_instance(&self, t: &mut Tally, c: &OperatorSpec, preconditions: bool) -> Result<()> {
        if !preconditions {
            t.record(c.to_string(), false, "precondition failed", vec![]);
            return Ok(());
        }
        let (out, r) = self.outcome(c, Property::StCompact)?;
        t.record(c.to_string(), out == Outcome::Consistent, format!("st_compact {out}"), vec![json!(*r)]);
        Ok(())
    }

    /// `S_m = Σ_{k<=m} (1/k)·coord(k) e_k`, the truncation of `diag(reciprocal)`.
    pub fn truncation(m: u64) -> OperatorSpec {
        let terms = (1..=m)
            .map(|k| {
                let y = SpaceElement::sparse([(k, 1.0 / k as f64)]).expect("valid term");
                (FunctionalSpec::Coordinate(k), y)
            })
            .collect();
        OperatorSpec::finite_rank(terms, Space::Sparse).expect("valid truncation")
    }

    fn compact_norm_limit(&self) -> Result<TheoremCheckResult> {
        let limit = OperatorSpec::diagonal(DiagonalRule::Reciprocal, Space::Sparse);
        let mut t = Tally::new();
        let mut gaps = Vec::new();
        for m in TRUNCATION_ORDERS {
            let sm = Self::truncation(m);
            let diff = OperatorSpec::linear_combo(1.0, sm.clone(), -1.0, limit.clone())?;
            let gap = operator_norm_estimate(&diff, 4 * (m + 1))?;
            let exact = 1.0 / (m + 1) as f64;
            let (out, r) = self.outcome(&sm, Property::StCompact)?;
            gaps.push(json!({ "m": m, "gap": gap, "expected": exact }));
            t.record(
                sm.to_string(),
                (gap - exact).abs() <= NORM_LIMIT_TOLERANCE && out == Outcome::Consistent,
                format!("‖S_m − S‖ probe {gap}, expected {exact}; st_compact {out}"),
                vec![json!(*r)],
            );
        }
        let (out, r) = self.outcome(&limit, Property::StCompact)?;
        t.record(limit.to_string(), out == Outcome::Consistent, format!("st_compact {out}"), vec![json!(*r)]);
        Ok(t.finish(
            "compact_norm_limit",
            "a norm limit of st-compact operators is st-compact",
            TRUNCATION_ORDERS.len() + 1,
            json!(gaps),
        ))
    }

    fn unbounded_functional_not_compact(&self) -> Result<TheoremCheckResult> {
        let o = OperatorSpec::rank_one(FunctionalSpec::weighted(WeightRule::Index), elem("sparse{1:1}"), Space::Sparse)?;
        let (out, r) = self.outcome(&o, Property::StCompact)?;
        let witnesses: Vec<String> = r.witnesses.iter().map(|w| w.sequence.clone()).collect();
        let mut t = Tally::new();
        t.record(
            o.to_string(),
            out == Outcome::Refuted && !r.witnesses.is_empty(),
            format!("st_compact {out}"),
            vec![json!(*r)],
        );
        Ok(t.finish(
            "unbounded_functional_not_compact",
            "a rank-one operator built on an unbounded functional is not st-compact",
            1,
            json!({ "witnesses": witnesses }),
        ))
    }

    fn weak_equiv(&self) -> Result<TheoremCheckResult> {
        let s = self.config.settings();
        let probes = &self.config.classify.probes;
        let functionals = default_functionals(2, self.config.seed);
        let mut t = Tally::new();
        let family = Corpus::convergence_family(2, self.config.seed);
        let corpus = self.corpus(Space::Dense(2));
        for seq in family.sequences().iter().chain(corpus.sequences()) {
            let strong = st_bounded(seq, probes, s)?;
            let weak = weakly_st_bounded(seq, &functionals, probes, s)?;
            t.record(
                seq.label(),
                strong.decision == weak.decision,
                format!("st_bounded {} but weakly_st_bounded {}", strong.decision, weak.decision),
                vec![json!(strong), json!(weak)],
            );
        }
        Ok(t.finish(
            "weak_equiv",
            "weak st-boundedness and st-boundedness coincide",
            15,
            json!({ "functionals": functionals.len() }),
        ))
    }

    fn cauchy_suite(&self) -> Result<TheoremCheckResult> {
        let s = self.config.settings();
        let grid = &self.config.classify.epsilon_grid;
        let probes = &self.config.classify.probes;
        let mut t = Tally::new();
        let family = Corpus::convergence_family(3, self.config.seed);
        let dense = self.corpus(Space::Dense(3));
        let sparse = self.corpus(Space::Sparse);
        let mut agreement = Vec::new();
        let dense_seqs: Vec<&SequenceSpec> = family.sequences().iter().chain(dense.sequences()).collect();
        for seq in dense_seqs.iter().copied().chain(sparse.sequences()) {
            let is_dense = matches!(seq.space(), Space::Dense(_));
            let conv = st_converges(seq, &median_candidate(seq, s)?, grid, s)?;
            let cauchy = st_cauchy(seq, grid, s)?;
            if conv.decision == Decision::Confirmed {
                let b = st_bounded(seq, probes, s)?;
                t.record(
                    format!("{}: convergent implies bounded", seq.label()),
                    b.decision == Decision::Confirmed,
                    format!("st_bounded {}", b.decision),
                    vec![json!(conv), json!(b)],
                );
                t.record(
                    format!("{}: convergent implies Cauchy", seq.label()),
                    cauchy.decision != Decision::Refuted,
                    "st_cauchy refuted",
                    vec![json!(conv), json!(cauchy)],
                );
            }
            if is_dense {
                let clash = matches!(
                    (conv.decision, cauchy.decision),
                    (Decision::Confirmed, Decision::Refuted) | (Decision::Refuted, Decision::Confirmed)
                );
                agreement.push(json!({ "sequence": seq.label(), "converges": conv.decision, "cauchy": cauchy.decision }));
                t.record(
                    format!("{}: Cauchy iff convergent", seq.label()),
                    !clash,
                    format!("st_converges {} but st_cauchy {}", conv.decision, cauchy.decision),
                    vec![json!(conv), json!(cauchy)],
                );
            }
        }
        let (ok, witnesses) = harmonic_separation(s, grid)?;
        t.record("harmonic: Cauchy but not convergent in c₀₀", ok, "separation did not reproduce", witnesses);
        Ok(t.finish(
            "cauchy_suite",
            "convergent sequences are st-bounded and st-Cauchy; in ℝ^d st-Cauchy iff st-convergent; in c₀₀ the harmonic prefixes are st-Cauchy without a limit",
            15,
            json!({ "dense_agreement": agreement }),
        ))
    }

    fn prime_scaling_readings(&self) -> Result<TheoremCheckResult> {
        let s = self.config.settings();
        let mut t = Tally::new();
        let transform = Mapping::Transform(SequenceTransform::prime_scale_by_position());
        let r = self.report(&transform, Property::StBounded)?;
        let unit = r.instances.iter().find(|i| i.sequence == "unit_coords");
        t.record(
            transform.to_string(),
            r.outcome == Outcome::Consistent && unit.is_some_and(|i| i.bound == Some(1.0)),
            format!("st_bounded {} with bound {:?}", r.outcome, unit.and_then(|i| i.bound)),
            vec![json!(*r)],
        );
        let image = image_sequence(&transform, &sequences::unit_coords())?;
        let norms = image.norms(s.horizon)?;
        let outside: Vec<u64> =
            (1..=s.horizon).filter(|&n| norms[n as usize - 1] > 1.0 && !is_prime(n)).take(5).collect();
        t.record(
            "exceedance of the transformed unit coordinates lies in the primes",
            outside.is_empty(),
            format!("non-prime exceedances {outside:?}"),
            vec![],
        );
        let diag = Mapping::Operator(OperatorSpec::diagonal(DiagonalRule::PrimeScale, Space::Sparse));
        let r = self.report(&diag, Property::StBounded)?;
        let witnessed = r.witnesses.iter().any(|w| w.sequence == "prime_coords");
        t.record(diag.to_string(), r.outcome == Outcome::Refuted && witnessed, format!("st_bounded {}", r.outcome), vec![json!(*r)]);
        Ok(t.finish(
            "prime_scaling_readings",
            "scaling prime positions by n keeps sequences st-bounded, while the diagonal operator scaling prime coordinates does not",
            3,
            json!({
                "discrepancy": "the position-dependent reading is st-bounded with M = 1; the diagonal reading maps the st-bounded sequence e_{p_n} to norms p_n"
            }),
        ))
    }
}

/// The harmonic prefixes are st-Cauchy, and every candidate from
/// [`harmonic_candidates`] is refuted as a limit with final exceedance ratio
/// at least 0.99 for each grid ε below `1/(j+1)`, `j` the largest support index.
pub fn harmonic_separation(settings: &Settings, grid: &[f64]) -> Result<(bool, Vec<serde_json::Value>)> {
    let h = sequences::harmonic_prefix_sequence();
    let cauchy = st_cauchy(&h, grid, settings)?;
    let mut ok = cauchy.decision == Decision::Confirmed;
    let mut witnesses = vec![json!(cauchy)];
    for c in harmonic_candidates() {
        let v = st_converges(&h, &c, grid, settings)?;
        let j = largest_index(&c);
        let ratios_ok = grid
            .iter()
            .zip(&v.per_epsilon)
            .filter(|(e, _)| **e < 1.0 / (j + 1) as f64)
            .all(|(_, d)| d.profile.final_ratio() >= 0.99);
        if v.decision != Decision::Refuted || !ratios_ok {
            ok = false;
            witnesses.push(json!(v));
        }
    }
    Ok((ok, witnesses))
}

/// Reads the bound found by an st-bounded verdict.
pub fn verdict_bound(v: &StVerdict) -> Option<f64> {
    match v.kind {
        VerdictKind::Bounded { bound } => bound,
        _ => None,
    }
}

/// Runs one named check with a fresh cache.
pub fn check_theorem(id: &str, config: SuiteConfig) -> Result<TheoremCheckResult> {
    Suite::new(config).check(id)
}

/// Runs every check.
pub fn run_suite(config: SuiteConfig) -> Result<Vec<TheoremCheckResult>> {
    Suite::new(config).run_all()
}
