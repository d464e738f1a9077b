//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.
//!
//! Runs without the libtest harness so the lines always reach the output, and
//! criteria run one after another so that wall-clock limits are not distorted
//! by other tests sharing the machine.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde_json::Value;

use stconv::classify::{classify, ClassifyConfig, Corpus, Outcome, Property};
use stconv::density::{density_profile, Decision, IndexSet, Schedule};
use stconv::operators::{
    image_sequence, DiagonalRule, Mapping, OperatorKind, OperatorSpec, SequenceTransform,
};
use stconv::par::{self, Execution};
use stconv::parse::parse_operator;
use stconv::sequences::{self, SequenceSpec};
use stconv::spaces::{Norm, Space, SpaceElement};
use stconv::stanalysis::{st_cauchy, st_converges, median_candidate, Settings, DEFAULT_EPSILON_GRID};
use stconv::suite::{harmonic_candidates, Status, Suite, SuiteConfig, NORM_LIMIT_TOLERANCE};

const DENSITY_LIMIT: Duration = Duration::from_secs(5);
const PRIME_EXAMPLE_LIMIT: Duration = Duration::from_secs(30);
const SUITE_LIMIT: Duration = Duration::from_secs(120);
const PRIME_HORIZON: u64 = 1_000_000;
const CLASSIFICATION_HORIZON: u64 = 100_000;
const NORM_AXIOM_TOL: f64 = 1e-12;
const LINEARITY_TOL: f64 = 1e-10;
/// Relative agreement between the power-iteration estimate and the SVD norm.
const SVD_AGREEMENT: f64 = 1e-6;
const HARMONIC_MIN_RATIO: f64 = 0.99;
const MIN_DENSE_CORPUS: usize = 15;

/// Plain Eratosthenes sieve, written independently of the library.
fn sieve(n: usize) -> Vec<bool> {
    let mut is = vec![true; n + 1];
    is[0] = false;
    if n >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is
}

struct Outcomes(Vec<bool>);

impl Outcomes {
    fn record(&mut self, id: u8, name: &str, started: Instant, limit: Option<Duration>, result: Result<(), String>) {
        let elapsed = started.elapsed();
        let result = match (result, limit) {
            (Ok(()), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        let line = match &result {
            Ok(()) => format!("criterion {id} PASS {name} ({elapsed:.2?})"),
            Err(e) => format!("criterion {id} FAIL {name} ({elapsed:.2?}): {e}"),
        };
        println!("{line}");
        self.0.push(result.is_ok());
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion_density() -> Result<(), String> {
    let primes = IndexSet::primes();
    let profile = density_profile(&primes, PRIME_HORIZON, Schedule::default()).map_err(|e| e.to_string())?;
    let oracle = sieve(PRIME_HORIZON as usize);
    let mut running = 0u64;
    let mut k = 0usize;
    for (&n, &c) in profile.checkpoints().iter().zip(profile.counts()) {
        while k < n as usize {
            k += 1;
            running += oracle[k] as u64;
        }
        ensure!(c == running, "prime count at {n}: engine {c}, sieve {running}");
    }
    ensure!(profile.final_count() == 78_498, "pi(10^6) = {}", profile.final_count());
    ensure!(profile.final_ratio() == 78_498.0 / 1e6, "final ratio {}", profile.final_ratio());

    let bounds: Vec<u64> = (1..=10_000).collect();
    for m in 1..=50u64 {
        let set = IndexSet::multiples(m).map_err(|e| e.to_string())?;
        for (&n, &c) in bounds.iter().zip(&set.counts_at(&bounds)) {
            ensure!((m * c).abs_diff(n) < m, "multiples({m}): count({n}) = {c}");
        }
    }
    Ok(())
}

fn criterion_prime_example() -> Result<(), String> {
    let config = ClassifyConfig::new(Settings::classification());
    let corpus = Corpus::default_for(Space::Sparse, 0);
    let transform = Mapping::Transform(SequenceTransform::prime_scale_by_position());
    let r = classify(&transform, Property::StBounded, &corpus, &config).map_err(|e| e.to_string())?;
    ensure!(r.outcome == Outcome::Consistent, "transform st_bounded {}", r.outcome);
    let unit = r.instances.iter().find(|i| i.sequence == "unit_coords").ok_or("unit_coords missing from corpus")?;
    ensure!(unit.bound == Some(1.0), "bound on transformed unit_coords {:?}", unit.bound);

    let oracle = sieve(CLASSIFICATION_HORIZON as usize);
    let image = image_sequence(&transform, &sequences::unit_coords()).map_err(|e| e.to_string())?;
    let norms = image.norms(CLASSIFICATION_HORIZON).map_err(|e| e.to_string())?;
    for (i, &v) in norms.iter().enumerate() {
        let n = i + 1;
        ensure!(v <= 1.0 || oracle[n], "exceedance at non-prime {n} (norm {v})");
        ensure!(!oracle[n] || v == n as f64, "transformed e_{n} has norm {v}");
    }

    let diag = Mapping::Operator(OperatorSpec::diagonal(DiagonalRule::PrimeScale, Space::Sparse));
    let r = classify(&diag, Property::StBounded, &corpus, &config).map_err(|e| e.to_string())?;
    ensure!(r.outcome == Outcome::Refuted, "diagonal reading st_bounded {}", r.outcome);
    ensure!(r.witnesses.iter().any(|w| w.sequence == "prime_coords"), "prime_coords is not a witness");

    let suite = Suite::new(SuiteConfig::default());
    let check = suite.check("prime_scaling_readings").map_err(|e| e.to_string())?;
    ensure!(check.status == Status::Pass, "prime_scaling_readings failed: {:?}", check.failures);
    ensure!(check.details.get("discrepancy").is_some(), "report does not document the discrepancy");
    Ok(())
}

fn criterion_harmonic() -> Result<(), String> {
    let s = Settings::new(CLASSIFICATION_HORIZON, 0.01);
    let grid = DEFAULT_EPSILON_GRID;
    let h = sequences::harmonic_prefix_sequence();
    let c = st_cauchy(&h, &grid, &s).map_err(|e| e.to_string())?;
    ensure!(c.decision == Decision::Confirmed, "st_cauchy {}", c.decision);

    let candidates = harmonic_candidates();
    ensure!(candidates.len() == 20, "{} candidates", candidates.len());
    for cand in &candidates {
        let j = cand.as_sparse().and_then(|v| v.max_index()).unwrap_or(0);
        let v = st_converges(&h, cand, &grid, &s).map_err(|e| e.to_string())?;
        ensure!(v.decision == Decision::Refuted, "st_converges to {cand}: {}", v.decision);
        for (&eps, d) in grid.iter().zip(&v.per_epsilon) {
            if eps < 1.0 / (j + 1) as f64 {
                // Every term past index j differs from the candidate at coordinate j+1.
                let floor = CLASSIFICATION_HORIZON - j;
                ensure!(d.profile.final_count() >= floor, "{cand}, eps {eps}: count {}", d.profile.final_count());
                ensure!(d.profile.final_ratio() >= HARMONIC_MIN_RATIO, "{cand}, eps {eps}: ratio {}", d.profile.final_ratio());
            }
        }
    }
    Ok(())
}

fn svd_norm(rows: &[Vec<f64>]) -> f64 {
    let d = rows.len();
    let m = DMatrix::from_row_slice(d, d, &rows.concat());
    m.singular_values().max()
}

fn criterion_suite() -> Result<(), String> {
    let suite = Suite::new(SuiteConfig::default());
    let results = suite.run_all().map_err(|e| e.to_string())?;
    for r in &results {
        ensure!(r.status == Status::Pass, "{} failed ({}/{}): {:?}", r.id, r.passes, r.instances, r.failures.first());
    }
    let by_id = |id: &str| results.iter().find(|r| r.id == id).ok_or(format!("{id} missing"));

    let fd = by_id("finite_dim_all_bounded")?;
    ensure!(fd.instances == 20 && fd.passes == 20, "finite_dim_all_bounded {}/{}", fd.passes, fd.instances);
    let dims: Vec<u64> = fd.details["dimensions"].as_array().ok_or("no dimensions")?.iter().filter_map(Value::as_u64).collect();
    ensure!(dims.len() == 20 && dims.iter().all(|&d| (1..=8).contains(&d)), "dimensions {dims:?}");

    let bc = by_id("bounded_iff_continuous")?;
    ensure!(bc.instances >= 10, "bounded_iff_continuous on {} operators", bc.instances);

    let mut matrices = 0;
    for entry in by_id("theorem_M")?.details.as_array().ok_or("theorem_M details")? {
        let op = parse_operator(entry["operator"].as_str().ok_or("operator")?).map_err(|e| e.to_string())?;
        let OperatorKind::Matrix { rows } = op.kind() else { continue };
        if rows.len() > 4 {
            continue;
        }
        matrices += 1;
        let exact = svd_norm(rows);
        let est = entry["norm_estimate"].as_f64().ok_or("estimate")?;
        let m = entry["M"].as_f64().ok_or("M")?;
        ensure!(est <= exact * (1.0 + 1e-12) && est >= exact * (1.0 - SVD_AGREEMENT), "{op}: estimate {est}, SVD {exact}");
        ensure!(exact / 2.0 <= m && m <= 2.0 * exact, "{op}: M = {m}, SVD norm {exact}");
        ensure!(est / 2.0 <= m && m <= 2.0 * est, "{op}: M = {m}, estimate {est}");
    }
    ensure!(matrices >= 5, "only {matrices} matrix operators checked against SVD");

    for gap in by_id("compact_norm_limit")?.details.as_array().ok_or("gaps")? {
        let m = gap["m"].as_u64().ok_or("m")?;
        let g = gap["gap"].as_f64().ok_or("gap")?;
        ensure!((g - 1.0 / (m + 1) as f64).abs() <= NORM_LIMIT_TOLERANCE, "m = {m}: gap {g}");
    }
    Ok(())
}

fn criterion_cauchy_convergence() -> Result<(), String> {
    let s = Settings::classification();
    let grid = DEFAULT_EPSILON_GRID;
    let family = Corpus::convergence_family(3, 0);
    let corpus = Corpus::default_for(Space::Dense(3), 0);
    let seqs: Vec<&SequenceSpec> = family.sequences().iter().chain(corpus.sequences()).collect();
    ensure!(seqs.len() >= MIN_DENSE_CORPUS, "dense corpus has {} sequences", seqs.len());
    let corrupted = seqs.iter().filter(|q| q.label().starts_with("spike(") && !q.label().starts_with("spike(squares") ).count();
    ensure!(corrupted >= 3, "only {corrupted} spike corruptions of a nonzero base");
    let mut decided = 0;
    for seq in seqs {
        let conv = st_converges(seq, &median_candidate(seq, &s).map_err(|e| e.to_string())?, &grid, &s)
            .map_err(|e| e.to_string())?;
        let cauchy = st_cauchy(seq, &grid, &s).map_err(|e| e.to_string())?;
        match (conv.decision, cauchy.decision) {
            (Decision::Confirmed, Decision::Refuted) | (Decision::Refuted, Decision::Confirmed) => {
                return Err(format!("{}: converges {}, cauchy {}", seq.label(), conv.decision, cauchy.decision));
            }
            (a, b) if a == b && a != Decision::Inconclusive => decided += 1,
            _ => {}
        }
    }
    ensure!(decided >= MIN_DENSE_CORPUS, "only {decided} sequences reached matching decisions");
    Ok(())
}

fn criterion_invariants() -> Result<(), String> {
    // Norm axioms on sampled elements.
    let pool: Vec<(SpaceElement, SpaceElement, Norm)> = {
        let mut v = Vec::new();
        for seed in 0..20 {
            for (space, norm) in [(Space::Sparse, Norm::Sup), (Space::Dense(4), Norm::P(2.0)), (Space::Dense(4), Norm::P(1.0)), (Space::Dense(4), Norm::Sup)] {
                let a = sequences::random_unit_ball(space, seed);
                let b = sequences::random_unit_ball(space, seed + 100);
                for n in 1..=10 {
                    v.push((a.element(n).map_err(|e| e.to_string())?.scale(n as f64), b.element(n).map_err(|e| e.to_string())?, norm));
                }
            }
        }
        v
    };
    for (x, y, norm) in &pool {
        let nx = x.norm(*norm).map_err(|e| e.to_string())?;
        let ny = y.norm(*norm).map_err(|e| e.to_string())?;
        let nxy = x.add(y).map_err(|e| e.to_string())?.norm(*norm).map_err(|e| e.to_string())?;
        ensure!(nx >= 0.0 && (nx == 0.0) == x.is_zero(), "definiteness for {x}");
        ensure!(nxy <= nx + ny + NORM_AXIOM_TOL, "triangle: {x} + {y}");
        for a in [-3.5, 0.0, 0.25, 7.0] {
            let na = x.scale(a).norm(*norm).map_err(|e| e.to_string())?;
            ensure!((na - a.abs() * nx).abs() <= NORM_AXIOM_TOL * (1.0 + nx), "homogeneity: {a}·{x}");
        }
    }

    // Linearity of operators on sampled pairs.
    let ops = [
        "diag(prime_scale)",
        "diag(reciprocal)",
        "rank1(weighted(inverse_square), sparse{1:1, 2:-1})",
        "compose(diag(reciprocal), diag(prime_scale))",
        "combo(1, diag(identity), -1, diag(reciprocal))",
        "matrix[[0.5,-1,2,0],[1,1,0,3],[0,0,1,0],[2,0,0,-1]]",
        "rank1(weights[1,2,3,4], dense[1,0,0,1])",
    ];
    for src in ops {
        let op = parse_operator(src).map_err(|e| e.to_string())?;
        let a = sequences::random_unit_ball(op.domain(), 1);
        let b = sequences::random_unit_ball(op.domain(), 2);
        for n in 1..=50 {
            let (x, y) = (a.element(n).map_err(|e| e.to_string())?, b.element(n).map_err(|e| e.to_string())?);
            let (al, be) = (1.5 - n as f64 / 10.0, -2.0 + n as f64 / 7.0);
            let lhs = op.apply(&x.axpby(al, &y, be).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let rhs = op.apply(&x).map_err(|e| e.to_string())?.axpby(al, &op.apply(&y).map_err(|e| e.to_string())?, be).map_err(|e| e.to_string())?;
            let gap = lhs.distance(&rhs, Norm::Sup).map_err(|e| e.to_string())?;
            ensure!(gap <= LINEARITY_TOL, "{src}: linearity gap {gap} at n = {n}");
        }
    }

    // Exceedance counts shrink as ε grows.
    let s = Settings::new(10_000, 0.1);
    let fine: Vec<f64> = vec![0.001, 0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0];
    for seq in Corpus::default_for(Space::Sparse, 0).sequences() {
        let v = st_converges(seq, &SpaceElement::zero(Space::Sparse), &fine, &s).map_err(|e| e.to_string())?;
        for w in v.per_epsilon.windows(2) {
            for (lo, hi) in w[0].profile.counts().iter().zip(w[1].profile.counts()) {
                ensure!(lo >= hi, "{}: counts not monotone in epsilon", seq.label());
            }
        }
    }

    // Complement counts add up to n.
    let bounds: Vec<u64> = (1..=5_000).collect();
    for set in [IndexSet::primes(), IndexSet::squares(), IndexSet::multiples(7).map_err(|e| e.to_string())?] {
        let c = IndexSet::complement(set.clone());
        for ((&n, a), b) in bounds.iter().zip(set.counts_at(&bounds)).zip(c.counts_at(&bounds)) {
            ensure!(a + b == n, "complement of {set} at {n}");
        }
    }

    // Determinism of serialized reports, across runs and execution modes.
    let config = ClassifyConfig::new(Settings::new(20_000, 0.1));
    let corpus = Corpus::default_for(Space::Sparse, 5);
    let mapping = Mapping::Operator(OperatorSpec::diagonal(DiagonalRule::PrimeScale, Space::Sparse));
    let mut outputs = Vec::new();
    for mode in [Execution::Parallel, Execution::Parallel, Execution::Sequential] {
        par::set_execution(mode);
        let r = classify(&mapping, Property::StCompact, &corpus, &config).map_err(|e| e.to_string())?;
        outputs.push(serde_json::to_string(&r).map_err(|e| e.to_string())?);
    }
    par::set_execution(Execution::Parallel);
    ensure!(outputs.windows(2).all(|w| w[0] == w[1]), "reports differ between runs");
    Ok(())
}

fn main() {
    let mut out = Outcomes(Vec::new());
    let t = Instant::now();
    out.record(1, "density engine: prime count and multiples", t, Some(DENSITY_LIMIT), criterion_density());
    let t = Instant::now();
    out.record(2, "prime scaling readings", t, Some(PRIME_EXAMPLE_LIMIT), criterion_prime_example());
    let t = Instant::now();
    out.record(3, "harmonic prefixes are Cauchy without a limit", t, None, criterion_harmonic());
    let t = Instant::now();
    out.record(4, "structural suite", t, Some(SUITE_LIMIT), criterion_suite());
    let t = Instant::now();
    out.record(5, "Cauchy iff convergent on dense corpus", t, None, criterion_cauchy_convergence());
    let t = Instant::now();
    out.record(6, "invariants", t, None, criterion_invariants());
    let failed = out.0.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", out.0.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
