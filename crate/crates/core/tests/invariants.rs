use proptest::prelude::*;

use stconv::classify::{classify, ClassifyConfig, Corpus, Property};
use stconv::density::{density_profile, IndexSet, Schedule};
use stconv::operators::{DiagonalRule, FunctionalSpec, Mapping, OperatorSpec, WeightRule};
use stconv::sequences;
use stconv::spaces::{Norm, Space, SpaceElement};
use stconv::stanalysis::{st_converges, Settings};

const NORM_TOL: f64 = 1e-12;
const LINEARITY_TOL: f64 = 1e-10;

fn sparse_elem() -> impl Strategy<Value = SpaceElement> {
    prop::collection::vec((1u64..40, -10.0f64..10.0), 0..6).prop_map(|pairs| {
        let mut pairs = pairs;
        pairs.sort_by_key(|p| p.0);
        pairs.dedup_by_key(|p| p.0);
        SpaceElement::sparse(pairs).unwrap()
    })
}

fn dense_elem(d: usize) -> impl Strategy<Value = SpaceElement> {
    prop::collection::vec(-10.0f64..10.0, d).prop_map(|v| SpaceElement::dense(v).unwrap())
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::Sup), Just(Norm::P(1.0)), Just(Norm::P(2.0)), (1.0f64..5.0).prop_map(Norm::P)]
}

fn basic_set() -> impl Strategy<Value = IndexSet> {
    prop_oneof![
        Just(IndexSet::primes()),
        Just(IndexSet::squares()),
        (1u64..30).prop_map(|m| IndexSet::multiples(m).unwrap()),
        prop::collection::vec(1u64..500, 0..20).prop_map(|v| IndexSet::finite(v).unwrap()),
    ]
}

fn set() -> impl Strategy<Value = IndexSet> {
    basic_set().prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(IndexSet::complement),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| IndexSet::union(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| IndexSet::intersection(a, b)),
        ]
    })
}

fn sparse_operator() -> impl Strategy<Value = OperatorSpec> {
    let diag = prop_oneof![
        Just(DiagonalRule::Identity),
        Just(DiagonalRule::Reciprocal),
        Just(DiagonalRule::PrimeScale),
        (-3.0f64..3.0).prop_map(DiagonalRule::Constant),
    ]
    .prop_map(|r| OperatorSpec::diagonal(r, Space::Sparse));
    let rank1 = (prop_oneof![Just(WeightRule::Index), Just(WeightRule::InverseSquare)], sparse_elem())
        .prop_map(|(w, y)| OperatorSpec::rank_one(FunctionalSpec::weighted(w), y, Space::Sparse).unwrap());
    prop_oneof![diag, rank1].prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| OperatorSpec::compose(a, b).unwrap()),
            (-2.0f64..2.0, inner.clone(), -2.0f64..2.0, inner)
                .prop_map(|(a, s, b, t)| OperatorSpec::linear_combo(a, s, b, t).unwrap()),
        ]
    })
}

fn scale_of(x: &SpaceElement) -> f64 {
    x.norm(Norm::Sup).unwrap().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_axioms_dense(x in dense_elem(5), y in dense_elem(5), a in -5.0f64..5.0, n in norm()) {
        let (nx, ny) = (x.norm(n).unwrap(), y.norm(n).unwrap());
        prop_assert!(nx >= 0.0);
        prop_assert_eq!(nx == 0.0, x.is_zero());
        prop_assert!(x.add(&y).unwrap().norm(n).unwrap() <= nx + ny + NORM_TOL * (1.0 + nx + ny));
        prop_assert!((x.scale(a).norm(n).unwrap() - a.abs() * nx).abs() <= NORM_TOL * (1.0 + a.abs() * nx));
    }

    #[test]
    fn norm_axioms_sparse(x in sparse_elem(), y in sparse_elem(), a in -5.0f64..5.0) {
        let (nx, ny) = (x.norm(Norm::Sup).unwrap(), y.norm(Norm::Sup).unwrap());
        prop_assert_eq!(nx == 0.0, x.is_zero());
        prop_assert!(x.add(&y).unwrap().norm(Norm::Sup).unwrap() <= nx + ny + NORM_TOL);
        prop_assert!((x.scale(a).norm(Norm::Sup).unwrap() - a.abs() * nx).abs() <= NORM_TOL * (1.0 + nx));
        prop_assert!((x.distance(&y, Norm::Sup).unwrap() - x.sub(&y).unwrap().norm(Norm::Sup).unwrap()).abs() <= NORM_TOL);
    }

    #[test]
    fn sparse_operators_are_linear(op in sparse_operator(), x in sparse_elem(), y in sparse_elem(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lhs = op.apply(&x.axpby(a, &y, b).unwrap()).unwrap();
        let rhs = op.apply(&x).unwrap().axpby(a, &op.apply(&y).unwrap(), b).unwrap();
        let scale = scale_of(&lhs).max(scale_of(&rhs));
        prop_assert!(lhs.distance(&rhs, Norm::Sup).unwrap() <= LINEARITY_TOL * scale);
    }

    #[test]
    fn matrices_are_linear(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 4),
                           x in dense_elem(4), y in dense_elem(4), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let op = OperatorSpec::matrix(rows).unwrap();
        let lhs = op.apply(&x.axpby(a, &y, b).unwrap()).unwrap();
        let rhs = op.apply(&x).unwrap().axpby(a, &op.apply(&y).unwrap(), b).unwrap();
        prop_assert!(lhs.distance(&rhs, Norm::Sup).unwrap() <= LINEARITY_TOL * scale_of(&lhs).max(scale_of(&rhs)));
    }

    #[test]
    fn complement_counts_add_up(s in set(), n in 1u64..3000) {
        let c = IndexSet::complement(s.clone());
        prop_assert_eq!(s.count(n) + c.count(n), n);
    }

    #[test]
    fn union_and_intersection_counts(a in basic_set(), b in basic_set(), n in 1u64..3000) {
        let u = IndexSet::union(a.clone(), b.clone()).count(n);
        let i = IndexSet::intersection(a.clone(), b.clone()).count(n);
        prop_assert_eq!(u + i, a.count(n) + b.count(n));
    }

    #[test]
    fn profile_matches_membership(s in set(), h in 100u64..5000) {
        let p = density_profile(&s, h, Schedule::Linear { step: 37 }).unwrap();
        let mask = s.mask(h);
        for (&n, &c) in p.checkpoints().iter().zip(p.counts()) {
            prop_assert_eq!(c, mask[..n as usize].iter().filter(|b| **b).count() as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exceedance_counts_shrink_with_epsilon(seed in 0u64..1000, mut grid in prop::collection::vec(0.001f64..3.0, 2..6)) {
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s = Settings::new(5_000, 0.1);
        for seq in [sequences::random_unit_ball(Space::Dense(3), seed), sequences::random_unit_ball(Space::Sparse, seed)] {
            let v = st_converges(&seq, &SpaceElement::zero(seq.space()), &grid, &s).unwrap();
            for w in v.per_epsilon.windows(2) {
                for (lo, hi) in w[0].profile.counts().iter().zip(w[1].profile.counts()) {
                    prop_assert!(lo >= hi);
                }
            }
        }
    }
}

#[test]
fn reports_are_byte_identical() {
    let config = ClassifyConfig::new(Settings::new(20_000, 0.1));
    for (mapping, property) in [
        (OperatorSpec::diagonal(DiagonalRule::PrimeScale, Space::Sparse), Property::StBounded),
        (OperatorSpec::rank_one(FunctionalSpec::weighted(WeightRule::Index), SpaceElement::unit(Space::Sparse, 1), Space::Sparse).unwrap(), Property::StCompact),
    ] {
        let mapping = Mapping::Operator(mapping);
        let run = || {
            let corpus = Corpus::default_for(Space::Sparse, 11);
            serde_json::to_string(&classify(&mapping, property, &corpus, &config).unwrap()).unwrap()
        };
        assert_eq!(run(), run());
    }
}
