mod common;

use std::collections::BTreeMap;

use nonloc::catalog;
use nonloc::constructions::{realize_sd, realize_wd_li};
use nonloc::deciders::decide_nsp;
use nonloc::probabilistic::{
    build_qh, chsh_sum, correlation_e, decompose, decompose_hidden, entropy, max_entropy_report, realizes, recompose,
    ProbError, CLASSICAL_CHSH_BOUND, TSIRELSON_BOUND,
};
use nonloc::properties::check_prob;
use nonloc::rational::{int, one, ratio, to_f64, zero, Rational};
use nonloc::{Cell, HiddenVariableModel, HvCell, ProbEmpiricalModel, ProbHVModel, ProbProperty as P, SystemType};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bell() -> SystemType {
    SystemType::homogeneous(2, &["0", "1"], &["0", "1"]).unwrap()
}

#[test]
fn collapse_examples() {
    assert_eq!(
        catalog::pr_box_probabilistic().possibilistic_collapse(),
        catalog::pr_box_relational()
    );
    let point = ProbEmpiricalModel::new(bell(), [(Cell::new(vec![1, 0], vec![0, 1]), one())]).unwrap();
    assert_eq!(point.possibilistic_collapse().len(), 1);
}

#[test]
fn decomposition_examples() {
    let ty = bell();
    let uniform = ProbEmpiricalModel::new(
        ty.clone(),
        ty.all_measurements()
            .flat_map(|m| ty.all_outcomes().map(move |o| (Cell::new(m.clone(), o), ratio(1, 16))))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let d = decompose(&uniform);
    assert!(d.prior.values().all(|t| *t == ratio(1, 4)));
    assert!(d
        .conditionals
        .values()
        .flat_map(|r| r.values())
        .all(|w| *w == ratio(1, 4)));

    let pr = catalog::pr_box_probabilistic();
    let d = decompose(&pr);
    assert_eq!(d.prior.len(), 4);
    assert!(d.prior.values().all(|t| *t == ratio(1, 4)));
    for (m, row) in &d.conditionals {
        for (o, w) in row {
            let expected = if (o[0] ^ o[1]) == (m[0] & m[1]) {
                ratio(1, 2)
            } else {
                zero()
            };
            assert_eq!(*w, expected);
        }
    }
    assert_eq!(recompose(ty, &d).unwrap(), pr);
}

#[test]
fn entropy_examples() {
    let quarter = vec![ratio(1, 4); 4];
    assert!((entropy(&quarter) - 2.0).abs() < 1e-12);
    assert_eq!(entropy(&[one()]), 0.0);
}

#[test]
fn qh_examples() {
    let h = realize_sd(&catalog::epr_model());
    let q = build_qh(&h).unwrap();
    assert!(q.weights().values().all(|w| *w == ratio(1, 2)));

    let ty = SystemType::homogeneous(2, &["x"], &["0", "1"]).unwrap();
    let cells = ty.all_outcomes().map(|o| HvCell::new(vec![0, 0], o, 0));
    let h = HiddenVariableModel::new(ty, HiddenVariableModel::numbered_lambdas(1), cells).unwrap();
    let q = build_qh(&h).unwrap();
    assert!(q.weights().values().all(|w| *w == ratio(1, 4)));

    let ghz = catalog::ghz_model(None).unwrap();
    let h = realize_wd_li(&ghz).unwrap();
    let q = build_qh(&h).unwrap();
    assert_eq!(q.possibilistic_collapse(), h);
    assert!(check_prob(&q, P::Pli).is_ok());

    let not_li = HiddenVariableModel::new(
        bell(),
        HiddenVariableModel::numbered_lambdas(2),
        [
            HvCell::new(vec![0, 0], vec![0, 0], 0),
            HvCell::new(vec![1, 1], vec![0, 0], 1),
        ],
    )
    .unwrap();
    assert!(matches!(build_qh(&not_li), Err(ProbError::NotLambdaIndependent(_))));
}

#[test]
fn qh_has_uniform_prior_and_conditionals() {
    let mut rng = common::rng(31);
    for _ in 0..200 {
        let ty = common::random_type(&mut rng, 3, 3);
        let h = common::random_li_hidden(&mut rng, &ty, 4);
        let q = build_qh(&h).unwrap();
        let d = decompose_hidden(&q);
        let pairs = Rational::from_integer(((h.active_lambdas().len() * h.domain().len()) as i64).into());
        assert!(d.prior.values().all(|t| *t == one() / &pairs));
        for row in d.conditionals.values() {
            let k = Rational::from_integer((row.len() as i64).into());
            assert!(row.values().all(|w| *w == one() / &k));
        }
    }
}

#[test]
fn realizes_examples() {
    let pr = catalog::pr_box_probabilistic();
    assert!(realizes(&pr.with_single_lambda(), &pr).unwrap());

    let ty = bell();
    let mut perturbed: Vec<(HvCell, Rational)> = pr
        .weights()
        .iter()
        .map(|(c, w)| (HvCell::new(c.m.clone(), c.o.clone(), 0), w.clone()))
        .collect();
    // 1/2 → 1/3 and 1/2 → 2/3 on the first row
    perturbed[0].1 = ratio(1, 12);
    perturbed[1].1 = ratio(1, 6);
    let q = ProbHVModel::new(ty, vec!["l".into()], perturbed).unwrap();
    assert!(!realizes(&q, &pr).unwrap());
}

#[test]
fn chsh_examples() {
    let pr = catalog::pr_box_probabilistic();
    let s = chsh_sum(&pr).unwrap();
    assert_eq!(s, int(4));
    assert!(to_f64(&s) > TSIRELSON_BOUND && TSIRELSON_BOUND > CLASSICAL_CHSH_BOUND);
    assert_eq!(correlation_e(&pr, "0", "0").unwrap(), one());
    assert_eq!(correlation_e(&pr, "1", "1").unwrap(), int(-1));

    let ty = bell();
    let uniform = ProbEmpiricalModel::new(
        ty.clone(),
        ty.all_measurements()
            .flat_map(|m| ty.all_outcomes().map(move |o| (Cell::new(m.clone(), o), ratio(1, 16))))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert_eq!(chsh_sum(&uniform).unwrap(), zero());
    let ghz = ProbEmpiricalModel::new(catalog::ghz_type(), [(Cell::new(vec![0, 0, 0], vec![0, 0, 0]), one())]).unwrap();
    assert!(matches!(chsh_sum(&ghz), Err(ProbError::Shape(_))));
}

#[test]
fn max_entropy_examples() {
    let ty = SystemType::homogeneous(1, &["x", "y"], &["0", "1"]).unwrap();
    let cells: Vec<HvCell> = ty
        .all_measurements()
        .flat_map(|m| ty.all_outcomes().map(move |o| HvCell::new(m.clone(), o, 0)))
        .collect();
    let h = HiddenVariableModel::new(ty.clone(), vec!["l".into()], cells.clone()).unwrap();
    let qh = build_qh(&h).unwrap();
    let r = max_entropy_report(&h, &qh).unwrap();
    assert!(r.prior_margin.abs() < 1e-12 && r.min_conditional_margin().abs() < 1e-12);

    // 2/3 – 1/3 prior
    let skewed = ProbHVModel::new(
        ty.clone(),
        vec!["l".into()],
        cells
            .iter()
            .map(|c| (c.clone(), if c.m == vec![0] { ratio(1, 3) } else { ratio(1, 6) })),
    )
    .unwrap();
    let r = max_entropy_report(&h, &skewed).unwrap();
    assert!(r.holds() && r.prior_margin > 1e-3);
    assert!(r.min_conditional_margin().abs() < 1e-12);

    // skewed conditional on row y
    let skewed = ProbHVModel::new(
        ty,
        vec!["l".into()],
        cells.iter().map(|c| {
            let w = match (c.m[0], c.o[0]) {
                (0, _) => ratio(1, 4),
                (_, 0) => ratio(1, 8),
                _ => ratio(3, 8),
            };
            (c.clone(), w)
        }),
    )
    .unwrap();
    let r = max_entropy_report(&h, &skewed).unwrap();
    assert!(r.holds() && r.prior_margin.abs() < 1e-12);
    assert!(r.conditional_margins[&(vec![1], 0)] > 1e-3);
    assert!(r.conditional_margins[&(vec![0], 0)].abs() < 1e-12);

    let other = realize_sd(&catalog::epr_model());
    assert!(matches!(
        max_entropy_report(&other, &qh),
        Err(ProbError::CollapseMismatch)
    ));
}

#[test]
fn nsp_witness_realized_by_single_lambda() {
    let pr = catalog::pr_box_relational();
    let w = decide_nsp(&pr).witness.unwrap();
    let q = w.with_single_lambda();
    assert!(realizes(&q, &w).unwrap());
    assert!(q.possibilistic_collapse().realizes(&w.possibilistic_collapse()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposition_roundtrip_and_entropy_lemma(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = common::random_type(&mut rng, 2, 3);
        let p = common::random_prob_empirical(&mut rng, &ty);
        prop_assert!(p.weights().len() <= 64);
        let d = decompose(&p);
        prop_assert_eq!(&recompose(ty.clone(), &d).unwrap(), &p);
        let weighted: f64 = d
            .prior
            .iter()
            .map(|(m, t)| to_f64(t) * entropy(d.conditionals[m].values()))
            .sum();
        let lhs = entropy(p.weights().values());
        prop_assert!((lhs - entropy(d.prior.values()) - weighted).abs() < 1e-9);
        prop_assert_eq!(common::total_mass(p.weights().values()), one());
    }

    // if q realizes p, the collapse of q realizes the collapse of p
    #[test]
    fn realization_survives_collapse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = common::random_type(&mut rng, 3, 2);
        let q = common::random_prob_hidden(&mut rng, &ty, 3);
        let p = q.lambda_marginal();
        prop_assert!(realizes(&q, &p).unwrap());
        prop_assert!(q.possibilistic_collapse().realizes(&p.possibilistic_collapse()));
        // reweighting the prior keeps the conditionals
        let d = decompose(&p);
        let prior: BTreeMap<Vec<usize>, Rational> = d.prior.keys().map(|m| (m.clone(), one() / Rational::from_integer((d.prior.len() as i64).into()))).collect();
        let p2 = ProbEmpiricalModel::from_conditionals(ty, Some(&prior), &d.conditionals).unwrap();
        prop_assert!(realizes(&q, &p2).unwrap());
    }
}
