mod common;

use nonloc::catalog;
use nonloc::format::{parse_measurement_list, parse_model, serialize_model, AnyModel, FormatError};
use nonloc::probabilistic::ProbError;
use nonloc::ModelError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPR: &str = r#"{"kind":"empirical",
 "measurements":[["X"],["Y"]], "outcomes":[["a","b"],["a","b"]],
 "support":[{"m":["X","Y"],"o":["a","b"]}, {"m":["X","Y"],"o":["b","a"]}]}"#;

#[test]
fn parses_hand_written_epr() {
    assert_eq!(parse_model(EPR).unwrap(), AnyModel::Empirical(catalog::epr_model()));
    let m = AnyModel::Empirical(catalog::epr_model());
    assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
}

#[test]
fn undeclared_label() {
    let bad = EPR.replace(r#""o":["b","a"]"#, r#""o":["b","c"]"#);
    match parse_model(&bad) {
        Err(FormatError::Entry { index: 1, message }) => assert!(message.contains('c'), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn weights_must_sum_to_one() {
    let text = r#"{"kind":"probabilistic",
     "measurements":[["X"],["Y"]], "outcomes":[["a","b"],["a","b"]],
     "support":[{"m":["X","Y"],"o":["a","b"],"p":"1/2"}, {"m":["X","Y"],"o":["b","a"],"p":"49/100"}]}"#;
    assert!(matches!(
        parse_model(text),
        Err(FormatError::Prob(ProbError::NotNormalized(_)))
    ));
}

#[test]
fn structural_errors() {
    assert!(matches!(
        parse_model("{\"kind\": "),
        Err(FormatError::Syntax { line: 1, .. })
    ));
    assert!(matches!(
        parse_model(&EPR.replace("empirical", "spooky")),
        Err(FormatError::Shape(_))
    ));
    let hidden_without_l = EPR.replace("empirical\",", "hidden\", \"lambdas\":[\"l\"],");
    assert!(matches!(
        parse_model(&hidden_without_l),
        Err(FormatError::Entry { index: 0, .. })
    ));
    let dup = EPR.replace(r#""o":["b","a"]"#, r#""o":["a","b"]"#);
    assert!(matches!(
        parse_model(&dup),
        Err(FormatError::Model(ModelError::DuplicateTuple(_)))
    ));
}

#[test]
fn measurement_lists() {
    let ty = catalog::hardy_type();
    let s = parse_measurement_list(&ty, "X1,Y1;X2,Y2").unwrap();
    assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![vec![0, 0], vec![1, 1]]);
    assert!(parse_measurement_list(&ty, "X1").is_err());
    assert!(parse_measurement_list(&ty, "X3,Y1").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_models_roundtrip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = common::random_type(&mut rng, 3, 3);
        let models = [
            AnyModel::Empirical(common::random_empirical(&mut rng, &ty)),
            AnyModel::Hidden(common::random_hidden(&mut rng, &ty, 3)),
            AnyModel::Prob(common::random_prob_empirical(&mut rng, &ty)),
            AnyModel::ProbHidden(common::random_prob_hidden(&mut rng, &ty, 3)),
        ];
        for m in models {
            let text = serialize_model(&m);
            prop_assert_eq!(parse_model(&text).unwrap(), m);
        }
    }
}
