mod common;

use boxvis::corpus::ChartType;
use boxvis::explain::explain_trace;
use boxvis::features::FeatureRegistry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_traces_pass_the_audit() {
    let explained = common::explanation_audit(300, 8).unwrap();
    assert!(explained > 100, "only {explained} traces produced features");
}

#[test]
fn explanations_are_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let t = common::random_trace(&mut rng);
        let a = explain_trace(&[ChartType::Bar], &t, FeatureRegistry::builtin());
        let b = explain_trace(&[ChartType::Bar], &t, FeatureRegistry::builtin());
        assert_eq!(a, b);
    }
}

#[test]
fn machine_readable_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = loop {
        let t = common::random_trace(&mut rng);
        let e = explain_trace(&[ChartType::Line], &t, FeatureRegistry::builtin());
        if !e.features.is_empty() {
            break e;
        }
    };
    let v = serde_json::to_value(&e).unwrap();
    assert_eq!(v["types"][0], "line");
    for f in v["features"].as_array().unwrap() {
        for key in ["name", "scope", "importance", "phrase"] {
            assert!(f.get(key).is_some(), "missing {key}");
        }
    }
    assert!(v["text"]
        .as_str()
        .unwrap()
        .starts_with("Line chart is recommended if "));
}
