use riskweave::metrics::{evaluate, reliability, scored_predictions};
use riskweave::narrate::{global_summary, narrate_prediction};
use riskweave::tabular::{split, synthesize_chd_like, AGE, ALCOHOL, CHOLESTEROL_HDL};
use riskweave::{predict, train, TemplateStore, TrainParams, VerbalMap};

#[test]
fn recovers_planted_rules() {
    let data = synthesize_chd_like(1, 2279).unwrap().dataset;
    let (train_set, test_set) = split(&data, 0.2, 1).unwrap();
    assert_eq!(test_set.len(), 456);
    let tree = train(&train_set, TrainParams::default()).unwrap();
    let accuracy = evaluate(&tree, &test_set).unwrap().accuracy().unwrap();
    assert!(accuracy >= 0.90, "accuracy {accuracy}");
    let used = tree.used_features();
    for f in [AGE, CHOLESTEROL_HDL, ALCOHOL] {
        assert!(used.contains(&f), "{f} missing from {used:?}");
    }

    let summary = global_summary(&tree, accuracy, &VerbalMap::default(), &TemplateStore::default()).unwrap();
    assert_eq!(summary.rules.iter().map(|r| r.samples).sum::<u64>(), train_set.len() as u64);

    let p = predict(&tree, &test_set.rows[0].values).unwrap();
    let e = narrate_prediction(&tree.schema, &p, accuracy, &VerbalMap::default(), &TemplateStore::default()).unwrap();
    assert!(e.text.starts_with("It is "));

    let diagram = reliability(&scored_predictions(&tree, &test_set).unwrap(), 10).unwrap();
    assert_eq!(diagram.total(), 456);
}
