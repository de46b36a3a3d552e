use super::*;
use crate::tabular::{read_csv, Attribute};

fn rec(pairs: &[(&str, Value)]) -> Record {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn num(x: f64) -> Value {
    Value::Number(x)
}

fn points() -> Vec<Record> {
    [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]
        .iter()
        .map(|&(x, y)| rec(&[("x", num(x)), ("y", num(y))]))
        .collect()
}

#[test]
fn linear_regression_recovers_exact_line() {
    let m = RelationshipModel::new("line", RelationshipKind::LinearRegression, &["x"], Some("y"))
        .train(&points())
        .unwrap();
    let params = m.parameters().unwrap();
    assert!((params[0].1 - 1.0).abs() < 1e-12);
    assert!((params[1].1 - 2.0).abs() < 1e-12);
    let p = m.predict(&rec(&[("x", num(3.0))])).unwrap();
    assert!((p.as_f64().unwrap() - 7.0).abs() < 1e-12);
    let report = m.evaluate(&points()).unwrap();
    assert!(report.rmse().unwrap() < 1e-12);
    assert!((report.r_squared().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report.scalar_count(), 2);
}

#[test]
fn normal_fit_uses_sample_std() {
    let rows: Vec<Record> = [10.0, 20.0, 30.0].iter().map(|&v| rec(&[("v", num(v))])).collect();
    let m = RelationshipModel::new("n", RelationshipKind::NormalDistribution, &["v"], None)
        .train(&rows)
        .unwrap();
    let params = m.parameters().unwrap();
    assert_eq!(params, vec![("mean".to_string(), 20.0), ("std".to_string(), 10.0)]);
}

#[test]
fn standard_normal_peak() {
    let rows: Vec<Record> = [-1.0, 1.0].iter().map(|&v| rec(&[("v", num(v))])).collect();
    let m = RelationshipModel::new("n", RelationshipKind::NormalDistribution, &["v"], None)
        .train(&rows)
        .unwrap();
    // mean 0, sample std sqrt(2)
    let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt() / 2f64.sqrt();
    assert!((m.score_value(0.0).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn single_kernel_density_at_centre() {
    let m = RelationshipModel::new("kde", RelationshipKind::KernelDensity, &["v"], None)
        .with_hyperparameters(Hyperparameters {
            bandwidth: Some(1.0),
            ..Default::default()
        })
        .train(&[rec(&[("v", num(0.0))])])
        .unwrap();
    let peak = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((m.score_value(0.0).unwrap() - peak).abs() < 1e-12);
}

#[test]
fn knn_with_k_one_memorizes() {
    let rows: Vec<Record> = (0..8)
        .map(|i| {
            rec(&[
                ("a", num(i as f64 * 1.7 % 5.0)),
                ("b", Value::text(if i % 3 == 0 { "p" } else { "q" })),
                ("label", Value::text(if i % 2 == 0 { "even" } else { "odd" })),
            ])
        })
        .collect();
    let m = RelationshipModel::new("knn", RelationshipKind::KnnClassification, &["a", "b"], Some("label"))
        .with_hyperparameters(Hyperparameters {
            k: Some(1),
            ..Default::default()
        })
        .train(&rows)
        .unwrap();
    for r in &rows {
        assert_eq!(&m.predict(r).unwrap(), r.get("label").unwrap());
    }
    let report = m.evaluate(&rows).unwrap();
    assert_eq!(report.accuracy(), Some(1.0));
    assert_eq!(report.scalar_count(), 1 + 4);
}

#[test]
fn naive_bayes_matches_hand_computation() {
    // weather -> play: sunny/yes, sunny/no, rainy/no, rainy/no
    let rows: Vec<Record> = [("sunny", "yes"), ("sunny", "no"), ("rainy", "no"), ("rainy", "no")]
        .iter()
        .map(|&(w, p)| rec(&[("weather", Value::text(w)), ("play", Value::text(p))]))
        .collect();
    let m = RelationshipModel::new(
        "nb",
        RelationshipKind::NaiveBayesClassification,
        &["weather"],
        Some("play"),
    )
    .train(&rows)
    .unwrap();
    // P(no)=3/4, P(sunny|no)=(1+1)/(3+2)=2/5 -> 3/10
    // P(yes)=1/4, P(sunny|yes)=(1+1)/(1+2)=2/3 -> 1/6
    let probe = rec(&[("weather", Value::text("sunny"))]);
    assert_eq!(m.predict(&probe).unwrap(), Value::text("no"));
    let post = m.predict_proba(&probe).unwrap();
    let (no, yes) = (0.3, 1.0 / 6.0);
    assert_eq!(post[0].0, Value::text("no"));
    assert!((post[0].1 - no / (no + yes)).abs() < 1e-12);
    assert!((post[1].1 - yes / (no + yes)).abs() < 1e-12);
}

#[test]
fn decision_tree_perfect_predictor() {
    let csv = "Inside/Outside,Premise,Description\n\
               I,ROW,BURGLARY\nO,STREET,ROBBERY\nI,STREET,ROBBERY\nO,ROW,BURGLARY\n\
               I,SHOP,LARCENY\nO,SHOP,LARCENY\nI,ROW,BURGLARY\n";
    let table = read_csv("crime", csv.as_bytes(), None).unwrap();
    let m = RelationshipModel::new(
        "predictCrimeType",
        RelationshipKind::DecisionTreeClassification,
        &["Inside/Outside", "Premise"],
        Some("Description"),
    )
    .train_table(&table)
    .unwrap();
    let report = m.evaluate_table(&table).unwrap();
    assert_eq!(report.accuracy(), Some(1.0));
    let Metrics::Classification { confusion, .. } = &report.metrics else {
        panic!("classification report expected");
    };
    for (i, row) in confusion.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            assert!(i == j || c == 0);
        }
    }
    let split = m.root_split().unwrap().unwrap();
    assert_eq!(split.attribute, "Premise");
}

#[test]
fn isolation_forest_flags_far_outlier() {
    let mut rows: Vec<Record> = (0..100)
        .map(|i| {
            let t = i as f64;
            rec(&[("x", num((t * 0.37).sin())), ("y", num((t * 0.91).cos()))])
        })
        .collect();
    rows.push(rec(&[("x", num(50.0)), ("y", num(50.0))]));
    let m = RelationshipModel::new("iso", RelationshipKind::IsolationForest, &["x", "y"], None)
        .train(&rows)
        .unwrap();
    let scores: Vec<f64> = rows.iter().map(|r| m.score(r).unwrap()).collect();
    let inlier_max = scores[..100].iter().copied().fold(f64::MIN, f64::max);
    assert!(scores[100] > inlier_max);
    assert!(scores.iter().all(|&s| s > 0.0 && s < 1.0));
}

#[test]
fn untrained_and_unsupported_operations() {
    let m = RelationshipModel::new("line", RelationshipKind::LinearRegression, &["x"], Some("y"));
    assert!(matches!(m.predict(&points()[0]), Err(ModelError::NotTrained(_))));
    assert!(matches!(m.evaluate(&points()), Err(ModelError::NotTrained(_))));
    let trained = m.train(&points()).unwrap();
    assert!(matches!(
        trained.score(&points()[0]),
        Err(ModelError::Unsupported { .. })
    ));
    assert!(matches!(
        trained.predict(&rec(&[("x", Value::Null)])),
        Err(ModelError::NullInput(_))
    ));
}

#[test]
fn training_errors() {
    let one_class: Vec<Record> = (0..3)
        .map(|i| rec(&[("a", num(i as f64)), ("c", Value::text("only"))]))
        .collect();
    let tree = RelationshipModel::new("t", RelationshipKind::DecisionTreeClassification, &["a"], Some("c"));
    assert!(matches!(tree.train(&one_class), Err(ModelError::SingleClass(_))));

    let nulls = vec![rec(&[("a", Value::Null), ("c", Value::text("x"))])];
    assert!(matches!(
        tree.train(&nulls),
        Err(ModelError::NoUsableRows { dropped: 1 })
    ));

    let text_input = vec![
        rec(&[("x", Value::text("a")), ("y", num(1.0))]),
        rec(&[("x", Value::text("b")), ("y", num(2.0))]),
    ];
    let line = RelationshipModel::new("l", RelationshipKind::LinearRegression, &["x"], Some("y"));
    assert!(matches!(line.train(&text_input), Err(ModelError::TypeMismatch { .. })));
    assert!(matches!(line.train(&points()[..1]), Err(ModelError::TooFewRows { .. })));

    let no_output = RelationshipModel::new("l", RelationshipKind::LinearRegression, &["x"], None);
    assert!(matches!(
        no_output.train(&points()),
        Err(ModelError::InvalidModel { .. })
    ));
    let kde_two = RelationshipModel::new("k", RelationshipKind::KernelDensity, &["x", "y"], None);
    assert!(matches!(kde_two.train(&points()), Err(ModelError::InvalidModel { .. })));
    let bad_hp = line.clone().with_hyperparameters(Hyperparameters {
        k: Some(3),
        ..Default::default()
    });
    assert!(matches!(
        bad_hp.train(&points()),
        Err(ModelError::InvalidHyperparameter(_))
    ));
    let wildcard = RelationshipModel::new("w", RelationshipKind::LinearRegression, &["*"], Some("y"));
    assert!(matches!(wildcard.train(&points()), Err(ModelError::WildcardPresent(_))));
}

#[test]
fn dropped_rows_are_counted() {
    let mut rows = points();
    rows.push(rec(&[("x", num(4.0)), ("y", Value::Null)]));
    let m = RelationshipModel::new("line", RelationshipKind::LinearRegression, &["x"], Some("y"))
        .train(&rows)
        .unwrap();
    assert_eq!(m.training_rows(), Some(3));
    assert_eq!(m.dropped_rows(), Some(1));
    assert_eq!(m.evaluate(&rows).unwrap().dropped, 1);
}

#[test]
fn evaluate_table_checks_types() {
    let t = Table::new(
        "t",
        vec![Attribute::quantitative("x"), Attribute::quantitative("y")],
        points().iter().map(|r| vec![r["x"].clone(), r["y"].clone()]).collect(),
    )
    .unwrap();
    let m = RelationshipModel::new("line", RelationshipKind::LinearRegression, &["x"], Some("y"))
        .train_table(&t)
        .unwrap();
    let other = Table::new(
        "o",
        vec![Attribute::nominal("x"), Attribute::quantitative("y")],
        vec![vec![Value::text("a"), num(1.0)]],
    )
    .unwrap();
    assert!(matches!(m.evaluate_table(&other), Err(ModelError::TypeMismatch { .. })));
}

#[test]
fn model_spec_json_round_trip() {
    let m = RelationshipModel::new("iso", RelationshipKind::IsolationForest, &["x", "y"], None).with_hyperparameters(
        Hyperparameters {
            seed: Some(7),
            ..Default::default()
        },
    );
    let json = m.to_json();
    assert_eq!(
        json,
        serde_json::json!({"name": "iso", "kind": "isolationForest", "inputs": ["x", "y"], "output": null, "hyperparameters": {"seed": 7}})
    );
    let back = RelationshipModel::from_json_str(&json.to_string()).unwrap();
    assert_eq!(back, m);
    assert!(RelationshipModel::from_json_str(r#"{"name":"a","kind":"svm","inputs":[]}"#).is_err());
    assert!(RelationshipModel::from_json_str(
        r#"{"name":"a","kind":"kernelDensity","inputs":["x"],"hyperparameters":{"bogus":1}}"#
    )
    .is_err());
}

#[test]
fn template_matching() {
    let template = RelationshipModel::new(
        "t",
        RelationshipKind::DecisionTreeClassification,
        &["*", "Premise"],
        Some("*"),
    );
    let concrete = RelationshipModel::new(
        "c",
        RelationshipKind::DecisionTreeClassification,
        &["Inside/Outside", "Premise"],
        Some("Description"),
    );
    assert!(template.has_wildcard());
    assert!(template.matches(&concrete));
    assert!(!concrete.matches(&template));
    let other_kind = RelationshipModel::new(
        "c",
        RelationshipKind::KnnClassification,
        &["Inside/Outside", "Premise"],
        Some("Description"),
    );
    assert!(!template.matches(&other_kind));
}

#[test]
fn training_is_deterministic() {
    let rows: Vec<Record> = (0..40).map(|i| rec(&[("x", num(((i * 37) % 17) as f64))])).collect();
    let a = RelationshipModel::new("iso", RelationshipKind::IsolationForest, &["x"], None)
        .train(&rows)
        .unwrap();
    let b = RelationshipModel::new("iso", RelationshipKind::IsolationForest, &["x"], None)
        .train(&rows)
        .unwrap();
    for r in &rows {
        assert_eq!(a.score(r).unwrap(), b.score(r).unwrap());
    }
}

#[test]
fn average_path_length_values() {
    assert_eq!(forest::average_path_length(1), 0.0);
    assert_eq!(forest::average_path_length(2), 1.0);
    let c256 = 2.0 * (255f64.ln() + 0.5772156649) - 2.0 * 255.0 / 256.0;
    assert!((forest::average_path_length(256) - c256).abs() < 1e-12);
}
