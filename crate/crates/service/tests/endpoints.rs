use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use riskweave::cycles::{ivf_schema, records_to_csv, synthesize_ivf, FIG4_RECORD};
use riskweave::tabular::{schema_to_text, synthesize_chd_like, to_csv};
use riskweave_service::{router, AppState, Config};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Harness {
    _dir: tempfile::TempDir,
    config: Config,
    app: axum::Router,
}

impl Harness {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = Config::new(dir.path());
        let app = router(Arc::new(AppState::open(&config).unwrap()));
        Self { _dir: dir, config, app }
    }

    fn restart(&mut self) {
        self.app = router(Arc::new(AppState::open(&self.config).unwrap()));
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
            .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    async fn json(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (s, bytes) = self.call(method, uri, body).await;
        (s, serde_json::from_slice(&bytes).unwrap())
    }
}

fn chd_body(seed: u64) -> (Value, Vec<Value>) {
    let data = synthesize_chd_like(seed, 1000).unwrap().dataset;
    let instances = data.rows[..20]
        .iter()
        .map(|r| Value::Object(data.schema.instance_to_json(&r.values)))
        .collect();
    (json!({ "csv": to_csv(&data), "schema": schema_to_text(&data.schema) }), instances)
}

async fn train(h: &Harness, body: Value) -> String {
    let (s, v) = h.json("POST", "/models", Some(body)).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["model_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn train_is_deterministic_and_immediately_predictable() {
    let h = Harness::new();
    let (body, instances) = chd_body(1);
    let (s1, a) = h.json("POST", "/models", Some(body.clone())).await;
    let (s2, b) = h.json("POST", "/models", Some(body)).await;
    assert_eq!((s1, s2), (StatusCode::CREATED, StatusCode::CREATED));
    assert_ne!(a["model_id"], b["model_id"]);
    assert_eq!(a["accuracy"], b["accuracy"]);
    assert!(a["confusion_matrix"].is_object());

    let id = a["model_id"].as_str().unwrap();
    let (s, p) = h.json("POST", &format!("/models/{id}/predict"), Some(instances[0].clone())).await;
    assert_eq!(s, StatusCode::OK);
    for key in ["label", "confidence_p", "samples", "certainty_phrase", "path"] {
        assert!(p.get(key).is_some(), "missing {key}");
    }
    let (_, health) = h.json("GET", "/health", None).await;
    assert_eq!(health, json!({"status": "ok", "models": 2}));
}

#[tokio::test]
async fn malformed_csv_reports_location() {
    let h = Harness::new();
    let (mut body, _) = chd_body(2);
    let csv = body["csv"].as_str().unwrap();
    let mut lines: Vec<String> = csv.lines().map(str::to_string).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|c| *c == "Age").unwrap();
    let mut fields: Vec<String> = lines[3].split(',').map(str::to_string).collect();
    fields[col] = "ancient".into();
    lines[3] = fields.join(",");
    body["csv"] = json!(lines.join("\n"));
    let (s, v) = h.json("POST", "/models", Some(body)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "ValueOutOfDomain");
    assert_eq!(v["row"], 3);
    assert_eq!(v["column"], "Age");
    assert!(v["detail"].is_string() && v["context"].is_object());
}

#[tokio::test]
async fn explain_whatif_and_errors() {
    let h = Harness::new();
    let (body, instances) = chd_body(3);
    let id = train(&h, body).await;

    let (s, e) = h.json("POST", &format!("/models/{id}/explain"), Some(instances[1].clone())).await;
    assert_eq!(s, StatusCode::OK);
    let text = e["text"].as_str().unwrap();
    assert!(text.contains(e["certainty_phrase"].as_str().unwrap()));
    assert!(e["conditions"].is_array() && e["samples"].as_u64().unwrap() > 0);

    let mut req = instances[1].clone();
    req["target_label"] = e["label"].clone();
    let (s, w) = h.json("POST", &format!("/models/{id}/whatif"), Some(req.clone())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(w["changes"], json!([]));

    req["target_label"] = json!("medium risk");
    let (s, v) = h.json("POST", &format!("/models/{id}/whatif"), Some(req)).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("UnknownLabel")));

    let (s, v) = h.json("POST", "/models/nope/predict", Some(instances[0].clone())).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::NOT_FOUND, Some("UnknownModel")));

    let (s, v) = h.json("POST", &format!("/models/{id}/predict"), Some(json!({"Height": 3}))).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::BAD_REQUEST, Some("SchemaMismatch")));

    let (s, info) = h.json("GET", &format!("/models/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(info["kind"], "tree");
    assert!(info["summary"].as_str().unwrap().contains("The model only takes into account"));
}

#[tokio::test]
async fn cycles_curve_and_coverage() {
    let h = Harness::new();
    let schema = ivf_schema();
    let data = synthesize_ivf(4, 4000).unwrap();
    let body = json!({ "csv": records_to_csv(&data.records, &schema).unwrap(), "schema": schema });
    let (s, v) = h.json("POST", "/cycles", Some(body)).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    let id = v["model_id"].as_str().unwrap();

    let record: Value = serde_json::from_str(FIG4_RECORD).unwrap();
    let (s, c) = h.json("POST", &format!("/cycles/{id}/predict"), Some(record.clone())).await;
    assert_eq!(s, StatusCode::OK);
    let points = c["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    let cum: Vec<f64> = points.iter().map(|p| p["cumulative_p"].as_f64().unwrap()).collect();
    assert!(cum.windows(2).all(|w| w[0] <= w[1]));
    assert!(points[0]["natural_frequency"].as_str().unwrap().contains("in 100"));

    let mut too_far = record.clone();
    too_far["n_cycles"] = json!(9);
    let (s, v) = h.json("POST", &format!("/cycles/{id}/predict"), Some(too_far)).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("CycleOutOfRange")));

    let (s, cov) = h
        .json("POST", &format!("/models/{id}/coverage"), Some(json!({"asserted": ["smoking status", "age"]})))
        .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(cov["unmodeled"], json!(["smoking status"]));
    assert_eq!(cov["modeled"], json!(["Age"]));
    assert!(cov["caveat_text"].as_str().unwrap().contains("smoking status"));

    let (s, v) = h.json("POST", &format!("/models/{id}/predict"), Some(record)).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::BAD_REQUEST, Some("WrongModelKind")));
}

#[tokio::test]
async fn feedback_is_validated_and_logged() {
    let h = Harness::new();
    let (body, _) = chd_body(5);
    let id = train(&h, body).await;
    let entry = json!({
        "model_id": id,
        "comment": "clear enough",
        "answers": {"understandability": 4, "comprehension": {"q1": "b"}},
        "demographics": {"age_band": "35-50"}
    });
    let (s, _) = h.json("POST", "/feedback", Some(entry.clone())).await;
    assert_eq!(s, StatusCode::CREATED);

    let mut unknown = entry.clone();
    unknown["model_id"] = json!("missing");
    assert_eq!(h.call("POST", "/feedback", Some(unknown)).await.0, StatusCode::NOT_FOUND);
    let mut bad = entry;
    bad["answers"]["understandability"] = json!(9);
    assert_eq!(h.call("POST", "/feedback", Some(bad)).await.0, StatusCode::BAD_REQUEST);

    let log = std::fs::read_to_string(h.config.storage_root.join("feedback.jsonl")).unwrap();
    let lines: Vec<Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["comment"], "clear enough");
    assert_eq!(lines[0]["schema_version"], 1);
}

#[tokio::test]
async fn reloaded_registry_serves_identical_bytes() {
    let mut h = Harness::new();
    let (body, instances) = chd_body(6);
    let id = train(&h, body).await;
    let mut before = Vec::new();
    for x in &instances {
        for op in ["predict", "explain", "whatif"] {
            before.push(h.call("POST", &format!("/models/{id}/{op}"), Some(x.clone())).await);
        }
    }
    let info = h.call("GET", &format!("/models/{id}"), None).await;
    h.restart();
    let mut after = Vec::new();
    for x in &instances {
        for op in ["predict", "explain", "whatif"] {
            after.push(h.call("POST", &format!("/models/{id}/{op}"), Some(x.clone())).await);
        }
    }
    assert_eq!(before, after);
    assert_eq!(info, h.call("GET", &format!("/models/{id}"), None).await);
}
