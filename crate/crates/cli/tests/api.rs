use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;
use tvc_cli::api::router;
use tvc_cli::store::{append_edit, init_image, Workspace};
use tvc_core::image::{load_image, save_image};

/// Images for the worked example: both start from `(num)`, A inserts a
/// bool in front and B converts the number to a string.
fn worked(dir: &TempDir) -> Workspace {
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (path, replica, edits) in [
        (&a, "A", ["ins 1 num @O:1", "ins 1 bool"]),
        (&b, "B", ["ins 1 num @O:1", "conv 1 str"]),
    ] {
        let mut image = init_image(path, replica).unwrap();
        for e in edits {
            append_edit(&mut image, e).unwrap();
        }
        save_image(path, &image).unwrap();
    }
    Workspace::open(&a, &b, None).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn state_mirrors_the_diff() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    let (status, state) = call(&app, "GET", "/state", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["agreement"][0]["type"], "num");
    assert_eq!(state["differences"]["A"][0]["text"], "ins 1 bool");
    assert_eq!(state["differences"]["A"][0]["edit"]["op"], "ins");
    assert_eq!(state["differences"]["B"][0]["text"], "conv 1 str");
    assert_eq!(state["documents"]["B"][0]["type"], "str");
    assert_eq!(state["converged"], false);
    assert!(state.get("migration").is_none());
}

#[tokio::test]
async fn edits_persist_and_return_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    let (status, state) = call(&app, "POST", "/edit", Some(json!({"side": "A", "editText": "conv 2 str"}))).await;
    assert_eq!(status, StatusCode::OK);
    // A now does the same as B, so the conversion is absorbed
    assert_eq!(state["agreement"][0]["type"], "str");
    assert_eq!(state["differences"]["B"], json!([]));
    let a = load_image(&dir.path().join("a.json")).unwrap();
    assert_eq!(a.history.len(), 3);
}

#[tokio::test]
async fn bad_edits_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    for (body, kind) in [
        (json!({"side": "A", "editText": "id"}), "not-recordable"),
        (json!({"side": "A", "editText": "conv 9 str"}), "invalid-edit"),
        (json!({"side": "A", "editText": "conv x str"}), "parse"),
        (json!({"side": "C", "editText": "conv 1 str"}), "request"),
        (json!({"editText": "conv 1 str"}), "request"),
    ] {
        let (status, error) = call(&app, "POST", "/edit", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(error["error"], kind);
    }
    let a = load_image(&dir.path().join("a.json")).unwrap();
    assert_eq!(a.history.len(), 2);
}

#[tokio::test]
async fn dependent_migration_is_a_conflict_status() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    call(&app, "POST", "/edit", Some(json!({"side": "A", "editText": "conv 1 num"}))).await;
    let (_, state) = call(&app, "GET", "/state", None).await;
    assert_eq!(state["differences"]["A"][1]["dependsOn"], 1);

    let (status, error) = call(&app, "POST", "/migrate", Some(json!({"side": "A", "index": 2}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(error["error"], "dependency");
    assert_eq!(error["blocking"], 1);
    assert_eq!(error["blockingEdit"], "ins 1 bool");

    let (status, state) = call(
        &app,
        "POST",
        "/migrate",
        Some(json!({"side": "A", "index": 2, "withDeps": true})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["migration"]["migratedIndexes"], json!([1, 2]));
    assert_eq!(state["differences"]["A"], json!([]));
}

#[tokio::test]
async fn migration_reports_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    call(&app, "POST", "/edit", Some(json!({"side": "A", "editText": "conv 2 bool"}))).await;
    let (_, state) = call(&app, "GET", "/state", None).await;
    assert_eq!(state["differences"]["A"][1]["conflictsWith"], 1);
    assert_eq!(state["differences"]["B"][0]["conflictsWith"], 2);

    let (status, state) = call(&app, "POST", "/migrate", Some(json!({"side": "A", "index": 2}))).await;
    assert_eq!(status, StatusCode::OK);
    let conflict = &state["migration"]["conflicts"][0];
    assert_eq!(conflict["overriddenSide"], "B");
    assert_eq!(conflict["overridden"], "conv 1 str");
    assert_eq!(state["documents"]["B"][0]["type"], "bool");
    let b = load_image(&dir.path().join("b.json")).unwrap();
    assert_eq!(b.history.last().unwrap().to_string(), "conv 1 bool");

    let (status, _) = call(&app, "POST", "/migrate", Some(json!({"side": "B", "index": 4}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn merge_converges() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(worked(&dir));
    let (status, state) = call(&app, "POST", "/merge", Some(json!({"side": "B"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["differences"]["B"], json!([]));
    let (_, state) = call(&app, "POST", "/merge", Some(json!({"side": "A"}))).await;
    assert_eq!(state["converged"], true);
    assert_eq!(state["documents"]["A"], state["documents"]["B"]);
    let (_, again) = call(&app, "POST", "/merge", Some(json!({"side": "A"}))).await;
    assert_eq!(again["migration"]["migratedIndexes"], json!([]));
}
