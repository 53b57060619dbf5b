use axum::body::Body;
use axum::http::{Request, StatusCode};
use esrl_core::service::{ErrorBody, ReproResponse};
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn post(path: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::post(path).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let resp = esrl_server::router().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

#[tokio::test]
async fn health_answers() {
    let req = Request::get("/health").body(Body::empty()).unwrap();
    let resp = esrl_server::router().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn repro_example_over_http() {
    let (status, body) = post("/v1/repro", r#"{"target":"fig4"}"#).await;
    assert_eq!(status, StatusCode::OK);
    let r: ReproResponse = serde_json::from_slice(&body).unwrap();
    assert!(r.pass);
}

#[tokio::test]
async fn malformed_body_is_a_bad_request() {
    let (status, body) = post("/v1/repro", r#"{"target":"nope"}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    assert_eq!(e.kind, "request");
}

#[tokio::test]
async fn domain_error_is_unprocessable() {
    let (status, body) = post("/v1/validate", r#"{"profile":"rows x"}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    assert_eq!(e.kind, "parse");
}

#[tokio::test]
async fn every_operation_is_routed() {
    for op in esrl_server::OPERATIONS {
        let (status, _) = post(&format!("/v1/{op}"), "not json").await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{op}");
    }
}
