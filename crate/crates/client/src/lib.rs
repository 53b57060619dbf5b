//! Thin async client for the workbench service. Request and response types
//! are the ones in [`esrl_core::service`].

use esrl_core::designer::DesignConfig;
use esrl_core::rca::ThresholdReport;
use esrl_core::service::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    /// The request was malformed (HTTP 400).
    #[error("rejected request: {}", .0.message)]
    Request(ErrorBody),
    /// The operation itself failed.
    #[error("{}", .0.message)]
    Service(ErrorBody),
    #[error("unexpected status {status}: {body}")]
    Status { status: u16, body: String },
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// Client for a server at `base`, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        self.http.get(format!("{}/health", self.base)).send().await?.error_for_status()?;
        Ok(())
    }

    async fn call<Req: Serialize, Resp: DeserializeOwned>(&self, op: &str, req: &Req) -> Result<Resp, ClientError> {
        let resp = self.http.post(format!("{}/v1/{op}", self.base)).json(req).send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) if status.as_u16() == 400 => Err(ClientError::Request(body)),
            Ok(body) if status.as_u16() == 422 => Err(ClientError::Service(body)),
            _ => Err(ClientError::Status { status: status.as_u16(), body: text }),
        }
    }

    pub async fn design(&self, config: &DesignConfig) -> Result<DesignResponse, ClientError> {
        self.call("design", &DesignRequest { config: config.clone() }).await
    }

    pub async fn lift(&self, req: &LiftRequest) -> Result<LiftResponse, ClientError> {
        self.call("lift", req).await
    }

    pub async fn analyze(&self, req: &AnalyzeRequest) -> Result<AnalyzeResponse, ClientError> {
        self.call("analyze", req).await
    }

    pub async fn threshold(&self, req: &ThresholdRequest) -> Result<ThresholdReport, ClientError> {
        self.call("threshold", req).await
    }

    pub async fn encode(&self, req: &EncodeRequest) -> Result<EncodeResponse, ClientError> {
        self.call("encode", req).await
    }

    pub async fn simulate(&self, req: &SimulateRequest) -> Result<SimulateResponse, ClientError> {
        self.call("simulate", req).await
    }

    pub async fn harq(&self, req: &HarqRequest) -> Result<HarqResponse, ClientError> {
        self.call("harq", req).await
    }

    pub async fn validate(&self, req: &ValidateRequest) -> Result<ValidateResponse, ClientError> {
        self.call("validate", req).await
    }

    pub async fn repro(&self, req: &ReproRequest) -> Result<ReproResponse, ClientError> {
        self.call("repro", req).await
    }
}
