//! Client for the telemetry HTTP API.

use reqwest::{Client, RequestBuilder, Response, StatusCode};
use serde_json::Value;

use crate::network::NetworkInfo;
use crate::sample::HiveSample;
use crate::TelemetryError;

#[derive(Debug, Clone)]
pub struct TelemetryClient {
    base: String,
    key: Option<String>,
    http: Client,
}

impl TelemetryClient {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str, key: Option<String>) -> Result<Self, TelemetryError> {
        let http = Client::builder()
            .timeout(std::time::Duration::from_secs(30))
            .build()
            .map_err(|e| TelemetryError::Network(e.to_string()))?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_string(),
            key,
            http,
        })
    }

    pub async fn upload_data(&self, hive: &str, sample: &HiveSample) -> Result<u64, TelemetryError> {
        let v = self.send(self.post("/api/upload-data", hive).json(sample)).await?;
        v["sequence"]
            .as_u64()
            .ok_or_else(|| TelemetryError::Network("response without sequence".into()))
    }

    pub async fn upload_batch(
        &self,
        hive: &str,
        samples: &[HiveSample],
    ) -> Result<Vec<u64>, TelemetryError> {
        let v = self.send(self.post("/api/upload-data", hive).json(samples)).await?;
        serde_json::from_value(v["sequences"].clone())
            .map_err(|e| TelemetryError::Network(format!("bad response: {e}")))
    }

    pub async fn upload_network(&self, hive: &str, info: &NetworkInfo) -> Result<(), TelemetryError> {
        self.send(self.post("/api/upload-network", hive).json(info)).await?;
        Ok(())
    }

    pub async fn upload_video(&self, hive: &str, bytes: Vec<u8>) -> Result<(), TelemetryError> {
        self.send(self.post("/api/upload-video", hive).body(bytes)).await?;
        Ok(())
    }

    /// `None` when the hive has no samples yet.
    pub async fn latest(&self, hive: &str) -> Result<Option<HiveSample>, TelemetryError> {
        let req = self
            .http
            .get(self.url("/api/get-data"))
            .query(&[("hive", hive), ("mode", "latest")]);
        let v = self.send(req).await?;
        serde_json::from_value(v["sample"].clone())
            .map_err(|e| TelemetryError::Network(format!("bad response: {e}")))
    }

    pub async fn history(&self, hive: &str, year: i32) -> Result<Vec<HiveSample>, TelemetryError> {
        let year = year.to_string();
        let req = self.http.get(self.url("/api/get-data")).query(&[
            ("hive", hive),
            ("mode", "history"),
            ("year", &year),
        ]);
        let v = self.send(req).await?;
        serde_json::from_value(v["samples"].clone())
            .map_err(|e| TelemetryError::Network(format!("bad response: {e}")))
    }

    pub async fn network(&self, hive: &str) -> Result<Option<Value>, TelemetryError> {
        let req = self.auth(self.http.get(self.url("/api/get-network")).query(&[("hive", hive)]));
        let v = self.send(req).await?;
        Ok(match &v["network"] {
            Value::Null => None,
            n => Some(n.clone()),
        })
    }

    pub async fn health(&self) -> Result<Value, TelemetryError> {
        self.send(self.http.get(self.url("/health"))).await
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn auth(&self, req: RequestBuilder) -> RequestBuilder {
        match &self.key {
            Some(k) => req.bearer_auth(k),
            None => req,
        }
    }

    fn post(&self, path: &str, hive: &str) -> RequestBuilder {
        self.auth(self.http.post(self.url(path)).query(&[("hive", hive)]))
    }

    async fn send(&self, req: RequestBuilder) -> Result<Value, TelemetryError> {
        let resp = req
            .send()
            .await
            .map_err(|e| TelemetryError::Network(e.to_string()))?;
        decode(resp).await
    }
}

async fn decode(resp: Response) -> Result<Value, TelemetryError> {
    let status = resp.status();
    let body: Value = resp.json().await.unwrap_or(Value::Null);
    if status.is_success() {
        return Ok(body);
    }
    let message = body["message"].as_str().unwrap_or("").to_string();
    Err(match status {
        StatusCode::UNAUTHORIZED => TelemetryError::Unauthorized,
        StatusCode::NOT_FOUND => TelemetryError::UnknownHive(message),
        StatusCode::CONFLICT => TelemetryError::Ordering {
            last: body["last"].as_i64().unwrap_or(0),
            got: body["got"].as_i64().unwrap_or(0),
        },
        StatusCode::UNPROCESSABLE_ENTITY => TelemetryError::Validation(
            serde_json::from_value(body["fields"].clone()).unwrap_or_default(),
        ),
        StatusCode::BAD_REQUEST => TelemetryError::BadRequest(message),
        s => TelemetryError::Remote {
            status: s.as_u16(),
            message,
        },
    })
}
