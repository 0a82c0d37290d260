//! Hive telemetry: the record each hive uploads every recording window, a
//! durable per-hive store, hourly history, and the HTTP service and client
//! that move samples between monitoring stations and the server.

use std::path::PathBuf;

use thiserror::Error;

pub mod auth;
pub mod client;
pub mod config;
pub mod downsample;
pub mod http;
pub mod network;
pub mod sample;
pub mod service;
pub mod store;

pub use auth::{AuthKey, HiveInfo, Registry};
pub use client::TelemetryClient;
pub use config::ServiceConfig;
pub use downsample::{downsample_hourly, year_bounds};
pub use network::NetworkInfo;
pub use sample::{Environment, HiveSample, Measurement, SampleError};
pub use service::Telemetry;
pub use store::HiveStore;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("not authorized")]
    Unauthorized,
    #[error("unknown hive {0:?}")]
    UnknownHive(String),
    #[error("timestamp {got} is not after the last stored timestamp {last}")]
    Ordering { last: i64, got: i64 },
    #[error("invalid fields: {}", .0.join(", "))]
    Validation(Vec<String>),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("{}:{line}: {message}", .path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("network: {0}")]
    Network(String),
    #[error("server returned {status}: {message}")]
    Remote { status: u16, message: String },
}
