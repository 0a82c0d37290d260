//! `hivewatch serve`: runs the telemetry service until interrupted.
//!
//! Settings come from the `[service]` table of the run config, then the
//! `HIVEWATCH_LISTEN`, `HIVEWATCH_DATA_DIR` and `HIVEWATCH_KEY_FILE`
//! environment variables, then flags.

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Args;
use hivewatch_telemetry::http::serve;
use hivewatch_telemetry::{HiveStore, Registry, ServiceConfig, Telemetry};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address to listen on [default: 127.0.0.1:8080]
    #[arg(long, value_name = "ADDR")]
    pub listen: Option<SocketAddr>,

    /// Where sample logs are kept [default: hivewatch-data]
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    /// JSON hive registry with upload keys [default: hive_keys.json]
    #[arg(long, value_name = "FILE")]
    pub key_file: Option<PathBuf>,
}

pub fn resolve(args: &ServeArgs, cfg: &RunConfig) -> CliResult<ServiceConfig> {
    let mut sc = cfg
        .service
        .clone()
        .with_env(|k| std::env::var(k).ok())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(l) = args.listen {
        sc.listen = l;
    }
    if let Some(d) = &args.data_dir {
        sc.data_dir = d.clone();
    }
    if let Some(k) = &args.key_file {
        sc.key_file = k.clone();
    }
    Ok(sc)
}

pub fn run(args: ServeArgs, cfg: RunConfig) -> CliResult<()> {
    let sc = resolve(&args, &cfg)?;
    let registry = Registry::load(&sc.key_file).map_err(|e| match e {
        hivewatch_telemetry::TelemetryError::Io(io) => CliError::io(&sc.key_file, io),
        other => CliError::Validation(format!("{}: {other}", sc.key_file.display())),
    })?;
    let store = HiveStore::open(&sc.data_dir).map_err(|e| match e {
        hivewatch_telemetry::TelemetryError::Io(io) => CliError::io(&sc.data_dir, io),
        other => CliError::Validation(other.to_string()),
    })?;
    let telemetry = Telemetry::new(registry, store);

    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io(&sc.data_dir, e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(sc.listen).await.map_err(|e| {
            CliError::io(&PathBuf::from(format!("bind {}", sc.listen)), e)
        })?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::io(&PathBuf::from("listener"), e))?;
        eprintln!("hivewatch: listening on http://{addr}");
        serve(listener, telemetry, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::io(&PathBuf::from(format!("serve {addr}")), e))
    })
}
