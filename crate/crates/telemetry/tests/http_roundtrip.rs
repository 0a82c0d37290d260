use std::path::Path;

use hivewatch_telemetry::http::serve;
use hivewatch_telemetry::{
    HiveSample, HiveStore, NetworkInfo, Registry, Telemetry, TelemetryClient, TelemetryError,
};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

const KEY: &str = "NorthKey000000001";
const ADMIN: &str = "AdminKey000000001";

fn registry() -> Registry {
    Registry::from_json(&format!(
        r#"{{"admin_key":"{ADMIN}","hives":[
            {{"id":"north","name":"North","location":"Orchard","key":"{KEY}"}},
            {{"id":"south","name":"South","location":"Meadow","key":"SouthKey000000001"}}]}}"#
    ))
    .unwrap()
}

fn sample(ts: i64) -> HiveSample {
    HiveSample {
        timestamp: ts,
        temperature_f: 68.0,
        humidity_pct: 51.0,
        cpu_temp_c: 45.0,
        gpu_temp_c: 43.0,
        bees_deck: 2,
        bees_leaving: 11,
        bees_arriving: 9,
        avg_size_mm: None,
        pollen_count: 1,
        mite_count: 0,
    }
}

struct Running {
    url: String,
    stop: oneshot::Sender<()>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

async fn start(dir: &Path) -> Running {
    let telemetry = Telemetry::new(registry(), HiveStore::open(dir).unwrap());
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (stop, rx) = oneshot::channel();
    let task = tokio::spawn(serve(listener, telemetry, async {
        let _ = rx.await;
    }));
    Running { url, stop, task }
}

impl Running {
    async fn shutdown(self) {
        let _ = self.stop.send(());
        self.task.await.unwrap().unwrap();
    }
}

#[tokio::test]
async fn upload_query_and_restart() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path()).await;
    let client = TelemetryClient::new(&server.url, Some(KEY.into())).unwrap();

    assert_eq!(client.latest("north").await.unwrap(), None);
    assert_eq!(client.upload_data("north", &sample(1_672_531_200)).await.unwrap(), 1);
    let seqs = client
        .upload_batch("north", &[sample(1_672_531_500), sample(1_672_535_000)])
        .await
        .unwrap();
    assert_eq!(seqs, vec![2, 3]);
    assert_eq!(
        client.latest("north").await.unwrap().unwrap().timestamp,
        1_672_535_000
    );
    assert_eq!(client.history("north", 2023).await.unwrap().len(), 2);
    server.shutdown().await;

    let server = start(dir.path()).await;
    let client = TelemetryClient::new(&server.url, Some(KEY.into())).unwrap();
    assert_eq!(
        client.latest("north").await.unwrap().unwrap(),
        sample(1_672_535_000)
    );
    assert_eq!(client.upload_data("north", &sample(1_672_540_000)).await.unwrap(), 4);
    server.shutdown().await;
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path()).await;
    let good = TelemetryClient::new(&server.url, Some(KEY.into())).unwrap();
    let bad = TelemetryClient::new(&server.url, Some("WrongKey000000000".into())).unwrap();
    let anon = TelemetryClient::new(&server.url, None).unwrap();

    assert!(matches!(
        bad.upload_data("north", &sample(10)).await,
        Err(TelemetryError::Unauthorized)
    ));
    assert!(matches!(
        anon.upload_data("north", &sample(10)).await,
        Err(TelemetryError::Unauthorized)
    ));
    assert_eq!(good.latest("north").await.unwrap(), None);

    good.upload_data("north", &sample(10)).await.unwrap();
    match good.upload_data("north", &sample(10)).await {
        Err(TelemetryError::Ordering { last, got }) => assert_eq!((last, got), (10, 10)),
        other => panic!("{other:?}"),
    }

    let mut humid = sample(20);
    humid.humidity_pct = 140.0;
    match good.upload_data("north", &humid).await {
        Err(TelemetryError::Validation(fields)) => assert_eq!(fields, vec!["humidity_pct"]),
        other => panic!("{other:?}"),
    }

    assert!(matches!(
        good.latest("nowhere").await,
        Err(TelemetryError::UnknownHive(_))
    ));
    assert_eq!(good.latest("south").await.unwrap(), None);

    let health = anon.health().await.unwrap();
    assert_eq!(health["status"], "ok");
    assert_eq!(health["hives"], 2);
    server.shutdown().await;
}

#[tokio::test]
async fn raw_requests() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path()).await;
    let http = reqwest::Client::new();

    let resp = http
        .post(format!("{}/api/upload-data?hive=north", server.url))
        .bearer_auth(KEY)
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);

    let resp = http
        .get(format!("{}/api/get-data?hive=north&mode=history", server.url))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);

    let resp = http
        .get(format!("{}/api/get-data?hive=north&mode=weekly", server.url))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);

    let resp = http
        .get(format!("{}/api/get-data?hive=north", server.url))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 200);
    let body: serde_json::Value = resp.json().await.unwrap();
    assert!(body["sample"].is_null());
    server.shutdown().await;
}

#[tokio::test]
async fn network_and_video() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path()).await;
    let hive = TelemetryClient::new(&server.url, Some(KEY.into())).unwrap();
    let admin = TelemetryClient::new(&server.url, Some(ADMIN.into())).unwrap();
    let other = TelemetryClient::new(&server.url, Some("SouthKey000000001".into())).unwrap();

    let first = NetworkInfo {
        hostname: "north-pi".into(),
        ip_address: "192.168.1.20".parse().unwrap(),
        ssid: Some("farm".into()),
        mac_address: None,
        port: None,
    };
    let mut second = first.clone();
    second.ip_address = "192.168.1.21".parse().unwrap();
    hive.upload_network("north", &first).await.unwrap();
    hive.upload_network("north", &second).await.unwrap();
    let stored = admin.network("north").await.unwrap().unwrap();
    assert_eq!(stored["ip_address"], "192.168.1.21");
    assert!(matches!(
        other.network("north").await,
        Err(TelemetryError::Unauthorized)
    ));
    assert!(matches!(
        other.upload_network("north", &first).await,
        Err(TelemetryError::Unauthorized)
    ));

    hive.upload_video("north", vec![0u8; 4096]).await.unwrap();
    assert!(matches!(
        other.upload_video("north", vec![1, 2, 3]).await,
        Err(TelemetryError::Unauthorized)
    ));
    server.shutdown().await;
}

#[tokio::test]
async fn port_in_use_is_an_error() {
    let held = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = held.local_addr().unwrap();
    assert!(TcpListener::bind(addr).await.is_err());
}
