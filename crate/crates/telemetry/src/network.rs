//! Network details a monitoring station reports about itself.

use std::net::IpAddr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::TelemetryError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkInfo {
    pub hostname: String,
    pub ip_address: IpAddr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac_address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port: Option<u16>,
}

const KNOWN: [&str; 5] = ["hostname", "ip_address", "ssid", "mac_address", "port"];

impl NetworkInfo {
    /// Parses an untrusted payload, listing every bad or unknown field.
    pub fn from_json(value: &Value) -> Result<Self, TelemetryError> {
        let Some(obj) = value.as_object() else {
            return Err(TelemetryError::Validation(vec!["<root>".into()]));
        };
        let mut bad = Vec::new();
        let hostname = match obj.get("hostname").and_then(Value::as_str) {
            Some(h) if !h.trim().is_empty() && h.len() <= 253 => h.to_string(),
            _ => {
                bad.push("hostname".to_string());
                String::new()
            }
        };
        let ip = obj
            .get("ip_address")
            .and_then(Value::as_str)
            .and_then(|s| s.parse::<IpAddr>().ok());
        if ip.is_none() {
            bad.push("ip_address".to_string());
        }
        let opt_str = |name: &str, bad: &mut Vec<String>| match obj.get(name) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                bad.push(name.to_string());
                None
            }
        };
        let ssid = opt_str("ssid", &mut bad);
        let mac_address = opt_str("mac_address", &mut bad);
        let port = match obj.get("port") {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_u64().and_then(|p| u16::try_from(p).ok()) {
                Some(p) => Some(p),
                None => {
                    bad.push("port".to_string());
                    None
                }
            },
        };
        bad.extend(obj.keys().filter(|k| !KNOWN.contains(&k.as_str())).cloned());
        match (bad.is_empty(), ip) {
            (true, Some(ip_address)) => Ok(Self {
                hostname,
                ip_address,
                ssid,
                mac_address,
                port,
            }),
            _ => Err(TelemetryError::Validation(bad)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_minimal_and_full() {
        let n = NetworkInfo::from_json(&json!({"hostname": "hive-pi", "ip_address": "192.168.1.20"}))
            .unwrap();
        assert_eq!(n.ssid, None);
        let full = json!({"hostname": "h", "ip_address": "::1", "ssid": "farm", "mac_address": "aa:bb", "port": 22});
        let n = NetworkInfo::from_json(&full).unwrap();
        assert_eq!(serde_json::to_value(&n).unwrap(), full);
    }

    #[test]
    fn lists_bad_fields() {
        match NetworkInfo::from_json(&json!({"hostname": "", "ip_address": "300.1.1.1", "port": 70000, "x": 1})) {
            Err(TelemetryError::Validation(f)) => {
                assert_eq!(f, vec!["hostname", "ip_address", "port", "x"])
            }
            other => panic!("{other:?}"),
        }
    }
}
