//! Hive registry and upload keys.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::TelemetryError;

pub const MIN_KEY_LEN: usize = 16;
pub const MAX_KEY_LEN: usize = 256;

/// An alphanumeric shared secret. `Debug` never prints the value.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AuthKey(String);

impl AuthKey {
    pub fn new(token: impl Into<String>) -> Result<Self, TelemetryError> {
        let token = token.into();
        let ok = (MIN_KEY_LEN..=MAX_KEY_LEN).contains(&token.len())
            && token.bytes().all(|b| b.is_ascii_alphanumeric());
        if ok {
            Ok(Self(token))
        } else {
            Err(TelemetryError::Config(format!(
                "keys must be {MIN_KEY_LEN}-{MAX_KEY_LEN} alphanumeric characters"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Compares against a presented token without short-circuiting on the
    /// first differing byte.
    pub fn verify(&self, presented: &str) -> bool {
        constant_time_eq(self.0.as_bytes(), presented.as_bytes())
    }
}

impl TryFrom<String> for AuthKey {
    type Error = TelemetryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<AuthKey> for String {
    fn from(k: AuthKey) -> String {
        k.0
    }
}

impl fmt::Debug for AuthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AuthKey(***)")
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    let mut diff = a.len() ^ b.len();
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        diff |= (x ^ y) as usize;
    }
    std::hint::black_box(diff) == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiveInfo {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub location: String,
    pub key: AuthKey,
}

/// The set of hives the service accepts, loaded from the key file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    /// Grants read access to every hive's network report.
    #[serde(default)]
    pub admin_key: Option<AuthKey>,
    pub hives: Vec<HiveInfo>,
}

/// Hive ids become file names, so they are kept to a safe alphabet.
pub fn valid_hive_id(id: &str) -> bool {
    (1..=64).contains(&id.len())
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl Registry {
    pub fn load(path: &Path) -> Result<Self, TelemetryError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, TelemetryError> {
        let reg: Registry = serde_json::from_str(text)
            .map_err(|e| TelemetryError::Config(format!("key file: {e}")))?;
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<(), TelemetryError> {
        let mut seen = std::collections::HashSet::new();
        for h in &self.hives {
            if !valid_hive_id(&h.id) {
                return Err(TelemetryError::Config(format!("bad hive id {:?}", h.id)));
            }
            if !seen.insert(h.id.as_str()) {
                return Err(TelemetryError::Config(format!("duplicate hive id {:?}", h.id)));
            }
        }
        Ok(())
    }

    pub fn hive(&self, id: &str) -> Option<&HiveInfo> {
        self.hives.iter().find(|h| h.id == id)
    }

    /// Succeeds only when `token` is the key registered for `hive`. An
    /// unknown hive is reported the same way as a wrong key.
    pub fn authorize(&self, hive: &str, token: Option<&str>) -> Result<&HiveInfo, TelemetryError> {
        let info = self.hive(hive);
        let presented = token.unwrap_or("");
        match info {
            Some(h) if h.key.verify(presented) => Ok(h),
            _ => Err(TelemetryError::Unauthorized),
        }
    }

    /// Like [`Registry::authorize`] but also accepts the admin key.
    pub fn authorize_read(
        &self,
        hive: &str,
        token: Option<&str>,
    ) -> Result<&HiveInfo, TelemetryError> {
        let info = self.hive(hive).ok_or_else(|| TelemetryError::UnknownHive(hive.into()))?;
        let presented = token.unwrap_or("");
        let admin = self.admin_key.as_ref().is_some_and(|k| k.verify(presented));
        if admin || info.key.verify(presented) {
            Ok(info)
        } else {
            Err(TelemetryError::Unauthorized)
        }
    }
}
