//! Minimal client for the NVD CVE API (v2.0) with a write-through file cache.
//!
//! Lookups go to the cache first; a cache miss issues one `cveId` query and
//! stores the English description under `<cache_dir>/<CVE-ID>.json`.

use std::env;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;

use super::dataset::{is_valid_cve_id, CveRecord};

pub const DEFAULT_BASE_URL: &str = "https://services.nvd.nist.gov/rest/json/cves/2.0";
pub const API_KEY_ENV: &str = "NVD_API_KEY";
pub const CACHE_DIR_ENV: &str = "VULNCHAR_CACHE_DIR";
pub const BASE_URL_ENV: &str = "VULNCHAR_NVD_URL";

#[derive(Debug, thiserror::Error)]
pub enum NvdError {
    #[error("malformed CVE id `{0}`")]
    MalformedId(String),
    #[error("{0} not found in the NVD")]
    NotFound(String),
    #[error("NVD rate limit hit (HTTP {status}); retry after {retry_after:?}")]
    RateLimited {
        status: u16,
        retry_after: Option<Duration>,
    },
    #[error("NVD returned HTTP {0}")]
    Status(u16),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unexpected NVD response: {0}")]
    Format(String),
    #[error("cache i/o: {0}")]
    Cache(#[from] io::Error),
}

#[derive(Deserialize)]
struct ApiResponse {
    #[serde(rename = "totalResults", default)]
    total_results: Option<u64>,
    #[serde(default)]
    vulnerabilities: Vec<ApiVulnerability>,
}

#[derive(Deserialize)]
struct ApiVulnerability {
    cve: ApiCve,
}

#[derive(Deserialize)]
struct ApiCve {
    id: String,
    #[serde(default)]
    descriptions: Vec<ApiDescription>,
}

#[derive(Deserialize)]
struct ApiDescription {
    lang: String,
    value: String,
}

/// Extracts the English description of `cve_id` from an API response body.
pub fn parse_response(cve_id: &str, body: &str) -> Result<CveRecord, NvdError> {
    let parsed: ApiResponse =
        serde_json::from_str(body).map_err(|e| NvdError::Format(e.to_string()))?;
    if parsed.total_results == Some(0) || parsed.vulnerabilities.is_empty() {
        return Err(NvdError::NotFound(cve_id.to_string()));
    }
    let cve = parsed
        .vulnerabilities
        .into_iter()
        .map(|v| v.cve)
        .find(|c| c.id.eq_ignore_ascii_case(cve_id))
        .ok_or_else(|| NvdError::NotFound(cve_id.to_string()))?;
    let description = cve
        .descriptions
        .iter()
        .find(|d| d.lang == "en")
        .or_else(|| cve.descriptions.first())
        .map(|d| d.value.clone())
        .filter(|d| !d.trim().is_empty())
        .ok_or_else(|| NvdError::Format(format!("{cve_id} has no description")))?;
    Ok(CveRecord {
        cve_id: cve.id,
        description,
        source: Some(format!("https://nvd.nist.gov/vuln/detail/{cve_id}")),
    })
}

fn default_cache_dir() -> PathBuf {
    if let Some(dir) = env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("vulnchar").join("nvd");
    }
    if let Some(home) = env::var_os("HOME") {
        return PathBuf::from(home)
            .join(".cache")
            .join("vulnchar")
            .join("nvd");
    }
    PathBuf::from(".vulnchar-cache").join("nvd")
}

pub struct NvdClient {
    base_url: String,
    api_key: Option<String>,
    cache_dir: PathBuf,
    agent: ureq::Agent,
    write_lock: Mutex<()>,
}

impl NvdClient {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build();
        NvdClient {
            base_url: DEFAULT_BASE_URL.to_string(),
            api_key: None,
            cache_dir: cache_dir.into(),
            agent: config.into(),
            write_lock: Mutex::new(()),
        }
    }

    /// Configures from `NVD_API_KEY`, `VULNCHAR_CACHE_DIR` and
    /// `VULNCHAR_NVD_URL`.
    pub fn from_env() -> Self {
        let cache_dir = env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(default_cache_dir);
        let mut client = NvdClient::new(cache_dir);
        client.api_key = env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        if let Ok(url) = env::var(BASE_URL_ENV) {
            client.base_url = url;
        }
        client
    }

    pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
        self.base_url = url.into();
        self
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    pub fn cache_path(&self, cve_id: &str) -> PathBuf {
        self.cache_dir.join(format!("{cve_id}.json"))
    }

    pub fn cached(&self, cve_id: &str) -> Result<Option<CveRecord>, NvdError> {
        match fs::read_to_string(self.cache_path(cve_id)) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| NvdError::Format(format!("corrupt cache entry for {cve_id}: {e}"))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn store(&self, record: &CveRecord) -> Result<(), NvdError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        fs::create_dir_all(&self.cache_dir)?;
        let target = self.cache_path(&record.cve_id);
        let tmp = target.with_extension("json.tmp");
        let json =
            serde_json::to_vec_pretty(record).map_err(|e| NvdError::Format(e.to_string()))?;
        fs::write(&tmp, json)?;
        fs::rename(&tmp, &target)?;
        Ok(())
    }

    /// Returns the record for `cve_id`, from cache when present.
    pub fn fetch_cve(&self, cve_id: &str) -> Result<CveRecord, NvdError> {
        if !is_valid_cve_id(cve_id) {
            return Err(NvdError::MalformedId(cve_id.to_string()));
        }
        if let Some(record) = self.cached(cve_id)? {
            return Ok(record);
        }
        let body = self.request(cve_id)?;
        let record = parse_response(cve_id, &body)?;
        self.store(&record)?;
        Ok(record)
    }

    fn request(&self, cve_id: &str) -> Result<String, NvdError> {
        let mut req = self.agent.get(&self.base_url).query("cveId", cve_id);
        if let Some(key) = &self.api_key {
            req = req.header("apiKey", key);
        }
        let mut resp = req.call().map_err(|e| NvdError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200 => resp
                .body_mut()
                .read_to_string()
                .map_err(|e| NvdError::Transport(e.to_string())),
            404 => Err(NvdError::NotFound(cve_id.to_string())),
            403 | 429 | 503 => {
                let retry_after = resp
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse::<u64>().ok())
                    .map(Duration::from_secs);
                Err(NvdError::RateLimited {
                    status,
                    retry_after,
                })
            }
            other => Err(NvdError::Status(other)),
        }
    }
}
