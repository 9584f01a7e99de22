use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{DataError, Result, Series};

pub const DEFAULT_ENDPOINT: &str = "https://community-api.coinmetrics.io/v2";

/// Where the series, timestamps and values live in the response body, as
/// JSON pointers. The time and value pointers are relative to one series entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSchema {
    pub series: String,
    pub time: String,
    pub value: String,
}

impl Default for ResponseSchema {
    fn default() -> Self {
        Self {
            series: "/metricData/series".into(),
            time: "/time".into(),
            value: "/values/0".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchRequest {
    pub endpoint: String,
    pub asset: String,
    pub metric: String,
    pub start: String,
    pub end: String,
    pub schema: ResponseSchema,
    pub cache_dir: Option<PathBuf>,
    /// Serve only from the cache.
    pub offline: bool,
    pub timeout: Duration,
}

impl FetchRequest {
    pub fn new(asset: &str, metric: &str, start: &str, end: &str) -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.into(),
            asset: asset.into(),
            metric: metric.into(),
            start: start.into(),
            end: end.into(),
            schema: ResponseSchema::default(),
            cache_dir: None,
            offline: false,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn url(&self) -> String {
        format!(
            "{}/assets/{}/metricdata?metrics={}&start={}&end={}",
            self.endpoint.trim_end_matches('/'),
            self.asset,
            self.metric,
            self.start,
            self.end
        )
    }

    fn cache_path(&self, dir: &Path) -> PathBuf {
        let digest = Sha256::digest(self.url().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        dir.join(format!("{hex}.json"))
    }
}

/// Downloads (or replays from cache) one metric series as `Series` of prices.
pub fn fetch_coinmetrics(req: &FetchRequest) -> Result<Series> {
    let url = req.url();
    let cache = req.cache_dir.as_ref().map(|d| req.cache_path(d));
    if let Some(path) = &cache {
        if path.exists() {
            let body = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            return parse_response(&body, &req.schema, &req.metric);
        }
    }
    if req.offline {
        return Err(DataError::Network(format!("offline and no cached response for {url}")));
    }

    let body = match download(&url, req.timeout) {
        Err(DataError::Network(_)) => download(&url, req.timeout)?,
        other => other?,
    };
    let series = parse_response(&body, &req.schema, &req.metric)?;
    if let (Some(path), Some(dir)) = (&cache, &req.cache_dir) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        write_atomic(path, body.as_bytes())?;
    }
    Ok(series)
}

fn download(url: &str, timeout: Duration) -> Result<String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(|e| DataError::Network(e.to_string()))?;
    let status = response.status().as_u16();
    if status != 200 {
        return Err(DataError::Http {
            status,
            url: url.to_string(),
        });
    }
    let mut body = String::new();
    response
        .body_mut()
        .as_reader()
        .read_to_string(&mut body)
        .map_err(|e| DataError::Network(e.to_string()))?;
    Ok(body)
}

fn io_error(path: &Path, e: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes).map_err(|e| io_error(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Extracts `(time, value)` pairs from a response body. Values may be JSON
/// numbers or numeric strings; nulls are reported with their offset.
pub fn parse_response(body: &str, schema: &ResponseSchema, label: &str) -> Result<Series> {
    let root: Value = serde_json::from_str(body).map_err(|e| DataError::Json(e.to_string()))?;
    let entries = root
        .pointer(&schema.series)
        .and_then(Value::as_array)
        .ok_or_else(|| DataError::Json(format!("no array at {}", schema.series)))?;
    if entries.is_empty() {
        return Err(DataError::Empty(format!("response series {}", schema.series)));
    }
    let mut times = Vec::with_capacity(entries.len());
    let mut values = Vec::with_capacity(entries.len());
    for (offset, entry) in entries.iter().enumerate() {
        let time = entry
            .pointer(&schema.time)
            .and_then(Value::as_str)
            .ok_or_else(|| DataError::Json(format!("entry {offset} has no string at {}", schema.time)))?;
        let value = match entry.pointer(&schema.value) {
            None | Some(Value::Null) => return Err(DataError::NullValue { offset }),
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => s.trim().parse::<f64>().ok(),
            Some(_) => None,
        }
        .ok_or_else(|| DataError::Json(format!("entry {offset} value is not numeric")))?;
        times.push(time.to_string());
        values.push(value);
    }
    Series::with_timestamps(label, times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::net::TcpListener;

    const FIXTURE: &str = r#"{"metricData":{"metrics":["PriceUSD"],"series":[
        {"time":"2019-01-01T00:00:00.000Z","values":["3843.52"]},
        {"time":"2019-01-02T00:00:00.000Z","values":["3943.41"]},
        {"time":"2019-01-03T00:00:00.000Z","values":[3836.74]}]}}"#;

    fn serve_once(status_line: &'static str, body: &'static str) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 4096];
                let _ = std::io::Read::read(&mut stream, &mut buf);
                let _ = write!(
                    stream,
                    "{status_line}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
        format!("http://{addr}")
    }

    #[test]
    fn parses_fixture() {
        let s = parse_response(FIXTURE, &ResponseSchema::default(), "PriceUSD").unwrap();
        assert_eq!(s.values, vec![3843.52, 3943.41, 3836.74]);
        assert_eq!(s.timestamps.as_ref().unwrap()[2], "2019-01-03T00:00:00.000Z");
    }

    #[test]
    fn null_value_names_offset() {
        let body = r#"{"metricData":{"series":[{"time":"a","values":["1"]},{"time":"b","values":[null]}]}}"#;
        match parse_response(body, &ResponseSchema::default(), "x") {
            Err(DataError::NullValue { offset }) => assert_eq!(offset, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_and_malformed() {
        let empty = r#"{"metricData":{"series":[]}}"#;
        assert!(matches!(parse_response(empty, &ResponseSchema::default(), "x"), Err(DataError::Empty(_))));
        assert!(matches!(parse_response("{", &ResponseSchema::default(), "x"), Err(DataError::Json(_))));
        assert!(matches!(parse_response("{}", &ResponseSchema::default(), "x"), Err(DataError::Json(_))));
    }

    #[test]
    fn custom_schema() {
        let body = r#"{"data":[{"t":"a","v":1.5},{"t":"b","v":2.5}]}"#;
        let schema = ResponseSchema {
            series: "/data".into(),
            time: "/t".into(),
            value: "/v".into(),
        };
        assert_eq!(parse_response(body, &schema, "x").unwrap().values, vec![1.5, 2.5]);
    }

    #[test]
    fn url_layout() {
        let r = FetchRequest::new("btc", "PriceUSD", "2019-01-01", "2019-02-01");
        assert_eq!(
            r.url(),
            "https://community-api.coinmetrics.io/v2/assets/btc/metricdata?metrics=PriceUSD&start=2019-01-01&end=2019-02-01"
        );
    }

    #[test]
    fn http_error_status() {
        let mut r = FetchRequest::new("btc", "PriceUSD", "a", "b");
        r.endpoint = serve_once("HTTP/1.1 404 Not Found", "nope");
        match fetch_coinmetrics(&r) {
            Err(DataError::Http { status, .. }) => assert_eq!(status, 404),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn download_then_replay_from_cache() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = FetchRequest::new("btc", "PriceUSD", "a", "b");
        r.endpoint = serve_once("HTTP/1.1 200 OK", FIXTURE);
        r.cache_dir = Some(dir.path().to_path_buf());
        let first = fetch_coinmetrics(&r).unwrap();
        // The server is gone; offline replay must come from the cache.
        r.offline = true;
        let second = fetch_coinmetrics(&r).unwrap();
        assert_eq!(first, second);
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn offline_without_cache_fails() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = FetchRequest::new("btc", "PriceUSD", "a", "b");
        r.cache_dir = Some(dir.path().to_path_buf());
        r.offline = true;
        assert!(matches!(fetch_coinmetrics(&r), Err(DataError::Network(_))));
    }
}
