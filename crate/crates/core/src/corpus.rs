//! Document collections: loading, persistence, period splits and the
//! remote archive fetcher.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fsutil::{hex, write_atomic};

/// Group label given to documents at or after a split boundary.
pub const GROUP_AFTER: &str = "after";
/// Group label given to documents before a split boundary.
pub const GROUP_BEFORE: &str = "before";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(rename = "date", default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            timestamp: None,
            group: None,
        }
    }

    pub fn with_timestamp(mut self, ts: DateTime<Utc>) -> Self {
        self.timestamp = Some(ts);
        self
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }
}

/// An ordered, validated collection of documents. The order is the
/// canonical document index used by every downstream stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    provenance: String,
}

impl Corpus {
    pub fn new(docs: Vec<Document>, provenance: impl Into<String>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if doc.text.trim().is_empty() {
                return Err(Error::EmptyText(doc.id.clone()));
            }
        }
        Ok(Corpus {
            docs,
            provenance: provenance.into(),
        })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn get(&self, id: &str) -> Option<(usize, &Document)> {
        self.docs.iter().enumerate().find(|(_, d)| d.id == id)
    }

    pub fn into_docs(self) -> Vec<Document> {
        self.docs
    }

    /// Canonical JSON-lines serialization, `{id, text, date?, group?}` per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.docs {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_jsonl().as_bytes())
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex(&Sha256::digest(self.to_jsonl().as_bytes()))
    }

    /// Labels every document "before" or "after" `boundary`; a timestamp
    /// equal to the boundary counts as "after".
    pub fn split_by_period(&self, boundary: DateTime<Utc>) -> Result<Corpus> {
        let missing: Vec<String> = self
            .docs
            .iter()
            .filter(|d| d.timestamp.is_none())
            .map(|d| d.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingTimestamps(missing));
        }
        let docs = self
            .docs
            .iter()
            .map(|d| {
                let group = if d.timestamp.expect("checked above") >= boundary {
                    GROUP_AFTER
                } else {
                    GROUP_BEFORE
                };
                d.clone().with_group(group)
            })
            .collect();
        Ok(Corpus {
            docs,
            provenance: format!("{} split at {}", self.provenance, boundary.to_rfc3339()),
        })
    }
}

/// Field names used when reading JSON-lines input.
#[derive(Debug, Clone)]
pub struct JsonlFields {
    pub id: String,
    pub text: String,
    pub date: String,
    pub group: String,
}

impl Default for JsonlFields {
    fn default() -> Self {
        JsonlFields {
            id: "id".into(),
            text: "text".into(),
            date: "date".into(),
            group: "group".into(),
        }
    }
}

/// Parses RFC 3339, `%Y-%m-%dT%H:%M:%S%z` (as used by news archives),
/// naive date-times (taken as UTC) and plain dates (midnight UTC).
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    if let Ok(dt) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%z") {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    Err(Error::InvalidTimestamp(s.to_string()))
}

pub fn parse_jsonl(input: &str, fields: &JsonlFields, provenance: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine { line: line_no, message };
        let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("expected a JSON object".into()))?;
        let id = match obj.get(&fields.id) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(malformed(format!("missing string field `{}`", fields.id))),
        };
        let text = match obj.get(&fields.text) {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(malformed(format!("missing string field `{}`", fields.text))),
        };
        if text.trim().is_empty() {
            return Err(malformed(format!("document `{id}` has empty text")));
        }
        let timestamp = match obj.get(&fields.date) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(parse_timestamp(s).map_err(|e| malformed(e.to_string()))?),
            Some(_) => return Err(malformed(format!("field `{}` is not a string", fields.date))),
        };
        let group = match obj.get(&fields.group) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(malformed(format!("field `{}` is not a string", fields.group))),
        };
        docs.push(Document {
            id,
            text,
            timestamp,
            group,
        });
    }
    Corpus::new(docs, provenance)
}

pub fn load_jsonl(path: &Path) -> Result<Corpus> {
    load_jsonl_with(path, &JsonlFields::default())
}

pub fn load_jsonl_with(path: &Path, fields: &JsonlFields) -> Result<Corpus> {
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&input, fields, &format!("jsonl:{}", path.display()))
}

/// One document per file under `dir`, recursively, in lexicographic order
/// of the relative path (which becomes the document id).
pub fn load_dir(dir: &Path) -> Result<Corpus> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let mut docs = Vec::with_capacity(files.len());
    for rel in files {
        let path = dir.join(&rel);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        docs.push(Document::new(rel, text));
    }
    Corpus::new(docs, format!("dir:{}", dir.display()))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let ft = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if ft.is_dir() {
            collect_files(root, &path, out)?;
        } else if ft.is_file() {
            let rel = path.strip_prefix(root).expect("walked below root");
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            out.push(id);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidParameter(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Inclusive range of months.
    pub fn range(start: YearMonth, end: YearMonth) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut cur = start;
        while cur <= end {
            out.push(cur);
            cur = cur.next();
        }
        out
    }

    /// Parses `YYYY-MM` or an inclusive range `YYYY-MM..YYYY-MM`.
    pub fn parse_range(s: &str) -> Result<Vec<YearMonth>> {
        match s.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (a.parse()?, b.parse()?);
                if b < a {
                    return Err(Error::InvalidParameter(format!("empty month range `{s}`")));
                }
                Ok(Self::range(a, b))
            }
            None => Ok(vec![s.parse()?]),
        }
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl From<DateTime<Utc>> for YearMonth {
    fn from(dt: DateTime<Utc>) -> Self {
        YearMonth {
            year: dt.year(),
            month: dt.month(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal blocking GET transport, so the fetcher can be driven without a
/// network in tests. `Err` means the request never produced a response.
pub trait HttpGet {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String>;
}

pub struct UreqClient {
    agent: ureq::Agent,
}

impl UreqClient {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        UreqClient { agent }
    }
}

impl Default for UreqClient {
    fn default() -> Self {
        UreqClient::new(Duration::from_secs(60))
    }
}

impl HttpGet for UreqClient {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(512 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Downloads monthly archives from a URL template with `{year}`, `{month}`
/// and `{key}` placeholders. Raw responses are cached per (template, month)
/// so repeated runs do not touch the network.
pub struct ArchiveFetcher<C> {
    endpoint: String,
    api_key: String,
    cache_dir: PathBuf,
    client: C,
    max_retries: u32,
    base_delay: Duration,
}

impl<C: HttpGet> ArchiveFetcher<C> {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        cache_dir: impl Into<PathBuf>,
        client: C,
    ) -> Self {
        ArchiveFetcher {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            cache_dir: cache_dir.into(),
            client,
            max_retries: 4,
            base_delay: Duration::from_millis(500),
        }
    }

    pub fn with_retries(mut self, max_retries: u32, base_delay: Duration) -> Self {
        self.max_retries = max_retries;
        self.base_delay = base_delay;
        self
    }

    pub fn cache_path(&self, month: YearMonth) -> PathBuf {
        let digest = hex(&Sha256::digest(self.endpoint.as_bytes()));
        self.cache_dir.join(format!("{}-{}.json", &digest[..16], month))
    }

    fn url(&self, month: YearMonth) -> String {
        self.endpoint
            .replace("{year}", &month.year.to_string())
            .replace("{month}", &month.month.to_string())
            .replace("{key}", &self.api_key)
    }

    fn raw_month(&self, month: YearMonth) -> Result<String> {
        let cache = self.cache_path(month);
        if cache.exists() {
            return fs::read_to_string(&cache).map_err(|e| Error::io(&cache, e));
        }
        let url = self.url(month);
        // never log the substituted url, it carries the credential
        let shown = self
            .endpoint
            .replace("{year}", &month.year.to_string())
            .replace("{month}", &month.month.to_string());
        let mut attempt = 0;
        let body = loop {
            let retryable = match self.client.get(&url) {
                Ok(r) if (200..300).contains(&r.status) => break r.body,
                Ok(r) if r.status == 401 || r.status == 403 => {
                    return Err(Error::Authentication {
                        status: r.status,
                        body: r.body,
                    })
                }
                Ok(r) if r.status == 429 || r.status >= 500 => format!("status {}: {}", r.status, r.body),
                Ok(r) => {
                    return Err(Error::Http {
                        url: shown,
                        message: format!("status {}: {}", r.status, r.body),
                    })
                }
                Err(e) => e,
            };
            if attempt >= self.max_retries {
                return Err(Error::Http {
                    url: shown,
                    message: format!("giving up after {} attempts: {retryable}", attempt + 1),
                });
            }
            let delay = self.base_delay * 2u32.saturating_pow(attempt);
            log::warn!("{shown}: {retryable}; retrying in {delay:?}");
            std::thread::sleep(delay);
            attempt += 1;
        };
        // validate before caching so a bad payload is not replayed forever
        parse_archive_response(&body)?;
        write_atomic(&cache, body.as_bytes())?;
        Ok(body)
    }

    /// Fetches every month in `months` and returns the snippets sorted by
    /// publication date.
    pub fn fetch(&self, months: &[YearMonth]) -> Result<Corpus> {
        let mut docs = Vec::new();
        for &month in months {
            let body = self.raw_month(month)?;
            docs.extend(parse_archive_response(&body)?);
        }
        docs.sort_by_key(|d| d.timestamp);
        let span = match (months.first(), months.last()) {
            (Some(a), Some(b)) => format!("{a}..{b}"),
            _ => String::new(),
        };
        Corpus::new(docs, format!("archive:{} {span}", self.endpoint))
    }
}

/// Extracts `{_id, snippet, pub_date}` from an archive payload of the form
/// `{"response": {"docs": [...]}}`. Documents with a blank snippet are
/// dropped.
pub fn parse_archive_response(body: &str) -> Result<Vec<Document>> {
    let value: Value = serde_json::from_str(body)?;
    let docs = value
        .get("response")
        .ok_or_else(|| Error::SchemaMismatch("response".into()))?
        .get("docs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("response.docs".into()))?;
    let mut out = Vec::with_capacity(docs.len());
    let mut skipped = 0usize;
    for d in docs {
        let field = |name: &str| {
            d.get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::SchemaMismatch(format!("docs[].{name}")))
        };
        let id = field("_id")?;
        let date = parse_timestamp(field("pub_date")?)?;
        let snippet = match d.get("snippet") {
            Some(Value::String(s)) => s.as_str(),
            Some(Value::Null) => "",
            _ => return Err(Error::SchemaMismatch("docs[].snippet".into())),
        };
        if snippet.trim().is_empty() {
            skipped += 1;
            continue;
        }
        out.push(Document::new(id, snippet).with_timestamp(date));
    }
    if skipped > 0 {
        log::warn!("dropped {skipped} archive documents with empty snippets");
    }
    Ok(out)
}
