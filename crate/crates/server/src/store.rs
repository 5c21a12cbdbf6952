//! The log repository: every XES or CSV file in the root directory, parsed once.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use cpm_core::event_log::{log_statistics, parse_csv, parse_xes, CsvMapping, LogError, LogStatistics};
use cpm_core::EventLog;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex characters of the content hash kept as the log id.
pub const LOG_ID_LEN: usize = 16;

const MAPPING_SUFFIX: &str = ".mapping.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Xes,
    Csv,
}

impl LogFormat {
    /// Format implied by a file extension.
    pub fn from_file_name(name: &str) -> Option<Self> {
        let ext = Path::new(name).extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "xes" => Some(LogFormat::Xes),
            "csv" => Some(LogFormat::Csv),
            _ => None,
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogFormat::Xes => "xes",
            LogFormat::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogStoreEntry {
    pub log_id: String,
    pub file_name: String,
    pub format: LogFormat,
    pub size_bytes: u64,
    pub ingested_at: DateTime<Utc>,
    pub statistics: LogStatistics,
}

#[derive(Debug, Clone)]
struct Stored {
    entry: LogStoreEntry,
    log: Arc<EventLog>,
}

/// Result of [`LogStore::ingest`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub entry: LogStoreEntry,
    /// False when identical content was already in the store.
    pub created: bool,
}

/// Content hash used as log id. CSV ids also cover the column mapping, since the
/// same bytes read with another mapping give another log.
pub fn log_id(bytes: &[u8], format: LogFormat, mapping: Option<&CsvMapping>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    if let (LogFormat::Csv, Some(m)) = (format, mapping) {
        hasher.update(serde_json::to_vec(m).expect("mapping serializes"));
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(LOG_ID_LEN);
    for b in digest.iter().take(LOG_ID_LEN / 2) {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

fn parse(bytes: &[u8], format: LogFormat, mapping: Option<&CsvMapping>) -> Result<EventLog, LogError> {
    match format {
        LogFormat::Xes => parse_xes(bytes),
        LogFormat::Csv => parse_csv(bytes, mapping.unwrap_or(&CsvMapping::default())),
    }
}

/// Keeps the final path component and replaces anything outside `[A-Za-z0-9._-]`.
pub fn sanitize_file_name(name: &str) -> String {
    let base = name.rsplit(['/', '\\']).next().unwrap_or("");
    let cleaned: String = base
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    let trimmed = cleaned.trim_start_matches('.');
    if trimmed.is_empty() {
        "upload".to_owned()
    } else {
        trimmed.to_owned()
    }
}

fn sidecar_path(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(MAPPING_SUFFIX);
    file.with_file_name(name)
}

pub struct LogStore {
    root: PathBuf,
    logs: RwLock<BTreeMap<String, Stored>>,
    // Uploads are written one at a time so two requests with the same content
    // cannot both create a file.
    writes: Mutex<()>,
}

impl LogStore {
    /// Opens `root`, creating it if needed, and ingests every log file in it.
    /// Files that fail to parse are skipped with a warning.
    pub fn open(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let store = LogStore {
            root,
            logs: RwLock::new(BTreeMap::new()),
            writes: Mutex::new(()),
        };
        store.scan()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn scan(&self) -> std::io::Result<()> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.root)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for path in paths {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
            let Some(format) = LogFormat::from_file_name(&name) else {
                continue;
            };
            match self.load_file(&path, &name, format) {
                Ok(entry) => tracing::info!(log_id = %entry.log_id, file = %name, "loaded log"),
                Err(e) => tracing::warn!(file = %name, error = %e, "skipping log file"),
            }
        }
        Ok(())
    }

    fn load_file(&self, path: &Path, name: &str, format: LogFormat) -> Result<LogStoreEntry, LogError> {
        let bytes = fs::read(path)?;
        let mapping = match format {
            LogFormat::Csv => Some(read_sidecar(path)?),
            LogFormat::Xes => None,
        };
        let id = log_id(&bytes, format, mapping.as_ref());
        if let Some(existing) = self.get_entry(&id) {
            return Ok(existing);
        }
        let log = parse(&bytes, format, mapping.as_ref())?;
        Ok(self.insert(id, name.to_owned(), format, bytes.len() as u64, log))
    }

    fn insert(&self, id: String, file_name: String, format: LogFormat, size: u64, log: EventLog) -> LogStoreEntry {
        let entry = LogStoreEntry {
            log_id: id.clone(),
            file_name,
            format,
            size_bytes: size,
            ingested_at: Utc::now(),
            statistics: log_statistics(&log),
        };
        let stored = Stored {
            entry: entry.clone(),
            log: Arc::new(log),
        };
        self.logs.write().expect("log store lock").insert(id, stored);
        entry
    }

    /// Parses `bytes` and stores them under the root directory.
    ///
    /// `file_name` picks the format by extension; content starting with `<` is
    /// taken as XES when the extension is unknown. Identical content returns the
    /// existing entry.
    pub fn ingest(&self, file_name: &str, bytes: &[u8], mapping: Option<CsvMapping>) -> Result<Ingested, LogError> {
        let format = LogFormat::from_file_name(file_name).unwrap_or_else(|| {
            if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'<') {
                LogFormat::Xes
            } else {
                LogFormat::Csv
            }
        });
        let mapping = match format {
            LogFormat::Csv => Some(mapping.unwrap_or_default()),
            LogFormat::Xes => None,
        };
        let id = log_id(bytes, format, mapping.as_ref());
        if let Some(entry) = self.get_entry(&id) {
            return Ok(Ingested { entry, created: false });
        }
        let log = parse(bytes, format, mapping.as_ref())?;

        let _guard = self.writes.lock().expect("upload lock");
        if let Some(entry) = self.get_entry(&id) {
            return Ok(Ingested { entry, created: false });
        }
        let mut stem = sanitize_file_name(file_name);
        if LogFormat::from_file_name(&stem) != Some(format) {
            stem = format!("{stem}.{format}");
        }
        let stored_name = format!("{id}-{stem}");
        let path = self.root.join(&stored_name);
        fs::write(&path, bytes)?;
        if let Some(m) = &mapping {
            fs::write(sidecar_path(&path), serde_json::to_vec_pretty(m).expect("mapping serializes"))?;
        }
        let entry = self.insert(id, stored_name, format, bytes.len() as u64, log);
        Ok(Ingested { entry, created: true })
    }

    pub fn entries(&self) -> Vec<LogStoreEntry> {
        let logs = self.logs.read().expect("log store lock");
        let mut entries: Vec<_> = logs.values().map(|s| s.entry.clone()).collect();
        entries.sort_by(|a, b| a.file_name.cmp(&b.file_name).then_with(|| a.log_id.cmp(&b.log_id)));
        entries
    }

    pub fn get_entry(&self, id: &str) -> Option<LogStoreEntry> {
        self.logs.read().expect("log store lock").get(id).map(|s| s.entry.clone())
    }

    /// Shared immutable snapshot of a stored log.
    pub fn get(&self, id: &str) -> Option<Arc<EventLog>> {
        self.logs.read().expect("log store lock").get(id).map(|s| Arc::clone(&s.log))
    }
}

fn read_sidecar(path: &Path) -> Result<CsvMapping, LogError> {
    let sidecar = sidecar_path(path);
    if !sidecar.exists() {
        return Ok(CsvMapping::default());
    }
    let text = fs::read_to_string(&sidecar)?;
    serde_json::from_str(&text).map_err(|e| {
        LogError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{}: {e}", sidecar.display()),
        ))
    })
}
