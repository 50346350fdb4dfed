//! Append-only JSON-lines store of finished reports.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::report::{AnalysisReport, SCHEMA_VERSION};

pub const CACHE_FILE: &str = "reports.jsonl";
pub const CACHE_DIR_ENV: &str = "SUBSUM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub canonical_key: String,
    pub command: String,
    pub digest: String,
}

impl CacheKey {
    pub fn new(canonical_key: &str, command: &str, params: &Value) -> Self {
        CacheKey {
            canonical_key: canonical_key.to_string(),
            command: command.to_string(),
            digest: param_digest(params),
        }
    }
}

/// SHA-256 of the compact JSON form. Object keys serialize sorted, so
/// equal parameter sets give equal digests.
pub fn param_digest(params: &Value) -> String {
    let bytes = serde_json::to_vec(params).expect("json values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: CacheKey,
    report: AnalysisReport,
}

pub struct ScanCache {
    path: PathBuf,
    records: Mutex<HashMap<CacheKey, AnalysisReport>>,
    writer: Mutex<File>,
    dropped: usize,
}

impl ScanCache {
    /// Open (creating if needed) the store under `dir`. Lines that fail to
    /// parse are dropped; a torn final line is cut off the file so later
    /// appends start on a clean line.
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let mut records = HashMap::new();
        let mut dropped = 0;
        let mut good_len = 0u64;
        if path.exists() {
            let mut reader = BufReader::new(File::open(&path)?);
            let mut line = String::new();
            let mut offset = 0u64;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                offset += n as u64;
                let complete = line.ends_with('\n');
                match serde_json::from_str::<Record>(line.trim_end()) {
                    Ok(r) if complete && r.report.schema_version == SCHEMA_VERSION => {
                        records.insert(r.key, r.report);
                        good_len = offset;
                    }
                    Ok(_) if complete => good_len = offset,
                    _ => {
                        dropped += 1;
                        if complete {
                            good_len = offset;
                        }
                    }
                }
            }
            let file = OpenOptions::new().write(true).open(&path)?;
            file.set_len(good_len)?;
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(ScanCache {
            path,
            records: Mutex::new(records),
            writer: Mutex::new(writer),
            dropped,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of unreadable records skipped at load.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<AnalysisReport> {
        self.records.lock().expect("cache lock").get(key).cloned()
    }

    /// Append one record; concurrent callers are serialized on the writer.
    pub fn put(&self, key: CacheKey, report: &AnalysisReport) -> io::Result<()> {
        let rec = Record {
            key: key.clone(),
            report: report.clone(),
        };
        let mut line = serde_json::to_string(&rec).map_err(io::Error::other)?;
        line.push('\n');
        {
            let mut w = self.writer.lock().expect("cache writer lock");
            w.write_all(line.as_bytes())?;
            w.flush()?;
        }
        self.records
            .lock()
            .expect("cache lock")
            .insert(key, report.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn report(x: u64) -> AnalysisReport {
        AnalysisReport::new("critical", json!({ "x": x }), None, json!({ "value": x }))
    }

    #[test]
    fn digest_is_order_independent() {
        let a = json!({"a": 1, "b": [1, 2]});
        let b: Value = serde_json::from_str(r#"{"b":[1,2],"a":1}"#).unwrap();
        assert_eq!(param_digest(&a), param_digest(&b));
        assert_ne!(param_digest(&a), param_digest(&json!({"a": 2, "b": [1, 2]})));
        assert_eq!(param_digest(&a).len(), 64);
    }

    #[test]
    fn round_trip_and_corrupt_tail() {
        let dir = tempfile::tempdir().unwrap();
        let k1 = CacheKey::new("Z4", "critical", &json!({"x": 1}));
        let k2 = CacheKey::new("Z5", "critical", &json!({"x": 2}));
        {
            let c = ScanCache::open(dir.path()).unwrap();
            c.put(k1.clone(), &report(1)).unwrap();
            c.put(k2.clone(), &report(2)).unwrap();
        }
        // tear the last record
        let path = dir.path().join(CACHE_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 10]).unwrap();

        let c = ScanCache::open(dir.path()).unwrap();
        assert_eq!(c.dropped(), 1);
        assert_eq!(c.get(&k1), Some(report(1)));
        assert_eq!(c.get(&k2), None);
        c.put(k2.clone(), &report(2)).unwrap();
        drop(c);
        let c = ScanCache::open(dir.path()).unwrap();
        assert_eq!((c.dropped(), c.len()), (0, 2));
    }

    #[test]
    fn concurrent_appends() {
        let dir = tempfile::tempdir().unwrap();
        let c = ScanCache::open(dir.path()).unwrap();
        std::thread::scope(|s| {
            for t in 0..8u64 {
                let c = &c;
                s.spawn(move || {
                    for i in 0..25u64 {
                        let x = t * 100 + i;
                        c.put(CacheKey::new("Z2", "c", &json!({ "x": x })), &report(x)).unwrap();
                    }
                });
            }
        });
        drop(c);
        let c = ScanCache::open(dir.path()).unwrap();
        assert_eq!((c.len(), c.dropped()), (200, 0));
    }
}
