//! JSON-lines result cache: one entry per line keyed by D, atomic rewrites
//! via a temp file and rename, schema-version gated. A partial file from an
//! interrupted run stays loadable; later lines for the same D win.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::verdict::{InvariantRecord, Verdict};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema_version: u32,
    pub d: u64,
    pub record: InvariantRecord,
    pub verdict: Verdict,
    pub tool_version: String,
    pub timestamp: u64,
}

impl CacheEntry {
    pub fn new(record: InvariantRecord, verdict: Verdict) -> Self {
        CacheEntry {
            schema_version: SCHEMA_VERSION,
            d: record.d,
            record,
            verdict,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|t| t.as_secs()).unwrap_or(0),
        }
    }

    /// Data equality: everything except provenance metadata.
    pub fn same_data(&self, other: &CacheEntry) -> bool {
        self.schema_version == other.schema_version
            && self.d == other.d
            && self.record == other.record
            && self.verdict == other.verdict
    }
}

/// Load all current-schema entries; unknown or stale lines are skipped so a
/// version bump invalidates without erroring.
pub fn cache_load(path: &Path) -> Result<BTreeMap<u64, CacheEntry>> {
    let mut out = BTreeMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheEntry>(&line) {
            Ok(entry) if entry.schema_version == SCHEMA_VERSION => {
                out.insert(entry.d, entry);
            }
            _ => {} // stale schema or torn line: treat as a miss
        }
    }
    Ok(out)
}

pub fn cache_get(path: &Path, d: u64) -> Result<Option<CacheEntry>> {
    Ok(cache_load(path)?.remove(&d))
}

/// Atomic full rewrite: temp file in the same directory, then rename.
pub fn cache_write_all(path: &Path, entries: &BTreeMap<u64, CacheEntry>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("cache"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        for entry in entries.values() {
            serde_json::to_writer(&mut f, entry)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Append-or-replace one entry by D.
pub fn cache_put(path: &Path, entry: CacheEntry) -> Result<()> {
    let mut entries = cache_load(path)?;
    entries.insert(entry.d, entry);
    cache_write_all(path, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bi;

    fn entry_for(d: i64) -> CacheEntry {
        let (rec, v) = crate::verdict::evaluate(&bi(d)).unwrap();
        CacheEntry::new(rec, v)
    }

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        assert!(cache_get(&path, 15).unwrap().is_none());
        let e = entry_for(15);
        cache_put(&path, e.clone()).unwrap();
        let back = cache_get(&path, 15).unwrap().unwrap();
        assert!(back.same_data(&e));
        // replace by d keeps one line per D
        cache_put(&path, e.clone()).unwrap();
        assert_eq!(cache_load(&path).unwrap().len(), 1);
    }

    #[test]
    fn schema_bump_invalidates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut e = entry_for(15);
        e.schema_version = SCHEMA_VERSION + 1;
        let mut map = BTreeMap::new();
        map.insert(e.d, e);
        cache_write_all(&path, &map).unwrap();
        assert!(cache_get(&path, 15).unwrap().is_none());
    }

    #[test]
    fn torn_lines_are_misses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let e = entry_for(15);
        let mut text = serde_json::to_string(&e).unwrap();
        text.push('\n');
        text.push_str("{\"schema_version\":1,\"d\":21,\"trunc");
        std::fs::write(&path, text).unwrap();
        let map = cache_load(&path).unwrap();
        assert_eq!(map.len(), 1);
        assert!(map.contains_key(&15));
    }
}
