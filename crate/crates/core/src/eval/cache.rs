//! Append-only JSON-lines cache of word values.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::arith::{parse_decimal, BigComplex, Real};

/// Environment variable that overrides the cache location.
pub const CACHE_ENV: &str = "CMZV_CACHE";
pub const DEFAULT_CACHE_PATH: &str = "cmzv-cache.jsonl";

#[derive(Serialize, Deserialize)]
struct Line {
    k: String,
    p: u32,
    re: String,
    im: String,
}

/// Word values keyed by canonical word text and precision. Concurrent
/// inserts of the same key are harmless because values are deterministic.
#[derive(Debug, Default)]
pub struct ValueCache {
    entries: Mutex<HashMap<(String, u32), BigComplex>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

fn digits_for_bits(bits: u32) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 6
}

impl ValueCache {
    pub fn in_memory() -> Self {
        ValueCache::default()
    }

    /// Resolves the cache path: the environment variable wins over the
    /// explicit choice, which wins over the default.
    pub fn resolve_path(explicit: Option<&Path>) -> PathBuf {
        if let Ok(p) = std::env::var(CACHE_ENV) {
            if !p.is_empty() {
                return PathBuf::from(p);
            }
        }
        explicit.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_PATH))
    }

    /// Opens (creating if needed) a cache file. Lines that fail to parse are
    /// skipped; they are recomputed on demand.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for line in reader.lines() {
                let Ok(line) = line else { continue };
                let Ok(l) = serde_json::from_str::<Line>(&line) else { continue };
                let (Some(re), Some(im)) = (parse_decimal(&l.re), parse_decimal(&l.im)) else { continue };
                let v = BigComplex::new(Real::from_ratio(&re, l.p), Real::from_ratio(&im, l.p));
                entries.insert((l.k, l.p), v);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ValueCache { entries: Mutex::new(entries), file: Some(Mutex::new(file)), path: Some(path.to_path_buf()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str, bits: u32) -> Option<BigComplex> {
        self.entries.lock().expect("cache lock").get(&(key.to_string(), bits)).cloned()
    }

    pub fn insert(&self, key: &str, bits: u32, value: &BigComplex) {
        let stored = value.with_bits(bits);
        let mut entries = self.entries.lock().expect("cache lock");
        if entries.contains_key(&(key.to_string(), bits)) {
            return;
        }
        if let Some(file) = &self.file {
            let digits = digits_for_bits(bits);
            let line = Line {
                k: key.to_string(),
                p: bits,
                re: stored.re.to_decimal(digits),
                im: stored.im.to_decimal(digits),
            };
            let text = serde_json::to_string(&line).expect("serializable");
            // A failed write only costs a recomputation later.
            let _ = writeln!(file.lock().expect("cache file lock"), "{text}");
        }
        entries.insert((key.to_string(), bits), stored);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Evaluator;
    use crate::words::{word_key, Atom};
    use std::sync::Arc;

    #[test]
    fn cache_hits_match_fresh_values_and_survive_reload() {
        let dir = std::env::temp_dir().join(format!("cmzv-cache-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.jsonl");
        let _ = std::fs::remove_file(&path);
        let w = vec![Atom::w0(), Atom::xmi()];
        let bits = 128;
        let fresh = Evaluator::new(bits).eval_word(&w).unwrap();
        {
            let cache = Arc::new(ValueCache::open(&path).unwrap());
            Evaluator::new(bits).with_cache(cache.clone()).eval_word(&w).unwrap();
            assert_eq!(cache.len(), 1);
        }
        std::fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{not json\n").unwrap();
        let cache = Arc::new(ValueCache::open(&path).unwrap());
        let hit = cache.get(&word_key(&w), bits).unwrap();
        let diff = &hit - &fresh;
        assert!(diff.max_abs_component().mantissa().bits() <= 8);
        let again = Evaluator::new(bits).with_cache(cache).eval_word(&w).unwrap();
        assert!((&again - &fresh).max_abs_component().mantissa().bits() <= 8);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
