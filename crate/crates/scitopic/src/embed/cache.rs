//! Content-addressed on-disk cache for remote embedding responses.
//!
//! Key = sha256(backend id ‖ text), value = the raw vector as a JSON array.
//! Files are written to a temp path and renamed, so concurrent readers never
//! observe a partial vector.

use super::EmbedError;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct EmbeddingCache {
    dir: PathBuf,
}

impl EmbeddingCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let dir = dir.as_ref().join("embeddings");
        fs::create_dir_all(&dir).map_err(|source| EmbedError::CacheIo {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self { dir })
    }

    pub fn key(backend_id: &str, text: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(backend_id.as_bytes());
        hasher.update([0x1f]);
        hasher.update(text.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        let bytes = fs::read(self.path_for(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, values: &[f64]) -> Result<(), EmbedError> {
        let path = self.path_for(key);
        let tmp = self.dir.join(format!("{key}.tmp"));
        let io_err = |source: std::io::Error| EmbedError::CacheIo {
            path: path.display().to_string(),
            source,
        };
        let body = serde_json::to_vec(values).expect("finite f64 slice serializes");
        fs::write(&tmp, body).map_err(io_err)?;
        fs::rename(&tmp, &path).map_err(io_err)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path()).unwrap();
        let key = EmbeddingCache::key("backend-a", "some text");
        assert!(cache.get(&key).is_none());
        let values = vec![0.1, -2.5e-17, 3.0, f64::MIN_POSITIVE];
        cache.put(&key, &values).unwrap();
        assert_eq!(cache.get(&key).unwrap(), values);
    }

    #[test]
    fn key_depends_on_backend_and_text() {
        let a = EmbeddingCache::key("b1", "t");
        assert_ne!(a, EmbeddingCache::key("b2", "t"));
        assert_ne!(a, EmbeddingCache::key("b1", "u"));
        assert_eq!(a, EmbeddingCache::key("b1", "t"));
    }
}
