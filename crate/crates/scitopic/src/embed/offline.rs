//! Network-free deterministic embedding backend.
//!
//! Each token hashes to a seeded pseudo-random direction; a text embeds as
//! the unit-normalized sum of its token vectors. Texts sharing tokens land
//! close together, which is enough structure for clustering tests and mock
//! pipelines. Empty text embeds as a fixed pseudo-token so that no zero
//! vector is ever produced silently.

use super::{EmbedError, EmbeddingBackend, EmbeddingVector};
use crate::corpus::split_tokens;
use crate::seed;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct OfflineHashEmbedder {
    seed: u64,
    dim: usize,
}

impl OfflineHashEmbedder {
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { seed, dim }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut rng = seed::rng(self.seed, token);
        (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let tokens = split_tokens(text);
        let mut acc = vec![0.0; self.dim];
        if tokens.is_empty() {
            // Fixed empty-text vector, distinct from all-zeros.
            acc = self.token_vector("");
        } else {
            for token in &tokens {
                for (a, v) in acc.iter_mut().zip(self.token_vector(token)) {
                    *a += v;
                }
            }
        }
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut acc {
                *v /= norm;
            }
        } else {
            // Token vectors cancelled exactly; fall back to the empty-text
            // direction rather than returning zeros.
            return self.embed_one("");
        }
        acc
    }
}

impl EmbeddingBackend for OfflineHashEmbedder {
    fn id(&self) -> String {
        format!("offline-hash-v1:seed={}:dim={}", self.seed, self.dim)
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts
            .iter()
            .map(|t| EmbeddingVector::new(self.embed_one(t), Some(self.dim)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_text;

    #[test]
    fn seeded_embedding_reproduces_exactly() {
        let a = embed_text(&OfflineHashEmbedder::new(7, 16), "graph").unwrap();
        let b = embed_text(&OfflineHashEmbedder::new(7, 16), "graph").unwrap();
        assert_eq!(a.values(), b.values());
        let other_seed = embed_text(&OfflineHashEmbedder::new(8, 16), "graph").unwrap();
        assert_ne!(a.values(), other_seed.values());
    }

    #[test]
    fn output_is_unit_norm() {
        let v = embed_text(&OfflineHashEmbedder::new(7, 16), "graph node edge").unwrap();
        let norm: f64 = v.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_vector_is_fixed_and_nonzero() {
        let backend = OfflineHashEmbedder::new(7, 16);
        let a = embed_text(&backend, "").unwrap();
        let b = embed_text(&backend, "").unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn shared_tokens_pull_texts_together() {
        let backend = OfflineHashEmbedder::new(7, 32);
        let a = embed_text(&backend, "graph node edge walk").unwrap();
        let b = embed_text(&backend, "graph node edge path").unwrap();
        let c = embed_text(&backend, "protein cell tissue gene").unwrap();
        let cos = |x: &EmbeddingVector, y: &EmbeddingVector| {
            x.values()
                .iter()
                .zip(y.values())
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        assert!(cos(&a, &b) > cos(&a, &c));
    }
}
