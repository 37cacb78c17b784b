//! OpenAI-compatible embeddings client with mandatory disk caching.
//!
//! Request: `POST <endpoint>` with `{"model": .., "input": [..]}`; the
//! response carries one embedding per input, in input order (or tagged with
//! an `index`). Uncached texts are batched and fetched by a bounded pool of
//! worker threads; every fetched vector is written to the cache before use.

use super::{EmbedError, EmbeddingBackend, EmbeddingCache, EmbeddingVector};
use serde::Deserialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

/// Environment variables consulted for the bearer token, in order.
const TOKEN_ENV_VARS: [&str; 2] = ["SCITOPIC_API_KEY", "OPENAI_API_KEY"];

pub struct RemoteEmbedder {
    endpoint: String,
    model: String,
    declared_dim: Option<usize>,
    observed_dim: OnceLock<usize>,
    cache: EmbeddingCache,
    client: reqwest::blocking::Client,
    retries: usize,
    batch_size: usize,
    concurrency: usize,
    requests_issued: AtomicUsize,
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

impl RemoteEmbedder {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        dim: Option<usize>,
        cache: EmbeddingCache,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            declared_dim: dim,
            observed_dim: OnceLock::new(),
            cache,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("reqwest client"),
            retries: 3,
            batch_size: 64,
            concurrency: 8,
            requests_issued: AtomicUsize::new(0),
        }
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries;
        self
    }

    pub fn with_concurrency(mut self, concurrency: usize) -> Self {
        self.concurrency = concurrency.max(1);
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Number of HTTP requests issued so far (cache hits issue none).
    pub fn requests_issued(&self) -> usize {
        self.requests_issued.load(Ordering::Relaxed)
    }

    fn expected_dim(&self) -> Option<usize> {
        self.declared_dim.or(self.observed_dim.get().copied())
    }

    fn bearer_token() -> Option<String> {
        TOKEN_ENV_VARS
            .iter()
            .find_map(|var| std::env::var(var).ok())
            .filter(|token| !token.is_empty())
    }

    /// One POST for a batch of texts, with bounded retries.
    fn fetch_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let body = serde_json::json!({ "model": self.model, "input": texts });
        let mut last_error = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 * (1 << attempt.min(4))));
            }
            self.requests_issued.fetch_add(1, Ordering::Relaxed);
            let mut request = self.client.post(&self.endpoint).json(&body);
            if let Some(token) = Self::bearer_token() {
                request = request.bearer_auth(token);
            }
            match request.send().and_then(|r| r.error_for_status()) {
                Ok(response) => {
                    let parsed: EmbeddingsResponse = response
                        .json()
                        .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
                    if parsed.data.len() != texts.len() {
                        return Err(EmbedError::BadResponse(format!(
                            "{} embeddings for {} inputs",
                            parsed.data.len(),
                            texts.len()
                        )));
                    }
                    let mut ordered: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
                    for (pos, item) in parsed.data.into_iter().enumerate() {
                        let slot = item.index.unwrap_or(pos);
                        if slot >= ordered.len() || ordered[slot].is_some() {
                            return Err(EmbedError::BadResponse(format!(
                                "bad embedding index {slot}"
                            )));
                        }
                        ordered[slot] = Some(item.embedding);
                    }
                    return Ok(ordered.into_iter().map(|v| v.unwrap()).collect());
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(EmbedError::Transport {
            attempts: self.retries + 1,
            message: last_error,
        })
    }
}

impl EmbeddingBackend for RemoteEmbedder {
    fn id(&self) -> String {
        format!("remote:{}:{}", self.endpoint, self.model)
    }

    fn dim(&self) -> Option<usize> {
        self.expected_dim()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let backend_id = self.id();
        let mut results: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (i, text) in texts.iter().enumerate() {
            match self.cache.get(&EmbeddingCache::key(&backend_id, text)) {
                Some(values) => results[i] = Some(values),
                None => missing.push(i),
            }
        }

        if !missing.is_empty() {
            let chunks: Vec<&[usize]> = missing.chunks(self.batch_size).collect();
            let fetched: Vec<Mutex<Option<Result<Vec<Vec<f64>>, EmbedError>>>> =
                chunks.iter().map(|_| Mutex::new(None)).collect();
            let next = AtomicUsize::new(0);
            let workers = self.concurrency.min(chunks.len());
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let chunk_idx = next.fetch_add(1, Ordering::Relaxed);
                        if chunk_idx >= chunks.len() {
                            break;
                        }
                        let batch: Vec<String> =
                            chunks[chunk_idx].iter().map(|&i| texts[i].clone()).collect();
                        let outcome = self.fetch_batch(&batch);
                        *fetched[chunk_idx].lock().unwrap() = Some(outcome);
                    });
                }
            });
            for (chunk, cell) in chunks.iter().zip(fetched) {
                let vectors = cell.into_inner().unwrap().expect("worker filled slot")?;
                for (&text_idx, values) in chunk.iter().zip(vectors) {
                    self.cache
                        .put(&EmbeddingCache::key(&backend_id, &texts[text_idx]), &values)?;
                    results[text_idx] = Some(values);
                }
            }
        }

        let mut out = Vec::with_capacity(texts.len());
        for values in results.into_iter().map(|v| v.expect("all slots filled")) {
            let vector = EmbeddingVector::new(values, self.expected_dim())?;
            let _ = self.observed_dim.set(vector.dim());
            out.push(vector);
        }
        Ok(out)
    }
}
