//! Per-field document embeddings and their composite concatenation.
//!
//! Title, abstract and metadata are embedded separately by a pluggable
//! backend and concatenated `title ‖ abstract ‖ metadata`. Backends are
//! deterministic within a run: the offline backend is a pure function, the
//! remote backend caches every response on disk.

mod cache;
mod offline;
mod remote;

pub use cache::EmbeddingCache;
pub use offline::OfflineHashEmbedder;
pub use remote::RemoteEmbedder;

use crate::corpus::{Corpus, Document};
use indexmap::IndexMap;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding backend transport failure after {attempts} attempts: {message}")]
    Transport { attempts: usize, message: String },
    #[error("backend returned {got} values, expected dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding contains a non-finite value (index {index})")]
    NonFinite { index: usize },
    #[error("composite parts have mismatched dimensions: {0:?}")]
    CompositeDims(Vec<usize>),
    #[error("embedding cache I/O at {path}: {source}")]
    CacheIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend response malformed: {0}")]
    BadResponse(String),
}

/// Fixed-length finite embedding of one text field.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Validates finiteness; `expected_dim` additionally enforces the
    /// backend's declared dimension.
    pub fn new(values: Vec<f64>, expected_dim: Option<usize>) -> Result<Self, EmbedError> {
        if let Some(expected) = expected_dim {
            if values.len() != expected {
                return Err(EmbedError::DimensionMismatch {
                    expected,
                    got: values.len(),
                });
            }
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// All-zero vector of the given dimension (empty-field policy).
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }
}

/// Concatenated per-field embeddings for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeEmbedding {
    pub values: Vec<f64>,
    pub source_doc: String,
}

impl CompositeEmbedding {
    /// Backend dimension (a third of the composite length).
    pub fn field_dim(&self) -> usize {
        self.values.len() / 3
    }

    pub fn title_part(&self) -> &[f64] {
        &self.values[..self.field_dim()]
    }

    pub fn abstract_part(&self) -> &[f64] {
        &self.values[self.field_dim()..2 * self.field_dim()]
    }

    pub fn metadata_part(&self) -> &[f64] {
        &self.values[2 * self.field_dim()..]
    }
}

/// How empty abstract/metadata fields are embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyFieldPolicy {
    /// Embed the empty string; the backend decides what that vector is.
    #[default]
    EmbedEmptyString,
    /// Substitute an all-zero vector without calling the backend.
    ZeroVector,
}

/// A deterministic text-to-vector backend.
///
/// Identical input must yield identical output within a run; remote
/// implementations achieve this through the response cache.
pub trait EmbeddingBackend: Send + Sync {
    /// Stable identifier, part of every cache key.
    fn id(&self) -> String;

    /// Declared output dimension, when known up front.
    fn dim(&self) -> Option<usize>;

    /// Embeds `texts` in order. Implementations handle batching, retries
    /// and caching internally.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

/// Embeds a single text.
pub fn embed_text(
    backend: &dyn EmbeddingBackend,
    text: &str,
) -> Result<EmbeddingVector, EmbedError> {
    let mut out = backend.embed_batch(std::slice::from_ref(&text.to_string()))?;
    Ok(out.remove(0))
}

/// Concatenates the three field embeddings: `[title ‖ abstract ‖ metadata]`.
pub fn compose(
    h_title: &EmbeddingVector,
    h_abstract: &EmbeddingVector,
    h_metadata: &EmbeddingVector,
    source_doc: &str,
) -> Result<CompositeEmbedding, EmbedError> {
    let dims = [h_title.dim(), h_abstract.dim(), h_metadata.dim()];
    if dims[0] != dims[1] || dims[0] != dims[2] {
        return Err(EmbedError::CompositeDims(dims.to_vec()));
    }
    let mut values = Vec::with_capacity(3 * dims[0]);
    values.extend_from_slice(h_title.values());
    values.extend_from_slice(h_abstract.values());
    values.extend_from_slice(h_metadata.values());
    Ok(CompositeEmbedding {
        values,
        source_doc: source_doc.to_string(),
    })
}

/// The three field texts of a document, in embed order.
fn field_texts(doc: &Document) -> [String; 3] {
    [
        doc.title.clone(),
        doc.abstract_text.clone(),
        doc.metadata_string(),
    ]
}

/// Embeds one document's fields and composes them.
pub fn embed_document(
    backend: &dyn EmbeddingBackend,
    doc: &Document,
    policy: EmptyFieldPolicy,
) -> Result<CompositeEmbedding, EmbedError> {
    let texts = field_texts(doc);
    let to_embed: Vec<String> = match policy {
        EmptyFieldPolicy::EmbedEmptyString => texts.to_vec(),
        EmptyFieldPolicy::ZeroVector => texts.iter().filter(|t| !t.is_empty()).cloned().collect(),
    };
    let embedded = backend.embed_batch(&to_embed)?;
    let dim = embedded
        .first()
        .map(EmbeddingVector::dim)
        .or(backend.dim())
        .unwrap_or(0);
    let mut iter = embedded.into_iter();
    let mut parts = Vec::with_capacity(3);
    for text in &texts {
        if policy == EmptyFieldPolicy::ZeroVector && text.is_empty() {
            parts.push(EmbeddingVector::zeros(dim));
        } else {
            parts.push(iter.next().expect("one embedding per requested text"));
        }
    }
    compose(&parts[0], &parts[1], &parts[2], &doc.id)
}

/// Embeds every document, deduplicating identical field texts, and returns
/// the n×3d base matrix in document order.
pub fn embed_corpus(
    backend: &dyn EmbeddingBackend,
    corpus: &Corpus,
    policy: EmptyFieldPolicy,
) -> Result<Array2<f64>, EmbedError> {
    let mut unique: IndexMap<String, usize> = IndexMap::new();
    let mut doc_fields: Vec<[Option<usize>; 3]> = Vec::with_capacity(corpus.len());
    for doc in &corpus.documents {
        let texts = field_texts(doc);
        let mut slots = [None, None, None];
        for (slot, text) in slots.iter_mut().zip(texts) {
            if policy == EmptyFieldPolicy::ZeroVector && text.is_empty() {
                continue;
            }
            let next = unique.len();
            *slot = Some(*unique.entry(text).or_insert(next));
        }
        doc_fields.push(slots);
    }

    let texts: Vec<String> = unique.keys().cloned().collect();
    let embedded = backend.embed_batch(&texts)?;
    let dim = embedded
        .first()
        .map(EmbeddingVector::dim)
        .or(backend.dim())
        .unwrap_or(0);
    for vector in &embedded {
        if vector.dim() != dim {
            return Err(EmbedError::DimensionMismatch {
                expected: dim,
                got: vector.dim(),
            });
        }
    }

    let zeros = vec![0.0; dim];
    let mut matrix = Array2::zeros((corpus.len(), 3 * dim));
    for (row, slots) in doc_fields.iter().enumerate() {
        for (field, slot) in slots.iter().enumerate() {
            let values = match slot {
                Some(idx) => embedded[*idx].values(),
                None => &zeros,
            };
            for (col, &v) in values.iter().enumerate() {
                matrix[[row, field * dim + col]] = v;
            }
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use indexmap::IndexMap;

    fn vector(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec(), None).unwrap()
    }

    #[test]
    fn compose_concatenates_in_field_order() {
        let composite = compose(
            &vector(&[1.0, 0.0]),
            &vector(&[0.0, 1.0]),
            &vector(&[2.0, 2.0]),
            "d",
        )
        .unwrap();
        assert_eq!(composite.values, vec![1.0, 0.0, 0.0, 1.0, 2.0, 2.0]);
        assert_eq!(composite.values.len(), 3 * 2);
        assert_eq!(composite.title_part(), &[1.0, 0.0]);
        assert_eq!(composite.abstract_part(), &[0.0, 1.0]);
        assert_eq!(composite.metadata_part(), &[2.0, 2.0]);
    }

    #[test]
    fn compose_rejects_mismatched_dims() {
        let err = compose(
            &vector(&[1.0, 0.0]),
            &vector(&[0.0, 1.0]),
            &vector(&[2.0, 2.0, 2.0]),
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, EmbedError::CompositeDims(_)));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let err = EmbeddingVector::new(vec![1.0, f64::NAN], None).unwrap_err();
        assert!(matches!(err, EmbedError::NonFinite { index: 1 }));
    }

    fn doc(id: &str, title: &str, abstract_text: &str, meta: &[(&str, &str)]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            metadata: meta
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect::<IndexMap<_, _>>(),
        }
    }

    #[test]
    fn embed_document_composes_three_fields() {
        let backend = OfflineHashEmbedder::new(7, 8);
        let d = doc("p1", "Graph networks", "We study graphs.", &[("year", "2020")]);
        let composite = embed_document(&backend, &d, EmptyFieldPolicy::EmbedEmptyString).unwrap();
        assert_eq!(composite.values.len(), 24);
        let title = embed_text(&backend, "Graph networks").unwrap();
        assert_eq!(composite.title_part(), title.values());
    }

    #[test]
    fn zero_vector_policy_zeroes_empty_fields() {
        let backend = OfflineHashEmbedder::new(7, 8);
        let d = doc("p1", "Graph networks", "", &[("year", "2020")]);
        let composite = embed_document(&backend, &d, EmptyFieldPolicy::ZeroVector).unwrap();
        assert!(composite.abstract_part().iter().all(|&v| v == 0.0));
        assert!(composite.title_part().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn metadata_key_order_does_not_change_the_composite() {
        let backend = OfflineHashEmbedder::new(7, 8);
        let a = doc("p1", "T", "A", &[("year", "2020"), ("venue", "X")]);
        let b = doc("p2", "T", "A", &[("venue", "X"), ("year", "2020")]);
        let ca = embed_document(&backend, &a, EmptyFieldPolicy::EmbedEmptyString).unwrap();
        let cb = embed_document(&backend, &b, EmptyFieldPolicy::EmbedEmptyString).unwrap();
        assert_eq!(ca.values, cb.values);
    }

    #[test]
    fn embed_corpus_rows_match_per_document_composites() {
        let backend = OfflineHashEmbedder::new(7, 8);
        let docs = vec![
            doc("a", "Graph networks", "nodes and edges", &[("year", "2020")]),
            doc("b", "Image models", "", &[]),
        ];
        let mut corpus = Corpus::default();
        for d in docs {
            corpus.documents.push(d);
        }
        let matrix = embed_corpus(&backend, &corpus, EmptyFieldPolicy::EmbedEmptyString).unwrap();
        for (i, d) in corpus.documents.iter().enumerate() {
            let composite =
                embed_document(&backend, d, EmptyFieldPolicy::EmbedEmptyString).unwrap();
            let row: Vec<f64> = matrix.row(i).to_vec();
            assert_eq!(row, composite.values);
        }
    }
}
