//! Document collection: JSONL ingestion, tokenization and term statistics.
//!
//! A corpus is immutable once built and safe to share read-only across
//! workers. Document order is the file order, vocabulary order is
//! first-occurrence order, so identical inputs always produce identical
//! indices.

use indexmap::IndexMap;
use serde::Deserialize;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate document id \"{id}\" at lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("corpus is empty")]
    Empty,
    #[error("invalid tokenize config: {0}")]
    Config(String),
    #[error("unknown document id \"{0}\"")]
    UnknownId(String),
}

/// One paper: title, optional abstract, and a metadata map.
///
/// Metadata values are stored as strings in the order they appeared in the
/// input record; canonical (sorted-key) serialization happens at embedding
/// time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub metadata: IndexMap<String, String>,
}

impl Document {
    /// Metadata as a canonical single string: `"k1: v1; k2: v2"` with keys
    /// sorted lexicographically. Key order in the input never changes the
    /// result.
    pub fn metadata_string(&self) -> String {
        let mut keys: Vec<&String> = self.metadata.keys().collect();
        keys.sort();
        keys.iter()
            .map(|k| format!("{}: {}", k, self.metadata[k.as_str()]))
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Parsed `year` metadata entry, if present and numeric.
    pub fn year(&self) -> Option<i32> {
        self.metadata.get("year").and_then(|v| v.trim().parse().ok())
    }
}

/// Tokenization settings for term statistics.
#[derive(Debug, Clone)]
pub struct TokenizeConfig {
    /// Words dropped before counting.
    pub stopwords: HashSet<String>,
    /// Terms occurring in fewer than this many documents are dropped.
    pub min_df: usize,
}

impl Default for TokenizeConfig {
    fn default() -> Self {
        Self {
            stopwords: HashSet::new(),
            min_df: 2,
        }
    }
}

/// Sparse per-document term counts: `(term index, count)` sorted by index.
pub type TermRow = Vec<(u32, u32)>;

/// Loaded documents plus tokenized term statistics.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// term -> index, in first-occurrence order over the filtered vocabulary.
    pub vocabulary: IndexMap<String, usize>,
    /// One sparse row per document, aligned with `documents`.
    pub term_doc_matrix: Vec<TermRow>,
    id_index: HashMap<String, usize>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn document(&self, id: &str) -> Result<&Document, CorpusError> {
        self.index_of(id)
            .map(|i| &self.documents[i])
            .ok_or_else(|| CorpusError::UnknownId(id.to_string()))
    }

    /// Total filtered token count of document `doc` (sum of its matrix row).
    pub fn token_count(&self, doc: usize) -> u64 {
        self.term_doc_matrix[doc]
            .iter()
            .map(|&(_, c)| c as u64)
            .sum()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    metadata: Option<serde_json::Map<String, serde_json::Value>>,
}

fn metadata_value_to_string(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => items
            .iter()
            .map(metadata_value_to_string)
            .collect::<Vec<_>>()
            .join(", "),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Loads a JSON-lines corpus. Blank lines are skipped; every other line must
/// be a record with a non-empty unique `id` and non-empty `title`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut documents = Vec::new();
    let mut id_index: HashMap<String, usize> = HashMap::new();
    let mut id_lines: HashMap<String, usize> = HashMap::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        if raw.id.is_empty() {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "empty id".into(),
            });
        }
        if raw.title.is_empty() {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "empty title".into(),
            });
        }
        if let Some(&first) = id_lines.get(&raw.id) {
            return Err(CorpusError::DuplicateId {
                id: raw.id,
                first,
                second: line_no,
            });
        }
        id_lines.insert(raw.id.clone(), line_no);
        let metadata = raw
            .metadata
            .unwrap_or_default()
            .iter()
            .map(|(k, v)| (k.clone(), metadata_value_to_string(v)))
            .collect();
        id_index.insert(raw.id.clone(), documents.len());
        documents.push(Document {
            id: raw.id,
            title: raw.title,
            abstract_text: raw.abstract_text.unwrap_or_default(),
            metadata,
        });
    }
    if documents.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus {
        documents,
        vocabulary: IndexMap::new(),
        term_doc_matrix: Vec::new(),
        id_index,
    })
}

/// Lowercases, strips punctuation to spaces, and splits on whitespace.
pub fn split_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Populates `vocabulary` and `term_doc_matrix` from title + abstract tokens.
///
/// Stopwords are removed before counting; terms present in fewer than
/// `min_df` documents are dropped from the vocabulary and the matrix.
pub fn tokenize(mut corpus: Corpus, config: &TokenizeConfig) -> Result<Corpus, CorpusError> {
    if config.min_df < 1 {
        return Err(CorpusError::Config("min_df must be >= 1".into()));
    }

    let doc_tokens: Vec<Vec<String>> = corpus
        .documents
        .iter()
        .map(|doc| {
            let mut tokens = split_tokens(&doc.title);
            tokens.extend(split_tokens(&doc.abstract_text));
            tokens.retain(|t| !config.stopwords.contains(t));
            tokens
        })
        .collect();

    let mut df: IndexMap<String, usize> = IndexMap::new();
    for tokens in &doc_tokens {
        let unique: HashSet<&String> = tokens.iter().collect();
        for token in unique {
            *df.entry(token.clone()).or_insert(0) += 1;
        }
    }

    // First-occurrence order over the filtered vocabulary.
    let mut vocabulary: IndexMap<String, usize> = IndexMap::new();
    for tokens in &doc_tokens {
        for token in tokens {
            if df[token] >= config.min_df && !vocabulary.contains_key(token) {
                let next = vocabulary.len();
                vocabulary.insert(token.clone(), next);
            }
        }
    }

    let term_doc_matrix = doc_tokens
        .iter()
        .map(|tokens| {
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for token in tokens {
                if let Some(&idx) = vocabulary.get(token) {
                    *counts.entry(idx as u32).or_insert(0) += 1;
                }
            }
            let mut row: TermRow = counts.into_iter().collect();
            row.sort_unstable_by_key(|&(t, _)| t);
            row
        })
        .collect();

    corpus.vocabulary = vocabulary;
    corpus.term_doc_matrix = term_doc_matrix;
    Ok(corpus)
}

/// Reads gold labels from a two-column `id,label` CSV. A leading `id,label`
/// header row is skipped if present.
pub fn load_labels(path: impl AsRef<Path>) -> Result<IndexMap<String, String>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(BufReader::new(file));
    let mut labels = IndexMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CorpusError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(CorpusError::Parse {
                line: i + 1,
                message: format!("expected 2 columns, got {}", record.len()),
            });
        }
        let id = record[0].to_string();
        let label = record[1].to_string();
        if i == 0 && id == "id" && label == "label" {
            continue;
        }
        labels.insert(id, label);
    }
    Ok(labels)
}
