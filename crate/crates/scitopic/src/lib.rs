//! Topic discovery for scientific-document corpora.
//!
//! The pipeline clusters composite document embeddings (title, abstract and
//! metadata encoded separately and concatenated), then refines the embedding
//! space through LLM-judged triplets: ambiguous documents are found by
//! entropy over a t-distribution soft assignment, an LLM (or a deterministic
//! mock) judges which of two candidates is thematically closer to each
//! anchor, and the judged triplets train a linear adapter with an in-batch
//! contrastive loss. Topics are verbalized with class-based TF-IDF and scored
//! with coherence, diversity and cluster-geometry metrics.
//!
//! The numeric core is generic over the scalar type (see [`scalar::Scalar`]);
//! the pipeline and CLI run on [`Real`] (`f64`).

pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod finetune;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod sampler;
pub mod scalar;
pub mod seed;
pub mod verbalize;

/// Scalar type used by the pipeline and CLI.
pub type Real = f64;

/// Embedding matrix as consumed by clustering and fine-tuning (rows = documents).
pub type EmbeddingMatrix = ndarray::Array2<Real>;

pub use cluster::{ClusterState, SoftAssignment};
pub use corpus::{Corpus, Document, TokenizeConfig};
pub use embed::{CompositeEmbedding, EmbeddingBackend, EmbeddingVector, EmptyFieldPolicy};
pub use finetune::{Adapter, FineTuneConfig, TrainBatch};
pub use metrics::MetricsReport;
pub use oracle::{TripletJudgment, TripletPrompt, Verdict};
pub use pipeline::{PipelineConfig, RunManifest};
pub use sampler::{EntropyRecord, SamplerConfig, Triplet};
pub use scalar::Scalar;
pub use verbalize::TopicSummary;
