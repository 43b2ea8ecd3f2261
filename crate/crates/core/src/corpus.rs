//! Documents, labels and retrieval pools, plus their JSONL persistence.
//!
//! A corpus file holds one document per line:
//!
//! ```text
//! {"id": "r1", "kind": "resume", "fields": [["title", "Engineer"], ["skills", "Rust, SQL"]]}
//! ```
//!
//! Labels are `{"job_id", "resume_id", "y"}` rows and pools are
//! `{"job_id", "candidates": [...]}` rows holding the retriever's top-N in
//! rank order. Pools are joined against the label table on load; candidates
//! without a label row are `Unlabeled` and count as negatives downstream.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{read_jsonl, write_jsonl, JsonlError};

/// Retrieval depth used throughout: pools hold the top-20 candidates.
pub const DEFAULT_POOL_SIZE: usize = 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at {path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("duplicate label for ({job_id:?}, {resume_id:?}) at line {line}")]
    DuplicateLabel {
        job_id: String,
        resume_id: String,
        line: usize,
    },
    #[error("pool for job {job_id:?} references unknown document {id:?}")]
    UnknownDocument { job_id: String, id: String },
    #[error("pool for job {job_id:?} is empty")]
    EmptyPool { job_id: String },
    #[error("pool for job {job_id:?} lists candidate {id:?} twice")]
    DuplicateCandidate { job_id: String, id: String },
}

impl From<JsonlError> for CorpusError {
    fn from(e: JsonlError) -> Self {
        match e {
            JsonlError::Io { path, source } => CorpusError::Io { path, source },
            JsonlError::Malformed {
                path,
                line,
                message,
            } => CorpusError::MalformedRecord {
                path,
                line,
                message,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    Resume,
    Job,
}

impl std::fmt::Display for DocKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DocKind::Resume => f.write_str("resume"),
            DocKind::Job => f.write_str("job"),
        }
    }
}

/// A resume or job post: an ordered list of named text fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub kind: DocKind,
    pub fields: Vec<(String, String)>,
    /// Approximate token count of the rendered text. Informational only.
    pub token_estimate: usize,
}

impl Document {
    pub fn new(id: impl Into<String>, kind: DocKind, fields: Vec<(String, String)>) -> Self {
        let mut doc = Document {
            id: id.into(),
            kind,
            fields,
            token_estimate: 0,
        };
        doc.token_estimate = estimate_tokens(&doc.render());
        doc
    }

    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        render_document(self)
    }
}

/// Renders fields as `## name\nvalue` blocks separated by a blank line, in
/// declaration order.
pub fn render_document(doc: &Document) -> String {
    doc.fields
        .iter()
        .map(|(name, text)| format!("## {name}\n{text}"))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK ext A
        | 0x4E00..=0x9FFF    // CJK unified
        | 0xAC00..=0xD7AF    // hangul syllables
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0x20000..=0x2FA1F) // ext B..
}

/// Whitespace-split token count where every CJK codepoint counts as its own
/// token and each maximal run of non-CJK characters counts once.
pub fn estimate_tokens(text: &str) -> usize {
    let mut count = 0;
    for chunk in text.split_whitespace() {
        let mut in_run = false;
        for c in chunk.chars() {
            if is_cjk(c) {
                count += 1;
                in_run = false;
            } else if !in_run {
                count += 1;
                in_run = true;
            }
        }
    }
    count
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    id: String,
    kind: DocKind,
    fields: Vec<(String, String)>,
}

/// Documents keyed by id, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_documents(docs: Vec<Document>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        for (i, doc) in docs.into_iter().enumerate() {
            corpus.insert(doc, i + 1)?;
        }
        Ok(corpus)
    }

    fn insert(&mut self, doc: Document, line: usize) -> Result<(), CorpusError> {
        if self.index.contains_key(&doc.id) {
            return Err(CorpusError::DuplicateId { id: doc.id, line });
        }
        self.index.insert(doc.id.clone(), self.docs.len());
        self.docs.push(doc);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter()
    }

    /// Merges two corpora, rejecting ids present in both.
    pub fn merge(mut self, other: Corpus) -> Result<Corpus, CorpusError> {
        for doc in other.docs {
            self.insert(doc, 0)?;
        }
        Ok(self)
    }
}

/// Loads a corpus file. With `kind = Some(k)` only documents of that kind are
/// kept; all lines are still validated and ids must be unique file-wide.
pub fn load_corpus(path: &Path, kind: Option<DocKind>) -> Result<Corpus, CorpusError> {
    let records: Vec<(usize, DocumentRecord)> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut corpus = Corpus::default();
    for (line, rec) in records {
        if rec.id.is_empty() {
            return Err(CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line,
                message: "empty id".into(),
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId { id: rec.id, line });
        }
        if kind.is_none_or(|k| k == rec.kind) {
            corpus.insert(Document::new(rec.id, rec.kind, rec.fields), line)?;
        }
    }
    Ok(corpus)
}

pub fn write_corpus<'a>(
    path: &Path,
    docs: impl IntoIterator<Item = &'a Document>,
) -> Result<(), CorpusError> {
    let records: Vec<DocumentRecord> = docs
        .into_iter()
        .map(|d| DocumentRecord {
            id: d.id.clone(),
            kind: d.kind,
            fields: d.fields.clone(),
        })
        .collect();
    write_jsonl(path, &records)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub job_id: String,
    pub resume_id: String,
    pub y: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgement {
    Accepted,
    Rejected,
    Unlabeled,
}

impl Judgement {
    pub fn is_positive(self) -> bool {
        self == Judgement::Accepted
    }
}

/// Sparse (job, resume) → y table.
#[derive(Debug, Clone, Default)]
pub struct LabelTable {
    by_job: HashMap<String, HashMap<String, bool>>,
    len: usize,
}

impl LabelTable {
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Result<Self, CorpusError> {
        let mut table = LabelTable::default();
        for (i, label) in labels.into_iter().enumerate() {
            table.insert(label, i + 1, Path::new("<memory>"))?;
        }
        Ok(table)
    }

    fn insert(&mut self, label: Label, line: usize, path: &Path) -> Result<(), CorpusError> {
        if label.y > 1 {
            return Err(CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line,
                message: format!("y must be 0 or 1, got {}", label.y),
            });
        }
        let row = self.by_job.entry(label.job_id.clone()).or_default();
        if row.contains_key(&label.resume_id) {
            return Err(CorpusError::DuplicateLabel {
                job_id: label.job_id,
                resume_id: label.resume_id,
                line,
            });
        }
        row.insert(label.resume_id, label.y == 1);
        self.len += 1;
        Ok(())
    }

    pub fn judgement(&self, job_id: &str, resume_id: &str) -> Judgement {
        match self.by_job.get(job_id).and_then(|row| row.get(resume_id)) {
            Some(true) => Judgement::Accepted,
            Some(false) => Judgement::Rejected,
            None => Judgement::Unlabeled,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All labels sorted by (job, resume) for stable output.
    pub fn to_labels(&self) -> Vec<Label> {
        let mut out: Vec<Label> = self
            .by_job
            .iter()
            .flat_map(|(j, row)| {
                row.iter().map(move |(r, &y)| Label {
                    job_id: j.clone(),
                    resume_id: r.clone(),
                    y: y as u8,
                })
            })
            .collect();
        out.sort_by(|a, b| (&a.job_id, &a.resume_id).cmp(&(&b.job_id, &b.resume_id)));
        out
    }
}

pub fn load_labels(path: &Path) -> Result<LabelTable, CorpusError> {
    let mut table = LabelTable::default();
    for (line, label) in read_jsonl::<Label>(path)? {
        table.insert(label, line, path)?;
    }
    Ok(table)
}

pub fn write_labels<'a>(
    path: &Path,
    labels: impl IntoIterator<Item = &'a Label>,
) -> Result<(), CorpusError> {
    write_jsonl(path, labels)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub job_id: String,
    pub candidates: Vec<String>,
}

/// One job's retrieved candidates in rank order, joined with their labels.
///
/// `labels` only holds candidates that have a label row; everything else is
/// [`Judgement::Unlabeled`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPool {
    pub job_id: String,
    pub candidates: Vec<String>,
    pub labels: BTreeMap<String, Judgement>,
}

impl RankedPool {
    /// Joins a pool record with the label table, enforcing the pool invariants.
    pub fn join(record: PoolRecord, labels: &LabelTable) -> Result<Self, CorpusError> {
        if record.candidates.is_empty() {
            return Err(CorpusError::EmptyPool {
                job_id: record.job_id,
            });
        }
        let mut seen = HashSet::new();
        let mut joined = BTreeMap::new();
        for id in &record.candidates {
            if !seen.insert(id.as_str()) {
                return Err(CorpusError::DuplicateCandidate {
                    job_id: record.job_id.clone(),
                    id: id.clone(),
                });
            }
            match labels.judgement(&record.job_id, id) {
                Judgement::Unlabeled => {}
                j => {
                    joined.insert(id.clone(), j);
                }
            }
        }
        Ok(RankedPool {
            job_id: record.job_id,
            candidates: record.candidates,
            labels: joined,
        })
    }

    pub fn judgement(&self, id: &str) -> Judgement {
        self.labels.get(id).copied().unwrap_or(Judgement::Unlabeled)
    }

    pub fn is_positive(&self, id: &str) -> bool {
        self.judgement(id).is_positive()
    }

    pub fn num_positives(&self) -> usize {
        self.labels.values().filter(|j| j.is_positive()).count()
    }

    /// Binary relevance of `ids` in order.
    pub fn relevance_of(&self, ids: &[String]) -> Vec<u8> {
        ids.iter().map(|id| self.is_positive(id) as u8).collect()
    }

    pub fn to_record(&self) -> PoolRecord {
        PoolRecord {
            job_id: self.job_id.clone(),
            candidates: self.candidates.clone(),
        }
    }
}

/// Loads pools, checking every candidate against the resume corpus and
/// joining labels. Retrieval order is preserved verbatim.
pub fn load_pools(
    path: &Path,
    labels: &LabelTable,
    resumes: &Corpus,
) -> Result<Vec<RankedPool>, CorpusError> {
    let mut seen_jobs = HashSet::new();
    let mut pools = Vec::new();
    for (line, record) in read_jsonl::<PoolRecord>(path)? {
        if !seen_jobs.insert(record.job_id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: record.job_id,
                line,
            });
        }
        if let Some(unknown) = record.candidates.iter().find(|id| !resumes.contains(id)) {
            return Err(CorpusError::UnknownDocument {
                job_id: record.job_id.clone(),
                id: unknown.clone(),
            });
        }
        pools.push(RankedPool::join(record, labels)?);
    }
    Ok(pools)
}

pub fn write_pools<'a>(
    path: &Path,
    pools: impl IntoIterator<Item = &'a PoolRecord>,
) -> Result<(), CorpusError> {
    write_jsonl(path, pools)?;
    Ok(())
}

/// A ranking over candidate ids, most relevant first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub ids: Vec<String>,
}

impl Ordering {
    pub fn new(ids: Vec<String>) -> Self {
        Ordering { ids }
    }

    /// True when `ids` holds exactly the elements of `set`, each once.
    pub fn is_permutation_of(&self, set: &[String]) -> bool {
        if self.ids.len() != set.len() {
            return false;
        }
        let mut a: Vec<&String> = self.ids.iter().collect();
        let mut b: Vec<&String> = set.iter().collect();
        a.sort();
        b.sort();
        a == b
    }
}
