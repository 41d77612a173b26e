use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("vocabulary is empty"));
        }
        let mut seen = HashSet::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if !seen.insert(t.as_str()) {
                return Err(Error::invalid(format!("duplicate vocabulary term {t:?} at id {i}")));
            }
        }
        Ok(Self { terms })
    }

    /// Placeholder terms `w0, w1, ...` for generated corpora.
    pub fn synthetic(size: usize) -> Self {
        Self {
            terms: (0..size.max(1)).map(|i| format!("w{i}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(t);
            out.push('\n');
        }
        out
    }
}

/// Sparse term counts of one document, term ids strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    entries: Vec<(u32, u32)>,
    length: usize,
}

impl Document {
    /// Builds a document from `(term, count)` pairs in any order.
    pub fn new(mut entries: Vec<(u32, u32)>) -> Result<Self> {
        entries.sort_unstable_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("term id {} repeated", w[0].0)));
            }
        }
        if let Some(&(t, _)) = entries.iter().find(|e| e.1 == 0) {
            return Err(Error::invalid(format!("term id {t} has zero count")));
        }
        let length = entries.iter().map(|e| e.1 as usize).sum();
        if length == 0 {
            return Err(Error::invalid("document has no tokens"));
        }
        Ok(Self { entries, length })
    }

    /// Document with one token per entry of `terms`.
    pub fn from_tokens(terms: &[u32]) -> Result<Self> {
        let mut counts = std::collections::BTreeMap::new();
        for &t in terms {
            *counts.entry(t).or_insert(0u32) += 1;
        }
        Self::new(counts.into_iter().collect())
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// N_d, the total token count.
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Term id of every token occurrence, grouped by term.
    pub fn tokens(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .flat_map(|&(t, c)| std::iter::repeat_n(t as usize, c as usize))
    }

    pub fn max_term(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0 as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: Vocabulary,
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(vocabulary: Vocabulary, documents: Vec<Document>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::invalid("corpus has no documents"));
        }
        let v = vocabulary.len();
        for (d, doc) in documents.iter().enumerate() {
            if doc.max_term() >= v {
                return Err(Error::invalid(format!(
                    "document {d}: term id {} out of range (V={v})",
                    doc.max_term()
                )));
            }
        }
        Ok(Self {
            vocabulary,
            documents,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    /// Sub-corpus of the given documents, in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let docs = ids
            .iter()
            .map(|&i| {
                self.documents
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("document {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.vocabulary.clone(), docs)
    }

    /// Corpus file text: `M id:count ...` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            let _ = write!(out, "{}", doc.entries.len());
            for &(t, c) in &doc.entries {
                let _ = write!(out, " {t}:{c}");
            }
            out.push('\n');
        }
        out
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = read(path)?;
    let terms: Vec<String> = text.lines().map(|l| l.trim_end_matches('\r').to_owned()).collect();
    Vocabulary::new(terms).map_err(|e| match e {
        Error::Invalid(message) => Error::Parse {
            path: path.to_owned(),
            line: 0,
            message,
        },
        other => other,
    })
}

pub fn parse_corpus(doc_path: &Path, vocab_path: &Path) -> Result<Corpus> {
    let vocabulary = parse_vocabulary(vocab_path)?;
    let text = read(doc_path)?;
    parse_corpus_str(&text, vocabulary).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: doc_path.to_owned(),
            line,
            message,
        },
        other => other,
    })
}

/// Parses corpus text against `vocabulary`. Blank lines are skipped; line
/// numbers in errors are 1-based.
pub fn parse_corpus_str(text: &str, vocabulary: Vocabulary) -> Result<Corpus> {
    let v = vocabulary.len();
    let mut documents = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fail = |message: String| Error::Parse {
            path: Default::default(),
            line: line_no,
            message,
        };
        let mut fields = line.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let declared: usize = first
            .parse()
            .map_err(|_| fail(format!("bad term count {first:?}")))?;
        let mut entries = Vec::with_capacity(declared);
        for field in fields {
            let (t, c) = field
                .split_once(':')
                .ok_or_else(|| fail(format!("expected id:count, found {field:?}")))?;
            let t: u32 = t.parse().map_err(|_| fail(format!("bad term id {t:?}")))?;
            let c: u32 = c.parse().map_err(|_| fail(format!("bad count {c:?}")))?;
            if t as usize >= v {
                return Err(fail(format!("term id out of range: {t} (V={v})")));
            }
            entries.push((t, c));
        }
        if entries.len() != declared {
            return Err(fail(format!(
                "declared {declared} distinct terms, found {}",
                entries.len()
            )));
        }
        if entries.is_empty() {
            return Err(fail(format!("empty document (index {})", documents.len())));
        }
        let doc = Document::new(entries).map_err(|e| fail(e.to_string()))?;
        documents.push(doc);
    }
    Corpus::new(vocabulary, documents)
}
