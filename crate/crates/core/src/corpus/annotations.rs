use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Deref;
use std::path::Path;

use crate::error::{Error, Result};

/// One answer `value` given by `annotator` for document `doc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation<T> {
    pub doc: usize,
    pub annotator: usize,
    pub value: T,
}

/// Answers from many annotators, indexed both by document (R_d) and by
/// annotator (D_r). Annotator indices are dense; the external ids they came
/// from are kept in [`Annotations::external_ids`].
#[derive(Debug, Clone, PartialEq)]
pub struct Annotations<T> {
    num_docs: usize,
    external_ids: Vec<u64>,
    records: Vec<Annotation<T>>,
    by_doc: Vec<Vec<(usize, T)>>,
    by_annotator: Vec<Vec<(usize, T)>>,
}

impl<T: Copy> Annotations<T> {
    /// Builds the index from dense annotator ids in `0..num_annotators`.
    pub fn new(num_docs: usize, num_annotators: usize, records: Vec<Annotation<T>>) -> Result<Self> {
        Self::with_ids(num_docs, (0..num_annotators as u64).collect(), records)
    }

    fn with_ids(num_docs: usize, external_ids: Vec<u64>, mut records: Vec<Annotation<T>>) -> Result<Self> {
        let num_annotators = external_ids.len();
        if num_annotators == 0 {
            return Err(Error::invalid("no annotators"));
        }
        records.sort_by_key(|a| (a.doc, a.annotator));
        let mut by_doc = vec![Vec::new(); num_docs];
        let mut by_annotator = vec![Vec::new(); num_annotators];
        for (i, a) in records.iter().enumerate() {
            if a.doc >= num_docs {
                return Err(Error::invalid(format!(
                    "document id {} out of range (D={num_docs})",
                    a.doc
                )));
            }
            if a.annotator >= num_annotators {
                return Err(Error::invalid(format!(
                    "annotator id {} out of range (R={num_annotators})",
                    a.annotator
                )));
            }
            if i > 0 && records[i - 1].doc == a.doc && records[i - 1].annotator == a.annotator {
                return Err(Error::invalid(format!(
                    "duplicate annotation for document {} by annotator {}",
                    a.doc, external_ids[a.annotator]
                )));
            }
            by_doc[a.doc].push((a.annotator, a.value));
            by_annotator[a.annotator].push((a.doc, a.value));
        }
        Ok(Self {
            num_docs,
            external_ids,
            records,
            by_doc,
            by_annotator,
        })
    }

    /// Builds the index from arbitrary annotator ids, remapped densely in
    /// increasing id order.
    pub fn from_external(num_docs: usize, rows: &[(usize, u64, T)]) -> Result<Self> {
        let mut ids: Vec<u64> = rows.iter().map(|r| r.1).collect();
        ids.sort_unstable();
        ids.dedup();
        let dense: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let records = rows
            .iter()
            .map(|&(doc, id, value)| Annotation {
                doc,
                annotator: dense[&id],
                value,
            })
            .collect();
        Self::with_ids(num_docs, ids, records)
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn num_annotators(&self) -> usize {
        self.external_ids.len()
    }

    pub fn records(&self) -> &[Annotation<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(annotator, value)` pairs for document `d`.
    pub fn doc(&self, d: usize) -> &[(usize, T)] {
        &self.by_doc[d]
    }

    /// `(doc, value)` pairs given by annotator `r`.
    pub fn annotator(&self, r: usize) -> &[(usize, T)] {
        &self.by_annotator[r]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    /// First document without any answer, if any.
    pub fn first_unlabeled(&self) -> Option<usize> {
        self.by_doc.iter().position(Vec::is_empty)
    }

    /// Keeps only the listed documents, renumbered by their position in
    /// `ids`; the annotator index is unchanged.
    pub fn restrict(&self, ids: &[usize]) -> Result<Self> {
        let mut records = Vec::new();
        for (new, &old) in ids.iter().enumerate() {
            let answers = self
                .by_doc
                .get(old)
                .ok_or_else(|| Error::invalid(format!("document {old} out of range")))?;
            records.extend(answers.iter().map(|&(annotator, value)| Annotation {
                doc: new,
                annotator,
                value,
            }));
        }
        Self::with_ids(ids.len(), self.external_ids.clone(), records)
    }
}

/// Class labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAnnotations {
    num_classes: usize,
    labels: Annotations<usize>,
}

impl ClassAnnotations {
    pub fn new(num_classes: usize, labels: Annotations<usize>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {num_classes}")));
        }
        if let Some(a) = labels.records().iter().find(|a| a.value >= num_classes) {
            return Err(Error::invalid(format!(
                "label {} out of range (C={num_classes}) for document {}",
                a.value, a.doc
            )));
        }
        Ok(Self { num_classes, labels })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn restrict(&self, ids: &[usize]) -> Result<Self> {
        Ok(Self {
            num_classes: self.num_classes,
            labels: self.labels.restrict(ids)?,
        })
    }

    /// Same labels seen as coming from one pseudo-annotator per document's
    /// majority vote.
    pub fn collapse_majority(&self) -> Result<Self> {
        let votes = majority_vote(self)?;
        let records = votes
            .into_iter()
            .enumerate()
            .map(|(doc, value)| Annotation {
                doc,
                annotator: 0,
                value,
            })
            .collect();
        Self::new(self.num_classes, Annotations::new(self.num_docs(), 1, records)?)
    }
}

impl Deref for ClassAnnotations {
    type Target = Annotations<usize>;

    fn deref(&self) -> &Self::Target {
        &self.labels
    }
}

/// Real-valued answers.
pub type RealAnnotations = Annotations<f64>;

impl RealAnnotations {
    /// Mean answer per document as a single pseudo-annotator.
    pub fn collapse_mean(&self) -> Result<Self> {
        let means = mean_answer(self)?;
        let records = means
            .into_iter()
            .enumerate()
            .map(|(doc, value)| Annotation {
                doc,
                annotator: 0,
                value,
            })
            .collect();
        Annotations::new(self.num_docs(), 1, records)
    }
}

fn read_rows<T>(
    path: &Path,
    num_docs: usize,
    parse_value: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Vec<(usize, u64, T)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |message: String| Error::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(fail(format!("expected 3 fields, found {}", record.len())));
        }
        let doc: usize = record[0]
            .parse()
            .map_err(|_| fail(format!("bad document id {:?}", &record[0])))?;
        if doc >= num_docs {
            return Err(fail(format!("document id {doc} out of range (D={num_docs})")));
        }
        let annotator: u64 = record[1]
            .parse()
            .map_err(|_| fail(format!("bad annotator id {:?}", &record[1])))?;
        let value = parse_value(&record[2]).map_err(fail)?;
        rows.push((doc, annotator, value));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 0,
            message: "no annotations".into(),
        });
    }
    Ok(rows)
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Invalid(message) => Error::Parse {
            path: path.to_owned(),
            line: 0,
            message,
        },
        other => other,
    })
}

/// Reads `doc_id,annotator_id,label` rows.
pub fn parse_class_annotations(path: &Path, num_classes: usize, num_docs: usize) -> Result<ClassAnnotations> {
    let rows = read_rows(path, num_docs, |s| {
        let label: usize = s.parse().map_err(|_| format!("bad label {s:?}"))?;
        if label >= num_classes {
            return Err(format!("label {label} out of range (C={num_classes})"));
        }
        Ok(label)
    })?;
    with_path(
        path,
        Annotations::from_external(num_docs, &rows).and_then(|a| ClassAnnotations::new(num_classes, a)),
    )
}

/// Reads `doc_id,annotator_id,value` rows; non-finite values are rejected.
pub fn parse_real_annotations(path: &Path, num_docs: usize) -> Result<RealAnnotations> {
    let rows = read_rows(path, num_docs, |s| {
        let v: f64 = s.parse().map_err(|_| format!("bad value {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value {s:?}"))
        }
    })?;
    with_path(path, Annotations::from_external(num_docs, &rows))
}

fn write_rows<T: Copy>(path: &Path, ann: &Annotations<T>, fmt: impl Fn(T) -> String) -> Result<()> {
    let mut out = String::new();
    for a in ann.records() {
        out.push_str(&format!("{},{},{}\n", a.doc, ann.external_ids[a.annotator], fmt(a.value)));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_class_annotations(path: &Path, ann: &ClassAnnotations) -> Result<()> {
    write_rows(path, ann, |v| v.to_string())
}

pub fn write_real_annotations(path: &Path, ann: &RealAnnotations) -> Result<()> {
    write_rows(path, ann, |v| format!("{v:?}"))
}

/// Modal label per document; ties go to the lowest class index.
pub fn majority_vote(ann: &ClassAnnotations) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; ann.num_classes()];
    (0..ann.num_docs())
        .map(|d| {
            let labels = ann.doc(d);
            if labels.is_empty() {
                return Err(Error::invalid(format!("document {d} has no labels")));
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for &(_, l) in labels {
                counts[l] += 1;
            }
            let mut best = 0;
            for (c, &n) in counts.iter().enumerate() {
                if n > counts[best] {
                    best = c;
                }
            }
            Ok(best)
        })
        .collect()
}

/// Arithmetic mean answer per document.
pub fn mean_answer(ann: &RealAnnotations) -> Result<Vec<f64>> {
    (0..ann.num_docs())
        .map(|d| {
            let answers = ann.doc(d);
            if answers.is_empty() {
                return Err(Error::invalid(format!("document {d} has no answers")));
            }
            Ok(answers.iter().map(|a| a.1).sum::<f64>() / answers.len() as f64)
        })
        .collect()
}
