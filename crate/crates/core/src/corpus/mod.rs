//! Bag-of-words corpora, multi-annotator label files and their aggregation.

mod annotations;
mod bow;
mod split;

pub use annotations::{
    majority_vote, mean_answer, parse_class_annotations, parse_real_annotations,
    write_class_annotations, write_real_annotations, Annotation, Annotations, ClassAnnotations,
    RealAnnotations,
};
pub use bow::{parse_corpus, parse_corpus_str, parse_vocabulary, Corpus, Document, Vocabulary};
pub use split::{train_test_split, Split};
