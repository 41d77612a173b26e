use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Document partition into train and test ids, each in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn select<T: Clone>(ids: &[usize], values: &[T]) -> Vec<T> {
        ids.iter().map(|&i| values[i].clone()).collect()
    }
}

/// Random partition of `0..num_docs` with round(`fraction`·D) training
/// documents, fixed by `seed`. Subset corpora and annotations with
/// [`crate::corpus::Corpus::subset`] and `restrict`.
pub fn train_test_split(num_docs: usize, fraction: f64, seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {fraction} outside (0, 1)")));
    }
    let mut ids: Vec<usize> = (0..num_docs).collect();
    ids.shuffle(&mut rng::stream(seed, "split"));
    let n_train = ((num_docs as f64) * fraction).round() as usize;
    let mut train = ids[..n_train].to_vec();
    let mut test = ids[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
