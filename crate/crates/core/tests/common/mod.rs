#![allow(dead_code)]

use maslda::classify::{ClassDocState, ClassGlobals};
use maslda::corpus::Document;
use maslda::regress::{RegDocState, RegGlobals, UpdateForm};
use maslda::rng::stream;
use ndarray::{Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64, name: &str) -> ChaCha8Rng {
    stream(seed, name)
}

pub fn simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| -(rng.random::<f64>().max(1e-12)).ln()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn log_simplex_rows(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    let mut out = Array2::zeros((rows, cols));
    for r in 0..rows {
        for (c, p) in simplex(rng, cols).into_iter().enumerate() {
            out[[r, c]] = p.ln();
        }
    }
    out
}

/// A tiny single-document instance with point-valued globals.
pub struct TinyInstance {
    pub doc: Document,
    pub k: usize,
    pub vocab: usize,
    pub alpha: f64,
    pub log_beta: Array2<f64>,
}

pub fn tiny_instance(rng: &mut impl Rng) -> TinyInstance {
    let k = rng.random_range(1..=3);
    let vocab = 4;
    let n = rng.random_range(1..=5);
    let tokens: Vec<u32> = (0..n).map(|_| rng.random_range(0..vocab as u32)).collect();
    TinyInstance {
        doc: Document::from_tokens(&tokens).unwrap(),
        k,
        vocab,
        alpha: rng.random_range(0.1..2.0),
        log_beta: log_simplex_rows(rng, k, vocab),
    }
}

pub fn uniform_class_state(n: usize, k: usize, c: usize, alpha: f64) -> ClassDocState {
    ClassDocState {
        gamma: vec![alpha + n as f64 / k as f64; k],
        phi: Array2::from_elem((n, k), 1.0 / k as f64),
        lambda: vec![1.0 / c as f64; c],
    }
}

pub struct TinyClass {
    pub base: TinyInstance,
    pub labels: Vec<(usize, usize)>,
    pub log_pi: Array3<f64>,
    pub eta: Array2<f64>,
}

impl TinyClass {
    pub fn globals(&self) -> ClassGlobals {
        ClassGlobals::from_point(self.base.log_beta.clone(), self.log_pi.clone(), self.eta.clone(), self.base.alpha)
    }
}

/// C = 2, R = 2; each annotator labels with probability 3/4.
pub fn tiny_class(rng: &mut impl Rng) -> TinyClass {
    let base = tiny_instance(rng);
    let (c, r) = (2, 2);
    let mut log_pi = Array3::zeros((r, c, c));
    for a in 0..r {
        for cls in 0..c {
            for (l, p) in simplex(rng, c).into_iter().enumerate() {
                log_pi[[a, cls, l]] = p.ln();
            }
        }
    }
    let mut labels = Vec::new();
    for a in 0..r {
        if rng.random::<f64>() < 0.75 {
            labels.push((a, rng.random_range(0..c)));
        }
    }
    let eta = Array2::from_shape_fn((c, base.k), |_| rng.random_range(-4.0..4.0));
    TinyClass { base, labels, log_pi, eta }
}

pub struct TinyReg {
    pub base: TinyInstance,
    pub answers: Vec<(usize, f64)>,
    pub eta: Vec<f64>,
    pub sigma2: f64,
    pub bias: Vec<f64>,
    pub precision: Vec<f64>,
}

impl TinyReg {
    pub fn globals(&self) -> RegGlobals {
        RegGlobals {
            elog_beta: self.base.log_beta.clone(),
            eta: self.eta.clone(),
            bias: self.bias.clone(),
            precision: self.precision.clone(),
            sigma2: self.sigma2,
            alpha: self.base.alpha,
            form: UpdateForm::Derived,
        }
    }

    pub fn initial_state(&self) -> RegDocState {
        let (n, k) = (self.base.doc.len(), self.base.k);
        RegDocState {
            gamma: vec![self.base.alpha + n as f64 / k as f64; k],
            phi: Array2::from_elem((n, k), 1.0 / k as f64),
            m: 0.0,
            v: self.sigma2,
        }
    }
}

pub fn tiny_reg(rng: &mut impl Rng) -> TinyReg {
    let base = tiny_instance(rng);
    let r = 2;
    let mut answers = Vec::new();
    for a in 0..r {
        if rng.random::<f64>() < 0.75 {
            answers.push((a, rng.random_range(-3.0..3.0)));
        }
    }
    TinyReg {
        eta: (0..base.k).map(|_| rng.random_range(-3.0..3.0)).collect(),
        sigma2: rng.random_range(0.2..2.0),
        bias: (0..r).map(|_| rng.random_range(-1.0..1.0)).collect(),
        precision: (0..r).map(|_| rng.random_range(0.2..5.0)).collect(),
        answers,
        base,
    }
}
