use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use ndarray::Array2;
use rand_distr::{Distribution, Normal};

use super::files::{as_labels, parse_profile, read_doc_values, write_doc_values, ResolvedProfile};
use super::{CliError, Command, EvaluateArgs, FitArgs, GenerateArgs, Metric, Mode, PredictArgs, SimulateArgs, Task};
use crate::classify::{self, Hyperparameters};
use crate::corpus::{
    parse_class_annotations, parse_corpus, parse_real_annotations, write_class_annotations, write_real_annotations,
    ClassAnnotations,
};
use crate::evaluate::{accuracy, emit_report, r_squared, MetricRow};
use crate::exec::Execution;
use crate::fit::{trace_csv, BatchConfig, EngineConfig, InnerConfig, SviConfig};
use crate::persist::{load_model, save_model, Model};
use crate::regress;
use crate::rng::stream;
use crate::simulate::{
    generate_synthetic_corpus, simulate_confusion_annotators, simulate_gaussian_annotators, Response, SyntheticConfig,
};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit(a) => with_threads(a.threads.threads, |exec| fit(&a, exec)),
        Command::Predict(a) => with_threads(a.threads.threads, |exec| predict(&a, exec)),
        Command::Simulate(a) => simulate(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Generate(a) => generate(&a),
    }
}

/// Runs `f` on a pool of the requested size; one thread means sequential.
fn with_threads<F>(threads: Option<usize>, f: F) -> Result<(), CliError>
where
    F: FnOnce(Execution) -> Result<(), CliError> + Send,
{
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => f(Execution::Sequential),
        None => f(Execution::Parallel),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| f(Execution::Parallel))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => f(Execution::Sequential),
    }
}

fn class_annotations(path: &Path, classes: Option<usize>, num_docs: usize) -> crate::Result<ClassAnnotations> {
    if let Some(c) = classes {
        return parse_class_annotations(path, c, num_docs);
    }
    let wide = parse_class_annotations(path, usize::MAX, num_docs)?;
    let c = wide.records().iter().map(|a| a.value + 1).max().unwrap_or(2).max(2);
    ClassAnnotations::new(c, (*wide).clone())
}

fn fit(a: &FitArgs, exec: Execution) -> Result<(), CliError> {
    if a.topics == 0 {
        return Err(CliError::Usage("--topics must be positive".into()));
    }
    if !(a.sigma2 > 0.0 && a.sigma2.is_finite()) {
        return Err(CliError::Usage("--sigma2 must be positive".into()));
    }
    let hyper = Hyperparameters {
        alpha: a.alpha,
        tau: a.tau,
        omega: a.omega,
    };
    hyper.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let engine = EngineConfig {
        exec,
        ..Default::default()
    };
    let batch = BatchConfig {
        max_iter: a.max_iter,
        tol: a.tol,
        seed: a.seed,
        engine,
    };
    let svi = SviConfig {
        kappa: a.kappa,
        delay: a.delay,
        batch_size: a.batch_size,
        max_epochs: a.max_iter,
        tol: a.tol,
        seed: a.seed,
        engine,
    };
    if a.mode == Mode::Svi {
        svi.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let corpus = parse_corpus(&a.corpus, &a.vocab)?;
    let (model, trace) = match a.task {
        Task::Classify => {
            let ann = class_annotations(&a.annotations, a.classes, corpus.len())?;
            let fit = match a.mode {
                Mode::Batch => classify::fit_batch(&corpus, &ann, a.topics, hyper, &batch)?,
                Mode::Svi => classify::fit_svi(&corpus, &ann, a.topics, hyper, &svi)?,
            };
            (Model::Classify(fit.model), fit.trace)
        }
        Task::Regress => {
            let ann = parse_real_annotations(&a.annotations, corpus.len())?;
            let form = a.update_form.into();
            let fit = match a.mode {
                Mode::Batch => regress::fit_batch_r(&corpus, &ann, a.topics, hyper, a.sigma2, &batch, form)?,
                Mode::Svi => regress::fit_svi_r(&corpus, &ann, a.topics, hyper, a.sigma2, &svi, form)?,
            };
            (Model::Regress(fit.model), fit.trace)
        }
    };
    save_model(&model, &a.out)?;
    if let Some(path) = &a.trace {
        std::fs::write(path, trace_csv(&trace)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn predict(a: &PredictArgs, exec: Execution) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let corpus = parse_corpus(&a.corpus, &a.vocab)?;
    if corpus.vocab_size() != model.vocab_size() {
        return Err(CliError::Runtime(anyhow!(
            "vocabulary has {} terms but the model was fit with {}",
            corpus.vocab_size(),
            model.vocab_size()
        )));
    }
    let inner = InnerConfig::default();
    let mut out = String::from("doc_id,prediction");
    match &model {
        Model::Classify(m) => {
            for c in 0..m.num_classes() {
                let _ = write!(out, ",score_{c}");
            }
            out.push('\n');
            for (d, (label, scores)) in classify::predict_classes(&corpus, m, &inner, exec)?.iter().enumerate() {
                let _ = write!(out, "{d},{label}");
                for s in scores {
                    let _ = write!(out, ",{s:?}");
                }
                out.push('\n');
            }
        }
        Model::Regress(m) => {
            out.push('\n');
            for (d, x) in regress::predict_targets(&corpus, m, &inner, exec)?.iter().enumerate() {
                let _ = writeln!(out, "{d},{x:?}");
            }
        }
    }
    std::fs::write(&a.out, out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.profile).with_context(|| format!("reading {}", a.profile.display()))?;
    let profile = parse_profile(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.profile.display())))?;
    let truth = read_doc_values(&a.truth)?;
    match profile {
        ResolvedProfile::Confusion(specs, assignment) => {
            let labels = as_labels(&truth, &a.truth)?;
            let ann = simulate_confusion_annotators(&labels, &specs, assignment, a.seed)?;
            write_class_annotations(&a.out, &ann)?;
        }
        ResolvedProfile::Gaussian(specs, assignment) => {
            let ann = simulate_gaussian_annotators(&truth, &specs, assignment, a.seed)?;
            write_real_annotations(&a.out, &ann)?;
        }
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let preds = read_doc_values(&a.preds)?;
    let truth = read_doc_values(&a.truth)?;
    if preds.len() != truth.len() {
        return Err(CliError::Runtime(anyhow!(
            "{} predictions for {} true values",
            preds.len(),
            truth.len()
        )));
    }
    let (name, value) = match a.metric {
        Metric::Accuracy => (
            "accuracy",
            accuracy(&as_labels(&preds, &a.preds)?, &as_labels(&truth, &a.truth)?)?,
        ),
        Metric::R2 => ("r2", r_squared(&preds, &truth)?),
    };
    let row = MetricRow {
        run: a.run.clone(),
        seed: a.seed,
        k: a.topics,
        metric: name.into(),
        value,
    };
    emit_report(&[row], &a.out)?;
    Ok(())
}

fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    if !(a.eta_scale >= 0.0 && a.eta_scale.is_finite()) {
        return Err(CliError::Usage("--eta-scale must be non-negative".into()));
    }
    let cfg = SyntheticConfig {
        num_topics: a.topics,
        vocab_size: a.vocab_size,
        num_docs: a.docs,
        doc_length: a.doc_length,
        alpha: a.alpha,
        topic_concentration: a.topic_concentration,
    };
    let mut rng = stream(a.seed, "synthetic-eta");
    let normal = Normal::new(0.0, a.eta_scale).context("η scale")?;
    let response = match a.task {
        Task::Classify => {
            if a.classes < 2 {
                return Err(CliError::Usage("--classes must be at least 2".into()));
            }
            Response::Classes {
                eta: Array2::from_shape_fn((a.classes, a.topics), |_| normal.sample(&mut rng)),
            }
        }
        Task::Regress => Response::Target {
            eta: (0..a.topics).map(|_| normal.sample(&mut rng)).collect(),
            sigma2: a.sigma2,
        },
    };
    let syn = generate_synthetic_corpus(&cfg, &response, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let write = |name: &str, text: String| -> anyhow::Result<()> {
        let p = a.out_dir.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    write("corpus.txt", syn.corpus.to_text())?;
    write("vocab.txt", syn.corpus.vocabulary().to_text())?;
    let truth = a.out_dir.join("truth.csv");
    match a.task {
        Task::Classify => write_doc_values(&truth, "truth", &syn.labels)?,
        Task::Regress => {
            let shown: Vec<String> = syn.targets.iter().map(|x| format!("{x:?}")).collect();
            write_doc_values(&truth, "truth", &shown)?
        }
    }
    Ok(())
}
