//! End-to-end orchestration: data acquisition, SMOTE balancing, the two
//! deterministic splits, training, and evaluation, with every stage seeded
//! from one master seed (see [`crate::seeds`]).

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::imgdata::{
    generate_synthetic_dataset, load_directory_dataset, split_train_test, split_train_val,
    LabeledSet, LoadOptions,
};
use crate::metrics::{class_report, ClassReport};
use crate::nn::{evaluate, fit, Model, TrainConfig, TrainHistory};
use crate::seeds::derive_seed;
use crate::smote::{flatten_images, restore_tensor4d, smote_oversample, BalancePlan, DEFAULT_K_NEIGHBORS};

/// Held-out fraction of the train/test split.
pub const TEST_FRACTION: f64 = 0.2;
/// Held-out fraction of the train/validation split.
pub const VAL_FRACTION: f64 = 0.1;

/// Where the pipeline's images come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Per-class counts for the synthetic generator.
    Synthetic([usize; 4]),
    /// Class-directory tree on disk.
    Directory { root: PathBuf, bgr_input: bool },
}

/// When SMOTE runs relative to the train/test split.
///
/// `Faithful` balances the full dataset first and splits afterwards, which
/// leaks synthetic kin of test samples into training; `NoLeak` splits first
/// and balances only the training partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoteMode {
    #[default]
    Faithful,
    NoLeak,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub source: DataSource,
    pub seed: u64,
    pub smote_mode: SmoteMode,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl PipelineConfig {
    pub fn new(source: DataSource) -> Self {
        let train = TrainConfig::default();
        Self {
            source,
            seed: 42,
            smote_mode: SmoteMode::default(),
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
        }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed: derive_seed(self.seed, "train"),
            ..TrainConfig::default()
        }
    }
}

/// The balanced, split data every downstream stage consumes.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: LabeledSet,
    pub val: LabeledSet,
    pub test: LabeledSet,
    pub counts_before: [usize; 4],
    pub counts_after: [usize; 4],
    pub warnings: Vec<String>,
}

/// A finished training run.
#[derive(Debug)]
pub struct PipelineRun {
    pub model: Model,
    pub history: TrainHistory,
    pub data: PreparedData,
}

/// Evaluation artifacts for a model on the prepared test partition.
#[derive(Debug)]
pub struct Evaluation {
    pub report: ClassReport,
    pub test_loss: f32,
    pub test_acc: f32,
}

/// Materializes the configured data source: generates the synthetic set
/// (from the derived "synth" sub-seed) or loads the directory tree.
pub fn acquire_dataset(source: &DataSource, seed: u64) -> Result<(LabeledSet, Vec<String>)> {
    match source {
        DataSource::Synthetic(counts) => {
            let set = generate_synthetic_dataset(*counts, derive_seed(seed, "synth"))?;
            Ok((set, Vec::new()))
        }
        DataSource::Directory { root, bgr_input } => {
            let opts = LoadOptions {
                policy: crate::imgdata::DecodePolicy::Skip,
                bgr_input: *bgr_input,
            };
            let outcome = load_directory_dataset(root, &opts)?;
            let warnings = outcome
                .skipped
                .into_iter()
                .map(|(path, reason)| format!("skipped {}: {reason}", path.display()))
                .collect();
            Ok((outcome.set, warnings))
        }
    }
}

fn balance(set: &LabeledSet, seed: u64, warnings: &mut Vec<String>) -> Result<LabeledSet> {
    let features = flatten_images(set);
    let plan = BalancePlan::to_majority(features.class_counts(), DEFAULT_K_NEIGHBORS)?;
    let outcome = smote_oversample(&features, &plan, derive_seed(seed, "smote"))?;
    warnings.extend(outcome.warnings.iter().cloned());
    restore_tensor4d(&outcome.features)
}

/// Runs acquisition, balancing, and both splits per the configured order.
pub fn prepare_data(cfg: &PipelineConfig) -> Result<PreparedData> {
    let (raw, mut warnings) = acquire_dataset(&cfg.source, cfg.seed)?;
    let counts_before = raw.class_counts();

    let test_seed = derive_seed(cfg.seed, "split-test");
    let val_seed = derive_seed(cfg.seed, "split-val");

    let (train_pool, test, counts_after) = match cfg.smote_mode {
        SmoteMode::Faithful => {
            let balanced = balance(&raw, cfg.seed, &mut warnings)?;
            let counts_after = balanced.class_counts();
            let split = split_train_test(&balanced, TEST_FRACTION, test_seed)?;
            (split.train, split.held_out, counts_after)
        }
        SmoteMode::NoLeak => {
            let split = split_train_test(&raw, TEST_FRACTION, test_seed)?;
            let balanced = balance(&split.train, cfg.seed, &mut warnings)?;
            let counts_after = balanced.class_counts();
            (balanced, split.held_out, counts_after)
        }
    };

    let val_split = split_train_val(&train_pool, VAL_FRACTION, val_seed)?;
    Ok(PreparedData {
        train: val_split.train,
        val: val_split.held_out,
        test,
        counts_before,
        counts_after,
        warnings,
    })
}

/// Full training pipeline: prepare data, build the model from the derived
/// init seed, and fit.
pub fn run_training(cfg: &PipelineConfig) -> Result<PipelineRun> {
    let data = prepare_data(cfg)?;
    let mut model = crate::nn::build_paper_model(derive_seed(cfg.seed, "model-init"));
    let history = fit(&mut model, &data.train, &data.val, &cfg.train_config())?;
    Ok(PipelineRun { model, history, data })
}

/// Scores a model on the prepared test partition.
pub fn evaluate_on_test(model: &Model, data: &PreparedData) -> Result<Evaluation> {
    let probs = model.predict_proba(&data.test.images)?;
    let report = class_report(&probs, &data.test.labels)?;
    let (test_loss, test_acc) = evaluate(model, &data.test)?;
    Ok(Evaluation { report, test_loss, test_acc })
}

/// Renders the balance report line, e.g. `3709/5077/1377/2283 -> 5077 each
/// (total 20308)`.
pub fn balance_summary(before: [usize; 4], after: [usize; 4]) -> String {
    let target = after.iter().max().copied().unwrap_or(0);
    let uniform = after.iter().all(|&c| c == target);
    let after_text = if uniform {
        format!("{target} each")
    } else {
        format!("{}/{}/{}/{}", after[0], after[1], after[2], after[3])
    };
    format!(
        "{}/{}/{}/{} -> {after_text} (total {})",
        before[0],
        before[1],
        before[2],
        before[3],
        after.iter().sum::<usize>()
    )
}

/// Checks a data source selection for basic sanity before running.
pub fn validate_source(dataset: &Option<PathBuf>, synthetic: &Option<[usize; 4]>) -> Result<DataSource> {
    match (dataset, synthetic) {
        (Some(_), Some(_)) => Err(Error::Config(
            "choose exactly one of --dataset and --synthetic".into(),
        )),
        (None, None) => Err(Error::Config(
            "a data source is required: --dataset DIR or --synthetic a,b,c,d".into(),
        )),
        (Some(root), None) => Ok(DataSource::Directory { root: root.clone(), bgr_input: false }),
        (None, Some(counts)) => Ok(DataSource::Synthetic(*counts)),
    }
}
