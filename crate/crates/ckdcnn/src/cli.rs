//! Command-line surface: `synth`, `balance`, `train`, `eval`, and
//! `explain` subcommands over the library pipeline.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::error::{Error, Result};
use crate::gradcam::{colorize_overlay, gradcam_map, overlay_file_name, upsample_bilinear};
use crate::imgdata::{
    bgr_to_rgb, decode_image, encode_label, image_from_unit_tensor, normalize_to_unit,
    resize_bilinear_28, write_dataset_layout, CLASS_NAMES,
};
use crate::metrics::{pr_curve_ovr, roc_curve_ovr, confusion_matrix};
use crate::pipeline::{
    acquire_dataset, balance_summary, evaluate_on_test, prepare_data, run_training,
    validate_source, DataSource, PipelineConfig, SmoteMode,
};
use crate::seeds::derive_seed;
use crate::smote::{flatten_images, smote_oversample, BalancePlan, DEFAULT_K_NEIGHBORS};

/// Comma-separated per-class counts, e.g. `100,60,30,40`.
#[derive(Debug, Clone, Copy)]
struct Counts([usize; 4]);

impl FromStr for Counts {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 comma-separated counts, got {}", parts.len()));
        }
        let mut counts = [0usize; 4];
        for (slot, part) in counts.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|e| format!("bad count {part:?}: {e}"))?;
        }
        Ok(Counts(counts))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoteModeArg {
    /// Balance the FULL dataset before the train/test split (the default).
    /// Synthetic neighbors of test samples leak into training; scores on
    /// the test split are optimistic.
    Faithful,
    /// Split first, then balance only the training partition. No synthetic
    /// kinship crosses the train/test boundary.
    NoLeak,
}

impl From<SmoteModeArg> for SmoteMode {
    fn from(arg: SmoteModeArg) -> Self {
        match arg {
            SmoteModeArg::Faithful => SmoteMode::Faithful,
            SmoteModeArg::NoLeak => SmoteMode::NoLeak,
        }
    }
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Dataset root with one subdirectory per class (Cyst, Normal, Stone,
    /// Tumor) holding PNG/JPEG files.
    #[arg(long, value_name = "DIR", conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,

    /// Generate a synthetic dataset with these per-class counts instead of
    /// reading from disk.
    #[arg(long, value_name = "A,B,C,D")]
    synthetic: Option<Counts>,

    /// Treat input image bytes as BGR-ordered and swap to RGB after decode.
    #[arg(long)]
    bgr_input: bool,
}

impl SourceArgs {
    fn resolve(&self) -> Result<DataSource> {
        let counts = self.synthetic.map(|c| c.0);
        let mut source = validate_source(&self.dataset, &counts)?;
        if let DataSource::Directory { bgr_input, .. } = &mut source {
            *bgr_input = self.bgr_input;
        }
        Ok(source)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ckdcnn",
    version,
    about = "CT kidney image classifier: SMOTE balancing, CNN training, \
             evaluation reports, and Grad-CAM explanations",
    after_help = "All randomness derives from --seed, so repeating a command \
                  with identical flags reproduces its outputs exactly."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset to disk in the class-directory layout.
    Synth {
        /// Per-class image counts.
        #[arg(long, value_name = "A,B,C,D")]
        synthetic: Counts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output dataset root.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Report SMOTE class balancing: before/after counts for a dataset.
    Balance {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },

    /// Run the full pipeline (balance, split, train) and write the model
    /// checkpoint plus per-epoch history.
    Train {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        /// Mini-batch size.
        #[arg(long, default_value_t = 42)]
        batch: usize,
        /// Adam learning rate.
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        /// When SMOTE runs relative to the train/test split. DEFAULT:
        /// faithful = balance BEFORE splitting, which leaks synthetic
        /// neighbors of test samples into training; use no-leak to split
        /// first and balance the training partition only.
        #[arg(long, value_enum, default_value_t = SmoteModeArg::Faithful)]
        smote_mode: SmoteModeArg,
        /// Output directory for model.ckpt and history.csv.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Evaluate a checkpoint on the held-out test partition and write the
    /// report, confusion matrix, and ROC/PR curves.
    Eval {
        #[command(flatten)]
        source: SourceArgs,
        /// Checkpoint produced by `train`.
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Must match the seed the checkpoint was trained with so the test
        /// partition is identical.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Must match the train run (see `train --help`).
        #[arg(long, value_enum, default_value_t = SmoteModeArg::Faithful)]
        smote_mode: SmoteModeArg,
        /// Output directory for report.csv/report.txt/confusion.csv and
        /// per-class roc_*.csv / pr_*.csv.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Write Grad-CAM overlay PNGs for the given images.
    Explain {
        /// Checkpoint produced by `train`.
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Input image files (PNG or JPEG); may be repeated.
        #[arg(long = "image", value_name = "FILE", required = true)]
        images: Vec<PathBuf>,
        /// Class to explain (Cyst, Normal, Stone, or Tumor); defaults to
        /// each image's predicted class.
        #[arg(long, value_name = "NAME")]
        target_class: Option<String>,
        /// Heat layer blend weight in [0,1].
        #[arg(long, default_value_t = 0.4)]
        alpha: f32,
        /// Treat input image bytes as BGR-ordered and swap to RGB.
        #[arg(long)]
        bgr_input: bool,
        /// Output directory for <stem>.gradcam.<class>.png files.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|source| Error::Io { path: out.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_synth(counts: Counts, seed: u64, out: &Path) -> Result<()> {
    let source = DataSource::Synthetic(counts.0);
    let (set, _) = acquire_dataset(&source, seed)?;
    write_dataset_layout(&set, out)?;
    println!(
        "wrote {} images ({}/{}/{}/{}) to {}",
        set.len(),
        counts.0[0],
        counts.0[1],
        counts.0[2],
        counts.0[3],
        out.display()
    );
    Ok(())
}

fn cmd_balance(source: &SourceArgs, seed: u64) -> Result<()> {
    let (set, warnings) = acquire_dataset(&source.resolve()?, seed)?;
    print_warnings(&warnings);
    let features = flatten_images(&set);
    let before = features.class_counts();
    let plan = BalancePlan::to_majority(before, DEFAULT_K_NEIGHBORS)?;
    let outcome = smote_oversample(&features, &plan, derive_seed(seed, "smote"))?;
    print_warnings(&outcome.warnings);
    let after = outcome.features.class_counts();
    println!("{}", balance_summary(before, after));
    println!("synthetic samples added: {}", outcome.synthetic.len());
    Ok(())
}

fn cmd_train(
    source: &SourceArgs,
    seed: u64,
    epochs: usize,
    batch: usize,
    lr: f64,
    smote_mode: SmoteModeArg,
    out: &Path,
) -> Result<()> {
    ensure_out_dir(out)?;
    let cfg = PipelineConfig {
        seed,
        smote_mode: smote_mode.into(),
        epochs,
        batch_size: batch,
        learning_rate: lr,
        ..PipelineConfig::new(source.resolve()?)
    };
    let run = run_training(&cfg)?;
    print_warnings(&run.data.warnings);
    println!(
        "balance: {}",
        balance_summary(run.data.counts_before, run.data.counts_after)
    );
    println!(
        "split: {} train / {} val / {} test",
        run.data.train.len(),
        run.data.val.len(),
        run.data.test.len()
    );

    let ckpt = out.join("model.ckpt");
    save_checkpoint(&run.model, &ckpt)?;
    write_text(&out.join("history.csv"), &run.history.to_csv())?;

    let last = run.history.len() - 1;
    println!(
        "epoch {}: train_loss {:.4} train_acc {:.4} val_loss {:.4} val_acc {:.4}",
        last + 1,
        run.history.train_loss[last],
        run.history.train_acc[last],
        run.history.val_loss[last],
        run.history.val_acc[last]
    );
    println!("wrote {} and {}", ckpt.display(), out.join("history.csv").display());
    Ok(())
}

fn cmd_eval(
    source: &SourceArgs,
    checkpoint: &Path,
    seed: u64,
    smote_mode: SmoteModeArg,
    out: &Path,
) -> Result<()> {
    ensure_out_dir(out)?;
    let cfg = PipelineConfig {
        seed,
        smote_mode: smote_mode.into(),
        ..PipelineConfig::new(source.resolve()?)
    };
    let data = prepare_data(&cfg)?;
    print_warnings(&data.warnings);
    let model = load_checkpoint(checkpoint)?;
    let eval = evaluate_on_test(&model, &data)?;

    write_text(&out.join("report.csv"), &eval.report.to_csv())?;
    write_text(&out.join("report.txt"), &eval.report.to_text())?;

    let probs = model.predict_proba(&data.test.images)?;
    let preds = probs.argmax_last_axis()?;
    let cm = confusion_matrix(&data.test.labels, &preds)?;
    write_text(&out.join("confusion.csv"), &cm.to_csv())?;

    for (class_id, name) in CLASS_NAMES.iter().enumerate() {
        let stem = name.to_ascii_lowercase();
        match roc_curve_ovr(&probs, &data.test.labels, class_id) {
            Ok(curve) => {
                write_text(&out.join(format!("roc_{stem}.csv")), &curve.to_csv("fpr", "tpr"))?
            }
            Err(Error::Degenerate(msg)) => eprintln!("warning: roc_{stem}: {msg}"),
            Err(e) => return Err(e),
        }
        match pr_curve_ovr(&probs, &data.test.labels, class_id) {
            Ok(curve) => write_text(
                &out.join(format!("pr_{stem}.csv")),
                &curve.to_csv("recall", "precision"),
            )?,
            Err(Error::Degenerate(msg)) => eprintln!("warning: pr_{stem}: {msg}"),
            Err(e) => return Err(e),
        }
    }

    print!("{}", eval.report.to_text());
    println!("test_loss {:.4} test_acc {:.4}", eval.test_loss, eval.test_acc);
    println!("reports written to {}", out.display());
    Ok(())
}

fn cmd_explain(
    checkpoint: &Path,
    images: &[PathBuf],
    target_class: Option<&str>,
    alpha: f32,
    bgr_input: bool,
    out: &Path,
) -> Result<()> {
    ensure_out_dir(out)?;
    let model = load_checkpoint(checkpoint)?;
    let forced_class = target_class.map(encode_label).transpose()?;

    for path in images {
        let bytes =
            std::fs::read(path).map_err(|source| Error::Io { path: path.clone(), source })?;
        let decoded = decode_image(&bytes).map_err(|e| match e {
            Error::Decode { reason, .. } => Error::Decode { path: Some(path.clone()), reason },
            other => other,
        })?;
        let decoded = if bgr_input { bgr_to_rgb(&decoded) } else { decoded };
        let resized = resize_bilinear_28(&decoded);
        let input = normalize_to_unit(&resized)?;

        let probs = model.predict_proba(&input.reshape(&[1, 28, 28, 3])?)?;
        let predicted = probs.argmax_last_axis()?[0];
        let class_id = forced_class.unwrap_or(predicted);

        let heat = upsample_bilinear(&gradcam_map(&model, &input, class_id)?);
        let base = image_from_unit_tensor(&input)?;
        let overlay = colorize_overlay(&heat, &base, alpha)?;

        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("image");
        let out_path = out.join(overlay_file_name(stem, class_id));
        overlay.write_png(&out_path)?;
        println!(
            "{} -> {} (predicted {}, p={:.4}, explained {})",
            path.display(),
            out_path.display(),
            CLASS_NAMES[predicted],
            probs.get2(0, predicted),
            CLASS_NAMES[class_id]
        );
    }
    Ok(())
}

/// Parses argv and runs a subcommand; returns the process exit code.
/// Usage errors exit 2 (via clap); runtime failures print one diagnostic
/// line and return 1.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth { synthetic, seed, out } => cmd_synth(*synthetic, *seed, out),
        Command::Balance { source, seed } => cmd_balance(source, *seed),
        Command::Train { source, seed, epochs, batch, lr, smote_mode, out } => {
            cmd_train(source, *seed, *epochs, *batch, *lr, *smote_mode, out)
        }
        Command::Eval { source, checkpoint, seed, smote_mode, out } => {
            cmd_eval(source, checkpoint, *seed, *smote_mode, out)
        }
        Command::Explain { checkpoint, images, target_class, alpha, bgr_input, out } => {
            cmd_explain(checkpoint, images, target_class.as_deref(), *alpha, *bgr_input, out)
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
