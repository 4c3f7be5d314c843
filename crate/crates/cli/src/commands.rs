//! Implementations of the five subcommands. Each takes plain values (paths
//! and options), so integration tests can call them directly as well as
//! through the binary.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use semot::{
    build_cost_matrix, ce_loss, generate, load_embeddings, ot_loss, recall_at_k, Batch,
    CostMatrix, Dataset, EvalReport, LabelSet, Reduction, SinkhornConfig, SynthConfig,
};

use crate::config::{synth_config_from_text, LossKind, TrainSettings};
use crate::error::{create_dir, read_file, write_file, CliError, CliResult};
use crate::model::{scene_groups, Model};
use crate::record::{ConfigSnapshot, RunRecord, StoredEval};

/// Shared evaluation options: the K ladder and the scene-group size.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub k_list: Vec<usize>,
    pub group_size: usize,
}

impl EvalOptions {
    fn validate(&self) -> CliResult<()> {
        if self.k_list.is_empty() {
            return Err(CliError::Validation("the K list must be nonempty".into()));
        }
        if self.k_list.iter().any(|&k| k == 0) {
            return Err(CliError::Validation("every K must be ≥ 1".into()));
        }
        if self.group_size == 0 {
            return Err(CliError::Validation("group size must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// `gen-data`: write a synthetic long-tailed dataset bundle into a
/// directory: train.csv, test.csv, embeddings.txt, labels.txt, and a
/// manifest echoing the resolved configuration.
pub fn cmd_gen_data(
    config_path: Option<&Path>,
    seed: Option<u64>,
    out_dir: &Path,
) -> CliResult<()> {
    let mut config = match config_path {
        Some(path) => synth_config_from_text(&read_file(path)?, &path.display().to_string())?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let (train, test, table, labels) = generate(&config)?;
    create_dir(out_dir)?;
    write_file(&out_dir.join("train.csv"), &train.to_csv())?;
    write_file(&out_dir.join("test.csv"), &test.to_csv())?;
    write_file(&out_dir.join("embeddings.txt"), &table.to_text())?;
    let mut labels_text = labels.labels().join("\n");
    labels_text.push('\n');
    write_file(&out_dir.join("labels.txt"), &labels_text)?;
    let manifest = serde_json::json!({
        "n_classes": config.n_classes,
        "feature_dim": config.feature_dim,
        "zipf_exponent": config.zipf_exponent,
        "train_samples": config.train_samples,
        "test_samples": config.test_samples,
        "class_spread": config.class_spread,
        "similarity_groups": config.similarity_groups,
        "seed": config.seed,
    });
    write_file(&out_dir.join("manifest.json"), &format!("{manifest:#}\n"))?;
    println!(
        "wrote {}: {} train rows, {} test rows, {} classes",
        out_dir.display(),
        train.len(),
        test.len(),
        config.n_classes
    );
    Ok(())
}

/// `build-cost-matrix`: labels file (one label per line) + embedding dump →
/// cost-matrix CSV. `background` selects the background label by name;
/// `no_background` skips the background rules entirely.
pub fn cmd_build_cost_matrix(
    labels_path: &Path,
    embeddings_path: &Path,
    background: Option<&str>,
    no_background: bool,
    out: &Path,
) -> CliResult<()> {
    let labels_text = read_file(labels_path)?;
    let names: Vec<String> = labels_text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(String::from)
        .collect();
    if names.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no labels found",
            labels_path.display()
        )));
    }
    let table = load_embeddings(read_file(embeddings_path)?.as_bytes())?;
    let unindexed = LabelSet::new(names, None)?;
    let background_index = if no_background {
        None
    } else {
        let name = background.unwrap_or("background");
        match unindexed.position(name) {
            Some(idx) => Some(idx),
            None if background.is_none() => None, // no label named "background"; fine
            None => {
                return Err(CliError::Validation(format!(
                    "background label `{name}` not found in {}",
                    labels_path.display()
                )));
            }
        }
    };
    let labels = LabelSet::new(unindexed.labels().to_vec(), background_index)?;
    let matrix = build_cost_matrix(&labels, &table)?;
    write_file(out, &matrix.to_csv()?)?;
    println!(
        "wrote {}: {}x{} cost matrix",
        out.display(),
        matrix.nrows(),
        matrix.ncols()
    );
    Ok(())
}

/// Everything `train` needs beyond the config file.
#[derive(Debug)]
pub struct TrainArgs<'a> {
    pub config: &'a Path,
    /// Training CSV; exclusive with `synth`.
    pub data: Option<&'a Path>,
    /// Held-out CSV for the final evaluation (only with `data`).
    pub test_data: Option<&'a Path>,
    /// Synthetic-data config; generates both splits.
    pub synth: Option<&'a Path>,
    pub cost: &'a Path,
    pub out: &'a Path,
    /// Overrides the config file's training seed.
    pub seed: Option<u64>,
    pub eval: EvalOptions,
    /// Background label name; defaults to auto-detecting "background".
    pub background: Option<&'a str>,
    pub record_timing: bool,
}

fn resolve_background(labels: &LabelSet, requested: Option<&str>) -> CliResult<Option<usize>> {
    match requested {
        Some(name) => match labels.position(name) {
            Some(idx) => Ok(Some(idx)),
            None => Err(CliError::Validation(format!(
                "background label `{name}` not found in the label set"
            ))),
        },
        None => Ok(labels.position("background")),
    }
}

/// `train`: mini-batch gradient descent with the configured loss, then a
/// final evaluation, all captured in a run record.
pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let start = Instant::now();
    args.eval.validate()?;
    let source = args.config.display().to_string();
    let mut settings = TrainSettings::from_text(&read_file(args.config)?, &source)?;
    if let Some(s) = args.seed {
        settings.seed = s;
    }

    let cost = CostMatrix::from_csv(&read_file(args.cost)?)?;
    if cost.nrows() != cost.ncols() {
        return Err(CliError::Validation(format!(
            "training needs a square cost matrix, got {}x{}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    let label_names: Vec<String> = cost
        .row_labels()
        .ok_or_else(|| CliError::Validation("cost matrix carries no label names".into()))?
        .to_vec();
    let n_classes = label_names.len();
    let label_set = LabelSet::new(label_names.clone(), None)?;
    let background = resolve_background(&label_set, args.background)?;

    let (train_data, eval_data) = load_training_data(args, n_classes, &label_names)?;
    if train_data.is_empty() || eval_data.is_empty() {
        return Err(CliError::Validation("datasets must be nonempty".into()));
    }
    if train_data.feature_dim() != eval_data.feature_dim() {
        return Err(CliError::Validation(format!(
            "train/test feature dimensions differ: {} vs {}",
            train_data.feature_dim(),
            eval_data.feature_dim()
        )));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(settings.seed);
    let mut model = Model::init(
        settings.model,
        train_data.feature_dim(),
        n_classes,
        &mut rng,
    );
    let sinkhorn = SinkhornConfig::fixed(settings.sinkhorn_epsilon, settings.sinkhorn_iterations);

    let n_rows = train_data.len();
    let mut indices: Vec<usize> = (0..n_rows).collect();
    let mut epoch_mean_losses = Vec::with_capacity(settings.epochs);
    for epoch in 0..settings.epochs {
        indices.shuffle(&mut rng);
        let mut item_loss_sum = 0.0;
        for (batch_no, chunk) in indices.chunks(settings.batch_size).enumerate() {
            let logits = model.batch_logits(&train_data.features, chunk);
            let targets: Vec<usize> = chunk.iter().map(|&r| train_data.labels[r]).collect();
            let in_batch = |err| {
                CliError::Validation(format!("epoch {epoch}, batch {batch_no}: {err}"))
            };
            let batch = Batch::new(logits, targets).map_err(in_batch)?;
            let loss = match settings.loss {
                LossKind::Ce => ce_loss(&batch, Reduction::Mean),
                LossKind::OtSum => ot_loss(&batch, &cost, &sinkhorn, Reduction::Sum),
                LossKind::OtMean => ot_loss(&batch, &cost, &sinkhorn, Reduction::Mean),
            }
            .map_err(in_batch)?;
            if !loss.value.is_finite() {
                return Err(CliError::Validation(format!(
                    "non-finite loss at epoch {epoch}, batch {batch_no}"
                )));
            }
            item_loss_sum += match settings.loss {
                LossKind::Ce | LossKind::OtMean => loss.value * chunk.len() as f64,
                LossKind::OtSum => loss.value,
            };
            model.step(
                &train_data.features,
                chunk,
                &loss.gradient,
                settings.learning_rate,
            );
        }
        let mean = item_loss_sum / n_rows as f64;
        epoch_mean_losses.push(mean);
        println!(
            "epoch {}/{} mean loss {:.9e}",
            epoch + 1,
            settings.epochs,
            mean
        );
    }

    let reports = evaluate_model(&model, &eval_data, &args.eval, background)?;
    let evaluations: Vec<StoredEval> = reports
        .iter()
        .map(|r| StoredEval::from_report(r, &label_names))
        .collect();
    for report in &reports {
        println!("k={} mean_recall={:.6}", report.k, report.mean_recall);
    }

    let record = RunRecord {
        config: ConfigSnapshot {
            loss: settings.loss.name().into(),
            epochs: settings.epochs,
            batch_size: settings.batch_size,
            learning_rate: settings.learning_rate,
            model: settings.model.to_string(),
            seed: settings.seed,
            sinkhorn_epsilon: settings.sinkhorn_epsilon,
            sinkhorn_iterations: settings.sinkhorn_iterations,
            eval_k: args.eval.k_list.clone(),
            eval_group_size: args.eval.group_size,
        },
        label_names,
        background,
        train_class_counts: train_data.class_frequencies.clone(),
        epoch_mean_losses,
        evaluations,
        model,
        wall_clock_seconds: args.record_timing.then(|| start.elapsed().as_secs_f64()),
    };
    record.save(args.out)?;
    println!("wrote {}", args.out.display());
    eprintln!(
        "trained {} epochs on {} rows in {:.2}s",
        settings.epochs,
        n_rows,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn load_training_data(
    args: &TrainArgs,
    n_classes: usize,
    cost_labels: &[String],
) -> CliResult<(Dataset, Dataset)> {
    match (args.data, args.synth) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "pass either --data or --synth, not both".into(),
        )),
        (None, None) => Err(CliError::Validation(
            "one of --data or --synth is required".into(),
        )),
        (Some(path), None) => {
            let train = Dataset::from_csv(&read_file(path)?, Some(n_classes))?;
            let eval = match args.test_data {
                Some(test) => Dataset::from_csv(&read_file(test)?, Some(n_classes))?,
                // Without a held-out split the final evaluation runs on the
                // training data; the record still captures a usable model.
                None => train.clone(),
            };
            Ok((train, eval))
        }
        (None, Some(path)) => {
            if args.test_data.is_some() {
                return Err(CliError::Validation(
                    "--test-data only applies together with --data".into(),
                ));
            }
            let config = synth_config_from_text(&read_file(path)?, &path.display().to_string())?;
            if config.n_classes != n_classes {
                return Err(CliError::Validation(format!(
                    "synthetic config has {} classes but the cost matrix has {n_classes}",
                    config.n_classes
                )));
            }
            let (train, test, _table, labels) = generate(&config)?;
            if labels.labels() != cost_labels {
                return Err(CliError::Validation(
                    "cost-matrix labels do not match the synthetic label set".into(),
                ));
            }
            Ok((train, test))
        }
    }
}

fn evaluate_model(
    model: &Model,
    data: &Dataset,
    eval: &EvalOptions,
    background: Option<usize>,
) -> CliResult<Vec<EvalReport>> {
    let groups = scene_groups(model, data, eval.group_size)?;
    eval.k_list
        .iter()
        .map(|&k| recall_at_k(&groups, k, background).map_err(CliError::from))
        .collect()
}

/// `evaluate`: score a dataset with a recorded model and write one JSON and
/// one CSV report per K into the output directory.
pub fn cmd_evaluate(
    record_path: &Path,
    data_path: &Path,
    eval: &EvalOptions,
    out_dir: &Path,
) -> CliResult<()> {
    eval.validate()?;
    let record = RunRecord::load(record_path)?;
    let n_classes = record.label_names.len();
    if record.model.n_classes() != n_classes {
        return Err(CliError::Validation(format!(
            "run record is inconsistent: model scores {} classes, {} labels listed",
            record.model.n_classes(),
            n_classes
        )));
    }
    let data = Dataset::from_csv(&read_file(data_path)?, Some(n_classes))?;
    if data.is_empty() {
        return Err(CliError::Validation("dataset is empty".into()));
    }
    let reports = evaluate_model(&record.model, &data, eval, record.background)?;
    create_dir(out_dir)?;
    for report in &reports {
        let json = report.to_json(Some(&record.label_names))?;
        write_file(
            &out_dir.join(format!("eval_k{}.json", report.k)),
            &format!("{json:#}\n"),
        )?;
        write_file(
            &out_dir.join(format!("eval_k{}.csv", report.k)),
            &report.to_csv(Some(&record.label_names))?,
        )?;
        println!("k={} mean_recall={:.6}", report.k, report.mean_recall);
    }
    println!("wrote {} report pairs to {}", reports.len(), out_dir.display());
    Ok(())
}

/// `compare`: side-by-side per-class recall of two evaluated run records,
/// ordered by descending class frequency, plus a winner-per-K summary on
/// stdout. Deltas are B minus A.
pub fn cmd_compare(a_path: &Path, b_path: &Path, out: &Path) -> CliResult<()> {
    let a = RunRecord::load(a_path)?;
    let b = RunRecord::load(b_path)?;
    if a.label_names != b.label_names {
        return Err(CliError::Validation(
            "label-set mismatch: the records were trained on different label sets".into(),
        ));
    }
    if a.background != b.background {
        return Err(CliError::Validation(
            "the records disagree on the background class".into(),
        ));
    }
    if a.evaluations.is_empty() || b.evaluations.is_empty() {
        return Err(CliError::Validation(
            "both records need stored evaluations to compare".into(),
        ));
    }
    let ks_a: Vec<usize> = a.evaluations.iter().map(|e| e.k).collect();
    let ks_b: Vec<usize> = b.evaluations.iter().map(|e| e.k).collect();
    if ks_a != ks_b {
        return Err(CliError::Validation(format!(
            "the records store different K lists: {ks_a:?} vs {ks_b:?}"
        )));
    }
    for (ea, eb) in a.evaluations.iter().zip(&b.evaluations) {
        if ea.counts != eb.counts {
            return Err(CliError::Validation(
                "the records were evaluated on different datasets (class counts differ)".into(),
            ));
        }
    }

    // Rows: non-background classes with ground truth, by descending count
    // (the frequency ordering of the per-label recall figure), ties by
    // ascending class index.
    let first = &a.evaluations[0];
    let mut classes: Vec<(usize, usize)> = first
        .per_class
        .iter()
        .filter(|c| Some(c.class) != a.background)
        .map(|c| (c.class, c.count))
        .collect();
    classes.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));

    let recall_of = |eval: &StoredEval, class: usize| -> f64 {
        eval.per_class
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.recall)
            .unwrap_or(f64::NAN)
    };

    let mut csv = String::from("label,count");
    for k in &ks_a {
        csv.push_str(&format!(",recall_a_k{k},recall_b_k{k},delta_k{k}"));
    }
    csv.push('\n');
    for &(class, count) in &classes {
        csv.push_str(&format!("{},{count}", a.label_names[class]));
        for (ea, eb) in a.evaluations.iter().zip(&b.evaluations) {
            let ra = recall_of(ea, class);
            let rb = recall_of(eb, class);
            csv.push_str(&format!(",{ra:.16e},{rb:.16e},{:.16e}", rb - ra));
        }
        csv.push('\n');
    }
    write_file(out, &csv)?;

    println!("# Published full-scale reference (context only, not asserted):");
    println!("#   Motif + CE:       mR@50 = 15.99   mR@100 = 17.30");
    println!("#   Motif + OT (SUM): mR@50 = 17.55   mR@100 = 20.95");
    for (ea, eb) in a.evaluations.iter().zip(&b.evaluations) {
        let delta = eb.mean_recall - ea.mean_recall;
        let winner = if delta > 0.0 {
            format!("B ({})", b.config.loss)
        } else if delta < 0.0 {
            format!("A ({})", a.config.loss)
        } else {
            "tie".to_string()
        };
        println!(
            "k={}: mean_recall A({})={:.6} B({})={:.6} delta={:+.6} winner={}",
            ea.k, a.config.loss, ea.mean_recall, b.config.loss, eb.mean_recall, delta, winner
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
