//! Command-line front end wiring the library into the two pipelines plus a
//! streaming classify mode.
//!
//! Exit codes: 0 on success, otherwise a per-error-family nonzero code
//! (see `Error::exit_code`).

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ecgkit::balance::BalanceConfig;
use ecgkit::classify::{self, BaselineKind, ForestParams};
use ecgkit::delineate::{self, DelineationConfig};
use ecgkit::domain::{
    load_features, load_record, load_records, parse_label, save_features, save_record, Dataset,
    FeatureMode, FiducialMap, RhythmLabel,
};
use ecgkit::error::{Error, Result};
use ecgkit::evaluate::{self, MetricReport};
use ecgkit::pipeline::{self, PipelineConfig};
use ecgkit::plot;
use ecgkit::synthgen;
use ecgkit::wavelet::WaveletName;

#[derive(Parser)]
#[command(name = "ecgkit", about = "ECG rhythm classification toolkit", version)]
struct Cli {
    /// Optional key=value config file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus with ground-truth fiducials.
    Synth(SynthArgs),
    /// Band-pass and notch filter records.
    Preprocess(PreprocessArgs),
    /// Detect R peaks and wave boundaries.
    Delineate(DelineateArgs),
    /// Extract feature vectors from records.
    Features(FeaturesArgs),
    /// Rebalance a feature dataset (SMOTE + undersampling).
    Balance(BalanceArgs),
    /// Train a classifier on a feature dataset.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Feature-subset or mother-wavelet ablations.
    Ablate(AblateArgs),
    /// Predict labels for a feature dataset with a trained model.
    Predict(PredictArgs),
    /// Classify record files streamed as paths on stdin.
    Stream(StreamArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Rhythm class abbreviation, or "all".
    #[arg(long, default_value = "all")]
    class: String,
    /// Records per class.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 21)]
    seed: u64,
    /// Output directory (records, ground-truth sidecars, manifest.csv).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    low: f64,
    #[arg(long, default_value_t = 150.0)]
    high: f64,
    /// Notch center frequency; use --no-notch to disable.
    #[arg(long, default_value_t = 50.0)]
    notch: f64,
    #[arg(long, default_value_t = false)]
    no_notch: bool,
}

#[derive(Args)]
struct DelineateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output JSON: record id -> per-beat fiducial table.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    /// time48 or wavelet66.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Mother wavelet for wavelet66 mode.
    #[arg(long)]
    wavelet: Option<String>,
}

#[derive(Args)]
struct BalanceArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Train a baseline instead of the forest: knn or dtree.
    #[arg(long)]
    baseline: Option<String>,
    /// Neighbor count for the knn baseline.
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
}

#[derive(Args)]
struct CrossvalArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for confusion-matrix and per-class F1 PNGs.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Feature CSV for subset ablation.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Comma-separated subsets, e.g. HRV,P,PRI,QRS,ALL or HRV+QRS.
    #[arg(long)]
    subsets: Option<String>,
    /// Record manifest for wavelet ablation.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma-separated wavelets, e.g. haar,db6,coif2,bior4.4,sym7.
    #[arg(long)]
    wavelets: Option<String>,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output CSV (id,label,confidence); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    wavelet: Option<String>,
}

/// key = value pairs, '#' comments; unknown keys are ignored.
fn load_config(path: &Option<PathBuf>) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    if let Some(path) = path {
        if !path.exists() {
            return Err(Error::MissingFile(path.clone()));
        }
        for line in std::fs::read_to_string(path)?.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    Ok(map)
}

fn cfg_get<T: FromStr>(map: &HashMap<String, String>, key: &str) -> Option<T> {
    map.get(key).and_then(|v| v.parse().ok())
}

fn parse_wavelet(flag: &Option<String>, cfg: &HashMap<String, String>) -> Result<WaveletName> {
    let name = flag
        .clone()
        .or_else(|| cfg.get("wavelet").cloned())
        .unwrap_or_else(|| "sym7".to_string());
    name.parse()
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.config)?;
    match cli.command {
        Command::Synth(args) => synth(args, &cfg),
        Command::Preprocess(args) => preprocess(args),
        Command::Delineate(args) => delineate_cmd(args),
        Command::Features(args) => features_cmd(args, &cfg),
        Command::Balance(args) => balance_cmd(args, &cfg),
        Command::Train(args) => train(args, &cfg),
        Command::Crossval(args) => crossval(args, &cfg),
        Command::Ablate(args) => ablate(args, &cfg),
        Command::Predict(args) => predict_cmd(args),
        Command::Stream(args) => stream(args, &cfg),
    }
}

fn synth(args: SynthArgs, _cfg: &HashMap<String, String>) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let only: Option<RhythmLabel> = if args.class.eq_ignore_ascii_case("all") {
        None
    } else {
        Some(parse_label(&args.class)?)
    };
    let corpus = synthgen::build_corpus(args.n, args.seed)?;
    let mut manifest = String::new();
    for sr in corpus
        .iter()
        .filter(|sr| only.map(|l| sr.record.label == Some(l)).unwrap_or(true))
    {
        let rec_name = format!("{}.rec", sr.record.id);
        save_record(&sr.record, &args.out.join(&rec_name))?;
        let truth_json = serde_json::to_string_pretty(&sr.truth)
            .map_err(|e| Error::CorruptModel(e.to_string()))?;
        std::fs::write(args.out.join(format!("{}.truth.json", sr.record.id)), truth_json)?;
        manifest.push_str(&format!(
            "{rec_name},{}\n",
            sr.record.label.map(|l| l.to_string()).unwrap_or_default()
        ));
    }
    std::fs::write(args.out.join("manifest.csv"), manifest)?;
    Ok(())
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let records = load_records(&args.manifest)?;
    let mut config = PipelineConfig::new(FeatureMode::Time48);
    config.low_hz = args.low;
    config.high_hz = args.high;
    config.notch_hz = (!args.no_notch).then_some(args.notch);
    let mut manifest = String::new();
    for record in &records {
        let clean = pipeline::preprocess_record(record, &config)?;
        let name = format!("{}.rec", clean.id);
        save_record(&clean, &args.out.join(&name))?;
        manifest.push_str(&format!(
            "{name},{}\n",
            clean.label.map(|l| l.to_string()).unwrap_or_default()
        ));
    }
    std::fs::write(args.out.join("manifest.csv"), manifest)?;
    Ok(())
}

fn delineate_cmd(args: DelineateArgs) -> Result<()> {
    let records = load_records(&args.manifest)?;
    let dconfig = DelineationConfig::default();
    let mut all: HashMap<String, FiducialMap> = HashMap::new();
    for record in &records {
        let map = delineate::full_delineation(record, &dconfig)
            .map_err(|e| e.with_record(&record.id))?;
        all.insert(record.id.clone(), map);
    }
    let json =
        serde_json::to_string_pretty(&all).map_err(|e| Error::CorruptModel(e.to_string()))?;
    std::fs::write(&args.out, json)?;
    Ok(())
}

fn features_cmd(args: FeaturesArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let mode: FeatureMode = args
        .mode
        .clone()
        .or_else(|| cfg.get("mode").cloned())
        .unwrap_or_else(|| "time48".to_string())
        .parse()?;
    let mut config = PipelineConfig::new(mode);
    config.wavelet = parse_wavelet(&args.wavelet, cfg)?;
    let records = load_records(&args.manifest)?;
    let dataset = pipeline::extract_dataset(&records, &config)?;
    save_features(&dataset, &args.out)
}

fn balance_cmd(args: BalanceArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let dataset = load_features(&args.features)?;
    let config = BalanceConfig {
        target_per_class: args
            .target
            .or_else(|| cfg_get(cfg, "target"))
            .unwrap_or(3451),
        smote_k: args.k.or_else(|| cfg_get(cfg, "k")).unwrap_or(5),
        seed: args.seed.or_else(|| cfg_get(cfg, "seed")).unwrap_or(42),
    };
    let balanced = ecgkit::balance::balance(&dataset, &config)?;
    save_features(&balanced, &args.out)
}

fn forest_params(
    trees: Option<usize>,
    depth: Option<usize>,
    min_leaf: usize,
    seed: Option<u64>,
    cfg: &HashMap<String, String>,
) -> ForestParams {
    ForestParams {
        n_trees: trees.or_else(|| cfg_get(cfg, "trees")).unwrap_or(200),
        max_depth: depth.or_else(|| cfg_get(cfg, "depth")),
        min_samples_leaf: min_leaf,
        features_per_split: None,
        bootstrap: true,
        seed: seed.or_else(|| cfg_get(cfg, "seed")).unwrap_or(42),
    }
}

fn train(args: TrainArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let dataset = load_features(&args.features)?;
    let params = forest_params(args.trees, args.depth, args.min_leaf, args.seed, cfg);
    let model = match args.baseline.as_deref() {
        None => classify::train_forest(&dataset, &params)?,
        Some("knn") => classify::train_baseline(&dataset, BaselineKind::Knn, &params, args.knn_k)?,
        Some("dtree") => classify::train_baseline(&dataset, BaselineKind::Dtree, &params, 0)?,
        Some(other) => return Err(Error::UnknownLabel(other.to_string())),
    };
    classify::save_model(&model, &args.out)?;
    if let Some(oob) = model.oob_accuracy() {
        eprintln!("out-of-bag accuracy: {:.4}", oob);
    }
    Ok(())
}

fn write_report(report: &MetricReport, path: &Path) -> Result<()> {
    let json =
        serde_json::to_string_pretty(report).map_err(|e| Error::CorruptModel(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

fn crossval(args: CrossvalArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let dataset = load_features(&args.features)?;
    let params = forest_params(args.trees, None, 1, args.seed, cfg);
    let folds = args.folds.or_else(|| cfg_get(cfg, "folds")).unwrap_or(10);
    let seed = args.seed.or_else(|| cfg_get(cfg, "seed")).unwrap_or(42);
    let report = evaluate::kfold_crossval(&dataset, folds, &params, seed)?;
    write_report(&report, &args.report)?;
    if let Some(dir) = &args.plots {
        std::fs::create_dir_all(dir)?;
        plot::confusion_png(&report, &dir.join("confusion.png"))?;
        plot::per_class_f1_png(&report, &dir.join("per_class_f1.png"))?;
    }
    eprintln!(
        "acc {:.2}% se {:.2}% +p {:.2}% f1 {:.2}%",
        report.overall.acc, report.overall.se, report.overall.ppv, report.overall.f1
    );
    Ok(())
}

fn ablate(args: AblateArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let params = forest_params(args.trees, None, 1, args.seed, cfg);
    let folds = args.folds.or_else(|| cfg_get(cfg, "folds")).unwrap_or(10);
    let seed = args.seed.or_else(|| cfg_get(cfg, "seed")).unwrap_or(42);
    match (&args.features, &args.subsets, &args.manifest, &args.wavelets) {
        (Some(features), Some(subsets), None, None) => {
            let dataset = load_features(features)?;
            let names: Vec<String> = subsets.split(',').map(|s| s.trim().to_string()).collect();
            let rows =
                evaluate::ablation_feature_subsets(&dataset, &names, folds, &params, seed)?;
            let table: Vec<(String, MetricReport)> = rows;
            let json = serde_json::to_string_pretty(&table)
                .map_err(|e| Error::CorruptModel(e.to_string()))?;
            std::fs::write(&args.report, json)?;
            Ok(())
        }
        (None, None, Some(manifest), Some(wavelets)) => {
            let records = load_records(manifest)?;
            let mut config = PipelineConfig::new(FeatureMode::Wavelet66);
            config.forest = params;
            let dconfig = DelineationConfig::default();
            let mut prepared = Vec::with_capacity(records.len());
            for record in &records {
                let clean = pipeline::preprocess_record(record, &config)?;
                let peaks = delineate::detect_r_peaks(&clean, &dconfig)
                    .map_err(|e| e.with_record(&record.id))?;
                prepared.push((clean, peaks));
            }
            let list: Vec<WaveletName> = wavelets
                .split(',')
                .map(|w| w.trim().parse())
                .collect::<Result<_>>()?;
            let rows = evaluate::ablation_wavelets(
                &prepared,
                &list,
                folds,
                &params,
                &config.entropy,
                seed,
            )?;
            let table: Vec<(String, MetricReport)> = rows
                .into_iter()
                .map(|(w, r)| (w.to_string(), r))
                .collect();
            let json = serde_json::to_string_pretty(&table)
                .map_err(|e| Error::CorruptModel(e.to_string()))?;
            std::fs::write(&args.report, json)?;
            Ok(())
        }
        _ => Err(Error::UnknownSubset(
            "use either --features/--subsets or --manifest/--wavelets".to_string(),
        )),
    }
}

fn predict_cmd(args: PredictArgs) -> Result<()> {
    let model = classify::load_model(&args.model)?;
    let dataset: Dataset = load_features(&args.features)?;
    let mut out = String::new();
    for row in &dataset.rows {
        let (label, probs) = classify::predict(&model, &row.features)?;
        out.push_str(&format!(
            "{},{},{:.4}\n",
            row.id,
            label,
            probs[label.index()]
        ));
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn stream(args: StreamArgs, cfg: &HashMap<String, String>) -> Result<()> {
    let model = classify::load_model(&args.model)?;
    let mut config = PipelineConfig::new(model.mode);
    config.wavelet = parse_wavelet(&args.wavelet, cfg)?;
    let stdin = std::io::stdin();
    let records = stdin
        .lock()
        .lines()
        .filter_map(|line| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(load_record(Path::new(l.trim()))),
            Err(e) => Some(Err(e.into())),
        });
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let entries = pipeline::stream_classify(&model, records, &config, &mut out)?;
    let mean_latency = if entries.is_empty() {
        0.0
    } else {
        entries.iter().map(|e| e.latency_ms).sum::<f64>() / entries.len() as f64
    };
    let _ = writeln!(std::io::stderr(), "mean latency: {mean_latency:.1} ms");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
