use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use histofeat::classifiers::{write_model, Classifier, ClassifierSpec, Variant};
use histofeat::deepfeat::{
    align_to_dataset, combine, read_feature_csv, write_atomic, write_feature_csv, FeatureTable,
};
use histofeat::descriptors::Descriptor;
use histofeat::evaluation::{cross_validate, parse_report_csv, render_csv, render_table, CvResult};
use histofeat::ingestion::{decode_and_gray, load_dataset, Dataset, Label, Sample};

const THREADS_ENV: &str = "HISTOFEAT_THREADS";

#[derive(Parser)]
#[command(name = "histofeat", version, about = "Handcrafted and deep feature pipelines for histopathology tiles")]
struct Cli {
    /// TOML file with defaults for any flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute descriptor CSVs for every image under --root.
    Extract(ExtractArgs),
    /// Cross-validate every descriptor x classifier pair and write report.{md,csv}.
    Evaluate(EvaluateArgs),
    /// Concatenate feature CSVs column-wise.
    Combine(CombineArgs),
    /// Re-render report.md from report.csv.
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    root: Option<PathBuf>,
    /// Comma-separated descriptors (ch1, ch2, lm, zm, har, lbp, hist, ac, haar) or `all`.
    #[arg(long, value_delimiter = ',')]
    desc: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset root; when given, feature rows are aligned to its images.
    #[arg(long)]
    root: Option<PathBuf>,
    /// Feature sets; `a+b` concatenates sets on the fly.
    #[arg(long, value_delimiter = ',')]
    desc: Option<Vec<String>>,
    /// Comma-separated classifiers (dt, knn, rf, svm) or `all`.
    #[arg(long, value_delimiter = ',')]
    clf: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    positive: Option<String>,
    /// Extra feature set `name=path.csv`; may repeat.
    #[arg(long = "deep", value_name = "NAME=CSV")]
    deep: Vec<String>,
    /// Directory holding `<desc>.csv` files; defaults to --out.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "svm-c")]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Also fit each pair on all samples and write `<out>/models/<clf>_<desc>.hfm`.
    #[arg(long)]
    save_models: bool,
}

#[derive(Args)]
struct CombineArgs {
    /// Two or more feature CSVs, concatenated in this order.
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    root: Option<PathBuf>,
    desc: Option<Vec<String>>,
    clf: Option<Vec<String>>,
    seed: Option<u64>,
    folds: Option<usize>,
    positive: Option<String>,
    out: Option<PathBuf>,
    features: Option<PathBuf>,
    #[serde(default)]
    deep: BTreeMap<String, PathBuf>,
    trees: Option<usize>,
    k: Option<usize>,
    c: Option<f64>,
    gamma: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), String> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Extract(a) => cmd_extract(a, cfg),
        Command::Evaluate(a) => cmd_evaluate(a, cfg),
        Command::Combine(a) => cmd_combine(a),
        Command::Report(a) => cmd_report(a, cfg),
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, String> {
    flag.or(file)
        .ok_or_else(|| format!("--{name} is required (flag or config file)"))
}

fn parse_descriptors(names: &[String]) -> Result<Vec<Descriptor>, String> {
    if names.iter().any(|n| n.trim() == "all") {
        return Ok(Descriptor::ALL.to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let d: Descriptor = n.parse().map_err(|e: histofeat::Error| e.to_string())?;
        if !out.contains(&d) {
            out.push(d);
        }
    }
    Ok(out)
}

/// Files written so far; removed again unless the command succeeds.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), String> {
        write_atomic(path, bytes).map_err(|e| e.to_string())?;
        self.0.push(path.to_path_buf());
        Ok(())
    }

    fn rollback(&self) {
        for p in &self.0 {
            let _ = fs::remove_file(p);
        }
    }
}

fn with_rollback(f: impl FnOnce(&mut Outputs) -> Result<(), String>) -> Result<(), String> {
    let mut outputs = Outputs::default();
    let result = f(&mut outputs);
    if result.is_err() {
        outputs.rollback();
    }
    result
}

fn cmd_extract(a: ExtractArgs, cfg: FileConfig) -> Result<(), String> {
    let root = required(a.root, cfg.root, "root")?;
    let out = required(a.out, cfg.out, "out")?;
    let descs = parse_descriptors(&required(a.desc, cfg.desc, "desc")?)?;
    if descs.is_empty() {
        return Err("--desc names no descriptor".into());
    }
    let dataset = load_dataset(&root).map_err(|e| e.to_string())?;
    eprintln!(
        "extracting {} descriptor(s) from {} images",
        descs.len(),
        dataset.len()
    );
    let rows: Vec<Vec<Vec<f64>>> = dataset
        .samples()
        .par_iter()
        .map(|s| {
            let img = decode_and_gray(&dataset.path_of(s)).map_err(|e| format!("{}: {e}", s.id))?;
            descs
                .iter()
                .map(|d| {
                    d.extract(&img)
                        .map(|fv| fv.values)
                        .map_err(|e| format!("sample `{}`, descriptor {}: {e}", s.id, d.name()))
                })
                .collect::<Result<Vec<_>, String>>()
        })
        .collect::<Result<_, String>>()?;

    fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
    with_rollback(|outputs| {
        for (j, d) in descs.iter().enumerate() {
            let mut table = FeatureTable::new(d.name(), d.feature_len()).map_err(|e| e.to_string())?;
            for (s, r) in dataset.samples().iter().zip(&rows) {
                table
                    .insert(s.id.clone(), s.label, r[j].clone())
                    .map_err(|e| format!("sample `{}`, descriptor {}: {e}", s.id, d.name()))?;
            }
            let path = out.join(format!("{}.csv", d.name()));
            outputs.write(&path, table.to_csv_string().as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    })
}

fn parse_deep(flags: &[String], file: BTreeMap<String, PathBuf>) -> Result<BTreeMap<String, PathBuf>, String> {
    let mut deep = file;
    for f in flags {
        let (name, path) = f
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| format!("--deep expects NAME=CSV, got `{f}`"))?;
        deep.insert(name.to_string(), PathBuf::from(path));
    }
    Ok(deep)
}

fn load_table(
    name: &str,
    features: &Path,
    deep: &BTreeMap<String, PathBuf>,
    root: Option<&Path>,
) -> Result<FeatureTable, String> {
    let path = match deep.get(name) {
        Some(p) => p.clone(),
        None => features.join(format!("{name}.csv")),
    };
    if !path.exists() {
        let hint = match name.parse::<Descriptor>() {
            Ok(d) => format!(
                "run `histofeat extract --root {} --desc {} --out {}` first",
                root.map(|r| r.display().to_string()).unwrap_or_else(|| "<dataset>".into()),
                d.name(),
                features.display()
            ),
            Err(_) => format!("pass it with `--deep {name}=<csv>`"),
        };
        return Err(format!(
            "feature file {} for `{name}` not found; {hint}",
            path.display()
        ));
    }
    let mut table = read_feature_csv(&path).map_err(|e| e.to_string())?;
    if table.descriptor() != name {
        // the file stem may differ from the name given on the command line
        let mut renamed = FeatureTable::new(name, table.dim()).map_err(|e| e.to_string())?;
        for (id, l, v) in table.iter() {
            renamed.insert(id, l, v.to_vec()).map_err(|e| e.to_string())?;
        }
        table = renamed;
    }
    Ok(table)
}

fn cmd_evaluate(a: EvaluateArgs, cfg: FileConfig) -> Result<(), String> {
    let out = required(a.out, cfg.out, "out")?;
    let features = a.features.or(cfg.features).unwrap_or_else(|| out.clone());
    let root = a.root.or(cfg.root);
    let deep = parse_deep(&a.deep, cfg.deep)?;
    let mut names: Vec<String> = required(a.desc, cfg.desc, "desc")?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.iter().any(|n| n == "all") {
        names = Descriptor::ALL.iter().map(|d| d.name().to_string()).collect();
    }
    names.dedup();
    let clf_names = a.clf.or(cfg.clf).unwrap_or_else(|| vec!["all".into()]);
    let variants: Vec<Variant> = if clf_names.iter().any(|c| c.trim() == "all") {
        Variant::ALL.to_vec()
    } else {
        clf_names
            .iter()
            .map(|c| c.parse().map_err(|e: histofeat::Error| e.to_string()))
            .collect::<Result<_, _>>()?
    };
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let folds = a.folds.or(cfg.folds).unwrap_or(5);
    let positive: Label = a
        .positive
        .or(cfg.positive)
        .unwrap_or_else(|| "normal".into())
        .parse()
        .map_err(|e: histofeat::Error| e.to_string())?;

    let mut tables: BTreeMap<String, FeatureTable> = BTreeMap::new();
    for name in &names {
        for part in name.split('+') {
            if !tables.contains_key(part) {
                let t = load_table(part, &features, &deep, root.as_deref())?;
                tables.insert(part.to_string(), t);
            }
        }
    }
    let mut sets: Vec<FeatureTable> = Vec::new();
    for name in &names {
        let parts: Vec<&FeatureTable> = name.split('+').map(|p| &tables[p]).collect();
        let t = if parts.len() == 1 {
            parts[0].clone()
        } else {
            combine(&parts).map_err(|e| format!("{name}: {e}"))?
        };
        sets.push(t);
    }

    let dataset = match &root {
        Some(r) => load_dataset(r).map_err(|e| e.to_string())?,
        None => {
            let samples = sets[0]
                .iter()
                .map(|(id, label, _)| Sample {
                    id: id.to_string(),
                    label,
                })
                .collect();
            Dataset::from_samples(".", samples).map_err(|e| e.to_string())?
        }
    };
    let aligned = sets
        .iter()
        .map(|t| align_to_dataset(t, &dataset).map_err(|e| format!("{}: {e}", t.descriptor())))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = dataset
        .stratified_folds(folds, seed)
        .map_err(|e| e.to_string())?;

    let specs: Vec<ClassifierSpec> = variants
        .iter()
        .map(|&v| {
            let mut s = ClassifierSpec::new(v).with_seed(seed);
            if let Some(t) = a.trees.or(cfg.trees) {
                s.trees = t;
            }
            if let Some(k) = a.k.or(cfg.k) {
                s.k = k;
            }
            if let Some(c) = a.c.or(cfg.c) {
                s.c = c;
            }
            if let Some(g) = a.gamma.or(cfg.gamma) {
                s.gamma = Some(g);
            }
            s.validate().map(|_| s).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;

    let cells: Vec<(usize, usize)> = (0..sets.len())
        .flat_map(|d| (0..specs.len()).map(move |c| (d, c)))
        .collect();
    eprintln!(
        "evaluating {} cell(s) over {} samples, {folds} folds",
        cells.len(),
        dataset.len()
    );
    let results: Vec<CvResult> = cells
        .par_iter()
        .map(|&(d, c)| {
            let (x, y) = &aligned[d];
            cross_validate(sets[d].descriptor(), x, y, &specs[c], &plan, positive)
                .map_err(|e| format!("{} / {}: {e}", sets[d].descriptor(), specs[c].variant))
        })
        .collect::<Result<_, _>>()?;
    for r in &results {
        if !r.nonconverged_folds.is_empty() {
            eprintln!(
                "warning: {} / {}: SMO hit its iteration cap in fold(s) {:?}",
                r.descriptor, r.classifier, r.nonconverged_folds
            );
        }
    }

    let mut rows: Vec<_> = results.iter().map(CvResult::row).collect();
    rows.sort_by(|a, b| {
        let rank = |c: &str| Variant::ALL.iter().position(|v| v.name() == c);
        (rank(&a.classifier), &a.descriptor).cmp(&(rank(&b.classifier), &b.descriptor))
    });
    fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
    with_rollback(|outputs| {
        if a.save_models {
            let dir = out.join("models");
            fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            for &(d, c) in &cells {
                let (x, y) = &aligned[d];
                let clf = Classifier::fit(&specs[c], x, y).map_err(|e| e.to_string())?;
                let mut buf = Vec::new();
                write_model(&mut buf, &clf).map_err(|e| e.to_string())?;
                let name = format!("{}_{}.hfm", specs[c].variant, sets[d].descriptor());
                outputs.write(&dir.join(name), &buf)?;
            }
        }
        outputs.write(&out.join("report.csv"), render_csv(&rows).as_bytes())?;
        outputs.write(&out.join("report.md"), render_table(&rows).as_bytes())?;
        eprintln!("wrote {}", out.join("report.md").display());
        Ok(())
    })
}

fn cmd_combine(a: CombineArgs) -> Result<(), String> {
    let tables = a
        .inputs
        .iter()
        .map(|p| read_feature_csv(p).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&FeatureTable> = tables.iter().collect();
    let combined = combine(&refs).map_err(|e| e.to_string())?;
    write_feature_csv(&combined, &a.out).map_err(|e| e.to_string())?;
    eprintln!(
        "wrote {} ({} rows x {} features)",
        a.out.display(),
        combined.len(),
        combined.dim()
    );
    Ok(())
}

fn cmd_report(a: ReportArgs, cfg: FileConfig) -> Result<(), String> {
    let out = required(a.out, cfg.out, "out")?;
    let csv = out.join("report.csv");
    let text = fs::read_to_string(&csv).map_err(|e| {
        format!(
            "{}: {e}; run `histofeat evaluate --out {}` first",
            csv.display(),
            out.display()
        )
    })?;
    let rows = parse_report_csv(&text, &csv).map_err(|e| e.to_string())?;
    write_atomic(&out.join("report.md"), render_table(&rows).as_bytes()).map_err(|e| e.to_string())
}
