use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use boxvis::artifacts::write_json;
use boxvis::boxmodel::{train, Model, Tasks};
use boxvis::config::RunConfig;
use boxvis::corpus::{load_corpus, split_corpus, Corpus};
use boxvis::discretizer::{fit_all, DiscretizationMap};
use boxvis::error::Error;
use boxvis::evalkit::{evaluate, format_report};
use boxvis::explain::{explain, Explanation};
use boxvis::features::{FeatureDump, FeatureRegistry};
use boxvis::inference::{recommend, RankedType, Recommendation};
use boxvis::kgraph::{build_graph, graph_stats, KnowledgeGraph};
use boxvis::synth::{generate_synthetic_corpus, plant_signature_groups, Rulebook};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "boxvis",
    version,
    about = "Chart-type and axis recommendation for two-column tables"
)]
struct Cli {
    /// TOML or JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus from a rulebook.
    Synth {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// `singleton`, `two_choice` or a rulebook JSON file.
        #[arg(long, default_value = "singleton")]
        rulebook: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shuffle a corpus into train and test files.
    Split {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
        /// After splitting, copy each synthetic pair once per admissible
        /// type of this rulebook.
        #[arg(long)]
        plant_groups: Option<String>,
    },
    /// Extract single- and cross-column features.
    Extract {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit discretization bins on a training feature dump.
    FitBins {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the knowledge graph from training features and bins.
    BuildKg {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        bins: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        include_negative_booleans: bool,
    },
    /// Train box embeddings on a knowledge graph.
    Train {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the training report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperFlags,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Recommend axes and chart types with explanations.
    Recommend {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        bins: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// JSON-lines output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write full inference traces to this JSON-lines file.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[command(flatten)]
        inference: InferenceFlags,
    },
    /// Score a model on a held-out corpus.
    Evaluate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        bins: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also score against the admissible sets of this rulebook.
        #[arg(long)]
        rulebook: Option<String>,
        #[command(flatten)]
        inference: InferenceFlags,
    },
}

#[derive(Args)]
struct HyperFlags {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long)]
    no_cross_features: bool,
    #[arg(long)]
    no_project_columns: bool,
    #[arg(long, value_parser = parse_tasks)]
    tasks: Option<Tasks>,
}

#[derive(Args)]
struct InferenceFlags {
    #[arg(long)]
    containment_tol: Option<f64>,
    #[arg(long)]
    no_cross_features: bool,
}

fn parse_tasks(s: &str) -> Result<Tasks, String> {
    match s {
        "joint" => Ok(Tasks::Joint),
        "axis" => Ok(Tasks::Axis),
        "type" => Ok(Tasks::Type),
        _ => Err(format!("expected joint, axis or type, got {s:?}")),
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } => EXIT_DIVERGENCE,
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

/// The flag value, else the config value, else a usage error naming both.
fn pick(flag: Option<PathBuf>, config: &Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    flag.or_else(|| config.clone()).ok_or_else(|| {
        usage(format!(
            "missing --{what} (or paths.{what} in the config file)"
        ))
    })
}

/// Checks that an input artifact exists, naming the command that makes it.
fn prerequisite(path: &Path, producer: &str) -> CmdResult {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_DATA,
            message: format!(
                "{} not found; create it with `boxvis {producer}`",
                path.display()
            ),
        })
    }
}

fn rulebook(spec: &str) -> Result<Rulebook, Failure> {
    Ok(match spec {
        "singleton" => Rulebook::singleton(),
        "two_choice" => Rulebook::two_choice(),
        path => Rulebook::load(Path::new(path))?,
    })
}

fn read_corpus(path: &Path) -> Result<Corpus, Failure> {
    prerequisite(path, "synth")?;
    let (corpus, warnings) = load_corpus(path, false)?;
    for w in warnings {
        log::warn!("{}: {:?}", path.display(), w);
    }
    if corpus.is_empty() {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!("{} holds no pairs", path.display()),
        });
    }
    Ok(corpus)
}

fn load_model(path: &Path, bins: &DiscretizationMap) -> Result<Model, Failure> {
    prerequisite(path, "train")?;
    Ok(Model::load_checked(path, bins)?)
}

fn load_bins(path: &Path) -> Result<DiscretizationMap, Failure> {
    prerequisite(path, "fit-bins")?;
    Ok(DiscretizationMap::load(path)?)
}

fn apply_inference(cfg: &mut RunConfig, f: &InferenceFlags) {
    if let Some(t) = f.containment_tol {
        cfg.containment_tol = t;
    }
    if f.no_cross_features {
        cfg.use_cross_features = false;
    }
}

/// One line of `recommend` output.
#[derive(Serialize)]
struct RecommendRecord<'a> {
    id: &'a str,
    axes: &'a std::collections::BTreeMap<String, boxvis::corpus::Axis>,
    ranking: &'a [RankedType],
    contained: &'a [boxvis::corpus::ChartType],
    recommended: &'a [boxvis::corpus::ChartType],
    ranked_fallback: bool,
    explanation: &'a Explanation,
    trace_ref: Option<String>,
}

fn json_line<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::from(Error::from(e)))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = match &cli.config {
        Some(p) => {
            prerequisite(p, "--help")?;
            RunConfig::load(p)?
        }
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Synth {
            n,
            rulebook: rb,
            seed,
            out,
        } => {
            let corpus = generate_synthetic_corpus(n, &rulebook(&rb)?, seed)?;
            corpus.write_jsonl(&out)?;
            log::info!("wrote {} pairs to {}", corpus.len(), out.display());
        }
        Command::Split {
            corpus,
            train_fraction,
            seed,
            train_out,
            test_out,
            plant_groups,
        } => {
            let path = pick(corpus, &cfg.paths.corpus, "corpus")?;
            let (mut tr, mut te) = split_corpus(&read_corpus(&path)?, train_fraction, seed)?;
            if let Some(spec) = plant_groups {
                let rb = rulebook(&spec)?;
                tr = plant_signature_groups(&tr, &rb)?;
                te = plant_signature_groups(&te, &rb)?;
            }
            tr.write_jsonl(&train_out)?;
            te.write_jsonl(&test_out)?;
            log::info!("{} train / {} test pairs", tr.len(), te.len());
        }
        Command::Extract { corpus, out } => {
            let path = pick(corpus, &cfg.paths.corpus, "corpus")?;
            let out = pick(out, &cfg.paths.features, "features")?;
            let dump = FeatureDump::from_corpus(&read_corpus(&path)?)?;
            dump.save(&out)?;
            log::info!("extracted {} pairs", dump.pairs.len());
        }
        Command::FitBins { features, out } => {
            let path = pick(features, &cfg.paths.features, "features")?;
            let out = pick(out, &cfg.paths.bins, "bins")?;
            prerequisite(&path, "extract")?;
            let bins = fit_all(&FeatureDump::load(&path)?)?;
            bins.save(&out)?;
            log::info!("fitted {} continuous features", bins.features.len());
        }
        Command::BuildKg {
            features,
            bins,
            out,
            include_negative_booleans,
        } => {
            let path = pick(features, &cfg.paths.features, "features")?;
            let bins = pick(bins, &cfg.paths.bins, "bins")?;
            let out = pick(out, &cfg.paths.graph, "graph")?;
            cfg.include_negative_booleans |= include_negative_booleans;
            prerequisite(&path, "extract")?;
            let map = load_bins(&bins)?;
            let kg = build_graph(&FeatureDump::load(&path)?, &map, cfg.graph_options())?;
            kg.save(&out)?;
            let stats = graph_stats(&kg);
            log::info!("{} entities, {} triples", kg.len(), kg.triples().len());
            log::debug!("{}", json_line(&stats)?);
        }
        Command::Train {
            graph,
            out,
            report,
            hyper: h,
            model: m,
        } => {
            let path = pick(graph, &cfg.paths.graph, "graph")?;
            let out = pick(out, &cfg.paths.model, "model")?;
            let hp = &mut cfg.hyper;
            macro_rules! set {
                ($($f:ident),*) => { $(if let Some(v) = h.$f { hp.$f = v; })* };
            }
            set!(d, gamma, alpha, beta, k, lr, epochs, batch_size, seed);
            if m.no_cross_features {
                cfg.use_cross_features = false;
            }
            if m.no_project_columns {
                cfg.project_columns_before_ds_intersection = false;
            }
            if let Some(t) = m.tasks {
                cfg.tasks = t;
            }
            cfg.validate()?;
            prerequisite(&path, "build-kg")?;
            let kg = KnowledgeGraph::load(&path)?;
            let (model, rep) = train(&kg, &cfg.hyper, &cfg.model_options())?;
            model.save(&out)?;
            log::info!("loss {:.4} -> {:.4}", rep.initial_loss, rep.final_loss);
            if let Some(r) = report {
                write_json(&r, &rep)?;
            }
        }
        Command::Recommend {
            corpus,
            bins,
            model,
            out,
            traces,
            inference,
        } => {
            apply_inference(&mut cfg, &inference);
            cfg.validate()?;
            let path = pick(corpus, &cfg.paths.corpus, "corpus")?;
            let map = load_bins(&pick(bins, &cfg.paths.bins, "bins")?)?;
            let model = load_model(&pick(model, &cfg.paths.model, "model")?, &map)?;
            let corpus = read_corpus(&path)?;
            let options = cfg.inference_options();
            let registry = FeatureRegistry::builtin();
            let mut lines = String::new();
            let mut trace_lines = String::new();
            for pair in &corpus.pairs {
                let rec: Recommendation = recommend(pair, &model, &map, &options)?;
                let exp = explain(&rec, registry);
                let trace_ref = traces
                    .as_ref()
                    .map(|t| format!("{}#{}", t.display(), rec.id));
                lines += &json_line(&RecommendRecord {
                    id: &rec.id,
                    axes: &rec.axes,
                    ranking: &rec.ranking,
                    contained: &rec.contained,
                    recommended: &rec.recommended,
                    ranked_fallback: rec.ranked_fallback,
                    explanation: &exp,
                    trace_ref,
                })?;
                lines.push('\n');
                if traces.is_some() {
                    trace_lines +=
                        &json_line(&serde_json::json!({"id": rec.id, "trace": rec.trace}))?;
                    trace_lines.push('\n');
                }
            }
            match out.or(cfg.paths.output.clone()) {
                Some(p) => write_text(&p, &lines)?,
                None => print!("{lines}"),
            }
            if let Some(t) = traces {
                write_text(&t, &trace_lines)?;
            }
        }
        Command::Evaluate {
            corpus,
            bins,
            model,
            out,
            rulebook: rb,
            inference,
        } => {
            apply_inference(&mut cfg, &inference);
            cfg.validate()?;
            let path = pick(corpus, &cfg.paths.corpus, "corpus")?;
            let map = load_bins(&pick(bins, &cfg.paths.bins, "bins")?)?;
            let model = load_model(&pick(model, &cfg.paths.model, "model")?, &map)?;
            let rb = rb.map(|s| rulebook(&s)).transpose()?;
            let eval = evaluate(
                &model,
                &map,
                &read_corpus(&path)?,
                &cfg.inference_options(),
                rb.as_ref(),
            )?;
            print!("{}", format_report(&eval.report));
            if let Some(p) = out.or(cfg.paths.output.clone()) {
                write_json(&p, &eval.report)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
