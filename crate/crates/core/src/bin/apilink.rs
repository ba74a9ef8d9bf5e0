use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use apilink::api_db::ApiDatabase;
use apilink::classifier::{parse_corpus, train, CorpusRecord, NBModel};
use apilink::eval::{evaluate, load_truth, EvalConfig};
use apilink::pipeline::{
    parse_records, render_html, render_records, to_records, Featurizer, PipelineConfig, Resolver,
};
use apilink::text::{load_thread, load_threads};
use apilink::{Error, Result};

#[derive(Parser)]
#[command(
    name = "apilink",
    version,
    about = "Find and resolve API mentions in forum threads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Records,
    Html,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an API database and print a summary.
    Ingest {
        db: PathBuf,
        /// Write the validated entries back out as normalized JSON lines.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit a classifier from a labeled corpus.
    Train {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Needed when the corpus references mentions instead of features.
        #[arg(long)]
        db: Option<PathBuf>,
        /// Thread file or directory the corpus references.
        #[arg(long)]
        threads: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Resolve every mention of a thread file or directory of threads.
    Resolve {
        input: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "records")]
        format: Format,
        #[command(flatten)]
        tuning: Tuning,
        /// Let extrinsic filters run with a single resolved neighbor.
        #[arg(long)]
        relax_extrinsic_gate: bool,
        /// Output file; for html over a directory, an output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print candidate features, confidences and decisions for one thread.
    Explain {
        thread: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Score decision records against ground truth.
    Evaluate {
        decisions: PathBuf,
        truth: PathBuf,
        /// Give credit to overlapping spans.
        #[arg(long)]
        overlap: bool,
        /// Emit JSON lines instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Render decision records over their thread as HTML.
    Render {
        decisions: PathBuf,
        thread: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(clap::Args)]
struct Tuning {
    /// Sentences on each side of a mention that form its context.
    #[arg(long)]
    window: Option<usize>,
    /// Confidence a candidate must exceed to count as a hit.
    #[arg(long)]
    tau: Option<f64>,
    /// Smallest token-overlap score that still adds a candidate.
    #[arg(long)]
    min_token_sort: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Tuning {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = load_config(self.config.as_deref())?;
        if let Some(w) = self.window {
            config.window = w;
        }
        if let Some(t) = self.tau {
            config.tau = t;
        }
        if let Some(m) = self.min_token_sort {
            config.min_token_sort = m;
        }
        config.validate()?;
        Ok(config)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { db, output } => {
            let parsed = ApiDatabase::load(&db)?;
            let modules: usize = parsed.entries().iter().map(|e| e.modules.len()).sum();
            let types: usize = parsed.entries().iter().map(|e| e.type_index.len()).sum();
            eprintln!(
                "{}: {} apis, {} modules, {} dependency edges, {} indexed types",
                db.display(),
                parsed.len(),
                modules,
                parsed.graph().edge_count(),
                types
            );
            if let Some(out) = output {
                write(&out, &parsed.to_jsonl())?;
            }
            Ok(())
        }
        Command::Train {
            corpus,
            output,
            db,
            threads,
            config,
        } => {
            let records = parse_corpus(&read(&corpus)?, &corpus.display().to_string())?;
            let needs_threads = records
                .iter()
                .any(|r| matches!(r, CorpusRecord::Mention(_)));
            let examples = if needs_threads {
                let (Some(db), Some(threads)) = (db, threads) else {
                    return Err(Error::Training(
                        "corpus references mentions; pass --db and --threads".into(),
                    ));
                };
                let db = ApiDatabase::load(&db)?;
                let docs: BTreeMap<String, _> = load_threads(&threads)?
                    .into_iter()
                    .map(|d| (d.thread_id.clone(), d))
                    .collect();
                Featurizer::new(&db, load_config(config.as_deref())?)?
                    .training_examples(&records, &docs)?
            } else {
                records
                    .into_iter()
                    .map(|r| match r {
                        CorpusRecord::Features { features, label } => {
                            apilink::classifier::TrainingExample { features, label }
                        }
                        CorpusRecord::Mention(_) => unreachable!(),
                    })
                    .collect()
            };
            let model = train(&examples)?;
            model.save(&output)?;
            eprintln!(
                "trained on {} examples ({} TRUE_API, {} FALSE_MENTION)",
                examples.len(),
                model.true_api.count,
                model.false_mention.count
            );
            Ok(())
        }
        Command::Resolve {
            input,
            db,
            model,
            format,
            tuning,
            relax_extrinsic_gate,
            output,
        } => {
            let mut config = tuning.resolve()?;
            config.relax_extrinsic_gate |= relax_extrinsic_gate;
            let db = ApiDatabase::load(&db)?;
            let model = NBModel::load(&model)?;
            let resolver = Resolver::new(&db, &model, config)?;
            let docs = load_threads(&input)?;
            match format {
                Format::Records => {
                    let mut text = String::new();
                    for doc in &docs {
                        let decisions = resolver.resolve_thread(doc)?;
                        text.push_str(&render_records(&to_records(&decisions, &db)));
                    }
                    emit(output.as_deref(), &text)
                }
                Format::Html if input.is_dir() => {
                    let Some(dir) = output else {
                        return Err(Error::Render(
                            "html over a directory needs --output <dir>".into(),
                        ));
                    };
                    fs::create_dir_all(&dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    for doc in &docs {
                        let records = to_records(&resolver.resolve_thread(doc)?, &db);
                        let html = render_html(&records, doc)?;
                        write(&dir.join(format!("{}.html", doc.thread_id)), &html)?;
                    }
                    Ok(())
                }
                Format::Html => {
                    let doc = &docs[0];
                    let records = to_records(&resolver.resolve_thread(doc)?, &db);
                    emit(output.as_deref(), &render_html(&records, doc)?)
                }
            }
        }
        Command::Explain {
            thread,
            db,
            model,
            tuning,
        } => {
            let db = ApiDatabase::load(&db)?;
            let model = NBModel::load(&model)?;
            let resolver = Resolver::new(&db, &model, tuning.resolve()?)?;
            let doc = load_thread(&thread)?;
            let traces: Vec<_> = resolver
                .analyze_thread(&doc)?
                .iter()
                .map(|a| a.trace())
                .collect();
            let mut text = serde_json::to_string_pretty(&traces).expect("traces serialize");
            text.push('\n');
            emit(None, &text)
        }
        Command::Evaluate {
            decisions,
            truth,
            overlap,
            json,
        } => {
            let records = parse_records(&read(&decisions)?, &decisions.display().to_string())?;
            let truth = load_truth(&truth)?;
            let report = evaluate(&records, &truth, &EvalConfig { overlap })?;
            emit(
                None,
                &if json {
                    report.to_jsonl()
                } else {
                    report.to_table()
                },
            )
        }
        Command::Render {
            decisions,
            thread,
            output,
        } => {
            let records = parse_records(&read(&decisions)?, &decisions.display().to_string())?;
            let doc = load_thread(&thread)?;
            write(&output, &render_html(&records, &doc)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
