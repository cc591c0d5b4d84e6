use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use tweetsent::corpus::{
    build_corpus, load_dataset, read_corpus, shuffle_split, shuffle_split_per_source, write_corpus, LabeledTweet,
    SentimentLabel, Source,
};
use tweetsent::embeddings::EmbeddingTable;
use tweetsent::eval::{compare, confusion, report, EvalReport};
use tweetsent::lstm::{
    load_checkpoint, predict_tweets, prepare_examples, save_checkpoint, train_examples, Activation, TrainConfig,
};
use tweetsent::normalize::normalize_all;
use tweetsent::vader::{classify_corpus, Lexicon, RuleConfig};
use tweetsent::Execution;

#[derive(Parser)]
#[command(name = "tweetsent", version, about = "Three-class tweet sentiment: corpus prep, LSTM training, VADER baseline")]
struct Cli {
    /// Run every batch operation on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load raw datasets, normalize them and merge into one corpus file.
    Ingest(IngestArgs),
    /// Shuffle a corpus and write train.tsv / test.tsv.
    Split(SplitArgs),
    /// Train the LSTM classifier on a normalized corpus file.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a normalized test file.
    Eval(EvalArgs),
    /// Score a raw test file with the lexicon baseline.
    Vader(VaderArgs),
    /// Print two saved reports side by side.
    Compare(CompareArgs),
    /// Count tweets per label in a corpus file.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Datasets as SOURCE=PATH, e.g. `sts-gold=data/sts_gold.csv`.
    #[arg(required = true, value_name = "SOURCE=PATH")]
    sources: Vec<String>,
    /// Normalized corpus output.
    #[arg(long)]
    out: PathBuf,
    /// Manifest output (defaults to `<out>.manifest.json`).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Also write the un-normalized text, line-aligned with the corpus.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Add a source column so that `split --per-source` works.
    #[arg(long)]
    keep_source: bool,
}

#[derive(Args)]
struct SplitArgs {
    corpus: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Split each source separately (needs `ingest --keep-source`).
    #[arg(long)]
    per_source: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    train: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Checkpoint output.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch history (defaults to `<out>.history.csv`).
    #[arg(long)]
    history: Option<PathBuf>,
    /// Continue from an existing checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    activation: Option<Activation>,
}

#[derive(Args)]
struct EvalArgs {
    test: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Report JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "LSTM")]
    name: String,
}

#[derive(Args)]
struct VaderArgs {
    /// Raw (un-normalized) `label<TAB>text` file.
    test: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    boosters: Option<PathBuf>,
    #[arg(long)]
    negators: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "VADER")]
    name: String,
}

#[derive(Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    corpus: PathBuf,
}

/// Writes next to the target and renames, so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.with_context(|| format!("writing {}", path.display()))
}

fn corpus_bytes(tweets: &[LabeledTweet], with_source: bool) -> Vec<u8> {
    let mut buf = Vec::new();
    write_corpus(&mut buf, tweets, with_source).expect("writing to memory");
    buf
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_source_arg(arg: &str) -> Result<(Source, PathBuf)> {
    let (id, path) = arg
        .split_once('=')
        .with_context(|| format!("expected SOURCE=PATH, got `{arg}`"))?;
    Ok((id.parse()?, PathBuf::from(path)))
}

// Raw text keeps its original characters apart from the ones that would
// break the line format.
fn flatten_controls(text: &str) -> String {
    text.chars()
        .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

fn ingest(args: IngestArgs, exec: Execution) -> Result<()> {
    let mut records = Vec::new();
    let mut seen = Vec::new();
    for arg in &args.sources {
        let (source, path) = parse_source_arg(arg)?;
        ensure!(!seen.contains(&source), "source {source} given twice");
        seen.push(source);
        records.extend(load_dataset(&path, source).with_context(|| format!("source {source}"))?);
    }
    let (mut corpus, manifest) = build_corpus(&records);

    if let Some(raw_path) = &args.raw {
        let raw: Vec<LabeledTweet> = corpus
            .iter()
            .map(|t| LabeledTweet {
                text: flatten_controls(&t.text),
                ..t.clone()
            })
            .collect();
        write_atomic(raw_path, &corpus_bytes(&raw, args.keep_source))?;
    }

    let texts: Vec<&str> = corpus.iter().map(|t| t.text.as_str()).collect();
    let normalized = normalize_all(&texts, exec);
    for (t, n) in corpus.iter_mut().zip(normalized) {
        t.text = n.into_string();
    }
    write_atomic(&args.out, &corpus_bytes(&corpus, args.keep_source))?;
    let manifest_path = args.manifest.unwrap_or_else(|| with_suffix(&args.out, ".manifest.json"));
    write_atomic(&manifest_path, manifest.to_json().as_bytes())?;

    for m in manifest.reconcile() {
        eprintln!("warning: {m}");
    }
    let total = manifest.total();
    println!(
        "retained {} (positive {}, negative {}, neutral {}), dropped {}",
        total.retained(),
        total.positive,
        total.negative,
        total.neutral,
        total.dropped
    );
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    let split = if args.per_source {
        shuffle_split_per_source(&corpus, args.fraction, args.seed)?
    } else {
        shuffle_split(&corpus, args.fraction, args.seed)?
    };
    let with_source = corpus.iter().all(|t| t.source.is_some());
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_atomic(&args.out.join("train.tsv"), &corpus_bytes(&split.train, with_source))?;
    write_atomic(&args.out.join("test.tsv"), &corpus_bytes(&split.test, with_source))?;
    println!("train {}, test {}", split.train.len(), split.test.len());
    Ok(())
}

fn load_table(path: &Path) -> Result<EmbeddingTable> {
    let table = EmbeddingTable::load(path)?;
    if table.duplicate_count() > 0 {
        eprintln!(
            "warning: {}: {} duplicate tokens, first occurrence kept",
            path.display(),
            table.duplicate_count()
        );
    }
    Ok(table)
}

fn train(args: TrainArgs, exec: Execution) -> Result<()> {
    let table = load_table(&args.embeddings)?;
    let tweets = read_corpus(&args.train)?;

    let (mut config, init) = match &args.resume {
        Some(path) => {
            let (params, meta) = load_checkpoint(path)?;
            let saved: TrainConfig =
                serde_json::from_str(&meta).with_context(|| format!("{}: unreadable training metadata", path.display()))?;
            ensure!(
                params.input_dim() == table.dim(),
                "embedding dimension {} does not match checkpoint input dimension {}",
                table.dim(),
                params.input_dim()
            );
            if let Some(h) = args.hidden {
                ensure!(h == params.hidden(), "--hidden {h} conflicts with checkpoint hidden size {}", params.hidden());
            }
            (saved, Some(params))
        }
        None => (TrainConfig::default(), None),
    };
    config.epochs = args.epochs.unwrap_or(config.epochs);
    config.batch_size = args.batch_size.unwrap_or(config.batch_size);
    config.hidden_size = args.hidden.unwrap_or(config.hidden_size);
    config.max_len = args.max_len.unwrap_or(config.max_len);
    config.learning_rate = args.lr.unwrap_or(config.learning_rate);
    config.seed = args.seed.unwrap_or(config.seed);
    config.activation = args.activation.unwrap_or(config.activation);
    config.execution = exec;
    eprintln!("{}", config.echo());

    let examples = prepare_examples(&tweets, &table, config.max_len);
    let outcome = train_examples(&examples, &table, &config, init)?;

    let meta = serde_json::to_string(&config)?;
    save_checkpoint(&args.out, &outcome.params, &meta)?;
    let mut history = String::new();
    for e in &outcome.history {
        history.push_str(&format!("{},{},{}\n", e.epoch, e.mean_loss, e.accuracy));
    }
    let history_path = args.history.unwrap_or_else(|| with_suffix(&args.out, ".history.csv"));
    write_atomic(&history_path, history.as_bytes())?;
    if let Some(last) = outcome.history.last() {
        println!(
            "epoch {}: mean loss {:.4}, train accuracy {:.4}",
            last.epoch, last.mean_loss, last.accuracy
        );
    }
    Ok(())
}

fn finish_report(pairs: &[(SentimentLabel, SentimentLabel)], name: &str, out: Option<&Path>) -> Result<()> {
    let r = report(&confusion(pairs), name)?;
    if let Some(path) = out {
        write_atomic(path, r.to_json().as_bytes())?;
    }
    print!("{}", compare_single(&r));
    Ok(())
}

fn compare_single(r: &EvalReport) -> String {
    let mut s = tweetsent::eval::compare_table(&[r]);
    s.push_str(&format!("macro F1 {:.4} over {} tweets\n", r.macro_f1, r.total));
    s.push_str("confusion (rows gold, columns predicted: positive negative neutral)\n");
    for row in r.confusion.0 {
        s.push_str(&format!("{} {} {}\n", row[0], row[1], row[2]));
    }
    s
}

fn eval(args: EvalArgs, exec: Execution) -> Result<()> {
    let (params, meta) = load_checkpoint(&args.model)?;
    let config: TrainConfig = serde_json::from_str(&meta)
        .with_context(|| format!("{}: unreadable training metadata", args.model.display()))?;
    let table = load_table(&args.embeddings)?;
    ensure!(
        params.input_dim() == table.dim(),
        "embedding dimension {} does not match checkpoint input dimension {}",
        table.dim(),
        params.input_dim()
    );
    let tweets = read_corpus(&args.test)?;
    let preds = predict_tweets(&params, &tweets, &table, config.max_len, config.activation, exec);
    let pairs: Vec<_> = tweets.iter().zip(&preds).map(|(t, p)| (t.label, p.label)).collect();
    finish_report(&pairs, &args.name, args.out.as_deref())
}

fn vader(args: VaderArgs) -> Result<()> {
    let lexicon = Lexicon::load(&args.lexicon)?;
    if !lexicon.rejected().is_empty() {
        eprintln!(
            "warning: {}: {} entries outside [-4, 4] ignored",
            args.lexicon.display(),
            lexicon.rejected().len()
        );
    }
    let mut rules = RuleConfig::default();
    if let Some(p) = &args.boosters {
        rules = rules.with_boosters_file(p).with_context(|| format!("reading {}", p.display()))?;
    }
    if let Some(p) = &args.negators {
        rules = rules.with_negators_file(p).with_context(|| format!("reading {}", p.display()))?;
    }
    let tweets = read_corpus(&args.test)?;
    let pairs = classify_corpus(&tweets, &lexicon, &rules);
    finish_report(&pairs, &args.name, args.out.as_deref())
}

fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EvalReport::from_json(&text).with_context(|| format!("{}: not a report", path.display()))
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    if corpus.is_empty() {
        bail!("{}: empty corpus", args.corpus.display());
    }
    let mut counts = [0usize; 3];
    for t in &corpus {
        counts[t.label.index()] += 1;
    }
    let mut out = std::io::stdout().lock();
    for label in SentimentLabel::ALL {
        writeln!(out, "{label}\t{}", counts[label.index()])?;
    }
    writeln!(out, "total\t{}", corpus.len())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Ingest(a) => ingest(a, exec),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a, exec),
        Command::Eval(a) => eval(a, exec),
        Command::Vader(a) => vader(a),
        Command::Compare(a) => {
            print!("{}", compare(&read_report(&a.first)?, &read_report(&a.second)?));
            Ok(())
        }
        Command::Summarize(a) => summarize(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace(['\n', '\r'], " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
