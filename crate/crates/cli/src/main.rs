use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use relwords::clustering::Label;
use relwords::corpus::{self, ArchiveFetcher, Corpus, JsonlFields, UreqClient, YearMonth};
use relwords::pipeline::{self, PipelineConfig, StoredRun};
use relwords::report::{self, Bucket, Canvas};
use relwords::text;
use relwords::write_atomic;

#[derive(Parser)]
#[command(
    name = "relwords",
    version,
    about = "Cluster a text corpus and summarize each topic by its relevant words"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a directory of text files or a JSON-lines file into the canonical corpus format
    Ingest(IngestArgs),
    /// Download monthly archives into a corpus file (responses are cached)
    Fetch(FetchArgs),
    /// Tokenize, vectorize, embed and cluster a corpus
    Cluster(ClusterArgs),
    /// Write the per-cluster relevance table as CSV
    Relevant(RunArgs),
    /// Render a word cloud for one cluster (or all clusters)
    Wordcloud(WordcloudArgs),
    /// Contrast documents before and after a date in a two-colour word cloud
    Contrast(ContrastArgs),
    /// Highlight relevant words in one document as HTML
    Highlight(HighlightArgs),
    /// Term frequency over time as CSV
    Trends(TrendsArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of plain-text files, one document per file
    #[arg(long, conflicts_with = "jsonl", required_unless_present = "jsonl")]
    dir: Option<PathBuf>,
    /// JSON-lines input
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long, default_value = "id")]
    id_field: String,
    #[arg(long, default_value = "text")]
    text_field: String,
    #[arg(long, default_value = "date")]
    date_field: String,
    #[arg(long, default_value = "group")]
    group_field: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FetchArgs {
    /// Month or inclusive month range, e.g. 2017-01 or 2016-12..2017-01
    #[arg(long)]
    months: String,
    /// URL template with {year}, {month} and {key} placeholders
    #[arg(
        long,
        default_value = "https://api.nytimes.com/svc/archive/v1/{year}/{month}.json?api-key={key}"
    )]
    endpoint: String,
    #[arg(long, env = "RELWORDS_API_KEY", hide_env_values = true)]
    api_key: String,
    #[arg(long, default_value = ".relwords-cache")]
    cache_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    retries: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long, default_value_t = 1)]
    min_df: usize,
    /// Bigram count discount
    #[arg(long, default_value_t = text::DEFAULT_DISCOUNT)]
    delta: u64,
    /// Seed for the random bigram baseline
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of kernel PCA components
    #[arg(long, default_value_t = 250)]
    components: usize,
    /// DBSCAN cosine-distance threshold
    #[arg(long, default_value_t = 0.45)]
    eps: f64,
    /// DBSCAN minimum neighbourhood size, the point itself included
    #[arg(long, default_value_t = 3)]
    min_pts: usize,
    /// Floor for the FPR in the rate quotient
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long, default_value_t = 50)]
    top_k: usize,
}

impl ConfigArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            min_df: self.min_df,
            bigram_discount: self.delta,
            bigram_seed: self.seed,
            kpca_components: self.components,
            eps: self.eps,
            min_pts: self.min_pts,
            epsilon: self.epsilon,
            top_k: self.top_k,
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Directory receiving labels.csv, manifest.json and intermediates
    #[arg(long, default_value = "run")]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "run")]
    run_dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CanvasArgs {
    #[arg(long, default_value_t = 800.0)]
    width: f64,
    #[arg(long, default_value_t = 600.0)]
    height: f64,
}

impl CanvasArgs {
    fn canvas(&self) -> Result<Canvas> {
        if !(self.width > 0.0 && self.height > 0.0) {
            bail!("canvas dimensions must be positive");
        }
        Ok(Canvas {
            width: self.width,
            height: self.height,
        })
    }
}

#[derive(Args)]
struct WordcloudArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "run")]
    run_dir: PathBuf,
    /// Cluster id; all clusters when omitted
    #[arg(long)]
    cluster: Option<usize>,
    /// Words per cloud (defaults to the run's top_k)
    #[arg(long)]
    top: Option<usize>,
    /// Output directory for cluster<N>.svg
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    canvas: CanvasArgs,
}

#[derive(Args)]
struct ContrastArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Documents at or after this date form the upper (green) group
    #[arg(long)]
    boundary: String,
    #[arg(long, default_value = "contrast.svg")]
    out: PathBuf,
    /// Optional relevance CSV for the two groups
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    canvas: CanvasArgs,
}

#[derive(Args)]
struct HighlightArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "run")]
    run_dir: PathBuf,
    /// Document id
    #[arg(long)]
    doc: String,
    /// Expected cluster of the document; defaults to its assigned cluster
    #[arg(long)]
    cluster: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrendsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Comma-separated terms; `a_b` matches the adjacent pair "a b"
    #[arg(long, value_delimiter = ',')]
    terms: Vec<String>,
    #[arg(long, default_value = "day")]
    by: String,
    #[arg(long, default_value = "trends.csv")]
    out: PathBuf,
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    corpus::load_jsonl(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn ingest(args: IngestArgs) -> Result<()> {
    let corpus = match (&args.dir, &args.jsonl) {
        (Some(dir), _) => corpus::load_dir(dir)?,
        (None, Some(path)) => corpus::load_jsonl_with(
            path,
            &JsonlFields {
                id: args.id_field,
                text: args.text_field,
                date: args.date_field,
                group: args.group_field,
            },
        )?,
        (None, None) => bail!("one of --dir or --jsonl is required"),
    };
    corpus.write_jsonl(&args.out)?;
    println!("{} documents written to {}", corpus.len(), args.out.display());
    Ok(())
}

fn fetch(args: FetchArgs) -> Result<()> {
    let months = YearMonth::parse_range(&args.months)?;
    let fetcher = ArchiveFetcher::new(&args.endpoint, &args.api_key, &args.cache_dir, UreqClient::default())
        .with_retries(args.retries, std::time::Duration::from_millis(500));
    let corpus = fetcher.fetch(&months)?;
    corpus.write_jsonl(&args.out)?;
    println!("{} documents written to {}", corpus.len(), args.out.display());
    Ok(())
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let run = pipeline::run(&corpus, &args.config.config()).context("clustering")?;
    let manifest = pipeline::write_run(&run, &corpus, &args.out_dir)?;
    println!(
        "{} clusters, {} noise documents ({} documents, {} terms, {} components)",
        manifest.n_clusters, manifest.n_noise, manifest.n_docs, manifest.n_terms, manifest.embedding_dim
    );
    for (c, size) in run.assignment.sizes().iter().enumerate() {
        println!("cluster {c}: {size} documents");
    }
    Ok(())
}

fn load_run(corpus_path: &Path, run_dir: &Path) -> Result<(Corpus, StoredRun)> {
    let corpus = load_corpus(corpus_path)?;
    let stored =
        StoredRun::load(run_dir, &corpus).with_context(|| format!("reading run artifacts in {}", run_dir.display()))?;
    Ok((corpus, stored))
}

fn relevant(args: RunArgs) -> Result<()> {
    let (_, stored) = load_run(&args.corpus, &args.run_dir)?;
    let table = stored.relevance()?;
    let out = args.out.unwrap_or_else(|| args.run_dir.join("relevance.csv"));
    write_atomic(&out, table.to_csv().as_bytes())?;
    println!("{}", out.display());
    Ok(())
}

fn wordcloud(args: WordcloudArgs) -> Result<()> {
    let (_, stored) = load_run(&args.corpus, &args.run_dir)?;
    let table = stored.relevance()?;
    let top = args.top.unwrap_or(stored.manifest.config.top_k);
    let canvas = args.canvas.canvas()?;
    let clusters: Vec<usize> = match args.cluster {
        Some(c) => vec![c],
        None => (0..table.n_clusters()).collect(),
    };
    for c in clusters {
        let ranked = table.rank_terms(c, top)?;
        let spec = if ranked.is_empty() {
            log::warn!("cluster {c} has no relevant words");
            report::WordCloudSpec::empty(canvas)
        } else {
            report::layout_wordcloud(&ranked, top, canvas)?
        };
        let path = args.out_dir.join(format!("cluster{c}.svg"));
        report::write_svg(&spec, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn contrast(args: ContrastArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let boundary = corpus::parse_timestamp(&args.boundary)?;
    let config = args.config.config();
    let table = pipeline::contrast(&corpus, boundary, &config)?;
    let upper = table.rank_terms(0, config.top_k)?;
    let lower = table.rank_terms(1, config.top_k)?;
    report::render_contrast_cloud(&upper, &lower, config.top_k, args.canvas.canvas()?, &args.out)?;
    if let Some(path) = &args.table {
        write_atomic(path, table.to_csv().as_bytes())?;
    }
    println!("{}", args.out.display());
    Ok(())
}

fn highlight(args: HighlightArgs) -> Result<()> {
    let (corpus, stored) = load_run(&args.corpus, &args.run_dir)?;
    let (k, doc) = corpus
        .get(&args.doc)
        .with_context(|| format!("no document `{}`", args.doc))?;
    let label = stored.assignment.labels[k];
    let cluster = match (args.cluster, label) {
        (Some(c), _) => c,
        (None, Label::Cluster(c)) => c,
        (None, Label::Noise) => bail!("document `{}` is noise and belongs to no cluster", args.doc),
    };
    let table = stored.relevance()?;
    let html = report::highlight_html(doc, &stored.streams[k], label, &table, cluster)?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.html", sanitize(&args.doc))));
    write_atomic(&out, html.as_bytes())?;
    println!("{}", out.display());
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn trends(args: TrendsArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus)?;
    let bucket: Bucket = args.by.parse()?;
    let streams = text::tokenize_corpus(&corpus);
    let terms: Vec<String> = args
        .terms
        .iter()
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    let table = report::term_trends(&corpus, &streams, &terms, bucket)?;
    write_atomic(&args.out, table.to_csv().as_bytes())?;
    println!("{}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Fetch(a) => fetch(a),
        Command::Cluster(a) => cluster(a),
        Command::Relevant(a) => relevant(a),
        Command::Wordcloud(a) => wordcloud(a),
        Command::Contrast(a) => contrast(a),
        Command::Highlight(a) => highlight(a),
        Command::Trends(a) => trends(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
