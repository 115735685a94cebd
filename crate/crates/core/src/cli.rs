//! Command-line front end. Every command prints one JSON document on
//! standard output; failures print `{"error": <kind>, "message": ...}`.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::extract::{build_guide_set, extract, ExtractionConfig};
use crate::kg::{self, DistanceMatrix, DEFAULT_MAX_DIST, DEFAULT_MIN_EDGE_DIST, DEFAULT_SELF_DIST};
use crate::rewards::{EpisodeInput, RewardConfig, DEFAULT_BETA, DEFAULT_GAMMA, DEFAULT_HORIZON};
use crate::sets::{expand, intersect, set_distance, ConceptSet, OperationParams, DEFAULT_K, DEFAULT_R};
use crate::vocab::{self, ConceptVocabulary};

pub const MATRIX_ENV: &str = "CONCEPTSET_MATRIX";

/// Significant digits kept for every number in command output.
pub const OUTPUT_DIGITS: usize = 9;

#[derive(Debug, Parser)]
#[command(name = "conceptset", version, about = "Concept-set algebra and persona dialogue rewards")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,

    /// Print every effective parameter and exit.
    #[arg(long, global = true)]
    pub show_config: bool,

    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CliConfig {
    /// Distance matrix file.
    #[arg(long, global = true, env = MATRIX_ENV)]
    pub matrix: Option<PathBuf>,

    /// Vocabulary file, one lemma per line.
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,

    /// Stopword list replacing the bundled English list.
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,

    /// Expansion size.
    #[arg(long, global = true, default_value_t = DEFAULT_K)]
    pub k: usize,

    /// Intersection threshold.
    #[arg(long, global = true, default_value_t = DEFAULT_R)]
    pub r: f64,

    /// Recall weight in the mutual benefit reward.
    #[arg(long, global = true, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,

    #[arg(long, global = true, default_value_t = DEFAULT_BETA)]
    pub beta1: f64,

    #[arg(long, global = true, default_value_t = DEFAULT_BETA)]
    pub beta2: f64,

    #[arg(long, global = true, default_value_t = DEFAULT_BETA)]
    pub beta3: f64,

    /// Distance assigned to unreachable concept pairs.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DIST)]
    pub max_dist: f64,

    /// Future-dialogue window in utterances.
    #[arg(long, global = true, default_value_t = DEFAULT_HORIZON)]
    pub horizon: usize,
}

impl CliConfig {
    pub fn operation_params(&self) -> OperationParams {
        OperationParams { k: self.k, r: self.r }
    }

    pub fn reward_config(&self) -> RewardConfig {
        RewardConfig {
            gamma: self.gamma,
            beta1: self.beta1,
            beta2: self.beta2,
            beta3: self.beta3,
            r: self.r,
            horizon: self.horizon,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.operation_params().validate()?;
        self.reward_config().validate()?;
        if !(self.max_dist.is_finite() && self.max_dist > DEFAULT_SELF_DIST) {
            return Err(Error::InvalidParams(format!(
                "max-dist must exceed the self distance {DEFAULT_SELF_DIST}, got {}",
                self.max_dist
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a concept vocabulary from a word list or free text.
    BuildVocab {
        /// Input words (any text; tokenized on non-letters).
        #[arg(long)]
        words: PathBuf,
        /// Extra words to exclude, one per line.
        #[arg(long)]
        drop: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write word-form groups (`lemma<TAB>form,form,...`).
        #[arg(long)]
        forms_out: Option<PathBuf>,
    },
    /// Build the all-pairs distance matrix from a ConceptNet assertion dump.
    BuildMatrix {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Language tag both endpoints must carry.
        #[arg(long, default_value = "en")]
        lang: String,
        /// Lower bound on a single edge length (edge length = 1 / weight).
        #[arg(long, default_value_t = DEFAULT_MIN_EDGE_DIST)]
        min_edge_dist: f64,
    },
    /// Summarize a matrix file, optionally looking up one pair.
    Inspect {
        /// Two concepts, comma-separated.
        #[arg(long)]
        pair: Option<String>,
    },
    /// Extract the concept set of a text.
    Extract {
        #[arg(long)]
        text: String,
    },
    /// Expand a set to its k nearest concepts.
    Expand {
        /// Comma-separated concepts.
        #[arg(long)]
        set: String,
    },
    /// Members of B within distance r of some member of A.
    Intersect {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Mean pairwise distance between two sets.
    Distance {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Expanded guide set from self persona sentences and a partner utterance.
    Guide {
        /// Self persona sentence; repeat for several.
        #[arg(long)]
        persona: Vec<String>,
        #[arg(long, default_value = "")]
        utterance: String,
    },
    /// Score a dialogue episode file (one episode or a JSON array of them).
    Score {
        #[arg(long)]
        episode: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// output to `out`. Returns the process exit code.
pub fn run<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return e.exit_code();
        }
    };
    let pretty = cli.pretty;
    let (code, value) = match execute(cli) {
        Ok(v) => (0, v),
        Err(Failure::Usage(msg)) => (2, json!({"error": "Usage", "message": msg})),
        Err(Failure::Run(e)) => (1, json!({"error": e.kind(), "message": e.to_string()})),
    };
    let text = render(&value, pretty);
    if writeln!(out, "{text}").is_err() {
        return 1;
    }
    code
}

fn execute(cli: Cli) -> CliResult<Value> {
    let cfg = cli.config;
    cfg.validate()?;
    if cli.show_config {
        return Ok(show_config(&cfg));
    }
    let Some(command) = cli.command else {
        return Err(Failure::Usage("no command given (see --help)".into()));
    };
    match command {
        Command::BuildVocab {
            words,
            drop,
            out,
            forms_out,
        } => build_vocab(&cfg, &words, drop.as_deref(), &out, forms_out.as_deref()),
        Command::BuildMatrix {
            dump,
            out,
            lang,
            min_edge_dist,
        } => build_matrix(&cfg, &dump, &out, &lang, min_edge_dist),
        Command::Inspect { pair } => inspect(&cfg, pair.as_deref()),
        Command::Extract { text } => {
            let vocab = match &cfg.vocab {
                Some(p) => Arc::new(read_vocab(p)?),
                None => load(&cfg)?.vocab().clone(),
            };
            let ex = extraction(&cfg, vocab)?;
            Ok(json!(extract(&text, &ex).lemmas(&ex.vocab)))
        }
        Command::Expand { set } => {
            let d = load(&cfg)?;
            let (expanded, ranked) = expand(&parse_set(&d, &set)?, &d, cfg.k)?;
            let ranked: Vec<Value> = ranked
                .entries
                .iter()
                .map(|e| json!({"concept": d.vocab().concept(e.index), "distance": e.distance}))
                .collect();
            Ok(json!({"set": expanded.lemmas(d.vocab()), "ranked": ranked}))
        }
        Command::Intersect { a, b } => {
            let d = load(&cfg)?;
            let got = intersect(&parse_set(&d, &a)?, &parse_set(&d, &b)?, &d, cfg.r)?;
            Ok(json!({"set": got.lemmas(d.vocab()), "r": cfg.r}))
        }
        Command::Distance { a, b } => {
            let d = load(&cfg)?;
            let x = set_distance(&parse_set(&d, &a)?, &parse_set(&d, &b)?, &d)?;
            Ok(json!({"distance": x}))
        }
        Command::Guide { persona, utterance } => {
            let d = load(&cfg)?;
            let ex = extraction(&cfg, d.vocab().clone())?;
            let guide = build_guide_set(&persona, &utterance, &d, cfg.k, &ex)?;
            Ok(json!({"set": guide.lemmas(d.vocab()), "k": cfg.k}))
        }
        Command::Score { episode } => score(&cfg, &episode),
    }
}

fn show_config(cfg: &CliConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    v["self_dist"] = json!(DEFAULT_SELF_DIST);
    v
}

fn load(cfg: &CliConfig) -> CliResult<DistanceMatrix> {
    let path = cfg
        .matrix
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("--matrix (or {MATRIX_ENV}) is required")))?;
    Ok(kg::load_matrix(path)?)
}

fn read_vocab(path: &Path) -> CliResult<ConceptVocabulary> {
    Ok(ConceptVocabulary::read_from(BufReader::new(File::open(path)?))?)
}

fn read_list(path: &Path) -> CliResult<HashSet<String>> {
    Ok(vocab::parse_word_list(&fs::read_to_string(path)?))
}

fn stopwords(cfg: &CliConfig) -> CliResult<HashSet<String>> {
    match &cfg.stopwords {
        Some(p) => read_list(p),
        None => Ok(vocab::default_stopwords()),
    }
}

fn extraction(cfg: &CliConfig, vocab: Arc<ConceptVocabulary>) -> CliResult<ExtractionConfig> {
    Ok(ExtractionConfig::with_stopwords(vocab, stopwords(cfg)?))
}

fn parse_set(d: &DistanceMatrix, spec: &str) -> CliResult<ConceptSet> {
    let words: Vec<&str> = spec.split(',').map(str::trim).filter(|w| !w.is_empty()).collect();
    Ok(ConceptSet::from_words(d.vocab(), &words)?)
}

fn build_vocab(
    cfg: &CliConfig,
    words: &Path,
    drop: Option<&Path>,
    out: &Path,
    forms_out: Option<&Path>,
) -> CliResult<Value> {
    let text = fs::read_to_string(words)?;
    let raw: Vec<&str> = text.lines().collect();
    let stop = stopwords(cfg)?;
    let drop = match drop {
        Some(p) => read_list(p)?,
        None => HashSet::new(),
    };
    let v = vocab::build_vocabulary(&raw, &stop, &drop)?;
    v.write_to(File::create(out)?)?;
    if let Some(path) = forms_out {
        let groups = vocab::word_form_groups(&raw, &stop, &drop);
        vocab::write_word_forms(&groups, File::create(path)?)?;
    }
    Ok(json!({"concepts": v.len(), "out": out}))
}

fn build_matrix(cfg: &CliConfig, dump: &Path, out: &Path, lang: &str, min_edge_dist: f64) -> CliResult<Value> {
    let vocab_path = cfg
        .vocab
        .as_ref()
        .ok_or_else(|| Failure::Usage("--vocab is required".into()))?;
    let vocab = Arc::new(read_vocab(vocab_path)?);
    let parsed = kg::parse_dump(BufReader::new(File::open(dump)?), &vocab, lang)?;
    let graph = kg::build_graph_with(&parsed.edges, vocab, min_edge_dist)?;
    let m = kg::compute_distance_matrix(&graph, cfg.max_dist, DEFAULT_SELF_DIST)?;
    kg::save_matrix(&m, out)?;
    Ok(json!({
        "concepts": m.len(),
        "edges": graph.edge_count(),
        "lines": parsed.lines,
        "malformed": parsed.malformed,
        "filtered": parsed.filtered,
        "unreachable_pairs": capped_pairs(&m),
        "bytes": m.file_size(),
        "out": out,
    }))
}

fn capped_pairs(m: &DistanceMatrix) -> usize {
    (0..m.len())
        .map(|i| m.row(i)[i + 1..].iter().filter(|&&x| x >= m.max_dist()).count())
        .sum()
}

fn inspect(cfg: &CliConfig, pair: Option<&str>) -> CliResult<Value> {
    let m = load(cfg)?;
    let mut v = json!({
        "concepts": m.len(),
        "self_dist": m.self_dist(),
        "max_dist": m.max_dist(),
        "capped_pairs": capped_pairs(&m),
        "bytes": m.file_size(),
        "vocab_id": m.vocab_id().to_string(),
    });
    if let Some(pair) = pair {
        let words: Vec<&str> = pair.split(',').map(str::trim).collect();
        let [a, b] = words[..] else {
            return Err(Failure::Usage("--pair takes exactly two comma-separated concepts".into()));
        };
        let find = |w: &str| m.vocab().lookup(w).ok_or_else(|| Error::UnknownConcept(w.to_string()));
        let (i, j) = (find(a)?, find(b)?);
        v["pair"] = json!({
            "a": m.vocab().concept(i),
            "b": m.vocab().concept(j),
            "distance": m.get(i, j),
        });
    }
    Ok(v)
}

fn score(cfg: &CliConfig, path: &Path) -> CliResult<Value> {
    let d = load(cfg)?;
    let ex = extraction(cfg, d.vocab().clone())?;
    let rc = cfg.reward_config();
    let doc: Value = serde_json::from_str(&fs::read_to_string(path)?).map_err(Error::from)?;
    let score_one = |v: Value| -> Result<Value, Error> {
        let inp: EpisodeInput = serde_json::from_value(v)?;
        Ok(serde_json::to_value(inp.score(&d, &ex, &rc)?)?)
    };
    match doc {
        Value::Array(items) => {
            let reports = items
                .into_par_iter()
                .map(score_one)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Array(reports))
        }
        other => Ok(score_one(other)?),
    }
}

/// Rounds to [`OUTPUT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", OUTPUT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_numbers(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map_or(Value::Null, |x| json!(round_sig(x))),
        Value::Array(items) => Value::Array(items.iter().map(round_numbers).collect()),
        Value::Object(map) => Value::Object(map.iter().map(|(k, v)| (k.clone(), round_numbers(v))).collect::<Map<_, _>>()),
        other => other.clone(),
    }
}

fn render(v: &Value, pretty: bool) -> String {
    let v = round_numbers(v);
    if pretty {
        let mut s = String::new();
        render_text(&v, 0, &mut s);
        s.trim_end().to_string()
    } else {
        v.to_string()
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, val) in map {
                match inline(val) {
                    Some(s) => out.push_str(&format!("{pad}{k:<width$}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}\n"));
                        render_text(val, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => match inline(v) {
            Some(s) => out.push_str(&format!("{pad}{s}\n")),
            None => {
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&format!("{pad}[{i}]\n"));
                    render_text(item, indent + 1, out);
                }
            }
        },
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Array(items) => items
            .iter()
            .map(scalar)
            .collect::<Option<Vec<_>>>()
            .map(|parts| parts.join(", ")),
        other => scalar(other),
    }
}
