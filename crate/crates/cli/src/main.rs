//! `wam`: synthesize cipher corpora, train alignment models, evaluate and
//! export embeddings.
//!
//! Exit status: 0 on success, 1 for invalid input (arguments or config),
//! 2 for runtime failures (I/O, non-finite loss, degenerate data).

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wam::checkpoint::Checkpoint;
use wam::config::RunConfig;
use wam::corpus::{cipher_corpus, write_parallel, CipherSpec, Dictionary, Side};
use wam::eval::{project_2d, similarities, write_projection, EvalReport, WordVectors};
use wam::pipeline::{checkpoint_vectors, run_training};
use wam::{Result, WamError};

#[derive(Parser)]
#[command(name = "wam", version, about = "Word-embedding alignment through localized MMD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic cipher corpus and its gold dictionary.
    Synth(SynthArgs),
    /// Train a model from a run config.
    Train(TrainArgs),
    /// Evaluate embedding alignment against a dictionary.
    Eval(EvalArgs),
    /// Export one side's embeddings in word2vec text format.
    Export(ExportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for source.txt, target.txt and dictionary.txt.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    vocab_size: usize,
    #[arg(long, default_value_t = 2000)]
    sentences: usize,
    #[arg(long, default_value_t = 4)]
    min_len: usize,
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides run.mode.
    #[arg(long)]
    mode: Option<String>,
    /// Overrides run.output_dir.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    dictionary: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, conflicts_with_all = ["source_vectors", "target_vectors"], required_unless_present_all = ["source_vectors", "target_vectors"])]
    checkpoint: Option<PathBuf>,
    /// Source embeddings in word2vec text format (instead of a checkpoint).
    #[arg(long, requires = "target_vectors")]
    source_vectors: Option<PathBuf>,
    #[arg(long, requires = "source_vectors")]
    target_vectors: Option<PathBuf>,
    #[arg(long)]
    dictionary: PathBuf,
    #[arg(long, default_value = "cosine")]
    metric: String,
    /// Report path; defaults to eval.json next to the checkpoint.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write source.vec and target.vec to this directory.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Also write a 2D projection (TSV) to this path.
    #[arg(long)]
    project: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Source,
    Target,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long)]
    out: PathBuf,
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = CipherSpec {
        vocab_size: a.vocab_size,
        sentences: a.sentences,
        min_len: a.min_len,
        max_len: a.max_len,
        zipf_exponent: a.zipf,
        seed: a.seed,
    };
    let (pairs, gold) = cipher_corpus(&spec)?;
    fs::create_dir_all(&a.out).map_err(|e| WamError::io(&a.out, e))?;
    write_parallel(&pairs, &a.out.join("source.txt"), &a.out.join("target.txt"))?;
    gold.save(&a.out.join("dictionary.txt"))?;
    println!(
        "wrote {} sentence pairs and {} dictionary entries to {}",
        pairs.len(),
        gold.len(),
        a.out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    let absolute = |p: PathBuf| std::path::absolute(&p).unwrap_or(p);
    if let Some(m) = a.mode {
        cfg.run.mode = m;
    }
    if let Some(o) = a.output {
        cfg.run.output_dir = absolute(o);
    }
    if let Some(p) = a.source {
        cfg.corpus.source = Some(absolute(p));
    }
    if let Some(p) = a.target {
        cfg.corpus.target = Some(absolute(p));
    }
    if let Some(p) = a.dictionary {
        cfg.corpus.dictionary = Some(absolute(p));
    }
    let out = run_training(&cfg)?;
    if let Some(last) = &out.summary.last {
        println!("{}", last.to_json_line());
    }
    println!(
        "trained {} steps over {} epochs; checkpoint {}",
        out.summary.steps,
        out.summary.epochs,
        out.checkpoint.display()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let metric = similarities().get(&a.metric)?();
    let dict = Dictionary::load(&a.dictionary)?;
    let (source, target) = match (&a.checkpoint, &a.source_vectors, &a.target_vectors) {
        (Some(c), _, _) => checkpoint_vectors(&Checkpoint::load(c)?)?,
        (None, Some(s), Some(t)) => (WordVectors::load(s)?, WordVectors::load(t)?),
        _ => unreachable!("clap enforces a checkpoint or both vector files"),
    };
    let report = EvalReport::compute(&dict, &source, &target, metric.as_ref())?;
    println!("{report}");

    let out = a
        .out
        .or_else(|| a.checkpoint.as_ref().map(|c| c.with_file_name("eval.json")));
    if let Some(path) = out {
        fs::write(&path, report.to_json() + "\n").map_err(|e| WamError::io(&path, e))?;
    }
    if let Some(dir) = &a.export {
        fs::create_dir_all(dir).map_err(|e| WamError::io(dir, e))?;
        source.save(&dir.join("source.vec"))?;
        target.save(&dir.join("target.vec"))?;
    }
    if let Some(path) = &a.project {
        let src_words: HashSet<String> = dict.pairs.iter().map(|p| p.0.clone()).collect();
        let tgt_words: HashSet<String> = dict.pairs.iter().map(|p| p.1.clone()).collect();
        let points = project_2d(&[("source", &source, &src_words), ("target", &target, &tgt_words)])?;
        write_projection(&points, path)?;
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let (source, target) = checkpoint_vectors(&Checkpoint::load(&a.checkpoint)?)?;
    let (vectors, side) = match a.side {
        SideArg::Source => (source, Side::Source),
        SideArg::Target => (target, Side::Target),
    };
    vectors.save(&a.out)?;
    println!("wrote {} {side:?} vectors of dimension {} to {}", vectors.len(), vectors.dim(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
