//! End-to-end runs: corpus preparation, training with metrics and
//! checkpoints under the output directory, and checkpoint evaluation.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use wam_core::no_grad;

use crate::align::{objectives, LandmarkSet, ObjectiveSettings, StepRecord, TrainObserver, TrainSummary};
use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::corpus::{
    filter_pairs, make_batches, read_parallel, split_train_valid, Dictionary, EncodedPair, Side, Vocab, PAD,
};
use crate::error::{Result, WamError};
use crate::eval::{similarities, EvalReport, WordVectors};
use crate::seed::{derive_seed, Stream};
use crate::transformer::{shift_targets, Dropout, Transformer};

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const METRICS_LOG: &str = "metrics.jsonl";
pub const VALIDATION_LOG: &str = "validation.jsonl";
pub const FINAL_CHECKPOINT: &str = "checkpoint.json";

#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
    pub train: Vec<EncodedPair>,
    pub valid: Vec<EncodedPair>,
    /// Pairs read before length filtering.
    pub read: usize,
}

/// Read, tokenize, filter, split, build vocabularies on the training split
/// and encode both splits.
pub fn prepare_corpus(cfg: &RunConfig) -> Result<PreparedCorpus> {
    let (source, target) = match (&cfg.corpus.source, &cfg.corpus.target) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(WamError::Config(vec!["corpus.source and corpus.target are required".into()])),
    };
    let pairs = read_parallel(source, target)?;
    let read = pairs.len();
    let kept = filter_pairs(&pairs, cfg.corpus.max_len, cfg.corpus.max_ratio);
    let (train, valid) = split_train_valid(&kept, cfg.corpus.train_fraction, derive_seed(cfg.seed(), Stream::Split, 0))?;
    let source_vocab = Vocab::build(&train, Side::Source, cfg.corpus.min_count, "source")?;
    let target_vocab = Vocab::build(&train, Side::Target, cfg.corpus.min_count, "target")?;
    let encode = |ps: &[crate::corpus::SentencePair]| ps.iter().map(|p| p.encode(&source_vocab, &target_vocab)).collect();
    Ok(PreparedCorpus {
        train: encode(&train),
        valid: encode(&valid),
        source_vocab,
        target_vocab,
        read,
    })
}

/// Token-weighted `L_T` over `pairs` without dropout or recording.
pub fn validation_loss(model: &Transformer, pairs: &[EncodedPair], token_budget: usize) -> Result<f64> {
    no_grad(|| {
        let (mut sum, mut weight) = (0.0, 0usize);
        for batch in make_batches(pairs, token_budget, 0) {
            let n = shift_targets(&batch)?.1.iter().filter(|&&t| t != PAD).count();
            sum += model.translation_loss(&batch, &mut Dropout::off())?.item() * n as f64;
            weight += n;
        }
        if weight == 0 {
            return Err(WamError::EmptyCorpus("no validation targets".into()));
        }
        Ok(sum / weight as f64)
    })
}

/// Writes every step to the metrics log and, every `checkpoint_every`
/// steps, a checkpoint plus the validation loss.
struct RunLogger<'a> {
    dir: &'a Path,
    metrics: BufWriter<fs::File>,
    validation: BufWriter<fs::File>,
    checkpoint_every: u64,
    corpus: &'a PreparedCorpus,
    token_budget: usize,
}

impl TrainObserver for RunLogger<'_> {
    fn on_step(&mut self, record: &StepRecord, model: &Transformer) -> Result<()> {
        let path = self.dir.join(METRICS_LOG);
        writeln!(self.metrics, "{}", record.to_json_line()).map_err(|e| WamError::io(&path, e))?;
        if self.checkpoint_every > 0 && record.step.is_multiple_of(self.checkpoint_every) {
            let name = format!("checkpoint-{:06}.json", record.step);
            Checkpoint::capture(model, &self.corpus.source_vocab, &self.corpus.target_vocab, record.step)
                .save(&self.dir.join(name))?;
            if !self.corpus.valid.is_empty() {
                let loss = validation_loss(model, &self.corpus.valid, self.token_budget)?;
                let vpath = self.dir.join(VALIDATION_LOG);
                writeln!(self.validation, "{{\"step\":{},\"valid_L_T\":{}}}", record.step, loss)
                    .map_err(|e| WamError::io(&vpath, e))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub summary: TrainSummary,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| WamError::io(path, e))?))
}

/// Validates `cfg`, then trains in the configured mode. Everything is
/// written under `run.output_dir`: the resolved config, the metrics log,
/// periodic and final checkpoints, and validation losses.
pub fn run_training(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let dir = cfg.run.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| WamError::io(&dir, e))?;
    let resolved = dir.join(RESOLVED_CONFIG);
    fs::write(&resolved, cfg.to_toml()).map_err(|e| WamError::io(&resolved, e))?;

    let corpus = prepare_corpus(cfg)?;
    let seed = cfg.seed();
    let mut model = Transformer::new(
        cfg.model.clone(),
        corpus.source_vocab.len(),
        corpus.target_vocab.len(),
        derive_seed(seed, Stream::Init, 0),
    )?;

    let landmarks = if cfg.run.mode == "supervised-landmark" {
        let path = cfg.corpus.dictionary.as_ref().expect("validated");
        let dict = Dictionary::load(path)?;
        let count = (cfg.landmark.dictionary_fraction * dict.len() as f64).ceil() as usize;
        let (head, _) = dict.split_at(count);
        Some(LandmarkSet::from_dictionary(
            &head,
            &corpus.source_vocab,
            &corpus.target_vocab,
            cfg.landmark.sample_fraction,
        )?)
    } else {
        None
    };
    let settings = ObjectiveSettings {
        align: cfg.align.clone(),
        kernel: cfg.kernel,
        landmarks,
        seed,
    };
    let mut objective = objectives().get(&cfg.run.mode)?(&settings)?;

    let metrics = dir.join(METRICS_LOG);
    let mut logger = RunLogger {
        dir: &dir,
        metrics: create(&metrics)?,
        validation: create(&dir.join(VALIDATION_LOG))?,
        checkpoint_every: cfg.train.checkpoint_every,
        corpus: &corpus,
        token_budget: cfg.corpus.token_budget,
    };
    let summary = crate::align::train(&mut model, &corpus.train, objective.as_mut(), &cfg.train_settings(), &mut logger)?;
    logger.metrics.flush().map_err(|e| WamError::io(&metrics, e))?;
    logger.validation.flush().map_err(|e| WamError::io(dir.join(VALIDATION_LOG), e))?;

    let checkpoint = dir.join(FINAL_CHECKPOINT);
    Checkpoint::capture(&model, &corpus.source_vocab, &corpus.target_vocab, summary.steps).save(&checkpoint)?;
    Ok(RunOutput {
        dir,
        summary,
        checkpoint,
        metrics,
    })
}

/// Source and target word vectors of a checkpoint.
pub fn checkpoint_vectors(ckpt: &Checkpoint) -> Result<(WordVectors, WordVectors)> {
    let model = ckpt.to_model()?;
    Ok((
        WordVectors::from_model(&model, &ckpt.source_vocab, Side::Source)?,
        WordVectors::from_model(&model, &ckpt.target_vocab, Side::Target)?,
    ))
}

/// Evaluates a checkpoint's embedding tables against `dictionary`.
pub fn evaluate_checkpoint(checkpoint: &Path, dictionary: &Path, metric: &str) -> Result<EvalReport> {
    let metric = similarities().get(metric)?();
    let (source, target) = checkpoint_vectors(&Checkpoint::load(checkpoint)?)?;
    EvalReport::compute(&Dictionary::load(dictionary)?, &source, &target, metric.as_ref())
}
