use serde::{Deserialize, Serialize};
use wam_core::{backward, AdamConfig, AdamState, LrSchedule};

use super::Objective;
use crate::corpus::{make_batches, EncodedPair};
use crate::error::{Result, WamError};
use crate::seed::{derive_seed, Stream};
use crate::transformer::{Dropout, Transformer};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub steps: u64,
    pub seed: u64,
    /// Target tokens per batch.
    pub token_budget: usize,
    pub warmup_steps: u64,
    pub adam: AdamConfig,
}

/// One metrics-log line. JSON field order: `step`, `L`, `L_T`, `L_M`,
/// `landmark_loss`, `lr`; absent terms are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    #[serde(rename = "L")]
    pub loss: f64,
    #[serde(rename = "L_T")]
    pub translation: f64,
    #[serde(rename = "L_M")]
    pub mmd: Option<f64>,
    pub landmark_loss: Option<f64>,
    pub lr: f64,
}

impl StepRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain record serializes")
    }
}

/// Receives every step after the parameter update.
pub trait TrainObserver {
    fn on_step(&mut self, record: &StepRecord, model: &Transformer) -> Result<()>;
}

impl TrainObserver for Vec<StepRecord> {
    fn on_step(&mut self, record: &StepRecord, _: &Transformer) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub steps: u64,
    /// Epochs started, including a partial last one.
    pub epochs: u64,
    pub last: Option<StepRecord>,
}

fn parameter_dump(model: &Transformer) -> Vec<(String, f64, bool)> {
    model
        .params
        .named()
        .into_iter()
        .map(|(name, t)| {
            let data = t.data();
            let max = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (name, max, data.iter().all(|v| v.is_finite()))
        })
        .collect()
}

/// Fixed-step training: each step draws the next batch (re-batching with a
/// fresh seed at every epoch), evaluates the objective, back-propagates and
/// applies Adam at the scheduled learning rate.
pub fn train(
    model: &mut Transformer,
    pairs: &[EncodedPair],
    objective: &mut dyn Objective,
    settings: &TrainSettings,
    observer: &mut dyn TrainObserver,
) -> Result<TrainSummary> {
    if pairs.is_empty() {
        return Err(WamError::EmptyCorpus("no training pairs".into()));
    }
    if settings.token_budget == 0 || settings.warmup_steps == 0 {
        return Err(WamError::InvalidArgument("token budget and warmup must be positive".into()));
    }
    let schedule = LrSchedule::new(model.config.d_model, settings.warmup_steps);
    let params = model.params.tensors();
    let mut adam = AdamState::new(&params, settings.adam);
    let mut dropout = Dropout::train(model.config.dropout, derive_seed(settings.seed, Stream::Dropout, 0));

    let mut epoch = 0;
    let mut batches = Vec::new().into_iter();
    let mut last = None;
    for step in 1..=settings.steps {
        let batch = match batches.next() {
            Some(b) => b,
            None => {
                if step > 1 {
                    epoch += 1;
                }
                objective.begin_epoch(epoch)?;
                let seed = derive_seed(settings.seed, Stream::Batches, epoch);
                batches = make_batches(pairs, settings.token_budget, seed).into_iter();
                batches.next().expect("non-empty corpus yields a batch")
            }
        };
        let terms = objective.loss(model, &batch, &mut dropout)?;
        let loss = terms.total.item();
        if !loss.is_finite() {
            return Err(WamError::NonFiniteLoss {
                step,
                loss,
                translation: terms.translation,
                mmd: terms.mmd,
                landmark: terms.landmark,
                parameters: parameter_dump(model),
            });
        }
        let grads = backward(&terms.total)?;
        drop(terms.total);
        let lr = schedule.lr_at(step)?;
        adam.step(&params, &grads, lr)?;

        let record = StepRecord {
            step,
            loss,
            translation: terms.translation,
            mmd: terms.mmd,
            landmark_loss: terms.landmark,
            lr,
        };
        observer.on_step(&record, model)?;
        last = Some(record);
    }
    Ok(TrainSummary {
        steps: settings.steps,
        epochs: if settings.steps == 0 { 0 } else { epoch + 1 },
        last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_field_order() {
        let r = StepRecord {
            step: 3,
            loss: 1.5,
            translation: 1.0,
            mmd: Some(0.05),
            landmark_loss: None,
            lr: 0.25,
        };
        let line = r.to_json_line();
        assert_eq!(
            line,
            r#"{"step":3,"L":1.5,"L_T":1.0,"L_M":0.05,"landmark_loss":null,"lr":0.25}"#
        );
        assert_eq!(serde_json::from_str::<StepRecord>(&line).unwrap(), r);
    }
}
