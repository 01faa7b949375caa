use wam_core::{no_grad, Tensor};

use super::{embedding_mmd, landmark_l2_loss, wam_loss, AlignConfig, KernelConfig, LandmarkSet, TokenSets};
use crate::corpus::Batch;
use crate::error::{Result, WamError};
use crate::registry::Registry;
use crate::seed::{derive_seed, Stream};
use crate::transformer::{Dropout, Transformer};

/// Loss of one training step: the differentiable total plus logged parts.
pub struct LossTerms {
    pub total: Tensor,
    pub translation: f64,
    pub mmd: Option<f64>,
    pub landmark: Option<f64>,
}

/// A training objective, selected by name at runtime.
pub trait Objective {
    fn name(&self) -> &str;

    /// Called before the first batch of every epoch (0-based).
    fn begin_epoch(&mut self, _epoch: u64) -> Result<()> {
        Ok(())
    }

    fn loss(&mut self, model: &Transformer, batch: &Batch, dropout: &mut Dropout) -> Result<LossTerms>;
}

/// Everything an objective may need at construction.
#[derive(Debug, Clone)]
pub struct ObjectiveSettings {
    pub align: AlignConfig,
    pub kernel: KernelConfig,
    pub landmarks: Option<LandmarkSet>,
    pub seed: u64,
}

pub type ObjectiveFactory = fn(&ObjectiveSettings) -> Result<Box<dyn Objective>>;

/// Built-in objectives: `wam`, `transformer-only`, `supervised-landmark`.
pub fn objectives() -> Registry<ObjectiveFactory> {
    let mut r: Registry<ObjectiveFactory> = Registry::new("training mode");
    r.register("wam", |s| Ok(Box::new(Wam(s.clone()))))
        .register("transformer-only", |s| Ok(Box::new(TransformerOnly(s.clone()))))
        .register("supervised-landmark", |s| {
            let landmarks = s.landmarks.clone().ok_or_else(|| {
                WamError::Config(vec!["mode supervised-landmark needs a landmark dictionary".into()])
            })?;
            Ok(Box::new(SupervisedLandmark {
                settings: s.clone(),
                landmarks,
                current: Vec::new(),
            }))
        });
    r
}

/// `L_M` evaluated without recording, for logging only.
fn logged_mmd(model: &Transformer, batch: &Batch, s: &ObjectiveSettings) -> Result<Option<f64>> {
    no_grad(|| {
        let sets = TokenSets::from_batch(batch, s.align.exclude_special_tokens);
        Ok(embedding_mmd(model, &sets, &s.align, &s.kernel)?.map(|t| t.item()))
    })
}

/// `L_T + λ·L_M`.
struct Wam(ObjectiveSettings);

impl Objective for Wam {
    fn name(&self) -> &str {
        "wam"
    }

    fn loss(&mut self, model: &Transformer, batch: &Batch, dropout: &mut Dropout) -> Result<LossTerms> {
        let l = wam_loss(model, batch, &self.0.align, &self.0.kernel, dropout)?;
        Ok(LossTerms {
            translation: l.translation.item(),
            mmd: l.mmd.map(|m| m.item()),
            landmark: None,
            total: l.total,
        })
    }
}

/// `L_T` alone; `L_M` is still reported.
struct TransformerOnly(ObjectiveSettings);

impl Objective for TransformerOnly {
    fn name(&self) -> &str {
        "transformer-only"
    }

    fn loss(&mut self, model: &Transformer, batch: &Batch, dropout: &mut Dropout) -> Result<LossTerms> {
        let total = model.translation_loss(batch, dropout)?;
        Ok(LossTerms {
            translation: total.item(),
            mmd: logged_mmd(model, batch, &self.0)?,
            landmark: None,
            total,
        })
    }
}

/// `L_T` plus the mean L2 distance over this epoch's landmark sample.
struct SupervisedLandmark {
    settings: ObjectiveSettings,
    landmarks: LandmarkSet,
    current: Vec<(u32, u32)>,
}

impl Objective for SupervisedLandmark {
    fn name(&self) -> &str {
        "supervised-landmark"
    }

    fn begin_epoch(&mut self, epoch: u64) -> Result<()> {
        self.current = self
            .landmarks
            .sample(derive_seed(self.settings.seed, Stream::Landmarks, epoch));
        Ok(())
    }

    fn loss(&mut self, model: &Transformer, batch: &Batch, dropout: &mut Dropout) -> Result<LossTerms> {
        if self.current.is_empty() {
            self.begin_epoch(0)?;
        }
        let translation = model.translation_loss(batch, dropout)?;
        let landmark = landmark_l2_loss(model, &self.current)?;
        Ok(LossTerms {
            total: translation.add(&landmark)?,
            translation: translation.item(),
            mmd: logged_mmd(model, batch, &self.settings)?,
            landmark: Some(landmark.item()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(landmarks: Option<LandmarkSet>) -> ObjectiveSettings {
        ObjectiveSettings {
            align: AlignConfig::default(),
            kernel: KernelConfig::default(),
            landmarks,
            seed: 1,
        }
    }

    #[test]
    fn registry_builds_every_mode() {
        let reg = objectives();
        assert_eq!(reg.names(), ["wam", "transformer-only", "supervised-landmark"]);
        let lm = LandmarkSet::new(vec![(4, 4)], 0.5).unwrap();
        for name in reg.names() {
            let obj = reg.get(name).unwrap()(&settings(Some(lm.clone()))).unwrap();
            assert_eq!(obj.name(), name);
        }
    }

    #[test]
    fn supervised_mode_requires_landmarks() {
        let reg = objectives();
        let err = reg.get("supervised-landmark").unwrap()(&settings(None)).err().unwrap();
        assert!(err.is_validation());
        assert!(reg.get("mmd-only").is_err());
    }
}
