//! Self-describing JSON checkpoint: format tag, version, step, model config,
//! both vocabularies and every parameter tensor by name.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocab;
use crate::error::{Result, WamError};
use crate::transformer::{Transformer, TransformerConfig};

pub const FORMAT: &str = "wam-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub step: u64,
    pub config: TransformerConfig,
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
    pub parameters: Vec<ParamRecord>,
}

impl Checkpoint {
    pub fn capture(model: &Transformer, source_vocab: &Vocab, target_vocab: &Vocab, step: u64) -> Checkpoint {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            step,
            config: model.config.clone(),
            source_vocab: source_vocab.clone(),
            target_vocab: target_vocab.clone(),
            parameters: model
                .params
                .named()
                .into_iter()
                .map(|(name, t)| ParamRecord {
                    name,
                    shape: t.shape().to_vec(),
                    data: t.to_vec(),
                })
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| WamError::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| WamError::io(path, e.into()))?;
        w.flush().map_err(|e| WamError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path).map_err(|e| WamError::io(path, e))?;
        let parse_err = |message: String| WamError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message,
        };
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        if ckpt.format != FORMAT || ckpt.version != VERSION {
            return Err(parse_err(format!(
                "unsupported checkpoint {} v{} (expected {FORMAT} v{VERSION})",
                ckpt.format, ckpt.version
            )));
        }
        Ok(ckpt)
    }

    /// Rebuilds the model; parameter names and shapes must match the config
    /// and vocabulary sizes exactly.
    pub fn to_model(&self) -> Result<Transformer> {
        let model = Transformer::new(
            self.config.clone(),
            self.source_vocab.len(),
            self.target_vocab.len(),
            0,
        )?;
        let records: Vec<_> = self
            .parameters
            .iter()
            .map(|p| (p.name.clone(), p.shape.clone(), p.data.clone()))
            .collect();
        model.params.load(&records)?;
        Ok(model)
    }
}
