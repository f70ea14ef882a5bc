//! Checkpoint files.
//!
//! Layout: a magic line, a version line, then a JSON document. Every `f64`
//! is written as the 16 lowercase hex digits of its IEEE-754 bit pattern;
//! a tensor's values are concatenated row-major into one string, so a
//! round trip is bitwise exact.
//!
//! ```text
//! LSTM-RETURNS-CHECKPOINT
//! version 1
//! {"config": {...}, "seed": 42, "tensors": [{"name": "lstm.0.w_cx", "shape": [50, 5], "values": "3fb9…"}, …],
//!  "adam": {...} | null, "history": [{"window_length": 2, "epochs": 1, "mean_loss": "3f1a…"}, …]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trainer::{StageSummary, TrainingHistory};
use crate::error::{Error, Result};
use crate::model::{tensor_names, Model, ModelConfig};
use crate::optim::{AdamConfig, AdamState};

pub const CHECKPOINT_MAGIC: &str = "LSTM-RETURNS-CHECKPOINT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ModelConfig,
    pub seed: u64,
    pub tensors: Vec<NamedTensor>,
    pub adam: Option<AdamState>,
    pub history: Vec<StageSummary>,
}

impl Checkpoint {
    pub fn from_model(model: &Model, seed: u64, adam: Option<&AdamState>, history: &TrainingHistory) -> Self {
        let tensors = model
            .tensors()
            .iter()
            .map(|t| NamedTensor {
                name: t.qualified_name(),
                rows: t.rows,
                cols: t.cols,
                values: t.values.to_vec(),
            })
            .collect();
        Self {
            version: CHECKPOINT_VERSION,
            config: model.config,
            seed,
            tensors,
            adam: adam.cloned(),
            history: history.stage_summaries(),
        }
    }

    /// Rebuilds the model, checking names and shapes against the config.
    pub fn to_model(&self) -> Result<Model> {
        self.config
            .validate()
            .map_err(|e| Error::checkpoint("config", e.to_string()))?;
        let mut model = Model::zeros(self.config)?;
        let expected = tensor_names(&self.config);
        if self.tensors.len() != expected.len() {
            return Err(Error::checkpoint(
                "tensors",
                format!("expected {} tensors for {:?}, found {}", expected.len(), self.config, self.tensors.len()),
            ));
        }
        let shapes: Vec<(usize, usize)> = model.tensors().iter().map(|t| (t.rows, t.cols)).collect();
        for ((stored, name), (dst, shape)) in self
            .tensors
            .iter()
            .zip(&expected)
            .zip(model.tensors_mut().into_iter().zip(shapes))
        {
            if &stored.name != name {
                return Err(Error::checkpoint(
                    format!("tensor {}", stored.name),
                    format!("expected tensor {name} at this position"),
                ));
            }
            if (stored.rows, stored.cols) != shape {
                return Err(Error::checkpoint(
                    format!("tensor {name}"),
                    format!("shape {}x{}, expected {}x{}", stored.rows, stored.cols, shape.0, shape.1),
                ));
            }
            if stored.values.len() != dst.len() {
                return Err(Error::checkpoint(
                    format!("tensor {name}"),
                    format!("{} values, expected {}", stored.values.len(), dst.len()),
                ));
            }
            dst.copy_from_slice(&stored.values);
        }
        if let Some(adam) = &self.adam {
            let lens: Vec<usize> = self.tensors.iter().map(|t| t.values.len()).collect();
            let congruent = |moments: &[Vec<f64>]| {
                moments.len() == lens.len() && moments.iter().zip(&lens).all(|(m, &n)| m.len() == n)
            };
            if !congruent(&adam.m) || !congruent(&adam.v) {
                return Err(Error::checkpoint("adam", "moment tensors do not match the parameters"));
            }
        }
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let wire = WireCheckpoint {
            config: self.config,
            seed: self.seed,
            tensors: self
                .tensors
                .iter()
                .map(|t| WireTensor {
                    name: t.name.clone(),
                    shape: [t.rows, t.cols],
                    values: encode(&t.values),
                })
                .collect(),
            adam: self.adam.as_ref().map(|a| WireAdam {
                step: a.step,
                learning_rate: encode(&[a.config.learning_rate]),
                beta1: encode(&[a.config.beta1]),
                beta2: encode(&[a.config.beta2]),
                epsilon: encode(&[a.config.epsilon]),
                m: a.m.iter().map(|m| encode(m)).collect(),
                v: a.v.iter().map(|v| encode(v)).collect(),
            }),
            history: self
                .history
                .iter()
                .map(|s| WireStage {
                    window_length: s.window_length,
                    epochs: s.epochs,
                    mean_loss: encode(&[s.mean_loss]),
                })
                .collect(),
        };
        let body = serde_json::to_string_pretty(&wire).expect("checkpoint serializes");
        format!("{CHECKPOINT_MAGIC}\nversion {}\n{body}\n", self.version)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut parts = text.splitn(3, '\n');
        let magic = parts.next().unwrap_or("");
        if magic.trim_end() != CHECKPOINT_MAGIC {
            return Err(Error::checkpoint("magic", format!("expected {CHECKPOINT_MAGIC:?}")));
        }
        let version_line = parts.next().ok_or_else(|| Error::checkpoint("version", "missing"))?;
        let version: u32 = version_line
            .trim()
            .strip_prefix("version ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::checkpoint("version", format!("malformed line {version_line:?}")))?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::checkpoint(
                "version",
                format!("unsupported version {version}, expected {CHECKPOINT_VERSION}"),
            ));
        }
        let body = parts.next().ok_or_else(|| Error::checkpoint("body", "missing"))?;
        let wire: WireCheckpoint =
            serde_json::from_str(body).map_err(|e| Error::checkpoint("body", e.to_string()))?;

        let tensors = wire
            .tensors
            .into_iter()
            .map(|t| {
                let values = decode(&t.values).map_err(|r| Error::checkpoint(format!("tensor {}", t.name), r))?;
                if values.len() != t.shape[0] * t.shape[1] {
                    return Err(Error::checkpoint(
                        format!("tensor {}", t.name),
                        format!(
                            "{} values for shape {}x{}",
                            values.len(),
                            t.shape[0],
                            t.shape[1]
                        ),
                    ));
                }
                Ok(NamedTensor {
                    name: t.name,
                    rows: t.shape[0],
                    cols: t.shape[1],
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let adam = wire
            .adam
            .map(|a| -> Result<AdamState> {
                let scalar = |field: &str, s: &str| -> Result<f64> {
                    match decode(s).map_err(|r| Error::checkpoint(format!("adam.{field}"), r))?[..] {
                        [v] => Ok(v),
                        _ => Err(Error::checkpoint(format!("adam.{field}"), "expected one value")),
                    }
                };
                let moments = |field: &str, list: &[String]| -> Result<Vec<Vec<f64>>> {
                    list.iter()
                        .enumerate()
                        .map(|(k, s)| decode(s).map_err(|r| Error::checkpoint(format!("adam.{field}[{k}]"), r)))
                        .collect()
                };
                Ok(AdamState {
                    config: AdamConfig {
                        learning_rate: scalar("learning_rate", &a.learning_rate)?,
                        beta1: scalar("beta1", &a.beta1)?,
                        beta2: scalar("beta2", &a.beta2)?,
                        epsilon: scalar("epsilon", &a.epsilon)?,
                    },
                    step: a.step,
                    m: moments("m", &a.m)?,
                    v: moments("v", &a.v)?,
                })
            })
            .transpose()?;

        let history = wire
            .history
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                let loss = decode(&s.mean_loss).map_err(|r| Error::checkpoint(format!("history[{k}]"), r))?;
                match loss[..] {
                    [mean_loss] => Ok(StageSummary {
                        window_length: s.window_length,
                        epochs: s.epochs,
                        mean_loss,
                    }),
                    _ => Err(Error::checkpoint(format!("history[{k}]"), "expected one loss value")),
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let ckpt = Checkpoint {
            version,
            config: wire.config,
            seed: wire.seed,
            tensors,
            adam,
            history,
        };
        ckpt.to_model()?;
        Ok(ckpt)
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ckpt.to_text())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::from_text(&std::fs::read_to_string(path)?)
}

fn encode(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 16);
    for v in values {
        s.push_str(&format!("{:016x}", v.to_bits()));
    }
    s
}

fn decode(s: &str) -> std::result::Result<Vec<f64>, String> {
    if !s.len().is_multiple_of(16) {
        return Err(format!("hex payload of {} digits is not a multiple of 16", s.len()));
    }
    s.as_bytes()
        .chunks_exact(16)
        .map(|chunk| {
            let digits = std::str::from_utf8(chunk).map_err(|e| e.to_string())?;
            u64::from_str_radix(digits, 16)
                .map(f64::from_bits)
                .map_err(|_| format!("invalid hex value {digits:?}"))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCheckpoint {
    config: ModelConfig,
    seed: u64,
    tensors: Vec<WireTensor>,
    adam: Option<WireAdam>,
    history: Vec<WireStage>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTensor {
    name: String,
    shape: [usize; 2],
    values: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireAdam {
    step: u64,
    learning_rate: String,
    beta1: String,
    beta2: String,
    epsilon: String,
    m: Vec<String>,
    v: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireStage {
    window_length: usize,
    epochs: usize,
    mean_loss: String,
}
