//! Flat key-value parameter document.
//!
//! ```json
//! {
//!   "A": 1.0, "p2": 15.0, "p3": 7.2, "p4": 0.05, "p5": 0.11, "p6": 2.9,
//!   "tau": 1.0,
//!   "history.kind": "bump",
//!   "history.params": { "lambda": 0.5 },
//!   "r0": 0.2, "o0": 0.15
//! }
//! ```
//!
//! `history.params` by kind:
//!
//! * `constant`: `{ "value": v }`
//! * `bump`: `{ "base": b, "lambda": l }`; a missing `base` is replaced by the
//!   fitted level `A / (p3 (1 + p2 o0 r0))`
//! * `hermite`: `{ "nodes": [[t, value, slope], ...] }`
//!
//! Missing rate constants default to 0. Unknown keys are kept in `extra`
//! so front ends can carry their own options in the same document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{fitted_base, HermiteNode, HistoryShape, HistorySpec, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(rename = "history.kind", default, skip_serializing_if = "Option::is_none")]
    pub history_kind: Option<String>,
    #[serde(rename = "history.params", default, skip_serializing_if = "Option::is_none")]
    pub history_params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o0: Option<f64>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    /// Builds the history, or `None` when no `history.kind` is given.
    pub fn history(&self) -> Result<Option<HistorySpec>> {
        let Some(kind) = self.history_kind.as_deref() else {
            return Ok(None);
        };
        let r0 = self.r0.ok_or_else(|| Error::invalid("history requires r0"))?;
        let o0 = self.o0.ok_or_else(|| Error::invalid("history requires o0"))?;
        let empty = Value::Object(Default::default());
        let hp = self.history_params.as_ref().unwrap_or(&empty);
        let num = |key: &str| -> Result<Option<f64>> {
            match hp.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => v
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::invalid(format!("history.params.{key} must be a number"))),
            }
        };
        let shape = match kind {
            "constant" => HistoryShape::Constant {
                value: num("value")?.ok_or_else(|| Error::invalid("constant history needs value"))?,
            },
            "bump" => HistoryShape::Bump {
                base: num("base")?.unwrap_or_else(|| fitted_base(&self.params, r0, o0)),
                lambda: num("lambda")?.unwrap_or(0.0),
            },
            "hermite" => {
                let nodes = hp
                    .get("nodes")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::invalid("hermite history needs nodes"))?
                    .iter()
                    .map(|n| {
                        let t: Vec<f64> = n
                            .as_array()
                            .map(|a| a.iter().filter_map(Value::as_f64).collect())
                            .unwrap_or_default();
                        if t.len() != 3 {
                            return Err(Error::invalid("hermite node must be [t, value, slope]"));
                        }
                        Ok(HermiteNode { t: t[0], value: t[1], slope: t[2] })
                    })
                    .collect::<Result<Vec<_>>>()?;
                HistoryShape::Hermite { nodes }
            }
            other => return Err(Error::invalid(format!("unknown history.kind '{other}'"))),
        };
        let hist = HistorySpec::new(shape, r0, o0);
        hist.validate(self.params.tau)?;
        Ok(Some(hist))
    }

    pub fn extra_f64(&self, key: &str) -> Option<f64> {
        self.extra.get(key).and_then(Value::as_f64)
    }
}
