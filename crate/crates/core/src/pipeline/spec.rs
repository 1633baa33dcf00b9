//! Pipeline configuration: parsing, validation and canonical form.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use super::ops::{OpKind, OpParams, ValueType};
use super::stages;
use super::PipelineError;

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 16_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Text,
    Numeric,
}

impl Modality {
    pub fn value_type(self) -> ValueType {
        match self {
            Modality::Audio => ValueType::Audio,
            Modality::Text => ValueType::Text,
            Modality::Numeric => ValueType::Features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSpec {
    pub name: String,
    pub modality: Modality,
    /// Set for audio inputs only.
    pub sample_rate_hz: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec {
    pub name: String,
    pub op: OpKind,
    pub params: OpParams,
    pub inputs: Vec<String>,
}

/// A validated pipeline: stages only reference inputs or earlier stages,
/// every edge is type-correct and every parameter set is usable.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub version: String,
    pub inputs: Vec<InputSpec>,
    pub stages: Vec<StageSpec>,
    pub outputs: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawVersion {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    name: String,
    modality: Modality,
    #[serde(default)]
    sample_rate_hz: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage {
    name: String,
    op: String,
    #[serde(default)]
    params: Json,
    #[serde(default)]
    inputs: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    version: RawVersion,
    #[serde(default)]
    inputs: Vec<RawInput>,
    #[serde(default)]
    stages: Vec<RawStage>,
    #[serde(default)]
    outputs: Vec<String>,
}

/// Parses and validates a YAML pipeline document.
pub fn parse_pipeline(config_text: &str) -> Result<PipelineSpec, PipelineError> {
    let tree: Json = serde_yaml::from_str(config_text).map_err(|e| PipelineError::Parse(e.to_string()))?;
    PipelineSpec::from_tree(tree)
}

fn check_name(name: &str) -> Result<(), String> {
    if name.is_empty() {
        return Err("name must not be empty".into());
    }
    if let Some(c) = name
        .chars()
        .find(|c| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '-'))
    {
        return Err(format!(
            "name {name:?} contains {c:?}; use letters, digits, '_' or '-'"
        ));
    }
    Ok(())
}

impl PipelineSpec {
    /// Builds a spec from a parsed JSON-compatible tree (YAML config or the
    /// `pipeline` part of a manifest).
    pub fn from_tree(tree: Json) -> Result<Self, PipelineError> {
        let raw: RawSpec = serde_json::from_value(tree).map_err(|e| PipelineError::Parse(e.to_string()))?;
        let version = match raw.version {
            RawVersion::Text(s) => s,
            RawVersion::Number(n) => n.to_string(),
        };

        let mut types: HashMap<String, ValueType> = HashMap::new();
        // sample rate of every audio-carrying name
        let mut rates: HashMap<String, u32> = HashMap::new();
        let mut inputs = Vec::with_capacity(raw.inputs.len());
        for ri in raw.inputs {
            let err = |message: String| PipelineError::Input {
                input: ri.name.clone(),
                message,
            };
            check_name(&ri.name).map_err(err)?;
            if types.contains_key(&ri.name) {
                return Err(err("duplicate input name".into()));
            }
            let sample_rate_hz = match (ri.modality, ri.sample_rate_hz) {
                (Modality::Audio, None) => Some(DEFAULT_SAMPLE_RATE_HZ),
                (Modality::Audio, Some(0)) => return Err(err("sample_rate_hz must be positive".into())),
                (Modality::Audio, Some(r)) => Some(r),
                (_, None) => None,
                (_, Some(_)) => return Err(err("sample_rate_hz only applies to audio inputs".into())),
            };
            if let Some(r) = sample_rate_hz {
                rates.insert(ri.name.clone(), r);
            }
            types.insert(ri.name.clone(), ri.modality.value_type());
            inputs.push(InputSpec {
                name: ri.name,
                modality: ri.modality,
                sample_rate_hz,
            });
        }

        let later: BTreeSet<&str> = raw.stages.iter().map(|s| s.name.as_str()).collect();
        let mut stages_out = Vec::with_capacity(raw.stages.len());
        for rs in &raw.stages {
            let err = |message: String| PipelineError::Stage {
                stage: rs.name.clone(),
                message,
            };
            check_name(&rs.name).map_err(err)?;
            if types.contains_key(&rs.name) {
                return Err(err(format!("duplicate name {:?}", rs.name)));
            }
            let op: OpKind = rs.op.parse().map_err(err)?;
            let expected = op.input_types();
            if rs.inputs.len() != expected.len() {
                return Err(err(format!(
                    "{op} takes {} input(s), got {}",
                    expected.len(),
                    rs.inputs.len()
                )));
            }
            let mut rate = None;
            for (pos, (r, allowed)) in rs.inputs.iter().zip(expected).enumerate() {
                let Some(&ty) = types.get(r) else {
                    let message = if r == &rs.name {
                        "cycle: stage references itself".to_string()
                    } else if later.contains(r.as_str()) {
                        format!("cycle or forward reference: {r:?} is defined later")
                    } else {
                        format!("dangling reference {r:?}")
                    };
                    return Err(err(message));
                };
                if !allowed.contains(&ty) {
                    let names: Vec<String> = allowed.iter().map(ToString::to_string).collect();
                    return Err(err(format!(
                        "input {pos} ({r}) carries {ty}, {op} expects {}",
                        names.join(" or ")
                    )));
                }
                rate = rate.or(rates.get(r).copied());
            }
            let params = OpParams::parse(op, rs.params.clone()).map_err(err)?;
            stages::check_params(&params, rate).map_err(err)?;
            types.insert(rs.name.clone(), op.output_type());
            stages_out.push(StageSpec {
                name: rs.name.clone(),
                op,
                params,
                inputs: rs.inputs.clone(),
            });
        }

        if raw.outputs.is_empty() {
            return Err(PipelineError::Spec("at least one output is required".into()));
        }
        let mut seen = BTreeSet::new();
        for o in &raw.outputs {
            let err = |message: &str| PipelineError::Output {
                output: o.clone(),
                message: message.into(),
            };
            if !stages_out.iter().any(|s| &s.name == o) {
                return Err(err("does not name a stage"));
            }
            if !seen.insert(o.as_str()) {
                return Err(err("listed twice"));
            }
        }

        Ok(Self {
            version,
            inputs,
            stages: stages_out,
            outputs: raw.outputs,
        })
    }

    pub fn stage(&self, name: &str) -> Option<&StageSpec> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn input(&self, name: &str) -> Option<&InputSpec> {
        self.inputs.iter().find(|i| i.name == name)
    }

    /// Kahn's algorithm; among ready stages the lexicographically smallest
    /// name goes first, so the order is independent of how the config lists
    /// independent stages.
    pub fn topological_order(&self) -> Vec<&StageSpec> {
        let index: HashMap<&str, usize> = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        let mut pending: Vec<usize> = self
            .stages
            .iter()
            .map(|s| s.inputs.iter().filter(|r| index.contains_key(r.as_str())).count())
            .collect();
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); self.stages.len()];
        for (i, s) in self.stages.iter().enumerate() {
            for r in &s.inputs {
                if let Some(&j) = index.get(r.as_str()) {
                    dependents[j].push(i);
                }
            }
        }
        let mut ready: BTreeSet<(&str, usize)> = pending
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(i, _)| (self.stages[i].name.as_str(), i))
            .collect();
        let mut order = Vec::with_capacity(self.stages.len());
        while let Some(first) = ready.pop_first() {
            let i = first.1;
            order.push(&self.stages[i]);
            for &d in &dependents[i] {
                pending[d] -= 1;
                if pending[d] == 0 {
                    ready.insert((self.stages[d].name.as_str(), d));
                }
            }
        }
        order
    }

    /// Canonical tree: inputs sorted by name, stages in topological order,
    /// parameters with all defaults filled in.
    pub fn to_canonical_json(&self) -> Json {
        let mut inputs: Vec<&InputSpec> = self.inputs.iter().collect();
        inputs.sort_by(|a, b| a.name.cmp(&b.name));
        let inputs: Vec<Json> = inputs
            .into_iter()
            .map(|i| {
                let mut v = json!({ "name": i.name, "modality": i.modality });
                if let Some(r) = i.sample_rate_hz {
                    v["sample_rate_hz"] = json!(r);
                }
                v
            })
            .collect();
        let stages: Vec<Json> = self
            .topological_order()
            .into_iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "op": s.op.as_str(),
                    "params": s.params.to_json(),
                    "inputs": s.inputs,
                })
            })
            .collect();
        json!({
            "version": self.version,
            "inputs": inputs,
            "stages": stages,
            "outputs": self.outputs,
        })
    }

    /// Declared audio inputs, in config order.
    pub fn audio_inputs(&self) -> Vec<&InputSpec> {
        self.inputs
            .iter()
            .filter(|i| i.modality == Modality::Audio)
            .collect()
    }
}
