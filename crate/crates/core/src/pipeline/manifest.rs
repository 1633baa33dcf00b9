//! Hash-sealed canonical pipeline manifests.

use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use super::spec::PipelineSpec;
use super::PipelineError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical pipeline tree, the tool version that wrote it, and the SHA-256
/// of the canonical bytes of those two fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineManifest {
    pub pipeline: Json,
    pub tool_version: String,
    pub sha256: String,
}

/// Compact JSON with object keys in sorted order.
pub fn canonical_bytes(value: &Json) -> Vec<u8> {
    // serde_json keeps object keys in a BTreeMap, so plain serialization
    // is already sorted
    serde_json::to_vec(value).expect("JSON values always serialize")
}

fn digest(pipeline: &Json, tool_version: &str) -> String {
    let body = json!({ "pipeline": pipeline, "tool_version": tool_version });
    hex::encode(Sha256::digest(canonical_bytes(&body)))
}

pub fn export_manifest(spec: &PipelineSpec) -> PipelineManifest {
    let pipeline = spec.to_canonical_json();
    let sha256 = digest(&pipeline, TOOL_VERSION);
    PipelineManifest {
        pipeline,
        tool_version: TOOL_VERSION.to_string(),
        sha256,
    }
}

impl PipelineManifest {
    pub fn to_json(&self) -> Json {
        json!({
            "pipeline": self.pipeline,
            "tool_version": self.tool_version,
            "sha256": self.sha256,
        })
    }

    /// The canonical file contents (no trailing newline).
    pub fn to_canonical_string(&self) -> String {
        String::from_utf8(canonical_bytes(&self.to_json())).expect("JSON is UTF-8")
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let v: Json = serde_json::from_str(text).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        let Json::Object(mut obj) = v else {
            return Err(PipelineError::Manifest("top level must be an object".into()));
        };
        let mut take_str = |key: &str| match obj.remove(key) {
            Some(Json::String(s)) => Ok(s),
            _ => Err(PipelineError::Manifest(format!("missing string field {key:?}"))),
        };
        let sha256 = take_str("sha256")?;
        let tool_version = take_str("tool_version")?;
        let pipeline = obj
            .remove("pipeline")
            .ok_or_else(|| PipelineError::Manifest("missing field \"pipeline\"".into()))?;
        if let Some(extra) = obj.keys().next() {
            return Err(PipelineError::Manifest(format!("unknown field {extra:?}")));
        }
        Ok(Self {
            pipeline,
            tool_version,
            sha256,
        })
    }

    /// Checks the stored hash against the manifest's own contents.
    pub fn check_integrity(&self) -> Result<(), PipelineError> {
        let computed = digest(&self.pipeline, &self.tool_version);
        if computed != self.sha256 {
            return Err(PipelineError::ManifestIntegrity {
                stored: self.sha256.clone(),
                computed,
            });
        }
        Ok(())
    }

    /// Rebuilds the [`PipelineSpec`] this manifest describes.
    pub fn to_spec(&self) -> Result<PipelineSpec, PipelineError> {
        PipelineSpec::from_tree(self.pipeline.clone())
    }
}

/// Succeeds iff the manifest is intact and the canonical form of `spec`
/// hashes to the manifest's hash. A mismatch names the first divergent field.
pub fn verify_manifest(manifest: &PipelineManifest, spec: &PipelineSpec) -> Result<(), PipelineError> {
    manifest.check_integrity()?;
    let current = spec.to_canonical_json();
    if digest(&current, &manifest.tool_version) == manifest.sha256 {
        return Ok(());
    }
    let (path, in_manifest, in_config) = first_divergence(&manifest.pipeline, &current, String::new())
        .unwrap_or_else(|| (String::new(), "?".into(), "?".into()));
    Err(PipelineError::ManifestMismatch {
        path,
        manifest: in_manifest,
        config: in_config,
    })
}

const ABSENT: &str = "<absent>";

fn render(v: Option<&Json>) -> String {
    v.map_or_else(|| ABSENT.to_string(), Json::to_string)
}

/// Array elements that are objects with a `name` are addressed by name.
fn element_label(a: Option<&Json>, b: Option<&Json>, index: usize) -> String {
    a.or(b)
        .and_then(|e| e.get("name"))
        .and_then(Json::as_str)
        .map_or_else(|| index.to_string(), str::to_string)
}

/// `(path, value in a, value in b)` at the first place the trees differ.
pub fn first_divergence(a: &Json, b: &Json, path: String) -> Option<(String, String, String)> {
    match (a, b) {
        (Json::Object(x), Json::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().find_map(|k| {
                let child = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => first_divergence(p, q, child),
                    (p, q) => Some((child, render(p), render(q))),
                }
            })
        }
        (Json::Array(x), Json::Array(y)) => (0..x.len().max(y.len())).find_map(|i| {
            let child = format!("{path}[{}]", element_label(x.get(i), y.get(i), i));
            match (x.get(i), y.get(i)) {
                (Some(p), Some(q)) => first_divergence(p, q, child),
                (p, q) => Some((child, render(p), render(q))),
            }
        }),
        _ if a == b => None,
        _ => Some((path, a.to_string(), b.to_string())),
    }
}
