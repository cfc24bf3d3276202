//! Versioned TOML model files.
//!
//! One format serves both full models and bare graphs: parameter fields
//! are optional, so a "dag file" is simply a model file carrying only
//! `nodes` and `edges`. Floats are written in shortest round-trip form,
//! so read(write(m)) reproduces the model bit for bit.
//!
//! The dense-coefficient convention is row = child, column = parent:
//! an entry `parent = h, child = j, weight = β` is the coefficient of
//! `Y_h` in the structural equation of `Y_j`, and in matrix form
//! `B[j][h] = β` so that `Σ = (I-B)⁻¹ V (I-B)⁻ᵀ` holds as written.

use serde::{Deserialize, Serialize};

use oce::{Dag, Error, LatentDagModel, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub parent: usize,
    pub child: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    /// Interior thresholds per node (the ±∞ sentinels are implicit).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
}

impl ModelFile {
    pub fn from_model(model: &LatentDagModel) -> Self {
        let n = model.node_count();
        Self {
            version: SCHEMA_VERSION,
            nodes: n,
            labels: model.dag().labels().map(|l| l.to_vec()),
            mu: Some(model.means().to_vec()),
            v: Some(model.noise_vars().to_vec()),
            levels: Some((1..=n).map(|m| model.levels(m)).collect()),
            thresholds: Some(
                (1..=n)
                    .map(|m| model.interior_thresholds(m).to_vec())
                    .collect(),
            ),
            tau: Some((1..=n).map(|m| model.level_labels(m).to_vec()).collect()),
            edges: model
                .coeffs()
                .map(|((parent, child), weight)| EdgeSpec {
                    parent,
                    child,
                    weight: Some(weight),
                })
                .collect(),
        }
    }

    pub fn check_version(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported model file version {} (this build reads {SCHEMA_VERSION})",
                self.version
            )));
        }
        Ok(())
    }

    /// The graph alone; weights are not required.
    pub fn to_dag(&self) -> Result<Dag> {
        self.check_version()?;
        let dag = Dag::new(self.nodes, self.edges.iter().map(|e| (e.parent, e.child)))?;
        match &self.labels {
            Some(labels) => dag.with_labels(labels.clone()),
            None => Ok(dag),
        }
    }

    /// The full model; every parameter block must be present.
    pub fn to_model(&self) -> Result<LatentDagModel> {
        let dag = self.to_dag()?;
        let mu = self
            .mu
            .clone()
            .ok_or_else(|| Error::Data("model file lacks mu".into()))?;
        let v = self
            .v
            .clone()
            .ok_or_else(|| Error::Data("model file lacks v".into()))?;
        let thresholds = self
            .thresholds
            .clone()
            .ok_or_else(|| Error::Data("model file lacks thresholds".into()))?;
        let mut coeffs = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let w = e.weight.ok_or_else(|| {
                Error::Data(format!(
                    "edge {} -> {} has no weight; a full model file needs one per edge",
                    e.parent, e.child
                ))
            })?;
            coeffs.push(((e.parent, e.child), w));
        }
        let model = LatentDagModel::new(dag, mu, coeffs, v, thresholds)?;
        if let Some(levels) = &self.levels {
            for (m, &declared) in levels.iter().enumerate() {
                if declared != model.levels(m + 1) {
                    return Err(Error::Data(format!(
                        "node {}: declared {declared} levels but {} thresholds",
                        m + 1,
                        model.interior_thresholds(m + 1).len()
                    )));
                }
            }
        }
        match &self.tau {
            Some(tau) => model.with_level_labels(tau.clone()),
            None => Ok(model),
        }
    }
}

pub fn write_model(path: &std::path::Path, model: &LatentDagModel) -> Result<()> {
    let file = ModelFile::from_model(model);
    let text = toml::to_string_pretty(&file)
        .map_err(|e| Error::Data(format!("model serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_model_file(path: &std::path::Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let file: ModelFile = toml::from_str(&text)
        .map_err(|e| Error::Data(format!("{} is not a valid model file: {e}", path.display())))?;
    file.check_version()?;
    Ok(file)
}

pub fn read_model(path: &std::path::Path) -> Result<LatentDagModel> {
    read_model_file(path)?.to_model()
}

pub fn read_dag(path: &std::path::Path) -> Result<Dag> {
    read_model_file(path)?.to_dag()
}
