//! JSON graph files: `{"n": <int>, "edges": [[u,v],...], "weights": [<float>,...]}`.
//!
//! `weights` is optional. Loading runs the same validation as [`build_graph`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, Graph, GraphError};
use crate::weights::{NodeWeights, WeightError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn new(g: &Graph, w: Option<&NodeWeights>) -> Self {
        Self {
            n: g.node_count(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            weights: w.map(|w| w.as_slice().to_vec()),
        }
    }

    pub fn into_parts(self) -> Result<(Graph, Option<NodeWeights>), IoError> {
        let g = build_graph(self.n, self.edges.iter().map(|e| (e[0], e[1])))?;
        let w = self
            .weights
            .map(|w| NodeWeights::for_nodes(w, self.n))
            .transpose()?;
        Ok((g, w))
    }
}

pub fn parse_graph(json: &str) -> Result<(Graph, Option<NodeWeights>), IoError> {
    serde_json::from_str::<GraphFile>(json)?.into_parts()
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<(Graph, Option<NodeWeights>), IoError> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn graph_to_json(g: &Graph, w: Option<&NodeWeights>) -> String {
    serde_json::to_string(&GraphFile::new(g, w)).expect("graph file serialization cannot fail")
}

pub fn save_graph(
    path: impl AsRef<Path>,
    g: &Graph,
    w: Option<&NodeWeights>,
) -> Result<(), IoError> {
    fs::write(path, graph_to_json(g, w))?;
    Ok(())
}
