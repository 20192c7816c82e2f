use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{build_graph, PotentialGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub w: f64,
}

/// On-disk graph: `{"vertices":[{"id":0,"w":0.0}],"edges":[[0,1]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<PotentialGraph> {
        let n = self.vertices.len();
        let mut w = vec![f64::NAN; n];
        let mut seen = vec![false; n];
        for rec in &self.vertices {
            if rec.id >= n || std::mem::replace(&mut seen[rec.id], true) {
                return Err(Error::MalformedEdges(format!(
                    "vertex ids must be exactly 0..{n}; bad id {}",
                    rec.id
                )));
            }
            w[rec.id] = rec.w;
        }
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        build_graph(&edges, &w)
    }
}

impl From<&PotentialGraph> for GraphFile {
    fn from(g: &PotentialGraph) -> Self {
        Self {
            vertices: g
                .potentials()
                .iter()
                .enumerate()
                .map(|(id, &w)| VertexRecord { id, w })
                .collect(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl PotentialGraph {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<GraphFile>(text)?.into_graph()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
