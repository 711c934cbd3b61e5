//! File formats: the JSON graph interchange format, the partition sidecar,
//! and DOT export.

use crate::graph::{BlowupGraph, GraphError, VertexRef};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const FORMAT_TAG: &str = "ckblowup/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format tag {0:?}, expected {FORMAT_TAG:?}")]
    Tag(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl From<serde_json::Error> for FormatError {
    fn from(err: serde_json::Error) -> Self {
        FormatError::Json {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// On-disk shape of a graph: `{"format", "k", "n", "edges": [[i, u, w], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(default = "default_tag")]
    pub format: String,
    pub k: usize,
    pub n: usize,
    pub edges: Vec<[usize; 3]>,
}

fn default_tag() -> String {
    FORMAT_TAG.to_string()
}

impl From<&BlowupGraph> for GraphFile {
    fn from(g: &BlowupGraph) -> Self {
        GraphFile {
            format: FORMAT_TAG.to_string(),
            k: g.k(),
            n: g.n(),
            edges: g.edges().into_iter().map(|(i, u, w)| [i, u, w]).collect(),
        }
    }
}

impl TryFrom<GraphFile> for BlowupGraph {
    type Error = FormatError;

    fn try_from(file: GraphFile) -> Result<Self, FormatError> {
        if file.format != FORMAT_TAG {
            return Err(FormatError::Tag(file.format));
        }
        Ok(BlowupGraph::new(
            file.k,
            file.n,
            file.edges.into_iter().map(|[i, u, w]| (i, u, w)),
        )?)
    }
}

pub fn graph_to_json(g: &BlowupGraph) -> String {
    serde_json::to_string(&GraphFile::from(g)).expect("graph file serializes")
}

pub fn graph_from_json(text: &str) -> Result<BlowupGraph, FormatError> {
    let file: GraphFile = serde_json::from_str(text)?;
    BlowupGraph::try_from(file)
}

/// Named vertex blocks of a generated instance, keyed like `"U_1"`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: BTreeMap<String, Vec<VertexRef>>,
}

impl Partition {
    pub fn insert(&mut self, name: impl Into<String>, vertices: Vec<VertexRef>) {
        self.blocks.insert(name.into(), vertices);
    }

    pub fn block(&self, name: &str) -> &[VertexRef] {
        self.blocks.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Concatenation of the named blocks, in the order given.
    pub fn union_of(&self, names: &[&str]) -> Vec<VertexRef> {
        names
            .iter()
            .flat_map(|name| self.block(name).iter().copied())
            .collect()
    }

    /// Sidecar JSON `{"blocks": {"U_1": [global ids], ...}}`.
    pub fn to_sidecar_json(&self, g: &BlowupGraph) -> String {
        let blocks: BTreeMap<&str, Vec<usize>> = self
            .blocks
            .iter()
            .map(|(name, vs)| (name.as_str(), vs.iter().map(|&v| g.global_id(v)).collect()))
            .collect();
        serde_json::json!({ "blocks": blocks }).to_string()
    }
}

/// Graphviz rendering with one ranked cluster per part.
pub fn to_dot(g: &BlowupGraph) -> String {
    let mut out = String::from("graph blowup {\n  node [shape=circle];\n");
    for part in 1..=g.k() {
        let _ = writeln!(
            out,
            "  subgraph cluster_{part} {{\n    label=\"V_{part}\";\n    rank=same;"
        );
        for i in 0..g.n() {
            let _ = writeln!(out, "    v{part}_{i};");
        }
        out.push_str("  }\n");
    }
    for (part, u, w) in g.edges() {
        let _ = writeln!(out, "  v{part}_{u} -- v{}_{w};", g.next(part));
    }
    out.push_str("}\n");
    out
}
