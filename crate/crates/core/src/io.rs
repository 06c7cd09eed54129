//! Text formats: the arrangement/graph/hypergraph input files and the
//! postorder/edges/json decomposition outputs, plus decomposition parsing
//! for the verify pipeline. Identical input and flags produce byte-identical
//! output.

use crate::bdtree::DecTree;
use crate::field::FieldSpec;
use crate::frontends::{Graph, Hypergraph};
use crate::linalg::Mat;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoError(pub String);

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "input error: {}", self.0)
    }
}

impl std::error::Error for IoError {}

fn bad(msg: impl Into<String>) -> IoError {
    IoError(msg.into())
}

pub enum Input {
    /// Field, matrix, part sizes.
    Arrangement(FieldSpec, Mat, Vec<usize>),
    Graph(Graph),
    Hypergraph(Hypergraph),
}

/// Parse any of the three input formats, keyed by the first token:
///   arrangement p r m n / r rows of m entries / n part sizes
///   graph n m / m lines "u v" (1-based)
///   hypergraph n m / m lines "s v1 ... vs" (1-based)
pub fn parse_input(text: &str) -> Result<Input, IoError> {
    let mut tokens = text.split_whitespace();
    let kind = tokens.next().ok_or_else(|| bad("empty input"))?;
    let mut next_usize = |what: &str| -> Result<usize, IoError> {
        tokens
            .next()
            .ok_or_else(|| bad(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| bad(format!("bad {what}")))
    };
    match kind {
        "arrangement" => {
            let p = next_usize("modulus")?;
            let r = next_usize("row count")?;
            let m = next_usize("column count")?;
            let n = next_usize("part count")?;
            let spec = FieldSpec::new(p as u32).map_err(|e| bad(e.to_string()))?;
            let mut rows = Vec::with_capacity(r);
            for i in 0..r {
                let mut row = Vec::with_capacity(m);
                for j in 0..m {
                    let x = next_usize(&format!("entry ({i},{j})"))?;
                    if x >= p {
                        return Err(bad(format!("entry {x} not below the modulus {p}")));
                    }
                    row.push(x as u16);
                }
                rows.push(row);
            }
            let mut sizes = Vec::with_capacity(n);
            for i in 0..n {
                sizes.push(next_usize(&format!("part size {i}"))?);
            }
            if sizes.iter().sum::<usize>() != m {
                return Err(bad("part sizes do not sum to the column count"));
            }
            let mat = if r == 0 {
                Mat::zero(0, m, spec)
            } else {
                Mat::from_rows(&rows, spec)
            };
            Ok(Input::Arrangement(spec, mat, sizes))
        }
        "graph" => {
            let n = next_usize("vertex count")?;
            let m = next_usize("edge count")?;
            let mut edges = Vec::with_capacity(m);
            for i in 0..m {
                let u = next_usize(&format!("edge {i} endpoint"))?;
                let v = next_usize(&format!("edge {i} endpoint"))?;
                if u == 0 || v == 0 || u > n || v > n || u == v {
                    return Err(bad(format!("bad edge {u} {v}")));
                }
                edges.push((u - 1, v - 1));
            }
            Ok(Input::Graph(Graph::new(n, edges)))
        }
        "hypergraph" => {
            let n = next_usize("vertex count")?;
            let m = next_usize("edge count")?;
            let mut edges = Vec::with_capacity(m);
            for i in 0..m {
                let s = next_usize(&format!("edge {i} size"))?;
                if s == 0 {
                    return Err(bad("empty hyperedge"));
                }
                let mut e = Vec::with_capacity(s);
                for _ in 0..s {
                    let v = next_usize("hyperedge vertex")?;
                    if v == 0 || v > n {
                        return Err(bad(format!("bad vertex {v}")));
                    }
                    e.push(v - 1);
                }
                edges.push(e);
            }
            Ok(Input::Hypergraph(Hypergraph::new(n, edges)))
        }
        other => Err(bad(format!("unknown input kind '{other}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Postorder,
    Edges,
    Json,
}

impl OutFormat {
    pub fn parse(s: &str) -> Result<OutFormat, IoError> {
        match s {
            "postorder" => Ok(OutFormat::Postorder),
            "edges" => Ok(OutFormat::Edges),
            "json" => Ok(OutFormat::Json),
            other => Err(bad(format!("unknown format '{other}'"))),
        }
    }
}

/// Render a decomposition. Node ids are 0-based, part indices 1-based.
pub fn emit(t: &DecTree, format: OutFormat) -> String {
    match format {
        OutFormat::Postorder => {
            let rooted = if t.root().is_some() {
                t.clone()
            } else {
                t.rooted()
            };
            let mut s = rooted.postorder_string().expect("rooted");
            s.push('\n');
            s
        }
        OutFormat::Edges => {
            let mut out = String::new();
            for (u, v) in t.edges() {
                out.push_str(&format!("{u} {v}\n"));
            }
            for v in 0..t.n() {
                if let Some(p) = t.label(v) {
                    out.push_str(&format!("leaf {v} {}\n", p + 1));
                }
            }
            out
        }
        OutFormat::Json => {
            let mut out = String::from("{\n  \"edges\": [");
            let edges = t.edges();
            for (i, (u, v)) in edges.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("[{u}, {v}]"));
            }
            out.push_str("],\n  \"leaves\": [");
            let mut first = true;
            for v in 0..t.n() {
                if let Some(p) = t.label(v) {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    out.push_str(&format!("[{v}, {}]", p + 1));
                }
            }
            out.push_str("]\n}\n");
            out
        }
    }
}

/// Parse a decomposition in postorder or edges format (auto-detected).
pub fn parse_decomposition(text: &str) -> Result<DecTree, IoError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad("empty decomposition"));
    }
    if trimmed.contains("leaf") {
        parse_edges_format(trimmed)
    } else {
        parse_postorder(trimmed)
    }
}

fn parse_postorder(text: &str) -> Result<DecTree, IoError> {
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut labels: Vec<Option<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for tok in text.split_whitespace() {
        if tok == "*" {
            let b = stack.pop().ok_or_else(|| bad("postorder underflow"))?;
            let a = stack.pop().ok_or_else(|| bad("postorder underflow"))?;
            let v = adj.len();
            adj.push(vec![a, b]);
            labels.push(None);
            adj[a].push(v);
            adj[b].push(v);
            stack.push(v);
        } else {
            let p: usize = tok.parse().map_err(|_| bad(format!("bad token '{tok}'")))?;
            if p == 0 {
                return Err(bad("part indices are 1-based"));
            }
            adj.push(Vec::new());
            labels.push(Some(p - 1));
            stack.push(adj.len() - 1);
        }
    }
    if stack.len() != 1 {
        return Err(bad("postorder does not reduce to a single tree"));
    }
    let root = stack[0];
    let mut edges = Vec::new();
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    Ok(DecTree::from_edges(&edges, labels).with_root(root))
}

fn parse_edges_format(text: &str) -> Result<DecTree, IoError> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut leaves: Vec<(usize, usize)> = Vec::new();
    let mut max_node = 0usize;
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["leaf", v, p] => {
                let v: usize = v.parse().map_err(|_| bad("bad leaf node"))?;
                let p: usize = p.parse().map_err(|_| bad("bad leaf part"))?;
                if p == 0 {
                    return Err(bad("part indices are 1-based"));
                }
                max_node = max_node.max(v);
                leaves.push((v, p - 1));
            }
            [u, v] => {
                let u: usize = u.parse().map_err(|_| bad("bad edge"))?;
                let v: usize = v.parse().map_err(|_| bad("bad edge"))?;
                max_node = max_node.max(u).max(v);
                edges.push((u, v));
            }
            _ => return Err(bad(format!("bad line '{line}'"))),
        }
    }
    let mut labels = vec![None; max_node + 1];
    for (v, p) in leaves {
        labels[v] = Some(p);
    }
    Ok(DecTree::from_edges(&edges, labels))
}
