//! On-disk formats: graph text files, CSP / UG / matrix / model / α JSON.
//!
//! Graph text: first line `n`, then one `u v` edge per line with 1-based
//! endpoints. Blank lines separate several graphs in one file; lines
//! starting with `#` are comments.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use reductio_core::graph::{subset_elems, subset_from, Graph, Subset};
use reductio_core::problems::{CspInstance, UgInstance};
use reductio_core::twlp::{AdmissibleProblem, AlphaTable, TwProblemKind, UniformLpModel};
use reductio_core::linalg::AffineHull;
use reductio_core::Rational;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Pretty JSON with object keys sorted, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // serde_json's default map is ordered by key, so a round trip through
    // `Value` sorts every object.
    let v = serde_json::to_value(value).map_err(|e| CliError::Input(format!("serialization failed: {e}")))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Input(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = to_canonical_json(value)?;
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, CliError> {
    tok.parse()
        .map_err(|_| CliError::Input(format!("line {line}: expected a nonnegative integer, found {tok:?}")))
}

/// Parses every graph in a graph text file.
pub fn parse_graphs(text: &str) -> Result<Vec<Graph>, CliError> {
    let mut graphs = Vec::new();
    let mut current: Option<(usize, Vec<(usize, usize)>)> = None;
    let finish = |cur: Option<(usize, Vec<(usize, usize)>)>, graphs: &mut Vec<Graph>| -> Result<(), CliError> {
        if let Some((n, edges)) = cur {
            graphs.push(Graph::on_all(n, edges).map_err(|e| CliError::Input(e.to_string()))?);
        }
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            finish(current.take(), &mut graphs)?;
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (&mut current, toks.as_slice()) {
            (None, [n]) => current = Some((parse_usize(n, lineno)?, Vec::new())),
            (None, _) => return Err(CliError::Input(format!("line {lineno}: expected the vertex count"))),
            (Some((n, edges)), [u, v]) => {
                let (u, v) = (parse_usize(u, lineno)?, parse_usize(v, lineno)?);
                if u == 0 || v == 0 || u > *n || v > *n {
                    return Err(CliError::Input(format!("line {lineno}: endpoint outside 1..={n}")));
                }
                edges.push((u - 1, v - 1));
            }
            (Some(_), _) => return Err(CliError::Input(format!("line {lineno}: expected `u v`"))),
        }
    }
    finish(current, &mut graphs)?;
    if graphs.is_empty() {
        return Err(CliError::Input("no graph found".into()));
    }
    Ok(graphs)
}

/// Reads a file holding exactly one graph.
pub fn read_graph(path: &Path) -> Result<Graph, CliError> {
    let mut gs = parse_graphs(&read_text(path)?).map_err(|e| e.context(path))?;
    if gs.len() != 1 {
        return Err(CliError::Input(format!("{}: expected one graph, found {}", path.display(), gs.len())));
    }
    Ok(gs.remove(0))
}

pub fn read_graphs(path: &Path) -> Result<Vec<Graph>, CliError> {
    parse_graphs(&read_text(path)?).map_err(|e| e.context(path))
}

/// Writes graphs on all of `[n]`; isolated vertices are implicit.
pub fn format_graphs(graphs: &[Graph]) -> String {
    let blocks: Vec<String> = graphs
        .iter()
        .map(|g| {
            let mut s = format!("{}\n", g.n());
            for &(u, v) in g.edges() {
                s.push_str(&format!("{} {}\n", u + 1, v + 1));
            }
            s
        })
        .collect();
    blocks.join("\n")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

/// A CSP file holds one instance object or an array of them; every
/// instance is revalidated.
pub fn read_csp(path: &Path) -> Result<Vec<CspInstance>, CliError> {
    let raw: OneOrMany<CspInstance> = read_json(path)?;
    let list = match raw {
        OneOrMany::One(i) => vec![i],
        OneOrMany::Many(v) => v,
    };
    list.into_iter()
        .map(|i| CspInstance::new(i.num_variables, i.q, i.clauses).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn read_ug(path: &Path) -> Result<Vec<UgInstance>, CliError> {
    let raw: OneOrMany<UgInstance> = read_json(path)?;
    let list = match raw {
        OneOrMany::One(i) => vec![i],
        OneOrMany::Many(v) => v,
    };
    list.into_iter()
        .map(|i| UgInstance::new(i.n, i.q, i.delta, i.edges).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))))
        .collect()
}

/// One model coordinate `(X, σ)`; `sigma` is the problem's internal code
/// and `label` its readable form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableJson {
    pub x: Vec<usize>,
    pub sigma: u64,
    pub label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelJson {
    pub problem: String,
    pub n: usize,
    pub k: usize,
    pub variables: Vec<VariableJson>,
    pub embeddings: Vec<Vec<usize>>,
    pub hull_basis: Vec<Vec<Rational>>,
    pub hull_offset: Vec<Rational>,
}

impl ModelJson {
    pub fn from_model(m: &UniformLpModel, p: &AdmissibleProblem) -> Self {
        ModelJson {
            problem: m.kind.name().to_string(),
            n: m.n,
            k: m.k,
            variables: m
                .variables
                .iter()
                .map(|&(x, sigma)| VariableJson {
                    x: subset_elems(x),
                    sigma,
                    label: p.label(sigma),
                })
                .collect(),
            embeddings: m.embeddings.clone(),
            hull_basis: m.hull.basis.clone(),
            hull_offset: m.hull.offset.clone(),
        }
    }

    pub fn into_model(self) -> Result<UniformLpModel, CliError> {
        let kind = TwProblemKind::parse(&self.problem).map_err(|e| CliError::Input(e.to_string()))?;
        let d = self.variables.len();
        if self.hull_offset.len() != d || self.hull_basis.iter().any(|b| b.len() != d) {
            return Err(CliError::Input("hull vectors do not match the variable count".into()));
        }
        if self.embeddings.iter().flatten().any(|&j| j >= d) {
            return Err(CliError::Input("embedding refers to a missing variable".into()));
        }
        Ok(UniformLpModel {
            kind,
            n: self.n,
            k: self.k,
            variables: self.variables.iter().map(|v| (subset_from(v.x.iter().copied()), v.sigma)).collect(),
            embeddings: self.embeddings,
            hull: AffineHull {
                offset: self.hull_offset,
                basis: self.hull_basis,
                basis_points: Vec::new(),
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaEntryJson {
    pub node: usize,
    pub x: Vec<usize>,
    pub sigma: String,
    pub a: Vec<usize>,
    pub value: Rational,
}

/// α keyed by `(X, σ, A)`, plus the tree node that produced each entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaJson {
    pub problem: String,
    pub root: usize,
    pub entries: Vec<AlphaEntryJson>,
}

impl AlphaJson {
    pub fn new(p: &AdmissibleProblem, alpha: &AlphaTable) -> Self {
        let label = |s: Subset| subset_elems(s);
        AlphaJson {
            problem: p.kind.name().to_string(),
            root: alpha.root,
            entries: alpha
                .entries
                .iter()
                .map(|e| AlphaEntryJson {
                    node: e.node,
                    x: label(e.x),
                    sigma: p.label(e.sigma),
                    a: label(e.a),
                    value: e.value.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_text_round_trip() {
        let text = "# a path and a triangle\n4\n1 2\n2 3\n3 4\n\n3\n1 2\n2 3\n1 3\n";
        let gs = parse_graphs(text).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0], Graph::path(4));
        assert_eq!(gs[1], Graph::complete(3));
        assert_eq!(parse_graphs(&format_graphs(&gs)).unwrap(), gs);
    }

    #[test]
    fn graph_text_errors() {
        assert!(parse_graphs("3\n0 1\n").is_err());
        assert!(parse_graphs("3\n1 4\n").is_err());
        assert!(parse_graphs("3\n1 1\n").is_err());
        assert!(parse_graphs("x\n").is_err());
        assert!(parse_graphs("3\n1 2 3\n").is_err());
        assert!(parse_graphs("\n# nothing\n").is_err());
    }

    proptest::proptest! {
        #[test]
        fn random_graph_lists_round_trip(
            specs in proptest::collection::vec((1usize..8, proptest::collection::vec((0usize..8, 0usize..8), 0..12)), 1..4)
        ) {
            let graphs: Vec<Graph> = specs
                .into_iter()
                .map(|(n, pairs)| {
                    let mut edges: Vec<(usize, usize)> =
                        pairs.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u < v).collect();
                    edges.sort();
                    edges.dedup();
                    Graph::on_all(n, edges).unwrap()
                })
                .collect();
            proptest::prop_assert_eq!(parse_graphs(&format_graphs(&graphs)).unwrap(), graphs);
        }
    }

    #[test]
    fn isolated_vertices_survive() {
        let g = &parse_graphs("5\n1 2\n").unwrap()[0];
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.num_edges(), 1);
    }
}
