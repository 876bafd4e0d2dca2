//! Deterministic generator for the small instance files shipped in
//! `crates/cli/corpus/`. Every file is a pure function of the constructors
//! in `reductio-core`; `reductio corpus --check corpus` confirms the shipped
//! copies are current.

use reductio_core::gadgets::GadgetTemplate;
use reductio_core::graph::Graph;
use reductio_core::problems::{k22_family, MatchingProblem};
use reductio_core::suite::{three_clauses, xor_instances};
use reductio_core::treewidth::treewidth_exact;
use reductio_core::twlp::tw_family;

use crate::formats::{format_graphs, to_canonical_json};
use crate::CliError;

fn core(e: reductio_core::Error) -> CliError {
    CliError::Internal(e.to_string())
}

/// `(file name, contents)` in a fixed order.
pub fn generate() -> Result<Vec<(&'static str, String)>, CliError> {
    let k4_tw2: Vec<Graph> = MatchingProblem::spanning_subgraphs(Graph::complete(4))
        .instances
        .into_iter()
        .filter(|h| treewidth_exact(h).map(|(w, _)| w <= 2).unwrap_or(false))
        .collect();
    Ok(vec![
        ("gadget_standard.json", to_canonical_json(&GadgetTemplate::standard())?),
        ("k22_ug.json", to_canonical_json(&k22_family())?),
        ("xor3.json", to_canonical_json(&xor_instances().map_err(core)?)?),
        ("three_clauses.json", to_canonical_json(&three_clauses().map_err(core)?)?),
        ("tw_family_6_2.graphs", format_graphs(&tw_family(6, 2).map_err(core)?)),
        ("k4_spanning_tw2.graphs", format_graphs(&k4_tw2)),
        ("edge.graph", format_graphs(&[Graph::path(2)])),
        ("path4.graph", format_graphs(&[Graph::path(4)])),
        ("cycle4.graph", format_graphs(&[Graph::cycle(4)])),
        ("k3.graph", format_graphs(&[Graph::complete(3)])),
        ("k4.graph", format_graphs(&[Graph::complete(4)])),
    ])
}
