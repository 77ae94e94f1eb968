//! Dependency graphs: every covariate is regressed on all the others by
//! stepwise selection, and selected regressors become edges. The per-node
//! threshold divides the graph-wide level by the number of nodes, so the
//! expected number of false edges over the whole graph stays at the level
//! the caller asked for.

use crate::data::CovariateMatrix;
use crate::error::{Error, Result};
use crate::selection::{stepwise_core, SelectionConfig};
use rayon::prelude::*;
use serde::Serialize;

/// Tuning knobs for dependency-graph construction.
#[derive(Debug, Clone, Serialize)]
pub struct GraphConfig {
    /// Graph-wide level; each node regression runs at `alpha / nodes`
    /// unless `per_node_alpha` overrides that.
    pub alpha: f64,
    /// Explicit per-node threshold, replacing the `alpha / nodes` default.
    pub per_node_alpha: Option<f64>,
    /// Order-statistic rank passed through to the per-node selections.
    pub nu: usize,
    /// Run repeated selection per node: after a round, its selected
    /// columns leave the pool and selection runs again, until a round
    /// selects nothing. Neighbor sets are the union over rounds.
    pub repeated: bool,
    /// Identify the edges (i, ℓ) and (ℓ, i): [`DependencyGraph::edge_pairs`]
    /// then returns undirected pairs.
    pub symmetrize: bool,
    /// Cap on accepted covariates per node regression.
    pub max_steps: Option<usize>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            alpha: 0.01,
            per_node_alpha: None,
            nu: 1,
            repeated: false,
            symmetrize: true,
            max_steps: None,
        }
    }
}

/// One selected regressor: the column `to` entered the model of node
/// `from` with the given leave-one-out P-value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub pvalue: f64,
}

/// Result of regressing every covariate on all the others.
#[derive(Debug, Clone, Serialize)]
pub struct DependencyGraph {
    /// Number of nodes (covariate columns, the intercept not counted).
    pub nodes: usize,
    /// Column names, indexed like the input matrix.
    pub names: Vec<String>,
    /// The per-node threshold that was applied.
    pub alpha_effective: f64,
    /// Whether (i, ℓ) and (ℓ, i) are identified in [`edge_pairs`].
    ///
    /// [`edge_pairs`]: DependencyGraph::edge_pairs
    pub symmetric: bool,
    /// All directed edges, sorted by (from, to).
    pub edges: Vec<DirectedEdge>,
}

impl DependencyGraph {
    /// Undirected edge set: canonical (low, high) pairs, deduplicated.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| (e.from.min(e.to), e.from.max(e.to)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Edge list in the shape the configuration asked for: directed
    /// (from, to) pairs, or undirected pairs when symmetric.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        if self.symmetric {
            self.undirected_edges()
        } else {
            self.edges.iter().map(|e| (e.from, e.to)).collect()
        }
    }
}

/// Builds the dependency graph of a covariate matrix.
///
/// Every non-constant column in turn becomes the response and is regressed
/// on all remaining columns by stepwise selection at the effective
/// threshold. A constant column, when present, stays in every regression
/// as the forced intercept but is neither a node nor an edge endpoint.
pub fn dependency_graph(x: &CovariateMatrix, cfg: &GraphConfig) -> Result<DependencyGraph> {
    let intercept = x.has_intercept();
    let node_indices: Vec<usize> = (0..x.q())
        .filter(|&j| !(intercept && j == 0))
        .collect();
    let nodes = node_indices.len();
    if nodes < 2 {
        return Err(Error::Data(format!(
            "a dependency graph needs at least 2 covariates, got {nodes}"
        )));
    }
    if !(cfg.alpha.is_finite() && 0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    let alpha_effective = match cfg.per_node_alpha {
        Some(a) => {
            if !(a.is_finite() && 0.0 < a && a < 1.0) {
                return Err(Error::Domain(format!(
                    "per-node alpha {a} outside (0, 1)"
                )));
            }
            a
        }
        None => cfg.alpha / nodes as f64,
    };

    let per_node: Vec<Result<Vec<DirectedEdge>>> = node_indices
        .par_iter()
        .map(|&node| node_edges(x, node, alpha_effective, cfg))
        .collect();

    let mut edges = Vec::new();
    for result in per_node {
        edges.extend(result?);
    }
    edges.sort_unstable_by_key(|e| (e.from, e.to));
    Ok(DependencyGraph {
        nodes,
        names: x.names().to_vec(),
        alpha_effective,
        symmetric: cfg.symmetrize,
        edges,
    })
}

/// Regresses one node on the other columns and returns its outgoing
/// edges. With `repeated`, selection reruns on the shrunken pool until a
/// round comes back empty.
fn node_edges(
    x: &CovariateMatrix,
    node: usize,
    alpha_effective: f64,
    cfg: &GraphConfig,
) -> Result<Vec<DirectedEdge>> {
    let sel_cfg = SelectionConfig {
        alpha: alpha_effective,
        nu: cfg.nu,
        max_steps: cfg.max_steps,
        ..SelectionConfig::default()
    };
    let y = x.column(node);
    let mut allowed: Vec<usize> = (0..x.q()).filter(|&j| j != node).collect();
    let mut edges = Vec::new();
    loop {
        let result = stepwise_core(x, y, &sel_cfg, &allowed)?;
        let mut selected_any = false;
        for member in &result.members {
            if x.has_intercept() && member.index == 0 {
                continue;
            }
            selected_any = true;
            edges.push(DirectedEdge {
                from: node,
                to: member.index,
                pvalue: member.adjusted.value(),
            });
        }
        if !cfg.repeated || !selected_any {
            return Ok(edges);
        }
        let taken: Vec<usize> = result
            .members
            .iter()
            .map(|m| m.index)
            .filter(|&j| !(x.has_intercept() && j == 0))
            .collect();
        allowed.retain(|j| !taken.contains(j));
        if allowed.is_empty() || (x.has_intercept() && allowed == [0]) {
            return Ok(edges);
        }
    }
}
