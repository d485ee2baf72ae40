//! Regularized UCT search.
//!
//! Selection maximizes `Q / R_upper + c_alpha * P * sqrt(sum N) / (1 + N)`
//! where `R_upper` is the sequence's contact upper bound, so the
//! exploitation term lives in `[0, 1]` like the exploration term. Leaves are
//! expanded with the evaluator's priors and valued by its contact estimate;
//! terminal leaves (complete or trapped) are scored exactly. The same value
//! is added at every depth of the path.

use rand::Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{EvalError, LeafEvaluator};
use crate::hp::{FoldState, RelativeMove, Status};

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("search root is terminal ({0:?})")]
    TerminalRoot(Status),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid search config: {0}")]
    Config(&'static str),
    #[error("move {0} is not legal at the root")]
    IllegalMove(RelativeMove),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub simulations: u32,
    pub c_alpha: f64,
    pub dirichlet_alpha: f64,
    pub dirichlet_epsilon: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            simulations: 300,
            c_alpha: 1.0,
            dirichlet_alpha: 0.03,
            dirichlet_epsilon: 0.25,
        }
    }
}

impl SearchConfig {
    pub fn with_simulations(simulations: u32) -> Self {
        Self {
            simulations,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.simulations == 0 {
            return Err(SearchError::Config("simulations must be positive"));
        }
        if !(self.c_alpha > 0.0 && self.c_alpha.is_finite()) {
            return Err(SearchError::Config("c_alpha must be positive"));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(SearchError::Config("dirichlet_alpha must be positive"));
        }
        if !(0.0..=1.0).contains(&self.dirichlet_epsilon) {
            return Err(SearchError::Config("dirichlet_epsilon must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Per-edge statistics `{N, W, Q, P}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EdgeStats {
    pub visits: u32,
    pub total: f64,
    pub mean: f64,
    pub prior: f64,
}

impl EdgeStats {
    pub fn with_prior(prior: f64) -> Self {
        Self {
            prior,
            ..Self::default()
        }
    }

    pub fn update(&mut self, value: f64) {
        self.visits += 1;
        self.total += value;
        self.mean = self.total / f64::from(self.visits);
    }
}

/// Selection score of one edge.
pub fn selection_score(stats: &EdgeStats, parent_visits: u32, r_upper: u32, c_alpha: f64) -> f64 {
    let exploit = if r_upper == 0 {
        0.0
    } else {
        stats.mean / f64::from(r_upper)
    };
    let explore =
        c_alpha * stats.prior * f64::from(parent_visits).sqrt() / (1.0 + f64::from(stats.visits));
    exploit + explore
}

/// Argmax of [`selection_score`]; ties go to the earliest edge, and edges
/// are expected in `F, L, R` order.
pub fn select_action(
    edges: &[(RelativeMove, EdgeStats)],
    r_upper: u32,
    c_alpha: f64,
) -> Option<RelativeMove> {
    let parent_visits: u32 = edges.iter().map(|(_, s)| s.visits).sum();
    let mut best: Option<(RelativeMove, f64)> = None;
    for &(mv, ref stats) in edges {
        let score = selection_score(stats, parent_visits, r_upper, c_alpha);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((mv, score));
        }
    }
    best.map(|(mv, _)| mv)
}

/// Visit-count distribution over the root moves, in `F, L, R` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPolicy {
    pub probabilities: [f64; 3],
}

impl SearchPolicy {
    pub fn from_visits(visits: [u32; 3]) -> Self {
        let total: u32 = visits.iter().sum();
        let probabilities = if total == 0 {
            [0.0; 3]
        } else {
            visits.map(|n| f64::from(n) / f64::from(total))
        };
        Self { probabilities }
    }

    pub fn get(&self, mv: RelativeMove) -> f64 {
        self.probabilities[mv.index()]
    }

    pub fn sum(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Most probable move; ties go to `Forward`, then `Left`.
    pub fn choose_move(&self) -> RelativeMove {
        let mut best = RelativeMove::Forward;
        for mv in RelativeMove::ALL {
            if self.get(mv) > self.get(best) {
                best = mv;
            }
        }
        best
    }
}

/// Root statistics of one search, for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub step: usize,
    pub policy: [f64; 3],
    pub visits: [u32; 3],
    pub mean: [f64; 3],
    pub prior: [f64; 3],
}

type NodeId = usize;

#[derive(Debug, Clone)]
struct Edge {
    mv: RelativeMove,
    stats: EdgeStats,
    child: Option<NodeId>,
}

#[derive(Debug, Clone)]
struct Node {
    state: FoldState,
    status: Status,
    expanded: bool,
    edges: Vec<Edge>,
}

impl Node {
    fn new(state: FoldState) -> Self {
        let status = state.status();
        Self {
            state,
            status,
            expanded: false,
            edges: Vec::new(),
        }
    }

    fn edge_view(&self) -> Vec<(RelativeMove, EdgeStats)> {
        self.edges.iter().map(|e| (e.mv, e.stats)).collect()
    }
}

/// A search tree rooted at the current folding decision. Owned by one
/// worker; subtrees are reused across consecutive decisions.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<Node>,
    root: NodeId,
    r_upper: u32,
    evaluations: u64,
}

impl SearchTree {
    pub fn new(root: FoldState) -> Self {
        let r_upper = root.sequence().upper_bound();
        Self {
            nodes: vec![Node::new(root)],
            root: 0,
            r_upper,
            evaluations: 0,
        }
    }

    pub fn root_state(&self) -> &FoldState {
        &self.nodes[self.root].state
    }

    pub fn r_upper(&self) -> u32 {
        self.r_upper
    }

    /// Number of evaluator calls made by this tree so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_edges(&self) -> Vec<(RelativeMove, EdgeStats)> {
        self.nodes[self.root].edge_view()
    }

    pub fn root_visits(&self) -> u32 {
        self.nodes[self.root].edges.iter().map(|e| e.stats.visits).sum()
    }

    /// Statistics of every edge in the tree.
    pub fn all_edges(&self) -> impl Iterator<Item = &EdgeStats> + '_ {
        self.nodes.iter().flat_map(|n| n.edges.iter().map(|e| &e.stats))
    }

    pub fn policy(&self) -> SearchPolicy {
        let mut visits = [0; 3];
        for e in &self.nodes[self.root].edges {
            visits[e.mv.index()] = e.stats.visits;
        }
        SearchPolicy::from_visits(visits)
    }

    pub fn trace(&self) -> SearchTrace {
        let mut trace = SearchTrace {
            step: self.root_state().step(),
            policy: self.policy().probabilities,
            visits: [0; 3],
            mean: [0.0; 3],
            prior: [0.0; 3],
        };
        for e in &self.nodes[self.root].edges {
            let i = e.mv.index();
            trace.visits[i] = e.stats.visits;
            trace.mean[i] = e.stats.mean;
            trace.prior[i] = e.stats.prior;
        }
        trace
    }

    /// Runs simulations until the root has `config.simulations` visits in
    /// total, so a reused root only receives the missing ones. On a fresh
    /// tree this is exactly `config.simulations` rounds. With `noise`, the
    /// root priors are mixed with a Dirichlet draw once before the rounds.
    pub fn search<E, R>(
        &mut self,
        evaluator: &mut E,
        config: &SearchConfig,
        noise: Option<&mut R>,
    ) -> Result<SearchPolicy, SearchError>
    where
        E: LeafEvaluator + ?Sized,
        R: Rng + ?Sized,
    {
        config.validate()?;
        let root = self.root;
        let status = self.nodes[root].status;
        if status.is_terminal() {
            return Err(SearchError::TerminalRoot(status));
        }
        if !self.nodes[root].expanded {
            self.expand(root, evaluator)?;
        }
        if let Some(rng) = noise {
            self.add_root_noise(config, rng);
        }
        let rounds = config.simulations.saturating_sub(self.root_visits());
        for _ in 0..rounds {
            self.simulate(evaluator, config)?;
        }
        Ok(self.policy())
    }

    fn add_root_noise<R: Rng + ?Sized>(&mut self, config: &SearchConfig, rng: &mut R) {
        let edges = &mut self.nodes[self.root].edges;
        let noise: Vec<f64> = match edges.len() {
            2 => Dirichlet::new([config.dirichlet_alpha; 2])
                .expect("valid alpha")
                .sample(rng)
                .to_vec(),
            3 => Dirichlet::new([config.dirichlet_alpha; 3])
                .expect("valid alpha")
                .sample(rng)
                .to_vec(),
            _ => return,
        };
        let sum: f64 = noise.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return;
        }
        let eps = config.dirichlet_epsilon;
        for (edge, lambda) in edges.iter_mut().zip(noise) {
            edge.stats.prior = (1.0 - eps) * edge.stats.prior + eps * lambda / sum;
        }
    }

    /// Expands a non-terminal leaf and returns the evaluator's value.
    fn expand<E: LeafEvaluator + ?Sized>(
        &mut self,
        id: NodeId,
        evaluator: &mut E,
    ) -> Result<f64, SearchError> {
        let node = &mut self.nodes[id];
        let out = evaluator.evaluate_leaf(&node.state)?;
        out.check()?;
        self.evaluations += 1;
        let legal = node.state.legal_moves();
        let mass: f64 = legal.iter().map(|&mv| out.prior(mv)).sum();
        node.edges = legal
            .iter()
            .map(|&mv| {
                let prior = if mass > 0.0 {
                    out.prior(mv) / mass
                } else {
                    1.0 / legal.len() as f64
                };
                Edge {
                    mv,
                    stats: EdgeStats::with_prior(prior),
                    child: None,
                }
            })
            .collect();
        node.expanded = true;
        Ok(out.value)
    }

    fn simulate<E: LeafEvaluator + ?Sized>(
        &mut self,
        evaluator: &mut E,
        config: &SearchConfig,
    ) -> Result<(), SearchError> {
        let mut path: Vec<(NodeId, usize)> = Vec::new();
        let mut id = self.root;
        let value = loop {
            let node = &self.nodes[id];
            if node.status.is_terminal() {
                break f64::from(node.state.score().contacts);
            }
            if !node.expanded {
                break self.expand(id, evaluator)?;
            }
            let slot = select_slot(&node.edges, self.r_upper, config.c_alpha);
            let mv = node.edges[slot].mv;
            path.push((id, slot));
            id = match node.edges[slot].child {
                Some(child) => child,
                None => {
                    let state = node
                        .state
                        .apply_move(mv)
                        .expect("edges only hold legal moves");
                    let child = self.nodes.len();
                    self.nodes.push(Node::new(state));
                    self.nodes[id].edges[slot].child = Some(child);
                    child
                }
            };
        };
        backpropagate(&mut self.nodes, &path, value);
        Ok(())
    }

    /// Makes the child reached by `mv` the new root, keeping its subtree and
    /// dropping everything else.
    pub fn advance(&mut self, mv: RelativeMove) -> Result<(), SearchError> {
        let root = &self.nodes[self.root];
        let child = root.edges.iter().find(|e| e.mv == mv).and_then(|e| e.child);
        match child {
            Some(child) => {
                let mut kept = Vec::new();
                copy_subtree(&mut self.nodes, child, &mut kept);
                self.nodes = kept;
                self.root = 0;
            }
            None => {
                let state = root
                    .state
                    .apply_move(mv)
                    .map_err(|_| SearchError::IllegalMove(mv))?;
                self.nodes = vec![Node::new(state)];
                self.root = 0;
            }
        }
        Ok(())
    }
}

fn select_slot(edges: &[Edge], r_upper: u32, c_alpha: f64) -> usize {
    let parent_visits: u32 = edges.iter().map(|e| e.stats.visits).sum();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (slot, e) in edges.iter().enumerate() {
        let score = selection_score(&e.stats, parent_visits, r_upper, c_alpha);
        if score > best_score {
            best = slot;
            best_score = score;
        }
    }
    best
}

fn backpropagate(nodes: &mut [Node], path: &[(NodeId, usize)], value: f64) {
    for &(id, slot) in path.iter().rev() {
        nodes[id].edges[slot].stats.update(value);
    }
}

fn copy_subtree(from: &mut [Node], id: NodeId, into: &mut Vec<Node>) -> NodeId {
    let new_id = into.len();
    let mut node = from[id].clone();
    let children: Vec<(usize, NodeId)> = node
        .edges
        .iter()
        .enumerate()
        .filter_map(|(slot, e)| e.child.map(|c| (slot, c)))
        .collect();
    for e in node.edges.iter_mut() {
        e.child = None;
    }
    into.push(node);
    for (slot, child) in children {
        let copied = copy_subtree(from, child, into);
        into[new_id].edges[slot].child = Some(copied);
    }
    new_id
}

/// One fresh search from `root`.
pub fn run_search<E, R>(
    root: &FoldState,
    evaluator: &mut E,
    config: &SearchConfig,
    noise: Option<&mut R>,
) -> Result<SearchPolicy, SearchError>
where
    E: LeafEvaluator + ?Sized,
    R: Rng + ?Sized,
{
    SearchTree::new(root.clone()).search(evaluator, config, noise)
}
