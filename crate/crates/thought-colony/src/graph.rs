//! Layered reasoning graphs: trees of intermediate thoughts augmented with a
//! synthetic start node `s0` and end node `sf`.
//!
//! A [`ReasoningGraph`] is built either from a raw [`ThoughtTree`] via
//! [`augment`], or directly from a problem statement and a
//! [`ThoughtGenerator`](crate::providers::ThoughtGenerator) via
//! [`generate_tot`]. After augmentation the graph is immutable and safe to
//! share across threads.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::providers::ThoughtGenerator;

/// Dense integer identifier of a node within one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single intermediate reasoning step.
///
/// The two sentinel nodes `s0` and `sf` are also stored as `Thought`s; they
/// are the only nodes allowed to carry empty text. Their `depth` values are
/// nominal (`s0` shares depth 0 with the root, `sf` sits one layer past the
/// deepest leaf); layering is only meaningful for real thoughts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thought {
    pub id: NodeId,
    pub text: String,
    pub depth: usize,
}

/// Problem input plus the reasoning accumulated on the walk to a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningState {
    pub problem: String,
    pub chain: Vec<String>,
}

impl ReasoningState {
    /// Concatenation of problem and chain, used as embedding input.
    pub fn text(&self) -> String {
        let mut out = self.problem.clone();
        for step in &self.chain {
            out.push('\n');
            out.push_str(step);
        }
        out
    }
}

/// An ordered walk through a graph, usually `s0 -> ... -> sf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<NodeId>);

impl Path {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        Path(nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of real thoughts on a complete path (sentinels excluded).
    pub fn thought_count(&self) -> usize {
        self.0.len().saturating_sub(2)
    }

    /// Node ids between `s0` and `sf` on a complete path.
    pub fn thought_nodes(&self) -> &[NodeId] {
        if self.0.len() < 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    /// Consecutive node pairs along the walk.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl std::fmt::Display for Path {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", ids.join("->"))
    }
}

/// Bounds for tree-of-thought generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToTGenConfig {
    /// Maximum expansion depth `D`; thoughts are generated for depths `1..=D`.
    pub max_depth: usize,
    /// Maximum candidate thoughts `B` kept per expansion.
    pub branches: usize,
    /// Hard cap on `B^D`; generation is refused above it.
    #[serde(default = "default_node_cap")]
    pub node_cap: u64,
}

fn default_node_cap() -> u64 {
    10_000
}

impl Default for ToTGenConfig {
    fn default() -> Self {
        ToTGenConfig {
            max_depth: 3,
            branches: 3,
            node_cap: default_node_cap(),
        }
    }
}

impl ToTGenConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.max_depth == 0 || self.branches == 0 {
            return Err(GraphError::InvalidTree {
                reason: "max_depth and branches must be at least 1".into(),
            });
        }
        let bound = (self.branches as u128).checked_pow(self.max_depth as u32);
        match bound {
            Some(b) if b <= self.node_cap as u128 => Ok(()),
            _ => Err(GraphError::NodeCapExceeded {
                bound: bound.unwrap_or(u128::MAX),
                cap: self.node_cap,
            }),
        }
    }
}

/// Errors raised while building or querying reasoning graphs.
#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("tree has no nodes")]
    EmptyTree,
    #[error("problem text is empty")]
    EmptyProblem,
    #[error("invalid tree: {reason}")]
    InvalidTree { reason: String },
    #[error("node bound {bound} exceeds cap {cap}")]
    NodeCapExceeded { bound: u128, cap: u64 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not reachable from s0")]
    UnreachableNode(NodeId),
    #[error("node {0} has multiple predecessors; its state is ambiguous")]
    AmbiguousState(NodeId),
    #[error("thought generator failed while expanding node {node}: {source}")]
    Generator {
        node: NodeId,
        #[source]
        source: crate::providers::ProviderError,
    },
}

/// Collapses all runs of whitespace to single spaces and trims. Thought
/// dedup and planted-set membership both compare normalized text.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A raw rooted tree of thoughts, the input to [`augment`].
///
/// Nodes live in an arena; the node added first is the root.
#[derive(Debug, Clone, Default)]
pub struct ThoughtTree {
    problem: String,
    texts: Vec<String>,
    children: Vec<Vec<usize>>,
}

impl ThoughtTree {
    pub fn new(problem: impl Into<String>) -> Self {
        ThoughtTree {
            problem: problem.into(),
            texts: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    /// Adds the root node. Panics if a root already exists.
    pub fn add_root(&mut self, text: impl Into<String>) -> usize {
        assert!(self.texts.is_empty(), "tree already has a root");
        self.texts.push(text.into());
        self.children.push(Vec::new());
        0
    }

    /// Adds a child under `parent` and returns its arena index.
    pub fn add_child(&mut self, parent: usize, text: impl Into<String>) -> usize {
        assert!(parent < self.texts.len(), "no such parent node");
        let idx = self.texts.len();
        self.texts.push(text.into());
        self.children.push(Vec::new());
        self.children[parent].push(idx);
        idx
    }
}

/// Directed acyclic layered graph of thoughts with unique source `s0` and
/// sink `sf`. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningGraph {
    problem: String,
    nodes: Vec<Thought>,
    successors: Vec<Vec<NodeId>>,
    predecessors: Vec<Vec<NodeId>>,
    s0: NodeId,
    sf: NodeId,
}

impl ReasoningGraph {
    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn s0(&self) -> NodeId {
        self.s0
    }

    pub fn sf(&self) -> NodeId {
        self.sf
    }

    /// All nodes including the sentinels, ordered by id.
    pub fn nodes(&self) -> &[Thought] {
        &self.nodes
    }

    /// Number of real thoughts (sentinels excluded).
    pub fn thought_count(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Result<&Thought, GraphError> {
        self.nodes.get(id.index()).ok_or(GraphError::UnknownNode(id))
    }

    pub fn is_sentinel(&self, id: NodeId) -> bool {
        id == self.s0 || id == self.sf
    }

    /// Successor ids of `i` in ascending id order.
    pub fn successors(&self, i: NodeId) -> Result<&[NodeId], GraphError> {
        self.successors
            .get(i.index())
            .map(Vec::as_slice)
            .ok_or(GraphError::UnknownNode(i))
    }

    pub fn predecessors(&self, i: NodeId) -> Result<&[NodeId], GraphError> {
        self.predecessors
            .get(i.index())
            .map(Vec::as_slice)
            .ok_or(GraphError::UnknownNode(i))
    }

    /// All edges in ascending `(i, j)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.iter().map(move |&j| (NodeId(i as u32), j)))
    }

    /// Problem input plus the texts of the strict ancestors of `i`, in
    /// root-to-parent order. The node's own text is not included; sentinels
    /// contribute nothing.
    pub fn state_of(&self, i: NodeId) -> Result<ReasoningState, GraphError> {
        if !self.contains(i) {
            return Err(GraphError::UnknownNode(i));
        }
        let mut chain_rev = Vec::new();
        let mut cur = i;
        while cur != self.s0 {
            let preds = self.predecessors(cur)?;
            let parent = match preds {
                [] => return Err(GraphError::UnreachableNode(i)),
                [p] => *p,
                _ => return Err(GraphError::AmbiguousState(cur)),
            };
            if !self.is_sentinel(parent) {
                chain_rev.push(self.node(parent)?.text.clone());
            }
            cur = parent;
        }
        chain_rev.reverse();
        Ok(ReasoningState {
            problem: self.problem.clone(),
            chain: chain_rev,
        })
    }

    /// Thought texts along a path, sentinels skipped.
    pub fn chain_texts(&self, path: &Path) -> Result<Vec<String>, GraphError> {
        path.nodes()
            .iter()
            .filter(|&&id| !self.is_sentinel(id))
            .map(|&id| self.node(id).map(|t| t.text.clone()))
            .collect()
    }

    /// Checks that `path` is a complete `s0 -> ... -> sf` walk along edges.
    pub fn is_complete_path(&self, path: &Path) -> bool {
        let nodes = path.nodes();
        if nodes.len() < 3 || nodes[0] != self.s0 || *nodes.last().unwrap() != self.sf {
            return false;
        }
        path.edges().all(|(i, j)| {
            self.successors(i)
                .map(|succ| succ.contains(&j))
                .unwrap_or(false)
        })
    }

    /// Verifies every structural invariant; used after construction and
    /// deserialization.
    pub fn validate(&self) -> Result<(), GraphError> {
        let invalid = |reason: &str| GraphError::InvalidTree {
            reason: reason.to_string(),
        };
        if self.nodes.len() < 3 {
            return Err(invalid("graph needs at least one thought plus s0 and sf"));
        }
        for (idx, t) in self.nodes.iter().enumerate() {
            if t.id.index() != idx {
                return Err(invalid("node ids must be dense and ordered"));
            }
            if !self.is_sentinel(t.id) && t.text.is_empty() {
                return Err(invalid("thought text must be non-empty"));
            }
        }
        if !self.predecessors(self.s0)?.is_empty() {
            return Err(invalid("s0 must have in-degree 0"));
        }
        if !self.successors(self.sf)?.is_empty() {
            return Err(invalid("sf must have out-degree 0"));
        }
        if self.successors(self.s0)?.len() != 1 {
            return Err(invalid("s0 must have exactly one edge, to the root"));
        }
        // Layering and tree shape: every non-sentinel has exactly one parent
        // and sits one layer below it.
        for t in &self.nodes {
            if self.is_sentinel(t.id) {
                continue;
            }
            let preds = self.predecessors(t.id)?;
            if preds.len() != 1 {
                return Err(invalid("every thought must have exactly one parent"));
            }
            let parent = self.node(preds[0])?;
            if preds[0] == self.s0 {
                if t.depth != 0 {
                    return Err(invalid("root depth must be 0"));
                }
            } else if t.depth != parent.depth + 1 {
                return Err(invalid("edges must go from layer d to layer d+1"));
            }
        }
        // Reachability both ways.
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([self.s0]);
        seen[self.s0.index()] = true;
        while let Some(i) = queue.pop_front() {
            for &j in self.successors(i)? {
                if !seen[j.index()] {
                    seen[j.index()] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(idx) = seen.iter().position(|s| !s) {
            return Err(GraphError::UnreachableNode(NodeId(idx as u32)));
        }
        for t in &self.nodes {
            if t.id != self.sf && self.successors(t.id)?.is_empty() {
                return Err(invalid("every node except sf must reach sf"));
            }
        }
        // Dedup per layer over real thoughts.
        let mut layer_texts: HashMap<usize, HashSet<&str>> = HashMap::new();
        for t in &self.nodes {
            if self.is_sentinel(t.id) {
                continue;
            }
            if !layer_texts.entry(t.depth).or_default().insert(&t.text) {
                return Err(invalid("duplicate thought text within one depth layer"));
            }
        }
        Ok(())
    }

    /// Serializes to the canonical JSON document (nodes by id, edges sorted).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphDoc::from(self)).expect("graph serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&GraphDoc::from(self)).expect("graph serialization cannot fail")
    }

    /// Parses and validates a graph from its JSON document.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| GraphError::InvalidTree {
            reason: format!("malformed graph document: {e}"),
        })?;
        doc.try_into()
    }
}

/// Wire form of a graph: `problem`, `nodes`, `edges`, `s0`, `sf`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub problem: String,
    pub nodes: Vec<Thought>,
    pub edges: Vec<(NodeId, NodeId)>,
    pub s0: NodeId,
    pub sf: NodeId,
}

impl From<&ReasoningGraph> for GraphDoc {
    fn from(g: &ReasoningGraph) -> Self {
        GraphDoc {
            problem: g.problem.clone(),
            nodes: g.nodes.clone(),
            edges: g.edges().collect(),
            s0: g.s0,
            sf: g.sf,
        }
    }
}

impl TryFrom<GraphDoc> for ReasoningGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDoc) -> Result<Self, GraphError> {
        let n = doc.nodes.len();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for &(i, j) in &doc.edges {
            if i.index() >= n || j.index() >= n {
                return Err(GraphError::UnknownNode(if i.index() >= n { i } else { j }));
            }
            successors[i.index()].push(j);
            predecessors[j.index()].push(i);
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let g = ReasoningGraph {
            problem: doc.problem,
            nodes: doc.nodes,
            successors,
            predecessors,
            s0: doc.s0,
            sf: doc.sf,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Attaches `s0` above the root and `sf` below every leaf of a raw tree.
///
/// Node ids are assigned in BFS order over the tree; `s0` and `sf` take the
/// next two ids. All thought texts are whitespace-normalized. Already
/// augmented inputs are rejected because sentinels carry empty text, which is
/// invalid for tree nodes.
pub fn augment(tree: &ThoughtTree) -> Result<ReasoningGraph, GraphError> {
    if tree.is_empty() {
        return Err(GraphError::EmptyTree);
    }
    // BFS over arena indices, assigning dense ids in visit order.
    let mut order = Vec::with_capacity(tree.len());
    let mut depth_of = vec![0usize; tree.len()];
    let mut visited = vec![false; tree.len()];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    while let Some(idx) = queue.pop_front() {
        order.push(idx);
        for &c in &tree.children[idx] {
            if visited[c] {
                return Err(GraphError::InvalidTree {
                    reason: "node linked under two parents".into(),
                });
            }
            visited[c] = true;
            depth_of[c] = depth_of[idx] + 1;
            queue.push_back(c);
        }
    }
    if order.len() != tree.len() {
        return Err(GraphError::InvalidTree {
            reason: "tree contains nodes not reachable from the root".into(),
        });
    }

    let mut id_of = vec![NodeId(0); tree.len()];
    let mut nodes = Vec::with_capacity(tree.len() + 2);
    let mut layer_texts: HashMap<usize, HashSet<String>> = HashMap::new();
    for (id, &idx) in order.iter().enumerate() {
        let text = normalize_text(&tree.texts[idx]);
        if text.is_empty() {
            return Err(GraphError::InvalidTree {
                reason: format!("empty thought text at depth {}", depth_of[idx]),
            });
        }
        if !layer_texts
            .entry(depth_of[idx])
            .or_default()
            .insert(text.clone())
        {
            return Err(GraphError::InvalidTree {
                reason: format!(
                    "duplicate thought text at depth {}: {text:?}",
                    depth_of[idx]
                ),
            });
        }
        id_of[idx] = NodeId(id as u32);
        nodes.push(Thought {
            id: NodeId(id as u32),
            text,
            depth: depth_of[idx],
        });
    }

    let max_depth = nodes.iter().map(|t| t.depth).max().unwrap_or(0);
    let s0 = NodeId(tree.len() as u32);
    let sf = NodeId(tree.len() as u32 + 1);
    nodes.push(Thought {
        id: s0,
        text: String::new(),
        depth: 0,
    });
    nodes.push(Thought {
        id: sf,
        text: String::new(),
        depth: max_depth + 1,
    });

    let n = nodes.len();
    let mut successors = vec![Vec::new(); n];
    let mut predecessors = vec![Vec::new(); n];
    let link = |i: NodeId, j: NodeId, succ: &mut Vec<Vec<NodeId>>, pred: &mut Vec<Vec<NodeId>>| {
        succ[i.index()].push(j);
        pred[j.index()].push(i);
    };
    link(s0, id_of[order[0]], &mut successors, &mut predecessors);
    for &idx in &order {
        if tree.children[idx].is_empty() {
            link(id_of[idx], sf, &mut successors, &mut predecessors);
        } else {
            for &c in &tree.children[idx] {
                link(id_of[idx], id_of[c], &mut successors, &mut predecessors);
            }
        }
    }
    for list in successors.iter_mut().chain(predecessors.iter_mut()) {
        list.sort_unstable();
    }

    let g = ReasoningGraph {
        problem: normalize_text(&tree.problem),
        nodes,
        successors,
        predecessors,
        s0,
        sf,
    };
    g.validate()?;
    Ok(g)
}

/// Generates a tree of thoughts breadth-first and returns it augmented.
///
/// The root holds the problem statement. Every node at depth `d < D` is
/// expanded exactly once: the generator receives the problem and the step
/// texts taken below the root (so the root itself expands with an empty step
/// list), and up to `B` distinct thoughts from its reply become children.
/// Thoughts already seen at the same target depth are dropped, so the result
/// stays a tree.
pub fn generate_tot(
    problem: &str,
    generator: &dyn ThoughtGenerator,
    cfg: &ToTGenConfig,
) -> Result<ReasoningGraph, GraphError> {
    cfg.validate()?;
    let problem = normalize_text(problem);
    if problem.is_empty() {
        return Err(GraphError::EmptyProblem);
    }

    let mut tree = ThoughtTree::new(problem.clone());
    let root = tree.add_root(problem.clone());
    // Steps below the root for each frontier node, reused as generator input.
    let mut steps_of: Vec<Vec<String>> = vec![Vec::new()];
    let mut frontier = vec![root];

    for _depth in 0..cfg.max_depth {
        let mut seen: HashSet<String> = HashSet::new();
        let mut next_frontier = Vec::new();
        let mut next_steps = Vec::new();
        for (slot, &node) in frontier.iter().enumerate() {
            let steps = &steps_of[slot];
            let thoughts = generator
                .generate(&problem, steps, cfg.branches)
                .map_err(|source| GraphError::Generator {
                    node: NodeId(node as u32),
                    source,
                })?;
            let mut added = 0;
            for text in thoughts {
                if added == cfg.branches {
                    break;
                }
                let text = normalize_text(&text);
                if text.is_empty() || !seen.insert(text.clone()) {
                    continue;
                }
                added += 1;
                let child = tree.add_child(node, text.clone());
                let mut child_steps = steps.clone();
                child_steps.push(text);
                next_frontier.push(child);
                next_steps.push(child_steps);
            }
            if tree.len() as u64 > cfg.node_cap {
                return Err(GraphError::NodeCapExceeded {
                    bound: tree.len() as u128,
                    cap: cfg.node_cap,
                });
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        frontier = next_frontier;
        steps_of = next_steps;
    }

    augment(&tree)
}
