//! Acyclic networks, (k,n) fractional linear codes, global transfer matrices
//! and terminal decodability.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Field, PrimeField};
use crate::linalg::{solve_left, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Intermediate,
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub terminal: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<Node>,
    pub messages: Vec<Message>,
    pub edges: Vec<Edge>,
    pub demands: Vec<Demand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateNode { node: String },
    DuplicateEdge { edge: String },
    DuplicateMessage { message: String },
    UnknownEdgeEndpoint { edge: String, node: String },
    SourceHasInEdge { node: String, edge: String },
    TerminalHasOutEdge { node: String, edge: String },
    CycleDetected { nodes: Vec<String> },
    MessageSourceUnknown { message: String, source: String },
    MessageSourceNotSource { message: String, source: String },
    DemandUnknownTerminal { terminal: String, message: String },
    DemandNotTerminal { terminal: String, message: String },
    DemandUnknownMessage { terminal: String, message: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode { node } => write!(f, "duplicate node {node}"),
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge {edge}"),
            Violation::DuplicateMessage { message } => write!(f, "duplicate message {message}"),
            Violation::UnknownEdgeEndpoint { edge, node } => write!(f, "edge {edge} references unknown node {node}"),
            Violation::SourceHasInEdge { node, edge } => write!(f, "source {node} has incoming edge {edge}"),
            Violation::TerminalHasOutEdge { node, edge } => write!(f, "terminal {node} has outgoing edge {edge}"),
            Violation::CycleDetected { nodes } => write!(f, "cycle through {}", nodes.join(", ")),
            Violation::MessageSourceUnknown { message, source } => {
                write!(f, "message {message} generated at unknown node {source}")
            }
            Violation::MessageSourceNotSource { message, source } => {
                write!(f, "message {message} generated at non-source {source}")
            }
            Violation::DemandUnknownTerminal { terminal, message } => {
                write!(f, "demand for {message} at unknown node {terminal}")
            }
            Violation::DemandNotTerminal { terminal, message } => {
                write!(f, "demand for {message} at non-terminal {terminal}")
            }
            Violation::DemandUnknownMessage { terminal, message } => {
                write!(f, "{terminal} demands unknown message {message}")
            }
        }
    }
}

impl NetworkSpec {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn message_index(&self, id: &str) -> Option<usize> {
        self.messages.iter().position(|m| m.id == id)
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Every structural problem; empty iff the spec is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
        for n in &self.nodes {
            if kinds.insert(&n.id, n.kind).is_some() {
                out.push(Violation::DuplicateNode { node: n.id.clone() });
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.as_str()) {
                out.push(Violation::DuplicateEdge { edge: e.id.clone() });
            }
            for end in [&e.tail, &e.head] {
                if !kinds.contains_key(end.as_str()) {
                    out.push(Violation::UnknownEdgeEndpoint {
                        edge: e.id.clone(),
                        node: end.clone(),
                    });
                }
            }
            if kinds.get(e.head.as_str()) == Some(&NodeKind::Source) {
                out.push(Violation::SourceHasInEdge {
                    node: e.head.clone(),
                    edge: e.id.clone(),
                });
            }
            if kinds.get(e.tail.as_str()) == Some(&NodeKind::Terminal) {
                out.push(Violation::TerminalHasOutEdge {
                    node: e.tail.clone(),
                    edge: e.id.clone(),
                });
            }
        }
        let mut msgs = BTreeSet::new();
        for m in &self.messages {
            if !msgs.insert(m.id.as_str()) {
                out.push(Violation::DuplicateMessage { message: m.id.clone() });
            }
            match kinds.get(m.source.as_str()) {
                None => out.push(Violation::MessageSourceUnknown {
                    message: m.id.clone(),
                    source: m.source.clone(),
                }),
                Some(NodeKind::Source) => {}
                Some(_) => out.push(Violation::MessageSourceNotSource {
                    message: m.id.clone(),
                    source: m.source.clone(),
                }),
            }
        }
        for d in &self.demands {
            match kinds.get(d.terminal.as_str()) {
                None => out.push(Violation::DemandUnknownTerminal {
                    terminal: d.terminal.clone(),
                    message: d.message.clone(),
                }),
                Some(NodeKind::Terminal) => {}
                Some(_) => out.push(Violation::DemandNotTerminal {
                    terminal: d.terminal.clone(),
                    message: d.message.clone(),
                }),
            }
            if !msgs.contains(d.message.as_str()) {
                out.push(Violation::DemandUnknownMessage {
                    terminal: d.terminal.clone(),
                    message: d.message.clone(),
                });
            }
        }
        if let Err(nodes) = self.node_order() {
            out.push(Violation::CycleDetected { nodes });
        }
        out
    }

    /// Kahn's algorithm, always taking the earliest-listed ready node.
    /// On a cycle, returns the nodes that could not be ordered.
    fn node_order(&self) -> Result<Vec<usize>, Vec<String>> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut indeg = vec![0usize; self.nodes.len()];
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if let (Some(&t), Some(&h)) = (index.get(e.tail.as_str()), index.get(e.head.as_str())) {
                indeg[h] += 1;
                succ[t].push(h);
            }
        }
        let mut ready: BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &h in &succ[i] {
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    ready.insert(h);
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            let placed: BTreeSet<usize> = order.into_iter().collect();
            Err((0..self.nodes.len())
                .filter(|i| !placed.contains(i))
                .map(|i| self.nodes[i].id.clone())
                .collect())
        }
    }

    /// Nodes with a directed path to `target` (including `target`).
    pub fn ancestors(&self, target: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([target.to_string()]);
        let mut stack = vec![target.to_string()];
        while let Some(v) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.head == v) {
                if seen.insert(e.tail.clone()) {
                    stack.push(e.tail.clone());
                }
            }
        }
        seen
    }

    /// Graphviz rendering: boxes for sources, ellipses for intermediates,
    /// double circles for terminals.
    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph network {\n  rankdir=TB;\n");
        for n in &self.nodes {
            let shape = match n.kind {
                NodeKind::Source => "box",
                NodeKind::Intermediate => "ellipse",
                NodeKind::Terminal => "doublecircle",
            };
            let _ = writeln!(out, "  {} [shape={shape}];", q(&n.id));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {} -> {} [label={}];", q(&e.tail), q(&e.head), q(&e.id));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }
}

/// Adjacency lookups and a fixed topological edge order for a valid spec.
#[derive(Debug, Clone)]
pub struct Topology {
    /// Edge indices into `spec.edges`, topologically sorted.
    pub edge_order: Vec<usize>,
    in_edges: HashMap<String, Vec<usize>>,
    out_edges: HashMap<String, Vec<usize>>,
    messages_at: HashMap<String, Vec<usize>>,
}

impl Topology {
    pub fn new(spec: &NetworkSpec) -> Result<Self, NetError> {
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(NetError::InvalidSpec(violations));
        }
        let order = spec.node_order().expect("validated");
        let mut rank = HashMap::new();
        for (r, &i) in order.iter().enumerate() {
            rank.insert(spec.nodes[i].id.as_str(), r);
        }
        let mut edge_order: Vec<usize> = (0..spec.edges.len()).collect();
        edge_order.sort_by_key(|&i| (rank[spec.edges[i].tail.as_str()], i));
        let mut in_edges: HashMap<String, Vec<usize>> = HashMap::new();
        let mut out_edges: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in spec.edges.iter().enumerate() {
            in_edges.entry(e.head.clone()).or_default().push(i);
            out_edges.entry(e.tail.clone()).or_default().push(i);
        }
        let mut messages_at: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, m) in spec.messages.iter().enumerate() {
            messages_at.entry(m.source.clone()).or_default().push(i);
        }
        Ok(Self {
            edge_order,
            in_edges,
            out_edges,
            messages_at,
        })
    }

    pub fn in_edges(&self, node: &str) -> &[usize] {
        self.in_edges.get(node).map_or(&[], Vec::as_slice)
    }

    pub fn out_edges(&self, node: &str) -> &[usize] {
        self.out_edges.get(node).map_or(&[], Vec::as_slice)
    }

    pub fn messages_at(&self, node: &str) -> &[usize] {
        self.messages_at.get(node).map_or(&[], Vec::as_slice)
    }

    /// Inputs available to edges leaving `node`: generated messages in
    /// message-list order, then in-edges in edge-list order.
    pub fn inputs(&self, spec: &NetworkSpec, node: &str) -> Vec<Input> {
        self.messages_at(node)
            .iter()
            .map(|&m| Input::Message(spec.messages[m].id.clone()))
            .chain(self.in_edges(node).iter().map(|&e| Input::Edge(spec.edges[e].id.clone())))
            .collect()
    }
}

/// What a local coding matrix multiplies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Input {
    Message(String),
    Edge(String),
}

impl Input {
    pub fn id(&self) -> &str {
        match self {
            Input::Message(s) | Input::Edge(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalKey {
    pub edge: String,
    pub input: Input,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecoderKey {
    pub terminal: String,
    pub message: String,
    pub edge: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("input {input} is not available at the tail of edge {edge}")]
    InputNotAvailable { edge: String, input: String },
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSpec(Vec<Violation>),
}

/// A (k,n) fractional linear code: sources emit k symbols, edges carry n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalCode<F: Field> {
    pub k: usize,
    pub n: usize,
    pub field: F,
    pub locals: BTreeMap<LocalKey, Matrix<F>>,
    pub decoders: BTreeMap<DecoderKey, Matrix<F>>,
}

impl<F: Field> FractionalCode<F> {
    pub fn new(field: &F, k: usize, n: usize) -> Self {
        Self {
            k,
            n,
            field: field.clone(),
            locals: BTreeMap::new(),
            decoders: BTreeMap::new(),
        }
    }

    pub fn set_local(&mut self, edge: &str, input: Input, m: Matrix<F>) {
        self.locals.insert(
            LocalKey {
                edge: edge.to_string(),
                input,
            },
            m,
        );
    }

    pub fn local(&self, edge: &str, input: &Input) -> Option<&Matrix<F>> {
        self.locals.get(&LocalKey {
            edge: edge.to_string(),
            input: input.clone(),
        })
    }

    /// Field, shape and adjacency checks against `spec`.
    pub fn check(&self, spec: &NetworkSpec, topo: &Topology) -> Result<(), NetError> {
        let check_field = |what: &str, m: &Matrix<F>| {
            if *m.field() != self.field {
                Err(NetError::ShapeMismatch {
                    what: what.to_string(),
                    expected: format!("entries over {:?}", self.field),
                    found: format!("entries over {:?}", m.field()),
                })
            } else {
                Ok(())
            }
        };
        for (key, m) in &self.locals {
            let edge = spec.edge(&key.edge).ok_or_else(|| NetError::UnknownEdge(key.edge.clone()))?;
            let what = format!("local ({}, {})", key.input.id(), key.edge);
            check_field(&what, m)?;
            let available = topo.inputs(spec, &edge.tail).contains(&key.input);
            if !available {
                return Err(NetError::InputNotAvailable {
                    edge: key.edge.clone(),
                    input: key.input.id().to_string(),
                });
            }
            let expected = match key.input {
                Input::Message(_) => (self.n, self.k),
                Input::Edge(_) => (self.n, self.n),
            };
            if m.shape() != expected {
                return Err(NetError::ShapeMismatch {
                    what,
                    expected: format!("{}x{}", expected.0, expected.1),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        for (key, m) in &self.decoders {
            let edge = spec.edge(&key.edge).ok_or_else(|| NetError::UnknownEdge(key.edge.clone()))?;
            let what = format!("decoder ({}, {}, {})", key.terminal, key.message, key.edge);
            check_field(&what, m)?;
            if edge.head != key.terminal {
                return Err(NetError::InputNotAvailable {
                    edge: key.terminal.clone(),
                    input: key.edge.clone(),
                });
            }
            if m.shape() != (self.k, self.n) {
                return Err(NetError::ShapeMismatch {
                    what,
                    expected: format!("{}x{}", self.k, self.n),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        Ok(())
    }
}

/// Global transfer matrices: edge id -> `n x (k M)`, column blocks in
/// message-list order.
pub fn global_transfer<F: Field>(spec: &NetworkSpec, code: &FractionalCode<F>) -> Result<BTreeMap<String, Matrix<F>>, NetError> {
    let topo = Topology::new(spec)?;
    code.check(spec, &topo)?;
    Ok(transfer_with(spec, &topo, code))
}

fn transfer_with<F: Field>(spec: &NetworkSpec, topo: &Topology, code: &FractionalCode<F>) -> BTreeMap<String, Matrix<F>> {
    let (k, n, f) = (code.k, code.n, &code.field);
    let width = k * spec.messages.len();
    let mut g: BTreeMap<String, Matrix<F>> = BTreeMap::new();
    for &ei in &topo.edge_order {
        let edge = &spec.edges[ei];
        let mut acc = Matrix::zeros(f, n, width);
        for &mi in topo.messages_at(&edge.tail) {
            if let Some(a) = code.local(&edge.id, &Input::Message(spec.messages[mi].id.clone())) {
                let mut placed = Matrix::zeros(f, n, width);
                placed.set_block(0, mi * k, a);
                acc = acc.add(&placed).expect("shapes checked");
            }
        }
        for &pi in topo.in_edges(&edge.tail) {
            let prev = &spec.edges[pi].id;
            if let Some(a) = code.local(&edge.id, &Input::Edge(prev.clone())) {
                acc = acc.add(&a.mul(&g[prev]).expect("shapes checked")).expect("shapes checked");
            }
        }
        g.insert(edge.id.clone(), acc);
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandStatus<F: Field> {
    pub terminal: String,
    pub message: String,
    pub satisfied: bool,
    /// Per in-edge `k x n` decoders when satisfied, in edge-list order.
    pub decoders: Vec<(String, Matrix<F>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport<F: Field> {
    pub demands: Vec<DemandStatus<F>>,
    pub all_satisfied: bool,
}

impl<F: Field> DecodeReport<F> {
    pub fn satisfied_count(&self) -> usize {
        self.demands.iter().filter(|d| d.satisfied).count()
    }
}

fn selector<F: Field>(f: &F, k: usize, messages: usize, m: usize) -> Matrix<F> {
    let mut sel = Matrix::zeros(f, k, k * messages);
    sel.set_block(0, m * k, &Matrix::identity(f, k));
    sel
}

fn stacked_inputs<F: Field>(spec: &NetworkSpec, topo: &Topology, g: &BTreeMap<String, Matrix<F>>, code: &FractionalCode<F>, terminal: &str) -> (Vec<usize>, Matrix<F>) {
    let ins = topo.in_edges(terminal).to_vec();
    let parts: Vec<&Matrix<F>> = ins.iter().map(|&e| &g[&spec.edges[e].id]).collect();
    let s = Matrix::vstack(&code.field, code.k * spec.messages.len(), &parts).expect("uniform widths");
    (ins, s)
}

/// Solves for terminal decoders and reports which demands are met.
pub fn decode_check<F: Field>(spec: &NetworkSpec, code: &FractionalCode<F>) -> Result<DecodeReport<F>, NetError> {
    let topo = Topology::new(spec)?;
    code.check(spec, &topo)?;
    let g = transfer_with(spec, &topo, code);
    Ok(decode_with(spec, &topo, code, &g))
}

fn decode_with<F: Field>(spec: &NetworkSpec, topo: &Topology, code: &FractionalCode<F>, g: &BTreeMap<String, Matrix<F>>) -> DecodeReport<F> {
    let (k, n) = (code.k, code.n);
    let mut demands = Vec::new();
    for d in &spec.demands {
        let mi = spec.message_index(&d.message).expect("validated");
        let (ins, s) = stacked_inputs(spec, topo, g, code, &d.terminal);
        let sel = selector(&code.field, k, spec.messages.len(), mi);
        // A terminal without in-edges decodes nothing (k >= 1).
        let solved = if ins.is_empty() { None } else { solve_left(&s, &sel).expect("widths agree") };
        let satisfied = solved.is_some();
        let decoders = solved
            .map(|r| {
                ins.iter()
                    .enumerate()
                    .map(|(j, &e)| (spec.edges[e].id.clone(), r.block(0, j * n, k, n)))
                    .collect()
            })
            .unwrap_or_default();
        demands.push(DemandStatus {
            terminal: d.terminal.clone(),
            message: d.message.clone(),
            satisfied,
            decoders,
        });
    }
    let all_satisfied = demands.iter().all(|d| d.satisfied);
    DecodeReport { demands, all_satisfied }
}

/// Applies the stored decoders: `Some(true)` iff every demand has decoders
/// that reproduce the demanded message exactly; `None` when the code carries
/// no decoders.
pub fn check_decoders<F: Field>(spec: &NetworkSpec, code: &FractionalCode<F>) -> Result<Option<bool>, NetError> {
    if code.decoders.is_empty() {
        return Ok(None);
    }
    let topo = Topology::new(spec)?;
    code.check(spec, &topo)?;
    let g = transfer_with(spec, &topo, code);
    let (k, n, f) = (code.k, code.n, &code.field);
    let width = k * spec.messages.len();
    for d in &spec.demands {
        let mi = spec.message_index(&d.message).expect("validated");
        let mut acc = Matrix::zeros(f, k, width);
        for &e in topo.in_edges(&d.terminal) {
            let key = DecoderKey {
                terminal: d.terminal.clone(),
                message: d.message.clone(),
                edge: spec.edges[e].id.clone(),
            };
            let dec = code.decoders.get(&key).cloned().unwrap_or_else(|| Matrix::zeros(f, k, n));
            acc = acc.add(&dec.mul(&g[&key.edge]).expect("shapes checked")).expect("shapes checked");
        }
        if acc != selector(f, k, spec.messages.len(), mi) {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Outcome of a full verification run. `error` is set when the code cannot
/// be evaluated against the spec at all.
#[derive(Debug, Clone)]
pub struct VerifyReport<F: Field> {
    pub violations: Vec<Violation>,
    pub error: Option<NetError>,
    pub decode: Option<DecodeReport<F>>,
    pub decoders_valid: Option<bool>,
    pub solved: bool,
}

pub fn verify<F: Field>(spec: &NetworkSpec, code: &FractionalCode<F>) -> VerifyReport<F> {
    let violations = spec.validate();
    let mut report = VerifyReport {
        violations,
        error: None,
        decode: None,
        decoders_valid: None,
        solved: false,
    };
    if !report.violations.is_empty() {
        report.error = Some(NetError::InvalidSpec(report.violations.clone()));
        return report;
    }
    match decode_check(spec, code) {
        Err(e) => report.error = Some(e),
        Ok(d) => {
            report.decoders_valid = check_decoders(spec, code).expect("checked above");
            report.solved = d.all_satisfied && report.decoders_valid != Some(false);
            report.decode = Some(d);
        }
    }
    report
}

pub fn verify_solution<F: Field>(spec: &NetworkSpec, code: &FractionalCode<F>) -> bool {
    verify(spec, code).solved
}

/// Copies solved decoders from a report into the code.
pub fn attach_decoders<F: Field>(code: &mut FractionalCode<F>, report: &DecodeReport<F>) {
    for d in report.demands.iter().filter(|d| d.satisfied) {
        for (edge, m) in &d.decoders {
            code.decoders.insert(
                DecoderKey {
                    terminal: d.terminal.clone(),
                    message: d.message.clone(),
                    edge: edge.clone(),
                },
                m.clone(),
            );
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LocalJson {
    edge: String,
    input_kind: String,
    input_id: String,
    matrix: Matrix<PrimeField>,
}

#[derive(Serialize, Deserialize)]
struct DecoderJson {
    terminal: String,
    message: String,
    edge: String,
    matrix: Matrix<PrimeField>,
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    k: usize,
    n: usize,
    p: u32,
    locals: Vec<LocalJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    decoders: Vec<DecoderJson>,
}

impl FractionalCode<PrimeField> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("code serializes");
        s.push('\n');
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = CodeJson {
            k: self.k,
            n: self.n,
            p: self.field.p(),
            locals: self
                .locals
                .iter()
                .map(|(key, m)| LocalJson {
                    edge: key.edge.clone(),
                    input_kind: match key.input {
                        Input::Message(_) => "message".into(),
                        Input::Edge(_) => "edge".into(),
                    },
                    input_id: key.input.id().to_string(),
                    matrix: m.clone(),
                })
                .collect(),
            decoders: self
                .decoders
                .iter()
                .map(|(key, m)| DecoderJson {
                    terminal: key.terminal.clone(),
                    message: key.message.clone(),
                    edge: key.edge.clone(),
                    matrix: m.clone(),
                })
                .collect(),
        };
        serde_json::to_value(&doc).expect("code serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: CodeJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let field = PrimeField::new(doc.p as u64).map_err(|e| e.to_string())?;
        if doc.k == 0 || doc.n == 0 {
            return Err("k and n must be positive".into());
        }
        let mut code = FractionalCode::new(&field, doc.k, doc.n);
        for l in doc.locals {
            let input = match l.input_kind.as_str() {
                "message" => Input::Message(l.input_id),
                "edge" => Input::Edge(l.input_id),
                other => return Err(format!("unknown input_kind {other:?}")),
            };
            code.set_local(&l.edge, input, l.matrix);
        }
        for d in doc.decoders {
            code.decoders.insert(
                DecoderKey {
                    terminal: d.terminal,
                    message: d.message,
                    edge: d.edge,
                },
                d.matrix,
            );
        }
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::gen_butterfly;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn xor_code(field: &PrimeField, spec: &NetworkSpec) -> FractionalCode<PrimeField> {
        let topo = Topology::new(spec).unwrap();
        let mut code = FractionalCode::new(field, 1, 1);
        for e in &spec.edges {
            for input in topo.inputs(spec, &e.tail) {
                code.set_local(&e.id, input, Matrix::identity(field, 1));
            }
        }
        code
    }

    fn tiny() -> NetworkSpec {
        NetworkSpec {
            nodes: vec![
                Node { id: "s".into(), kind: NodeKind::Source },
                Node { id: "t".into(), kind: NodeKind::Terminal },
            ],
            messages: vec![Message { id: "x".into(), source: "s".into() }],
            edges: vec![Edge { id: "st".into(), tail: "s".into(), head: "t".into() }],
            demands: vec![Demand { terminal: "t".into(), message: "x".into() }],
        }
    }

    #[test]
    fn validate_examples() {
        assert!(gen_butterfly().validate().is_empty());

        let mut spec = tiny();
        spec.nodes.push(Node { id: "s2".into(), kind: NodeKind::Source });
        spec.edges.push(Edge { id: "into".into(), tail: "s".into(), head: "s2".into() });
        assert!(matches!(spec.validate()[..], [Violation::SourceHasInEdge { .. }]));

        let mut spec = tiny();
        spec.nodes.push(Node { id: "u".into(), kind: NodeKind::Intermediate });
        spec.nodes.push(Node { id: "v".into(), kind: NodeKind::Intermediate });
        spec.edges.push(Edge { id: "uv".into(), tail: "u".into(), head: "v".into() });
        spec.edges.push(Edge { id: "vu".into(), tail: "v".into(), head: "u".into() });
        assert_eq!(
            spec.validate(),
            vec![Violation::CycleDetected { nodes: vec!["u".into(), "v".into()] }]
        );
    }

    #[test]
    fn validate_reports_bad_references() {
        let mut spec = tiny();
        spec.edges.push(Edge { id: "out".into(), tail: "t".into(), head: "nowhere".into() });
        spec.messages.push(Message { id: "y".into(), source: "t".into() });
        spec.demands.push(Demand { terminal: "s".into(), message: "z".into() });
        let v = spec.validate();
        assert!(v.contains(&Violation::UnknownEdgeEndpoint { edge: "out".into(), node: "nowhere".into() }));
        assert!(v.contains(&Violation::TerminalHasOutEdge { node: "t".into(), edge: "out".into() }));
        assert!(v.contains(&Violation::MessageSourceNotSource { message: "y".into(), source: "t".into() }));
        assert!(v.contains(&Violation::DemandNotTerminal { terminal: "s".into(), message: "z".into() }));
        assert!(v.contains(&Violation::DemandUnknownMessage { terminal: "s".into(), message: "z".into() }));
    }

    #[test]
    fn single_edge_transfer() {
        let spec = tiny();
        let f2 = f(2);
        let code = xor_code(&f2, &spec);
        let g = global_transfer(&spec, &code).unwrap();
        assert_eq!(g["st"], Matrix::identity(&f2, 1));
        assert!(verify_solution(&spec, &code));
    }

    #[test]
    fn butterfly_xor_code() {
        let spec = gen_butterfly();
        let f2 = f(2);
        let code = xor_code(&f2, &spec);
        let g = global_transfer(&spec, &code).unwrap();
        let ones = Matrix::from_int_rows(&f2, 2, &[vec![1, 1]]).unwrap();
        assert_eq!(g["(c,d)"], ones);
        let report = decode_check(&spec, &code).unwrap();
        assert_eq!(report.satisfied_count(), 4);
        assert!(report.all_satisfied);
        assert!(verify_solution(&spec, &code));
    }

    #[test]
    fn zero_code_transfers_nothing() {
        let spec = gen_butterfly();
        let code = FractionalCode::new(&f(2), 1, 1);
        let g = global_transfer(&spec, &code).unwrap();
        assert!(g.values().all(Matrix::is_zero));
        assert_eq!(decode_check(&spec, &code).unwrap().satisfied_count(), 0);
        assert!(!verify_solution(&spec, &code));
    }

    #[test]
    fn mismatched_field_is_a_shape_error() {
        let spec = gen_butterfly();
        let mut code = xor_code(&f(2), &spec);
        code.set_local("(c,d)", Input::Edge("(a,c)".into()), Matrix::identity(&f(3), 1));
        let report = verify(&spec, &code);
        assert!(!report.solved);
        assert!(matches!(report.error, Some(NetError::ShapeMismatch { .. })));
    }

    #[test]
    fn adjacency_and_shape_are_checked() {
        let spec = gen_butterfly();
        let f2 = f(2);
        let mut code = xor_code(&f2, &spec);
        code.set_local("(c,d)", Input::Edge("(s1,a)".into()), Matrix::identity(&f2, 1));
        assert!(matches!(global_transfer(&spec, &code), Err(NetError::InputNotAvailable { .. })));

        let mut code = xor_code(&f2, &spec);
        code.set_local("(c,d)", Input::Edge("(a,c)".into()), Matrix::identity(&f2, 2));
        assert!(matches!(global_transfer(&spec, &code), Err(NetError::ShapeMismatch { .. })));

        let mut code = xor_code(&f2, &spec);
        code.set_local("nope", Input::Edge("(a,c)".into()), Matrix::identity(&f2, 1));
        assert_eq!(global_transfer(&spec, &code), Err(NetError::UnknownEdge("nope".into())));
    }

    #[test]
    fn decoders_round_trip_and_are_checked() {
        let spec = gen_butterfly();
        let f2 = f(2);
        let mut code = xor_code(&f2, &spec);
        let report = decode_check(&spec, &code).unwrap();
        attach_decoders(&mut code, &report);
        assert_eq!(check_decoders(&spec, &code).unwrap(), Some(true));
        let text = code.to_json();
        let back = FractionalCode::from_json(&text).unwrap();
        assert_eq!(back, code);
        assert_eq!(back.to_json(), text);

        let key = code.decoders.keys().next().unwrap().clone();
        code.decoders.insert(key, Matrix::zeros(&f2, 1, 1));
        assert_eq!(check_decoders(&spec, &code).unwrap(), Some(false));
        assert!(!verify_solution(&spec, &code));
    }

    #[test]
    fn spec_json_and_dot_are_stable() {
        let spec = gen_butterfly();
        let text = spec.to_json();
        let back: NetworkSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"kind\": \"source\""));
        let dot = spec.to_dot();
        assert_eq!(dot, gen_butterfly().to_dot());
        assert!(dot.contains("\"s1\" [shape=box];"));
        assert!(dot.contains("\"t1\" [shape=doublecircle];"));
        assert!(dot.contains("\"c\" -> \"d\" [label=\"(c,d)\"];"));
    }
}
