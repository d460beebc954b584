//! Generators for the benchmark networks.
//!
//! Node ids: sources are named after the message they generate (`a[i]`,
//! `b[i][j]`, `c[i]`), relay nodes are `u1`..`u14`, `tail(e[i])`, `v'[i]`,
//! ..., and terminals are `t.` followed by their group and index. Edges are
//! `(tail,head)` except the named bottleneck edges `e[i]`, `e_a`, `e'_b`, ....
//! Indices are 1-based.

use thiserror::Error;

use crate::netmodel::{Demand, Edge, Message, NetworkSpec, Node, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyParams {
    pub q: usize,
    pub n: usize,
    pub k: usize,
}

impl FamilyParams {
    pub fn new(q: usize, n: usize, k: usize) -> Result<Self, FamilyError> {
        if q < 2 {
            return Err(FamilyError::BadParams(format!("q must be at least 2, got {q}")));
        }
        if n < 1 || k < 1 {
            return Err(FamilyError::BadParams(format!("n and k must be positive, got n={n}, k={k}")));
        }
        Ok(Self { q, n, k })
    }
}

/// Node, edge and demand counts of a generated network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub sources: usize,
    pub intermediates: usize,
    pub terminals: usize,
    pub edges: usize,
    pub demands: usize,
}

impl Counts {
    pub fn of(spec: &NetworkSpec) -> Self {
        Self {
            sources: spec.count_kind(NodeKind::Source),
            intermediates: spec.count_kind(NodeKind::Intermediate),
            terminals: spec.count_kind(NodeKind::Terminal),
            edges: spec.edges.len(),
            demands: spec.demands.len(),
        }
    }
}

#[derive(Default)]
struct Builder {
    spec: NetworkSpec,
}

impl Builder {
    fn source(&mut self, id: String) {
        self.spec.nodes.push(Node {
            id: id.clone(),
            kind: NodeKind::Source,
        });
        self.spec.messages.push(Message { id: id.clone(), source: id });
    }

    fn node(&mut self, id: impl Into<String>, kind: NodeKind) {
        self.spec.nodes.push(Node { id: id.into(), kind });
    }

    fn edge(&mut self, tail: &str, head: &str) {
        self.named(format!("({tail},{head})"), tail, head);
    }

    fn named(&mut self, id: impl Into<String>, tail: &str, head: &str) {
        self.spec.edges.push(Edge {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
        });
    }

    fn terminal(&mut self, id: String, from: &str, message: String) {
        self.node(id.clone(), NodeKind::Terminal);
        self.edge(from, &id);
        self.spec.demands.push(Demand { terminal: id, message });
    }
}

fn a(j: usize) -> String {
    format!("a[{j}]")
}
fn b(i: usize, j: usize) -> String {
    format!("b[{i}][{j}]")
}
fn c(j: usize) -> String {
    format!("c[{j}]")
}
fn tail(e: &str) -> String {
    format!("tail({e})")
}
fn head(e: &str) -> String {
    format!("head({e})")
}
fn u(i: usize) -> String {
    format!("u{i}")
}

/// Zero-based component carried by a message: the last bracketed index.
pub fn component_index(message: &str) -> Option<usize> {
    let open = message.rfind('[')?;
    let close = message[open..].find(']')? + open;
    message[open + 1..close].parse::<usize>().ok()?.checked_sub(1)
}

/// The network with a rate-1/n linear solution exactly when the
/// characteristic divides `q`.
pub fn gen_n1_prime(q: usize, n: usize) -> Result<NetworkSpec, FamilyError> {
    FamilyParams::new(q, n, 1)?;
    let bs = 1..q;
    let js = 1..=n;
    let mut g = Builder::default();
    js.clone().for_each(|j| g.source(a(j)));
    for i in bs.clone() {
        js.clone().for_each(|j| g.source(b(i, j)));
    }
    js.clone().for_each(|j| g.source(c(j)));

    (1..=14).for_each(|i| g.node(u(i), NodeKind::Intermediate));
    for i in bs.clone() {
        let e = format!("e[{i}]");
        g.node(tail(&e), NodeKind::Intermediate);
        g.node(head(&e), NodeKind::Intermediate);
        for name in ["v", "v'", "w", "w'"] {
            g.node(format!("{name}[{i}]"), NodeKind::Intermediate);
        }
    }

    let all_b: Vec<(usize, usize)> = bs.clone().flat_map(|i| js.clone().map(move |j| (i, j))).collect();
    // Source edges.
    js.clone().for_each(|j| g.edge(&a(j), "u1"));
    all_b.iter().for_each(|&(i, j)| g.edge(&b(i, j), "u1"));
    all_b.iter().for_each(|&(i, j)| g.edge(&b(i, j), "u2"));
    js.clone().for_each(|j| g.edge(&c(j), "u2"));
    js.clone().for_each(|j| g.edge(&a(j), "u11"));
    js.clone().for_each(|j| g.edge(&c(j), "u6"));
    for &(i, j) in &all_b {
        for k in bs.clone().filter(|&k| k != i) {
            g.edge(&b(i, j), &tail(&format!("e[{k}]")));
        }
    }
    for &(i, j) in &all_b {
        for k in bs.clone().filter(|&k| k != i) {
            g.edge(&b(i, j), &format!("v[{k}]"));
        }
    }
    all_b.iter().for_each(|&(i, j)| g.edge(&b(i, j), &format!("w[{i}]")));

    // Relay edges.
    for i in (1..=7).filter(|&i| i != 4) {
        g.edge(&u(i), &u(i + 2));
    }
    for i in [4, 8, 9, 11, 13] {
        g.edge(&u(i), &u(i + 1));
    }
    for (x, y) in [(3, 6), (7, 11), (8, 13)] {
        g.edge(&u(x), &u(y));
    }
    for i in bs.clone() {
        let e = format!("e[{i}]");
        g.named(e.clone(), &tail(&e), &head(&e));
    }
    bs.clone().for_each(|i| g.edge("u4", &tail(&format!("e[{i}]"))));
    for i in bs.clone() {
        let h = head(&format!("e[{i}]"));
        g.edge(&h, "u13");
        g.edge(&h, &format!("w[{i}]"));
    }
    for i in bs.clone() {
        g.edge("u10", &format!("v[{i}]"));
        g.edge(&format!("v[{i}]"), &format!("v'[{i}]"));
    }
    bs.clone().for_each(|i| g.edge(&format!("w[{i}]"), &format!("w'[{i}]")));

    // Terminals.
    js.clone().for_each(|j| g.terminal(format!("t.c[{j}]"), "u12", c(j)));
    for i in bs.clone() {
        js.clone().for_each(|j| g.terminal(format!("t.b[{i}][{j}]"), &format!("v'[{i}]"), b(i, j)));
    }
    js.clone().for_each(|j| g.terminal(format!("t.a[{j}]"), "u14", a(j)));
    for i in bs {
        js.clone().for_each(|j| g.terminal(format!("t.c[{i}][{j}]"), &format!("w'[{i}]"), c(j)));
    }
    Ok(g.spec)
}

/// The network with a rate-1/n linear solution exactly when the
/// characteristic does not divide `q`.
pub fn gen_n2_prime(q: usize, n: usize) -> Result<NetworkSpec, FamilyError> {
    FamilyParams::new(q, n, 1)?;
    let bs = 1..=q;
    let js = 1..=n;
    let mut g = Builder::default();
    js.clone().for_each(|j| g.source(a(j)));
    for i in bs.clone() {
        js.clone().for_each(|j| g.source(b(i, j)));
    }

    let mut named = vec!["e_a".to_string(), "e_b".into(), "e'_a".into(), "e'_b".into()];
    for i in bs.clone() {
        named.push(format!("e[{i}]"));
        named.push(format!("e'[{i}]"));
    }
    for e in &named {
        g.node(tail(e), NodeKind::Intermediate);
        g.node(head(e), NodeKind::Intermediate);
    }
    for e in &named {
        g.named(e.clone(), &tail(e), &head(e));
    }

    let all_b: Vec<(usize, usize)> = bs.clone().flat_map(|i| js.clone().map(move |j| (i, j))).collect();
    js.clone().for_each(|j| g.edge(&a(j), &tail("e_a")));
    all_b.iter().for_each(|&(i, j)| g.edge(&b(i, j), &tail("e_a")));
    for i in bs.clone() {
        let t = tail(&format!("e[{i}]"));
        js.clone().for_each(|j| g.edge(&a(j), &t));
        all_b.iter().filter(|&&(k, _)| k != i).for_each(|&(k, j)| g.edge(&b(k, j), &t));
    }
    all_b.iter().for_each(|&(i, j)| g.edge(&b(i, j), &tail("e_b")));

    g.edge(&head("e_a"), &tail("e'_a"));
    g.edge(&head("e_b"), &tail("e'_a"));
    g.edge(&head("e_b"), &tail("e'_b"));
    for i in bs.clone() {
        g.edge(&head(&format!("e[{i}]")), &tail(&format!("e'[{i}]")));
    }
    for i in bs.clone() {
        g.edge(&head("e_a"), &tail(&format!("e'[{i}]")));
    }
    for i in bs.clone() {
        g.edge(&head(&format!("e[{i}]")), &tail("e'_b"));
    }

    js.clone().for_each(|j| g.terminal(format!("t.a1[{j}]"), &head("e'_a"), a(j)));
    js.clone().for_each(|j| g.terminal(format!("t.a2[{j}]"), &head("e'_b"), a(j)));
    for i in bs {
        js.clone().for_each(|j| g.terminal(format!("t.b[{i}][{j}]"), &head(&format!("e'[{i}]")), b(i, j)));
    }
    Ok(g.spec)
}

/// Suffix given to interior nodes and edges of copy `c`.
pub fn copy_suffix(c: usize) -> String {
    format!("#copy{c}")
}

/// `k` copies of `base` sharing their sources and terminals.
pub fn join_copies(base: &NetworkSpec, k: usize) -> Result<NetworkSpec, FamilyError> {
    if k == 0 {
        return Err(FamilyError::BadParams("copy count must be positive".into()));
    }
    let kind = |id: &str| base.node(id).map(|n| n.kind);
    let rename = |id: &str, c: usize| match kind(id) {
        Some(NodeKind::Intermediate) | None => format!("{id}{}", copy_suffix(c)),
        _ => id.to_string(),
    };
    let mut spec = NetworkSpec {
        messages: base.messages.clone(),
        demands: base.demands.clone(),
        ..Default::default()
    };
    spec.nodes.extend(base.nodes.iter().filter(|n| n.kind == NodeKind::Source).cloned());
    for c in 0..k {
        for n in base.nodes.iter().filter(|n| n.kind == NodeKind::Intermediate) {
            spec.nodes.push(Node {
                id: rename(&n.id, c),
                kind: n.kind,
            });
        }
    }
    spec.nodes.extend(base.nodes.iter().filter(|n| n.kind == NodeKind::Terminal).cloned());
    for c in 0..k {
        for e in &base.edges {
            spec.edges.push(Edge {
                id: format!("{}{}", e.id, copy_suffix(c)),
                tail: rename(&e.tail, c),
                head: rename(&e.head, c),
            });
        }
    }
    spec.demands.dedup();
    Ok(spec)
}

pub fn gen_n1(q: usize, k: usize, n: usize) -> Result<NetworkSpec, FamilyError> {
    FamilyParams::new(q, n, k)?;
    join_copies(&gen_n1_prime(q, n)?, k)
}

pub fn gen_n2(q: usize, k: usize, n: usize) -> Result<NetworkSpec, FamilyError> {
    FamilyParams::new(q, n, k)?;
    join_copies(&gen_n2_prime(q, n)?, k)
}

/// Two sources, two terminals each demanding both messages, one bottleneck
/// edge `(c,d)`.
pub fn gen_butterfly() -> NetworkSpec {
    let mut g = Builder::default();
    g.node("s1", NodeKind::Source);
    g.node("s2", NodeKind::Source);
    g.spec.messages.push(Message { id: "x1".into(), source: "s1".into() });
    g.spec.messages.push(Message { id: "x2".into(), source: "s2".into() });
    for v in ["a", "b", "c", "d"] {
        g.node(v, NodeKind::Intermediate);
    }
    g.node("t1", NodeKind::Terminal);
    g.node("t2", NodeKind::Terminal);
    for (x, y) in [("s1", "a"), ("s2", "b"), ("a", "c"), ("b", "c"), ("c", "d"), ("d", "t1"), ("d", "t2"), ("a", "t1"), ("b", "t2")] {
        g.edge(x, y);
    }
    for t in ["t1", "t2"] {
        for m in ["x1", "x2"] {
            g.spec.demands.push(Demand {
                terminal: t.into(),
                message: m.into(),
            });
        }
    }
    g.spec
}

/// Closed-form size of the divisibility network.
pub fn n1_prime_counts(q: usize, n: usize) -> Counts {
    let source_edges = 2 * q * n + 2 * n + 2 * (q - 1) * (q - 2) * n + (q - 1) * n;
    Counts {
        sources: (q + 1) * n,
        intermediates: 14 + 6 * (q - 1),
        terminals: 2 * q * n,
        edges: source_edges + 14 + 7 * (q - 1) + 2 * q * n,
        demands: 2 * q * n,
    }
}

/// Closed-form size of the non-divisibility network.
pub fn n2_prime_counts(q: usize, n: usize) -> Counts {
    let source_edges = (q + 1) * n + q * q * n + q * n;
    Counts {
        sources: (q + 1) * n,
        intermediates: 2 * (4 + 2 * q),
        terminals: (q + 2) * n,
        edges: (4 + 2 * q) + source_edges + 3 + 3 * q + (q + 2) * n,
        demands: (q + 2) * n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn edge_set(spec: &NetworkSpec) -> BTreeSet<(String, String)> {
        spec.edges.iter().map(|e| (e.tail.clone(), e.head.clone())).collect()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(gen_n1_prime(1, 1).is_err());
        assert!(gen_n2_prime(2, 0).is_err());
        assert!(gen_n1(2, 0, 1).is_err());
    }

    #[test]
    fn n1_small_instance() {
        let spec = gen_n1_prime(2, 1).unwrap();
        let c = Counts::of(&spec);
        assert_eq!((c.sources, c.terminals), (3, 4));
        let edges = edge_set(&spec);
        for (x, y) in [(1, 3), (2, 4), (5, 7), (6, 8), (9, 10), (11, 12), (13, 14)] {
            assert!(edges.contains(&(u(x), u(y))), "missing (u{x},u{y})");
        }
        // The relay u5 combines the two branches.
        assert!(edges.contains(&(u(3), u(5))) && edges.contains(&(u(4), u(5))));
        assert!(spec.validate().is_empty());
    }

    #[test]
    fn n1_counts_follow_closed_form() {
        let spec = gen_n1_prime(3, 2).unwrap();
        assert_eq!((Counts::of(&spec).sources, Counts::of(&spec).terminals), (8, 12));
        for q in [2, 3, 4, 6] {
            for n in 1..=3 {
                let spec = gen_n1_prime(q, n).unwrap();
                assert!(spec.validate().is_empty());
                assert_eq!(Counts::of(&spec), n1_prime_counts(q, n), "q={q} n={n}");
            }
        }
        // Locked values.
        assert_eq!(Counts::of(&gen_n1_prime(2, 1).unwrap()).edges, 32);
        assert_eq!(Counts::of(&gen_n1_prime(3, 2).unwrap()).edges, 68);
    }

    #[test]
    fn n2_small_instance() {
        let spec = gen_n2_prime(2, 1).unwrap();
        let c = Counts::of(&spec);
        assert_eq!((c.sources, c.terminals), (3, 4));
        let named: Vec<_> = spec.edges.iter().filter(|e| !e.id.starts_with('(')).map(|e| e.id.as_str()).collect();
        assert_eq!(named, ["e_a", "e_b", "e'_a", "e'_b", "e[1]", "e'[1]", "e[2]", "e'[2]"]);
        let into_e1: Vec<_> = spec.edges.iter().filter(|e| e.head == "tail(e[1])").map(|e| e.tail.as_str()).collect();
        assert_eq!(into_e1, ["a[1]", "b[2][1]"]);
        assert!(spec.validate().is_empty());
    }

    #[test]
    fn n2_counts_follow_closed_form() {
        let spec = gen_n2_prime(6, 1).unwrap();
        assert!(spec.validate().is_empty());
        let groups: BTreeSet<_> = spec
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Terminal)
            .map(|n| n.id[..n.id.rfind('[').unwrap()].to_string())
            .collect();
        assert_eq!(groups.len(), 8);
        for q in [2, 3, 6] {
            for n in 1..=3 {
                let spec = gen_n2_prime(q, n).unwrap();
                assert!(spec.validate().is_empty());
                assert_eq!(Counts::of(&spec), n2_prime_counts(q, n), "q={q} n={n}");
            }
        }
        assert_eq!(Counts::of(&gen_n2_prime(2, 1).unwrap()).edges, 30);
    }

    #[test]
    fn join_preserves_endpoints_and_replicates_interior() {
        let base = gen_n1_prime(2, 1).unwrap();
        let one = join_copies(&base, 1).unwrap();
        assert_eq!(Counts::of(&one), Counts::of(&base));
        let strip = |s: &str| s.replace("#copy0", "");
        let renamed: Vec<_> = one.edges.iter().map(|e| (strip(&e.id), strip(&e.tail), strip(&e.head))).collect();
        let orig: Vec<_> = base.edges.iter().map(|e| (e.id.clone(), e.tail.clone(), e.head.clone())).collect();
        assert_eq!(renamed, orig);

        let two = join_copies(&base, 2).unwrap();
        let (cb, c2) = (Counts::of(&base), Counts::of(&two));
        assert_eq!(c2.sources, 3);
        assert_eq!(c2.intermediates, 2 * cb.intermediates);
        assert!(two.validate().is_empty());

        let base = gen_n2_prime(2, 1).unwrap();
        let three = join_copies(&base, 3).unwrap();
        assert_eq!(Counts::of(&three).terminals, 4);
        assert_eq!(three.edges.len(), 3 * base.edges.len());
        assert_eq!(three.demands, base.demands);
        assert!(three.validate().is_empty());
    }

    #[test]
    fn join_copies_are_edge_disjoint_images() {
        let base = gen_n2_prime(3, 2).unwrap();
        let joined = join_copies(&base, 3).unwrap();
        for c in 0..3 {
            let suffix = copy_suffix(c);
            let copy: Vec<_> = joined.edges.iter().filter(|e| e.id.ends_with(&suffix)).collect();
            assert_eq!(copy.len(), base.edges.len());
            for (e, b) in copy.iter().zip(&base.edges) {
                assert_eq!(e.id.trim_end_matches(&suffix), b.id);
                assert_eq!(e.tail.trim_end_matches(&suffix), b.tail);
                assert_eq!(e.head.trim_end_matches(&suffix), b.head);
            }
        }
    }

    #[test]
    fn butterfly_fixture() {
        let spec = gen_butterfly();
        assert!(spec.validate().is_empty());
        assert_eq!(spec.nodes.len(), 8);
        assert_eq!(spec.edges.len(), 9);
        assert_eq!(spec.demands.len(), 4);
        assert_eq!(spec.to_dot(), gen_butterfly().to_dot());
    }

    #[test]
    fn component_indices() {
        assert_eq!(component_index("a[3]"), Some(2));
        assert_eq!(component_index("b[2][1]"), Some(0));
        assert_eq!(component_index("x1"), None);
    }
}
