//! Exhaustive search for scalar (k = n = 1) linear solutions over `F_p`.
//!
//! Only edges whose tail sees at least two inputs carry free coefficients.
//! An edge fed by a single input is fixed to copy it: a nonzero scale on such
//! an edge can be absorbed by the coefficients downstream, and a zero scale is
//! never needed since downstream coefficients can zero the input instead. So
//! the restricted space has a solution iff the full space does.
//!
//! Variables are assigned edge by edge in topological order, inputs in spec
//! order, values ascending. A terminal is checked as soon as all its in-edges
//! are known; an undecodable terminal prunes the branch, because later
//! assignments never touch edges that are already known.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ff::PrimeField;
use crate::linalg::Matrix;
use crate::netmodel::{attach_decoders, decode_check, FractionalCode, Input, NetError, NetworkSpec, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    FirstSolution,
    CountAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum number of coefficient values tried (each tried value at any
    /// depth counts once).
    pub max_assignments: u64,
    pub mode: SearchMode,
    pub prune: bool,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
}

pub const DEFAULT_BUDGET: u64 = 1 << 24;

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_assignments: DEFAULT_BUDGET,
            mode: SearchMode::FirstSolution,
            prune: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Found,
    ExhaustedNone,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub witness: Option<FractionalCode<PrimeField>>,
    pub enumerated: u64,
    pub pruned: u64,
    /// Number of solutions seen (all of them in count-all mode).
    pub solutions: u64,
    pub free_coefficients: usize,
}

impl SearchOutcome {
    pub fn to_json(&self) -> String {
        let v = json!({
            "status": self.status,
            "enumerated": self.enumerated,
            "pruned": self.pruned,
            "solutions": self.solutions,
            "free_coefficients": self.free_coefficients,
            "witness": self.witness.as_ref().map(|w| w.to_json_value()),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("outcome serializes");
        s.push('\n');
        s
    }
}

/// Free coefficient count for a (k,n) code: for every edge whose tail has at
/// least two available inputs, `n*k` per message input and `n*n` per edge
/// input. Decoders are not counted.
pub fn count_free_coefficients(spec: &NetworkSpec, k: usize, n: usize) -> Result<usize, NetError> {
    let topo = Topology::new(spec)?;
    Ok(spec
        .edges
        .iter()
        .map(|e| {
            let inputs = topo.inputs(spec, &e.tail);
            if inputs.len() < 2 {
                return 0;
            }
            inputs
                .iter()
                .map(|i| match i {
                    Input::Message(_) => n * k,
                    Input::Edge(_) => n * n,
                })
                .sum()
        })
        .sum())
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Message(usize),
    Edge(usize),
}

#[derive(Debug, Clone, Copy)]
enum Step {
    /// Try every value of variable `var`.
    Assign { var: usize },
    Finalize { edge: usize },
    Check { terminal: usize },
}

struct Plan {
    p: u32,
    messages: usize,
    /// Per edge (spec index): its inputs and, if free, the first variable.
    inputs: Vec<Vec<Source>>,
    first_var: Vec<Option<usize>>,
    nvars: usize,
    steps: Vec<Step>,
    /// Per terminal: in-edges and demanded message indices.
    terminals: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Plan {
    fn new(spec: &NetworkSpec, topo: &Topology, p: u32) -> Self {
        let edge_pos = |id: &str| spec.edges.iter().position(|e| e.id == id).expect("known edge");
        let inputs: Vec<Vec<Source>> = spec
            .edges
            .iter()
            .map(|e| {
                topo.inputs(spec, &e.tail)
                    .iter()
                    .map(|i| match i {
                        Input::Message(m) => Source::Message(spec.message_index(m).expect("known message")),
                        Input::Edge(x) => Source::Edge(edge_pos(x)),
                    })
                    .collect()
            })
            .collect();

        let mut terminals = Vec::new();
        let mut terminal_ids = Vec::new();
        for d in &spec.demands {
            let m = spec.message_index(&d.message).expect("known message");
            match terminal_ids.iter().position(|t| t == &d.terminal) {
                Some(i) => {
                    let entry: &mut (Vec<usize>, Vec<usize>) = &mut terminals[i];
                    entry.1.push(m);
                }
                None => {
                    terminal_ids.push(d.terminal.clone());
                    terminals.push((topo.in_edges(&d.terminal).to_vec(), vec![m]));
                }
            }
        }

        let mut first_var = vec![None; spec.edges.len()];
        let mut nvars = 0;
        let mut steps = Vec::new();
        let mut done = vec![false; spec.edges.len()];
        let mut checked = vec![false; terminals.len()];

        let ready = |e: usize, done: &[bool]| inputs[e].iter().all(|s| matches!(s, Source::Message(_)) || matches!(s, Source::Edge(x) if done[*x]));
        let propagate = |steps: &mut Vec<Step>, done: &mut Vec<bool>, checked: &mut Vec<bool>| loop {
            let mut progress = false;
            for &e in &topo.edge_order {
                if !done[e] && inputs[e].len() < 2 && ready(e, done) {
                    steps.push(Step::Finalize { edge: e });
                    done[e] = true;
                    progress = true;
                }
            }
            for (t, (ins, _)) in terminals.iter().enumerate() {
                if !checked[t] && ins.iter().all(|&e| done[e]) {
                    steps.push(Step::Check { terminal: t });
                    checked[t] = true;
                }
            }
            if !progress {
                break;
            }
        };

        propagate(&mut steps, &mut done, &mut checked);
        for &e in &topo.edge_order {
            if inputs[e].len() < 2 || done[e] {
                continue;
            }
            first_var[e] = Some(nvars);
            for _ in 0..inputs[e].len() {
                steps.push(Step::Assign { var: nvars });
                nvars += 1;
            }
            steps.push(Step::Finalize { edge: e });
            done[e] = true;
            propagate(&mut steps, &mut done, &mut checked);
        }

        Self {
            p,
            messages: spec.messages.len(),
            inputs,
            first_var,
            nvars,
            steps,
            terminals,
        }
    }

    fn finalize(&self, e: usize, vars: &[u32], g: &mut [Vec<u32>]) {
        let p = self.p as u64;
        let mut acc = vec![0u64; self.messages];
        for (j, src) in self.inputs[e].iter().enumerate() {
            let c = match self.first_var[e] {
                Some(v) => vars[v + j] as u64,
                None => 1,
            };
            if c == 0 {
                continue;
            }
            match *src {
                Source::Message(m) => acc[m] += c,
                Source::Edge(x) => {
                    for (a, &y) in acc.iter_mut().zip(&g[x]) {
                        *a += c * y as u64;
                    }
                }
            }
            for a in acc.iter_mut() {
                *a %= p;
            }
        }
        g[e] = acc.into_iter().map(|a| a as u32).collect();
    }

    /// Whether every demand of terminal `t` lies in the span of its inputs.
    fn decodable(&self, t: usize, g: &[Vec<u32>]) -> bool {
        let (ins, wants) = &self.terminals[t];
        let rows: Vec<Vec<u32>> = ins.iter().map(|&e| g[e].clone()).collect();
        let (basis, pivots) = echelon(rows, self.p);
        wants.iter().all(|&m| {
            let mut v = vec![0u32; self.messages];
            v[m] = 1;
            reduces_to_zero(&mut v, &basis, &pivots, self.p)
        })
    }
}

fn inv_mod(x: u32, p: u32) -> u32 {
    let (mut base, mut e, mut acc) = (x as u64, p as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Row echelon form with normalized pivots; returns rows and pivot columns.
fn echelon(mut rows: Vec<Vec<u32>>, p: u32) -> (Vec<Vec<u32>>, Vec<usize>) {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = inv_mod(rows[r][c], p) as u64;
        for x in rows[r].iter_mut() {
            *x = (*x as u64 * inv % p as u64) as u32;
        }
        for i in r + 1..rows.len() {
            let f = rows[i][c] as u64;
            if f != 0 {
                for j in c..cols {
                    let sub = f * rows[r][j] as u64 % p as u64;
                    rows[i][j] = ((rows[i][j] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

fn reduces_to_zero(v: &mut [u32], basis: &[Vec<u32>], pivots: &[usize], p: u32) -> bool {
    for (row, &c) in basis.iter().zip(pivots) {
        let f = v[c] as u64;
        if f != 0 {
            for (x, &y) in v.iter_mut().zip(row) {
                let sub = f * y as u64 % p as u64;
                *x = ((*x as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
    }
    v.iter().all(|&x| x == 0)
}

#[derive(Debug, Clone)]
struct Branch {
    status: SearchStatus,
    enumerated: u64,
    pruned: u64,
    solutions: u64,
    witness: Option<Vec<u32>>,
}

struct Dfs<'a> {
    plan: &'a Plan,
    mode: SearchMode,
    prune: bool,
    budget: u64,
    /// Restricts the first variable to a single value.
    first_value: Option<u32>,
    vars: Vec<u32>,
    g: Vec<Vec<u32>>,
    enumerated: u64,
    pruned: u64,
    solutions: u64,
    witness: Option<Vec<u32>>,
    out_of_budget: bool,
}

impl Dfs<'_> {
    /// Returns true when the search should stop.
    fn run(&mut self, step: usize, failed: bool) -> bool {
        let plan = self.plan;
        let Some(&s) = plan.steps.get(step) else {
            if !failed {
                self.solutions += 1;
                if self.witness.is_none() {
                    self.witness = Some(self.vars.clone());
                }
                return self.mode == SearchMode::FirstSolution;
            }
            return false;
        };
        match s {
            Step::Finalize { edge } => {
                plan.finalize(edge, &self.vars, &mut self.g);
                self.run(step + 1, failed)
            }
            Step::Check { terminal } => {
                if failed && !self.prune {
                    return self.run(step + 1, true);
                }
                if plan.decodable(terminal, &self.g) {
                    self.run(step + 1, failed)
                } else if self.prune {
                    self.pruned += 1;
                    false
                } else {
                    self.run(step + 1, true)
                }
            }
            Step::Assign { var } => {
                let values: Vec<u32> = match (var, self.first_value) {
                    (0, Some(v)) => vec![v],
                    _ => (0..plan.p).collect(),
                };
                for v in values {
                    if self.enumerated >= self.budget {
                        self.out_of_budget = true;
                        return true;
                    }
                    self.enumerated += 1;
                    self.vars[var] = v;
                    if self.run(step + 1, failed) {
                        return true;
                    }
                }
                false
            }
        }
    }
}

fn run_branch(plan: &Plan, budget: &SearchBudget, limit: u64, first_value: Option<u32>) -> Branch {
    let mut dfs = Dfs {
        plan,
        mode: budget.mode,
        prune: budget.prune,
        budget: limit,
        first_value,
        vars: vec![0; plan.nvars],
        g: vec![Vec::new(); plan.inputs.len()],
        enumerated: 0,
        pruned: 0,
        solutions: 0,
        witness: None,
        out_of_budget: false,
    };
    dfs.run(0, false);
    let status = if dfs.out_of_budget {
        SearchStatus::BudgetExceeded
    } else if dfs.solutions > 0 {
        SearchStatus::Found
    } else {
        SearchStatus::ExhaustedNone
    };
    Branch {
        status,
        enumerated: dfs.enumerated,
        pruned: dfs.pruned,
        solutions: dfs.solutions,
        witness: dfs.witness,
    }
}

/// Splits on the first variable and merges so that the result equals the
/// single-threaded run exactly.
fn search_split(plan: &Plan, budget: &SearchBudget) -> Branch {
    if plan.nvars == 0 || budget.threads == Some(1) {
        return run_branch(plan, budget, budget.max_assignments, None);
    }
    let values: Vec<u32> = (0..plan.p).collect();
    let branches: Vec<Branch> = values.par_iter().map(|&v| run_branch(plan, budget, budget.max_assignments, Some(v))).collect();

    let mut used = 0u64;
    let mut pruned = 0u64;
    let mut solutions = 0u64;
    let mut witness = None;
    for (v, b) in values.iter().zip(&branches) {
        let remaining = budget.max_assignments - used;
        let fits = b.status != SearchStatus::BudgetExceeded && b.enumerated <= remaining;
        let b = if fits { b.clone() } else { run_branch(plan, budget, remaining, Some(*v)) };
        used += b.enumerated;
        pruned += b.pruned;
        solutions += b.solutions;
        if witness.is_none() {
            witness = b.witness.clone();
        }
        let stop = b.status == SearchStatus::BudgetExceeded || (b.status == SearchStatus::Found && budget.mode == SearchMode::FirstSolution);
        if stop {
            return Branch {
                status: b.status,
                enumerated: used,
                pruned,
                solutions,
                witness,
            };
        }
    }
    Branch {
        status: if solutions > 0 { SearchStatus::Found } else { SearchStatus::ExhaustedNone },
        enumerated: used,
        pruned,
        solutions,
        witness,
    }
}

fn witness_code(spec: &NetworkSpec, topo: &Topology, plan: &Plan, field: &PrimeField, vars: &[u32]) -> FractionalCode<PrimeField> {
    let mut code = FractionalCode::new(field, 1, 1);
    for (e, edge) in spec.edges.iter().enumerate() {
        for (j, input) in topo.inputs(spec, &edge.tail).into_iter().enumerate() {
            let c = match plan.first_var[e] {
                Some(v) => vars[v + j],
                None => 1,
            };
            if c != 0 {
                let m = Matrix::from_entries(field, 1, 1, vec![field.elem(c as i64)]).expect("1x1");
                code.set_local(&edge.id, input, m);
            }
        }
    }
    let report = decode_check(spec, &code).expect("witness is well formed");
    attach_decoders(&mut code, &report);
    code
}

/// Searches for a (1,1) linear solution of `spec` over `F_p`.
pub fn search_scalar(spec: &NetworkSpec, field: &PrimeField, budget: &SearchBudget) -> Result<SearchOutcome, NetError> {
    let topo = Topology::new(spec)?;
    let plan = Plan::new(spec, &topo, field.p());
    let budget = SearchBudget {
        max_assignments: budget.max_assignments.max(1),
        ..*budget
    };
    let result = match budget.threads {
        Some(t) if t > 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().expect("thread pool");
            let plan = Arc::new(plan);
            let p2 = Arc::clone(&plan);
            let r = pool.install(move || search_split(&p2, &budget));
            (r, plan)
        }
        _ => {
            let r = search_split(&plan, &budget);
            (r, Arc::new(plan))
        }
    };
    let (branch, plan) = result;
    let witness = match (branch.status, &branch.witness) {
        (SearchStatus::Found, Some(vars)) => Some(witness_code(spec, &topo, &plan, field, vars)),
        _ => None,
    };
    Ok(SearchOutcome {
        status: branch.status,
        witness,
        enumerated: branch.enumerated,
        pruned: branch.pruned,
        solutions: branch.solutions,
        free_coefficients: plan.nvars,
    })
}
