//! Linear rank inequalities over subspace assignments.
//!
//! Terms are `coef * H(vars | given)`, with `H(S) = dim(sum of S)` and
//! `H(S | G) = H(S, G) - H(G)`. Slack is `sum(rhs) - sum(lhs)`.

use std::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ff::{Field, PrimeField};
use crate::linalg::{h_cond, LinalgError, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IneqError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("ambient mismatch: variable {var} lives in dimension {found}, expected {expected}")]
    AmbientMismatch { var: String, expected: usize, found: usize },
    #[error("variable {0} is not assigned")]
    MissingVariable(String),
    #[error("term references undeclared variable {0}")]
    UndeclaredVariable(String),
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("malformed assignment: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTerm {
    pub coef: i64,
    pub vars: Vec<String>,
    #[serde(default)]
    pub given: Vec<String>,
}

impl RankTerm {
    pub fn joint(coef: i64, vars: &[String]) -> Self {
        Self { coef, vars: vars.to_vec(), given: Vec::new() }
    }

    pub fn cond(coef: i64, vars: &[String], given: &[String]) -> Self {
        Self { coef, vars: vars.to_vec(), given: given.to_vec() }
    }

    pub fn is_conditional(&self) -> bool {
        !self.given.is_empty()
    }
}

impl fmt::Display for RankTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}H({}", self.coef, self.vars.join(","))?;
        if !self.given.is_empty() {
            write!(f, "|{}", self.given.join(","))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankInequality {
    pub variables: Vec<String>,
    pub lhs: Vec<RankTerm>,
    pub rhs: Vec<RankTerm>,
}

impl RankInequality {
    /// Checks term well-formedness against the declared variables.
    pub fn validate(&self) -> Result<(), IneqError> {
        for t in self.lhs.iter().chain(&self.rhs) {
            if t.vars.is_empty() {
                return Err(IneqError::InvalidTerm(format!("{t}: empty variable set")));
            }
            for v in t.vars.iter().chain(&t.given) {
                if !self.variables.contains(v) {
                    return Err(IneqError::UndeclaredVariable(v.clone()));
                }
            }
            if let Some(v) = t.vars.iter().find(|v| t.given.contains(v)) {
                return Err(IneqError::InvalidTerm(format!("{t}: {v} is both conditioned and conditioning")));
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (Side, &RankTerm)> {
        self.lhs.iter().map(|t| (Side::Lhs, t)).chain(self.rhs.iter().map(|t| (Side::Rhs, t)))
    }

    pub fn term_count(&self) -> usize {
        self.lhs.len() + self.rhs.len()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("inequality serializes");
        s.push('\n');
        s
    }
}

/// Subspaces of a common `F^ambient`, in insertion order.
#[derive(Clone, PartialEq, Eq)]
pub struct SubspaceAssignment<F: Field> {
    field: F,
    ambient: usize,
    spaces: Vec<(String, Subspace<F>)>,
}

impl<F: Field> SubspaceAssignment<F> {
    pub fn new(field: F, ambient: usize) -> Self {
        Self { field, ambient, spaces: Vec::new() }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Assigns (or replaces) a variable.
    pub fn insert(&mut self, name: &str, space: Subspace<F>) -> Result<(), IneqError> {
        if space.ambient() != self.ambient {
            return Err(IneqError::AmbientMismatch {
                var: name.to_string(),
                expected: self.ambient,
                found: space.ambient(),
            });
        }
        if space.field() != &self.field {
            return Err(LinalgError::FieldMismatch.into());
        }
        match self.spaces.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = space,
            None => self.spaces.push((name.to_string(), space)),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Subspace<F>> {
        self.spaces.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Subspace<F>)> {
        self.spaces.iter().map(|(n, s)| (n.as_str(), s))
    }

    /// Applies `v -> v T` to every subspace; `T` must be square of the ambient size.
    pub fn transform(&self, t: &Matrix<F>) -> Result<Self, IneqError> {
        if t.shape() != (self.ambient, self.ambient) {
            return Err(LinalgError::DimensionMismatch {
                op: "assignment transform",
                left: (self.ambient, self.ambient),
                right: t.shape(),
            }
            .into());
        }
        let spaces = self
            .spaces
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.transform(t)?)))
            .collect::<Result<_, IneqError>>()?;
        Ok(Self { field: self.field.clone(), ambient: self.ambient, spaces })
    }
}

impl<F: Field> fmt::Debug for SubspaceAssignment<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.spaces.iter().map(|(n, s)| (n, s))).finish()
    }
}

impl SubspaceAssignment<PrimeField> {
    /// `{"p", "ambient", "spaces": {name: [[basis row], ...]}}`.
    pub fn to_json_value(&self) -> Value {
        let mut spaces = Map::new();
        for (name, s) in &self.spaces {
            let b = s.basis();
            let rows: Vec<Vec<u32>> = (0..b.rows()).map(|r| b.row(r).iter().map(|x| x.value()).collect()).collect();
            spaces.insert(name.clone(), json!(rows));
        }
        json!({ "p": self.field.p(), "ambient": self.ambient, "spaces": spaces })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("assignment serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IneqError> {
        let v: Value = serde_json::from_str(text).map_err(|e| IneqError::Parse(e.to_string()))?;
        let int = |key: &str| {
            v.get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| IneqError::Parse(format!("missing or non-integer \"{key}\"")))
        };
        let field = PrimeField::new(int("p")?).map_err(|e| IneqError::Parse(e.to_string()))?;
        let ambient = int("ambient")? as usize;
        let spaces = v
            .get("spaces")
            .and_then(Value::as_object)
            .ok_or_else(|| IneqError::Parse("missing \"spaces\" object".into()))?;
        let mut out = Self::new(field, ambient);
        for (name, rows) in spaces {
            let rows: Vec<Vec<i64>> = serde_json::from_value(rows.clone())
                .map_err(|e| IneqError::Parse(format!("space {name}: {e}")))?;
            if let Some(r) = rows.iter().find(|r| r.len() != ambient) {
                return Err(IneqError::AmbientMismatch { var: name.clone(), expected: ambient, found: r.len() });
            }
            let basis = Matrix::from_int_rows(&field, ambient, &rows)?;
            out.insert(name, Subspace::span(&basis))?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermValue {
    pub side: Side,
    pub term: RankTerm,
    /// The dimension quantity `H(vars | given)`.
    pub h: usize,
    pub contribution: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub lhs: i64,
    pub rhs: i64,
    pub slack: i64,
    pub terms: Vec<TermValue>,
}

impl Evaluation {
    pub fn holds(&self) -> bool {
        self.slack >= 0
    }

    /// Conditional terms whose value is nonzero.
    pub fn nonzero_conditionals(&self) -> Vec<&TermValue> {
        self.terms.iter().filter(|t| t.term.is_conditional() && t.h != 0).collect()
    }

    /// Plain-text breakdown, one line per term.
    pub fn table(&self) -> String {
        let mut out = format!("{:<4} {:>6} {:>4} {:>8}  term\n", "side", "coef", "H", "value");
        for t in &self.terms {
            let side = match t.side {
                Side::Lhs => "lhs",
                Side::Rhs => "rhs",
            };
            out.push_str(&format!("{:<4} {:>6} {:>4} {:>8}  {}\n", side, t.term.coef, t.h, t.contribution, t.term));
        }
        out.push_str(&format!("lhs {} rhs {} slack {}\n", self.lhs, self.rhs, self.slack));
        out
    }
}

/// Evaluates every term; fails if a referenced variable is unassigned.
pub fn eval<F: Field>(ineq: &RankInequality, asg: &SubspaceAssignment<F>) -> Result<Evaluation, IneqError> {
    ineq.validate()?;
    let lookup = |names: &[String]| -> Result<Vec<&Subspace<F>>, IneqError> {
        names
            .iter()
            .map(|n| asg.get(n).ok_or_else(|| IneqError::MissingVariable(n.clone())))
            .collect()
    };
    let mut out = Evaluation { lhs: 0, rhs: 0, slack: 0, terms: Vec::with_capacity(ineq.term_count()) };
    for (side, term) in ineq.terms() {
        let h = h_cond(&lookup(&term.vars)?, &lookup(&term.given)?)?;
        let contribution = term.coef * h as i64;
        match side {
            Side::Lhs => out.lhs += contribution,
            Side::Rhs => out.rhs += contribution,
        }
        out.terms.push(TermValue { side, term: term.clone(), h, contribution });
    }
    out.slack = out.rhs - out.lhs;
    Ok(out)
}

fn check_q(q: u64) -> Result<i64, IneqError> {
    if q < 2 {
        return Err(IneqError::BadParams(format!("q must be at least 2, got {q}")));
    }
    i64::try_from(q).map_err(|_| IneqError::BadParams(format!("q too large: {q}")))
}

fn names(prefix: &str, range: std::ops::RangeInclusive<i64>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn one(name: &str) -> Vec<String> {
    vec![name.to_string()]
}

fn cat(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

fn except(list: &[String], skip: usize) -> Vec<String> {
    list.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, s)| s.clone()).collect()
}

/// The inequality over `A, B1..B(q-1), C, U, Y, W, X, Z, V1..V(q-1)` that holds
/// whenever the characteristic does not divide `q`.
pub fn build_eq0(q: u64) -> Result<RankInequality, IneqError> {
    let q = check_q(q)?;
    let (a, c, u, y, w, x, z) = (one("A"), one("C"), one("U"), one("Y"), one("W"), one("X"), one("Z"));
    let b = names("B", 1..=q - 1);
    let v = names("V", 1..=q - 1);
    let variables = cat(&[&a, &b, &c, &u, &y, &w, &x, &z, &v]);

    let mut lhs = vec![RankTerm::joint(2 * q - 1, &a), RankTerm::joint(2 * q - 2, &c)];
    lhs.extend(b.iter().map(|bi| RankTerm::joint(2, &one(bi))));

    let mut rhs = vec![
        RankTerm::joint(q - 1, &u),
        RankTerm::joint(q - 1, &y),
        RankTerm::joint(q - 1, &w),
        RankTerm::joint(2 * (q - 1), &x),
    ];
    rhs.extend(v.iter().map(|vi| RankTerm::joint(1, &one(vi))));
    rhs.push(RankTerm::cond(7 * q - 6, &u, &cat(&[&a, &b])));
    rhs.push(RankTerm::cond(6 * q - 5, &y, &cat(&[&b, &c])));
    for (i, vi) in v.iter().enumerate() {
        rhs.push(RankTerm::cond(2 * q, &one(vi), &cat(&[&y, &except(&b, i)])));
    }
    rhs.push(RankTerm::cond(3 * q - 3, &w, &cat(&[&u, &y])));
    rhs.push(RankTerm::cond(4 * q - 3, &x, &cat(&[&u, &c])));
    rhs.push(RankTerm::cond(2 * q - 2, &z, &cat(&[&w, &x])));
    rhs.push(RankTerm::cond(2 * q - 1, &a, &cat(&[&x, &v])));
    rhs.push(RankTerm::cond(q - 1, &c, &cat(&[&a, &w])));
    for (i, bi) in b.iter().enumerate() {
        rhs.push(RankTerm::cond(2, &one(bi), &cat(&[&z, &except(&b, i)])));
    }
    for (vi, bi) in v.iter().zip(&b) {
        rhs.push(RankTerm::cond(1, &c, &cat(&[&one(vi), &one(bi)])));
    }
    rhs.push(RankTerm::joint(5 * q - 4, &a));
    rhs.push(RankTerm::joint(-(5 * q - 4), &cat(&[&a, &b, &c])));
    rhs.extend(b.iter().map(|bi| RankTerm::joint(6 * q - 5, &one(bi))));
    rhs.push(RankTerm::joint(6 * q - 5, &c));
    rhs.push(RankTerm::joint(-(q - 1), &cat(&[&b, &c])));

    Ok(RankInequality { variables, lhs, rhs })
}

/// The inequality over `A, B1..Bq, X, Y1..Yq, Z` that holds whenever the
/// characteristic divides `q`.
pub fn build_thmeq1(q: u64) -> Result<RankInequality, IneqError> {
    let q = check_q(q)?;
    let (a, x, z) = (one("A"), one("X"), one("Z"));
    let b = names("B", 1..=q);
    let y = names("Y", 1..=q);
    let variables = cat(&[&a, &b, &x, &y, &z]);

    let mut lhs = vec![RankTerm::joint(2, &a), RankTerm::joint(q + 1, &one(&b[0]))];
    lhs.extend(b[1..].iter().map(|bi| RankTerm::joint(2, &one(bi))));

    let mut rhs = vec![RankTerm::joint(2 * q - 1, &x)];
    rhs.extend(y.iter().map(|yi| RankTerm::joint(1, &one(yi))));
    rhs.push(RankTerm::joint(1, &z));
    rhs.push(RankTerm::cond(3 * q, &x, &cat(&[&a, &b])));
    for (i, yi) in y.iter().enumerate() {
        let coef = if i == 0 { q + 2 } else { 3 };
        rhs.push(RankTerm::cond(coef, &one(yi), &cat(&[&a, &except(&b, i)])));
    }
    rhs.push(RankTerm::cond(2, &z, &b));
    rhs.push(RankTerm::cond(1, &a, &cat(&[&y, &z])));
    rhs.push(RankTerm::cond(1, &a, &cat(&[&x, &z])));
    for (i, (bi, yi)) in b.iter().zip(&y).enumerate() {
        let coef = if i == 0 { q + 1 } else { 2 };
        rhs.push(RankTerm::cond(coef, &one(bi), &cat(&[&x, &one(yi)])));
    }
    rhs.push(RankTerm::joint(3 * q + 1, &a));
    rhs.extend(b.iter().map(|bi| RankTerm::joint(3 * q + 1, &one(bi))));
    rhs.push(RankTerm::joint(-(3 * q + 1), &cat(&[&a, &b])));

    Ok(RankInequality { variables, lhs, rhs })
}

fn witness_field(q: u64, p: u64) -> Result<PrimeField, IneqError> {
    check_q(q)?;
    PrimeField::new(p).map_err(|e| IneqError::BadParams(e.to_string()))
}

/// Sum of unit vectors `e_i` for `i` in `range` (one-based), length `len`.
fn indicator(len: usize, range: std::ops::RangeInclusive<usize>) -> Vec<i64> {
    (1..=len).map(|i| i64::from(range.contains(&i))).collect()
}

/// The violating assignment for [`build_eq0`] in `F_p^(q+1)`, `p | q`.
pub fn witness_eq0(q: u64, p: u64) -> Result<SubspaceAssignment<PrimeField>, IneqError> {
    let f = witness_field(q, p)?;
    if !q.is_multiple_of(p) {
        return Err(IneqError::BadParams(format!("witness needs p | q, got p={p}, q={q}")));
    }
    let q = q as usize;
    let m = q + 1;
    let e = |i: usize| indicator(m, i..=i);
    let plus = |x: Vec<i64>, y: Vec<i64>| -> Vec<i64> { x.iter().zip(&y).map(|(a, b)| a + b).collect() };
    let minus_last = |x: Vec<i64>| plus(x, e(m).iter().map(|v| -v).collect());

    let mut asg = SubspaceAssignment::new(f, m);
    let mut put = |name: String, v: Vec<i64>| asg.insert(&name, Subspace::line(&f, &v));
    put("A".into(), e(1))?;
    for i in 1..q {
        put(format!("B{i}"), e(i + 1))?;
    }
    put("C".into(), e(m))?;
    put("U".into(), indicator(m, 1..=q))?;
    put("Y".into(), indicator(m, 2..=m))?;
    put("W".into(), minus_last(e(1)))?;
    put("X".into(), minus_last(indicator(m, 1..=q)))?;
    put("Z".into(), indicator(m, 2..=q))?;
    for i in 1..q {
        put(format!("V{i}"), plus(e(i + 1), e(m)))?;
    }
    Ok(asg)
}

/// The violating assignment for [`build_thmeq1`] in `F_p^(q+1)`, `p ∤ q`.
pub fn witness_thmeq1(q: u64, p: u64) -> Result<SubspaceAssignment<PrimeField>, IneqError> {
    let f = witness_field(q, p)?;
    if q.is_multiple_of(p) {
        return Err(IneqError::BadParams(format!("witness needs p ∤ q, got p={p}, q={q}")));
    }
    let q = q as usize;
    let m = q + 1;
    let mut asg = SubspaceAssignment::new(f, m);
    let mut put = |name: String, v: Vec<i64>| asg.insert(&name, Subspace::line(&f, &v));
    put("A".into(), indicator(m, 1..=1))?;
    for i in 1..=q {
        put(format!("B{i}"), indicator(m, i + 1..=i + 1))?;
    }
    put("X".into(), indicator(m, 1..=m))?;
    for i in 1..=q {
        let mut v = indicator(m, 1..=m);
        v[i] = 0;
        put(format!("Y{i}"), v)?;
    }
    put("Z".into(), indicator(m, 2..=m))?;
    Ok(asg)
}

fn bound(num: u64, den: u64, k: u64, n: u64) -> Ratio<u64> {
    Ratio::new(num * k, den * n)
}

/// Linear capacity bound `(6q-6)k / ((6q-5)n)`.
pub fn bound_n1(q: u64, k: u64, n: u64) -> Ratio<u64> {
    bound(6 * q - 6, 6 * q - 5, k, n)
}

/// Linear capacity bound `3qk / ((3q+1)n)`.
pub fn bound_n2(q: u64, k: u64, n: u64) -> Ratio<u64> {
    bound(3 * q, 3 * q + 1, k, n)
}

/// The weaker alternative bound `(4q+1)k / ((4q+2)n)`.
pub fn bound_n2_alt(q: u64, k: u64, n: u64) -> Ratio<u64> {
    bound(4 * q + 1, 4 * q + 2, k, n)
}

/// Uniform random assignment: each variable is the span of `0..=m` random vectors.
pub fn random_assignment<R: Rng>(
    field: &PrimeField,
    m: usize,
    variables: &[String],
    rng: &mut R,
) -> SubspaceAssignment<PrimeField> {
    let p = field.p() as u64;
    let mut asg = SubspaceAssignment::new(*field, m);
    for v in variables {
        let count = rng.gen_range(0..=m);
        let vecs = Matrix::from_fn(field, count, m, |_, _| field.residue(rng.gen_range(0..p)).expect("in range"));
        asg.insert(v, Subspace::span(&vecs)).expect("same ambient and field");
    }
    asg
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleReport {
    pub trials: u64,
    pub min_slack: Option<i64>,
    pub violations: u64,
    /// Lowest-index violating trial, with its assignment.
    pub first_violation: Option<(u64, i64, SubspaceAssignment<PrimeField>)>,
}

/// Evaluates `trials` random assignments; trial `i` uses its own stream
/// derived from `(seed, i)`, so the report does not depend on scheduling.
pub fn sample_slacks(
    ineq: &RankInequality,
    field: &PrimeField,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<SampleReport, IneqError> {
    ineq.validate()?;
    let results: Vec<(u64, i64, SubspaceAssignment<PrimeField>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let asg = random_assignment(field, m, &ineq.variables, &mut rng);
            let slack = eval(ineq, &asg)?.slack;
            Ok((i, slack, asg))
        })
        .collect::<Result<_, IneqError>>()?;
    let min_slack = results.iter().map(|r| r.1).min();
    let violations = results.iter().filter(|r| r.1 < 0).count() as u64;
    let first_violation = results.into_iter().find(|r| r.1 < 0);
    Ok(SampleReport { trials, min_slack, violations, first_violation })
}
