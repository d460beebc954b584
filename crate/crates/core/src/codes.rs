//! Explicit (1,n) codes for the two benchmark families and the lift to their
//! k-copy joins.
//!
//! Each construction is a coefficient recipe: every edge forms a signed
//! combination of its available inputs. Message inputs enter through the unit
//! embedding (message `x[..][j]` occupies component `j` of the edge block),
//! edge inputs through a multiple of the identity.

use thiserror::Error;

use crate::families::{component_index, copy_suffix, gen_n1_prime, gen_n2_prime, FamilyError};
use crate::ff::{Field, PrimeField};
use crate::linalg::Matrix;
use crate::netmodel::{DecoderKey, Edge, FractionalCode, Input, LocalKey, NetError, NetworkSpec, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(transparent)]
    BadParams(#[from] FamilyError),
    #[error("characteristic {p} divides q = {q}, so q has no inverse")]
    CharDividesQ { p: u64, q: u64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Builds a (1,n) code from per-(edge, input) coefficients; each terminal
/// decodes with the unit selector of the demanded component.
pub fn compile_recipe<F: Field>(spec: &NetworkSpec, field: &F, n: usize, coef: impl Fn(&Edge, &Input) -> F::Elem) -> Result<FractionalCode<F>, CodeError> {
    let topo = Topology::new(spec)?;
    let mut code = FractionalCode::new(field, 1, n);
    for e in &spec.edges {
        for input in topo.inputs(spec, &e.tail) {
            let c = coef(e, &input);
            if field.is_zero(&c) {
                continue;
            }
            let m = match &input {
                Input::Message(id) => {
                    let j = component_index(id).ok_or_else(|| CodeError::ShapeMismatch(format!("message {id} has no component index")))?;
                    if j >= n {
                        return Err(CodeError::ShapeMismatch(format!("message {id} exceeds block length {n}")));
                    }
                    Matrix::unit_column(field, n, j)
                }
                Input::Edge(_) => Matrix::identity(field, n),
            };
            code.set_local(&e.id, input, m.scale(&c));
        }
    }
    for d in &spec.demands {
        let j = component_index(&d.message).ok_or_else(|| CodeError::ShapeMismatch(format!("message {} has no component index", d.message)))?;
        for &ei in topo.in_edges(&d.terminal) {
            code.decoders.insert(
                DecoderKey {
                    terminal: d.terminal.clone(),
                    message: d.message.clone(),
                    edge: spec.edges[ei].id.clone(),
                },
                Matrix::unit_row(field, n, j),
            );
        }
    }
    Ok(code)
}

fn is_edge(input: &Input, pred: impl Fn(&str) -> bool) -> bool {
    matches!(input, Input::Edge(id) if pred(id))
}

/// Edge leaving a source node (sources are named after their message).
fn from_source(input: &Input) -> bool {
    is_edge(input, |x| ["(a[", "(b[", "(c["].iter().any(|p| x.starts_with(p)))
}

/// Coefficients of the divisibility construction. Meaningful in any field;
/// it is a solution exactly when `q = 0` there.
pub fn n1_coefficient<F: Field>(field: &F, edge: &Edge, input: &Input) -> F::Elem {
    let id = edge.id.as_str();
    let minus = match id {
        "(u5,u7)" => is_edge(input, |x| x == "(u4,u5)"),
        "(u6,u8)" => from_source(input),
        "(u9,u10)" => is_edge(input, |x| x == "(u7,u9)"),
        "(u11,u12)" => is_edge(input, |x| x == "(u7,u11)"),
        "(u13,u14)" => is_edge(input, |x| x.starts_with("(head(e[")),
        _ if id.starts_with("e[") || id.starts_with("(v[") || id.starts_with("(w[") => from_source(input),
        _ => false,
    };
    field.from_i64(if minus { -1 } else { 1 })
}

/// Coefficients of the non-divisibility construction, given `q^-1`.
pub fn n2_coefficient<F: Field>(field: &F, q: usize, q_inv: &F::Elem, edge: &Edge, input: &Input) -> F::Elem {
    let id = edge.id.as_str();
    match id {
        "e'_a" if is_edge(input, |x| x.starts_with("(head(e_b)")) => field.from_i64(-1),
        "e'_b" => {
            if is_edge(input, |x| x.starts_with("(head(e_b)")) {
                -(field.from_i64(q as i64 - 1) * q_inv.clone())
            } else {
                q_inv.clone()
            }
        }
        _ if id.starts_with("e'[") && is_edge(input, |x| x.starts_with("(head(e[")) => field.from_i64(-1),
        _ => field.one(),
    }
}

pub fn explicit_n1_code_over<F: Field>(field: &F, q: usize, n: usize) -> Result<FractionalCode<F>, CodeError> {
    let spec = gen_n1_prime(q, n)?;
    compile_recipe(&spec, field, n, |e, i| n1_coefficient(field, e, i))
}

pub fn explicit_n2_code_over<F: Field>(field: &F, q: usize, n: usize) -> Result<FractionalCode<F>, CodeError> {
    let spec = gen_n2_prime(q, n)?;
    let q_inv = field.inv(&field.from_i64(q as i64)).ok_or(CodeError::CharDividesQ {
        p: field.characteristic(),
        q: q as u64,
    })?;
    compile_recipe(&spec, field, n, |e, i| n2_coefficient(field, q, &q_inv, e, i))
}

fn prime(p: u64) -> Result<PrimeField, CodeError> {
    PrimeField::new(p).map_err(|e| CodeError::BadParams(FamilyError::BadParams(e.to_string())))
}

/// (1,n) code for the divisibility network over `F_p`.
pub fn explicit_n1_code(q: usize, n: usize, p: u64) -> Result<FractionalCode<PrimeField>, CodeError> {
    explicit_n1_code_over(&prime(p)?, q, n)
}

/// (1,n) code for the non-divisibility network over `F_p`; refused when `p | q`.
pub fn explicit_n2_code(q: usize, n: usize, p: u64) -> Result<FractionalCode<PrimeField>, CodeError> {
    explicit_n2_code_over(&prime(p)?, q, n)
}

/// Lifts a (1,n) code on `base` to a (k,n) code on `join_copies(base, k)`:
/// copy `c` carries component `c` of every message through the same local
/// maps, and terminals read component `c` back from copy `c`.
pub fn lift_joined_code<F: Field>(base: &NetworkSpec, code: &FractionalCode<F>, k: usize) -> Result<FractionalCode<F>, CodeError> {
    if code.k != 1 {
        return Err(CodeError::ShapeMismatch(format!("base code must have k = 1, found k = {}", code.k)));
    }
    if k == 0 {
        return Err(FamilyError::BadParams("copy count must be positive".into()).into());
    }
    code.check(base, &Topology::new(base)?)?;
    let f = &code.field;
    let mut out = FractionalCode::new(f, k, code.n);
    for c in 0..k {
        let suffix = copy_suffix(c);
        let sel = Matrix::unit_row(f, k, c);
        for (key, m) in &code.locals {
            let (input, matrix) = match &key.input {
                Input::Message(id) => (Input::Message(id.clone()), m.mul(&sel).expect("n x 1 times 1 x k")),
                Input::Edge(id) => (Input::Edge(format!("{id}{suffix}")), m.clone()),
            };
            out.locals.insert(
                LocalKey {
                    edge: format!("{}{suffix}", key.edge),
                    input,
                },
                matrix,
            );
        }
        let sel_t = sel.transpose();
        for (key, d) in &code.decoders {
            out.decoders.insert(
                DecoderKey {
                    terminal: key.terminal.clone(),
                    message: key.message.clone(),
                    edge: format!("{}{suffix}", key.edge),
                },
                sel_t.mul(d).expect("k x 1 times 1 x n"),
            );
        }
    }
    Ok(out)
}
