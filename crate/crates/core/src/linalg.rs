//! Dense matrices and canonical subspaces over a [`Field`].
//!
//! Row reduction here always produces the canonical reduced row-echelon form:
//! pivots move strictly right, each pivot is one, pivot columns are zero
//! elsewhere, and the pivot row for a column is the first remaining row with a
//! nonzero entry there. Two matrices with the same row space therefore reduce
//! to identical bases, which is what makes [`Subspace`] equality structural.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ff::{Field, PrimeField};
#[cfg(test)]
use crate::ff::Fp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("subspaces live in different ambient spaces ({left} vs {right})")]
    AmbientMismatch { left: usize, right: usize },
    #[error("operands are over different fields")]
    FieldMismatch,
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("entry {value} is not a residue modulo {p}")]
    EntryOutOfRange { value: u64, p: u32 },
}

/// A dense row-major matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Self {
            entries: vec![field.zero(); rows * cols],
            field: field.clone(),
            rows,
            cols,
        }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    pub fn from_fn(field: &F, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F::Elem) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self {
            field: field.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn from_entries(field: &F, rows: usize, cols: usize, entries: Vec<F::Elem>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if !entries.iter().all(|e| field.contains(e)) {
            return Err(LinalgError::FieldMismatch);
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            entries,
        })
    }

    /// Integer rows mapped into the field. All rows must have `cols` entries.
    pub fn from_int_rows(field: &F, cols: usize, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::EntryCount {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&v| field.from_i64(v)));
        }
        Ok(Self {
            field: field.clone(),
            rows: rows.len(),
            cols,
            entries,
        })
    }

    /// `n x 1` column with a one in position `index` (zero-based).
    pub fn unit_column(field: &F, n: usize, index: usize) -> Self {
        Self::from_fn(field, n, 1, |r, _| if r == index { field.one() } else { field.zero() })
    }

    /// `1 x n` row with a one in position `index` (zero-based).
    pub fn unit_row(field: &F, n: usize, index: usize) -> Self {
        Self::from_fn(field, 1, n, |_, c| if c == index { field.one() } else { field.zero() })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[F::Elem] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.field.is_zero(e))
    }

    fn same_field(&self, other: &Self) -> Result<(), LinalgError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.same_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = &self.entries[i * self.cols + t];
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    let prod = a.clone() * rhs.entries[t * rhs.cols + j].clone();
                    out.entries[idx] = out.entries[idx].clone() + prod;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(F::Elem, F::Elem) -> F::Elem) -> Result<Self, LinalgError> {
        self.same_field(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        Self {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.clone() * s.clone()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Stacks matrices vertically. All parts must share the column count.
    pub fn vstack(field: &F, cols: usize, parts: &[&Self]) -> Result<Self, LinalgError> {
        let mut entries = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.field != *field {
                return Err(LinalgError::FieldMismatch);
            }
            if m.cols != cols {
                return Err(LinalgError::DimensionMismatch {
                    op: "vstack",
                    left: (rows, cols),
                    right: m.shape(),
                });
            }
            entries.extend(m.entries.iter().cloned());
            rows += m.rows;
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            entries,
        })
    }

    /// Concatenates matrices horizontally. All parts must share the row count.
    pub fn hstack(field: &F, rows: usize, parts: &[&Self]) -> Result<Self, LinalgError> {
        let mut cols = 0;
        for m in parts {
            if m.field != *field {
                return Err(LinalgError::FieldMismatch);
            }
            if m.rows != rows {
                return Err(LinalgError::DimensionMismatch {
                    op: "hstack",
                    left: (rows, cols),
                    right: m.shape(),
                });
            }
            cols += m.cols;
        }
        let mut out = Self::zeros(field, rows, cols);
        let mut offset = 0;
        for m in parts {
            for r in 0..rows {
                for c in 0..m.cols {
                    out.entries[r * cols + offset + c] = m.get(r, c).clone();
                }
            }
            offset += m.cols;
        }
        Ok(out)
    }

    /// Copy of the block `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of bounds");
        Self::from_fn(&self.field, rows, cols, |r, c| self.get(r0 + r, c0 + c).clone())
    }

    /// Writes `src` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) {
        assert!(r0 + src.rows <= self.rows && c0 + src.cols <= self.cols, "block out of bounds");
        for r in 0..src.rows {
            for c in 0..src.cols {
                self.set(r0 + r, c0 + c, src.get(r, c).clone());
            }
        }
    }

    fn to_rows(&self) -> Vec<Vec<F::Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn from_row_vecs(field: &F, cols: usize, rows: Vec<Vec<F::Elem>>) -> Self {
        let n = rows.len();
        Self {
            field: field.clone(),
            rows: n,
            cols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Canonical reduced row-echelon form with zero rows dropped, and the rank.
    pub fn rref(&self) -> (Self, usize) {
        let mut rows = self.to_rows();
        let pivots = eliminate(&self.field, &mut rows, None);
        let rank = pivots.len();
        rows.truncate(rank);
        (Self::from_row_vecs(&self.field, self.cols, rows), rank)
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.to_rows();
        eliminate(&self.field, &mut rows, None).len()
    }

    /// Basis (as rows) of the right null space `{x : M x = 0}`.
    pub fn kernel(&self) -> Self {
        let f = &self.field;
        let mut rows = self.to_rows();
        let pivots = eliminate(f, &mut rows, None);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let basis: Vec<Vec<F::Elem>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -rows[r][fc].clone();
                }
                v
            })
            .collect();
        Self::from_row_vecs(f, self.cols, basis)
    }

    /// Basis (as rows) of the left null space `{y : y M = 0}`.
    pub fn left_kernel(&self) -> Self {
        self.transpose().kernel()
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut rows = self.to_rows();
        let mut track = Self::identity(&self.field, n).to_rows();
        let pivots = eliminate(&self.field, &mut rows, Some(&mut track));
        (pivots.len() == n).then(|| Self::from_row_vecs(&self.field, n, track))
    }
}

/// In-place Gauss-Jordan elimination to canonical RREF. Returns the pivot
/// columns; rows past `pivots.len()` are zero afterwards. When `track` is
/// given, the same row operations are applied to it, so `track_out = E *
/// track_in` where `E * rows_in = rows_out`.
fn eliminate<F: Field>(f: &F, rows: &mut [Vec<F::Elem>], mut track: Option<&mut Vec<Vec<F::Elem>>>) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(sel) = (r..nrows).find(|&i| !f.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, sel);
        if let Some(t) = track.as_deref_mut() {
            t.swap(r, sel);
        }
        let inv = f.inv(&rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        if let Some(t) = track.as_deref_mut() {
            for x in t[r].iter_mut() {
                *x = x.clone() * inv.clone();
            }
        }
        for i in 0..nrows {
            if i == r || f.is_zero(&rows[i][c]) {
                continue;
            }
            let factor = rows[i][c].clone();
            let (pivot_row, target) = split_pair(rows, r, i);
            for (x, y) in target.iter_mut().zip(pivot_row.iter()) {
                *x = x.clone() - factor.clone() * y.clone();
            }
            if let Some(t) = track.as_deref_mut() {
                let (pivot_row, target) = split_pair(t, r, i);
                for (x, y) in target.iter_mut().zip(pivot_row.iter()) {
                    *x = x.clone() - factor.clone() * y.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn split_pair<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// Finds some `R` with `R * S = T`, or `None` when the rows of `T` are not
/// all in the row space of `S`.
pub fn solve_left<F: Field>(s: &Matrix<F>, t: &Matrix<F>) -> Result<Option<Matrix<F>>, LinalgError> {
    s.same_field(t)?;
    if s.cols != t.cols {
        return Err(LinalgError::DimensionMismatch {
            op: "solve_left",
            left: s.shape(),
            right: t.shape(),
        });
    }
    let f = &s.field;
    let mut reduced = s.to_rows();
    let mut track = Matrix::identity(f, s.rows).to_rows();
    let pivots = eliminate(f, &mut reduced, Some(&mut track));

    let mut out = Matrix::zeros(f, t.rows, s.rows);
    for i in 0..t.rows {
        let mut residual = t.row(i).to_vec();
        let mut coeffs = vec![f.zero(); s.rows];
        for (r, &pc) in pivots.iter().enumerate() {
            let c = residual[pc].clone();
            if f.is_zero(&c) {
                continue;
            }
            for (x, y) in residual.iter_mut().zip(&reduced[r]) {
                *x = x.clone() - c.clone() * y.clone();
            }
            for (x, y) in coeffs.iter_mut().zip(&track[r]) {
                *x = x.clone() + c.clone() * y.clone();
            }
        }
        if residual.iter().any(|x| !f.is_zero(x)) {
            return Ok(None);
        }
        for (j, v) in coeffs.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(Some(out))
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl Serialize for Matrix<PrimeField> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            p: self.field.p(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.value() as u64).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix<PrimeField> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let field = PrimeField::new(raw.p as u64).map_err(D::Error::custom)?;
        let entries = raw
            .entries
            .iter()
            .map(|&v| {
                field
                    .residue(v)
                    .ok_or(LinalgError::EntryOutOfRange { value: v, p: field.p() })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Matrix::from_entries(&field, raw.rows, raw.cols, entries).map_err(D::Error::custom)
    }
}

/// A subspace of `F^m`, stored as the canonical RREF basis of its rows.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace<F: Field> {
    ambient: usize,
    basis: Matrix<F>,
}

impl<F: Field> Subspace<F> {
    /// Row span of `vectors`; the ambient dimension is its column count.
    pub fn span(vectors: &Matrix<F>) -> Self {
        let (basis, _) = vectors.rref();
        Self {
            ambient: vectors.cols,
            basis,
        }
    }

    pub fn zero(field: &F, ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::zeros(field, 0, ambient),
        }
    }

    pub fn full(field: &F, ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::identity(field, ambient),
        }
    }

    /// Span of a single integer vector.
    pub fn line(field: &F, v: &[i64]) -> Self {
        Self::span(&Matrix::from_int_rows(field, v.len(), &[v.to_vec()]).expect("single row"))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn field(&self) -> &F {
        &self.basis.field
    }

    fn compatible(&self, other: &Self) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        self.basis.same_field(&other.basis)
    }

    pub fn sum(&self, other: &Self) -> Result<Self, LinalgError> {
        self.compatible(other)?;
        let stacked = Matrix::vstack(self.field(), self.ambient, &[&self.basis, &other.basis])?;
        Ok(Self::span(&stacked))
    }

    /// `A ∩ B`: every left-kernel vector `[x | y]` of `[A; B]` gives the
    /// common vector `x A = -y B`.
    pub fn intersect(&self, other: &Self) -> Result<Self, LinalgError> {
        self.compatible(other)?;
        let f = self.field();
        let stacked = Matrix::vstack(f, self.ambient, &[&self.basis, &other.basis])?;
        let kernel = stacked.left_kernel();
        let r = self.dim();
        let coeffs = kernel.block(0, 0, kernel.rows, r);
        let vectors = coeffs.mul(&self.basis)?;
        Ok(Self::span(&vectors))
    }

    pub fn contains_vector(&self, v: &[F::Elem]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length differs from ambient dimension");
        let row = Matrix::from_entries(self.field(), 1, self.ambient, v.to_vec()).expect("shape checked");
        solve_left(&self.basis, &row).expect("shapes agree").is_some()
    }

    pub fn contains(&self, other: &Self) -> Result<bool, LinalgError> {
        Ok(self.sum(other)?.dim() == self.dim())
    }

    /// Image under the linear map `v -> v T` for an `m x m'` matrix `T`.
    pub fn transform(&self, t: &Matrix<F>) -> Result<Self, LinalgError> {
        if t.rows != self.ambient {
            return Err(LinalgError::DimensionMismatch {
                op: "transform",
                left: self.basis.shape(),
                right: t.shape(),
            });
        }
        Ok(Self::span(&self.basis.mul(t)?))
    }
}

impl<F: Field> fmt::Debug for Subspace<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} of {}, basis {:?})", self.dim(), self.ambient, self.basis)
    }
}

/// Dimension of the sum of the given subspaces (`0` for none).
pub fn h_joint<F: Field>(vars: &[&Subspace<F>]) -> Result<usize, LinalgError> {
    let Some((first, rest)) = vars.split_first() else {
        return Ok(0);
    };
    let mut acc = (*first).clone();
    for s in rest {
        acc = acc.sum(s)?;
    }
    Ok(acc.dim())
}

/// `H(S | G) = H(S ∪ G) - H(G)`.
pub fn h_cond<F: Field>(vars: &[&Subspace<F>], given: &[&Subspace<F>]) -> Result<usize, LinalgError> {
    let all: Vec<&Subspace<F>> = vars.iter().chain(given.iter()).copied().collect();
    let joint = h_joint(&all)?;
    let g = h_joint(given)?;
    Ok(joint - g)
}


#[cfg(test)]
pub(crate) mod props {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_matrix(f: &PrimeField, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<PrimeField> {
        let p = f.p() as u64;
        Matrix::from_fn(f, rows, cols, |_, _| f.residue(rng.gen_range(0..p)).unwrap())
    }

    fn random_invertible(f: &PrimeField, rng: &mut ChaCha8Rng, n: usize) -> Matrix<PrimeField> {
        loop {
            let m = random_matrix(f, rng, n, n);
            if m.rank() == n {
                return m;
            }
        }
    }

    fn prime() -> impl Strategy<Value = PrimeField> {
        prop::sample::select(vec![2u64, 3, 5]).prop_map(|p| PrimeField::new(p).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn block_inverse_factors(f in prime(), d in 1usize..=2, n in 2usize..=3, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dn = d * n;
            let b = random_invertible(&f, &mut rng, dn);
            let b_blocks: Vec<_> = (0..n).map(|j| b.block(0, j * d, dn, d)).collect();
            // A_i solves A_i B = [0 .. I_d .. 0]
            let a_blocks: Vec<_> = (0..n)
                .map(|i| {
                    let mut target = Matrix::zeros(&f, d, dn);
                    target.set_block(0, i * d, &Matrix::identity(&f, d));
                    solve_left(&b, &target).unwrap().expect("B is invertible")
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let prod = a_blocks[i].mul(&b_blocks[j]).unwrap();
                    let want = if i == j { Matrix::identity(&f, d) } else { Matrix::zeros(&f, d, d) };
                    prop_assert_eq!(prod, want);
                }
            }
            let a_refs: Vec<_> = a_blocks.iter().collect();
            let b_refs: Vec<_> = b_blocks.iter().collect();
            let a = Matrix::vstack(&f, dn, &a_refs).unwrap();
            let b2 = Matrix::hstack(&f, dn, &b_refs).unwrap();
            prop_assert_eq!(a.mul(&b2).unwrap(), Matrix::identity(&f, dn));
        }

        #[test]
        fn rref_idempotent_and_canonical(f in prime(), rows in 0usize..5, cols in 1usize..5, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&f, &mut rng, rows, cols);
            let (r, rank) = m.rref();
            prop_assert_eq!(r.rref(), (r.clone(), rank));
            prop_assert_eq!(rank, r.rows());
            // Same row space through a random invertible change of generators.
            let g = random_invertible(&f, &mut rng, rows);
            let (r2, _) = g.mul(&m).unwrap().rref();
            prop_assert_eq!(&r2, &r);
            // Redundant rows leave the canonical form unchanged.
            let extra = random_matrix(&f, &mut rng, 2, rows).mul(&m).unwrap();
            let (r3, _) = Matrix::vstack(&f, cols, &[&m, &extra]).unwrap().rref();
            prop_assert_eq!(r3, r);
        }

        #[test]
        fn modularity(f in prime(), m in 1usize..5, ra in 0usize..5, rb in 0usize..5, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Subspace::span(&random_matrix(&f, &mut rng, ra, m));
            let b = Subspace::span(&random_matrix(&f, &mut rng, rb, m));
            let s = a.sum(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            prop_assert_eq!(a.dim() + b.dim(), s.dim() + i.dim());
            prop_assert!(a.contains(&i).unwrap() && b.contains(&i).unwrap());
            prop_assert!(s.contains(&a).unwrap() && s.contains(&b).unwrap());
        }

        #[test]
        fn solve_left_sound(f in prime(), sr in 0usize..4, tr in 0usize..4, cols in 1usize..5, in_span: bool, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_matrix(&f, &mut rng, sr, cols);
            let t = if in_span {
                random_matrix(&f, &mut rng, tr, sr).mul(&s).unwrap()
            } else {
                random_matrix(&f, &mut rng, tr, cols)
            };
            let stacked = Matrix::vstack(&f, cols, &[&s, &t]).unwrap();
            match solve_left(&s, &t).unwrap() {
                Some(r) => {
                    prop_assert_eq!(stacked.rank(), s.rank());
                    prop_assert_eq!(&r.mul(&s).unwrap(), &t);
                }
                None => prop_assert!(stacked.rank() > s.rank()),
            }
            if in_span {
                prop_assert!(solve_left(&s, &t).unwrap().is_some());
            }
        }

        #[test]
        fn conditioning_reduces(f in prime(), m in 1usize..5, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut spaces = Vec::new();
            for _ in 0..4 {
                let r = rng.gen_range(0..=m);
                spaces.push(Subspace::span(&random_matrix(&f, &mut rng, r, m)));
            }
            let before = h_cond(&[&spaces[0], &spaces[1]], &[&spaces[2]]).unwrap();
            let after = h_cond(&[&spaces[0], &spaces[1]], &[&spaces[2], &spaces[3]]).unwrap();
            prop_assert!(after <= before);
        }

        #[test]
        fn intersection_matches_enumeration(f in prime(), m in 1usize..4, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ra = rng.gen_range(0..=m);
            let rb = rng.gen_range(0..=m);
            let a = Subspace::span(&random_matrix(&f, &mut rng, ra, m));
            let b = Subspace::span(&random_matrix(&f, &mut rng, rb, m));
            let i = a.intersect(&b).unwrap();
            let p = f.p() as u64;
            let mut count = 0u64;
            for code in 0..p.pow(m as u32) {
                let v: Vec<Fp> = (0..m).map(|c| f.residue(code / p.pow(c as u32) % p).unwrap()).collect();
                let both = a.contains_vector(&v) && b.contains_vector(&v);
                prop_assert_eq!(both, i.contains_vector(&v));
                count += both as u64;
            }
            prop_assert_eq!(count, p.pow(i.dim() as u32));
        }
    }
}
