//! Dense matrices over a runtime-chosen [`ScalarDomain`].
//!
//! Every rank-style question in this crate routes through [`Matrix::rank`]:
//! row reduction with exact pivots over GF(p) and the rationals, and
//! threshold pivots (relative to the largest entry of the matrix being
//! reduced, with partial pivoting by magnitude) over floats.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{Scalar, ScalarDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    domain: ScalarDomain,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>, // row-major
}

impl Matrix {
    /// Builds a matrix from canonical entries of `domain`.
    pub fn new(domain: ScalarDomain, rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        domain.validate()?;
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", entries.len()),
            });
        }
        for e in &entries {
            if !domain.contains(e) {
                return Err(Error::InvalidParameter(format!(
                    "entry {e} is not a canonical element of {domain}"
                )));
            }
        }
        Ok(Matrix { domain, rows, cols, entries })
    }

    /// Convenience constructor reducing signed integers into the domain.
    pub fn from_i64(domain: ScalarDomain, rows: usize, cols: usize, values: &[i64]) -> Result<Self> {
        let entries = values.iter().map(|&v| domain.from_i64(v)).collect();
        Self::new(domain, rows, cols, entries)
    }

    pub fn zeros(domain: ScalarDomain, rows: usize, cols: usize) -> Self {
        let entries = vec![domain.zero(); rows * cols];
        Matrix { domain, rows, cols, entries }
    }

    pub fn identity(domain: ScalarDomain, n: usize) -> Self {
        let mut m = Self::zeros(domain, n, n);
        for i in 0..n {
            let one = m.domain.one();
            m.entries[i * n + i] = one;
        }
        m
    }

    pub fn from_fn(
        domain: ScalarDomain,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Matrix { domain, rows, cols, entries }
    }

    pub fn domain(&self) -> &ScalarDomain {
        &self.domain
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert!(self.domain.contains(&v), "entry must belong to the domain");
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.domain.is_zero(e))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| {
            (0..self.cols).all(|c| r == c || self.domain.is_zero(self.get(r, c)))
        })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.domain.clone(), self.cols, self.rows, |r, c| {
            self.get(c, r).clone()
        })
    }

    fn check_domain(&self, other: &Matrix) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(self.domain.clone(), other.domain.clone()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_domain(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| self.domain.add(a, b))
            .collect();
        Ok(Matrix { domain: self.domain.clone(), rows: self.rows, cols: self.cols, entries })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        let entries = self.entries.iter().map(|e| self.domain.neg(e)).collect();
        Matrix { domain: self.domain.clone(), rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let entries = self.entries.iter().map(|e| self.domain.mul(e, s)).collect();
        Matrix { domain: self.domain.clone(), rows: self.rows, cols: self.cols, entries }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_domain(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("lhs cols = rhs rows ({})", self.cols),
                got: format!("{}", other.rows),
            });
        }
        let dom = &self.domain;
        let mut out = Matrix::zeros(dom.clone(), self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if dom.is_zero(a) {
                    continue;
                }
                for c in 0..other.cols {
                    let prod = dom.mul(a, other.get(k, c));
                    let acc = dom.add(out.get(r, c), &prod);
                    out.entries[r * out.cols + c] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Matrix power by repeated multiplication; `self` square, `e >= 0`.
    pub fn pow(&self, e: u32) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        let mut acc = Matrix::identity(self.domain.clone(), self.rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().ok_or_else(|| {
            Error::InvalidParameter("hstack of zero matrices".into())
        })?;
        let rows = first.rows;
        let mut cols = 0;
        for p in parts.iter() {
            first.check_domain(p)?;
            if p.rows != rows {
                return Err(Error::DimensionMismatch {
                    expected: format!("{rows} rows"),
                    got: format!("{} rows", p.rows),
                });
            }
            cols += p.cols;
        }
        let mut out = Matrix::zeros(first.domain.clone(), rows, cols);
        let mut offset = 0;
        for p in parts {
            for r in 0..rows {
                for c in 0..p.cols {
                    out.entries[r * cols + offset + c] = p.get(r, c).clone();
                }
            }
            offset += p.cols;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let transposed: Vec<Matrix> = parts.iter().map(|p| p.transpose()).collect();
        let refs: Vec<&Matrix> = transposed.iter().collect();
        Ok(Matrix::hstack(&refs)?.transpose())
    }

    /// Extracts the sub-matrix indexed by `row_ids` x `col_ids`.
    pub fn submatrix(&self, row_ids: &[usize], col_ids: &[usize]) -> Matrix {
        Matrix::from_fn(self.domain.clone(), row_ids.len(), col_ids.len(), |r, c| {
            self.get(row_ids[r], col_ids[c]).clone()
        })
    }

    pub fn column(&self, c: usize) -> Matrix {
        self.submatrix(&(0..self.rows).collect::<Vec<_>>(), &[c])
    }

    /// Standard Kronecker product; shape `(rA*rB) x (cA*cB)`.
    pub fn kron(&self, other: &Matrix) -> Result<Matrix> {
        self.check_domain(other)?;
        let dom = self.domain.clone();
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        Ok(Matrix::from_fn(dom, ra * rb, ca * cb, |r, c| {
            let a = self.get(r / rb, c / cb);
            let b = other.get(r % rb, c % cb);
            self.domain.mul(a, b)
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.as_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Number of pivots of a row reduction; exact over GF(p) and the
    /// rationals, threshold-based over floats.
    pub fn rank(&self) -> usize {
        self.row_reduce().rank
    }

    /// Reduced row-echelon form of this matrix (zero rows at the bottom).
    pub fn rref(&self) -> Matrix {
        self.row_reduce().mat
    }

    /// Canonical basis of the row space: the nonzero rows of the RREF,
    /// returned as a `rank x cols` matrix (possibly with zero rows... none).
    pub fn row_space_basis(&self) -> Matrix {
        let red = self.row_reduce();
        red.mat.submatrix(&(0..red.rank).collect::<Vec<_>>(), &(0..self.cols).collect::<Vec<_>>())
    }

    /// Pivot column indices of the RREF, in order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.row_reduce().pivot_cols
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        self.solve(&Matrix::identity(self.domain.clone(), self.rows))
    }

    /// Solves `self * x = rhs` exactly for square invertible `self`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_domain(rhs)?;
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.rows),
                got: format!("{} rows", rhs.rows),
            });
        }
        let n = self.rows;
        let aug = Matrix::hstack(&[self, rhs])?;
        let red = aug.row_reduce();
        if red.rank < n || red.pivot_cols.iter().take(n).copied().ne(0..n) {
            return Err(Error::SingularMatrix);
        }
        let right: Vec<usize> = (n..n + rhs.cols).collect();
        Ok(red.mat.submatrix(&(0..n).collect::<Vec<_>>(), &right))
    }

    /// Converts an exact-rational or float matrix into the float domain.
    pub fn to_float(&self, tolerance: f64) -> Result<Matrix> {
        let dom = ScalarDomain::float(tolerance)?;
        match self.domain {
            ScalarDomain::PrimeField { .. } => Err(Error::InvalidParameter(
                "prime-field matrices have no float counterpart".into(),
            )),
            _ => {
                let entries = self.entries.iter().map(|e| Scalar::Float(e.as_f64())).collect();
                Matrix::new(dom, self.rows, self.cols, entries)
            }
        }
    }

    /// Total order on same-shape matrices by flattened entries; used for
    /// deterministic tie-breaking in searches. Panics on NaN.
    pub fn entry_cmp(&self, other: &Matrix) -> Ordering {
        for (a, b) in self.entries.iter().zip(&other.entries) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) => continue,
                Some(ord) => return ord,
                None => panic!("entries are not comparable"),
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }

    fn row_reduce(&self) -> Reduction {
        let mut m = self.clone();
        let dom = m.domain.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0usize;

        // Relative threshold for the float domain, anchored to the largest
        // absolute entry of the matrix being reduced.
        let float_cutoff = match dom {
            ScalarDomain::Float { tolerance } => Some(tolerance * self.max_abs()),
            _ => None,
        };

        for col in 0..m.cols {
            if pivot_row >= m.rows {
                break;
            }
            let pivot = match float_cutoff {
                None => (pivot_row..m.rows).find(|&r| !dom.is_zero(m.get(r, col))),
                Some(cutoff) => {
                    let best = (pivot_row..m.rows)
                        .max_by(|&a, &b| {
                            let fa = m.get(a, col).as_f64().abs();
                            let fb = m.get(b, col).as_f64().abs();
                            fa.partial_cmp(&fb).unwrap_or(Ordering::Equal)
                        })
                        .filter(|&r| m.get(r, col).as_f64().abs() > cutoff);
                    best
                }
            };
            let Some(p) = pivot else { continue };
            m.swap_rows(p, pivot_row);
            let inv = dom
                .inv(m.get(pivot_row, col))
                .expect("pivot is nonzero by selection");
            m.scale_row(pivot_row, &inv);
            for r in 0..m.rows {
                if r == pivot_row || dom.is_zero(m.get(r, col)) {
                    continue;
                }
                let factor = m.get(r, col).clone();
                m.row_axpy(r, pivot_row, &dom.neg(&factor), col);
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }

        // Over floats, flush sub-threshold residue so the echelon output is
        // canonical under the domain's tolerance.
        if let Some(cutoff) = float_cutoff {
            for e in &mut m.entries {
                if let Scalar::Float(f) = e {
                    if f.abs() <= cutoff {
                        *f = 0.0;
                    }
                }
            }
        }

        let rank = pivot_cols.len();
        Reduction { mat: m, pivot_cols, rank }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Scalar) {
        for c in 0..self.cols {
            let v = self.domain.mul(self.get(r, c), s);
            self.entries[r * self.cols + c] = v;
        }
    }

    /// row[dst] += factor * row[src], starting from column `from`.
    fn row_axpy(&mut self, dst: usize, src: usize, factor: &Scalar, from: usize) {
        for c in from..self.cols {
            let delta = self.domain.mul(self.get(src, c), factor);
            let v = self.domain.add(self.get(dst, c), &delta);
            self.entries[dst * self.cols + c] = v;
        }
    }
}

struct Reduction {
    mat: Matrix,
    pivot_cols: Vec<usize>,
    rank: usize,
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Matrix", 4)?;
        st.serialize_field("domain", &self.domain)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        match self.domain {
            ScalarDomain::PrimeField { .. } => {
                let vals: Vec<u64> = self
                    .entries
                    .iter()
                    .map(|e| match e {
                        Scalar::Fp(v) => *v,
                        _ => unreachable!("domain invariant"),
                    })
                    .collect();
                st.serialize_field("entries", &vals)?;
            }
            ScalarDomain::Rational => {
                let vals: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
                st.serialize_field("entries", &vals)?;
            }
            ScalarDomain::Float { .. } => {
                let vals: Vec<f64> = self.entries.iter().map(|e| e.as_f64()).collect();
                st.serialize_field("entries", &vals)?;
            }
        }
        st.end()
    }
}

#[derive(Deserialize)]
struct MatrixRepr {
    domain: ScalarDomain,
    rows: usize,
    cols: usize,
    entries: Vec<serde_json::Value>,
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        repr.domain.validate().map_err(D::Error::custom)?;
        let mut entries = Vec::with_capacity(repr.entries.len());
        for v in &repr.entries {
            entries.push(value_to_scalar(&repr.domain, v).map_err(D::Error::custom)?);
        }
        Matrix::new(repr.domain, repr.rows, repr.cols, entries).map_err(D::Error::custom)
    }
}

fn value_to_scalar(domain: &ScalarDomain, v: &serde_json::Value) -> Result<Scalar> {
    let bad = || Error::InvalidParameter(format!("entry {v} is not valid for domain {domain}"));
    match domain {
        ScalarDomain::PrimeField { .. } => {
            let i = v.as_i64().ok_or_else(bad)?;
            Ok(domain.from_i64(i))
        }
        ScalarDomain::Rational => match v {
            serde_json::Value::String(s) => {
                Ok(Scalar::Rational(crate::domain::parse_rational(s)?))
            }
            serde_json::Value::Number(n) => {
                let i = n.as_i64().ok_or_else(bad)?;
                Ok(domain.from_i64(i))
            }
            _ => Err(bad()),
        },
        ScalarDomain::Float { .. } => {
            let f = v.as_f64().ok_or_else(bad)?;
            if !f.is_finite() {
                return Err(bad());
            }
            Ok(Scalar::Float(f))
        }
    }
}
