//! Finite-dimensional algebras given by structure constants.
//!
//! Identity checks only look at basis triples: both Novikov identities are
//! trilinear, so they hold everywhere once they hold on a basis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Elem, Field, FieldError};
use crate::linalg::{add_vec, is_zero_vec, scale_vec, unit_vec, LinalgError, Matrix, Subspace};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("subspace is not a two-sided ideal")]
    NotAnIdeal,
    #[error("change of basis matrix is singular")]
    SingularMatrix,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("malformed algebra document: {0}")]
    Json(#[from] serde_json::Error),
}

/// e_i e_j = Σ_k c[i][j][k] e_k, all indices 0-based.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Algebra {
    field: Field,
    dim: usize,
    table: Vec<Elem>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AlgebraDoc {
    pub dim: usize,
    pub field: String,
    pub table: Vec<TableEntry>,
}

/// The power filtration A¹ ⊇ A² ⊇ … with A^{k+1} = Σ A^i A^{k+1−i}.
#[derive(Clone, Debug)]
pub struct Filtration {
    /// terms[m] is A^{m+1}; ends at the first zero term or where it stabilizes.
    pub terms: Vec<Subspace>,
    pub nilpotency_index: Option<usize>,
}

impl Filtration {
    pub fn dims(&self) -> Vec<usize> {
        self.terms.iter().map(Subspace::dim).collect()
    }

    /// A^m for m ≥ 1.
    pub fn power(&self, m: usize) -> Subspace {
        let last = self.terms.last().expect("filtration has A¹");
        self.terms.get(m - 1).cloned().unwrap_or_else(|| last.clone())
    }
}

impl Algebra {
    pub fn zero(field: Field, dim: usize) -> Algebra {
        Algebra { field, dim, table: vec![Elem::zero(field); dim * dim * dim] }
    }

    /// Builds from 0-based (i, j, k, c) entries; repeated entries add up.
    pub fn from_entries(field: Field, dim: usize, entries: &[(usize, usize, usize, Elem)]) -> Result<Algebra, AlgebraError> {
        let mut a = Algebra::zero(field, dim);
        for (i, j, k, c) in entries {
            for &x in [i, j, k] {
                if x >= dim {
                    return Err(AlgebraError::IndexOutOfRange { index: x + 1, dim });
                }
            }
            let cur = a.c(*i, *j, *k).try_add(c)?;
            a.set(*i, *j, *k, cur);
        }
        Ok(a)
    }

    /// Convenience for tests and data: 1-based integer entries over a field.
    pub fn from_int_table(field: Field, dim: usize, entries: &[(usize, usize, usize, i64)]) -> Algebra {
        let e: Vec<_> = entries.iter().map(|&(i, j, k, c)| (i - 1, j - 1, k - 1, Elem::from_int(field, c))).collect();
        Algebra::from_entries(field, dim, &e).expect("valid table")
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &Elem {
        &self.table[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Elem) {
        let at = self.idx(i, j, k);
        self.table[at] = v;
    }

    /// Coordinates of e_i e_j.
    pub fn product_of_basis(&self, i: usize, j: usize) -> &[Elem] {
        let at = self.idx(i, j, 0);
        &self.table[at..at + self.dim]
    }

    pub fn multiply(&self, x: &[Elem], y: &[Elem]) -> Vec<Elem> {
        let n = self.dim;
        let mut out = vec![Elem::zero(self.field); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, c) in self.product_of_basis(i, j).iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = &out[k] + &(&xy * c);
                    }
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Elem> {
        unit_vec(self.field, self.dim, i)
    }

    /// Nonzero entries as 0-based (i, j, k, c), in ascending order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Elem)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        out.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        out
    }

    fn triple_left(&self, i: usize, j: usize, k: usize) -> Vec<Elem> {
        // (e_i e_j) e_k
        self.multiply(self.product_of_basis(i, j), &self.basis_vector(k))
    }

    fn triple_right(&self, i: usize, j: usize, k: usize) -> Vec<Elem> {
        // e_i (e_j e_k)
        self.multiply(&self.basis_vector(i), self.product_of_basis(j, k))
    }

    /// First basis triple violating (xy)z = (xz)y.
    pub fn right_commutativity_witness(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.triple_left(i, j, k) != self.triple_left(i, k, j) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// First basis triple violating (xy)z − x(yz) = (yx)z − y(xz).
    pub fn left_symmetry_witness(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = crate::linalg::sub_vec(&self.triple_left(i, j, k), &self.triple_right(i, j, k));
                    let rhs = crate::linalg::sub_vec(&self.triple_left(j, i, k), &self.triple_right(j, i, k));
                    if lhs != rhs {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_right_commutative(&self) -> bool {
        self.right_commutativity_witness().is_none()
    }

    pub fn is_left_symmetric(&self) -> bool {
        self.left_symmetry_witness().is_none()
    }

    pub fn is_novikov(&self) -> bool {
        self.is_right_commutative() && self.is_left_symmetric()
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| self.product_of_basis(i, j) == self.product_of_basis(j, i)))
    }

    pub fn is_associative(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.triple_left(i, j, k) == self.triple_right(i, j, k))))
    }

    /// Both bracketings of all triple products vanish.
    pub fn is_two_step(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| is_zero_vec(&self.triple_left(i, j, k)) && is_zero_vec(&self.triple_right(i, j, k))))
        })
    }

    /// span{x y : x ∈ S, y ∈ T}
    pub fn product_space(&self, s: &Subspace, t: &Subspace) -> Subspace {
        let mut vs = Vec::new();
        for x in s.basis_vectors() {
            for y in t.basis_vectors() {
                let p = self.multiply(&x, &y);
                if !is_zero_vec(&p) {
                    vs.push(p);
                }
            }
        }
        Subspace::from_vectors(self.field, self.dim, &vs)
    }

    pub fn square(&self) -> Subspace {
        let n = self.dim;
        let vs: Vec<Vec<Elem>> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.product_of_basis(i, j).to_vec())
            .collect();
        Subspace::from_vectors(self.field, n, &vs)
    }

    pub fn power_filtration(&self) -> Filtration {
        let full = Subspace::full(self.field, self.dim);
        let mut terms = vec![full];
        loop {
            let k = terms.len();
            if terms[k - 1].is_zero() {
                return Filtration { nilpotency_index: Some(k), terms };
            }
            let mut next = Subspace::zero(self.field, self.dim);
            for i in 1..=k {
                let p = self.product_space(&terms[i - 1], &terms[k - i]);
                next = next.sum(&p).expect("same ambient");
            }
            if next == terms[k - 1] {
                return Filtration { terms, nilpotency_index: None };
            }
            terms.push(next);
        }
    }

    pub fn nilpotency_index(&self) -> Option<usize> {
        self.power_filtration().nilpotency_index
    }

    /// {x : xA = 0}
    pub fn left_annihilator(&self) -> Subspace {
        let n = self.dim;
        let mut m = Matrix::zeros(self.field, n * n, n);
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    m.set(j * n + k, i, self.c(i, j, k).clone());
                }
            }
        }
        m.kernel()
    }

    /// {x : Ax = 0}
    pub fn right_annihilator(&self) -> Subspace {
        let n = self.dim;
        let mut m = Matrix::zeros(self.field, n * n, n);
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    m.set(j * n + k, i, self.c(j, i, k).clone());
                }
            }
        }
        m.kernel()
    }

    pub fn annihilator(&self) -> Subspace {
        self.left_annihilator().intersect(&self.right_annihilator()).expect("same ambient")
    }

    /// Split iff Ann(A) ⊄ A².
    pub fn is_split(&self) -> bool {
        !self.square().contains_subspace(&self.annihilator())
    }

    pub fn min_generators(&self) -> usize {
        self.dim - self.square().dim()
    }

    /// span{xy − yx}
    pub fn commutator_space(&self) -> Subspace {
        let n = self.dim;
        let mut vs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                vs.push(crate::linalg::sub_vec(self.product_of_basis(i, j), self.product_of_basis(j, i)));
            }
        }
        Subspace::from_vectors(self.field, n, &vs)
    }

    pub fn is_ideal(&self, ideal: &Subspace) -> bool {
        let full = Subspace::full(self.field, self.dim);
        ideal.contains_subspace(&self.product_space(&full, ideal)) && ideal.contains_subspace(&self.product_space(ideal, &full))
    }

    /// A/I on the coordinate complement of I.
    pub fn quotient(&self, ideal: &Subspace) -> Result<Algebra, AlgebraError> {
        if !self.is_ideal(ideal) {
            return Err(AlgebraError::NotAnIdeal);
        }
        let reps = ideal.coordinate_complement();
        let m = reps.len();
        // columns: ideal basis then representatives
        let mut cols = ideal.basis_vectors();
        cols.extend(reps.iter().map(|&r| self.basis_vector(r)));
        let basis = Matrix::from_columns(self.field, self.dim, &cols);
        let inv = basis.inverse()?;
        let offset = ideal.dim();
        let mut q = Algebra::zero(self.field, m);
        for (a, &ra) in reps.iter().enumerate() {
            for (b, &rb) in reps.iter().enumerate() {
                let coords = inv.mul_vec(self.product_of_basis(ra, rb));
                for c in 0..m {
                    q.set(a, b, c, coords[offset + c].clone());
                }
            }
        }
        Ok(q)
    }

    /// Same multiplication in the basis f_j = Σ_i P_ij e_i (columns of P).
    pub fn change_basis(&self, p: &Matrix) -> Result<Algebra, AlgebraError> {
        let n = self.dim;
        let inv = p.inverse().map_err(|_| AlgebraError::SingularMatrix)?;
        let cols: Vec<Vec<Elem>> = (0..n).map(|j| p.column(j)).collect();
        let mut out = Algebra::zero(self.field, n);
        for a in 0..n {
            for b in 0..n {
                let prod = self.multiply(&cols[a], &cols[b]);
                let coords = inv.mul_vec(&prod);
                for (c, v) in coords.into_iter().enumerate() {
                    out.set(a, b, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Reduction of a rational table modulo p.
    pub fn reduce_mod(&self, p: u64) -> Result<Algebra, AlgebraError> {
        let table = self.table.iter().map(|c| c.reduce_mod(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(Algebra { field: Field::Fp(p), dim: self.dim, table })
    }

    /// Embeds a rational table into a larger characteristic-zero field.
    pub fn embed(&self, field: Field) -> Result<Algebra, AlgebraError> {
        if field == self.field {
            return Ok(self.clone());
        }
        let table = self
            .table
            .iter()
            .map(|c| match c.to_rational() {
                Some(q) => Elem::from_rational(field, &q),
                None => Err(FieldError::NotRepresentable(c.to_string(), field)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Algebra { field, dim: self.dim, table })
    }

    /// Direct sum with a zero algebra of dimension extra.
    pub fn with_trivial_summand(&self, extra: usize) -> Algebra {
        let mut out = Algebra::zero(self.field, self.dim + extra);
        for (i, j, k, c) in self.entries() {
            out.set(i, j, k, c);
        }
        out
    }

    pub fn to_doc(&self) -> AlgebraDoc {
        AlgebraDoc {
            dim: self.dim,
            field: self.field.tag(),
            table: self
                .entries()
                .into_iter()
                .map(|(i, j, k, c)| TableEntry { i: i + 1, j: j + 1, k: k + 1, c: c.to_string() })
                .collect(),
        }
    }

    pub fn from_doc(doc: &AlgebraDoc) -> Result<Algebra, AlgebraError> {
        let field: Field = doc.field.parse()?;
        let mut entries = Vec::new();
        for e in &doc.table {
            for x in [e.i, e.j, e.k] {
                if x == 0 || x > doc.dim {
                    return Err(AlgebraError::IndexOutOfRange { index: x, dim: doc.dim });
                }
            }
            entries.push((e.i - 1, e.j - 1, e.k - 1, Elem::parse(&e.c, field)?));
        }
        Algebra::from_entries(field, doc.dim, &entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Algebra, AlgebraError> {
        let doc: AlgebraDoc = serde_json::from_str(text)?;
        Algebra::from_doc(&doc)
    }

    /// Human-readable products, e.g. "e1e1=e2, e1e2=-e3".
    pub fn describe(&self) -> String {
        let n = self.dim;
        let mut parts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.product_of_basis(i, j);
                if is_zero_vec(v) {
                    continue;
                }
                let mut rhs = String::new();
                for (k, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let term = if c.is_one() {
                        format!("e{}", k + 1)
                    } else if c.neg_ref().is_one() {
                        format!("-e{}", k + 1)
                    } else {
                        format!("({c})e{}", k + 1)
                    };
                    if !rhs.is_empty() && !term.starts_with('-') {
                        rhs.push('+');
                    }
                    rhs.push_str(&term);
                }
                parts.push(format!("e{}e{}={}", i + 1, j + 1, rhs));
            }
        }
        if parts.is_empty() {
            "zero product".to_string()
        } else {
            parts.join(", ")
        }
    }
}

/// Linear combination Σ c_i v_i of equal-length vectors.
pub fn combine(field: Field, n: usize, coeffs: &[Elem], vectors: &[Vec<Elem>]) -> Vec<Elem> {
    let mut out = vec![Elem::zero(field); n];
    for (c, v) in coeffs.iter().zip(vectors) {
        if !c.is_zero() {
            out = add_vec(&out, &scale_vec(c, v));
        }
    }
    out
}
