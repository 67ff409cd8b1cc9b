//! Dense exact linear algebra: row reduction, kernels and subspaces.

use std::fmt;

use thiserror::Error;

use crate::field::{Elem, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, data: vec![Elem::zero(field); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Elem::one(field));
        }
        m
    }

    pub fn from_rows(field: Field, rows: &[Vec<Elem>]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r.iter().cloned());
        }
        Matrix { field, rows: rows.len(), cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, n: usize, cols: &[Vec<Elem>]) -> Matrix {
        let mut m = Matrix::zeros(field, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Elem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = &out.data[i * other.cols + j] + &(a * b);
                    out.data[i * other.cols + j] = cur;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|r| dot(self.field, self.row(r), v))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Elem::is_zero)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let sub = &f * self.get(r, j);
                    let v = self.get(i, j) - &sub;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Null space {x : Mx = 0}.
    pub fn kernel(&self) -> Subspace {
        let (red, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Elem::zero(self.field); self.cols];
            v[free] = Elem::one(self.field);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = red.get(r, free).neg_ref();
            }
            basis.push(v);
        }
        Subspace::from_vectors(self.field, self.cols, &basis)
    }

    /// Column space.
    pub fn image(&self) -> Subspace {
        Subspace::from_vectors(self.field, self.rows, &self.transpose().row_vectors())
    }

    /// Some solution of Mx = b, plus a basis of the homogeneous solutions.
    pub fn solve_affine(&self, b: &[Elem]) -> Option<(Vec<Elem>, Vec<Vec<Elem>>)> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Elem::zero(self.field); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        let mut kernel = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Elem::zero(self.field); self.cols];
            v[free] = Elem::one(self.field);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = aug.get(r, free).neg_ref();
            }
            kernel.push(v);
        }
        Some((x, kernel))
    }

    pub fn solve(&self, b: &[Elem]) -> Option<Vec<Elem>> {
        self.solve_affine(b).map(|(x, _)| x)
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, Elem::one(self.field));
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        let mut inv = Matrix::zeros(self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, aug.get(r, n + c).clone());
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

pub fn dot(field: Field, a: &[Elem], b: &[Elem]) -> Elem {
    let mut acc = Elem::zero(field);
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = &acc + &(x * y);
    }
    acc
}

pub fn add_vec(a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Elem, a: &[Elem]) -> Vec<Elem> {
    a.iter().map(|x| c * x).collect()
}

pub fn unit_vec(field: Field, n: usize, i: usize) -> Vec<Elem> {
    let mut v = vec![Elem::zero(field); n];
    v[i] = Elem::one(field);
    v
}

pub fn is_zero_vec(a: &[Elem]) -> bool {
    a.iter().all(Elem::is_zero)
}

/// A subspace of F^n stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace { ambient, basis: Matrix::zeros(field, 0, ambient), pivots: Vec::new() }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace { ambient, basis: Matrix::identity(field, ambient), pivots: (0..ambient).collect() }
    }

    pub fn from_vectors(field: Field, ambient: usize, vectors: &[Vec<Elem>]) -> Subspace {
        if vectors.is_empty() {
            return Subspace::zero(field, ambient);
        }
        let (red, pivots) = Matrix::from_rows(field, vectors).rref();
        let rank = pivots.len();
        let rows: Vec<Vec<Elem>> = (0..rank).map(|r| red.row(r).to_vec()).collect();
        let basis = if rows.is_empty() { Matrix::zeros(field, 0, ambient) } else { Matrix::from_rows(field, &rows) };
        Subspace { ambient, basis, pivots }
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<Elem>> {
        self.basis.row_vectors()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn same_ambient(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient == other.ambient {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch { expected: self.ambient, got: other.ambient })
        }
    }

    /// Canonical remainder of v modulo this subspace (pivot coordinates cleared).
    pub fn reduce(&self, v: &[Elem]) -> Vec<Elem> {
        let mut out = v.to_vec();
        for (r, &pc) in self.pivots.iter().enumerate() {
            let f = out[pc].clone();
            if f.is_zero() {
                continue;
            }
            for (j, b) in self.basis.row(r).iter().enumerate() {
                if !b.is_zero() {
                    out[j] = &out[j] - &(&f * b);
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length");
        is_zero_vec(&self.reduce(v))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_vectors().iter().all(|v| self.contains(v))
    }

    /// Coordinates of a member with respect to the RREF basis.
    pub fn coordinates(&self, v: &[Elem]) -> Option<Vec<Elem>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&pc| v[pc].clone()).collect())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.same_ambient(other)?;
        let mut vs = self.basis_vectors();
        vs.extend(other.basis_vectors());
        Ok(Subspace::from_vectors(self.field(), self.ambient, &vs))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.same_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.field(), self.ambient));
        }
        let f = self.field();
        let (a, b) = (self.basis_vectors(), other.basis_vectors());
        let mut cols: Vec<Vec<Elem>> = a.clone();
        cols.extend(b.iter().map(|v| v.iter().map(|x| x.neg_ref()).collect()));
        let ker = Matrix::from_columns(f, self.ambient, &cols).kernel();
        let vs: Vec<Vec<Elem>> = ker
            .basis_vectors()
            .iter()
            .map(|coef| {
                let mut v = vec![Elem::zero(f); self.ambient];
                for (c, s) in coef.iter().zip(&a) {
                    if !c.is_zero() {
                        v = add_vec(&v, &scale_vec(c, s));
                    }
                }
                v
            })
            .collect();
        Ok(Subspace::from_vectors(f, self.ambient, &vs))
    }

    /// Vectors of `self` completing `sub` to a basis of `self`, chosen greedily
    /// among the RREF rows of `self`. Requires sub ⊆ self.
    pub fn quotient_basis(&self, sub: &Subspace) -> Result<Vec<Vec<Elem>>, LinalgError> {
        self.same_ambient(sub)?;
        let mut acc = sub.clone();
        let mut reps = Vec::new();
        for v in self.basis_vectors() {
            if !acc.contains(&v) {
                acc = acc.sum(&Subspace::from_vectors(self.field(), self.ambient, &[v.clone()]))?;
                reps.push(v);
            }
        }
        Ok(reps)
    }

    /// Indices i such that the unit vectors e_i, picked greedily in increasing
    /// order, complete this subspace to the whole space.
    pub fn coordinate_complement(&self) -> Vec<usize> {
        let f = self.field();
        let mut acc = self.clone();
        let mut picked = Vec::new();
        for i in 0..self.ambient {
            if acc.dim() == self.ambient {
                break;
            }
            let e = unit_vec(f, self.ambient, i);
            if !acc.contains(&e) {
                acc = acc.sum(&Subspace::from_vectors(f, self.ambient, &[e])).unwrap();
                picked.push(i);
            }
        }
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn qm(rows: &[&[i64]]) -> Matrix {
        let rows: Vec<Vec<Elem>> = rows.iter().map(|r| r.iter().map(|&x| Elem::from_int(Field::Q, x)).collect()).collect();
        Matrix::from_rows(Field::Q, &rows)
    }

    fn random_matrix(f: Field, r: usize, c: usize, rng: &mut StdRng) -> Matrix {
        if r == 0 {
            return Matrix::zeros(f, 0, c);
        }
        let rows: Vec<Vec<Elem>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| if rng.gen_bool(0.4) { Elem::zero(f) } else { Elem::random(f, rng) })
                    .collect()
            })
            .collect();
        Matrix::from_rows(f, &rows)
    }

    #[test]
    fn rref_examples() {
        let id = Matrix::identity(Field::Q, 3);
        assert_eq!(id.rref().0, id);
        let (r, p) = qm(&[&[1, 2], &[2, 4]]).rref();
        assert_eq!(r, qm(&[&[1, 2], &[0, 0]]));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn rank_two_over_f2() {
        // [[1,1],[1,2]] reduced mod 2 is [[1,1],[1,0]], determinant 1
        let f = Field::Fp(2);
        let m = Matrix::from_rows(f, &[vec![Elem::from_int(f, 1), Elem::from_int(f, 1)], vec![Elem::from_int(f, 1), Elem::from_int(f, 2)]]);
        assert_eq!(m.get(1, 1), &Elem::zero(f));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::zeros(Field::Q, 2, 3).kernel().dim(), 3);
        assert_eq!(Matrix::identity(Field::Q, 3).kernel().dim(), 0);
        let k = qm(&[&[1, 1, 0]]).kernel();
        assert_eq!(k.dim(), 2);
        assert!(k.contains(&qm(&[&[1, -1, 0]]).row(0).to_vec()));
    }

    #[test]
    fn subspace_examples() {
        let f = Field::Q;
        let e = |i| unit_vec(f, 3, i);
        let s = Subspace::from_vectors(f, 3, &[add_vec(&e(0), &e(1))]);
        assert_eq!(s.intersect(&s).unwrap(), s);
        let a = Subspace::from_vectors(f, 3, &[e(0)]);
        let b = Subspace::from_vectors(f, 3, &[e(1)]);
        let ab = Subspace::from_vectors(f, 3, &[e(0), e(1)]);
        assert_eq!(a.sum(&b).unwrap(), ab);
        assert_eq!(s.intersect(&ab).unwrap(), s);
        assert!(a.sum(&Subspace::zero(f, 2)).is_err());
        let reps = ab.quotient_basis(&s).unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(s.coordinate_complement(), vec![0, 2]);
    }

    #[test]
    fn inverse_and_solve() {
        let m = qm(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(Field::Q, 2));
        assert_eq!(qm(&[&[1, 2], &[2, 4]]).inverse(), Err(LinalgError::Singular));
        let b = vec![Elem::from_int(Field::Q, 3), Elem::from_int(Field::Q, 2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        assert!(qm(&[&[1, 2], &[2, 4]]).solve(&[Elem::one(Field::Q), Elem::zero(Field::Q)]).is_none());
    }

    const FIELDS: [Field; 3] = [Field::Q, Field::Fp(3), Field::Qi];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn dimension_formula(seed in any::<u64>(), fi in 0usize..3, n in 1usize..6) {
            let f = FIELDS[fi];
            let mut rng = StdRng::seed_from_u64(seed);
            let s = random_matrix(f, rng.gen_range(0..=n), n, &mut rng).image_of_rows();
            let t = random_matrix(f, rng.gen_range(0..=n), n, &mut rng).image_of_rows();
            let sum = s.sum(&t).unwrap();
            let cap = s.intersect(&t).unwrap();
            prop_assert_eq!(s.dim() + t.dim(), sum.dim() + cap.dim());
            prop_assert!(s.contains_subspace(&cap) && t.contains_subspace(&cap));
        }

        #[test]
        fn rank_nullity(seed in any::<u64>(), fi in 0usize..3, r in 1usize..6, c in 1usize..6) {
            let f = FIELDS[fi];
            let mut rng = StdRng::seed_from_u64(seed);
            let m = random_matrix(f, r, c, &mut rng);
            let k = m.kernel();
            prop_assert_eq!(m.rank() + k.dim(), c);
            prop_assert_eq!(m.image().dim(), m.rank());
            for v in k.basis_vectors() {
                prop_assert!(is_zero_vec(&m.mul_vec(&v)));
            }
        }

        #[test]
        fn rref_canonical(seed in any::<u64>(), fi in 0usize..3, r in 1usize..5, c in 1usize..6) {
            let f = FIELDS[fi];
            let mut rng = StdRng::seed_from_u64(seed);
            let m = random_matrix(f, r, c, &mut rng);
            let p = loop {
                let p = random_matrix(f, r, r, &mut rng);
                if p.is_invertible() { break p; }
            };
            prop_assert_eq!(p.mul(&m).unwrap().rref().0, m.rref().0);
        }
    }

    impl Matrix {
        fn image_of_rows(&self) -> Subspace {
            Subspace::from_vectors(self.field(), self.cols(), &self.row_vectors())
        }
    }
}
