//! Second cohomology with trivial coefficients, in Δ_ij coordinates.
//!
//! A bilinear form θ on an n-dimensional algebra is stored as an n²-vector
//! with θ(e_i, e_j) at index i·n + j.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraDoc, AlgebraError};
use crate::field::{Elem, Field, FieldError};
use crate::linalg::{is_zero_vec, Matrix, Subspace};

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("algebra is not commutative")]
    NotCommutative,
    #[error("cocycle components are linearly dependent in H²")]
    DependentClasses,
    #[error("component {0} is not a cocycle")]
    NotACocycle(usize),
    #[error("component {component} has length {got}, expected {expected}")]
    BadShape { component: usize, got: usize, expected: usize },
    #[error("index out of range in cocycle entry (t={t}, i={i}, j={j})")]
    IndexOutOfRange { t: usize, i: usize, j: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error("malformed cocycle document: {0}")]
    Json(#[from] serde_json::Error),
}

/// θ = (θ_1, …, θ_s), each an n²-vector of Δ coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cocycle {
    field: Field,
    dim: usize,
    comps: Vec<Vec<Elem>>,
}

impl Cocycle {
    /// Validated against the base algebra.
    pub fn new(base: &Algebra, comps: Vec<Vec<Elem>>) -> Result<Cocycle, CohomologyError> {
        let c = Cocycle::unchecked(base.field(), base.dim(), comps)?;
        let z = cocycle_space(base);
        for (t, v) in c.comps.iter().enumerate() {
            if !z.contains(v) {
                return Err(CohomologyError::NotACocycle(t + 1));
            }
        }
        Ok(c)
    }

    /// Skips the cocycle equations; only shapes are checked. Used by negative tests.
    pub fn unchecked(field: Field, dim: usize, comps: Vec<Vec<Elem>>) -> Result<Cocycle, CohomologyError> {
        for (t, v) in comps.iter().enumerate() {
            if v.len() != dim * dim {
                return Err(CohomologyError::BadShape { component: t + 1, got: v.len(), expected: dim * dim });
            }
        }
        Ok(Cocycle { field, dim, comps })
    }

    pub fn zero(field: Field, dim: usize, s: usize) -> Cocycle {
        Cocycle { field, dim, comps: vec![vec![Elem::zero(field); dim * dim]; s] }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Vec<Elem>] {
        &self.comps
    }

    pub fn value(&self, t: usize, i: usize, j: usize) -> &Elem {
        &self.comps[t][i * self.dim + j]
    }

    /// Component t as an n×n matrix M with M_ij = θ_t(e_i, e_j).
    pub fn matrix(&self, t: usize) -> Matrix {
        let n = self.dim;
        let rows: Vec<Vec<Elem>> = (0..n).map(|i| self.comps[t][i * n..(i + 1) * n].to_vec()).collect();
        if n == 0 {
            Matrix::zeros(self.field, 0, 0)
        } else {
            Matrix::from_rows(self.field, &rows)
        }
    }

    pub fn from_matrices(mats: &[Matrix]) -> Cocycle {
        let field = mats[0].field();
        let n = mats[0].rows();
        let comps = mats
            .iter()
            .map(|m| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j).clone()).collect())
            .collect();
        Cocycle { field, dim: n, comps }
    }

    pub fn to_doc(&self, base: BaseRef) -> CocycleDoc {
        let n = self.dim;
        let mut entries = Vec::new();
        for (t, v) in self.comps.iter().enumerate() {
            for (idx, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    entries.push(CocycleEntry { t: t + 1, i: idx / n + 1, j: idx % n + 1, c: c.to_string() });
                }
            }
        }
        CocycleDoc { base, s: self.s(), entries }
    }

    /// Reads entries against a base of known field and dimension.
    pub fn from_doc(doc: &CocycleDoc, field: Field, dim: usize) -> Result<Cocycle, CohomologyError> {
        let mut c = Cocycle::zero(field, dim, doc.s);
        for e in &doc.entries {
            if e.t == 0 || e.t > doc.s || e.i == 0 || e.i > dim || e.j == 0 || e.j > dim {
                return Err(CohomologyError::IndexOutOfRange { t: e.t, i: e.i, j: e.j });
            }
            let at = (e.i - 1) * dim + (e.j - 1);
            let v = c.comps[e.t - 1][at].try_add(&Elem::parse(&e.c, field)?)?;
            c.comps[e.t - 1][at] = v;
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum BaseRef {
    Label(String),
    Inline(AlgebraDoc),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CocycleEntry {
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub c: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CocycleDoc {
    pub base: BaseRef,
    pub s: usize,
    pub entries: Vec<CocycleEntry>,
}

/// Δ_ij as an n²-vector (0-based indices).
pub fn delta(field: Field, n: usize, i: usize, j: usize) -> Vec<Elem> {
    let mut v = vec![Elem::zero(field); n * n];
    v[i * n + j] = Elem::one(field);
    v
}

/// The 2n³ linear conditions θ(xy,z) = θ(xz,y) and
/// θ(xy,z) − θ(x,yz) = θ(yx,z) − θ(y,xz) on basis triples.
pub fn cocycle_equations(a: &Algebra) -> Matrix {
    let n = a.dim();
    let f = a.field();
    let mut m = Matrix::zeros(f, 2 * n * n * n, n * n);
    let add = |m: &mut Matrix, row: usize, col: usize, v: &Elem, sign: bool| {
        if v.is_zero() {
            return;
        }
        let cur = if sign { m.get(row, col) + v } else { m.get(row, col) - v };
        m.set(row, col, cur);
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r1 = (i * n + j) * n + k;
                let r2 = n * n * n + r1;
                for l in 0..n {
                    add(&mut m, r1, l * n + k, a.c(i, j, l), true);
                    add(&mut m, r1, l * n + j, a.c(i, k, l), false);

                    add(&mut m, r2, l * n + k, a.c(i, j, l), true);
                    add(&mut m, r2, i * n + l, a.c(j, k, l), false);
                    add(&mut m, r2, l * n + k, a.c(j, i, l), false);
                    add(&mut m, r2, j * n + l, a.c(i, k, l), true);
                }
            }
        }
    }
    m
}

pub fn cocycle_space(a: &Algebra) -> Subspace {
    if a.dim() == 0 {
        return Subspace::zero(a.field(), 0);
    }
    cocycle_equations(a).kernel()
}

pub fn is_cocycle(a: &Algebra, theta: &[Elem]) -> bool {
    let eqs = cocycle_equations(a);
    is_zero_vec(&eqs.mul_vec(theta))
}

/// δf(e_i, e_j) = f(e_i e_j) for a linear form f given by its values on the basis.
pub fn coboundary(a: &Algebra, f: &[Elem]) -> Vec<Elem> {
    let n = a.dim();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(crate::linalg::dot(a.field(), a.product_of_basis(i, j), f));
        }
    }
    v
}

pub fn coboundary_space(a: &Algebra) -> Subspace {
    let n = a.dim();
    let vs: Vec<Vec<Elem>> = (0..n).map(|l| coboundary(a, &a.basis_vector(l))).collect();
    Subspace::from_vectors(a.field(), n * n, &vs)
}

/// Z², B² and a fixed set of H² representatives.
#[derive(Clone, Debug)]
pub struct H2 {
    pub z2: Subspace,
    pub b2: Subspace,
    pub reps: Vec<Vec<Elem>>,
    // [reps | B² basis] as columns, used to read off H² coordinates
    coords: Matrix,
}

impl H2 {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Coordinates of a cocycle's class in the representative basis.
    pub fn class_coordinates(&self, theta: &[Elem]) -> Option<Vec<Elem>> {
        if !self.z2.contains(theta) {
            return None;
        }
        let x = self.coords.solve(theta)?;
        Some(x[..self.reps.len()].to_vec())
    }

    /// Rank of a family of cocycles modulo B².
    pub fn class_rank(&self, thetas: &[Vec<Elem>]) -> usize {
        let mut all = self.b2.basis_vectors();
        all.extend(thetas.iter().cloned());
        let f = self.z2.field();
        Subspace::from_vectors(f, self.z2.ambient(), &all).dim() - self.b2.dim()
    }
}

pub fn h2_basis(a: &Algebra) -> H2 {
    let z2 = cocycle_space(a);
    let b2 = coboundary_space(a);
    let reps = z2.quotient_basis(&b2).expect("same ambient");
    let mut cols = reps.clone();
    cols.extend(b2.basis_vectors());
    let coords = Matrix::from_columns(a.field(), a.dim() * a.dim(), &cols);
    H2 { z2, b2, reps, coords }
}

/// dim (Z² ∩ Sym) / B² for commutative algebras.
pub fn h2_symmetric_dimension(a: &Algebra) -> Result<usize, CohomologyError> {
    if !a.is_commutative() {
        return Err(CohomologyError::NotCommutative);
    }
    let n = a.dim();
    let f = a.field();
    let mut sym = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut v = delta(f, n, i, j);
            if i != j {
                v[j * n + i] = Elem::one(f);
            }
            sym.push(v);
        }
    }
    let sym = Subspace::from_vectors(f, n * n, &sym);
    let z = cocycle_space(a).intersect(&sym)?;
    Ok(z.dim() - coboundary_space(a).dim())
}

/// Joint annihilator {x : θ_t(x, A) = θ_t(A, x) = 0 for all t}.
pub fn cocycle_annihilator(theta: &Cocycle) -> Subspace {
    let n = theta.dim();
    let f = theta.field();
    if theta.s() == 0 {
        return Subspace::full(f, n);
    }
    let mut rows = Vec::new();
    for t in 0..theta.s() {
        for j in 0..n {
            // Σ_i x_i θ(e_i, e_j) and Σ_i θ(e_j, e_i) x_i
            rows.push((0..n).map(|i| theta.value(t, i, j).clone()).collect::<Vec<_>>());
            rows.push((0..n).map(|i| theta.value(t, j, i).clone()).collect::<Vec<_>>());
        }
    }
    if n == 0 {
        return Subspace::zero(f, 0);
    }
    Matrix::from_rows(f, &rows).kernel()
}

/// θ spans an s-dimensional subspace of H² with Ann(θ) ∩ Ann(A) = 0.
pub fn in_ts(a: &Algebra, theta: &Cocycle) -> Result<bool, CohomologyError> {
    let h2 = h2_basis(a);
    if h2.class_rank(theta.components()) < theta.s() {
        return Err(CohomologyError::DependentClasses);
    }
    let cap = cocycle_annihilator(theta).intersect(&a.annihilator())?;
    Ok(cap.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, SeedableRng};

    const Q: Field = Field::Q;

    fn n01() -> Algebra {
        Algebra::from_int_table(Q, 4, &[(1, 1, 2, 1)])
    }

    fn d(n: usize, terms: &[(usize, usize, i64)]) -> Vec<Elem> {
        let mut v = vec![Elem::zero(Q); n * n];
        for &(i, j, c) in terms {
            v[(i - 1) * n + (j - 1)] = &v[(i - 1) * n + (j - 1)] + &Elem::from_int(Q, c);
        }
        v
    }

    /// Brute-force oracle: evaluates both cocycle identities on all triples.
    fn oracle_is_cocycle(a: &Algebra, theta: &[Elem]) -> bool {
        let n = a.dim();
        let th = |x: &[Elem], y: &[Elem]| {
            let mut acc = Elem::zero(a.field());
            for i in 0..n {
                for j in 0..n {
                    acc = &acc + &(&(&x[i] * &y[j]) * &theta[i * n + j]);
                }
            }
            acc
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (a.basis_vector(i), a.basis_vector(j), a.basis_vector(k));
                    let xy = a.multiply(&x, &y);
                    let xz = a.multiply(&x, &z);
                    let yz = a.multiply(&y, &z);
                    let yx = a.multiply(&y, &x);
                    if th(&xy, &z) != th(&xz, &y) {
                        return false;
                    }
                    let l = &th(&xy, &z) - &th(&x, &yz);
                    let r = &th(&yx, &z) - &th(&y, &xz);
                    if l != r {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn zero_algebra_cohomology() {
        let z = Algebra::zero(Q, 3);
        assert_eq!(cocycle_space(&z).dim(), 9);
        assert_eq!(coboundary_space(&z).dim(), 0);
        assert_eq!(h2_basis(&z).dim(), 9);
        assert_eq!(h2_symmetric_dimension(&Algebra::zero(Q, 2)).unwrap(), 3);
    }

    #[test]
    fn n01_dimensions() {
        let a = n01();
        assert_eq!(cocycle_space(&a).dim(), 11);
        assert_eq!(coboundary_space(&a).dim(), 1);
        assert_eq!(h2_basis(&a).dim(), 10);
        assert_eq!(h2_symmetric_dimension(&a).unwrap(), 6);
        let n02 = Algebra::from_int_table(Q, 4, &[(1, 1, 3, 1), (2, 2, 4, 1)]);
        assert_eq!(h2_symmetric_dimension(&n02).unwrap(), 3);
        let n12 = Algebra::from_int_table(Q, 4, &[(1, 2, 3, 1), (2, 1, 4, 1)]);
        assert!(matches!(h2_symmetric_dimension(&n12), Err(CohomologyError::NotCommutative)));
    }

    #[test]
    fn small_dimensions() {
        let n3_03 = Algebra::from_int_table(Q, 3, &[(1, 2, 3, 1), (2, 1, 3, -1)]);
        assert_eq!(cocycle_space(&n3_03).dim(), 4);
        let n4_01 = Algebra::from_int_table(Q, 4, &[(1, 1, 2, 1), (2, 1, 3, 1)]);
        assert_eq!(coboundary_space(&n4_01).dim(), 2);
        let n07 = Algebra::from_int_table(Q, 4, &[(1, 2, 3, 1), (2, 1, 4, 1), (2, 2, 3, -1)]);
        assert_eq!(h2_basis(&n07).dim(), 6);
    }

    #[test]
    fn equations_agree_with_oracle() {
        use rand::Rng;
        let mut rng = StdRng::seed_from_u64(7);
        let algebras = [
            n01(),
            Algebra::from_int_table(Q, 4, &[(1, 1, 2, 1), (2, 1, 3, 1)]),
            Algebra::from_int_table(Q, 3, &[(1, 1, 2, 1), (1, 2, 3, 1), (2, 1, 3, 2)]),
        ];
        for a in &algebras {
            let n = a.dim();
            let z = cocycle_space(a);
            for v in z.basis_vectors() {
                assert!(oracle_is_cocycle(a, &v));
            }
            for _ in 0..200 {
                let v: Vec<Elem> = (0..n * n)
                    .map(|_| if rng.gen_bool(0.8) { Elem::zero(Q) } else { Elem::random(Q, &mut rng) })
                    .collect();
                assert_eq!(z.contains(&v), oracle_is_cocycle(a, &v));
            }
        }
    }

    #[test]
    fn coboundaries_are_cocycles() {
        let mut rng = StdRng::seed_from_u64(11);
        let algebras = [
            n01(),
            Algebra::from_int_table(Q, 4, &[(1, 2, 3, 1), (2, 1, 4, 1), (2, 2, 3, -1)]),
            Algebra::from_int_table(Q, 4, &[(1, 2, 3, 1), (1, 3, 4, 1), (2, 2, 4, 1)]),
        ];
        for a in &algebras {
            let z = cocycle_space(a);
            for _ in 0..1000 {
                let f: Vec<Elem> = (0..a.dim()).map(|_| Elem::random(Q, &mut rng)).collect();
                assert!(z.contains(&coboundary(a, &f)));
            }
        }
    }

    #[test]
    fn annihilator_of_cocycles() {
        let z2 = Algebra::zero(Q, 2);
        let th = Cocycle::new(&z2, vec![d(2, &[(1, 1, 1)])]).unwrap();
        assert_eq!(cocycle_annihilator(&th), Subspace::from_vectors(Q, 2, &[z2.basis_vector(1)]));
        let zero = Cocycle::zero(Q, 2, 1);
        assert_eq!(cocycle_annihilator(&zero).dim(), 2);

        let a = n01();
        // N_01: ∇3+∇4+∇7 = Δ14+Δ41 + Δ33 + Δ21
        let th = Cocycle::new(&a, vec![d(4, &[(1, 4, 1), (4, 1, 1), (3, 3, 1), (2, 1, 1)])]).unwrap();
        assert!(cocycle_annihilator(&th).intersect(&a.annihilator()).unwrap().is_zero());
        assert!(in_ts(&a, &th).unwrap());
    }

    #[test]
    fn ts_membership() {
        let a = n01();
        // Δ21 leaves e3, e4 in the joint annihilator
        let th = Cocycle::new(&a, vec![d(4, &[(2, 1, 1)])]).unwrap();
        assert!(!in_ts(&a, &th).unwrap());
        let zero = Cocycle::zero(Q, 4, 1);
        assert!(matches!(in_ts(&a, &zero), Err(CohomologyError::DependentClasses)));
        let dep = Cocycle::new(&a, vec![d(4, &[(2, 1, 1)]), d(4, &[(2, 1, 2), (1, 1, 5)])]).unwrap();
        assert!(matches!(in_ts(&a, &dep), Err(CohomologyError::DependentClasses)));
        assert!(matches!(Cocycle::new(&a, vec![d(4, &[(2, 2, 1)])]), Err(CohomologyError::NotACocycle(1))));
    }

    #[test]
    fn class_coordinates_round_trip() {
        let a = n01();
        let h = h2_basis(&a);
        for (idx, r) in h.reps.iter().enumerate() {
            let c = h.class_coordinates(r).unwrap();
            for (k, x) in c.iter().enumerate() {
                assert_eq!(x.is_one(), k == idx);
            }
        }
        assert!(h.class_coordinates(&d(4, &[(2, 2, 1)])).is_none());
    }

    #[test]
    fn cocycle_json() {
        let a = n01();
        let th = Cocycle::new(&a, vec![d(4, &[(1, 4, 1), (4, 1, 1), (3, 3, 1), (2, 1, 1)])]).unwrap();
        let doc = th.to_doc(BaseRef::Label("frakN_01".into()));
        let text = serde_json::to_string(&doc).unwrap();
        let back: CocycleDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(Cocycle::from_doc(&back, Q, 4).unwrap(), th);
        let inline = th.to_doc(BaseRef::Inline(a.to_doc()));
        let text = serde_json::to_string(&inline).unwrap();
        let back: CocycleDoc = serde_json::from_str(&text).unwrap();
        assert!(matches!(back.base, BaseRef::Inline(_)));
    }
}
