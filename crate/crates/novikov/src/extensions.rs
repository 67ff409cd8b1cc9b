//! Central extensions A_θ = A ⊕ V and their inverse construction.

use thiserror::Error;

use crate::algebra::Algebra;
use crate::cohomology::{cocycle_annihilator, cocycle_space, Cocycle};
use crate::field::Elem;
use crate::linalg::{Matrix, Subspace};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("algebra has zero annihilator")]
    ZeroAnnihilator,
    #[error("cocycle lives on a {got}-dimensional algebra, base has dimension {expected}")]
    BaseMismatch { expected: usize, got: usize },
}

/// e_i e_j = (product in A) + Σ_t θ_t(e_i, e_j) e_{n+t}.
pub fn central_extension(a: &Algebra, theta: &Cocycle) -> Result<Algebra, ExtensionError> {
    if theta.dim() != a.dim() {
        return Err(ExtensionError::BaseMismatch { expected: a.dim(), got: theta.dim() });
    }
    let n = a.dim();
    let mut out = a.with_trivial_summand(theta.s());
    for t in 0..theta.s() {
        for i in 0..n {
            for j in 0..n {
                let v = theta.value(t, i, j);
                if !v.is_zero() {
                    out.set(i, j, n + t, v.clone());
                }
            }
        }
    }
    Ok(out)
}

/// (is A_θ Novikov, is θ in Z²); the two must agree.
pub fn extension_is_novikov_iff(a: &Algebra, theta: &Cocycle) -> Result<(bool, bool), ExtensionError> {
    let ext = central_extension(a, theta)?;
    let z = cocycle_space(a);
    let member = theta.components().iter().all(|c| z.contains(c));
    Ok((ext.is_novikov(), member))
}

/// (computed Ann(A_θ), embedded (Ann(θ) ∩ Ann(A)) ⊕ V).
pub fn extension_annihilator_law(a: &Algebra, theta: &Cocycle) -> Result<(Subspace, Subspace), ExtensionError> {
    let ext = central_extension(a, theta)?;
    let n = a.dim();
    let s = theta.s();
    let f = a.field();
    let cap = cocycle_annihilator(theta).intersect(&a.annihilator()).expect("same ambient");
    let mut vs: Vec<Vec<Elem>> = cap
        .basis_vectors()
        .into_iter()
        .map(|mut v| {
            v.extend(std::iter::repeat(Elem::zero(f)).take(s));
            v
        })
        .collect();
    for t in 0..s {
        vs.push(ext.basis_vector(n + t));
    }
    Ok((ext.annihilator(), Subspace::from_vectors(f, n + s, &vs)))
}

/// Output of [`reconstruct`].
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub base: Algebra,
    pub cocycle: Cocycle,
    /// Columns: the complement basis, then the annihilator basis. In this basis
    /// the input algebra equals central_extension(base, cocycle).
    pub basis: Matrix,
}

/// Splits off Ann(A): A′ lives on the lexicographically-first coordinate
/// complement of Ann(A) and θ(x, y) is the Ann-component of xy.
pub fn reconstruct(a: &Algebra) -> Result<Reconstruction, ExtensionError> {
    let ann = a.annihilator();
    if ann.is_zero() {
        return Err(ExtensionError::ZeroAnnihilator);
    }
    let f = a.field();
    let n = a.dim();
    let comp = ann.coordinate_complement();
    let m = comp.len();
    let s = ann.dim();
    let mut cols: Vec<Vec<Elem>> = comp.iter().map(|&i| a.basis_vector(i)).collect();
    cols.extend(ann.basis_vectors());
    let basis = Matrix::from_columns(f, n, &cols);
    let moved = a.change_basis(&basis).expect("complement plus annihilator is a basis");
    let mut base = Algebra::zero(f, m);
    let mut comps = vec![vec![Elem::zero(f); m * m]; s];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                base.set(i, j, k, moved.c(i, j, k).clone());
            }
            for (t, comp) in comps.iter_mut().enumerate() {
                comp[i * m + j] = moved.c(i, j, m + t).clone();
            }
        }
    }
    let cocycle = Cocycle::unchecked(f, m, comps).expect("shapes match");
    Ok(Reconstruction { base, cocycle, basis })
}
