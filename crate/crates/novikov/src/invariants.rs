//! Basis-independent fingerprints and pairwise separation of algebras.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::cohomology::{cocycle_space, h2_basis};
use crate::field::Field;
use crate::morphisms::{derivation_algebra, iso_search, IsoVerdict, MorphError, SearchOptions};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub filtration: Vec<usize>,
    pub ann: usize,
    pub left_ann: usize,
    pub right_ann: usize,
    pub square: usize,
    pub commutator: usize,
    pub min_generators: usize,
    pub der: usize,
    pub z2: usize,
    pub h2: usize,
    pub commutative: bool,
    pub associative: bool,
}

impl Fingerprint {
    /// Name of the first field in which the two fingerprints differ.
    pub fn first_difference(&self, other: &Fingerprint) -> Option<&'static str> {
        let checks: [(&'static str, bool); 13] = [
            ("dim", self.dim == other.dim),
            ("filtration", self.filtration == other.filtration),
            ("ann", self.ann == other.ann),
            ("left_ann", self.left_ann == other.left_ann),
            ("right_ann", self.right_ann == other.right_ann),
            ("square", self.square == other.square),
            ("commutator", self.commutator == other.commutator),
            ("min_generators", self.min_generators == other.min_generators),
            ("der", self.der == other.der),
            ("z2", self.z2 == other.z2),
            ("h2", self.h2 == other.h2),
            ("commutative", self.commutative == other.commutative),
            ("associative", self.associative == other.associative),
        ];
        checks.iter().find(|(_, same)| !same).map(|(name, _)| *name)
    }
}

pub fn fingerprint(a: &Algebra) -> Fingerprint {
    Fingerprint {
        dim: a.dim(),
        filtration: a.power_filtration().dims(),
        ann: a.annihilator().dim(),
        left_ann: a.left_annihilator().dim(),
        right_ann: a.right_annihilator().dim(),
        square: a.square().dim(),
        commutator: a.commutator_space().dim(),
        min_generators: a.min_generators(),
        der: derivation_algebra(a).dim(),
        z2: cocycle_space(a).dim(),
        h2: h2_basis(a).dim(),
        commutative: a.is_commutative(),
        associative: a.is_associative(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStatus {
    /// Fingerprints differ. Dimension counts survive field extension, so this
    /// separates the algebras over the algebraic closure as well.
    DistinctByFingerprint,
    /// Exhaustive search over F_p found no isomorphism. Only evidence for
    /// distinctness in characteristic zero.
    DistinctOverFp,
    /// Witness found and re-verified.
    ProvenIsomorphic,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairReport {
    pub left: String,
    pub right: String,
    pub status: PairStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationReport {
    pub field: String,
    /// labels grouped by equal fingerprint, in input order
    pub groups: Vec<Vec<String>>,
    pub pairs: Vec<PairReport>,
    /// connected components of the proven-isomorphic relation
    pub classes: Vec<Vec<String>>,
}

impl SeparationReport {
    pub fn status(&self, a: &str, b: &str) -> Option<&PairStatus> {
        self.pairs
            .iter()
            .find(|p| (p.left == a && p.right == b) || (p.left == b && p.right == a))
            .map(|p| &p.status)
    }
}

/// Groups by fingerprint, then runs the isomorphism search inside each group.
pub fn separate(items: &[(String, Algebra)], field: Field, opts: &SearchOptions) -> SeparationReport {
    let prints: Vec<Fingerprint> = items.par_iter().map(|(_, a)| fingerprint(a)).collect();
    let mut by_print: BTreeMap<&Fingerprint, Vec<usize>> = BTreeMap::new();
    for (i, fp) in prints.iter().enumerate() {
        by_print.entry(fp).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = by_print.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let mut pairs_idx = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            pairs_idx.push((i, j));
        }
    }
    let pairs: Vec<PairReport> = pairs_idx
        .par_iter()
        .map(|&(i, j)| {
            let (status, detail) = if let Some(d) = prints[i].first_difference(&prints[j]) {
                (PairStatus::DistinctByFingerprint, format!("differ in {d}"))
            } else {
                match iso_search(&items[i].1, &items[j].1, opts) {
                    Ok(IsoVerdict::Isomorphic(_)) => (PairStatus::ProvenIsomorphic, "witness verified".to_string()),
                    Ok(IsoVerdict::NotIsomorphic(r)) if field.is_finite() => (PairStatus::DistinctOverFp, r),
                    Ok(IsoVerdict::NotIsomorphic(r)) => (PairStatus::DistinctByFingerprint, r),
                    Ok(IsoVerdict::NotFoundWithinHeight(h)) => (PairStatus::Undecided, format!("no witness of height <= {h}")),
                    Err(MorphError::BudgetExceeded(b)) => (PairStatus::Undecided, format!("budget {b} exceeded")),
                    Err(e) => (PairStatus::Undecided, e.to_string()),
                }
            };
            PairReport { left: items[i].0.clone(), right: items[j].0.clone(), status, detail }
        })
        .collect();

    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for (&(i, j), p) in pairs_idx.iter().zip(&pairs) {
        if p.status == PairStatus::ProvenIsomorphic {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut classes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..items.len() {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(items[i].0.clone());
    }
    SeparationReport {
        field: field.tag(),
        groups: groups.into_iter().map(|g| g.into_iter().map(|i| items[i].0.clone()).collect()).collect(),
        pairs,
        classes: classes.into_values().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Elem;
    use crate::linalg::Matrix;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, SeedableRng};

    #[test]
    fn zero_algebra() {
        let fp = fingerprint(&Algebra::zero(Field::Q, 5));
        assert_eq!(fp.filtration, vec![5, 0]);
        assert_eq!(fp.ann, 5);
        assert_eq!(fp.der, 25);
    }

    #[test]
    fn frak_n12_vs_n13() {
        let q = Field::Q;
        let a = Algebra::from_int_table(q, 4, &[(1, 2, 3, 1), (2, 1, 4, 1)]);
        let b = Algebra::from_int_table(q, 4, &[(1, 1, 4, 1), (1, 2, 3, 1), (2, 1, 3, -1), (2, 2, 3, 2), (2, 2, 4, 1)]);
        assert!(fingerprint(&a).first_difference(&fingerprint(&b)).is_some());
    }

    #[test]
    fn separation_vocabulary() {
        let f = Field::Fp(3);
        let a = Algebra::from_int_table(f, 3, &[(1, 1, 2, 1)]);
        let b = a.change_basis(&Matrix::from_rows(f, &[
            vec![Elem::from_int(f, 1), Elem::from_int(f, 1), Elem::zero(f)],
            vec![Elem::zero(f), Elem::from_int(f, 1), Elem::zero(f)],
            vec![Elem::zero(f), Elem::from_int(f, 2), Elem::from_int(f, 1)],
        ])).unwrap();
        let c = Algebra::from_int_table(f, 3, &[(1, 2, 3, 1), (2, 1, 3, -1)]);
        let items = vec![("a".to_string(), a), ("b".to_string(), b), ("c".to_string(), c)];
        let rep = separate(&items, f, &SearchOptions::default());
        assert_eq!(rep.status("a", "b"), Some(&PairStatus::ProvenIsomorphic));
        assert_eq!(rep.status("a", "c"), Some(&PairStatus::DistinctByFingerprint));
        assert_eq!(rep.classes.len(), 2);
        let single = separate(&items[..1], f, &SearchOptions::default());
        assert_eq!(single.classes, vec![vec!["a".to_string()]]);
        assert!(single.pairs.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn invariant_under_basis_change(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let q = Field::Q;
            let a = Algebra::from_int_table(q, 4, &[(1, 1, 2, 1), (2, 1, 3, 1), (1, 3, 4, 1), (3, 1, 4, 1), (2, 2, 4, 1)]);
            let p = loop {
                let rows: Vec<Vec<Elem>> = (0..4).map(|_| (0..4).map(|_| Elem::random(q, &mut rng)).collect()).collect();
                let m = Matrix::from_rows(q, &rows);
                if m.is_invertible() { break m; }
            };
            prop_assert_eq!(fingerprint(&a), fingerprint(&a.change_basis(&p).unwrap()));
        }
    }
}
