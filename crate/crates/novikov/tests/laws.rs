//! Structural laws checked on catalog bases at random parameter values.

use std::sync::OnceLock;

use novikov::catalog::Catalog;
use novikov::cohomology::{coboundary_space, cocycle_space, h2_basis, in_ts, Cocycle};
use novikov::extensions::{central_extension, extension_annihilator_law, extension_is_novikov_iff, reconstruct};
use novikov::invariants::fingerprint;
use novikov::morphisms::{act_on_cocycle, enumerate_aut_fp, is_isomorphism, iso_search, IsoVerdict, SearchOptions};
use novikov::{Algebra, Elem, Field, Matrix};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn cat() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::load_default().unwrap())
}

fn random_base(rng: &mut StdRng, field: Field) -> (String, Algebra) {
    let bases: Vec<_> = cat().bases.values().collect();
    let b = bases[rng.gen_range(0..bases.len())];
    let env = b.random_args(field, &[], rng);
    (b.label.clone(), b.algebra(&env, field).unwrap())
}

fn random_invertible(rng: &mut StdRng, field: Field, n: usize) -> Matrix {
    loop {
        let rows: Vec<Vec<Elem>> = (0..n).map(|_| (0..n).map(|_| Elem::random(field, rng)).collect()).collect();
        let m = Matrix::from_rows(field, &rows);
        if m.is_invertible() {
            return m;
        }
    }
}

fn random_cocycle(rng: &mut StdRng, a: &Algebra, s: usize) -> Cocycle {
    let z = cocycle_space(a);
    let basis = z.basis_vectors();
    let f = a.field();
    let comps = (0..s)
        .map(|_| {
            let coeffs: Vec<Elem> = basis.iter().map(|_| Elem::random(f, rng)).collect();
            novikov::algebra::combine(f, a.dim() * a.dim(), &coeffs, &basis)
        })
        .collect();
    Cocycle::new(a, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn novikov_iff_cocycle(seed in any::<u64>(), s in 1usize..3, raw in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (_, a) = random_base(&mut rng, Field::Q);
        let theta = if raw {
            let n = a.dim();
            let comps = (0..s).map(|_| (0..n * n).map(|_| Elem::random(Field::Q, &mut rng)).collect()).collect();
            Cocycle::unchecked(Field::Q, n, comps).unwrap()
        } else {
            random_cocycle(&mut rng, &a, s)
        };
        let (nov, member) = extension_is_novikov_iff(&a, &theta).unwrap();
        prop_assert_eq!(nov, member);
        let (got, want) = extension_annihilator_law(&a, &theta).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn coboundaries_are_cocycles(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (label, a) = random_base(&mut rng, Field::Q);
        let z = cocycle_space(&a);
        for b in coboundary_space(&a).basis_vectors() {
            prop_assert!(z.contains(&b), "{}", label);
        }
    }

    #[test]
    fn basis_change_preserves_invariants(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (label, a) = random_base(&mut rng, Field::Q);
        let p = random_invertible(&mut rng, Field::Q, a.dim());
        let b = a.change_basis(&p).unwrap();
        prop_assert!(b.is_novikov());
        prop_assert_eq!(fingerprint(&a), fingerprint(&b), "{}", label);
        prop_assert_eq!(h2_basis(&a).dim(), h2_basis(&b).dim());
    }

    #[test]
    fn iso_search_recovers_basis_change_over_f5(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Fp(5);
        let (_, a) = random_base(&mut rng, f);
        let p = random_invertible(&mut rng, f, a.dim());
        let b = a.change_basis(&p).unwrap();
        match iso_search(&a, &b, &SearchOptions::default()).unwrap() {
            IsoVerdict::Isomorphic(w) => prop_assert!(is_isomorphism(&a, &b, &w)),
            v => prop_assert!(false, "{v:?}"),
        }
    }

    #[test]
    fn reconstruct_inverts_extension(seed in any::<u64>(), s in 1usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Fp(5);
        // Some bases have empty T_s, and dependent classes do not span an
        // s-dimensional subspace of H²: redraw until θ is a point of T_s.
        let (a, theta) = loop {
            let (_, a) = random_base(&mut rng, f);
            let theta = random_cocycle(&mut rng, &a, s);
            if matches!(in_ts(&a, &theta), Ok(true)) {
                break (a, theta);
            }
        };
        let ext = central_extension(&a, &theta).unwrap();
        let r = reconstruct(&ext).unwrap();
        prop_assert_eq!(r.base.dim(), a.dim());
        prop_assert_eq!(&central_extension(&r.base, &r.cocycle).unwrap(), &ext.change_basis(&r.basis).unwrap());
        prop_assert!(matches!(iso_search(&r.base, &a, &SearchOptions::default()).unwrap(), IsoVerdict::Isomorphic(_)));
    }
}

#[test]
fn automorphisms_preserve_cohomology() {
    let f = Field::Fp(3);
    let mut rng = StdRng::seed_from_u64(9);
    for label in ["N3s_01", "N3s_04_0", "N3s_02"] {
        let a = cat().base(label).unwrap().algebra(&Default::default(), f).unwrap();
        let h2 = h2_basis(&a);
        let auts = enumerate_aut_fp(&a, &SearchOptions::default()).unwrap();
        for phi in auts.iter().take(20) {
            let theta = random_cocycle(&mut rng, &a, 1);
            let moved = act_on_cocycle(&a, phi, &theta).unwrap();
            assert!(cocycle_space(&a).contains(&moved.components()[0]));
            for b in h2.b2.basis_vectors() {
                let c = Cocycle::unchecked(f, a.dim(), vec![b]).unwrap();
                let img = act_on_cocycle(&a, phi, &c).unwrap();
                assert!(h2.b2.contains(&img.components()[0]), "{label}");
            }
        }
    }
}
