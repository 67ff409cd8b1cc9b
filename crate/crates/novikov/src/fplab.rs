//! The central-extension procedure run exhaustively over a small prime
//! field, and a bidirectional comparison with specialized catalog data.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{combine, Algebra, AlgebraDoc};
use crate::catalog::{Catalog, CatalogError, EntryReport};
use crate::cohomology::{cocycle_annihilator, h2_basis, Cocycle};
use crate::expr::{Branch, Env};
use crate::extensions::central_extension;
use crate::field::{Elem, Field};
use crate::invariants::{fingerprint, Fingerprint};
use crate::linalg::Subspace;
use crate::morphisms::{act_unchecked, enumerate_aut_fp, iso_search, IsoVerdict, MorphError, SearchOptions};

#[derive(Debug, Error)]
pub enum FplabError {
    #[error("the procedure needs a prime field, got {0}")]
    NotFinite(Field),
    #[error("s = {s} exceeds dim H² = {h2}")]
    TooLarge { s: usize, h2: usize },
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

fn elements(p: u64) -> Vec<Elem> {
    (0..p as i64).map(|i| Elem::from_int(Field::Fp(p), i)).collect()
}

/// Every s-dimensional subspace of F_p^k exactly once, each in reduced
/// row echelon form.
pub fn grassmannian_points(p: u64, k: usize, s: usize) -> Vec<Subspace> {
    let f = Field::Fp(p);
    let mut out = Vec::new();
    if s > k {
        return out;
    }
    let els = elements(p);
    let mut pivots: Vec<usize> = (0..s).collect();
    loop {
        // free slots: (row, col) with col > pivot of row and col not a pivot
        let free: Vec<(usize, usize)> = (0..s)
            .flat_map(|r| ((pivots[r] + 1)..k).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
            .collect();
        let mut counter = vec![0usize; free.len()];
        loop {
            let mut rows = vec![vec![Elem::zero(f); k]; s];
            for (r, &c) in pivots.iter().enumerate() {
                rows[r][c] = Elem::one(f);
            }
            for (slot, &(r, c)) in free.iter().enumerate() {
                rows[r][c] = els[counter[slot]].clone();
            }
            out.push(Subspace::from_vectors(f, k, &rows));
            let mut i = 0;
            while i < counter.len() {
                counter[i] += 1;
                if counter[i] < els.len() {
                    break;
                }
                counter[i] = 0;
                i += 1;
            }
            if i == counter.len() {
                break;
            }
        }
        // next combination of pivot columns
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < k - s + i {
                pivots[i] += 1;
                for j in i + 1..s {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
        if s == 0 {
            return out;
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitClass {
    /// Canonical point of G_s(H²) in representative coordinates.
    pub point: Subspace,
    pub orbit_size: usize,
    pub cocycle: Cocycle,
    pub algebra: Algebra,
}

#[derive(Clone, Debug)]
pub struct ProcedureResult {
    pub field: Field,
    pub s: usize,
    pub h2_dim: usize,
    pub points: usize,
    pub ts_points: usize,
    pub aut_order: usize,
    pub classes: Vec<OrbitClass>,
    /// Orbit representatives dropped because an earlier class was isomorphic.
    pub merged: usize,
}

fn cocycle_of(f: Field, n: usize, reps: &[Vec<Elem>], point: &Subspace) -> Cocycle {
    let comps = point.basis_vectors().iter().map(|c| combine(f, n * n, c, reps)).collect();
    Cocycle::unchecked(f, n, comps).expect("n² components")
}

/// Aut(A)-orbits on T_s(A), one extension per orbit, deduplicated by
/// exhaustive isomorphism search.
pub fn run_procedure_fp(a: &Algebra, s: usize, opts: &SearchOptions) -> Result<ProcedureResult, FplabError> {
    let f = a.field();
    let Field::Fp(p) = f else { return Err(FplabError::NotFinite(f)) };
    let n = a.dim();
    let h2 = h2_basis(a);
    let k = h2.dim();
    if s > k {
        return Err(FplabError::TooLarge { s, h2: k });
    }
    let ann = a.annihilator();
    let all = grassmannian_points(p, k, s);
    let points = all.len();
    let ts: Vec<Subspace> = all
        .into_par_iter()
        .filter(|pt| {
            let theta = cocycle_of(f, n, &h2.reps, pt);
            cocycle_annihilator(&theta).intersect(&ann).expect("same ambient").is_zero()
        })
        .collect();
    let index: HashMap<&Subspace, usize> = ts.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let aut = enumerate_aut_fp(a, opts)?;

    let images: Vec<Vec<usize>> = ts
        .par_iter()
        .map(|pt| {
            let theta = cocycle_of(f, n, &h2.reps, pt);
            aut.iter()
                .map(|phi| {
                    let moved = act_unchecked(phi, &theta);
                    let coords: Vec<Vec<Elem>> = moved
                        .components()
                        .iter()
                        .map(|c| h2.class_coordinates(c).expect("image of a cocycle is a cocycle"))
                        .collect();
                    let img = Subspace::from_vectors(f, k, &coords);
                    *index.get(&img).expect("Aut preserves T_s")
                })
                .collect()
        })
        .collect();

    let mut parent: Vec<usize> = (0..ts.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for (i, imgs) in images.iter().enumerate() {
        for &j in imgs {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut orbits: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..ts.len() {
        let r = find(&mut parent, i);
        *orbits.entry(r).or_default() += 1;
    }

    let candidates: Vec<OrbitClass> = orbits
        .iter()
        .map(|(&r, &size)| {
            let cocycle = cocycle_of(f, n, &h2.reps, &ts[r]);
            let algebra = central_extension(a, &cocycle).expect("matching dimension");
            OrbitClass { point: ts[r].clone(), orbit_size: size, cocycle, algebra }
        })
        .collect();

    let prints: Vec<Fingerprint> = candidates.par_iter().map(|c| fingerprint(&c.algebra)).collect();
    let mut classes: Vec<OrbitClass> = Vec::new();
    let mut kept_prints: Vec<&Fingerprint> = Vec::new();
    let mut merged = 0;
    for (c, fp) in candidates.into_iter().zip(&prints) {
        let mut dup = false;
        for (other, ofp) in classes.iter().zip(&kept_prints) {
            if *ofp == fp && matches!(iso_search(&c.algebra, &other.algebra, opts)?, IsoVerdict::Isomorphic(_)) {
                dup = true;
                break;
            }
        }
        if dup {
            merged += 1;
        } else {
            classes.push(c);
            kept_prints.push(fp);
        }
    }
    Ok(ProcedureResult { field: f, s, h2_dim: k, points, ts_points: ts.len(), aut_order: aut.len(), classes, merged })
}

/// A catalog algebra specialized to F_p.
#[derive(Clone, Debug)]
pub struct Specialization {
    pub name: String,
    pub algebra: Algebra,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Skip {
    pub name: String,
    pub reason: String,
}

fn assignments(params: &[String], p: u64) -> Vec<Env> {
    let els = elements(p);
    let mut out = vec![Env::new()];
    for name in params {
        out = out
            .into_iter()
            .flat_map(|env| {
                els.iter().map(move |v| {
                    let mut e = env.clone();
                    e.insert(name.clone(), v.clone());
                    e
                })
            })
            .collect();
    }
    out
}

fn env_name(label: &str, env: &Env, branch: Branch) -> String {
    let vals: Vec<String> = env.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let b = if branch == Branch::Flipped { " (other root)" } else { "" };
    if vals.is_empty() {
        format!("{label}{b}")
    } else {
        format!("{label}[{}]{b}", vals.join(","))
    }
}

/// Which pipeline classes the catalog is expected to cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// Four-dimensional outputs: the two four-dimensional tables cover every
    /// algebra that is not one-generated.
    NotOneGenerated,
    /// Five-dimensional outputs: the membership predicates of the theorem.
    Theorem,
}

impl Scope {
    pub fn for_base(a: &Algebra) -> Scope {
        if a.dim() + 1 <= 4 {
            Scope::NotOneGenerated
        } else {
            Scope::Theorem
        }
    }

    fn admits(&self, class: &OrbitClass, base: &Algebra) -> bool {
        let a = &class.algebra;
        match self {
            Scope::NotOneGenerated => a.min_generators() >= 2,
            Scope::Theorem => {
                let g = crate::catalog::Generated { base: base.clone(), cocycle: class.cocycle.clone(), algebra: a.clone() };
                let dummy = crate::catalog::EntryRecord {
                    label: String::new(),
                    params: vec![],
                    constraints: vec![],
                    base: String::new(),
                    base_args: BTreeMap::new(),
                    cocycle: vec![],
                    samples: vec![],
                    source: String::new(),
                    note: None,
                    printed_cocycle: None,
                };
                EntryReport::build(&dummy, &Env::new(), a.field(), &g).failed_predicates().is_empty()
            }
        }
    }
}

/// Extensions of `base` recorded in the catalog, specialized to F_p.
///
/// For a three-dimensional base these are the four-dimensional base records
/// at all parameter values, kept when Ann is one-dimensional inside A² and
/// A/Ann ≅ base. For a four-dimensional base they are the catalog entries
/// built on it.
pub fn catalog_specializations(
    cat: &Catalog,
    base_label: &str,
    base: &Algebra,
    p: u64,
    s: usize,
    opts: &SearchOptions,
) -> Result<(Vec<Specialization>, Vec<Skip>), FplabError> {
    let f = Field::Fp(p);
    let mut specs = Vec::new();
    let mut skips = Vec::new();
    let branches = |has_sqrt: bool| if has_sqrt { vec![Branch::Principal, Branch::Flipped] } else { vec![Branch::Principal] };
    if base.dim() == 3 && s == 1 {
        for b in cat.bases.values().filter(|b| b.dim == 4) {
            let has_sqrt = b.table.iter().any(|t| t.c.contains("sqrt"));
            for env in assignments(&b.params, p) {
                for &br in &branches(has_sqrt) {
                    let name = env_name(&b.label, &env, br);
                    let alg = match b.check_args(&env, f).and_then(|_| b.algebra(&env, f)) {
                        Ok(a) => a,
                        Err(e) => {
                            skips.push(Skip { name, reason: e.to_string() });
                            continue;
                        }
                    };
                    let ann = alg.annihilator();
                    if ann.dim() != 1 || !alg.square().contains_subspace(&ann) {
                        continue;
                    }
                    let q = alg.quotient(&ann).expect("Ann is an ideal");
                    if matches!(iso_search(&q, base, opts)?, IsoVerdict::Isomorphic(_)) {
                        specs.push(Specialization { name, algebra: alg });
                    }
                }
            }
        }
        return Ok((specs, skips));
    }
    for e in cat.entries.iter().filter(|e| e.base == base_label && e.cocycle.len() == s) {
        for env in assignments(&e.params, p) {
            for &br in &branches(e.has_radicals()) {
                let name = env_name(&e.label, &env, br);
                match cat.generate_branch(e, &env, f, br) {
                    Ok(g) => match crate::cohomology::in_ts(&g.base, &g.cocycle) {
                        Ok(true) => specs.push(Specialization { name, algebra: g.algebra }),
                        Ok(false) => skips.push(Skip { name, reason: "degenerates mod p: Ann(θ) meets Ann(A)".into() }),
                        Err(e) => skips.push(Skip { name, reason: format!("degenerates mod p: {e}") }),
                    },
                    Err(err) => skips.push(Skip { name, reason: err.to_string() }),
                }
            }
        }
    }
    Ok((specs, skips))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassMatch {
    pub index: usize,
    pub table: String,
    pub algebra: AlgebraDoc,
    pub orbit_size: usize,
    pub in_scope: bool,
    pub matches: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossReport {
    pub base: String,
    pub p: u64,
    pub s: usize,
    pub scope: Scope,
    pub h2_dim: usize,
    pub points: usize,
    pub ts_points: usize,
    pub aut_order: usize,
    pub classes: Vec<ClassMatch>,
    /// specialization name → index of the matching class
    pub specializations: BTreeMap<String, Option<usize>>,
    pub skipped: Vec<Skip>,
}

impl CrossReport {
    /// In-scope classes with no catalog match.
    pub fn unmatched_classes(&self) -> Vec<usize> {
        self.classes.iter().filter(|c| c.in_scope && c.matches.is_empty()).map(|c| c.index).collect()
    }

    /// Specializations that match no class.
    pub fn unmatched_specializations(&self) -> Vec<&str> {
        self.specializations.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k.as_str()).collect()
    }

    pub fn ok(&self) -> bool {
        self.unmatched_classes().is_empty() && self.unmatched_specializations().is_empty()
    }
}

/// Runs the procedure on a catalog base at the given parameter values over
/// F_p and matches its classes against catalog specializations.
pub fn crosscheck(
    cat: &Catalog,
    base_label: &str,
    args: &Env,
    p: u64,
    s: usize,
    opts: &SearchOptions,
) -> Result<CrossReport, FplabError> {
    let f = Field::Fp(p);
    let record = cat.base(base_label)?;
    let base = record.algebra(args, f)?;
    let res = run_procedure_fp(&base, s, opts)?;
    let scope = Scope::for_base(&base);
    let (specs, skipped) = catalog_specializations(cat, base_label, &base, p, s, opts)?;

    let class_prints: Vec<Fingerprint> = res.classes.iter().map(|c| fingerprint(&c.algebra)).collect();
    let found: Vec<Result<Option<usize>, MorphError>> = specs
        .par_iter()
        .map(|sp| {
            let fp = fingerprint(&sp.algebra);
            for (i, c) in res.classes.iter().enumerate() {
                if class_prints[i] == fp {
                    if let IsoVerdict::Isomorphic(_) = iso_search(&sp.algebra, &c.algebra, opts)? {
                        return Ok(Some(i));
                    }
                }
            }
            Ok(None)
        })
        .collect();
    let mut specializations = BTreeMap::new();
    let mut classes: Vec<ClassMatch> = res
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| ClassMatch {
            index: i,
            table: c.algebra.describe(),
            algebra: c.algebra.to_doc(),
            orbit_size: c.orbit_size,
            in_scope: scope.admits(c, &base),
            matches: Vec::new(),
        })
        .collect();
    for (sp, hit) in specs.iter().zip(found) {
        let hit = hit?;
        if let Some(i) = hit {
            classes[i].matches.push(sp.name.clone());
        }
        specializations.insert(sp.name.clone(), hit);
    }
    let label = if args.is_empty() {
        base_label.to_string()
    } else {
        env_name(base_label, args, Branch::Principal)
    };
    Ok(CrossReport {
        base: label,
        p,
        s,
        scope,
        h2_dim: res.h2_dim,
        points: res.points,
        ts_points: res.ts_points,
        aut_order: res.aut_order,
        classes,
        specializations,
        skipped,
    })
}
