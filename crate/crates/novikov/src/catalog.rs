//! Base algebras, orbit representatives and the generated five-dimensional
//! algebras built from them.
//!
//! Data lives in JSON files (`bases/`, `entries/`, `notes.json`) under the
//! directory named by `NOVIKOV_DATA`, or the crate's bundled `data/`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraDoc, AlgebraError};
use crate::cohomology::{coboundary_space, cocycle_space, in_ts, Cocycle, CohomologyError};
use crate::expr::{env_from_strings, Branch, Constraint, Env, Expr, ExprError};
use crate::extensions::{central_extension, ExtensionError};
use crate::field::{Elem, Field};
use crate::linalg::Matrix;
use crate::morphisms::{act_unchecked, homomorphism_witness, is_isomorphism, iso_search, IsoVerdict, SearchOptions};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("unknown base algebra {0:?}")]
    UnknownBase(String),
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
    #[error("{label}: constraint {constraint:?} violated")]
    ConstraintViolated { label: String, constraint: String },
    #[error("{label}: no value for parameter {name:?}")]
    MissingParameter { label: String, name: String },
    #[error("{label}: nabla {nabla} out of range (base has {count})")]
    NablaOutOfRange { label: String, nabla: usize, count: usize },
    #[error("{label}: index {index} out of range for dimension {dim}")]
    IndexOutOfRange { label: String, index: usize, dim: usize },
    #[error("{context}: {source}")]
    Expr { context: String, source: ExprError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

fn expr_err(context: impl Into<String>) -> impl FnOnce(ExprError) -> CatalogError {
    let context = context.into();
    move |source| CatalogError::Expr { context, source }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct TableTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}

/// One Δ_ij term of a bilinear form, 1-based.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FormTerm {
    pub i: usize,
    pub j: usize,
    pub c: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Erratum {
    pub row: usize,
    pub col: usize,
    pub printed: String,
    pub corrected: String,
    pub reason: String,
}

/// An automorphism shape: column j is the image of e_j.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AutShape {
    pub vars: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    pub conditions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erratum: Option<Erratum>,
}

impl AutShape {
    /// The matrix with the erratum applied, if any.
    pub fn corrected(&self) -> Vec<Vec<String>> {
        let mut m = self.matrix.clone();
        if let Some(e) = &self.erratum {
            m[e.row - 1][e.col - 1] = e.corrected.clone();
        }
        m
    }
}

/// Transformation rule for the nabla coordinates under one Aut shape.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AlphaStar {
    pub shape: usize,
    pub formulas: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct BaseRecord {
    pub label: String,
    pub display: String,
    pub dim: usize,
    pub params: Vec<String>,
    pub constraints: Vec<String>,
    pub table: Vec<TableTerm>,
    /// The generator list as printed, duplicates included.
    pub h2: Vec<Vec<FormTerm>>,
    /// The numbering the orbit representatives refer to.
    pub nablas: Vec<Vec<FormTerm>>,
    pub aut: Vec<AutShape>,
    pub alpha_star: Option<AlphaStar>,
    pub source: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct NablaTerm {
    pub nabla: usize,
    pub c: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct EntryRecord {
    pub label: String,
    pub params: Vec<String>,
    pub constraints: Vec<String>,
    pub base: String,
    pub base_args: BTreeMap<String, String>,
    pub cocycle: Vec<Vec<NablaTerm>>,
    pub samples: Vec<BTreeMap<String, String>>,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_cocycle: Option<Vec<Vec<NablaTerm>>>,
}

impl EntryRecord {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn has_radicals(&self) -> bool {
        self.cocycle.iter().flatten().any(|t| t.c.contains("sqrt"))
    }
}

/// A label with parameter values, as used in the notes file.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub label: String,
    pub args: BTreeMap<String, String>,
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.label)
        } else {
            let vals: Vec<&str> = self.args.values().map(String::as_str).collect();
            write!(f, "{}^{{{}}}", self.label, vals.join(","))
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct NotedIsomorphism {
    pub left: Instance,
    pub right: Instance,
    #[serde(default)]
    pub acceptance: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Exceptional {
    pub entry: Instance,
    /// Name of the predicate expected to fail.
    pub fails: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub also: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub name: Instance,
    pub base: String,
    pub cocycle: Vec<Vec<NablaTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct UnlabeledOrbit {
    pub base: String,
    pub cocycle: Vec<Vec<NablaTerm>>,
    pub remark: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CensusClaim {
    pub total: usize,
    pub by_arity: Vec<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Notes {
    pub isomorphisms: Vec<NotedIsomorphism>,
    pub exceptional: Vec<Exceptional>,
    pub realizations: Vec<Realization>,
    pub unlabeled_orbits: Vec<UnlabeledOrbit>,
    pub census_claim: CensusClaim,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq, Default)]
pub struct Census {
    pub total: usize,
    pub by_arity: BTreeMap<usize, usize>,
}

impl Census {
    /// Counts as a dense vector indexed by arity, padded to `len`.
    pub fn dense(&self, len: usize) -> Vec<usize> {
        let top = self.by_arity.keys().next_back().map_or(0, |k| k + 1).max(len);
        (0..top).map(|k| self.by_arity.get(&k).copied().unwrap_or(0)).collect()
    }
}

pub fn census<'a>(entries: impl IntoIterator<Item = &'a EntryRecord>) -> Census {
    let mut c = Census::default();
    for e in entries {
        c.total += 1;
        *c.by_arity.entry(e.arity()).or_default() += 1;
    }
    c
}

/// Accepts "N_16", "N16" or "16".
pub fn normalize_label(label: &str) -> String {
    let digits = label.trim_start_matches(|c: char| !c.is_ascii_digit());
    match digits.parse::<usize>() {
        Ok(n) if label.starts_with('N') || label.chars().all(|c| c.is_ascii_digit()) => format!("N_{n:02}"),
        _ => label.to_string(),
    }
}

pub fn default_data_dir() -> PathBuf {
    match std::env::var_os("NOVIKOV_DATA") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CatalogError> {
    let text = fs::read_to_string(path).map_err(|source| CatalogError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CatalogError::Json { path: path.to_path_buf(), source })
}

fn read_dir<T: serde::de::DeserializeOwned>(dir: &Path) -> Result<Vec<T>, CatalogError> {
    let it = fs::read_dir(dir).map_err(|source| CatalogError::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = it
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}

fn check_constraints(label: &str, constraints: &[String], env: &Env, field: Field) -> Result<(), CatalogError> {
    for c in constraints {
        let parsed = Constraint::parse(c).map_err(expr_err(format!("{label}: constraint {c:?}")))?;
        if !parsed.holds(env, field) {
            return Err(CatalogError::ConstraintViolated { label: label.to_string(), constraint: c.clone() });
        }
    }
    Ok(())
}

fn eval(text: &str, env: &Env, field: Field, branch: Branch, context: &str) -> Result<Elem, CatalogError> {
    let e = Expr::parse(text).map_err(expr_err(context))?;
    e.eval_branch(env, field, branch).map_err(expr_err(format!("{context}: {text:?}")))
}

impl BaseRecord {
    pub fn check_args(&self, env: &Env, field: Field) -> Result<(), CatalogError> {
        for p in &self.params {
            if !env.contains_key(p) {
                return Err(CatalogError::MissingParameter { label: self.label.clone(), name: p.clone() });
            }
        }
        check_constraints(&self.label, &self.constraints, env, field)
    }

    /// The algebra at the given parameter values, constraints checked.
    pub fn algebra(&self, env: &Env, field: Field) -> Result<Algebra, CatalogError> {
        self.check_args(env, field)?;
        self.algebra_unchecked(env, field)
    }

    pub fn algebra_unchecked(&self, env: &Env, field: Field) -> Result<Algebra, CatalogError> {
        let mut entries = Vec::new();
        for t in &self.table {
            for x in [t.i, t.j, t.k] {
                if x == 0 || x > self.dim {
                    return Err(CatalogError::IndexOutOfRange { label: self.label.clone(), index: x, dim: self.dim });
                }
            }
            let c = eval(&t.c, env, field, Branch::Principal, &self.label)?;
            entries.push((t.i - 1, t.j - 1, t.k - 1, c));
        }
        Ok(Algebra::from_entries(field, self.dim, &entries)?)
    }

    fn forms(&self, list: &[Vec<FormTerm>], env: &Env, field: Field) -> Result<Vec<Vec<Elem>>, CatalogError> {
        let n = self.dim;
        list.iter()
            .map(|terms| {
                let mut v = vec![Elem::zero(field); n * n];
                for t in terms {
                    if t.i == 0 || t.i > n || t.j == 0 || t.j > n {
                        let index = t.i.max(t.j);
                        return Err(CatalogError::IndexOutOfRange { label: self.label.clone(), index, dim: n });
                    }
                    let at = (t.i - 1) * n + (t.j - 1);
                    let c = eval(&t.c, env, field, Branch::Principal, &self.label)?;
                    v[at] = v[at].try_add(&c).map_err(|e| expr_err(self.label.clone())(e.into()))?;
                }
                Ok(v)
            })
            .collect()
    }

    /// The printed generator list as Δ-coordinate vectors.
    pub fn printed_h2_vectors(&self, env: &Env, field: Field) -> Result<Vec<Vec<Elem>>, CatalogError> {
        self.forms(&self.h2, env, field)
    }

    pub fn nabla_vectors(&self, env: &Env, field: Field) -> Result<Vec<Vec<Elem>>, CatalogError> {
        self.forms(&self.nablas, env, field)
    }

    /// Random values satisfying the base constraints and `extra`.
    pub fn random_args<R: Rng + ?Sized>(&self, field: Field, extra: &[String], rng: &mut R) -> Env {
        let all: Vec<String> = self.constraints.iter().chain(extra).cloned().collect();
        loop {
            let env: Env = self.params.iter().map(|p| (p.clone(), Elem::random(field, rng))).collect();
            if check_constraints(&self.label, &all, &env, field).is_ok() {
                return env;
            }
        }
    }
}

/// A generated algebra together with the data it was built from.
#[derive(Clone, Debug)]
pub struct Generated {
    pub base: Algebra,
    pub cocycle: Cocycle,
    pub algebra: Algebra,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub bases: BTreeMap<String, BaseRecord>,
    pub entries: Vec<EntryRecord>,
    pub notes: Notes,
}

impl Catalog {
    pub fn load(dir: &Path) -> Result<Catalog, CatalogError> {
        let bases: Vec<BaseRecord> = read_dir(&dir.join("bases"))?;
        let mut entries: Vec<EntryRecord> = read_dir(&dir.join("entries"))?;
        entries.sort_by_key(|e| e.label.trim_start_matches("N_").parse::<usize>().unwrap_or(usize::MAX));
        let notes = read_json(&dir.join("notes.json"))?;
        Ok(Catalog { bases: bases.into_iter().map(|b| (b.label.clone(), b)).collect(), entries, notes })
    }

    pub fn load_default() -> Result<Catalog, CatalogError> {
        Catalog::load(&default_data_dir())
    }

    pub fn base(&self, label: &str) -> Result<&BaseRecord, CatalogError> {
        self.bases.get(label).ok_or_else(|| CatalogError::UnknownBase(label.to_string()))
    }

    pub fn entry(&self, label: &str) -> Result<&EntryRecord, CatalogError> {
        let want = normalize_label(label);
        self.entries.iter().find(|e| e.label == want).ok_or_else(|| CatalogError::UnknownEntry(label.to_string()))
    }

    pub fn census(&self) -> Census {
        census(&self.entries)
    }

    /// Parameter values of the base algebra, computed from the entry's.
    pub fn base_env(&self, entry: &EntryRecord, env: &Env, field: Field) -> Result<Env, CatalogError> {
        entry
            .base_args
            .iter()
            .map(|(k, v)| Ok((k.clone(), eval(v, env, field, Branch::Principal, &entry.label)?)))
            .collect()
    }

    /// θ = Σ c ∇ per component over the base's nabla numbering.
    pub fn cocycle_vectors(
        &self,
        base: &BaseRecord,
        terms: &[Vec<NablaTerm>],
        label: &str,
        env: &Env,
        base_env: &Env,
        field: Field,
        branch: Branch,
    ) -> Result<Vec<Vec<Elem>>, CatalogError> {
        let nablas = base.nabla_vectors(base_env, field)?;
        let n = base.dim;
        let mut out = Vec::new();
        for comp in terms {
            let mut v = vec![Elem::zero(field); n * n];
            for t in comp {
                if t.nabla == 0 || t.nabla > nablas.len() {
                    return Err(CatalogError::NablaOutOfRange {
                        label: label.to_string(),
                        nabla: t.nabla,
                        count: nablas.len(),
                    });
                }
                let c = eval(&t.c, env, field, branch, label)?;
                v = crate::linalg::add_vec(&v, &crate::linalg::scale_vec(&c, &nablas[t.nabla - 1]));
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Samples of an entry as environments over `field`.
    pub fn samples(&self, entry: &EntryRecord, field: Field) -> Result<Vec<Env>, CatalogError> {
        entry.samples.iter().map(|s| env_from_strings(s, field).map_err(expr_err(entry.label.clone()))).collect()
    }

    /// Checks entry and base constraints, builds θ and A_θ.
    pub fn generate(&self, entry: &EntryRecord, env: &Env, field: Field) -> Result<Generated, CatalogError> {
        self.generate_branch(entry, env, field, Branch::Principal)
    }

    pub fn generate_branch(
        &self,
        entry: &EntryRecord,
        env: &Env,
        field: Field,
        branch: Branch,
    ) -> Result<Generated, CatalogError> {
        for p in &entry.params {
            if !env.contains_key(p) {
                return Err(CatalogError::MissingParameter { label: entry.label.clone(), name: p.clone() });
            }
        }
        check_constraints(&entry.label, &entry.constraints, env, field)?;
        let base = self.base(&entry.base)?;
        let benv = self.base_env(entry, env, field)?;
        let a = base.algebra(&benv, field)?;
        let comps = self.cocycle_vectors(base, &entry.cocycle, &entry.label, env, &benv, field, branch)?;
        let cocycle = Cocycle::new(&a, comps)?;
        let algebra = central_extension(&a, &cocycle)?;
        Ok(Generated { base: a, cocycle, algebra })
    }

    /// Skips every constraint and the cocycle check. Used for the noted
    /// specializations that sit outside an entry's stated parameter range.
    pub fn generate_unchecked(&self, entry: &EntryRecord, env: &Env, field: Field) -> Result<Generated, CatalogError> {
        let base = self.base(&entry.base)?;
        let benv = self.base_env(entry, env, field)?;
        let a = base.algebra_unchecked(&benv, field)?;
        let comps = self.cocycle_vectors(base, &entry.cocycle, &entry.label, env, &benv, field, Branch::Principal)?;
        let cocycle = Cocycle::unchecked(field, a.dim(), comps)?;
        let algebra = central_extension(&a, &cocycle)?;
        Ok(Generated { base: a, cocycle, algebra })
    }

    pub fn generate_instance(&self, inst: &Instance, field: Field, checked: bool) -> Result<Generated, CatalogError> {
        let entry = self.entry(&inst.label)?;
        let env = env_from_strings(&inst.args, field).map_err(expr_err(inst.to_string()))?;
        if checked {
            self.generate(entry, &env, field)
        } else {
            self.generate_unchecked(entry, &env, field)
        }
    }

    /// Builds an algebra from an explicit (parameter-free) cocycle on a base.
    pub fn generate_from_terms(
        &self,
        base_label: &str,
        terms: &[Vec<NablaTerm>],
        field: Field,
    ) -> Result<Generated, CatalogError> {
        let base = self.base(base_label)?;
        let a = base.algebra(&Env::new(), field)?;
        let comps = self.cocycle_vectors(base, terms, base_label, &Env::new(), &Env::new(), field, Branch::Principal)?;
        let cocycle = Cocycle::new(&a, comps)?;
        let algebra = central_extension(&a, &cocycle)?;
        Ok(Generated { base: a, cocycle, algebra })
    }

    pub fn verify_entry(&self, entry: &EntryRecord, env: &Env, field: Field) -> Result<EntryReport, CatalogError> {
        let g = self.generate(entry, env, field)?;
        Ok(EntryReport::build(entry, env, field, &g))
    }
}

/// Names of the membership predicates, in report order.
pub const PREDICATES: [&str; 6] = ["novikov", "nilpotency", "non-2-step", "non-split", "generators", "non-commutative"];

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct EntryReport {
    pub label: String,
    pub field: String,
    pub sample: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

fn fmt_vec(v: &[Elem]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl EntryReport {
    pub fn build(entry: &EntryRecord, env: &Env, field: Field, g: &Generated) -> EntryReport {
        let a = &g.algebra;
        let s = g.cocycle.s();
        let mut checks = Vec::new();
        let mut push = |name: &str, passed: bool, detail: String| {
            checks.push(Check { name: name.to_string(), passed, detail });
        };

        let rc = a.right_commutativity_witness();
        let ls = a.left_symmetry_witness();
        let detail = match (rc, ls) {
            (None, None) => "both identities hold".to_string(),
            (Some((i, j, k)), _) => format!("(e{}e{})e{} != (e{}e{})e{}", i + 1, j + 1, k + 1, i + 1, k + 1, j + 1),
            (None, Some((i, j, k))) => format!("left symmetry fails at (e{}, e{}, e{})", i + 1, j + 1, k + 1),
        };
        push("novikov", rc.is_none() && ls.is_none(), detail);

        let filt = a.power_filtration();
        let idx = filt.nilpotency_index;
        push(
            "nilpotency",
            matches!(idx, Some(4) | Some(5)),
            format!("index {idx:?}, filtration {:?}", filt.dims()),
        );

        let two_step = a.is_two_step();
        push("non-2-step", !two_step, if two_step { "all triple products vanish".into() } else { "A^3 != 0".into() });

        let ann = a.annihilator();
        let sq = a.square();
        let outside = ann.basis_vectors().into_iter().find(|v| !sq.contains(v));
        let ok = ann.dim() == s && outside.is_none();
        let detail = match &outside {
            Some(v) => format!("dim Ann = {}, {} in Ann but not in A^2", ann.dim(), fmt_vec(v)),
            None => format!("dim Ann = {} (extension rank {s}), Ann inside A^2", ann.dim()),
        };
        push("non-split", ok, detail);

        let gens = a.min_generators();
        push("generators", gens >= 2, format!("{gens} generators"));

        let comm = a.is_commutative();
        let detail = if comm {
            format!("commutative{}", if a.is_associative() { " and associative" } else { "" })
        } else {
            format!("dim [A,A] = {}", a.commutator_space().dim())
        };
        push("non-commutative", !comm, detail);

        let ts = in_ts(&g.base, &g.cocycle);
        let (ok, detail) = match ts {
            Ok(true) => (true, "classes independent, Ann(theta) meets Ann(A) trivially".to_string()),
            Ok(false) => (false, "Ann(theta) meets Ann(A)".to_string()),
            Err(e) => (false, e.to_string()),
        };
        push("in-ts", ok, detail);

        EntryReport {
            label: entry.label.clone(),
            field: field.tag(),
            sample: env.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Failed checks among the six membership predicates.
    pub fn failed_predicates(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed && PREDICATES.contains(&c.name.as_str())).map(|c| c.name.as_str()).collect()
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn shape_matrix(
    base: &BaseRecord,
    m: &[Vec<String>],
    env: &Env,
    field: Field,
) -> Result<Matrix, CatalogError> {
    let rows = m
        .iter()
        .map(|r| r.iter().map(|c| eval(c, env, field, Branch::Principal, &base.label)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(field, &rows))
}

/// Results of checking one printed Aut shape at random points.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AutShapeReport {
    pub base: String,
    pub shape: usize,
    pub trials: usize,
    pub invertible: usize,
    /// Trials where the instantiated shape is not a homomorphism.
    pub failures: Vec<String>,
    /// Perturbations at a structural zero that were still homomorphisms.
    pub off_shape_trials: usize,
    pub off_shape_passes: usize,
    /// (printed entry ever fails, corrected entry always passes)
    pub erratum: Option<(bool, bool)>,
}

impl AutShapeReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.erratum.is_none_or(|(p, c)| p && c)
    }
}

pub fn verify_aut_shapes<R: Rng + ?Sized>(
    base: &BaseRecord,
    field: Field,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<AutShapeReport>, CatalogError> {
    let mut out = Vec::new();
    for (si, shape) in base.aut.iter().enumerate() {
        let corrected = shape.corrected();
        let mut rep = AutShapeReport {
            base: base.label.clone(),
            shape: si,
            trials,
            invertible: 0,
            failures: Vec::new(),
            off_shape_trials: 0,
            off_shape_passes: 0,
            erratum: shape.erratum.as_ref().map(|_| (false, true)),
        };
        let zeros: Vec<(usize, usize)> = (0..base.dim)
            .flat_map(|r| (0..base.dim).map(move |c| (r, c)))
            .filter(|&(r, c)| corrected[r][c].trim() == "0")
            .collect();
        for _ in 0..trials {
            let mut env = base.random_args(field, &shape.conditions, rng);
            for v in &shape.vars {
                env.insert(v.clone(), Elem::random(field, rng));
            }
            let a = base.algebra(&env, field)?;
            let phi = shape_matrix(base, &corrected, &env, field)?;
            if phi.is_invertible() {
                rep.invertible += 1;
            }
            let w = homomorphism_witness(&a, &a, &phi).expect("square shape");
            if let Some((i, j)) = w {
                rep.failures.push(format!("{:?}: phi(e{}e{}) != phi(e{})phi(e{})", env, i + 1, j + 1, i + 1, j + 1));
            }
            if let Some((p, _)) = rep.erratum.as_mut() {
                let printed = shape_matrix(base, &shape.matrix, &env, field)?;
                if homomorphism_witness(&a, &a, &printed).expect("square shape").is_some() {
                    *p = true;
                }
            }
            if !zeros.is_empty() && w.is_none() && phi.is_invertible() {
                let (r, c) = zeros[rng.gen_range(0..zeros.len())];
                let mut bumped = phi.clone();
                let delta = loop {
                    let d = Elem::random(field, rng);
                    if !d.is_zero() {
                        break d;
                    }
                };
                bumped.set(r, c, bumped.get(r, c).try_add(&delta).expect("same field"));
                rep.off_shape_trials += 1;
                if homomorphism_witness(&a, &a, &bumped).expect("square shape").is_none() {
                    rep.off_shape_passes += 1;
                }
            }
        }
        if let Some((_, c)) = rep.erratum.as_mut() {
            *c = rep.failures.is_empty();
        }
        out.push(rep);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AlphaStarReport {
    pub base: String,
    pub trials: usize,
    pub mismatches: Vec<String>,
}

/// Compares φᵀθφ, written in the nabla basis modulo B², with the printed
/// transformation formulas at random invertible shape points.
pub fn verify_alpha_star<R: Rng + ?Sized>(
    base: &BaseRecord,
    field: Field,
    trials: usize,
    rng: &mut R,
) -> Result<Option<AlphaStarReport>, CatalogError> {
    let Some(star) = &base.alpha_star else { return Ok(None) };
    let shape = &base.aut[star.shape];
    let matrix = shape.corrected();
    let mut rep = AlphaStarReport { base: base.label.clone(), trials, mismatches: Vec::new() };
    let mut done = 0;
    while done < trials {
        let mut env = base.random_args(field, &shape.conditions, rng);
        for v in &shape.vars {
            env.insert(v.clone(), Elem::random(field, rng));
        }
        let phi = shape_matrix(base, &matrix, &env, field)?;
        if !phi.is_invertible() {
            continue;
        }
        done += 1;
        let a = base.algebra(&env, field)?;
        let nablas = base.nabla_vectors(&env, field)?;
        let n2 = base.dim * base.dim;
        let coeffs: Vec<Elem> = (0..nablas.len()).map(|_| Elem::random(field, rng)).collect();
        let theta = crate::algebra::combine(field, n2, &coeffs, &nablas);
        let image = act_unchecked(&phi, &Cocycle::unchecked(field, base.dim, vec![theta])?);
        let mut cols = nablas.clone();
        cols.extend(coboundary_space(&a).basis_vectors());
        let solved = Matrix::from_columns(field, n2, &cols).solve(&image.components()[0]);
        let Some(x) = solved else {
            rep.mismatches.push(format!("{env:?}: image not in span of nablas + B2"));
            continue;
        };
        for (i, c) in coeffs.iter().enumerate() {
            env.insert(format!("a{}", i + 1), c.clone());
        }
        for (i, f) in star.formulas.iter().enumerate() {
            let want = eval(f, &env, field, Branch::Principal, &base.label)?;
            if want != x[i] {
                rep.mismatches.push(format!("alpha*_{} at {env:?}: formula {want}, computed {}", i + 1, x[i]));
            }
        }
    }
    Ok(Some(rep))
}

/// Printed generator list checks for one base at given parameter values.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct H2Report {
    pub base: String,
    pub printed: usize,
    pub distinct: usize,
    pub computed: usize,
    pub non_cocycles: Vec<usize>,
    /// Rank of the distinct printed generators modulo B².
    pub rank: usize,
}

impl H2Report {
    pub fn independent(&self) -> bool {
        self.non_cocycles.is_empty() && self.rank == self.distinct
    }
}

pub fn h2_report(base: &BaseRecord, env: &Env, field: Field) -> Result<H2Report, CatalogError> {
    let a = base.algebra(env, field)?;
    let h = crate::cohomology::h2_basis(&a);
    let printed = base.printed_h2_vectors(env, field)?;
    let mut distinct: Vec<Vec<Elem>> = Vec::new();
    for v in &printed {
        if !distinct.contains(v) {
            distinct.push(v.clone());
        }
    }
    let z = cocycle_space(&a);
    let non_cocycles = printed.iter().enumerate().filter(|(_, v)| !z.contains(v)).map(|(i, _)| i + 1).collect();
    Ok(H2Report {
        base: base.label.clone(),
        printed: printed.len(),
        distinct: distinct.len(),
        computed: h.dim(),
        non_cocycles,
        rank: h.class_rank(&distinct),
    })
}

/// Outcome of looking for a witness between two generated algebras.
#[derive(Clone, Debug)]
pub struct WitnessOutcome {
    /// Field the witness lives over, if one was found.
    pub field: Option<Field>,
    pub witness: Option<Matrix>,
    /// Re-checked multiplicative and invertible.
    pub verified: bool,
    pub log: Vec<String>,
}

/// Searches over ℚ with bounded heights, then falls back to an exhaustive
/// search over F_p for each fallback prime in turn.
pub fn find_witness(a: &Algebra, b: &Algebra, opts: &SearchOptions, fallback: &[u64]) -> WitnessOutcome {
    let mut log = Vec::new();
    match iso_search(a, b, opts) {
        Ok(IsoVerdict::Isomorphic(m)) => {
            let verified = is_isomorphism(a, b, &m);
            return WitnessOutcome { field: Some(a.field()), witness: Some(m), verified, log };
        }
        Ok(v) => log.push(format!("{}: {v:?}", a.field())),
        Err(e) => log.push(format!("{}: {e}", a.field())),
    }
    for &p in fallback {
        let (Ok(ap), Ok(bp)) = (a.reduce_mod(p), b.reduce_mod(p)) else {
            log.push(format!("fp:{p}: reduction undefined"));
            continue;
        };
        match iso_search(&ap, &bp, opts) {
            Ok(IsoVerdict::Isomorphic(m)) => {
                let verified = is_isomorphism(&ap, &bp, &m);
                return WitnessOutcome { field: Some(Field::Fp(p)), witness: Some(m), verified, log };
            }
            Ok(v) => log.push(format!("fp:{p}: {v:?}")),
            Err(e) => log.push(format!("fp:{p}: {e}")),
        }
    }
    WitnessOutcome { field: None, witness: None, verified: false, log }
}

/// Generated table for an entry at its first sample, stored for diffing.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct GoldenDoc {
    pub label: String,
    pub provenance: String,
    pub base: String,
    pub sample: BTreeMap<String, String>,
    pub algebra: AlgebraDoc,
}

pub fn golden_doc(cat: &Catalog, entry: &EntryRecord) -> Result<GoldenDoc, CatalogError> {
    let sample = entry.samples.first().cloned().unwrap_or_default();
    let env = env_from_strings(&sample, Field::Q).map_err(expr_err(entry.label.clone()))?;
    let g = cat.generate(entry, &env, Field::Q)?;
    Ok(GoldenDoc {
        label: entry.label.clone(),
        provenance: "derived from orbit data".to_string(),
        base: entry.base.clone(),
        sample,
        algebra: g.algebra.to_doc(),
    })
}
