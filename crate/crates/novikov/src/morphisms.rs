//! Homomorphisms, the Aut-action on cocycles, derivations and isomorphism search.
//!
//! A linear map φ: A → B is an n_B × n_A matrix whose column j is φ(e_j).
//!
//! The search works in filtration-adapted bases. A is rewritten in a basis of
//! words: a minimal generating set followed by products of earlier words, so
//! that the words of degree ≥ m span A^m. B is rewritten so that its last
//! dim B^m coordinates span B^m. A homomorphism is then determined by the
//! images of the generators, and those images are assigned one filtration
//! layer at a time. On the first layer the conditions are quadratic and are
//! explored by backtracking; on every later layer they are affine in the new
//! unknowns and get solved exactly, leaving only the free parameters to
//! enumerate.

use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::Algebra;
use crate::cohomology::{cocycle_space, Cocycle};
use crate::field::{Elem, Field};
use crate::linalg::{is_zero_vec, sub_vec, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphError {
    #[error("map has shape {got:?}, expected {expected:?}")]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("isomorphism search needs nilpotent algebras")]
    NotNilpotent,
    #[error("algebras live over different fields ({0} and {1})")]
    FieldMismatch(Field, Field),
}

fn check_shape(a: &Algebra, b: &Algebra, phi: &Matrix) -> Result<(), MorphError> {
    if phi.rows() != b.dim() || phi.cols() != a.dim() {
        return Err(MorphError::ShapeMismatch { expected: (b.dim(), a.dim()), got: (phi.rows(), phi.cols()) });
    }
    Ok(())
}

/// First basis pair (i, j) with φ(e_i e_j) ≠ φ(e_i)φ(e_j).
pub fn homomorphism_witness(a: &Algebra, b: &Algebra, phi: &Matrix) -> Result<Option<(usize, usize)>, MorphError> {
    check_shape(a, b, phi)?;
    let cols: Vec<Vec<Elem>> = (0..a.dim()).map(|j| phi.column(j)).collect();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let lhs = phi.mul_vec(a.product_of_basis(i, j));
            let rhs = b.multiply(&cols[i], &cols[j]);
            if lhs != rhs {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

pub fn is_homomorphism(a: &Algebra, b: &Algebra, phi: &Matrix) -> Result<bool, MorphError> {
    Ok(homomorphism_witness(a, b, phi)?.is_none())
}

pub fn is_automorphism(a: &Algebra, phi: &Matrix) -> bool {
    phi.is_invertible() && matches!(homomorphism_witness(a, a, phi), Ok(None))
}

pub fn is_isomorphism(a: &Algebra, b: &Algebra, phi: &Matrix) -> bool {
    phi.is_invertible() && matches!(homomorphism_witness(a, b, phi), Ok(None))
}

/// (φθ)_t = φᵀ M_t φ, without checking that φ is an automorphism.
pub fn act_unchecked(phi: &Matrix, theta: &Cocycle) -> Cocycle {
    let pt = phi.transpose();
    let mats: Vec<Matrix> = (0..theta.s())
        .map(|t| pt.mul(&theta.matrix(t)).and_then(|m| m.mul(phi)).expect("square shapes"))
        .collect();
    if mats.is_empty() {
        return Cocycle::zero(theta.field(), theta.dim(), 0);
    }
    Cocycle::from_matrices(&mats)
}

/// φθ(x, y) = θ(φx, φy) for φ ∈ Aut(A).
pub fn act_on_cocycle(a: &Algebra, phi: &Matrix, theta: &Cocycle) -> Result<Cocycle, MorphError> {
    check_shape(a, a, phi)?;
    if !is_automorphism(a, phi) {
        return Err(MorphError::NotAutomorphism);
    }
    Ok(act_unchecked(phi, theta))
}

/// Der(A) inside the n²-space of matrices (index r·n + c holds D_rc).
pub fn derivation_algebra(a: &Algebra) -> Subspace {
    let n = a.dim();
    let f = a.field();
    if n == 0 {
        return Subspace::zero(f, 0);
    }
    let mut m = Matrix::zeros(f, n * n * n, n * n);
    let add = |m: &mut Matrix, row: usize, col: usize, v: &Elem, plus: bool| {
        if v.is_zero() {
            return;
        }
        let cur = if plus { m.get(row, col) + v } else { m.get(row, col) - v };
        m.set(row, col, cur);
    };
    for i in 0..n {
        for j in 0..n {
            for t in 0..n {
                let row = (i * n + j) * n + t;
                for l in 0..n {
                    // D(e_i e_j)_t = Σ_l c_ij^l D_tl
                    add(&mut m, row, t * n + l, a.c(i, j, l), true);
                    // D(e_i) e_j + e_i D(e_j)
                    add(&mut m, row, l * n + i, a.c(l, j, t), false);
                    add(&mut m, row, l * n + j, a.c(i, l, t), false);
                }
            }
        }
    }
    m.kernel()
}

/// Rationals 0, ±1, ±2, ±1/2, … of height at most h (max of |num| and den).
pub fn height_values(field: Field, h: u32) -> Vec<Elem> {
    let mut out = vec![Elem::zero(field)];
    for ht in 1..=h as i64 {
        let mut level = Vec::new();
        for den in 1..=ht {
            for num in 1..=ht {
                if num.max(den) != ht || num.gcd(&den) != 1 {
                    continue;
                }
                level.push((num, den));
            }
        }
        level.sort_by(|a, b| (b.0 * a.1).cmp(&(a.0 * b.1)));
        for (num, den) in level {
            let q = BigRational::new(BigInt::from(num), BigInt::from(den));
            out.push(Elem::from_rational(field, &q).expect("characteristic zero"));
            out.push(Elem::from_rational(field, &-q).expect("characteristic zero"));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Height bound for characteristic-zero candidate values.
    pub height: u32,
    /// Node budget per first-generator branch.
    pub budget: u64,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { height: 3, budget: 5_000_000, jobs: 0 }
    }
}

#[derive(Clone, Debug)]
pub enum IsoVerdict {
    Isomorphic(Matrix),
    /// Proven: an invariant differs, or the finite-field search was exhaustive.
    NotIsomorphic(String),
    /// Characteristic-zero search with bounded heights found nothing; not a proof.
    NotFoundWithinHeight(u32),
}

impl IsoVerdict {
    pub fn witness(&self) -> Option<&Matrix> {
        match self {
            IsoVerdict::Isomorphic(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum WordDef {
    Gen,
    Prod(usize, usize),
}

/// A basis of words adapted to the power filtration.
#[derive(Clone, Debug)]
struct WordBasis {
    defs: Vec<WordDef>,
    deg: Vec<usize>,
    /// bitmask of generators occurring in the word
    support: Vec<u64>,
    /// columns are the word vectors in the original basis
    matrix: Matrix,
}

fn word_basis(a: &Algebra) -> Result<WordBasis, MorphError> {
    let filt = a.power_filtration();
    if filt.nilpotency_index.is_none() {
        return Err(MorphError::NotNilpotent);
    }
    let f = a.field();
    let n = a.dim();
    let layers = filt.terms.len() - 1;
    let gens = filt.power(2).coordinate_complement();
    if gens.len() > 63 {
        return Err(MorphError::NotNilpotent);
    }
    let mut vecs: Vec<Vec<Elem>> = gens.iter().map(|&g| a.basis_vector(g)).collect();
    let mut defs = vec![WordDef::Gen; gens.len()];
    let mut deg = vec![1; gens.len()];
    let mut support: Vec<u64> = (0..gens.len()).map(|g| 1u64 << g).collect();
    for m in 2..=layers {
        let upper = filt.power(m + 1);
        let want = filt.power(m).dim() - upper.dim();
        let mut acc = upper;
        let mut got = 0;
        let count = vecs.len();
        'outer: for x in 0..count {
            for y in 0..count {
                if got == want {
                    break 'outer;
                }
                if deg[x] + deg[y] != m {
                    continue;
                }
                let v = a.multiply(&vecs[x], &vecs[y]);
                if acc.contains(&v) {
                    continue;
                }
                acc = acc.sum(&Subspace::from_vectors(f, n, &[v.clone()])).expect("same ambient");
                vecs.push(v);
                defs.push(WordDef::Prod(x, y));
                deg.push(m);
                support.push(support[x] | support[y]);
                got += 1;
            }
        }
        assert_eq!(got, want, "filtration layer {m} not spanned by products of words");
    }
    let matrix = Matrix::from_columns(f, n, &vecs);
    Ok(WordBasis { defs, deg, support, matrix })
}

/// Basis of B listing a complement of B² in B¹, then of B³ in B², and so on.
fn adapted_basis(b: &Algebra) -> Result<(Matrix, Vec<(usize, usize)>), MorphError> {
    let filt = b.power_filtration();
    if filt.nilpotency_index.is_none() {
        return Err(MorphError::NotNilpotent);
    }
    let mut cols = Vec::new();
    let mut layers = Vec::new();
    for m in 1..filt.terms.len() {
        let reps = filt.power(m).quotient_basis(&filt.power(m + 1)).expect("same ambient");
        layers.push((cols.len(), reps.len()));
        cols.extend(reps);
    }
    Ok((Matrix::from_columns(b.field(), b.dim(), &cols), layers))
}

type Check = (usize, usize, usize);

struct Plan {
    field: Field,
    n: usize,
    k: usize,
    /// (start, dim) of layers 1..=L, 0-based in the vector
    layers: Vec<(usize, usize)>,
    aw: Algebra,
    bp: Algebra,
    words: WordBasis,
    ub: Matrix,
    wa_inv: Matrix,
    order: Vec<usize>,
    stage1: Vec<Vec<Check>>,
    later: Vec<Vec<Check>>,
    gen_sigs: Vec<Vec<usize>>,
    values: Vec<Elem>,
    /// nonzero structure constants of A in word coordinates, per pair
    terms: Vec<Vec<(usize, Elem)>>,
}

/// Ranks of left and right multiplication by a degree-one element between
/// consecutive layers of the associated graded algebra.
fn graded_signature(alg: &Algebra, layers: &[(usize, usize)], x: &[Elem]) -> Vec<usize> {
    let f = alg.field();
    let mut sig = Vec::new();
    for w in layers.windows(2) {
        let (s0, d0) = w[0];
        let (s1, d1) = w[1];
        let mut left = Vec::new();
        let mut right = Vec::new();
        for y in s0..s0 + d0 {
            let e = alg.basis_vector(y);
            left.push(alg.multiply(x, &e)[s1..s1 + d1].to_vec());
            right.push(alg.multiply(&e, x)[s1..s1 + d1].to_vec());
        }
        let l = Matrix::from_rows(f, &left);
        let r = Matrix::from_rows(f, &right);
        let mut both = left.clone();
        both.extend(right.iter().cloned());
        sig.push(l.rank());
        sig.push(r.rank());
        sig.push(Matrix::from_rows(f, &both).rank());
        let _ = d1;
    }
    sig
}

impl Plan {
    fn new(a: &Algebra, b: &Algebra, height: u32) -> Result<Plan, MorphError> {
        let field = a.field();
        let n = a.dim();
        let words = word_basis(a)?;
        let (ub, layers) = adapted_basis(b)?;
        let aw = a.change_basis(&words.matrix).expect("word basis is a basis");
        let bp = b.change_basis(&ub).expect("adapted basis is a basis");
        let wa_inv = words.matrix.inverse().expect("word basis is a basis");
        let k = layers.first().map_or(0, |l| l.1);
        let big_l = layers.len();

        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let t: Vec<(usize, Elem)> =
                    aw.product_of_basis(i, j).iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(l, c)| (l, c.clone())).collect();
                terms.push(t);
            }
        }

        // deeper generators first: they carry the most constraints
        let depth: Vec<usize> = (0..k)
            .map(|g| (0..n).filter(|&w| words.support[w] & (1 << g) != 0).map(|w| words.deg[w]).max().unwrap_or(1))
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&g| std::cmp::Reverse(depth[g]));
        let mut pos = vec![0; k];
        for (p, &g) in order.iter().enumerate() {
            pos[g] = p;
        }

        let mut stage1 = vec![Vec::new(); k];
        let mut later = vec![Vec::new(); big_l + 1];
        for i in 0..n {
            for j in 0..n {
                let mut req = words.support[i] | words.support[j];
                for (l, _) in &terms[i * n + j] {
                    req |= words.support[*l];
                }
                let d = words.deg[i] + words.deg[j];
                for layer in d..=big_l {
                    let sigma = layer + 1 - d;
                    if sigma == 1 {
                        let last = (0..k).filter(|&g| req & (1 << g) != 0).map(|g| pos[g]).max().unwrap_or(0);
                        stage1[last].push((i, j, layer));
                    } else {
                        later[sigma].push((i, j, layer));
                    }
                }
            }
        }

        let gen_sigs = (0..k).map(|g| graded_signature(&aw, &layers, &aw.basis_vector(g))).collect();
        let values = match field {
            Field::Fp(p) => (0..p).map(|r| Elem::Fp(r, p)).collect(),
            _ => height_values(field, height),
        };
        Ok(Plan { field, n, k, layers, aw, bp, words, ub, wa_inv, order, stage1, later, gen_sigs, values, terms })
    }

    fn images(&self, gens: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
        let mut img: Vec<Vec<Elem>> = Vec::with_capacity(self.n);
        for (w, def) in self.words.defs.iter().enumerate() {
            let v = match def {
                WordDef::Gen => gens[w].clone(),
                WordDef::Prod(x, y) => self.bp.multiply(&img[*x], &img[*y]),
            };
            img.push(v);
        }
        img
    }

    fn residual(&self, img: &[Vec<Elem>], (i, j, layer): Check, out: &mut Vec<Elem>) {
        let (start, dim) = self.layers[layer - 1];
        let rhs = self.bp.multiply(&img[i], &img[j]);
        for c in start..start + dim {
            let mut lhs = Elem::zero(self.field);
            for (l, coef) in &self.terms[i * self.n + j] {
                let v = &img[*l][c];
                if !v.is_zero() {
                    lhs = &lhs + &(coef * v);
                }
            }
            out.push(&lhs - &rhs[c]);
        }
    }

    fn passes(&self, img: &[Vec<Elem>], checks: &[Check]) -> bool {
        let mut buf = Vec::new();
        for &c in checks {
            buf.clear();
            self.residual(img, c, &mut buf);
            if !is_zero_vec(&buf) {
                return false;
            }
        }
        true
    }

    /// Nonzero vectors of the first layer, lexicographic in the value order.
    fn layer_one_candidates(&self) -> Vec<Vec<Elem>> {
        let d = self.layers.first().map_or(0, |l| l.1);
        let mut out = Vec::new();
        odometer(&self.values, d, |v| {
            if !is_zero_vec(v) {
                out.push(v.to_vec());
            }
            true
        });
        out
    }

    fn witness(&self, gens: &[Vec<Elem>]) -> Option<Matrix> {
        let img = self.images(gens);
        let local = Matrix::from_columns(self.field, self.n, &img);
        if !matches!(homomorphism_witness(&self.aw, &self.bp, &local), Ok(None)) {
            return None;
        }
        let phi = self.ub.mul(&local).and_then(|m| m.mul(&self.wa_inv)).expect("square shapes");
        Some(phi)
    }
}

/// Calls visit on every vector of values^d in lexicographic order; stops when visit returns false.
fn odometer(values: &[Elem], d: usize, mut visit: impl FnMut(&[Elem]) -> bool) {
    let mut idx = vec![0usize; d];
    let mut cur: Vec<Elem> = vec![values[0].clone(); d];
    loop {
        if !visit(&cur) {
            return;
        }
        let mut p = d;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < values.len() {
                cur[p] = values[idx[p]].clone();
                break;
            }
            idx[p] = 0;
            cur[p] = values[0].clone();
        }
    }
}

enum Flow {
    Continue,
    Stop,
    Exceeded,
}

struct Branch<'a> {
    plan: &'a Plan,
    gens: Vec<Vec<Elem>>,
    chosen: Vec<Vec<Elem>>,
    nodes: u64,
    budget: u64,
    collect_all: bool,
    found: Vec<Matrix>,
}

impl<'a> Branch<'a> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.budget
    }

    fn independent_with(&self, v: &[Elem]) -> bool {
        let mut rows = self.chosen.clone();
        rows.push(v.to_vec());
        Matrix::from_rows(self.plan.field, &rows).rank() == rows.len()
    }

    /// Level p < k assigns the first layer of generator order[p];
    /// levels k, k+1, … solve layers 2, 3, ….
    fn run(&mut self, level: usize) -> Flow {
        let plan = self.plan;
        if level < plan.k {
            return self.stage_one(level);
        }
        let sigma = level - plan.k + 2;
        if sigma > plan.layers.len() {
            if let Some(phi) = plan.witness(&self.gens) {
                self.found.push(phi);
                if !self.collect_all {
                    return Flow::Stop;
                }
            }
            return Flow::Continue;
        }
        self.stage_affine(level, sigma)
    }

    fn stage_one(&mut self, level: usize) -> Flow {
        let plan = self.plan;
        let g = plan.order[level];
        let d1 = plan.layers[0].1;
        let mut flow = Flow::Continue;
        let mut cands = Vec::new();
        odometer(&plan.values, d1, |v| {
            cands.push(v.to_vec());
            true
        });
        for cand in cands {
            if is_zero_vec(&cand) {
                continue;
            }
            if !self.tick() {
                return Flow::Exceeded;
            }
            match self.try_first_layer(level, g, &cand) {
                Flow::Continue => {}
                other => {
                    flow = other;
                    break;
                }
            }
        }
        flow
    }

    fn try_first_layer(&mut self, level: usize, g: usize, cand: &[Elem]) -> Flow {
        let plan = self.plan;
        let d1 = plan.layers[0].1;
        let mut full = vec![Elem::zero(plan.field); plan.n];
        full[..d1].clone_from_slice(cand);
        if graded_signature(&plan.bp, &plan.layers, &full) != plan.gen_sigs[g] {
            return Flow::Continue;
        }
        if !self.independent_with(cand) {
            return Flow::Continue;
        }
        self.gens[g] = full;
        let img = plan.images(&self.gens);
        if !plan.passes(&img, &plan.stage1[level]) {
            self.gens[g] = vec![Elem::zero(plan.field); plan.n];
            return Flow::Continue;
        }
        self.chosen.push(cand.to_vec());
        let flow = self.run(level + 1);
        self.chosen.pop();
        self.gens[g] = vec![Elem::zero(plan.field); plan.n];
        flow
    }

    fn stage_affine(&mut self, level: usize, sigma: usize) -> Flow {
        let plan = self.plan;
        let f = plan.field;
        let (start, dim) = plan.layers[sigma - 1];
        let unknowns = plan.k * dim;
        let checks = &plan.later[sigma];
        let residuals = |gens: &[Vec<Elem>]| {
            let img = plan.images(gens);
            let mut out = Vec::new();
            for &c in checks {
                plan.residual(&img, c, &mut out);
            }
            out
        };
        let r0 = residuals(&self.gens);
        let mut columns = Vec::with_capacity(unknowns);
        for q in 0..unknowns {
            let (g, r) = (q / dim, q % dim);
            let mut probe = self.gens.clone();
            probe[g][start + r] = Elem::one(f);
            columns.push(sub_vec(&residuals(&probe), &r0));
        }
        let rows = r0.len();
        let system = Matrix::from_columns(f, rows, &columns);
        let rhs: Vec<Elem> = r0.iter().map(|x| x.neg_ref()).collect();
        let system = if unknowns == 0 { Matrix::zeros(f, rows, 0) } else { system };
        let Some((x0, kernel)) = system.solve_affine(&rhs) else {
            return Flow::Continue;
        };
        let mut flow = Flow::Continue;
        let saved = self.gens.clone();
        let free = kernel.len();
        let mut params = Vec::new();
        odometer(&plan.values, free, |t| {
            params.push(t.to_vec());
            true
        });
        for t in params {
            if !self.tick() {
                flow = Flow::Exceeded;
                break;
            }
            let mut u = x0.clone();
            for (c, kv) in t.iter().zip(&kernel) {
                if !c.is_zero() {
                    for (ui, ki) in u.iter_mut().zip(kv) {
                        *ui = &*ui + &(c * ki);
                    }
                }
            }
            for q in 0..unknowns {
                self.gens[q / dim][start + q % dim] = u[q].clone();
            }
            match self.run(level + 1) {
                Flow::Continue => {}
                other => {
                    flow = other;
                    break;
                }
            }
        }
        self.gens = saved;
        flow
    }
}

fn quick_invariants(a: &Algebra, b: &Algebra) -> Option<String> {
    if a.field() != b.field() {
        return Some("different fields".into());
    }
    if a.dim() != b.dim() {
        return Some(format!("dimensions {} and {}", a.dim(), b.dim()));
    }
    let fa = crate::invariants::fingerprint(a);
    let fb = crate::invariants::fingerprint(b);
    fa.first_difference(&fb).map(|d| format!("fingerprints differ in {d}"))
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

struct Outcome {
    maps: Vec<Matrix>,
    exceeded: bool,
}

fn search(a: &Algebra, b: &Algebra, opts: &SearchOptions, collect_all: bool) -> Result<Outcome, MorphError> {
    let plan = Plan::new(a, b, opts.height)?;
    let f = plan.field;
    let blank = || Branch {
        plan: &plan,
        gens: vec![vec![Elem::zero(f); plan.n]; plan.k],
        chosen: Vec::new(),
        nodes: 0,
        budget: opts.budget,
        collect_all,
        found: Vec::new(),
    };
    if plan.k == 0 {
        let mut br = blank();
        br.run(0);
        return Ok(Outcome { maps: br.found, exceeded: false });
    }
    let first = plan.order[0];
    let cands = plan.layer_one_candidates();
    let exceeded = AtomicBool::new(false);
    let explore = |cand: &Vec<Elem>| -> Vec<Matrix> {
        let mut br = blank();
        br.nodes = 1;
        match br.try_first_layer(0, first, cand) {
            Flow::Exceeded => exceeded.store(true, Ordering::Relaxed),
            _ => {}
        }
        br.found
    };
    let maps = with_pool(opts.jobs, || {
        if collect_all {
            cands.par_iter().map(explore).collect::<Vec<_>>().into_iter().flatten().collect()
        } else {
            cands.par_iter().find_map_first(|c| explore(c).into_iter().next()).into_iter().collect()
        }
    });
    Ok(Outcome { maps, exceeded: exceeded.load(Ordering::Relaxed) })
}

/// Looks for an isomorphism A → B. Over F_p a negative answer is a proof.
pub fn iso_search(a: &Algebra, b: &Algebra, opts: &SearchOptions) -> Result<IsoVerdict, MorphError> {
    if a.field() != b.field() {
        return Err(MorphError::FieldMismatch(a.field(), b.field()));
    }
    if let Some(reason) = quick_invariants(a, b) {
        return Ok(IsoVerdict::NotIsomorphic(reason));
    }
    let out = search(a, b, opts, false)?;
    if let Some(phi) = out.maps.into_iter().next() {
        debug_assert!(is_isomorphism(a, b, &phi));
        return Ok(IsoVerdict::Isomorphic(phi));
    }
    if out.exceeded {
        return Err(MorphError::BudgetExceeded(opts.budget));
    }
    if a.field().is_finite() {
        Ok(IsoVerdict::NotIsomorphic("exhaustive search over the finite field".into()))
    } else {
        Ok(IsoVerdict::NotFoundWithinHeight(opts.height))
    }
}

/// The full automorphism group of a nilpotent algebra over F_p.
pub fn enumerate_aut_fp(a: &Algebra, opts: &SearchOptions) -> Result<Vec<Matrix>, MorphError> {
    if !a.field().is_finite() {
        return Err(MorphError::FieldMismatch(a.field(), Field::Fp(0)));
    }
    let out = search(a, a, opts, true)?;
    if out.exceeded {
        return Err(MorphError::BudgetExceeded(opts.budget));
    }
    Ok(out.maps)
}

/// Independent oracle: scans invertible matrices column by column over F_p,
/// keeping those that respect every product whose factors and result columns
/// are already fixed. No filtration or generator structure is used.
pub fn automorphisms_by_column_scan(a: &Algebra) -> Vec<Matrix> {
    let f = a.field();
    let Field::Fp(p) = f else {
        return Vec::new();
    };
    let n = a.dim();
    let values: Vec<Elem> = (0..p).map(|r| Elem::Fp(r, p)).collect();
    let mut vectors = Vec::new();
    odometer(&values, n, |v| {
        vectors.push(v.to_vec());
        true
    });
    // products (i, j) become checkable once columns up to this index are set
    let mut ready = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            let mut last = i.max(j);
            for (l, c) in a.product_of_basis(i, j).iter().enumerate() {
                if !c.is_zero() {
                    last = last.max(l);
                }
            }
            ready[last].push((i, j));
        }
    }
    let mut out = Vec::new();
    let mut cols: Vec<Vec<Elem>> = Vec::new();
    fn rec(a: &Algebra, vectors: &[Vec<Elem>], ready: &[Vec<(usize, usize)>], cols: &mut Vec<Vec<Elem>>, out: &mut Vec<Matrix>) {
        let n = a.dim();
        let f = a.field();
        if cols.len() == n {
            out.push(Matrix::from_columns(f, n, cols));
            return;
        }
        for v in vectors {
            cols.push(v.clone());
            let indep = Matrix::from_rows(f, cols).rank() == cols.len();
            let ok = indep
                && ready[cols.len() - 1].iter().all(|&(i, j)| {
                    let mut lhs = vec![Elem::zero(f); n];
                    for (l, c) in a.product_of_basis(i, j).iter().enumerate() {
                        if !c.is_zero() {
                            lhs = crate::linalg::add_vec(&lhs, &crate::linalg::scale_vec(c, &cols[l]));
                        }
                    }
                    lhs == a.multiply(&cols[i], &cols[j])
                });
            if ok {
                rec(a, vectors, ready, cols, out);
            }
            cols.pop();
        }
    }
    rec(a, &vectors, &ready, &mut cols, &mut out);
    out
}

/// Checks that a homomorphism carries cocycles to cocycles: used by tests.
pub fn preserves_cocycles(a: &Algebra, phi: &Matrix, theta: &Cocycle) -> bool {
    let z = cocycle_space(a);
    act_unchecked(phi, theta).components().iter().all(|c| z.contains(c))
}
