use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use novikov::catalog::{
    default_data_dir, normalize_label, verify_alpha_star, verify_aut_shapes, Catalog, NablaTerm, PREDICATES,
};
use novikov::cohomology::{h2_basis, BaseRef, CocycleDoc};
use novikov::expr::{env_from_strings, Env};
use novikov::extensions::{central_extension, reconstruct};
use novikov::fplab::{crosscheck, run_procedure_fp};
use novikov::invariants::{fingerprint, separate};
use novikov::morphisms::{iso_search, IsoVerdict, SearchOptions};
use novikov::{Algebra, Cocycle, Field};
use rand::{rngs::StdRng, SeedableRng};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "novikov", version, about = "Nilpotent Novikov algebras: invariants, cohomology, extensions and the catalog")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// q, qi, qsqrt:d or fp:p
    #[arg(long, global = true)]
    field: Option<String>,
    /// Node budget for isomorphism search
    #[arg(long, global = true, default_value_t = 5_000_000)]
    budget: u64,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write a JSON report here
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Height bound for characteristic-zero isomorphism search
    #[arg(long, global = true, default_value_t = 3)]
    height: u32,
}

/// An algebra is a JSON file, a base label such as `frakN_07`, or an entry
/// label such as `N_16`, with parameters given as `--arg alpha=2`.
#[derive(Args, Clone)]
struct AlgArg {
    algebra: String,
    #[arg(long = "arg", value_name = "NAME=VALUE")]
    args: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Identities and basic invariants of one algebra
    Check(AlgArg),
    /// Z², B² and H² with class representatives
    H2(AlgArg),
    /// Central extension by a cocycle
    Extend {
        #[command(flatten)]
        base: AlgArg,
        /// CocycleDoc JSON file
        #[arg(long, conflicts_with = "nablas")]
        cocycle: Option<PathBuf>,
        /// Printed generators of a catalog base, e.g. "n1,2*n3;n2"
        #[arg(long)]
        nablas: Option<String>,
    },
    /// Split an algebra into base and cocycle along its annihilator
    Reconstruct(AlgArg),
    /// Search for an isomorphism between two algebras
    Iso {
        left: String,
        right: String,
        #[arg(long = "left-arg")]
        left_args: Vec<String>,
        #[arg(long = "right-arg")]
        right_args: Vec<String>,
    },
    /// Separate a list of algebras (LABEL or LABEL:name=value,...)
    Separate { items: Vec<String> },
    /// Run the membership predicates over catalog samples
    VerifyCatalog {
        #[arg(long)]
        entry: Option<String>,
        /// Also check printed Aut shapes and transformation formulas, seeded by --seed
        #[arg(long)]
        bases: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Count catalog entries by number of parameters
    Census,
    /// Aut-orbits of extensions over a prime field
    OrbitsFp {
        #[arg(long)]
        base: String,
        #[arg(long = "arg")]
        args: Vec<String>,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long)]
        crosscheck: bool,
    },
    /// Canonicalize a JSON file: sorted keys, two-space indent
    Fmt {
        path: PathBuf,
        /// Rewrite the file instead of printing
        #[arg(long)]
        write: bool,
        /// Exit 1 if the file is not canonical
        #[arg(long, conflicts_with = "write")]
        check: bool,
    },
}

struct Ctx {
    field: Option<Field>,
    opts: SearchOptions,
    seed: u64,
    catalog: Option<Catalog>,
}

impl Ctx {
    fn field(&self) -> Field {
        self.field.unwrap_or(Field::Q)
    }

    fn catalog(&mut self) -> Result<&Catalog> {
        if self.catalog.is_none() {
            let dir = default_data_dir();
            let cat = Catalog::load(&dir).with_context(|| format!("loading catalog from {}", dir.display()))?;
            self.catalog = Some(cat);
        }
        Ok(self.catalog.as_ref().expect("just loaded"))
    }
}

fn parse_args(args: &[String], field: Field) -> Result<Env> {
    let mut raw = BTreeMap::new();
    for a in args {
        for part in a.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| anyhow!("expected NAME=VALUE, got {part:?}"))?;
            raw.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(env_from_strings(&raw, field)?)
}

fn to_field(a: Algebra, f: Field) -> Result<Algebra> {
    if a.field() == f {
        return Ok(a);
    }
    Ok(match f {
        Field::Fp(p) => a.reduce_mod(p)?,
        _ => a.embed(f)?,
    })
}

fn load_algebra(ctx: &mut Ctx, spec: &str, args: &[String]) -> Result<Algebra> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        let a = Algebra::from_json(&text).with_context(|| format!("parsing {spec}"))?;
        return match ctx.field {
            Some(f) => to_field(a, f),
            None => Ok(a),
        };
    }
    let f = ctx.field();
    let env = parse_args(args, f)?;
    let cat = ctx.catalog()?;
    if let Ok(b) = cat.base(spec) {
        b.check_args(&env, f)?;
        return Ok(b.algebra(&env, f)?);
    }
    let label = normalize_label(spec);
    let e = cat.entry(&label).map_err(|_| anyhow!("{spec:?} is neither a file nor a catalog label"))?;
    Ok(cat.generate(e, &env, f)?.algebra)
}

/// `LABEL` or `LABEL:name=value,...`
fn load_item(ctx: &mut Ctx, item: &str) -> Result<Algebra> {
    match item.split_once(':') {
        Some((l, a)) if !Path::new(item).is_file() => load_algebra(ctx, l, &[a.to_string()]),
        _ => load_algebra(ctx, item, &[]),
    }
}

fn parse_nablas(text: &str) -> Result<Vec<Vec<NablaTerm>>> {
    text.split(';')
        .map(|comp| {
            comp.split(',')
                .map(|t| {
                    let t = t.trim();
                    let (coef, n) = match t.rsplit_once('*') {
                        Some((c, n)) => (c.trim().to_string(), n.trim()),
                        None => match t.strip_prefix('-') {
                            Some(n) => ("-1".to_string(), n.trim()),
                            None => ("1".to_string(), t),
                        },
                    };
                    let k = n
                        .strip_prefix('n')
                        .and_then(|k| k.parse().ok())
                        .ok_or_else(|| anyhow!("expected a term like 2*n3, got {t:?}"))?;
                    Ok(NablaTerm { nabla: k, c: coef })
                })
                .collect()
        })
        .collect()
}

fn verdict_json(v: &IsoVerdict) -> Value {
    match v {
        IsoVerdict::Isomorphic(m) => json!({
            "verdict": "isomorphic",
            "witness": m.row_vectors().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        IsoVerdict::NotIsomorphic(why) => json!({ "verdict": "not-isomorphic", "reason": why }),
        IsoVerdict::NotFoundWithinHeight(h) => json!({ "verdict": "not-found", "height": h }),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

/// Runs a subcommand. Ok(false) means a verification failure.
fn run(cmd: Command, ctx: &mut Ctx) -> Result<(bool, Value)> {
    match cmd {
        Command::Check(a) => {
            let alg = load_algebra(ctx, &a.algebra, &a.args)?;
            let novikov = alg.is_novikov();
            let nil = alg.nilpotency_index();
            let ann = alg.annihilator().dim();
            let nil_text = nil.map_or("none".to_string(), |k| k.to_string());
            println!("novikov: {novikov}, nilpotency: {nil_text}, ann: {ann}");
            let mut report = json!({ "novikov": novikov, "nilpotency": nil, "ann": ann, "field": alg.field().tag() });
            if !novikov {
                let rc = alg.right_commutativity_witness();
                let ls = alg.left_symmetry_witness();
                println!("right-commutativity witness: {rc:?}, left-symmetry witness: {ls:?}");
                report["failures"] = json!({ "right_commutativity": rc, "left_symmetry": ls });
            } else {
                report["fingerprint"] = serde_json::to_value(fingerprint(&alg))?;
            }
            Ok((novikov, report))
        }
        Command::H2(a) => {
            let alg = load_algebra(ctx, &a.algebra, &a.args)?;
            let h = h2_basis(&alg);
            println!("dim Z2 = {}, dim B2 = {}, dim H2 = {}", h.z2.dim(), h.b2.dim(), h.dim());
            let reps: Vec<CocycleDoc> = h
                .reps
                .iter()
                .map(|r| Cocycle::unchecked(alg.field(), alg.dim(), vec![r.clone()]).expect("n² entries"))
                .map(|c| c.to_doc(BaseRef::Label(a.algebra.clone())))
                .collect();
            for (i, r) in reps.iter().enumerate() {
                let terms: Vec<String> = r.entries.iter().map(|e| format!("{}*D{}{}", e.c, e.i, e.j)).collect();
                println!("  class {}: {}", i + 1, terms.join(" + "));
            }
            Ok((true, json!({ "z2": h.z2.dim(), "b2": h.b2.dim(), "h2": h.dim(), "representatives": reps })))
        }
        Command::Extend { base, cocycle, nablas } => {
            let f = ctx.field();
            let theta_and_base = match (cocycle, nablas) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let doc: CocycleDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                    let alg = match &doc.base {
                        BaseRef::Inline(d) => to_field(Algebra::from_doc(d)?, f)?,
                        BaseRef::Label(_) => load_algebra(ctx, &base.algebra, &base.args)?,
                    };
                    let c = Cocycle::from_doc(&doc, alg.field(), alg.dim())?;
                    (alg, c.components().to_vec())
                }
                (None, Some(text)) => {
                    let terms = parse_nablas(&text)?;
                    let env = parse_args(&base.args, f)?;
                    let cat = ctx.catalog()?;
                    let b = cat.base(&base.algebra)?;
                    b.check_args(&env, f)?;
                    let alg = b.algebra(&env, f)?;
                    let comps = cat.cocycle_vectors(b, &terms, &b.label, &env, &env, f, Default::default())?;
                    (alg, comps)
                }
                _ => bail!("give one of --cocycle or --nablas"),
            };
            let (alg, comps) = theta_and_base;
            let theta = match Cocycle::new(&alg, comps) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("not a cocycle: {e}");
                    return Ok((false, json!({ "error": e.to_string() })));
                }
            };
            let ext = central_extension(&alg, &theta)?;
            let in_ts = novikov::cohomology::in_ts(&alg, &theta)?;
            eprintln!("dim {}, non-split: {}", ext.dim(), in_ts);
            print_json(&ext.to_doc())?;
            Ok((true, json!({ "algebra": ext.to_doc(), "in_ts": in_ts })))
        }
        Command::Reconstruct(a) => {
            let alg = load_algebra(ctx, &a.algebra, &a.args)?;
            let r = reconstruct(&alg)?;
            let out = json!({
                "base": r.base.to_doc(),
                "cocycle": r.cocycle.to_doc(BaseRef::Inline(r.base.to_doc())),
                "basis": r.basis.row_vectors().iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            print_json(&out)?;
            Ok((true, out))
        }
        Command::Iso { left, right, left_args, right_args } => {
            let a = load_algebra(ctx, &left, &left_args)?;
            let b = load_algebra(ctx, &right, &right_args)?;
            let v = iso_search(&a, &b, &ctx.opts)?;
            let out = verdict_json(&v);
            match &v {
                IsoVerdict::Isomorphic(m) => {
                    println!("isomorphic");
                    for r in m.row_vectors() {
                        println!("  [{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
                    }
                }
                IsoVerdict::NotIsomorphic(why) => println!("not isomorphic: {why}"),
                IsoVerdict::NotFoundWithinHeight(h) => println!("no witness with entries of height <= {h}"),
            }
            Ok((matches!(v, IsoVerdict::Isomorphic(_)), out))
        }
        Command::Separate { items } => {
            if items.len() < 2 {
                bail!("separate needs at least two algebras");
            }
            let mut algs = Vec::new();
            for it in &items {
                algs.push((it.clone(), load_item(ctx, it)?));
            }
            let f = algs[0].1.field();
            let r = separate(&algs, f, &ctx.opts);
            for p in &r.pairs {
                println!("{} vs {}: {:?} {}", p.left, p.right, p.status, p.detail);
            }
            let undecided = r.pairs.iter().any(|p| p.status == novikov::invariants::PairStatus::Undecided);
            Ok((!undecided, serde_json::to_value(&r)?))
        }
        Command::VerifyCatalog { entry, bases, trials } => {
            let f = ctx.field();
            let seed = ctx.seed;
            let cat = ctx.catalog()?;
            let entries: Vec<_> = match &entry {
                Some(l) => vec![cat.entry(&normalize_label(l))?],
                None => cat.entries.iter().collect(),
            };
            let mut failures = Vec::new();
            let mut reports = Vec::new();
            let mut runs = 0;
            for e in entries {
                for (raw, env) in e.samples.iter().zip(cat.samples(e, f)?) {
                    runs += 1;
                    match cat.verify_entry(e, &env, f) {
                        Ok(r) => {
                            if !r.passed() {
                                let names: Vec<&str> = r.failed().iter().map(|c| c.name.as_str()).collect();
                                println!("FAIL {} {raw:?}: {}", e.label, names.join(", "));
                                failures.push(json!({ "entry": e.label, "sample": raw, "failed": names }));
                            }
                            reports.push(r);
                        }
                        Err(err) => {
                            println!("FAIL {} {raw:?}: {err}", e.label);
                            failures.push(json!({ "entry": e.label, "sample": raw, "error": err.to_string() }));
                        }
                    }
                }
            }
            println!("{runs} samples, {} failing; predicates: {}", failures.len(), PREDICATES.join(", "));
            if bases {
                let mut rng = StdRng::seed_from_u64(seed);
                for b in cat.bases.values() {
                    for r in verify_aut_shapes(b, f, trials, &mut rng)? {
                        if !r.ok() {
                            println!("FAIL aut shape of {}: {r:?}", b.label);
                            failures.push(json!({ "aut_shape": b.label }));
                        }
                    }
                    if let Some(r) = verify_alpha_star(b, f, trials, &mut rng)? {
                        if !r.mismatches.is_empty() {
                            println!("FAIL transformation formulas of {}: {} mismatches", b.label, r.mismatches.len());
                            failures.push(json!({ "alpha_star": b.label, "mismatches": r.mismatches.len() }));
                        }
                    }
                }
            }
            Ok((failures.is_empty(), json!({ "field": f.tag(), "failures": failures, "reports": reports })))
        }
        Command::Census => {
            let cat = ctx.catalog()?;
            let c = cat.census();
            let claim = &cat.notes.census_claim;
            let got = c.dense(claim.by_arity.len());
            let words = ["rigid", "one-parameter", "two-parameter", "three-parameter", "four-parameter"];
            let parts: Vec<String> = got.iter().enumerate().map(|(k, n)| format!("{n} {}", words.get(k).unwrap_or(&"more"))).collect();
            println!("{} entries: {}", c.total, parts.join(", "));
            let ok = c.total == claim.total && got == claim.by_arity;
            if !ok {
                println!("differs from the stated census {} / {:?}", claim.total, claim.by_arity);
            }
            Ok((ok, json!({ "total": c.total, "by_arity": got, "claim": claim })))
        }
        Command::OrbitsFp { base, args, p, s, crosscheck: cross } => {
            let f = Field::Fp(p);
            let env = parse_args(&args, f)?;
            let opts = ctx.opts.clone();
            let cat = ctx.catalog()?;
            if cross {
                let r = crosscheck(cat, &base, &env, p, s, &opts)?;
                println!("{}: dim H2 {}, {} points, {} in T_s, |Aut| = {}", r.base, r.h2_dim, r.points, r.ts_points, r.aut_order);
                for c in &r.classes {
                    println!("  class {} (orbit {}): {} <- {}", c.index, c.orbit_size, c.table, c.matches.join(", "));
                }
                for name in r.unmatched_specializations() {
                    println!("  unmatched specialization: {name}");
                }
                for sk in &r.skipped {
                    println!("  skipped {}: {}", sk.name, sk.reason);
                }
                let ok = r.ok();
                println!("unmatched classes: {:?}; correspondence {}", r.unmatched_classes(), if ok { "holds" } else { "fails" });
                return Ok((ok, serde_json::to_value(&r)?));
            }
            let b = cat.base(&base)?;
            b.check_args(&env, f)?;
            let alg = b.algebra(&env, f)?;
            let r = run_procedure_fp(&alg, s, &opts)?;
            println!("dim H2 {}, {} points, {} in T_s, |Aut| = {}, {} classes", r.h2_dim, r.points, r.ts_points, r.aut_order, r.classes.len());
            let classes: Vec<Value> = r
                .classes
                .iter()
                .map(|c| {
                    println!("  orbit {}: {}", c.orbit_size, c.algebra.describe());
                    json!({ "orbit_size": c.orbit_size, "algebra": c.algebra.to_doc() })
                })
                .collect();
            Ok((true, json!({ "h2": r.h2_dim, "points": r.points, "ts_points": r.ts_points, "aut_order": r.aut_order, "classes": classes })))
        }
        Command::Fmt { path, write, check } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let canon = serde_json::to_string_pretty(&v)? + "\n";
            if check {
                let same = canon == text;
                if !same {
                    println!("{} is not canonical", path.display());
                }
                return Ok((same, Value::Null));
            }
            if write {
                std::fs::write(&path, &canon).with_context(|| format!("writing {}", path.display()))?;
            } else {
                print!("{canon}");
            }
            Ok((true, Value::Null))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let field = match g.field.as_deref().map(str::parse::<Field>) {
        None => None,
        Some(Ok(f)) => Some(f),
        Some(Err(e)) => {
            eprintln!("error: --field: {e}");
            return ExitCode::from(2);
        }
    };
    if g.jobs > 0 {
        // read by the rayon pool on first use
        std::env::set_var("RAYON_NUM_THREADS", g.jobs.to_string());
    }
    let opts = SearchOptions { height: g.height, budget: g.budget, jobs: g.jobs };
    let mut ctx = Ctx { field, opts, seed: g.seed, catalog: None };
    match run(cli.command, &mut ctx) {
        Ok((ok, report)) => {
            if let Some(path) = g.report {
                let text = serde_json::to_string_pretty(&report).expect("json values serialize") + "\n";
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            // library errors already embed their source text
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
