//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failures are reported, and the process exits 0 so the rest of the suite
//! still runs. Set NOVIKOV_ACCEPTANCE_STRICT=1 to exit 1 on any FAIL.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use novikov::algebra::combine;
use novikov::catalog::{find_witness, h2_report, verify_alpha_star, BaseRecord, Catalog, EntryRecord, EntryReport};
use novikov::cohomology::{cocycle_space, in_ts, Cocycle};
use novikov::expr::{env_from_strings, Env};
use novikov::extensions::{extension_annihilator_law, extension_is_novikov_iff, reconstruct};
use novikov::fplab::crosscheck;
use novikov::morphisms::{iso_search, IsoVerdict, SearchOptions};
use novikov::{Elem, Field};
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn outcome(pass: bool, summary: impl Into<String>, details: Vec<String>) -> Outcome {
    Outcome { pass, summary: summary.into(), details }
}

/// Printed H² class counts. N^4 rows are compared with their printed lists.
const H2_COUNTS: [(&str, usize); 21] = [
    ("frakN_01", 10),
    ("frakN_02", 6),
    ("frakN_03", 8),
    ("frakN_04", 8),
    ("frakN_04_0", 10),
    ("frakN_05", 8),
    ("frakN_06", 8),
    ("frakN_07", 6),
    ("frakN_08", 6),
    ("frakN_08_1", 7),
    ("frakN_12", 6),
    ("frakN_13", 6),
    ("frakN_14", 6),
    ("frakN_14_0", 7),
    ("frakN_14_1", 6),
    ("frakN_15", 8),
    ("N3s_01", 5),
    ("N3s_02", 3),
    ("N3s_03", 3),
    ("N3s_04", 3),
    ("N3s_04_0", 5),
];

/// Rows whose printed generator lists carry duplicated entries.
const DUPLICATE_ROWS: [&str; 4] = ["frakN_09", "frakN_10", "frakN_11", "frakN_15"];

fn sample_envs(b: &BaseRecord, rng: &mut StdRng, n: usize) -> Vec<Env> {
    if b.params.is_empty() {
        vec![Env::new()]
    } else {
        (0..n).map(|_| b.random_args(Field::Q, &[], rng)).collect()
    }
}

fn criterion_1(cat: &Catalog) -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let expected: BTreeMap<&str, usize> = H2_COUNTS.into_iter().collect();
    let mut bad = Vec::new();
    let mut details = Vec::new();
    let mut checked = 0;
    for b in cat.bases.values() {
        let want = match expected.get(b.label.as_str()) {
            Some(&w) => Some(w),
            None if b.label.starts_with("N4_") => Some(b.h2.len()),
            None => None,
        };
        for env in sample_envs(b, &mut rng, 3) {
            let r = h2_report(b, &env, Field::Q).expect("admissible parameters");
            if DUPLICATE_ROWS.contains(&b.label.as_str()) {
                details.push(format!(
                    "{}: {} printed rows, {} distinct, computed dim H² = {}",
                    b.label, r.printed, r.distinct, r.computed
                ));
            }
            if let Some(w) = want {
                checked += 1;
                if r.computed != w {
                    bad.push(format!("{} at {env:?}: computed {} printed {w}", b.label, r.computed));
                }
            }
        }
    }
    details.dedup();
    let pass = bad.is_empty();
    details.extend(bad);
    outcome(pass, format!("{checked} base/parameter points compared"), details)
}

fn criterion_2(cat: &Catalog) -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut bad = Vec::new();
    let mut n = 0;
    for b in cat.bases.values() {
        for env in sample_envs(b, &mut rng, 3) {
            let r = h2_report(b, &env, Field::Q).expect("admissible parameters");
            n += r.printed;
            if !r.independent() {
                bad.push(format!(
                    "{}: non-cocycles {:?}, rank {} of {} distinct",
                    b.label, r.non_cocycles, r.rank, r.distinct
                ));
            }
        }
    }
    outcome(bad.is_empty(), format!("{n} printed generators"), bad)
}

fn criterion_3(cat: &Catalog) -> Outcome {
    let census = cat.census();
    let claim = &cat.notes.census_claim;
    let got = census.dense(claim.by_arity.len());
    let pass = census.total == claim.total && got == claim.by_arity;
    outcome(
        pass,
        format!("{} entries, by arity {:?}; claimed {} with {:?}", census.total, got, claim.total, claim.by_arity),
        vec![],
    )
}

fn criterion_4(cat: &Catalog) -> Outcome {
    let mut details = Vec::new();
    let mut runs = 0;
    let mut failing = 0;
    for e in &cat.entries {
        for p in &e.params {
            let distinct: std::collections::BTreeSet<&String> = e.samples.iter().map(|s| &s[p]).collect();
            if distinct.len() < 3 {
                details.push(format!("{}: only {} samples for {p}", e.label, distinct.len()));
                failing += 1;
            }
        }
        for (raw, env) in e.samples.iter().zip(cat.samples(e, Field::Q).expect("samples parse")) {
            runs += 1;
            match cat.verify_entry(e, &env, Field::Q) {
                Ok(r) if r.passed() => {}
                Ok(r) => {
                    failing += 1;
                    let why: Vec<String> = r.failed().iter().map(|c| format!("{} ({})", c.name, c.detail)).collect();
                    details.push(format!("{} {raw:?}: {}", e.label, why.join("; ")));
                }
                Err(err) => {
                    failing += 1;
                    details.push(format!("{} {raw:?}: {err}", e.label));
                }
            }
        }
    }
    let mut exceptional_ok = 0;
    for ex in &cat.notes.exceptional {
        let e = cat.entry(&ex.entry.label).expect("noted entry exists");
        let g = cat.generate_instance(&ex.entry, Field::Q, false).expect("noted instance generates");
        let env = env_from_strings(&ex.entry.args, Field::Q).expect("numeric arguments");
        let report = EntryReport::build(e, &env, Field::Q, &g);
        let failed = report.failed_predicates();
        if failed == vec![ex.fails.as_str()] {
            exceptional_ok += 1;
        } else {
            failing += 1;
            details.push(format!("{}: predicted to fail only {}, fails {failed:?}", ex.entry, ex.fails));
        }
    }
    outcome(
        failing == 0,
        format!(
            "{runs} entry samples, {} exceptional specializations ({exceptional_ok} as predicted)",
            cat.notes.exceptional.len()
        ),
        details,
    )
}

fn criterion_5(cat: &Catalog) -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut details = Vec::new();
    let mut pass = true;
    for label in ["frakN_01", "frakN_02", "frakN_07"] {
        let base = cat.base(label).expect("base exists");
        match verify_alpha_star(base, Field::Q, 100, &mut rng) {
            Ok(Some(r)) => {
                if !r.mismatches.is_empty() {
                    pass = false;
                    details.push(format!("{label}: {} mismatches, first {:?}", r.mismatches.len(), r.mismatches[0]));
                }
            }
            Ok(None) => {
                pass = false;
                details.push(format!("{label}: no printed formulas"));
            }
            Err(err) => {
                pass = false;
                details.push(format!("{label}: {err}"));
            }
        }
    }
    outcome(pass, "3 bases, 100 random points each", details)
}

fn criterion_6(cat: &Catalog) -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let f = Field::Q;
    let mut bad = Vec::new();
    let mut members = 0;
    let mut pairs = 0;
    for b in cat.bases.values() {
        for _ in 0..500 {
            let env = b.random_args(f, &[], &mut rng);
            let a = b.algebra(&env, f).expect("admissible parameters");
            let n = a.dim();
            let s = rng.gen_range(1..=2);
            let comps: Vec<Vec<Elem>> = if rng.gen_bool(0.5) {
                let basis = cocycle_space(&a).basis_vectors();
                (0..s)
                    .map(|_| {
                        let c: Vec<Elem> = basis.iter().map(|_| Elem::random(f, &mut rng)).collect();
                        combine(f, n * n, &c, &basis)
                    })
                    .collect()
            } else {
                (0..s).map(|_| (0..n * n).map(|_| Elem::random(f, &mut rng)).collect()).collect()
            };
            let theta = Cocycle::unchecked(f, n, comps).expect("n² components");
            pairs += 1;
            let (novikov, member) = extension_is_novikov_iff(&a, &theta).expect("dimensions agree");
            members += member as usize;
            if novikov != member {
                bad.push(format!("{}: Novikov {novikov}, in Z² {member}", b.label));
            }
            let (got, want) = extension_annihilator_law(&a, &theta).expect("dimensions agree");
            if got != want {
                bad.push(format!("{}: Ann {} vs law {}", b.label, got.dim(), want.dim()));
            }
        }
    }
    outcome(bad.is_empty(), format!("{pairs} pairs over {} bases, {members} in Z²", cat.bases.len()), bad)
}

/// All F_5 specializations of an entry that are valid members of T_s,
/// preferring the curated samples.
fn f5_specializations(cat: &Catalog, e: &EntryRecord) -> Vec<(String, novikov::catalog::Generated)> {
    let f = Field::Fp(5);
    let keep = |env: &Env| {
        let g = cat.generate(e, env, f).ok()?;
        in_ts(&g.base, &g.cocycle).ok()?.then_some(g)
    };
    let mut out = Vec::new();
    for raw in &e.samples {
        if let Ok(env) = env_from_strings(raw, f) {
            if let Some(g) = keep(&env) {
                out.push((format!("{raw:?}"), g));
            }
        }
    }
    if out.is_empty() && !e.params.is_empty() {
        let mut envs = vec![Env::new()];
        for p in &e.params {
            envs = envs
                .into_iter()
                .flat_map(|env| {
                    (0..5).map(move |v| {
                        let mut x = env.clone();
                        x.insert(p.clone(), Elem::from_int(f, v));
                        x
                    })
                })
                .collect();
        }
        if let Some((env, g)) = envs.into_iter().find_map(|env| keep(&env).map(|g| (env, g))) {
            out.push((format!("{env:?}"), g));
        }
    }
    out
}

fn criterion_7(cat: &Catalog) -> Outcome {
    let opts = SearchOptions::default();
    let mut bad = Vec::new();
    let mut trips = 0;
    for e in &cat.entries {
        let specs = f5_specializations(cat, e);
        if specs.is_empty() {
            bad.push(format!("{}: no specialization over F_5 with Ann(θ) ∩ Ann(A) = 0", e.label));
            continue;
        }
        for (name, g) in specs {
            trips += 1;
            let r = match reconstruct(&g.algebra) {
                Ok(r) => r,
                Err(err) => {
                    bad.push(format!("{} {name}: {err}", e.label));
                    continue;
                }
            };
            let ok = r.base.dim() == g.base.dim()
                && matches!(iso_search(&r.base, &g.base, &opts), Ok(IsoVerdict::Isomorphic(_)));
            if !ok {
                bad.push(format!("{} {name}: recovered base is not isomorphic", e.label));
            }
        }
    }
    outcome(bad.is_empty(), format!("{trips} round trips over {} entries", cat.entries.len()), bad)
}

fn criterion_8(cat: &Catalog) -> Outcome {
    let opts = SearchOptions::default();
    let mut details = Vec::new();
    let mut pass = true;
    let noted: Vec<_> = cat.notes.isomorphisms.iter().filter(|n| n.acceptance).collect();
    for n in &noted {
        let a = cat.generate_instance(&n.left, Field::Q, false).expect("noted instance generates");
        let b = cat.generate_instance(&n.right, Field::Q, false).expect("noted instance generates");
        let w = find_witness(&a.algebra, &b.algebra, &opts, &[5]);
        let over = w.field.map_or("none".to_string(), |f| f.to_string());
        details.push(format!("{} ≅ {}: verified {} over {over}", n.left, n.right, w.verified));
        pass &= w.verified;
    }
    pass &= noted.len() == 5;
    outcome(pass, format!("{} noted isomorphisms", noted.len()), details)
}

fn criterion_9(cat: &Catalog) -> Outcome {
    let opts = SearchOptions::default();
    let runs: [(&str, Option<i64>, u64); 6] = [
        ("N3s_01", None, 3),
        ("N3s_02", None, 3),
        ("N3s_03", None, 3),
        ("N3s_04", Some(1), 3),
        ("N3s_04", Some(2), 3),
        ("N3s_04_0", None, 3),
    ];
    let runs = runs.into_iter().chain([("frakN_01", None, 2)]);
    let mut details = Vec::new();
    let mut pass = true;
    for (base, lambda, p) in runs {
        let env: Env = lambda.map(|l| ("lambda".to_string(), Elem::from_int(Field::Fp(p), l))).into_iter().collect();
        match crosscheck(cat, base, &env, p, 1, &opts) {
            Ok(r) => {
                details.push(format!(
                    "{} over F_{p}: {} classes, {} specializations, {} skipped; unmatched classes {:?}, unmatched specializations {:?}",
                    r.base,
                    r.classes.len(),
                    r.specializations.len(),
                    r.skipped.len(),
                    r.unmatched_classes().iter().map(|&i| r.classes[i].table.clone()).collect::<Vec<_>>(),
                    r.unmatched_specializations()
                ));
                pass &= r.ok();
            }
            Err(err) => {
                details.push(format!("{base}: {err}"));
                pass = false;
            }
        }
    }
    outcome(pass, "7 base instances", details)
}

type Criterion = (u32, &'static str, Duration, fn(&Catalog) -> Outcome);

fn main() {
    let cat = Catalog::load_default().expect("catalog loads");
    let criteria: [Criterion; 9] = [
        (1, "H2 dimension table", Duration::from_secs(10), criterion_1),
        (2, "printed generators are independent cocycles", Duration::from_secs(10), criterion_2),
        (3, "census", Duration::MAX, criterion_3),
        (4, "membership suite", Duration::from_secs(120), criterion_4),
        (5, "transformation formulas", Duration::MAX, criterion_5),
        (6, "extension laws", Duration::MAX, criterion_6),
        (7, "reconstruct round trip over F_5", Duration::from_secs(300), criterion_7),
        (8, "noted isomorphisms", Duration::MAX, criterion_8),
        (9, "F_p pipeline cross-check", Duration::from_secs(600), criterion_9),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let t = Instant::now();
        let o = run(&cat);
        let took = t.elapsed();
        let in_time = took <= limit;
        let pass = o.pass && in_time;
        failed += !pass as usize;
        for d in &o.details {
            println!("    {d}");
        }
        let timing = if limit == Duration::MAX {
            format!("{took:.2?}")
        } else {
            format!("{took:.2?}, limit {limit:?}")
        };
        println!("criterion {n} {}: {name}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, o.summary);
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed > 0 && std::env::var_os("NOVIKOV_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
