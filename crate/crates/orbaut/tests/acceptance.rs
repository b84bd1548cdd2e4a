//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use orbaut::abelian::structure_name;
use orbaut::affine::default_dictionary_data;
use orbaut::codeaut::binary::{equivalence, reed_muller, weight_enumerator};
use orbaut::codeaut::DEFAULT_BUDGET;
use orbaut::data::DataSet;
use orbaut::niemeier::{build, g2_group, minus_one_outside_weyl, parse_glue_data, GlueCode, GLUE_DATA};
use orbaut::orbifold::Context;
use orbaut::rootdata::{catalog, close_permutations, diagram_discriminant_action, parse_root_system, RootType};

const TABLE1: [&str; 14] = [
    "A2^12", "A3^8", "A4^6", "A5^4D4", "A6^4", "A7^2D5^2", "A8^3", "A9^2D6", "E6^4", "A11D7E6", "A12^2", "A15D9",
    "A17E7", "A24",
];

const G2_ORDERS: [u128; 14] = [95040, 1344, 120, 24, 12, 4, 6, 2, 24, 1, 2, 1, 1, 1];

const KV_ORDERS: [u128; 14] = [2, 32, 2, 32, 2, 8, 2, 16, 2, 4, 2, 4, 8, 2];

const AUT_ORDERS: [(&str, u128, u128); 7] = [
    ("A3^8", 1, 322560),
    ("A5^4D4", 2, 96),
    ("A7^2D5^2", 1, 48),
    ("A9^2D6", 2, 4),
    ("A11D7E6", 1, 2),
    ("A15D9", 1, 2),
    ("A17E7", 2, 1),
];

const BUILD_LIMIT: Duration = Duration::from_secs(10);
const PREDICATE_LIMIT: Duration = Duration::from_secs(1);
const G2_A2_12_LIMIT: Duration = Duration::from_secs(300);
const G2_LIMIT: Duration = Duration::from_secs(10);
const FIREWALL_LIMIT: Duration = Duration::from_secs(5);
const CN_LIMIT: Duration = Duration::from_secs(30);
const RM_AUT_LIMIT: Duration = Duration::from_secs(600);
const AUT_LIMIT: Duration = Duration::from_secs(60);
const TABLE1_LIMIT: Duration = Duration::from_secs(1200);
const MUTATIONS: usize = 20;
const TRANSPORTER_BUDGET: u64 = 10_000_000;
const MUTATION_SEED: u64 = 0x5eed_0f61;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e <= limit, || format!("{what} took {e:?} > {limit:?}"))?;
    Ok(e)
}

fn codes() -> Vec<GlueCode> {
    parse_glue_data(GLUE_DATA).expect("shipped glue data parses")
}

fn context() -> Context {
    Context::load(&DataSet::default()).expect("shipped data loads")
}

fn expected_roots(c: &GlueCode) -> usize {
    c.components.iter().map(|t| t.root_count()).sum()
}

/// Criterion 1 on a set of records: builds, rank 24, even unimodular, root counts.
fn niemeier_check(codes: &[GlueCode]) -> Result<(), String> {
    ensure(codes.len() == 24, || format!("{} records", codes.len()))?;
    record_check(codes)
}

fn record_check(codes: &[GlueCode]) -> Result<(), String> {
    for c in codes {
        let n = build(c).map_err(|e| e.to_string())?;
        ensure(n.lattice.rank() == 24, || format!("{}: rank {}", c.name, n.lattice.rank()))?;
        ensure(n.decomposition.total_roots == expected_roots(c), || format!("{}: root count", c.name))?;
    }
    Ok(())
}

fn c1() -> Outcome {
    let t = Instant::now();
    let codes = codes();
    niemeier_check(&codes)?;
    let e = within(t, BUILD_LIMIT, "building")?;
    Ok(format!("24 lattices even unimodular of rank 24 with expected root counts ({e:.1?})"))
}

fn c2() -> Outcome {
    let lattices: Vec<_> = codes().iter().map(|c| build(c).unwrap()).collect();
    let t = Instant::now();
    let flagged: HashSet<String> =
        lattices.iter().filter(|n| minus_one_outside_weyl(n)).map(|n| n.name().to_string()).collect();
    let e = within(t, PREDICATE_LIMIT, "predicate")?;
    let expected: HashSet<String> = TABLE1.iter().map(|s| s.to_string()).collect();
    ensure(flagged == expected, || format!("flagged {flagged:?}"))?;
    Ok(format!("14 flagged, 10 not ({e:.1?})"))
}

fn c3() -> Outcome {
    let codes = codes();
    let mut slowest = Duration::ZERO;
    for (name, order) in TABLE1.iter().zip(G2_ORDERS) {
        let n = build(codes.iter().find(|c| c.name == *name).unwrap()).unwrap();
        let t = Instant::now();
        let g2 = g2_group(&n, DEFAULT_BUDGET).map_err(|e| format!("{name}: {e}"))?;
        let limit = if *name == "A2^12" { G2_A2_12_LIMIT } else { G2_LIMIT };
        let e = within(t, limit, name)?;
        if *name != "A2^12" {
            slowest = slowest.max(e);
        }
        ensure(g2.order == order, || format!("{name}: |G2| = {} expected {order}", g2.order))?;
    }
    Ok(format!("all 14 G2 orders match (slowest besides A2^12: {slowest:.1?})"))
}

fn c4() -> Outcome {
    let t = Instant::now();
    let data = default_dictionary_data().map_err(|e| e.to_string())?;
    let mut types: Vec<RootType> = TABLE1.iter().flat_map(|n| parse_root_system(n).unwrap()).collect();
    types.sort();
    types.dedup();
    for rt in &types {
        data.dictionary(*rt).map_err(|e| format!("{rt}: {e}"))?;
    }
    let e = within(t, FIREWALL_LIMIT, "firewall")?;
    Ok(format!("{} component dictionaries consistent ({e:.1?})", types.len()))
}

fn c5() -> Outcome {
    let ctx = context();
    let t = Instant::now();
    for name in TABLE1 {
        let o = ctx.orbifold(name).map_err(|e| e.to_string())?;
        let img = o.glue_image().map_err(|e| e.to_string())?;
        let comps = o.lattice.components().len() as u32;
        let expected = img.n0.len() as u128 * 2u128.pow(comps - 1);
        ensure(img.order() as u128 == expected, || format!("{name}: |C_N| = {} expected {expected}", img.order()))?;
        if let Some(case) = ctx.cases.get(name) {
            for (w, line) in &case.generators {
                ensure(img.contains(w), || format!("{name}: listed generator {w:?} (cases.txt:{line}) missing"))?;
            }
        }
        match name {
            "A3^8" => {
                ensure(img.order() == 2048, || "A3^8 order".into())?;
                let words = img.binary_words().ok_or("A3^8 image not binary")?;
                let rm = reed_muller(2, 4);
                ensure(weight_enumerator(&words, 16) == weight_enumerator(&rm, 16), || "RM(2,4) enumerator".into())?;
                ensure(equivalence(&words, &rm, 16).is_some(), || "no permutation onto RM(2,4)".into())?;
            }
            "A17E7" => ensure(img.order() == 4, || "A17E7 order".into())?,
            _ => {}
        }
    }
    let e = within(t, CN_LIMIT, "C_N")?;
    Ok(format!("14 glue images with listed generators and expected orders; A3^8 = RM(2,4) ({e:.1?})"))
}

fn c6() -> Outcome {
    let ctx = context();
    let mut parts = Vec::new();
    for (name, a1, a2) in AUT_ORDERS {
        let o = ctx.orbifold(name).map_err(|e| e.to_string())?;
        let img = o.glue_image().map_err(|e| e.to_string())?;
        let t = Instant::now();
        let aut = o.aut_cn(&img, DEFAULT_BUDGET).map_err(|e| format!("{name}: {e}"))?;
        let e = within(t, if name == "A3^8" { RM_AUT_LIMIT } else { AUT_LIMIT }, name)?;
        ensure((aut.aut1_order, aut.aut2_order) == (a1, a2), || {
            format!("{name}: Aut1 {} Aut2 {}, expected {a1} and {a2}", aut.aut1_order, aut.aut2_order)
        })?;
        parts.push(format!("{name} {a1}x{a2} {e:.1?}"));
    }
    Ok(parts.join(", "))
}

fn c7() -> Outcome {
    let ctx = context();
    for (name, order) in TABLE1.iter().zip(KV_ORDERS) {
        let o = ctx.orbifold(name).map_err(|e| e.to_string())?;
        let inv = o.weight_inventory().map_err(|e| e.to_string())?;
        let kv = o.compute_kv(&ctx.kv[*name], &inv).map_err(|e| e.to_string())?;
        ensure(kv.order == order, || format!("{name}: |K(V)| = {} expected {order}", kv.order))?;
        ensure(kv.order == kv.expected_order, || format!("{name}: 2af = {}", kv.expected_order))?;
        let golden = ctx.golden_row(name).ok_or("missing golden row")?;
        let found = structure_name(&kv.factors);
        ensure(found == golden.kv, || format!("{name}: K(V) {found} expected {}", golden.kv))?;
    }
    Ok("14 K(V) orders, invariant factors and 2af cross-checks match".into())
}

fn c8() -> Outcome {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_orbaut"))
        .args(["table1", "--validate"])
        .env_remove(orbaut::data::DATA_ENV)
        .output()
        .map_err(|e| e.to_string())?;
    let e = within(t, TABLE1_LIMIT, "table1")?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rows = stdout.lines().count();
    ensure(out.status.success(), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).trim())
    })?;
    ensure(rows == 14, || format!("{rows} rows"))?;
    Ok(format!("table1 --validate exit 0 with 14 rows ({e:.1?})"))
}

fn c9() -> Outcome {
    let ctx = context();
    let mut parts = Vec::new();
    for (name, _, _) in AUT_ORDERS {
        let o = ctx.orbifold(name).map_err(|e| e.to_string())?;
        let img = o.glue_image().map_err(|e| e.to_string())?;
        let aut = o.aut_cn(&img, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let rep = o.check_witnesses(ctx.cases.get(name), &img, &aut, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        for c in &rep.checks {
            ensure(c.stabilizes && c.satisfied, || format!("{name}: witness {} ({}) fails", c.u, c.expect))?;
        }
        let allowed = usize::from(name == "A3^8" || name == "A7^2D5^2");
        ensure(rep.extra_generators <= allowed, || format!("{name}: {} extra generators", rep.extra_generators))?;
        ensure(rep.full_order == aut.order, || format!("{name}: full order {}", rep.full_order))?;
        parts.push(format!("{name} +{}", rep.extra_generators));
    }
    Ok(format!("witnesses stabilize, act as stated and generate Aut(C_N) ({})", parts.join(", ")))
}

/// A glue label token in the shipped data: line, token position, and the
/// number of labels its component admits.
struct Site {
    line: usize,
    token: usize,
    labels: u32,
}

fn glue_sites() -> Vec<Site> {
    let mut out = Vec::new();
    let mut components: Vec<RootType> = Vec::new();
    for (line, l) in GLUE_DATA.lines().enumerate() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.first() {
            Some(&"lattice") => components.clear(),
            Some(&"components") => components = toks[1..].iter().flat_map(|t| parse_root_system(t).unwrap()).collect(),
            Some(&"glue") => {
                for token in 1..toks.len() {
                    let labels = components.get(token - 1).map_or(2, |t| catalog(*t).label_count());
                    out.push(Site { line, token, labels });
                }
            }
            _ => {}
        }
    }
    out
}

fn mutate(site: &Site, value: u32) -> (String, u32) {
    let mut old = 0;
    let lines: Vec<String> = GLUE_DATA
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i != site.line {
                return l.to_string();
            }
            let mut toks: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            let t = &toks[site.token];
            let digits: String = t.chars().filter(char::is_ascii_digit).collect();
            old = digits.parse().unwrap();
            toks[site.token] = t.replace(&digits, &value.to_string());
            toks.join(" ")
        })
        .collect();
    (lines.join("\n") + "\n", old)
}

fn same_span(a: &GlueCode, b: &GlueCode) -> bool {
    if a.is_leech() {
        return a.generators == b.generators;
    }
    let (Some(wa), Some(wb)) = (code_words(a), code_words(b)) else {
        return false;
    };
    let sa: HashSet<Vec<u32>> = wa.into_iter().collect();
    sa.len() == wb.len() && wb.iter().all(|w| sa.contains(w))
}

fn code_words(c: &GlueCode) -> Option<Vec<Vec<u32>>> {
    Some(c.code().ok()?.elements().iter().map(|x| c.labels(x)).collect())
}

/// Depth-first search for a slot permutation plus per-slot diagram maps
/// carrying the words of `from` onto those of `to`. Partial images are
/// compared as multisets of projections.
struct Transporter {
    types: Vec<RootType>,
    local: Vec<Vec<Vec<u32>>>,
    from: Vec<Vec<u32>>,
    to: Vec<Vec<u32>>,
    nodes: u64,
}

impl Transporter {
    fn search(&mut self, slot: usize, used: &mut Vec<bool>, src: &[u128], dst: &[u128]) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > TRANSPORTER_BUDGET {
            return None;
        }
        let t = self.types.len();
        if slot == t {
            return Some(true);
        }
        let radix = self.types[slot].det() as u128;
        for target in 0..t {
            if used[target] || self.types[target] != self.types[slot] {
                continue;
            }
            for g in 0..self.local[slot].len() {
                let map = &self.local[slot][g];
                let a: Vec<u128> =
                    src.iter().zip(&self.from).map(|(k, w)| k * radix + map[w[slot] as usize] as u128).collect();
                let b: Vec<u128> = dst.iter().zip(&self.to).map(|(k, w)| k * radix + w[target] as u128).collect();
                let mut sa = a.clone();
                let mut sb = b.clone();
                sa.sort_unstable();
                sb.sort_unstable();
                if sa != sb {
                    continue;
                }
                used[target] = true;
                let r = self.search(slot + 1, used, &a, &b);
                used[target] = false;
                if r != Some(false) {
                    return r;
                }
            }
        }
        Some(false)
    }
}

/// Whether two records with the same components glue to isometric lattices
/// through an isometry preserving the root sublattice.
fn equivalent(a: &GlueCode, b: &GlueCode) -> Result<bool, String> {
    let types = a.components.clone();
    let local = types.iter().map(|t| close_permutations(t.det() as usize, &diagram_discriminant_action(*t))).collect();
    let (Some(from), Some(to)) = (code_words(b), code_words(a)) else {
        return Ok(false);
    };
    if from.len() != to.len() {
        return Ok(false);
    }
    let n = from.len();
    let mut tr = Transporter { types, local, from, to, nodes: 0 };
    let mut used = vec![false; a.components.len()];
    tr.search(0, &mut used, &vec![0; n], &vec![0; n]).ok_or_else(|| format!("{}: transporter budget exceeded", a.name))
}

fn c10() -> Outcome {
    let original = codes();
    let sites = glue_sites();
    let mut rng = StdRng::seed_from_u64(MUTATION_SEED);
    let (mut caught, mut noop, mut relabel) = (0, 0, 0);
    while caught < MUTATIONS {
        ensure(noop + relabel <= 10 * MUTATIONS, || "too many harmless mutations".into())?;
        let site = &sites[rng.gen_range(0..sites.len())];
        let current = mutate(site, 0).1;
        let mut value = rng.gen_range(0..site.labels - 1);
        if value >= current {
            value += 1;
        }
        let (text, _) = mutate(site, value);
        let what = format!("glue.txt:{} token {} {current}->{value}", site.line + 1, site.token);
        let Ok(mutated) = parse_glue_data(&text) else {
            caught += 1;
            continue;
        };
        let changed: Vec<(&GlueCode, &GlueCode)> =
            original.iter().zip(&mutated).filter(|(a, b)| a.generators != b.generators).collect();
        if changed.iter().all(|(a, b)| same_span(a, b)) {
            noop += 1;
            continue;
        }
        let records: Vec<GlueCode> = changed.iter().map(|(_, b)| (*b).clone()).collect();
        if record_check(&records).is_err() {
            caught += 1;
            continue;
        }
        // still a valid record: it must be an isometric relabeling of the original
        for (a, b) in &changed {
            ensure(equivalent(a, b)?, || format!("{what} passes criterion 1 with an inequivalent glue code"))?;
        }
        relabel += 1;
    }
    Ok(format!(
        "{caught} random single-label mutations break criterion 1 \
         ({noop} leave the code unchanged, {relabel} give a certified isometric relabeling)"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "Niemeier validation", c1),
        (2, "-1 outside the Weyl group", c2),
        (3, "G2 orders", c3),
        (4, "dictionary firewall", c4),
        (5, "C_N generators and orders", c5),
        (6, "Aut(C_N) orders", c6),
        (7, "K(V)", c7),
        (8, "summary table end to end", c8),
        (9, "witnesses", c9),
        (10, "mutation robustness", c10),
    ];
    let mut failed = 0;
    for (n, title, f) in criteria {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match r {
            Ok(detail) => println!("PASS criterion {n:>2} {title}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {title}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
