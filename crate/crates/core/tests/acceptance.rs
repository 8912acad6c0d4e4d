//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod support;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use arrayeq::addg::reduce_intermediate;
use arrayeq::checker::PieceStatus;
use arrayeq::oracle::{differential_test, run, DiffConfig, DiffOutcome, Inputs};
use arrayeq::relation::{Conjunct, Constraint};
use arrayeq::{
    check_equivalence, check_sources, parse, parse_with_overrides, Addg, Budget, CheckConfig, IntRelation,
    IntTupleSpace, LinExpr, Verdict,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use support::{emit, generate, mutate, transform, Rng8, MUTATIONS, TRANSFORMS};

const TIME_LIMIT: Duration = Duration::from_secs(10);
const ORACLE_TRIALS: usize = 100;
const ORACLE_NS: [i64; 3] = [4, 8, 16];
const REFLEXIVITY_PROGRAMS: usize = 200;
const METAMORPHIC_CASES: usize = 400;
const METAMORPHIC_MIN_EQUIVALENT: f64 = 0.95;
const MUTATION_POPULATION: usize = 300;
const MUTATION_MAX_ATTEMPTS: usize = 5000;
const MUTATION_MIN_INEQUIVALENT: f64 = 0.95;
const RELATION_CASES: usize = 1000;
const REL_BOUND: i64 = 32;
const SEED: u64 = 20240611;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn graph(name: &str) -> Addg {
    Addg::build(&parse(&fixture(name)).unwrap()).unwrap()
}

fn rel(s: &str) -> IntRelation {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (x, y) in [("fig1a.c", "fig1b.c"), ("fig1a.c", "fig1c.c"), ("fig1b.c", "fig1c.c")] {
        let (sx, sy) = (fixture(x), fixture(y));
        let t = Instant::now();
        let r = check_sources(x, &sx, y, &sy, &CheckConfig::default());
        let dt = t.elapsed();
        ensure(r.verdict == "Equivalent", format!("{x} vs {y}: {} {:?}", r.verdict, r.reason))?;
        ensure(dt < TIME_LIMIT, format!("{x} vs {y} took {dt:?}"))?;
        notes.push(format!("{}/{} {:.0} ms", &x[4..5], &y[4..5], dt.as_secs_f64() * 1e3));
    }
    Ok(format!("{} (limit {:?} each)", notes.join(", "), TIME_LIMIT))
}

fn criterion_2() -> Outcome {
    let r = check_equivalence(&graph("fig1a.c"), &graph("fig1d.c"), &CheckConfig::default());
    let Verdict::Inequivalent(diags) = &r.verdict else {
        return Err(format!("verdict {:?}", r.verdict.name()));
    };
    // path names: p..s are paths 1..4 of (a); w..z are paths 1..4 of (d)
    let name_a = |n: usize| ["p", "q", "r", "s"].get(n.wrapping_sub(1)).copied().unwrap_or("?");
    let name_d = |n: usize| ["w", "x", "y", "z"].get(n.wrapping_sub(1)).copied().unwrap_or("?");
    let failing: BTreeSet<(&str, &str)> = diags
        .iter()
        .filter_map(|d| Some((name_a(d.path_a?), name_d(d.path_b?))))
        .collect();
    let bad_piece = r.outputs[0]
        .pieces
        .iter()
        .find(|p| p.status == PieceStatus::Inequivalent)
        .ok_or("no failing piece")?;
    let succeeding: BTreeSet<(&str, &str)> = bad_piece
        .pairings
        .iter()
        .filter(|p| p.equal)
        .filter_map(|p| Some((name_a(p.path_a?), name_d(p.path_b?))))
        .collect();
    ensure(failing == [("p", "z"), ("r", "y")].into(), format!("failing {failing:?}"))?;
    ensure(succeeding == [("q", "x"), ("s", "w")].into(), format!("succeeding {succeeding:?}"))?;
    let stmts: BTreeSet<&str> = diags.iter().flat_map(|d| d.statements.b.iter().map(String::as_str)).collect();
    ensure(stmts.contains("v3") && stmts.contains("v1"), format!("statements {stmts:?}"))?;
    let want_a = rel("{[x] -> [2x] | exists j: 2j = x and 0 <= x < 1023}");
    let want_b = rel("{[x] -> [x] | exists j: 2j = x and 0 <= x < 1023}");
    for d in diags {
        let hint = d.hint.as_deref().unwrap_or("");
        ensure(hint.starts_with("buf₂ in v3"), format!("hint {hint:?}"))?;
        let ma = rel(d.mapping_a.as_deref().ok_or("no mapping a")?);
        let mb = rel(d.mapping_b.as_deref().ok_or("no mapping b")?);
        ensure(ma.is_equal(&want_a).unwrap() && mb.is_equal(&want_b).unwrap(), format!("mappings {ma} vs {mb}"))?;
    }
    Ok(format!(
        "failing {failing:?}, succeeding {succeeding:?}, statements {stmts:?}, hint buf₂ in v3, mappings {{[x] -> [2x]}} vs {{[x] -> [x]}} on even x"
    ))
}

/// Output-input mapping of a complete path, from the identity on `dom`.
fn path_map(g: &Addg, trace: &[usize], dom: &IntRelation) -> IntRelation {
    let b = Budget::default();
    let mut m = IntRelation::identity(dom);
    for &e in trace {
        m = reduce_intermediate(g, &m, e, &b).unwrap();
    }
    m.simplify(&b).unwrap()
}

/// Union of the mappings of all paths whose first operand edge has label
/// `operand` and which end at `leaf` (the flattened path).
fn flattened(g: &Addg, operand: usize, leaf: &str, leaf_operand: usize, dom: &IntRelation) -> IntRelation {
    let c = g.array("C").unwrap();
    let mut out = IntRelation::empty(1, 1);
    for p in g.enumerate_paths(c) {
        let op = |i: usize| match &g.edges[p[i]].label {
            arrayeq::addg::EdgeLabel::Operand(k) => *k,
            _ => 0,
        };
        let end = g.nodes[g.edges[*p.last().unwrap()].to].array_name();
        if op(1) == operand && end == Some(leaf) && op(p.len() - 1) == leaf_operand {
            out = out.union(&path_map(g, &p, dom)).unwrap();
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let g = graph("fig1a.c");
    let b = Budget::default();
    let d = rel("{[k] | 0 <= k < 1024}");
    let c = g.array("C").unwrap();
    let s3 = g.definers(c)[0];
    let plus = g.edges[s3].to;
    let to_tmp = g.out_edges[plus][0];
    let m_c_tmp = reduce_intermediate(&g, &reduce_intermediate(&g, &IntRelation::identity(&d), s3, &b).unwrap(), to_tmp, &b).unwrap();
    let tmp = g.array("tmp").unwrap();
    let s1 = g.definers(tmp)[0];
    let b1 = g.out_edges[g.edges[s1].to][0];
    let tmp_dom = rel("{[k] | 0 <= k < 1024}");
    let m_tmp_b1 = reduce_intermediate(&g, &reduce_intermediate(&g, &IntRelation::identity(&tmp_dom), s1, &b).unwrap(), b1, &b).unwrap();
    let composed = m_c_tmp.compose(&m_tmp_b1).unwrap();
    ensure(composed.is_equal(&rel("{[k] -> [2k] | 0 <= k < 1024}")).unwrap(), format!("composed {composed}"))?;

    // ᵃM_p ⇔ ᶜM_z, ᵃM_q ⇔ ᶜM_x, ᵃM_r ⇔ ᶜM_y, ᵃM_s ⇔ ᶜM_w
    let gc = graph("fig1c.c");
    let ga_paths = g.enumerate_paths(c);
    let ma: Vec<IntRelation> = ga_paths.iter().map(|p| path_map(&g, p, &d)).collect();
    let w = flattened(&gc, 1, "A", 1, &d);
    let x = flattened(&gc, 1, "B", 2, &d);
    let y = flattened(&gc, 2, "A", 1, &d);
    let z = flattened(&gc, 2, "B", 2, &d);
    let two_k = rel("{[k] -> [2k] | 0 <= k < 1024}");
    let one_k = rel("{[k] -> [k] | 0 <= k < 1024}");
    let checks = [
        ("p", &ma[0], "z", &z, &two_k),
        ("q", &ma[1], "x", &x, &one_k),
        ("r", &ma[2], "y", &y, &two_k),
        ("s", &ma[3], "w", &w, &one_k),
    ];
    for (pa, a, pc, cm, want) in checks {
        ensure(
            a.is_equal(cm).unwrap() && a.is_equal(want).unwrap(),
            format!("{pa}/{pc}: {a} vs {cm}"),
        )?;
    }
    Ok("M_C,tmp ∘ M_tmp,B1 = {[k] -> [2k] | 0 <= k < 1024}; p/z, q/x, r/y, s/w equal".to_string())
}

fn criterion_4() -> Outcome {
    let (ga, gb) = (graph("fig1a.c"), graph("fig1b.c"));
    let na = ga.enumerate_paths(ga.array("C").unwrap()).len();
    let nb = gb.enumerate_paths(gb.array("C").unwrap()).len();
    ensure(na == 4 && nb == 8, format!("path counts {na}, {nb}"))?;
    let r = check_equivalence(&ga, &gb, &CheckConfig { memo: false, ..CheckConfig::default() });
    ensure(r.verdict.is_equivalent(), "not equivalent")?;
    let pieces = &r.outputs[0].pieces;
    let doms: Vec<&IntRelation> = pieces.iter().map(|p| &p.domain_set).collect();
    ensure(
        doms.len() == 2
            && doms[0].is_equal(&rel("{[k] | 0 <= k < 512}")).unwrap()
            && doms[1].is_equal(&rel("{[k] | 512 <= k < 1024}")).unwrap(),
        "domain not split at 512",
    )?;
    let partners: BTreeSet<usize> = pieces
        .iter()
        .flat_map(|p| p.pairings.iter())
        .filter(|q| q.path_a == Some(1))
        .filter_map(|q| q.path_b)
        .collect();
    ensure(partners == [1, 5].into(), format!("path 1 paired with {partners:?}"))?;
    let first = pieces[0].pairings.iter().find(|q| q.path_a == Some(1)).ok_or("no pairing")?;
    let want = rel("{[k] -> [2k] | 0 <= k < 512}");
    for m in [&first.mapping_a, &first.mapping_b] {
        let m = rel(m.as_deref().ok_or("missing mapping")?);
        ensure(m.is_equal(&want).unwrap(), format!("mapping {m}"))?;
    }
    Ok("4 and 8 paths; path 1 of (a) pairs with paths 1 and 5 of (b), split at k = 512, {[k] -> [2k] | 0 <= k < 512} on both".into())
}

fn criterion_5() -> Outcome {
    let cfg = DiffConfig {
        trials: ORACLE_TRIALS,
        n_values: ORACLE_NS.to_vec(),
        ..DiffConfig::default()
    };
    // (b) hard-codes 512; its N/2 form is what scales down
    let scaled = [("fig1a.c", "fig1a.c"), ("fig1b.c", "fig1b_scaled.c"), ("fig1c.c", "fig1c.c"), ("fig1d.c", "fig1d.c")];
    let mut agreed = 0;
    for (i, (x, ox)) in scaled.iter().enumerate() {
        for (y, oy) in &scaled[i..] {
            if !check_equivalence(&graph(x), &graph(y), &CheckConfig::default()).verdict.is_equivalent() {
                continue;
            }
            match differential_test(&fixture(ox), &fixture(oy), &cfg).map_err(|e| e.to_string())? {
                DiffOutcome::Agree { .. } => agreed += 1,
                other => return Err(format!("{x} vs {y}: {other:?}")),
            }
        }
    }
    ensure(agreed == 7, format!("{agreed} equivalent pairs agreed, expected 7"))?;
    let big = |f: &str| Addg::build(&parse_with_overrides(&fixture(f), &[("N".into(), 1024)].into()).unwrap()).unwrap();
    ensure(
        check_equivalence(&big("fig1a.c"), &big("fig1b_scaled.c"), &CheckConfig::default()).verdict.is_equivalent(),
        "scaled (b) not equivalent at N = 1024",
    )?;
    // (a) vs (d): every difference at an even index, none at odd ones
    let mut even_diffs = 0;
    for &n in &ORACLE_NS {
        let o = [("N".to_string(), n)].into();
        let pa = parse_with_overrides(&fixture("fig1a.c"), &o).unwrap();
        let pd = parse_with_overrides(&fixture("fig1d.c"), &o).unwrap();
        for t in 0..ORACLE_TRIALS as u64 {
            let inputs = Inputs::Random(SEED ^ t);
            let (ra, rd) = (run(&pa, &inputs).unwrap(), run(&pd, &inputs).unwrap());
            for k in 0..n {
                let same = ra["C"][&vec![k]] == rd["C"][&vec![k]];
                ensure(k % 2 == 0 || same, format!("N={n}: odd index {k} differs"))?;
                even_diffs += usize::from(!same);
            }
        }
    }
    ensure(even_diffs > 0, "no counterexample for (a, d)")?;
    let DiffOutcome::Counterexample(c) = differential_test(&fixture("fig1a.c"), &fixture("fig1d.c"), &cfg).unwrap() else {
        return Err("differential test found no counterexample for (a, d)".into());
    };
    ensure(c.first.element[0] % 2 == 0, "counterexample at odd index")?;
    Ok(format!(
        "{agreed} equivalent pairs agree on {ORACLE_TRIALS} trials at N in {ORACLE_NS:?}; (a, d) differs at {even_diffs} even elements, 0 odd"
    ))
}

fn verdict(src_a: &str, src_b: &str, cfg: &CheckConfig) -> String {
    check_sources("a.c", src_a, "b.c", src_b, cfg).verdict
}

fn oracle_agrees(a: &str, b: &str, trials: usize) -> Option<bool> {
    let cfg = DiffConfig {
        trials,
        n_values: Vec::new(),
        ..DiffConfig::default()
    };
    match differential_test(a, b, &cfg).ok()? {
        DiffOutcome::Agree { .. } => Some(true),
        DiffOutcome::Counterexample(_) => Some(false),
        DiffOutcome::Fault { .. } => None,
    }
}

fn criterion_6() -> Outcome {
    let mut rng = Rng8::seed_from_u64(SEED);
    let cfg = CheckConfig::default();
    // (i) reflexivity
    for i in 0..REFLEXIVITY_PROGRAMS {
        let src = emit(&generate(&mut rng));
        let v = verdict(&src, &src, &cfg);
        ensure(v == "Equivalent", format!("reflexivity #{i}: {v}\n{src}"))?;
    }
    // (ii) metamorphic
    let (mut eq, mut unsup, mut ineq) = (0usize, 0usize, 0usize);
    let mut per: BTreeMap<String, usize> = BTreeMap::new();
    let mut cases = 0;
    while cases < METAMORPHIC_CASES {
        let p = generate(&mut rng);
        let mut q = p.clone();
        let mut applied = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let t = TRANSFORMS[rng.random_range(0..TRANSFORMS.len())];
            if let Some(next) = transform(&q, t, &mut rng) {
                q = next;
                applied.push(t);
            }
        }
        if applied.is_empty() {
            continue;
        }
        cases += 1;
        let (sp, sq) = (emit(&p), emit(&q));
        ensure(oracle_agrees(&sp, &sq, 3) == Some(true), format!("transform {applied:?} changed behavior\n{sp}\n{sq}"))?;
        for t in &applied {
            *per.entry(format!("{t:?}")).or_default() += 1;
        }
        match verdict(&sp, &sq, &cfg).as_str() {
            "Equivalent" => eq += 1,
            "Unsupported" => unsup += 1,
            _ => {
                ineq += 1;
                eprintln!("metamorphic false alarm after {applied:?}:\n{sp}\n{sq}");
            }
        }
    }
    let rate = eq as f64 / cases as f64;
    ensure(ineq == 0, format!("{ineq} transformed programs called Inequivalent"))?;
    ensure(rate >= METAMORPHIC_MIN_EQUIVALENT, format!("metamorphic Equivalent rate {rate:.3}"))?;
    // (iii) mutation
    let (mut flagged, mut missed_unsup, mut false_eq, mut population, mut attempts) = (0, 0, 0, 0, 0);
    while population < MUTATION_POPULATION && attempts < MUTATION_MAX_ATTEMPTS {
        attempts += 1;
        let p = generate(&mut rng);
        let m = MUTATIONS[rng.random_range(0..MUTATIONS.len())];
        let Some(mutant) = mutate(&p, m, &mut rng) else { continue };
        let src = emit(&p);
        // the population: mutants that run cleanly and change some output
        if parse(&mutant).is_err() || oracle_agrees(&src, &mutant, 8) != Some(false) {
            continue;
        }
        population += 1;
        match verdict(&src, &mutant, &cfg).as_str() {
            "Inequivalent" => flagged += 1,
            "Equivalent" => {
                false_eq += 1;
                eprintln!("mutant ({m:?}) called Equivalent:\n{src}\n{mutant}");
            }
            _ => missed_unsup += 1,
        }
    }
    ensure(population >= MUTATION_POPULATION, format!("only {population} behavior-changing mutants"))?;
    ensure(false_eq == 0, format!("{false_eq} mutants called Equivalent"))?;
    let mrate = flagged as f64 / population as f64;
    ensure(mrate >= MUTATION_MIN_INEQUIVALENT, format!("mutation Inequivalent rate {mrate:.3}"))?;
    Ok(format!(
        "reflexive {REFLEXIVITY_PROGRAMS}/{REFLEXIVITY_PROGRAMS}; metamorphic {eq}/{cases} Equivalent, {unsup} Unsupported, 0 Inequivalent ({per:?}); mutants {flagged}/{population} Inequivalent, {missed_unsup} Unsupported, 0 Equivalent"
    ))
}

// ---- relation engine against enumeration ----

struct GenRel {
    rel: IntRelation,
    /// Per conjunct: bounding box of the visible variables.
    boxes: Vec<Vec<(i64, i64)>>,
}

fn random_conjunct(rng: &mut Rng8, nv: usize) -> (Conjunct, Vec<(i64, i64)>) {
    let with_exist = rng.random_bool(0.3);
    let n = nv + usize::from(with_exist);
    let mut cs = Vec::new();
    let mut bx = Vec::new();
    for i in 0..nv {
        let w = rng.random_range(0..=if nv == 3 { 12 } else { 2 * REL_BOUND });
        let lo = rng.random_range(-REL_BOUND..=REL_BOUND - w);
        bx.push((lo, lo + w));
        cs.push(Constraint::Ge(LinExpr::var(n, i).add_constant(&BigInt::from(-lo))));
        cs.push(Constraint::Ge(LinExpr::var(n, i).neg().add_constant(&BigInt::from(lo + w))));
    }
    for _ in 0..rng.random_range(0..=2) {
        let mut co = vec![0i64; n];
        for c in co.iter_mut().take(nv) {
            *c = rng.random_range(-2..=2);
        }
        let e = LinExpr::from_i64(&co, rng.random_range(-8..=8));
        cs.push(match rng.random_range(0..3) {
            0 => Constraint::Eq(e),
            1 => Constraint::Ge(e),
            _ => Constraint::Cong(e, BigInt::from(rng.random_range(2..=4))),
        });
    }
    if with_exist {
        // x_i = m·e + c, with e boxed
        let mut co = vec![0i64; n];
        co[rng.random_range(0..nv)] = 1;
        co[nv] = -rng.random_range(2..=3);
        cs.push(Constraint::Eq(LinExpr::from_i64(&co, -rng.random_range(-3..=3))));
        cs.push(Constraint::Ge(LinExpr::var(n, nv).add_constant(&BigInt::from(40))));
        cs.push(Constraint::Ge(LinExpr::var(n, nv).neg().add_constant(&BigInt::from(40))));
    }
    (Conjunct::new(n, usize::from(with_exist), cs), bx)
}

fn random_relation(rng: &mut Rng8, ni: usize, no: usize) -> GenRel {
    let mut cs = Vec::new();
    let mut boxes = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        let (c, b) = random_conjunct(rng, ni + no);
        cs.push(c);
        boxes.push(b);
    }
    GenRel {
        rel: IntRelation::from_conjuncts(IntTupleSpace::new(ni), IntTupleSpace::new(no), cs),
        boxes,
    }
}

fn eval(e: &LinExpr, p: &[i64]) -> i64 {
    let mut v: i64 = e.constant_term().try_into().unwrap();
    for (c, x) in e.coeffs().iter().zip(p) {
        v += i64::try_from(c).unwrap() * x;
    }
    v
}

fn holds(c: &Conjunct, p: &[i64]) -> bool {
    c.equalities().iter().all(|e| eval(e, p) == 0)
        && c.inequalities().iter().all(|e| eval(e, p) >= 0)
        && c.congruences().iter().all(|(e, m)| eval(e, p).rem_euclid(i64::try_from(m).unwrap()) == 0)
}

/// Membership by evaluating the constraints; existentials of generated
/// conjuncts are searched over their box.
fn member_generated(r: &IntRelation, p: &[i64]) -> bool {
    r.conjuncts().iter().any(|c| {
        if c.n_exist() == 0 {
            return holds(c, p);
        }
        let mut q = p.to_vec();
        q.push(0);
        (-40..=40).any(|e| {
            *q.last_mut().unwrap() = e;
            holds(c, &q)
        })
    })
}

/// Membership in an engine result: direct evaluation when quantifier-free.
fn member_result(r: &IntRelation, p: &[i64]) -> bool {
    if r.conjuncts().iter().all(|c| c.n_exist() == 0) {
        return r.conjuncts().iter().any(|c| holds(c, p));
    }
    r.contains(&p.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()).unwrap()
}

fn box_points(bx: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &(lo, hi) in bx {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Points to test: every point of every conjunct box, plus random points
/// of the whole cube (outside the boxes both operands are empty).
fn probe_points(rng: &mut Rng8, d: usize, rels: &[&GenRel]) -> Vec<Vec<i64>> {
    let mut set: HashSet<Vec<i64>> = HashSet::new();
    for r in rels {
        for b in &r.boxes {
            set.extend(box_points(b));
        }
    }
    for _ in 0..500 {
        set.insert((0..d).map(|_| rng.random_range(-REL_BOUND - 2..=REL_BOUND + 2)).collect());
    }
    set.into_iter().collect()
}

fn relation_case(rng: &mut Rng8) -> Result<(), String> {
    let d = rng.random_range(1..=3);
    let a = random_relation(rng, d, 0);
    let b = random_relation(rng, d, 0);
    let budget = Budget::default();
    let inter = a.rel.intersect(&b.rel).map_err(|e| e.to_string())?;
    let uni = a.rel.union(&b.rel).map_err(|e| e.to_string())?;
    let diff = a.rel.difference(&b.rel).map_err(|e| e.to_string())?;
    let pts = probe_points(rng, d, &[&a, &b]);
    let (mut ea, mut eb) = (BTreeSet::new(), BTreeSet::new());
    for p in &pts {
        let (ia, ib) = (member_generated(&a.rel, p), member_generated(&b.rel, p));
        if ia {
            ea.insert(p.clone());
        }
        if ib {
            eb.insert(p.clone());
        }
        ensure(member_result(&inter, p) == (ia && ib), format!("intersect at {p:?}\n{}\n{}", a.rel, b.rel))?;
        ensure(member_result(&uni, p) == (ia || ib), format!("union at {p:?}"))?;
        ensure(member_result(&diff, p) == (ia && !ib), format!("difference at {p:?}\n{}\n{}", a.rel, b.rel))?;
    }
    ensure(a.rel.is_empty_with(&budget).unwrap() == ea.is_empty(), format!("is_empty {}", a.rel))?;
    ensure(b.rel.is_empty_with(&budget).unwrap() == eb.is_empty(), format!("is_empty {}", b.rel))?;
    ensure(a.rel.is_equal_with(&b.rel, &budget).unwrap() == (ea == eb), "is_equal a b")?;
    ensure(a.rel.is_equal_with(&inter.union(&diff).unwrap(), &budget).unwrap(), "is_equal a (a∩b)∪(a−b)")?;

    // compose over dims with d_in + d_out ≤ 3
    let (di, dm, dout) = [(1, 1, 1), (1, 2, 1), (2, 1, 1), (1, 1, 2)][rng.random_range(0..4)];
    let f = random_relation(rng, di, dm);
    let g = random_relation(rng, dm, dout);
    let h = f.rel.compose(&g.rel).map_err(|e| e.to_string())?;
    let fp: Vec<Vec<i64>> = probe_points(rng, di + dm, &[&f]).into_iter().filter(|p| member_generated(&f.rel, p)).collect();
    let gp: Vec<Vec<i64>> = probe_points(rng, dm + dout, &[&g]).into_iter().filter(|p| member_generated(&g.rel, p)).collect();
    let mut by_mid: BTreeMap<Vec<i64>, Vec<Vec<i64>>> = BTreeMap::new();
    for p in gp {
        by_mid.entry(p[..dm].to_vec()).or_default().push(p[dm..].to_vec());
    }
    let mut want: BTreeSet<Vec<i64>> = BTreeSet::new();
    for p in fp {
        for z in by_mid.get(&p[di..]).into_iter().flatten() {
            let mut q = p[..di].to_vec();
            q.extend(z);
            want.insert(q);
        }
    }
    let mut probes: BTreeSet<Vec<i64>> = want.clone();
    for fb in &f.boxes {
        for gb in &g.boxes {
            let mut bx = fb[..di].to_vec();
            bx.extend_from_slice(&gb[dm..]);
            if bx.iter().map(|(l, h)| h - l + 1).product::<i64>() <= 20_000 {
                probes.extend(box_points(&bx));
            }
        }
    }
    for _ in 0..300 {
        probes.insert((0..di + dout).map(|_| rng.random_range(-REL_BOUND..=REL_BOUND)).collect());
    }
    for p in &probes {
        ensure(member_result(&h, p) == want.contains(p), format!("compose at {p:?}\n{}\n{}", f.rel, g.rel))?;
    }
    ensure(h.is_empty_with(&budget).unwrap() == want.is_empty(), "compose emptiness")?;
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut rng = Rng8::seed_from_u64(SEED);
    for i in 0..RELATION_CASES {
        relation_case(&mut rng).map_err(|e| format!("case {i}: {e}"))?;
    }
    Ok(format!(
        "{RELATION_CASES} cases (dims <= 3, bounds in [-{REL_BOUND}, {REL_BOUND}], moduli <= 4): intersect, union, difference, compose, is_empty, is_equal agree"
    ))
}

fn criterion_8() -> Outcome {
    let names = ["fig1a.c", "fig1b.c", "fig1c.c", "fig1d.c"];
    let on = CheckConfig::default();
    let off = CheckConfig { memo: false, ..CheckConfig::default() };
    let mut pairs = 0;
    for x in names {
        for y in names {
            let (gx, gy) = (graph(x), graph(y));
            let a = check_equivalence(&gx, &gy, &on);
            let b = check_equivalence(&gx, &gy, &off);
            ensure(a.verdict.name() == b.verdict.name(), format!("{x} vs {y}: memo changes verdict"))?;
            pairs += 1;
        }
    }
    let mut rng = Rng8::seed_from_u64(SEED ^ 8);
    for _ in 0..100 {
        let p = generate(&mut rng);
        let t = TRANSFORMS[rng.random_range(0..TRANSFORMS.len())];
        let q = transform(&p, t, &mut rng).unwrap_or_else(|| p.clone());
        let (sp, sq) = (emit(&p), emit(&q));
        ensure(verdict(&sp, &sq, &on) == verdict(&sp, &sq, &off), format!("memo changes verdict\n{sp}\n{sq}"))?;
        pairs += 1;
    }
    // a split statement reading the same intermediate, as in (b)
    let shared_a = "#define N 64\nf(int A[], int C[N][N]) { int i, j, buf[N];\n\
                    for (j = 0; j < N; j++) s1: buf[j] = A[j] + A[j+1];\n\
                    for (i = 0; i < N; i++) for (j = 0; j < N; j++) s2: C[i][j] = buf[j] * A[i]; }";
    let shared_b = "#define N 64\nf(int A[], int C[N][N]) { int i, j, buf[N];\n\
                    for (j = 0; j < N; j++) t1: buf[j] = A[j+1] + A[j];\n\
                    for (i = 0; i < N; i++) for (j = 0; j < N; j++) {\n\
                      if (i < 32) t2: C[i][j] = A[i] * buf[j]; else t3: C[i][j] = A[i] * buf[j]; } }";
    let (ga, gb) = (Addg::build(&parse(shared_a).unwrap()).unwrap(), Addg::build(&parse(shared_b).unwrap()).unwrap());
    let a = check_equivalence(&ga, &gb, &on);
    let b = check_equivalence(&ga, &gb, &off);
    ensure(a.verdict.is_equivalent() && b.verdict.is_equivalent(), "shared fixture not equivalent")?;
    ensure(
        a.stats.sub_traversals < b.stats.sub_traversals,
        format!("sub-traversals {} with memo vs {} without", a.stats.sub_traversals, b.stats.sub_traversals),
    )?;
    Ok(format!(
        "{pairs} pairs same verdict without memo; shared sub-graph: {} sub-traversals with memo, {} without",
        a.stats.sub_traversals, b.stats.sub_traversals
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden equivalences", criterion_1),
        ("golden inequivalence", criterion_2),
        ("relation engine on the worked example", criterion_3),
        ("path counts and domain split", criterion_4),
        ("oracle soundness", criterion_5),
        ("generated program properties", criterion_6),
        ("relation engine against enumeration", criterion_7),
        ("memoization transparency", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let tag = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| tag.contains(x.as_str()) || name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("{tag} PASS ({name}, {secs:.1} s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{tag} FAIL ({name}, {secs:.1} s): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
