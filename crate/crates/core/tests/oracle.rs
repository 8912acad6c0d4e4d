use std::collections::BTreeMap;

use arrayeq::oracle::{apply, diff_outputs, differential_test, run, DiffConfig, DiffOutcome, FaultKind, Inputs, Outputs};
use arrayeq::{parse, parse_with_overrides};
use num_bigint::BigInt;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn at_n(name: &str, n: i64) -> arrayeq::Program {
    parse_with_overrides(&fixture(name), &[("N".to_string(), n)].into()).unwrap()
}

fn ones(n: i64) -> Inputs {
    let mut m = Outputs::new();
    for a in ["A", "B"] {
        m.insert(a.into(), (0..2 * n).map(|i| (vec![i], BigInt::from(1))).collect());
    }
    Inputs::Given(m)
}

#[test]
fn fig1a_on_all_ones_gives_four() {
    let out = run(&at_n("fig1a.c", 4), &ones(4)).unwrap();
    let c = &out["C"];
    assert_eq!(c.len(), 4);
    assert!(c.values().all(|v| *v == BigInt::from(4)));
}

#[test]
fn fig1a_matches_the_closed_form() {
    let p = at_n("fig1a.c", 8);
    let inputs = Inputs::Random(42);
    let out = run(&p, &inputs).unwrap();
    let mut given = BTreeMap::new();
    // recompute B[2k] + B[k] + A[2k] + A[k] from the same inputs
    for a in ["A", "B"] {
        let vals: BTreeMap<Vec<i64>, BigInt> = (0..16)
            .map(|i| {
                let q = parse(&format!("f(int {a}[], int C[]) {{ c: C[0] = {a}[{i}]; }}")).unwrap();
                (vec![i], run(&q, &inputs).unwrap()["C"][&vec![0]].clone())
            })
            .collect();
        given.insert(a, vals);
    }
    for k in 0..8i64 {
        let want = &given["B"][&vec![2 * k]] + &given["B"][&vec![k]] + &given["A"][&vec![2 * k]] + &given["A"][&vec![k]];
        assert_eq!(out["C"][&vec![k]], want);
    }
}

#[test]
fn fig1d_differs_exactly_at_even_indices() {
    for n in [4, 8, 16] {
        let inputs = Inputs::Random(7);
        let a = run(&at_n("fig1a.c", n), &inputs).unwrap();
        let d = run(&at_n("fig1d.c", n), &inputs).unwrap();
        let diff: Vec<i64> = diff_outputs(&a, &d).iter().map(|x| x.element[0]).collect();
        // at k = 0 the wrong index 2k coincides with k
        let evens: Vec<i64> = (2..n).step_by(2).collect();
        assert_eq!(diff, evens, "N={n}");
    }
}

#[test]
fn empty_program_has_empty_outputs() {
    let p = parse("f(int A[], int C[]) { }").unwrap();
    let out = run(&p, &Inputs::Random(0)).unwrap();
    assert!(out.is_empty());
}

#[test]
fn differential_testing_on_the_fixtures() {
    let cfg = DiffConfig::default();
    for (x, y) in [("fig1a.c", "fig1b_scaled.c"), ("fig1a.c", "fig1c.c"), ("fig1b_scaled.c", "fig1c.c"), ("fig1a.c", "fig1a.c")] {
        let r = differential_test(&fixture(x), &fixture(y), &cfg).unwrap();
        assert!(matches!(r, DiffOutcome::Agree { runs: 300 }), "{x} {y}: {r:?}");
    }
    let r = differential_test(&fixture("fig1a.c"), &fixture("fig1d.c"), &cfg).unwrap();
    let DiffOutcome::Counterexample(c) = r else { panic!("{r:?}") };
    assert_eq!(c.first.element[0] % 2, 0);
    assert!(c.all.iter().all(|d| d.element[0] % 2 == 0));
}

#[test]
fn same_seed_same_run() {
    let cfg = DiffConfig { seed: 99, ..DiffConfig::default() };
    let one = differential_test(&fixture("fig1a.c"), &fixture("fig1d.c"), &cfg).unwrap();
    let two = differential_test(&fixture("fig1a.c"), &fixture("fig1d.c"), &cfg).unwrap();
    let (DiffOutcome::Counterexample(x), DiffOutcome::Counterexample(y)) = (one, two) else { panic!() };
    assert_eq!(x.input_seed, y.input_seed);
    assert_eq!(x.all, y.all);
}

#[test]
fn faults_name_statement_and_iteration() {
    let double = "f(int A[], int C[]) { int k; for (k=0;k<4;k++) s1: C[k] = A[k]; s2: C[2] = A[0]; }";
    let p = parse(double).unwrap();
    let e = run(&p, &Inputs::Random(0)).unwrap_err();
    assert_eq!(e.kind, FaultKind::DoubleWrite);
    assert_eq!(e.statement, "s2");
    assert_eq!(e.element, [2]);

    let uninit = "f(int A[], int C[]) { int k, t[8]; for (k=0;k<4;k++) s1: t[k] = A[k];\n\
                  for (k=0;k<8;k++) s2: C[k] = t[k]; }";
    let e = run(&parse(uninit).unwrap(), &Inputs::Random(0)).unwrap_err();
    assert_eq!(e.kind, FaultKind::UninitializedRead);
    assert_eq!(e.iteration, [("k".to_string(), 4)]);

    let oob = "f(int A[4], int C[]) { int k; for (k=0;k<5;k++) s1: C[k] = A[k]; }";
    let e = run(&parse(oob).unwrap(), &Inputs::Random(0)).unwrap_err();
    assert_eq!(e.kind, FaultKind::OutOfBounds);
    assert_eq!(e.to_string(), "s1: out-of-bounds access to A[4] at (k=4)");
}

#[test]
fn user_functions_have_exactly_their_declared_properties() {
    let src = "/*@ assoc comm */ int f(int, int);\n/*@ assoc */ int g(int, int);\n/*@ comm */ int h(int, int);\n\
               int u(int, int);\nz(int A[], int C[]) { }";
    let p = parse(src).unwrap();
    let vals: Vec<BigInt> = (-4..=4).map(BigInt::from).collect();
    let props = |s: &str| {
        let (mut assoc, mut comm) = (true, true);
        for x in &vals {
            for y in &vals {
                let xy = apply(&p, s, &[x.clone(), y.clone()]);
                comm &= xy == apply(&p, s, &[y.clone(), x.clone()]);
                for z in &vals {
                    let l = apply(&p, s, &[xy.clone(), z.clone()]);
                    let r = apply(&p, s, &[x.clone(), apply(&p, s, &[y.clone(), z.clone()])]);
                    assoc &= l == r;
                }
            }
        }
        (assoc, comm)
    };
    assert_eq!(props("f"), (true, true));
    assert_eq!(props("g"), (true, false));
    assert_eq!(props("h"), (false, true));
    assert_eq!(props("u"), (false, false));
}
