//! Reference interpreter over unbounded integers, and differential testing
//! of two programs on identical pseudo-random inputs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::frontend::{parse_with_overrides, Access, Direction, Expr, FrontendError, Node, Program};

/// Output array name → written element → value.
pub type Outputs = BTreeMap<String, BTreeMap<Vec<i64>, BigInt>>;

pub const DEFAULT_STEP_LIMIT: u64 = 20_000_000;
pub const INPUT_RANGE: i64 = 1000;

/// Where input array values come from.
#[derive(Clone, Debug)]
pub enum Inputs {
    /// Values in `[-1000, 1000]` derived from the seed, array name and index.
    Random(u64),
    /// Explicit values; reading any other input element is a fault.
    Given(Outputs),
}

impl Inputs {
    fn value(&self, array: &str, idx: &[i64]) -> Option<BigInt> {
        match self {
            Inputs::Random(seed) => Some(BigInt::from(random_value(*seed, array, idx))),
            Inputs::Given(m) => m.get(array)?.get(idx).cloned(),
        }
    }
}

fn random_value(seed: u64, array: &str, idx: &[i64]) -> i64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(array.as_bytes());
    h.update([0u8]);
    for i in idx {
        h.update(i.to_le_bytes());
    }
    let d = h.finalize();
    let mut w = [0u8; 8];
    w.copy_from_slice(&d[..8]);
    (u64::from_le_bytes(w) % (2 * INPUT_RANGE as u64 + 1)) as i64 - INPUT_RANGE
}

fn derive_seed(seed: u64, n: Option<i64>, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(n.unwrap_or(i64::MIN).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let d = h.finalize();
    let mut w = [0u8; 8];
    w.copy_from_slice(&d[..8]);
    u64::from_le_bytes(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultKind {
    DoubleWrite,
    UninitializedRead,
    OutOfBounds,
    MissingInput,
    StepLimit,
}

/// A run-time fault, with the statement and iterator values where it hit.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct Fault {
    pub kind: FaultKind,
    pub statement: String,
    pub iteration: Vec<(String, i64)>,
    pub array: String,
    pub element: Vec<i64>,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FaultKind::DoubleWrite => "second write of",
            FaultKind::UninitializedRead => "read of unwritten",
            FaultKind::OutOfBounds => "out-of-bounds access to",
            FaultKind::MissingInput => "no value given for",
            FaultKind::StepLimit => "step limit reached at",
        };
        let iter: Vec<String> = self.iteration.iter().map(|(n, v)| format!("{n}={v}")).collect();
        write!(
            f,
            "{}: {what} {}{:?} at ({})",
            self.statement,
            self.array,
            self.element,
            iter.join(", ")
        )
    }
}

struct Exec<'p> {
    p: &'p Program,
    inputs: &'p Inputs,
    store: BTreeMap<String, BTreeMap<Vec<i64>, BigInt>>,
    env: Vec<(String, i64)>,
    steps: u64,
    limit: u64,
}

impl Exec<'_> {
    fn fault(&self, kind: FaultKind, stmt: &str, array: &str, element: Vec<i64>) -> Fault {
        Fault {
            kind,
            statement: stmt.to_string(),
            iteration: self.env.clone(),
            array: array.to_string(),
            element,
        }
    }

    fn lookup(&self, name: &str) -> i64 {
        self.env.iter().rev().find(|(n, _)| n == name).map_or(0, |(_, v)| *v)
    }

    fn index(&self, a: &Access, stmt: &str) -> Result<Vec<i64>, Fault> {
        let idx: Vec<i64> = a.index.iter().map(|e| e.eval(&|n| self.lookup(n))).collect();
        let ext = self.p.extents(&a.array).unwrap_or_default();
        let inside = idx
            .iter()
            .zip(&ext)
            .all(|(&i, e)| i >= 0 && e.is_none_or(|e| i < e));
        if !inside || idx.len() != ext.len() {
            return Err(self.fault(FaultKind::OutOfBounds, stmt, &a.array, idx));
        }
        Ok(idx)
    }

    fn body(&mut self, nodes: &[Node]) -> Result<(), Fault> {
        for n in nodes {
            match n {
                Node::Loop(l) => {
                    let start = l.init.eval(&|n| self.lookup(n));
                    self.env.push((l.iter.clone(), start));
                    loop {
                        let holds = l.cond.iter().all(|c| c.holds(&|n| self.lookup(n)));
                        if !holds {
                            break;
                        }
                        self.body(&l.body)?;
                        if let Some(last) = self.env.last_mut() {
                            last.1 += l.step;
                        }
                    }
                    self.env.pop();
                }
                Node::If(i) => {
                    if i.cond.iter().all(|c| c.holds(&|n| self.lookup(n))) {
                        self.body(&i.then_body)?;
                    } else {
                        self.body(&i.else_body)?;
                    }
                }
                Node::Assign(a) => {
                    self.steps += 1;
                    if self.steps > self.limit {
                        return Err(self.fault(FaultKind::StepLimit, &a.label, &a.lhs.array, Vec::new()));
                    }
                    let v = self.expr(&a.rhs, &a.label)?;
                    let idx = self.index(&a.lhs, &a.label)?;
                    let cell = self.store.entry(a.lhs.array.clone()).or_default();
                    if cell.contains_key(&idx) {
                        return Err(self.fault(FaultKind::DoubleWrite, &a.label, &a.lhs.array, idx));
                    }
                    cell.insert(idx, v);
                }
            }
        }
        Ok(())
    }

    fn expr(&self, e: &Expr, stmt: &str) -> Result<BigInt, Fault> {
        match e {
            Expr::Const(c) => Ok(BigInt::from(*c)),
            Expr::Read(a) => {
                let idx = self.index(a, stmt)?;
                let is_input = self
                    .p
                    .params
                    .iter()
                    .any(|q| q.name == a.array && q.direction == Direction::Input);
                if is_input {
                    return self
                        .inputs
                        .value(&a.array, &idx)
                        .ok_or_else(|| self.fault(FaultKind::MissingInput, stmt, &a.array, idx));
                }
                match self.store.get(&a.array).and_then(|m| m.get(&idx)) {
                    Some(v) => Ok(v.clone()),
                    None => Err(self.fault(FaultKind::UninitializedRead, stmt, &a.array, idx)),
                }
            }
            Expr::Op { symbol, args } => {
                let vals = args.iter().map(|x| self.expr(x, stmt)).collect::<Result<Vec<_>, _>>()?;
                Ok(apply(self.p, symbol, &vals))
            }
        }
    }
}

/// Semantics of operators. Declared functions get fixed polynomial-like
/// meanings that have exactly the declared algebraic properties, so that
/// treating them as uninterpreted is the only safe reasoning.
pub fn apply(p: &Program, symbol: &str, v: &[BigInt]) -> BigInt {
    match (symbol, v.len()) {
        ("+", 2) => &v[0] + &v[1],
        ("*", 2) => &v[0] * &v[1],
        ("-", 2) => &v[0] - &v[1],
        ("-", 1) => -&v[0],
        _ => {
            let props = p.operators.props(symbol, v.len());
            let (assoc, comm) = props.map_or((false, false), |q| (q.associative, q.commutative));
            if v.len() == 2 {
                let (x, y) = (&v[0], &v[1]);
                match (assoc, comm) {
                    (true, true) => return x + y + BigInt::from(7) * x * y,
                    (true, false) => {
                        return if x.is_even() { x + y } else { x - y };
                    }
                    (false, true) => return x * y + BigInt::one(),
                    (false, false) => {}
                }
            }
            let mut acc = BigInt::from(v.len());
            for (i, x) in v.iter().enumerate() {
                acc += BigInt::from(2 * i + 3) * x;
            }
            if let (Some(first), Some(last)) = (v.first(), v.last()) {
                acc += first * last * last;
            }
            if v.is_empty() {
                acc = BigInt::zero();
            }
            acc
        }
    }
}

/// Execute `p` in source order. Returns the written elements of every
/// output array.
pub fn run(p: &Program, inputs: &Inputs) -> Result<Outputs, Fault> {
    run_with_limit(p, inputs, DEFAULT_STEP_LIMIT)
}

pub fn run_with_limit(p: &Program, inputs: &Inputs, limit: u64) -> Result<Outputs, Fault> {
    let mut ex = Exec {
        p,
        inputs,
        store: BTreeMap::new(),
        env: Vec::new(),
        steps: 0,
        limit,
    };
    ex.body(&p.body)?;
    let mut out = Outputs::new();
    for q in p.outputs() {
        out.insert(q.name.clone(), ex.store.remove(&q.name).unwrap_or_default());
    }
    Ok(out)
}

/// One output element on which two runs disagree (`None` where unwritten).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Difference {
    pub array: String,
    pub element: Vec<i64>,
    pub a: Option<BigInt>,
    pub b: Option<BigInt>,
}

impl fmt::Display for Difference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &Option<BigInt>| v.as_ref().map_or("unwritten".to_string(), |v| v.to_string());
        write!(f, "{}{:?}: {} vs {}", self.array, self.element, show(&self.a), show(&self.b))
    }
}

/// All differing output elements, in array then element order.
pub fn diff_outputs(a: &Outputs, b: &Outputs) -> Vec<Difference> {
    let mut out = Vec::new();
    let empty = BTreeMap::new();
    let names: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    for name in names {
        let xa = a.get(name).unwrap_or(&empty);
        let xb = b.get(name).unwrap_or(&empty);
        let elems: std::collections::BTreeSet<&Vec<i64>> = xa.keys().chain(xb.keys()).collect();
        for e in elems {
            let (va, vb) = (xa.get(e), xb.get(e));
            if va != vb {
                out.push(Difference {
                    array: name.clone(),
                    element: e.clone(),
                    a: va.cloned(),
                    b: vb.cloned(),
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct DiffConfig {
    pub trials: usize,
    /// Values substituted for `constant`; empty runs the programs as written.
    pub n_values: Vec<i64>,
    pub constant: String,
    pub seed: u64,
    pub step_limit: u64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            trials: 100,
            n_values: vec![4, 8, 16],
            constant: "N".to_string(),
            seed: 0,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }
}

/// A run where the programs disagreed, with what is needed to replay it.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub n: Option<i64>,
    pub trial: usize,
    /// Seed of the inputs (`Inputs::Random`).
    pub input_seed: u64,
    pub first: Difference,
    pub all: Vec<Difference>,
}

#[derive(Clone, Debug)]
pub enum DiffOutcome {
    Agree { runs: usize },
    Counterexample(Counterexample),
    /// A run faulted; `side` is "a" or "b".
    Fault { side: &'static str, n: Option<i64>, trial: usize, fault: Fault },
}

/// Run both programs on the same inputs for every trial and override value,
/// stopping at the first disagreement or fault.
pub fn differential_test(src_a: &str, src_b: &str, cfg: &DiffConfig) -> Result<DiffOutcome, FrontendError> {
    let ns: Vec<Option<i64>> = if cfg.n_values.is_empty() {
        vec![None]
    } else {
        cfg.n_values.iter().map(|&n| Some(n)).collect()
    };
    let mut runs = 0;
    for n in ns {
        let overrides: BTreeMap<String, i64> = n.map(|v| (cfg.constant.clone(), v)).into_iter().collect();
        let pa = parse_with_overrides(src_a, &overrides)?;
        let pb = parse_with_overrides(src_b, &overrides)?;
        for trial in 0..cfg.trials {
            let input_seed = derive_seed(cfg.seed, n, trial);
            let inputs = Inputs::Random(input_seed);
            let oa = match run_with_limit(&pa, &inputs, cfg.step_limit) {
                Ok(o) => o,
                Err(fault) => return Ok(DiffOutcome::Fault { side: "a", n, trial, fault }),
            };
            let ob = match run_with_limit(&pb, &inputs, cfg.step_limit) {
                Ok(o) => o,
                Err(fault) => return Ok(DiffOutcome::Fault { side: "b", n, trial, fault }),
            };
            runs += 1;
            let all = diff_outputs(&oa, &ob);
            if let Some(first) = all.first().cloned() {
                return Ok(DiffOutcome::Counterexample(Counterexample {
                    n,
                    trial,
                    input_seed,
                    first,
                    all,
                }));
            }
        }
    }
    Ok(DiffOutcome::Agree { runs })
}
