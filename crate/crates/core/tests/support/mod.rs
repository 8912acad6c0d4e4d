//! Random in-class programs, semantics-preserving transformations of them,
//! and single-edit mutations. Programs are built as a small model and
//! printed as source text.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

/// `k·K + j·J + c` over the iterators `k` (first dimension) and `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Aff {
    pub k: i64,
    pub j: i64,
    pub c: i64,
}

impl Aff {
    pub const fn new(k: i64, j: i64, c: i64) -> Self {
        Aff { k, j, c }
    }

    fn text(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (coef, name) in [(self.k, "k"), (self.j, "j")] {
            match coef {
                0 => {}
                1 => parts.push(name.to_string()),
                -1 => parts.push(format!("-{name}")),
                c => parts.push(format!("{c}*{name}")),
            }
        }
        if self.c != 0 || parts.is_empty() {
            parts.push(self.c.to_string());
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(q) => s.push_str(&format!(" - {q}")),
                None => s.push_str(&format!(" + {p}")),
            }
        }
        s
    }

    /// Substitute `k := kk`, `j := jj`.
    fn compose(&self, kk: &Aff, jj: &Aff) -> Aff {
        Aff {
            k: self.k * kk.k + self.j * jj.k,
            j: self.k * kk.j + self.j * jj.j,
            c: self.k * kk.c + self.j * jj.c + self.c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum E {
    Read(String, Vec<Aff>),
    Const(i64),
    Bin(char, Box<E>, Box<E>),
    Neg(Box<E>),
    Call(String, Box<E>, Box<E>),
}

impl E {
    fn text(&self) -> String {
        match self {
            E::Read(a, idx) => {
                let mut s = a.clone();
                for i in idx {
                    s.push_str(&format!("[{}]", i.text()));
                }
                s
            }
            E::Const(c) if *c < 0 => format!("({c})"),
            E::Const(c) => c.to_string(),
            E::Bin(op, l, r) => format!("({} {op} {})", l.text(), r.text()),
            E::Neg(x) => format!("-({})", x.text()),
            E::Call(f, l, r) => format!("{f}({}, {})", l.text(), r.text()),
        }
    }

    fn reads(&self, out: &mut Vec<(String, Vec<Aff>)>) {
        match self {
            E::Read(a, i) => out.push((a.clone(), i.clone())),
            E::Const(_) => {}
            E::Bin(_, l, r) | E::Call(_, l, r) => {
                l.reads(out);
                r.reads(out);
            }
            E::Neg(x) => x.reads(out),
        }
    }

    fn has_read(&self) -> bool {
        let mut v = Vec::new();
        self.reads(&mut v);
        !v.is_empty()
    }

    /// Number of nodes, pre-order.
    fn size(&self) -> usize {
        match self {
            E::Read(..) | E::Const(_) => 1,
            E::Bin(_, l, r) | E::Call(_, l, r) => 1 + l.size() + r.size(),
            E::Neg(x) => 1 + x.size(),
        }
    }

    /// The `n`-th node in pre-order.
    fn node_mut(&mut self, n: usize) -> Option<&mut E> {
        if n == 0 {
            return Some(self);
        }
        match self {
            E::Read(..) | E::Const(_) => None,
            E::Bin(_, l, r) | E::Call(_, l, r) => {
                let ls = l.size();
                if n <= ls {
                    l.node_mut(n - 1)
                } else {
                    r.node_mut(n - 1 - ls)
                }
            }
            E::Neg(x) => x.node_mut(n - 1),
        }
    }

    fn substitute_index(&self, kk: &Aff, jj: &Aff) -> E {
        match self {
            E::Read(a, idx) => E::Read(a.clone(), idx.iter().map(|i| i.compose(kk, jj)).collect()),
            E::Const(c) => E::Const(*c),
            E::Bin(o, l, r) => E::Bin(*o, Box::new(l.substitute_index(kk, jj)), Box::new(r.substitute_index(kk, jj))),
            E::Neg(x) => E::Neg(Box::new(x.substitute_index(kk, jj))),
            E::Call(f, l, r) => E::Call(f.clone(), Box::new(l.substitute_index(kk, jj)), Box::new(r.substitute_index(kk, jj))),
        }
    }
}

/// How a stage's statements cover its index space (split on `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Single,
    /// Two loops, `k < s` and `k >= s`.
    Split(i64),
    /// Two stride-2 loops, even and odd `k`.
    Parity,
    /// One loop with `if (k < s) … else …`.
    Guard(i64),
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub name: String,
    pub dims: usize,
    pub output: bool,
    pub layout: Layout,
    /// One right-hand side per piece of the layout.
    pub rhs: Vec<E>,
    /// Decreasing loop per dimension.
    pub rev: [bool; 2],
    /// `j` loop outside the `k` loop.
    pub interchange: bool,
    /// Emitted inside the loop nest of the previous stage.
    pub fused: bool,
}

#[derive(Clone, Debug)]
pub struct Prog {
    pub n: i64,
    pub stages: Vec<Stage>,
}

const INPUTS: [&str; 2] = ["A", "B"];

fn dims_of(p: &Prog, upto: usize, name: &str) -> Option<usize> {
    if INPUTS.contains(&name) {
        return Some(1);
    }
    p.stages[..upto].iter().find(|s| s.name == name).map(|s| s.dims)
}

fn index_choices(n: i64, ctx: usize, target: &str, tdims: usize, identity_only: bool) -> Vec<Vec<Aff>> {
    let k = Aff::new(1, 0, 0);
    let j = Aff::new(0, 1, 0);
    if identity_only {
        return if tdims == 1 { vec![vec![k]] } else { vec![vec![k, j]] };
    }
    let rev_k = Aff::new(-1, 0, n - 1);
    let rev_j = Aff::new(0, -1, n - 1);
    let input = INPUTS.contains(&target);
    match (ctx, tdims, input) {
        (1, 1, true) => vec![vec![k], vec![Aff::new(2, 0, 0)], vec![Aff::new(1, 0, 1)], vec![Aff::new(2, 0, 1)], vec![rev_k]],
        (2, 1, true) => vec![vec![k], vec![j], vec![Aff::new(1, 1, 0)], vec![Aff::new(0, 2, 1)]],
        (1, 1, false) => vec![vec![k], vec![rev_k]],
        (2, 1, false) => vec![vec![k], vec![j], vec![rev_j]],
        (2, 2, _) => vec![vec![k, j], vec![j, k], vec![rev_k, j]],
        (1, 2, _) => vec![vec![k, k], vec![k, rev_k], vec![rev_k, k]],
        _ => unreachable!(),
    }
}

struct Gen<'a> {
    rng: &'a mut Rng8,
    n: i64,
    ctx: usize,
    avail: Vec<(String, usize)>,
    /// Arrays that may only be read at the current element.
    identity: Vec<String>,
}

impl Gen<'_> {
    fn read(&mut self) -> E {
        let (name, d) = self.avail.choose(self.rng).cloned().expect("arrays available");
        let id = self.identity.contains(&name);
        let idx = index_choices(self.n, self.ctx, &name, d, id).choose(self.rng).cloned().unwrap();
        E::Read(name, idx)
    }

    fn expr(&mut self, depth: usize) -> E {
        if depth == 0 || self.rng.random_bool(0.3) {
            return if self.rng.random_bool(0.85) {
                self.read()
            } else {
                E::Const(self.rng.random_range(-3..=5))
            };
        }
        let l = Box::new(self.expr(depth - 1));
        let r = Box::new(self.expr(depth - 1));
        match self.rng.random_range(0..20) {
            0..=6 => E::Bin('+', l, r),
            7..=10 => E::Bin('*', l, r),
            11..=13 => E::Bin('-', l, r),
            14 => E::Neg(l),
            15..=16 => E::Call("f".into(), l, r),
            17..=18 => E::Call("h".into(), l, r),
            _ => E::Call("g".into(), l, r),
        }
    }

    fn rhs(&mut self) -> E {
        loop {
            let e = self.expr(3);
            if e.has_read() {
                return e;
            }
        }
    }
}

pub fn generate(rng: &mut Rng8) -> Prog {
    let n = *[4i64, 6, 8].choose(rng).unwrap();
    let mut p = Prog { n, stages: Vec::new() };
    let n_mid = rng.random_range(1..=3);
    let with_d = rng.random_bool(0.3);
    let mut plan: Vec<(String, usize, bool)> = (0..n_mid)
        .map(|i| (format!("x{i}"), if rng.random_bool(0.3) { 2 } else { 1 }, false))
        .collect();
    plan.push(("C".into(), 1, true));
    if with_d {
        plan.push(("D".into(), 2, true));
    }
    for (name, dims, output) in plan {
        let idx = p.stages.len();
        let layout = match rng.random_range(0..8) {
            0..=3 => Layout::Single,
            4 => Layout::Split(rng.random_range(1..n)),
            5 => Layout::Parity,
            _ => Layout::Guard(rng.random_range(1..n)),
        };
        let prev = p.stages.last();
        let fused = layout == Layout::Single
            && prev.is_some_and(|q| q.layout == Layout::Single && q.dims == dims)
            && rng.random_bool(0.35);
        let mut identity = Vec::new();
        if fused {
            // every member of the loop nest this stage joins
            let mut i = idx;
            while i > 0 {
                i -= 1;
                identity.push(p.stages[i].name.clone());
                if !p.stages[i].fused {
                    break;
                }
            }
        }
        let mut avail: Vec<(String, usize)> = INPUTS.iter().map(|a| (a.to_string(), 1)).collect();
        avail.extend(p.stages.iter().filter(|s| !s.output).map(|s| (s.name.clone(), s.dims)));
        let mut g = Gen {
            rng: &mut *rng,
            n,
            ctx: dims,
            avail,
            identity,
        };
        let pieces = if layout == Layout::Single { 1 } else { 2 };
        let rhs = (0..pieces).map(|_| g.rhs()).collect();
        p.stages.push(Stage {
            name,
            dims,
            output,
            layout,
            rhs,
            rev: [false, false],
            interchange: false,
            fused,
        });
    }
    p
}

#[derive(Clone, Copy)]
enum Region {
    All,
    Lower(i64),
    Upper(i64),
    Even,
    Odd,
}

fn header(var: &str, r: Region, rev: bool, n: i64) -> String {
    let last_even = if (n - 1) % 2 == 0 { n - 1 } else { n - 2 };
    let last_odd = if (n - 1) % 2 == 1 { n - 1 } else { n - 2 };
    let v = var;
    match (r, rev) {
        (Region::All, false) => format!("for ({v} = 0; {v} < N; {v}++)"),
        (Region::All, true) => format!("for ({v} = N - 1; {v} >= 0; {v}--)"),
        (Region::Lower(s), false) => format!("for ({v} = 0; {v} < {s}; {v}++)"),
        (Region::Lower(s), true) => format!("for ({v} = {}; {v} >= 0; {v}--)", s - 1),
        (Region::Upper(s), false) => format!("for ({v} = {s}; {v} < N; {v}++)"),
        (Region::Upper(s), true) => format!("for ({v} = N - 1; {v} >= {s}; {v}--)"),
        (Region::Even, false) => format!("for ({v} = 0; {v} < N; {v} += 2)"),
        (Region::Even, true) => format!("for ({v} = {last_even}; {v} >= 0; {v} -= 2)"),
        (Region::Odd, false) => format!("for ({v} = 1; {v} < N; {v} += 2)"),
        (Region::Odd, true) => format!("for ({v} = {last_odd}; {v} >= 1; {v} -= 2)"),
    }
}

fn statement(s: &Stage, piece: usize, idx: usize) -> String {
    let lhs = if s.dims == 1 { format!("{}[k]", s.name) } else { format!("{}[k][j]", s.name) };
    format!("s{idx}_{piece}: {lhs} = {};", s.rhs[piece].text())
}

/// Loop nest around `body` for a head stage, with `k` restricted to `r`.
fn nest(out: &mut String, head: &Stage, r: Region, n: i64, body: &[String]) {
    let mut loops = vec![("k", r, head.rev[0])];
    if head.dims == 2 {
        loops.push(("j", Region::All, head.rev[1]));
        if head.interchange {
            loops.swap(0, 1);
        }
    }
    let mut indent = String::from("  ");
    for (v, reg, rev) in &loops {
        out.push_str(&format!("{indent}{} {{\n", header(v, *reg, *rev, n)));
        indent.push_str("  ");
    }
    for b in body {
        for line in b.lines() {
            out.push_str(&format!("{indent}{line}\n"));
        }
    }
    for _ in &loops {
        indent.truncate(indent.len() - 2);
        out.push_str(&format!("{indent}}}\n"));
    }
}

pub fn emit(p: &Prog) -> String {
    let mut out = format!(
        "#define N {}\n/*@ assoc comm */ int f(int, int);\n/*@ assoc */ int h(int, int);\nint g(int, int);\n\n",
        p.n
    );
    let mut params = vec!["int A[]".to_string(), "int B[]".to_string()];
    let mut locals = vec!["k".to_string(), "j".to_string()];
    for s in &p.stages {
        let ext = if s.dims == 1 { "[N]" } else { "[N][N]" };
        if s.output {
            params.push(format!("int {}{ext}", s.name));
        } else {
            locals.push(format!("{}{ext}", s.name));
        }
    }
    out.push_str(&format!("foo({})\n{{\n  int {};\n", params.join(", "), locals.join(", ")));
    let mut i = 0;
    while i < p.stages.len() {
        let head = &p.stages[i];
        let mut group = vec![i];
        while i + group.len() < p.stages.len() && p.stages[i + group.len()].fused {
            group.push(i + group.len());
        }
        match head.layout {
            Layout::Single => {
                let body: Vec<String> = group.iter().map(|&g| statement(&p.stages[g], 0, g)).collect();
                nest(&mut out, head, Region::All, p.n, &body);
            }
            Layout::Split(s) => {
                nest(&mut out, head, Region::Lower(s), p.n, &[statement(head, 0, i)]);
                nest(&mut out, head, Region::Upper(s), p.n, &[statement(head, 1, i)]);
            }
            Layout::Parity => {
                nest(&mut out, head, Region::Even, p.n, &[statement(head, 0, i)]);
                nest(&mut out, head, Region::Odd, p.n, &[statement(head, 1, i)]);
            }
            Layout::Guard(s) => {
                let body = format!(
                    "if (k < {s}) {{\n  {}\n}} else {{\n  {}\n}}",
                    statement(head, 0, i),
                    statement(head, 1, i)
                );
                nest(&mut out, head, Region::All, p.n, &[body]);
            }
        }
        i += group.len();
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Reverse,
    Interchange,
    Fission,
    Fusion,
    Propagate,
    Regroup,
    Swap,
}

pub const TRANSFORMS: [Transform; 7] = [
    Transform::Reverse,
    Transform::Interchange,
    Transform::Fission,
    Transform::Fusion,
    Transform::Propagate,
    Transform::Regroup,
    Transform::Swap,
];

/// Every (stage, piece, pre-order node) position.
fn positions(p: &Prog) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for (si, s) in p.stages.iter().enumerate() {
        for (pi, e) in s.rhs.iter().enumerate() {
            for n in 0..e.size() {
                v.push((si, pi, n));
            }
        }
    }
    v
}

fn group_of(p: &Prog, i: usize) -> (usize, usize) {
    let mut start = i;
    while p.stages[start].fused {
        start -= 1;
    }
    let mut end = i + 1;
    while end < p.stages.len() && p.stages[end].fused {
        end += 1;
    }
    (start, end)
}

/// Apply `t` at a random applicable place; `None` if there is none.
pub fn transform(p: &Prog, t: Transform, rng: &mut Rng8) -> Option<Prog> {
    let mut q = p.clone();
    match t {
        Transform::Reverse => {
            let heads: Vec<usize> = (0..q.stages.len()).filter(|&i| !q.stages[i].fused).collect();
            let &i = heads.choose(rng)?;
            let d = rng.random_range(0..q.stages[i].dims);
            q.stages[i].rev[d] = !q.stages[i].rev[d];
        }
        Transform::Interchange => {
            let heads: Vec<usize> = (0..q.stages.len())
                .filter(|&i| !q.stages[i].fused && q.stages[i].dims == 2)
                .collect();
            let &i = heads.choose(rng)?;
            q.stages[i].interchange = !q.stages[i].interchange;
        }
        Transform::Fission => {
            let fused: Vec<usize> = (0..q.stages.len()).filter(|&i| q.stages[i].fused).collect();
            let &i = fused.choose(rng)?;
            let (head, _) = group_of(&q, i);
            q.stages[i].rev = q.stages[head].rev;
            q.stages[i].interchange = q.stages[head].interchange;
            q.stages[i].fused = false;
        }
        Transform::Fusion => {
            let ok: Vec<usize> = (1..q.stages.len())
                .filter(|&i| {
                    let s = &q.stages[i];
                    let (head, _) = group_of(&q, i - 1);
                    let h = &q.stages[head];
                    if s.fused || s.layout != Layout::Single || h.layout != Layout::Single || h.dims != s.dims {
                        return false;
                    }
                    let members: Vec<&str> = q.stages[head..i].iter().map(|x| x.name.as_str()).collect();
                    let mut reads = Vec::new();
                    s.rhs[0].reads(&mut reads);
                    let id = if s.dims == 1 {
                        vec![Aff::new(1, 0, 0)]
                    } else {
                        vec![Aff::new(1, 0, 0), Aff::new(0, 1, 0)]
                    };
                    reads.iter().all(|(a, idx)| !members.contains(&a.as_str()) || *idx == id)
                })
                .collect();
            let &i = ok.choose(rng)?;
            q.stages[i].fused = true;
        }
        Transform::Propagate => {
            let cands: Vec<(usize, usize, usize)> = positions(&q)
                .into_iter()
                .filter(|&(si, pi, n)| {
                    let mut e = q.stages[si].rhs[pi].clone();
                    match e.node_mut(n) {
                        Some(E::Read(a, _)) => q
                            .stages
                            .iter()
                            .any(|s| &s.name == a && !s.output && s.layout == Layout::Single),
                        _ => false,
                    }
                })
                .collect();
            let &(si, pi, n) = cands.choose(rng)?;
            let src = q.stages.clone();
            let node = q.stages[si].rhs[pi].node_mut(n)?;
            let E::Read(a, idx) = node.clone() else { return None };
            let def = src.iter().find(|s| s.name == a)?;
            let kk = idx[0];
            let jj = idx.get(1).copied().unwrap_or(Aff::new(0, 0, 0));
            *node = def.rhs[0].substitute_index(&kk, &jj);
        }
        Transform::Regroup | Transform::Swap => {
            let assoc = t == Transform::Regroup;
            let cands: Vec<(usize, usize, usize)> = positions(&q)
                .into_iter()
                .filter(|&(si, pi, n)| {
                    let mut e = q.stages[si].rhs[pi].clone();
                    let Some(x) = e.node_mut(n) else { return false };
                    if assoc {
                        regroup(x).is_some()
                    } else {
                        matches!(x, E::Bin('+' | '*', ..)) || matches!(x, E::Call(f, ..) if f == "f")
                    }
                })
                .collect();
            let &(si, pi, n) = cands.choose(rng)?;
            let node = q.stages[si].rhs[pi].node_mut(n)?;
            if assoc {
                *node = regroup(node)?;
            } else {
                match node {
                    E::Bin(_, l, r) | E::Call(_, l, r) => std::mem::swap(l, r),
                    _ => return None,
                }
            }
        }
    }
    Some(q)
}

/// `(a∘b)∘c` ⇄ `a∘(b∘c)` for an associative operator.
fn regroup(e: &E) -> Option<E> {
    let same = |x: &E, op: &E| match (x, op) {
        (E::Bin(a, ..), E::Bin(b, ..)) => a == b,
        (E::Call(a, ..), E::Call(b, ..)) => a == b,
        _ => false,
    };
    let assoc = matches!(e, E::Bin('+' | '*', ..)) || matches!(e, E::Call(f, ..) if f == "f" || f == "h");
    if !assoc {
        return None;
    }
    let rebuild = |l: E, r: E| match e {
        E::Bin(o, ..) => E::Bin(*o, Box::new(l), Box::new(r)),
        E::Call(f, ..) => E::Call(f.clone(), Box::new(l), Box::new(r)),
        _ => unreachable!(),
    };
    let (E::Bin(_, l, r) | E::Call(_, l, r)) = e else { return None };
    if same(l, e) {
        let (E::Bin(_, a, b) | E::Call(_, a, b)) = l.as_ref() else { return None };
        return Some(rebuild((**a).clone(), rebuild((**b).clone(), (**r).clone())));
    }
    if same(r, e) {
        let (E::Bin(_, b, c) | E::Call(_, b, c)) = r.as_ref() else { return None };
        return Some(rebuild(rebuild((**l).clone(), (**b).clone()), (**c).clone()));
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    Index,
    Bound,
    Operand,
}

pub const MUTATIONS: [Mutation; 3] = [Mutation::Index, Mutation::Bound, Mutation::Operand];

/// A single edit of the printed program.
pub fn mutate(p: &Prog, m: Mutation, rng: &mut Rng8) -> Option<String> {
    match m {
        Mutation::Bound => mutate_bound(&emit(p), rng),
        Mutation::Index | Mutation::Operand => {
            let mut q = p.clone();
            let pos: Vec<(usize, usize, usize)> = positions(&q)
                .into_iter()
                .filter(|&(si, pi, n)| {
                    let mut e = q.stages[si].rhs[pi].clone();
                    let x = e.node_mut(n);
                    match m {
                        Mutation::Index => matches!(x, Some(E::Read(..))),
                        _ => matches!(x, Some(E::Bin(..) | E::Const(_) | E::Read(..) | E::Call(..))),
                    }
                })
                .collect();
            let &(si, pi, n) = pos.choose(rng)?;
            let node = q.stages[si].rhs[pi].node_mut(n)?;
            match (m, node) {
                (Mutation::Index, E::Read(_, idx)) => {
                    let d = rng.random_range(0..idx.len());
                    let delta = if rng.random_bool(0.5) { 1 } else { -1 };
                    match rng.random_range(0..3) {
                        0 => idx[d].c += delta,
                        1 => idx[d].k += delta,
                        _ => idx[d].j += delta,
                    }
                }
                (_, E::Bin(op, l, r)) => match rng.random_range(0..2) {
                    0 => {
                        let cur = *op;
                        let opts: Vec<char> = ['+', '*', '-'].into_iter().filter(|&o| o != cur).collect();
                        *op = *opts.choose(rng)?;
                    }
                    _ => std::mem::swap(l, r),
                },
                (_, E::Const(c)) => *c += if rng.random_bool(0.5) { 1 } else { -1 },
                (_, E::Read(a, _)) if INPUTS.contains(&a.as_str()) => {
                    *a = if a == "A" { "B".into() } else { "A".into() };
                }
                (_, E::Read(..)) => return None,
                (_, E::Call(f, l, r)) => match rng.random_range(0..2) {
                    0 => {
                        let opts: Vec<&str> = ["f", "g", "h"].into_iter().filter(|x| x != f).collect();
                        *f = opts.choose(rng)?.to_string();
                    }
                    _ => std::mem::swap(l, r),
                },
                _ => return None,
            }
            Some(emit(&q))
        }
    }
}

fn mutate_bound(src: &str, rng: &mut Rng8) -> Option<String> {
    let lines: Vec<&str> = src.lines().collect();
    let loops: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].trim_start().starts_with("for (")).collect();
    let &li = loops.choose(rng)?;
    let line = lines[li];
    let open = line.find('(')?;
    let close = line.rfind(')')?;
    let parts: Vec<&str> = line[open + 1..close].split(';').map(str::trim).collect();
    let (init, cond, step) = (parts[0], parts[1], parts[2]);
    let delta = if rng.random_bool(0.5) { "+ 1" } else { "- 1" };
    let (init, cond) = if rng.random_bool(0.5) {
        (format!("{init} {delta}"), cond.to_string())
    } else {
        (init.to_string(), format!("{cond} {delta}"))
    };
    let new = format!("{}({init}; {cond}; {step}){}", &line[..open], &line[close + 1..]);
    let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    out[li] = new;
    Some(out.join("\n") + "\n")
}
