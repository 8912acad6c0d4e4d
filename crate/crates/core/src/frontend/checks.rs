use std::fmt;

use num_bigint::BigInt;

use super::ast::{Access, ArrayClass, Program, SchedEntry, StatementInfo};
use crate::relation::{Budget, Conjunct, Constraint, IntRelation, IntTupleSpace, LinExpr, RelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// An element written more than once.
    SingleAssignment,
    /// A read executed before (or at) the write it depends on.
    DefUseOrder,
    /// A read of an element of a non-input array that is never written.
    UninitializedRead,
    OutOfBounds,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::SingleAssignment => "single-assignment",
            ViolationKind::DefUseOrder => "def-use-order",
            ViolationKind::UninitializedRead => "uninitialized-read",
            ViolationKind::OutOfBounds => "out-of-bounds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassViolation {
    pub kind: ViolationKind,
    pub array: String,
    /// Labels of the statements involved.
    pub statements: Vec<String>,
    /// An offending array element.
    pub element: Option<Vec<BigInt>>,
    pub message: String,
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

fn show(p: &[BigInt]) -> String {
    let v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", v.join("]["))
}

fn tuple(p: &[BigInt]) -> String {
    let v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", v.join(", "))
}

/// All class checks in order; the first failing check's violations are returned.
pub fn check_class(p: &Program, budget: &Budget) -> Result<Vec<ClassViolation>, RelError> {
    let v = check_extents(p, budget)?;
    if !v.is_empty() {
        return Ok(v);
    }
    let v = check_single_assignment(p, budget)?;
    if !v.is_empty() {
        return Ok(v);
    }
    check_def_use(p, budget)
}

/// `{ (i, j) | i <lex j }` over `n + n` variables.
fn lex_less(n: usize) -> Vec<Conjunct> {
    (0..n)
        .map(|l| {
            let mut c = Conjunct::universe(2 * n, 0);
            for k in 0..l {
                c.add(Constraint::Eq(LinExpr::var(2 * n, n + k).sub(&LinExpr::var(2 * n, k))));
            }
            c.add(Constraint::Ge(
                LinExpr::var(2 * n, n + l)
                    .sub(&LinExpr::var(2 * n, l))
                    .add_constant(&BigInt::from(-1)),
            ));
            c
        })
        .collect()
}

pub fn check_single_assignment(p: &Program, budget: &Budget) -> Result<Vec<ClassViolation>, RelError> {
    let mut out = Vec::new();
    let stmts = &p.statements;
    for (a, s) in stmts.iter().enumerate() {
        let ws = s.write_relation()?;
        for t in &stmts[a..] {
            if t.lhs.array != s.lhs.array {
                continue;
            }
            let wt = ws_of(t, s, &ws)?;
            // pairs of instances writing the same element
            let mut same = ws.compose_with(&wt.inverse(), budget)?;
            if std::ptr::eq(s, t) {
                let n = s.iterators.len();
                let order = IntRelation::from_conjuncts(
                    IntTupleSpace::new(n),
                    IntTupleSpace::new(n),
                    lex_less(n),
                );
                same = same.intersect_with(&order, budget)?;
            }
            if let Some(pt) = same.sample_point_with(budget)? {
                let (i, j) = pt.split_at(s.iterators.len());
                let elem = eval_access(&s.lhs, &s.iterators, i);
                let message = if std::ptr::eq(s, t) {
                    format!(
                        "{} writes {}{} at iterations {} and {}",
                        s.label,
                        s.lhs.array,
                        show(&elem),
                        tuple(i),
                        tuple(j)
                    )
                } else {
                    format!("{} and {} both write {}{}", s.label, t.label, s.lhs.array, show(&elem))
                };
                let mut statements = vec![s.label.clone()];
                if !std::ptr::eq(s, t) {
                    statements.push(t.label.clone());
                }
                out.push(ClassViolation {
                    kind: ViolationKind::SingleAssignment,
                    array: s.lhs.array.clone(),
                    statements,
                    element: Some(elem),
                    message,
                });
            }
        }
    }
    Ok(out)
}

fn ws_of(t: &StatementInfo, s: &StatementInfo, ws: &IntRelation) -> Result<IntRelation, RelError> {
    if std::ptr::eq(s, t) {
        Ok(ws.clone())
    } else {
        t.write_relation()
    }
}

fn eval_access(a: &Access, iterators: &[String], point: &[BigInt]) -> Vec<BigInt> {
    let env = |name: &str| -> BigInt {
        let k = iterators.iter().position(|n| n == name).expect("iterator in scope");
        point[k].clone()
    };
    a.index
        .iter()
        .map(|e| {
            e.terms
                .iter()
                .fold(BigInt::from(e.constant), |acc, (n, &c)| acc + BigInt::from(c) * env(n))
        })
        .collect()
}

/// The schedule entry as an expression over `n_vars` variables, iterators
/// starting at `offset`.
fn sched_expr(e: SchedEntry, n_vars: usize, offset: usize) -> LinExpr {
    match e {
        SchedEntry::Position(p) => LinExpr::constant(n_vars, p),
        SchedEntry::Iter { depth, sign } => LinExpr::var(n_vars, offset + depth).scale(&BigInt::from(sign)),
    }
}

/// `{ (i, j) | schedule_w(j) does not strictly precede schedule_r(i) }`.
fn not_before(r: &StatementInfo, w: &StatementInfo) -> IntRelation {
    let nr = r.iterators.len();
    let nw = w.iterators.len();
    let nv = nr + nw;
    let len = r.schedule.len().min(w.schedule.len());
    let mut conjuncts = Vec::new();
    let mut prefix = Conjunct::universe(nv, 0);
    for l in 0..=len {
        if l == len {
            conjuncts.push(prefix.clone());
            break;
        }
        let re = sched_expr(r.schedule[l], nv, 0);
        let we = sched_expr(w.schedule[l], nv, nr);
        let mut c = prefix.clone();
        c.add(Constraint::Ge(we.sub(&re).add_constant(&BigInt::from(-1))));
        conjuncts.push(c);
        prefix.add(Constraint::Eq(we.sub(&re)));
    }
    IntRelation::from_conjuncts(IntTupleSpace::new(nr), IntTupleSpace::new(nw), conjuncts)
}

pub fn check_def_use(p: &Program, budget: &Budget) -> Result<Vec<ClassViolation>, RelError> {
    let mut out = Vec::new();
    for r in &p.statements {
        for acc in r.rhs.reads() {
            if p.array_class(&acc.array) == Some(ArrayClass::Input) {
                continue;
            }
            let rr = r.access_relation(acc)?;
            let writers = p.writers(&acc.array);
            let mut written = IntRelation::empty_set(acc.index.len());
            for w in &writers {
                let wr = w.write_relation()?;
                written = written.union(&wr.range_with(budget)?)?;
                let dep = rr.compose_with(&wr.inverse(), budget)?;
                let bad = dep.intersect_with(&not_before(r, w), budget)?;
                if let Some(pt) = bad.sample_point_with(budget)? {
                    let (i, j) = pt.split_at(r.iterators.len());
                    let elem = eval_access(acc, &r.iterators, i);
                    out.push(ClassViolation {
                        kind: ViolationKind::DefUseOrder,
                        array: acc.array.clone(),
                        statements: vec![r.label.clone(), w.label.clone()],
                        element: Some(elem.clone()),
                        message: format!(
                            "{} reads {}{} at iteration {} before {} writes it at iteration {}",
                            r.label,
                            acc.array,
                            show(&elem),
                            tuple(i),
                            w.label,
                            tuple(j)
                        ),
                    });
                }
            }
            let missing = rr.range_with(budget)?.difference_with(&written, budget)?;
            if let Some(elem) = missing.sample_point_with(budget)? {
                out.push(ClassViolation {
                    kind: ViolationKind::UninitializedRead,
                    array: acc.array.clone(),
                    statements: vec![r.label.clone()],
                    element: Some(elem.clone()),
                    message: format!("{} reads {}{} which is never written", r.label, acc.array, show(&elem)),
                });
            }
        }
    }
    Ok(out)
}

pub fn check_extents(p: &Program, budget: &Budget) -> Result<Vec<ClassViolation>, RelError> {
    let mut out = Vec::new();
    for s in &p.statements {
        for acc in std::iter::once(&s.lhs).chain(s.rhs.reads()) {
            let Some(ext) = p.extents(&acc.array) else { continue };
            let m = ext.len();
            let mut bounds = Conjunct::universe(m, 0);
            for (d, e) in ext.iter().enumerate() {
                bounds.add(Constraint::Ge(LinExpr::var(m, d)));
                if let Some(e) = e {
                    bounds.add(Constraint::Ge(LinExpr::var(m, d).neg().add_constant(&BigInt::from(e - 1))));
                }
            }
            let inside = IntRelation::from_conjuncts(IntTupleSpace::new(m), IntTupleSpace::new(0), vec![bounds]);
            let touched = s.access_relation(acc)?.range_with(budget)?;
            let outside = touched.difference_with(&inside, budget)?;
            if let Some(elem) = outside.sample_point_with(budget)? {
                out.push(ClassViolation {
                    kind: ViolationKind::OutOfBounds,
                    array: acc.array.clone(),
                    statements: vec![s.label.clone()],
                    element: Some(elem.clone()),
                    message: format!("{} accesses {}{} outside the declared extents", s.label, acc.array, show(&elem)),
                });
            }
        }
    }
    Ok(out)
}
