//! Diagnostics for failed equivalence checks: the failing paths, the
//! statements and expressions on them, the mappings that disagree, and a
//! guess at the erroneous index expression.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::addg::{Addg, Occurrence};
use crate::checker::{Failure, LeafRecord, Side};
use crate::relation::{Budget, IntRelation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    /// Different operators, or different operand counts after flattening.
    OperatorMismatch,
    /// Paths end at different inputs or constants.
    LeafMismatch,
    /// Paths end at the same input through different mappings.
    MappingMismatch,
    /// A read of elements no statement writes.
    UncoveredRead,
    /// Outputs differ in presence, dimension, or written elements.
    InterfaceMismatch,
}

impl DiagnosticKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::OperatorMismatch => "operator-mismatch",
            DiagnosticKind::LeafMismatch => "leaf-mismatch",
            DiagnosticKind::MappingMismatch => "mapping-mismatch",
            DiagnosticKind::UncoveredRead => "uncovered-read",
            DiagnosticKind::InterfaceMismatch => "interface-mismatch",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Statements {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

/// A statement or array read on a failing path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuspectExpr {
    pub program: String,
    pub statement: String,
    /// `buf₂ in v3` for reads, the statement label for left-hand sides.
    pub occurrence: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub output_var: String,
    pub message: String,
    pub failing_path_a: String,
    pub failing_path_b: String,
    /// Position of the failing path among all paths from the output, when
    /// the path reaches a leaf.
    pub path_a: Option<usize>,
    pub path_b: Option<usize>,
    pub statements: Statements,
    pub suspect_exprs: Vec<SuspectExpr>,
    pub mapping_a: Option<String>,
    pub mapping_b: Option<String>,
    /// Output elements on which the two sides disagree.
    pub domain_of_disagreement: Option<String>,
    pub hint: Option<String>,
}

impl Diagnostic {
    pub(crate) fn interface(output: &str, message: String, domain: Option<String>) -> Self {
        Diagnostic {
            kind: DiagnosticKind::InterfaceMismatch,
            output_var: output.to_string(),
            message,
            failing_path_a: String::new(),
            failing_path_b: String::new(),
            path_a: None,
            path_b: None,
            statements: Statements::default(),
            suspect_exprs: Vec::new(),
            mapping_a: None,
            mapping_b: None,
            domain_of_disagreement: domain,
            hint: None,
        }
    }
}

/// Simplified text of a relation, or its raw text if simplification runs
/// out of budget.
pub fn render_simplified(r: &IntRelation, budget: &Budget) -> String {
    r.prune(budget).unwrap_or_else(|_| r.clone()).to_string()
}

fn suspects(g: &Addg, program: &str, trace: &[usize]) -> Vec<SuspectExpr> {
    let mut out = Vec::new();
    for s in g.statements_on(trace) {
        let rec = &g.statements[&s];
        out.push(SuspectExpr {
            program: program.to_string(),
            statement: s.clone(),
            occurrence: s.clone(),
            text: rec.lhs_text.clone(),
        });
    }
    for o in g.occurrences_on(trace) {
        out.push(SuspectExpr {
            program: program.to_string(),
            statement: o.stmt.clone(),
            occurrence: o.to_string(),
            text: o.text.clone(),
        });
    }
    out
}

fn disagreement(f: &Failure, budget: &Budget) -> Option<IntRelation> {
    let d = match (&f.map_a, &f.map_b) {
        (Some(a), Some(b)) if f.kind == DiagnosticKind::MappingMismatch => {
            let sym = a.difference_with(b, budget).ok()?.union(&b.difference_with(a, budget).ok()?).ok()?;
            sym.domain_with(budget).ok()?
        }
        (Some(a), Some(b)) => a.domain_with(budget).ok()?.union(&b.domain_with(budget).ok()?).ok()?,
        (Some(m), None) | (None, Some(m)) => m.domain_with(budget).ok()?,
        (None, None) => return None,
    };
    d.simplify(budget).ok()
}

pub(crate) fn build(f: &Failure, output: &str, ga: &Addg, gb: &Addg, budget: &Budget) -> Diagnostic {
    let mut suspect_exprs = suspects(ga, "a", &f.trace_a);
    suspect_exprs.extend(suspects(gb, "b", &f.trace_b));
    let render = |m: &Option<IntRelation>| m.as_ref().map(|m| render_simplified(m, budget));
    Diagnostic {
        kind: f.kind,
        output_var: output.to_string(),
        message: f.message.clone(),
        failing_path_a: ga.path_text(&f.trace_a),
        failing_path_b: gb.path_text(&f.trace_b),
        path_a: ga.path_number(&f.trace_a),
        path_b: gb.path_number(&f.trace_b),
        statements: Statements {
            a: ga.statements_on(&f.trace_a),
            b: gb.statements_on(&f.trace_b),
        },
        suspect_exprs,
        mapping_a: render(&f.map_a),
        mapping_b: render(&f.map_b),
        domain_of_disagreement: disagreement(f, budget).map(|d| d.to_string()),
        hint: None,
    }
}

fn tagged(ga: &Addg, gb: &Addg, ta: &[usize], tb: &[usize]) -> BTreeSet<(u8, Occurrence)> {
    let a = ga.occurrences_on(ta).into_iter().map(|o| (0u8, o));
    let b = gb.occurrences_on(tb).into_iter().map(|o| (1u8, o));
    a.chain(b).collect()
}

/// The one array read that lies on every failing path pair and on no
/// succeeding pair of the same piece, if there is exactly one. Needs at
/// least two failing pairs to say anything.
pub fn common_variable_heuristic(
    failing: &[&Failure],
    succeeded: &[&LeafRecord],
    ga: &Addg,
    gb: &Addg,
) -> Option<String> {
    if failing.len() < 2 {
        return None;
    }
    let mut common = tagged(ga, gb, &failing[0].trace_a, &failing[0].trace_b);
    for f in &failing[1..] {
        let t = tagged(ga, gb, &f.trace_a, &f.trace_b);
        common.retain(|x| t.contains(x));
    }
    for r in succeeded {
        let t = tagged(ga, gb, &r.trace_a, &r.trace_b);
        common.retain(|x| !t.contains(x));
    }
    if common.len() != 1 {
        return None;
    }
    let (side, occ) = common.into_iter().next()?;
    let side = if side == 0 { Side::A } else { Side::B };
    Some(format!(
        "{occ} ({}) in program {} lies on every failing path and on no matching one; its index expression may be wrong",
        occ.text,
        if side == Side::A { "a" } else { "b" }
    ))
}
