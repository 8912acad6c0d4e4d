//! Equivalence checking by synchronized traversal of two ADDGs, with
//! flattening of associative chains, matching of commutative operands, and
//! a table of proven sub-equivalences.

mod engine;
mod matching;
mod memo;

use std::collections::BTreeMap;

use serde::Serialize;

pub use engine::{Cursor, Failure, LeafRecord, Outcome, Side};

use crate::addg::{Addg, NodeId};
use crate::diagnostics::{self, Diagnostic, DiagnosticKind};
use crate::relation::{IntRelation, RelError, DEFAULT_BUDGET};
use engine::Engine;

pub const DEFAULT_LOOKAHEAD: usize = 8;
pub const DEFAULT_MAX_DIAGNOSTICS: usize = 20;
pub const MIN_BUDGET: u64 = 1_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckConfig {
    /// Only these outputs are checked (all when `None`).
    pub focus: Option<Vec<String>>,
    /// Arrays declared to hold the same values in both programs
    /// (`(name in a, name in b)`).
    pub correspondences: Vec<(String, String)>,
    /// Work limit for each relation-engine decision.
    pub budget: u64,
    /// Nesting limit for resolving ambiguous operator operands.
    pub lookahead: usize,
    pub memo: bool,
    /// Flattening and matching for associative / commutative operators.
    pub normalize: bool,
    pub max_diagnostics: usize,
    /// Re-check the lock-step domain invariant at every step.
    pub verify_invariants: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            focus: None,
            correspondences: Vec::new(),
            budget: DEFAULT_BUDGET,
            lookahead: DEFAULT_LOOKAHEAD,
            memo: true,
            normalize: true,
            max_diagnostics: DEFAULT_MAX_DIAGNOSTICS,
            verify_invariants: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Sub-checks started at operator or intermediate-array pairs that were
    /// not answered from the memo table.
    pub sub_traversals: u64,
    pub memo_hits: u64,
    pub memo_entries: usize,
    pub leaf_comparisons: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceStatus {
    Equivalent,
    Inequivalent,
    Unsupported,
}

/// A compared pair of leaves, by path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pairing {
    pub path_a: Option<usize>,
    pub path_b: Option<usize>,
    pub trace_a: String,
    pub trace_b: String,
    pub mapping_a: Option<String>,
    pub mapping_b: Option<String>,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceReport {
    pub domain: String,
    pub status: PieceStatus,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unsupported: Vec<String>,
    pub pairings: Vec<Pairing>,
    #[serde(skip)]
    pub domain_set: IntRelation,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputReport {
    pub name: String,
    pub pieces: Vec<PieceReport>,
    #[serde(skip_serializing_if = "is_zero")]
    pub diagnostics_omitted: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Equivalent,
    Inequivalent(Vec<Diagnostic>),
    Unsupported(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Equivalent => "Equivalent",
            Verdict::Inequivalent(_) => "Inequivalent",
            Verdict::Unsupported(_) => "Unsupported",
        }
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub outputs: Vec<OutputReport>,
    pub stats: Stats,
}

impl CheckResult {
    fn unsupported(reason: String) -> Self {
        CheckResult {
            verdict: Verdict::Unsupported(reason),
            outputs: Vec::new(),
            stats: Stats::default(),
        }
    }

    pub fn diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.outputs.iter().flat_map(|o| o.pieces.iter().flat_map(|p| p.diagnostics.iter()))
    }
}

pub fn check_equivalence(ga: &Addg, gb: &Addg, cfg: &CheckConfig) -> CheckResult {
    for (g, side) in [(ga, "a"), (gb, "b")] {
        if let Err(c) = g.detect_cycles() {
            return CheckResult::unsupported(format!("program {side}: {c}"));
        }
    }
    let mut hints = BTreeMap::new();
    for (x, y) in &cfg.correspondences {
        match (ga.array(x), gb.array(y)) {
            (Some(a), Some(b)) if ga.nodes[a].arity == gb.nodes[b].arity => {
                hints.insert(a, b);
            }
            (Some(_), Some(_)) => {
                return CheckResult::unsupported(format!("correspondence {x}={y}: arrays differ in dimension"))
            }
            _ => return CheckResult::unsupported(format!("correspondence {x}={y}: unknown array")),
        }
    }
    let mut names: Vec<String> = Vec::new();
    for g in [ga, gb] {
        for &r in &g.roots {
            let n = g.nodes[r].array_name().unwrap_or_default().to_string();
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    if let Some(focus) = &cfg.focus {
        for f in focus {
            if !names.contains(f) {
                names.push(f.clone());
            }
        }
        names.retain(|n| focus.contains(n));
    }
    let mut eng = Engine::new(ga, gb, cfg, hints.clone());
    let mut outputs = Vec::new();
    let output_root = |g: &Addg, n: &str| g.array(n).filter(|id| g.roots.contains(id));
    for name in &names {
        let report = match (output_root(ga, name), output_root(gb, name)) {
            (Some(a), Some(b)) => check_output(&mut eng, name, a, b),
            (a, _) => OutputReport {
                name: name.clone(),
                pieces: vec![interface_piece(
                    name,
                    format!(
                        "output {name} exists only in program {}",
                        if a.is_some() { "a" } else { "b" }
                    ),
                    None,
                )],
                diagnostics_omitted: 0,
            },
        };
        outputs.push(report);
    }
    for (a, b) in hints {
        let name = {
            let x = ga.nodes[a].array_name().unwrap_or_default();
            let y = gb.nodes[b].array_name().unwrap_or_default();
            if x == y {
                x.to_string()
            } else {
                format!("{x}={y}")
            }
        };
        // a correspondence is itself an obligation: check it like an output
        let saved = std::mem::take(&mut eng.hints);
        let mut rest = saved.clone();
        rest.remove(&a);
        eng.hints = rest;
        outputs.push(check_output(&mut eng, &name, a, b));
        eng.hints = saved;
    }
    for o in outputs.iter_mut() {
        let mut budget = cfg.max_diagnostics;
        for p in o.pieces.iter_mut() {
            let keep = p.diagnostics.len().min(budget);
            o.diagnostics_omitted += p.diagnostics.len() - keep;
            p.diagnostics.truncate(keep);
            budget -= keep;
        }
    }
    let mut stats = eng.stats.clone();
    stats.memo_entries = eng.memo.len();
    let diags: Vec<Diagnostic> = outputs
        .iter()
        .flat_map(|o| o.pieces.iter().flat_map(|p| p.diagnostics.iter().cloned()))
        .collect();
    let failed = outputs.iter().any(|o| o.pieces.iter().any(|p| p.status == PieceStatus::Inequivalent));
    let unsupported = outputs
        .iter()
        .flat_map(|o| o.pieces.iter().flat_map(|p| p.unsupported.iter()))
        .next()
        .cloned();
    let verdict = if failed {
        Verdict::Inequivalent(diags)
    } else if let Some(u) = unsupported {
        Verdict::Unsupported(u)
    } else {
        Verdict::Equivalent
    };
    CheckResult {
        verdict,
        outputs,
        stats,
    }
}

fn interface_piece(name: &str, message: String, domain: Option<&IntRelation>) -> PieceReport {
    let d = Diagnostic::interface(name, message, domain.map(|d| d.to_string()));
    PieceReport {
        domain: domain.map_or_else(|| "{}".to_string(), |d| d.to_string()),
        status: PieceStatus::Inequivalent,
        diagnostics: vec![d],
        unsupported: Vec::new(),
        pairings: Vec::new(),
        domain_set: domain.cloned().unwrap_or_else(|| IntRelation::empty_set(0)),
    }
}

fn unsupported_piece(reason: String) -> PieceReport {
    PieceReport {
        domain: "{}".to_string(),
        status: PieceStatus::Unsupported,
        diagnostics: Vec::new(),
        unsupported: vec![reason],
        pairings: Vec::new(),
        domain_set: IntRelation::empty_set(0),
    }
}

fn write_set(g: &Addg, n: NodeId) -> Result<IntRelation, RelError> {
    let mut w = IntRelation::empty_set(g.nodes[n].arity);
    for &e in g.definers(n) {
        w = w.union(&g.statements[&g.edges[e].stmt].write_set)?;
    }
    Ok(w)
}

fn check_output(eng: &mut Engine, name: &str, na: NodeId, nb: NodeId) -> OutputReport {
    let pieces = match output_pieces(eng, name, na, nb) {
        Ok(p) => p,
        Err(e) => vec![unsupported_piece(e.to_string())],
    };
    OutputReport {
        name: name.to_string(),
        pieces,
        diagnostics_omitted: 0,
    }
}

fn output_pieces(eng: &mut Engine, name: &str, na: NodeId, nb: NodeId) -> Result<Vec<PieceReport>, RelError> {
    let (ga, gb) = (eng.ga, eng.gb);
    let budget = eng.budget();
    if ga.nodes[na].arity != gb.nodes[nb].arity {
        return Ok(vec![interface_piece(
            name,
            format!("output {name} has different dimensions in the two programs"),
            None,
        )]);
    }
    let wa = write_set(ga, na)?;
    let wb = write_set(gb, nb)?;
    let mut pieces = Vec::new();
    let only = wa
        .difference_with(&wb, &budget)?
        .union(&wb.difference_with(&wa, &budget)?)?
        .simplify(&budget)?;
    if !only.is_empty_with(&budget)? {
        pieces.push(interface_piece(
            name,
            format!("the programs write different elements of {name}"),
            Some(&only),
        ));
    }
    let common = wa.intersect_with(&wb, &budget)?;
    for &ea in ga.definers(na) {
        let sa = &ga.statements[&ga.edges[ea].stmt].write_set;
        for &eb in gb.definers(nb) {
            let sb = &gb.statements[&gb.edges[eb].stmt].write_set;
            let d = common
                .intersect_with(sa, &budget)?
                .intersect_with(sb, &budget)?
                .simplify(&budget)?;
            if d.is_empty_with(&budget)? {
                continue;
            }
            let id = IntRelation::identity(&d);
            let start_a = Cursor {
                node: na,
                map: id.clone(),
                trace: Vec::new(),
            };
            let start_b = Cursor {
                node: nb,
                map: id,
                trace: Vec::new(),
            };
            let outcome = match (eng.step(Side::A, &start_a, ea), eng.step(Side::B, &start_b, eb)) {
                (Ok(ca), Ok(cb)) => eng.check(ca, cb, true),
                (Err(e), _) | (_, Err(e)) => Outcome {
                    unsupported: vec![e.to_string()],
                    ..Outcome::default()
                },
            };
            pieces.push(piece_report(eng, name, d, outcome));
        }
    }
    Ok(pieces)
}

fn piece_report(eng: &Engine, name: &str, domain: IntRelation, o: Outcome) -> PieceReport {
    let (ga, gb) = (eng.ga, eng.gb);
    let budget = eng.budget();
    let mut diagnostics: Vec<Diagnostic> = o
        .failures
        .iter()
        .map(|f| diagnostics::build(f, name, ga, gb, &budget))
        .collect();
    let failing: Vec<&Failure> = o
        .failures
        .iter()
        .filter(|f| matches!(f.kind, DiagnosticKind::MappingMismatch | DiagnosticKind::LeafMismatch))
        .collect();
    let succeeded: Vec<&LeafRecord> = o.records.iter().filter(|r| r.ok).collect();
    if let Some(hint) = diagnostics::common_variable_heuristic(&failing, &succeeded, ga, gb) {
        for (d, f) in diagnostics.iter_mut().zip(&o.failures) {
            if matches!(f.kind, DiagnosticKind::MappingMismatch | DiagnosticKind::LeafMismatch) {
                d.hint = Some(hint.clone());
            }
        }
    }
    let render = |m: &Option<IntRelation>| m.as_ref().map(|m| diagnostics::render_simplified(m, &budget));
    let pairings = o
        .records
        .iter()
        .map(|r| Pairing {
            path_a: ga.path_number(&r.trace_a),
            path_b: gb.path_number(&r.trace_b),
            trace_a: ga.path_text(&r.trace_a),
            trace_b: gb.path_text(&r.trace_b),
            mapping_a: render(&r.map_a),
            mapping_b: render(&r.map_b),
            equal: r.ok,
        })
        .collect();
    let status = if o.failed {
        PieceStatus::Inequivalent
    } else if !o.unsupported.is_empty() {
        PieceStatus::Unsupported
    } else {
        PieceStatus::Equivalent
    };
    PieceReport {
        domain: diagnostics::render_simplified(&domain, &budget),
        status,
        diagnostics,
        unsupported: o.unsupported,
        pairings,
        domain_set: domain,
    }
}
