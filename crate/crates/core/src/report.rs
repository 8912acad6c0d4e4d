//! End-to-end check of two program texts, and its structured and text
//! reports. Both renderings come from the same [`Report`] value.

use std::fmt::Write;
use std::time::Instant;

use serde::Serialize;

use crate::addg::Addg;
use crate::checker::{check_equivalence, CheckConfig, OutputReport, PieceStatus, Stats, Verdict};
use crate::frontend::{check_class, parse, ClassViolation, ErrorKind, FrontendError, Program};
use crate::relation::Budget;

pub const TOOL_VERSION: &str = concat!("arrayeq ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Parse,
    Class,
    Addg,
    Check,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub program: String,
    pub kind: &'static str,
    pub array: String,
    pub statements: Vec<String>,
    pub element: Option<Vec<String>>,
    pub message: String,
}

impl ViolationReport {
    fn new(program: &str, v: &ClassViolation) -> Self {
        ViolationReport {
            program: program.to_string(),
            kind: v.kind.name(),
            array: v.array.clone(),
            statements: v.statements.clone(),
            element: v.element.as_ref().map(|e| e.iter().map(|x| x.to_string()).collect()),
            message: v.message.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub class_ms: f64,
    pub addg_ms: f64,
    pub check_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub original: String,
    pub transformed: String,
    #[serde(flatten)]
    pub check: CheckConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    /// `Equivalent`, `Inequivalent`, or `Unsupported`.
    pub verdict: String,
    /// Why the verdict is `Unsupported`, or why a phase stopped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Phase that stopped the run early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationReport>,
    pub outputs: Vec<OutputReport>,
    pub stats: Stats,
    pub timings: Timings,
    #[serde(rename = "config-echo")]
    pub config_echo: ConfigEcho,
    #[serde(rename = "tool-version")]
    pub tool_version: &'static str,
    /// Process exit status for this report.
    #[serde(skip)]
    pub exit_code: i32,
}

pub const EXIT_EQUIVALENT: i32 = 0;
pub const EXIT_INEQUIVALENT: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

struct Clock {
    start: Instant,
    t: Timings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

impl Report {
    fn stopped(phase: Phase, reason: String, exit_code: i32, echo: ConfigEcho, clock: Clock) -> Report {
        let mut t = clock.t;
        t.total_ms = ms(clock.start);
        Report {
            verdict: "Unsupported".to_string(),
            reason: Some(reason),
            phase: Some(phase),
            violations: Vec::new(),
            outputs: Vec::new(),
            stats: Stats::default(),
            timings: t,
            config_echo: echo,
            tool_version: TOOL_VERSION,
            exit_code,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
    }
}

fn parse_error(file: &str, e: &FrontendError) -> (String, i32) {
    let code = if e.kind == ErrorKind::Syntax { EXIT_USAGE } else { EXIT_UNSUPPORTED };
    (e.render(file), code)
}

/// Parse, validate, build graphs, and check two programs.
pub fn check_sources(name_a: &str, src_a: &str, name_b: &str, src_b: &str, cfg: &CheckConfig) -> Report {
    let echo = ConfigEcho {
        original: name_a.to_string(),
        transformed: name_b.to_string(),
        check: cfg.clone(),
    };
    let mut clock = Clock {
        start: Instant::now(),
        t: Timings {
            parse_ms: 0.0,
            class_ms: 0.0,
            addg_ms: 0.0,
            check_ms: 0.0,
            total_ms: 0.0,
        },
    };
    let t = Instant::now();
    let parsed: Vec<Result<Program, (String, i32)>> = [(name_a, src_a), (name_b, src_b)]
        .into_iter()
        .map(|(n, s)| parse(s).map_err(|e| parse_error(n, &e)))
        .collect();
    clock.t.parse_ms = ms(t);
    let mut programs = Vec::new();
    for p in parsed {
        match p {
            Ok(p) => programs.push(p),
            Err((msg, code)) => return Report::stopped(Phase::Parse, msg, code, echo, clock),
        }
    }
    let t = Instant::now();
    let budget = Budget::new(cfg.budget);
    let mut violations = Vec::new();
    for (name, p) in [(name_a, &programs[0]), (name_b, &programs[1])] {
        match check_class(p, &budget) {
            Ok(v) => violations.extend(v.iter().map(|v| ViolationReport::new(name, v))),
            Err(e) => {
                clock.t.class_ms = ms(t);
                return Report::stopped(Phase::Class, format!("{name}: {e}"), EXIT_UNSUPPORTED, echo, clock);
            }
        }
    }
    clock.t.class_ms = ms(t);
    if !violations.is_empty() {
        let reason = format!(
            "{}: {} violation: {}",
            violations[0].program, violations[0].kind, violations[0].message
        );
        let mut r = Report::stopped(Phase::Class, reason, EXIT_UNSUPPORTED, echo, clock);
        r.violations = violations;
        return r;
    }
    let t = Instant::now();
    let mut graphs = Vec::new();
    for (name, p) in [(name_a, &programs[0]), (name_b, &programs[1])] {
        match Addg::build_with(p, &budget) {
            Ok(g) => graphs.push(g),
            Err(e) => {
                clock.t.addg_ms = ms(t);
                return Report::stopped(Phase::Addg, format!("{name}: {e}"), EXIT_UNSUPPORTED, echo, clock);
            }
        }
    }
    clock.t.addg_ms = ms(t);
    let t = Instant::now();
    let result = check_equivalence(&graphs[0], &graphs[1], cfg);
    clock.t.check_ms = ms(t);
    clock.t.total_ms = ms(clock.start);
    let (reason, exit_code) = match &result.verdict {
        Verdict::Equivalent => (None, EXIT_EQUIVALENT),
        Verdict::Inequivalent(_) => (None, EXIT_INEQUIVALENT),
        Verdict::Unsupported(r) => (Some(r.clone()), EXIT_UNSUPPORTED),
    };
    Report {
        verdict: result.verdict.name().to_string(),
        reason,
        phase: None,
        violations: Vec::new(),
        outputs: result.outputs,
        stats: result.stats,
        timings: clock.t,
        config_echo: echo,
        tool_version: TOOL_VERSION,
        exit_code,
    }
}

fn status_name(s: PieceStatus) -> &'static str {
    match s {
        PieceStatus::Equivalent => "equivalent",
        PieceStatus::Inequivalent => "inequivalent",
        PieceStatus::Unsupported => "unsupported",
    }
}

/// Human-readable rendering of a report.
pub fn render_text(r: &Report, verbose: bool) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", r.verdict);
    if let Some(reason) = &r.reason {
        let _ = write!(s, ": {reason}");
    }
    s.push('\n');
    for v in &r.violations {
        let _ = writeln!(s, "  {}: {} ({}): {}", v.program, v.kind, v.statements.join(", "), v.message);
    }
    for o in &r.outputs {
        for p in &o.pieces {
            if !verbose && p.status == PieceStatus::Equivalent {
                continue;
            }
            let _ = writeln!(s, "output {} on {}: {}", o.name, p.domain, status_name(p.status));
            for u in &p.unsupported {
                let _ = writeln!(s, "  unsupported: {u}");
            }
            for d in &p.diagnostics {
                let _ = writeln!(s, "  {}: {}", d.kind.name(), d.message);
                let num = |n: Option<usize>| n.map_or(String::new(), |n| format!(" (path {n})"));
                if !d.failing_path_a.is_empty() {
                    let _ = writeln!(s, "    a{}: {}", num(d.path_a), d.failing_path_a);
                }
                if !d.failing_path_b.is_empty() {
                    let _ = writeln!(s, "    b{}: {}", num(d.path_b), d.failing_path_b);
                }
                if !d.statements.a.is_empty() || !d.statements.b.is_empty() {
                    let _ = writeln!(
                        s,
                        "    statements: a: {}; b: {}",
                        d.statements.a.join(", "),
                        d.statements.b.join(", ")
                    );
                }
                if let Some(m) = &d.mapping_a {
                    let _ = writeln!(s, "    mapping a: {m}");
                }
                if let Some(m) = &d.mapping_b {
                    let _ = writeln!(s, "    mapping b: {m}");
                }
                if let Some(m) = &d.domain_of_disagreement {
                    let _ = writeln!(s, "    differs on: {m}");
                }
                if let Some(h) = &d.hint {
                    let _ = writeln!(s, "    hint: {h}");
                }
            }
            if verbose {
                for q in &p.pairings {
                    let num = |n: Option<usize>| n.map_or("-".to_string(), |n| n.to_string());
                    let _ = writeln!(
                        s,
                        "  pair {} / {}: {}",
                        num(q.path_a),
                        num(q.path_b),
                        if q.equal { "equal" } else { "different" }
                    );
                }
            }
        }
        if o.diagnostics_omitted > 0 {
            let _ = writeln!(s, "output {}: {} more diagnostics omitted", o.name, o.diagnostics_omitted);
        }
    }
    let t = &r.timings;
    let _ = writeln!(
        s,
        "time: {:.1} ms (parse {:.1}, class {:.1}, addg {:.1}, check {:.1})",
        t.total_ms, t.parse_ms, t.class_ms, t.addg_ms, t.check_ms
    );
    s
}
