use std::collections::BTreeMap;

use super::matching::max_matching;
use super::memo::Memo;
use super::{CheckConfig, Stats};
use crate::addg::{demand_split, reduce_intermediate, Addg, EdgeId, NodeId, NodeKind};
use crate::diagnostics::DiagnosticKind;
use crate::relation::{Budget, IntRelation, RelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Traversal position on one side: the node reached, the output-current
/// mapping, and the edges taken from the root.
#[derive(Clone, Debug)]
pub struct Cursor {
    pub node: NodeId,
    pub map: IntRelation,
    pub trace: Vec<EdgeId>,
}

/// One comparison of two leaves (inputs, constants, or corresponding arrays).
#[derive(Clone, Debug)]
pub struct LeafRecord {
    pub trace_a: Vec<EdgeId>,
    pub trace_b: Vec<EdgeId>,
    /// Absent when the record was replayed from the memo table.
    pub map_a: Option<IntRelation>,
    pub map_b: Option<IntRelation>,
    pub ok: bool,
}

/// Raw material for one diagnostic.
#[derive(Clone, Debug)]
pub struct Failure {
    pub kind: DiagnosticKind,
    pub trace_a: Vec<EdgeId>,
    pub trace_b: Vec<EdgeId>,
    pub map_a: Option<IntRelation>,
    pub map_b: Option<IntRelation>,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub failed: bool,
    pub unsupported: Vec<String>,
    pub failures: Vec<Failure>,
    pub records: Vec<LeafRecord>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        !self.failed && self.unsupported.is_empty()
    }

    fn merge(&mut self, o: Outcome) {
        self.failed |= o.failed;
        self.unsupported.extend(o.unsupported);
        self.failures.extend(o.failures);
        self.records.extend(o.records);
    }

    fn fail(&mut self, f: Option<Failure>) {
        self.failed = true;
        self.failures.extend(f);
    }

    fn unsupported(reason: String) -> Outcome {
        Outcome {
            unsupported: vec![reason],
            ..Outcome::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Input(String),
    Const(i64),
    Op(String, usize),
}

pub(crate) struct Engine<'g> {
    pub ga: &'g Addg,
    pub gb: &'g Addg,
    pub cfg: &'g CheckConfig,
    /// Array nodes declared to correspond: a-side node → b-side node.
    pub hints: BTreeMap<NodeId, NodeId>,
    pub memo: Memo,
    pub stats: Stats,
    depth: usize,
}

impl<'g> Engine<'g> {
    pub fn new(ga: &'g Addg, gb: &'g Addg, cfg: &'g CheckConfig, hints: BTreeMap<NodeId, NodeId>) -> Self {
        Engine {
            ga,
            gb,
            cfg,
            hints,
            memo: Memo::default(),
            stats: Stats::default(),
            depth: 0,
        }
    }

    pub fn budget(&self) -> Budget {
        Budget::new(self.cfg.budget)
    }

    fn g(&self, side: Side) -> &'g Addg {
        match side {
            Side::A => self.ga,
            Side::B => self.gb,
        }
    }

    fn is_hinted(&self, side: Side, n: NodeId) -> bool {
        match side {
            Side::A => self.hints.contains_key(&n),
            Side::B => self.hints.values().any(|&v| v == n),
        }
    }

    /// Arrays that are reduced away: defined, and not declared corresponding.
    fn expandable(&self, side: Side, n: NodeId) -> bool {
        let g = self.g(side);
        g.nodes[n].is_array() && !g.definers(n).is_empty() && !self.is_hinted(side, n)
    }

    fn is_op(&self, side: Side, n: NodeId) -> bool {
        matches!(self.g(side).nodes[n].kind, NodeKind::Op { .. })
    }

    pub fn step(&self, side: Side, c: &Cursor, e: EdgeId) -> Result<Cursor, RelError> {
        let map = reduce_intermediate(self.g(side), &c.map, e, &self.budget())?;
        let mut trace = c.trace.clone();
        trace.push(e);
        Ok(Cursor {
            node: self.g(side).edges[e].to,
            map,
            trace,
        })
    }

    fn restrict(&self, c: &Cursor, dom: &IntRelation) -> Result<Cursor, RelError> {
        Ok(Cursor {
            node: c.node,
            map: c.map.restrict_domain_with(dom, &self.budget())?.simplify(&self.budget())?,
            trace: c.trace.clone(),
        })
    }

    /// Prove that the two cursors compute the same values for every output
    /// element in their (common) domain. With `report` unset the check
    /// stops at the first failure and builds no diagnostics.
    pub fn check(&mut self, a: Cursor, b: Cursor, report: bool) -> Outcome {
        match self.check_memo(a, b, report) {
            Ok(o) => o,
            Err(e) => Outcome::unsupported(e.to_string()),
        }
    }

    fn check_memo(&mut self, a: Cursor, b: Cursor, report: bool) -> Result<Outcome, RelError> {
        if a.map.is_empty_with(&self.budget())? && b.map.is_empty_with(&self.budget())? {
            return Ok(Outcome::default());
        }
        if self.cfg.verify_invariants {
            let da = a.map.domain_with(&self.budget())?;
            let db = b.map.domain_with(&self.budget())?;
            if !da.is_equal_with(&db, &self.budget())? {
                return Ok(Outcome::unsupported(format!(
                    "internal: lock-step domains differ ({da} vs {db})"
                )));
            }
        }
        let hinted_pair = self.hints.get(&a.node) == Some(&b.node);
        let memoizable = !hinted_pair
            && ((self.is_op(Side::A, a.node) && self.is_op(Side::B, b.node))
                || self.expandable(Side::A, a.node)
                || self.expandable(Side::B, b.node));
        if !memoizable {
            return self.check_inner(a, b, report);
        }
        let mut key = None;
        if self.cfg.memo {
            let corr = a.map.inverse().compose_with(&b.map, &self.budget())?.simplify(&self.budget())?;
            let k = corr.canonical_key();
            if let Some(recs) = self.memo.lookup(a.node, b.node, &corr, &k, &self.budget()) {
                self.stats.memo_hits += 1;
                let records = recs
                    .iter()
                    .map(|(ra, rb)| LeafRecord {
                        trace_a: a.trace.iter().chain(ra).copied().collect(),
                        trace_b: b.trace.iter().chain(rb).copied().collect(),
                        map_a: None,
                        map_b: None,
                        ok: true,
                    })
                    .collect();
                return Ok(Outcome {
                    records,
                    ..Outcome::default()
                });
            }
            key = Some((corr, k));
        }
        self.stats.sub_traversals += 1;
        let (na, nb, la, lb) = (a.node, b.node, a.trace.len(), b.trace.len());
        let out = self.check_inner(a, b, report)?;
        if let Some((corr, k)) = key {
            if out.ok() {
                let rel = out
                    .records
                    .iter()
                    .map(|r| (r.trace_a[la..].to_vec(), r.trace_b[lb..].to_vec()))
                    .collect();
                self.memo.insert(na, nb, corr, k, rel);
            }
        }
        Ok(out)
    }

    fn check_inner(&mut self, a: Cursor, b: Cursor, report: bool) -> Result<Outcome, RelError> {
        if self.hints.get(&a.node) == Some(&b.node) {
            return self.compare_leaves(&a, &b, report);
        }
        for side in [Side::A, Side::B] {
            let (this, other) = match side {
                Side::A => (&a, &b),
                Side::B => (&b, &a),
            };
            if !self.expandable(side, this.node) {
                continue;
            }
            let mut out = Outcome::default();
            let (pieces, uncovered) = demand_split(self.g(side), this.node, &this.map, &self.budget())?;
            if !uncovered.is_empty_with(&self.budget())? {
                let dom = uncovered.domain_with(&self.budget())?;
                let o = self.restrict(other, &dom)?;
                out.fail(report.then(|| uncovered_failure(side, this, &uncovered, &o)));
                if !report {
                    return Ok(out);
                }
            }
            for (e, piece) in pieces {
                let dom = piece.domain_with(&self.budget())?;
                let here = Cursor {
                    node: this.node,
                    map: piece,
                    trace: this.trace.clone(),
                };
                let next = self.step(side, &here, e)?;
                let o = self.restrict(other, &dom)?;
                let sub = match side {
                    Side::A => self.check(next, o, report),
                    Side::B => self.check(o, next, report),
                };
                out.merge(sub);
                if !report && !out.ok() {
                    return Ok(out);
                }
            }
            return Ok(out);
        }
        self.compare_heads(a, b, report)
    }

    fn compare_heads(&mut self, a: Cursor, b: Cursor, report: bool) -> Result<Outcome, RelError> {
        let ka = &self.ga.nodes[a.node].kind;
        let kb = &self.gb.nodes[b.node].kind;
        match (ka, kb) {
            (NodeKind::Array { .. }, NodeKind::Array { .. }) | (NodeKind::Const { .. }, NodeKind::Const { .. }) => {
                self.compare_leaves(&a, &b, report)
            }
            (
                NodeKind::Op { symbol: sa, props: pa, .. },
                NodeKind::Op { symbol: sb, props: pb, .. },
            ) => {
                if sa != sb || pa.arity != pb.arity {
                    let mut out = Outcome::default();
                    out.fail(report.then(|| Failure {
                        kind: DiagnosticKind::OperatorMismatch,
                        trace_a: a.trace.clone(),
                        trace_b: b.trace.clone(),
                        map_a: None,
                        map_b: None,
                        message: format!("operator {sa}/{} vs {sb}/{}", pa.arity, pb.arity),
                    }));
                    return Ok(out);
                }
                let props = *pa;
                let symbol = sa.clone();
                if !self.cfg.normalize || (!props.associative && !props.commutative) {
                    self.compare_positional(a, b, report)
                } else {
                    self.compare_normalized(a, b, &symbol, props.associative, props.commutative, report)
                }
            }
            _ => {
                let mut out = Outcome::default();
                out.fail(report.then(|| Failure {
                    kind: DiagnosticKind::LeafMismatch,
                    trace_a: a.trace.clone(),
                    trace_b: b.trace.clone(),
                    map_a: Some(a.map.clone()),
                    map_b: Some(b.map.clone()),
                    message: format!(
                        "{} {} vs {} {}",
                        describe(ka),
                        self.ga.nodes[a.node],
                        describe(kb),
                        self.gb.nodes[b.node]
                    ),
                }));
                Ok(out)
            }
        }
    }

    fn compare_leaves(&mut self, a: &Cursor, b: &Cursor, report: bool) -> Result<Outcome, RelError> {
        let na = &self.ga.nodes[a.node];
        let nb = &self.gb.nodes[b.node];
        let same_head = match (&na.kind, &nb.kind) {
            (NodeKind::Array { name: x, .. }, NodeKind::Array { name: y, .. }) => {
                (x == y || self.hints.get(&a.node) == Some(&b.node)) && na.arity == nb.arity
            }
            (NodeKind::Const { value: x, .. }, NodeKind::Const { value: y, .. }) => x == y,
            _ => false,
        };
        self.stats.leaf_comparisons += 1;
        let mut out = Outcome::default();
        let equal = same_head && a.map.is_equal_with(&b.map, &self.budget())?;
        out.records.push(LeafRecord {
            trace_a: a.trace.clone(),
            trace_b: b.trace.clone(),
            map_a: Some(a.map.clone()),
            map_b: Some(b.map.clone()),
            ok: equal,
        });
        if !equal {
            let (kind, message) = if same_head {
                (
                    DiagnosticKind::MappingMismatch,
                    format!("output-input mappings to {na} differ"),
                )
            } else {
                (
                    DiagnosticKind::LeafMismatch,
                    format!("{} {na} vs {} {nb}", describe(&na.kind), describe(&nb.kind)),
                )
            };
            out.fail(report.then(|| Failure {
                kind,
                trace_a: a.trace.clone(),
                trace_b: b.trace.clone(),
                map_a: Some(a.map.clone()),
                map_b: Some(b.map.clone()),
                message,
            }));
        }
        Ok(out)
    }

    fn compare_positional(&mut self, a: Cursor, b: Cursor, report: bool) -> Result<Outcome, RelError> {
        let ea = self.ga.out_edges[a.node].clone();
        let eb = self.gb.out_edges[b.node].clone();
        let mut out = Outcome::default();
        for (x, y) in ea.into_iter().zip(eb) {
            let ca = self.step(Side::A, &a, x)?;
            let cb = self.step(Side::B, &b, y)?;
            out.merge(self.check(ca, cb, report));
            if !report && !out.ok() {
                break;
            }
        }
        Ok(out)
    }

    fn compare_normalized(
        &mut self,
        a: Cursor,
        b: Cursor,
        symbol: &str,
        through: bool,
        commutative: bool,
        report: bool,
    ) -> Result<Outcome, RelError> {
        let mut out = Outcome::default();
        let (la, ua) = self.collect(Side::A, &a, symbol, through)?;
        let (lb, ub) = self.collect(Side::B, &b, symbol, through)?;
        for (side, list) in [(Side::A, ua), (Side::B, ub)] {
            for (c, unc) in list {
                if !report {
                    out.failed = true;
                    return Ok(out);
                }
                let dom = unc.domain_with(&self.budget())?;
                let other = match side {
                    Side::A => self.restrict(&b, &dom)?,
                    Side::B => self.restrict(&a, &dom)?,
                };
                out.fail(Some(uncovered_failure(side, &c, &unc, &other)));
            }
        }
        for (da, ea) in &la {
            for (db, eb) in &lb {
                let d = da.intersect_with(db, &self.budget())?.simplify(&self.budget())?;
                if d.is_empty_with(&self.budget())? {
                    continue;
                }
                let ra = ea.iter().map(|c| self.restrict(c, &d)).collect::<Result<Vec<_>, _>>()?;
                let rb = eb.iter().map(|c| self.restrict(c, &d)).collect::<Result<Vec<_>, _>>()?;
                let ca = self.restrict(&a, &d)?;
                let cb = self.restrict(&b, &d)?;
                out.merge(self.match_entries(&ca, &cb, symbol, ra, rb, commutative, report)?);
                if !report && !out.ok() {
                    return Ok(out);
                }
            }
        }
        Ok(out)
    }

    /// Operand entries of `c` per output-domain piece. Intermediate arrays
    /// are looked through; with `through` set, so are nested occurrences of
    /// the same operator. Also returns demand no definer covers.
    #[allow(clippy::type_complexity)]
    fn collect(
        &self,
        side: Side,
        c: &Cursor,
        symbol: &str,
        through: bool,
    ) -> Result<(Vec<(IntRelation, Vec<Cursor>)>, Vec<(Cursor, IntRelation)>), RelError> {
        let g = self.g(side);
        let mut pieces = vec![(c.map.domain_with(&self.budget())?, Vec::new())];
        let mut uncovered = Vec::new();
        for &e in &g.out_edges[c.node] {
            let child = self.step(side, c, e)?;
            let mut resolved = Vec::new();
            self.resolve(side, child, &mut resolved, &mut uncovered)?;
            let mut child_pieces: Vec<(IntRelation, Vec<Cursor>)> = Vec::new();
            for r in resolved {
                let same_op = matches!(
                    &g.nodes[r.node].kind,
                    NodeKind::Op { symbol: s, props, .. } if s == symbol && props.arity == 2
                );
                if through && same_op {
                    let (sub, unc) = self.collect(side, &r, symbol, through)?;
                    child_pieces.extend(sub);
                    uncovered.extend(unc);
                } else {
                    child_pieces.push((r.map.domain_with(&self.budget())?, vec![r]));
                }
            }
            let mut next = Vec::new();
            for (d1, l1) in &pieces {
                for (d2, l2) in &child_pieces {
                    let d = d1.intersect_with(d2, &self.budget())?.simplify(&self.budget())?;
                    if d.is_empty_with(&self.budget())? {
                        continue;
                    }
                    let mut l = Vec::with_capacity(l1.len() + l2.len());
                    for x in l1.iter().chain(l2) {
                        l.push(self.restrict(x, &d)?);
                    }
                    next.push((d, l));
                }
            }
            pieces = next;
        }
        Ok((pieces, uncovered))
    }

    /// Reduce intermediate arrays until every cursor sits on an operator,
    /// a constant, an input, or a declared correspondence.
    fn resolve(
        &self,
        side: Side,
        c: Cursor,
        out: &mut Vec<Cursor>,
        uncovered: &mut Vec<(Cursor, IntRelation)>,
    ) -> Result<(), RelError> {
        if !self.expandable(side, c.node) {
            if !c.map.is_empty_with(&self.budget())? {
                out.push(c);
            }
            return Ok(());
        }
        let (pieces, unc) = demand_split(self.g(side), c.node, &c.map, &self.budget())?;
        if !unc.is_empty_with(&self.budget())? {
            uncovered.push((c.clone(), unc));
        }
        for (e, piece) in pieces {
            let here = Cursor {
                node: c.node,
                map: piece,
                trace: c.trace.clone(),
            };
            let next = self.step(side, &here, e)?;
            self.resolve(side, next, out, uncovered)?;
        }
        Ok(())
    }

    fn key(&self, side: Side, n: NodeId) -> Key {
        let g = self.g(side);
        match &g.nodes[n].kind {
            NodeKind::Array { name, .. } => {
                if side == Side::B {
                    if let Some((&a, _)) = self.hints.iter().find(|(_, &v)| v == n) {
                        return Key::Input(self.ga.nodes[a].array_name().unwrap_or_default().to_string());
                    }
                }
                Key::Input(name.clone())
            }
            NodeKind::Const { value, .. } => Key::Const(*value),
            NodeKind::Op { symbol, props, .. } => Key::Op(symbol.clone(), props.arity),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn match_entries(
        &mut self,
        a: &Cursor,
        b: &Cursor,
        symbol: &str,
        la: Vec<Cursor>,
        lb: Vec<Cursor>,
        commutative: bool,
        report: bool,
    ) -> Result<Outcome, RelError> {
        let mut out = Outcome::default();
        if la.len() != lb.len() {
            out.fail(report.then(|| Failure {
                kind: DiagnosticKind::OperatorMismatch,
                trace_a: a.trace.clone(),
                trace_b: b.trace.clone(),
                map_a: None,
                map_b: None,
                message: format!("'{symbol}' combines {} operands vs {}", la.len(), lb.len()),
            }));
            if !report {
                return Ok(out);
            }
        }
        if !commutative {
            for (x, y) in la.into_iter().zip(lb) {
                out.merge(self.check(x, y, report));
                if !report && !out.ok() {
                    break;
                }
            }
            return Ok(out);
        }
        let mut groups: BTreeMap<Key, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (i, c) in la.iter().enumerate() {
            groups.entry(self.key(Side::A, c.node)).or_default().0.push(i);
        }
        for (j, c) in lb.iter().enumerate() {
            groups.entry(self.key(Side::B, c.node)).or_default().1.push(j);
        }
        // leftovers per group, then across groups
        let mut left: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let mut ambiguous_unsupported = Vec::new();
        for (key, (ia, ib)) in &groups {
            if ia.len() == 1 && ib.len() == 1 {
                let o = self.check(la[ia[0]].clone(), lb[ib[0]].clone(), report);
                out.merge(o);
                if !report && !out.ok() {
                    return Ok(out);
                }
                continue;
            }
            if ia.is_empty() || ib.is_empty() {
                left.push((ia.clone(), ib.clone()));
                continue;
            }
            let is_op = matches!(key, Key::Op(..));
            if is_op {
                self.depth += 1;
            }
            if is_op && self.depth > self.cfg.lookahead {
                self.depth -= 1;
                out.unsupported.push(format!(
                    "matching of '{symbol}' operands needs lookahead deeper than {}",
                    self.cfg.lookahead
                ));
                return Ok(out);
            }
            let mut outcomes: Vec<Vec<Outcome>> = Vec::new();
            let mut compat = Vec::new();
            for &i in ia {
                let mut row_o = Vec::new();
                let mut row = Vec::new();
                for &j in ib {
                    let o = self.check(la[i].clone(), lb[j].clone(), false);
                    if !o.unsupported.is_empty() {
                        ambiguous_unsupported.extend(o.unsupported.iter().cloned());
                    }
                    row.push(o.ok());
                    row_o.push(o);
                }
                compat.push(row);
                outcomes.push(row_o);
            }
            if is_op {
                self.depth -= 1;
            }
            let m = max_matching(&compat, ib.len());
            let mut used = vec![false; ib.len()];
            let mut free_a = Vec::new();
            for (r, partner) in m.iter().enumerate() {
                match partner {
                    Some(c) => {
                        used[*c] = true;
                        out.merge(std::mem::take(&mut outcomes[r][*c]));
                    }
                    None => free_a.push(ia[r]),
                }
            }
            let free_b: Vec<usize> = ib.iter().zip(&used).filter(|(_, u)| !**u).map(|(j, _)| *j).collect();
            if !free_a.is_empty() || !free_b.is_empty() {
                left.push((free_a, free_b));
            }
        }
        if left.iter().all(|(x, y)| x.is_empty() && y.is_empty()) {
            return Ok(out);
        }
        if !ambiguous_unsupported.is_empty() {
            out.unsupported.extend(ambiguous_unsupported);
            return Ok(out);
        }
        if !report {
            out.failed = true;
            return Ok(out);
        }
        // pair leftovers within their group first, then across groups
        let mut rest_a = Vec::new();
        let mut rest_b = Vec::new();
        for (xa, xb) in left {
            let n = xa.len().min(xb.len());
            for k in 0..n {
                out.merge(self.check(la[xa[k]].clone(), lb[xb[k]].clone(), true));
            }
            rest_a.extend_from_slice(&xa[n..]);
            rest_b.extend_from_slice(&xb[n..]);
        }
        rest_a.sort_unstable();
        rest_b.sort_unstable();
        for (&i, &j) in rest_a.iter().zip(&rest_b) {
            out.merge(self.check(la[i].clone(), lb[j].clone(), true));
        }
        out.failed = true;
        Ok(out)
    }
}

fn describe(k: &NodeKind) -> &'static str {
    match k {
        NodeKind::Array { .. } => "array",
        NodeKind::Op { .. } => "operator",
        NodeKind::Const { .. } => "constant",
    }
}

fn uncovered_failure(side: Side, this: &Cursor, uncovered: &IntRelation, other: &Cursor) -> Failure {
    let (trace_a, trace_b, map_a, map_b) = match side {
        Side::A => (this.trace.clone(), other.trace.clone(), Some(uncovered.clone()), None),
        Side::B => (other.trace.clone(), this.trace.clone(), None, Some(uncovered.clone())),
    };
    Failure {
        kind: DiagnosticKind::UncoveredRead,
        trace_a,
        trace_b,
        map_a,
        map_b,
        message: format!(
            "program {} reads elements that no statement writes",
            if side == Side::A { "a" } else { "b" }
        ),
    }
}
