//! Array data dependence graph: array nodes, operator-occurrence nodes, and
//! edges (against the direction of dataflow) carrying dependency mappings.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use crate::frontend::{ArrayClass, Expr, OpProps, Program};
use crate::relation::{Budget, IntRelation, RelError};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Array { name: String, class: ArrayClass },
    /// Operator occurrence; `path` is the operand-position path from the
    /// statement's right-hand-side root (empty for the root itself).
    Op { symbol: String, props: OpProps, stmt: String, path: Vec<usize> },
    Const { value: i64, stmt: String, path: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct AddgNode {
    pub kind: NodeKind,
    /// Arity of the node's element space. Operator and constant nodes live in
    /// the element space of the array their statement defines.
    pub arity: usize,
}

impl AddgNode {
    pub fn is_array(&self) -> bool {
        matches!(self.kind, NodeKind::Array { .. })
    }

    pub fn array_name(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Array { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn class(&self) -> Option<ArrayClass> {
        match &self.kind {
            NodeKind::Array { class, .. } => Some(*class),
            _ => None,
        }
    }
}

impl fmt::Display for AddgNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Array { name, .. } => f.write_str(name),
            NodeKind::Op { symbol, .. } => f.write_str(symbol),
            NodeKind::Const { value, .. } => write!(f, "{value}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Defining edge from an array node, labeled by the statement.
    Statement(String),
    /// Operand edge from an operator node, 1-based.
    Operand(usize),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Statement(s) => f.write_str(s),
            EdgeLabel::Operand(i) => write!(f, "{i}"),
        }
    }
}

/// One textual read of an array inside a statement (`buf₂` is the second
/// read of `buf` in its statement).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub stmt: String,
    pub array: String,
    pub number: usize,
    /// Source text of the access, e.g. `buf[2*k]`.
    pub text: String,
}

pub fn subscript(n: usize) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap_or(0)).unwrap_or(c))
        .collect()
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{} in {}", self.array, subscript(self.number), self.stmt)
    }
}

#[derive(Clone, Debug)]
pub struct AddgEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
    /// Statement the edge belongs to.
    pub stmt: String,
    /// Element of `from` → element of `to`.
    pub mapping: IntRelation,
    /// Set when the edge reaches an array node.
    pub occurrence: Option<Occurrence>,
}

#[derive(Clone, Debug)]
pub struct StatementRecord {
    pub label: String,
    pub array: String,
    /// Source text of the left-hand side.
    pub lhs_text: String,
    /// Elements of `array` the statement writes.
    pub write_set: IntRelation,
}

#[derive(Clone, Debug)]
pub struct Addg {
    pub nodes: Vec<AddgNode>,
    pub edges: Vec<AddgEdge>,
    /// Outgoing edges per node: definers in source order for arrays,
    /// operands by position for operators.
    pub out_edges: Vec<Vec<EdgeId>>,
    pub arrays: BTreeMap<String, NodeId>,
    pub roots: Vec<NodeId>,
    pub leaves: Vec<NodeId>,
    pub statements: BTreeMap<String, StatementRecord>,
}

/// A dataflow cycle, listed by the arrays it passes through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub arrays: Vec<String>,
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "recurrence through {}", self.arrays.join(" -> "))
    }
}

impl Addg {
    pub fn build(p: &Program) -> Result<Addg, RelError> {
        Self::build_with(p, &Budget::default())
    }

    pub fn build_with(p: &Program, budget: &Budget) -> Result<Addg, RelError> {
        let mut g = Addg {
            nodes: Vec::new(),
            edges: Vec::new(),
            out_edges: Vec::new(),
            arrays: BTreeMap::new(),
            roots: Vec::new(),
            leaves: Vec::new(),
            statements: BTreeMap::new(),
        };
        let names = p
            .params
            .iter()
            .map(|q| (q.name.clone(), q.extents.len()))
            .chain(p.locals.iter().map(|l| (l.name.clone(), l.extents.len())));
        for (name, arity) in names {
            let class = p.array_class(&name).expect("declared array");
            let id = g.add_node(NodeKind::Array { name: name.clone(), class }, arity);
            g.arrays.insert(name, id);
            match class {
                ArrayClass::Output => g.roots.push(id),
                ArrayClass::Input => g.leaves.push(id),
                ArrayClass::Intermediate => {}
            }
        }
        for s in &p.statements {
            let write = s.write_relation()?;
            let write_set = write.range_with(budget)?.simplify(budget)?;
            let inv = write.inverse();
            let m = s.lhs.index.len();
            g.statements.insert(
                s.label.clone(),
                StatementRecord {
                    label: s.label.clone(),
                    array: s.lhs.array.clone(),
                    lhs_text: s.lhs.to_string(),
                    write_set: write_set.clone(),
                },
            );
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            let mut b = StmtBuilder {
                p,
                stmt: s,
                inv: &inv,
                write_set: &write_set,
                m,
                budget,
                counts: &mut counts,
            };
            let (to, mapping, occurrence) = b.expr(&mut g, &s.rhs, Vec::new())?;
            let from = g.arrays[&s.lhs.array];
            g.add_edge(AddgEdge {
                from,
                to,
                label: EdgeLabel::Statement(s.label.clone()),
                stmt: s.label.clone(),
                mapping,
                occurrence,
            });
        }
        Ok(g)
    }

    fn add_node(&mut self, kind: NodeKind, arity: usize) -> NodeId {
        self.nodes.push(AddgNode { kind, arity });
        self.out_edges.push(Vec::new());
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, e: AddgEdge) -> EdgeId {
        let id = self.edges.len();
        self.out_edges[e.from].push(id);
        self.edges.push(e);
        id
    }

    pub fn node(&self, id: NodeId) -> &AddgNode {
        &self.nodes[id]
    }

    pub fn edge(&self, id: EdgeId) -> &AddgEdge {
        &self.edges[id]
    }

    pub fn array(&self, name: &str) -> Option<NodeId> {
        self.arrays.get(name).copied()
    }

    /// Defining edges of an array node (empty for inputs).
    pub fn definers(&self, array: NodeId) -> &[EdgeId] {
        &self.out_edges[array]
    }

    /// Root-to-leaf paths from `root` as edge lists, numbered from 1 in
    /// depth-first order (definers in source order, operands by position).
    /// Edges closing a cycle are not followed.
    pub fn enumerate_paths(&self, root: NodeId) -> Vec<Vec<EdgeId>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        self.paths_from(root, &mut stack, &mut on_path, &mut out);
        out
    }

    fn paths_from(&self, n: NodeId, stack: &mut Vec<EdgeId>, on_path: &mut [bool], out: &mut Vec<Vec<EdgeId>>) {
        let succ = &self.out_edges[n];
        if succ.is_empty() {
            if !stack.is_empty() {
                out.push(stack.clone());
            }
            return;
        }
        on_path[n] = true;
        for &e in succ {
            let to = self.edges[e].to;
            if on_path[to] {
                continue;
            }
            stack.push(e);
            self.paths_from(to, stack, on_path, out);
            stack.pop();
        }
        on_path[n] = false;
    }

    /// `C -s3-> + -1-> tmp -s1-> + -1-> B`
    pub fn path_text(&self, path: &[EdgeId]) -> String {
        let mut s = String::new();
        if let Some(&first) = path.first() {
            s.push_str(&self.nodes[self.edges[first].from].to_string());
        }
        for &e in path {
            let edge = &self.edges[e];
            let _ = write!(s, " -{}-> {}", edge.label, self.nodes[edge.to]);
        }
        s
    }

    pub fn detect_cycles(&self) -> Result<(), Cycle> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Grey,
            Black,
        }
        let mut color = vec![Color::White; self.nodes.len()];
        let mut stack: Vec<NodeId> = Vec::new();
        fn visit(
            g: &Addg,
            n: NodeId,
            color: &mut [Color],
            stack: &mut Vec<NodeId>,
        ) -> Result<(), Cycle> {
            color[n] = Color::Grey;
            stack.push(n);
            for &e in &g.out_edges[n] {
                let to = g.edges[e].to;
                match color[to] {
                    Color::Grey => {
                        let start = stack.iter().position(|&x| x == to).expect("on stack");
                        let mut arrays: Vec<String> = stack[start..]
                            .iter()
                            .filter_map(|&x| g.nodes[x].array_name().map(str::to_string))
                            .collect();
                        if let Some(first) = arrays.first().cloned() {
                            arrays.push(first);
                        }
                        return Err(Cycle { arrays });
                    }
                    Color::White => visit(g, to, color, stack)?,
                    Color::Black => {}
                }
            }
            stack.pop();
            color[n] = Color::Black;
            Ok(())
        }
        for n in 0..self.nodes.len() {
            if color[n] == Color::White {
                visit(self, n, &mut color, &mut stack)?;
            }
        }
        Ok(())
    }

    /// Graphviz rendering with statement/operand labels and mappings.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut s = String::from("digraph addg {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = match &n.kind {
                NodeKind::Array { class: ArrayClass::Intermediate, .. } => "box",
                NodeKind::Array { .. } => "doublecircle",
                NodeKind::Op { .. } => "ellipse",
                NodeKind::Const { .. } => "plaintext",
            };
            let _ = writeln!(s, "  n{i} [label=\"{}\", shape={shape}];", esc(&n.to_string()));
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  n{} -> n{} [label=\"{}\\n{}\"];",
                e.from,
                e.to,
                esc(&e.label.to_string()),
                esc(&e.mapping.to_string())
            );
        }
        s.push_str("}\n");
        s
    }
}

struct StmtBuilder<'a> {
    p: &'a Program,
    stmt: &'a crate::frontend::StatementInfo,
    inv: &'a IntRelation,
    write_set: &'a IntRelation,
    m: usize,
    budget: &'a Budget,
    counts: &'a mut BTreeMap<String, usize>,
}

impl StmtBuilder<'_> {
    /// Node for `e` and the mapping from the statement's element space to it.
    fn expr(&mut self, g: &mut Addg, e: &Expr, path: Vec<usize>) -> Result<(NodeId, IntRelation, Option<Occurrence>), RelError> {
        let label = &self.stmt.label;
        match e {
            Expr::Read(acc) => {
                let read = self.stmt.access_relation(acc)?;
                let mapping = self.inv.compose_with(&read, self.budget)?.simplify(self.budget)?;
                let n = self.counts.entry(acc.array.clone()).or_insert(0);
                *n += 1;
                let occ = Occurrence {
                    stmt: label.clone(),
                    array: acc.array.clone(),
                    number: *n,
                    text: acc.to_string(),
                };
                Ok((g.arrays[&acc.array], mapping, Some(occ)))
            }
            Expr::Const(v) => {
                let id = g.add_node(
                    NodeKind::Const {
                        value: *v,
                        stmt: label.clone(),
                        path,
                    },
                    self.m,
                );
                Ok((id, self.write_set.clone(), None))
            }
            Expr::Op { symbol, args } => {
                let props = self
                    .p
                    .operators
                    .props(symbol, args.len())
                    .expect("operator checked by the parser");
                let id = g.add_node(
                    NodeKind::Op {
                        symbol: symbol.clone(),
                        props,
                        stmt: label.clone(),
                        path: path.clone(),
                    },
                    self.m,
                );
                for (i, a) in args.iter().enumerate() {
                    let mut sub = path.clone();
                    sub.push(i + 1);
                    let (to, mapping, occurrence) = self.expr(g, a, sub)?;
                    g.add_edge(AddgEdge {
                        from: id,
                        to,
                        label: EdgeLabel::Operand(i + 1),
                        stmt: label.clone(),
                        mapping,
                        occurrence,
                    });
                }
                Ok((id, IntRelation::identity(self.write_set), None))
            }
        }
    }
}

/// Output-current mapping after stepping over `edge`: `prefix ∘ mapping`.
pub fn reduce_intermediate(g: &Addg, prefix: &IntRelation, edge: EdgeId, budget: &Budget) -> Result<IntRelation, RelError> {
    prefix.compose_with(&g.edges[edge].mapping, budget)?.simplify(budget)
}

/// Split an output-current mapping into an array node by the definer that
/// writes each demanded element. Returns non-empty pieces and the part of
/// the mapping no definer covers.
pub fn demand_split(
    g: &Addg,
    var: NodeId,
    demanded: &IntRelation,
    budget: &Budget,
) -> Result<(Vec<(EdgeId, IntRelation)>, IntRelation), RelError> {
    let mut pieces = Vec::new();
    let mut covered = IntRelation::empty_set(g.nodes[var].arity);
    for &e in g.definers(var) {
        let w = &g.statements[&g.edges[e].stmt].write_set;
        covered = covered.union(w)?;
        let piece = demanded.restrict_range_with(w, budget)?.simplify(budget)?;
        if !piece.is_empty_with(budget)? {
            pieces.push((e, piece));
        }
    }
    let missing = demanded.range_with(budget)?.difference_with(&covered, budget)?;
    let uncovered = demanded.restrict_range_with(&missing, budget)?.simplify(budget)?;
    Ok((pieces, uncovered))
}

impl Addg {
    /// Number of root-to-leaf paths from `n` (saturating).
    fn path_counts(&self) -> Vec<usize> {
        let mut memo: Vec<Option<usize>> = vec![None; self.nodes.len()];
        fn count(g: &Addg, n: NodeId, memo: &mut Vec<Option<usize>>, on: &mut Vec<bool>) -> usize {
            if let Some(c) = memo[n] {
                return c;
            }
            if g.out_edges[n].is_empty() {
                return 1;
            }
            on[n] = true;
            let mut total = 0usize;
            for &e in &g.out_edges[n] {
                let to = g.edges[e].to;
                if !on[to] {
                    total = total.saturating_add(count(g, to, memo, on));
                }
            }
            on[n] = false;
            memo[n] = Some(total);
            total
        }
        let mut on = vec![false; self.nodes.len()];
        (0..self.nodes.len()).map(|n| count(self, n, &mut memo, &mut on)).collect()
    }

    /// 1-based position of a complete root-to-leaf path in the order of
    /// [`Addg::enumerate_paths`] from the path's first node.
    pub fn path_number(&self, trace: &[EdgeId]) -> Option<usize> {
        let last = *trace.last()?;
        if !self.out_edges[self.edges[last].to].is_empty() {
            return None;
        }
        let counts = self.path_counts();
        let mut n = 1usize;
        for &e in trace {
            let from = self.edges[e].from;
            for &sib in &self.out_edges[from] {
                if sib == e {
                    break;
                }
                n = n.saturating_add(counts[self.edges[sib].to]);
            }
        }
        Some(n)
    }

    /// Statements crossed by a trace, without repeats, in order.
    pub fn statements_on(&self, trace: &[EdgeId]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for &e in trace {
            let s = &self.edges[e].stmt;
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        out
    }

    /// Array reads crossed by a trace.
    pub fn occurrences_on(&self, trace: &[EdgeId]) -> Vec<Occurrence> {
        trace.iter().filter_map(|&e| self.edges[e].occurrence.clone()).collect()
    }
}
