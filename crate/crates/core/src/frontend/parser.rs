use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;

use super::ast::*;
use super::lexer::{lex, Tok};
use super::{ErrorKind, FrontendError};
use crate::relation::{Conjunct, Constraint, IntRelation, IntTupleSpace, LinExpr};

/// Parse a program, replacing the value of any `#define` named in `overrides`.
pub fn parse_program(src: &str, overrides: &BTreeMap<String, i64>) -> Result<Program, FrontendError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        overrides,
        constants: Vec::new(),
        operators: OperatorTable::default(),
        scalars: Vec::new(),
        arrays: BTreeMap::new(),
        frames: Vec::new(),
        sched: Vec::new(),
        counters: Vec::new(),
        statements: Vec::new(),
        labels: HashSet::new(),
        auto_label: 0,
    };
    p.program()
}

#[derive(Clone, Debug)]
enum Frame {
    Loop {
        iter: String,
        init: Affine,
        cond: Guard,
        step: i64,
    },
    Guard {
        cond: Guard,
        negated: bool,
    },
}

struct Parser<'a> {
    toks: Vec<(Pos, Tok)>,
    at: usize,
    overrides: &'a BTreeMap<String, i64>,
    constants: Vec<(String, i64)>,
    operators: OperatorTable,
    scalars: Vec<String>,
    /// Declared arrays: name → number of dimensions.
    arrays: BTreeMap<String, usize>,
    frames: Vec<Frame>,
    sched: Vec<SchedEntry>,
    counters: Vec<i64>,
    statements: Vec<StatementInfo>,
    labels: HashSet<String>,
    auto_label: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser<'_> {
    // ------------------------------------------------------------ tokens

    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].1
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == k)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(FrontendError::syntax(self.pos(), msg))
    }

    fn err_kind<T>(&self, kind: ErrorKind, msg: impl Into<String>) -> PResult<T> {
        Err(FrontendError::new(kind, Some(self.pos()), msg))
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            let found = describe(self.peek());
            self.err(format!("expected '{p}', found {found}"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    // ----------------------------------------------------------- top level

    fn program(&mut self) -> PResult<Program> {
        let mut function: Option<(String, Vec<Param>, Vec<ArrayDecl>, Vec<Node>)> = None;
        let mut pragma: Option<(Pos, String)> = None;
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Define(name, value) => {
                    let pos = self.pos();
                    self.bump();
                    self.define(pos, name, value)?;
                }
                Tok::Pragma(body) => {
                    pragma = Some((self.pos(), body));
                    self.bump();
                }
                _ => {
                    let pos = self.pos();
                    if self.eat_kw("int") || self.eat_kw("void") {}
                    let name = self.ident()?;
                    self.expect("(")?;
                    if self.is_prototype() {
                        self.prototype(name, pragma.take())?;
                        continue;
                    }
                    if let Some((p, _)) = pragma.take() {
                        return Err(FrontendError::syntax(p, "annotation must precede a function prototype"));
                    }
                    if function.is_some() {
                        return Err(FrontendError::new(
                            ErrorKind::Unsupported,
                            Some(pos),
                            "only one function definition per file is supported",
                        ));
                    }
                    let params = self.params()?;
                    self.expect("{")?;
                    self.counters.push(0);
                    let mut locals = Vec::new();
                    let body = self.block_items(&mut locals)?;
                    self.expect("}")?;
                    function = Some((name, params, locals, body));
                }
            }
        }
        if let Some((p, _)) = pragma {
            return Err(FrontendError::syntax(p, "annotation must precede a function prototype"));
        }
        let Some((name, mut params, locals, body)) = function else {
            return Err(FrontendError::syntax(self.pos(), "no function definition found"));
        };
        let written: HashSet<&str> = self.statements.iter().map(|s| s.lhs.array.as_str()).collect();
        for p in params.iter_mut() {
            if written.contains(p.name.as_str()) {
                p.direction = Direction::Output;
            }
        }
        Ok(Program {
            name,
            params,
            constants: std::mem::take(&mut self.constants),
            locals,
            scalars: std::mem::take(&mut self.scalars),
            operators: std::mem::take(&mut self.operators),
            body,
            statements: std::mem::take(&mut self.statements),
        })
    }

    fn define(&mut self, pos: Pos, name: String, value: Vec<(Pos, Tok)>) -> PResult<()> {
        if self.constants.iter().any(|(n, _)| *n == name) {
            return Err(FrontendError::syntax(pos, format!("'{name}' defined twice")));
        }
        let v = if let Some(&v) = self.overrides.get(&name) {
            v
        } else {
            if value.is_empty() {
                return Err(FrontendError::syntax(pos, format!("#define {name} has no value")));
            }
            let mut toks = value;
            toks.push((pos, Tok::Eof));
            let saved_toks = std::mem::replace(&mut self.toks, toks);
            let saved_at = std::mem::replace(&mut self.at, 0);
            let r = self.affine().and_then(|a| {
                if !matches!(self.peek(), Tok::Eof) {
                    return self.err("unexpected tokens in #define value");
                }
                if !a.is_constant() {
                    return self.err_kind(ErrorKind::NonAffine, "#define value must be constant");
                }
                Ok(a.constant)
            });
            self.toks = saved_toks;
            self.at = saved_at;
            r?
        };
        self.constants.push((name, v));
        Ok(())
    }

    /// After `name (`: a prototype has only types (and optional names) followed by `) ;`.
    fn is_prototype(&self) -> bool {
        let mut k = 0;
        let mut depth = 1;
        loop {
            match self.peek_at(k) {
                Tok::Punct("(") => depth += 1,
                Tok::Punct(")") => {
                    depth -= 1;
                    if depth == 0 {
                        return matches!(self.peek_at(k + 1), Tok::Punct(";"));
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn prototype(&mut self, name: String, pragma: Option<(Pos, String)>) -> PResult<()> {
        let pos = self.pos();
        let mut arity = 0;
        if !self.is(")") {
            loop {
                if !self.eat_kw("int") {
                    return self.err("function parameters must be 'int'");
                }
                if let Tok::Ident(s) = self.peek().clone() {
                    if !is_reserved(&s) {
                        self.bump();
                    }
                }
                if self.is("[") || self.is("*") {
                    return self.err_kind(ErrorKind::Unsupported, "function parameters must be scalar");
                }
                arity += 1;
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        self.expect(";")?;
        if arity == 0 {
            return Err(FrontendError::syntax(pos, "functions need at least one parameter"));
        }
        if OperatorTable::is_builtin(&name) || self.operators.functions.contains_key(&name) {
            return Err(FrontendError::syntax(pos, format!("function '{name}' declared twice")));
        }
        let mut props = OpProps {
            arity,
            associative: false,
            commutative: false,
        };
        if let Some((ppos, body)) = pragma {
            for w in body.split(|c: char| c.is_whitespace() || c == ',') {
                match w {
                    "" => {}
                    "assoc" | "associative" => props.associative = true,
                    "comm" | "commutative" => props.commutative = true,
                    other => {
                        return Err(FrontendError::syntax(ppos, format!("unknown annotation '{other}'")))
                    }
                }
            }
            if (props.associative || props.commutative) && arity != 2 {
                return Err(FrontendError::syntax(
                    ppos,
                    "associative or commutative functions must be binary",
                ));
            }
        }
        self.operators.functions.insert(name, props);
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        loop {
            if !self.eat_kw("int") {
                return self.err("parameters must be 'int' arrays");
            }
            if self.is("*") {
                return self.err_kind(ErrorKind::Pointer, "pointer parameters are not supported; use array syntax");
            }
            let pos = self.pos();
            let name = self.ident()?;
            let mut extents = Vec::new();
            while self.eat("[") {
                if self.eat("]") {
                    if !extents.is_empty() {
                        return self.err("only the first dimension may be unsized");
                    }
                    extents.push(None);
                    continue;
                }
                let e = self.const_expr()?;
                self.expect("]")?;
                extents.push(Some(e));
            }
            if extents.is_empty() {
                return Err(FrontendError::new(
                    ErrorKind::Unsupported,
                    Some(pos),
                    format!("scalar parameter '{name}': only array parameters are supported"),
                ));
            }
            self.declare_array(pos, &name, extents.len())?;
            params.push(Param {
                name,
                extents,
                direction: Direction::Input,
            });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn declare_array(&mut self, pos: Pos, name: &str, dims: usize) -> PResult<()> {
        if self.arrays.contains_key(name) || self.scalars.iter().any(|s| s == name) || self.is_constant(name) {
            return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("'{name}' declared twice")));
        }
        self.arrays.insert(name.to_string(), dims);
        Ok(())
    }

    fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|(n, _)| n == name)
    }

    fn const_expr(&mut self) -> PResult<i64> {
        let a = self.affine()?;
        if !a.is_constant() {
            return self.err_kind(ErrorKind::NonAffine, "expected a constant expression");
        }
        Ok(a.constant)
    }

    // ------------------------------------------------------------- body

    fn block_items(&mut self, locals: &mut Vec<ArrayDecl>) -> PResult<Vec<Node>> {
        let mut out = Vec::new();
        while !self.is("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.err("unexpected end of input, expected '}'");
            }
            if let Some(n) = self.item(locals)? {
                out.extend(n);
            }
        }
        Ok(out)
    }

    /// One body item; declarations return `None`, blocks may return several nodes.
    fn item(&mut self, locals: &mut Vec<ArrayDecl>) -> PResult<Option<Vec<Node>>> {
        if self.is_kw("int") {
            if !self.frames.is_empty() {
                return self.err_kind(ErrorKind::Unsupported, "declarations must be at function level");
            }
            self.bump();
            loop {
                let pos = self.pos();
                if self.is("*") {
                    return self.err_kind(ErrorKind::Pointer, "pointer declarations are not supported");
                }
                let name = self.ident()?;
                let mut extents = Vec::new();
                while self.eat("[") {
                    let e = self.const_expr()?;
                    if e <= 0 {
                        return self.err("array extent must be positive");
                    }
                    self.expect("]")?;
                    extents.push(e);
                }
                if self.is("=") {
                    return self.err_kind(ErrorKind::Unsupported, "initializers are not supported");
                }
                if extents.is_empty() {
                    if self.arrays.contains_key(&name) || self.scalars.contains(&name) || self.is_constant(&name) {
                        return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("'{name}' declared twice")));
                    }
                    self.scalars.push(name);
                } else {
                    self.declare_array(pos, &name, extents.len())?;
                    locals.push(ArrayDecl { name, extents });
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(";")?;
            return Ok(None);
        }
        if self.eat(";") {
            return Ok(Some(vec![]));
        }
        if self.eat("{") {
            let mut out = Vec::new();
            while !self.is("}") {
                if matches!(self.peek(), Tok::Eof) {
                    return self.err("unexpected end of input, expected '}'");
                }
                if let Some(n) = self.item(locals)? {
                    out.extend(n);
                } else {
                    return self.err_kind(ErrorKind::Unsupported, "declarations must be at function level");
                }
            }
            self.expect("}")?;
            return Ok(Some(out));
        }
        if self.is_kw("for") {
            return Ok(Some(vec![self.for_loop(locals)?]));
        }
        if self.is_kw("if") {
            return Ok(Some(vec![self.if_stmt(locals)?]));
        }
        for kw in ["while", "do", "goto", "break", "continue", "return", "switch"] {
            if self.is_kw(kw) {
                return self.err_kind(ErrorKind::Unsupported, format!("'{kw}' is not supported; only static for-loops"));
            }
        }
        if self.is("*") {
            return self.err_kind(ErrorKind::Pointer, "pointer dereference is not supported");
        }
        Ok(Some(vec![Node::Assign(self.assignment()?)]))
    }

    fn body_stmt(&mut self, locals: &mut Vec<ArrayDecl>) -> PResult<Vec<Node>> {
        match self.item(locals)? {
            Some(n) => Ok(n),
            None => self.err_kind(ErrorKind::Unsupported, "declarations must be at function level"),
        }
    }

    fn for_loop(&mut self, locals: &mut Vec<ArrayDecl>) -> PResult<Node> {
        let pos = self.pos();
        self.bump();
        self.expect("(")?;
        if self.is_kw("int") {
            return self.err_kind(ErrorKind::Unsupported, "declare loop iterators at function level");
        }
        let ipos = self.pos();
        let iter = self.ident()?;
        if !self.scalars.contains(&iter) {
            return Err(FrontendError::new(ErrorKind::Semantic, Some(ipos), format!("undeclared iterator '{iter}'")));
        }
        if self.frames.iter().any(|f| matches!(f, Frame::Loop { iter: i, .. } if *i == iter)) {
            return Err(FrontendError::new(
                ErrorKind::Semantic,
                Some(ipos),
                format!("iterator '{iter}' reused by a nested loop"),
            ));
        }
        self.expect("=")?;
        let init = self.affine()?;
        self.check_iterators(&init, ipos)?;
        self.expect(";")?;
        // The condition may mention the new iterator.
        self.frames.push(Frame::Loop {
            iter: iter.clone(),
            init: init.clone(),
            cond: vec![],
            step: 1,
        });
        let cpos = self.pos();
        let cond = self.guard();
        self.frames.pop();
        let cond = cond?;
        self.expect(";")?;
        let step = self.step(&iter)?;
        self.expect(")")?;
        if step == 0 {
            return Err(FrontendError::new(ErrorKind::Unsupported, Some(pos), "loop step must be nonzero"));
        }
        let bounded = cond.iter().any(|c| {
            let g = c.rhs.add(&c.lhs, -1).coeff(&iter);
            match c.op {
                CmpOp::Eq => g != 0,
                // g = rhs - lhs; `k < N` has g decreasing in k
                CmpOp::Lt | CmpOp::Le => (step > 0 && g < 0) || (step < 0 && g > 0),
                CmpOp::Gt | CmpOp::Ge => (step > 0 && g > 0) || (step < 0 && g < 0),
                CmpOp::Ne => false,
            }
        });
        if !bounded {
            return Err(FrontendError::new(
                ErrorKind::Unsupported,
                Some(cpos),
                format!("loop condition does not bound '{iter}' in the direction of its step"),
            ));
        }
        self.frames.push(Frame::Loop {
            iter: iter.clone(),
            init: init.clone(),
            cond: cond.clone(),
            step,
        });
        let depth = self.frames.iter().filter(|f| matches!(f, Frame::Loop { .. })).count() - 1;
        let p = self.next_position();
        self.sched.push(SchedEntry::Position(p));
        self.sched.push(SchedEntry::Iter {
            depth,
            sign: step.signum(),
        });
        self.counters.push(0);
        let body = self.body_stmt(locals);
        self.counters.pop();
        self.sched.pop();
        self.sched.pop();
        self.frames.pop();
        Ok(Node::Loop(Loop {
            iter,
            init,
            cond,
            step,
            body: body?,
            pos,
        }))
    }

    fn next_position(&mut self) -> i64 {
        let c = self.counters.last_mut().expect("inside a block");
        let p = *c;
        *c += 1;
        p
    }

    fn step(&mut self, iter: &str) -> PResult<i64> {
        let pos = self.pos();
        let check = |p: &Self, name: &str| -> PResult<()> {
            if name != iter {
                return Err(FrontendError::new(
                    ErrorKind::Unsupported,
                    Some(p.pos()),
                    format!("loop step must update '{iter}'"),
                ));
            }
            Ok(())
        };
        if self.eat("++") {
            let n = self.ident()?;
            check(self, &n)?;
            return Ok(1);
        }
        if self.eat("--") {
            let n = self.ident()?;
            check(self, &n)?;
            return Ok(-1);
        }
        let n = self.ident()?;
        check(self, &n)?;
        if self.eat("++") {
            return Ok(1);
        }
        if self.eat("--") {
            return Ok(-1);
        }
        let sign = if self.eat("+=") {
            1
        } else if self.eat("-=") {
            -1
        } else if self.eat("=") {
            let m = self.ident()?;
            check(self, &m)?;
            if self.eat("+") {
                1
            } else if self.eat("-") {
                -1
            } else {
                return self.err_kind(ErrorKind::Unsupported, "loop step must be a constant increment");
            }
        } else {
            return Err(FrontendError::new(ErrorKind::Unsupported, Some(pos), "unsupported loop step"));
        };
        let a = self.affine()?;
        if !a.is_constant() {
            return self.err_kind(ErrorKind::NonAffine, "loop step must be constant");
        }
        Ok(sign * a.constant)
    }

    fn if_stmt(&mut self, locals: &mut Vec<ArrayDecl>) -> PResult<Node> {
        let pos = self.pos();
        self.bump();
        self.expect("(")?;
        let cond = self.guard()?;
        self.expect(")")?;
        self.frames.push(Frame::Guard {
            cond: cond.clone(),
            negated: false,
        });
        let then_body = self.body_stmt(locals);
        self.frames.pop();
        let then_body = then_body?;
        let mut else_body = Vec::new();
        if self.eat_kw("else") {
            self.frames.push(Frame::Guard {
                cond: cond.clone(),
                negated: true,
            });
            let e = self.body_stmt(locals);
            self.frames.pop();
            else_body = e?;
        }
        Ok(Node::If(If {
            cond,
            then_body,
            else_body,
            pos,
        }))
    }

    fn assignment(&mut self) -> PResult<Assign> {
        let pos = self.pos();
        let label = if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Punct(":")) {
            let l = self.ident()?;
            self.bump();
            l
        } else {
            loop {
                self.auto_label += 1;
                let l = format!("_s{}", self.auto_label);
                if !self.labels.contains(&l) {
                    break l;
                }
            }
        };
        if !self.labels.insert(label.clone()) {
            return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("duplicate statement label '{label}'")));
        }
        let lpos = self.pos();
        let name = self.ident()?;
        if !self.is("[") {
            if self.scalars.contains(&name) {
                return self.err_kind(ErrorKind::Unsupported, format!("assignment to scalar '{name}' is not supported"));
            }
            return self.err("expected array element on the left-hand side");
        }
        let lhs = self.access(name, lpos)?;
        if self.is("+=") || self.is("-=") {
            return self.err_kind(ErrorKind::Unsupported, "compound assignment reads its target; write single-assignment code");
        }
        self.expect("=")?;
        let rhs = self.expr()?;
        self.expect(";")?;
        let info = self.statement_info(&label, &lhs, &rhs, pos)?;
        self.statements.push(info);
        Ok(Assign { label, lhs, rhs, pos })
    }

    fn access(&mut self, array: String, pos: Pos) -> PResult<Access> {
        let Some(&dims) = self.arrays.get(&array) else {
            return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("undeclared array '{array}'")));
        };
        let mut index = Vec::new();
        while self.eat("[") {
            let ipos = self.pos();
            let e = self.affine()?;
            self.check_iterators(&e, ipos)?;
            self.expect("]")?;
            index.push(e);
        }
        if index.len() != dims {
            return Err(FrontendError::new(
                ErrorKind::Semantic,
                Some(pos),
                format!("array '{array}' has {dims} dimension(s), accessed with {}", index.len()),
            ));
        }
        Ok(Access { array, index })
    }

    fn active_iterators(&self) -> Vec<&str> {
        self.frames
            .iter()
            .filter_map(|f| match f {
                Frame::Loop { iter, .. } => Some(iter.as_str()),
                _ => None,
            })
            .collect()
    }

    fn check_iterators(&self, a: &Affine, pos: Pos) -> PResult<()> {
        let active = self.active_iterators();
        for n in a.terms.keys() {
            if !active.contains(&n.as_str()) {
                return Err(FrontendError::new(
                    ErrorKind::Semantic,
                    Some(pos),
                    format!("'{n}' is not an enclosing loop iterator here"),
                ));
            }
        }
        Ok(())
    }

    // ---------------------------------------------------------- guards

    fn guard(&mut self) -> PResult<Guard> {
        let mut out = Vec::new();
        loop {
            self.guard_atom(&mut out)?;
            if self.is("||") {
                return self.err_kind(ErrorKind::Unsupported, "disjunctive conditions are not supported");
            }
            if !self.eat("&&") {
                return Ok(out);
            }
        }
    }

    fn guard_atom(&mut self, out: &mut Guard) -> PResult<()> {
        if self.is("!") {
            return self.err_kind(ErrorKind::Unsupported, "negated conditions are not supported; use else");
        }
        if self.is("(") {
            let save = self.at;
            self.bump();
            let mut inner = Vec::new();
            if self.guard_inner(&mut inner).is_ok() && self.eat(")") && !self.is_cmp() {
                out.extend(inner);
                return Ok(());
            }
            self.at = save;
        }
        let pos = self.pos();
        let lhs = self.affine()?;
        let op = match self.bump() {
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct("==") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            t => {
                return Err(FrontendError::syntax(pos, format!("expected comparison, found {}", describe(&t))));
            }
        };
        let rhs = self.affine()?;
        self.check_iterators(&lhs, pos)?;
        self.check_iterators(&rhs, pos)?;
        out.push(Cmp { lhs, op, rhs });
        Ok(())
    }

    fn guard_inner(&mut self, out: &mut Guard) -> PResult<()> {
        loop {
            self.guard_atom(out)?;
            if !self.eat("&&") {
                return Ok(());
            }
        }
    }

    fn is_cmp(&self) -> bool {
        ["<", "<=", ">", ">=", "==", "!="].iter().any(|p| self.is(p))
    }

    // -------------------------------------------------------- affine

    fn affine(&mut self) -> PResult<Affine> {
        let mut acc = self.aterm()?;
        loop {
            if self.eat("+") {
                acc = acc.add(&self.aterm()?, 1);
            } else if self.eat("-") {
                acc = acc.add(&self.aterm()?, -1);
            } else {
                return Ok(acc);
            }
        }
    }

    fn aterm(&mut self) -> PResult<Affine> {
        let mut acc = self.afactor()?;
        loop {
            let pos = self.pos();
            if self.eat("*") {
                let f = self.afactor()?;
                acc = if acc.is_constant() {
                    f.scale(acc.constant)
                } else if f.is_constant() {
                    acc.scale(f.constant)
                } else {
                    return Err(FrontendError::new(ErrorKind::NonAffine, Some(pos), "product of iterators is not affine"));
                };
            } else if self.is("/") || self.is("%") {
                let is_div = self.is("/");
                self.bump();
                let f = self.afactor()?;
                if !acc.is_constant() || !f.is_constant() {
                    return Err(FrontendError::new(
                        ErrorKind::NonAffine,
                        Some(pos),
                        "division or modulo of iterators is not affine",
                    ));
                }
                if f.constant == 0 {
                    return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), "division by zero"));
                }
                // C semantics: truncation toward zero
                acc = Affine::constant(if is_div {
                    acc.constant / f.constant
                } else {
                    acc.constant % f.constant
                });
            } else {
                return Ok(acc);
            }
        }
    }

    fn afactor(&mut self) -> PResult<Affine> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Affine::constant(v))
            }
            Tok::Punct("-") => {
                self.bump();
                Ok(self.afactor()?.scale(-1))
            }
            Tok::Punct("+") => {
                self.bump();
                self.afactor()
            }
            Tok::Punct("(") => {
                self.bump();
                let a = self.affine()?;
                self.expect(")")?;
                Ok(a)
            }
            Tok::Punct("*") => Err(FrontendError::new(ErrorKind::Pointer, Some(pos), "pointer dereference is not supported")),
            Tok::Ident(n) if !is_reserved(&n) => {
                self.bump();
                if let Some(v) = self.constants.iter().find(|(c, _)| *c == n).map(|(_, v)| *v) {
                    return Ok(Affine::constant(v));
                }
                if self.arrays.contains_key(&n) {
                    return Err(FrontendError::new(
                        ErrorKind::DataDependent,
                        Some(pos),
                        format!("array value '{n}' used in an index, bound or condition"),
                    ));
                }
                if self.scalars.contains(&n) {
                    return Ok(Affine::var(&n));
                }
                if self.is("(") {
                    return Err(FrontendError::new(ErrorKind::NonAffine, Some(pos), format!("call to '{n}' in an affine expression")));
                }
                Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("undeclared name '{n}'")))
            }
            t => Err(FrontendError::syntax(pos, format!("expected expression, found {}", describe(&t)))),
        }
    }

    // --------------------------------------------------------- values

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            let sym = if self.is("+") {
                "+"
            } else if self.is("-") {
                "-"
            } else {
                return Ok(acc);
            };
            self.bump();
            let rhs = self.term()?;
            acc = Expr::Op {
                symbol: sym.to_string(),
                args: vec![acc, rhs],
            };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.is("/") || self.is("%") {
                return self.err_kind(ErrorKind::Unsupported, "'/' and '%' are not supported on array values");
            }
            if !self.eat("*") {
                return Ok(acc);
            }
            let rhs = self.unary()?;
            acc = Expr::Op {
                symbol: "*".to_string(),
                args: vec![acc, rhs],
            };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Op {
                    symbol: "-".to_string(),
                    args: vec![e],
                },
            });
        }
        if self.eat("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Punct("*") | Tok::Punct("&") => {
                Err(FrontendError::new(ErrorKind::Pointer, Some(pos), "pointer operations are not supported"))
            }
            Tok::Ident(n) if !is_reserved(&n) => {
                self.bump();
                if self.is("[") {
                    return Ok(Expr::Read(self.access(n, pos)?));
                }
                if self.eat("(") {
                    let Some(props) = self.operators.functions.get(&n).copied() else {
                        return Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("undeclared function '{n}'")));
                    };
                    let mut args = Vec::new();
                    if !self.is(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(",") {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    if args.len() != props.arity {
                        return Err(FrontendError::new(
                            ErrorKind::Semantic,
                            Some(pos),
                            format!("'{n}' takes {} argument(s), given {}", props.arity, args.len()),
                        ));
                    }
                    return Ok(Expr::Op { symbol: n, args });
                }
                if let Some(v) = self.constants.iter().find(|(c, _)| *c == n).map(|(_, v)| *v) {
                    return Ok(Expr::Const(v));
                }
                if self.scalars.contains(&n) {
                    return Err(FrontendError::new(
                        ErrorKind::Unsupported,
                        Some(pos),
                        format!("iterator '{n}' used as a value; only array elements and constants may be computed on"),
                    ));
                }
                if self.arrays.contains_key(&n) {
                    return Err(FrontendError::new(ErrorKind::Pointer, Some(pos), format!("array '{n}' used without an index")));
                }
                Err(FrontendError::new(ErrorKind::Semantic, Some(pos), format!("undeclared name '{n}'")))
            }
            t => Err(FrontendError::syntax(pos, format!("expected expression, found {}", describe(&t)))),
        }
    }

    // -------------------------------------------------- statement context

    fn statement_info(&mut self, label: &str, lhs: &Access, rhs: &Expr, pos: Pos) -> PResult<StatementInfo> {
        let iterators: Vec<String> = self.active_iterators().iter().map(|s| s.to_string()).collect();
        let domain = build_domain(&iterators, &self.frames);
        let p = self.next_position();
        let mut schedule = self.sched.clone();
        schedule.push(SchedEntry::Position(p));
        Ok(StatementInfo {
            label: label.to_string(),
            iterators,
            domain,
            schedule,
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            pos,
        })
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "int" | "void" | "for" | "if" | "else" | "while" | "do" | "return" | "goto" | "break" | "continue" | "switch"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("'{v}'"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::Pragma(_) => "annotation".into(),
        Tok::Define(..) => "#define".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Affine expression over the iterator tuple as a relation-engine expression.
pub(crate) fn lin(a: &Affine, iterators: &[String], n_vars: usize) -> LinExpr {
    let mut e = LinExpr::constant(n_vars, a.constant);
    for (name, &c) in &a.terms {
        let i = iterators
            .iter()
            .position(|it| it == name)
            .expect("affine expression over enclosing iterators");
        e.set_coeff(i, c);
    }
    e
}

/// `lhs op rhs` as alternatives of constraints (a disjunction only for `!=`).
fn cmp_constraints(c: &Cmp, iterators: &[String], negated: bool) -> Vec<Vec<Constraint>> {
    let n = iterators.len();
    let d = lin(&c.rhs, iterators, n).sub(&lin(&c.lhs, iterators, n)); // rhs - lhs
    let one = BigInt::from(1);
    let ge = |e: LinExpr| Constraint::Ge(e);
    let op = if negated {
        match c.op {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    } else {
        c.op
    };
    match op {
        CmpOp::Lt => vec![vec![ge(d.add_constant(&-&one))]],
        CmpOp::Le => vec![vec![ge(d)]],
        CmpOp::Gt => vec![vec![ge(d.neg().add_constant(&-&one))]],
        CmpOp::Ge => vec![vec![ge(d.neg())]],
        CmpOp::Eq => vec![vec![Constraint::Eq(d)]],
        CmpOp::Ne => vec![
            vec![ge(d.add_constant(&-&one))],
            vec![ge(d.neg().add_constant(&-&one))],
        ],
    }
}

fn build_domain(iterators: &[String], frames: &[Frame]) -> IntRelation {
    let n = iterators.len();
    // disjunctive normal form: a list of constraint lists
    let mut dnf: Vec<Vec<Constraint>> = vec![vec![]];
    let conj = |dnf: Vec<Vec<Constraint>>, alts: Vec<Vec<Constraint>>| -> Vec<Vec<Constraint>> {
        let mut out = Vec::new();
        for d in &dnf {
            for a in &alts {
                let mut x = d.clone();
                x.extend(a.iter().cloned());
                out.push(x);
            }
        }
        out
    };
    let mut depth = 0;
    for f in frames {
        match f {
            Frame::Loop { init, cond, step, .. } => {
                let v = LinExpr::var(n, depth);
                let start = lin(init, iterators, n);
                let from_start = if *step > 0 { v.sub(&start) } else { start.sub(&v) };
                let mut cs = vec![Constraint::Ge(from_start.clone())];
                if step.abs() > 1 {
                    cs.push(Constraint::Cong(from_start, BigInt::from(step.abs())));
                }
                dnf = conj(dnf, vec![cs]);
                for c in cond {
                    dnf = conj(dnf, cmp_constraints(c, iterators, false));
                }
                depth += 1;
            }
            Frame::Guard { cond, negated: false } => {
                for c in cond {
                    dnf = conj(dnf, cmp_constraints(c, iterators, false));
                }
            }
            Frame::Guard { cond, negated: true } => {
                // ¬(c1 ∧ … ∧ cn) = ¬c1 ∨ (c1 ∧ ¬c2) ∨ …
                let mut alts: Vec<Vec<Constraint>> = Vec::new();
                let mut prefix: Vec<Vec<Constraint>> = vec![vec![]];
                for c in cond {
                    let neg = cmp_constraints(c, iterators, true);
                    for p in &prefix {
                        for a in &neg {
                            let mut x = p.clone();
                            x.extend(a.iter().cloned());
                            alts.push(x);
                        }
                    }
                    let pos = cmp_constraints(c, iterators, false);
                    prefix = {
                        let mut out = Vec::new();
                        for p in &prefix {
                            for a in &pos {
                                let mut x = p.clone();
                                x.extend(a.iter().cloned());
                                out.push(x);
                            }
                        }
                        out
                    };
                }
                dnf = conj(dnf, alts);
            }
        }
    }
    let conjuncts = dnf.into_iter().map(|cs| Conjunct::new(n, 0, cs)).collect();
    IntRelation::from_conjuncts(
        IntTupleSpace::named(iterators.to_vec()),
        IntTupleSpace::new(0),
        conjuncts,
    )
}
