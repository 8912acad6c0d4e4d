//! Text form of relations.
//!
//! ```text
//! {[x] -> [2x] | 0 <= x <= 1022 and x % 2 = 0} union {[x] -> [x] | false}
//! {[k] | exists j: k = 2j and 0 <= k < 1024}
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::linear::{modulo, LinExpr};
use super::system::{Conjunct, Constraint};
use super::{IntRelation, IntTupleSpace, RelError};

// ---------------------------------------------------------------- rendering

fn default_names(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        return vec![prefix.to_string()];
    }
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn valid_ident(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !matches!(s, "and" | "union" | "exists" | "true" | "false")
}

fn dim_names(rel: &IntRelation) -> (Vec<String>, Vec<String>) {
    let pick = |space: &IntTupleSpace, prefix: &str| -> Vec<String> {
        match &space.names {
            Some(n) if n.iter().all(|s| valid_ident(s)) => n.clone(),
            _ => default_names(prefix, space.arity),
        }
    };
    let ins = pick(&rel.in_space, "x");
    let mut outs = pick(&rel.out_space, "y");
    let mut taken: Vec<String> = ins.clone();
    for o in outs.iter_mut() {
        while taken.contains(o) {
            o.push('\'');
        }
        taken.push(o.clone());
    }
    let mut ins_u = Vec::new();
    for i in ins {
        let mut i = i;
        while ins_u.contains(&i) {
            i.push('\'');
        }
        ins_u.push(i);
    }
    (ins_u, outs)
}

fn term(c: &BigInt, name: &str, first: bool) -> String {
    let mag = c.abs();
    let body = if mag.is_one() {
        name.to_string()
    } else {
        format!("{mag}{name}")
    };
    match (first, c.is_negative()) {
        (true, true) => format!("-{body}"),
        (true, false) => body,
        (false, true) => format!(" - {body}"),
        (false, false) => format!(" + {body}"),
    }
}

/// Render `Σ coeffs·names + constant`.
fn render_expr(e: &LinExpr, names: &[String]) -> String {
    let mut s = String::new();
    for (i, c) in e.coeffs.iter().enumerate() {
        if !c.is_zero() {
            s.push_str(&term(c, &names[i], s.is_empty()));
        }
    }
    let k = &e.constant;
    if s.is_empty() {
        return k.to_string();
    }
    if k.is_positive() {
        s.push_str(&format!(" + {k}"));
    } else if k.is_negative() {
        s.push_str(&format!(" - {}", k.abs()));
    }
    s
}

/// Split `e` into `lhs OP rhs` with positive coefficients on both sides.
fn render_split(e: &LinExpr, names: &[String], op: &str) -> String {
    let n = e.n_vars();
    let mut pos = LinExpr::zero(n);
    let mut neg = LinExpr::zero(n);
    for (i, c) in e.coeffs.iter().enumerate() {
        if c.is_positive() {
            pos.coeffs[i] = c.clone();
        } else if c.is_negative() {
            neg.coeffs[i] = -c;
        }
    }
    neg.constant = -&e.constant;
    if pos.is_constant() {
        // 0 OP rhs, flip so the variables come first
        let flipped = match op {
            ">=" => "<=",
            "<=" => ">=",
            other => other,
        };
        return format!("{} {flipped} {}", render_expr(&neg, names), 0);
    }
    format!("{} {op} {}", render_expr(&pos, names), render_expr(&neg, names))
}

fn single_var(e: &LinExpr) -> Option<usize> {
    let mut it = e.vars();
    let v = it.next()?;
    if it.next().is_none() && e.coeffs[v].abs().is_one() {
        Some(v)
    } else {
        None
    }
}

fn render_conjunct(c: &Conjunct, ins: &[String], outs: &[String]) -> String {
    let ni = ins.len();
    let mut c = c.clone();
    if !c.normalize() {
        let head = if outs.is_empty() {
            format!("[{}]", ins.join(", "))
        } else {
            format!("[{}] -> [{}]", ins.join(", "), outs.join(", "))
        };
        return format!("{{{head} | false}}");
    }
    let mut names: Vec<String> = ins.iter().chain(outs).cloned().collect();
    let mut all: Vec<String> = names.clone();
    let exist_names: Vec<String> = (0..c.n_exist)
        .map(|j| {
            let mut s = format!("e{j}");
            while all.contains(&s) {
                s.push('\'');
            }
            all.push(s.clone());
            s
        })
        .collect();
    names.extend(exist_names.iter().cloned());

    // Output dimensions fixed by a unit equality over inputs only render as expressions.
    let mut out_exprs: Vec<String> = outs.to_vec();
    for o in 0..outs.len() {
        let v = ni + o;
        let found = c.eqs.iter().position(|e| {
            e.coeffs[v].abs().is_one() && e.vars().all(|w| w == v || w < ni)
        });
        if let Some(i) = found {
            let eq = c.eqs.remove(i);
            let s = eq.coeffs[v].clone();
            let mut rest = eq;
            rest.coeffs[v] = BigInt::zero();
            let repl = rest.scale(&-s);
            let one = BigInt::one();
            for e in c.eqs.iter_mut().chain(c.ineqs.iter_mut()) {
                *e = e.substitute_scaled(v, &repl, &one);
            }
            for (e, _) in c.congs.iter_mut() {
                *e = e.substitute_scaled(v, &repl, &one);
            }
            out_exprs[o] = render_expr(&repl, &names);
        }
    }
    if !c.normalize() {
        let head = format!("[{}] -> [{}]", ins.join(", "), out_exprs.join(", "));
        return format!("{{{head} | false}}");
    }

    let mut parts: Vec<String> = Vec::new();
    // pair single-variable bounds into `lo <= x <= hi`
    let mut lowers: BTreeMap<usize, BigInt> = BTreeMap::new();
    let mut uppers: BTreeMap<usize, BigInt> = BTreeMap::new();
    let mut rest_ineqs = Vec::new();
    for e in &c.ineqs {
        match single_var(e) {
            Some(v) if e.coeffs[v].is_positive() => {
                lowers.insert(v, -&e.constant);
            }
            Some(v) => {
                uppers.insert(v, e.constant.clone());
            }
            None => rest_ineqs.push(e.clone()),
        }
    }
    for e in &c.eqs {
        parts.push(render_split(e, &names, "="));
    }
    for v in 0..c.n_vars {
        match (lowers.get(&v), uppers.get(&v)) {
            (Some(l), Some(h)) => parts.push(format!("{l} <= {} <= {h}", names[v])),
            (Some(l), None) => parts.push(format!("{} >= {l}", names[v])),
            (None, Some(h)) => parts.push(format!("{} <= {h}", names[v])),
            (None, None) => {}
        }
    }
    for e in &rest_ineqs {
        parts.push(render_split(e, &names, ">="));
    }
    for (e, m) in &c.congs {
        let mut body = e.clone();
        body.constant = BigInt::zero();
        let r = modulo(&-&e.constant, m);
        let b = render_expr(&body, &names);
        if body.vars().count() == 1 && body.coeffs.iter().all(|x| x.is_zero() || x.is_one()) {
            parts.push(format!("{b} % {m} = {r}"));
        } else {
            parts.push(format!("({b}) % {m} = {r}"));
        }
    }
    let head = if outs.is_empty() {
        format!("[{}]", ins.join(", "))
    } else {
        format!("[{}] -> [{}]", ins.join(", "), out_exprs.join(", "))
    };
    if parts.is_empty() {
        return format!("{{{head}}}");
    }
    let body = parts.join(" and ");
    if exist_names.is_empty() {
        format!("{{{head} | {body}}}")
    } else {
        format!("{{{head} | exists {}: {body}}}", exist_names.join(", "))
    }
}

pub(super) fn render(rel: &IntRelation) -> String {
    let (ins, outs) = dim_names(rel);
    if rel.conjuncts.is_empty() {
        let head = if outs.is_empty() {
            format!("[{}]", ins.join(", "))
        } else {
            format!("[{}] -> [{}]", ins.join(", "), outs.join(", "))
        };
        return format!("{{{head} | false}}");
    }
    rel.conjuncts
        .iter()
        .map(|c| render_conjunct(c, &ins, &outs))
        .collect::<Vec<_>>()
        .join(" union ")
}

// ------------------------------------------------------------------ parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Punct(&'static str),
}

const PUNCTS: [&str; 20] = [
    "->", "<=", ">=", "==", "{", "}", "[", "]", "(", ")", ",", "|", ":", "<", ">", "=", "+", "-",
    "*", "%",
];

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, RelError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    'outer: while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((st, Tok::Int(s[st..i].parse().expect("digits"))));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'\'') {
                i += 1;
            }
            out.push((st, Tok::Ident(s[st..i].to_string())));
            continue;
        }
        for p in PUNCTS {
            if s[i..].starts_with(p) {
                out.push((i, Tok::Punct(p)));
                i += p.len();
                continue 'outer;
            }
        }
        return Err(RelError::Parse {
            pos: i,
            msg: format!("unexpected character {c:?}"),
        });
    }
    Ok(out)
}

/// Symbolic affine form, resolved to column indices once all names are known.
#[derive(Clone, Debug, Default)]
struct Sym {
    terms: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl Sym {
    fn name(n: &str) -> Sym {
        let mut t = BTreeMap::new();
        t.insert(n.to_string(), BigInt::one());
        Sym {
            terms: t,
            constant: BigInt::zero(),
        }
    }

    fn konst(k: BigInt) -> Sym {
        Sym {
            terms: BTreeMap::new(),
            constant: k,
        }
    }

    fn scale(mut self, k: &BigInt) -> Sym {
        for v in self.terms.values_mut() {
            *v *= k;
        }
        self.constant *= k;
        self
    }

    fn plus(mut self, o: Sym, sign: i32) -> Sym {
        let s = BigInt::from(sign);
        for (n, c) in o.terms {
            *self.terms.entry(n).or_default() += &c * &s;
        }
        self.constant += o.constant * s;
        self
    }

    fn as_const(&self) -> Option<BigInt> {
        if self.terms.values().all(Zero::is_zero) {
            Some(self.constant.clone())
        } else {
            None
        }
    }

    fn bare_name(&self) -> Option<&str> {
        let nz: Vec<_> = self.terms.iter().filter(|(_, c)| !c.is_zero()).collect();
        if nz.len() == 1 && nz[0].1.is_one() && self.constant.is_zero() {
            Some(nz[0].0)
        } else {
            None
        }
    }
}

enum SymCon {
    Eq(Sym),
    Ge(Sym),
    Cong(Sym, BigInt),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, RelError> {
        Err(RelError::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(q)) if q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), RelError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected '{p}'"))
        }
    }

    fn ident(&mut self) -> Result<String, RelError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<BigInt, RelError> {
        match self.peek() {
            Some(Tok::Int(k)) => {
                let k = k.clone();
                self.pos += 1;
                Ok(k)
            }
            _ => self.err("expected integer"),
        }
    }

    fn expr(&mut self) -> Result<Sym, RelError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_punct("+") {
                acc = acc.plus(self.term()?, 1);
            } else if self.eat_punct("-") {
                acc = acc.plus(self.term()?, -1);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Sym, RelError> {
        if self.eat_punct("-") {
            return Ok(self.term()?.scale(&-BigInt::one()));
        }
        let mut acc = self.factor()?;
        while self.eat_punct("*") {
            let f = self.factor()?;
            acc = self.multiply(acc, f)?;
        }
        Ok(acc)
    }

    fn multiply(&self, a: Sym, b: Sym) -> Result<Sym, RelError> {
        match (a.as_const(), b.as_const()) {
            (Some(k), _) => Ok(b.scale(&k)),
            (_, Some(k)) => Ok(a.scale(&k)),
            _ => self.err("non-affine product"),
        }
    }

    fn factor(&mut self) -> Result<Sym, RelError> {
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                // implicit product: 2x, 3(x + 1)
                match self.peek() {
                    Some(Tok::Ident(s)) if !is_keyword(s) => {
                        let f = self.factor()?;
                        Ok(f.scale(&k))
                    }
                    Some(Tok::Punct("(")) => {
                        let f = self.factor()?;
                        Ok(f.scale(&k))
                    }
                    _ => Ok(Sym::konst(k)),
                }
            }
            Some(Tok::Ident(s)) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(Sym::name(&s))
            }
            Some(Tok::Punct("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => self.err("expected expression"),
        }
    }

    fn cmp_op(&mut self) -> Option<&'static str> {
        for op in ["<=", ">=", "==", "<", ">", "="] {
            if self.eat_punct(op) {
                return Some(op);
            }
        }
        None
    }

    /// `e1 op e2 op e3 ...` or `e % m = r`.
    fn chain(&mut self, out: &mut Vec<SymCon>) -> Result<(), RelError> {
        let mut lhs = self.expr()?;
        if self.eat_punct("%") {
            let m = self.int()?;
            if m.is_zero() {
                return self.err("modulus must be nonzero");
            }
            if !(self.eat_punct("=") || self.eat_punct("==")) {
                return self.err("expected '=' after modulus");
            }
            let r = self.expr()?;
            out.push(SymCon::Cong(lhs.plus(r, -1), m));
            return Ok(());
        }
        let mut any = false;
        while let Some(op) = self.cmp_op() {
            any = true;
            let rhs = self.expr()?;
            let d = rhs.clone().plus(lhs.clone(), -1); // rhs - lhs
            let one = BigInt::one();
            out.push(match op {
                "<=" => SymCon::Ge(d),
                "<" => SymCon::Ge(d.plus(Sym::konst(one), -1)),
                ">=" => SymCon::Ge(d.scale(&-BigInt::one())),
                ">" => SymCon::Ge(d.scale(&-BigInt::one()).plus(Sym::konst(one), -1)),
                _ => SymCon::Eq(d),
            });
            lhs = rhs;
        }
        if !any {
            return self.err("expected comparison");
        }
        Ok(())
    }

    fn formula(
        &mut self,
        exists: &mut Vec<String>,
        out: &mut Vec<SymCon>,
    ) -> Result<bool, RelError> {
        let mut feasible = true;
        loop {
            if self.eat_kw("exists") {
                loop {
                    exists.push(self.ident()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(":")?;
                if self.is_punct("(") {
                    // `exists j: ( ... )` with a parenthesized body
                    let save = self.pos;
                    self.pos += 1;
                    let mut inner = Vec::new();
                    if let Ok(f) = self.formula(exists, &mut inner) {
                        if self.eat_punct(")") {
                            feasible &= f;
                            out.extend(inner);
                            if !self.eat_kw("and") {
                                return Ok(feasible);
                            }
                            continue;
                        }
                    }
                    self.pos = save;
                }
                continue;
            }
            if self.eat_kw("true") {
            } else if self.eat_kw("false") {
                feasible = false;
            } else {
                self.chain(out)?;
            }
            if !self.eat_kw("and") {
                return Ok(feasible);
            }
        }
    }

    fn tuple(&mut self) -> Result<Vec<Sym>, RelError> {
        self.expect_punct("[")?;
        let mut v = Vec::new();
        if self.eat_punct("]") {
            return Ok(v);
        }
        loop {
            v.push(self.expr()?);
            if self.eat_punct("]") {
                return Ok(v);
            }
            self.expect_punct(",")?;
        }
    }

    fn piece(&mut self) -> Result<(usize, usize, Conjunct, Vec<String>, Vec<String>), RelError> {
        self.expect_punct("{")?;
        let ins = self.tuple()?;
        let outs = if self.eat_punct("->") {
            Some(self.tuple()?)
        } else {
            None
        };
        let mut exists = Vec::new();
        let mut cons = Vec::new();
        let mut feasible = true;
        if self.eat_punct("|") || self.eat_punct(":") {
            feasible = self.formula(&mut exists, &mut cons)?;
        }
        self.expect_punct("}")?;

        let outs_v = outs.unwrap_or_default();
        let ni = ins.len();
        let no = outs_v.len();
        // dimension names: bare fresh identifiers name their slot
        let mut columns: BTreeMap<String, usize> = BTreeMap::new();
        let mut dim_names = Vec::new();
        let mut defining: Vec<(usize, Sym)> = Vec::new();
        for (i, s) in ins.iter().chain(&outs_v).enumerate() {
            match s.bare_name() {
                Some(n) if !columns.contains_key(n) => {
                    columns.insert(n.to_string(), i);
                    dim_names.push(n.to_string());
                }
                _ => {
                    defining.push((i, s.clone()));
                    dim_names.push(String::new());
                }
            }
        }
        for (j, e) in exists.iter().enumerate() {
            if columns.insert(e.clone(), ni + no + j).is_some() {
                return self.err(format!("name '{e}' bound twice"));
            }
        }
        let n_vars = ni + no + exists.len();
        let resolve = |s: &Sym| -> Result<LinExpr, RelError> {
            let mut e = LinExpr::zero(n_vars);
            for (n, c) in &s.terms {
                if c.is_zero() {
                    continue;
                }
                match columns.get(n) {
                    Some(&i) => e.coeffs[i] += c,
                    None => {
                        return Err(RelError::Parse {
                            pos: 0,
                            msg: format!("unknown name '{n}'"),
                        })
                    }
                }
            }
            e.constant = s.constant.clone();
            Ok(e)
        };
        let mut c = Conjunct::universe(n_vars, exists.len());
        if !feasible {
            c = Conjunct::empty(n_vars);
            c.n_exist = exists.len();
        }
        for (i, s) in defining {
            let mut e = resolve(&s)?;
            e.coeffs[i] -= 1;
            c.add(Constraint::Eq(e));
        }
        for k in cons {
            c.add(match k {
                SymCon::Eq(s) => Constraint::Eq(resolve(&s)?),
                SymCon::Ge(s) => Constraint::Ge(resolve(&s)?),
                SymCon::Cong(s, m) => Constraint::Cong(resolve(&s)?, m),
            });
        }
        let in_names = dim_names[..ni].to_vec();
        let out_names = dim_names[ni..].to_vec();
        Ok((ni, no, c, in_names, out_names))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "and" | "union" | "exists" | "true" | "false")
}

/// Parse the text form. Names are taken from the first piece when every
/// dimension there is a bare identifier.
pub fn parse_relation(s: &str) -> Result<IntRelation, RelError> {
    let toks = lex(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: s.len(),
    };
    let mut shape: Option<(usize, usize)> = None;
    let mut names: Option<(Vec<String>, Vec<String>)> = None;
    let mut conjuncts = Vec::new();
    let mut is_rel = false;
    loop {
        let start = p.pos;
        let (ni, no, c, in_n, out_n) = p.piece()?;
        let has_arrow = p.toks[start..p.pos]
            .iter()
            .any(|(_, t)| *t == Tok::Punct("->"));
        match shape {
            None => {
                shape = Some((ni, no));
                is_rel = has_arrow;
                names = Some((in_n, out_n));
            }
            Some(sh) if sh != (ni, no) || is_rel != has_arrow => {
                return Err(RelError::Parse {
                    pos: p.toks.get(start).map_or(0, |(o, _)| *o),
                    msg: "pieces of a union must have the same shape".into(),
                })
            }
            _ => {}
        }
        conjuncts.push(c);
        if !p.eat_kw("union") {
            break;
        }
    }
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    let (ni, no) = shape.expect("at least one piece");
    let (in_n, out_n) = names.expect("names");
    let named = |v: Vec<String>| {
        if v.iter().all(|s| !s.is_empty()) {
            Some(v)
        } else {
            None
        }
    };
    let rel = IntRelation {
        in_space: IntTupleSpace::new(ni),
        out_space: IntTupleSpace::new(no),
        conjuncts,
    };
    Ok(rel.with_names(named(in_n), named(out_n)))
}
