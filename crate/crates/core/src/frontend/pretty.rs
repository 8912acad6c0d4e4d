use std::fmt::Write;

use super::ast::*;

/// Render a program as source text that parses back to the same AST.
/// `#define` values are emitted but uses are already folded into numbers.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for (n, v) in &p.constants {
        let _ = writeln!(out, "#define {n} {v}");
    }
    if !p.constants.is_empty() {
        out.push('\n');
    }
    for (name, props) in &p.operators.functions {
        let mut tags = Vec::new();
        if props.associative {
            tags.push("assoc");
        }
        if props.commutative {
            tags.push("comm");
        }
        if !tags.is_empty() {
            let _ = write!(out, "/*@ {} */ ", tags.join(" "));
        }
        let params = vec!["int"; props.arity].join(", ");
        let _ = writeln!(out, "int {name}({params});");
    }
    if !p.operators.functions.is_empty() {
        out.push('\n');
    }
    let params: Vec<String> = p
        .params
        .iter()
        .map(|prm| {
            let dims: String = prm
                .extents
                .iter()
                .map(|e| match e {
                    Some(e) => format!("[{e}]"),
                    None => "[]".to_string(),
                })
                .collect();
            format!("int {}{dims}", prm.name)
        })
        .collect();
    let _ = writeln!(out, "void {}({})", p.name, params.join(", "));
    out.push_str("{\n");
    let mut decls: Vec<String> = p.scalars.clone();
    for l in &p.locals {
        let dims: String = l.extents.iter().map(|e| format!("[{e}]")).collect();
        decls.push(format!("{}{dims}", l.name));
    }
    if !decls.is_empty() {
        let _ = writeln!(out, "  int {};", decls.join(", "));
    }
    for n in &p.body {
        node(&mut out, n, 1);
    }
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn guard(g: &Guard) -> String {
    g.iter()
        .map(|c| format!("{} {} {}", affine(&c.lhs), c.op.symbol(), affine(&c.rhs)))
        .collect::<Vec<_>>()
        .join(" && ")
}

fn affine(a: &Affine) -> String {
    a.to_string()
}

fn block(out: &mut String, body: &[Node], depth: usize) {
    out.push_str("{\n");
    for n in body {
        node(out, n, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn node(out: &mut String, n: &Node, depth: usize) {
    indent(out, depth);
    match n {
        Node::Loop(l) => {
            let step = match l.step {
                1 => format!("{}++", l.iter),
                -1 => format!("{}--", l.iter),
                s if s > 0 => format!("{} += {s}", l.iter),
                s => format!("{} -= {}", l.iter, -s),
            };
            let _ = write!(out, "for ({} = {}; {}; {step}) ", l.iter, affine(&l.init), guard(&l.cond));
            block(out, &l.body, depth);
            out.push('\n');
        }
        Node::If(i) => {
            let _ = write!(out, "if ({}) ", guard(&i.cond));
            block(out, &i.then_body, depth);
            if !i.else_body.is_empty() {
                out.push_str(" else ");
                block(out, &i.else_body, depth);
            }
            out.push('\n');
        }
        Node::Assign(a) => {
            let _ = writeln!(out, "{}: {} = {};", a.label, access(&a.lhs), expr(&a.rhs));
        }
    }
}

fn access(a: &Access) -> String {
    let mut s = a.array.clone();
    for e in &a.index {
        let _ = write!(s, "[{}]", affine(e));
    }
    s
}

/// Binding strength of an infix operator, or `None` for atoms and calls.
fn prec(e: &Expr) -> Option<u8> {
    match e {
        Expr::Op { symbol, args } if args.len() == 2 && (symbol == "+" || symbol == "-") => Some(1),
        Expr::Op { symbol, args } if args.len() == 2 && symbol == "*" => Some(2),
        Expr::Op { symbol, args } if args.len() == 1 && symbol == "-" => Some(3),
        _ => None,
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match e {
        Expr::Read(a) => access(a),
        Expr::Const(c) if *c < 0 => format!("({c})"),
        Expr::Const(c) => c.to_string(),
        Expr::Op { symbol, args } => match prec(e) {
            Some(3) => {
                let inner = expr(&args[0]);
                if prec(&args[0]).is_some() {
                    format!("-({inner})")
                } else {
                    format!("-{inner}")
                }
            }
            Some(p) => {
                let l = expr(&args[0]);
                let r = expr(&args[1]);
                let l = if prec(&args[0]).is_some_and(|q| q < p) {
                    format!("({l})")
                } else {
                    l
                };
                // the parser is left-associative
                let r = if prec(&args[1]).is_some_and(|q| q <= p) {
                    format!("({r})")
                } else {
                    r
                };
                format!("{l} {symbol} {r}")
            }
            None => {
                let a: Vec<String> = args.iter().map(expr).collect();
                format!("{symbol}({})", a.join(", "))
            }
        },
    }
}
