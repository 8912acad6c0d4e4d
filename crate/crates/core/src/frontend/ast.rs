use std::collections::BTreeMap;
use std::fmt;

use crate::relation::IntRelation;

/// Source position. Compares equal to every other position so that ASTs
/// parsed from differently formatted text can be compared structurally.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// `Σ coeff·iterator + constant`, with `#define` constants already folded.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub terms: BTreeMap<String, i64>,
    pub constant: i64,
}

impl Affine {
    pub fn constant(c: i64) -> Self {
        Affine {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), 1);
        Affine { terms, constant: 0 }
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.terms.get(name).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Affine, sign: i64) -> Affine {
        let mut out = self.clone();
        for (n, c) in &other.terms {
            *out.terms.entry(n.clone()).or_insert(0) += sign * c;
        }
        out.terms.retain(|_, c| *c != 0);
        out.constant += sign * other.constant;
        out
    }

    pub fn scale(&self, k: i64) -> Affine {
        if k == 0 {
            return Affine::constant(0);
        }
        Affine {
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> i64) -> i64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, (n, c)| acc + c * env(n))
    }

    /// Replace `name` by `repl`.
    pub fn substitute(&self, name: &str, repl: &Affine) -> Affine {
        let c = self.coeff(name);
        if c == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        out.terms.remove(name);
        out.add(repl, c)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, &c) in &self.terms {
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1 {
                f.write_str(n)?;
            } else {
                write!(f, "{mag}*{n}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cmp {
    pub lhs: Affine,
    pub op: CmpOp,
    pub rhs: Affine,
}

impl Cmp {
    pub fn holds(&self, env: &dyn Fn(&str) -> i64) -> bool {
        self.op.holds(self.lhs.eval(env), self.rhs.eval(env))
    }
}

/// A conjunction of affine comparisons.
pub type Guard = Vec<Cmp>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    /// `None` for an unsized leading dimension (`int A[]`).
    pub extents: Vec<Option<i64>>,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    pub extents: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub array: String,
    pub index: Vec<Affine>,
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.array)?;
        for e in &self.index {
            write!(f, "[{e}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Read(Access),
    Const(i64),
    /// Built-in operator or user function application.
    Op { symbol: String, args: Vec<Expr> },
}

impl Expr {
    /// Array reads in left-to-right order.
    pub fn reads(&self) -> Vec<&Access> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Access>) {
            match e {
                Expr::Read(a) => out.push(a),
                Expr::Const(_) => {}
                Expr::Op { args, .. } => args.iter().for_each(|a| walk(a, out)),
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assign {
    pub label: String,
    pub lhs: Access,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub iter: String,
    pub init: Affine,
    pub cond: Guard,
    pub step: i64,
    pub body: Vec<Node>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct If {
    pub cond: Guard,
    pub then_body: Vec<Node>,
    pub else_body: Vec<Node>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Loop(Loop),
    If(If),
    Assign(Assign),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpProps {
    pub arity: usize,
    pub associative: bool,
    pub commutative: bool,
}

/// Operator properties: built-ins plus declared user functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTable {
    pub functions: BTreeMap<String, OpProps>,
}

impl Default for OperatorTable {
    fn default() -> Self {
        OperatorTable {
            functions: BTreeMap::new(),
        }
    }
}

impl OperatorTable {
    pub fn props(&self, symbol: &str, arity: usize) -> Option<OpProps> {
        match (symbol, arity) {
            ("+", 2) | ("*", 2) => Some(OpProps {
                arity,
                associative: true,
                commutative: true,
            }),
            ("-", 1) | ("-", 2) => Some(OpProps {
                arity,
                associative: false,
                commutative: false,
            }),
            _ => self.functions.get(symbol).copied().filter(|p| p.arity == arity),
        }
    }

    pub fn is_builtin(symbol: &str) -> bool {
        matches!(symbol, "+" | "*" | "-")
    }
}

/// A statement with its loop context, as needed by the analyses.
#[derive(Clone, Debug, PartialEq)]
pub struct StatementInfo {
    pub label: String,
    /// Enclosing loop iterators, outermost first.
    pub iterators: Vec<String>,
    /// Set over the iterator tuple.
    pub domain: IntRelation,
    /// Interleaved execution-order vector: textual position, then
    /// `direction·iterator` per loop level, then position again.
    pub schedule: Vec<SchedEntry>,
    pub lhs: Access,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedEntry {
    Position(i64),
    /// Loop iterator at `depth`, multiplied by `sign` (−1 for decreasing loops).
    Iter { depth: usize, sign: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub name: String,
    pub params: Vec<Param>,
    pub constants: Vec<(String, i64)>,
    pub locals: Vec<ArrayDecl>,
    pub scalars: Vec<String>,
    pub operators: OperatorTable,
    pub body: Vec<Node>,
    pub statements: Vec<StatementInfo>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrayClass {
    Input,
    Output,
    Intermediate,
}

impl Program {
    pub fn statement(&self, label: &str) -> Option<&StatementInfo> {
        self.statements.iter().find(|s| s.label == label)
    }

    pub fn array_class(&self, name: &str) -> Option<ArrayClass> {
        if let Some(p) = self.params.iter().find(|p| p.name == name) {
            return Some(match p.direction {
                Direction::Input => ArrayClass::Input,
                Direction::Output => ArrayClass::Output,
            });
        }
        self.locals
            .iter()
            .any(|l| l.name == name)
            .then_some(ArrayClass::Intermediate)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.direction == Direction::Output)
    }

    /// Declared extents of an array (`None` where unsized).
    pub fn extents(&self, name: &str) -> Option<Vec<Option<i64>>> {
        if let Some(p) = self.params.iter().find(|p| p.name == name) {
            return Some(p.extents.clone());
        }
        self.locals
            .iter()
            .find(|l| l.name == name)
            .map(|l| l.extents.iter().map(|&e| Some(e)).collect())
    }

    /// Statements writing `array`, in source order.
    pub fn writers(&self, array: &str) -> Vec<&StatementInfo> {
        self.statements
            .iter()
            .filter(|s| s.lhs.array == array)
            .collect()
    }

    pub fn constant(&self, name: &str) -> Option<i64> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}
