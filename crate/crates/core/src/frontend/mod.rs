//! Parser for the static-control C subset, and class checks on the result.

mod ast;
mod checks;
mod lexer;
mod parser;
mod pretty;

use std::collections::BTreeMap;
use std::fmt;

pub use ast::*;
pub use checks::{check_class, check_def_use, check_extents, check_single_assignment, ClassViolation, ViolationKind};
pub use pretty::pretty_print;

use crate::relation::{Conjunct, Constraint, IntRelation, IntTupleSpace, LinExpr, RelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    /// Index, bound or condition that is not affine in the loop iterators.
    NonAffine,
    /// Index, bound or condition that depends on array values.
    DataDependent,
    Pointer,
    /// Construct outside the supported class (while-loops, scalar params, ...).
    Unsupported,
    /// Undeclared names, duplicate labels, arity errors.
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontendError {
    pub kind: ErrorKind,
    pub pos: Option<Pos>,
    pub message: String,
}

impl FrontendError {
    pub fn new(kind: ErrorKind, pos: Option<Pos>, message: impl Into<String>) -> Self {
        FrontendError {
            kind,
            pos,
            message: message.into(),
        }
    }

    pub fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Syntax, Some(pos), message)
    }

    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        match self.pos {
            Some(p) => format!("{file}:{p}: {}", self.message),
            None => format!("{file}: {}", self.message),
        }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for FrontendError {}

pub fn parse(source: &str) -> Result<Program, FrontendError> {
    parser::parse_program(source, &BTreeMap::new())
}

/// Parse with some `#define` values replaced.
pub fn parse_with_overrides(source: &str, overrides: &BTreeMap<String, i64>) -> Result<Program, FrontendError> {
    parser::parse_program(source, overrides)
}

impl StatementInfo {
    /// `{ i → index(i) | i ∈ domain }` for an access of this statement.
    pub fn access_relation(&self, access: &Access) -> Result<IntRelation, RelError> {
        let n = self.iterators.len();
        let m = access.index.len();
        let mut c = Conjunct::universe(n + m, 0);
        for (d, e) in access.index.iter().enumerate() {
            let f = parser::lin(e, &self.iterators, n + m);
            c.add(Constraint::Eq(LinExpr::var(n + m, n + d).sub(&f)));
        }
        let rel = IntRelation::from_conjuncts(
            IntTupleSpace::named(self.iterators.clone()),
            IntTupleSpace::new(m),
            vec![c],
        );
        rel.restrict_domain(&self.domain)
    }

    /// `{ i → lhs index(i) | i ∈ domain }`.
    pub fn write_relation(&self) -> Result<IntRelation, RelError> {
        self.access_relation(&self.lhs)
    }
}
