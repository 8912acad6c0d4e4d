pub mod addg;
pub mod checker;
pub mod diagnostics;
pub mod frontend;
pub mod oracle;
pub mod relation;
pub mod report;

pub use addg::{Addg, EdgeId, NodeId};
pub use checker::{check_equivalence, CheckConfig, CheckResult, Verdict};
pub use diagnostics::{Diagnostic, DiagnosticKind};
pub use frontend::{parse, parse_with_overrides, FrontendError, Program};
pub use relation::{Budget, IntRelation, IntTupleSpace, LinExpr, RelError};
pub use report::{check_sources, render_text, Report};
