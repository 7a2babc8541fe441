//! The action language: one API call per line, optionally bound to a name.
//!
//! ```
//! use roomforge::action::parse;
//!
//! let p = parse("m1 = retrieve_material(\"white ceramic tile\")\nset_material(\"floors\", m1)").unwrap();
//! assert_eq!(p.statements.len(), 2);
//! assert_eq!(parse(&p.to_string()).unwrap(), p);
//! ```

mod ast;
mod exec;
mod parser;

pub use ast::{is_identifier, ActionProgram, Call, Statement, Value};
pub use exec::{
    execute, Binding, ExecError, ExecutionContext, ExecutionResult, GateMode, Outcome, SkipReason,
};
pub use parser::{parse, ParseError, ParseErrorKind};

pub(crate) use exec::id_stem;
