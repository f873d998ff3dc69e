//! MiniLang front end: syntax tree, lexer, parser, static checks, and the
//! canonical pretty printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typecheck;

pub use ast::{
    names_used, internal_binders, rename_free_occurrences, BinaryOp, Block, Builtin, EditOutcome,
    Expr, Function, Param, Program, StatementEntry, Statement, StatementId, StaticType, StmtClass,
    StmtKind, UnaryOp,
};
pub use parser::parse_program;
pub use pretty::{pretty_print, pretty_statement};
pub use typecheck::{
    block_definitely_returns, expr_type, function_table, stmt_definitely_returns, typecheck,
    Diagnostic, DiagnosticKind, FunctionTable, Location,
};
