//! Static checking: name resolution, type agreement, and return-path
//! analysis. Checking never mutates the tree and reports diagnostics in
//! traversal order, so the output is deterministic for a given program.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::*;

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    ParseError,
    TypeError,
    NameError,
    ReturnPathError,
}

impl DiagnosticKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticKind::ParseError => "parse",
            DiagnosticKind::TypeError => "type",
            DiagnosticKind::NameError => "name",
            DiagnosticKind::ReturnPathError => "return-path",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// Byte offset into the source text; used by parse diagnostics.
    Offset(usize),
    /// A whole function, for signature-level problems.
    Function { function: String },
    /// A specific statement inside a function.
    Statement { function: String, stmt: StatementId },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Offset(o) => write!(f, "offset {}", o),
            Location::Function { function } => write!(f, "fn {}", function),
            Location::Statement { function, stmt } => write!(f, "fn {} stmt {}", function, stmt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error at {}: {}", self.kind.as_str(), self.location, self.message)
    }
}

// ---------------------------------------------------------------------------
// Definite-return analysis
// ---------------------------------------------------------------------------

/// True when the statement returns on every control path. `while` never
/// counts, even with a constant condition.
pub fn stmt_definitely_returns(stmt: &Statement) -> bool {
    match &stmt.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then_block, else_block, .. } => match else_block {
            Some(els) => block_definitely_returns(then_block) && block_definitely_returns(els),
            None => false,
        },
        StmtKind::Block(inner) => block_definitely_returns(inner),
        _ => false,
    }
}

pub fn block_definitely_returns(block: &Block) -> bool {
    block.statements.iter().any(stmt_definitely_returns)
}

// ---------------------------------------------------------------------------
// Function signatures
// ---------------------------------------------------------------------------

pub type FunctionTable = BTreeMap<String, (Vec<StaticType>, StaticType)>;

/// Signature table keyed by function name. Later duplicates do not
/// overwrite earlier entries; duplicates are reported by `typecheck`.
pub fn function_table(program: &Program) -> FunctionTable {
    let mut table = FunctionTable::new();
    for func in &program.functions {
        table.entry(func.name.clone()).or_insert_with(|| {
            (func.params.iter().map(|p| p.ty.clone()).collect(), func.return_type.clone())
        });
    }
    table
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

struct Checker<'p> {
    table: FunctionTable,
    diags: Vec<Diagnostic>,
    scopes: Vec<Vec<(String, StaticType)>>,
    function: &'p str,
    return_type: StaticType,
    stmt: StatementId,
}

type ExprResult = Result<StaticType, ()>;

impl<'p> Checker<'p> {
    fn error(&mut self, kind: DiagnosticKind, message: String) {
        self.diags.push(Diagnostic {
            kind,
            location: Location::Statement { function: self.function.to_string(), stmt: self.stmt },
            message,
        });
    }

    fn lookup(&self, name: &str) -> Option<&StaticType> {
        for scope in self.scopes.iter().rev() {
            for (n, ty) in scope.iter().rev() {
                if n == name {
                    return Some(ty);
                }
            }
        }
        None
    }

    fn declare(&mut self, name: &str, ty: StaticType) {
        if Builtin::from_name(name).is_some() {
            self.error(DiagnosticKind::NameError, format!("'{}' is a reserved builtin name", name));
        } else if self.lookup(name).is_some() {
            self.error(DiagnosticKind::NameError, format!("duplicate declaration of '{}'", name));
        }
        self.scopes.last_mut().unwrap().push((name.to_string(), ty));
    }

    // -- expressions --------------------------------------------------------

    fn infer(&mut self, expr: &Expr, expected: Option<&StaticType>) -> ExprResult {
        match expr {
            Expr::IntLit(_) => Ok(StaticType::Int),
            Expr::BoolLit(_) => Ok(StaticType::Bool),
            Expr::StrLit(_) => Ok(StaticType::Str),
            Expr::ListLit(items) => {
                if items.is_empty() {
                    match expected {
                        Some(StaticType::List(inner)) => Ok(StaticType::list_of((**inner).clone())),
                        _ => {
                            self.error(
                                DiagnosticKind::TypeError,
                                "cannot infer the element type of an empty list literal here".into(),
                            );
                            Err(())
                        }
                    }
                } else {
                    let expected_elem = match expected {
                        Some(StaticType::List(inner)) => Some((**inner).clone()),
                        _ => None,
                    };
                    let first = self.infer(&items[0], expected_elem.as_ref())?;
                    for item in &items[1..] {
                        let t = self.infer(item, Some(&first))?;
                        if t != first {
                            self.error(
                                DiagnosticKind::TypeError,
                                format!("list elements disagree: {} vs {}", first, t),
                            );
                            return Err(());
                        }
                    }
                    Ok(StaticType::list_of(first))
                }
            }
            Expr::Var(name) => match self.lookup(name) {
                Some(ty) => Ok(ty.clone()),
                None => {
                    self.error(DiagnosticKind::NameError, format!("unknown variable '{}'", name));
                    Err(())
                }
            },
            Expr::Unary { op, operand } => match op {
                UnaryOp::Neg => {
                    self.check(operand, &StaticType::Int)?;
                    Ok(StaticType::Int)
                }
                UnaryOp::Not => {
                    self.check(operand, &StaticType::Bool)?;
                    Ok(StaticType::Bool)
                }
            },
            Expr::Binary { op, lhs, rhs } => self.infer_binary(*op, lhs, rhs),
            Expr::Call { function, args } => {
                let (params, ret) = match self.table.get(function) {
                    Some(sig) => sig.clone(),
                    None => {
                        self.error(DiagnosticKind::NameError, format!("unknown function '{}'", function));
                        return Err(());
                    }
                };
                if args.len() != params.len() {
                    self.error(
                        DiagnosticKind::TypeError,
                        format!("'{}' expects {} argument(s), got {}", function, params.len(), args.len()),
                    );
                    return Err(());
                }
                for (arg, pty) in args.iter().zip(params.iter()) {
                    self.check(arg, pty)?;
                }
                Ok(ret)
            }
            Expr::BuiltinCall { builtin, args } => self.infer_builtin(*builtin, args),
        }
    }

    fn check(&mut self, expr: &Expr, expected: &StaticType) -> ExprResult {
        let actual = self.infer(expr, Some(expected))?;
        if &actual != expected {
            self.error(DiagnosticKind::TypeError, format!("expected {}, found {}", expected, actual));
            return Err(());
        }
        Ok(actual)
    }

    fn infer_binary(&mut self, op: BinaryOp, lhs: &Expr, rhs: &Expr) -> ExprResult {
        match op {
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => {
                self.check(lhs, &StaticType::Int)?;
                self.check(rhs, &StaticType::Int)?;
                Ok(StaticType::Int)
            }
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                self.check(lhs, &StaticType::Int)?;
                self.check(rhs, &StaticType::Int)?;
                Ok(StaticType::Bool)
            }
            BinaryOp::Eq | BinaryOp::Ne => {
                let lt = self.infer(lhs, None)?;
                if lt.is_void() {
                    self.error(DiagnosticKind::TypeError, "cannot compare void values".into());
                    return Err(());
                }
                self.check(rhs, &lt)?;
                Ok(StaticType::Bool)
            }
            BinaryOp::And | BinaryOp::Or => {
                self.check(lhs, &StaticType::Bool)?;
                self.check(rhs, &StaticType::Bool)?;
                Ok(StaticType::Bool)
            }
        }
    }

    fn arity(&mut self, builtin: Builtin, args: &[Expr], want: usize) -> Result<(), ()> {
        if args.len() != want {
            self.error(
                DiagnosticKind::TypeError,
                format!("{} expects {} argument(s), got {}", builtin.name(), want, args.len()),
            );
            return Err(());
        }
        Ok(())
    }

    fn infer_builtin(&mut self, builtin: Builtin, args: &[Expr]) -> ExprResult {
        match builtin {
            Builtin::Print => {
                self.arity(builtin, args, 1)?;
                self.check(&args[0], &StaticType::Str)?;
                Ok(StaticType::Void)
            }
            Builtin::Assert => {
                self.arity(builtin, args, 1)?;
                self.check(&args[0], &StaticType::Bool)?;
                Ok(StaticType::Void)
            }
            Builtin::Len => {
                self.arity(builtin, args, 1)?;
                let t = self.infer(&args[0], None)?;
                match t {
                    StaticType::Str | StaticType::List(_) => Ok(StaticType::Int),
                    other => {
                        self.error(DiagnosticKind::TypeError, format!("len expects str or a list, found {}", other));
                        Err(())
                    }
                }
            }
            Builtin::Push => {
                self.arity(builtin, args, 2)?;
                // An empty list literal in the first slot takes its element
                // type from the pushed value.
                if matches!(&args[0], Expr::ListLit(items) if items.is_empty()) {
                    let elem = self.infer(&args[1], None)?;
                    return Ok(StaticType::list_of(elem));
                }
                let t = self.infer(&args[0], None)?;
                match t {
                    StaticType::List(inner) => {
                        self.check(&args[1], &inner)?;
                        Ok(StaticType::list_of(*inner))
                    }
                    other => {
                        self.error(DiagnosticKind::TypeError, format!("push expects a list, found {}", other));
                        Err(())
                    }
                }
            }
            Builtin::Get => {
                self.arity(builtin, args, 2)?;
                let t = self.infer(&args[0], None)?;
                let elem = match t {
                    StaticType::List(inner) => *inner,
                    other => {
                        self.error(DiagnosticKind::TypeError, format!("get expects a list, found {}", other));
                        return Err(());
                    }
                };
                self.check(&args[1], &StaticType::Int)?;
                Ok(elem)
            }
            Builtin::Set => {
                self.arity(builtin, args, 3)?;
                if matches!(&args[0], Expr::ListLit(items) if items.is_empty()) {
                    self.check(&args[1], &StaticType::Int)?;
                    let elem = self.infer(&args[2], None)?;
                    return Ok(StaticType::list_of(elem));
                }
                let t = self.infer(&args[0], None)?;
                let elem = match t {
                    StaticType::List(inner) => *inner,
                    other => {
                        self.error(DiagnosticKind::TypeError, format!("set expects a list, found {}", other));
                        return Err(());
                    }
                };
                self.check(&args[1], &StaticType::Int)?;
                self.check(&args[2], &elem)?;
                Ok(StaticType::list_of(elem))
            }
            Builtin::Concat => {
                self.arity(builtin, args, 2)?;
                self.check(&args[0], &StaticType::Str)?;
                self.check(&args[1], &StaticType::Str)?;
                Ok(StaticType::Str)
            }
            Builtin::ToStr => {
                self.arity(builtin, args, 1)?;
                let t = self.infer(&args[0], None)?;
                match t {
                    StaticType::Int | StaticType::Bool => Ok(StaticType::Str),
                    other => {
                        self.error(DiagnosticKind::TypeError, format!("to_str expects int or bool, found {}", other));
                        Err(())
                    }
                }
            }
            Builtin::Uuid => {
                self.arity(builtin, args, 0)?;
                Ok(StaticType::Str)
            }
        }
    }

    // -- statements ---------------------------------------------------------

    fn check_block(&mut self, block: &Block) {
        self.scopes.push(Vec::new());
        for stmt in &block.statements {
            self.check_stmt(stmt);
        }
        self.scopes.pop();
    }

    fn check_stmt(&mut self, stmt: &Statement) {
        self.stmt = stmt.id;
        match &stmt.kind {
            StmtKind::Let { name, declared_type, init } => {
                let _ = self.check(init, declared_type);
                self.stmt = stmt.id;
                self.declare(name, declared_type.clone());
            }
            StmtKind::Assign { target, value } => {
                match self.lookup(target).cloned() {
                    Some(ty) => {
                        let _ = self.check(value, &ty);
                    }
                    None => {
                        self.error(DiagnosticKind::NameError, format!("assignment to undeclared variable '{}'", target));
                    }
                }
            }
            StmtKind::Expr(e) => {
                let _ = self.infer(e, None);
            }
            StmtKind::If { cond, then_block, else_block } => {
                let _ = self.check(cond, &StaticType::Bool);
                self.check_block(then_block);
                if let Some(els) = else_block {
                    self.check_block(els);
                }
            }
            StmtKind::While { cond, body } => {
                let _ = self.check(cond, &StaticType::Bool);
                self.check_block(body);
            }
            StmtKind::Return(value) => {
                let ret = self.return_type.clone();
                match (value, ret.is_void()) {
                    (None, true) => {}
                    (None, false) => {
                        self.error(DiagnosticKind::TypeError, format!("expected a return value of type {}", ret));
                    }
                    (Some(_), true) => {
                        self.error(DiagnosticKind::TypeError, "cannot return a value from a void function".into());
                    }
                    (Some(e), false) => {
                        let _ = self.check(e, &ret);
                    }
                }
            }
            StmtKind::Block(inner) => self.check_block(inner),
        }
    }
}

/// Checks the whole program. An empty result means the program is accepted.
pub fn typecheck(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let table = function_table(program);

    let mut seen = std::collections::BTreeSet::new();
    for func in &program.functions {
        if Builtin::from_name(&func.name).is_some() {
            diags.push(Diagnostic {
                kind: DiagnosticKind::NameError,
                location: Location::Function { function: func.name.clone() },
                message: format!("'{}' is a reserved builtin name", func.name),
            });
        }
        if !seen.insert(func.name.clone()) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::NameError,
                location: Location::Function { function: func.name.clone() },
                message: format!("duplicate function '{}'", func.name),
            });
        }
    }

    for func in &program.functions {
        let mut checker = Checker {
            table: table.clone(),
            diags: Vec::new(),
            scopes: vec![Vec::new()],
            function: &func.name,
            return_type: func.return_type.clone(),
            stmt: StatementId(0),
        };
        let mut param_names = std::collections::BTreeSet::new();
        for param in &func.params {
            if Builtin::from_name(&param.name).is_some() {
                checker.diags.push(Diagnostic {
                    kind: DiagnosticKind::NameError,
                    location: Location::Function { function: func.name.clone() },
                    message: format!("'{}' is a reserved builtin name", param.name),
                });
            } else if !param_names.insert(param.name.clone()) {
                checker.diags.push(Diagnostic {
                    kind: DiagnosticKind::NameError,
                    location: Location::Function { function: func.name.clone() },
                    message: format!("duplicate parameter '{}'", param.name),
                });
            }
            checker.scopes[0].push((param.name.clone(), param.ty.clone()));
        }

        checker.check_block(&func.body);

        if !func.return_type.is_void() && !block_definitely_returns(&func.body) {
            let location = match func.body.statements.last() {
                Some(last) => Location::Statement { function: func.name.clone(), stmt: last.id },
                None => Location::Function { function: func.name.clone() },
            };
            checker.diags.push(Diagnostic {
                kind: DiagnosticKind::ReturnPathError,
                location,
                message: format!("function '{}' must return {} on every path", func.name, func.return_type),
            });
        }

        diags.extend(checker.diags);
    }

    diags
}

/// Quiet expression typing under a fixed variable environment. Returns
/// `None` where `typecheck` would report an error. Intended for analyses
/// over already-accepted trees.
pub fn expr_type(table: &FunctionTable, env: &BTreeMap<String, StaticType>, expr: &Expr) -> Option<StaticType> {
    let mut checker = Checker {
        table: table.clone(),
        diags: Vec::new(),
        scopes: vec![env.iter().map(|(n, t)| (n.clone(), t.clone())).collect()],
        function: "",
        return_type: StaticType::Void,
        stmt: StatementId(0),
    };
    checker.infer(expr, None).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parser::parse_program;

    fn check_src(src: &str) -> Vec<Diagnostic> {
        typecheck(&parse_program(src).unwrap())
    }

    #[test]
    fn accepts_a_well_typed_program() {
        let diags = check_src(
            "fn add(a: int, b: int) -> int { return a + b; }\n\
             fn test_add() { assert(add(2, 3) == 5); }\n",
        );
        assert!(diags.is_empty(), "unexpected diagnostics: {:?}", diags);
    }

    #[test]
    fn missing_return_path_is_flagged() {
        let diags = check_src("fn f(a: int) -> int { if a > 0 { return 1; } }");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ReturnPathError);
    }

    #[test]
    fn both_branches_returning_satisfies_the_path_check() {
        let diags = check_src("fn f(a: int) -> int { if a > 0 { return 1; } else { return 2; } }");
        assert!(diags.is_empty(), "{:?}", diags);
    }

    #[test]
    fn while_does_not_count_as_returning() {
        let diags = check_src("fn f() -> int { while true { return 1; } }");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ReturnPathError);
    }

    #[test]
    fn shadowing_is_a_duplicate_declaration() {
        let diags = check_src("fn f() { let a: int = 1; { let a: int = 2; a = a; } }");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::NameError);
        assert!(diags[0].message.contains("duplicate declaration"));
    }

    #[test]
    fn sibling_blocks_may_reuse_a_name() {
        let diags = check_src("fn f() { { let a: int = 1; a = a; } { let a: int = 2; a = a; } }");
        assert!(diags.is_empty(), "{:?}", diags);
    }

    #[test]
    fn out_of_scope_use_is_a_name_error() {
        let diags = check_src("fn f() { { let a: int = 1; a = a; } a = 2; }");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::NameError);
    }

    #[test]
    fn empty_list_literal_needs_context() {
        assert!(check_src("fn f() { let xs: [int] = []; xs = xs; }").is_empty());
        let diags = check_src("fn f() { let n: int = len([]); n = n; }");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("empty list"));
    }

    #[test]
    fn push_into_empty_literal_takes_the_element_type() {
        assert!(check_src("fn f() -> [int] { return push([], 3); }").is_empty());
        let diags = check_src("fn f() -> [int] { return push([], true); }");
        assert!(!diags.is_empty());
    }

    #[test]
    fn builtin_names_are_reserved() {
        let diags = check_src("fn f() { let len: int = 1; len = len; }");
        assert!(diags.iter().any(|d| d.message.contains("reserved builtin")));
        let diags = check_src("fn print() { return; }");
        assert!(diags.iter().any(|d| d.message.contains("reserved builtin")));
    }

    #[test]
    fn return_type_mismatches_are_reported() {
        let diags = check_src("fn f() -> int { return true; }");
        assert_eq!(diags[0].kind, DiagnosticKind::TypeError);
        let diags = check_src("fn f() { return 3; }");
        assert!(diags[0].message.contains("void function"));
    }

    #[test]
    fn void_call_cannot_feed_a_value_position() {
        let diags = check_src("fn g() { return; }\nfn f() { let x: int = g(); x = x; }");
        assert!(!diags.is_empty());
    }

    #[test]
    fn diagnostics_name_the_offending_statement() {
        let src = "fn f() { let a: int = 1; a = true; }";
        let prog = parse_program(src).unwrap();
        let diags = typecheck(&prog);
        assert_eq!(diags.len(), 1);
        match &diags[0].location {
            Location::Statement { function, stmt } => {
                assert_eq!(function, "f");
                assert_eq!(*stmt, prog.enumerate_statements()[1].id);
            }
            other => panic!("unexpected location {:?}", other),
        }
    }
}
